use proptest::prelude::*;
use shull::geometry::{normalize_hull_to, segment_distance};
use shull::{AffineMap, Point, Polygon};

/// Star-shaped polygon around the origin with strictly increasing angles.
fn star(jitter: &[(f64, f64)]) -> Polygon {
    let n = jitter.len();
    let pts = jitter
        .iter()
        .enumerate()
        .map(|(k, &(da, r))| {
            let t = std::f64::consts::TAU * (k as f64 + 0.4 * da) / n as f64;
            Point::new(r * t.cos(), r * t.sin())
        })
        .collect();
    Polygon::simple(pts).unwrap()
}

fn star_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..1.0, 0.2f64..1.0), 3..14)
}

/// Crossing-number oracle.
fn parity_inside(poly: &Polygon, p: &Point) -> bool {
    let mut inside = false;
    for (a, b) in poly.edges() {
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

proptest! {
    #[test]
    fn contains_matches_crossing_number(j in star_strategy(), qx in -1.2f64..1.2, qy in -1.2f64..1.2) {
        let poly = star(&j);
        let q = Point::new(qx, qy);
        let near = poly.edges().iter().any(|(a, b)| segment_distance(&q, a, b) < 1e-9);
        prop_assume!(!near);
        prop_assert_eq!(poly.contains(&q), parity_inside(&poly, &q));
    }

    #[test]
    fn triangulation_preserves_area(j in star_strategy()) {
        let poly = star(&j);
        let tris = poly.triangulate().unwrap();
        prop_assert_eq!(tris.len(), poly.outer().len() - 2);
        let total: f64 = tris.iter().map(|t| 0.5 * ((t[1] - t[0]).perp(&(t[2] - t[0])))).sum();
        prop_assert!((total - poly.signed_area()).abs() < 1e-12);
    }

    #[test]
    fn normalization_round_trip(j in star_strategy(), s in 0.1f64..50.0, tx in -10.0f64..10.0, ty in -10.0f64..10.0) {
        let m = AffineMap::new(s, nalgebra::Vector2::new(tx, ty)).unwrap();
        let poly = star(&j).map(&m);
        let (n, map) = normalize_hull_to(&poly, 1.0).unwrap();
        prop_assert!((n.max_abs_coordinate() - 1.0).abs() < 1e-12);
        prop_assert!(n.centroid().coords.norm() < 1e-12 * (1.0 + (tx.abs() + ty.abs()) / s));
        let back = n.map(&map.inverse());
        for (a, b) in back.outer().iter().zip(poly.outer()) {
            prop_assert!((a - b).norm() < 1e-12 * (1.0 + b.coords.norm()));
        }
        prop_assert!((n.signed_area() - poly.signed_area() * map.scale * map.scale).abs() < 1e-10 * n.signed_area());
    }

    #[test]
    fn text_round_trip(j in star_strategy()) {
        let poly = star(&j);
        let back: Polygon = poly.to_string().parse().unwrap();
        prop_assert_eq!(back, poly);
    }
}

#[test]
fn corpus_shapes() {
    assert!(Polygon::t_hull().reflex_vertices().len() == 2);
    assert!((Polygon::holed_square().signed_area() - 3.0).abs() < 1e-15);
    assert!(Polygon::regular(6, 1.0).unwrap().is_convex());
}
