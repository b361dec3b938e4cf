use proptest::prelude::*;
use shull::basis::{build_basis, Route};
use shull::candidates::{candidate_count_for, fill_count, DEFAULT_OVERSAMPLE};
use shull::fekete::{approximate_fekete, FeketeSet, Method};
use shull::geometry::normalize_hull_to;
use shull::{MonomialSpec, Polygon, Space};

fn fekete(poly: &Polygon, space: Space, p: u32, method: Method) -> FeketeSet {
    let (n, _) = normalize_hull_to(poly, 1.0).unwrap();
    let spec = MonomialSpec::new(space, p);
    let c = fill_count(&n, candidate_count_for(&spec, DEFAULT_OVERSAMPLE).unwrap()).unwrap();
    approximate_fekete(&n, &spec, &c, method).unwrap()
}

fn corpus() -> Vec<Polygon> {
    vec![
        Polygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap(),
        Polygon::regular(6, 1.0).unwrap(),
        Polygon::t_hull(),
        Polygon::holed_square(),
    ]
}

#[test]
fn fekete_sets_reproduce_moments() {
    for poly in corpus() {
        for space in [Space::P, Space::Q] {
            for p in [2, 5, 8] {
                for method in [Method::Qr, Method::Omp] {
                    let f = fekete(&poly, space, p, method);
                    assert!(f.moment_residual() < 1e-8, "{space} p{p} {method:?}: {}", f.moment_residual());
                    assert!(f.points.iter().all(|x| f.poly.contains(x)));
                }
            }
        }
    }
}

#[test]
fn basis_is_cardinal_and_routes_agree() {
    for poly in corpus() {
        let f = fekete(&poly, Space::P, 6, Method::Qr);
        let d = build_basis(&f, Route::Direct).unwrap();
        let r = build_basis(&f, Route::Reusable).unwrap();
        let card = d.nodal_matrix(d.nodes()) - nalgebra::DMatrix::identity(d.len(), d.len());
        assert!(card.amax() < 1e-8);
        assert!((&d.a - &r.a).amax() < 1e-8 * d.a.amax().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn interpolation_reproduces_polynomials(c in prop::collection::vec(-1.0f64..1.0, 10), x in -0.3f64..0.3, y in -0.3f64..0.3) {
        let f = fekete(&Polygon::regular(6, 1.0).unwrap(), Space::P, 3, Method::Qr);
        let b = build_basis(&f, Route::Direct).unwrap();
        let poly = |p: &shull::Point| {
            let v = f.spec.eval(p);
            v.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>()
        };
        let u = shull::basis::sample_nodes(&b, poly);
        let q = shull::Point::new(x, y);
        prop_assert!((b.eval_nodal(&q).dot(&u) - poly(&q)).abs() < 1e-9);
    }
}
