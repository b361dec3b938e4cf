use shull::monomials::enumerate_monomials;
use shull::moments::{boundary_moments, monomial_moments};
use shull::quadrature::polygon_rule;
use shull::{MonomialSpec, Polygon, Space};

fn corpus() -> Vec<(&'static str, Polygon)> {
    vec![
        ("square", Polygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap()),
        ("hexagon", Polygon::regular(6, 1.0).unwrap()),
        ("t-hull", Polygon::t_hull()),
        ("holed square", Polygon::holed_square()),
    ]
}

#[test]
fn boundary_moments_match_area_quadrature() {
    let exps = enumerate_monomials(Space::P, 10);
    for (name, poly) in corpus() {
        let m = monomial_moments(&poly, &exps);
        let rule = polygon_rule(&poly, 10).unwrap();
        for (k, e) in exps.iter().enumerate() {
            let q = rule.integrate(|p| p.x.powi(e[0] as i32) * p.y.powi(e[1] as i32));
            let scale = q.abs().max(1.0);
            assert!((m[k] - q).abs() <= 1e-10 * scale, "{name} {e:?}: {} vs {q}", m[k]);
        }
    }
}

#[test]
fn square_moments_are_analytic() {
    let spec = MonomialSpec::new(Space::Q, 6);
    let m = boundary_moments(&Polygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap(), &spec);
    let one_d = |a: u32| if a % 2 == 1 { 0.0 } else { 2.0 / (a as f64 + 1.0) };
    for (k, e) in spec.exponents().iter().enumerate() {
        assert!((m[k] - one_d(e[0]) * one_d(e[1])).abs() < 1e-13);
    }
}

#[test]
fn moments_are_translation_covariant() {
    // ∫ over shifted domain of 1 and x
    let t = Polygon::t_hull();
    let shifted = Polygon::simple(t.outer().iter().map(|p| shull::Point::new(p.x + 2.0, p.y)).collect()).unwrap();
    let a = monomial_moments(&t, &[[0, 0], [1, 0]]);
    let b = monomial_moments(&shifted, &[[0, 0], [1, 0]]);
    assert!((a[0] - b[0]).abs() < 1e-14);
    assert!((b[1] - (a[1] + 2.0 * a[0])).abs() < 1e-13);
}
