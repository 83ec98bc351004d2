use polykernel::*;
use proptest::prelude::*;

fn catalog() -> Vec<(WeightModel, f64)> {
    let w = vec![
        WeightModel::ginibre(),
        WeightModel::power(2).unwrap(),
        WeightModel::power(3).unwrap(),
        "radialpoly:c=1,0.5".parse().unwrap(),
    ];
    w.into_iter().map(|w| {
        let r = droplet_radius(&w).unwrap();
        (w, r)
    }).collect()
}

fn fd_laplacian(w: &WeightModel, z: Complex64) -> f64 {
    let h = 1e-4;
    let f = |dx: f64, dy: f64| w.eval(z + Complex64::new(dx, dy));
    let d2 = |g: &dyn Fn(f64) -> f64| (-g(2.0 * h) + 16.0 * g(h) - 30.0 * g(0.0) + 16.0 * g(-h) - g(-2.0 * h)) / (12.0 * h * h);
    0.25 * (d2(&|t| f(t, 0.0)) + d2(&|t| f(0.0, t)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn polarization_diagonal(rad in 0.0f64..2.0, phi in 0.0f64..std::f64::consts::TAU) {
        for (w, r) in catalog() {
            let z = Complex64::from_polar(rad * r, phi);
            let d = (w.polarize(z, z) - w.eval(z)).norm();
            prop_assert!(d < 1e-12 * w.eval(z).max(1.0), "{w}: {d}");
        }
    }

    #[test]
    fn polarization_is_hermitian(a in -1.5f64..1.5, b in -1.5f64..1.5, c in -1.5f64..1.5, d in -1.5f64..1.5) {
        let (z, u) = (Complex64::new(a, b), Complex64::new(c, d));
        for (w, _) in catalog() {
            let diff = (w.polarize(z, u) - w.polarize(u, z).conj()).norm();
            prop_assert!(diff < 1e-13 * w.polarize(z, u).norm().max(1.0));
        }
    }

    #[test]
    fn b_matches_finite_difference_laplacian(rad in 0.05f64..1.5, phi in 0.0f64..std::f64::consts::TAU) {
        for (w, r) in catalog() {
            let z = Complex64::from_polar(rad * r, phi);
            let b = w.hermitian_b(z, z, 0, 0).unwrap();
            prop_assert!(b.im.abs() < 1e-12);
            prop_assert!((b.re - w.laplacian(z.norm())).abs() < 1e-10 * b.re.max(1.0));
            let fd = fd_laplacian(&w, z);
            prop_assert!((b.re - fd).abs() < 1e-6 * b.re.max(1.0), "{w} at {z}: {} vs {fd}", b.re);
        }
    }

    #[test]
    fn theta_branches_agree_near_crossover(
        rad in 0.0f64..1.5, phi in 0.0f64..std::f64::consts::TAU,
        frac in 0.5f64..2.0, dir in 0.0f64..std::f64::consts::TAU,
    ) {
        for (w, r) in catalog() {
            let z = Complex64::from_polar(rad * r, phi);
            let h = 1e-3 * z.norm().max(1.0);
            let u = z + Complex64::from_polar(frac * h, dir);
            for s in 0..3 {
                let a = w.theta_quotient(z, u, s);
                let b = w.theta_series(z, u, s);
                let scale = a.norm().max(b.norm()).max(1e-300);
                prop_assert!((a - b).norm() <= 1e-9 * scale.max(1.0), "{w} s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn dbar_theta_diagonal_is_b(rad in 0.0f64..1.5, phi in 0.0f64..std::f64::consts::TAU) {
        for (w, r) in catalog() {
            let z = Complex64::from_polar(rad * r, phi);
            prop_assert_eq!(w.dbar_theta(z, z, 0).unwrap(), w.hermitian_b(z, z, 0, 0).unwrap());
        }
    }

    #[test]
    fn weight_strings_round_trip(p in 1u32..8) {
        let w = WeightModel::power(p).unwrap();
        let back: WeightModel = w.to_string().parse().unwrap();
        prop_assert_eq!(back, w);
    }
}

#[test]
fn droplet_mass_is_one() {
    for (w, r) in catalog() {
        let mass = polykernel::quadrature::integrate_gl(|t| 2.0 * w.laplacian(t) * t, 0.0, r, 64);
        assert!((mass - 1.0).abs() < 1e-10, "{w}: {mass}");
        assert!((r * w.dq_dr(r) - 2.0).abs() < 1e-10);
    }
}
