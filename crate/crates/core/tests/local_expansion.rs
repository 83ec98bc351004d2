use polykernel::asymptotics::truncation_threshold;
use polykernel::laguerre::laguerre_assoc1;
use polykernel::local::*;
use polykernel::*;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest relative error of the weighted local kernel against the exact
/// kernel at `z0 + offset·e^{iφ}` around `z0`, over 8 directions.
fn local_error(k: &KernelEvaluator, z0: Complex64, offset: f64, terms: usize) -> f64 {
    let spec = k.spec();
    let order = LocalKernelOrder::new(spec.q, terms).unwrap();
    (0..8)
        .map(|i| {
            let w = z0 + Complex64::from_polar(offset, std::f64::consts::TAU * i as f64 / 8.0);
            let exact = k.weighted_kernel(z0, w);
            let approx = local_kernel(k.weight(), order, spec.m, z0, w, KernelForm::Weighted).unwrap();
            (approx - exact).norm() / exact.norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn ginibre_q2_local_kernel_is_exact() {
    let w = WeightModel::ginibre();
    for m in [5.0f64, 20.0, 50.0] {
        let n = truncation_threshold(m, 1.0);
        let k = build_space(&w, SpaceSpec::new(2, n, m).unwrap()).unwrap();
        let pts: Vec<Complex64> = (0..7)
            .flat_map(|i| (0..7).map(move |j| c(-0.9 + 0.3 * i as f64, -0.9 + 0.3 * j as f64)))
            .filter(|z| z.norm() <= 1.0)
            .collect();
        for &z in &pts {
            for &u in &pts {
                let exact = k.weighted_kernel(z, u);
                let local = local_kernel_q2(&w, m, z, u, 2, KernelForm::Weighted).unwrap();
                let scale = (k.one_point_intensity(z) * k.one_point_intensity(u)).sqrt();
                assert!((exact - local).norm() < 1e-8 * scale, "m={m} z={z} u={u}");
                let x = m * (z - u).norm_sqr();
                let fock = m * laguerre_assoc1(1, x).unwrap().abs() * (-0.5 * x).exp();
                assert!((local.norm() - fock).abs() <= 1e-12 * scale);
                if x <= 1.0 {
                    assert!((exact - local).norm() < 1e-8 * local.norm(), "m={m} z={z} u={u}");
                }
            }
        }
    }
}

#[test]
fn ginibre_q3_diagonal() {
    let w = WeightModel::ginibre();
    let z = c(0.3, 0.2);
    let m = 7.0;
    let v = local_kernel_leading(&w, 3, m, z, z, KernelForm::Plain).unwrap();
    let want = 3.0 * m * (m * z.norm_sqr()).exp();
    assert!((v - want).norm() < 1e-13 * want);
}

#[test]
fn higher_orders_improve_power2() {
    let w = WeightModel::power(2).unwrap();
    let z0 = c(0.6 * droplet_radius(&w).unwrap(), 0.0);
    let mut errs = Vec::new();
    for m in [40.0f64, 160.0, 320.0] {
        let k = build_space(&w, SpaceSpec::new(2, m as usize, m).unwrap()).unwrap();
        let e: Vec<f64> = (1..=3).map(|t| local_error(&k, z0, 0.9 / m.sqrt(), t)).collect();
        errs.push(e);
    }
    for e in &errs[1..] {
        assert!(e[1] < e[0] && e[2] < e[1], "{e:?}");
    }
    // Each added order gains a power of m.
    assert!(errs[2].iter().zip(&errs[1]).all(|(a, b)| a < b));
    assert!(errs[2][2] / errs[1][2] < errs[2][1] / errs[1][1]);
}

#[test]
fn q1_two_terms_beat_one() {
    let w: WeightModel = "radialpoly:c=1,0.5".parse().unwrap();
    let z0 = c(0.5 * droplet_radius(&w).unwrap(), 0.1);
    for m in [80.0f64, 160.0] {
        let k = build_space(&w, SpaceSpec::new(1, m as usize, m).unwrap()).unwrap();
        let (e1, e2) = (local_error(&k, z0, 1.0 / m.sqrt(), 1), local_error(&k, z0, 1.0 / m.sqrt(), 2));
        assert!(e2 < 0.1 * e1, "m={m}: {e1} {e2}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn weighted_leading_modulus_is_swap_invariant(
        a in -0.8f64..0.8, b in -0.8f64..0.8, d in -0.8f64..0.8, e in -0.8f64..0.8,
        q in 1usize..4, m in 1.0f64..40.0,
    ) {
        let (z, u) = (c(a, b), c(d, e));
        for w in [WeightModel::ginibre(), WeightModel::power(2).unwrap(), "radialpoly:c=1,0.3".parse().unwrap()] {
            let x = local_kernel_leading(&w, q, m, z, u, KernelForm::Weighted);
            let y = local_kernel_leading(&w, q, m, u, z, KernelForm::Weighted);
            if let (Ok(x), Ok(y)) = (x, y) {
                prop_assert!((x.norm() - y.norm()).abs() <= 1e-10 * x.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn diagonal_coefficients_are_closed_form(a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let z = c(a, b);
        for w in [WeightModel::ginibre(), WeightModel::power(2).unwrap(), "radialpoly:c=1,0.3".parse().unwrap()] {
            let Ok(jet) = BJet::new(&w, z, z) else { continue };
            let [b20, b21, b22] = q2_coefficients(&jet, z, z);
            let bzz = jet.0[0][0];
            let lzw = jet.0[1][1] / bzz - jet.0[1][0] * jet.0[0][1] / (bzz * bzz);
            prop_assert_eq!(b20, c(0.0, 0.0));
            prop_assert_eq!(b21, 2.0 * bzz);
            prop_assert_eq!(b22, 2.0 * lzw);
        }
    }
}
