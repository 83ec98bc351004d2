use std::time::Instant;

use num_complex::Complex64;
use polykernel::asymptotics::{blowup_compare, blowup_grid, truncation_threshold};
use polykernel::dpp::{sample_batch, sample_configuration};
use polykernel::kernel::GridParams;
use polykernel::{build_space, droplet_radius, Error, RadialEquilibrium, Result, SpaceSpec, WeightModel};

struct Check {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((ok, detail)) => Check { name, ok, detail },
        Err(e) => Check { name, ok: false, detail: format!("error: {e}") },
    }
}

fn weights() -> Vec<WeightModel> {
    vec![WeightModel::ginibre(), WeightModel::power(2).expect("p = 2 is valid")]
}

pub fn run() -> Result<()> {
    let start = Instant::now();
    let checks = vec![
        check("droplet radii", || {
            let g = droplet_radius(&WeightModel::ginibre())?;
            let p = droplet_radius(&weights()[1])?;
            let err = (g - 1.0).abs().max((p - 2f64.powf(-0.25)).abs());
            Ok((err < 1e-12, format!("max error {err:.2e}")))
        }),
        check("equilibrium energies", || {
            let g = RadialEquilibrium::new(&weights()[0])?.weighted_energy(128)?;
            let p = RadialEquilibrium::new(&weights()[1])?.weighted_energy(128)?;
            let want = 0.25 * 2f64.ln() + 0.375;
            let err = (g - 0.75).abs().max((p - want).abs());
            Ok((err < 1e-8, format!("ginibre {g:.12}, power:p=2 {p:.12}")))
        }),
        check("trace, Berezin mass, reproducing residual", || {
            let mut worst = (0.0f64, 0.0f64, 0.0f64);
            for w in weights() {
                for q in [1, 2] {
                    let k = build_space(&w, SpaceSpec::new(q, 20, 20.0)?)?;
                    let params = GridParams::for_spec(&k.spec());
                    let nq = k.dimension() as f64;
                    let z = Complex64::new(0.3 * k.droplet_radius(), 0.1);
                    worst.0 = worst.0.max((k.trace(params) - nq).abs() / nq);
                    worst.1 = worst.1.max((k.berezin_mass(z, params)? - 1.0).abs());
                    worst.2 = worst.2.max(k.reproducing_residual(z, params));
                }
            }
            Ok((
                worst.0 < 1e-8 && worst.1 < 1e-6 && worst.2 < 1e-7,
                format!("trace {:.1e}, mass {:.1e}, residual {:.1e}", worst.0, worst.1, worst.2),
            ))
        }),
        check("Hermitian symmetry and 3-point positivity", || {
            let mut worst = 0.0f64;
            let mut negative = 0;
            for w in weights() {
                let k = build_space(&w, SpaceSpec::new(2, 20, 20.0)?)?;
                let r = k.droplet_radius();
                for i in 0..50 {
                    let z = Complex64::from_polar(r * (0.37 * i as f64).sin().abs(), 1.3 * i as f64);
                    let u = Complex64::from_polar(r * (0.71 * i as f64).cos().abs(), 2.9 * i as f64);
                    let v = Complex64::from_polar(0.5 * r, 0.4 * i as f64);
                    let a = k.weighted_kernel(z, u);
                    let scale = (k.one_point_intensity(z) * k.one_point_intensity(u)).sqrt();
                    worst = worst.max((a - k.weighted_kernel(u, z).conj()).norm() / scale);
                    if k.k_point_intensity(&[z, u, v])? < 0.0 {
                        negative += 1;
                    }
                }
            }
            Ok((worst < 1e-13 && negative == 0, format!("asymmetry {worst:.1e}, negative determinants {negative}")))
        }),
        check("Ginibre q=1 against the exponential partial sum", || {
            let m = 20.0;
            let k = build_space(&weights()[0], SpaceSpec::new(1, 20, m)?)?;
            let mut worst = 0.0f64;
            for i in 0..20 {
                let z = Complex64::from_polar(1.5 * (0.13 * i as f64).sin().abs(), 0.7 * i as f64);
                let u = Complex64::from_polar(1.5 * (0.29 * i as f64).cos().abs(), 1.9 * i as f64);
                let x = z * u.conj() * m;
                let (mut term, mut sum) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
                for j in 1..20 {
                    term *= x / j as f64;
                    sum += term;
                }
                let scale = (k.kernel_eval(z, z).re * k.kernel_eval(u, u).re).sqrt();
                worst = worst.max((k.kernel_eval(z, u) - sum * m).norm() / scale);
            }
            Ok((worst < 1e-10, format!("error relative to sqrt(K(z,z)K(w,w)) {worst:.1e}")))
        }),
        check("Ginibre blow-up is exact past truncation", || {
            let z0 = Complex64::new(0.3, 0.0);
            let m: f64 = 30.0;
            let n = truncation_threshold(m, 0.3 + 2.5 * 2.0 / m.sqrt());
            let mut worst = 0.0f64;
            for q in [1, 2] {
                let k = build_space(&weights()[0], SpaceSpec::new(q, n, m)?)?;
                worst = worst.max(blowup_compare(&k, z0, &blowup_grid(2.5, 9))?.sup_error);
            }
            Ok((worst < 1e-9, format!("sup error {worst:.1e}")))
        }),
        check("sampler point count and determinism", || {
            let w = &weights()[0];
            let k = build_space(w, SpaceSpec::new(2, 10, 10.0)?)?;
            let eq = RadialEquilibrium::new(w)?;
            let batch = sample_batch(&k, &eq, 7, 5)?;
            let again = sample_configuration(&k, &eq, 7)?;
            let counts = batch.iter().all(|s| s.points.len() == 20);
            let same = batch[0].points == again.points;
            Ok((counts && same, format!("{} samples of 20 points, reproducible: {same}", batch.len())))
        }),
    ];
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.ok { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.ok);
    }
    println!("{} checks, {failed} failed, {:.2} s", checks.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        return Err(Error::Numerical(format!("{failed} self-test checks failed")));
    }
    Ok(())
}
