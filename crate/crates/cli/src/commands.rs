use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use polykernel::asymptotics::{blowup_report, calibrate_offdroplet, decay_report, offdroplet_decay_check, OffdropletProfile};
use polykernel::dpp::sample_batch;
use polykernel::equilibrium::MonteCarloEstimate;
use polykernel::io::{csv, to_json, write_atomic};
use polykernel::local::{local_kernel, KernelForm, LocalKernelOrder};
use polykernel::{build_space, Error, KernelEvaluator, RadialEquilibrium, Result};
use serde::Serialize;

use crate::{flag_error, selftest, Command, GridArgs, OutArg};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Droplet(a) => {
            let w = a.weight.model()?;
            let eq = RadialEquilibrium::new(&w)?;
            let r = eq.droplet_radius();
            println!("R = {r:.12}");
            if a.out.out.is_some() {
                let r_max = positive("--r-max", a.r_max.unwrap_or(2.0 * r))?;
                let n = at_least("--points", a.points, 2)?;
                let rows = (0..n).map(|i| {
                    let t = r_max * i as f64 / (n - 1) as f64;
                    [t, w.eval_radial(t), eq.potential_radial(t)]
                });
                emit(&a.out, &csv("r,Q,Q_hat", rows))?;
            }
            Ok(())
        }
        Command::Kernel(a) => {
            let k = build(&a.space)?;
            let z = a.grid.center;
            let pairs: Vec<(Complex64, Complex64)> = grid_points(&a.grid)?.into_iter().map(|w| (z, w)).collect();
            emit(&a.out, &k.kernel_csv(&pairs))
        }
        Command::Berezin(a) => {
            let k = build(&a.space)?;
            let z = a.grid.center;
            let pts = grid_points(&a.grid)?;
            let rows = pts
                .iter()
                .map(|w| Ok([w.re, w.im, k.berezin_density(z, *w)?]))
                .collect::<Result<Vec<_>>>()?;
            emit(&a.out, &csv("re,im,berezin", rows))
        }
        Command::Intensity(a) => {
            let k = build(&a.space)?;
            let r_max = positive("--r-max", a.r_max.unwrap_or(2.0 * k.droplet_radius()))?;
            let n = at_least("--points", a.points, 2)?;
            let rows = (0..n).map(|i| {
                let r = r_max * i as f64 / (n - 1) as f64;
                [r, k.one_point_intensity(Complex64::new(r, 0.0))]
            });
            emit(&a.out, &csv("r,gamma1", rows))
        }
        Command::Blowup(a) => {
            let w = a.ladder.weight.model()?;
            let ladder = a.ladder.ladder()?;
            positive("--grid-radius", a.grid_radius)?;
            at_least("--grid-n", a.grid_n, 1)?;
            let report = blowup_report(&w, a.ladder.q, a.z0, &ladder, a.grid_radius, a.grid_n)?;
            if let Some(p) = &a.errors_csv {
                write_atomic(p, report.errors_csv().as_bytes())?;
            }
            emit(&a.out, &to_json(&report)?)
        }
        Command::Decay(a) => {
            let w = a.ladder.weight.model()?;
            let ladder = a.ladder.ladder()?;
            let nd = at_least("--directions", a.directions, 1)?;
            positive("--t-max", a.t_max)?;
            positive("--t-step", a.t_step)?;
            if let Some(r) = a.fit_radius {
                positive("--fit-radius", r)?;
            }
            let dirs: Vec<Complex64> = (0..nd)
                .map(|i| Complex64::from_polar(1.0, std::f64::consts::TAU * i as f64 / nd as f64))
                .collect();
            let steps = (a.t_max / a.t_step + 1e-9).floor() as usize;
            let t: Vec<f64> = (0..=steps).map(|i| a.t_step * i as f64).collect();
            let report = decay_report(&w, a.ladder.q, a.z0, &ladder, &dirs, &t, a.fit_radius)?;
            emit(&a.out, &to_json(&report)?)
        }
        Command::Offdroplet(a) => offdroplet(a),
        Command::Local(a) => {
            let k = build(&a.space)?;
            let spec = k.spec();
            let order = LocalKernelOrder::new(spec.q, a.terms).map_err(|e| flag_error("--terms", e))?;
            let z = a.grid.center;
            let rows = grid_points(&a.grid)?
                .into_iter()
                .map(|w| {
                    let local = local_kernel(k.weight(), order, spec.m, z, w, KernelForm::Weighted)?;
                    let exact = k.weighted_kernel(z, w);
                    Ok([w.re, w.im, local.re, local.im, exact.re, exact.im])
                })
                .collect::<Result<Vec<_>>>()?;
            emit(&a.out, &csv("re_w,im_w,re_local,im_local,re_exact,im_exact", rows))
        }
        Command::Sample(a) => {
            let k = build(&a.space)?;
            let count = at_least("--count", a.count, 1)?;
            let eq = RadialEquilibrium::new(k.weight())?;
            std::fs::create_dir_all(&a.out_dir).map_err(|e| flag_error("--out-dir", e))?;
            let samples = sample_batch(&k, &eq, a.seed, count)?;
            let width = (count - 1).to_string().len().max(4);
            for (i, s) in samples.iter().enumerate() {
                let stem = format!("sample_{i:0width$}");
                write_atomic(&a.out_dir.join(format!("{stem}.csv")), s.to_csv().as_bytes())?;
                write_atomic(&a.out_dir.join(format!("{stem}.json")), s.sidecar_json()?.as_bytes())?;
            }
            eprintln!("wrote {count} configurations of {} points to {}", k.dimension(), a.out_dir.display());
            Ok(())
        }
        Command::Energy(a) => {
            let w = a.weight.model()?;
            let eq = RadialEquilibrium::new(&w)?;
            at_least("--quad", a.quad, 64)?;
            let energy = eq.weighted_energy(a.quad)?;
            let monte_carlo = (a.mc_pairs > 0).then(|| eq.energy_monte_carlo(a.mc_pairs, a.seed));
            let report = EnergyReport {
                weight: w.id(),
                droplet_radius: eq.droplet_radius(),
                energy,
                monte_carlo,
            };
            emit(&a.out, &to_json(&report)?)
        }
        Command::Selftest => selftest::run(),
    }
}

#[derive(Serialize)]
struct EnergyReport {
    weight: String,
    droplet_radius: f64,
    energy: f64,
    monte_carlo: Option<MonteCarloEstimate>,
}

#[derive(Serialize)]
struct OffdropletReport {
    weight: String,
    q: usize,
    droplet_radius: f64,
    safety: f64,
    /// Calibrated `log C` from the first profile.
    log_bound: f64,
    profiles: Vec<OffdropletProfile>,
    /// Whether every later profile stays below `log_bound`.
    within_bound: Vec<bool>,
}

fn offdroplet(a: crate::OffdropletArgs) -> Result<()> {
    let w = a.weight.model()?;
    let eq = RadialEquilibrium::new(&w)?;
    let r = eq.droplet_radius();
    if !(a.from >= 1.0 && a.to > a.from) {
        return Err(flag_error("--from/--to", "need 1 <= from < to (multiples of R)"));
    }
    let n = at_least("--points", a.points, 2)?;
    if !(a.safety >= 1.0) {
        return Err(flag_error("--safety", "must be at least 1"));
    }
    if a.m.is_empty() {
        return Err(flag_error("--m", "empty ladder"));
    }
    let radii: Vec<f64> = (0..n)
        .map(|i| r * (a.from + (a.to - a.from) * i as f64 / (n - 1) as f64))
        .collect();
    let mut profiles = Vec::new();
    for &m in &a.m {
        let spec = crate::space_spec(a.q, Some(m.floor().max(1.0) as usize), m)?;
        let k = build_space(&w, spec)?;
        profiles.push(offdroplet_decay_check(&k, Complex64::new(1.0, 0.0), &radii)?);
    }
    let log_bound = calibrate_offdroplet(&profiles[0], a.safety);
    let within_bound = profiles.iter().map(|p| p.max_margin() <= log_bound).collect();
    let report = OffdropletReport {
        weight: w.id(),
        q: a.q,
        droplet_radius: r,
        safety: a.safety,
        log_bound,
        profiles,
        within_bound,
    };
    emit(&a.out, &to_json(&report)?)
}

fn build(space: &crate::SpaceArgs) -> Result<KernelEvaluator> {
    let w = space.weight.model()?;
    build_space(&w, space.spec()?)
}

fn positive(flag: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(flag_error(flag, format!("{v} is not a positive number")))
    }
}

fn at_least(flag: &str, v: usize, min: usize) -> Result<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(flag_error(flag, format!("must be at least {min}")))
    }
}

fn grid_points(g: &GridArgs) -> Result<Vec<Complex64>> {
    positive("--extent", g.extent)?;
    let n = at_least("--grid-n", g.grid_n, 1)?;
    let step = if n > 1 { 2.0 * g.extent / (n - 1) as f64 } else { 0.0 };
    let c = |i: usize| if n > 1 { -g.extent + step * i as f64 } else { 0.0 };
    Ok((0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| g.center + Complex64::new(c(j), c(i)))
        .collect())
}

fn emit(out: &OutArg, text: &str) -> Result<()> {
    match &out.out {
        Some(p) => write_file(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(Error::from)
        }
    }
}

fn write_file(p: &Path, text: &str) -> Result<()> {
    write_atomic(p, text.as_bytes()).map_err(|e| match e {
        Error::Io(io) => flag_error("--out", io),
        other => other,
    })
}
