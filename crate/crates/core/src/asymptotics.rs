//! Harnesses measuring the large-`m` behaviour of `K_{q,mQ,n}`: bulk blow-up
//! universality with its convergence rate, off-diagonal decay, decay of the
//! one-point intensity outside the droplet, and the diagonal bound.
//!
//! Everything here is deterministic: grids are fixed, evaluations run in
//! parallel and reductions are sequential.

use num_complex::Complex64;
use serde::Serialize;

use crate::equilibrium::RadialEquilibrium;
use crate::error::{Error, Result};
use crate::gram::SpaceSpec;
use crate::io::csv;
use crate::kernel::{build_space, KernelEvaluator};
use crate::laguerre::laguerre_assoc1;
use crate::par::*;
use crate::weight::WeightModel;

/// Floor applied to logged values: below this a double has underflowed.
pub const LOG_FLOOR: f64 = -745.0;

/// Degree count making the Fock-space tail negligible for points with `|z| <= r_eff`:
/// `n = ⌈m r² + 12 √m r + 40⌉`.
pub fn truncation_threshold(m: f64, r_eff: f64) -> usize {
    (m * r_eff * r_eff + 12.0 * m.sqrt() * r_eff + 40.0).ceil() as usize
}

/// `|L¹_{q-1}(x)| e^{-x/2}` with `x = |ξ - λ|²`: the modulus of the bulk limit.
pub fn bulk_limit(q: usize, dist2: f64) -> Result<f64> {
    Ok(laguerre_assoc1(q - 1, dist2)?.abs() * (-0.5 * dist2).exp())
}

fn check_bulk_point(k: &KernelEvaluator, z0: Complex64) -> Result<f64> {
    let r = k.droplet_radius();
    let dq = k.weight().laplacian(z0.norm());
    if z0.norm() >= r {
        return Err(Error::Precondition(format!(
            "z0 = {z0} is not in the open droplet |z| < {r}"
        )));
    }
    if !(dq > 0.0) {
        return Err(Error::Precondition(format!("ΔQ(z0) = {dq} is not positive")));
    }
    Ok(dq)
}

fn c2(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Blow-up grid: `ξ` on a `grid_n × grid_n` square restricted to `|ξ| <= radius`
/// with `λ = 0`, plus the slice `λ = -ξ` for real `ξ ∈ [-radius/2, radius/2]`.
pub fn blowup_grid(radius: f64, grid_n: usize) -> Vec<(Complex64, Complex64)> {
    let zero = Complex64::new(0.0, 0.0);
    let step = if grid_n > 1 { 2.0 * radius / (grid_n - 1) as f64 } else { 0.0 };
    let coord = |i: usize| if grid_n > 1 { -radius + step * i as f64 } else { 0.0 };
    let mut grid = Vec::new();
    for i in 0..grid_n {
        for j in 0..grid_n {
            let xi = Complex64::new(coord(i), coord(j));
            if xi.norm() <= radius * (1.0 + 1e-12) {
                grid.push((xi, zero));
            }
        }
    }
    for i in 0..grid_n {
        let t = 0.5 * coord(i);
        grid.push((Complex64::new(t, 0.0), Complex64::new(-t, 0.0)));
    }
    grid
}

/// Error field of one blow-up comparison.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupField {
    pub m: f64,
    pub n: usize,
    pub errors: Vec<f64>,
    pub sup_error: f64,
}

/// Compare `(mΔQ(z0))⁻¹ |K_w(z, w)|` at `z = z0 + ξ/√(mΔQ(z0))`, `w = z0 + λ/√(mΔQ(z0))`
/// with `|L¹_{q-1}(|ξ-λ|²)| e^{-|ξ-λ|²/2}` on `grid`.
pub fn blowup_compare(
    k: &KernelEvaluator,
    z0: Complex64,
    grid: &[(Complex64, Complex64)],
) -> Result<BlowupField> {
    let dq = check_bulk_point(k, z0)?;
    let spec = k.spec();
    let scale = spec.m * dq;
    let inv = 1.0 / scale.sqrt();
    let errors = grid
        .par_iter()
        .map(|&(xi, la)| {
            let target = bulk_limit(spec.q, (xi - la).norm_sqr())?;
            let v = k.weighted_kernel(z0 + xi * inv, z0 + la * inv).norm() / scale;
            Ok((v - target).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let sup_error = errors.iter().cloned().fold(0.0, f64::max);
    Ok(BlowupField { m: spec.m, n: spec.n, errors, sup_error })
}

/// Least-squares slope of `log(sup error)` against `log m`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateFit {
    /// `-∞` when some error is exactly zero.
    pub slope: f64,
    pub degenerate: bool,
}

pub fn rate_fit(ms: &[f64], errors: &[f64]) -> Result<RateFit> {
    if ms.len() != errors.len() {
        return Err(Error::Config("rate fit: m values and errors differ in length".into()));
    }
    let mut distinct: Vec<f64> = ms.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Config("rate fit needs at least 3 distinct m values".into()));
    }
    if errors.iter().any(|e| *e <= 0.0) {
        return Ok(RateFit { slope: f64::NEG_INFINITY, degenerate: true });
    }
    let xs: Vec<f64> = ms.iter().map(|m| m.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    Ok(RateFit { slope: linear_fit(&xs, &ys).0, degenerate: false })
}

/// `(slope, intercept, correlation)` of the least-squares line through `(x, y)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let corr = if syy > 0.0 { sxy / (sxx * syy).sqrt() } else { 0.0 };
    (slope, my - slope * mx, corr)
}

/// Blow-up comparison over an `m` ladder.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupReport {
    pub weight: String,
    pub q: usize,
    pub z0: [f64; 2],
    pub grid_radius: f64,
    /// `[re ξ, im ξ, re λ, im λ]` per grid point.
    pub grid: Vec<[f64; 4]>,
    pub runs: Vec<BlowupField>,
    pub slope: f64,
    pub slope_degenerate: bool,
}

impl BlowupReport {
    /// Error fields as CSV: `m,re_xi,im_xi,re_lambda,im_lambda,error`.
    pub fn errors_csv(&self) -> String {
        let rows = self.runs.iter().flat_map(|run| {
            self.grid
                .iter()
                .zip(&run.errors)
                .map(move |(g, e)| [run.m, g[0], g[1], g[2], g[3], *e])
        });
        csv("m,re_xi,im_xi,re_lambda,im_lambda,error", rows)
    }
}

/// Build `A²_{q,mQ,n}` for each `(m, n)` and run [`blowup_compare`] on a common grid.
pub fn blowup_report(
    weight: &WeightModel,
    q: usize,
    z0: Complex64,
    ladder: &[(f64, usize)],
    grid_radius: f64,
    grid_n: usize,
) -> Result<BlowupReport> {
    let grid = blowup_grid(grid_radius, grid_n);
    let mut runs = Vec::with_capacity(ladder.len());
    for &(m, n) in ladder {
        let k = build_space(weight, SpaceSpec::new(q, n, m)?)?;
        runs.push(blowup_compare(&k, z0, &grid)?);
    }
    let (slope, slope_degenerate) = if ladder.len() >= 3 {
        let ms: Vec<f64> = runs.iter().map(|r| r.m).collect();
        let es: Vec<f64> = runs.iter().map(|r| r.sup_error).collect();
        let fit = rate_fit(&ms, &es)?;
        (fit.slope, fit.degenerate)
    } else {
        (f64::NAN, true)
    };
    Ok(BlowupReport {
        weight: weight.id(),
        q,
        z0: c2(z0),
        grid_radius,
        grid: grid.iter().map(|(a, b)| [a.re, a.im, b.re, b.im]).collect(),
        runs,
        slope,
        slope_degenerate,
    })
}

/// One `m` of an off-diagonal scan.
#[derive(Debug, Clone, Serialize)]
pub struct DecayRun {
    pub m: f64,
    pub n: usize,
    /// Separations `s = t / √(mΔQ(z0))`.
    pub separations: Vec<f64>,
    /// `log |K_w(z0, z0 + s·dir)|²`, indexed `[direction][separation]`.
    pub log_values: Vec<Vec<f64>>,
    /// Whether any value hit [`LOG_FLOOR`].
    pub underflow: bool,
    /// Slope `β(m)` of the log values against `s` on the fitting window.
    pub beta: f64,
    /// `β(m) / √m`.
    pub coefficient: f64,
    pub fit_points: usize,
}

/// Off-diagonal decay over an `m` ladder.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub weight: String,
    pub q: usize,
    pub z0: [f64; 2],
    /// Blow-up separations `t`; the same for every `m`.
    pub t_grid: Vec<f64>,
    pub directions: Vec<[f64; 2]>,
    /// `r₀,K`: separations beyond this radius are not fitted.
    pub fit_radius: f64,
    pub runs: Vec<DecayRun>,
    /// `(max - min) / mean` of the coefficients, as a fraction.
    pub coefficient_spread: f64,
}

/// Record `log |K_w(z0, z0 + s·dir)|²` for each direction and separation.
pub fn offdiagonal_scan(
    k: &KernelEvaluator,
    z0: Complex64,
    directions: &[Complex64],
    separations: &[f64],
) -> Result<(Vec<Vec<f64>>, bool)> {
    let r = k.droplet_radius();
    for d in directions {
        if (d.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!("direction {d} is not a unit vector")));
        }
        for s in separations {
            if (z0 + d * s).norm() >= r {
                return Err(Error::Precondition(format!(
                    "z0 + {s}·{d} leaves the droplet |z| < {r}"
                )));
            }
        }
    }
    let mut underflow = false;
    let mut rows = Vec::with_capacity(directions.len());
    for d in directions {
        let row: Vec<f64> = separations
            .par_iter()
            .map(|s| k.weighted_kernel(z0, z0 + d * s).norm_sqr().ln())
            .collect();
        let row: Vec<f64> = row
            .into_iter()
            .map(|v| {
                if v < LOG_FLOOR {
                    underflow = true;
                    LOG_FLOOR
                } else {
                    v
                }
            })
            .collect();
        rows.push(row);
    }
    Ok((rows, underflow))
}

/// Default `r₀,K`: half the distance from `z0` to the droplet boundary and,
/// for power weights, to the critical point at the origin.
pub fn default_fit_radius(weight: &WeightModel, z0: Complex64) -> Result<f64> {
    let r = RadialEquilibrium::new(weight)?.droplet_radius();
    let mut dist = r - z0.norm();
    if weight.laplacian(0.0) == 0.0 {
        dist = dist.min(z0.norm());
    }
    Ok(0.5 * dist)
}

/// `t` values within `exclusion` of a zero `√x` of `L¹_{q-1}(x)`: the limiting
/// kernel vanishes there and its logarithm is not a decay signal.
fn near_laguerre_zero(q: usize, t: f64, exclusion: f64) -> bool {
    if q < 2 {
        return false;
    }
    // Zeros by sign changes on a fine grid plus bisection.
    let f = |x: f64| laguerre_assoc1(q - 1, x).unwrap_or(1.0);
    let (mut x, h) = (0.0, 1e-3);
    let bound = 4.0 * q as f64 + 10.0;
    while x < bound {
        let (a, b) = (f(x), f(x + h));
        if a == 0.0 || a * b < 0.0 {
            let (mut lo, mut hi) = (x, x + h);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if f(lo) * f(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if (t - (0.5 * (lo + hi)).sqrt()).abs() < exclusion {
                return true;
            }
        }
        x += h;
    }
    false
}

/// Off-diagonal decay over a ladder of `(m, n)`.
///
/// Separations are given in blow-up units `t`, so each `m` is probed at
/// `s = t/√(mΔQ(z0))`. Points with `s > r₀,K` at any `m` are dropped so the
/// fitting window is identical in `t` across the ladder, and points within
/// `0.3` of a zero of the bulk limit are excluded from the fit. Separations
/// that would leave the droplet at the smallest `m` are not scanned.
pub fn decay_report(
    weight: &WeightModel,
    q: usize,
    z0: Complex64,
    ladder: &[(f64, usize)],
    directions: &[Complex64],
    t_grid: &[f64],
    fit_radius: Option<f64>,
) -> Result<DecayReport> {
    let dq = weight.laplacian(z0.norm());
    if !(dq > 0.0) {
        return Err(Error::Precondition(format!("ΔQ(z0) = {dq} is not positive")));
    }
    let fit_radius = match fit_radius {
        Some(r) => r,
        None => default_fit_radius(weight, z0)?,
    };
    let m_min = ladder.iter().map(|l| l.0).fold(f64::INFINITY, f64::min);
    let t_max = fit_radius * (m_min * dq).sqrt();
    // Keep the separations that stay inside the droplet at the smallest m.
    let inside = (RadialEquilibrium::new(weight)?.droplet_radius() - z0.norm()) * (m_min * dq).sqrt();
    let t_grid: Vec<f64> = t_grid.iter().cloned().filter(|t| *t < inside).collect();
    let t_grid = t_grid.as_slice();
    let fit_mask: Vec<bool> = t_grid
        .iter()
        .map(|&t| t <= t_max && !near_laguerre_zero(q, t, 0.3))
        .collect();
    let mut runs = Vec::with_capacity(ladder.len());
    for &(m, n) in ladder {
        let k = build_space(weight, SpaceSpec::new(q, n, m)?)?;
        check_bulk_point(&k, z0)?;
        let inv = 1.0 / (m * dq).sqrt();
        let separations: Vec<f64> = t_grid.iter().map(|t| t * inv).collect();
        let (log_values, underflow) = offdiagonal_scan(&k, z0, directions, &separations)?;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for row in &log_values {
            for (i, v) in row.iter().enumerate() {
                if fit_mask[i] && *v > LOG_FLOOR {
                    xs.push(separations[i]);
                    ys.push(*v);
                }
            }
        }
        if xs.len() < 3 {
            return Err(Error::Precondition(format!(
                "only {} separations inside the fitting window at m = {m}",
                xs.len()
            )));
        }
        let beta = linear_fit(&xs, &ys).0;
        runs.push(DecayRun {
            m,
            n,
            separations,
            log_values,
            underflow,
            beta,
            coefficient: beta / m.sqrt(),
            fit_points: xs.len(),
        });
    }
    let coeffs: Vec<f64> = runs.iter().map(|r| r.coefficient).collect();
    let mean = coeffs.iter().sum::<f64>() / coeffs.len() as f64;
    let spread = (coeffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - coeffs.iter().cloned().fold(f64::INFINITY, f64::min))
        / mean.abs();
    Ok(DecayReport {
        weight: weight.id(),
        q,
        z0: c2(z0),
        t_grid: t_grid.to_vec(),
        directions: directions.iter().map(|d| c2(*d)).collect(),
        fit_radius,
        runs,
        coefficient_spread: spread,
    })
}

/// `log Γ¹(z) + m(Q - Q̂)(z) - 2 log m` along a ray outside the droplet.
#[derive(Debug, Clone, Serialize)]
pub struct OffdropletProfile {
    pub m: f64,
    pub n: usize,
    pub radii: Vec<f64>,
    pub margins: Vec<f64>,
    /// Whether the margins are non-increasing for `|z| >= 1.2R` (logged, not asserted).
    pub monotone_tail: bool,
}

impl OffdropletProfile {
    pub fn max_margin(&self) -> f64 {
        self.margins.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn offdroplet_decay_check(
    k: &KernelEvaluator,
    direction: Complex64,
    radii: &[f64],
) -> Result<OffdropletProfile> {
    let spec = k.spec();
    let eq = RadialEquilibrium::new(k.weight())?;
    let big_r = eq.droplet_radius();
    if (spec.n as f64) > spec.m {
        return Err(Error::Precondition(format!("n = {} exceeds m = {}", spec.n, spec.m)));
    }
    if let Some(r) = radii.iter().find(|r| **r < big_r * (1.0 - 1e-12)) {
        return Err(Error::Precondition(format!("radius {r} is inside the droplet (R = {big_r})")));
    }
    let unit = direction / direction.norm();
    let margins: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            let z = unit * r;
            let gap = k.weight().eval(z) - eq.equilibrium_potential(z);
            k.one_point_intensity(z).ln() + spec.m * gap - 2.0 * spec.m.ln()
        })
        .collect();
    let tail: Vec<f64> = radii
        .iter()
        .zip(&margins)
        .filter(|(r, _)| **r >= 1.2 * big_r)
        .map(|(_, v)| *v)
        .collect();
    let monotone_tail = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    if !monotone_tail {
        log::info!("off-droplet margin is not monotone beyond 1.2R at m = {}", spec.m);
    }
    Ok(OffdropletProfile {
        m: spec.m,
        n: spec.n,
        radii: radii.to_vec(),
        margins,
        monotone_tail,
    })
}

/// Calibrated bound `log C` from a reference profile, widened by `log safety`.
pub fn calibrate_offdroplet(reference: &OffdropletProfile, safety: f64) -> f64 {
    reference.max_margin() + safety.ln()
}

/// `A_S = sup ΔQ` over points within distance 1 of the droplet.
pub fn laplacian_sup_near_droplet(weight: &WeightModel, droplet_radius: f64) -> f64 {
    let n = 4096;
    (0..=n)
        .map(|i| weight.laplacian((droplet_radius + 1.0) * i as f64 / n as f64))
        .fold(0.0, f64::max)
}

/// Outcome of [`diagonal_bound_check`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiagonalBound {
    pub worst_ratio: f64,
    pub bound: f64,
    pub a_s: f64,
}

/// `max Γ¹(z) / [m(8 + 48A_S²)e^{A_S}]` over a polar grid on the droplet.
pub fn diagonal_bound_check(k: &KernelEvaluator) -> Result<DiagonalBound> {
    let spec = k.spec();
    if spec.q != 2 {
        return Err(Error::Precondition(format!("diagonal bound needs q = 2, got {}", spec.q)));
    }
    let big_r = k.droplet_radius();
    let a_s = laplacian_sup_near_droplet(k.weight(), big_r);
    let bound = spec.m * (8.0 + 48.0 * a_s * a_s) * a_s.exp();
    let (nr, nphi) = (48, 16);
    let pts: Vec<Complex64> = (0..=nr)
        .flat_map(|i| {
            (0..nphi).map(move |j| {
                Complex64::from_polar(big_r * i as f64 / nr as f64, std::f64::consts::TAU * j as f64 / nphi as f64)
            })
        })
        .collect();
    let vals: Vec<f64> = pts.par_iter().map(|z| k.one_point_intensity(*z)).collect();
    let worst = vals.iter().cloned().fold(0.0, f64::max);
    Ok(DiagonalBound { worst_ratio: worst / bound, bound, a_s })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rate_fit_examples() {
        let ms = [40.0, 80.0, 160.0];
        let es: Vec<f64> = ms.iter().map(|m: &f64| 3.0 * m.powf(-0.5)).collect();
        assert!((rate_fit(&ms, &es).unwrap().slope + 0.5).abs() < 1e-12);
        assert!(rate_fit(&ms, &[0.2, 0.2, 0.2]).unwrap().slope.abs() < 1e-12);
        let d = rate_fit(&ms, &[0.1, 0.0, 0.1]).unwrap();
        assert!(d.degenerate && d.slope == f64::NEG_INFINITY);
        assert!(rate_fit(&[1.0, 1.0, 2.0], &[1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn blowup_grid_shape() {
        let g = blowup_grid(2.5, 17);
        assert!(g.iter().all(|(x, l)| x.norm() <= 2.5 + 1e-9 && l.norm() <= 2.5 + 1e-9));
        assert!(g.iter().any(|(x, l)| *l != c(0.0, 0.0) && (*x + *l).norm() < 1e-15));
        assert_eq!(g.iter().filter(|(_, l)| *l != c(0.0, 0.0)).count(), 16);
    }

    #[test]
    fn bulk_limit_values() {
        assert!((bulk_limit(2, 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((bulk_limit(1, 2.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(bulk_limit(2, 2.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn ginibre_blowup_is_exact_past_truncation() {
        let z0 = c(0.5, 0.0);
        let m: f64 = 30.0;
        for q in [1, 2] {
            let r_eff = z0.norm() + 2.5 / m.sqrt() * 1.5;
            let n = truncation_threshold(m, r_eff);
            let k = build_space(&WeightModel::ginibre(), SpaceSpec::new(q, n, m).unwrap()).unwrap();
            let f = blowup_compare(&k, z0, &blowup_grid(2.5, 9)).unwrap();
            assert!(f.sup_error < 1e-9, "q={q}: {}", f.sup_error);
        }
    }

    #[test]
    fn blowup_preconditions() {
        let k = build_space(&WeightModel::power(2).unwrap(), SpaceSpec::new(2, 10, 10.0).unwrap()).unwrap();
        assert!(matches!(blowup_compare(&k, c(0.0, 0.0), &[]), Err(Error::Precondition(_))));
        assert!(matches!(blowup_compare(&k, c(2.0, 0.0), &[]), Err(Error::Precondition(_))));
    }

    #[test]
    fn ginibre_q1_scan_is_gaussian() {
        let m: f64 = 30.0;
        let n = truncation_threshold(m, 0.8);
        let k = build_space(&WeightModel::ginibre(), SpaceSpec::new(1, n, m).unwrap()).unwrap();
        let seps = [0.0, 0.05, 0.1, 0.2, 0.3];
        let (rows, under) = offdiagonal_scan(&k, c(0.0, 0.0), &[c(0.0, 1.0)], &seps).unwrap();
        assert!(!under);
        for (s, v) in seps.iter().zip(&rows[0]) {
            assert!((v - (2.0 * m.ln() - m * s * s)).abs() < 1e-9);
        }
        assert!((rows[0][0] - (k.one_point_intensity(c(0.0, 0.0)).powi(2)).ln()).abs() < 1e-12);
    }

    #[test]
    fn laguerre_zero_exclusion() {
        assert!(near_laguerre_zero(2, 2f64.sqrt() + 0.1, 0.3));
        assert!(!near_laguerre_zero(2, 0.8, 0.3));
        assert!(!near_laguerre_zero(1, 1.4, 0.3));
        assert!(near_laguerre_zero(3, 2.175, 0.05));
    }

    #[test]
    fn diagonal_bound_small_cases() {
        let k = build_space(&WeightModel::ginibre(), SpaceSpec::new(2, 1, 1.0).unwrap()).unwrap();
        assert!(diagonal_bound_check(&k).unwrap().worst_ratio < 1.0);
        let k = build_space(&WeightModel::ginibre(), SpaceSpec::new(2, 40, 40.0).unwrap()).unwrap();
        let r = diagonal_bound_check(&k).unwrap().worst_ratio;
        assert!(r < 1.0 && (r - 2.0 / (56.0 * 1f64.exp())).abs() < 0.005, "{r}");
        let k1 = build_space(&WeightModel::ginibre(), SpaceSpec::new(1, 4, 4.0).unwrap()).unwrap();
        assert!(diagonal_bound_check(&k1).is_err());
    }

    #[test]
    fn offdroplet_boundary_case_and_preconditions() {
        let k = build_space(&WeightModel::ginibre(), SpaceSpec::new(1, 20, 20.0).unwrap()).unwrap();
        let p = offdroplet_decay_check(&k, c(1.0, 0.0), &[1.0, 1.5]).unwrap();
        let g = k.one_point_intensity(c(1.0, 0.0));
        assert!((p.margins[0] - (g.ln() - 2.0 * 20f64.ln())).abs() < 1e-10);
        assert!(offdroplet_decay_check(&k, c(1.0, 0.0), &[0.5]).is_err());
        let big_n = build_space(&WeightModel::ginibre(), SpaceSpec::new(1, 30, 20.0).unwrap()).unwrap();
        assert!(offdroplet_decay_check(&big_n, c(1.0, 0.0), &[1.5]).is_err());
    }
}
