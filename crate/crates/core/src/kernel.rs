//! Evaluation of `K_{q,mQ,n}` and the statistics of its determinantal process.
//!
//! With `u_a(z) = z̄^r z^j / √M_{2r+d}` for the members of block `d`, the
//! block's orthonormal functions are `L⁻¹ u`, so
//!
//! ```text
//! K(z, w) = Σ_d (L_d⁻¹ u_d(z)) · conj(L_d⁻¹ u_d(w)).
//! ```
//!
//! Feature vectors are computed from log magnitudes with a common shift so
//! nothing overflows; weighted quantities fold `e^{-mQ/2}` into that shift.

use num_complex::Complex64;

use crate::equilibrium::droplet_radius;
use crate::error::{Error, Result};
use crate::gram::{GramFactorization, SpaceSpec};
use crate::io::{csv, fmt_f64};
use crate::par::*;
use crate::quadrature::PolarGrid;
use crate::weight::WeightModel;

/// Header of kernel-grid CSV exports.
pub const KERNEL_CSV_HEADER: &str = "re_z,im_z,re_w,im_w,re_K,im_K,weighted_abs";

/// Determinants more negative than this times the product of the diagonal trigger a warning.
pub const NEGATIVE_DET_TOL: f64 = 1e-10;

/// Orthonormal basis values at a point, scaled by `e^{-log_shift}`.
#[derive(Debug, Clone)]
pub struct Features {
    pub log_shift: f64,
    pub values: Vec<Complex64>,
}

/// Immutable evaluator of the reproducing kernel of `A²_{q,mQ,n}`.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    gram: GramFactorization,
    droplet_radius: f64,
}

/// Build the Gram factorization of `A²_{q,mQ,n}` and wrap it in an evaluator.
pub fn build_space(w: &WeightModel, spec: SpaceSpec) -> Result<KernelEvaluator> {
    KernelEvaluator::new(GramFactorization::build(w, spec)?)
}

/// Quadrature grid for integrals over the plane.
#[derive(Debug, Clone, Copy)]
pub struct GridParams {
    pub n_r: usize,
    pub n_phi: usize,
    /// Defaults to `R + 10 m^{-1/2}`.
    pub r_max: Option<f64>,
}

impl GridParams {
    /// A grid that integrates every `|φ(w)|²e^{-mQ}`-type integrand of the space to near machine precision.
    pub fn for_spec(spec: &SpaceSpec) -> Self {
        GridParams {
            n_r: 160 + 2 * (spec.n + spec.q),
            n_phi: 2 * (spec.n + spec.q) + 8,
            r_max: None,
        }
    }
}

fn ln_abs(z: Complex64) -> f64 {
    z.norm().ln()
}

impl KernelEvaluator {
    pub fn new(gram: GramFactorization) -> Result<Self> {
        let droplet_radius = droplet_radius(gram.weight())?;
        Ok(KernelEvaluator { gram, droplet_radius })
    }

    pub fn spec(&self) -> SpaceSpec {
        self.gram.spec()
    }

    pub fn weight(&self) -> &WeightModel {
        self.gram.weight()
    }

    pub fn gram(&self) -> &GramFactorization {
        &self.gram
    }

    pub fn droplet_radius(&self) -> f64 {
        self.droplet_radius
    }

    pub fn dimension(&self) -> usize {
        self.spec().dimension()
    }

    /// `½ m Q(z)`.
    fn half_mq(&self, z: Complex64) -> f64 {
        0.5 * self.spec().m * self.weight().eval(z)
    }

    /// Orthonormal basis evaluated at `z`, ordered block by block.
    pub fn features(&self, z: Complex64) -> Features {
        let lr = ln_abs(z);
        let at_origin = z.norm() == 0.0;
        let blocks = self.gram.blocks();
        // |z̄^r z^{r+d}| / √M = exp(e ln|z| - log_scale), with 0·ln 0 = 0.
        let log_mag = |e: usize, ls: f64| if e == 0 { -ls } else { e as f64 * lr - ls };
        let mut shift = f64::NEG_INFINITY;
        for b in blocks {
            for i in 0..b.size() {
                shift = shift.max(log_mag(b.exponent(i), b.log_scale[i]));
            }
        }
        let unit = if at_origin { Complex64::new(1.0, 0.0) } else { z / z.norm() };
        let mut values = Vec::with_capacity(self.dimension());
        let mut u = Vec::with_capacity(self.spec().q);
        for b in blocks {
            let k = b.size();
            u.clear();
            u.extend((0..k).map(|i| (log_mag(b.exponent(i), b.log_scale[i]) - shift).exp()));
            let phase = if at_origin {
                if b.d == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
            } else {
                unit.powi(b.d as i32)
            };
            for row in 0..k {
                let s: f64 = (0..=row).map(|c| b.chol_inv[row * k + c] * u[c]).sum();
                values.push(phase * s);
            }
        }
        Features { log_shift: shift, values }
    }

    /// Basis values times `e^{-mQ(z)/2}`, without residual shift.
    pub fn weighted_features(&self, z: Complex64) -> Vec<Complex64> {
        let f = self.features(z);
        let scale = (f.log_shift - self.half_mq(z)).exp();
        f.values.into_iter().map(|v| v * scale).collect()
    }

    fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
    }

    /// `K(z, w) = e^{log} · c`, returned as `(log, c)` so large `m` cannot overflow.
    pub fn kernel_log_parts(&self, z: Complex64, w: Complex64) -> (f64, Complex64) {
        let fz = self.features(z);
        let fw = self.features(w);
        (fz.log_shift + fw.log_shift, Self::dot(&fz.values, &fw.values))
    }

    /// `K_{q,mQ,n}(z, w)`.
    pub fn kernel_eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        let (l, c) = self.kernel_log_parts(z, w);
        c * l.exp()
    }

    /// Correlation kernel `K(z, w) e^{-mQ(z)/2 - mQ(w)/2}`.
    pub fn weighted_kernel(&self, z: Complex64, w: Complex64) -> Complex64 {
        let (l, c) = self.kernel_log_parts(z, w);
        c * (l - self.half_mq(z) - self.half_mq(w)).exp()
    }

    /// `Γ¹(z) = K(z, z) e^{-mQ(z)}`.
    pub fn one_point_intensity(&self, z: Complex64) -> f64 {
        let f = self.features(z);
        let s: f64 = f.values.iter().map(|v| v.norm_sqr()).sum();
        s * (2.0 * (f.log_shift - self.half_mq(z))).exp()
    }

    /// Matrix `[K(z_i, z_j) e^{-mQ(z_i)/2 - mQ(z_j)/2}]`, row-major.
    pub fn weighted_matrix(&self, points: &[Complex64]) -> Vec<Complex64> {
        let feats: Vec<Vec<Complex64>> = points.par_iter().map(|z| self.weighted_features(*z)).collect();
        let k = points.len();
        let mut m = vec![Complex64::new(0.0, 0.0); k * k];
        for i in 0..k {
            for j in 0..k {
                m[i * k + j] = Self::dot(&feats[i], &feats[j]);
            }
        }
        m
    }

    /// `det[K(z_i, z_j)]` in weighted form; tiny negative roundoff is clamped to zero.
    pub fn k_point_intensity(&self, points: &[Complex64]) -> Result<f64> {
        let k = points.len();
        if k == 0 || k > self.dimension() {
            return Err(Error::Config(format!(
                "k = {k} points; need 1 <= k <= n·q = {}",
                self.dimension()
            )));
        }
        let mut mat = self.weighted_matrix(points);
        let scale: f64 = (0..k).map(|i| mat[i * k + i].re.max(0.0)).product();
        let det = determinant(&mut mat, k).re;
        Ok(clamp_det(det, scale))
    }

    /// Joint density `Λ(z_1, …, z_{nq}) = det[…] / (nq)!`.
    pub fn joint_density(&self, points: &[Complex64]) -> Result<f64> {
        let n = self.dimension();
        if points.len() != n {
            return Err(Error::Config(format!(
                "joint density needs exactly n·q = {n} points, got {}",
                points.len()
            )));
        }
        let det = self.k_point_intensity(points)?;
        if det == 0.0 {
            return Ok(0.0);
        }
        let ln_fact: f64 = (1..=n).map(|i| (i as f64).ln()).sum();
        Ok((det.ln() - ln_fact).exp())
    }

    /// Berezin density `|K(w, z)|² e^{-mQ(w)} / K(z, z)` centred at `z`.
    pub fn berezin_density(&self, z: Complex64, w: Complex64) -> Result<f64> {
        let g = self.one_point_intensity(z);
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::Numerical(format!("K(z,z) is not positive at z = {z}")));
        }
        Ok(self.weighted_kernel(w, z).norm_sqr() / g)
    }

    /// Polar grid centred at `center` with the requested parameters.
    pub fn grid(&self, center: Complex64, params: GridParams) -> PolarGrid {
        let r_max = params
            .r_max
            .unwrap_or(self.droplet_radius + 10.0 / self.spec().m.sqrt());
        PolarGrid::new(center, r_max, params.n_r, params.n_phi)
    }

    /// `∫ Γ¹ dA`; equals `n·q`.
    pub fn trace(&self, params: GridParams) -> f64 {
        self.grid(Complex64::new(0.0, 0.0), params)
            .integrate(|w| self.one_point_intensity(w))
    }

    /// `∫ B^{⟨z⟩} dA`; equals 1.
    pub fn berezin_mass(&self, z: Complex64, params: GridParams) -> Result<f64> {
        let g = self.one_point_intensity(z);
        if !(g > 0.0) {
            return Err(Error::Numerical(format!("K(z,z) is not positive at z = {z}")));
        }
        let fz = self.weighted_features(z);
        let grid = self.grid(Complex64::new(0.0, 0.0), params);
        Ok(grid.integrate(|w| Self::dot(&self.weighted_features(w), &fz).norm_sqr()) / g)
    }

    /// `max_φ |∫ φ(w) K(z, w) e^{-mQ(w)} dA(w) - φ(z)| / (1 + |φ(z)|)` over the monomials `φ = z̄^r z^j`.
    pub fn reproducing_residual(&self, z: Complex64, params: GridParams) -> f64 {
        let spec = self.spec();
        let grid = self.grid(Complex64::new(0.0, 0.0), params);
        let fz = self.weighted_features(z);
        let hz = self.half_mq(z);
        // K(z, w) e^{-mQ(w)/2}, unweighted in z.
        let column: Vec<Complex64> = grid
            .points
            .par_iter()
            .map(|w| Self::dot(&fz, &self.weighted_features(*w)) * hz.exp())
            .collect();
        let monomials: Vec<(usize, usize)> = (0..spec.q)
            .flat_map(|r| (0..spec.n).map(move |j| (r, j)))
            .collect();
        let residuals: Vec<f64> = monomials
            .par_iter()
            .map(|&(r, j)| {
                let phi = |w: Complex64| w.conj().powi(r as i32) * w.powi(j as i32);
                let mut acc = Complex64::new(0.0, 0.0);
                for ((w, wt), kc) in grid.points.iter().zip(&grid.weights).zip(&column) {
                    let log_mag = if r + j == 0 { 0.0 } else { (r + j) as f64 * ln_abs(*w) };
                    let mag = (log_mag - self.half_mq(*w)).exp();
                    if mag == 0.0 {
                        continue;
                    }
                    let unit = if w.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { w / w.norm() };
                    acc += unit.powi(j as i32 - r as i32) * mag * kc * *wt;
                }
                let target = phi(z);
                (acc - target).norm() / (1.0 + target.norm())
            })
            .collect();
        residuals.into_iter().fold(0.0, f64::max)
    }

    /// CSV rows `re_z,im_z,re_w,im_w,re_K,im_K,weighted_abs` for the given pairs.
    pub fn kernel_csv(&self, pairs: &[(Complex64, Complex64)]) -> String {
        let rows: Vec<[f64; 7]> = pairs
            .par_iter()
            .map(|(z, w)| {
                let k = self.kernel_eval(*z, *w);
                let wk = self.weighted_kernel(*z, *w).norm();
                [z.re, z.im, w.re, w.im, k.re, k.im, wk]
            })
            .collect();
        csv(KERNEL_CSV_HEADER, rows)
    }
}

fn clamp_det(det: f64, scale: f64) -> f64 {
    if det >= 0.0 {
        return det;
    }
    if det < -NEGATIVE_DET_TOL * scale {
        log::warn!(
            "negative determinant {} below -{NEGATIVE_DET_TOL:e} x diagonal product {}; clamped to 0",
            fmt_f64(det),
            fmt_f64(scale)
        );
    }
    0.0
}

/// Determinant by LU with partial pivoting; `a` is overwritten.
pub fn determinant(a: &mut [Complex64], n: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
            .unwrap_or(col);
        if a[pivot * n + col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for i in (col + 1)..n {
            let f = a[i * n + col] / p;
            if f.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let t = a[col * n + k];
                a[i * n + k] -= f * t;
            }
        }
    }
    det
}
