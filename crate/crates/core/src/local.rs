//! Near-diagonal approximations of the polyanalytic Bergman kernel built from
//! `θ` and `b = ∂_z ∂̄_w Q(z, w)`.
//!
//! Every kernel is returned either as `coefficient · e^{mQ(z,w)}` or in the
//! correlation form with `e^{-mQ(z)/2 - mQ(w)/2}` folded into the exponent.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laguerre::laguerre_assoc1_complex;
use crate::weight::WeightModel;

/// Whether to attach the weight factors `e^{-mQ(z)/2 - mQ(w)/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelForm {
    Plain,
    Weighted,
}

/// Polyanalytic order and number of coefficient orders of a local kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LocalKernelOrder {
    pub q: usize,
    pub terms: usize,
}

impl LocalKernelOrder {
    /// `q = 1` allows up to 2 terms, `q = 2` up to 3; higher `q` only the leading term.
    pub fn new(q: usize, terms: usize) -> Result<Self> {
        let max = match q {
            0 => return Err(Error::Config("q must be >= 1".into())),
            1 => 2,
            2 => 3,
            _ => 1,
        };
        if terms == 0 || terms > max {
            return Err(Error::Config(format!(
                "terms = {terms} unsupported for q = {q}; allowed 1..={max}"
            )));
        }
        Ok(LocalKernelOrder { q, terms })
    }
}

/// Radius of the disk around `z0` on which local kernels are used: `min(r0, R/2)`.
pub fn localization_radius(droplet_radius: f64, r0: f64) -> f64 {
    r0.min(0.5 * droplet_radius)
}

fn exp_factor(w: &WeightModel, m: f64, z: Complex64, wc: Complex64, form: KernelForm) -> Complex64 {
    let mut e = w.polarize(z, wc) * m;
    if form == KernelForm::Weighted {
        e -= 0.5 * m * (w.eval(z) + w.eval(wc));
    }
    e.exp()
}

/// `R_{q,m}(z, w)` for `q ∈ {1, 2}`:
///
/// ```text
/// R_{1,m} = m ∂̄θ
/// R_{2,m} = 2m ∂̄θ - m (z̄ - w̄) ∂̄²θ - m² |z - w|² (∂̄θ)²
/// ```
pub fn r_qm_density(w: &WeightModel, q: usize, m: f64, z: Complex64, wc: Complex64) -> Result<Complex64> {
    let t1 = w.dbar_theta(z, wc, 0)?;
    match q {
        1 => Ok(t1 * m),
        2 => {
            let t2 = w.dbar_theta(z, wc, 1)?;
            let d = z - wc;
            Ok(2.0 * m * t1 - m * d.conj() * t2 - m * m * d.norm_sqr() * t1 * t1)
        }
        _ => Err(Error::Config(format!("R_q,m is only available for q = 1, 2 (got q = {q})"))),
    }
}

/// Derivatives `∂_z^i ∂̄_w^j b` at a pair of points, indexed `[i][j]`.
#[derive(Debug, Clone, Copy)]
pub struct BJet(pub [[Complex64; 3]; 3]);

impl BJet {
    pub fn new(w: &WeightModel, z: Complex64, wc: Complex64) -> Result<Self> {
        let mut t = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = w.hermitian_b(z, wc, i, j)?;
            }
        }
        if !(t[0][0].norm() > 1e-300) {
            return Err(Error::Numerical(format!(
                "singular expansion: b(z, w) vanishes at z = {z}, w = {wc}"
            )));
        }
        Ok(BJet(t))
    }

    fn d(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }
}

/// `½ ∂̄_w (∂_z b / b) = ½ (∂_z∂̄_w b / b - ∂_z b ∂̄_w b / b²)`.
pub fn q1_subleading(jet: &BJet) -> Complex64 {
    let b = jet.d(0, 0);
    0.5 * (jet.d(1, 1) / b - jet.d(1, 0) * jet.d(0, 1) / (b * b))
}

/// `[m b + ½ ∂̄_w(∂_z b / b)] e^{mQ(z,w)}` (second term when `terms == 2`).
pub fn local_kernel_q1(
    w: &WeightModel,
    m: f64,
    z: Complex64,
    wc: Complex64,
    terms: usize,
    form: KernelForm,
) -> Result<Complex64> {
    LocalKernelOrder::new(1, terms)?;
    let jet = BJet::new(w, z, wc)?;
    let mut coeff = jet.d(0, 0) * m;
    if terms == 2 {
        coeff += q1_subleading(&jet);
    }
    Ok(coeff * exp_factor(w, m, z, wc, form))
}

/// The coefficients `(𝔅₂,₀, 𝔅₂,₁, 𝔅₂,₂)` of the bianalytic local kernel.
pub fn q2_coefficients(jet: &BJet, z: Complex64, wc: Complex64) -> [Complex64; 3] {
    let b = jet.d(0, 0);
    let (bz, bw, bzw) = (jet.d(1, 0), jet.d(0, 1), jet.d(1, 1));
    let (bzz, bww) = (jet.d(2, 0), jet.d(0, 2));
    let (bzzw, bzww, bzzww) = (jet.d(2, 1), jet.d(1, 2), jet.d(2, 2));
    let dz = z - wc;
    let dist2 = dz.norm_sqr();
    let (b2, b3, b4) = (b * b, b * b * b, b * b * b * b);

    let b20 = -dist2 * b2;
    let b21 = 2.0 * b + dz * bz - dz.conj() * bw + dist2 * (-1.5 * bzw + bz * bw / b);

    // Mixed derivatives of log b, written as rational functions of the jet.
    let l_zw = bzw / b - bz * bw / b2;
    let l_zww = bzww / b - 2.0 * bzw * bw / b2 - bz * bww / b2 + 2.0 * bz * bw * bw / b3;
    let l_zzw = bzzw / b - 2.0 * bz * bzw / b2 - bzz * bw / b2 + 2.0 * bz * bz * bw / b3;
    let m_term = 1.5 * bzww * bz / b2 - 6.5 * bz * bzw * bw / b3 + 1.5 * bzw * bzw / b2
        - bz * bz * bww / b3
        + 4.25 * bz * bz * bw * bw / b4
        - (2.0 / 3.0) * bzzww / b
        + 1.5 * bzzw * bw / b2
        - bzz * bw * bw / b3
        + bww * bzz / (3.0 * b2);
    let b22 = 2.0 * l_zw - dz.conj() * l_zww + dz * l_zzw + dist2 * m_term;
    [b20, b21, b22]
}

/// `(m² 𝔅₂,₀ + m 𝔅₂,₁ + 𝔅₂,₂) e^{mQ(z,w)}` truncated to `terms` orders.
pub fn local_kernel_q2(
    w: &WeightModel,
    m: f64,
    z: Complex64,
    wc: Complex64,
    terms: usize,
    form: KernelForm,
) -> Result<Complex64> {
    LocalKernelOrder::new(2, terms)?;
    let jet = BJet::new(w, z, wc)?;
    let c = q2_coefficients(&jet, z, wc);
    let scales = [m * m, m, 1.0];
    let coeff: Complex64 = c.iter().zip(scales).take(terms).map(|(c, s)| c * s).sum();
    Ok(coeff * exp_factor(w, m, z, wc, form))
}

/// Leading term `m b L¹_{q-1}(m b |z - w|²) e^{mQ(z,w)}` for any `q`.
pub fn local_kernel_leading(
    w: &WeightModel,
    q: usize,
    m: f64,
    z: Complex64,
    wc: Complex64,
    form: KernelForm,
) -> Result<Complex64> {
    if q == 0 {
        return Err(Error::Config("q must be >= 1".into()));
    }
    let b = w.b_derivative(z, wc, 0, 0);
    let lag = laguerre_assoc1_complex(q - 1, b * m * (z - wc).norm_sqr())?;
    Ok(b * m * lag * exp_factor(w, m, z, wc, form))
}

/// Dispatch on `order`: full expansions for `q ≤ 2`, leading term otherwise.
pub fn local_kernel(
    w: &WeightModel,
    order: LocalKernelOrder,
    m: f64,
    z: Complex64,
    wc: Complex64,
    form: KernelForm,
) -> Result<Complex64> {
    match order.q {
        1 => local_kernel_q1(w, m, z, wc, order.terms, form),
        2 => local_kernel_q2(w, m, z, wc, order.terms, form),
        q => local_kernel_leading(w, q, m, z, wc, form),
    }
}
