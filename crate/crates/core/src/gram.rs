//! Block-diagonal Gram factorization of `Pol_{q,n}` in `L²(e^{-mQ})`.
//!
//! For a radial weight the inner product `⟨z̄^s z^k, z̄^r z^j⟩` vanishes
//! unless `j - r = k - s`. Grouping the monomials `z̄^r z^{r+d}` by their
//! degree offset `d` gives blocks of size at most `q` whose entries are the
//! moments `M_{r+s+d}`. Each block is scaled to unit diagonal with
//! `D = diag(M_{2r+d})` and Cholesky-factored.

use serde::Serialize;

use crate::dd::{DoubleDouble, Scalar};
use crate::error::{Error, Result};
use crate::par::*;
use crate::quadrature::{radial_log_moment, LogMoment};
use crate::weight::WeightModel;

/// Parameters `(q, n, m)` of the space `A²_{q,mQ,n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceSpec {
    /// Polyanalytic order.
    pub q: usize,
    /// Number of analytic degrees.
    pub n: usize,
    /// Scaling parameter of the weight.
    pub m: f64,
}

impl SpaceSpec {
    pub fn new(q: usize, n: usize, m: f64) -> Result<Self> {
        let spec = SpaceSpec { q, n, m };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 1 {
            return Err(Error::Config(format!("q = {} must be >= 1", self.q)));
        }
        if self.n < 1 {
            return Err(Error::Config(format!("n = {} must be >= 1", self.n)));
        }
        if !(self.m > 0.0) || !self.m.is_finite() {
            return Err(Error::Config(format!("m = {} must be positive and finite", self.m)));
        }
        Ok(())
    }

    /// `n·q`.
    pub fn dimension(&self) -> usize {
        self.n * self.q
    }

    /// Largest moment index entering the Gram matrix, `n + q - 2`.
    pub fn max_moment(&self) -> usize {
        self.n + self.q - 2
    }
}

/// Tuning of the factorization.
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Blocks whose scaled condition estimate exceeds this are refactored in double-double.
    pub escalation_threshold: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { escalation_threshold: 1e12 }
    }
}

/// One degree-offset block.
#[derive(Debug, Clone)]
pub struct GramBlock {
    /// Degree offset `d = j - r`.
    pub d: i64,
    /// Antiholomorphic degrees `r` of the members `z̄^r z^{r+d}`.
    pub rows: Vec<usize>,
    /// `½ log M_{2r+d}` per member: the log of the diagonal scaling `D^{1/2}`.
    pub log_scale: Vec<f64>,
    /// Inverse of the Cholesky factor of the scaled block, lower triangular, row-major.
    pub chol_inv: Vec<f64>,
    /// 1-norm condition estimate of the scaled block.
    pub condition: f64,
    /// Whether the factor was computed in double-double.
    pub escalated: bool,
}

impl GramBlock {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// Total degree `2r + d` of member `i`: `|z̄^r z^{r+d}| = |z|^{2r+d}`.
    pub fn exponent(&self, i: usize) -> usize {
        (2 * self.rows[i] as i64 + self.d) as usize
    }
}

/// Per-block condition numbers, as reported by [`GramFactorization::condition_report`].
#[derive(Debug, Clone, Serialize)]
pub struct ConditionEntry {
    pub d: i64,
    pub size: usize,
    pub condition: f64,
    pub escalated: bool,
}

#[derive(Debug, Clone)]
pub struct GramFactorization {
    spec: SpaceSpec,
    weight: WeightModel,
    log_moments: Vec<LogMoment>,
    blocks: Vec<GramBlock>,
}

/// Cholesky factor `L` (row-major, lower) of a symmetric positive definite matrix.
fn cholesky<T: Scalar>(a: &[T], n: usize) -> Option<Vec<T>> {
    let zero = T::from_f64(0.0);
    let mut l = vec![zero; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > zero) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix.
fn lower_inverse<T: Scalar>(l: &[T], n: usize) -> Vec<T> {
    let zero = T::from_f64(0.0);
    let one = T::from_f64(1.0);
    let mut inv = vec![zero; n * n];
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col { one } else { zero };
            for k in col..i {
                s = s - l[i * n + k] * inv[k * n + col];
            }
            inv[i * n + col] = s / l[i * n + i];
        }
    }
    inv
}

fn one_norm(a: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `‖C‖₁ ‖C⁻¹‖₁` with `C⁻¹ = L⁻ᵀ L⁻¹`.
fn condition_estimate(c: &[f64], linv: &[f64], n: usize) -> f64 {
    let mut cinv = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            cinv[i * n + j] = (0..n).map(|k| linv[k * n + i] * linv[k * n + j]).sum();
        }
    }
    one_norm(c, n) * one_norm(&cinv, n)
}

fn factor_in<T: Scalar>(entries: &[f64], n: usize) -> Option<Vec<f64>> {
    let a: Vec<T> = entries.iter().map(|x| T::from_f64(*x)).collect();
    let l = cholesky(&a, n)?;
    Some(lower_inverse(&l, n).into_iter().map(Scalar::to_f64).collect())
}

impl GramFactorization {
    pub fn build(weight: &WeightModel, spec: SpaceSpec) -> Result<Self> {
        Self::build_with(weight, spec, BuildOptions::default())
    }

    pub fn build_with(weight: &WeightModel, spec: SpaceSpec, options: BuildOptions) -> Result<Self> {
        spec.validate()?;
        let log_moments = (0..=spec.max_moment())
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|p| radial_log_moment(weight, spec.m, p))
            .collect::<Result<Vec<_>>>()?;
        check_log_convexity(&log_moments)?;
        let lm: Vec<f64> = log_moments.iter().map(|l| l.log_value).collect();

        let (q, n) = (spec.q as i64, spec.n as i64);
        let blocks = ((1 - q)..n)
            .map(|d| build_block(d, q, n, &lm, options))
            .collect::<Result<Vec<_>>>()?;
        Ok(GramFactorization {
            spec,
            weight: weight.clone(),
            log_moments,
            blocks,
        })
    }

    pub fn spec(&self) -> SpaceSpec {
        self.spec
    }

    pub fn weight(&self) -> &WeightModel {
        &self.weight
    }

    pub fn log_moments(&self) -> &[LogMoment] {
        &self.log_moments
    }

    pub fn blocks(&self) -> &[GramBlock] {
        &self.blocks
    }

    pub fn condition_report(&self) -> Vec<ConditionEntry> {
        self.blocks
            .iter()
            .map(|b| ConditionEntry {
                d: b.d,
                size: b.size(),
                condition: b.condition,
                escalated: b.escalated,
            })
            .collect()
    }

    /// Unscaled Gram entry `⟨z̄^s z^k, z̄^r z^j⟩`, computed from the moment
    /// table; zero off the block structure.
    pub fn inner_product(&self, (r, j): (usize, usize), (s, k): (usize, usize)) -> f64 {
        if j as i64 - r as i64 != k as i64 - s as i64 {
            return 0.0;
        }
        self.log_moments[j + s].log_value.exp()
    }
}

fn check_log_convexity(lm: &[LogMoment]) -> Result<()> {
    // M_p² <= M_{p-1} M_{p+1} by Cauchy–Schwarz, so the increments never decrease.
    for w in lm.windows(3) {
        let (a, b, c) = (w[0].log_value, w[1].log_value, w[2].log_value);
        let slack = 1e-10 * (1.0 + a.abs().max(c.abs()));
        if (c - b) - (b - a) < -slack {
            return Err(Error::Numerical(format!(
                "log-moment increments decrease at p={}: {:e} then {:e}",
                w[1].p,
                b - a,
                c - b
            )));
        }
    }
    Ok(())
}

fn build_block(d: i64, q: i64, n: i64, lm: &[f64], options: BuildOptions) -> Result<GramBlock> {
    let rows: Vec<usize> = (0..q)
        .filter(|r| {
            let j = r + d;
            (0..n).contains(&j)
        })
        .map(|r| r as usize)
        .collect();
    let size = rows.len();
    let idx = |r: usize, s: usize| (r as i64 + s as i64 + d) as usize;
    let log_scale: Vec<f64> = rows.iter().map(|&r| 0.5 * lm[idx(r, r)]).collect();
    let mut entries = vec![0.0; size * size];
    for (a, &r) in rows.iter().enumerate() {
        for (b, &s) in rows.iter().enumerate() {
            entries[a * size + b] = if a == b {
                1.0
            } else {
                (lm[idx(r, s)] - log_scale[a] - log_scale[b]).exp()
            };
        }
    }
    let degenerate = |condition: f64| Error::Degenerate { block: d, condition };

    let mut escalated = false;
    let mut chol_inv = factor_in::<f64>(&entries, size);
    let mut condition = chol_inv
        .as_ref()
        .map(|li| condition_estimate(&entries, li, size))
        .unwrap_or(f64::INFINITY);
    if condition > options.escalation_threshold || !condition.is_finite() {
        log::debug!("escalating Gram block d={d} (condition {condition:e}) to double-double");
        escalated = true;
        chol_inv = factor_in::<DoubleDouble>(&entries, size);
        condition = chol_inv
            .as_ref()
            .map(|li| condition_estimate(&entries, li, size))
            .unwrap_or(f64::INFINITY);
    }
    let chol_inv = chol_inv.ok_or_else(|| degenerate(condition))?;
    if !condition.is_finite() || chol_inv.iter().any(|x| !x.is_finite()) {
        return Err(degenerate(condition));
    }
    Ok(GramBlock {
        d,
        rows,
        log_scale,
        chol_inv,
        condition,
        escalated,
    })
}
