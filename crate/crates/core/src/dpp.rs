//! Exact sampling of the determinantal process with kernel `K_{q,mQ,n}`.
//!
//! The process is a projection process of rank `N = nq`. Points are drawn
//! one at a time: with `F` an orthonormal frame of the remaining subspace
//! (initially the identity on `ℂ^N`) and `φ(z)` the weighted features, the
//! next point has density `‖F*φ(z)‖² / rank(F)`. After drawing `z`, a
//! Householder reflection maps `F*φ(z)` to a multiple of the first axis and
//! that column is dropped.
//!
//! Each draw is a rejection sampler against `Γ¹ ≥ ‖F*φ‖²`, which is radial:
//! a 256-bin radial envelope with safety factor 1.5 and uniform-on-annulus
//! proposals.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::equilibrium::RadialEquilibrium;
use crate::error::{Error, Result};
use crate::gram::SpaceSpec;
use crate::io::{csv, to_json};
use crate::kernel::KernelEvaluator;
use crate::par::*;
use crate::quadrature::gauss_legendre_on;

pub const ENVELOPE_BINS: usize = 256;
pub const ENVELOPE_SAFETY: f64 = 1.5;
/// A draw fails once this many proposals were made with acceptance below [`STALL_RATE`].
pub const STALL_PROPOSALS: u64 = 1_000_000;
pub const STALL_RATE: f64 = 1e-6;

/// `R + 6 m^{-1/2} + 0.5`.
pub fn sampling_radius(droplet_radius: f64, m: f64) -> f64 {
    droplet_radius + 6.0 / m.sqrt() + 0.5
}

/// One sample of the point process.
#[derive(Debug, Clone, Serialize)]
pub struct PointConfiguration {
    #[serde(skip)]
    pub points: Vec<Complex64>,
    pub seed: u64,
    /// ChaCha stream used for this configuration.
    pub stream: u64,
    pub q: usize,
    pub n: usize,
    pub m: f64,
    pub weight: String,
    /// Total proposals over all draws.
    pub proposals: u64,
    /// Accepted proposals whose density exceeded the envelope (should be zero).
    pub envelope_violations: u64,
}

impl PointConfiguration {
    pub fn spec(&self) -> SpaceSpec {
        SpaceSpec { q: self.q, n: self.n, m: self.m }
    }

    /// Rows `re,im`.
    pub fn to_csv(&self) -> String {
        csv("re,im", self.points.iter().map(|z| [z.re, z.im]))
    }

    /// Sidecar `{seed, q, n, m, weight, …}`.
    pub fn sidecar_json(&self) -> Result<String> {
        to_json(self)
    }
}

/// Radial step-function bound on `Γ¹` over the sampling disk.
#[derive(Debug, Clone)]
pub struct Envelope {
    edges: Vec<f64>,
    heights: Vec<f64>,
    /// Cumulative `height · (r_{b+1}² - r_b²)`.
    cumulative: Vec<f64>,
}

impl Envelope {
    pub fn new(k: &KernelEvaluator, radius: f64) -> Self {
        let edges: Vec<f64> = (0..=ENVELOPE_BINS)
            .map(|i| radius * i as f64 / ENVELOPE_BINS as f64)
            .collect();
        // Γ¹ is radial; sample each bin at 9 radii along the real axis.
        let heights: Vec<f64> = (0..ENVELOPE_BINS)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|b| {
                let (lo, hi) = (edges[b], edges[b + 1]);
                let peak = (0..=8)
                    .map(|i| k.one_point_intensity(Complex64::new(lo + (hi - lo) * i as f64 / 8.0, 0.0)))
                    .fold(0.0, f64::max);
                ENVELOPE_SAFETY * peak
            })
            .collect();
        let mut cumulative = Vec::with_capacity(ENVELOPE_BINS);
        let mut acc = 0.0;
        for b in 0..ENVELOPE_BINS {
            acc += heights[b] * (edges[b + 1].powi(2) - edges[b].powi(2));
            cumulative.push(acc);
        }
        Envelope { edges, heights, cumulative }
    }

    /// Draw `(z, envelope height at z)` from the normalized envelope.
    fn propose<R: Rng>(&self, rng: &mut R) -> (Complex64, f64) {
        let total = *self.cumulative.last().expect("non-empty envelope");
        let u = rng.random::<f64>() * total;
        let b = self.cumulative.partition_point(|c| *c <= u).min(ENVELOPE_BINS - 1);
        let (lo2, hi2) = (self.edges[b].powi(2), self.edges[b + 1].powi(2));
        let r = (lo2 + rng.random::<f64>() * (hi2 - lo2)).sqrt();
        let phi = std::f64::consts::TAU * rng.random::<f64>();
        (Complex64::from_polar(r, phi), self.heights[b])
    }
}

/// Householder step: remove from the frame `f` (`dim × cols`, column-major)
/// the direction of `v = F* φ`, returning the new frame with `cols - 1` columns.
fn deflate(frame: &[Complex64], dim: usize, cols: usize, v: &[Complex64]) -> Vec<Complex64> {
    // Reflection H = I - 2 u u*/|u|² with H v = α e_1, α = -e^{i arg v_0} |v|.
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { Complex64::new(1.0, 0.0) };
    let mut u = v.to_vec();
    u[0] += phase * norm;
    let un2: f64 = u.iter().map(|x| x.norm_sqr()).sum();
    // F H: column j of F H = F e_j - 2 (F u) conj(u_j) / |u|².
    let mut fu = vec![Complex64::new(0.0, 0.0); dim];
    for (j, uj) in u.iter().enumerate() {
        for i in 0..dim {
            fu[i] += frame[j * dim + i] * uj;
        }
    }
    let mut out = Vec::with_capacity(dim * (cols - 1));
    for j in 1..cols {
        let c = u[j].conj() * (2.0 / un2);
        for i in 0..dim {
            out.push(frame[j * dim + i] - fu[i] * c);
        }
    }
    out
}

/// `F* φ` and `‖F* φ‖²`.
fn project(frame: &[Complex64], dim: usize, cols: usize, phi: &[Complex64]) -> (Vec<Complex64>, f64) {
    let mut v = Vec::with_capacity(cols);
    let mut s = 0.0;
    for j in 0..cols {
        let col = &frame[j * dim..(j + 1) * dim];
        let x: Complex64 = col.iter().zip(phi).map(|(a, b)| a.conj() * b).sum();
        s += x.norm_sqr();
        v.push(x);
    }
    (v, s)
}

/// The RNG for configuration `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn sample_with(
    k: &KernelEvaluator,
    envelope: &Envelope,
    seed: u64,
    stream: u64,
) -> Result<PointConfiguration> {
    let spec = k.spec();
    let dim = k.dimension();
    let mut rng = rng_for(seed, stream);
    let mut frame = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        frame[i * dim + i] = Complex64::new(1.0, 0.0);
    }
    let mut points = Vec::with_capacity(dim);
    let (mut proposals, mut violations) = (0u64, 0u64);
    for step in 0..dim {
        let cols = dim - step;
        let mut tries = 0u64;
        loop {
            tries += 1;
            let (z, height) = envelope.propose(&mut rng);
            let phi = k.weighted_features(z);
            let (v, density) = project(&frame, dim, cols, &phi);
            if density > height {
                violations += 1;
                log::warn!("envelope violated at |z| = {}: {density} > {height}", z.norm());
            }
            if rng.random::<f64>() * height < density {
                frame = deflate(&frame, dim, cols, &v);
                points.push(z);
                break;
            }
            if tries >= STALL_PROPOSALS {
                return Err(Error::Sampler(format!(
                    "draw {step} of {dim}: no acceptance in {tries} proposals (rate < {STALL_RATE:e}); \
                     seed {seed}, stream {stream}"
                )));
            }
        }
        proposals += tries;
    }
    Ok(PointConfiguration {
        points,
        seed,
        stream,
        q: spec.q,
        n: spec.n,
        m: spec.m,
        weight: k.weight().id(),
        proposals,
        envelope_violations: violations,
    })
}

/// One configuration from stream 0 of `seed`.
pub fn sample_configuration(k: &KernelEvaluator, eq: &RadialEquilibrium, seed: u64) -> Result<PointConfiguration> {
    let envelope = Envelope::new(k, sampling_radius(eq.droplet_radius(), k.spec().m));
    sample_with(k, &envelope, seed, 0)
}

/// `count` independent configurations; configuration `i` uses stream `i` of
/// `seed`, so the output does not depend on the number of threads.
pub fn sample_batch(
    k: &KernelEvaluator,
    eq: &RadialEquilibrium,
    seed: u64,
    count: usize,
) -> Result<Vec<PointConfiguration>> {
    let envelope = Envelope::new(k, sampling_radius(eq.droplet_radius(), k.spec().m));
    (0..count as u64)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|i| sample_with(k, &envelope, seed, i))
        .collect()
}

/// Empirical against predicted counts in one annulus.
#[derive(Debug, Clone, Serialize)]
pub struct BinStatistic {
    pub r_lo: f64,
    pub r_hi: f64,
    pub mean_count: f64,
    pub predicted: f64,
    pub std_error: f64,
    pub standardized: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntensityReport {
    pub samples: usize,
    pub bins: Vec<BinStatistic>,
    /// Mean number of points outside the last edge.
    pub exterior_mean: f64,
    pub max_abs_standardized: f64,
}

/// `∫_{r_lo ≤ |z| < r_hi} Γ¹ dA` for a radial weight.
pub fn predicted_mass(k: &KernelEvaluator, r_lo: f64, r_hi: f64) -> f64 {
    let (xs, ws) = gauss_legendre_on(64, r_lo, r_hi);
    xs.iter()
        .zip(&ws)
        .map(|(r, w)| w * 2.0 * r * k.one_point_intensity(Complex64::new(*r, 0.0)))
        .sum()
}

/// Per-annulus empirical mean counts against `∫ Γ¹ dA`.
///
/// The standard error uses the sample variance of the counts, floored at
/// `1/N` so that bins which are empty in every sample stay finite.
pub fn empirical_intensity(
    k: &KernelEvaluator,
    samples: &[PointConfiguration],
    edges: &[f64],
) -> Result<IntensityReport> {
    if samples.len() < 100 {
        return Err(Error::Precondition(format!("need >= 100 samples, got {}", samples.len())));
    }
    if edges.len() < 2 || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("annulus edges must be strictly increasing".into()));
    }
    let spec = k.spec();
    let id = k.weight().id();
    if let Some(s) = samples.iter().find(|s| s.spec() != spec || s.weight != id) {
        return Err(Error::Config(format!(
            "sample from {} (q={}, n={}, m={}) does not match {id} {:?}",
            s.weight, s.q, s.n, s.m, spec
        )));
    }
    let n = samples.len() as f64;
    let nb = edges.len() - 1;
    let counts: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| {
            let mut c = vec![0.0; nb + 1];
            for z in &s.points {
                let r = z.norm();
                let b = edges.partition_point(|e| *e <= r);
                if b == 0 {
                    continue;
                }
                c[(b - 1).min(nb)] += 1.0;
            }
            c
        })
        .collect();
    let mut bins = Vec::with_capacity(nb);
    for b in 0..nb {
        let mean = counts.iter().map(|c| c[b]).sum::<f64>() / n;
        let var = counts.iter().map(|c| (c[b] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let predicted = predicted_mass(k, edges[b], edges[b + 1]);
        let std_error = (var.max(1.0 / n) / n).sqrt();
        bins.push(BinStatistic {
            r_lo: edges[b],
            r_hi: edges[b + 1],
            mean_count: mean,
            predicted,
            std_error,
            standardized: (mean - predicted) / std_error,
        });
    }
    let exterior_mean = counts.iter().map(|c| c[nb]).sum::<f64>() / n;
    let max_abs_standardized = bins.iter().map(|b| b.standardized.abs()).fold(0.0, f64::max);
    Ok(IntensityReport { samples: samples.len(), bins, exterior_mean, max_abs_standardized })
}
