//! Equilibrium geometry of a radial weight: droplet radius, obstacle
//! solution `Q̂` and the weighted logarithmic energy of `σ̂ = ΔQ 1_S dA`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::quadrature::gauss_legendre_on;
use crate::weight::WeightModel;

/// Bisection tolerance on the droplet radius.
pub const DROPLET_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct RadialEquilibrium {
    weight: WeightModel,
    droplet_radius: f64,
}

/// Solve `R Q'(R) = 2`; `r ↦ r Q'(r)` is increasing because `ΔQ > 0`.
pub fn droplet_radius(w: &WeightModel) -> Result<f64> {
    let mut hi = w.droplet_radius_guess()?;
    let mut lo = 0.0;
    while hi - lo > DROPLET_TOL * 0.25 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if w.mass_inside(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Result of [`RadialEquilibrium::energy_monte_carlo`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl RadialEquilibrium {
    pub fn new(weight: &WeightModel) -> Result<Self> {
        Ok(RadialEquilibrium {
            weight: weight.clone(),
            droplet_radius: droplet_radius(weight)?,
        })
    }

    pub fn weight(&self) -> &WeightModel {
        &self.weight
    }

    pub fn droplet_radius(&self) -> f64 {
        self.droplet_radius
    }

    /// `Q̂` as a function of `|z|`.
    pub fn potential_radial(&self, r: f64) -> f64 {
        let big_r = self.droplet_radius;
        if r <= big_r {
            self.weight.eval_radial(r)
        } else {
            self.weight.eval_radial(big_r) + 2.0 * (r / big_r).ln()
        }
    }

    /// `Q̂(z)`: equal to `Q` on the droplet, harmonic with `log|z|²` growth outside.
    pub fn equilibrium_potential(&self, z: Complex64) -> f64 {
        self.potential_radial(z.norm())
    }

    /// Radial derivative of `Q̂`.
    pub fn potential_derivative(&self, r: f64) -> f64 {
        if r <= self.droplet_radius {
            self.weight.dq_dr(r)
        } else {
            2.0 / r
        }
    }

    /// Density of `σ̂` in `r`: `2 r ΔQ(r)` on `[0, R]`.
    pub fn radial_density(&self, r: f64) -> f64 {
        if r <= self.droplet_radius {
            2.0 * r * self.weight.laplacian(r)
        } else {
            0.0
        }
    }

    /// `σ̂(|z| ≤ r)`.
    pub fn mass_within(&self, r: f64) -> f64 {
        self.weight.mass_inside(r.min(self.droplet_radius))
    }

    /// Weighted energy `I(σ̂)`.
    ///
    /// Averaging `log|z - w|²` over circles gives `log max(|z|, |w|)²`, so the
    /// logarithmic part becomes `-∫∫ log max(r, s) dρ(r) dρ(s)`. Both radial
    /// integrals use `n_quad`-point Gauss–Legendre rules.
    pub fn weighted_energy(&self, n_quad: usize) -> Result<f64> {
        if n_quad < 64 {
            return Err(crate::Error::Config(format!("n_quad = {n_quad} must be >= 64")));
        }
        let big_r = self.droplet_radius;
        let (xs, ws) = gauss_legendre_on(n_quad, 0.0, big_r);
        let mut log_part = 0.0;
        let mut q_part = 0.0;
        for (&r, &wr) in xs.iter().zip(&ws) {
            let rho = self.radial_density(r);
            let (ys, vs) = gauss_legendre_on(n_quad, 0.0, r);
            let inner: f64 = ys.iter().zip(&vs).map(|(&s, &v)| v * self.radial_density(s)).sum();
            // Pairs with s < r contribute log r; the factor 2 counts s > r.
            log_part += wr * rho * r.ln() * inner;
            q_part += wr * rho * self.weight.eval_radial(r);
        }
        Ok(-2.0 * log_part + q_part)
    }

    /// Sample `|z|` from `σ̂` by inverting `r ↦ σ̂(|z| ≤ r)`.
    fn sample_radius<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let (mut lo, mut hi) = (0.0, self.droplet_radius);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.weight.mass_inside(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Plain Monte Carlo estimate of `I(σ̂)` from independent pairs drawn from `σ̂`.
    pub fn energy_monte_carlo(&self, pairs: usize, seed: u64) -> MonteCarloEstimate {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..pairs {
            let mut draw = || {
                let r = self.sample_radius(&mut rng);
                let phi = std::f64::consts::TAU * rng.random::<f64>();
                Complex64::from_polar(r, phi)
            };
            let (z, w) = (draw(), draw());
            let v = -0.5 * (z - w).norm_sqr().ln() + 0.5 * (self.weight.eval(z) + self.weight.eval(w));
            sum += v;
            sum_sq += v * v;
        }
        let n = pairs as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
        MonteCarloEstimate {
            mean,
            std_error: (var / n).sqrt(),
            samples: pairs,
        }
    }
}
