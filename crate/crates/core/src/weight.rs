//! Radial weights `Q(z) = Σ c_k |z|^{2k}` and the objects derived from their
//! polarization `Q(z, w) = Σ c_k (z w̄)^k`.
//!
//! Every catalog weight is a polynomial in `t = |z|²` without constant term,
//! so the polarization is entire and all mixed Wirtinger derivatives have
//! closed forms:
//!
//! ```text
//! ∂_z^a ∂̄_w^c Q(z, w) = Σ_k c_k k^(a) k^(c) z^(k-a) w̄^(k-c)
//! ```
//!
//! with `k^(a)` the falling factorial. `b(z, w) = ∂_z ∂̄_w Q(z, w)` is the
//! `(1, 1)` derivative and equals `ΔQ` on the diagonal.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation order of the near-diagonal series for `θ` and its `∂̄` derivatives.
pub const THETA_SERIES_ORDER: usize = 8;

/// Number of radii on which a [`WeightFamily::RadialPoly`] is checked for `ΔQ > 0`.
const LAPLACIAN_CHECK_POINTS: usize = 256;

/// Which member of the weight catalog a [`WeightModel`] represents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum WeightFamily {
    /// `Q = |z|²`.
    Ginibre,
    /// `Q = |z|^{2p}`.
    Power { p: u32 },
    /// `Q = Σ_{k≥1} c_k |z|^{2k}`, `coeffs[k-1] = c_k`.
    RadialPoly { coeffs: Vec<f64> },
}

/// A radial weight together with its polarization and derivative tables.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightModel {
    family: WeightFamily,
    /// Dense coefficients, `coeffs[k-1] = c_k`.
    coeffs: Vec<f64>,
    growth_epsilon: f64,
    growth_radius: f64,
}

fn falling(k: usize, a: usize) -> f64 {
    if a > k {
        return 0.0;
    }
    ((k - a + 1)..=k).fold(1.0, |acc, i| acc * i as f64)
}

fn factorial(n: usize) -> f64 {
    falling(n, n)
}

impl WeightModel {
    pub fn ginibre() -> Self {
        Self::from_parts(WeightFamily::Ginibre, vec![1.0])
    }

    pub fn power(p: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("power weight needs p >= 1".into()));
        }
        let mut coeffs = vec![0.0; p as usize];
        coeffs[p as usize - 1] = 1.0;
        Ok(Self::from_parts(WeightFamily::Power { p }, coeffs))
    }

    /// Builds `Q(r) = Σ c_k r^{2k}` and rejects coefficient sets for which
    /// `ΔQ` is not strictly positive on the validation grid.
    pub fn radial_poly(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Config("radialpoly needs at least one coefficient".into()));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::Config(format!("radialpoly coefficient {bad} is not finite")));
        }
        let mut trimmed = coeffs.clone();
        while trimmed.last() == Some(&0.0) {
            trimmed.pop();
        }
        match trimmed.last() {
            None => return Err(Error::Config("radialpoly coefficients are all zero".into())),
            Some(&lead) if lead < 0.0 => {
                return Err(Error::Config(format!(
                    "radialpoly leading coefficient {lead} must be positive"
                )))
            }
            _ => {}
        }
        let model = Self::from_parts(WeightFamily::RadialPoly { coeffs }, trimmed);
        model.validate_laplacian()?;
        Ok(model)
    }

    fn from_parts(family: WeightFamily, coeffs: Vec<f64>) -> Self {
        let mut model = WeightModel {
            family,
            coeffs,
            growth_epsilon: 1.0,
            growth_radius: 0.0,
        };
        model.growth_radius = model.find_growth_radius();
        model
    }

    fn validate_laplacian(&self) -> Result<()> {
        let guess = self.droplet_radius_guess()?;
        let (lo, hi) = (1e-6_f64, 10.0 * guess);
        for i in 0..LAPLACIAN_CHECK_POINTS {
            let t = i as f64 / (LAPLACIAN_CHECK_POINTS - 1) as f64;
            let r = (lo.ln() + t * (hi.ln() - lo.ln())).exp();
            let lap = self.laplacian(r);
            if !(lap > 0.0) {
                return Err(Error::Config(format!(
                    "radialpoly weight has ΔQ({r:.6e}) = {lap:.6e} <= 0; the droplet would not be a disk"
                )));
            }
        }
        Ok(())
    }

    /// Smallest power of two with `r Q'(r) >= 2`; an upper bracket for the droplet radius.
    pub(crate) fn droplet_radius_guess(&self) -> Result<f64> {
        let mut r = 1.0_f64;
        while self.mass_inside(r) < 1.0 {
            r *= 2.0;
            if r > 1e8 {
                return Err(Error::Config(
                    "weight grows too slowly: no droplet radius below 1e8".into(),
                ));
            }
        }
        Ok(r)
    }

    fn find_growth_radius(&self) -> f64 {
        // Last failure of Q(r) >= (1 + ε) log r² on a log grid over [1e-3, 1e3].
        let eps = self.growth_epsilon;
        let n = 600;
        let mut radius = 0.0;
        for i in 0..=n {
            let r = 10f64.powf(-3.0 + 6.0 * i as f64 / n as f64);
            if self.eval_radial(r) < (1.0 + eps) * (r * r).ln() {
                radius = 10f64.powf(-3.0 + 6.0 * (i + 1) as f64 / n as f64);
            }
        }
        radius
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    /// Dense coefficient table, `coeffs()[k-1] = c_k`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Polynomial degree in `|z|²`.
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// The `ε` of the growth bound `Q(z) >= (1+ε) log|z|²`, `|z| >= C`.
    pub fn growth_epsilon(&self) -> f64 {
        self.growth_epsilon
    }

    /// The radius `C` beyond which the growth bound holds (grid estimate).
    pub fn growth_radius(&self) -> f64 {
        self.growth_radius
    }

    /// Weight identifier; parses back into an equal model.
    pub fn id(&self) -> String {
        self.to_string()
    }

    fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| (i + 1, *c))
    }

    /// `Q(z)`.
    pub fn eval(&self, z: Complex64) -> f64 {
        self.eval_squared(z.norm_sqr())
    }

    /// `Q` as a function of `r = |z|`.
    pub fn eval_radial(&self, r: f64) -> f64 {
        self.eval_squared(r * r)
    }

    /// `Q` as a function of `t = |z|²`.
    pub fn eval_squared(&self, t: f64) -> f64 {
        self.terms().map(|(k, c)| c * t.powi(k as i32)).sum()
    }

    /// `Q'(r)`.
    pub fn dq_dr(&self, r: f64) -> f64 {
        self.terms()
            .map(|(k, c)| 2.0 * k as f64 * c * r.powi(2 * k as i32 - 1))
            .sum()
    }

    /// `Q''(r)`.
    pub fn d2q_dr2(&self, r: f64) -> f64 {
        self.terms()
            .map(|(k, c)| {
                let kk = 2.0 * k as f64;
                kk * (kk - 1.0) * c * r.powi(2 * k as i32 - 2)
            })
            .sum()
    }

    /// `ΔQ = ∂∂̄Q` at radius `r`.
    pub fn laplacian(&self, r: f64) -> f64 {
        let t = r * r;
        self.terms()
            .map(|(k, c)| c * (k * k) as f64 * t.powi(k as i32 - 1))
            .sum()
    }

    /// `σ̂`-mass of the disk of radius `r` if the droplet contained it: `½ r Q'(r)`.
    pub fn mass_inside(&self, r: f64) -> f64 {
        let t = r * r;
        self.terms().map(|(k, c)| k as f64 * c * t.powi(k as i32)).sum()
    }

    /// Polarization `Q(z, w)`: analytic in `z`, anti-analytic in `w`.
    pub fn polarize(&self, z: Complex64, w: Complex64) -> Complex64 {
        let t = z * w.conj();
        self.terms().map(|(k, c)| t.powi(k as i32) * c).sum()
    }

    /// `∂_z^a ∂̄_w^c Q(z, w)` for any orders.
    pub fn polarization_derivative(&self, z: Complex64, w: Complex64, a: usize, c: usize) -> Complex64 {
        let wb = w.conj();
        self.terms()
            .filter(|(k, _)| *k >= a && *k >= c)
            .map(|(k, coef)| {
                z.powi((k - a) as i32) * wb.powi((k - c) as i32) * (coef * falling(k, a) * falling(k, c))
            })
            .sum()
    }

    /// `∂_z^dz ∂̄_w^dw b(z, w)` without the order guard of [`Self::hermitian_b`].
    pub fn b_derivative(&self, z: Complex64, w: Complex64, dz: usize, dw: usize) -> Complex64 {
        self.polarization_derivative(z, w, dz + 1, dw + 1)
    }

    /// `∂_z^dz ∂̄_w^dw b(z, w)` for `dz, dw <= 2`.
    pub fn hermitian_b(&self, z: Complex64, w: Complex64, dz: usize, dw: usize) -> Result<Complex64> {
        if dz > 2 || dw > 2 {
            return Err(Error::Config(format!(
                "b derivative order ({dz}, {dw}) out of range; at most 2 in each variable"
            )));
        }
        Ok(self.b_derivative(z, w, dz, dw))
    }

    fn h_switch(z: Complex64) -> f64 {
        1e-3 * z.norm().max(1.0)
    }

    /// Phase function `θ(z, w) = (Q(w) - Q(z, w)) / (w - z)`.
    ///
    /// Within `1e-3·max(1, |z|)` of the diagonal the Taylor series in
    /// `w - z` is summed instead of the quotient.
    pub fn phase_theta(&self, z: Complex64, w: Complex64) -> Complex64 {
        if (w - z).norm() < Self::h_switch(z) {
            self.theta_series(z, w, 0)
        } else {
            self.theta_quotient(z, w, 0)
        }
    }

    /// `∂̄_w^{order+1} θ(z, w)`, `order <= 2`.
    pub fn dbar_theta(&self, z: Complex64, w: Complex64, order: usize) -> Result<Complex64> {
        if order > 2 {
            return Err(Error::Config(format!("dbar_theta order {order} out of range 0..=2")));
        }
        let s = order + 1;
        Ok(if (w - z).norm() < Self::h_switch(z) {
            self.theta_series(z, w, s)
        } else {
            self.theta_quotient(z, w, s)
        })
    }

    /// Quotient branch of `∂̄_w^s θ`: `Σ c_k k^(s) w̄^(k-s) (w^k - z^k) / (w - z)`.
    pub fn theta_quotient(&self, z: Complex64, w: Complex64, s: usize) -> Complex64 {
        let wb = w.conj();
        let dw = w - z;
        self.terms()
            .filter(|(k, _)| *k >= s)
            .map(|(k, c)| {
                let diff = w.powi(k as i32) - z.powi(k as i32);
                wb.powi((k - s) as i32) * (c * falling(k, s)) * diff / dw
            })
            .sum()
    }

    /// Series branch of `∂̄_w^s θ`:
    /// `Σ_{j<=8} (w - z)^j / (j+1)! · ∂_z^{j+1} ∂̄_w^s Q(z, w)`.
    pub fn theta_series(&self, z: Complex64, w: Complex64, s: usize) -> Complex64 {
        let h = w - z;
        let mut power = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..=THETA_SERIES_ORDER {
            sum += power * self.polarization_derivative(z, w, j + 1, s) / factorial(j + 1);
            power *= h;
        }
        sum
    }
}

impl fmt::Display for WeightModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            WeightFamily::Ginibre => write!(f, "ginibre"),
            WeightFamily::Power { p } => write!(f, "power:p={p}"),
            WeightFamily::RadialPoly { coeffs } => {
                let parts: Vec<String> = coeffs.iter().map(|c| format!("{c}")).collect();
                write!(f, "radialpoly:c={}", parts.join(","))
            }
        }
    }
}

impl FromStr for WeightModel {
    type Err = Error;

    /// Parses `ginibre`, `power:p=<int>` or `radialpoly:c=<c1>,<c2>,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let kv = |args: Option<&str>, key: &str| -> Result<String> {
            let args = args.ok_or_else(|| {
                Error::Config(format!("weight '{name}' needs argument '{key}=...'"))
            })?;
            let (k, v) = args
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("malformed weight argument '{args}'")))?;
            if k.trim() != key {
                return Err(Error::Config(format!(
                    "unknown weight argument '{}' (expected '{key}')",
                    k.trim()
                )));
            }
            Ok(v.trim().to_string())
        };
        match name.trim().to_ascii_lowercase().as_str() {
            "ginibre" => match args {
                None => Ok(Self::ginibre()),
                Some(a) => Err(Error::Config(format!("ginibre takes no arguments, got '{a}'"))),
            },
            "power" => {
                let v = kv(args, "p")?;
                let p: u32 = v
                    .parse()
                    .map_err(|_| Error::Config(format!("invalid power exponent '{v}'")))?;
                Self::power(p)
            }
            "radialpoly" => {
                let v = kv(args, "c")?;
                let coeffs = v
                    .split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Config(format!("invalid coefficient '{}'", tok.trim())))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::radial_poly(coeffs)
            }
            other => Err(Error::Config(format!("unknown weight family '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(WeightModel::ginibre().eval(c(1.0, 1.0)), 2.0);
        assert_eq!(WeightModel::power(2).unwrap().eval(c(2.0, 0.0)), 16.0);
        let rp = WeightModel::radial_poly(vec![1.0, 1.0]).unwrap();
        assert!((rp.eval(c(0.0, 1.0)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn polarize_examples() {
        assert_eq!(WeightModel::ginibre().polarize(c(2.0, 0.0), c(3.0, 0.0)), c(6.0, 0.0));
        let p2 = WeightModel::power(2).unwrap();
        let v = p2.polarize(c(1.0, 1.0), c(1.0, 0.0));
        assert!((v - c(0.0, 2.0)).norm() < 1e-15);
        let z = c(0.3, -0.7);
        assert!((p2.polarize(z, z).re - p2.eval(z)).abs() < 1e-15);
    }

    #[test]
    fn b_examples() {
        let g = WeightModel::ginibre();
        assert_eq!(g.hermitian_b(c(0.2, 3.0), c(-1.0, 0.5), 0, 0).unwrap(), c(1.0, 0.0));
        assert_eq!(g.hermitian_b(c(0.2, 3.0), c(-1.0, 0.5), 1, 0).unwrap(), c(0.0, 0.0));
        let p2 = WeightModel::power(2).unwrap();
        let one = c(1.0, 0.0);
        assert_eq!(p2.hermitian_b(one, one, 0, 0).unwrap(), c(4.0, 0.0));
        assert_eq!(p2.hermitian_b(one, one, 1, 0).unwrap(), c(4.0, 0.0));
        assert!(p2.hermitian_b(one, one, 3, 0).is_err());
        assert!(p2.hermitian_b(one, one, 0, 3).is_err());
    }

    #[test]
    fn theta_examples() {
        let g = WeightModel::ginibre();
        let (z, w) = (c(0.4, -0.2), c(-1.1, 0.9));
        assert!((g.phase_theta(z, w) - w.conj()).norm() < 1e-14);
        // diagonal: ∂_z Q = z̄ for Ginibre
        assert!((g.phase_theta(z, z) - z.conj()).norm() < 1e-15);
        let p2 = WeightModel::power(2).unwrap();
        assert!((p2.phase_theta(c(0.0, 0.0), c(1.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
        // ∂_z Q(z) for |z|^4 is 2 z z̄²
        let z = c(0.7, 0.3);
        let expect = z * z.conj() * z.conj() * 2.0;
        assert!((p2.phase_theta(z, z) - expect).norm() < 1e-14);
    }

    #[test]
    fn dbar_theta_examples() {
        let g = WeightModel::ginibre();
        let (z, w) = (c(0.4, -0.2), c(-1.1, 0.9));
        assert!((g.dbar_theta(z, w, 0).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(g.dbar_theta(z, w, 1).unwrap().norm() < 1e-15);
        let p2 = WeightModel::power(2).unwrap();
        let one = c(1.0, 0.0);
        // 2 w̄ (w + z) at (1, 1) from the quotient form, b(1,1) = 4 from the series.
        assert!((p2.dbar_theta(one, one, 0).unwrap() - c(4.0, 0.0)).norm() < 1e-14);
        assert!((p2.theta_quotient(one, c(1.0 + 1e-2, 0.0), 1) - c(2.0 * 1.01 * 2.01, 0.0)).norm() < 1e-12);
        assert!(p2.dbar_theta(one, one, 3).is_err());
    }

    #[test]
    fn dbar_theta_diagonal_is_b() {
        let rp = WeightModel::radial_poly(vec![1.0, 0.5, 0.1]).unwrap();
        for z in [c(0.1, 0.2), c(-0.8, 0.3), c(1.5, -1.0)] {
            let lhs = rp.dbar_theta(z, z, 0).unwrap();
            let rhs = rp.hermitian_b(z, z, 0, 0).unwrap();
            assert_eq!(lhs, rhs);
            assert!((rhs.re - rp.laplacian(z.norm())).abs() < 1e-12 * rhs.re);
        }
    }

    #[test]
    fn parse_round_trip() {
        for s in ["ginibre", "power:p=2", "radialpoly:c=1,0.5"] {
            let w: WeightModel = s.parse().unwrap();
            assert_eq!(w.id(), s);
            assert_eq!(w.id().parse::<WeightModel>().unwrap(), w);
        }
    }

    #[test]
    fn parse_errors_name_the_token() {
        let msg = |s: &str| s.parse::<WeightModel>().unwrap_err().to_string();
        assert!(msg("gaussian").contains("gaussian"));
        assert!(msg("power:p=two").contains("two"));
        assert!(msg("power:q=2").contains("'q'"));
        assert!(msg("radialpoly:c=1,x").contains("'x'"));
        assert!(msg("power:p=0").contains("p >= 1"));
        assert!(msg("ginibre:p=1").contains("p=1"));
    }

    #[test]
    fn radial_poly_rejects_nonsubharmonic() {
        // ΔQ(r) = 1 - 8 r² changes sign inside the droplet.
        let err = WeightModel::radial_poly(vec![1.0, -2.0, 1.0]).unwrap_err();
        assert!(err.to_string().contains("ΔQ"));
        assert!(WeightModel::radial_poly(vec![-1.0, 1.0]).is_err());
        assert!(WeightModel::radial_poly(vec![1.0, -1.0]).is_err());
        assert!(WeightModel::radial_poly(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn growth_condition_holds_beyond_radius() {
        for w in [
            WeightModel::ginibre(),
            WeightModel::power(3).unwrap(),
            WeightModel::radial_poly(vec![0.1, 0.05]).unwrap(),
        ] {
            let c0 = w.growth_radius().max(1e-3);
            for i in 0..200 {
                let r = c0 * (1.0 + 0.05 * i as f64);
                assert!(w.eval_radial(r) >= (1.0 + w.growth_epsilon()) * (r * r).ln());
            }
        }
    }
}
