//! Numerical integration: Gauss–Kronrod panels for radial moments in the log
//! domain, Gauss–Legendre rules, and the polar tensor grid used for plane
//! integrals against `dA = π⁻¹ dx dy`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par::*;
use crate::weight::WeightModel;

// 15-point Kronrod nodes on [0, 1] (symmetric), with the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Relative tolerance of a single Gauss–Kronrod panel.
pub const PANEL_RTOL: f64 = 1e-15;
/// The outward panel sweep stops once a panel adds less than this fraction of the total.
pub const SWEEP_CUTOFF: f64 = 1e-18;

/// One GK15 application on `[a, b]`: `(kronrod, error estimate)`.
///
/// The error estimate is the usual rescaled Kronrod–Gauss difference.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (val, err, _) = gk15_detail(f, a, b);
    (val, err)
}

/// `(kronrod, error estimate, ∫|f|)` on `[a, b]`.
fn gk15_detail<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    let mut fv = [(0.0, 0.0); 7];
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let (f1, f2) = (f(c - h * x), f(c + h * x));
        fv[i] = (f1, f2);
        kron += wk * (f1 + f2);
        abs += wk * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kron;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (i, (f1, f2)) in fv.iter().enumerate() {
        asc += WGK[i] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let h = h.abs();
    let (kron, abs, asc) = (kron * h, abs * h, asc * h);
    let mut err = (kron - gauss * h).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    (kron, err, abs)
}

/// Adaptive bisection with GK15 until every leaf meets `max(rtol·|I|, atol)`
/// or its estimate is at the roundoff level of the rule.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rtol: f64, atol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: (f64, f64, f64),
        rtol: f64,
        atol: f64,
        depth: u32,
    ) -> f64 {
        let (val, err, abs) = whole;
        let roundoff = 50.0 * f64::EPSILON * abs;
        if err <= (rtol * val.abs()).max(atol).max(roundoff) || depth == 0 {
            return val;
        }
        let mid = 0.5 * (a + b);
        let left = gk15_detail(f, a, mid);
        let right = gk15_detail(f, mid, b);
        recurse(f, a, mid, left, rtol, atol * 0.5, depth - 1)
            + recurse(f, mid, b, right, rtol, atol * 0.5, depth - 1)
    }
    let whole = gk15_detail(f, a, b);
    recurse(f, a, b, whole, rtol, atol, 30)
}

/// Logarithm of a radial moment `M_p = ∫ |z|^{2p} e^{-mQ} dA`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMoment {
    pub log_value: f64,
    pub p: usize,
    pub m: f64,
}

fn bisect<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `log M_p` with `M_p = 2 ∫_0^∞ r^{2p+1} e^{-mQ(r)} dr`.
///
/// The integrand is normalized by its value at the mode `r*`
/// (`r* Q'(r*) = (2p+1)/m`) and integrated panel by panel outward from it.
pub fn radial_log_moment(w: &WeightModel, m: f64, p: usize) -> Result<LogMoment> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Config(format!("moment scale m = {m} must be positive and finite")));
    }
    let a = (2 * p + 1) as f64;
    let target = a / m;
    let g = |r: f64| r * w.dq_dr(r) - target;
    let mut hi = 1.0;
    while g(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Config(format!(
                "moment mode not bracketed for p={p}, m={m}: weight grows too slowly"
            )));
        }
    }
    let mode = bisect(g, 0.0, hi);
    if !(mode > 0.0) {
        return Err(Error::Config(format!("degenerate moment mode for p={p}, m={m}")));
    }
    let log_f = |r: f64| a * r.ln() - m * w.eval_radial(r);
    let peak = log_f(mode);
    let integrand = |r: f64| if r <= 0.0 { 0.0 } else { (log_f(r) - peak).exp() };
    let curvature = a / (mode * mode) + m * w.d2q_dr2(mode);
    let width = (1.0 / curvature.max(f64::MIN_POSITIVE)).sqrt().min(mode.max(1e-300) * 4.0);

    // The normalized integrand peaks at 1, so its mass is of order `width`.
    let atol = SWEEP_CUTOFF * width;
    let mut total = 0.0;
    // right sweep
    let mut left_edge = mode;
    loop {
        let part = adaptive_gk(&integrand, left_edge, left_edge + width, PANEL_RTOL, atol);
        total += part;
        left_edge += width;
        if part < SWEEP_CUTOFF * total {
            break;
        }
    }
    // left sweep
    let mut right_edge = mode;
    while right_edge > 0.0 {
        let lo = (right_edge - width).max(0.0);
        let part = adaptive_gk(&integrand, lo, right_edge, PANEL_RTOL, atol);
        total += part;
        right_edge = lo;
        if part < SWEEP_CUTOFF * total {
            break;
        }
    }
    let log_value = std::f64::consts::LN_2 + peak + total.ln();
    if !log_value.is_finite() {
        return Err(Error::Numerical(format!("non-finite log moment for p={p}, m={m}")));
    }
    Ok(LogMoment { log_value, p, m })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 0 { 0.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let wt = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = wt;
        weights[n - 1 - i] = wt;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    (x.iter().map(|x| c + h * x).collect(), w.iter().map(|w| w * h).collect())
}

/// `∫_a^b f` with an `n`-point Gauss–Legendre rule.
pub fn integrate_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre_on(n, a, b);
    x.iter().zip(&w).map(|(x, w)| w * f(*x)).sum()
}

/// Polar tensor grid: Gauss–Legendre in radius, uniform trapezoid in angle.
///
/// Weights include the `π⁻¹` of `dA`, so `Σ weights·f(points)` approximates `∫ f dA`.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    pub points: Vec<Complex64>,
    pub weights: Vec<f64>,
}

impl PolarGrid {
    pub fn new(center: Complex64, r_max: f64, n_r: usize, n_phi: usize) -> Self {
        let (radii, rw) = gauss_legendre_on(n_r, 0.0, r_max);
        let mut points = Vec::with_capacity(n_r * n_phi);
        let mut weights = Vec::with_capacity(n_r * n_phi);
        let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
        for j in 0..n_phi {
            let phase = Complex64::from_polar(1.0, dphi * j as f64);
            for (r, w) in radii.iter().zip(&rw) {
                points.push(center + phase * *r);
                weights.push(2.0 / n_phi as f64 * w * r);
            }
        }
        PolarGrid { points, weights }
    }

    /// `∫ f dA` over the grid; evaluation is parallel, summation is in grid order.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(Complex64) -> f64 + Sync + Send,
    {
        let values: Vec<f64> = self.points.par_iter().map(|z| f(*z)).collect();
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Complex-valued variant of [`Self::integrate`].
    pub fn integrate_complex<F>(&self, f: F) -> Complex64
    where
        F: Fn(Complex64) -> Complex64 + Sync + Send,
    {
        let values: Vec<Complex64> = self.points.par_iter().map(|z| f(*z)).collect();
        values.iter().zip(&self.weights).map(|(v, w)| v * *w).sum()
    }
}

/// `∫ f dA` over the disk `|z| <= r_max` on an `n_r × n_phi` polar grid.
pub fn integrate_polar_grid<F>(f: F, r_max: f64, n_r: usize, n_phi: usize) -> f64
where
    F: Fn(Complex64) -> f64 + Sync + Send,
{
    PolarGrid::new(Complex64::new(0.0, 0.0), r_max, n_r, n_phi).integrate(f)
}
