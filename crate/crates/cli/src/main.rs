//! `polykernel` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use polykernel::{Error, Result, SpaceSpec, WeightModel};

#[derive(Debug, Parser)]
#[command(
    name = "polykernel",
    version,
    about = "Weighted polyanalytic Bergman kernels K_{q,mQ,n}, their determinantal point processes and local expansions",
    after_help = "Weights: ginibre | power:p=<int> | radialpoly:c=<c1>,<c2>,...  (Q = Σ c_k |z|^{2k}).\n\
                  Complex arguments are written re or re,im.\n\
                  POLYKERNEL_THREADS caps the number of worker threads.\n\
                  Exit codes: 0 success, 1 invalid configuration, 2 numerical failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Droplet radius R solving R·Q'(R) = 2; prints R and optionally writes the profile r,Q,Q̂ as CSV.
    Droplet(DropletArgs),
    /// Correlation kernel K(z,w)e^{-mQ(z)/2-mQ(w)/2} for w on a square grid around a fixed z (CSV).
    Kernel(KernelArgs),
    /// Berezin density B^<z>(w) = |K(z,w)|²e^{-mQ(w)}/K(z,z) on a square grid around z (CSV).
    Berezin(BerezinArgs),
    /// One-point intensity Γ¹(r) = K(r,r)e^{-mQ(r)} along the positive axis (CSV).
    Intensity(IntensityArgs),
    /// Bulk blow-up: m⁻¹ΔQ⁻¹|K| at z0 + ξ/√(mΔQ) against |L¹_{q-1}(|ξ-λ|²)|e^{-|ξ-λ|²/2}, with the log-log rate over an m ladder (JSON).
    Blowup(BlowupArgs),
    /// Off-diagonal decay of log|K(z0, z0+s·e^{iφ})|² with fitted slope β(m) and β(m)/√m (JSON).
    Decay(DecayArgs),
    /// Decay outside the droplet: log Γ¹ + m(Q - Q̂) - 2 log m along a ray, calibrated at the first m (JSON).
    Offdroplet(OffdropletArgs),
    /// Local kernel m^q-expansion built from b = ∂_z∂̄_w Q(z,w) and e^{mQ(z,w)}, compared with the exact kernel (CSV).
    Local(LocalArgs),
    /// Exact samples of the determinantal point process with kernel K_{q,mQ,n}: CSV re,im plus a JSON sidecar per sample.
    Sample(SampleArgs),
    /// Weighted logarithmic energy I(σ̂) of the equilibrium measure, with a Monte Carlo cross-check (JSON).
    Energy(EnergyArgs),
    /// Run the quick invariant suite and print one PASS/FAIL line per check.
    Selftest,
}

#[derive(Debug, Args)]
pub struct WeightArg {
    /// Weight Q.
    #[arg(long, default_value = "ginibre")]
    pub weight: String,
}

impl WeightArg {
    pub fn model(&self) -> Result<WeightModel> {
        self.weight.parse().map_err(|e| flag_error("--weight", e))
    }
}

#[derive(Debug, Args)]
pub struct SpaceArgs {
    #[command(flatten)]
    pub weight: WeightArg,
    /// Polyanalytic order q.
    #[arg(long, default_value_t = 1)]
    pub q: usize,
    /// Degree bound n (defaults to round(m)).
    #[arg(long)]
    pub n: Option<usize>,
    /// Scaling parameter m.
    #[arg(long, default_value_t = 20.0)]
    pub m: f64,
}

impl SpaceArgs {
    pub fn spec(&self) -> Result<SpaceSpec> {
        space_spec(self.q, self.n, self.m)
    }
}

#[derive(Debug, Args)]
pub struct LadderArgs {
    #[command(flatten)]
    pub weight: WeightArg,
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    /// Comma-separated m values.
    #[arg(long, value_delimiter = ',', default_value = "40,80,160")]
    pub m: Vec<f64>,
    /// Comma-separated degree bounds, one per m (defaults to n = round(m)).
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
}

impl LadderArgs {
    pub fn ladder(&self) -> Result<Vec<(f64, usize)>> {
        if self.m.is_empty() {
            return Err(Error::Config("--m: empty ladder".into()));
        }
        if !self.n.is_empty() && self.n.len() != self.m.len() {
            return Err(Error::Config(format!(
                "--n: {} values given for {} m values",
                self.n.len(),
                self.m.len()
            )));
        }
        self.m
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let spec = space_spec(self.q, self.n.get(i).copied(), m)?;
                Ok((spec.m, spec.n))
            })
            .collect()
    }
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output file (written atomically); standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DropletArgs {
    #[command(flatten)]
    pub weight: WeightArg,
    #[command(flatten)]
    pub out: OutArg,
    /// Number of profile radii in [0, r_max].
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Profile extent (defaults to 2R).
    #[arg(long)]
    pub r_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Grid centre.
    #[arg(long, default_value = "0", value_parser = parse_complex)]
    pub center: Complex64,
    /// Half-width of the square grid.
    #[arg(long, default_value_t = 1.0)]
    pub extent: f64,
    /// Points per side.
    #[arg(long, default_value_t = 41)]
    pub grid_n: usize,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct BerezinArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct IntensityArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub out: OutArg,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Profile extent (defaults to 2R).
    #[arg(long)]
    pub r_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BlowupArgs {
    #[command(flatten)]
    pub ladder: LadderArgs,
    /// Bulk point z0.
    #[arg(long, value_parser = parse_complex)]
    pub z0: Complex64,
    /// Grid covers |ξ|, |λ| ≤ grid-radius.
    #[arg(long, default_value_t = 2.0)]
    pub grid_radius: f64,
    #[arg(long, default_value_t = 17)]
    pub grid_n: usize,
    #[command(flatten)]
    pub out: OutArg,
    /// Also write the error fields as CSV.
    #[arg(long)]
    pub errors_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    #[command(flatten)]
    pub ladder: LadderArgs,
    #[arg(long, value_parser = parse_complex)]
    pub z0: Complex64,
    /// Number of equally spaced directions.
    #[arg(long, default_value_t = 4)]
    pub directions: usize,
    /// Largest separation in blow-up units t = s·√(mΔQ(z0)).
    #[arg(long, default_value_t = 4.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub t_step: f64,
    /// Fitting radius r0 in absolute units (defaults to half the distance to the boundary).
    #[arg(long)]
    pub fit_radius: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct OffdropletArgs {
    #[command(flatten)]
    pub weight: WeightArg,
    #[arg(long, default_value_t = 1)]
    pub q: usize,
    /// Comma-separated m values (n = m); the first calibrates the bound.
    #[arg(long, value_delimiter = ',', default_value = "20,40,80")]
    pub m: Vec<f64>,
    /// Radii as multiples of R.
    #[arg(long, default_value_t = 1.1)]
    pub from: f64,
    #[arg(long, default_value_t = 2.0)]
    pub to: f64,
    #[arg(long, default_value_t = 19)]
    pub points: usize,
    /// Multiplicative safety factor on the calibrated constant.
    #[arg(long, default_value_t = 1.1)]
    pub safety: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct LocalArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Number of orders kept (q=1: ≤ 2, q=2: ≤ 3, otherwise 1).
    #[arg(long, default_value_t = 1)]
    pub terms: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for sample_<i>.csv and sample_<i>.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub weight: WeightArg,
    /// Gauss–Legendre nodes per dimension.
    #[arg(long, default_value_t = 256)]
    pub quad: usize,
    /// Monte Carlo pairs (0 skips the cross-check).
    #[arg(long, default_value_t = 1_000_000)]
    pub mc_pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArg,
}

/// A configuration error naming `flag`; library configuration errors keep their message.
pub fn flag_error(flag: &str, e: impl std::fmt::Display) -> Error {
    let msg = e.to_string();
    let msg = msg.strip_prefix("configuration error: ").unwrap_or(&msg);
    Error::Config(format!("{flag}: {msg}"))
}

pub fn space_spec(q: usize, n: Option<usize>, m: f64) -> Result<SpaceSpec> {
    if q == 0 {
        return Err(flag_error("--q", "must be at least 1"));
    }
    if !(m.is_finite() && m > 0.0) {
        return Err(flag_error("--m", format!("{m} is not a positive number")));
    }
    let n = n.unwrap_or(m.round().max(1.0) as usize);
    if n == 0 {
        return Err(flag_error("--n", "must be at least 1"));
    }
    SpaceSpec::new(q, n, m)
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}"));
    let z = match parts.as_slice() {
        [re] => Complex64::new(num(re)?, 0.0),
        [re, im] => Complex64::new(num(re)?, num(im)?),
        _ => return Err(format!("expected re or re,im, got '{s}'")),
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(z)
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("POLYKERNEL_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| flag_error("POLYKERNEL_THREADS", format!("'{v}' is not a positive integer")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| flag_error("POLYKERNEL_THREADS", e))?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|_| commands::run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
