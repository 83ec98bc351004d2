//! Weighted polyanalytic polynomial reproducing kernels `K_{q,mQ,n}` for
//! radial weights, the determinantal point processes they define, explicit
//! near-diagonal kernel expansions and harnesses measuring their asymptotics.
//!
//! Area measure is `dA = π⁻¹ dx dy` and `Δ = ∂∂̄` throughout.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod dd;
pub mod dpp;
pub mod equilibrium;
pub mod error;
pub mod gram;
pub mod io;
pub mod kernel;
pub mod laguerre;
pub mod local;
pub mod par;
pub mod quadrature;
pub mod weight;

pub use equilibrium::{droplet_radius, RadialEquilibrium};
pub use error::{Error, Result};
pub use gram::{GramFactorization, SpaceSpec};
pub use kernel::{build_space, KernelEvaluator};
pub use weight::{WeightFamily, WeightModel};

pub use num_complex::Complex64;
