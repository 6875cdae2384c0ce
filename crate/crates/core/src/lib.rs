//! Spectral efficiency of multi-cell massive MIMO on a symmetric hexagonal
//! grid: closed-form expressions for MR, ZF and P-ZF processing, an exhaustive
//! optimizer over the number of UEs and the pilot reuse factor, and a
//! Monte-Carlo oracle that samples channels, estimates them and evaluates the
//! achievable SINRs directly.

pub mod error;
pub mod hexnet;
pub mod mc_oracle;
pub mod moments;
pub mod optimizer;
pub mod rng;
pub mod se_core;

pub use error::{Error, Result};
pub use hexnet::{bs_position, make_pilot_plan, pathloss, CellId, HexNetwork, PilotPlan, Point};
pub use moments::{compute_moments, InterferenceCase, MomentTable};
pub use optimizer::{optimize_point, se_vs_k_curve, sweep, OptimumPoint, SweepSpec};
pub use se_core::{contamination_sum, se_joint, AsymptoticSinr, Scheme, SeConfig, SeResult};
