use thiserror::Error;

use crate::se_core::Scheme;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid pilot reuse factor {0}: not of the form i^2 + ij + j^2")]
    InvalidReuseFactor(u32),

    #[error("{scheme} infeasible: requires {bound}")]
    Infeasible { scheme: Scheme, bound: String },

    #[error("no feasible (K, beta) for {scheme} at M = {m}")]
    NoFeasiblePoint { scheme: Scheme, m: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("linear algebra: {0}")]
    Singular(String),

    #[error("duality power control infeasible: {0}")]
    DualityInfeasible(String),

    #[error("asymptotic SINR is unbounded (no pilot contamination and ideal hardware)")]
    Unbounded,

    #[error("moment table parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
