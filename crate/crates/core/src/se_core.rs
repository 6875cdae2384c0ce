//! Closed-form spectral efficiency.
//!
//! All quantities refer to the reference cell (0,0); by the symmetry of the
//! lattice coloring every cell sees the same interference geometry.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hexnet::{CellId, PilotPlan};
use crate::moments::MomentTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Mr,
    Zf,
    Pzf,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Mr, Scheme::Zf, Scheme::Pzf];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Mr => "MR",
            Scheme::Zf => "ZF",
            Scheme::Pzf => "P-ZF",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "mr" => Ok(Scheme::Mr),
            "zf" => Ok(Scheme::Zf),
            "pzf" => Ok(Scheme::Pzf),
            _ => Err(Error::InvalidConfig(format!("unknown scheme '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeConfig {
    pub m: usize,
    pub k: usize,
    pub beta: u32,
    /// Coherence block length in symbols.
    pub s: usize,
    /// rho / sigma^2, linear.
    pub snr: f64,
    pub zeta_ul: f64,
    pub zeta_dl: f64,
    pub epsilon: f64,
}

impl SeConfig {
    pub fn new(m: usize, k: usize, beta: u32, s: usize, snr: f64) -> Self {
        SeConfig {
            m,
            k,
            beta,
            s,
            snr,
            zeta_ul: 0.5,
            zeta_dl: 0.5,
            epsilon: 0.0,
        }
    }

    pub fn b(&self) -> usize {
        self.beta as usize * self.k
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m == 0 || self.k == 0 {
            return bad(format!("M = {} and K = {} must be at least 1", self.m, self.k));
        }
        if self.b() > self.s {
            return bad(format!("B = {} exceeds the coherence block S = {}", self.b(), self.s));
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return bad(format!("SNR {} must be positive", self.snr));
        }
        if !(self.zeta_ul > 0.0 && self.zeta_dl > 0.0) || (self.zeta_ul + self.zeta_dl - 1.0).abs() > 1e-12 {
            return bad(format!(
                "UL/DL fractions ({}, {}) must be positive and sum to one",
                self.zeta_ul, self.zeta_dl
            ));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return bad(format!("EVM {} must lie in [0, 1)", self.epsilon));
        }
        Ok(())
    }

    pub fn check_feasible(&self, scheme: Scheme) -> Result<()> {
        self.validate()?;
        match scheme {
            Scheme::Zf if self.m <= self.k => Err(Error::Infeasible {
                scheme,
                bound: format!("M > K (M = {}, K = {})", self.m, self.k),
            }),
            Scheme::Pzf if self.m <= self.b() => Err(Error::Infeasible {
                scheme,
                bound: format!("M > B (M = {}, B = {})", self.m, self.b()),
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConstants {
    pub g: f64,
    /// Aligned with the moment table's cells.
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeResult {
    pub interference: f64,
    pub sinr: f64,
    pub se_ul: f64,
    pub se_dl: f64,
    pub se_total: f64,
    pub per_ue_se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticSinr {
    Finite(f64),
    /// No co-pilot interference and ideal hardware: the SINR grows without bound.
    Unbounded,
}

impl AsymptoticSinr {
    pub fn value(self) -> Option<f64> {
        match self {
            AsymptoticSinr::Finite(v) => Some(v),
            AsymptoticSinr::Unbounded => None,
        }
    }
}

fn check_inputs(cfg: &SeConfig, moments: &MomentTable, plan: &PilotPlan) -> Result<usize> {
    if plan.beta != cfg.beta || plan.k != cfg.k {
        return Err(Error::InvalidConfig(format!(
            "pilot plan (beta = {}, K = {}) does not match the configuration (beta = {}, K = {})",
            plan.beta, plan.k, cfg.beta, cfg.k
        )));
    }
    if plan.colors().len() != moments.len() {
        return Err(Error::InvalidConfig(
            "pilot plan and moment table cover different grids".into(),
        ));
    }
    moments
        .index_of(CellId::ORIGIN)
        .ok_or_else(|| Error::InvalidConfig("moment table lacks the reference cell".into()))
}

pub fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Array gain G and per-cell Z for a scheme. With `epsilon > 0` the hardware
/// impairment factors (1 - eps^2) are applied.
pub fn scheme_constants(
    scheme: Scheme,
    cfg: &SeConfig,
    moments: &MomentTable,
    plan: &PilotPlan,
) -> Result<SchemeConstants> {
    cfg.check_feasible(scheme)?;
    let j = check_inputs(cfg, moments, plan)?;
    let kf = cfg.k as f64;
    let keep = 1.0 - cfg.epsilon * cfg.epsilon;
    let noise_b = 1.0 / (cfg.b() as f64 * cfg.snr);
    let n = moments.len();
    let mu1 = &moments.mu1;
    let colors = plan.colors();

    let (g, z) = match scheme {
        Scheme::Mr => (cfg.m as f64 * keep, vec![kf; n]),
        Scheme::Zf => {
            let cj = colors[j];
            let sum_j: f64 = (0..n).filter(|&l| colors[l] == cj).map(|l| mu1[l]).sum();
            let z = (0..n)
                .map(|l| {
                    if colors[l] == cj {
                        kf * (1.0 - keep * mu1[l] / (sum_j + noise_b))
                    } else {
                        kf
                    }
                })
                .collect();
            ((cfg.m - cfg.k) as f64 * keep, z)
        }
        Scheme::Pzf => {
            // Sum over the interferer's own co-pilot set L_l, per color class.
            let mut class_sum = vec![0.0; plan.beta as usize];
            for l in 0..n {
                class_sum[colors[l] as usize] += mu1[l];
            }
            let z = (0..n)
                .map(|l| kf * (1.0 - keep * mu1[l] / (class_sum[colors[l] as usize] + noise_b)))
                .collect();
            ((cfg.m - cfg.b()) as f64 * keep, z)
        }
    };
    Ok(SchemeConstants { g, z })
}

/// Interference term I of the closed-form SINR.
pub fn interference_term(scheme: Scheme, cfg: &SeConfig, moments: &MomentTable, plan: &PilotPlan) -> Result<f64> {
    let sc = scheme_constants(scheme, cfg, moments, plan)?;
    let j = check_inputs(cfg, moments, plan)?;
    Ok(interference_from_constants(&sc, cfg, moments, plan, j))
}

fn interference_from_constants(
    sc: &SchemeConstants,
    cfg: &SeConfig,
    moments: &MomentTable,
    plan: &PilotPlan,
    j: usize,
) -> f64 {
    let colors = plan.colors();
    let cj = colors[j];
    let inv_snr = 1.0 / cfg.snr;
    let noise_b = inv_snr / cfg.b() as f64;
    let (mu1, mu2) = (&moments.mu1, &moments.mu2);

    let mut contamination = 0.0;
    let mut copilot_mu1 = 0.0;
    let mut weighted = 0.0;
    for l in 0..moments.len() {
        weighted += mu1[l] * sc.z[l];
        if colors[l] == cj {
            copilot_mu1 += mu1[l];
            if l != j {
                contamination += mu2[l] + (mu2[l] - mu1[l] * mu1[l]) / sc.g;
            }
        }
    }
    contamination + (weighted + inv_snr) * (copilot_mu1 + noise_b) / sc.g
}

/// Joint UL + DL spectral efficiency of the reference cell.
pub fn se_joint(scheme: Scheme, cfg: &SeConfig, moments: &MomentTable, plan: &PilotPlan) -> Result<SeResult> {
    let sc = scheme_constants(scheme, cfg, moments, plan)?;
    let j = check_inputs(cfg, moments, plan)?;
    let interference = interference_from_constants(&sc, cfg, moments, plan, j);
    let e2 = cfg.epsilon * cfg.epsilon;
    let sinr = (1.0 - e2) / (interference + e2);
    let prelog = cfg.k as f64 * (1.0 - cfg.b() as f64 / cfg.s as f64);
    let se_total = prelog * log2_1p(sinr);
    Ok(SeResult {
        interference,
        sinr,
        se_ul: cfg.zeta_ul * se_total,
        se_dl: cfg.zeta_dl * se_total,
        se_total,
        per_ue_se: se_total / cfg.k as f64,
    })
}

/// Pilot contamination sum over the co-pilot cells of the reference cell.
pub fn contamination_sum(moments: &MomentTable, plan: &PilotPlan) -> Result<f64> {
    let j = moments
        .index_of(CellId::ORIGIN)
        .ok_or_else(|| Error::InvalidConfig("moment table lacks the reference cell".into()))?;
    if plan.colors().len() != moments.len() {
        return Err(Error::InvalidConfig(
            "pilot plan and moment table cover different grids".into(),
        ));
    }
    let cj = plan.color_of(j);
    Ok((0..moments.len())
        .filter(|&l| l != j && plan.color_of(l) == cj)
        .map(|l| moments.mu2[l])
        .sum())
}

/// SINR limit as M grows without bound; identical for all schemes.
pub fn asymptotic_sinr(moments: &MomentTable, plan: &PilotPlan, epsilon: f64) -> Result<AsymptoticSinr> {
    let c = contamination_sum(moments, plan)?;
    let e2 = epsilon * epsilon;
    if c + e2 == 0.0 {
        return Ok(AsymptoticSinr::Unbounded);
    }
    Ok(AsymptoticSinr::Finite((1.0 - e2) / (c + e2)))
}

/// Cell SE in the M -> infinity limit for a given (K, beta).
pub fn asymptotic_cell_se(k: usize, beta: u32, s: usize, sinr: f64) -> f64 {
    let kf = k as f64;
    kf * (1.0 - kf * beta as f64 / s as f64) * log2_1p(sinr)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticOptimum {
    pub k_candidates: [usize; 2],
    pub k_star: usize,
    pub se_infinity: f64,
}

/// Optimal K in the M -> infinity limit: the prelog K(1 - K beta / S) peaks at
/// S / (2 beta), so the optimum is one of the two neighbouring integers.
pub fn asymptotic_se(s: usize, beta: u32, moments: &MomentTable, plan: &PilotPlan) -> Result<AsymptoticOptimum> {
    if s < 2 * beta as usize {
        return Err(Error::InvalidConfig(format!(
            "S = {s} must be at least 2 beta = {}",
            2 * beta
        )));
    }
    if plan.beta != beta {
        return Err(Error::InvalidConfig("pilot plan has a different reuse factor".into()));
    }
    let sinr = match asymptotic_sinr(moments, plan, 0.0)? {
        AsymptoticSinr::Finite(v) => v,
        AsymptoticSinr::Unbounded => return Err(Error::Unbounded),
    };
    let lo = s / (2 * beta as usize);
    let hi = s.div_ceil(2 * beta as usize);
    let (se_lo, se_hi) = (
        asymptotic_cell_se(lo, beta, s, sinr),
        asymptotic_cell_se(hi, beta, s, sinr),
    );
    let (k_star, se_infinity) = if se_hi > se_lo { (hi, se_hi) } else { (lo, se_lo) };
    Ok(AsymptoticOptimum {
        k_candidates: [lo, hi],
        k_star,
        se_infinity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexnet::{make_pilot_plan, HexNetwork};

    fn single() -> (MomentTable, PilotPlan) {
        let net = HexNetwork::new(0, 1.0, 3.7, 1.0).unwrap();
        let m = MomentTable::single_cell(3.7);
        let p = make_pilot_plan(1, &net, 10).unwrap();
        (m, p)
    }

    #[test]
    fn single_cell_mr_interference() {
        let (m, p) = single();
        let cfg = SeConfig::new(100, 10, 1, 400, 1.0);
        let i = interference_term(Scheme::Mr, &cfg, &m, &p).unwrap();
        assert!((i - 0.121).abs() < 1e-15);
        let se = se_joint(Scheme::Mr, &cfg, &m, &p).unwrap();
        let expect = 10.0 * (390.0 / 400.0) * (1.0 + 1.0 / 0.121f64).log2();
        assert!((se.se_total - expect).abs() < 1e-12);
        assert!((se.se_ul + se.se_dl - se.se_total).abs() < 1e-15);
    }

    #[test]
    fn single_cell_zf_constant() {
        let (m, p) = single();
        let snr = 3.0;
        let cfg = SeConfig::new(50, 10, 1, 400, snr);
        let sc = scheme_constants(Scheme::Zf, &cfg, &m, &p).unwrap();
        let x = 1.0 / (10.0 * snr);
        assert!((sc.z[0] - 10.0 * x / (1.0 + x)).abs() < 1e-14);
        assert_eq!(sc.g, 40.0);
    }

    #[test]
    fn impaired_mr_gain() {
        let (m, p) = single();
        let mut cfg = SeConfig::new(100, 10, 1, 400, 1.0);
        cfg.epsilon = 0.1;
        let sc = scheme_constants(Scheme::Mr, &cfg, &m, &p).unwrap();
        assert!((sc.g - 99.0).abs() < 1e-12);
        assert!(sc.z.iter().all(|&z| z == 10.0));
    }

    #[test]
    fn feasibility_errors_name_the_bound() {
        let (m, p) = single();
        let cfg = SeConfig::new(10, 10, 1, 400, 1.0);
        let e = scheme_constants(Scheme::Zf, &cfg, &m, &p).unwrap_err();
        assert!(e.to_string().contains("M > K"), "{e}");
        let e = scheme_constants(Scheme::Pzf, &cfg, &m, &p).unwrap_err();
        assert!(e.to_string().contains("M > B"), "{e}");
        assert!(scheme_constants(Scheme::Mr, &cfg, &m, &p).is_ok());
    }

    #[test]
    fn full_pilot_frame_gives_zero() {
        let (m, p) = single();
        let cfg = SeConfig::new(100, 10, 1, 10, 1.0);
        assert_eq!(se_joint(Scheme::Mr, &cfg, &m, &p).unwrap().se_total, 0.0);
    }

    #[test]
    fn single_cell_limits() {
        let (m, p) = single();
        assert_eq!(asymptotic_sinr(&m, &p, 0.0).unwrap(), AsymptoticSinr::Unbounded);
        let v = asymptotic_sinr(&m, &p, 0.1).unwrap().value().unwrap();
        assert!((v - 99.0).abs() < 1e-12);
    }

    #[test]
    fn scheme_names_parse() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!("pzf".parse::<Scheme>().unwrap(), Scheme::Pzf);
    }
}
