//! Exhaustive search over (K, beta) for the SE-maximizing operating point.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hexnet::{make_pilot_plan, HexNetwork, PilotPlan};
use crate::moments::{InterferenceCase, MomentTable};
use crate::se_core::{se_joint, Scheme, SeConfig};

pub const DEFAULT_BETAS: [u32; 4] = [1, 3, 4, 7];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub m_values: Vec<usize>,
    pub schemes: Vec<Scheme>,
    pub case: InterferenceCase,
    /// Template for S, SNR, UL/DL split and EVM; M, K and beta are overwritten.
    pub base: SeConfig,
    pub beta_candidates: Vec<u32>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m_values.is_empty() {
            return Err(Error::InvalidConfig("empty antenna list".into()));
        }
        if self.m_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("antenna list must be strictly ascending".into()));
        }
        if self.schemes.is_empty() || self.beta_candidates.is_empty() {
            return Err(Error::InvalidConfig("empty scheme or reuse-factor list".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumPoint {
    pub m: usize,
    pub scheme: Scheme,
    pub k_star: usize,
    pub beta_star: u32,
    pub se_star: f64,
    pub per_ue_se: f64,
    pub antennas_per_ue: f64,
}

/// Pilot plans for a set of reuse factors on one network, sorted by beta.
#[derive(Debug, Clone)]
pub struct ReusePlans {
    plans: Vec<PilotPlan>,
}

impl ReusePlans {
    pub fn new(net: &HexNetwork, betas: &[u32]) -> Result<Self> {
        let mut betas = betas.to_vec();
        betas.sort_unstable();
        betas.dedup();
        let plans = betas
            .iter()
            .map(|&b| make_pilot_plan(b, net, 1))
            .collect::<Result<Vec<_>>>()?;
        Ok(ReusePlans { plans })
    }

    pub fn plans(&self) -> &[PilotPlan] {
        &self.plans
    }

    pub fn get(&self, beta: u32) -> Option<&PilotPlan> {
        self.plans.iter().find(|p| p.beta == beta)
    }
}

/// Largest K to scan for a scheme: pilots must fit (beta K <= S), ZF needs
/// K < M and P-ZF needs beta K < M.
pub fn max_feasible_k(scheme: Scheme, m: usize, beta: u32, s: usize) -> usize {
    let b = beta as usize;
    let pilot_cap = s / b;
    match scheme {
        Scheme::Mr => pilot_cap,
        Scheme::Zf => pilot_cap.min(m.saturating_sub(1)),
        Scheme::Pzf => pilot_cap.min(m.saturating_sub(1) / b),
    }
}

fn better(se: f64, k: usize, beta: u32, best: &Option<(f64, usize, u32)>) -> bool {
    match *best {
        None => true,
        Some((bse, bk, bb)) => se > bse || (se == bse && (k < bk || (k == bk && beta < bb))),
    }
}

pub fn optimize_point(
    m: usize,
    scheme: Scheme,
    base: &SeConfig,
    moments: &MomentTable,
    plans: &ReusePlans,
) -> Result<OptimumPoint> {
    let mut best: Option<(f64, usize, u32)> = None;
    for plan in plans.plans() {
        let beta = plan.beta;
        for k in 1..=max_feasible_k(scheme, m, beta, base.s) {
            let cfg = SeConfig { m, k, beta, ..*base };
            let se = se_joint(scheme, &cfg, moments, &plan.with_k(k))?.se_total;
            if better(se, k, beta, &best) {
                best = Some((se, k, beta));
            }
        }
    }
    let (se_star, k_star, beta_star) = best.ok_or(Error::NoFeasiblePoint { scheme, m })?;
    Ok(OptimumPoint {
        m,
        scheme,
        k_star,
        beta_star,
        se_star,
        per_ue_se: se_star / k_star as f64,
        antennas_per_ue: m as f64 / k_star as f64,
    })
}

/// One outcome per (scheme, M), sorted by scheme then M. Infeasible points are
/// reported as errors in place.
pub fn sweep(spec: &SweepSpec, moments: &MomentTable, plans: &ReusePlans) -> Result<Vec<Result<OptimumPoint>>> {
    spec.validate()?;
    let mut schemes = spec.schemes.clone();
    schemes.sort_unstable();
    schemes.dedup();
    let mut subset = Vec::new();
    for &b in &spec.beta_candidates {
        let p = plans
            .get(b)
            .ok_or_else(|| Error::InvalidConfig(format!("no pilot plan prepared for beta = {b}")))?;
        subset.push(p.clone());
    }
    let plans = ReusePlans {
        plans: {
            subset.sort_by_key(|p| p.beta);
            subset.dedup_by_key(|p| p.beta);
            subset
        },
    };
    let jobs: Vec<(Scheme, usize)> = schemes
        .iter()
        .flat_map(|&s| spec.m_values.iter().map(move |&m| (s, m)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(s, m)| optimize_point(m, s, &spec.base, moments, &plans))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeVsK {
    pub beta: u32,
    pub points: Vec<(usize, f64)>,
    pub peak_k: usize,
}

pub fn se_vs_k_curve(
    m: usize,
    scheme: Scheme,
    base: &SeConfig,
    moments: &MomentTable,
    plan: &PilotPlan,
    k_range: std::ops::RangeInclusive<usize>,
) -> Result<SeVsK> {
    let mut points = Vec::new();
    let mut best: Option<(f64, usize, u32)> = None;
    for k in k_range {
        let cfg = SeConfig {
            m,
            k,
            beta: plan.beta,
            ..*base
        };
        let se = se_joint(scheme, &cfg, moments, &plan.with_k(k))?.se_total;
        if better(se, k, plan.beta, &best) {
            best = Some((se, k, plan.beta));
        }
        points.push((k, se));
    }
    let (_, peak_k, _) = best.ok_or_else(|| Error::InvalidConfig("empty K range".into()))?;
    Ok(SeVsK {
        beta: plan.beta,
        points,
        peak_k,
    })
}

/// Log-spaced antenna grid with `per_decade` points per decade, rounded to
/// integers and deduplicated.
pub fn log_m_grid(lo: usize, hi: usize, per_decade: usize) -> Vec<usize> {
    let (a, b) = ((lo as f64).log10(), (hi as f64).log10());
    let n = ((b - a) * per_decade as f64).round() as usize;
    let mut v: Vec<usize> = (0..=n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / n.max(1) as f64).round() as usize)
        .collect();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_k_bounds() {
        assert_eq!(max_feasible_k(Scheme::Mr, 5, 3, 400), 133);
        assert_eq!(max_feasible_k(Scheme::Zf, 5, 3, 400), 4);
        assert_eq!(max_feasible_k(Scheme::Pzf, 10, 3, 400), 3);
        assert_eq!(max_feasible_k(Scheme::Zf, 1, 1, 400), 0);
    }

    #[test]
    fn grid_has_twenty_points_per_decade() {
        let g = log_m_grid(10, 1_000_000, 20);
        assert_eq!(*g.first().unwrap(), 10);
        assert_eq!(*g.last().unwrap(), 1_000_000);
        assert!(g.len() > 95 && g.len() <= 101);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn no_feasible_point_for_single_antenna_zf() {
        let net = HexNetwork::new(0, 1.0, 3.7, 1.0).unwrap();
        let m = MomentTable::single_cell(3.7);
        let plans = ReusePlans::new(&net, &[1]).unwrap();
        let base = SeConfig::new(1, 1, 1, 400, 3.0);
        assert!(matches!(
            optimize_point(1, Scheme::Zf, &base, &m, &plans),
            Err(Error::NoFeasiblePoint { .. })
        ));
    }
}
