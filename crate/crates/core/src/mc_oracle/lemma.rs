//! Position-averaged SE of the reference cell: an outer loop over UE
//! placements and an inner loop over channel draws at fixed placements.

use rayon::prelude::*;

use super::{conditional_expectations, empirical_sinr_impaired, ConditionalCase, McScenario};
use crate::error::{Error, Result};
use crate::hexnet::{make_pilot_plan, sample_ue_position, HexNetwork, Point};
use crate::rng::{stream, Purpose};
use crate::se_core::{log2_1p, Scheme};

pub const MIN_OUTER: usize = 100;
pub const MIN_INNER: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerSampler {
    /// Draw only the M x K matrix the combiners depend on (see `conditional`).
    #[default]
    Conditional,
    /// Sample every channel, run the estimator and build the combiners.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LemmaCase {
    pub scheme: Scheme,
    pub beta: u32,
}

#[derive(Debug, Clone)]
pub struct LemmaSpec {
    pub net: HexNetwork,
    pub m: usize,
    pub k: usize,
    pub s: usize,
    pub snr: f64,
    pub epsilon: f64,
    pub n_outer: usize,
    pub n_inner: usize,
    pub seed: u64,
    pub sampler: InnerSampler,
}

impl LemmaSpec {
    fn validate(&self, cases: &[LemmaCase]) -> Result<()> {
        if self.n_outer < MIN_OUTER || self.n_inner < MIN_INNER {
            return Err(Error::InvalidConfig(format!(
                "need at least {MIN_OUTER} position draws and {MIN_INNER} channel draws (got {}, {})",
                self.n_outer, self.n_inner
            )));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::InvalidConfig(format!("EVM {} must lie in [0, 1)", self.epsilon)));
        }
        if let Some(c) = cases.iter().find(|c| c.beta as usize * self.k > self.s) {
            return Err(Error::InvalidConfig(format!(
                "B = {} exceeds S = {}",
                c.beta as usize * self.k,
                self.s
            )));
        }
        Ok(())
    }

    fn prelog(&self, beta: u32) -> f64 {
        self.k as f64 * (1.0 - (beta as usize * self.k) as f64 / self.s as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaSe {
    pub case: LemmaCase,
    /// Cell SE, bit/s/Hz/cell.
    pub se: f64,
    /// Standard error of `se` over the position draws.
    pub stderr: f64,
}

fn positions(net: &HexNetwork, k: usize, seed: u64, o: usize) -> Vec<Point> {
    let mut rng = stream(seed, Purpose::Positions, o as u64);
    net.cells()
        .iter()
        .flat_map(|&c| (0..k).map(move |_| c))
        .map(|c| sample_ue_position(c, net, &mut rng))
        .collect()
}

/// Seed for the inner loop of outer draw `o` on the full path, kept apart
/// from the conditional path's per-draw streams.
fn inner_seed(seed: u64, o: usize) -> u64 {
    seed.wrapping_add((o as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Mean over the reference cell's UEs of log2(1 + SINR), one value per case,
/// for one placement.
fn outer_draw(spec: &LemmaSpec, cases: &[LemmaCase], o: usize) -> Result<Vec<f64>> {
    let pos = positions(&spec.net, spec.k, spec.seed, o);
    let mut betas: Vec<u32> = cases.iter().map(|c| c.beta).collect();
    betas.sort_unstable();
    betas.dedup();
    let scns = betas
        .iter()
        .map(|&b| {
            let plan = make_pilot_plan(b, &spec.net, spec.k)?;
            McScenario::new(spec.net.clone(), plan, spec.m, spec.snr, pos.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let scn_of = |c: &LemmaCase| &scns[betas.binary_search(&c.beta).expect("beta registered")];
    let sinrs: Vec<Vec<f64>> = match spec.sampler {
        InnerSampler::Conditional => {
            let cc: Vec<ConditionalCase<'_>> = cases
                .iter()
                .map(|c| ConditionalCase {
                    scheme: c.scheme,
                    scn: scn_of(c),
                })
                .collect();
            let mut rng = stream(spec.seed, Purpose::Channels, o as u64);
            conditional_expectations(&cc, spec.epsilon, spec.n_inner, &mut rng)?
        }
        InnerSampler::Full => cases
            .iter()
            .map(|c| {
                empirical_sinr_impaired(
                    c.scheme,
                    scn_of(c),
                    spec.epsilon,
                    spec.n_inner,
                    inner_seed(spec.seed, o),
                )
                .map(|r| r.sinr)
            })
            .collect::<Result<_>>()?,
    };
    Ok(sinrs
        .iter()
        .map(|s| s.iter().map(|&x| log2_1p(x)).sum::<f64>() / s.len() as f64)
        .collect())
}

/// Monte-Carlo SE of the reference cell for each case. All cases share the
/// same placements and, on the conditional path, the same channel draws.
pub fn lemma_se(spec: &LemmaSpec, cases: &[LemmaCase]) -> Result<Vec<LemmaSe>> {
    spec.validate(cases)?;
    let draws: Vec<Vec<f64>> = (0..spec.n_outer)
        .into_par_iter()
        .map(|o| outer_draw(spec, cases, o))
        .collect::<Result<_>>()?;
    let n = spec.n_outer as f64;
    Ok(cases
        .iter()
        .enumerate()
        .map(|(i, &case)| {
            let mean = draws.iter().map(|d| d[i]).sum::<f64>() / n;
            let var = draws.iter().map(|d| (d[i] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let pre = spec.prelog(case.beta);
            LemmaSe {
                case,
                se: pre * mean,
                stderr: pre * (var / n).sqrt(),
            }
        })
        .collect())
}

/// [`lemma_se`] on the full estimator/combiner path.
pub fn lemma_se_full(spec: &LemmaSpec, cases: &[LemmaCase]) -> Result<Vec<LemmaSe>> {
    lemma_se(
        &LemmaSpec {
            sampler: InnerSampler::Full,
            ..spec.clone()
        },
        cases,
    )
}
