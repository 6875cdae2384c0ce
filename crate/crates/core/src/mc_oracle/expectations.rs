use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{combiner, mmse_estimate, pilot_loads, received_pilots, sample_channels, McScenario};
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose, StreamRng};
use crate::se_core::{log2_1p, Scheme};

/// Channel-draw averages for the combiners of one BS (cell index `j`), with
/// raw (not power-scaled) channels.
#[derive(Debug, Clone, PartialEq)]
pub struct BsExpectations {
    pub j: usize,
    /// E{g_k^H h_{j,jk}} for the K UEs of cell j.
    pub signal: Vec<Complex64>,
    /// E{|g_k^H h_{j,u}|^2}, K x U.
    pub cross: DMatrix<f64>,
    /// E{||g_k||^2}.
    pub norm2: Vec<f64>,
    pub n_draws: usize,
}

impl BsExpectations {
    fn zeros(j: usize, k: usize, n_ues: usize) -> Self {
        BsExpectations {
            j,
            signal: vec![Complex64::new(0.0, 0.0); k],
            cross: DMatrix::zeros(k, n_ues),
            norm2: vec![0.0; k],
            n_draws: 0,
        }
    }

    fn add(&mut self, o: &BsExpectations) {
        for (a, b) in self.signal.iter_mut().zip(&o.signal) {
            *a += b;
        }
        self.cross += &o.cross;
        for (a, b) in self.norm2.iter_mut().zip(&o.norm2) {
            *a += b;
        }
        self.n_draws += o.n_draws;
    }

    fn finish(mut self) -> Self {
        let n = self.n_draws as f64;
        for a in self.signal.iter_mut() {
            *a /= n;
        }
        self.cross /= n;
        for a in self.norm2.iter_mut() {
            *a /= n;
        }
        self
    }

    /// Achievable UL SINR of UE k with the distortion model of EVM `epsilon`;
    /// `epsilon = 0` is the ideal-hardware SINR.
    pub fn ul_sinr(&self, scn: &McScenario, k: usize, epsilon: f64) -> f64 {
        let keep = 1.0 - epsilon * epsilon;
        let u_own = self.j * scn.k() + k;
        let desired = scn.powers[u_own] * self.signal[k].norm_sqr();
        let total: f64 = (0..scn.n_ues()).map(|u| scn.powers[u] * self.cross[(k, u)]).sum();
        keep * desired / (total - keep * desired + self.norm2[k])
    }
}

fn one_draw(scheme: Scheme, scn: &McScenario, bss: &[usize], rng: &mut StreamRng) -> Result<Vec<BsExpectations>> {
    let k = scn.k();
    let mut out = Vec::with_capacity(bss.len());
    for &j in bss {
        let h = sample_channels(scn, j, rng);
        let y = received_pilots(scn, &h, rng);
        let est = mmse_estimate(scn, j, &y)?;
        let g = combiner(scheme, &est.h_v, &scn.plan, j)?;
        let proj = g.adjoint() * &h;
        let mut acc = BsExpectations::zeros(j, k, scn.n_ues());
        for kk in 0..k {
            acc.signal[kk] = proj[(kk, j * k + kk)];
            acc.norm2[kk] = g.column(kk).norm_squared();
        }
        acc.cross = proj.map(|z| z.norm_sqr());
        acc.n_draws = 1;
        out.push(acc);
    }
    Ok(out)
}

const CHUNK: usize = 16;

/// Averages over `n_draws` independent channel and noise realizations at the
/// listed BSs. Draw `d` uses its own stream and partial sums are merged in
/// chunk order, so the result does not depend on the thread count.
pub fn network_expectations(
    scheme: Scheme,
    scn: &McScenario,
    bss: &[usize],
    n_draws: usize,
    seed: u64,
) -> Result<Vec<BsExpectations>> {
    if n_draws == 0 {
        return Err(Error::InvalidConfig("need at least one channel draw".into()));
    }
    let n_chunks = n_draws.div_ceil(CHUNK);
    let partials: Vec<Result<Vec<BsExpectations>>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc: Vec<BsExpectations> = bss
                .iter()
                .map(|&j| BsExpectations::zeros(j, scn.k(), scn.n_ues()))
                .collect();
            for d in c * CHUNK..((c + 1) * CHUNK).min(n_draws) {
                let mut rng = stream(seed, Purpose::Channels, d as u64);
                for (a, o) in acc.iter_mut().zip(one_draw(scheme, scn, bss, &mut rng)?) {
                    a.add(&o);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total: Vec<BsExpectations> = bss
        .iter()
        .map(|&j| BsExpectations::zeros(j, scn.k(), scn.n_ues()))
        .collect();
    for p in partials {
        for (a, o) in total.iter_mut().zip(p?) {
            a.add(&o);
        }
    }
    Ok(total.into_iter().map(BsExpectations::finish).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct UeSinrs {
    pub sinr: Vec<f64>,
    /// log2(1 + SINR) per UE, before the pilot-overhead prelog.
    pub rate: Vec<f64>,
    pub expectations: BsExpectations,
}

pub const MIN_DRAWS: usize = 1_000;

/// UL SINRs of the reference cell's UEs at fixed positions, with every
/// expectation replaced by an average over channel draws.
pub fn empirical_sinr_ul(scheme: Scheme, scn: &McScenario, n_draws: usize, seed: u64) -> Result<UeSinrs> {
    empirical_sinr_impaired(scheme, scn, 0.0, n_draws, seed)
}

/// Same expectations as the ideal-hardware SINR, with the distortion factors
/// (1 - eps^2) applied to the coherent signal term.
pub fn empirical_sinr_impaired(
    scheme: Scheme,
    scn: &McScenario,
    epsilon: f64,
    n_draws: usize,
    seed: u64,
) -> Result<UeSinrs> {
    if n_draws < MIN_DRAWS {
        return Err(Error::InvalidConfig(format!(
            "need at least {MIN_DRAWS} channel draws, got {n_draws}"
        )));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidConfig(format!("EVM {epsilon} must lie in [0, 1)")));
    }
    let exp = network_expectations(scheme, scn, &[0], n_draws, seed)?.remove(0);
    let sinr: Vec<f64> = (0..scn.k()).map(|k| exp.ul_sinr(scn, k, epsilon)).collect();
    let rate = sinr.iter().map(|&s| log2_1p(s)).collect();
    Ok(UeSinrs {
        sinr,
        rate,
        expectations: exp,
    })
}

/// Exact fixed-position SINRs at the reference BS after averaging over the
/// fading analytically (MR, ZF and P-ZF appendix expressions).
pub fn fixed_position_sinr(scheme: Scheme, scn: &McScenario) -> Result<Vec<f64>> {
    let (m, k, b) = (scn.m, scn.k(), scn.b());
    let lambdas = scn.lambdas(0);
    let (_, q) = pilot_loads(scn, &lambdas);
    let s = 1.0 / scn.snr;
    let own_color = scn.plan.color_of(0);
    let mut lam2 = vec![0.0; b];
    for (u, &l) in lambdas.iter().enumerate() {
        lam2[scn.pilot_index[u]] += l * l;
    }
    let sum_lambda: f64 = lambdas.iter().sum();
    let mut out = Vec::with_capacity(k);
    for kk in 0..k {
        let bk = scn.pilot_index[kk];
        let qk = q[bk];
        let v = match scheme {
            Scheme::Mr => {
                let mf = m as f64;
                qk / (sum_lambda / mf + lam2[bk] * qk - qk + s / mf)
            }
            Scheme::Zf | Scheme::Pzf => {
                let gp = match scheme {
                    Scheme::Zf if m > k => (m - k) as f64,
                    Scheme::Pzf if m > b => (m - b) as f64,
                    _ => {
                        return Err(Error::Infeasible {
                            scheme,
                            bound: "M larger than the zero-forced dimension".into(),
                        })
                    }
                };
                let err: f64 = lambdas
                    .iter()
                    .enumerate()
                    .map(|(u, &l)| {
                        let a = match scheme {
                            Scheme::Zf => scn.plan.color_of(scn.cell_of(u)) == own_color,
                            _ => true,
                        };
                        if a {
                            l * (1.0 - l * q[scn.pilot_index[u]])
                        } else {
                            l
                        }
                    })
                    .sum();
                1.0 / (lam2[bk] + err / (gp * qk) - 1.0 + s / (gp * qk))
            }
        };
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexnet::{make_pilot_plan, HexNetwork};
    use crate::rng::{stream, Purpose};

    fn scenario(k: usize, m: usize) -> McScenario {
        let net = HexNetwork::new(1, 1.0, 3.7, 1.0).unwrap();
        let plan = make_pilot_plan(1, &net, k).unwrap();
        McScenario::sample(net, plan, m, 3.0, &mut stream(4, Purpose::Positions, 0)).unwrap()
    }

    #[test]
    fn empirical_matches_fixed_position_forms() {
        let scn = scenario(2, 16);
        for scheme in Scheme::ALL {
            let emp = empirical_sinr_ul(scheme, &scn, 8000, 7).unwrap();
            let exact = fixed_position_sinr(scheme, &scn).unwrap();
            for (a, b) in emp.sinr.iter().zip(&exact) {
                assert!((a - b).abs() < 0.04 * b, "{scheme}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn zero_evm_reproduces_ideal_hardware() {
        let scn = scenario(2, 8);
        let a = empirical_sinr_ul(Scheme::Mr, &scn, 1000, 3).unwrap();
        let b = empirical_sinr_impaired(Scheme::Mr, &scn, 0.0, 1000, 3).unwrap();
        assert_eq!(a, b);
        let c = empirical_sinr_impaired(Scheme::Mr, &scn, 0.1, 1000, 3).unwrap();
        assert!(a.sinr.iter().zip(&c.sinr).all(|(x, y)| y < x));
    }

    #[test]
    fn rejects_few_draws() {
        let scn = scenario(1, 4);
        assert!(empirical_sinr_ul(Scheme::Mr, &scn, 10, 1).is_err());
    }
}
