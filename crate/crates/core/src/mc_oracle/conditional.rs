//! Channel-draw sampler for the reference BS that draws only what the
//! combiners depend on.
//!
//! Given the positions, the estimator output at BS 0 has independent columns
//! `H_V e_b ~ CN(0, rho q_b I_M)` and the estimation error of UE u is
//! independent of every column, with per-entry variance
//! `e_u = rho lambda_u (1 - lambda_u q_b)`. Conditioning on the columns of the
//! cell's own pilots therefore leaves closed expectations for everything
//! else:
//!
//! * a UE on an own pilot b_m contributes `lambda_u^2 |g^H H_V e_m|^2 + e_u ||g||^2`;
//! * a UE on another pilot contributes `rho lambda_u ||g||^2` (MR, ZF), since
//!   that column is independent of g;
//! * for P-ZF the other columns are nulled exactly and
//!   `[(H_V^H H_V)^-1]_{bb} = [(H_E^H P H_E)^-1]_{kk}`, where P projects onto
//!   the complement of the other B - K columns. By unitary invariance
//!   `P H_E` is distributed as an (M - B + K) x K Gaussian matrix.
//!
//! Only an M x K Gaussian matrix is drawn per channel realization.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::{pilot_loads, McScenario};
use crate::error::{Error, Result};
use crate::rng::fill_complex_normal;
use crate::se_core::Scheme;

#[derive(Debug, Clone, Copy)]
pub struct ConditionalCase<'a> {
    pub scheme: Scheme,
    pub scn: &'a McScenario,
}

/// Per-case constants derived from the positions.
struct Prepared {
    scheme: Scheme,
    rows: usize,
    sigma: Vec<f64>,
    lam2_own: Vec<f64>,
    residual: f64,
}

fn prepare(case: &ConditionalCase<'_>) -> Result<Prepared> {
    let scn = case.scn;
    let (m, k, b) = (scn.m, scn.k(), scn.b());
    let lambdas = scn.lambdas(0);
    let (_, q) = pilot_loads(scn, &lambdas);
    let own: Vec<usize> = (0..k).map(|kk| scn.pilot_index[kk]).collect();
    let is_own_pilot = |p: usize| scn.plan.color_of(0) as usize == p / k;
    let mut lam2 = vec![0.0; b];
    let mut residual = 0.0;
    for (u, &l) in lambdas.iter().enumerate() {
        let p = scn.pilot_index[u];
        lam2[p] += l * l;
        let err = scn.snr * l * (1.0 - l * q[p]);
        residual += match case.scheme {
            Scheme::Pzf => err,
            _ if is_own_pilot(p) => err,
            _ => scn.snr * l,
        };
    }
    let rows = match case.scheme {
        Scheme::Mr => m,
        Scheme::Zf if m > k => m,
        Scheme::Pzf if m > b => m - b + k,
        s => {
            return Err(Error::Infeasible {
                scheme: s,
                bound: format!("M larger than the zero-forced dimension (M = {m}, K = {k}, B = {b})"),
            })
        }
    };
    Ok(Prepared {
        scheme: case.scheme,
        rows,
        sigma: own.iter().map(|&p| (scn.snr * q[p]).sqrt()).collect(),
        lam2_own: own.iter().map(|&p| lam2[p]).collect(),
        residual,
    })
}

/// Accumulated per-UE sums: coherent gain, total received power, ||g||^2.
#[derive(Debug, Clone)]
struct Sums {
    signal: Vec<f64>,
    total: Vec<f64>,
    norm2: Vec<f64>,
}

fn invert_hermitian(w: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = w.nrows();
    w.clone()
        .cholesky()
        .map(|c| c.solve(&DMatrix::identity(n, n)))
        .ok_or_else(|| Error::Singular("estimated-channel Gram matrix is singular".into()))
}

/// UL SINRs (per UE of the reference cell, per case) from `n_inner` draws.
/// All cases must share M and K; they may differ in scheme and reuse factor.
pub fn conditional_expectations<R: Rng + ?Sized>(
    cases: &[ConditionalCase<'_>],
    epsilon: f64,
    n_inner: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let Some(first) = cases.first() else {
        return Ok(Vec::new());
    };
    let (m, k) = (first.scn.m, first.scn.k());
    if cases.iter().any(|c| c.scn.m != m || c.scn.k() != k) {
        return Err(Error::InvalidConfig("conditional cases must share M and K".into()));
    }
    if n_inner == 0 {
        return Err(Error::InvalidConfig("need at least one channel draw".into()));
    }
    let prepared = cases.iter().map(prepare).collect::<Result<Vec<_>>>()?;
    let mut breaks: Vec<usize> = prepared.iter().map(|p| p.rows).collect();
    breaks.sort_unstable();
    breaks.dedup();

    let mut sums: Vec<Sums> = prepared
        .iter()
        .map(|_| Sums {
            signal: vec![0.0; k],
            total: vec![0.0; k],
            norm2: vec![0.0; k],
        })
        .collect();
    let mut z = vec![Complex64::new(0.0, 0.0); m * k];
    let mut gram = vec![Complex64::new(0.0, 0.0); k * k];
    let mut grams: Vec<Vec<Complex64>> = vec![Vec::new(); breaks.len()];

    for _ in 0..n_inner {
        fill_complex_normal(rng, &mut z);
        gram.iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0));
        let mut row = 0;
        for (bi, &end) in breaks.iter().enumerate() {
            while row < end {
                let zr = &z[row * k..(row + 1) * k];
                for a in 0..k {
                    let ca = zr[a].conj();
                    for bcol in a..k {
                        gram[a * k + bcol] += ca * zr[bcol];
                    }
                }
                row += 1;
            }
            grams[bi].clone_from(&gram);
        }
        for (p, acc) in prepared.iter().zip(sums.iter_mut()) {
            let g = &grams[breaks.binary_search(&p.rows).expect("row count registered")];
            let w = DMatrix::from_fn(k, k, |a, b| {
                let v = if a <= b { g[a * k + b] } else { g[b * k + a].conj() };
                v * (p.sigma[a] * p.sigma[b])
            });
            match p.scheme {
                Scheme::Mr => {
                    for a in 0..k {
                        let gn = w[(a, a)].re;
                        let coherent: f64 = (0..k).map(|b| w[(a, b)].norm_sqr() * p.lam2_own[b]).sum();
                        acc.signal[a] += gn;
                        acc.total[a] += coherent + gn * p.residual;
                        acc.norm2[a] += gn;
                    }
                }
                Scheme::Zf | Scheme::Pzf => {
                    let inv = invert_hermitian(&w)?;
                    for a in 0..k {
                        let gn = inv[(a, a)].re;
                        acc.signal[a] += 1.0;
                        acc.total[a] += p.lam2_own[a] + gn * p.residual;
                        acc.norm2[a] += gn;
                    }
                }
            }
        }
    }

    let n = n_inner as f64;
    let keep = 1.0 - epsilon * epsilon;
    Ok(sums
        .iter()
        .map(|s| {
            (0..k)
                .map(|a| {
                    let sig = s.signal[a] / n;
                    let desired = sig * sig;
                    keep * desired / (s.total[a] / n - keep * desired + s.norm2[a] / n)
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexnet::{make_pilot_plan, HexNetwork};
    use crate::mc_oracle::fixed_position_sinr;
    use crate::rng::{stream, Purpose};

    fn scenario(beta: u32, k: usize, m: usize) -> McScenario {
        let net = HexNetwork::new(1, 1.0, 3.7, 1.0).unwrap();
        let plan = make_pilot_plan(beta, &net, k).unwrap();
        McScenario::sample(net, plan, m, 3.0, &mut stream(21, Purpose::Positions, 0)).unwrap()
    }

    #[test]
    fn matches_fixed_position_forms() {
        for beta in [1, 3] {
            let scn = scenario(beta, 3, 24);
            let cases: Vec<ConditionalCase<'_>> = Scheme::ALL
                .iter()
                .map(|&scheme| ConditionalCase { scheme, scn: &scn })
                .collect();
            let got = conditional_expectations(&cases, 0.0, 20_000, &mut stream(1, Purpose::Channels, 0)).unwrap();
            for (c, sinr) in cases.iter().zip(&got) {
                let exact = fixed_position_sinr(c.scheme, &scn).unwrap();
                for (a, b) in sinr.iter().zip(&exact) {
                    assert!((a - b).abs() < 0.02 * b, "{} beta {beta}: {a} vs {b}", c.scheme);
                }
            }
        }
    }

    #[test]
    fn impairments_lower_the_sinr() {
        let scn = scenario(1, 2, 16);
        let cases = [ConditionalCase {
            scheme: Scheme::Zf,
            scn: &scn,
        }];
        let a = conditional_expectations(&cases, 0.0, 2000, &mut stream(2, Purpose::Channels, 0)).unwrap();
        let b = conditional_expectations(&cases, 0.1, 2000, &mut stream(2, Purpose::Channels, 0)).unwrap();
        assert!(a[0].iter().zip(&b[0]).all(|(x, y)| y < x));
    }

    #[test]
    fn pzf_needs_more_antennas_than_pilots() {
        let scn = scenario(3, 4, 12);
        let cases = [ConditionalCase {
            scheme: Scheme::Pzf,
            scn: &scn,
        }];
        let r = conditional_expectations(&cases, 0.0, 10, &mut stream(2, Purpose::Channels, 0));
        assert!(matches!(r, Err(Error::Infeasible { .. })));
    }
}
