//! UL/DL duality: DL powers that reproduce the UL SINRs with the normalized
//! combiners reused as precoders.
//!
//! UE index u = l K + k throughout. With w = g / ||g||, the interference UE
//! (j, k) receives from the precoder of UE (l, m) is
//! `E{|h_{l,jk}^H w_lm|^2} = cross_l[m][jk] / norm2_lm`.

use nalgebra::{DMatrix, DVector};

use super::{BsExpectations, McScenario};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DualitySolution {
    /// DL powers, one per UE.
    pub q: DVector<f64>,
    /// Diagonal of D: SINR target times ||g||^2 / |E{g^H h}|^2.
    pub d: DVector<f64>,
    /// DL coupling matrix; its transpose is the UL one.
    pub psi: DMatrix<f64>,
    /// 2-norm condition number of I - D Psi.
    pub condition: f64,
}

fn check_expectations(scn: &McScenario, exps: &[BsExpectations]) -> Result<()> {
    if exps.len() != scn.n_cells() || exps.iter().enumerate().any(|(j, e)| e.j != j) {
        return Err(Error::InvalidConfig(
            "duality needs expectations at every BS, in cell order".into(),
        ));
    }
    Ok(())
}

/// Coherent gain |E{g^H h}|^2 / E{||g||^2} of every UE.
fn gains(scn: &McScenario, exps: &[BsExpectations]) -> Vec<f64> {
    let k = scn.k();
    (0..scn.n_ues())
        .map(|u| exps[u / k].signal[u % k].norm_sqr() / exps[u / k].norm2[u % k])
        .collect()
}

/// DL coupling matrix: Psi[u, v] is the interference UE u receives from the
/// precoder of UE v, with the coherent part removed on the diagonal.
fn coupling(scn: &McScenario, exps: &[BsExpectations]) -> DMatrix<f64> {
    let k = scn.k();
    let n = scn.n_ues();
    let g = gains(scn, exps);
    DMatrix::from_fn(n, n, |u, v| {
        let e = &exps[v / k];
        let x = e.cross[(v % k, u)] / e.norm2[v % k];
        if u == v {
            x - g[u]
        } else {
            x
        }
    })
}

/// UL SINR of every UE with the scenario's powers (ideal hardware).
pub fn ul_sinrs(scn: &McScenario, exps: &[BsExpectations]) -> Result<Vec<f64>> {
    check_expectations(scn, exps)?;
    let k = scn.k();
    Ok((0..scn.n_ues()).map(|u| exps[u / k].ul_sinr(scn, u % k, 0.0)).collect())
}

/// DL SINR of every UE when UE v's precoder is g_v / ||g_v|| with power q[v].
pub fn dl_sinrs(scn: &McScenario, exps: &[BsExpectations], q: &[f64]) -> Result<Vec<f64>> {
    check_expectations(scn, exps)?;
    if q.len() != scn.n_ues() {
        return Err(Error::InvalidConfig(format!(
            "expected {} DL powers, got {}",
            scn.n_ues(),
            q.len()
        )));
    }
    let psi = coupling(scn, exps);
    let g = gains(scn, exps);
    Ok((0..scn.n_ues())
        .map(|u| {
            let interf: f64 = (0..scn.n_ues()).map(|v| psi[(u, v)] * q[v]).sum();
            q[u] * g[u] / (interf + 1.0)
        })
        .collect())
}

/// Solves q = (I - D Psi)^-1 D 1 for the DL powers that meet `targets`.
pub fn duality_power_control(scn: &McScenario, targets: &[f64], exps: &[BsExpectations]) -> Result<DualitySolution> {
    check_expectations(scn, exps)?;
    let n = scn.n_ues();
    if targets.len() != n {
        return Err(Error::InvalidConfig(format!(
            "expected {n} SINR targets, got {}",
            targets.len()
        )));
    }
    let psi = coupling(scn, exps);
    let g = gains(scn, exps);
    let d = DVector::from_iterator(n, targets.iter().zip(&g).map(|(t, g)| t / g));
    let a = DMatrix::identity(n, n) - DMatrix::from_diagonal(&d) * &psi;
    let sv = a.clone().singular_values();
    let condition = sv.max() / sv.min();
    let q = a
        .lu()
        .solve(&d)
        .ok_or_else(|| Error::DualityInfeasible("I - D Psi is singular".into()))?;
    if let Some((i, &v)) = q.iter().enumerate().find(|(_, &v)| !(v > 0.0 && v.is_finite())) {
        return Err(Error::DualityInfeasible(format!(
            "DL power of UE {i} is {v} (condition number {condition:.3e})"
        )));
    }
    Ok(DualitySolution { q, d, psi, condition })
}
