//! Monte-Carlo oracle: samples UE positions and Rayleigh channels, runs the
//! MMSE estimator, forms MR/ZF/P-ZF combiners and evaluates the achievable
//! SINRs from empirical expectations.
//!
//! Units: the noise variance is fixed to 1, so `snr` is rho and UE `u` in
//! cell `l` transmits with power `p_u = rho / d_l(z_u)`.

mod combine;
mod conditional;
mod duality;
mod estimate;
mod expectations;
mod lemma;
mod validate;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hexnet::{sample_ue_position, HexNetwork, PilotPlan, Point};

pub use combine::combiner;
pub use conditional::{conditional_expectations, ConditionalCase};
pub use duality::{dl_sinrs, duality_power_control, ul_sinrs, DualitySolution};
pub use estimate::{mmse_estimate, received_pilots, sample_channels, Estimate};
pub use expectations::{
    empirical_sinr_impaired, empirical_sinr_ul, fixed_position_sinr, network_expectations, BsExpectations, UeSinrs,
};
pub use lemma::{lemma_se, lemma_se_full, InnerSampler, LemmaCase, LemmaSe, LemmaSpec, MIN_INNER, MIN_OUTER};
pub use validate::{
    closed_form_beta, gap_tolerance, validate_duality, validate_se, DualityCheck, SeCheck, ValidationRow,
    DUALITY_TOLERANCE,
};

/// One network realization: UE positions, pilot indices and powers.
/// UE `u = l * K + k` is UE `k` of the cell at index `l` of the network.
#[derive(Debug, Clone)]
pub struct McScenario {
    pub net: HexNetwork,
    pub plan: PilotPlan,
    pub m: usize,
    pub snr: f64,
    pub ue_positions: Vec<Point>,
    pub pilot_index: Vec<usize>,
    pub powers: Vec<f64>,
}

impl McScenario {
    pub fn new(net: HexNetwork, plan: PilotPlan, m: usize, snr: f64, ue_positions: Vec<Point>) -> Result<Self> {
        let k = plan.k;
        if ue_positions.len() != net.len() * k {
            return Err(Error::InvalidConfig(format!(
                "expected {} UE positions, got {}",
                net.len() * k,
                ue_positions.len()
            )));
        }
        if plan.colors().len() != net.len() {
            return Err(Error::InvalidConfig("pilot plan built for a different network".into()));
        }
        if m == 0 || !(snr > 0.0 && snr.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "need M >= 1 and SNR > 0 (M = {m}, SNR = {snr})"
            )));
        }
        let mut pilot_index = Vec::with_capacity(ue_positions.len());
        let mut powers = Vec::with_capacity(ue_positions.len());
        for (u, &z) in ue_positions.iter().enumerate() {
            let l = u / k;
            pilot_index.push(plan.pilot_index(l, u % k));
            powers.push(snr / net.gain(net.cells()[l], z)?);
        }
        Ok(McScenario {
            net,
            plan,
            m,
            snr,
            ue_positions,
            pilot_index,
            powers,
        })
    }

    /// Every UE placed uniformly in its cell (outside the exclusion disk).
    pub fn sample<R: Rng + ?Sized>(net: HexNetwork, plan: PilotPlan, m: usize, snr: f64, rng: &mut R) -> Result<Self> {
        let k = plan.k;
        let mut pos = Vec::with_capacity(net.len() * k);
        for &c in net.cells() {
            for _ in 0..k {
                pos.push(sample_ue_position(c, &net, rng));
            }
        }
        Self::new(net, plan, m, snr, pos)
    }

    pub fn k(&self) -> usize {
        self.plan.k
    }

    pub fn b(&self) -> usize {
        self.plan.b
    }

    pub fn n_ues(&self) -> usize {
        self.ue_positions.len()
    }

    pub fn n_cells(&self) -> usize {
        self.net.len()
    }

    pub fn cell_of(&self, u: usize) -> usize {
        u / self.k()
    }

    /// Average channel gain from UE `u` to the BS of cell index `j`.
    pub fn gain(&self, j: usize, u: usize) -> f64 {
        self.net
            .gain(self.net.cells()[j], self.ue_positions[u])
            .expect("UE positions exclude every BS")
    }

    /// Relative strength d_j(z_u) / d_l(z_u) of UE `u` at BS `j`.
    pub fn lambda(&self, j: usize, u: usize) -> f64 {
        if self.cell_of(u) == j {
            return 1.0;
        }
        self.gain(j, u) * self.powers[u] / self.snr
    }

    pub fn lambdas(&self, j: usize) -> Vec<f64> {
        (0..self.n_ues()).map(|u| self.lambda(j, u)).collect()
    }
}

/// Orthogonal pilot book: columns of the B x B DFT matrix, so every entry has
/// unit modulus and v_a^H v_b = B for a = b, 0 otherwise.
pub fn pilot_book(b: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(b, b, |t, col| {
        let phase = -2.0 * std::f64::consts::PI * ((t * col) % b) as f64 / b as f64;
        Complex64::from_polar(1.0, phase)
    })
}

/// Normalized covariance of the received pilot signal at BS `j`:
/// sum_u lambda_ju v_u v_u^H + (1 / rho) I.
pub fn build_psi_matrix(scn: &McScenario, j: usize) -> DMatrix<Complex64> {
    let b = scn.b();
    let v = pilot_book(b);
    let mut c = vec![0.0; b];
    for u in 0..scn.n_ues() {
        c[scn.pilot_index[u]] += scn.lambda(j, u);
    }
    let mut psi = DMatrix::from_diagonal_element(b, b, Complex64::new(1.0 / scn.snr, 0.0));
    for (col, &w) in c.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let vc = v.column(col);
        psi += (vc * vc.adjoint()) * Complex64::new(w, 0.0);
    }
    psi
}

/// Per-pilot sufficient statistics at BS `j`: c_b = sum of lambda over the UEs
/// on pilot b and q_b = v_b^H Psi^-1 v_b = B / (B c_b + 1/rho).
pub(crate) fn pilot_loads(scn: &McScenario, lambdas: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let b = scn.b();
    let mut c = vec![0.0; b];
    for (u, &l) in lambdas.iter().enumerate() {
        c[scn.pilot_index[u]] += l;
    }
    let bf = b as f64;
    let q = c.iter().map(|&cb| bf / (bf * cb + 1.0 / scn.snr)).collect();
    (c, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexnet::make_pilot_plan;
    use rand::SeedableRng;

    #[test]
    fn pilot_book_is_orthogonal() {
        let v = pilot_book(6);
        let g = v.adjoint() * &v;
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j { 6.0 } else { 0.0 };
                assert!((g[(i, j)] - Complex64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
        assert!(v.iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn power_control_inverts_the_serving_gain() {
        let net = HexNetwork::new(1, 1.0, 3.7, 1.0).unwrap();
        let plan = make_pilot_plan(1, &net, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let scn = McScenario::sample(net, plan, 8, 3.0, &mut rng).unwrap();
        for u in 0..scn.n_ues() {
            let l = scn.cell_of(u);
            assert!((scn.powers[u] * scn.gain(l, u) - 3.0).abs() < 1e-12);
        }
        for k in 0..2 {
            let own: Vec<usize> = (0..2).map(|kk| scn.pilot_index[kk]).collect();
            assert!(own.iter().filter(|&&p| p == scn.pilot_index[k]).count() == 1);
        }
    }
}
