use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::{build_psi_matrix, pilot_book, McScenario};
use crate::error::{Error, Result};
use crate::rng::complex_normal;

/// Raw channels from every UE to BS `j`: an M x U matrix whose column u is
/// CN(0, d_j(z_u) I_M).
pub fn sample_channels<R: Rng + ?Sized>(scn: &McScenario, j: usize, rng: &mut R) -> DMatrix<Complex64> {
    let (m, n) = (scn.m, scn.n_ues());
    let mut h = DMatrix::zeros(m, n);
    for u in 0..n {
        let sd = scn.gain(j, u).sqrt();
        for x in h.column_mut(u).iter_mut() {
            *x = complex_normal(rng) * sd;
        }
    }
    h
}

/// Received pilot block Y_j = sum_u sqrt(p_u) h_ju v_u^T + N_j with unit
/// noise variance.
pub fn received_pilots<R: Rng + ?Sized>(scn: &McScenario, h: &DMatrix<Complex64>, rng: &mut R) -> DMatrix<Complex64> {
    let b = scn.b();
    let v = pilot_book(b);
    let mut per_pilot = DMatrix::<Complex64>::zeros(scn.m, b);
    for u in 0..scn.n_ues() {
        let mut col = per_pilot.column_mut(scn.pilot_index[u]);
        col.axpy(
            Complex64::new(scn.powers[u].sqrt(), 0.0),
            &h.column(u),
            Complex64::new(1.0, 0.0),
        );
    }
    let mut y = per_pilot * v.transpose();
    for x in y.iter_mut() {
        *x += complex_normal(rng);
    }
    y
}

/// MMSE estimates at one BS. `h_v` holds one column per pilot; the estimate of
/// UE u's effective channel is `lambda_u * h_v[:, pilot(u)]`.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub h_v: DMatrix<Complex64>,
    pub lambdas: Vec<f64>,
}

impl Estimate {
    pub fn user_estimate(&self, scn: &McScenario, u: usize) -> DVector<Complex64> {
        self.h_v.column(scn.pilot_index[u]) * Complex64::new(self.lambdas[u], 0.0)
    }
}

/// H_V = Y (Psi^T)^-1 [v_1^* ... v_B^*], solved through a Cholesky factor of
/// Psi^T (Hermitian positive definite).
pub fn mmse_estimate(scn: &McScenario, j: usize, y: &DMatrix<Complex64>) -> Result<Estimate> {
    let psi_t = build_psi_matrix(scn, j).transpose();
    let chol = psi_t
        .cholesky()
        .ok_or_else(|| Error::Singular("pilot covariance is not positive definite".into()))?;
    let rhs = pilot_book(scn.b()).map(|z| z.conj());
    let x = chol.solve(&rhs);
    Ok(Estimate {
        h_v: y * x,
        lambdas: scn.lambdas(j),
    })
}
