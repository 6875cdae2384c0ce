use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hexnet::PilotPlan;
use crate::se_core::Scheme;

fn gram_inverse(a: &DMatrix<Complex64>, what: &str) -> Result<DMatrix<Complex64>> {
    let gram = a.adjoint() * a;
    let n = gram.nrows();
    gram.cholesky()
        .map(|c| c.solve(&DMatrix::identity(n, n)))
        .ok_or_else(|| Error::Singular(format!("{what} Gram matrix is singular")))
}

/// Combining vectors (columns, one per UE of the cell) at the BS of cell
/// index `j` from the pilot-wise estimates `h_v` (M x B).
pub fn combiner(scheme: Scheme, h_v: &DMatrix<Complex64>, plan: &PilotPlan, j: usize) -> Result<DMatrix<Complex64>> {
    let (m, b) = h_v.shape();
    let k = plan.k;
    let own: Vec<usize> = (0..k).map(|kk| plan.pilot_index(j, kk)).collect();
    let e = h_v.select_columns(own.iter());
    match scheme {
        Scheme::Mr => Ok(e),
        Scheme::Zf => {
            if m <= k {
                return Err(Error::Infeasible {
                    scheme,
                    bound: format!("M > K (M = {m}, K = {k})"),
                });
            }
            Ok(&e * gram_inverse(&e, "ZF")?)
        }
        Scheme::Pzf => {
            if m <= b {
                return Err(Error::Infeasible {
                    scheme,
                    bound: format!("M > B (M = {m}, B = {b})"),
                });
            }
            let full = h_v * gram_inverse(h_v, "P-ZF")?;
            Ok(full.select_columns(own.iter()))
        }
    }
}
