use crate::error::{Error, Result};
use crate::symalg::{project_psd, SymMatrix};

/// Sweep cap for [`ncm_oracle`].
pub const NCM_MAX_SWEEPS: usize = 100_000;

/// Nearest correlation matrix to `h` in the Frobenius norm, by alternating
/// projections onto the PSD cone (with Dykstra's correction) and onto the
/// unit-diagonal affine set.
///
/// Iterates until successive iterates, and the two projections, agree to
/// `tol`. The returned matrix has an exactly unit diagonal.
pub fn ncm_oracle(h: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    let m = h.dim();
    let mut y = unit_diagonal(h);
    let mut correction = SymMatrix::zeros(m);
    for _ in 0..NCM_MAX_SWEEPS {
        let r = &y - &correction;
        let x = project_psd(&r);
        correction = &x - &r;
        let y_next = unit_diagonal(&x);
        let step = (&y_next - &y).frobenius_norm();
        let gap = (&y_next - &x).frobenius_norm();
        y = y_next;
        if step < tol && gap < tol {
            return Ok(y);
        }
    }
    Err(Error::MaxIterations(NCM_MAX_SWEEPS))
}

fn unit_diagonal(a: &SymMatrix) -> SymMatrix {
    SymMatrix::from_fn(a.dim(), |i, j| if i == j { 1.0 } else { a[(i, j)] })
}
