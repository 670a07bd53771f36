//! Packed vector forms of symmetric matrices.
//!
//! `svec` is the unscaled column-major stacking of the lower triangle, so
//! `[[1,2],[2,3]]` becomes `(1,2,3)`. It does not preserve inner products;
//! code that needs the trace metric uses [`orthonormal_coords`] instead, which
//! weights off-diagonal entries by `√2`.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};

use super::SymMatrix;
use crate::error::{Error, Result};

/// `m(m+1)/2`.
pub fn packed_dim(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Inverse of [`packed_dim`].
pub fn packed_order(len: usize) -> Result<usize> {
    let m = ((((8 * len + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    if packed_dim(m) == len {
        Ok(m)
    } else {
        Err(Error::BadLength(len))
    }
}

/// Iterates `(i, j)` with `i >= j` in svec order.
fn lower_positions(m: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..m).flat_map(move |j| (j..m).map(move |i| (i, j)))
}

/// Position of entry `(i, j)` (either triangle) in the svec of an order-`m`
/// matrix.
pub fn svec_index(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    j * m - j * j.saturating_sub(1) / 2 + (i - j)
}

/// The vector `d` with `d · svec(C) = ⟨A, C⟩` for every symmetric `C`:
/// svec of `A` with off-diagonal entries doubled.
pub fn svec_pairing(a: &SymMatrix) -> Vec<f64> {
    lower_positions(a.dim())
        .map(|(i, j)| if i == j { a[(i, j)] } else { 2.0 * a[(i, j)] })
        .collect()
}

pub fn svec(a: &SymMatrix) -> Vec<f64> {
    lower_positions(a.dim()).map(|(i, j)| a[(i, j)]).collect()
}

pub fn smat(v: &[f64]) -> Result<SymMatrix> {
    let m = packed_order(v.len())?;
    let mut out = DMatrix::zeros(m, m);
    for (k, (i, j)) in lower_positions(m).enumerate() {
        out[(i, j)] = v[k];
        out[(j, i)] = v[k];
    }
    Ok(SymMatrix::from_lower(&out))
}

/// Coordinate matrices of the svec parameterization: `E_ii` on the diagonal
/// and `E_ij + E_ji` off it, so that `A = Σ_a svec(A)_a B_a`.
pub fn svec_basis(m: usize) -> Vec<SymMatrix> {
    lower_positions(m)
        .map(|(i, j)| SymMatrix::from_fn(m, |r, c| if (r, c) == (i, j) { 1.0 } else { 0.0 }))
        .collect()
}

/// Trace-orthonormal basis of S^m, in svec order.
pub fn orthonormal_basis(m: usize) -> Vec<SymMatrix> {
    lower_positions(m)
        .map(|(i, j)| {
            let v = if i == j { 1.0 } else { 1.0 / SQRT_2 };
            SymMatrix::from_fn(m, |r, c| if (r, c) == (i, j) { v } else { 0.0 })
        })
        .collect()
}

/// Coordinates in [`orthonormal_basis`]; Euclidean dot products of these
/// vectors equal trace inner products.
pub fn orthonormal_coords(a: &SymMatrix) -> DVector<f64> {
    DVector::from_iterator(
        packed_dim(a.dim()),
        lower_positions(a.dim()).map(|(i, j)| {
            if i == j {
                a[(i, j)]
            } else {
                SQRT_2 * a[(i, j)]
            }
        }),
    )
}

pub fn from_orthonormal_coords(v: &[f64]) -> Result<SymMatrix> {
    let m = packed_order(v.len())?;
    let pos: Vec<_> = lower_positions(m).collect();
    let mut out = DMatrix::zeros(m, m);
    for (k, &(i, j)) in pos.iter().enumerate() {
        out[(i, j)] = if i == j { v[k] } else { v[k] / SQRT_2 };
    }
    Ok(SymMatrix::from_lower(&out))
}

/// Hessian of `V ↦ ⟨A, V²⟩` in svec coordinates:
/// entry `(a, b)` is `2⟨A, B_a ∘ B_b⟩ = 2 tr(A B_a B_b)`.
pub fn jordan_square_hessian(a: &SymMatrix) -> DMatrix<f64> {
    let m = a.dim();
    let pos: Vec<_> = lower_positions(m).collect();
    let n = pos.len();
    // Nonzero (row, col) entries of each B_a.
    let entries = |(i, j): (usize, usize)| -> ([(usize, usize); 2], usize) {
        if i == j {
            ([(i, i), (i, i)], 1)
        } else {
            ([(i, j), (j, i)], 2)
        }
    };
    let mut h = DMatrix::zeros(n, n);
    for (ka, &pa) in pos.iter().enumerate() {
        let (ea, na) = entries(pa);
        for (kb, &pb) in pos.iter().enumerate().skip(ka) {
            let (eb, nb) = entries(pb);
            // tr(A e_p e_qᵀ e_r e_sᵀ) = [q == r] A_sp
            let mut t = 0.0;
            for &(p, q) in &ea[..na] {
                for &(r, s) in &eb[..nb] {
                    if q == r {
                        t += a[(s, p)];
                    }
                }
            }
            h[(ka, kb)] = 2.0 * t;
            h[(kb, ka)] = 2.0 * t;
        }
    }
    h
}

/// Fixture text format: the order `m` on the first line, then `m(m+1)/2`
/// whitespace-separated reals in svec order.
pub fn read_matrix_text(text: &str) -> Result<SymMatrix> {
    let mut tokens = text.split_whitespace();
    let m: usize = tokens
        .next()
        .ok_or_else(|| Error::Invalid("empty matrix text".into()))?
        .parse()
        .map_err(|e| Error::Invalid(format!("bad matrix order: {e}")))?;
    let vals = tokens
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Error::Invalid(format!("bad entry '{t}': {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if vals.len() != packed_dim(m) {
        return Err(Error::BadLength(vals.len()));
    }
    smat(&vals)
}

pub fn write_matrix_text(a: &SymMatrix) -> String {
    let body: Vec<String> = svec(a).iter().map(|v| format!("{v:?}")).collect();
    format!("{}\n{}\n", a.dim(), body.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symalg::jordan_product;
    use proptest::prelude::*;

    #[test]
    fn svec_examples() {
        let a = SymMatrix::from_fn(2, |i, j| [[1.0, 2.0], [2.0, 3.0]][i][j]);
        assert_eq!(svec(&a), vec![1.0, 2.0, 3.0]);
        assert_eq!(
            svec(&SymMatrix::identity(3)),
            vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0]
        );
        assert_eq!(smat(&[1.0, 2.0, 3.0]).unwrap(), a);
        assert_eq!(smat(&[0.0; 6]).unwrap(), SymMatrix::zeros(3));
        assert!(matches!(smat(&[1.0, 2.0]), Err(Error::BadLength(2))));
        assert_eq!(smat(&[]).unwrap().dim(), 0);
    }

    #[test]
    fn svec_index_follows_column_major_lower_order() {
        for m in 0..6 {
            for (k, (i, j)) in lower_positions(m).enumerate() {
                assert_eq!(svec_index(m, i, j), k);
                assert_eq!(svec_index(m, j, i), k);
            }
        }
    }

    #[test]
    fn svec_pairing_needs_off_diagonal_weight() {
        let a = smat(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = smat(&[0.5, -1.0, 2.0, 1.5, 0.25, -2.0]).unwrap();
        let (va, vb) = (svec(&a), svec(&b));
        let weighted: f64 = [0usize, 1, 2, 3, 4, 5]
            .iter()
            .zip([1.0, 2.0, 2.0, 1.0, 2.0, 1.0])
            .map(|(&k, w)| w * va[k] * vb[k])
            .sum();
        assert!((weighted - a.inner(&b)).abs() < 1e-12);
        let dual: f64 = svec_pairing(&a).iter().zip(&vb).map(|(x, y)| x * y).sum();
        assert!((dual - a.inner(&b)).abs() < 1e-12);
        let oc = orthonormal_coords(&a).dot(&orthonormal_coords(&b));
        assert!((oc - a.inner(&b)).abs() < 1e-12);
    }

    #[test]
    fn bases_span_correctly() {
        let a = smat(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let mut acc = SymMatrix::zeros(3);
        for (c, b) in svec(&a).iter().zip(svec_basis(3)) {
            acc += &(&b * *c);
        }
        assert_eq!(acc, a);
        let ob = orthonormal_basis(3);
        for (x, bx) in ob.iter().enumerate() {
            for (y, by) in ob.iter().enumerate() {
                let expect = if x == y { 1.0 } else { 0.0 };
                assert!((bx.inner(by) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn jordan_square_hessian_matches_dense() {
        let a = smat(&[1.0, -2.0, 0.5, 3.0, 1.5, -1.0]).unwrap();
        let h = jordan_square_hessian(&a);
        let basis = svec_basis(3);
        for (x, bx) in basis.iter().enumerate() {
            for (y, by) in basis.iter().enumerate() {
                let dense = 2.0 * a.inner(&jordan_product(bx, by));
                assert!((h[(x, y)] - dense).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn matrix_text_round_trip() {
        let a = smat(&[1.0, 2.0, 3.0]).unwrap();
        let text = write_matrix_text(&a);
        assert_eq!(text, "2\n1.0 2.0 3.0\n");
        assert_eq!(read_matrix_text(&text).unwrap(), a);
        assert!(read_matrix_text("2\n1 2").is_err());
        assert!(read_matrix_text("x").is_err());
    }

    proptest! {
        #[test]
        fn svec_smat_are_inverse(v in proptest::collection::vec(-10.0..10.0f64, 10)) {
            let a = smat(&v).unwrap();
            prop_assert_eq!(svec(&a), v.clone());
            prop_assert_eq!(smat(&svec(&a)).unwrap(), a.clone());
            let back = from_orthonormal_coords(orthonormal_coords(&a).as_slice()).unwrap();
            prop_assert!((&back - &a).max_abs() < 1e-14);
        }
    }
}
