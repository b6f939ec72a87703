//! Dense eigensolver fallback for small operators.
//!
//! Below the dimension threshold where the Krylov machinery pays off, the
//! full non-Hermitian spectrum from LAPACK's general complex eigensolver is
//! cheaper and gives the selection logic every eigenpair to choose from.

use crate::{C64, Error, Result};
use ndarray::Array2;
use ndarray_linalg::Eig;

/// All eigenpairs of a dense complex matrix, unsorted, as (value, column)
/// pairs with Euclidean-normalized columns.
pub fn dense_eigs(a: &Array2<C64>) -> Result<Vec<(C64, Vec<C64>)>> {
    let (values, vectors) = a
        .eig()
        .map_err(|e| Error::DenseEig(format!("general complex eigensolve: {e}")))?;
    let n = a.nrows();
    let mut out = Vec::with_capacity(n);
    for (k, &val) in values.iter().enumerate() {
        let col: Vec<C64> = (0..n).map(|i| vectors[(i, k)]).collect();
        out.push((val, col));
    }
    Ok(out)
}
