//! Diagonal-sparse complex matrices and banded LU factorization.
//!
//! Operators in this crate (finite-difference Hamiltonians and their Floquet
//! extensions) populate only a handful of diagonals, so assembly and
//! matrix-vector products use a map from diagonal offset to the stored
//! diagonal ([`DiagMatrix`]). Shift-invert solves convert that form into
//! LAPACK-style band storage and run an unblocked partial-pivot LU
//! ([`BandedLu`]), keeping the whole pipeline free of external solver state.

use crate::{C64, Error, Result};
use std::collections::BTreeMap;

/// Square complex matrix stored as a set of diagonals.
///
/// `diagonals[d]` holds the entries `A[i, i+d]` for offset `d` (negative d is
/// below the main diagonal), each of length `n − |d|`.
#[derive(Debug, Clone)]
pub struct DiagMatrix {
    n: usize,
    diagonals: BTreeMap<i64, Vec<C64>>,
}

impl DiagMatrix {
    pub fn new(n: usize) -> Self {
        DiagMatrix {
            n,
            diagonals: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Lower bandwidth (largest populated subdiagonal offset).
    pub fn lower_bandwidth(&self) -> usize {
        self.diagonals
            .keys()
            .filter(|&&d| d < 0)
            .map(|&d| (-d) as usize)
            .max()
            .unwrap_or(0)
    }

    /// Upper bandwidth (largest populated superdiagonal offset).
    pub fn upper_bandwidth(&self) -> usize {
        self.diagonals
            .keys()
            .filter(|&&d| d > 0)
            .map(|&d| d as usize)
            .max()
            .unwrap_or(0)
    }

    /// Mutable access to diagonal `d`, allocating it zero-filled on first use.
    pub fn diagonal_mut(&mut self, d: i64) -> &mut [C64] {
        let len = self.n - d.unsigned_abs() as usize;
        self.diagonals
            .entry(d)
            .or_insert_with(|| vec![C64::new(0.0, 0.0); len])
    }

    /// Add `value` to entry `(i, j)`; the offset `j − i` must stay within the
    /// matrix.
    pub fn add(&mut self, i: usize, j: usize, value: C64) {
        debug_assert!(i < self.n && j < self.n);
        let d = j as i64 - i as i64;
        let k = i.min(j);
        self.diagonal_mut(d)[k] += value;
    }

    /// y = A·x.
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        y.fill(C64::new(0.0, 0.0));
        for (&d, diag) in &self.diagonals {
            if d >= 0 {
                let d = d as usize;
                for (i, v) in diag.iter().enumerate() {
                    y[i] += v * x[i + d];
                }
            } else {
                let d = (-d) as usize;
                for (k, v) in diag.iter().enumerate() {
                    y[k + d] += v * x[k];
                }
            }
        }
    }

    /// y = Aᵀ·x (non-conjugate transpose).
    pub fn matvec_transpose(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        y.fill(C64::new(0.0, 0.0));
        for (&d, diag) in &self.diagonals {
            if d >= 0 {
                let d = d as usize;
                for (i, v) in diag.iter().enumerate() {
                    y[i + d] += v * x[i];
                }
            } else {
                let d = (-d) as usize;
                for (k, v) in diag.iter().enumerate() {
                    y[k] += v * x[k + d];
                }
            }
        }
    }

    /// Dense copy, for the small-dimension fallback eigensolver.
    pub fn to_dense(&self) -> ndarray::Array2<C64> {
        let mut a = ndarray::Array2::zeros((self.n, self.n));
        for (&d, diag) in &self.diagonals {
            for (k, &v) in diag.iter().enumerate() {
                let (i, j) = if d >= 0 {
                    (k, k + d as usize)
                } else {
                    (k + (-d) as usize, k)
                };
                a[(i, j)] += v;
            }
        }
        a
    }

    /// Bytes the band factorization of `A − σI` will allocate.
    pub fn factorization_bytes(&self) -> usize {
        let kl = self.lower_bandwidth();
        let ku = self.upper_bandwidth();
        let ldab = 2 * kl + ku + 1;
        ldab * self.n * std::mem::size_of::<C64>()
    }
}

/// Partial-pivot LU factorization of `A − σI` in band storage.
///
/// Storage follows the LAPACK `zgbtrf` convention: column `j` of the band
/// lives at `ab[j·ldab ..]` with entry `(i, j)` at row offset
/// `kl + ku + i − j`, where `ldab = 2·kl + ku + 1` reserves `kl` extra
/// superdiagonals for pivoting fill-in.
#[derive(Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<C64>,
    ipiv: Vec<usize>,
    shift: C64,
}

impl BandedLu {
    /// Factor `A − shift·I`. Fails if a pivot column is exactly zero (shift
    /// sits on an eigenvalue to machine precision).
    pub fn factor(a: &DiagMatrix, shift: C64) -> Result<Self> {
        let n = a.dim();
        let kl = a.lower_bandwidth();
        let ku = a.upper_bandwidth();
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![C64::new(0.0, 0.0); ldab * n];

        // Scatter the diagonals into band storage and apply the shift.
        for (&d, diag) in &a.diagonals {
            for (k, &v) in diag.iter().enumerate() {
                let (i, j) = if d >= 0 {
                    (k, k + d as usize)
                } else {
                    (k + (-d) as usize, k)
                };
                ab[j * ldab + (kl + ku + i - j)] += v;
            }
        }
        if shift != C64::new(0.0, 0.0) {
            for j in 0..n {
                ab[j * ldab + kl + ku] -= shift;
            }
        }

        let ku_eff = ku + kl; // widest superdiagonal after row pivoting
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // Pivot search down column j.
            let base = j * ldab + kl + ku;
            let mut jp = 0usize;
            let mut best = ab[base].norm_sqr();
            for p in 1..=km {
                let m = ab[base + p].norm_sqr();
                if m > best {
                    best = m;
                    jp = p;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 {
                return Err(Error::LinearSolve {
                    shift,
                    reason: format!("exact zero pivot column at index {j}"),
                });
            }
            if jp != 0 {
                // Swap rows j and j+jp across the active columns.
                let cmax = (j + ku_eff).min(n - 1);
                for c in j..=cmax {
                    let r0 = c * ldab + kl + ku + j - c;
                    ab.swap(r0, r0 + jp);
                }
            }
            // Column of L below the pivot.
            let piv = ab[base];
            for p in 1..=km {
                ab[base + p] /= piv;
            }
            // Rank-1 update of the trailing band.
            if km > 0 {
                let cmax = (j + ku_eff).min(n - 1);
                let (head, tail) = ab.split_at_mut((j + 1) * ldab);
                let lcol = &head[base + 1..base + 1 + km];
                for c in j + 1..=cmax {
                    let off = (c - j - 1) * ldab + kl + ku + j - c;
                    let u = tail[off];
                    if u != C64::new(0.0, 0.0) {
                        let dst = &mut tail[off + 1..off + 1 + km];
                        for (d, l) in dst.iter_mut().zip(lcol) {
                            *d -= l * u;
                        }
                    }
                }
            }
        }

        Ok(BandedLu {
            n,
            kl,
            ku,
            ldab,
            ab,
            ipiv,
            shift,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn shift(&self) -> C64 {
        self.shift
    }

    /// Solve `(A − shift·I)·x = b` in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        debug_assert_eq!(b.len(), self.n);
        let (kl, ku, ldab) = (self.kl, self.ku, self.ldab);
        let ku_eff = ku + kl;
        // Forward: apply P and L.
        for j in 0..self.n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = kl.min(self.n - 1 - j);
            if km > 0 {
                let bj = b[j];
                if bj != C64::new(0.0, 0.0) {
                    let base = j * ldab + kl + ku;
                    for q in 1..=km {
                        b[j + q] -= self.ab[base + q] * bj;
                    }
                }
            }
        }
        // Backward: solve U·x = y.
        for j in (0..self.n).rev() {
            let cmax = (j + ku_eff).min(self.n - 1);
            let mut acc = b[j];
            for c in j + 1..=cmax {
                acc -= self.ab[c * ldab + kl + ku + j - c] * b[c];
            }
            b[j] = acc / self.ab[j * ldab + kl + ku];
        }
    }
}
