//! Uniform symmetric spatial grid and the c-product quadrature.
//!
//! The grid spans `[-extent, +extent]` inclusive with `points` nodes, so the
//! spacing is `2·extent/(points−1)` and every node has an exact mirror image
//! (`x[i] = −x[points−1−i]`). The c-product is the symmetric bilinear form
//! `∫ f·g dx` — no complex conjugation — evaluated by the trapezoid rule; it
//! is the natural inner product for complex-rotated wavefunctions.

use crate::{C64, Error, Result};
use serde::{Deserialize, Serialize};

/// Symmetric 1D grid `x ∈ [−extent, extent]` with uniformly spaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    extent: f64,
    points: usize,
}

impl SpatialGrid {
    /// A grid with half-width `extent` (a.u.) and `points` nodes including
    /// both endpoints.
    pub fn new(extent: f64, points: usize) -> Result<Self> {
        let mut violations = Vec::new();
        if !(extent > 0.0) || !extent.is_finite() {
            violations.push(format!("grid extent must be positive and finite, got {extent}"));
        }
        if points < 3 {
            violations.push(format!("grid needs at least 3 points, got {points}"));
        }
        if violations.is_empty() {
            Ok(SpatialGrid { extent, points })
        } else {
            Err(Error::InvalidConfig(violations))
        }
    }

    /// Half-width L of the domain (a.u.).
    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Number of grid nodes.
    pub fn points(&self) -> usize {
        self.points
    }

    /// Node spacing `h = 2L/(N−1)`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.points as f64 - 1.0)
    }

    /// Coordinate of node `i`, built symmetrically so `x[i] == −x[N−1−i]`
    /// holds exactly in floating point.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.points);
        let n = self.points - 1;
        // Midpoint-symmetric form: identical rounding for i and N−1−i.
        (self.extent * (2.0 * i as f64 - n as f64)) / n as f64
    }

    /// All node coordinates.
    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.node(i)).collect()
    }

    /// Index of the mirror node of `i` under x → −x.
    pub fn mirror(&self, i: usize) -> usize {
        self.points - 1 - i
    }
}

/// Symmetric bilinear form `∫ f(x)·g(x) dx` (no conjugation), trapezoid rule.
pub fn c_product(f: &[C64], g: &[C64], grid: &SpatialGrid) -> Result<C64> {
    c_product_impl(f, g, None, grid)
}

/// `∫ f(x)·w(x)·g(x) dx` for a real weight sampled on the same grid, used for
/// dipole matrix elements with weight x.
pub fn c_product_weighted(f: &[C64], g: &[C64], weight: &[f64], grid: &SpatialGrid) -> Result<C64> {
    if weight.len() != grid.points() {
        return Err(Error::InvalidConfig(vec![format!(
            "weight length {} does not match grid points {}",
            weight.len(),
            grid.points()
        )]));
    }
    c_product_impl(f, g, Some(weight), grid)
}

fn c_product_impl(f: &[C64], g: &[C64], weight: Option<&[f64]>, grid: &SpatialGrid) -> Result<C64> {
    let n = grid.points();
    if f.len() != n || g.len() != n {
        return Err(Error::InvalidConfig(vec![format!(
            "c_product length mismatch: f has {}, g has {}, grid has {}",
            f.len(),
            g.len(),
            n
        )]));
    }
    let h = grid.spacing();
    let mut acc = C64::new(0.0, 0.0);
    match weight {
        None => {
            for i in 0..n {
                let term = f[i] * g[i];
                acc += if i == 0 || i == n - 1 { 0.5 * term } else { term };
            }
        }
        Some(w) => {
            for i in 0..n {
                let term = f[i] * g[i] * w[i];
                acc += if i == 0 || i == n - 1 { 0.5 * term } else { term };
            }
        }
    }
    Ok(acc * h)
}
