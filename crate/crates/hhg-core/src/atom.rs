//! The 1D soft-core model atom, complex scaling, and field-free bound states.
//!
//! The atom is `V(x) = −depth/√(x² + width)` with a kinetic term discretized
//! by fourth-order central differences. Under uniform complex scaling
//! `x → x·e^{iθ}` the potential is evaluated at the rotated coordinate and
//! the kinetic term picks up `e^{−2iθ}`; bound states stay put while
//! continuum branches rotate into the lower half plane, which is what lets
//! the Floquet solver see ionizing resonances as square-integrable states.

use crate::grid::{c_product, SpatialGrid};
use crate::linalg::{shift_invert_eigs, ArnoldiOptions, DiagMatrix};
use crate::{C64, Error, Result};
use serde::{Deserialize, Serialize};

/// Soft-core depth giving a ground-state energy of −0.4458 a.u. (the xenon
/// ionization potential, 12.13 eV) at width 2.0 on a converged grid.
pub const XENON_SOFTCORE_DEPTH: f64 = 0.9050138379540467;

/// Ground-state energy target used for the xenon-like default atom (a.u.).
pub const XENON_GROUND_ENERGY: f64 = -0.4458;

/// Soft-core model atom `V(x) = −depth/√(x² + width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomModel {
    /// Potential depth (a.u. of energy); positive for a binding well.
    pub softcore_depth: f64,
    /// Softening parameter (a.u. of length squared); keeps V finite at x = 0.
    pub softcore_width: f64,
    /// Optional calibration target for the ground-state energy (a.u.).
    pub target_ground_energy: Option<f64>,
}

impl AtomModel {
    pub fn new(softcore_depth: f64, softcore_width: f64) -> Result<Self> {
        let mut violations = Vec::new();
        if !(softcore_width > 0.0) || !softcore_width.is_finite() {
            violations.push(format!(
                "softcore_width must be positive, got {softcore_width}"
            ));
        }
        if !(softcore_depth > 0.0) || !softcore_depth.is_finite() {
            violations.push(format!(
                "softcore_depth must be positive, got {softcore_depth}"
            ));
        }
        if violations.is_empty() {
            Ok(AtomModel {
                softcore_depth,
                softcore_width,
                target_ground_energy: None,
            })
        } else {
            Err(Error::InvalidConfig(violations))
        }
    }

    /// Same model plus a calibration target for the ground energy.
    pub fn with_target(mut self, target: f64) -> Self {
        self.target_ground_energy = Some(target);
        self
    }

    /// The xenon-like default: width 2.0, depth calibrated so the ground
    /// state sits at the xenon ionization potential.
    pub fn xenon() -> Self {
        AtomModel {
            softcore_depth: XENON_SOFTCORE_DEPTH,
            softcore_width: 2.0,
            target_ground_energy: Some(XENON_GROUND_ENERGY),
        }
    }

    /// Potential minimum `V(0) = −depth/√width`; lower bound of the spectrum.
    pub fn potential_floor(&self) -> f64 {
        -self.softcore_depth / self.softcore_width.sqrt()
    }
}

/// Uniform complex-rotation angle θ for `x → x·e^{iθ}`.
///
/// θ = 0 (no rotation) is accepted so the same code path can build Hermitian
/// operators for calibration and time propagation; rotated configurations
/// must stay below π/4 where the kinetic rotation stays sectorial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexScalingConfig {
    theta: f64,
}

impl ComplexScalingConfig {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..std::f64::consts::FRAC_PI_4).contains(&theta) || !theta.is_finite() {
            return Err(Error::InvalidConfig(vec![format!(
                "scaling angle theta must lie in [0, π/4), got {theta}"
            )]));
        }
        Ok(ComplexScalingConfig { theta })
    }

    /// The identity scaling θ = 0.
    pub fn unscaled() -> Self {
        ComplexScalingConfig { theta: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// The rotation factor e^{iθ}.
    pub fn phase(&self) -> C64 {
        C64::new(0.0, self.theta).exp()
    }
}

/// Parity of a field-free eigenstate of the even potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

/// One field-free bound (or resonance) eigenstate on the scaled grid.
#[derive(Debug, Clone)]
pub struct FieldFreeState {
    /// Complex energy; real for bound states at any θ once converged.
    pub energy: C64,
    /// c-normalized wavefunction sampled on the grid.
    pub wavefunction: Vec<C64>,
    pub parity: Parity,
}

/// `V(x·e^{iθ})` sampled on the grid; real when θ = 0.
pub fn build_potential(
    model: &AtomModel,
    grid: &SpatialGrid,
    scaling: &ComplexScalingConfig,
) -> Vec<C64> {
    let phase = scaling.phase();
    let width = C64::new(model.softcore_width, 0.0);
    grid.values()
        .iter()
        .map(|&x| {
            if scaling.theta() == 0.0 {
                C64::new(-model.softcore_depth / (x * x + model.softcore_width).sqrt(), 0.0)
            } else {
                let xs = phase * x;
                -model.softcore_depth / (xs * xs + width).sqrt()
            }
        })
        .collect()
}

/// Scaled atomic Hamiltonian `e^{−2iθ}·T + V(x·e^{iθ})` as a pentadiagonal
/// operator (fourth-order central differences, Dirichlet boundaries).
pub fn atom_hamiltonian(
    model: &AtomModel,
    grid: &SpatialGrid,
    scaling: &ComplexScalingConfig,
) -> DiagMatrix {
    let n = grid.points();
    let h = grid.spacing();
    let kin = C64::new(0.0, -2.0 * scaling.theta()).exp() * (-0.5 / (h * h));
    let mut a = DiagMatrix::new(n);
    let v = build_potential(model, grid, scaling);
    for (i, val) in a.diagonal_mut(0).iter_mut().enumerate() {
        *val = kin * (-5.0 / 2.0) + v[i];
    }
    for d in [-1i64, 1] {
        for val in a.diagonal_mut(d).iter_mut() {
            *val = kin * (4.0 / 3.0);
        }
    }
    for d in [-2i64, 2] {
        for val in a.diagonal_mut(d).iter_mut() {
            *val = kin * (-1.0 / 12.0);
        }
    }
    a
}

/// Relative deviation of `ψ` from the given parity under x → −x.
pub fn parity_residual(psi: &[C64], grid: &SpatialGrid, parity: Parity) -> f64 {
    let sign = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..grid.points() {
        let mirrored = psi[grid.mirror(i)];
        num += (psi[i] - sign * mirrored).norm_sqr();
        den += psi[i].norm_sqr();
    }
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// Lowest `count` eigenstates of the scaled atomic Hamiltonian, ordered by
/// real part of the energy (ties broken by ascending |imaginary part|),
/// c-normalized with a deterministic sign.
pub fn solve_field_free(
    model: &AtomModel,
    grid: &SpatialGrid,
    scaling: &ComplexScalingConfig,
    count: usize,
) -> Result<Vec<FieldFreeState>> {
    if count == 0 || count > grid.points() {
        return Err(Error::InvalidConfig(vec![format!(
            "requested {count} field-free states on a {}-point grid",
            grid.points()
        )]));
    }
    let a = atom_hamiltonian(model, grid, scaling);
    // Shift below the potential floor: every eigenvalue lies above it, so the
    // nearest-to-shift pairs are exactly the lowest states.
    let shift = C64::new(model.potential_floor() - 0.1, 0.0);
    // Offset Gaussian start: overlaps both parity sectors.
    let start: Vec<C64> = grid
        .values()
        .iter()
        .map(|&x| C64::new((-(x - 0.7) * (x - 0.7) / 2.0).exp(), 0.0))
        .collect();
    let want = count + 4;
    let opts = ArnoldiOptions {
        num_pairs: want.min(grid.points() - 2),
        // Deep-continuum stragglers among the extra pairs may never separate;
        // only the `count` states actually returned must converge.
        required_pairs: Some(count),
        subspace: (2 * want + 24).clamp(40, grid.points()),
        residual_tol: 1e-10,
        ..Default::default()
    };
    let mut pairs = shift_invert_eigs(&a, shift, &start, &opts)?;
    pairs.sort_by(|p, q| {
        (p.value.re, p.value.im.abs())
            .partial_cmp(&(q.value.re, q.value.im.abs()))
            .unwrap()
    });
    pairs.truncate(count);

    let mut out = Vec::with_capacity(count);
    for p in pairs {
        let psi = c_normalize(p.vector, grid)?;
        let even = parity_residual(&psi, grid, Parity::Even);
        let odd = parity_residual(&psi, grid, Parity::Odd);
        let parity = if even <= odd { Parity::Even } else { Parity::Odd };
        out.push(FieldFreeState {
            energy: p.value,
            wavefunction: psi,
            parity,
        });
    }
    Ok(out)
}

/// Divide by the principal square root of the c-norm, then fix the remaining
/// ± gauge so the largest-magnitude component has positive real part.
fn c_normalize(mut psi: Vec<C64>, grid: &SpatialGrid) -> Result<Vec<C64>> {
    let cn = c_product(&psi, &psi, grid)?;
    let l2h: f64 = psi.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.spacing();
    if cn.norm() < 1e-12 * l2h {
        return Err(Error::SelfOrthogonal { cnorm_abs: cn.norm() });
    }
    let root = cn.sqrt();
    for v in &mut psi {
        *v /= root;
    }
    let peak = psi
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lead = psi[peak];
    let flip = lead.re < 0.0 || (lead.re == 0.0 && lead.im < 0.0);
    if flip {
        for v in &mut psi {
            *v = -*v;
        }
    }
    Ok(psi)
}

/// Depth giving ground energy `target` at the given width, by bisection of
/// the monotone map depth → E₀(depth) on the supplied (unscaled) grid.
pub fn calibrate_depth(
    softcore_width: f64,
    target: f64,
    grid: &SpatialGrid,
) -> Result<f64> {
    let scaling = ComplexScalingConfig::unscaled();
    let ground = |depth: f64| -> Result<f64> {
        let model = AtomModel::new(depth, softcore_width)?;
        let states = solve_field_free(&model, grid, &scaling, 1)?;
        Ok(states[0].energy.re)
    };
    let (mut lo, mut hi) = (0.2, 3.0);
    let e_lo = ground(lo)?;
    let e_hi = ground(hi)?;
    if !(e_hi <= target && target <= e_lo) {
        return Err(Error::InvalidConfig(vec![format!(
            "calibration target {target} outside reachable range [{e_hi}, {e_lo}] \
             for depths in [{lo}, {hi}]"
        )]));
    }
    // E₀ is strictly decreasing in depth; 80 halvings put the bracket at the
    // last representable digit.
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if ground(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
