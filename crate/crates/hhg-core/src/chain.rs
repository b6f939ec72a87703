//! Coherent composition of several cavities in a row, total-intensity
//! parameter sweeps, and harmonic-blocking filters.
//!
//! Every cavity in a chain sees the same drive and an identical atom freshly
//! prepared in its ground dressed state; the emitted fields add coherently
//! with zero relative propagation phase by default (an explicit per-cavity
//! phase knob makes that idealization adjustable). Since the per-cavity work
//! is closed-form algebra over precomputed spectra, chains and sweeps are
//! embarrassingly parallel and their aggregation is a deterministic ordered
//! reduction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::{cavity_spectrum, polariton_solve, CavityConfig, CavitySpectrum};
use crate::error::{Error, Result};
use crate::floquet::FloquetEigenstate;
use crate::spectrum::{spectrum, HarmonicAmplitude, HarmonicSpectrum};
use crate::C64;

/// The single-atom quantities every cavity of a chain or sweep reuses: the
/// two dressed quasienergies, their coupling dipole, and the cavity-free
/// emission spectra of both states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolaritonInputs {
    pub ground_energy: C64,
    pub excited_energy: C64,
    pub coupling: C64,
    pub ground_spectrum: HarmonicSpectrum,
    pub excited_spectrum: HarmonicSpectrum,
    pub drive_frequency: f64,
}

impl PolaritonInputs {
    /// Extracts the shared inputs from a solved FLg/FLe pair, computing both
    /// emission spectra up to `m_max`.
    pub fn from_states(
        ground: &FloquetEigenstate,
        excited: &FloquetEigenstate,
        m_max: i64,
    ) -> Result<Self> {
        Ok(Self {
            ground_energy: ground.quasienergy,
            excited_energy: excited.quasienergy,
            coupling: crate::cavity::coupling_dipole(ground, excited)?,
            ground_spectrum: spectrum(ground, m_max)?,
            excited_spectrum: spectrum(excited, m_max)?,
            drive_frequency: ground.drive.frequency,
        })
    }

    /// Runs the full single-cavity pipeline: polariton solve plus spectral
    /// composition up to `m_max`.
    pub fn single_cavity(&self, cavity: &CavityConfig, m_max: i64) -> Result<CavitySpectrum> {
        let pair = polariton_solve(
            self.ground_energy,
            self.excited_energy,
            cavity,
            self.coupling,
            self.drive_frequency,
        )?;
        cavity_spectrum(
            &pair,
            &self.ground_spectrum,
            &self.excited_spectrum,
            m_max,
        )
    }
}

/// An ordered row of cavities sharing one drive and one atom preparation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityChain {
    cavities: Vec<CavityConfig>,
    /// Relative field phase each cavity's emission picks up before the
    /// coherent sum; all zero unless explicitly configured.
    phases: Vec<f64>,
}

impl CavityChain {
    /// A chain with the idealized zero relative phase between members.
    pub fn new(cavities: Vec<CavityConfig>) -> Result<Self> {
        let phases = vec![0.0; cavities.len()];
        Self::with_phases(cavities, phases)
    }

    /// A chain with explicit per-cavity emission phases (radians).
    pub fn with_phases(cavities: Vec<CavityConfig>, phases: Vec<f64>) -> Result<Self> {
        if cavities.is_empty() {
            return Err(Error::EmptyChain);
        }
        if phases.len() != cavities.len() {
            return Err(Error::InvalidConfig(vec![format!(
                "{} phases supplied for {} cavities",
                phases.len(),
                cavities.len()
            )]));
        }
        if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig(vec![format!(
                "cavity phases must be finite, got {bad}"
            )]));
        }
        Ok(Self { cavities, phases })
    }

    pub fn cavities(&self) -> &[CavityConfig] {
        &self.cavities
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }
}

/// Per-cavity spectra composed independently (in parallel), then summed as
/// complex amplitudes per order in chain order — a deterministic reduction
/// regardless of which member finished first.
pub fn chain_spectrum(
    chain: &CavityChain,
    inputs: &PolaritonInputs,
    m_max: i64,
) -> Result<HarmonicSpectrum> {
    let members: Vec<CavitySpectrum> = chain
        .cavities
        .par_iter()
        .map(|cavity| inputs.single_cavity(cavity, m_max))
        .collect::<Result<_>>()?;

    let mut lines: Vec<HarmonicAmplitude> = Vec::new();
    for (member, &phase) in members.iter().zip(&chain.phases) {
        let rotation = C64::from_polar(1.0, phase);
        lines.extend(member.composed.entries().iter().map(|e| HarmonicAmplitude {
            order: e.order,
            amplitude: rotation * e.amplitude,
        }));
    }
    HarmonicSpectrum::from_amplitudes(lines, inputs.drive_frequency)
}

/// One evaluated point of a total-intensity sweep. `status` is "ok" when the
/// pipeline ran, otherwise the error text; failed points keep their row so
/// the output table always has |ω values| × |ε values| entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Cavity frequency in units of the drive frequency.
    pub omega_over_drive: f64,
    /// Cavity frequency ω_cav (a.u.).
    pub cavity_frequency: f64,
    /// Coupling ε_cav (a.u.).
    pub coupling: f64,
    /// Total composed intensity; `None` when the point failed.
    pub total_intensity: Option<f64>,
    pub status: String,
}

/// Evaluates total emitted intensity over the (ω_cav, ε_cav) grid.
///
/// Points run concurrently but the returned rows follow the input order
/// (ω outer, ε inner). A failing point records its error and the sweep
/// continues; only an empty input grid is an error up front.
pub fn sweep_total_intensity(
    inputs: &PolaritonInputs,
    omega_values: &[f64],
    eps_values: &[f64],
    m_max: i64,
) -> Result<Vec<SweepPoint>> {
    let mut violations = Vec::new();
    if omega_values.is_empty() {
        violations.push("sweep needs at least one cavity frequency".to_string());
    }
    if eps_values.is_empty() {
        violations.push("sweep needs at least one coupling value".to_string());
    }
    if !violations.is_empty() {
        return Err(Error::InvalidConfig(violations));
    }

    let grid: Vec<(f64, f64)> = omega_values
        .iter()
        .flat_map(|&w| eps_values.iter().map(move |&e| (w, e)))
        .collect();

    Ok(grid
        .par_iter()
        .map(|&(frequency, coupling)| {
            let cavity = CavityConfig {
                frequency,
                coupling,
            };
            let outcome = inputs
                .single_cavity(&cavity, m_max)
                .map(|cav| cav.composed.total_intensity());
            let (total_intensity, status) = match outcome {
                Ok(total) => (Some(total), "ok".to_string()),
                Err(e) => (None, e.to_string()),
            };
            SweepPoint {
                omega_over_drive: frequency / inputs.drive_frequency,
                cavity_frequency: frequency,
                coupling,
                total_intensity,
                status,
            }
        })
        .collect())
}

/// Removes a set of orders from a spectrum, e.g. "block the odd harmonics".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFilter {
    blocked_orders: Vec<f64>,
    tolerance: f64,
}

impl SpectralFilter {
    pub fn new(blocked_orders: Vec<f64>, tolerance: f64) -> Result<Self> {
        let mut violations = Vec::new();
        if !(tolerance > 0.0) || !tolerance.is_finite() {
            violations.push(format!("filter tolerance must be > 0, got {tolerance}"));
        }
        if blocked_orders.iter().any(|o| !o.is_finite()) {
            violations.push("blocked orders must be finite".to_string());
        }
        if violations.is_empty() {
            Ok(Self {
                blocked_orders,
                tolerance,
            })
        } else {
            Err(Error::InvalidConfig(violations))
        }
    }

    /// Blocks every odd integer order up to `m_max`.
    pub fn odd_integers_up_to(m_max: i64, tolerance: f64) -> Result<Self> {
        Self::new((1..=m_max).step_by(2).map(|m| m as f64).collect(), tolerance)
    }

    pub fn blocks(&self, order: f64) -> bool {
        self.blocked_orders
            .iter()
            .any(|b| (b - order).abs() <= self.tolerance)
    }
}

/// Drops every line whose order matches a blocked order; all surviving lines
/// pass through untouched.
pub fn apply_filter(spec: &HarmonicSpectrum, filter: &SpectralFilter) -> HarmonicSpectrum {
    let kept: Vec<HarmonicAmplitude> = spec
        .entries()
        .iter()
        .filter(|e| !filter.blocks(e.order))
        .copied()
        .collect();
    HarmonicSpectrum::from_amplitudes(kept, spec.drive_frequency())
        .expect("subset of a valid spectrum stays valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const W0: f64 = 0.057;

    fn synthetic_inputs() -> PolaritonInputs {
        let orders: Vec<f64> = (1..=29).map(f64::from).collect();
        let g_lines = orders
            .iter()
            .map(|&order| HarmonicAmplitude {
                order,
                amplitude: C64::new(2e-3 / order, -1e-3),
            })
            .collect();
        let e_lines = orders
            .iter()
            .map(|&order| HarmonicAmplitude {
                order,
                amplitude: C64::new(-4e-4, 3e-4 * order.sqrt()),
            })
            .collect();
        PolaritonInputs {
            ground_energy: C64::new(-0.4532, -3.1e-4),
            excited_energy: C64::new(-0.1925, -1.37e-2),
            coupling: C64::new(-0.404, -0.101),
            ground_spectrum: HarmonicSpectrum::from_amplitudes(g_lines, W0).unwrap(),
            excited_spectrum: HarmonicSpectrum::from_amplitudes(e_lines, W0).unwrap(),
            drive_frequency: W0,
        }
    }

    #[test]
    fn single_member_chain_equals_that_cavity() {
        let inputs = synthetic_inputs();
        let cavity = CavityConfig::new(6.45 * W0, 0.229, W0).unwrap();
        let chain = CavityChain::new(vec![cavity]).unwrap();
        let chained = chain_spectrum(&chain, &inputs, 29).unwrap();
        let single = inputs.single_cavity(&cavity, 29).unwrap().composed;
        assert_eq!(chained, single);
    }

    #[test]
    fn chain_is_the_ordered_amplitude_sum_of_its_members() {
        let inputs = synthetic_inputs();
        let cavities = vec![
            CavityConfig::new(6.45 * W0, 0.229, W0).unwrap(),
            CavityConfig::new(6.45 * W0, 0.235, W0).unwrap(),
            CavityConfig::new(6.2 * W0, 0.1, W0).unwrap(),
        ];
        let chain = CavityChain::new(cavities.clone()).unwrap();
        let composed = chain_spectrum(&chain, &inputs, 29).unwrap();

        // Independent recomputation: left-fold the members' lines per order
        // in chain order — must agree bit-for-bit with the parallel path.
        let mut lines: Vec<HarmonicAmplitude> = Vec::new();
        for cavity in &cavities {
            lines.extend_from_slice(
                inputs
                    .single_cavity(cavity, 29)
                    .unwrap()
                    .composed
                    .entries(),
            );
        }
        let manual = HarmonicSpectrum::from_amplitudes(lines, W0).unwrap();
        assert_eq!(composed, manual);
    }

    #[test]
    fn opposite_phases_cancel_identical_members() {
        let inputs = synthetic_inputs();
        let cavity = CavityConfig::new(6.45 * W0, 0.229, W0).unwrap();
        let chain = CavityChain::with_phases(
            vec![cavity, cavity],
            vec![0.0, std::f64::consts::PI],
        )
        .unwrap();
        let composed = chain_spectrum(&chain, &inputs, 29).unwrap();
        let single = inputs.single_cavity(&cavity, 29).unwrap().composed;
        // e^{iπ} is not exactly −1 in floats, so cancellation is only near.
        let scale = single.total_intensity();
        assert!(composed.total_intensity() < 1e-25 * scale);
    }

    #[test]
    fn empty_and_malformed_chains_are_rejected() {
        assert!(matches!(CavityChain::new(vec![]), Err(Error::EmptyChain)));
        let cavity = CavityConfig::new(6.45 * W0, 0.229, W0).unwrap();
        assert!(CavityChain::with_phases(vec![cavity], vec![0.0, 0.0]).is_err());
        assert!(CavityChain::with_phases(vec![cavity], vec![f64::NAN]).is_err());
    }

    #[test]
    fn sweep_covers_the_grid_and_survives_bad_points() {
        let inputs = synthetic_inputs();
        // The middle frequency is an exact multiple of ω0: that row must
        // report a config error but the sweep keeps going.
        let omegas = [6.45 * W0, 6.0 * W0, 6.7 * W0];
        let eps = [0.0, 0.1, 0.229];
        let rows = sweep_total_intensity(&inputs, &omegas, &eps, 29).unwrap();
        assert_eq!(rows.len(), omegas.len() * eps.len());

        for (i, row) in rows.iter().enumerate() {
            assert_abs_diff_eq!(row.omega_over_drive, omegas[i / 3] / W0, epsilon = 0.0);
            assert_abs_diff_eq!(row.coupling, eps[i % 3], epsilon = 0.0);
            if i / 3 == 1 {
                assert!(row.total_intensity.is_none());
                assert!(row.status.contains("integer multiple"));
            } else {
                assert!(row.total_intensity.is_some());
                assert_eq!(row.status, "ok");
            }
        }

        // ε_cav = 0 rows reproduce the cavity-free odd total exactly.
        let no_cavity: f64 = inputs
            .ground_spectrum
            .entries()
            .iter()
            .filter(|e| (e.order.round() as i64) % 2 == 1)
            .map(|e| e.intensity())
            .sum();
        assert_eq!(rows[0].total_intensity, Some(no_cavity));
        assert_eq!(rows[6].total_intensity, Some(no_cavity));

        // Determinism: a rerun is bit-identical.
        let again = sweep_total_intensity(&inputs, &omegas, &eps, 29).unwrap();
        assert_eq!(rows, again);

        assert!(sweep_total_intensity(&inputs, &[], &eps, 29).is_err());
    }

    #[test]
    fn filter_blocks_matching_orders_and_is_idempotent() {
        let inputs = synthetic_inputs();
        let cavity = CavityConfig::new(6.45 * W0, 0.235, W0).unwrap();
        let mut pair = polariton_solve(
            inputs.ground_energy,
            inputs.excited_energy,
            &cavity,
            inputs.coupling,
            W0,
        )
        .unwrap();
        pair.shift = 0.5;
        let cav = cavity_spectrum(
            &pair,
            &inputs.ground_spectrum,
            &inputs.excited_spectrum,
            29,
        )
        .unwrap();

        let filter = SpectralFilter::odd_integers_up_to(29, 1e-9).unwrap();
        let blocked = apply_filter(&cav.composed, &filter);
        // Only the half-integer side lines survive, spaced by one full order.
        assert!(!blocked.is_empty());
        for e in blocked.entries() {
            assert!((e.order.fract().abs() - 0.5).abs() < 1e-12);
        }
        for pairwise in blocked.entries().windows(2) {
            assert_abs_diff_eq!(pairwise[1].order - pairwise[0].order, 1.0, epsilon = 1e-9);
        }
        assert_eq!(apply_filter(&blocked, &filter), blocked);

        let empty_filter = SpectralFilter::new(vec![], 1e-9).unwrap();
        assert_eq!(apply_filter(&cav.composed, &empty_filter), cav.composed);

        let all_orders: Vec<f64> = cav.composed.entries().iter().map(|e| e.order).collect();
        let block_all = SpectralFilter::new(all_orders, 1e-9).unwrap();
        let nothing = apply_filter(&cav.composed, &block_all);
        assert!(nothing.is_empty());
        assert_eq!(nothing.total_intensity(), 0.0);

        assert!(SpectralFilter::new(vec![1.0], 0.0).is_err());
    }

    #[test]
    fn two_and_ten_cavity_chains_refine_the_order_comb() {
        let inputs = synthetic_inputs();
        // Structural check with pinned shifts: one cavity displacing by 1.0
        // and one by 0.5 puts lines on every half-integer in the plateau.
        let cavity = CavityConfig::new(6.45 * W0, 0.229, W0).unwrap();
        let mut pair_full = polariton_solve(
            inputs.ground_energy,
            inputs.excited_energy,
            &cavity,
            inputs.coupling,
            W0,
        )
        .unwrap();
        let mut pair_half = pair_full;
        pair_full.shift = 1.0;
        pair_half.shift = 0.5;

        let mut lines = Vec::new();
        for pair in [&pair_full, &pair_half] {
            lines.extend_from_slice(
                cavity_spectrum(pair, &inputs.ground_spectrum, &inputs.excited_spectrum, 29)
                    .unwrap()
                    .composed
                    .entries(),
            );
        }
        let two_chain = HarmonicSpectrum::from_amplitudes(lines, W0).unwrap();
        for target in [5.0, 5.5, 6.0, 6.5, 7.0] {
            assert!(
                two_chain.amplitude_at(target).is_some(),
                "missing order {target}"
            );
        }

        // Ten shifts 0.1..1.0 fill a 0.1-spaced comb between the odd lines.
        let mut lines = Vec::new();
        for k in 1..=10 {
            let mut pair = pair_full;
            pair.shift = k as f64 / 10.0;
            lines.extend_from_slice(
                cavity_spectrum(&pair, &inputs.ground_spectrum, &inputs.excited_spectrum, 29)
                    .unwrap()
                    .composed
                    .entries(),
            );
        }
        let ten_chain = HarmonicSpectrum::from_amplitudes(lines, W0).unwrap();
        let mut target = 5.0;
        while target <= 7.0 + 1e-12 {
            assert!(
                ten_chain.amplitude_at(target).is_some(),
                "missing order {target}"
            );
            target += 0.1;
        }
    }
}
