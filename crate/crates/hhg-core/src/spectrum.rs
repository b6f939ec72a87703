//! Cavity-free high-harmonic amplitudes and intensities from a single Floquet
//! eigenstate.
//!
//! The emission amplitude at harmonic order M is the acceleration-form matrix
//! element of the dipole between channel functions M rungs apart,
//!
//! ```text
//!     A(M) = −(M·ω0)² · Σ_n (φ_{n+M} | x | φ_n)
//! ```
//!
//! where `(·|·)` is the c-product (no conjugation) and the weight is the
//! *unscaled* coordinate x even though the channel functions live on the
//! rotated contour — the back-rotation factor is part of the amplitude's
//! overall normalization and drops out of every intensity ratio we report.
//! Intensities are |A|²; only odd M survive for a dynamical-symmetry
//! eigenstate, which is the selection rule the tests pin down.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::FloquetEigenstate;
use crate::grid::c_product_weighted;
use crate::C64;

/// Two orders closer than this (in units of ω0) are the same emission line;
/// their amplitudes add coherently before any intensity is formed. The value
/// is chosen so a side harmonic displaced by exactly ±1.0 lands *on* the
/// neighboring integer line instead of next to it.
pub const ORDER_MERGE_TOLERANCE: f64 = 1e-9;

/// One spectral line: harmonic order (units of ω0) and complex amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicAmplitude {
    /// Harmonic order M in units of the drive frequency; fractional orders
    /// come from cavity side harmonics.
    pub order: f64,
    /// Complex field amplitude A(M).
    pub amplitude: C64,
}

impl HarmonicAmplitude {
    /// Emitted intensity |A|².
    pub fn intensity(&self) -> f64 {
        self.amplitude.norm_sqr()
    }
}

/// An ordered set of spectral lines sharing one drive frequency.
///
/// Orders are strictly increasing; lines closer than
/// [`ORDER_MERGE_TOLERANCE`] were amplitude-summed at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSpectrum {
    entries: Vec<HarmonicAmplitude>,
    drive_frequency: f64,
}

impl HarmonicSpectrum {
    /// Builds a spectrum from unordered lines: sorts by order and coherently
    /// sums amplitudes that fall within [`ORDER_MERGE_TOLERANCE`] of each
    /// other. Non-finite orders are rejected.
    pub fn from_amplitudes(
        mut lines: Vec<HarmonicAmplitude>,
        drive_frequency: f64,
    ) -> Result<Self> {
        let mut problems = Vec::new();
        if !(drive_frequency > 0.0) || !drive_frequency.is_finite() {
            problems.push(format!(
                "drive frequency must be positive and finite, got {drive_frequency}"
            ));
        }
        if lines.iter().any(|l| !l.order.is_finite()) {
            problems.push("harmonic orders must be finite".into());
        }
        if !problems.is_empty() {
            return Err(Error::InvalidConfig(problems));
        }

        lines.sort_by(|a, b| a.order.partial_cmp(&b.order).expect("finite orders"));
        let mut entries: Vec<HarmonicAmplitude> = Vec::with_capacity(lines.len());
        for line in lines {
            match entries.last_mut() {
                Some(last) if (line.order - last.order).abs() <= ORDER_MERGE_TOLERANCE => {
                    last.amplitude += line.amplitude;
                }
                _ => entries.push(line),
            }
        }
        Ok(Self {
            entries,
            drive_frequency,
        })
    }

    /// The spectral lines in strictly increasing order.
    pub fn entries(&self) -> &[HarmonicAmplitude] {
        &self.entries
    }

    /// Drive frequency ω0 the orders are measured against.
    pub fn drive_frequency(&self) -> f64 {
        self.drive_frequency
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The line at `order`, matched within [`ORDER_MERGE_TOLERANCE`].
    pub fn amplitude_at(&self, order: f64) -> Option<&HarmonicAmplitude> {
        // Entries are sorted; a binary search narrows to the insertion point
        // and the neighbor on either side is the only possible match.
        let idx = self
            .entries
            .partition_point(|e| e.order < order - ORDER_MERGE_TOLERANCE);
        self.entries
            .get(idx)
            .filter(|e| (e.order - order).abs() <= ORDER_MERGE_TOLERANCE)
    }

    /// Sum of |A|² over every line; zero for an empty spectrum.
    pub fn total_intensity(&self) -> f64 {
        self.entries.iter().map(HarmonicAmplitude::intensity).sum()
    }
}

/// Emission amplitude A(M) = −(Mω0)² Σ_n (φ_{n+M}|x|φ_n) of one harmonic.
///
/// The sum runs over every channel pair M rungs apart that the state's
/// truncation retains; an order beyond the span has no pairs at all and is
/// reported as an error rather than silently returned as zero.
pub fn harmonic_amplitude(state: &FloquetEigenstate, m: i64) -> Result<C64> {
    if m.unsigned_abs() > state.channel_span().unsigned_abs() {
        return Err(Error::OrderBeyondTruncation {
            order: m,
            span: state.channel_span(),
        });
    }
    let x = state.grid.values();
    let w0 = state.drive.frequency;
    let mut acc = C64::new(0.0, 0.0);
    for (&n, phi) in &state.channels {
        let up = n as i64 + m;
        let Ok(up) = i32::try_from(up) else { continue };
        if let Some(phi_up) = state.channels.get(&up) {
            acc += c_product_weighted(phi_up, phi, &x, &state.grid)?;
        }
    }
    let prefactor = -(m as f64 * w0).powi(2);
    Ok(prefactor * acc)
}

/// Spectrum of integer harmonics M = 1..=`m_max` emitted by `state`.
pub fn spectrum(state: &FloquetEigenstate, m_max: i64) -> Result<HarmonicSpectrum> {
    if m_max < 1 {
        return Err(Error::InvalidConfig(vec![format!(
            "maximum harmonic order must be at least 1, got {m_max}"
        )]));
    }
    let lines = (1..=m_max)
        .into_par_iter()
        .map(|m| {
            harmonic_amplitude(state, m).map(|amplitude| HarmonicAmplitude {
                order: m as f64,
                amplitude,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    HarmonicSpectrum::from_amplitudes(lines, state.drive.frequency)
}

/// Finds the plateau knee: the order of the last line whose intensity is
/// within `plateau_band_decades` decades of the spectrum's maximum.
///
/// Interference dips *inside* the plateau (which can run several decades
/// deep) do not move the knee because only the last above-band line counts.
/// Returns `None` for an empty or identically-zero spectrum, which has no
/// plateau to speak of.
pub fn detect_knee(spec: &HarmonicSpectrum, plateau_band_decades: f64) -> Option<f64> {
    let max = spec
        .entries()
        .iter()
        .map(HarmonicAmplitude::intensity)
        .fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return None;
    }
    let floor = max * 10f64.powf(-plateau_band_decades);
    spec.entries()
        .iter()
        .rev()
        .find(|e| e.intensity() >= floor)
        .map(|e| e.order)
}
