//! Single-excitation polaritonic model of one atom in one quantized cavity
//! mode: coupling dipole, dressed eigenpairs, side-harmonic displacement ΔM,
//! and the composed cavity emission spectrum.
//!
//! The cavity hybridizes two Floquet resonances — the ground-like state plus
//! one photon against the excited-like state with none — into an upper and a
//! lower polariton split by the complex Rabi frequency. Emission then carries,
//! besides the odd harmonics, side lines displaced by ±ΔM around every odd
//! order. All algebra here is closed-form 2×2; the heavy lifting happened in
//! the Floquet solve that produced the inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::FloquetEigenstate;
use crate::grid::c_product_weighted;
use crate::spectrum::{HarmonicAmplitude, HarmonicSpectrum};
use crate::C64;

/// How close ω_cav/ω0 may come to an integer before the cavity is rejected:
/// an integer ratio would park the cavity line on top of a harmonic of the
/// drive and trap the emission we are trying to extract.
pub const INTEGER_RATIO_TOLERANCE: f64 = 1e-9;

/// One cavity: mode frequency and the atom-mode coupling strength, both in
/// atomic units. The microscopic mode volume and permittivity enter only
/// through the coupling parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    /// Mode angular frequency ω_cav (a.u.).
    pub frequency: f64,
    /// Coupling field strength ε_cav (a.u.); zero turns the cavity off.
    pub coupling: f64,
}

impl CavityConfig {
    /// Validates against the drive the cavity will dress.
    pub fn new(frequency: f64, coupling: f64, drive_frequency: f64) -> Result<Self> {
        let config = Self {
            frequency,
            coupling,
        };
        config.validate(drive_frequency)?;
        Ok(config)
    }

    /// Checks positivity and that ω_cav/ω0 is not an integer within
    /// [`INTEGER_RATIO_TOLERANCE`].
    pub fn validate(&self, drive_frequency: f64) -> Result<()> {
        let mut violations = Vec::new();
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            violations.push(format!(
                "cavity frequency must be > 0, got {}",
                self.frequency
            ));
        }
        if !(self.coupling >= 0.0) || !self.coupling.is_finite() {
            violations.push(format!(
                "cavity coupling must be ≥ 0, got {}",
                self.coupling
            ));
        }
        if !(drive_frequency > 0.0) || !drive_frequency.is_finite() {
            violations.push(format!(
                "drive frequency must be > 0, got {drive_frequency}"
            ));
        } else if self.frequency > 0.0 {
            let ratio = self.frequency / drive_frequency;
            if (ratio - ratio.round()).abs() <= INTEGER_RATIO_TOLERANCE {
                violations.push(format!(
                    "cavity frequency is an integer multiple of the drive \
                     (ω_cav/ω0 = {ratio}); emitted harmonics would be trapped"
                ));
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(violations))
        }
    }
}

/// The dressed upper/lower pair and everything derived from it.
///
/// `shift` is the side-harmonic displacement ΔM = Re(ε₊ − ε₋)/ω0; imaginary
/// parts of the splitting broaden lines rather than move them, so positions
/// are real by construction. The κ prefactors depend on which harmonic the
/// side lines decorate, hence methods rather than stored fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaritonPair {
    /// Complex detuning δ = ε_g + ω_cav − ε_e.
    pub detuning: C64,
    /// Complex Rabi frequency Ω0 = 2·ε_cav·d_ge.
    pub rabi: C64,
    /// Complex splitting Ω = sqrt(δ² + Ω0²), branch fixed to Re(Ω) ≥ 0.
    pub splitting: C64,
    /// Upper polariton energy ε₊ (larger real part).
    pub upper: C64,
    /// Lower polariton energy ε₋.
    pub lower: C64,
    /// Mixing amplitude a₊ = sqrt((Ω + δ)/(2Ω)).
    pub mixing_upper: C64,
    /// Mixing amplitude a₋ = sqrt((Ω − δ)/(2Ω)).
    pub mixing_lower: C64,
    /// Eigenvector of ε₊ in the (g⊗1photon, e⊗0photon) basis, c-normalized.
    pub vector_upper: [C64; 2],
    /// Eigenvector of ε₋, c-normalized.
    pub vector_lower: [C64; 2],
    /// Side-harmonic displacement ΔM ≥ 0 in units of ω0.
    pub shift: f64,
    /// Drive frequency the shift is measured against.
    pub drive_frequency: f64,
}

impl PolaritonPair {
    /// κ for the up-shifted side line of harmonic `m`: ((m + ΔM)/m)².
    pub fn kappa_plus(&self, m: f64) -> f64 {
        ((m + self.shift) / m).powi(2)
    }

    /// κ for the down-shifted side line of harmonic `m`: ((m − ΔM)/m)².
    pub fn kappa_minus(&self, m: f64) -> f64 {
        ((m - self.shift) / m).powi(2)
    }

    /// Weight of the ground-state spectrum in an odd cavity harmonic:
    /// (Ω² + δ²)/(2Ω²).
    pub fn odd_weight_ground(&self) -> C64 {
        let omega_sq = self.splitting * self.splitting;
        let delta_sq = self.detuning * self.detuning;
        (omega_sq + delta_sq) / (2.0 * omega_sq)
    }

    /// Weight of the excited-state spectrum in an odd cavity harmonic.
    ///
    /// Computed as 1 − ground weight so the two sum to one *exactly*; the
    /// algebraic form (Ω² − δ²)/(2Ω²) is identical in exact arithmetic but
    /// loses the last bit of the identity to rounding.
    pub fn odd_weight_excited(&self) -> C64 {
        C64::new(1.0, 0.0) - self.odd_weight_ground()
    }

    /// The common side-line factor (Ω² − δ²)/(4Ω²); exactly zero when the
    /// coupling vanishes because the splitting then *is* ±δ.
    pub fn side_factor(&self) -> C64 {
        let omega_sq = self.splitting * self.splitting;
        let delta_sq = self.detuning * self.detuning;
        (omega_sq - delta_sq) / (4.0 * omega_sq)
    }

    /// The 2×2 dressed matrix this pair diagonalizes, rows/cols ordered
    /// (g⊗1photon, e⊗0photon). `mean` is the common energy offset.
    pub fn matrix(&self, mean: C64) -> [[C64; 2]; 2] {
        let half_delta = 0.5 * self.detuning;
        let half_rabi = 0.5 * self.rabi;
        [
            [mean + half_delta, half_rabi],
            [half_rabi, mean - half_delta],
        ]
    }

    /// Mean of the two polariton energies (the common offset in `matrix`).
    pub fn mean_energy(&self) -> C64 {
        0.5 * (self.upper + self.lower)
    }
}

/// Transition dipole between two Floquet eigenstates,
/// d = Σ_n (φ_{n,g} | x | φ_{n,e}); symmetric in its arguments because the
/// c-product is bilinear. Nonzero only when the two states carry opposite
/// dynamical-symmetry labels.
pub fn coupling_dipole(g: &FloquetEigenstate, e: &FloquetEigenstate) -> Result<C64> {
    if g.grid != e.grid {
        return Err(Error::InvalidConfig(vec![
            "coupling dipole requires both states on the same spatial grid".into(),
        ]));
    }
    if g.channels.keys().ne(e.channels.keys()) {
        return Err(Error::InvalidConfig(vec![
            "coupling dipole requires identical channel ranges".into(),
        ]));
    }
    let x = g.grid.values();
    let mut acc = C64::new(0.0, 0.0);
    for (n, phi_g) in &g.channels {
        let phi_e = &e.channels[n];
        acc += c_product_weighted(phi_g, phi_e, &x, &g.grid)?;
    }
    Ok(acc)
}

/// Diagonalizes the single-excitation 2×2 block and packages every derived
/// quantity downstream composition needs.
///
/// When the coupling Ω0 vanishes *exactly* the splitting is taken as ±δ with
/// the sign fixing Re(Ω) ≥ 0, instead of round-tripping through sqrt(δ²).
/// That keeps Ω² − δ² at an exact zero, so an off cavity produces exactly the
/// no-cavity spectrum rather than one polluted by last-bit side lines.
pub fn polariton_solve(
    eps_g: C64,
    eps_e: C64,
    cavity: &CavityConfig,
    d_ge: C64,
    drive_frequency: f64,
) -> Result<PolaritonPair> {
    cavity.validate(drive_frequency)?;
    let delta = eps_g + cavity.frequency - eps_e;
    let rabi = 2.0 * cavity.coupling * d_ge;

    let splitting = if rabi == C64::new(0.0, 0.0) {
        if delta.re > 0.0 || (delta.re == 0.0 && delta.im >= 0.0) {
            delta
        } else {
            -delta
        }
    } else {
        // Principal sqrt already lands in Re ≥ 0.
        (delta * delta + rabi * rabi).sqrt()
    };
    if splitting == C64::new(0.0, 0.0) {
        return Err(Error::DegeneratePair);
    }

    let mean = 0.5 * (eps_g + cavity.frequency + eps_e);
    let upper = mean + 0.5 * splitting;
    let lower = mean - 0.5 * splitting;
    let two_omega = 2.0 * splitting;
    let mixing_upper = ((splitting + delta) / two_omega).sqrt();
    let mixing_lower = ((splitting - delta) / two_omega).sqrt();

    Ok(PolaritonPair {
        detuning: delta,
        rabi,
        splitting,
        upper,
        lower,
        mixing_upper,
        mixing_lower,
        vector_upper: eigenvector(delta, rabi, splitting, true),
        vector_lower: eigenvector(delta, rabi, splitting, false),
        shift: (upper - lower).re / drive_frequency,
        drive_frequency,
    })
}

/// Eigenvector of [[δ/2, Ω0/2], [Ω0/2, −δ/2]] for eigenvalue ±Ω/2, picking
/// whichever closed form has the larger leading component so the off cavity
/// (Ω0 = 0) still yields the uncoupled basis vectors. c-normalized; the two
/// distinct eigenvectors of a complex-symmetric matrix are c-orthogonal.
fn eigenvector(delta: C64, rabi: C64, splitting: C64, upper: bool) -> [C64; 2] {
    let raw = if upper {
        if (splitting + delta).norm() >= (splitting - delta).norm() {
            [splitting + delta, rabi]
        } else {
            [rabi, splitting - delta]
        }
    } else if (splitting + delta).norm() >= (splitting - delta).norm() {
        [-rabi, splitting + delta]
    } else {
        [delta - splitting, rabi]
    };
    let c_norm_sq = raw[0] * raw[0] + raw[1] * raw[1];
    let scale = c_norm_sq.sqrt();
    if scale.norm() == 0.0 {
        // Exactly self-orthogonal vectors only occur at Ω = 0, which
        // polariton_solve already rejected; fall back to the raw direction.
        return raw;
    }
    [raw[0] / scale, raw[1] / scale]
}

/// The odd cavity harmonic at order `m`: Eq.-(20)-style weighted blend of the
/// two uncoupled spectra.
pub fn odd_harmonic_amplitude(
    pair: &PolaritonPair,
    a_g: &HarmonicSpectrum,
    a_e: &HarmonicSpectrum,
    m: i64,
) -> Result<HarmonicAmplitude> {
    let (g, e) = lines_at(a_g, a_e, m)?;
    Ok(HarmonicAmplitude {
        order: m as f64,
        amplitude: pair.odd_weight_ground() * g + pair.odd_weight_excited() * e,
    })
}

/// The two side lines flanking odd harmonic `m` at orders m ± ΔM. Their
/// shared base amplitude is the side factor times the spectral contrast
/// A_g(m) − A_e(m); the two lines differ only by their κ prefactors.
pub fn side_harmonic_amplitudes(
    pair: &PolaritonPair,
    a_g: &HarmonicSpectrum,
    a_e: &HarmonicSpectrum,
    m: i64,
) -> Result<[HarmonicAmplitude; 2]> {
    let (g, e) = lines_at(a_g, a_e, m)?;
    let base = pair.side_factor() * (g - e);
    let m_f = m as f64;
    Ok([
        HarmonicAmplitude {
            order: m_f + pair.shift,
            amplitude: pair.kappa_plus(m_f) * base,
        },
        HarmonicAmplitude {
            order: m_f - pair.shift,
            amplitude: pair.kappa_minus(m_f) * base,
        },
    ])
}

fn lines_at(a_g: &HarmonicSpectrum, a_e: &HarmonicSpectrum, m: i64) -> Result<(C64, C64)> {
    let order = m as f64;
    let g = a_g
        .amplitude_at(order)
        .ok_or(Error::MissingOrder { order })?;
    let e = a_e
        .amplitude_at(order)
        .ok_or(Error::MissingOrder { order })?;
    Ok((g.amplitude, e.amplitude))
}

/// Emission of one cavity split into its constituent line families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavitySpectrum {
    /// Odd integer harmonics with polariton-blended weights.
    pub odd_part: HarmonicSpectrum,
    /// Up-shifted side lines at orders m + ΔM.
    pub side_plus: HarmonicSpectrum,
    /// Down-shifted side lines at orders m − ΔM.
    pub side_minus: HarmonicSpectrum,
    /// Everything merged coherently; coincident orders amplitude-summed.
    pub composed: HarmonicSpectrum,
}

impl CavitySpectrum {
    /// Both side families merged into one spectrum (orders m ± ΔM).
    pub fn side_part(&self) -> HarmonicSpectrum {
        let mut lines: Vec<HarmonicAmplitude> = self.side_plus.entries().to_vec();
        lines.extend_from_slice(self.side_minus.entries());
        HarmonicSpectrum::from_amplitudes(lines, self.composed.drive_frequency())
            .expect("side parts are valid spectra")
    }
}

/// Composes the full cavity emission up to order `m_max` from the uncoupled
/// ground/excited spectra.
///
/// Side lines whose amplitude is *exactly* zero — off cavity, or identical
/// input spectra — are dropped: a zero-amplitude line is no line, and keeping
/// it would make an off cavity structurally different from no cavity.
pub fn cavity_spectrum(
    pair: &PolaritonPair,
    a_g: &HarmonicSpectrum,
    a_e: &HarmonicSpectrum,
    m_max: i64,
) -> Result<CavitySpectrum> {
    if m_max < 1 {
        return Err(Error::InvalidConfig(vec![format!(
            "maximum harmonic order must be at least 1, got {m_max}"
        )]));
    }
    if a_g.drive_frequency() != a_e.drive_frequency() {
        return Err(Error::InvalidConfig(vec![format!(
            "input spectra disagree on the drive frequency: {} vs {}",
            a_g.drive_frequency(),
            a_e.drive_frequency()
        )]));
    }
    let w0 = a_g.drive_frequency();
    let zero = C64::new(0.0, 0.0);

    let mut odd_lines = Vec::new();
    let mut plus_lines = Vec::new();
    let mut minus_lines = Vec::new();
    for m in (1..=m_max).step_by(2) {
        odd_lines.push(odd_harmonic_amplitude(pair, a_g, a_e, m)?);
        let [plus, minus] = side_harmonic_amplitudes(pair, a_g, a_e, m)?;
        if plus.amplitude != zero {
            plus_lines.push(plus);
        }
        if minus.amplitude != zero {
            minus_lines.push(minus);
        }
    }

    let mut all_lines = odd_lines.clone();
    all_lines.extend_from_slice(&plus_lines);
    all_lines.extend_from_slice(&minus_lines);

    Ok(CavitySpectrum {
        odd_part: HarmonicSpectrum::from_amplitudes(odd_lines, w0)?,
        side_plus: HarmonicSpectrum::from_amplitudes(plus_lines, w0)?,
        side_minus: HarmonicSpectrum::from_amplitudes(minus_lines, w0)?,
        composed: HarmonicSpectrum::from_amplitudes(all_lines, w0)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::{solve_field_free, AtomModel, ComplexScalingConfig};
    use crate::floquet::{
        assemble_floquet_operator, solve_resonance, DriveField, FloquetBasisSpec, ResonanceOptions,
    };
    use crate::grid::SpatialGrid;
    use approx::assert_abs_diff_eq;

    const W0: f64 = 0.057;

    fn uniform_spectrum(orders: &[f64], amplitude: C64) -> HarmonicSpectrum {
        let lines = orders
            .iter()
            .map(|&order| HarmonicAmplitude { order, amplitude })
            .collect();
        HarmonicSpectrum::from_amplitudes(lines, W0).unwrap()
    }

    #[test]
    fn config_rejects_integer_frequency_ratios() {
        assert!(CavityConfig::new(6.45 * W0, 0.229, W0).is_ok());
        let err = CavityConfig::new(6.0 * W0, 0.229, W0).unwrap_err();
        assert!(err.to_string().contains("integer multiple"));
        // A ratio a hair beyond the tolerance is legal.
        assert!(CavityConfig::new((6.0 + 1e-6) * W0, 0.229, W0).is_ok());
        assert!(CavityConfig::new(-1.0, 0.1, W0).is_err());
        assert!(CavityConfig::new(6.45 * W0, -0.1, W0).is_err());
        // Zero coupling is a legitimate "cavity off" configuration.
        assert!(CavityConfig::new(6.45 * W0, 0.0, W0).is_ok());
    }

    #[test]
    fn uncoupled_limit_is_exact() {
        let cavity = CavityConfig::new(6.45 * W0, 0.0, W0).unwrap();
        let eps_g = C64::new(-0.45, 0.0);
        let eps_e = C64::new(-0.20, 0.0);
        let pair = polariton_solve(eps_g, eps_e, &cavity, C64::new(0.5, 0.1), W0).unwrap();

        // δ real and positive here, so the branch picks Ω = δ exactly.
        assert_eq!(pair.splitting, pair.detuning);
        assert_eq!(pair.mixing_upper, C64::new(1.0, 0.0));
        assert_eq!(pair.mixing_lower, C64::new(0.0, 0.0));
        assert_eq!(pair.odd_weight_ground(), C64::new(1.0, 0.0));
        assert_eq!(pair.odd_weight_excited(), C64::new(0.0, 0.0));
        assert_eq!(pair.side_factor(), C64::new(0.0, 0.0));
        assert_eq!(pair.vector_upper, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert_eq!(pair.vector_lower, [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert_eq!(pair.upper, eps_g + cavity.frequency);
        assert_eq!(pair.lower, eps_e);
    }

    #[test]
    fn resonant_limit_splits_by_the_rabi_frequency() {
        // Pick ε_e so the detuning vanishes identically.
        let eps_g = C64::new(-0.45, 0.0);
        let cavity = CavityConfig::new(6.45 * W0, 0.2, W0).unwrap();
        let eps_e = eps_g + cavity.frequency;
        let d_ge = C64::new(0.3, 0.0);
        let pair = polariton_solve(eps_g, eps_e, &cavity, d_ge, W0).unwrap();

        let rabi = 2.0 * cavity.coupling * d_ge.re;
        assert_abs_diff_eq!((pair.upper - pair.lower).re, rabi, epsilon = 1e-15);
        assert_abs_diff_eq!(pair.shift, rabi / W0, epsilon = 1e-15);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(pair.mixing_upper.re, inv_sqrt2, epsilon = 1e-15);
        assert_abs_diff_eq!(pair.mixing_lower.re, inv_sqrt2, epsilon = 1e-15);
        // δ = 0 weights are an exact half-and-half blend.
        assert_abs_diff_eq!(pair.odd_weight_ground().re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(pair.odd_weight_excited().re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn eigenpairs_satisfy_the_two_level_matrix() {
        // Deterministic pseudo-random complex inputs, heavy on awkward signs.
        let mut lcg: u64 = 0x9e3779b97f4a7c15;
        let mut next = move || {
            lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((lcg >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for _ in 0..200 {
            let eps_g = C64::new(next() - 0.5, -next().abs() * 0.01);
            let eps_e = C64::new(next() - 0.2, -next().abs() * 0.05);
            let cavity = CavityConfig {
                frequency: 6.45 * W0,
                coupling: next().abs() * 0.4,
            };
            let d_ge = C64::new(next(), next());
            let pair = polariton_solve(eps_g, eps_e, &cavity, d_ge, W0).unwrap();

            // Mixing normalization is an algebraic identity.
            let mix_sum =
                pair.mixing_upper * pair.mixing_upper + pair.mixing_lower * pair.mixing_lower;
            assert_abs_diff_eq!(mix_sum.re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(mix_sum.im, 0.0, epsilon = 1e-12);
            // Weight identity holds exactly by construction.
            assert_eq!(
                pair.odd_weight_ground() + pair.odd_weight_excited(),
                C64::new(1.0, 0.0)
            );

            let mean = pair.mean_energy();
            let h = pair.matrix(mean);
            for (vec, energy) in [(pair.vector_upper, pair.upper), (pair.vector_lower, pair.lower)]
            {
                let applied = [
                    h[0][0] * vec[0] + h[0][1] * vec[1],
                    h[1][0] * vec[0] + h[1][1] * vec[1],
                ];
                let scale = energy.norm().max(1.0);
                for i in 0..2 {
                    assert!(
                        (applied[i] - energy * vec[i]).norm() < 1e-12 * scale,
                        "eigen-residual too large at component {i}"
                    );
                }
            }
            // ε₊ − ε₋ reproduces the splitting.
            assert!((pair.upper - pair.lower - pair.splitting).norm() < 1e-15);
            assert!(pair.splitting.re >= 0.0);
        }
    }

    #[test]
    fn degenerate_pair_is_rejected() {
        let cavity = CavityConfig::new(6.45 * W0, 0.0, W0).unwrap();
        let eps_g = C64::new(-0.45, 0.0);
        let eps_e = eps_g + cavity.frequency; // δ = 0 and Ω0 = 0
        let err = polariton_solve(eps_g, eps_e, &cavity, C64::new(0.3, 0.0), W0).unwrap_err();
        assert!(matches!(err, Error::DegeneratePair));
    }

    #[test]
    fn off_cavity_composes_to_the_bare_odd_spectrum() {
        let orders: Vec<f64> = (1..=9).map(f64::from).collect();
        let a_g = uniform_spectrum(&orders, C64::new(2e-3, -1e-3));
        let a_e = uniform_spectrum(&orders, C64::new(-5e-4, 3e-4));
        let cavity = CavityConfig::new(6.45 * W0, 0.0, W0).unwrap();
        let pair = polariton_solve(
            C64::new(-0.45, -3e-4),
            C64::new(-0.19, -1e-2),
            &cavity,
            C64::new(0.4, 0.1),
            W0,
        )
        .unwrap();

        let cav = cavity_spectrum(&pair, &a_g, &a_e, 9).unwrap();
        assert!(cav.side_plus.is_empty());
        assert!(cav.side_minus.is_empty());
        assert_eq!(cav.composed.len(), 5);
        for (got, m) in cav.composed.entries().iter().zip([1.0, 3.0, 5.0, 7.0, 9.0]) {
            let want = a_g.amplitude_at(m).unwrap();
            assert_eq!(got.order, want.order);
            assert_eq!(got.amplitude, want.amplitude);
        }
    }

    #[test]
    fn identical_input_spectra_produce_no_side_lines() {
        let orders: Vec<f64> = (1..=7).map(f64::from).collect();
        let a = uniform_spectrum(&orders, C64::new(1e-3, 2e-3));
        let cavity = CavityConfig::new(6.45 * W0, 0.229, W0).unwrap();
        let pair = polariton_solve(
            C64::new(-0.45, -3e-4),
            C64::new(-0.19, -1e-2),
            &cavity,
            C64::new(0.4, 0.1),
            W0,
        )
        .unwrap();
        let cav = cavity_spectrum(&pair, &a, &a, 7).unwrap();
        assert!(cav.side_plus.is_empty() && cav.side_minus.is_empty());
    }

    #[test]
    fn side_lines_differ_only_by_their_kappa_factors() {
        let orders: Vec<f64> = (1..=9).map(f64::from).collect();
        let a_g = uniform_spectrum(&orders, C64::new(2e-3, -1e-3));
        let a_e = uniform_spectrum(&orders, C64::new(-5e-4, 3e-4));
        let cavity = CavityConfig::new(6.45 * W0, 0.229, W0).unwrap();
        let pair = polariton_solve(
            C64::new(-0.4532, -3.1e-4),
            C64::new(-0.1925, -1.37e-2),
            &cavity,
            C64::new(-0.404, -0.101),
            W0,
        )
        .unwrap();

        for m in [3, 5, 7] {
            let [plus, minus] = side_harmonic_amplitudes(&pair, &a_g, &a_e, m).unwrap();
            let m_f = m as f64;
            assert_abs_diff_eq!(plus.order, m_f + pair.shift, epsilon = 0.0);
            assert_abs_diff_eq!(minus.order, m_f - pair.shift, epsilon = 0.0);
            let amp_ratio = plus.amplitude / minus.amplitude;
            let kappa_ratio = pair.kappa_plus(m_f) / pair.kappa_minus(m_f);
            assert!(
                (amp_ratio - kappa_ratio).norm() <= 1e-14 * kappa_ratio.abs(),
                "amplitude ratio deviates from κ ratio at m = {m}"
            );
        }
    }

    #[test]
    fn unit_shift_fills_every_integer_order() {
        let orders: Vec<f64> = (1..=9).map(f64::from).collect();
        let a_g = uniform_spectrum(&orders, C64::new(2e-3, -1e-3));
        let a_e = uniform_spectrum(&orders, C64::new(-5e-4, 3e-4));
        let cavity = CavityConfig::new(6.45 * W0, 0.229, W0).unwrap();
        let mut pair = polariton_solve(
            C64::new(-0.4532, -3.1e-4),
            C64::new(-0.1925, -1.37e-2),
            &cavity,
            C64::new(-0.404, -0.101),
            W0,
        )
        .unwrap();

        pair.shift = 1.0;
        let cav = cavity_spectrum(&pair, &a_g, &a_e, 9).unwrap();
        let got: Vec<f64> = cav.composed.entries().iter().map(|e| e.order).collect();
        // Odd lines 1..9 plus side lines on the even integers. The would-be
        // DC line at order 0 carries κ = ((1−1)/1)² = 0 and is dropped.
        assert_eq!(got, (1..=10).map(f64::from).collect::<Vec<_>>());

        pair.shift = 0.5;
        let cav = cavity_spectrum(&pair, &a_g, &a_e, 9).unwrap();
        for e in cav.composed.entries() {
            let doubled = 2.0 * e.order;
            assert!(
                (doubled - doubled.round()).abs() < 1e-12,
                "order {} is not a half-integer",
                e.order
            );
        }
        let side = cav.side_part();
        assert_eq!(side.len(), 10); // 5 odd lines × 2 sides, no merges
        for e in side.entries() {
            assert!((e.order.fract().abs() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_order_is_reported() {
        let a_g = uniform_spectrum(&[1.0, 3.0], C64::new(1.0, 0.0));
        let a_e = uniform_spectrum(&[1.0], C64::new(1.0, 0.0));
        let cavity = CavityConfig::new(6.45 * W0, 0.229, W0).unwrap();
        let pair = polariton_solve(
            C64::new(-0.45, 0.0),
            C64::new(-0.19, 0.0),
            &cavity,
            C64::new(0.4, 0.0),
            W0,
        )
        .unwrap();
        let err = odd_harmonic_amplitude(&pair, &a_g, &a_e, 3).unwrap_err();
        assert!(matches!(err, Error::MissingOrder { order } if order == 3.0));
    }

    #[test]
    fn dipole_between_same_and_opposite_symmetry_states() {
        let grid = SpatialGrid::new(60.0, 384).unwrap();
        let atom = AtomModel::xenon();
        let scaling = ComplexScalingConfig::new(0.15).unwrap();
        let drive = DriveField::new(0.0, W0).unwrap();
        let basis = FloquetBasisSpec::symmetric(2, grid);
        let seeds = solve_field_free(&atom, &grid, &scaling, 2).unwrap();
        let op = assemble_floquet_operator(&atom, &grid, &scaling, &drive, &basis).unwrap();
        let g = solve_resonance(&op, &seeds[0], &basis, &ResonanceOptions::ground()).unwrap();
        let e = solve_resonance(&op, &seeds[1], &basis, &ResonanceOptions::excited()).unwrap();
        assert_ne!(g.symmetry, e.symmetry);

        // Same symmetry: the dipole of a state with itself vanishes by parity.
        let self_dipole = coupling_dipole(&g, &g).unwrap();
        assert!(self_dipole.norm() < 1e-10, "got {self_dipole}");

        // Opposite symmetry at zero drive: reduces to the bare matrix element
        // between the field-free states, and is symmetric in its arguments.
        let d_ge = coupling_dipole(&g, &e).unwrap();
        let d_eg = coupling_dipole(&e, &g).unwrap();
        assert!((d_ge - d_eg).norm() < 1e-14 * d_ge.norm().max(1e-30));
        let x = grid.values();
        let bare = c_product_weighted(
            &seeds[0].wavefunction,
            &seeds[1].wavefunction,
            &x,
            &grid,
        )
        .unwrap();
        assert!(
            (d_ge - bare).norm() < 1e-8 * bare.norm(),
            "dressed {d_ge} vs bare {bare}"
        );
        assert!(bare.norm() > 0.1);

        // Mismatched channel ranges are refused.
        let narrow_basis = FloquetBasisSpec::symmetric(1, grid);
        let narrow_op =
            assemble_floquet_operator(&atom, &grid, &scaling, &drive, &narrow_basis).unwrap();
        let narrow_g =
            solve_resonance(&narrow_op, &seeds[0], &narrow_basis, &ResonanceOptions::ground())
                .unwrap();
        assert!(coupling_dipole(&narrow_g, &e).is_err());
    }
}
