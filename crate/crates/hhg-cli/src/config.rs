//! Structured run configuration: TOML file in, fully resolved values out.
//!
//! Every section is optional and falls back to the production defaults
//! (xenon-like atom, 200 a.u. / 1024-point grid, θ = 0.15, ε0 = 0.04,
//! ω0 = 0.057, channels ±40, harmonics up to order 45). Unknown keys are
//! rejected at parse time; semantic validation collects *every* violation
//! before reporting, so a bad file is fixed in one pass and is never applied
//! partially.
//!
//! Convenience keys `wavelength_nm` and `intensity_W_cm2` convert to the
//! atomic-unit drive parameters at load: ω0 = 45.5634/λ_nm and
//! ε0 = √(I / 3.50945e16). The config digest is computed over the *resolved*
//! configuration, so two files that mean the same run share a digest.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hhg_core::atom::{AtomModel, ComplexScalingConfig};
use hhg_core::cavity::CavityConfig;
use hhg_core::floquet::DriveField;
use hhg_core::grid::SpatialGrid;
use hhg_core::pulse::{PhaseMode, DEFAULT_NUM_PERIODS, DEFAULT_SAMPLES_PER_PERIOD};
use hhg_core::tdse::PropagationConfig;
use hhg_core::{Error, Result};

/// ω0 (a.u.) for a vacuum wavelength in nanometres.
const WAVELENGTH_TO_FREQUENCY: f64 = 45.5634;
/// Intensity (W/cm²) of a 1 a.u. field amplitude.
const INTENSITY_PER_AU: f64 = 3.50945e16;

/// The raw TOML schema. Everything is optional; resolution fills defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub atom: AtomSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub scaling: ScalingSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub basis: BasisSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default, rename = "cavity")]
    pub cavities: Vec<CavitySection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub pulse: PulseSection,
    /// Validated against the grid and drive only when present; the `oracle`
    /// command falls back to the desk defaults otherwise.
    #[serde(default)]
    pub oracle: Option<OracleSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSection {
    pub softcore_depth: Option<f64>,
    pub softcore_width: Option<f64>,
    pub target_ground_energy: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub extent: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub amplitude: Option<f64>,
    pub frequency: Option<f64>,
    pub wavelength_nm: Option<f64>,
    #[serde(rename = "intensity_W_cm2")]
    pub intensity_w_cm2: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    /// Symmetric Fourier-channel cutoff: channels run −n..=+n.
    pub channels: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub m_max: Option<i64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub frequency: Option<f64>,
    pub frequency_over_drive: Option<f64>,
    pub coupling: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub omega_over_drive: Option<Vec<f64>>,
    pub couplings: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub window_min_order: Option<f64>,
    pub samples_per_period: Option<usize>,
    pub num_periods: Option<usize>,
    /// "transform_limited" (default) or "retained".
    pub phase: Option<String>,
    /// Delay of the transform-limited train, in optical periods.
    pub delay_periods: Option<f64>,
    pub blocked_orders: Option<Vec<f64>>,
    pub block_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub time_step: Option<f64>,
    pub num_periods: Option<usize>,
    pub absorber_width: Option<f64>,
    pub absorber_strength: Option<f64>,
    pub spectrum_max_order: Option<f64>,
    pub spectrum_order_step: Option<f64>,
}

/// Sweep grid in drive-relative frequency units.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSpec {
    pub omega_over_drive: Vec<f64>,
    pub couplings: Vec<f64>,
}

/// Pulse-synthesis knobs with the phase mode already decoded.
#[derive(Debug, Clone, Serialize)]
pub struct PulseSpec {
    pub window_min_order: f64,
    pub samples_per_period: usize,
    pub num_periods: usize,
    pub phase: PhaseMode,
    pub blocked_orders: Vec<f64>,
    pub block_tolerance: f64,
}

/// A fully resolved, validated run configuration. Serialization order is the
/// digest's canonical form.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub atom: AtomModel,
    pub grid: SpatialGrid,
    pub scaling: ComplexScalingConfig,
    pub drive: DriveField,
    pub channels: u32,
    pub m_max: i64,
    pub cavities: Vec<CavityConfig>,
    pub sweep: Option<SweepSpec>,
    pub pulse: PulseSpec,
    pub oracle: PropagationConfig,
}

impl RunConfig {
    /// Hex SHA-256 over the canonical JSON form of the resolved config.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("resolved config serializes");
        let hash = Sha256::digest(&bytes);
        let mut out = String::with_capacity(64);
        for byte in hash {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}

/// Stashes the value on success, the violation text on failure; resolution
/// keeps going either way so the final report lists everything at once.
fn collect<T>(result: Result<T>, violations: &mut Vec<String>) -> Option<T> {
    match result {
        Ok(value) => Some(value),
        Err(Error::InvalidConfig(list)) => {
            violations.extend(list);
            None
        }
        Err(other) => {
            violations.push(other.to_string());
            None
        }
    }
}

/// Parses and fully resolves a TOML document.
pub fn load(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text)
        .map_err(|e| Error::InvalidConfig(vec![format!("config parse error: {e}")]))?;
    resolve(&raw)
}

/// Resolves a raw config against the defaults, collecting every violation.
pub fn resolve(raw: &RawConfig) -> Result<RunConfig> {
    let mut violations = Vec::new();

    let atom = resolve_atom(&raw.atom, &mut violations);
    let grid = collect(
        SpatialGrid::new(
            raw.grid.extent.unwrap_or(200.0),
            raw.grid.points.unwrap_or(1024),
        ),
        &mut violations,
    );
    let scaling = collect(
        ComplexScalingConfig::new(raw.scaling.theta.unwrap_or(0.15)),
        &mut violations,
    );
    let drive = resolve_drive(&raw.drive, &mut violations);

    let channels = raw.basis.channels.unwrap_or(40);
    if channels == 0 {
        violations.push("basis channels must be at least 1".to_string());
    }
    let m_max = raw.spectrum.m_max.unwrap_or(45);
    if m_max < 1 {
        violations.push(format!("m_max must be at least 1, got {m_max}"));
    } else if m_max > 2 * channels as i64 {
        violations.push(format!(
            "m_max {m_max} exceeds the channel span 2·{channels}; raise basis channels"
        ));
    }

    let mut cavities = Vec::new();
    for (i, section) in raw.cavities.iter().enumerate() {
        if let Some(cavity) = resolve_cavity(section, i, drive.as_ref(), &mut violations) {
            cavities.push(cavity);
        }
    }

    let sweep = raw
        .sweep
        .as_ref()
        .and_then(|s| resolve_sweep(s, &mut violations));
    let pulse = resolve_pulse(&raw.pulse, &mut violations);

    let oracle = match &raw.oracle {
        Some(section) => {
            let config = PropagationConfig {
                time_step: section.time_step.unwrap_or(0.05),
                num_periods: section.num_periods.unwrap_or(36),
                absorber_width: section.absorber_width.unwrap_or(30.0),
                absorber_strength: section.absorber_strength.unwrap_or(0.10),
                spectrum_max_order: section.spectrum_max_order.unwrap_or(36.0),
                spectrum_order_step: section.spectrum_order_step.unwrap_or(0.25),
            };
            if let (Some(g), Some(d)) = (&grid, &drive) {
                collect(config.validate(g, d), &mut violations);
            }
            config
        }
        None => PropagationConfig::desk(),
    };

    if !violations.is_empty() {
        return Err(Error::InvalidConfig(violations));
    }
    Ok(RunConfig {
        atom: atom.expect("validated"),
        grid: grid.expect("validated"),
        scaling: scaling.expect("validated"),
        drive: drive.expect("validated"),
        channels,
        m_max,
        cavities,
        sweep,
        pulse: pulse.expect("validated"),
        oracle,
    })
}

fn resolve_atom(section: &AtomSection, violations: &mut Vec<String>) -> Option<AtomModel> {
    let atom = match (section.softcore_depth, section.softcore_width) {
        (None, None) => Some(AtomModel::xenon()),
        (depth, width) => {
            let default = AtomModel::xenon();
            collect(
                AtomModel::new(
                    depth.unwrap_or(default.softcore_depth),
                    width.unwrap_or(default.softcore_width),
                ),
                violations,
            )
        }
    };
    match (atom, section.target_ground_energy) {
        (Some(a), Some(target)) => Some(a.with_target(target)),
        (a, None) => a,
        (None, _) => None,
    }
}

fn resolve_drive(section: &DriveSection, violations: &mut Vec<String>) -> Option<DriveField> {
    let frequency = match (section.frequency, section.wavelength_nm) {
        (Some(_), Some(_)) => {
            violations
                .push("drive frequency and wavelength_nm are mutually exclusive".to_string());
            None
        }
        (Some(f), None) => Some(f),
        (None, Some(nm)) => {
            if nm > 0.0 && nm.is_finite() {
                Some(WAVELENGTH_TO_FREQUENCY / nm)
            } else {
                violations.push(format!("wavelength_nm must be > 0, got {nm}"));
                None
            }
        }
        (None, None) => Some(0.057),
    };
    let amplitude = match (section.amplitude, section.intensity_w_cm2) {
        (Some(_), Some(_)) => {
            violations
                .push("drive amplitude and intensity_W_cm2 are mutually exclusive".to_string());
            None
        }
        (Some(a), None) => Some(a),
        (None, Some(i)) => {
            if i >= 0.0 && i.is_finite() {
                Some((i / INTENSITY_PER_AU).sqrt())
            } else {
                violations.push(format!("intensity_W_cm2 must be ≥ 0, got {i}"));
                None
            }
        }
        (None, None) => Some(0.04),
    };
    match (amplitude, frequency) {
        (Some(a), Some(f)) => collect(DriveField::new(a, f), violations),
        _ => None,
    }
}

fn resolve_cavity(
    section: &CavitySection,
    index: usize,
    drive: Option<&DriveField>,
    violations: &mut Vec<String>,
) -> Option<CavityConfig> {
    let frequency = match (section.frequency, section.frequency_over_drive) {
        (Some(_), Some(_)) => {
            violations.push(format!(
                "cavity #{index}: frequency and frequency_over_drive are mutually exclusive"
            ));
            None
        }
        (Some(f), None) => Some(f),
        // A drive failure is already reported; do not pile on a second message.
        (None, Some(r)) => drive.map(|d| r * d.frequency),
        (None, None) => {
            violations.push(format!(
                "cavity #{index}: one of frequency or frequency_over_drive is required"
            ));
            None
        }
    };
    if section.coupling.is_none() {
        violations.push(format!("cavity #{index}: coupling is required"));
    }
    let (frequency, coupling, drive) = (frequency?, section.coupling?, drive?);
    collect(
        CavityConfig::new(frequency, coupling, drive.frequency),
        violations,
    )
}

fn resolve_sweep(section: &SweepSection, violations: &mut Vec<String>) -> Option<SweepSpec> {
    let mut ok = true;
    let omega = section.omega_over_drive.clone().unwrap_or_default();
    if omega.is_empty() {
        violations.push("sweep.omega_over_drive needs at least one value".to_string());
        ok = false;
    }
    let couplings = section.couplings.clone().unwrap_or_default();
    if couplings.is_empty() {
        violations.push("sweep.couplings needs at least one value".to_string());
        ok = false;
    }
    if omega.iter().chain(&couplings).any(|v| !v.is_finite()) {
        violations.push("sweep values must be finite".to_string());
        ok = false;
    }
    ok.then_some(SweepSpec {
        omega_over_drive: omega,
        couplings,
    })
}

fn resolve_pulse(section: &PulseSection, violations: &mut Vec<String>) -> Option<PulseSpec> {
    let mut ok = true;
    let window_min_order = section.window_min_order.unwrap_or(26.0);
    if !window_min_order.is_finite() {
        violations.push(format!(
            "pulse.window_min_order must be finite, got {window_min_order}"
        ));
        ok = false;
    }
    let samples_per_period = section
        .samples_per_period
        .unwrap_or(DEFAULT_SAMPLES_PER_PERIOD);
    if samples_per_period < 2 {
        violations.push(format!(
            "pulse.samples_per_period must be at least 2, got {samples_per_period}"
        ));
        ok = false;
    }
    let num_periods = section.num_periods.unwrap_or(DEFAULT_NUM_PERIODS);
    if num_periods == 0 {
        violations.push("pulse.num_periods must be at least 1".to_string());
        ok = false;
    }
    let phase = match (section.phase.as_deref(), section.delay_periods) {
        (Some("retained"), None) => Some(PhaseMode::Retained),
        (Some("retained"), Some(_)) => {
            violations
                .push("pulse.delay_periods applies to transform_limited phases only".to_string());
            None
        }
        (Some("transform_limited") | None, None) => Some(PhaseMode::TransformLimited),
        (Some("transform_limited") | None, Some(delay)) => {
            if delay.is_finite() {
                Some(PhaseMode::LinearDelay(delay))
            } else {
                violations.push(format!(
                    "pulse.delay_periods must be finite, got {delay}"
                ));
                None
            }
        }
        (Some(other), _) => {
            violations.push(format!(
                "pulse.phase must be \"transform_limited\" or \"retained\", got \"{other}\""
            ));
            None
        }
    };
    let blocked_orders = section.blocked_orders.clone().unwrap_or_default();
    if blocked_orders.iter().any(|o| !o.is_finite()) {
        violations.push("pulse.blocked_orders must be finite".to_string());
        ok = false;
    }
    let block_tolerance = section.block_tolerance.unwrap_or(1e-6);
    if !(block_tolerance > 0.0) || !block_tolerance.is_finite() {
        violations.push(format!(
            "pulse.block_tolerance must be > 0, got {block_tolerance}"
        ));
        ok = false;
    }
    match (ok, phase) {
        (true, Some(phase)) => Some(PulseSpec {
            window_min_order,
            samples_per_period,
            num_periods,
            phase,
            blocked_orders,
            block_tolerance,
        }),
        _ => None,
    }
}

/// Built-in run configurations, one per figure panel of the study this tool
/// reproduces. The text form doubles as a user-editable starting point via
/// `--seed-figure`.
pub fn preset_toml(panel: &str) -> Option<&'static str> {
    Some(match panel {
        // Total-intensity sweep over the cavity parameter neighborhood.
        "a" => {
            "[sweep]\n\
             omega_over_drive = [4.55, 5.55, 6.45, 7.35, 8.25]\n\
             couplings = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25]\n"
        }
        // No-cavity odd-harmonic spectrum at the default drive.
        "b1" => "",
        // Single cavity at 6.45 ω0 with the two couplings of the study.
        "b2" => {
            "[[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.229\n"
        }
        "b3" => {
            "[[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.235\n"
        }
        // Transform-limited trains from the cutoff window (order > 26).
        "c1" => {
            "[pulse]\n\
             window_min_order = 26.0\n"
        }
        "c2" => {
            "[[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.229\n\
             \n\
             [pulse]\n\
             window_min_order = 26.0\n"
        }
        // Eight periods so two full beats of the slow envelope are visible.
        "c3" => {
            "[[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.235\n\
             \n\
             [pulse]\n\
             window_min_order = 26.0\n\
             num_periods = 8\n"
        }
        // Same cavity with the odd harmonics blocked downstream.
        "c4" => {
            "[[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.235\n\
             \n\
             [pulse]\n\
             window_min_order = 26.0\n\
             blocked_orders = [\n\
                 1.0, 3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0, 17.0, 19.0, 21.0, 23.0,\n\
                 25.0, 27.0, 29.0, 31.0, 33.0, 35.0, 37.0, 39.0, 41.0, 43.0, 45.0,\n\
             ]\n"
        }
        // Two cavities in a row: the b2 and b3 cavities together.
        "d1" => {
            "[[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.229\n\
             \n\
             [[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.235\n"
        }
        // Ten cavities spanning couplings 0.238..0.256.
        "d2" => {
            "[[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.238\n\
             \n\
             [[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.24\n\
             \n\
             [[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.242\n\
             \n\
             [[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.244\n\
             \n\
             [[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.246\n\
             \n\
             [[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.248\n\
             \n\
             [[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.25\n\
             \n\
             [[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.252\n\
             \n\
             [[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.254\n\
             \n\
             [[cavity]]\n\
             frequency_over_drive = 6.45\n\
             coupling = 0.256\n"
        }
        _ => return None,
    })
}
