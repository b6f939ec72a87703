//! Deterministic text outputs: CSV tables and JSON mirrors.
//!
//! Every artifact opens with the same three comment lines — tool version,
//! a digest of the resolved configuration, and the producing command — and
//! contains nothing run-dependent beyond that (no timestamps, no hostnames,
//! no locale formatting). Floats print through Rust's shortest-roundtrip
//! `Display`, so rerunning the same configuration rewrites byte-identical
//! files; diffing two runs diffs the physics.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::cavity::CavitySpectrum;
use crate::chain::SweepPoint;
use crate::error::{Error, Result};
use crate::pulse::{PulseTrain, SpacingReport};
use crate::spectrum::HarmonicSpectrum;

/// Provenance lines stamped at the top of every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputStamp {
    /// Version of the producing build.
    pub tool_version: String,
    /// Hex digest of the fully resolved configuration.
    pub config_digest: String,
    /// What produced the file (subcommand or pipeline stage).
    pub source: String,
}

impl OutputStamp {
    pub fn new(config_digest: impl Into<String>, source: impl Into<String>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: config_digest.into(),
            source: source.into(),
        }
    }

    fn comment_header(&self) -> String {
        format!(
            "# tool_version: {}\n# config_digest: {}\n# source: {}\n",
            self.tool_version, self.config_digest, self.source
        )
    }
}

/// Escapes one CSV field: quoted only when it contains a delimiter, quote,
/// or line break, so numeric columns stay bare.
fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// Spectrum table: one row per harmonic line, ascending order.
pub fn spectrum_csv(spectrum: &HarmonicSpectrum, stamp: &OutputStamp) -> String {
    let mut out = stamp.comment_header();
    out.push_str("order,re_amplitude,im_amplitude,intensity\n");
    for e in spectrum.entries() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            e.order,
            e.amplitude.re,
            e.amplitude.im,
            e.intensity()
        );
    }
    out
}

/// Cavity spectrum table with a `part` column tagging each line as the odd
/// comb or one of the Rabi side combs; the composed sum is reconstructable
/// by summing amplitudes at equal order.
pub fn cavity_spectrum_csv(spectrum: &CavitySpectrum, stamp: &OutputStamp) -> String {
    let mut out = stamp.comment_header();
    out.push_str("order,re_amplitude,im_amplitude,intensity,part\n");
    let mut rows: Vec<(f64, crate::C64, &'static str)> = Vec::new();
    for (part, name) in [
        (&spectrum.odd_part, "odd"),
        (&spectrum.side_plus, "side_plus"),
        (&spectrum.side_minus, "side_minus"),
    ] {
        for e in part.entries() {
            rows.push((e.order, e.amplitude, name));
        }
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(b.2)));
    for (order, amplitude, part) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            order,
            amplitude.re,
            amplitude.im,
            amplitude.norm_sqr(),
            part
        );
    }
    out
}

/// Sweep table: the full ω × ε grid, failed points carried with their error
/// text in `status` and an empty intensity field.
pub fn sweep_csv(points: &[SweepPoint], stamp: &OutputStamp) -> String {
    let mut out = stamp.comment_header();
    out.push_str("omega_cav_over_omega0,eps_cav,I_tot,status\n");
    for p in points {
        let intensity = match p.total_intensity {
            Some(v) => v.to_string(),
            None => String::new(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{}",
            p.omega_over_drive,
            p.coupling,
            intensity,
            csv_field(&p.status)
        );
    }
    out
}

/// Synthesized pulse-train table: intensity versus time in drive periods.
pub fn train_csv(train: &PulseTrain, stamp: &OutputStamp) -> String {
    let mut out = stamp.comment_header();
    out.push_str("t_over_T0,intensity\n");
    for (&t, &i) in train.times().iter().zip(train.intensity()) {
        let _ = writeln!(out, "{t},{i}");
    }
    out
}

#[derive(Serialize)]
struct SpectrumEntryJson {
    order: f64,
    re_amplitude: f64,
    im_amplitude: f64,
    intensity: f64,
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    #[serde(flatten)]
    stamp: &'a OutputStamp,
    drive_frequency: f64,
    entries: Vec<SpectrumEntryJson>,
}

/// JSON mirror of [`spectrum_csv`].
pub fn spectrum_json(spectrum: &HarmonicSpectrum, stamp: &OutputStamp) -> Result<String> {
    let doc = SpectrumJson {
        stamp,
        drive_frequency: spectrum.drive_frequency(),
        entries: spectrum
            .entries()
            .iter()
            .map(|e| SpectrumEntryJson {
                order: e.order,
                re_amplitude: e.amplitude.re,
                im_amplitude: e.amplitude.im,
                intensity: e.intensity(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

#[derive(Serialize)]
struct PeaksJson<'a> {
    #[serde(flatten)]
    stamp: &'a OutputStamp,
    samples_per_period: usize,
    num_periods: usize,
    mean_intensity: f64,
    peak_times_over_period: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    peak_spacing_over_period: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    peak_spacing_spread: Option<f64>,
}

/// JSON report of the detected pulse-train peaks and, when measured, their
/// spacing statistics.
pub fn peaks_json(
    train: &PulseTrain,
    spacing: Option<&SpacingReport>,
    stamp: &OutputStamp,
) -> Result<String> {
    let doc = PeaksJson {
        stamp,
        samples_per_period: train.samples_per_period(),
        num_periods: train.num_periods(),
        mean_intensity: train.mean_intensity(),
        peak_times_over_period: train.peaks(),
        peak_spacing_over_period: spacing.map(|s| s.spacing),
        peak_spacing_spread: spacing.map(|s| s.spread),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Writes an artifact, tagging failures with the destination path.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}
