//! Attosecond pulse-train synthesis from a windowed harmonic spectrum and
//! the time-domain statistics used to characterize the trains.
//!
//! The transform-limited train takes every spectral line strictly above the
//! window edge, zeroes its phase, and sums real cosines on a uniform time
//! grid measured in drive periods T0. Pulse spacing comes from a
//! keep-the-tallest peak detector; sub-pulse structure that the detector's
//! half-maximum threshold hides is probed through the autocorrelation of the
//! carrier-free envelope, which the synthesizer computes alongside the field
//! as the magnitude of the analytic (complex-exponential) sum.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::HarmonicSpectrum;
use crate::C64;

/// Default time resolution: samples per optical period.
pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 4096;
/// Default synthesis span in optical periods.
pub const DEFAULT_NUM_PERIODS: usize = 4;
/// Peaks must clear this fraction of the global intensity maximum.
pub const PEAK_THRESHOLD: f64 = 0.5;
/// Minimum separation between reported peaks, in units of T0.
pub const PEAK_MIN_SEPARATION: f64 = 0.05;

/// How the spectral phases enter the synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhaseMode {
    /// Zero all phases (the transform limit): field = Σ |A_k| cos(2π m_k τ).
    TransformLimited,
    /// Keep the complex phases the spectrum came with.
    Retained,
    /// Transform-limited plus a linear phase delaying the train by this many
    /// periods: field = Σ |A_k| cos(2π m_k (τ − delay)).
    LinearDelay(f64),
}

/// A synthesized train: uniform time axis in units of T0 spanning an integer
/// number of periods, nonnegative intensity, the carrier-free envelope
/// intensity, and the detected peak times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseTrain {
    times: Vec<f64>,
    intensity: Vec<f64>,
    envelope: Vec<f64>,
    peaks: Vec<f64>,
    samples_per_period: usize,
    num_periods: usize,
}

impl PulseTrain {
    /// Time axis in units of T0.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// |field|²(t), same length as `times`.
    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    /// Carrier-free envelope intensity |Σ_k |A_k| e^{i(2π m_k τ + φ_k)}|².
    pub fn envelope(&self) -> &[f64] {
        &self.envelope
    }

    /// Detected peak times (units of T0), ascending.
    pub fn peaks(&self) -> &[f64] {
        &self.peaks
    }

    pub fn samples_per_period(&self) -> usize {
        self.samples_per_period
    }

    pub fn num_periods(&self) -> usize {
        self.num_periods
    }

    /// One time sample in units of T0 — the resolution of every reported time.
    pub fn sample_resolution(&self) -> f64 {
        1.0 / self.samples_per_period as f64
    }

    /// Mean of |field|² over the whole span.
    pub fn mean_intensity(&self) -> f64 {
        self.intensity.iter().sum::<f64>() / self.intensity.len() as f64
    }
}

/// Synthesizes a pulse train from every line with order strictly greater
/// than `window_min_order`.
pub fn synthesize_train(
    spec: &HarmonicSpectrum,
    window_min_order: f64,
    samples_per_period: usize,
    num_periods: usize,
    mode: PhaseMode,
) -> Result<PulseTrain> {
    let mut violations = Vec::new();
    if samples_per_period < 2 {
        violations.push(format!(
            "samples per period must be at least 2, got {samples_per_period}"
        ));
    }
    if num_periods == 0 {
        violations.push("number of periods must be at least 1".to_string());
    }
    if !window_min_order.is_finite() {
        violations.push(format!("window edge must be finite, got {window_min_order}"));
    }
    if !violations.is_empty() {
        return Err(Error::InvalidConfig(violations));
    }

    let window: Vec<(f64, f64, f64)> = spec
        .entries()
        .iter()
        .filter(|e| e.order > window_min_order)
        .map(|e| {
            let phase = match mode {
                PhaseMode::TransformLimited => 0.0,
                PhaseMode::Retained => e.amplitude.arg(),
                PhaseMode::LinearDelay(delay) => {
                    -2.0 * std::f64::consts::PI * e.order * delay
                }
            };
            (e.order, e.amplitude.norm(), phase)
        })
        .collect();
    if window.is_empty() {
        return Err(Error::EmptyWindow {
            min_order: window_min_order,
        });
    }

    let max_order = window.iter().map(|w| w.0).fold(f64::MIN, f64::max);
    if (samples_per_period as f64) <= 2.0 * max_order {
        return Err(Error::Undersampled {
            samples_per_period,
            max_order,
            required: (2.0 * max_order).floor() as usize + 1,
        });
    }

    let n = samples_per_period * num_periods;
    let mut times = Vec::with_capacity(n);
    let mut intensity = Vec::with_capacity(n);
    let mut envelope = Vec::with_capacity(n);
    for j in 0..n {
        let tau = j as f64 / samples_per_period as f64;
        let mut field = 0.0;
        let mut analytic = C64::new(0.0, 0.0);
        for &(order, magnitude, phase) in &window {
            let arg = 2.0 * std::f64::consts::PI * order * tau + phase;
            field += magnitude * arg.cos();
            analytic += magnitude * C64::from_polar(1.0, arg);
        }
        times.push(tau);
        intensity.push(field * field);
        envelope.push(analytic.norm_sqr());
    }

    let peaks = detect_peaks(&intensity, samples_per_period);
    Ok(PulseTrain {
        times,
        intensity,
        envelope,
        peaks,
        samples_per_period,
        num_periods,
    })
}

/// Circular local maxima above [`PEAK_THRESHOLD`]·max, thinned tallest-first
/// so no two survivors sit closer than [`PEAK_MIN_SEPARATION`]·T0 (circular
/// distance). Returned as times in units of T0, ascending.
fn detect_peaks(intensity: &[f64], samples_per_period: usize) -> Vec<f64> {
    let n = intensity.len();
    let max = intensity.iter().copied().fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let floor = PEAK_THRESHOLD * max;
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&j| {
            let prev = intensity[(j + n - 1) % n];
            let next = intensity[(j + 1) % n];
            intensity[j] >= floor && intensity[j] >= prev && intensity[j] >= next
        })
        .collect();
    candidates.sort_by(|&a, &b| {
        intensity[b]
            .partial_cmp(&intensity[a])
            .expect("finite intensities")
            .then(a.cmp(&b))
    });

    let min_sep = PEAK_MIN_SEPARATION * samples_per_period as f64;
    let mut accepted: Vec<usize> = Vec::new();
    for j in candidates {
        let clear = accepted.iter().all(|&k| {
            let direct = (j as f64 - k as f64).abs();
            direct.min(n as f64 - direct) >= min_sep
        });
        if clear {
            accepted.push(j);
        }
    }
    accepted.sort_unstable();
    accepted
        .into_iter()
        .map(|j| j as f64 / samples_per_period as f64)
        .collect()
}

/// Median inter-peak gap and the largest deviation from it, in units of T0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingReport {
    pub spacing: f64,
    pub spread: f64,
}

/// Dominant pulse spacing of a train from its detected peaks.
pub fn measure_spacing(train: &PulseTrain) -> Result<SpacingReport> {
    let peaks = train.peaks();
    if peaks.len() < 2 {
        return Err(Error::TooFewPeaks { found: peaks.len() });
    }
    let mut gaps: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(|a, b| a.partial_cmp(b).expect("finite gaps"));
    let spacing = if gaps.len() % 2 == 1 {
        gaps[gaps.len() / 2]
    } else {
        0.5 * (gaps[gaps.len() / 2 - 1] + gaps[gaps.len() / 2])
    };
    let spread = gaps
        .iter()
        .map(|g| (g - spacing).abs())
        .fold(0.0_f64, f64::max);
    Ok(SpacingReport { spacing, spread })
}

/// Lag (units of T0) of the strongest non-zero-lag local maximum of the
/// envelope-intensity circular autocorrelation, searched for lags of at
/// least a quarter period up to half the span.
///
/// This sees through sub-pulses that confuse naive gap statistics: a train
/// repeating every 2T0 with weaker satellites still autocorrelates most
/// strongly at 2T0.
pub fn dominant_envelope_lag(train: &PulseTrain) -> Result<f64> {
    let e = train.envelope();
    let n = e.len();
    let spp = train.samples_per_period() as f64;

    // Circular autocorrelation through the power spectrum.
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut buf: Vec<C64> = e.iter().map(|&v| C64::new(v, 0.0)).collect();
    forward.process(&mut buf);
    for v in &mut buf {
        *v = C64::new(v.norm_sqr(), 0.0);
    }
    inverse.process(&mut buf);
    let corr: Vec<f64> = buf.iter().map(|v| v.re / n as f64).collect();

    let min_lag = (0.25 * spp).round() as usize;
    let max_lag = n / 2;
    let mut best: Option<(usize, f64)> = None;
    for lag in min_lag..=max_lag {
        let prev = corr[lag - 1];
        let next = corr[(lag + 1) % n];
        if corr[lag] >= prev && corr[lag] >= next && best.map_or(true, |(_, b)| corr[lag] > b) {
            best = Some((lag, corr[lag]));
        }
    }
    let (lag, _) = best.ok_or(Error::TooFewPeaks { found: 1 })?;
    Ok(lag as f64 / spp)
}
