//! Shared run machinery: cached resonance solves, artifact writing, and the
//! command bodies the subcommands and `reproduce` presets both call.

use std::path::{Path, PathBuf};

use serde::Serialize;

use hhg_core::atom::solve_field_free;
use hhg_core::cache::{cache_key, load_state, store_state, CacheLookup};
use hhg_core::cavity::CavitySpectrum;
use hhg_core::chain::{
    apply_filter, chain_spectrum, sweep_total_intensity, CavityChain, PolaritonInputs,
    SpectralFilter,
};
use hhg_core::floquet::{
    assemble_floquet_operator, solve_resonance, FloquetBasisSpec, FloquetEigenstate,
    ResonanceOptions, StateLabel,
};
use hhg_core::io::{
    cavity_spectrum_csv, peaks_json, spectrum_csv, spectrum_json, sweep_csv, train_csv,
    write_text, OutputStamp,
};
use hhg_core::pulse::{measure_spacing, synthesize_train, SpacingReport};
use hhg_core::spectrum::{spectrum, HarmonicSpectrum};
use hhg_core::tdse::propagate_and_spectrum;
use hhg_core::{Error, Result};

use crate::config::RunConfig;

/// Everything a command body needs: the resolved config, its digest, the
/// output directory, and the cache root (`None` disables caching).
pub struct Context {
    pub config: RunConfig,
    pub digest: String,
    pub out: PathBuf,
    pub cache: Option<PathBuf>,
}

/// What a resonance solve is keyed by in the cache: every input that changes
/// the eigenstate. Serialized deterministically, then hashed.
#[derive(Serialize)]
struct SolveKey<'a> {
    atom: &'a hhg_core::atom::AtomModel,
    grid: &'a hhg_core::grid::SpatialGrid,
    scaling: &'a hhg_core::atom::ComplexScalingConfig,
    drive: &'a hhg_core::floquet::DriveField,
    channels: u32,
    label: &'static str,
}

impl Context {
    pub fn new(config: RunConfig, out: PathBuf, cache: Option<PathBuf>) -> Self {
        let digest = config.digest();
        Context {
            config,
            digest,
            out,
            cache,
        }
    }

    fn stamp(&self, source: &str) -> OutputStamp {
        OutputStamp::new(self.digest.clone(), source)
    }

    fn write(&self, name: &str, text: &str) -> Result<()> {
        let path = self.out.join(name);
        write_text(&path, text)?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn basis(&self) -> FloquetBasisSpec {
        FloquetBasisSpec::symmetric(self.config.channels, self.config.grid)
    }

    /// Solves (or recalls from cache) the requested dressed state.
    fn solve_state(&self, label: StateLabel) -> Result<FloquetEigenstate> {
        let label_name = match label {
            StateLabel::FLg => "ground",
            StateLabel::FLe => "excited",
            StateLabel::Other => "other",
        };
        let key = cache_key(&SolveKey {
            atom: &self.config.atom,
            grid: &self.config.grid,
            scaling: &self.config.scaling,
            drive: &self.config.drive,
            channels: self.config.channels,
            label: label_name,
        })?;
        if let Some(dir) = &self.cache {
            match load_state(dir, &key) {
                CacheLookup::Hit(state) => return Ok(state),
                CacheLookup::Miss => {}
                CacheLookup::Corrupt(reason) => {
                    eprintln!("warning: cache entry unusable ({reason}); recomputing");
                }
            }
        }

        let seed_count = match label {
            StateLabel::FLg => 1,
            _ => 2,
        };
        let seeds = solve_field_free(
            &self.config.atom,
            &self.config.grid,
            &self.config.scaling,
            seed_count,
        )?;
        let basis = self.basis();
        let op = assemble_floquet_operator(
            &self.config.atom,
            &self.config.grid,
            &self.config.scaling,
            &self.config.drive,
            &basis,
        )?;
        let options = match label {
            StateLabel::FLg => ResonanceOptions::ground(),
            _ => ResonanceOptions::excited(),
        };
        let state = solve_resonance(&op, &seeds[seed_count - 1], &basis, &options)?;

        if let Some(dir) = &self.cache {
            if let Err(e) = store_state(dir, &key, &state) {
                eprintln!("warning: could not store cache entry: {e}");
            }
        }
        Ok(state)
    }

    fn ground_spectrum(&self) -> Result<HarmonicSpectrum> {
        let flg = self.solve_state(StateLabel::FLg)?;
        spectrum(&flg, self.config.m_max)
    }

    fn polariton_inputs(&self) -> Result<PolaritonInputs> {
        let flg = self.solve_state(StateLabel::FLg)?;
        let fle = self.solve_state(StateLabel::FLe)?;
        PolaritonInputs::from_states(&flg, &fle, self.config.m_max)
    }

    fn single_cavity(&self) -> Result<CavitySpectrum> {
        let Some(cavity) = self.config.cavities.first() else {
            return Err(Error::InvalidConfig(vec![
                "this command needs at least one [[cavity]] section".to_string(),
            ]));
        };
        self.polariton_inputs()?
            .single_cavity(cavity, self.config.m_max)
    }

    fn chain(&self) -> Result<HarmonicSpectrum> {
        if self.config.cavities.is_empty() {
            return Err(Error::InvalidConfig(vec![
                "this command needs at least one [[cavity]] section".to_string(),
            ]));
        }
        let chain = CavityChain::new(self.config.cavities.clone())?;
        chain_spectrum(&chain, &self.polariton_inputs()?, self.config.m_max)
    }

    /// The spectrum the pulse synthesis draws from: the cavity chain when
    /// cavities are configured, the bare dressed-ground spectrum otherwise,
    /// with any configured blocking applied on top.
    fn pulse_source(&self) -> Result<HarmonicSpectrum> {
        let base = match self.config.cavities.len() {
            0 => self.ground_spectrum()?,
            1 => self.single_cavity()?.composed,
            _ => self.chain()?,
        };
        if self.config.pulse.blocked_orders.is_empty() {
            return Ok(base);
        }
        let filter = SpectralFilter::new(
            self.config.pulse.blocked_orders.clone(),
            self.config.pulse.block_tolerance,
        )?;
        Ok(apply_filter(&base, &filter))
    }
}

/// One solved dressed state in the `eigen` report.
#[derive(Serialize)]
struct EigenEntry {
    label: String,
    quasienergy_re: f64,
    quasienergy_im: f64,
    width: f64,
    symmetry: String,
    symmetry_residual: f64,
    target_overlap_abs: f64,
    eigen_residual: f64,
}

#[derive(Serialize)]
struct EigenJson<'a> {
    #[serde(flatten)]
    stamp: &'a OutputStamp,
    states: Vec<EigenEntry>,
}

fn eigen_entry(state: &FloquetEigenstate) -> EigenEntry {
    EigenEntry {
        label: format!("{:?}", state.label),
        quasienergy_re: state.quasienergy.re,
        quasienergy_im: state.quasienergy.im,
        width: state.width(),
        symmetry: format!("{:?}", state.symmetry),
        symmetry_residual: state.symmetry_residual,
        target_overlap_abs: state.target_overlap.norm(),
        eigen_residual: state.eigen_residual,
    }
}

pub fn run_eigen(ctx: &Context, prefix: &str) -> Result<()> {
    let flg = ctx.solve_state(StateLabel::FLg)?;
    let fle = ctx.solve_state(StateLabel::FLe)?;
    let stamp = ctx.stamp("eigen");
    let doc = EigenJson {
        stamp: &stamp,
        states: vec![eigen_entry(&flg), eigen_entry(&fle)],
    };
    let text = serde_json::to_string_pretty(&doc)?;
    ctx.write(&format!("{prefix}eigen.json"), &text)
}

pub fn run_spectrum(ctx: &Context, prefix: &str) -> Result<()> {
    let spec = ctx.ground_spectrum()?;
    let stamp = ctx.stamp("spectrum");
    ctx.write(&format!("{prefix}spectrum.csv"), &spectrum_csv(&spec, &stamp))?;
    ctx.write(
        &format!("{prefix}spectrum.json"),
        &spectrum_json(&spec, &stamp)?,
    )
}

pub fn run_cavity(ctx: &Context, prefix: &str) -> Result<()> {
    let cav = ctx.single_cavity()?;
    let stamp = ctx.stamp("cavity");
    ctx.write(
        &format!("{prefix}cavity_parts.csv"),
        &cavity_spectrum_csv(&cav, &stamp),
    )?;
    ctx.write(
        &format!("{prefix}cavity_spectrum.csv"),
        &spectrum_csv(&cav.composed, &stamp),
    )
}

pub fn run_chain(ctx: &Context, prefix: &str) -> Result<()> {
    let spec = ctx.chain()?;
    let stamp = ctx.stamp("chain");
    ctx.write(
        &format!("{prefix}chain_spectrum.csv"),
        &spectrum_csv(&spec, &stamp),
    )
}

pub fn run_sweep(ctx: &Context, prefix: &str) -> Result<()> {
    let Some(sweep) = &ctx.config.sweep else {
        return Err(Error::InvalidConfig(vec![
            "the sweep command needs a [sweep] section".to_string(),
        ]));
    };
    let omegas: Vec<f64> = sweep
        .omega_over_drive
        .iter()
        .map(|r| r * ctx.config.drive.frequency)
        .collect();
    let inputs = ctx.polariton_inputs()?;
    let points = sweep_total_intensity(&inputs, &omegas, &sweep.couplings, ctx.config.m_max)?;
    let stamp = ctx.stamp("sweep");
    ctx.write(&format!("{prefix}sweep.csv"), &sweep_csv(&points, &stamp))
}

pub fn run_pulse(ctx: &Context, prefix: &str) -> Result<()> {
    let source = ctx.pulse_source()?;
    let pulse = &ctx.config.pulse;
    let train = synthesize_train(
        &source,
        pulse.window_min_order,
        pulse.samples_per_period,
        pulse.num_periods,
        pulse.phase,
    )?;
    let spacing: Option<SpacingReport> = match measure_spacing(&train) {
        Ok(report) => Some(report),
        Err(Error::TooFewPeaks { .. }) => None,
        Err(other) => return Err(other),
    };
    let stamp = ctx.stamp("pulse");
    ctx.write(&format!("{prefix}train.csv"), &train_csv(&train, &stamp))?;
    ctx.write(
        &format!("{prefix}peaks.json"),
        &peaks_json(&train, spacing.as_ref(), &stamp)?,
    )
}

pub fn run_oracle(ctx: &Context, prefix: &str) -> Result<()> {
    let spec = propagate_and_spectrum(
        &ctx.config.atom,
        &ctx.config.grid,
        &ctx.config.drive,
        &ctx.config.oracle,
    )?;
    let stamp = ctx.stamp("tdse");
    ctx.write(
        &format!("{prefix}oracle_spectrum.csv"),
        &spectrum_csv(&spec, &stamp),
    )
}

/// Runs the artifact set a figure panel calls for, with panel-prefixed names.
pub fn run_panel(ctx: &Context, panel: &str) -> Result<()> {
    let prefix = format!("{panel}_");
    match panel {
        "a" => run_sweep(ctx, &prefix),
        "b1" => run_spectrum(ctx, &prefix),
        "b2" | "b3" => run_cavity(ctx, &prefix),
        "c1" | "c2" | "c3" | "c4" => run_pulse(ctx, &prefix),
        "d1" | "d2" => run_chain(ctx, &prefix),
        other => Err(Error::InvalidConfig(vec![format!(
            "unknown figure panel {other}"
        )])),
    }
}

/// Writes the preset TOML for a panel so it can be inspected or edited.
pub fn write_preset(out: &Path, panel: &str, text: &str) -> Result<()> {
    let path = out.join(format!("{panel}.toml"));
    write_text(&path, text)?;
    println!("wrote {}", path.display());
    Ok(())
}
