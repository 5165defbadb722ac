//! Scenario configs, figure presets, and file output for the `cavbec` binary.
//!
//! A scenario is a JSON document with one task (spectrum, stability sweep,
//! steady state, or calibration), a parameter block (laboratory or model
//! units, all frequencies unit-tagged), and an optional grid/branch-policy/
//! output section. Runners write plot-ready CSV plus JSON metadata sidecars;
//! on any failure every file written by the run is removed again.
//!
//! Data files are deterministic: floats are rendered with the shortest
//! round-trip representation and no timestamps are embedded anywhere.

pub mod presets;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::calib::{build_curve, estimate_omega_sw, CalibrationCurve, Protocol, SplittingUnit};
use crate::lindyn::{classified_working_points, mode_report, ModeReport};
use crate::params::{derive_model_params, ModelParams, PhysicalParams, SwaveSpec};
use crate::spectra::{
    intensity_spectrum, phase_noise_spectrum, squeezing_spectrum, FrequencyGrid, GridUnit,
    NoiseModel, PhaseChoice, SpectrumKind, SpectrumSeries,
};
use crate::steady::{select_branch, select_branch_default, BranchPolicy, WorkingPoint};
use crate::{Error, Result};

/// Data-file format selected with `--format`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    Csv,
    Json,
}

/// Which spectrum a scenario asks for.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKindSpec {
    PhaseNoise,
    Intensity,
    SqueezeOptimal,
    SqueezeFixed { phase: f64 },
}

impl SpectrumKindSpec {
    fn default_stem(self) -> &'static str {
        match self {
            SpectrumKindSpec::PhaseNoise => "phase_noise",
            SpectrumKindSpec::Intensity => "intensity",
            SpectrumKindSpec::SqueezeOptimal => "squeeze_optimal",
            SpectrumKindSpec::SqueezeFixed { .. } => "squeeze_fixed",
        }
    }
}

/// Sweep over the scattering frequency, recoil units.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

/// The single task of a scenario.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TaskSpec {
    Spectrum { kind: SpectrumKindSpec },
    StabilitySweep { omega_sw: SweepSpec },
    SteadyState,
    Calibration { omega_sw: SweepSpec },
}

/// Model-unit parameter block (everything in recoil units).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub atom_count: f64,
    pub lattice_depth: f64,
    pub stark_detuning: f64,
    pub swave_frequency: f64,
    pub cavity_decay: f64,
    pub bec_decay: f64,
    pub drive_amplitude: f64,
    #[serde(default = "default_recoil")]
    pub recoil_rad_s: f64,
}

fn default_recoil() -> f64 {
    1.0
}

/// Parameter block: laboratory inputs or direct model units.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamsSpec {
    Physical(Box<PhysicalParams>),
    Model(ModelConfig),
}

impl ParamsSpec {
    /// Derive model parameters, optionally overriding the scattering
    /// frequency (used by sweeps).
    pub fn model(&self, omega_sw: Option<f64>) -> Result<ModelParams> {
        match self {
            ParamsSpec::Physical(p) => {
                let mut p = (**p).clone();
                if let Some(w) = omega_sw {
                    p.swave = SwaveSpec::Frequency(crate::params::FreqValue::omega_r(w));
                }
                derive_model_params(&p)
            }
            ParamsSpec::Model(c) => ModelParams::from_model_inputs(
                c.atom_count,
                c.lattice_depth,
                c.stark_detuning,
                omega_sw.unwrap_or(c.swave_frequency),
                c.cavity_decay,
                c.bec_decay,
                c.drive_amplitude,
                c.recoil_rad_s,
            ),
        }
    }
}

/// Grid block of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub unit: GridUnit,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub stem: String,
}

/// A complete scenario config.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub task: TaskSpec,
    pub params: ParamsSpec,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub branch_policy: Option<BranchPolicy>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn grid(&self) -> Result<FrequencyGrid> {
        match self.grid {
            Some(g) => FrequencyGrid::linear(g.min, g.max, g.points, g.unit),
            None => Ok(FrequencyGrid::default_symmetric(GridUnit::Kappa)),
        }
    }
}

/// Tracks files written by one run so they can be removed if the run fails.
struct OutputStage {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl OutputStage {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }

    fn discard(&self) {
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
    }

    fn into_files(self) -> Vec<PathBuf> {
        self.files
    }
}

fn render_series_csv(series: &SpectrumSeries) -> String {
    let mut out = format!("# unit: {}\n", series.grid.unit.column_name());
    out.push_str(&format!("omega,{}\n", series.kind.column_name()));
    for (x, v) in series.grid.values.iter().zip(series.values.iter()) {
        out.push_str(&format!("{x},{v}\n"));
    }
    out
}

fn series_file(
    stage: &mut OutputStage,
    stem: &str,
    series: &SpectrumSeries,
    format: DataFormat,
) -> Result<()> {
    match format {
        DataFormat::Csv => stage.write(&format!("{stem}.csv"), &render_series_csv(series)),
        DataFormat::Json => stage.write(
            &format!("{stem}.json"),
            &serde_json::to_string_pretty(series)?,
        ),
    }
}

fn select_working_point(
    m: &ModelParams,
    policy: Option<BranchPolicy>,
) -> Result<(WorkingPoint, Vec<String>)> {
    let points = classified_working_points(m)?;
    let mut warnings = Vec::new();
    let wp = match policy {
        Some(p) => select_branch(&points, p)?,
        None => {
            let (wp, warn) = select_branch_default(&points)?;
            warnings.extend(warn);
            wp
        }
    };
    if wp.regime_warning {
        warnings.push(
            "lattice depth times photon number exceeds the single-mode validity bound".into(),
        );
    }
    Ok((wp, warnings))
}

fn spectrum_meta(
    kind_name: &str,
    m: &ModelParams,
    wp: &WorkingPoint,
    grid: &FrequencyGrid,
    warnings: &[String],
) -> serde_json::Value {
    json!({
        "document": "spectrum_meta",
        "kind": kind_name,
        "route": "closed_form",
        "grid": {
            "unit": grid.unit.column_name(),
            "min": grid.values.first(),
            "max": grid.values.last(),
            "points": grid.values.len(),
        },
        "params_fingerprint": format!("{:016x}", m.fingerprint()),
        "model_params": m,
        "working_point": wp,
        "warnings": warnings,
    })
}

fn run_spectrum_task(
    scenario: &Scenario,
    kind: SpectrumKindSpec,
    stage: &mut OutputStage,
    format: DataFormat,
) -> Result<()> {
    let m = scenario.params.model(None)?;
    let (wp, warnings) = select_working_point(&m, scenario.branch_policy)?;
    let grid = scenario.grid()?;
    let noise = NoiseModel::vacuum();
    let stem = scenario
        .output
        .as_ref()
        .map(|o| o.stem.clone())
        .unwrap_or_else(|| kind.default_stem().to_string());

    let kind_name = match kind {
        SpectrumKindSpec::PhaseNoise => {
            let s = phase_noise_spectrum(&grid, &m, &wp, &noise)?;
            series_file(stage, &stem, &s, format)?;
            s.kind.column_name()
        }
        SpectrumKindSpec::Intensity => {
            let s = intensity_spectrum(&grid, &m, &wp, &noise)?;
            series_file(stage, &stem, &s, format)?;
            s.kind.column_name()
        }
        SpectrumKindSpec::SqueezeOptimal => {
            let out = squeezing_spectrum(&grid, &m, &wp, &noise, PhaseChoice::Optimal)?;
            series_file(stage, &stem, &out.spectrum, format)?;
            if let Some(phase) = &out.optimal_phase {
                series_file(stage, &format!("{stem}_phase"), phase, format)?;
            }
            "S_opt"
        }
        SpectrumKindSpec::SqueezeFixed { phase } => {
            let out = squeezing_spectrum(&grid, &m, &wp, &noise, PhaseChoice::Fixed(phase))?;
            series_file(stage, &stem, &out.spectrum, format)?;
            "S_phi"
        }
    };
    let meta = spectrum_meta(kind_name, &m, &wp, &grid, &warnings);
    stage.write(
        &format!("{stem}_meta.json"),
        &serde_json::to_string_pretty(&meta)?,
    )
}

fn sweep_values(s: &SweepSpec) -> Result<Vec<f64>> {
    if s.points < 1 || s.max.is_nan() || s.max < s.min || s.min.is_nan() || s.min < 0.0 {
        return Err(Error::Validation {
            field: "omega_sw",
            message: format!("invalid sweep [{}, {}] x {}", s.min, s.max, s.points),
        });
    }
    let step = if s.points == 1 {
        0.0
    } else {
        (s.max - s.min) / (s.points - 1) as f64
    };
    Ok((0..s.points).map(|i| s.min + i as f64 * step).collect())
}

fn run_stability_task(
    scenario: &Scenario,
    sweep: &SweepSpec,
    stage: &mut OutputStage,
) -> Result<()> {
    let values = sweep_values(sweep)?;
    let mut rows: Vec<(f64, ModeReport)> = Vec::with_capacity(values.len());
    for &wsw in &values {
        let m = scenario.params.model(Some(wsw))?;
        let (wp, _) = select_working_point(&m, scenario.branch_policy).or_else(|e| match e {
            // an unstable sample is still reported in a sweep
            Error::NoStableBranch => {
                let points = classified_working_points(&m)?;
                points
                    .first()
                    .cloned()
                    .map(|wp| (wp, Vec::new()))
                    .ok_or(Error::NoStableBranch)
            }
            other => Err(other),
        })?;
        rows.push((wsw, mode_report(&m, &wp)?));
    }

    let stem = scenario
        .output
        .as_ref()
        .map(|o| o.stem.clone())
        .unwrap_or_else(|| "stability".to_string());
    let kappa = scenario.params.model(Some(values[0]))?.cavity_decay;

    let mut csv = String::from(
        "omega_sw_over_omegaR,stable,margin_over_omegaR,dsplit_numeric_over_kappa,dsplit_analytic_over_kappa\n",
    );
    for (wsw, r) in &rows {
        let num = r
            .numeric_splitting
            .map_or("nan".into(), |d| format!("{}", d / kappa));
        let ana = r
            .analytic_splitting
            .map_or("nan".into(), |d| format!("{}", d / kappa));
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            wsw,
            if r.stable { 1 } else { 0 },
            r.margin,
            num,
            ana
        ));
    }
    stage.write(&format!("{stem}.csv"), &csv)?;

    let reports: Vec<serde_json::Value> = rows
        .iter()
        .map(|(wsw, r)| {
            let mut v = serde_json::to_value(r).expect("mode report serializes");
            v["omega_sw"] = json!(wsw);
            v
        })
        .collect();
    let meta = json!({
        "document": "stability_report",
        "reports": reports,
    });
    stage.write(
        &format!("{stem}_meta.json"),
        &serde_json::to_string_pretty(&meta)?,
    )
}

fn run_steady_task(scenario: &Scenario, stage: &mut OutputStage) -> Result<()> {
    let m = scenario.params.model(None)?;
    let detail = crate::steady::solve_steady_state_detailed(&m);
    let mut branches = detail.branches;
    for wp in branches.iter_mut() {
        let report = crate::lindyn::is_stable(&crate::lindyn::drift_matrix(&m, wp))?;
        wp.stable = Some(report.stable);
    }
    let selection = match scenario.branch_policy {
        Some(p) => select_branch(&branches, p).map(|wp| (wp, None)),
        None => select_branch_default(&branches),
    };
    let (selected, warning) = match selection {
        Ok(x) => (Some(x.0), x.1),
        Err(Error::NoStableBranch) => (None, Some("no stable branch".into())),
        Err(e) => return Err(e),
    };
    let stem = scenario
        .output
        .as_ref()
        .map(|o| o.stem.clone())
        .unwrap_or_else(|| "steady".to_string());
    let doc = json!({
        "document": "steady_report",
        "model_params": m,
        "branches": branches,
        "selected": selected,
        "selection_warning": warning,
        "discarded_complex_roots": detail.discarded_complex,
        "discarded_negative_roots": detail.discarded_negative,
    });
    stage.write(
        &format!("{stem}.json"),
        &serde_json::to_string_pretty(&doc)?,
    )
}

fn run_calibration_task(
    scenario: &Scenario,
    sweep: &SweepSpec,
    stage: &mut OutputStage,
) -> Result<()> {
    let protocol = protocol_from_params(&scenario.params)?;
    let curve = build_curve(&protocol, (sweep.min, sweep.max), sweep.points)?;
    let stem = scenario
        .output
        .as_ref()
        .map(|o| o.stem.clone())
        .unwrap_or_else(|| "calibration".to_string());
    stage.write(&format!("{stem}.csv"), &curve.to_csv())?;
    stage.write(
        &format!("{stem}.json"),
        &serde_json::to_string_pretty(&curve)?,
    )
}

/// Freeze a calibration protocol out of a parameter block: the detuning
/// fraction is recovered from the Stark shift so the pump tracks it when the
/// scattering frequency changes.
pub fn protocol_from_params(params: &ParamsSpec) -> Result<Protocol> {
    let m = params.model(Some(0.0))?;
    let fraction = if m.stark_shift > 0.0 {
        1.0 - m.stark_detuning / m.stark_shift
    } else {
        return Err(Error::Validation {
            field: "params",
            message: "calibration needs a positive Stark shift".into(),
        });
    };
    Ok(Protocol {
        atom_count: m.atom_count,
        lattice_depth: m.lattice_depth,
        detuning_fraction: fraction,
        cavity_decay: m.cavity_decay,
        bec_decay: m.bec_decay,
        drive_amplitude: m.drive_amplitude,
        recoil_rad_s: m.recoil_rad_s,
    })
}

/// Run one scenario config; returns the files written.
pub fn run_scenario(path: &Path, out_dir: &Path, format: DataFormat) -> Result<Vec<PathBuf>> {
    let scenario = Scenario::from_path(path)?;
    let mut stage = OutputStage::new(out_dir)?;
    let result = match &scenario.task {
        TaskSpec::Spectrum { kind } => run_spectrum_task(&scenario, *kind, &mut stage, format),
        TaskSpec::StabilitySweep { omega_sw } => {
            run_stability_task(&scenario, omega_sw, &mut stage)
        }
        TaskSpec::SteadyState => run_steady_task(&scenario, &mut stage),
        TaskSpec::Calibration { omega_sw } => run_calibration_task(&scenario, omega_sw, &mut stage),
    };
    match result {
        Ok(()) => Ok(stage.into_files()),
        Err(e) => {
            stage.discard();
            Err(e)
        }
    }
}

/// Check that the config's task matches the CLI verb it was invoked with.
pub fn expect_task(path: &Path, verb: &str) -> Result<()> {
    let scenario = Scenario::from_path(path)?;
    let ok = matches!(
        (&scenario.task, verb),
        (TaskSpec::Spectrum { .. }, "spectrum")
            | (TaskSpec::StabilitySweep { .. }, "stability")
            | (TaskSpec::SteadyState, "steady")
            | (TaskSpec::Calibration { .. }, "calibrate")
    );
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "config task does not match the `{verb}` subcommand"
        )))
    }
}

/// Run a figure preset; returns the files written.
pub fn run_figure(name: &str, out_dir: &Path, format: DataFormat) -> Result<Vec<PathBuf>> {
    let id = presets::FigureId::from_name(name)?;
    let plan = presets::plan(id)?;
    let mut stage = OutputStage::new(out_dir)?;
    let result = emit_figure(id, plan, &mut stage, format);
    match result {
        Ok(()) => Ok(stage.into_files()),
        Err(e) => {
            stage.discard();
            Err(e)
        }
    }
}

fn emit_figure(
    id: presets::FigureId,
    plan: presets::FigurePlan,
    stage: &mut OutputStage,
    format: DataFormat,
) -> Result<()> {
    let name = id.name();
    let noise = NoiseModel::vacuum();
    match plan {
        presets::FigurePlan::Spectra { curves, manifest } => {
            for job in curves {
                let (wp, _) = select_working_point(&job.model, None)?;
                let series = match job.kind {
                    SpectrumKind::PhaseNoise => {
                        phase_noise_spectrum(&job.grid, &job.model, &wp, &noise)?
                    }
                    SpectrumKind::Intensity => {
                        intensity_spectrum(&job.grid, &job.model, &wp, &noise)?
                    }
                    SpectrumKind::SqueezeOptimal => {
                        squeezing_spectrum(
                            &job.grid,
                            &job.model,
                            &wp,
                            &noise,
                            PhaseChoice::Optimal,
                        )?
                        .spectrum
                    }
                    SpectrumKind::SqueezeFixedPhase(phi) => {
                        squeezing_spectrum(
                            &job.grid,
                            &job.model,
                            &wp,
                            &noise,
                            PhaseChoice::Fixed(phi),
                        )?
                        .spectrum
                    }
                    SpectrumKind::OptimalPhase => {
                        unreachable!("presets never plot the phase alone")
                    }
                };
                series_file(stage, &format!("{name}_{}", job.label), &series, format)?;
            }
            stage.write(
                &format!("{name}_manifest.json"),
                &serde_json::to_string_pretty(&manifest)?,
            )
        }
        presets::FigurePlan::DetuningTrends { omega_sw, manifest } => {
            let mut delta_c_csv = String::from("omega_sw_over_omegaR,delta_c_over_omega_m\n");
            let mut delta_d_csv = String::from("omega_sw_over_omegaR,delta_d_over_omega_m\n");
            for &wsw in &omega_sw {
                let m = Protocol::reference().model_at(wsw)?;
                let (wp, _) = select_working_point(&m, None)?;
                delta_c_csv.push_str(&format!(
                    "{},{}\n",
                    wsw,
                    m.stark_detuning / m.mechanical_frequency
                ));
                delta_d_csv.push_str(&format!(
                    "{},{}\n",
                    wsw,
                    wp.effective_detuning / m.mechanical_frequency
                ));
            }
            stage.write(&format!("{name}_delta_c.csv"), &delta_c_csv)?;
            stage.write(&format!("{name}_delta_d.csv"), &delta_d_csv)?;
            stage.write(
                &format!("{name}_manifest.json"),
                &serde_json::to_string_pretty(&manifest)?,
            )
        }
        presets::FigurePlan::Calibration { curve, manifest } => {
            stage.write(&format!("{name}_curve.csv"), &curve.to_csv())?;
            stage.write(
                &format!("{name}_curve.json"),
                &serde_json::to_string_pretty(&curve)?,
            )?;
            stage.write(
                &format!("{name}_manifest.json"),
                &serde_json::to_string_pretty(&manifest)?,
            )
        }
    }
}

/// Options for the calibrate verb.
#[derive(Debug, Clone)]
pub struct CalibrateOptions {
    pub splitting: f64,
    pub unit: SplittingUnit,
    /// Load a tabulated curve instead of building one.
    pub curve_file: Option<PathBuf>,
    /// Build from a protocol file instead of the bundled reference protocol.
    pub protocol_file: Option<PathBuf>,
    pub samples: usize,
    pub range: (f64, f64),
}

/// Estimate the scattering frequency from a measured splitting; returns the
/// JSON document printed on stdout.
pub fn run_calibrate(opts: &CalibrateOptions) -> Result<serde_json::Value> {
    if opts.splitting.is_nan() || opts.splitting <= 0.0 {
        return Err(Error::Validation {
            field: "splitting",
            message: format!("must be > 0, got {}", opts.splitting),
        });
    }
    let curve: CalibrationCurve = match &opts.curve_file {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => {
            let protocol = match &opts.protocol_file {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| {
                        Error::Config(format!("cannot read {}: {e}", path.display()))
                    })?;
                    serde_json::from_str(&text)
                        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
                }
                None => Protocol::reference(),
            };
            build_curve(&protocol, opts.range, opts.samples)?
        }
    };
    let est = estimate_omega_sw(&curve, opts.splitting, opts.unit)?;
    Ok(json!({
        "document": "calibrate_estimate",
        "estimate_omega_sw_over_omegaR": est.omega_sw,
        "preimages_over_omegaR": est.preimages,
        "ambiguous": est.ambiguous,
        "sensitivity_dsplit_per_domega_sw": est.sensitivity,
        "measured_splitting_over_omegaR": est.measured,
        "bracket_sample_indices": [est.bracket.0, est.bracket.1],
        "curve": {
            "samples": curve.samples.len(),
            "monotone_interval": curve.monotone_interval,
            "protocol": curve.protocol,
        },
    }))
}

/// Render the machine-readable error record written to stderr.
pub fn error_record(e: &Error) -> String {
    json!({ "error": { "kind": e.kind(), "message": e.to_string() } }).to_string()
}
