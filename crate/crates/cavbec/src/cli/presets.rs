//! Frozen figure presets.
//!
//! Each preset pins a complete parameter set for one published-style figure
//! of the bundled Rb-87 reference system and emits one data file per curve
//! plus a manifest describing the qualitative features the curves are
//! expected to show. Presets are read-only and version-stamped; changing one
//! means bumping [`PRESET_VERSION`].

use serde_json::json;

use crate::calib::{build_curve, CalibrationCurve, Protocol};
use crate::params::{
    derive_model_params, mechanical_frequency, reference_rb87_params, DetuningSpec, FreqValue,
    ModelParams, SwaveSpec,
};
use crate::spectra::{FrequencyGrid, GridUnit, SpectrumKind};
use crate::{Error, Result};

pub const PRESET_VERSION: &str = "1";

/// The bundled figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig5,
    Fig6a,
    Fig6b,
    Fig6c,
}

impl FigureId {
    pub const ALL: [FigureId; 10] = [
        FigureId::Fig2a,
        FigureId::Fig2b,
        FigureId::Fig3a,
        FigureId::Fig3b,
        FigureId::Fig4a,
        FigureId::Fig4b,
        FigureId::Fig5,
        FigureId::Fig6a,
        FigureId::Fig6b,
        FigureId::Fig6c,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig3a => "fig3a",
            FigureId::Fig3b => "fig3b",
            FigureId::Fig4a => "fig4a",
            FigureId::Fig4b => "fig4b",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6a => "fig6a",
            FigureId::Fig6b => "fig6b",
            FigureId::Fig6c => "fig6c",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::UnknownPreset(name.to_string()))
    }
}

/// One spectrum curve of a figure: label, full model, grid, and what to plot.
#[derive(Debug, Clone)]
pub struct CurveJob {
    pub label: String,
    pub model: ModelParams,
    pub grid: FrequencyGrid,
    pub kind: SpectrumKind,
}

/// Everything a figure preset expands to.
#[derive(Debug, Clone)]
pub enum FigurePlan {
    /// Spectrum curves sharing one manifest.
    Spectra {
        curves: Vec<CurveJob>,
        manifest: serde_json::Value,
    },
    /// The steady-state trend sweep (detuning columns vs scattering
    /// frequency).
    DetuningTrends {
        omega_sw: Vec<f64>,
        manifest: serde_json::Value,
    },
    /// The splitting calibration curve.
    Calibration {
        curve: CalibrationCurve,
        manifest: serde_json::Value,
    },
}

fn model_with(kappa: f64, detuning: DetuningSpec, omega_sw: f64) -> Result<ModelParams> {
    let p = reference_rb87_params(
        FreqValue::omega_r(kappa),
        FreqValue::kappa(1e-3),
        FreqValue::omega_r(81.0),
        detuning,
        SwaveSpec::Frequency(FreqValue::omega_r(omega_sw)),
    );
    derive_model_params(&p)
}

fn detuning_ladder_plan(id: FigureId, kappa: f64) -> Result<FigurePlan> {
    let omega_sw = 50.0;
    let wm = mechanical_frequency(omega_sw);
    let grid = FrequencyGrid::default_symmetric(GridUnit::OmegaM);
    let mut curves = Vec::new();
    for mult in [1.0, 2.0, 3.0] {
        let detuning = DetuningSpec::StarkShifted(FreqValue::omega_r(mult * wm));
        curves.push(CurveJob {
            label: format!("delta_c_{}wm", mult as u32),
            model: model_with(kappa, detuning, omega_sw)?,
            grid: grid.clone(),
            kind: SpectrumKind::PhaseNoise,
        });
    }
    let manifest = json!({
        "document": "figure_manifest",
        "figure": id.name(),
        "preset_version": PRESET_VERSION,
        "kind": "phase_noise",
        "kappa_over_omegaR": kappa,
        "omega_sw_over_omegaR": omega_sw,
        "curves": ["delta_c_1wm", "delta_c_2wm", "delta_c_3wm"],
        "expected_features": {
            "local_maxima_per_curve": 4,
            "splitting_increases_with_detuning": true
        }
    });
    Ok(FigurePlan::Spectra { curves, manifest })
}

fn collision_ladder_plan(
    id: FigureId,
    kind: SpectrumKind,
    omega_sw_values: &[f64],
) -> Result<FigurePlan> {
    let grid = FrequencyGrid::linear(-12.0, 12.0, 4001, GridUnit::Kappa)?;
    let mut curves = Vec::new();
    let mut labels = Vec::new();
    for &wsw in omega_sw_values {
        let label = format!("wsw_{}", wsw as u32);
        labels.push(label.clone());
        curves.push(CurveJob {
            label,
            model: model_with(24.0, DetuningSpec::CavityPumpFractionOfStark(0.994), wsw)?,
            grid: grid.clone(),
            kind,
        });
    }
    let features = match kind {
        SpectrumKind::PhaseNoise => json!({
            "local_maxima_per_curve": 4,
            "peaks_approach_each_other_with_omega_sw": true
        }),
        _ => json!({
            "side_to_central_ratio_increases_with_omega_sw": true
        }),
    };
    let manifest = json!({
        "document": "figure_manifest",
        "figure": id.name(),
        "preset_version": PRESET_VERSION,
        "kind": kind.column_name(),
        "kappa_over_omegaR": 24.0,
        "detuning_fraction_of_stark": 0.994,
        "curves": labels,
        "expected_features": features,
    });
    Ok(FigurePlan::Spectra { curves, manifest })
}

fn squeezing_plan(id: FigureId, omega_sw: f64) -> Result<FigurePlan> {
    // the squeezing presets pin kappa to 74 recoil units, matching the
    // phase-noise ladder rather than a mechanical-frequency-scaled decay
    let kappa = 74.0;
    let wm = mechanical_frequency(omega_sw);
    let detuning = DetuningSpec::StarkShifted(FreqValue::omega_r(wm));
    let grid = FrequencyGrid::linear(-3.0, 3.0, 4001, GridUnit::OmegaM)?;
    let model = model_with(kappa, detuning, omega_sw)?;
    let curves = vec![
        CurveJob {
            label: "intensity".into(),
            model: model.clone(),
            grid: grid.clone(),
            kind: SpectrumKind::Intensity,
        },
        CurveJob {
            label: "squeeze_optimal".into(),
            model,
            grid,
            kind: SpectrumKind::SqueezeOptimal,
        },
    ];
    let manifest = json!({
        "document": "figure_manifest",
        "figure": id.name(),
        "preset_version": PRESET_VERSION,
        "kind": "intensity_and_squeezing",
        "kappa_over_omegaR": kappa,
        "kappa_note": "decay pinned to 74 recoil units across the squeezing presets",
        "omega_sw_over_omegaR": omega_sw,
        "delta_c_over_omegaR": wm,
        "curves": ["intensity", "squeeze_optimal"],
        "expected_features": {
            "squeeze_dips_at_abs_omega_over_omega_m": 1.0,
            "dip_below_vacuum_level": true,
            "intensity_peak_below_omega_m": true
        }
    });
    Ok(FigurePlan::Spectra { curves, manifest })
}

/// Expand a figure id into its frozen plan.
pub fn plan(id: FigureId) -> Result<FigurePlan> {
    match id {
        FigureId::Fig2a => detuning_ladder_plan(id, 74.0),
        FigureId::Fig2b => detuning_ladder_plan(id, 24.0),
        FigureId::Fig3a => collision_ladder_plan(id, SpectrumKind::PhaseNoise, &[0.0, 1.0]),
        FigureId::Fig3b => collision_ladder_plan(id, SpectrumKind::PhaseNoise, &[30.0, 60.0]),
        FigureId::Fig5 => collision_ladder_plan(id, SpectrumKind::Intensity, &[30.0, 60.0, 120.0]),
        FigureId::Fig4a => {
            let omega_sw: Vec<f64> = (0..=240).map(|i| i as f64 * 0.5).collect();
            let manifest = json!({
                "document": "figure_manifest",
                "figure": "fig4a",
                "preset_version": PRESET_VERSION,
                "kind": "detuning_trends",
                "detuning_fraction_of_stark": 0.994,
                "curves": ["delta_c_over_omega_m", "delta_d_over_omega_m"],
                "expected_features": {
                    "abs_effective_detuning": "decreasing",
                    "mechanical_frequency": "increasing",
                    "limits": "delta_d -> -omega_m and delta_c -> +omega_m at large omega_sw"
                }
            });
            Ok(FigurePlan::DetuningTrends { omega_sw, manifest })
        }
        FigureId::Fig4b => {
            let curve = build_curve(&Protocol::reference(), (0.0, 120.0), 241)?;
            let manifest = json!({
                "document": "figure_manifest",
                "figure": "fig4b",
                "preset_version": PRESET_VERSION,
                "kind": "calibration_curve",
                "detuning_fraction_of_stark": 0.994,
                "curves": ["dsplit_numeric_over_kappa", "dsplit_analytic_over_kappa", "omega_m_over_omegaR"],
                "expected_features": {
                    "numeric_splitting": "strictly decreasing",
                    "numeric_vs_analytic_max_rel_dev": 0.1
                }
            });
            Ok(FigurePlan::Calibration { curve, manifest })
        }
        FigureId::Fig6a => squeezing_plan(id, 40.0),
        FigureId::Fig6b => squeezing_plan(id, 50.0),
        FigureId::Fig6c => squeezing_plan(id, 80.0),
    }
}
