//! Calibration of the s-wave scattering frequency against the normal-mode
//! splitting.
//!
//! Under a frozen protocol (fixed drive, damping, and a pump detuning pinned
//! to a fraction of the collective Stark shift), the splitting between the
//! two positive resonance frequencies is a strictly monotone function of the
//! scattering frequency over a wide range. Tabulating that map and inverting
//! it on its monotone interval turns a measured splitting into an estimate
//! of the collision strength.
//!
//! The inversion uses the numeric splitting column (eigenvalues of the drift
//! matrix); the small-damping analytic column is tabulated alongside purely
//! as a diagnostic. Interpolation is monotone-preserving cubic, so the
//! inverse map cannot pick up spurious oscillations between samples.

use serde::{Deserialize, Serialize};

use crate::exec;
use crate::lindyn::{analytic_peaks, drift_matrix, is_stable, numeric_splitting};
use crate::params::{
    derive_model_params, reference_rb87_params, DetuningSpec, FreqValue, ModelParams, SwaveSpec,
};
use crate::steady::{select_branch_default, solve_steady_state};
use crate::{Error, Result};

/// Frozen model template for a calibration run: everything but the
/// scattering frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub atom_count: f64,
    /// Lattice depth per photon, recoil units.
    pub lattice_depth: f64,
    /// Pump detuning as a fraction of the collective Stark shift.
    pub detuning_fraction: f64,
    pub cavity_decay: f64,
    pub bec_decay: f64,
    pub drive_amplitude: f64,
    pub recoil_rad_s: f64,
}

impl Protocol {
    /// The bundled collision protocol: the Rb-87 reference system driven at
    /// 81 recoil units with kappa = 24, gamma = 1e-3 kappa, and the pump at
    /// 0.994 of the Stark shift.
    pub fn reference() -> Self {
        let p = reference_rb87_params(
            FreqValue::omega_r(24.0),
            FreqValue::kappa(1e-3),
            FreqValue::omega_r(81.0),
            DetuningSpec::CavityPumpFractionOfStark(0.994),
            SwaveSpec::Frequency(FreqValue::omega_r(0.0)),
        );
        let m = derive_model_params(&p).expect("reference parameters are valid");
        Self {
            atom_count: m.atom_count,
            lattice_depth: m.lattice_depth,
            detuning_fraction: 0.994,
            cavity_decay: m.cavity_decay,
            bec_decay: m.bec_decay,
            drive_amplitude: m.drive_amplitude,
            recoil_rad_s: m.recoil_rad_s,
        }
    }

    /// Model parameters at one scattering frequency.
    pub fn model_at(&self, omega_sw: f64) -> Result<ModelParams> {
        let stark_shift = self.atom_count * self.lattice_depth / 2.0;
        ModelParams::from_model_inputs(
            self.atom_count,
            self.lattice_depth,
            (1.0 - self.detuning_fraction) * stark_shift,
            omega_sw,
            self.cavity_decay,
            self.bec_decay,
            self.drive_amplitude,
            self.recoil_rad_s,
        )
    }
}

/// One tabulated point of the forward map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub omega_sw: f64,
    /// Eigenvalue-route splitting; `None` when a mode is overdamped.
    pub splitting_numeric: Option<f64>,
    /// Small-damping approximation; `None` where it has no real roots.
    pub splitting_analytic: Option<f64>,
    pub mechanical_frequency: f64,
    pub effective_detuning: f64,
    pub stable: bool,
}

/// Tabulated splitting-vs-scattering-frequency map under a frozen protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    pub protocol: Protocol,
    /// Sorted by `omega_sw`.
    pub samples: Vec<CurveSample>,
    /// Inclusive index range of the longest strictly monotone stable run of
    /// the numeric column; `None` when no two consecutive samples qualify.
    pub monotone_interval: Option<(usize, usize)>,
}

/// A point estimate of the scattering frequency from a measured splitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    /// Primary estimate, recoil units.
    pub omega_sw: f64,
    /// All preimages of the measured splitting across the curve.
    pub preimages: Vec<f64>,
    /// Set when the measured value has several preimages.
    pub ambiguous: bool,
    /// Indices of the samples bracketing the primary estimate.
    pub bracket: (usize, usize),
    /// |d(splitting)/d(omega_sw)| at the estimate; larger means the
    /// measurement pins the collision strength more tightly.
    pub sensitivity: f64,
    /// The measurement normalized to recoil units.
    pub measured: f64,
}

/// Unit tag for a measured splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplittingUnit {
    OmegaR,
    Kappa,
    RadS,
}

impl SplittingUnit {
    pub fn to_recoil(self, value: f64, protocol: &Protocol) -> f64 {
        match self {
            SplittingUnit::OmegaR => value,
            SplittingUnit::Kappa => value * protocol.cavity_decay,
            SplittingUnit::RadS => value / protocol.recoil_rad_s,
        }
    }
}

impl std::str::FromStr for SplittingUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omega_R" | "omegaR" | "omega_r" => Ok(SplittingUnit::OmegaR),
            "kappa" => Ok(SplittingUnit::Kappa),
            "rad_s" => Ok(SplittingUnit::RadS),
            other => Err(Error::Config(format!(
                "unknown splitting unit `{other}` (expected omega_R, kappa, or rad_s)"
            ))),
        }
    }
}

fn sample_at(protocol: &Protocol, omega_sw: f64) -> Result<CurveSample> {
    let m = protocol.model_at(omega_sw)?;
    let mut branches = solve_steady_state(&m);
    for wp in branches.iter_mut() {
        wp.stable = Some(is_stable(&drift_matrix(&m, wp))?.stable);
    }
    // an all-unstable sample is recorded, not fatal; tabulate the lowest
    // branch so the detuning column stays defined
    let (wp, stable) = match select_branch_default(&branches) {
        Ok((wp, _)) => (wp, true),
        Err(Error::NoStableBranch) if !branches.is_empty() => (branches[0].clone(), false),
        Err(e) => return Err(e),
    };
    let dm = drift_matrix(&m, &wp);
    Ok(CurveSample {
        omega_sw,
        splitting_numeric: numeric_splitting(&dm).ok(),
        splitting_analytic: analytic_peaks(&m, &wp).ok().map(|(hi, lo)| hi - lo),
        mechanical_frequency: m.mechanical_frequency,
        effective_detuning: wp.effective_detuning,
        stable,
    })
}

/// Longest run of consecutive stable samples whose numeric splitting is
/// strictly monotone in one direction.
fn monotone_interval(samples: &[CurveSample]) -> Option<(usize, usize)> {
    let usable = |s: &CurveSample| s.stable && s.splitting_numeric.is_some();
    let mut best: Option<(usize, usize)> = None;
    let mut start = 0;
    let mut dir = 0i8;
    for i in 1..samples.len() {
        let step_dir = if usable(&samples[i - 1]) && usable(&samples[i]) {
            let a = samples[i - 1].splitting_numeric.unwrap();
            let b = samples[i].splitting_numeric.unwrap();
            if b > a {
                1
            } else if b < a {
                -1
            } else {
                0
            }
        } else {
            0
        };
        if step_dir == 0 {
            start = i;
            dir = 0;
            continue;
        }
        if dir == 0 {
            dir = step_dir;
            start = i - 1;
        } else if step_dir != dir {
            start = i - 1;
            dir = step_dir;
        }
        if best.is_none_or(|(s, e)| i - start > e - s) {
            best = Some((start, i));
        }
    }
    best
}

/// Tabulate the forward map over `omega_sw` in `[lo, hi]` at `n_samples`
/// equally spaced points.
pub fn build_curve(
    protocol: &Protocol,
    range: (f64, f64),
    n_samples: usize,
) -> Result<CalibrationCurve> {
    let (lo, hi) = range;
    if n_samples == 0 {
        return Err(Error::Validation {
            field: "n_samples",
            message: "need at least one sample".into(),
        });
    }
    if lo.is_nan() || lo < 0.0 || (n_samples > 1 && (hi.is_nan() || hi <= lo)) {
        return Err(Error::Validation {
            field: "omega_sw_range",
            message: format!("invalid range [{lo}, {hi}]"),
        });
    }
    let step = if n_samples == 1 {
        0.0
    } else {
        (hi - lo) / (n_samples - 1) as f64
    };
    let samples = exec::try_map_indexed(n_samples, |i| sample_at(protocol, lo + i as f64 * step))?;
    if !samples.iter().any(|s| s.stable) {
        return Err(Error::EmptyCurve);
    }
    let monotone = monotone_interval(&samples);
    Ok(CalibrationCurve {
        protocol: protocol.clone(),
        samples,
        monotone_interval: monotone,
    })
}

/// Fritsch-Carlson slopes for a monotone-preserving cubic interpolant.
fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    debug_assert!(n >= 2);
    let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            // weighted harmonic mean keeps the interpolant monotone
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d
}

fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
        + d0 * h * (t3 - 2.0 * t2 + t)
        + y1 * (-2.0 * t3 + 3.0 * t2)
        + d1 * h * (t3 - t2)
}

fn hermite_derivative(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    (y0 * (6.0 * t2 - 6.0 * t) / h)
        + d0 * (3.0 * t2 - 4.0 * t + 1.0)
        + (y1 * (-6.0 * t2 + 6.0 * t) / h)
        + d1 * (3.0 * t2 - 2.0 * t)
}

/// Monotone cubic evaluation over sorted abscissae.
fn pchip_eval(xs: &[f64], ys: &[f64], slopes: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let mut k = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.saturating_sub(1).min(n - 2),
    };
    if x <= xs[0] {
        k = 0;
    }
    hermite(
        xs[k],
        xs[k + 1],
        ys[k],
        ys[k + 1],
        slopes[k],
        slopes[k + 1],
        x,
    )
}

/// Estimate the scattering frequency from a measured splitting.
///
/// The inverse map is interpolated on the curve's monotone interval; when the
/// measured value also crosses the numeric column outside that interval,
/// every preimage is returned and the estimate is flagged ambiguous.
pub fn estimate_omega_sw(
    curve: &CalibrationCurve,
    measured: f64,
    unit: SplittingUnit,
) -> Result<Estimate> {
    let measured = unit.to_recoil(measured, &curve.protocol);
    let stable: Vec<(usize, f64, f64)> = curve
        .samples
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            s.splitting_numeric
                .filter(|_| s.stable)
                .map(|d| (i, s.omega_sw, d))
        })
        .collect();
    if stable.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let lo = stable
        .iter()
        .map(|&(_, _, d)| d)
        .fold(f64::INFINITY, f64::min);
    let hi = stable
        .iter()
        .map(|&(_, _, d)| d)
        .fold(f64::NEG_INFINITY, f64::max);
    if measured < lo || measured > hi {
        return Err(Error::OutOfRange {
            value: measured,
            lo,
            hi,
        });
    }

    // sign-change brackets of (splitting - measured) over consecutive
    // stable samples
    let mut crossings: Vec<(usize, usize)> = Vec::new();
    for w in stable.windows(2) {
        let (i0, _, d0) = w[0];
        let (i1, _, d1) = w[1];
        if i1 != i0 + 1 {
            continue;
        }
        let f0 = d0 - measured;
        let f1 = d1 - measured;
        if f0 == 0.0 || f0 * f1 < 0.0 || (f1 == 0.0 && i1 == stable.last().unwrap().0) {
            crossings.push((i0, i1));
        }
    }
    if crossings.is_empty() {
        return Err(Error::OutOfRange {
            value: measured,
            lo,
            hi,
        });
    }

    let preimages: Vec<f64> = crossings
        .iter()
        .map(|&(i0, i1)| invert_segment(curve, i0, i1, measured))
        .collect();

    // primary estimate: the crossing inside the monotone interval when there
    // is one, otherwise the first
    let primary_idx = curve
        .monotone_interval
        .and_then(|(s, e)| crossings.iter().position(|&(i0, i1)| i0 >= s && i1 <= e))
        .unwrap_or(0);
    let (b0, b1) = crossings[primary_idx];
    let omega_sw = preimages[primary_idx];
    let sensitivity = forward_slope(curve, omega_sw);

    Ok(Estimate {
        omega_sw,
        ambiguous: preimages.len() > 1,
        preimages,
        bracket: (b0, b1),
        sensitivity,
        measured,
    })
}

/// Invert the numeric column on the monotone run containing `[i0, i1]` via
/// monotone cubic interpolation of omega_sw as a function of the splitting.
fn invert_segment(curve: &CalibrationCurve, i0: usize, i1: usize, measured: f64) -> f64 {
    // expand to the largest strictly monotone stable run around the bracket
    let usable = |i: usize| curve.samples[i].stable && curve.samples[i].splitting_numeric.is_some();
    let val = |i: usize| curve.samples[i].splitting_numeric.unwrap();
    let dir = (val(i1) - val(i0)).signum();
    let mut s = i0;
    while s > 0 && usable(s - 1) && ((val(s) - val(s - 1)) * dir > 0.0) {
        s -= 1;
    }
    let mut e = i1;
    while e + 1 < curve.samples.len() && usable(e + 1) && ((val(e + 1) - val(e)) * dir > 0.0) {
        e += 1;
    }
    let mut xs: Vec<f64> = (s..=e).map(val).collect();
    let mut ys: Vec<f64> = (s..=e).map(|i| curve.samples[i].omega_sw).collect();
    if dir < 0.0 {
        xs.reverse();
        ys.reverse();
    }
    let slopes = pchip_slopes(&xs, &ys);
    pchip_eval(&xs, &ys, &slopes, measured)
}

/// |d(splitting)/d(omega_sw)| of the tabulated forward map at `omega_sw`.
fn forward_slope(curve: &CalibrationCurve, omega_sw: f64) -> f64 {
    let pts: Vec<(f64, f64)> = curve
        .samples
        .iter()
        .filter_map(|s| {
            s.splitting_numeric
                .filter(|_| s.stable)
                .map(|d| (s.omega_sw, d))
        })
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let slopes = pchip_slopes(&xs, &ys);
    let n = xs.len();
    let k = xs
        .iter()
        .position(|&x| x >= omega_sw)
        .unwrap_or(n - 1)
        .clamp(1, n - 1);
    hermite_derivative(
        xs[k - 1],
        xs[k],
        ys[k - 1],
        ys[k],
        slopes[k - 1],
        slopes[k],
        omega_sw,
    )
    .abs()
}

impl CalibrationCurve {
    /// CSV rendering: one row per sample, splittings normalized to kappa.
    pub fn to_csv(&self) -> String {
        let k = self.protocol.cavity_decay;
        let mut out = String::from(
            "omega_sw_over_omegaR,dsplit_numeric_over_kappa,dsplit_analytic_over_kappa,omega_m_over_omegaR,delta_d_over_omegaR\n",
        );
        for s in &self.samples {
            let num = s
                .splitting_numeric
                .map_or("nan".to_string(), |d| format!("{}", d / k));
            let ana = s
                .splitting_analytic
                .map_or("nan".to_string(), |d| format!("{}", d / k));
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.omega_sw, num, ana, s.mechanical_frequency, s.effective_detuning
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_curve_has_no_monotone_interval() {
        let curve = build_curve(&Protocol::reference(), (30.0, 30.0), 1).unwrap();
        assert_eq!(curve.samples.len(), 1);
        assert!(curve.monotone_interval.is_none());
    }

    #[test]
    fn reference_curve_is_monotone_and_stable() {
        let curve = build_curve(&Protocol::reference(), (0.0, 120.0), 61).unwrap();
        assert_eq!(curve.monotone_interval, Some((0, 60)));
        assert!(curve.samples.iter().all(|s| s.stable));
        let nums: Vec<f64> = curve
            .samples
            .iter()
            .map(|s| s.splitting_numeric.unwrap())
            .collect();
        assert!(
            nums.windows(2).all(|w| w[1] < w[0]),
            "splitting not decreasing"
        );
    }

    #[test]
    fn out_of_range_is_reported() {
        let curve = build_curve(&Protocol::reference(), (0.0, 120.0), 31).unwrap();
        let err = estimate_omega_sw(&curve, 100.0, SplittingUnit::Kappa).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { .. }));
    }

    #[test]
    fn quoted_splittings_invert_to_quoted_collisions() {
        let curve = build_curve(&Protocol::reference(), (0.0, 120.0), 121).unwrap();
        let est = estimate_omega_sw(&curve, 4.2, SplittingUnit::Kappa).unwrap();
        assert!(!est.ambiguous);
        assert!((est.omega_sw - 60.0).abs() < 3.0, "got {}", est.omega_sw);
        let est = estimate_omega_sw(&curve, 5.6, SplittingUnit::Kappa).unwrap();
        assert!((est.omega_sw - 30.0).abs() < 3.0, "got {}", est.omega_sw);
        assert!(est.sensitivity > 0.0);
    }

    #[test]
    fn pchip_is_monotone_between_knots() {
        let xs = [0.0, 1.0, 2.0, 3.5, 5.0];
        let ys = [0.0, 0.1, 2.0, 2.1, 9.0];
        let d = pchip_slopes(&xs, &ys);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=500 {
            let x = 5.0 * i as f64 / 500.0;
            let y = pchip_eval(&xs, &ys, &d, x);
            assert!(y >= prev - 1e-12, "overshoot at x = {x}");
            prev = y;
        }
    }

    #[test]
    fn splitting_unit_conversion() {
        let p = Protocol::reference();
        assert_eq!(SplittingUnit::OmegaR.to_recoil(5.0, &p), 5.0);
        assert_eq!(SplittingUnit::Kappa.to_recoil(2.0, &p), 48.0);
        let rad = 3.0 * p.recoil_rad_s;
        assert!((SplittingUnit::RadS.to_recoil(rad, &p) - 3.0).abs() < 1e-12);
    }
}
