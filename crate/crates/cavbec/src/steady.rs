//! Mean-field fixed point of the driven cavity-condensate system.
//!
//! With the field amplitudes taken real, eliminating the matter amplitude
//! turns the fixed-point conditions into a cubic in the intracavity intensity
//! `I = alpha^2`:
//!
//! ```text
//! I (Delta_d(I)^2 + kappa^2) = eta^2,    Delta_d(I) = -delta_c - c1 I,
//! c1 = N U_0^2 / (4 s),                  s = sqrt((Omega_c + omega_sw/2)^2 + gamma^2).
//! ```
//!
//! Every real nonnegative intensity root is a physical branch; up to three
//! coexist in the bistable region. Roots come from the companion matrix of
//! the cubic and are then Newton-polished, which stays well-behaved near the
//! fold points where the closed-form cubic formulas lose digits.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::params::ModelParams;
use crate::{Error, Result};

/// Intensity at which the single-density-mode description of the condensate
/// stops being trustworthy: `U_0 alpha^2 > 10` (recoil units).
pub const REGIME_BOUND: f64 = 10.0;

/// A steady-state branch and the couplings linearization needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkingPoint {
    /// Mean photon-field amplitude alpha (>= 0, phase absorbed).
    pub photon_amplitude: f64,
    /// Mean matter-mode displacement beta (real).
    pub bogoliubov_amplitude: f64,
    /// Effective detuning Delta_d = -delta_c - sqrt(2N) zeta beta.
    pub effective_detuning: f64,
    /// Enhanced optomechanical coupling G = sqrt(2) zeta alpha.
    pub linearized_coupling: f64,
    /// Intracavity photon number alpha^2.
    pub intracavity_photons: f64,
    /// Filled by the linearized-dynamics module; `None` until then.
    pub stable: Option<bool>,
    /// Position of this branch when sorted by intensity.
    pub branch_index: usize,
    /// Set when `U_0 alpha^2` exceeds [`REGIME_BOUND`].
    pub regime_warning: bool,
}

/// Which branch a caller wants when several coexist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchPolicy {
    /// Exactly one stable branch must exist.
    OnlyStable,
    LowestStable,
    HighestStable,
    Index(usize),
}

/// Steady-state roots plus root-filtering diagnostics.
#[derive(Debug, Clone)]
pub struct SteadySolution {
    pub branches: Vec<WorkingPoint>,
    pub discarded_complex: usize,
    pub discarded_negative: usize,
}

/// Coefficient of the intensity in the effective detuning,
/// `Delta_d(I) = -delta_c - c1 I`.
fn intensity_shift_coefficient(m: &ModelParams) -> f64 {
    let s = ((m.bogoliubov_frequency + m.swave_frequency / 2.0).powi(2)
        + m.bec_decay * m.bec_decay)
        .sqrt();
    m.atom_count * m.lattice_depth * m.lattice_depth / (4.0 * s)
}

/// Fixed-point residual `r(I) = I (Delta_d(I)^2 + kappa^2) - eta^2` and its
/// derivative in `I`.
fn residual(m: &ModelParams, c1: f64, intensity: f64) -> (f64, f64) {
    let dd = -m.stark_detuning - c1 * intensity;
    let k2 = m.cavity_decay * m.cavity_decay;
    let r = intensity * (dd * dd + k2) - m.drive_amplitude * m.drive_amplitude;
    let dr = dd * dd + k2 - 2.0 * c1 * intensity * dd;
    (r, dr)
}

fn polish(m: &ModelParams, c1: f64, mut intensity: f64) -> f64 {
    for _ in 0..50 {
        let (r, dr) = residual(m, c1, intensity);
        if dr == 0.0 {
            break;
        }
        let step = r / dr;
        intensity -= step;
        if step.abs() <= 1e-15 * intensity.abs().max(1e-300) {
            break;
        }
    }
    intensity
}

/// All physical steady-state branches, sorted by intensity, with discarded
/// root counts.
pub fn solve_steady_state_detailed(m: &ModelParams) -> SteadySolution {
    let c1 = intensity_shift_coefficient(m);
    let eta2 = m.drive_amplitude * m.drive_amplitude;
    let den = m.stark_detuning * m.stark_detuning + m.cavity_decay * m.cavity_decay;

    let mut discarded_complex = 0;
    let mut discarded_negative = 0;
    let mut intensities: Vec<f64> = Vec::new();

    if c1 == 0.0 {
        // decoupled cavity: the fixed point is linear in I
        intensities.push(eta2 / den);
    } else {
        // monic cubic I^3 + p I^2 + q I + r = 0
        let p = 2.0 * m.stark_detuning / c1;
        let q = den / (c1 * c1);
        let r = -eta2 / (c1 * c1);
        let companion = Matrix3::new(
            0.0, 0.0, -r, //
            1.0, 0.0, -q, //
            0.0, 1.0, -p,
        );
        let scale = 1.0f64.max(p.abs()).max(q.abs().sqrt()).max(r.abs().cbrt());
        for root in companion.complex_eigenvalues().iter() {
            if root.im.abs() > 1e-8 * scale.max(root.norm()) {
                discarded_complex += 1;
                continue;
            }
            let val = polish(m, c1, root.re);
            if val < -1e-12 * scale {
                discarded_negative += 1;
                continue;
            }
            intensities.push(val.max(0.0));
        }
    }

    intensities.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // fold points: coincident roots merge into one branch
    intensities.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0));

    let s = ((m.bogoliubov_frequency + m.swave_frequency / 2.0).powi(2)
        + m.bec_decay * m.bec_decay)
        .sqrt();
    let branches = intensities
        .into_iter()
        .enumerate()
        .map(|(branch_index, intensity)| {
            let beta = 0.25 * 2f64.sqrt() * m.lattice_depth * intensity / s;
            let alpha = intensity.sqrt();
            WorkingPoint {
                photon_amplitude: alpha,
                bogoliubov_amplitude: beta,
                effective_detuning: -m.stark_detuning
                    - (2.0 * m.atom_count).sqrt() * m.bare_coupling * beta,
                linearized_coupling: 2f64.sqrt() * m.bare_coupling * alpha,
                intracavity_photons: intensity,
                stable: None,
                branch_index,
                regime_warning: m.lattice_depth * intensity > REGIME_BOUND,
            }
        })
        .collect();

    SteadySolution {
        branches,
        discarded_complex,
        discarded_negative,
    }
}

/// All physical steady-state branches, sorted by intensity.
pub fn solve_steady_state(m: &ModelParams) -> Vec<WorkingPoint> {
    solve_steady_state_detailed(m).branches
}

/// Relative residuals of the three fixed-point relations at a working point:
/// the photon amplitude, the matter amplitude, and the effective detuning.
pub fn fixed_point_residuals(m: &ModelParams, wp: &WorkingPoint) -> [f64; 3] {
    let dd = wp.effective_detuning;
    let alpha_expect = m.drive_amplitude / (dd * dd + m.cavity_decay * m.cavity_decay).sqrt();
    let s = ((m.bogoliubov_frequency + m.swave_frequency / 2.0).powi(2)
        + m.bec_decay * m.bec_decay)
        .sqrt();
    let beta_expect = 0.25 * 2f64.sqrt() * m.lattice_depth * wp.intracavity_photons / s;
    let dd_expect =
        -m.stark_detuning - (2.0 * m.atom_count).sqrt() * m.bare_coupling * wp.bogoliubov_amplitude;
    let rel = |got: f64, want: f64| (got - want).abs() / want.abs().max(1.0);
    [
        rel(wp.photon_amplitude, alpha_expect),
        rel(wp.bogoliubov_amplitude, beta_expect),
        rel(dd, dd_expect),
    ]
}

/// Pick one branch according to `policy`. Stability flags must be filled.
pub fn select_branch(points: &[WorkingPoint], policy: BranchPolicy) -> Result<WorkingPoint> {
    if points.is_empty() {
        return Err(Error::NoStableBranch);
    }
    if let BranchPolicy::Index(index) = policy {
        return points.get(index).cloned().ok_or(Error::BranchIndex {
            index,
            count: points.len(),
        });
    }
    if points.iter().any(|p| p.stable.is_none()) {
        return Err(Error::UnfilledStability);
    }
    let stable: Vec<&WorkingPoint> = points.iter().filter(|p| p.stable == Some(true)).collect();
    if stable.is_empty() {
        return Err(Error::NoStableBranch);
    }
    match policy {
        BranchPolicy::OnlyStable => {
            if stable.len() > 1 {
                Err(Error::AmbiguousBranch {
                    count: stable.len(),
                })
            } else {
                Ok(stable[0].clone())
            }
        }
        BranchPolicy::LowestStable => Ok(stable[0].clone()),
        BranchPolicy::HighestStable => Ok(stable[stable.len() - 1].clone()),
        BranchPolicy::Index(_) => unreachable!(),
    }
}

/// Default selection: `OnlyStable`, falling back to `LowestStable` with a
/// warning when several branches are stable.
pub fn select_branch_default(points: &[WorkingPoint]) -> Result<(WorkingPoint, Option<String>)> {
    match select_branch(points, BranchPolicy::OnlyStable) {
        Ok(wp) => Ok((wp, None)),
        Err(Error::AmbiguousBranch { count }) => {
            let wp = select_branch(points, BranchPolicy::LowestStable)?;
            Ok((
                wp,
                Some(format!(
                    "{count} stable branches; picked the lowest-intensity one"
                )),
            ))
        }
        Err(e) => Err(e),
    }
}

/// Evaluate the cubic residual at `intensity` (used by root-completeness
/// checks; sign changes of this function bracket the branches).
pub fn cubic_residual(m: &ModelParams, intensity: f64) -> f64 {
    residual(m, intensity_shift_coefficient(m), intensity).0
}
