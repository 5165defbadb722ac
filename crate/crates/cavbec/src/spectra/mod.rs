//! Output-field power spectra of the driven cavity.
//!
//! Closed forms for the phase-noise spectrum `S_P`, the intensity spectrum
//! `S_I`, and the quadrature-squeezing spectra `S_phi` / `S_opt`, evaluated
//! per frequency from the susceptibility and the rational response
//! coefficients. The [`transfer`] submodule computes every intracavity and
//! output correlator a second time from the resolvent of the drift matrix;
//! the two routes agree to near machine precision and cross-check each other
//! in the test suites.
//!
//! Frequency-domain conventions: the Fourier kernel is `e^{+i omega t}`, so
//! time derivatives map to `+i omega`, and frequency-symmetrized correlators
//! carry their `2 pi delta(omega + omega')` factor canceled analytically.
//! Spectra are densities; the vacuum floor of `S_P` is 1/2 and the
//! vacuum/coherent level of the squeezing spectra is 1.

pub mod transfer;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exec;
use crate::params::ModelParams;
use crate::steady::WorkingPoint;
use crate::{Error, Result};

/// Thermal occupancies of the optical and matter input noise. Both are fixed
/// at zero throughout (optical frequencies, cold collective mode); the type
/// exists so that restriction is explicit and validated rather than implied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Mean thermal photon number of the optical input.
    pub n_ph: f64,
    /// Thermal occupancy of the matter-mode input.
    pub n_c: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::vacuum()
    }
}

impl NoiseModel {
    pub fn vacuum() -> Self {
        Self {
            n_ph: 0.0,
            n_c: 0.0,
        }
    }

    /// The spectra implemented here assume vacuum inputs.
    pub fn require_vacuum(&self) -> Result<()> {
        if self.n_ph != 0.0 || self.n_c != 0.0 {
            return Err(Error::NonzeroThermalOccupancy {
                n_ph: self.n_ph,
                n_c: self.n_c,
            });
        }
        Ok(())
    }

    /// Spectral matrix of the input quadrature vector
    /// `(dX_a_in, dP_a_in, dX_c_in, dP_c_in)`:
    /// `<v_i(omega) v_j(omega')> = pi Sigma_ij delta(omega + omega')`,
    /// block-diagonal with unit diagonal and `+-i` cross terms.
    pub fn input_spectral_matrix(&self) -> [[Complex64; 4]; 4] {
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let zero = Complex64::new(0.0, 0.0);
        [
            [one, i, zero, zero],
            [-i, one, zero, zero],
            [zero, zero, one, i],
            [zero, zero, -i, one],
        ]
    }
}

/// Display unit of a frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridUnit {
    #[serde(rename = "omega_R")]
    OmegaR,
    #[serde(rename = "kappa")]
    Kappa,
    #[serde(rename = "omega_m")]
    OmegaM,
}

impl GridUnit {
    /// Column-header name for data files.
    pub fn column_name(self) -> &'static str {
        match self {
            GridUnit::OmegaR => "omega_over_omegaR",
            GridUnit::Kappa => "omega_over_kappa",
            GridUnit::OmegaM => "omega_over_omega_m",
        }
    }

    /// Scale factor from this unit to recoil units.
    pub fn to_recoil(self, m: &ModelParams) -> f64 {
        match self {
            GridUnit::OmegaR => 1.0,
            GridUnit::Kappa => m.cavity_decay,
            GridUnit::OmegaM => m.mechanical_frequency,
        }
    }
}

/// Ordered frequency grid in a tagged display unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub unit: GridUnit,
    pub values: Vec<f64>,
}

impl FrequencyGrid {
    /// Uniform grid over `[min, max]`. Symmetric grids (`min == -max`) must
    /// have an odd point count so omega = 0 is included.
    pub fn linear(min: f64, max: f64, points: usize, unit: GridUnit) -> Result<Self> {
        if points < 3 {
            return Err(Error::Validation {
                field: "grid.points",
                message: format!("need at least 3 points, got {points}"),
            });
        }
        if min.is_nan() || max.is_nan() || min >= max {
            return Err(Error::Validation {
                field: "grid",
                message: format!("min ({min}) must be below max ({max})"),
            });
        }
        if min == -max && points.is_multiple_of(2) {
            return Err(Error::Validation {
                field: "grid.points",
                message: "symmetric grids need an odd point count".into(),
            });
        }
        let step = (max - min) / (points - 1) as f64;
        let values = (0..points)
            .map(|i| {
                if min == -max {
                    // keep the grid exactly symmetric under negation
                    let half = (points - 1) as i64 / 2;
                    (i as i64 - half) as f64 * step
                } else {
                    min + i as f64 * step
                }
            })
            .collect();
        Ok(Self { unit, values })
    }

    /// Default display grid: 4001 points over [-6, 6] in the given unit.
    pub fn default_symmetric(unit: GridUnit) -> Self {
        Self::linear(-6.0, 6.0, 4001, unit).expect("static grid spec is valid")
    }

    pub fn step(&self) -> f64 {
        if self.values.len() < 2 {
            0.0
        } else {
            self.values[1] - self.values[0]
        }
    }
}

/// Which spectrum a series holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    PhaseNoise,
    Intensity,
    SqueezeFixedPhase(f64),
    SqueezeOptimal,
    OptimalPhase,
}

impl SpectrumKind {
    /// Column-header name for data files.
    pub fn column_name(self) -> &'static str {
        match self {
            SpectrumKind::PhaseNoise => "S_P",
            SpectrumKind::Intensity => "S_I",
            SpectrumKind::SqueezeFixedPhase(_) => "S_phi",
            SpectrumKind::SqueezeOptimal => "S_opt",
            SpectrumKind::OptimalPhase => "phi_opt",
        }
    }
}

/// Which computational route produced a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    ClosedForm,
    TransferMatrix,
}

/// A spectrum sampled on a grid, with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSeries {
    pub kind: SpectrumKind,
    pub grid: FrequencyGrid,
    pub values: Vec<f64>,
    /// Fingerprint of the model parameters the series was computed from.
    pub params_fingerprint: String,
    pub working_point: WorkingPoint,
    pub route: Route,
}

/// Per-point ingredients shared by all closed-form spectra.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Response {
    pub dd: f64,
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub om_minus: f64,
    pub wm2: f64,
}

impl Response {
    pub fn new(m: &ModelParams, wp: &WorkingPoint) -> Self {
        Self {
            dd: wp.effective_detuning,
            g: wp.linearized_coupling,
            kappa: m.cavity_decay,
            gamma: m.bec_decay,
            om_minus: m.shifted_minus,
            wm2: m.mechanical_frequency * m.mechanical_frequency,
        }
    }

    /// Shared denominator `d(omega) = Dd^2 + (kappa + i omega)^2`; never zero
    /// for kappa > 0 and real omega.
    fn denom(&self, w: f64) -> Complex64 {
        let sk = Complex64::new(self.kappa, w);
        Complex64::new(self.dd * self.dd, 0.0) + sk * sk
    }

    /// Matter response factor `W(omega) = (gamma + i omega)^2 + omega_m^2`.
    fn matter(&self, w: f64) -> Complex64 {
        let sg = Complex64::new(self.gamma, w);
        sg * sg + self.wm2
    }

    /// Inverse susceptibility `W + G^2 Dd Om- / d`.
    fn inv_susceptibility(&self, w: f64) -> Complex64 {
        self.matter(w) + self.g * self.g * self.dd * self.om_minus / self.denom(w)
    }
}

/// Effective mechanical susceptibility of the coupled system.
pub fn susceptibility(w: f64, m: &ModelParams, wp: &WorkingPoint) -> Result<Complex64> {
    let r = Response::new(m, wp);
    let inv = r.inv_susceptibility(w);
    if inv.norm() < 1e-12 {
        return Err(Error::PoleOnGrid { omega: w });
    }
    Ok(inv.inv())
}

/// Response coefficients of the intracavity phase quadrature onto the four
/// input quadratures; `f3, f4` scale with the coupling and vanish at G = 0.
pub fn coeffs_f(w: f64, m: &ModelParams, wp: &WorkingPoint) -> [Complex64; 4] {
    let r = Response::new(m, wp);
    f_coeffs(&r, w)
}

fn f_coeffs(r: &Response, w: f64) -> [Complex64; 4] {
    let d = r.denom(w);
    debug_assert!(d.norm() > 0.0);
    let sk = Complex64::new(r.kappa, w);
    let sg = Complex64::new(r.gamma, w);
    let big_w = r.matter(w);
    let sqrt2k = (2.0 * r.kappa).sqrt();
    let sqrt2g = (2.0 * r.gamma).sqrt();
    [
        sqrt2k * (r.dd * big_w + r.g * r.g * r.om_minus) / d,
        sqrt2k * sk * big_w / d,
        -r.g * sqrt2g * sg * sk / d,
        -r.g * sqrt2g * r.om_minus * sk / d,
    ]
}

/// Response coefficients of the intracavity annihilation operator onto
/// `(da_in, da_in^dagger, dX_c_in, dP_c_in)`.
///
/// The `g2` denominator is the shared `d(omega) = [kappa + i(omega - Dd)]
/// [kappa + i(omega + Dd)]`: the `da_in^dagger` channel enters through the
/// conjugate-mode resolvent, so the two factors differ. Anything else breaks
/// the agreement with the transfer-matrix route.
pub fn coeffs_g(w: f64, m: &ModelParams, wp: &WorkingPoint) -> [Complex64; 4] {
    let r = Response::new(m, wp);
    g_coeffs(&r, w)
}

fn g_coeffs(r: &Response, w: f64) -> [Complex64; 4] {
    let q = Complex64::new(r.kappa, w - r.dd);
    let d = r.denom(w); // = q * conj-mode factor
    let sg = Complex64::new(r.gamma, w);
    let sqrt2k = (2.0 * r.kappa).sqrt();
    let inv_chi = r.inv_susceptibility(w);
    let i = Complex64::i();
    let g2fac = r.g * r.g * r.om_minus;
    [
        sqrt2k / q * (inv_chi + i * g2fac / (2.0 * q)),
        i * g2fac * r.kappa.sqrt() / (2f64.sqrt() * d),
        -i * r.g * r.gamma.sqrt() * sg / q,
        -i * r.g * r.gamma.sqrt() * r.om_minus / q,
    ]
}

/// `S_P(omega) = 1/2 + kappa |chi|^2 sum_i |f_i|^2`; the vacuum floor is 1/2.
pub fn phase_noise_at(w: f64, m: &ModelParams, wp: &WorkingPoint) -> Result<f64> {
    let r = Response::new(m, wp);
    let inv = r.inv_susceptibility(w);
    if inv.norm() < 1e-12 {
        return Err(Error::PoleOnGrid { omega: w });
    }
    let chi2 = 1.0 / inv.norm_sqr();
    let f = f_coeffs(&r, w);
    let sum: f64 = f.iter().map(|c| c.norm_sqr()).sum();
    Ok(0.5 + r.kappa * chi2 * sum)
}

/// Intensity spectrum density at one frequency, symmetrized over `+-omega`.
pub fn intensity_at(w: f64, m: &ModelParams, wp: &WorkingPoint) -> Result<f64> {
    let r = Response::new(m, wp);
    let inv = r.inv_susceptibility(w);
    if inv.norm() < 1e-12 {
        return Err(Error::PoleOnGrid { omega: w });
    }
    let chi2 = 1.0 / inv.norm_sqr();
    let gp = g_coeffs(&r, w);
    let gm = g_coeffs(&r, -w);
    let quad = |g: &[Complex64; 4]| {
        2.0 * g[1].norm_sqr()
            + g[2].norm_sqr()
            + g[3].norm_sqr()
            + (Complex64::i() * (g[2].conj() * g[3] - g[3].conj() * g[2])).re
    };
    Ok(0.5 * r.kappa * chi2 * (quad(&gp) + quad(&gm)))
}

/// Frequency-symmetrized output-field correlators
/// (`C_aa`, `C_a^dag a`, `C_aa^dag`), assembled through the input-output
/// relation `da_out = sqrt(2 kappa) da - da_in`. The reflected-input
/// interference terms are kept: they are what lets the output dip below the
/// vacuum level, and they make the G = 0 output exactly vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputCorrelators {
    pub c_aa: Complex64,
    pub c_ad_a: f64,
    pub c_a_ad: f64,
}

impl OutputCorrelators {
    /// Squeezing spectrum at a fixed homodyne phase.
    pub fn fixed_phase(&self, phi: f64) -> f64 {
        let rot = Complex64::from_polar(1.0, -2.0 * phi);
        2.0 * (rot * self.c_aa).re + self.c_a_ad + self.c_ad_a
    }

    /// Phase-optimized squeezing spectrum.
    pub fn optimal(&self) -> f64 {
        -2.0 * self.c_aa.norm() + self.c_a_ad + self.c_ad_a
    }

    /// Optimal homodyne phase, `None` when `|C_aa|` is too small to define
    /// one (the optimized spectrum is then phase-independent anyway).
    pub fn optimal_phase(&self) -> Option<f64> {
        if self.c_aa.norm() < 1e-14 {
            None
        } else {
            Some(0.5 * (-self.c_aa).arg())
        }
    }
}

/// Output coefficients `h_i = sqrt(2 kappa) chi g_i - delta_{i1}`.
fn h_coeffs(r: &Response, w: f64) -> Result<[Complex64; 4]> {
    let inv = r.inv_susceptibility(w);
    if inv.norm() < 1e-12 {
        return Err(Error::PoleOnGrid { omega: w });
    }
    let chi = inv.inv();
    let g = g_coeffs(r, w);
    let s = (2.0 * r.kappa).sqrt();
    Ok([
        s * chi * g[0] - 1.0,
        s * chi * g[1],
        s * chi * g[2],
        s * chi * g[3],
    ])
}

pub(crate) fn output_correlators_closed(r: &Response, w: f64) -> Result<OutputCorrelators> {
    let hp = h_coeffs(r, w)?;
    let hm = h_coeffs(r, -w)?;
    let i = Complex64::i();
    let c_aa = 0.5 * (hp[0] * hm[1] + hm[0] * hp[1] + hp[2] * hm[2] + hp[3] * hm[3]);
    let herm = |h: &[Complex64; 4]| {
        h[2].norm_sqr() + h[3].norm_sqr() + (i * (h[2].conj() * h[3] - h[3].conj() * h[2])).re
    };
    let herm_rev = |h: &[Complex64; 4]| {
        h[2].norm_sqr() + h[3].norm_sqr() + (i * (h[2] * h[3].conj() - h[3] * h[2].conj())).re
    };
    let c_ad_a = 0.25 * (2.0 * hp[1].norm_sqr() + 2.0 * hm[1].norm_sqr() + herm(&hp) + herm(&hm));
    let c_a_ad =
        0.25 * (2.0 * hp[0].norm_sqr() + 2.0 * hm[0].norm_sqr() + herm_rev(&hp) + herm_rev(&hm));
    Ok(OutputCorrelators {
        c_aa,
        c_ad_a,
        c_a_ad,
    })
}

/// Output correlators of the transmitted field at one frequency.
pub fn output_correlators_at(
    w: f64,
    m: &ModelParams,
    wp: &WorkingPoint,
) -> Result<OutputCorrelators> {
    output_correlators_closed(&Response::new(m, wp), w)
}

/// Homodyne phase selection for the squeezing spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseChoice {
    Fixed(f64),
    Optimal,
}

/// Squeezing spectrum plus, for the optimal choice, the optimal-phase series
/// and the grid indices where the phase was undefined (|C_aa| ~ 0; the value
/// series is still valid there).
#[derive(Debug, Clone)]
pub struct SqueezingOutput {
    pub spectrum: SpectrumSeries,
    pub optimal_phase: Option<SpectrumSeries>,
    pub undefined_phase: Vec<usize>,
}

fn series(
    kind: SpectrumKind,
    grid: &FrequencyGrid,
    values: Vec<f64>,
    m: &ModelParams,
    wp: &WorkingPoint,
    route: Route,
) -> SpectrumSeries {
    SpectrumSeries {
        kind,
        grid: grid.clone(),
        values,
        params_fingerprint: format!("{:016x}", m.fingerprint()),
        working_point: wp.clone(),
        route,
    }
}

fn eval_grid<F>(grid: &FrequencyGrid, m: &ModelParams, f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    let scale = grid.unit.to_recoil(m);
    let xs = &grid.values;
    exec::try_map_indexed(xs.len(), |i| f(xs[i] * scale))
}

/// Phase-noise spectrum of the output field on a grid.
pub fn phase_noise_spectrum(
    grid: &FrequencyGrid,
    m: &ModelParams,
    wp: &WorkingPoint,
    noise: &NoiseModel,
) -> Result<SpectrumSeries> {
    noise.require_vacuum()?;
    let values = eval_grid(grid, m, |w| phase_noise_at(w, m, wp))?;
    Ok(series(
        SpectrumKind::PhaseNoise,
        grid,
        values,
        m,
        wp,
        Route::ClosedForm,
    ))
}

/// Intensity spectrum of the output field on a grid.
pub fn intensity_spectrum(
    grid: &FrequencyGrid,
    m: &ModelParams,
    wp: &WorkingPoint,
    noise: &NoiseModel,
) -> Result<SpectrumSeries> {
    noise.require_vacuum()?;
    let values = eval_grid(grid, m, |w| intensity_at(w, m, wp))?;
    Ok(series(
        SpectrumKind::Intensity,
        grid,
        values,
        m,
        wp,
        Route::ClosedForm,
    ))
}

/// Quadrature-squeezing spectrum of the output field on a grid, at a fixed
/// homodyne phase or optimized per frequency.
pub fn squeezing_spectrum(
    grid: &FrequencyGrid,
    m: &ModelParams,
    wp: &WorkingPoint,
    noise: &NoiseModel,
    choice: PhaseChoice,
) -> Result<SqueezingOutput> {
    noise.require_vacuum()?;
    let r = Response::new(m, wp);
    match choice {
        PhaseChoice::Fixed(phi) => {
            let values = eval_grid(grid, m, |w| {
                Ok(output_correlators_closed(&r, w)?.fixed_phase(phi))
            })?;
            Ok(SqueezingOutput {
                spectrum: series(
                    SpectrumKind::SqueezeFixedPhase(phi),
                    grid,
                    values,
                    m,
                    wp,
                    Route::ClosedForm,
                ),
                optimal_phase: None,
                undefined_phase: Vec::new(),
            })
        }
        PhaseChoice::Optimal => {
            let scale = grid.unit.to_recoil(m);
            let xs = &grid.values;
            let per_point: Vec<(f64, Option<f64>)> = exec::try_map_indexed(xs.len(), |i| {
                let out = output_correlators_closed(&r, xs[i] * scale)?;
                Ok::<_, Error>((out.optimal(), out.optimal_phase()))
            })?;
            let mut undefined = Vec::new();
            let mut values = Vec::with_capacity(per_point.len());
            let mut phases = Vec::with_capacity(per_point.len());
            for (i, (v, phi)) in per_point.into_iter().enumerate() {
                values.push(v);
                match phi {
                    Some(p) => phases.push(p),
                    None => {
                        undefined.push(i);
                        phases.push(0.0);
                    }
                }
            }
            Ok(SqueezingOutput {
                spectrum: series(
                    SpectrumKind::SqueezeOptimal,
                    grid,
                    values,
                    m,
                    wp,
                    Route::ClosedForm,
                ),
                optimal_phase: Some(series(
                    SpectrumKind::OptimalPhase,
                    grid,
                    phases,
                    m,
                    wp,
                    Route::ClosedForm,
                )),
                undefined_phase: undefined,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;
    use crate::steady::solve_steady_state;

    fn model(omega_sw: f64) -> ModelParams {
        // collision-protocol numbers: U0 and delta_c from the bundled Rb-87
        // parameters with the pump fixed at 0.994 of the Stark shift
        let p = crate::params::reference_rb87_params(
            crate::params::FreqValue::omega_r(24.0),
            crate::params::FreqValue::kappa(1e-3),
            crate::params::FreqValue::omega_r(81.0),
            crate::params::DetuningSpec::CavityPumpFractionOfStark(0.994),
            crate::params::SwaveSpec::Frequency(crate::params::FreqValue::omega_r(omega_sw)),
        );
        crate::params::derive_model_params(&p).unwrap()
    }

    fn working_point(m: &ModelParams) -> WorkingPoint {
        let branches = solve_steady_state(m);
        assert_eq!(branches.len(), 1);
        branches.into_iter().next().unwrap()
    }

    fn zero_coupling(m: &ModelParams) -> WorkingPoint {
        let mut wp = working_point(m);
        wp.linearized_coupling = 0.0;
        wp.photon_amplitude = 0.0;
        wp.intracavity_photons = 0.0;
        wp
    }

    #[test]
    fn susceptibility_static_limit() {
        let mut m = model(30.0);
        m.bec_decay = 0.0;
        let wp = zero_coupling(&m);
        let chi = susceptibility(0.0, &m, &wp).unwrap();
        let wm2 = m.mechanical_frequency * m.mechanical_frequency;
        assert!((chi.re - 1.0 / wm2).abs() < 1e-15);
        assert_eq!(chi.im, 0.0);
    }

    #[test]
    fn susceptibility_conjugate_symmetry() {
        let m = model(30.0);
        let wp = working_point(&m);
        for w in [0.3, 7.7, 31.2, 158.0] {
            let plus = susceptibility(w, &m, &wp).unwrap();
            let minus = susceptibility(-w, &m, &wp).unwrap();
            assert!((plus - minus.conj()).norm() < 1e-15 * plus.norm());
        }
    }

    #[test]
    fn coeffs_f_zero_coupling_and_symmetry() {
        let m = model(30.0);
        let wp0 = zero_coupling(&m);
        let f = coeffs_f(12.0, &m, &wp0);
        assert_eq!(f[2], Complex64::new(0.0, 0.0));
        assert_eq!(f[3], Complex64::new(0.0, 0.0));

        let wp = working_point(&m);
        for w in [0.5, 23.0, 161.0] {
            let fp = coeffs_f(w, &m, &wp);
            let fm = coeffs_f(-w, &m, &wp);
            for k in 0..4 {
                assert!((fp[k] - fm[k].conj()).norm() <= 1e-14 * fp[k].norm().max(1e-30));
            }
        }
    }

    #[test]
    fn coeffs_f2_at_zero_frequency() {
        // f2(0) = sqrt(2 kappa) kappa (gamma^2 + omega_m^2) / (Dd^2 + kappa^2),
        // frozen against the independently simplified expression
        let m = model(30.0);
        let wp = working_point(&m);
        let f = coeffs_f(0.0, &m, &wp);
        let dd = wp.effective_detuning;
        let expect = (2.0 * m.cavity_decay).sqrt()
            * m.cavity_decay
            * (m.bec_decay * m.bec_decay + m.mechanical_frequency * m.mechanical_frequency)
            / (dd * dd + m.cavity_decay * m.cavity_decay);
        assert!((f[1].re - expect).abs() < 1e-12 * expect);
        assert!(f[1].im.abs() < 1e-12 * expect);
    }

    #[test]
    fn coeffs_g_zero_coupling_collapses() {
        let m = model(30.0);
        let wp0 = zero_coupling(&m);
        for w in [0.0, 3.5, 40.0] {
            let g = coeffs_g(w, &m, &wp0);
            assert_eq!(g[1], Complex64::new(0.0, 0.0));
            assert_eq!(g[2], Complex64::new(0.0, 0.0));
            assert_eq!(g[3], Complex64::new(0.0, 0.0));
            let q = Complex64::new(m.cavity_decay, w - wp0.effective_detuning);
            let inv_chi = susceptibility(w, &m, &wp0).unwrap().inv();
            let expect = (2.0 * m.cavity_decay).sqrt() * inv_chi / q;
            assert!((g[0] - expect).norm() < 1e-12 * expect.norm());
        }
    }

    #[test]
    fn coeffs_g_ratio_identity() {
        // g4 / g3 = Om- / (gamma + i omega)
        let m = model(30.0);
        let wp = working_point(&m);
        for w in [0.7, 29.0, 150.0] {
            let g = coeffs_g(w, &m, &wp);
            let ratio = g[3] / g[2];
            let expect = m.shifted_minus / Complex64::new(m.bec_decay, w);
            assert!((ratio - expect).norm() < 1e-12 * expect.norm());
        }
    }

    #[test]
    fn phase_noise_floor_and_evenness() {
        let m = model(30.0);
        let wp = working_point(&m);
        let grid = FrequencyGrid::linear(-6.0, 6.0, 401, GridUnit::Kappa).unwrap();
        let s = phase_noise_spectrum(&grid, &m, &wp, &NoiseModel::vacuum()).unwrap();
        let n = s.values.len();
        for (i, v) in s.values.iter().enumerate() {
            assert!(*v >= 0.5, "S_P < 1/2 at index {i}");
            let mirror = s.values[n - 1 - i];
            assert!((v - mirror).abs() <= 1e-12 * v.abs());
        }
        // far tail returns to the vacuum floor
        let far = phase_noise_at(1e3 * m.cavity_decay, &m, &wp).unwrap();
        assert!(far - 0.5 < 1e-3);
    }

    #[test]
    fn intensity_zero_at_zero_coupling() {
        let m = model(30.0);
        let wp0 = zero_coupling(&m);
        for w in [0.0, 1.0, 10.0, 100.0] {
            assert_eq!(intensity_at(w, &m, &wp0).unwrap(), 0.0);
        }
    }

    #[test]
    fn squeezing_vacuum_level_at_zero_coupling() {
        let m = model(30.0);
        let wp0 = zero_coupling(&m);
        for w in [0.0, 0.5, 31.0, 200.0] {
            let out = output_correlators_at(w, &m, &wp0).unwrap();
            assert!((out.optimal() - 1.0).abs() < 1e-12);
            assert_eq!(out.c_aa, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn fixed_phase_never_beats_optimal() {
        let m = model(30.0);
        let wp = working_point(&m);
        let mut state = 0x1234_5678_9abc_def0u64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let w = -300.0 + 600.0 * rng();
            let phi = std::f64::consts::PI * rng();
            let out = output_correlators_at(w, &m, &wp).unwrap();
            assert!(out.fixed_phase(phi) >= out.optimal() - 1e-12);
        }
    }

    #[test]
    fn nonzero_thermal_occupancy_rejected() {
        let m = model(30.0);
        let wp = working_point(&m);
        let grid = FrequencyGrid::linear(-2.0, 2.0, 11, GridUnit::Kappa).unwrap();
        let noise = NoiseModel {
            n_ph: 0.1,
            n_c: 0.0,
        };
        assert!(matches!(
            phase_noise_spectrum(&grid, &m, &wp, &noise),
            Err(Error::NonzeroThermalOccupancy { .. })
        ));
    }

    #[test]
    fn vacuum_spectral_matrix_blocks() {
        // unit diagonal, +-i cross terms within each (X, P) block, no
        // cross-mode correlation
        let s = NoiseModel::vacuum().input_spectral_matrix();
        let i = Complex64::i();
        for b in [0, 2] {
            assert_eq!(s[b][b], Complex64::new(1.0, 0.0));
            assert_eq!(s[b + 1][b + 1], Complex64::new(1.0, 0.0));
            assert_eq!(s[b][b + 1], i);
            assert_eq!(s[b + 1][b], -i);
        }
        for (row, col) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            assert_eq!(s[row][col], Complex64::new(0.0, 0.0));
            assert_eq!(s[col][row], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn grid_validation() {
        assert!(FrequencyGrid::linear(-1.0, 1.0, 2, GridUnit::Kappa).is_err());
        assert!(FrequencyGrid::linear(-1.0, 1.0, 10, GridUnit::Kappa).is_err());
        assert!(FrequencyGrid::linear(1.0, -1.0, 11, GridUnit::Kappa).is_err());
        let g = FrequencyGrid::linear(-1.0, 1.0, 11, GridUnit::Kappa).unwrap();
        assert_eq!(g.values[5], 0.0);
        assert_eq!(g.values[0], -g.values[10]);
    }
}
