//! Linearized fluctuation dynamics: the drift matrix, stability, and
//! normal-mode peak positions.
//!
//! Quadrature fluctuations `u = (dX_a, dP_a, dX_c, dP_c)` obey
//! `du/dt = M u + n` with the 4x4 drift matrix
//!
//! ```text
//!     ( -kappa   -Dd      0       0     )
//! M = (  Dd      -kappa  -G       0     )
//!     (  0        0      -gamma   Om-   )
//!     ( -G        0      -Om+    -gamma )
//! ```
//!
//! Stability is decided twice, by the Routh-Hurwitz determinants of the
//! characteristic quartic and by the eigenvalue real parts; the two verdicts
//! cross-check each other. The normal-mode splitting comes from the positive
//! imaginary parts of the eigenvalues (numeric route) and from the
//! small-damping root approximation of the response denominator (analytic
//! route).

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;

use crate::params::ModelParams;
use crate::steady::{solve_steady_state, WorkingPoint};
use crate::{Error, Result};

/// Real parts closer to zero than this are classified unstable.
pub const MARGIN_TOL: f64 = 1e-10;

/// Beyond this margin the Routh-Hurwitz and eigenvalue verdicts must agree.
const CONSISTENCY_TOL: f64 = 1e-8;

/// Drift matrix of the linearized quadrature dynamics, with the decay rates
/// that scale its vacuum noise input.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftMatrix {
    pub matrix: Matrix4<f64>,
    pub kappa: f64,
    pub gamma: f64,
}

impl DriftMatrix {
    /// Diagonal of the input-noise diffusion matrix, `(2k, 2k, 2g, 2g)`
    /// scaled by the vacuum correlators.
    pub fn noise_diffusion(&self) -> Matrix4<f64> {
        Matrix4::from_diagonal(&nalgebra::Vector4::new(
            2.0 * self.kappa,
            2.0 * self.kappa,
            2.0 * self.gamma,
            2.0 * self.gamma,
        ))
    }

    /// Monic characteristic polynomial coefficients `[c0, c1, c2, c3]` of
    /// `lambda^4 + c3 l^3 + c2 l^2 + c1 l + c0`, via Faddeev-LeVerrier.
    pub fn characteristic_coefficients(&self) -> [f64; 4] {
        let m = &self.matrix;
        let m2 = m * m;
        let m3 = m2 * m;
        let m4 = m3 * m;
        let p1 = m.trace();
        let p2 = m2.trace();
        let p3 = m3.trace();
        let p4 = m4.trace();
        let e1 = p1;
        let e2 = (e1 * p1 - p2) / 2.0;
        let e3 = (e2 * p1 - e1 * p2 + p3) / 3.0;
        let e4 = (e3 * p1 - e2 * p2 + e1 * p3 - p4) / 4.0;
        [e4, -e3, e2, -e1]
    }
}

/// Build the drift matrix at a given working point.
pub fn drift_matrix(m: &ModelParams, wp: &WorkingPoint) -> DriftMatrix {
    let dd = wp.effective_detuning;
    let g = wp.linearized_coupling;
    let k = m.cavity_decay;
    let gm = m.bec_decay;
    DriftMatrix {
        matrix: Matrix4::new(
            -k,
            -dd,
            0.0,
            0.0, //
            dd,
            -k,
            -g,
            0.0, //
            0.0,
            0.0,
            -gm,
            m.shifted_minus, //
            -g,
            0.0,
            -m.shifted_plus,
            -gm,
        ),
        kappa: k,
        gamma: gm,
    }
}

fn quartic(coeffs: &[f64; 4], z: Complex64) -> (Complex64, Complex64) {
    let [c0, c1, c2, c3] = *coeffs;
    let value = (((z + c3) * z + c2) * z + c1) * z + c0;
    let deriv = ((4.0 * z + 3.0 * c3) * z + 2.0 * c2) * z + c1;
    (value, deriv)
}

/// Eigenvalues of the drift matrix, Newton-polished on the characteristic
/// quartic and canonicalized into exact complex-conjugate pairs.
pub fn eigenvalues(dm: &DriftMatrix) -> [Complex64; 4] {
    let coeffs = dm.characteristic_coefficients();
    let raw = dm.matrix.complex_eigenvalues();
    let scale = dm.matrix.norm().max(1.0);

    let mut ev: Vec<Complex64> = raw
        .iter()
        .map(|&z| {
            let mut z = z;
            for _ in 0..6 {
                let (v, d) = quartic(&coeffs, z);
                if d.norm() == 0.0 {
                    break;
                }
                let step = v / d;
                z -= step;
                if step.norm() <= 1e-15 * z.norm().max(1.0) {
                    break;
                }
            }
            z
        })
        .collect();

    // collapse rounding noise in the imaginary parts, then pair conjugates
    for z in ev.iter_mut() {
        if z.im.abs() <= 1e-12 * scale {
            z.im = 0.0;
        }
    }
    let mut out: Vec<Complex64> = Vec::with_capacity(4);
    let mut used = [false; 4];
    for i in 0..4 {
        if used[i] {
            continue;
        }
        if ev[i].im == 0.0 {
            out.push(ev[i]);
            used[i] = true;
            continue;
        }
        // nearest unused conjugate partner
        let mut best: Option<(usize, f64)> = None;
        for j in (i + 1)..4 {
            if used[j] || ev[j].im == 0.0 || ev[j].im.signum() == ev[i].im.signum() {
                continue;
            }
            let d = (ev[j] - ev[i].conj()).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, _)) = best {
            let re = 0.5 * (ev[i].re + ev[j].re);
            let im = 0.5 * (ev[i].im.abs() + ev[j].im.abs());
            out.push(Complex64::new(re, im));
            out.push(Complex64::new(re, -im));
            used[i] = true;
            used[j] = true;
        } else {
            out.push(ev[i]);
            used[i] = true;
        }
    }
    out.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    [out[0], out[1], out[2], out[3]]
}

/// Stability verdict with the margin (largest eigenvalue real part).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub stable: bool,
    /// Largest real part over the spectrum; negative means decaying.
    pub margin: f64,
    /// The Routh-Hurwitz verdict (must agree with the eigenvalue one).
    pub hurwitz: bool,
}

/// Routh-Hurwitz test on the monic quartic `[c0, c1, c2, c3]`.
fn hurwitz_stable(coeffs: &[f64; 4]) -> bool {
    let [c0, c1, c2, c3] = *coeffs;
    let d2 = c3 * c2 - c1;
    let d3 = c1 * d2 - c3 * c3 * c0;
    c3 > 0.0 && d2 > 0.0 && d3 > 0.0 && c0 > 0.0
}

/// Decide stability via Routh-Hurwitz and via the eigenvalue margin; the two
/// routes must agree outside a narrow borderline band.
pub fn is_stable(dm: &DriftMatrix) -> Result<StabilityReport> {
    let coeffs = dm.characteristic_coefficients();
    let hurwitz = hurwitz_stable(&coeffs);
    let margin = eigenvalues(dm)
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let eig_stable = margin < -MARGIN_TOL;
    if eig_stable != hurwitz && margin.abs() > CONSISTENCY_TOL {
        return Err(Error::InconsistentStability { margin });
    }
    // borderline spectra count as unstable
    Ok(StabilityReport {
        stable: eig_stable && hurwitz,
        margin,
        hurwitz,
    })
}

/// Positive imaginary parts of the spectrum, sorted descending.
pub fn positive_imaginary_parts(ev: &[Complex64; 4]) -> Vec<f64> {
    let mut pos: Vec<f64> = ev
        .iter()
        .filter(|z| z.im > 1e-10 * (1.0 + z.norm()))
        .map(|z| z.im)
        .collect();
    pos.sort_by(|a, b| b.partial_cmp(a).unwrap());
    pos
}

/// Normal-mode splitting from the eigenvalues: difference between the two
/// positive imaginary parts. Errors when a mode has gone overdamped, rather
/// than reporting a zero that would corrupt calibration curves.
pub fn numeric_splitting(dm: &DriftMatrix) -> Result<f64> {
    let pos = positive_imaginary_parts(&eigenvalues(dm));
    if pos.len() != 2 {
        return Err(Error::OverdampedMode);
    }
    Ok(pos[0] - pos[1])
}

/// Small-damping approximation of the two positive resonance frequencies
/// `(omega_plus, omega_minus)` of the response denominator.
pub fn analytic_peaks(m: &ModelParams, wp: &WorkingPoint) -> Result<(f64, f64)> {
    let dd = wp.effective_detuning;
    let g2 = wp.linearized_coupling * wp.linearized_coupling;
    let wm2 = m.mechanical_frequency * m.mechanical_frequency;
    let dd2 = dd * dd;
    let inner = (wm2 - dd2) * (wm2 - dd2) - 4.0 * g2 * dd * m.shifted_minus;
    if inner < 0.0 {
        return Err(Error::ComplexRoot { radicand: inner });
    }
    let mid = 0.5 * (wm2 + dd2);
    let half = 0.5 * inner.sqrt();
    let lo2 = mid - half;
    if lo2 < 0.0 {
        return Err(Error::NegativeSquare { radicand: lo2 });
    }
    Ok(((mid + half).sqrt(), lo2.sqrt()))
}

/// Everything the stability/splitting surface reports for one working point.
#[derive(Debug, Clone, Serialize)]
pub struct ModeReport {
    pub eigenvalues: [Complex64; 4],
    pub stable: bool,
    pub margin: f64,
    /// Sorted descending.
    pub positive_imag_parts: Vec<f64>,
    pub numeric_splitting: Option<f64>,
    /// `(omega_plus, omega_minus)`.
    pub analytic_roots: Option<(f64, f64)>,
    pub analytic_splitting: Option<f64>,
}

/// Build the report for one working point. Only an inconsistent stability
/// cross-check is an error; undefined splittings are reported as `None`.
pub fn mode_report(m: &ModelParams, wp: &WorkingPoint) -> Result<ModeReport> {
    let dm = drift_matrix(m, wp);
    let ev = eigenvalues(&dm);
    let stab = is_stable(&dm)?;
    let pos = positive_imaginary_parts(&ev);
    let numeric = if pos.len() == 2 {
        Some(pos[0] - pos[1])
    } else {
        None
    };
    let analytic = analytic_peaks(m, wp).ok();
    Ok(ModeReport {
        eigenvalues: ev,
        stable: stab.stable,
        margin: stab.margin,
        positive_imag_parts: pos,
        numeric_splitting: numeric,
        analytic_roots: analytic,
        analytic_splitting: analytic.map(|(p, q)| p - q),
    })
}

/// Solve the steady state and fill every branch's stability flag.
pub fn classified_working_points(m: &ModelParams) -> Result<Vec<WorkingPoint>> {
    let mut points = solve_steady_state(m);
    for wp in points.iter_mut() {
        let report = is_stable(&drift_matrix(m, wp))?;
        wp.stable = Some(report.stable);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;

    fn model(omega_sw: f64, kappa: f64, gamma: f64) -> ModelParams {
        ModelParams::from_model_inputs(1e5, 0.4414, 132.42, omega_sw, kappa, gamma, 81.0, 2.37e4)
            .unwrap()
    }

    fn point(dd: f64, g: f64) -> WorkingPoint {
        WorkingPoint {
            photon_amplitude: 0.0,
            bogoliubov_amplitude: 0.0,
            effective_detuning: dd,
            linearized_coupling: g,
            intracavity_photons: 0.0,
            stable: None,
            branch_index: 0,
            regime_warning: false,
        }
    }

    #[test]
    fn trace_identity() {
        let m = model(30.0, 24.0, 0.024);
        let dm = drift_matrix(&m, &point(-157.0, 50.0));
        assert_eq!(dm.matrix.trace(), -2.0 * (24.0 + 0.024));
    }

    #[test]
    fn decoupled_blocks_at_zero_coupling() {
        let m = model(30.0, 24.0, 0.024);
        let dd = -157.0;
        let dm = drift_matrix(&m, &point(dd, 0.0));
        let ev = eigenvalues(&dm);
        // optical pair -kappa +- i dd, matter pair -gamma +- i omega_m
        let mut imags = positive_imaginary_parts(&ev);
        imags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((imags[1] - dd.abs()).abs() < 1e-9);
        assert!((imags[0] - m.mechanical_frequency).abs() < 1e-9);
        for z in ev {
            assert!((z.re + 24.0).abs() < 1e-9 || (z.re + 0.024).abs() < 1e-9);
        }
        let split = numeric_splitting(&dm).unwrap();
        assert!((split - (dd.abs() - m.mechanical_frequency)).abs() < 1e-9);
    }

    #[test]
    fn conjugate_pairing_is_exact() {
        let m = model(30.0, 24.0, 0.024);
        let dm = drift_matrix(&m, &point(-157.0, 50.0));
        let ev = eigenvalues(&dm);
        let mut by_im: Vec<_> = ev.iter().collect();
        by_im.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert_eq!(by_im[0].im, -by_im[3].im);
        assert_eq!(by_im[0].re, by_im[3].re);
        assert_eq!(by_im[1].im, -by_im[2].im);
        assert_eq!(by_im[1].re, by_im[2].re);
    }

    #[test]
    fn stable_when_decoupled() {
        let m = model(30.0, 24.0, 0.024);
        let dm = drift_matrix(&m, &point(-157.0, 0.0));
        let r = is_stable(&dm).unwrap();
        assert!(r.stable && r.hurwitz);
        // gamma < kappa, so the margin is the matter decay
        assert!((r.margin + 0.024).abs() < 1e-9);
    }

    #[test]
    fn analytic_peaks_collapse_at_zero_coupling() {
        let m = model(30.0, 24.0, 0.024);
        let (hi, lo) = analytic_peaks(&m, &point(-157.0, 0.0)).unwrap();
        assert!((hi - 157.0).abs() < 1e-12);
        assert!((lo - m.mechanical_frequency).abs() < 1e-12);
    }

    #[test]
    fn analytic_peaks_degenerate_detuning() {
        // |Dd| = omega_m: the split is symmetric, w+-^2 = wm^2 +- G sqrt(|Dd| Om-)
        let m = model(30.0, 24.0, 0.024);
        let wm = m.mechanical_frequency;
        let g = 10.0;
        let (hi, lo) = analytic_peaks(&m, &point(-wm, g)).unwrap();
        let shift = g * (wm * m.shifted_minus).sqrt();
        assert!((hi * hi - (wm * wm + shift)).abs() < 1e-9 * wm * wm);
        assert!((lo * lo - (wm * wm - shift)).abs() < 1e-9 * wm * wm);
    }

    #[test]
    fn complex_root_reported_not_clamped() {
        // positive detuning with strong coupling drives the inner radicand
        // negative
        let m = model(30.0, 24.0, 0.024);
        let wm = m.mechanical_frequency;
        let err = analytic_peaks(&m, &point(wm, 300.0)).unwrap_err();
        assert!(matches!(err, Error::ComplexRoot { .. }));
    }

    #[test]
    fn hurwitz_matches_eigenvalues_on_random_matrices() {
        // xorshift64 for deterministic draws
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut unstable_seen = 0;
        for _ in 0..10_000 {
            let kappa = 1.0 + 99.0 * rng();
            let gamma = 1e-3 + 10.0 * rng();
            let wsw = 120.0 * rng();
            let dd = -400.0 + 800.0 * rng();
            let g = 300.0 * rng();
            let m =
                ModelParams::from_model_inputs(1e5, 0.44, 100.0, wsw, kappa, gamma, 81.0, 2.4e4)
                    .unwrap();
            let dm = drift_matrix(&m, &point(dd, g));
            let r = is_stable(&dm).expect("routes disagree");
            if !r.stable {
                unstable_seen += 1;
            }
            if r.margin.abs() > 1e-8 {
                assert_eq!(r.stable, r.hurwitz);
            }
        }
        assert!(unstable_seen > 100, "draws covered too few unstable cases");
    }

    #[test]
    fn coupling_threshold_matches_static_bound() {
        // scan G upward at a fixed contrived point until the largest real
        // part crosses zero; the crossing is the zero-frequency instability
        // whose closed-form bound is G^2 = (k^2+Dd^2)(g^2+wm^2)/(|Dd| Om-)
        let m = model(30.0, 24.0, 0.024);
        let dd = -50.0;
        let (mut lo, mut hi) = (0.0f64, 500.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let stable = is_stable(&drift_matrix(&m, &point(dd, mid)))
                .unwrap()
                .stable;
            if stable {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let found = 0.5 * (lo + hi);
        let wm2 = m.mechanical_frequency * m.mechanical_frequency;
        let bound = ((24.0f64 * 24.0 + dd * dd) * (0.024f64 * 0.024 + wm2)
            / (dd.abs() * m.shifted_minus))
            .sqrt();
        assert!(
            (found - bound).abs() < 1e-6 * bound,
            "threshold {found} vs bound {bound}"
        );
    }

    #[test]
    fn overdamped_mode_is_an_error() {
        // at zero detuning the optical pair is purely real (-kappa twice),
        // leaving a single positive imaginary part
        let m = model(0.0, 24.0, 0.024);
        let dm = drift_matrix(&m, &point(0.0, 0.0));
        assert!(matches!(numeric_splitting(&dm), Err(Error::OverdampedMode)));
    }
}
