//! Transfer-matrix route for every correlator.
//!
//! In the frequency domain the fluctuation vector solves
//! `u(omega) = (i omega I - M)^{-1} n(omega)`, so all frequency-symmetrized,
//! operator-ordered quadrature correlators follow from pure linear algebra:
//!
//! ```text
//! C(omega) = 1/4 [ T(omega) Sigma T(-omega)^T + T(-omega) Sigma T(omega)^T ],
//! T(omega) = (i omega I - M)^{-1} K,   K = diag(sqrt(2k), sqrt(2k), sqrt(2g), sqrt(2g)),
//! ```
//!
//! with `Sigma` the vacuum input spectral matrix. No response coefficient
//! enters anywhere, which makes this route an independent oracle for the
//! closed forms: the same output assemblies applied to both routes agree to
//! near machine precision.

use nalgebra::{Matrix2x4, Matrix4, SMatrix};
use num_complex::Complex64;

use crate::lindyn::DriftMatrix;
use crate::spectra::{NoiseModel, OutputCorrelators};
use crate::{Error, Result};

type CMatrix4 = Matrix4<Complex64>;
type CMatrix2x4 = Matrix2x4<Complex64>;
type CMatrix2 = SMatrix<Complex64, 2, 2>;

/// Frequency-symmetrized, operator-ordered quadrature correlators
/// `C_xy(omega)` over the basis `(dX_a, dP_a, dX_c, dP_c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadCorrelators {
    pub c: CMatrix4,
}

fn sigma(noise: &NoiseModel) -> CMatrix4 {
    let s = noise.input_spectral_matrix();
    CMatrix4::from_fn(|i, j| s[i][j])
}

/// `(i omega I - M)^{-1} K`, the response of `u(omega)` to the bare input
/// quadratures.
fn response(w: f64, dm: &DriftMatrix) -> Result<CMatrix4> {
    let mut a = CMatrix4::from_fn(|i, j| Complex64::new(-dm.matrix[(i, j)], 0.0));
    for i in 0..4 {
        a[(i, i)] += Complex64::new(0.0, w);
    }
    // det(i w I - M) is the characteristic quartic at i w; it vanishes when
    // i w hits an eigenvalue and the float inverse would only return noise
    let scale = dm.matrix.amax().max(w.abs()).max(1.0);
    if a.determinant().norm() <= 1e-13 * scale.powi(4) {
        return Err(Error::SingularResolvent { omega: w });
    }
    let inv = a
        .try_inverse()
        .ok_or(Error::SingularResolvent { omega: w })?;
    let scale = [
        (2.0 * dm.kappa).sqrt(),
        (2.0 * dm.kappa).sqrt(),
        (2.0 * dm.gamma).sqrt(),
        (2.0 * dm.gamma).sqrt(),
    ];
    Ok(CMatrix4::from_fn(|i, j| inv[(i, j)] * scale[j]))
}

/// All pairwise intracavity quadrature correlators at one frequency.
pub fn transfer_matrix_correlators(
    w: f64,
    dm: &DriftMatrix,
    noise: &NoiseModel,
) -> Result<QuadCorrelators> {
    noise.require_vacuum()?;
    let tp = response(w, dm)?;
    let tm = response(-w, dm)?;
    let s = sigma(noise);
    let c = (tp * s * tm.transpose() + tm * s * tp.transpose()).map(|z| 0.25 * z);
    Ok(QuadCorrelators { c })
}

impl QuadCorrelators {
    /// Power spectral density of one basis quadrature (diagonal entry).
    pub fn psd(&self, index: usize) -> f64 {
        self.c[(index, index)].re
    }

    /// Rotate the optical block to annihilation/creation correlators:
    /// `(C_aa, C_a^dag a, C_aa^dag)`.
    pub fn optical_mode_correlators(&self) -> (Complex64, Complex64, Complex64) {
        rotate_block(
            self.c[(0, 0)],
            self.c[(0, 1)],
            self.c[(1, 0)],
            self.c[(1, 1)],
        )
    }
}

/// Quadrature-to-mode rotation shared by the intracavity and output blocks.
fn rotate_block(
    xx: Complex64,
    xp: Complex64,
    px: Complex64,
    pp: Complex64,
) -> (Complex64, Complex64, Complex64) {
    let i = Complex64::i();
    let c_aa = 0.5 * (xx + i * xp + i * px - pp);
    let c_ad_a = 0.5 * (xx + i * xp - i * px + pp);
    let c_a_ad = 0.5 * (xx - i * xp + i * px + pp);
    (c_aa, c_ad_a, c_a_ad)
}

/// Output response: `sqrt(2 kappa) T_optical - E`, the coefficient matrix of
/// the transmitted quadratures on the input vector.
fn output_response(w: f64, dm: &DriftMatrix) -> Result<CMatrix2x4> {
    let t = response(w, dm)?;
    let s = (2.0 * dm.kappa).sqrt();
    let mut out = CMatrix2x4::from_fn(|i, j| s * t[(i, j)]);
    out[(0, 0)] -= 1.0;
    out[(1, 1)] -= 1.0;
    Ok(out)
}

/// Output-field correlators assembled on the transfer-matrix route.
pub fn output_correlators_transfer(
    w: f64,
    dm: &DriftMatrix,
    noise: &NoiseModel,
) -> Result<OutputCorrelators> {
    noise.require_vacuum()?;
    let tp = output_response(w, dm)?;
    let tm = output_response(-w, dm)?;
    let s = sigma(noise);
    let c: CMatrix2 = (tp * s * tm.transpose() + tm * s * tp.transpose()).map(|z| 0.25 * z);
    let (c_aa, c_ad_a, c_a_ad) = rotate_block(c[(0, 0)], c[(0, 1)], c[(1, 0)], c[(1, 1)]);
    Ok(OutputCorrelators {
        c_aa,
        c_ad_a: c_ad_a.re,
        c_a_ad: c_a_ad.re,
    })
}

/// Phase-noise spectrum on this route: `1/2 + 2 kappa PSD_{P_a}`.
pub fn phase_noise_transfer(w: f64, dm: &DriftMatrix, noise: &NoiseModel) -> Result<f64> {
    let c = transfer_matrix_correlators(w, dm, noise)?;
    Ok(0.5 + 2.0 * dm.kappa * c.psd(1))
}

/// Intensity spectrum on this route: `2 kappa C_a^dag a`.
pub fn intensity_transfer(w: f64, dm: &DriftMatrix, noise: &NoiseModel) -> Result<f64> {
    let c = transfer_matrix_correlators(w, dm, noise)?;
    let (_, c_ad_a, _) = c.optical_mode_correlators();
    Ok(2.0 * dm.kappa * c_ad_a.re)
}

/// Optimal squeezing spectrum on this route.
pub fn squeeze_optimal_transfer(w: f64, dm: &DriftMatrix, noise: &NoiseModel) -> Result<f64> {
    Ok(output_correlators_transfer(w, dm, noise)?.optimal())
}
