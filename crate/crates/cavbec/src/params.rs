//! Laboratory inputs and the dimensionless model parameters derived from them.
//!
//! The natural frequency unit of the model is the recoil frequency of the
//! condensate atoms, `omega_R = hbar k^2 / (2 m_a)` with `k = 2 pi / lambda`.
//! Every module downstream of this one works in recoil units; SI quantities
//! appear only here, at the boundary.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Mass of a Rb-87 atom, kg.
pub const RB87_MASS_KG: f64 = 86.909_180_527 * 1.660_539_066_60e-27;

/// Unit tag for a frequency-like input quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FreqUnit {
    /// Angular frequency in rad/s.
    #[serde(rename = "rad_s")]
    RadS,
    /// Multiples of the recoil frequency.
    #[serde(rename = "omega_R")]
    OmegaR,
    /// Multiples of the cavity decay rate.
    #[serde(rename = "kappa")]
    Kappa,
}

/// A frequency with an explicit unit tag, as read from config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqValue {
    pub value: f64,
    pub unit: FreqUnit,
}

impl FreqValue {
    pub fn rad_s(value: f64) -> Self {
        Self {
            value,
            unit: FreqUnit::RadS,
        }
    }

    pub fn omega_r(value: f64) -> Self {
        Self {
            value,
            unit: FreqUnit::OmegaR,
        }
    }

    pub fn kappa(value: f64) -> Self {
        Self {
            value,
            unit: FreqUnit::Kappa,
        }
    }

    /// Resolve to recoil units. `kappa_recoil` must be known (already in
    /// recoil units) before a kappa-tagged value can be resolved.
    fn in_recoil(
        self,
        field: &'static str,
        recoil_rad_s: f64,
        kappa_recoil: Option<f64>,
    ) -> Result<f64> {
        match self.unit {
            FreqUnit::RadS => Ok(self.value / recoil_rad_s),
            FreqUnit::OmegaR => Ok(self.value),
            FreqUnit::Kappa => kappa_recoil
                .map(|k| self.value * k)
                .ok_or(Error::Validation {
                    field,
                    message: "cannot be given in units of kappa".into(),
                }),
        }
    }
}

/// How the cavity-pump detuning is specified. Exactly one variant is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningSpec {
    /// Cavity-pump detuning (pump frequency minus cavity frequency).
    CavityPump(FreqValue),
    /// Stark-shifted detuning given directly.
    StarkShifted(FreqValue),
    /// Cavity-pump detuning as a fraction of the collective Stark shift.
    CavityPumpFractionOfStark(f64),
}

/// How the s-wave scattering frequency is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwaveSpec {
    /// The scattering frequency itself.
    Frequency(FreqValue),
    /// Two-body s-wave scattering length in meters; converted using the mode
    /// waist, cavity length, atom number, and atomic mass.
    ScatteringLengthM(f64),
}

/// Laboratory parameters of the coupled cavity-condensate system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub atom_count: u64,
    pub cavity_length_m: f64,
    pub pump_wavelength_m: f64,
    pub cavity_frequency_rad_s: f64,
    pub atomic_frequency_rad_s: f64,
    pub vacuum_rabi_rad_s: f64,
    pub mode_waist_m: f64,
    pub atom_mass_kg: f64,
    pub cavity_decay: FreqValue,
    pub bec_decay: FreqValue,
    pub drive_amplitude: FreqValue,
    pub detuning: DetuningSpec,
    pub swave: SwaveSpec,
}

impl PhysicalParams {
    fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Validation {
                    field,
                    message: format!("must be > 0, got {v}"),
                })
            }
        }
        if self.atom_count < 1 {
            return Err(Error::Validation {
                field: "atom_count",
                message: "must be >= 1".into(),
            });
        }
        positive("cavity_length_m", self.cavity_length_m)?;
        positive("pump_wavelength_m", self.pump_wavelength_m)?;
        positive("mode_waist_m", self.mode_waist_m)?;
        positive("atom_mass_kg", self.atom_mass_kg)?;
        if self.vacuum_rabi_rad_s < 0.0 || !self.vacuum_rabi_rad_s.is_finite() {
            return Err(Error::Validation {
                field: "vacuum_rabi_rad_s",
                message: "must be >= 0".into(),
            });
        }
        if self.cavity_decay.value <= 0.0 {
            return Err(Error::Validation {
                field: "cavity_decay",
                message: format!("must be > 0, got {}", self.cavity_decay.value),
            });
        }
        if self.bec_decay.value <= 0.0 {
            return Err(Error::Validation {
                field: "bec_decay",
                message: format!("must be > 0, got {}", self.bec_decay.value),
            });
        }
        if self.drive_amplitude.value < 0.0 {
            return Err(Error::Validation {
                field: "drive_amplitude",
                message: "must be >= 0".into(),
            });
        }
        if self.cavity_frequency_rad_s <= self.atomic_frequency_rad_s {
            return Err(Error::Validation {
                field: "cavity_frequency_rad_s",
                message: "dispersive regime requires the cavity above the atomic resonance".into(),
            });
        }
        Ok(())
    }
}

/// Dimensionless model parameters. Every frequency is in recoil units
/// (`omega_R = 1`); `recoil_rad_s` anchors conversions back to SI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Recoil frequency in rad/s, the unit everything else is expressed in.
    pub recoil_rad_s: f64,
    /// Atom number N.
    pub atom_count: f64,
    /// Optical-lattice barrier height per photon, U_0.
    pub lattice_depth: f64,
    /// Collective Stark shift, Delta_0 = N U_0 / 2.
    pub stark_shift: f64,
    /// Stark-shifted detuning, delta_c.
    pub stark_detuning: f64,
    /// s-wave scattering frequency, omega_sw.
    pub swave_frequency: f64,
    /// Bogoliubov-mode frequency, Omega_c = 4 + omega_sw.
    pub bogoliubov_frequency: f64,
    /// Omega_c + omega_sw / 2.
    pub shifted_plus: f64,
    /// Omega_c - omega_sw / 2.
    pub shifted_minus: f64,
    /// Effective mechanical frequency, omega_m = sqrt(shifted_plus * shifted_minus).
    pub mechanical_frequency: f64,
    /// Bare optomechanical coupling, zeta = sqrt(N) U_0 / 2.
    pub bare_coupling: f64,
    /// Cavity decay rate, kappa.
    pub cavity_decay: f64,
    /// Damping of the collective density excitation, gamma.
    pub bec_decay: f64,
    /// Drive amplitude, eta.
    pub drive_amplitude: f64,
}

impl ModelParams {
    /// Build from dimensionless inputs (recoil units), computing the derived
    /// frequencies. `recoil_rad_s` is only used for SI conversions.
    #[allow(clippy::too_many_arguments)]
    pub fn from_model_inputs(
        atom_count: f64,
        lattice_depth: f64,
        stark_detuning: f64,
        swave_frequency: f64,
        cavity_decay: f64,
        bec_decay: f64,
        drive_amplitude: f64,
        recoil_rad_s: f64,
    ) -> Result<Self> {
        if atom_count.is_nan() || atom_count < 1.0 {
            return Err(Error::Validation {
                field: "atom_count",
                message: format!("must be >= 1, got {atom_count}"),
            });
        }
        if lattice_depth.is_nan() || lattice_depth < 0.0 {
            return Err(Error::Validation {
                field: "lattice_depth",
                message: format!("must be >= 0, got {lattice_depth}"),
            });
        }
        if swave_frequency.is_nan() || swave_frequency < 0.0 {
            return Err(Error::Validation {
                field: "swave_frequency",
                message: format!("must be >= 0, got {swave_frequency}"),
            });
        }
        if cavity_decay.is_nan() || cavity_decay <= 0.0 {
            return Err(Error::Validation {
                field: "cavity_decay",
                message: format!("must be > 0, got {cavity_decay}"),
            });
        }
        if bec_decay.is_nan() || bec_decay < 0.0 {
            return Err(Error::Validation {
                field: "bec_decay",
                message: format!("must be >= 0, got {bec_decay}"),
            });
        }
        if drive_amplitude.is_nan() || drive_amplitude < 0.0 {
            return Err(Error::Validation {
                field: "drive_amplitude",
                message: format!("must be >= 0, got {drive_amplitude}"),
            });
        }
        if recoil_rad_s.is_nan() || recoil_rad_s <= 0.0 {
            return Err(Error::Validation {
                field: "recoil_rad_s",
                message: format!("must be > 0, got {recoil_rad_s}"),
            });
        }
        let bogoliubov_frequency = 4.0 + swave_frequency;
        let shifted_plus = bogoliubov_frequency + swave_frequency / 2.0;
        let shifted_minus = bogoliubov_frequency - swave_frequency / 2.0;
        Ok(Self {
            recoil_rad_s,
            atom_count,
            lattice_depth,
            stark_shift: atom_count * lattice_depth / 2.0,
            stark_detuning,
            swave_frequency,
            bogoliubov_frequency,
            shifted_plus,
            shifted_minus,
            mechanical_frequency: (shifted_plus * shifted_minus).sqrt(),
            bare_coupling: atom_count.sqrt() * lattice_depth / 2.0,
            cavity_decay,
            bec_decay,
            drive_amplitude,
        })
    }

    /// Same as [`ModelParams::from_model_inputs`] with the frequency-like
    /// inputs given in rad/s.
    #[allow(clippy::too_many_arguments)]
    pub fn from_rad_s_inputs(
        atom_count: f64,
        lattice_depth_rad_s: f64,
        stark_detuning_rad_s: f64,
        swave_frequency_rad_s: f64,
        cavity_decay_rad_s: f64,
        bec_decay_rad_s: f64,
        drive_amplitude_rad_s: f64,
        recoil_rad_s: f64,
    ) -> Result<Self> {
        if recoil_rad_s.is_nan() || recoil_rad_s <= 0.0 {
            return Err(Error::Validation {
                field: "recoil_rad_s",
                message: format!("must be > 0, got {recoil_rad_s}"),
            });
        }
        Self::from_model_inputs(
            atom_count,
            lattice_depth_rad_s / recoil_rad_s,
            stark_detuning_rad_s / recoil_rad_s,
            swave_frequency_rad_s / recoil_rad_s,
            cavity_decay_rad_s / recoil_rad_s,
            bec_decay_rad_s / recoil_rad_s,
            drive_amplitude_rad_s / recoil_rad_s,
            recoil_rad_s,
        )
    }

    /// FNV-1a hash over the defining fields, for spectrum provenance records.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: f64| {
            for b in v.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.recoil_rad_s);
        eat(self.atom_count);
        eat(self.lattice_depth);
        eat(self.stark_detuning);
        eat(self.swave_frequency);
        eat(self.cavity_decay);
        eat(self.bec_decay);
        eat(self.drive_amplitude);
        h
    }
}

/// Oscillation frequency of the condensate density mode at scattering
/// frequency `omega_sw` (recoil units):
/// `sqrt((4 + omega_sw/2) (4 + 3 omega_sw/2))`.
///
/// `omega_sw` must be nonnegative.
pub fn mechanical_frequency(omega_sw: f64) -> f64 {
    debug_assert!(omega_sw >= 0.0);
    ((4.0 + omega_sw / 2.0) * (4.0 + 1.5 * omega_sw)).sqrt()
}

/// Convert laboratory parameters to the dimensionless model parameters.
///
/// The atomic detuning is evaluated at the cavity frequency
/// (`Delta_a = omega_c - omega_a`); the pump sits within a few parts in 10^3
/// of the cavity line for every regime of interest, so the error in U_0 is
/// negligible and the circular dependency on the pump frequency is avoided.
pub fn derive_model_params(p: &PhysicalParams) -> Result<ModelParams> {
    p.validate()?;
    let wavenumber = 2.0 * std::f64::consts::PI / p.pump_wavelength_m;
    let recoil_rad_s = HBAR * wavenumber * wavenumber / (2.0 * p.atom_mass_kg);

    let delta_a = p.cavity_frequency_rad_s - p.atomic_frequency_rad_s;
    if delta_a <= 0.0 {
        return Err(Error::Validation {
            field: "atomic_frequency_rad_s",
            message: "non-dispersive regime: cavity-atom detuning must be positive".into(),
        });
    }
    let lattice_depth = p.vacuum_rabi_rad_s * p.vacuum_rabi_rad_s / delta_a / recoil_rad_s;
    let n = p.atom_count as f64;
    let stark_shift = n * lattice_depth / 2.0;

    let cavity_decay = p
        .cavity_decay
        .in_recoil("cavity_decay", recoil_rad_s, None)?;
    let bec_decay = p
        .bec_decay
        .in_recoil("bec_decay", recoil_rad_s, Some(cavity_decay))?;
    let drive_amplitude =
        p.drive_amplitude
            .in_recoil("drive_amplitude", recoil_rad_s, Some(cavity_decay))?;

    let swave_frequency = match p.swave {
        SwaveSpec::Frequency(f) => f.in_recoil("swave", recoil_rad_s, Some(cavity_decay))?,
        SwaveSpec::ScatteringLengthM(a_s) => {
            8.0 * std::f64::consts::PI * HBAR * a_s * n
                / (p.atom_mass_kg * p.cavity_length_m * p.mode_waist_m * p.mode_waist_m)
                / recoil_rad_s
        }
    };
    if swave_frequency < 0.0 {
        return Err(Error::Validation {
            field: "swave",
            message: format!("scattering frequency must be >= 0, got {swave_frequency}"),
        });
    }

    let stark_detuning = match p.detuning {
        DetuningSpec::StarkShifted(f) => {
            f.in_recoil("detuning", recoil_rad_s, Some(cavity_decay))?
        }
        DetuningSpec::CavityPump(f) => {
            -f.in_recoil("detuning", recoil_rad_s, Some(cavity_decay))? + stark_shift
        }
        DetuningSpec::CavityPumpFractionOfStark(frac) => (1.0 - frac) * stark_shift,
    };

    ModelParams::from_model_inputs(
        n,
        lattice_depth,
        stark_detuning,
        swave_frequency,
        cavity_decay,
        bec_decay,
        drive_amplitude,
        recoil_rad_s,
    )
}

/// Laboratory parameter set used by the bundled presets and the default
/// calibration protocol: 10^5 Rb-87 atoms in a 187 um cavity at 780 nm with
/// a 25 um mode waist and a vacuum Rabi coupling of 2 pi x 14.1 MHz.
pub fn reference_rb87_params(
    cavity_decay: FreqValue,
    bec_decay: FreqValue,
    drive_amplitude: FreqValue,
    detuning: DetuningSpec,
    swave: SwaveSpec,
) -> PhysicalParams {
    PhysicalParams {
        atom_count: 100_000,
        cavity_length_m: 187e-6,
        pump_wavelength_m: 780e-9,
        cavity_frequency_rad_s: 2.414_94e15,
        atomic_frequency_rad_s: 2.414_19e15,
        vacuum_rabi_rad_s: 2.0 * std::f64::consts::PI * 14.1e6,
        mode_waist_m: 25e-6,
        atom_mass_kg: RB87_MASS_KG,
        cavity_decay,
        bec_decay,
        drive_amplitude,
        detuning,
        swave,
    }
}
