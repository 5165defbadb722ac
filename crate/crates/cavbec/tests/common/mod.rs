//! Shared fixtures for the integration suites.
#![allow(dead_code)] // each suite uses its own subset

use cavbec::calib::Protocol;
use cavbec::params::ModelParams;
use cavbec::steady::WorkingPoint;

/// Deterministic xorshift64* in [0, 1).
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed.max(1))
    }

    pub fn next(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0.wrapping_mul(0x2545_f491_4f6c_dd1d) >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }
}

/// Collision-protocol model at one scattering frequency (the bundled Rb-87
/// system, pump at 0.994 of the Stark shift, kappa = 24, eta = 81).
pub fn collision_model(omega_sw: f64) -> ModelParams {
    Protocol::reference()
        .model_at(omega_sw)
        .expect("reference protocol is valid")
}

/// The unique steady branch of the collision protocol at `omega_sw`.
pub fn collision_point(omega_sw: f64) -> (ModelParams, WorkingPoint) {
    let m = collision_model(omega_sw);
    let branches = cavbec::steady::solve_steady_state(&m);
    assert_eq!(branches.len(), 1, "collision protocol has a unique branch");
    let wp = branches.into_iter().next().unwrap();
    (m, wp)
}

/// Draw random model parameters until `n` of them have a stable
/// lowest-intensity branch; returns (model, stable working point) pairs.
pub fn random_stable_sets(n: usize, seed: u64) -> Vec<(ModelParams, WorkingPoint)> {
    let mut rng = Rng::new(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let atom_count = rng.range(1e4, 2e5);
        let lattice_depth = rng.range(0.1, 0.8);
        let stark_detuning = rng.range(20.0, 400.0);
        let omega_sw = rng.range(0.0, 120.0);
        let kappa = rng.range(5.0, 100.0);
        let gamma = kappa * rng.range(1e-3, 0.2);
        let eta = rng.range(10.0, 200.0);
        let m = ModelParams::from_model_inputs(
            atom_count,
            lattice_depth,
            stark_detuning,
            omega_sw,
            kappa,
            gamma,
            eta,
            2.37e4,
        )
        .unwrap();
        let Ok(points) = cavbec::lindyn::classified_working_points(&m) else {
            continue;
        };
        if let Some(wp) = points.into_iter().find(|p| p.stable == Some(true)) {
            out.push((m, wp));
        }
    }
    out
}
