//! Minimal library walkthrough: solve the reference system at one scattering
//! frequency, report the normal-mode splitting, and scan the phase-noise
//! spectrum.
//!
//! Run with: cargo run --example splitting

use cavbec::calib::Protocol;
use cavbec::lindyn::{classified_working_points, drift_matrix, numeric_splitting};
use cavbec::spectra::{phase_noise_spectrum, FrequencyGrid, GridUnit, NoiseModel};
use cavbec::steady::select_branch_default;

fn main() -> cavbec::Result<()> {
    let model = Protocol::reference().model_at(30.0)?;
    let points = classified_working_points(&model)?;
    let (wp, _warning) = select_branch_default(&points)?;
    let split = numeric_splitting(&drift_matrix(&model, &wp))? / model.cavity_decay;
    println!("normal-mode splitting: {split:.2} kappa");

    let grid = FrequencyGrid::linear(-12.0, 12.0, 4001, GridUnit::Kappa)?;
    let spectrum = phase_noise_spectrum(&grid, &model, &wp, &NoiseModel::vacuum())?;
    println!(
        "peak S_P: {:.3}",
        spectrum.values.iter().cloned().fold(0.0, f64::max)
    );
    Ok(())
}
