//! One-off calibration of the empirical constants used as defaults:
//! the Peres-forest visibility scale and the random-net size factor.

use serde::{Deserialize, Serialize};

use crate::analysis::estimate_visibility;
use crate::epsnet::{hw_net, verify_net, BoxSampler};
use crate::error::Result;
use crate::generators::PointSetSpec;
use crate::geometry::Window;

/// Net size factor used when none is given; from the calibration fixture.
pub const DEFAULT_HW_C: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityCalibration {
    pub epsilons: Vec<f64>,
    pub l_max: f64,
    pub probes: usize,
    pub window_radius: f64,
    pub seed: u64,
    /// `V̂(ε)` for each entry of `epsilons`.
    pub estimates: Vec<f64>,
    /// `2·max V̂(ε)·ε³`.
    pub constant: f64,
}

impl VisibilityCalibration {
    /// Calibrated length `C·ε⁻³`.
    pub fn length(&self, eps: f64) -> f64 {
        self.constant * eps.powi(-3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HwCalibration {
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    pub target: f64,
    /// `(C, hit fraction)` for each candidate tried.
    pub candidates: Vec<(f64, f64)>,
    /// Smallest candidate reaching the target, if any.
    pub constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub visibility: VisibilityCalibration,
    pub hw: HwCalibration,
}

pub fn calibrate_visibility(
    epsilons: &[f64],
    l_max: f64,
    probes: usize,
    window_radius: f64,
    seed: u64,
) -> Result<VisibilityCalibration> {
    let window = Window::centered(2, window_radius)?;
    let spec = PointSetSpec::PeresForest;
    let estimates = epsilons
        .iter()
        .map(|e| estimate_visibility(&spec, *e, l_max, probes, &window, seed))
        .collect::<Result<Vec<f64>>>()?;
    let constant = 2.0
        * estimates
            .iter()
            .zip(epsilons)
            .map(|(v, e)| v * e.powi(3))
            .fold(0.0, f64::max);
    Ok(VisibilityCalibration {
        epsilons: epsilons.to_vec(),
        l_max,
        probes,
        window_radius,
        seed,
        estimates,
        constant,
    })
}

/// Tries `C = 2^k` for `k = 0, …, 6` at aligned boxes of volume `ε`.
pub fn calibrate_hw(eps: f64, trials: usize, seed: u64, target: f64) -> Result<HwCalibration> {
    let mut candidates = Vec::new();
    let mut constant = None;
    for k in 0..=6 {
        let c = f64::from(1u32 << k);
        let net = hw_net(eps, 2, c, seed)?;
        let f = verify_net(&net, BoxSampler::Aligned, eps, trials, seed)?.hit_fraction;
        candidates.push((c, f));
        if constant.is_none() && f >= target {
            constant = Some(c);
        }
    }
    Ok(HwCalibration {
        epsilon: eps,
        trials,
        seed,
        target,
        candidates,
        constant,
    })
}
