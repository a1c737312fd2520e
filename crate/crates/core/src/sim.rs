//! Block-level Monte Carlo simulator for the three schemes, with a discrete
//! or continuous battery. One run is a single sequential stream (the battery
//! is a serial dependency); independent runs may execute concurrently.
//!
//! Random stream discipline: one ChaCha12 stream per run seeded from
//! `SimConfig::seed`; each block consumes H first, then G, each as a fixed
//! number of uniform draws, so results are bit-reproducible across
//! platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::chain::BatteryModel;
use crate::channel::{
    harvested_energy, instantaneous_snrs, outage_threshold, sample_channel_power,
    snr_constants_with_lambda, Mode, SystemParams,
};
use crate::error::{Error, Result};
use crate::gammasum::discretize_energy;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatteryMode {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    PsEa,
    TsEa,
    PsNoEa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub n_blocks: u64,
    pub seed: u64,
    pub battery_mode: BatteryMode,
    pub scheme: Scheme,
}

/// Monte Carlo estimate of the system throughput plus occupancy diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Mean per-block score, bits/s/Hz.
    pub psi_hat: f64,
    /// Sample standard deviation of the per-block score over sqrt(n).
    pub std_err: f64,
    /// Fraction of blocks spent in Mode II (forwarding).
    pub p_mode2_hat: f64,
    /// Normalized level occupancy at block starts; discrete mode only.
    pub occupancy: Option<Vec<f64>>,
}

/// Normalized occupancy histogram of a discrete-mode result.
pub fn empirical_stationary(result: &SimResult) -> Result<Vec<f64>> {
    result
        .occupancy
        .clone()
        .ok_or_else(|| Error::SimConfig("occupancy requires a discrete-battery run".into()))
}

pub fn run_simulation(
    cfg: &SimConfig,
    params: &SystemParams,
    battery: &BatteryModel,
) -> Result<SimResult> {
    params.validate()?;
    if cfg.n_blocks < 1 {
        return Err(Error::SimConfig("n_blocks must be >= 1".into()));
    }
    if cfg.scheme == Scheme::PsNoEa && cfg.battery_mode == BatteryMode::Discrete {
        return Err(Error::SimConfig(
            "ps-noea has no battery; discrete battery mode is a misconfiguration".into(),
        ));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);

    let v_a = outage_threshold(params.sigma_a);
    let v_b = outage_threshold(params.sigma_b);
    let p_r = battery.relay_power();
    let eps1 = battery.eps1();
    let levels = battery.levels;
    let threshold = battery.delta as f64 * eps1; // == P_R / 2

    // SNR constants are block-invariant for PS-EA / TS-EA.
    let consts_ps = snr_constants_with_lambda(params, p_r, params.lambda)?;
    let consts_ts = snr_constants_with_lambda(params, p_r, 0.0)?;

    let mut level: u32 = 0; // discrete state
    let mut energy: f64 = 0.0; // continuous state
    let mut occupancy = vec![0u64; levels as usize + 1];

    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    let mut mode2_blocks = 0u64;

    for _ in 0..cfg.n_blocks {
        let h = sample_channel_power(params.m_a, params.omega_a, &mut rng);
        let g = sample_channel_power(params.m_b, params.omega_b, &mut rng);

        let score = match cfg.scheme {
            Scheme::PsNoEa => {
                // No battery: split every block, forward with all the energy
                // harvested in the first half.
                mode2_blocks += 1;
                let e2 = harvested_energy(h, g, params, Mode::II);
                if e2 > 0.0 {
                    let consts = snr_constants_with_lambda(params, 2.0 * e2, params.lambda)?;
                    let (ga, gb) = instantaneous_snrs(h, g, &consts);
                    params.sigma_b * f64::from(ga > v_b) + params.sigma_a * f64::from(gb > v_a)
                } else {
                    0.0
                }
            }
            Scheme::PsEa | Scheme::TsEa => {
                if cfg.battery_mode == BatteryMode::Discrete {
                    occupancy[level as usize] += 1;
                }
                let stored = match cfg.battery_mode {
                    BatteryMode::Discrete => level as f64 * eps1,
                    BatteryMode::Continuous => energy,
                };
                if stored < threshold {
                    // Mode I: harvest everything, no forwarding.
                    let e = harvested_energy(h, g, params, Mode::I);
                    match cfg.battery_mode {
                        BatteryMode::Discrete => {
                            level = (level + discretize_energy(e, eps1, levels)).min(levels);
                        }
                        BatteryMode::Continuous => {
                            energy = (energy + e).min(battery.capacity);
                        }
                    }
                    0.0
                } else {
                    // Mode II: charge (PS only), then discharge delta levels.
                    mode2_blocks += 1;
                    let e = if cfg.scheme == Scheme::PsEa {
                        harvested_energy(h, g, params, Mode::II)
                    } else {
                        0.0
                    };
                    match cfg.battery_mode {
                        BatteryMode::Discrete => {
                            level = (level + discretize_energy(e, eps1, levels)).min(levels)
                                - battery.delta;
                        }
                        BatteryMode::Continuous => {
                            energy = (energy + e).min(battery.capacity) - threshold;
                        }
                    }
                    let consts = match cfg.scheme {
                        Scheme::PsEa => &consts_ps,
                        _ => &consts_ts,
                    };
                    let (ga, gb) = instantaneous_snrs(h, g, consts);
                    params.sigma_b * f64::from(ga > v_b) + params.sigma_a * f64::from(gb > v_a)
                }
            }
        };
        debug_assert!(energy >= -1e-12 && energy <= battery.capacity + 1e-12);
        debug_assert!(level <= levels);

        sum += score;
        sumsq += score * score;
    }

    let n = cfg.n_blocks as f64;
    let mean = sum / n;
    let var = if cfg.n_blocks > 1 {
        ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let occupancy = if cfg.scheme != Scheme::PsNoEa && cfg.battery_mode == BatteryMode::Discrete {
        Some(occupancy.iter().map(|&c| c as f64 / n).collect())
    } else {
        None
    };
    Ok(SimResult {
        psi_hat: mean,
        std_err: (var / n).sqrt(),
        p_mode2_hat: mode2_blocks as f64 / n,
        occupancy,
    })
}
