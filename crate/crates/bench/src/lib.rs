//! Shared fixtures for the criterion benchmarks.

use psea::{BatteryModel, GammaPair, SystemParams};

pub fn reference_params() -> SystemParams {
    SystemParams {
        p_a: 1.0,
        p_b: 1.0,
        n0: 1e-11,
        n1: 5e-12,
        n2: 5e-12,
        eta: 0.5,
        lambda: 0.9,
        m_a: 2,
        m_b: 2,
        omega_a: 1.0 / 65.0,
        omega_b: 1.0 / 145.0,
        sigma_a: 1.0,
        sigma_b: 1.0,
    }
}

pub fn reference_battery() -> BatteryModel {
    BatteryModel::new(0.2, 200, 40).unwrap()
}

pub fn reference_pair() -> GammaPair {
    GammaPair::mode1_energy(&reference_params()).unwrap()
}
