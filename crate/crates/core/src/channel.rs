//! Physical-layer model: path loss, Nakagami-m channel power sampling,
//! harvested-energy formulas, SNR constants, and instantaneous end-to-end
//! SNRs of the two-way amplify-and-forward exchange.
//!
//! All powers are linear watts internally. dBm conversion belongs to the
//! configuration layer.

use rand::Rng;

use crate::error::{Error, Result};

/// All physical parameters of the two-source / relay layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Source transmit powers, watts.
    pub p_a: f64,
    pub p_b: f64,
    /// Source-side receiver noise power, watts.
    pub n0: f64,
    /// Relay antenna noise power, watts.
    pub n1: f64,
    /// Relay conversion noise power, watts.
    pub n2: f64,
    /// Energy conversion efficiency, in (0, 1).
    pub eta: f64,
    /// Power splitting ratio for energy harvesting, in (0, 1).
    pub lambda: f64,
    /// Nakagami fading severities of the A-R and B-R links, integers >= 1.
    pub m_a: u32,
    pub m_b: u32,
    /// Average channel power gains of the A-R and B-R links.
    pub omega_a: f64,
    pub omega_b: f64,
    /// Source transmission rates, bits/s/Hz.
    pub sigma_a: f64,
    pub sigma_b: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("p_a", self.p_a),
            ("p_b", self.p_b),
            ("n0", self.n0),
            ("n1", self.n1),
            ("n2", self.n2),
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
            ("sigma_a", self.sigma_a),
            ("sigma_b", self.sigma_b),
        ];
        for (name, v) in pos {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidModel(format!("{name} = {v} must be > 0")));
            }
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidModel(format!("eta = {} must be in (0,1)", self.eta)));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidModel(format!(
                "lambda = {} must be in (0,1)",
                self.lambda
            )));
        }
        if self.m_a < 1 || self.m_b < 1 {
            return Err(Error::InvalidModel("fading severities must be >= 1".into()));
        }
        Ok(())
    }
}

/// The three average-SNR constants entering the end-to-end SNR expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrConstants {
    pub gbar_a: f64,
    pub gbar_b: f64,
    pub gbar_r: f64,
}

/// Collinear source-relay-source layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Topology {
    /// Source-to-source distance, meters.
    pub d_ab: f64,
    /// A-to-relay distance, meters.
    pub d_ar: f64,
    /// Path-loss exponent, in [2, 5].
    pub alpha: f64,
}

impl Topology {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_ar > 0.0 && self.d_ar < self.d_ab) {
            return Err(Error::InvalidModel(format!(
                "require 0 < d_ar < d_ab, got d_ar = {}, d_ab = {}",
                self.d_ar, self.d_ab
            )));
        }
        if !(2.0..=5.0).contains(&self.alpha) {
            return Err(Error::InvalidModel(format!(
                "alpha = {} must be in [2, 5]",
                self.alpha
            )));
        }
        Ok(())
    }

    /// B-to-relay distance from the collinear layout.
    pub fn d_br(&self) -> f64 {
        self.d_ab - self.d_ar
    }

    /// (omega_a, omega_b) from the path-loss model.
    pub fn gains(&self) -> Result<(f64, f64)> {
        self.validate()?;
        Ok((
            pathloss_gain(self.d_ar, self.alpha)?,
            pathloss_gain(self.d_br(), self.alpha)?,
        ))
    }
}

/// Average gain 1 / (1 + d^alpha).
pub fn pathloss_gain(d: f64, alpha: f64) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::domain("pathloss_gain", format!("d = {d} must be >= 0")));
    }
    if !(2.0..=5.0).contains(&alpha) {
        return Err(Error::domain(
            "pathloss_gain",
            format!("alpha = {alpha} must be in [2, 5]"),
        ));
    }
    Ok(1.0 / (1.0 + d.powf(alpha)))
}

/// One draw of a Nakagami-m squared channel gain: gamma with integer shape m
/// and mean omega, built as a sum of m exponentials of mean omega / m so the
/// draw count per call is fixed and reproducible.
pub fn sample_channel_power<R: Rng + ?Sized>(m: u32, omega: f64, rng: &mut R) -> f64 {
    debug_assert!(m >= 1 && omega > 0.0);
    let scale = omega / m as f64;
    let mut sum = 0.0;
    for _ in 0..m {
        let u: f64 = rng.gen(); // in [0, 1)
        sum -= (1.0 - u).ln();
    }
    sum * scale
}

/// Relay operating mode for a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Battery below threshold: the whole received signal is harvested.
    I,
    /// Battery at or above threshold: split harvest + forward.
    II,
}

/// Energy harvested at the relay in one (unit-duration) block.
pub fn harvested_energy(h: f64, g: f64, params: &SystemParams, mode: Mode) -> f64 {
    let base = 0.5 * params.eta * (params.p_a * h + params.p_b * g);
    match mode {
        Mode::I => base,
        Mode::II => params.lambda * base,
    }
}

/// The SNR constants for relay transmit power `p_r`, splitting with the
/// params' lambda.
pub fn snr_constants(params: &SystemParams, p_r: f64) -> Result<SnrConstants> {
    snr_constants_with_lambda(params, p_r, params.lambda)
}

/// Same, with an explicit splitting ratio (lambda = 0 gives the pure
/// information-forwarding constants used by the TS-EA baseline).
pub fn snr_constants_with_lambda(params: &SystemParams, p_r: f64, lambda: f64) -> Result<SnrConstants> {
    if !(p_r > 0.0) {
        return Err(Error::domain("snr_constants", format!("p_r = {p_r} must be > 0")));
    }
    let denom = (1.0 - lambda) * params.n1 + params.n2;
    Ok(SnrConstants {
        gbar_a: (1.0 - lambda) * params.p_a / denom,
        gbar_b: (1.0 - lambda) * params.p_b / denom,
        gbar_r: p_r / params.n0,
    })
}

/// Instantaneous received SNRs (at source A, at source B) for channel power
/// gains h (A-R) and g (B-R).
pub fn instantaneous_snrs(h: f64, g: f64, c: &SnrConstants) -> (f64, f64) {
    let gamma_a = c.gbar_r * c.gbar_b * g * h / ((c.gbar_r + c.gbar_a) * h + c.gbar_b * g + 1.0);
    let gamma_b = c.gbar_r * c.gbar_a * h * g / ((c.gbar_r + c.gbar_b) * g + c.gbar_a * h + 1.0);
    (gamma_a, gamma_b)
}

/// Minimum SNR to decode rate sigma over the two half-duration slots.
pub fn outage_threshold(sigma: f64) -> f64 {
    2f64.powf(2.0 * sigma) - 1.0
}
