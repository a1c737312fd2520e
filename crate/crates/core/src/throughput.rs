//! Closed-form outage/throughput analytics: the general success probability
//! phi(a, b, c, v) = Pr{ a H G / (b H + c G + 1) > v } for gamma-distributed
//! channel power gains, and the system throughput assembled from the battery
//! chain's stationary distribution.

use crate::chain::{
    build_transition_matrix, build_ts_ea_matrix, mode2_probability, stationary_distribution,
    BatteryModel, StationaryDist,
};
use crate::channel::{outage_threshold, snr_constants_with_lambda, SnrConstants, SystemParams};
use crate::error::{Error, Result};
use crate::gammasum::GammaPair;
use crate::specfun::{ln_bessel_k, ln_binomial, ln_gamma};

/// Arguments of the general term phi. H ~ Gamma(m_a, omega_a / m_a),
/// G ~ Gamma(m_b, omega_b / m_b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub v: f64,
    pub m_a: u32,
    pub omega_a: f64,
    pub m_b: u32,
    pub omega_b: f64,
}

impl PhiParams {
    pub fn validate(&self) -> Result<()> {
        for (name, val) in [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("v", self.v),
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
        ] {
            if !(val > 0.0) || !val.is_finite() {
                return Err(Error::domain("phi", format!("{name} = {val} must be > 0")));
            }
        }
        if self.m_a < 1 || self.m_b < 1 {
            return Err(Error::domain("phi", "fading shapes must be >= 1".to_string()));
        }
        Ok(())
    }
}

/// Per-direction success probabilities and the resulting system throughput.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputResult {
    /// System throughput, bits/s/Hz.
    pub psi: f64,
    /// Stationary probability of operating in Mode II.
    pub p_mode2: f64,
    /// Pr{gamma_A > v_B}: source B's data decoded at A.
    pub phi_a: f64,
    /// Pr{gamma_B > v_A}: source A's data decoded at B.
    pub phi_b: f64,
}

/// Closed-form evaluation of phi. All terms of the triple sum are
/// nonnegative, so they are accumulated with log-sum-exp; individual factors
/// such as a^{m_b + j - k} may overflow the double range for legal inputs.
pub fn phi(p: &PhiParams) -> Result<f64> {
    p.validate()?;
    let ra = p.m_a as f64 / p.omega_a;
    let rb = p.m_b as f64 / p.omega_b;
    let (a, b, c, v) = (p.a, p.b, p.c, p.v);

    // exponential prefactor; underflow means the tail probability is 0
    let ln_exp_pref = -(v / a) * (ra * c + rb * b);
    let ln_pref = std::f64::consts::LN_2 + p.m_b as f64 * rb.ln() - ln_gamma(p.m_b as f64)?;

    // The Bessel argument and the bracketed ratio are independent of the
    // summation indices; precompute K for every order that can occur.
    let q = b * c * v * v / (a * a) + v / a;
    let z_arg = 2.0 * (ra * rb * q).sqrt();
    let ln_bracket = (ra * v * (b * c * v + a) / rb).ln();
    let max_order = p.m_b as i64; // orders i - k + 1 lie in [2 - m_a, m_b]
    let min_order = 2 - p.m_a as i64;
    let mut ln_k = std::collections::HashMap::new();
    for n in min_order..=max_order {
        ln_k.entry(n.unsigned_abs()).or_insert(ln_bessel_k(n, z_arg)?);
    }

    let (ln_a, ln_b, ln_c, ln_v) = (a.ln(), b.ln(), c.ln(), v.ln());
    let ln_bcv = (b * c * v / a + 1.0).ln();
    let pow = |ln_x: f64, e: i64| -> f64 {
        if e == 0 {
            0.0
        } else {
            e as f64 * ln_x
        }
    };

    let mut ln_terms = Vec::new();
    for i in 0..p.m_b as i64 {
        for j in 0..p.m_a as i64 {
            for k in 0..=j {
                let order = i - k + 1;
                let ln_term = ln_binomial(p.m_b as u64 - 1, i as u64)?
                    + ln_binomial(j as u64, k as u64)?
                    + pow(ln_b, p.m_b as i64 - i - 1)
                    + pow(ln_c, j - k)
                    + pow(ra.ln(), j)
                    - ln_gamma(j as f64 + 1.0)?
                    - pow(ln_a, p.m_b as i64 + j - k)
                    + pow(ln_v, p.m_b as i64 + j - i - 1)
                    + pow(ln_bcv, k)
                    + 0.5 * order as f64 * ln_bracket
                    + ln_k[&order.unsigned_abs()];
                ln_terms.push(ln_term);
            }
        }
    }

    let max_ln = ln_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max_ln.is_finite() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for t in &ln_terms {
        sum += (t - max_ln).exp();
    }
    let ln_phi = ln_pref + ln_exp_pref + max_ln + sum.ln();
    Ok(ln_phi.exp().clamp(0.0, 1.0))
}

/// System throughput from a stationary battery distribution: since phi does
/// not depend on the battery level, the level sums factor into
/// P_II * (sigma_B * phi_A + sigma_A * phi_B).
pub fn system_throughput(
    pi: &StationaryDist,
    consts: &SnrConstants,
    params: &SystemParams,
    delta: u32,
) -> Result<ThroughputResult> {
    let p2 = mode2_probability(pi, delta);
    let v_a = outage_threshold(params.sigma_a);
    let v_b = outage_threshold(params.sigma_b);
    let phi_a = phi(&PhiParams {
        a: consts.gbar_r * consts.gbar_b,
        b: consts.gbar_r + consts.gbar_a,
        c: consts.gbar_b,
        v: v_b,
        m_a: params.m_a,
        omega_a: params.omega_a,
        m_b: params.m_b,
        omega_b: params.omega_b,
    })?;
    let phi_b = phi(&PhiParams {
        a: consts.gbar_r * consts.gbar_a,
        b: consts.gbar_a,
        c: consts.gbar_r + consts.gbar_b,
        v: v_a,
        m_a: params.m_a,
        omega_a: params.omega_a,
        m_b: params.m_b,
        omega_b: params.omega_b,
    })?;
    Ok(ThroughputResult {
        psi: p2 * (params.sigma_b * phi_a + params.sigma_a * phi_b),
        p_mode2: p2,
        phi_a,
        phi_b,
    })
}

/// Full PS-EA analytical pipeline: harvested-energy distribution, battery
/// chain, stationary distribution, closed-form throughput.
pub fn throughput_ps_ea(params: &SystemParams, battery: &BatteryModel) -> Result<ThroughputResult> {
    params.validate()?;
    let pair = GammaPair::mode1_energy(params)?;
    let z = build_transition_matrix(battery, &pair, params.lambda)?;
    let pi = stationary_distribution(&z)?;
    let consts = snr_constants_with_lambda(params, battery.relay_power(), params.lambda)?;
    system_throughput(&pi, &consts, params, battery.delta)
}

/// TS-EA baseline: forwarding blocks deliver the whole received signal to
/// the information path (no Mode II harvest, lambda = 0 in the SNR
/// constants); harvesting blocks are identical to Mode I.
pub fn throughput_ts_ea(params: &SystemParams, battery: &BatteryModel) -> Result<ThroughputResult> {
    params.validate()?;
    let pair = GammaPair::mode1_energy(params)?;
    let z = build_ts_ea_matrix(battery, &pair)?;
    let pi = stationary_distribution(&z)?;
    let consts = snr_constants_with_lambda(params, battery.relay_power(), 0.0)?;
    system_throughput(&pi, &consts, params, battery.delta)
}
