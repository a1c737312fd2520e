//! Distribution of the Mode I harvested energy (a sum of two independent
//! gamma variables with integer shapes) and the mapping of raw energy onto
//! discrete battery levels.

use crate::channel::SystemParams;
use crate::error::{Error, Result};
use crate::specfun::{ln_binomial, reg_lower_gamma};

/// The two gamma summands. For the harvested energy, shape_i are the fading
/// severities and the means are eta/2 * P * Omega per link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPair {
    pub shape1: u32,
    pub scale1: f64,
    pub shape2: u32,
    pub scale2: f64,
}

/// Relative scale gap below which the pair is treated as equal-scale; the
/// partial-fraction expansion is singular at scale1 = scale2.
const EQUAL_SCALE_GAP: f64 = 1e-9;

impl GammaPair {
    pub fn new(shape1: u32, scale1: f64, shape2: u32, scale2: f64) -> Result<Self> {
        if shape1 < 1 || shape2 < 1 {
            return Err(Error::InvalidModel("gamma shapes must be >= 1".into()));
        }
        if !(scale1 > 0.0 && scale2 > 0.0) {
            return Err(Error::InvalidModel("gamma scales must be > 0".into()));
        }
        Ok(GammaPair { shape1, scale1, shape2, scale2 })
    }

    /// The Mode I harvested-energy distribution for the given system:
    /// shapes m_a, m_b with means eta/2 * P_A * Omega_A and eta/2 * P_B * Omega_B.
    pub fn mode1_energy(params: &SystemParams) -> Result<Self> {
        let mean1 = 0.5 * params.eta * params.p_a * params.omega_a;
        let mean2 = 0.5 * params.eta * params.p_b * params.omega_b;
        GammaPair::new(
            params.m_a,
            mean1 / params.m_a as f64,
            params.m_b,
            mean2 / params.m_b as f64,
        )
    }

    pub fn mean(&self) -> f64 {
        self.shape1 as f64 * self.scale1 + self.shape2 as f64 * self.scale2
    }

    fn near_equal_scale(&self) -> bool {
        (self.scale1 - self.scale2).abs() / self.scale1.max(self.scale2) < EQUAL_SCALE_GAP
    }
}

/// Partial-fraction coefficients of (1 + t1 s)^-k1 (1 + t2 s)^-k2 on the
/// (1 + t1 s)^-j Erlang basis, j = 1..=k1:
///   a_{k1-r} = (-1)^r C(k2+r-1, r) (t2/t1)^r (t1/(t1-t2))^{k2+r}
fn erlang_mix_coeffs(k1: u32, t1: f64, k2: u32, t2: f64) -> Vec<f64> {
    let mut coeffs = vec![0.0; k1 as usize + 1]; // index j, 1-based
    let lr = (t2 / t1).ln();
    let base = t1 / (t1 - t2); // sign handled separately
    let lb = base.abs().ln();
    let sb = base.signum();
    for r in 0..k1 {
        let ln_mag = ln_binomial((k2 + r - 1) as u64, r as u64).expect("valid binomial")
            + r as f64 * lr
            + (k2 + r) as f64 * lb;
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 } * sb.powi((k2 + r) as i32);
        coeffs[(k1 - r) as usize] = sign * ln_mag.exp();
    }
    coeffs
}

/// CDF of the sum of the two independent gamma summands at x, exact for
/// integer shapes via the partial-fraction mixture of Erlang CDFs. The
/// equal-scale case collapses to a single gamma CDF.
pub fn sum_gamma_cdf(pair: &GammaPair, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain("sum_gamma_cdf", format!("x = {x} must be >= 0")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if pair.near_equal_scale() {
        let scale = 0.5 * (pair.scale1 + pair.scale2);
        return reg_lower_gamma((pair.shape1 + pair.shape2) as f64, x / scale);
    }
    let a = erlang_mix_coeffs(pair.shape1, pair.scale1, pair.shape2, pair.scale2);
    let b = erlang_mix_coeffs(pair.shape2, pair.scale2, pair.shape1, pair.scale1);
    let mut f = 0.0;
    for (j, &aj) in a.iter().enumerate().skip(1) {
        f += aj * reg_lower_gamma(j as f64, x / pair.scale1)?;
    }
    for (j, &bj) in b.iter().enumerate().skip(1) {
        f += bj * reg_lower_gamma(j as f64, x / pair.scale2)?;
    }
    if !f.is_finite() {
        return Err(Error::Unstable(format!(
            "sum_gamma_cdf partial fractions lost precision for scales {} / {}",
            pair.scale1, pair.scale2
        )));
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Single-gamma moment-matched approximation of the sum CDF. Not used by the
/// analytical pipeline (the integer-shape form is exact); exposed for
/// experimentation.
pub fn sum_gamma_cdf_moment_approx(pair: &GammaPair, x: f64) -> Result<f64> {
    let mean = pair.mean();
    let var = pair.shape1 as f64 * pair.scale1 * pair.scale1
        + pair.shape2 as f64 * pair.scale2 * pair.scale2;
    let shape = mean * mean / var;
    let scale = var / mean;
    reg_lower_gamma(shape, x / scale)
}

/// Largest level i with i * eps1 <= e, capped at L.
pub fn discretize_energy(e: f64, eps1: f64, levels: u32) -> u32 {
    debug_assert!(e >= 0.0 && eps1 > 0.0 && levels >= 1);
    let i = (e / eps1).floor();
    if i >= levels as f64 {
        levels
    } else {
        i as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::adaptive_simpson;

    // Independent convolution oracle: F(x) = Int_0^x f1(t) F2(x - t) dt with
    // Erlang pdf/CDF written out directly.
    fn conv_oracle(pair: &GammaPair, x: f64) -> f64 {
        let k1 = pair.shape1;
        let t1 = pair.scale1;
        let k2 = pair.shape2;
        let t2 = pair.scale2;
        let fact = |n: u32| -> f64 { (1..=n).map(|i| i as f64).product::<f64>().max(1.0) };
        let f1 = move |t: f64| -> f64 {
            if t <= 0.0 {
                return 0.0;
            }
            t.powi(k1 as i32 - 1) * (-t / t1).exp() / (fact(k1 - 1) * t1.powi(k1 as i32))
        };
        let cdf2 = move |t: f64| -> f64 {
            if t <= 0.0 {
                return 0.0;
            }
            let y = t / t2;
            let mut term = 1.0;
            let mut sum = 1.0;
            for i in 1..k2 {
                term *= y / i as f64;
                sum += term;
            }
            1.0 - (-y).exp() * sum
        };
        let integrand = move |t: f64| f1(t) * cdf2(x - t);
        adaptive_simpson(&integrand, 0.0, x, 1e-13, 30)
    }

    #[test]
    fn erlang2_equal_scale_closed_form() {
        let pair = GammaPair::new(1, 2.0, 1, 2.0).unwrap();
        for &x in &[0.1, 1.0, 3.0, 10.0] {
            let got = sum_gamma_cdf(&pair, x).unwrap();
            let want = 1.0 - (-x / 2.0f64).exp() * (1.0 + x / 2.0);
            assert!((got - want).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn zero_input() {
        let pair = GammaPair::new(2, 1.0, 3, 0.5).unwrap();
        assert_eq!(sum_gamma_cdf(&pair, 0.0).unwrap(), 0.0);
        assert!(sum_gamma_cdf(&pair, -1.0).is_err());
    }

    #[test]
    fn matches_convolution_oracle() {
        // Frozen from the quadrature oracle: shapes (2,1), scales (1,2), x=3.
        let pair = GammaPair::new(2, 1.0, 1, 2.0).unwrap();
        let got = sum_gamma_cdf(&pair, 3.0).unwrap();
        let oracle = conv_oracle(&pair, 3.0);
        assert!((oracle - 0.406_201_8).abs() < 1e-6, "oracle = {oracle}");
        assert!((got - oracle).abs() < 1e-8, "got {got}, oracle {oracle}");

        for (k1, t1, k2, t2) in [(1u32, 0.4, 1u32, 1.7), (3, 0.9, 2, 0.3), (4, 1.1, 4, 2.6)] {
            let pair = GammaPair::new(k1, t1, k2, t2).unwrap();
            for &x in &[0.3, 1.0, 4.0, 9.0] {
                let got = sum_gamma_cdf(&pair, x).unwrap();
                let want = conv_oracle(&pair, x);
                assert!(
                    (got - want).abs() < 1e-8,
                    "shapes ({k1},{k2}) scales ({t1},{t2}) x={x}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn equal_scale_matches_single_gamma() {
        let pair = GammaPair::new(2, 0.7, 3, 0.7).unwrap();
        for &x in &[0.2, 1.5, 5.0] {
            let got = sum_gamma_cdf(&pair, x).unwrap();
            let want = reg_lower_gamma(5.0, x / 0.7).unwrap();
            assert!((got - want).abs() < 1e-12);
        }
        // near-equal gap routes to the same branch
        let pair = GammaPair::new(2, 0.7, 3, 0.7 * (1.0 + 1e-12)).unwrap();
        let got = sum_gamma_cdf(&pair, 1.5).unwrap();
        let want = reg_lower_gamma(5.0, 1.5 / 0.7).unwrap();
        assert!((got - want).abs() < 1e-9);
    }

    #[test]
    fn cdf_monotone_and_saturating() {
        let pair = GammaPair::new(2, 0.003, 2, 0.0017).unwrap();
        let mut prev = 0.0;
        for i in 0..500 {
            let x = i as f64 * 0.0005;
            let f = sum_gamma_cdf(&pair, x).unwrap();
            assert!((0.0..=1.0).contains(&f));
            assert!(f >= prev - 1e-14);
            prev = f;
        }
        assert!(sum_gamma_cdf(&pair, 1.0).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn moment_approx_is_close_but_not_exact() {
        let pair = GammaPair::new(2, 1.0, 2, 0.4).unwrap();
        let x = 2.5;
        let exact = sum_gamma_cdf(&pair, x).unwrap();
        let approx = sum_gamma_cdf_moment_approx(&pair, x).unwrap();
        assert!((exact - approx).abs() < 0.05);
    }

    #[test]
    fn discretize_cases() {
        assert_eq!(discretize_energy(0.0037, 0.001, 200), 3);
        assert_eq!(discretize_energy(0.0, 0.001, 200), 0);
        assert_eq!(discretize_energy(1.0, 0.001, 200), 200);
        // exact boundary maps up to its own level (half-open [e_i, e_{i+1}))
        assert_eq!(discretize_energy(0.004, 0.001, 200), 4);
    }

    #[test]
    fn discretize_monotone_and_capped() {
        let mut prev = 0;
        for i in 0..1000 {
            let e = i as f64 * 0.0007;
            let l = discretize_energy(e, 0.001, 200);
            assert!(l >= prev);
            assert!(l <= 200);
            prev = l;
        }
    }
}
