//! Slow reference implementations used for cross-validation.
//!
//! The quadrature route here is deliberately independent of the closed-form
//! path in [`crate::throughput`]: the inner gamma tail probability and the
//! Nakagami power-gain density are written out directly instead of reusing
//! the special-function module. The CLI `--self-check` mode and the test
//! suite both compare against these.

use crate::error::{Error, Result};
use crate::throughput::PhiParams;

/// Recursive adaptive Simpson quadrature. `rel_tol` is relative to the
/// integral's overall scale, estimated by a coarse composite pass first;
/// an absolute criterion would recurse forever on integrands whose values
/// span hundreds of orders of magnitude.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, max_depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    // Coarse composite pass to fix the scale the tolerance is relative to.
    let panels = 256usize;
    let h = (b - a) / panels as f64;
    let mut scale = 0.0f64;
    for i in 0..panels {
        let x0 = a + i as f64 * h;
        scale += h / 6.0 * (f(x0).abs() + 4.0 * f(x0 + 0.5 * h).abs() + f(x0 + h).abs());
    }
    let tol = rel_tol * scale.max(f64::MIN_POSITIVE);

    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

/// Quadrature oracle for phi(a, b, c, v) = Pr{ a H G / (b H + c G + 1) > v }
/// with H ~ Gamma(m_a, omega_a / m_a) and G ~ Gamma(m_b, omega_b / m_b):
///
///   phi = Int_{h > c v / a} f_H(h) * Pr{ G > v (b h + 1) / (a h - c v) } dh.
pub fn phi_quadrature(p: &PhiParams) -> Result<f64> {
    p.validate()?;
    let ra = p.m_a as f64 / p.omega_a; // H rate
    let rb = p.m_b as f64 / p.omega_b; // G rate
    let ma = p.m_a;
    let mb = p.m_b;
    let (a, b, c, v) = (p.a, p.b, p.c, p.v);

    let ln_norm_h = {
        // ln of (m-1)! for the Erlang density normalizer.
        let mut acc = 0.0f64;
        for i in 2..ma {
            acc += (i as f64).ln();
        }
        acc
    };
    let f_h = move |h: f64| -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        (ma as f64 * ra.ln() + (ma as f64 - 1.0) * h.ln() - ra * h - ln_norm_h).exp()
    };
    let surv_g = move |t: f64| -> f64 {
        // Pr{G > t} = e^{-rb t} sum_{i < mb} (rb t)^i / i!
        if t <= 0.0 {
            return 1.0;
        }
        let y = rb * t;
        if y > 745.0 {
            return 0.0;
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        for i in 1..mb {
            term *= y / i as f64;
            sum += term;
        }
        (-y).exp() * sum
    };

    let h0 = c * v / a;
    let integrand = move |h: f64| -> f64 {
        if h <= h0 {
            return 0.0;
        }
        let t = v * (b * h + 1.0) / (a * h - c * v);
        f_h(h) * surv_g(t)
    };

    // Upper limit where the H tail is negligible relative to the mass scale.
    let upper = h0 + (80.0 + 10.0 * ma as f64) / ra;
    let est = adaptive_simpson(&integrand, h0, upper, 1e-13, 30);
    if !est.is_finite() {
        return Err(Error::Unstable("phi quadrature oracle diverged".into()));
    }
    Ok(est.clamp(0.0, 1.0))
}
