//! Finite-state Markov chain of the relay battery: transition matrix
//! construction from the harvested-energy CDF and the stationary
//! distribution by a dense direct solve.

use std::io::Write;

use crate::error::{Error, Result};
use crate::gammasum::{sum_gamma_cdf, GammaPair};

/// Discrete-level battery: capacity C split into L levels of eps1 = C / L,
/// with delta the transmit-energy level (relay power P_R = 2 delta eps1 for
/// a unit block).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryModel {
    pub capacity: f64,
    pub levels: u32,
    pub delta: u32,
}

impl BatteryModel {
    pub fn new(capacity: f64, levels: u32, delta: u32) -> Result<Self> {
        if !(capacity > 0.0) || levels < 1 {
            return Err(Error::InvalidModel(format!(
                "capacity = {capacity} must be > 0 and levels = {levels} >= 1"
            )));
        }
        if delta < 1 || delta > levels {
            return Err(Error::InvalidModel(format!(
                "delta = {delta} must lie in 1..{levels}"
            )));
        }
        Ok(BatteryModel { capacity, levels, delta })
    }

    /// Energy per level.
    pub fn eps1(&self) -> f64 {
        self.capacity / self.levels as f64
    }

    /// Energy of level i.
    pub fn level_energy(&self, i: u32) -> f64 {
        i as f64 * self.eps1()
    }

    /// Relay transmit power supported by delta levels over a half block.
    pub fn relay_power(&self) -> f64 {
        2.0 * self.delta as f64 * self.eps1()
    }
}

/// Row-stochastic (L+1) x (L+1) transition matrix; row = current level.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    levels: u32,
    delta: u32,
    z: Vec<f64>,
}

impl TransitionMatrix {
    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        self.levels as usize + 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.z[i * self.dim() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.z[i * n..(i + 1) * n]
    }

    /// Row-major CSV dump with header "i,j,prob".
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "i,j,prob")?;
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                writeln!(w, "{},{},{}", i, j, self.get(i, j))?;
            }
        }
        Ok(())
    }
}

/// Stationary probability vector over battery levels 0..=L.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDist {
    pub pi: Vec<f64>,
}

/// Build the PS-EA battery transition matrix. Rows below delta follow the
/// Mode I (pure harvesting) law; rows at or above delta follow the Mode II
/// (split harvest, then discharge delta levels) law.
pub fn build_transition_matrix(
    battery: &BatteryModel,
    pair: &GammaPair,
    lambda: f64,
) -> Result<TransitionMatrix> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidModel(format!("lambda = {lambda} must be in (0,1)")));
    }
    // F(eps_t) and F(eps_t / lambda), t = 0..=L; each row is assembled from
    // CDF differences over these two tables.
    let l = battery.levels as usize;
    let mut f = Vec::with_capacity(l + 1);
    let mut f_lam = Vec::with_capacity(l + 1);
    for t in 0..=l {
        let e = battery.level_energy(t as u32);
        f.push(sum_gamma_cdf(pair, e)?);
        f_lam.push(sum_gamma_cdf(pair, e / lambda)?);
    }
    build_matrix_inner(battery, |row, i| match row {
        ModeRow::Harvest => fill_harvest_row(i, l, &f),
        ModeRow::Forward => fill_forward_row(i, l, battery.delta as usize, &f_lam),
    })
}

/// TS-EA variant: Mode I rows unchanged, Mode II rows deterministically
/// discharge delta levels (nothing is harvested while forwarding).
pub fn build_ts_ea_matrix(battery: &BatteryModel, pair: &GammaPair) -> Result<TransitionMatrix> {
    let l = battery.levels as usize;
    let mut f = Vec::with_capacity(l + 1);
    for t in 0..=l {
        f.push(sum_gamma_cdf(pair, battery.level_energy(t as u32))?);
    }
    let delta = battery.delta as usize;
    build_matrix_inner(battery, |row, i| match row {
        ModeRow::Harvest => fill_harvest_row(i, l, &f),
        ModeRow::Forward => {
            let mut r = vec![0.0; l + 1];
            r[i - delta] = 1.0;
            r
        }
    })
}

enum ModeRow {
    Harvest,
    Forward,
}

fn build_matrix_inner(
    battery: &BatteryModel,
    mut fill: impl FnMut(ModeRow, usize) -> Vec<f64>,
) -> Result<TransitionMatrix> {
    let l = battery.levels as usize;
    let delta = battery.delta as usize;
    let n = l + 1;
    let mut z = Vec::with_capacity(n * n);
    for i in 0..n {
        let row = if i < delta {
            fill(ModeRow::Harvest, i)
        } else {
            fill(ModeRow::Forward, i)
        };
        debug_assert_eq!(row.len(), n);
        z.extend_from_slice(&row);
    }
    Ok(TransitionMatrix { levels: battery.levels, delta: battery.delta, z })
}

fn fill_harvest_row(i: usize, l: usize, f: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; l + 1];
    for j in i..l {
        r[j] = (f[j - i + 1] - f[j - i]).max(0.0);
    }
    r[l] = (1.0 - f[l - i]).max(0.0);
    r
}

fn fill_forward_row(i: usize, l: usize, delta: usize, f_lam: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; l + 1];
    for j in (i - delta)..(l - delta) {
        let t = j + delta - i;
        r[j] = (f_lam[t + 1] - f_lam[t]).max(0.0);
    }
    r[l - delta] = (1.0 - f_lam[l - i]).max(0.0);
    r
}

/// Solve (Z^T - I + B) pi = b with B the all-ones matrix and b the all-ones
/// vector, by LU with partial pivoting. Validates nonnegativity, clamps
/// rounding-level negatives, renormalizes, and checks the stationarity
/// residual.
pub fn stationary_distribution(z: &TransitionMatrix) -> Result<StationaryDist> {
    let n = z.dim();
    // m = Z^T - I + B, rhs = ones
    let mut m = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut v = z.get(j, i) + 1.0;
            if i == j {
                v -= 1.0;
            }
            m[i * n + j] = v;
        }
    }
    let mut rhs = vec![1.0f64; n];
    lu_solve(&mut m, &mut rhs, n)?;

    let mut pi = rhs;
    for (i, p) in pi.iter_mut().enumerate() {
        if *p < 0.0 {
            if *p < -1e-8 {
                return Err(Error::NegativeStationary { level: i, value: *p });
            }
            *p = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::SingularChain("stationary vector failed to normalize".into()));
    }
    for p in pi.iter_mut() {
        *p /= total;
    }

    // residual || Z^T pi - pi ||_inf
    let mut resid = 0.0f64;
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += z.get(j, i) * pi[j];
        }
        resid = resid.max((acc - pi[i]).abs());
    }
    if resid >= 1e-9 {
        return Err(Error::SingularChain(format!(
            "stationarity residual {resid:.3e} exceeds 1e-9; chain may be degenerate"
        )));
    }
    Ok(StationaryDist { pi })
}

/// In-place LU with partial pivoting; solves m x = rhs, leaving x in rhs.
fn lu_solve(m: &mut [f64], rhs: &mut [f64], n: usize) -> Result<()> {
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col * n + col].abs();
        for r in (col + 1)..n {
            let v = m[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-13 {
            return Err(Error::SingularChain(format!(
                "pivot {best:.3e} at column {col}; no unique stationary distribution"
            )));
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            rhs.swap(col, piv);
        }
        let diag = m[col * n + col];
        for r in (col + 1)..n {
            let factor = m[r * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            m[r * n + col] = 0.0;
            for k in (col + 1)..n {
                m[r * n + k] -= factor * m[col * n + k];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for k in (col + 1)..n {
            acc -= m[col * n + k] * rhs[k];
        }
        rhs[col] = acc / m[col * n + col];
    }
    Ok(())
}

/// Probability of finding the relay in Mode II: sum of pi over levels >= delta.
pub fn mode2_probability(pi: &StationaryDist, delta: u32) -> f64 {
    pi.pi.iter().skip(delta as usize).sum()
}
