//! Muckenhoupt weight machinery: A_p and reverse-Holder constants, weighted
//! and weak-type norms, decreasing rearrangements, and stock weight families.
//!
//! Constants are suprema over all discrete subintervals of the spatial grid,
//! evaluated from prefix sums: O(n^2) window pairs at O(1) each. Above
//! [`EXACT_SCAN_CAP`] samples the scan falls back to aligned dyadic windows,
//! which is a documented lower-bound approximation.

use serde::{Deserialize, Serialize};

use crate::lattice::{Grid, SampledSignal};
use crate::{Error, Result};

/// Largest grid for which constant scans enumerate every subinterval.
pub const EXACT_SCAN_CAP: usize = 1 << 14;

/// Reverse-Holder blow-up budget used by [`estimate_s_w`].
pub const RH_BLOWUP_BUDGET: f64 = 1e3;

/// Top of the geometric exponent ladder searched by [`estimate_s_w`].
pub const S_LADDER_TOP: f64 = 64.0;

/// Window family used by the constant scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    /// Every contiguous index range (exact supremum on the grid).
    Exact,
    /// Aligned dyadic windows only; a fast lower bound for large grids.
    DyadicWindows,
}

/// Strictly positive samples of a weight on the spatial grid, with cached
/// prefix sums of the weight itself. Prefix sums of the dual powers
/// `w^{-1/(p-1)}` are rebuilt per queried exponent; the O(n) rebuild is
/// negligible against the O(n^2) window scan it feeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    grid: Grid,
    values: Vec<f64>,
    prefix: Vec<f64>,
}

impl Weight {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidParameter(format!(
                "weight has {} samples, grid has {}",
                values.len(),
                grid.n()
            )));
        }
        if values.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::InvalidParameter(
                "weight samples must be strictly positive and finite".into(),
            ));
        }
        let prefix = prefix_sums(&values);
        Ok(Weight {
            grid,
            values,
            prefix,
        })
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let values = (0..grid.n()).map(|j| f(grid.spatial_point(j))).collect();
        Weight::new(grid, values)
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Weight::new(grid, vec![c; grid.n()])
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Total measure `integral of w dx` as a Riemann sum.
    pub fn total_measure(&self) -> f64 {
        self.prefix[self.grid.n()] * self.grid.spacing()
    }

    pub fn is_constant(&self) -> bool {
        let first = self.values[0];
        self.values.iter().all(|&v| v == first)
    }

    /// Pointwise power `w^e` as a new weight.
    pub fn powered(&self, e: f64) -> Result<Weight> {
        Weight::new(self.grid, self.values.iter().map(|v| v.powf(e)).collect())
    }

    /// Write `x, w(x)` rows.
    pub fn to_csv(&self, out: &mut impl std::io::Write) -> Result<()> {
        writeln!(out, "x,w")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", self.grid.spatial_point(j), v)?;
        }
        Ok(())
    }
}

fn prefix_sums(values: &[f64]) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(values.len() + 1);
    let mut acc = 0.0;
    prefix.push(0.0);
    for &v in values {
        acc += v;
        prefix.push(acc);
    }
    prefix
}

/// `|x|^alpha`, regularized at the origin by `|x| v h` so the weight stays
/// strictly positive.
pub fn power_weight(alpha: f64, grid: Grid) -> Weight {
    let h = grid.spacing();
    Weight::from_fn(grid, |x| x.abs().max(h).powf(alpha))
        .expect("regularized power weight is positive")
}

/// Stock A_1 example: `(|x| v h)^{-1/2}`, the square root of the maximal
/// function of a unit point mass at the origin.
pub fn make_a1_example(grid: Grid) -> Weight {
    power_weight(-0.5, grid)
}

/// Scan every admissible window, feeding `(avg_first, avg_second)` per
/// window to `term` and returning the running max.
fn window_scan(
    pa: &[f64],
    pb: &[f64],
    n: usize,
    mode: ScanMode,
    term: impl Fn(f64, f64) -> f64,
) -> f64 {
    let mut best = f64::NEG_INFINITY;
    match mode {
        ScanMode::Exact => {
            for i in 0..n {
                for j in (i + 1)..=n {
                    let m = (j - i) as f64;
                    let a = (pa[j] - pa[i]) / m;
                    let b = (pb[j] - pb[i]) / m;
                    let t = term(a, b);
                    if t > best {
                        best = t;
                    }
                }
            }
        }
        ScanMode::DyadicWindows => {
            let mut len = 1usize;
            while len <= n {
                let mut start = 0usize;
                while start + len <= n {
                    let m = len as f64;
                    let a = (pa[start + len] - pa[start]) / m;
                    let b = (pb[start + len] - pb[start]) / m;
                    let t = term(a, b);
                    if t > best {
                        best = t;
                    }
                    start += len;
                }
                len *= 2;
            }
        }
    }
    best
}

fn default_mode(n: usize) -> ScanMode {
    if n <= EXACT_SCAN_CAP {
        ScanMode::Exact
    } else {
        ScanMode::DyadicWindows
    }
}

/// Muckenhoupt constant `[w]_{A_p}`: sup over subintervals of
/// `(avg w) (avg w^{-1/(p-1)})^{p-1}`.
pub fn ap_constant(w: &Weight, p: f64) -> Result<f64> {
    ap_constant_with_mode(w, p, default_mode(w.grid().n()))
}

pub fn ap_constant_with_mode(w: &Weight, p: f64, mode: ScanMode) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "A_p constant needs p > 1, got {p}"
        )));
    }
    let n = w.grid().n();
    let dual_exp = -1.0 / (p - 1.0);
    let dual: Vec<f64> = w.values().iter().map(|v| v.powf(dual_exp)).collect();
    let pd = prefix_sums(&dual);
    let best = window_scan(&w.prefix, &pd, n, mode, |aw, ad| aw * ad.powf(p - 1.0));
    Ok(best.max(1.0))
}

/// Reverse-Holder constant: sup over subintervals of
/// `(avg w^s)^{1/s} / (avg w)`.
pub fn rh_constant(w: &Weight, s: f64) -> Result<f64> {
    rh_constant_with_mode(w, s, default_mode(w.grid().n()))
}

pub fn rh_constant_with_mode(w: &Weight, s: f64, mode: ScanMode) -> Result<f64> {
    if !(s.is_finite() && s > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "reverse-Holder constant needs s > 1, got {s}"
        )));
    }
    let n = w.grid().n();
    let powered: Vec<f64> = w.values().iter().map(|v| v.powf(s)).collect();
    let ps = prefix_sums(&powered);
    let best = window_scan(&w.prefix, &ps, n, mode, |aw, as_| as_.powf(1.0 / s) / aw);
    Ok(best.max(1.0))
}

/// Grid-resolution lower estimate of the supremal reverse-Holder exponent.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SwEstimate {
    /// Largest ladder exponent whose reverse-Holder constant stays under the
    /// blow-up budget on this grid.
    pub value: f64,
    /// True when the ladder top was reached without blow-up; read as
    /// "unbounded at this resolution".
    pub at_ladder_top: bool,
    /// Budget the estimate was computed against.
    pub budget: f64,
}

/// Search a geometric exponent ladder `(1+tol)^i` for the largest `s` whose
/// reverse-Holder constant stays below [`RH_BLOWUP_BUDGET`]. The constant is
/// nondecreasing in `s`, so a bisection over ladder indices suffices.
pub fn estimate_s_w(w: &Weight, tol: f64) -> Result<SwEstimate> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ladder ratio tolerance must be positive, got {tol}"
        )));
    }
    let step = 1.0 + tol;
    let top_index = (S_LADDER_TOP.ln() / step.ln()).ceil() as u32;
    let ladder = |i: u32| step.powi(i as i32);
    let blows_up = |i: u32| -> Result<bool> {
        let c = rh_constant(w, ladder(i))?;
        Ok(!c.is_finite() || c >= RH_BLOWUP_BUDGET)
    };
    if blows_up(1)? {
        // Even the first rung blows up; report the bottom of the ladder.
        return Ok(SwEstimate {
            value: ladder(1),
            at_ladder_top: false,
            budget: RH_BLOWUP_BUDGET,
        });
    }
    if !blows_up(top_index)? {
        return Ok(SwEstimate {
            value: ladder(top_index),
            at_ladder_top: true,
            budget: RH_BLOWUP_BUDGET,
        });
    }
    // Invariant: lo survives, hi blows up.
    let (mut lo, mut hi) = (1u32, top_index);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if blows_up(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(SwEstimate {
        value: ladder(lo),
        at_ladder_top: false,
        budget: RH_BLOWUP_BUDGET,
    })
}

/// `(sum |f_i|^p w_i h)^{1/p}`, the Riemann sum of the weighted p-norm.
pub fn weighted_norm(f: &SampledSignal, p: f64, w: &Weight) -> Result<f64> {
    if f.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "weighted norm needs p >= 1, got {p}"
        )));
    }
    let h = f.grid().spacing();
    let sum: f64 = f
        .values()
        .iter()
        .zip(w.values())
        .map(|(v, &wi)| v.norm().powf(p) * wi)
        .sum();
    Ok((sum * h).powf(1.0 / p))
}

/// Weak-type quasinorm `sup_t t * w({|f| > t})^{1/p}`, computed exactly as a
/// max over the distinct values of `|f|` against tail measures.
pub fn weak_norm(f: &SampledSignal, p: f64, w: &Weight) -> Result<f64> {
    if f.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "weak norm needs p >= 1, got {p}"
        )));
    }
    let h = f.grid().spacing();
    let mut pairs: Vec<(f64, f64)> = f
        .values()
        .iter()
        .zip(w.values())
        .map(|(v, &wi)| (v.norm(), wi * h))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite moduli"));
    let mut best = 0.0f64;
    let mut tail = 0.0f64;
    let mut idx = 0;
    while idx < pairs.len() {
        let value = pairs[idx].0;
        // Absorb the whole tie class so the tail is w({|f| >= value}).
        while idx < pairs.len() && pairs[idx].0 == value {
            tail += pairs[idx].1;
            idx += 1;
        }
        if value > 0.0 {
            best = best.max(value * tail.powf(1.0 / p));
        }
    }
    Ok(best)
}

/// Nonincreasing step function on `[0, total_width)`: the decreasing
/// rearrangement of a signal with respect to `w dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total_width(&self) -> f64 {
        *self.breakpoints.last().unwrap_or(&0.0)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        if t < 0.0 || t >= self.total_width() {
            return 0.0;
        }
        // Last breakpoint <= t indexes the active step.
        let idx = self
            .breakpoints
            .partition_point(|&b| b <= t)
            .saturating_sub(1);
        self.values.get(idx).copied().unwrap_or(0.0)
    }

    /// `integral (f*)^p dt` over the step structure.
    pub fn integrate_power(&self, p: f64) -> f64 {
        self.values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(v, bp)| v.powf(p) * (bp[1] - bp[0]))
            .sum()
    }
}

/// Decreasing rearrangement of `|f|` with respect to the measure `w dx`:
/// sort moduli descending and lay them out with widths `w_i h`.
pub fn rearrangement(f: &SampledSignal, w: &Weight) -> Result<StepFunction> {
    if f.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    let h = f.grid().spacing();
    let mut pairs: Vec<(f64, f64)> = f
        .values()
        .iter()
        .zip(w.values())
        .map(|(v, &wi)| (v.norm(), wi * h))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite moduli"));
    let mut breakpoints = vec![0.0];
    let mut values = Vec::new();
    let mut t = 0.0;
    for (v, width) in pairs {
        if let Some(last) = values.last() {
            if *last == v {
                // Merge equal levels into one step.
                t += width;
                *breakpoints.last_mut().unwrap() = t;
                continue;
            }
        }
        t += width;
        values.push(v);
        breakpoints.push(t);
    }
    Ok(StepFunction {
        breakpoints,
        values,
    })
}

/// One-stop summary of a weight's constants at a chosen pair of exponents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightReport {
    pub p: f64,
    pub ap_constant: f64,
    pub s: f64,
    pub rh_constant: f64,
    pub s_w_estimate: SwEstimate,
}

pub fn weight_report(w: &Weight, p: f64, s: f64, ladder_tol: f64) -> Result<WeightReport> {
    Ok(WeightReport {
        p,
        ap_constant: ap_constant(w, p)?,
        s,
        rh_constant: rh_constant(w, s)?,
        s_w_estimate: estimate_s_w(w, ladder_tol)?,
    })
}
