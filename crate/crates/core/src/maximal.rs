//! Hardy-Littlewood and Fefferman-Stein sharp maximal operators on the
//! periodic grid, empirical operator-norm probes, the iterated-maximal
//! majorant construction, and the two-sided factorized weight it certifies.
//!
//! The exact modes enumerate windows per length with sliding maxima, so the
//! whole output costs O(n^2) (plus a log factor for the sharp variant, which
//! tracks window order statistics in a Fenwick tree).

use rustfft::num_complex::Complex64;

use crate::lattice::SampledSignal;
use crate::weights::{ap_constant_with_mode, ScanMode, Weight};
use crate::{Error, Result};

/// Window family a maximal operator ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowSet {
    /// Periodic windows of lengths `1..=n/2`; the torus default. The cap
    /// keeps a window from covering more than half the circle.
    ExactPeriodic,
    /// Non-wrapping index ranges of every length `1..=n`; matches the window
    /// family of the A_p scans, which the factorization certificate needs.
    ExactIntervals,
    /// Aligned dyadic blocks only; fast lower-bound approximation.
    Dyadic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaximalConfig {
    pub windows: WindowSet,
}

impl Default for MaximalConfig {
    fn default() -> Self {
        MaximalConfig {
            windows: WindowSet::ExactPeriodic,
        }
    }
}

/// Sliding max of `vals[start]` over the `window`-length ranges of starts
/// covering each output index, walked over the doubled index range so
/// periodic output positions see every admissible start.
fn periodic_sliding_max(vals: &[f64], window: usize, out: &mut [f64], scale: f64) {
    let n = vals.len();
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for t in 0..2 * n {
        let v = vals[t % n];
        while let Some(&back) = deque.back() {
            if vals[back % n] <= v {
                deque.pop_back();
            } else {
                break;
            }
        }
        deque.push_back(t);
        while let Some(&front) = deque.front() {
            if front + window <= t {
                deque.pop_front();
            } else {
                break;
            }
        }
        if t >= n {
            let i = t - n;
            let best = vals[deque.front().copied().expect("nonempty") % n] * scale;
            if best > out[i] {
                out[i] = best;
            }
        }
    }
}

/// Same as [`periodic_sliding_max`] but for non-wrapping windows: output `i`
/// sees starts in `[max(0, i+1-m), min(i, n-m)]`.
fn linear_sliding_max(vals: &[f64], window: usize, out: &mut [f64], scale: f64) {
    let n = out.len();
    let starts = vals.len(); // n - window + 1
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let mut next = 0usize;
    for i in 0..n {
        let hi = i.min(starts - 1);
        while next <= hi {
            let v = vals[next];
            while let Some(&back) = deque.back() {
                if vals[back] <= v {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(next);
            next += 1;
        }
        let lo = (i + 1).saturating_sub(window);
        while let Some(&front) = deque.front() {
            if front < lo {
                deque.pop_front();
            } else {
                break;
            }
        }
        if let Some(&front) = deque.front() {
            let best = vals[front] * scale;
            if best > out[i] {
                out[i] = best;
            }
        }
    }
}

/// Hardy-Littlewood maximal function of a nonnegative sample vector, as a
/// plain index-space computation (window averages need no measure factor).
///
/// The output starts from the exact point values, so `M f >= |f|` holds
/// bitwise; longer windows only raise it.
pub fn maximal_function(values: &[f64], windows: WindowSet) -> Vec<f64> {
    let n = values.len();
    let values: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let mut out = values.clone();
    match windows {
        WindowSet::ExactPeriodic => {
            let mut prefix = vec![0.0f64; 2 * n + 1];
            for t in 0..2 * n {
                prefix[t + 1] = prefix[t] + values[t % n];
            }
            let mut sums = vec![0.0f64; n];
            for m in 2..=(n / 2) {
                for (start, s) in sums.iter_mut().enumerate() {
                    *s = prefix[start + m] - prefix[start];
                }
                periodic_sliding_max(&sums, m, &mut out, 1.0 / m as f64);
            }
        }
        WindowSet::ExactIntervals => {
            let mut prefix = vec![0.0f64; n + 1];
            for t in 0..n {
                prefix[t + 1] = prefix[t] + values[t];
            }
            for m in 2..=n {
                let sums: Vec<f64> = (0..=(n - m)).map(|s| prefix[s + m] - prefix[s]).collect();
                linear_sliding_max(&sums, m, &mut out, 1.0 / m as f64);
            }
        }
        WindowSet::Dyadic => {
            let mut prefix = vec![0.0f64; 2 * n + 1];
            for t in 0..2 * n {
                prefix[t + 1] = prefix[t] + values[t % n];
            }
            let mut m = 2usize;
            while m <= n / 2 {
                let mut block = 0usize;
                while block * m < n {
                    let start = block * m;
                    let avg = (prefix[start + m] - prefix[start]) / m as f64;
                    for i in start..start + m {
                        if avg > out[i] {
                            out[i] = avg;
                        }
                    }
                    block += 1;
                }
                m *= 2;
            }
        }
    }
    out
}

/// `Mf(x)`: max over admissible windows containing `x` of the window
/// average of `|f|`. Dominates `|f|` pointwise since single cells are
/// admissible windows.
pub fn hl_maximal(f: &SampledSignal, cfg: &MaximalConfig) -> SampledSignal {
    let moduli: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let out = maximal_function(&moduli, cfg.windows);
    SampledSignal::new(
        f.grid(),
        out.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
    .expect("maximal output is finite")
}

/// Fenwick tree over value ranks carrying counts and sums of the current
/// window, so the mean absolute deviation of a sliding window is an
/// O(log n) query.
struct RankedWindow {
    slot_of: Vec<usize>,
    sorted: Vec<f64>,
    cnt: Vec<i64>,
    sum: Vec<f64>,
}

impl RankedWindow {
    fn new(values: &[f64]) -> Self {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            values[a]
                .partial_cmp(&values[b])
                .expect("finite samples")
                .then(a.cmp(&b))
        });
        let mut slot_of = vec![0usize; n];
        for (slot, &idx) in order.iter().enumerate() {
            slot_of[idx] = slot;
        }
        let sorted = order.iter().map(|&i| values[i]).collect();
        RankedWindow {
            slot_of,
            sorted,
            cnt: vec![0; n + 1],
            sum: vec![0.0; n + 1],
        }
    }

    fn clear(&mut self) {
        self.cnt.fill(0);
        self.sum.fill(0.0);
    }

    fn update(&mut self, element: usize, value: f64, sign: i64) {
        let mut i = self.slot_of[element] + 1;
        while i < self.cnt.len() {
            self.cnt[i] += sign;
            self.sum[i] += value * sign as f64;
            i += i & i.wrapping_neg();
        }
    }

    /// Count and sum of window elements with value strictly below `c`.
    fn below(&self, c: f64) -> (f64, f64) {
        let mut i = self.sorted.partition_point(|&v| v < c);
        let (mut cnt, mut sum) = (0i64, 0.0f64);
        while i > 0 {
            cnt += self.cnt[i];
            sum += self.sum[i];
            i -= i & i.wrapping_neg();
        }
        (cnt as f64, sum)
    }
}

/// Mean absolute deviation of every window of length `m`; `starts` controls
/// whether windows wrap.
fn window_deviations(values: &[f64], prefix: &[f64], rw: &mut RankedWindow, m: usize, periodic: bool) -> Vec<f64> {
    let n = values.len();
    let starts = if periodic { n } else { n - m + 1 };
    rw.clear();
    for j in 0..m {
        rw.update(j % n, values[j % n], 1);
    }
    let mut devs = Vec::with_capacity(starts);
    for start in 0..starts {
        let total = prefix[start + m] - prefix[start];
        let mean = total / m as f64;
        let (cb, sb) = rw.below(mean);
        let dev = (mean * cb - sb) + ((total - sb) - mean * (m as f64 - cb));
        devs.push(dev / m as f64);
        if start + 1 < starts || periodic {
            rw.update(start % n, values[start % n], -1);
            let incoming = (start + m) % n;
            rw.update(incoming, values[incoming], 1);
        }
    }
    devs
}

/// Sharp maximal function `M#f(x)`: sup over windows containing `x` of the
/// window average of `|f - window mean|`. Defined for real-valued signals.
pub fn sharp_maximal(f: &SampledSignal, cfg: &MaximalConfig) -> Result<SampledSignal> {
    let scale = f.sup_norm().max(1.0);
    if !f.is_real(1e-12 * scale) {
        return Err(Error::NonRealInput);
    }
    let values = f.real_values();
    let n = values.len();
    let mut out = vec![0.0f64; n];
    match cfg.windows {
        WindowSet::ExactPeriodic => {
            let mut prefix = vec![0.0f64; 2 * n + 1];
            for t in 0..2 * n {
                prefix[t + 1] = prefix[t] + values[t % n];
            }
            let mut rw = RankedWindow::new(&values);
            for m in 2..=(n / 2) {
                let devs = window_deviations(&values, &prefix, &mut rw, m, true);
                periodic_sliding_max(&devs, m, &mut out, 1.0);
            }
        }
        WindowSet::ExactIntervals => {
            let mut prefix = vec![0.0f64; n + 1];
            for t in 0..n {
                prefix[t + 1] = prefix[t] + values[t];
            }
            let mut rw = RankedWindow::new(&values);
            for m in 2..=n {
                let devs = window_deviations(&values, &prefix, &mut rw, m, false);
                linear_sliding_max(&devs, m, &mut out, 1.0);
            }
        }
        WindowSet::Dyadic => {
            let mut m = 2usize;
            while m <= n / 2 {
                let mut block = 0usize;
                while block * m < n {
                    let start = block * m;
                    let slice = &values[start..start + m];
                    let mean = slice.iter().sum::<f64>() / m as f64;
                    let dev = slice.iter().map(|v| (v - mean).abs()).sum::<f64>() / m as f64;
                    for i in start..start + m {
                        if dev > out[i] {
                            out[i] = dev;
                        }
                    }
                    block += 1;
                }
                m *= 2;
            }
        }
    }
    SampledSignal::new(
        f.grid(),
        out.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
}

/// `sup_x M(values)(x) / values(x)`, the A_1-style pointwise ratio.
pub fn a1_ratio(values: &[f64], windows: WindowSet) -> f64 {
    let m = maximal_function(values, windows);
    m.iter()
        .zip(values)
        .map(|(mv, &v)| if v > 0.0 { mv / v } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

fn weighted_norm_values(values: &[f64], p: f64, w: &Weight) -> f64 {
    let h = w.grid().spacing();
    values
        .iter()
        .zip(w.values())
        .map(|(&v, &wi)| v.abs().powf(p) * wi)
        .sum::<f64>()
        .powf(1.0 / p)
        * h.powf(1.0 / p)
}

/// Deterministic indicator test set: the constant, single-cell spikes, and
/// dyadic windows around a few anchors.
fn indicator_basis(n: usize, anchors: &[usize]) -> Vec<Vec<f64>> {
    let mut basis = vec![vec![1.0; n]];
    for &pos in anchors {
        let mut spike = vec![0.0; n];
        spike[pos % n] = 1.0;
        basis.push(spike);
        let mut len = 2usize;
        while len <= n / 2 {
            let mut ind = vec![0.0; n];
            for o in 0..len {
                ind[(pos + n - len / 2 + o) % n] = 1.0;
            }
            basis.push(ind);
            len *= 2;
        }
    }
    basis
}

fn argminmax(values: &[f64]) -> (usize, usize) {
    let mut lo = 0usize;
    let mut hi = 0usize;
    for (i, &v) in values.iter().enumerate() {
        if v < values[lo] {
            lo = i;
        }
        if v > values[hi] {
            hi = i;
        }
    }
    (lo, hi)
}

/// Safe over-estimate of the maximal operator norm on `L^p(w)`: twice the
/// largest ratio achieved on the indicator basis. The majorant series only
/// needs an upper bound, so the safety factor is folded in here.
pub fn maximal_norm_bound(w: &Weight, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "operator norm bound needs p >= 1, got {p}"
        )));
    }
    let n = w.grid().n();
    let (lo, hi) = argminmax(w.values());
    let anchors = [0, n / 4, n / 2, 3 * n / 4, lo, hi];
    let mut best = 0.0f64;
    for input in indicator_basis(n, &anchors) {
        let m = maximal_function(&input, WindowSet::ExactPeriodic);
        let ratio = weighted_norm_values(&m, p, w) / weighted_norm_values(&input, p, w);
        best = best.max(ratio);
    }
    Ok(2.0 * best)
}

/// Lower-bound measurement of the maximal operator norm with context.
#[derive(Debug, Clone)]
pub struct BuckleyEstimate {
    /// Largest ratio achieved by any probe input; a certified lower bound.
    pub norm_lower_bound: f64,
    /// `[w]_{A_p}` of the ambient weight.
    pub ap_constant: f64,
    /// `norm_lower_bound / [w]_{A_p}^{p'/p}`, the implied constant envelope.
    pub buckley_ratio: f64,
    pub p: f64,
}

/// Probe the operator norm of M on `L^p(w)` from below with spikes,
/// indicator stacks, and seeded random fields.
pub fn measure_buckley(w: &Weight, p: f64) -> Result<BuckleyEstimate> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Buckley measurement needs p > 1, got {p}"
        )));
    }
    let n = w.grid().n();
    let (lo, hi) = argminmax(w.values());
    let anchors = [0, n / 4, n / 2, 3 * n / 4, lo, hi];
    let mut inputs = indicator_basis(n, &anchors);
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0C5);
    for _ in 0..8 {
        inputs.push((0..n).map(|_| rng.gen::<f64>()).collect());
    }
    let mut best = 0.0f64;
    for input in &inputs {
        let m = maximal_function(input, WindowSet::ExactPeriodic);
        let ratio = weighted_norm_values(&m, p, w) / weighted_norm_values(input, p, w);
        best = best.max(ratio);
    }
    let ap = ap_constant_with_mode(w, p, ScanMode::Exact)?;
    let pp = p / (p - 1.0);
    Ok(BuckleyEstimate {
        norm_lower_bound: best,
        ap_constant: ap,
        buckley_ratio: best / ap.powf(pp / p),
        p,
    })
}

/// Result of the iterated-maximal majorant: `R h = sum_j M^j h / (2 ||M||)^j`.
#[derive(Debug, Clone)]
pub struct RdfMajorant {
    pub signal: SampledSignal,
    /// Over-estimated operator norm the series was built with.
    pub norm_bound: f64,
    pub terms_used: usize,
    /// Certified sup-norm bound on the truncated tail.
    pub tail_bound: f64,
    /// False when `max_terms` ran out before the tail met `tol`.
    pub converged: bool,
    /// `||R h||_{p,w} / ||h||_{p,w}`; at most 2 by construction.
    pub norm_ratio: f64,
    /// `sup M(R h) / R h`; at most `2 norm_bound` up to the truncation tail.
    pub a1_ratio: f64,
}

/// Build the majorant of a nonnegative signal with the three certified
/// properties: `h <= R h` pointwise, `||R h|| <= 2 ||h||` in `L^p(w)`, and
/// `M(R h) <= 2 ||M|| R h` pointwise up to the reported tail.
pub fn rdf_iterate(
    h: &SampledSignal,
    w: &Weight,
    p: f64,
    max_terms: usize,
    tol: f64,
) -> Result<RdfMajorant> {
    if h.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    if max_terms < 2 {
        return Err(Error::InvalidParameter(
            "majorant series needs at least two terms".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tail tolerance must be positive".into()));
    }
    let scale = h.sup_norm();
    if scale == 0.0 {
        return Err(Error::InvalidParameter(
            "majorant of the zero signal is undefined".into(),
        ));
    }
    if !h.is_real(1e-12 * scale) {
        return Err(Error::NonRealInput);
    }
    let hv: Vec<f64> = h.real_values();
    if hv.iter().any(|&v| v < -1e-12 * scale) {
        return Err(Error::NegativeInput);
    }
    let hv: Vec<f64> = hv.into_iter().map(|v| v.max(0.0)).collect();

    let norm_bound = maximal_norm_bound(w, p)?;
    let step = 1.0 / (2.0 * norm_bound);
    let mut acc = hv.clone();
    let mut term = hv.clone();
    let mut terms_used = 0usize;
    let mut tail = f64::INFINITY;
    for _ in 1..=max_terms {
        let m = maximal_function(&term, WindowSet::ExactPeriodic);
        term = m.into_iter().map(|v| v * step).collect();
        for (a, t) in acc.iter_mut().zip(&term) {
            *a += t;
        }
        terms_used += 1;
        // sup(term_{j+1}) <= sup(term_j)/(2 norm_bound) <= sup(term_j)/4,
        // so the remaining tail is under sup of the last term.
        tail = term.iter().copied().fold(0.0f64, f64::max);
        if tail <= tol && terms_used >= 2 {
            break;
        }
    }
    let converged = tail <= tol;
    let norm_ratio = weighted_norm_values(&acc, p, w) / weighted_norm_values(&hv, p, w);
    let m_acc = maximal_function(&acc, WindowSet::ExactPeriodic);
    let a1 = m_acc
        .iter()
        .zip(&acc)
        .map(|(m, &a)| if a > 0.0 { m / a } else { f64::INFINITY })
        .fold(0.0, f64::max);
    let signal = SampledSignal::new(
        h.grid(),
        acc.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )?;
    Ok(RdfMajorant {
        signal,
        norm_bound,
        terms_used,
        tail_bound: tail,
        converged,
        norm_ratio,
        a1_ratio: a1,
    })
}

/// Two-sided factorized weight `w_{g,h} = (R g)^{-1} (R' h) w` with its
/// certified product bound.
#[derive(Debug, Clone)]
pub struct FactorizedWeight {
    pub weight: Weight,
    /// Exact `[w_{g,h}]_{A_2}` over all subintervals.
    pub a2_constant: f64,
    /// A_1-style ratio of the denominator majorant `R g`.
    pub ratio_g: f64,
    /// A_1-style ratio of the numerator `(R' h) w`.
    pub ratio_hw: f64,
    /// Whether `a2 <= ratio_g * ratio_hw` held within float slack.
    pub certified: bool,
}

/// Construct `w_{g,h}` from nonnegative `g, h`: the denominator majorant
/// comes from [`rdf_iterate`] on `L^p(w)`, the numerator from the dual
/// iteration with `S f = M(f w)/w` normed on `L^{p'}(w)`.
///
/// The product bound is certified against A_1 ratios taken over the
/// [`WindowSet::ExactIntervals`] family, which contains every window of the
/// A_2 scan; with matching window families the bound is a grid identity, not
/// just an asymptotic claim.
pub fn factorized_weight(
    g: &SampledSignal,
    h: &SampledSignal,
    w: &Weight,
    p: f64,
) -> Result<FactorizedWeight> {
    if g.grid() != w.grid() || h.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "factorized weight needs p > 1, got {p}"
        )));
    }
    let g_scale = g.sup_norm();
    let h_scale = h.sup_norm();
    if g_scale == 0.0 || h_scale == 0.0 {
        return Err(Error::InvalidParameter(
            "factorized weight needs nonzero g and h".into(),
        ));
    }
    let rg = rdf_iterate(g, w, p, 40, 1e-13 * g_scale)?;
    let rg_vals = rg.signal.real_values();
    if rg_vals.iter().any(|&v| v <= f64::MIN_POSITIVE) {
        return Err(Error::ZeroMajorant);
    }

    // Dual iteration: S f = M(f w)/w, normed on L^{p'}(w).
    if !h.is_real(1e-12 * h_scale) {
        return Err(Error::NonRealInput);
    }
    let hv: Vec<f64> = h.real_values();
    if hv.iter().any(|&v| v < -1e-12 * h_scale) {
        return Err(Error::NegativeInput);
    }
    let hv: Vec<f64> = hv.into_iter().map(|v| v.max(0.0)).collect();
    let pp = p / (p - 1.0);
    let wv = w.values();
    let apply_dual = |f: &[f64]| -> Vec<f64> {
        let fw: Vec<f64> = f.iter().zip(wv).map(|(&x, &wi)| x * wi).collect();
        maximal_function(&fw, WindowSet::ExactPeriodic)
            .into_iter()
            .zip(wv)
            .map(|(m, &wi)| m / wi)
            .collect()
    };
    let n = w.grid().n();
    let (lo, hi) = argminmax(wv);
    let anchors = [0, n / 4, n / 2, 3 * n / 4, lo, hi];
    let mut dual_best = 0.0f64;
    for input in indicator_basis(n, &anchors) {
        let s = apply_dual(&input);
        let ratio = weighted_norm_values(&s, pp, w) / weighted_norm_values(&input, pp, w);
        dual_best = dual_best.max(ratio);
    }
    let dual_bound = 2.0 * dual_best;
    let dual_step = 1.0 / (2.0 * dual_bound);
    let mut acc = hv.clone();
    let mut term = hv.clone();
    let h_norm = weighted_norm_values(&hv, pp, w);
    for _ in 1..=40 {
        term = apply_dual(&term)
            .into_iter()
            .map(|v| v * dual_step)
            .collect();
        for (a, t) in acc.iter_mut().zip(&term) {
            *a += t;
        }
        // The dual series contracts in the weighted norm rather than in sup.
        if weighted_norm_values(&term, pp, w) <= 1e-13 * h_norm {
            break;
        }
    }
    let rhw: Vec<f64> = acc.iter().zip(wv).map(|(&a, &wi)| a * wi).collect();

    let out_values: Vec<f64> = rhw.iter().zip(&rg_vals).map(|(&num, &den)| num / den).collect();
    let weight = Weight::new(w.grid(), out_values)?;
    let a2 = ap_constant_with_mode(&weight, 2.0, ScanMode::Exact)?;
    let ratio_g = a1_ratio(&rg_vals, WindowSet::ExactIntervals);
    let ratio_hw = a1_ratio(&rhw, WindowSet::ExactIntervals);
    let certified = a2 <= ratio_g * ratio_hw * (1.0 + 1e-9) + 1e-9;
    Ok(FactorizedWeight {
        weight,
        a2_constant: a2,
        ratio_g,
        ratio_hw,
        certified,
    })
}
