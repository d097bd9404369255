//! Discretization layer: the torus model of the line, forward/inverse DFTs,
//! frequency-interval algebra, and dyadic/Whitney decompositions.
//!
//! Spatial samples live at `x_j = (j - n/2) * h` with `h = L/n`, covering
//! `[-L/2, L/2)`. Spectra and symbols are indexed the same way in frequency:
//! `xi_k = (k - n/2) / L`, covering the Nyquist range `[-n/(2L), n/(2L))`.
//! All intervals are half-open `[lo, hi)`.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::{Error, Result};

/// Uniform periodic grid: `n` samples (power of two) over period `period`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    period: f64,
}

impl Grid {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "sample count must be a power of two >= 8, got {n}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "period must be a positive finite number, got {period}"
            )));
        }
        Ok(Grid { n, period })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Spatial sample spacing `h = L/n`.
    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Frequency sample spacing `1/L`.
    pub fn freq_step(&self) -> f64 {
        1.0 / self.period
    }

    /// Spatial coordinate of storage index `j`.
    pub fn spatial_point(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.spacing()
    }

    /// Frequency coordinate of storage index `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) / self.period
    }

    /// The resolvable frequency range `[-n/(2L), n/(2L))`.
    pub fn nyquist(&self) -> FreqInterval {
        let hi = (self.n / 2) as f64 / self.period;
        FreqInterval { lo: -hi, hi }
    }
}

/// Complex samples of a function on the spatial (or frequency) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SampledSignal {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidParameter(format!(
                "signal has {} samples, grid has {}",
                values.len(),
                grid.n()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "signal contains non-finite samples".into(),
            ));
        }
        Ok(SampledSignal { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        SampledSignal {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    /// Sample `f` at every spatial grid point.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64) -> Complex64) -> Self {
        let values = (0..grid.n()).map(|j| f(grid.spatial_point(j))).collect();
        SampledSignal { grid, values }
    }

    /// Sample real-valued `f` at every spatial grid point.
    pub fn from_real_fn(grid: Grid, mut f: impl FnMut(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Plain `l^2` norm of the sample vector (no measure factor).
    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Pointwise modulus as a real signal.
    pub fn modulus(&self) -> SampledSignal {
        SampledSignal {
            grid: self.grid,
            values: self
                .values
                .iter()
                .map(|v| Complex64::new(v.norm(), 0.0))
                .collect(),
        }
    }

    /// Real parts, for operators defined on real-valued data.
    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.im.abs() <= tol)
    }

    /// Write `x, Re f, Im f` rows.
    pub fn to_csv(&self, out: &mut impl std::io::Write) -> Result<()> {
        writeln!(out, "x,re,im")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{},{}", self.grid.spatial_point(j), v.re, v.im)?;
        }
        Ok(())
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], forward: bool) {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let fft = if forward {
            planner.plan_fft_forward(buf.len())
        } else {
            planner.plan_fft_inverse(buf.len())
        };
        fft.process(buf);
    });
}

/// Sign factor `(-1)^kappa` relating natural-order storage to FFT order.
///
/// It accounts for the spatial offset `x_j = (j - n/2) h`, so the transform
/// below agrees with `F(xi_k) = n^{-1/2} sum_j f(x_j) e^{-2 pi i xi_k x_j}`.
fn offset_sign(kappa: i64) -> f64 {
    if kappa & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Unitary forward transform; `‖dft(f)‖_2 = ‖f‖_2` on the grid.
pub fn dft(signal: &SampledSignal) -> SampledSignal {
    let grid = signal.grid();
    let n = grid.n();
    let half = (n / 2) as i64;
    let mut buf = signal.values().to_vec();
    fft_in_place(&mut buf, true);
    let scale = 1.0 / (n as f64).sqrt();
    let values = (0..n)
        .map(|s| {
            let kappa = s as i64 - half;
            let m = kappa.rem_euclid(n as i64) as usize;
            buf[m] * (offset_sign(kappa) * scale)
        })
        .collect();
    SampledSignal { grid, values }
}

/// Unitary inverse transform; `idft(dft(f)) = f` to rounding error.
pub fn idft(spectrum: &SampledSignal) -> SampledSignal {
    let grid = spectrum.grid();
    let n = grid.n();
    let half = (n / 2) as i64;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for s in 0..n {
        let kappa = s as i64 - half;
        let m = kappa.rem_euclid(n as i64) as usize;
        buf[m] = spectrum.values()[s] * offset_sign(kappa);
    }
    fft_in_place(&mut buf, false);
    let scale = 1.0 / (n as f64).sqrt();
    let values = buf.into_iter().map(|v| v * scale).collect();
    SampledSignal { grid, values }
}

/// Half-open frequency interval `[lo, hi)` in cycles per unit length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqInterval {
    lo: f64,
    hi: f64,
}

impl FreqInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInterval(format!(
                "need finite lo < hi, got [{lo}, {hi})"
            )));
        }
        Ok(FreqInterval { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, xi: f64) -> bool {
        self.lo <= xi && xi < self.hi
    }

    /// Concentric dilate: same center, `lambda` times the length.
    pub fn dilate(&self, lambda: f64) -> FreqInterval {
        let c = self.center();
        let half = 0.5 * lambda * self.len();
        FreqInterval {
            lo: c - half,
            hi: c + half,
        }
    }

    /// Storage indices of the grid frequencies falling in the interval.
    pub fn grid_range(&self, grid: &Grid) -> std::ops::Range<usize> {
        let half = (grid.n() / 2) as i64;
        let lo_k = (self.lo * grid.period()).ceil() as i64;
        let hi_k = (self.hi * grid.period()).ceil() as i64;
        let lo_k = lo_k.max(-half);
        let hi_k = hi_k.min(half);
        if lo_k >= hi_k {
            0..0
        } else {
            ((lo_k + half) as usize)..((hi_k + half) as usize)
        }
    }

    /// Number of grid frequencies in the interval.
    pub fn sample_count(&self, grid: &Grid) -> usize {
        self.grid_range(grid).len()
    }

    pub fn within(&self, other: &FreqInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }
}

/// Finite family of pairwise-disjoint half-open frequency intervals, sorted
/// by left endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalFamily {
    intervals: Vec<FreqInterval>,
}

impl IntervalFamily {
    pub fn new(mut intervals: Vec<FreqInterval>) -> Result<Self> {
        intervals.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite endpoints"));
        for pair in intervals.windows(2) {
            if pair[1].lo < pair[0].hi {
                return Err(Error::InvalidInterval(format!(
                    "intervals [{}, {}) and [{}, {}) overlap",
                    pair[0].lo, pair[0].hi, pair[1].lo, pair[1].hi
                )));
            }
        }
        Ok(IntervalFamily { intervals })
    }

    pub fn intervals(&self) -> &[FreqInterval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FreqInterval> {
        self.intervals.iter()
    }
}

fn pow2(k: i32) -> f64 {
    2.0f64.powi(k)
}

/// Smallest integer `k` with `2^k >= step`.
fn smallest_resolvable_exponent(step: f64) -> i32 {
    let mut k = step.log2().ceil() as i32;
    while pow2(k) < step {
        k += 1;
    }
    while k > i32::MIN + 1 && pow2(k - 1) >= step {
        k -= 1;
    }
    k
}

/// The dyadic frequency blocks `[2^k, 2^{k+1})` and `[-2^{k+1}, -2^k)`
/// truncated to the grid's Nyquist range, without the merged central block.
///
/// Blocks start at the smallest scale the grid resolves (`2^k >= 1/L`).
pub fn dyadic_blocks(grid: &Grid) -> Vec<FreqInterval> {
    let nyq = grid.nyquist();
    let k0 = smallest_resolvable_exponent(grid.freq_step());
    let mut blocks = Vec::new();
    let mut k = k0;
    while pow2(k) < nyq.hi() {
        let lo = pow2(k);
        let hi = pow2(k + 1).min(nyq.hi());
        if lo < hi {
            blocks.push(FreqInterval { lo, hi });
        }
        let nlo = (-pow2(k + 1)).max(nyq.lo());
        let nhi = -pow2(k);
        if nlo < nhi {
            blocks.push(FreqInterval { lo: nlo, hi: nhi });
        }
        k += 1;
    }
    blocks
}

/// Dyadic decomposition of the resolvable frequency range: the blocks of
/// [`dyadic_blocks`] plus one central block `[-2^{k0}, 2^{k0})` absorbing all
/// scales below grid resolution. The union covers every grid frequency
/// exactly once.
pub fn dyadic_decomposition(grid: &Grid) -> IntervalFamily {
    let mut blocks = dyadic_blocks(grid);
    let r = pow2(smallest_resolvable_exponent(grid.freq_step()));
    blocks.push(FreqInterval { lo: -r, hi: r });
    IntervalFamily::new(blocks).expect("dyadic blocks are disjoint by construction")
}

/// Whitney decomposition of a bounded interval: two central quarters, then
/// dyadically shrinking pieces toward each endpoint, cut off at `min_len`
/// with the remainders kept as the two boundary pieces.
///
/// Every non-boundary piece `J` satisfies `|J| <= dist(J, boundary) <= 4|J|`,
/// and the doubled family has overlap at most 5.
pub fn whitney_decomposition(interval: &FreqInterval, min_len: f64) -> Result<IntervalFamily> {
    let len = interval.len();
    if !(min_len > 0.0 && min_len < len / 4.0) {
        return Err(Error::InvalidParameter(format!(
            "min_len must lie in (0, |I|/4) = (0, {}), got {min_len}",
            len / 4.0
        )));
    }
    // Largest m with len * 2^-m >= min_len; the precondition gives m >= 2.
    let mut depth = 2u32;
    while len * pow2(-(depth as i32 + 1)) >= min_len {
        depth += 1;
        if depth > 1024 {
            return Err(Error::InvalidParameter("min_len too small".into()));
        }
    }
    let (a, b) = (interval.lo(), interval.hi());
    let mut breakpoints = Vec::with_capacity(2 * depth as usize + 1);
    breakpoints.push(a);
    for m in (2..=depth).rev() {
        breakpoints.push(a + len * pow2(-(m as i32)));
    }
    breakpoints.push(a + 0.5 * len);
    for m in 2..=depth {
        breakpoints.push(b - len * pow2(-(m as i32)));
    }
    breakpoints.push(b);
    let pieces = breakpoints
        .windows(2)
        .map(|w| FreqInterval { lo: w[0], hi: w[1] })
        .collect();
    IntervalFamily::new(pieces)
}

/// Max over the grid frequencies of the number of `lambda`-dilates covering
/// the point.
pub fn well_distributed_constant(family: &IntervalFamily, lambda: f64, grid: &Grid) -> usize {
    let dilates: Vec<FreqInterval> = family.iter().map(|i| i.dilate(lambda)).collect();
    let mut best = 0usize;
    for k in 0..grid.n() {
        let xi = grid.frequency(k);
        let count = dilates.iter().filter(|d| d.contains(xi)).count();
        best = best.max(count);
    }
    best
}

/// Exact supremum over the whole line of the dilate overlap count, evaluated
/// on the breakpoint structure of the dilated family (the count is piecewise
/// constant between dilate endpoints).
pub fn dilate_overlap_max(family: &IntervalFamily, lambda: f64) -> usize {
    let dilates: Vec<FreqInterval> = family.iter().map(|i| i.dilate(lambda)).collect();
    let mut points: Vec<f64> = dilates.iter().flat_map(|d| [d.lo(), d.hi()]).collect();
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite endpoints"));
    points.dedup();
    let mut probes = points.clone();
    probes.extend(points.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    probes
        .iter()
        .map(|&x| dilates.iter().filter(|d| d.contains(x)).count())
        .max()
        .unwrap_or(0)
}

/// Convolution-free check value: returns `sin(pi t)/(pi t)` with the
/// removable singularity filled in. Used by tests against the closed-form
/// modulus of band-indicator inverse transforms.
pub fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_signal(grid: Grid, seed: u64) -> SampledSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SampledSignal::new(
            grid,
            (0..grid.n())
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(Grid::new(12, 1.0).is_err());
        assert!(Grid::new(4, 1.0).is_err());
        assert!(Grid::new(16, 0.0).is_err());
        assert!(Grid::new(16, -3.0).is_err());
        assert!(Grid::new(16, 1.0).is_ok());
    }

    #[test]
    fn constant_signal_has_dc_spectrum_only() {
        let grid = Grid::new(64, 4.0).unwrap();
        let f = SampledSignal::from_fn(grid, |_| Complex64::new(1.0, 0.0));
        let spec = dft(&f);
        for (k, v) in spec.values().iter().enumerate() {
            if grid.frequency(k) == 0.0 {
                assert!((v.re - 8.0).abs() < 1e-12, "DC amplitude sqrt(n)");
                assert!(v.im.abs() < 1e-12);
            } else {
                assert!(v.norm() < 1e-12, "nonzero spectrum at {}", grid.frequency(k));
            }
        }
    }

    #[test]
    fn dft_roundtrip_and_plancherel() {
        let grid = Grid::new(256, 7.0).unwrap();
        for seed in 0..20 {
            let f = random_signal(grid, seed);
            let spec = dft(&f);
            let back = idft(&spec);
            let err: f64 = f
                .values()
                .iter()
                .zip(back.values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err <= 1e-12 * f.l2_norm().max(1.0), "roundtrip err {err}");
            assert!(
                (spec.l2_norm() - f.l2_norm()).abs() <= 1e-12 * f.l2_norm(),
                "plancherel"
            );
        }
    }

    #[test]
    fn plancherel_holds_on_many_random_signals() {
        let grid = Grid::new(128, 3.0).unwrap();
        for seed in 0..1000 {
            let f = random_signal(grid, seed);
            let spec = dft(&f);
            assert!((spec.l2_norm() - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
        }
    }

    #[test]
    fn interval_grid_range_respects_half_open_convention() {
        let grid = Grid::new(16, 1.0).unwrap();
        // [1, 2) on integer frequencies contains exactly xi = 1.
        let i = FreqInterval::new(1.0, 2.0).unwrap();
        let r = i.grid_range(&grid);
        let freqs: Vec<f64> = r.map(|k| grid.frequency(k)).collect();
        assert_eq!(freqs, vec![1.0]);
        // Endpoint ownership: xi = 2 belongs to [2, 4).
        let j = FreqInterval::new(2.0, 4.0).unwrap();
        let freqs: Vec<f64> = j.grid_range(&grid).map(|k| grid.frequency(k)).collect();
        assert_eq!(freqs, vec![2.0, 3.0]);
    }

    #[test]
    fn dyadic_decomposition_matches_enumerated_small_case() {
        // n=16, L=1: frequencies are the integers -8..8.
        let grid = Grid::new(16, 1.0).unwrap();
        let fam = dyadic_decomposition(&grid);
        let expected = vec![
            (-8.0, -4.0),
            (-4.0, -2.0),
            (-2.0, -1.0),
            (-1.0, 1.0),
            (1.0, 2.0),
            (2.0, 4.0),
            (4.0, 8.0),
        ];
        let got: Vec<(f64, f64)> = fam.iter().map(|i| (i.lo(), i.hi())).collect();
        assert_eq!(got, expected);
        // Exact cover of all 16 frequencies.
        let mut covered = vec![0usize; grid.n()];
        for i in fam.iter() {
            for k in i.grid_range(&grid) {
                covered[k] += 1;
            }
        }
        assert!(covered.iter().all(|&c| c == 1), "cover counts {covered:?}");
    }

    #[test]
    fn dyadic_decomposition_covers_exactly_for_various_periods() {
        for &(n, l) in &[(16usize, 1.0f64), (16, 2.0), (64, 2.0), (128, 0.5), (32, 3.0)] {
            let grid = Grid::new(n, l).unwrap();
            let fam = dyadic_decomposition(&grid);
            let mut covered = vec![0usize; n];
            for i in fam.iter() {
                for k in i.grid_range(&grid) {
                    covered[k] += 1;
                }
            }
            assert!(
                covered.iter().all(|&c| c == 1),
                "n={n} L={l} cover {covered:?}"
            );
        }
    }

    #[test]
    fn whitney_pieces_partition_and_satisfy_length_ratios() {
        let host = FreqInterval::new(0.0, 1.0).unwrap();
        let fam = whitney_decomposition(&host, 2f64.powi(-6)).unwrap();
        let pieces = fam.intervals();
        // Exact partition with dyadic endpoints.
        assert_eq!(pieces.first().unwrap().lo(), 0.0);
        assert_eq!(pieces.last().unwrap().hi(), 1.0);
        for w in pieces.windows(2) {
            assert_eq!(w[0].hi(), w[1].lo());
        }
        let total: f64 = pieces.iter().map(|p| p.len()).sum();
        assert_eq!(total, 1.0, "dyadic endpoints sum exactly");
        // Smallest piece terminates at min_len.
        let min_piece = pieces.iter().map(|p| p.len()).fold(f64::INFINITY, f64::min);
        assert_eq!(min_piece, 2f64.powi(-6));
        // Whitney ratios away from the two boundary pieces.
        for p in &pieces[1..pieces.len() - 1] {
            let d = (p.lo() - host.lo()).min(host.hi() - p.hi());
            assert!(p.len() <= d + 1e-15, "piece {:?} dist {d}", p);
            assert!(d <= 4.0 * p.len() + 1e-15, "piece {:?} dist {d}", p);
        }
        // Piece count is logarithmic in |I|/min_len.
        assert_eq!(pieces.len(), 12);
    }

    #[test]
    fn whitney_overlap_bound_holds_for_random_hosts() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = rng.gen::<f64>() * 20.0 - 10.0;
            let len = rng.gen::<f64>() * 20.0 + 0.5;
            let host = FreqInterval::new(a, a + len).unwrap();
            let cut = len * 2f64.powi(-(rng.gen_range(3..10) as i32));
            let fam = whitney_decomposition(&host, cut).unwrap();
            assert!(
                dilate_overlap_max(&fam, 2.0) <= 5,
                "host {host:?} cut {cut}"
            );
        }
    }

    #[test]
    fn whitney_rejects_out_of_range_cutoff() {
        let host = FreqInterval::new(0.0, 1.0).unwrap();
        assert!(whitney_decomposition(&host, 0.0).is_err());
        assert!(whitney_decomposition(&host, 0.3).is_err());
        assert!(whitney_decomposition(&host, 0.2).is_ok());
    }

    #[test]
    fn well_distributed_constant_on_unit_family() {
        let grid = Grid::new(64, 2.0).unwrap();
        let fam = IntervalFamily::new(
            (0..8)
                .map(|k| FreqInterval::new(k as f64, k as f64 + 1.0).unwrap())
                .collect(),
        )
        .unwrap();
        // Doubles of adjacent unit intervals overlap in pairs.
        assert_eq!(well_distributed_constant(&fam, 2.0, &grid), 2);
        let single = IntervalFamily::new(vec![FreqInterval::new(1.0, 3.0).unwrap()]).unwrap();
        assert_eq!(well_distributed_constant(&single, 2.0, &grid), 1);
        assert_eq!(well_distributed_constant(&single, 7.0, &grid), 1);
    }

    #[test]
    fn whitney_family_is_well_distributed_at_lambda_two() {
        let grid = Grid::new(256, 64.0).unwrap();
        let host = FreqInterval::new(0.0, 1.0).unwrap();
        let fam = whitney_decomposition(&host, 2f64.powi(-6)).unwrap();
        assert!(well_distributed_constant(&fam, 2.0, &grid) <= 5);
    }

    #[test]
    fn family_rejects_overlaps_and_sorts() {
        let a = FreqInterval::new(0.0, 2.0).unwrap();
        let b = FreqInterval::new(1.0, 3.0).unwrap();
        assert!(IntervalFamily::new(vec![a, b]).is_err());
        let c = FreqInterval::new(2.0, 3.0).unwrap();
        let fam = IntervalFamily::new(vec![c, a]).unwrap();
        assert_eq!(fam.intervals()[0].lo(), 0.0);
    }
}
