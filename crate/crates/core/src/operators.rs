//! Fourier multipliers, spectral projections onto frequency intervals, the
//! square functions attached to interval families, and their smooth variants.
//!
//! Everything acts in the frequency domain, where the grid model makes the
//! projections exact idempotents: `S_I = idft . chi_I . dft`.

use rustfft::num_complex::Complex64;

use crate::lattice::{
    dft, idft, well_distributed_constant, FreqInterval, Grid, IntervalFamily, SampledSignal,
};
use crate::variation::Symbol;
use crate::{Error, Result};

/// `T_m f = idft(m . dft f)`: exact frequency-domain multiplication.
pub fn apply_multiplier(m: &Symbol, f: &SampledSignal) -> Result<SampledSignal> {
    if m.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    let mut spectrum = dft(f);
    for (s, c) in spectrum.values_mut().iter_mut().zip(m.values()) {
        *s *= c;
    }
    Ok(idft(&spectrum))
}

fn band_restrict(spectrum: &SampledSignal, interval: &FreqInterval) -> SampledSignal {
    let grid = spectrum.grid();
    let range = interval.grid_range(&grid);
    let mut out = SampledSignal::zeros(grid);
    out.values_mut()[range.clone()].copy_from_slice(&spectrum.values()[range]);
    out
}

/// Spectral projection `S_I f`: the multiplier with symbol `chi_I`.
pub fn partial_sum(interval: &FreqInterval, f: &SampledSignal) -> Result<SampledSignal> {
    let spectrum = dft(f);
    Ok(idft(&band_restrict(&spectrum, interval)))
}

/// Modified square function over a disjoint family: the pointwise `l^{r'}`
/// norm of the projections `|S_I f|`, with `r = 1` meaning the pointwise
/// supremum and `r = 2` the classical quadratic combination.
pub fn square_function(
    family: &IntervalFamily,
    f: &SampledSignal,
    r: f64,
) -> Result<SampledSignal> {
    if !(1.0..=2.0).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "square function needs r in [1, 2], got {r}"
        )));
    }
    let grid = f.grid();
    let spectrum = dft(f);
    let mut acc = vec![0.0f64; grid.n()];
    let moduli: Vec<Vec<f64>> = family
        .iter()
        .map(|interval| {
            let piece = idft(&band_restrict(&spectrum, interval));
            piece.values().iter().map(|v| v.norm()).collect()
        })
        .collect();
    if r == 1.0 {
        for piece in &moduli {
            for (a, &m) in acc.iter_mut().zip(piece) {
                *a = a.max(m);
            }
        }
    } else if r == 2.0 {
        for piece in &moduli {
            for (a, &m) in acc.iter_mut().zip(piece) {
                *a += m * m;
            }
        }
        for a in acc.iter_mut() {
            *a = a.sqrt();
        }
    } else {
        let rp = r / (r - 1.0);
        for piece in &moduli {
            for (a, &m) in acc.iter_mut().zip(piece) {
                *a += m.powf(rp);
            }
        }
        for a in acc.iter_mut() {
            *a = a.powf(1.0 / rp);
        }
    }
    SampledSignal::new(
        grid,
        acc.into_iter().map(|a| Complex64::new(a, 0.0)).collect(),
    )
}

/// Even smooth bump profile: `1` on `[-1/2, 1/2]`, supported in
/// `[-lambda/2, lambda/2]`, glued with the standard `e^{-1/t}` ramp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothBump {
    lambda: f64,
}

impl SmoothBump {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "bump dilation must exceed 1, got {lambda}"
            )));
        }
        Ok(SmoothBump { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Frequency profile at normalized frequency `t`.
    pub fn profile(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= 0.5 {
            return 1.0;
        }
        let half_support = 0.5 * self.lambda;
        if a >= half_support {
            return 0.0;
        }
        // Smooth ramp from 1 at |t| = 1/2 down to 0 at |t| = lambda/2.
        let u = (half_support - a) / (half_support - 0.5);
        fn glue(t: f64) -> f64 {
            if t <= 0.0 {
                0.0
            } else {
                (-1.0 / t).exp()
            }
        }
        glue(u) / (glue(u) + glue(1.0 - u))
    }
}

impl Default for SmoothBump {
    fn default() -> Self {
        SmoothBump { lambda: 2.0 }
    }
}

/// Frequency samples of the modulated kernel: `phi_I^(xi) =
/// profile((xi - c_I)/|I|)`, identically 1 on `I` and 0 outside the
/// `lambda`-dilate.
pub fn smooth_kernel(interval: &FreqInterval, bump: &SmoothBump, grid: Grid) -> Symbol {
    let c = interval.center();
    let len = interval.len();
    Symbol::from_real_fn(grid, |xi| bump.profile((xi - c) / len))
}

/// Output of the smooth square function together with the well-distribution
/// diagnostic of the family it was computed over.
#[derive(Debug, Clone)]
pub struct SmoothSquareOutput {
    pub signal: SampledSignal,
    /// Max over the frequency grid of the number of covering dilates.
    pub dilate_overlap: usize,
    /// True when the overlap stays within the Whitney budget of 5; when
    /// false the value is still computed but carries no claim.
    pub well_distributed: bool,
}

/// Smooth square function `G f = (sum_I |phi_I * f|^2)^{1/2}`, evaluated in
/// the frequency domain. Families whose dilates overlap beyond the Whitney
/// budget are flagged, not rejected.
pub fn smooth_square_function(
    family: &IntervalFamily,
    f: &SampledSignal,
    bump: &SmoothBump,
) -> Result<SmoothSquareOutput> {
    let grid = f.grid();
    let overlap = well_distributed_constant(family, bump.lambda(), &grid);
    let spectrum = dft(f);
    let mut acc = vec![0.0f64; grid.n()];
    for interval in family.iter() {
        let kernel = smooth_kernel(interval, bump, grid);
        let mut masked = spectrum.clone();
        for (s, k) in masked.values_mut().iter_mut().zip(kernel.values()) {
            *s *= k;
        }
        let piece = idft(&masked);
        for (a, v) in acc.iter_mut().zip(piece.values()) {
            *a += v.norm_sqr();
        }
    }
    let signal = SampledSignal::new(
        grid,
        acc.into_iter()
            .map(|a| Complex64::new(a.sqrt(), 0.0))
            .collect(),
    )?;
    Ok(SmoothSquareOutput {
        signal,
        dilate_overlap: overlap,
        well_distributed: overlap <= 5,
    })
}

/// Band-indicator test function: the inverse transform of `chi_I` in
/// continuum normalization, so `f(x) = (1/L) sum_{xi_k in I} e^{2 pi i xi_k x}`
/// and `|f|` approximates `|sin(|I| pi x) / (pi x)|`.
pub fn test_function(interval: &FreqInterval, grid: Grid) -> Result<SampledSignal> {
    if !interval.within(&grid.nyquist()) {
        return Err(Error::InvalidInterval(format!(
            "interval [{}, {}) exceeds the Nyquist range",
            interval.lo(),
            interval.hi()
        )));
    }
    let amplitude = (grid.n() as f64).sqrt() / grid.period();
    let mut spectrum = SampledSignal::zeros(grid);
    for k in interval.grid_range(&grid) {
        spectrum.values_mut()[k] = Complex64::new(amplitude, 0.0);
    }
    Ok(idft(&spectrum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{sinc, whitney_decomposition};
    use crate::weights::{weighted_norm, Weight};
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

    fn max_dev(a: &SampledSignal, b: &SampledSignal) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn random_partition(grid: &Grid, rng: &mut ChaCha8Rng) -> IntervalFamily {
        let nyq = grid.nyquist();
        let cuts = rng.gen_range(1..6);
        let mut points: Vec<f64> = (0..cuts)
            .map(|_| nyq.lo() + rng.gen::<f64>() * (nyq.hi() - nyq.lo()))
            .collect();
        points.push(nyq.lo());
        points.push(nyq.hi());
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
        IntervalFamily::new(
            points
                .windows(2)
                .map(|w| FreqInterval::new(w[0], w[1]).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_symbol_is_identity() {
        let grid = Grid::new(128, 2.0).unwrap();
        let f = random_signal(grid, 1);
        let one = Symbol::constant(grid, Complex64::new(1.0, 0.0));
        let g = apply_multiplier(&one, &f).unwrap();
        assert!(max_dev(&f, &g) <= 1e-12 * f.sup_norm().max(1.0));
    }

    #[test]
    fn hilbert_squared_is_minus_identity_off_dc() {
        let grid = Grid::new(128, 2.0).unwrap();
        let f = random_signal(grid, 2);
        let h = Symbol::hilbert(grid);
        let hh = apply_multiplier(&h, &apply_multiplier(&h, &f).unwrap()).unwrap();
        // -f plus the DC component that the symbol annihilates.
        let spectrum = dft(&f);
        let dc_index = grid.n() / 2;
        let mut expected_spec = spectrum.clone();
        for (k, v) in expected_spec.values_mut().iter_mut().enumerate() {
            *v = if k == dc_index {
                Complex64::new(0.0, 0.0)
            } else {
                -*v
            };
        }
        let expected = idft(&expected_spec);
        assert!(max_dev(&hh, &expected) <= 1e-12);
    }

    #[test]
    fn indicator_multiplier_splits_energy() {
        let grid = Grid::new(256, 2.0).unwrap();
        let f = random_signal(grid, 3);
        let band = FreqInterval::new(-10.0, 7.0).unwrap();
        let inside = partial_sum(&band, &f).unwrap();
        let chi = Symbol::from_real_fn(grid, |xi| if band.contains(xi) { 0.0 } else { 1.0 });
        let outside = apply_multiplier(&chi, &f).unwrap();
        let lhs = inside.l2_norm().powi(2) + outside.l2_norm().powi(2);
        let rhs = f.l2_norm().powi(2);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn partial_sum_is_an_exact_projection() {
        let grid = Grid::new(128, 2.0).unwrap();
        let f = random_signal(grid, 4);
        let full = grid.nyquist();
        assert!(max_dev(&partial_sum(&full, &f).unwrap(), &f) <= 1e-12);
        let a = FreqInterval::new(-5.0, 1.0).unwrap();
        let b = FreqInterval::new(1.0, 6.0).unwrap();
        let sa = partial_sum(&a, &f).unwrap();
        assert!(max_dev(&partial_sum(&a, &sa).unwrap(), &sa) <= 1e-12, "S_I^2 = S_I");
        let sab = partial_sum(&b, &sa).unwrap();
        assert!(sab.sup_norm() <= 1e-12, "S_I S_J = 0 for disjoint I, J");
        // Spectrum of S_I f is supported exactly in I.
        let spec = dft(&sa);
        for (k, v) in spec.values().iter().enumerate() {
            if !a.contains(grid.frequency(k)) {
                assert!(v.norm() <= 1e-13);
            }
        }
    }

    #[test]
    fn single_interval_family_gives_modulus() {
        let grid = Grid::new(128, 2.0).unwrap();
        let f = random_signal(grid, 5);
        let fam = IntervalFamily::new(vec![grid.nyquist()]).unwrap();
        for r in [1.0, 1.5, 2.0] {
            let s = square_function(&fam, &f, r).unwrap();
            let dev = s
                .values()
                .iter()
                .zip(f.values())
                .map(|(a, b)| (a.re - b.norm()).abs())
                .fold(0.0, f64::max);
            assert!(dev <= 1e-12, "r={r}");
        }
    }

    #[test]
    fn quadratic_square_function_preserves_l2_over_partitions() {
        let grid = Grid::new(256, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for seed in 0..20 {
            let f = random_signal(grid, 100 + seed);
            let fam = random_partition(&grid, &mut rng);
            let s = square_function(&fam, &f, 2.0).unwrap();
            assert!(
                (s.l2_norm() - f.l2_norm()).abs() <= 1e-12 * f.l2_norm(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn square_functions_are_pointwise_monotone_in_r() {
        let grid = Grid::new(128, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for seed in 0..100 {
            let f = random_signal(grid, 200 + seed);
            let fam = random_partition(&grid, &mut rng);
            let s1 = square_function(&fam, &f, 1.0).unwrap();
            let sq1 = square_function(&fam, &f, 1.4).unwrap();
            let sq2 = square_function(&fam, &f, 1.8).unwrap();
            let s2 = square_function(&fam, &f, 2.0).unwrap();
            for k in 0..grid.n() {
                let chain = [
                    s1.values()[k].re,
                    sq1.values()[k].re,
                    sq2.values()[k].re,
                    s2.values()[k].re,
                ];
                for w in chain.windows(2) {
                    assert!(w[0] <= w[1] + 1e-12, "chain {chain:?}");
                }
            }
        }
    }

    #[test]
    fn bump_profile_hits_prescribed_values() {
        let bump = SmoothBump::default();
        assert_eq!(bump.profile(0.0), 1.0);
        assert_eq!(bump.profile(0.5), 1.0);
        assert_eq!(bump.profile(-0.5), 1.0);
        assert_eq!(bump.profile(1.0), 0.0);
        assert_eq!(bump.profile(-1.0), 0.0);
        let mid = bump.profile(0.75);
        assert!(mid > 0.0 && mid < 1.0);
        assert_eq!(bump.profile(0.75), bump.profile(-0.75), "even profile");
        // Monotone ramp on the transition band.
        let mut prev = 1.0;
        for i in 0..=20 {
            let t = 0.5 + 0.5 * i as f64 / 20.0;
            let v = bump.profile(t);
            assert!(v <= prev + 1e-15 && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn smooth_kernel_reproduces_projections_exactly() {
        let grid = Grid::new(256, 8.0).unwrap();
        let f = random_signal(grid, 6);
        let interval = FreqInterval::new(2.0, 5.0).unwrap();
        let bump = SmoothBump::default();
        let kernel = smooth_kernel(&interval, &bump, grid);
        // The kernel is identically one on the interval and vanishes outside
        // the dilate.
        assert_eq!(kernel.values()[interval.grid_range(&grid)]
            .iter()
            .map(|v| v.re)
            .fold(f64::INFINITY, f64::min), 1.0);
        let dilate = interval.dilate(bump.lambda());
        for k in 0..grid.n() {
            let xi = grid.frequency(k);
            if !dilate.contains(xi) && xi != dilate.hi() {
                assert_eq!(kernel.values()[k].re, 0.0, "xi={xi}");
            }
        }
        // S_I(phi_I * f) = S_I f exactly in frequency arithmetic.
        let smoothed = apply_multiplier(&kernel, &f).unwrap();
        let lhs = dft(&partial_sum(&interval, &smoothed).unwrap());
        let rhs = dft(&partial_sum(&interval, &f).unwrap());
        assert!(max_dev(&lhs, &rhs) <= 1e-13);
    }

    #[test]
    fn smooth_square_function_respects_whitney_overlap_budget() {
        let grid = Grid::new(512, 32.0).unwrap();
        let host = FreqInterval::new(0.0, 4.0).unwrap();
        let fam = whitney_decomposition(&host, 4.0 * 2f64.powi(-7)).unwrap();
        let bump = SmoothBump::default();
        for seed in 0..10 {
            let f = random_signal(grid, 300 + seed);
            let g = smooth_square_function(&fam, &f, &bump).unwrap();
            assert!(g.well_distributed);
            let s = square_function(&fam, &f, 2.0).unwrap();
            let sqrt5 = 5f64.sqrt();
            assert!(s.l2_norm() <= g.signal.l2_norm() + 1e-12);
            assert!(g.signal.l2_norm() <= sqrt5 * f.l2_norm() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn smooth_square_function_reproduces_core_banded_signals() {
        let grid = Grid::new(256, 16.0).unwrap();
        let interval = FreqInterval::new(1.0, 2.0).unwrap();
        let fam = IntervalFamily::new(vec![interval]).unwrap();
        let f = test_function(&interval, grid).unwrap();
        let g = smooth_square_function(&fam, &f, &SmoothBump::default()).unwrap();
        let dev = g
            .signal
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| (a.re - b.norm()).abs())
            .fold(0.0, f64::max);
        assert!(dev <= 1e-12, "Gf = |f| on the reproducing core, dev {dev}");
    }

    #[test]
    fn test_function_profile_and_projection() {
        let grid = Grid::new(512, 16.0).unwrap();
        let interval = FreqInterval::new(-2.0, 2.0).unwrap();
        let f = test_function(&interval, grid).unwrap();
        let sf = partial_sum(&interval, &f).unwrap();
        assert!(max_dev(&sf, &f) <= 1e-12 * f.sup_norm(), "S_I f_I = f_I");
        // Exact Plancherel count identity.
        let count = interval.sample_count(&grid) as f64;
        let energy = f.l2_norm().powi(2) * grid.spacing();
        assert!((energy - count / grid.period()).abs() <= 1e-10);
        // Modulus matches the band-limited sinc profile away from wrap.
        let len = interval.len();
        for k in (0..grid.n()).step_by(17) {
            let x = grid.spatial_point(k);
            if x.abs() > grid.period() / 4.0 {
                continue;
            }
            let expected = (len * sinc(len * x)).abs();
            assert!(
                (f.values()[k].norm() - expected).abs() <= 5e-2 * len,
                "x={x}"
            );
        }
    }

    #[test]
    fn test_function_norm_scales_like_dual_exponent_power() {
        let grid = Grid::new(4096, 32.0).unwrap();
        let w = Weight::constant(grid, 1.0).unwrap();
        let p = 4.0;
        let pp = p / (p - 1.0);
        let mut constants = Vec::new();
        for len in [4.0, 8.0, 16.0, 32.0] {
            let interval = FreqInterval::new(0.0, len).unwrap();
            let f = test_function(&interval, grid).unwrap();
            let norm = weighted_norm(&f, p, &w).unwrap();
            constants.push(norm / len.powf(1.0 / pp));
        }
        let lo = constants.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = constants.iter().cloned().fold(0.0f64, f64::max);
        assert!(hi / lo <= 3.0, "two-sided within a single constant: {constants:?}");
    }

    #[test]
    fn multiplier_commutes_with_cyclic_shift() {
        let grid = Grid::new(128, 2.0).unwrap();
        let f = random_signal(grid, 8);
        let m = Symbol::hilbert(grid);
        let shift = 13usize;
        let shifted = SampledSignal::new(
            grid,
            (0..grid.n())
                .map(|j| f.values()[(j + shift) % grid.n()])
                .collect(),
        )
        .unwrap();
        let a = apply_multiplier(&m, &shifted).unwrap();
        let b = apply_multiplier(&m, &f).unwrap();
        let b_shifted = SampledSignal::new(
            grid,
            (0..grid.n())
                .map(|j| b.values()[(j + shift) % grid.n()])
                .collect(),
        )
        .unwrap();
        assert!(max_dev(&a, &b_shifted) <= 1e-12);
    }

    #[test]
    fn test_function_requires_resolvable_band() {
        let grid = Grid::new(64, 1.0).unwrap();
        assert!(test_function(&FreqInterval::new(30.0, 40.0).unwrap(), grid).is_err());
    }
}
