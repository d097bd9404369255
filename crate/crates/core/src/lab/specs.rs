//! Grid-independent generators for weights, symbols, signals, and interval
//! families. A spec pins down a physical object (fixed frequencies, fixed
//! seed), so rebuilding it on a refined grid samples the same object — the
//! stability sweeps rely on that.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::lattice::{whitney_decomposition, FreqInterval, Grid, IntervalFamily, SampledSignal};
use crate::variation::Symbol;
use crate::weights::{make_a1_example, power_weight, Weight};
use crate::{Error, Result};

/// Weight family member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    Constant,
    Power { alpha: f64 },
    A1Example,
}

impl WeightSpec {
    pub fn build(&self, grid: Grid) -> Result<Weight> {
        match self {
            WeightSpec::Constant => Weight::constant(grid, 1.0),
            WeightSpec::Power { alpha } => Ok(power_weight(*alpha, grid)),
            WeightSpec::A1Example => Ok(make_a1_example(grid)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            WeightSpec::Constant => "const".into(),
            WeightSpec::Power { alpha } => format!("power:{alpha}"),
            WeightSpec::A1Example => "a1".into(),
        }
    }

    /// Parse `const`, `a1`, or `power:<alpha>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "const" => Ok(WeightSpec::Constant),
            "a1" => Ok(WeightSpec::A1Example),
            _ => {
                if let Some(rest) = s.strip_prefix("power:") {
                    let alpha: f64 = rest.parse().map_err(|_| {
                        Error::InvalidParameter(format!("bad power weight exponent {rest:?}"))
                    })?;
                    Ok(WeightSpec::Power { alpha })
                } else {
                    Err(Error::InvalidParameter(format!(
                        "unknown weight spec {s:?}; expected const, a1, or power:<alpha>"
                    )))
                }
            }
        }
    }
}

/// Multiplier symbol family member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolSpec {
    One,
    Hilbert,
    /// `sin(log2 |xi|)`, regularized at the origin by one frequency step.
    SinLog,
    /// Independent signs on the resolvable dyadic blocks.
    DyadicBlocks { seed: u64 },
}

impl SymbolSpec {
    pub fn build(&self, grid: Grid) -> Symbol {
        match self {
            SymbolSpec::One => Symbol::constant(grid, Complex64::new(1.0, 0.0)),
            SymbolSpec::Hilbert => Symbol::hilbert(grid),
            SymbolSpec::SinLog => {
                let step = grid.freq_step();
                Symbol::from_real_fn(grid, move |xi| xi.abs().max(step).log2().sin())
            }
            SymbolSpec::DyadicBlocks { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let blocks = crate::lattice::dyadic_decomposition(&grid);
                let signs: Vec<f64> = blocks
                    .iter()
                    .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                    .collect();
                Symbol::from_real_fn(grid, move |xi| {
                    for (block, &sign) in blocks.iter().zip(&signs) {
                        if block.contains(xi) {
                            return sign;
                        }
                    }
                    0.0
                })
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            SymbolSpec::One => "one".into(),
            SymbolSpec::Hilbert => "hilbert".into(),
            SymbolSpec::SinLog => "sinlog".into(),
            SymbolSpec::DyadicBlocks { seed } => format!("blocks:{seed}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(SymbolSpec::One),
            "hilbert" => Ok(SymbolSpec::Hilbert),
            "sinlog" => Ok(SymbolSpec::SinLog),
            _ => {
                if let Some(rest) = s.strip_prefix("blocks:") {
                    let seed: u64 = rest.parse().map_err(|_| {
                        Error::InvalidParameter(format!("bad block symbol seed {rest:?}"))
                    })?;
                    Ok(SymbolSpec::DyadicBlocks { seed })
                } else {
                    Err(Error::InvalidParameter(format!(
                        "unknown symbol spec {s:?}; expected one, hilbert, sinlog, or blocks:<seed>"
                    )))
                }
            }
        }
    }
}

/// Test-signal generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalSpec {
    /// A sum of `modes` complex exponentials with seeded frequencies inside
    /// `band` and seeded coefficients. The frequencies are physical, not
    /// grid indices, so refinement samples the same function.
    BandLimited {
        seed: u64,
        modes: usize,
        band: (f64, f64),
    },
    /// The same modulated sum truncated to the spatial window `support`;
    /// compactly supported on the torus.
    WindowedWave {
        seed: u64,
        modes: usize,
        band: (f64, f64),
        support: (f64, f64),
    },
}

impl SignalSpec {
    pub fn build(&self, grid: Grid) -> SampledSignal {
        match self {
            SignalSpec::BandLimited { seed, modes, band } => {
                let terms = seeded_modes(*seed, *modes, *band);
                SampledSignal::from_fn(grid, |x| synth(&terms, x))
            }
            SignalSpec::WindowedWave {
                seed,
                modes,
                band,
                support,
            } => {
                let terms = seeded_modes(*seed, *modes, *band);
                let (lo, hi) = *support;
                SampledSignal::from_fn(grid, |x| {
                    if lo <= x && x < hi {
                        synth(&terms, x)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            SignalSpec::BandLimited { seed, .. } => format!("band:{seed}"),
            SignalSpec::WindowedWave { seed, .. } => format!("wave:{seed}"),
        }
    }
}

fn seeded_modes(seed: u64, modes: usize, band: (f64, f64)) -> Vec<(f64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..modes)
        .map(|_| {
            let freq = band.0 + rng.gen::<f64>() * (band.1 - band.0);
            let coeff = Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
            (freq, coeff)
        })
        .collect()
}

fn synth(terms: &[(f64, Complex64)], x: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (freq, coeff) in terms {
        let phase = 2.0 * std::f64::consts::PI * freq * x;
        acc += coeff * Complex64::new(phase.cos(), phase.sin());
    }
    acc
}

/// Disjoint-interval family generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilySpec {
    /// Consecutive unit intervals `[lo + j, lo + j + 1)`.
    UnitBlocks { lo: f64, count: usize },
    /// Lacunary blocks `[base^j, base^{j+1})`.
    Lacunary { base: f64, count: usize },
    /// Seeded disjoint intervals with endpoints drawn in `[lo, hi]`.
    RandomDisjoint {
        seed: u64,
        max_intervals: usize,
        lo: f64,
        hi: f64,
        min_len: f64,
    },
    /// Whitney decomposition of `[lo, hi)` with the given cutoff.
    Whitney { lo: f64, hi: f64, min_len: f64 },
}

impl FamilySpec {
    pub fn build(&self, _grid: Grid) -> Result<IntervalFamily> {
        match self {
            FamilySpec::UnitBlocks { lo, count } => {
                if *count == 0 {
                    return Err(Error::InvalidParameter("empty unit-block family".into()));
                }
                IntervalFamily::new(
                    (0..*count)
                        .map(|j| FreqInterval::new(lo + j as f64, lo + j as f64 + 1.0))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            FamilySpec::Lacunary { base, count } => {
                if !(*base > 1.0) || *count == 0 {
                    return Err(Error::InvalidParameter(
                        "lacunary family needs base > 1 and count > 0".into(),
                    ));
                }
                IntervalFamily::new(
                    (0..*count)
                        .map(|j| {
                            FreqInterval::new(base.powi(j as i32), base.powi(j as i32 + 1))
                        })
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            FamilySpec::RandomDisjoint {
                seed,
                max_intervals,
                lo,
                hi,
                min_len,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let count = rng.gen_range(2..=(*max_intervals).max(2));
                let mut points: Vec<f64> = (0..2 * count)
                    .map(|_| lo + rng.gen::<f64>() * (hi - lo))
                    .collect();
                points.sort_by(|a, b| a.partial_cmp(b).expect("finite endpoints"));
                let mut intervals = Vec::new();
                for pair in points.chunks_exact(2) {
                    if pair[1] - pair[0] >= *min_len {
                        intervals.push(FreqInterval::new(pair[0], pair[1])?);
                    }
                }
                if intervals.is_empty() {
                    intervals.push(FreqInterval::new(*lo, 0.5 * (lo + hi))?);
                }
                IntervalFamily::new(intervals)
            }
            FamilySpec::Whitney { lo, hi, min_len } => {
                whitney_decomposition(&FreqInterval::new(*lo, *hi)?, *min_len)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            FamilySpec::UnitBlocks { lo, count } => format!("units:{lo}+{count}"),
            FamilySpec::Lacunary { base, count } => format!("lacunary:{base}^{count}"),
            FamilySpec::RandomDisjoint { seed, .. } => format!("random:{seed}"),
            FamilySpec::Whitney { lo, hi, .. } => format!("whitney:[{lo},{hi})"),
        }
    }
}
