//! Electronic chromatic-dispersion compensation at two samples per symbol.
//!
//! Three back-ends: a static chirp FIR in the time domain, a static
//! all-pass in the frequency domain applied by overlap-add, and a
//! decision-directed LMS filter that learns the inverse channel.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::channel::FiberSpec;
use crate::error::{Result, SimError};
use crate::signal::{ComplexSequence, ConstellationSpec};

/// Rounding of the half-memory term in the TDE tap count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TapRounding {
    /// N = 2·⌊|D|λ²L/(2cT²)⌋ + 1, which reproduces the published tap table.
    #[default]
    Floor,
    /// N = 2·⌈|D|λ²L/(2cT²)⌉ + 1.
    Ceil,
}

fn half_memory(fiber: &FiberSpec, t: f64) -> f64 {
    fiber.accumulated().abs() / (2.0 * fiber.light_speed * t * t)
}

/// Odd TDE length covering the dispersion memory at sampling period `t`.
pub fn tde_tap_count(fiber: &FiberSpec, t: f64) -> Result<usize> {
    tde_tap_count_with(fiber, t, TapRounding::Floor)
}

pub fn tde_tap_count_with(fiber: &FiberSpec, t: f64, rounding: TapRounding) -> Result<usize> {
    if !(t > 0.0) {
        return Err(SimError::param("sampling_period", "must be positive"));
    }
    fiber.validate()?;
    let m = half_memory(fiber, t);
    let half = match rounding {
        TapRounding::Floor => m.floor(),
        TapRounding::Ceil => m.ceil(),
    };
    Ok(2 * half as usize + 1)
}

/// Static time-domain equalizer taps, indexed k = −⌊N/2⌋..=⌊N/2⌋.
#[derive(Debug, Clone, PartialEq)]
pub struct TdeFilter {
    pub taps: Vec<Complex64>,
    pub sampling_period: f64,
}

impl TdeFilter {
    pub fn identity(sampling_period: f64) -> Self {
        Self {
            taps: vec![Complex64::new(1.0, 0.0)],
            sampling_period,
        }
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn half_len(&self) -> usize {
        self.taps.len() / 2
    }

    /// Tap W(k) for signed index k.
    pub fn tap(&self, k: isize) -> Complex64 {
        self.taps[(k + self.half_len() as isize) as usize]
    }
}

/// Chirp FIR inverting the fiber dispersion:
/// W(k) = sqrt(−jcT²/(Dλ²L))·exp(+jπcT²k²/(Dλ²L)).
///
/// Its DTFT approximates exp(−jDλ²Lω²/(4πc)), the inverse of
/// [`crate::channel::cd_propagate`].
pub fn tde_build(fiber: &FiberSpec, t: f64) -> Result<TdeFilter> {
    let n = tde_tap_count(fiber, t)?;
    let z = fiber.accumulated();
    if fiber.length == 0.0 || z == 0.0 {
        return Ok(TdeFilter::identity(t));
    }
    let c = fiber.light_speed;
    let amp = (Complex64::new(0.0, -c * t * t / z)).sqrt();
    let h = (n / 2) as isize;
    let taps = (-h..=h)
        .map(|k| amp * Complex64::from_polar(1.0, PI * c * t * t * (k * k) as f64 / z))
        .collect();
    Ok(TdeFilter {
        taps,
        sampling_period: t,
    })
}

/// Center-aligned linear convolution; output length equals input length.
pub fn tde_equalize(wave: &ComplexSequence, f: &TdeFilter) -> Result<ComplexSequence> {
    if wave.len() < f.len() {
        return Err(SimError::LengthMismatch {
            what: "tde_equalize input shorter than filter",
            expected: f.len(),
            got: wave.len(),
        });
    }
    let x = &wave.samples;
    let n = x.len();
    let h = f.half_len();
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    // y[i] = Σ_j taps[j]·x[i + h − j]
    for (i, out) in y.iter_mut().enumerate() {
        let j_lo = (i + h).saturating_sub(n - 1);
        let j_hi = (i + h).min(f.len() - 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in j_lo..=j_hi {
            acc += f.taps[j] * x[i + h - j];
        }
        *out = acc;
    }
    Ok(wave.with_samples(y))
}

/// Minimum overlap-add zero padding:
/// 2·⌈sqrt(π²c²T⁴ + 4λ⁴D²L²)/(πcT²) + 1⌉.
pub fn fde_min_zero_padding(fiber: &FiberSpec, t: f64) -> Result<usize> {
    if !(t > 0.0) {
        return Err(SimError::param("sampling_period", "must be positive"));
    }
    fiber.validate()?;
    let c = fiber.light_speed;
    let z = fiber.accumulated();
    let pct2 = PI * c * t * t;
    let bracket = (pct2 * pct2 + 4.0 * z * z).sqrt() / pct2 + 1.0;
    Ok(2 * bracket.ceil() as usize)
}

/// Frequency-domain equalizer plan.
#[derive(Debug, Clone, PartialEq)]
pub struct FdePlan {
    pub fft_size: usize,
    pub overlap: usize,
    /// W(k) for k = −N/2..N/2−1, in that order.
    pub weights: Vec<Complex64>,
    /// Nyquist angular frequency π/T (rad/s).
    pub nyquist_angular_freq: f64,
    /// Weights rearranged into FFT bin order.
    bins: Vec<Complex64>,
}

impl FdePlan {
    pub fn weight(&self, k: isize) -> Complex64 {
        self.weights[(k + (self.fft_size / 2) as isize) as usize]
    }

    /// Input samples consumed per block.
    pub fn block_advance(&self) -> usize {
        self.fft_size - self.overlap
    }
}

pub fn fde_plan(fiber: &FiberSpec, t: f64) -> Result<FdePlan> {
    let overlap = fde_min_zero_padding(fiber, t)?;
    // Smallest power of two strictly above the zero-padding value.
    let fft_size = (overlap + 1).next_power_of_two();
    let wn = PI / t;
    let coef = fiber.accumulated() / (PI * fiber.light_speed);
    let half = (fft_size / 2) as isize;
    let weights: Vec<Complex64> = (-half..half)
        .map(|k| {
            let w = k as f64 / fft_size as f64 * wn;
            Complex64::from_polar(1.0, -coef * w * w)
        })
        .collect();
    let bins = (0..fft_size)
        .map(|b| {
            let k = if b < fft_size / 2 {
                b as isize
            } else {
                b as isize - fft_size as isize
            };
            weights[(k + half) as usize]
        })
        .collect();
    Ok(FdePlan {
        fft_size,
        overlap,
        weights,
        nyquist_angular_freq: wn,
        bins,
    })
}

/// Overlap-add FDE. Each block of `fft_size − overlap` input samples is
/// centered in a zero-padded frame (overlap/2 zeros each side), filtered,
/// and its full frame added back at the matching position, so the output is
/// aligned with the input.
pub fn fde_equalize(wave: &ComplexSequence, plan: &FdePlan) -> Result<ComplexSequence> {
    let n = wave.len();
    let nfft = plan.fft_size;
    let adv = plan.block_advance();
    let pad = plan.overlap / 2;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(nfft);
    let inv = planner.plan_fft_inverse(nfft);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    let mut frame = vec![Complex64::new(0.0, 0.0); nfft];
    let scale = 1.0 / nfft as f64;
    let mut start = 0;
    while start < n {
        let end = (start + adv).min(n);
        frame.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        frame[pad..pad + (end - start)].copy_from_slice(&wave.samples[start..end]);
        fwd.process_with_scratch(&mut frame, &mut scratch);
        for (z, w) in frame.iter_mut().zip(&plan.bins) {
            *z *= w * scale;
        }
        inv.process_with_scratch(&mut frame, &mut scratch);
        // frame[i] sits at input position start − pad + i
        for (i, z) in frame.iter().enumerate() {
            let pos = start as isize - pad as isize + i as isize;
            if pos >= 0 && (pos as usize) < n {
                y[pos as usize] += z;
            }
        }
        start = end;
    }
    Ok(wave.with_samples(y))
}

/// Adaptive fractionally spaced equalizer: T/2-spaced taps, one output and
/// one update per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct LmsEqualizer {
    pub taps: Vec<Complex64>,
    pub step_size: f64,
    pub training_length: usize,
}

/// Default LMS step size.
pub const DEFAULT_LMS_STEP: f64 = 1e-3;
/// Default number of LMS training symbols.
pub const DEFAULT_LMS_TRAINING: usize = 10_000;

impl LmsEqualizer {
    /// Center-spike initialization with `n_taps` (odd) taps.
    pub fn new(n_taps: usize, step_size: f64, training_length: usize) -> Result<Self> {
        if n_taps % 2 == 0 {
            return Err(SimError::param("lms taps", "tap count must be odd"));
        }
        if !(step_size > 0.0) {
            return Err(SimError::param("lms step_size", "must be positive"));
        }
        let mut taps = vec![Complex64::new(0.0, 0.0); n_taps];
        taps[n_taps / 2] = Complex64::new(1.0, 0.0);
        Ok(Self {
            taps,
            step_size,
            training_length,
        })
    }

    /// Defaults sized to the TDE length of `fiber`.
    pub fn for_link(fiber: &FiberSpec, t: f64) -> Result<Self> {
        Self::new(tde_tap_count(fiber, t)?, DEFAULT_LMS_STEP, DEFAULT_LMS_TRAINING)
    }

    pub fn norm(&self) -> f64 {
        self.taps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmsOutput {
    /// One output per symbol.
    pub symbols: Vec<Complex64>,
    /// Squared error per symbol.
    pub error_power: Vec<f64>,
    pub diverged: bool,
}

/// Runs the LMS recursion, y = Wᴴx, e = d − y, W ← W + μ·x·e*, with `d`
/// taken from `training` for the first `training_length` symbols and from
/// the slicer afterwards. The tap vector for symbol k spans input samples
/// 2k − N/2 ..= 2k + N/2 (zeros outside the record).
///
/// Updates stop once ‖W‖ exceeds 10³ times its initial norm and the output
/// is flagged as diverged.
pub fn lms_equalize(
    wave: &ComplexSequence,
    eq: &mut LmsEqualizer,
    training: &[Complex64],
    constellation: &ConstellationSpec,
) -> Result<LmsOutput> {
    if eq.training_length < 1 {
        return Err(SimError::param("training_length", "must be at least 1"));
    }
    if training.len() < eq.training_length.min(wave.len() / 2) {
        return Err(SimError::LengthMismatch {
            what: "lms training symbols",
            expected: eq.training_length,
            got: training.len(),
        });
    }
    let ntaps = eq.taps.len();
    if ntaps > wave.len() {
        return Err(SimError::LengthMismatch {
            what: "lms input shorter than filter",
            expected: ntaps,
            got: wave.len(),
        });
    }
    let h = ntaps / 2;
    // Zero-padded copy so every window is a plain slice.
    let mut padded = vec![Complex64::new(0.0, 0.0); wave.len() + 2 * h + 1];
    padded[h..h + wave.len()].copy_from_slice(&wave.samples);
    let n_sym = wave.len() / 2;
    let limit = 1e3 * eq.norm();
    let mu = eq.step_size;
    let mut diverged = false;
    let mut symbols = Vec::with_capacity(n_sym);
    let mut error_power = Vec::with_capacity(n_sym);
    for k in 0..n_sym {
        let x = &padded[2 * k..2 * k + ntaps];
        let y: Complex64 = eq.taps.iter().zip(x).map(|(w, v)| w.conj() * v).sum();
        let d = if k < eq.training_length && k < training.len() {
            training[k]
        } else {
            constellation.slice(y)
        };
        let e = d - y;
        symbols.push(y);
        error_power.push(e.norm_sqr());
        if !diverged {
            let ec = e.conj() * mu;
            for (w, v) in eq.taps.iter_mut().zip(x) {
                *w += v * ec;
            }
            if !eq.norm().is_finite() || eq.norm() > limit {
                diverged = true;
            }
        }
    }
    Ok(LmsOutput {
        symbols,
        error_power,
        diverged,
    })
}
