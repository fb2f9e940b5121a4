//! NRZ waveform synthesis and laser phase noise.
//!
//! Laser phase noise is a Wiener process: a Lorentzian line of 3-dB width
//! Δf gives independent Gaussian phase increments of variance 2πΔf·T over a
//! sampling period T.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::error::{Result, SimError};
use crate::signal::{ComplexSequence, SymbolFrame};

/// Default carrier wavelength of both lasers (m).
pub const DEFAULT_WAVELENGTH: f64 = 1553.6e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserSpec {
    /// 3-dB Lorentzian linewidth (Hz).
    pub linewidth: f64,
    /// Center wavelength (m).
    pub center_wavelength: f64,
}

impl LaserSpec {
    pub fn new(linewidth: f64, center_wavelength: f64) -> Result<Self> {
        let l = Self {
            linewidth,
            center_wavelength,
        };
        l.validate()?;
        Ok(l)
    }

    pub fn with_linewidth(linewidth: f64) -> Self {
        Self {
            linewidth,
            center_wavelength: DEFAULT_WAVELENGTH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.linewidth >= 0.0) || !self.linewidth.is_finite() {
            return Err(SimError::param("linewidth", "must be finite and >= 0"));
        }
        if !(self.center_wavelength > 0.0) {
            return Err(SimError::param("center_wavelength", "must be positive"));
        }
        Ok(())
    }

    /// Phase-increment variance over `period` seconds.
    pub fn increment_variance(&self, period: f64) -> f64 {
        2.0 * PI * self.linewidth * period
    }
}

/// One realization of a laser phase walk.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseWalk {
    pub phases: Vec<f64>,
    pub sample_period: f64,
}

impl PhaseWalk {
    pub fn zeros(n: usize, sample_period: f64) -> Self {
        Self {
            phases: vec![0.0; n],
            sample_period,
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Realized increments φ(k) − φ(k−1), k ≥ 1.
    pub fn increments(&self) -> Vec<f64> {
        self.phases.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

pub fn phase_walk<R: Rng + ?Sized>(
    laser: &LaserSpec,
    n_samples: usize,
    sample_period: f64,
    rng: &mut R,
) -> Result<PhaseWalk> {
    laser.validate()?;
    if n_samples == 0 {
        return Err(SimError::param("n_samples", "must be at least 1"));
    }
    if !(sample_period > 0.0) {
        return Err(SimError::param("sample_period", "must be positive"));
    }
    if laser.linewidth == 0.0 {
        return Ok(PhaseWalk::zeros(n_samples, sample_period));
    }
    let sigma = laser.increment_variance(sample_period).sqrt();
    let mut phases = Vec::with_capacity(n_samples);
    let mut phi = 0.0;
    phases.push(phi);
    for _ in 1..n_samples {
        let step: f64 = rng.sample(StandardNormal);
        phi += sigma * step;
        phases.push(phi);
    }
    Ok(PhaseWalk {
        phases,
        sample_period,
    })
}

/// Rectangular NRZ: every symbol held for `samples_per_symbol` samples.
pub fn synthesize_waveform(
    frame: &SymbolFrame,
    samples_per_symbol: usize,
    center_wavelength: f64,
) -> Result<[ComplexSequence; 2]> {
    if samples_per_symbol < 2 || samples_per_symbol % 2 != 0 {
        return Err(SimError::param(
            "samples_per_symbol",
            format!("must be even and >= 2, got {samples_per_symbol}"),
        ));
    }
    let rate = frame.symbol_rate * samples_per_symbol as f64;
    let hold = |syms: &[Complex64]| -> Vec<Complex64> {
        syms.iter()
            .flat_map(|&s| std::iter::repeat(s).take(samples_per_symbol))
            .collect()
    };
    Ok([
        ComplexSequence::new(hold(&frame.pol_x), rate, center_wavelength)?,
        ComplexSequence::new(hold(&frame.pol_y), rate, center_wavelength)?,
    ])
}

/// Multiplies sample k by e^{+jφ(k)}.
pub fn apply_phase(wave: &ComplexSequence, walk: &PhaseWalk) -> Result<ComplexSequence> {
    rotate_by_walk(wave, walk, 1.0)
}

pub(crate) fn rotate_by_walk(
    wave: &ComplexSequence,
    walk: &PhaseWalk,
    sign: f64,
) -> Result<ComplexSequence> {
    if wave.len() != walk.len() {
        return Err(SimError::LengthMismatch {
            what: "phase walk",
            expected: wave.len(),
            got: walk.len(),
        });
    }
    if ((walk.sample_period * wave.sample_rate) - 1.0).abs() > 1e-9 {
        return Err(SimError::SampleRate {
            sample_rate: wave.sample_rate,
            what: format!("phase walk with period {} s", walk.sample_period),
        });
    }
    let samples = wave
        .samples
        .iter()
        .zip(&walk.phases)
        .map(|(&z, &phi)| z * Complex64::from_polar(1.0, sign * phi))
        .collect();
    Ok(wave.with_samples(samples))
}
