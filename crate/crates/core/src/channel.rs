//! Fiber propagation and the coherent receiver front-end.
//!
//! Stages run in a fixed order: Tx phase noise, dispersion, optional optical
//! compensation, ASE loading, LO mixing, Bessel low-pass, ADC, decimation to
//! two samples per symbol. LO phase noise enters after the fiber, which is
//! what lets an electronic dispersion equalizer turn it into EEPN.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::error::{Result, SimError};
use crate::signal::ComplexSequence;
use crate::spectral::{filter_record, filter_record_real};
use crate::transmitter::{rotate_by_walk, PhaseWalk, DEFAULT_WAVELENGTH};

/// Speed of light in vacuum (m/s).
pub const LIGHT_SPEED: f64 = 299_792_458.0;

/// Converts ps/(nm·km) to s/m².
pub fn ps_per_nm_km(d: f64) -> f64 {
    d * 1e-12 / (1e-9 * 1e3)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberSpec {
    /// Dispersion coefficient D (s/m²).
    pub dispersion: f64,
    /// Length (m).
    pub length: f64,
    /// Carrier wavelength (m).
    pub wavelength: f64,
    pub light_speed: f64,
}

impl FiberSpec {
    /// Standard SMF: 16 ps/nm/km at 1553.6 nm.
    pub fn ssmf(length: f64) -> Self {
        Self {
            dispersion: ps_per_nm_km(16.0),
            length,
            wavelength: DEFAULT_WAVELENGTH,
            light_speed: LIGHT_SPEED,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length >= 0.0) {
            return Err(SimError::param("length", "must be >= 0"));
        }
        if !self.dispersion.is_finite() {
            return Err(SimError::param("dispersion", "must be finite"));
        }
        if !(self.wavelength > 0.0) {
            return Err(SimError::param("wavelength", "must be positive"));
        }
        Ok(())
    }

    /// D·λ²·L (s).
    pub fn accumulated(&self) -> f64 {
        self.dispersion * self.wavelength * self.wavelength * self.length
    }

    /// Coefficient β of the all-pass phase β·ω² accumulated by the fiber.
    pub fn phase_coefficient(&self) -> f64 {
        self.accumulated() / (4.0 * PI * self.light_speed)
    }
}

/// Fiber transfer exp(+j·Dλ²L·ω²/(4πc)) applied with one transform.
pub fn cd_propagate(wave: &ComplexSequence, fiber: &FiberSpec) -> Result<ComplexSequence> {
    if wave.is_empty() {
        return Err(SimError::EmptyInput("cd_propagate"));
    }
    fiber.validate()?;
    Ok(all_pass(wave, fiber.phase_coefficient()))
}

/// Optical compensator flavour. Both model an ideal compensator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdcMode {
    Dcf,
    Fbg,
}

/// Ideal optical dispersion compensation, the exact inverse of
/// [`cd_propagate`].
pub fn odc_compensate(
    wave: &ComplexSequence,
    fiber: &FiberSpec,
    _mode: OdcMode,
) -> Result<ComplexSequence> {
    fiber.validate()?;
    Ok(all_pass(wave, -fiber.phase_coefficient()))
}

fn all_pass(wave: &ComplexSequence, beta: f64) -> ComplexSequence {
    if beta == 0.0 || wave.is_empty() {
        return wave.clone();
    }
    let out = filter_record(&wave.samples, wave.sample_rate, |w| {
        Complex64::from_polar(1.0, beta * w * w)
    });
    wave.with_samples(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontendSpec {
    pub lpf_order: usize,
    /// Low-pass 3-dB bandwidth (Hz).
    pub lpf_3db: f64,
    pub adc_bits: u32,
    /// ADC full scale in units of the per-rail RMS.
    pub adc_clip_sigma: f64,
    /// Target OSNR; `f64::INFINITY` disables noise loading.
    pub osnr_db: f64,
    /// OSNR reference bandwidth (Hz).
    pub osnr_ref_bw: f64,
}

impl Default for FrontendSpec {
    fn default() -> Self {
        Self {
            lpf_order: 5,
            lpf_3db: 19.6e9,
            adc_bits: 8,
            adc_clip_sigma: 4.0,
            osnr_db: f64::INFINITY,
            osnr_ref_bw: 12.5e9,
        }
    }
}

impl FrontendSpec {
    pub fn with_osnr(osnr_db: f64) -> Self {
        Self {
            osnr_db,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.adc_bits < 1 || self.adc_bits > 24 {
            return Err(SimError::param("adc_bits", "must be in 1..=24"));
        }
        if !(self.lpf_3db > 0.0) {
            return Err(SimError::param("lpf_3db", "must be positive"));
        }
        if self.lpf_order < 1 || self.lpf_order > 12 {
            return Err(SimError::param("lpf_order", "must be in 1..=12"));
        }
        if !(self.adc_clip_sigma > 0.0) {
            return Err(SimError::param("adc_clip_sigma", "must be positive"));
        }
        if !(self.osnr_ref_bw > 0.0) {
            return Err(SimError::param("osnr_ref_bw", "must be positive"));
        }
        Ok(())
    }
}

/// Complex ASE noise PSD per polarization (W/Hz) that realizes `osnr_db`
/// for a total dual-polarization signal power `total_power`.
pub fn noise_psd_for_osnr(total_power: f64, osnr_db: f64, ref_bw: f64) -> Result<f64> {
    let osnr = 10f64.powf(osnr_db / 10.0);
    if !(osnr > 0.0) || osnr.is_nan() {
        return Err(SimError::param("osnr_db", format!("linear OSNR {osnr} is not positive")));
    }
    Ok(total_power / (osnr * 2.0 * ref_bw))
}

/// OSNR (dB) for a total signal power and per-polarization noise PSD.
pub fn osnr_db_from(total_power: f64, noise_psd: f64, ref_bw: f64) -> f64 {
    10.0 * (total_power / (noise_psd * 2.0 * ref_bw)).log10()
}

/// Adds white circular Gaussian noise to both polarizations so that the
/// total signal power over the noise in `osnr_ref_bw` (both polarizations)
/// equals the target OSNR.
pub fn load_awgn<R: Rng + ?Sized>(
    wave_x: &ComplexSequence,
    wave_y: &ComplexSequence,
    spec: &FrontendSpec,
    rng: &mut R,
) -> Result<(ComplexSequence, ComplexSequence)> {
    if wave_x.len() != wave_y.len() {
        return Err(SimError::LengthMismatch {
            what: "load_awgn polarizations",
            expected: wave_x.len(),
            got: wave_y.len(),
        });
    }
    if wave_x.sample_rate != wave_y.sample_rate {
        return Err(SimError::SampleRate {
            sample_rate: wave_y.sample_rate,
            what: "mismatched polarization rates".into(),
        });
    }
    if spec.osnr_db == f64::INFINITY {
        return Ok((wave_x.clone(), wave_y.clone()));
    }
    let total = wave_x.mean_power() + wave_y.mean_power();
    let psd = noise_psd_for_osnr(total, spec.osnr_db, spec.osnr_ref_bw)?;
    let sigma = (psd * wave_x.sample_rate / 2.0).sqrt();
    let mut add = |w: &ComplexSequence| -> ComplexSequence {
        let s = w
            .samples
            .iter()
            .map(|&z| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                z + Complex64::new(sigma * re, sigma * im)
            })
            .collect();
        w.with_samples(s)
    };
    let x = add(wave_x);
    let y = add(wave_y);
    Ok((x, y))
}

/// Heterodyne with the LO: sample k multiplied by e^{−jφ_LO(k)}.
pub fn lo_mix(wave: &ComplexSequence, lo_walk: &PhaseWalk) -> Result<ComplexSequence> {
    rotate_by_walk(wave, lo_walk, -1.0)
}

/// Bessel–Thomson low-pass prototype normalized to a 3-dB corner of 1 rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselPrototype {
    /// Reverse Bessel polynomial coefficients, ascending powers of s.
    coeffs: Vec<f64>,
    /// Frequency scale: H(s) = θ(0)/θ(s·scale) has its 3-dB point at s = j.
    scale: f64,
}

impl BesselPrototype {
    pub fn new(order: usize) -> Self {
        // a_k = (2n−k)! / (2^(n−k) k! (n−k)!)
        let n = order;
        let fact = |m: usize| (1..=m).fold(1.0f64, |acc, i| acc * i as f64);
        let coeffs: Vec<f64> = (0..=n)
            .map(|k| fact(2 * n - k) / (2f64.powi((n - k) as i32) * fact(k) * fact(n - k)))
            .collect();
        let mut proto = Self { coeffs, scale: 1.0 };
        // |H(jΩ)|² is monotone decreasing; bisect for the half-power point.
        let (mut lo, mut hi) = (1e-3, 10.0 * n as f64 + 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if proto.eval_unscaled(mid).norm_sqr() > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        proto.scale = 0.5 * (lo + hi);
        proto
    }

    fn eval_unscaled(&self, omega: f64) -> Complex64 {
        let s = Complex64::new(0.0, omega);
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * s + c;
        }
        Complex64::new(self.coeffs[0], 0.0) / acc
    }

    /// H(jΩ) at normalized frequency Ω (3-dB at Ω = 1).
    pub fn response(&self, omega_norm: f64) -> Complex64 {
        self.eval_unscaled(omega_norm * self.scale)
    }

    /// Group delay at DC in normalized time units.
    pub fn dc_group_delay(&self) -> f64 {
        self.scale * self.coeffs[1] / self.coeffs[0]
    }

    /// Response with the DC group delay removed.
    pub fn zero_delay_response(&self, omega_norm: f64) -> Complex64 {
        self.response(omega_norm) * Complex64::from_polar(1.0, omega_norm * self.dc_group_delay())
    }
}

/// Bessel–Thomson low-pass on each quadrature, realized by sampling the
/// analog response over the whole record. The filter's DC group delay is
/// removed so the output stays time-aligned with the input.
pub fn bessel_lpf(wave: &ComplexSequence, spec: &FrontendSpec) -> Result<ComplexSequence> {
    spec.validate()?;
    if !(wave.sample_rate > 2.0 * spec.lpf_3db) {
        return Err(SimError::SampleRate {
            sample_rate: wave.sample_rate,
            what: format!("a {} Hz low-pass (needs > 2x)", spec.lpf_3db),
        });
    }
    let proto = BesselPrototype::new(spec.lpf_order);
    let w3 = 2.0 * PI * spec.lpf_3db;
    let out = filter_record_real(&wave.samples, wave.sample_rate, |w| {
        proto.zero_delay_response(w / w3)
    });
    Ok(wave.with_samples(out))
}

fn rail_rms(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (values.map(|v| v * v).sum::<f64>() / n as f64).sqrt()
}

/// Uniform mid-rise quantizer with `2^bits` levels spanning ±`full_scale`.
#[inline]
pub fn quantize_midrise(v: f64, bits: u32, full_scale: f64) -> f64 {
    if full_scale <= 0.0 {
        return 0.0;
    }
    let levels = (1u64 << bits) as f64;
    let step = 2.0 * full_scale / levels;
    let idx = ((v + full_scale) / step).floor().clamp(0.0, levels - 1.0);
    -full_scale + (idx + 0.5) * step
}

/// ADC with explicit per-rail full scales.
pub fn adc_quantize_with_full_scale(
    wave: &ComplexSequence,
    bits: u32,
    full_scale_re: f64,
    full_scale_im: f64,
) -> ComplexSequence {
    let s = wave
        .samples
        .iter()
        .map(|z| {
            Complex64::new(
                quantize_midrise(z.re, bits, full_scale_re),
                quantize_midrise(z.im, bits, full_scale_im),
            )
        })
        .collect();
    wave.with_samples(s)
}

/// ADC whose full scale on each rail is `adc_clip_sigma` times that rail's RMS.
pub fn adc_quantize(wave: &ComplexSequence, spec: &FrontendSpec) -> Result<ComplexSequence> {
    spec.validate()?;
    let (fs_re, fs_im) = adc_full_scale(wave, spec);
    Ok(adc_quantize_with_full_scale(wave, spec.adc_bits, fs_re, fs_im))
}

/// Per-rail full scale used by [`adc_quantize`].
pub fn adc_full_scale(wave: &ComplexSequence, spec: &FrontendSpec) -> (f64, f64) {
    let n = wave.len();
    let re = rail_rms(wave.samples.iter().map(|z| z.re), n);
    let im = rail_rms(wave.samples.iter().map(|z| z.im), n);
    (spec.adc_clip_sigma * re, spec.adc_clip_sigma * im)
}

/// Keeps two samples per symbol: sample 2k of the output is the center of
/// symbol k (input index k·sps + sps/2), sample 2k+1 the following symbol
/// boundary. The record is treated as periodic.
pub fn decimate_to_2sps(wave: &ComplexSequence, symbol_rate: f64) -> Result<ComplexSequence> {
    let ratio_f = wave.sample_rate / (2.0 * symbol_rate);
    let ratio = ratio_f.round();
    if ratio < 1.0 || (ratio_f - ratio).abs() > 1e-9 * ratio_f.max(1.0) {
        return Err(SimError::SampleRate {
            sample_rate: wave.sample_rate,
            what: format!("decimation to 2 samples/symbol at {symbol_rate} Bd"),
        });
    }
    let ratio = ratio as usize;
    let n = wave.len();
    let n_out = n / ratio;
    let offset = ratio; // sps/2
    let samples = (0..n_out)
        .map(|m| wave.samples[(offset + m * ratio) % n])
        .collect();
    ComplexSequence::new(samples, 2.0 * symbol_rate, wave.center_wavelength)
}

/// Processing stages of the link, in mandatory order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    TxPhase,
    CdPropagate,
    OdcCompensate,
    LoadAwgn,
    LoMix,
    BesselLpf,
    AdcQuantize,
    Decimate,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::TxPhase => "tx_phase",
            Stage::CdPropagate => "cd_propagate",
            Stage::OdcCompensate => "odc_compensate",
            Stage::LoadAwgn => "load_awgn",
            Stage::LoMix => "lo_mix",
            Stage::BesselLpf => "bessel_lpf",
            Stage::AdcQuantize => "adc_quantize",
            Stage::Decimate => "decimate_to_2sps",
        }
    }
}

/// A validated stage list. Stages may be omitted but never reordered or
/// repeated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagePlan {
    stages: Vec<Stage>,
}

impl StagePlan {
    pub fn new(stages: Vec<Stage>) -> Result<Self> {
        for w in stages.windows(2) {
            if w[1] <= w[0] {
                return Err(SimError::StageOrder {
                    stage: w[1].name(),
                    previous: w[0].name(),
                });
            }
        }
        if stages.contains(&Stage::OdcCompensate) && !stages.contains(&Stage::CdPropagate) {
            return Err(SimError::StageOrder {
                stage: Stage::OdcCompensate.name(),
                previous: "a link without cd_propagate",
            });
        }
        Ok(Self { stages })
    }

    /// The full chain, with or without optical compensation.
    pub fn standard(optical_compensation: bool) -> Self {
        let mut s = vec![Stage::TxPhase, Stage::CdPropagate];
        if optical_compensation {
            s.push(Stage::OdcCompensate);
        }
        s.extend([
            Stage::LoadAwgn,
            Stage::LoMix,
            Stage::BesselLpf,
            Stage::AdcQuantize,
            Stage::Decimate,
        ]);
        Self { stages: s }
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn contains(&self, s: Stage) -> bool {
        self.stages.contains(&s)
    }
}
