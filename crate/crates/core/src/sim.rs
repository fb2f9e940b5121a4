//! One Monte-Carlo trial of the full link: transmitter, fiber, receiver
//! front-end, dispersion equalizer, phase recovery and BER scoring.
//!
//! The channel part is split from the DSP part so that one received record
//! can be scored under several receiver configurations.

use num_complex::Complex64;

use crate::channel::{
    adc_quantize, bessel_lpf, cd_propagate, decimate_to_2sps, lo_mix, load_awgn, odc_compensate,
    FiberSpec, FrontendSpec, OdcMode, Stage, StagePlan, LIGHT_SPEED,
};
use crate::cpr::{align_and_count, bwa_cpr, nlms_cpr, vv_cpr, AlignOptions, BlockCprSpec, NlmsCpr, DEFAULT_NLMS_TRAINING};
use crate::edc::{
    fde_equalize, fde_plan, lms_equalize, tde_build, tde_equalize, LmsEqualizer, DEFAULT_LMS_STEP,
    DEFAULT_LMS_TRAINING,
};
use crate::error::{Result, SimError};
use crate::rng::{Stream, TrialRng};
use crate::signal::{prbs_seed, BerReport, ComplexSequence, SymbolFrame};
use crate::transmitter::{apply_phase, phase_walk, synthesize_waveform, LaserSpec, DEFAULT_WAVELENGTH};

/// Default number of counted bits per trial, both polarizations together.
pub const DEFAULT_COUNTED_BITS: usize = 1 << 18;
/// Symbol delays searched on each side when scoring.
pub const ALIGN_DELAY: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    pub symbol_rate: f64,
    /// Carrier wavelength (m).
    pub wavelength: f64,
    /// Dispersion coefficient (s/m²).
    pub dispersion: f64,
    /// Fiber length (m); zero is back-to-back.
    pub length: f64,
    pub tx_linewidth: f64,
    pub lo_linewidth: f64,
    /// `f64::INFINITY` disables noise loading.
    pub osnr_db: f64,
    /// Analog simulation rate in samples per symbol.
    pub samples_per_symbol: usize,
    /// Low-pass and ADC settings; its OSNR field is ignored in favor of
    /// `osnr_db`.
    pub frontend: FrontendSpec,
}

impl Default for LinkSpec {
    fn default() -> Self {
        let f = FiberSpec::ssmf(0.0);
        Self {
            symbol_rate: 28e9,
            wavelength: DEFAULT_WAVELENGTH,
            dispersion: f.dispersion,
            length: 0.0,
            tx_linewidth: 0.0,
            lo_linewidth: 0.0,
            osnr_db: f64::INFINITY,
            samples_per_symbol: 4,
            frontend: FrontendSpec::default(),
        }
    }
}

impl LinkSpec {
    pub fn fiber(&self) -> FiberSpec {
        FiberSpec {
            dispersion: self.dispersion,
            length: self.length,
            wavelength: self.wavelength,
            light_speed: LIGHT_SPEED,
        }
    }

    pub fn frontend(&self) -> FrontendSpec {
        FrontendSpec {
            osnr_db: self.osnr_db,
            ..self.frontend
        }
    }

    pub fn symbol_period(&self) -> f64 {
        1.0 / self.symbol_rate
    }

    /// DSP sampling period (two samples per symbol).
    pub fn dsp_period(&self) -> f64 {
        0.5 / self.symbol_rate
    }

    pub fn tx_laser(&self) -> LaserSpec {
        LaserSpec {
            linewidth: self.tx_linewidth,
            center_wavelength: self.wavelength,
        }
    }

    pub fn lo_laser(&self) -> LaserSpec {
        LaserSpec {
            linewidth: self.lo_linewidth,
            center_wavelength: self.wavelength,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.symbol_rate > 0.0) {
            return Err(SimError::param("symbol_rate", "must be positive"));
        }
        if self.samples_per_symbol < 2 || self.samples_per_symbol % 2 != 0 {
            return Err(SimError::param("samples_per_symbol", "must be even and >= 2"));
        }
        if self.osnr_db.is_nan() {
            return Err(SimError::param("osnr_db", "must be a number"));
        }
        self.fiber().validate()?;
        self.tx_laser().validate()?;
        self.lo_laser().validate()?;
        self.frontend.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Equalizer {
    Tde,
    Fde,
    Lms,
    /// Optical compensation in the link, no electronic equalizer.
    Odc(OdcMode),
    None,
}

impl Equalizer {
    pub fn name(&self) -> &'static str {
        match self {
            Equalizer::Tde => "tde",
            Equalizer::Fde => "fde",
            Equalizer::Lms => "lms",
            Equalizer::Odc(OdcMode::Dcf) => "dcf",
            Equalizer::Odc(OdcMode::Fbg) => "fbg",
            Equalizer::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.trim().to_ascii_lowercase().as_str() {
            "tde" => Equalizer::Tde,
            "fde" => Equalizer::Fde,
            "lms" => Equalizer::Lms,
            "dcf" | "odc" => Equalizer::Odc(OdcMode::Dcf),
            "fbg" => Equalizer::Odc(OdcMode::Fbg),
            "none" => Equalizer::None,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CprKind {
    Nlms { step_size: f64 },
    Bwa { block_size: usize },
    Vv { block_size: usize },
    None,
}

impl CprKind {
    pub fn name(&self) -> &'static str {
        match self {
            CprKind::Nlms { .. } => "nlms",
            CprKind::Bwa { .. } => "bwa",
            CprKind::Vv { .. } => "vv",
            CprKind::None => "none",
        }
    }

    /// Builds a CPR from its name plus the step size and block size that
    /// apply to it.
    pub fn parse(s: &str, step_size: f64, block_size: usize) -> Option<Self> {
        Some(match s.trim().to_ascii_lowercase().as_str() {
            "nlms" => CprKind::Nlms { step_size },
            "bwa" => CprKind::Bwa { block_size },
            "vv" => CprKind::Vv { block_size },
            "none" => CprKind::None,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DspChainSpec {
    pub equalizer: Equalizer,
    pub cpr: CprKind,
    /// LMS tap count; `None` uses the TDE tap count of the link.
    pub lms_taps: Option<usize>,
    pub lms_step: f64,
    pub lms_training: usize,
    pub nlms_training: usize,
    pub nlms_initial_weight: Complex64,
    /// Bits scored per trial, both polarizations together.
    pub counted_bits: usize,
}

impl Default for DspChainSpec {
    fn default() -> Self {
        Self {
            equalizer: Equalizer::Fde,
            cpr: CprKind::Nlms { step_size: 0.1 },
            lms_taps: None,
            lms_step: DEFAULT_LMS_STEP,
            lms_training: DEFAULT_LMS_TRAINING,
            nlms_training: DEFAULT_NLMS_TRAINING,
            nlms_initial_weight: Complex64::new(0.0, 0.0),
            counted_bits: DEFAULT_COUNTED_BITS,
        }
    }
}

impl DspChainSpec {
    pub fn new(equalizer: Equalizer, cpr: CprKind) -> Self {
        Self {
            equalizer,
            cpr,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.cpr {
            CprKind::Nlms { step_size } => NlmsCpr {
                step_size,
                training_length: self.nlms_training,
                initial_weight: self.nlms_initial_weight,
            }
            .validate()?,
            CprKind::Bwa { block_size } if block_size == 0 => {
                return Err(SimError::param("block_size", "must be at least 1"))
            }
            CprKind::Vv { block_size } if block_size % 2 == 0 => {
                return Err(SimError::param("block_size", "Viterbi-Viterbi window must be odd"))
            }
            _ => {}
        }
        if self.counted_bits < 4 || self.counted_bits % 4 != 0 {
            return Err(SimError::param("counted_bits", "must be a positive multiple of 4"));
        }
        if let Some(n) = self.lms_taps {
            if n % 2 == 0 {
                return Err(SimError::param("lms_taps", "tap count must be odd"));
            }
        }
        if self.equalizer == Equalizer::Lms && !(self.lms_step > 0.0) {
            return Err(SimError::param("lms_step", "must be positive"));
        }
        Ok(())
    }

    /// Counted symbols per polarization.
    pub fn counted_symbols(&self) -> usize {
        self.counted_bits / 4
    }

    fn lms_tap_count(&self, link: &LinkSpec) -> Result<usize> {
        match self.lms_taps {
            Some(n) => Ok(n),
            None => crate::edc::tde_tap_count(&link.fiber(), link.dsp_period()),
        }
    }

    /// Symbols excluded at the head and tail of the record: equalizer edges,
    /// training, and the alignment search range.
    pub fn discards(&self, link: &LinkSpec) -> Result<(usize, usize)> {
        let fiber = link.fiber();
        let t = link.dsp_period();
        let edge = match self.equalizer {
            Equalizer::Tde => crate::edc::tde_tap_count(&fiber, t)? / 2,
            Equalizer::Fde => fde_plan(&fiber, t)?.overlap / 2,
            Equalizer::Lms => self.lms_tap_count(link)? / 2,
            _ => 0,
        };
        let lms_training = if self.equalizer == Equalizer::Lms {
            self.lms_training
        } else {
            0
        };
        let cpr_training = match self.cpr {
            CprKind::Nlms { .. } => self.nlms_training,
            CprKind::Bwa { block_size } | CprKind::Vv { block_size } => block_size,
            CprKind::None => 0,
        };
        let head = edge + lms_training.max(cpr_training) + ALIGN_DELAY;
        let tail = edge + ALIGN_DELAY + match self.cpr {
            CprKind::Bwa { block_size } | CprKind::Vv { block_size } => block_size,
            _ => 0,
        };
        Ok((head, tail))
    }

    /// Record length (symbols per polarization) needed for one trial.
    pub fn record_symbols(&self, link: &LinkSpec) -> Result<usize> {
        let (h, t) = self.discards(link)?;
        // Round up so the FFT lengths stay smooth.
        Ok((self.counted_symbols() + h + t).div_ceil(1024) * 1024)
    }
}

/// Received record at two samples per symbol, before any DSP.
#[derive(Debug, Clone, PartialEq)]
pub struct Received {
    pub frame: SymbolFrame,
    pub pols: [ComplexSequence; 2],
}

/// Runs the optical link and the receiver front-end for one trial.
pub fn simulate_link(
    link: &LinkSpec,
    plan: &StagePlan,
    odc_mode: OdcMode,
    n_symbols: usize,
    rng: &TrialRng,
) -> Result<Received> {
    link.validate()?;
    let frame = SymbolFrame::prbs_qpsk(prbs_seed(rng.key()), n_symbols, link.symbol_rate)?;
    let sps = link.samples_per_symbol;
    let [mut x, mut y] = synthesize_waveform(&frame, sps, link.wavelength)?;
    let analog_period = x.sample_period();
    let n = x.len();
    let fiber = link.fiber();
    let fe = link.frontend();
    let mut two_sps = None;
    for &stage in plan.stages() {
        match stage {
            Stage::TxPhase => {
                let walk = phase_walk(&link.tx_laser(), n, analog_period, &mut rng.stream(Stream::TxLaser))?;
                x = apply_phase(&x, &walk)?;
                y = apply_phase(&y, &walk)?;
            }
            Stage::CdPropagate => {
                x = cd_propagate(&x, &fiber)?;
                y = cd_propagate(&y, &fiber)?;
            }
            Stage::OdcCompensate => {
                x = odc_compensate(&x, &fiber, odc_mode)?;
                y = odc_compensate(&y, &fiber, odc_mode)?;
            }
            Stage::LoadAwgn => {
                (x, y) = load_awgn(&x, &y, &fe, &mut rng.stream(Stream::NoiseX))?;
            }
            Stage::LoMix => {
                let walk = phase_walk(&link.lo_laser(), n, analog_period, &mut rng.stream(Stream::LoLaser))?;
                x = lo_mix(&x, &walk)?;
                y = lo_mix(&y, &walk)?;
            }
            Stage::BesselLpf => {
                x = bessel_lpf(&x, &fe)?;
                y = bessel_lpf(&y, &fe)?;
            }
            Stage::AdcQuantize => {
                x = adc_quantize(&x, &fe)?;
                y = adc_quantize(&y, &fe)?;
            }
            Stage::Decimate => {
                two_sps = Some([
                    decimate_to_2sps(&x, link.symbol_rate)?,
                    decimate_to_2sps(&y, link.symbol_rate)?,
                ]);
            }
        }
    }
    let pols = match two_sps {
        Some(p) => p,
        None => [
            decimate_to_2sps(&x, link.symbol_rate)?,
            decimate_to_2sps(&y, link.symbol_rate)?,
        ],
    };
    Ok(Received { frame, pols })
}

/// Stage plan and optical compensator matching the equalizer choice.
pub fn stage_plan_for(dsp: &DspChainSpec) -> (StagePlan, OdcMode) {
    match dsp.equalizer {
        Equalizer::Odc(m) => (StagePlan::standard(true), m),
        _ => (StagePlan::standard(false), OdcMode::Dcf),
    }
}

/// Equalizer output at one sample per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Equalized {
    pub symbols: [Vec<Complex64>; 2],
    pub lms_diverged: bool,
    /// Converged LMS taps per polarization.
    pub lms_taps: Option<[Vec<Complex64>; 2]>,
}

fn symbol_centers(w: &ComplexSequence) -> Vec<Complex64> {
    w.samples.iter().step_by(2).copied().collect()
}

pub fn equalize(rx: &Received, link: &LinkSpec, dsp: &DspChainSpec) -> Result<Equalized> {
    dsp.validate()?;
    let fiber = link.fiber();
    let t = link.dsp_period();
    let mut out = Equalized {
        symbols: [Vec::new(), Vec::new()],
        lms_diverged: false,
        lms_taps: None,
    };
    match dsp.equalizer {
        Equalizer::Tde => {
            let f = tde_build(&fiber, t)?;
            for p in 0..2 {
                out.symbols[p] = symbol_centers(&tde_equalize(&rx.pols[p], &f)?);
            }
        }
        Equalizer::Fde => {
            let plan = fde_plan(&fiber, t)?;
            for p in 0..2 {
                out.symbols[p] = symbol_centers(&fde_equalize(&rx.pols[p], &plan)?);
            }
        }
        Equalizer::Lms => {
            let n_taps = dsp.lms_tap_count(link)?;
            let mut taps: [Vec<Complex64>; 2] = [Vec::new(), Vec::new()];
            for p in 0..2 {
                let mut eq = LmsEqualizer::new(n_taps, dsp.lms_step, dsp.lms_training)?;
                let o = lms_equalize(&rx.pols[p], &mut eq, rx.frame.symbols(p), &rx.frame.constellation)?;
                out.lms_diverged |= o.diverged;
                out.symbols[p] = o.symbols;
                taps[p] = eq.taps;
            }
            out.lms_taps = Some(taps);
        }
        Equalizer::Odc(_) | Equalizer::None => {
            for p in 0..2 {
                out.symbols[p] = symbol_centers(&rx.pols[p]);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub reports: [BerReport; 2],
    pub pooled: BerReport,
    pub lms_diverged: bool,
    pub lms_taps: Option<[Vec<Complex64>; 2]>,
    /// NLMS tap weight per symbol, X polarization.
    pub nlms_weights: Option<Vec<Complex64>>,
    pub cycle_slips: usize,
}

/// Phase recovery and BER scoring of an equalized record.
pub fn recover_and_count(
    eq: &Equalized,
    frame: &SymbolFrame,
    link: &LinkSpec,
    dsp: &DspChainSpec,
) -> Result<TrialResult> {
    dsp.validate()?;
    let (head, _) = dsp.discards(link)?;
    let c = &frame.constellation;
    let mut reports = [BerReport::new(0, 0); 2];
    let mut nlms_weights = None;
    let mut slips = 0;
    for p in 0..2 {
        let syms = &eq.symbols[p];
        let corrected = match dsp.cpr {
            CprKind::Nlms { step_size } => {
                let cfg = NlmsCpr {
                    step_size,
                    training_length: dsp.nlms_training,
                    initial_weight: dsp.nlms_initial_weight,
                };
                let t = nlms_cpr(syms, &cfg, frame.symbols(p), c)?;
                if p == 0 {
                    nlms_weights = Some(t.weights);
                }
                t.corrected_symbols
            }
            CprKind::Bwa { block_size } => {
                let t = bwa_cpr(syms, &BlockCprSpec::new(block_size, c))?;
                slips += t.cycle_slip_count;
                t.corrected_symbols
            }
            CprKind::Vv { block_size } => {
                let t = vv_cpr(syms, &BlockCprSpec::new(block_size, c))?;
                slips += t.cycle_slip_count;
                t.corrected_symbols
            }
            CprKind::None => syms.clone(),
        };
        let opts = AlignOptions {
            start: head,
            count: dsp.counted_symbols(),
            max_delay: ALIGN_DELAY,
        };
        reports[p] = align_and_count(&corrected, frame, p, opts)?;
    }
    Ok(TrialResult {
        pooled: BerReport::pooled(&reports),
        reports,
        lms_diverged: eq.lms_diverged,
        lms_taps: eq.lms_taps.clone(),
        nlms_weights,
        cycle_slips: slips,
    })
}

/// One complete trial.
pub fn run_trial(link: &LinkSpec, dsp: &DspChainSpec, rng: &TrialRng) -> Result<TrialResult> {
    dsp.validate()?;
    let n = dsp.record_symbols(link)?;
    let (plan, mode) = stage_plan_for(dsp);
    let rx = simulate_link(link, &plan, mode, n, rng)?;
    let eq = equalize(&rx, link, dsp)?;
    recover_and_count(&eq, &rx.frame, link, dsp)
}
