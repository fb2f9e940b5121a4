//! Carrier phase recovery at one sample per symbol, and BER scoring with
//! delay and phase-ambiguity search.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Result, SimError};
use crate::signal::{BerReport, ConstellationSpec, SymbolFrame};

/// One-tap NLMS phase tracker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlmsCpr {
    pub step_size: f64,
    pub training_length: usize,
    pub initial_weight: Complex64,
}

/// Default NLMS training length (symbols).
pub const DEFAULT_NLMS_TRAINING: usize = 500;

impl NlmsCpr {
    pub fn new(step_size: f64) -> Result<Self> {
        let c = Self {
            step_size,
            training_length: DEFAULT_NLMS_TRAINING,
            initial_weight: Complex64::new(0.0, 0.0),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size < 2.0) {
            return Err(SimError::param("nlms step_size", "must lie in (0, 2)"));
        }
        Ok(())
    }
}

/// Block or sliding-window n-th power estimator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockCprSpec {
    pub block_size: usize,
    pub symmetry_n: u32,
    /// Common phase of the constellation's n-th powers.
    pub reference_phase: f64,
}

impl BlockCprSpec {
    pub fn new(block_size: usize, constellation: &ConstellationSpec) -> Self {
        Self {
            block_size,
            symmetry_n: constellation.phase_symmetry_n(),
            reference_phase: constellation.power_reference_phase(),
        }
    }

    fn step(&self) -> f64 {
        2.0 * PI / self.symmetry_n as f64
    }

    /// (1/n)·arg(s·e^{−j·ref}), in (−π/n, π/n].
    fn raw_estimate(&self, power_sum: Complex64) -> f64 {
        (power_sum * Complex64::from_polar(1.0, -self.reference_phase)).arg() / self.symmetry_n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CprTrace {
    pub corrected_symbols: Vec<Complex64>,
    /// Carrier phase estimate per symbol (rad).
    pub phase_estimates: Vec<f64>,
    /// Wraps of the raw estimate bridged by unwrapping.
    pub cycle_slip_count: usize,
    /// NLMS tap weight per symbol, W(k); empty for the block estimators.
    pub weights: Vec<Complex64>,
    /// Zero-magnitude inputs for which the NLMS update was skipped.
    pub skipped_samples: usize,
}

/// One-tap NLMS: y(k) = W(k)·x(k), e = d − y,
/// W(k+1) = W(k) + μ/|x(k)|²·x*(k)·e(k). The desired symbol comes from
/// `training` for the first `training_length` symbols, then from the slicer.
pub fn nlms_cpr(
    symbols: &[Complex64],
    cfg: &NlmsCpr,
    training: &[Complex64],
    constellation: &ConstellationSpec,
) -> Result<CprTrace> {
    if symbols.is_empty() {
        return Err(SimError::EmptyInput("nlms_cpr"));
    }
    cfg.validate()?;
    let mut w = cfg.initial_weight;
    let mut trace = CprTrace {
        corrected_symbols: Vec::with_capacity(symbols.len()),
        phase_estimates: Vec::with_capacity(symbols.len()),
        weights: Vec::with_capacity(symbols.len()),
        ..CprTrace::default()
    };
    for (k, &x) in symbols.iter().enumerate() {
        let y = w * x;
        trace.corrected_symbols.push(y);
        trace.weights.push(w);
        trace.phase_estimates.push(-w.arg());
        let p = x.norm_sqr();
        if p == 0.0 || !p.is_finite() {
            trace.skipped_samples += 1;
            continue;
        }
        let d = if k < cfg.training_length && k < training.len() {
            training[k]
        } else {
            constellation.slice(y)
        };
        let e = d - y;
        w += x.conj() * e * (cfg.step_size / p);
    }
    Ok(trace)
}

/// Tracks consecutive n-th power estimates across the ±π/n wrap.
struct Unwrapper {
    step: f64,
    last: Option<(f64, f64)>,
    slips: usize,
}

impl Unwrapper {
    fn new(step: f64) -> Self {
        Self { step, last: None, slips: 0 }
    }

    /// Shifts `raw` by the multiple of 2π/n closest to the previous
    /// estimate. A wrap is counted when the raw estimates themselves jump by
    /// more than π/n.
    fn push(&mut self, raw: f64) -> f64 {
        let phi = match self.last {
            None => raw,
            Some((prev, prev_raw)) => {
                if (raw - prev_raw).abs() > self.step / 2.0 {
                    self.slips += 1;
                }
                raw + ((prev - raw) / self.step).round() * self.step
            }
        };
        self.last = Some((phi, raw));
        phi
    }
}

/// Block-wise average: one estimate (1/n)·arg(Σ xⁿ) per block of
/// `block_size` symbols, applied to the whole block. A trailing partial
/// block gets its own estimate.
pub fn bwa_cpr(symbols: &[Complex64], spec: &BlockCprSpec) -> Result<CprTrace> {
    if symbols.is_empty() {
        return Err(SimError::EmptyInput("bwa_cpr"));
    }
    if spec.block_size == 0 {
        return Err(SimError::param("block_size", "must be at least 1"));
    }
    let n = spec.symmetry_n as i32;
    let step = spec.step();
    let mut trace = CprTrace {
        corrected_symbols: Vec::with_capacity(symbols.len()),
        phase_estimates: Vec::with_capacity(symbols.len()),
        ..CprTrace::default()
    };
    let mut unwrap = Unwrapper::new(step);
    for block in symbols.chunks(spec.block_size) {
        let s: Complex64 = block.iter().map(|x| x.powi(n)).sum();
        let raw = spec.raw_estimate(s);
        let phi = unwrap.push(raw);
        let rot = Complex64::from_polar(1.0, -phi);
        for &x in block {
            trace.corrected_symbols.push(x * rot);
            trace.phase_estimates.push(phi);
        }
    }
    trace.cycle_slip_count = unwrap.slips;
    Ok(trace)
}

/// Viterbi-Viterbi: sliding window of `block_size` (odd) symbols centered on
/// each symbol; the estimate is applied to the center symbol only. Windows
/// shrink symmetrically at the record edges.
pub fn vv_cpr(symbols: &[Complex64], spec: &BlockCprSpec) -> Result<CprTrace> {
    if symbols.is_empty() {
        return Err(SimError::EmptyInput("vv_cpr"));
    }
    if spec.block_size % 2 == 0 {
        return Err(SimError::param("block_size", "Viterbi-Viterbi window must be odd"));
    }
    let n = spec.symmetry_n as i32;
    let step = spec.step();
    let len = symbols.len();
    let mut prefix = Vec::with_capacity(len + 1);
    prefix.push(Complex64::new(0.0, 0.0));
    let mut acc = Complex64::new(0.0, 0.0);
    for x in symbols {
        acc += x.powi(n);
        prefix.push(acc);
    }
    let half = spec.block_size / 2;
    let mut trace = CprTrace {
        corrected_symbols: Vec::with_capacity(len),
        phase_estimates: Vec::with_capacity(len),
        ..CprTrace::default()
    };
    let mut unwrap = Unwrapper::new(step);
    for (k, &x) in symbols.iter().enumerate() {
        let h = half.min(k).min(len - 1 - k);
        // Direct sum for small windows keeps the prefix-sum rounding out of
        // the degenerate cases.
        let s = if h <= 16 {
            symbols[k - h..=k + h].iter().map(|z| z.powi(n)).sum()
        } else {
            prefix[k + h + 1] - prefix[k - h]
        };
        let raw = spec.raw_estimate(s);
        let phi = unwrap.push(raw);
        trace.corrected_symbols.push(x * Complex64::from_polar(1.0, -phi));
        trace.phase_estimates.push(phi);
    }
    trace.cycle_slip_count = unwrap.slips;
    Ok(trace)
}

/// Counting window and search range for [`align_and_count`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignOptions {
    /// First received symbol counted.
    pub start: usize,
    /// Number of received symbols counted.
    pub count: usize,
    /// Delays −max_delay..=max_delay are searched.
    pub max_delay: usize,
}

/// Scores `received` (one polarization) against `tx_frame` polarization
/// `pol`. Every delay within ±`max_delay` and every rotation by a multiple of
/// 2π/n is tried; the pair with the fewest bit errors is reported.
///
/// Delay d compares received symbol k with transmitted symbol k − d.
pub fn align_and_count(
    received: &[Complex64],
    tx_frame: &SymbolFrame,
    pol: usize,
    opts: AlignOptions,
) -> Result<BerReport> {
    let c = &tx_frame.constellation;
    let bps = c.bits_per_symbol();
    let tx_bits = tx_frame.source_bits[pol].bits();
    let n_tx = tx_bits.len() / bps;
    let tx_labels: Vec<u8> = tx_bits
        .chunks_exact(bps)
        .map(|ch| ch.iter().fold(0u8, |a, &b| (a << 1) | b))
        .collect();
    let md = opts.max_delay;
    // Clamp the window so that every searched delay stays inside both streams.
    let start = opts.start.max(md);
    let end = (opts.start + opts.count)
        .min(received.len())
        .min(n_tx.saturating_sub(md));
    if end <= start {
        return Err(SimError::NoOverlap);
    }
    let rx_labels: Vec<u8> = received[start..end].iter().map(|&z| c.nearest(z) as u8).collect();
    let nrot = c.phase_symmetry_n() as usize;
    let mut rot = Complex64::new(1.0, 0.0);
    let mut perms = Vec::with_capacity(nrot);
    for _ in 0..nrot {
        let p: Vec<u8> = c.points().iter().map(|&pt| c.nearest(pt * rot) as u8).collect();
        perms.push(p);
        rot *= c.symmetry_rotation();
    }
    let mut best: Option<(u64, u32, i64)> = None;
    for d in -(md as i64)..=(md as i64) {
        let tx_slice = &tx_labels[(start as i64 - d) as usize..(end as i64 - d) as usize];
        for (r, perm) in perms.iter().enumerate() {
            let errors: u64 = rx_labels
                .iter()
                .zip(tx_slice)
                .map(|(&a, &b)| (perm[a as usize] ^ b).count_ones() as u64)
                .sum();
            if best.map_or(true, |(e, _, _)| errors < e) {
                best = Some((errors, r as u32, d));
            }
        }
    }
    let (errors, r, d) = best.expect("at least one alignment searched");
    let bits = ((end - start) * bps) as u64;
    Ok(BerReport {
        rotation_applied: r,
        delay_applied: d,
        ..BerReport::new(errors, bits)
    })
}
