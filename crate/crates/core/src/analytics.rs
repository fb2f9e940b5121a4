//! Closed-form phase-noise budget and the derived experiment metrics: OSNR
//! penalty at a target BER, BER floors, and tolerable effective linewidth.

use std::f64::consts::PI;

use crate::error::{Result, SimError};
use crate::rng::TrialRng;
use crate::signal::BerReport;
use crate::sim::{run_trial, DspChainSpec, LinkSpec};

/// EEPN variance πλ²·D·L·Δf_LO / (2c·Ts) in rad².
pub fn eepn_variance(link: &LinkSpec) -> f64 {
    let f = link.fiber();
    PI * f.wavelength * f.wavelength * f.dispersion.abs() * f.length * link.lo_linewidth
        / (2.0 * f.light_speed * link.symbol_period())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseNoiseBudget {
    pub var_tx: f64,
    pub var_lo: f64,
    pub var_eepn: f64,
    pub correlation_rho: f64,
    pub var_total: f64,
    /// Effective linewidth (Hz).
    pub effective_linewidth: f64,
}

/// Per-symbol phase variances and the effective linewidth of `link`.
/// `rho` correlates the EEPN with the intrinsic LO phase noise.
pub fn phase_noise_budget(link: &LinkSpec, rho: f64) -> Result<PhaseNoiseBudget> {
    if !(rho.abs() <= 1.0) {
        return Err(SimError::param("rho", format!("|rho| must be <= 1, got {rho}")));
    }
    let ts = link.symbol_period();
    let var_tx = 2.0 * PI * link.tx_linewidth * ts;
    let var_lo = 2.0 * PI * link.lo_linewidth * ts;
    let var_eepn = eepn_variance(link);
    let var_total = var_tx + var_lo + var_eepn + 2.0 * rho * (var_lo * var_eepn).sqrt();
    Ok(PhaseNoiseBudget {
        var_tx,
        var_lo,
        var_eepn,
        correlation_rho: rho,
        var_total,
        effective_linewidth: var_total / (2.0 * PI * ts),
    })
}

/// Measured BER against OSNR.
#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    /// (OSNR dB, BER), OSNR strictly increasing.
    pub points: Vec<(f64, f64)>,
    pub label: String,
}

impl BerCurve {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(SimError::EmptyInput("ber curve"));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(SimError::param("ber curve", "OSNR values must be strictly increasing"));
            }
        }
        if let Some(&(o, b)) = points.iter().find(|(_, b)| !(*b > 0.0 && *b <= 1.0)) {
            return Err(SimError::param("ber curve", format!("BER {b} at {o} dB is outside (0, 1]")));
        }
        Ok(Self {
            points,
            label: label.into(),
        })
    }

    /// Builds a curve from pooled Monte-Carlo counts. Zero-error points are
    /// placed at the rule-of-three bound 3/bits.
    pub fn from_reports(label: impl Into<String>, points: &[(f64, BerReport)]) -> Result<Self> {
        let pts = points
            .iter()
            .map(|(o, r)| (*o, if r.bit_errors == 0 { rule_of_three(r.bits_compared) } else { r.ber }))
            .collect();
        Self::new(label, pts)
    }

    /// OSNR at which the curve first falls to `target`, interpolated
    /// linearly in (OSNR dB, log10 BER). `None` if it never gets there.
    pub fn osnr_at(&self, target: f64) -> Result<Option<f64>> {
        if !(target > 0.0 && target < 1.0) {
            return Err(SimError::param("target_ber", "must lie in (0, 1)"));
        }
        if self.points[0].1 <= target {
            if self.points[0].1 == target {
                return Ok(Some(self.points[0].0));
            }
            return Err(SimError::param(
                "ber curve",
                format!("'{}' starts below the target BER; extend the OSNR range downward", self.label),
            ));
        }
        let lt = target.log10();
        for w in self.points.windows(2) {
            let ((o0, b0), (o1, b1)) = (w[0], w[1]);
            if b0 > target && b1 <= target {
                let (l0, l1) = (b0.log10(), b1.log10());
                return Ok(Some(o0 + (lt - l0) / (l1 - l0) * (o1 - o0)));
            }
        }
        Ok(None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    Db(f64),
    /// The curve never reaches the target BER.
    Unbounded,
}

impl Penalty {
    pub fn db(self) -> Option<f64> {
        match self {
            Penalty::Db(v) => Some(v),
            Penalty::Unbounded => None,
        }
    }
}

/// OSNR penalty of `curve` relative to `reference` at `target_ber`.
pub fn osnr_penalty_at_ber(curve: &BerCurve, reference: &BerCurve, target_ber: f64) -> Result<Penalty> {
    let r = reference.osnr_at(target_ber)?.ok_or_else(|| {
        SimError::param("reference curve", format!("'{}' never reaches the target BER", reference.label))
    })?;
    Ok(match curve.osnr_at(target_ber)? {
        Some(o) => Penalty::Db(o - r),
        None => Penalty::Unbounded,
    })
}

/// Upper bound 3/n for an observation of zero errors in n bits.
pub fn rule_of_three(bits: u64) -> f64 {
    3.0 / bits as f64
}

/// Aggregated BER with a 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorEstimate {
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub lower: f64,
    pub upper: f64,
}

impl FloorEstimate {
    /// Wilson score interval; with no errors the upper end is the
    /// rule-of-three bound.
    pub fn from_counts(bit_errors: u64, bits: u64) -> Self {
        let n = bits as f64;
        if bits == 0 {
            return Self {
                bit_errors,
                bits,
                ber: 0.0,
                lower: 0.0,
                upper: 1.0,
            };
        }
        let p = bit_errors as f64 / n;
        if bit_errors == 0 {
            return Self {
                bit_errors,
                bits,
                ber: 0.0,
                lower: 0.0,
                upper: rule_of_three(bits),
            };
        }
        let z: f64 = 1.959_963_984_540_054;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            bit_errors,
            bits,
            ber: p,
            lower: (center - half).max(0.0),
            upper: (center + half).min(1.0),
        }
    }

    pub fn pooled<'a>(reports: impl IntoIterator<Item = &'a BerReport>) -> Self {
        let r = BerReport::pooled(reports);
        Self::from_counts(r.bit_errors, r.bits_compared)
    }

    /// Value used when plotting or comparing: the BER, or the upper bound
    /// when no errors were seen.
    pub fn plotted(&self) -> f64 {
        if self.bit_errors == 0 {
            self.upper
        } else {
            self.ber
        }
    }
}

/// Floor OSNR used by the floor experiments (dB).
pub const FLOOR_OSNR_DB: f64 = 40.0;

/// Monte-Carlo BER of `link` (at `osnr_db`) over `trials` trials.
pub fn ber_floor(
    link: &LinkSpec,
    dsp: &DspChainSpec,
    osnr_db: f64,
    trials: usize,
    master_seed: u64,
) -> Result<FloorEstimate> {
    if trials == 0 {
        return Err(SimError::param("trials", "must be at least 1"));
    }
    let l = LinkSpec { osnr_db, ..*link };
    let mut reports = Vec::with_capacity(trials);
    for t in 0..trials {
        let r = run_trial(&l, dsp, &TrialRng::from_indices(master_seed, 0, t as u64))?;
        reports.push(r.pooled);
    }
    Ok(FloorEstimate::pooled(&reports))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// Effective linewidth (Hz) at which the floor meets the target.
    Linewidth(f64),
    /// The target is not met anywhere inside the search bounds.
    OutOfRange,
}

/// Bisection over a laser-linewidth scale factor `s` within
/// [`lo`, `hi`]: `floor_at(s)` is the BER floor, `linewidth_at(s)` the
/// resulting effective linewidth. Bisection is geometric and stops when
/// hi/lo ≤ 1.05.
pub fn bisect_tolerance(
    target_floor: f64,
    lo: f64,
    hi: f64,
    mut floor_at: impl FnMut(f64) -> Result<f64>,
    linewidth_at: impl Fn(f64) -> f64,
) -> Result<Tolerance> {
    if !(target_floor > 0.0 && target_floor < 0.5) {
        return Err(SimError::param("target_floor", "must lie in (0, 0.5)"));
    }
    if !(lo > 0.0 && hi > lo) {
        return Err(SimError::param("search bounds", "need 0 < lo < hi"));
    }
    let (mut a, mut b) = (lo, hi);
    if floor_at(a)? > target_floor || floor_at(b)? <= target_floor {
        return Ok(Tolerance::OutOfRange);
    }
    while b / a > 1.05 {
        let m = (a * b).sqrt();
        if floor_at(m)? <= target_floor {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(Tolerance::Linewidth(linewidth_at((a * b).sqrt())))
}

/// Largest effective linewidth whose measured BER floor stays at or below
/// `target_floor`. The link's laser linewidths are scaled together at fixed
/// length; the search covers scale factors in [`scale_lo`, `scale_hi`].
#[allow(clippy::too_many_arguments)]
pub fn max_tolerable_effective_linewidth(
    link: &LinkSpec,
    dsp: &DspChainSpec,
    target_floor: f64,
    scale_lo: f64,
    scale_hi: f64,
    trials: usize,
    master_seed: u64,
) -> Result<Tolerance> {
    if link.tx_linewidth + link.lo_linewidth == 0.0 {
        return Err(SimError::param("linewidth", "at least one laser needs a nonzero linewidth to scale"));
    }
    let scaled = |s: f64| LinkSpec {
        tx_linewidth: link.tx_linewidth * s,
        lo_linewidth: link.lo_linewidth * s,
        ..*link
    };
    bisect_tolerance(
        target_floor,
        scale_lo,
        scale_hi,
        |s| Ok(ber_floor(&scaled(s), dsp, FLOOR_OSNR_DB, trials, master_seed)?.plotted()),
        |s| {
            phase_noise_budget(&scaled(s), 0.0)
                .map(|b| b.effective_linewidth)
                .unwrap_or(f64::NAN)
        },
    )
}
