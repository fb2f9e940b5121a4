//! Shared signal types: bit streams, constellations, sampled waveforms and
//! bit-error accounting.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Result, SimError};

/// Period of the PRBS15 maximal-length sequence.
pub const PRBS15_PERIOD: usize = (1 << 15) - 1;

/// Where a bit stream came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitOrigin {
    Prbs15 { seed: u16 },
    External,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitStream {
    bits: Vec<u8>,
    origin: BitOrigin,
}

impl BitStream {
    pub fn new(bits: Vec<u8>, origin: BitOrigin) -> Result<Self> {
        if bits.is_empty() {
            return Err(SimError::EmptyInput("BitStream"));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(SimError::param("bits", "values must be 0 or 1"));
        }
        Ok(Self { bits, origin })
    }

    pub fn external(bits: Vec<u8>) -> Result<Self> {
        Self::new(bits, BitOrigin::External)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn origin(&self) -> BitOrigin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// LFSR output bit for state `state` of the x^15 + x^14 + 1 register.
#[inline]
fn prbs15_feedback(state: u16) -> u8 {
    (((state >> 14) ^ (state >> 13)) & 1) as u8
}

/// Generates `length` bits of the ITU-T PRBS15 sequence (x^15 + x^14 + 1).
///
/// The first output bit is the feedback bit of `seed`; the register then
/// shifts that bit in on the right.
pub fn prbs15_generate(seed: u16, length: usize) -> Result<BitStream> {
    let mut state = seed & 0x7fff;
    if state == 0 {
        return Err(SimError::ZeroSeed(seed));
    }
    if length == 0 {
        return Err(SimError::param("length", "must be at least 1"));
    }
    let mut bits = Vec::with_capacity(length);
    for _ in 0..length {
        let b = prbs15_feedback(state);
        bits.push(b);
        state = ((state << 1) | b as u16) & 0x7fff;
    }
    Ok(BitStream {
        bits,
        origin: BitOrigin::Prbs15 { seed: seed & 0x7fff },
    })
}

/// A unit-energy, Gray-labelled constellation with n-fold rotational symmetry.
///
/// `points[label]` is the point for the bit tuple whose MSB-first integer
/// value is `label`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationSpec {
    modulation_order: usize,
    phase_symmetry_n: u32,
    points: Vec<Complex64>,
}

impl ConstellationSpec {
    /// QPSK with 00→(+1+j)/√2, 01→(−1+j)/√2, 11→(−1−j)/√2, 10→(+1−j)/√2.
    pub fn qpsk() -> Self {
        let a = FRAC_1_SQRT_2;
        Self {
            modulation_order: 4,
            phase_symmetry_n: 4,
            points: vec![
                Complex64::new(a, a),
                Complex64::new(-a, a),
                Complex64::new(a, -a),
                Complex64::new(-a, -a),
            ],
        }
    }

    pub fn modulation_order(&self) -> usize {
        self.modulation_order
    }

    pub fn phase_symmetry_n(&self) -> u32 {
        self.phase_symmetry_n
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.modulation_order.trailing_zeros() as usize
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Phase of the n-th power shared by every point (π for the ±45° QPSK
    /// grid). Phase estimators subtract it so that an unrotated
    /// constellation estimates to zero.
    pub fn power_reference_phase(&self) -> f64 {
        let n = self.phase_symmetry_n as i32;
        let sum: Complex64 = self.points.iter().map(|p| p.powi(n)).sum();
        sum.arg()
    }

    /// The rotation by one step of the symmetry group, e^{j2π/n}.
    pub fn symmetry_rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI / self.phase_symmetry_n as f64)
    }

    /// Index of the Euclidean-nearest point; ties go to the smaller index.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Hard decision onto the constellation.
    #[inline]
    pub fn slice(&self, z: Complex64) -> Complex64 {
        self.points[self.nearest(z)]
    }
}

/// Maps bits onto constellation points, MSB first within each symbol.
pub fn map_symbols(bits: &BitStream, c: &ConstellationSpec) -> Result<Vec<Complex64>> {
    let k = c.bits_per_symbol();
    if bits.len() % k != 0 {
        return Err(SimError::BitCount {
            bits: bits.len(),
            bits_per_symbol: k,
        });
    }
    Ok(bits
        .bits()
        .chunks_exact(k)
        .map(|chunk| {
            let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            c.point(label)
        })
        .collect())
}

/// Nearest-neighbour slicer returning the decided bits and hard symbols.
pub fn decide_symbols(rx: &[Complex64], c: &ConstellationSpec) -> (BitStream, Vec<Complex64>) {
    let k = c.bits_per_symbol();
    let mut bits = Vec::with_capacity(rx.len() * k);
    let mut hard = Vec::with_capacity(rx.len());
    for &z in rx {
        let label = c.nearest(z);
        hard.push(c.point(label));
        for shift in (0..k).rev() {
            bits.push(((label >> shift) & 1) as u8);
        }
    }
    (
        BitStream {
            bits,
            origin: BitOrigin::External,
        },
        hard,
    )
}

/// Outcome of comparing one received bit stream against the reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerReport {
    pub bit_errors: u64,
    pub bits_compared: u64,
    pub ber: f64,
    /// Global rotation applied, as a multiple of 2π/n.
    pub rotation_applied: u32,
    /// Symbol delay of the received stream relative to the reference.
    pub delay_applied: i64,
}

impl BerReport {
    pub fn new(bit_errors: u64, bits_compared: u64) -> Self {
        let ber = if bits_compared == 0 {
            0.0
        } else {
            bit_errors as f64 / bits_compared as f64
        };
        Self {
            bit_errors,
            bits_compared,
            ber,
            rotation_applied: 0,
            delay_applied: 0,
        }
    }

    /// Pools the counts of several reports. Alignment metadata is taken from
    /// the first report.
    pub fn pooled<'a>(reports: impl IntoIterator<Item = &'a BerReport>) -> BerReport {
        let mut iter = reports.into_iter();
        let Some(first) = iter.next() else {
            return BerReport::new(0, 0);
        };
        let (mut e, mut n) = (first.bit_errors, first.bits_compared);
        for r in iter {
            e += r.bit_errors;
            n += r.bits_compared;
        }
        BerReport {
            rotation_applied: first.rotation_applied,
            delay_applied: first.delay_applied,
            ..BerReport::new(e, n)
        }
    }
}

/// Hamming distance between two equal-length bit streams.
pub fn count_errors(tx: &BitStream, rx: &BitStream) -> Result<BerReport> {
    if tx.len() != rx.len() {
        return Err(SimError::LengthMismatch {
            what: "count_errors",
            expected: tx.len(),
            got: rx.len(),
        });
    }
    let errors = tx
        .bits()
        .iter()
        .zip(rx.bits())
        .filter(|(a, b)| a != b)
        .count() as u64;
    Ok(BerReport::new(errors, tx.len() as u64))
}

/// Per-polarization symbol streams plus the bits they carry.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub pol_x: Vec<Complex64>,
    pub pol_y: Vec<Complex64>,
    pub constellation: ConstellationSpec,
    pub source_bits: [BitStream; 2],
    pub symbol_rate: f64,
}

impl SymbolFrame {
    /// Maps two bit streams onto a dual-polarization frame.
    pub fn from_bits(
        bits_x: BitStream,
        bits_y: BitStream,
        constellation: ConstellationSpec,
        symbol_rate: f64,
    ) -> Result<Self> {
        if !(symbol_rate > 0.0) {
            return Err(SimError::param("symbol_rate", "must be positive"));
        }
        let pol_x = map_symbols(&bits_x, &constellation)?;
        let pol_y = map_symbols(&bits_y, &constellation)?;
        if pol_x.len() != pol_y.len() {
            return Err(SimError::LengthMismatch {
                what: "SymbolFrame polarizations",
                expected: pol_x.len(),
                got: pol_y.len(),
            });
        }
        Ok(Self {
            pol_x,
            pol_y,
            constellation,
            source_bits: [bits_x, bits_y],
            symbol_rate,
        })
    }

    /// DP-QPSK frame of `n_symbols` per polarization from PRBS15 streams
    /// seeded with `seed` and `seed + 1`.
    pub fn prbs_qpsk(seed: u16, n_symbols: usize, symbol_rate: f64) -> Result<Self> {
        let c = ConstellationSpec::qpsk();
        let nbits = n_symbols * c.bits_per_symbol();
        let sx = prbs_seed(seed as u64);
        let sy = prbs_seed(seed as u64 + 1);
        Self::from_bits(
            prbs15_generate(sx, nbits)?,
            prbs15_generate(sy, nbits)?,
            c,
            symbol_rate,
        )
    }

    pub fn n_symbols(&self) -> usize {
        self.pol_x.len()
    }

    pub fn symbols(&self, pol: usize) -> &[Complex64] {
        if pol == 0 {
            &self.pol_x
        } else {
            &self.pol_y
        }
    }

    pub fn symbol_period(&self) -> f64 {
        1.0 / self.symbol_rate
    }
}

/// Folds an arbitrary integer to a valid nonzero 15-bit PRBS state.
pub fn prbs_seed(x: u64) -> u16 {
    let s = (x % PRBS15_PERIOD as u64) as u16 + 1;
    s & 0x7fff
}

/// A uniformly sampled complex baseband waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    pub center_wavelength: f64,
}

impl ComplexSequence {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, center_wavelength: f64) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(SimError::param("sample_rate", "must be positive and finite"));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SimError::param("samples", "non-finite value"));
        }
        Ok(Self {
            samples,
            sample_rate,
            center_wavelength,
        })
    }

    /// Replaces the samples, keeping the rate and wavelength.
    pub(crate) fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        Self {
            samples,
            sample_rate: self.sample_rate,
            center_wavelength: self.center_wavelength,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.energy() / self.samples.len() as f64
        }
    }
}
