//! Whole-record frequency-domain filtering helpers.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Angular frequency of FFT bin `k` of an `n`-point transform at
/// `sample_rate`, mapped to [−π·fs, π·fs).
#[inline]
pub fn bin_omega(k: usize, n: usize, sample_rate: f64) -> f64 {
    let signed = if k >= n.div_ceil(2) {
        k as f64 - n as f64
    } else {
        k as f64
    };
    2.0 * PI * signed * sample_rate / n as f64
}

/// Multiplies the spectrum of `samples` (one transform over the full record)
/// by `response(ω)`.
pub fn filter_record(
    samples: &[Complex64],
    sample_rate: f64,
    response: impl Fn(f64) -> Complex64,
) -> Vec<Complex64> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf = samples.to_vec();
    fwd.process(&mut buf);
    let scale = 1.0 / n as f64;
    for (k, z) in buf.iter_mut().enumerate() {
        *z *= response(bin_omega(k, n, sample_rate)) * scale;
    }
    inv.process(&mut buf);
    buf
}

/// Like [`filter_record`] for a response that is Hermitian in ω (a real
/// filter): the Nyquist bin of an even-length record uses the real part so
/// that the I and Q rails are filtered independently.
pub fn filter_record_real(
    samples: &[Complex64],
    sample_rate: f64,
    response: impl Fn(f64) -> Complex64,
) -> Vec<Complex64> {
    let n = samples.len();
    let nyquist = if n % 2 == 0 { Some(n / 2) } else { None };
    let nyq_omega = nyquist.map(|k| bin_omega(k, n, sample_rate));
    filter_record(samples, sample_rate, |w| {
        if Some(w) == nyq_omega {
            Complex64::new(response(w).re, 0.0)
        } else {
            response(w)
        }
    })
}
