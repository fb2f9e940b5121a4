use num_complex::Complex64;
use proptest::prelude::*;

use eepn_core::analytics::{eepn_variance, phase_noise_budget};
use eepn_core::channel::{cd_propagate, odc_compensate, FiberSpec, OdcMode};
use eepn_core::cpr::{align_and_count, AlignOptions};
use eepn_core::edc::{fde_plan, tde_build};
use eepn_core::signal::{BerReport, SymbolFrame};
use eepn_core::sim::LinkSpec;
use eepn_core::transmitter::{apply_phase, synthesize_waveform, PhaseWalk, DEFAULT_WAVELENGTH};

const T: f64 = 1.0 / 56e9;

fn frame(n: usize) -> SymbolFrame {
    SymbolFrame::prbs_qpsk(21, n, 28e9).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn phase_rotation_conserves_energy(phases in prop::collection::vec(-10.0f64..10.0, 64)) {
        let f = frame(16);
        let [x, _] = synthesize_waveform(&f, 4, DEFAULT_WAVELENGTH).unwrap();
        let walk = PhaseWalk { phases, sample_period: x.sample_period() };
        let y = apply_phase(&x, &walk).unwrap();
        prop_assert!((y.energy() - x.energy()).abs() < 1e-12 * x.energy());
    }

    #[test]
    fn dispersion_is_lossless_and_invertible(km in 0.0f64..3000.0) {
        let f = frame(512);
        let [x, _] = synthesize_waveform(&f, 4, DEFAULT_WAVELENGTH).unwrap();
        let fiber = FiberSpec::ssmf(km * 1e3);
        let d = cd_propagate(&x, &fiber).unwrap();
        prop_assert!((d.energy() - x.energy()).abs() < 1e-9 * x.energy());
        let back = odc_compensate(&d, &fiber, OdcMode::Fbg).unwrap();
        let err: f64 = back.samples.iter().zip(&x.samples).map(|(a, b)| (a - b).norm_sqr()).sum();
        prop_assert!((err / x.energy()).sqrt() < 1e-10);
    }

    #[test]
    fn static_equalizers_are_all_pass_and_flat(km in 5.0f64..2500.0) {
        let fiber = FiberSpec::ssmf(km * 1e3);
        let p = fde_plan(&fiber, T).unwrap();
        prop_assert!(p.fft_size.is_power_of_two());
        prop_assert!(p.weights.iter().all(|w| (w.norm() - 1.0).abs() < 1e-12));
        let f = tde_build(&fiber, T).unwrap();
        let m0 = f.taps[0].norm();
        prop_assert!(f.taps.iter().all(|w| (w.norm() - m0).abs() < 1e-12 * m0));
    }

    #[test]
    fn eepn_is_linear_in_length_and_lo_linewidth(km in 1.0f64..3000.0, lo in 1e3f64..2e7, k in 0.1f64..10.0) {
        let base = LinkSpec { length: km * 1e3, lo_linewidth: lo, ..LinkSpec::default() };
        let v = eepn_variance(&base);
        let vl = eepn_variance(&LinkSpec { length: base.length * k, ..base });
        let vf = eepn_variance(&LinkSpec { lo_linewidth: lo * k, ..base });
        let vd = eepn_variance(&LinkSpec { dispersion: base.dispersion * k, ..base });
        let vr = eepn_variance(&LinkSpec { symbol_rate: base.symbol_rate * k, ..base });
        for scaled in [vl, vf, vd, vr] {
            prop_assert!((scaled / v - k).abs() < 1e-9 * k);
        }
    }

    #[test]
    fn effective_linewidth_without_eepn_is_the_sum(tx in 0.0f64..2e7, lo in 0.0f64..2e7) {
        let link = LinkSpec { tx_linewidth: tx, lo_linewidth: lo, ..LinkSpec::default() };
        let b = phase_noise_budget(&link, 0.3).unwrap();
        prop_assert_eq!(b.var_eepn, 0.0);
        prop_assert!((b.effective_linewidth - (tx + lo)).abs() <= 1e-6 * (tx + lo).max(1.0));
    }

    #[test]
    fn alignment_undoes_rotation_and_delay(r in 0u32..4, d in -4i64..=4) {
        let f = frame(2000);
        let rot = Complex64::new(0.0, 1.0).powu(r);
        // received[k] = sent[k − d]
        let rx: Vec<Complex64> = (0..2000)
            .map(|k| {
                let src = k as i64 - d;
                if (0..2000).contains(&src) { f.pol_x[src as usize] * rot } else { Complex64::new(0.0, 0.0) }
            })
            .collect();
        let rep = align_and_count(&rx, &f, 0, AlignOptions { start: 10, count: 1900, max_delay: 4 }).unwrap();
        prop_assert_eq!(rep.bit_errors, 0);
        prop_assert_eq!(rep.delay_applied, d);
        prop_assert_eq!((rep.rotation_applied + r) % 4, 0);
    }

    #[test]
    fn pooling_ignores_trial_order(counts in prop::collection::vec((0u64..1000, 1000u64..5000), 1..8)) {
        let reps: Vec<BerReport> = counts.iter().map(|&(e, n)| BerReport::new(e, n)).collect();
        let mut rev = reps.clone();
        rev.reverse();
        let a = BerReport::pooled(&reps);
        let b = BerReport::pooled(&rev);
        prop_assert_eq!((a.bit_errors, a.bits_compared), (b.bit_errors, b.bits_compared));
        prop_assert!(a.ber >= 0.0 && a.ber <= 1.0);
    }
}
