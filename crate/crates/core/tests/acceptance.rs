//! End-to-end acceptance checks. Each test prints one `criterion N: PASS`
//! or `criterion N: FAIL` line with the measured values, then asserts.
//!
//! Run with `cargo test --test acceptance -- --nocapture --test-threads 1`
//! to see the lines in order.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use eepn_core::analytics::{osnr_penalty_at_ber, phase_noise_budget, BerCurve, FloorEstimate, Penalty};
use eepn_core::channel::{cd_propagate, load_awgn, odc_compensate, FiberSpec, FrontendSpec, OdcMode};
use eepn_core::edc::{fde_equalize, fde_plan, tde_build, tde_equalize, tde_tap_count};
use eepn_core::rng::{Stream, TrialRng};
use eepn_core::signal::{BerReport, SymbolFrame};
use eepn_core::sim::{
    equalize, recover_and_count, run_trial, simulate_link, stage_plan_for, CprKind, DspChainSpec, Equalizer,
    LinkSpec, TrialResult,
};
use eepn_core::transmitter::{phase_walk, synthesize_waveform, LaserSpec, DEFAULT_WAVELENGTH};

const KM: f64 = 1e3;
const MHZ: f64 = 1e6;
const REF_BW: f64 = 12.5e9;
const BAUD: f64 = 28e9;

fn verdict(n: u32, pass: bool, detail: &str, started: Instant) {
    println!(
        "criterion {n}: {} {detail} ({:.1} s)",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
}

fn q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Gray QPSK in AWGN under the OSNR convention of the link model.
fn analytic_ber(osnr_db: f64) -> f64 {
    q((10f64.powf(osnr_db / 10.0) * REF_BW / BAUD).sqrt())
}

/// OSNR (dB) at which the analytic curve reaches `ber`.
fn analytic_osnr_for(ber: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 40.0);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if analytic_ber(m) > ber {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// Per-trial results at every OSNR of `osnrs`.
fn trials_at(link: &LinkSpec, dsp: &DspChainSpec, osnrs: &[f64], trials: u64, seed: u64) -> Vec<Vec<TrialResult>> {
    osnrs
        .iter()
        .enumerate()
        .map(|(g, &osnr_db)| {
            let l = LinkSpec { osnr_db, ..*link };
            (0..trials)
                .map(|t| run_trial(&l, dsp, &TrialRng::from_indices(seed, g as u64, t)).unwrap())
                .collect()
        })
        .collect()
}

fn pooled(rs: &[TrialResult]) -> BerReport {
    BerReport::pooled(rs.iter().map(|r| &r.pooled))
}

fn curve(label: &str, osnrs: &[f64], res: &[Vec<TrialResult>]) -> BerCurve {
    let pts: Vec<(f64, BerReport)> = osnrs.iter().zip(res).map(|(&o, rs)| (o, pooled(rs))).collect();
    BerCurve::from_reports(label, &pts).unwrap()
}

/// Mean and standard error of the per-trial BER.
fn mean_se(bers: &[f64]) -> (f64, f64) {
    let n = bers.len() as f64;
    let m = bers.iter().sum::<f64>() / n;
    let var = bers.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn fmt_penalty(p: Penalty) -> String {
    match p {
        Penalty::Db(d) => format!("{d:.2} dB"),
        Penalty::Unbounded => "unbounded".into(),
    }
}

#[test]
fn criterion_01_tap_counts_and_fft_sizes() {
    let t0 = Instant::now();
    let expected = [
        (20.0, 9, 16),
        (40.0, 17, 32),
        (100.0, 41, 64),
        (400.0, 161, 256),
        (600.0, 243, 512),
        (1000.0, 403, 1024),
        (2000.0, 807, 2048),
    ];
    let t = 1.0 / (2.0 * BAUD);
    let mut got = Vec::new();
    let mut pass = true;
    for (l, taps, fft) in expected {
        let f = FiberSpec::ssmf(l * KM);
        let n = tde_tap_count(&f, t).unwrap();
        let p = fde_plan(&f, t).unwrap().fft_size;
        pass &= n == taps && p == fft;
        got.push(format!("{l}km {{{n},{p}}}"));
    }
    pass &= t0.elapsed().as_secs_f64() < 1.0;
    verdict(1, pass, &got.join(" "), t0);
    assert!(pass);
}

#[test]
fn criterion_02_effective_linewidth() {
    let t0 = Instant::now();
    let lw = |x: f64| {
        let link = LinkSpec { length: 1000.0 * KM, tx_linewidth: x, lo_linewidth: x, ..LinkSpec::default() };
        phase_noise_budget(&link, 0.0).unwrap().effective_linewidth
    };
    let a = lw(100e3);
    let b = lw(10.0 * MHZ);
    let ea = (a / 2.7e6 - 1.0).abs();
    let eb = (b / 270e6 - 1.0).abs();
    let pass = ea <= 0.02 && eb <= 0.02;
    verdict(
        2,
        pass,
        &format!("{:.3} MHz ({:.2}%), {:.1} MHz ({:.2}%)", a / MHZ, ea * 100.0, b / MHZ, eb * 100.0),
        t0,
    );
    assert!(pass);
}

/// Symbol-level brute force: Gray QPSK plus circular Gaussian noise at
/// Es/N0 = OSNR·B_ref/R_s, no waveform and no DSP.
fn brute_force_ber(osnr_db: f64, n_symbols: usize, seed: u64) -> f64 {
    let esn0 = 10f64.powf(osnr_db / 10.0) * REF_BW / BAUD;
    let sigma = (1.0 / (2.0 * esn0)).sqrt();
    let mut rng = TrialRng::new(seed).stream(Stream::NoiseX);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut errors = 0u64;
    for _ in 0..n_symbols {
        let bi: bool = rng.gen();
        let bq: bool = rng.gen();
        let tx = Complex64::new(if bi { -s } else { s }, if bq { -s } else { s });
        let nr: f64 = rng.sample(StandardNormal);
        let ni: f64 = rng.sample(StandardNormal);
        let rx = tx + Complex64::new(sigma * nr, sigma * ni);
        errors += ((rx.re < 0.0) != bi) as u64 + ((rx.im < 0.0) != bq) as u64;
    }
    errors as f64 / (2 * n_symbols) as f64
}

#[test]
fn criterion_03_back_to_back_matches_analytic_curve() {
    let t0 = Instant::now();
    // Oracle check first: brute force against Q within 4 binomial sigmas.
    let mut oracle_ok = true;
    for osnr in [10.0, 12.0, 14.0] {
        let n = 1 << 20;
        let b = brute_force_ber(osnr, n, 7);
        let a = analytic_ber(osnr);
        let sd = (a * (1.0 - a) / (2 * n) as f64).sqrt();
        oracle_ok &= (b - a).abs() < 4.0 * sd;
    }
    assert!(oracle_ok, "symbol-level oracle disagrees with the analytic curve");

    // Adaptive fractionally spaced equalizer, no phase noise to track.
    let dsp = DspChainSpec {
        lms_taps: Some(15),
        lms_step: 3e-4,
        lms_training: 40_000,
        ..DspChainSpec::new(Equalizer::Lms, CprKind::None)
    };
    let osnrs: Vec<f64> = (10..=16).map(f64::from).collect();
    let res = trials_at(&LinkSpec::default(), &dsp, &osnrs, 4, 31);
    let mut gaps = Vec::new();
    for (o, rs) in osnrs.iter().zip(&res) {
        let ber = pooled(rs).ber;
        if (1e-4..=1e-2).contains(&ber) {
            gaps.push((*o, ber, o - analytic_osnr_for(ber)));
        }
    }
    let worst = gaps.iter().map(|g| g.2.abs()).fold(0.0, f64::max);
    let pass = gaps.len() >= 3 && worst <= 0.3;
    let detail: Vec<String> = gaps.iter().map(|(o, b, g)| format!("{o}dB:{b:.2e}/{g:+.2}dB")).collect();
    verdict(3, pass, &format!("oracle ok, gaps {} (max {worst:.2} dB, limit 0.3)", detail.join(" ")), t0);
    assert!(pass);
}

fn nmse_interior(a: &[Complex64], b: &[Complex64], edge: usize) -> f64 {
    let idx = edge..a.len() - edge;
    let num: f64 = idx.clone().map(|i| (a[i] - b[i]).norm_sqr()).sum();
    let den: f64 = idx.map(|i| b[i].norm_sqr()).sum();
    num / den
}

#[test]
fn criterion_04_tde_fde_equivalence() {
    let t0 = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for l in [20.0, 40.0, 100.0, 400.0, 600.0, 1000.0, 2000.0] {
        // Noise-free receiver output at 2 samples per symbol.
        let link = LinkSpec { length: l * KM, ..LinkSpec::default() };
        let dsp = DspChainSpec::new(Equalizer::Fde, CprKind::None);
        let (plan, mode) = stage_plan_for(&dsp);
        let rx = simulate_link(&link, &plan, mode, 16384, &TrialRng::new(4)).unwrap();
        let fiber = link.fiber();
        let t = link.dsp_period();
        let f = tde_build(&fiber, t).unwrap();
        let p = fde_plan(&fiber, t).unwrap();
        let mut worst: f64 = 0.0;
        for pol in &rx.pols {
            let a = tde_equalize(pol, &f).unwrap();
            let b = fde_equalize(pol, &p).unwrap();
            worst = worst.max(nmse_interior(&a.samples, &b.samples, f.half_len().max(p.overlap)));
        }
        pass &= worst < 1e-3;
        detail.push(format!("{l}km:{worst:.1e}"));
    }
    verdict(4, pass, &format!("nmse {} (limit 1e-3)", detail.join(" ")), t0);
    assert!(pass);
}

#[test]
fn criterion_05_odc_round_trip() {
    let t0 = Instant::now();
    let frame = SymbolFrame::prbs_qpsk(5, 8192, BAUD).unwrap();
    let mut worst: f64 = 0.0;
    for x in synthesize_waveform(&frame, 4, DEFAULT_WAVELENGTH).unwrap() {
        let fiber = FiberSpec::ssmf(2000.0 * KM);
        let y = odc_compensate(&cd_propagate(&x, &fiber).unwrap(), &fiber, OdcMode::Dcf).unwrap();
        let num: f64 = x.samples.iter().zip(&y.samples).map(|(a, b)| (a - b).norm_sqr()).sum();
        worst = worst.max((num / x.energy()).sqrt());
    }
    let pass = worst < 1e-10 && t0.elapsed().as_secs_f64() < 1.0;
    verdict(5, pass, &format!("relative error {worst:.2e} (limit 1e-10)"), t0);
    assert!(pass);
}

#[test]
fn criterion_06_eepn_comes_from_the_lo() {
    let t0 = Instant::now();
    let dsp = DspChainSpec::new(Equalizer::Fde, CprKind::Nlms { step_size: 0.1 });
    let osnrs: Vec<f64> = (10..=18).map(f64::from).collect();
    let btb = LinkSpec { tx_linewidth: 2.0 * MHZ, lo_linewidth: 2.0 * MHZ, ..LinkSpec::default() };
    let reference = curve("btb", &osnrs, &trials_at(&btb, &dsp, &osnrs, 4, 60));
    let mut pens = Vec::new();
    for (i, (tx, lo)) in [(4.0, 0.0), (2.0, 2.0), (0.0, 4.0)].into_iter().enumerate() {
        let link = LinkSpec { length: 2000.0 * KM, tx_linewidth: tx * MHZ, lo_linewidth: lo * MHZ, ..LinkSpec::default() };
        let c = curve("2000km", &osnrs, &trials_at(&link, &dsp, &osnrs, 4, 61 + i as u64));
        pens.push(osnr_penalty_at_ber(&c, &reference, 1e-3).unwrap());
    }
    let v: Vec<Option<f64>> = pens.iter().map(|p| p.db()).collect();
    let pass = match (v[0], v[1], v[2]) {
        (Some(a), Some(b), Some(c)) => a < b && b < c && a < 1.0,
        (Some(a), Some(b), None) => a < b && a < 1.0,
        _ => false,
    };
    let detail: Vec<String> = pens.iter().map(|&p| fmt_penalty(p)).collect();
    verdict(6, pass, &format!("penalty 4/0 {}, 2/2 {}, 0/4 {}", detail[0], detail[1], detail[2]), t0);
    assert!(pass);
}

/// For every OSNR and split pair, the per-trial mean BERs agree within
/// three combined standard errors.
fn splits_agree(res: &[Vec<Vec<TrialResult>>]) -> (bool, f64) {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for g in 0..res[0].len() {
        let stats: Vec<(f64, f64)> = res
            .iter()
            .map(|split| mean_se(&split[g].iter().map(|r| r.pooled.ber).collect::<Vec<_>>()))
            .collect();
        for a in 0..stats.len() {
            for b in a + 1..stats.len() {
                let d = (stats[a].0 - stats[b].0).abs();
                let se = (stats[a].1.powi(2) + stats[b].1.powi(2)).sqrt();
                if d > 0.0 {
                    let z = if se > 0.0 { d / se } else { f64::INFINITY };
                    worst = worst.max(z);
                    pass &= z <= 3.0;
                }
            }
        }
    }
    (pass, worst)
}

#[test]
fn criterion_07_lms_split_symmetry() {
    let t0 = Instant::now();
    let dsp = DspChainSpec { lms_step: 3e-3, ..DspChainSpec::new(Equalizer::Lms, CprKind::Nlms { step_size: 0.1 }) };
    let osnrs = [14.0, 16.0, 18.0, 20.0];
    let splits = [(1.0, 0.0), (0.5, 0.5), (0.0, 1.0)];
    let res: Vec<Vec<Vec<TrialResult>>> = splits
        .iter()
        .enumerate()
        .map(|(i, &(tx, lo))| {
            let link = LinkSpec { length: 400.0 * KM, tx_linewidth: tx * MHZ, lo_linewidth: lo * MHZ, ..LinkSpec::default() };
            trials_at(&link, &dsp, &osnrs, 6, 70 + i as u64)
        })
        .collect();
    let (ber_ok, worst_z) = splits_agree(&res);

    // Mean tap-magnitude profile per split over trials, pols and OSNRs.
    let profiles: Vec<Vec<f64>> = res
        .iter()
        .map(|split| {
            let mut prof: Vec<f64> = Vec::new();
            let mut n = 0.0;
            for r in split.iter().flatten() {
                for taps in r.lms_taps.as_ref().unwrap() {
                    if prof.is_empty() {
                        prof = vec![0.0; taps.len()];
                    }
                    prof.iter_mut().zip(taps).for_each(|(p, w)| *p += w.norm());
                    n += 1.0;
                }
            }
            prof.iter().map(|p| p / n).collect()
        })
        .collect();
    let rms = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
    let mut worst_prof: f64 = 0.0;
    for a in 0..3 {
        for b in a + 1..3 {
            let d: Vec<f64> = profiles[a].iter().zip(&profiles[b]).map(|(x, y)| x - y).collect();
            worst_prof = worst_prof.max(rms(&d) / rms(&profiles[a]));
        }
    }
    let bers: Vec<String> = res
        .iter()
        .map(|split| split.iter().map(|rs| format!("{:.1e}", pooled(rs).ber)).collect::<Vec<_>>().join("/"))
        .collect();
    let pass = ber_ok && worst_prof < 0.1;
    verdict(
        7,
        pass,
        &format!(
            "BER 1/0 {} 0.5/0.5 {} 0/1 {}; worst |dBER|/se {worst_z:.2} (limit 3); tap profile rms diff {:.1}% (limit 10%)",
            bers[0],
            bers[1],
            bers[2],
            worst_prof * 100.0
        ),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_08_odc_immunity() {
    let t0 = Instant::now();
    let dsp = DspChainSpec::new(Equalizer::Odc(OdcMode::Dcf), CprKind::Nlms { step_size: 0.1 });
    let osnrs = [12.0, 14.0, 16.0];
    let res: Vec<Vec<Vec<TrialResult>>> = [(4.0, 0.0), (2.0, 2.0), (0.0, 4.0)]
        .iter()
        .enumerate()
        .map(|(i, &(tx, lo))| {
            let link = LinkSpec { length: 2000.0 * KM, tx_linewidth: tx * MHZ, lo_linewidth: lo * MHZ, ..LinkSpec::default() };
            trials_at(&link, &dsp, &osnrs, 6, 80 + i as u64)
        })
        .collect();
    let (split_ok, worst_z) = splits_agree(&res);

    let link = LinkSpec { length: 2000.0 * KM, tx_linewidth: 2.0 * MHZ, lo_linewidth: 2.0 * MHZ, osnr_db: 14.0, ..LinkSpec::default() };
    let fbg = DspChainSpec::new(Equalizer::Odc(OdcMode::Fbg), dsp.cpr);
    let rng = TrialRng::from_indices(88, 0, 0);
    let identical = run_trial(&link, &dsp, &rng).unwrap() == run_trial(&link, &fbg, &rng).unwrap();

    let bers: Vec<String> = res
        .iter()
        .map(|split| split.iter().map(|rs| format!("{:.1e}", pooled(rs).ber)).collect::<Vec<_>>().join("/"))
        .collect();
    let pass = split_ok && identical;
    verdict(
        8,
        pass,
        &format!(
            "BER 4/0 {} 2/2 {} 0/4 {}; worst |dBER|/se {worst_z:.2} (limit 3); DCF/FBG identical {identical}",
            bers[0], bers[1], bers[2]
        ),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_09_equalizer_ordering() {
    let t0 = Instant::now();
    let osnrs: Vec<f64> = (10..=20).map(f64::from).collect();
    let nlms = CprKind::Nlms { step_size: 0.1 };
    let reference = curve(
        "btb",
        &osnrs,
        &trials_at(&LinkSpec::default(), &DspChainSpec::new(Equalizer::Fde, nlms), &osnrs, 4, 90),
    );
    let eqs = [
        DspChainSpec::new(Equalizer::Tde, nlms),
        DspChainSpec::new(Equalizer::Fde, nlms),
        DspChainSpec { lms_step: 3e-3, ..DspChainSpec::new(Equalizer::Lms, nlms) },
    ];
    let mut pass = true;
    let mut lms_margin_seen = false;
    let mut detail = Vec::new();
    for (g, lw) in [0.1, 0.3, 0.5, 0.7].into_iter().enumerate() {
        let link = LinkSpec { length: 400.0 * KM, tx_linewidth: lw * MHZ, lo_linewidth: lw * MHZ, ..LinkSpec::default() };
        let eff = phase_noise_budget(&link, 0.0).unwrap().effective_linewidth;
        let p: Vec<Penalty> = eqs
            .iter()
            .enumerate()
            .map(|(e, dsp)| {
                let c = curve("c", &osnrs, &trials_at(&link, dsp, &osnrs, 3, 91 + (g * 3 + e) as u64));
                osnr_penalty_at_ber(&c, &reference, 1e-3).unwrap()
            })
            .collect();
        let (tde, fde) = (p[0].db(), p[1].db());
        match (tde, fde) {
            (Some(t), Some(f)) => {
                pass &= (t - f).abs() <= 0.3;
                let best = t.max(f);
                // An unbounded LMS penalty is above both.
                if let Some(l) = p[2].db() {
                    pass &= l > best;
                    lms_margin_seen |= l - best > 1.0;
                }
            }
            _ => pass = false,
        }
        detail.push(format!(
            "{:.2}MHz: tde {} fde {} lms {}",
            eff / MHZ,
            fmt_penalty(p[0]),
            fmt_penalty(p[1]),
            fmt_penalty(p[2])
        ));
    }
    pass &= lms_margin_seen;
    verdict(9, pass, &format!("{}; lms > both by 1 dB somewhere: {lms_margin_seen}", detail.join("; ")), t0);
    assert!(pass);
}

/// Pooled floor and across-trial standard error.
struct Floor {
    est: FloorEstimate,
    se: f64,
}

fn floor_of(reports: &[BerReport]) -> Floor {
    let (_, se) = mean_se(&reports.iter().map(|r| r.ber).collect::<Vec<_>>());
    Floor { est: FloorEstimate::pooled(reports), se }
}

/// First block size of `sizes` at which the CPR no longer beats `target`.
fn crossover(sizes: &[usize], floors: &[Floor], target: f64) -> usize {
    sizes
        .iter()
        .zip(floors)
        .find(|(_, f)| f.est.plotted() >= target)
        .map(|(&n, _)| n)
        .unwrap_or(usize::MAX)
}

#[test]
fn criterion_10_block_size_trends() {
    let t0 = Instant::now();
    let link = LinkSpec {
        length: 2000.0 * KM,
        tx_linewidth: 5.0 * MHZ,
        lo_linewidth: 5.0 * MHZ,
        osnr_db: 40.0,
        ..LinkSpec::default()
    };
    let steps = [0.05, 0.1, 0.15, 0.2, 0.3];
    let sizes: Vec<usize> = (1..=41).step_by(2).collect();
    let mut dsps: Vec<DspChainSpec> = steps
        .iter()
        .map(|&s| DspChainSpec::new(Equalizer::Fde, CprKind::Nlms { step_size: s }))
        .collect();
    dsps.extend(sizes.iter().map(|&n| DspChainSpec::new(Equalizer::Fde, CprKind::Bwa { block_size: n })));
    dsps.extend(sizes.iter().map(|&n| DspChainSpec::new(Equalizer::Fde, CprKind::Vv { block_size: n })));
    let record = dsps.iter().map(|d| d.record_symbols(&link).unwrap()).max().unwrap();

    // One received and equalized record per trial, shared by every CPR.
    let trials = 16;
    let mut reports: Vec<Vec<BerReport>> = vec![Vec::new(); dsps.len()];
    let (plan, mode) = stage_plan_for(&dsps[0]);
    for t in 0..trials {
        let rx = simulate_link(&link, &plan, mode, record, &TrialRng::from_indices(100, 0, t)).unwrap();
        let eq = equalize(&rx, &link, &dsps[0]).unwrap();
        for (i, d) in dsps.iter().enumerate() {
            reports[i].push(recover_and_count(&eq, &rx.frame, &link, d).unwrap().pooled);
        }
    }
    let floors: Vec<Floor> = reports.iter().map(|r| floor_of(r)).collect();
    let (nlms, rest) = floors.split_at(steps.len());
    let (bwa, vv) = rest.split_at(sizes.len());
    let (best_i, best) = nlms
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.est.plotted().total_cmp(&b.1.est.plotted()))
        .unwrap();
    let target = best.est.plotted();
    let c_bwa = crossover(&sizes, bwa, target);
    let c_vv = crossover(&sizes, vv, target);

    let mut vv_ok = true;
    for (b, v) in bwa.iter().zip(vv) {
        let (fb, fv) = (b.est.plotted(), v.est.plotted());
        let se = (b.se.powi(2) + v.se.powi(2)).sqrt();
        vv_ok &= fv <= fb + 3.0 * se && fb < 2.0 * fv;
    }
    let pass = c_bwa.abs_diff(11) <= 4 && c_vv.abs_diff(21) <= 4 && vv_ok;
    let show = |fs: &[Floor]| {
        [0usize, 2, 5, 10, 15, 20]
            .iter()
            .map(|&i| format!("N{}:{:.1e}", sizes[i], fs[i].est.plotted()))
            .collect::<Vec<_>>()
            .join(" ")
    };
    verdict(
        10,
        pass,
        &format!(
            "nlms best mu {} floor {target:.2e}; crossover bwa {} (11 +/- 4) vv {} (21 +/- 4); vv vs bwa within margin {vv_ok}; bwa [{}] vv [{}]",
            steps[best_i],
            if c_bwa == usize::MAX { "none".into() } else { c_bwa.to_string() },
            if c_vv == usize::MAX { "none".into() } else { c_vv.to_string() },
            show(bwa),
            show(vv)
        ),
        t0,
    );
    assert!(pass);
}

/// Symbols until |W| first reaches 90% of its post-convergence mean, and
/// the relative standard deviation of |W| after symbol 400.
fn nlms_metrics(w: &[Complex64]) -> (usize, f64) {
    let mags: Vec<f64> = w.iter().map(|z| z.norm()).collect();
    let tail = &mags[400..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let sd = (tail.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / tail.len() as f64).sqrt();
    let conv = mags.iter().position(|&m| m >= 0.9 * mean).unwrap_or(mags.len());
    (conv, sd / mean)
}

#[test]
fn criterion_11_nlms_convergence() {
    let t0 = Instant::now();
    let dsp = DspChainSpec::new(Equalizer::Fde, CprKind::Nlms { step_size: 0.1 });
    let run = |lw: f64, seed: u64| {
        let link = LinkSpec { length: 1000.0 * KM, tx_linewidth: lw, lo_linewidth: lw, osnr_db: 14.0, ..LinkSpec::default() };
        let trials = 4;
        let (mut conv, mut fluct) = (0usize, 0.0);
        for t in 0..trials {
            let r = run_trial(&link, &dsp, &TrialRng::from_indices(seed, 0, t)).unwrap();
            let (c, f) = nlms_metrics(r.nlms_weights.as_ref().unwrap());
            conv = conv.max(c);
            fluct += f / trials as f64;
        }
        (conv, fluct)
    };
    let (conv_lo, fl_lo) = run(100e3, 110);
    let (conv_hi, fl_hi) = run(10.0 * MHZ, 111);
    let pass = conv_hi < 400
        && conv_lo < 400
        && (fl_hi - 0.16).abs() <= 0.05
        && (fl_lo - 0.10).abs() <= 0.05
        && fl_hi > fl_lo;
    verdict(
        11,
        pass,
        &format!(
            "270 MHz: converged by symbol {conv_hi}, fluctuation {:.1}% (16 +/- 5); 2.7 MHz: converged by {conv_lo}, fluctuation {:.1}% (10 +/- 5)",
            fl_hi * 100.0,
            fl_lo * 100.0
        ),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_12_statistical_invariants() {
    let t0 = Instant::now();
    let laser = LaserSpec::with_linewidth(1.0 * MHZ);
    let t = 1.0 / (4.0 * BAUD);
    let w = phase_walk(&laser, 1_000_001, t, &mut TrialRng::new(120).stream(Stream::TxLaser)).unwrap();
    let inc = w.increments();
    let var = inc.iter().map(|d| d * d).sum::<f64>() / inc.len() as f64;
    let var_err = (var / laser.increment_variance(t) - 1.0).abs();

    let frame = SymbolFrame::prbs_qpsk(9, 1 << 16, BAUD).unwrap();
    let [x, y] = synthesize_waveform(&frame, 4, DEFAULT_WAVELENGTH).unwrap();
    let mut worst_osnr: f64 = 0.0;
    for (i, target) in [10.0, 14.0, 20.0, 30.0].into_iter().enumerate() {
        let spec = FrontendSpec::with_osnr(target);
        let mut rng = TrialRng::new(121 + i as u64).stream(Stream::NoiseX);
        let (nx, ny) = load_awgn(&x, &y, &spec, &mut rng).unwrap();
        let noise_power: f64 = [(&x, &nx), (&y, &ny)]
            .iter()
            .map(|(c, n)| c.samples.iter().zip(&n.samples).map(|(a, b)| (b - a).norm_sqr()).sum::<f64>() / c.len() as f64)
            .sum::<f64>()
            / 2.0;
        // White noise: per-polarization PSD is the power over the sample rate.
        let n0 = noise_power / x.sample_rate;
        let realized = 10.0 * ((x.mean_power() + y.mean_power()) / (n0 * 2.0 * REF_BW)).log10();
        worst_osnr = worst_osnr.max((realized - target).abs());
    }
    let pass = var_err <= 0.02 && worst_osnr <= 0.1;
    verdict(
        12,
        pass,
        &format!(
            "increment variance error {:.2}% (limit 2%); worst OSNR error {worst_osnr:.3} dB (limit 0.1)",
            var_err * 100.0
        ),
        t0,
    );
    assert!(pass);
}
