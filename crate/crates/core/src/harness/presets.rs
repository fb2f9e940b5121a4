//! Built-in experiments.
//!
//! A preset is a list of configs whose rows are meant to go into one table;
//! each config names its own scenario so the rows stay distinguishable.

use std::path::PathBuf;

use super::config::{ChartSpec, ExperimentConfig};
use crate::analytics::FLOOR_OSNR_DB;
use crate::channel::OdcMode;
use crate::sim::Equalizer;

pub const PRESET_NAMES: [&str; 8] = [
    "fig4_tde",
    "fig5_fde",
    "fig6_lms_nocpr",
    "fig7_lms",
    "fig9_odc",
    "fig11_penalty",
    "fig12_floors",
    "fig13_tolerance",
];

const KM: f64 = 1e3;
const MHZ: f64 = 1e6;
/// Step size used for the adaptive equalizer when phase noise is present.
const LMS_STEP: f64 = 3e-3;

fn osnr_range(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(f64::from).collect()
}

fn base(name: &str, chart_x: &str, series: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(name);
    c.chart = Some(ChartSpec {
        path: PathBuf::from(format!("{name}.svg")),
        x: chart_x.into(),
        y: "ber".into(),
        series: series.into(),
    });
    c.csv = Some(PathBuf::from(format!("{name}.csv")));
    c
}

fn split_sweep(name: &str, eq: Equalizer, splits: &[(f64, f64)]) -> ExperimentConfig {
    let mut c = base(name, "osnr_db", "fiber_length_km+tx_linewidth_hz+lo_linewidth_hz");
    c.dsp.base.equalizer = eq;
    c.dsp.cpr_name = "nlms".into();
    c.axes.fiber_length = vec![0.0, 400.0 * KM, 2000.0 * KM];
    c.axes.linewidths = splits.to_vec();
    c.axes.osnr_db = osnr_range(10, 20);
    c
}

const SPLITS_4MHZ: [(f64, f64); 3] = [(4.0 * MHZ, 0.0), (2.0 * MHZ, 2.0 * MHZ), (0.0, 4.0 * MHZ)];
const SPLITS_1MHZ: [(f64, f64); 3] = [(1.0 * MHZ, 0.0), (0.5 * MHZ, 0.5 * MHZ), (0.0, 1.0 * MHZ)];

fn fig6() -> Vec<ExperimentConfig> {
    let series = "fiber_length_km+tx_linewidth_hz+lo_linewidth_hz";
    let mut a = base("fig6_lms_nocpr", "osnr_db", series);
    a.dsp.base.equalizer = Equalizer::Lms;
    a.dsp.cpr_name = "none".into();
    a.link.length = 20.0 * KM;
    a.axes.linewidths = [0.0, 0.1, 0.5, 1.0].iter().map(|&m| (m * MHZ, m * MHZ)).collect();
    a.axes.osnr_db = osnr_range(8, 18);
    let mut b = a.clone();
    b.name = "fig6_lms_nocpr_length".into();
    b.link.length = 0.0;
    b.axes.fiber_length = [20.0, 40.0, 80.0, 160.0].iter().map(|l| l * KM).collect();
    b.axes.linewidths = vec![(0.5 * MHZ, 0.5 * MHZ)];
    vec![a, b]
}

fn fig7() -> Vec<ExperimentConfig> {
    let mut c = split_sweep("fig7_lms", Equalizer::Lms, &SPLITS_1MHZ);
    c.dsp.base.lms_step = LMS_STEP;
    vec![c]
}

fn fig11() -> Vec<ExperimentConfig> {
    // Reference curve, then the three equalizers at Tx = LO linewidths.
    let mut btb = base("fig11_penalty_btb", "osnr_db", "scenario");
    btb.axes.osnr_db = osnr_range(8, 16);
    let mut c = base("fig11_penalty", "osnr_db", "equalizer+tx_linewidth_hz");
    c.dsp.base.lms_step = LMS_STEP;
    c.link.length = 400.0 * KM;
    c.axes.equalizer = vec![Equalizer::Tde, Equalizer::Fde, Equalizer::Lms];
    c.axes.linewidths = [0.1, 0.3, 0.5, 0.7, 1.0].iter().map(|&m| (m * MHZ, m * MHZ)).collect();
    c.axes.osnr_db = osnr_range(8, 20);
    vec![btb, c]
}

fn floors_link(c: &mut ExperimentConfig) {
    c.link.length = 2000.0 * KM;
    c.link.osnr_db = FLOOR_OSNR_DB;
    c.dsp.base.equalizer = Equalizer::Fde;
}

fn fig12() -> Vec<ExperimentConfig> {
    let lw = vec![(5.0 * MHZ, 5.0 * MHZ), (10.0 * MHZ, 10.0 * MHZ)];
    let mut blocks = base("fig12_floors", "block_size", "cpr+tx_linewidth_hz");
    floors_link(&mut blocks);
    blocks.axes.linewidths = lw.clone();
    blocks.axes.cpr = vec!["bwa".into(), "vv".into()];
    blocks.axes.block_size = (1..=41).step_by(2).collect();
    let mut nlms = base("fig12_floors_nlms", "step_size", "cpr+tx_linewidth_hz");
    floors_link(&mut nlms);
    nlms.axes.linewidths = lw;
    nlms.dsp.cpr_name = "nlms".into();
    nlms.axes.step_size = vec![0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5];
    vec![blocks, nlms]
}

fn fig13() -> Vec<ExperimentConfig> {
    let lws: Vec<(f64, f64)> = [0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0]
        .iter()
        .map(|&m| (m * MHZ, m * MHZ))
        .collect();
    let mut blocks = base("fig13_tolerance", "effective_linewidth_hz", "cpr+block_size");
    floors_link(&mut blocks);
    blocks.axes.linewidths = lws.clone();
    blocks.axes.cpr = vec!["bwa".into(), "vv".into()];
    blocks.axes.block_size = vec![5, 11, 21];
    let mut nlms = base("fig13_tolerance_nlms", "effective_linewidth_hz", "cpr+step_size");
    floors_link(&mut nlms);
    nlms.axes.linewidths = lws;
    nlms.dsp.cpr_name = "nlms".into();
    nlms.dsp.step_size = 0.15;
    vec![blocks, nlms]
}

/// Configs of the named preset, or `None` for an unknown name.
pub fn preset(name: &str) -> Option<Vec<ExperimentConfig>> {
    Some(match name {
        "fig4_tde" => vec![split_sweep(name, Equalizer::Tde, &SPLITS_4MHZ)],
        "fig5_fde" => vec![split_sweep(name, Equalizer::Fde, &SPLITS_4MHZ)],
        "fig6_lms_nocpr" => fig6(),
        "fig7_lms" => fig7(),
        "fig9_odc" => vec![split_sweep(name, Equalizer::Odc(OdcMode::Dcf), &SPLITS_4MHZ)],
        "fig11_penalty" => fig11(),
        "fig12_floors" => fig12(),
        "fig13_tolerance" => fig13(),
        _ => return None,
    })
}

pub fn preset_experiments() -> Vec<(&'static str, Vec<ExperimentConfig>)> {
    PRESET_NAMES.iter().map(|&n| (n, preset(n).expect("listed preset"))).collect()
}
