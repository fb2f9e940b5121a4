//! INI experiment files.
//!
//! ```ini
//! [experiment]
//! name = long_haul
//! trials = 4
//! seed = 1
//! csv = out/long_haul.csv
//!
//! [link]
//! fiber_length_km = 2000
//!
//! [dsp]
//! equalizer = fde
//! cpr = nlms
//!
//! [sweep]
//! linewidth_split = 4e6/0, 2e6/2e6, 0/4e6
//! osnr_db = 12, 13, 14, 15
//! ```
//!
//! Every `[sweep]` key takes a comma-separated list; the grid is the
//! Cartesian product of all lists. Keys left out of `[sweep]` stay at their
//! `[link]` / `[dsp]` value.

use std::path::{Path, PathBuf};

use ini::{Ini, Properties};

use super::{HarnessError, HarnessResult};
use crate::channel::ps_per_nm_km;
use crate::sim::{CprKind, DspChainSpec, Equalizer, LinkSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub path: PathBuf,
    pub x: String,
    pub y: String,
    pub series: String,
}

/// DSP settings shared by every grid point. Equalizer and CPR names are
/// resolved per grid point together with the swept block and step sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct DspTemplate {
    pub base: DspChainSpec,
    pub cpr_name: String,
    pub step_size: f64,
    pub block_size: usize,
}

impl Default for DspTemplate {
    fn default() -> Self {
        Self {
            base: DspChainSpec::default(),
            cpr_name: "nlms".into(),
            step_size: 0.1,
            block_size: 11,
        }
    }
}

/// Swept axes, outermost first. An empty list means "base value only".
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepAxes {
    /// Meters.
    pub fiber_length: Vec<f64>,
    /// (Tx, LO) linewidth pairs in Hz.
    pub linewidths: Vec<(f64, f64)>,
    pub osnr_db: Vec<f64>,
    pub equalizer: Vec<Equalizer>,
    pub cpr: Vec<String>,
    pub block_size: Vec<usize>,
    pub step_size: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub link: LinkSpec,
    pub dsp: DspTemplate,
    pub axes: SweepAxes,
    pub trials: usize,
    pub master_seed: u64,
    pub csv: Option<PathBuf>,
    pub chart: Option<ChartSpec>,
}

/// One resolved grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub link: LinkSpec,
    pub dsp: DspChainSpec,
    pub block_size: usize,
    pub step_size: f64,
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            link: LinkSpec::default(),
            dsp: DspTemplate::default(),
            axes: SweepAxes::default(),
            trials: 4,
            master_seed: 1,
            csv: None,
            chart: None,
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| HarnessError::io(path.as_ref(), e))?;
        let mut cfg = Self::from_ini_str(&text)?;
        // Output paths are relative to the config file.
        if let Some(dir) = path.as_ref().parent() {
            if let Some(p) = cfg.csv.as_mut() {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
            if let Some(c) = cfg.chart.as_mut() {
                if c.path.is_relative() {
                    c.path = dir.join(&c.path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn from_ini_str(text: &str) -> HarnessResult<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| HarnessError::config("<file>", e.to_string()))?;
        let mut cfg = Self::new("experiment");
        for (section, props) in ini.iter() {
            match section {
                None if props.is_empty() => {}
                Some("experiment") => cfg.apply_experiment(props)?,
                Some("link") => {
                    for (k, v) in props.iter() {
                        apply_link_key(&mut cfg.link, k, v)?;
                    }
                }
                Some("dsp") => cfg.apply_dsp(props)?,
                Some("sweep") => cfg.apply_sweep(props)?,
                other => {
                    return Err(HarnessError::config(
                        format!("[{}]", other.unwrap_or("")),
                        "unknown section (expected experiment, link, dsp, sweep)",
                    ))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_experiment(&mut self, props: &Properties) -> HarnessResult<()> {
        let mut chart_path = None;
        let (mut x, mut y, mut series) = ("osnr_db".to_string(), "ber".to_string(), "scenario".to_string());
        for (k, v) in props.iter() {
            match k {
                "name" => self.name = v.trim().to_string(),
                "trials" => self.trials = parse_num(k, v)?,
                "seed" => self.master_seed = parse_num(k, v)?,
                "csv" => self.csv = Some(PathBuf::from(v.trim())),
                "chart" => chart_path = Some(PathBuf::from(v.trim())),
                "chart_x" => x = v.trim().to_string(),
                "chart_y" => y = v.trim().to_string(),
                "chart_series" => series = v.trim().to_string(),
                _ => return Err(HarnessError::config(format!("experiment.{k}"), "unknown key")),
            }
        }
        self.chart = chart_path.map(|path| ChartSpec { path, x, y, series });
        Ok(())
    }

    fn apply_dsp(&mut self, props: &Properties) -> HarnessResult<()> {
        let d = &mut self.dsp;
        for (k, v) in props.iter() {
            match k {
                "equalizer" => d.base.equalizer = parse_equalizer(k, v)?,
                "cpr" => d.cpr_name = parse_cpr_name(k, v)?,
                "step_size" => d.step_size = parse_num(k, v)?,
                "block_size" => d.block_size = parse_num(k, v)?,
                "lms_taps" => {
                    d.base.lms_taps = if v.trim() == "auto" { None } else { Some(parse_num(k, v)?) }
                }
                "lms_step" => d.base.lms_step = parse_num(k, v)?,
                "lms_training" => d.base.lms_training = parse_num(k, v)?,
                "nlms_training" => d.base.nlms_training = parse_num(k, v)?,
                "counted_bits" => d.base.counted_bits = parse_num(k, v)?,
                _ => return Err(HarnessError::config(format!("dsp.{k}"), "unknown key")),
            }
        }
        Ok(())
    }

    fn apply_sweep(&mut self, props: &Properties) -> HarnessResult<()> {
        let mut tx = Vec::new();
        let mut lo = Vec::new();
        let mut split = Vec::new();
        let a = &mut self.axes;
        for (k, v) in props.iter() {
            match k {
                "fiber_length_km" => a.fiber_length = parse_list::<f64>(k, v)?.into_iter().map(|x| x * 1e3).collect(),
                "tx_linewidth_hz" => tx = parse_list(k, v)?,
                "lo_linewidth_hz" => lo = parse_list(k, v)?,
                "linewidth_split" => {
                    for item in split_list(v) {
                        let (t, l) = item.split_once('/').ok_or_else(|| {
                            HarnessError::config(k, format!("`{item}` is not of the form tx/lo"))
                        })?;
                        split.push((parse_num(k, t)?, parse_num(k, l)?));
                    }
                }
                "osnr_db" => a.osnr_db = parse_list(k, v)?,
                "block_size" => a.block_size = parse_list(k, v)?,
                "step_size" => a.step_size = parse_list(k, v)?,
                "equalizer" => {
                    a.equalizer = split_list(v).map(|s| parse_equalizer(k, s)).collect::<HarnessResult<_>>()?
                }
                "cpr" => a.cpr = split_list(v).map(|s| parse_cpr_name(k, s)).collect::<HarnessResult<_>>()?,
                _ => return Err(HarnessError::config(format!("sweep.{k}"), "unknown key")),
            }
        }
        if !split.is_empty() && !(tx.is_empty() && lo.is_empty()) {
            return Err(HarnessError::config(
                "sweep.linewidth_split",
                "cannot be combined with tx_linewidth_hz / lo_linewidth_hz",
            ));
        }
        if !split.is_empty() {
            a.linewidths = split;
        } else if !tx.is_empty() || !lo.is_empty() {
            let tx = if tx.is_empty() { vec![self.link.tx_linewidth] } else { tx };
            let lo = if lo.is_empty() { vec![self.link.lo_linewidth] } else { lo };
            a.linewidths = tx.iter().flat_map(|&t| lo.iter().map(move |&l| (t, l))).collect();
        }
        Ok(())
    }

    pub fn validate(&self) -> HarnessResult<()> {
        if self.trials == 0 {
            return Err(HarnessError::config("experiment.trials", "must be at least 1"));
        }
        self.link.validate()?;
        for p in self.grid()? {
            p.dsp.validate()?;
            p.link.validate()?;
        }
        Ok(())
    }

    fn axis<T: Clone>(v: &[T], base: T) -> Vec<T> {
        if v.is_empty() {
            vec![base]
        } else {
            v.to_vec()
        }
    }

    /// All grid points in deterministic order.
    pub fn grid(&self) -> HarnessResult<Vec<GridPoint>> {
        let a = &self.axes;
        let lengths = Self::axis(&a.fiber_length, self.link.length);
        let lws = Self::axis(&a.linewidths, (self.link.tx_linewidth, self.link.lo_linewidth));
        let osnrs = Self::axis(&a.osnr_db, self.link.osnr_db);
        let eqs = Self::axis(&a.equalizer, self.dsp.base.equalizer);
        let cprs = Self::axis(&a.cpr, self.dsp.cpr_name.clone());
        let blocks = Self::axis(&a.block_size, self.dsp.block_size);
        let steps = Self::axis(&a.step_size, self.dsp.step_size);
        let mut out = Vec::new();
        for &length in &lengths {
            for &(tx, lo) in &lws {
                for &osnr_db in &osnrs {
                    for &equalizer in &eqs {
                        for cpr_name in &cprs {
                            for &block_size in &blocks {
                                for &step_size in &steps {
                                    let cpr = CprKind::parse(cpr_name, step_size, block_size)
                                        .ok_or_else(|| HarnessError::config("cpr", format!("unknown CPR `{cpr_name}`")))?;
                                    out.push(GridPoint {
                                        link: LinkSpec {
                                            length,
                                            tx_linewidth: tx,
                                            lo_linewidth: lo,
                                            osnr_db,
                                            ..self.link
                                        },
                                        dsp: DspChainSpec {
                                            equalizer,
                                            cpr,
                                            ..self.dsp.base
                                        },
                                        block_size,
                                        step_size,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> HarnessResult<T> {
    v.trim().parse().map_err(|_| HarnessError::config(key, format!("cannot parse `{}`", v.trim())))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> HarnessResult<Vec<T>> {
    split_list(v).map(|s| parse_num(key, s)).collect()
}

fn parse_equalizer(key: &str, v: &str) -> HarnessResult<Equalizer> {
    Equalizer::parse(v).ok_or_else(|| {
        HarnessError::config(key, format!("unknown equalizer `{}` (tde, fde, lms, dcf, fbg, none)", v.trim()))
    })
}

fn parse_cpr_name(key: &str, v: &str) -> HarnessResult<String> {
    let name = v.trim().to_ascii_lowercase();
    match CprKind::parse(&name, 0.1, 1) {
        Some(_) => Ok(name),
        None => Err(HarnessError::config(key, format!("unknown CPR `{}` (nlms, bwa, vv, none)", v.trim()))),
    }
}

fn apply_link_key(link: &mut LinkSpec, k: &str, v: &str) -> HarnessResult<()> {
    match k {
        "symbol_rate_gbd" => link.symbol_rate = parse_num::<f64>(k, v)? * 1e9,
        "wavelength_nm" => link.wavelength = parse_num::<f64>(k, v)? * 1e-9,
        "dispersion_ps_nm_km" => link.dispersion = ps_per_nm_km(parse_num(k, v)?),
        "fiber_length_km" => link.length = parse_num::<f64>(k, v)? * 1e3,
        "tx_linewidth_hz" => link.tx_linewidth = parse_num(k, v)?,
        "lo_linewidth_hz" => link.lo_linewidth = parse_num(k, v)?,
        "osnr_db" => link.osnr_db = parse_num(k, v)?,
        "samples_per_symbol" => link.samples_per_symbol = parse_num(k, v)?,
        "lpf_order" => link.frontend.lpf_order = parse_num(k, v)?,
        "lpf_3db_ghz" => link.frontend.lpf_3db = parse_num::<f64>(k, v)? * 1e9,
        "adc_bits" => link.frontend.adc_bits = parse_num(k, v)?,
        "adc_clip_sigma" => link.frontend.adc_clip_sigma = parse_num(k, v)?,
        _ => return Err(HarnessError::config(format!("link.{k}"), "unknown key")),
    }
    Ok(())
}

/// Parses `key=value` pairs separated by commas or whitespace, using the
/// `[link]` keys, on top of the default link.
pub fn parse_link_params(s: &str) -> HarnessResult<LinkSpec> {
    let mut link = LinkSpec::default();
    for item in s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| HarnessError::config(item, "expected key=value"))?;
        apply_link_key(&mut link, k.trim(), v)?;
    }
    link.validate()?;
    Ok(link)
}
