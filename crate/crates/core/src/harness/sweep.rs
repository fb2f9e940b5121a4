//! Parameter sweeps over an experiment grid.

use rayon::prelude::*;

use super::config::{ExperimentConfig, GridPoint};
use super::table::{sig9, Table, RESULT_COLUMNS};
use super::{HarnessError, HarnessResult};
use crate::analytics::phase_noise_budget;
use crate::rng::TrialRng;
use crate::sim::{run_trial, CprKind};

/// One trial of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub grid_index: usize,
    pub trial: usize,
    /// Trial key the random streams were derived from.
    pub seed: u64,
    pub fiber_length_km: f64,
    pub tx_linewidth_hz: f64,
    pub lo_linewidth_hz: f64,
    pub osnr_db: f64,
    pub equalizer: String,
    pub cpr: String,
    pub block_size: usize,
    pub step_size: f64,
    pub effective_linewidth_hz: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub cycle_slips: usize,
    pub lms_diverged: bool,
}

impl ResultRow {
    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.scenario.clone(),
            self.grid_index.to_string(),
            self.trial.to_string(),
            self.seed.to_string(),
            sig9(self.fiber_length_km),
            sig9(self.tx_linewidth_hz),
            sig9(self.lo_linewidth_hz),
            sig9(self.osnr_db),
            self.equalizer.clone(),
            self.cpr.clone(),
            self.block_size.to_string(),
            sig9(self.step_size),
            sig9(self.effective_linewidth_hz),
            self.bit_errors.to_string(),
            self.bits.to_string(),
            sig9(self.ber),
            self.cycle_slips.to_string(),
            self.lms_diverged.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<ResultRow>,
}

impl SweepTable {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&RESULT_COLUMNS);
        for r in &self.rows {
            t.push(r.to_record());
        }
        t
    }

    pub fn any_diverged(&self) -> bool {
        self.rows.iter().any(|r| r.lms_diverged)
    }
}

fn run_point(cfg: &ExperimentConfig, grid_index: usize, p: &GridPoint, trial: usize) -> HarnessResult<ResultRow> {
    let rng = TrialRng::from_indices(cfg.master_seed, grid_index as u64, trial as u64);
    let res = run_trial(&p.link, &p.dsp, &rng)?;
    let budget = phase_noise_budget(&p.link, 0.0)?;
    // Only report the knob that the chosen CPR actually uses.
    let (block_size, step_size) = match p.dsp.cpr {
        CprKind::Nlms { step_size } => (0, step_size),
        CprKind::Bwa { block_size } | CprKind::Vv { block_size } => (block_size, 0.0),
        CprKind::None => (0, 0.0),
    };
    Ok(ResultRow {
        scenario: cfg.name.clone(),
        grid_index,
        trial,
        seed: rng.key(),
        fiber_length_km: p.link.length / 1e3,
        tx_linewidth_hz: p.link.tx_linewidth,
        lo_linewidth_hz: p.link.lo_linewidth,
        osnr_db: p.link.osnr_db,
        equalizer: p.dsp.equalizer.name().to_string(),
        cpr: p.dsp.cpr.name().to_string(),
        block_size,
        step_size,
        effective_linewidth_hz: budget.effective_linewidth,
        bit_errors: res.pooled.bit_errors,
        bits: res.pooled.bits_compared,
        ber: res.pooled.ber,
        cycle_slips: res.cycle_slips,
        lms_diverged: res.lms_diverged,
    })
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> HarnessResult<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::config("jobs", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every trial of every grid point. Rows come out in grid order, then
/// trial order, whatever the thread count.
pub fn run_sweep(cfg: &ExperimentConfig, jobs: Option<usize>) -> HarnessResult<SweepTable> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let work: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..cfg.trials).map(move |t| (g, t)))
        .collect();
    let rows = with_jobs(jobs, || {
        work.par_iter()
            .map(|&(g, t)| run_point(cfg, g, &grid[g], t))
            .collect::<HarnessResult<Vec<_>>>()
    })??;
    Ok(SweepTable { rows })
}

pub fn run_sweeps(cfgs: &[ExperimentConfig], jobs: Option<usize>) -> HarnessResult<SweepTable> {
    let mut out = SweepTable::default();
    for c in cfgs {
        out.rows.extend(run_sweep(c, jobs)?.rows);
    }
    Ok(out)
}
