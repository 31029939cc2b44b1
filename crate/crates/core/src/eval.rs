//! Per-axis error metrics and multi-scenario comparisons.

use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::sim::{run_scenario, RunLog, ScenarioConfig, TickRecord};
use crate::state::angle_diff;

pub const AXES: [&str; 6] = ["x", "y", "z", "roll", "pitch", "yaw"];

/// Mean squared pose error per axis (m² for position, rad² for angles).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunMetrics {
    pub mse_x: f64,
    pub mse_y: f64,
    pub mse_z: f64,
    pub mse_roll: f64,
    pub mse_pitch: f64,
    pub mse_yaw: f64,
    pub samples: usize,
}

impl RunMetrics {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.mse_x,
            self.mse_y,
            self.mse_z,
            self.mse_roll,
            self.mse_pitch,
            self.mse_yaw,
        ]
    }

    fn from_array(a: [f64; 6], samples: usize) -> Self {
        RunMetrics {
            mse_x: a[0],
            mse_y: a[1],
            mse_z: a[2],
            mse_roll: a[3],
            mse_pitch: a[4],
            mse_yaw: a[5],
            samples,
        }
    }
}

/// Pose error at one tick; angles along the shortest arc.
pub fn pose_error(tick: &TickRecord) -> [f64; 6] {
    let truth = tick.truth.pose();
    let est = tick.estimate.pose();
    let mut e = [0.0; 6];
    for i in 0..3 {
        e[i] = est[i] - truth[i];
    }
    for i in 3..6 {
        e[i] = angle_diff(est[i], truth[i]);
    }
    e
}

/// Mean squared error over every filter tick.
pub fn mse_per_axis(log: &RunLog) -> Result<RunMetrics> {
    if log.ticks.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut sum = [0.0; 6];
    for tick in &log.ticks {
        for (s, e) in sum.iter_mut().zip(pose_error(tick)) {
            *s += e * e;
        }
    }
    let n = log.ticks.len();
    Ok(RunMetrics::from_array(sum.map(|s| s / n as f64), n))
}

/// Normalized estimation error squared of the position block, per tick.
pub fn position_nees(log: &RunLog) -> Vec<f64> {
    log.ticks
        .iter()
        .map(|tick| {
            let e = tick.estimate.position() - tick.truth.position();
            match tick.position_covariance.cholesky() {
                Some(chol) => e.dot(&chol.solve(&e)),
                None => f64::INFINITY,
            }
        })
        .collect()
}

/// Aggregate of one metric cell across seeds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    /// One entry per seed, in seed order.
    pub runs: Vec<(u64, RunMetrics)>,
    pub stats: [CellStats; 6],
}

impl ComparisonRow {
    fn new(label: String, runs: Vec<(u64, RunMetrics)>) -> Self {
        let stats = std::array::from_fn(|axis| {
            let vals: Vec<f64> = runs.iter().map(|(_, m)| m.as_array()[axis]).collect();
            CellStats {
                mean: vals.iter().sum::<f64>() / vals.len() as f64,
                min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        });
        ComparisonRow { label, runs, stats }
    }

    pub fn mean(&self) -> [f64; 6] {
        self.stats.map(|s| s.mean)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub seeds: Vec<u64>,
}

impl ComparisonReport {
    pub fn row(&self, label: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

/// Runs every config under every seed and aggregates per config.
///
/// Each config's own `seed` is replaced by the seeds given here.
pub fn run_comparison(
    configs: &[ScenarioConfig],
    seeds: &[u64],
    exec: Execution,
) -> Result<ComparisonReport> {
    if configs.is_empty() {
        return Err(Error::invalid("experiment.configs", "at least one config is required"));
    }
    if seeds.is_empty() {
        return Err(Error::invalid("experiment.seeds", "at least one seed is required"));
    }
    let cells: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|c| seeds.iter().map(move |&s| (c, s)))
        .collect();

    let results = exec.map(&cells, |&(c, seed)| {
        let cfg = ScenarioConfig {
            seed,
            ..configs[c].clone()
        };
        run_scenario(&cfg)
            .and_then(|log| mse_per_axis(&log))
            .map_err(|e| Error::Scenario {
                label: cfg.label.clone(),
                seed,
                source: Box::new(e),
            })
    });

    let mut results = results.into_iter();
    let mut rows = Vec::with_capacity(configs.len());
    for cfg in configs {
        let mut runs = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let metrics = results.next().expect("one result per cell")?;
            runs.push((seed, metrics));
        }
        rows.push(ComparisonRow::new(cfg.label.clone(), runs));
    }
    Ok(ComparisonReport {
        rows,
        seeds: seeds.to_vec(),
    })
}
