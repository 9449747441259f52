//! Seeded experiment points, sweeps over `(n, p)` grids and CSV records.
//!
//! Trial seeds are `base_seed ^ mix(point_index, trial_index)` where `mix`
//! is the SplitMix64 finaliser applied to `(point << 32) | trial`. This
//! mapping is part of the output contract: partial re-runs of a grid
//! reproduce the original rows.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::{run_trials, SimulationParams, StepLimit, Trajectory};
use crate::error::{Error, Result};
use crate::laws::{one_type_complete_law, one_type_star_law, two_type_p1_law, GeometricSumLaw};
use crate::state::{Coloring, CompleteKernel, GraphKind, SystemKind, Topology};
use crate::stats::{bound_check, SampleSummary, DEFAULT_SLACK_SIGMAS};

pub const CSV_HEADER: [&str; 12] = [
    "system",
    "topology",
    "n",
    "p",
    "trials",
    "mean_T",
    "stderr_T",
    "mean_M",
    "mean_maxocc",
    "verdicts",
    "seed",
    "wall_ms",
];

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn trial_seed(base_seed: u64, point_index: u32, trial_index: u32) -> u64 {
    base_seed ^ splitmix64(((point_index as u64) << 32) | trial_index as u64)
}

pub fn trial_seeds(base_seed: u64, point_index: u32, trials: u32) -> Vec<u64> {
    (0..trials).map(|t| trial_seed(base_seed, point_index, t)).collect()
}

fn default_trials() -> u32 {
    1000
}

fn default_p_grid() -> Vec<f64> {
    vec![0.5]
}

/// Sweep configuration, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub system: SystemKind,
    pub topology: GraphKind,
    pub n_grid: Vec<usize>,
    #[serde(default = "default_p_grid")]
    pub p_grid: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default)]
    pub base_seed: u64,
    /// CSV files every row is appended to.
    #[serde(default)]
    pub outputs: Vec<PathBuf>,
    #[serde(default)]
    pub record_series: bool,
    #[serde(default)]
    pub max_steps: Option<u64>,
    #[serde(default)]
    pub coloring: Coloring,
    #[serde(default)]
    pub kernel: CompleteKernel,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.p_grid.is_empty() {
            return Err(Error::InvalidParameter("n_grid and p_grid must be nonempty".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        for point in self.points() {
            point.params()?;
        }
        Ok(())
    }

    /// Grid points in row order: `n` outer, `p` inner.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for &n in &self.n_grid {
            for &p in &self.p_grid {
                out.push(Point {
                    index: out.len() as u32,
                    system: self.system,
                    graph: self.topology,
                    n,
                    p,
                    trials: self.trials,
                    base_seed: self.base_seed,
                    record_series: self.record_series,
                    max_steps: self.max_steps,
                    coloring: self.coloring,
                    kernel: self.kernel,
                });
            }
        }
        out
    }
}

/// One experiment point of a sweep (or a single `simulate` run).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub index: u32,
    pub system: SystemKind,
    pub graph: GraphKind,
    pub n: usize,
    pub p: f64,
    pub trials: u32,
    pub base_seed: u64,
    pub record_series: bool,
    pub max_steps: Option<u64>,
    pub coloring: Coloring,
    pub kernel: CompleteKernel,
}

impl Point {
    pub fn params(&self) -> Result<SimulationParams> {
        let topology = Topology::new(self.graph, self.n)?.with_kernel(self.kernel);
        let limit = self.max_steps.map_or(StepLimit::Default, StepLimit::Steps);
        Ok(SimulationParams::new(topology, self.system, self.p)?
            .with_series(self.record_series)
            .with_step_limit(limit)
            .with_coloring(self.coloring))
    }
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub point: Point,
    pub trajectories: Vec<Trajectory>,
    pub time: SampleSummary,
    pub m: SampleSummary,
    pub occupancy: SampleSummary,
    pub not_reached: usize,
    pub verdicts: Vec<(String, bool)>,
    pub wall_ms: u128,
}

impl PointResult {
    pub fn record(&self) -> ResultRecord {
        ResultRecord {
            system: self.point.system.as_str().to_string(),
            topology: self.point.graph.as_str().to_string(),
            n: self.point.n,
            p: self.point.p,
            trials: self.point.trials,
            mean_t: self.time.mean(),
            stderr_t: self.time.stderr(),
            mean_m: self.m.mean(),
            mean_maxocc: self.occupancy.mean(),
            verdicts: self
                .verdicts
                .iter()
                .map(|(name, ok)| format!("{name}={}", if *ok { "pass" } else { "fail" }))
                .collect::<Vec<_>>()
                .join(";"),
            seed: self.point.base_seed,
            wall_ms: self.wall_ms,
        }
    }
}

/// Runs every trial of a point on the current rayon pool.
pub fn run_point(point: &Point) -> Result<PointResult> {
    let params = point.params()?;
    let start = Instant::now();
    let trajectories = run_trials(&params, &trial_seeds(point.base_seed, point.index, point.trials));
    let mut time = SampleSummary::new();
    let mut m = SampleSummary::new();
    let mut occupancy = SampleSummary::new();
    let mut not_reached = 0;
    for traj in &trajectories {
        match traj.extinction_time() {
            Some(t) => time.push(t as f64),
            None => not_reached += 1,
        }
        m.push(traj.final_m as f64);
        occupancy.push(traj.max_occupancy as f64);
    }
    let verdicts = point_verdicts(point, &trajectories, &time, not_reached)?;
    Ok(PointResult {
        point: *point,
        trajectories,
        time,
        m,
        occupancy,
        not_reached,
        verdicts,
        wall_ms: start.elapsed().as_millis(),
    })
}

fn exact_law(point: &Point) -> Result<Option<GeometricSumLaw>> {
    if point.graph == GraphKind::Complete && point.kernel != CompleteKernel::Uniform {
        return Ok(None);
    }
    Ok(match (point.system, point.graph) {
        (SystemKind::OneType, GraphKind::Complete) => Some(one_type_complete_law(point.n)?),
        (SystemKind::OneType, GraphKind::Star) => Some(one_type_star_law(point.n)?),
        (SystemKind::TwoType, g) if point.p == 1.0 => Some(two_type_p1_law(g, point.n)?),
        _ => None,
    })
}

/// Checks applicable to one point: exact-law means, the complete-graph
/// lower and upper regimes, and the star's floor and universal bounds.
fn point_verdicts(
    point: &Point,
    trajectories: &[Trajectory],
    time: &SampleSummary,
    not_reached: usize,
) -> Result<Vec<(String, bool)>> {
    let mut out = vec![("extinct".to_string(), not_reached == 0)];
    let n = point.n as f64;
    if time.count() >= 30 {
        if let Some(law) = exact_law(point)? {
            let v = bound_check(time, Some(law.mean()), Some(law.mean()), DEFAULT_SLACK_SIGMAS);
            out.push(("exact_mean".into(), v.pass));
        }
    }
    if point.system == SystemKind::TwoType {
        match point.graph {
            GraphKind::Star => {
                let floor = trajectories
                    .iter()
                    .filter_map(Trajectory::extinction_time)
                    .all(|t| t >= 2 * point.n as u64);
                out.push(("floor_2n".into(), floor));
                if point.p > 0.5 && point.p < 1.0 && time.count() >= 30 {
                    let lo = (2.0 + (2.0 * point.p - 1.0) / 2.0) * n - 1.0;
                    let hi = 2.0 * n / (1.0 - point.p);
                    let v = bound_check(time, Some(lo), Some(hi), DEFAULT_SLACK_SIGMAS);
                    out.push(("p_bounds".into(), v.pass));
                }
            }
            GraphKind::Complete if point.kernel == CompleteKernel::Uniform && time.count() >= 30 => {
                let lower = two_type_p1_law(GraphKind::Complete, point.n)?.mean();
                out.push((
                    "klb_mean".into(),
                    bound_check(time, Some(lower), None, DEFAULT_SLACK_SIGMAS).pass,
                ));
                if point.n >= 16 {
                    let hi = 20.0 * n * n.ln().powi(2) / n.ln().ln();
                    out.push((
                        "kub_mean".into(),
                        bound_check(time, None, Some(hi), DEFAULT_SLACK_SIGMAS).pass,
                    ));
                }
            }
            GraphKind::Complete => {}
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub system: String,
    pub topology: String,
    pub n: usize,
    pub p: f64,
    pub trials: u32,
    #[serde(rename = "mean_T")]
    pub mean_t: f64,
    #[serde(rename = "stderr_T")]
    pub stderr_t: f64,
    #[serde(rename = "mean_M")]
    pub mean_m: f64,
    pub mean_maxocc: f64,
    pub verdicts: String,
    pub seed: u64,
    pub wall_ms: u128,
}

/// Appends records to a CSV file, writing the header first when the file
/// is new or empty.
pub fn append_records(path: &Path, records: &[ResultRecord]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let fresh = file.metadata()?.len() == 0;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    if fresh {
        writer.write_record(CSV_HEADER)?;
    }
    for r in records {
        writer.serialize(r)?;
    }
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    file.write_all(&bytes)?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ResultRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let records = reader.deserialize().collect::<std::result::Result<Vec<ResultRecord>, _>>()?;
    Ok(records)
}

/// Runs a full sweep; rows come back in point order.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRecord>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for point in spec.points() {
        rows.push(run_point(&point)?.record());
    }
    for path in &spec.outputs {
        append_records(path, &rows)?;
    }
    Ok(rows)
}
