//! Full trajectories of the four systems (one/two-type on `K_2n` / `S_2n`).
//!
//! A trajectory always keeps its summary counters; the per-step series
//! (`A_t`, `C_t`, `M_t`, `Z_t`, ...) are only stored on request since long
//! sweeps would otherwise be dominated by them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_probability, Error, Result};
use crate::state::{Coloring, Configuration, GraphKind, SystemKind, Topology};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum StepLimit {
    /// `10 n (1 + ceil(ln 2n)) / (1 - p)`, unbounded when `p = 1`.
    #[default]
    Default,
    Steps(u64),
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationParams {
    pub topology: Topology,
    pub system: SystemKind,
    pub p: f64,
    pub step_limit: StepLimit,
    pub record_series: bool,
    pub coloring: Coloring,
}

impl SimulationParams {
    pub fn new(topology: Topology, system: SystemKind, p: f64) -> Result<Self> {
        let params = SimulationParams {
            topology,
            system,
            p,
            step_limit: StepLimit::Default,
            record_series: false,
            coloring: Coloring::default(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn one_type(topology: Topology) -> Self {
        SimulationParams::new(topology, SystemKind::OneType, 0.5).expect("valid one-type params")
    }

    pub fn two_type(topology: Topology, p: f64) -> Result<Self> {
        SimulationParams::new(topology, SystemKind::TwoType, p)
    }

    pub fn with_series(mut self, record: bool) -> Self {
        self.record_series = record;
        self
    }

    pub fn with_coloring(mut self, coloring: Coloring) -> Self {
        self.coloring = coloring;
        self
    }

    pub fn with_step_limit(mut self, limit: StepLimit) -> Self {
        self.step_limit = limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.p, 0.5, 1.0, "[1/2, 1]")?;
        if self.system == SystemKind::OneType && self.p != 0.5 {
            return Err(Error::InvalidParameter(
                "one-type systems take p = 1/2 (speed is meaningless there)".into(),
            ));
        }
        if self.step_limit == StepLimit::Steps(0) {
            return Err(Error::InvalidParameter("max_steps must be at least 1".into()));
        }
        Ok(())
    }

    /// Resolved step cap; `None` means unbounded.
    pub fn max_steps(&self) -> Option<u64> {
        match self.step_limit {
            StepLimit::Steps(s) => Some(s),
            StepLimit::Unbounded => None,
            StepLimit::Default => {
                if self.p >= 1.0 {
                    return None;
                }
                let n = self.topology.n() as f64;
                let log_term = (2.0 * n).ln().ceil();
                Some((10.0 * n * (1.0 + log_term) / (1.0 - self.p)).ceil() as u64)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extinction {
    Reached(u64),
    NotReached { steps: u64 },
}

/// Per-step records. Index `t` of `a`, `c`, `m` is the state after `t`
/// steps; index `k` of `signs` and `from_core` describes step `k + 1`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Series {
    pub a: Vec<u32>,
    /// Core count `C_t` (star only, empty on the complete graph).
    pub c: Vec<u32>,
    /// Core departures without collision `M_t` (star only).
    pub m: Vec<u32>,
    /// `Z_t`: `+1` when blue was sampled, `-1` for red. One-type systems
    /// record `+1` throughout.
    pub signs: Vec<i8>,
    /// Whether the step's mover started at the core (star only).
    pub from_core: Vec<bool>,
    pub collision_times: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub n: usize,
    pub graph: GraphKind,
    pub system: SystemKind,
    pub p: f64,
    pub extinction: Extinction,
    pub collisions: u64,
    /// `M_t` at the last step taken.
    pub final_m: u64,
    /// Largest site count ever observed.
    pub max_occupancy: u32,
    pub series: Option<Series>,
}

impl Trajectory {
    pub fn extinction_time(&self) -> Option<u64> {
        match self.extinction {
            Extinction::Reached(t) => Some(t),
            Extinction::NotReached { .. } => None,
        }
    }

    /// Extinction time, or [`Error::NotReached`].
    pub fn time(&self) -> Result<u64> {
        match self.extinction {
            Extinction::Reached(t) => Ok(t),
            Extinction::NotReached { steps } => Err(Error::NotReached { steps }),
        }
    }

    pub fn steps(&self) -> u64 {
        match self.extinction {
            Extinction::Reached(t) => t,
            Extinction::NotReached { steps } => steps,
        }
    }

    pub fn series(&self) -> Result<&Series> {
        self.series.as_ref().ok_or(Error::MissingSeries)
    }
}

/// Runs one trajectory to extinction (or the step cap). Deterministic in
/// `(params, seed)`.
pub fn run_trajectory(params: &SimulationParams, seed: u64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topology = params.topology;
    let mut config = Configuration::new(topology, params.system, params.coloring, &mut rng);
    let is_star = topology.kind() == GraphKind::Star;
    let limit = params.max_steps().unwrap_or(u64::MAX);

    let mut series = params.record_series.then(|| {
        let mut s = Series::default();
        s.a.push(config.total() as u32);
        if is_star {
            s.c.push(0);
            s.m.push(0);
        }
        s
    });

    let mut t = 0u64;
    let mut m = 0u64;
    let mut collisions = 0u64;
    let mut max_occupancy = if config.is_empty() { 0 } else { 1 };

    while !config.is_empty() && t < limit {
        let mover = config.sample_mover(params.p, &mut rng);
        let out = config.move_and_resolve(mover, &mut rng);
        t += 1;
        if out.collided {
            collisions += 1;
        } else {
            max_occupancy = max_occupancy.max(config.count_at(out.moved_to) as u32);
        }
        if out.core_departure_without_collision {
            m += 1;
        }
        if let Some(s) = series.as_mut() {
            s.a.push(config.total() as u32);
            s.signs.push(mover.color.sign());
            if out.collided {
                s.collision_times.push(t);
            }
            if is_star {
                s.c.push(config.core_count() as u32);
                s.m.push(m as u32);
                s.from_core.push(topology.is_core(out.from));
            }
        }
    }

    let extinction = if config.is_empty() {
        Extinction::Reached(t)
    } else {
        Extinction::NotReached { steps: t }
    };
    Trajectory {
        seed,
        n: topology.n(),
        graph: topology.kind(),
        system: params.system,
        p: params.p,
        extinction,
        collisions,
        final_m: m,
        max_occupancy,
        series,
    }
}

/// Runs one trajectory per seed on the current rayon pool; output order
/// follows `seeds`.
pub fn run_trials(params: &SimulationParams, seeds: &[u64]) -> Vec<Trajectory> {
    seeds.par_iter().map(|&s| run_trajectory(params, s)).collect()
}

/// Extinction times of a batch, failing on the first `NotReached`.
pub fn extinction_times(trajectories: &[Trajectory]) -> Result<Vec<u64>> {
    trajectories.iter().map(Trajectory::time).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityReport {
    pub holds: bool,
    pub first_violation: Option<u64>,
}

/// Checks `A_t = 2n - t + C_t + 2 M_t` at every recorded step of a star
/// trajectory, together with the floor `A_t >= 2n - t` for `t <= 2n`.
pub fn verify_master_identity(trajectory: &Trajectory) -> Result<IdentityReport> {
    if trajectory.graph != GraphKind::Star {
        return Err(Error::NotStar);
    }
    let s = trajectory.series()?;
    let two_n = 2 * trajectory.n as i64;
    let horizon = trajectory.steps() as usize;
    for t in 0..=horizon {
        let (a, c, m) = (s.a[t] as i64, s.c[t] as i64, s.m[t] as i64);
        let t_i = t as i64;
        let identity = a == two_n - t_i + c + 2 * m;
        let floor = t_i > two_n || a >= two_n - t_i;
        if !(identity && floor) {
            return Ok(IdentityReport {
                holds: false,
                first_violation: Some(t as u64),
            });
        }
    }
    Ok(IdentityReport {
        holds: true,
        first_violation: None,
    })
}

/// Largest site count over the whole trajectory.
pub fn max_occupancy(trajectory: &Trajectory) -> u32 {
    trajectory.max_occupancy
}
