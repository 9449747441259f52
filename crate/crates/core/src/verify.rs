//! The invariant and lemma suite behind `annihilate verify`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::comparison::{
    biased_displacement, coupled_core_walk, coupon_collector_threshold, coupon_uncollected,
    matched_displacement, CouponParams,
};
use crate::dynamics::{extinction_times, run_trials, verify_master_identity, SimulationParams};
use crate::error::Result;
use crate::experiment::trial_seeds;
use crate::laws::{displacement_mean_exact, one_type_complete_law, one_type_star_law, two_type_p1_law, GeometricSumLaw};
use crate::state::{GraphKind, Topology};
use crate::stats::{bound_check, dkw_equality_test, dominance_check, SampleSummary, TestVerdict, VerdictKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteSize {
    Quick,
    Full,
}

impl SuiteSize {
    fn pick<T>(self, quick: T, full: T) -> T {
        match self {
            SuiteSize::Quick => quick,
            SuiteSize::Full => full,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub verdict: TestVerdict,
}

const ALPHA: f64 = 0.01;

fn to_f64(xs: &[u64]) -> Vec<f64> {
    xs.iter().map(|&x| x as f64).collect()
}

fn law_samples(law: &GeometricSumLaw, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    to_f64(&law.samples(count, &mut rng))
}

fn pathwise(name: &str, violations: usize, runs: usize) -> TestVerdict {
    TestVerdict {
        kind: VerdictKind::BoundCheck,
        statistic: violations as f64,
        threshold: 0.0,
        pass: violations == 0,
        details: format!("{name}: {violations} violations in {runs} runs"),
    }
}

fn law_equality(params: &SimulationParams, law: &GeometricSumLaw, trials: u32, seed: u64) -> Result<TestVerdict> {
    let sim = extinction_times(&run_trials(params, &trial_seeds(seed, 0, trials)))?;
    dkw_equality_test(&to_f64(&sim), &law_samples(law, trials as usize, seed ^ 1), ALPHA)
}

/// Runs the suite on the current rayon pool.
pub fn run_suite(size: SuiteSize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let mut push = |name: &'static str, verdict: TestVerdict| out.push(CheckResult { name, verdict });

    let trials = size.pick(4_000, 20_000);
    let k8 = Topology::complete(4)?;
    let s8 = Topology::star(4)?;
    push(
        "one_type_complete_law",
        law_equality(&SimulationParams::one_type(k8), &one_type_complete_law(4)?, trials, seed)?,
    );
    push(
        "one_type_star_law",
        law_equality(&SimulationParams::one_type(s8), &one_type_star_law(4)?, trials, seed + 1)?,
    );
    push(
        "p1_complete_law",
        law_equality(
            &SimulationParams::two_type(k8, 1.0)?,
            &two_type_p1_law(GraphKind::Complete, 4)?,
            trials,
            seed + 2,
        )?,
    );
    push(
        "p1_star_law",
        law_equality(
            &SimulationParams::two_type(s8, 1.0)?,
            &two_type_p1_law(GraphKind::Star, 4)?,
            trials,
            seed + 3,
        )?,
    );

    // Master identity and the 2n floor.
    let runs = size.pick(200, 1_000);
    let star100 = Topology::star(100)?;
    let mut violations = 0;
    let mut floor_violations = 0;
    for (k, p) in [0.5, 0.9].into_iter().enumerate() {
        let params = SimulationParams::two_type(star100, p)?.with_series(true);
        for traj in run_trials(&params, &trial_seeds(seed + 10, k as u32, runs)) {
            if !verify_master_identity(&traj)?.holds {
                violations += 1;
            }
            if traj.time()? < 200 {
                floor_violations += 1;
            }
        }
    }
    push("master_identity", pathwise("A_t = 2n - t + C_t + 2M_t", violations, 2 * runs as usize));
    push("star_floor", pathwise("T >= 2n", floor_violations, 2 * runs as usize));

    // Coupling.
    let params = SimulationParams::two_type(star100, 0.5)?.with_series(true);
    let trajs = run_trials(&params, &trial_seeds(seed + 20, 0, runs));
    let broken = trajs
        .par_iter()
        .filter(|traj| {
            let mut coin = ChaCha8Rng::seed_from_u64(traj.seed ^ 0xc0ffee);
            coupled_core_walk(traj, &mut coin).is_err()
        })
        .count();
    push("core_coupling", pathwise("C_t <= D'_t + 1", broken, runs as usize));

    // Complete-graph lower and upper regimes.
    let n_k = size.pick(50, 100);
    let k_trials = size.pick(2_000, 10_000);
    let complete = Topology::complete(n_k)?;
    let floor_law = two_type_p1_law(GraphKind::Complete, n_k)?;
    let nf = n_k as f64;
    for (k, p) in [0.5, 0.75].into_iter().enumerate() {
        let trajs = run_trials(
            &SimulationParams::two_type(complete, p)?,
            &trial_seeds(seed + 30, k as u32, k_trials),
        );
        let times = to_f64(&extinction_times(&trajs)?);
        let lower = law_samples(&floor_law, k_trials as usize, seed + 31 + k as u64);
        push(
            if k == 0 { "complete_dominance_p0.5" } else { "complete_dominance_p0.75" },
            dominance_check(&times, &lower, ALPHA)?,
        );
        let summary: SampleSummary = times.iter().copied().collect();
        let hi = 20.0 * nf * nf.ln().powi(2) / nf.ln().ln();
        push(
            if k == 0 { "complete_upper_p0.5" } else { "complete_upper_p0.75" },
            bound_check(&summary, None, Some(hi), 3.0),
        );
    }

    // Universal bounds on the star.
    let n_s = size.pick(100, 200);
    let s_trials = size.pick(2_000, 10_000);
    let star = Topology::star(n_s)?;
    for (k, p) in [0.6, 0.75, 0.9].into_iter().enumerate() {
        let times = extinction_times(&run_trials(
            &SimulationParams::two_type(star, p)?,
            &trial_seeds(seed + 40, k as u32, s_trials),
        ))?;
        let summary: SampleSummary = times.iter().map(|&t| t as f64).collect();
        let n = n_s as f64;
        let lo = (2.0 + (2.0 * p - 1.0) / 2.0) * n - 1.0;
        let hi = 2.0 * n / (1.0 - p);
        let name = match k {
            0 => "star_p_bounds_0.6",
            1 => "star_p_bounds_0.75",
            _ => "star_p_bounds_0.9",
        };
        push(name, bound_check(&summary, Some(lo), Some(hi), 3.0));
    }

    // M_2n against D_2n from matched sign streams.
    let m_runs = size.pick(2_000, 10_000);
    for (k, p) in [0.5, 0.8].into_iter().enumerate() {
        let params = SimulationParams::two_type(star100, p)?.with_series(true);
        let trajs = run_trials(&params, &trial_seeds(seed + 50, k as u32, m_runs));
        let mut diff = SampleSummary::new();
        for traj in &trajs {
            let m = traj.series()?.m[200] as f64;
            diff.push(m - matched_displacement(traj, 200)? as f64 / 8.0);
        }
        push(
            if k == 0 { "m_bound_p0.5" } else { "m_bound_p0.8" },
            bound_check(&diff, Some(-1.0), None, 3.0),
        );
    }

    // Displacement mean: exact vs Monte Carlo, and E D_t <= sqrt(t).
    let t = size.pick(2_000u64, 20_000);
    let d_trials = size.pick(4_000u32, 10_000);
    let exact = displacement_mean_exact(t)?;
    let ds: SampleSummary = trial_seeds(seed + 60, 0, d_trials)
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            biased_displacement(t, 0.5, &mut rng).map(|d| d as f64)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .collect();
    push("displacement_exact_mean", bound_check(&ds, Some(exact), Some(exact), 3.0));
    let sqrt_ok = (1..=t / 2).all(|m| displacement_mean_exact(2 * m).is_ok_and(|e| e <= ((2 * m) as f64).sqrt()));
    push(
        "displacement_sqrt_bound",
        TestVerdict {
            kind: VerdictKind::BoundCheck,
            statistic: exact,
            threshold: (t as f64).sqrt(),
            pass: sqrt_ok,
            details: format!("E D_t <= sqrt(t) for every even t <= {t}"),
        },
    );

    // Coupon processes.
    let c1_trials = size.pick(300u32, 1_000);
    let c1 = CouponParams::new(10_000, 0.99).with_epsilon(0.5);
    let cut = 2.0 * (1.0 - c1.epsilon) * c1.t_p();
    let below = trial_seeds(seed + 70, 0, c1_trials)
        .par_iter()
        .map(|&s| coupon_collector_threshold(&c1, &mut ChaCha8Rng::seed_from_u64(s)))
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .filter(|&x| x as f64 <= cut)
        .count();
    let frac = below as f64 / c1_trials as f64;
    push(
        "coupon_threshold",
        TestVerdict {
            kind: VerdictKind::BoundCheck,
            statistic: frac,
            threshold: 0.1,
            pass: frac <= 0.1,
            details: format!("P(T' <= {cut:.0}) over {c1_trials} draws"),
        },
    );
    let c2_trials = size.pick(1_000u32, 10_000);
    let c2 = CouponParams::new(10_000, 0.995).with_r(5.0);
    let limit = (1.0 - c2.p) * c2.n as f64;
    let over = trial_seeds(seed + 80, 0, c2_trials)
        .par_iter()
        .map(|&s| coupon_uncollected(&c2, &mut ChaCha8Rng::seed_from_u64(s)))
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .filter(|&v| v as f64 >= limit)
        .count();
    let frac = over as f64 / c2_trials as f64;
    push(
        "coupon_uncollected",
        TestVerdict {
            kind: VerdictKind::BoundCheck,
            statistic: frac,
            threshold: 0.01,
            pass: frac <= 0.01,
            details: format!("P(V >= {limit:.0}) over {c2_trials} draws"),
        },
    );

    Ok(out)
}
