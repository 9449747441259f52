//! Auxiliary processes compared against the particle systems: the biased
//! sign walk `W_t`/`D_t`, the walk `D'_t` coupled to the star's core count,
//! and two lazy coupon collectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::dynamics::Trajectory;
use crate::error::{check_probability, Error, Result};
use crate::state::GraphKind;

#[inline]
pub fn draw_sign<R: Rng + ?Sized>(p: f64, rng: &mut R) -> i8 {
    if rng.random_bool(p) {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasedWalkPath {
    pub p: f64,
    /// `Z_1..Z_t`.
    pub signs: Vec<i8>,
    /// `W_0..W_t`.
    pub w: Vec<i64>,
    /// `D_0..D_t`.
    pub d: Vec<u64>,
}

impl BiasedWalkPath {
    pub fn from_signs(p: f64, signs: Vec<i8>) -> Self {
        let mut w = Vec::with_capacity(signs.len() + 1);
        w.push(0i64);
        for &z in &signs {
            w.push(w.last().unwrap() + z as i64);
        }
        let d = w.iter().map(|x| x.unsigned_abs()).collect();
        BiasedWalkPath { p, signs, w, d }
    }

    pub fn final_displacement(&self) -> u64 {
        *self.d.last().unwrap()
    }
}

pub fn simulate_biased_walk<R: Rng + ?Sized>(t: u64, p: f64, rng: &mut R) -> Result<BiasedWalkPath> {
    check_probability(p, 0.5, 1.0, "[1/2, 1]")?;
    let signs = (0..t).map(|_| draw_sign(p, rng)).collect();
    Ok(BiasedWalkPath::from_signs(p, signs))
}

/// `D_t` alone, without storing the path.
pub fn biased_displacement<R: Rng + ?Sized>(t: u64, p: f64, rng: &mut R) -> Result<u64> {
    check_probability(p, 0.5, 1.0, "[1/2, 1]")?;
    let w: i64 = (0..t).map(|_| draw_sign(p, rng) as i64).sum();
    Ok(w.unsigned_abs())
}

/// The sign stream `Z_1..Z_horizon` of a recorded trajectory. Steps past
/// extinction are drawn from a separate ChaCha stream of the trajectory's
/// seed, so the extension is reproducible.
pub fn matched_signs(trajectory: &Trajectory, horizon: u64) -> Result<Vec<i8>> {
    let recorded = &trajectory.series()?.signs;
    let mut signs: Vec<i8> = recorded.iter().copied().take(horizon as usize).collect();
    if (signs.len() as u64) < horizon {
        let mut rng = ChaCha8Rng::seed_from_u64(trajectory.seed);
        rng.set_stream(1);
        while (signs.len() as u64) < horizon {
            signs.push(draw_sign(trajectory.p, &mut rng));
        }
    }
    Ok(signs)
}

/// `D_horizon` computed from the trajectory's own sign stream.
pub fn matched_displacement(trajectory: &Trajectory, horizon: u64) -> Result<u64> {
    let w: i64 = matched_signs(trajectory, horizon)?.iter().map(|&z| z as i64).sum();
    Ok(w.unsigned_abs())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoupledWalkPath {
    /// `D'_0..D'_T`.
    pub dprime: Vec<u64>,
}

/// Builds the simple-symmetric-walk displacement `D'_t` from the core
/// counts of a `p = 1/2` star trajectory. `D'` steps up when
///
/// * (a) `D'_t = 0`,
/// * (b) `C_t > 0` and the core gained a particle,
/// * (c) `C_t > 0` and the core lost a particle to a departure,
/// * (d) with probability 1/2 (from `coin`) when `C_t = 0 < D'_t`,
///
/// and steps down otherwise. Fails with [`Error::CouplingViolated`] if
/// `C_t <= D'_t + 1` ever breaks.
pub fn coupled_core_walk<R: Rng + ?Sized>(trajectory: &Trajectory, coin: &mut R) -> Result<CoupledWalkPath> {
    if trajectory.graph != GraphKind::Star {
        return Err(Error::NotStar);
    }
    if trajectory.p != 0.5 {
        return Err(Error::InvalidParameter(format!(
            "coupling needs symmetric speeds, got p = {}",
            trajectory.p
        )));
    }
    let s = trajectory.series()?;
    let steps = trajectory.steps() as usize;
    let mut dprime = Vec::with_capacity(steps + 1);
    dprime.push(0u64);
    for t in 0..steps {
        let d = dprime[t];
        let (c, c_next) = (s.c[t], s.c[t + 1]);
        let up = if d == 0 {
            true
        } else if c > 0 {
            c_next == c + 1 || (c_next + 1 == c && s.from_core[t])
        } else {
            coin.random_bool(0.5)
        };
        let next = if up { d + 1 } else { d - 1 };
        if s.c[t + 1] as u64 > next + 1 {
            return Err(Error::CouplingViolated {
                step: t as u64 + 1,
                core: s.c[t + 1],
                bound: next + 1,
            });
        }
        dprime.push(next);
    }
    Ok(CoupledWalkPath { dprime })
}

/// Coupon collector that idles with probability 1/2 per step and otherwise
/// draws one of `n` coupons uniformly.
#[derive(Debug, Clone)]
pub struct LazyCollector {
    collected: Vec<bool>,
    distinct: usize,
    gate_bits: u64,
    gate_left: u32,
}

impl LazyCollector {
    pub fn new(n: usize) -> Self {
        LazyCollector {
            collected: vec![false; n],
            distinct: 0,
            gate_bits: 0,
            gate_left: 0,
        }
    }

    pub fn coupons(&self) -> usize {
        self.collected.len()
    }

    pub fn distinct(&self) -> usize {
        self.distinct
    }

    pub fn uncollected(&self) -> usize {
        self.collected.len() - self.distinct
    }

    /// One step; returns whether a new coupon was collected.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        if self.gate_left == 0 {
            self.gate_bits = rng.next_u64();
            self.gate_left = 64;
        }
        let active = self.gate_bits & 1 == 1;
        self.gate_bits >>= 1;
        self.gate_left -= 1;
        if !active {
            return false;
        }
        let k = rng.random_range(0..self.collected.len());
        if self.collected[k] {
            false
        } else {
            self.collected[k] = true;
            self.distinct += 1;
            true
        }
    }
}

/// Steps the lazy collector on `n` coupons needs to see `target` distinct
/// ones (0 when `target <= 0`).
pub fn steps_to_collect<R: Rng + ?Sized>(n: usize, target: i64, rng: &mut R) -> u64 {
    if target <= 0 || n == 0 {
        return 0;
    }
    let target = (target as usize).min(n);
    let mut c = LazyCollector::new(n);
    let mut steps = 0u64;
    while c.distinct() < target {
        c.step(rng);
        steps += 1;
    }
    steps
}

/// Coupons still missing after `steps` lazy steps (`n` when `steps <= 0`).
pub fn uncollected_after<R: Rng + ?Sized>(n: usize, steps: i64, rng: &mut R) -> usize {
    if steps <= 0 {
        return n;
    }
    let mut c = LazyCollector::new(n);
    for _ in 0..steps {
        c.step(rng);
        if c.uncollected() == 0 {
            break;
        }
    }
    c.uncollected()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouponParams {
    pub n: usize,
    pub p: f64,
    pub epsilon: f64,
    pub r: f64,
}

impl CouponParams {
    pub fn new(n: usize, p: f64) -> Self {
        CouponParams {
            n,
            p,
            epsilon: 0.5,
            r: 5.0,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    /// `t_p = -n ln(1 - p)`.
    pub fn t_p(&self) -> f64 {
        -(self.n as f64) * (-self.p).ln_1p()
    }

    fn check_common(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::ZeroSize);
        }
        if !(self.p > 0.5 && self.p < 1.0) {
            return Err(Error::Probability {
                value: self.p,
                range: "(1/2, 1)",
            });
        }
        Ok(())
    }

    /// Number of red moves drawn for the threshold collector,
    /// `floor(4 (1 - eps) t_p)`.
    pub fn threshold_trials(&self) -> u64 {
        (4.0 * (1.0 - self.epsilon) * self.t_p()).floor() as u64
    }

    /// Number of blue moves drawn for the uncollected count,
    /// `floor(r t_p)`.
    pub fn uncollected_trials(&self) -> u64 {
        (self.r * self.t_p()).floor() as u64
    }
}

fn binomial<R: Rng + ?Sized>(trials: u64, p: f64, rng: &mut R) -> u64 {
    Binomial::new(trials, p).expect("valid binomial").sample(rng)
}

/// One draw of `T'_p`: `R ~ Bin(floor(4(1 - eps) t_p), 1 - p)`, then the
/// lazy collector runs until it has `n - R` distinct coupons.
pub fn coupon_collector_threshold<R: Rng + ?Sized>(params: &CouponParams, rng: &mut R) -> Result<u64> {
    params.check_common()?;
    if !(params.epsilon > 0.0 && params.epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon {} outside (0, 1)",
            params.epsilon
        )));
    }
    let red = binomial(params.threshold_trials(), 1.0 - params.p, rng);
    Ok(steps_to_collect(params.n, params.n as i64 - red as i64, rng))
}

/// One draw of `V`: `B ~ Bin(floor(r t_p), p)`, `N = floor((B - n)/2)`,
/// and the number of coupons the lazy collector misses in `N` steps.
pub fn coupon_uncollected<R: Rng + ?Sized>(params: &CouponParams, rng: &mut R) -> Result<usize> {
    params.check_common()?;
    if !(params.r > 4.0) {
        return Err(Error::InvalidParameter(format!("r = {} must exceed 4", params.r)));
    }
    let blue = binomial(params.uncollected_trials(), params.p, rng) as i64;
    let steps = (blue - params.n as i64).div_euclid(2);
    Ok(uncollected_after(params.n, steps, rng))
}
