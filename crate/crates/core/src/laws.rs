//! Closed-form extinction-time laws.
//!
//! Every exact law in this crate has the shape `scale * sum_i X(p_i)` with
//! independent geometric `X(p)` on `{1, 2, ...}`. [`GeometricSumLaw`]
//! carries the success probabilities, exact moments and an independent
//! sampler used as the oracle side of distributional-equality tests.

use rand::distr::Open01;
use rand::Rng;

use crate::error::{Error, Result};
use crate::state::GraphKind;

pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `H_m = sum_{i=1}^m 1/i`.
pub fn harmonic(m: u64) -> f64 {
    (1..=m).rev().map(|i| 1.0 / i as f64).collect::<CompensatedSum>().value()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricSumLaw {
    probs: Vec<f64>,
    scale: u32,
}

impl GeometricSumLaw {
    pub fn new(probs: Vec<f64>, scale: u32) -> Result<Self> {
        if scale == 0 {
            return Err(Error::InvalidParameter("scale must be positive".into()));
        }
        for &q in &probs {
            if !(q > 0.0 && q <= 1.0) {
                return Err(Error::Probability {
                    value: q,
                    range: "(0, 1]",
                });
            }
        }
        Ok(GeometricSumLaw { probs, scale })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// `scale * sum 1/p_i`, compensated.
    pub fn mean(&self) -> f64 {
        let s: CompensatedSum = self.probs.iter().map(|&q| 1.0 / q).collect();
        self.scale as f64 * s.value()
    }

    /// `scale^2 * sum (1 - p_i)/p_i^2`, compensated.
    pub fn variance(&self) -> f64 {
        let s: CompensatedSum = self.probs.iter().map(|&q| (1.0 - q) / (q * q)).collect();
        (self.scale as f64).powi(2) * s.value()
    }

    /// Smallest value in the support.
    pub fn min_value(&self) -> u64 {
        self.scale as u64 * self.probs.len() as u64
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total: u64 = self.probs.iter().map(|&q| geometric(q, rng)).sum();
        self.scale as u64 * total
    }

    pub fn samples<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<u64> {
        (0..count).map(|_| self.sample(rng)).collect()
    }
}

/// Law of `T^1(K_2n)`: `p_i = (2i - 1)/2n`, scale 1.
pub fn one_type_complete_law(n: usize) -> Result<GeometricSumLaw> {
    nonzero(n)?;
    let two_n = 2.0 * n as f64;
    GeometricSumLaw::new((1..=n).map(|i| (2 * i - 1) as f64 / two_n).collect(), 1)
}

/// `q_i = 1 - (1/2i)((2n - 2i + 1)/2n)`.
pub fn star_q_direct(i: usize, n: usize) -> f64 {
    let (i, n) = (i as f64, n as f64);
    1.0 - (1.0 / (2.0 * i)) * ((2.0 * n - 2.0 * i + 1.0) / (2.0 * n))
}

/// `q_i = (2i - 1)(2n + 1)/(4ni)`, the same quantity in product form.
pub fn star_q_product(i: usize, n: usize) -> f64 {
    let num = ((2 * i - 1) as u128 * (2 * n + 1) as u128) as f64;
    let den = (4 * n as u128 * i as u128) as f64;
    num / den
}

/// Distance between two finite floats of equal sign in units in the last
/// place.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

/// Law of `T^1(S_2n)`: `2 * sum X(q_i)`. Both forms of `q_i` are computed
/// and must agree to 4 ulp.
pub fn one_type_star_law(n: usize) -> Result<GeometricSumLaw> {
    nonzero(n)?;
    let probs = (1..=n)
        .map(|i| {
            let q = star_q_product(i, n);
            let direct = star_q_direct(i, n);
            assert!(
                ulp_distance(q, direct) <= 4,
                "q_{i} forms disagree at n = {n}: {q} vs {direct}"
            );
            q
        })
        .collect();
    GeometricSumLaw::new(probs, 2)
}

/// Law of the two-type system at `p = 1`: `p_i = i/2n`, scale 1 on the
/// complete graph and 2 on the star.
pub fn two_type_p1_law(kind: GraphKind, n: usize) -> Result<GeometricSumLaw> {
    nonzero(n)?;
    let two_n = 2.0 * n as f64;
    let scale = match kind {
        GraphKind::Complete => 1,
        GraphKind::Star => 2,
    };
    GeometricSumLaw::new((1..=n).map(|i| i as f64 / two_n).collect(), scale)
}

/// `T^1(K_2n)` under the neighbour kernel: `p_i = (2i - 1)/(2n - 1)`.
pub fn one_type_complete_neighbor_law(n: usize) -> Result<GeometricSumLaw> {
    nonzero(n)?;
    let d = (2 * n - 1) as f64;
    GeometricSumLaw::new((1..=n).map(|i| (2 * i - 1) as f64 / d).collect(), 1)
}

/// Two-type `K_2n` at `p = 1` under the neighbour kernel: `p_i = i/(2n - 1)`.
pub fn two_type_p1_complete_neighbor_law(n: usize) -> Result<GeometricSumLaw> {
    nonzero(n)?;
    let d = (2 * n - 1) as f64;
    GeometricSumLaw::new((1..=n).map(|i| (i as f64 / d).min(1.0)).collect(), 1)
}

fn nonzero(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::ZeroSize)
    } else {
        Ok(())
    }
}

/// Geometric variate on `{1, 2, ...}` with success probability `p`, by
/// inverse CDF.
pub fn sample_geometric<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<u64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Probability {
            value: p,
            range: "(0, 1]",
        });
    }
    Ok(geometric(p, rng))
}

#[inline]
fn geometric<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    let u: f64 = rng.sample(Open01);
    let k = (u.ln() / (-p).ln_1p()).ceil();
    if k < 1.0 {
        1
    } else if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        k as u64
    }
}

/// Exact `E|W_t|` for a simple symmetric walk at even `t = 2m`:
/// `1 + sum_{k=1}^{m-1} 4^{-k} C(2k, k)`, with the central binomial terms
/// built by the recurrence `c_k = c_{k-1} (2k - 1)/(2k)`.
pub fn displacement_mean_exact(t: u64) -> Result<f64> {
    if t == 0 || t % 2 == 1 {
        return Err(Error::OddHorizon(t));
    }
    let m = t / 2;
    let mut sum = CompensatedSum::default();
    sum.add(1.0);
    let mut c = 1.0f64;
    for k in 1..m {
        c *= (2 * k - 1) as f64 / (2 * k) as f64;
        sum.add(c);
    }
    Ok(sum.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn complete_small_laws() {
        let l1 = one_type_complete_law(1).unwrap();
        assert_eq!(l1.probs(), &[0.5]);
        assert!(close(l1.mean(), 2.0));
        let l2 = one_type_complete_law(2).unwrap();
        assert_eq!(l2.probs(), &[0.25, 0.75]);
        assert!(close(l2.mean(), 16.0 / 3.0));
        assert!(matches!(one_type_complete_law(0), Err(Error::ZeroSize)));
    }

    #[test]
    fn star_small_laws() {
        let l1 = one_type_star_law(1).unwrap();
        assert_eq!(l1.probs(), &[0.75]);
        assert_eq!(l1.scale(), 2);
        assert!(close(l1.mean(), 8.0 / 3.0));
        // q_1 = 1 - (1/2)(3/4) = 5/8, q_2 = 1 - (1/4)(1/4) = 15/16
        let l2 = one_type_star_law(2).unwrap();
        assert!(close(l2.probs()[0], 5.0 / 8.0));
        assert!(close(l2.probs()[1], 15.0 / 16.0));
        assert!(close(l2.mean(), 2.0 * (8.0 / 5.0 + 16.0 / 15.0)));
    }

    #[test]
    fn p1_small_laws() {
        let s = two_type_p1_law(GraphKind::Star, 1).unwrap();
        assert_eq!(s.probs(), &[0.5]);
        assert!(close(s.mean(), 4.0));
        let k = two_type_p1_law(GraphKind::Complete, 2).unwrap();
        assert_eq!(k.probs(), &[0.25, 0.5]);
        assert!(close(k.mean(), 6.0));
    }

    #[test]
    fn neighbor_laws() {
        assert_eq!(one_type_complete_neighbor_law(1).unwrap().probs(), &[1.0]);
        assert_eq!(two_type_p1_complete_neighbor_law(1).unwrap().probs(), &[1.0]);
        let l = two_type_p1_complete_neighbor_law(2).unwrap();
        assert!(close(l.mean(), 3.0 + 1.5));
    }

    #[test]
    fn variance_matches_formula() {
        let l = one_type_complete_law(2).unwrap();
        let v = 0.75 / 0.0625 + 0.25 / 0.5625;
        assert!(close(l.variance(), v));
        let s = one_type_star_law(1).unwrap();
        assert!(close(s.variance(), 4.0 * 0.25 / 0.5625));
    }

    #[test]
    fn residuals_are_bounded() {
        for n in [100usize, 1000, 10_000] {
            let nf = n as f64;
            let mean = one_type_complete_law(n).unwrap().mean();
            let k = mean - (nf * nf.ln() + (EULER_MASCHERONI + 2.0 * 2f64.ln()) * nf);
            assert!(k.abs() <= 5.0, "complete residual {k} at n = {n}");
            // n log n + gamma n alone leaves a 2n log 2 gap
            let gap = (mean - (nf * nf.ln() + EULER_MASCHERONI * nf)) / nf;
            assert!((gap - 2.0 * 2f64.ln()).abs() < 1e-3, "gap {gap} at n = {n}");
            let s = one_type_star_law(n).unwrap().mean() - (2.0 * nf + nf.ln() + 2f64.ln());
            assert!(s.abs() <= 5.0, "star residual {s} at n = {n}");
            let p1 = two_type_p1_law(GraphKind::Star, n).unwrap().mean()
                - (4.0 * nf * nf.ln() + 4.0 * EULER_MASCHERONI * nf);
            assert!(p1.abs() <= 5.0, "p = 1 residual {p1} at n = {n}");
        }
    }

    #[test]
    fn gamma_constant() {
        for m in [10u64, 100, 1000, 100_000] {
            let gap = harmonic(m) - (m as f64).ln() - EULER_MASCHERONI;
            assert!(gap > 0.0 && gap <= 1.0 / (2.0 * m as f64), "m = {m}: {gap}");
        }
    }

    #[test]
    fn geometric_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..100).all(|_| sample_geometric(1.0, &mut rng).unwrap() == 1));
        assert!(sample_geometric(0.0, &mut rng).is_err());
        assert!(sample_geometric(-0.5, &mut rng).is_err());
        assert!(sample_geometric(1.5, &mut rng).is_err());
    }

    #[test]
    fn geometric_half_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draws = 100_000;
        let xs: Vec<u64> = (0..draws).map(|_| sample_geometric(0.5, &mut rng).unwrap()).collect();
        let mean = xs.iter().sum::<u64>() as f64 / draws as f64;
        // Var X(1/2) = 2
        assert!((mean - 2.0).abs() < 3.0 * (2.0 / draws as f64).sqrt());
        let tail = xs.iter().filter(|&&x| x >= 3).count() as f64 / draws as f64;
        assert!((tail - 0.25).abs() < 3.0 * (0.25 * 0.75 / draws as f64).sqrt());
        assert!(xs.iter().all(|&x| x >= 1));
    }

    #[test]
    fn law_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let degenerate = GeometricSumLaw::new(vec![1.0], 2).unwrap();
        assert!((0..100).all(|_| degenerate.sample(&mut rng) == 2));

        let star = one_type_star_law(1).unwrap();
        for x in star.samples(1000, &mut rng) {
            assert!(x >= 2 && x % 2 == 0);
        }

        let law = one_type_complete_law(2).unwrap();
        let count = 100_000;
        let xs = law.samples(count, &mut rng);
        let mean = xs.iter().sum::<u64>() as f64 / count as f64;
        let se = (law.variance() / count as f64).sqrt();
        assert!((mean - 16.0 / 3.0).abs() < 3.0 * se);
    }

    #[test]
    fn law_rejects_bad_probs() {
        assert!(GeometricSumLaw::new(vec![0.0], 1).is_err());
        assert!(GeometricSumLaw::new(vec![1.2], 1).is_err());
        assert!(GeometricSumLaw::new(vec![0.5], 0).is_err());
    }

    #[test]
    fn displacement_small_horizons() {
        assert_eq!(displacement_mean_exact(2).unwrap(), 1.0);
        assert_eq!(displacement_mean_exact(4).unwrap(), 1.5);
        assert!(matches!(displacement_mean_exact(5), Err(Error::OddHorizon(5))));
        assert!(displacement_mean_exact(0).is_err());
    }

    #[test]
    fn displacement_below_sqrt_t() {
        for m in 1..2000u64 {
            let t = 2 * m;
            assert!(displacement_mean_exact(t).unwrap() <= (t as f64).sqrt());
        }
    }
}
