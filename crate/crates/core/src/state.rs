//! Graph topologies, particle configurations and the single-step mechanics
//! shared by every system.
//!
//! Sites are numbered `0..2n`. On the star graph those are the leaves and
//! the core is site `2n`.
//!
//! Particles of one colour are exchangeable, so a [`Configuration`] keeps a
//! registry of *positions* per colour rather than particle identities. Each
//! site additionally lists the registry slots it hosts, which makes uniform
//! sampling, relocation and annihilation O(1).

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Complete,
    Star,
}

impl GraphKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Complete => "complete",
            GraphKind::Star => "star",
        }
    }
}

/// Destination rule for one step on the complete graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompleteKernel {
    /// Destination uniform over all `2n` vertices, the current one included
    /// (a draw of the current vertex leaves the configuration unchanged).
    /// This is the kernel under which the exact geometric-sum laws
    /// `p_i = (2i-1)/2n` and `p_i = i/2n` hold.
    #[default]
    Uniform,
    /// Destination uniform over the `2n - 1` other vertices.
    Neighbor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Topology {
    kind: GraphKind,
    n: usize,
    kernel: CompleteKernel,
}

impl Topology {
    pub fn new(kind: GraphKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroSize);
        }
        Ok(Topology {
            kind,
            n,
            kernel: CompleteKernel::default(),
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(GraphKind::Complete, n)
    }

    pub fn star(n: usize) -> Result<Self> {
        Self::new(GraphKind::Star, n)
    }

    /// Replaces the complete-graph step rule. Ignored on the star.
    pub fn with_kernel(mut self, kernel: CompleteKernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kernel(&self) -> CompleteKernel {
        self.kernel
    }

    pub fn site_count(&self) -> usize {
        match self.kind {
            GraphKind::Complete => 2 * self.n,
            GraphKind::Star => 2 * self.n + 1,
        }
    }

    pub fn core(&self) -> Option<usize> {
        match self.kind {
            GraphKind::Complete => None,
            GraphKind::Star => Some(2 * self.n),
        }
    }

    pub fn is_core(&self, site: usize) -> bool {
        self.core() == Some(site)
    }

    /// Graph neighbourhood of `site` (no self-loops).
    pub fn neighbors(&self, site: usize) -> Vec<usize> {
        let leaves = 2 * self.n;
        match self.kind {
            GraphKind::Complete => (0..leaves).filter(|&v| v != site).collect(),
            GraphKind::Star if site == leaves => (0..leaves).collect(),
            GraphKind::Star => vec![leaves],
        }
    }

    /// Draws the destination of one random-walk step from `site`.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&self, site: usize, rng: &mut R) -> usize {
        let leaves = 2 * self.n;
        match self.kind {
            GraphKind::Complete => match self.kernel {
                CompleteKernel::Uniform => rng.random_range(0..leaves),
                CompleteKernel::Neighbor => {
                    let v = rng.random_range(0..leaves - 1);
                    if v >= site {
                        v + 1
                    } else {
                        v
                    }
                }
            },
            GraphKind::Star if site == leaves => rng.random_range(0..leaves),
            GraphKind::Star => leaves,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    #[serde(alias = "one")]
    OneType,
    #[serde(alias = "two")]
    TwoType,
}

impl SystemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::OneType => "one",
            SystemKind::TwoType => "two",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coloring {
    /// Uniformly random assignment of `n` red and `n` blue particles.
    #[default]
    RandomBalanced,
    /// Even sites red, odd sites blue.
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    #[inline]
    fn index(self) -> usize {
        match self {
            Color::Red => 0,
            Color::Blue => 1,
        }
    }

    #[inline]
    pub fn opposite(self) -> Color {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }

    /// `+1` for blue, `-1` for red.
    #[inline]
    pub fn sign(self) -> i8 {
        match self {
            Color::Red => -1,
            Color::Blue => 1,
        }
    }
}

/// A sampled particle: its colour registry and slot within it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Particle {
    pub color: Color,
    pub slot: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub from: usize,
    pub moved_to: usize,
    pub collided: bool,
    /// The mover left the star's core and survived (the `M_t` increment).
    pub core_departure_without_collision: bool,
}

/// Occupancy of the graph plus per-colour particle registries.
///
/// One-type systems keep every particle in the blue registry; colour plays
/// no role there since any two particles annihilate.
#[derive(Debug, Clone)]
pub struct Configuration {
    topology: Topology,
    system: SystemKind,
    occupant: Vec<Option<Color>>,
    members: Vec<Vec<u32>>,
    registry: [Vec<u32>; 2],
    member_index: [Vec<u32>; 2],
}

impl Configuration {
    /// One particle on every vertex of `K_2n` or every leaf of `S_2n`.
    pub fn new<R: Rng + ?Sized>(
        topology: Topology,
        system: SystemKind,
        coloring: Coloring,
        rng: &mut R,
    ) -> Self {
        let sites = 2 * topology.n();
        let colors: Vec<Color> = match system {
            SystemKind::OneType => vec![Color::Blue; sites],
            SystemKind::TwoType => match coloring {
                Coloring::Alternating => (0..sites)
                    .map(|s| if s % 2 == 0 { Color::Red } else { Color::Blue })
                    .collect(),
                Coloring::RandomBalanced => {
                    let mut c: Vec<Color> = (0..sites)
                        .map(|s| if s < topology.n() { Color::Red } else { Color::Blue })
                        .collect();
                    c.shuffle(rng);
                    c
                }
            },
        };
        let placements: Vec<(usize, Color)> = colors.into_iter().enumerate().collect();
        Self::from_placements(topology, system, &placements)
            .expect("initial placements are valid")
    }

    /// Builds an arbitrary configuration, one entry per particle. Sites may
    /// repeat but must never mix colours in a two-type system (one-type
    /// systems must have at most one particle per site).
    pub fn from_placements(
        topology: Topology,
        system: SystemKind,
        placements: &[(usize, Color)],
    ) -> Result<Self> {
        let mut config = Configuration {
            topology,
            system,
            occupant: vec![None; topology.site_count()],
            members: vec![Vec::new(); topology.site_count()],
            registry: [Vec::new(), Vec::new()],
            member_index: [Vec::new(), Vec::new()],
        };
        for &(site, color) in placements {
            if site >= topology.site_count() {
                return Err(Error::InvalidParameter(format!("site {site} out of range")));
            }
            let color = match system {
                SystemKind::OneType => Color::Blue,
                SystemKind::TwoType => color,
            };
            match (system, config.occupant[site]) {
                (SystemKind::OneType, Some(_)) => {
                    return Err(Error::InvalidParameter(format!(
                        "one-type site {site} already occupied"
                    )))
                }
                (SystemKind::TwoType, Some(c)) if c != color => {
                    return Err(Error::InvalidParameter(format!(
                        "site {site} would host both colours"
                    )))
                }
                _ => {}
            }
            let ci = color.index();
            let slot = config.registry[ci].len() as u32;
            config.registry[ci].push(site as u32);
            config.member_index[ci].push(config.members[site].len() as u32);
            config.members[site].push(slot);
            config.occupant[site] = Some(color);
        }
        Ok(config)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn system(&self) -> SystemKind {
        self.system
    }

    pub fn red_count(&self) -> usize {
        self.registry[0].len()
    }

    pub fn blue_count(&self) -> usize {
        self.registry[1].len()
    }

    pub fn total(&self) -> usize {
        self.red_count() + self.blue_count()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// `(colour, count)` at a site; colour is `None` for an empty site.
    pub fn site(&self, site: usize) -> (Option<Color>, usize) {
        (self.occupant[site], self.members[site].len())
    }

    pub fn count_at(&self, site: usize) -> usize {
        self.members[site].len()
    }

    /// Number of particles at the core (0 on the complete graph).
    pub fn core_count(&self) -> usize {
        self.topology.core().map_or(0, |c| self.members[c].len())
    }

    pub fn position(&self, particle: Particle) -> usize {
        self.registry[particle.color.index()][particle.slot] as usize
    }

    /// Samples the particle that moves next.
    ///
    /// One-type: uniform over all particles. Two-type: a uniform blue
    /// particle with probability `p`, otherwise a uniform red one.
    ///
    /// # Panics
    ///
    /// If the sampled colour has no particles (the caller must stop at
    /// extinction).
    #[inline]
    pub fn sample_mover<R: Rng + ?Sized>(&self, p: f64, rng: &mut R) -> Particle {
        let color = match self.system {
            SystemKind::OneType => Color::Blue,
            SystemKind::TwoType => {
                if rng.random_bool(p) {
                    Color::Blue
                } else {
                    Color::Red
                }
            }
        };
        let len = self.registry[color.index()].len();
        assert!(len > 0, "sample_mover called on an exhausted colour");
        Particle {
            color,
            slot: rng.random_range(0..len),
        }
    }

    /// Moves `particle` one random-walk step and resolves annihilation.
    #[inline]
    pub fn move_and_resolve<R: Rng + ?Sized>(&mut self, particle: Particle, rng: &mut R) -> StepOutcome {
        let from = self.position(particle);
        let to = self.topology.step(from, rng);
        self.move_to(particle, to)
    }

    /// Deterministic half of [`move_and_resolve`](Self::move_and_resolve):
    /// moves `particle` to `to` and resolves annihilation.
    pub fn move_to(&mut self, particle: Particle, to: usize) -> StepOutcome {
        let from = self.position(particle);
        if to == from {
            return StepOutcome {
                from,
                moved_to: to,
                collided: false,
                core_departure_without_collision: false,
            };
        }
        let collided = match (self.system, self.occupant[to]) {
            (_, None) => false,
            (SystemKind::OneType, Some(_)) => true,
            (SystemKind::TwoType, Some(c)) => c != particle.color,
        };
        if collided {
            let resident_color = self.occupant[to].expect("occupied destination");
            let resident_slot = *self.members[to].last().expect("occupied destination") as usize;
            if resident_color == particle.color {
                // Shared registry (one-type): remove the higher slot first so
                // the swap-remove cannot relocate the other one.
                let (hi, lo) = if resident_slot > particle.slot {
                    (resident_slot, particle.slot)
                } else {
                    (particle.slot, resident_slot)
                };
                self.remove(particle.color, hi);
                self.remove(particle.color, lo);
            } else {
                self.remove(particle.color, particle.slot);
                self.remove(resident_color, resident_slot);
            }
        } else {
            self.relocate(particle, to);
        }
        StepOutcome {
            from,
            moved_to: to,
            collided,
            core_departure_without_collision: !collided && self.topology.is_core(from),
        }
    }

    fn detach(&mut self, ci: usize, slot: usize) {
        let site = self.registry[ci][slot] as usize;
        let k = self.member_index[ci][slot] as usize;
        let list = &mut self.members[site];
        list.swap_remove(k);
        if let Some(&moved) = list.get(k) {
            self.member_index[ci][moved as usize] = k as u32;
        }
        if list.is_empty() {
            self.occupant[site] = None;
        }
    }

    fn remove(&mut self, color: Color, slot: usize) {
        let ci = color.index();
        self.detach(ci, slot);
        let last = self.registry[ci].len() - 1;
        if slot != last {
            let site = self.registry[ci][last];
            let k = self.member_index[ci][last];
            self.members[site as usize][k as usize] = slot as u32;
            self.registry[ci][slot] = site;
            self.member_index[ci][slot] = k;
        }
        self.registry[ci].pop();
        self.member_index[ci].pop();
    }

    fn relocate(&mut self, particle: Particle, to: usize) {
        let ci = particle.color.index();
        self.detach(ci, particle.slot);
        self.member_index[ci][particle.slot] = self.members[to].len() as u32;
        self.members[to].push(particle.slot as u32);
        self.occupant[to] = Some(particle.color);
        self.registry[ci][particle.slot] = to as u32;
    }

    /// Checks every structural invariant; returns a description of the first
    /// violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut site_total = 0;
        for (site, list) in self.members.iter().enumerate() {
            site_total += list.len();
            match (self.occupant[site], list.is_empty()) {
                (None, false) => return Err(format!("site {site} has members but no colour")),
                (Some(_), true) => return Err(format!("site {site} coloured but empty")),
                _ => {}
            }
            if self.system == SystemKind::OneType && list.len() > 1 {
                return Err(format!("one-type site {site} hosts {} particles", list.len()));
            }
            if let Some(color) = self.occupant[site] {
                let ci = color.index();
                for (k, &slot) in list.iter().enumerate() {
                    let slot = slot as usize;
                    if self.registry[ci].get(slot).map(|&s| s as usize) != Some(site) {
                        return Err(format!("slot {slot} listed at site {site} points elsewhere"));
                    }
                    if self.member_index[ci][slot] as usize != k {
                        return Err(format!("member index of slot {slot} is stale"));
                    }
                }
            }
        }
        if site_total != self.total() {
            return Err(format!(
                "site total {site_total} differs from registry total {}",
                self.total()
            ));
        }
        for ci in 0..2 {
            for (slot, &site) in self.registry[ci].iter().enumerate() {
                let site = site as usize;
                if self.occupant[site].map(Color::index) != Some(ci) {
                    return Err(format!("registry slot {slot} sits on a foreign site {site}"));
                }
            }
        }
        if self.system == SystemKind::TwoType && self.red_count() != self.blue_count() {
            return Err(format!(
                "colour counts differ: red {} blue {}",
                self.red_count(),
                self.blue_count()
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn complete_neighbourhoods() {
        let t = Topology::complete(3).unwrap();
        for v in 0..6 {
            let nb = t.neighbors(v);
            assert_eq!(nb.len(), 5);
            assert!(!nb.contains(&v));
        }
    }

    #[test]
    fn star_neighbourhoods() {
        let t = Topology::star(3).unwrap();
        assert_eq!(t.core(), Some(6));
        for leaf in 0..6 {
            assert_eq!(t.neighbors(leaf), vec![6]);
        }
        assert_eq!(t.neighbors(6), (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn zero_size_rejected() {
        assert!(matches!(Topology::star(0), Err(Error::ZeroSize)));
    }

    #[test]
    fn neighbor_kernel_never_stays() {
        let t = Topology::complete(2).unwrap().with_kernel(CompleteKernel::Neighbor);
        let mut r = rng(1);
        for from in 0..4 {
            for _ in 0..200 {
                let to = t.step(from, &mut r);
                assert!(to != from && to < 4);
            }
        }
    }

    #[test]
    fn uniform_kernel_hits_every_vertex() {
        let t = Topology::complete(2).unwrap();
        let mut r = rng(2);
        let mut seen = [0u32; 4];
        for _ in 0..4000 {
            seen[t.step(0, &mut r)] += 1;
        }
        assert!(seen.iter().all(|&c| c > 800));
    }

    #[test]
    fn one_type_complete_initial() {
        let c = Configuration::new(
            Topology::complete(2).unwrap(),
            SystemKind::OneType,
            Coloring::RandomBalanced,
            &mut rng(0),
        );
        assert_eq!(c.total(), 4);
        assert!((0..4).all(|s| c.count_at(s) == 1));
        c.check_invariants().unwrap();
    }

    #[test]
    fn star_alternating_n1() {
        let c = Configuration::new(
            Topology::star(1).unwrap(),
            SystemKind::TwoType,
            Coloring::Alternating,
            &mut rng(0),
        );
        assert_eq!(c.site(0), (Some(Color::Red), 1));
        assert_eq!(c.site(1), (Some(Color::Blue), 1));
        assert_eq!(c.site(2), (None, 0));
    }

    #[test]
    fn random_balanced_counts() {
        let c = Configuration::new(
            Topology::complete(50).unwrap(),
            SystemKind::TwoType,
            Coloring::RandomBalanced,
            &mut rng(9),
        );
        assert_eq!(c.red_count(), 50);
        assert_eq!(c.blue_count(), 50);
        assert!((0..100).all(|s| c.count_at(s) == 1));
        c.check_invariants().unwrap();
    }

    #[test]
    fn p_one_always_blue() {
        let c = Configuration::new(
            Topology::star(3).unwrap(),
            SystemKind::TwoType,
            Coloring::RandomBalanced,
            &mut rng(4),
        );
        let mut r = rng(5);
        for _ in 0..1000 {
            assert_eq!(c.sample_mover(1.0, &mut r).color, Color::Blue);
        }
    }

    #[test]
    fn symmetric_colour_frequency() {
        let c = Configuration::new(
            Topology::complete(1).unwrap(),
            SystemKind::TwoType,
            Coloring::Alternating,
            &mut rng(4),
        );
        let mut r = rng(6);
        let draws = 100_000;
        let blue = (0..draws)
            .filter(|_| c.sample_mover(0.5, &mut r).color == Color::Blue)
            .count() as f64;
        let se = (0.25 / draws as f64).sqrt();
        assert!((blue / draws as f64 - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn one_type_uniform_selection() {
        let c = Configuration::new(
            Topology::complete(2).unwrap(),
            SystemKind::OneType,
            Coloring::RandomBalanced,
            &mut rng(0),
        );
        let mut r = rng(7);
        let draws = 100_000;
        let mut freq = [0u32; 4];
        for _ in 0..draws {
            let part = c.sample_mover(0.5, &mut r);
            freq[c.position(part)] += 1;
        }
        let se = (0.25 * 0.75 / draws as f64).sqrt();
        for f in freq {
            assert!((f as f64 / draws as f64 - 0.25).abs() < 3.0 * se, "{freq:?}");
        }
    }

    #[test]
    fn k2_neighbor_kernel_collides_immediately() {
        let t = Topology::complete(1).unwrap().with_kernel(CompleteKernel::Neighbor);
        let mut c = Configuration::from_placements(
            t,
            SystemKind::TwoType,
            &[(0, Color::Red), (1, Color::Blue)],
        )
        .unwrap();
        let blue = Particle { color: Color::Blue, slot: 0 };
        let out = c.move_and_resolve(blue, &mut rng(3));
        assert_eq!(out.moved_to, 0);
        assert!(out.collided);
        assert!(c.is_empty());
        c.check_invariants().unwrap();
    }

    #[test]
    fn star_core_departure_split() {
        let t = Topology::star(1).unwrap();
        let mut r = rng(11);
        let trials = 20_000;
        let mut collisions = 0;
        for _ in 0..trials {
            let mut c = Configuration::from_placements(
                t,
                SystemKind::TwoType,
                &[(2, Color::Blue), (0, Color::Red)],
            )
            .unwrap();
            let out = c.move_and_resolve(Particle { color: Color::Blue, slot: 0 }, &mut r);
            if out.collided {
                collisions += 1;
                assert_eq!(out.moved_to, 0);
                assert!(!out.core_departure_without_collision);
                assert!(c.is_empty());
            } else {
                assert_eq!(out.moved_to, 1);
                assert!(out.core_departure_without_collision);
                assert_eq!(c.site(1), (Some(Color::Blue), 1));
            }
        }
        let frac = collisions as f64 / trials as f64;
        assert!((frac - 0.5).abs() < 3.0 * (0.25 / trials as f64).sqrt());
    }

    #[test]
    fn leaf_to_multi_occupied_core() {
        let t = Topology::star(2).unwrap();
        let mut c = Configuration::from_placements(
            t,
            SystemKind::TwoType,
            &[(4, Color::Blue), (4, Color::Blue), (4, Color::Blue), (2, Color::Red)],
        )
        .unwrap();
        let out = c.move_and_resolve(Particle { color: Color::Red, slot: 0 }, &mut rng(0));
        assert!(out.collided);
        assert_eq!(out.moved_to, 4);
        assert_eq!(c.site(4), (Some(Color::Blue), 2));
        assert_eq!(c.site(2), (None, 0));
        assert_eq!(c.blue_count(), 2);
        assert_eq!(c.red_count(), 0);
    }

    #[test]
    fn mixed_placement_rejected() {
        let t = Topology::star(1).unwrap();
        assert!(Configuration::from_placements(
            t,
            SystemKind::TwoType,
            &[(0, Color::Blue), (0, Color::Red)]
        )
        .is_err());
        assert!(Configuration::from_placements(
            t,
            SystemKind::OneType,
            &[(0, Color::Blue), (0, Color::Blue)]
        )
        .is_err());
    }

    #[test]
    fn self_step_is_noop() {
        let t = Topology::complete(2).unwrap();
        let mut c = Configuration::from_placements(
            t,
            SystemKind::OneType,
            &[(0, Color::Blue), (1, Color::Blue)],
        )
        .unwrap();
        let out = c.move_to(Particle { color: Color::Blue, slot: 0 }, 0);
        assert!(!out.collided);
        assert_eq!(c.total(), 2);
        c.check_invariants().unwrap();
    }
}
