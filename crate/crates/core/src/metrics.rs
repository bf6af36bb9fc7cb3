//! Distances between finite actions.
//!
//! The generator metric compares two actions on the same number of points
//! through a bijection `f`: `‖f‖ = (1/m) Σ_s Pr_x(f(s·x) ≠ s·f(x))`, and
//! `d_gen` is the minimum over all bijections. The statistical distance
//! compares only the distributions of stabilizer traces.
//!
//! `d_stat` here is truncated at a radius `R` and weights radius `r` by
//! `2^{-r}`: `Σ_{r=1..R} 2^{-r} · TV_r`, where `TV_r` is the total variation
//! between the radius-`r` trace distributions.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::actions::{ActionError, FiniteAction, Trace};
use crate::rational::{inv_pow2, ratio, ratio_or_zero, Rational};
use crate::words::{Ball, Letter};

/// Default exact-search size cap.
pub const DEFAULT_EXACT_LIMIT: usize = 8;
/// Trace radius used to seed the heuristic matching.
pub const SEED_TRACE_RADIUS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("exact search is capped at {limit} points, got {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("image list is not a bijection of 0..{n}")]
    NotBijection { n: usize },
    #[error("radius must be at least 1")]
    ZeroRadius,
    #[error("profile has radius {have}, radius {want} requested")]
    RadiusTooLarge { have: usize, want: usize },
}

/// A bijection between two point sets of equal size.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Bijection {
    images: Vec<usize>,
}

impl<'de> Deserialize<'de> for Bijection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let images = Vec::<usize>::deserialize(d)?;
        Bijection::new(images).map_err(serde::de::Error::custom)
    }
}

impl Bijection {
    pub fn new(images: Vec<usize>) -> Result<Self, MetricError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &y in &images {
            if y >= n || seen[y] {
                return Err(MetricError::NotBijection { n });
            }
            seen[y] = true;
        }
        Ok(Bijection { images })
    }

    pub fn identity(n: usize) -> Self {
        Bijection {
            images: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.images.len()];
        for (x, &y) in self.images.iter().enumerate() {
            images[y] = x;
        }
        Bijection { images }
    }
}

fn check_pair(x: &FiniteAction, y: &FiniteAction) -> Result<(), MetricError> {
    x.check_compatible(y)?;
    Ok(())
}

/// Number of pairs `(x, s)` with `f(s·x) ≠ s·f(x)`.
fn mismatches(f: &[usize], x: &FiniteAction, y: &FiniteAction) -> usize {
    x.generators()
        .iter()
        .zip(y.generators())
        .map(|(sx, sy)| {
            (0..x.n())
                .filter(|&p| f[sx.apply(p)] != sy.apply(f[p]))
                .count()
        })
        .sum()
}

fn norm_from_count(count: usize, n: usize, m: usize) -> Rational {
    ratio_or_zero(count, n * m)
}

/// `‖f‖_gen`.
pub fn gen_norm(f: &Bijection, x: &FiniteAction, y: &FiniteAction) -> Result<Rational, MetricError> {
    check_pair(x, y)?;
    if f.len() != x.n() {
        return Err(ActionError::SizeMismatch {
            left: f.len(),
            right: x.n(),
        }
        .into());
    }
    Ok(norm_from_count(mismatches(&f.images, x, y), x.n(), x.m()))
}

/// A bijection with its generator norm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    #[serde(with = "crate::rational::string")]
    pub value: Rational,
    pub witness: Bijection,
}

/// Order in which the exact search assigns points of `x`: breadth first over
/// the Schreier graph, so that most edges close early.
fn search_order(x: &FiniteAction) -> Vec<usize> {
    let mut order = Vec::with_capacity(x.n());
    for orbit in x.orbits() {
        let mut seen = vec![false; x.n()];
        let start = orbit[0];
        seen[start] = true;
        let mut i = order.len();
        order.push(start);
        while i < order.len() {
            let p = order[i];
            i += 1;
            for q in x.neighbours(p) {
                if !seen[q] {
                    seen[q] = true;
                    order.push(q);
                }
            }
        }
    }
    order
}

struct ExactSearch<'a> {
    x: &'a FiniteAction,
    y: &'a FiniteAction,
    order: Vec<usize>,
    f: Vec<usize>,
    used: Vec<bool>,
    best: usize,
    best_f: Vec<usize>,
}

impl ExactSearch<'_> {
    /// Mismatches closed by assigning `p ↦ q`, counting each edge once when
    /// its later endpoint is assigned.
    fn closed_cost(&self, p: usize, q: usize) -> usize {
        let mut cost = 0;
        for (sx, sy) in self.x.generators().iter().zip(self.y.generators()) {
            let out = sx.apply(p);
            let target = if out == p { q } else { self.f[out] };
            if target != usize::MAX && target != sy.apply(q) {
                cost += 1;
            }
        }
        for i in 0..self.x.m() {
            let src = self.x.apply_letter(Letter::new(i, true), p);
            if src != p && self.f[src] != usize::MAX {
                let sy = self.y.generator(i);
                if q != sy.apply(self.f[src]) {
                    cost += 1;
                }
            }
        }
        cost
    }

    fn run(&mut self, depth: usize, cost: usize) {
        if cost >= self.best {
            return;
        }
        if depth == self.order.len() {
            self.best = cost;
            self.best_f = self.f.clone();
            return;
        }
        let p = self.order[depth];
        for q in 0..self.y.n() {
            if self.used[q] {
                continue;
            }
            let extra = self.closed_cost(p, q);
            if cost + extra >= self.best {
                continue;
            }
            self.used[q] = true;
            self.f[p] = q;
            self.run(depth + 1, cost + extra);
            self.f[p] = usize::MAX;
            self.used[q] = false;
        }
    }
}

/// Exact `d_gen` by branch and bound over partial assignments. The bound is
/// the number of mismatched edges already forced, which never overestimates.
pub fn d_gen_exact(x: &FiniteAction, y: &FiniteAction, limit: usize) -> Result<Matching, MetricError> {
    check_pair(x, y)?;
    let n = x.n();
    if n > limit {
        return Err(MetricError::TooLarge { n, limit });
    }
    let start = d_gen_upper(x, y, 2, 0)?;
    let start_count = mismatches(&start.witness.images, x, y);
    let mut search = ExactSearch {
        x,
        y,
        order: search_order(x),
        f: vec![usize::MAX; n],
        used: vec![false; n],
        best: start_count,
        best_f: start.witness.images.clone(),
    };
    if start_count > 0 {
        search.run(0, 0);
    }
    Ok(Matching {
        value: norm_from_count(search.best, n, x.m()),
        witness: Bijection {
            images: search.best_f,
        },
    })
}

/// Mismatch bookkeeping for swap descent.
struct SwapDescent<'a> {
    x: &'a FiniteAction,
    y: &'a FiniteAction,
    f: Vec<usize>,
}

impl SwapDescent<'_> {
    fn edge_bad(&self, p: usize, s: usize) -> bool {
        let sx = self.x.generator(s);
        self.f[sx.apply(p)] != self.y.generator(s).apply(self.f[p])
    }

    /// Edges `(p, s)` touching `a` or `b`, deduplicated.
    fn affected(&self, a: usize, b: usize) -> Vec<(usize, usize)> {
        let mut edges = Vec::with_capacity(8 * self.x.m());
        for s in 0..self.x.m() {
            for v in [a, b] {
                edges.push((v, s));
                edges.push((self.x.apply_letter(Letter::new(s, true), v), s));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    fn swap_delta(&mut self, a: usize, b: usize) -> isize {
        let edges = self.affected(a, b);
        let before = edges.iter().filter(|&&(p, s)| self.edge_bad(p, s)).count() as isize;
        self.f.swap(a, b);
        let after = edges.iter().filter(|&&(p, s)| self.edge_bad(p, s)).count() as isize;
        self.f.swap(a, b);
        after - before
    }

    /// Steepest descent over transpositions of images; among equally good
    /// swaps the lexicographically smallest pair wins.
    fn descend(&mut self) {
        let n = self.x.n();
        loop {
            let mut best = (0isize, 0usize, 0usize);
            for a in 0..n {
                for b in a + 1..n {
                    let d = self.swap_delta(a, b);
                    if d < best.0 {
                        best = (d, a, b);
                    }
                }
            }
            if best.0 == 0 {
                return;
            }
            self.f.swap(best.1, best.2);
        }
    }
}

/// Greedy start: points are matched to points with the same seed trace,
/// rarest traces first, then extended along Schreier edges.
fn greedy_start(
    x: &FiniteAction,
    y: &FiniteAction,
    tx: &[Trace],
    ty: &[Trace],
    rng: Option<&mut ChaCha8Rng>,
) -> Vec<usize> {
    let n = x.n();
    let mut buckets: BTreeMap<&Trace, Vec<usize>> = BTreeMap::new();
    for (q, t) in ty.iter().enumerate() {
        buckets.entry(t).or_default().push(q);
    }
    let mut roots: Vec<usize> = (0..n).collect();
    let mut rng = rng;
    if let Some(r) = rng.as_mut() {
        for v in buckets.values_mut() {
            v.shuffle(r);
        }
        roots.shuffle(r);
    }
    let rarity = |p: usize| buckets.get(&tx[p]).map_or(0, Vec::len);
    roots.sort_by_key(|&p| {
        let r = rarity(p);
        (if r == 0 { usize::MAX } else { r }, 0)
    });

    let mut f = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let take = |bucket: Option<&Vec<usize>>, used: &[bool]| {
        bucket.and_then(|v| v.iter().copied().find(|&q| !used[q]))
    };
    for &root in &roots {
        if f[root] != usize::MAX {
            continue;
        }
        let Some(q) = take(buckets.get(&tx[root]), &used) else {
            continue;
        };
        f[root] = q;
        used[q] = true;
        let mut queue = vec![root];
        let mut i = 0;
        while i < queue.len() {
            let p = queue[i];
            i += 1;
            for code in 0..2 * x.m() {
                let l = Letter::from_code(code);
                let p2 = x.apply_letter(l, p);
                if f[p2] != usize::MAX {
                    continue;
                }
                let proposal = y.apply_letter(l, f[p]);
                let q2 = if !used[proposal] && ty[proposal] == tx[p2] {
                    Some(proposal)
                } else {
                    None
                };
                if let Some(q2) = q2 {
                    f[p2] = q2;
                    used[q2] = true;
                    queue.push(p2);
                }
            }
        }
    }
    let mut free = (0..n).filter(|&q| !used[q]);
    for v in f.iter_mut() {
        if *v == usize::MAX {
            *v = free.next().expect("as many free targets as unassigned points");
        }
    }
    f
}

/// Heuristic upper bound on `d_gen`: best of `restarts` greedy starts, each
/// followed by swap descent. Deterministic given `seed`; restart 0 is the
/// unshuffled greedy start and ties go to the lowest restart index.
pub fn d_gen_upper(
    x: &FiniteAction,
    y: &FiniteAction,
    restarts: usize,
    seed: u64,
) -> Result<Matching, MetricError> {
    check_pair(x, y)?;
    let n = x.n();
    let ball = Ball::new(x.m(), SEED_TRACE_RADIUS);
    let tx = x.traces(&ball)?;
    let ty = y.traces(&ball)?;
    let mut best: Option<(usize, Vec<usize>)> = None;
    for k in 0..restarts.max(1) {
        let start = if k == 0 {
            greedy_start(x, y, &tx, &ty, None)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            greedy_start(x, y, &tx, &ty, Some(&mut rng))
        };
        let mut descent = SwapDescent { x, y, f: start };
        descent.descend();
        let count = mismatches(&descent.f, x, y);
        if best.as_ref().is_none_or(|(c, _)| count < *c) {
            best = Some((count, descent.f));
        }
        if count == 0 {
            break;
        }
    }
    let (count, f) = best.expect("at least one restart");
    Ok(Matching {
        value: norm_from_count(count, n, x.m()),
        witness: Bijection { images: f },
    })
}

/// Distribution of stabilizer traces at every radius `1..=R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceProfile {
    m: usize,
    radius: usize,
    levels: Vec<BTreeMap<Trace, Rational>>,
}

#[derive(Serialize, Deserialize)]
struct ProfileEntry {
    trace: Trace,
    #[serde(with = "crate::rational::string")]
    probability: Rational,
}

#[derive(Serialize, Deserialize)]
struct ProfileRecord {
    m: usize,
    radius: usize,
    levels: Vec<Vec<ProfileEntry>>,
}

impl Serialize for TraceProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ProfileRecord {
            m: self.m,
            radius: self.radius,
            levels: self
                .levels
                .iter()
                .map(|lvl| {
                    lvl.iter()
                        .map(|(t, p)| ProfileEntry {
                            trace: t.clone(),
                            probability: *p,
                        })
                        .collect()
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TraceProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rec = ProfileRecord::deserialize(d)?;
        if rec.levels.len() != rec.radius {
            return Err(serde::de::Error::custom("one level per radius expected"));
        }
        let levels = rec
            .levels
            .into_iter()
            .map(|lvl| lvl.into_iter().map(|e| (e.trace, e.probability)).collect())
            .collect();
        Ok(TraceProfile {
            m: rec.m,
            radius: rec.radius,
            levels,
        })
    }
}

impl TraceProfile {
    /// Builds a profile from per-radius weight maps.
    pub fn from_levels(m: usize, levels: Vec<BTreeMap<Trace, Rational>>) -> Self {
        let levels = levels
            .into_iter()
            .map(|lvl| lvl.into_iter().filter(|(_, p)| !p.is_zero()).collect())
            .collect::<Vec<_>>();
        TraceProfile {
            m,
            radius: levels.len(),
            levels,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Trace distribution at radius `r`, for `1 ≤ r ≤ radius`.
    pub fn level(&self, r: usize) -> &BTreeMap<Trace, Rational> {
        &self.levels[r - 1]
    }

    pub fn probability(&self, r: usize, trace: &Trace) -> Rational {
        self.level(r).get(trace).copied().unwrap_or_else(Rational::zero)
    }

    /// The same profile cut down to a smaller radius.
    pub fn truncate(&self, radius: usize) -> Self {
        TraceProfile {
            m: self.m,
            radius: radius.min(self.radius),
            levels: self.levels[..radius.min(self.radius)].to_vec(),
        }
    }
}

/// Empirical trace distributions of `x` at radii `1..=radius`.
pub fn local_profile(x: &FiniteAction, radius: usize) -> Result<TraceProfile, MetricError> {
    if radius == 0 {
        return Err(MetricError::ZeroRadius);
    }
    let ball = Ball::new(x.m(), radius);
    let traces = x.traces(&ball)?;
    let n = x.n();
    let levels = (1..=radius)
        .map(|r| {
            let size = ball.size_at(r);
            let mut counts: BTreeMap<Trace, usize> = BTreeMap::new();
            for t in &traces {
                *counts.entry(t.restrict(size)).or_default() += 1;
            }
            counts
                .into_iter()
                .map(|(t, c)| (t, ratio(c, n)))
                .collect()
        })
        .collect();
    Ok(TraceProfile {
        m: x.m(),
        radius,
        levels,
    })
}

/// Total variation between two finitely supported distributions.
pub fn total_variation(p: &BTreeMap<Trace, Rational>, q: &BTreeMap<Trace, Rational>) -> Rational {
    let zero = Rational::zero();
    let mut sum = Rational::zero();
    for (t, a) in p {
        sum += (*a - *q.get(t).unwrap_or(&zero)).abs();
    }
    for (t, b) in q {
        if !p.contains_key(t) {
            sum += b.abs();
        }
    }
    sum / Rational::from(2)
}

/// `TV_r` for each `r` in `1..=radius`.
pub fn level_distances(
    a: &TraceProfile,
    b: &TraceProfile,
    radius: usize,
) -> Result<Vec<Rational>, MetricError> {
    if radius == 0 {
        return Err(MetricError::ZeroRadius);
    }
    if a.m != b.m {
        return Err(ActionError::RankMismatch {
            left: a.m,
            right: b.m,
        }
        .into());
    }
    let have = a.radius.min(b.radius);
    if radius > have {
        return Err(MetricError::RadiusTooLarge { have, want: radius });
    }
    Ok((1..=radius)
        .map(|r| total_variation(a.level(r), b.level(r)))
        .collect())
}

/// `Σ_{r=1..radius} 2^{-r} TV_r`.
pub fn profile_distance(a: &TraceProfile, b: &TraceProfile, radius: usize) -> Result<Rational, MetricError> {
    Ok(level_distances(a, b, radius)?
        .into_iter()
        .enumerate()
        .map(|(i, tv)| tv * inv_pow2(i + 1))
        .sum())
}

/// Truncated statistical distance between two actions.
pub fn d_stat_trunc(x: &FiniteAction, y: &FiniteAction, radius: usize) -> Result<Rational, MetricError> {
    if x.m() != y.m() {
        return Err(ActionError::RankMismatch {
            left: x.m(),
            right: y.m(),
        }
        .into());
    }
    profile_distance(&local_profile(x, radius)?, &local_profile(y, radius)?, radius)
}

/// The bound `(2m)^{r+1} · m · ‖f‖` on `TV_r` for any bijection `f`.
pub fn stat_bound(m: usize, r: usize, norm: Rational) -> Rational {
    let factor = (2 * m as i128).pow(r as u32 + 1) * m as i128;
    norm * Rational::from(factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use num_traits::One;
    use proptest::prelude::*;

    fn act(images: &[&[usize]]) -> FiniteAction {
        FiniteAction::from_images(images.iter().map(|v| v.to_vec()).collect()).unwrap()
    }

    /// Minimum norm over all `n!` bijections.
    fn brute_d_gen(x: &FiniteAction, y: &FiniteAction) -> Rational {
        (0..x.n())
            .permutations(x.n())
            .map(|p| gen_norm(&Bijection::new(p).unwrap(), x, y).unwrap())
            .min()
            .unwrap_or_else(Rational::zero)
    }

    #[test]
    fn gen_norm_examples() {
        let x = act(&[&[1, 0]]);
        assert_eq!(gen_norm(&Bijection::identity(2), &x, &x).unwrap(), Rational::zero());
        let y = act(&[&[0, 1]]);
        assert_eq!(gen_norm(&Bijection::identity(2), &x, &y).unwrap(), Rational::one());
        let a = act(&[&[1, 0, 3, 2]]);
        let b = act(&[&[1, 0, 2, 3]]);
        assert_eq!(gen_norm(&Bijection::identity(4), &a, &b).unwrap(), Rational::new(1, 2));
        assert!(gen_norm(&Bijection::identity(3), &a, &b).is_err());
    }

    #[test]
    fn d_gen_exact_examples() {
        let x = act(&[&[1, 0]]);
        let y = act(&[&[0, 1]]);
        assert_eq!(brute_d_gen(&x, &y), Rational::one());
        assert_eq!(d_gen_exact(&x, &y, 8).unwrap().value, Rational::one());
        assert_eq!(d_gen_exact(&x, &x, 8).unwrap().value, Rational::zero());
        let a = act(&[&[1, 0, 3, 2]]);
        let b = act(&[&[1, 0, 2, 3]]);
        assert_eq!(brute_d_gen(&a, &b), Rational::new(1, 2));
        let exact = d_gen_exact(&a, &b, 8).unwrap();
        assert_eq!(exact.value, Rational::new(1, 2));
        assert_eq!(gen_norm(&exact.witness, &a, &b).unwrap(), exact.value);
        assert!(matches!(
            d_gen_exact(&act(&[&(0..9).collect::<Vec<_>>()]), &FiniteAction::trivial(9, 1), 8),
            Err(MetricError::TooLarge { n: 9, limit: 8 })
        ));
    }

    #[test]
    fn d_gen_upper_examples() {
        let a = act(&[&[1, 2, 3, 0, 5, 4], &[0, 1, 2, 3, 5, 4]]);
        let m = d_gen_upper(&a, &a, 4, 7).unwrap();
        assert_eq!(m.value, Rational::zero());
        let x = act(&[&[1, 0, 3, 2]]);
        let y = act(&[&[1, 0, 2, 3]]);
        let m = d_gen_upper(&x, &y, 8, 1).unwrap();
        assert_eq!(m.value, Rational::new(1, 2));
        assert_eq!(gen_norm(&m.witness, &x, &y).unwrap(), m.value);
        assert_eq!(d_gen_upper(&x, &y, 8, 1).unwrap(), m);
    }

    #[test]
    fn profile_examples() {
        let z = FiniteAction::trivial(4, 1);
        let p = local_profile(&z, 3).unwrap();
        for r in 1..=3 {
            assert_eq!(p.level(r).len(), 1);
            assert_eq!(p.probability(r, &Trace::full(1 + 2 * r)), Rational::one());
        }
        let swap = act(&[&[1, 0]]);
        let q = local_profile(&swap, 1).unwrap();
        assert_eq!(q.probability(1, &Trace::new(vec![0])), Rational::one());
        assert_eq!(d_stat_trunc(&swap, &FiniteAction::trivial(2, 1), 1).unwrap(), Rational::new(1, 2));
        assert_eq!(d_stat_trunc(&swap, &swap.power(5), 3).unwrap(), Rational::zero());
        assert!(local_profile(&swap, 0).is_err());
    }

    #[test]
    fn profile_mixture_law() {
        let x = act(&[&[1, 2, 0], &[1, 0, 2]]);
        let y = act(&[&[1, 0], &[0, 1]]);
        let u = x.disjoint_union(&y).unwrap();
        let (px, py, pu) = (
            local_profile(&x, 3).unwrap(),
            local_profile(&y, 3).unwrap(),
            local_profile(&u, 3).unwrap(),
        );
        for r in 1..=3 {
            let mut mix: BTreeMap<Trace, Rational> = BTreeMap::new();
            for (t, p) in px.level(r) {
                *mix.entry(t.clone()).or_default() += *p * Rational::new(3, 5);
            }
            for (t, p) in py.level(r) {
                *mix.entry(t.clone()).or_default() += *p * Rational::new(2, 5);
            }
            assert_eq!(&mix, pu.level(r));
        }
    }

    #[test]
    fn profile_serialization_round_trips() {
        let x = act(&[&[1, 2, 0, 4, 3], &[0, 2, 1, 3, 4]]);
        let p = local_profile(&x, 2).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        let back: TraceProfile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    fn perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((0..n).collect::<Vec<usize>>()).prop_shuffle()
    }

    fn action(n: usize, m: usize) -> impl Strategy<Value = FiniteAction> {
        prop::collection::vec(perm(n), m).prop_map(|g| FiniteAction::from_images(g).unwrap())
    }

    fn pair(max_n: usize, m: usize) -> impl Strategy<Value = (FiniteAction, FiniteAction)> {
        (1..=max_n).prop_flat_map(move |n| (action(n, m), action(n, m)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exact_matches_brute_force((x, y) in pair(6, 2)) {
            let exact = d_gen_exact(&x, &y, 8).unwrap();
            prop_assert_eq!(exact.value, brute_d_gen(&x, &y));
            prop_assert_eq!(gen_norm(&exact.witness, &x, &y).unwrap(), exact.value);
            let upper = d_gen_upper(&x, &y, 4, 3).unwrap();
            prop_assert!(upper.value >= exact.value);
            prop_assert_eq!(gen_norm(&upper.witness, &x, &y).unwrap(), upper.value);
        }

        #[test]
        fn d_gen_is_a_metric((x, y, z) in (1usize..=5).prop_flat_map(|n| (action(n, 2), action(n, 2), action(n, 2)))) {
            let dxy = d_gen_exact(&x, &y, 8).unwrap().value;
            let dyx = d_gen_exact(&y, &x, 8).unwrap().value;
            let dyz = d_gen_exact(&y, &z, 8).unwrap().value;
            let dxz = d_gen_exact(&x, &z, 8).unwrap().value;
            prop_assert_eq!(dxy, dyx);
            prop_assert!(dxz <= dxy + dyz);
            prop_assert_eq!(d_gen_exact(&x, &x, 8).unwrap().value, Rational::zero());
        }

        #[test]
        fn zero_distance_iff_isomorphic(x in (1usize..=6).prop_flat_map(|n| action(n, 2)), relabel in perm(6)) {
            let n = x.n();
            let sigma: Vec<usize> = relabel.into_iter().filter(|&v| v < n).collect();
            // conjugate every generator by sigma
            let mut inv = vec![0; n];
            for (i, &v) in sigma.iter().enumerate() { inv[v] = i; }
            let gens = x.generators().iter()
                .map(|g| (0..n).map(|p| sigma[g.apply(inv[p])]).collect())
                .collect();
            let y = FiniteAction::from_images(gens).unwrap();
            prop_assert_eq!(gen_norm(&Bijection::new(sigma).unwrap(), &x, &y).unwrap(), Rational::zero());
            prop_assert_eq!(d_gen_exact(&x, &y, 8).unwrap().value, Rational::zero());
        }

        #[test]
        fn gen_norm_inverse_symmetry((x, y) in pair(10, 2), f in perm(10)) {
            let n = x.n();
            let f = Bijection::new(f.into_iter().filter(|&v| v < n).collect()).unwrap();
            prop_assert_eq!(gen_norm(&f, &x, &y).unwrap(), gen_norm(&f.inverse(), &y, &x).unwrap());
        }

        #[test]
        fn truncation_tail_is_geometric((x, y) in pair(12, 2), r in 1usize..3) {
            let short = d_stat_trunc(&x, &y, r).unwrap();
            let long = d_stat_trunc(&x, &y, 3).unwrap();
            prop_assert!(long >= short);
            prop_assert!(long - short <= inv_pow2(r));
        }

        #[test]
        fn statistics_bounded_by_generator_norm((x, y) in pair(20, 2), f in perm(20)) {
            let n = x.n();
            let f = Bijection::new(f.into_iter().filter(|&v| v < n).collect()).unwrap();
            let norm = gen_norm(&f, &x, &y).unwrap();
            let tvs = level_distances(&local_profile(&x, 3).unwrap(), &local_profile(&y, 3).unwrap(), 3).unwrap();
            for (i, tv) in tvs.into_iter().enumerate() {
                prop_assert!(tv <= stat_bound(2, i + 1, norm));
            }
        }
    }
}
