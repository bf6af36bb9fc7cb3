//! Breaking Schreier graphs into small pieces.
//!
//! A decomposition removes a set `Z` of at most `ε·n` points and reports the
//! size `K` of the largest component left once every edge touching `Z` is
//! deleted. Removed points count as singleton components.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::actions::FiniteAction;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HyperfiniteError {
    #[error("epsilon must lie in (0, 1], got {0}")]
    InvalidEpsilon(Rational),
    #[error("unknown strategy {0:?}; available: bfs-tiling")]
    UnknownStrategy(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    BfsTiling,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::BfsTiling => f.write_str("bfs-tiling"),
        }
    }
}

impl FromStr for Strategy {
    type Err = HyperfiniteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bfs-tiling" => Ok(Strategy::BfsTiling),
            other => Err(HyperfiniteError::UnknownStrategy(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub removed: Vec<usize>,
    #[serde(rename = "K")]
    pub largest_component: usize,
    #[serde(with = "crate::rational::string")]
    pub epsilon_used: Rational,
}

/// Largest component once the points flagged in `removed` are cut out.
fn largest_after(x: &FiniteAction, removed: &[bool]) -> usize {
    let n = x.n();
    let mut seen = removed.to_vec();
    let mut best = usize::from(removed.iter().any(|&r| r));
    let mut stack = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0;
        while let Some(p) = stack.pop() {
            size += 1;
            for q in x.neighbours(p) {
                if !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
        best = best.max(size);
    }
    best
}

fn budget(epsilon: Rational, n: usize) -> usize {
    let b = epsilon * Rational::from(n as i128);
    b.floor().to_integer() as usize
}

/// One tiling pass with tiles of `tile_size` points. Components of size at
/// most `tile_size` are left alone. The pass stops as soon as a fence
/// would exceed the budget.
fn tile(x: &FiniteAction, orbits: &[Vec<usize>], tile_size: usize, budget: usize) -> Vec<bool> {
    let n = x.n();
    let mut removed = vec![false; n];
    let mut visited = vec![false; n];
    let mut used = 0;
    let mut queue = Vec::new();
    let mut fence = Vec::new();
    for orbit in orbits {
        if orbit.len() <= tile_size {
            continue;
        }
        for &seed in orbit {
            if visited[seed] || removed[seed] {
                continue;
            }
            queue.clear();
            queue.push(seed);
            visited[seed] = true;
            let mut i = 0;
            while i < queue.len() && queue.len() < tile_size {
                let p = queue[i];
                i += 1;
                for q in x.neighbours(p) {
                    if queue.len() == tile_size {
                        break;
                    }
                    if !visited[q] && !removed[q] {
                        visited[q] = true;
                        queue.push(q);
                    }
                }
            }
            fence.clear();
            for &p in &queue {
                for q in x.neighbours(p) {
                    if !visited[q] && !removed[q] && !fence.contains(&q) {
                        fence.push(q);
                    }
                }
            }
            if used + fence.len() > budget {
                return removed;
            }
            used += fence.len();
            for &q in &fence {
                removed[q] = true;
            }
        }
    }
    removed
}

/// Removes at most `⌊ε·n⌋` points. Nothing is removed when every component
/// already has at most `⌈1/ε⌉` points. Otherwise tile sizes are swept upward
/// from `⌈1/ε⌉ - 1` and the pass with the smallest `K` is kept (then fewest
/// removed, then smallest tile). A pass with tiles of `s` points never
/// achieves `K < s`, which bounds the sweep.
pub fn decompose(
    x: &FiniteAction,
    epsilon: Rational,
    strategy: Strategy,
) -> Result<Decomposition, HyperfiniteError> {
    if epsilon <= Rational::zero() || epsilon > Rational::one() {
        return Err(HyperfiniteError::InvalidEpsilon(epsilon));
    }
    let Strategy::BfsTiling = strategy;
    let n = x.n();
    let orbits = x.orbits();
    let max_orbit = orbits.iter().map(Vec::len).max().unwrap_or(0);
    let b = budget(epsilon, n);
    let t0 = target_tile(epsilon);
    if max_orbit <= t0 {
        return Ok(Decomposition {
            removed: Vec::new(),
            largest_component: max_orbit,
            epsilon_used: epsilon,
        });
    }
    let mut best: Option<(usize, usize, Vec<bool>)> = None;
    let first = t0.saturating_sub(1).max(1);
    for size in first..=first.max(max_orbit) {
        if let Some((k, _, _)) = &best {
            if size > *k {
                break;
            }
        }
        let removed = tile(x, &orbits, size, b);
        let k = largest_after(x, &removed);
        let z = removed.iter().filter(|&&r| r).count();
        if best.as_ref().is_none_or(|(bk, bz, _)| (k, z) < (*bk, *bz)) {
            best = Some((k, z, removed));
        }
    }
    let (k, _, removed) = best.unwrap_or((0, 0, Vec::new()));
    Ok(Decomposition {
        removed: (0..n).filter(|&p| removed[p]).collect(),
        largest_component: k,
        epsilon_used: epsilon,
    })
}

/// Recomputes the components and validates both the budget and `K`.
pub fn check(x: &FiniteAction, d: &Decomposition) -> bool {
    let n = x.n();
    let mut removed = vec![false; n];
    for &p in &d.removed {
        if p >= n || removed[p] {
            return false;
        }
        removed[p] = true;
    }
    let within = Rational::from(d.removed.len() as i128) <= d.epsilon_used * Rational::from(n as i128);
    within && largest_after(x, &removed) == d.largest_component
}

/// `⌈1/ε⌉`.
pub fn target_tile(epsilon: Rational) -> usize {
    let inv = epsilon.recip();
    Integer::div_ceil(inv.numer(), inv.denom()) as usize
}

#[cfg(test)]
mod tests {
    use super::Strategy as Tiling;
    use super::*;
    use proptest::prelude::{prop, prop_assert, prop_assert_eq, prop_assume, proptest, Just};
    use proptest::strategy::Strategy as _;

    fn cycle(n: usize) -> FiniteAction {
        FiniteAction::from_images(vec![(0..n).map(|i| (i + 1) % n).collect()]).unwrap()
    }

    /// Component sizes by plain flood fill over the edge list.
    fn components_oracle(x: &FiniteAction, removed: &[usize]) -> usize {
        let n = x.n();
        let mut label: Vec<usize> = (0..n).collect();
        fn find(l: &mut [usize], a: usize) -> usize {
            let mut r = a;
            while l[r] != r {
                r = l[r];
            }
            l[a] = r;
            r
        }
        for g in x.generators() {
            for p in 0..n {
                let q = g.apply(p);
                if removed.contains(&p) || removed.contains(&q) {
                    continue;
                }
                let (a, b) = (find(&mut label, p), find(&mut label, q));
                label[a] = b;
            }
        }
        let mut size = vec![0; n];
        for p in 0..n {
            let r = find(&mut label, p);
            size[r] += 1;
        }
        size.into_iter().max().unwrap_or(0)
    }

    #[test]
    fn hundred_cycle() {
        let x = cycle(100);
        let d = decompose(&x, Rational::new(1, 10), Tiling::BfsTiling).unwrap();
        assert_eq!(d.removed.len(), 10);
        assert_eq!(d.largest_component, 9);
        assert_eq!(components_oracle(&x, &d.removed), 9);
        assert!(check(&x, &d));
    }

    #[test]
    fn thousand_cycle() {
        let x = cycle(1000);
        let d = decompose(&x, Rational::new(1, 20), Tiling::BfsTiling).unwrap();
        assert!(d.removed.len() <= 50);
        assert!(d.largest_component <= 20);
        assert_eq!(components_oracle(&x, &d.removed), d.largest_component);
        assert!(check(&x, &d));
    }

    #[test]
    fn trivial_and_small_components() {
        let t = FiniteAction::trivial(7, 2);
        let d = decompose(&t, Rational::new(1, 3), Tiling::BfsTiling).unwrap();
        assert!(d.removed.is_empty());
        assert_eq!(d.largest_component, 1);
        let small = cycle(4).power(5);
        for eps in [Rational::new(1, 4), Rational::new(1, 5), Rational::new(1, 9)] {
            let d = decompose(&small, eps, Tiling::BfsTiling).unwrap();
            assert!(d.removed.is_empty());
            assert_eq!(d.largest_component, 4);
        }
        // components larger than the target tile are still cut
        let d = decompose(&small, Rational::new(1, 2), Tiling::BfsTiling).unwrap();
        assert!(check(&small, &d));
        assert!(d.largest_component < 4);
    }

    #[test]
    fn checker_rejects_tampering() {
        let x = cycle(100);
        let d = decompose(&x, Rational::new(1, 10), Tiling::BfsTiling).unwrap();
        let mut low = d.clone();
        low.largest_component -= 1;
        assert!(!check(&x, &low));
        let mut greedy = d.clone();
        greedy.removed = (0..11).map(|i| i * 9).collect();
        assert!(!check(&x, &greedy));
        let mut dup = d;
        dup.removed.push(dup.removed[0]);
        assert!(!check(&x, &dup));
    }

    #[test]
    fn rejects_bad_input() {
        let x = cycle(5);
        assert!(decompose(&x, Rational::zero(), Tiling::BfsTiling).is_err());
        assert!(decompose(&x, Rational::new(3, 2), Tiling::BfsTiling).is_err());
        assert!("greedy".parse::<Tiling>().is_err());
        assert_eq!("bfs-tiling".parse::<Tiling>().unwrap(), Tiling::BfsTiling);
    }

    #[test]
    fn serializes_with_k() {
        let d = Decomposition {
            removed: vec![3],
            largest_component: 2,
            epsilon_used: Rational::new(1, 4),
        };
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v, serde_json::json!({"removed": [3], "K": 2, "epsilon_used": "1/4"}));
    }

    fn action(n: usize, m: usize) -> impl proptest::strategy::Strategy<Value = FiniteAction> {
        prop::collection::vec(Just((0..n).collect::<Vec<usize>>()).prop_shuffle(), m)
            .prop_map(|g| FiniteAction::from_images(g).unwrap())
    }

    proptest! {
        #[test]
        fn output_always_checks(x in (1usize..60).prop_flat_map(|n| action(n, 2)), d in 1i128..12) {
            let eps = Rational::new(1, d);
            let dec = decompose(&x, eps, Tiling::BfsTiling).unwrap();
            prop_assert!(check(&x, &dec));
            prop_assert_eq!(components_oracle(&x, &dec.removed), dec.largest_component);
        }

        #[test]
        fn monotone_in_epsilon(x in (1usize..60).prop_flat_map(|n| action(n, 1)), a in 1i128..12, b in 1i128..12) {
            let (lo, hi) = (a.max(b), a.min(b));
            let k_small = decompose(&x, Rational::new(1, lo), Tiling::BfsTiling).unwrap().largest_component;
            let k_large = decompose(&x, Rational::new(1, hi), Tiling::BfsTiling).unwrap().largest_component;
            prop_assert!(k_large <= k_small);
        }

        #[test]
        fn cycles_reach_target_when_budget_allows(n in 2usize..400, d in 2i128..30) {
            let eps = Rational::new(1, d);
            let budget = (Rational::from(n as i128) * eps).floor().to_integer() as usize;
            let t = target_tile(eps);
            prop_assume!(n <= budget * (t + 1) || n <= t);
            let dec = decompose(&cycle(n), eps, Tiling::BfsTiling).unwrap();
            prop_assert!(dec.largest_component <= t);
        }
    }
}
