//! Finite actions of the free group: one permutation per basis letter.
//!
//! Points are `0..n`. Words act on the left, `(uv)·x = u·(v·x)`, so the
//! rightmost letter of a word is applied first.

use std::collections::VecDeque;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::rational::{ratio_or_zero, Rational};
use crate::words::{Ball, Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ActionError {
    #[error("image list is not a bijection of 0..{n}")]
    NotBijection { n: usize },
    #[error("size mismatch: {left} points vs {right} points")]
    SizeMismatch { left: usize, right: usize },
    #[error("basis size mismatch: {left} generators vs {right} generators")]
    RankMismatch { left: usize, right: usize },
    #[error("point {x} out of range for an action on {n} points")]
    PointOutOfRange { x: usize, n: usize },
    #[error("word uses generator {index} but the action has only {m} generators")]
    WordOutOfRange { index: usize, m: usize },
}

/// A bijection of `0..n`, stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, ActionError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &y in &images {
            if y >= n || seen[y] {
                return Err(ActionError::NotBijection { n });
            }
            seen[y] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// The transposition of `a` and `b` on `n` points.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Permutation { images }
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
        Permutation { images }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        Permutation {
            images: other.images.iter().map(|&y| self.images[y]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(x, &y)| x == y)
    }

    pub fn fixed_points(&self) -> usize {
        self.images
            .iter()
            .enumerate()
            .filter(|&(x, &y)| x == y)
            .count()
    }

    pub fn moved_points(&self) -> usize {
        self.len() - self.fixed_points()
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let images = Vec::<usize>::deserialize(d)?;
        Permutation::new(images).map_err(serde::de::Error::custom)
    }
}

/// Normalized Hamming distance `|{x : σ(x) ≠ τ(x)}| / n`. Zero on the empty set.
pub fn hamming(sigma: &Permutation, tau: &Permutation) -> Result<Rational, ActionError> {
    if sigma.len() != tau.len() {
        return Err(ActionError::SizeMismatch {
            left: sigma.len(),
            right: tau.len(),
        });
    }
    let differ = sigma
        .images
        .iter()
        .zip(&tau.images)
        .filter(|(a, b)| a != b)
        .count();
    Ok(ratio_or_zero(differ, sigma.len()))
}

/// Sorted indices into a [`Ball`] of the words fixing a point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Trace(Vec<u32>);

impl<'de> Deserialize<'de> for Trace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Vec::<u32>::deserialize(d).map(Trace::new)
    }
}

impl Trace {
    pub fn new(mut indices: Vec<u32>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Trace(indices)
    }

    /// Every word of a ball with `size` elements.
    pub fn full(size: usize) -> Self {
        Trace((0..size as u32).collect())
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&(index as u32)).is_ok()
    }

    /// Restriction to the first `size` ball words, i.e. to a smaller radius.
    pub fn restrict(&self, size: usize) -> Self {
        let end = self.0.partition_point(|&i| (i as usize) < size);
        Trace(self.0[..end].to_vec())
    }
}

#[derive(Serialize, Deserialize)]
struct ActionRecord {
    n: usize,
    m: usize,
    gens: Vec<Permutation>,
}

/// A finite set with one permutation per basis letter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ActionRecord", into = "ActionRecord")]
pub struct FiniteAction {
    n: usize,
    gens: Vec<Permutation>,
    inverses: Vec<Permutation>,
}

impl TryFrom<ActionRecord> for FiniteAction {
    type Error = ActionError;

    fn try_from(rec: ActionRecord) -> Result<Self, Self::Error> {
        if rec.gens.len() != rec.m {
            return Err(ActionError::RankMismatch {
                left: rec.m,
                right: rec.gens.len(),
            });
        }
        FiniteAction::new(rec.n, rec.gens)
    }
}

impl From<FiniteAction> for ActionRecord {
    fn from(a: FiniteAction) -> Self {
        ActionRecord {
            n: a.n,
            m: a.gens.len(),
            gens: a.gens,
        }
    }
}

impl FiniteAction {
    pub fn new(n: usize, gens: Vec<Permutation>) -> Result<Self, ActionError> {
        if let Some(p) = gens.iter().find(|p| p.len() != n) {
            return Err(ActionError::SizeMismatch {
                left: n,
                right: p.len(),
            });
        }
        let inverses = gens.iter().map(Permutation::inverse).collect();
        Ok(FiniteAction { n, gens, inverses })
    }

    /// Builds from raw image lists; `n` is taken from the first list.
    pub fn from_images(images: Vec<Vec<usize>>) -> Result<Self, ActionError> {
        let n = images.first().map_or(0, Vec::len);
        let gens = images
            .into_iter()
            .map(Permutation::new)
            .collect::<Result<Vec<_>, _>>()?;
        FiniteAction::new(n, gens)
    }

    /// `n` points, all fixed by every generator.
    pub fn trivial(n: usize, m: usize) -> Self {
        FiniteAction::new(n, vec![Permutation::identity(n); m]).expect("identity is a bijection")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.gens.len()
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.gens
    }

    pub fn generator(&self, i: usize) -> &Permutation {
        &self.gens[i]
    }

    /// Replaces generator `i`, keeping the cached inverse in sync.
    pub fn with_generator(&self, i: usize, perm: Permutation) -> Result<Self, ActionError> {
        let mut gens = self.gens.clone();
        gens[i] = perm;
        FiniteAction::new(self.n, gens)
    }

    pub fn check_word(&self, w: &Word) -> Result<(), ActionError> {
        if w.fits(self.m()) {
            Ok(())
        } else {
            Err(ActionError::WordOutOfRange {
                index: w.rank() - 1,
                m: self.m(),
            })
        }
    }

    pub fn check_point(&self, x: usize) -> Result<(), ActionError> {
        if x < self.n {
            Ok(())
        } else {
            Err(ActionError::PointOutOfRange { x, n: self.n })
        }
    }

    #[inline]
    pub fn apply_letter(&self, l: Letter, x: usize) -> usize {
        if l.is_inverse() {
            self.inverses[l.generator()].images[x]
        } else {
            self.gens[l.generator()].images[x]
        }
    }

    /// `w·x`. Panics if `w` uses a generator outside the basis; see
    /// [`FiniteAction::check_word`].
    pub fn act(&self, w: &Word, x: usize) -> usize {
        w.letters()
            .iter()
            .rev()
            .fold(x, |y, &l| self.apply_letter(l, y))
    }

    /// The permutation `w(σ_1, ..., σ_m)`.
    pub fn evaluate(&self, w: &Word) -> Permutation {
        Permutation {
            images: (0..self.n).map(|x| self.act(w, x)).collect(),
        }
    }

    /// Number of points moved by `w`.
    pub fn moved_count(&self, w: &Word) -> usize {
        (0..self.n).filter(|&x| self.act(w, x) != x).count()
    }

    /// Sum over generators of the Hamming distances.
    pub fn tuple_distance(&self, other: &FiniteAction) -> Result<Rational, ActionError> {
        self.check_compatible(other)?;
        self.gens
            .iter()
            .zip(&other.gens)
            .try_fold(Rational::zero(), |acc, (a, b)| Ok(acc + hamming(a, b)?))
    }

    pub fn check_compatible(&self, other: &FiniteAction) -> Result<(), ActionError> {
        if self.n != other.n {
            return Err(ActionError::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        if self.m() != other.m() {
            return Err(ActionError::RankMismatch {
                left: self.m(),
                right: other.m(),
            });
        }
        Ok(())
    }

    /// `Σ_{w ∈ E} d(w(σ), 1)`. The action is a δ-solution for `E` exactly
    /// when this is at most δ.
    pub fn defect<'a, I>(&self, words: I) -> Rational
    where
        I: IntoIterator<Item = &'a Word>,
    {
        words
            .into_iter()
            .map(|w| ratio_or_zero(self.moved_count(w), self.n))
            .sum()
    }

    /// Fraction of points fixed by `w`; one on the empty set.
    pub fn fixed_fraction(&self, w: &Word) -> Rational {
        if self.n == 0 {
            return Rational::from(1);
        }
        ratio_or_zero(self.n - self.moved_count(w), self.n)
    }

    pub fn is_solution<'a, I>(&self, words: I) -> bool
    where
        I: IntoIterator<Item = &'a Word>,
    {
        words.into_iter().all(|w| self.moved_count(w) == 0)
    }

    /// `self ⊔ other`, with `other`'s points shifted past `self`'s.
    pub fn disjoint_union(&self, other: &FiniteAction) -> Result<Self, ActionError> {
        if self.m() != other.m() {
            return Err(ActionError::RankMismatch {
                left: self.m(),
                right: other.m(),
            });
        }
        let n = self.n + other.n;
        let gens = self
            .gens
            .iter()
            .zip(&other.gens)
            .map(|(a, b)| {
                let mut images = a.images.clone();
                images.extend(b.images.iter().map(|&y| y + self.n));
                Permutation { images }
            })
            .collect();
        FiniteAction::new(n, gens)
    }

    /// `k` disjoint copies; copy `j` occupies points `j·n .. (j+1)·n`.
    pub fn power(&self, k: usize) -> Self {
        let n = self.n * k;
        let gens = self
            .gens
            .iter()
            .map(|p| Permutation {
                images: (0..k)
                    .flat_map(|j| p.images.iter().map(move |&y| y + j * self.n))
                    .collect(),
            })
            .collect();
        FiniteAction::new(n, gens).expect("copies of bijections")
    }

    /// Neighbours of `x` in the Schreier graph (images under every letter),
    /// possibly with repeats and `x` itself.
    pub fn neighbours(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.gens
            .iter()
            .zip(&self.inverses)
            .flat_map(move |(g, h)| [g.images[x], h.images[x]])
    }

    /// Orbits, each sorted, listed by smallest point.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut orbit = vec![start];
            let mut i = 0;
            while i < orbit.len() {
                let x = orbit[i];
                i += 1;
                for y in self.neighbours(x) {
                    if !seen[y] {
                        seen[y] = true;
                        orbit.push(y);
                    }
                }
            }
            orbit.sort_unstable();
            out.push(orbit);
        }
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.n > 0 && self.orbits().len() == 1
    }

    /// `{ i : ball[i]·x = x }`.
    pub fn stabilizer_trace(&self, x: usize, ball: &Ball) -> Result<Trace, ActionError> {
        self.check_point(x)?;
        if ball.m() != self.m() {
            return Err(ActionError::RankMismatch {
                left: self.m(),
                right: ball.m(),
            });
        }
        let mut images = vec![0usize; ball.len()];
        Ok(self.trace_into(x, ball, &mut images))
    }

    /// Traces of every point, in point order.
    pub fn traces(&self, ball: &Ball) -> Result<Vec<Trace>, ActionError> {
        if ball.m() != self.m() {
            return Err(ActionError::RankMismatch {
                left: self.m(),
                right: ball.m(),
            });
        }
        let mut images = vec![0usize; ball.len()];
        Ok((0..self.n)
            .map(|x| self.trace_into(x, ball, &mut images))
            .collect())
    }

    fn trace_into(&self, x: usize, ball: &Ball, images: &mut [usize]) -> Trace {
        images[0] = x;
        let mut fixed = vec![0u32];
        for i in 1..ball.len() {
            let (head, tail) = ball.split(i);
            let y = self.apply_letter(head, images[tail]);
            images[i] = y;
            if y == x {
                fixed.push(i as u32);
            }
        }
        Trace(fixed)
    }

    /// The orbit of `base`, relabeled in breadth-first order from `base`
    /// (letters scanned as `s_1, ..., s_m, s_1^{-1}, ..., s_m^{-1}`), together
    /// with a word reaching each relabeled point. Two pointed transitive
    /// actions are isomorphic exactly when their canonical forms are equal.
    pub fn pointed_canonical(&self, base: usize) -> (FiniteAction, Vec<Word>) {
        let m = self.m();
        let order: Vec<Letter> = (0..m)
            .map(|i| Letter::new(i, false))
            .chain((0..m).map(|i| Letter::new(i, true)))
            .collect();
        let mut label = vec![usize::MAX; self.n];
        let mut points = vec![base];
        let mut paths = vec![Word::identity()];
        label[base] = 0;
        let mut queue = VecDeque::from([base]);
        while let Some(x) = queue.pop_front() {
            for &l in &order {
                let y = self.apply_letter(l, x);
                if label[y] == usize::MAX {
                    label[y] = points.len();
                    paths.push(Word::letter(l).concat(&paths[label[x]]));
                    points.push(y);
                    queue.push_back(y);
                }
            }
        }
        let gens = self
            .gens
            .iter()
            .map(|p| Permutation {
                images: points.iter().map(|&x| label[p.images[x]]).collect(),
            })
            .collect();
        let relabeled = FiniteAction::new(points.len(), gens).expect("orbit is invariant");
        (relabeled, paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::ball;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn act(images: &[&[usize]]) -> FiniteAction {
        FiniteAction::from_images(images.iter().map(|v| v.to_vec()).collect()).unwrap()
    }

    /// Applies the letters of `w` one at a time, rightmost first.
    fn evaluate_by_letters(x: &FiniteAction, word: &Word) -> Vec<usize> {
        (0..x.n())
            .map(|mut p| {
                for l in word.letters().iter().rev() {
                    let g = x.generator(l.generator());
                    p = if l.is_inverse() {
                        g.images().iter().position(|&y| y == p).unwrap()
                    } else {
                        g.apply(p)
                    };
                }
                p
            })
            .collect()
    }

    #[test]
    fn evaluate_examples() {
        let x = act(&[&[1, 2, 0], &[1, 0, 2]]);
        let ab = x.evaluate(&w("ab"));
        assert_eq!(ab.apply(0), 2);
        assert_eq!(ab.images(), &evaluate_by_letters(&x, &w("ab"))[..]);
        assert_eq!(ab.images(), &[2, 1, 0]);
        assert!(x.evaluate(&w("")).is_identity());
        assert!(x.evaluate(&w("aA")).is_identity());
    }

    #[test]
    fn hamming_examples() {
        let id = Permutation::identity(3);
        let cycle = Permutation::new(vec![1, 2, 0]).unwrap();
        let swap = Permutation::new(vec![1, 0, 2]).unwrap();
        assert_eq!(hamming(&cycle, &id).unwrap(), Rational::from(1));
        assert_eq!(hamming(&swap, &id).unwrap(), Rational::new(2, 3));
        assert_eq!(hamming(&swap, &swap).unwrap(), Rational::zero());
        assert!(matches!(
            hamming(&swap, &Permutation::identity(2)),
            Err(ActionError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn permutation_rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        assert!(serde_json::from_str::<FiniteAction>(r#"{"n":2,"m":1,"gens":[[1,1]]}"#).is_err());
        assert!(serde_json::from_str::<FiniteAction>(r#"{"n":2,"m":2,"gens":[[1,0]]}"#).is_err());
    }

    #[test]
    fn tuple_distance_examples() {
        let x = act(&[&[1, 0], &[1, 0]]);
        let y = act(&[&[0, 1], &[1, 0]]);
        assert_eq!(x.tuple_distance(&x).unwrap(), Rational::zero());
        assert_eq!(x.tuple_distance(&y).unwrap(), Rational::from(1));
        let a = act(&[&[1, 2, 0]]);
        let b = act(&[&[0, 1, 2]]);
        assert_eq!(a.tuple_distance(&b).unwrap(), Rational::from(1));
        assert!(a.tuple_distance(&x).is_err());
    }

    #[test]
    fn defect_examples() {
        let comm = w("abAB");
        let x = act(&[&[1, 0, 2], &[0, 2, 1]]);
        // brute force: the commutator moves every point
        let moved = evaluate_by_letters(&x, &comm)
            .iter()
            .enumerate()
            .filter(|(p, &q)| *p != q)
            .count();
        assert_eq!(moved, 3);
        assert_eq!(x.defect([&comm]), Rational::from(1));
        assert!(!x.is_solution([&comm]));
        assert_eq!(x.fixed_fraction(&comm), Rational::zero());

        let y = act(&[&[1, 0], &[1, 0]]);
        assert_eq!(y.defect([&comm]), Rational::zero());
        assert!(y.is_solution([&comm]));
        assert_eq!(y.defect(std::iter::empty::<&Word>()), Rational::zero());
        assert!(y.is_solution(std::iter::empty::<&Word>()));
    }

    #[test]
    fn fixed_fraction_examples() {
        let x = act(&[&[1, 0, 2]]);
        assert_eq!(x.fixed_fraction(&w("")), Rational::from(1));
        assert_eq!(x.fixed_fraction(&w("a")), Rational::new(1, 3));
    }

    #[test]
    fn union_power_trivial() {
        let x = act(&[&[1, 2, 0], &[1, 0, 2]]);
        let y = act(&[&[1, 0], &[0, 1]]);
        let u = x.disjoint_union(&y).unwrap();
        assert_eq!(u.n(), 5);
        assert_eq!(u.generator(0).images(), &[1, 2, 0, 4, 3]);
        assert_eq!(x.power(0).n(), 0);
        assert_eq!(x.power(3).n(), 9);
        let z = FiniteAction::trivial(4, 2);
        assert_eq!(z.defect([&w("abAB"), &w("aab")]), Rational::zero());
    }

    #[test]
    fn orbit_examples() {
        let x = act(&[&[1, 0, 3, 2]]);
        assert_eq!(x.orbits(), vec![vec![0, 1], vec![2, 3]]);
        assert!(act(&[&[1, 2, 0]]).is_transitive());
        assert_eq!(
            FiniteAction::trivial(3, 1).orbits(),
            vec![vec![0], vec![1], vec![2]]
        );
    }

    #[test]
    fn trace_examples() {
        let b = Ball::new(1, 1);
        let z = FiniteAction::trivial(3, 1);
        assert_eq!(z.stabilizer_trace(1, &b).unwrap(), Trace::full(3));
        let swap = act(&[&[1, 0]]);
        assert_eq!(swap.stabilizer_trace(0, &b).unwrap(), Trace::new(vec![0]));
        assert!(swap.stabilizer_trace(2, &b).is_err());

        // a free orbit: a long cycle with radius 3 has no short relation
        let long: Vec<usize> = (1..20).chain([0]).collect();
        let cyc = act(&[&long]);
        assert_eq!(cyc.stabilizer_trace(5, &Ball::new(1, 3)).unwrap(), Trace::new(vec![0]));
    }

    #[test]
    fn trace_matches_direct_evaluation() {
        let x = act(&[&[1, 2, 0, 4, 3], &[0, 1, 3, 2, 4]]);
        let b = Ball::new(2, 3);
        let words = ball(2, 3);
        for p in 0..x.n() {
            let direct: Vec<u32> = words
                .iter()
                .enumerate()
                .filter(|(_, u)| x.act(u, p) == p)
                .map(|(i, _)| i as u32)
                .collect();
            assert_eq!(x.stabilizer_trace(p, &b).unwrap().indices(), &direct[..]);
        }
    }

    #[test]
    fn canonical_form_detects_pointed_isomorphism() {
        let s = act(&[&[1, 0, 2]]);
        assert_ne!(s.pointed_canonical(0).0, s.pointed_canonical(2).0);
        assert_eq!(s.pointed_canonical(0).0, s.pointed_canonical(1).0);
        let x = act(&[&[1, 2, 0]]);
        let y = act(&[&[2, 0, 1]]);
        assert_eq!(x.pointed_canonical(0).0, y.pointed_canonical(0).0);
        let (canon, paths) = x.pointed_canonical(1);
        for (i, p) in paths.iter().enumerate() {
            assert_eq!(canon.act(p, 0), i);
        }
    }

    fn perm(n: usize) -> impl Strategy<Value = Permutation> {
        Just((0..n).collect::<Vec<usize>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::new(v).unwrap())
    }

    fn action(n: usize, m: usize) -> impl Strategy<Value = FiniteAction> {
        prop::collection::vec(perm(n), m).prop_map(move |g| FiniteAction::new(n, g).unwrap())
    }

    fn word(m: usize, max: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec((0..m, any::<bool>()), 0..=max)
            .prop_map(|v| Word::from_letters(v.into_iter().map(|(g, i)| Letter::new(g, i))))
    }

    proptest! {
        #[test]
        fn evaluation_is_a_homomorphism(
            x in (1usize..10).prop_flat_map(|n| action(n, 2)),
            u in word(2, 8),
            v in word(2, 8),
        ) {
            let lhs = x.evaluate(&u.concat(&v));
            let rhs = x.evaluate(&u).compose(&x.evaluate(&v));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn defect_bounded_by_word_count(
            x in (1usize..10).prop_flat_map(|n| action(n, 2)),
            ws in prop::collection::vec(word(2, 6), 0..4),
        ) {
            let d = x.defect(&ws);
            prop_assert!(d <= Rational::from(ws.len() as i128));
            prop_assert_eq!(d.is_zero(), x.is_solution(&ws));
        }

        #[test]
        fn power_preserves_traces(
            x in (1usize..8).prop_flat_map(|n| action(n, 2)),
            k in 1usize..4,
        ) {
            let b = Ball::new(2, 2);
            let base = x.traces(&b).unwrap();
            let pow = x.power(k).traces(&b).unwrap();
            for (i, t) in pow.iter().enumerate() {
                prop_assert_eq!(t, &base[i % x.n()]);
            }
        }
    }
}
