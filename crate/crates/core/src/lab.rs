//! Stability challenges: perturb a genuine action, try to repair it, and
//! measure how far the repair moved.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use itertools::Itertools;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::actions::{ActionError, FiniteAction};
use crate::cosets::{catalog_presentation, todd_coxeter, CosetError, GroupId, DEFAULT_MAX_COSETS};
use crate::irs::{amplify, IrsError};
use crate::metrics::{d_stat_trunc, gen_norm, stat_bound, Bijection, MetricError};
use crate::rational::{format_rational, inv_pow2, ratio_or_zero, Rational};
use crate::words::{Letter, Word};

pub const BRUTE_MAX_POINTS: usize = 6;
pub const BRUTE_MAX_TUPLES: u64 = 2_000_000;
pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabError {
    #[error("cannot apply {swaps} transpositions on {n} points")]
    TooSmall { n: usize, swaps: usize },
    #[error("cannot perturb an action without generators")]
    NoGenerators,
    #[error("the planted action is not a solution of the relators")]
    NotASolution,
    #[error("challenge is inconsistent: {0}")]
    Inconsistent(String),
    #[error("brute-force repair needs n <= {BRUTE_MAX_POINTS} and (n!)^m <= {BRUTE_MAX_TUPLES}, got n = {n}, m = {m}")]
    BruteTooLarge { n: usize, m: usize },
    #[error("unknown repair strategy {0:?}; available: descent, brute, planted")]
    UnknownStrategy(String),
    #[error("no action of size {size} for {group}: {reason}")]
    NoFamily {
        group: String,
        size: usize,
        reason: String,
    },
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Coset(#[from] CosetError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Irs(#[from] IrsError),
}

/// One logged perturbation: `σ_g ← σ_g ∘ (a b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perturbation {
    pub generator: usize,
    pub transposition: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Challenge {
    pub action: FiniteAction,
    pub relators: Vec<Word>,
    #[serde(default)]
    pub planted: Option<FiniteAction>,
    #[serde(default)]
    pub perturbation_log: Vec<Perturbation>,
}

impl Challenge {
    pub fn defect(&self) -> Rational {
        self.action.defect(&self.relators)
    }

    /// Relators fit the basis, the planted action solves them, and
    /// replaying the log on it gives the action.
    pub fn validate(&self) -> Result<(), LabError> {
        for w in &self.relators {
            self.action.check_word(w)?;
        }
        let Some(planted) = &self.planted else {
            return Ok(());
        };
        planted.check_compatible(&self.action)?;
        if !planted.is_solution(&self.relators) {
            return Err(LabError::NotASolution);
        }
        let mut images: Vec<Vec<usize>> = planted.generators().iter().map(|g| g.images().to_vec()).collect();
        for p in &self.perturbation_log {
            let [a, b] = p.transposition;
            if p.generator >= images.len() || a >= planted.n() || b >= planted.n() {
                return Err(LabError::Inconsistent("log entry out of range".into()));
            }
            images[p.generator].swap(a, b);
        }
        if FiniteAction::from_images(images)? != self.action {
            return Err(LabError::Inconsistent("log does not reproduce the action".into()));
        }
        Ok(())
    }

    /// `Σ_{w} 2k|w|/n`, an upper bound on the defect after `k` logged swaps.
    pub fn defect_bound(&self) -> Rational {
        let k = self.perturbation_log.len();
        self.relators
            .iter()
            .map(|w| ratio_or_zero(2 * k * w.len(), self.action.n()))
            .sum()
    }
}

/// Composes `swaps` random transpositions into random generators of `planted`.
pub fn make_challenge(
    planted: &FiniteAction,
    relators: Vec<Word>,
    swaps: usize,
    seed: u64,
) -> Result<Challenge, LabError> {
    for w in &relators {
        planted.check_word(w)?;
    }
    if !planted.is_solution(&relators) {
        return Err(LabError::NotASolution);
    }
    let (n, m) = (planted.n(), planted.m());
    if swaps > 0 && n < 2 {
        return Err(LabError::TooSmall { n, swaps });
    }
    if swaps > 0 && m == 0 {
        return Err(LabError::NoGenerators);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images: Vec<Vec<usize>> = planted.generators().iter().map(|g| g.images().to_vec()).collect();
    let mut log = Vec::with_capacity(swaps);
    for _ in 0..swaps {
        let g = rng.random_range(0..m);
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        images[g].swap(a, b);
        log.push(Perturbation {
            generator: g,
            transposition: [a, b],
        });
    }
    Ok(Challenge {
        action: FiniteAction::from_images(images)?,
        relators,
        planted: Some(planted.clone()),
        perturbation_log: log,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepairStrategy {
    Descent,
    Brute,
    Planted,
}

impl fmt::Display for RepairStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RepairStrategy::Descent => "descent",
            RepairStrategy::Brute => "brute",
            RepairStrategy::Planted => "planted",
        })
    }
}

impl FromStr for RepairStrategy {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "descent" => Ok(RepairStrategy::Descent),
            "brute" => Ok(RepairStrategy::Brute),
            "planted" => Ok(RepairStrategy::Planted),
            other => Err(LabError::UnknownStrategy(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairReport {
    pub strategy: RepairStrategy,
    pub succeeded: bool,
    pub solution: Option<FiniteAction>,
    pub witness: Option<Bijection>,
    #[serde(with = "crate::rational::opt_string")]
    pub distance: Option<Rational>,
    /// Defect of the last candidate reached.
    #[serde(with = "crate::rational::string")]
    pub final_defect: Rational,
    /// Candidate moves evaluated.
    pub evaluated: usize,
}

impl RepairReport {
    fn solved(c: &Challenge, strategy: RepairStrategy, solution: FiniteAction, evaluated: usize) -> Result<Self, LabError> {
        let witness = Bijection::identity(c.action.n());
        let distance = gen_norm(&witness, &c.action, &solution)?;
        Ok(RepairReport {
            strategy,
            succeeded: true,
            solution: Some(solution),
            witness: Some(witness),
            distance: Some(distance),
            final_defect: Rational::zero(),
            evaluated,
        })
    }

    fn failed(strategy: RepairStrategy, final_defect: Rational, evaluated: usize) -> Self {
        RepairReport {
            strategy,
            succeeded: false,
            solution: None,
            witness: None,
            distance: None,
            final_defect,
            evaluated,
        }
    }
}

/// Local search state for `descent`. Each relator is walked from every
/// start point; the walks are indexed by the generator entry they read so
/// the effect of one transposition can be recomputed locally.
struct Descent {
    n: usize,
    relators: Vec<Vec<Letter>>,
    gens: Vec<Vec<usize>>,
    invs: Vec<Vec<usize>>,
    bad: Vec<Vec<bool>>,
    bad_count: usize,
    // [g][p]: walks reading σ_g at p, and walks reading σ_g^{-1} at p
    fwd: Vec<Vec<Vec<(u32, u32)>>>,
    inv: Vec<Vec<Vec<(u32, u32)>>>,
}

impl Descent {
    fn new(c: &Challenge) -> Self {
        let n = c.action.n();
        let gens: Vec<Vec<usize>> = c.action.generators().iter().map(|g| g.images().to_vec()).collect();
        let invs = gens
            .iter()
            .map(|g| {
                let mut v = vec![0; n];
                for (x, &y) in g.iter().enumerate() {
                    v[y] = x;
                }
                v
            })
            .collect();
        let m = gens.len();
        let mut d = Descent {
            n,
            relators: c
                .relators
                .iter()
                .map(|w| w.letters().iter().rev().copied().collect())
                .collect(),
            gens,
            invs,
            bad: Vec::new(),
            bad_count: 0,
            fwd: vec![vec![Vec::new(); n]; m],
            inv: vec![vec![Vec::new(); n]; m],
        };
        d.rebuild();
        d
    }

    #[inline]
    fn step(&self, l: Letter, y: usize) -> usize {
        if l.is_inverse() {
            self.invs[l.generator()][y]
        } else {
            self.gens[l.generator()][y]
        }
    }

    fn walk(&self, r: usize, x: usize) -> usize {
        self.relators[r].iter().fold(x, |y, &l| self.step(l, y))
    }

    fn rebuild(&mut self) {
        for lists in self.fwd.iter_mut().chain(self.inv.iter_mut()) {
            lists.iter_mut().for_each(Vec::clear);
        }
        self.bad = vec![vec![false; self.n]; self.relators.len()];
        self.bad_count = 0;
        for r in 0..self.relators.len() {
            for x in 0..self.n {
                let mut y = x;
                for &l in &self.relators[r] {
                    let g = l.generator();
                    if l.is_inverse() {
                        self.inv[g][y].push((r as u32, x as u32));
                    } else {
                        self.fwd[g][y].push((r as u32, x as u32));
                    }
                    y = self.step(l, y);
                }
                if y != x {
                    self.bad[r][x] = true;
                    self.bad_count += 1;
                }
            }
        }
    }

    fn touches_bad(&self, list: &[(u32, u32)]) -> bool {
        list.iter().any(|&(r, x)| self.bad[r as usize][x as usize])
    }

    /// Points `a` such that swapping at `a` in `σ_g` rereads some failing walk.
    fn hot_points(&self, g: usize) -> Vec<bool> {
        let mut hot = vec![false; self.n];
        for p in 0..self.n {
            if self.touches_bad(&self.fwd[g][p]) {
                hot[p] = true;
            }
            if self.touches_bad(&self.inv[g][p]) {
                hot[self.invs[g][p]] = true;
            }
        }
        hot
    }

    fn swap(&mut self, g: usize, a: usize, b: usize) {
        self.gens[g].swap(a, b);
        let (ya, yb) = (self.gens[g][a], self.gens[g][b]);
        self.invs[g][ya] = a;
        self.invs[g][yb] = b;
    }

    fn delta(&mut self, g: usize, a: usize, b: usize, scratch: &mut Vec<(u32, u32)>) -> isize {
        scratch.clear();
        scratch.extend_from_slice(&self.fwd[g][a]);
        scratch.extend_from_slice(&self.fwd[g][b]);
        scratch.extend_from_slice(&self.inv[g][self.gens[g][a]]);
        scratch.extend_from_slice(&self.inv[g][self.gens[g][b]]);
        scratch.sort_unstable();
        scratch.dedup();
        self.swap(g, a, b);
        let mut delta = 0isize;
        for &(r, x) in scratch.iter() {
            let (r, x) = (r as usize, x as usize);
            let now = self.walk(r, x) != x;
            delta += now as isize - self.bad[r][x] as isize;
        }
        self.swap(g, a, b);
        delta
    }

    /// Steepest descent; returns the number of candidates evaluated.
    fn run(&mut self, budget: usize) -> usize {
        let mut evaluated = 0;
        let mut scratch = Vec::new();
        while self.bad_count > 0 {
            let mut best: Option<(isize, usize, usize, usize)> = None;
            for g in 0..self.gens.len() {
                let hot = self.hot_points(g);
                for a in 0..self.n {
                    for b in a + 1..self.n {
                        if !hot[a] && !hot[b] {
                            continue;
                        }
                        if evaluated == budget {
                            return evaluated;
                        }
                        evaluated += 1;
                        let d = self.delta(g, a, b, &mut scratch);
                        if d < 0 && best.is_none_or(|(bd, ..)| d < bd) {
                            best = Some((d, g, a, b));
                        }
                    }
                }
            }
            let Some((_, g, a, b)) = best else {
                return evaluated;
            };
            self.swap(g, a, b);
            self.rebuild();
        }
        evaluated
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Closest exact solution to `c.action` under the identity bijection, found
/// by enumerating every tuple. Since solutions are closed under relabeling
/// this also minimizes `d_gen` over all solutions.
fn brute(c: &Challenge) -> Result<(FiniteAction, usize), LabError> {
    let (n, m) = (c.action.n(), c.action.m());
    let tuples = factorial(n).checked_pow(m as u32);
    if n > BRUTE_MAX_POINTS || tuples.is_none_or(|t| t > BRUTE_MAX_TUPLES) {
        return Err(LabError::BruteTooLarge { n, m });
    }
    if m == 0 {
        return Ok((c.action.clone(), 0));
    }
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let cost: Vec<Vec<usize>> = c
        .action
        .generators()
        .iter()
        .map(|g| {
            perms
                .iter()
                .map(|p| (0..n).filter(|&x| p[x] != g.apply(x)).count())
                .collect()
        })
        .collect();
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut tried = 0;
    for choice in (0..m).map(|_| 0..perms.len()).multi_cartesian_product() {
        tried += 1;
        let total: usize = choice.iter().enumerate().map(|(g, &i)| cost[g][i]).sum();
        if best.as_ref().is_some_and(|(b, _)| total >= *b) {
            continue;
        }
        let y = FiniteAction::from_images(choice.iter().map(|&i| perms[i].clone()).collect())?;
        if y.is_solution(&c.relators) {
            best = Some((total, choice));
        }
    }
    let (_, choice) = best.expect("the trivial action solves every relator");
    let y = FiniteAction::from_images(choice.into_iter().map(|i| perms[i].clone()).collect())?;
    Ok((y, tried))
}

/// Ties a repair strategy to a challenge. A report only claims success with
/// an exact solution in hand.
pub fn repair(c: &Challenge, strategy: RepairStrategy, budget: usize) -> Result<RepairReport, LabError> {
    for w in &c.relators {
        c.action.check_word(w)?;
    }
    match strategy {
        RepairStrategy::Planted => match &c.planted {
            Some(p) if p.is_solution(&c.relators) && p.check_compatible(&c.action).is_ok() => {
                RepairReport::solved(c, strategy, p.clone(), 0)
            }
            _ => Ok(RepairReport::failed(strategy, c.defect(), 0)),
        },
        RepairStrategy::Brute => {
            let (y, tried) = brute(c)?;
            RepairReport::solved(c, strategy, y, tried)
        }
        RepairStrategy::Descent => {
            let mut d = Descent::new(c);
            let evaluated = d.run(budget);
            let y = FiniteAction::from_images(d.gens)?;
            if d.bad_count == 0 {
                RepairReport::solved(c, strategy, y, evaluated)
            } else {
                Ok(RepairReport::failed(strategy, y.defect(&c.relators), evaluated))
            }
        }
    }
}

/// Independent check of a report: recomputes relator images and the
/// mismatch count from raw permutations.
pub fn verify_report(c: &Challenge, r: &RepairReport) -> bool {
    if !r.succeeded {
        return r.solution.is_none();
    }
    let (Some(y), Some(f), Some(distance)) = (&r.solution, &r.witness, r.distance) else {
        return false;
    };
    let x = &c.action;
    if y.n() != x.n() || y.m() != x.m() || f.len() != x.n() {
        return false;
    }
    for w in &c.relators {
        if !w.fits(y.m()) {
            return false;
        }
        let p = y.evaluate(w);
        if !p.is_identity() {
            return false;
        }
    }
    let mut seen = vec![false; x.n()];
    for &v in f.images() {
        if v >= x.n() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    let mut bad = 0;
    for (sx, sy) in x.generators().iter().zip(y.generators()) {
        for p in 0..x.n() {
            if f.apply(sx.apply(p)) != sy.apply(f.apply(p)) {
                bad += 1;
            }
        }
    }
    distance == ratio_or_zero(bad, x.n() * x.m())
}

/// `Σ_{r ≤ R} 2^{-r} min(1, (2m)^{r+1} m · distance)`.
pub fn stat_from_distance(m: usize, distance: Rational, radius: usize) -> Rational {
    (1..=radius)
        .map(|r| inv_pow2(r) * stat_bound(m, r, distance).min(Rational::one()))
        .sum()
}

/// Side lengths of a torus with `size` points and `m` sides, as equal as
/// divisibility allows.
pub fn torus_sides(size: usize, m: usize) -> Vec<usize> {
    let mut left = size;
    let mut sides = Vec::with_capacity(m);
    for i in 0..m {
        let k = (m - i) as u32;
        if k == 1 {
            sides.push(left);
            break;
        }
        let root = (left as f64).powf(1.0 / f64::from(k)).round() as usize;
        let pick = (1..=left)
            .filter(|d| left.is_multiple_of(*d))
            .min_by_key(|&d| (d.abs_diff(root), d))
            .unwrap_or(1);
        sides.push(pick);
        left /= pick;
    }
    sides
}

/// `ℤ^m` acting on `∏ ℤ/d_i` by unit shifts.
pub fn torus(sides: &[usize]) -> FiniteAction {
    let n: usize = sides.iter().product();
    let mut stride = 1;
    let gens = sides
        .iter()
        .map(|&d| {
            let s = stride;
            stride *= d;
            (0..n)
                .map(|x| {
                    let digit = (x / s) % d;
                    x - digit * s + ((digit + 1) % d) * s
                })
                .collect()
        })
        .collect();
    FiniteAction::from_images(gens).expect("shifts are bijections")
}

fn no_family(group: &GroupId, size: usize, reason: &str) -> LabError {
    LabError::NoFamily {
        group: group.to_string(),
        size,
        reason: reason.to_string(),
    }
}

fn gcd(a: usize, b: usize) -> usize {
    num_integer::gcd(a, b)
}

/// A genuine action of `group` on exactly `size` points.
pub fn family_action(group: &GroupId, size: usize, seed: u64) -> Result<FiniteAction, LabError> {
    let p = catalog_presentation(*group)?;
    let action = match *group {
        GroupId::Free(m) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gens = (0..m)
                .map(|_| {
                    let mut v: Vec<usize> = (0..size).collect();
                    v.shuffle(&mut rng);
                    v
                })
                .collect();
            FiniteAction::from_images(gens)?
        }
        GroupId::Abelian(m) => torus(&torus_sides(size, m)),
        GroupId::Dihedral(_) => {
            let regular = todd_coxeter(&p, &[], DEFAULT_MAX_COSETS)?;
            if regular.index() > size {
                return Err(no_family(group, size, "smaller than the regular action"));
            }
            amplify(regular.action(), size)?
        }
        GroupId::Heisenberg => {
            let Some(&q) = [7usize, 5, 3, 2].iter().find(|&&q| q * q * q <= size) else {
                return Err(no_family(group, size, "needs at least 8 points"));
            };
            let extra = (0..3).map(|g| Word::generator(g).pow(q as i64)).collect();
            let quotient = p.with_relators(extra)?;
            let regular = todd_coxeter(&quotient, &[], DEFAULT_MAX_COSETS)?;
            amplify(regular.action(), size)?
        }
        GroupId::BaumslagSolitar(k) => {
            let k_abs = k.unsigned_abs() as usize;
            let Some(modulus) = (1..=size).rev().find(|&md| gcd(md, k_abs) == 1) else {
                return Err(no_family(group, size, "needs at least one point"));
            };
            let kk = k.rem_euclid(modulus as i64) as usize;
            let x = (0..modulus).map(|t| (kk * t) % modulus).collect();
            let y = (0..modulus).map(|t| (t + 1) % modulus).collect();
            let affine = FiniteAction::from_images(vec![x, y])?;
            affine.disjoint_union(&FiniteAction::trivial(size - modulus, 2))?
        }
        GroupId::Abels(_) => unreachable!("documentation-only groups have no presentation"),
    };
    debug_assert!(action.is_solution(p.relators()));
    Ok(action)
}

fn default_swaps() -> Vec<usize> {
    vec![0]
}

fn default_repeats() -> usize {
    1
}

fn default_radius() -> usize {
    3
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub group: String,
    pub sizes: Vec<usize>,
    #[serde(default = "default_swaps")]
    pub swaps: Vec<usize>,
    pub strategies: Vec<RepairStrategy>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_radius")]
    pub radius: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub group: String,
    pub size: usize,
    pub k: usize,
    pub seed: u64,
    pub strategy: RepairStrategy,
    pub defect: String,
    pub distance: String,
    pub dstat: String,
    pub succeeded: bool,
    pub ms: u128,
}

/// One row per size, swap count, seed and strategy, in that nesting order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>, LabError> {
    let group: GroupId = spec.group.parse()?;
    let relators = catalog_presentation(group)?.relators().to_vec();
    let mut rows = Vec::new();
    for &size in &spec.sizes {
        for &k in &spec.swaps {
            for rep in 0..spec.repeats {
                let seed = spec.seed + rep as u64;
                let planted = family_action(&group, size, seed)?;
                let c = make_challenge(&planted, relators.clone(), k, seed)?;
                let defect = format_rational(&c.defect());
                for &strategy in &spec.strategies {
                    let start = Instant::now();
                    let report = repair(&c, strategy, spec.budget)?;
                    let dstat = match &report.solution {
                        Some(y) => format_rational(&d_stat_trunc(&c.action, y, spec.radius)?),
                        None => String::new(),
                    };
                    rows.push(ExperimentRow {
                        group: group.to_string(),
                        size,
                        k,
                        seed,
                        strategy,
                        defect: defect.clone(),
                        distance: report.distance.as_ref().map(format_rational).unwrap_or_default(),
                        dstat,
                        succeeded: report.succeeded,
                        ms: start.elapsed().as_millis(),
                    });
                }
            }
        }
    }
    Ok(rows)
}
