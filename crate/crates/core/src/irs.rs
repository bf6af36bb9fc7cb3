//! Invariant random subgroups with finitely many atoms, and their shadows on
//! balls of the free group.
//!
//! An [`AtomicIRS`] lists conjugacy classes of finite-index subgroups with
//! the total weight of each class; inside a class every conjugate carries
//! `weight / class_size`. An [`EmpiricalIRS`] is the trace profile of a
//! finite action, i.e. the pushforward of the uniform measure under the
//! stabilizer map, cut off at some radius.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::actions::{ActionError, FiniteAction, Trace};
use crate::cosets::CosetTable;
use crate::metrics::{local_profile, profile_distance, MetricError, TraceProfile};
use crate::rational::{format_rational, is_probability, ratio, Rational};
use crate::words::{Ball, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IrsError {
    #[error("an IRS needs at least one class")]
    Empty,
    #[error("class #{index} has weight {weight}, expected a value in (0, 1]")]
    BadWeight { index: usize, weight: String },
    #[error("weights sum to {0}, expected 1")]
    WeightSum(String),
    #[error("class #{index} has {got} generators, expected {expected}")]
    RankMismatch { index: usize, got: usize, expected: usize },
    #[error("classes #{0} and #{1} are conjugate")]
    ConjugateClasses(usize, usize),
    #[error("precision must be at least 1")]
    ZeroPrecision,
    #[error("target {target} is smaller than the action size {n}")]
    TargetTooSmall { target: usize, n: usize },
    #[error("coset representatives: {0}")]
    BadRepresentatives(String),
    #[error("invariance check failed for generator {generator} at representative #{rep}")]
    InvarianceFailed { generator: usize, rep: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Action(#[from] ActionError),
}

/// One atom class: a coset table for a representative and the class weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrsClass {
    pub rep: CosetTable,
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomicIRS {
    classes: Vec<IrsClass>,
    m: usize,
}

impl AtomicIRS {
    pub fn new(classes: Vec<(CosetTable, Rational)>) -> Result<Self, IrsError> {
        let Some((first, _)) = classes.first() else {
            return Err(IrsError::Empty);
        };
        let m = first.action().m();
        let mut total = Rational::zero();
        for (index, (rep, w)) in classes.iter().enumerate() {
            if *w <= Rational::zero() || !is_probability(w) {
                return Err(IrsError::BadWeight {
                    index,
                    weight: format_rational(w),
                });
            }
            if rep.action().m() != m {
                return Err(IrsError::RankMismatch {
                    index,
                    got: rep.action().m(),
                    expected: m,
                });
            }
            total += *w;
        }
        if !total.is_one() {
            return Err(IrsError::WeightSum(format_rational(&total)));
        }
        for i in 0..classes.len() {
            for j in i + 1..classes.len() {
                if classes[i].0.is_conjugate_to(&classes[j].0) {
                    return Err(IrsError::ConjugateClasses(i, j));
                }
            }
        }
        Ok(AtomicIRS {
            classes: classes
                .into_iter()
                .map(|(rep, weight)| IrsClass { rep, weight })
                .collect(),
            m,
        })
    }

    /// Point mass on the class of a single subgroup.
    pub fn point_mass(rep: CosetTable) -> Self {
        let m = rep.action().m();
        AtomicIRS {
            classes: vec![IrsClass {
                rep,
                weight: Rational::one(),
            }],
            m,
        }
    }

    pub fn classes(&self) -> &[IrsClass] {
        &self.classes
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Distribution of `H ∩ B(r)` for `r ≤ radius`, summing
    /// `weight / class_size` over the distinct conjugates of each class.
    pub fn shadow(&self, radius: usize) -> Result<TraceProfile, IrsError> {
        if radius == 0 {
            return Err(MetricError::ZeroRadius.into());
        }
        let ball = Ball::new(self.m, radius);
        let mut levels: Vec<BTreeMap<Trace, Rational>> = vec![BTreeMap::new(); radius];
        for class in &self.classes {
            let traces = class.rep.action().traces(&ball)?;
            let points = class.rep.conjugate_points();
            let each = class.weight / Rational::from(points.len() as i128);
            for (x, _) in points {
                for (r, level) in levels.iter_mut().enumerate() {
                    *level
                        .entry(traces[x].restrict(ball.size_at(r + 1)))
                        .or_insert_with(Rational::zero) += each;
                }
            }
        }
        Ok(TraceProfile::from_levels(self.m, levels))
    }
}

/// `μ(C_{r,W})`: the weight of subgroups whose radius-`r` trace is `W`.
pub fn cylinder_measure(mu: &AtomicIRS, r: usize, w: &Trace) -> Result<Rational, IrsError> {
    Ok(mu.shadow(r)?.probability(r, w))
}

/// Trace profile of a finite action, read as an IRS shadow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalIRS {
    pub profile: TraceProfile,
}

pub fn irs_of_action(x: &FiniteAction, radius: usize) -> Result<EmpiricalIRS, IrsError> {
    Ok(EmpiricalIRS {
        profile: local_profile(x, radius)?,
    })
}

/// Anything with trace distributions up to a radius.
pub trait Shadow {
    fn shadow_at(&self, radius: usize) -> Result<TraceProfile, IrsError>;
}

impl Shadow for AtomicIRS {
    fn shadow_at(&self, radius: usize) -> Result<TraceProfile, IrsError> {
        self.shadow(radius)
    }
}

impl Shadow for EmpiricalIRS {
    fn shadow_at(&self, radius: usize) -> Result<TraceProfile, IrsError> {
        if radius == 0 {
            return Err(MetricError::ZeroRadius.into());
        }
        if radius > self.profile.radius() {
            return Err(MetricError::RadiusTooLarge {
                have: self.profile.radius(),
                want: radius,
            }
            .into());
        }
        Ok(self.profile.truncate(radius))
    }
}

impl Shadow for TraceProfile {
    fn shadow_at(&self, radius: usize) -> Result<TraceProfile, IrsError> {
        EmpiricalIRS {
            profile: self.clone(),
        }
        .shadow_at(radius)
    }
}

/// `Σ_{r ≤ R} 2^{-r} TV_r` between two shadows.
pub fn weakstar_dist_trunc<A: Shadow + ?Sized, B: Shadow + ?Sized>(
    a: &A,
    b: &B,
    radius: usize,
) -> Result<Rational, IrsError> {
    Ok(profile_distance(&a.shadow_at(radius)?, &b.shadow_at(radius)?, radius)?)
}

/// A finite action approximating an atomic IRS, with the copy count of each
/// class's coset action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosoficAction {
    pub action: FiniteAction,
    pub copies: Vec<usize>,
}

/// Largest remainder apportionment of `denominator` seats by `shares`
/// (which sum to one); ties go to the lowest index.
fn largest_remainder(shares: &[Rational], denominator: usize) -> Vec<usize> {
    let d = Rational::from(denominator as i128);
    let quotas: Vec<Rational> = shares.iter().map(|s| *s * d).collect();
    let mut seats: Vec<usize> = quotas.iter().map(|q| q.floor().to_integer() as usize).collect();
    let left = denominator - seats.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(left) {
        seats[i] += 1;
    }
    seats
}

/// Copy counts `l_i` with every `l_i ≥ 1` and each class's share of points
/// within `1/(k·n)` of its weight.
pub fn apportion(mu: &AtomicIRS, n: usize) -> Result<Vec<usize>, IrsError> {
    if n == 0 {
        return Err(IrsError::ZeroPrecision);
    }
    let k = mu.classes.len();
    let index: Vec<Rational> = mu
        .classes
        .iter()
        .map(|c| Rational::from(c.rep.index() as i128))
        .collect();
    let per_copy: Vec<Rational> = mu.classes.iter().zip(&index).map(|(c, i)| c.weight / i).collect();
    let total: Rational = per_copy.iter().sum();
    let shares: Vec<Rational> = per_copy.iter().map(|p| *p / total).collect();
    let tolerance = ratio(1, k * n);
    let mut denominator = 10 * k * n;
    loop {
        let seats = largest_remainder(&shares, denominator);
        let points: Rational = seats
            .iter()
            .zip(&index)
            .map(|(&l, i)| Rational::from(l as i128) * i)
            .sum();
        let close = seats.iter().zip(&index).zip(&mu.classes).all(|((&l, i), c)| {
            let frac = Rational::from(l as i128) * i / points;
            (frac - c.weight).abs() < tolerance
        });
        if close && seats.iter().all(|&l| l >= 1) {
            let g = seats.iter().fold(0, |g, &l| g.gcd(&l));
            return Ok(seats.into_iter().map(|l| l / g).collect());
        }
        denominator *= 10;
    }
}

/// `∐_i (Γ/H_i)^{∐ l_i}` with copies chosen by [`apportion`]. Every
/// cylinder has measure within `1/n` of the IRS.
pub fn build_cosofic_action(mu: &AtomicIRS, n: usize) -> Result<CosoficAction, IrsError> {
    let copies = apportion(mu, n)?;
    let mut action = FiniteAction::trivial(0, mu.m);
    for (class, &l) in mu.classes.iter().zip(&copies) {
        action = action.disjoint_union(&class.rep.action().power(l))?;
    }
    Ok(CosoficAction { action, copies })
}

/// `X^{∐ q} ⊔ Z_r` with `target = q·|X| + r` and `Z_r` the trivial action on
/// `r` points.
pub fn amplify(x: &FiniteAction, target: usize) -> Result<FiniteAction, IrsError> {
    let n = x.n();
    if n == 0 || target < n {
        return Err(IrsError::TargetTooSmall { target, n });
    }
    let (q, r) = target.div_rem(&n);
    Ok(x.power(q).disjoint_union(&FiniteAction::trivial(r, x.m()))?)
}

/// The cylinder deviation bound `2r / target` for [`amplify`].
pub fn amplify_bound(n: usize, target: usize) -> Rational {
    ratio(2 * (target % n), target)
}

/// For `H` with `k` conjugates and subgroups `H_n ◁ N_Γ(H)`, the uniform
/// measures on `{g_i H_n g_i^{-1}}`. The representatives must list the
/// cosets of `N_Γ(H)`; they are checked, and so is the permutation rule
/// `s g_i N = g_{σ(i)} N` with `g_{σ(i)}^{-1} s g_i` normalizing each `H_n`.
pub fn normal_chain_irs(
    h_table: &CosetTable,
    chain_tables: &[CosetTable],
    coset_reps: &[Word],
) -> Result<Vec<AtomicIRS>, IrsError> {
    let bad = |msg: String| IrsError::BadRepresentatives(msg);
    let m = h_table.action().m();
    let action = h_table.action();
    if let Some(g) = coset_reps.iter().find(|g| !g.fits(m)) {
        return Err(bad(format!("{g} uses a generator outside the basis")));
    }
    let keys: Vec<FiniteAction> = coset_reps
        .iter()
        .map(|g| h_table.stabilizer_key(action.act(g, 0)))
        .collect();
    for i in 0..keys.len() {
        for j in i + 1..keys.len() {
            if keys[i] == keys[j] {
                return Err(bad(format!("#{i} and #{j} give the same conjugate")));
            }
        }
    }
    let k = h_table.class_data().class_size;
    if keys.len() != k {
        return Err(bad(format!("{} given, the class has {k} members", keys.len())));
    }
    let mut sigma = vec![vec![0usize; k]; m];
    for (s, row) in sigma.iter_mut().enumerate() {
        let gen = Word::generator(s);
        for (i, g) in coset_reps.iter().enumerate() {
            let key = h_table.stabilizer_key(action.act(&gen.concat(g), 0));
            row[i] = keys
                .iter()
                .position(|k| *k == key)
                .ok_or(IrsError::InvarianceFailed { generator: s, rep: i })?;
        }
    }
    let mut out = Vec::with_capacity(chain_tables.len());
    for table in chain_tables {
        if table.action().m() != m {
            return Err(IrsError::RankMismatch {
                index: out.len(),
                got: table.action().m(),
                expected: m,
            });
        }
        let own = table.stabilizer_key(0);
        for (s, row) in sigma.iter().enumerate() {
            let gen = Word::generator(s);
            for (i, g) in coset_reps.iter().enumerate() {
                let u = coset_reps[row[i]].inverse().concat(&gen).concat(g);
                if table.stabilizer_key(table.action().act(&u, 0)) != own {
                    return Err(IrsError::InvarianceFailed { generator: s, rep: i });
                }
            }
        }
        out.push(AtomicIRS::point_mass(table.clone()));
    }
    Ok(out)
}
