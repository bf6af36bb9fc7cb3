//! Finitely presented groups and Todd–Coxeter coset enumeration.
//!
//! A [`CosetTable`] is the transitive pointed action of `Γ = F/⟨⟨R⟩⟩` on the
//! left cosets `Γ/H`, with `H` the stabilizer of point 0. Enumeration runs
//! the HLT strategy on right cosets (relators scanned at every live coset,
//! gaps filled row by row) and converts the result to the left action
//! `g·(g'H) = (gg')H` at the end, via `gH ↦ Hg^{-1}`. The final numbering is
//! breadth first from the base, so equal subgroups give equal tables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::actions::{FiniteAction, Permutation};
use crate::words::{Alphabet, Letter, Word, WordError};

/// Default cap on live plus dead cosets.
pub const DEFAULT_MAX_COSETS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CosetError {
    #[error("enumeration not completed within {max_cosets} cosets")]
    BudgetExhausted { max_cosets: usize },
    #[error("max_cosets must be at least 1")]
    ZeroBudget,
    #[error("relator #{index} is empty or uses a generator outside the basis of size {m}")]
    BadRelator { index: usize, m: usize },
    #[error("subgroup generator {word} uses a generator outside the basis of size {m}")]
    BadSubgroupGenerator { word: String, m: usize },
    #[error("unknown group {0:?}")]
    UnknownGroup(String),
    #[error("{0} is catalogued as documentation only and has no presentation")]
    DocumentationOnly(String),
    #[error("invalid group parameter: {0}")]
    BadParameter(String),
    #[error("action is not a coset table: {0}")]
    NotACosetTable(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// `⟨s_1, ..., s_m | relators⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    m: usize,
    alphabet: Alphabet,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(m: usize, relators: Vec<Word>) -> Result<Self, CosetError> {
        Presentation::with_alphabet(Alphabet::standard(m), relators)
    }

    pub fn with_alphabet(alphabet: Alphabet, relators: Vec<Word>) -> Result<Self, CosetError> {
        let m = alphabet.len();
        if let Some(index) = relators
            .iter()
            .position(|r| r.is_identity() || !r.fits(m))
        {
            return Err(CosetError::BadRelator { index, m });
        }
        Ok(Presentation {
            m,
            alphabet,
            relators,
        })
    }

    /// Parses relators written in `alphabet`.
    pub fn parse(alphabet: Alphabet, relators: &[&str]) -> Result<Self, CosetError> {
        let words = relators
            .iter()
            .map(|r| alphabet.parse(r))
            .collect::<Result<Vec<_>, _>>()?;
        Presentation::with_alphabet(alphabet, words)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn parse_word(&self, s: &str) -> Result<Word, WordError> {
        self.alphabet.parse(s)
    }

    pub fn format_word(&self, w: &Word) -> String {
        self.alphabet.format(w)
    }

    /// The same presentation with extra relators appended.
    pub fn with_relators(&self, extra: Vec<Word>) -> Result<Self, CosetError> {
        let mut relators = self.relators.clone();
        relators.extend(extra);
        Presentation::with_alphabet(self.alphabet.clone(), relators)
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.alphabet.names().chars().map(String::from).collect();
        let rels: Vec<String> = self.relators.iter().map(|r| self.format_word(r)).collect();
        write!(f, "⟨{} | {}⟩", gens.join(","), rels.join(", "))
    }
}

/// Groups the catalog knows how to present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupId {
    /// Free group of rank `m`.
    Free(usize),
    /// `Z^m`.
    Abelian(usize),
    /// `BS(1, n) = ⟨x, y | x y x^{-1} = y^n⟩`.
    BaumslagSolitar(i64),
    /// Dihedral group of order `2k`.
    Dihedral(usize),
    /// Discrete Heisenberg group.
    Heisenberg,
    /// Abels's group `A_p`: finitely presented, but no presentation is
    /// recorded here.
    Abels(u64),
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupId::Free(m) => write!(f, "free({m})"),
            GroupId::Abelian(m) => write!(f, "zn({m})"),
            GroupId::BaumslagSolitar(n) => write!(f, "bs(1,{n})"),
            GroupId::Dihedral(k) => write!(f, "dihedral({k})"),
            GroupId::Heisenberg => write!(f, "heisenberg"),
            GroupId::Abels(p) => write!(f, "abels_doc({p})"),
        }
    }
}

impl FromStr for GroupId {
    type Err = CosetError;

    /// Accepts `free(2)`/`f2`, `zn(2)`/`z2`, `bs(1,2)`/`bs2`,
    /// `dihedral(3)`/`d3`, `heisenberg` and `abels_doc(p)`/`abels(p)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || CosetError::UnknownGroup(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let t = t.to_ascii_lowercase();
        let (name, args) = match t.find('(') {
            Some(i) => {
                let inner = t[i + 1..].strip_suffix(')').ok_or_else(unknown)?;
                (t[..i].to_string(), inner.split(',').map(str::to_string).collect())
            }
            None => {
                let split = t.find(|c: char| c.is_ascii_digit()).unwrap_or(t.len());
                let (n, a) = t.split_at(split);
                let args = if a.is_empty() { vec![] } else { vec![a.to_string()] };
                (n.to_string(), args)
            }
        };
        let int = |i: usize| -> Result<i64, CosetError> {
            args.get(i)
                .ok_or_else(unknown)?
                .parse::<i64>()
                .map_err(|_| unknown())
        };
        let positive = |i: usize| -> Result<usize, CosetError> {
            let v = int(i)?;
            if v >= 1 {
                Ok(v as usize)
            } else {
                Err(CosetError::BadParameter(format!("{s}: parameter must be positive")))
            }
        };
        match name.as_str() {
            "free" | "f" => Ok(GroupId::Free(positive(0)?)),
            "zn" | "z" => Ok(GroupId::Abelian(positive(0)?)),
            "bs" => {
                let n = if args.len() == 2 {
                    if int(0)? != 1 {
                        return Err(CosetError::BadParameter(format!(
                            "{s}: only BS(1,n) is catalogued"
                        )));
                    }
                    int(1)?
                } else {
                    int(0)?
                };
                if n == 0 {
                    return Err(CosetError::BadParameter(format!("{s}: n must be nonzero")));
                }
                Ok(GroupId::BaumslagSolitar(n))
            }
            "dihedral" | "d" => Ok(GroupId::Dihedral(positive(0)?)),
            "heisenberg" if args.is_empty() => Ok(GroupId::Heisenberg),
            "abels" | "abels_doc" => Ok(GroupId::Abels(positive(0)? as u64)),
            _ => Err(unknown()),
        }
    }
}

/// What the catalog holds for a group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CatalogEntry {
    Presented(Presentation),
    /// Known to be finitely presented, but only described in prose here.
    Documented { name: String, description: String },
}

fn commutator(a: usize, b: usize) -> Word {
    Word::from_letters([
        Letter::new(a, false),
        Letter::new(b, false),
        Letter::new(a, true),
        Letter::new(b, true),
    ])
}

/// Looks up a group.
pub fn catalog(id: GroupId) -> Result<CatalogEntry, CosetError> {
    let p = match id {
        GroupId::Free(m) => Presentation::new(m, vec![])?,
        GroupId::Abelian(m) => {
            let mut rels = Vec::new();
            for i in 0..m {
                for j in i + 1..m {
                    rels.push(commutator(i, j));
                }
            }
            Presentation::new(m, rels)?
        }
        GroupId::BaumslagSolitar(n) => {
            let alphabet = Alphabet::new("xy")?;
            let x = Word::generator(0);
            let y = Word::generator(1);
            let rel = x.concat(&y).concat(&x.inverse()).concat(&y.pow(-n));
            Presentation::with_alphabet(alphabet, vec![rel])?
        }
        GroupId::Dihedral(k) => {
            let r = Word::generator(0);
            let s = Word::generator(1);
            Presentation::with_alphabet(
                Alphabet::new("rs")?,
                vec![r.pow(k as i64), s.pow(2), r.concat(&s).pow(2)],
            )?
        }
        GroupId::Heisenberg => {
            let c = Word::generator(2);
            Presentation::new(
                3,
                vec![
                    commutator(0, 1).concat(&c.inverse()),
                    commutator(0, 2),
                    commutator(1, 2),
                ],
            )?
        }
        GroupId::Abels(p) => {
            return Ok(CatalogEntry::Documented {
                name: id.to_string(),
                description: format!(
                    "Abels's group A_{p}: upper triangular 4x4 matrices over Z[1/{p}] with \
                     diagonal entries 1 and powers of {p} in the middle; finitely presented \
                     but no presentation is catalogued, so it cannot be enumerated"
                ),
            })
        }
    };
    Ok(CatalogEntry::Presented(p))
}

/// Like [`catalog`], but refuses documentation-only entries.
pub fn catalog_presentation(id: GroupId) -> Result<Presentation, CosetError> {
    match catalog(id)? {
        CatalogEntry::Presented(p) => Ok(p),
        CatalogEntry::Documented { name, .. } => Err(CosetError::DocumentationOnly(name)),
    }
}

const NONE: usize = usize::MAX;

/// Working state of an HLT enumeration over right cosets.
struct Enumerator {
    cols: usize,
    table: Vec<usize>,
    parent: Vec<usize>,
    max_cosets: usize,
}

impl Enumerator {
    fn new(m: usize, max_cosets: usize) -> Self {
        let cols = 2 * m;
        Enumerator {
            cols,
            table: vec![NONE; cols],
            parent: vec![0],
            max_cosets,
        }
    }

    fn len(&self) -> usize {
        self.parent.len()
    }

    #[inline]
    fn get(&self, c: usize, col: usize) -> usize {
        self.table[c * self.cols + col]
    }

    #[inline]
    fn set(&mut self, c: usize, col: usize, d: usize) {
        self.table[c * self.cols + col] = d;
    }

    fn is_live(&self, c: usize) -> bool {
        self.parent[c] == c
    }

    fn define(&mut self, c: usize, col: usize) -> Result<usize, CosetError> {
        if self.len() >= self.max_cosets {
            return Err(CosetError::BudgetExhausted {
                max_cosets: self.max_cosets,
            });
        }
        let d = self.len();
        self.parent.push(d);
        self.table.extend(std::iter::repeat_n(NONE, self.cols));
        self.set(c, col, d);
        self.set(d, col ^ 1, c);
        Ok(d)
    }

    fn rep(&mut self, c: usize) -> usize {
        let mut root = c;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut x = c;
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn merge(&mut self, a: usize, b: usize, queue: &mut Vec<usize>) {
        let a = self.rep(a);
        let b = self.rep(b);
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.parent[hi] = lo;
            queue.push(hi);
        }
    }

    fn coincidence(&mut self, a: usize, b: usize) {
        let mut queue = Vec::new();
        self.merge(a, b, &mut queue);
        let mut i = 0;
        while i < queue.len() {
            let g = queue[i];
            i += 1;
            for col in 0..self.cols {
                let d = self.get(g, col);
                if d == NONE {
                    continue;
                }
                self.set(d, col ^ 1, NONE);
                let mu = self.rep(g);
                let nu = self.rep(d);
                let mu_x = self.get(mu, col);
                if mu_x != NONE {
                    self.merge(nu, mu_x, &mut queue);
                    continue;
                }
                let nu_inv = self.get(nu, col ^ 1);
                if nu_inv != NONE {
                    self.merge(mu, nu_inv, &mut queue);
                } else {
                    self.set(mu, col, nu);
                    self.set(nu, col ^ 1, mu);
                }
            }
        }
    }

    /// Traces `word` from `c` forwards and backwards, defining cosets to close
    /// the gap and recording a deduction or coincidence at the end.
    fn scan_and_fill(&mut self, c: usize, word: &[usize]) -> Result<(), CosetError> {
        let mut f = c;
        let mut b = c;
        let mut lo = 0;
        let mut hi = word.len();
        loop {
            while lo < hi && self.get(f, word[lo]) != NONE {
                f = self.get(f, word[lo]);
                lo += 1;
            }
            if lo == hi {
                if f != b {
                    self.coincidence(f, b);
                }
                return Ok(());
            }
            while hi > lo && self.get(b, word[hi - 1] ^ 1) != NONE {
                b = self.get(b, word[hi - 1] ^ 1);
                hi -= 1;
            }
            if hi == lo {
                self.coincidence(f, b);
                return Ok(());
            }
            if hi == lo + 1 {
                self.set(f, word[lo], b);
                self.set(b, word[lo] ^ 1, f);
                return Ok(());
            }
            self.define(f, word[lo])?;
        }
    }
}

fn codes(w: &Word) -> Vec<usize> {
    w.letters().iter().map(|l| l.code()).collect()
}

/// Right-coset table of `H = ⟨subgroup_gens⟩` in the presented group, as
/// `table[coset][letter code]`, with coset 0 the subgroup itself.
fn enumerate(
    p: &Presentation,
    subgroup_gens: &[Word],
    max_cosets: usize,
) -> Result<Vec<Vec<usize>>, CosetError> {
    if max_cosets == 0 {
        return Err(CosetError::ZeroBudget);
    }
    let m = p.m();
    if let Some(w) = subgroup_gens.iter().find(|w| !w.fits(m)) {
        return Err(CosetError::BadSubgroupGenerator {
            word: w.to_string(),
            m,
        });
    }
    let relators: Vec<Vec<usize>> = p.relators().iter().map(codes).collect();
    let mut e = Enumerator::new(m, max_cosets);
    for h in subgroup_gens {
        e.scan_and_fill(0, &codes(h))?;
    }
    let mut c = 0;
    while c < e.len() {
        if e.is_live(c) {
            for r in &relators {
                e.scan_and_fill(c, r)?;
                if !e.is_live(c) {
                    break;
                }
            }
            if e.is_live(c) {
                for col in 0..e.cols {
                    if e.get(c, col) == NONE {
                        e.define(c, col)?;
                    }
                }
            }
        }
        c += 1;
    }
    let live: Vec<usize> = (0..e.len()).filter(|&c| e.is_live(c)).collect();
    let mut index = vec![NONE; e.len()];
    for (i, &c) in live.iter().enumerate() {
        index[c] = i;
    }
    let mut out = Vec::with_capacity(live.len());
    for &c in &live {
        let mut row = Vec::with_capacity(e.cols);
        for col in 0..e.cols {
            let d = e.get(c, col);
            debug_assert!(d != NONE, "complete table");
            let d = e.rep(d);
            row.push(index[d]);
        }
        out.push(row);
    }
    Ok(out)
}

/// The action of a presented group on `Γ/H`, based at `H` (point 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetTable {
    presentation: Presentation,
    action: FiniteAction,
    subgroup_gens: Vec<Word>,
}

/// Conjugacy data of a finite-index subgroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassData {
    /// `[Γ : H]`.
    pub index: usize,
    /// `|H^Γ| = [Γ : N_Γ(H)]`.
    pub class_size: usize,
    /// Same as `class_size`, kept under its normalizer name.
    pub normalizer_index: usize,
    /// `[N_Γ(H) : H]`, the number of cosets whose stabilizer is `H`.
    pub normalizer_cosets: usize,
}

/// Runs Todd–Coxeter for `H = ⟨subgroup_gens⟩` with at most `max_cosets`
/// cosets ever defined. Exhausting the budget is inconclusive: the index may
/// be infinite or just large.
pub fn todd_coxeter(
    p: &Presentation,
    subgroup_gens: &[Word],
    max_cosets: usize,
) -> Result<CosetTable, CosetError> {
    let right = enumerate(p, subgroup_gens, max_cosets)?;
    let n = right.len();
    // generator s acts on gH as right multiplication by s^{-1} on Hg^{-1}
    let gens = (0..p.m())
        .map(|i| {
            Permutation::new(right.iter().map(|row| row[2 * i + 1]).collect())
                .expect("complete coset table columns are bijections")
        })
        .collect();
    let action = FiniteAction::new(n, gens).expect("columns have one entry per coset");
    let (action, _) = action.pointed_canonical(0);
    Ok(CosetTable {
        presentation: p.clone(),
        action,
        subgroup_gens: subgroup_gens.to_vec(),
    })
}

impl CosetTable {
    /// Wraps an existing transitive action as a coset table based at
    /// `base`, checking every relator acts trivially and every subgroup
    /// generator fixes the base.
    pub fn from_action(
        presentation: &Presentation,
        action: &FiniteAction,
        base: usize,
        subgroup_gens: Vec<Word>,
    ) -> Result<Self, CosetError> {
        let bad = |msg: &str| CosetError::NotACosetTable(msg.to_string());
        if action.m() != presentation.m() {
            return Err(bad("generator count differs from the presentation"));
        }
        if base >= action.n() {
            return Err(bad("base point out of range"));
        }
        if !action.is_transitive() {
            return Err(bad("action is not transitive"));
        }
        if !action.is_solution(presentation.relators()) {
            return Err(bad("some relator acts nontrivially"));
        }
        if let Some(w) = subgroup_gens
            .iter()
            .find(|w| !w.fits(action.m()) || action.act(w, base) != base)
        {
            return Err(CosetError::NotACosetTable(format!(
                "subgroup generator {w} does not fix the base"
            )));
        }
        let (action, _) = action.pointed_canonical(base);
        Ok(CosetTable {
            presentation: presentation.clone(),
            action,
            subgroup_gens,
        })
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn action(&self) -> &FiniteAction {
        &self.action
    }

    pub fn subgroup_gens(&self) -> &[Word] {
        &self.subgroup_gens
    }

    /// Base point; always 0 under the canonical numbering.
    pub fn base(&self) -> usize {
        0
    }

    pub fn index(&self) -> usize {
        self.action.n()
    }

    /// `w ∈ H` iff `w` fixes the base.
    pub fn contains(&self, w: &Word) -> bool {
        w.fits(self.action.m()) && self.action.act(w, 0) == 0
    }

    /// Canonical form of the action re-based at `x`; equal forms mean equal
    /// stabilizers.
    pub fn stabilizer_key(&self, x: usize) -> FiniteAction {
        self.action.pointed_canonical(x).0
    }

    /// The table of `gHg^{-1}`: same action, based at `g·H`.
    pub fn conjugate(&self, g: &Word) -> CosetTable {
        let x = self.action.act(g, 0);
        let (action, _) = self.action.pointed_canonical(x);
        let gi = g.inverse();
        CosetTable {
            presentation: self.presentation.clone(),
            action,
            subgroup_gens: self
                .subgroup_gens
                .iter()
                .map(|h| g.concat(h).concat(&gi))
                .collect(),
        }
    }

    /// One point per distinct conjugate of `H`, each with a word `g` such
    /// that the point is `g·H`. The listed stabilizers are exactly the
    /// members of `H^Γ`.
    pub fn conjugate_points(&self) -> Vec<(usize, Word)> {
        let (_, paths) = self.action.pointed_canonical(0);
        let mut keys: Vec<FiniteAction> = Vec::new();
        let mut out = Vec::new();
        for (x, path) in paths.into_iter().enumerate() {
            let key = self.stabilizer_key(x);
            if !keys.contains(&key) {
                keys.push(key);
                out.push((x, path));
            }
        }
        out
    }

    /// Size of the conjugacy class and normalizer index.
    pub fn class_data(&self) -> ClassData {
        let n = self.index();
        let own = self.stabilizer_key(0);
        let same = (0..n).filter(|&x| self.stabilizer_key(x) == own).count();
        let class_size = n / same;
        ClassData {
            index: n,
            class_size,
            normalizer_index: class_size,
            normalizer_cosets: same,
        }
    }

    /// Whether the pointed actions agree, i.e. the subgroups are equal.
    pub fn same_subgroup(&self, other: &CosetTable) -> bool {
        self.action == other.action
    }

    /// Whether `other`'s subgroup is conjugate to this one.
    pub fn is_conjugate_to(&self, other: &CosetTable) -> bool {
        self.index() == other.index()
            && (0..self.index()).any(|x| self.stabilizer_key(x) == other.action)
    }
}
