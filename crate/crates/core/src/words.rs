//! Reduced words in the free group on a fixed basis `s_1, ..., s_m`.
//!
//! Words print as strings over an alphabet: the lowercase letter names a
//! generator and the uppercase letter its inverse, so `"abAB"` is the
//! commutator `s_1 s_2 s_1^{-1} s_2^{-1}` under the default alphabet
//! `a, b, c, ...`.
//!
//! Word order is shortlex: shorter words first, ties broken letter by letter
//! with `s_1 < s_1^{-1} < s_2 < s_2^{-1} < ...`. Every enumeration of a ball
//! uses this order, so indices into [`Ball`] are stable identifiers.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::Rational;

/// Largest basis size a string alphabet can name.
pub const MAX_GENERATORS: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("generator index {index} out of range for a basis of size {m}")]
    IndexOutOfRange { index: i64, m: usize },
    #[error("character {0:?} is not a letter of the alphabet")]
    UnknownLetter(char),
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("conjugacy decomposition #{index} does not multiply out to its target")]
    DecompositionMismatch { index: usize },
    #[error("delta must be positive")]
    NonPositiveDelta,
    #[error("sign must be +1 or -1, got {0}")]
    InvalidSign(i64),
}

/// A basis letter or its inverse.
///
/// The code `2 * generator + inverse` makes the derived order the shortlex
/// letter order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u32);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter((generator as u32) << 1 | inverse as u32)
    }

    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    /// Column index `2 * generator + inverse`.
    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn from_code(code: usize) -> Self {
        Letter(code as u32)
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.is_inverse() { "-" } else { "" };
        write!(f, "s{}^{}1", self.generator() + 1, sign)
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn generator(index: usize) -> Self {
        Word::letter(Letter::new(index, false))
    }

    /// Freely reduces a letter sequence with a single stack pass.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word(stack)
    }

    /// Reduces a raw sequence of signed 1-based generator indices
    /// (`+i` for `s_i`, `-i` for `s_i^{-1}`).
    pub fn reduce(raw: &[i64], m: usize) -> Result<Self, WordError> {
        let letters = raw
            .iter()
            .map(|&i| {
                if i == 0 || i.unsigned_abs() as usize > m {
                    Err(WordError::IndexOutOfRange { index: i, m })
                } else {
                    Ok(Letter::new(i.unsigned_abs() as usize - 1, i < 0))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Word::from_letters(letters))
    }

    /// Signed 1-based indices, the inverse of [`Word::reduce`].
    pub fn to_signed(&self) -> Vec<i64> {
        self.0
            .iter()
            .map(|l| {
                let i = l.generator() as i64 + 1;
                if l.is_inverse() {
                    -i
                } else {
                    i
                }
            })
            .collect()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Self {
        Word::from_letters(self.0.iter().chain(other.0.iter()).copied())
    }

    /// `t * self * t^{-1}`.
    pub fn conjugate_by(&self, t: &Word) -> Self {
        t.concat(self).concat(&t.inverse())
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        (0..e.unsigned_abs()).fold(Word::identity(), |acc, _| acc.concat(&base))
    }

    /// Number of generators this word needs, i.e. one past its largest index.
    pub fn rank(&self) -> usize {
        self.0.iter().map(|l| l.generator() + 1).max().unwrap_or(0)
    }

    pub fn fits(&self, m: usize) -> bool {
        self.rank() <= m
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Mul for &Word {
    type Output = Word;

    fn mul(self, rhs: &Word) -> Word {
        self.concat(rhs)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Alphabet::standard(MAX_GENERATORS).format(self))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            f.write_str("Word(1)")
        } else {
            write!(f, "Word({self})")
        }
    }
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Alphabet::standard(MAX_GENERATORS).parse(s)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Names for the basis letters. Generator `i` prints as `names[i]`, its
/// inverse as the uppercase form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<char>,
}

impl Alphabet {
    /// `a, b, c, ...` for the first `m` generators.
    pub fn standard(m: usize) -> Self {
        let m = m.min(MAX_GENERATORS);
        Alphabet {
            names: (0..m).map(|i| (b'a' + i as u8) as char).collect(),
        }
    }

    pub fn new(names: &str) -> Result<Self, WordError> {
        let names: Vec<char> = names.chars().collect();
        if names.len() > MAX_GENERATORS {
            return Err(WordError::InvalidAlphabet(format!(
                "at most {MAX_GENERATORS} generators"
            )));
        }
        let distinct: BTreeSet<char> = names.iter().copied().collect();
        if distinct.len() != names.len() || names.iter().any(|c| !c.is_ascii_lowercase()) {
            return Err(WordError::InvalidAlphabet(format!(
                "{:?} must be distinct lowercase ASCII letters",
                names.iter().collect::<String>()
            )));
        }
        Ok(Alphabet { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> String {
        self.names.iter().collect()
    }

    pub fn is_standard(&self) -> bool {
        *self == Alphabet::standard(self.len())
    }

    /// Parses and freely reduces. `"1"` and the empty string are the identity;
    /// whitespace is ignored.
    pub fn parse(&self, s: &str) -> Result<Word, WordError> {
        let s = s.trim();
        if s == "1" {
            return Ok(Word::identity());
        }
        let letters = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                let lower = c.to_ascii_lowercase();
                self.names
                    .iter()
                    .position(|&n| n == lower)
                    .map(|i| Letter::new(i, c.is_ascii_uppercase()))
                    .ok_or(WordError::UnknownLetter(c))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Word::from_letters(letters))
    }

    /// The identity prints as the empty string.
    pub fn format(&self, w: &Word) -> String {
        w.letters()
            .iter()
            .map(|l| {
                let c = self.names.get(l.generator()).copied().unwrap_or('?');
                if l.is_inverse() {
                    c.to_ascii_uppercase()
                } else {
                    c
                }
            })
            .collect()
    }
}

/// Number of reduced words of length at most `r` over `m` generators.
pub fn ball_size(m: usize, r: usize) -> usize {
    if m == 0 {
        return 1;
    }
    let mut total = 1;
    let mut level = 2 * m;
    for _ in 0..r {
        total += level;
        level *= 2 * m - 1;
    }
    total
}

/// The ball `B(r)` of the free group in canonical shortlex order, with the
/// factorisation `w = head * tail` stored for every non-identity word so
/// that word images can be computed incrementally.
#[derive(Debug, Clone)]
pub struct Ball {
    m: usize,
    radius: usize,
    words: Vec<Word>,
    heads: Vec<Letter>,
    tails: Vec<usize>,
    level_ends: Vec<usize>,
}

impl Ball {
    pub fn new(m: usize, radius: usize) -> Self {
        let mut words = vec![Word::identity()];
        let mut heads = vec![Letter::new(0, false)];
        let mut tails = vec![0];
        let mut level_ends = vec![1];
        if m > 0 {
            for len in 1..=radius {
                let prev = level_ends[len - 1];
                let prev_start = if len == 1 { 0 } else { level_ends[len - 2] };
                for code in 0..2 * m {
                    let head = Letter::from_code(code);
                    for tail in prev_start..prev {
                        if words[tail].first() == Some(head.inverse()) {
                            continue;
                        }
                        let mut letters = Vec::with_capacity(len);
                        letters.push(head);
                        letters.extend_from_slice(words[tail].letters());
                        words.push(Word(letters));
                        heads.push(head);
                        tails.push(tail);
                    }
                }
                level_ends.push(words.len());
            }
        } else {
            level_ends.resize(radius + 1, 1);
        }
        Ball {
            m,
            radius,
            words,
            heads,
            tails,
            level_ends,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Size of the sub-ball `B(r)`, which is a prefix of this one.
    pub fn size_at(&self, r: usize) -> usize {
        self.level_ends[r.min(self.radius)]
    }

    pub fn word(&self, index: usize) -> &Word {
        &self.words[index]
    }

    /// First letter and index of the remaining suffix, for `index > 0`.
    pub fn split(&self, index: usize) -> (Letter, usize) {
        (self.heads[index], self.tails[index])
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.words.binary_search(w).ok()
    }
}

/// Reduced words of length at most `r` in canonical order.
pub fn ball(m: usize, r: usize) -> Vec<Word> {
    Ball::new(m, r).words
}

/// `+1` or `-1` exponent of a conjugate term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl TryFrom<i64> for Sign {
    type Error = WordError;

    fn try_from(v: i64) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(WordError::InvalidSign(other)),
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(self.as_i64())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Sign::try_from(v).map_err(serde::de::Error::custom)
    }
}

/// One factor `t * q^eps * t^{-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugateTerm {
    #[serde(rename = "t")]
    pub conjugator: Word,
    #[serde(rename = "q")]
    pub relator: Word,
    #[serde(rename = "eps")]
    pub sign: Sign,
}

impl ConjugateTerm {
    pub fn new(conjugator: Word, relator: Word, sign: Sign) -> Self {
        ConjugateTerm {
            conjugator,
            relator,
            sign,
        }
    }

    pub fn value(&self) -> Word {
        self.relator.pow(self.sign.as_i64()).conjugate_by(&self.conjugator)
    }
}

/// An expression of `target` as a product of conjugates of relators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugacyDecomposition {
    pub target: Word,
    pub terms: Vec<ConjugateTerm>,
}

impl ConjugacyDecomposition {
    pub fn new(target: Word, terms: Vec<ConjugateTerm>) -> Self {
        ConjugacyDecomposition { target, terms }
    }

    /// Reduced product of all terms, in order.
    pub fn product(&self) -> Word {
        self.terms
            .iter()
            .fold(Word::identity(), |acc, t| acc.concat(&t.value()))
    }

    pub fn verify(&self) -> bool {
        self.product() == self.target
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }
}

/// Tolerance transfer from a normal-closure system to the relators it is
/// built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaTransfer {
    pub delta: Rational,
    pub relators: BTreeSet<Word>,
}

/// Given decompositions of finitely many consequences and a target
/// tolerance, returns `delta = target / C` with `C` the total number of
/// terms, together with the set of relators the decompositions use. With no
/// terms at all the tolerance passes through unchanged.
pub fn transfer_delta(
    decomps: &[ConjugacyDecomposition],
    target_delta: Rational,
) -> Result<DeltaTransfer, WordError> {
    if target_delta <= Rational::zero() {
        return Err(WordError::NonPositiveDelta);
    }
    if let Some(index) = decomps.iter().position(|d| !d.verify()) {
        return Err(WordError::DecompositionMismatch { index });
    }
    let total: usize = decomps.iter().map(|d| d.term_count()).sum();
    let relators = decomps
        .iter()
        .flat_map(|d| d.terms.iter().map(|t| t.relator.clone()))
        .collect();
    let delta = if total == 0 {
        target_delta
    } else {
        target_delta / Rational::from(total as i128)
    };
    Ok(DeltaTransfer { delta, relators })
}
