//! File records shared by the command line and tests.
//!
//! JSON output is canonical: keys sorted, rationals as `"p/q"` strings.

use serde::{Deserialize, Serialize};

use crate::actions::FiniteAction;
use crate::cosets::{catalog_presentation, ClassData, CosetError, CosetTable, GroupId, Presentation};
use crate::irs::{AtomicIRS, IrsError};
use crate::rational::Rational;
use crate::words::{Alphabet, Word};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("presentation file: {0}")]
    Presentation(String),
    #[error(transparent)]
    Coset(#[from] CosetError),
    #[error(transparent)]
    Irs(#[from] IrsError),
    #[error("cannot load presentation {reference:?}: {reason}")]
    Reference { reference: String, reason: String },
}

/// Serializes through `serde_json::Value`, whose maps keep keys sorted.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let v = serde_json::to_value(value)?;
    serde_json::to_string(&v)
}

/// `{ "m": 2, "relators": ["rrr", "ss", "rsrs"], "generators": ["r", "s"] }`.
/// Without `generators` the standard names `a, b, c, ...` apply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationFile {
    pub m: usize,
    pub relators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
}

impl PresentationFile {
    pub fn to_presentation(&self) -> Result<Presentation, FormatError> {
        let alphabet = match &self.generators {
            None => Alphabet::standard(self.m),
            Some(names) => {
                if names.len() != self.m || names.iter().any(|n| n.chars().count() != 1) {
                    return Err(FormatError::Presentation(
                        "generators must be m single-letter names".into(),
                    ));
                }
                Alphabet::new(&names.concat()).map_err(|e| FormatError::Presentation(e.to_string()))?
            }
        };
        let rels: Vec<&str> = self.relators.iter().map(String::as_str).collect();
        Ok(Presentation::parse(alphabet, &rels)?)
    }

    pub fn from_presentation(p: &Presentation) -> Self {
        PresentationFile {
            m: p.m(),
            relators: p.relators().iter().map(|w| p.format_word(w)).collect(),
            generators: (!p.alphabet().is_standard()).then(|| p.alphabet().names().chars().map(String::from).collect()),
        }
    }
}

/// Resolves a catalog name such as `"d3"`, or hands anything else to
/// `load` (typically a path).
pub fn resolve_presentation<F>(reference: &str, load: F) -> Result<Presentation, FormatError>
where
    F: FnOnce(&str) -> Result<PresentationFile, FormatError>,
{
    match reference.parse::<GroupId>() {
        Ok(id) => Ok(catalog_presentation(id)?),
        Err(_) => load(reference)?.to_presentation(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrsClassRecord {
    pub presentation_ref: String,
    pub subgroup: Vec<String>,
    #[serde(with = "crate::rational::string")]
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrsFile {
    #[serde(default)]
    pub radius_hint: Option<usize>,
    pub classes: Vec<IrsClassRecord>,
}

impl IrsFile {
    /// Enumerates each class representative and assembles the IRS.
    pub fn resolve<F>(&self, mut load: F, max_cosets: usize) -> Result<AtomicIRS, FormatError>
    where
        F: FnMut(&str) -> Result<PresentationFile, FormatError>,
    {
        let mut classes = Vec::with_capacity(self.classes.len());
        for c in &self.classes {
            let p = resolve_presentation(&c.presentation_ref, &mut load)?;
            let gens = c
                .subgroup
                .iter()
                .map(|w| p.parse_word(w).map_err(CosetError::from))
                .collect::<Result<Vec<Word>, _>>()?;
            let table = crate::cosets::todd_coxeter(&p, &gens, max_cosets)?;
            classes.push((table, c.weight));
        }
        Ok(AtomicIRS::new(classes)?)
    }
}

/// What `cosets` prints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetTableRecord {
    pub presentation: PresentationFile,
    pub subgroup: Vec<String>,
    pub index: usize,
    pub class_size: usize,
    pub normalizer_index: usize,
    pub normalizer_cosets: usize,
    pub action: FiniteAction,
}

impl CosetTableRecord {
    pub fn new(t: &CosetTable) -> Self {
        let p = t.presentation();
        let ClassData {
            index,
            class_size,
            normalizer_index,
            normalizer_cosets,
        } = t.class_data();
        CosetTableRecord {
            presentation: PresentationFile::from_presentation(p),
            subgroup: t.subgroup_gens().iter().map(|w| p.format_word(w)).collect(),
            index,
            class_size,
            normalizer_index,
            normalizer_cosets,
            action: t.action().clone(),
        }
    }

    /// Re-checks the table against its presentation.
    pub fn to_table(&self) -> Result<CosetTable, FormatError> {
        let p = self.presentation.to_presentation()?;
        let gens = self
            .subgroup
            .iter()
            .map(|w| p.parse_word(w).map_err(CosetError::from))
            .collect::<Result<Vec<Word>, _>>()?;
        Ok(CosetTable::from_action(&p, &self.action, 0, gens)?)
    }
}
