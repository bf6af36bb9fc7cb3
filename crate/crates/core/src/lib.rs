//! A laboratory for permutation stability of finitely presented groups.
//!
//! The crate works with finite actions of a free group `F = F(s_1, ..., s_m)`
//! given by one permutation per basis letter, and measures how far such an
//! action is from satisfying a set of relations:
//!
//! * [`words`]: reduced words, shortlex balls and conjugacy decompositions.
//! * [`actions`]: permutation tuples, Hamming defects and stabilizer traces.
//! * [`cosets`]: presentations, Todd–Coxeter enumeration and a small catalog
//!   of groups.
//! * [`metrics`]: the generator metric between actions and the truncated
//!   local-statistics distance.
//! * [`hyperfinite`]: vertex-removal certificates for Schreier graphs.
//! * [`irs`]: finite-index invariant random subgroups and constructions of
//!   finite actions approximating them.
//! * [`lab`]: perturbed actions ("challenges"), repair strategies and
//!   experiment runs.
//!
//! All quantities are exact rationals ([`Rational`]).

pub mod actions;
pub mod cosets;
pub mod formats;
pub mod hyperfinite;
pub mod irs;
pub mod lab;
pub mod metrics;
pub mod rational;
pub mod words;

pub use actions::{hamming, ActionError, FiniteAction, Permutation, Trace};
pub use cosets::{
    catalog, catalog_presentation, todd_coxeter, CatalogEntry, ClassData, CosetError, CosetTable,
    GroupId, Presentation,
};
pub use formats::{to_canonical_json, FormatError, IrsFile, PresentationFile};
pub use hyperfinite::{decompose, Decomposition, HyperfiniteError, Strategy};
pub use irs::{
    amplify, build_cosofic_action, cylinder_measure, irs_of_action, normal_chain_irs,
    weakstar_dist_trunc, AtomicIRS, CosoficAction, EmpiricalIRS, IrsError, Shadow,
};
pub use lab::{
    make_challenge, repair, run_experiment, verify_report, Challenge, ExperimentRow,
    ExperimentSpec, LabError, RepairReport, RepairStrategy,
};
pub use metrics::{
    d_gen_exact, d_gen_upper, d_stat_trunc, gen_norm, local_profile, profile_distance,
    total_variation, Bijection, Matching, MetricError, TraceProfile,
};
pub use rational::{format_rational, parse_rational, Rational};
pub use words::{
    ball, transfer_delta, Alphabet, Ball, ConjugacyDecomposition, ConjugateTerm, Letter, Sign,
    Word, WordError,
};
