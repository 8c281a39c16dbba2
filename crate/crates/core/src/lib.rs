//! Combinatorial machinery for Lefschetz pencils and fibrations.
//!
//! The crate has two halves that meet in the command-line tool:
//!
//! * the *doubling calculus*: pencil states `(genus, exceptional data)`,
//!   blow-ups/blow-downs, partial doublings, and searches for families of
//!   doubling sequences that land on the same blow-up with the same fiber
//!   genus but distinct exceptional data ([`calculus`], [`search`]);
//! * the *word engine*: positive Dehn-twist factorizations tracked through
//!   their action on first homology, with Hurwitz moves, global and partial
//!   conjugations, Euler characteristic and signature via the Meyer cocycle,
//!   and bounded orbit exploration ([`mcg`], [`invariants`], [`equiv`]).
//!
//! All arithmetic is exact: arbitrary-precision integers for the calculus and
//! the symplectic matrices, exact rationals for the signature computations.
//! No floating point is used anywhere.

pub mod calculus;
pub mod equiv;
pub mod invariants;
pub mod mcg;
pub mod search;

pub use calculus::{
    AdjunctionReport, CalculusError, DoublingOutcome, DoublingSequence, ExceptionalData, Mode,
    PencilState, SequenceReport, SequenceViolation,
};
pub use equiv::{EquivalenceReport, MoveSet, OrbitReport, Verdict};
pub use invariants::{InvariantError, SignatureOutcome, SignatureTriple};
pub use mcg::{
    ConjugationPolicy, Factorization, HomologyClass, McgError, MonodromyFingerprint, MoveDirection,
    SpElement, StabilizerType, TwistLetter,
};
pub use search::{FamilyCheck, FamilyVerification, MatchingFamily, SearchError, SearchOutcome};
