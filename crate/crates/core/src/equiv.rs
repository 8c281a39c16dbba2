//! Bounded exploration of Hurwitz-move orbits at homology level, with
//! invariant screens for fast non-equivalence verdicts.
//!
//! The orbit closure here is everything the word engine can prove: two words
//! connected by moves are certainly equivalent at homology level, and words
//! separated by an invariant screen are certainly not. In between sits the
//! honest third verdict, `unknown` — the search is bounded, the conjugator
//! set is whatever the caller supplies, and homology-level agreement is
//! necessary but not sufficient for the underlying mapping classes.

use crate::invariants::{euler_characteristic, signature};
use crate::mcg::{
    ConjugationPolicy, Factorization, HomologyClass, McgError, MoveDirection, StabilizerType,
};
use num_bigint::BigInt;
use num_traits::One;
use std::collections::{BTreeMap, VecDeque};
use std::fmt;

/// Moves used by an orbit search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveSet {
    Hurwitz,
    HurwitzAndPartialConjugation,
}

impl fmt::Display for MoveSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoveSet::Hurwitz => write!(f, "hurwitz"),
            MoveSet::HurwitzAndPartialConjugation => write!(f, "hurwitz+partial-conjugation"),
        }
    }
}

/// Result of a bounded orbit closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitReport {
    pub seed: Factorization,
    pub visited: usize,
    /// True exactly when a cap stopped the search before closure.
    pub truncated: bool,
    /// Every visited word, sorted by canonical key; the first entry is the
    /// canonical representative of the explored orbit.
    pub words: Vec<Factorization>,
    pub move_set: MoveSet,
    pub conjugators: Vec<HomologyClass>,
}

impl OrbitReport {
    pub fn canonical_representative(&self) -> Option<&Factorization> {
        self.words.first()
    }
}

/// Breadth-first closure of `seed` under elementary Hurwitz moves and, when
/// a conjugator set is supplied, untwisted partial conjugations by `q = ±1`
/// twists along those classes on every contiguous stabilizer-passing
/// subword. Words are deduplicated by their sign-normalized letter encoding;
/// `depth_cap` bounds the number of move layers and `size_cap` the number of
/// visited words. Deterministic for fixed inputs.
pub fn hurwitz_orbit(
    seed: &Factorization,
    depth_cap: usize,
    size_cap: usize,
    conjugators: Option<&[HomologyClass]>,
) -> Result<OrbitReport, McgError> {
    let (report, _) = orbit_search(seed, depth_cap, size_cap, conjugators, None)?;
    Ok(report)
}

/// Equivalence verdict for a pair of factorizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Yes => write!(f, "yes"),
            Verdict::No => write!(f, "no"),
            Verdict::Unknown => write!(f, "unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub verdict: Verdict,
    pub reason: String,
    /// Caveat attached to every non-`No` verdict: the verdicts live at
    /// homology level and the search is bounded.
    pub caveat: Option<String>,
}

const HOMOLOGY_CAVEAT: &str = "verdict is at homology level: move-connectedness here is \
necessary but not sufficient for equivalence of the underlying factorizations";
const BOUNDED_CAVEAT: &str = "bounded search exhausted its caps without connecting the words; \
this is not evidence of inequivalence";

/// Decides whether two words are connected by the move set, within caps.
///
/// Screens that are exactly invariant under the move set are compared
/// first: ambient surface, word length, word product, Euler characteristic
/// and signature, and — for the pure Hurwitz move set — the rank of the
/// letter-class span. A differing screen gives `no`. Otherwise the bounded
/// orbit of `f1` is searched for `f2`: a hit gives `yes` (with the
/// homology-level caveat), cap exhaustion gives `unknown`, never `no`.
pub fn equivalent(
    f1: &Factorization,
    f2: &Factorization,
    depth_cap: usize,
    size_cap: usize,
    conjugators: Option<&[HomologyClass]>,
) -> Result<EquivalenceReport, McgError> {
    if let Some(report) = screen(f1, f2, conjugators.is_none()) {
        return Ok(report);
    }
    let target = f2.canonical_key();
    let (orbit, found) = orbit_search(f1, depth_cap, size_cap, conjugators, Some(&target))?;
    if found {
        return Ok(EquivalenceReport {
            verdict: Verdict::Yes,
            reason: "the second word appears in the bounded move orbit of the first".to_string(),
            caveat: Some(HOMOLOGY_CAVEAT.to_string()),
        });
    }
    Ok(EquivalenceReport {
        verdict: Verdict::Unknown,
        reason: format!(
            "orbit search visited {} words (truncated: {}) without reaching the second word",
            orbit.visited, orbit.truncated
        ),
        caveat: Some(BOUNDED_CAVEAT.to_string()),
    })
}

fn screen(f1: &Factorization, f2: &Factorization, hurwitz_only: bool) -> Option<EquivalenceReport> {
    let no = |reason: String| {
        Some(EquivalenceReport {
            verdict: Verdict::No,
            reason,
            caveat: None,
        })
    };
    if f1.genus() != f2.genus() || f1.boundary_count() != f2.boundary_count() {
        return no(format!(
            "words live on different surfaces: (g = {}, m = {}) vs (g = {}, m = {})",
            f1.genus(),
            f1.boundary_count(),
            f2.genus(),
            f2.boundary_count()
        ));
    }
    if f1.len() != f2.len() {
        return no(format!("word lengths differ: {} vs {}", f1.len(), f2.len()));
    }
    if f1.word_product() != f2.word_product() {
        return no("word products differ".to_string());
    }
    let e1 = euler_characteristic(f1, false);
    let e2 = euler_characteristic(f2, false);
    if e1 != e2 {
        return no(format!("Euler characteristics differ: {e1} vs {e2}"));
    }
    let s1 = signature(f1, false).value;
    let s2 = signature(f2, false).value;
    if s1 != s2 {
        return no(format!("signatures differ: {s1} vs {s2}"));
    }
    if hurwitz_only {
        // The span rank is a screen for the pure Hurwitz move set only: a
        // partial conjugation may move letter classes out of their span.
        let r1 = f1.letter_span_rank();
        let r2 = f2.letter_span_rank();
        if r1 != r2 {
            return no(format!("letter-class span ranks differ: {r1} vs {r2}"));
        }
    }
    None
}

type WordKey = Vec<Vec<BigInt>>;

fn orbit_search(
    seed: &Factorization,
    depth_cap: usize,
    size_cap: usize,
    conjugators: Option<&[HomologyClass]>,
    target: Option<&WordKey>,
) -> Result<(OrbitReport, bool), McgError> {
    if depth_cap == 0 || size_cap == 0 {
        return Err(McgError::ZeroOrbitCap);
    }
    let conjugator_classes: Vec<HomologyClass> = conjugators
        .map(|cs| cs.iter().filter(|c| !c.is_zero()).cloned().collect())
        .unwrap_or_default();
    let move_set = if conjugators.is_some() {
        MoveSet::HurwitzAndPartialConjugation
    } else {
        MoveSet::Hurwitz
    };

    let mut visited: BTreeMap<WordKey, Factorization> = BTreeMap::new();
    let mut queue: VecDeque<(Factorization, usize)> = VecDeque::new();
    let seed_key = seed.canonical_key();
    let mut found = target.is_some_and(|t| *t == seed_key);
    visited.insert(seed_key, seed.clone());
    queue.push_back((seed.clone(), 0));
    let mut truncated = false;

    'bfs: while let Some((word, depth)) = queue.pop_front() {
        if depth == depth_cap {
            // Unexpanded frontier at the depth cap: closure unknown.
            truncated = true;
            continue;
        }
        let mut neighbors: Vec<Factorization> = Vec::new();
        for i in 0..word.len().saturating_sub(1) {
            neighbors.push(word.hurwitz_move(i, MoveDirection::Right)?);
            neighbors.push(word.hurwitz_move(i, MoveDirection::Left)?);
        }
        for alpha in &conjugator_classes {
            for start in 0..word.len() {
                for end in start + 1..=word.len() {
                    let range = start..end;
                    if word.stabilizer_type(range.clone(), alpha)? != StabilizerType::Fixes {
                        continue;
                    }
                    for q in [BigInt::one(), -BigInt::one()] {
                        neighbors.push(word.partial_conjugate(
                            range.clone(),
                            alpha,
                            &q,
                            ConjugationPolicy::Untwisted,
                        )?);
                    }
                }
            }
        }
        for neighbor in neighbors {
            let key = neighbor.canonical_key();
            if visited.contains_key(&key) {
                continue;
            }
            if visited.len() >= size_cap {
                truncated = true;
                break 'bfs;
            }
            if let Some(t) = target {
                if *t == key {
                    found = true;
                }
            }
            visited.insert(key, neighbor.clone());
            queue.push_back((neighbor, depth + 1));
        }
        if found {
            break;
        }
    }

    let words: Vec<Factorization> = visited.into_values().collect();
    let report = OrbitReport {
        seed: seed.clone(),
        visited: words.len(),
        truncated,
        words,
        move_set,
        conjugators: conjugator_classes,
    };
    Ok((report, found))
}
