//! The exceptional-data calculus for Lefschetz pencils.
//!
//! A pencil is tracked by its fiber genus and its *exceptional data*
//! `(m_0, m_1, ..., m_r)`: `m_0` counts base points and `m_{i+1}` counts the
//! exceptional classes that are `2^i`-sections of the pencil. Blowing up `b`
//! base points turns them into 1-sections, `(m_0 - b, m_1 + b, m_2, ...)`;
//! blowing down moves weight the other way. A partial doubling along
//! `1 <= k <= m_0` points blows up the other `m_0 - k` base points and then
//! doubles the remaining degree, producing genus `2g + k - 1` and data
//! `(4k, 0, m_0 + m_1 - k, m_2, ..., m_r)`.
//!
//! Everything here is an immutable value and every operation is pure; entries
//! grow without bound under doubling, so all arithmetic is on `BigUint`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Errors raised by the doubling calculus.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalculusError {
    #[error("cannot blow up {requested} base points: state has only {available}")]
    BlowUpExceedsBasePoints {
        requested: BigUint,
        available: BigUint,
    },
    #[error("cannot blow down {requested} exceptional 1-sections: state has only {available}")]
    BlowDownExceedsSections {
        requested: BigUint,
        available: BigUint,
    },
    #[error("partial doubling size must be at least 1")]
    DoublingSizeZero,
    #[error("cannot double along {k} points: state has only {m0} base points")]
    DoublingExceedsBasePoints { k: BigUint, m0: BigUint },
    #[error(
        "doubling hypothesis fails on intermediate pencil: need genus >= 2 and k <= 2g - 2, \
         got g = {genus}, k = {k}"
    )]
    DoublingHypothesis { genus: BigUint, k: BigUint },
    #[error("invalid doubling sequence: {report}")]
    InvalidSequence { report: SequenceReport },
    #[error("step {index} of the doubling sequence failed: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<CalculusError>,
    },
}

/// Truncated tuple `(m_0, m_1, ..., m_r)` of base-point and `2^i`-section
/// counts. Canonical form drops trailing zeros; the empty tuple is `(0)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ExceptionalData {
    entries: Vec<BigUint>,
}

impl ExceptionalData {
    /// Builds the canonical form of the given tuple (trailing zeros dropped).
    pub fn new(mut entries: Vec<BigUint>) -> Self {
        while entries.last().is_some_and(Zero::is_zero) {
            entries.pop();
        }
        ExceptionalData { entries }
    }

    pub fn from_u64s(entries: &[u64]) -> Self {
        Self::new(entries.iter().map(|&e| BigUint::from(e)).collect())
    }

    /// Entries in canonical form. The slice never ends with a zero.
    pub fn entries(&self) -> &[BigUint] {
        &self.entries
    }

    /// The `i`-th entry, zero beyond the truncation point.
    pub fn entry(&self, i: usize) -> BigUint {
        self.entries.get(i).cloned().unwrap_or_else(BigUint::zero)
    }

    /// Number of base points `m_0`.
    pub fn base_points(&self) -> BigUint {
        self.entry(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of all entries.
    pub fn total(&self) -> BigUint {
        self.entries.iter().sum()
    }

    /// The blow-up/blow-down equivalence class representative
    /// `(m_0 + m_1, m_2, ..., m_r)`: blow-ups and blow-downs only shift
    /// weight between the first two entries, so two pencils on the same
    /// manifold are compared through this normal form.
    pub fn normalize(&self) -> ExceptionalData {
        if self.entries.is_empty() {
            return ExceptionalData::default();
        }
        let mut merged = vec![self.entry(0) + self.entry(1)];
        merged.extend(self.entries.iter().skip(2).cloned());
        ExceptionalData::new(merged)
    }

    /// Total multisection degree `sum_{i >= 0} m_{i+1} * 2^i` of the tracked
    /// exceptional classes.
    pub fn weighted_multisection_degree(&self) -> BigUint {
        let mut sum = BigUint::zero();
        let mut weight = BigUint::one();
        for entry in self.entries.iter().skip(1) {
            sum += entry * &weight;
            weight <<= 1;
        }
        sum
    }
}

impl fmt::Display for ExceptionalData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "(0)");
        }
        write!(f, "(")?;
        for (i, entry) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{entry}")?;
        }
        write!(f, ")")
    }
}

/// Validity regime for partial doublings.
///
/// `Syntactic` only checks the sequence constraints (`k <= m_0` at each
/// step); `Strict` additionally requires the doubling hypothesis `g >= 2`
/// and `k <= 2g - 2` on the intermediate pencil, which is automatic for
/// pencils on manifolds that are not rational or ruled. Strict is the
/// default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Strict,
    Syntactic,
}

/// Adjunction bound report: a genus-`g` pencil on a non-rational/ruled
/// manifold has at most `2g - 2` base points and total tracked multisection
/// degree at most `2g - 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjunctionReport {
    pub genus: BigUint,
    /// `2g - 2`, negative when `g = 0`.
    pub bound: BigInt,
    pub base_points: BigUint,
    pub weighted_degree: BigUint,
    pub base_points_ok: bool,
    pub degree_ok: bool,
}

impl AdjunctionReport {
    pub fn clean(&self) -> bool {
        self.base_points_ok && self.degree_ok
    }
}

impl fmt::Display for AdjunctionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clean() {
            return write!(
                f,
                "adjunction-clean: m_0 = {} and multisection degree {} are both <= 2g - 2 = {}",
                self.base_points, self.weighted_degree, self.bound
            );
        }
        let mut reasons = Vec::new();
        if !self.base_points_ok {
            reasons.push(format!(
                "m_0 = {} exceeds 2g - 2 = {}",
                self.base_points, self.bound
            ));
        }
        if !self.degree_ok {
            reasons.push(format!(
                "multisection degree {} exceeds 2g - 2 = {}",
                self.weighted_degree, self.bound
            ));
        }
        write!(f, "adjunction violated: {}", reasons.join("; "))
    }
}

/// Fiber genus together with exceptional data; the state evolved by
/// blow-ups, blow-downs and partial doublings.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PencilState {
    genus: BigUint,
    data: ExceptionalData,
}

impl PencilState {
    pub fn new(genus: BigUint, data: ExceptionalData) -> Self {
        PencilState { genus, data }
    }

    pub fn from_u64s(genus: u64, entries: &[u64]) -> Self {
        PencilState::new(BigUint::from(genus), ExceptionalData::from_u64s(entries))
    }

    pub fn genus(&self) -> &BigUint {
        &self.genus
    }

    pub fn data(&self) -> &ExceptionalData {
        &self.data
    }

    pub fn base_points(&self) -> BigUint {
        self.data.base_points()
    }

    /// Blows up `b` base points, converting them into exceptional
    /// 1-sections: `(m_0 - b, m_1 + b, m_2, ...)`. Genus is unchanged.
    pub fn blow_up(&self, b: &BigUint) -> Result<PencilState, CalculusError> {
        let m0 = self.data.base_points();
        if *b > m0 {
            return Err(CalculusError::BlowUpExceedsBasePoints {
                requested: b.clone(),
                available: m0,
            });
        }
        let mut entries = vec![m0 - b, self.data.entry(1) + b];
        entries.extend(self.data.entries().iter().skip(2).cloned());
        Ok(PencilState::new(
            self.genus.clone(),
            ExceptionalData::new(entries),
        ))
    }

    /// Blows down `b` exceptional 1-sections back into base points:
    /// `(m_0 + b, m_1 - b, m_2, ...)`. Inverse of [`PencilState::blow_up`].
    pub fn blow_down(&self, b: &BigUint) -> Result<PencilState, CalculusError> {
        let m1 = self.data.entry(1);
        if *b > m1 {
            return Err(CalculusError::BlowDownExceedsSections {
                requested: b.clone(),
                available: m1,
            });
        }
        let mut entries = vec![self.data.base_points() + b, m1 - b];
        entries.extend(self.data.entries().iter().skip(2).cloned());
        Ok(PencilState::new(
            self.genus.clone(),
            ExceptionalData::new(entries),
        ))
    }

    /// Partial doubling along `1 <= k <= m_0` points: blow up the other
    /// `m_0 - k` base points, then double the remaining degree. The result
    /// has genus `2g + k - 1` and data `(4k, 0, m_0 + m_1 - k, m_2, ...)`;
    /// `k = m_0` is the full double.
    ///
    /// In [`Mode::Strict`] the doubling hypothesis `g >= 2`, `k <= 2g - 2`
    /// is required of the intermediate pencil (which has `k` base points and
    /// the same genus `g`).
    pub fn partial_double(&self, k: &BigUint, mode: Mode) -> Result<PencilState, CalculusError> {
        if k.is_zero() {
            return Err(CalculusError::DoublingSizeZero);
        }
        let m0 = self.data.base_points();
        if *k > m0 {
            return Err(CalculusError::DoublingExceedsBasePoints { k: k.clone(), m0 });
        }
        if mode == Mode::Strict {
            // g >= 2 and k + 2 <= 2g, phrased without unsigned underflow.
            let two_g = &self.genus * 2u32;
            if self.genus < BigUint::from(2u32) || k + 2u32 > two_g {
                return Err(CalculusError::DoublingHypothesis {
                    genus: self.genus.clone(),
                    k: k.clone(),
                });
            }
        }
        let genus = &self.genus * 2u32 + k - 1u32;
        let mut entries = vec![k * 4u32, BigUint::zero(), m0 + self.data.entry(1) - k];
        entries.extend(self.data.entries().iter().skip(2).cloned());
        Ok(PencilState::new(genus, ExceptionalData::new(entries)))
    }

    /// Adjunction bound check; not enforced on construction.
    pub fn adjunction(&self) -> AdjunctionReport {
        let two_g = &self.genus * 2u32;
        let bound = BigInt::from(two_g.clone()) - 2;
        let base_points = self.data.base_points();
        let weighted_degree = self.data.weighted_multisection_degree();
        // m <= 2g - 2 written as m + 2 <= 2g so BigUint never underflows.
        let base_points_ok = &base_points + 2u32 <= two_g;
        let degree_ok = &weighted_degree + 2u32 <= two_g;
        AdjunctionReport {
            genus: self.genus.clone(),
            bound,
            base_points,
            weighted_degree,
            base_points_ok,
            degree_ok,
        }
    }

    pub fn is_adjunction_clean(&self) -> bool {
        self.adjunction().clean()
    }

    /// Runs a doubling sequence: at each step blows up all but `k_j` base
    /// points and doubles along the remaining `k_j`. The blow-up count also
    /// includes blowing up every base point of the final pencil, so it
    /// matches the closed form `m_0 + 3 sum k_i` and counts the blow-ups
    /// needed to pass from the start pencil to the final Lefschetz
    /// fibration. The trace records the start state and both intermediate
    /// states per step (`2d + 1` states in total).
    pub fn apply_sequence(
        &self,
        seq: &DoublingSequence,
        mode: Mode,
    ) -> Result<DoublingOutcome, CalculusError> {
        let report = seq.validate(&self.base_points());
        if !report.valid() {
            return Err(CalculusError::InvalidSequence { report });
        }
        let mut trace = vec![self.clone()];
        let mut state = self.clone();
        let mut performed = BigUint::zero();
        let step_err = |index: usize| {
            move |e: CalculusError| CalculusError::Step {
                index,
                source: Box::new(e),
            }
        };
        for (index, k) in seq.steps().iter().enumerate() {
            let b = state.base_points() - k;
            state = state.blow_up(&b).map_err(step_err(index))?;
            performed += b;
            trace.push(state.clone());
            state = state.partial_double(k, mode).map_err(step_err(index))?;
            trace.push(state.clone());
        }
        let blowup_count = performed + state.base_points();
        Ok(DoublingOutcome {
            final_state: state,
            blowup_count,
            trace,
        })
    }
}

impl fmt::Display for PencilState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "genus {}, data {}", self.genus, self.data)
    }
}

/// Result of running a doubling sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoublingOutcome {
    pub final_state: PencilState,
    /// Blow-ups from the start pencil to the final Lefschetz fibration.
    pub blowup_count: BigUint,
    pub trace: Vec<PencilState>,
}

/// A partial-doubling sequence `[k_1, ..., k_d]`.
///
/// Construction does not validate; [`DoublingSequence::validate`] reports
/// every violated constraint (`k_1 <= m_0`, `k_j >= 1`, `4 k_j >= k_{j+1}`)
/// so that invalid user input can be diagnosed in full.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DoublingSequence {
    steps: Vec<BigUint>,
}

impl DoublingSequence {
    pub fn new(steps: Vec<BigUint>) -> Self {
        DoublingSequence { steps }
    }

    pub fn from_u64s(steps: &[u64]) -> Self {
        DoublingSequence::new(steps.iter().map(|&k| BigUint::from(k)).collect())
    }

    pub fn steps(&self) -> &[BigUint] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn sum(&self) -> BigUint {
        self.steps.iter().sum()
    }

    /// Checks the sequence against a start pencil with `m_0` base points,
    /// reporting every violated constraint. Total function.
    pub fn validate(&self, m0: &BigUint) -> SequenceReport {
        let mut violations = Vec::new();
        if let Some(k1) = self.steps.first() {
            if k1 > m0 {
                violations.push(SequenceViolation::FirstStepExceedsBasePoints {
                    k1: k1.clone(),
                    m0: m0.clone(),
                });
            }
        }
        for (index, k) in self.steps.iter().enumerate() {
            if k.is_zero() {
                violations.push(SequenceViolation::ZeroStep { index });
            }
        }
        for (index, pair) in self.steps.windows(2).enumerate() {
            if pair[0].clone() * 4u32 < pair[1] {
                violations.push(SequenceViolation::ChainingViolated {
                    index,
                    k: pair[0].clone(),
                    next: pair[1].clone(),
                });
            }
        }
        SequenceReport { violations }
    }
}

impl fmt::Display for DoublingSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, k) in self.steps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, "]")
    }
}

/// Parses `"9,13,8"` or `"[9, 13, 8]"`; the empty string and `"[]"` give the
/// empty sequence.
impl FromStr for DoublingSequence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim().trim_start_matches('[').trim_end_matches(']');
        if trimmed.trim().is_empty() {
            return Ok(DoublingSequence::default());
        }
        let mut steps = Vec::new();
        for token in trimmed.split(',') {
            let token = token.trim();
            let k = BigUint::from_str(token).map_err(|_| {
                format!("invalid sequence entry {token:?}: expected a non-negative integer")
            })?;
            steps.push(k);
        }
        Ok(DoublingSequence::new(steps))
    }
}

/// One violated sequence constraint. Indices are 0-based; messages render
/// the usual 1-based subscripts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SequenceViolation {
    FirstStepExceedsBasePoints {
        k1: BigUint,
        m0: BigUint,
    },
    ZeroStep {
        index: usize,
    },
    ChainingViolated {
        index: usize,
        k: BigUint,
        next: BigUint,
    },
}

impl fmt::Display for SequenceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceViolation::FirstStepExceedsBasePoints { k1, m0 } => {
                write!(f, "k_1 = {k1} exceeds the m_0 = {m0} base points")
            }
            SequenceViolation::ZeroStep { index } => {
                write!(f, "k_{} must be at least 1", index + 1)
            }
            SequenceViolation::ChainingViolated { index, k, next } => {
                write!(
                    f,
                    "k_{} = {next} exceeds 4 k_{} = {}",
                    index + 2,
                    index + 1,
                    k * 4u32
                )
            }
        }
    }
}

/// Validity report for a sequence; empty violation list means valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceReport {
    pub violations: Vec<SequenceViolation>,
}

impl SequenceReport {
    pub fn valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for SequenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid() {
            return write!(f, "valid");
        }
        let rendered: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", rendered.join("; "))
    }
}

/// Closed forms for the invariants of a doubling sequence applied to a
/// genus-`g0` pencil with `m_0` base points:
/// `M = m_0 + 3 sum k_i` blow-ups and final genus
/// `g = 2^d g_0 + sum 2^(d-i) (k_i - 1)`.
pub fn closed_forms(
    g0: &BigUint,
    m0: &BigUint,
    seq: &DoublingSequence,
) -> Result<(BigUint, BigUint), CalculusError> {
    let report = seq.validate(m0);
    if !report.valid() {
        return Err(CalculusError::InvalidSequence { report });
    }
    let blowups = m0 + seq.sum() * 3u32;
    let d = seq.len();
    let mut genus = g0 << d;
    for (i, k) in seq.steps().iter().enumerate() {
        genus += (k - 1u32) << (d - i - 1);
    }
    Ok((blowups, genus))
}
