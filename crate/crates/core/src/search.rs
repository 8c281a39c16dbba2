//! Matching doubling sequences: the kernel lattice of the two matching
//! conditions, the explicit three-step family, and a deterministic search
//! for families of sequences that reach the same blow-up and fiber genus
//! with pairwise-distinct exceptional data.

use crate::calculus::{
    closed_forms, CalculusError, DoublingSequence, ExceptionalData, Mode, PencilState,
};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("kernel lattice needs dimension d >= 2, got {0}")]
    KernelDimension(usize),
    #[error("family parameters violate {0}")]
    FamilyPrecondition(String),
    #[error("start pencil is not adjunction-clean: {0}")]
    StartNotClean(String),
    #[error("search needs a start pencil with at least one base point")]
    NoBasePoints,
    #[error("search bounds must be positive (count, max length, and entry bound)")]
    EmptyBounds,
    #[error(transparent)]
    Calculus(#[from] CalculusError),
}

/// Primitive basis of the rank-`(d-2)` lattice
/// `{ v in Z^d : sum v_i = 0 and sum 2^(d-i) v_i = 0 }`.
///
/// Two equal-length doubling sequences from the same start pencil produce
/// the same blow-up count and fiber genus exactly when their difference
/// lies in this lattice. The staircase vectors `e_j - 3 e_{j+1} + 2 e_{j+2}`
/// generate it: reducing any kernel vector against them from the left
/// leaves a vector supported on the last two coordinates, where the two
/// conditions force zero.
pub fn kernel_basis(d: usize) -> Result<Vec<Vec<BigInt>>, SearchError> {
    if d < 2 {
        return Err(SearchError::KernelDimension(d));
    }
    let mut basis = Vec::new();
    for j in 0..d.saturating_sub(2) {
        let mut v = vec![BigInt::zero(); d];
        v[j] = BigInt::one();
        v[j + 1] = BigInt::from(-3);
        v[j + 2] = BigInt::from(2);
        basis.push(v);
    }
    Ok(basis)
}

/// The explicit three-step family `D(n) = [m_0 - n, m_0 + 3n, m_0 - 2n]`,
/// valid whenever `m_0 >= 7n/3` and `m_0 >= 1 + 2n` (checked exactly).
/// Consecutive members differ by the kernel vector `[1, -3, 2]`, so every
/// member shares the same blow-up count and final genus.
pub fn three_step_family(m0: &BigUint, n: &BigUint) -> Result<DoublingSequence, SearchError> {
    check_family_preconditions(m0, n)?;
    Ok(DoublingSequence::new(vec![
        m0 - n,
        m0 + n * 3u32,
        m0 - n * 2u32,
    ]))
}

/// Closed form `(4 m_0 - 8n, 0, 3 m_0 + 14n, 3 m_0 - 7n, n)` for the final
/// exceptional data of [`three_step_family`] applied to a start pencil with data
/// `(m_0)`.
pub fn family_final_data(m0: &BigUint, n: &BigUint) -> Result<ExceptionalData, SearchError> {
    check_family_preconditions(m0, n)?;
    Ok(ExceptionalData::new(vec![
        m0 * 4u32 - n * 8u32,
        BigUint::zero(),
        m0 * 3u32 + n * 14u32,
        m0 * 3u32 - n * 7u32,
        n.clone(),
    ]))
}

/// Number of valid `n` for a given `m_0`:
/// `min(floor(3 m_0 / 7), floor((m_0 - 1) / 2)) + 1`, and zero when
/// `m_0 = 0`.
pub fn family_parameter_count(m0: &BigUint) -> BigUint {
    if m0.is_zero() {
        return BigUint::zero();
    }
    let by_ratio = m0 * 3u32 / 7u32;
    let by_size = (m0 - 1u32) / 2u32;
    by_ratio.min(by_size) + 1u32
}

fn check_family_preconditions(m0: &BigUint, n: &BigUint) -> Result<(), SearchError> {
    let mut violated = Vec::new();
    if m0 * 3u32 < n * 7u32 {
        violated.push(format!("m_0 >= 7n/3 (m_0 = {m0}, 7n/3 = {}/3)", n * 7u32));
    }
    if *m0 < n * 2u32 + 1u32 {
        violated.push(format!(
            "m_0 >= 1 + 2n (m_0 = {m0}, 1 + 2n = {})",
            n * 2u32 + 1u32
        ));
    }
    if violated.is_empty() {
        Ok(())
    } else {
        Err(SearchError::FamilyPrecondition(violated.join(" and ")))
    }
}

/// A family of doubling sequences from one start pencil that all reach the
/// same blow-up count and fiber genus, with pairwise-distinct normalized
/// exceptional data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingFamily {
    /// Start pencil `(g_0, (m_0))`.
    pub start: PencilState,
    pub sequences: Vec<DoublingSequence>,
    pub shared_blowups: BigUint,
    pub shared_genus: BigUint,
    /// Final exceptional data per sequence, parallel to `sequences`.
    pub datasets: Vec<ExceptionalData>,
}

/// Search result: the family found, plus whether the requested size was
/// reached before the bounds were exhausted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub family: MatchingFamily,
    pub requested: usize,
    pub complete: bool,
}

/// Deterministic search for at least `count` doubling sequences from
/// `(g0, (m0))` with equal blow-up count and genus and pairwise-distinct
/// normalized exceptional data, using sequences of length at most `max_d`
/// with entries at most `k_bound`.
///
/// Kernel-lattice translates of the constant seed `[min(m0, k_bound); max_d]`
/// are tried first: within a fixed length, the matching conditions cut out
/// exactly one lattice coset, so walking translates enumerates every
/// equal-length solution. If the coset does not yield enough sequences, the
/// whole bounded box (all lengths up to `max_d`) is enumerated and bucketed
/// by `(blowups, genus)`, and the largest bucket wins (ties broken by the
/// smaller invariant pair). If even that falls short the best partial family
/// is returned with `complete = false` rather than failing silently.
pub fn search_matching(
    g0: &BigUint,
    m0: &BigUint,
    count: usize,
    max_d: usize,
    k_bound: &BigUint,
) -> Result<SearchOutcome, SearchError> {
    if m0.is_zero() {
        return Err(SearchError::NoBasePoints);
    }
    if count == 0 || max_d == 0 || k_bound.is_zero() {
        return Err(SearchError::EmptyBounds);
    }
    let start = PencilState::new(g0.clone(), ExceptionalData::new(vec![m0.clone()]));
    let adjunction = start.adjunction();
    if !adjunction.clean() {
        return Err(SearchError::StartNotClean(adjunction.to_string()));
    }

    let seed_entry = m0.min(k_bound).clone();
    let seed = DoublingSequence::new(vec![seed_entry; max_d]);
    let (target_blowups, target_genus) = closed_forms(g0, m0, &seed)?;

    let mut collected = FamilyCollector::new(&start);
    translate_seed(&start, &seed, k_bound, count, &mut collected);

    if collected.len() >= count {
        let family = collected.into_family(target_blowups, target_genus);
        return Ok(SearchOutcome {
            family,
            requested: count,
            complete: true,
        });
    }

    // Fallback: exhaustive enumeration of the bounded box, bucketed by the
    // shared invariants.
    let mut buckets: BTreeMap<(BigUint, BigUint), FamilyCollector> = BTreeMap::new();
    for d in 1..=max_d {
        enumerate_box(&start, d, m0, k_bound, &mut buckets);
    }
    let best_key = buckets
        .iter()
        .max_by(|(ka, a), (kb, b)| a.len().cmp(&b.len()).then_with(|| kb.cmp(ka)))
        .map(|(key, _)| key.clone());
    let (key, collector) = match best_key {
        Some(key) => {
            let collector = buckets.remove(&key).expect("bucket for best key");
            (key, collector)
        }
        None => ((target_blowups, target_genus), collected),
    };
    let complete = collector.len() >= count;
    let family = collector.into_family(key.0, key.1);
    Ok(SearchOutcome {
        family,
        requested: count,
        complete,
    })
}

/// Accumulates `(sequence, final data)` pairs with distinct normal forms.
struct FamilyCollector {
    start: PencilState,
    seen: BTreeSet<ExceptionalData>,
    members: Vec<(DoublingSequence, ExceptionalData)>,
}

impl FamilyCollector {
    fn new(start: &PencilState) -> Self {
        FamilyCollector {
            start: start.clone(),
            seen: BTreeSet::new(),
            members: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.members.len()
    }

    /// Simulates the sequence and keeps it if its normalized final data is
    /// new. Returns the simulated invariants.
    fn offer(&mut self, seq: DoublingSequence) -> (BigUint, BigUint) {
        let outcome = self
            .start
            .apply_sequence(&seq, Mode::Strict)
            .expect("candidate sequences are valid by construction");
        let blowups = outcome.blowup_count.clone();
        let genus = outcome.final_state.genus().clone();
        let normalized = outcome.final_state.data().normalize();
        if self.seen.insert(normalized) {
            self.members.push((seq, outcome.final_state.data().clone()));
        }
        (blowups, genus)
    }

    fn into_family(self, shared_blowups: BigUint, shared_genus: BigUint) -> MatchingFamily {
        let mut members = self.members;
        members.sort_by(|(a, _), (b, _)| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let (sequences, datasets) = members.into_iter().unzip();
        MatchingFamily {
            start: self.start,
            sequences,
            shared_blowups,
            shared_genus,
            datasets,
        }
    }
}

/// Enumerates the valid kernel-lattice translates of `seed`, stopping once
/// `count` distinct datasets are collected. The first `d - 2` entries of a
/// translate determine it (the staircase basis is triangular), so the walk
/// chooses a coefficient for each basis vector in turn, keeping every entry
/// within `1..=min(4*prev, k_bound)` and the first within `1..=min(m0, k_bound)`.
/// Coefficients spiral outward from zero, so the seed itself comes first.
fn translate_seed(
    start: &PencilState,
    seed: &DoublingSequence,
    k_bound: &BigUint,
    count: usize,
    collected: &mut FamilyCollector,
) {
    let d = seed.len();
    let seed_int: Vec<BigInt> = seed
        .steps()
        .iter()
        .map(|k| BigInt::from(k.clone()))
        .collect();
    let m0 = BigInt::from(start.base_points());
    let bound = BigInt::from(k_bound.clone());
    let mut coeffs: Vec<BigInt> = Vec::new();
    let mut entries: Vec<BigInt> = Vec::new();
    walk(
        &WalkContext {
            seed: &seed_int,
            m0: &m0,
            bound: &bound,
            d,
            count,
        },
        &mut coeffs,
        &mut entries,
        collected,
    );

    struct WalkContext<'a> {
        seed: &'a [BigInt],
        m0: &'a BigInt,
        bound: &'a BigInt,
        d: usize,
        count: usize,
    }

    fn entry_window(
        ctx: &WalkContext<'_>,
        position: usize,
        entries: &[BigInt],
    ) -> (BigInt, BigInt) {
        let lo = BigInt::one();
        let mut hi = ctx.bound.clone();
        if position == 0 {
            hi = hi.min(ctx.m0.clone());
        } else {
            hi = hi.min(&entries[position - 1] * 4);
        }
        (lo, hi)
    }

    /// Entry at `position` for the given staircase coefficients:
    /// `seed + sum lambda_j (e_j - 3 e_{j+1} + 2 e_{j+2})`.
    fn entry_value(ctx: &WalkContext<'_>, position: usize, coeffs: &[BigInt]) -> BigInt {
        let mut v = ctx.seed[position].clone();
        if position < coeffs.len() {
            v += &coeffs[position];
        }
        if position >= 1 && position - 1 < coeffs.len() {
            v -= &coeffs[position - 1] * 3;
        }
        if position >= 2 && position - 2 < coeffs.len() {
            v += &coeffs[position - 2] * 2;
        }
        v
    }

    fn walk(
        ctx: &WalkContext<'_>,
        coeffs: &mut Vec<BigInt>,
        entries: &mut Vec<BigInt>,
        collected: &mut FamilyCollector,
    ) {
        if collected.len() >= ctx.count {
            return;
        }
        let position = coeffs.len();
        if position == ctx.d.saturating_sub(2) {
            // Tail entries are forced; check their windows and emit.
            let mut tail = entries.clone();
            for p in position..ctx.d {
                let v = entry_value(ctx, p, coeffs);
                let (lo, hi) = entry_window(ctx, p, &tail);
                if v < lo || v > hi {
                    return;
                }
                tail.push(v);
            }
            let steps: Vec<BigUint> = tail
                .iter()
                .map(|v| v.to_biguint().expect("entries are positive"))
                .collect();
            collected.offer(DoublingSequence::new(steps));
            return;
        }
        let (lo, hi) = entry_window(ctx, position, entries);
        let base = entry_value(ctx, position, &[&coeffs[..], &[BigInt::zero()]].concat());
        // lambda ranges over [lo - base, hi - base]; spiral outward from 0.
        let lam_lo = &lo - &base;
        let lam_hi = &hi - &base;
        if lam_lo > lam_hi {
            return;
        }
        let mut order = Vec::new();
        if lam_lo <= BigInt::zero() && BigInt::zero() <= lam_hi {
            order.push(BigInt::zero());
        }
        let mut radius = BigInt::one();
        loop {
            let neg = -&radius;
            let neg_in = lam_lo <= neg && neg <= lam_hi;
            let pos_in = lam_lo <= radius && radius <= lam_hi;
            if neg_in {
                order.push(neg.clone());
            }
            if pos_in {
                order.push(radius.clone());
            }
            if !neg_in && !pos_in && neg < lam_lo && radius > lam_hi {
                break;
            }
            radius += 1;
        }
        for lam in order {
            if collected.len() >= ctx.count {
                return;
            }
            coeffs.push(lam);
            let v = entry_value(ctx, position, coeffs);
            debug_assert!(v >= lo && v <= hi);
            entries.push(v);
            walk(ctx, coeffs, entries, collected);
            entries.pop();
            coeffs.pop();
        }
    }
}

/// Exhaustively enumerates valid length-`d` sequences with entries bounded
/// by `k_bound`, bucketing them by `(blowups, genus)`.
fn enumerate_box(
    start: &PencilState,
    d: usize,
    m0: &BigUint,
    k_bound: &BigUint,
    buckets: &mut BTreeMap<(BigUint, BigUint), FamilyCollector>,
) {
    let mut prefix: Vec<BigUint> = Vec::new();
    descend(start, d, m0, k_bound, &mut prefix, buckets);

    fn descend(
        start: &PencilState,
        d: usize,
        m0: &BigUint,
        k_bound: &BigUint,
        prefix: &mut Vec<BigUint>,
        buckets: &mut BTreeMap<(BigUint, BigUint), FamilyCollector>,
    ) {
        if prefix.len() == d {
            let seq = DoublingSequence::new(prefix.clone());
            let key_probe = closed_forms(&start.genus().clone(), m0, &seq)
                .expect("enumerated sequences are valid");
            let collector = buckets
                .entry(key_probe)
                .or_insert_with(|| FamilyCollector::new(start));
            collector.offer(seq);
            return;
        }
        let cap = match prefix.last() {
            None => m0.min(k_bound).clone(),
            Some(prev) => (prev * 4u32).min(k_bound.clone()),
        };
        let mut k = BigUint::one();
        while k <= cap {
            prefix.push(k.clone());
            descend(start, d, m0, k_bound, prefix, buckets);
            prefix.pop();
            k += 1u32;
        }
    }
}

/// One verification step of [`verify_family`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Report of [`verify_family`]; every claim of the family is re-derived by
/// stepwise simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyVerification {
    pub checks: Vec<FamilyCheck>,
}

impl FamilyVerification {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for FamilyVerification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            writeln!(
                f,
                "{}: {} ({})",
                check.name,
                if check.passed { "pass" } else { "FAIL" },
                check.detail
            )?;
        }
        Ok(())
    }
}

/// Re-derives every claim of a matching family by independent stepwise
/// simulation: per-sequence validity, the shared blow-up count, the shared
/// genus, the claimed datasets, and pairwise distinctness of the normalized
/// data. Failures are collected in the report rather than raised.
pub fn verify_family(family: &MatchingFamily) -> FamilyVerification {
    let mut checks = Vec::new();
    let mut outcomes = Vec::new();
    let mut invalid = Vec::new();
    for (i, seq) in family.sequences.iter().enumerate() {
        match family.start.apply_sequence(seq, Mode::Strict) {
            Ok(outcome) => outcomes.push(Some(outcome)),
            Err(e) => {
                invalid.push(format!("sequence {i}: {e}"));
                outcomes.push(None);
            }
        }
    }
    checks.push(FamilyCheck {
        name: "sequence-validity",
        passed: invalid.is_empty(),
        detail: if invalid.is_empty() {
            format!(
                "{} sequences simulate in strict mode",
                family.sequences.len()
            )
        } else {
            invalid.join("; ")
        },
    });

    let mut report_match = |name: &'static str, mismatches: Vec<String>, ok_detail: String| {
        checks.push(FamilyCheck {
            name,
            passed: mismatches.is_empty(),
            detail: if mismatches.is_empty() {
                ok_detail
            } else {
                mismatches.join("; ")
            },
        });
    };

    let mut blowup_mismatch = Vec::new();
    let mut genus_mismatch = Vec::new();
    let mut data_mismatch = Vec::new();
    for (i, outcome) in outcomes.iter().enumerate() {
        let Some(outcome) = outcome else { continue };
        if outcome.blowup_count != family.shared_blowups {
            blowup_mismatch.push(format!(
                "sequence {i} gives {} blow-ups, family claims {}",
                outcome.blowup_count, family.shared_blowups
            ));
        }
        if *outcome.final_state.genus() != family.shared_genus {
            genus_mismatch.push(format!(
                "sequence {i} gives genus {}, family claims {}",
                outcome.final_state.genus(),
                family.shared_genus
            ));
        }
        match family.datasets.get(i) {
            Some(claimed) if claimed == outcome.final_state.data() => {}
            Some(claimed) => data_mismatch.push(format!(
                "sequence {i} gives data {}, family claims {}",
                outcome.final_state.data(),
                claimed
            )),
            None => data_mismatch.push(format!("sequence {i} has no claimed dataset")),
        }
    }
    report_match(
        "blowup-count-match",
        blowup_mismatch,
        format!("all equal {}", family.shared_blowups),
    );
    report_match(
        "genus-match",
        genus_mismatch,
        format!("all equal {}", family.shared_genus),
    );
    report_match(
        "dataset-match",
        data_mismatch,
        "claimed datasets agree with simulation".to_string(),
    );

    let mut collisions = Vec::new();
    let mut seen: BTreeMap<ExceptionalData, usize> = BTreeMap::new();
    for (i, outcome) in outcomes.iter().enumerate() {
        let Some(outcome) = outcome else { continue };
        let normalized = outcome.final_state.data().normalize();
        if let Some(&j) = seen.get(&normalized) {
            collisions.push(format!(
                "sequences {j} and {i} share normalized data {normalized}"
            ));
        } else {
            seen.insert(normalized, i);
        }
    }
    report_match(
        "datasets-distinct",
        collisions,
        "normalized datasets are pairwise distinct".to_string(),
    );

    FamilyVerification { checks }
}
