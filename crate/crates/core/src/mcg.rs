//! Positive Dehn-twist words through their action on first homology.
//!
//! A twist along a simple loop `a` acts on `H_1` of the closed genus-`g`
//! surface as the symplectic transvection `x -> x + <x, a> a`, where `< , >`
//! is the intersection pairing with `<e_i, e_{g+i}> = +1` in the standard
//! basis. Words of twists are tracked at this homology level only: products,
//! Hurwitz moves, global and partial conjugations, and the fingerprints all
//! factor through it. Any equivalence verdict derived here is therefore a
//! statement about homological shadows, necessary but not sufficient for the
//! corresponding mapping classes.
//!
//! Conventions, fixed project-wide:
//!
//! * homology classes are column vectors; matrices act from the left;
//! * the product of a word is the matrix product of its letters in word
//!   order, `M_1 M_2 ... M_r`;
//! * conjugation satisfies `T_{phi(a)} = phi T_a phi^{-1}`, so the right
//!   Hurwitz move sends `(x_i, x_{i+1})` to
//!   `(x_{i+1}, x_{i+1}^{-1} x_i x_{i+1})` and the class of the new second
//!   letter is the image of `a_i` under the *inverse* transvection of
//!   `a_{i+1}`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::Range;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum McgError {
    #[error("homology class needs an even number of coordinates, got {len}")]
    OddLength { len: usize },
    #[error("coordinate length mismatch: expected {expected}, got {found}{}",
        letter.map(|i| format!(" (letter {i})")).unwrap_or_default())]
    ClassLengthMismatch {
        expected: usize,
        found: usize,
        letter: Option<usize>,
    },
    #[error("matrix dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix does not preserve the symplectic pairing")]
    NotSymplectic,
    #[error("letter index {index} out of range for a word of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid letter range {start}..{end} for a word of length {len}")]
    InvalidRange {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("stabilizer direction must be a nonzero class")]
    ZeroStabilizerDirection,
    #[error("subword does not stabilize the conjugation direction: computed {found}")]
    StabilizerNotUntwisted { found: StabilizerType },
    #[error("conjugation power q must be nonzero")]
    ZeroConjugationPower,
    #[error("orbit cap must be at least 1")]
    ZeroOrbitCap,
}

/// Integer homology class in the basis `e_1, ..., e_{2g}` with
/// `<e_i, e_{g+i}> = +1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HomologyClass {
    coords: Vec<BigInt>,
}

impl HomologyClass {
    pub fn new(coords: Vec<BigInt>) -> Result<Self, McgError> {
        if !coords.len().is_multiple_of(2) {
            return Err(McgError::OddLength { len: coords.len() });
        }
        Ok(HomologyClass { coords })
    }

    pub fn from_i64s(coords: &[i64]) -> Result<Self, McgError> {
        Self::new(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(genus: usize) -> Self {
        HomologyClass {
            coords: vec![BigInt::zero(); 2 * genus],
        }
    }

    /// Basis vector `e_index`, 1-based, for `1 <= index <= 2g`.
    pub fn basis(genus: usize, index: usize) -> Self {
        assert!(index >= 1 && index <= 2 * genus, "basis index out of range");
        let mut coords = vec![BigInt::zero(); 2 * genus];
        coords[index - 1] = BigInt::one();
        HomologyClass { coords }
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn genus(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn negated(&self) -> Self {
        HomologyClass {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    /// Canonical representative of `{c, -c}`: the first nonzero coordinate
    /// made positive. Twists along `c` and `-c` agree, so classes compare
    /// through this form.
    pub fn sign_normalized(&self) -> Self {
        match self.coords.iter().find(|c| !c.is_zero()) {
            Some(first) if first.is_negative() => self.negated(),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for HomologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Intersection pairing `x^T J y` with `J = [[0, I], [-I, 0]]`.
pub fn intersection_pairing(x: &HomologyClass, y: &HomologyClass) -> Result<BigInt, McgError> {
    if x.coords.len() != y.coords.len() {
        return Err(McgError::ClassLengthMismatch {
            expected: x.coords.len(),
            found: y.coords.len(),
            letter: None,
        });
    }
    let g = x.genus();
    let mut sum = BigInt::zero();
    for i in 0..g {
        sum += &x.coords[i] * &y.coords[g + i] - &x.coords[g + i] * &y.coords[i];
    }
    Ok(sum)
}

/// A `2g x 2g` integer matrix preserving the standard symplectic pairing,
/// `M^T J M = J`. These are the homological shadows of mapping classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpElement {
    dim: usize,
    entries: Vec<BigInt>, // row-major
}

impl SpElement {
    /// Validating constructor; rejects non-square and non-symplectic input.
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self, McgError> {
        let dim = rows.len();
        if !dim.is_multiple_of(2) {
            return Err(McgError::OddLength { len: dim });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(McgError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        let m = SpElement { dim, entries };
        if !m.is_symplectic() {
            return Err(McgError::NotSymplectic);
        }
        Ok(m)
    }

    pub fn identity(genus: usize) -> Self {
        let dim = 2 * genus;
        let mut entries = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = BigInt::one();
        }
        SpElement { dim, entries }
    }

    fn standard_j(genus: usize) -> Self {
        let dim = 2 * genus;
        let mut entries = vec![BigInt::zero(); dim * dim];
        for i in 0..genus {
            entries[i * dim + genus + i] = BigInt::one();
            entries[(genus + i) * dim + i] = -BigInt::one();
        }
        SpElement { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn genus(&self) -> usize {
        self.dim / 2
    }

    pub fn entry(&self, row: usize, col: usize) -> &BigInt {
        &self.entries[row * self.dim + col]
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.dim)
            .map(|r| self.entries[r * self.dim..(r + 1) * self.dim].to_vec())
            .collect()
    }

    pub fn mul(&self, other: &SpElement) -> Result<SpElement, McgError> {
        if self.dim != other.dim {
            return Err(McgError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let dim = self.dim;
        let mut entries = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            for k in 0..dim {
                let a = self.entry(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..dim {
                    let b = other.entry(k, j);
                    if !b.is_zero() {
                        entries[i * dim + j] += a * b;
                    }
                }
            }
        }
        Ok(SpElement { dim, entries })
    }

    fn transpose(&self) -> SpElement {
        let dim = self.dim;
        let mut entries = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                entries[j * dim + i] = self.entry(i, j).clone();
            }
        }
        SpElement { dim, entries }
    }

    fn negate(&self) -> SpElement {
        SpElement {
            dim: self.dim,
            entries: self.entries.iter().map(|e| -e).collect(),
        }
    }

    /// Exact inverse `-J M^T J`, valid for symplectic matrices.
    pub fn inverse(&self) -> SpElement {
        let j = SpElement::standard_j(self.genus());
        let inv = j
            .mul(&self.transpose())
            .and_then(|m| m.mul(&j))
            .expect("dimensions agree")
            .negate();
        debug_assert!(self.mul(&inv).unwrap().is_identity());
        inv
    }

    pub fn pow(&self, e: u64) -> SpElement {
        let mut acc = SpElement::identity(self.genus());
        for _ in 0..e {
            acc = acc.mul(self).expect("dimensions agree");
        }
        acc
    }

    pub fn apply(&self, x: &HomologyClass) -> Result<HomologyClass, McgError> {
        if x.coords.len() != self.dim {
            return Err(McgError::ClassLengthMismatch {
                expected: self.dim,
                found: x.coords.len(),
                letter: None,
            });
        }
        let mut coords = vec![BigInt::zero(); self.dim];
        for (i, out) in coords.iter_mut().enumerate() {
            for j in 0..self.dim {
                let e = self.entry(i, j);
                if !e.is_zero() {
                    *out += e * &x.coords[j];
                }
            }
        }
        Ok(HomologyClass { coords })
    }

    pub fn is_identity(&self) -> bool {
        *self == SpElement::identity(self.genus())
    }

    pub fn is_symplectic(&self) -> bool {
        let j = SpElement::standard_j(self.genus());
        match self.transpose().mul(&j).and_then(|m| m.mul(self)) {
            Ok(product) => product == j,
            Err(_) => false,
        }
    }
}

impl fmt::Display for SpElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.dim {
            write!(f, "[")?;
            for c in 0..self.dim {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.entry(r, c))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// The `q`-th power of the transvection along `a`:
/// `x -> x + q <x, a> a`, i.e. `I + q * a (Ja)^T`. The outer factor squares
/// to zero, so this closed form is exact for every integer `q`.
pub fn transvection_power(a: &HomologyClass, q: &BigInt) -> SpElement {
    let dim = a.coords.len();
    let g = a.genus();
    // (Ja)_j, with J = [[0, I], [-I, 0]].
    let ja: Vec<BigInt> = (0..dim)
        .map(|j| {
            if j < g {
                a.coords[g + j].clone()
            } else {
                -a.coords[j - g].clone()
            }
        })
        .collect();
    let mut m = SpElement::identity(g);
    for i in 0..dim {
        if a.coords[i].is_zero() {
            continue;
        }
        for j in 0..dim {
            if !ja[j].is_zero() {
                m.entries[i * dim + j] += q * &a.coords[i] * &ja[j];
            }
        }
    }
    m
}

/// Homological action of the positive Dehn twist along `a`.
pub fn transvection(a: &HomologyClass) -> SpElement {
    transvection_power(a, &BigInt::one())
}

/// A letter of a positive factorization: a twist recorded by the homology
/// class of its curve. The class is zero exactly for separating or
/// boundary-parallel curves, which are homologically invisible and act as
/// the identity here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistLetter {
    class: HomologyClass,
    label: Option<String>,
}

impl TwistLetter {
    pub fn new(class: HomologyClass) -> Self {
        TwistLetter { class, label: None }
    }

    pub fn with_label(class: HomologyClass, label: impl Into<String>) -> Self {
        TwistLetter {
            class,
            label: Some(label.into()),
        }
    }

    pub fn class(&self) -> &HomologyClass {
        &self.class
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn is_separating(&self) -> bool {
        self.class.is_zero()
    }

    pub fn matrix(&self) -> SpElement {
        transvection(&self.class)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveDirection {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilizerType {
    Fixes,
    Reverses,
    Neither,
}

impl fmt::Display for StabilizerType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilizerType::Fixes => write!(f, "fixes"),
            StabilizerType::Reverses => write!(f, "reverses"),
            StabilizerType::Neither => write!(f, "neither"),
        }
    }
}

/// Stabilizer requirement for a partial conjugation.
///
/// `Untwisted` insists the subword fixes the conjugating class,
/// `AllowTwisted` also accepts a subword that reverses it (both cases
/// preserve the total product), and `Unchecked` skips the requirement
/// entirely, in which case the product may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConjugationPolicy {
    #[default]
    Untwisted,
    AllowTwisted,
    Unchecked,
}

/// An ordered word of positive Dehn-twist letters on a genus-`g` surface
/// with `m` boundary components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    genus: usize,
    boundary_count: usize,
    letters: Vec<TwistLetter>,
}

impl Factorization {
    pub fn new(
        genus: usize,
        boundary_count: usize,
        letters: Vec<TwistLetter>,
    ) -> Result<Self, McgError> {
        for (i, letter) in letters.iter().enumerate() {
            if letter.class.coords.len() != 2 * genus {
                return Err(McgError::ClassLengthMismatch {
                    expected: 2 * genus,
                    found: letter.class.coords.len(),
                    letter: Some(i),
                });
            }
        }
        Ok(Factorization {
            genus,
            boundary_count,
            letters,
        })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary_count
    }

    pub fn letters(&self) -> &[TwistLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Product of the letter transvections in word order,
    /// `M_1 M_2 ... M_r`; the empty word gives the identity.
    pub fn word_product(&self) -> SpElement {
        self.subword_product(0..self.letters.len())
            .expect("full range is valid")
    }

    /// Product of the letters in `range`, in word order.
    pub fn subword_product(&self, range: Range<usize>) -> Result<SpElement, McgError> {
        if range.start > range.end || range.end > self.letters.len() {
            return Err(McgError::InvalidRange {
                start: range.start,
                end: range.end,
                len: self.letters.len(),
            });
        }
        let mut acc = SpElement::identity(self.genus);
        for letter in &self.letters[range] {
            acc = acc.mul(&letter.matrix())?;
        }
        Ok(acc)
    }

    /// Elementary Hurwitz move on the adjacent pair `(i, i+1)`, 0-based.
    /// The right move trades `(x_i, x_{i+1})` for
    /// `(x_{i+1}, x_{i+1}^{-1} x_i x_{i+1})`; the left move is its inverse.
    /// Word length and word product are preserved exactly.
    pub fn hurwitz_move(
        &self,
        i: usize,
        direction: MoveDirection,
    ) -> Result<Factorization, McgError> {
        if i + 1 >= self.letters.len() {
            return Err(McgError::IndexOutOfRange {
                index: i,
                len: self.letters.len(),
            });
        }
        let mut letters = self.letters.clone();
        let first = letters[i].clone();
        let second = letters[i + 1].clone();
        match direction {
            MoveDirection::Right => {
                let conjugated = transvection(&second.class).inverse().apply(&first.class)?;
                letters[i] = second;
                letters[i + 1] = TwistLetter {
                    class: conjugated,
                    label: first.label,
                };
            }
            MoveDirection::Left => {
                let conjugated = transvection(&first.class).apply(&second.class)?;
                letters[i] = TwistLetter {
                    class: conjugated,
                    label: second.label,
                };
                letters[i + 1] = first;
            }
        }
        Ok(Factorization {
            letters,
            ..self.clone()
        })
    }

    /// Replaces every letter class `a_i` by `phi(a_i)`; the word product is
    /// conjugated to `phi P phi^{-1}`.
    pub fn global_conjugate(&self, phi: &SpElement) -> Result<Factorization, McgError> {
        if phi.dim() != 2 * self.genus {
            return Err(McgError::DimensionMismatch {
                expected: 2 * self.genus,
                found: phi.dim(),
            });
        }
        let letters = self
            .letters
            .iter()
            .map(|l| {
                Ok(TwistLetter {
                    class: phi.apply(&l.class)?,
                    label: l.label.clone(),
                })
            })
            .collect::<Result<Vec<_>, McgError>>()?;
        Ok(Factorization {
            letters,
            ..self.clone()
        })
    }

    /// Whether the subword product fixes `alpha`, sends it to `-alpha`, or
    /// neither. This is the homology-level proxy for a subword stabilizing a
    /// loop: a mapping class fixing the loop certainly fixes its class, but
    /// not conversely.
    pub fn stabilizer_type(
        &self,
        range: Range<usize>,
        alpha: &HomologyClass,
    ) -> Result<StabilizerType, McgError> {
        if range.is_empty() {
            return Err(McgError::InvalidRange {
                start: range.start,
                end: range.end,
                len: self.letters.len(),
            });
        }
        if alpha.is_zero() {
            return Err(McgError::ZeroStabilizerDirection);
        }
        let product = self.subword_product(range)?;
        let image = product.apply(alpha)?;
        if image == *alpha {
            Ok(StabilizerType::Fixes)
        } else if image == alpha.negated() {
            Ok(StabilizerType::Reverses)
        } else {
            Ok(StabilizerType::Neither)
        }
    }

    /// Partial conjugation: letters in `range` have their classes pushed
    /// through the `q`-th power of the `alpha`-transvection. Under
    /// [`ConjugationPolicy::Untwisted`] the subword must fix `alpha` (and
    /// with [`ConjugationPolicy::AllowTwisted`], reversing it is also
    /// accepted); in both cases the twist along `alpha` commutes with the
    /// subword product, so the total word product is unchanged.
    pub fn partial_conjugate(
        &self,
        range: Range<usize>,
        alpha: &HomologyClass,
        q: &BigInt,
        policy: ConjugationPolicy,
    ) -> Result<Factorization, McgError> {
        if q.is_zero() {
            return Err(McgError::ZeroConjugationPower);
        }
        let stabilizer = self.stabilizer_type(range.clone(), alpha)?;
        let allowed = match policy {
            ConjugationPolicy::Untwisted => stabilizer == StabilizerType::Fixes,
            ConjugationPolicy::AllowTwisted => stabilizer != StabilizerType::Neither,
            ConjugationPolicy::Unchecked => true,
        };
        if !allowed {
            return Err(McgError::StabilizerNotUntwisted { found: stabilizer });
        }
        let conjugator = transvection_power(alpha, q);
        let mut letters = self.letters.clone();
        for letter in &mut letters[range] {
            letter.class = conjugator.apply(&letter.class)?;
        }
        Ok(Factorization {
            letters,
            ..self.clone()
        })
    }

    /// Necessary homological condition for the word to factor the boundary
    /// multitwist: boundary twists act trivially on the homology of the
    /// closed surface, so the word product must be the identity. This is
    /// necessary, not sufficient.
    pub fn boundary_relation_holds(&self) -> bool {
        self.word_product().is_identity()
    }

    /// Sign-normalized letter-class encoding; two words are the same up to
    /// reorienting their twist curves exactly when their keys agree. Used
    /// for deterministic deduplication and ordering of words.
    pub fn canonical_key(&self) -> Vec<Vec<BigInt>> {
        self.letters
            .iter()
            .map(|l| l.class.sign_normalized().coords)
            .collect()
    }

    /// Rank over the rationals of the integer span of the letter classes.
    /// Unchanged by Hurwitz moves (a move replaces a class within the span
    /// of the pair it touches) and by global conjugation (the span is
    /// carried to its image).
    pub fn letter_span_rank(&self) -> usize {
        let nonzero: Vec<HomologyClass> = self
            .letters
            .iter()
            .filter(|l| !l.class.is_zero())
            .map(|l| l.class.clone())
            .collect();
        integer_span_rank(&nonzero)
    }

    /// Invariants of the collection of letter classes: the rank of their
    /// integer span, the multiset of classes up to sign, and the size of the
    /// orbit of the (nonzero, sign-normalized) classes under the subgroup
    /// generated by the letter transvections, truncated at `orbit_cap`.
    ///
    /// The rank and the generated subgroup are unchanged by Hurwitz moves,
    /// and the rank also survives global conjugation.
    pub fn monodromy_fingerprint(
        &self,
        orbit_cap: usize,
    ) -> Result<MonodromyFingerprint, McgError> {
        if orbit_cap == 0 {
            return Err(McgError::ZeroOrbitCap);
        }
        let mut classes: Vec<HomologyClass> = self
            .letters
            .iter()
            .map(|l| l.class.sign_normalized())
            .collect();
        classes.sort();
        let mut classes_up_to_sign: Vec<(HomologyClass, usize)> = Vec::new();
        for class in classes {
            match classes_up_to_sign.last_mut() {
                Some((c, count)) if *c == class => *count += 1,
                _ => classes_up_to_sign.push((class, 1)),
            }
        }

        let nonzero: Vec<HomologyClass> = classes_up_to_sign
            .iter()
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, _)| c.clone())
            .collect();
        let span_rank = self.letter_span_rank();

        let mut generators = Vec::new();
        for class in &nonzero {
            let t = transvection(class);
            let inv = t.inverse();
            generators.push(t);
            generators.push(inv);
        }
        let mut visited: BTreeSet<HomologyClass> = BTreeSet::new();
        let mut queue: VecDeque<HomologyClass> = VecDeque::new();
        let mut truncated = false;
        for class in &nonzero {
            if visited.contains(class) {
                continue;
            }
            if visited.len() >= orbit_cap {
                truncated = true;
                break;
            }
            visited.insert(class.clone());
            queue.push_back(class.clone());
        }
        'bfs: while let Some(current) = queue.pop_front() {
            for generator in &generators {
                let image = generator.apply(&current)?.sign_normalized();
                if !visited.contains(&image) {
                    if visited.len() >= orbit_cap {
                        truncated = true;
                        break 'bfs;
                    }
                    visited.insert(image.clone());
                    queue.push_back(image);
                }
            }
        }

        Ok(MonodromyFingerprint {
            span_rank,
            classes_up_to_sign,
            orbit_size: visited.len(),
            orbit_truncated: truncated,
        })
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "genus {}, {} boundary components, word of length {}",
            self.genus,
            self.boundary_count,
            self.letters.len()
        )
    }
}

/// Fingerprint of the collection of twists in a factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonodromyFingerprint {
    pub span_rank: usize,
    /// Sorted multiset of sign-normalized letter classes with multiplicity.
    pub classes_up_to_sign: Vec<(HomologyClass, usize)>,
    pub orbit_size: usize,
    pub orbit_truncated: bool,
}

/// Rank over the rationals of the span of the given integer vectors,
/// computed by fraction-free elimination.
fn integer_span_rank(vectors: &[HomologyClass]) -> usize {
    let mut rows: Vec<Vec<BigInt>> = vectors
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| v.coords.to_vec())
        .collect();
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut rank = 0;
    let mut col = 0;
    while rank < rows.len() && col < cols {
        let pivot = (rank..rows.len()).find(|&r| !rows[r][col].is_zero());
        let Some(pivot) = pivot else {
            col += 1;
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_value = rows[rank][col].clone();
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].clone();
            for c in col..cols {
                let scaled = &rows[r][c] * &pivot_value - &rows[rank][c] * &factor;
                rows[r][c] = scaled;
            }
        }
        rank += 1;
        col += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(genus: usize, index: usize) -> HomologyClass {
        HomologyClass::basis(genus, index)
    }

    fn cls(coords: &[i64]) -> HomologyClass {
        HomologyClass::from_i64s(coords).unwrap()
    }

    fn word(genus: usize, classes: &[HomologyClass]) -> Factorization {
        Factorization::new(
            genus,
            0,
            classes.iter().cloned().map(TwistLetter::new).collect(),
        )
        .unwrap()
    }

    /// The 12-letter genus-1 word alternating twists along e1 and e2.
    fn elliptic_word(copies: usize) -> Factorization {
        let mut classes = Vec::new();
        for _ in 0..copies {
            classes.push(e(1, 1));
            classes.push(e(1, 2));
        }
        word(1, &classes)
    }

    #[test]
    fn pairing_basis_conventions() {
        assert_eq!(
            intersection_pairing(&e(2, 1), &e(2, 3)).unwrap(),
            BigInt::from(1)
        );
        assert_eq!(
            intersection_pairing(&e(2, 1), &e(2, 1)).unwrap(),
            BigInt::zero()
        );
        assert_eq!(
            intersection_pairing(&e(2, 3), &e(2, 1)).unwrap(),
            BigInt::from(-1)
        );
        assert!(intersection_pairing(&e(2, 1), &e(1, 1)).is_err());
    }

    #[test]
    fn transvection_matrices() {
        let t1 = transvection(&e(1, 1));
        assert_eq!(
            t1.rows(),
            vec![
                vec![BigInt::from(1), BigInt::from(-1)],
                vec![BigInt::from(0), BigInt::from(1)],
            ]
        );
        // e2 -> e2 - e1, e1 -> e1.
        assert_eq!(t1.apply(&e(1, 2)).unwrap(), cls(&[-1, 1]));
        assert_eq!(t1.apply(&e(1, 1)).unwrap(), e(1, 1));
        // a = e2 sends e1 to e1 + e2.
        assert_eq!(
            transvection(&e(1, 2)).apply(&e(1, 1)).unwrap(),
            cls(&[1, 1])
        );
        // Zero class acts as the identity.
        assert!(transvection(&HomologyClass::zero(2)).is_identity());
    }

    #[test]
    fn transvection_power_matches_repeated_multiplication() {
        let a = cls(&[2, -1, 3, 1]);
        let t = transvection(&a);
        assert_eq!(transvection_power(&a, &BigInt::from(3)), t.pow(3));
        assert_eq!(
            transvection_power(&a, &BigInt::from(-2)),
            t.inverse().pow(2)
        );
    }

    #[test]
    fn word_product_empty_is_identity() {
        assert!(word(1, &[]).word_product().is_identity());
    }

    #[test]
    fn word_product_elliptic_element() {
        let p = word(1, &[e(1, 1), e(1, 2)]).word_product();
        let trace = p.entry(0, 0) + p.entry(1, 1);
        assert_eq!(trace, BigInt::one());
        assert_eq!(p.pow(3), SpElement::identity(1).negate());
        assert!(p.pow(6).is_identity());
        assert!(!p.pow(3).is_identity());
    }

    #[test]
    fn hurwitz_move_example() {
        let w = word(1, &[e(1, 1), e(1, 2)]);
        let moved = w.hurwitz_move(0, MoveDirection::Right).unwrap();
        assert_eq!(moved.letters()[0].class(), &e(1, 2));
        assert_eq!(moved.letters()[1].class(), &cls(&[1, -1]));
        assert_eq!(moved.word_product(), w.word_product());
        let back = moved.hurwitz_move(0, MoveDirection::Left).unwrap();
        assert_eq!(back, w);
        assert!(w.hurwitz_move(1, MoveDirection::Right).is_err());
    }

    #[test]
    fn hurwitz_move_commuting_pair_is_swap() {
        // <e1, e2> = 0 at genus 2.
        let w = word(2, &[e(2, 1), e(2, 2)]);
        let moved = w.hurwitz_move(0, MoveDirection::Right).unwrap();
        assert_eq!(moved.letters()[0].class(), &e(2, 2));
        assert_eq!(moved.letters()[1].class(), &e(2, 1));
    }

    #[test]
    fn global_conjugate_example() {
        let w = word(1, &[e(1, 2)]);
        let phi = transvection(&e(1, 1));
        let conjugated = w.global_conjugate(&phi).unwrap();
        assert_eq!(conjugated.letters()[0].class(), &cls(&[-1, 1]));

        let identity = SpElement::identity(1);
        assert_eq!(w.global_conjugate(&identity).unwrap(), w);
    }

    #[test]
    fn stabilizer_types() {
        let w = word(1, &[e(1, 1)]);
        assert_eq!(
            w.stabilizer_type(0..1, &e(1, 1)).unwrap(),
            StabilizerType::Fixes
        );
        assert_eq!(
            w.stabilizer_type(0..1, &e(1, 2)).unwrap(),
            StabilizerType::Neither
        );

        let half = elliptic_word(3);
        assert_eq!(
            half.stabilizer_type(0..6, &cls(&[2, 5])).unwrap(),
            StabilizerType::Reverses
        );

        assert!(matches!(
            w.stabilizer_type(0..1, &HomologyClass::zero(1)),
            Err(McgError::ZeroStabilizerDirection)
        ));
        assert!(w.stabilizer_type(0..0, &e(1, 1)).is_err());
    }

    #[test]
    fn partial_conjugate_fixed_class_is_noop() {
        let w = word(1, &[e(1, 1)]);
        let conjugated = w
            .partial_conjugate(
                0..1,
                &e(1, 1),
                &BigInt::from(5),
                ConjugationPolicy::Untwisted,
            )
            .unwrap();
        assert_eq!(conjugated, w);
    }

    #[test]
    fn partial_conjugate_whole_identity_word() {
        let w = elliptic_word(6);
        let conjugated = w
            .partial_conjugate(
                0..12,
                &e(1, 2),
                &BigInt::one(),
                ConjugationPolicy::Untwisted,
            )
            .unwrap();
        assert_ne!(conjugated, w);
        assert!(conjugated.word_product().is_identity());
    }

    #[test]
    fn partial_conjugate_strictness() {
        let w = word(1, &[e(1, 1)]);
        let err = w
            .partial_conjugate(0..1, &e(1, 2), &BigInt::one(), ConjugationPolicy::Untwisted)
            .unwrap_err();
        assert_eq!(
            err,
            McgError::StabilizerNotUntwisted {
                found: StabilizerType::Neither
            }
        );

        // Reversing subword: allowed only with the twisted flag.
        let half = elliptic_word(3);
        assert!(half
            .partial_conjugate(0..6, &e(1, 1), &BigInt::one(), ConjugationPolicy::Untwisted)
            .is_err());
        let twisted = half
            .partial_conjugate(
                0..6,
                &e(1, 1),
                &BigInt::one(),
                ConjugationPolicy::AllowTwisted,
            )
            .unwrap();
        // The twist along alpha still commutes with the subword product, so
        // the total product is preserved.
        assert_eq!(twisted.word_product(), half.word_product());

        assert!(matches!(
            w.partial_conjugate(
                0..1,
                &e(1, 1),
                &BigInt::zero(),
                ConjugationPolicy::Untwisted
            ),
            Err(McgError::ZeroConjugationPower)
        ));
    }

    #[test]
    fn boundary_relation_examples() {
        assert!(elliptic_word(6).boundary_relation_holds());
        assert!(!word(1, &[e(1, 1)]).boundary_relation_holds());
        assert!(word(1, &[]).boundary_relation_holds());
    }

    #[test]
    fn separating_letters_act_trivially() {
        let zero = HomologyClass::zero(1);
        let mut letters = vec![TwistLetter::with_label(zero.clone(), "sep")];
        letters.push(TwistLetter::new(e(1, 1)));
        let w = Factorization::new(1, 0, letters).unwrap();
        assert_eq!(w.word_product(), transvection(&e(1, 1)));
        // Hurwitz move across the separating letter is a plain swap.
        let moved = w.hurwitz_move(0, MoveDirection::Right).unwrap();
        assert_eq!(moved.letters()[0].class(), &e(1, 1));
        assert_eq!(moved.letters()[1].class(), &zero);
        assert_eq!(moved.letters()[1].label(), Some("sep"));
        // Conjugation leaves the zero class alone.
        let conjugated = w.global_conjugate(&transvection(&e(1, 2))).unwrap();
        assert!(conjugated.letters()[0].class().is_zero());
    }

    #[test]
    fn fingerprint_examples() {
        let single = word(1, &[e(1, 1)]);
        let fp = single.monodromy_fingerprint(10).unwrap();
        assert_eq!(fp.span_rank, 1);
        assert_eq!(fp.orbit_size, 1);
        assert!(!fp.orbit_truncated);
        assert_eq!(fp.classes_up_to_sign, vec![(e(1, 1), 1)]);

        let pair = word(1, &[e(1, 1), e(1, 2)]);
        let fp = pair.monodromy_fingerprint(50).unwrap();
        assert_eq!(fp.span_rank, 2);
        assert!(fp.orbit_truncated || fp.orbit_size >= 3);

        assert!(single.monodromy_fingerprint(0).is_err());
    }

    #[test]
    fn fingerprint_counts_multiplicity_and_signs() {
        let w = word(1, &[e(1, 1), cls(&[-1, 0]), e(1, 2)]);
        let fp = w.monodromy_fingerprint(5).unwrap();
        assert_eq!(fp.classes_up_to_sign, vec![(e(1, 2), 1), (e(1, 1), 2)]);
        assert_eq!(fp.span_rank, 2);
    }

    #[test]
    fn factorization_rejects_mismatched_letters() {
        let letters = vec![TwistLetter::new(e(2, 1)), TwistLetter::new(e(1, 1))];
        let err = Factorization::new(2, 0, letters).unwrap_err();
        assert_eq!(
            err,
            McgError::ClassLengthMismatch {
                expected: 4,
                found: 2,
                letter: Some(1)
            }
        );
    }

    /// Elements of the subgroup generated by `gens`, by breadth-first
    /// closure under the generators and their inverses, capped.
    fn subgroup_closure(gens: &[SpElement], cap: usize) -> BTreeSet<SpElement> {
        let genus = gens[0].genus();
        let mut all: Vec<SpElement> = gens.to_vec();
        all.extend(gens.iter().map(SpElement::inverse));
        let mut visited = BTreeSet::new();
        let mut queue = VecDeque::new();
        visited.insert(SpElement::identity(genus));
        queue.push_back(SpElement::identity(genus));
        while let Some(current) = queue.pop_front() {
            for g in &all {
                let next = current.mul(g).unwrap();
                if visited.len() >= cap {
                    return visited;
                }
                if visited.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        visited
    }

    #[test]
    fn hurwitz_moves_preserve_the_generated_subgroup() {
        // Bounded both-ways membership: every generator on one side lies in
        // the capped closure of the other side, which pins down subgroup
        // equality without enumerating the (infinite) subgroups.
        let words = [
            word(1, &[e(1, 1), e(1, 2)]),
            word(2, &[e(2, 1), e(2, 3), cls(&[1, 0, 1, 0])]),
        ];
        for w in words {
            for i in 0..w.len() - 1 {
                for direction in [MoveDirection::Right, MoveDirection::Left] {
                    let moved = w.hurwitz_move(i, direction).unwrap();
                    let old_gens: Vec<SpElement> =
                        w.letters().iter().map(TwistLetter::matrix).collect();
                    let new_gens: Vec<SpElement> =
                        moved.letters().iter().map(TwistLetter::matrix).collect();
                    let old_closure = subgroup_closure(&old_gens, 3000);
                    let new_closure = subgroup_closure(&new_gens, 3000);
                    assert!(new_gens.iter().all(|g| old_closure.contains(g)));
                    assert!(old_gens.iter().all(|g| new_closure.contains(g)));
                }
            }
        }
    }

    fn arb_class(genus: usize) -> impl Strategy<Value = HomologyClass> {
        proptest::collection::vec(-2i64..=2, 2 * genus).prop_filter_map("nonzero class", |coords| {
            let class = HomologyClass::from_i64s(&coords).unwrap();
            (!class.is_zero()).then_some(class)
        })
    }

    fn arb_word() -> impl Strategy<Value = Factorization> {
        (1usize..=3).prop_flat_map(|genus| {
            proptest::collection::vec(arb_class(genus), 1..=6)
                .prop_map(move |classes| word(genus, &classes))
        })
    }

    proptest! {
        #[test]
        fn products_are_symplectic(w in arb_word()) {
            prop_assert!(w.word_product().is_symplectic());
            for letter in w.letters() {
                prop_assert!(letter.matrix().is_symplectic());
                prop_assert_eq!(letter.matrix().apply(letter.class()).unwrap(), letter.class().clone());
            }
        }

        #[test]
        fn hurwitz_moves_preserve_product_and_invert(w in arb_word(), idx in 0usize..5) {
            if w.len() >= 2 {
                let i = idx % (w.len() - 1);
                let product = w.word_product();
                for direction in [MoveDirection::Right, MoveDirection::Left] {
                    let moved = w.hurwitz_move(i, direction).unwrap();
                    prop_assert_eq!(moved.len(), w.len());
                    prop_assert_eq!(moved.word_product(), product.clone());
                    let inverse = match direction {
                        MoveDirection::Right => MoveDirection::Left,
                        MoveDirection::Left => MoveDirection::Right,
                    };
                    prop_assert_eq!(moved.hurwitz_move(i, inverse).unwrap(), w.clone());
                }
            }
        }

        #[test]
        fn global_conjugation_conjugates_product(w in arb_word(), c in arb_class(3)) {
            let phi = transvection(&HomologyClass::new(c.coords()[..2 * w.genus()].to_vec()).unwrap());
            prop_assume!(!phi.is_identity() || true);
            let conjugated = w.global_conjugate(&phi).unwrap();
            let expected = phi
                .mul(&w.word_product())
                .unwrap()
                .mul(&phi.inverse())
                .unwrap();
            prop_assert_eq!(conjugated.word_product(), expected);
        }

        #[test]
        fn generated_subgroup_survives_hurwitz_moves(w in arb_word(), moves in proptest::collection::vec((0usize..8, proptest::bool::ANY), 0..6)) {
            // Rank and capped orbit size are move-invariant.
            prop_assume!(w.len() >= 2);
            let fp = w.monodromy_fingerprint(40).unwrap();
            let mut current = w.clone();
            for (raw, right) in moves {
                let i = raw % (current.len() - 1);
                let direction = if right { MoveDirection::Right } else { MoveDirection::Left };
                current = current.hurwitz_move(i, direction).unwrap();
            }
            let moved_fp = current.monodromy_fingerprint(40).unwrap();
            prop_assert_eq!(fp.span_rank, moved_fp.span_rank);
            prop_assert_eq!(fp.orbit_size, moved_fp.orbit_size);
            prop_assert_eq!(fp.orbit_truncated, moved_fp.orbit_truncated);
        }
    }
}
