//! JSON file formats: pencil specs, factorizations, conjugator lists, and
//! matching families.
//!
//! Integers are serialized as JSON numbers while they fit in 64 bits and as
//! decimal strings beyond that, and both forms are accepted on input, so
//! arbitrary-precision values survive round trips. In strict parse mode
//! unknown fields are rejected.

use anyhow::{anyhow, bail, Context, Result};
use lefschetz_core::{
    DoublingSequence, ExceptionalData, Factorization, HomologyClass, MatchingFamily, PencilState,
    TwistLetter,
};
use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Non-negative integer with number-or-decimal-string JSON encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nat(pub BigUint);

impl From<BigUint> for Nat {
    fn from(v: BigUint) -> Self {
        Nat(v)
    }
}

impl Serialize for Nat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_u64() {
            Some(v) => s.serialize_u64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

struct NatVisitor;

impl Visitor<'_> for NatVisitor {
    type Value = Nat;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a non-negative integer (number or decimal string)")
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Nat, E> {
        Ok(Nat(BigUint::from(v)))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Nat, E> {
        u64::try_from(v)
            .map(|v| Nat(BigUint::from(v)))
            .map_err(|_| E::custom(format!("negative value {v} is not allowed")))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Nat, E> {
        BigUint::from_str(v)
            .map(Nat)
            .map_err(|_| E::custom(format!("invalid non-negative integer {v:?}")))
    }
}

impl<'de> Deserialize<'de> for Nat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Nat, D::Error> {
        d.deserialize_any(NatVisitor)
    }
}

/// Signed integer with number-or-decimal-string JSON encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Int(pub BigInt);

impl From<BigInt> for Int {
    fn from(v: BigInt) -> Self {
        Int(v)
    }
}

impl Serialize for Int {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

struct IntVisitor;

impl Visitor<'_> for IntVisitor {
    type Value = Int;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "an integer (number or decimal string)")
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Int, E> {
        Ok(Int(BigInt::from(v)))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Int, E> {
        Ok(Int(BigInt::from(v)))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Int, E> {
        BigInt::from_str(v)
            .map(Int)
            .map_err(|_| E::custom(format!("invalid integer {v:?}")))
    }
}

impl<'de> Deserialize<'de> for Int {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Int, D::Error> {
        d.deserialize_any(IntVisitor)
    }
}

/// Pencil input file: `{"genus": g, "exceptional_data": [m0, m1, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PencilSpecFile {
    pub genus: Nat,
    pub exceptional_data: Vec<Nat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl PencilSpecFile {
    pub fn to_state(&self) -> PencilState {
        PencilState::new(
            self.genus.0.clone(),
            ExceptionalData::new(self.exceptional_data.iter().map(|n| n.0.clone()).collect()),
        )
    }

    pub fn from_state(state: &PencilState, label: Option<String>) -> Self {
        PencilSpecFile {
            genus: Nat(state.genus().clone()),
            exceptional_data: state.data().entries().iter().cloned().map(Nat).collect(),
            label,
        }
    }
}

/// One letter of a factorization file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LetterFile {
    pub class: Vec<Int>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separating: Option<bool>,
}

/// Factorization input file:
/// `{"genus": g, "boundary_count": m, "letters": [{"class": [...]}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorizationFile {
    pub genus: usize,
    pub boundary_count: usize,
    pub letters: Vec<LetterFile>,
}

impl FactorizationFile {
    pub fn to_factorization(&self) -> Result<Factorization> {
        let mut letters = Vec::with_capacity(self.letters.len());
        for (i, letter) in self.letters.iter().enumerate() {
            if letter.class.len() != 2 * self.genus {
                bail!(
                    "letter {i}: class has {} coordinates, expected {} for genus {}",
                    letter.class.len(),
                    2 * self.genus,
                    self.genus
                );
            }
            let class = HomologyClass::new(letter.class.iter().map(|v| v.0.clone()).collect())
                .with_context(|| format!("letter {i}"))?;
            let is_zero = class.is_zero();
            match letter.separating {
                Some(true) if !is_zero => {
                    bail!("letter {i}: marked separating but its class is nonzero")
                }
                Some(false) | None if is_zero => {
                    bail!("letter {i}: zero class must be explicitly marked \"separating\": true")
                }
                _ => {}
            }
            letters.push(match &letter.name {
                Some(name) => TwistLetter::with_label(class, name.clone()),
                None => TwistLetter::new(class),
            });
        }
        Factorization::new(self.genus, self.boundary_count, letters)
            .map_err(|e| anyhow!(e.to_string()))
    }

    pub fn from_factorization(f: &Factorization) -> Self {
        FactorizationFile {
            genus: f.genus(),
            boundary_count: f.boundary_count(),
            letters: f
                .letters()
                .iter()
                .map(|l| LetterFile {
                    class: l.class().coords().iter().cloned().map(Int).collect(),
                    name: l.label().map(str::to_string),
                    separating: l.is_separating().then_some(true),
                })
                .collect(),
        }
    }
}

/// Start pencil of a matching family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyStartFile {
    pub genus: Nat,
    pub base_points: Nat,
}

/// Shared invariants of a matching family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySharedFile {
    pub blowups: Nat,
    pub genus: Nat,
}

/// A matching family on disk; also the `family` section of search reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyFile {
    pub start: FamilyStartFile,
    pub shared: FamilySharedFile,
    pub sequences: Vec<Vec<Nat>>,
    pub datasets: Vec<Vec<Nat>>,
}

impl FamilyFile {
    pub fn to_family(&self) -> MatchingFamily {
        MatchingFamily {
            start: PencilState::new(
                self.start.genus.0.clone(),
                ExceptionalData::new(vec![self.start.base_points.0.clone()]),
            ),
            sequences: self
                .sequences
                .iter()
                .map(|s| DoublingSequence::new(s.iter().map(|n| n.0.clone()).collect()))
                .collect(),
            shared_blowups: self.shared.blowups.0.clone(),
            shared_genus: self.shared.genus.0.clone(),
            datasets: self
                .datasets
                .iter()
                .map(|d| ExceptionalData::new(d.iter().map(|n| n.0.clone()).collect()))
                .collect(),
        }
    }

    pub fn from_family(family: &MatchingFamily) -> Self {
        FamilyFile {
            start: FamilyStartFile {
                genus: Nat(family.start.genus().clone()),
                base_points: Nat(family.start.base_points()),
            },
            shared: FamilySharedFile {
                blowups: Nat(family.shared_blowups.clone()),
                genus: Nat(family.shared_genus.clone()),
            },
            sequences: family
                .sequences
                .iter()
                .map(|s| s.steps().iter().cloned().map(Nat).collect())
                .collect(),
            datasets: family
                .datasets
                .iter()
                .map(|d| d.entries().iter().cloned().map(Nat).collect())
                .collect(),
        }
    }
}

/// Allowed key sets per file format, used by the strict parse mode.
fn allowed_keys(format: FileFormat) -> &'static [(&'static str, &'static [&'static str])] {
    match format {
        FileFormat::Pencil => &[("", &["genus", "exceptional_data", "label"])],
        FileFormat::Factorization => &[
            ("", &["genus", "boundary_count", "letters"]),
            ("letters", &["class", "name", "separating"]),
        ],
        FileFormat::Family => &[
            ("", &["family", "start", "shared", "sequences", "datasets"]),
            ("family", &["start", "shared", "sequences", "datasets"]),
            ("start", &["genus", "base_points"]),
            ("shared", &["blowups", "genus"]),
        ],
        FileFormat::Conjugators => &[],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Pencil,
    Factorization,
    Family,
    Conjugators,
}

fn check_keys(value: &serde_json::Value, context: &str, table: &[(&str, &[&str])]) -> Result<()> {
    let serde_json::Value::Object(map) = value else {
        return Ok(());
    };
    let allowed = table
        .iter()
        .find(|(name, _)| *name == context)
        .map(|(_, keys)| *keys)
        .unwrap_or(&[]);
    for (key, nested) in map {
        if !allowed.contains(&key.as_str()) {
            bail!("unknown field {key:?} (strict parse mode)");
        }
        let nested_context = if table.iter().any(|(name, _)| *name == key.as_str()) {
            key.as_str()
        } else {
            context
        };
        match nested {
            serde_json::Value::Object(_) => check_keys(nested, nested_context, table)?,
            serde_json::Value::Array(items) => {
                for item in items {
                    check_keys(item, key.as_str(), table)?;
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// Reads and parses a JSON file, enforcing the allowed key set when
/// `strict` is true.
pub fn load_json<T: serde::de::DeserializeOwned>(
    path: &Path,
    format: FileFormat,
    strict: bool,
) -> Result<T> {
    let raw =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&raw)
        .with_context(|| format!("{} is not valid JSON", path.display()))?;
    if strict {
        check_keys(&value, "", allowed_keys(format))
            .with_context(|| format!("while parsing {}", path.display()))?;
    }
    serde_json::from_value(value).with_context(|| format!("while parsing {}", path.display()))
}

/// Loads a pencil file into a validated, canonicalized state; the optional
/// label rides along for reports.
pub fn load_pencil(path: &Path, strict: bool) -> Result<(PencilState, Option<String>)> {
    let file: PencilSpecFile = load_json(path, FileFormat::Pencil, strict)?;
    Ok((file.to_state(), file.label))
}

pub fn load_factorization(path: &Path, strict: bool) -> Result<Factorization> {
    let file: FactorizationFile = load_json(path, FileFormat::Factorization, strict)?;
    file.to_factorization()
        .with_context(|| format!("while validating {}", path.display()))
}

/// Conjugator files are a bare JSON array of coordinate vectors.
pub fn load_conjugators(path: &Path, genus: usize) -> Result<Vec<HomologyClass>> {
    let vectors: Vec<Vec<Int>> = load_json(path, FileFormat::Conjugators, false)?;
    vectors
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            if v.len() != 2 * genus {
                bail!(
                    "conjugator {i}: vector has {} coordinates, expected {}",
                    v.len(),
                    2 * genus
                );
            }
            HomologyClass::new(v.into_iter().map(|x| x.0).collect())
                .map_err(|e| anyhow!("conjugator {i}: {e}"))
        })
        .collect()
}

/// Loads a family file, accepting either a bare family object or a search
/// report wrapping it under a `family` key.
pub fn load_family(path: &Path, strict: bool) -> Result<MatchingFamily> {
    let raw =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&raw)
        .with_context(|| format!("{} is not valid JSON", path.display()))?;
    let family_value = value.get("family").cloned().unwrap_or(value);
    if strict {
        check_keys(&family_value, "family", allowed_keys(FileFormat::Family))
            .with_context(|| format!("while parsing {}", path.display()))?;
    }
    let file: FamilyFile = serde_json::from_value(family_value)
        .with_context(|| format!("while parsing {}", path.display()))?;
    Ok(file.to_family())
}
