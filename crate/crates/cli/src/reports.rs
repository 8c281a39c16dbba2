//! JSON report structures. Field order is fixed by the struct definitions
//! and no collection with nondeterministic iteration order is used, so a
//! command with fixed inputs always emits byte-identical reports.

use crate::files::{FactorizationFile, FamilyFile, Nat, PencilSpecFile};
use lefschetz_core::{FamilyVerification, MonodromyFingerprint, OrbitReport, SpElement};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RunContext {
    pub seed: Option<u64>,
    pub strict: bool,
}

#[derive(Debug, Serialize)]
pub struct ApplyReport {
    pub command: &'static str,
    #[serde(flatten)]
    pub context: RunContext,
    pub start: PencilSpecFile,
    pub sequence: Vec<Nat>,
    pub trace: Vec<PencilSpecFile>,
    #[serde(rename = "final")]
    pub final_state: PencilSpecFile,
    pub blowup_count: Nat,
    pub closed_forms: ClosedForms,
    pub cross_check: &'static str,
}

#[derive(Debug, Serialize)]
pub struct ClosedForms {
    pub blowups: Nat,
    pub genus: Nat,
}

#[derive(Debug, Serialize)]
pub struct FamilyReport {
    pub command: &'static str,
    #[serde(flatten)]
    pub context: RunContext,
    pub m0: Nat,
    pub n: Nat,
    pub sequence: Vec<Nat>,
    pub final_data: Vec<Nat>,
    pub blowups: Nat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start_genus: Option<Nat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub genus: Option<Nat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation_check: Option<&'static str>,
}

#[derive(Debug, Serialize)]
pub struct SearchParams {
    pub g0: Nat,
    pub m0: Nat,
    pub count: usize,
    pub max_d: usize,
    pub k_bound: Nat,
}

#[derive(Debug, Serialize)]
pub struct SearchReport {
    pub command: &'static str,
    #[serde(flatten)]
    pub context: RunContext,
    pub params: SearchParams,
    pub family: FamilyFile,
    pub found: usize,
    pub complete: bool,
    pub verification: VerificationReport,
}

#[derive(Debug, Serialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl VerificationReport {
    pub fn from_verification(v: &FamilyVerification) -> Self {
        VerificationReport {
            passed: v.passed(),
            checks: v
                .checks
                .iter()
                .map(|c| CheckReport {
                    name: c.name,
                    passed: c.passed,
                    detail: c.detail.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    #[serde(flatten)]
    pub context: RunContext,
    #[serde(flatten)]
    pub verification: VerificationReport,
}

#[derive(Debug, Serialize)]
pub struct ProductReport {
    pub command: &'static str,
    #[serde(flatten)]
    pub context: RunContext,
    pub genus: usize,
    pub boundary_count: usize,
    pub matrix: Vec<Vec<crate::files::Int>>,
    pub is_identity: bool,
}

impl ProductReport {
    pub fn matrix_rows(m: &SpElement) -> Vec<Vec<crate::files::Int>> {
        m.rows()
            .into_iter()
            .map(|row| row.into_iter().map(crate::files::Int).collect())
            .collect()
    }
}

#[derive(Debug, Serialize)]
pub struct ValueReport {
    pub command: &'static str,
    #[serde(flatten)]
    pub context: RunContext,
    pub mode: &'static str,
    pub value: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_relation_holds: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct FingerprintReport {
    pub command: &'static str,
    #[serde(flatten)]
    pub context: RunContext,
    pub span_rank: usize,
    pub classes: Vec<FingerprintClass>,
    pub orbit_size: usize,
    pub orbit_truncated: bool,
}

#[derive(Debug, Serialize)]
pub struct FingerprintClass {
    pub class: Vec<crate::files::Int>,
    pub multiplicity: usize,
}

impl FingerprintReport {
    pub fn new(command: &'static str, context: RunContext, fp: &MonodromyFingerprint) -> Self {
        FingerprintReport {
            command,
            context,
            span_rank: fp.span_rank,
            classes: fp
                .classes_up_to_sign
                .iter()
                .map(|(class, multiplicity)| FingerprintClass {
                    class: class
                        .coords()
                        .iter()
                        .cloned()
                        .map(crate::files::Int)
                        .collect(),
                    multiplicity: *multiplicity,
                })
                .collect(),
            orbit_size: fp.orbit_size,
            orbit_truncated: fp.orbit_truncated,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OrbitCommandReport {
    pub command: &'static str,
    #[serde(flatten)]
    pub context: RunContext,
    pub move_set: String,
    pub depth_cap: usize,
    pub size_cap: usize,
    pub visited: usize,
    pub truncated: bool,
    pub canonical_representative: Option<FactorizationFile>,
    pub words: Vec<FactorizationFile>,
}

impl OrbitCommandReport {
    pub fn new(
        context: RunContext,
        depth_cap: usize,
        size_cap: usize,
        report: &OrbitReport,
    ) -> Self {
        OrbitCommandReport {
            command: "orbit",
            context,
            move_set: report.move_set.to_string(),
            depth_cap,
            size_cap,
            visited: report.visited,
            truncated: report.truncated,
            canonical_representative: report
                .canonical_representative()
                .map(FactorizationFile::from_factorization),
            words: report
                .words
                .iter()
                .map(FactorizationFile::from_factorization)
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EquivReport {
    pub command: &'static str,
    #[serde(flatten)]
    pub context: RunContext,
    pub verdict: String,
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
}

/// Emits a report as pretty JSON with a trailing newline.
pub fn emit<T: Serialize>(report: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(report).expect("reports serialize")
    );
}
