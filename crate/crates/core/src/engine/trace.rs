//! Term-level records of one recursion step, for audits and trace dumps.
//!
//! JSON-lines schema (one object per line, big integers as decimal strings):
//!
//! ```text
//! {"kind":"first_sum","k":K,"child":{"class":D,"alpha":A,"beta":B},
//!  "coefficient":"1","contribution":V}
//! {"kind":"split","l":L,"alpha0":A0,"beta0":B0,
//!  "factors":[{"class":C,"alpha":Ai,"beta":Bi,"gamma":Gi,"n":Ni,"value":Wi},...],
//!  "pairs":[id,...],"coefficient":X,"contribution":V}
//! {"kind":"total","class":D,"alpha":A,"beta":B,"terms":N,"value":V}
//! ```
//!
//! Classes use the class text form of the surface, tangency vectors the
//! `k:c,...` form.

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::picard::DivisorClass;
use crate::surfaces::SurfaceSpec;
use crate::tangency::TangencyVector;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorRecord {
    pub class: DivisorClass,
    pub alpha: TangencyVector,
    pub beta: TangencyVector,
    pub gamma: TangencyVector,
    pub n: u64,
    pub value: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermKind {
    /// `W(D, alpha + θ_k, beta - θ_k)`.
    FirstSum { k: u32 },
    Split {
        l: u64,
        alpha0: TangencyVector,
        beta0: TangencyVector,
        factors: Vec<FactorRecord>,
        pair_ids: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermRecord {
    pub kind: TermKind,
    pub coefficient: BigInt,
    pub contribution: BigInt,
}

impl TermRecord {
    pub fn is_first_sum(&self) -> bool {
        matches!(self.kind, TermKind::FirstSum { .. })
    }

    pub fn to_json(
        &self,
        spec: &SurfaceSpec,
        d: &DivisorClass,
        alpha: &TangencyVector,
        beta: &TangencyVector,
    ) -> Value {
        match &self.kind {
            TermKind::FirstSum { k } => {
                let t = TangencyVector::theta(*k);
                json!({
                    "kind": "first_sum",
                    "k": k,
                    "child": {
                        "class": spec.format_class(d),
                        "alpha": (alpha + &t).to_string(),
                        "beta": beta.checked_sub(&t).unwrap_or_default().to_string(),
                    },
                    "coefficient": self.coefficient.to_string(),
                    "contribution": self.contribution.to_string(),
                })
            }
            TermKind::Split {
                l,
                alpha0,
                beta0,
                factors,
                pair_ids,
            } => {
                let factors: Vec<Value> = factors
                    .iter()
                    .map(|f| {
                        json!({
                            "class": spec.format_class(&f.class),
                            "alpha": f.alpha.to_string(),
                            "beta": f.beta.to_string(),
                            "gamma": f.gamma.to_string(),
                            "n": f.n,
                            "value": f.value.to_string(),
                        })
                    })
                    .collect();
                json!({
                    "kind": "split",
                    "l": l,
                    "alpha0": alpha0.to_string(),
                    "beta0": beta0.to_string(),
                    "factors": factors,
                    "pairs": pair_ids,
                    "coefficient": self.coefficient.to_string(),
                    "contribution": self.contribution.to_string(),
                })
            }
        }
    }
}

pub fn totals_json(
    spec: &SurfaceSpec,
    d: &DivisorClass,
    alpha: &TangencyVector,
    beta: &TangencyVector,
    terms: usize,
    value: &BigInt,
) -> Value {
    json!({
        "kind": "total",
        "class": spec.format_class(d),
        "alpha": alpha.to_string(),
        "beta": beta.to_string(),
        "terms": terms,
        "value": value.to_string(),
    })
}
