//! JSON instance documents.
//!
//! ```json
//! { "name": "ex", "d": 1, "m": 1, "n": 2, "c": [1], "T": [[1]], "polyX": [],
//!   "bounds": {"lower": [0], "upper": ["inf"]},
//!   "scenarios": [[1], [2]], "probs": [{"num": 1, "den": 2}, {"num": 1, "den": 2}],
//!   "epsilon": {"num": 1, "den": 2} }
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ccp_core::model::{LinearConstraint, ValidationError};
use ccp_core::{CcpInstance, InstanceData, Rational, Sense};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed instance: {0}")]
    Schema(String),
    #[error("invalid instance: {0}")]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: i64,
    pub den: i64,
}

/// A bound: a number or one of the strings `inf`, `+inf`, `-inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<BoundValue>,
    pub upper: Vec<BoundValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowDoc {
    pub coeffs: Vec<f64>,
    pub sense: String,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub name: String,
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub c: Vec<f64>,
    #[serde(rename = "T")]
    pub tech: Vec<Vec<f64>>,
    #[serde(rename = "polyX", default)]
    pub poly: Vec<RowDoc>,
    pub bounds: Bounds,
    pub scenarios: Vec<Vec<f64>>,
    pub probs: Vec<Fraction>,
    pub epsilon: Fraction,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, Vec<f64>>,
}

fn schema(msg: impl Into<String>) -> InputError {
    InputError::Schema(msg.into())
}

fn bound(v: &BoundValue) -> Result<f64, InputError> {
    match v {
        BoundValue::Number(x) => Ok(*x),
        BoundValue::Text(s) => match s.trim() {
            "inf" | "+inf" | "Infinity" => Ok(f64::INFINITY),
            "-inf" | "-Infinity" => Ok(f64::NEG_INFINITY),
            other => Err(schema(format!("bad bound {other:?}"))),
        },
    }
}

fn bound_doc(x: f64) -> BoundValue {
    if x == f64::INFINITY {
        BoundValue::Text("inf".into())
    } else if x == f64::NEG_INFINITY {
        BoundValue::Text("-inf".into())
    } else {
        BoundValue::Number(x)
    }
}

fn sense(s: &str) -> Result<Sense, InputError> {
    match s.trim() {
        "<=" | "le" | "L" => Ok(Sense::Le),
        ">=" | "ge" | "G" => Ok(Sense::Ge),
        "=" | "==" | "eq" | "E" => Ok(Sense::Eq),
        other => Err(schema(format!("bad sense {other:?}"))),
    }
}

fn fraction(f: Fraction) -> Result<Rational, InputError> {
    Rational::new(f.num as i128, f.den as i128).map_err(|e| schema(format!("{}/{}: {e}", f.num, f.den)))
}

fn check(what: &str, expected: usize, found: usize) -> Result<(), InputError> {
    if expected == found {
        Ok(())
    } else {
        Err(schema(format!("{what}: declared {expected}, found {found}")))
    }
}

impl InstanceDoc {
    pub fn into_instance(self) -> Result<CcpInstance, InputError> {
        check("c", self.d, self.c.len())?;
        check("T rows", self.m, self.tech.len())?;
        check("scenarios", self.n, self.scenarios.len())?;
        check("probs", self.n, self.probs.len())?;
        check("bounds.lower", self.d, self.bounds.lower.len())?;
        check("bounds.upper", self.d, self.bounds.upper.len())?;
        let constraints = self
            .poly
            .iter()
            .map(|r| {
                Ok(LinearConstraint {
                    coeffs: r.coeffs.clone(),
                    sense: sense(&r.sense)?,
                    rhs: r.rhs,
                })
            })
            .collect::<Result<Vec<_>, InputError>>()?;
        let data = InstanceData {
            name: self.name,
            cost: self.c,
            tech: self.tech,
            constraints,
            lower: self.bounds.lower.iter().map(bound).collect::<Result<_, _>>()?,
            upper: self.bounds.upper.iter().map(bound).collect::<Result<_, _>>()?,
            scenarios: self.scenarios,
            probs: self.probs.into_iter().map(fraction).collect::<Result<_, _>>()?,
            epsilon: fraction(self.epsilon)?,
            metadata: self.metadata,
        };
        Ok(CcpInstance::new(data)?)
    }

    pub fn from_instance(inst: &CcpInstance) -> Self {
        let data = inst.to_data();
        let frac = |r: Rational| Fraction {
            num: r.numer() as i64,
            den: r.denom() as i64,
        };
        InstanceDoc {
            name: data.name,
            d: inst.num_vars(),
            m: inst.num_rows(),
            n: inst.num_scenarios(),
            c: data.cost,
            tech: data.tech,
            poly: data
                .constraints
                .iter()
                .map(|c| RowDoc {
                    coeffs: c.coeffs.clone(),
                    sense: c.sense.symbol().into(),
                    rhs: c.rhs,
                })
                .collect(),
            bounds: Bounds {
                lower: data.lower.iter().map(|&x| bound_doc(x)).collect(),
                upper: data.upper.iter().map(|&x| bound_doc(x)).collect(),
            },
            scenarios: data.scenarios,
            probs: data.probs.into_iter().map(frac).collect(),
            epsilon: frac(data.epsilon),
            metadata: data.metadata,
        }
    }
}

pub fn parse_instance(text: &str) -> Result<CcpInstance, InputError> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    doc.into_instance()
}

pub fn load_instance(path: &Path) -> Result<CcpInstance, InputError> {
    let text = fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_instance(&text)
}

pub fn instance_to_json(inst: &CcpInstance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceDoc::from_instance(inst)).expect("serializable");
    s.push('\n');
    s
}

pub fn save_instance(inst: &CcpInstance, path: &Path) -> std::io::Result<()> {
    fs::write(path, instance_to_json(inst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ccp_core::fixtures::example1;

    #[test]
    fn round_trip() {
        let inst = example1();
        let text = instance_to_json(&inst);
        assert!(text.contains("\"inf\""));
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn declared_sizes_are_checked() {
        let text = instance_to_json(&example1()).replace("\"n\": 7", "\"n\": 6");
        assert!(matches!(parse_instance(&text), Err(InputError::Schema(_))));
    }

    #[test]
    fn zero_risk_level_is_rejected() {
        let text = instance_to_json(&example1()).replace(
            "\"epsilon\": {\n    \"num\": 4,",
            "\"epsilon\": {\n    \"num\": 0,",
        );
        assert!(matches!(parse_instance(&text), Err(InputError::Validation(_))));
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let doc = r#"{"name":"p","d":1,"m":1,"n":2,"c":[1],"T":[[1]],"polyX":[],
            "bounds":{"lower":[0],"upper":["inf"]},"scenarios":[[1],[2]],
            "probs":[{"num":1,"den":2},{"num":1,"den":3}],"epsilon":{"num":1,"den":2}}"#;
        assert!(matches!(
            parse_instance(doc),
            Err(InputError::Validation(ValidationError::ProbabilitySum(_)))
        ));
    }
}
