//! JSON problem files.
//!
//! ```json
//! {
//!   "dim": 1,
//!   "field": [[{"coeff": "1", "exp": [2]}]],
//!   "y0": ["0.25"],
//!   "compactification": "auto",
//!   "controls": {"tau_budget": 200, "order": 15, "tol": 1e-18}
//! }
//! ```
//!
//! Decimal literals are enclosed, never rounded. A coefficient or initial
//! value may also be given as a `[lo, hi]` pair of literals.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decimal::{format_down, format_exact, format_up, literal_for, parse_enclosure};
use crate::interval::{Interval, IntervalVector};
use crate::pipeline::{KindChoice, PipelineControls, Problem};
use crate::polyfield::{Monomial, PolyVectorField, Polynomial};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_hint: Option<u32>,
    pub field: Vec<Vec<TermSpec>>,
    pub y0: Vec<Value>,
    #[serde(default = "auto")]
    pub compactification: KindChoice,
    #[serde(default)]
    pub controls: ControlsSpec,
}

fn auto() -> KindChoice {
    KindChoice::Auto
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coeff: Value,
    pub exp: Vec<u32>,
}

/// A decimal literal or a `[lo, hi]` pair of literals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Literal(String),
    Range([String; 2]),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ProblemFileError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch { context: String, expected: usize, got: usize },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

impl Value {
    pub fn enclose(&self, key: &str) -> Result<Interval, ProblemFileError> {
        let lit = |s: &str| {
            parse_enclosure(s).map_err(|e| ProblemFileError::Invalid { key: key.to_string(), message: e.to_string() })
        };
        match self {
            Value::Literal(s) => lit(s),
            Value::Range([a, b]) => {
                let (lo, hi) = (lit(a)?, lit(b)?);
                Interval::try_new(lo.lo(), hi.hi())
                    .map_err(|_| ProblemFileError::Invalid { key: key.to_string(), message: format!("empty range [{a}, {b}]") })
            }
        }
    }

    /// A value that parses back to exactly `v`.
    pub fn from_interval(v: Interval) -> Value {
        match literal_for(v) {
            Some(s) => Value::Literal(s),
            None if v.lo().is_finite() && v.hi().is_finite() => Value::Range([format_exact(v.lo()), format_exact(v.hi())]),
            None => Value::Range([format_down(v.lo()), format_up(v.hi())]),
        }
    }
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<ProblemFile, ProblemFileError> {
        serde_json::from_str(text).map_err(|e| ProblemFileError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem file serializes")
    }

    pub fn to_problem(&self, name: &str) -> Result<Problem, ProblemFileError> {
        let m = self.dim;
        if m == 0 {
            return Err(ProblemFileError::Invalid { key: "dim".into(), message: "must be positive".into() });
        }
        if self.field.len() != m {
            return Err(mismatch("field", m, self.field.len()));
        }
        if self.y0.len() != m {
            return Err(mismatch("y0", m, self.y0.len()));
        }
        let mut comps = Vec::with_capacity(m);
        for (i, terms) in self.field.iter().enumerate() {
            let mut monos = Vec::with_capacity(terms.len());
            for (j, t) in terms.iter().enumerate() {
                if t.exp.len() != m {
                    return Err(mismatch(&format!("field[{i}][{j}].exp"), m, t.exp.len()));
                }
                monos.push(Monomial { coeff: t.coeff.enclose(&format!("field[{i}][{j}].coeff"))?, exps: t.exp.clone() });
            }
            comps.push(Polynomial::from_terms(m, monos));
        }
        let field = PolyVectorField::new(comps);
        if let Some(d) = self.degree_hint {
            if d != field.degree() {
                return Err(ProblemFileError::Invalid {
                    key: "degree_hint".into(),
                    message: format!("field has degree {}, hint says {d}", field.degree()),
                });
            }
        }
        let y0 = self
            .y0
            .iter()
            .enumerate()
            .map(|(i, v)| v.enclose(&format!("y0[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let mut controls = PipelineControls::default();
        let c = &self.controls;
        if let Some(t) = c.tau_budget {
            positive("controls.tau_budget", t)?;
            controls.tau_budget = t;
        }
        if let Some(o) = c.order {
            if !(2..=60).contains(&o) {
                return Err(ProblemFileError::Invalid { key: "controls.order".into(), message: format!("{o} outside 2..=60") });
            }
            controls.integrator.order = o;
        }
        if let Some(t) = c.tol {
            positive("controls.tol", t)?;
            controls.integrator.tol = t;
        }
        if let Some(e) = c.epsilon {
            positive("controls.epsilon", e)?;
            controls.epsilon = Some(e);
        }
        Ok(Problem { name: name.to_string(), field, y0: IntervalVector::new(y0), kind: self.compactification, controls })
    }

    /// The file describing `p`; parsing it back gives the same problem.
    pub fn from_problem(p: &Problem) -> ProblemFile {
        let d = PipelineControls::default();
        let c = &p.controls;
        let diff = |a: f64, b: f64| (a != b).then_some(a);
        ProblemFile {
            dim: p.field.dim(),
            degree_hint: None,
            field: p
                .field
                .components()
                .iter()
                .map(|c| c.terms().iter().map(|t| TermSpec { coeff: Value::from_interval(t.coeff), exp: t.exps.clone() }).collect())
                .collect(),
            y0: p.y0.iter().map(|v| Value::from_interval(*v)).collect(),
            compactification: p.kind,
            controls: ControlsSpec {
                tau_budget: diff(c.tau_budget, d.tau_budget),
                order: (c.integrator.order != d.integrator.order).then_some(c.integrator.order),
                tol: diff(c.integrator.tol, d.integrator.tol),
                epsilon: c.epsilon,
            },
        }
    }
}

fn mismatch(context: &str, expected: usize, got: usize) -> ProblemFileError {
    ProblemFileError::DimensionMismatch { context: context.to_string(), expected, got }
}

fn positive(key: &str, v: f64) -> Result<(), ProblemFileError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ProblemFileError::Invalid { key: key.to_string(), message: format!("{v} must be positive and finite") })
    }
}

/// Reads a problem file; the problem is named after the file stem.
pub fn parse_problem(path: impl AsRef<Path>) -> Result<Problem, ProblemFileError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ProblemFileError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("problem");
    ProblemFile::from_json(&text)?.to_problem(name)
}

pub fn serialize_problem(p: &Problem) -> String {
    ProblemFile::from_problem(p).to_json()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = r#"{"dim": 1, "field": [[{"coeff": "1", "exp": [2]}]], "y0": ["0.25"]}"#;

    #[test]
    fn ex1_file() {
        let p = ProblemFile::from_json(EX1).unwrap().to_problem("ex1").unwrap();
        assert_eq!(p.field.degree(), 2);
        assert_eq!(p.y0[0], Interval::point(0.25));
        assert_eq!(p.kind, KindChoice::Auto);
    }

    #[test]
    fn y0_length_mismatch() {
        let text = r#"{"dim": 1, "field": [[{"coeff": "1", "exp": [2]}]], "y0": ["0.25", "1"]}"#;
        let err = ProblemFile::from_json(text).unwrap().to_problem("x").unwrap_err();
        assert!(matches!(err, ProblemFileError::DimensionMismatch { expected: 1, got: 2, .. }));
    }

    #[test]
    fn exponent_length_mismatch() {
        let text = r#"{"dim": 2, "field": [[{"coeff": "1", "exp": [2]}], []], "y0": ["0", "1"]}"#;
        let err = ProblemFile::from_json(text).unwrap().to_problem("x").unwrap_err();
        assert!(matches!(err, ProblemFileError::DimensionMismatch { .. }));
    }

    #[test]
    fn decimal_coefficients_are_enclosed() {
        let text = r#"{"dim": 1, "field": [[{"coeff": "1.25", "exp": [2]}, {"coeff": "0.1", "exp": [0]}]], "y0": [["0.1", "0.2"]]}"#;
        let p = ProblemFile::from_json(text).unwrap().to_problem("x").unwrap();
        let terms = p.field.components()[0].terms();
        let c125 = terms.iter().find(|t| t.exps == [2]).unwrap().coeff;
        assert_eq!(c125, Interval::point(1.25));
        let c01 = terms.iter().find(|t| t.exps == [0]).unwrap().coeff;
        assert!(c01.lo() < c01.hi() && c01.hi() == c01.lo().next_up());
        use std::cmp::Ordering;
        assert_eq!(crate::decimal::compare_decimal("0.1", p.y0[0].lo()).unwrap(), Ordering::Greater);
        assert_eq!(crate::decimal::compare_decimal("0.2", p.y0[0].hi()).unwrap(), Ordering::Less);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"dim": 1, "field": [[{"coeff": "1", "exp": [2]}]], "y0": ["0.25"], "color": "red"}"#;
        assert!(matches!(ProblemFile::from_json(text), Err(ProblemFileError::Parse { .. })));
        let text = r#"{"dim": 1, "field": [[{"coeff": "1", "exp": [2], "x": 1}]], "y0": ["0.25"]}"#;
        assert!(ProblemFile::from_json(text).is_err());
        let text = r#"{"dim": 1, "field": [[{"coeff": "1", "exp": [2]}]], "y0": ["0.25"], "controls": {"speed": 1}}"#;
        assert!(ProblemFile::from_json(text).is_err());
    }

    #[test]
    fn parse_error_has_position() {
        let err = ProblemFile::from_json("{\n  \"dim\": 1,\n  oops\n}").unwrap_err();
        match err {
            ProblemFileError::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn round_trip_builtins() {
        use crate::pipeline::builtin_problem;
        for (name, params) in [
            ("ex1", vec![]),
            ("ex2", vec![]),
            ("ex3", vec![]),
            ("riccati", vec![]),
            ("heat3", vec![("n", "5")]),
            ("heat2", vec![("n", "4")]),
        ] {
            let mut p = builtin_problem(name, &params).unwrap();
            p.controls.tau_budget = 31.5;
            p.controls.epsilon = Some(1e-9);
            let text = serialize_problem(&p);
            let q = ProblemFile::from_json(&text).unwrap().to_problem(&p.name).unwrap();
            assert_eq!(p, q, "{name}");
            assert_eq!(serialize_problem(&q), text);
        }
    }

    #[test]
    fn bad_controls() {
        let text = r#"{"dim": 1, "field": [[{"coeff": "1", "exp": [2]}]], "y0": ["0.25"], "controls": {"tol": -1}}"#;
        assert!(ProblemFile::from_json(text).unwrap().to_problem("x").is_err());
        let text = r#"{"dim": 1, "degree_hint": 3, "field": [[{"coeff": "1", "exp": [2]}]], "y0": ["0.25"]}"#;
        assert!(ProblemFile::from_json(text).unwrap().to_problem("x").is_err());
    }
}
