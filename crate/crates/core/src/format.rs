//! JSON model files.
//!
//! ```json
//! {"kind":"empirical",
//!  "measurements":[["X"],["Y"]], "outcomes":[["a","b"],["a","b"]],
//!  "support":[{"m":["X","Y"],"o":["a","b"]}, {"m":["X","Y"],"o":["b","a"]}]}
//! ```
//!
//! Kinds are `empirical`, `hidden` (adds `lambdas` and `"l"` per entry),
//! `probabilistic` (adds `"p":"num/den"` per entry), `probabilistic-hidden`
//! (both), and `quantum`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Cell, EmpiricalModel, HiddenVariableModel, HvCell, ModelError, SystemType};
use crate::probabilistic::{ProbEmpiricalModel, ProbError, ProbHVModel};
use crate::quantum::{ComplexMatrix, QuantumError, QuantumRealization, C64};
use crate::rational::{format_rational, parse_rational, RationalError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("support entry {index}: {message}")]
    Entry { index: usize, message: String },
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnyModel {
    Empirical(EmpiricalModel),
    Hidden(HiddenVariableModel),
    Prob(ProbEmpiricalModel),
    ProbHidden(ProbHVModel),
    Quantum(QuantumRealization),
}

impl AnyModel {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyModel::Empirical(_) => "empirical",
            AnyModel::Hidden(_) => "hidden",
            AnyModel::Prob(_) => "probabilistic",
            AnyModel::ProbHidden(_) => "probabilistic-hidden",
            AnyModel::Quantum(_) => "quantum",
        }
    }

    pub fn system_type(&self) -> &SystemType {
        match self {
            AnyModel::Empirical(e) => e.system_type(),
            AnyModel::Hidden(h) => h.system_type(),
            AnyModel::Prob(p) => p.system_type(),
            AnyModel::ProbHidden(q) => q.system_type(),
            AnyModel::Quantum(q) => q.system_type(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    m: Vec<String>,
    o: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    l: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Operator {
    site: usize,
    measurement: String,
    outcome: String,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    kind: String,
    measurements: Vec<Vec<String>>,
    outcomes: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambdas: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    support: Option<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    operators: Option<Vec<Operator>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    state: Option<Vec<Vec<[f64; 2]>>>,
}

const KINDS: [&str; 5] = [
    "empirical",
    "hidden",
    "probabilistic",
    "probabilistic-hidden",
    "quantum",
];

fn entry_err(index: usize, e: impl std::fmt::Display) -> FormatError {
    FormatError::Entry {
        index,
        message: e.to_string(),
    }
}

fn rat_err(index: usize, e: RationalError) -> FormatError {
    entry_err(index, e)
}

fn matrix(rows: &[Vec<[f64; 2]>], what: &str) -> Result<ComplexMatrix, FormatError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(FormatError::Shape(format!("{what}: ragged matrix")));
    }
    let data = rows.iter().flatten().map(|[re, im]| C64::new(*re, *im)).collect();
    Ok(ComplexMatrix::new(r, c, data)?)
}

fn unmatrix(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect())
        .collect()
}

pub fn parse_model(text: &str) -> Result<AnyModel, FormatError> {
    let file: File = serde_json::from_str(text).map_err(|e| FormatError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let kind = file.kind.as_str();
    if !KINDS.contains(&kind) {
        return Err(FormatError::Shape(format!(
            "unknown kind `{kind}` (expected one of {})",
            KINDS.join(", ")
        )));
    }
    let ty = SystemType::new(file.measurements, file.outcomes)?;
    let hidden = matches!(kind, "hidden" | "probabilistic-hidden");
    let weighted = matches!(kind, "probabilistic" | "probabilistic-hidden");
    if kind == "quantum" {
        if file.support.is_some() || file.lambdas.is_some() {
            return Err(FormatError::Shape("quantum files have no support or lambdas".into()));
        }
        let dims = file.dims.ok_or_else(|| FormatError::Shape("missing `dims`".into()))?;
        let ops_in = file
            .operators
            .ok_or_else(|| FormatError::Shape("missing `operators`".into()))?;
        let state = matrix(
            &file.state.ok_or_else(|| FormatError::Shape("missing `state`".into()))?,
            "state",
        )?;
        let mut slots: Vec<Vec<Vec<Option<ComplexMatrix>>>> = (0..ty.arity())
            .map(|i| vec![vec![None; ty.outcomes(i).len()]; ty.measurements(i).len()])
            .collect();
        for op in ops_in {
            if op.site >= ty.arity() {
                return Err(ModelError::SiteOutOfRange {
                    site: op.site,
                    arity: ty.arity(),
                }
                .into());
            }
            let m = ty.measurement_index(op.site, &op.measurement)?;
            let o = ty.outcome_index(op.site, &op.outcome)?;
            let slot = &mut slots[op.site][m][o];
            if slot.is_some() {
                return Err(FormatError::Shape(format!(
                    "operator for site {}, {}, {} given twice",
                    op.site, op.measurement, op.outcome
                )));
            }
            *slot = Some(matrix(&op.matrix, "operator")?);
        }
        let mut ops = Vec::new();
        for (i, site) in slots.into_iter().enumerate() {
            let mut ms = Vec::new();
            for (m, outs) in site.into_iter().enumerate() {
                let mut os = Vec::new();
                for (o, a) in outs.into_iter().enumerate() {
                    os.push(a.ok_or_else(|| {
                        FormatError::Shape(format!(
                            "missing operator for site {i}, {}, {}",
                            ty.measurements(i)[m],
                            ty.outcomes(i)[o]
                        ))
                    })?);
                }
                ms.push(os);
            }
            ops.push(ms);
        }
        return Ok(AnyModel::Quantum(QuantumRealization::new(ty, dims, ops, state)?));
    }
    if file.dims.is_some() || file.operators.is_some() || file.state.is_some() {
        return Err(FormatError::Shape(format!("`{kind}` files have no quantum fields")));
    }
    let lambdas = match (hidden, file.lambdas) {
        (true, Some(l)) => l,
        (true, None) => return Err(FormatError::Shape("missing `lambdas`".into())),
        (false, Some(_)) => return Err(FormatError::Shape(format!("`{kind}` files have no lambdas"))),
        (false, None) => Vec::new(),
    };
    let support = file.support.unwrap_or_default();
    let mut cells = Vec::new();
    let mut weights = Vec::new();
    for (index, entry) in support.iter().enumerate() {
        let cell = ty.cell(&entry.m, &entry.o).map_err(|e| entry_err(index, e))?;
        let l = match (&entry.l, hidden) {
            (Some(l), true) => Some(
                lambdas
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| entry_err(index, ModelError::UnknownLambda(l.clone())))?,
            ),
            (None, true) => return Err(entry_err(index, "missing `l`")),
            (Some(_), false) => return Err(entry_err(index, "unexpected `l`")),
            (None, false) => None,
        };
        match (&entry.p, weighted) {
            (Some(p), true) => weights.push(parse_rational(p).map_err(|e| rat_err(index, e))?),
            (None, true) => return Err(entry_err(index, "missing `p`")),
            (Some(_), false) => return Err(entry_err(index, "unexpected `p`")),
            (None, false) => {}
        }
        cells.push((cell, l));
    }
    Ok(match kind {
        "empirical" => AnyModel::Empirical(EmpiricalModel::new(ty, cells.into_iter().map(|(c, _)| c))?),
        "hidden" => AnyModel::Hidden(HiddenVariableModel::new(
            ty,
            lambdas,
            cells
                .into_iter()
                .map(|(c, l)| HvCell::new(c.m, c.o, l.expect("hidden"))),
        )?),
        "probabilistic" => AnyModel::Prob(ProbEmpiricalModel::new(
            ty,
            cells.into_iter().map(|(c, _)| c).zip(weights),
        )?),
        _ => AnyModel::ProbHidden(ProbHVModel::new(
            ty,
            lambdas,
            cells
                .into_iter()
                .map(|(c, l)| HvCell::new(c.m, c.o, l.expect("hidden")))
                .zip(weights),
        )?),
    })
}

fn labels(ty: &SystemType) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    (
        (0..ty.arity()).map(|i| ty.measurements(i).to_vec()).collect(),
        (0..ty.arity()).map(|i| ty.outcomes(i).to_vec()).collect(),
    )
}

fn entry(ty: &SystemType, c: &Cell) -> Entry {
    Entry {
        m: ty.measurement_labels(&c.m).into_iter().map(String::from).collect(),
        o: ty.outcome_labels(&c.o).into_iter().map(String::from).collect(),
        l: None,
        p: None,
    }
}

fn file_of(model: &AnyModel) -> File {
    let ty = model.system_type();
    let (measurements, outcomes) = labels(ty);
    let mut file = File {
        kind: model.kind().to_string(),
        measurements,
        outcomes,
        lambdas: None,
        support: None,
        dims: None,
        operators: None,
        state: None,
    };
    match model {
        AnyModel::Empirical(e) => {
            file.support = Some(e.support().iter().map(|c| entry(ty, c)).collect());
        }
        AnyModel::Hidden(h) => {
            file.lambdas = Some(h.lambdas().to_vec());
            file.support = Some(
                h.support()
                    .iter()
                    .map(|c| Entry {
                        l: Some(h.lambdas()[c.l].clone()),
                        ..entry(ty, &c.cell())
                    })
                    .collect(),
            );
        }
        AnyModel::Prob(p) => {
            file.support = Some(
                p.weights()
                    .iter()
                    .map(|(c, w)| Entry {
                        p: Some(format_rational(w)),
                        ..entry(ty, c)
                    })
                    .collect(),
            );
        }
        AnyModel::ProbHidden(q) => {
            file.lambdas = Some(q.lambdas().to_vec());
            file.support = Some(
                q.weights()
                    .iter()
                    .map(|(c, w)| Entry {
                        l: Some(q.lambdas()[c.l].clone()),
                        p: Some(format_rational(w)),
                        ..entry(ty, &c.cell())
                    })
                    .collect(),
            );
        }
        AnyModel::Quantum(q) => {
            file.dims = Some(q.dims().to_vec());
            let mut ops = Vec::new();
            for (i, site) in q.operators().iter().enumerate() {
                for (m, outs) in site.iter().enumerate() {
                    for (o, a) in outs.iter().enumerate() {
                        ops.push(Operator {
                            site: i,
                            measurement: ty.measurements(i)[m].clone(),
                            outcome: ty.outcomes(i)[o].clone(),
                            matrix: unmatrix(a),
                        });
                    }
                }
            }
            file.operators = Some(ops);
            file.state = Some(unmatrix(q.state()));
        }
    }
    file
}

/// Canonical JSON value of a model (support sorted by index order).
pub fn model_value(model: &AnyModel) -> serde_json::Value {
    serde_json::to_value(file_of(model)).expect("serializable")
}

pub fn serialize_model(model: &AnyModel) -> String {
    let mut s = serde_json::to_string_pretty(&file_of(model)).expect("serializable");
    s.push('\n');
    s
}

/// Parses a comma/semicolon list such as `X1,Y1;X2,Y2` into joint measurements.
pub fn parse_measurement_list(ty: &SystemType, text: &str) -> Result<BTreeSet<Vec<usize>>, FormatError> {
    let mut out = BTreeSet::new();
    for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let labels: Vec<&str> = part.split(',').map(str::trim).collect();
        out.insert(ty.joint_measurement(&labels)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn catalog_roundtrips() {
        for (name, _) in catalog::BUILTIN_MODELS {
            let m = catalog::builtin_model(name).unwrap();
            let text = serialize_model(&m);
            assert_eq!(parse_model(&text).unwrap(), m, "{name}");
        }
        for (name, _) in catalog::BUILTIN_QUANTUM {
            let m = AnyModel::Quantum(catalog::builtin_quantum(name).unwrap());
            let text = serialize_model(&m);
            assert_eq!(parse_model(&text).unwrap(), m, "{name}");
        }
    }

    #[test]
    fn hidden_roundtrip() {
        let h = crate::constructions::realize_sd(&catalog::epr_model());
        let m = AnyModel::Hidden(h);
        assert_eq!(parse_model(&serialize_model(&m)).unwrap(), m);
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_model("{\n  \"kind\": \"empirical\",\n  oops\n}") {
            Err(FormatError::Syntax { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn undeclared_label() {
        let text = r#"{"kind":"empirical","measurements":[["X"],["Y"]],"outcomes":[["a","b"],["a","b"]],
            "support":[{"m":["X","Y"],"o":["a","c"]}]}"#;
        assert!(matches!(parse_model(text), Err(FormatError::Entry { index: 0, .. })));
    }

    #[test]
    fn duplicate_tuple() {
        let text = r#"{"kind":"empirical","measurements":[["X"],["Y"]],"outcomes":[["a","b"],["a","b"]],
            "support":[{"m":["X","Y"],"o":["a","b"]},{"m":["X","Y"],"o":["a","b"]}]}"#;
        assert!(matches!(
            parse_model(text),
            Err(FormatError::Model(ModelError::DuplicateTuple(_)))
        ));
    }

    #[test]
    fn weights_must_sum_to_one() {
        let text = r#"{"kind":"probabilistic","measurements":[["X"],["Y"]],"outcomes":[["a","b"],["a","b"]],
            "support":[{"m":["X","Y"],"o":["a","b"],"p":"1/2"},{"m":["X","Y"],"o":["b","a"],"p":"49/100"}]}"#;
        assert!(matches!(
            parse_model(text),
            Err(FormatError::Prob(ProbError::NotNormalized(_)))
        ));
    }

    #[test]
    fn kind_field_checks() {
        let text = r#"{"kind":"hidden","measurements":[["X"]],"outcomes":[["a"]],"support":[]}"#;
        assert!(matches!(parse_model(text), Err(FormatError::Shape(_))));
        let text = r#"{"kind":"weird","measurements":[["X"]],"outcomes":[["a"]]}"#;
        assert!(matches!(parse_model(text), Err(FormatError::Shape(_))));
    }

    #[test]
    fn measurement_lists() {
        let ty = catalog::hardy_type();
        let s = parse_measurement_list(&ty, "X1,Y1; X2,Y2").unwrap();
        assert_eq!(s, BTreeSet::from([vec![0, 0], vec![1, 1]]));
        assert!(parse_measurement_list(&ty, "X1,Q").is_err());
    }
}
