//! Named constructors for the standard models: EPR, GHZ, Hardy, KS, the
//! NS-but-not-NS^p tables, and the PR box.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::constructions::LocalGridFamily;
use crate::format::AnyModel;
use crate::model::{Cell, EmpiricalModel, ModelError, Permutation, SystemType};
use crate::probabilistic::ProbEmpiricalModel;
use crate::quantum::{epr_system, ghz_system, hardy_system, QuantumRealization};
use crate::rational::ratio;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("extension row ({0}) is one of the fixed GHZ rows")]
    GhzConflict(String),
    #[error("cell {0} is one of the fixed Hardy cells")]
    HardyFixed(String),
    #[error("the completion leaves ({0}) without outcomes")]
    NotTotal(String),
    #[error("KS needs 9 outcome assignments, got {0}")]
    KsArity(usize),
    #[error("KS value for column {column} is not a unit vector")]
    KsValue { column: usize },
}

fn cells(ty: &SystemType, rows: &[(&[&str], &[&[&str]])]) -> Vec<Cell> {
    rows.iter()
        .flat_map(|(m, os)| os.iter().map(move |o| ty.cell(m, o).expect("static labels")))
        .collect()
}

/// Rows given as 0/1 strings over outcomes in `all_outcomes` order.
fn table(ty: &SystemType, rows: &[(&[&str], &str)]) -> EmpiricalModel {
    let outs: Vec<Vec<usize>> = ty.all_outcomes().collect();
    let mut support = Vec::new();
    for (m, bits) in rows {
        let m = ty.joint_measurement(m).expect("static labels");
        for (o, bit) in outs.iter().zip(bits.chars()) {
            if bit == '1' {
                support.push(Cell::new(m.clone(), o.clone()));
            }
        }
    }
    EmpiricalModel::new(ty.clone(), support).expect("static table")
}

pub fn epr_type() -> SystemType {
    SystemType::from_labels(&[&["X"], &["Y"]], &[&["a", "b"], &["a", "b"]]).expect("static type")
}

pub fn epr_model() -> EmpiricalModel {
    let ty = epr_type();
    EmpiricalModel::new(ty.clone(), cells(&ty, &[(&["X", "Y"], &[&["a", "b"], &["b", "a"]])])).expect("static model")
}

// ---------------------------------------------------------------- GHZ

pub fn ghz_type() -> SystemType {
    SystemType::homogeneous(3, &["1", "2"], &["R", "G"]).expect("static type")
}

/// `P = {122, 212, 221}`.
pub fn ghz_p() -> BTreeSet<Vec<usize>> {
    BTreeSet::from([vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]])
}

const GHZ_P_OUTCOMES: [&[&str]; 4] = [&["R", "R", "R"], &["R", "G", "G"], &["G", "R", "G"], &["G", "G", "R"]];
const GHZ_111_OUTCOMES: [&[&str]; 4] = [&["R", "R", "G"], &["R", "G", "R"], &["G", "R", "R"], &["G", "G", "G"]];

/// The GHZ model on `P ∪ {111}`, plus optional rows elsewhere.
pub fn ghz_model(
    extension: Option<&BTreeMap<Vec<usize>, BTreeSet<Vec<usize>>>>,
) -> Result<EmpiricalModel, CatalogError> {
    let ty = ghz_type();
    let mut support = cells(
        &ty,
        &[
            (&["1", "2", "2"], &GHZ_P_OUTCOMES),
            (&["2", "1", "2"], &GHZ_P_OUTCOMES),
            (&["2", "2", "1"], &GHZ_P_OUTCOMES),
            (&["1", "1", "1"], &GHZ_111_OUTCOMES),
        ],
    );
    if let Some(ext) = extension {
        for (m, os) in ext {
            ty.check_measurement(m)?;
            if ghz_p().contains(m) || m == &vec![0, 0, 0] {
                return Err(CatalogError::GhzConflict(ty.show_measurement(m)));
            }
            for o in os {
                let c = Cell::new(m.clone(), o.clone());
                ty.check_cell(&c)?;
                support.push(c);
            }
        }
    }
    Ok(EmpiricalModel::new(ty, support)?)
}

/// The eight instructions consistent with the GHZ rows on `P`, as
/// (setting-1 row, setting-2 row) pairs.
pub fn mermin_instruction_table() -> Vec<LocalGridFamily> {
    const ROWS: [(&str, &str); 8] = [
        ("RRR", "RRR"),
        ("RGG", "RGG"),
        ("GRG", "GRG"),
        ("GGR", "GGR"),
        ("RGG", "GRR"),
        ("RRR", "GGG"),
        ("GGR", "RRG"),
        ("GRG", "RGR"),
    ];
    let idx = |ch: char| usize::from(ch == 'G');
    ROWS.iter()
        .map(|(top, bottom)| {
            let maps = top
                .chars()
                .zip(bottom.chars())
                .map(|(t, b)| BTreeMap::from([(0, idx(t)), (1, idx(b))]))
                .collect();
            LocalGridFamily::new(maps)
        })
        .collect()
}

// ---------------------------------------------------------------- Hardy

pub fn hardy_type() -> SystemType {
    SystemType::from_labels(&[&["X1", "X2"], &["Y1", "Y2"]], &[&["R", "G"], &["R", "G"]]).expect("static type")
}

/// `(X1Y1, RR)`, which must be possible.
pub fn hardy_possible_cell() -> Cell {
    Cell::new(vec![0, 0], vec![0, 0])
}

/// `(X1Y2, RR)`, `(X2Y1, RR)`, `(X2Y2, GG)`, which must be impossible.
pub fn hardy_impossible_cells() -> [Cell; 3] {
    [
        Cell::new(vec![0, 1], vec![0, 0]),
        Cell::new(vec![1, 0], vec![0, 0]),
        Cell::new(vec![1, 1], vec![1, 1]),
    ]
}

/// A Hardy model: the fixed cells plus `free` (default: every other cell).
pub fn hardy_model(free: Option<&BTreeSet<Cell>>) -> Result<EmpiricalModel, CatalogError> {
    let ty = hardy_type();
    let fixed: BTreeSet<Cell> = std::iter::once(hardy_possible_cell())
        .chain(hardy_impossible_cells())
        .collect();
    let chosen: BTreeSet<Cell> = match free {
        Some(s) => {
            for c in s {
                ty.check_cell(c)?;
                if fixed.contains(c) {
                    return Err(CatalogError::HardyFixed(ty.show_cell(c)));
                }
            }
            s.clone()
        }
        None => ty
            .all_measurements()
            .flat_map(|m| ty.all_outcomes().map(move |o| Cell::new(m.clone(), o)))
            .filter(|c| !fixed.contains(c))
            .collect(),
    };
    let e = EmpiricalModel::new(ty.clone(), std::iter::once(hardy_possible_cell()).chain(chosen))?;
    if let Some(m) = ty.all_measurements().find(|m| !e.is_defined_at(m)) {
        return Err(CatalogError::NotTotal(ty.show_measurement(&m)));
    }
    Ok(e)
}

// ---------------------------------------------------------------- KS

/// Columns of the 18-measurement, 9-context table (labels `m1`…`m18`).
pub const KS_TABLE: [[u8; 4]; 9] = [
    [1, 2, 3, 4],
    [1, 5, 6, 7],
    [8, 9, 3, 10],
    [8, 11, 7, 12],
    [2, 5, 13, 14],
    [9, 11, 14, 15],
    [16, 17, 4, 10],
    [16, 18, 6, 12],
    [17, 18, 13, 15],
];

pub fn ks_type() -> SystemType {
    let labels: Vec<String> = (1..=18).map(|k| format!("m{k}")).collect();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    SystemType::homogeneous(4, &refs, &["0", "1"]).expect("static type")
}

/// The 9 columns as joint measurements.
pub fn ks_columns() -> Vec<Vec<usize>> {
    KS_TABLE
        .iter()
        .map(|col| col.iter().map(|&k| usize::from(k) - 1).collect())
        .collect()
}

/// The unit vector with its 1 at `position`.
pub fn ks_unit(position: usize) -> Vec<usize> {
    (0..4).map(|i| usize::from(i == position)).collect()
}

/// `f(column k) = e_{k mod 4}`.
pub fn ks_default_assignment() -> Vec<Vec<usize>> {
    (0..9).map(|k| ks_unit(k % 4)).collect()
}

/// The equivariant closure of `{(m̄, f(m̄)) | m̄ ∈ P}`.
pub fn ks_model(f: &[Vec<usize>]) -> Result<EmpiricalModel, CatalogError> {
    if f.len() != 9 {
        return Err(CatalogError::KsArity(f.len()));
    }
    for (column, o) in f.iter().enumerate() {
        if o.len() != 4 || o.iter().any(|&x| x > 1) || o.iter().sum::<usize>() != 1 {
            return Err(CatalogError::KsValue { column });
        }
    }
    let ty = ks_type();
    let mut support = BTreeSet::new();
    for (m, o) in ks_columns().iter().zip(f) {
        for pi in Permutation::all(4) {
            support.insert(Cell::new(ty.act_measurement(&pi, m)?, ty.act_outcome(&pi, o)?));
        }
    }
    Ok(EmpiricalModel::new(ty, support)?)
}

/// Number of 1s that `f` places on the table entries: one per column.
pub fn ks_table_ones(f: &[Vec<usize>]) -> usize {
    f.iter().map(|o| o.iter().sum::<usize>()).sum()
}

/// Number of 1s on the table entries under a context-free assignment
/// `m_k ↦ value[k]`; every label occurs twice, so this is always even.
pub fn ks_noncontextual_ones(value: &[bool; 18]) -> usize {
    ks_columns().iter().flatten().filter(|&&m| value[m]).count()
}

// ---------------------------------------------------------------- NS vs NS^p

pub fn ns_counterexample_4x4() -> EmpiricalModel {
    let ty =
        SystemType::from_labels(&[&["X1", "X2"], &["Y1", "Y2"]], &[&["a1", "a2"], &["b1", "b2"]]).expect("static type");
    table(
        &ty,
        &[
            (&["X1", "Y1"], "1101"),
            (&["X1", "Y2"], "1011"),
            (&["X2", "Y1"], "1011"),
            (&["X2", "Y2"], "1101"),
        ],
    )
}

pub fn ns_counterexample_tripartite() -> EmpiricalModel {
    let ty = SystemType::from_labels(
        &[&["X"], &["Y"], &["Z1", "Z2"]],
        &[&["a1", "a2"], &["b1", "b2"], &["c"]],
    )
    .expect("static type");
    table(&ty, &[(&["X", "Y", "Z1"], "1101"), (&["X", "Y", "Z2"], "1011")])
}

// ---------------------------------------------------------------- PR box

pub fn pr_type() -> SystemType {
    SystemType::homogeneous(2, &["0", "1"], &["0", "1"]).expect("static type")
}

/// Support `o₁ ⊕ o₂ = m₁·m₂`.
pub fn pr_box_relational() -> EmpiricalModel {
    let ty = pr_type();
    let support: Vec<Cell> = ty
        .all_measurements()
        .flat_map(|m| {
            ty.all_outcomes()
                .filter(|o| (o[0] ^ o[1]) == (m[0] & m[1]))
                .map(|o| Cell::new(m.clone(), o))
                .collect::<Vec<_>>()
        })
        .collect();
    EmpiricalModel::new(ty, support).expect("static model")
}

/// ½ on the PR support, uniform measurement prior.
pub fn pr_box_probabilistic() -> ProbEmpiricalModel {
    let e = pr_box_relational();
    ProbEmpiricalModel::new(
        e.system_type().clone(),
        e.support().iter().map(|c| (c.clone(), ratio(1, 8))),
    )
    .expect("static model")
}

// ---------------------------------------------------------------- builtins

pub const BUILTIN_MODELS: [(&str, &str); 10] = [
    ("epr", "relational EPR model"),
    ("ghz", "GHZ model on P ∪ {111}"),
    ("ghz-p", "GHZ model restricted to P"),
    ("hardy", "Hardy model, all-ones completion"),
    ("hardy-quantum", "Hardy model from the quantum collapse"),
    ("ks", "KS model with f(column k) = e_(k mod 4)"),
    ("ns4x4", "bipartite NS model outside NS^p"),
    ("ns3", "tripartite NS model outside NS^p"),
    ("pr", "PR box support"),
    ("pr-prob", "PR box distribution"),
];

pub const BUILTIN_QUANTUM: [(&str, &str); 3] = [
    ("epr", "(|01⟩+|10⟩)/√2, computational basis"),
    ("ghz", "(|000⟩+|111⟩)/√2, X and Y bases"),
    ("hardy", "Hardy two-qubit system"),
];

pub fn builtin_model(name: &str) -> Option<AnyModel> {
    Some(match name {
        "epr" => AnyModel::Empirical(epr_model()),
        "ghz" => AnyModel::Empirical(ghz_model(None).expect("static model")),
        "ghz-p" => AnyModel::Empirical(
            ghz_model(None)
                .expect("static model")
                .restrict(&ghz_p())
                .expect("static rows"),
        ),
        "hardy" => AnyModel::Empirical(hardy_model(None).expect("static model")),
        "hardy-quantum" => {
            let q = hardy_system();
            let rows = q.system_type().all_measurements().collect();
            AnyModel::Empirical(
                q.collapse(&rows, crate::quantum::DEFAULT_EPSILON)
                    .expect("static system"),
            )
        }
        "ks" => AnyModel::Empirical(ks_model(&ks_default_assignment()).expect("static model")),
        "ns4x4" => AnyModel::Empirical(ns_counterexample_4x4()),
        "ns3" => AnyModel::Empirical(ns_counterexample_tripartite()),
        "pr" => AnyModel::Empirical(pr_box_relational()),
        "pr-prob" => AnyModel::Prob(pr_box_probabilistic()),
        _ => return None,
    })
}

pub fn builtin_quantum(name: &str) -> Option<QuantumRealization> {
    match name {
        "epr" => Some(epr_system()),
        "ghz" => Some(ghz_system()),
        "hardy" => Some(hardy_system()),
        _ => None,
    }
}
