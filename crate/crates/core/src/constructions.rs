//! Canonical hidden-variable realizations of empirical models and the
//! upgrade of λ-independent local models to strongly deterministic ones.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{EmpiricalModel, HiddenVariableModel, HvCell, MixedRadix, ModelError, SystemType};
use crate::properties::{check_hidden, HiddenProperty, Violation};

/// Default cap on the number of hidden-variable values a construction may emit.
pub const DEFAULT_LAMBDA_BOUND: u128 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("construction needs {count} hidden-variable values, above the bound {bound}")]
    TooManyLambdas { count: String, bound: u128 },
    #[error("precondition failed: {0:?}")]
    Precondition(Box<Violation>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("internal check failed: {0}")]
    Internal(String),
}

/// Per-site partial functions `f_i : D_i → O_i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalGridFamily {
    pub maps: Vec<BTreeMap<usize, usize>>,
}

impl LocalGridFamily {
    pub fn new(maps: Vec<BTreeMap<usize, usize>>) -> Self {
        LocalGridFamily { maps }
    }

    /// `(f_1(m_1), …, f_n(m_n))` when every component is defined.
    pub fn apply(&self, m: &[usize]) -> Option<Vec<usize>> {
        m.iter().zip(&self.maps).map(|(x, f)| f.get(x).copied()).collect()
    }

    /// The outcome rows of the family, e.g. `RRR/GGG` for a homogeneous type.
    pub fn show(&self, ty: &SystemType) -> String {
        let mut keys: BTreeSet<usize> = BTreeSet::new();
        for f in &self.maps {
            keys.extend(f.keys());
        }
        keys.iter()
            .map(|k| {
                self.maps
                    .iter()
                    .enumerate()
                    .map(|(i, f)| f.get(k).map_or("-", |&o| ty.outcomes(i)[o].as_str()))
                    .collect::<Vec<_>>()
                    .join("")
            })
            .collect::<Vec<_>>()
            .join("/")
    }

    /// Per-site `measurement→outcome` listing for arbitrary types.
    pub fn describe(&self, ty: &SystemType) -> String {
        self.maps
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f.iter()
                    .map(|(&m, &o)| format!("{}→{}", ty.measurements(i)[m], ty.outcomes(i)[o]))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(" ; ")
    }
}

impl fmt::Display for LocalGridFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.maps)
    }
}

/// A total function on `dom(e)` whose graph lies in `e`.
pub type ChoiceFunction = BTreeMap<Vec<usize>, Vec<usize>>;

fn labels(count: usize) -> Vec<String> {
    HiddenVariableModel::numbered_lambdas(count)
}

fn guard(count: u128, bound: u128) -> Result<(), ConstructionError> {
    if count > bound {
        return Err(ConstructionError::TooManyLambdas {
            count: count.to_string(),
            bound,
        });
    }
    Ok(())
}

/// Single-valued realization: `Λ = {l0}`.
pub fn realize_sv(e: &EmpiricalModel) -> HiddenVariableModel {
    HiddenVariableModel::new(
        e.system_type().clone(),
        labels(1),
        e.support().iter().map(|c| HvCell::new(c.m.clone(), c.o.clone(), 0)),
    )
    .expect("cells come from a valid model")
}

/// Strongly deterministic realization with one λ per support tuple.
///
/// The λ for `(m̄, ō)` is the product of the singleton maps `m̄_i ↦ ō_i`, which
/// is defined on `m̄` alone. An empty model gets one λ with empty support.
pub fn realize_sd(e: &EmpiricalModel) -> HiddenVariableModel {
    let count = e.len().max(1);
    HiddenVariableModel::new(
        e.system_type().clone(),
        labels(count),
        e.support()
            .iter()
            .enumerate()
            .map(|(k, c)| HvCell::new(c.m.clone(), c.o.clone(), k)),
    )
    .expect("cells come from a valid model")
}

/// Number of choice functions of `e`, saturating at `u128::MAX`.
pub fn choice_function_count(e: &EmpiricalModel) -> u128 {
    e.rows()
        .values()
        .fold(1u128, |acc, os| acc.saturating_mul(os.len() as u128))
}

/// All choice functions of `e` in lexicographic order.
pub fn choice_functions(e: &EmpiricalModel, bound: u128) -> Result<Vec<ChoiceFunction>, ConstructionError> {
    guard(choice_function_count(e), bound)?;
    let rows = e.rows();
    let radices: Vec<usize> = rows.values().map(Vec::len).collect();
    Ok(MixedRadix::new(radices)
        .map(|pick| {
            rows.iter()
                .zip(pick)
                .map(|((m, os), k)| (m.clone(), os[k].clone()))
                .collect()
        })
        .collect())
}

/// Weakly deterministic, λ-independent realization: `Λ` = choice functions.
pub fn realize_wd_li(e: &EmpiricalModel) -> Result<HiddenVariableModel, ConstructionError> {
    realize_wd_li_bounded(e, DEFAULT_LAMBDA_BOUND)
}

pub fn realize_wd_li_bounded(e: &EmpiricalModel, bound: u128) -> Result<HiddenVariableModel, ConstructionError> {
    let fs = choice_functions(e, bound)?;
    let cells = fs
        .iter()
        .enumerate()
        .flat_map(|(k, f)| f.iter().map(move |(m, o)| HvCell::new(m.clone(), o.clone(), k)));
    Ok(HiddenVariableModel::new(
        e.system_type().clone(),
        labels(fs.len()),
        cells,
    )?)
}

/// The hidden-variable model with one λ per grid family:
/// `h(m̄, ō, λ) ⇔ m̄ ∈ dom ∧ f_λ(m̄) = ō`.
pub fn hidden_from_grids(
    ty: &SystemType,
    dom: &BTreeSet<Vec<usize>>,
    grids: &[LocalGridFamily],
) -> Result<HiddenVariableModel, ConstructionError> {
    let mut cells = Vec::new();
    for (k, g) in grids.iter().enumerate() {
        for m in dom {
            if let Some(o) = g.apply(m) {
                cells.push(HvCell::new(m.clone(), o, k));
            }
        }
    }
    Ok(HiddenVariableModel::new(ty.clone(), labels(grids.len().max(1)), cells)?)
}

/// From a λI ∧ L model, builds an equivalent λI ∧ SD model whose values are
/// pairs `(λ, Φ)` with `Φ_i : M⁺_i → O_i` and `Φ_i(m) ∈ O^i_{m,λ}`.
pub fn transform_li_loc_to_sd(h: &HiddenVariableModel) -> Result<HiddenVariableModel, ConstructionError> {
    transform_li_loc_to_sd_bounded(h, DEFAULT_LAMBDA_BOUND)
}

pub fn transform_li_loc_to_sd_bounded(
    h: &HiddenVariableModel,
    bound: u128,
) -> Result<HiddenVariableModel, ConstructionError> {
    for p in [HiddenProperty::Li, HiddenProperty::L] {
        check_hidden(h, p).map_err(|v| ConstructionError::Precondition(Box::new(v)))?;
    }
    let ty = h.system_type();
    let n = ty.arity();
    let m_plus = h.domain();
    let lambda_plus = h.active_lambdas();
    let site_plus: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            m_plus
                .iter()
                .map(|m| m[i])
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        })
        .collect();

    // O^i_{m,λ}
    let mut local: BTreeMap<(usize, usize, usize), BTreeSet<usize>> = BTreeMap::new();
    for c in h.support() {
        for i in 0..n {
            local.entry((c.l, i, c.m[i])).or_default().insert(c.o[i]);
        }
    }
    let local_set = |l: usize, i: usize, m: usize| -> Vec<usize> {
        local
            .get(&(l, i, m))
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    };

    // O_{m̄,λ} = ∏_i O^i_{m̄_i,λ} on M⁺ × Λ⁺.
    let fibers = h.fibers();
    for &l in &lambda_plus {
        for m in &m_plus {
            let row: BTreeSet<Vec<usize>> = fibers[l].iter().filter(|c| &c.m == m).map(|c| c.o.clone()).collect();
            let sets: Vec<Vec<usize>> = (0..n).map(|i| local_set(l, i, m[i])).collect();
            let product: BTreeSet<Vec<usize>> = MixedRadix::new(sets.iter().map(Vec::len).collect())
                .map(|ix| ix.iter().enumerate().map(|(i, &k)| sets[i][k]).collect())
                .collect();
            if row.is_empty() || row != product {
                return Err(ConstructionError::Internal(format!(
                    "outcome set of ({}) at λ={} is not the product of its local sets",
                    ty.show_measurement(m),
                    h.lambdas()[l]
                )));
            }
        }
    }

    // Coordinates of Φ: (site, measurement) pairs in site-major order.
    let coords: Vec<(usize, usize)> = site_plus
        .iter()
        .enumerate()
        .flat_map(|(i, ms)| ms.iter().map(move |&m| (i, m)))
        .collect();
    let mut count: u128 = 0;
    for &l in &lambda_plus {
        let per = coords.iter().fold(1u128, |acc, &(i, m)| {
            acc.saturating_mul(local_set(l, i, m).len() as u128)
        });
        count = count.saturating_add(per);
    }
    guard(count, bound)?;

    let mut cells = Vec::new();
    let mut next = 0usize;
    for &l in &lambda_plus {
        let choices: Vec<Vec<usize>> = coords.iter().map(|&(i, m)| local_set(l, i, m)).collect();
        for pick in MixedRadix::new(choices.iter().map(Vec::len).collect()) {
            let mut phi = vec![BTreeMap::new(); n];
            for (k, &(i, m)) in coords.iter().enumerate() {
                phi[i].insert(m, choices[k][pick[k]]);
            }
            let g = LocalGridFamily::new(phi);
            for m in &m_plus {
                let o = g.apply(m).expect("Φ is total on M⁺_i");
                cells.push(HvCell::new(m.clone(), o, next));
            }
            next += 1;
        }
    }
    Ok(HiddenVariableModel::new(ty.clone(), labels(next.max(1)), cells)?)
}

/// `h1` and `h2` realize the same empirical model.
pub fn equivalent(h1: &HiddenVariableModel, h2: &HiddenVariableModel) -> Result<bool, ConstructionError> {
    if h1.system_type() != h2.system_type() {
        return Err(ModelError::TypeMismatch.into());
    }
    Ok(h1.induced_model() == h2.induced_model())
}
