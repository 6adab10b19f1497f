//! Exact-rational joint distributions on `M × O` and `M × O × Λ`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::model::{Cell, EmpiricalModel, HiddenVariableModel, HvCell, ModelError, SystemType};
use crate::properties::{check_hidden, HiddenProperty, Violation};
use crate::rational::{format_rational, to_f64, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("negative weight {0}")]
    NegativeWeight(String),
    #[error("weights sum to {0}, expected exactly 1")]
    NotNormalized(String),
    #[error("the hidden-variable model is not λ-independent: {0:?}")]
    NotLambdaIndependent(Box<Violation>),
    #[error("the possibilistic collapse of q is not the given model")]
    CollapseMismatch,
    #[error("{0}")]
    Shape(String),
    #[error("measurement ({0}) has probability zero")]
    ZeroRow(String),
}

/// A distribution `p : M × O → [0, 1]`; zero cells are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbEmpiricalModel {
    ty: SystemType,
    weights: BTreeMap<Cell, Rational>,
}

/// A distribution `q : M × O × Λ → [0, 1]`; zero cells are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbHVModel {
    ty: SystemType,
    lambdas: Vec<String>,
    weights: BTreeMap<HvCell, Rational>,
}

fn check_total<'a>(ws: impl Iterator<Item = &'a Rational>) -> Result<(), ProbError> {
    let total = ws.fold(Rational::zero(), |acc, w| acc + w);
    if !total.is_one() {
        return Err(ProbError::NotNormalized(format_rational(&total)));
    }
    Ok(())
}

impl ProbEmpiricalModel {
    pub fn new(ty: SystemType, entries: impl IntoIterator<Item = (Cell, Rational)>) -> Result<Self, ProbError> {
        let mut weights = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (c, w) in entries {
            ty.check_cell(&c)?;
            if !seen.insert(c.clone()) {
                return Err(ModelError::DuplicateTuple(ty.show_cell(&c)).into());
            }
            if w.is_negative() {
                return Err(ProbError::NegativeWeight(format_rational(&w)));
            }
            if !w.is_zero() {
                weights.insert(c, w);
            }
        }
        check_total(weights.values())?;
        Ok(ProbEmpiricalModel { ty, weights })
    }

    /// Joins per-row conditionals with a measurement prior (uniform when `None`).
    pub fn from_conditionals(
        ty: SystemType,
        prior: Option<&BTreeMap<Vec<usize>, Rational>>,
        rows: &BTreeMap<Vec<usize>, BTreeMap<Vec<usize>, Rational>>,
    ) -> Result<Self, ProbError> {
        let uniform = if rows.is_empty() {
            Rational::zero()
        } else {
            Rational::new(1.into(), (rows.len() as i64).into())
        };
        let mut entries = Vec::new();
        for (m, row) in rows {
            let theta = match prior {
                Some(p) => p.get(m).cloned().unwrap_or_else(Rational::zero),
                None => uniform.clone(),
            };
            for (o, w) in row {
                entries.push((Cell::new(m.clone(), o.clone()), &theta * w));
            }
        }
        Self::new(ty, entries)
    }

    pub fn system_type(&self) -> &SystemType {
        &self.ty
    }

    pub fn weights(&self) -> &BTreeMap<Cell, Rational> {
        &self.weights
    }

    pub fn weight(&self, c: &Cell) -> Rational {
        self.weights.get(c).cloned().unwrap_or_else(Rational::zero)
    }

    /// `p(m̄)`.
    pub fn measurement_mass(&self, m: &[usize]) -> Rational {
        self.weights
            .iter()
            .filter(|(c, _)| c.m == m)
            .fold(Rational::zero(), |acc, (_, w)| acc + w)
    }

    /// `p(ō | m̄)`, or `None` when `p(m̄) = 0`.
    pub fn conditional(&self, m: &[usize], o: &[usize]) -> Option<Rational> {
        let mass = self.measurement_mass(m);
        if mass.is_zero() {
            return None;
        }
        Some(self.weight(&Cell::new(m.to_vec(), o.to_vec())) / mass)
    }

    /// The same distribution with a single hidden-variable value carrying all mass.
    pub fn with_single_lambda(&self) -> ProbHVModel {
        ProbHVModel {
            ty: self.ty.clone(),
            lambdas: vec!["l0".to_string()],
            weights: self
                .weights
                .iter()
                .map(|(c, w)| (HvCell::new(c.m.clone(), c.o.clone(), 0), w.clone()))
                .collect(),
        }
    }

    pub fn possibilistic_collapse(&self) -> EmpiricalModel {
        EmpiricalModel::from_set(self.ty.clone(), self.weights.keys().cloned().collect())
    }
}

impl ProbHVModel {
    pub fn new(
        ty: SystemType,
        lambdas: Vec<String>,
        entries: impl IntoIterator<Item = (HvCell, Rational)>,
    ) -> Result<Self, ProbError> {
        let mut weights = BTreeMap::new();
        let mut cells = Vec::new();
        for (c, w) in entries {
            if w.is_negative() {
                return Err(ProbError::NegativeWeight(format_rational(&w)));
            }
            cells.push(c.clone());
            if !w.is_zero() {
                weights.insert(c, w);
            }
        }
        // Shape validation, including duplicates and λ range.
        HiddenVariableModel::new(ty.clone(), lambdas.clone(), cells)?;
        check_total(weights.values())?;
        Ok(ProbHVModel { ty, lambdas, weights })
    }

    pub fn system_type(&self) -> &SystemType {
        &self.ty
    }

    pub fn lambdas(&self) -> &[String] {
        &self.lambdas
    }

    pub fn weights(&self) -> &BTreeMap<HvCell, Rational> {
        &self.weights
    }

    /// Sums out the hidden variable.
    pub fn lambda_marginal(&self) -> ProbEmpiricalModel {
        let mut weights: BTreeMap<Cell, Rational> = BTreeMap::new();
        for (c, w) in &self.weights {
            *weights.entry(c.cell()).or_insert_with(Rational::zero) += w;
        }
        ProbEmpiricalModel {
            ty: self.ty.clone(),
            weights,
        }
    }

    pub fn possibilistic_collapse(&self) -> HiddenVariableModel {
        HiddenVariableModel::new(self.ty.clone(), self.lambdas.clone(), self.weights.keys().cloned())
            .expect("validated at construction")
    }
}

/// A joint distribution split into a prior on `X` and conditionals on `O`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition<X: Ord> {
    pub prior: BTreeMap<X, Rational>,
    pub conditionals: BTreeMap<X, BTreeMap<Vec<usize>, Rational>>,
}

fn decompose_map<X: Ord + Clone>(cells: impl Iterator<Item = (X, Vec<usize>, Rational)>) -> Decomposition<X> {
    let mut joint: BTreeMap<X, BTreeMap<Vec<usize>, Rational>> = BTreeMap::new();
    for (x, o, w) in cells {
        joint.entry(x).or_default().insert(o, w);
    }
    let mut prior = BTreeMap::new();
    let mut conditionals = BTreeMap::new();
    for (x, row) in joint {
        let theta = row.values().fold(Rational::zero(), |acc, w| acc + w);
        let cond = row.into_iter().map(|(o, w)| (o, w / &theta)).collect();
        prior.insert(x.clone(), theta);
        conditionals.insert(x, cond);
    }
    Decomposition { prior, conditionals }
}

/// Measurement prior `θ_p` and conditionals `p_m̄`.
pub fn decompose(p: &ProbEmpiricalModel) -> Decomposition<Vec<usize>> {
    decompose_map(p.weights.iter().map(|(c, w)| (c.m.clone(), c.o.clone(), w.clone())))
}

/// Prior on `M × Λ` and conditionals `q_{m̄,λ}`.
pub fn decompose_hidden(q: &ProbHVModel) -> Decomposition<(Vec<usize>, usize)> {
    decompose_map(
        q.weights
            .iter()
            .map(|(c, w)| ((c.m.clone(), c.l), c.o.clone(), w.clone())),
    )
}

fn recompose_cells<X: Ord + Clone>(d: &Decomposition<X>) -> Vec<(X, Vec<usize>, Rational)> {
    let mut out = Vec::new();
    for (x, theta) in &d.prior {
        if theta.is_zero() {
            continue;
        }
        if let Some(cond) = d.conditionals.get(x) {
            for (o, w) in cond {
                out.push((x.clone(), o.clone(), theta * w));
            }
        }
    }
    out
}

pub fn recompose(ty: SystemType, d: &Decomposition<Vec<usize>>) -> Result<ProbEmpiricalModel, ProbError> {
    ProbEmpiricalModel::new(ty, recompose_cells(d).into_iter().map(|(m, o, w)| (Cell::new(m, o), w)))
}

pub fn recompose_hidden(
    ty: SystemType,
    lambdas: Vec<String>,
    d: &Decomposition<(Vec<usize>, usize)>,
) -> Result<ProbHVModel, ProbError> {
    ProbHVModel::new(
        ty,
        lambdas,
        recompose_cells(d)
            .into_iter()
            .map(|((m, l), o, w)| (HvCell::new(m, o, l), w)),
    )
}

/// Shannon entropy in bits; zero entries contribute nothing.
pub fn entropy<'a>(dist: impl IntoIterator<Item = &'a Rational>) -> f64 {
    dist.into_iter()
        .map(to_f64)
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.log2())
        .sum()
}

/// The canonical lifting of a λ-independent relational model: weight
/// `1/(K·L·N)` on each support triple.
pub fn build_qh(h: &HiddenVariableModel) -> Result<ProbHVModel, ProbError> {
    if let Err(v) = check_hidden(h, HiddenProperty::Li) {
        return Err(ProbError::NotLambdaIndependent(Box::new(v)));
    }
    let l_count = h.active_lambdas().len() as i64;
    let n_count = h.domain().len() as i64;
    let mut k: BTreeMap<(&[usize], usize), i64> = BTreeMap::new();
    for c in h.support() {
        *k.entry((&c.m, c.l)).or_default() += 1;
    }
    let weights = h
        .support()
        .iter()
        .map(|c| {
            let w = k[&(c.m.as_slice(), c.l)] * l_count * n_count;
            (c.clone(), Rational::new(1.into(), w.into()))
        })
        .collect::<Vec<_>>();
    ProbHVModel::new(h.system_type().clone(), h.lambdas().to_vec(), weights)
}

/// `q` realizes `p`: same positive rows and equal conditionals on them.
pub fn realizes(q: &ProbHVModel, p: &ProbEmpiricalModel) -> Result<bool, ProbError> {
    if q.ty != p.ty {
        return Err(ModelError::TypeMismatch.into());
    }
    Ok(decompose(&q.lambda_marginal()).conditionals == decompose(p).conditionals)
}

fn binary_bipartite(ty: &SystemType) -> Result<(), ProbError> {
    if ty.arity() != 2 || (0..2).any(|i| ty.outcomes(i).len() != 2) {
        return Err(ProbError::Shape(
            "correlations need a bipartite type with two outcomes per site".into(),
        ));
    }
    Ok(())
}

/// `E(x, y) = Σ (−1)^{a+b} p(a, b | x, y)`, outcome index 0 read as 0 and 1 as 1.
pub fn correlation_e_indices(p: &ProbEmpiricalModel, x: usize, y: usize) -> Result<Rational, ProbError> {
    binary_bipartite(&p.ty)?;
    let m = vec![x, y];
    p.ty.check_measurement(&m)?;
    let mut e = Rational::zero();
    for a in 0..2 {
        for b in 0..2 {
            let c = p
                .conditional(&m, &[a, b])
                .ok_or_else(|| ProbError::ZeroRow(p.ty.show_measurement(&m)))?;
            if (a + b) % 2 == 0 {
                e += c;
            } else {
                e -= c;
            }
        }
    }
    Ok(e)
}

pub fn correlation_e(p: &ProbEmpiricalModel, x: &str, y: &str) -> Result<Rational, ProbError> {
    let m = p.ty.joint_measurement(&[x, y])?;
    correlation_e_indices(p, m[0], m[1])
}

/// `E(0,0) + E(1,0) + E(0,1) − E(1,1)` over measurement indices.
pub fn chsh_sum(p: &ProbEmpiricalModel) -> Result<Rational, ProbError> {
    binary_bipartite(&p.ty)?;
    if (0..2).any(|i| p.ty.measurements(i).len() != 2) {
        return Err(ProbError::Shape("CHSH needs two measurements per site".into()));
    }
    Ok(
        correlation_e_indices(p, 0, 0)? + correlation_e_indices(p, 1, 0)? + correlation_e_indices(p, 0, 1)?
            - correlation_e_indices(p, 1, 1)?,
    )
}

pub const CLASSICAL_CHSH_BOUND: f64 = 2.0;
pub const TSIRELSON_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Entropy comparison between `q` and the canonical `q^h` with the same collapse.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxEntropyReport {
    pub prior_entropy_qh: f64,
    pub prior_entropy_q: f64,
    /// `H(θ_{q^h}) − H(θ_q)`.
    pub prior_margin: f64,
    /// `H(q^h_{m̄,λ}) − H(q_{m̄,λ})` for each `(m̄, λ)` with `h(m̄, λ)↓`.
    pub conditional_margins: BTreeMap<(Vec<usize>, usize), f64>,
}

pub const ENTROPY_TOLERANCE: f64 = 1e-9;

impl MaxEntropyReport {
    pub fn min_conditional_margin(&self) -> f64 {
        self.conditional_margins.values().copied().fold(f64::INFINITY, f64::min)
    }

    /// Neither inequality is violated beyond the tolerance.
    pub fn holds(&self) -> bool {
        self.prior_margin >= -ENTROPY_TOLERANCE && self.conditional_margins.values().all(|&d| d >= -ENTROPY_TOLERANCE)
    }
}

pub fn max_entropy_report(h: &HiddenVariableModel, q: &ProbHVModel) -> Result<MaxEntropyReport, ProbError> {
    if &q.possibilistic_collapse() != h {
        return Err(ProbError::CollapseMismatch);
    }
    let qh = build_qh(h)?;
    let dh = decompose_hidden(&qh);
    let dq = decompose_hidden(q);
    let prior_entropy_qh = entropy(dh.prior.values());
    let prior_entropy_q = entropy(dq.prior.values());
    let conditional_margins = dh
        .conditionals
        .iter()
        .map(|(x, cond)| {
            let other = dq.conditionals.get(x).map_or(0.0, |c| entropy(c.values()));
            (x.clone(), entropy(cond.values()) - other)
        })
        .collect();
    Ok(MaxEntropyReport {
        prior_entropy_qh,
        prior_entropy_q,
        prior_margin: prior_entropy_qh - prior_entropy_q,
        conditional_margins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::properties::{check_prob, ProbProperty};
    use crate::rational::{int, ratio};

    fn pr_box() -> ProbEmpiricalModel {
        let ty = SystemType::homogeneous(2, &["0", "1"], &["0", "1"]).unwrap();
        let mut entries = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        if (a ^ b) == (x & y) {
                            entries.push((Cell::new(vec![x, y], vec![a, b]), ratio(1, 8)));
                        }
                    }
                }
            }
        }
        ProbEmpiricalModel::new(ty, entries).unwrap()
    }

    #[test]
    fn normalization_is_exact() {
        let ty = SystemType::homogeneous(1, &["X"], &["a", "b"]).unwrap();
        let err = ProbEmpiricalModel::new(
            ty.clone(),
            vec![
                (Cell::new(vec![0], vec![0]), ratio(1, 2)),
                (Cell::new(vec![0], vec![1]), ratio(49, 100)),
            ],
        )
        .unwrap_err();
        assert_eq!(err, ProbError::NotNormalized("99/100".into()));
        assert!(matches!(
            ProbEmpiricalModel::new(
                ty,
                vec![
                    (Cell::new(vec![0], vec![0]), ratio(3, 2)),
                    (Cell::new(vec![0], vec![1]), ratio(-1, 2)),
                ],
            ),
            Err(ProbError::NegativeWeight(_))
        ));
    }

    #[test]
    fn pr_box_correlations() {
        let p = pr_box();
        assert_eq!(correlation_e(&p, "0", "0").unwrap(), int(1));
        assert_eq!(correlation_e(&p, "1", "1").unwrap(), int(-1));
        assert_eq!(chsh_sum(&p).unwrap(), int(4));
        assert!(4.0 > TSIRELSON_BOUND);
    }

    #[test]
    fn product_of_uniform_locals_has_zero_chsh() {
        let ty = SystemType::homogeneous(2, &["0", "1"], &["0", "1"]).unwrap();
        let entries = ty
            .all_measurements()
            .flat_map(|m| ty.all_outcomes().map(move |o| (Cell::new(m.clone(), o), ratio(1, 16))))
            .collect::<Vec<_>>();
        let p = ProbEmpiricalModel::new(ty, entries).unwrap();
        assert_eq!(chsh_sum(&p).unwrap(), int(0));
    }

    #[test]
    fn decomposition_roundtrip_pr() {
        let p = pr_box();
        let d = decompose(&p);
        assert!(d.prior.values().all(|t| *t == ratio(1, 4)));
        assert!(d
            .conditionals
            .values()
            .flat_map(|c| c.values())
            .all(|w| *w == ratio(1, 2)));
        assert_eq!(recompose(p.system_type().clone(), &d).unwrap(), p);
    }

    #[test]
    fn entropy_basics() {
        let u = vec![ratio(1, 4); 4];
        assert!((entropy(&u) - 2.0).abs() < 1e-12);
        assert_eq!(entropy(&[int(1)]), 0.0);
        assert_eq!(entropy(&[int(1), int(0)]), 0.0);
    }

    #[test]
    fn qh_small_cases() {
        let ty = SystemType::homogeneous(2, &["X"], &["a", "b"]).unwrap();
        let full = HiddenVariableModel::new(
            ty.clone(),
            vec!["l".into()],
            ty.all_outcomes().map(|o| HvCell::new(vec![0, 0], o, 0)),
        )
        .unwrap();
        let q = build_qh(&full).unwrap();
        assert!(q.weights().values().all(|w| *w == ratio(1, 4)));
        assert_eq!(q.possibilistic_collapse(), full);
        assert!(check_prob(&q, ProbProperty::Pl).is_ok());

        let two = HiddenVariableModel::new(
            ty,
            HiddenVariableModel::numbered_lambdas(2),
            vec![
                HvCell::new(vec![0, 0], vec![0, 1], 0),
                HvCell::new(vec![0, 0], vec![1, 0], 1),
            ],
        )
        .unwrap();
        let q = build_qh(&two).unwrap();
        assert!(q.weights().values().all(|w| *w == ratio(1, 2)));
    }

    #[test]
    fn qh_requires_lambda_independence() {
        let ty = SystemType::homogeneous(2, &["X", "Y"], &["a"]).unwrap();
        let h = HiddenVariableModel::new(
            ty,
            HiddenVariableModel::numbered_lambdas(2),
            vec![
                HvCell::new(vec![0, 0], vec![0, 0], 0),
                HvCell::new(vec![1, 1], vec![0, 0], 1),
            ],
        )
        .unwrap();
        assert!(matches!(build_qh(&h), Err(ProbError::NotLambdaIndependent(_))));
    }

    #[test]
    fn realizes_detects_perturbation() {
        let p = pr_box();
        let q = p.with_single_lambda();
        assert!(realizes(&q, &p).unwrap());
        let mut entries: Vec<_> = p.weights().iter().map(|(c, w)| (c.clone(), w.clone())).collect();
        // Move mass inside the first row: conditionals 1/2,1/2 become 1/3,2/3.
        entries[0].1 = ratio(1, 12);
        entries[1].1 = ratio(2, 12);
        let skew = ProbEmpiricalModel::new(p.system_type().clone(), entries).unwrap();
        assert!(!realizes(&skew.with_single_lambda(), &p).unwrap());
        assert!(realizes(&skew.with_single_lambda(), &skew).unwrap());
    }

    #[test]
    fn max_entropy_prior_skew() {
        let ty = SystemType::homogeneous(1, &["X", "Y"], &["a"]).unwrap();
        let h = HiddenVariableModel::new(
            ty.clone(),
            vec!["l".into()],
            vec![HvCell::new(vec![0], vec![0], 0), HvCell::new(vec![1], vec![0], 0)],
        )
        .unwrap();
        let qh = build_qh(&h).unwrap();
        let same = max_entropy_report(&h, &qh).unwrap();
        assert!(same.prior_margin.abs() < 1e-12);
        assert!(same.holds());
        let skew = ProbHVModel::new(
            ty,
            vec!["l".into()],
            vec![
                (HvCell::new(vec![0], vec![0], 0), ratio(2, 3)),
                (HvCell::new(vec![1], vec![0], 0), ratio(1, 3)),
            ],
        )
        .unwrap();
        let r = max_entropy_report(&h, &skew).unwrap();
        assert!(r.prior_margin > 1e-3);
        assert!(r.holds());
    }
}
