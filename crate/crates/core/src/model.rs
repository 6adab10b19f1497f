//! System types, relational empirical models and relational hidden-variable
//! models.
//!
//! Labels are opaque strings. Internally every tuple is stored as a vector of
//! per-site label indices, so a support is a sorted set of index tuples and the
//! canonical order of a model is the lexicographic order of those tuples.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("a system type needs at least one site")]
    ZeroArity,
    #[error("measurement and outcome lists disagree on arity ({measurements} vs {outcomes})")]
    ArityMismatch { measurements: usize, outcomes: usize },
    #[error("site {site} has an empty {what} label list")]
    EmptyLabels { site: usize, what: &'static str },
    #[error("duplicate {what} label `{label}` at site {site}")]
    DuplicateLabel {
        site: usize,
        what: &'static str,
        label: String,
    },
    #[error("site {site} is out of range for arity {arity}")]
    SiteOutOfRange { site: usize, arity: usize },
    #[error("{what} label `{label}` is not declared at site {site}")]
    UnknownLabel {
        site: usize,
        what: &'static str,
        label: String,
    },
    #[error("{what} index {index} is out of range at site {site}")]
    IndexOutOfRange {
        site: usize,
        what: &'static str,
        index: usize,
    },
    #[error("tuple has {got} components, expected {expected}")]
    TupleLength { got: usize, expected: usize },
    #[error("hidden-variable label `{0}` is not declared")]
    UnknownLambda(String),
    #[error("hidden-variable index {0} is out of range")]
    LambdaOutOfRange(usize),
    #[error("duplicate hidden-variable label `{0}`")]
    DuplicateLambda(String),
    #[error("the hidden-variable label list is empty")]
    NoLambdas,
    #[error("partial tuple mentions {0} twice")]
    DuplicateSlot(String),
    #[error("partial tuple mentions the hidden variable but the model is empirical")]
    LambdaOnEmpirical,
    #[error("models have different system types")]
    TypeMismatch,
    #[error("sites have different {0} alphabets; the symmetric-group action is undefined")]
    Heterogeneous(&'static str),
    #[error("{0:?} is not a permutation")]
    BadPermutation(Vec<usize>),
    #[error("duplicate tuple {0}")]
    DuplicateTuple(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Per-site measurement and outcome label sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SystemType {
    measurements: Vec<Vec<String>>,
    outcomes: Vec<Vec<String>>,
}

fn check_labels(lists: &[Vec<String>], what: &'static str) -> Result<()> {
    for (site, labels) in lists.iter().enumerate() {
        if labels.is_empty() {
            return Err(ModelError::EmptyLabels { site, what });
        }
        let mut seen = BTreeSet::new();
        for l in labels {
            if !seen.insert(l.as_str()) {
                return Err(ModelError::DuplicateLabel {
                    site,
                    what,
                    label: l.clone(),
                });
            }
        }
    }
    Ok(())
}

impl SystemType {
    pub fn new(measurements: Vec<Vec<String>>, outcomes: Vec<Vec<String>>) -> Result<Self> {
        if measurements.len() != outcomes.len() {
            return Err(ModelError::ArityMismatch {
                measurements: measurements.len(),
                outcomes: outcomes.len(),
            });
        }
        if measurements.is_empty() {
            return Err(ModelError::ZeroArity);
        }
        check_labels(&measurements, "measurement")?;
        check_labels(&outcomes, "outcome")?;
        Ok(SystemType { measurements, outcomes })
    }

    pub fn from_labels(measurements: &[&[&str]], outcomes: &[&[&str]]) -> Result<Self> {
        let conv = |xs: &[&[&str]]| -> Vec<Vec<String>> {
            xs.iter().map(|s| s.iter().map(|l| l.to_string()).collect()).collect()
        };
        Self::new(conv(measurements), conv(outcomes))
    }

    /// The same measurement and outcome alphabets at each of `arity` sites.
    pub fn homogeneous(arity: usize, measurements: &[&str], outcomes: &[&str]) -> Result<Self> {
        Self::from_labels(&vec![measurements; arity], &vec![outcomes; arity])
    }

    pub fn arity(&self) -> usize {
        self.measurements.len()
    }

    pub fn measurements(&self, site: usize) -> &[String] {
        &self.measurements[site]
    }

    pub fn outcomes(&self, site: usize) -> &[String] {
        &self.outcomes[site]
    }

    pub fn measurement_radices(&self) -> Vec<usize> {
        self.measurements.iter().map(Vec::len).collect()
    }

    pub fn outcome_radices(&self) -> Vec<usize> {
        self.outcomes.iter().map(Vec::len).collect()
    }

    pub fn num_joint_measurements(&self) -> usize {
        self.measurement_radices().iter().product()
    }

    pub fn num_joint_outcomes(&self) -> usize {
        self.outcome_radices().iter().product()
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.arity() {
            return Err(ModelError::SiteOutOfRange {
                site,
                arity: self.arity(),
            });
        }
        Ok(())
    }

    pub fn measurement_index(&self, site: usize, label: &str) -> Result<usize> {
        self.check_site(site)?;
        self.measurements[site]
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| ModelError::UnknownLabel {
                site,
                what: "measurement",
                label: label.to_string(),
            })
    }

    pub fn outcome_index(&self, site: usize, label: &str) -> Result<usize> {
        self.check_site(site)?;
        self.outcomes[site]
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| ModelError::UnknownLabel {
                site,
                what: "outcome",
                label: label.to_string(),
            })
    }

    pub fn joint_measurement<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        self.check_len(labels.len())?;
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| self.measurement_index(i, l.as_ref()))
            .collect()
    }

    pub fn joint_outcome<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        self.check_len(labels.len())?;
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| self.outcome_index(i, l.as_ref()))
            .collect()
    }

    pub fn cell<S: AsRef<str>>(&self, m: &[S], o: &[S]) -> Result<Cell> {
        Ok(Cell {
            m: self.joint_measurement(m)?,
            o: self.joint_outcome(o)?,
        })
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.arity() {
            return Err(ModelError::TupleLength {
                got,
                expected: self.arity(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_measurement(&self, m: &[usize]) -> Result<()> {
        self.check_len(m.len())?;
        for (site, &x) in m.iter().enumerate() {
            if x >= self.measurements[site].len() {
                return Err(ModelError::IndexOutOfRange {
                    site,
                    what: "measurement",
                    index: x,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn check_outcome(&self, o: &[usize]) -> Result<()> {
        self.check_len(o.len())?;
        for (site, &x) in o.iter().enumerate() {
            if x >= self.outcomes[site].len() {
                return Err(ModelError::IndexOutOfRange {
                    site,
                    what: "outcome",
                    index: x,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn check_cell(&self, c: &Cell) -> Result<()> {
        self.check_measurement(&c.m)?;
        self.check_outcome(&c.o)
    }

    /// All joint measurements in lexicographic order.
    pub fn all_measurements(&self) -> MixedRadix {
        MixedRadix::new(self.measurement_radices())
    }

    /// All joint outcomes in lexicographic order.
    pub fn all_outcomes(&self) -> MixedRadix {
        MixedRadix::new(self.outcome_radices())
    }

    pub fn measurement_labels(&self, m: &[usize]) -> Vec<&str> {
        m.iter()
            .enumerate()
            .map(|(i, &x)| self.measurements[i][x].as_str())
            .collect()
    }

    pub fn outcome_labels(&self, o: &[usize]) -> Vec<&str> {
        o.iter()
            .enumerate()
            .map(|(i, &x)| self.outcomes[i][x].as_str())
            .collect()
    }

    pub fn show_measurement(&self, m: &[usize]) -> String {
        self.measurement_labels(m).join(",")
    }

    pub fn show_outcome(&self, o: &[usize]) -> String {
        self.outcome_labels(o).join(",")
    }

    pub fn show_cell(&self, c: &Cell) -> String {
        format!("({} | {})", self.show_measurement(&c.m), self.show_outcome(&c.o))
    }

    pub fn has_homogeneous_measurements(&self) -> bool {
        self.measurements.iter().all_equal()
    }

    pub fn has_homogeneous_outcomes(&self) -> bool {
        self.outcomes.iter().all_equal()
    }

    /// `π · m̄` for a joint measurement.
    pub fn act_measurement(&self, pi: &Permutation, m: &[usize]) -> Result<Vec<usize>> {
        if !self.has_homogeneous_measurements() {
            return Err(ModelError::Heterogeneous("measurement"));
        }
        self.check_measurement(m)?;
        pi.apply(m)
    }

    /// `π · ō` for a joint outcome.
    pub fn act_outcome(&self, pi: &Permutation, o: &[usize]) -> Result<Vec<usize>> {
        if !self.has_homogeneous_outcomes() {
            return Err(ModelError::Heterogeneous("outcome"));
        }
        self.check_outcome(o)?;
        pi.apply(o)
    }
}

/// Lexicographic enumeration of a finite product of ranges `0..r_i`.
#[derive(Clone, Debug)]
pub struct MixedRadix {
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl MixedRadix {
    pub fn new(radices: Vec<usize>) -> Self {
        let next = if radices.contains(&0) {
            None
        } else {
            Some(vec![0; radices.len()])
        };
        MixedRadix { radices, next }
    }
}

impl Iterator for MixedRadix {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.radices[pos] {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(current)
    }
}

/// A joint measurement together with a joint outcome, as label indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub m: Vec<usize>,
    pub o: Vec<usize>,
}

impl Cell {
    pub fn new(m: Vec<usize>, o: Vec<usize>) -> Self {
        Cell { m, o }
    }
}

/// A cell of a hidden-variable relation: `(m̄, ō, λ)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HvCell {
    pub m: Vec<usize>,
    pub o: Vec<usize>,
    pub l: usize,
}

impl HvCell {
    pub fn new(m: Vec<usize>, o: Vec<usize>, l: usize) -> Self {
        HvCell { m, o, l }
    }

    pub fn cell(&self) -> Cell {
        Cell::new(self.m.clone(), self.o.clone())
    }
}

pub(crate) fn row_range<'a>(support: &'a BTreeSet<Cell>, m: &[usize]) -> impl Iterator<Item = &'a Cell> + 'a {
    let lo = Cell::new(m.to_vec(), vec![0; m.len()]);
    let hi = Cell::new(m.to_vec(), vec![usize::MAX; m.len()]);
    support.range(lo..=hi)
}

/// A relation `e ⊆ M × O`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EmpiricalModel {
    ty: SystemType,
    support: BTreeSet<Cell>,
}

impl EmpiricalModel {
    pub fn new(ty: SystemType, cells: impl IntoIterator<Item = Cell>) -> Result<Self> {
        let mut support = BTreeSet::new();
        for c in cells {
            ty.check_cell(&c)?;
            if support.contains(&c) {
                return Err(ModelError::DuplicateTuple(ty.show_cell(&c)));
            }
            support.insert(c);
        }
        Ok(EmpiricalModel { ty, support })
    }

    /// Builds a model from label tuples.
    pub fn from_labels(ty: SystemType, cells: &[(&[&str], &[&str])]) -> Result<Self> {
        let cells = cells.iter().map(|(m, o)| ty.cell(m, o)).collect::<Result<Vec<_>>>()?;
        Self::new(ty, cells)
    }

    /// Set-semantics constructor: repeated cells are merged.
    pub(crate) fn from_set(ty: SystemType, support: BTreeSet<Cell>) -> Self {
        debug_assert!(support.iter().all(|c| ty.check_cell(c).is_ok()));
        EmpiricalModel { ty, support }
    }

    pub fn empty(ty: SystemType) -> Self {
        EmpiricalModel {
            ty,
            support: BTreeSet::new(),
        }
    }

    /// The full relation `M × O`.
    pub fn full(ty: SystemType) -> Self {
        let support = ty
            .all_measurements()
            .flat_map(|m| ty.all_outcomes().map(move |o| Cell::new(m.clone(), o)))
            .collect();
        EmpiricalModel { ty, support }
    }

    pub fn system_type(&self) -> &SystemType {
        &self.ty
    }

    pub fn support(&self) -> &BTreeSet<Cell> {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, m: &[usize], o: &[usize]) -> bool {
        self.support.contains(&Cell::new(m.to_vec(), o.to_vec()))
    }

    /// Outcomes `e(m̄)` in canonical order.
    pub fn outcomes_of(&self, m: &[usize]) -> Vec<Vec<usize>> {
        row_range(&self.support, m).map(|c| c.o.clone()).collect()
    }

    /// `e(m̄)↓`.
    pub fn is_defined_at(&self, m: &[usize]) -> bool {
        row_range(&self.support, m).next().is_some()
    }

    /// `dom(e)`: the joint measurements with at least one possible outcome.
    pub fn domain(&self) -> BTreeSet<Vec<usize>> {
        self.support.iter().map(|c| c.m.clone()).collect()
    }

    /// The support grouped by row.
    pub fn rows(&self) -> BTreeMap<Vec<usize>, Vec<Vec<usize>>> {
        let mut rows: BTreeMap<Vec<usize>, Vec<Vec<usize>>> = BTreeMap::new();
        for c in &self.support {
            rows.entry(c.m.clone()).or_default().push(c.o.clone());
        }
        rows
    }

    /// Measurements at `site` that occur in `dom(e)`, ascending.
    pub fn site_domain(&self, site: usize) -> Vec<usize> {
        self.support
            .iter()
            .map(|c| c.m[site])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// `e(s̄)↓` for a partial tuple.
    pub fn defined(&self, s: &PartialTuple) -> Result<bool> {
        let r = s.resolve(&self.ty, None)?;
        Ok(self.support.iter().any(|c| r.matches(&c.m, &c.o, None)))
    }

    /// Restriction `e_S` to a set of joint measurements.
    pub fn restrict(&self, s: &BTreeSet<Vec<usize>>) -> Result<Self> {
        for m in s {
            self.ty.check_measurement(m)?;
        }
        let support = self.support.iter().filter(|c| s.contains(&c.m)).cloned().collect();
        Ok(EmpiricalModel {
            ty: self.ty.clone(),
            support,
        })
    }

    /// Restriction with the measurement set given by labels.
    pub fn restrict_labels(&self, s: &[&[&str]]) -> Result<Self> {
        let set = s
            .iter()
            .map(|m| self.ty.joint_measurement(m))
            .collect::<Result<BTreeSet<_>>>()?;
        self.restrict(&set)
    }

    pub fn is_subset(&self, other: &EmpiricalModel) -> bool {
        self.ty == other.ty && self.support.is_subset(&other.support)
    }

    /// Closure of the support under the diagonal `S_n` action holds.
    pub fn equivariant(&self) -> Result<bool> {
        Ok(self.equivariance_counterexample()?.is_none())
    }

    /// First support cell (canonical order) and permutation whose image is missing.
    pub fn equivariance_counterexample(&self) -> Result<Option<(Cell, Permutation)>> {
        if !self.ty.has_homogeneous_measurements() {
            return Err(ModelError::Heterogeneous("measurement"));
        }
        if !self.ty.has_homogeneous_outcomes() {
            return Err(ModelError::Heterogeneous("outcome"));
        }
        let perms = Permutation::all(self.ty.arity());
        for c in &self.support {
            for p in &perms {
                let image = Cell::new(p.apply(&c.m)?, p.apply(&c.o)?);
                if !self.support.contains(&image) {
                    return Ok(Some((c.clone(), p.clone())));
                }
            }
        }
        Ok(None)
    }

    pub fn show(&self) -> String {
        self.support
            .iter()
            .map(|c| self.ty.show_cell(c))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A relation `h ⊆ M × O × Λ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HiddenVariableModel {
    ty: SystemType,
    lambdas: Vec<String>,
    support: BTreeSet<HvCell>,
}

impl HiddenVariableModel {
    pub fn new(ty: SystemType, lambdas: Vec<String>, cells: impl IntoIterator<Item = HvCell>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(ModelError::NoLambdas);
        }
        let mut seen = BTreeSet::new();
        for l in &lambdas {
            if !seen.insert(l.as_str()) {
                return Err(ModelError::DuplicateLambda(l.clone()));
            }
        }
        let mut support = BTreeSet::new();
        for c in cells {
            ty.check_measurement(&c.m)?;
            ty.check_outcome(&c.o)?;
            if c.l >= lambdas.len() {
                return Err(ModelError::LambdaOutOfRange(c.l));
            }
            if support.contains(&c) {
                return Err(ModelError::DuplicateTuple(format!(
                    "{} @ {}",
                    ty.show_cell(&c.cell()),
                    lambdas[c.l]
                )));
            }
            support.insert(c);
        }
        Ok(HiddenVariableModel { ty, lambdas, support })
    }

    /// `l0, l1, …` labels for `count` hidden-variable values.
    pub fn numbered_lambdas(count: usize) -> Vec<String> {
        (0..count).map(|k| format!("l{k}")).collect()
    }

    pub fn system_type(&self) -> &SystemType {
        &self.ty
    }

    pub fn lambdas(&self) -> &[String] {
        &self.lambdas
    }

    pub fn lambda_index(&self, label: &str) -> Result<usize> {
        self.lambdas
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| ModelError::UnknownLambda(label.to_string()))
    }

    pub fn support(&self) -> &BTreeSet<HvCell> {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, m: &[usize], o: &[usize], l: usize) -> bool {
        self.support.contains(&HvCell::new(m.to_vec(), o.to_vec(), l))
    }

    /// The relation `{(m̄, ō) | h(m̄, ō, λ)}` for each `λ`, indexed by `λ`.
    pub fn fibers(&self) -> Vec<BTreeSet<Cell>> {
        let mut out = vec![BTreeSet::new(); self.lambdas.len()];
        for c in &self.support {
            out[c.l].insert(c.cell());
        }
        out
    }

    /// `{m̄ | h(m̄)↓}`.
    pub fn domain(&self) -> BTreeSet<Vec<usize>> {
        self.support.iter().map(|c| c.m.clone()).collect()
    }

    /// `{λ | h(λ)↓}`.
    pub fn active_lambdas(&self) -> BTreeSet<usize> {
        self.support.iter().map(|c| c.l).collect()
    }

    /// `h(s̄)↓` for a partial tuple, possibly mentioning `λ`.
    pub fn defined(&self, s: &PartialTuple) -> Result<bool> {
        let r = s.resolve(&self.ty, Some(&self.lambdas))?;
        Ok(self.support.iter().any(|c| r.matches(&c.m, &c.o, Some(c.l))))
    }

    /// The empirical model realized by `h`: `e(m̄, ō) ⇔ ∃λ. h(m̄, ō, λ)`.
    pub fn induced_model(&self) -> EmpiricalModel {
        EmpiricalModel {
            ty: self.ty.clone(),
            support: self.support.iter().map(HvCell::cell).collect(),
        }
    }

    /// `h` realizes `e`.
    pub fn realizes(&self, e: &EmpiricalModel) -> bool {
        self.ty == e.ty && self.induced_model().support == e.support
    }

    pub fn show(&self) -> String {
        self.support
            .iter()
            .map(|c| format!("{}@{}", self.ty.show_cell(&c.cell()), self.lambdas[c.l]))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Argument position of a model relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Measurement(usize),
    Outcome(usize),
    Lambda,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Measurement(i) => write!(f, "m{}", i + 1),
            Slot::Outcome(i) => write!(f, "o{}", i + 1),
            Slot::Lambda => write!(f, "λ"),
        }
    }
}

/// A subsequence of argument positions with label values, used for `e(s̄)↓`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialTuple {
    entries: Vec<(Slot, String)>,
}

pub(crate) struct ResolvedPartial {
    m: Vec<Option<usize>>,
    o: Vec<Option<usize>>,
    l: Option<usize>,
}

impl ResolvedPartial {
    fn matches(&self, m: &[usize], o: &[usize], l: Option<usize>) -> bool {
        self.m.iter().zip(m).all(|(want, got)| want.is_none_or(|w| w == *got))
            && self.o.iter().zip(o).all(|(want, got)| want.is_none_or(|w| w == *got))
            && match (self.l, l) {
                (Some(w), Some(g)) => w == g,
                _ => true,
            }
    }
}

impl PartialTuple {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn measurement(mut self, site: usize, label: &str) -> Self {
        self.entries.push((Slot::Measurement(site), label.to_string()));
        self
    }

    pub fn outcome(mut self, site: usize, label: &str) -> Self {
        self.entries.push((Slot::Outcome(site), label.to_string()));
        self
    }

    pub fn lambda(mut self, label: &str) -> Self {
        self.entries.push((Slot::Lambda, label.to_string()));
        self
    }

    pub fn entries(&self) -> &[(Slot, String)] {
        &self.entries
    }

    /// `self ⊆ other` as sets of assignments.
    pub fn is_subsequence_of(&self, other: &PartialTuple) -> bool {
        self.entries.iter().all(|e| other.entries.contains(e))
    }

    pub(crate) fn resolve(&self, ty: &SystemType, lambdas: Option<&[String]>) -> Result<ResolvedPartial> {
        let n = ty.arity();
        let mut r = ResolvedPartial {
            m: vec![None; n],
            o: vec![None; n],
            l: None,
        };
        let mut seen = BTreeSet::new();
        for (slot, label) in &self.entries {
            if !seen.insert(*slot) {
                return Err(ModelError::DuplicateSlot(slot.to_string()));
            }
            if let Slot::Measurement(i) | Slot::Outcome(i) = *slot {
                if i >= n {
                    return Err(ModelError::SiteOutOfRange { site: i, arity: n });
                }
            }
            match *slot {
                Slot::Measurement(i) => r.m[i] = Some(ty.measurement_index(i, label)?),
                Slot::Outcome(i) => r.o[i] = Some(ty.outcome_index(i, label)?),
                Slot::Lambda => {
                    let ls = lambdas.ok_or(ModelError::LambdaOnEmpirical)?;
                    r.l = Some(
                        ls.iter()
                            .position(|l| l == label)
                            .ok_or_else(|| ModelError::UnknownLambda(label.clone()))?,
                    );
                }
            }
        }
        Ok(r)
    }
}

/// A permutation of sites, stored as the image of each index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &x in &images {
            if x >= images.len() || seen[x] {
                return Err(ModelError::BadPermutation(images));
            }
            seen[x] = true;
        }
        Ok(Permutation(images))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Every permutation of `n` sites, identity first.
    pub fn all(n: usize) -> Vec<Permutation> {
        (0..n).permutations(n).map(Permutation).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn image(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x] = i;
        }
        Permutation(inv)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&x| self.0[x]).collect())
    }

    /// `(π · t)_i = t_{π⁻¹(i)}`.
    pub fn apply<T: Clone>(&self, t: &[T]) -> Result<Vec<T>> {
        if t.len() != self.0.len() {
            return Err(ModelError::TupleLength {
                got: t.len(),
                expected: self.0.len(),
            });
        }
        let inv = self.inverse();
        Ok(inv.0.iter().map(|&j| t[j].clone()).collect())
    }
}
