//! Membership deciders: LHV by grid-cover search, NS^p by exact linear
//! programming, and the Hardy axiom family.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::constructions::{LocalGridFamily, DEFAULT_LAMBDA_BOUND};
use crate::lp::{maximize, LpOutcome};
use crate::model::{Cell, EmpiricalModel, SystemType};
use crate::probabilistic::ProbEmpiricalModel;
use crate::properties::{check_empirical, EmpiricalProperty, Verdict, Witness};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeciderError {
    #[error("more than {bound} instructions")]
    TooManyInstructions { bound: u128 },
    #[error("the model has an empty domain")]
    EmptyDomain,
    #[error("Hardy axioms need 2 sites with 2 measurements and 2 outcomes each; got {0}")]
    HardyShape(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

// ---------------------------------------------------------------- LHV

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LhvVerdict {
    pub member: bool,
    /// Grids whose graphs on `dom(e)` cover `e` (when a member).
    pub witness: Vec<LocalGridFamily>,
    /// A support tuple no admissible grid passes through (when not).
    pub refuter: Option<Cell>,
}

/// Backtracking search over grids total on `proj_i(dom(e))` whose graph on
/// `dom(e)` lies inside `e`.
struct GridSearch {
    /// `(site, measurement)` in site-major, declaration order.
    vars: Vec<(usize, usize)>,
    var_of: Vec<BTreeMap<usize, usize>>,
    outcome_counts: Vec<usize>,
    rows: Vec<(Vec<usize>, Vec<Vec<usize>>)>,
    rows_of_var: Vec<Vec<usize>>,
    assign: Vec<Option<usize>>,
}

impl GridSearch {
    fn new(e: &EmpiricalModel) -> Self {
        let ty = e.system_type();
        let n = ty.arity();
        let mut vars = Vec::new();
        let mut var_of = vec![BTreeMap::new(); n];
        for (i, slot) in var_of.iter_mut().enumerate() {
            for m in e.site_domain(i) {
                slot.insert(m, vars.len());
                vars.push((i, m));
            }
        }
        let rows: Vec<_> = e.rows().into_iter().collect();
        let mut rows_of_var = vec![Vec::new(); vars.len()];
        for (r, (m, _)) in rows.iter().enumerate() {
            for (i, x) in m.iter().enumerate() {
                rows_of_var[var_of[i][x]].push(r);
            }
        }
        GridSearch {
            assign: vec![None; vars.len()],
            vars,
            var_of,
            outcome_counts: (0..n).map(|i| ty.outcomes(i).len()).collect(),
            rows,
            rows_of_var,
        }
    }

    fn consistent(&self, r: usize) -> bool {
        let (m, outs) = &self.rows[r];
        outs.iter().any(|o| {
            m.iter().enumerate().all(|(i, x)| match self.assign[self.var_of[i][x]] {
                Some(v) => v == o[i],
                None => true,
            })
        })
    }

    fn var_ok(&self, v: usize) -> bool {
        self.rows_of_var[v].iter().all(|&r| self.consistent(r))
    }

    fn grid(&self) -> LocalGridFamily {
        let mut maps = vec![BTreeMap::new(); self.var_of.len()];
        for (k, &(i, m)) in self.vars.iter().enumerate() {
            maps[i].insert(m, self.assign[k].expect("complete assignment"));
        }
        LocalGridFamily::new(maps)
    }

    /// Visits complete assignments in lexicographic order until `visit` returns false.
    fn search(&mut self, k: usize, visit: &mut dyn FnMut(&Self) -> bool) -> bool {
        if k == self.vars.len() {
            return visit(self);
        }
        if self.assign[k].is_some() {
            return self.search(k + 1, visit);
        }
        let site = self.vars[k].0;
        for o in 0..self.outcome_counts[site] {
            self.assign[k] = Some(o);
            if self.var_ok(k) && !self.search(k + 1, visit) {
                self.assign[k] = None;
                return false;
            }
        }
        self.assign[k] = None;
        true
    }

    /// First admissible grid through `c`, if any.
    fn through(&mut self, c: &Cell) -> Option<LocalGridFamily> {
        self.assign.iter_mut().for_each(|a| *a = None);
        for (i, (m, o)) in c.m.iter().zip(&c.o).enumerate() {
            self.assign[self.var_of[i][m]] = Some(*o);
        }
        if !(0..self.rows.len()).all(|r| self.consistent(r)) {
            return None;
        }
        let mut found = None;
        self.search(0, &mut |s| {
            found = Some(s.grid());
            false
        });
        found
    }
}

pub fn decide_lhv(e: &EmpiricalModel) -> LhvVerdict {
    let mut search = GridSearch::new(e);
    let mut witness: Vec<LocalGridFamily> = Vec::new();
    for c in e.support() {
        if witness.iter().any(|g| g.apply(&c.m).as_deref() == Some(&c.o[..])) {
            continue;
        }
        match search.through(c) {
            Some(g) => witness.push(g),
            None => {
                return LhvVerdict {
                    member: false,
                    witness: Vec::new(),
                    refuter: Some(c.clone()),
                }
            }
        }
    }
    LhvVerdict {
        member: true,
        witness,
        refuter: None,
    }
}

/// All admissible grids (Mermin instructions) in lexicographic order.
pub fn enumerate_instructions(e: &EmpiricalModel) -> Result<Vec<LocalGridFamily>, DeciderError> {
    enumerate_instructions_bounded(e, DEFAULT_LAMBDA_BOUND)
}

pub fn enumerate_instructions_bounded(e: &EmpiricalModel, bound: u128) -> Result<Vec<LocalGridFamily>, DeciderError> {
    if e.is_empty() {
        return Err(DeciderError::EmptyDomain);
    }
    let mut search = GridSearch::new(e);
    let mut out = Vec::new();
    let mut overflow = false;
    search.search(0, &mut |s| {
        if out.len() as u128 >= bound {
            overflow = true;
            return false;
        }
        out.push(s.grid());
        true
    });
    if overflow {
        return Err(DeciderError::TooManyInstructions { bound });
    }
    Ok(out)
}

// ---------------------------------------------------------------- NS^p

/// A linear equation every PNS realization of `e` satisfies, over the
/// conditionals `p(ō | m̄)` of the support cells.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum NspEquation {
    /// `Σ_ō p(ō | m) = 1`.
    RowSum { m: Vec<usize> },
    /// `p(o_site = outcome | row) − p(o_site = outcome | base) = 0`.
    Marginal {
        site: usize,
        outcome: usize,
        row: Vec<usize>,
        base: Vec<usize>,
    },
}

impl NspEquation {
    pub fn coefficient(&self, c: &Cell) -> i64 {
        match self {
            NspEquation::RowSum { m } => i64::from(&c.m == m),
            NspEquation::Marginal {
                site,
                outcome,
                row,
                base,
            } => {
                let hit = c.o[*site] == *outcome;
                i64::from(hit && &c.m == row) - i64::from(hit && &c.m == base)
            }
        }
    }

    pub fn rhs(&self) -> Rational {
        match self {
            NspEquation::RowSum { .. } => Rational::one(),
            NspEquation::Marginal { .. } => Rational::zero(),
        }
    }

    pub fn describe(&self, ty: &SystemType) -> String {
        match self {
            NspEquation::RowSum { m } => format!("Σ p(· | {}) = 1", ty.show_measurement(m)),
            NspEquation::Marginal {
                site,
                outcome,
                row,
                base,
            } => format!(
                "p(o{} = {} | {}) = p(o{} = {} | {})",
                site + 1,
                ty.outcomes(*site)[*outcome],
                ty.show_measurement(row),
                site + 1,
                ty.outcomes(*site)[*outcome],
                ty.show_measurement(base)
            ),
        }
    }
}

/// A weighted combination of [`NspEquation`]s showing that no strictly
/// positive solution exists: every support cell gets a non-negative
/// coefficient, and either the right-hand side is negative or it is zero
/// while some coefficient is positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NspCertificate {
    pub terms: Vec<(NspEquation, Rational)>,
}

impl NspCertificate {
    /// Independent replay of the certificate against `e`.
    pub fn verify(&self, e: &EmpiricalModel) -> bool {
        let mut some_positive = false;
        for c in e.support() {
            let coeff = self.terms.iter().fold(Rational::zero(), |acc, (eq, y)| {
                acc + y * Rational::from_integer(eq.coefficient(c).into())
            });
            if coeff.is_negative() {
                return false;
            }
            some_positive |= coeff.is_positive();
        }
        let rhs = self
            .terms
            .iter()
            .fold(Rational::zero(), |acc, (eq, y)| acc + y * eq.rhs());
        rhs.is_negative() || (rhs.is_zero() && some_positive)
    }

    /// A cycle of rows linked by the marginal equations used, if any.
    pub fn row_cycle(&self) -> Option<Vec<Vec<usize>>> {
        let mut edges: BTreeSet<(usize, Vec<usize>, Vec<usize>)> = BTreeSet::new();
        for (eq, _) in &self.terms {
            if let NspEquation::Marginal { site, row, base, .. } = eq {
                let (a, b) = if row <= base { (row, base) } else { (base, row) };
                edges.insert((*site, a.clone(), b.clone()));
            }
        }
        let mut adj: BTreeMap<Vec<usize>, Vec<Vec<usize>>> = BTreeMap::new();
        for (_, a, b) in edges {
            if let Some(mut path) = path_between(&adj, &a, &b) {
                path.dedup();
                return Some(path);
            }
            adj.entry(a.clone()).or_default().push(b.clone());
            adj.entry(b).or_default().push(a);
        }
        None
    }

    pub fn describe(&self, ty: &SystemType) -> Vec<String> {
        self.terms
            .iter()
            .map(|(eq, y)| format!("{} × [{}]", format_rational(y), eq.describe(ty)))
            .collect()
    }
}

fn path_between(
    adj: &BTreeMap<Vec<usize>, Vec<Vec<usize>>>,
    from: &Vec<usize>,
    to: &Vec<usize>,
) -> Option<Vec<Vec<usize>>> {
    let mut prev: BTreeMap<&Vec<usize>, &Vec<usize>> = BTreeMap::new();
    let mut queue = std::collections::VecDeque::from([from]);
    let mut seen: BTreeSet<&Vec<usize>> = BTreeSet::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = vec![u.clone()];
            let mut cur = u;
            while let Some(&p) = prev.get(cur) {
                path.push(p.clone());
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        for v in adj.get(u).into_iter().flatten() {
            if seen.insert(v) {
                prev.insert(v, u);
                queue.push_back(v);
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NspVerdict {
    pub member: bool,
    /// Optimal minimum support conditional `t*`; `None` when not computed.
    pub optimum: Option<Rational>,
    /// Joint model with uniform prior on `dom(e)` collapsing to `e`.
    pub witness: Option<ProbEmpiricalModel>,
    pub certificate: Option<NspCertificate>,
}

/// The PNS equation system of `e`: row sums plus, per site, marginal
/// equalities between each row and the first row sharing its measurement there.
pub fn nsp_equations(e: &EmpiricalModel) -> Vec<NspEquation> {
    let ty = e.system_type();
    let rows = e.rows();
    let mut eqs: Vec<NspEquation> = rows.keys().map(|m| NspEquation::RowSum { m: m.clone() }).collect();
    for site in 0..ty.arity() {
        let mut groups: BTreeMap<usize, Vec<&Vec<usize>>> = BTreeMap::new();
        for m in rows.keys() {
            groups.entry(m[site]).or_default().push(m);
        }
        for ms in groups.values() {
            let base = ms[0];
            for &row in &ms[1..] {
                for outcome in 0..ty.outcomes(site).len() {
                    let touches = |m: &Vec<usize>| rows[m].iter().any(|o| o[site] == outcome);
                    if touches(row) || touches(base) {
                        eqs.push(NspEquation::Marginal {
                            site,
                            outcome,
                            row: row.clone(),
                            base: base.clone(),
                        });
                    }
                }
            }
        }
    }
    eqs
}

pub fn decide_nsp(e: &EmpiricalModel) -> NspVerdict {
    decide_nsp_with_tiebreak(e, None)
}

/// As [`decide_nsp`]; among maximizers of `t`, the witness also maximizes
/// `Σ w(c) p(c)` for the given cell weights.
pub fn decide_nsp_with_tiebreak(e: &EmpiricalModel, tiebreak: Option<&BTreeMap<Cell, Rational>>) -> NspVerdict {
    if e.is_empty() {
        return NspVerdict {
            member: true,
            optimum: None,
            witness: None,
            certificate: None,
        };
    }
    if let Err(v) = check_empirical(e, EmpiricalProperty::Ns) {
        if let Witness::Signalling {
            site,
            outcome,
            with,
            without,
        } = v.witness
        {
            let eq = NspEquation::Marginal {
                site,
                outcome,
                row: with,
                base: without,
            };
            return NspVerdict {
                member: false,
                optimum: None,
                witness: None,
                certificate: Some(NspCertificate {
                    terms: vec![(eq, Rational::one())],
                }),
            };
        }
    }

    let cells: Vec<&Cell> = e.support().iter().collect();
    let eqs = nsp_equations(e);
    // Columns: t, then s_c with p(c) = t + s_c.
    let a: Vec<Vec<Rational>> = eqs
        .iter()
        .map(|eq| {
            let coeffs: Vec<i64> = cells.iter().map(|c| eq.coefficient(c)).collect();
            std::iter::once(coeffs.iter().sum::<i64>())
                .chain(coeffs.iter().copied())
                .map(|x| Rational::from_integer(x.into()))
                .collect()
        })
        .collect();
    let b: Vec<Rational> = eqs.iter().map(NspEquation::rhs).collect();
    let width = cells.len() + 1;
    let mut objectives = vec![unit(width, 0)];
    if let Some(w) = tiebreak {
        let mut c = vec![Rational::zero(); width];
        for (k, cell) in cells.iter().enumerate() {
            if let Some(x) = w.get(cell) {
                c[k + 1] = x.clone();
                c[0] += x;
            }
        }
        objectives.push(c);
    }

    let terms = |y: Vec<Rational>| NspCertificate {
        terms: eqs.iter().cloned().zip(y).filter(|(_, y)| !y.is_zero()).collect(),
    };
    match maximize(&a, &b, &objectives) {
        LpOutcome::Optimal { z, values, dual } => {
            let t = values[0].clone();
            if t.is_positive() {
                let mut rows: BTreeMap<Vec<usize>, BTreeMap<Vec<usize>, Rational>> = BTreeMap::new();
                for (k, c) in cells.iter().enumerate() {
                    rows.entry(c.m.clone())
                        .or_default()
                        .insert(c.o.clone(), &z[0] + &z[k + 1]);
                }
                let witness = ProbEmpiricalModel::from_conditionals(e.system_type().clone(), None, &rows)
                    .expect("row sums are exactly 1");
                NspVerdict {
                    member: true,
                    optimum: Some(t),
                    witness: Some(witness),
                    certificate: None,
                }
            } else {
                NspVerdict {
                    member: false,
                    optimum: Some(t),
                    witness: None,
                    certificate: Some(terms(dual)),
                }
            }
        }
        LpOutcome::Infeasible { farkas } => NspVerdict {
            member: false,
            optimum: None,
            witness: None,
            certificate: Some(terms(farkas)),
        },
        LpOutcome::Unbounded { .. } => unreachable!("t is bounded by the row sums"),
    }
}

fn unit(width: usize, k: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); width];
    v[k] = Rational::one();
    v
}

// ---------------------------------------------------------------- Hardy

/// One of the 8 symmetry images of the Hardy cell pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HardyVariant {
    pub swap_x: bool,
    pub swap_y: bool,
    pub swap_outcomes: bool,
}

impl HardyVariant {
    pub const BASE: HardyVariant = HardyVariant {
        swap_x: false,
        swap_y: false,
        swap_outcomes: false,
    };

    pub fn all() -> Vec<HardyVariant> {
        (0..8u8)
            .map(|k| HardyVariant {
                swap_x: k & 4 != 0,
                swap_y: k & 2 != 0,
                swap_outcomes: k & 1 != 0,
            })
            .collect()
    }

    /// Cells `a, b, c, d` of the axiom `a → b ∨ c ∨ d`.
    pub fn cells(&self) -> [Cell; 4] {
        let x = usize::from(self.swap_x);
        let y = usize::from(self.swap_y);
        let r = usize::from(self.swap_outcomes);
        let g = 1 - r;
        [
            Cell::new(vec![x, y], vec![r, r]),
            Cell::new(vec![x, 1 - y], vec![r, r]),
            Cell::new(vec![1 - x, y], vec![r, r]),
            Cell::new(vec![1 - x, 1 - y], vec![g, g]),
        ]
    }

    pub fn name(&self) -> String {
        let parts: Vec<&str> = [
            (self.swap_x, "X1<->X2"),
            (self.swap_y, "Y1<->Y2"),
            (self.swap_outcomes, "R<->G"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, s)| *s)
        .collect();
        if parts.is_empty() {
            "base".to_string()
        } else {
            parts.join(",")
        }
    }
}

impl fmt::Display for HardyVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

pub fn is_hardy_shape(ty: &SystemType) -> bool {
    ty.arity() == 2 && (0..2).all(|i| ty.measurements(i).len() == 2 && ty.outcomes(i).len() == 2)
}

/// The variants whose antecedent holds while all three alternatives fail.
pub fn hardy_axioms(e: &EmpiricalModel) -> Result<Vec<HardyVariant>, DeciderError> {
    let ty = e.system_type();
    if !is_hardy_shape(ty) {
        return Err(DeciderError::HardyShape(format!(
            "{} site(s) with measurement counts {:?} and outcome counts {:?}",
            ty.arity(),
            ty.measurement_radices(),
            (0..ty.arity()).map(|i| ty.outcomes(i).len()).collect::<Vec<_>>()
        )));
    }
    Ok(HardyVariant::all()
        .into_iter()
        .filter(|v| {
            let [a, b, c, d] = v.cells();
            e.contains(&a.m, &a.o) && !e.contains(&b.m, &b.o) && !e.contains(&c.m, &c.o) && !e.contains(&d.m, &d.o)
        })
        .collect())
}

// ---------------------------------------------------------------- classify

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub total: Verdict,
    pub ns: Verdict,
    pub nsp: NspVerdict,
    pub lhv: LhvVerdict,
    /// `None` when the type is not of Hardy shape.
    pub hardy_violations: Option<Vec<HardyVariant>>,
}

pub fn classify(e: &EmpiricalModel) -> Result<Classification, DeciderError> {
    let total = check_empirical(e, EmpiricalProperty::Total);
    let ns = check_empirical(e, EmpiricalProperty::Ns);
    let nsp = decide_nsp(e);
    let lhv = decide_lhv(e);
    if lhv.member && !nsp.member {
        return Err(DeciderError::Inconsistent("LHV holds but NS^p fails".into()));
    }
    if nsp.member && ns.is_err() {
        return Err(DeciderError::Inconsistent("NS^p holds but NS fails".into()));
    }
    let hardy_violations = if is_hardy_shape(e.system_type()) {
        Some(hardy_axioms(e)?)
    } else {
        None
    };
    Ok(Classification {
        total,
        ns,
        nsp,
        lhv,
        hardy_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn bell() -> SystemType {
        SystemType::homogeneous(2, &["X", "Y"], &["0", "1"]).unwrap()
    }

    fn pr() -> EmpiricalModel {
        let ty = bell();
        let cells = ty
            .all_measurements()
            .flat_map(|m| {
                ty.all_outcomes()
                    .filter(|o| (o[0] ^ o[1]) == (m[0] & m[1]))
                    .map(|o| Cell::new(m.clone(), o))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        EmpiricalModel::new(ty, cells).unwrap()
    }

    #[test]
    fn full_relation_is_lhv_and_nsp() {
        let e = EmpiricalModel::full(bell());
        let v = decide_lhv(&e);
        assert!(v.member);
        assert_eq!(enumerate_instructions(&e).unwrap().len(), 16);
        let n = decide_nsp(&e);
        assert!(n.member);
        assert_eq!(n.optimum, Some(ratio(1, 4)));
        assert!(hardy_axioms(&e).unwrap().is_empty());
    }

    #[test]
    fn pr_box_is_nsp_not_lhv() {
        let e = pr();
        let v = decide_lhv(&e);
        assert!(!v.member);
        assert!(v.refuter.is_some());
        let n = decide_nsp(&e);
        assert!(n.member);
        assert_eq!(n.optimum, Some(ratio(1, 2)));
        let w = n.witness.unwrap();
        assert_eq!(w.possibilistic_collapse(), e);
        for c in e.support() {
            assert_eq!(w.conditional(&c.m, &c.o), Some(ratio(1, 2)));
        }
    }

    #[test]
    fn signalling_model_gets_single_equation() {
        let ty = bell();
        let e = EmpiricalModel::new(
            ty,
            vec![Cell::new(vec![0, 0], vec![0, 0]), Cell::new(vec![0, 1], vec![1, 1])],
        )
        .unwrap();
        let n = decide_nsp(&e);
        assert!(!n.member);
        let cert = n.certificate.unwrap();
        assert_eq!(cert.terms.len(), 1);
        assert!(cert.verify(&e));
        assert!(cert.row_cycle().is_none());
    }

    #[test]
    fn certificate_replay_rejects_tampering() {
        let e = pr();
        let bogus = NspCertificate {
            terms: vec![(NspEquation::RowSum { m: vec![0, 0] }, Rational::one())],
        };
        assert!(!bogus.verify(&e));
    }

    #[test]
    fn hardy_variants_are_distinct_patterns() {
        let all = HardyVariant::all();
        assert_eq!(all[0], HardyVariant::BASE);
        let patterns: BTreeSet<_> = all.iter().map(|v| v.cells().to_vec()).collect();
        assert_eq!(patterns.len(), 8);
        let bad = EmpiricalModel::full(SystemType::homogeneous(3, &["X", "Y"], &["0", "1"]).unwrap());
        assert!(matches!(hardy_axioms(&bad), Err(DeciderError::HardyShape(_))));
    }

    #[test]
    fn empty_model() {
        let e = EmpiricalModel::empty(bell());
        assert!(decide_lhv(&e).member);
        assert!(decide_nsp(&e).member);
        assert_eq!(enumerate_instructions(&e), Err(DeciderError::EmptyDomain));
        let c = classify(&e).unwrap();
        assert!(c.total.is_err());
    }

    #[test]
    fn instruction_bound() {
        let e = EmpiricalModel::full(bell());
        assert_eq!(
            enumerate_instructions_bounded(&e, 15),
            Err(DeciderError::TooManyInstructions { bound: 15 })
        );
    }
}
