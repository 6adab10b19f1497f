//! Checkers for the relational and probabilistic model properties.
//!
//! Each checker evaluates the quantified definition directly and returns
//! `Err(Violation)` with the first failing instance in canonical order.
//! Hidden-variable checks iterate over λ outermost.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::model::{row_range, Cell, EmpiricalModel, HiddenVariableModel, MixedRadix, PartialTuple, SystemType};
use crate::probabilistic::{ProbEmpiricalModel, ProbHVModel};
use crate::rational::{format_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EmpiricalProperty {
    Wd,
    Sd,
    Ns,
    Ml,
    Total,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HiddenProperty {
    Wd,
    Sd,
    Sv,
    Li,
    Oi,
    Pi,
    L,
    Ml,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProbProperty {
    Pns,
    Pli,
    Poi,
    Ppi,
    Pl,
    Pml,
}

impl EmpiricalProperty {
    pub const ALL: [EmpiricalProperty; 5] = [
        EmpiricalProperty::Wd,
        EmpiricalProperty::Sd,
        EmpiricalProperty::Ns,
        EmpiricalProperty::Ml,
        EmpiricalProperty::Total,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EmpiricalProperty::Wd => "WD",
            EmpiricalProperty::Sd => "SD",
            EmpiricalProperty::Ns => "NS",
            EmpiricalProperty::Ml => "ML",
            EmpiricalProperty::Total => "TOTAL",
        }
    }
}

impl HiddenProperty {
    pub const ALL: [HiddenProperty; 8] = [
        HiddenProperty::Wd,
        HiddenProperty::Sd,
        HiddenProperty::Sv,
        HiddenProperty::Li,
        HiddenProperty::Oi,
        HiddenProperty::Pi,
        HiddenProperty::L,
        HiddenProperty::Ml,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HiddenProperty::Wd => "WD",
            HiddenProperty::Sd => "SD",
            HiddenProperty::Sv => "SV",
            HiddenProperty::Li => "LI",
            HiddenProperty::Oi => "OI",
            HiddenProperty::Pi => "PI",
            HiddenProperty::L => "L",
            HiddenProperty::Ml => "ML",
        }
    }
}

impl ProbProperty {
    pub const ALL: [ProbProperty; 6] = [
        ProbProperty::Pns,
        ProbProperty::Pli,
        ProbProperty::Poi,
        ProbProperty::Ppi,
        ProbProperty::Pl,
        ProbProperty::Pml,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProbProperty::Pns => "PNS",
            ProbProperty::Pli => "PLI",
            ProbProperty::Poi => "POI",
            ProbProperty::Ppi => "PPI",
            ProbProperty::Pl => "PL",
            ProbProperty::Pml => "PML",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown property `{0}`")]
pub struct UnknownProperty(pub String);

macro_rules! name_impls {
    ($t:ty) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $t {
            type Err = UnknownProperty;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let up = s.trim().to_uppercase();
                let up = match up.as_str() {
                    "ΛI" | "LAMBDAI" => "LI".to_string(),
                    "PΛI" | "PLAMBDAI" => "PLI".to_string(),
                    _ => up,
                };
                Self::ALL
                    .iter()
                    .copied()
                    .find(|p| p.name() == up)
                    .ok_or_else(|| UnknownProperty(s.to_string()))
            }
        }
    };
}

name_impls!(EmpiricalProperty);
name_impls!(HiddenProperty);
name_impls!(ProbProperty);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Property {
    Empirical(EmpiricalProperty),
    Hidden(HiddenProperty),
    Prob(ProbProperty),
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Empirical(p) => p.fmt(f),
            Property::Hidden(p) => p.fmt(f),
            Property::Prob(p) => p.fmt(f),
        }
    }
}

/// The instance of a failed quantifier body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Two distinct outcomes for one joint measurement.
    TwoOutcomes {
        m: Vec<usize>,
        first: Vec<usize>,
        second: Vec<usize>,
    },
    /// Two support cells agree on the measurement at `site` but not the outcome.
    SiteClash { site: usize, first: Cell, second: Cell },
    /// `outcome` is possible at `site` under `with` but not under `without`,
    /// although `without` is defined and shares the measurement at `site`.
    Signalling {
        site: usize,
        outcome: usize,
        with: Vec<usize>,
        without: Vec<usize>,
    },
    /// The two sides of the measurement-locality biconditional differ at `m`.
    MeasurementLocality { m: Vec<usize> },
    /// A joint measurement with no possible outcome.
    Undefined { m: Vec<usize> },
    /// `|Λ| ≠ 1`.
    LambdaCount { count: usize },
    /// `h(present, λ)↓` and `h(missing)↓` but not `h(missing, λ)↓`.
    LambdaDependence { present: Vec<usize>, missing: Vec<usize> },
    /// `h(m, first)` and `h(m, second)` but not the mix taking `site` from `first`.
    OutcomeDependence {
        m: Vec<usize>,
        site: usize,
        first: Vec<usize>,
        second: Vec<usize>,
    },
    /// Every local marginal of `(m, o)` is possible but the joint cell is not.
    NonLocal { m: Vec<usize>, o: Vec<usize> },
    /// `p(outcome | with) ≠ p(outcome | without)` at `site`.
    ProbSignalling {
        site: usize,
        outcome: usize,
        with: Vec<usize>,
        without: Vec<usize>,
        lhs: Rational,
        rhs: Rational,
    },
    /// `q(λ | m) ≠ q(λ | other)`.
    ProbLambdaDependence {
        m: Vec<usize>,
        other: Vec<usize>,
        lhs: Rational,
        rhs: Rational,
    },
    /// `q(o_site | m, λ) ≠ q(o_site | o_rest, m, λ)` where `o` holds both.
    ProbOutcomeDependence {
        m: Vec<usize>,
        site: usize,
        o: Vec<usize>,
        lhs: Rational,
        rhs: Rational,
    },
    /// `q(outcome | m, λ) ≠ q(outcome | m_site, λ)`.
    ProbParameterDependence {
        m: Vec<usize>,
        site: usize,
        outcome: usize,
        lhs: Rational,
        rhs: Rational,
    },
    /// `q(o | m, λ) ≠ ∏ q(o_i | m_i, λ)`.
    ProbNonLocal {
        m: Vec<usize>,
        o: Vec<usize>,
        lhs: Rational,
        rhs: Rational,
    },
    /// `p(m) ≠ ∏ p(m_i)`.
    ProbMeasurementLocality {
        m: Vec<usize>,
        lhs: Rational,
        rhs: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub property: Property,
    pub lambda: Option<usize>,
    pub witness: Witness,
}

pub type Verdict = Result<(), Violation>;

fn fail(property: Property, lambda: Option<usize>, witness: Witness) -> Verdict {
    Err(Violation {
        property,
        lambda,
        witness,
    })
}

// ---------------------------------------------------------------------------
// Fiber-level checks shared by empirical and hidden-variable models.

fn rows(fiber: &BTreeSet<Cell>) -> BTreeMap<&[usize], Vec<&[usize]>> {
    let mut out: BTreeMap<&[usize], Vec<&[usize]>> = BTreeMap::new();
    for c in fiber {
        out.entry(&c.m).or_default().push(&c.o);
    }
    out
}

fn weak_determinism(fiber: &BTreeSet<Cell>) -> Option<Witness> {
    rows(fiber).into_iter().find_map(|(m, os)| {
        (os.len() > 1).then(|| Witness::TwoOutcomes {
            m: m.to_vec(),
            first: os[0].to_vec(),
            second: os[1].to_vec(),
        })
    })
}

fn strong_determinism(n: usize, fiber: &BTreeSet<Cell>) -> Option<Witness> {
    for site in 0..n {
        let mut seen: BTreeMap<usize, &Cell> = BTreeMap::new();
        for c in fiber {
            match seen.get(&c.m[site]) {
                Some(a) if a.o[site] != c.o[site] => {
                    return Some(Witness::SiteClash {
                        site,
                        first: (*a).clone(),
                        second: c.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    seen.insert(c.m[site], c);
                }
            }
        }
    }
    None
}

fn signalling(ty: &SystemType, fiber: &BTreeSet<Cell>) -> Option<Witness> {
    for site in 0..ty.arity() {
        // m_site -> (joint measurement -> outcomes possible at site)
        let mut groups: BTreeMap<usize, BTreeMap<&[usize], BTreeSet<usize>>> = BTreeMap::new();
        for c in fiber {
            groups
                .entry(c.m[site])
                .or_default()
                .entry(&c.m)
                .or_default()
                .insert(c.o[site]);
        }
        for rowsets in groups.values() {
            if rowsets.len() < 2 {
                continue;
            }
            for outcome in 0..ty.outcomes(site).len() {
                let with = rowsets.iter().find(|(_, s)| s.contains(&outcome));
                let without = rowsets.iter().find(|(_, s)| !s.contains(&outcome));
                if let (Some((w, _)), Some((wo, _))) = (with, without) {
                    return Some(Witness::Signalling {
                        site,
                        outcome,
                        with: w.to_vec(),
                        without: wo.to_vec(),
                    });
                }
            }
        }
    }
    None
}

fn site_domains(n: usize, fiber: &BTreeSet<Cell>) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| {
            fiber
                .iter()
                .map(|c| c.m[i])
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        })
        .collect()
}

/// First element of `∏ sets` (lexicographic) rejected by `keep`.
fn first_in_product(sets: &[Vec<usize>], keep: impl Fn(&[usize]) -> bool) -> Option<Vec<usize>> {
    MixedRadix::new(sets.iter().map(Vec::len).collect())
        .map(|ix| ix.iter().enumerate().map(|(i, &k)| sets[i][k]).collect::<Vec<_>>())
        .find(|t| !keep(t))
}

fn measurement_locality(n: usize, fiber: &BTreeSet<Cell>) -> Option<Witness> {
    if fiber.is_empty() {
        return None;
    }
    let dom: BTreeSet<&[usize]> = fiber.iter().map(|c| c.m.as_slice()).collect();
    let doms = site_domains(n, fiber);
    let product: usize = doms.iter().map(Vec::len).product();
    if product == dom.len() {
        return None;
    }
    first_in_product(&doms, |m| dom.contains(m)).map(|m| Witness::MeasurementLocality { m })
}

/// Outcomes possible at each site for each site measurement: `h(m, o, λ)↓`.
fn local_outcomes(n: usize, fiber: &BTreeSet<Cell>) -> Vec<BTreeMap<usize, BTreeSet<usize>>> {
    let mut out = vec![BTreeMap::<usize, BTreeSet<usize>>::new(); n];
    for c in fiber {
        for (i, slot) in out.iter_mut().enumerate() {
            slot.entry(c.m[i]).or_default().insert(c.o[i]);
        }
    }
    out
}

fn locality(n: usize, fiber: &BTreeSet<Cell>) -> Option<Witness> {
    let local = local_outcomes(n, fiber);
    for (m, os) in rows(fiber) {
        let sets: Vec<Vec<usize>> = (0..n).map(|i| local[i][&m[i]].iter().copied().collect()).collect();
        let product: usize = sets.iter().map(Vec::len).product();
        if product == os.len() {
            continue;
        }
        let present: BTreeSet<&[usize]> = os.into_iter().collect();
        if let Some(o) = first_in_product(&sets, |o| present.contains(o)) {
            return Some(Witness::NonLocal { m: m.to_vec(), o });
        }
    }
    None
}

fn outcome_independence(n: usize, fiber: &BTreeSet<Cell>) -> Option<Witness> {
    for (m, os) in rows(fiber) {
        let present: BTreeSet<&[usize]> = os.iter().copied().collect();
        for site in 0..n {
            for a in &os {
                for b in &os {
                    let mut mix = b.to_vec();
                    mix[site] = a[site];
                    if !present.contains(mix.as_slice()) {
                        return Some(Witness::OutcomeDependence {
                            m: m.to_vec(),
                            site,
                            first: a.to_vec(),
                            second: b.to_vec(),
                        });
                    }
                }
            }
        }
    }
    None
}

/// The equivalent row-product form: `h(m, o, λ) ↔ ⋀ h(m, o_i, λ)↓`.
fn outcome_independence_product_form(n: usize, fiber: &BTreeSet<Cell>) -> Option<(Vec<usize>, Vec<usize>)> {
    for (m, os) in rows(fiber) {
        let sets: Vec<Vec<usize>> = (0..n)
            .map(|i| os.iter().map(|o| o[i]).collect::<BTreeSet<_>>().into_iter().collect())
            .collect();
        let present: BTreeSet<&[usize]> = os.iter().copied().collect();
        if let Some(o) = first_in_product(&sets, |o| present.contains(o)) {
            return Some((m.to_vec(), o));
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Public checkers.

pub fn check_empirical(e: &EmpiricalModel, p: EmpiricalProperty) -> Verdict {
    let ty = e.system_type();
    let n = ty.arity();
    let fiber = e.support();
    let prop = Property::Empirical(p);
    let witness = match p {
        EmpiricalProperty::Wd => weak_determinism(fiber),
        EmpiricalProperty::Sd => strong_determinism(n, fiber),
        EmpiricalProperty::Ns => signalling(ty, fiber),
        EmpiricalProperty::Ml => measurement_locality(n, fiber),
        EmpiricalProperty::Total => ty
            .all_measurements()
            .find(|m| !e.is_defined_at(m))
            .map(|m| Witness::Undefined { m }),
    };
    match witness {
        Some(w) => fail(prop, None, w),
        None => Ok(()),
    }
}

pub fn check_hidden(h: &HiddenVariableModel, p: HiddenProperty) -> Verdict {
    let ty = h.system_type();
    let n = ty.arity();
    let prop = Property::Hidden(p);
    match p {
        HiddenProperty::Sv => {
            return if h.lambdas().len() == 1 {
                Ok(())
            } else {
                fail(
                    prop,
                    None,
                    Witness::LambdaCount {
                        count: h.lambdas().len(),
                    },
                )
            }
        }
        HiddenProperty::Li => {
            let dom = h.domain();
            for (l, fiber) in h.fibers().iter().enumerate() {
                let Some(present) = fiber.iter().next() else {
                    continue;
                };
                let fdom: BTreeSet<&[usize]> = fiber.iter().map(|c| c.m.as_slice()).collect();
                if let Some(missing) = dom.iter().find(|m| !fdom.contains(m.as_slice())) {
                    return fail(
                        prop,
                        Some(l),
                        Witness::LambdaDependence {
                            present: present.m.clone(),
                            missing: missing.clone(),
                        },
                    );
                }
            }
            return Ok(());
        }
        _ => {}
    }
    for (l, fiber) in h.fibers().iter().enumerate() {
        let witness = match p {
            HiddenProperty::Wd => weak_determinism(fiber),
            HiddenProperty::Sd => strong_determinism(n, fiber),
            HiddenProperty::Oi => outcome_independence(n, fiber),
            HiddenProperty::Pi => signalling(ty, fiber),
            HiddenProperty::L => locality(n, fiber),
            HiddenProperty::Ml => measurement_locality(n, fiber),
            HiddenProperty::Sv | HiddenProperty::Li => unreachable!(),
        };
        if let Some(w) = witness {
            return fail(prop, Some(l), w);
        }
    }
    Ok(())
}

/// Outcome independence in its row-product form. Returns the first
/// `(m, o, λ)` with every site outcome possible in the row but the cell absent.
pub fn check_outcome_independence_product_form(h: &HiddenVariableModel) -> Option<(Vec<usize>, Vec<usize>, usize)> {
    let n = h.system_type().arity();
    h.fibers()
        .iter()
        .enumerate()
        .find_map(|(l, f)| outcome_independence_product_form(n, f).map(|(m, o)| (m, o, l)))
}

// ---------------------------------------------------------------------------
// Probabilistic checks.

/// Marginal tables of a joint distribution on `M × O × Λ`.
struct Marginals {
    /// q(m̄)
    meas: BTreeMap<Vec<usize>, Rational>,
    /// q(m̄, λ)
    row: BTreeMap<(Vec<usize>, usize), Rational>,
    /// q(m̄, ō, λ)
    cell: BTreeMap<(Vec<usize>, Vec<usize>, usize), Rational>,
    /// per site: q(m_i, λ)
    site: Vec<BTreeMap<(usize, usize), Rational>>,
    /// per site: q(m_i, o_i, λ)
    site_out: Vec<BTreeMap<(usize, usize, usize), Rational>>,
    /// per site: q(m̄, o_i, λ)
    row_site_out: Vec<BTreeMap<(Vec<usize>, usize, usize), Rational>>,
    /// per site: q(m̄, ō_{-i}, λ) keyed by ō with site i zeroed
    row_rest_out: Vec<BTreeMap<(Vec<usize>, Vec<usize>, usize), Rational>>,
}

fn add(map_entry: &mut Rational, w: &Rational) {
    *map_entry += w;
}

impl Marginals {
    fn new(q: &ProbHVModel) -> Self {
        let n = q.system_type().arity();
        let mut mg = Marginals {
            meas: BTreeMap::new(),
            row: BTreeMap::new(),
            cell: BTreeMap::new(),
            site: vec![BTreeMap::new(); n],
            site_out: vec![BTreeMap::new(); n],
            row_site_out: vec![BTreeMap::new(); n],
            row_rest_out: vec![BTreeMap::new(); n],
        };
        for (c, w) in q.weights() {
            add(mg.meas.entry(c.m.clone()).or_insert_with(Rational::zero), w);
            add(mg.row.entry((c.m.clone(), c.l)).or_insert_with(Rational::zero), w);
            mg.cell.insert((c.m.clone(), c.o.clone(), c.l), w.clone());
            for i in 0..n {
                add(mg.site[i].entry((c.m[i], c.l)).or_insert_with(Rational::zero), w);
                add(
                    mg.site_out[i]
                        .entry((c.m[i], c.o[i], c.l))
                        .or_insert_with(Rational::zero),
                    w,
                );
                add(
                    mg.row_site_out[i]
                        .entry((c.m.clone(), c.o[i], c.l))
                        .or_insert_with(Rational::zero),
                    w,
                );
                let mut rest = c.o.clone();
                rest[i] = 0;
                add(
                    mg.row_rest_out[i]
                        .entry((c.m.clone(), rest, c.l))
                        .or_insert_with(Rational::zero),
                    w,
                );
            }
        }
        mg
    }
}

fn lookup<K: Ord>(map: &BTreeMap<K, Rational>, key: &K) -> Rational {
    map.get(key).cloned().unwrap_or_else(Rational::zero)
}

/// PNS on the λ-marginal.
fn prob_signalling(ty: &SystemType, q: &ProbHVModel) -> Option<Witness> {
    let n = ty.arity();
    let mut meas: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    let mut site_out: Vec<BTreeMap<(Vec<usize>, usize), Rational>> = vec![BTreeMap::new(); n];
    for (c, w) in q.weights() {
        add(meas.entry(c.m.clone()).or_insert_with(Rational::zero), w);
        for (i, t) in site_out.iter_mut().enumerate() {
            add(t.entry((c.m.clone(), c.o[i])).or_insert_with(Rational::zero), w);
        }
    }
    for site in 0..n {
        let mut groups: BTreeMap<usize, Vec<&Vec<usize>>> = BTreeMap::new();
        for m in meas.keys() {
            groups.entry(m[site]).or_default().push(m);
        }
        for ms in groups.values() {
            if ms.len() < 2 {
                continue;
            }
            for outcome in 0..ty.outcomes(site).len() {
                let cond = |m: &Vec<usize>| lookup(&site_out[site], &(m.clone(), outcome)) / &meas[m];
                let first = cond(ms[0]);
                if let Some(other) = ms[1..].iter().find(|m| cond(m) != first) {
                    return Some(Witness::ProbSignalling {
                        site,
                        outcome,
                        with: ms[0].clone(),
                        without: (*other).clone(),
                        lhs: first,
                        rhs: cond(other),
                    });
                }
            }
        }
    }
    None
}

fn prob_measurement_locality(ty: &SystemType, q: &ProbHVModel) -> Option<Witness> {
    let n = ty.arity();
    let mut meas: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    let mut site: Vec<BTreeMap<usize, Rational>> = vec![BTreeMap::new(); n];
    for (c, w) in q.weights() {
        add(meas.entry(c.m.clone()).or_insert_with(Rational::zero), w);
        for (i, t) in site.iter_mut().enumerate() {
            add(t.entry(c.m[i]).or_insert_with(Rational::zero), w);
        }
    }
    ty.all_measurements().find_map(|m| {
        let lhs = lookup(&meas, &m);
        let rhs = m
            .iter()
            .enumerate()
            .fold(Rational::one(), |acc, (i, x)| acc * lookup(&site[i], x));
        (lhs != rhs).then_some(Witness::ProbMeasurementLocality { m, lhs, rhs })
    })
}

pub fn check_prob(q: &ProbHVModel, p: ProbProperty) -> Verdict {
    let ty = q.system_type();
    let n = ty.arity();
    let prop = Property::Prob(p);
    let done = |w: Option<Witness>, l: Option<usize>| match w {
        Some(w) => fail(prop, l, w),
        None => Ok(()),
    };
    match p {
        ProbProperty::Pns => return done(prob_signalling(ty, q), None),
        ProbProperty::Pml => return done(prob_measurement_locality(ty, q), None),
        _ => {}
    }
    let mg = Marginals::new(q);
    for l in 0..q.lambdas().len() {
        let lrows: Vec<&Vec<usize>> = mg.row.keys().filter(|(_, k)| *k == l).map(|(m, _)| m).collect();
        let witness = match p {
            ProbProperty::Pli => {
                let ms: Vec<&Vec<usize>> = mg.meas.keys().collect();
                let cond = |m: &Vec<usize>| lookup(&mg.row, &(m.clone(), l)) / &mg.meas[m];
                ms.first().and_then(|first| {
                    let v = cond(first);
                    ms[1..]
                        .iter()
                        .find(|m| cond(m) != v)
                        .map(|other| Witness::ProbLambdaDependence {
                            m: (*first).clone(),
                            other: (*other).clone(),
                            lhs: v.clone(),
                            rhs: cond(other),
                        })
                })
            }
            ProbProperty::Poi => lrows.iter().find_map(|m| {
                let rm = &mg.row[&((*m).clone(), l)];
                (0..n).find_map(|site| {
                    mg.row_rest_out[site]
                        .range(((*m).clone(), Vec::new(), 0)..)
                        .take_while(|((mm, _, _), _)| mm == *m)
                        .filter(|((_, _, ll), _)| *ll == l)
                        .find_map(|((_, rest, _), rest_mass)| {
                            (0..ty.outcomes(site).len()).find_map(|o| {
                                let lhs = lookup(&mg.row_site_out[site], &((*m).clone(), o, l)) / rm;
                                let mut full = rest.clone();
                                full[site] = o;
                                let rhs = lookup(&mg.cell, &((*m).clone(), full.clone(), l)) / rest_mass;
                                (lhs != rhs).then(|| Witness::ProbOutcomeDependence {
                                    m: (*m).clone(),
                                    site,
                                    o: full,
                                    lhs,
                                    rhs,
                                })
                            })
                        })
                })
            }),
            ProbProperty::Ppi => lrows.iter().find_map(|m| {
                let rm = &mg.row[&((*m).clone(), l)];
                (0..n).find_map(|site| {
                    (0..ty.outcomes(site).len()).find_map(|o| {
                        let lhs = lookup(&mg.row_site_out[site], &((*m).clone(), o, l)) / rm;
                        let rhs = lookup(&mg.site_out[site], &(m[site], o, l)) / &mg.site[site][&(m[site], l)];
                        (lhs != rhs).then(|| Witness::ProbParameterDependence {
                            m: (*m).clone(),
                            site,
                            outcome: o,
                            lhs,
                            rhs,
                        })
                    })
                })
            }),
            ProbProperty::Pl => lrows.iter().find_map(|m| {
                let rm = &mg.row[&((*m).clone(), l)];
                ty.all_outcomes().find_map(|o| {
                    let lhs = lookup(&mg.cell, &((*m).clone(), o.clone(), l)) / rm;
                    let rhs = (0..n).fold(Rational::one(), |acc, i| {
                        acc * lookup(&mg.site_out[i], &(m[i], o[i], l)) / &mg.site[i][&(m[i], l)]
                    });
                    (lhs != rhs).then_some(Witness::ProbNonLocal {
                        m: (*m).clone(),
                        o,
                        lhs,
                        rhs,
                    })
                })
            }),
            ProbProperty::Pns | ProbProperty::Pml => unreachable!(),
        };
        if let Some(w) = witness {
            return fail(prop, Some(l), w);
        }
    }
    Ok(())
}

/// Checks a probabilistic empirical model; λ-properties see a single λ.
pub fn check_prob_empirical(p: &ProbEmpiricalModel, prop: ProbProperty) -> Verdict {
    check_prob(&p.with_single_lambda(), prop)
}

// ---------------------------------------------------------------------------
// Witness replay: substitute the witness into the definition.

fn has(fiber: &BTreeSet<Cell>, m: &[usize], o: &[usize]) -> bool {
    fiber.contains(&Cell::new(m.to_vec(), o.to_vec()))
}

fn defined_at(fiber: &BTreeSet<Cell>, m: &[usize]) -> bool {
    row_range(fiber, m).next().is_some()
}

/// `fiber(·, o at site, m-site fixed)↓`-style queries through partial tuples.
fn defined_partial(ty: &SystemType, fiber: &BTreeSet<Cell>, s: &PartialTuple) -> bool {
    EmpiricalModel::from_set(ty.clone(), fiber.clone())
        .defined(s)
        .unwrap_or(false)
}

fn joint_partial(ty: &SystemType, m: &[usize]) -> PartialTuple {
    m.iter().enumerate().fold(PartialTuple::new(), |s, (i, &x)| {
        s.measurement(i, &ty.measurements(i)[x])
    })
}

fn replay_relational(
    ty: &SystemType,
    fiber: &BTreeSet<Cell>,
    dom_all: Option<&BTreeSet<Vec<usize>>>,
    w: &Witness,
) -> bool {
    let n = ty.arity();
    match w {
        Witness::TwoOutcomes { m, first, second } => first != second && has(fiber, m, first) && has(fiber, m, second),
        Witness::SiteClash { site, first, second } => {
            fiber.contains(first)
                && fiber.contains(second)
                && first.m[*site] == second.m[*site]
                && first.o[*site] != second.o[*site]
        }
        Witness::Signalling {
            site,
            outcome,
            with,
            without,
        } => {
            let lab = &ty.outcomes(*site)[*outcome];
            with[*site] == without[*site]
                && defined_partial(ty, fiber, &joint_partial(ty, with).outcome(*site, lab))
                && defined_at(fiber, without)
                && !defined_partial(ty, fiber, &joint_partial(ty, without).outcome(*site, lab))
        }
        Witness::MeasurementLocality { m } => {
            let lhs = defined_at(fiber, m);
            let rhs = (0..n).all(|i| {
                defined_partial(
                    ty,
                    fiber,
                    &PartialTuple::new().measurement(i, &ty.measurements(i)[m[i]]),
                )
            });
            lhs != rhs
        }
        Witness::Undefined { m } => !defined_at(fiber, m),
        Witness::LambdaDependence { present, missing } => {
            defined_at(fiber, present) && dom_all.is_some_and(|d| d.contains(missing)) && !defined_at(fiber, missing)
        }
        Witness::OutcomeDependence { m, site, first, second } => {
            let mut mix = second.clone();
            mix[*site] = first[*site];
            has(fiber, m, first) && has(fiber, m, second) && !has(fiber, m, &mix)
        }
        Witness::NonLocal { m, o } => {
            defined_at(fiber, m)
                && (0..n).all(|i| {
                    defined_partial(
                        ty,
                        fiber,
                        &PartialTuple::new()
                            .measurement(i, &ty.measurements(i)[m[i]])
                            .outcome(i, &ty.outcomes(i)[o[i]]),
                    )
                })
                && !has(fiber, m, o)
        }
        _ => false,
    }
}

impl Violation {
    /// Re-evaluates the quantifier body of an empirical property on the witness.
    pub fn refutes_empirical(&self, e: &EmpiricalModel) -> bool {
        matches!(self.property, Property::Empirical(_))
            && replay_relational(e.system_type(), e.support(), None, &self.witness)
    }

    /// Re-evaluates the quantifier body of a hidden-variable property on the witness.
    pub fn refutes_hidden(&self, h: &HiddenVariableModel) -> bool {
        if !matches!(self.property, Property::Hidden(_)) {
            return false;
        }
        if let Witness::LambdaCount { count } = self.witness {
            return count == h.lambdas().len() && count != 1;
        }
        let Some(l) = self.lambda else { return false };
        let Some(fiber) = h.fibers().into_iter().nth(l) else {
            return false;
        };
        let dom = h.domain();
        replay_relational(h.system_type(), &fiber, Some(&dom), &self.witness)
    }

    /// Recomputes both sides of a probabilistic witness by direct summation.
    pub fn refutes_prob(&self, q: &ProbHVModel) -> bool {
        let n = q.system_type().arity();
        let mass = |m: &[Option<usize>], o: &[Option<usize>], l: Option<usize>| -> Rational {
            q.weights()
                .iter()
                .filter(|(c, _)| {
                    (0..n).all(|i| m[i].is_none_or(|x| c.m[i] == x) && o[i].is_none_or(|x| c.o[i] == x))
                        && l.is_none_or(|x| c.l == x)
                })
                .fold(Rational::zero(), |acc, (_, w)| acc + w)
        };
        let full = |t: &[usize]| t.iter().map(|&x| Some(x)).collect::<Vec<_>>();
        let only = |i: usize, x: usize| {
            let mut v = vec![None; n];
            v[i] = Some(x);
            v
        };
        let none = vec![None; n];
        let l = self.lambda;
        let (lhs, rhs) = match &self.witness {
            Witness::ProbSignalling {
                site,
                outcome,
                with,
                without,
                ..
            } => {
                if with[*site] != without[*site] {
                    return false;
                }
                let a = mass(&full(with), &only(*site, *outcome), None) / mass(&full(with), &none, None);
                let b = mass(&full(without), &only(*site, *outcome), None) / mass(&full(without), &none, None);
                (a, b)
            }
            Witness::ProbLambdaDependence { m, other, .. } => {
                let a = mass(&full(m), &none, l) / mass(&full(m), &none, None);
                let b = mass(&full(other), &none, l) / mass(&full(other), &none, None);
                (a, b)
            }
            Witness::ProbOutcomeDependence { m, site, o, .. } => {
                let mut rest = full(o);
                rest[*site] = None;
                let a = mass(&full(m), &only(*site, o[*site]), l) / mass(&full(m), &none, l);
                let b = mass(&full(m), &full(o), l) / mass(&full(m), &rest, l);
                (a, b)
            }
            Witness::ProbParameterDependence { m, site, outcome, .. } => {
                let a = mass(&full(m), &only(*site, *outcome), l) / mass(&full(m), &none, l);
                let b =
                    mass(&only(*site, m[*site]), &only(*site, *outcome), l) / mass(&only(*site, m[*site]), &none, l);
                (a, b)
            }
            Witness::ProbNonLocal { m, o, .. } => {
                let a = mass(&full(m), &full(o), l) / mass(&full(m), &none, l);
                let b = (0..n).fold(Rational::one(), |acc, i| {
                    acc * mass(&only(i, m[i]), &only(i, o[i]), l) / mass(&only(i, m[i]), &none, l)
                });
                (a, b)
            }
            Witness::ProbMeasurementLocality { m, .. } => {
                let a = mass(&full(m), &none, None);
                let b = (0..n).fold(Rational::one(), |acc, i| acc * mass(&only(i, m[i]), &none, None));
                (a, b)
            }
            _ => return false,
        };
        lhs != rhs
    }

    /// One-line rendering with labels.
    pub fn describe(&self, ty: &SystemType, lambdas: Option<&[String]>) -> String {
        let m = |x: &[usize]| ty.show_measurement(x);
        let o = |x: &[usize]| ty.show_outcome(x);
        let cell = |c: &Cell| ty.show_cell(c);
        let at = match (self.lambda, lambdas) {
            (Some(l), Some(ls)) => format!(" at λ={}", ls[l]),
            (Some(l), None) => format!(" at λ#{l}"),
            _ => String::new(),
        };
        let body = match &self.witness {
            Witness::TwoOutcomes { m: mm, first, second } => {
                format!("({}) has outcomes ({}) and ({})", m(mm), o(first), o(second))
            }
            Witness::SiteClash { site, first, second } => {
                format!("{} and {} disagree at site {}", cell(first), cell(second), site + 1)
            }
            Witness::Signalling {
                site,
                outcome,
                with,
                without,
            } => format!(
                "outcome {} at site {} is possible under ({}) but not under ({})",
                ty.outcomes(*site)[*outcome],
                site + 1,
                m(with),
                m(without)
            ),
            Witness::MeasurementLocality { m: mm } => {
                format!("({}) breaks measurement locality", m(mm))
            }
            Witness::Undefined { m: mm } => format!("({}) has no possible outcome", m(mm)),
            Witness::LambdaCount { count } => format!("{count} hidden-variable values"),
            Witness::LambdaDependence { present, missing } => {
                format!("λ occurs with ({}) but not with ({})", m(present), m(missing))
            }
            Witness::OutcomeDependence {
                m: mm,
                site,
                first,
                second,
            } => format!(
                "({}) allows ({}) and ({}) but not their mix at site {}",
                m(mm),
                o(first),
                o(second),
                site + 1
            ),
            Witness::NonLocal { m: mm, o: oo } => format!("({} | {}) is locally possible but absent", m(mm), o(oo)),
            Witness::ProbSignalling {
                site,
                outcome,
                with,
                without,
                lhs,
                rhs,
            } => format!(
                "p({} at site {} | {}) = {} but p(· | {}) = {}",
                ty.outcomes(*site)[*outcome],
                site + 1,
                m(with),
                format_rational(lhs),
                m(without),
                format_rational(rhs)
            ),
            Witness::ProbLambdaDependence { m: mm, other, lhs, rhs } => format!(
                "q(λ | {}) = {} but q(λ | {}) = {}",
                m(mm),
                format_rational(lhs),
                m(other),
                format_rational(rhs)
            ),
            Witness::ProbOutcomeDependence {
                m: mm,
                site,
                o: oo,
                lhs,
                rhs,
            } => format!(
                "q(o{} | {}) = {} but conditioned on ({}) it is {}",
                site + 1,
                m(mm),
                format_rational(lhs),
                o(oo),
                format_rational(rhs)
            ),
            Witness::ProbParameterDependence {
                m: mm,
                site,
                outcome,
                lhs,
                rhs,
            } => format!(
                "q({} at site {} | {}) = {} but locally {}",
                ty.outcomes(*site)[*outcome],
                site + 1,
                m(mm),
                format_rational(lhs),
                format_rational(rhs)
            ),
            Witness::ProbNonLocal { m: mm, o: oo, lhs, rhs } => format!(
                "q({} | {}) = {} but the product of marginals is {}",
                o(oo),
                m(mm),
                format_rational(lhs),
                format_rational(rhs)
            ),
            Witness::ProbMeasurementLocality { m: mm, lhs, rhs } => format!(
                "p({}) = {} but the product of site marginals is {}",
                m(mm),
                format_rational(lhs),
                format_rational(rhs)
            ),
        };
        format!("{} fails{}: {}", self.property, at, body)
    }
}
