#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nonloc::constructions::LocalGridFamily;
use nonloc::rational::{int, Rational};
use nonloc::{Cell, EmpiricalModel, HiddenVariableModel, HvCell, ProbEmpiricalModel, ProbHVModel, SystemType};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x6e6f_6e6c_6f63;

/// Seeded from `NONLOC_SEED` when set.
pub fn rng(stream: u64) -> ChaCha8Rng {
    let seed = std::env::var("NONLOC_SEED")
        .ok()
        .and_then(|s| s.parse::<u64>().ok())
        .unwrap_or(DEFAULT_SEED);
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn random_type(rng: &mut impl Rng, max_arity: usize, max_labels: usize) -> SystemType {
    let n = rng.random_range(1..=max_arity);
    let mut ms = Vec::new();
    let mut os = Vec::new();
    for i in 0..n {
        let k = rng.random_range(1..=max_labels);
        let l = rng.random_range(1..=max_labels);
        ms.push((0..k).map(|j| format!("x{i}{j}")).collect());
        os.push((0..l).map(|j| format!("o{i}{j}")).collect());
    }
    SystemType::new(ms, os).unwrap()
}

fn all_cells(ty: &SystemType) -> Vec<Cell> {
    ty.all_measurements()
        .flat_map(|m| ty.all_outcomes().map(move |o| Cell::new(m.clone(), o)))
        .collect()
}

pub fn random_empirical(rng: &mut impl Rng, ty: &SystemType) -> EmpiricalModel {
    let density = rng.random_range(0.1..0.9);
    let cells = all_cells(ty).into_iter().filter(|_| rng.random_bool(density));
    EmpiricalModel::new(ty.clone(), cells).unwrap()
}

/// Unstructured hidden-variable model, biased towards small fibers so that
/// determinism properties occur with useful frequency.
pub fn random_hidden(rng: &mut impl Rng, ty: &SystemType, max_lambdas: usize) -> HiddenVariableModel {
    let k = rng.random_range(1..=max_lambdas);
    let mut cells = BTreeSet::new();
    let style = rng.random_range(0..4);
    for l in 0..k {
        for m in ty.all_measurements() {
            if style > 0 && rng.random_bool(0.2) {
                continue;
            }
            match style {
                0 => {
                    for o in ty.all_outcomes() {
                        if rng.random_bool(0.4) {
                            cells.insert(HvCell::new(m.clone(), o, l));
                        }
                    }
                }
                1 => {
                    let os: Vec<_> = ty.all_outcomes().collect();
                    cells.insert(HvCell::new(m.clone(), os.choose(rng).unwrap().clone(), l));
                }
                _ => {
                    // local choice per site, occasionally doubled
                    let o: Vec<usize> = (0..ty.arity())
                        .map(|i| rng.random_range(0..ty.outcomes(i).len()))
                        .collect();
                    cells.insert(HvCell::new(m.clone(), o.clone(), l));
                    if style == 3 && rng.random_bool(0.3) {
                        let mut o2 = o;
                        let i = rng.random_range(0..ty.arity());
                        o2[i] = rng.random_range(0..ty.outcomes(i).len());
                        cells.insert(HvCell::new(m.clone(), o2, l));
                    }
                }
            }
        }
    }
    HiddenVariableModel::new(ty.clone(), HiddenVariableModel::numbered_lambdas(k), cells).unwrap()
}

/// Product of nonempty subsets of each site's measurements.
pub fn random_product_domain(rng: &mut impl Rng, ty: &SystemType, full: bool) -> BTreeSet<Vec<usize>> {
    let per_site: Vec<Vec<usize>> = (0..ty.arity())
        .map(|i| {
            let k = ty.measurements(i).len();
            let mut s: Vec<usize> = (0..k).filter(|_| full || rng.random_bool(0.7)).collect();
            if s.is_empty() {
                s.push(rng.random_range(0..k));
            }
            s
        })
        .collect();
    ty.all_measurements()
        .filter(|m| m.iter().enumerate().all(|(i, x)| per_site[i].contains(x)))
        .collect()
}

fn nonempty_subset(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut s: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
    if s.is_empty() {
        s.push(rng.random_range(0..n));
    }
    s
}

/// λ-independent model: every λ is defined on the same domain, with an
/// arbitrary nonempty outcome set per `(m̄, λ)`.
pub fn random_li_hidden(rng: &mut impl Rng, ty: &SystemType, max_lambdas: usize) -> HiddenVariableModel {
    let k = rng.random_range(1..=max_lambdas);
    let dom: Vec<Vec<usize>> = if rng.random_bool(0.5) {
        random_product_domain(rng, ty, false).into_iter().collect()
    } else {
        let all: Vec<_> = ty.all_measurements().collect();
        let mut d: Vec<_> = all.iter().filter(|_| rng.random_bool(0.6)).cloned().collect();
        if d.is_empty() {
            d.push(all.choose(rng).unwrap().clone());
        }
        d
    };
    let outs: Vec<Vec<usize>> = ty.all_outcomes().collect();
    let mut cells = Vec::new();
    for l in 0..k {
        for m in &dom {
            for j in nonempty_subset(rng, outs.len()) {
                cells.push(HvCell::new(m.clone(), outs[j].clone(), l));
            }
        }
    }
    HiddenVariableModel::new(ty.clone(), HiddenVariableModel::numbered_lambdas(k), cells).unwrap()
}

/// ML ∧ λI ∧ L: product domain, and each fiber a product of local outcome
/// sets depending only on the local measurement.
pub fn random_local_hidden(rng: &mut impl Rng, ty: &SystemType, max_lambdas: usize) -> HiddenVariableModel {
    let k = rng.random_range(1..=max_lambdas);
    let dom = random_product_domain(rng, ty, false);
    let mut cells = Vec::new();
    for l in 0..k {
        let local: Vec<Vec<Vec<usize>>> = (0..ty.arity())
            .map(|i| {
                (0..ty.measurements(i).len())
                    .map(|_| nonempty_subset(rng, ty.outcomes(i).len()))
                    .collect()
            })
            .collect();
        for m in &dom {
            for o in ty.all_outcomes() {
                if o.iter().enumerate().all(|(i, x)| local[i][m[i]].contains(x)) {
                    cells.push(HvCell::new(m.clone(), o, l));
                }
            }
        }
    }
    HiddenVariableModel::new(ty.clone(), HiddenVariableModel::numbered_lambdas(k), cells).unwrap()
}

/// Positive integer weights on the support of `h`, normalized.
pub fn random_weights_on(rng: &mut impl Rng, h: &HiddenVariableModel, max_weight: i64) -> ProbHVModel {
    let raw: Vec<(HvCell, i64)> = h
        .support()
        .iter()
        .map(|c| (c.clone(), rng.random_range(1..=max_weight)))
        .collect();
    let total: i64 = raw.iter().map(|(_, w)| w).sum();
    ProbHVModel::new(
        h.system_type().clone(),
        h.lambdas().to_vec(),
        raw.into_iter().map(|(c, w)| (c, Rational::new(w.into(), total.into()))),
    )
    .unwrap()
}

fn normalize<K: Ord + Clone>(raw: &BTreeMap<K, i64>) -> BTreeMap<K, Rational> {
    let total: i64 = raw.values().sum();
    raw.iter()
        .map(|(k, w)| (k.clone(), Rational::new((*w).into(), total.into())))
        .collect()
}

/// A random rational model over `(m̄, ō, λ)`. Half of the draws are built
/// in product form (prior × λ-weight × local conditionals) so that the
/// probabilistic properties hold often enough to exercise the collapse
/// maps; the rest are perturbed or unstructured.
pub fn random_prob_hidden(rng: &mut impl Rng, ty: &SystemType, max_lambdas: usize) -> ProbHVModel {
    let k = rng.random_range(1..=max_lambdas);
    let lambdas = HiddenVariableModel::numbered_lambdas(k);
    let mode = rng.random_range(0..4);
    let mut raw: BTreeMap<HvCell, i64> = BTreeMap::new();
    if mode == 0 {
        for m in ty.all_measurements() {
            for o in ty.all_outcomes() {
                for l in 0..k {
                    if rng.random_bool(0.3) {
                        raw.insert(HvCell::new(m.clone(), o.clone(), l), rng.random_range(1..=4));
                    }
                }
            }
        }
        if raw.is_empty() {
            let m = ty.all_measurements().next().unwrap();
            let o = ty.all_outcomes().next().unwrap();
            raw.insert(HvCell::new(m, o, 0), 1);
        }
    } else {
        let full = rng.random_bool(0.5);
        let dom = random_product_domain(rng, ty, full);
        let prior: BTreeMap<Vec<usize>, i64> = dom.iter().map(|m| (m.clone(), rng.random_range(1..=3))).collect();
        let lw: Vec<i64> = (0..k).map(|_| rng.random_range(1..=3)).collect();
        // local[l][i][m_i][o_i]
        let local: Vec<Vec<Vec<Vec<i64>>>> = (0..k)
            .map(|_| {
                (0..ty.arity())
                    .map(|i| {
                        (0..ty.measurements(i).len())
                            .map(|_| {
                                let mut w: Vec<i64> =
                                    (0..ty.outcomes(i).len()).map(|_| rng.random_range(0..=2)).collect();
                                if w.iter().all(|&x| x == 0) {
                                    w[0] = 1;
                                }
                                w
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let uniform_local = rng.random_bool(0.5);
        for m in &dom {
            for l in 0..k {
                for o in ty.all_outcomes() {
                    let mut w = prior[m] * lw[l];
                    for i in 0..ty.arity() {
                        let row = &local[l][i][m[i]];
                        w *= if uniform_local { 1 } else { row[o[i]] };
                        if row[o[i]] == 0 {
                            w = 0;
                        }
                    }
                    if w > 0 {
                        raw.insert(HvCell::new(m.clone(), o.clone(), l), w);
                    }
                }
            }
        }
        if mode == 3 {
            // break the structure at one cell
            let keys: Vec<HvCell> = raw.keys().cloned().collect();
            let c = keys.choose(rng).unwrap();
            if rng.random_bool(0.5) && raw.len() > 1 {
                raw.remove(c);
            } else {
                *raw.get_mut(c).unwrap() += 1;
            }
        }
    }
    ProbHVModel::new(ty.clone(), lambdas, normalize(&raw)).unwrap()
}

pub fn random_prob_empirical(rng: &mut impl Rng, ty: &SystemType) -> ProbEmpiricalModel {
    random_prob_hidden(rng, ty, 1).lambda_marginal()
}

pub fn total_mass<'a>(ws: impl IntoIterator<Item = &'a Rational>) -> Rational {
    ws.into_iter().fold(int(0), |a, b| a + b)
}

/// All bipartite models with two measurements and two outcomes per site,
/// indexed by a 16-bit support mask.
pub fn binary_bipartite_type() -> SystemType {
    SystemType::homogeneous(2, &["0", "1"], &["0", "1"]).unwrap()
}

pub fn binary_bipartite(mask: u32) -> EmpiricalModel {
    let ty = binary_bipartite_type();
    let cells: Vec<Cell> = all_cells(&ty)
        .into_iter()
        .enumerate()
        .filter(|(k, _)| mask >> k & 1 == 1)
        .map(|(_, c)| c)
        .collect();
    EmpiricalModel::new(ty, cells).unwrap()
}

/// Every family of local maps on the projected domain that lands inside
/// `e` on every row, by exhaustive product enumeration.
pub fn brute_force_instructions(e: &EmpiricalModel) -> Vec<LocalGridFamily> {
    let ty = e.system_type();
    let doms: Vec<Vec<usize>> = (0..ty.arity()).map(|i| e.site_domain(i)).collect();
    let mut locals: Vec<Vec<BTreeMap<usize, usize>>> = Vec::new();
    for (i, d) in doms.iter().enumerate() {
        let radix = ty.outcomes(i).len();
        let mut maps = Vec::new();
        for code in 0..radix.pow(d.len() as u32) {
            let mut c = code;
            let mut map = BTreeMap::new();
            for &m in d {
                map.insert(m, c % radix);
                c /= radix;
            }
            maps.push(map);
        }
        locals.push(maps);
    }
    let mut out = Vec::new();
    let radices: Vec<usize> = locals.iter().map(Vec::len).collect();
    for pick in nonloc::model::MixedRadix::new(radices) {
        let g = LocalGridFamily::new(pick.iter().enumerate().map(|(i, &k)| locals[i][k].clone()).collect());
        if e.domain().iter().all(|m| e.contains(m, &g.apply(m).unwrap())) {
            out.push(g);
        }
    }
    out.sort();
    out
}

/// Brute-force LHV membership: the support is covered by the union of all
/// admissible instructions.
pub fn lhv_union_cover(e: &EmpiricalModel) -> bool {
    if e.is_empty() {
        return true;
    }
    let grids = brute_force_instructions(e);
    e.support()
        .iter()
        .all(|c| grids.iter().any(|g| g.apply(&c.m).as_deref() == Some(c.o.as_slice())))
}
