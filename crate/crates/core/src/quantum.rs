//! Finite-dimensional quantum realizations: operators per (site, measurement,
//! outcome), a density matrix, the trace rule, and the ε-thresholded collapse.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::model::{Cell, EmpiricalModel, ModelError, SystemType};
use crate::probabilistic::{ProbEmpiricalModel, ProbError};
use crate::rational::{format_rational, rationalize, to_f64, Rational};

pub type C64 = Complex64;

pub const DEFAULT_ETA: f64 = 1e-9;
pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const MAX_DENOMINATOR: u64 = 1_000_000;
pub const RATIONAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("realization fails validation: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("probability {value:e} at {cell} lies in the ambiguity band [{lo:e}, {hi:e}]; choose a different epsilon")]
    Ambiguous { cell: String, value: f64, lo: f64, hi: f64 },
    #[error("probability {value} at {cell} lies outside [0, 1]")]
    OutOfRange { cell: String, value: f64 },
    #[error("probability {value} at {cell} has no rational form with denominator ≤ {max_den}")]
    NotRational { cell: String, value: f64, max_den: u64 },
    #[error("row ({row}) has mass {mass} after rounding, below 1 − 10ε")]
    Renormalize { row: String, mass: String },
    #[error("empty measurement subset")]
    EmptySubset,
    #[error(transparent)]
    Prob(#[from] ProbError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, QuantumError> {
        if data.len() != rows * cols {
            return Err(QuantumError::Dimension(format!(
                "{rows}×{cols} matrix with {} entries",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QuantumError::NonFinite);
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &[C64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    m.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        m
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut m = Self::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        m.data[(i * other.rows + k) * c + j * other.cols + l] = a * other.get(k, l);
                    }
                }
            }
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of a Hermitian matrix, ascending (cyclic Jacobi on the
    /// real symmetric embedding `[[A, −B], [B, A]]`).
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let n = self.rows;
        let m = 2 * n;
        let mut a = vec![vec![0.0; m]; m];
        for i in 0..n {
            for j in 0..n {
                let z = self.get(i, j);
                a[i][j] = z.re;
                a[i + n][j + n] = z.re;
                a[i][j + n] = -z.im;
                a[i + n][j] = z.im;
            }
        }
        for _ in 0..100 {
            let off: f64 = (0..m)
                .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..m {
                for q in p + 1..m {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..m {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..m {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
        ev.sort_by(f64::total_cmp);
        // Each eigenvalue appears twice in the embedding.
        ev.into_iter().step_by(2).collect()
    }
}

/// Maximum deviations found by [`QuantumRealization::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub eta: f64,
    pub completeness: f64,
    pub hermiticity: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

impl Diagnostics {
    pub fn passes(&self) -> bool {
        self.completeness <= self.eta
            && self.hermiticity <= self.eta
            && self.trace <= self.eta
            && self.min_eigenvalue >= -self.eta
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.completeness > self.eta {
            out.push(format!("completeness deviation {:e}", self.completeness));
        }
        if self.hermiticity > self.eta {
            out.push(format!("state not Hermitian (deviation {:e})", self.hermiticity));
        }
        if self.trace > self.eta {
            out.push(format!("state trace off by {:e}", self.trace));
        }
        if self.min_eigenvalue < -self.eta {
            out.push(format!("state has eigenvalue {:e}", self.min_eigenvalue));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct QuantumRealization {
    ty: SystemType,
    dims: Vec<usize>,
    /// `ops[i][m][o]` acts on site `i`.
    ops: Vec<Vec<Vec<ComplexMatrix>>>,
    state: ComplexMatrix,
    /// Unit vectors behind rank-one projective measurements and a pure state.
    pure: Option<(Vec<Vec<Vec<Vec<C64>>>>, Vec<C64>)>,
    validation: OnceLock<Diagnostics>,
}

impl PartialEq for QuantumRealization {
    fn eq(&self, other: &Self) -> bool {
        self.ty == other.ty && self.dims == other.dims && self.ops == other.ops && self.state == other.state
    }
}

impl QuantumRealization {
    pub fn new(
        ty: SystemType,
        dims: Vec<usize>,
        ops: Vec<Vec<Vec<ComplexMatrix>>>,
        state: ComplexMatrix,
    ) -> Result<Self, QuantumError> {
        let n = ty.arity();
        let dim_err = |s: String| Err(QuantumError::Dimension(s));
        if dims.len() != n {
            return dim_err(format!("{} dimensions for {} sites", dims.len(), n));
        }
        if dims.contains(&0) {
            return dim_err("zero-dimensional site".into());
        }
        if ops.len() != n {
            return dim_err(format!("operators for {} sites, expected {}", ops.len(), n));
        }
        for (i, site) in ops.iter().enumerate() {
            if site.len() != ty.measurements(i).len() {
                return dim_err(format!("site {}: {} measurements", i + 1, site.len()));
            }
            for (m, outs) in site.iter().enumerate() {
                if outs.len() != ty.outcomes(i).len() {
                    return dim_err(format!(
                        "site {}, measurement {}: {} operators for {} outcomes",
                        i + 1,
                        ty.measurements(i)[m],
                        outs.len(),
                        ty.outcomes(i).len()
                    ));
                }
                if outs.iter().any(|a| a.rows != dims[i] || a.cols != dims[i]) {
                    return dim_err(format!(
                        "site {}, measurement {}: operators must be {}×{}",
                        i + 1,
                        ty.measurements(i)[m],
                        dims[i],
                        dims[i]
                    ));
                }
            }
        }
        let total: usize = dims.iter().product();
        if state.rows != total || state.cols != total {
            return dim_err(format!(
                "state is {}×{}, expected {}×{}",
                state.rows, state.cols, total, total
            ));
        }
        Ok(QuantumRealization {
            ty,
            dims,
            ops,
            state,
            pure: None,
            validation: OnceLock::new(),
        })
    }

    /// Rank-one projective measurements `|v⟩⟨v|` on a pure state `|ψ⟩`.
    pub fn projective(
        ty: SystemType,
        dims: Vec<usize>,
        bases: Vec<Vec<Vec<Vec<C64>>>>,
        psi: Vec<C64>,
    ) -> Result<Self, QuantumError> {
        let ops = bases
            .iter()
            .map(|site| {
                site.iter()
                    .map(|outs| outs.iter().map(|v| ComplexMatrix::projector(v)).collect())
                    .collect()
            })
            .collect();
        for (i, site) in bases.iter().enumerate() {
            for outs in site {
                if outs.iter().any(|v| Some(&v.len()) != dims.get(i)) {
                    return Err(QuantumError::Dimension(format!(
                        "site {} vectors must have length {}",
                        i + 1,
                        dims.get(i).copied().unwrap_or(0)
                    )));
                }
            }
        }
        let state = ComplexMatrix::projector(&psi);
        let mut q = Self::new(ty, dims, ops, state)?;
        q.pure = Some((bases, psi));
        Ok(q)
    }

    pub fn system_type(&self) -> &SystemType {
        &self.ty
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn operators(&self) -> &[Vec<Vec<ComplexMatrix>>] {
        &self.ops
    }

    pub fn state(&self) -> &ComplexMatrix {
        &self.state
    }

    pub fn validate(&self, eta: f64) -> Diagnostics {
        let mut completeness: f64 = 0.0;
        for (i, site) in self.ops.iter().enumerate() {
            for outs in site {
                let sum = outs
                    .iter()
                    .fold(ComplexMatrix::zeros(self.dims[i], self.dims[i]), |acc, a| {
                        acc.add(&a.adjoint().mul(a))
                    });
                completeness = completeness.max(sum.max_deviation(&ComplexMatrix::identity(self.dims[i])));
            }
        }
        let hermiticity = self.state.max_deviation(&self.state.adjoint());
        let trace = (self.state.trace() - C64::new(1.0, 0.0)).norm();
        let min_eigenvalue = self.state.hermitian_eigenvalues().first().copied().unwrap_or(0.0);
        Diagnostics {
            eta,
            completeness,
            hermiticity,
            trace,
            min_eigenvalue,
        }
    }

    fn ensure_valid(&self) -> Result<(), QuantumError> {
        let d = self.validation.get_or_init(|| self.validate(DEFAULT_ETA));
        if d.passes() {
            Ok(())
        } else {
            Err(QuantumError::Invalid(d.failures().join("; ")))
        }
    }

    fn check_cell(&self, m: &[usize], o: &[usize]) -> Result<(), QuantumError> {
        self.ty.check_cell(&Cell::new(m.to_vec(), o.to_vec()))?;
        Ok(())
    }

    /// `Tr(A† A ρ)` with `A = A_{m₁,o₁} ⊗ ⋯ ⊗ A_{mₙ,oₙ}`, clamped to `[0, 1]`.
    pub fn statistical_algorithm(&self, m: &[usize], o: &[usize]) -> Result<f64, QuantumError> {
        self.ensure_valid()?;
        self.check_cell(m, o)?;
        let a = (1..m.len()).fold(self.ops[0][m[0]][o[0]].clone(), |acc, i| {
            acc.kron(&self.ops[i][m[i]][o[i]])
        });
        let p = a.adjoint().mul(&a).mul(&self.state).trace().re;
        let n = m.len() as f64;
        if p < -n * DEFAULT_ETA || p > 1.0 + n * DEFAULT_ETA {
            return Err(QuantumError::OutOfRange {
                cell: self.ty.show_cell(&Cell::new(m.to_vec(), o.to_vec())),
                value: p,
            });
        }
        Ok(p.clamp(0.0, 1.0))
    }

    /// `|⟨ψ | v_{m₁,o₁} ⊗ ⋯ ⊗ v_{mₙ,oₙ}⟩|²` for projective pure realizations.
    pub fn pure_probability(&self, m: &[usize], o: &[usize]) -> Option<Result<f64, QuantumError>> {
        let (bases, psi) = self.pure.as_ref()?;
        if let Err(e) = self.ensure_valid().and_then(|_| self.check_cell(m, o)) {
            return Some(Err(e));
        }
        let v = (1..m.len()).fold(bases[0][m[0]][o[0]].clone(), |acc, i| {
            let w = &bases[i][m[i]][o[i]];
            acc.iter().flat_map(|a| w.iter().map(move |b| a * b)).collect()
        });
        let amp: C64 = psi.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
        Some(Ok(amp.norm_sqr().clamp(0.0, 1.0)))
    }

    fn checked_subset(&self, s: &BTreeSet<Vec<usize>>) -> Result<(), QuantumError> {
        if s.is_empty() {
            return Err(QuantumError::EmptySubset);
        }
        for m in s {
            self.ty.check_measurement(m)?;
        }
        Ok(())
    }

    /// Probabilities of row `m` with values in the band `[ε/10, 10ε]` refused.
    fn row(&self, m: &[usize], eps: f64) -> Result<Vec<(Vec<usize>, f64)>, QuantumError> {
        self.ty
            .all_outcomes()
            .map(|o| {
                let p = self.statistical_algorithm(m, &o)?;
                let (lo, hi) = (eps / 10.0, eps * 10.0);
                if (lo..=hi).contains(&p) {
                    return Err(QuantumError::Ambiguous {
                        cell: self.ty.show_cell(&Cell::new(m.to_vec(), o.clone())),
                        value: p,
                        lo,
                        hi,
                    });
                }
                Ok((o, p))
            })
            .collect()
    }

    /// `{(m̄, ō) | m̄ ∈ S, p_m̄(ō) > ε}`.
    pub fn collapse(&self, s: &BTreeSet<Vec<usize>>, eps: f64) -> Result<EmpiricalModel, QuantumError> {
        self.checked_subset(s)?;
        let mut cells = Vec::new();
        for m in s {
            for (o, p) in self.row(m, eps)? {
                if p > eps {
                    cells.push(Cell::new(m.clone(), o));
                }
            }
        }
        Ok(EmpiricalModel::new(self.ty.clone(), cells)?)
    }

    /// Joint model `prior(m̄) · p_m̄(ō)` over `S` with probabilities snapped to
    /// rationals; values at or below ε become 0 and each row is renormalized.
    pub fn probabilistic(
        &self,
        s: &BTreeSet<Vec<usize>>,
        prior: Option<&BTreeMap<Vec<usize>, Rational>>,
        eps: f64,
    ) -> Result<ProbEmpiricalModel, QuantumError> {
        self.checked_subset(s)?;
        let mut rows = BTreeMap::new();
        for m in s {
            let mut row = BTreeMap::new();
            let mut mass = Rational::from_integer(0.into());
            for (o, p) in self.row(m, eps)? {
                if p <= eps {
                    continue;
                }
                let r =
                    rationalize(p, MAX_DENOMINATOR, RATIONAL_TOLERANCE).ok_or_else(|| QuantumError::NotRational {
                        cell: self.ty.show_cell(&Cell::new(m.clone(), o.clone())),
                        value: p,
                        max_den: MAX_DENOMINATOR,
                    })?;
                mass += &r;
                row.insert(o, r);
            }
            if to_f64(&mass) < 1.0 - 10.0 * eps || row.is_empty() {
                return Err(QuantumError::Renormalize {
                    row: self.ty.show_measurement(m),
                    mass: format_rational(&mass),
                });
            }
            for v in row.values_mut() {
                *v /= &mass;
            }
            rows.insert(m.clone(), row);
        }
        Ok(ProbEmpiricalModel::from_conditionals(self.ty.clone(), prior, &rows)?)
    }
}

pub fn statistical_algorithm(q: &QuantumRealization, m: &[usize], o: &[usize]) -> Result<f64, QuantumError> {
    q.statistical_algorithm(m, o)
}

pub fn collapse_quantum(
    q: &QuantumRealization,
    s: &BTreeSet<Vec<usize>>,
    eps: f64,
) -> Result<EmpiricalModel, QuantumError> {
    q.collapse(s, eps)
}

pub fn prob_from_quantum(
    q: &QuantumRealization,
    s: &BTreeSet<Vec<usize>>,
    prior: Option<&BTreeMap<Vec<usize>, Rational>>,
) -> Result<ProbEmpiricalModel, QuantumError> {
    q.probabilistic(s, prior, DEFAULT_EPSILON)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn ket(bits: &[usize], amp: C64, dim: usize) -> Vec<C64> {
    let idx = bits.iter().fold(0, |acc, b| acc * 2 + b);
    let mut v = vec![c(0.0, 0.0); dim];
    v[idx] = amp;
    v
}

fn sum(vs: &[Vec<C64>]) -> Vec<C64> {
    (0..vs[0].len()).map(|k| vs.iter().map(|v| v[k]).sum()).collect()
}

/// `(|01⟩ + |10⟩)/√2` measured in the computational basis (a = 0, b = 1).
pub fn epr_system() -> QuantumRealization {
    let ty = SystemType::from_labels(&[&["X"], &["Y"]], &[&["a", "b"], &["a", "b"]]).expect("static type");
    let z = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]];
    let psi = sum(&[
        ket(&[0, 1], c(FRAC_1_SQRT_2, 0.0), 4),
        ket(&[1, 0], c(FRAC_1_SQRT_2, 0.0), 4),
    ]);
    QuantumRealization::projective(ty, vec![2, 2], vec![vec![z.clone()], vec![z]], psi).expect("static system")
}

/// GHZ state `(|000⟩ + |111⟩)/√2`; measurement 1 is X and 2 is Y, with G
/// the +1 eigenvector and R the −1 eigenvector.
pub fn ghz_system() -> QuantumRealization {
    let ty = SystemType::homogeneous(3, &["1", "2"], &["R", "G"]).expect("static type");
    let h = FRAC_1_SQRT_2;
    let x = vec![vec![c(h, 0.0), c(-h, 0.0)], vec![c(h, 0.0), c(h, 0.0)]];
    let y = vec![vec![c(h, 0.0), c(0.0, -h)], vec![c(h, 0.0), c(0.0, h)]];
    let site = vec![x, y];
    let psi = sum(&[ket(&[0, 0, 0], c(h, 0.0), 8), ket(&[1, 1, 1], c(h, 0.0), 8)]);
    QuantumRealization::projective(ty, vec![2, 2, 2], vec![site.clone(), site.clone(), site], psi)
        .expect("static system")
}

/// Hardy's two-qubit system: `√(3/8)|10⟩ + √(3/8)|01⟩ − ½|00⟩`; X₂/Y₂ measure
/// the computational basis, X₁/Y₁ the rotated basis; R is outcome 0.
pub fn hardy_system() -> QuantumRealization {
    let ty =
        SystemType::from_labels(&[&["X1", "X2"], &["Y1", "Y2"]], &[&["R", "G"], &["R", "G"]]).expect("static type");
    let (a, b) = ((3.0f64 / 5.0).sqrt(), (2.0f64 / 5.0).sqrt());
    let rotated = vec![vec![c(a, 0.0), c(b, 0.0)], vec![c(-b, 0.0), c(a, 0.0)]];
    let computational = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]];
    let site = vec![rotated, computational];
    let r = (3.0f64 / 8.0).sqrt();
    let psi = sum(&[
        ket(&[1, 0], c(r, 0.0), 4),
        ket(&[0, 1], c(r, 0.0), 4),
        ket(&[0, 0], c(-0.5, 0.0), 4),
    ]);
    QuantumRealization::projective(ty, vec![2, 2], vec![site.clone(), site], psi).expect("static system")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn all_rows(q: &QuantumRealization) -> BTreeSet<Vec<usize>> {
        q.system_type().all_measurements().collect()
    }

    #[test]
    fn catalog_systems_validate() {
        for q in [epr_system(), ghz_system(), hardy_system()] {
            let d = q.validate(DEFAULT_ETA);
            assert!(d.passes(), "{:?}", d.failures());
        }
        assert_eq!(ghz_system().dims(), &[2, 2, 2]);
        assert_eq!(hardy_system().dims(), &[2, 2]);
    }

    #[test]
    fn broken_realizations_fail() {
        let ty = SystemType::homogeneous(1, &["X"], &["0", "1"]).unwrap();
        let zero = ComplexMatrix::zeros(2, 2);
        let mut rho = ComplexMatrix::identity(2);
        let q =
            QuantumRealization::new(ty.clone(), vec![2], vec![vec![vec![zero.clone(), zero]]], rho.clone()).unwrap();
        assert!(q.validate(DEFAULT_ETA).completeness > 0.5);
        assert!(matches!(
            q.statistical_algorithm(&[0], &[0]),
            Err(QuantumError::Invalid(_))
        ));
        let p0 = ComplexMatrix::projector(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let p1 = ComplexMatrix::projector(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let q = QuantumRealization::new(
            ty.clone(),
            vec![2],
            vec![vec![vec![p0.clone(), p1.clone()]]],
            rho.clone(),
        )
        .unwrap();
        assert!(q.validate(DEFAULT_ETA).trace > 0.5);
        rho = ComplexMatrix::new(2, 2, vec![c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]).unwrap();
        let q = QuantumRealization::new(ty.clone(), vec![2], vec![vec![vec![p0.clone(), p1.clone()]]], rho).unwrap();
        let d = q.validate(DEFAULT_ETA);
        assert!((d.min_eigenvalue + 0.5).abs() < 1e-12);
        assert!(!d.passes());
        assert!(matches!(
            QuantumRealization::new(ty, vec![3], vec![vec![vec![p0, p1]]], ComplexMatrix::identity(3)),
            Err(QuantumError::Dimension(_))
        ));
    }

    #[test]
    fn eigenvalues_of_hermitian_matrices() {
        let y = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let ev = y.hermitian_eigenvalues();
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
        let rho = ghz_system().state().clone();
        let ev = rho.hermitian_eigenvalues();
        assert_eq!(ev.len(), 8);
        assert!(ev[..7].iter().all(|x| x.abs() < 1e-12));
        assert!((ev[7] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn epr_values() {
        let q = epr_system();
        assert!(q.statistical_algorithm(&[0, 0], &[0, 0]).unwrap().abs() < 1e-12);
        assert!((q.statistical_algorithm(&[0, 0], &[0, 1]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pure_shortcut_matches_trace_rule() {
        for q in [epr_system(), ghz_system(), hardy_system()] {
            for m in q.system_type().all_measurements() {
                for o in q.system_type().all_outcomes() {
                    let a = q.statistical_algorithm(&m, &o).unwrap();
                    let b = q.pure_probability(&m, &o).unwrap().unwrap();
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rows_are_normalized() {
        for q in [epr_system(), ghz_system(), hardy_system()] {
            for m in q.system_type().all_measurements() {
                let total: f64 = q
                    .system_type()
                    .all_outcomes()
                    .map(|o| q.statistical_algorithm(&m, &o).unwrap())
                    .sum();
                assert!((total - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn hardy_probabilistic_model() {
        let q = hardy_system();
        let p = q.probabilistic(&all_rows(&q), None, DEFAULT_EPSILON).unwrap();
        let c = q.system_type().cell(&["X1", "Y1"], &["R", "R"]).unwrap();
        assert_eq!(p.conditional(&c.m, &c.o), Some(ratio(9, 100)));
    }

    #[test]
    fn ambiguity_band() {
        let q = hardy_system();
        // p(X1Y1, RR) = 0.09 sits inside [ε/10, 10ε] for ε = 0.05.
        assert!(matches!(
            q.collapse(&all_rows(&q), 0.05),
            Err(QuantumError::Ambiguous { .. })
        ));
        assert!(matches!(
            q.collapse(&BTreeSet::new(), 1e-6),
            Err(QuantumError::EmptySubset)
        ));
    }
}
