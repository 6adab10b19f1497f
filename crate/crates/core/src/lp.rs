//! Dense two-phase simplex over exact rationals (Bland's rule).
//!
//! Problems are in equality form `A z = b, z ≥ 0`. Several objectives may be
//! given; they are maximized lexicographically.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal {
        z: Vec<Rational>,
        /// Optimal value of each objective.
        values: Vec<Rational>,
        /// Dual solution `y` of the first objective: `yᵀA ≥ c` and `yᵀb` equals its optimum.
        dual: Vec<Rational>,
    },
    /// Farkas vector `y` with `yᵀA ≥ 0` and `yᵀb < 0`.
    Infeasible { farkas: Vec<Rational> },
    /// The objective at this index is unbounded.
    Unbounded { objective: usize },
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs `c_j − c_Bᵀ B⁻¹ a_j`, one row per objective.
    costs: Vec<Vec<Rational>>,
}

impl Tableau {
    fn pivot(&mut self, leave: usize, enter: usize) {
        let p = self.rows[leave][enter].clone();
        for v in self.rows[leave].iter_mut() {
            *v /= &p;
        }
        self.rhs[leave] /= &p;
        let pivot_row = self.rows[leave].clone();
        let pivot_rhs = self.rhs[leave].clone();
        for r in 0..self.rows.len() {
            if r == leave || self.rows[r][enter].is_zero() {
                continue;
            }
            let f = self.rows[r][enter].clone();
            for (v, w) in self.rows[r].iter_mut().zip(&pivot_row) {
                if !w.is_zero() {
                    *v -= &f * w;
                }
            }
            self.rhs[r] -= &f * &pivot_rhs;
        }
        for cost in self.costs.iter_mut() {
            if cost[enter].is_zero() {
                continue;
            }
            let f = cost[enter].clone();
            for (v, w) in cost.iter_mut().zip(&pivot_row) {
                if !w.is_zero() {
                    *v -= &f * w;
                }
            }
        }
        self.basis[leave] = enter;
    }

    fn reduced_costs(&self, c: &[Rational]) -> Vec<Rational> {
        let mut r = c.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if c[b].is_zero() {
                continue;
            }
            for (v, a) in r.iter_mut().zip(row) {
                if !a.is_zero() {
                    *v -= &c[b] * a;
                }
            }
        }
        r
    }

    /// Runs Bland's rule on objective `k`, entering only columns below `limit`
    /// whose reduced cost is zero for every earlier objective.
    fn optimize(&mut self, k: usize, limit: usize) -> bool {
        loop {
            let enter = (0..limit).find(|&j| {
                self.costs[k][j].is_positive()
                    && !self.basis.contains(&j)
                    && self.costs[..k].iter().all(|c| c[j].is_zero())
            });
            let Some(enter) = enter else { return true };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &leave {
                    None => true,
                    Some((l, best)) => ratio < *best || (ratio == *best && self.basis[r] < self.basis[*l]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }

    /// `c_Bᵀ B⁻¹`, read off the artificial columns starting at `art`.
    fn dual(&self, c: &[Rational], art: usize, flipped: &[bool]) -> Vec<Rational> {
        (0..self.rows.len())
            .map(|k| {
                let y = self
                    .rows
                    .iter()
                    .zip(&self.basis)
                    .fold(Rational::zero(), |acc, (row, &b)| acc + &c[b] * &row[art + k]);
                if flipped[k] {
                    -y
                } else {
                    y
                }
            })
            .collect()
    }
}

/// Maximizes `objectives[0]`, then `objectives[1]` among its optima, and so on.
pub fn maximize(a: &[Vec<Rational>], b: &[Rational], objectives: &[Vec<Rational>]) -> LpOutcome {
    let m = a.len();
    let n = objectives
        .first()
        .map(Vec::len)
        .or_else(|| a.first().map(Vec::len))
        .unwrap_or(0);
    assert!(a.iter().all(|r| r.len() == n), "constraint width");
    assert_eq!(b.len(), m, "right-hand side length");
    assert!(objectives.iter().all(|c| c.len() == n), "objective width");

    let width = n + m;
    let mut flipped = vec![false; m];
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (r, (row, rb)) in a.iter().zip(b).enumerate() {
        let neg = rb.is_negative();
        flipped[r] = neg;
        let mut full: Vec<Rational> = row.iter().map(|v| if neg { -v.clone() } else { v.clone() }).collect();
        full.resize(width, Rational::zero());
        full[n + r] = Rational::one();
        rows.push(full);
        rhs.push(if neg { -rb.clone() } else { rb.clone() });
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis: (n..width).collect(),
        costs: Vec::new(),
    };

    // Phase 1: maximize −Σ artificials.
    let mut c1 = vec![Rational::zero(); width];
    for v in c1.iter_mut().skip(n) {
        *v = -Rational::one();
    }
    t.costs = vec![t.reduced_costs(&c1)];
    t.optimize(0, width);
    let phase1 = t
        .basis
        .iter()
        .zip(&t.rhs)
        .filter(|(&bv, _)| bv >= n)
        .fold(Rational::zero(), |acc, (_, v)| acc - v);
    if phase1.is_negative() {
        return LpOutcome::Infeasible {
            farkas: t.dual(&c1, n, &flipped),
        };
    }

    // Drive zero-level artificials out of the basis where possible.
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[r][j].is_zero() && !t.basis.contains(&j)) {
                t.pivot(r, j);
            }
        }
    }

    let padded: Vec<Vec<Rational>> = objectives
        .iter()
        .map(|c| {
            let mut v = c.clone();
            v.resize(width, Rational::zero());
            v
        })
        .collect();
    t.costs = padded.iter().map(|c| t.reduced_costs(c)).collect();
    for k in 0..padded.len() {
        if !t.optimize(k, n) {
            return LpOutcome::Unbounded { objective: k };
        }
    }

    let mut z = vec![Rational::zero(); n];
    for (r, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            z[bv] = t.rhs[r].clone();
        }
    }
    let values = objectives
        .iter()
        .map(|c| c.iter().zip(&z).fold(Rational::zero(), |acc, (ci, zi)| acc + ci * zi))
        .collect();
    let dual = match padded.first() {
        Some(c) => t.dual(c, n, &flipped),
        None => vec![Rational::zero(); m],
    };
    LpOutcome::Optimal { z, values, dual }
}
