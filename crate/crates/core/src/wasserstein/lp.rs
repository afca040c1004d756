//! Dense two-phase tableau simplex for `min c^T x` subject to `A x = b`,
//! `x >= 0`, with enumeration of alternative optimal vertices.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-10;
const COST_EPS: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;
const MAX_PIVOTS: usize = 100_000;

/// An equality-form linear program with dense constraint rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// A basic feasible solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub basis: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Tableau {
    rows: usize,
    cols: usize,
    /// `(rows + 1) x (cols + 1)` row-major; the last row holds reduced costs
    /// and minus the objective, the last column the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width() + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn cost(&self, j: usize) -> f64 {
        self.at(self.rows, j)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let p = self.t[r * w + c];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        self.t[r * w + c] = 1.0;
        let pivot_row: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for (x, pr) in row.iter_mut().zip(&pivot_row) {
                *x -= f * pr;
            }
            row[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Rows achieving the minimum ratio for entering column `c`.
    fn ratio_rows(&self, c: usize) -> Vec<usize> {
        let mut best = f64::INFINITY;
        let mut rows = Vec::new();
        for i in 0..self.rows {
            let a = self.at(i, c);
            if a > PIVOT_EPS {
                let ratio = self.rhs(i).max(0.0) / a;
                if ratio < best - 1e-12 {
                    best = ratio;
                    rows.clear();
                    rows.push(i);
                } else if ratio <= best + 1e-12 {
                    rows.push(i);
                }
            }
        }
        rows
    }

    /// Leaving row by the minimum ratio, ties broken by smallest basic index.
    fn leaving(&self, c: usize) -> Option<usize> {
        self.ratio_rows(c).into_iter().min_by_key(|&i| self.basis[i])
    }

    /// Runs simplex iterations on the current objective row over columns
    /// `0..limit`.
    fn optimize(&mut self, limit: usize) -> Result<()> {
        let mut streak = 0;
        for _ in 0..MAX_PIVOTS {
            let entering = if streak < DEGENERATE_STREAK {
                // Dantzig
                (0..limit)
                    .filter(|&j| self.cost(j) < -COST_EPS)
                    .min_by(|&a, &b| self.cost(a).total_cmp(&self.cost(b)))
            } else {
                // Bland
                (0..limit).find(|&j| self.cost(j) < -COST_EPS)
            };
            let Some(c) = entering else {
                return Ok(());
            };
            let Some(r) = self.leaving(c) else {
                return Err(Error::Solver("objective is unbounded below".into()));
            };
            if self.rhs(r) <= PIVOT_EPS {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(r, c);
        }
        Err(Error::Solver(format!("no optimum after {MAX_PIVOTS} pivots")))
    }

    fn solution(&self, c: &[f64]) -> LpSolution {
        let mut x = vec![0.0; self.cols];
        for (i, &j) in self.basis.iter().enumerate() {
            x[j] = self.rhs(i).max(0.0);
        }
        let objective = x.iter().zip(c).map(|(x, c)| x * c).sum();
        LpSolution { x, objective, basis: self.basis.clone() }
    }

    fn basis_key(&self) -> Vec<usize> {
        let mut k = self.basis.clone();
        k.sort_unstable();
        k
    }
}

impl LinearProgram {
    fn validate(&self) -> Result<()> {
        let n = self.c.len();
        if self.a.len() != self.b.len() {
            return Err(Error::InvalidInput("constraint rows and right-hand side differ in length".into()));
        }
        if self.a.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput("constraint row length differs from the cost vector".into()));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.b) || !finite(&self.c) || !self.a.iter().all(|r| finite(r)) {
            return Err(Error::InvalidInput("linear program has non-finite data".into()));
        }
        Ok(())
    }

    /// Phase I and the phase II objective row; returns an optimal tableau.
    fn optimal_tableau(&self) -> Result<Tableau> {
        self.validate()?;
        let m = self.a.len();
        let n = self.c.len();
        let cols = n + m;
        let w = cols + 1;
        let mut t = vec![0.0; (m + 1) * w];
        for i in 0..m {
            let s = if self.b[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                t[i * w + j] = s * self.a[i][j];
            }
            t[i * w + n + i] = 1.0;
            t[i * w + cols] = s * self.b[i];
        }
        for j in 0..n {
            t[m * w + j] = -(0..m).map(|i| t[i * w + j]).sum::<f64>();
        }
        t[m * w + cols] = -(0..m).map(|i| t[i * w + cols]).sum::<f64>();
        let mut tab = Tableau { rows: m, cols, t, basis: (n..n + m).collect() };
        tab.optimize(n)?;

        let scale = 1.0 + self.b.iter().map(|x| x.abs()).sum::<f64>();
        let infeasibility = -tab.at(m, cols);
        if infeasibility > 1e-9 * scale {
            return Err(Error::InvalidInput(format!(
                "constraints are infeasible (phase one residual {infeasibility:e})"
            )));
        }

        // drive artificials out of the basis; rows where that fails are redundant
        let mut keep = Vec::with_capacity(m);
        for i in 0..m {
            if tab.basis[i] >= n {
                let col = (0..n)
                    .filter(|&j| tab.at(i, j).abs() > PIVOT_EPS)
                    .max_by(|&a, &b| tab.at(i, a).abs().total_cmp(&tab.at(i, b).abs()));
                if let Some(j) = col {
                    tab.pivot(i, j);
                    keep.push(i);
                }
            } else {
                keep.push(i);
            }
        }

        let rows = keep.len();
        let w2 = n + 1;
        let mut t2 = vec![0.0; (rows + 1) * w2];
        let mut basis = Vec::with_capacity(rows);
        for (r, &i) in keep.iter().enumerate() {
            for j in 0..n {
                t2[r * w2 + j] = tab.at(i, j);
            }
            t2[r * w2 + n] = tab.rhs(i);
            basis.push(tab.basis[i]);
        }
        for j in 0..=n {
            let cj = if j < n { self.c[j] } else { 0.0 };
            let dot: f64 = (0..rows).map(|r| self.c[basis[r]] * t2[r * w2 + j]).sum();
            t2[rows * w2 + j] = cj - dot;
        }
        let mut tab = Tableau { rows, cols: n, t: t2, basis };
        tab.optimize(n)?;
        Ok(tab)
    }

    pub fn solve(&self) -> Result<LpSolution> {
        Ok(self.optimal_tableau()?.solution(&self.c))
    }

    /// Optimal vertices reachable from the first optimal basis through
    /// pivots on zero reduced costs, visiting at most `max_bases` optimal
    /// bases. Vertices are returned in discovery order without duplicates.
    pub fn optimal_vertices(&self, max_bases: usize) -> Result<Vec<LpSolution>> {
        let start = self.optimal_tableau()?;
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        seen.insert(start.basis_key());
        let mut queue = VecDeque::from([start]);
        let mut vertices: Vec<LpSolution> = Vec::new();
        let mut visited = 0;
        while let Some(tab) = queue.pop_front() {
            visited += 1;
            let sol = tab.solution(&self.c);
            let duplicate = vertices
                .iter()
                .any(|v| v.x.iter().zip(&sol.x).all(|(a, b)| (a - b).abs() <= 1e-9));
            if !duplicate {
                vertices.push(sol);
            }
            if visited >= max_bases {
                break;
            }
            for j in 0..tab.cols {
                if tab.basis.contains(&j) || tab.cost(j).abs() > COST_EPS {
                    continue;
                }
                for r in tab.ratio_rows(j) {
                    let mut next = tab.clone();
                    next.pivot(r, j);
                    if seen.insert(next.basis_key()) {
                        queue.push_back(next);
                    }
                }
            }
        }
        Ok(vertices)
    }
}
