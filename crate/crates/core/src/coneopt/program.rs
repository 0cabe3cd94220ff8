//! A small builder for second-order-cone programs, lowered to the Clarabel
//! interior-point solver.
//!
//! The vocabulary is deliberately minimal: real variables, a linear
//! objective, affine equalities, and second-order-cone constraints
//! `|v(x)|_2 <= b(x)` with affine `v` and `b`. That is exactly the class the
//! distortion-bounded mapping solves need, and keeping the builder this
//! small makes the lowering easy to audit.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use std::collections::BTreeMap;
use thiserror::Error;

pub type VarId = usize;

/// Affine expression `sum of coeff * var + constant`.
#[derive(Clone, Debug, Default)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn var(v: VarId) -> Self {
        LinExpr { terms: vec![(v, 1.0)], constant: 0.0 }
    }

    pub fn constant(c: f64) -> Self {
        LinExpr { terms: Vec::new(), constant: c }
    }

    pub fn term(mut self, v: VarId, coeff: f64) -> Self {
        self.terms.push((v, coeff));
        self
    }

    pub fn shift(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * x[v]).sum::<f64>() + self.constant
    }

    /// Terms with duplicate variables merged, zeros dropped.
    fn consolidated(&self) -> BTreeMap<VarId, f64> {
        let mut merged = BTreeMap::new();
        for &(v, c) in &self.terms {
            *merged.entry(v).or_insert(0.0) += c;
        }
        merged.retain(|_, c| *c != 0.0);
        merged
    }
}

/// `|norm_args(x)|_2 <= bound(x)`; an empty `norm_args` degenerates to
/// `bound(x) >= 0`.
#[derive(Clone, Debug)]
pub struct SocConstraint {
    pub norm_args: Vec<LinExpr>,
    pub bound: LinExpr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Converged only to reduced accuracy; the iterate is still usable.
    Inaccurate,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub status: SolveStatus,
    /// Primal point (meaningless for `Infeasible`/`Unbounded`).
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Error)]
pub enum ProgramError {
    #[error("expression references variable {var}, but only {count} exist")]
    UnknownVariable { var: VarId, count: usize },
    #[error("conic solver failed: {0}")]
    Solver(String),
}

/// `min c'x  s.t.  equalities(x) = 0, every SOC constraint holds`.
#[derive(Clone, Debug, Default)]
pub struct ConeProgram {
    num_vars: usize,
    objective: Vec<f64>,
    equalities: Vec<LinExpr>,
    cones: Vec<SocConstraint>,
}

impl ConeProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self) -> VarId {
        self.num_vars += 1;
        self.objective.push(0.0);
        self.num_vars - 1
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn set_objective_term(&mut self, v: VarId, coeff: f64) {
        self.objective[v] = coeff;
    }

    /// Constrain `expr == 0`.
    pub fn add_equality(&mut self, expr: LinExpr) {
        self.equalities.push(expr);
    }

    /// Constrain `|norm_args|_2 <= bound`.
    pub fn add_soc(&mut self, norm_args: Vec<LinExpr>, bound: LinExpr) {
        self.cones.push(SocConstraint { norm_args, bound });
    }

    /// Largest violation of the constraints at `x`: equality residuals and
    /// `|v| - b` overshoot of the cones, all in absolute terms.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for eq in &self.equalities {
            worst = worst.max(eq.eval(x).abs());
        }
        for cone in &self.cones {
            let norm = cone.norm_args.iter().map(|e| e.eval(x).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(norm - cone.bound.eval(x));
        }
        worst
    }

    fn check_expr(&self, expr: &LinExpr) -> Result<(), ProgramError> {
        for &(v, _) in &expr.terms {
            if v >= self.num_vars {
                return Err(ProgramError::UnknownVariable { var: v, count: self.num_vars });
            }
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<Solution, ProgramError> {
        for eq in &self.equalities {
            self.check_expr(eq)?;
        }
        for cone in &self.cones {
            self.check_expr(&cone.bound)?;
            for arg in &cone.norm_args {
                self.check_expr(arg)?;
            }
        }

        // Lower to `Ax + s = b, s in K`: each equality becomes a zero-cone
        // row, each SOC block stacks its bound row above its vector rows
        // (Clarabel's cone order puts the scalar first), negated because the
        // slack is `b - Ax`.
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
        let mut b = Vec::new();
        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
        let mut row = 0usize;

        let mut push_expr = |expr: &LinExpr, sign: f64, row: usize, b: &mut Vec<f64>| {
            for (v, c) in expr.consolidated() {
                triplets.push((row, v, sign * c));
            }
            b.push(sign * -expr.constant);
        };

        if !self.equalities.is_empty() {
            for eq in &self.equalities {
                push_expr(eq, 1.0, row, &mut b);
                row += 1;
            }
            cones.push(SupportedConeT::ZeroConeT(self.equalities.len()));
        }
        for cone in &self.cones {
            push_expr(&cone.bound, -1.0, row, &mut b);
            row += 1;
            if cone.norm_args.is_empty() {
                cones.push(SupportedConeT::NonnegativeConeT(1));
                continue;
            }
            for arg in &cone.norm_args {
                push_expr(arg, -1.0, row, &mut b);
                row += 1;
            }
            cones.push(SupportedConeT::SecondOrderConeT(cone.norm_args.len() + 1));
        }

        let a = csc_from_triplets(row, self.num_vars, &mut triplets);
        let p = CscMatrix::zeros((self.num_vars, self.num_vars));
        let settings = DefaultSettings {
            verbose: false,
            max_iter: 200,
            tol_feas: 1e-9,
            tol_gap_abs: 1e-9,
            tol_gap_rel: 1e-9,
            ..DefaultSettings::default()
        };

        let mut solver = DefaultSolver::new(&p, &self.objective, &a, &b, &cones, settings)
            .map_err(|e| ProgramError::Solver(format!("{e:?}")))?;
        solver.solve();
        let status = match solver.solution.status {
            SolverStatus::Solved => SolveStatus::Optimal,
            SolverStatus::AlmostSolved => SolveStatus::Inaccurate,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                SolveStatus::Infeasible
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                SolveStatus::Unbounded
            }
            other => return Err(ProgramError::Solver(format!("{other:?}"))),
        };
        Ok(Solution { status, x: solver.solution.x.clone(), objective: solver.solution.obj_val })
    }
}

/// Column-compressed assembly from (row, col, value) triplets; duplicate
/// entries are summed.
fn csc_from_triplets(m: usize, n: usize, triplets: &mut [(usize, usize, f64)]) -> CscMatrix<f64> {
    triplets.sort_by_key(|&(r, c, _)| (c, r));
    let mut colptr = vec![0usize; n + 1];
    let mut rowval = Vec::with_capacity(triplets.len());
    let mut nzval: Vec<f64> = Vec::with_capacity(triplets.len());
    let mut last: Option<(usize, usize)> = None;
    for &(r, c, v) in triplets.iter() {
        if last == Some((c, r)) {
            *nzval.last_mut().unwrap() += v;
        } else {
            rowval.push(r);
            nzval.push(v);
            colptr[c + 1] += 1;
            last = Some((c, r));
        }
    }
    for c in 0..n {
        colptr[c + 1] += colptr[c];
    }
    CscMatrix::new(m, n, colptr, rowval, nzval)
}
