//! Thin wrapper over the HiGHS simplex for the small linear programs behind
//! hull residuals and safe-kernel point selection.

use std::num::NonZeroU32;

use highs::{Col, HighsModelStatus, Model, RowProblem, Sense, SolvedModel};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Cmp {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<(usize, f64)>,
    cmp: Cmp,
    rhs: f64,
}

/// Minimize `c·x` over box-bounded variables and linear rows.
#[derive(Debug, Clone, Default)]
pub(crate) struct LinearProgram {
    bounds: Vec<(f64, f64)>,
    cost: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    /// Adds a variable and returns its column.
    pub(crate) fn var(&mut self, lo: f64, hi: f64, cost: f64) -> usize {
        self.bounds.push((lo, hi));
        self.cost.push(cost);
        self.bounds.len() - 1
    }

    pub(crate) fn nonneg(&mut self, cost: f64) -> usize {
        self.var(0.0, f64::INFINITY, cost)
    }

    pub(crate) fn free(&mut self, cost: f64) -> usize {
        self.var(f64::NEG_INFINITY, f64::INFINITY, cost)
    }

    pub(crate) fn row(&mut self, coeffs: Vec<(usize, f64)>, cmp: Cmp, rhs: f64) {
        self.rows.push(Row { coeffs, cmp, rhs });
    }

    pub(crate) fn set_cost(&mut self, j: usize, v: f64) {
        self.cost[j] = v;
    }

    pub(crate) fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.bounds[j] = (lo, hi);
    }

    /// Solves with tight dual-simplex tolerances first. When HiGHS reports a
    /// numerical failure rather than a verdict, the default tolerances and
    /// then the interior-point solver are tried.
    pub(crate) fn solve(&self) -> Result<LpOutcome> {
        self.solve_ladder(ATTEMPTS)
    }

    /// Like [`solve`](Self::solve) but with the given method tried first.
    /// On nearly degenerate programs the methods can stop at different
    /// points of the tolerance band, so callers that verify the answer
    /// independently may ask for a second opinion.
    pub(crate) fn solve_using(&self, method: Method) -> Result<LpOutcome> {
        self.solve_ladder(method.attempts())
    }

    /// Solves like [`solve_using`](Self::solve_using) and, when the answer
    /// is optimal, keeps the solver state so that a modified program can be
    /// re-solved from the final basis.
    pub(crate) fn solve_warm(&self, method: Method) -> Result<(LpOutcome, Option<WarmStart>)> {
        let mut last = String::new();
        for attempt in method.attempts() {
            match self.run(attempt) {
                Ok((outcome, solved, cols)) => {
                    let warm = matches!(outcome, LpOutcome::Optimal { .. }).then(|| WarmStart {
                        lp: self.clone(),
                        model: solved.into(),
                        cols,
                        method,
                    });
                    return Ok((outcome, warm));
                }
                Err(e) => last = e,
            }
        }
        Err(Error::Solver(last))
    }

    /// Solves with a pure-Rust simplex, which avoids the per-instance setup
    /// cost of HiGHS on programs with a handful of columns. Less robust on
    /// degenerate data; callers fall back to [`solve`](Self::solve).
    pub(crate) fn solve_small(&self) -> Result<LpOutcome> {
        use microlp::{ComparisonOp, OptimizationDirection, Problem};
        let mut p = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = self
            .bounds
            .iter()
            .zip(&self.cost)
            .map(|(&bounds, &c)| p.add_var(c, bounds))
            .collect();
        for r in &self.rows {
            let expr: Vec<_> = r.coeffs.iter().map(|&(j, v)| (vars[j], v)).collect();
            let op = match r.cmp {
                Cmp::Eq => ComparisonOp::Eq,
                Cmp::Le => ComparisonOp::Le,
                Cmp::Ge => ComparisonOp::Ge,
            };
            p.add_constraint(expr.as_slice(), op, r.rhs);
        }
        match p.solve() {
            Ok(outcome) => {
                let sol = outcome
                    .solution()
                    .ok_or_else(|| Error::Solver("simplex stopped without a solution".into()))?;
                let x: Vec<f64> = vars
                    .iter()
                    .zip(&self.bounds)
                    .map(|(&v, &(lo, hi))| sol.var_value(v).clamp(lo, hi))
                    .collect();
                let objective = self.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
                Ok(LpOutcome::Optimal { x, objective })
            }
            Err(microlp::Error::Infeasible) => Ok(LpOutcome::Infeasible),
            Err(microlp::Error::Unbounded) => Ok(LpOutcome::Unbounded),
            Err(e) => Err(Error::Solver(e.to_string())),
        }
    }

    fn solve_ladder(&self, attempts: &[Attempt]) -> Result<LpOutcome> {
        let mut last = String::new();
        for attempt in attempts {
            match self.run(attempt) {
                Ok((outcome, _, _)) => return Ok(outcome),
                Err(e) => last = e,
            }
        }
        Err(Error::Solver(last))
    }

    fn run(&self, attempt: &Attempt) -> std::result::Result<(LpOutcome, SolvedModel, Vec<Col>), String> {
        let mut p = RowProblem::default();
        let cols: Vec<Col> = self
            .bounds
            .iter()
            .zip(&self.cost)
            .map(|(&(lo, hi), &c)| p.add_column(c, lo..=hi))
            .collect();
        for r in &self.rows {
            let factors: Vec<_> = r.coeffs.iter().map(|&(j, v)| (cols[j], v)).collect();
            match r.cmp {
                Cmp::Eq => p.add_row(r.rhs..=r.rhs, factors),
                Cmp::Le => p.add_row(..=r.rhs, factors),
                Cmp::Ge => p.add_row(r.rhs.., factors),
            }
        }
        let mut model = p.optimise(Sense::Minimise);
        model.make_quiet();
        model.set_threads(NonZeroU32::MIN);
        // the programs here are small; presolve and threading cost more than they save
        model.set_option("parallel", "off");
        model.set_option("presolve", "off");
        model.set_option("primal_feasibility_tolerance", attempt.primal);
        model.set_option("dual_feasibility_tolerance", attempt.dual);
        model.set_option("solver", attempt.solver);
        model.set_option("simplex_strategy", attempt.strategy);
        let solved = model.try_solve().map_err(|s| format!("HiGHS returned {s:?}"))?;
        let outcome = self.outcome(&solved)?;
        Ok((outcome, solved, cols))
    }

    fn outcome(&self, solved: &SolvedModel) -> std::result::Result<LpOutcome, String> {
        match solved.status() {
            HighsModelStatus::Optimal => {
                let x: Vec<f64> = solved
                    .get_solution()
                    .columns()
                    .iter()
                    .zip(&self.bounds)
                    .map(|(&v, &(lo, hi))| v.clamp(lo, hi))
                    .collect();
                let objective = self.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
                Ok(LpOutcome::Optimal { x, objective })
            }
            HighsModelStatus::Infeasible => Ok(LpOutcome::Infeasible),
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => Ok(LpOutcome::Unbounded),
            other => Err(format!("HiGHS stopped with status {other:?}")),
        }
    }
}

/// A solved program with its HiGHS instance still alive. Edits apply to
/// both the instance and a plain copy; [`resolve`](Self::resolve) starts
/// from the previous basis and falls back to a cold solve of the copy.
pub(crate) struct WarmStart {
    lp: LinearProgram,
    model: Model,
    cols: Vec<Col>,
    method: Method,
}

impl WarmStart {
    pub(crate) fn nonneg(&mut self, cost: f64) -> usize {
        self.cols.push(self.model.add_col(cost, 0.0.., []));
        self.lp.nonneg(cost)
    }

    pub(crate) fn row(&mut self, coeffs: Vec<(usize, f64)>, cmp: Cmp, rhs: f64) {
        let factors: Vec<_> = coeffs.iter().map(|&(j, v)| (self.cols[j], v)).collect();
        match cmp {
            Cmp::Eq => self.model.add_row(rhs..=rhs, factors),
            Cmp::Le => self.model.add_row(..=rhs, factors),
            Cmp::Ge => self.model.add_row(rhs.., factors),
        };
        self.lp.row(coeffs, cmp, rhs);
    }

    pub(crate) fn set_cost(&mut self, j: usize, v: f64) {
        self.model.change_column_cost(self.cols[j], v);
        self.lp.set_cost(j, v);
    }

    pub(crate) fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.model.change_column_bounds(self.cols[j], lo..=hi);
        self.lp.set_bounds(j, lo, hi);
    }

    /// Re-solves with the primal simplex, which suits edits that keep the
    /// previous basis primal feasible (new cost, looser bounds, rows whose
    /// new columns can absorb them).
    pub(crate) fn resolve(mut self) -> Result<LpOutcome> {
        if self.method != Method::InteriorPoint {
            self.model.set_option("simplex_strategy", PRIMAL_ATTEMPTS[0].strategy);
        }
        let warm = self
            .model
            .try_solve()
            .map_err(|s| format!("HiGHS returned {s:?}"))
            .and_then(|solved| self.lp.outcome(&solved));
        match warm {
            Ok(outcome) => Ok(outcome),
            Err(_) => self.lp.solve_using(self.method),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Method {
    DualSimplex,
    PrimalSimplex,
    InteriorPoint,
}

impl Method {
    fn attempts(self) -> &'static [Attempt] {
        match self {
            Method::DualSimplex => ATTEMPTS,
            Method::PrimalSimplex => PRIMAL_ATTEMPTS,
            Method::InteriorPoint => &ATTEMPTS[2..],
        }
    }
}

struct Attempt {
    solver: &'static str,
    // HiGHS simplex_strategy: 1 dual, 4 primal
    strategy: i32,
    primal: f64,
    dual: f64,
}

const ATTEMPTS: &[Attempt] = &[
    Attempt {
        solver: "simplex",
        strategy: 1,
        primal: 1e-10,
        dual: 1e-10,
    },
    Attempt {
        solver: "simplex",
        strategy: 1,
        primal: 1e-10,
        dual: 1e-7,
    },
    Attempt {
        solver: "ipm",
        strategy: 1,
        primal: 1e-10,
        dual: 1e-7,
    },
];

const PRIMAL_ATTEMPTS: &[Attempt] = &[
    Attempt {
        solver: "simplex",
        strategy: 4,
        primal: 1e-10,
        dual: 1e-10,
    },
    Attempt {
        solver: "simplex",
        strategy: 4,
        primal: 1e-10,
        dual: 1e-7,
    },
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_optimum() {
        // max x0 + x1  s.t. x0 + 2 x1 <= 4, 3 x0 + x1 <= 6
        let mut lp = LinearProgram::new();
        let a = lp.nonneg(-1.0);
        let b = lp.nonneg(-1.0);
        lp.row(vec![(a, 1.0), (b, 2.0)], Cmp::Le, 4.0);
        lp.row(vec![(a, 3.0), (b, 1.0)], Cmp::Le, 6.0);
        match lp.solve().unwrap() {
            LpOutcome::Optimal { x, objective } => {
                assert!((x[0] - 1.6).abs() < 1e-12);
                assert!((x[1] - 1.2).abs() < 1e-12);
                assert!((objective + 2.8).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LinearProgram::new();
        let a = lp.nonneg(0.0);
        let b = lp.nonneg(0.0);
        lp.row(vec![(a, 1.0), (b, 1.0)], Cmp::Eq, -1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new();
        let a = lp.free(-1.0);
        let b = lp.nonneg(0.0);
        lp.row(vec![(a, 1.0), (b, -1.0)], Cmp::Eq, 0.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let mut lp = LinearProgram::new();
        let a = lp.nonneg(1.0);
        let b = lp.nonneg(0.0);
        lp.row(vec![(a, 1.0), (b, 1.0)], Cmp::Eq, 1.0);
        lp.row(vec![(a, 2.0), (b, 2.0)], Cmp::Eq, 2.0);
        match lp.solve().unwrap() {
            LpOutcome::Optimal { x, objective } => {
                assert!(objective.abs() < 1e-12);
                assert!((x[1] - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn methods_agree_on_small_optimum() {
        let mut lp = LinearProgram::new();
        let a = lp.nonneg(-1.0);
        let b = lp.nonneg(-1.0);
        lp.row(vec![(a, 1.0), (b, 2.0)], Cmp::Le, 4.0);
        lp.row(vec![(a, 3.0), (b, 1.0)], Cmp::Le, 6.0);
        for m in [Method::DualSimplex, Method::PrimalSimplex, Method::InteriorPoint] {
            match lp.solve_using(m).unwrap() {
                LpOutcome::Optimal { objective, .. } => assert!((objective + 2.8).abs() < 1e-7, "{m:?}"),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn warm_resolve_matches_cold() {
        let mut lp = LinearProgram::new();
        let a = lp.nonneg(-1.0);
        let b = lp.nonneg(-1.0);
        lp.row(vec![(a, 1.0), (b, 2.0)], Cmp::Le, 4.0);
        lp.row(vec![(a, 3.0), (b, 1.0)], Cmp::Le, 6.0);
        let (_, warm) = lp.solve_warm(Method::DualSimplex).unwrap();
        let mut warm = warm.unwrap();
        // add x0 <= 1 and drop the weight on x1
        let s = warm.nonneg(0.0);
        warm.row(vec![(a, 1.0), (s, 1.0)], Cmp::Eq, 1.0);
        warm.set_cost(b, -0.5);
        warm.set_bounds(a, 0.0, 5.0);
        match warm.resolve().unwrap() {
            LpOutcome::Optimal { x, objective } => {
                assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.5).abs() < 1e-12);
                assert!((objective + 1.75).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn small_solver_agrees() {
        let mut lp = LinearProgram::new();
        let a = lp.nonneg(-1.0);
        let b = lp.nonneg(-1.0);
        lp.row(vec![(a, 1.0), (b, 2.0)], Cmp::Le, 4.0);
        lp.row(vec![(a, 3.0), (b, 1.0)], Cmp::Le, 6.0);
        match lp.solve_small().unwrap() {
            LpOutcome::Optimal { x, objective } => {
                assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
                assert!((objective + 2.8).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        let mut bad = LinearProgram::new();
        let a = bad.nonneg(0.0);
        bad.row(vec![(a, 1.0)], Cmp::Le, -1.0);
        assert_eq!(bad.solve_small().unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn bounds_respected() {
        let mut lp = LinearProgram::new();
        let a = lp.var(-2.0, 3.0, -1.0);
        lp.set_bounds(a, -2.0, 2.5);
        lp.set_cost(a, 1.0);
        match lp.solve().unwrap() {
            LpOutcome::Optimal { x, .. } => assert_eq!(x[0], -2.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
