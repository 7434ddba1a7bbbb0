//! Symmetric V-cycle and the outer residual-controlled iteration.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_operator, energy_norm, WeightedOperator};
use crate::error::{check_len, Error, FailureReason, Result};
use crate::mesh::TensorMesh;
use crate::smoother::{
    build_line_plan, line_gs_sweep, point_gs_sweep, Direction, LineOrdering, LinePlan,
};
use crate::sparse::{norm2, CsrMatrix};
use crate::transfer::{build_transfer, TransferPair};

/// Smoothing steps used throughout the experiments.
pub const DEFAULT_SMOOTHING_STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SmootherKind {
    Point,
    Line(LineOrdering),
}

/// Dense Cholesky factor for the coarsest operator.
#[derive(Debug, Clone)]
pub struct DenseCholesky {
    n: usize,
    /// Row-major lower triangle.
    l: Vec<f64>,
}

impl DenseCholesky {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        check_len(n, a.ncols())?;
        let mut l = vec![0.0; n * n];
        for (i, row) in a.to_dense().into_iter().enumerate() {
            l[i * n..i * n + i + 1].copy_from_slice(&row[..=i]);
        }
        for j in 0..n {
            let mut d = l[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { row: j, pivot: d });
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut v = l[i * n + j];
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = v / d;
            }
        }
        Ok(Self { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, b.len())?;
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.l[i * n + k] * x[k];
            }
            x[i] /= self.l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= self.l[k * n + i] * x[k];
            }
            x[i] /= self.l[i * n + i];
        }
        Ok(x)
    }
}

#[derive(Debug, Clone)]
pub struct Level {
    pub mesh: TensorMesh,
    pub operator: WeightedOperator,
    pub line_plan: Option<LinePlan>,
}

/// Levels `0..=J`, coarse to fine, with transfers between consecutive ones.
#[derive(Debug, Clone)]
pub struct MgHierarchy {
    levels: Vec<Level>,
    transfers: Vec<TransferPair>,
    smoother: SmootherKind,
    smoothing_steps: usize,
    coarse_solver: DenseCholesky,
}

impl MgHierarchy {
    /// Assembles every level of `meshes` (coarse to fine) with weight exponent `alpha`.
    pub fn new(
        meshes: Vec<TensorMesh>,
        alpha: f64,
        smoother: SmootherKind,
        smoothing_steps: usize,
    ) -> Result<Self> {
        if meshes.is_empty() {
            return Err(Error::InvalidParameter("hierarchy needs a level".into()));
        }
        let transfers = meshes
            .windows(2)
            .map(|w| build_transfer(&w[0], &w[1]))
            .collect::<Result<Vec<_>>>()?;
        let levels = meshes
            .into_iter()
            .map(|mesh| {
                let operator = assemble_operator(&mesh, alpha)?;
                let line_plan = match smoother {
                    SmootherKind::Line(ordering) => {
                        Some(build_line_plan(&mesh, operator.flat(), ordering)?)
                    }
                    SmootherKind::Point => None,
                };
                Ok(Level {
                    mesh,
                    operator,
                    line_plan,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let coarse_solver = DenseCholesky::new(levels[0].operator.flat())?;
        Ok(Self {
            levels,
            transfers,
            smoother,
            smoothing_steps,
            coarse_solver,
        })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn transfers(&self) -> &[TransferPair] {
        &self.transfers
    }

    /// Index `J` of the finest level.
    pub fn finest_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn finest(&self) -> &Level {
        self.levels.last().expect("non-empty")
    }

    pub fn smoother(&self) -> SmootherKind {
        self.smoother
    }

    pub fn smoothing_steps(&self) -> usize {
        self.smoothing_steps
    }

    pub fn coarse_solver(&self) -> &DenseCholesky {
        &self.coarse_solver
    }

    /// One Gauss–Seidel sweep of the configured kind on level `k`.
    pub fn smooth(&self, k: usize, x: &mut [f64], b: &[f64], direction: Direction) -> Result<()> {
        let level = &self.levels[k];
        match &level.line_plan {
            Some(plan) => line_gs_sweep(level.operator.flat(), plan, x, b, direction),
            None => point_gs_sweep(level.operator.flat(), x, b, direction),
        }
    }
}

/// Approximate solution of `A_k e = r` by one symmetric V-cycle with `m`
/// pre- and post-smoothing sweeps.
pub fn vcycle_apply(h: &MgHierarchy, k: usize, r: &[f64], m: usize) -> Result<Vec<f64>> {
    let level = h
        .levels
        .get(k)
        .ok_or_else(|| Error::InvalidParameter(format!("level {k} > J")))?;
    check_len(level.operator.n(), r.len())?;
    if k == 0 {
        return h.coarse_solver.solve(r);
    }
    let mut u = vec![0.0; r.len()];
    for _ in 0..m {
        h.smooth(k, &mut u, r, Direction::Forward)?;
    }
    let mut residual = vec![0.0; r.len()];
    level.operator.residual_into(&u, r, &mut residual)?;
    let transfer = &h.transfers[k - 1];
    let coarse = vcycle_apply(h, k - 1, &transfer.restrict(&residual)?, m)?;
    transfer.prolong_add(&coarse, &mut u)?;
    for _ in 0..m {
        h.smooth(k, &mut u, r, Direction::Backward)?;
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 200,
        }
    }
}

/// Echo of the solve setup stored alongside the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub levels: usize,
    pub unknowns: usize,
    pub smoother: SmootherKind,
    pub smoothing_steps: usize,
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative ℓ² residuals, starting with the initial guess.
    #[serde(rename = "residuals")]
    pub residual_history: Vec<f64>,
    /// Geometric mean residual reduction per cycle.
    #[serde(rename = "contraction")]
    pub contraction_estimate: f64,
    #[serde(rename = "wall_time_s")]
    pub wall_time: f64,
    pub config: SolveConfig,
}

/// Number of consecutive residual increases treated as divergence.
const DIVERGENCE_STREAK: usize = 3;

/// Iterates `x ← x + MG(b − A x)` on the finest level until the relative
/// residual drops to `opts.tol`.
pub fn mg_solve(
    h: &MgHierarchy,
    b: &[f64],
    opts: &SolveOptions,
    x0: Option<&[f64]>,
) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let level = h.finest();
    let op = &level.operator;
    let n = op.n();
    check_len(n, b.len())?;
    let mut x = match x0 {
        Some(x0) => {
            check_len(n, x0.len())?;
            x0.to_vec()
        }
        None => vec![0.0; n],
    };
    let config = SolveConfig {
        levels: h.levels.len(),
        unknowns: n,
        smoother: h.smoother,
        smoothing_steps: h.smoothing_steps,
        tol: opts.tol,
        max_iter: opts.max_iter,
    };
    let report = |iterations: usize, history: Vec<f64>| {
        let contraction = match (history.first(), history.last()) {
            (Some(&r0), Some(&rk)) if iterations > 0 && r0 > 0.0 => {
                (rk / r0).powf(1.0 / iterations as f64)
            }
            _ => 0.0,
        };
        SolveReport {
            iterations,
            residual_history: history,
            contraction_estimate: contraction,
            wall_time: start.elapsed().as_secs_f64(),
            config: config.clone(),
        }
    };

    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok((vec![0.0; n], report(0, Vec::new())));
    }
    let mut residual = vec![0.0; n];
    op.residual_into(&x, b, &mut residual)?;
    let mut history = vec![norm2(&residual) / b_norm];
    let mut increases = 0;
    let mut iterations = 0;
    while history[iterations] > opts.tol {
        if iterations == opts.max_iter {
            return Err(Error::NotConverged {
                reason: FailureReason::MaxIterations,
                report: Box::new(report(iterations, history)),
            });
        }
        let e = vcycle_apply(h, h.finest_level(), &residual, h.smoothing_steps)?;
        for (xi, ei) in x.iter_mut().zip(&e) {
            *xi += ei;
        }
        op.residual_into(&x, b, &mut residual)?;
        history.push(norm2(&residual) / b_norm);
        iterations += 1;
        if history[iterations] > history[iterations - 1] {
            increases += 1;
            if increases == DIVERGENCE_STREAK {
                return Err(Error::NotConverged {
                    reason: FailureReason::Diverged,
                    report: Box::new(report(iterations, history)),
                });
            }
        } else {
            increases = 0;
        }
    }
    Ok((x, report(iterations, history)))
}

/// Measured energy-norm contraction per cycle on the homogeneous problem
/// from a random start. Stops early once the error reaches rounding level.
pub fn estimate_contraction(h: &MgHierarchy, cycles: usize, seed: u64) -> Result<f64> {
    let op = &h.finest().operator;
    let n = op.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let e0 = energy_norm(op, &x)?;
    x.iter_mut().for_each(|v| *v /= e0);
    let mut residual = vec![0.0; n];
    let zero = vec![0.0; n];
    let mut ratio = 1.0;
    let mut done = 0;
    for _ in 0..cycles {
        op.residual_into(&x, &zero, &mut residual)?;
        let e = vcycle_apply(h, h.finest_level(), &residual, h.smoothing_steps)?;
        for (xi, ei) in x.iter_mut().zip(&e) {
            *xi += ei;
        }
        done += 1;
        ratio = energy_norm(op, &x)?;
        if ratio < 1e-13 {
            break;
        }
    }
    if done == 0 {
        return Ok(1.0);
    }
    Ok(ratio.powf(1.0 / done as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_hierarchy, GradingMap};

    fn hierarchy(levels: usize, smoother: SmootherKind) -> MgHierarchy {
        let meshes =
            build_hierarchy(1, GradingMap::original(2.6, 1.0).unwrap(), levels, 4).unwrap();
        MgHierarchy::new(meshes, -0.2, smoother, 3).unwrap()
    }

    #[test]
    fn cholesky_solves() {
        let a = CsrMatrix::from_dense(&[vec![4.0, 2.0], vec![2.0, 3.0]]);
        let x = DenseCholesky::new(&a).unwrap().solve(&[2.0, 1.0]).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && x[1].abs() < 1e-15);
        let bad = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(DenseCholesky::new(&bad).is_err());
    }

    #[test]
    fn single_level_is_direct_solve() {
        let h = hierarchy(0, SmootherKind::Point);
        let r: Vec<f64> = (0..h.finest().operator.n()).map(|i| i as f64).collect();
        let e = vcycle_apply(&h, 0, &r, 3).unwrap();
        let back = h.finest().operator.apply(&e).unwrap();
        for (p, q) in back.iter().zip(&r) {
            assert!((p - q).abs() < 1e-11 * (1.0 + q.abs()));
        }
        assert!(estimate_contraction(&h, 15, 1).unwrap() < 1e-10);
    }

    #[test]
    fn zero_residual_zero_correction() {
        let h = hierarchy(2, SmootherKind::Line(LineOrdering::RedBlack));
        let n = h.finest().operator.n();
        let e = vcycle_apply(&h, 2, &vec![0.0; n], 3).unwrap();
        assert!(e.iter().all(|&v| v == 0.0));
        assert!(vcycle_apply(&h, 3, &vec![0.0; n], 3).is_err());
    }

    #[test]
    fn zero_rhs_needs_no_iterations() {
        let h = hierarchy(2, SmootherKind::Point);
        let n = h.finest().operator.n();
        let (x, report) = mg_solve(&h, &vec![0.0; n], &SolveOptions::default(), None).unwrap();
        assert_eq!(report.iterations, 0);
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exhausted_budget_is_a_failure() {
        let h = hierarchy(2, SmootherKind::Point);
        let b = vec![1.0; h.finest().operator.n()];
        let opts = SolveOptions {
            tol: 1e-30,
            max_iter: 3,
        };
        match mg_solve(&h, &b, &opts, None) {
            Err(Error::NotConverged { reason, report }) => {
                assert!(matches!(
                    reason,
                    FailureReason::MaxIterations | FailureReason::Diverged
                ));
                assert!(report.residual_history.len() >= 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn report_serializes_with_expected_keys() {
        let h = hierarchy(1, SmootherKind::Line(LineOrdering::RedBlack));
        let b = vec![1.0; h.finest().operator.n()];
        let (_, report) = mg_solve(&h, &b, &SolveOptions::default(), None).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        for key in [
            "iterations",
            "residuals",
            "contraction",
            "wall_time_s",
            "config",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert!(*report.residual_history.last().unwrap() <= 1e-7);
    }
}
