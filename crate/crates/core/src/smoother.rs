//! Pointwise and vertical-line Gauss–Seidel sweeps.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::mesh::TensorMesh;
use crate::sparse::CsrMatrix;
use crate::tridiag::{Tridiag, TridiagFactor};

pub use crate::tridiag::tridiag_solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineOrdering {
    Natural,
    /// Even-parity lines first, then odd, parity taken over the 0-based
    /// interior Ω coordinates.
    RedBlack,
}

/// One pointwise Gauss–Seidel sweep over all rows of `a`.
pub fn point_gs_sweep(a: &CsrMatrix, x: &mut [f64], b: &[f64], direction: Direction) -> Result<()> {
    let n = a.nrows();
    check_len(n, x.len())?;
    check_len(n, b.len())?;
    let mut relax = |i: usize| -> Result<()> {
        let (cols, vals) = a.row(i);
        let mut sum = 0.0;
        let mut diag = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i {
                diag = v;
            }
            sum += v * x[j];
        }
        if diag == 0.0 {
            return Err(Error::ZeroDiagonal { row: i });
        }
        x[i] += (b[i] - sum) / diag;
        Ok(())
    };
    match direction {
        Direction::Forward => (0..n).try_for_each(&mut relax),
        Direction::Backward => (0..n).rev().try_for_each(&mut relax),
    }
}

/// Vertical-line blocks of one level with their factored diagonal blocks.
#[derive(Debug, Clone)]
pub struct LinePlan {
    line_len: usize,
    order: Vec<usize>,
    factors: Vec<TridiagFactor>,
}

pub fn build_line_plan(
    mesh: &TensorMesh,
    a: &CsrMatrix,
    ordering: LineOrdering,
) -> Result<LinePlan> {
    let m = mesh.line_len();
    let lines = mesh.line_count();
    check_len(mesh.unknown_count(), a.nrows())?;

    let mut factors = Vec::with_capacity(lines);
    for line in 0..lines {
        let coords = mesh.line_coords(line);
        let start = line * m;
        let mut block = Tridiag::zeros(m);
        for l in 0..m {
            if mesh.dof_index(&coords, l) != Some(start + l) {
                return Err(Error::NonContiguousLine { line });
            }
            let (cols, vals) = a.row(start + l);
            for (&j, &v) in cols.iter().zip(vals) {
                if j < start || j >= start + m {
                    continue;
                }
                match (j - start) as isize - l as isize {
                    0 => block.diag[l] = v,
                    1 => block.sup[l] = v,
                    -1 => block.sub[l - 1] = v,
                    _ => return Err(Error::NonContiguousLine { line }),
                }
            }
        }
        factors.push(block.factor(line)?);
    }

    let order = match ordering {
        LineOrdering::Natural => (0..lines).collect(),
        LineOrdering::RedBlack => {
            let parity = |line: usize| -> usize {
                mesh.line_coords(line).iter().map(|&c| c - 1).sum::<usize>() % 2
            };
            let mut order: Vec<usize> = (0..lines).filter(|&l| parity(l) == 0).collect();
            order.extend((0..lines).filter(|&l| parity(l) == 1));
            order
        }
    };
    Ok(LinePlan {
        line_len: m,
        order,
        factors,
    })
}

impl LinePlan {
    pub fn line_len(&self) -> usize {
        self.line_len
    }

    pub fn line_count(&self) -> usize {
        self.factors.len()
    }

    /// Visiting order of a forward sweep.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Unknown indices of `line`.
    pub fn block(&self, line: usize) -> std::ops::Range<usize> {
        line * self.line_len..(line + 1) * self.line_len
    }

    pub fn factor(&self, line: usize) -> &TridiagFactor {
        &self.factors[line]
    }
}

/// Block Gauss–Seidel over vertical lines; each block solve is exact.
pub fn line_gs_sweep(
    a: &CsrMatrix,
    plan: &LinePlan,
    x: &mut [f64],
    b: &[f64],
    direction: Direction,
) -> Result<()> {
    let n = a.nrows();
    check_len(n, x.len())?;
    check_len(n, b.len())?;
    check_len(plan.line_count() * plan.line_len(), n)?;
    let mut r = vec![0.0; plan.line_len()];
    let mut relax = |line: usize| {
        let block = plan.block(line);
        for (ri, i) in r.iter_mut().zip(block.clone()) {
            *ri = b[i] - a.row_dot(i, x);
        }
        plan.factors[line].solve_in_place(&mut r);
        for (xi, ri) in x[block].iter_mut().zip(&r) {
            *xi += ri;
        }
    };
    match direction {
        Direction::Forward => plan.order.iter().for_each(|&l| relax(l)),
        Direction::Backward => plan.order.iter().rev().for_each(|&l| relax(l)),
    }
    Ok(())
}
