//! Tridiagonal matrices and the Thomas algorithm.

use crate::error::{check_len, Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Tridiag {
    /// `sub[i] = T[i+1][i]`
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    /// `sup[i] = T[i][i+1]`
    pub sup: Vec<f64>,
}

impl Tridiag {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty tridiagonal matrix".into()));
        }
        check_len(n - 1, sub.len())?;
        check_len(n - 1, sup.len())?;
        Ok(Self { sub, diag, sup })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            sub: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            sup: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            diag: vec![1.0; n],
            ..Self::zeros(n)
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match j as isize - i as isize {
            0 => self.diag[i],
            1 => self.sup[i],
            -1 => self.sub[j],
            _ => 0.0,
        }
    }

    /// Adds a symmetric 2×2 element block on rows/cols `i, i+1`.
    pub(crate) fn add_element(&mut self, i: usize, block: [f64; 3]) {
        let [aa, ab, bb] = block;
        self.diag[i] += aa;
        self.diag[i + 1] += bb;
        self.sup[i] += ab;
        self.sub[i] += ab;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.sup[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.mul_vec(&vec![1.0; self.n()])
    }

    pub fn inf_norm(&self) -> f64 {
        (0..self.n())
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.sub[i - 1].abs();
                }
                if i + 1 < self.n() {
                    s += self.sup[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// Principal submatrix on rows/cols `range`.
    pub fn restrict(&self, range: std::ops::Range<usize>) -> Self {
        let (a, b) = (range.start, range.end);
        Self {
            sub: self.sub[a..b - 1].to_vec(),
            diag: self.diag[a..b].to_vec(),
            sup: self.sup[a..b - 1].to_vec(),
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let n = self.n();
        let mut triplets = Vec::with_capacity(3 * n);
        for i in 0..n {
            if i > 0 {
                triplets.push((i, i - 1, self.sub[i - 1]));
            }
            triplets.push((i, i, self.diag[i]));
            if i + 1 < n {
                triplets.push((i, i + 1, self.sup[i]));
            }
        }
        CsrMatrix::from_triplets(n, n, &triplets).expect("indices in range")
    }

    /// LU factorization without pivoting. `line` labels errors.
    pub fn factor(&self, line: usize) -> Result<TridiagFactor> {
        let n = self.n();
        let mut pivots = Vec::with_capacity(n);
        let mut multipliers = Vec::with_capacity(n.saturating_sub(1));
        let mut pivot = self.diag[0];
        for i in 0..n {
            if i > 0 {
                let l = self.sub[i - 1] / pivots[i - 1];
                multipliers.push(l);
                pivot = self.diag[i] - l * self.sup[i - 1];
            }
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::ZeroPivot { line, row: i });
            }
            pivots.push(pivot);
        }
        Ok(TridiagFactor {
            pivots,
            multipliers,
            sup: self.sup.clone(),
        })
    }
}

/// Thomas factors `T = L U` with unit-lower `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagFactor {
    pivots: Vec<f64>,
    multipliers: Vec<f64>,
    sup: Vec<f64>,
}

impl TridiagFactor {
    pub fn n(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.n();
        for i in 1..n {
            rhs[i] -= self.multipliers[i - 1] * rhs[i - 1];
        }
        rhs[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            rhs[i] = (rhs[i] - self.sup[i] * rhs[i + 1]) / self.pivots[i];
        }
    }
}

/// Solves `T x = b` with the Thomas algorithm.
pub fn tridiag_solve(t: &Tridiag, b: &[f64]) -> Result<Vec<f64>> {
    check_len(t.n(), b.len())?;
    let factor = t.factor(0)?;
    let mut x = b.to_vec();
    factor.solve_in_place(&mut x);
    Ok(x)
}
