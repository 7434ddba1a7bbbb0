//! Prolongation between consecutive nested levels and its transpose.

use crate::error::{Error, Result};
use crate::mesh::TensorMesh;
use crate::sparse::CsrMatrix;

/// `P = P_Ω ⊗ P_y` from coarse to fine unknowns and `R = Pᵀ`.
///
/// Interpolation weights that would touch a Dirichlet vertex are dropped.
#[derive(Debug, Clone)]
pub struct TransferPair {
    omega: CsrMatrix,
    y: CsrMatrix,
    prolongation: CsrMatrix,
    restriction: CsrMatrix,
}

/// Interior-node prolongation on a uniform axis, `nc → 2 nc` intervals.
fn uniform_prolongation(nc: usize) -> CsrMatrix {
    let nf = 2 * nc;
    let mut triplets = Vec::new();
    for fine in 1..nf {
        let row = fine - 1;
        if fine % 2 == 0 {
            triplets.push((row, fine / 2 - 1, 1.0));
        } else {
            for coarse in [fine / 2, fine / 2 + 1] {
                if coarse >= 1 && coarse < nc {
                    triplets.push((row, coarse - 1, 0.5));
                }
            }
        }
    }
    CsrMatrix::from_triplets(nf - 1, nc - 1, &triplets).expect("indices in range")
}

/// Prolongation on the graded axis: rows are fine `y₀..y_{Mf−1}`, columns
/// coarse `y₀..y_{Mc−1}`; linear interpolation in `y` between coarse neighbours.
#[allow(clippy::needless_range_loop)]
fn graded_prolongation(coarse: &[f64], fine: &[f64]) -> Result<CsrMatrix> {
    let mc = coarse.len() - 1;
    let mf = fine.len() - 1;
    if mf != 2 * mc {
        return Err(Error::NotNested(format!("axis intervals {mc} -> {mf}")));
    }
    for (l, &y) in coarse.iter().enumerate() {
        if fine[2 * l] != y {
            return Err(Error::NotNested(format!(
                "coarse point {l} ({y}) differs from fine point {} ({})",
                2 * l,
                fine[2 * l]
            )));
        }
    }
    let mut triplets = Vec::new();
    for f in 0..mf {
        if f % 2 == 0 {
            triplets.push((f, f / 2, 1.0));
        } else {
            let (left, right) = (f / 2, f / 2 + 1);
            let theta = (fine[f] - coarse[left]) / (coarse[right] - coarse[left]);
            triplets.push((f, left, 1.0 - theta));
            if right < mc {
                triplets.push((f, right, theta));
            }
        }
    }
    CsrMatrix::from_triplets(mf, mc, &triplets)
}

pub fn build_transfer(coarse: &TensorMesh, fine: &TensorMesh) -> Result<TransferPair> {
    if coarse.dim() != fine.dim() {
        return Err(Error::NotNested(format!(
            "dimension {} vs {}",
            coarse.dim(),
            fine.dim()
        )));
    }
    if fine.nx() != 2 * coarse.nx() {
        return Err(Error::NotNested(format!(
            "nx {} is not a refinement of {}",
            fine.nx(),
            coarse.nx()
        )));
    }
    let y = graded_prolongation(coarse.axis().points(), fine.axis().points())?;
    let px = uniform_prolongation(coarse.nx());
    let omega = match coarse.dim() {
        1 => px,
        _ => px.kron(&px),
    };
    let prolongation = omega.kron(&y);
    let restriction = prolongation.transpose();
    Ok(TransferPair {
        omega,
        y,
        prolongation,
        restriction,
    })
}

impl TransferPair {
    pub fn prolongation(&self) -> &CsrMatrix {
        &self.prolongation
    }

    pub fn restriction(&self) -> &CsrMatrix {
        &self.restriction
    }

    pub fn omega_factor(&self) -> &CsrMatrix {
        &self.omega
    }

    pub fn y_factor(&self) -> &CsrMatrix {
        &self.y
    }

    pub fn coarse_len(&self) -> usize {
        self.prolongation.ncols()
    }

    pub fn fine_len(&self) -> usize {
        self.prolongation.nrows()
    }

    pub fn prolong(&self, coarse: &[f64]) -> Result<Vec<f64>> {
        self.prolongation.mul_vec(coarse)
    }

    /// Adds `P e` to `fine`.
    pub fn prolong_add(&self, coarse: &[f64], fine: &mut [f64]) -> Result<()> {
        self.restriction.transpose_mul_vec_add(coarse, fine)
    }

    pub fn restrict(&self, fine: &[f64]) -> Result<Vec<f64>> {
        self.restriction.mul_vec(fine)
    }
}
