//! Energy errors against the exact extension energy, convergence ratios, and
//! spectral-equivalence measurements of the weighted mass matrix.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_mass, energy_inner, WeightedOperator};
use crate::error::{Error, Result};
use crate::mesh::TensorMesh;
use crate::sparse::{dot, norm2};
use crate::special::extension_constant;

/// Manufactured problem whose solution is a single Dirichlet eigenfunction:
/// `sin(3πx)` on `(0,1)` or `sin(2πx₁) sin(2πx₂)` on `(0,1)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactProblem {
    pub dim: usize,
    pub s: f64,
    /// Dirichlet Laplacian eigenvalue of the mode.
    pub lambda: f64,
    /// Squared L² norm of the mode.
    pub coeff_sq: f64,
    pub d_s: f64,
}

impl ExactProblem {
    pub fn new(dim: usize, s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter(format!("s = {s} not in (0,1)")));
        }
        let (lambda, coeff_sq) = match dim {
            1 => (9.0 * PI * PI, 0.5),
            2 => (8.0 * PI * PI, 0.25),
            _ => return Err(Error::InvalidParameter(format!("dim = {dim}"))),
        };
        Ok(Self {
            dim,
            s,
            lambda,
            coeff_sq,
            d_s: extension_constant(s),
        })
    }

    pub fn solution(&self, x: &[f64]) -> f64 {
        match self.dim {
            1 => (3.0 * PI * x[0]).sin(),
            _ => (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin(),
        }
    }

    /// Right-hand side `f = (−Δ)^s u = λ^s u`.
    pub fn source(&self, x: &[f64]) -> f64 {
        self.lambda.powf(self.s) * self.solution(x)
    }

    /// Weighted Dirichlet energy of the exact extension, `d_s λ^s ‖u‖²`.
    pub fn exact_energy_sq(&self) -> f64 {
        self.d_s * self.lambda.powf(self.s) * self.coeff_sq
    }
}

pub fn exact_energy_sq(p: &ExactProblem) -> f64 {
    p.exact_energy_sq()
}

/// Energy-norm error of a Galerkin solution through
/// `‖∇(𝒰 − V)‖² = ‖∇𝒰‖² − ‖∇V‖²`.
pub fn energy_error(p: &ExactProblem, a: &WeightedOperator, x: &[f64]) -> Result<f64> {
    let exact = p.exact_energy_sq();
    let defect = exact - energy_inner(a, x, x)?;
    if defect < -1e-8 * exact {
        return Err(Error::NegativeEnergyDefect { defect, exact });
    }
    Ok(defect.max(0.0).sqrt())
}

/// Ratios `E(h_k)/E(h_{k+1})` of consecutive errors.
pub fn convergence_rate(errors: &[f64]) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return Err(Error::InvalidParameter("need at least two levels".into()));
    }
    if errors.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter("errors must be positive".into()));
    }
    Ok(errors.windows(2).map(|w| w[0] / w[1]).collect())
}

/// Extremal generalized Rayleigh quotients of `M^α` against its diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBounds {
    pub nx: usize,
    pub c1: f64,
    pub c2: f64,
}

/// Estimates `[c₁, c₂]` per level from 100 random vectors refined by
/// `power_steps` power iterations on the diagonally scaled mass matrix
/// (shifted for the lower end).
pub fn spectral_equivalence_report(
    meshes: &[TensorMesh],
    alpha: f64,
    power_steps: usize,
    seed: u64,
) -> Result<Vec<SpectralBounds>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    meshes
        .iter()
        .map(|mesh| {
            let mass = assemble_mass(mesh, alpha)?;
            let n = mass.nrows();
            let inv_sqrt: Vec<f64> = mass.diagonal().iter().map(|d| 1.0 / d.sqrt()).collect();
            let scaled = |v: &[f64]| -> Result<Vec<f64>> {
                let w: Vec<f64> = v.iter().zip(&inv_sqrt).map(|(a, b)| a * b).collect();
                let mw = mass.mul_vec(&w)?;
                Ok(mw.iter().zip(&inv_sqrt).map(|(a, b)| a * b).collect())
            };
            let rayleigh = |v: &[f64]| -> Result<f64> { Ok(dot(v, &scaled(v)?) / dot(v, v)) };

            let mut c1 = f64::INFINITY;
            let mut c2: f64 = 0.0;
            let mut lo_start = Vec::new();
            let mut hi_start = Vec::new();
            for _ in 0..100 {
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let q = rayleigh(&v)?;
                if q < c1 {
                    c1 = q;
                    lo_start = v.clone();
                }
                if q > c2 {
                    c2 = q;
                    hi_start = v;
                }
            }

            // Gershgorin bound on the scaled matrix serves as the shift.
            let shift = (0..n)
                .map(|i| {
                    let (cols, vals) = mass.row(i);
                    cols.iter()
                        .zip(vals)
                        .map(|(&j, v)| (v * inv_sqrt[i] * inv_sqrt[j]).abs())
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);

            let mut v = hi_start;
            for _ in 0..power_steps {
                let w = scaled(&v)?;
                let nw = norm2(&w);
                v = w.iter().map(|x| x / nw).collect();
            }
            c2 = c2.max(rayleigh(&v)?);

            let mut v = lo_start;
            for _ in 0..power_steps {
                let bv = scaled(&v)?;
                let w: Vec<f64> = v.iter().zip(&bv).map(|(x, y)| shift * x - y).collect();
                let nw = norm2(&w);
                v = w.iter().map(|x| x / nw).collect();
            }
            c1 = c1.min(rayleigh(&v)?);
            Ok(SpectralBounds {
                nx: mesh.nx(),
                c1,
                c2,
            })
        })
        .collect()
}
