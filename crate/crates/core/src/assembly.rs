//! Weighted stiffness operator of the extension problem in Kronecker-sum
//! form, the Neumann trace load, and the energy inner product.
//!
//! With `𝒜 = y^α I` the bilinear form separates:
//! `A = S_Ω ⊗ M_y^α + M_Ω ⊗ S_y^α`, where the Ω factors are unweighted P1/Q1
//! matrices and the `y` factors carry the weight. All weighted element
//! integrals are evaluated in closed form (or a convergent series) so the
//! Galerkin coarsening identity holds to rounding.

use crate::error::{check_len, Error, Result};
use crate::mesh::{GradedAxis, TensorMesh};
use crate::sparse::{dot, CsrMatrix};
use crate::special::extension_constant;
use crate::tridiag::Tridiag;

/// `∫_a^b y^{α+k} dy`.
pub fn weighted_moment(a: f64, b: f64, alpha: f64, k: u32) -> Result<f64> {
    if !(a >= 0.0) || !(b > a) {
        return Err(Error::InvalidParameter(format!(
            "moment interval ({a}, {b})"
        )));
    }
    if !(alpha > -1.0 && alpha < 1.0) || k > 2 {
        return Err(Error::InvalidParameter(format!("alpha = {alpha}, k = {k}")));
    }
    let p = alpha + f64::from(k) + 1.0;
    if a == 0.0 {
        Ok(b.powf(p) / p)
    } else {
        // b^p - a^p without cancellation
        Ok(a.powf(p) * (p * ((b - a) / a).ln_1p()).exp_m1() / p)
    }
}

/// Local weighted mass integrals `[∫y^α φ_L², ∫y^α φ_L φ_R, ∫y^α φ_R²]` on `[a, b]`.
pub fn element_mass(a: f64, b: f64, alpha: f64) -> Result<[f64; 3]> {
    let h = b - a;
    if a == 0.0 {
        weighted_moment(a, b, alpha, 0)?;
        let s = h.powf(alpha + 1.0);
        let (p1, p2, p3) = (alpha + 1.0, alpha + 2.0, alpha + 3.0);
        return Ok([2.0 * s / (p1 * p2 * p3), s / (p2 * p3), s / p3]);
    }
    let rho = h / a;
    if rho <= 0.5 {
        if !(a > 0.0) || !(alpha > -1.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("element ({a}, {b})")));
        }
        // y^α = a^α (1 + ρt)^α expanded binomially; t^j integrated against
        // (1-t)², t(1-t), t² in closed form.
        let mut out = [0.0; 3];
        let mut coeff = 1.0;
        for j in 0..200 {
            let jf = j as f64;
            let term = [
                2.0 / ((jf + 1.0) * (jf + 2.0) * (jf + 3.0)),
                1.0 / ((jf + 2.0) * (jf + 3.0)),
                1.0 / (jf + 3.0),
            ];
            for (o, t) in out.iter_mut().zip(term) {
                *o += coeff * t;
            }
            coeff *= (alpha - jf) / (jf + 1.0) * rho;
            if coeff.abs() < 1e-18 * out[2] {
                break;
            }
        }
        let scale = h * a.powf(alpha);
        return Ok(out.map(|v| v * scale));
    }
    // b ≤ 3h here, so the moment combinations lose at most a factor 9.
    let m0 = weighted_moment(a, b, alpha, 0)?;
    let m1 = weighted_moment(a, b, alpha, 1)?;
    let m2 = weighted_moment(a, b, alpha, 2)?;
    let h2 = h * h;
    Ok([
        (b * b * m0 - 2.0 * b * m1 + m2) / h2,
        (-m2 + (a + b) * m1 - a * b * m0) / h2,
        (m2 - 2.0 * a * m1 + a * a * m0) / h2,
    ])
}

/// One-dimensional factors over all nodes, before boundary elimination.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis1DMatrices {
    pub mass_w: Tridiag,
    pub stiff_w: Tridiag,
    pub mass_x: Tridiag,
    pub stiff_x: Tridiag,
}

/// Weighted factors on the graded axis and unweighted factors on a uniform
/// Ω-axis with the same number of intervals.
pub fn assemble_axis_matrices(axis: &GradedAxis, alpha: f64) -> Result<Axis1DMatrices> {
    let (mass_w, stiff_w) = weighted_axis_factors(axis.points(), alpha)?;
    let (mass_x, stiff_x) = uniform_factors(axis.intervals());
    Ok(Axis1DMatrices {
        mass_w,
        stiff_w,
        mass_x,
        stiff_x,
    })
}

pub(crate) fn weighted_axis_factors(points: &[f64], alpha: f64) -> Result<(Tridiag, Tridiag)> {
    let n = points.len();
    let mut mass = Tridiag::zeros(n);
    let mut stiff = Tridiag::zeros(n);
    for (l, w) in points.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let h = b - a;
        mass.add_element(l, element_mass(a, b, alpha)?);
        let k = weighted_moment(a, b, alpha, 0)? / (h * h);
        stiff.add_element(l, [k, -k, k]);
    }
    Ok((mass, stiff))
}

/// P1 mass and stiffness on `[0,1]` split into `nx` equal intervals.
pub(crate) fn uniform_factors(nx: usize) -> (Tridiag, Tridiag) {
    let h = 1.0 / nx as f64;
    let mut mass = Tridiag::zeros(nx + 1);
    let mut stiff = Tridiag::zeros(nx + 1);
    for e in 0..nx {
        mass.add_element(e, [h / 3.0, h / 6.0, h / 3.0]);
        stiff.add_element(e, [1.0 / h, -1.0 / h, 1.0 / h]);
    }
    (mass, stiff)
}

/// Assembled `A = S_Ω ⊗ M_y^α + M_Ω ⊗ S_y^α` on the unknowns.
#[derive(Debug, Clone)]
pub struct WeightedOperator {
    dim: usize,
    nx: usize,
    omega_stiff: CsrMatrix,
    omega_mass: CsrMatrix,
    y_mass: Tridiag,
    y_stiff: Tridiag,
    flat: CsrMatrix,
}

/// Interior-node Ω factors `(S_Ω, M_Ω)`.
fn omega_factors(dim: usize, nx: usize) -> (CsrMatrix, CsrMatrix) {
    let (mass_x, stiff_x) = uniform_factors(nx);
    let mx = mass_x.restrict(1..nx).to_csr();
    let sx = stiff_x.restrict(1..nx).to_csr();
    match dim {
        1 => (sx, mx),
        _ => {
            let s = sx
                .kron(&mx)
                .add_scaled(1.0, &mx.kron(&sx), 1.0)
                .expect("same shape");
            (s, mx.kron(&mx))
        }
    }
}

pub fn assemble_operator(mesh: &TensorMesh, alpha: f64) -> Result<WeightedOperator> {
    if mesh.unknown_count() == 0 {
        return Err(Error::EmptySystem);
    }
    let (omega_stiff, omega_mass) = omega_factors(mesh.dim(), mesh.nx());
    let (mass_w, stiff_w) = weighted_axis_factors(mesh.axis().points(), alpha)?;
    // y = Y is Dirichlet; y = 0 keeps its unknowns.
    let m = mesh.m();
    let y_mass = mass_w.restrict(0..m);
    let y_stiff = stiff_w.restrict(0..m);
    let flat = omega_stiff.kron(&y_mass.to_csr()).add_scaled(
        1.0,
        &omega_mass.kron(&y_stiff.to_csr()),
        1.0,
    )?;
    Ok(WeightedOperator {
        dim: mesh.dim(),
        nx: mesh.nx(),
        omega_stiff,
        omega_mass,
        y_mass,
        y_stiff,
        flat,
    })
}

/// Weighted mass matrix `M_Ω ⊗ M_y^α` on the unknowns.
pub fn assemble_mass(mesh: &TensorMesh, alpha: f64) -> Result<CsrMatrix> {
    let (_, omega_mass) = omega_factors(mesh.dim(), mesh.nx());
    let (mass_w, _) = weighted_axis_factors(mesh.axis().points(), alpha)?;
    Ok(omega_mass.kron(&mass_w.restrict(0..mesh.m()).to_csr()))
}

impl WeightedOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn n(&self) -> usize {
        self.flat.nrows()
    }

    pub fn line_len(&self) -> usize {
        self.y_mass.n()
    }

    pub fn flat(&self) -> &CsrMatrix {
        &self.flat
    }

    pub fn omega_stiff(&self) -> &CsrMatrix {
        &self.omega_stiff
    }

    pub fn omega_mass(&self) -> &CsrMatrix {
        &self.omega_mass
    }

    pub fn y_mass(&self) -> &Tridiag {
        &self.y_mass
    }

    pub fn y_stiff(&self) -> &Tridiag {
        &self.y_stiff
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.flat.mul_vec(x)
    }

    /// Applies the operator through its Kronecker factors.
    pub fn apply_kron(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), x.len())?;
        let m = self.line_len();
        let lines: Vec<&[f64]> = x.chunks(m).collect();
        let my: Vec<Vec<f64>> = lines.iter().map(|l| self.y_mass.mul_vec(l)).collect();
        let sy: Vec<Vec<f64>> = lines.iter().map(|l| self.y_stiff.mul_vec(l)).collect();
        let mut y = vec![0.0; self.n()];
        for (j, out) in y.chunks_mut(m).enumerate() {
            let (cols, svals) = self.omega_stiff.row(j);
            for (&jj, &sv) in cols.iter().zip(svals) {
                let mv = self.omega_mass.get(j, jj);
                for l in 0..m {
                    out[l] += sv * my[jj][l] + mv * sy[jj][l];
                }
            }
        }
        Ok(y)
    }

    /// Residual `b − A x` into `r`.
    pub fn residual_into(&self, x: &[f64], b: &[f64], r: &mut [f64]) -> Result<()> {
        check_len(self.n(), b.len())?;
        self.flat.mul_vec_into(x, r)?;
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        Ok(())
    }
}

/// `uᵀ A v`.
pub fn energy_inner(a: &WeightedOperator, u: &[f64], v: &[f64]) -> Result<f64> {
    check_len(a.n(), u.len())?;
    Ok(dot(u, &a.apply(v)?))
}

pub fn energy_norm(a: &WeightedOperator, u: &[f64]) -> Result<f64> {
    Ok(energy_inner(a, u, u)?.max(0.0).sqrt())
}

/// Right-hand side `d_s ∫_Ω f φ_i` on the `y = 0` unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadVector {
    pub values: Vec<f64>,
    pub d_s: f64,
}

const GAUSS5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GAUSS5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Trace load with five-point Gauss quadrature per Ω-element and direction.
pub fn assemble_load<F>(mesh: &TensorMesh, s: f64, f: F) -> Result<LoadVector>
where
    F: Fn(&[f64]) -> f64,
{
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s = {s} not in (0,1)")));
    }
    let d_s = extension_constant(s);
    let nx = mesh.nx();
    let h = mesh.h();
    // (point in [0,1] of the element, weight scaled to the element)
    let local: Vec<(f64, f64)> = GAUSS5_NODES
        .iter()
        .zip(GAUSS5_WEIGHTS)
        .map(|(&t, w)| (0.5 * (t + 1.0), 0.5 * w * h))
        .collect();
    let mut values = vec![0.0; mesh.unknown_count()];
    let mut add = |omega: &[usize], v: f64| {
        if let Some(i) = mesh.dof_index(omega, 0) {
            values[i] += d_s * v;
        }
    };
    match mesh.dim() {
        1 => {
            for e in 0..nx {
                let (mut left, mut right) = (0.0, 0.0);
                for &(t, w) in &local {
                    let fv = f(&[(e as f64 + t) * h]) * w;
                    left += fv * (1.0 - t);
                    right += fv * t;
                }
                add(&[e], left);
                add(&[e + 1], right);
            }
        }
        _ => {
            for e1 in 0..nx {
                for e2 in 0..nx {
                    let mut corner = [[0.0; 2]; 2];
                    for &(t1, w1) in &local {
                        for &(t2, w2) in &local {
                            let fv = f(&[(e1 as f64 + t1) * h, (e2 as f64 + t2) * h]) * w1 * w2;
                            let b1 = [1.0 - t1, t1];
                            let b2 = [1.0 - t2, t2];
                            for (a, row) in corner.iter_mut().enumerate() {
                                for (b, c) in row.iter_mut().enumerate() {
                                    *c += fv * b1[a] * b2[b];
                                }
                            }
                        }
                    }
                    for (a, row) in corner.iter().enumerate() {
                        for (b, &c) in row.iter().enumerate() {
                            add(&[e1 + a, e2 + b], c);
                        }
                    }
                }
            }
        }
    }
    Ok(LoadVector { values, d_s })
}
