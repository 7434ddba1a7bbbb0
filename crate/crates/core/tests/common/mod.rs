#![allow(dead_code)]

use fracmg::{
    build_hierarchy, Direction, GradingMap, LineOrdering, MgHierarchy, SmootherKind, Tridiag,
};
use nalgebra::{DMatrix, DVector};

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `∫_a^b y^α g(y) dy` on 64 subintervals graded geometrically (ratio 1/4)
/// toward `a`, twenty Gauss points each.
pub fn composite_weighted<G: Fn(f64) -> f64>(a: f64, b: f64, alpha: f64, g: G) -> f64 {
    let rule = gauss_legendre(20);
    let h = b - a;
    let mut cuts: Vec<f64> = (0..64).map(|k| a + h * 0.25f64.powi(k)).collect();
    cuts.push(a);
    cuts.reverse();
    let mut sum = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for &(t, wt) in &rule {
            let y = mid + half * t;
            sum += wt * half * y.powf(alpha) * g(y);
        }
    }
    sum
}

/// Weighted P1 mass and stiffness on all nodes of `points`, by quadrature.
pub fn quadrature_axis(points: &[f64], alpha: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = points.len();
    let mut mass = vec![vec![0.0; n]; n];
    let mut stiff = vec![vec![0.0; n]; n];
    for l in 0..n - 1 {
        let (a, b) = (points[l], points[l + 1]);
        let h = b - a;
        let left = |y: f64| (b - y) / h;
        let right = |y: f64| (y - a) / h;
        let ll = composite_weighted(a, b, alpha, |y| left(y) * left(y));
        let lr = composite_weighted(a, b, alpha, |y| left(y) * right(y));
        let rr = composite_weighted(a, b, alpha, |y| right(y) * right(y));
        let k = composite_weighted(a, b, alpha, |_| 1.0) / (h * h);
        mass[l][l] += ll;
        mass[l][l + 1] += lr;
        mass[l + 1][l] += lr;
        mass[l + 1][l + 1] += rr;
        stiff[l][l] += k;
        stiff[l][l + 1] -= k;
        stiff[l + 1][l] -= k;
        stiff[l + 1][l + 1] += k;
    }
    (mass, stiff)
}

pub fn dense(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

pub fn tridiag_dense(t: &Tridiag) -> DMatrix<f64> {
    let n = t.n();
    DMatrix::from_fn(n, n, |i, j| t.get(i, j))
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

pub fn grading(s: f64) -> GradingMap {
    GradingMap::original(3.0 / (2.0 * s) + 0.1, 1.0).unwrap()
}

pub fn hierarchy(
    dim: usize,
    s: f64,
    map: GradingMap,
    levels: usize,
    smoother: SmootherKind,
) -> MgHierarchy {
    let meshes = build_hierarchy(dim, map, levels, 4).unwrap();
    MgHierarchy::new(meshes, 1.0 - 2.0 * s, smoother, 3).unwrap()
}

pub fn line_smoother() -> SmootherKind {
    SmootherKind::Line(LineOrdering::RedBlack)
}

pub fn direct_solve(h: &MgHierarchy, b: &[f64]) -> Vec<f64> {
    let a = dense(&h.finest().operator.flat().to_dense());
    a.lu()
        .solve(&DVector::from_column_slice(b))
        .expect("nonsingular")
        .as_slice()
        .to_vec()
}

/// Algorithm 1 on dense matrices: blocks visited forward before the coarse
/// correction and in reverse after it, each block solved exactly.
pub struct DenseVcycle {
    pub a: Vec<DMatrix<f64>>,
    pub p: Vec<DMatrix<f64>>,
    pub blocks: Vec<Vec<Vec<usize>>>,
}

impl DenseVcycle {
    pub fn from_hierarchy(h: &MgHierarchy) -> Self {
        let a = h
            .levels()
            .iter()
            .map(|l| dense(&l.operator.flat().to_dense()))
            .collect();
        let p = h
            .transfers()
            .iter()
            .map(|t| dense(&t.prolongation().to_dense()))
            .collect();
        let blocks = h
            .levels()
            .iter()
            .map(|l| match &l.line_plan {
                Some(plan) => plan
                    .order()
                    .iter()
                    .map(|&j| plan.block(j).collect())
                    .collect(),
                None => (0..l.operator.n()).map(|i| vec![i]).collect(),
            })
            .collect();
        Self { a, p, blocks }
    }

    fn sweep(&self, k: usize, v: &mut DVector<f64>, r: &DVector<f64>, dir: Direction) {
        let a = &self.a[k];
        let order: Vec<&Vec<usize>> = match dir {
            Direction::Forward => self.blocks[k].iter().collect(),
            Direction::Backward => self.blocks[k].iter().rev().collect(),
        };
        for idx in order {
            let res = r - a * &*v;
            let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])]);
            let rhs = DVector::from_fn(idx.len(), |i, _| res[idx[i]]);
            let corr = sub.lu().solve(&rhs).expect("block nonsingular");
            for (i, &g) in idx.iter().enumerate() {
                v[g] += corr[i];
            }
        }
    }

    pub fn mg(&self, r: &DVector<f64>, k: usize, m: usize) -> DVector<f64> {
        if k == 0 {
            return self.a[0].clone().lu().solve(r).expect("coarse nonsingular");
        }
        let mut u = DVector::zeros(r.len());
        for _ in 0..m {
            self.sweep(k, &mut u, r, Direction::Forward);
        }
        let p = &self.p[k - 1];
        let coarse_r = p.transpose() * (r - &self.a[k] * &u);
        u += p * self.mg(&coarse_r, k - 1, m);
        for _ in 0..m {
            self.sweep(k, &mut u, r, Direction::Backward);
        }
        u
    }
}
