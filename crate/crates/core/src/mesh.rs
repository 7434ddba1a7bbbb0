//! Graded axes in the extended direction, tensor-product meshes over the
//! truncated cylinder, nested hierarchies, and the A₂ audit of the weight.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default transition abscissa of the modified grading.
pub const DEFAULT_XI_STAR: f64 = 0.75;

/// Modified grading is only worth using above this exponent.
pub const MODIFIED_GRADING_THRESHOLD: f64 = 4.0;

/// Fractional order and the derived weight and grading exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    pub s: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub height: f64,
}

impl FracParams {
    /// Uses the experimental default `γ = 3/(2s) + 0.1` and a unit cylinder.
    pub fn new(s: f64) -> Result<Self> {
        Self::with_gamma(s, 3.0 / (2.0 * s) + 0.1, 1.0)
    }

    pub fn with_gamma(s: f64, gamma: f64, height: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter(format!("s = {s} not in (0,1)")));
        }
        if !(gamma > 3.0 / (2.0 * s)) {
            return Err(Error::InvalidParameter(format!(
                "gamma = {gamma} must exceed 3/(2s) = {}",
                3.0 / (2.0 * s)
            )));
        }
        if !(height > 0.0) {
            return Err(Error::InvalidParameter(format!("height = {height}")));
        }
        Ok(Self {
            s,
            alpha: 1.0 - 2.0 * s,
            gamma,
            height,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradingKind {
    Original,
    Modified,
}

/// Map `F: [0,1] → [0,Y]` whose image of a uniform grid is the graded axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradingMap {
    kind: GradingKind,
    gamma: f64,
    height: f64,
    xi_star: f64,
    y_star: f64,
}

/// Transition ordinate and maximal slope (unit height) of the modified map.
///
/// `y*` is chosen so the power-law and linear branches have equal slope at `ξ*`.
pub fn modified_map_params(gamma: f64, xi_star: f64) -> Result<(f64, f64)> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma = {gamma}")));
    }
    if !(xi_star > 0.0 && xi_star < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "xi_star = {xi_star} not in (0,1)"
        )));
    }
    let y_star = 1.0 / (1.0 + gamma * (1.0 - xi_star) / xi_star);
    Ok((y_star, gamma * y_star / xi_star))
}

impl GradingMap {
    /// `F(ξ) = Y ξ^γ`; `γ = 1` gives a uniform axis.
    pub fn original(gamma: f64, height: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma = {gamma}")));
        }
        if !(height > 0.0) {
            return Err(Error::InvalidParameter(format!("height = {height}")));
        }
        Ok(Self {
            kind: GradingKind::Original,
            gamma,
            height,
            xi_star: f64::NAN,
            y_star: f64::NAN,
        })
    }

    pub fn uniform(height: f64) -> Result<Self> {
        Self::original(1.0, height)
    }

    /// Power law on `[0, ξ*]` joined C¹ to a linear branch on `[ξ*, 1]`.
    pub fn modified(gamma: f64, height: f64, xi_star: f64) -> Result<Self> {
        let base = Self::original(gamma, height)?;
        let (y_star, _) = modified_map_params(gamma, xi_star)?;
        Ok(Self {
            kind: GradingKind::Modified,
            xi_star,
            y_star,
            ..base
        })
    }

    /// Honors a request for modified grading only when `γ > 4`; otherwise
    /// falls back to the original map.
    pub fn resolve(kind: GradingKind, gamma: f64, height: f64, xi_star: f64) -> Result<Self> {
        match kind {
            GradingKind::Modified if gamma > MODIFIED_GRADING_THRESHOLD => {
                Self::modified(gamma, height, xi_star)
            }
            GradingKind::Modified => {
                log::info!(
                    "gamma = {gamma} <= {MODIFIED_GRADING_THRESHOLD}: using original grading"
                );
                Self::original(gamma, height)
            }
            GradingKind::Original => Self::original(gamma, height),
        }
    }

    pub fn kind(&self) -> GradingKind {
        self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn xi_star(&self) -> Option<f64> {
        (self.kind == GradingKind::Modified).then_some(self.xi_star)
    }

    pub fn y_star(&self) -> Option<f64> {
        (self.kind == GradingKind::Modified).then_some(self.y_star)
    }

    pub fn eval(&self, xi: f64) -> f64 {
        if xi <= 0.0 {
            return 0.0;
        }
        if xi >= 1.0 {
            return self.height;
        }
        match self.kind {
            GradingKind::Original => self.height * xi.powf(self.gamma),
            GradingKind::Modified if xi <= self.xi_star => {
                self.y_star * self.height * (xi / self.xi_star).powf(self.gamma)
            }
            GradingKind::Modified => {
                let slope = (1.0 - self.y_star) / (1.0 - self.xi_star);
                self.height * (slope * (xi - self.xi_star) + self.y_star)
            }
        }
    }

    pub fn derivative(&self, xi: f64) -> f64 {
        let xi = xi.clamp(0.0, 1.0);
        match self.kind {
            GradingKind::Original => self.gamma * self.height * xi.powf(self.gamma - 1.0),
            GradingKind::Modified if xi <= self.xi_star => {
                self.gamma * self.height * self.y_star / self.xi_star
                    * (xi / self.xi_star).powf(self.gamma - 1.0)
            }
            GradingKind::Modified => self.height * (1.0 - self.y_star) / (1.0 - self.xi_star),
        }
    }

    /// `max |F′|` on `[0,1]`; bounds the largest gap of an axis times `M`.
    pub fn max_slope(&self) -> f64 {
        match self.kind {
            GradingKind::Original => self.gamma.max(1.0) * self.height,
            GradingKind::Modified => {
                let power = self.gamma * self.height * self.y_star / self.xi_star;
                let linear = self.height * (1.0 - self.y_star) / (1.0 - self.xi_star);
                power.max(linear)
            }
        }
    }
}

/// Ordinates `0 = y₀ < … < y_M = Y` with `y_l = F(l/M)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradedAxis {
    points: Vec<f64>,
    map: GradingMap,
}

impl GradedAxis {
    pub fn new(map: GradingMap, intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::InvalidParameter(
                "axis needs at least one interval".into(),
            ));
        }
        let m = intervals as f64;
        let points: Vec<f64> = (0..=intervals).map(|l| map.eval(l as f64 / m)).collect();
        if let Some(l) = points.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(format!(
                "axis points not strictly increasing at {l} (M = {intervals}, gamma = {})",
                map.gamma
            )));
        }
        Ok(Self { points, map })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn map(&self) -> &GradingMap {
        &self.map
    }

    pub fn intervals(&self) -> usize {
        self.points.len() - 1
    }

    pub fn max_gap(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

/// `build_axis` under its conventional name.
pub fn build_axis(map: GradingMap, intervals: usize) -> Result<GradedAxis> {
    GradedAxis::new(map, intervals)
}

/// Uniform Ω-grid of `nx` intervals per direction times a graded axis with
/// `M = nx` intervals.
///
/// Unknowns are the vertices off the lateral boundary and off the top
/// `y = Y`; they are numbered line by line with `y` fastest, Ω lines in
/// lexicographic order with the first coordinate slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorMesh {
    dim: usize,
    nx: usize,
    axis: GradedAxis,
}

impl TensorMesh {
    pub fn new(dim: usize, nx: usize, axis: GradedAxis) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "dim = {dim} not in {{1,2}}"
            )));
        }
        if nx < 2 {
            return Err(Error::EmptySystem);
        }
        if axis.intervals() != nx {
            return Err(Error::InvalidParameter(format!(
                "axis has {} intervals, expected M = nx = {nx}",
                axis.intervals()
            )));
        }
        Ok(Self { dim, nx, axis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn h(&self) -> f64 {
        1.0 / self.nx as f64
    }

    pub fn axis(&self) -> &GradedAxis {
        &self.axis
    }

    /// Intervals of the graded axis.
    pub fn m(&self) -> usize {
        self.axis.intervals()
    }

    /// All grid vertices, Dirichlet ones included: `(nx+1)^n (M+1)`.
    pub fn vertex_count(&self) -> usize {
        (self.nx + 1).pow(self.dim as u32) * (self.m() + 1)
    }

    /// Vertical lines through interior Ω-vertices.
    pub fn line_count(&self) -> usize {
        (self.nx - 1).pow(self.dim as u32)
    }

    /// Unknowns per vertical line: `y₀ … y_{M−1}`.
    pub fn line_len(&self) -> usize {
        self.m()
    }

    pub fn unknown_count(&self) -> usize {
        self.line_count() * self.line_len()
    }

    /// Unknown index of the vertex with Ω lattice coordinates `omega` and
    /// axis index `l`, or `None` for Dirichlet vertices.
    pub fn dof_index(&self, omega: &[usize], l: usize) -> Option<usize> {
        if omega.len() != self.dim || l >= self.m() {
            return None;
        }
        let mut line = 0;
        for &i in omega {
            if i == 0 || i >= self.nx {
                return None;
            }
            line = line * (self.nx - 1) + (i - 1);
        }
        Some(line * self.m() + l)
    }

    /// Ω lattice coordinates of the interior vertex carrying line `line`.
    pub fn line_coords(&self, line: usize) -> Vec<usize> {
        let k = self.nx - 1;
        let mut coords = vec![0; self.dim];
        let mut rest = line;
        for c in coords.iter_mut().rev() {
            *c = rest % k + 1;
            rest /= k;
        }
        coords
    }

    /// Plain-text dump: a `vertices` block with `index x.. y` per line, then a
    /// `cells` block listing the corner vertex indices of every box.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let n1 = self.nx + 1;
        let my = self.m() + 1;
        let planes = n1.pow(self.dim as u32);
        writeln!(out, "# dim {} nx {} M {}", self.dim, self.nx, self.m())?;
        writeln!(out, "vertices {}", self.vertex_count())?;
        for p in 0..planes {
            let coords: Vec<usize> = match self.dim {
                1 => vec![p],
                _ => vec![p / n1, p % n1],
            };
            for (l, y) in self.axis.points().iter().enumerate() {
                let xs: Vec<String> = coords
                    .iter()
                    .map(|&i| format!("{:.17e}", i as f64 * self.h()))
                    .collect();
                writeln!(out, "{} {} {:.17e}", p * my + l, xs.join(" "), y)?;
            }
        }
        let cells_omega: Vec<Vec<usize>> = match self.dim {
            1 => (0..self.nx).map(|i| vec![i, i + 1]).collect(),
            _ => (0..self.nx)
                .flat_map(|i| {
                    (0..self.nx).map(move |j| {
                        vec![
                            i * n1 + j,
                            (i + 1) * n1 + j,
                            (i + 1) * n1 + j + 1,
                            i * n1 + j + 1,
                        ]
                    })
                })
                .collect(),
        };
        writeln!(out, "cells {}", cells_omega.len() * self.m())?;
        for c in &cells_omega {
            for l in 0..self.m() {
                let ids: Vec<String> = c
                    .iter()
                    .map(|&p| (p * my + l).to_string())
                    .chain(c.iter().map(|&p| (p * my + l + 1).to_string()))
                    .collect();
                writeln!(out, "{}", ids.join(" "))?;
            }
        }
        Ok(())
    }
}

/// Nested meshes from `nx0` intervals up to `nx0·2^levels`, coarse to fine.
/// Every level evaluates the same map, so coarse axis points reappear
/// bitwise at even fine indices.
pub fn build_hierarchy(
    dim: usize,
    map: GradingMap,
    levels: usize,
    nx0: usize,
) -> Result<Vec<TensorMesh>> {
    if nx0 < 2 {
        return Err(Error::InvalidParameter(format!(
            "coarsest mesh needs nx0 >= 2 (got {nx0})"
        )));
    }
    (0..=levels)
        .map(|k| {
            let nx = nx0 << k;
            TensorMesh::new(dim, nx, GradedAxis::new(map, nx)?)
        })
        .collect()
}

/// Lower bound for the A₂ constant of `|y|^α` from a finite family of
/// intervals: the largest product of the averages of `|y|^α` and `|y|^{−α}`.
pub fn estimate_a2_constant(alpha: f64, intervals: &[(f64, f64)]) -> Result<f64> {
    if !(alpha > -1.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} not in (-1,1)"
        )));
    }
    // Signed antiderivative of |y|^p.
    let prim = |y: f64, p: f64| y.signum() * y.abs().powf(p + 1.0) / (p + 1.0);
    let mut best: f64 = 0.0;
    for &(a, b) in intervals {
        if !(b > a) {
            return Err(Error::InvalidParameter(format!(
                "interval ({a}, {b}) is empty"
            )));
        }
        let len = b - a;
        let avg_w = (prim(b, alpha) - prim(a, alpha)) / len;
        let avg_inv = (prim(b, -alpha) - prim(a, -alpha)) / len;
        best = best.max(avg_w * avg_inv);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_grading_points() {
        let axis = build_axis(GradingMap::original(2.0, 1.0).unwrap(), 2).unwrap();
        assert_eq!(axis.points(), &[0.0, 0.25, 1.0]);
    }

    #[test]
    fn rejects_bad_axis_input() {
        assert!(GradingMap::original(0.0, 1.0).is_err());
        assert!(GradingMap::original(-1.0, 1.0).is_err());
        assert!(build_axis(GradingMap::uniform(1.0).unwrap(), 0).is_err());
    }

    #[test]
    fn frac_params_defaults() {
        let p = FracParams::new(0.15).unwrap();
        assert_eq!(p.gamma, 3.0 / 0.3 + 0.1);
        assert_eq!(p.alpha, 1.0 - 0.3);
        assert!(FracParams::new(1.0).is_err());
        assert!(FracParams::with_gamma(0.5, 3.0, 1.0).is_err());
    }

    #[test]
    fn modified_params_closed_form() {
        let (y_star, slope) = modified_map_params(10.1, 0.75).unwrap();
        // 1/(1 + 10.1/3) and 10.1/(0.75 + 0.25·10.1)
        assert!((y_star - 3.0 / 13.1).abs() < 1e-15);
        assert!((slope - 10.1 / 3.275).abs() < 1e-14);
        assert!(slope <= 4.0);
        let (y_star, _) = modified_map_params(1.0, 0.5).unwrap();
        assert_eq!(y_star, 0.5);
        assert!(modified_map_params(2.0, 1.0).is_err());
    }

    #[test]
    fn degenerate_modified_map_is_linear() {
        let map = GradingMap::modified(1.0, 1.0, 0.5).unwrap();
        for i in 0..=20 {
            let xi = i as f64 / 20.0;
            assert!((map.eval(xi) - xi).abs() < 1e-15);
        }
    }

    #[test]
    fn modified_map_is_c1() {
        let map = GradingMap::modified(10.1, 1.0, 0.75).unwrap();
        let left = map.derivative(0.75);
        let right = 1.0 * (1.0 - map.y_star().unwrap()) / 0.25;
        assert!((left - right).abs() < 1e-12);
        assert!((map.eval(0.75) - map.y_star().unwrap()).abs() < 1e-15);
        assert_eq!(map.eval(1.0), 1.0);
    }

    #[test]
    fn modified_request_falls_back_below_threshold() {
        let map = GradingMap::resolve(GradingKind::Modified, 2.6, 1.0, 0.75).unwrap();
        assert_eq!(map.kind(), GradingKind::Original);
        let map = GradingMap::resolve(GradingKind::Modified, 10.1, 1.0, 0.75).unwrap();
        assert_eq!(map.kind(), GradingKind::Modified);
    }

    #[test]
    fn dof_numbering() {
        let mesh = TensorMesh::new(
            2,
            4,
            build_axis(GradingMap::uniform(1.0).unwrap(), 4).unwrap(),
        )
        .unwrap();
        assert_eq!(mesh.unknown_count(), 9 * 4);
        assert_eq!(mesh.vertex_count(), 125);
        assert_eq!(mesh.dof_index(&[1, 1], 0), Some(0));
        assert_eq!(mesh.dof_index(&[1, 2], 3), Some(7));
        assert_eq!(mesh.dof_index(&[2, 1], 0), Some(12));
        assert_eq!(mesh.dof_index(&[0, 1], 0), None);
        assert_eq!(mesh.dof_index(&[1, 1], 4), None);
        assert_eq!(mesh.line_coords(3), vec![2, 1]);
    }

    #[test]
    fn hierarchy_sizes() {
        let map = GradingMap::original(2.6, 1.0).unwrap();
        let h = build_hierarchy(1, map, 3, 4).unwrap();
        assert_eq!(h.len(), 4);
        assert_eq!(h[3].nx(), 32);
        assert_eq!(h[3].vertex_count(), 1089);
        assert_eq!(build_hierarchy(1, map, 0, 4).unwrap().len(), 1);
        assert!(build_hierarchy(1, map, 2, 1).is_err());
        let n16 = TensorMesh::new(1, 16, build_axis(map, 16).unwrap()).unwrap();
        assert_eq!(n16.vertex_count(), 289);
        assert_eq!(n16.unknown_count(), 15 * 16);
    }

    #[test]
    fn mesh_dump_counts() {
        let mesh = TensorMesh::new(
            1,
            2,
            build_axis(GradingMap::uniform(1.0).unwrap(), 2).unwrap(),
        )
        .unwrap();
        let mut buf = Vec::new();
        mesh.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("vertices 9\n"));
        assert!(text.contains("cells 4\n"));
        assert!(text.lines().any(|l| l == "0 3 1 4"));
    }

    #[test]
    fn a2_estimates() {
        assert!(
            (estimate_a2_constant(0.0, &[(0.1, 0.7), (-0.5, 0.2)]).unwrap() - 1.0).abs() < 1e-15
        );
        let centered = estimate_a2_constant(0.5, &[(-0.3, 0.3)]).unwrap();
        assert!((centered - 4.0 / 3.0).abs() < 1e-13);
        let family = estimate_a2_constant(0.7, &[(-1.0, 1.0), (1.0, 2.0)]).unwrap();
        assert!((family - 1.0 / 0.51).abs() < 1e-12);
        assert!(estimate_a2_constant(0.5, &[(0.2, 0.2)]).is_err());
        assert!(estimate_a2_constant(1.0, &[(0.0, 1.0)]).is_err());
    }
}
