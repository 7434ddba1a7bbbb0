//! Batch driver for the iteration-count and energy-error tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{energy_error, ExactProblem};
use crate::assembly::assemble_load;
use crate::error::{Error, Result};
use crate::mesh::{build_hierarchy, FracParams, GradingKind, GradingMap, DEFAULT_XI_STAR};
use crate::smoother::LineOrdering;
use crate::sparse::write_vector_market;
use crate::vcycle::{
    estimate_contraction, mg_solve, MgHierarchy, SmootherKind, SolveOptions, SolveReport,
    DEFAULT_SMOOTHING_STEPS,
};

/// Coarsest Ω meshsize is `1/NX0`.
pub const NX0: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradingChoice {
    Original,
    Modified,
    /// Original and modified side by side.
    Both,
    /// Quasi-uniform axis, `F(ξ) = Yξ`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmootherChoice {
    Point,
    Line,
}

impl SmootherChoice {
    fn kind(self, ordering: LineOrdering) -> SmootherKind {
        match self {
            SmootherChoice::Point => SmootherKind::Point,
            SmootherChoice::Line => SmootherKind::Line(ordering),
        }
    }

    fn label(self) -> &'static str {
        match self {
            SmootherChoice::Point => "point",
            SmootherChoice::Line => "line",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub s_values: Vec<f64>,
    pub nx_values: Vec<usize>,
    pub grading: GradingChoice,
    pub smoother: SmootherChoice,
    /// Visiting order of the line smoother.
    pub ordering: LineOrdering,
    pub m: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub xi_star: f64,
    pub seed: u64,
    /// Extra cycles on a random guess to measure the energy contraction; 0 disables.
    pub contraction_cycles: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub export_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Line smoother on the original grading with the standard parameters.
    pub fn new(dim: usize) -> Self {
        let nx_values = if dim == 1 {
            vec![16, 32, 64, 128, 256, 512]
        } else {
            vec![16, 32, 64]
        };
        Self {
            dim,
            s_values: vec![0.15, 0.3, 0.6, 0.8],
            nx_values,
            grading: GradingChoice::Original,
            smoother: SmootherChoice::Line,
            ordering: LineOrdering::RedBlack,
            m: DEFAULT_SMOOTHING_STEPS,
            tol: 1e-7,
            max_iter: 200,
            xi_star: DEFAULT_XI_STAR,
            seed: 0,
            contraction_cycles: 0,
            export_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "iterations", rename_all = "lowercase")]
pub enum CellOutcome {
    Converged(usize),
    Failed(usize),
}

impl CellOutcome {
    pub fn iterations(self) -> usize {
        match self {
            CellOutcome::Converged(n) | CellOutcome::Failed(n) => n,
        }
    }

    pub fn converged(self) -> bool {
        matches!(self, CellOutcome::Converged(_))
    }

    fn label(self) -> String {
        match self {
            CellOutcome::Converged(n) => n.to_string(),
            CellOutcome::Failed(n) => format!("FAIL({n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub dim: usize,
    pub s: f64,
    pub nx: usize,
    /// All grid vertices, `(nx+1)^{n+1}`.
    pub dofs: usize,
    pub unknowns: usize,
    /// Grading actually used after the γ > 4 rule.
    pub grading: String,
    pub smoother: String,
    pub outcome: CellOutcome,
    pub energy_error: Option<f64>,
    /// `E(previous nx) / E(this nx)` for the same `s`.
    pub rate: Option<f64>,
    pub contraction_estimate: Option<f64>,
    pub cpu_s: f64,
    pub report: Option<SolveReport>,
}

fn grading_map(choice: GradingChoice, params: &FracParams, xi_star: f64) -> Result<GradingMap> {
    match choice {
        GradingChoice::Uniform => GradingMap::uniform(params.height),
        GradingChoice::Original => GradingMap::original(params.gamma, params.height),
        GradingChoice::Modified => {
            GradingMap::resolve(GradingKind::Modified, params.gamma, params.height, xi_star)
        }
        GradingChoice::Both => Err(Error::InvalidParameter(
            "'both' is only valid for comparison runs".into(),
        )),
    }
}

fn grading_label(map: &GradingMap) -> &'static str {
    match (map.kind(), map.gamma() == 1.0) {
        (GradingKind::Modified, _) => "modified",
        (GradingKind::Original, true) => "uniform",
        (GradingKind::Original, false) => "original",
    }
}

fn levels_for(nx: usize) -> Result<usize> {
    if nx < NX0 || !nx.is_multiple_of(NX0) || !(nx / NX0).is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "nx = {nx} must be {NX0}·2^J"
        )));
    }
    Ok((nx / NX0).trailing_zeros() as usize)
}

/// Builds, assembles and solves one `(s, nx)` cell.
pub fn run_cell(
    config: &ExperimentConfig,
    s: f64,
    nx: usize,
    grading: GradingChoice,
) -> Result<CellResult> {
    let params = FracParams::new(s)?;
    let map = grading_map(grading, &params, config.xi_star)?;
    let meshes = build_hierarchy(config.dim, map, levels_for(nx)?, NX0)?;
    let hierarchy = MgHierarchy::new(
        meshes,
        params.alpha,
        config.smoother.kind(config.ordering),
        config.m,
    )?;
    let finest = hierarchy.finest();
    let problem = ExactProblem::new(config.dim, s)?;
    let load = assemble_load(&finest.mesh, s, |x| problem.source(x))?;
    let opts = SolveOptions {
        tol: config.tol,
        max_iter: config.max_iter,
    };

    let timer = Instant::now();
    let solved = mg_solve(&hierarchy, &load.values, &opts, None);
    let cpu_s = timer.elapsed().as_secs_f64();

    let (outcome, energy, report) = match solved {
        Ok((x, report)) => {
            let e = energy_error(&problem, &finest.operator, &x)?;
            (CellOutcome::Converged(report.iterations), Some(e), report)
        }
        Err(Error::NotConverged { report, .. }) => {
            log::warn!(
                "dim={} s={s} nx={nx}: no convergence after {} iterations",
                config.dim,
                report.iterations
            );
            (CellOutcome::Failed(report.iterations), None, *report)
        }
        Err(e) => return Err(e),
    };

    let contraction_estimate = if config.contraction_cycles > 0 {
        Some(estimate_contraction(
            &hierarchy,
            config.contraction_cycles,
            config.seed,
        )?)
    } else {
        None
    };

    let grading_name = grading_label(&map);
    if let Some(dir) = &config.export_dir {
        std::fs::create_dir_all(dir)?;
        let stem = format!("dim{}_s{s}_nx{nx}_{grading_name}", config.dim);
        finest.operator.flat().write_matrix_market(
            BufWriter::new(File::create(dir.join(format!("A_{stem}.mtx")))?),
            true,
        )?;
        write_vector_market(
            BufWriter::new(File::create(dir.join(format!("b_{stem}.mtx")))?),
            &load.values,
        )?;
        finest.mesh.write_text(BufWriter::new(File::create(
            dir.join(format!("mesh_{stem}.txt")),
        )?))?;
    }

    Ok(CellResult {
        dim: config.dim,
        s,
        nx,
        dofs: finest.mesh.vertex_count(),
        unknowns: finest.mesh.unknown_count(),
        grading: grading_name.to_string(),
        smoother: config.smoother.label().to_string(),
        outcome,
        energy_error: energy,
        rate: None,
        contraction_estimate,
        cpu_s,
        report: Some(report),
    })
}

fn run_cells(config: &ExperimentConfig, grading: GradingChoice) -> Result<Vec<CellResult>> {
    let mut rows = Vec::with_capacity(config.s_values.len() * config.nx_values.len());
    for &s in &config.s_values {
        let mut previous: Option<f64> = None;
        for &nx in &config.nx_values {
            let mut cell = run_cell(config, s, nx, grading)?;
            cell.rate = match (previous, cell.energy_error) {
                (Some(p), Some(e)) if e > 0.0 => Some(p / e),
                _ => None,
            };
            previous = cell.energy_error;
            log::info!(
                "dim={} s={s} nx={nx} grading={} iterations={}",
                cell.dim,
                cell.grading,
                cell.outcome.label()
            );
            rows.push(cell);
        }
    }
    Ok(rows)
}

/// One row per `(s, nx)`, `s` outermost, in configuration order.
pub fn run_table(config: &ExperimentConfig) -> Result<Vec<CellResult>> {
    if config.grading == GradingChoice::Both {
        return Err(Error::InvalidParameter(
            "use run_comparison for grading = both".into(),
        ));
    }
    run_cells(config, config.grading)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub dim: usize,
    pub s: f64,
    pub nx: usize,
    pub dofs: usize,
    pub original: CellResult,
    pub modified: CellResult,
}

/// Original against modified grading for every `(s, nx)`.
pub fn run_comparison(config: &ExperimentConfig) -> Result<Vec<ComparisonRow>> {
    let original = run_cells(config, GradingChoice::Original)?;
    let modified = run_cells(config, GradingChoice::Modified)?;
    Ok(original
        .into_iter()
        .zip(modified)
        .map(|(o, m)| ComparisonRow {
            dim: o.dim,
            s: o.s,
            nx: o.nx,
            dofs: o.dofs,
            original: o,
            modified: m,
        })
        .collect())
}

pub const TABLE_HEADER: [&str; 12] = [
    "dim",
    "s",
    "nx",
    "dofs",
    "unknowns",
    "grading",
    "smoother",
    "iterations",
    "energy_error",
    "rate",
    "delta_est",
    "cpu_s",
];

pub const COMPARISON_HEADER: [&str; 10] = [
    "dim", "s", "nx", "dofs", "I(o)", "I(m)", "E(o)", "E(m)", "CPU(o)", "CPU(m)",
];

const CPU_NOTE: &str =
    "# cpu columns: wall-clock seconds of the multigrid solve only, assembly excluded\n";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

pub fn write_table_csv<W: Write>(rows: &[CellResult], mut out: W) -> Result<()> {
    out.write_all(CPU_NOTE.as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE_HEADER)?;
    for r in rows {
        w.write_record([
            r.dim.to_string(),
            r.s.to_string(),
            r.nx.to_string(),
            r.dofs.to_string(),
            r.unknowns.to_string(),
            r.grading.clone(),
            r.smoother.clone(),
            r.outcome.label(),
            opt(r.energy_error),
            r.rate.map(|x| format!("{x:.4}")).unwrap_or_default(),
            r.contraction_estimate
                .map(|x| format!("{x:.4}"))
                .unwrap_or_default(),
            format!("{:.4}", r.cpu_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], mut out: W) -> Result<()> {
    out.write_all(CPU_NOTE.as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARISON_HEADER)?;
    for r in rows {
        w.write_record([
            r.dim.to_string(),
            r.s.to_string(),
            r.nx.to_string(),
            r.dofs.to_string(),
            r.original.outcome.label(),
            r.modified.outcome.label(),
            opt(r.original.energy_error),
            opt(r.modified.energy_error),
            format!("{:.4}", r.original.cpu_s),
            format!("{:.4}", r.modified.cpu_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}
