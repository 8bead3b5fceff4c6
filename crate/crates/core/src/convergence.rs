//! Convergence study of the elliptic solver on the manufactured diffusion problems.

use std::fmt;

use crate::cloud::ParticleCloud;
use crate::config::DEFAULT_SPACING_RATIO;
use crate::elliptic::{assemble_system, gauss_seidel_until_stagnation, BoundaryCondition, PdeCoefficients, SolveStats};
use crate::error::Result;
use crate::ls::{shepard_smooth_with, LsOperators};
use crate::oracles::{convergence_order, manufactured_diffusion, DiffusionExample};
use crate::scenarios::unit_square;

/// Smoothing passes applied to the diffusion coefficient.
pub const COEFFICIENT_SMOOTHING: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffusionOptions {
    pub spacing_ratio: f64,
    pub eps: f64,
    pub max_sweeps: usize,
    /// Sweeps without a new minimum of the relative change before stopping.
    pub stagnation_window: usize,
}

impl Default for DiffusionOptions {
    fn default() -> Self {
        Self {
            spacing_ratio: DEFAULT_SPACING_RATIO,
            eps: 1e-10,
            max_sweeps: 200_000,
            stagnation_window: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionSolution {
    pub h: f64,
    pub n: usize,
    /// Maximum pointwise error against the discontinuous-coefficient solution.
    pub linf_error: f64,
    pub stats: SolveStats,
    pub positions: Vec<crate::Vec2>,
    pub values: Vec<f64>,
}

/// Solves `div(k~ grad psi) = f` on the unit square with Dirichlet data from the
/// exact solution, where `k~` is the Shepard-smoothed coefficient. The
/// equation is divided by `k~` to obtain `lap psi + (grad k~ / k~) . grad psi = f / k~`.
pub fn solve_manufactured(example: DiffusionExample, h: f64, options: &DiffusionOptions) -> Result<DiffusionSolution> {
    let problem = manufactured_diffusion(example, h);
    let mut config = unit_square(h);
    config.numerics.spacing_ratio = options.spacing_ratio;
    let cloud = ParticleCloud::seed(&config)?;
    let list = cloud.neighbor_list()?;
    let ops = LsOperators::build(&cloud, &list)?;
    let particles = cloud.particles();
    let k: Vec<f64> = particles.iter().map(|p| problem.k(&p.position)).collect();
    let k_smooth = shepard_smooth_with(&cloud, &list, &k, COEFFICIENT_SMOOTHING, None)?;
    let row_data = |i: usize| {
        let p = &particles[i];
        if p.is_wall() {
            (
                PdeCoefficients {
                    b: crate::Vec2::zeros(),
                    c: 0.0,
                    f: 0.0,
                },
                BoundaryCondition::Dirichlet(problem.exact(&p.position)),
            )
        } else {
            (
                PdeCoefficients {
                    b: ops.gradient(&k_smooth, i) / k_smooth[i],
                    c: 1.0,
                    f: problem.source(&p.position) / k_smooth[i],
                },
                BoundaryCondition::Interior,
            )
        }
    };
    let mut system = assemble_system(&cloud, &list, row_data, vec![0.0; cloud.len()])?;
    let stats = gauss_seidel_until_stagnation(&mut system, options.eps, options.max_sweeps, options.stagnation_window)?;
    let linf_error = particles
        .iter()
        .zip(&system.unknowns)
        .map(|(p, v)| (v - problem.exact(&p.position)).abs())
        .fold(0.0, f64::max);
    Ok(DiffusionSolution {
        h,
        n: cloud.len(),
        linf_error,
        stats,
        positions: particles.iter().map(|p| p.position).collect(),
        values: system.unknowns,
    })
}

/// One row of a convergence table; failed solves keep their error message.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub n: usize,
    pub result: std::result::Result<RowResult, String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RowResult {
    pub linf_error: f64,
    pub sweeps: usize,
    pub stagnated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub example: DiffusionExample,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of log error against log h over the successful rows.
    pub order: Option<f64>,
}

/// Runs the study for every `h`; a failing resolution is recorded and the study continues.
pub fn run_convergence(example: DiffusionExample, h_list: &[f64], options: &DiffusionOptions) -> ConvergenceTable {
    let mut rows = Vec::new();
    for &h in h_list {
        let n = {
            let mut c = unit_square(h);
            c.numerics.spacing_ratio = options.spacing_ratio;
            ParticleCloud::seed(&c).map(|c| c.len()).unwrap_or(0)
        };
        let result = solve_manufactured(example, h, options)
            .map(|s| RowResult {
                linf_error: s.linf_error,
                sweeps: s.stats.sweeps,
                stagnated: s.stats.stagnated,
            })
            .map_err(|e| e.to_string());
        rows.push(ConvergenceRow { h, n, result });
    }
    let (hs, es): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.result.as_ref().ok().map(|x| (r.h, x.linf_error)))
        .unzip();
    ConvergenceTable {
        example,
        order: convergence_order(&hs, &es),
        rows,
    }
}

impl ConvergenceTable {
    /// Comma-separated table with header `h,N,linf_error,sweeps,status`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,N,linf_error,sweeps,status\n");
        for r in &self.rows {
            match &r.result {
                Ok(x) => out.push_str(&format!(
                    "{},{},{:.8e},{},{}\n",
                    r.h,
                    r.n,
                    x.linf_error,
                    x.sweeps,
                    if x.stagnated { "stagnated" } else { "ok" }
                )),
                Err(msg) => out.push_str(&format!("{},{},,,failed: {}\n", r.h, r.n, msg.replace(',', ";"))),
            }
        }
        out
    }
}

impl fmt::Display for ConvergenceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "example {}", self.example.number())?;
        writeln!(f, "{:>8} {:>8} {:>14} {:>8}", "h", "N", "Linf error", "sweeps")?;
        for r in &self.rows {
            match &r.result {
                Ok(x) => writeln!(
                    f,
                    "{:>8} {:>8} {:>14.4e} {:>8}{}",
                    r.h,
                    r.n,
                    x.linf_error,
                    x.sweeps,
                    if x.stagnated { " (stagnated)" } else { "" }
                )?,
                Err(msg) => writeln!(f, "{:>8} {:>8} failed: {}", r.h, r.n, msg)?,
            }
        }
        match self.order {
            Some(o) => writeln!(f, "fitted order: {o:.3}"),
            None => writeln!(f, "fitted order: n/a"),
        }
    }
}
