//! Runs a scenario to its end time, writing snapshots, diagnostics and a run log.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::io::{write_snapshot, DiagnosticsWriter};
use crate::stepper::{Simulation, StepReport};

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const RUN_LOG_FILE: &str = "run.log";
pub const CONFIG_ECHO_FILE: &str = "config.toml";

/// Name of the snapshot file with the given sequence number.
pub fn snapshot_name(k: usize) -> String {
    format!("snapshot_{k:05}.csv")
}

/// Totals over a finished (or aborted) run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    pub t: f64,
    pub wall_time: Duration,
    pub snapshots: usize,
    pub total_sweeps: usize,
    pub max_sweeps: usize,
    pub stagnated_solves: usize,
    pub particles_added: usize,
    pub particles_removed: usize,
    /// Largest `|div v| / |div v*|` over the steps.
    pub max_divergence_ratio: f64,
    pub mean_divergence_ratio: f64,
    /// Interior (gas, liquid) counts at the start.
    pub initial_phase_counts: [usize; 2],
    /// Smallest and largest interior (gas, liquid) counts after any step.
    pub min_phase_counts: [usize; 2],
    pub max_phase_counts: [usize; 2],
    ratio_sum: f64,
    ratio_count: usize,
}

impl RunSummary {
    /// Empty summary of a run starting from the given interior counts.
    pub fn starting(initial_phase_counts: [usize; 2]) -> Self {
        Self {
            initial_phase_counts,
            min_phase_counts: initial_phase_counts,
            max_phase_counts: initial_phase_counts,
            ..Self::default()
        }
    }

    /// Adds one step.
    pub fn record(&mut self, r: &StepReport) {
        self.steps = r.step;
        self.t = r.t;
        self.total_sweeps += r.solver_sweeps;
        self.max_sweeps = self.max_sweeps.max(r.solver_sweeps);
        self.stagnated_solves += r.solver_stagnated as usize;
        self.particles_added += r.particles_added;
        self.particles_removed += r.particles_removed;
        if r.divergence_star_norm > 0.0 {
            let ratio = r.divergence_norm / r.divergence_star_norm;
            self.max_divergence_ratio = self.max_divergence_ratio.max(ratio);
            self.ratio_sum += ratio;
            self.ratio_count += 1;
            self.mean_divergence_ratio = self.ratio_sum / self.ratio_count as f64;
        }
        for k in 0..2 {
            self.min_phase_counts[k] = self.min_phase_counts[k].min(r.phase_counts[k]);
            self.max_phase_counts[k] = self.max_phase_counts[k].max(r.phase_counts[k]);
        }
    }

    /// Largest relative deviation of a phase count from its initial value.
    pub fn max_phase_count_deviation(&self) -> f64 {
        (0..2)
            .filter(|&k| self.initial_phase_counts[k] > 0)
            .map(|k| {
                let n0 = self.initial_phase_counts[k] as f64;
                let lo = (self.min_phase_counts[k] as f64 - n0).abs();
                let hi = (self.max_phase_counts[k] as f64 - n0).abs();
                lo.max(hi) / n0
            })
            .fold(0.0, f64::max)
    }

    pub fn mean_sweeps(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.total_sweeps as f64 / self.steps as f64
        }
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "steps            {}", self.steps)?;
        writeln!(f, "final time       {:.6} s", self.t)?;
        writeln!(f, "wall time        {:.2} s", self.wall_time.as_secs_f64())?;
        writeln!(f, "snapshots        {}", self.snapshots)?;
        writeln!(
            f,
            "solver sweeps    total {} mean {:.1} max {} stagnated {}",
            self.total_sweeps,
            self.mean_sweeps(),
            self.max_sweeps,
            self.stagnated_solves
        )?;
        writeln!(
            f,
            "particles        added {} removed {}",
            self.particles_added, self.particles_removed
        )?;
        writeln!(
            f,
            "interior counts  gas {} [{}, {}] liquid {} [{}, {}]",
            self.initial_phase_counts[0],
            self.min_phase_counts[0],
            self.max_phase_counts[0],
            self.initial_phase_counts[1],
            self.min_phase_counts[1],
            self.max_phase_counts[1]
        )?;
        write!(
            f,
            "|div v|/|div v*| mean {:.3} max {:.3}",
            self.mean_divergence_ratio, self.max_divergence_ratio
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides `output.interval`.
    pub snapshot_every: Option<f64>,
}

/// Outcome of [`run`]: the summary is available even when a step failed.
#[derive(Debug)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub out_dir: PathBuf,
    pub error: Option<crate::Error>,
}

/// Integrates `config` to `t_end`, writing into `out_dir`:
/// `config.toml` (the resolved configuration), `run.log` (defaults applied,
/// per-snapshot progress, final summary), `diagnostics.csv` (one row per
/// step plus the initial state) and `snapshot_NNNNN.csv` every output
/// interval, starting with the initial state and ending with the final one.
/// A failed step stops the run; files written so far are kept.
pub fn run(config: ScenarioConfig, out_dir: impl AsRef<Path>, options: &RunOptions) -> Result<RunOutcome> {
    let out_dir = out_dir.as_ref().to_path_buf();
    fs::create_dir_all(&out_dir)?;
    let started = Instant::now();
    let interval = options.snapshot_every.unwrap_or(config.output.interval);

    let mut log = fs::File::create(out_dir.join(RUN_LOG_FILE))?;
    writeln!(log, "scenario {}", config.name)?;
    for d in &config.defaults_applied {
        writeln!(log, "default: {d}")?;
    }
    if let Some(s) = options.snapshot_every {
        writeln!(log, "snapshot interval overridden: {s} s")?;
    }
    fs::write(out_dir.join(CONFIG_ECHO_FILE), config.to_toml())?;

    let mut sim = Simulation::new(config)?;
    writeln!(
        log,
        "particles {} (gas {}, liquid {}), dx0 {:.6e}, steps {}",
        sim.cloud().len(),
        sim.initial_phase_counts()[0],
        sim.initial_phase_counts()[1],
        sim.cloud().dx0(),
        sim.steps_to_end()
    )?;

    let mut summary = RunSummary::starting(sim.initial_phase_counts());
    write_snapshot(out_dir.join(snapshot_name(0)), sim.cloud())?;
    summary.snapshots = 1;
    let mut diag = DiagnosticsWriter::create(out_dir.join(DIAGNOSTICS_FILE))?;
    diag.append(&sim.diagnostics())?;

    let dt = sim.config().numerics.dt;
    let mut next_snapshot = interval;
    let mut last_snapshot_step = 0;
    let result = sim.run(|s, r| {
        summary.record(r);
        diag.append(&s.diagnostics())?;
        if interval > 0.0 && r.t >= next_snapshot - 1e-6 * dt {
            write_snapshot(out_dir.join(snapshot_name(summary.snapshots)), s.cloud())?;
            summary.snapshots += 1;
            last_snapshot_step = r.step;
            while next_snapshot <= r.t + 1e-6 * dt {
                next_snapshot += interval;
            }
            diag.flush()?;
            writeln!(
                log,
                "t {:.6} step {} sweeps {} vmax {:.4e}",
                r.t, r.step, r.solver_sweeps, r.max_velocity
            )?;
        }
        Ok(())
    });
    if result.is_ok() && sim.steps() > last_snapshot_step {
        write_snapshot(out_dir.join(snapshot_name(summary.snapshots)), sim.cloud())?;
        summary.snapshots += 1;
    }
    diag.flush()?;
    summary.wall_time = started.elapsed();
    let error = result.err();
    if let Some(e) = &error {
        writeln!(log, "error: {e}")?;
    }
    writeln!(log, "{summary}")?;
    Ok(RunOutcome { summary, out_dir, error })
}
