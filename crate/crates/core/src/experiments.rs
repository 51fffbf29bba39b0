//! Experiment drivers shared by the command line tool and the acceptance
//! suite: stability runs, convergence studies against a monolithic
//! reference, and the Dirichlet-Neumann contrast.

use std::thread;

use crate::diagnostics::{
    consistency_terms, error_norms, fit_rate, ConsistencyRecord, ConvergenceLevel, ConvergenceReport,
    ErrorReport, RateFit,
};
use crate::error::{FsiError, Result};
use crate::initial_data::InitialState;
use crate::monolithic::{run_reference, DirichletNeumann, DnState};
use crate::operators::FsiOperators;
use crate::splitting::{PhysicalParams, SplitRun, SplitSolver, TimeGrid};

/// Reference steps per window of the finest level.
pub const REFERENCE_REFINEMENT: usize = 8;

/// Relative tolerance of the stability residual.
pub const STABILITY_TOL: f64 = 1e-8;

pub fn stability_run(ops: &FsiOperators, params: PhysicalParams, grid: TimeGrid, init: &InitialState) -> Result<SplitRun> {
    SplitSolver::new(ops, params, grid)?.run(init, false)
}

/// True when the final residual is within `STABILITY_TOL * (E0 + S0)`.
pub fn residual_within_tolerance(run: &SplitRun) -> bool {
    let l = &run.ledger;
    l.max_residual() <= STABILITY_TOL * (l.e0() + l.s0())
}

#[derive(Debug, Clone)]
pub struct LevelResult {
    pub windows: usize,
    pub report: ErrorReport,
    pub consistency: Vec<ConsistencyRecord>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub lambda: f64,
    pub reference_dt: f64,
    pub levels: Vec<LevelResult>,
    pub report: ConvergenceReport,
    pub fit: RateFit,
}

impl ConvergenceStudy {
    /// `sum_n int |g3|^2` and `sum_n int |g2|^2` per level.
    pub fn consistency_sums(&self) -> Vec<(f64, f64)> {
        self.levels
            .iter()
            .map(|l| {
                l.consistency
                    .iter()
                    .fold((0.0, 0.0), |(a, b), r| (a + r.g3_sq, b + r.g2_sq))
            })
            .collect()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Run the reference once at `T / (N_max * REFERENCE_REFINEMENT)` and the
/// splitting at each window count, then collect error and consistency
/// terms per level. Window counts must be increasing and divide `N_max`.
pub fn convergence_study(
    ops: &FsiOperators,
    params: PhysicalParams,
    t_final: f64,
    window_counts: &[usize],
    substeps: usize,
    init: &InitialState,
) -> Result<ConvergenceStudy> {
    if window_counts.len() < 2 || window_counts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FsiError::InvalidParameter {
            name: "dt_levels",
            constraint: "at least 2 increasing window counts",
        });
    }
    let n_max = *window_counts.last().unwrap();
    let steps = n_max * REFERENCE_REFINEMENT;
    // reference steps per split substep, for every level
    let mut stride = 0;
    for &n in window_counts {
        let per_window = steps / n;
        if !steps.is_multiple_of(n) || !per_window.is_multiple_of(substeps) {
            return Err(FsiError::IncompatibleGrids(format!(
                "{n} windows with {substeps} substeps do not nest in {steps} reference steps"
            )));
        }
        stride = gcd(stride, per_window / substeps);
    }
    let traction = init.traction.as_ref().ok_or(FsiError::MissingInitialPressure)?;
    let reference_dt = t_final / steps as f64;
    let reference = run_reference(ops, &init.to_monolithic(), &traction.load, reference_dt, steps, stride)?;

    let level = |n: usize| -> Result<LevelResult> {
        let grid = TimeGrid::new(t_final, n, substeps)?;
        let run = SplitSolver::new(ops, params, grid)?.run(init, true)?;
        Ok(LevelResult {
            windows: n,
            report: error_norms(ops, params.lambda, &run, &reference)?,
            consistency: consistency_terms(ops, params.lambda, &reference, grid.dt())?,
        })
    };
    let levels = thread::scope(|s| {
        let handles: Vec<_> = window_counts.iter().map(|&n| s.spawn(move || level(n))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("level thread panicked"))
            .collect::<Result<Vec<_>>>()
    })?;
    let report = ConvergenceReport::new(levels.iter().map(|l| ConvergenceLevel::from(&l.report)).collect())?;
    let fit = if levels.len() >= 3 {
        fit_rate(&report)?
    } else {
        let r = report.pairwise_rates()[1].unwrap_or(f64::NAN);
        RateFit {
            slope: r,
            monotone: levels[1].report.total < levels[0].report.total,
        }
    };
    Ok(ConvergenceStudy {
        lambda: params.lambda,
        reference_dt,
        levels,
        report,
        fit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DnRow {
    pub step: usize,
    pub t: f64,
    pub dn_energy: f64,
    pub rr_energy: f64,
    pub rr_residual: f64,
}

#[derive(Debug, Clone)]
pub struct DnComparison {
    pub e0: f64,
    pub rows: Vec<DnRow>,
    pub rr_run: SplitRun,
}

impl DnComparison {
    /// First window at which the explicit scheme exceeds `factor * E0`.
    pub fn blowup_window(&self, factor: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.dn_energy.is_nan() || r.dn_energy > factor * self.e0)
            .map(|r| r.step)
    }
}

/// Run the explicit Dirichlet-Neumann scheme and the Robin-Robin splitting
/// side by side on the same problem and windows. Row 0 holds the initial
/// energy.
pub fn dn_compare(ops: &FsiOperators, params: PhysicalParams, grid: TimeGrid, init: &InitialState) -> Result<DnComparison> {
    let traction = init.traction.as_ref().ok_or(FsiError::MissingInitialPressure)?;
    let rr_run = stability_run(ops, params, grid, init)?;
    let dn = DirichletNeumann::new(ops, grid.dt())?;
    let mut s = DnState {
        state: init.to_monolithic(),
        flux: traction.load.clone(),
    };
    let e0 = s.state.energy(ops);
    let mut rows = Vec::with_capacity(grid.windows() + 1);
    rows.push(DnRow {
        step: 0,
        t: 0.0,
        dn_energy: e0,
        rr_energy: rr_run.ledger.e0(),
        rr_residual: 0.0,
    });
    for (n, entry) in rr_run.ledger.entries().iter().enumerate().skip(1) {
        if s.state.energy(ops).is_finite() {
            s = dn.step(&s)?;
        }
        rows.push(DnRow {
            step: n,
            t: grid.window_time(n),
            dn_energy: s.state.energy(ops),
            rr_energy: entry.e,
            rr_residual: entry.residual,
        });
    }
    Ok(DnComparison { e0, rows, rr_run })
}
