use std::path::Path;
use std::thread;

use fsi_robin::experiments::{
    convergence_study, dn_compare, residual_within_tolerance, stability_run, ConvergenceStudy, REFERENCE_REFINEMENT,
    STABILITY_TOL,
};
use fsi_robin::{
    pressure_pulse, random_state, smooth_coupled_mode, EnergyLedger, FsiOperators, InitialState, PhysicalParams,
    SplitRun,
};

use crate::config::{Mode, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{num, write_csv};

/// Amplitude of the interface pressure pulse.
const PULSE_AMPLITUDE: f64 = 1.0;
/// Width of the pulse relative to the channel length.
const PULSE_WIDTH: f64 = 0.1;
const RATE_THRESHOLD: f64 = 0.4;
const SWEEP_LAMBDAS: [f64; 3] = [0.1, 1.0, 10.0];

fn operators(cfg: &RunConfig) -> CliResult<FsiOperators> {
    Ok(FsiOperators::new(cfg.geometry, cfg.nx, cfg.ny_f, cfg.ny_s, cfg.params.material())?)
}

fn initial_data(cfg: &RunConfig, ops: &FsiOperators) -> CliResult<InitialState> {
    Ok(match cfg.mode {
        Mode::Zero => InitialState::zeros(ops),
        Mode::Pulse => pressure_pulse(ops, PULSE_AMPLITUDE, PULSE_WIDTH * cfg.geometry.length)?,
        Mode::Smooth => smooth_coupled_mode(ops)?,
        Mode::Random => random_state(ops, cfg.seed)?,
    })
}

fn with_lambda(p: PhysicalParams, lambda: f64) -> PhysicalParams {
    PhysicalParams { lambda, ..p }
}

fn ledger_rows(ledger: &EnergyLedger) -> Vec<Vec<String>> {
    ledger
        .entries()
        .iter()
        .map(|e| {
            vec![
                e.step.to_string(),
                num(e.t),
                num(e.e),
                num(e.t_window),
                num(e.s),
                num(e.residual),
            ]
        })
        .collect()
}

fn check_stable(run: &SplitRun, what: &str) -> CliResult<()> {
    if residual_within_tolerance(run) {
        Ok(())
    } else {
        let l = &run.ledger;
        Err(CliError::Threshold(format!(
            "{what}: stability residual {:e} exceeds {STABILITY_TOL:e} * (E0 + S0) = {:e}",
            l.max_residual(),
            STABILITY_TOL * (l.e0() + l.s0())
        )))
    }
}

pub fn stability(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let ops = operators(cfg)?;
    let init = initial_data(cfg, &ops)?;
    let run = stability_run(&ops, cfg.params, cfg.grid, &init)?;
    let path = write_csv(
        out,
        "stability.csv",
        &["step", "t", "E", "T", "S", "stability_residual"],
        &ledger_rows(&run.ledger),
    )?;
    println!(
        "wrote {}; max residual {:e}, E0 + S0 = {:e}",
        path.display(),
        run.ledger.max_residual(),
        run.ledger.e0() + run.ledger.s0()
    );
    check_stable(&run, "stability")
}

fn study(cfg: &RunConfig, ops: &FsiOperators, init: &InitialState, lambda: f64) -> CliResult<ConvergenceStudy> {
    let levels = cfg.window_levels();
    if !REFERENCE_REFINEMENT.is_multiple_of(cfg.grid.substeps()) {
        return Err(CliError::Config(format!(
            "m must divide {REFERENCE_REFINEMENT} for the convergence study"
        )));
    }
    Ok(convergence_study(
        ops,
        with_lambda(cfg.params, lambda),
        cfg.grid.t_final(),
        &levels,
        cfg.grid.substeps(),
        init,
    )?)
}

fn converge_rows(s: &ConvergenceStudy) -> Vec<Vec<String>> {
    s.report
        .levels()
        .iter()
        .zip(s.report.pairwise_rates())
        .map(|(l, r)| {
            vec![
                num(l.dt),
                num(l.err_e),
                num(l.err_t_sum),
                num(l.err_s),
                num(l.total),
                r.map_or_else(String::new, num),
            ]
        })
        .collect()
}

fn check_rate(s: &ConvergenceStudy) -> CliResult<()> {
    if s.fit.slope >= RATE_THRESHOLD {
        Ok(())
    } else {
        Err(CliError::Threshold(format!(
            "lambda = {}: fitted rate {} is below {RATE_THRESHOLD}",
            s.lambda, s.fit.slope
        )))
    }
}

pub fn converge(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let ops = operators(cfg)?;
    let init = initial_data(cfg, &ops)?;
    let s = study(cfg, &ops, &init, cfg.params.lambda)?;
    let path = write_csv(
        out,
        "converge.csv",
        &["dt", "err_E", "err_T_sum", "err_S", "total", "rate_pairwise"],
        &converge_rows(&s),
    )?;
    let consistency: Vec<Vec<String>> = s
        .levels
        .iter()
        .flat_map(|l| {
            l.consistency.iter().map(move |c| {
                vec![
                    num(l.report.dt),
                    c.window.to_string(),
                    num(c.t),
                    num(c.g3_sq),
                    num(c.g2_sq),
                ]
            })
        })
        .collect();
    let cpath = write_csv(out, "consistency.csv", &["dt", "window", "t", "g3_sq", "g2_sq"], &consistency)?;
    println!("wrote {} and {}", path.display(), cpath.display());
    println!("reference dt {:e}", s.reference_dt);
    for (l, (g3, g2)) in s.levels.iter().zip(s.consistency_sums()) {
        println!("N = {:>4}: sum g3 {g3:e}, sum g2 {g2:e}", l.windows);
    }
    println!("fitted rate {:.4}", s.fit.slope);
    check_rate(&s)
}

pub fn lambda_sweep(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let ops = operators(cfg)?;
    let init = initial_data(cfg, &ops)?;
    let results = thread::scope(|sc| {
        let handles: Vec<_> = SWEEP_LAMBDAS
            .iter()
            .map(|&lam| {
                let (ops, init) = (&ops, &init);
                sc.spawn(move || -> CliResult<(ConvergenceStudy, SplitRun)> {
                    let s = study(cfg, ops, init, lam)?;
                    let run = stability_run(ops, with_lambda(cfg.params, lam), cfg.grid, init)?;
                    Ok((s, run))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep thread panicked"))
            .collect::<CliResult<Vec<_>>>()
    })?;

    let mut rows = Vec::new();
    for (s, run) in &results {
        let l = &run.ledger;
        let rel = l.max_residual() / (l.e0() + l.s0());
        for mut r in converge_rows(s) {
            r.insert(0, num(s.lambda));
            r.push(num(s.fit.slope));
            r.push(num(rel));
            rows.push(r);
        }
        println!(
            "lambda = {}: fitted rate {:.4}, stability residual / (E0 + S0) = {rel:e}",
            s.lambda, s.fit.slope
        );
    }
    let path = write_csv(
        out,
        "lambda_sweep.csv",
        &[
            "lambda",
            "dt",
            "err_E",
            "err_T_sum",
            "err_S",
            "total",
            "rate_pairwise",
            "rate_fit",
            "stability_residual_rel",
        ],
        &rows,
    )?;
    println!("wrote {}", path.display());
    for (s, run) in &results {
        check_stable(run, &format!("lambda = {}", s.lambda))?;
        check_rate(s)?;
    }
    Ok(())
}

pub fn dn_compare_cmd(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let ops = operators(cfg)?;
    let init = initial_data(cfg, &ops)?;
    let cmp = dn_compare(&ops, cfg.params, cfg.grid, &init)?;
    let rows: Vec<Vec<String>> = cmp
        .rows
        .iter()
        .map(|r| {
            vec![
                r.step.to_string(),
                num(r.t),
                num(r.dn_energy),
                num(r.rr_energy),
                num(r.rr_residual),
            ]
        })
        .collect();
    let path = write_csv(
        out,
        "dn_compare.csv",
        &["step", "t", "E_dirichlet_neumann", "E_robin_robin", "stability_residual"],
        &rows,
    )?;
    println!("wrote {}", path.display());
    match cmp.blowup_window(1e6) {
        Some(w) => println!("Dirichlet-Neumann energy exceeds 1e6 E0 at window {w}"),
        None => println!("Dirichlet-Neumann energy stays below 1e6 E0"),
    }
    check_stable(&cmp.rr_run, "Robin-Robin")
}
