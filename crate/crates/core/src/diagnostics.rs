//! Energy ledger of the splitting scheme, error quantities against a
//! reference trajectory, consistency terms and rate fits.
//!
//! Time integrals use the rectangle rule at substep right end points, which
//! is the pairing under which the backward Euler ledger closes exactly.

use crate::error::{FsiError, Result};
use crate::monolithic::ReferenceTrajectory;
use crate::operators::FsiOperators;
use crate::splitting::{SplitRun, SubstepSample};

/// One row of the ledger. Row 0 holds the initial values with `t_window = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerEntry {
    pub step: usize,
    pub t: f64,
    pub e: f64,
    pub t_window: f64,
    pub s: f64,
    /// `E_n + sum_{k<=n} T_k + S_n - (E_0 + S_0)`
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    entries: Vec<LedgerEntry>,
    t_sum: f64,
}

impl EnergyLedger {
    pub fn new(e0: f64, s0: f64) -> Self {
        Self {
            entries: vec![LedgerEntry {
                step: 0,
                t: 0.0,
                e: e0,
                t_window: 0.0,
                s: s0,
                residual: 0.0,
            }],
            t_sum: 0.0,
        }
    }

    pub fn push(&mut self, t: f64, e: f64, t_window: f64, s: f64) {
        self.t_sum += t_window;
        let first = self.entries[0];
        let step = self.entries.len();
        self.entries.push(LedgerEntry {
            step,
            t,
            e,
            t_window,
            s,
            residual: e + self.t_sum + s - (first.e + first.s),
        });
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn e0(&self) -> f64 {
        self.entries[0].e
    }

    pub fn s0(&self) -> f64 {
        self.entries[0].s
    }

    pub fn t_sum(&self) -> f64 {
        self.t_sum
    }

    /// `E_{n+1} + T_{n+1} + S_{n+1} - (E_n + S_n)` for every window.
    pub fn window_residuals(&self) -> Vec<f64> {
        self.entries
            .windows(2)
            .map(|w| w[1].e + w[1].t_window + w[1].s - (w[0].e + w[0].s))
            .collect()
    }

    /// Largest global residual over windows `1..=N` (`-inf` before the
    /// first window).
    pub fn max_residual(&self) -> f64 {
        self.entries[1..].iter().map(|e| e.residual).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Final global residual `E_N + sum T + S_N - (E_0 + S_0)`.
pub fn stability_residual(ledger: &EnergyLedger) -> f64 {
    ledger.entries().last().map_or(0.0, |e| e.residual)
}

pub fn energy_e(ops: &FsiOperators, u: &[f64], eta_dot: &[f64], eta: &[f64]) -> f64 {
    ops.energy(u, eta_dot, eta)
}

fn dissipation(ops: &FsiOperators, weight: f64, dt: f64, samples: &[SubstepSample], u_avg_prev: &[f64]) -> f64 {
    samples
        .iter()
        .map(|s| {
            let jump: Vec<f64> = ops
                .solid_trace(&s.eta_dot)
                .iter()
                .zip(u_avg_prev)
                .map(|(a, b)| a - b)
                .collect();
            ops.visc.quad_form(&s.u) + weight * ops.trace_norm_sq(&jump)
        })
        .sum::<f64>()
        * dt
}

/// Window dissipation: viscous term plus `lam/2 |eta_dot - u_avg_prev|^2`.
pub fn window_t(ops: &FsiOperators, lambda: f64, dt: f64, samples: &[SubstepSample], u_avg_prev: &[f64]) -> f64 {
    dissipation(ops, 0.5 * lambda, dt, samples, u_avg_prev)
}

/// Window interface stock: `1/(2 lam) |traction|^2 + lam/2 |u|^2`, the
/// traction measured in the dual norm.
pub fn window_s(ops: &FsiOperators, lambda: f64, dt: f64, samples: &[SubstepSample]) -> f64 {
    samples
        .iter()
        .map(|s| {
            ops.load_norm_sq(&s.traction) / (2.0 * lambda)
                + 0.5 * lambda * ops.trace_norm_sq(&ops.fluid_trace(&s.u))
        })
        .sum::<f64>()
        * dt
}

/// `dt_window * (|traction_0|^2 / (2 lam) + lam/2 |u_0|^2)`, with the squared
/// traction norm supplied by the caller.
pub fn initial_s0(ops: &FsiOperators, lambda: f64, dt_window: f64, u0_trace: &[f64], traction_norm_sq: f64) -> f64 {
    dt_window * (traction_norm_sq / (2.0 * lambda) + 0.5 * lambda * ops.trace_norm_sq(u0_trace))
}

/// Gap of the polarization identity
/// `<v - w, psi> = 1/2 (|v|^2 - |w|^2 + |psi - w|^2 - |psi - v|^2)`
/// in the interface inner product (left minus right).
pub fn polarization_gap(ops: &FsiOperators, v: &[f64], w: &[f64], psi: &[f64]) -> f64 {
    let sub = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
    let gpsi = ops.trace_load(psi);
    let lhs: f64 = sub(v, w).iter().zip(&gpsi).map(|(a, b)| a * b).sum();
    let rhs = 0.5
        * (ops.trace_norm_sq(v) - ops.trace_norm_sq(w) + ops.trace_norm_sq(&sub(psi, w))
            - ops.trace_norm_sq(&sub(psi, v)));
    lhs - rhs
}

/// `dt_window |mean w|^2 - dt sum_j |w_j|^2` for samples over one window;
/// non-positive by convexity.
pub fn averaging_gap(ops: &FsiOperators, dt_window: f64, samples: &[Vec<f64>]) -> f64 {
    let k = samples.len() as f64;
    let mut mean = vec![0.0; ops.trace_len()];
    for s in samples {
        for (m, x) in mean.iter_mut().zip(s) {
            *m += x / k;
        }
    }
    let dt = dt_window / k;
    dt_window * ops.trace_norm_sq(&mean) - dt * samples.iter().map(|s| ops.trace_norm_sq(s)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub dt: f64,
    /// error energy at `t_0`
    pub e0: f64,
    /// initial interface error stock
    pub s0: f64,
    /// error energy at `T`
    pub e_final: f64,
    /// per-window dissipation error
    pub t_windows: Vec<f64>,
    pub t_sum: f64,
    /// interface error stock of the last window
    pub s_final: f64,
    pub total: f64,
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Fine reference step matching a split substep, if the grids are nested.
fn aligned_step(reference: &ReferenceTrajectory, t: f64) -> Result<usize> {
    let x = t / reference.dt();
    let k = x.round();
    if (x - k).abs() > 1e-8 * x.max(1.0) || k as usize > reference.steps() {
        return Err(FsiError::IncompatibleGrids(format!(
            "time {t} is not a reference step (dt_ref = {})",
            reference.dt()
        )));
    }
    Ok(k as usize)
}

/// Error quantities of a recorded split run against a reference trajectory
/// on the same mesh. The split trajectory must contain all windows.
pub fn error_norms(ops: &FsiOperators, lambda: f64, split: &SplitRun, reference: &ReferenceTrajectory) -> Result<ErrorReport> {
    let windows = &split.windows;
    if windows.is_empty() || windows.len() != split.state.n {
        return Err(FsiError::IncompatibleGrids(
            "split run was not recorded window by window".into(),
        ));
    }
    let m = windows[0].samples.len();
    let n_win = windows.len();
    let dt_window = split.state.t / n_win as f64;
    let dt = dt_window / m as f64;

    let snapshot = |t: f64| -> Result<&crate::monolithic::MonolithicState> {
        let k = aligned_step(reference, t)?;
        reference.snapshot(k).ok_or_else(|| {
            FsiError::IncompatibleGrids(format!("no reference snapshot at step {k} (t = {t})"))
        })
    };

    let ref0 = snapshot(0.0)?;
    let init = &split.initial;
    let e0 = ops.energy(
        &diff(&ref0.u, &init.u),
        &diff(&ref0.eta_dot, &init.eta_dot),
        &diff(&ref0.eta, &init.eta),
    );
    let mut e_avg = diff(&ops.fluid_trace(&ref0.u), &init.iface.u_avg);
    let s0 = dt_window
        * (ops.load_norm_sq(&diff(reference.flux(0), &init.iface.traction_avg)) / (2.0 * lambda)
            + 0.5 * lambda * ops.trace_norm_sq(&e_avg));

    let mut t_windows = Vec::with_capacity(n_win);
    let mut s_final = 0.0;
    for w in windows {
        let mut t_acc = 0.0;
        let mut s_acc = 0.0;
        let mut ref_traces = Vec::with_capacity(m);
        for s in &w.samples {
            let k = aligned_step(reference, s.t)?;
            let r = snapshot(s.t)?;
            let eu = diff(&r.u, &s.u);
            let u_ref = reference.trace(k);
            let jump = diff(&diff(u_ref, &ops.solid_trace(&s.eta_dot)), &e_avg);
            t_acc += ops.visc.quad_form(&eu) + 0.25 * lambda * ops.trace_norm_sq(&jump);
            s_acc += ops.load_norm_sq(&diff(reference.flux(k), &s.traction)) / (2.0 * lambda)
                + 0.5 * lambda * ops.trace_norm_sq(&ops.fluid_trace(&eu));
            ref_traces.push(u_ref.to_vec());
        }
        t_windows.push(dt * t_acc);
        s_final = dt * s_acc;
        // averaged error for the next window
        let split_traces: Vec<Vec<f64>> = w.samples.iter().map(|s| ops.fluid_trace(&s.u)).collect();
        e_avg = vec![0.0; ops.trace_len()];
        for (a, b) in ref_traces.iter().zip(&split_traces) {
            for ((e, x), y) in e_avg.iter_mut().zip(a).zip(b) {
                *e += (x - y) / m as f64;
            }
        }
    }
    let last = windows.last().unwrap().samples.last().unwrap();
    let r = snapshot(last.t)?;
    let e_final = ops.energy(
        &diff(&r.u, &last.u),
        &diff(&r.eta_dot, &last.eta_dot),
        &diff(&r.eta, &last.eta),
    );
    let t_sum = t_windows.iter().sum();
    Ok(ErrorReport {
        dt: dt_window,
        e0,
        s0,
        e_final,
        t_windows,
        t_sum,
        s_final,
        total: e_final + t_sum + s_final,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyRecord {
    /// window index `n + 1` of `[t_n, t_{n+1}]`
    pub window: usize,
    pub t: f64,
    /// `int |lam (U - U_avg_prev)|^2` over the window
    pub g3_sq: f64,
    /// `int |R - R_avg_prev|^2` over the window (dual norm)
    pub g2_sq: f64,
}

/// Per-window consistency terms of the reference trajectory for windows of
/// size `dt_window`, integrated at the reference resolution. The average of
/// the window before the first is the initial value.
pub fn consistency_terms(
    ops: &FsiOperators,
    lambda: f64,
    reference: &ReferenceTrajectory,
    dt_window: f64,
) -> Result<Vec<ConsistencyRecord>> {
    let k = aligned_step(reference, dt_window)?;
    if k == 0 || !reference.steps().is_multiple_of(k) {
        return Err(FsiError::IncompatibleGrids(format!(
            "window {dt_window} does not tile the reference horizon"
        )));
    }
    let dt = reference.dt();
    let mut out = Vec::with_capacity(reference.steps() / k);
    let mut u_avg = reference.trace(0).to_vec();
    let mut r_avg = reference.flux(0).to_vec();
    for w in 0..reference.steps() / k {
        let mut g3 = 0.0;
        let mut g2 = 0.0;
        let mut next_u = vec![0.0; ops.trace_len()];
        let mut next_r = vec![0.0; ops.trace_len()];
        for j in w * k + 1..=(w + 1) * k {
            let (u, r) = (reference.trace(j), reference.flux(j));
            g3 += lambda * lambda * ops.trace_norm_sq(&diff(u, &u_avg));
            g2 += ops.load_norm_sq(&diff(r, &r_avg));
            for (a, x) in next_u.iter_mut().zip(u) {
                *a += x / k as f64;
            }
            for (a, x) in next_r.iter_mut().zip(r) {
                *a += x / k as f64;
            }
        }
        out.push(ConsistencyRecord {
            window: w + 1,
            t: dt * ((w + 1) * k) as f64,
            g3_sq: dt * g3,
            g2_sq: dt * g2,
        });
        u_avg = next_u;
        r_avg = next_r;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceLevel {
    pub dt: f64,
    pub err_e: f64,
    pub err_t_sum: f64,
    pub err_s: f64,
    pub total: f64,
}

impl From<&ErrorReport> for ConvergenceLevel {
    fn from(r: &ErrorReport) -> Self {
        Self {
            dt: r.dt,
            err_e: r.e_final,
            err_t_sum: r.t_sum,
            err_s: r.s_final,
            total: r.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    levels: Vec<ConvergenceLevel>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    /// false if some refinement did not reduce the error
    pub monotone: bool,
}

impl ConvergenceReport {
    pub fn new(levels: Vec<ConvergenceLevel>) -> Result<Self> {
        if levels.windows(2).any(|w| w[1].dt.partial_cmp(&w[0].dt) != Some(std::cmp::Ordering::Less)) {
            return Err(FsiError::InvalidParameter {
                name: "dt levels",
                constraint: "strictly decreasing",
            });
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[ConvergenceLevel] {
        &self.levels
    }

    /// Energy-norm rate between consecutive levels; `None` for the first.
    pub fn pairwise_rates(&self) -> Vec<Option<f64>> {
        std::iter::once(None)
            .chain(self.levels.windows(2).map(|w| {
                Some(0.5 * (w[0].total / w[1].total).ln() / (w[0].dt / w[1].dt).ln())
            }))
            .collect()
    }

    /// Ratio of energy-norm errors `sqrt(total)` between consecutive levels.
    pub fn pairwise_ratios(&self) -> Vec<f64> {
        self.levels
            .windows(2)
            .map(|w| (w[0].total / w[1].total).sqrt())
            .collect()
    }
}

/// Least-squares slope of `log sqrt(total)` against `log dt`.
pub fn fit_rate(report: &ConvergenceReport) -> Result<RateFit> {
    let lv = report.levels();
    if lv.len() < 3 {
        return Err(FsiError::InvalidParameter {
            name: "dt levels",
            constraint: "at least 3",
        });
    }
    let xs: Vec<f64> = lv.iter().map(|l| l.dt.ln()).collect();
    let ys: Vec<f64> = lv.iter().map(|l| 0.5 * l.total.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(RateFit {
        slope: sxy / sxx,
        monotone: lv.windows(2).all(|w| w[1].total < w[0].total),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::random_state;
    use crate::monolithic::{initial_pressure_and_flux, run_reference, MonolithicState};
    use crate::operators::test_support::{ops, ops_with, params};
    use crate::splitting::{InterfaceData, SplitState, WindowRecord};
    use nalgebra::{DMatrix, DVector};

    fn dense(m: &crate::fem::CsrMatrix) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(m.nrows(), m.ncols());
        for (i, j, v) in m.iter() {
            d[(i, j)] += v;
        }
        d
    }

    #[test]
    fn energy_examples() {
        let mut p = params();
        p.rho_f = 2.0;
        let o = ops_with(3, p);
        let zu = vec![0.0; o.velocity().dof_count()];
        let zs = vec![0.0; o.displacement().dof_count()];
        assert_eq!(energy_e(&o, &zu, &zs, &zs), 0.0);
        let shift = o.displacement().interpolate(|_| [0.3, -1.0]);
        assert!(energy_e(&o, &zu, &zs, &shift).abs() < 1e-13);
        let ones = vec![1.0; zu.len()];
        assert!((energy_e(&o, &ones, &zs, &zs) - 2.0).abs() < 1e-13);
    }

    fn sample(o: &FsiOperators, seed: u64) -> SubstepSample {
        let init = random_state(o, seed).unwrap();
        SubstepSample {
            t: 0.0,
            u: init.u,
            p: init.p,
            eta: init.eta,
            eta_dot: init.eta_dot,
            traction: init.traction.unwrap().load,
        }
    }

    #[test]
    fn window_quantities_against_dense_oracle() {
        let o = ops(2);
        let (lam, dt) = (1.7, 0.05);
        let s = sample(&o, 4);
        let avg: Vec<f64> = (0..o.trace_len()).map(|i| 0.1 * i as f64).collect();

        let k = dense(&o.visc);
        let g = dense(&o.trace_mass);
        let u = DVector::from_vec(s.u.clone());
        let jump = DVector::from_vec(o.solid_trace(&s.eta_dot)) - DVector::from_vec(avg.clone());
        let t_oracle = dt * ((u.transpose() * &k * &u)[0] + 0.5 * lam * (jump.transpose() * &g * &jump)[0]);
        let t = window_t(&o, lam, dt, std::slice::from_ref(&s), &avg);
        assert!((t - t_oracle).abs() < 1e-12 * t_oracle);

        let r = DVector::from_vec(s.traction.clone());
        let dual = (r.transpose() * g.clone().try_inverse().unwrap() * &r)[0];
        let ut = DVector::from_vec(o.fluid_trace(&s.u));
        let s_oracle = dt * (dual / (2.0 * lam) + 0.5 * lam * (ut.transpose() * &g * &ut)[0]);
        let sv = window_s(&o, lam, dt, std::slice::from_ref(&s));
        assert!((sv - s_oracle).abs() < 1e-12 * s_oracle);

        let zero = SubstepSample {
            t: 0.0,
            u: vec![0.0; s.u.len()],
            p: vec![0.0; s.p.len()],
            eta: vec![0.0; s.eta.len()],
            eta_dot: vec![0.0; s.eta_dot.len()],
            traction: vec![0.0; s.traction.len()],
        };
        let zavg = vec![0.0; o.trace_len()];
        assert_eq!(window_t(&o, lam, dt, std::slice::from_ref(&zero), &zavg), 0.0);
        assert_eq!(window_s(&o, lam, dt, std::slice::from_ref(&zero)), 0.0);
    }

    #[test]
    fn rigid_translation_has_no_dissipation() {
        let o = ops(3);
        let c = [0.4, -0.2];
        let mut s = sample(&o, 1);
        s.u = o.velocity().interpolate(|_| c);
        s.eta_dot = o.displacement().interpolate(|_| c);
        let avg = o.fluid_trace(&s.u);
        assert!(window_t(&o, 1.0, 0.1, std::slice::from_ref(&s), &avg).abs() < 1e-13);
    }

    #[test]
    fn s0_of_constant_pressure() {
        let o = ops(3);
        let (p0, lam, dt) = (3.0, 0.5, 0.1);
        let tr = crate::initial_data::InitialTraction::from_stress(&o, |_| [0.0, -p0]).unwrap();
        let zero = vec![0.0; o.trace_len()];
        let s0 = initial_s0(&o, lam, dt, &zero, tr.norm_sq);
        assert!((s0 - dt / (2.0 * lam) * p0 * p0 * 1.0).abs() < 1e-13);
    }

    #[test]
    fn ledger_residuals() {
        let mut l = EnergyLedger::new(2.0, 1.0);
        assert_eq!(stability_residual(&l), 0.0);
        assert_eq!(l.max_residual(), f64::NEG_INFINITY);
        l.push(0.1, 1.5, 0.4, 0.9);
        l.push(0.2, 1.0, 0.3, 0.8);
        assert!((stability_residual(&l) - (1.0 + 0.7 + 0.8 - 3.0)).abs() < 1e-15);
        let w = l.window_residuals();
        assert!((w[0] - (1.5 + 0.4 + 0.9 - 3.0)).abs() < 1e-15);
        assert!((w[1] - (1.0 + 0.3 + 0.8 - 2.4)).abs() < 1e-15);
        assert!((l.max_residual() + 0.2).abs() < 1e-15);
    }

    #[test]
    fn polarization_and_averaging() {
        let o = ops(3);
        let n = o.trace_len();
        let v: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let w: Vec<f64> = (0..n).map(|i| (2.0 * i as f64).cos()).collect();
        let psi: Vec<f64> = (0..n).map(|i| 0.3 * i as f64 - 1.0).collect();
        assert!(polarization_gap(&o, &v, &w, &psi).abs() < 1e-13);
        assert!(averaging_gap(&o, 0.3, &[v.clone(), w.clone(), psi]) <= 1e-13);
        assert!(averaging_gap(&o, 0.3, &[v.clone(), v]).abs() < 1e-13);
    }

    /// Reference trajectory whose trace grows linearly in time.
    fn linear_reference(o: &FsiOperators, dt: f64, steps: usize) -> (ReferenceTrajectory, Vec<f64>) {
        let c: Vec<f64> = (0..o.trace_len()).map(|i| if i % 2 == 0 { 1.0 } else { 0.5 }).collect();
        let traces = (0..=steps).map(|j| c.iter().map(|x| x * j as f64 * dt).collect()).collect();
        let fluxes = vec![vec![0.0; o.trace_len()]; steps + 1];
        let snaps = vec![MonolithicState::zeros(o); 2];
        (ReferenceTrajectory::from_parts(dt, steps, snaps, traces, fluxes).unwrap(), c)
    }

    #[test]
    fn consistency_of_linear_trace_matches_hand_integral() {
        let o = ops(2);
        let lam = 2.0;
        let (k, windows) = (400, 3);
        let dt_win = 0.1;
        let (reference, c) = linear_reference(&o, dt_win / k as f64, k * windows);
        let terms = consistency_terms(&o, lam, &reference, dt_win).unwrap();
        let c2 = o.trace_norm_sq(&c);
        // first window: int_0^dt (lam s)^2 |c|^2; later: int_0^dt (lam (s + dt/2))^2 |c|^2
        let first = lam * lam * c2 * dt_win.powi(3) / 3.0;
        let later = lam * lam * c2 * dt_win.powi(3) * 13.0 / 12.0;
        assert!((terms[0].g3_sq - first).abs() < 1e-2 * first);
        for t in &terms[1..] {
            assert!((t.g3_sq - later).abs() < 1e-2 * later);
            assert_eq!(t.g2_sq, 0.0);
        }
    }

    #[test]
    fn consistency_of_constant_trace_vanishes() {
        let o = ops(2);
        let c = vec![1.0; o.trace_len()];
        let reference = ReferenceTrajectory::from_parts(
            0.01,
            10,
            vec![MonolithicState::zeros(&o); 2],
            vec![c.clone(); 11],
            vec![c; 11],
        )
        .unwrap();
        for t in consistency_terms(&o, 1.0, &reference, 0.05).unwrap() {
            assert_eq!((t.g3_sq, t.g2_sq), (0.0, 0.0));
        }
        assert!(consistency_terms(&o, 1.0, &reference, 0.03).is_err());
    }

    /// A split run that replays a reference trajectory exactly.
    fn replay(o: &FsiOperators, lam: f64, reference: &ReferenceTrajectory, windows: usize) -> SplitRun {
        let k = reference.steps() / windows;
        let snap = |j: usize| reference.snapshot(j).unwrap();
        let state = |j: usize, iface: InterfaceData| SplitState {
            n: j / k,
            t: snap(j).t,
            u: snap(j).u.clone(),
            p: snap(j).p.clone(),
            eta: snap(j).eta.clone(),
            eta_dot: snap(j).eta_dot.clone(),
            iface,
        };
        let mut iface = InterfaceData {
            u_avg: reference.trace(0).to_vec(),
            traction_avg: reference.flux(0).to_vec(),
        };
        let initial = state(0, iface.clone());
        let mut records = Vec::new();
        let mut ledger = EnergyLedger::new(0.0, 0.0);
        for w in 0..windows {
            let samples: Vec<SubstepSample> = (w * k + 1..=(w + 1) * k)
                .map(|j| SubstepSample {
                    t: reference.dt() * j as f64,
                    u: snap(j).u.clone(),
                    p: snap(j).p.clone(),
                    eta: snap(j).eta.clone(),
                    eta_dot: snap(j).eta_dot.clone(),
                    traction: reference.flux(j).to_vec(),
                })
                .collect();
            let traces: Vec<Vec<f64>> = samples.iter().map(|s| o.fluid_trace(&s.u)).collect();
            let tr: Vec<Vec<f64>> = samples.iter().map(|s| s.traction.clone()).collect();
            records.push(WindowRecord {
                n: w + 1,
                iface_in: iface.clone(),
                samples,
            });
            iface = crate::splitting::update_interface_average(&traces, &tr);
            ledger.push(0.0, 0.0, 0.0, lam);
        }
        SplitRun {
            initial,
            state: state(windows * k, iface),
            ledger,
            windows: records,
        }
    }

    #[test]
    fn reference_against_itself_has_no_error() {
        let o = ops(2);
        let init = random_state(&o, 2).unwrap().to_monolithic();
        let (_, flux0) = initial_pressure_and_flux(&o, &init.u, &init.eta).unwrap();
        let reference = run_reference(&o, &init, &flux0, 0.01, 8, 1).unwrap();
        let run = replay(&o, 1.0, &reference, 4);
        let rep = error_norms(&o, 1.0, &run, &reference).unwrap();
        assert_eq!((rep.e0, rep.s0), (0.0, 0.0));
        assert_eq!(rep.total, 0.0);
        assert!(rep.t_windows.iter().all(|t| *t == 0.0));
    }

    #[test]
    fn error_norms_reject_unaligned_grids() {
        let o = ops(2);
        let init = random_state(&o, 2).unwrap().to_monolithic();
        let (_, flux0) = initial_pressure_and_flux(&o, &init.u, &init.eta).unwrap();
        let reference = run_reference(&o, &init, &flux0, 0.01, 8, 2).unwrap();
        // substeps at odd reference steps have no snapshot
        let run = replay(&o, 1.0, &run_reference(&o, &init, &flux0, 0.01, 8, 1).unwrap(), 8);
        assert!(matches!(
            error_norms(&o, 1.0, &run, &reference),
            Err(FsiError::IncompatibleGrids(_))
        ));
    }

    fn report(totals: &[f64]) -> ConvergenceReport {
        ConvergenceReport::new(
            totals
                .iter()
                .enumerate()
                .map(|(i, &t)| ConvergenceLevel {
                    dt: 0.1 / 2f64.powi(i as i32),
                    err_e: t,
                    err_t_sum: 0.0,
                    err_s: 0.0,
                    total: t,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn rate_fits() {
        // total is a squared energy: halving the energy norm quarters it
        let r = fit_rate(&report(&[1.0, 0.25, 0.0625, 0.015625])).unwrap();
        assert!((r.slope - 1.0).abs() < 1e-12 && r.monotone);
        let r = fit_rate(&report(&[1.0, 0.5, 0.25, 0.125])).unwrap();
        assert!((r.slope - 0.5).abs() < 1e-12);
        let r = fit_rate(&report(&[1.0, 0.5, 0.6, 0.125])).unwrap();
        assert!(!r.monotone);
        assert!(fit_rate(&report(&[1.0, 0.5])).is_err());
        let rates = report(&[1.0, 0.25, 0.0625]).pairwise_rates();
        assert_eq!(rates[0], None);
        assert!((rates[1].unwrap() - 1.0).abs() < 1e-12);
        let mut lv = report(&[1.0, 0.5, 0.25]).levels().to_vec();
        lv.swap(0, 1);
        assert!(ConvergenceReport::new(lv).is_err());
    }
}
