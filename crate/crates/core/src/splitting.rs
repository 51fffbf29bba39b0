//! Robin-Robin loosely coupled splitting.
//!
//! Each window `[t_n, t_{n+1}]` is covered by `m` backward Euler substeps.
//! The solid is advanced over the whole window with Robin data built from
//! the previous window's averages, then the fluid is advanced with the new
//! solid velocity, and finally the interface averages are refreshed.

use crate::diagnostics::{initial_s0, window_s, window_t, EnergyLedger};
use crate::error::{FsiError, Result};
use crate::fem::{apply_dirichlet, saddle, CsrMatrix, Factorization};
use crate::initial_data::InitialState;
use crate::operators::{FsiOperators, MaterialParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub rho_f: f64,
    pub rho_s: f64,
    pub mu: f64,
    pub l1: f64,
    pub l2: f64,
    pub lambda: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        self.material().validate()?;
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(FsiError::InvalidParameter {
                name: "lambda",
                constraint: "> 0",
            });
        }
        Ok(())
    }

    pub fn material(&self) -> MaterialParams {
        MaterialParams {
            rho_f: self.rho_f,
            rho_s: self.rho_s,
            mu: self.mu,
            l1: self.l1,
            l2: self.l2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    windows: usize,
    substeps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, windows: usize, substeps: usize) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(FsiError::InvalidParameter {
                name: "T",
                constraint: "> 0",
            });
        }
        if windows == 0 {
            return Err(FsiError::InvalidParameter {
                name: "N",
                constraint: ">= 1",
            });
        }
        if substeps == 0 {
            return Err(FsiError::InvalidParameter {
                name: "m",
                constraint: ">= 1",
            });
        }
        Ok(Self {
            t_final,
            windows,
            substeps,
        })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn windows(&self) -> usize {
        self.windows
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.windows as f64
    }

    pub fn substep_dt(&self) -> f64 {
        self.t_final / (self.windows * self.substeps) as f64
    }

    /// `t_n`; `window_time(N) == T` exactly.
    pub fn window_time(&self, n: usize) -> f64 {
        self.t_final * n as f64 / self.windows as f64
    }

    /// Time of substep `j` (1-based) of the window starting at `t_n`.
    pub fn substep_time(&self, n: usize, j: usize) -> f64 {
        let k = n * self.substeps + j;
        self.t_final * k as f64 / (self.windows * self.substeps) as f64
    }
}

/// Interface data handed from one window to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceData {
    /// window average of the fluid velocity trace
    pub u_avg: Vec<f64>,
    /// window average of the fluid traction load vector
    pub traction_avg: Vec<f64>,
}

impl InterfaceData {
    pub fn zeros(len: usize) -> Self {
        Self {
            u_avg: vec![0.0; len],
            traction_avg: vec![0.0; len],
        }
    }
}

/// Fields at one substep.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstepSample {
    pub t: f64,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta_dot: Vec<f64>,
    /// fluid traction load vector on the interface
    pub traction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolidSample {
    pub eta: Vec<f64>,
    pub eta_dot: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidSample {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitState {
    /// window index; the fields are at `t_n`
    pub n: usize,
    pub t: f64,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta_dot: Vec<f64>,
    /// data used by the next window
    pub iface: InterfaceData,
}

/// Everything computed in one window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowRecord {
    /// index of the window end, `1..=N`
    pub n: usize,
    /// interface data the window was driven by
    pub iface_in: InterfaceData,
    pub samples: Vec<SubstepSample>,
}

#[derive(Debug, Clone)]
pub struct SplitRun {
    pub initial: SplitState,
    pub state: SplitState,
    pub ledger: EnergyLedger,
    /// filled only when recording was requested
    pub windows: Vec<WindowRecord>,
}

/// Rectangle-rule average of substep samples.
pub fn update_interface_average(u_traces: &[Vec<f64>], tractions: &[Vec<f64>]) -> InterfaceData {
    fn mean(v: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; v.first().map_or(0, Vec::len)];
        for s in v {
            for (o, x) in out.iter_mut().zip(s) {
                *o += x;
            }
        }
        let k = v.len() as f64;
        out.iter_mut().for_each(|o| *o /= k);
        out
    }
    assert!(!u_traces.is_empty() && u_traces.len() == tractions.len());
    InterfaceData {
        u_avg: mean(u_traces),
        traction_avg: mean(tractions),
    }
}

/// Data for the first window: the initial velocity trace and the initial
/// fluid traction.
pub fn initial_interface_data(ops: &FsiOperators, init: &InitialState) -> Result<InterfaceData> {
    let traction = init.traction.as_ref().ok_or(FsiError::MissingInitialPressure)?;
    if traction.load.len() != ops.trace_len() {
        return Err(FsiError::DimensionMismatch(format!(
            "initial traction has {} entries, trace space has {}",
            traction.load.len(),
            ops.trace_len()
        )));
    }
    Ok(InterfaceData {
        u_avg: ops.fluid_trace(&init.u),
        traction_avg: traction.load.clone(),
    })
}

fn zero_dofs(v: &mut [f64], dofs: &[usize]) {
    for &d in dofs {
        v[d] = 0.0;
    }
}

pub struct SplitSolver<'a> {
    ops: &'a FsiOperators,
    params: PhysicalParams,
    grid: TimeGrid,
    solid: Factorization,
    fluid: Factorization,
}

impl<'a> SplitSolver<'a> {
    pub fn new(ops: &'a FsiOperators, params: PhysicalParams, grid: TimeGrid) -> Result<Self> {
        params.validate()?;
        if params.material() != ops.material() {
            return Err(FsiError::InvalidParameter {
                name: "params",
                constraint: "equal to the coefficients the operators were assembled with",
            });
        }
        let (dt, lam) = (grid.substep_dt(), params.lambda);

        let solid = ops
            .mass_s
            .add_scaled(1.0 / dt, &ops.elast, dt)?
            .add_scaled(1.0, &ops.iface_s, lam)?;
        let n_s = solid.nrows();
        let (solid, _) = apply_dirichlet(&solid, &vec![0.0; n_s], ops.displacement().dirichlet_dofs());

        let a = ops
            .mass_f
            .add_scaled(1.0 / dt, &ops.visc, 1.0)?
            .add_scaled(1.0, &ops.iface_f, lam)?;
        let fluid = saddle(&a, &ops.div)?;
        let n_f = fluid.nrows();
        let (fluid, _) = apply_dirichlet(&fluid, &vec![0.0; n_f], ops.velocity().dirichlet_dofs());

        Ok(Self {
            ops,
            params,
            grid,
            solid: Factorization::new(&solid)?,
            fluid: Factorization::new(&fluid)?,
        })
    }

    pub fn params(&self) -> PhysicalParams {
        self.params
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    /// Solid substeps over the window, driven by `state.iface`.
    pub fn solid_step(&self, state: &SplitState) -> Result<Vec<SolidSample>> {
        let ops = self.ops;
        let dt = self.grid.substep_dt();
        let lam = self.params.lambda;
        // lam G u_avg - traction_avg is constant over the window
        let mut robin = ops.trace_load(&state.iface.u_avg);
        for (r, t) in robin.iter_mut().zip(&state.iface.traction_avg) {
            *r = lam * *r - t;
        }
        let mut eta = state.eta.clone();
        let mut eta_dot = state.eta_dot.clone();
        let mut out = Vec::with_capacity(self.grid.substeps());
        for _ in 0..self.grid.substeps() {
            let mut rhs = ops.mass_s.mul_vec(&eta_dot);
            let ae = ops.elast.mul_vec(&eta);
            for (r, a) in rhs.iter_mut().zip(&ae) {
                *r = *r / dt - a;
            }
            ops.add_to_solid(&mut rhs, &robin, 1.0);
            zero_dofs(&mut rhs, ops.displacement().dirichlet_dofs());
            eta_dot = self.solid.solve(&rhs);
            for (e, v) in eta.iter_mut().zip(&eta_dot) {
                *e += dt * v;
            }
            out.push(SolidSample {
                eta: eta.clone(),
                eta_dot: eta_dot.clone(),
            });
        }
        Ok(out)
    }

    /// Fluid substeps over the window with the new solid velocity as Robin
    /// data.
    pub fn fluid_step(&self, state: &SplitState, solid: &[SolidSample]) -> Result<Vec<FluidSample>> {
        if solid.len() != self.grid.substeps() {
            return Err(FsiError::DimensionMismatch(format!(
                "{} solid samples for {} substeps",
                solid.len(),
                self.grid.substeps()
            )));
        }
        let ops = self.ops;
        let dt = self.grid.substep_dt();
        let lam = self.params.lambda;
        let nu = ops.velocity().dof_count();
        let np = ops.pressure().dof_count();
        let mut u = state.u.clone();
        let mut out = Vec::with_capacity(solid.len());
        for s in solid {
            let mut rhs = ops.mass_f.mul_vec(&u);
            rhs.iter_mut().for_each(|r| *r /= dt);
            let mut data = ops.trace_load(&ops.solid_trace(&s.eta_dot));
            for (d, t) in data.iter_mut().zip(&state.iface.traction_avg) {
                *d = lam * *d + t;
            }
            ops.add_to_fluid(&mut rhs, &data, 1.0);
            zero_dofs(&mut rhs, ops.velocity().dirichlet_dofs());
            rhs.resize(nu + np, 0.0);
            let x = self.fluid.solve(&rhs);
            u = x[..nu].to_vec();
            out.push(FluidSample {
                u: u.clone(),
                p: x[nu..].to_vec(),
            });
        }
        Ok(out)
    }

    /// Variational fluid traction implied by the discrete Robin condition:
    /// `lam G (eta_dot - u) + traction_avg` on the trace space.
    pub fn extract_fluid_traction(&self, u: &[f64], eta_dot: &[f64], iface: &InterfaceData) -> Vec<f64> {
        let ops = self.ops;
        let jump: Vec<f64> = ops
            .solid_trace(eta_dot)
            .iter()
            .zip(ops.fluid_trace(u))
            .map(|(a, b)| a - b)
            .collect();
        let mut r = ops.trace_load(&jump);
        for (x, t) in r.iter_mut().zip(&iface.traction_avg) {
            *x = self.params.lambda * *x + t;
        }
        r
    }

    pub fn advance(&self, state: &SplitState) -> Result<(SplitState, WindowRecord)> {
        let solid = self.solid_step(state)?;
        let fluid = self.fluid_step(state, &solid)?;
        let n = state.n;
        let samples: Vec<SubstepSample> = solid
            .into_iter()
            .zip(fluid)
            .enumerate()
            .map(|(j, (s, f))| SubstepSample {
                t: self.grid.substep_time(n, j + 1),
                traction: self.extract_fluid_traction(&f.u, &s.eta_dot, &state.iface),
                u: f.u,
                p: f.p,
                eta: s.eta,
                eta_dot: s.eta_dot,
            })
            .collect();
        let traces: Vec<Vec<f64>> = samples.iter().map(|s| self.ops.fluid_trace(&s.u)).collect();
        let tractions: Vec<Vec<f64>> = samples.iter().map(|s| s.traction.clone()).collect();
        let iface = update_interface_average(&traces, &tractions);
        let last = samples.last().expect("at least one substep");
        let next = SplitState {
            n: n + 1,
            t: self.grid.window_time(n + 1),
            u: last.u.clone(),
            p: last.p.clone(),
            eta: last.eta.clone(),
            eta_dot: last.eta_dot.clone(),
            iface,
        };
        let record = WindowRecord {
            n: n + 1,
            iface_in: state.iface.clone(),
            samples,
        };
        Ok((next, record))
    }

    pub fn initial_state(&self, init: &InitialState) -> Result<SplitState> {
        let ops = self.ops;
        init.check_sizes(ops)?;
        Ok(SplitState {
            n: 0,
            t: 0.0,
            u: init.u.clone(),
            p: init.p.clone(),
            eta: init.eta.clone(),
            eta_dot: init.eta_dot.clone(),
            iface: initial_interface_data(ops, init)?,
        })
    }

    /// Advance all `N` windows, filling the energy ledger as it goes.
    pub fn run(&self, init: &InitialState, record: bool) -> Result<SplitRun> {
        let ops = self.ops;
        let lam = self.params.lambda;
        let dt = self.grid.substep_dt();
        let initial = self.initial_state(init)?;
        let mut state = initial.clone();
        let traction = init.traction.as_ref().ok_or(FsiError::MissingInitialPressure)?;
        let e0 = ops.energy(&state.u, &state.eta_dot, &state.eta);
        let s0 = initial_s0(ops, lam, self.grid.dt(), &state.iface.u_avg, traction.norm_sq);
        let mut ledger = EnergyLedger::new(e0, s0);
        let mut windows = Vec::new();
        for _ in 0..self.grid.windows() {
            let (next, rec) = self.advance(&state)?;
            let e = ops.energy(&next.u, &next.eta_dot, &next.eta);
            let t = window_t(ops, lam, dt, &rec.samples, &rec.iface_in.u_avg);
            let s = window_s(ops, lam, dt, &rec.samples);
            ledger.push(next.t, e, t, s);
            if record {
                windows.push(rec);
            }
            state = next;
        }
        Ok(SplitRun {
            initial,
            state,
            ledger,
            windows,
        })
    }
}

/// Discretely divergence-free check helper: `|B u|_2`.
pub fn divergence_norm(div: &CsrMatrix, u: &[f64]) -> f64 {
    div.mul_vec(u).iter().map(|x| x * x).sum::<f64>().sqrt()
}
