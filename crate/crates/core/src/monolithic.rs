//! Monolithic backward Euler reference for the coupled problem and an
//! explicit Dirichlet-Neumann comparator.
//!
//! The coupled unknowns are the fluid velocity, the solid velocity (the
//! displacement is eliminated with `eta = eta_prev + dt * eta_dot`) and the
//! pressure. Fluid and solid interface dofs are one and the same unknown, so
//! velocity continuity holds exactly and traction balance holds weakly.

use crate::error::{FsiError, Result};
use crate::fem::{apply_dirichlet, saddle, CsrMatrix, Factorization, Triplets};
use crate::operators::FsiOperators;

#[derive(Debug, Clone, PartialEq)]
pub struct MonolithicState {
    pub t: f64,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta_dot: Vec<f64>,
}

impl MonolithicState {
    pub fn zeros(ops: &FsiOperators) -> Self {
        Self {
            t: 0.0,
            u: vec![0.0; ops.velocity().dof_count()],
            p: vec![0.0; ops.pressure().dof_count()],
            eta: vec![0.0; ops.displacement().dof_count()],
            eta_dot: vec![0.0; ops.displacement().dof_count()],
        }
    }

    pub fn energy(&self, ops: &FsiOperators) -> f64 {
        ops.energy(&self.u, &self.eta_dot, &self.eta)
    }
}

/// Global numbering of the coupled velocity: fluid dofs first, then the
/// solid dofs that are not on the interface.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledLayout {
    n_fluid: usize,
    n_velocity: usize,
    n_pressure: usize,
    solid_map: Vec<usize>,
    dirichlet: Vec<usize>,
}

impl CoupledLayout {
    pub fn new(ops: &FsiOperators) -> Result<Self> {
        let (vel, disp) = (ops.velocity(), ops.displacement());
        let (fi, si) = (vel.interface_nodes(), disp.interface_nodes());
        if fi.len() != si.len()
            || fi
                .iter()
                .zip(si)
                .any(|(&a, &b)| vel.node_coords()[a] != disp.node_coords()[b])
        {
            return Err(FsiError::IncompatibleGrids(
                "fluid and solid interface nodes do not match".into(),
            ));
        }
        let n_fluid = vel.dof_count();
        let mut solid_map = vec![usize::MAX; disp.dof_count()];
        for (&sd, &fd) in disp.interface_dofs().iter().zip(vel.interface_dofs()) {
            solid_map[sd] = fd;
        }
        let mut next = n_fluid;
        for slot in solid_map.iter_mut().filter(|s| **s == usize::MAX) {
            *slot = next;
            next += 1;
        }
        let mut dirichlet: Vec<usize> = vel.dirichlet_dofs().to_vec();
        dirichlet.extend(disp.dirichlet_dofs().iter().map(|&d| solid_map[d]));
        dirichlet.sort_unstable();
        Ok(Self {
            n_fluid,
            n_velocity: next,
            n_pressure: ops.pressure().dof_count(),
            solid_map,
            dirichlet,
        })
    }

    pub fn n_velocity(&self) -> usize {
        self.n_velocity
    }

    pub fn n_total(&self) -> usize {
        self.n_velocity + self.n_pressure
    }

    /// Solid dof to coupled index.
    pub fn solid_map(&self) -> &[usize] {
        &self.solid_map
    }

    /// Coupled velocity dofs on the walls.
    pub fn dirichlet(&self) -> &[usize] {
        &self.dirichlet
    }

    /// `[[F + S, -B^T], [-B, 0]]` with `F` acting on fluid and `S` on solid
    /// velocities; walls are not yet constrained.
    pub fn saddle_from_blocks(&self, ops: &FsiOperators, fluid: &CsrMatrix, solid: &CsrMatrix) -> Result<CsrMatrix> {
        let fluid_ids: Vec<usize> = (0..self.n_fluid).collect();
        let mut t = Triplets::new(self.n_velocity, self.n_velocity);
        t.add_mapped(fluid, &fluid_ids, &fluid_ids, 1.0);
        t.add_mapped(solid, &self.solid_map, &self.solid_map, 1.0);
        let b = CsrMatrix::from_triplets(
            self.n_pressure,
            self.n_velocity,
            ops.div.iter().collect(),
        );
        saddle(&t.into_csr(), &b)
    }

    /// Pack fluid and solid vectors into a coupled velocity vector, summing
    /// on shared dofs.
    pub fn gather_sum(&self, fluid: &[f64], solid: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_total()];
        out[..self.n_fluid].copy_from_slice(fluid);
        for (&g, &v) in self.solid_map.iter().zip(solid) {
            out[g] += v;
        }
        out
    }

    /// Split a coupled solution into fluid velocity, solid velocity and
    /// pressure.
    pub fn scatter(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let u = x[..self.n_fluid].to_vec();
        let v = self.solid_map.iter().map(|&g| x[g]).collect();
        (u, v, x[self.n_velocity..].to_vec())
    }

    fn solve_constrained(&self, a: &CsrMatrix, mut rhs: Vec<f64>) -> Result<Vec<f64>> {
        let (a, _) = apply_dirichlet(a, &vec![0.0; a.nrows()], &self.dirichlet);
        for &d in &self.dirichlet {
            rhs[d] = 0.0;
        }
        Ok(Factorization::new(&a)?.solve(&rhs))
    }
}

fn axpy_rows(out: &mut [f64], m: &CsrMatrix, x: &[f64], scale: f64) {
    for (o, v) in out.iter_mut().zip(m.mul_vec(x)) {
        *o += scale * v;
    }
}

/// Fluid residual `M_f (u - u_prev)/dt + K u - B^T p` on the interface rows:
/// the load vector of the fluid traction.
pub fn fluid_flux(ops: &FsiOperators, u: &[f64], u_prev: &[f64], p: &[f64], dt: f64) -> Vec<f64> {
    let du: Vec<f64> = u.iter().zip(u_prev).map(|(a, b)| (a - b) / dt).collect();
    let mut r = ops.mass_f.mul_vec(&du);
    axpy_rows(&mut r, &ops.visc, u, 1.0);
    let bt = ops.div.transpose();
    axpy_rows(&mut r, &bt, p, -1.0);
    ops.fluid_trace(&r)
}

/// Solid residual `M_s (v - v_prev)/dt + A eta` on the interface rows.
pub fn solid_flux(ops: &FsiOperators, eta: &[f64], v: &[f64], v_prev: &[f64], dt: f64) -> Vec<f64> {
    let dv: Vec<f64> = v.iter().zip(v_prev).map(|(a, b)| (a - b) / dt).collect();
    let mut r = ops.mass_s.mul_vec(&dv);
    axpy_rows(&mut r, &ops.elast, eta, 1.0);
    ops.solid_trace(&r)
}

/// Backward Euler system for one step size.
pub struct CoupledSystem {
    layout: CoupledLayout,
    dt: f64,
    matrix: CsrMatrix,
    fact: Factorization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub state: MonolithicState,
    pub fluid_flux: Vec<f64>,
    pub solid_flux: Vec<f64>,
}

pub fn assemble_coupled(ops: &FsiOperators, dt: f64) -> Result<CoupledSystem> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(FsiError::InvalidParameter {
            name: "dt",
            constraint: "> 0",
        });
    }
    let layout = CoupledLayout::new(ops)?;
    let fluid = ops.mass_f.add_scaled(1.0 / dt, &ops.visc, 1.0)?;
    let solid = ops.mass_s.add_scaled(1.0 / dt, &ops.elast, dt)?;
    let full = layout.saddle_from_blocks(ops, &fluid, &solid)?;
    let (matrix, _) = apply_dirichlet(&full, &vec![0.0; full.nrows()], layout.dirichlet());
    let fact = Factorization::new(&matrix)?;
    Ok(CoupledSystem {
        layout,
        dt,
        matrix,
        fact,
    })
}

impl CoupledSystem {
    pub fn layout(&self) -> &CoupledLayout {
        &self.layout
    }

    /// Coupled matrix with the wall constraints applied.
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, ops: &FsiOperators, state: &MonolithicState) -> Result<StepOutput> {
        let dt = self.dt;
        let fluid_rhs: Vec<f64> = ops.mass_f.mul_vec(&state.u).iter().map(|x| x / dt).collect();
        let mut solid_rhs: Vec<f64> = ops.mass_s.mul_vec(&state.eta_dot).iter().map(|x| x / dt).collect();
        axpy_rows(&mut solid_rhs, &ops.elast, &state.eta, -1.0);
        let mut rhs = self.layout.gather_sum(&fluid_rhs, &solid_rhs);
        for &d in self.layout.dirichlet() {
            rhs[d] = 0.0;
        }
        let x = self.fact.solve(&rhs);
        let (u, v, p) = self.layout.scatter(&x);
        let eta: Vec<f64> = state.eta.iter().zip(&v).map(|(e, w)| e + dt * w).collect();
        let fluid_flux = fluid_flux(ops, &u, &state.u, &p, dt);
        let solid_flux = solid_flux(ops, &eta, &v, &state.eta_dot, dt);
        Ok(StepOutput {
            state: MonolithicState {
                t: state.t + dt,
                u,
                p,
                eta,
                eta_dot: v,
            },
            fluid_flux,
            solid_flux,
        })
    }
}

/// Mass-weighted projection of a (fluid, solid) velocity pair onto
/// discretely divergence-free, interface-continuous fields that vanish on
/// the walls.
pub fn project_coupled(ops: &FsiOperators, u_target: &[f64], v_target: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let layout = CoupledLayout::new(ops)?;
    let a = layout.saddle_from_blocks(ops, &ops.mass_f, &ops.mass_s)?;
    let rhs = layout.gather_sum(&ops.mass_f.mul_vec(u_target), &ops.mass_s.mul_vec(v_target));
    let x = layout.solve_constrained(&a, rhs)?;
    let (u, v, _) = layout.scatter(&x);
    Ok((u, v))
}

/// Pressure and fluid traction consistent with a compatible state, from the
/// instantaneous acceleration problem.
pub fn initial_pressure_and_flux(ops: &FsiOperators, u: &[f64], eta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let layout = CoupledLayout::new(ops)?;
    let a = layout.saddle_from_blocks(ops, &ops.mass_f, &ops.mass_s)?;
    let fluid: Vec<f64> = ops.visc.mul_vec(u).iter().map(|x| -x).collect();
    let solid: Vec<f64> = ops.elast.mul_vec(eta).iter().map(|x| -x).collect();
    let x = layout.solve_constrained(&a, layout.gather_sum(&fluid, &solid))?;
    let (acc, _, p) = layout.scatter(&x);
    let mut r = ops.mass_f.mul_vec(&acc);
    axpy_rows(&mut r, &ops.visc, u, 1.0);
    axpy_rows(&mut r, &ops.div.transpose(), &p, -1.0);
    Ok((p, ops.fluid_trace(&r)))
}

/// Reference trajectory on a fine uniform grid: full snapshots every
/// `stride` steps, interface traces and fluid fluxes at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectory {
    dt: f64,
    steps: usize,
    stride: usize,
    snapshots: Vec<MonolithicState>,
    traces: Vec<Vec<f64>>,
    fluxes: Vec<Vec<f64>>,
}

impl ReferenceTrajectory {
    /// Assemble a trajectory from stored data: `traces` and `fluxes` hold
    /// `steps + 1` entries, `snapshots` one per `stride` steps from step 0.
    pub fn from_parts(
        dt: f64,
        stride: usize,
        snapshots: Vec<MonolithicState>,
        traces: Vec<Vec<f64>>,
        fluxes: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if traces.is_empty() || traces.len() != fluxes.len() {
            return Err(FsiError::DimensionMismatch(
                "traces and fluxes must be non-empty and of equal length".into(),
            ));
        }
        let steps = traces.len() - 1;
        if stride == 0 || !steps.is_multiple_of(stride) || snapshots.len() != steps / stride + 1 {
            return Err(FsiError::DimensionMismatch(format!(
                "{} snapshots do not fit {steps} steps with stride {stride}",
                snapshots.len()
            )));
        }
        Ok(Self {
            dt,
            steps,
            stride,
            snapshots,
            traces,
            fluxes,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn snapshot(&self, step: usize) -> Option<&MonolithicState> {
        if !step.is_multiple_of(self.stride) {
            return None;
        }
        self.snapshots.get(step / self.stride)
    }

    pub fn final_state(&self) -> &MonolithicState {
        self.snapshots.last().expect("initial snapshot")
    }

    /// Velocity trace after `step` steps.
    pub fn trace(&self, step: usize) -> &[f64] {
        &self.traces[step]
    }

    /// Fluid traction load vector after `step` steps (initial traction at 0).
    pub fn flux(&self, step: usize) -> &[f64] {
        &self.fluxes[step]
    }
}

/// Run `steps` backward Euler steps of size `dt` from `init`, whose fluid
/// traction is `flux0`.
pub fn run_reference(
    ops: &FsiOperators,
    init: &MonolithicState,
    flux0: &[f64],
    dt: f64,
    steps: usize,
    stride: usize,
) -> Result<ReferenceTrajectory> {
    if stride == 0 || !steps.is_multiple_of(stride) {
        return Err(FsiError::InvalidParameter {
            name: "stride",
            constraint: "a positive divisor of the step count",
        });
    }
    let sys = assemble_coupled(ops, dt)?;
    let mut state = init.clone();
    let mut snapshots = vec![state.clone()];
    let mut traces = vec![ops.fluid_trace(&state.u)];
    let mut fluxes = vec![flux0.to_vec()];
    for k in 1..=steps {
        let out = sys.step(ops, &state)?;
        state = out.state;
        traces.push(ops.fluid_trace(&state.u));
        fluxes.push(out.fluid_flux);
        if k % stride == 0 {
            snapshots.push(state.clone());
        }
    }
    Ok(ReferenceTrajectory {
        dt,
        steps,
        stride,
        snapshots,
        traces,
        fluxes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DnState {
    pub state: MonolithicState,
    /// fluid traction load vector of the last fluid solve
    pub flux: Vec<f64>,
}

/// Explicit Dirichlet-Neumann staggering: the solid takes the previous
/// fluid traction, the fluid takes the new solid velocity as Dirichlet data.
///
/// The fluid is then enclosed by Dirichlet boundaries, so the interface data
/// is made flux-free before it is imposed and one pressure dof is pinned.
pub struct DirichletNeumann<'a> {
    ops: &'a FsiOperators,
    dt: f64,
    solid: Factorization,
    fluid_matrix: CsrMatrix,
    fluid: Factorization,
    fixed: Vec<usize>,
    normal_flux: Vec<f64>,
}

impl<'a> DirichletNeumann<'a> {
    pub fn new(ops: &'a FsiOperators, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(FsiError::InvalidParameter {
                name: "dt",
                constraint: "> 0",
            });
        }
        let solid = ops.mass_s.add_scaled(1.0 / dt, &ops.elast, dt)?;
        let (solid, _) = apply_dirichlet(&solid, &vec![0.0; solid.nrows()], ops.displacement().dirichlet_dofs());
        let fluid_matrix = saddle(&ops.mass_f.add_scaled(1.0 / dt, &ops.visc, 1.0)?, &ops.div)?;
        let nu = ops.velocity().dof_count();
        let mut fixed: Vec<usize> = ops.velocity().dirichlet_dofs().to_vec();
        fixed.extend_from_slice(ops.velocity().interface_dofs());
        fixed.push(nu);
        fixed.sort_unstable();
        let (constrained, _) = apply_dirichlet(&fluid_matrix, &vec![0.0; fluid_matrix.nrows()], &fixed);
        let ones = vec![1.0; ops.pressure().dof_count()];
        let normal_flux = ops.fluid_trace(&ops.div.transpose().mul_vec(&ones));
        Ok(Self {
            ops,
            dt,
            solid: Factorization::new(&solid)?,
            fluid: Factorization::new(&constrained)?,
            fluid_matrix,
            fixed,
            normal_flux,
        })
    }

    pub fn step(&self, s: &DnState) -> Result<DnState> {
        let (ops, dt) = (self.ops, self.dt);
        let prev = &s.state;

        let mut rhs: Vec<f64> = ops.mass_s.mul_vec(&prev.eta_dot).iter().map(|x| x / dt).collect();
        axpy_rows(&mut rhs, &ops.elast, &prev.eta, -1.0);
        ops.add_to_solid(&mut rhs, &s.flux, -1.0);
        for &d in ops.displacement().dirichlet_dofs() {
            rhs[d] = 0.0;
        }
        let eta_dot = self.solid.solve(&rhs);
        let eta: Vec<f64> = prev.eta.iter().zip(&eta_dot).map(|(e, v)| e + dt * v).collect();

        let mut g = ops.solid_trace(&eta_dot);
        let c = &self.normal_flux;
        let cg: f64 = c.iter().zip(&g).map(|(a, b)| a * b).sum();
        let cc: f64 = c.iter().map(|a| a * a).sum();
        for (gi, ci) in g.iter_mut().zip(c) {
            *gi -= cg / cc * ci;
        }
        let nu = ops.velocity().dof_count();
        let mut lift = vec![0.0; self.fluid_matrix.nrows()];
        for (&d, &v) in ops.velocity().interface_dofs().iter().zip(&g) {
            lift[d] = v;
        }
        let mut rhs: Vec<f64> = ops.mass_f.mul_vec(&prev.u).iter().map(|x| x / dt).collect();
        rhs.resize(self.fluid_matrix.nrows(), 0.0);
        axpy_rows(&mut rhs, &self.fluid_matrix, &lift, -1.0);
        for &d in &self.fixed {
            rhs[d] = 0.0;
        }
        let mut x = self.fluid.solve(&rhs);
        for (xi, l) in x.iter_mut().zip(&lift) {
            *xi += l;
        }
        let u = x[..nu].to_vec();
        let p = x[nu..].to_vec();
        let flux = fluid_flux(ops, &u, &prev.u, &p, dt);
        Ok(DnState {
            state: MonolithicState {
                t: prev.t + dt,
                u,
                p,
                eta,
                eta_dot,
            },
            flux,
        })
    }
}
