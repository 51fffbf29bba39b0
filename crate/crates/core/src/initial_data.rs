//! Initial states for the experiments.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FsiError, Result};
use crate::fem::{apply_dirichlet, assemble_interface_load, interface_norm_sq, saddle, Factorization};
use crate::mesh::Point;
use crate::monolithic::{initial_pressure_and_flux, project_coupled, MonolithicState};
use crate::operators::FsiOperators;

/// Fluid traction at `t_0` as a load vector on the trace space, together
/// with the squared norm used for the initial interface stock.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialTraction {
    pub load: Vec<f64>,
    pub norm_sq: f64,
}

impl InitialTraction {
    /// From a pointwise traction `sigma n`; the norm is the quadrature
    /// norm of the density, which bounds the dual norm of the load.
    pub fn from_stress(ops: &FsiOperators, sigma_n: impl Fn(Point) -> [f64; 2]) -> Result<Self> {
        let full = assemble_interface_load(ops.velocity(), &sigma_n)?;
        Ok(Self {
            load: ops.fluid_trace(&full),
            norm_sq: interface_norm_sq(ops.mesh(), sigma_n),
        })
    }

    /// From a load vector; the norm is its dual norm.
    pub fn from_load(ops: &FsiOperators, load: Vec<f64>) -> Self {
        let norm_sq = ops.load_norm_sq(&load);
        Self { load, norm_sq }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            load: vec![0.0; len],
            norm_sq: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta_dot: Vec<f64>,
    /// `None` when the initial stress is unknown; the splitting refuses to
    /// start from such a state.
    pub traction: Option<InitialTraction>,
}

impl InitialState {
    pub fn zeros(ops: &FsiOperators) -> Self {
        let s = MonolithicState::zeros(ops);
        Self {
            u: s.u,
            p: s.p,
            eta: s.eta,
            eta_dot: s.eta_dot,
            traction: Some(InitialTraction::zeros(ops.trace_len())),
        }
    }

    pub fn check_sizes(&self, ops: &FsiOperators) -> Result<()> {
        let checks = [
            ("u", self.u.len(), ops.velocity().dof_count()),
            ("p", self.p.len(), ops.pressure().dof_count()),
            ("eta", self.eta.len(), ops.displacement().dof_count()),
            ("eta_dot", self.eta_dot.len(), ops.displacement().dof_count()),
        ];
        for (name, got, want) in checks {
            if got != want {
                return Err(FsiError::DimensionMismatch(format!(
                    "{name} has {got} entries, expected {want}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_monolithic(&self) -> MonolithicState {
        MonolithicState {
            t: 0.0,
            u: self.u.clone(),
            p: self.p.clone(),
            eta: self.eta.clone(),
            eta_dot: self.eta_dot.clone(),
        }
    }
}

/// Fluid and solid at rest, driven by a Gaussian pressure bump
/// `a exp(-(x - L/2)^2 / w^2)` on the interface.
pub fn pressure_pulse(ops: &FsiOperators, amplitude: f64, width: f64) -> Result<InitialState> {
    if !amplitude.is_finite() {
        return Err(FsiError::InvalidParameter {
            name: "amplitude",
            constraint: "finite",
        });
    }
    if !(width > 0.0) {
        return Err(FsiError::InvalidParameter {
            name: "width",
            constraint: "> 0",
        });
    }
    let mid = 0.5 * ops.geometry().length;
    let p0 = move |x: f64| amplitude * (-(x - mid).powi(2) / (width * width)).exp();
    let mut init = InitialState::zeros(ops);
    init.p = ops.pressure().interpolate_scalar(|p| p0(p[0]));
    // sigma n = -p n with n = (0, 1) on the fluid side
    init.traction = Some(InitialTraction::from_stress(ops, |p| [0.0, -p0(p[0])])?);
    Ok(init)
}

/// Smooth, compatible data: a stream-function flow in the fluid continued
/// into the solid, projected onto divergence-free interface-continuous
/// fields. The pressure and traction come from the acceleration problem.
pub fn smooth_coupled_mode(ops: &FsiOperators) -> Result<InitialState> {
    let g = ops.geometry();
    let (l, hf, hs) = (g.length, g.fluid_height, g.solid_height);
    let f = move |x: f64| (PI * x / l).sin().powi(2);
    let df = move |x: f64| PI / l * (2.0 * PI * x / l).sin();
    let u_target = ops.velocity().interpolate(|p| {
        let s = p[1] / hf;
        [f(p[0]) * 2.0 * s / hf, -df(p[0]) * s * s]
    });
    let v_target = ops.displacement().interpolate(|p| {
        let s = (p[1] - hf) / hs;
        let w = (1.0 - s).powi(2);
        [w * f(p[0]) * 2.0 / hf, -w * df(p[0])]
    });
    let (u, eta_dot) = project_coupled(ops, &u_target, &v_target)?;
    let eta = vec![0.0; ops.displacement().dof_count()];
    let (p, flux) = initial_pressure_and_flux(ops, &u, &eta)?;
    Ok(InitialState {
        u,
        p,
        eta,
        eta_dot,
        traction: Some(InitialTraction::from_load(ops, flux)),
    })
}

/// Random data: a divergence-free random fluid velocity, independent random
/// solid displacement and velocity, and a random initial traction.
pub fn random_state(ops: &FsiOperators, seed: u64) -> Result<InitialState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let nu = ops.velocity().dof_count();
    let ns = ops.displacement().dof_count();
    let u_target = draw(nu);
    let mut eta = draw(ns);
    let mut eta_dot = draw(ns);
    let t = draw(ops.trace_len());
    for &d in ops.displacement().dirichlet_dofs() {
        eta[d] = 0.0;
        eta_dot[d] = 0.0;
    }

    let a = saddle(&ops.mass_f, &ops.div)?;
    let mut rhs = ops.mass_f.mul_vec(&u_target);
    rhs.resize(a.nrows(), 0.0);
    let (a, rhs) = apply_dirichlet(&a, &rhs, ops.velocity().dirichlet_dofs());
    let x = Factorization::new(&a)?.solve(&rhs);

    Ok(InitialState {
        u: x[..nu].to_vec(),
        p: vec![0.0; ops.pressure().dof_count()],
        eta,
        eta_dot,
        traction: Some(InitialTraction::from_load(ops, ops.trace_load(&t))),
    })
}
