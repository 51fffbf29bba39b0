//! Assembled operators of the coupled problem on one mesh, plus the interface
//! trace space shared by the fluid and the solid.
//!
//! Trace vectors (velocities on the interface) and load vectors (tractions
//! tested against interface basis functions) both live on the free interface
//! dofs, in the canonical ordering of [`Space::interface_dofs`].

use std::sync::Arc;

use crate::error::{FsiError, Result};
use crate::fem::{
    assemble_divergence, assemble_elasticity, assemble_interface_mass, assemble_symgrad,
    assemble_vector_mass, CsrMatrix, Factorization, Space, SpaceKind,
};
use crate::mesh::{build_two_layer_mesh, ChannelGeometry, Mesh, Subdomain};

/// Coefficients of the model. The Robin weight is kept separate because it
/// only enters the splitting scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub rho_f: f64,
    pub rho_s: f64,
    pub mu: f64,
    pub l1: f64,
    pub l2: f64,
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho_f", self.rho_f),
            ("rho_s", self.rho_s),
            ("mu", self.mu),
            ("l1", self.l1),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(FsiError::InvalidParameter {
                    name,
                    constraint: "> 0",
                });
            }
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(FsiError::InvalidParameter {
                name: "l2",
                constraint: ">= 0",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FsiOperators {
    geometry: ChannelGeometry,
    material: MaterialParams,
    mesh: Arc<Mesh>,
    velocity: Space,
    pressure: Space,
    displacement: Space,
    /// `rho_f * M`
    pub mass_f: CsrMatrix,
    /// `mu * (2 eps, eps)`; `u^T K u = 2 mu |eps(u)|^2`
    pub visc: CsrMatrix,
    /// `(q, div v)`
    pub div: CsrMatrix,
    /// `rho_s * M`
    pub mass_s: CsrMatrix,
    /// solid energy form
    pub elast: CsrMatrix,
    /// interface mass on the full fluid space
    pub iface_f: CsrMatrix,
    /// interface mass on the full solid space
    pub iface_s: CsrMatrix,
    /// interface mass on the trace space
    pub trace_mass: CsrMatrix,
    trace_fact: Factorization,
}

impl FsiOperators {
    pub fn new(
        geometry: ChannelGeometry,
        nx: usize,
        ny_f: usize,
        ny_s: usize,
        material: MaterialParams,
    ) -> Result<Self> {
        let mesh = Arc::new(build_two_layer_mesh(geometry, nx, ny_f, ny_s)?);
        Self::from_mesh(geometry, mesh, material)
    }

    pub fn from_mesh(geometry: ChannelGeometry, mesh: Arc<Mesh>, material: MaterialParams) -> Result<Self> {
        material.validate()?;
        let velocity = Space::new(mesh.clone(), Subdomain::Fluid, SpaceKind::VectorP2)?;
        let pressure = Space::new(mesh.clone(), Subdomain::Fluid, SpaceKind::ScalarP1)?;
        let displacement = Space::new(mesh.clone(), Subdomain::Solid, SpaceKind::VectorP2)?;
        if velocity.interface_dofs().len() != displacement.interface_dofs().len() {
            return Err(FsiError::IncompatibleGrids(
                "fluid and solid interface traces differ in size".into(),
            ));
        }
        let iface_f = assemble_interface_mass(&velocity)?;
        let iface_s = assemble_interface_mass(&displacement)?;
        let trace_mass = iface_f.submatrix(velocity.interface_dofs(), velocity.interface_dofs());
        let trace_fact = Factorization::new(&trace_mass)?;
        Ok(Self {
            geometry,
            material,
            mass_f: assemble_vector_mass(&velocity, material.rho_f)?,
            visc: assemble_symgrad(&velocity, material.mu)?,
            div: assemble_divergence(&velocity, &pressure)?,
            mass_s: assemble_vector_mass(&displacement, material.rho_s)?,
            elast: assemble_elasticity(&displacement, material.l1, material.l2)?,
            iface_f,
            iface_s,
            trace_mass,
            trace_fact,
            mesh,
            velocity,
            pressure,
            displacement,
        })
    }

    pub fn geometry(&self) -> ChannelGeometry {
        self.geometry
    }

    pub fn material(&self) -> MaterialParams {
        self.material
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn velocity(&self) -> &Space {
        &self.velocity
    }

    pub fn pressure(&self) -> &Space {
        &self.pressure
    }

    pub fn displacement(&self) -> &Space {
        &self.displacement
    }

    pub fn trace_len(&self) -> usize {
        self.velocity.interface_dofs().len()
    }

    pub fn fluid_trace(&self, u: &[f64]) -> Vec<f64> {
        self.velocity.interface_dofs().iter().map(|&d| u[d]).collect()
    }

    pub fn solid_trace(&self, v: &[f64]) -> Vec<f64> {
        self.displacement.interface_dofs().iter().map(|&d| v[d]).collect()
    }

    /// `out[iface] += scale * t`
    pub fn add_to_fluid(&self, out: &mut [f64], t: &[f64], scale: f64) {
        for (&d, &v) in self.velocity.interface_dofs().iter().zip(t) {
            out[d] += scale * v;
        }
    }

    pub fn add_to_solid(&self, out: &mut [f64], t: &[f64], scale: f64) {
        for (&d, &v) in self.displacement.interface_dofs().iter().zip(t) {
            out[d] += scale * v;
        }
    }

    /// `G t`: trace vector to load vector.
    pub fn trace_load(&self, t: &[f64]) -> Vec<f64> {
        self.trace_mass.mul_vec(t)
    }

    /// `t^T G t`, the squared L2 norm of a trace on the interface.
    pub fn trace_norm_sq(&self, t: &[f64]) -> f64 {
        self.trace_mass.quad_form(t)
    }

    /// `G^{-1} r`: load vector to its Riesz representative.
    pub fn riesz(&self, r: &[f64]) -> Vec<f64> {
        self.trace_fact.solve(r)
    }

    /// `r^T G^{-1} r`, the squared dual norm of a load vector.
    pub fn load_norm_sq(&self, r: &[f64]) -> f64 {
        let z = self.riesz(r);
        r.iter().zip(&z).map(|(a, b)| a * b).sum()
    }

    /// `rho_f/2 |u|^2 + rho_s/2 |eta_dot|^2 + 1/2 |eta|_S^2`
    pub fn energy(&self, u: &[f64], eta_dot: &[f64], eta: &[f64]) -> f64 {
        0.5 * (self.mass_f.quad_form(u) + self.mass_s.quad_form(eta_dot) + self.elast.quad_form(eta))
    }
}
