//! Assembly of the bilinear forms used by the fluid and solid subproblems.
//!
//! Triangle integrals use the degree-4 rule and interface integrals the
//! 3-point Gauss rule; both are exact for products of P2 functions.

use crate::error::{FsiError, Result};
use crate::fem::basis;
use crate::fem::quadrature::{gauss3_unit, triangle_degree4};
use crate::fem::space::Space;
use crate::fem::sparse::{CsrMatrix, Triplets};
use crate::mesh::Mesh;

/// Affine map data of one triangle.
struct CellMap {
    area: f64,
    /// inverse transpose of the Jacobian, row-major
    jinv_t: [[f64; 2]; 2],
}

impl CellMap {
    fn new(mesh: &Mesh, cell: usize) -> Self {
        let [p0, p1, p2] = mesh.cells()[cell].vertices.map(|v| mesh.vertices()[v]);
        let j = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        // J^{-T} = 1/det [[j11, -j10], [-j01, j00]]
        let jinv_t = [
            [j[1][1] / det, -j[1][0] / det],
            [-j[0][1] / det, j[0][0] / det],
        ];
        Self {
            area: 0.5 * det,
            jinv_t,
        }
    }

    fn physical(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.jinv_t[0][0] * g[0] + self.jinv_t[0][1] * g[1],
            self.jinv_t[1][0] * g[0] + self.jinv_t[1][1] * g[1],
        ]
    }
}

fn require_vector(space: &Space, what: &str) -> Result<()> {
    if space.components() != 2 {
        return Err(FsiError::UnsupportedSpace(format!(
            "{what} needs a vector-valued space, got {:?}",
            space.kind()
        )));
    }
    Ok(())
}

fn require_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(FsiError::InvalidParameter {
            name,
            constraint: "> 0",
        })
    }
}

/// Generic vector-vector assembly. `kernel(w, grads, values, a, c, b, d)`
/// returns the integrand contribution for trial (node a, component c) and
/// test (node b, component d), already weighted by `w`.
fn assemble_vector_form<F>(space: &Space, mut kernel: F) -> CsrMatrix
where
    F: FnMut(f64, &[[f64; 2]], &[f64], usize, usize, usize, usize) -> f64,
{
    let mesh = space.mesh();
    let deg = space.degree();
    let ncomp = space.components();
    let nloc = basis::local_count(deg);
    let quad = triangle_degree4();
    let ref_vals: Vec<Vec<f64>> = quad.iter().map(|q| basis::values(deg, q.xi)).collect();
    let ref_grads: Vec<Vec<[f64; 2]>> = quad.iter().map(|q| basis::gradients(deg, q.xi)).collect();

    let mut trip = Triplets::new(space.dof_count(), space.dof_count());
    let mut local = vec![0.0; (nloc * ncomp) * (nloc * ncomp)];
    let nl = nloc * ncomp;
    for (k, &cell) in space.cells().iter().enumerate() {
        let map = CellMap::new(mesh, cell);
        local.iter_mut().for_each(|v| *v = 0.0);
        for (qi, q) in quad.iter().enumerate() {
            let w = q.weight * map.area;
            let grads: Vec<[f64; 2]> = ref_grads[qi].iter().map(|&g| map.physical(g)).collect();
            for b in 0..nloc {
                for d in 0..ncomp {
                    for a in 0..nloc {
                        for c in 0..ncomp {
                            local[(b * ncomp + d) * nl + a * ncomp + c] +=
                                kernel(w, &grads, &ref_vals[qi], a, c, b, d);
                        }
                    }
                }
            }
        }
        let nodes = space.cell_nodes(k);
        for b in 0..nloc {
            for d in 0..ncomp {
                for a in 0..nloc {
                    for c in 0..ncomp {
                        let v = local[(b * ncomp + d) * nl + a * ncomp + c];
                        trip.push(ncomp * nodes[b] + d, ncomp * nodes[a] + c, v);
                    }
                }
            }
        }
    }
    trip.into_csr()
}

/// `density * (phi_i, phi_j)` over the space's subdomain (componentwise for
/// vector spaces).
pub fn assemble_vector_mass(space: &Space, density: f64) -> Result<CsrMatrix> {
    require_positive("density", density)?;
    Ok(assemble_vector_form(space, |w, _, vals, a, c, b, d| {
        if c == d {
            density * w * (vals[a] * vals[b])
        } else {
            0.0
        }
    }))
}

/// `coeff * (2 eps(u), eps(v))`.
pub fn assemble_symgrad(space: &Space, coeff: f64) -> Result<CsrMatrix> {
    require_vector(space, "symmetric gradient")?;
    require_positive("coefficient", coeff)?;
    Ok(assemble_vector_form(space, |w, g, _, a, c, b, d| {
        // 2 eps(phi_a e_c) : eps(phi_b e_d) = delta_cd grad_a.grad_b + d_d phi_a d_c phi_b
        let mut v = g[a][d] * g[b][c];
        if c == d {
            v += g[a][0] * g[b][0] + g[a][1] * g[b][1];
        }
        coeff * w * v
    }))
}

/// `coeff * (div u, div v)`.
pub fn assemble_divdiv(space: &Space, coeff: f64) -> Result<CsrMatrix> {
    require_vector(space, "div-div form")?;
    if !(coeff >= 0.0 && coeff.is_finite()) {
        return Err(FsiError::InvalidParameter {
            name: "coefficient",
            constraint: ">= 0",
        });
    }
    Ok(assemble_vector_form(space, |w, g, _, a, c, b, d| {
        coeff * w * (g[a][c] * g[b][d])
    }))
}

/// Linear elasticity form `2 l1 (eps(u), eps(v)) + l2 (div u, div v)`; its
/// quadratic form is the squared solid energy norm.
pub fn assemble_elasticity(space: &Space, l1: f64, l2: f64) -> Result<CsrMatrix> {
    require_vector(space, "elasticity")?;
    if !(l1 > 0.0 && l1.is_finite()) {
        return Err(FsiError::InvalidParameter {
            name: "l1",
            constraint: "> 0",
        });
    }
    if !(l2 >= 0.0 && l2.is_finite()) {
        return Err(FsiError::InvalidParameter {
            name: "l2",
            constraint: ">= 0",
        });
    }
    Ok(assemble_vector_form(space, |w, g, _, a, c, b, d| {
        let mut v = l1 * (g[a][d] * g[b][c]) + l2 * (g[a][c] * g[b][d]);
        if c == d {
            v += l1 * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
        }
        w * v
    }))
}

/// `B[q, v] = (q, div v)`, rows indexed by pressure dofs.
pub fn assemble_divergence(vel: &Space, pres: &Space) -> Result<CsrMatrix> {
    require_vector(vel, "divergence velocity")?;
    if pres.components() != 1 {
        return Err(FsiError::UnsupportedSpace("pressure space must be scalar".into()));
    }
    if vel.subdomain() != pres.subdomain() || vel.cells() != pres.cells() {
        return Err(FsiError::UnsupportedSpace(
            "velocity and pressure spaces live on different subdomains".into(),
        ));
    }
    let mesh = vel.mesh();
    let (vdeg, pdeg) = (vel.degree(), pres.degree());
    let (nv, np) = (basis::local_count(vdeg), basis::local_count(pdeg));
    let quad = triangle_degree4();
    let mut trip = Triplets::new(pres.dof_count(), vel.dof_count());
    for (k, &cell) in vel.cells().iter().enumerate() {
        let map = CellMap::new(mesh, cell);
        let vnodes = vel.cell_nodes(k);
        let pnodes = pres.cell_nodes(k);
        let mut local = vec![0.0; np * nv * 2];
        for q in &quad {
            let w = q.weight * map.area;
            let pv = basis::values(pdeg, q.xi);
            let grads: Vec<[f64; 2]> = basis::gradients(vdeg, q.xi)
                .into_iter()
                .map(|g| map.physical(g))
                .collect();
            for i in 0..np {
                for a in 0..nv {
                    for c in 0..2 {
                        local[(i * nv + a) * 2 + c] += w * pv[i] * grads[a][c];
                    }
                }
            }
        }
        for i in 0..np {
            for a in 0..nv {
                for c in 0..2 {
                    trip.push(pnodes[i], 2 * vnodes[a] + c, local[(i * nv + a) * 2 + c]);
                }
            }
        }
    }
    Ok(trip.into_csr())
}

/// `(phi_i, phi_j)` on the interface, for every dof of the space (the wall
/// end points included).
pub fn assemble_interface_mass(space: &Space) -> Result<CsrMatrix> {
    let mesh = space.mesh();
    let deg = space.degree();
    let ncomp = space.components();
    let mut trip = Triplets::new(space.dof_count(), space.dof_count());
    for f in mesh.interface_facets() {
        let [a, b] = f.vertices;
        let mut nodes = vec![
            space.vertex_node(a).ok_or_else(|| missing_node(a))?,
            space.vertex_node(b).ok_or_else(|| missing_node(b))?,
        ];
        if deg == 2 {
            let e = mesh.edge_id(a, b).expect("interface edge");
            nodes.push(space.edge_node(e).ok_or_else(|| missing_node(e))?);
        }
        let n = nodes.len();
        let mut local = vec![0.0; n * n];
        for (s, w) in gauss3_unit() {
            let v = basis::edge_values(deg, s);
            for i in 0..n {
                for j in 0..n {
                    local[i * n + j] += w * f.length * v[i] * v[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for c in 0..ncomp {
                    trip.push(ncomp * nodes[i] + c, ncomp * nodes[j] + c, local[i * n + j]);
                }
            }
        }
    }
    Ok(trip.into_csr())
}

fn missing_node(id: usize) -> FsiError {
    FsiError::UnsupportedSpace(format!("interface entity {id} is not part of the space"))
}

/// Load vector `(g, phi_i)_Sigma` of an interface density `g(x)` (a vector
/// per point), using the 3-point rule on each interface edge.
pub fn assemble_interface_load(space: &Space, g: impl Fn([f64; 2]) -> [f64; 2]) -> Result<Vec<f64>> {
    require_vector(space, "interface load")?;
    let mesh = space.mesh();
    let deg = space.degree();
    let mut out = vec![0.0; space.dof_count()];
    for f in mesh.interface_facets() {
        let [a, b] = f.vertices;
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let mut nodes = vec![
            space.vertex_node(a).ok_or_else(|| missing_node(a))?,
            space.vertex_node(b).ok_or_else(|| missing_node(b))?,
        ];
        if deg == 2 {
            let e = mesh.edge_id(a, b).expect("interface edge");
            nodes.push(space.edge_node(e).ok_or_else(|| missing_node(e))?);
        }
        for (s, w) in gauss3_unit() {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            let gx = g(x);
            let v = basis::edge_values(deg, s);
            for (i, &node) in nodes.iter().enumerate() {
                for c in 0..2 {
                    out[2 * node + c] += w * f.length * v[i] * gx[c];
                }
            }
        }
    }
    Ok(out)
}

/// `sum over interface quadrature points of w |g(x)|^2`, the same rule used
/// by [`assemble_interface_load`].
pub fn interface_norm_sq(mesh: &Mesh, g: impl Fn([f64; 2]) -> [f64; 2]) -> f64 {
    let mut total = 0.0;
    for f in mesh.interface_facets() {
        let [pa, pb] = f.vertices.map(|v| mesh.vertices()[v]);
        for (s, w) in gauss3_unit() {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            let gx = g(x);
            total += w * f.length * (gx[0] * gx[0] + gx[1] * gx[1]);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::space::SpaceKind;
    use crate::mesh::{build_two_layer_mesh, ChannelGeometry, Subdomain};
    use std::sync::Arc;

    fn spaces(nx: usize) -> (Space, Space, Space) {
        let g = ChannelGeometry::new(1.0, 1.0, 1.0).unwrap();
        let m = Arc::new(build_two_layer_mesh(g, nx, nx, nx).unwrap());
        (
            Space::new(m.clone(), Subdomain::Fluid, SpaceKind::VectorP2).unwrap(),
            Space::new(m.clone(), Subdomain::Fluid, SpaceKind::ScalarP1).unwrap(),
            Space::new(m, Subdomain::Solid, SpaceKind::VectorP2).unwrap(),
        )
    }

    #[test]
    fn mass_of_constant_field() {
        let (v, _, _) = spaces(3);
        let m = assemble_vector_mass(&v, 2.5).unwrap();
        let ones = vec![1.0; v.dof_count()];
        assert!((m.quad_form(&ones) - 2.0 * 2.5).abs() < 1e-13);
        assert_eq!(m, m.transpose());
        assert!(assemble_vector_mass(&v, 0.0).is_err());
    }

    #[test]
    fn symgrad_rigid_kernel_and_stretch() {
        let (v, _, _) = spaces(3);
        let mu = 0.7;
        let k = assemble_symgrad(&v, mu).unwrap();
        let t = v.interpolate(|_| [1.0, -2.0]);
        assert!(k.mul_vec(&t).iter().all(|x| x.abs() < 1e-12));
        let r = v.interpolate(|p| [-p[1], p[0]]);
        assert!(k.quad_form(&r).abs() < 1e-12);
        let s = v.interpolate(|p| [p[0], 0.0]);
        assert!((k.quad_form(&s) - 2.0 * mu).abs() < 1e-12);
        let (_, p, _) = spaces(1);
        assert!(assemble_symgrad(&p, 1.0).is_err());
    }

    #[test]
    fn elasticity_is_sum_of_parts() {
        let (_, _, s) = spaces(2);
        let (l1, l2) = (1.3, 0.4);
        let a = assemble_elasticity(&s, l1, l2).unwrap();
        let sum = assemble_symgrad(&s, l1)
            .unwrap()
            .add_scaled(1.0, &assemble_divdiv(&s, l2).unwrap(), 1.0)
            .unwrap();
        assert!(a.max_abs_diff(&sum) < 1e-14);
        let w = s.interpolate(|p| [p[0], p[1]]);
        assert!((a.quad_form(&w) - (4.0 * l1 + 4.0 * l2)).abs() < 1e-12);
        assert!(assemble_elasticity(&s, 0.0, 1.0).is_err());
        assert!(assemble_elasticity(&s, 1.0, -1.0).is_err());
    }

    #[test]
    fn divergence_free_fields() {
        let (v, p, s) = spaces(3);
        let b = assemble_divergence(&v, &p).unwrap();
        assert_eq!((b.nrows(), b.ncols()), (p.dof_count(), v.dof_count()));
        for field in [v.interpolate(|_| [0.3, 1.0]), v.interpolate(|x| [x[0], -x[1]])] {
            assert!(b.mul_vec(&field).iter().all(|r| r.abs() < 1e-13));
        }
        let stretch = v.interpolate(|x| [x[0], 0.0]);
        let ones = vec![1.0; p.dof_count()];
        assert!((b.bilinear(&ones, &stretch) - 1.0).abs() < 1e-13);
        assert!(assemble_divergence(&s, &p).is_err());
    }

    #[test]
    fn interface_mass_constant_and_support() {
        let (v, _, _) = spaces(4);
        let g = assemble_interface_mass(&v).unwrap();
        let tangential = v.interpolate(|_| [1.0, 0.0]);
        assert!((g.quad_form(&tangential) - 1.0).abs() < 1e-14);
        let vanishing = v.interpolate(|x| [x[1] - 1.0, (1.0 - x[1]) * x[0]]);
        assert!(g.quad_form(&vanishing).abs() < 1e-15);
    }

    #[test]
    fn load_of_constant_density() {
        let (v, _, _) = spaces(2);
        let r = assemble_interface_load(&v, |_| [0.0, -3.0]).unwrap();
        let ones_y = v.interpolate(|_| [0.0, 1.0]);
        let total: f64 = r.iter().zip(&ones_y).map(|(a, b)| a * b).sum();
        assert!((total + 3.0).abs() < 1e-14);
        assert!((interface_norm_sq(v.mesh(), |_| [0.0, -3.0]) - 9.0).abs() < 1e-14);
    }
}
