//! Dense reference assembly built independently of the library kernels:
//! monomial Vandermonde bases in physical coordinates and collapsed
//! Gauss-Legendre rules of high order.

#![allow(dead_code)]

use std::sync::Arc;

use fsi_robin::fem::{
    assemble_divdiv, assemble_divergence, assemble_elasticity, assemble_interface_mass, assemble_symgrad,
    assemble_vector_mass, CsrMatrix, Space, SpaceKind,
};
use fsi_robin::mesh::{Cell, Facet, Point};
use fsi_robin::{build_two_layer_mesh, ChannelGeometry, FacetTag, Mesh, Subdomain};
use nalgebra::{DMatrix, DVector};

/// Gauss-Legendre nodes and weights on `[0, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            (0.5 * (1.0 - x), 0.5 * w)
        })
        .collect()
}

/// Points and weights on a physical triangle from the collapsed square.
pub fn triangle_rule(tri: [Point; 3], n: usize) -> Vec<(Point, f64)> {
    let g = gauss_legendre(n);
    let [a, b, c] = tri;
    let jac = ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs();
    let mut out = Vec::new();
    for &(u, wu) in &g {
        for &(v, wv) in &g {
            let (s, t) = (u, v * (1.0 - u));
            let p = [
                a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]),
                a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1]),
            ];
            out.push((p, wu * wv * (1.0 - u) * jac));
        }
    }
    out
}

fn monomials(degree: usize, p: Point) -> (Vec<f64>, Vec<[f64; 2]>) {
    let (x, y) = (p[0], p[1]);
    if degree == 1 {
        (vec![1.0, x, y], vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    } else {
        (
            vec![1.0, x, y, x * x, x * y, y * y],
            vec![
                [0.0, 0.0],
                [1.0, 0.0],
                [0.0, 1.0],
                [2.0 * x, 0.0],
                [y, x],
                [0.0, 2.0 * y],
            ],
        )
    }
}

/// Nodal basis of one cell: coefficients of each local function in the
/// monomial basis.
pub struct CellBasis {
    degree: usize,
    coef: DMatrix<f64>,
}

impl CellBasis {
    pub fn new(space: &Space, k: usize) -> Self {
        let degree = space.degree();
        let nodes: Vec<Point> = space.cell_nodes(k).iter().map(|&n| space.node_coords()[n]).collect();
        let nl = nodes.len();
        let mut v = DMatrix::zeros(nl, nl);
        for (i, p) in nodes.iter().enumerate() {
            for (j, m) in monomials(degree, *p).0.into_iter().enumerate() {
                v[(i, j)] = m;
            }
        }
        Self {
            degree,
            coef: v.try_inverse().expect("unisolvent nodes"),
        }
    }

    pub fn eval(&self, p: Point) -> (Vec<f64>, Vec<[f64; 2]>) {
        let (m, dm) = monomials(self.degree, p);
        let n = m.len();
        let vals = (0..n).map(|i| (0..n).map(|j| m[j] * self.coef[(j, i)]).sum()).collect();
        let grads = (0..n)
            .map(|i| {
                let mut g = [0.0; 2];
                for j in 0..n {
                    g[0] += dm[j][0] * self.coef[(j, i)];
                    g[1] += dm[j][1] * self.coef[(j, i)];
                }
                g
            })
            .collect();
        (vals, grads)
    }
}

pub const ORDER: usize = 8;

fn cell_triangle(space: &Space, k: usize) -> [Point; 3] {
    let mesh = space.mesh();
    mesh.cells()[space.cells()[k]].vertices.map(|v| mesh.vertices()[v])
}

/// Dense vector form `sum_q w * f(grad_i, grad_j, val_i, val_j)` over
/// components, with `f` evaluated per component pair.
fn vector_form(space: &Space, kernel: impl Fn([f64; 2], [f64; 2], usize, usize, f64, f64) -> f64) -> DMatrix<f64> {
    let n = space.dof_count();
    let mut a = DMatrix::zeros(n, n);
    for k in 0..space.cells().len() {
        let basis = CellBasis::new(space, k);
        let nodes = space.cell_nodes(k);
        for (p, w) in triangle_rule(cell_triangle(space, k), ORDER) {
            let (vals, grads) = basis.eval(p);
            for (i, &ni) in nodes.iter().enumerate() {
                for (j, &nj) in nodes.iter().enumerate() {
                    for ci in 0..2 {
                        for cj in 0..2 {
                            a[(2 * ni + ci, 2 * nj + cj)] += w * kernel(grads[i], grads[j], ci, cj, vals[i], vals[j]);
                        }
                    }
                }
            }
        }
    }
    a
}

/// `eps(phi e_c)` for a scalar gradient `g`.
fn eps(g: [f64; 2], c: usize) -> [[f64; 2]; 2] {
    let mut e = [[0.0; 2]; 2];
    for r in 0..2 {
        e[c][r] += 0.5 * g[r];
        e[r][c] += 0.5 * g[r];
    }
    e
}

fn contract(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

pub fn mass(space: &Space, rho: f64) -> DMatrix<f64> {
    vector_form(space, |_, _, ci, cj, vi, vj| if ci == cj { rho * vi * vj } else { 0.0 })
}

pub fn symgrad(space: &Space, mu: f64) -> DMatrix<f64> {
    vector_form(space, |gi, gj, ci, cj, _, _| 2.0 * mu * contract(eps(gj, cj), eps(gi, ci)))
}

pub fn divdiv(space: &Space, c: f64) -> DMatrix<f64> {
    vector_form(space, |gi, gj, ci, cj, _, _| c * gi[ci] * gj[cj])
}

pub fn elasticity(space: &Space, l1: f64, l2: f64) -> DMatrix<f64> {
    symgrad(space, l1) + divdiv(space, l2)
}

/// `B[q, v] = (q, div v)`.
pub fn divergence(vel: &Space, pres: &Space) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(pres.dof_count(), vel.dof_count());
    for k in 0..vel.cells().len() {
        assert_eq!(vel.cells()[k], pres.cells()[k]);
        let (bv, bp) = (CellBasis::new(vel, k), CellBasis::new(pres, k));
        for (p, w) in triangle_rule(cell_triangle(vel, k), ORDER) {
            let (_, grads) = bv.eval(p);
            let (qv, _) = bp.eval(p);
            for (i, &ni) in pres.cell_nodes(k).iter().enumerate() {
                for (j, &nj) in vel.cell_nodes(k).iter().enumerate() {
                    for c in 0..2 {
                        b[(ni, 2 * nj + c)] += w * qv[i] * grads[j][c];
                    }
                }
            }
        }
    }
    b
}

/// Interface mass on the full space, integrated along each interface facet
/// with the basis of the adjacent cell.
pub fn interface_mass(space: &Space) -> DMatrix<f64> {
    let mesh = space.mesh();
    let n = space.dof_count();
    let mut m = DMatrix::zeros(n, n);
    let g = gauss_legendre(ORDER);
    for f in mesh.facets().iter().filter(|f| f.tag == FacetTag::Interface) {
        let k = (0..space.cells().len())
            .find(|&k| {
                let v = mesh.cells()[space.cells()[k]].vertices;
                v.contains(&f.vertices[0]) && v.contains(&f.vertices[1])
            })
            .expect("adjacent cell");
        let basis = CellBasis::new(space, k);
        let [a, b] = f.vertices.map(|v| mesh.vertices()[v]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        for &(s, w) in &g {
            let p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            let (vals, _) = basis.eval(p);
            for (i, &ni) in space.cell_nodes(k).iter().enumerate() {
                for (j, &nj) in space.cell_nodes(k).iter().enumerate() {
                    for c in 0..2 {
                        m[(2 * ni + c, 2 * nj + c)] += w * len * vals[i] * vals[j];
                    }
                }
            }
        }
    }
    m
}

pub fn to_dense(m: &CsrMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, j, v) in m.iter() {
        d[(i, j)] += v;
    }
    d
}

pub fn dense_vec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// One fluid and one solid triangle sharing a skewed interface edge.
pub fn one_cell_mesh() -> Mesh {
    let vertices = vec![[0.1, 0.0], [1.2, 0.9], [0.0, 1.0], [0.7, 2.1]];
    let cells = vec![
        Cell {
            vertices: [0, 1, 2],
            subdomain: Subdomain::Fluid,
        },
        Cell {
            vertices: [2, 1, 3],
            subdomain: Subdomain::Solid,
        },
    ];
    let facets = vec![
        Facet {
            vertices: [0, 1],
            tag: FacetTag::SigmaF,
        },
        Facet {
            vertices: [2, 0],
            tag: FacetTag::SigmaF,
        },
        Facet {
            vertices: [1, 2],
            tag: FacetTag::Interface,
        },
        Facet {
            vertices: [1, 3],
            tag: FacetTag::SigmaS,
        },
        Facet {
            vertices: [3, 2],
            tag: FacetTag::SigmaS,
        },
    ];
    Mesh::from_parts(vertices, cells, facets, 1.0).unwrap()
}

pub fn two_by_two_mesh() -> Mesh {
    build_two_layer_mesh(ChannelGeometry::new(1.3, 0.8, 0.6).unwrap(), 2, 2, 2).unwrap()
}

/// Largest entrywise deviation of every assembled matrix from the oracle.
pub fn assembly_deviation(mesh: Mesh) -> Vec<(&'static str, f64)> {
    let mesh = Arc::new(mesh);
    let vel = Space::new(mesh.clone(), Subdomain::Fluid, SpaceKind::VectorP2).unwrap();
    let pres = Space::new(mesh.clone(), Subdomain::Fluid, SpaceKind::ScalarP1).unwrap();
    let disp = Space::new(mesh, Subdomain::Solid, SpaceKind::VectorP2).unwrap();
    let dev = |a: &CsrMatrix, b: DMatrix<f64>| (to_dense(a) - b).abs().max();
    vec![
        ("fluid mass", dev(&assemble_vector_mass(&vel, 1.7).unwrap(), mass(&vel, 1.7))),
        ("solid mass", dev(&assemble_vector_mass(&disp, 0.6).unwrap(), mass(&disp, 0.6))),
        ("viscous", dev(&assemble_symgrad(&vel, 0.3).unwrap(), symgrad(&vel, 0.3))),
        ("div-div", dev(&assemble_divdiv(&disp, 2.5).unwrap(), divdiv(&disp, 2.5))),
        ("elasticity", dev(&assemble_elasticity(&disp, 1.1, 0.4).unwrap(), elasticity(&disp, 1.1, 0.4))),
        ("divergence", dev(&assemble_divergence(&vel, &pres).unwrap(), divergence(&vel, &pres))),
        ("fluid interface mass", dev(&assemble_interface_mass(&vel).unwrap(), interface_mass(&vel))),
        ("solid interface mass", dev(&assemble_interface_mass(&disp).unwrap(), interface_mass(&disp))),
    ]
}
