//! Two-layer channel meshes: fluid below, solid on top, sharing a straight
//! interface at `y = fluid_height`.

use std::collections::HashMap;
use std::io::{self, Write};

use crate::error::{FsiError, Result};

pub type Point = [f64; 2];

/// Rectangular channel: fluid in `[0,L]x[0,H_f]`, solid in `[0,L]x[H_f,H_f+H_s]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelGeometry {
    pub length: f64,
    pub fluid_height: f64,
    pub solid_height: f64,
}

impl ChannelGeometry {
    pub fn new(length: f64, fluid_height: f64, solid_height: f64) -> Result<Self> {
        let geom = Self {
            length,
            fluid_height,
            solid_height,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("L", self.length),
            ("H_f", self.fluid_height),
            ("H_s", self.solid_height),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(FsiError::InvalidGeometry(format!(
                    "{name} must be a positive finite number, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// y-coordinate of the interface.
    pub fn interface_y(&self) -> f64 {
        self.fluid_height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subdomain {
    Fluid,
    Solid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FacetTag {
    /// Fluid boundary away from the interface (no-slip).
    SigmaF,
    /// Solid boundary away from the interface (clamped).
    SigmaS,
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub vertices: [usize; 3],
    pub subdomain: Subdomain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    pub vertices: [usize; 2],
    pub tag: FacetTag,
}

/// An interface edge together with the outward normals of both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceFacet {
    pub vertices: [usize; 2],
    pub length: f64,
    pub fluid_normal: Point,
    pub solid_normal: Point,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<Cell>,
    facets: Vec<Facet>,
    edges: Vec<[usize; 2]>,
    /// Per cell: edges opposite to local vertex 0, 1, 2.
    cell_edges: Vec<[usize; 3]>,
    edge_index: HashMap<[usize; 2], usize>,
    nominal_h: f64,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Structured two-layer mesh. Each rectangle is split along one diagonal; the
/// diagonal direction flips at `x = L/2` so that both bottom corners of the
/// fluid lie on a diagonal (no fluid triangle has all vertices on the wall).
pub fn build_two_layer_mesh(
    geom: ChannelGeometry,
    nx: usize,
    ny_f: usize,
    ny_s: usize,
) -> Result<Mesh> {
    geom.validate()?;
    if nx == 0 || ny_f == 0 || ny_s == 0 {
        return Err(FsiError::InvalidGeometry(format!(
            "cell counts must be >= 1, got nx={nx}, ny_f={ny_f}, ny_s={ny_s}"
        )));
    }
    let ny = ny_f + ny_s;
    let xs: Vec<f64> = (0..=nx)
        .map(|i| {
            if i == nx {
                geom.length
            } else {
                geom.length * i as f64 / nx as f64
            }
        })
        .collect();
    let ys: Vec<f64> = (0..=ny)
        .map(|j| {
            if j < ny_f {
                geom.fluid_height * j as f64 / ny_f as f64
            } else if j == ny_f {
                geom.fluid_height
            } else if j == ny {
                geom.fluid_height + geom.solid_height
            } else {
                geom.fluid_height + geom.solid_height * (j - ny_f) as f64 / ny_s as f64
            }
        })
        .collect();

    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for &y in &ys {
        for &x in &xs {
            vertices.push([x, y]);
        }
    }

    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        let subdomain = if j < ny_f {
            Subdomain::Fluid
        } else {
            Subdomain::Solid
        };
        for i in 0..nx {
            let (v00, v10, v01, v11) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
            let tris = if 2 * i < nx {
                [[v00, v10, v11], [v00, v11, v01]]
            } else {
                [[v00, v10, v01], [v10, v11, v01]]
            };
            for t in tris {
                cells.push(Cell {
                    vertices: t,
                    subdomain,
                });
            }
        }
    }

    let mut facets = Vec::new();
    for i in 0..nx {
        facets.push(Facet {
            vertices: [vid(i, 0), vid(i + 1, 0)],
            tag: FacetTag::SigmaF,
        });
    }
    for j in 0..ny {
        let tag = if j < ny_f {
            FacetTag::SigmaF
        } else {
            FacetTag::SigmaS
        };
        facets.push(Facet {
            vertices: [vid(0, j), vid(0, j + 1)],
            tag,
        });
        facets.push(Facet {
            vertices: [vid(nx, j), vid(nx, j + 1)],
            tag,
        });
    }
    for i in 0..nx {
        facets.push(Facet {
            vertices: [vid(i, ny), vid(i + 1, ny)],
            tag: FacetTag::SigmaS,
        });
    }
    for i in 0..nx {
        facets.push(Facet {
            vertices: [vid(i, ny_f), vid(i + 1, ny_f)],
            tag: FacetTag::Interface,
        });
    }

    let h = (geom.length / nx as f64)
        .min(geom.fluid_height / ny_f as f64)
        .min(geom.solid_height / ny_s as f64);
    Mesh::from_parts(vertices, cells, facets, h)
}

impl Mesh {
    /// Assemble a mesh from raw parts and derive the edge numbering. Cells must
    /// be counter-clockwise.
    pub fn from_parts(
        vertices: Vec<Point>,
        cells: Vec<Cell>,
        facets: Vec<Facet>,
        nominal_h: f64,
    ) -> Result<Self> {
        let min_area = 1e-14 * nominal_h * nominal_h;
        for (c, cell) in cells.iter().enumerate() {
            if cell.vertices.iter().any(|&v| v >= vertices.len()) {
                return Err(FsiError::InvalidGeometry(format!(
                    "cell {c} references a missing vertex"
                )));
            }
            let [a, b, d] = cell.vertices.map(|v| vertices[v]);
            let area = signed_area(a, b, d);
            if area < min_area {
                return Err(FsiError::InvalidGeometry(format!(
                    "cell {c} has signed area {area:e}"
                )));
            }
        }
        let mut edge_ids: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for cell in &cells {
            let v = cell.vertices;
            let mut ce = [0; 3];
            for (k, (a, b)) in [(v[1], v[2]), (v[2], v[0]), (v[0], v[1])].into_iter().enumerate() {
                let key = [a.min(b), a.max(b)];
                ce[k] = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
            }
            cell_edges.push(ce);
        }
        for f in &facets {
            let key = [f.vertices[0].min(f.vertices[1]), f.vertices[0].max(f.vertices[1])];
            if !edge_ids.contains_key(&key) {
                return Err(FsiError::InvalidGeometry(format!(
                    "facet {:?} is not an edge of any cell",
                    f.vertices
                )));
            }
        }
        Ok(Self {
            vertices,
            cells,
            facets,
            edges,
            cell_edges,
            edge_index: edge_ids,
            nominal_h,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn cell_edges(&self) -> &[[usize; 3]] {
        &self.cell_edges
    }

    pub fn nominal_h(&self) -> f64 {
        self.nominal_h
    }

    /// Id of the edge joining `a` and `b`, if present.
    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&[a.min(b), a.max(b)]).copied()
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let [a, b, d] = self.cells[c].vertices.map(|v| self.vertices[v]);
        signed_area(a, b, d)
    }

    pub fn subdomain_area(&self, sub: Subdomain) -> f64 {
        (0..self.cells.len())
            .filter(|&c| self.cells[c].subdomain == sub)
            .map(|c| self.cell_area(c))
            .sum()
    }

    /// Interface facets ordered by increasing midpoint x, with outward
    /// normals of the fluid (`n`) and solid (`n_s`) sides.
    pub fn interface_facets(&self) -> Vec<InterfaceFacet> {
        let mut out: Vec<(f64, InterfaceFacet)> = self
            .facets
            .iter()
            .filter(|f| f.tag == FacetTag::Interface)
            .map(|f| {
                let [a, b] = f.vertices;
                let (pa, pb) = (self.vertices[a], self.vertices[b]);
                let d = [pb[0] - pa[0], pb[1] - pa[1]];
                let length = d[0].hypot(d[1]);
                let mut n = [d[1] / length, -d[0] / length];
                // orient away from the fluid cell owning this edge
                let key = [a.min(b), a.max(b)];
                let fluid_opposite = self
                    .cells
                    .iter()
                    .zip(&self.cell_edges)
                    .filter(|(c, _)| c.subdomain == Subdomain::Fluid)
                    .find_map(|(c, ce)| {
                        (0..3)
                            .find(|&k| self.edges[ce[k]] == key)
                            .map(|k| self.vertices[c.vertices[k]])
                    })
                    .expect("interface facet without an adjacent fluid cell");
                let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                let to_inside = [fluid_opposite[0] - mid[0], fluid_opposite[1] - mid[1]];
                if n[0] * to_inside[0] + n[1] * to_inside[1] > 0.0 {
                    n = [-n[0], -n[1]];
                }
                let (lo, hi) = if pa[0] <= pb[0] { (a, b) } else { (b, a) };
                (
                    mid[0],
                    InterfaceFacet {
                        vertices: [lo, hi],
                        length,
                        fluid_normal: n,
                        solid_normal: [-n[0], -n[1]],
                    },
                )
            })
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.into_iter().map(|(_, f)| f).collect()
    }

    /// Plain-text dump with `vertices`, `cells` and `facets` sections.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "vertices {}", self.vertices.len())?;
        for p in &self.vertices {
            writeln!(w, "{:.17e} {:.17e}", p[0], p[1])?;
        }
        writeln!(w, "cells {}", self.cells.len())?;
        for c in &self.cells {
            let sub = match c.subdomain {
                Subdomain::Fluid => "fluid",
                Subdomain::Solid => "solid",
            };
            writeln!(w, "{} {} {} {sub}", c.vertices[0], c.vertices[1], c.vertices[2])?;
        }
        writeln!(w, "facets {}", self.facets.len())?;
        for f in &self.facets {
            let tag = match f.tag {
                FacetTag::SigmaF => "sigma_f",
                FacetTag::SigmaS => "sigma_s",
                FacetTag::Interface => "interface",
            };
            writeln!(w, "{} {} {tag}", f.vertices[0], f.vertices[1])?;
        }
        Ok(())
    }
}
