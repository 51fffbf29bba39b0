use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{FsiError, Result};
use crate::fem::basis;
use crate::mesh::{FacetTag, Mesh, Point, Subdomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    VectorP2,
    VectorP1,
    ScalarP1,
}

impl SpaceKind {
    pub fn degree(self) -> usize {
        match self {
            SpaceKind::VectorP2 => 2,
            SpaceKind::VectorP1 | SpaceKind::ScalarP1 => 1,
        }
    }

    pub fn components(self) -> usize {
        match self {
            SpaceKind::VectorP2 | SpaceKind::VectorP1 => 2,
            SpaceKind::ScalarP1 => 1,
        }
    }
}

/// Continuous Lagrange space on one subdomain of a [`Mesh`].
///
/// Nodes are numbered by increasing `(y, x)` so the numbering does not depend
/// on the order of the mesh cells. Vector dofs are interleaved:
/// `dof = components * node + component`.
#[derive(Debug, Clone)]
pub struct Space {
    mesh: Arc<Mesh>,
    kind: SpaceKind,
    subdomain: Subdomain,
    cells: Vec<usize>,
    cell_nodes: Vec<usize>,
    node_coords: Vec<Point>,
    vertex_node: Vec<Option<usize>>,
    edge_node: Vec<Option<usize>>,
    dirichlet_dofs: Vec<usize>,
    interface_nodes: Vec<usize>,
    interface_dofs: Vec<usize>,
}

impl Space {
    pub fn new(mesh: Arc<Mesh>, subdomain: Subdomain, kind: SpaceKind) -> Result<Self> {
        let degree = kind.degree();
        let cells: Vec<usize> = (0..mesh.cells().len())
            .filter(|&c| mesh.cells()[c].subdomain == subdomain)
            .collect();
        if cells.is_empty() {
            return Err(FsiError::UnsupportedSpace(format!(
                "subdomain {subdomain:?} has no cells"
            )));
        }

        // candidate nodes: (coordinate, Vertex(id) | Edge(id))
        let mut used_vertices = BTreeSet::new();
        let mut used_edges = BTreeSet::new();
        for &c in &cells {
            used_vertices.extend(mesh.cells()[c].vertices);
            if degree == 2 {
                used_edges.extend(mesh.cell_edges()[c]);
            }
        }
        enum Origin {
            Vertex(usize),
            Edge(usize),
        }
        let mut nodes: Vec<(Point, Origin)> = used_vertices
            .iter()
            .map(|&v| (mesh.vertices()[v], Origin::Vertex(v)))
            .collect();
        for &e in &used_edges {
            let [a, b] = mesh.edges()[e].map(|v| mesh.vertices()[v]);
            nodes.push(([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])], Origin::Edge(e)));
        }
        nodes.sort_by(|a, b| a.0[1].total_cmp(&b.0[1]).then(a.0[0].total_cmp(&b.0[0])));

        let mut vertex_node = vec![None; mesh.vertices().len()];
        let mut edge_node = vec![None; mesh.edges().len()];
        let mut node_coords = Vec::with_capacity(nodes.len());
        for (k, (p, origin)) in nodes.into_iter().enumerate() {
            node_coords.push(p);
            match origin {
                Origin::Vertex(v) => vertex_node[v] = Some(k),
                Origin::Edge(e) => edge_node[e] = Some(k),
            }
        }

        let nloc = basis::local_count(degree);
        let mut cell_nodes = Vec::with_capacity(cells.len() * nloc);
        for &c in &cells {
            for v in mesh.cells()[c].vertices {
                cell_nodes.push(vertex_node[v].expect("vertex node"));
            }
            if degree == 2 {
                for e in mesh.cell_edges()[c] {
                    cell_nodes.push(edge_node[e].expect("edge node"));
                }
            }
        }

        let facet_nodes = |tag: FacetTag| -> BTreeSet<usize> {
            let mut set = BTreeSet::new();
            for f in mesh.facets().iter().filter(|f| f.tag == tag) {
                let [a, b] = f.vertices;
                if let (Some(na), Some(nb)) = (vertex_node[a], vertex_node[b]) {
                    set.insert(na);
                    set.insert(nb);
                    if degree == 2 {
                        let e = mesh.edge_id(a, b).expect("facet edge");
                        set.insert(edge_node[e].expect("facet midpoint node"));
                    }
                }
            }
            set
        };
        let wall = match subdomain {
            Subdomain::Fluid => FacetTag::SigmaF,
            Subdomain::Solid => FacetTag::SigmaS,
        };
        let wall_nodes = facet_nodes(wall);
        let mut interface_nodes: Vec<usize> = facet_nodes(FacetTag::Interface)
            .difference(&wall_nodes)
            .copied()
            .collect();
        interface_nodes.sort_by(|&a, &b| node_coords[a][0].total_cmp(&node_coords[b][0]));

        let ncomp = kind.components();
        let dofs_of = |nodes: &mut dyn Iterator<Item = usize>| -> Vec<usize> {
            nodes.flat_map(|n| (0..ncomp).map(move |c| ncomp * n + c)).collect()
        };
        let dirichlet_dofs = dofs_of(&mut wall_nodes.iter().copied());
        let interface_dofs = dofs_of(&mut interface_nodes.iter().copied());

        Ok(Self {
            mesh,
            kind,
            subdomain,
            cells,
            cell_nodes,
            node_coords,
            vertex_node,
            edge_node,
            dirichlet_dofs,
            interface_nodes,
            interface_dofs,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn subdomain(&self) -> Subdomain {
        self.subdomain
    }

    pub fn degree(&self) -> usize {
        self.kind.degree()
    }

    pub fn components(&self) -> usize {
        self.kind.components()
    }

    pub fn node_count(&self) -> usize {
        self.node_coords.len()
    }

    pub fn dof_count(&self) -> usize {
        self.node_coords.len() * self.components()
    }

    pub fn node_coords(&self) -> &[Point] {
        &self.node_coords
    }

    /// Mesh cells belonging to this space's subdomain.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// Space nodes of the `k`-th cell in [`Space::cells`], in local order.
    pub fn cell_nodes(&self, k: usize) -> &[usize] {
        let n = basis::local_count(self.degree());
        &self.cell_nodes[k * n..(k + 1) * n]
    }

    pub fn vertex_node(&self, v: usize) -> Option<usize> {
        self.vertex_node[v]
    }

    pub fn edge_node(&self, e: usize) -> Option<usize> {
        self.edge_node[e]
    }

    /// Dofs on the wall part of the boundary (no-slip for the fluid, clamped
    /// for the solid), including the interface end points. Sorted.
    pub fn dirichlet_dofs(&self) -> &[usize] {
        &self.dirichlet_dofs
    }

    /// Interface nodes not on the wall, ordered by x.
    pub fn interface_nodes(&self) -> &[usize] {
        &self.interface_nodes
    }

    /// Dofs of [`Space::interface_nodes`], components interleaved. This is the
    /// canonical trace ordering shared by all spaces of the same kind.
    pub fn interface_dofs(&self) -> &[usize] {
        &self.interface_dofs
    }

    /// All dofs on facets with the given tag (end points included).
    pub fn boundary_dofs(&self, tag: FacetTag) -> Vec<usize> {
        let ncomp = self.components();
        let mut nodes = BTreeSet::new();
        for f in self.mesh.facets().iter().filter(|f| f.tag == tag) {
            let [a, b] = f.vertices;
            if let (Some(na), Some(nb)) = (self.vertex_node[a], self.vertex_node[b]) {
                nodes.insert(na);
                nodes.insert(nb);
                if self.degree() == 2 {
                    if let Some(n) = self.mesh.edge_id(a, b).and_then(|e| self.edge_node[e]) {
                        nodes.insert(n);
                    }
                }
            }
        }
        nodes
            .into_iter()
            .flat_map(|n| (0..ncomp).map(move |c| ncomp * n + c))
            .collect()
    }

    /// Nodal interpolant of a vector field (or the first component for a
    /// scalar space).
    pub fn interpolate(&self, f: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
        let ncomp = self.components();
        let mut out = vec![0.0; self.dof_count()];
        for (n, &p) in self.node_coords.iter().enumerate() {
            let v = f(p);
            for c in 0..ncomp {
                out[ncomp * n + c] = v[c];
            }
        }
        out
    }

    pub fn interpolate_scalar(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.interpolate(|p| [f(p), 0.0])
            .into_iter()
            .step_by(self.components())
            .collect()
    }
}
