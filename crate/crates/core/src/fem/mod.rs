//! Finite element building blocks: quadrature, Lagrange bases, dof maps,
//! sparse storage, assembly and a direct solver.

pub mod assembly;
pub mod basis;
pub mod quadrature;
pub mod solver;
pub mod space;
pub mod sparse;

pub use assembly::{
    assemble_divdiv, assemble_divergence, assemble_elasticity, assemble_interface_load,
    assemble_interface_mass, assemble_symgrad, assemble_vector_mass, interface_norm_sq,
};
pub use solver::{solve_sparse, Factorization};
pub use space::{Space, SpaceKind};
pub use sparse::{apply_dirichlet, saddle, CsrMatrix, Triplets};
