//! Problem fixtures shared by the benchmarks.

use fsi_robin::{smooth_coupled_mode, ChannelGeometry, FsiOperators, InitialState, PhysicalParams, TimeGrid};

pub const PARAMS: PhysicalParams = PhysicalParams {
    rho_f: 1.0,
    rho_s: 1.0,
    mu: 0.1,
    l1: 1.0,
    l2: 1.0,
    lambda: 1.0,
};

pub fn geometry() -> ChannelGeometry {
    ChannelGeometry::new(1.0, 1.0, 1.0).expect("unit channel")
}

/// Operators on an `nx` x `nx` mesh per subdomain.
pub fn operators(nx: usize) -> FsiOperators {
    FsiOperators::new(geometry(), nx, nx, nx, PARAMS.material()).expect("valid fixture")
}

pub fn smooth_problem(nx: usize) -> (FsiOperators, InitialState) {
    let ops = operators(nx);
    let init = smooth_coupled_mode(&ops).expect("smooth data");
    (ops, init)
}

/// Default experiment window grid with `m` substeps.
pub fn grid(m: usize) -> TimeGrid {
    TimeGrid::new(0.5, 64, m).expect("valid grid")
}
