//! Lagrange shape functions on the reference triangle.
//!
//! Local node order: vertices 0, 1, 2, then (for degree 2) the midpoints of
//! the edges opposite vertex 0, 1 and 2.

/// Values of the shape functions of the given degree at `xi`.
pub fn values(degree: usize, xi: [f64; 2]) -> Vec<f64> {
    let l = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
    match degree {
        1 => l.to_vec(),
        2 => vec![
            l[0] * (2.0 * l[0] - 1.0),
            l[1] * (2.0 * l[1] - 1.0),
            l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[1] * l[2],
            4.0 * l[2] * l[0],
            4.0 * l[0] * l[1],
        ],
        _ => panic!("unsupported degree {degree}"),
    }
}

/// Reference gradients `d/dxi`, `d/deta` of the shape functions.
pub fn gradients(degree: usize, xi: [f64; 2]) -> Vec<[f64; 2]> {
    let l = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
    let dl = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    match degree {
        1 => dl.to_vec(),
        2 => {
            let vert = |i: usize| [(4.0 * l[i] - 1.0) * dl[i][0], (4.0 * l[i] - 1.0) * dl[i][1]];
            let edge = |i: usize, j: usize| {
                [
                    4.0 * (l[j] * dl[i][0] + l[i] * dl[j][0]),
                    4.0 * (l[j] * dl[i][1] + l[i] * dl[j][1]),
                ]
            };
            vec![vert(0), vert(1), vert(2), edge(1, 2), edge(2, 0), edge(0, 1)]
        }
        _ => panic!("unsupported degree {degree}"),
    }
}

/// Shape functions of the trace on an edge, parametrized by `s` in `[0, 1]`
/// from the first to the second endpoint. Order: endpoints, then midpoint.
pub fn edge_values(degree: usize, s: f64) -> Vec<f64> {
    match degree {
        1 => vec![1.0 - s, s],
        2 => vec![(1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s)],
        _ => panic!("unsupported degree {degree}"),
    }
}

pub fn local_count(degree: usize) -> usize {
    match degree {
        1 => 3,
        2 => 6,
        _ => panic!("unsupported degree {degree}"),
    }
}
