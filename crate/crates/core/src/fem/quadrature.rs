//! Quadrature rules on the reference triangle `{(xi, eta): xi, eta >= 0, xi + eta <= 1}`
//! and on the unit interval.

/// Point in reference coordinates together with a weight. Triangle weights sum
/// to one and must be scaled by the physical cell area.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub xi: [f64; 2],
    pub weight: f64,
}

const A1: f64 = 0.445_948_490_915_964_9;
const W1: f64 = 0.223_381_589_678_011_47;
const A2: f64 = 0.091_576_213_509_770_74;
const W2: f64 = 0.109_951_743_655_321_87;

/// Six-point rule, exact for polynomials of total degree 4.
pub fn triangle_degree4() -> [QuadPoint; 6] {
    let p = |a: f64, b: f64, w: f64| QuadPoint {
        xi: [a, b],
        weight: w,
    };
    [
        p(A1, A1, W1),
        p(1.0 - 2.0 * A1, A1, W1),
        p(A1, 1.0 - 2.0 * A1, W1),
        p(A2, A2, W2),
        p(1.0 - 2.0 * A2, A2, W2),
        p(A2, 1.0 - 2.0 * A2, W2),
    ]
}

/// Three-point Gauss-Legendre rule on `[0, 1]`, exact to degree 5. Weights sum
/// to one.
pub fn gauss3_unit() -> [(f64, f64); 3] {
    let d = 0.5 * (0.6f64).sqrt();
    [(0.5 - d, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + d, 5.0 / 18.0)]
}
