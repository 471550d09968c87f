#![allow(dead_code)]

use spiked_core::equilibrium::EquilibriumData;
use spiked_core::potential::Potential;
use spiked_core::quadrature::adaptive;

/// Single well with a slowly bending right flank: two maxima of G cross at a
/// secondary critical value a* ∈ (0.63, 0.75), while a_c = ½V′(e).
pub fn secondary_fixture() -> Potential {
    Potential::polynomial(&[0.0, 0.0, 0.5, -0.088, 0.005]).unwrap()
}

/// Slightly stronger bend: a far maximum beats the edge before ½V′(e),
/// so the transition at a_c is discontinuous.
pub fn jump_fixture() -> Potential {
    Potential::polynomial(&[0.0, 0.0, 0.5, -0.092, 0.005]).unwrap()
}

pub fn quartic() -> Potential {
    Potential::polynomial(&[0.0, 0.0, 0.0, 0.0, 0.25]).unwrap()
}

/// ∫ log|x − s| Ψ(s) ds by adaptive quadrature in s = c₀ + r cos θ, which
/// removes the square-root endpoints.
pub fn g_quadrature(eq: &EquilibriumData, x: f64) -> f64 {
    let (a, b) = (eq.left_endpoint, eq.right_endpoint);
    let c0 = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let f = |t: f64| {
        let s = c0 + r * t.cos();
        eq.density(s) * r * t.sin() * (x - s).abs().ln()
    };
    // split at the logarithmic singularity when x is inside; the graded map
    // t = tx ∓ w·u⁴ buries the singularity under a u³ Jacobian
    if x > a && x < b {
        let tx = ((x - c0) / r).acos();
        let pi = std::f64::consts::PI;
        let left = adaptive(|u| 4.0 * tx * u.powi(3) * f(tx - tx * u.powi(4)), 0.0, 1.0, 1e-14).unwrap();
        let right = adaptive(|u| 4.0 * (pi - tx) * u.powi(3) * f(tx + (pi - tx) * u.powi(4)), 0.0, 1.0, 1e-14).unwrap();
        left + right
    } else {
        adaptive(f, 0.0, std::f64::consts::PI, 1e-14).unwrap()
    }
}
