//! Quadrature rules used throughout assembly and error measurement.
//!
//! Two triangle rules are kept on purpose: the 3-point edge-midpoint rule is
//! exact for quadratics and is what the operator assembly uses (lowest-order
//! mixed integrands are at most quadratic), while the 7-point degree-5 rule
//! serves as the independent cross-check and as the projection/error rule.

/// Barycentric quadrature point with weight (weights sum to 1, scale by area).
#[derive(Debug, Clone, Copy)]
pub struct TriPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

/// Edge-midpoint rule on the triangle; exact for polynomial degree 2.
pub const TRI_MIDPOINT: [TriPoint; 3] = [
    TriPoint { bary: [0.5, 0.5, 0.0], weight: 1.0 / 3.0 },
    TriPoint { bary: [0.0, 0.5, 0.5], weight: 1.0 / 3.0 },
    TriPoint { bary: [0.5, 0.0, 0.5], weight: 1.0 / 3.0 },
];

// Radon's 7-point rule, degree 5. Interior points come in two orbits around
// the centroid; weights are the classical (155 +/- sqrt 15)/1200 values.
const A1: f64 = 0.101_286_507_323_456_34; // (6 - sqrt 15)/21
const B1: f64 = 0.470_142_064_105_115_1; // (6 + sqrt 15)/21
const W1: f64 = 0.125_939_180_544_827_15; // (155 - sqrt 15)/1200
const W2: f64 = 0.132_394_152_788_506_18; // (155 + sqrt 15)/1200

/// Degree-5 rule on the triangle; the assembly cross-check oracle.
pub const TRI_DEGREE5: [TriPoint; 7] = [
    TriPoint { bary: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], weight: 0.225 },
    TriPoint { bary: [A1, A1, 1.0 - 2.0 * A1], weight: W1 },
    TriPoint { bary: [A1, 1.0 - 2.0 * A1, A1], weight: W1 },
    TriPoint { bary: [1.0 - 2.0 * A1, A1, A1], weight: W1 },
    TriPoint { bary: [B1, B1, 1.0 - 2.0 * B1], weight: W2 },
    TriPoint { bary: [B1, 1.0 - 2.0 * B1, B1], weight: W2 },
    TriPoint { bary: [1.0 - 2.0 * B1, B1, B1], weight: W2 },
];

/// 3-point Gauss-Legendre rule on [0, 1]; exact for degree 5 (edge integrals).
pub fn gauss3_unit() -> [(f64, f64); 3] {
    let s = (0.6f64).sqrt(); // sqrt(3/5)
    [
        (0.5 * (1.0 - s), 5.0 / 18.0),
        (0.5, 8.0 / 18.0),
        (0.5 * (1.0 + s), 5.0 / 18.0),
    ]
}

/// Integrate `f` over the triangle (a, b, c) with the given rule.
pub fn integrate_tri(
    rule: &[TriPoint],
    a: [f64; 2],
    b: [f64; 2],
    c: [f64; 2],
    mut f: impl FnMut([f64; 2]) -> f64,
) -> f64 {
    let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs();
    let mut acc = 0.0;
    for p in rule {
        let x = [
            p.bary[0] * a[0] + p.bary[1] * b[0] + p.bary[2] * c[0],
            p.bary[0] * a[1] + p.bary[1] * b[1] + p.bary[2] * c[1],
        ];
        acc += p.weight * f(x);
    }
    acc * area
}

/// Integrate `f` along the segment (a, b) with the 3-point Gauss rule.
pub fn integrate_edge(a: [f64; 2], b: [f64; 2], mut f: impl FnMut([f64; 2]) -> f64) -> f64 {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let mut acc = 0.0;
    for (t, w) in gauss3_unit() {
        let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        acc += w * f(x);
    }
    acc * len
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Exact monomial integrals over the reference triangle {x,y >= 0, x+y <= 1}:
    // integral x^p y^q = p! q! / (p + q + 2)!.
    fn exact_ref(p: u32, q: u32) -> f64 {
        fn fact(n: u32) -> f64 {
            (1..=n).map(|k| k as f64).product()
        }
        fact(p) * fact(q) / fact(p + q + 2)
    }

    fn rule_error(rule: &[TriPoint], p: u32, q: u32) -> f64 {
        let val = integrate_tri(rule, [0.0, 0.0], [1.0, 0.0], [0.0, 1.0], |x| {
            x[0].powi(p as i32) * x[1].powi(q as i32)
        });
        (val - exact_ref(p, q)).abs()
    }

    #[test]
    fn midpoint_rule_exact_through_degree_two() {
        for p in 0..=2 {
            for q in 0..=(2 - p) {
                assert!(rule_error(&TRI_MIDPOINT, p, q) < 1e-15, "x^{p} y^{q}");
            }
        }
    }

    #[test]
    fn degree5_rule_exact_through_degree_five() {
        for p in 0..=5 {
            for q in 0..=(5 - p) {
                assert!(rule_error(&TRI_DEGREE5, p, q) < 1e-15, "x^{p} y^{q}");
            }
        }
    }

    #[test]
    fn degree5_rule_not_exact_at_degree_six() {
        // Guards against silently over-trusting the oracle rule.
        assert!(rule_error(&TRI_DEGREE5, 6, 0) > 1e-8);
    }

    #[test]
    fn weights_sum_to_one() {
        let s3: f64 = TRI_MIDPOINT.iter().map(|p| p.weight).sum();
        let s7: f64 = TRI_DEGREE5.iter().map(|p| p.weight).sum();
        assert_relative_eq!(s3, 1.0, max_relative = 1e-15);
        assert_relative_eq!(s7, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn edge_rule_exact_for_quintics() {
        // integral_0^1 t^5 dt = 1/6 along the segment (0,0)-(1,0).
        let val = integrate_edge([0.0, 0.0], [1.0, 0.0], |x| x[0].powi(5));
        assert_relative_eq!(val, 1.0 / 6.0, max_relative = 1e-14);
        // Affine map: segment (1,1)-(3,1), f = x => length 2, mean x = 2.
        let val = integrate_edge([1.0, 1.0], [3.0, 1.0], |x| x[0]);
        assert_relative_eq!(val, 4.0, max_relative = 1e-14);
    }
}
