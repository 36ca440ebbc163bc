//! The radial transition profile used by the restriction operators.
//!
//! `H` rises from 0 to 1 across `[1/4, 3/4]` as a quintic smoothstep,
//! `H(Z) = S(2Z - 1/2)` with `S(s) = s^3 (10 - 15 s + 6 s^2)`. The derivative
//! is symmetric about `Z = 1/2`, `H'(Z) = H'(1 - Z)`, which the gradient
//! formula of the restriction operator relies on; `h_prime` is written as an
//! even function of `Z - 1/2` so the symmetry holds bit-exactly.

/// Smooth 0-to-1 transition, constant outside `[1/4, 3/4]`, C^2 everywhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct CutoffProfile;

impl CutoffProfile {
    pub fn new() -> Self {
        CutoffProfile
    }

    /// Profile value; 0 for `Z <= 1/4`, 1 for `Z >= 3/4`.
    pub fn value(&self, z: f64) -> f64 {
        if z <= 0.25 {
            return 0.0;
        }
        if z >= 0.75 {
            return 1.0;
        }
        let s = 2.0 * z - 0.5;
        s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }

    /// Profile derivative; nonnegative, supported in `(1/4, 3/4)`.
    pub fn derivative(&self, z: f64) -> f64 {
        if z <= 0.25 || z >= 0.75 {
            return 0.0;
        }
        // with w = Z - 1/2 and s = 2Z - 1/2: s(1-s) = 1/4 - 4 w^2, so
        // H'(Z) = 2 S'(s) = 60 (s(1-s))^2 is even in w bit-exactly
        let w = z - 0.5;
        let u = 0.25 - 4.0 * w * w;
        60.0 * u * u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn clamped_regions() {
        let h = CutoffProfile::new();
        assert_eq!(h.value(0.25), 0.0);
        assert_eq!(h.value(-3.0), 0.0);
        assert_eq!(h.value(0.75), 1.0);
        assert_eq!(h.value(10.0), 1.0);
        assert_eq!(h.derivative(0.0), 0.0);
        assert_eq!(h.derivative(0.25), 0.0);
        assert_eq!(h.derivative(1.0), 0.0);
    }

    #[test]
    fn midpoint_values() {
        let h = CutoffProfile::new();
        assert_relative_eq!(h.value(0.5), 0.5, max_relative = 1e-15);
        // 2 * S'(1/2) = 2 * 15/8
        assert_relative_eq!(h.derivative(0.5), 3.75, max_relative = 1e-15);
    }

    #[test]
    fn derivative_symmetry_bit_exact_on_representable_reflections() {
        let h = CutoffProfile::new();
        // dyadic mesh: 1 - z is exactly representable, so the reflected
        // argument carries no rounding and the symmetry must be bit-exact
        for i in 0..=(1 << 13) {
            let z = i as f64 / (1 << 13) as f64;
            assert_eq!(h.derivative(z).to_bits(), h.derivative(1.0 - z).to_bits());
        }
        assert_eq!(h.derivative(0.3125).to_bits(), h.derivative(0.6875).to_bits());
    }

    #[test]
    fn derivative_symmetry_within_rounding_elsewhere() {
        // fl(0.3) and fl(0.7) are not exact reflections of each other, so the
        // comparison is only meaningful to rounding accuracy
        let h = CutoffProfile::new();
        for i in 0..=9_999 {
            let z = i as f64 / 9_999.0;
            let d = (h.derivative(z) - h.derivative(1.0 - z)).abs();
            assert!(d <= 1e-13, "z = {z}: asymmetry {d}");
        }
        assert!((h.derivative(0.3) - h.derivative(0.7)).abs() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = CutoffProfile::new();
        let step = 1e-4;
        for i in 0..=2_000 {
            let z = -0.1 + 1.2 * i as f64 / 2_000.0;
            let fd = (h.value(z + step) - h.value(z - step)) / (2.0 * step);
            assert!(
                (h.derivative(z) - fd).abs() <= 1e-6,
                "z = {z}: {} vs {}",
                h.derivative(z),
                fd
            );
        }
    }

    #[test]
    fn monotone_and_bounded() {
        let h = CutoffProfile::new();
        let mut prev = h.value(-0.5);
        for i in 0..=4_000 {
            let z = -0.5 + 2.0 * i as f64 / 4_000.0;
            let v = h.value(z);
            assert!((0.0..=1.0).contains(&v));
            assert!(v >= prev - 1e-15);
            assert!(h.derivative(z) >= 0.0);
            prev = v;
        }
    }
}
