use statrs::function::gamma::gamma;

/// Surface area of the unit sphere S^{m-1} in R^m, 2 pi^{m/2} / Gamma(m/2).
pub fn sphere_area(m: u32) -> f64 {
    assert!(m >= 1, "sphere_area needs m >= 1");
    let h = m as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / gamma(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn low_dimensions() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn recursion() {
        // |S^{m+1}| = 2 pi |S^{m-1}| / m
        for m in 1..20 {
            let lhs = sphere_area(m + 2);
            let rhs = 2.0 * PI * sphere_area(m) / m as f64;
            assert!((lhs - rhs).abs() <= 1e-12 * rhs, "m={m}");
        }
    }
}
