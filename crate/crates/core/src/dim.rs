use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Space dimension N of the half-space, N >= 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidDimension(n));
        }
        Ok(Self(n))
    }

    pub fn n(self) -> u32 {
        self.0
    }

    pub fn nf(self) -> f64 {
        self.0 as f64
    }

    /// Critical Sobolev exponent 2N/(N-2).
    pub fn two_star(self) -> f64 {
        2.0 * self.nf() / (self.nf() - 2.0)
    }

    /// Critical trace exponent 2(N-1)/(N-2).
    pub fn two_lower(self) -> f64 {
        2.0 * (self.nf() - 1.0) / (self.nf() - 2.0)
    }

    /// Normal shift constant sqrt(N/(N-2)) of the bubble family.
    pub fn x0(self) -> f64 {
        (self.nf() / (self.nf() - 2.0)).sqrt()
    }

    /// Normalisation (N(N-2))^{(N-2)/4}.
    pub fn k_n(self) -> f64 {
        let n = self.nf();
        (n * (n - 2.0)).powf((n - 2.0) / 4.0)
    }

    /// Checks p in the open subcritical range (2, 2*).
    pub fn check_subcritical(self, p: f64) -> Result<()> {
        if !(p > 2.0 && p < self.two_star()) {
            return Err(Error::InvalidParameter(format!(
                "p = {p} outside (2, {})",
                self.two_star()
            )));
        }
        Ok(())
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        Self::new(n)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_dimensions() {
        assert_eq!(Dimension::new(2), Err(Error::InvalidDimension(2)));
        assert!(Dimension::new(3).is_ok());
    }

    #[test]
    fn exponent_relation() {
        for n in 3..=9 {
            let d = Dimension::new(n).unwrap();
            let lhs = d.two_star() - 2.0;
            let rhs = 2.0 * (d.two_lower() - 2.0);
            assert!((lhs - rhs).abs() < 1e-14);
            assert!(d.x0() > 1.0);
        }
    }

    #[test]
    fn n4_constants() {
        let d = Dimension::new(4).unwrap();
        assert_eq!(d.two_star(), 4.0);
        assert_eq!(d.two_lower(), 3.0);
        assert!((d.k_n() - 8f64.sqrt()).abs() < 1e-14);
        assert!((d.x0() - 2f64.sqrt()).abs() < 1e-15);
    }
}
