//! Moment vectors over a four-term exponent basis, realizability and principal
//! representations.
//!
//! Fractional moments `m_{k/2} = ∫ S^{k/2} n(S) dS` are integer moments of the
//! measure `2 r n(r²) dr` in the radius variable `r = √S`. Everything that needs
//! the classical (integer) moment theory works in that variable: canonical moments,
//! product-difference inversion and principal representations.

mod canonical;
mod pd;

pub use canonical::{canonical_moments, canonical_to_moments, is_realizable, Realizability, DEFAULT_TOL};
pub use pd::{lower_principal_rep, lower_principal_rep_fractional, pd_inversion, GaussInversion, PrincipalRepresentation};

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent set of the transported moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentBasis {
    /// {0, 1/2, 1, 3/2}: number density, mean curvature, interface area, volume.
    Fractional,
    /// {0, 1, 2, 3}: the classical integer size moments.
    Integer,
}

impl ExponentBasis {
    pub const fn exponents(self) -> [f64; 4] {
        match self {
            ExponentBasis::Fractional => [0.0, 0.5, 1.0, 1.5],
            ExponentBasis::Integer => [0.0, 1.0, 2.0, 3.0],
        }
    }

    pub const fn step(self) -> f64 {
        match self {
            ExponentBasis::Fractional => 0.5,
            ExponentBasis::Integer => 1.0,
        }
    }

    /// Index of the `S¹` moment, the one weighting the velocity.
    pub const fn surface_index(self) -> usize {
        match self {
            ExponentBasis::Fractional => 2,
            ExponentBasis::Integer => 1,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            ExponentBasis::Fractional => "fractional",
            ExponentBasis::Integer => "integer",
        }
    }

    /// Size `S` corresponding to a point `x` of the variable in which the basis is polynomial.
    #[inline]
    pub(crate) fn size_of(self, x: f64) -> f64 {
        match self {
            ExponentBasis::Fractional => x * x,
            ExponentBasis::Integer => x,
        }
    }

    /// Inverse of [`size_of`](Self::size_of).
    #[inline]
    pub(crate) fn var_of(self, s: f64) -> f64 {
        match self {
            ExponentBasis::Fractional => s.max(0.0).sqrt(),
            ExponentBasis::Integer => s,
        }
    }

    /// Jacobian `dS/dx`.
    #[inline]
    pub(crate) fn jacobian(self, x: f64) -> f64 {
        match self {
            ExponentBasis::Fractional => 2.0 * x,
            ExponentBasis::Integer => 1.0,
        }
    }
}

impl fmt::Display for ExponentBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Four moments of a size distribution on a sub-interval of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentVector {
    pub basis: ExponentBasis,
    pub values: [f64; 4],
    pub support: (f64, f64),
}

impl MomentVector {
    pub fn new(basis: ExponentBasis, values: [f64; 4]) -> Self {
        Self { basis, values, support: (0.0, 1.0) }
    }

    pub fn fractional(values: [f64; 4]) -> Self {
        Self::new(ExponentBasis::Fractional, values)
    }

    pub fn integer(values: [f64; 4]) -> Self {
        Self::new(ExponentBasis::Integer, values)
    }

    pub fn vacuum(basis: ExponentBasis) -> Self {
        Self::new(basis, [0.0; 4])
    }

    pub fn with_support(mut self, lo: f64, hi: f64) -> Self {
        self.support = (lo, hi);
        self
    }

    #[inline]
    pub fn m0(&self) -> f64 {
        self.values[0]
    }

    /// The `S¹` moment (interface area density).
    #[inline]
    pub fn surface(&self) -> f64 {
        self.values[self.basis.surface_index()]
    }

    #[inline]
    pub fn is_vacuum(&self, threshold: f64) -> bool {
        self.values[0] <= threshold
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = *self;
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }
}

/// Averaged interface geometry carried by fractional moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricOutputs {
    /// Σ_d G̃_d = 4π m₀.
    pub gauss_curvature: f64,
    /// Σ_d H̃_d = 2√π m_{1/2}.
    pub mean_curvature: f64,
    /// Σ_d = m₁.
    pub interface_area: f64,
    /// α_d = m_{3/2} / (6√π).
    pub volume_fraction: f64,
}

pub fn geometric_outputs(m: &MomentVector) -> Result<GeometricOutputs> {
    if m.basis != ExponentBasis::Fractional {
        return Err(Error::UnsupportedBasis(m.basis.name()));
    }
    let sqrt_pi = PI.sqrt();
    let [m0, m12, m1, m32] = m.values;
    Ok(GeometricOutputs {
        gauss_curvature: 4.0 * PI * m0,
        mean_curvature: 2.0 * sqrt_pi * m12,
        interface_area: m1,
        volume_fraction: m32 / (6.0 * sqrt_pi),
    })
}
