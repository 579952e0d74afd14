use crate::error::{Error, Result};

use super::MomentVector;

/// Default half-width of the boundary band used by [`is_realizable`].
pub const DEFAULT_TOL: f64 = 1e-10;

const DEGENERATE: f64 = 1e-14;
const CLAMP: f64 = 1e-12;

/// Position of a moment vector relative to the moment space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Realizability {
    Interior,
    Boundary,
    Outside,
}

impl Realizability {
    pub fn is_realizable(self) -> bool {
        !matches!(self, Realizability::Outside)
    }
}

fn clamp_unit(p: f64) -> f64 {
    if (-CLAMP..0.0).contains(&p) {
        0.0
    } else if p > 1.0 && p <= 1.0 + CLAMP {
        1.0
    } else {
        p
    }
}

/// Canonical moments `(p₁, p₂, p₃)` of a four-moment vector.
///
/// The same closed forms serve both bases: for the fractional basis the inputs are
/// read as integer moments of the radius measure. A vector whose distribution is
/// a sum of at most one or two Diracs yields [`Error::BoundaryOfMomentSpace`] with the
/// canonical moments that could be computed before the undefined one.
pub fn canonical_moments(m: &MomentVector) -> Result<[f64; 3]> {
    let m0 = m.values[0];
    if !(m0 > 0.0) {
        return Err(Error::NotRealizable(format!("m0 = {m0} is not positive")));
    }
    let [_, a, b, c] = m.values.map(|v| v / m0);
    let p1 = clamp_unit(a);
    if p1.min(1.0 - p1) < DEGENERATE {
        return Err(Error::BoundaryOfMomentSpace { index: 2, partial: vec![p1] });
    }
    let p2 = clamp_unit((b - a * a) / ((1.0 - a) * a));
    if p2.min(1.0 - p2) < DEGENERATE {
        return Err(Error::BoundaryOfMomentSpace { index: 3, partial: vec![p1, p2] });
    }
    let p3 = clamp_unit((1.0 - a) * (a * c - b * b) / ((b - a * a) * (a - b)));
    Ok([p1, p2, p3])
}

/// Moments from `m₀` and canonical moments; inverse of [`canonical_moments`].
pub fn canonical_to_moments(m0: f64, p: [f64; 3]) -> [f64; 4] {
    let [p1, p2, p3] = p;
    let inner = (1.0 - p1) * p2 + p1;
    [
        m0,
        m0 * p1,
        m0 * p1 * inner,
        m0 * p1 * ((1.0 - p1) * (1.0 - p2) * p2 * p3 + inner * inner),
    ]
}

/// Classifies a moment vector as interior, boundary or outside the moment space.
///
/// A canonical moment within `tol` of 0 or 1 puts the vector on the boundary, in
/// which case the remaining moments are fixed by the lower ones; a vector that
/// disagrees with those forced values is reported as outside.
pub fn is_realizable(m: &MomentVector, tol: f64) -> Realizability {
    use Realizability::*;
    if !m.is_finite() {
        return Outside;
    }
    let m0 = m.values[0];
    if m0 == 0.0 {
        return if m.values.iter().all(|&v| v == 0.0) { Boundary } else { Outside };
    }
    if m0 < 0.0 {
        return Outside;
    }
    let [_, a, b, c] = m.values.map(|v| v / m0);
    let check = tol.max(1e-9);
    let consistent = |expected: &[f64], actual: &[f64]| {
        expected.iter().zip(actual).all(|(e, x)| (e - x).abs() <= check * e.abs().max(1.0))
    };

    // Level 1: mean of the radius measure.
    if a < -tol || a > 1.0 + tol {
        return Outside;
    }
    if a <= tol || a >= 1.0 - tol {
        // Dirac at an endpoint: every higher moment equals the mean.
        return if consistent(&[a, a], &[b, c]) { Boundary } else { Outside };
    }
    // Level 2.
    let var = b - a * a;
    let p2 = var / (a * (1.0 - a));
    if p2 < -tol || p2 > 1.0 + tol {
        return Outside;
    }
    if p2 <= tol {
        // Single Dirac at r = a.
        return if consistent(&[a * a * a], &[c]) { Boundary } else { Outside };
    }
    if p2 >= 1.0 - tol {
        // Two-point measure on {0, 1}.
        return if consistent(&[b], &[c]) { Boundary } else { Outside };
    }
    // Level 3.
    let p3 = (1.0 - a) * (a * c - b * b) / (var * (a - b));
    if !p3.is_finite() || p3 < -tol || p3 > 1.0 + tol {
        return Outside;
    }
    if p3 <= tol || p3 >= 1.0 - tol {
        return Boundary;
    }
    Interior
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment_space::ExponentBasis;

    const UNIFORM: [f64; 4] = [1.0, 2.0 / 3.0, 0.5, 0.4];

    #[test]
    fn uniform_canonical_moments() {
        let p = canonical_moments(&MomentVector::fractional(UNIFORM)).unwrap();
        let expected = [2.0 / 3.0, 0.25, 0.6];
        for (x, e) in p.iter().zip(expected) {
            assert!((x - e).abs() < 1e-14, "{p:?}");
        }
    }

    #[test]
    fn scaling_does_not_change_canonical_moments() {
        let p = canonical_moments(&MomentVector::fractional(UNIFORM.map(|v| 3.5 * v))).unwrap();
        assert!((p[2] - 0.6).abs() < 1e-14);
    }

    #[test]
    fn dirac_at_one_and_zero_are_boundary() {
        match canonical_moments(&MomentVector::fractional([1.0; 4])) {
            Err(Error::BoundaryOfMomentSpace { index: 2, partial }) => assert_eq!(partial, vec![1.0]),
            r => panic!("unexpected {r:?}"),
        }
        match canonical_moments(&MomentVector::fractional([1.0, 0.0, 0.0, 0.0])) {
            Err(Error::BoundaryOfMomentSpace { index: 2, partial }) => assert_eq!(partial, vec![0.0]),
            r => panic!("unexpected {r:?}"),
        }
    }

    #[test]
    fn interior_dirac_reports_third_level() {
        // Dirac at S = 0.49 (r = 0.7).
        let m = MomentVector::fractional([1.0, 0.7, 0.49, 0.343]);
        match canonical_moments(&m) {
            Err(Error::BoundaryOfMomentSpace { index: 3, partial }) => {
                assert!((partial[0] - 0.7).abs() < 1e-15);
                assert!(partial[1].abs() < 1e-14);
            }
            r => panic!("unexpected {r:?}"),
        }
    }

    #[test]
    fn classification_examples() {
        let f = MomentVector::fractional;
        assert_eq!(is_realizable(&f(UNIFORM), 1e-10), Realizability::Interior);
        assert_eq!(is_realizable(&f([1.0, 1.01, 1.0, 1.0]), 1e-10), Realizability::Outside);
        assert_eq!(is_realizable(&f([0.0; 4]), 1e-10), Realizability::Boundary);
        assert_eq!(is_realizable(&f([1.0; 4]), 1e-10), Realizability::Boundary);
        assert_eq!(is_realizable(&f([1.0, 0.5, 0.25, 0.2]), 1e-10), Realizability::Outside);
        assert_eq!(is_realizable(&f([1.0, 0.5, 0.25, 0.125]), 1e-10), Realizability::Boundary);
        assert_eq!(is_realizable(&f([-1.0, 0.0, 0.0, 0.0]), 1e-10), Realizability::Outside);
        assert_eq!(is_realizable(&f([f64::NAN, 0.0, 0.0, 0.0]), 1e-10), Realizability::Outside);
        // Variance larger than the two-point bound.
        assert_eq!(is_realizable(&f([1.0, 0.5, 0.6, 0.5]), 1e-10), Realizability::Outside);
    }

    #[test]
    fn integer_basis_uses_same_forms() {
        // Uniform on [0,1] in the integer basis: (1, 1/2, 1/3, 1/4) → (1/2, 1/3, 1/2).
        let m = MomentVector::new(ExponentBasis::Integer, [1.0, 0.5, 1.0 / 3.0, 0.25]);
        let p = canonical_moments(&m).unwrap();
        for (x, e) in p.iter().zip([0.5, 1.0 / 3.0, 0.5]) {
            assert!((x - e).abs() < 1e-14, "{p:?}");
        }
    }

    #[test]
    fn canonical_round_trip() {
        let p = [0.3, 0.8, 0.45];
        let m = canonical_to_moments(2.0, p);
        let q = canonical_moments(&MomentVector::fractional(m)).unwrap();
        for (x, e) in q.iter().zip(p) {
            assert!((x - e).abs() < 1e-13);
        }
    }
}
