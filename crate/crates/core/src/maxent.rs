//! Maximum-entropy reconstruction of a size distribution from four moments.
//!
//! The density is `n(S) = exp(-Σ λᵢ S^{βᵢ})`. In the variable `x` where the basis is
//! polynomial (`x = √S` or `x = S`) the exponent is an ordinary cubic, and every
//! integral is taken there, including the Jacobian `dS/dx`.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::moment_space::{is_realizable, ExponentBasis, MomentVector, Realizability, DEFAULT_TOL};
use crate::quadrature::{gl_graded, gl_sum, DEFAULT_ORDER};

pub const DEFAULT_EPSILON: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100;

const MAX_HALVINGS: usize = 40;
const ARMIJO: f64 = 1e-4;
const REGULARIZATION: f64 = 1e-12;

/// Lagrange multipliers of a maximum-entropy density on `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxEntDensity {
    pub basis: ExponentBasis,
    pub lambdas: [f64; 4],
}

impl MaxEntDensity {
    pub fn new(basis: ExponentBasis, lambdas: [f64; 4]) -> Self {
        Self { basis, lambdas }
    }

    pub fn uniform(basis: ExponentBasis) -> Self {
        Self::new(basis, [0.0; 4])
    }

    /// Exponent polynomial evaluated in the basis variable.
    #[inline]
    fn exponent(&self, x: f64) -> f64 {
        let [l0, l1, l2, l3] = self.lambdas;
        l0 + x * (l1 + x * (l2 + x * l3))
    }

    /// Density with respect to the basis variable: `n(S(x)) dS/dx`.
    #[inline]
    pub(crate) fn in_var(&self, x: f64) -> f64 {
        (-self.exponent(x)).exp() * self.basis.jacobian(x)
    }

    /// Shannon entropy `-∫ n ln n dS` on `(0, 1)`.
    pub fn entropy(&self) -> f64 {
        gl_sum(DEFAULT_ORDER, 0.0, 1.0, |x| {
            let e = self.exponent(x);
            (-e).exp() * e * self.basis.jacobian(x)
        })
    }
}

/// Tolerance and iteration cap of the Newton solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxEntSettings {
    pub epsilon: f64,
    pub max_iter: usize,
}

impl Default for MaxEntSettings {
    fn default() -> Self {
        Self { epsilon: DEFAULT_EPSILON, max_iter: DEFAULT_MAX_ITER }
    }
}

/// Outcome of a Newton solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    /// `‖δ‖₂ / m₀` at exit.
    pub final_residual: f64,
    pub converged: bool,
}

/// `exp(-Σ λᵢ S^{βᵢ})` at size `s`.
pub fn evaluate_density(d: &MaxEntDensity, s: f64) -> f64 {
    (-d.exponent(d.basis.var_of(s))).exp()
}

/// `∫_lo^hi S^q n(S) dS` for each order `q`.
pub fn moments_of_density(d: &MaxEntDensity, orders: &[f64], interval: (f64, f64)) -> Result<Vec<f64>> {
    let (lo, hi) = interval;
    if !(lo >= 0.0) || !(hi <= 1.0) || lo > hi {
        return Err(Error::InvalidArgument(format!("interval [{lo}, {hi}] not inside [0, 1]")));
    }
    if let Some(&q) = orders.iter().find(|&&q| q < 0.0) {
        if lo == 0.0 {
            return Err(Error::SingularIntegral { order: q });
        }
    }
    let (xlo, xhi) = (d.basis.var_of(lo), d.basis.var_of(hi));
    Ok(orders
        .iter()
        .map(|&q| gl_graded(DEFAULT_ORDER, xlo, xhi, |x| d.basis.size_of(x).powf(q) * d.in_var(x)))
        .collect())
}

/// Moments of `x⁰…x⁶` under the normalized density; the first four are the model
/// moments and all seven fill the Hankel Hessian.
fn hankel(d: &MaxEntDensity) -> [f64; 7] {
    let mut h = [0.0; 7];
    crate::quadrature::gl_for_each(DEFAULT_ORDER, 0.0, 1.0, |x, w| {
        let mut v = w * d.in_var(x);
        for slot in h.iter_mut() {
            *slot += v;
            v *= x;
        }
    });
    h
}

fn potential(h: &[f64; 7], lambdas: &[f64; 4], mu: &[f64; 4]) -> f64 {
    h[0] + lambdas.iter().zip(mu).map(|(l, m)| l * m).sum::<f64>()
}

/// Sum of the magnitudes of the terms of `G`, which bounds its rounding error.
fn potential_scale(h: &[f64; 7], lambdas: &[f64; 4], mu: &[f64; 4]) -> f64 {
    h[0].abs() + lambdas.iter().zip(mu).map(|(l, m)| (l * m).abs()).sum::<f64>()
}

fn residual(h: &[f64; 7], mu: &[f64; 4]) -> Vector4<f64> {
    Vector4::new(mu[0] - h[0], mu[1] - h[1], mu[2] - h[2], mu[3] - h[3])
}

/// Newton iteration on the convex dual potential `G(λ) = ∫ n_λ + Σ λₖ mₖ`.
///
/// The moments are normalized by `m₀` before solving, so `eps` bounds `‖δ‖/m₀`.
/// `initial` warm-starts the iteration; otherwise it starts from the uniform density.
pub fn maxent_reconstruct(
    m: &MomentVector,
    eps: f64,
    max_iter: usize,
    initial: Option<&MaxEntDensity>,
) -> Result<(MaxEntDensity, SolverReport)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {eps}")));
    }
    let class = is_realizable(m, DEFAULT_TOL);
    if class != Realizability::Interior {
        return Err(Error::NotRealizable(format!("{:?} is {class:?}, not interior", m.values)));
    }
    let m0 = m.m0();
    let mu = m.values.map(|v| v / m0);
    let basis = m.basis;
    let mut d = match initial {
        Some(init) if init.basis == basis && init.lambdas.iter().all(|l| l.is_finite()) => {
            let mut l = init.lambdas;
            l[0] += m0.ln();
            MaxEntDensity::new(basis, l)
        }
        _ => MaxEntDensity::uniform(basis),
    };

    let mut h = hankel(&d);
    if !h.iter().all(|v| v.is_finite()) {
        d = MaxEntDensity::uniform(basis);
        h = hankel(&d);
    }
    let mut delta = residual(&h, &mu);
    let mut report = SolverReport { iterations: 0, final_residual: delta.norm(), converged: false };

    while report.final_residual > eps {
        if report.iterations >= max_iter {
            return Err(Error::NonConvergence(report));
        }
        report.iterations += 1;

        let hess = Matrix4::from_fn(|i, j| h[i + j]);
        let chol = hess.cholesky().or_else(|| {
            let mut reg = hess;
            let shift = REGULARIZATION * hess.trace();
            for i in 0..4 {
                reg[(i, i)] += shift;
            }
            reg.cholesky()
        });
        let Some(chol) = chol else {
            return Err(Error::Conditioning(format!("Hessian not positive definite at λ = {:?}", d.lambdas)));
        };
        let step = chol.solve(&delta);
        let decrease = delta.dot(&step);
        let g0 = potential(&h, &d.lambdas, &mu);

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = d;
            for i in 0..4 {
                trial.lambdas[i] -= t * step[i];
            }
            let ht = hankel(&trial);
            if ht.iter().all(|v| v.is_finite()) {
                let g = potential(&ht, &trial.lambdas, &mu);
                let dt = residual(&ht, &mu);
                let armijo = g <= g0 - ARMIJO * t * decrease;
                // Near the optimum the decrease in G drops below the rounding error of
                // its terms, which grows with the multipliers.
                let flat = g <= g0 + 8.0 * f64::EPSILON * potential_scale(&h, &d.lambdas, &mu)
                    && dt.norm() < delta.norm();
                if armijo || flat {
                    accepted = Some((trial, ht, dt));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((trial, ht, dt)) = accepted else {
            return Err(Error::NonConvergence(report));
        };
        d = trial;
        h = ht;
        delta = dt;
        report.final_residual = delta.norm();
    }
    report.converged = true;
    d.lambdas[0] -= m0.ln();
    Ok((d, report))
}

/// [`maxent_reconstruct`] driven by a settings value.
pub fn reconstruct(m: &MomentVector, settings: &MaxEntSettings, initial: Option<&MaxEntDensity>) -> Result<MaxEntDensity> {
    maxent_reconstruct(m, settings.epsilon, settings.max_iter, initial).map(|(d, _)| d)
}
