//! Coupled evaporation and Stokes drag in a single cell.
//!
//! Moments follow the quadrature update of [`crate::evaporation`]. Each node of the
//! surviving representation carries its own velocity, started at the cell velocity and
//! relaxed toward the gas velocity with the size-dependent time `θ S(t)`. The momentum
//! is reassembled from the nodes at the end of the step.

use crate::error::{Error, Result};
use crate::evaporation::{step_nemo_robust, EvaporationLaw, EvaporationStepResult};
use crate::maxent::{MaxEntDensity, MaxEntSettings};
use crate::moment_space::{pd_inversion, MomentVector, PrincipalRepresentation};
use crate::quadrature::{gl_sum, DEFAULT_ORDER};

/// State of the droplets in one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellState {
    pub moments: MomentVector,
    /// `m₁ U` (the `S¹` moment times the velocity).
    pub momentum: [f64; 2],
    pub velocity: [f64; 2],
    pub gas_velocity: [f64; 2],
}

impl CellState {
    pub fn new(moments: MomentVector, velocity: [f64; 2], gas_velocity: [f64; 2]) -> Self {
        let s = moments.surface();
        Self { moments, momentum: [s * velocity[0], s * velocity[1]], velocity, gas_velocity }
    }

    pub fn vacuum(moments: MomentVector, gas_velocity: [f64; 2]) -> Self {
        Self {
            moments: MomentVector::vacuum(moments.basis).with_support(moments.support.0, moments.support.1),
            momentum: [0.0; 2],
            velocity: gas_velocity,
            gas_velocity,
        }
    }

    /// Recomputes the velocity from the momentum, or zeroes a cell below `threshold`.
    pub fn sync_velocity(&mut self, threshold: f64) {
        let s = self.moments.surface();
        if self.moments.m0() <= threshold || !(s > 0.0) {
            self.velocity = [0.0; 2];
        } else {
            self.velocity = [self.momentum[0] / s, self.momentum[1] / s];
        }
    }

    pub fn is_finite(&self) -> bool {
        self.moments.is_finite() && self.momentum.iter().chain(&self.velocity).all(|v| v.is_finite())
    }
}

/// `exp(-∫ dτ / (θ S(τ)))` over a step, for a node of initial size `s0` and final size `s1`.
///
/// This is the factor by which the slip velocity `c - U_g` of the node decays.
pub fn relaxation_factor(law: &EvaporationLaw, theta: f64, dt: f64, s0: f64, s1: f64) -> f64 {
    if theta.is_infinite() || dt == 0.0 {
        return 1.0;
    }
    if !(s1 > 0.0) || !(s0 > 0.0) {
        return 0.0;
    }
    let integral = match law {
        EvaporationLaw::D2 { k } if *k == 0.0 => dt / s0,
        EvaporationLaw::D2 { k } => return (s1 / s0).powf(1.0 / (theta * k)),
        EvaporationLaw::Linear { a, b } => match (*a == 0.0, *b == 0.0) {
            (true, true) => dt / s0,
            (true, false) => (b * dt).exp_m1() / (b * s0),
            (false, _) => ((s0 * (a + b * s1)) / (s1 * (a + b * s0))).ln() / a,
        },
        EvaporationLaw::Custom(_) => gl_sum(DEFAULT_ORDER, 0.0, dt, |t| 1.0 / law.advance(t, s0)),
    };
    (-integral / theta).exp()
}

fn size_after(law: &EvaporationLaw, dt: f64, s_star: f64, s: f64) -> f64 {
    match law {
        EvaporationLaw::D2 { .. } => (s - s_star).max(0.0),
        _ => law.advance(dt, s),
    }
}

/// Nodes of the input distribution when the evaporation step did not produce any.
fn plain_nodes(m: &MomentVector) -> Result<PrincipalRepresentation> {
    let basis = m.basis;
    let inv = pd_inversion(&m.values, (0.0, 1.0))?;
    let (nodes, weights) = inv.rule.iter().map(|(x, w)| (basis.size_of(x), w)).unzip();
    let matched_orders = (0..inv.matched_moments()).map(|k| k as f64 * basis.step()).collect();
    Ok(PrincipalRepresentation { nodes, weights, matched_orders, reduced: inv.is_reduced() })
}

/// One step of evaporation and drag with default solver settings.
pub fn step_evap_drag(c: &CellState, law: &EvaporationLaw, theta: f64, dt: f64, n_neg: usize) -> Result<CellState> {
    step_evap_drag_with(c, law, theta, dt, n_neg, &MaxEntSettings::default(), None).map(|(s, _)| s)
}

/// One step of evaporation and drag.
///
/// `theta = f64::INFINITY` disables drag. Returns the new state together with the
/// evaporation step it was built from.
pub fn step_evap_drag_with(
    c: &CellState,
    law: &EvaporationLaw,
    theta: f64,
    dt: f64,
    n_neg: usize,
    settings: &MaxEntSettings,
    warm: Option<&MaxEntDensity>,
) -> Result<(CellState, EvaporationStepResult)> {
    if !(theta > 0.0) {
        return Err(Error::InvalidArgument(format!("Stokes coefficient must be positive, got {theta}")));
    }
    let evap = step_nemo_robust(&c.moments, law, dt, n_neg, settings, warm)?;
    let moments = evap.updated;
    if moments.m0() <= 0.0 {
        return Ok((CellState::vacuum(moments, c.gas_velocity), evap));
    }
    if theta.is_infinite() {
        let out = CellState::new(moments, c.velocity, c.gas_velocity);
        return Ok((out, evap));
    }

    let owned;
    let (rep, s_star) = match &evap.quadrature_used {
        Some(rep) => (rep, law.threshold(dt)),
        None => {
            owned = plain_nodes(&c.moments)?;
            (&owned, 0.0)
        }
    };
    let ug = c.gas_velocity;
    let q = moments.basis.exponents()[moments.basis.surface_index()];
    let mut momentum = [0.0; 2];
    let mut surface = 0.0;
    for (&s0, &w) in rep.nodes.iter().zip(&rep.weights) {
        let s1 = if evap.quadrature_used.is_some() { size_after(law, dt, s_star, s0) } else { s0 };
        if s1 <= 0.0 {
            continue;
        }
        let decay = relaxation_factor(law, theta, dt, s0, s1);
        let ws = w * s1.powf(q);
        surface += ws;
        for d in 0..2 {
            momentum[d] += ws * (ug[d] + (c.velocity[d] - ug[d]) * decay);
        }
    }
    let velocity = if surface > 0.0 { [momentum[0] / surface, momentum[1] / surface] } else { ug };
    // Rebuilt on the updated surface moment so that momentum = m₁ U exactly.
    Ok((CellState::new(moments, velocity, ug), evap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaporation::step_nemo;
    use crate::moment_space::ExponentBasis;

    const UNIFORM: [f64; 4] = [1.0, 2.0 / 3.0, 0.5, 0.4];

    fn cell(u: [f64; 2], ug: [f64; 2]) -> CellState {
        CellState::new(MomentVector::fractional(UNIFORM), u, ug)
    }

    #[test]
    fn gas_velocity_is_a_fixed_point() {
        let c = cell([0.3, -0.2], [0.3, -0.2]);
        for dt in [1e-3, 0.05, 0.3] {
            let out = step_evap_drag(&c, &EvaporationLaw::d2(1.0), 0.1, dt, 1).unwrap();
            for d in 0..2 {
                assert!((out.velocity[d] - c.velocity[d]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn single_node_without_evaporation_relaxes_exponentially() {
        // Dirac at S = 0.5 (r = √0.5).
        let r = 0.5f64.sqrt();
        let m = MomentVector::fractional([1.0, r, 0.5, 0.5 * r]);
        let c = CellState::new(m, [0.0, 0.0], [1.0, 0.0]);
        let out = step_evap_drag(&c, &EvaporationLaw::d2(0.0), 0.1, 0.05, 1).unwrap();
        let expected = 1.0 - (-1.0f64).exp();
        assert!((out.velocity[0] - expected).abs() < 1e-12, "{}", out.velocity[0]);
        assert!((expected - 0.632121).abs() < 1e-6);
        assert_eq!(out.velocity[1], 0.0);
    }

    fn rk4_velocity(theta: f64, s0: f64, rate: impl Fn(f64) -> f64, c0: f64, ug: f64, dt: f64) -> f64 {
        // Integrates the pair (S, c) directly; independent of the closed forms above.
        let f = |s: f64, c: f64| (rate(s), (ug - c) / (theta * s));
        let n = 20_000;
        let h = dt / n as f64;
        let (mut s, mut c) = (s0, c0);
        for _ in 0..n {
            let k1 = f(s, c);
            let k2 = f(s + 0.5 * h * k1.0, c + 0.5 * h * k1.1);
            let k3 = f(s + 0.5 * h * k2.0, c + 0.5 * h * k2.1);
            let k4 = f(s + h * k3.0, c + h * k3.1);
            s += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            c += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        c
    }

    #[test]
    fn d2_closed_form_matches_rk4() {
        let (theta, k, s0, c0, ug, dt) = (0.1, 1.0, 0.4, -0.5, 1.0, 0.1);
        let law = EvaporationLaw::d2(k);
        let closed = ug + (c0 - ug) * relaxation_factor(&law, theta, dt, s0, s0 - k * dt);
        let expected = ug + (c0 - ug) * ((s0 - k * dt) / s0).powf(1.0 / (theta * k));
        assert!((closed - expected).abs() < 1e-15);
        let rk = rk4_velocity(theta, s0, |_| -k, c0, ug, dt);
        assert!((closed - rk).abs() < 1e-8, "{closed} vs {rk}");
    }

    #[test]
    fn linear_and_custom_laws_match_rk4() {
        let (theta, s0, c0, ug, dt) = (0.2, 0.6, 0.0, 1.0, 0.2);
        let lin = EvaporationLaw::Linear { a: 0.5, b: 1.0 };
        let s1 = lin.advance(dt, s0);
        let rk = rk4_velocity(theta, s0, |s| -(0.5 + s), c0, ug, dt);
        let closed = ug + (c0 - ug) * relaxation_factor(&lin, theta, dt, s0, s1);
        assert!((closed - rk).abs() < 1e-8, "{closed} vs {rk}");

        let custom = EvaporationLaw::custom(|s| -(0.5 + s));
        let s1c = custom.advance(dt, s0);
        let via_custom = ug + (c0 - ug) * relaxation_factor(&custom, theta, dt, s0, s1c);
        assert!((via_custom - rk).abs() < 1e-8, "{via_custom} vs {rk}");

        let pure_b = EvaporationLaw::Linear { a: 0.0, b: 1.0 };
        let rk_b = rk4_velocity(theta, s0, |s| -s, c0, ug, dt);
        let closed_b = ug + (c0 - ug) * relaxation_factor(&pure_b, theta, dt, s0, pure_b.advance(dt, s0));
        assert!((closed_b - rk_b).abs() < 1e-8);
    }

    #[test]
    fn infinite_theta_reproduces_pure_evaporation() {
        let c = cell([0.4, 0.1], [1.0, 0.0]);
        let law = EvaporationLaw::d2(1.0);
        let out = step_evap_drag(&c, &law, f64::INFINITY, 0.01, 1).unwrap();
        let evap = step_nemo(&c.moments, &law, 0.01, 1).unwrap();
        assert_eq!(out.moments.values, evap.updated.values);
        for d in 0..2 {
            assert!((out.velocity[d] - c.velocity[d]).abs() < 1e-10);
        }
    }

    #[test]
    fn momentum_is_the_sum_over_surviving_nodes() {
        let c = cell([0.0, 0.5], [1.0, -1.0]);
        let law = EvaporationLaw::d2(1.0);
        let (theta, dt) = (0.1, 0.02);
        let (out, evap) =
            step_evap_drag_with(&c, &law, theta, dt, 1, &MaxEntSettings::default(), None).unwrap();
        let rep = evap.quadrature_used.unwrap();
        let mut p = [0.0; 2];
        for (&s, &w) in rep.nodes.iter().zip(&rep.weights) {
            let s1 = s - dt;
            if s1 <= 0.0 {
                continue;
            }
            let e = (s1 / s).powf(1.0 / theta);
            for d in 0..2 {
                p[d] += w * s1 * (c.gas_velocity[d] + (c.velocity[d] - c.gas_velocity[d]) * e);
            }
        }
        for d in 0..2 {
            assert!((out.momentum[d] - p[d]).abs() < 1e-10, "{:?} vs {p:?}", out.momentum);
            assert!((out.momentum[d] - out.moments.surface() * out.velocity[d]).abs() < 1e-12);
        }
    }

    #[test]
    fn drag_is_dissipative() {
        let c = cell([-0.7, 0.2], [0.5, 0.5]);
        let out = step_evap_drag(&c, &EvaporationLaw::d2(0.5), 0.1, 0.01, 1).unwrap();
        let dist = |u: [f64; 2]| ((u[0] - 0.5).powi(2) + (u[1] - 0.5).powi(2)).sqrt();
        assert!(dist(out.velocity) < dist(c.velocity));
    }

    #[test]
    fn vacuum_takes_gas_velocity() {
        let c = CellState::new(MomentVector::vacuum(ExponentBasis::Fractional), [0.0; 2], [0.3, 0.4]);
        let out = step_evap_drag(&c, &EvaporationLaw::d2(1.0), 0.1, 0.01, 1).unwrap();
        assert_eq!(out.velocity, [0.3, 0.4]);
        assert_eq!(out.momentum, [0.0; 2]);
        // Everything evaporates.
        let out = step_evap_drag(&cell([0.0; 2], [0.3, 0.4]), &EvaporationLaw::d2(1.0), 0.1, 2.0, 1).unwrap();
        assert_eq!(out.moments.m0(), 0.0);
        assert_eq!(out.velocity, [0.3, 0.4]);
    }

    #[test]
    fn integer_basis_and_bad_theta() {
        let c = CellState::new(MomentVector::integer([1.0, 0.5, 1.0 / 3.0, 0.25]), [0.0; 2], [1.0, 0.0]);
        let out = step_evap_drag(&c, &EvaporationLaw::d2(1.0), 0.1, 0.01, 0).unwrap();
        assert!(out.velocity[0] > 0.0 && out.velocity[0] < 1.0);
        assert!(matches!(
            step_evap_drag(&c, &EvaporationLaw::d2(1.0), 0.0, 0.01, 0),
            Err(Error::InvalidArgument(_))
        ));
    }
}
