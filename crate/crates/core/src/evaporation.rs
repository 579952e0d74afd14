//! Evaporation of a size distribution over one time step.
//!
//! Four updates share one interface: the exact kinetic solution (an oracle for a known
//! initial density), the fully-kinetic scheme that integrates the shifted maximum-entropy
//! density, and the quadrature-based update with `n_neg` levels of negative-order
//! moments (`n_neg = 0` is the classical integer-moment algorithm).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::maxent::{evaluate_density, maxent_reconstruct, moments_of_density, MaxEntDensity, MaxEntSettings};
use crate::moment_space::{
    is_realizable, lower_principal_rep, pd_inversion, MomentVector, PrincipalRepresentation, Realizability,
    DEFAULT_TOL,
};
use crate::quadrature::{gl_for_each, DEFAULT_ORDER};

/// Below this threshold the negative-order moments are too singular to be useful.
pub const MIN_THRESHOLD_WITH_NEGATIVE: f64 = 1e-8;
/// Largest supported number of negative-order levels.
pub const MAX_NEGATIVE_LEVELS: usize = 2;

/// Surviving number fraction below which a cell is treated as fully evaporated.
const VANISHED: f64 = 1e-14;

/// Largest RK4 sub-step used for laws without a closed-form characteristic.
const RK4_MAX_STEP: f64 = 0.01;
const RK4_MIN_SUBSTEPS: usize = 8;

/// Rate `R_S(S) = dS/dt` of a single droplet.
#[derive(Clone)]
pub enum EvaporationLaw {
    /// `R_S = -K`.
    D2 { k: f64 },
    /// `R_S = -(a + bS)`.
    Linear { a: f64, b: f64 },
    /// Arbitrary rate, integrated with RK4.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for EvaporationLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvaporationLaw::D2 { k } => f.debug_struct("D2").field("k", k).finish(),
            EvaporationLaw::Linear { a, b } => f.debug_struct("Linear").field("a", a).field("b", b).finish(),
            EvaporationLaw::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl EvaporationLaw {
    pub fn d2(k: f64) -> Self {
        EvaporationLaw::D2 { k }
    }

    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(rate: F) -> Self {
        EvaporationLaw::Custom(Arc::new(rate))
    }

    pub fn rate(&self, s: f64) -> f64 {
        match self {
            EvaporationLaw::D2 { k } => -k,
            EvaporationLaw::Linear { a, b } => -(a + b * s),
            EvaporationLaw::Custom(r) => r(s),
        }
    }

    /// True when no droplet changes size.
    pub fn is_inert(&self) -> bool {
        match self {
            EvaporationLaw::D2 { k } => *k == 0.0,
            EvaporationLaw::Linear { a, b } => *a == 0.0 && *b == 0.0,
            EvaporationLaw::Custom(_) => false,
        }
    }

    /// Size after `dt` of a droplet of size `s`; zero once it has evaporated.
    pub fn advance(&self, dt: f64, s: f64) -> f64 {
        characteristics_solve(self, 0.0, dt, s)
    }

    /// Largest initial size that evaporates completely within `dt`.
    pub fn threshold(&self, dt: f64) -> f64 {
        if dt <= 0.0 {
            return 0.0;
        }
        match self {
            EvaporationLaw::D2 { k } => k * dt,
            EvaporationLaw::Linear { a, b } => {
                if *b == 0.0 {
                    a * dt
                } else {
                    a / b * (b * dt).exp_m1()
                }
            }
            // Integrate backwards from the vanishing point.
            EvaporationLaw::Custom(r) => rk4(r.as_ref(), 0.0, -dt),
        }
    }
}

fn rk4(rate: &(dyn Fn(f64) -> f64 + Send + Sync), s0: f64, tau: f64) -> f64 {
    let n = RK4_MIN_SUBSTEPS.max((tau.abs() / RK4_MAX_STEP).ceil() as usize);
    let h = tau / n as f64;
    let mut s = s0;
    for _ in 0..n {
        let k1 = rate(s);
        let k2 = rate(s + 0.5 * h * k1);
        let k3 = rate(s + 0.5 * h * k2);
        let k4 = rate(s + h * k3);
        s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if tau > 0.0 && s <= 0.0 {
            return 0.0;
        }
    }
    s
}

/// Size at `t1` of the droplet that had size `s0` at `t0`.
///
/// Forward in time the result is floored at zero. Backward solves are allowed and are
/// used to trace a size back to its origin.
pub fn characteristics_solve(law: &EvaporationLaw, t0: f64, t1: f64, s0: f64) -> f64 {
    let tau = t1 - t0;
    if tau == 0.0 {
        return s0;
    }
    let s = match law {
        EvaporationLaw::D2 { k } => s0 - k * tau,
        EvaporationLaw::Linear { a, b } => {
            if *b == 0.0 {
                s0 - a * tau
            } else {
                (s0 + a / b) * (-b * tau).exp() - a / b
            }
        }
        EvaporationLaw::Custom(r) => rk4(r.as_ref(), s0, tau),
    };
    if tau > 0.0 {
        s.max(0.0)
    } else {
        s
    }
}

/// Moments after `t` of an initial density `n0` evolved along exact characteristics.
///
/// `support` bounds the region where `n0` is non-zero; jumps of `n0` should sit at its
/// ends. The integral runs over initial sizes with `s = s* + u²`, which removes the
/// square-root behaviour of fractional powers at the vanishing size `s*`.
pub fn exact_kinetic_moments<F: Fn(f64) -> f64>(
    n0: F,
    law: &EvaporationLaw,
    t: f64,
    basis: crate::moment_space::ExponentBasis,
    support: (f64, f64),
) -> MomentVector {
    const PANELS: usize = 64;
    let exps = basis.exponents();
    let s_star = law.threshold(t);
    let lo = support.0.max(s_star);
    let hi = support.1.min(1.0);
    let mut acc = [0.0; 4];
    if hi > lo {
        let (ulo, uhi) = ((lo - s_star).sqrt(), (hi - s_star).sqrt());
        let h = (uhi - ulo) / PANELS as f64;
        for p in 0..PANELS {
            let a = ulo + p as f64 * h;
            gl_for_each(DEFAULT_ORDER, a, a + h, |u, w| {
                let s = s_star + u * u;
                let st = match law {
                    EvaporationLaw::D2 { .. } => u * u,
                    _ => law.advance(t, s),
                };
                let weight = w * 2.0 * u * n0(s);
                for (slot, &q) in acc.iter_mut().zip(&exps) {
                    *slot += weight * st.powf(q);
                }
            });
        }
    }
    MomentVector::new(basis, acc)
}

/// Output of one evaporation step.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaporationStepResult {
    pub updated: MomentVector,
    /// Moment content of the droplets that vanish during the step.
    pub disappearance_flux: [f64; 4],
    /// Nodes that were translated; absent for the fully-kinetic scheme.
    pub quadrature_used: Option<PrincipalRepresentation>,
    /// Maximum-entropy density of the input, for warm starts.
    pub density: Option<MaxEntDensity>,
}

impl EvaporationStepResult {
    fn identity(m: &MomentVector) -> Self {
        Self { updated: *m, disappearance_flux: [0.0; 4], quadrature_used: None, density: None }
    }

    fn vanished(m: &MomentVector) -> Self {
        Self {
            updated: MomentVector::vacuum(m.basis).with_support(m.support.0, m.support.1),
            disappearance_flux: m.values,
            quadrature_used: None,
            density: None,
        }
    }
}

/// Shared early exits: vacuum, no evaporation, everything evaporates.
fn trivial(m: &MomentVector, law: &EvaporationLaw, dt: f64) -> Result<Option<(EvaporationStepResult, f64)>> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step must be non-negative, got {dt}")));
    }
    if !m.is_finite() {
        return Err(Error::NotRealizable(format!("non-finite moments {:?}", m.values)));
    }
    if m.m0() <= 0.0 {
        return Ok(Some((EvaporationStepResult::vanished(m), 0.0)));
    }
    if dt == 0.0 || law.is_inert() {
        return Ok(Some((EvaporationStepResult::identity(m), 0.0)));
    }
    let s_star = law.threshold(dt);
    if !(s_star > 0.0) {
        return Ok(Some((EvaporationStepResult::identity(m), 0.0)));
    }
    if s_star >= 1.0 {
        return Ok(Some((EvaporationStepResult::vanished(m), s_star)));
    }
    Ok(None)
}

fn flux_of(d: &MaxEntDensity, s_star: f64) -> Result<[f64; 4]> {
    let v = moments_of_density(d, &d.basis.exponents(), (0.0, s_star))?;
    Ok([v[0], v[1], v[2], v[3]])
}

/// One step of the fully-kinetic scheme with default solver settings.
pub fn step_fully_kinetic(m: &MomentVector, law: &EvaporationLaw, dt: f64) -> Result<EvaporationStepResult> {
    step_fully_kinetic_with(m, law, dt, &MaxEntSettings::default(), None)
}

/// Reconstructs the maximum-entropy density and integrates it along exact characteristics.
pub fn step_fully_kinetic_with(
    m: &MomentVector,
    law: &EvaporationLaw,
    dt: f64,
    settings: &MaxEntSettings,
    warm: Option<&MaxEntDensity>,
) -> Result<EvaporationStepResult> {
    let s_star = match trivial(m, law, dt)? {
        Some((r, _)) => return Ok(r),
        None => law.threshold(dt),
    };
    let (d, _) = maxent_reconstruct(m, settings.epsilon, settings.max_iter, warm)?;
    let flux = flux_of(&d, s_star)?;

    // Two panels in u = √(s - s*): the density, smooth in √s, has its nearest
    // singularity at distance √s* from the origin of u.
    let exps = m.basis.exponents();
    let umax = (1.0 - s_star).sqrt();
    let split = (2.0 * s_star.sqrt()).min(umax);
    let mut acc = [0.0; 4];
    for (lo, hi) in [(0.0, split), (split, umax)] {
        gl_for_each(DEFAULT_ORDER, lo, hi, |u, w| {
            let s = s_star + u * u;
            let st = match law {
                EvaporationLaw::D2 { .. } => u * u,
                _ => law.advance(dt, s),
            };
            let weight = w * 2.0 * u * evaluate_density(&d, s);
            for (slot, &q) in acc.iter_mut().zip(&exps) {
                *slot += weight * st.powf(q);
            }
        });
    }
    Ok(EvaporationStepResult {
        updated: MomentVector { values: acc, ..*m },
        disappearance_flux: flux,
        quadrature_used: None,
        density: Some(d),
    })
}

/// One quadrature-based step with default solver settings.
pub fn step_nemo(m: &MomentVector, law: &EvaporationLaw, dt: f64, n_neg: usize) -> Result<EvaporationStepResult> {
    step_nemo_with(m, law, dt, n_neg, &MaxEntSettings::default(), None)
}

/// Lower principal representation of the surviving droplets.
///
/// Falls back to fewer negative levels when the inversion had to drop nodes and
/// would no longer reproduce the number density.
fn surviving_representation(
    d: &MaxEntDensity,
    m_pos: [f64; 4],
    s_star: f64,
    n_neg: usize,
) -> Result<PrincipalRepresentation> {
    let basis = d.basis;
    let mut level = n_neg;
    loop {
        let orders: Vec<f64> = (1..=2 * level).map(|a| -(a as f64) * basis.step()).collect();
        let m_neg = if level > 0 { moments_of_density(d, &orders, (s_star, 1.0))? } else { Vec::new() };
        let attempt = lower_principal_rep(basis, m_pos, &m_neg, level, s_star);
        match attempt {
            Ok(rep) if level == 0 || rep.matched_orders.iter().filter(|&&q| q >= 0.0).count() == 4 => return Ok(rep),
            Ok(_) | Err(Error::NotRealizable(_)) if level > 0 => {
                log::debug!("negative-order representation degenerate at level {level}; retrying with {}", level - 1);
                level -= 1;
            }
            other => return other,
        }
    }
}

/// Flux, surviving moments and their representation for a threshold `s_star`.
///
/// The surviving moments are `m - flux`. When that difference has lost realizability to
/// cancellation (nearly everything evaporates, or a very peaked density), they are
/// integrated from the density instead and the flux is redefined as the remainder, so
/// that number balance still holds exactly.
fn split_at_threshold(
    m: &MomentVector,
    d: &MaxEntDensity,
    s_star: f64,
    levels: usize,
) -> Result<([f64; 4], [f64; 4], Option<PrincipalRepresentation>)> {
    let flux = flux_of(d, s_star)?;
    let m_pos: [f64; 4] = std::array::from_fn(|k| (m.values[k] - flux[k]).max(0.0));
    match surviving_representation(d, m_pos, s_star, levels) {
        Err(Error::NotRealizable(msg)) => {
            log::debug!("surviving moments {m_pos:?} not realizable ({msg}); integrating the density");
            let v = moments_of_density(d, &d.basis.exponents(), (s_star, 1.0))?;
            let direct = [v[0], v[1], v[2], v[3]];
            let flux: [f64; 4] = std::array::from_fn(|k| m.values[k] - direct[k]);
            if !(direct[0] > VANISHED * m.m0()) {
                return Ok((m.values, [0.0; 4], None));
            }
            let rep = surviving_representation(d, direct, s_star, levels)?;
            Ok((flux, direct, Some(rep)))
        }
        r => Ok((flux, m_pos, Some(r?))),
    }
}

/// Translates nodes along characteristics and sums their moments.
fn translate(rep: &PrincipalRepresentation, law: &EvaporationLaw, dt: f64, s_star: f64, exps: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (&s, &w) in rep.nodes.iter().zip(&rep.weights) {
        let st = match law {
            EvaporationLaw::D2 { .. } => (s - s_star).max(0.0),
            _ => law.advance(dt, s),
        };
        for (slot, &q) in out.iter_mut().zip(exps) {
            *slot += w * st.powf(q);
        }
    }
    out
}

/// The four-step quadrature update.
///
/// 1. reconstruct the maximum-entropy density and compute the disappearance flux;
/// 2. integrate `2 n_neg` negative-order moments over the surviving sizes;
/// 3. invert the combined sequence to `n_neg + 2` nodes;
/// 4. move the nodes along characteristics and sum.
pub fn step_nemo_with(
    m: &MomentVector,
    law: &EvaporationLaw,
    dt: f64,
    n_neg: usize,
    settings: &MaxEntSettings,
    warm: Option<&MaxEntDensity>,
) -> Result<EvaporationStepResult> {
    if n_neg > MAX_NEGATIVE_LEVELS {
        return Err(Error::InvalidArgument(format!(
            "number of negative-order levels must be at most {MAX_NEGATIVE_LEVELS}, got {n_neg}"
        )));
    }
    let s_star = match trivial(m, law, dt)? {
        Some((r, _)) => return Ok(r),
        None => law.threshold(dt),
    };
    let mut levels = n_neg;
    if levels > 0 && s_star < MIN_THRESHOLD_WITH_NEGATIVE {
        log::warn!(
            "evaporated size {s_star:e} below {MIN_THRESHOLD_WITH_NEGATIVE:e}: negative-order moments are \
             ill-conditioned, using positive orders only"
        );
        levels = 0;
    }
    let (d, _) = maxent_reconstruct(m, settings.epsilon, settings.max_iter, warm)?;
    let (flux, _, rep) = split_at_threshold(m, &d, s_star, levels)?;
    let Some(rep) = rep else {
        let mut r = EvaporationStepResult::vanished(m);
        r.density = Some(d);
        return Ok(r);
    };
    let updated = translate(&rep, law, dt, s_star, &m.basis.exponents());
    Ok(EvaporationStepResult {
        updated: MomentVector { values: updated, ..*m },
        disappearance_flux: flux,
        quadrature_used: Some(rep),
        density: Some(d),
    })
}

/// Exact evolution of the discrete measure behind a boundary moment vector.
///
/// Vectors on the boundary of the moment space are carried by at most two atoms; they
/// have no maximum-entropy density, but their evolution is known exactly.
pub fn step_atomic(m: &MomentVector, law: &EvaporationLaw, dt: f64) -> Result<EvaporationStepResult> {
    let s_star = match trivial(m, law, dt)? {
        Some((r, _)) => return Ok(r),
        None => law.threshold(dt),
    };
    let basis = m.basis;
    let inv = pd_inversion(&m.values, (0.0, 1.0))?;
    let exps = basis.exponents();
    let mut flux = [0.0; 4];
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (x, w) in inv.rule.iter() {
        let s = basis.size_of(x);
        if s <= s_star {
            for (slot, &q) in flux.iter_mut().zip(&exps) {
                *slot += w * s.powf(q);
            }
        } else {
            nodes.push(s);
            weights.push(w);
        }
    }
    let matched_orders = (0..inv.matched_moments()).map(|k| k as f64 * basis.step()).collect();
    let rep = PrincipalRepresentation { nodes, weights, matched_orders, reduced: inv.is_reduced() };
    let updated = translate(&rep, law, dt, s_star, &exps);
    Ok(EvaporationStepResult {
        updated: MomentVector { values: updated, ..*m },
        disappearance_flux: flux,
        quadrature_used: Some(rep),
        density: None,
    })
}

/// Quadrature step that also accepts vectors on the boundary of the moment space.
pub fn step_nemo_robust(
    m: &MomentVector,
    law: &EvaporationLaw,
    dt: f64,
    n_neg: usize,
    settings: &MaxEntSettings,
    warm: Option<&MaxEntDensity>,
) -> Result<EvaporationStepResult> {
    if m.m0() > 0.0 && is_realizable(m, DEFAULT_TOL) == Realizability::Boundary {
        return step_atomic(m, law, dt);
    }
    match step_nemo_with(m, law, dt, n_neg, settings, warm) {
        Err(Error::NonConvergence(_)) | Err(Error::Conditioning(_)) | Err(Error::NotRealizable(_)) => {
            log::warn!("maximum-entropy reconstruction failed for {:?}; evolving its atoms instead", m.values);
            step_atomic(m, law, dt)
        }
        r => r,
    }
}

/// Coefficient of `xⁿ` in the expansion of `(1 - x)^β`.
pub fn series_coefficient(beta: f64, n: usize) -> f64 {
    let mut a = 1.0;
    for j in 0..n {
        a *= -(beta - j as f64) / (j as f64 + 1.0);
    }
    a
}

/// Difference between the exact shifted moments and their quadrature approximation.
///
/// Each entry is `Σₙ aₙ (KΔt)ⁿ (M_{β-n} - Σ wⱼ Sⱼ^{β-n})`. Orders reproduced by the
/// nodes contribute nothing beyond roundoff, so entries whose series terminates
/// inside the matched range (integer `β`) vanish; for the others the remainder of the
/// series is obtained by integrating the density directly.
pub fn truncation_error_even_orders(
    m: &MomentVector,
    law: &EvaporationLaw,
    dt: f64,
    n_neg: usize,
) -> Result<[f64; 4]> {
    let EvaporationLaw::D2 { .. } = law else {
        return Err(Error::InvalidArgument("truncation error is defined for the d² law only".into()));
    };
    if n_neg > MAX_NEGATIVE_LEVELS {
        return Err(Error::InvalidArgument(format!("at most {MAX_NEGATIVE_LEVELS} negative levels supported")));
    }
    if trivial(m, law, dt)?.is_some() {
        return Ok([0.0; 4]);
    }
    let s_star = law.threshold(dt);
    let settings = MaxEntSettings::default();
    let (d, _) = maxent_reconstruct(m, settings.epsilon, settings.max_iter, None)?;
    let levels = if s_star < MIN_THRESHOLD_WITH_NEGATIVE { 0 } else { n_neg };
    let (_, m_pos, rep) = split_at_threshold(m, &d, s_star, levels)?;
    let Some(rep) = rep else { return Ok([0.0; 4]) };
    let step = m.basis.step();
    let orders_neg: Vec<f64> = (1..=2 * levels).map(|a| -(a as f64) * step).collect();
    let m_neg = if levels > 0 { moments_of_density(&d, &orders_neg, (s_star, 1.0))? } else { Vec::new() };

    // Input moment of order q if the nodes reproduce it.
    let matched = |q: f64| -> Option<f64> {
        if !rep.matched_orders.iter().any(|&o| (o - q).abs() < 1e-12) {
            return None;
        }
        let idx = (q / step).round() as isize;
        if idx >= 0 {
            m_pos.get(idx as usize).copied()
        } else {
            m_neg.get((-idx - 1) as usize).copied()
        }
    };

    let exps = m.basis.exponents();
    let mut out = [0.0; 4];
    for (k, &beta) in exps.iter().enumerate() {
        let terminating = beta.fract() == 0.0;
        let mut series = 0.0;
        let mut partial_integrated = 0.0;
        let mut n = 0usize;
        loop {
            if terminating && n as f64 > beta {
                break;
            }
            let q = beta - n as f64;
            let Some(mq) = matched(q) else { break };
            let a = series_coefficient(beta, n) * s_star.powi(n as i32);
            series += a * mq;
            if !terminating {
                partial_integrated += a * moments_of_density(&d, &[q], (s_star, 1.0))?[0];
            }
            n += 1;
        }
        if !terminating {
            let shifted = shifted_moment(&d, s_star, beta);
            series += shifted - partial_integrated;
        }
        let quad: f64 = rep.nodes.iter().zip(&rep.weights).map(|(&s, &w)| w * (s - s_star).max(0.0).powf(beta)).sum();
        out[k] = series - quad;
    }
    Ok(out)
}

/// `∫_{s*}^1 (s - s*)^β n(s) ds`.
fn shifted_moment(d: &MaxEntDensity, s_star: f64, beta: f64) -> f64 {
    let umax = (1.0 - s_star).sqrt();
    let split = (2.0 * s_star.sqrt()).min(umax);
    let mut acc = 0.0;
    for (lo, hi) in [(0.0, split), (split, umax)] {
        gl_for_each(DEFAULT_ORDER, lo, hi, |u, w| {
            acc += w * 2.0 * u * (u * u).powf(beta) * evaluate_density(d, s_star + u * u);
        });
    }
    acc
}
