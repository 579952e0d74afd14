use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaporation::{EvaporationLaw, MAX_NEGATIVE_LEVELS};
use crate::maxent::{MaxEntSettings, DEFAULT_EPSILON, DEFAULT_MAX_ITER};
use crate::moment_space::ExponentBasis;
use crate::transport::{Order, Splitting};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    Evap0dSmooth,
    Evap0dSquare,
    Evap0dLinear,
    Transport1dConvergence,
    Crossing1d,
    #[serde(rename = "taylor_green_2d")]
    TaylorGreen2d,
    Custom,
}

impl CaseId {
    pub fn name(self) -> &'static str {
        match self {
            CaseId::Evap0dSmooth => "evap0d_smooth",
            CaseId::Evap0dSquare => "evap0d_square",
            CaseId::Evap0dLinear => "evap0d_linear",
            CaseId::Transport1dConvergence => "transport1d_convergence",
            CaseId::Crossing1d => "crossing1d",
            CaseId::TaylorGreen2d => "taylor_green_2d",
            CaseId::Custom => "custom",
        }
    }

    pub fn is_0d(self) -> bool {
        matches!(self, CaseId::Evap0dSmooth | CaseId::Evap0dSquare | CaseId::Evap0dLinear | CaseId::Custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// Fixed step; when absent the step follows from `cfl`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub cfl: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    D2,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GasField {
    None,
    TaylorGreen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub law: LawKind,
    /// d² rate.
    pub k: f64,
    /// Linear-law coefficients, `R_S = -(a + b S)`.
    pub a: f64,
    pub b: f64,
    /// Stokes coefficient; absent means no drag.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub gas_velocity: GasField,
}

impl PhysicsConfig {
    pub fn law(&self) -> EvaporationLaw {
        match self.law {
            LawKind::D2 => EvaporationLaw::d2(self.k),
            LawKind::Linear => EvaporationLaw::Linear { a: self.a, b: self.b },
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta.unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaporationScheme {
    Nemo,
    FullyKinetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub transport_order: Order,
    pub evaporation: EvaporationScheme,
    pub n_neg: usize,
    pub splitting: Splitting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxEntConfig {
    pub epsilon: f64,
    pub max_iter: usize,
}

impl MaxEntConfig {
    pub fn settings(&self) -> MaxEntSettings {
        MaxEntSettings { epsilon: self.epsilon, max_iter: self.max_iter }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Snapshot times; the final time is always written.
    pub times: Vec<f64>,
    pub directory: String,
}

/// Initial data of the `custom` (0D) case: either moments or multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<[f64; 4]>,
    #[serde(default)]
    pub velocity: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub case_id: CaseId,
    pub basis: ExponentBasis,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub physics: PhysicsConfig,
    pub schemes: SchemeConfig,
    pub maxent: MaxEntConfig,
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
}

impl CaseConfig {
    /// Complete configuration of a case with its documented parameters.
    pub fn defaults_for(case_id: CaseId) -> Self {
        let mut cfg = CaseConfig {
            case_id,
            basis: ExponentBasis::Fractional,
            grid: GridConfig { nx: 1, ny: 1 },
            time: TimeConfig { dt: None, cfl: 0.5, t_end: 1.0 },
            physics: PhysicsConfig {
                law: LawKind::D2,
                k: 1.0,
                a: 0.0,
                b: 0.0,
                theta: None,
                gas_velocity: GasField::None,
            },
            schemes: SchemeConfig {
                transport_order: Order::Second,
                evaporation: EvaporationScheme::Nemo,
                n_neg: 1,
                splitting: Splitting::Strang,
            },
            maxent: MaxEntConfig { epsilon: DEFAULT_EPSILON, max_iter: DEFAULT_MAX_ITER },
            output: OutputConfig { times: Vec::new(), directory: "out".into() },
            initial: None,
        };
        match case_id {
            CaseId::Evap0dSmooth => {
                cfg.time.dt = Some(0.002);
                cfg.time.t_end = 0.2;
            }
            CaseId::Evap0dSquare => {
                cfg.time.dt = Some(6e-3);
                cfg.time.t_end = 0.6;
            }
            CaseId::Evap0dLinear => {
                cfg.time.dt = Some(2e-3);
                cfg.time.t_end = 0.6;
                cfg.physics.law = LawKind::Linear;
                cfg.physics.a = 0.5;
                cfg.physics.b = 1.0;
            }
            CaseId::Transport1dConvergence => {
                cfg.grid.nx = 128;
                cfg.time.t_end = 0.8;
                cfg.physics.k = 0.0;
            }
            CaseId::Crossing1d => {
                cfg.grid.nx = 128;
                cfg.time.t_end = 1.2;
                cfg.physics.k = 0.0;
            }
            CaseId::TaylorGreen2d => {
                cfg.grid = GridConfig { nx: 128, ny: 128 };
                cfg.physics.k = 0.5;
                cfg.physics.theta = Some(0.1);
                cfg.physics.gas_velocity = GasField::TaylorGreen;
                cfg.output.times = vec![0.5];
            }
            CaseId::Custom => {
                cfg.time.dt = Some(1e-3);
                cfg.time.t_end = 0.1;
                cfg.initial = Some(InitialConfig { moments: None, lambdas: Some([0.0; 4]), velocity: [0.0; 2] });
            }
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.grid.nx == 0 || self.grid.ny == 0 {
            return bad(format!("grid sizes must be positive, got {}x{}", self.grid.nx, self.grid.ny));
        }
        if self.case_id.is_0d() && (self.grid.nx, self.grid.ny) != (1, 1) {
            return bad(format!("{} is a 0D case; grid must be 1x1", self.case_id.name()));
        }
        if matches!(self.case_id, CaseId::Transport1dConvergence | CaseId::Crossing1d) && self.grid.ny != 1 {
            return bad(format!("{} is a 1D case; grid.ny must be 1", self.case_id.name()));
        }
        if !(self.time.t_end > 0.0) || !self.time.t_end.is_finite() {
            return bad(format!("t_end must be positive, got {}", self.time.t_end));
        }
        if let Some(dt) = self.time.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if !(self.time.cfl > 0.0 && self.time.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.time.cfl));
        }
        if self.schemes.n_neg > MAX_NEGATIVE_LEVELS {
            return bad(format!(
                "n_neg = {} outside the supported range 0..={MAX_NEGATIVE_LEVELS}",
                self.schemes.n_neg
            ));
        }
        if !self.case_id.is_0d() && self.schemes.evaporation == EvaporationScheme::FullyKinetic {
            return bad(format!("{} couples drag to the quadrature update; use evaporation = \"nemo\"", self.case_id.name()));
        }
        let p = &self.physics;
        if !(p.k >= 0.0) || !(p.a >= 0.0) || !(p.b >= 0.0) {
            return bad("evaporation coefficients must be non-negative".into());
        }
        if let Some(theta) = p.theta {
            if !(theta > 0.0) {
                return bad(format!("theta must be positive, got {theta}"));
            }
        }
        if !(self.maxent.epsilon > 0.0) || self.maxent.max_iter == 0 {
            return bad("maxent.epsilon and maxent.max_iter must be positive".into());
        }
        if self.output.times.iter().any(|&t| !(t >= 0.0) || t > self.time.t_end) {
            return bad(format!("output times must lie in [0, t_end = {}]", self.time.t_end));
        }
        match (&self.case_id, &self.initial) {
            (CaseId::Custom, None) => return bad("the custom case needs an [initial] section".into()),
            (CaseId::Custom, Some(init)) => {
                if init.moments.is_some() == init.lambdas.is_some() {
                    return bad("[initial] needs exactly one of `moments` or `lambdas`".into());
                }
            }
            (_, Some(_)) => return bad(format!("[initial] is only used by the custom case, not {}", self.case_id.name())),
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for id in [
            CaseId::Evap0dSmooth,
            CaseId::Evap0dSquare,
            CaseId::Evap0dLinear,
            CaseId::Transport1dConvergence,
            CaseId::Crossing1d,
            CaseId::TaylorGreen2d,
            CaseId::Custom,
        ] {
            CaseConfig::defaults_for(id).validate().unwrap();
        }
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut c = CaseConfig::defaults_for(CaseId::Evap0dSmooth);
        c.schemes.n_neg = 5;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = CaseConfig::defaults_for(CaseId::Evap0dSmooth);
        c.grid.nx = 4;
        assert!(c.validate().is_err());
        let mut c = CaseConfig::defaults_for(CaseId::TaylorGreen2d);
        c.output.times = vec![2.0];
        assert!(c.validate().is_err());
        let mut c = CaseConfig::defaults_for(CaseId::Custom);
        c.initial.as_mut().unwrap().moments = Some([1.0, 0.5, 0.3, 0.2]);
        assert!(c.validate().is_err());
    }
}
