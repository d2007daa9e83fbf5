//! Experiment configuration: the JSON schema, defaults and validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use roughhj::signal::PathSpec;
use roughhj::solver::{Engine, Ordering};
use roughhj::DrivingPath;
use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    Theorem1,
    Separation,
    Stationary,
    ConstantBall,
    Cancellation,
    ClassicalSpeed,
    Crosscheck,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 7] = [
        ExperimentName::Theorem1,
        ExperimentName::Separation,
        ExperimentName::Stationary,
        ExperimentName::ConstantBall,
        ExperimentName::Cancellation,
        ExperimentName::ClassicalSpeed,
        ExperimentName::Crosscheck,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentName::Theorem1 => "theorem1",
            ExperimentName::Separation => "separation",
            ExperimentName::Stationary => "stationary",
            ExperimentName::ConstantBall => "constant_ball",
            ExperimentName::Cancellation => "cancellation",
            ExperimentName::ClassicalSpeed => "classical_speed",
            ExperimentName::Crosscheck => "crosscheck",
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, LabError> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| LabError::Config(format!("unknown experiment '{s}'")))
    }
}

/// A path either in the short command-line form or as a tagged object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PathField {
    Short(String),
    Spec(PathSpec),
}

impl PathField {
    pub fn spec(&self) -> Result<PathSpec, LabError> {
        match self {
            PathField::Short(s) => Ok(PathSpec::parse_short(s)?),
            PathField::Spec(p) => Ok(p.clone()),
        }
    }

    pub fn build(&self) -> Result<DrivingPath, LabError> {
        Ok(self.spec()?.build()?)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Half-width; chosen from the dependence radius when absent.
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSpec {
    #[serde(default = "default_kind")]
    pub kind: Engine,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(default = "default_ordering")]
    pub ordering: Ordering,
}

fn default_kind() -> Engine {
    Engine::Morphological
}

fn default_m() -> usize {
    64
}

fn default_ordering() -> Ordering {
    Ordering::ErodeFirst
}

impl Default for EngineSpec {
    fn default() -> Self {
        Self { kind: default_kind(), m: default_m(), cfl: None, ordering: default_ordering() }
    }
}

/// Discrete tolerances. The continuum statements are exact; these numbers
/// are choices of this artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Minimum of `u(T, 0, 0)` at the finest ladder step.
    pub theorem1_min: f64,
    /// Successive ladder differences must shrink by at least this factor.
    pub ladder_ratio: f64,
    /// Differences at or below this count as converged.
    pub diff_floor: f64,
    /// Threshold for statements that hold exactly in exact arithmetic.
    pub exact: f64,
    pub crosscheck_gap: f64,
    pub crosscheck_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            theorem1_min: 0.65,
            ladder_ratio: 0.8,
            diff_floor: 1e-12,
            exact: 1e-12,
            crosscheck_gap: 0.1,
            crosscheck_ratio: 0.9,
        }
    }
}

/// One experiment run. Absent fields take per-experiment defaults; see
/// [`ExperimentSpec::resolved`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: ExperimentName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathField>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Plateau level for `constant_ball`.
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    /// Speed constant of the Hamiltonian.
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    /// Slope of the cone outside the plateau for `constant_ball`.
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    /// Semigroup time for `cancellation`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub engine: EngineSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<f64>>,
    /// Observation times for `classical_speed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    /// Game steps per monotone stretch for `crosscheck`; one cell per step when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game_substeps: Option<usize>,
    /// Random cases for the discrete identity in `cancellation`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cases: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Lets `theorem1` pass when the bound is 0 and there is nothing to check.
    #[serde(default)]
    pub vacuous_pass: bool,
    /// Upper limit on grid-node updates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
}

pub const DEFAULT_BUDGET: u64 = 100_000_000_000;

impl ExperimentSpec {
    pub fn new(experiment: ExperimentName) -> Self {
        Self {
            experiment,
            path: None,
            radius: None,
            epsilon: None,
            level: None,
            speed: None,
            slope: None,
            delta: None,
            grid: GridSpec::default(),
            engine: EngineSpec::default(),
            ladder: None,
            times: None,
            game_substeps: None,
            cases: None,
            seed: 0,
            tolerances: Tolerances::default(),
            out: None,
            vacuous_pass: false,
            budget: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| LabError::Config(format!("bad config: {e}")))
    }

    /// Fills every absent field with the experiment's default and validates.
    pub fn resolved(&self) -> Result<Self, LabError> {
        let mut s = self.clone();
        let short = |p: &str| Some(PathField::Short(p.to_string()));
        use ExperimentName::*;
        let (path, radius, ladder) = match s.experiment {
            Theorem1 | Separation => (Some("zigzag:1,4,1"), 1.0, Some(vec![0.04, 0.02, 0.01])),
            Stationary => (Some("zigzag:1,4,1"), 1.0, Some(vec![0.08, 0.04, 0.02])),
            ConstantBall => (Some("zigzag:0.5,2,1"), 2.0, None),
            Cancellation => (None, 1.5, Some(vec![0.02, 0.01, 0.005, 0.0025])),
            ClassicalSpeed => (Some("knots:0,0;1,1"), 2.0, None),
            Crosscheck => (Some("zigzag:1,1,1"), 2.0, Some(vec![0.05, 0.025, 0.0125])),
        };
        s.path = s.path.or_else(|| path.and_then(short));
        s.radius = s.radius.or(Some(radius));
        if s.ladder.is_none() {
            s.ladder = ladder;
        }
        match s.experiment {
            Stationary | ConstantBall | ClassicalSpeed => {
                s.grid.dx = s.grid.dx.or(Some(0.02));
            }
            Crosscheck => {
                s.grid.half_width = s.grid.half_width.or(Some(4.0));
            }
            _ => {}
        }
        if s.experiment == ConstantBall {
            s.level = s.level.or(Some(3.0));
        }
        if matches!(s.experiment, ConstantBall | ClassicalSpeed) {
            s.speed = s.speed.or(Some(1.0));
            s.slope = s.slope.or(s.speed);
        }
        if s.experiment == ClassicalSpeed && s.times.is_none() {
            s.times = Some(vec![0.5, 1.0]);
        }
        if s.experiment == Cancellation {
            s.delta = s.delta.or(Some(0.3));
            s.cases = s.cases.or(Some(1000));
        }
        s.budget = s.budget.or(Some(DEFAULT_BUDGET));
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), LabError> {
        let bad = |m: String| Err(LabError::Config(m));
        let positive = |name: &str, v: Option<f64>| -> Result<(), LabError> {
            match v {
                Some(x) if !(x > 0.0 && x.is_finite()) => bad(format!("{name} must be positive, got {x}")),
                _ => Ok(()),
            }
        };
        positive("grid.dx", self.grid.dx)?;
        positive("grid.L", self.grid.half_width)?;
        positive("C", self.speed)?;
        positive("delta", self.delta)?;
        if let Some(r) = self.radius {
            if !(r >= 0.0 && r.is_finite()) {
                return bad(format!("R must be nonnegative, got {r}"));
            }
        }
        if let Some(k) = self.slope {
            if !(k >= 0.0 && k.is_finite()) {
                return bad(format!("K must be nonnegative, got {k}"));
            }
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return bad(format!("epsilon must lie in (0, 1), got {e}"));
            }
        }
        if let Some(a) = self.level {
            if !a.is_finite() {
                return bad("A must be finite".into());
            }
        }
        if self.engine.m == 0 {
            return bad("engine.m must be at least 1".into());
        }
        if let Some(l) = &self.ladder {
            if l.is_empty() || l.iter().any(|d| !(*d > 0.0)) || l.windows(2).any(|w| !(w[1] < w[0])) {
                return bad("ladder must be a nonempty, strictly decreasing list of positive spacings".into());
            }
        }
        if let Some(ts) = &self.times {
            if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0)) {
                return bad("times must be a nonempty list of positive times".into());
            }
        }
        if self.game_substeps == Some(0) || self.cases == Some(0) {
            return bad("game_substeps and cases must be at least 1".into());
        }
        self.path.as_ref().map(|p| p.build()).transpose()?;
        Ok(())
    }

    pub fn path(&self) -> Result<DrivingPath, LabError> {
        self.path.as_ref().ok_or_else(|| LabError::Config("no path configured".into()))?.build()
    }

    pub fn r(&self) -> f64 {
        self.radius.expect("resolved")
    }

    pub fn ladder(&self) -> &[f64] {
        self.ladder.as_deref().expect("resolved")
    }
}
