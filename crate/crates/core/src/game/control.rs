//! Piecewise-constant controls and the maximizer's strategies.

use std::fmt;
use std::sync::Arc;

use crate::error::{config, Result};

/// Control `c(t) = values[k]` for `t ∈ [breaks[k], breaks[k+1])`, the last
/// piece closed at `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseControl {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseControl {
    /// `breaks` runs from 0 to `T` and has one more entry than `values`.
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 || values.is_empty() {
            return config("a control needs one more break than values");
        }
        if breaks[0] != 0.0 || breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return config("control breaks must start at 0 and increase strictly");
        }
        if values.iter().any(|v| !(v.abs() <= 1.0)) {
            return config("control values must lie in [-1, 1]");
        }
        Ok(Self { breaks, values })
    }

    pub fn constant(value: f64, horizon: f64) -> Result<Self> {
        Self::new(vec![0.0, horizon], vec![value])
    }

    /// `values.len()` equal pieces on `[0, T]`.
    pub fn uniform(values: Vec<f64>, horizon: f64) -> Result<Self> {
        let n = values.len();
        let breaks = (0..=n).map(|k| horizon * k as f64 / n as f64).collect();
        Self::new(breaks, values)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    /// Right-continuous evaluation; `T` gets the last value.
    pub fn at(&self, t: f64) -> f64 {
        let k = self.breaks.partition_point(|&b| b <= t).saturating_sub(1);
        self.values[k.min(self.values.len() - 1)]
    }

    /// Same control up to `t`, then `value`.
    pub fn overwrite_after(&self, t: f64, value: f64) -> Self {
        if t >= self.horizon() {
            return self.clone();
        }
        let mut breaks: Vec<f64> = self.breaks.iter().copied().take_while(|&b| b < t).collect();
        let mut values: Vec<f64> = self.values[..breaks.len()].to_vec();
        if breaks.is_empty() {
            breaks.push(0.0);
        } else {
            breaks.push(t);
        }
        values.push(value);
        breaks.push(self.horizon());
        Self { breaks, values }
    }
}

/// Rule `α(t) = rule(β, t)` for a custom strategy. It may look at `β` on
/// `[0, t]` and at the value `β` takes on the piece starting at `t`.
pub type Rule = dyn Fn(&PiecewiseControl, f64) -> f64 + Send + Sync;

/// A maximizer strategy: a map from the minimizer's control to a control.
#[derive(Clone)]
pub enum Strategy {
    /// Push `x` right at full speed until `|x − y|` reaches `ε`, then copy `β`.
    DeltaEps(f64),
    Constant(f64),
    Custom { name: String, rule: Arc<Rule> },
}

impl fmt::Debug for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::DeltaEps(e) => write!(f, "DeltaEps({e})"),
            Strategy::Constant(a) => write!(f, "Constant({a})"),
            Strategy::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// The strategy `δ^ε`.
pub fn delta_eps(epsilon: f64) -> Result<Strategy> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return config(format!("epsilon must lie in (0, 1), got {epsilon}"));
    }
    Ok(Strategy::DeltaEps(epsilon))
}

impl Strategy {
    pub fn constant(a: f64) -> Result<Self> {
        if !(a.abs() <= 1.0) {
            return config(format!("constant control must lie in [-1, 1], got {a}"));
        }
        Ok(Strategy::Constant(a))
    }

    pub fn custom(name: impl Into<String>, rule: impl Fn(&PiecewiseControl, f64) -> f64 + Send + Sync + 'static) -> Self {
        Strategy::Custom { name: name.into(), rule: Arc::new(rule) }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self {
            Strategy::DeltaEps(e) => Some(*e),
            _ => None,
        }
    }
}

/// `n` equally spaced values from −1 to 1; `n` must be odd and at least 3.
pub fn control_levels(n: usize) -> Result<Vec<f64>> {
    if n < 3 || n.is_multiple_of(2) {
        return config(format!("control levels must be odd and at least 3, got {n}"));
    }
    let half = (n / 2) as f64;
    Ok((0..n).map(|k| (k as f64 - half) / half).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_contain_extremes_and_zero() {
        assert_eq!(control_levels(3).unwrap(), vec![-1.0, 0.0, 1.0]);
        let l = control_levels(21).unwrap();
        assert_eq!((l[0], l[10], l[20]), (-1.0, 0.0, 1.0));
        assert!(control_levels(4).is_err());
        assert!(control_levels(1).is_err());
    }

    #[test]
    fn evaluation_is_right_continuous() {
        let c = PiecewiseControl::uniform(vec![1.0, -1.0, 0.0, 0.5], 1.0).unwrap();
        assert_eq!(c.at(0.0), 1.0);
        assert_eq!(c.at(0.25), -1.0);
        assert_eq!(c.at(0.7), 0.0);
        assert_eq!(c.at(1.0), 0.5);
    }

    #[test]
    fn overwrite_keeps_the_past() {
        let c = PiecewiseControl::uniform(vec![1.0, -1.0, 0.0, 0.5], 1.0).unwrap();
        let d = c.overwrite_after(0.6, -1.0);
        for t in [0.0, 0.1, 0.3, 0.55] {
            assert_eq!(c.at(t), d.at(t));
        }
        assert_eq!(d.at(0.6), -1.0);
        assert_eq!(d.at(1.0), -1.0);
        assert_eq!(c.overwrite_after(0.0, 0.0), PiecewiseControl::constant(0.0, 1.0).unwrap());
    }

    #[test]
    fn rejects_bad_controls() {
        assert!(PiecewiseControl::new(vec![0.0, 1.0], vec![2.0]).is_err());
        assert!(PiecewiseControl::new(vec![0.1, 1.0], vec![0.0]).is_err());
        assert!(PiecewiseControl::new(vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(delta_eps(0.0).is_err());
        assert!(delta_eps(1.0).is_err());
        assert!(Strategy::constant(1.5).is_err());
    }
}
