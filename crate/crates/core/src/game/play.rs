//! Playing the game: exact trajectories, the payoff, and the induction bound.
//!
//! The state starts at the origin and moves by
//! `ẋ = ξ̇₊α + ξ̇₋β`, `ẏ = ξ̇₋α + ξ̇₊β`. On an increasing stretch the
//! maximizer drives `x`, on a decreasing one it drives `y`.

use std::io::{self, Write};

use crate::error::{config, contract, domain, Result};
use crate::signal::{DrivingPath, Partition};
use crate::solver::theta;

use super::control::{PiecewiseControl, Strategy};

/// A played game sampled at the times where something can change.
///
/// `alpha[k]` and `beta[k]` hold on `[times[k], times[k+1])`; the last entry
/// repeats the final piece so every column has the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    xi: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    tau: Option<f64>,
    epsilon: Option<f64>,
}

#[inline]
fn split(d: f64) -> (f64, f64) {
    (d.max(0.0), (-d).max(0.0))
}

impl Trajectory {
    /// Checks the columns against the dynamics before accepting them.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        times: Vec<f64>,
        xi: Vec<f64>,
        x: Vec<f64>,
        y: Vec<f64>,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        tau: Option<f64>,
        epsilon: Option<f64>,
    ) -> Result<Self> {
        let n = times.len();
        if n < 2 || [xi.len(), x.len(), y.len(), alpha.len(), beta.len()].iter().any(|&l| l != n) {
            return config("trajectory columns must have equal length of at least 2");
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return config("trajectory times must start at 0 and increase strictly");
        }
        if x[0] != 0.0 || y[0] != 0.0 {
            return config("trajectories start at the origin");
        }
        if alpha.iter().chain(&beta).any(|c| !(c.abs() <= 1.0)) {
            return config("controls must lie in [-1, 1]");
        }
        for k in 0..n - 1 {
            let (up, down) = split(xi[k + 1] - xi[k]);
            let ex = x[k] + up * alpha[k] + down * beta[k];
            let ey = y[k] + down * alpha[k] + up * beta[k];
            let tol = 1e-9 * (1.0 + ex.abs() + ey.abs());
            if (x[k + 1] - ex).abs() > tol || (y[k + 1] - ey).abs() > tol {
                return config(format!("positions at t = {} do not follow the dynamics", times[k + 1]));
            }
        }
        Ok(Self { times, xi, x, y, alpha, beta, tau, epsilon })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// First time `|x − y|` reached `ε`, for `δ^ε` trajectories.
    pub fn tau(&self) -> Option<f64> {
        self.tau
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn final_position(&self) -> (f64, f64) {
        (*self.x.last().unwrap(), *self.y.last().unwrap())
    }

    fn interpolate(&self, col: &[f64], t: f64) -> Result<f64> {
        if !(0.0..=self.horizon()).contains(&t) {
            return domain(format!("time {t} outside [0, {}]", self.horizon()));
        }
        let k = self.times.partition_point(|&s| s <= t);
        if k == self.times.len() {
            return Ok(col[k - 1]);
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        Ok(col[k - 1] + (col[k] - col[k - 1]) * (t - t0) / (t1 - t0))
    }

    /// `(x(t), y(t))`; exact since velocities are constant between samples.
    pub fn position_at(&self, t: f64) -> Result<(f64, f64)> {
        Ok((self.interpolate(&self.x, t)?, self.interpolate(&self.y, t)?))
    }

    pub fn xi_at(&self, t: f64) -> Result<f64> {
        self.interpolate(&self.xi, t)
    }

    /// `max_t |x(t) − y(t)|`, attained at a sample.
    pub fn max_gap(&self) -> f64 {
        self.x.iter().zip(&self.y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// CSV with header `t,x,y,alpha,beta`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,y,alpha,beta")?;
        for k in 0..self.times.len() {
            writeln!(w, "{},{},{},{},{}", self.times[k], self.x[k], self.y[k], self.alpha[k], self.beta[k])?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// Knots and control breaks, plus multiples of `dt` that are not already
/// (numerically) present.
fn sample_times(path: &DrivingPath, beta: &PiecewiseControl, dt: f64) -> Vec<f64> {
    let horizon = path.horizon();
    let tol = 1e-12 * horizon.max(1.0);
    let mut hard: Vec<f64> = path.knots().iter().map(|&(t, _)| t).chain(beta.breaks().iter().copied()).collect();
    hard.sort_by(f64::total_cmp);
    hard.dedup_by(|a, b| (*a - *b).abs() <= tol);
    let steps = (horizon / dt).ceil() as usize;
    let mut all = hard.clone();
    for k in 1..steps {
        let t = k as f64 * dt;
        let near = hard.partition_point(|&h| h < t - tol);
        if near < hard.len() && (hard[near] - t).abs() <= tol {
            continue;
        }
        all.push(t);
    }
    all.sort_by(f64::total_cmp);
    all
}

fn probe_progressive(rule: &super::control::Rule, beta: &PiecewiseControl, t0: f64, t1: f64, alpha: f64, name: &str) -> Result<()> {
    for c in [-1.0, 0.0, 1.0] {
        let other = beta.overwrite_after(t1, c);
        if rule(&other, t0) != alpha {
            return contract(format!(
                "strategy '{name}' is not progressive: its control at t = {t0} changes when beta is altered after t = {t1}"
            ));
        }
    }
    Ok(())
}

struct Builder {
    times: Vec<f64>,
    xi: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl Builder {
    fn push(&mut self, t: f64, xi: f64, a: f64, b: f64) {
        let (up, down) = split(xi - self.xi.last().unwrap());
        let x = self.x.last().unwrap() + up * a + down * b;
        let y = self.y.last().unwrap() + down * a + up * b;
        self.alpha.push(a);
        self.beta.push(b);
        self.times.push(t);
        self.xi.push(xi);
        self.x.push(x);
        self.y.push(y);
    }
}

/// Plays `strat` against `beta` over `[0, T]`.
///
/// Samples are taken at the path knots, the control breaks and multiples of
/// `dt`. For `δ^ε` the switching time `τ` is located exactly and inserted as
/// a sample. Custom strategies are probed for look-ahead at every sample.
pub fn simulate(path: &DrivingPath, strat: &Strategy, beta: &PiecewiseControl, dt: f64) -> Result<Trajectory> {
    let horizon = path.horizon();
    if (beta.horizon() - horizon).abs() > 1e-12 * horizon.max(1.0) {
        return config(format!("control horizon {} differs from path horizon {horizon}", beta.horizon()));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return config(format!("dt must be positive, got {dt}"));
    }
    let times = sample_times(path, beta, dt);
    let xi_at = |t: f64| path.eval(t.min(horizon));
    let mut b = Builder {
        times: vec![0.0],
        xi: vec![path.start_value()],
        x: vec![0.0],
        y: vec![0.0],
        alpha: Vec::new(),
        beta: Vec::new(),
    };
    let mut tau = None;
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let xi1 = xi_at(t1)?;
        let bk = beta.at(t0);
        match strat {
            Strategy::Constant(a) => b.push(t1, xi1, *a, bk),
            Strategy::Custom { name, rule } => {
                let a = rule(beta, t0);
                if !(a.abs() <= 1.0) {
                    return contract(format!("strategy '{name}' returned {a}, outside [-1, 1]"));
                }
                probe_progressive(rule.as_ref(), beta, t0, t1, a, name)?;
                b.push(t1, xi1, a, bk);
            }
            Strategy::DeltaEps(_) if tau.is_some() => b.push(t1, xi1, bk, bk),
            Strategy::DeltaEps(eps) => {
                let xi0 = *b.xi.last().unwrap();
                let (up, down) = split(xi1 - xi0);
                let g0 = b.x.last().unwrap() - b.y.last().unwrap();
                let dg = (up + down * bk) - (down + up * bk);
                if (g0 + dg).abs() < *eps {
                    b.push(t1, xi1, 1.0, bk);
                    continue;
                }
                let theta = ((eps * dg.signum() - g0) / dg).clamp(0.0, 1.0);
                let tm = t0 + theta * (t1 - t0);
                if theta < 1.0 && tm > t0 {
                    b.push(tm, xi_at(tm)?, 1.0, bk);
                    b.push(t1, xi1, bk, bk);
                } else if theta < 1.0 {
                    b.push(t1, xi1, bk, bk);
                } else {
                    b.push(t1, xi1, 1.0, bk);
                }
                tau = Some(tm);
            }
        }
    }
    let (la, lb) = (*b.alpha.last().unwrap(), *b.beta.last().unwrap());
    b.alpha.push(la);
    b.beta.push(lb);
    Trajectory::new(b.times, b.xi, b.x, b.y, b.alpha, b.beta, tau, strat.epsilon())
}

/// `J = |x − y| + Θ(x, y)` at a terminal position.
pub fn terminal_payoff(x: f64, y: f64, radius: f64) -> f64 {
    (x - y).abs() + theta(x, y, radius)
}

/// Payoff of a finished trajectory.
pub fn payoff(traj: &Trajectory, radius: f64) -> f64 {
    let (x, y) = traj.final_position();
    terminal_payoff(x, y, radius)
}

/// Result of checking `min{x, y}(tᵢ) ≥ Σ_{j<i} |Δξⱼ| − i·ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct InductionOutcome {
    pub holds: bool,
    /// First partition index where the bound fails.
    pub witness: Option<usize>,
    /// `min{x, y}(tᵢ)` minus the bound, per partition point.
    pub margins: Vec<f64>,
}

/// Checks the induction bound along a `δ^ε` trajectory that never switched.
pub fn induction_check(traj: &Trajectory, partition: &Partition, epsilon: f64) -> Result<InductionOutcome> {
    if let Some(t) = traj.tau() {
        return contract(format!("the strategy switched at t = {t}; the induction bound does not apply"));
    }
    let gap = traj.max_gap();
    if gap >= epsilon {
        return contract(format!("|x - y| reaches {gap} >= epsilon = {epsilon}; the induction bound does not apply"));
    }
    let mut margins = Vec::with_capacity(partition.times().len());
    let mut sum = 0.0;
    let mut prev_xi = traj.xi_at(partition.times()[0])?;
    for (i, &t) in partition.times().iter().enumerate() {
        let xi = traj.xi_at(t)?;
        sum += (xi - prev_xi).abs();
        prev_xi = xi;
        let (x, y) = traj.position_at(t)?;
        margins.push(x.min(y) - (sum - i as f64 * epsilon));
    }
    let witness = margins.iter().position(|&m| m < -1e-12);
    Ok(InductionOutcome { holds: witness.is_none(), witness, margins })
}

#[cfg(test)]
mod tests {
    use super::super::control::delta_eps;
    use super::*;

    fn zigzag() -> DrivingPath {
        DrivingPath::zigzag(1.0, 4, 1.0).unwrap()
    }

    fn up() -> DrivingPath {
        DrivingPath::from_values(&[0.0, 1.0], 1.0).unwrap()
    }

    #[test]
    fn tracking_reaches_total_variation() {
        let beta = PiecewiseControl::constant(1.0, 1.0).unwrap();
        let tr = simulate(&zigzag(), &delta_eps(0.1).unwrap(), &beta, 0.01).unwrap();
        assert_eq!(tr.final_position(), (4.0, 4.0));
        assert_eq!(tr.tau(), None);
        assert_eq!(tr.max_gap(), 0.0);
        assert!(tr.alpha().iter().all(|&a| a == 1.0));
        assert_eq!(payoff(&tr, 1.0), 1.0);
    }

    #[test]
    fn decoupled_constant_play() {
        let beta = PiecewiseControl::constant(-1.0, 1.0).unwrap();
        let tr = simulate(&up(), &Strategy::constant(1.0).unwrap(), &beta, 0.1).unwrap();
        assert_eq!(tr.final_position(), (1.0, -1.0));
    }

    #[test]
    fn gap_freezes_after_switch() {
        let beta = PiecewiseControl::uniform(vec![0.0, -1.0, 1.0, 0.5], 1.0).unwrap();
        let tr = simulate(&zigzag(), &delta_eps(0.1).unwrap(), &beta, 0.05).unwrap();
        let tau = tr.tau().expect("switch happens");
        assert!(tau > 0.0 && tau < 0.25);
        assert!((tau - 0.025).abs() < 1e-12);
        for (k, &t) in tr.times().iter().enumerate() {
            if t >= tau {
                assert!(((tr.x()[k] - tr.y()[k]).abs() - 0.1).abs() < 1e-12);
                assert_eq!(tr.alpha()[k], tr.beta()[k]);
            }
        }
        assert!(payoff(&tr, 1.0) >= 0.1 - 1e-12);
    }

    #[test]
    fn payoff_examples() {
        assert_eq!(terminal_payoff(4.0, 4.0, 1.0), 1.0);
        assert_eq!(terminal_payoff(0.0, 0.0, 1.0), 0.0);
        assert_eq!(terminal_payoff(1.5, 1.5, 2.5), 0.0);
        // Θ(0.3, 0.1) = clamp(0.1 − 1 + 1, 0, 1) = 0.1.
        assert!((terminal_payoff(0.3, 0.1, 1.0) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn induction_examples() {
        let part = Partition::at_knots(&zigzag());
        let beta = PiecewiseControl::constant(1.0, 1.0).unwrap();
        let tr = simulate(&zigzag(), &delta_eps(0.1).unwrap(), &beta, 0.01).unwrap();
        let out = induction_check(&tr, &part, 0.1).unwrap();
        assert!(out.holds);
        assert!((out.margins[4] - 0.4).abs() < 1e-12);

        // min{x, y}(t₁) = |Δξ₀| − 2ε on the first stretch.
        let fake = Strategy::custom("fixed", |b: &PiecewiseControl, t| if t < 0.25 { 0.8 } else { b.at(t) });
        let beta = PiecewiseControl::new(vec![0.0, 0.25, 1.0], vec![0.8, 1.0]).unwrap();
        let tr = simulate(&zigzag(), &fake, &beta, 0.25).unwrap();
        let out = induction_check(&tr, &part, 0.1).unwrap();
        assert!(!out.holds);
        assert_eq!(out.witness, Some(1));

        let beta = PiecewiseControl::constant(-1.0, 1.0).unwrap();
        let tr = simulate(&zigzag(), &delta_eps(0.1).unwrap(), &beta, 0.01).unwrap();
        assert!(matches!(induction_check(&tr, &part, 0.1), Err(crate::Error::Contract(_))));
    }

    #[test]
    fn look_ahead_is_caught() {
        let cheat = Strategy::custom("peek", |b: &PiecewiseControl, t| b.at((t + 0.3).min(1.0)));
        let beta = PiecewiseControl::uniform(vec![1.0, -1.0], 1.0).unwrap();
        let err = simulate(&up(), &cheat, &beta, 0.1).unwrap_err();
        assert!(matches!(err, crate::Error::Contract(_)));
        let honest = Strategy::custom("copy", |b: &PiecewiseControl, t| b.at(t));
        assert!(simulate(&up(), &honest, &beta, 0.1).is_ok());
    }

    #[test]
    fn rejects_inconsistent_trajectories() {
        let ok = Trajectory::new(
            vec![0.0, 1.0],
            vec![0.0, 1.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
            None,
            None,
        );
        assert!(ok.is_ok());
        let bad = Trajectory::new(
            vec![0.0, 1.0],
            vec![0.0, 1.0],
            vec![0.0, 0.5],
            vec![0.0, -1.0],
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
            None,
            None,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn csv_header() {
        let beta = PiecewiseControl::constant(0.0, 1.0).unwrap();
        let tr = simulate(&up(), &Strategy::constant(0.0).unwrap(), &beta, 0.5).unwrap();
        let csv = tr.to_csv_string();
        assert_eq!(csv.lines().next(), Some("t,x,y,alpha,beta"));
        assert_eq!(csv.lines().count(), 4);
    }
}
