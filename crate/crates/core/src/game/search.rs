//! Searching for the minimizer's best reply to a fixed strategy.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{config, Result};
use crate::signal::DrivingPath;

use super::control::{control_levels, PiecewiseControl, Strategy};
use super::play::{payoff, simulate, terminal_payoff};

/// Largest family the exhaustive search accepts: all `{−1, 0, 1}` controls on 12 pieces.
pub const EXHAUSTIVE_CAP: u64 = 531_441;

/// Controls constant on `pieces` equal subintervals with values among `levels`
/// equally spaced points of `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlFamily {
    /// Every member is played out.
    Exhaustive { pieces: usize, levels: usize },
    /// Dynamic programming over the state at piece boundaries; needs a
    /// strategy whose future depends only on that state.
    BestResponse { pieces: usize, levels: usize },
}

impl ControlFamily {
    fn shape(&self) -> (usize, usize) {
        match *self {
            ControlFamily::Exhaustive { pieces, levels } | ControlFamily::BestResponse { pieces, levels } => {
                (pieces, levels)
            }
        }
    }

    /// `levels^pieces`, saturating.
    pub fn size(&self) -> u64 {
        let (pieces, levels) = self.shape();
        (levels as u64).saturating_pow(pieces as u32)
    }

    /// Member number `code`; the first piece is the most significant digit.
    pub fn member(&self, code: u64, horizon: f64) -> Result<PiecewiseControl> {
        let (pieces, levels) = self.shape();
        let values = control_levels(levels)?;
        let mut digits = vec![0.0; pieces];
        let mut c = code;
        for d in digits.iter_mut().rev() {
            *d = values[(c % levels as u64) as usize];
            c /= levels as u64;
        }
        PiecewiseControl::uniform(digits, horizon)
    }

    fn validate(&self) -> Result<()> {
        let (pieces, levels) = self.shape();
        control_levels(levels)?;
        if pieces == 0 {
            return config("a control family needs at least one piece");
        }
        if let ControlFamily::Exhaustive { .. } = self {
            if pieces > 12 || self.size() > EXHAUSTIVE_CAP {
                return config(format!(
                    "exhaustive search over {levels}^{pieces} controls exceeds the cap of {EXHAUSTIVE_CAP}"
                ));
            }
        }
        Ok(())
    }
}

/// The minimizing control found and what it achieves.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub beta: PiecewiseControl,
    pub payoff: f64,
    /// Controls played out (exhaustive) or states expanded (best response).
    pub evaluated: u64,
}

/// `min_β J(strat(β), β)` over a finite control family.
pub fn adversary_search(path: &DrivingPath, strat: &Strategy, radius: f64, family: ControlFamily) -> Result<SearchOutcome> {
    family.validate()?;
    match family {
        ControlFamily::Exhaustive { .. } => exhaustive(path, strat, radius, family),
        ControlFamily::BestResponse { pieces, levels } => best_response(path, strat, radius, pieces, levels),
    }
}

fn exhaustive(path: &DrivingPath, strat: &Strategy, radius: f64, family: ControlFamily) -> Result<SearchOutcome> {
    let horizon = path.horizon();
    let (pieces, _) = family.shape();
    let dt = horizon / pieces as f64;
    let scored: Result<Vec<(f64, u64)>> = (0..family.size())
        .into_par_iter()
        .map(|code| {
            let beta = family.member(code, horizon)?;
            Ok((payoff(&simulate(path, strat, &beta, dt)?, radius), code))
        })
        .collect();
    let (best, code) = scored?
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("family is nonempty");
    Ok(SearchOutcome { beta: family.member(code, horizon)?, payoff: best, evaluated: family.size() })
}

#[derive(Clone, Copy)]
struct State {
    x: f64,
    y: f64,
    switched: bool,
}

/// Advances over a stretch with signal increments `(up, down)` and constant `b`.
fn advance(strat: &Strategy, s: State, up: f64, down: f64, b: f64) -> State {
    match *strat {
        Strategy::Constant(a) => State { x: s.x + up * a + down * b, y: s.y + down * a + up * b, ..s },
        Strategy::DeltaEps(_) if s.switched => {
            let d = (up + down) * b;
            State { x: s.x + d, y: s.y + d, ..s }
        }
        Strategy::DeltaEps(eps) => {
            let (dx, dy) = (up + down * b, down + up * b);
            let g0 = s.x - s.y;
            let dg = dx - dy;
            if (g0 + dg).abs() < eps {
                return State { x: s.x + dx, y: s.y + dy, switched: false };
            }
            let theta = ((eps * dg.signum() - g0) / dg).clamp(0.0, 1.0);
            let rest = (1.0 - theta) * (up + down) * b;
            State { x: s.x + theta * dx + rest, y: s.y + theta * dy + rest, switched: true }
        }
        Strategy::Custom { .. } => unreachable!("rejected before the search"),
    }
}

/// Signal increments `(up, down)` of each monotone stretch inside each piece.
fn piece_increments(path: &DrivingPath, pieces: usize) -> Result<Vec<Vec<(f64, f64)>>> {
    let horizon = path.horizon();
    let mut out = Vec::with_capacity(pieces);
    for k in 0..pieces {
        let t0 = horizon * k as f64 / pieces as f64;
        let t1 = if k + 1 == pieces { horizon } else { horizon * (k + 1) as f64 / pieces as f64 };
        let mut times = vec![t0];
        times.extend(path.knots().iter().map(|&(t, _)| t).filter(|&t| t > t0 && t < t1));
        times.push(t1);
        let mut incs = Vec::new();
        for w in times.windows(2) {
            let d = path.eval(w[1])? - path.eval(w[0])?;
            incs.push((d.max(0.0), (-d).max(0.0)));
        }
        out.push(incs);
    }
    Ok(out)
}

type Key = (usize, i64, i64, bool);

fn key(k: usize, s: State) -> Key {
    (k, (s.x * 1e9).round() as i64, (s.y * 1e9).round() as i64, s.switched)
}

struct Reply<'a> {
    strat: &'a Strategy,
    radius: f64,
    incs: Vec<Vec<(f64, f64)>>,
    values: Vec<f64>,
    memo: HashMap<Key, (f64, usize)>,
}

impl Reply<'_> {
    fn solve(&mut self, k: usize, s: State) -> f64 {
        if k == self.incs.len() {
            return terminal_payoff(s.x, s.y, self.radius);
        }
        if let Some(&(v, _)) = self.memo.get(&key(k, s)) {
            return v;
        }
        let mut best = (f64::INFINITY, 0);
        for j in 0..self.values.len() {
            let next = self.next(k, s, j);
            let v = self.solve(k + 1, next);
            if v < best.0 {
                best = (v, j);
            }
        }
        self.memo.insert(key(k, s), best);
        best.0
    }

    fn next(&self, k: usize, s: State, j: usize) -> State {
        let b = self.values[j];
        self.incs[k].iter().fold(s, |s, &(up, down)| advance(self.strat, s, up, down, b))
    }
}

fn best_response(path: &DrivingPath, strat: &Strategy, radius: f64, pieces: usize, levels: usize) -> Result<SearchOutcome> {
    if let Strategy::Custom { name, .. } = strat {
        return config(format!("best-response search needs a state-feedback strategy; '{name}' is custom"));
    }
    let mut reply = Reply {
        strat,
        radius,
        incs: piece_increments(path, pieces)?,
        values: control_levels(levels)?,
        memo: HashMap::new(),
    };
    let origin = State { x: 0.0, y: 0.0, switched: false };
    reply.solve(0, origin);
    let mut choice = Vec::with_capacity(pieces);
    let mut s = origin;
    for k in 0..pieces {
        let j = reply.memo[&key(k, s)].1;
        choice.push(reply.values[j]);
        s = reply.next(k, s, j);
    }
    let beta = PiecewiseControl::uniform(choice, path.horizon())?;
    // Replay the reply through the simulator so the reported payoff comes
    // from an actual trajectory.
    let traj = simulate(path, strat, &beta, path.horizon() / pieces as f64)?;
    Ok(SearchOutcome { beta, payoff: payoff(&traj, radius), evaluated: reply.memo.len() as u64 })
}

#[cfg(test)]
mod tests {
    use super::super::control::delta_eps;
    use super::*;

    fn zigzag() -> DrivingPath {
        DrivingPath::zigzag(1.0, 4, 1.0).unwrap()
    }

    #[test]
    fn family_members_enumerate_digits() {
        let fam = ControlFamily::Exhaustive { pieces: 3, levels: 3 };
        assert_eq!(fam.size(), 27);
        assert_eq!(fam.member(0, 1.0).unwrap().values(), &[-1.0, -1.0, -1.0]);
        assert_eq!(fam.member(5, 1.0).unwrap().values(), &[-1.0, 0.0, 1.0]);
        assert_eq!(fam.member(26, 1.0).unwrap().values(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn cap_is_enforced() {
        let s = delta_eps(0.1).unwrap();
        let err = adversary_search(&zigzag(), &s, 1.0, ControlFamily::Exhaustive { pieces: 13, levels: 3 });
        assert!(matches!(err, Err(crate::Error::Config(_))));
        let err = adversary_search(&zigzag(), &s, 1.0, ControlFamily::Exhaustive { pieces: 7, levels: 9 });
        assert!(matches!(err, Err(crate::Error::Config(_))));
    }

    #[test]
    fn zero_strategy_is_beaten_to_zero() {
        let s = Strategy::constant(0.0).unwrap();
        for fam in [ControlFamily::Exhaustive { pieces: 4, levels: 3 }, ControlFamily::BestResponse { pieces: 4, levels: 3 }] {
            let out = adversary_search(&zigzag(), &s, 1.0, fam).unwrap();
            assert_eq!(out.payoff, 0.0);
        }
    }

    #[test]
    fn both_searches_agree_on_delta_eps() {
        for (eps, pieces) in [(0.1, 8), (0.3, 6), (0.05, 4)] {
            let s = delta_eps(eps).unwrap();
            let ex = adversary_search(&zigzag(), &s, 1.0, ControlFamily::Exhaustive { pieces, levels: 3 }).unwrap();
            let br = adversary_search(&zigzag(), &s, 1.0, ControlFamily::BestResponse { pieces, levels: 3 }).unwrap();
            assert!((ex.payoff - br.payoff).abs() < 1e-9, "eps {eps}: {} vs {}", ex.payoff, br.payoff);
            assert!(ex.payoff >= eps.min(1.0) - 0.02);
        }
    }

    #[test]
    fn short_paths_let_the_minimizer_win() {
        let path = DrivingPath::zigzag(0.25, 2, 1.0).unwrap();
        let out = adversary_search(&path, &delta_eps(0.5).unwrap(), 1.0, ControlFamily::Exhaustive { pieces: 8, levels: 3 }).unwrap();
        assert!(out.payoff < 0.5);
    }

    #[test]
    fn custom_strategies_need_the_exhaustive_family() {
        let s = Strategy::custom("copy", |b: &PiecewiseControl, t| b.at(t));
        assert!(adversary_search(&zigzag(), &s, 1.0, ControlFamily::BestResponse { pieces: 4, levels: 3 }).is_err());
        assert!(adversary_search(&zigzag(), &s, 1.0, ControlFamily::Exhaustive { pieces: 4, levels: 3 }).is_ok());
    }
}
