//! Driving signals: piecewise-linear paths, their total variation, monotone
//! decomposition, and the partition bound for the value at the origin.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};

/// A continuous, piecewise-linear signal on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingPath {
    knots: Vec<(f64, f64)>,
}

/// One maximal stretch on which the signal only increases or only decreases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneSegment {
    pub t_start: f64,
    pub t_end: f64,
    /// `ξ(t_end) − ξ(t_start)`, never zero.
    pub delta: f64,
}

impl MonotoneSegment {
    /// `+1` on increasing segments, `-1` on decreasing ones.
    pub fn sign(&self) -> f64 {
        self.delta.signum()
    }

    pub fn is_up(&self) -> bool {
        self.delta > 0.0
    }

    /// Length of the segment measured in signal units, `|delta|`.
    pub fn variation(&self) -> f64 {
        self.delta.abs()
    }
}

impl DrivingPath {
    /// Builds a path from `(time, value)` knots.
    ///
    /// Times must start at 0 and be strictly increasing with a positive final time.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return config("a path needs at least two knots");
        }
        if knots[0].0 != 0.0 {
            return config(format!("first knot time must be 0, got {}", knots[0].0));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return config(format!(
                    "knot times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                ));
            }
        }
        if knots.iter().any(|&(t, v)| !t.is_finite() || !v.is_finite()) {
            return config("knot times and values must be finite");
        }
        Ok(Self { knots })
    }

    /// Path through `values` at equally spaced times on `[0, horizon]`.
    pub fn from_values(values: &[f64], horizon: f64) -> Result<Self> {
        if values.len() < 2 || !(horizon > 0.0) {
            return config("need at least two values and a positive horizon");
        }
        let n = (values.len() - 1) as f64;
        let knots = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (if i + 1 == values.len() { horizon } else { horizon * i as f64 / n }, v))
            .collect();
        Self::new(knots)
    }

    /// The canonical `0 → a → 0 → …` zigzag with `swings` legs of equal duration.
    pub fn zigzag(amplitude: f64, swings: usize, horizon: f64) -> Result<Self> {
        if !(amplitude > 0.0) || swings == 0 || !(horizon > 0.0) {
            return config(format!(
                "zigzag needs positive amplitude, swings and horizon (got {amplitude}, {swings}, {horizon})"
            ));
        }
        let values: Vec<f64> = (0..=swings)
            .map(|i| if i % 2 == 0 { 0.0 } else { amplitude })
            .collect();
        Self::from_values(&values, horizon)
    }

    /// Samples a scaled Brownian path as a piecewise-linear interpolant.
    ///
    /// Algorithm: a `ChaCha8Rng` seeded with `seed` draws `steps` standard
    /// normals `z_k`; knot `k` sits at `t_k = k·T/steps` with value
    /// `ξ(t_k) = ξ(t_{k-1}) + scale·sqrt(T/steps)·z_k`, `ξ(0) = 0`.
    pub fn sample_brownian(seed: u64, steps: usize, horizon: f64, scale: f64) -> Result<Self> {
        if steps == 0 || !(horizon > 0.0) || !scale.is_finite() {
            return config("brownian path needs steps >= 1, a positive horizon and a finite scale");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sd = scale * (horizon / steps as f64).sqrt();
        let mut values = Vec::with_capacity(steps + 1);
        let mut current = 0.0;
        values.push(current);
        for _ in 0..steps {
            let z: f64 = StandardNormal.sample(&mut rng);
            current += sd * z;
            values.push(current);
        }
        Self::from_values(&values, horizon)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn horizon(&self) -> f64 {
        self.knots[self.knots.len() - 1].0
    }

    pub fn start_value(&self) -> f64 {
        self.knots[0].1
    }

    pub fn end_value(&self) -> f64 {
        self.knots[self.knots.len() - 1].1
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon()).contains(&t) {
            return domain(format!("time {t} outside [0, {}]", self.horizon()));
        }
        Ok(())
    }

    /// Linear interpolation between the bracketing knots.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        let idx = self.knots.partition_point(|&(tk, _)| tk <= t);
        if idx == 0 {
            return self.knots[0].1;
        }
        let (t0, v0) = self.knots[idx - 1];
        if t0 == t || idx == self.knots.len() {
            return v0;
        }
        let (t1, v1) = self.knots[idx];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Total variation; exact for piecewise-linear paths.
    pub fn total_variation(&self) -> f64 {
        self.knots.windows(2).map(|w| (w[1].1 - w[0].1).abs()).sum()
    }

    /// `max ξ − min ξ` over `[0, t]`.
    pub fn oscillation(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let last = self.eval_unchecked(t);
        let (lo, hi) = self
            .knots
            .iter()
            .take_while(|&&(tk, _)| tk <= t)
            .fold((last, last), |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)));
        Ok(hi - lo)
    }

    /// Maximal monotone stretches in time order.
    ///
    /// Flat pieces carry no evolution and are dropped; a flat piece between
    /// two stretches of the same direction does not split them.
    pub fn monotone_decomposition(&self) -> Vec<MonotoneSegment> {
        let mut out: Vec<MonotoneSegment> = Vec::new();
        // (start time, start value, end time, end value, direction)
        let mut open: Option<(f64, f64, f64, f64, f64)> = None;
        for w in self.knots.windows(2) {
            let (t0, v0) = w[0];
            let (t1, v1) = w[1];
            let d = v1 - v0;
            if d == 0.0 {
                continue;
            }
            let dir = d.signum();
            match open.as_mut() {
                Some(seg) if seg.4 == dir => {
                    seg.2 = t1;
                    seg.3 = v1;
                }
                _ => {
                    if let Some((ts, vs, te, ve, _)) = open.take() {
                        out.push(MonotoneSegment { t_start: ts, t_end: te, delta: ve - vs });
                    }
                    open = Some((t0, v0, t1, v1, dir));
                }
            }
        }
        if let Some((ts, vs, te, ve, _)) = open {
            out.push(MonotoneSegment { t_start: ts, t_end: te, delta: ve - vs });
        }
        out
    }

    /// The path `η(t) = ξ(T) − ξ(T − t)`, which drives the forward equation
    /// equivalent to the backward one driven by `ξ`.
    pub fn time_reverse(&self) -> Self {
        let horizon = self.horizon();
        let end = self.end_value();
        let knots = self
            .knots
            .iter()
            .rev()
            .map(|&(t, v)| (horizon - t, end - v))
            .collect();
        Self { knots }
    }

    /// The path restricted to `[0, t_end]`.
    pub fn restrict(&self, t_end: f64) -> Result<Self> {
        self.check_time(t_end)?;
        if t_end == 0.0 {
            return domain("cannot restrict a path to a single instant");
        }
        let mut knots: Vec<(f64, f64)> =
            self.knots.iter().copied().take_while(|&(t, _)| t < t_end).collect();
        knots.push((t_end, self.eval_unchecked(t_end)));
        Self::new(knots)
    }

    /// Inserts a knot at `t` without changing the path (no-op at existing knots).
    pub fn refine_at(&self, t: f64) -> Result<Self> {
        self.check_time(t)?;
        let mut knots = self.knots.clone();
        let idx = knots.partition_point(|&(tk, _)| tk < t);
        if idx < knots.len() && knots[idx].0 == t {
            return Ok(self.clone());
        }
        knots.insert(idx, (t, self.eval_unchecked(t)));
        Self::new(knots)
    }

    /// Times where the path changes direction, together with both endpoints.
    pub fn turning_times(&self) -> Vec<f64> {
        let mut times = vec![0.0];
        for seg in self.monotone_decomposition() {
            if let Some(&last) = times.last() {
                if seg.t_end > last {
                    times.push(seg.t_end);
                }
            }
        }
        let horizon = self.horizon();
        if *times.last().unwrap() < horizon {
            times.push(horizon);
        }
        times
    }

    /// Lower bound on `u(T, 0, 0)` with default search settings.
    pub fn theorem_bound(&self, radius: f64) -> f64 {
        theorem_bound(self, radius, &BoundConfig::default()).value
    }
}

/// A partition `0 = t_0 ≤ t_1 ≤ … ≤ t_n = T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    times: Vec<f64>,
}

impl Partition {
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        if times.len() < 2 {
            return config("a partition needs at least one increment");
        }
        if times[0] != 0.0 || times[times.len() - 1] != horizon {
            return config(format!("partition must run from 0 to {horizon}"));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return config("partition times must be sorted");
        }
        Ok(Self { times })
    }

    /// Every knot of the path.
    pub fn at_knots(path: &DrivingPath) -> Self {
        Self { times: path.knots.iter().map(|&(t, _)| t).collect() }
    }

    /// `n` equal increments of `[0, horizon]`.
    pub fn uniform(n: usize, horizon: f64) -> Result<Self> {
        if n == 0 {
            return config("a partition needs at least one increment");
        }
        let times = (0..=n)
            .map(|i| if i == n { horizon } else { horizon * i as f64 / n as f64 })
            .collect();
        Self::new(times, horizon)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of increments `n`.
    pub fn len(&self) -> usize {
        self.times.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `Σ_j |ξ(t_{j+1}) − ξ(t_j)|`.
    pub fn increment_sum(&self, path: &DrivingPath) -> Result<f64> {
        let mut prev = path.eval(self.times[0])?;
        let mut sum = 0.0;
        for &t in &self.times[1..] {
            let v = path.eval(t)?;
            sum += (v - prev).abs();
            prev = v;
        }
        Ok(sum)
    }
}

/// Search settings for [`theorem_bound`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BoundConfig {
    /// Rounds of midpoint insertion between candidate times.
    pub midpoint_refinements: u32,
}

/// Result of the partition search, with the partition that attains it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundWitness {
    /// `(sup_P (Σ|Δξ| − R)/n)_+ ∧ 1`.
    pub value: f64,
    /// The supremum before clipping to `[0, 1]`.
    pub raw: f64,
    pub partition: Partition,
    pub increment_sum: f64,
}

/// Evaluates `(sup over partitions of (Σ_j |Δξ_j| − R)/n)_+ ∧ 1`.
///
/// Candidate partition points are the turning times of the path (optionally
/// refined by midpoints). For piecewise-linear paths an interior partition
/// point can always be slid to an end of its monotone stretch without
/// decreasing the sum, so this set already attains the supremum; the result
/// is in any case a valid lower bound. For each `n` the best sum over
/// `n`-increment partitions is found by dynamic programming over candidates.
pub fn theorem_bound(path: &DrivingPath, radius: f64, cfg: &BoundConfig) -> BoundWitness {
    let mut times = path.turning_times();
    for _ in 0..cfg.midpoint_refinements {
        let mut refined = Vec::with_capacity(2 * times.len());
        for w in times.windows(2) {
            refined.push(w[0]);
            refined.push(0.5 * (w[0] + w[1]));
        }
        refined.push(*times.last().unwrap());
        times = refined;
    }
    let values: Vec<f64> = times.iter().map(|&t| path.eval_unchecked(t)).collect();
    let k = times.len();

    // best[j] for the current n: largest sum of n increments from candidate 0 to j.
    let neg = f64::NEG_INFINITY;
    let mut parents: Vec<Vec<usize>> = Vec::with_capacity(k);
    let mut best: Vec<f64> = (0..k).map(|j| if j == 0 { neg } else { (values[j] - values[0]).abs() }).collect();
    parents.push(vec![0; k]);
    let mut top = (neg, 1usize, 0.0);
    for n in 1..k {
        let sum = best[k - 1];
        let score = (sum - radius) / n as f64;
        if score > top.0 {
            top = (score, n, sum);
        }
        if n + 1 == k {
            break;
        }
        let mut next = vec![neg; k];
        let mut parent = vec![0usize; k];
        for j in (n + 1)..k {
            for i in n..j {
                if best[i] == neg {
                    continue;
                }
                let cand = best[i] + (values[j] - values[i]).abs();
                if cand > next[j] {
                    next[j] = cand;
                    parent[j] = i;
                }
            }
        }
        best = next;
        parents.push(parent);
    }

    let (raw, n, sum) = top;
    let mut idx = vec![k - 1];
    let mut j = k - 1;
    for level in (1..n).rev() {
        j = parents[level][j];
        idx.push(j);
    }
    idx.push(0);
    idx.reverse();
    let partition = Partition { times: idx.iter().map(|&i| times[i]).collect() };
    BoundWitness {
        value: raw.clamp(0.0, 1.0),
        raw,
        partition,
        increment_sum: sum,
    }
}

/// JSON description of a driving path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PathSpec {
    Knots {
        points: Vec<[f64; 2]>,
    },
    Zigzag {
        amplitude: f64,
        swings: usize,
        #[serde(rename = "T")]
        horizon: f64,
    },
    Brownian {
        seed: u64,
        steps: usize,
        #[serde(rename = "T")]
        horizon: f64,
        scale: f64,
    },
}

impl PathSpec {
    pub fn build(&self) -> Result<DrivingPath> {
        match self {
            PathSpec::Knots { points } => {
                DrivingPath::new(points.iter().map(|p| (p[0], p[1])).collect())
            }
            PathSpec::Zigzag { amplitude, swings, horizon } => {
                DrivingPath::zigzag(*amplitude, *swings, *horizon)
            }
            PathSpec::Brownian { seed, steps, horizon, scale } => {
                DrivingPath::sample_brownian(*seed, *steps, *horizon, *scale)
            }
        }
    }

    /// Parses the short command-line forms `zigzag:a,n,T`,
    /// `brownian:seed,steps,T,scale` and `knots:t,v;t,v;…`.
    pub fn parse_short(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| crate::Error::Config(format!("path '{s}' is not of the form kind:args")))?;
        let nums = |txt: &str| -> Result<Vec<f64>> {
            txt.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| crate::Error::Config(format!("bad number '{x}' in path '{s}'")))
                })
                .collect()
        };
        match kind {
            "zigzag" => match nums(rest)?.as_slice() {
                &[a, n, t] if n >= 1.0 && n.fract() == 0.0 => {
                    Ok(PathSpec::Zigzag { amplitude: a, swings: n as usize, horizon: t })
                }
                _ => config(format!("zigzag expects amplitude,swings,T in '{s}'")),
            },
            "brownian" => match nums(rest)?.as_slice() {
                &[seed, n, t, c] if seed >= 0.0 && n >= 1.0 => Ok(PathSpec::Brownian {
                    seed: seed as u64,
                    steps: n as usize,
                    horizon: t,
                    scale: c,
                }),
                _ => config(format!("brownian expects seed,steps,T,scale in '{s}'")),
            },
            "knots" => {
                let points = rest
                    .split(';')
                    .map(|pair| match nums(pair)?.as_slice() {
                        &[t, v] => Ok([t, v]),
                        _ => config(format!("knot '{pair}' is not t,v")),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(PathSpec::Knots { points })
            }
            other => config(format!("unknown path kind '{other}'")),
        }
    }
}
