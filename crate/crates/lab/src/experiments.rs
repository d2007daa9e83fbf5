//! The named experiments. Each one plans its grids, charges the work
//! budget, runs the solvers and records verdicts.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roughhj::game::{dp_value, GameConfig};
use roughhj::morphology::{dilate_1d, erode_1d};
use roughhj::signal::{theorem_bound, BoundConfig, MonotoneSegment, PathSpec};
use roughhj::solver::{
    abs_diagonal, dependence_radius, estimate_work, ic_paper, step_segment, Engine, EvolveReport, Ordering,
};
use roughhj::{evolve, DrivingPath, Grid, GridFunction, HamiltonianSpec, SolveConfig};

use crate::config::{ExperimentName, ExperimentSpec};
use crate::report::{Report, Rule, Verdict};
use crate::LabError;

struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    fn charge(&mut self, work: u64) -> Result<(), LabError> {
        self.used = self.used.saturating_add(work);
        if self.used > self.limit {
            return Err(LabError::Config(format!(
                "estimated work of {} node updates exceeds the budget of {}",
                self.used, self.limit
            )));
        }
        Ok(())
    }
}

fn solve_config(spec: &ExperimentSpec, kind: Engine) -> SolveConfig {
    let base = match kind {
        Engine::Morphological => SolveConfig::morphological(spec.engine.m),
        Engine::LaxFriedrichs => SolveConfig::lax_friedrichs(spec.engine.cfl),
    };
    base.with_ordering(spec.engine.ordering)
}

/// A grid of spacing `dx` wide enough to observe `observe` after the
/// evolution along `path`, unless the configuration fixes `L`.
fn grid_for(
    spec: &ExperimentSpec,
    dim: usize,
    dx: f64,
    observe: f64,
    path: &DrivingPath,
    h: &HamiltonianSpec,
    cfg: &SolveConfig,
) -> Result<Grid, LabError> {
    let probe = Grid::new(dim, dx, dx)?;
    let dep = dependence_radius(&probe, path, h, cfg)?;
    let half = spec.grid.half_width.unwrap_or(observe + dep + dx);
    Ok(Grid::new(dim, half, dx)?)
}

fn origin(f: &GridFunction) -> f64 {
    f.value_at(&[0.0, 0.0]).expect("the origin is a node")
}

fn diffs(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
}

fn timed<T>(report: &mut Report, label: String, f: impl FnOnce() -> Result<T, LabError>) -> Result<T, LabError> {
    let start = Instant::now();
    let out = f()?;
    report.runtimes.push((label, start.elapsed().as_secs_f64()));
    Ok(out)
}

fn dx_tag(dx: f64) -> String {
    format!("dx{dx}")
}

/// Runs one experiment from a (possibly partial) specification.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Report, LabError> {
    let spec = spec.resolved()?;
    let mut budget = Budget { limit: spec.budget.expect("resolved"), used: 0 };
    let mut report = Report::new(spec.clone());
    if let Some(PathSpec::Brownian { .. }) = spec.path.as_ref().map(|p| p.spec()).transpose()? {
        report.notes.push(
            "sampled Brownian path: results hold for this sample and these times only; evidence, not verification".into(),
        );
    }
    match spec.experiment {
        ExperimentName::Theorem1 => theorem1(&spec, &mut budget, &mut report)?,
        ExperimentName::Separation => separation(&spec, &mut budget, &mut report)?,
        ExperimentName::Stationary => stationary(&spec, &mut budget, &mut report)?,
        ExperimentName::ConstantBall => constant_ball(&spec, &mut budget, &mut report)?,
        ExperimentName::Cancellation => cancellation(&spec, &mut budget, &mut report)?,
        ExperimentName::ClassicalSpeed => classical_speed(&spec, &mut budget, &mut report)?,
        ExperimentName::Crosscheck => crosscheck(&spec, &mut budget, &mut report)?,
    }
    Ok(report)
}

fn theorem1(spec: &ExperimentSpec, budget: &mut Budget, report: &mut Report) -> Result<(), LabError> {
    let path = spec.path()?;
    let h = HamiltonianSpec::paper_saddle();
    let r = spec.r();
    let witness = theorem_bound(&path, r, &BoundConfig::default());
    report.theorem_bound = Some(witness.value);
    report.measure("total_variation", None, path.total_variation());
    report.measure("partition_increment_sum", None, witness.increment_sum);
    report.measure("partition_increments", None, witness.partition.len() as f64);
    if witness.value == 0.0 {
        let v = Verdict::new("bound_positive", Rule::Holds { value: spec.vacuous_pass });
        report.verdict(v.with_note("bound is 0; nothing to verify"));
        return Ok(());
    }
    let cfg = solve_config(spec, spec.engine.kind);
    let mut grids = Vec::new();
    for &dx in spec.ladder() {
        let g = grid_for(spec, 2, dx, 0.0, &path, &h, &cfg)?;
        let g = if g.half_width() < r { Grid::new(2, r + dx, dx)? } else { g };
        budget.charge(estimate_work(&g, &path, &h, &cfg)?)?;
        grids.push(g);
    }
    let mut values = Vec::new();
    for g in grids {
        let dx = g.dx();
        let u0 = ic_paper(&g, r)?;
        let out = timed(report, format!("evolve_{}", dx_tag(dx)), || Ok(evolve(&u0, &path, &h, &cfg)?))?;
        let u = origin(&out.final_state);
        report.measure("u(T,0,0)", Some(dx), u);
        report.measure("rounding_bias", Some(dx), out.rounding_bias);
        report.slices.push((format!("u_T_{}", dx_tag(dx)), out.final_state));
        values.push(u);
    }
    let finest = *values.last().unwrap();
    report.verdict(Verdict::new(
        "finest_value",
        Rule::AtLeast { value: finest, threshold: spec.tolerances.theorem1_min },
    ));
    report.verdict(Verdict::new("all_positive", Rule::AllPositive { values: values.clone() }));
    report.verdict(Verdict::new(
        "ladder_contracts",
        Rule::Contracting { values: diffs(&values), ratio: spec.tolerances.ladder_ratio, floor: spec.tolerances.diff_floor },
    ));
    Ok(())
}

fn separation(spec: &ExperimentSpec, budget: &mut Budget, report: &mut Report) -> Result<(), LabError> {
    let path = spec.path()?;
    let h = HamiltonianSpec::paper_saddle();
    let r = spec.r();
    let v = path.total_variation();
    let bound = theorem_bound(&path, r, &BoundConfig::default()).value;
    report.theorem_bound = Some(bound);
    let cfg = solve_config(spec, spec.engine.kind);
    let mut grids = Vec::new();
    for &dx in spec.ladder() {
        let g = grid_for(spec, 2, dx, 0.0, &path, &h, &cfg)?;
        let g = if g.half_width() < r { Grid::new(2, r + dx, dx)? } else { g };
        budget.charge(2 * estimate_work(&g, &path, &h, &cfg)?)?;
        grids.push(g);
    }
    let mut gaps = Vec::new();
    let mut initial = Vec::new();
    for g in grids {
        let dx = g.dx();
        let u1 = ic_paper(&g, r)?;
        let u2 = abs_diagonal(&g);
        initial.push(u1.sup_diff_where(&u2, |i| g.sup_norm_of(i) <= r - 1.0 + 1e-9));
        let (a, b) = timed(report, format!("evolve_{}", dx_tag(dx)), || {
            Ok((evolve(&u1, &path, &h, &cfg)?, evolve(&u2, &path, &h, &cfg)?))
        })?;
        let gap = origin(&a.final_state) - origin(&b.final_state);
        report.measure("u1(T,0,0)-u2(T,0,0)", Some(dx), gap);
        gaps.push(gap);
    }
    if r >= 1.0 {
        report.verdict(
            Verdict::new("data_coincide", Rule::AllAtMost { values: initial, threshold: spec.tolerances.exact })
                .with_note("initial data agree on the sup-norm ball of radius R - 1"),
        );
    }
    if bound > 0.0 {
        report.verdict(Verdict::new("separated", Rule::AllPositive { values: gaps }));
    } else if v < r - 1.0 {
        let abs: Vec<f64> = gaps.iter().map(|g| g.abs()).collect();
        report.verdict(
            Verdict::new("no_effect", Rule::AllAtMost { values: abs, threshold: spec.tolerances.exact })
                .with_note("total variation is below the distance R - 1 to the support of the perturbation"),
        );
    } else {
        report.notes.push("R - 1 <= V <= R: neither separation nor agreement is claimed".into());
    }
    Ok(())
}

fn stationary(spec: &ExperimentSpec, budget: &mut Budget, report: &mut Report) -> Result<(), LabError> {
    let path = spec.path()?;
    let h = HamiltonianSpec::paper_saddle();
    let r = spec.r();
    let morph = solve_config(spec, Engine::Morphological).with_observation_radius(r);
    let lf = solve_config(spec, Engine::LaxFriedrichs).with_observation_radius(r);
    let dx = spec.grid.dx.expect("resolved");
    let gm = grid_for(spec, 2, dx, r, &path, &h, &morph)?;
    budget.charge(estimate_work(&gm, &path, &h, &morph)?)?;
    let mut lf_grids = Vec::new();
    for &d in spec.ladder() {
        let g = grid_for(spec, 2, d, r, &path, &h, &lf)?;
        budget.charge(estimate_work(&g, &path, &h, &lf)?)?;
        lf_grids.push(g);
    }
    let deviation = |out: &EvolveReport, f0: &GridFunction| out.final_state.sup_diff_where(f0, |i| out.is_trusted(i));
    let f0 = abs_diagonal(&gm);
    let out = timed(report, format!("morphological_{}", dx_tag(dx)), || Ok(evolve(&f0, &path, &h, &morph)?))?;
    let dev = deviation(&out, &f0);
    report.measure("morphological_deviation", Some(dx), dev);
    let mut v = Verdict::new("morphological_fixed_point", Rule::AtMost { value: dev, threshold: spec.tolerances.exact });
    if spec.engine.ordering == Ordering::DilateFirst {
        v = v.with_note("dilate_first ordering does not keep |x - y| fixed on the grid");
    }
    report.verdict(v);
    let mut devs = Vec::new();
    for g in lf_grids {
        let f0 = abs_diagonal(&g);
        let out = timed(report, format!("lax_friedrichs_{}", dx_tag(g.dx())), || Ok(evolve(&f0, &path, &h, &lf)?))?;
        let dev = deviation(&out, &f0);
        report.measure("lax_friedrichs_deviation", Some(g.dx()), dev);
        devs.push(dev);
    }
    report.verdict(Verdict::new(
        "lax_friedrichs_converges",
        Rule::Contracting { values: devs, ratio: spec.tolerances.ladder_ratio, floor: spec.tolerances.diff_floor },
    ));
    Ok(())
}

fn constant_ball(spec: &ExperimentSpec, budget: &mut Budget, report: &mut Report) -> Result<(), LabError> {
    let path = spec.path()?;
    let h = HamiltonianSpec::paper_saddle();
    let (r, a) = (spec.r(), spec.level.expect("resolved"));
    let (c, k) = (spec.speed.expect("resolved"), spec.slope.expect("resolved"));
    let cfg = solve_config(spec, Engine::Morphological).with_observation_radius(r).with_snapshots();
    let dx = spec.grid.dx.expect("resolved");
    let g = grid_for(spec, 2, dx, r, &path, &h, &cfg)?;
    budget.charge(estimate_work(&g, &path, &h, &cfg)?)?;
    let u0 = GridFunction::from_fn(g, |p| a - k * ((p[0] * p[0] + p[1] * p[1]).sqrt() - r).max(0.0));
    let out = timed(report, "evolve".into(), || Ok(evolve(&u0, &path, &h, &cfg)?))?;
    let mut excess = Vec::new();
    for (t, state, _) in &out.snapshots {
        let rho = r - c * path.oscillation(*t)?;
        report.measure("ball_radius", None, rho);
        let inside = |i: usize| {
            let p = g.point(i);
            (p[0] * p[0] + p[1] * p[1]).sqrt() <= rho + 1e-9
        };
        let dev = state.sup_diff_where(&GridFunction::constant(g, a), inside);
        report.measure(format!("max |u - A| on ball at t={t}"), Some(dx), dev);
        excess.push(dev);
        report.slices.push((format!("u_t{t}"), state.clone()));
    }
    report.verdict(
        Verdict::new("constant_on_ball", Rule::AllAtMost { values: excess, threshold: spec.tolerances.exact })
            .with_note("checked at every segment endpoint on the Euclidean ball of radius R - C*oscillation(t)"),
    );
    Ok(())
}

fn cancellation(spec: &ExperimentSpec, budget: &mut Budget, report: &mut Report) -> Result<(), LabError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let cases = spec.cases.expect("resolved");
    let mut failures = 0u64;
    for _ in 0..cases {
        let len = rng.random_range(1..=64usize);
        let a: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        for k in 0..=8 {
            let d = dilate_1d(&a, k);
            let e = erode_1d(&a, k);
            if dilate_1d(&erode_1d(&d, k), k) != d || erode_1d(&dilate_1d(&e, k), k) != e {
                failures += 1;
            }
        }
    }
    report.measure("discrete_identity_arrays", None, cases as f64);
    report.measure("discrete_identity_max_radius", None, 8.0);
    report.verdict(Verdict::new("discrete_identity_exact", Rule::AtMost { value: failures as f64, threshold: 0.0 }));

    let h = HamiltonianSpec::abs_1d();
    let delta = spec.delta.expect("resolved");
    let r = spec.r();
    let seg = |d: f64| MonotoneSegment { t_start: 0.0, t_end: 1.0, delta: d };
    let one = DrivingPath::from_values(&[0.0, delta], 1.0)?;
    let lf = solve_config(spec, Engine::LaxFriedrichs);
    let morph = solve_config(spec, Engine::Morphological);
    let hat = |g: Grid| GridFunction::from_fn(g, |p| (1.0 - p[0].abs()).max(0.0));
    let mut plans = Vec::new();
    for &dx in spec.ladder() {
        let probe = Grid::new(1, dx, dx)?;
        let dep = dependence_radius(&probe, &one, &h, &lf)?;
        let g = Grid::new(1, spec.grid.half_width.unwrap_or(r + 3.0 * dep + dx), dx)?;
        budget.charge(3 * estimate_work(&g, &one, &h, &lf)?)?;
        plans.push(g);
    }
    let triple = |f: &GridFunction, cfg: &SolveConfig| -> Result<(GridFunction, GridFunction), LabError> {
        let single = step_segment(f, &seg(delta), &h, cfg)?;
        let back = step_segment(&single, &seg(-delta), &h, cfg)?;
        Ok((step_segment(&back, &seg(delta), &h, cfg)?, single))
    };
    let mut gaps = Vec::new();
    let mut morph_gap = 0.0f64;
    for g in plans {
        let keep = |i: usize| g.point(i)[0].abs() <= r + 1e-9;
        let u0 = hat(g);
        let (composed, single) =
            timed(report, format!("lax_friedrichs_{}", dx_tag(g.dx())), || triple(&u0, &lf))?;
        let gap = composed.sup_diff_where(&single, keep);
        report.measure("lax_friedrichs_composition_gap", Some(g.dx()), gap);
        gaps.push(gap);
        let (composed, single) = triple(&u0, &morph)?;
        let mg = composed.sup_diff_where(&single, keep);
        report.measure("morphological_composition_gap", Some(g.dx()), mg);
        morph_gap = morph_gap.max(mg);
    }
    report.verdict(Verdict::new("morphological_composition_exact", Rule::AtMost { value: morph_gap, threshold: spec.tolerances.exact }));
    report.verdict(Verdict::new(
        "lax_friedrichs_composition_converges",
        Rule::Contracting { values: gaps, ratio: spec.tolerances.ladder_ratio, floor: spec.tolerances.diff_floor },
    ));
    Ok(())
}

fn classical_speed(spec: &ExperimentSpec, budget: &mut Budget, report: &mut Report) -> Result<(), LabError> {
    let path = spec.path()?;
    let h = HamiltonianSpec::paper_saddle();
    let (r, c) = (spec.r(), spec.speed.expect("resolved"));
    let dx = spec.grid.dx.expect("resolved");
    let cfg = solve_config(spec, Engine::Morphological).with_observation_radius(r);
    let times = spec.times.clone().expect("resolved");
    let mut plans = Vec::new();
    for &t in &times {
        let p = path.restrict(t)?;
        let g = grid_for(spec, 2, dx, r, &p, &h, &cfg)?;
        budget.charge(2 * estimate_work(&g, &p, &h, &cfg)?)?;
        plans.push((t, p, g));
    }
    let margin = dx / 2.0;
    let mut inside = Vec::new();
    for (t, p, g) in plans {
        let sup = |q: [f64; 2]| q[0].abs().max(q[1].abs());
        let u1 = GridFunction::from_fn(g, |q| (2.0 * q[0]).sin() * (3.0 * q[1]).cos() + 0.5 * (q[0] - q[1]).abs());
        let u2 = GridFunction::from_fn(g, |q| {
            let base = (2.0 * q[0]).sin() * (3.0 * q[1]).cos() + 0.5 * (q[0] - q[1]).abs();
            base + 3.0 * (sup([q[0], q[1]]) - r).max(0.0)
        });
        let (a, b) = timed(report, format!("evolve_t{t}"), || Ok((evolve(&u1, &p, &h, &cfg)?, evolve(&u2, &p, &h, &cfg)?)))?;
        let rho = r - c * p.total_variation() - margin;
        let d_in = a.final_state.sup_diff_where(&b.final_state, |i| g.sup_norm_of(i) <= rho + 1e-9);
        let d_all = a.final_state.sup_diff_where(&b.final_state, |i| a.is_trusted(i));
        report.measure(format!("agreement_radius t={t}"), Some(dx), rho);
        report.measure(format!("max diff inside t={t}"), Some(dx), d_in);
        report.measure(format!("max diff trusted region t={t}"), Some(dx), d_all);
        inside.push(d_in);
    }
    report.verdict(
        Verdict::new("agree_on_shrinking_ball", Rule::AllAtMost { values: inside, threshold: spec.tolerances.exact })
            .with_note("sup-norm balls of radius R - C*V(t) - dx/2; the margin is one window rounding"),
    );
    Ok(())
}

fn crosscheck(spec: &ExperimentSpec, budget: &mut Budget, report: &mut Report) -> Result<(), LabError> {
    let path = spec.path()?;
    let h = HamiltonianSpec::paper_saddle();
    let r = spec.r();
    let cfg = solve_config(spec, spec.engine.kind);
    let reversed = path.time_reverse();
    let longest = path.monotone_decomposition().iter().map(|s| s.variation()).fold(0.0, f64::max);
    let segments = path.monotone_decomposition().len() as u64;
    let mut plans = Vec::new();
    for &dx in spec.ladder() {
        let g = grid_for(spec, 2, dx, 0.0, &reversed, &h, &cfg)?;
        let n = spec.game_substeps.unwrap_or(((longest / dx) - 1e-9).ceil().max(1.0) as usize);
        budget.charge(estimate_work(&g, &reversed, &h, &cfg)? + g.len() as u64 * 9 * n as u64 * segments)?;
        plans.push((g, n));
    }
    let mut gaps = Vec::new();
    for (g, n) in plans {
        let dx = g.dx();
        let terminal = ic_paper(&g, r)?;
        let game = timed(report, format!("game_{}", dx_tag(dx)), || Ok(dp_value(&path, &GameConfig::new(terminal.clone(), n))?))?;
        let pde = timed(report, format!("pde_{}", dx_tag(dx)), || Ok(evolve(&terminal, &reversed, &h, &cfg)?))?;
        let (vg, vp) = (game.value_at_origin(), origin(&pde.final_state));
        report.measure("game_value", Some(dx), vg);
        report.measure("pde_value", Some(dx), vp);
        report.measure("game_steps_per_segment", Some(dx), n as f64);
        gaps.push((vg - vp).abs());
    }
    report.verdict(Verdict::new("coarse_gap", Rule::AtMost { value: gaps[0], threshold: spec.tolerances.crosscheck_gap }));
    report.verdict(Verdict::new(
        "gap_contracts",
        Rule::Contracting { values: gaps, ratio: spec.tolerances.crosscheck_ratio, floor: spec.tolerances.diff_floor },
    ));
    Ok(())
}
