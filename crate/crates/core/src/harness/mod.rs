//! Experiment orchestration: config in, report and artifacts out.

pub mod compare;
pub mod config;
pub mod plot;
mod report;

use std::path::Path;
use std::time::Instant;

use ndarray::Array2;
use serde::Serialize;

pub use compare::{compare_reports, PolicyTable};
pub use config::{
    apply_override, Algorithm, AssertionSpec, AttackSpec, BehaviorSpec, ConfigFormat, ExperimentConfig, GraphSpec,
    MdpSpec, MetricsSpec, OutputSpec, ResolvedSeeds, ScheduleSpec, SeedSpec, TrackedEntry,
};
pub use report::{
    CurvePoint, Diagnostics, MdpIdentity, OracleSummary, RunReport, StateAgreement, TrackedPoint, TrackedSeries,
    ViolationCounters, ViolationReport, VisitCheckpoint,
};

use crate::comms::{make_attack_plan, AttackPlan, AttackStrategy};
use crate::error::{Error, Result};
use crate::graph::{construct_redundant, read_edge_list, two_hop_graph, Graph, GraphSchedule};
use crate::learning::{
    frqd_step, qd_step, reference_step, trim_f_baseline_step, FrqdOutcome, QTable, StepContext, Weights,
};
use crate::mdp::{build_task_assignment_mdp, ActionPair, MdpModel, Sampler};
use crate::oracle::{greedy_policy, value_iteration, OptimalSolution};
use crate::rng::stream_rng;

/// Value-iteration accuracy used for the reference solution.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

/// One row of the per-step trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: u64,
    /// 1-based state label.
    pub x: usize,
    pub u_i: usize,
    pub u_j: usize,
    pub agent: usize,
    /// Value at the sampled pair after the update.
    pub q_value: f64,
    /// Size of the consensus set.
    pub p_size: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    /// Present when the config asks for a trajectory CSV.
    pub trace: Option<Vec<TraceRow>>,
    pub model: MdpModel,
}

/// Builds the MDP named by the config.
pub fn build_model(config: &ExperimentConfig, seeds: &ResolvedSeeds) -> Result<(MdpModel, MdpIdentity)> {
    match &config.mdp {
        MdpSpec::TaskAssignment { n } => {
            let model = build_task_assignment_mdp(*n, &mut stream_rng(seeds.costs))?;
            let id = MdpIdentity {
                kind: "task_assignment".into(),
                n_agents: model.n_agents(),
                num_states: model.num_states(),
                num_actions: model.num_actions(),
                costs_seed: Some(seeds.costs),
                source: None,
            };
            Ok((model, id))
        }
        MdpSpec::File { path } => {
            let model = MdpModel::load(path)?;
            let id = MdpIdentity {
                kind: "file".into(),
                n_agents: model.n_agents(),
                num_states: model.num_states(),
                num_actions: model.num_actions(),
                costs_seed: None,
                source: path.file_name().map(|s| s.to_string_lossy().into_owned()),
            };
            Ok((model, id))
        }
    }
}

pub fn build_schedule(spec: &GraphSpec) -> Result<GraphSchedule> {
    match spec {
        GraphSpec::Construct { n, r } => Ok(GraphSchedule::fixed(construct_redundant(*n, *r)?)),
        GraphSpec::EdgeList { path } => Ok(GraphSchedule::fixed(read_edge_list(path)?)),
        GraphSpec::Schedule { paths } => GraphSchedule::new(paths.iter().map(read_edge_list).collect::<Result<_>>()?),
    }
}

fn build_plan(config: &ExperimentConfig, schedule: &GraphSchedule, seeds: &ResolvedSeeds) -> Result<AttackPlan> {
    let spec = &config.attack;
    if let Some(path) = &spec.plan_path {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let plan = AttackPlan::from_json(&text)?;
        if plan.f_budget != spec.f {
            return Err(Error::config(
                "attack.plan_path",
                format!("plan budget {} differs from attack.f = {}", plan.f_budget, spec.f),
            ));
        }
        if plan.strategy != spec.strategy {
            return Err(Error::config(
                "attack.plan_path",
                format!(
                    "plan strategy {} differs from attack.strategy = {}",
                    plan.strategy, spec.strategy
                ),
            ));
        }
        plan.validate(schedule)?;
        return Ok(plan);
    }
    if spec.strategy == AttackStrategy::None || spec.f == 0 {
        return Ok(AttackPlan::none());
    }
    make_attack_plan(
        spec.strategy,
        spec.f,
        schedule,
        config.horizon,
        &mut stream_rng(seeds.attack),
    )
}

/// Sampling steps `0`, `⌈10^(j/ppd)⌉` and `horizon`, deduplicated and sorted.
pub fn log_grid(horizon: u64, points_per_decade: u32) -> Vec<u64> {
    let mut grid = vec![0, horizon];
    let mut j = 0u32;
    loop {
        let s = 10f64.powf(f64::from(j) / f64::from(points_per_decade)).ceil() as u64;
        if s >= horizon {
            break;
        }
        grid.push(s);
        j += 1;
    }
    grid.sort_unstable();
    grid.dedup();
    grid
}

fn max_error(tables: &[QTable], q_star: &[f64]) -> f64 {
    tables.iter().fold(0.0, |m, t| m.max(t.sup_distance(q_star)))
}

/// `(x, u)` index of a tracked entry, or a config error naming it.
fn tracked_index(entry: &TrackedEntry, model: &MdpModel, pos: usize) -> Result<(usize, usize)> {
    let path = format!("metrics.tracked[{pos}]");
    if entry.state == 0 || entry.state > model.num_states() {
        return Err(Error::config(path, format!("state {} does not exist", entry.state)));
    }
    let u = model
        .action_index(entry.action)
        .ok_or_else(|| Error::config(path, format!("action {} does not exist", entry.action)))?;
    Ok((entry.state - 1, u))
}

/// Per-schedule-slot derived graphs, computed on first use.
struct TwoHopCache {
    r: usize,
    graphs: Vec<Option<(Graph, Array2<f64>)>>,
}

impl TwoHopCache {
    fn new(r: usize, slots: usize) -> Self {
        TwoHopCache {
            r,
            graphs: vec![None; slots],
        }
    }

    fn get(&mut self, schedule: &GraphSchedule, t: u64) -> Result<&(Graph, Array2<f64>)> {
        let slot = (t % self.graphs.len() as u64) as usize;
        if self.graphs[slot].is_none() {
            let h = two_hop_graph(&schedule.graphs()[slot], self.r)?;
            let l = h.laplacian();
            self.graphs[slot] = Some((h, l));
        }
        Ok(self.graphs[slot].as_ref().expect("filled above"))
    }
}

/// Counts violations, or stops at the first one in fail-fast mode.
struct Checker {
    fail_fast: bool,
    counters: ViolationCounters,
}

impl Checker {
    fn record(&mut self, invariant: &str, t: u64, agent: Option<usize>, detail: impl FnOnce() -> String) -> Result<()> {
        match invariant {
            "lemma2_bound" => self.counters.lemma2_bound += 1,
            "filter_soundness" => self.counters.filter_soundness += 1,
            "filter_symmetry" => self.counters.filter_symmetry += 1,
            _ => self.counters.equivalence += 1,
        }
        let report = ViolationReport {
            invariant: invariant.to_string(),
            t,
            agent,
            detail: detail(),
        };
        tracing::warn!(%report, "invariant violated");
        if self.fail_fast {
            Err(Error::InvariantViolation(Box::new(report)))
        } else {
            Ok(())
        }
    }
}

fn check_filters(
    out: &FrqdOutcome,
    h: &Graph,
    asserts: &AssertionSpec,
    f: usize,
    t: u64,
    checker: &mut Checker,
    diag: &mut Diagnostics,
) -> Result<()> {
    let n = out.true_values.len();
    let truth = &out.true_values;
    for (i, fs) in out.filters.iter().enumerate() {
        if asserts.lemma2_bound {
            let mut wrong = vec![0usize; n];
            for v in &fs.pooled {
                if v.idx < n && v.idx != i && v.q != truth[v.idx] {
                    wrong[v.idx] += 1;
                }
            }
            let worst = wrong.iter().copied().max().unwrap_or(0);
            diag.max_corrupted_per_index = diag.max_corrupted_per_index.max(worst);
            if worst > 3 * f {
                let k = wrong.iter().position(|&c| c == worst).unwrap_or(0);
                checker.record("lemma2_bound", t, Some(i), || {
                    format!("{worst} corrupted entries for index {k}, bound is {}", 3 * f)
                })?;
            }
        }
        if asserts.filter_soundness {
            let mut remaining = truth.clone();
            for v in &fs.validated {
                match remaining.iter().position(|&q| q == v.q) {
                    Some(p) => {
                        remaining.swap_remove(p);
                    }
                    None => {
                        checker.record("filter_soundness", t, Some(i), || {
                            format!("value {} validated for index {} is not a true value", v.q, v.idx)
                        })?;
                    }
                }
            }
        }
        if asserts.filter_symmetry {
            for j in (0..n).filter(|&j| j != i) {
                let has = fs.validated.iter().any(|v| v.idx == j && v.q == truth[j]);
                if has != h.has_edge(i, j) {
                    checker.record("filter_symmetry", t, Some(i), || {
                        format!(
                            "true value of {j} {} but the pair is {}an edge of the two-hop graph",
                            if has { "validated" } else { "not validated" },
                            if h.has_edge(i, j) { "" } else { "not " }
                        )
                    })?;
                }
            }
        }
    }
    Ok(())
}

fn count_amplification(sizes: impl Iterator<Item = usize>, w: Weights, diag: &mut Diagnostics) {
    let limit = 1.0 - w.alpha;
    diag.amplification_steps += sizes.filter(|&p| w.beta * p as f64 > limit).count() as u64;
}

/// Runs one experiment end to end. Deterministic in the config.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let started = Instant::now();
    let seeds = config.seeds.resolve();
    let (model, mdp_id) = build_model(config, &seeds)?;
    let n = model.n_agents();
    let (ns, na) = (model.num_states(), model.num_actions());
    let params = config.schedule.resolve(n)?;
    let gamma = model.discount();

    let schedule = build_schedule(&config.graph)?;
    if schedule.node_count() != n {
        return Err(Error::config(
            "graph",
            format!("graph has {} nodes but the MDP has {n} agents", schedule.node_count()),
        ));
    }
    let plan = build_plan(config, &schedule, &seeds)?;
    let f = config.attack.f;

    tracing::info!(name = %config.name, algorithm = %config.algorithm, n, horizon = config.horizon, "starting run");
    let oracle = value_iteration(&model, ORACLE_TOLERANCE);
    let q_star_norm = oracle.sup_norm();
    let relative = |e: f64| if q_star_norm > 0.0 { e / q_star_norm } else { e };

    let mut init_rng = stream_rng(seeds.init);
    let mut tables: Vec<QTable> = (0..n).map(|_| QTable::random(ns, na, &mut init_rng)).collect();
    let mut shadow = config.assertions.equivalence_check.then(|| tables.clone());
    let mut sampler = Sampler::new(
        &model,
        config.behavior.policy.clone(),
        config.behavior.restart,
        stream_rng(seeds.trajectory),
    )?;

    let needs_two_hop = config.algorithm == Algorithm::LaplacianReference
        || config.assertions.equivalence_check
        || config.assertions.filter_symmetry;
    let mut two_hop = TwoHopCache::new(6 * f + 1, schedule.graphs().len());

    let tracked: Vec<(usize, usize)> = config
        .metrics
        .tracked
        .iter()
        .enumerate()
        .map(|(pos, e)| tracked_index(e, &model, pos))
        .collect::<Result<_>>()?;
    let mut tracked_series: Vec<TrackedSeries> = config
        .metrics
        .tracked
        .iter()
        .zip(&tracked)
        .map(|(e, &(x, u))| TrackedSeries {
            state: e.state,
            action: e.action,
            q_star: oracle.q(x, u),
            points: Vec::new(),
        })
        .collect();

    let grid = log_grid(config.horizon, config.metrics.points_per_decade);
    let mut grid_pos = 0;
    let mut curve = Vec::with_capacity(grid.len());
    let sample_metrics = |steps: u64, tables: &[QTable], curve: &mut Vec<CurvePoint>, series: &mut [TrackedSeries]| {
        let e = max_error(tables, &oracle.q_star);
        curve.push(CurvePoint {
            steps,
            max_error: e,
            relative_error: relative(e),
        });
        for (s, &(x, u)) in series.iter_mut().zip(&tracked) {
            s.points.push(TrackedPoint {
                steps,
                values: tables.iter().map(|t| t.get(x, u)).collect(),
            });
        }
    };

    let non_terminal: Vec<usize> = model.non_terminal_states().collect();
    let mut checkpoints: Vec<VisitCheckpoint> = config
        .metrics
        .visit_checkpoints
        .iter()
        .map(|&visits| VisitCheckpoint {
            visits,
            steps: None,
            max_error: None,
            relative_error: None,
        })
        .collect();
    // pairs still below each checkpoint's count
    let mut remaining: Vec<usize> = checkpoints
        .iter()
        .map(|c| if c.visits == 0 { 0 } else { non_terminal.len() * na })
        .collect();
    for (c, r) in checkpoints.iter_mut().zip(&remaining) {
        if *r == 0 {
            let e = max_error(&tables, &oracle.q_star);
            c.steps = Some(0);
            c.max_error = Some(e);
            c.relative_error = Some(relative(e));
        }
    }

    let mut checker = Checker {
        fail_fast: config.assertions.fail_fast,
        counters: ViolationCounters::default(),
    };
    let mut diag = Diagnostics::default();
    let mut trace = config.outputs.trajectory_csv.then(Vec::new);
    let stride = config.outputs.trace_stride;

    while grid_pos < grid.len() && grid[grid_pos] == 0 {
        sample_metrics(0, &tables, &mut curve, &mut tracked_series);
        grid_pos += 1;
    }

    for t in 0..config.horizon {
        let sample = sampler.step(&model);
        let graph = schedule.at(t);
        let ctx = StepContext {
            graph,
            plan: &plan,
            sample: &sample,
            params: &params,
            gamma,
            f_budget: f,
        };
        let h = if needs_two_hop {
            Some(two_hop.get(&schedule, t)?)
        } else {
            None
        };

        let p_sizes: Vec<usize> = match config.algorithm {
            Algorithm::Frqd => {
                let out = frqd_step(&mut tables, &ctx)?;
                diag.tampered_messages += (out.tampered[0] + out.tampered[1]) as u64;
                if config.assertions.any_filter_check() {
                    let h_graph = match h {
                        Some((g, _)) => g,
                        None => graph,
                    };
                    check_filters(&out, h_graph, &config.assertions, f, t, &mut checker, &mut diag)?;
                }
                let sizes: Vec<usize> = out.filters.iter().map(|fs| fs.validated.len()).collect();
                count_amplification(sizes.iter().copied(), out.weights, &mut diag);
                sizes
            }
            Algorithm::Qd => {
                let w = qd_step(&mut tables, &ctx)?;
                let sizes: Vec<usize> = (0..n).map(|i| graph.degree(i)).collect();
                count_amplification(sizes.iter().copied(), w, &mut diag);
                sizes
            }
            Algorithm::TrimBaseline => {
                let out = trim_f_baseline_step(&mut tables, &ctx)?;
                diag.consensus_skips += out.skipped.len() as u64;
                let sizes: Vec<usize> = out.retained.iter().map(Vec::len).collect();
                count_amplification(sizes.iter().copied(), out.weights, &mut diag);
                sizes
            }
            Algorithm::LaplacianReference => {
                let (hg, l) = h.expect("two-hop graph requested");
                let w = reference_step(&mut tables, l, &sample, &params, gamma)?;
                let sizes: Vec<usize> = (0..n).map(|i| hg.degree(i)).collect();
                count_amplification(sizes.iter().copied(), w, &mut diag);
                sizes
            }
        };

        if let Some(shadow) = shadow.as_mut() {
            let (_, l) = h.expect("two-hop graph requested");
            reference_step(shadow, l, &sample, &params, gamma)?;
            let gap = tables
                .iter()
                .zip(shadow.iter())
                .map(|(a, b)| (a.get(sample.x, sample.u) - b.get(sample.x, sample.u)).abs())
                .fold(0.0, f64::max);
            diag.max_equivalence_gap = diag.max_equivalence_gap.max(gap);
            if gap > config.assertions.equivalence_tolerance {
                let tol = config.assertions.equivalence_tolerance;
                checker.record("equivalence", t, None, || {
                    format!("filtered and Laplacian updates differ by {gap:e} (tolerance {tol:e})")
                })?;
            }
        }

        let steps = t + 1;
        if let Some(rows) = trace.as_mut() {
            if t % stride == 0 {
                let ActionPair(ui, uj) = model.actions()[sample.u];
                rows.extend(tables.iter().enumerate().map(|(agent, tb)| TraceRow {
                    t,
                    x: sample.x + 1,
                    u_i: ui,
                    u_j: uj,
                    agent,
                    q_value: tb.get(sample.x, sample.u),
                    p_size: p_sizes[agent],
                }));
            }
        }

        if !model.is_terminal(sample.x) {
            let k = tables[0].visits(sample.x, sample.u);
            for (c, r) in checkpoints.iter_mut().zip(remaining.iter_mut()) {
                if c.visits == k && *r > 0 {
                    *r -= 1;
                    if *r == 0 {
                        let e = max_error(&tables, &oracle.q_star);
                        c.steps = Some(steps);
                        c.max_error = Some(e);
                        c.relative_error = Some(relative(e));
                        tracing::debug!(visits = c.visits, steps, error = e, "visit checkpoint reached");
                    }
                }
            }
        }

        while grid_pos < grid.len() && grid[grid_pos] == steps {
            sample_metrics(steps, &tables, &mut curve, &mut tracked_series);
            grid_pos += 1;
        }
    }

    let final_max_error = max_error(&tables, &oracle.q_star);
    let min_visits_nonterminal = non_terminal
        .iter()
        .flat_map(|&x| (0..na).map(move |u| (x, u)))
        .map(|(x, u)| tables[0].visits(x, u))
        .min()
        .unwrap_or(0);

    let to_pairs = |set: &[usize]| -> Vec<ActionPair> { set.iter().map(|&u| model.actions()[u]).collect() };
    let greedy: Vec<Vec<Vec<usize>>> = tables.iter().map(|t| greedy_policy(t.values(), ns, na)).collect();
    let policy_agreement = non_terminal
        .iter()
        .map(|&x| StateAgreement {
            state: x + 1,
            optimal: to_pairs(&oracle.pi_star[x]),
            disagreeing_agents: greedy
                .iter()
                .enumerate()
                .filter(|(_, g)| !g[x].iter().any(|u| oracle.pi_star[x].contains(u)))
                .map(|(i, _)| i)
                .collect(),
        })
        .collect();

    let report = RunReport {
        name: config.name.clone(),
        algorithm: config.algorithm,
        approximation: config.algorithm == Algorithm::TrimBaseline,
        mdp: mdp_id,
        seeds,
        horizon: config.horizon,
        steps: config.horizon,
        attack_strategy: plan.strategy.id().to_string(),
        f_budget: f,
        oracle: oracle_summary(&oracle, &model),
        error_curve: curve,
        visit_checkpoints: checkpoints,
        tracked: tracked_series,
        final_max_error,
        final_relative_error: relative(final_max_error),
        min_visits_nonterminal,
        policies: greedy.iter().map(|g| g.iter().map(|s| to_pairs(s)).collect()).collect(),
        policy_agreement,
        final_q: tables
            .iter()
            .map(|t| t.values().chunks(na).map(<[f64]>::to_vec).collect())
            .collect(),
        violations: checker.counters,
        diagnostics: diag,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    tracing::info!(
        relative_error = report.final_relative_error,
        violations = report.violations.total(),
        seconds = report.wall_clock_seconds,
        "run finished"
    );
    Ok(RunOutput { report, trace, model })
}

fn oracle_summary(oracle: &OptimalSolution, model: &MdpModel) -> OracleSummary {
    OracleSummary {
        sup_norm: oracle.sup_norm(),
        v_star: oracle.v_star.clone(),
        pi_star: oracle
            .pi_star
            .iter()
            .map(|s| s.iter().map(|&u| model.actions()[u]).collect())
            .collect(),
        q_star: oracle.q_star.chunks(oracle.num_actions).map(<[f64]>::to_vec).collect(),
        iterations: oracle.iterations,
    }
}

/// Writes the configured artifacts into `dir` and returns the paths written.
pub fn write_artifacts(output: &RunOutput, config: &ExperimentConfig, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str, contents: &str| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };

    put("config.json", &config.to_json())?;
    if config.outputs.report {
        put("report.json", &output.report.to_json()?)?;
    }
    if config.outputs.mdp_json {
        put("mdp.json", &output.model.to_json()?)?;
    }
    if let Some(rows) = &output.trace {
        put("trajectory.csv", &trace_csv(rows)?)?;
    }
    if config.outputs.svg {
        put("error_curve.svg", &plot::error_curve_svg(&output.report))?;
        put("q_trajectories.svg", &plot::tracked_svg(&output.report))?;
    }
    Ok(written)
}

pub fn trace_csv(rows: &[TraceRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::arg(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_shape() {
        let g = log_grid(1000, 1);
        assert_eq!(g, vec![0, 1, 10, 100, 1000]);
        let g = log_grid(5, 20);
        assert_eq!(g.first(), Some(&0));
        assert_eq!(g.last(), Some(&5));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    fn small(algorithm: Algorithm) -> ExperimentConfig {
        let mut c = ExperimentConfig::reference(algorithm);
        c.horizon = 300;
        c
    }

    #[test]
    fn short_run_is_deterministic() {
        let a = run_experiment(&small(Algorithm::Frqd)).unwrap();
        let b = run_experiment(&small(Algorithm::Frqd)).unwrap();
        assert_eq!(a.report.to_json().unwrap(), b.report.to_json().unwrap());
        assert_eq!(a.report.error_curve.last().unwrap().steps, 300);
    }

    #[test]
    fn assertions_hold_on_the_reference_topology() {
        let mut c = small(Algorithm::Frqd);
        c.assertions = AssertionSpec {
            lemma2_bound: true,
            filter_soundness: true,
            filter_symmetry: true,
            equivalence_check: true,
            ..AssertionSpec::default()
        };
        let out = run_experiment(&c).unwrap();
        assert_eq!(out.report.violations.total(), 0);
        assert!(out.report.diagnostics.tampered_messages > 0);
        assert!(out.report.diagnostics.max_equivalence_gap <= 1e-12);
    }

    #[test]
    fn laplacian_reference_matches_unattacked_frqd() {
        let mut a = small(Algorithm::Frqd);
        a.attack.strategy = AttackStrategy::None;
        let mut b = a.clone();
        b.algorithm = Algorithm::LaplacianReference;
        let ra = run_experiment(&a).unwrap().report;
        let rb = run_experiment(&b).unwrap().report;
        for (qa, qb) in ra
            .final_q
            .iter()
            .flatten()
            .flatten()
            .zip(rb.final_q.iter().flatten().flatten())
        {
            assert!((qa - qb).abs() <= 1e-12);
        }
    }

    #[test]
    fn symmetry_violation_is_reported() {
        // clique-to-leaf pairs share 5 neighbors: enough copies to validate
        // at F = 1, but below the 7 needed for a two-hop edge
        let mut c = small(Algorithm::Frqd);
        c.graph = GraphSpec::Construct { n: 10, r: 5 };
        c.attack.strategy = AttackStrategy::None;
        c.attack.f = 1;
        c.assertions.filter_symmetry = true;
        match run_experiment(&c) {
            Err(Error::InvariantViolation(v)) => assert_eq!(v.invariant, "filter_symmetry"),
            other => panic!("expected a violation, got {other:?}"),
        }
    }
}
