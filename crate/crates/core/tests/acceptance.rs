//! Acceptance run. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero when any criterion fails.
//!
//! The 30-turbine MTBF sweep needs the external MILP solver and takes the
//! better part of an hour; set `PETAL_SKIP_SWEEP=1` to report it as `SKIP`.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

use common::{external, random_case, rel_diff, Case, P_N, V_N};
use petal::backend::{enumerate_optimal, solve, BackendConfig, SolveResult};
use petal::catalog::wt_capacity;
use petal::evaluate::{compare_designs, monte_carlo_curtailment, recourse_cost, EvalContext};
use petal::io::parse_instance;
use petal::model::{extract_design, validate_design, Design, ModelIR, ModelInput};
use petal::pci::{run_pci, solve_deterministic, PciConfig, PciTrace};
use petal::scenario::{build_system_states, nominal_current, ScenarioTree};

const EXACT: f64 = 1e-6;
const IRRELEVANCE: f64 = 1e-9;
const RESIDUAL: f64 = 1e-6;
const SWEEP_MTBF: [f64; 5] = [10.0, 20.0, 30.0, 50.0, 178.0];
/// Relative MIP gap and per-solve limit for the 30-turbine sweep.
const SWEEP_GAP: f64 = 0.01;
const SWEEP_TIME_LIMIT_S: f64 = 400.0;

struct Line {
    id: u8,
    verdict: &'static str,
    text: String,
    elapsed: Duration,
}

/// Every design returned by a solve, with the inputs of its model.
#[derive(Default)]
struct Returned {
    designs: Vec<(String, Design, ModelInput)>,
}

impl Returned {
    fn push_result(&mut self, what: String, ir: &ModelIR, r: &SolveResult) {
        if let Some(a) = &r.assignment {
            let d = extract_design(ir, a, Some(r.objective)).expect("extractable solution");
            self.designs.push((what, d, ir.input.clone()));
        }
    }

    /// PCI designs carry the leaves of the last model solved.
    fn push_pci(&mut self, what: String, ctx: &EvalContext, design: &Design, trace: &PciTrace) {
        let last = trace.records.last().expect("at least one solve");
        let list: Vec<(usize, f64)> = last.modeled.iter().map(|&e| (e, ctx.graph.lengths[e])).collect();
        let states = build_system_states(&list, &ctx.failure).expect("valid states");
        let mut options = ctx.options;
        options.zero_curtailment = false;
        let tree = ScenarioTree::new(ctx.winds.clone(), states).expect("valid tree");
        self.designs.push((what, design.clone(), ModelInput { graph: ctx.graph.clone(), cables: ctx.cables.clone(), tree, options }));
    }
}

/// Stochastic total vs the deterministic design under the same contingencies.
#[derive(Default)]
struct Dominance {
    checked: usize,
    worst: f64,
    failures: Vec<String>,
}

impl Dominance {
    fn check(&mut self, what: &str, ctx: &EvalContext, det: &Design, stoch: &Design, tol: f64) {
        let row = compare_designs(det, stoch, ctx).expect("evaluable designs");
        let (d, s) = (row.deterministic.total(), row.stochastic.total());
        let excess = (s - d) / d.abs().max(1.0);
        self.checked += 1;
        self.worst = self.worst.max(excess);
        if excess > tol {
            self.failures.push(format!("{what}: stochastic {s:.3} > deterministic {d:.3}"));
        }
    }
}

fn mix(i: u64) -> (usize, usize) {
    (3 + (i % 4) as usize, 1 + (i / 4 % 2) as usize)
}

fn oracle_equivalence(ret: &mut Returned, dom: &mut Dominance) -> (bool, String) {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    let n = 52;
    for i in 0..n {
        let (n_w, types) = mix(i);
        let case = random_case(1000 + i, n_w, types);
        let ir = case.model(&case.full_tree());
        let by_enum = solve(&ir, &BackendConfig::enumeration(), None).unwrap();
        let by_milp = solve(&ir, &external(), None).unwrap();
        if by_enum.has_solution() != by_milp.has_solution() {
            bad.push(format!("seed {}: {:?} vs {:?}", case.seed, by_enum.status, by_milp.status));
            continue;
        }
        if !by_enum.has_solution() {
            continue;
        }
        let d = rel_diff(by_enum.objective, by_milp.objective);
        worst = worst.max(d);
        if d > EXACT {
            bad.push(format!("seed {}: {} vs {}", case.seed, by_enum.objective, by_milp.objective));
        }
        ret.push_result(format!("c1 enumeration seed {}", case.seed), &ir, &by_enum);
        ret.push_result(format!("c1 external seed {}", case.seed), &ir, &by_milp);

        let ctx = case.context(usize::MAX);
        let det = solve_deterministic(&ctx, &BackendConfig::enumeration()).unwrap();
        let stoch = extract_design(&ir, by_enum.assignment.as_ref().unwrap(), None).unwrap();
        dom.check(&format!("seed {}", case.seed), &ctx, &det, &stoch, IRRELEVANCE);
    }
    (bad.is_empty(), format!("{n} instances, max rel diff {worst:.2e}{}", failures(&bad)))
}

fn pci_exactness(ret: &mut Returned, dom: &mut Dominance) -> (bool, String) {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    let mut solves = Vec::new();
    let n = 20;
    for i in 0..n {
        let n_w = 5 + (i % 4) as usize;
        let case = random_case(2000 + i, n_w, 2);
        let full = enumerate_optimal(&ModelInput {
            graph: case.graph.clone(),
            cables: case.cables.clone(),
            tree: case.full_tree(),
            options: case.options,
        })
        .unwrap();
        let Some(reference) = full.design else {
            bad.push(format!("seed {}: full model has no solution", case.seed));
            continue;
        };
        let r_c = case.graph.n_nodes();
        let ctx = case.context(r_c);
        let det = solve_deterministic(&ctx, &BackendConfig::enumeration()).unwrap();
        for (label, backend) in [("enumeration", BackendConfig::enumeration()), ("external", external())] {
            let (design, trace) = run_pci(&ctx, &PciConfig::new(r_c, backend)).unwrap();
            let got = trace.records.last().unwrap().objective;
            let d = rel_diff(got, reference.breakdown.total());
            worst = worst.max(d);
            solves.push(trace.solves());
            if d > EXACT || !trace.converged {
                bad.push(format!("seed {} {label}: {got} vs {}", case.seed, reference.breakdown.total()));
            }
            ret.push_pci(format!("c2 {label} seed {}", case.seed), &ctx, &design, &trace);
            dom.check(&format!("seed {} {label}", case.seed), &ctx, &det, &design, EXACT);
        }
    }
    let max_solves = solves.iter().max().copied().unwrap_or(0);
    (bad.is_empty(), format!("{n} instances x 2 backends, max rel diff {worst:.2e}, at most {max_solves} solves{}", failures(&bad)))
}

fn optimum_with(case: &Case, edges: &BTreeSet<usize>, ret: &mut Returned, what: String) -> (f64, Design) {
    let list: Vec<usize> = edges.iter().copied().collect();
    let ir = case.model(&case.tree_for(&list));
    let r = solve(&ir, &BackendConfig::enumeration(), None).unwrap();
    ret.push_result(what, &ir, &r);
    let design = extract_design(&ir, r.assignment.as_ref().unwrap(), Some(r.objective)).unwrap();
    (r.objective, design)
}

fn inactive_irrelevance(ret: &mut Returned) -> (bool, String) {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    let mut added = 0;
    let n = 10;
    for i in 0..n {
        let case = random_case(3000 + i, 4 + (i % 3) as usize, 2);
        // model the failures of the full-model optimum's edges, then add
        // states for edges that the optimum of that model leaves unused
        let full = enumerate_optimal(&ModelInput {
            graph: case.graph.clone(),
            cables: case.cables.clone(),
            tree: case.full_tree(),
            options: case.options,
        })
        .unwrap()
        .design
        .unwrap();
        let modeled: BTreeSet<usize> = full.active_edges().into_iter().collect();
        let (base, design) = optimum_with(&case, &modeled, ret, format!("c3 seed {}", case.seed));
        for e in (0..case.graph.edges.len()).filter(|&e| !design.is_active(e) && !modeled.contains(&e)) {
            let mut more = modeled.clone();
            more.insert(e);
            let (o, _) = optimum_with(&case, &more, ret, format!("c3 seed {} +{e}", case.seed));
            added += 1;
            let d = rel_diff(base, o);
            worst = worst.max(d);
            if d > IRRELEVANCE {
                bad.push(format!("seed {} edge {e}: {base} vs {o}", case.seed));
            }
        }
    }
    (bad.is_empty(), format!("{n} instances, {added} inactive-edge states added, max rel change {worst:.2e}{}", failures(&bad)))
}

fn monte_carlo(ret: &mut Returned) -> (bool, String) {
    let mut bad = Vec::new();
    let mut worst_z = 0.0f64;
    let mut slowest = Duration::ZERO;
    let mut done = 0;
    let mut seed = 4000;
    while done < 5 {
        seed += 1;
        let mut case = random_case(seed, 4 + done % 3, 2);
        case.options.phi = 2;
        let ctx = case.context(usize::MAX);
        let Ok(det) = solve_deterministic(&ctx, &BackendConfig::enumeration()) else {
            continue;
        };
        let input = ctx.input_for(&det).unwrap();
        let analytic = recourse_cost(&det, &input).unwrap().cost;
        let started = Instant::now();
        let mc = monte_carlo_curtailment(&det, &input, input.tree.total_hours(), 100_000, seed).unwrap();
        let took = started.elapsed();
        slowest = slowest.max(took);
        let z = if mc.std_error > 0.0 { (mc.mean - analytic).abs() / mc.std_error } else { (mc.mean - analytic).abs() };
        worst_z = worst_z.max(z);
        if z > 3.0 || took > Duration::from_secs(60) {
            bad.push(format!("seed {seed}: analytic {analytic:.3} mc {:.3} se {:.3} in {took:.1?}", mc.mean, mc.std_error));
        }
        let mut plain = det.clone();
        plain.leaves.clear();
        ret.designs.push((format!("c5 seed {seed}"), plain, input));
        done += 1;
    }
    (bad.is_empty(), format!("5 single-loop designs, max |z| {worst_z:.2}, slowest {slowest:.2?}{}", failures(&bad)))
}

fn preprocessing() -> (bool, String) {
    let inst = parse_instance(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/table1-surrogate.toml")).unwrap();
    let caps: Vec<usize> = inst.catalog().unwrap().types().iter().map(|t| wt_capacity(t, P_N, V_N).unwrap()).collect();
    let current = nominal_current(inst.electrical.p_n_mw, inst.electrical.v_n_kv, 1.0);
    let hours: f64 = inst.wind_scenarios().iter().map(|w| w.duration_h).sum();
    let pass = caps == [6, 7, 8] && (current - 87.477).abs() <= 1e-3 && (hours - 262_800.0).abs() < 1e-9;
    (pass, format!("wt_capacity {caps:?}, nominal current {current:.4} A, scenario hours {hours}"))
}

fn sweep(ret: &mut Returned, dom: &mut Dominance) -> (bool, String) {
    let mut inst = parse_instance(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/table1-surrogate.toml")).unwrap();
    inst.backend.gap = SWEEP_GAP;
    inst.backend.time_limit_s = SWEEP_TIME_LIMIT_S;
    let base = inst.context().unwrap();
    let det = solve_deterministic(&base, &inst.backend).unwrap();
    let mut rows = Vec::new();
    for mtbf in SWEEP_MTBF {
        let mut one = inst.clone();
        one.failure.mtbf_years_km = mtbf;
        let ctx = one.context().unwrap();
        let (stoch, trace) = run_pci(&ctx, &one.pci_config()).unwrap();
        ret.push_pci(format!("c7 mtbf {mtbf}"), &ctx, &stoch, &trace);
        // the stochastic design can be up to the gap worse than its optimum
        dom.check(&format!("surrogate mtbf {mtbf}"), &ctx, &det, &stoch, SWEEP_GAP);
        rows.push((compare_designs(&det, &stoch, &ctx).unwrap(), trace.solves()));
    }
    let pct: Vec<f64> = rows.iter().map(|(r, _)| r.total_pct).collect();
    let first = &rows[0].0;
    let a = first.stochastic.total() <= first.deterministic.total() * (1.0 + SWEEP_GAP);
    let b = pct.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let c = pct.last().unwrap().abs() < 1.0;
    let listing: Vec<String> = rows.iter().map(|(r, s)| format!("{}:{:.2}%/{s}", r.mtbf, r.total_pct)).collect();
    (a && b && c, format!("saving by MTBF (solves) [{}]; (a) {a} (b) {b} (c) {c}; gap {SWEEP_GAP}", listing.join(" ")))
}

fn residuals(ret: &Returned) -> (bool, String) {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    let mut leaves = 0;
    for (what, d, input) in &ret.designs {
        let report = validate_design(d, input);
        leaves += d.leaves.len();
        worst = worst.max(report.worst());
        if !report.passes(RESIDUAL) {
            bad.push(format!("{what}: {:?}", report.flagged(RESIDUAL)));
        }
    }
    (bad.is_empty(), format!("{} designs, {leaves} leaves, max residual {worst:.2e}{}", ret.designs.len(), failures(&bad)))
}

fn failures(bad: &[String]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", bad.iter().take(5).cloned().collect::<Vec<_>>().join("; "))
    }
}

fn main() {
    let mut ret = Returned::default();
    let mut dom = Dominance::default();
    let mut lines = Vec::new();
    let mut run = |id: u8, f: &mut dyn FnMut() -> (bool, String)| {
        let started = Instant::now();
        let (pass, text) = f();
        let line = Line { id, verdict: if pass { "PASS" } else { "FAIL" }, text, elapsed: started.elapsed() };
        println!("criterion {} {} ({:.1?}): {}", line.id, line.verdict, line.elapsed, line.text);
        lines.push(line);
    };

    run(6, &mut preprocessing);
    run(1, &mut || oracle_equivalence(&mut ret, &mut dom));
    run(2, &mut || pci_exactness(&mut ret, &mut dom));
    run(3, &mut || inactive_irrelevance(&mut ret));
    run(5, &mut || monte_carlo(&mut ret));
    if std::env::var_os("PETAL_SKIP_SWEEP").is_some() {
        println!("criterion 7 SKIP: PETAL_SKIP_SWEEP is set");
    } else {
        run(7, &mut || sweep(&mut ret, &mut dom));
    }
    run(4, &mut || residuals(&ret));
    run(8, &mut || {
        let tail = failures(&dom.failures);
        (dom.failures.is_empty(), format!("{} comparisons, worst relative excess {:.2e}{tail}", dom.checked, dom.worst))
    });

    let failed: Vec<u8> = lines.iter().filter(|l| l.verdict == "FAIL").map(|l| l.id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", lines.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
