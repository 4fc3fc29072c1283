//! Command-line surface. Exit codes: 0 success, 2 invalid input, 3 solver
//! failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::backend::{emit_model_file, BackendKind};
use crate::error::{Error, Result};
use crate::evaluate::{compare_designs, monte_carlo_curtailment, recourse_cost, ComparisonReport, EvalContext};
use crate::io::{parse_design, parse_instance, DesignFile, FarmInstance};
use crate::model::{build_model, validate_design, Design, INTEGRALITY_TOL};
use crate::pci::{run_pci, solve_deterministic};
use crate::render::render_layout;
use crate::scenario::{build_system_states, ScenarioTree};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "petal", version, about = "Closed-loop offshore wind collection system design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Instance file (TOML).
    #[arg(long, short)]
    instance: PathBuf,
    /// Directory for output files.
    #[arg(long, short, default_value = "out")]
    out_dir: PathBuf,
    /// Relative MIP gap, overriding the instance.
    #[arg(long)]
    gap: Option<f64>,
    /// Seconds per solve, overriding the instance.
    #[arg(long)]
    time_limit: Option<f64>,
    /// MTBF in years·km per failure, overriding the instance; `compare`
    /// takes a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    mtbf: Vec<f64>,
    /// Solver backend, overriding the instance.
    #[arg(long, value_enum)]
    backend: Option<Backend>,
    /// External solver command template.
    #[arg(long)]
    solver_cmd: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Backend {
    Enumeration,
    External,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TreeKind {
    /// Nominal wind, base state, no curtailment.
    Deterministic,
    /// All wind scenarios and a failure state for every candidate edge.
    Full,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Deterministic design (nominal wind, no failures).
    SolveDet(Common),
    /// Stochastic design by progressive contingency incorporation.
    SolveStoch(Common),
    /// Expected curtailment cost of a stored design.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, short)]
        design: PathBuf,
    },
    /// Deterministic vs stochastic design over an MTBF sweep.
    Compare(Common),
    /// Monte-Carlo estimate of a design's curtailment cost.
    McValidate {
        #[command(flatten)]
        common: Common,
        #[arg(long, short)]
        design: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// SVG drawing of a stored design.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long, short)]
        design: PathBuf,
    },
    /// Write the model as fixed-format MPS.
    ExportMps {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "full")]
        tree: TreeKind,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invalid(_) | Error::Parse { .. } | Error::Io(_) => EXIT_INVALID,
        Error::Infeasible(_) | Error::Solver(_) | Error::Inconsistent(_) => EXIT_SOLVER,
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load(common: &Common) -> Result<FarmInstance> {
    let mut inst = parse_instance(&common.instance)?;
    if let Some(g) = common.gap {
        inst.backend.gap = g;
    }
    if let Some(t) = common.time_limit {
        inst.backend.time_limit_s = t;
    }
    match common.mtbf.as_slice() {
        [] => {}
        [m] => inst.failure.mtbf_years_km = *m,
        _ => return Err(Error::invalid("--mtbf takes a single value for this command")),
    }
    if let Some(b) = common.backend {
        inst.backend.kind = match b {
            Backend::Enumeration => BackendKind::Enumeration,
            Backend::External => BackendKind::External,
        };
    }
    if let Some(c) = &common.solver_cmd {
        inst.backend.command = Some(c.clone());
    }
    inst.validate()?;
    Ok(inst)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    eprintln!("wrote {}", path.display());
    Ok(path)
}

fn check(design: &Design, ctx: &EvalContext) -> Result<()> {
    let input = ctx.input_for(design)?;
    let mut plain = design.clone();
    plain.leaves.clear();
    let report = validate_design(&plain, &input);
    if !report.passes(INTEGRALITY_TOL) {
        return Err(Error::Inconsistent(report.findings.join("; ")));
    }
    Ok(())
}

fn save_design(inst: &FarmInstance, ctx: &EvalContext, design: &Design, kind: &str, dir: &Path) -> Result<()> {
    let file = DesignFile::from_design(design, inst, &ctx.graph, &ctx.cables, kind);
    write(dir, &format!("design-{kind}.toml"), &file.to_toml())?;
    write(dir, &format!("layout-{kind}.svg"), &render_layout(design, &ctx.graph, &ctx.cables, &format!("{kind} design")))?;
    let b = design.breakdown;
    println!("{kind}: investment {:.2} losses {:.2} reliability {:.2} total {:.2}", b.investment, b.losses, b.reliability, b.total());
    Ok(())
}

fn stored_design(path: &Path, ctx: &EvalContext) -> Result<Design> {
    parse_design(path)?.to_design(&ctx.graph, &ctx.cables)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::SolveDet(common) => {
            let inst = load(&common)?;
            let ctx = inst.context()?;
            let design = solve_deterministic(&ctx, &inst.backend)?;
            check(&design, &ctx)?;
            save_design(&inst, &ctx, &design, "deterministic", &common.out_dir)
        }
        Command::SolveStoch(common) => {
            let inst = load(&common)?;
            let ctx = inst.context()?;
            let (design, trace) = run_pci(&ctx, &inst.pci_config())?;
            write(&common.out_dir, "pci-trace.txt", &trace.to_text(&ctx.graph))?;
            if !trace.converged {
                eprintln!("warning: PCI stopped after kappa_max = {} iterations without converging", inst.model.kappa_max);
            }
            save_design(&inst, &ctx, &design, "stochastic", &common.out_dir)
        }
        Command::Evaluate { common, design } => {
            let inst = load(&common)?;
            let ctx = inst.context()?;
            let d = stored_design(&design, &ctx)?;
            let b = ctx.cost_of(&d)?;
            let input = ctx.input_for(&d)?;
            let recourse = recourse_cost(&d, &input)?;
            let mut csv = String::from("wind,state,failed_edge,probability,curtailment_a,cost\n");
            for lf in &recourse.leaves {
                let state = &input.tree.states[lf.leaf.state];
                let failed =
                    state.failed_edge.map(|e| format!("{}-{}", ctx.graph.edges[e].a + 1, ctx.graph.edges[e].b + 1)).unwrap_or_default();
                csv.push_str(&format!(
                    "{},{},{},{:.12e},{:.6},{:.6}\n",
                    input.tree.winds[lf.leaf.wind].id,
                    state.id,
                    failed,
                    state.probability,
                    lf.total_curtailment(),
                    lf.cost
                ));
            }
            write(&common.out_dir, "evaluation.csv", &csv)?;
            println!(
                "mtbf {} r_c {}: investment {:.2} losses {:.2} reliability {:.2} total {:.2}",
                inst.failure.mtbf_years_km,
                inst.model.r_c,
                b.investment,
                b.losses,
                b.reliability,
                b.total()
            );
            Ok(())
        }
        Command::Compare(mut common) => {
            let sweep = std::mem::take(&mut common.mtbf);
            let inst = load(&common)?;
            let mtbf_list = if sweep.is_empty() { vec![inst.failure.mtbf_years_km] } else { sweep };
            let base = inst.context()?;
            let det = solve_deterministic(&base, &inst.backend)?;
            save_design(&inst, &base, &det, "deterministic", &common.out_dir)?;
            let mut report = ComparisonReport::default();
            for mtbf in mtbf_list {
                let mut one = inst.clone();
                one.failure.mtbf_years_km = mtbf;
                one.validate()?;
                let ctx = one.context()?;
                let (stoch, trace) = run_pci(&ctx, &one.pci_config())?;
                let dir = common.out_dir.join(format!("mtbf-{mtbf}"));
                write(&dir, "pci-trace.txt", &trace.to_text(&ctx.graph))?;
                save_design(&one, &ctx, &stoch, "stochastic", &dir)?;
                let row = compare_designs(&det, &stoch, &ctx)?;
                println!("{}", row.csv());
                report.rows.push(row);
            }
            write(&common.out_dir, "comparison.csv", &report.to_csv())?;
            Ok(())
        }
        Command::McValidate { common, design, seed, samples } => {
            let inst = load(&common)?;
            let ctx = inst.context()?;
            let d = stored_design(&design, &ctx)?;
            let input = ctx.input_for(&d)?;
            let analytic = recourse_cost(&d, &input)?.cost;
            let seed = seed.unwrap_or(inst.monte_carlo.seed);
            let n = samples.unwrap_or(inst.monte_carlo.samples);
            let mc = monte_carlo_curtailment(&d, &input, input.tree.total_hours(), n, seed)?;
            let z = if mc.std_error > 0.0 { (mc.mean - analytic) / mc.std_error } else { 0.0 };
            let csv = format!(
                "analytic,mc_mean,std_error,samples,seed,z\n{analytic:.6},{:.6},{:.6},{},{},{z:.4}\n",
                mc.mean, mc.std_error, mc.samples, mc.seed
            );
            write(&common.out_dir, "mc-validation.csv", &csv)?;
            print!("{csv}");
            Ok(())
        }
        Command::Render { common, design } => {
            let inst = load(&common)?;
            let ctx = inst.context()?;
            let file = parse_design(&design)?;
            let d = file.to_design(&ctx.graph, &ctx.cables)?;
            let stem = design.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "design".into());
            write(&common.out_dir, &format!("{stem}.svg"), &render_layout(&d, &ctx.graph, &ctx.cables, &file.kind))?;
            Ok(())
        }
        Command::ExportMps { common, tree } => {
            let inst = load(&common)?;
            let ctx = inst.context()?;
            let mut opts = ctx.options;
            let tree = match tree {
                TreeKind::Deterministic => {
                    opts.zero_curtailment = true;
                    ScenarioTree::deterministic(&ctx.winds)?
                }
                TreeKind::Full => {
                    let edges: Vec<(usize, f64)> = (0..ctx.graph.edges.len()).map(|e| (e, ctx.graph.lengths[e])).collect();
                    ScenarioTree::new(ctx.winds.clone(), build_system_states(&edges, &ctx.failure)?)?
                }
            };
            let ir = build_model(&ctx.graph, &ctx.cables, &tree, &opts)?;
            let stats = ir.stats();
            eprintln!("{} binaries, {} continuous, {} rows", stats.binaries, stats.continuous, ir.constraints.len());
            write(&common.out_dir, "model.mps", &emit_model_file(&ir))?;
            let names: String =
                ir.variables.iter().enumerate().map(|(i, v)| format!("{} {}\n", crate::backend::column_name(i), v.name)).collect();
            write(&common.out_dir, "model.names", &names)?;
            Ok(())
        }
    }
}
