//! `gwfo`: command-line front end.
//!
//! Exit status is 0 on success, 1 on usage or input errors and 2 when a
//! run completes but fails its validation bound.

mod input;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gwfo::calculus::{class_probability_expr, sentence_probability, solve_survival, Conditioning};
use gwfo::classes::classify;
use gwfo::games::{ehr_ball, ehr_standard};
use gwfo::harness::{
    containment_decay, mc_class_frequencies, mc_conditional_frequencies, report_emit, to_json,
    McReport, ReportFormat, Z_BOUND,
};
use gwfo::logic::{evaluate, Dialect};
use gwfo::sampler::{sample_forest, sample_tree, OffspringDistribution, Seed, DEFAULT_BUDGET};
use gwfo::tree::{NodeId, RootedTree};
use gwfo::universal::{
    ball_radius, build_christmas_tree, build_christmas_tree_with_copies, check_point1,
    check_point2, distance_bound, BallCatalog,
};
use serde_json::json;

use input::{parse_seed, read_ball_dir, read_class, read_formula, read_tree, Failure};

#[derive(Parser)]
#[command(
    name = "gwfo",
    version,
    about = "First-order properties of Poisson Galton-Watson trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a tree (or a forest) by the fictitious continuation.
    Simulate(SimulateArgs),
    /// Print the Γ_i class of a tree.
    Classify {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        depth: u32,
        /// Tree in parenthesis form, or a file holding one.
        #[arg(long)]
        tree: String,
    },
    /// Exact probability of a class.
    Prob {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long)]
        lambda: f64,
        #[arg(long, value_enum)]
        conditional: Option<Conditional>,
    },
    /// The class probability as a nice function of x.
    Expr {
        #[command(flatten)]
        class: ClassArgs,
    },
    /// Survival probability p and extinction probability q.
    Survival {
        #[arg(long)]
        lambda: f64,
    },
    /// Probability of a first-order sentence through its Γ_i classes.
    SentenceProb {
        /// Sentence text, or a file holding it.
        #[arg(long)]
        formula: String,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        lambda: f64,
        #[arg(long, value_enum)]
        conditional: Option<Conditional>,
    },
    /// Play an Ehrenfeucht game.
    Ef(EfArgs),
    /// Quantifier depth and evaluation of sentences.
    #[command(subcommand)]
    Fo(FoCommand),
    /// Build a Christmas tree from a directory of ball files and check it.
    Christmas {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Copies of each ball; defaults to k.
        #[arg(long)]
        copies: Option<usize>,
    },
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Mc(McCommand),
}

#[derive(Args)]
struct SimulateArgs {
    /// Poisson mean.
    #[arg(long, conflicts_with = "probs", required_unless_present = "probs")]
    lambda: Option<f64>,
    /// Finite offspring law as comma-separated probabilities of 0, 1, 2, ...
    #[arg(long)]
    probs: Option<String>,
    #[arg(long, value_parser = parse_seed, default_value = "0xC0FFEE")]
    seed: Seed,
    /// Maximum number of explored nodes.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Run the forest process for exactly --nodes draws.
    #[arg(long, requires = "nodes")]
    forest: bool,
    #[arg(long)]
    nodes: Option<usize>,
    /// Write trees here, one per line, and the trace to <out>.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassArgs {
    /// Class text, or a file holding it; a `k=.. depth=..` header line may
    /// replace the flags.
    #[arg(long)]
    class: String,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    depth: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Conditional {
    Infinite,
    Finite,
}

fn conditioning(c: Option<Conditional>) -> Conditioning {
    match c {
        None => Conditioning::Unconditioned,
        Some(Conditional::Infinite) => Conditioning::Infinite,
        Some(Conditional::Finite) => Conditioning::Finite,
    }
}

#[derive(Args)]
struct EfArgs {
    #[arg(long)]
    k: u32,
    t1: String,
    t2: String,
    /// Play the distance-preserving game on balls.
    #[arg(long, requires_all = ["center1", "center2"])]
    ball: bool,
    /// Distance bound; defaults to 2·3^(k+1).
    #[arg(long = "M")]
    m: Option<u32>,
    /// Ball radius; defaults to 3^(k+1).
    #[arg(long)]
    radius: Option<u32>,
    #[arg(long)]
    center1: Option<usize>,
    #[arg(long)]
    center2: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DialectArg {
    Standard,
    Ball,
}

#[derive(Args)]
struct FormulaArgs {
    #[arg(long)]
    formula: String,
    #[arg(long, value_enum, default_value = "standard")]
    dialect: DialectArg,
    /// Largest distance atom in the ball dialect.
    #[arg(long = "M", default_value_t = 18)]
    m: u32,
}

impl FormulaArgs {
    fn dialect(&self) -> Dialect {
        match self.dialect {
            DialectArg::Standard => Dialect::Standard,
            DialectArg::Ball => Dialect::Ball { m: self.m },
        }
    }
}

#[derive(Subcommand)]
enum FoCommand {
    Depth {
        #[command(flatten)]
        formula: FormulaArgs,
    },
    Eval {
        #[command(flatten)]
        formula: FormulaArgs,
        #[arg(long)]
        tree: String,
        /// Node (pre-order id) that `R` denotes; the root by default.
        #[arg(long)]
        center: Option<usize>,
    },
}

#[derive(Args)]
struct McCommon {
    #[arg(long)]
    lambda: f64,
    #[arg(long, value_parser = parse_seed, default_value = "0xC0FFEE")]
    seed: Seed,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Subcommand)]
enum McCommand {
    /// Class frequencies of T|_depth against exact probabilities.
    Classes {
        #[command(flatten)]
        common: McCommon,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Class frequencies of trees reaching --proxy-depth against Pr*.
    Conditional {
        #[command(flatten)]
        common: McCommon,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 30)]
        proxy_depth: u32,
    },
    /// Decay of the undetermined fraction for a containment event.
    Decay {
        #[command(flatten)]
        common: McCommon,
        #[arg(long, default_value = "(())")]
        pattern: String,
        #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
        budgets: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(2)
        }
    }
}

fn print_json(v: &serde_json::Value) -> Result<(), Failure> {
    let bytes = to_json(v).map_err(Failure::usage)?;
    print!("{}", String::from_utf8_lossy(&bytes));
    Ok(())
}

fn write_out(bytes: &[u8], out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, bytes)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{}", String::from_utf8_lossy(bytes));
            Ok(())
        }
    }
}

/// Pre-order positions, which are the ids a parenthesis file is read back
/// with.
fn preorder_ids(t: &RootedTree) -> Vec<u32> {
    let mut pos = vec![0u32; t.len()];
    for (i, v) in t.preorder().into_iter().enumerate() {
        pos[v.index()] = i as u32;
    }
    pos
}

fn node(t: &RootedTree, id: usize, what: &str) -> Result<NodeId, Failure> {
    t.preorder().get(id).copied().ok_or_else(|| {
        Failure::Usage(format!(
            "{what} {id} is not a node of a {}-node tree",
            t.len()
        ))
    })
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Classify { k, depth, tree } => {
            let t = read_tree(&tree)?;
            println!("{}", classify(&t, k, depth).to_text());
            Ok(())
        }
        Command::Prob {
            class,
            lambda,
            conditional,
        } => {
            let c = read_class(&class.class, class.k, class.depth)?;
            let cond = conditioning(conditional);
            let value = cond.probability(&c, lambda).map_err(Failure::usage)?;
            print_json(&json!({
                "class": c.canonical(),
                "k": c.k(),
                "depth": c.depth(),
                "lambda": lambda,
                "conditioning": cond,
                "value": value,
            }))
        }
        Command::Expr { class } => {
            let c = read_class(&class.class, class.k, class.depth)?;
            println!("{}", class_probability_expr(&c));
            Ok(())
        }
        Command::Survival { lambda } => {
            let s = solve_survival(lambda).map_err(Failure::usage)?;
            print_json(&json!({
                "lambda": s.lambda,
                "p": s.p,
                "q": s.q,
                "residual": s.residual(),
            }))
        }
        Command::SentenceProb {
            formula,
            depth,
            lambda,
            conditional,
        } => {
            let f = read_formula(&formula, Dialect::Standard)?;
            let r = sentence_probability(&f, lambda, depth, conditioning(conditional))
                .map_err(Failure::usage)?;
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            print_json(&json!({
                "value": r.value,
                "k": r.k,
                "depth": r.depth,
                "lambda": lambda,
                "conditioning": r.conditioning,
                "classes": r.event.len(),
                "warnings": r.warnings,
            }))
        }
        Command::Ef(a) => ef(a),
        Command::Fo(FoCommand::Depth { formula }) => {
            let f = read_formula(&formula.formula, formula.dialect())?;
            print_json(&json!({ "depth": f.quantifier_depth() }))
        }
        Command::Fo(FoCommand::Eval {
            formula,
            tree,
            center,
        }) => {
            let f = read_formula(&formula.formula, formula.dialect())?;
            if !f.is_sentence() {
                return Err(Failure::Usage(format!(
                    "formula has free variables: {}",
                    f.free_variables().join(", ")
                )));
            }
            let t = read_tree(&tree)?;
            let c = center.map(|id| node(&t, id, "center")).transpose()?;
            print_json(&json!({
                "depth": f.quantifier_depth(),
                "value": evaluate(&f, &t, c),
            }))
        }
        Command::Christmas {
            k,
            catalog,
            out,
            copies,
        } => christmas(k, &catalog, &out, copies),
        Command::Mc(m) => mc(m),
    }
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let d = match (a.lambda, &a.probs) {
        (Some(l), _) => OffspringDistribution::poisson(l),
        (None, Some(p)) => {
            let probs = p
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Usage(format!("--probs: {e}")))?;
            OffspringDistribution::finite_support(probs)
        }
        (None, None) => unreachable!("clap requires one of --lambda and --probs"),
    }
    .map_err(Failure::usage)?;
    if a.budget == 0 {
        return Err(Failure::Usage("--budget must be at least 1".into()));
    }
    let (trees, sidecar) = if a.forest {
        let n = a.nodes.expect("clap requires --nodes");
        if n == 0 {
            return Err(Failure::Usage("--nodes must be at least 1".into()));
        }
        let f = sample_forest(&d, a.seed, n);
        let sidecar = json!({
            "seed": a.seed,
            "roots": f.roots,
            "last_complete": f.last_complete,
            "trace": f.trace,
        });
        (f.trees, sidecar)
    } else {
        let s = sample_tree(&d, a.seed, a.budget);
        let sidecar = json!({ "seed": a.seed, "status": s.status, "trace": s.trace });
        (vec![s.tree], sidecar)
    };
    let lines: Vec<String> = trees.iter().map(|t| t.to_parens()).collect();
    match &a.out {
        Some(p) => {
            write_out(format!("{}\n", lines.join("\n")).as_bytes(), Some(p))?;
            let mut side = p.clone().into_os_string();
            side.push(".json");
            write_out(
                &to_json(&sidecar).map_err(Failure::usage)?,
                Some(Path::new(&side)),
            )
        }
        None => {
            let mut all = sidecar;
            all["trees"] = json!(lines);
            print_json(&all)
        }
    }
}

fn ef(a: EfArgs) -> Result<(), Failure> {
    let t1 = read_tree(&a.t1)?;
    let t2 = read_tree(&a.t2)?;
    let v = if a.ball {
        let r = a.radius.unwrap_or_else(|| ball_radius(a.k));
        let m = a.m.unwrap_or_else(|| distance_bound(a.k));
        if r == 0 {
            return Err(Failure::Usage("--radius must be at least 1".into()));
        }
        let c1 = node(&t1, a.center1.expect("clap requires --center1"), "center1")?;
        let c2 = node(&t2, a.center2.expect("clap requires --center2"), "center2")?;
        ehr_ball(&t1.ball(c1, r), &t2.ball(c2, r), a.k, m).map_err(Failure::usage)?
    } else {
        ehr_standard(&t1, &t2, a.k)
    };
    print_json(&json!({ "winner": v.winner, "positions": v.positions }))
}

fn christmas(k: u32, dir: &Path, out: &Path, copies: Option<usize>) -> Result<(), Failure> {
    let balls = read_ball_dir(dir)?;
    let cat = BallCatalog::new(k, balls).map_err(Failure::usage)?;
    let x = match copies {
        Some(c) => build_christmas_tree_with_copies(&cat, c),
        None => build_christmas_tree(&cat),
    };
    write_out(format!("{}\n", x.tree.to_parens()).as_bytes(), Some(out))?;
    let p1 = check_point1(&x.tree, &cat).map_err(Failure::usage)?;
    let p2 = check_point2(&x.tree, &cat, k).map_err(Failure::usage)?;
    let ids = preorder_ids(&x.tree);
    let remap = |vs: &[NodeId]| -> Vec<u32> { vs.iter().map(|v| ids[v.index()]).collect() };
    let witnesses: Vec<Vec<u32>> = p1
        .witnesses
        .iter()
        .map(|ws| ws.iter().map(|&v| ids[v as usize]).collect())
        .collect();
    print_json(&json!({
        "k": k,
        "nodes": x.tree.len(),
        "centers": x.centers.iter().map(|c| remap(c)).collect::<Vec<_>>(),
        "tops": x.tops.iter().map(|c| remap(c)).collect::<Vec<_>>(),
        "point1": {
            "passed": p1.passed,
            "witnesses": witnesses,
            "candidates": p1.candidates,
            "failure": p1.failure,
        },
        "point2": p2,
    }))?;
    if !p1.passed || !p2.passed {
        return Err(Failure::Validation(
            "the tree fails a universality condition".into(),
        ));
    }
    Ok(())
}

fn z_failures(rows: &[McReport]) -> Vec<String> {
    rows.iter()
        .filter(|r| r.expected_count().unwrap_or(0.0) >= 25.0)
        .filter(|r| r.z_score.is_some_and(|z| z.abs() > Z_BOUND))
        .map(|r| {
            format!(
                "{} z = {:.2}",
                r.parameters["class"],
                r.z_score.unwrap_or(0.0)
            )
        })
        .collect()
}

fn mc(cmd: McCommand) -> Result<(), Failure> {
    let (bytes, out, failures) = match cmd {
        McCommand::Classes {
            common,
            k,
            depth,
            trials,
        } => {
            let rows = mc_class_frequencies(common.lambda, k, depth, trials, common.seed)
                .map_err(Failure::usage)?;
            let format = common.format.unwrap_or(FormatArg::Csv).into();
            let bytes = report_emit(&rows, format).map_err(Failure::usage)?;
            (bytes, common.out, z_failures(&rows))
        }
        McCommand::Conditional {
            common,
            k,
            depth,
            trials,
            proxy_depth,
        } => {
            let rows = mc_conditional_frequencies(
                common.lambda,
                k,
                depth,
                trials,
                proxy_depth,
                common.seed,
            )
            .map_err(Failure::usage)?;
            let format = common.format.unwrap_or(FormatArg::Csv).into();
            let bytes = report_emit(&rows, format).map_err(Failure::usage)?;
            (bytes, common.out, z_failures(&rows))
        }
        McCommand::Decay {
            common,
            pattern,
            budgets,
            trials,
        } => {
            let p = read_tree(&pattern)?;
            let r = containment_decay(&p, common.lambda, &budgets, trials, common.seed)
                .map_err(Failure::usage)?;
            let format = common.format.unwrap_or(FormatArg::Json).into();
            let bytes = report_emit(&r, format).map_err(Failure::usage)?;
            let mut failures = Vec::new();
            if !r.non_increasing_within(2.0) {
                failures.push(format!("rates increase beyond 2σ: {:?}", r.bad_rates));
            }
            if r.fitted_log_slope.is_some_and(|b| b >= 0.0) {
                failures.push("fitted log slope is not negative".into());
            }
            (bytes, common.out, failures)
        }
    };
    write_out(&bytes, out.as_deref())?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(failures.join("; ")))
    }
}
