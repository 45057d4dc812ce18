use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use manego::experiment::{generate, run_experiment, stream_digest, Check, ExperimentConfig, TargetPolicy};
use manego::oracle::multiset_count;
use manego::{
    aggregate, brute_force, parse_instance, solve, swf, verify, Decision, GateMode, Instance, ManipulationQuery, Mode,
    NegotiationInstance, OracleLimits, Party, Rule,
};

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_DISAGREE: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "manego",
    version,
    about = "Manipulation of negotiating teams under positional scoring rules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the team's aggregate scores and ranking.
    Swf {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Print the bargaining outcome and the compromise trace.
    Negotiate {
        #[arg(long, default_value = "team")]
        initiator: Party,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Decide whether manipulators can reach (or block) a target.
    Manipulate {
        #[command(flatten)]
        query: QueryArgs,
        /// Print the per-iteration records.
        #[arg(long)]
        trace: bool,
    },
    /// Decide by exhaustive search over manipulator votes.
    Oracle {
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        limits: LimitArgs,
        /// Also run the polynomial solver; exit 2 if the two disagree.
        #[arg(long)]
        compare: bool,
        /// With --compare, give the solver one extra manipulator and only
        /// flag oracle successes it misses.
        #[arg(long, requires = "compare")]
        one_additive: bool,
    },
    /// Print a seeded stream of random instances.
    Generate {
        #[command(flatten)]
        stream: StreamArgs,
    },
    /// Check the solver against the oracle on a seeded stream.
    Experiment {
        #[command(flatten)]
        stream: StreamArgs,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// equivalence, one-additive or gates.
        #[arg(long, default_value = "equivalence")]
        check: Check,
        #[command(flatten)]
        limits: LimitArgs,
        /// Add per-instance timing columns.
        #[arg(long)]
        timings: bool,
        /// Print the replayable instance of every disagreement.
        #[arg(long)]
        show_disagreements: bool,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Instance file, or `-` for standard input.
    file: PathBuf,
    /// Overrides the rule given in the file.
    #[arg(long)]
    rule: Option<Rule>,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    mode: Mode,
    #[arg(long)]
    target: String,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// paper or feasible.
    #[arg(long, default_value = "paper")]
    gate: GateMode,
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long)]
    max_outcomes: Option<usize>,
    #[arg(long)]
    max_manipulators: Option<usize>,
    #[arg(long)]
    max_voters: Option<usize>,
}

impl LimitArgs {
    fn limits(&self) -> OracleLimits {
        let d = OracleLimits::default();
        OracleLimits {
            max_outcomes: self.max_outcomes.unwrap_or(d.max_outcomes),
            max_manipulators: self.max_manipulators.unwrap_or(d.max_manipulators),
            max_voters: self.max_voters.unwrap_or(d.max_voters),
        }
    }
}

#[derive(Args)]
struct StreamArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value = "borda")]
    rule: Rule,
    #[arg(long, default_value = "constructive")]
    mode: Mode,
    #[arg(long, default_value = "paper")]
    gate: GateMode,
    /// gate (targets the gate does not settle) or uniform.
    #[arg(long, default_value = "gate")]
    targets: TargetPolicy,
}

impl StreamArgs {
    fn config(&self, k: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(self.seed, self.count, self.m, self.n, k, self.rule.clone(), self.mode);
        c.gate = self.gate;
        c.target_policy = self.targets;
        c
    }
}

type CliResult = Result<u8, String>;

fn load(input: &InputArgs) -> Result<Instance, String> {
    let text = if input.file.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| format!("stdin: {e}"))?;
        s
    } else {
        std::fs::read_to_string(&input.file).map_err(|e| format!("{}: {e}", input.file.display()))?
    };
    let mut instance = parse_instance(&text).map_err(|e| format!("{}: {e}", input.file.display()))?;
    if let Some(rule) = &input.rule {
        rule.vector(instance.other.len()).map_err(|e| e.to_string())?;
        instance.rule = rule.clone();
    }
    Ok(instance)
}

fn query_of(args: &QueryArgs) -> Result<(Instance, ManipulationQuery), String> {
    let instance = load(&args.input)?;
    let target = args.target.parse().map_err(|e: manego::Error| e.to_string())?;
    let query = ManipulationQuery::new(
        instance.team.clone(),
        instance.other.clone(),
        instance.rule.clone(),
        args.mode,
        target,
        args.k,
    )
    .map_err(|e| e.to_string())?
    .with_gate(args.gate);
    Ok((instance, query))
}

fn cmd_swf(input: &InputArgs) -> CliResult {
    let instance = load(input)?;
    let scores = aggregate(&instance.team, &instance.rule).map_err(|e| e.to_string())?;
    let order = scores.ranking();
    println!("scores: {scores}");
    println!("order: {order}");
    Ok(EXIT_OK)
}

fn cmd_negotiate(initiator: Party, input: &InputArgs) -> CliResult {
    let instance = load(input)?;
    let team = swf(&instance.team, &instance.rule).map_err(|e| e.to_string())?;
    let game = NegotiationInstance::new(team.clone(), instance.other.clone()).map_err(|e| e.to_string())?;
    println!("team: {team}");
    println!("other: {}", instance.other);
    println!("spe({initiator}): {}", game.spe_result(initiator));
    let rc = game.rc();
    for j in 1..=rc.terminating_index {
        let a: Vec<_> = team.ranking()[..j].iter().collect();
        let both: Vec<String> = a
            .iter()
            .filter(|o| instance.other.ranking()[..j].contains(o))
            .map(|o| o.to_string())
            .collect();
        println!("rc j={j}: {{{}}}", both.join(" "));
    }
    let outcomes: Vec<String> = rc.outcomes.iter().map(|o| o.to_string()).collect();
    println!("rc: j={} {}", rc.terminating_index, outcomes.join(" "));
    Ok(EXIT_OK)
}

fn cmd_manipulate(args: &QueryArgs, show_trace: bool) -> CliResult {
    let (_, query) = query_of(args)?;
    let result = solve(&query).map_err(|e| e.to_string())?;
    if show_trace {
        for line in result.trace_lines() {
            println!("{line}");
        }
    } else {
        println!("decision: {}", result.decision);
    }
    if result.decision.is_positive() {
        for vote in &result.votes {
            println!("vote: {vote}");
        }
        let profile = query.honest.with_votes(&result.votes).map_err(|e| e.to_string())?;
        let scores = aggregate(&profile, &query.rule).map_err(|e| e.to_string())?;
        let order = scores.ranking();
        let game = NegotiationInstance::new(order.clone(), query.other.clone()).map_err(|e| e.to_string())?;
        let (nt, no) = game.spe_both();
        println!("scores: {scores}");
        println!("order: {order}");
        println!("spe: team={nt} other={no}");
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_NEGATIVE)
    }
}

fn cmd_oracle(args: &QueryArgs, limits: &LimitArgs, compare: bool, one_additive: bool) -> CliResult {
    let (instance, query) = query_of(args)?;
    let limits = limits.limits();
    let m = query.num_outcomes() as u64;
    let orders: u64 = (1..=m).product();
    println!(
        "estimate: {} vote multisets",
        multiset_count(orders, query.manipulators as u64)
    );
    let started = Instant::now();
    let oracle = brute_force(&query, &limits).map_err(|e| e.to_string())?;
    println!("oracle: {}", oracle.decision);
    for vote in &oracle.witness {
        println!("witness: {vote}");
    }
    println!("checked: {} in {:.3}s", oracle.checked, started.elapsed().as_secs_f64());
    if !compare {
        return Ok(if oracle.decision.is_positive() {
            EXIT_OK
        } else {
            EXIT_NEGATIVE
        });
    }

    let solver_query = if one_additive {
        query.clone().with_manipulators(query.manipulators + 1)
    } else {
        query.clone()
    };
    let result = solve(&solver_query).map_err(|e| e.to_string())?;
    let mut solver = result.decision;
    if solver.is_positive()
        && !verify(
            &query.honest,
            &query.other,
            &result.votes,
            &query.rule,
            query.mode,
            &query.target,
        )
        .map_err(|e| e.to_string())?
    {
        println!("solver votes fail verification");
        solver = Decision::No;
    }
    println!("solver(k={}): {solver}", solver_query.manipulators);
    let agree = if one_additive {
        !oracle.decision.is_positive() || solver.is_positive()
    } else {
        oracle.decision.is_positive() == solver.is_positive()
    };
    println!("agree: {agree}");
    if agree {
        return Ok(EXIT_OK);
    }
    println!(
        "# disagreement: oracle --compare{} --mode {} --target {} --k {} --gate {}",
        if one_additive { " --one-additive" } else { "" },
        query.mode,
        query.target,
        query.manipulators,
        query.gate
    );
    print!("{instance}");
    Ok(EXIT_DISAGREE)
}

fn cmd_generate(stream: &StreamArgs) -> CliResult {
    let instances = generate(&stream.config(0)).map_err(|e| e.to_string())?;
    for g in &instances {
        println!("# instance {} target {} digest {}", g.index, g.target, g.digest());
        println!("{}", g.instance);
    }
    println!("# stream digest: {}", stream_digest(&instances));
    Ok(EXIT_OK)
}

fn cmd_experiment(
    stream: &StreamArgs,
    k: usize,
    check: Check,
    limits: &LimitArgs,
    timings: bool,
    show: bool,
) -> CliResult {
    let mut config = stream.config(k);
    config.check = check;
    config.limits = limits.limits();
    let report = run_experiment(&config).map_err(|e| e.to_string())?;
    print!("{}", report.to_csv(timings));
    if show {
        for r in report.disagreements() {
            println!();
            print!("{}", r.replay);
        }
    }
    let summary = report.summary();
    if check != Check::GateComparison && summary.disagreements > 0 {
        return Ok(EXIT_DISAGREE);
    }
    Ok(EXIT_OK)
}

fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Command::Swf { input } => cmd_swf(input),
        Command::Negotiate { initiator, input } => cmd_negotiate(*initiator, input),
        Command::Manipulate { query, trace } => cmd_manipulate(query, *trace),
        Command::Oracle {
            query,
            limits,
            compare,
            one_additive,
        } => cmd_oracle(query, limits, *compare, *one_additive),
        Command::Generate { stream } => cmd_generate(stream),
        Command::Experiment {
            stream,
            k,
            check,
            limits,
            timings,
            show_disagreements,
        } => cmd_experiment(stream, *k, *check, limits, *timings, *show_disagreements),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
