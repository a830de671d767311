use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use nonlocal_core::commsim::{
    chromatic_number, coloring_protocol, cost_bounds, simulate_protocol, strategy_to_protocol, ChromaticConfig,
    CommError, DEFAULT_CHROMATIC_BUDGET,
};
use nonlocal_core::format::{self, FormatError};
use nonlocal_core::games::{
    chsh_game, classical_value, detect_weak_projection, hadamard_graph, magic_square_constraints, make_bcs_game,
    make_coloring_game, make_homomorphism_game, tilde_transform, GameError, Graph, NonlocalGame, ParityConstraint,
    Party, SearchConfig, DEFAULT_BUDGET,
};
use nonlocal_core::strategies::{
    block_direct_sum_strategy, chsh_strategy, fourier_strategy_hadamard, is_perfect, lift_strategy_tilde,
    magic_square_strategy, perturb_measurement, structure_report, substitute_max_entangled, QuantumStrategy,
    StrategyError, SubstitutionOptions,
};

#[derive(Parser, Debug)]
#[command(
    name = "nonlocal",
    version,
    about = "Nonlocal games, quantum strategies and one-way protocols"
)]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunConfig {
    /// Numerical tolerance
    #[arg(long, global = true, default_value_t = 1e-9)]
    eps: f64,
    /// Search budget (classical value evaluations, or vertices for chromatic)
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Worker threads
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Seed for randomized probes
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON artifact or report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Only count question pairs with positive probability when detecting projection structure
    #[arg(long, global = true)]
    strict_support: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate graphs, games and strategies
    #[command(subcommand)]
    Gen(Gen),
    /// Analyse a game
    #[command(subcommand)]
    Game(GameCmd),
    /// Check and transform strategies
    #[command(subcommand)]
    Strategy(StrategyCmd),
    /// One-way protocols for promise equality
    #[command(subcommand)]
    Comm(Comm),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PartyArg {
    Alice,
    Bob,
}

impl From<PartyArg> for Party {
    fn from(p: PartyArg) -> Party {
        match p {
            PartyArg::Alice => Party::Alice,
            PartyArg::Bob => Party::Bob,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Gen {
    /// Hadamard graph H_n on n-bit strings, adjacent at distance n/2
    HadamardGraph {
        #[arg(long)]
        n: usize,
    },
    /// Coloring game of a graph with a given number of colors
    ColoringGame {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        colors: usize,
    },
    /// Homomorphism game between two graphs
    HomomorphismGame {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
    },
    /// Binary constraint system game
    BcsGame {
        #[arg(long, conflicts_with = "constraints")]
        magic_square: bool,
        /// JSON list of {"vars": [...], "parity": 0|1}
        #[arg(long, required_unless_present = "magic_square")]
        constraints: Option<PathBuf>,
    },
    /// Perfect Fourier strategy for the n-coloring game of H_n
    FourierStrategy {
        #[arg(long)]
        n: usize,
    },
    /// Perfect magic square strategy on two ebits
    MagicSquareStrategy,
    /// Weighted direct sum of a strategy with itself
    BlocksumStrategy {
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long)]
        p: f64,
    },
    /// CHSH game
    ChshGame,
    /// Optimal one-ebit CHSH strategy
    ChshStrategy,
}

#[derive(Subcommand, Debug)]
enum GameCmd {
    /// Exact classical value by exhaustive search
    ClassicalValue { game: PathBuf },
    /// Detect weak projection structure for each party
    DetectProjection { game: PathBuf },
    /// Add consistency-check questions against one party
    Tilde {
        game: PathBuf,
        #[arg(long, value_enum, default_value = "bob")]
        party: PartyArg,
    },
}

#[derive(Args, Debug)]
struct GameAndStrategy {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    strategy: PathBuf,
}

#[derive(Subcommand, Debug)]
enum StrategyCmd {
    /// Check a strategy is valid and perfect for a game
    Verify(GameAndStrategy),
    /// Replace the state of a perfect strategy with a maximally entangled one
    SubstituteMe {
        #[command(flatten)]
        io: GameAndStrategy,
        /// Compress onto the Schmidt support before substituting
        #[arg(long)]
        restrict_support: bool,
    },
    /// Projectivity and commutation residuals for a strategy
    StructureReport {
        #[command(flatten)]
        io: GameAndStrategy,
        /// Mix one measurement with a random POVM of this weight first
        #[arg(long)]
        perturb: Option<f64>,
        #[arg(long, value_enum, default_value = "bob")]
        perturb_party: PartyArg,
        /// Question to perturb; defaults to the party's first question
        #[arg(long)]
        perturb_question: Option<String>,
    },
    /// Lift a perfect strategy to the tilde game
    LiftTilde {
        #[command(flatten)]
        io: GameAndStrategy,
        #[arg(long, value_enum, default_value = "bob")]
        party: PartyArg,
    },
}

#[derive(Args, Debug)]
struct GraphAndStrategy {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    strategy: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Comm {
    /// Turn a perfect coloring-game strategy into a one-way protocol
    FromStrategy(GraphAndStrategy),
    /// Simulate a one-way protocol on every promise pair
    Simulate(GraphAndStrategy),
    /// Classical protocol sending a vertex color
    ColoringProtocol {
        #[arg(long)]
        graph: PathBuf,
        /// JSON list of colors per vertex; an optimal coloring is computed when omitted
        #[arg(long)]
        coloring: Option<PathBuf>,
    },
    /// Exact chromatic number
    Chromatic {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        parallel: bool,
    },
    /// Communication cost bounds for promise equality
    Bounds {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: u64,
    },
}

/// Exit 1 for verification failures, 2 for everything else.
#[derive(Debug)]
enum Failure {
    Verification(String),
    Input(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Input(_) => 2,
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Strategy(e) => e.into(),
            e => Failure::Input(e.to_string()),
        }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<StrategyError> for Failure {
    fn from(e: StrategyError) -> Self {
        match e {
            StrategyError::NotPerfect { .. } | StrategyError::PostconditionFailed(_) => {
                Failure::Verification(e.to_string())
            }
            e => Failure::Input(e.to_string()),
        }
    }
}

impl From<CommError> for Failure {
    fn from(e: CommError) -> Self {
        match e {
            CommError::NotPerfect { .. } | CommError::NondeterministicAnswer { .. } => {
                Failure::Verification(e.to_string())
            }
            CommError::Strategy(e) => e.into(),
            e => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_game(path: &Path) -> Result<NonlocalGame, Failure> {
    Ok(format::read_game(&read(path)?)?)
}

fn load_graph(path: &Path) -> Result<Graph, Failure> {
    Ok(format::read_graph(&read(path)?)?)
}

fn load_strategy(path: &Path) -> Result<QuantumStrategy, Failure> {
    Ok(format::read_strategy(&read(path)?)?)
}

struct Context {
    run: RunConfig,
}

impl Context {
    /// Artifact goes to `--out` if given, otherwise stdout.
    fn emit(&self, text: &str) -> Outcome {
        match &self.run.out {
            Some(path) => {
                fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
            }
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    /// Summary line on stdout, JSON report to `--out` if given.
    fn report(&self, summary: &str, value: &serde_json::Value) -> Outcome {
        println!("{summary}");
        if let Some(path) = &self.run.out {
            let text = format::to_canonical_json(value)?;
            fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }

    fn eps(&self) -> f64 {
        self.run.eps
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report serializes")
}

fn gen(ctx: &Context, cmd: Gen) -> Outcome {
    let text = match cmd {
        Gen::HadamardGraph { n } => format::write_graph(&hadamard_graph(n)?),
        Gen::ColoringGame { graph, colors } => {
            if colors == 0 {
                return Err(Failure::Input("--colors must be at least 1".into()));
            }
            format::write_game(&make_coloring_game(&load_graph(&graph)?, colors))
        }
        Gen::HomomorphismGame { from, to } => {
            format::write_game(&make_homomorphism_game(&load_graph(&from)?, &load_graph(&to)?))
        }
        Gen::BcsGame {
            magic_square,
            constraints,
        } => {
            let system: Vec<ParityConstraint> = match constraints {
                Some(path) if !magic_square => format::from_json(&read(&path)?)?,
                _ => magic_square_constraints(),
            };
            format::write_game(&make_bcs_game(&system)?)
        }
        Gen::FourierStrategy { n } => format::write_strategy(&fourier_strategy_hadamard(n)?),
        Gen::MagicSquareStrategy => format::write_strategy(&magic_square_strategy()),
        Gen::BlocksumStrategy { strategy, p } => {
            format::write_strategy(&block_direct_sum_strategy(&load_strategy(&strategy)?, p)?)
        }
        Gen::ChshGame => format::write_game(&chsh_game()),
        Gen::ChshStrategy => format::write_strategy(&chsh_strategy()),
    };
    ctx.emit(&text)
}

fn game(ctx: &Context, cmd: GameCmd) -> Outcome {
    match cmd {
        GameCmd::ClassicalValue { game } => {
            let g = load_game(&game)?;
            let config = SearchConfig {
                budget: ctx.run.budget.unwrap_or(DEFAULT_BUDGET),
                jobs: ctx.run.jobs,
            };
            let v = classical_value(&g, &config)?;
            let alice: Vec<&str> = v.alice.iter().map(|&a| g.alice_answers()[a].as_str()).collect();
            let bob: Vec<&str> = v.bob.iter().map(|&b| g.bob_answers()[b].as_str()).collect();
            ctx.report(
                &format!("{}", v.value),
                &json!({ "value": v.value, "alice": alice, "bob": bob, "evaluations": v.evaluations }),
            )
        }
        GameCmd::DetectProjection { game } => {
            let g = load_game(&game)?;
            let analysis = detect_weak_projection(&g, ctx.run.strict_support);
            let describe = |p: Party| match analysis.witness(p) {
                Some(w) => format!("{p}: weakly projective ({} questions)", w.links.len()),
                None => format!("{p}: not weakly projective"),
            };
            let summary = format!(
                "{}; {}; projection game: {}",
                describe(Party::Alice),
                describe(Party::Bob),
                analysis.projection_game
            );
            ctx.report(&summary, &to_value(&analysis))
        }
        GameCmd::Tilde { game, party } => {
            ctx.emit(&format::write_game(&tilde_transform(&load_game(&game)?, party.into())))
        }
    }
}

fn strategy(ctx: &Context, cmd: StrategyCmd) -> Outcome {
    match cmd {
        StrategyCmd::Verify(io) => {
            let g = load_game(&io.game)?;
            let st = load_strategy(&io.strategy)?;
            st.validate(ctx.eps())?;
            let r = is_perfect(&g, &st, ctx.eps())?;
            let summary = if r.perfect {
                format!("perfect within {:e}", ctx.eps())
            } else {
                format!(
                    "not perfect: win probability {:.12}, {} losing outcomes above {:e}",
                    r.win_probability,
                    r.violations.len(),
                    ctx.eps()
                )
            };
            ctx.report(&summary, &to_value(&r))?;
            if r.perfect {
                Ok(())
            } else {
                Err(Failure::Verification("strategy is not perfect".into()))
            }
        }
        StrategyCmd::SubstituteMe { io, restrict_support } => {
            let g = load_game(&io.game)?;
            let st = load_strategy(&io.strategy)?;
            st.validate(ctx.eps())?;
            let options = SubstitutionOptions {
                eps: ctx.eps(),
                restrict_support,
            };
            let sub = substitute_max_entangled(&g, &st, options)?;
            eprintln!(
                "substituted maximally entangled state; {} operators projective within {:.3e}; loss {:.3e}",
                sub.witness.party, sub.projector_residual, sub.loss
            );
            ctx.emit(&format::write_strategy(&sub.strategy))
        }
        StrategyCmd::StructureReport {
            io,
            perturb,
            perturb_party,
            perturb_question,
        } => {
            let g = load_game(&io.game)?;
            let mut st = load_strategy(&io.strategy)?;
            st.validate(ctx.eps())?;
            if let Some(delta) = perturb {
                let party = Party::from(perturb_party);
                let question = match perturb_question {
                    Some(q) => q,
                    None => st
                        .measurements(party)
                        .first()
                        .map(|(q, _)| q.clone())
                        .ok_or_else(|| Failure::Input(format!("{party} has no questions")))?,
                };
                st = perturb_measurement(&st, party, &question, delta, ctx.run.seed)?;
            }
            let report = structure_report(&g, &st, ctx.eps())?;
            ctx.report(&report.summary(), &to_value(&report))
        }
        StrategyCmd::LiftTilde { io, party } => {
            let g = load_game(&io.game)?;
            let st = load_strategy(&io.strategy)?;
            st.validate(ctx.eps())?;
            ctx.emit(&format::write_strategy(&lift_strategy_tilde(
                &g,
                &st,
                party.into(),
                ctx.eps(),
            )?))
        }
    }
}

fn chromatic_config(ctx: &Context, parallel: bool) -> ChromaticConfig {
    ChromaticConfig {
        budget: ctx
            .run
            .budget
            .map_or(DEFAULT_CHROMATIC_BUDGET, |b| usize::try_from(b).unwrap_or(usize::MAX)),
        parallel,
    }
}

fn comm(ctx: &Context, cmd: Comm) -> Outcome {
    match cmd {
        Comm::FromStrategy(io) => {
            let graph = load_graph(&io.graph)?;
            let protocol = strategy_to_protocol(&graph, &load_strategy(&io.strategy)?, ctx.eps())?;
            let cost = protocol.cost();
            ctx.report(
                &format!("{} classical bits + {} qubits", cost.classical_bits, cost.qubits),
                &to_value(&cost),
            )
        }
        Comm::Simulate(io) => {
            let graph = load_graph(&io.graph)?;
            let protocol = strategy_to_protocol(&graph, &load_strategy(&io.strategy)?, ctx.eps())?;
            let sim = simulate_protocol(&protocol, &graph, ctx.eps())?;
            let r = sim.report;
            ctx.report(
                &format!(
                    "{}/{} promise pairs correct, max deviation {:.3e}, cost {} bits + {} qubits",
                    r.correct, r.pairs_checked, r.max_deviation, r.classical_bits, r.qubits
                ),
                &to_value(&r),
            )
        }
        Comm::ColoringProtocol { graph, coloring } => {
            let g = load_graph(&graph)?;
            let (colors, chi) = match coloring {
                Some(path) => (format::from_json::<Vec<usize>>(&read(&path)?)?, None),
                None => {
                    let c = chromatic_number(&g, &chromatic_config(ctx, false))?;
                    (c.coloring, Some(c.chromatic_number))
                }
            };
            let (_, report, _) = coloring_protocol(&g, &colors)?;
            let mut value = to_value(&report);
            value["coloring"] = json!(colors);
            if let Some(chi) = chi {
                value["chromatic_number"] = json!(chi);
            }
            ctx.report(
                &format!(
                    "{}/{} promise pairs correct, cost {} bits",
                    report.correct, report.pairs_checked, report.classical_bits
                ),
                &value,
            )
        }
        Comm::Chromatic { graph, parallel } => {
            let r = chromatic_number(&load_graph(&graph)?, &chromatic_config(ctx, parallel))?;
            ctx.report(&format!("{}", r.chromatic_number), &to_value(&r))
        }
        Comm::Bounds { n, d } => {
            if n == 0 || d == 0 {
                return Err(Failure::Input("--n and --d must be positive".into()));
            }
            let b = cost_bounds(n, d);
            let summary = format!(
                "(1+2√2)^(2d) = {:.6}, 14^d = {:.6}{}; log2 n + 3d = {:.6}; quantum floor log2 n = {:.6}",
                b.per_part_chromatic_bound,
                b.simplified_bound,
                if b.exceeds_simplified { " (exceeds 14^d)" } else { "" },
                b.composed_deterministic_bits,
                b.quantum_floor_qubits
            );
            ctx.report(&summary, &to_value(&b))
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if cli.run.eps.is_nan() || cli.run.eps <= 0.0 {
        return Err(Failure::Input("--eps must be positive".into()));
    }
    if cli.run.budget == Some(0) {
        return Err(Failure::Input("--budget must be positive".into()));
    }
    if cli.run.jobs == 0 {
        return Err(Failure::Input("--jobs must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.run.jobs)
        .build_global()
        .map_err(|e| Failure::Input(e.to_string()))?;
    let ctx = Context { run: cli.run };
    match cli.command {
        Command::Gen(c) => gen(&ctx, c),
        Command::Game(c) => game(&ctx, c),
        Command::Strategy(c) => strategy(&ctx, c),
        Command::Comm(c) => comm(&ctx, c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Verification(msg) | Failure::Input(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
