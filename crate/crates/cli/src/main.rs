//! Command-line front end: each subcommand reproduces one verification
//! pipeline and emits a machine-readable report (stdout or --out). Exit code
//! 0 iff every check in the run passed.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nonlocal_core::analysis::{
    no_state_selftest_certificate, GameHandle, SelfTestReport,
};
use nonlocal_core::games::{
    classical_value, perfect_classical_exists, GameJson, NonlocalGame,
};
use nonlocal_core::graphgames::{
    check_qis, independence_number, independent_set_game, strategy_from_qis,
};
use nonlocal_core::kochenspecker::{
    enumerate_bases, is_weak_ks, orthogonality_graph, peres_33,
    quantum_independent_set_from_ks, to_projective_ks, RaySet, WeakKsVerdict,
};
use nonlocal_core::magicsquare::{
    magic_square_game, magic_square_reference_strategy, sync_magic_square_game,
    sync_magic_square_reference_strategy,
};
use nonlocal_core::numerics::{is_povm, is_projection, Tolerance};
use nonlocal_core::orgame::{lift_strategy, or_game, OrGame, ParentId};
use nonlocal_core::strategies::{
    check_sync_identity, strategy_from_json, win_prob, QuantumStrategy, StrategyJson,
};

#[derive(Parser)]
#[command(name = "nonlocal", version, about = "Build and verify two-player nonlocal games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Residual tolerance for algebraic identities.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the magic square reference strategies and classical value.
    VerifyMagicSquare {
        /// Check this strategy file against the magic square game instead of
        /// the built-in reference strategy.
        #[arg(long)]
        strategy: Option<PathBuf>,
    },
    /// Run the bundled 33-ray pipeline: bases, weak-KS verdict, orthogonality
    /// graph, independence number, quantum independent set, induced strategy.
    PeresPipeline {
        /// Use a custom ray file (exact components over integers and sqrt2).
        #[arg(long)]
        rays: Option<PathBuf>,
        /// Also write the orthogonality graph in DOT format to this path.
        #[arg(long)]
        emit_dot: Option<PathBuf>,
        /// Node budget for the independence solver.
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
    },
    /// Certify that the bundled disjunction game does not single out a state
    /// (or run the certificate on a custom game and two strategies).
    NoStateSelftest {
        /// Build the disjunction with the parents swapped.
        #[arg(long)]
        swap_parents: bool,
        /// Custom game file (requires --strategies).
        #[arg(long, requires = "strategies")]
        game: Option<PathBuf>,
        /// Two strategy files for the custom game.
        #[arg(long, num_args = 2)]
        strategies: Option<Vec<PathBuf>>,
    },
    /// Exact classical value of a game by exhaustive search.
    ClassicalValue {
        #[arg(long)]
        game: PathBuf,
        /// Cap on the number of deterministic strategy pairs.
        #[arg(long, default_value_t = 1e7)]
        limit: f64,
    },
    /// Build the disjunction game of two games.
    OrGame {
        #[arg(long)]
        g1: PathBuf,
        #[arg(long)]
        g2: PathBuf,
    },
    /// Evaluate a strategy file against a game file.
    EvalStrategy {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
    },
}

#[derive(Serialize)]
struct Check {
    name: String,
    pass: bool,
    value: String,
}

impl Check {
    fn new(name: &str, pass: bool, value: impl Into<String>) -> Self {
        Check { name: name.into(), pass, value: value.into() }
    }
}

#[derive(Serialize)]
struct RunReport {
    command: String,
    checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<SelfTestReport>,
}

impl RunReport {
    fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "check {}: {} ({})\n",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.value
            ));
        }
        if let Some(s) = &self.summary {
            out.push_str(s);
            out.push('\n');
        }
        if let Some(r) = &self.report {
            out.push_str(&r.render_text());
        }
        out
    }
}

fn read_game(path: &PathBuf) -> Result<NonlocalGame> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json: GameJson =
        serde_json::from_str(&text).with_context(|| format!("parsing game {}", path.display()))?;
    Ok(NonlocalGame::from_json(&json)?)
}

fn read_strategy(path: &PathBuf, g: &NonlocalGame, tol: Tolerance) -> Result<QuantumStrategy> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json: StrategyJson = serde_json::from_str(&text)
        .with_context(|| format!("parsing strategy {}", path.display()))?;
    Ok(strategy_from_json(&json, g, tol)?)
}

fn cmd_verify_magic_square(
    strategy_path: Option<PathBuf>,
    tol: Tolerance,
) -> Result<RunReport> {
    let mut checks = Vec::new();
    let game = magic_square_game();
    let strategy = match &strategy_path {
        Some(p) => read_strategy(p, &game, tol)
            .map_err(|e| anyhow!("check strategy-load: FAIL ({e})"))?,
        None => magic_square_reference_strategy(),
    };

    let w = win_prob(&game, &strategy)?;
    checks.push(Check::new(
        "magic-square-strategy-perfect",
        (w - 1.0).abs() <= tol.eq,
        format!("win_prob={w:.9}"),
    ));

    let mut all_pvm = true;
    for family in strategy.povms_a().iter().chain(strategy.povms_b()) {
        all_pvm &= is_povm(family, tol)?;
        for op in family {
            all_pvm &= is_projection(op, tol)?;
        }
    }
    checks.push(Check::new("magic-square-families-pvm", all_pvm, "6 families"));

    let cv = classical_value(&game, 1e7)?;
    checks.push(Check::new(
        "magic-square-classical-value",
        cv.value < nonlocal_core::games::Rational::new(1, 1),
        format!("classical_value={}", cv.value),
    ));

    let sync_game = sync_magic_square_game();
    let sync_strategy = sync_magic_square_reference_strategy();
    let ws = win_prob(&sync_game, &sync_strategy)?;
    checks.push(Check::new(
        "sync-magic-square-strategy-perfect",
        (ws - 1.0).abs() <= tol.eq,
        format!("win_prob={ws:.9}"),
    ));
    let mut worst_sync = 0.0f64;
    for x in 0..6 {
        for a in 0..8 {
            worst_sync = worst_sync.max(check_sync_identity(&sync_strategy, x, a)?);
        }
    }
    checks.push(Check::new(
        "sync-magic-square-identities",
        worst_sync <= tol.eq,
        format!("max_residual={worst_sync:e}"),
    ));
    checks.push(Check::new(
        "sync-magic-square-not-classically-perfect",
        perfect_classical_exists(&sync_game).is_none(),
        "backtracking search",
    ));

    let summary = format!("win_prob={w:.9}, classical_value={}", cv.value);
    Ok(RunReport {
        command: "verify-magic-square".into(),
        checks,
        summary: Some(summary),
        report: None,
    })
}

fn cmd_peres_pipeline(
    rays_path: Option<PathBuf>,
    emit_dot: Option<PathBuf>,
    budget: u64,
    tol: Tolerance,
    want_dot: bool,
) -> Result<(RunReport, Option<String>)> {
    let bundled = rays_path.is_none();
    let rays = match &rays_path {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            RaySet::parse(3, &text)?
        }
        None => peres_33(),
    };
    let mut checks = Vec::new();
    checks.push(Check::new(
        "ray-count",
        !bundled || rays.len() == 33,
        format!("rays={}", rays.len()),
    ));
    let bases = enumerate_bases(&rays)?;
    checks.push(Check::new(
        "basis-count",
        !bundled || bases.len() == 16,
        format!("bases={}", bases.len()),
    ));
    let verdict = is_weak_ks(&rays)?;
    let weak = !matches!(verdict, WeakKsVerdict::NotWeakKs(_));
    checks.push(Check::new(
        "weak-kochen-specker",
        weak,
        match &verdict {
            WeakKsVerdict::KochenSpecker => "verdict=KochenSpecker",
            WeakKsVerdict::WeakKochenSpecker => "verdict=WeakKochenSpecker",
            WeakKsVerdict::NotWeakKs(_) => "verdict=NotWeakKs (counterexample marking found)",
        },
    ));
    if !weak {
        return Ok((
            RunReport {
                command: "peres-pipeline".into(),
                checks,
                summary: Some("pipeline stopped: ray set is not a weak Kochen-Specker set".into()),
                report: None,
            },
            None,
        ));
    }

    let ks = to_projective_ks(&rays)?;
    let (graph, _) = orthogonality_graph(&ks);
    checks.push(Check::new(
        "orthogonality-graph",
        !bundled || graph.vertex_count() == 48,
        format!("vertices={}", graph.vertex_count()),
    ));

    let alpha = independence_number(&graph, budget)?;
    checks.push(Check::new(
        "independence-number",
        !bundled || alpha.alpha == 15,
        format!("alpha={} nodes={}", alpha.alpha, alpha.nodes),
    ));

    let qis = quantum_independent_set_from_ks(&ks);
    let qis_check = check_qis(&graph, &qis, tol);
    checks.push(Check::new(
        "quantum-independent-set",
        qis_check.pass && (!bundled || qis.size() == 16),
        format!("size={} max_residual={:e}", qis.size(), qis_check.max_residual()),
    ));
    checks.push(Check::new(
        "qis-exceeds-alpha",
        qis.size() > alpha.alpha,
        format!("{} > {}", qis.size(), alpha.alpha),
    ));

    let strategy = strategy_from_qis(&graph, &qis, tol)?;
    let game = independent_set_game(&graph, qis.size());
    let w = win_prob(&game, &strategy)?;
    let rank = strategy.schmidt_rank(tol)?;
    checks.push(Check::new(
        "induced-strategy-perfect",
        (w - 1.0).abs() <= tol.eq && (!bundled || rank == 3),
        format!("win={w:.9} rank={rank}"),
    ));

    let dot = graph.to_dot();
    if let Some(path) = emit_dot {
        fs::write(&path, &dot).with_context(|| format!("writing {}", path.display()))?;
    }
    let summary = format!(
        "vertices={} alpha={} qis={} rank={} win={:.1}",
        graph.vertex_count(),
        alpha.alpha,
        qis.size(),
        rank,
        w
    );
    Ok((
        RunReport {
            command: "peres-pipeline".into(),
            checks,
            summary: Some(summary),
            report: None,
        },
        want_dot.then_some(dot),
    ))
}

fn build_example_or_game(swap: bool, tol: Tolerance) -> Result<(OrGame, QuantumStrategy, QuantumStrategy)> {
    let ks = to_projective_ks(&peres_33())?;
    let (graph, _) = orthogonality_graph(&ks);
    let qis = quantum_independent_set_from_ks(&ks);
    let is_game = independent_set_game(&graph, qis.size());
    let qis_strategy = strategy_from_qis(&graph, &qis, tol)?;
    let ms_game = magic_square_game();
    let ms_strategy = magic_square_reference_strategy();
    if swap {
        let og = or_game(&ms_game, &is_game)?;
        let s1 = lift_strategy(&og, ParentId::First, &ms_strategy)?;
        let s2 = lift_strategy(&og, ParentId::Second, &qis_strategy)?;
        Ok((og, s1, s2))
    } else {
        let og = or_game(&is_game, &ms_game)?;
        let s1 = lift_strategy(&og, ParentId::First, &qis_strategy)?;
        let s2 = lift_strategy(&og, ParentId::Second, &ms_strategy)?;
        Ok((og, s1, s2))
    }
}

fn cmd_no_state_selftest(
    swap_parents: bool,
    game_path: Option<PathBuf>,
    strategy_paths: Option<Vec<PathBuf>>,
    tol: Tolerance,
) -> Result<RunReport> {
    let report = match (game_path, strategy_paths) {
        (Some(gp), Some(sp)) => {
            let game = read_game(&gp)?;
            let s1 = read_strategy(&sp[0], &game, tol)?;
            let s2 = read_strategy(&sp[1], &game, tol)?;
            no_state_selftest_certificate(GameHandle::Plain(&game), &s1, &s2, tol)?
        }
        _ => {
            let (og, s1, s2) = build_example_or_game(swap_parents, tol)?;
            no_state_selftest_certificate(GameHandle::Or(&og), &s1, &s2, tol)?
        }
    };
    let valid = report.is_valid();
    Ok(RunReport {
        command: "no-state-selftest".into(),
        checks: vec![Check::new(
            "certificate",
            valid,
            if valid { "VALID" } else { "INVALID" },
        )],
        summary: None,
        report: Some(report),
    })
}

fn cmd_classical_value(game_path: PathBuf, limit: f64) -> Result<RunReport> {
    let game = read_game(&game_path)?;
    let result = classical_value(&game, limit)?;
    let summary = format!(
        "classical_value={} witness_fA={:?} witness_fB={:?}",
        result.value, result.witness.f_a, result.witness.f_b
    );
    Ok(RunReport {
        command: "classical-value".into(),
        checks: vec![Check::new("search-complete", true, format!("value={}", result.value))],
        summary: Some(summary),
        report: None,
    })
}

fn cmd_or_game(g1: PathBuf, g2: PathBuf) -> Result<(RunReport, String)> {
    let g1 = read_game(&g1)?;
    let g2 = read_game(&g2)?;
    let og = or_game(&g1, &g2)?;
    let json = serde_json::to_string_pretty(&og.to_json())?;
    let joint = og.game();
    let summary = format!(
        "|I_A|={} |I_B|={} |O_A|={} |O_B|={}",
        joint.n_inputs_a(),
        joint.n_inputs_b(),
        joint.n_outputs_a(),
        joint.n_outputs_b()
    );
    Ok((
        RunReport {
            command: "or-game".into(),
            checks: vec![Check::new("construction", true, summary.clone())],
            summary: Some(summary),
            report: None,
        },
        json,
    ))
}

fn cmd_eval_strategy(game_path: PathBuf, strategy_path: PathBuf, tol: Tolerance) -> Result<RunReport> {
    let game = read_game(&game_path)?;
    let strategy = read_strategy(&strategy_path, &game, tol)
        .map_err(|e| anyhow!("check strategy-load: FAIL ({e})"))?;
    let w = win_prob(&game, &strategy)?;
    let rank = strategy.schmidt_rank(tol)?;
    let summary = format!(
        "win_prob={w:.9} schmidt_rank={rank} synchronous={}",
        game.is_synchronous()
    );
    Ok(RunReport {
        command: "eval-strategy".into(),
        checks: vec![
            Check::new("strategy-load", true, "valid POVM families"),
            Check::new("evaluation", true, format!("win_prob={w:.9}")),
        ],
        summary: Some(summary),
        report: None,
    })
}

fn emit(out: Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let tol = match cli.tol {
        Some(eq) => Tolerance::from_eq(eq).map_err(|e| anyhow!("{e}"))?,
        None => Tolerance::default(),
    };
    let (report, extra) = match cli.command {
        Command::VerifyMagicSquare { strategy } => {
            (cmd_verify_magic_square(strategy, tol)?, None)
        }
        Command::PeresPipeline { rays, emit_dot, budget } => {
            let (r, dot) =
                cmd_peres_pipeline(rays, emit_dot, budget, tol, cli.format == Format::Dot)?;
            (r, dot)
        }
        Command::NoStateSelftest { swap_parents, game, strategies } => {
            (cmd_no_state_selftest(swap_parents, game, strategies, tol)?, None)
        }
        Command::ClassicalValue { game, limit } => (cmd_classical_value(game, limit)?, None),
        Command::OrGame { g1, g2 } => {
            let (r, json) = cmd_or_game(g1, g2)?;
            let pass = r.all_pass();
            emit(cli.out, &json)?;
            if cli.format == Format::Text {
                eprintln!("{}", r.render_text());
            }
            return Ok(pass);
        }
        Command::EvalStrategy { game, strategy } => {
            (cmd_eval_strategy(game, strategy, tol)?, None)
        }
    };
    let pass = report.all_pass();
    let content = match cli.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Text => report.render_text(),
        Format::Dot => match extra {
            Some(dot) => dot,
            None => bail!("--format dot is only available for graph-producing commands"),
        },
    };
    emit(cli.out, &content)?;
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
