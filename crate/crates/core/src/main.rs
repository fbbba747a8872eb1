use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use loopnet::scenario::{self, RunOptions, Scenario, TaskKind};
use loopnet::Error;

#[derive(Parser)]
#[command(name = "loopnet", version, about = "Loop-group CFT numerics driven by JSON scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file.
    #[arg(long)]
    config: PathBuf,
    /// Artifact directory; overrides `output.dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Stop after the first failing task.
    #[arg(long)]
    fail_fast: bool,
    /// Run independent tasks concurrently.
    #[arg(long)]
    parallel: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task of the scenario.
    Run(Common),
    /// Run the fock-verify tasks.
    Verify(Common),
    /// Run the entropy-profile and bekenstein tasks.
    EntropyProfile {
        #[command(flatten)]
        common: Common,
        /// Also copy the first profile CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the alcove tasks.
    Alcove(Common),
    /// Run the hs-defect tasks.
    HsDefect(Common),
    /// Soliton operations.
    Soliton {
        #[command(subcommand)]
        action: SolitonAction,
    },
    /// Run the exp-ode-check tasks.
    ExpCheck(Common),
    /// Print the simple-type table as JSON.
    Table {
        #[arg(long, default_value_t = 8)]
        max_rank: usize,
    },
}

#[derive(Subcommand)]
enum SolitonAction {
    /// Classify the soliton-classify tasks and print their verdicts.
    Classify(Common),
}

fn load(common: &Common, kinds: Option<&[TaskKind]>) -> Result<Scenario, Error> {
    let text = std::fs::read_to_string(&common.config).map_err(|e| Error::Config {
        pointer: String::new(),
        message: format!("cannot read {}: {e}", common.config.display()),
    })?;
    let mut s = scenario::validate_config(&text)?;
    if let Some(kinds) = kinds {
        s.tasks.retain(|t| kinds.contains(&t.kind()));
        if s.tasks.is_empty() {
            let names: Vec<&str> = kinds.iter().map(|k| k.name()).collect();
            return Err(Error::Config {
                pointer: "/tasks".into(),
                message: format!("no {} task in the scenario", names.join(" or ")),
            });
        }
    }
    if let Some(dir) = &common.out_dir {
        s.output.dir = dir.clone();
    }
    Ok(s)
}

fn execute(common: &Common, kinds: Option<&[TaskKind]>, print_artifacts: bool, copy_csv: Option<&PathBuf>) -> Result<i32, Error> {
    let s = load(common, kinds)?;
    let opts = RunOptions {
        fail_fast: common.fail_fast,
        parallel: common.parallel,
    };
    let (report, artifacts) = scenario::run_scenario(&s, opts);
    scenario::write_artifacts(&s.output.dir, &artifacts)?;
    if let Some(dest) = copy_csv {
        if let Some(a) = artifacts.iter().find(|a| a.name.ends_with("-entropy-profile.csv")) {
            std::fs::write(dest, &a.bytes)?;
        }
    }
    for t in &report.tasks {
        eprintln!("{:>3} {:<16} {:?} ({:.2} s)", t.index, t.task, t.status, t.seconds);
        for c in t.checks.iter().filter(|c| !c.pass) {
            eprintln!("      FAIL {} [{}]: {:.3e} > {:.3e}", c.identity, c.block, c.residual_max, c.tolerance);
        }
        if let Some(m) = &t.message {
            eprintln!("      ERROR {m}");
        }
    }
    if print_artifacts {
        for a in artifacts.iter().filter(|a| a.name.ends_with("-soliton-classify.json")) {
            let _ = std::io::stdout().write_all(&a.bytes);
        }
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => execute(c, None, false, None),
        Command::Verify(c) => execute(c, Some(&[TaskKind::FockVerify]), false, None),
        Command::EntropyProfile { common, out } => execute(
            common,
            Some(&[TaskKind::EntropyProfile, TaskKind::Bekenstein]),
            false,
            out.as_ref(),
        ),
        Command::Alcove(c) => execute(c, Some(&[TaskKind::Alcove]), false, None),
        Command::HsDefect(c) => execute(c, Some(&[TaskKind::HsDefect]), false, None),
        Command::Soliton {
            action: SolitonAction::Classify(c),
        } => execute(c, Some(&[TaskKind::SolitonClassify]), true, None),
        Command::ExpCheck(c) => execute(c, Some(&[TaskKind::ExpOdeCheck]), false, None),
        Command::Table { max_rank } => {
            let table = loopnet::lie::simple_type_table(*max_rank);
            let text = serde_json::to_string_pretty(&table).expect("serializable");
            let _ = writeln!(std::io::stdout(), "{text}");
            Ok(0)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e @ (Error::Config { .. } | Error::Capacity { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
