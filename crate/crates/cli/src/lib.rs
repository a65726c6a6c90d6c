//! Command-line front end: model files in, residual tables and JSON
//! reports out.

pub mod model;
pub mod run;

use std::io::Write;
use std::path::PathBuf;

use clap::{Arg, ArgAction, ArgMatches, Command};

use model::Op;
use run::RunOptions;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

fn model_arg() -> Arg {
    Arg::new("model")
        .value_name("MODEL")
        .required(true)
        .value_parser(clap::value_parser!(PathBuf))
        .help("JSON model file")
}

/// The argument parser. Every [`Op`] has a subcommand of the same name.
pub fn cli() -> Command {
    let mut cmd = Command::new("jetphys")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Residual checks for jet-bundle models of mechanics and field theory")
        .subcommand_required(true)
        .arg(
            Arg::new("out")
                .long("out")
                .global(true)
                .value_name("PATH")
                .value_parser(clap::value_parser!(PathBuf))
                .help("Write the JSON report here"),
        )
        .arg(
            Arg::new("tol")
                .long("tol")
                .global(true)
                .value_name("TOL")
                .value_parser(clap::value_parser!(f64))
                .help("Tolerance for checks that do not set one"),
        )
        .arg(
            Arg::new("parallel")
                .long("parallel")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("Sweep grids on all cores"),
        )
        .arg(
            Arg::new("no-timestamp")
                .long("no-timestamp")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("Leave timestamps and wall times out of the report"),
        )
        .arg(
            Arg::new("verbose")
                .long("verbose")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("Print every residual with its location"),
        )
        .subcommand(Command::new("run").about("Run every check in the model").arg(model_arg()))
        .subcommand(Command::new("report-schema").about("Print the JSON schema of reports"));
    for op in Op::ALL {
        cmd = cmd.subcommand(
            Command::new(op.name())
                .about(format!("Run the model's `{}` checks", op.name()))
                .arg(model_arg()),
        );
    }
    cmd
}

fn flag(m: &ArgMatches, name: &str) -> bool {
    m.get_flag(name)
}

/// Run the tool on `args` (program name first) and return the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INPUT_ERROR;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_PASS;
        }
    };
    let (name, sub) = matches.subcommand().expect("a subcommand is required");
    if name == "report-schema" {
        let schema = serde_json::to_string_pretty(&run::report_schema()).expect("schema serializes");
        let _ = writeln!(out, "{schema}");
        return EXIT_PASS;
    }
    let only = Op::ALL.into_iter().find(|op| op.name() == name);
    let path: &PathBuf = sub.get_one("model").expect("model is required");
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
            return EXIT_INPUT_ERROR;
        }
    };
    let model = match model::load(&text, flag(sub, "parallel")) {
        Ok(m) => m,
        Err(e) => {
            let _ = writeln!(err, "input error: {e}");
            return EXIT_INPUT_ERROR;
        }
    };
    if let Some(op) = only {
        if !model.checks.iter().any(|c| c.op == op) {
            let _ = writeln!(err, "input error: the model has no `{}` checks", op.name());
            return EXIT_INPUT_ERROR;
        }
    }
    let default_tol = sub.get_one::<f64>("tol").copied().unwrap_or(run::DEFAULT_TOL);
    if !(default_tol >= 0.0) {
        let _ = writeln!(err, "input error: --tol must be non-negative");
        return EXIT_INPUT_ERROR;
    }
    let report = run::run(
        &model,
        &RunOptions {
            default_tol,
            timestamp: !flag(sub, "no-timestamp"),
            only,
        },
    );
    for c in &report.checks {
        if let Some(eq) = &c.equation {
            let _ = writeln!(out, "{}:\n{eq}", c.name);
        }
    }
    let _ = write!(out, "{}", report.table());
    for c in &report.checks {
        if let Some(e) = &c.error {
            let _ = writeln!(err, "{}: {e}", c.name);
        }
        if flag(sub, "verbose") {
            for r in &c.residuals {
                let _ = writeln!(
                    out,
                    "  {}/{}: {:.6e} at {:?} (component {})",
                    c.name, r.label, r.max_abs, r.argmax, r.component
                );
            }
        }
    }
    if let Some(target) = sub.get_one::<PathBuf>("out") {
        if let Err(e) = std::fs::write(target, report.to_json()) {
            let _ = writeln!(err, "error: cannot write {}: {e}", target.display());
            return EXIT_INPUT_ERROR;
        }
    }
    if report.all_pass() {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}
