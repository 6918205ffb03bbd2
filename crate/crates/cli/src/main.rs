//! JSON front end for the npq-core library. Requests arrive as a single
//! JSON object or an array of them (a batch); responses mirror that shape.
//! Batches run concurrently and results keep the input order. The process
//! exit code is the worst outcome across the batch: 0 success, 1 malformed
//! request, 2 rejected by the library, 3 failed numeric verification.

use std::fs;
use std::io::Read as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

mod ops;

use ops::{CliError, Outcome, Request};

#[derive(Parser)]
#[command(
    name = "npq",
    version,
    about = "Conformal geometry on R^{p,q}: quadric classification, conformal actions, orbit maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Request file; reads stdin when omitted.
    file: Option<PathBuf>,
    /// Residual tolerance override for float-mode verification.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Seed for randomized sampling checks.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a quadric by sign and section dimension.
    Classify(CommonArgs),
    /// Apply a conformal transformation to a point, quadric, or surface.
    Act(CommonArgs),
    /// Build an orthogonal map carrying one quadric onto another.
    #[command(name = "orbit-map")]
    OrbitMap(CommonArgs),
    /// Factor a conformal transformation into generators.
    Decompose(CommonArgs),
    /// Plucker coordinates of 2-planes in R^4 and the induced 2,2 model.
    Grassmann(CommonArgs),
    /// Map an affine point into the projective quadric.
    Embed(CommonArgs),
    /// Map a quadric point back to affine coordinates.
    Unembed(CommonArgs),
    /// Sample a plane quadric curve to CSV.
    Plot(CommonArgs),
}

fn read_input(file: &Option<PathBuf>) -> Result<String, CliError> {
    match file {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display()))),
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::parse(format!("cannot read stdin: {e}")))?;
            Ok(buf)
        }
    }
}

fn parse_input(file: &Option<PathBuf>) -> Result<Value, CliError> {
    let text = read_input(file)?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(format!("input is not JSON: {e}")))
}

fn error_value(e: &CliError) -> Value {
    json!({
        "ok": false,
        "error": { "kind": e.kind.label(), "message": e.message },
    })
}

fn ok_value(outcome: &Outcome) -> Value {
    let mut v = json!({
        "ok": true,
        "mode": outcome.mode,
        "result": outcome.result,
    });
    if let Some(res) = &outcome.residuals {
        v.as_object_mut()
            .expect("envelope is an object")
            .insert(
                "residuals".into(),
                serde_json::to_value(res).expect("residuals serialize"),
            );
    }
    v
}

fn run_one(command: &str, raw: Value, args: &CommonArgs) -> (Value, u8) {
    let req: Request = match serde_json::from_value(raw) {
        Ok(r) => r,
        Err(e) => {
            let err = CliError::parse(format!("request: {e}"));
            return (error_value(&err), err.kind.exit_code());
        }
    };
    match ops::handle(command, &req, args.tolerance, args.seed) {
        Ok(outcome) => (ok_value(&outcome), 0),
        Err(e) => (error_value(&e), e.kind.exit_code()),
    }
}

fn run_json_command(command: &str, args: &CommonArgs) -> (String, u8) {
    let raw = match parse_input(&args.file) {
        Ok(v) => v,
        Err(e) => return (error_value(&e).to_string(), e.kind.exit_code()),
    };
    match raw {
        Value::Array(items) => {
            let results: Vec<(Value, u8)> = items
                .into_par_iter()
                .map(|item| run_one(command, item, args))
                .collect();
            let code = results.iter().map(|(_, c)| *c).max().unwrap_or(0);
            let values: Vec<Value> = results.into_iter().map(|(v, _)| v).collect();
            (Value::Array(values).to_string(), code)
        }
        single => {
            let (value, code) = run_one(command, single, args);
            (value.to_string(), code)
        }
    }
}

fn run_plot(args: &CommonArgs) -> (String, u8) {
    let raw = match parse_input(&args.file) {
        Ok(Value::Array(_)) => {
            let e = CliError::parse("plot takes a single request, not a batch");
            return (error_value(&e).to_string(), e.kind.exit_code());
        }
        Ok(v) => v,
        Err(e) => return (error_value(&e).to_string(), e.kind.exit_code()),
    };
    let req: Request = match serde_json::from_value(raw) {
        Ok(r) => r,
        Err(e) => {
            let err = CliError::parse(format!("request: {e}"));
            return (error_value(&err).to_string(), err.kind.exit_code());
        }
    };
    match ops::plot(&req) {
        Ok(csv) => (csv, 0),
        Err(e) => (error_value(&e).to_string(), e.kind.exit_code()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Classify(a) => ("classify", a),
        Command::Act(a) => ("act", a),
        Command::OrbitMap(a) => ("orbit-map", a),
        Command::Decompose(a) => ("decompose", a),
        Command::Grassmann(a) => ("grassmann", a),
        Command::Embed(a) => ("embed", a),
        Command::Unembed(a) => ("unembed", a),
        Command::Plot(a) => ("plot", a),
    };
    let (output, code) = if name == "plot" {
        run_plot(args)
    } else {
        run_json_command(name, args)
    };
    if output.ends_with('\n') {
        print!("{output}");
    } else {
        println!("{output}");
    }
    ExitCode::from(code)
}
