//! `tcp`: command-line front end for the tcflow toolkit.

mod commands;
mod config;
mod sweep;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::config::Config;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "tcp", version, about = "Taylor-Couette-Poiseuille stability and separation laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

/// Flags shared by all subcommands.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// key=value file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Critical lambda, Taylor number and dbeta/dlambda per axial mode.
    #[command(args_override_self = true)]
    Eigen(commands::EigenArgs),
    /// Bifurcated amplitudes along a lambda range.
    #[command(args_override_self = true)]
    Branch(commands::BranchArgs),
    /// Separation thresholds and locations for the model fields.
    #[command(args_override_self = true)]
    Separation(commands::SeparationArgs),
    /// Singular points, separatrices and structural-stability verdict.
    #[command(args_override_self = true)]
    Topology(commands::TopologyArgs),
    /// Time integration of the nonlinear equations.
    #[command(args_override_self = true)]
    Dns(commands::DnsArgs),
    /// Run another subcommand over a one- or two-parameter grid.
    #[command(args_override_self = true)]
    Sweep(sweep::SweepArgs),
    /// Closed-form radial profile R and its derivatives.
    #[command(args_override_self = true)]
    Profile(commands::ProfileArgs),
}

/// Failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure { code: 2, msg: msg.into() }
    }
}

impl From<tcflow::Error> for Failure {
    fn from(e: tcflow::Error) -> Self {
        Failure { code: if e.is_validation() { 2 } else { 3 }, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 2, msg: e.to_string() }
    }
}

/// What a subcommand produced: files for the output directory, text for
/// stdout, and one summary row used by sweeps.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub stdout: String,
    pub summary: Vec<String>,
}

/// Parsed invocation together with its resolved manifest.
pub struct Invocation {
    pub cli: Cli,
    pub manifest: String,
}

fn config_path(rest: &[OsString]) -> Option<PathBuf> {
    let mut it = rest.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Insert the config file's pairs right after the subcommand name, so that
/// later command-line flags override them.
pub fn expand_config(argv: &[OsString]) -> Result<Vec<OsString>, Failure> {
    if argv.len() < 2 {
        return Ok(argv.to_vec());
    }
    let sub = argv[1].to_string_lossy().to_string();
    let Some(path) = config_path(&argv[2..]) else {
        return Ok(argv.to_vec());
    };
    if sub == "sweep" {
        // the sweep reads its file itself
        return Ok(argv.to_vec());
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let mut cfg = Config::parse(&text).map_err(Failure::usage)?;
    if let Some(c) = cfg.take("command") {
        if c != sub {
            return Err(Failure::usage(format!("config is for '{c}', not '{sub}'")));
        }
    }
    cfg.take("version");
    let mut out: Vec<OsString> = argv[..2].to_vec();
    out.extend(cfg.to_args().into_iter().map(OsString::from));
    out.extend(argv[2..].iter().cloned());
    Ok(out)
}

const NOT_IN_MANIFEST: [&str; 4] = ["help", "version", "config", "out"];

/// Resolved `key=value` lines for a parsed subcommand, in declaration order.
fn manifest_of(sub: &str, m: &clap::ArgMatches) -> String {
    let cmd = Cli::command();
    let sc = cmd.find_subcommand(sub).expect("parsed subcommand exists");
    let mut s = format!("command={sub}\nversion={VERSION}\n");
    for a in sc.get_arguments() {
        let id = a.get_id().as_str();
        if NOT_IN_MANIFEST.contains(&id) {
            continue;
        }
        let Some(long) = a.get_long() else { continue };
        if let Some(vals) = m.get_raw(id) {
            let v: Vec<String> = vals.map(|v| v.to_string_lossy().to_string()).collect();
            s.push_str(&format!("{long}={}\n", v.join(",")));
        }
    }
    s
}

pub fn parse(argv: &[OsString]) -> Result<Invocation, clap::Error> {
    let m = Cli::command().try_get_matches_from(argv)?;
    let cli = Cli::from_arg_matches(&m)?;
    let manifest = match m.subcommand() {
        Some((name, sm)) => manifest_of(name, sm),
        None => String::new(),
    };
    Ok(Invocation { cli, manifest })
}

fn common(cmd: &Cmd) -> &Common {
    match cmd {
        Cmd::Eigen(a) => &a.common,
        Cmd::Branch(a) => &a.common,
        Cmd::Separation(a) => &a.common,
        Cmd::Topology(a) => &a.common,
        Cmd::Dns(a) => &a.common,
        Cmd::Sweep(a) => &a.common,
        Cmd::Profile(a) => &a.common,
    }
}

/// Run one parsed subcommand without touching the file system.
pub fn execute(cmd: &Cmd) -> Result<Outcome, Failure> {
    match cmd {
        Cmd::Eigen(a) => commands::eigen(a),
        Cmd::Branch(a) => commands::branch(a),
        Cmd::Separation(a) => commands::separation(a),
        Cmd::Topology(a) => commands::topology(a),
        Cmd::Dns(a) => commands::dns(a),
        Cmd::Sweep(a) => sweep::sweep(a),
        Cmd::Profile(a) => commands::profile(a),
    }
}

pub fn write_outputs(dir: &Path, out: &Outcome, manifest: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)?;
    for (name, text) in &out.files {
        std::fs::write(dir.join(name), text)?;
    }
    std::fs::write(dir.join("manifest"), manifest)?;
    Ok(())
}

/// Full run: returns the process exit code.
pub fn run(argv: Vec<OsString>) -> u8 {
    let argv = match expand_config(&argv) {
        Ok(a) => a,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            return f.code;
        }
    };
    let inv = match parse(&argv) {
        Ok(i) => i,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let dir = common(&inv.cli.cmd).out.clone();
    let manifest = match &inv.cli.cmd {
        Cmd::Sweep(a) => match sweep::manifest(a) {
            Ok(m) => m,
            Err(f) => {
                eprintln!("error: {}", f.msg);
                return f.code;
            }
        },
        _ => inv.manifest.clone(),
    };
    let res = execute(&inv.cli.cmd).and_then(|out| {
        write_outputs(&dir, &out, &manifest)?;
        Ok(out)
    });
    match res {
        Ok(out) => {
            print!("{}", out.stdout);
            0
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            f.code
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os().collect()))
}
