//! Parameter sweeps over another subcommand.
//!
//! The config file names the subcommand and up to two swept flags:
//!
//! ```text
//! command = dns
//! param = lambda
//! from = 42
//! to = 50
//! steps = 5
//! # optional second axis: param2, from2, to2, steps2
//! gamma = 0        # anything else is passed on to the subcommand
//! ```

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use tcflow::field::fmt17;

use crate::commands::summary_header;
use crate::config::Config;
use crate::{execute, parse, write_outputs, Common, Failure, VERSION};

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug)]
struct Axis {
    name: String,
    values: Vec<f64>,
}

#[derive(Debug)]
struct Plan {
    command: String,
    axes: Vec<Axis>,
    rest: Config,
    seed: u64,
}

fn num<T: std::str::FromStr>(cfg: &mut Config, key: &str) -> Result<T, Failure> {
    let v = cfg.take(key).ok_or_else(|| Failure::usage(format!("sweep config needs '{key}'")))?;
    v.parse().map_err(|_| Failure::usage(format!("sweep key {key}: bad value '{v}'")))
}

fn axis(cfg: &mut Config, suffix: &str) -> Result<Option<Axis>, Failure> {
    let Some(name) = cfg.take(&format!("param{suffix}")) else {
        return Ok(None);
    };
    let from: f64 = num(cfg, &format!("from{suffix}"))?;
    let to: f64 = num(cfg, &format!("to{suffix}"))?;
    let steps: usize = num(cfg, &format!("steps{suffix}"))?;
    let values = (0..steps)
        .map(|i| if steps == 1 { from } else { from + (to - from) * i as f64 / (steps - 1) as f64 })
        .collect();
    Ok(Some(Axis { name, values }))
}

fn load(a: &SweepArgs) -> Result<(Plan, String), Failure> {
    let path = a.common.config.as_ref().ok_or_else(|| Failure::usage("sweep needs --config FILE"))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let mut cfg = Config::parse(&text).map_err(Failure::usage)?;
    cfg.take("version");
    let original = cfg.clone();
    let command = cfg.take("command").ok_or_else(|| Failure::usage("sweep config needs 'command'"))?;
    if summary_header(&command).is_none() {
        return Err(Failure::usage(format!("cannot sweep '{command}'")));
    }
    let first = axis(&mut cfg, "")?.ok_or_else(|| Failure::usage("sweep config needs 'param'"))?;
    let mut axes = vec![first];
    axes.extend(axis(&mut cfg, "2")?);
    for k in ["out", "seed"] {
        if cfg.get(k).is_some() {
            return Err(Failure::usage(format!("'{k}' is set on the sweep command line")));
        }
    }
    let plan = Plan { command, axes, rest: cfg, seed: a.common.seed };
    Ok((plan, original.to_text()))
}

pub fn manifest(a: &SweepArgs) -> Result<String, Failure> {
    let (_, text) = load(a)?;
    Ok(format!("version={VERSION}\n{text}"))
}

fn argv_for(plan: &Plan, point: &[f64], dir: &PathBuf) -> Vec<OsString> {
    let mut v: Vec<String> = vec!["tcp".into(), plan.command.clone()];
    v.extend(plan.rest.to_args());
    for (ax, x) in plan.axes.iter().zip(point) {
        v.push(format!("--{}", ax.name));
        v.push(fmt17(*x));
    }
    v.extend(["--out".into(), dir.display().to_string(), "--seed".into(), plan.seed.to_string()]);
    v.into_iter().map(OsString::from).collect()
}

fn threads() -> usize {
    std::env::var("TCP_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

pub fn sweep(a: &SweepArgs) -> Result<Outcome, Failure> {
    let (plan, _) = load(a)?;
    let header = summary_header(&plan.command).expect("checked in load");
    let mut points: Vec<Vec<f64>> = vec![vec![]];
    for ax in &plan.axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                ax.values.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    if plan.axes.iter().any(|ax| ax.values.is_empty()) {
        points.clear();
    }
    points.sort_by(|x, y| x.iter().zip(y).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));

    // Reject bad keys before running anything.
    let probe: Vec<f64> = plan.axes.iter().map(|ax| ax.values.first().copied().unwrap_or(0.0)).collect();
    parse(&argv_for(&plan, &probe, &a.common.out)).map_err(|e| Failure::usage(e.to_string().trim().to_string()))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads())
        .build()
        .map_err(|e| Failure { code: 3, msg: e.to_string() })?;
    let rows: Vec<String> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let dir = a.common.out.join("points").join(format!("{i:04}"));
                let res = parse(&argv_for(&plan, p, &dir))
                    .map_err(|e| Failure::usage(e.to_string()))
                    .and_then(|inv| {
                        let out = execute(&inv.cli.cmd)?;
                        write_outputs(&dir, &out, &inv.manifest)?;
                        Ok(out)
                    });
                let keys: Vec<String> = p.iter().map(|x| fmt17(*x)).collect();
                let (status, cols) = match res {
                    Ok(out) => ("ok".to_string(), out.summary),
                    Err(f) => {
                        let msg: String = f.msg.chars().map(|c| if c == ',' || c == '\n' { ';' } else { c }).collect();
                        (format!("error {}: {}", f.code, msg.trim()), vec![String::new(); header.split(',').count()])
                    }
                };
                format!("{},{status},{}", keys.join(","), cols.join(","))
            })
            .collect()
    });
    let names: Vec<&str> = plan.axes.iter().map(|ax| ax.name.as_str()).collect();
    let mut csv = format!("{},status,{header}\n", names.join(","));
    for r in &rows {
        let _ = writeln!(csv, "{r}");
    }
    let failed = rows.iter().filter(|r| !r.contains(",ok,")).count();
    Ok(Outcome {
        files: vec![("sweep.csv".into(), csv)],
        stdout: format!("{} points, {failed} failed\n", rows.len()),
        summary: vec![],
    })
}

use crate::Outcome;
