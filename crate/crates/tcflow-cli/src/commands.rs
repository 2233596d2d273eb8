use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};

use tcflow::baseflow::NondimParams;
use tcflow::bifurcation::{model_field_at, BifurcationBranch};
use tcflow::chandrasekhar::{select_wavenumber, ChandrasekharMode, PREFERRED_WAVENUMBER};
use tcflow::dns::{self, DnsConfig, InitialCondition, Simulation, TransitionOptions};
use tcflow::field::{fmt17, Field};
use tcflow::linstab::{self, EigenSolution, Options};
use tcflow::separation::{self, DEFAULT_LAMBDA3_FACTOR};
use tcflow::topology::{self, FieldView};

use crate::{Common, Failure, Outcome};

/// Amplitude normalization used when no calibrated value is given.
pub const DEFAULT_C: f64 = 1.0;

fn default_l() -> f64 {
    PI / PREFERRED_WAVENUMBER
}

/// Physical parameters shared by several subcommands.
#[derive(Args, Debug, Clone)]
pub struct FlowArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long = "W0", default_value_t = 0.0, allow_negative_numbers = true)]
    pub w0: f64,
    /// Cylinder height in gap units.
    #[arg(long = "L", default_value_t = default_l(), allow_negative_numbers = true)]
    pub l: f64,
}

impl FlowArgs {
    fn params(&self, lambda: f64) -> NondimParams {
        NondimParams::new(lambda, self.gamma, self.mu, self.w0, self.l)
    }
}

fn csv_row(v: &[f64]) -> String {
    v.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join(",")
}

fn critical(flow: &FlowArgs, nr: usize, kmax: usize) -> Result<(EigenSolution, usize), Failure> {
    let n = flow.params(0.0);
    n.validate(tcflow::baseflow::DEFAULT_HEIGHT_TOL)?;
    let kmax = if kmax == 0 { select_wavenumber(flow.l).0 + 2 } else { kmax };
    Ok((linstab::critical_lambda_with(&n, nr, kmax, &Options::default())?, kmax))
}

#[derive(Args, Debug)]
pub struct EigenArgs {
    #[command(flatten)]
    pub flow: FlowArgs,
    /// Radial Galerkin modes.
    #[arg(long, default_value_t = 64)]
    pub nr: usize,
    /// Largest axial mode scanned (0: K + 2).
    #[arg(long, default_value_t = 0)]
    pub kmax: usize,
    /// Axial and radial nodes of the eigenfunction files.
    #[arg(long, default_value_t = 65)]
    pub field_nz: usize,
    #[arg(long, default_value_t = 33)]
    pub field_nr: usize,
    #[command(flatten)]
    pub common: Common,
}

pub const EIGEN_HEADER: &str = "k,a,lambda_c,Tc,alpha_eps";

pub fn eigen(a: &EigenArgs) -> Result<Outcome, Failure> {
    if a.field_nz < 2 || a.field_nr < 2 {
        return Err(Failure::usage("field grid needs at least 2x2 nodes"));
    }
    let (sol, kmax) = critical(&a.flow, a.nr, a.kmax)?;
    let n = a.flow.params(0.0);
    let opt = Options::default();
    let mut csv = format!("{EIGEN_HEADER}\n");
    for m in linstab::scan_modes(&n, a.nr, kmax, &opt)? {
        let op = linstab::assemble_with(&n, m.lambda_c, m.k, a.nr, &opt)?;
        let lead = linstab::leading_eigenvalue(&op)?;
        let alpha = linstab::eigen_derivative(&op, &lead)?.re;
        let _ = writeln!(
            csv,
            "{},{}",
            m.k,
            csv_row(&[m.a, m.lambda_c, m.lambda_c * m.lambda_c, alpha])
        );
    }
    let (e, adj) = sol.fields(a.field_nz, a.field_nr);
    let stdout = format!(
        "k={} a={:.6} lambda_c={:.8} Tc={:.4} alpha_eps={:.8} second={:.6}\n",
        sol.k, sol.a, sol.lambda0_eps, sol.tc, sol.alpha_eps, sol.second.re
    );
    Ok(Outcome {
        files: vec![("eigen.csv".into(), csv), ("eigenfunction.txt".into(), e.to_text()), ("adjoint.txt".into(), adj.to_text())],
        stdout,
        summary: vec![sol.k.to_string(), fmt17(sol.a), fmt17(sol.lambda0_eps), fmt17(sol.tc), fmt17(sol.alpha_eps)],
    })
}

#[derive(Args, Debug)]
pub struct BranchArgs {
    #[command(flatten)]
    pub flow: FlowArgs,
    #[arg(long, default_value_t = 32)]
    pub nr: usize,
    /// Amplitude normalization.
    #[arg(long = "C", default_value_t = DEFAULT_C)]
    pub c: f64,
    /// Cubic-interaction coefficient.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub b: f64,
    /// Lambda range (default 0.95 to 1.2 times the critical value).
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long, default_value_t = 26)]
    pub steps: usize,
    #[command(flatten)]
    pub common: Common,
}

pub const BRANCH_HEADER: &str = "lambda,beta1,sigma1,sigma2,Lambda";

fn branch_of(sol: &EigenSolution, b: f64, c: f64) -> Result<BifurcationBranch, Failure> {
    Ok(BifurcationBranch::new(b, c, sol.alpha_eps, sol.lambda0_eps, sol.a)?)
}

pub fn branch(a: &BranchArgs) -> Result<Outcome, Failure> {
    let (sol, _) = critical(&a.flow, a.nr, 0)?;
    let lo = a.lambda_min.unwrap_or(0.95 * sol.lambda0_eps);
    let hi = a.lambda_max.unwrap_or(1.2 * sol.lambda0_eps);
    if !(hi >= lo) {
        return Err(Failure::usage("lambda-max must not be below lambda-min"));
    }
    let br = branch_of(&sol, a.b, a.c)?;
    let mut csv = format!("{BRANCH_HEADER}\n");
    for i in 0..a.steps {
        let t = if a.steps == 1 { 0.0 } else { i as f64 / (a.steps - 1) as f64 };
        let lam = lo + t * (hi - lo);
        let beta = br.beta1(lam);
        let (s1, s2) = match tcflow::bifurcation::amplitudes(&br, lam, beta) {
            Ok(s) => s,
            Err(tcflow::Error::BelowSaddleNode(_)) => (f64::NAN, f64::NAN),
            Err(e) => return Err(e.into()),
        };
        let _ = writeln!(csv, "{}", csv_row(&[lam, beta, s1, s2, s1 / br.a]));
    }
    let sn = br.saddle_node().map(|v| format!("{v:.10}")).unwrap_or_else(|| "none".into());
    let stdout = format!("lambda0={:.10} alpha={:.8} b={} saddle_node={sn}\n", br.lambda0_eps, br.alpha_eps, br.b);
    Ok(Outcome {
        files: vec![("branch.csv".into(), csv)],
        stdout,
        summary: vec![fmt17(br.lambda0_eps), fmt17(br.alpha_eps), fmt17(br.b)],
    })
}

#[derive(Args, Debug)]
pub struct SeparationArgs {
    #[command(flatten)]
    pub flow: FlowArgs,
    #[arg(long, default_value_t = 32)]
    pub nr: usize,
    #[arg(long = "C", default_value_t = DEFAULT_C)]
    pub c: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, default_value_t = DEFAULT_LAMBDA3_FACTOR)]
    pub lambda3_factor: f64,
    /// Also classify the model field of the first state at this lambda.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// gamma range for separation.csv (0 steps: the single gamma).
    #[arg(long, default_value_t = 0.0)]
    pub gamma_max: f64,
    #[arg(long, default_value_t = 0)]
    pub gamma_steps: usize,
    #[command(flatten)]
    pub common: Common,
}

pub const SEPARATION_HEADER: &str = "gamma,Lambda0,lambda1";

fn prediction(a: &SeparationArgs, gamma: f64) -> Result<(separation::SeparationPrediction, ChandrasekharMode, NondimParams), Failure> {
    let flow = FlowArgs { gamma, ..a.flow.clone() };
    let (sol, _) = critical(&flow, a.nr, 0)?;
    let br = branch_of(&sol, a.b, a.c)?;
    let mode = ChandrasekharMode::for_height(flow.l, 0.0).wall_exact();
    let p = if flow.w0 == 0.0 {
        separation::predict_boundary(gamma, flow.l, &mode, Some(&br), a.lambda3_factor)?
    } else {
        separation::predict_interior(gamma, flow.w0, flow.l, &mode, Some(&br), a.lambda3_factor)?
    };
    Ok((p, mode, flow.params(sol.lambda0_eps)))
}

fn opt_str(v: Option<f64>) -> String {
    v.map(fmt17).unwrap_or_else(|| "nan".into())
}

pub fn separation(a: &SeparationArgs) -> Result<Outcome, Failure> {
    let (p, mode, n) = prediction(a, a.flow.gamma)?;
    let mut report = p.to_lines();
    if let Some(lam) = a.lambda {
        let (sol, _) = critical(&a.flow, a.nr, 0)?;
        let br = branch_of(&sol, a.b, a.c)?;
        let cap = br.big_lambda(lam, tcflow::bifurcation::Sign::One)?;
        let rep = topology::analyze(&model_field_at(&n, &mode, cap))?;
        let _ = writeln!(report, "# model field at lambda={lam} Lambda={cap:.12}");
        report.push_str(&rep.to_lines());
    }
    let mut csv = format!("{SEPARATION_HEADER}\n");
    if a.gamma_steps == 0 {
        let _ = writeln!(csv, "{},{},{}", fmt17(a.flow.gamma), fmt17(p.lambda0_cap), opt_str(p.lambda1));
    } else {
        for i in 0..a.gamma_steps {
            let t = if a.gamma_steps == 1 { 0.0 } else { i as f64 / (a.gamma_steps - 1) as f64 };
            let g = a.flow.gamma + t * (a.gamma_max - a.flow.gamma);
            let (q, _, _) = prediction(a, g)?;
            let _ = writeln!(csv, "{},{},{}", fmt17(g), fmt17(q.lambda0_cap), opt_str(q.lambda1));
        }
    }
    Ok(Outcome {
        files: vec![("separation.txt".into(), report.clone()), ("separation.csv".into(), csv)],
        stdout: report,
        summary: vec![fmt17(p.lambda0_cap), opt_str(p.lambda1), p.locations.len().to_string()],
    })
}

#[derive(Args, Debug)]
pub struct TopologyArgs {
    /// Field file to analyze; without it the model field is used.
    #[arg(long)]
    pub field: Option<PathBuf>,
    #[command(flatten)]
    pub flow: FlowArgs,
    /// Model-field amplitude as a multiple of the separation threshold.
    #[arg(long, default_value_t = 1.1)]
    pub ratio: f64,
    /// Model-field amplitude, overriding --ratio.
    #[arg(long = "Lambda")]
    pub big_lambda: Option<f64>,
    /// Write the model field sampled on this many nodes (0: no dump).
    #[arg(long, default_value_t = 0)]
    pub dump_nz: usize,
    #[arg(long, default_value_t = 0)]
    pub dump_nr: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn topology(a: &TopologyArgs) -> Result<Outcome, Failure> {
    let mut files = Vec::new();
    let view = if let Some(path) = &a.field {
        let f = Field::read(path)?;
        FieldView::from_field(&f)
    } else {
        a.flow.params(0.0).validate(tcflow::baseflow::DEFAULT_HEIGHT_TOL)?;
        let mode = ChandrasekharMode::for_height(a.flow.l, 0.0).wall_exact();
        let cap0 = if a.flow.w0 == 0.0 {
            separation::boundary_threshold(a.flow.gamma, &mode)?
        } else {
            separation::interior_solve(a.flow.gamma, a.flow.w0, &mode)?.lambda0_cap
        };
        let cap = a.big_lambda.unwrap_or(a.ratio * cap0);
        let view = model_field_at(&a.flow.params(0.0), &mode, cap);
        if a.dump_nz > 0 || a.dump_nr > 0 {
            if a.dump_nz < 4 || a.dump_nr < 4 {
                return Err(Failure::usage("dump grid needs at least 4x4 nodes"));
            }
            let mut f = Field::from_fn(a.dump_nz, a.dump_nr, a.flow.l, 0.0, |z, r| {
                let v = view.value(z, r);
                (v[0], v[1], 0.0)
            });
            f.gamma = a.flow.gamma;
            f.w0 = a.flow.w0;
            files.push(("model_field.txt".into(), f.to_text()));
        }
        view
    };
    let rep = topology::analyze(&view)?;
    let text = rep.to_lines();
    files.push(("topology.txt".into(), text.clone()));
    let (c, s) = (rep.centers().count(), rep.saddles().count());
    Ok(Outcome {
        files,
        stdout: text,
        summary: vec![c.to_string(), s.to_string(), rep.boundary.len().to_string(), rep.index_sum.to_string(), verdict_name(&rep.verdict)],
    })
}

fn verdict_name(v: &topology::Verdict) -> String {
    match v {
        topology::Verdict::Stable => "stable".into(),
        topology::Verdict::Unstable(c) => format!("unstable-{c}"),
        topology::Verdict::Inconclusive(c) => format!("inconclusive-{c}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ic {
    Zero,
    Eigenmode,
    Random,
    File,
    NearCouette,
}

#[derive(Args, Debug)]
pub struct DnsArgs {
    #[command(flatten)]
    pub flow: FlowArgs,
    #[arg(long, default_value_t = 45.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 96)]
    pub nz: usize,
    #[arg(long, default_value_t = 48)]
    pub nr: usize,
    /// Largest time step.
    #[arg(long, default_value_t = dns::DEFAULT_DT_MAX)]
    pub dt: f64,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    #[arg(long, value_enum, default_value_t = Ic::NearCouette)]
    pub ic: Ic,
    /// Projection amplitude on u0 (eigenmode, near-couette) or RMS speed (random).
    #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
    pub amplitude: f64,
    /// RMS of the seeded noise added to near-couette starts.
    #[arg(long, default_value_t = 1e-4)]
    pub noise: f64,
    #[arg(long)]
    pub ic_file: Option<PathBuf>,
    #[arg(long, default_value_t = dns::DEFAULT_STEADY_TOL)]
    pub steady_tol: f64,
    #[arg(long, default_value_t = 50)]
    pub diag_every: usize,
    /// Reverse the through-flow transport sign in the radial equation only.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub literal_signs: bool,
    /// Classify the final full flow.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub topology: bool,
    /// Comma-separated lambdas for a transition experiment (replaces the single run).
    #[arg(long, default_value = "")]
    pub transition: String,
    #[command(flatten)]
    pub common: Common,
}

fn dns_config(a: &DnsArgs) -> Result<DnsConfig, Failure> {
    let mut cfg = DnsConfig::new(a.flow.params(a.lambda), a.nz, a.nr);
    cfg.dt = a.dt;
    cfg.t_end = a.t_end;
    cfg.steady_tol = a.steady_tol;
    cfg.diag_every = a.diag_every;
    cfg.literal_signs = a.literal_signs;
    cfg.initial = match a.ic {
        Ic::Zero => InitialCondition::Zero,
        Ic::Eigenmode => InitialCondition::Eigenmode { amplitude: a.amplitude },
        Ic::Random => InitialCondition::Random { amplitude: a.amplitude, seed: a.common.seed },
        Ic::File => InitialCondition::File(a.ic_file.clone().ok_or_else(|| Failure::usage("--ic file needs --ic-file"))?),
        Ic::NearCouette => InitialCondition::NearCouette {
            amplitude: a.amplitude,
            noise: a.noise,
            seed: (a.noise > 0.0).then_some(a.common.seed),
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn parse_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| Failure::usage(format!("'{t}': {e}"))))
        .collect()
}

pub fn dns(a: &DnsArgs) -> Result<Outcome, Failure> {
    let cfg = dns_config(a)?;
    let lambdas = parse_list(&a.transition)?;
    if !lambdas.is_empty() {
        let opt = TransitionOptions {
            steady_tol: a.steady_tol,
            seed: (a.noise > 0.0).then_some(a.common.seed),
            ..TransitionOptions::default()
        };
        let events = dns::transition_experiment(&cfg, &lambdas, &opt)?;
        let mut csv = format!("{}\n", dns::TRANSITION_CSV_HEADER);
        let mut reports = String::new();
        for e in &events {
            let _ = writeln!(csv, "{}", e.csv_row());
            let _ = writeln!(reports, "# lambda={}", fmt17(e.lambda));
            reports.push_str(&e.report.to_lines());
        }
        let last = events.last().expect("nonempty list");
        return Ok(Outcome {
            files: vec![("transition.csv".into(), csv.clone()), ("transition_topology.txt".into(), reports)],
            stdout: csv,
            summary: vec![fmt17(last.sigma), last.converged.to_string(), fmt17(last.t_final), last.final_class.name()],
        });
    }
    let mut sim = Simulation::new(cfg)?;
    let res = sim.run_to_steady()?;
    let mut files = vec![
        ("diagnostics.csv".into(), dns::diagnostics_csv(&res.diagnostics)),
        ("final.txt".into(), res.field.to_text()),
    ];
    let mut class = String::from("-");
    if a.topology {
        let rep = topology::analyze(&sim.total_view())?;
        class = dns::FlowClass::of(&rep.interior).name();
        files.push(("topology.txt".into(), rep.to_lines()));
    }
    let stdout = format!(
        "t={} steps={} converged={} sigma={} energy={} class={class}\n",
        fmt17(res.t),
        sim.steps,
        res.converged,
        fmt17(res.sigma),
        fmt17(sim.energy())
    );
    files.push(("summary.txt".into(), stdout.clone()));
    Ok(Outcome {
        files,
        stdout,
        summary: vec![fmt17(res.sigma), res.converged.to_string(), fmt17(res.t), class],
    })
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    /// Cylinder height; sets the wavenumber.
    #[arg(long = "L", default_value_t = default_l(), allow_negative_numbers = true)]
    pub l: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub r1: f64,
    #[arg(long, default_value_t = 101)]
    pub n: usize,
    /// Re-solve the two constants so that R and R' vanish at the walls exactly.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub wall_exact: bool,
    #[command(flatten)]
    pub common: Common,
}

pub const PROFILE_HEADER: &str = "r,R,Rp,Rpp,Rppp";

pub fn profile(a: &ProfileArgs) -> Result<Outcome, Failure> {
    if a.n < 2 {
        return Err(Failure::usage("need at least 2 points"));
    }
    if !(a.l > 0.0) {
        return Err(Failure::usage("L must be positive"));
    }
    let mut mode = ChandrasekharMode::for_height(a.l, a.r1);
    if a.wall_exact {
        mode = mode.wall_exact();
    }
    let mut csv = format!("{PROFILE_HEADER}\n");
    for i in 0..a.n {
        let r = a.r1 + i as f64 / (a.n - 1) as f64;
        let v: Vec<f64> = (0..4).map(|d| mode.r_eval(r, d)).collect::<tcflow::Result<_>>()?;
        let _ = writeln!(csv, "{},{}", fmt17(r), csv_row(&v));
    }
    Ok(Outcome {
        files: vec![("profile.csv".into(), csv)],
        stdout: format!("a={:.6} k={} lambda0={:.6} R''(r1)={:.6}\n", mode.a, mode.k, mode.lambda0, mode.r_bar(0.0, 2)),
        summary: vec![fmt17(mode.a), fmt17(mode.lambda0), fmt17(mode.r_bar(0.0, 2)), fmt17(mode.r_bar(0.0, 3))],
    })
}

/// Summary columns for each subcommand, as used by sweeps.
pub fn summary_header(cmd: &str) -> Option<&'static str> {
    Some(match cmd {
        "eigen" => "k,a,lambda_c,Tc,alpha_eps",
        "branch" => "lambda0,alpha_eps,b",
        "separation" => "Lambda0,lambda1,points",
        "topology" => "centers,saddles,boundary_points,index_sum,verdict",
        "dns" => "sigma,converged,t,class",
        "profile" => "a,lambda0,Rpp_wall,Rppp_wall",
        _ => return None,
    })
}
