use std::path::Path;
use std::process::{Command, Output};

fn tcp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcp")).args(args).env("TCP_THREADS", "2").output().expect("spawn tcp")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn eigen_reports_the_classical_critical_number() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    let o = tcp(&["eigen", "--gamma", "0", "--mu", "1", "--L", "1.0079", "--nr", "64", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&d.path().join("eigen.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,a,lambda_c,Tc,alpha_eps"));
    let tc_min = lines
        .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!((tc_min - 1708.0).abs() < 0.01 * 1708.0, "Tc {tc_min}");
    assert!(read(&d.path().join("eigenfunction.txt")).starts_with("TCPFIELD 1\n"));
    assert!(read(&d.path().join("manifest")).starts_with("command=eigen\n"));
}

#[test]
fn separation_reports_threshold_and_points() {
    let d = tempfile::tempdir().unwrap();
    let o = tcp(&["separation", "--gamma", "0.31", "--W0", "0", "--L", "3.022", "--out", d.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = read(&d.path().join("separation.txt"));
    assert_eq!(rep.lines().filter(|l| l.starts_with("SEP ")).count(), 3);
    let csv = read(&d.path().join("separation.csv"));
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|t| t.parse().unwrap()).collect();
    assert!((row[1] - 0.01).abs() < 1e-3, "Lambda0 {}", row[1]);
    assert!(row[2] > 0.0);
}

fn coords(report: &str) -> Vec<(String, f64, f64)> {
    report
        .lines()
        .filter(|l| l.starts_with("SING") || l.starts_with("BSADDLE"))
        .map(|l| {
            let get = |k: &str| {
                l.split_whitespace()
                    .find_map(|t| t.strip_prefix(k))
                    .map(|v| v.parse::<f64>().unwrap())
                    .unwrap_or(0.0)
            };
            let tag: String = l.split_whitespace().filter(|t| !t.starts_with("z=") && !t.starts_with("r=")).collect::<Vec<_>>().join(" ");
            (tag, get("z="), get("r="))
        })
        .collect()
}

#[test]
fn topology_of_a_dumped_model_field_matches_the_analytic_path() {
    let d = tempfile::tempdir().unwrap();
    let a = d.path().join("analytic");
    let f = d.path().join("file");
    let o = tcp(&[
        "topology", "--gamma", "0.31", "--L", "3.022", "--ratio", "1.1", "--dump-nz", "401", "--dump-nr", "161", "--out",
        a.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dump = a.join("model_field.txt");
    let o = tcp(&["topology", "--field", dump.to_str().unwrap(), "--out", f.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (ra, rf) = (read(&a.join("topology.txt")), read(&f.join("topology.txt")));
    let (ca, cf) = (coords(&ra), coords(&rf));
    assert_eq!(ca.len(), 9, "{ra}");
    assert_eq!(ca.len(), cf.len(), "{ra}\n---\n{rf}");
    for (x, y) in ca.iter().zip(&cf) {
        assert_eq!(x.0, y.0);
        assert!((x.1 - y.1).abs() < 1e-4 && (x.2 - y.2).abs() < 1e-4, "{x:?} vs {y:?}");
    }
    let verdict = |s: &str| s.lines().find(|l| l.starts_with("VERDICT")).map(str::to_string);
    assert_eq!(verdict(&ra), verdict(&rf));
}

#[test]
fn identical_runs_and_manifest_reruns_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let (a, b, c) = (d.path().join("a"), d.path().join("b"), d.path().join("c"));
    let args = |p: &Path| {
        vec![
            "dns".to_string(), "--lambda".into(), "44".into(), "--nz".into(), "24".into(), "--nr".into(), "16".into(),
            "--t-end".into(), "0.5".into(), "--ic".into(), "random".into(), "--amplitude".into(), "0.01".into(),
            "--seed".into(), "7".into(), "--out".into(), p.display().to_string(),
        ]
    };
    for p in [&a, &b] {
        let v = args(p);
        let o = tcp(&v.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let m = a.join("manifest");
    let o = tcp(&["dns", "--config", m.to_str().unwrap(), "--out", c.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["final.txt", "diagnostics.csv", "summary.txt", "manifest"] {
        assert_eq!(read(&a.join(name)), read(&b.join(name)), "{name}");
        assert_eq!(read(&a.join(name)), read(&c.join(name)), "{name} from manifest");
    }
}

#[test]
fn flags_override_config_values() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("p.cfg");
    std::fs::write(&cfg, "command=profile\nn = 5\nwall_exact = true\n").unwrap();
    let out = d.path().join("o");
    let o = tcp(&["profile", "--config", cfg.to_str().unwrap(), "--n", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&out.join("profile.csv")).lines().count(), 4);
    let m = read(&out.join("manifest"));
    assert!(m.contains("\nn=3\n") && m.contains("\nwall-exact=true\n"), "{m}");
}

#[test]
fn unknown_config_keys_and_bad_values_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.cfg");
    std::fs::write(&cfg, "gamma=1\nnot_a_key=3\n").unwrap();
    let o = tcp(&["separation", "--config", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = tcp(&["separation", "--gamma", "-1", "--out", d.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = tcp(&["frobnicate"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn numerical_failures_exit_3() {
    let d = tempfile::tempdir().unwrap();
    // with this much backward through-flow the axial profile never becomes tangent to the mode
    let o = tcp(&["topology", "--gamma", "1", "--W0", "-0.5", "--L", "3.022", "--out", d.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn empty_sweep_writes_a_header_only() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("s.cfg");
    std::fs::write(&cfg, "command=dns\nparam=lambda\nfrom=40\nto=50\nsteps=0\n").unwrap();
    let o = tcp(&["sweep", "--config", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&d.path().join("sweep.csv")), "lambda,status,sigma,converged,t,class\n");
}

#[test]
fn two_axis_sweep_is_ordered_and_records_failures() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("s.cfg");
    std::fs::write(&cfg, "command=profile\nparam=L\nfrom=2\nto=-1\nsteps=3\nparam2=r1\nfrom2=1\nto2=0\nsteps2=2\nn=4\n").unwrap();
    let out = d.path().join("o");
    let o = tcp(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out.join("sweep.csv"));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    let keys: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            let v: Vec<&str> = r.split(',').collect();
            (v[0].parse().unwrap(), v[1].parse().unwrap())
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
    // negative heights fail, the rest succeed
    assert_eq!(rows.iter().filter(|r| r.contains(",ok,")).count(), 4);
    assert!(rows[0].contains("error 2"), "{}", rows[0]);
    // rerunning from the manifest reproduces the table
    let again = d.path().join("again");
    let o = tcp(&["sweep", "--config", out.join("manifest").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv, read(&again.join("sweep.csv")));
}
