use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use polycond::conditioning::{measure_report, MeasureOptions, MEASURE_CSV_HEADER};
use polycond::experiments::config::DEFAULT_SEED;
use polycond::experiments::{config_comments, run_experiment, summarize, ExperimentConfig, TrialTable};
use polycond::geometry::io::{cube_points, read_point_set};
use polycond::linalg;
use polycond::solvers::{frank_wolfe, wolfe_mnp_capped, FwOptions, Solution, Variant};
use polycond::{Error, QuadraticObjective, Result};

use super::{CondArgs, ExperimentArgs, ReportArgs, SolveArgs, SolveVariant, SEED_ENV};

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// Chain-inequality slack re-asserted by `cond`.
const CHAIN_SLACK: f64 = 1e-8;

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn echo(lines: &[String]) {
    for l in lines {
        eprintln!("# {l}");
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

/// `POLYCOND_SEED` if set, else the built-in default.
fn default_seed() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| invalid(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Solution block written by `solve`: one `key=value` per line.
pub fn format_solution(variant: &str, f: &QuadraticObjective, sol: &Solution, vertices: &[Vec<f64>]) -> String {
    let rec = sol.certificate.point(vertices);
    let active: Vec<String> = sol.certificate.active.iter().map(|i| i.to_string()).collect();
    let mut s = String::new();
    let _ = writeln!(s, "variant={variant}");
    let _ = writeln!(s, "converged={}", sol.converged());
    let _ = writeln!(s, "iterations={}", sol.trace.iterations());
    let _ = writeln!(s, "x={}", join(&sol.x));
    let _ = writeln!(s, "objective={}", f.value(&sol.x));
    let _ = writeln!(s, "gap={}", sol.trace.final_residual);
    let _ = writeln!(s, "residual={}", linalg::distance(&rec, &sol.x));
    let _ = writeln!(s, "active={}", active.join(","));
    let _ = writeln!(s, "weights={}", join(&sol.certificate.weights));
    s
}

pub fn solve(a: SolveArgs) -> Result<u8> {
    let ps = read_point_set(&a.vertices)?;
    let d = ps.dim();
    let b = a.target.clone().unwrap_or_else(|| vec![0.0; d]);
    if b.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: b.len() });
    }
    if !(a.tol > 0.0) {
        return Err(invalid("--tol must be positive"));
    }
    let variant = format!("{:?}", a.variant).to_lowercase();
    echo(&[
        "command=solve".into(),
        format!("vertices={}", a.vertices.display()),
        format!("points={} dim={d}", ps.len()),
        format!("target={}", join(&b)),
        format!("q_diag={}", a.q_diag.as_deref().map_or("identity".into(), join)),
        format!("variant={variant}"),
        format!("tol={}", a.tol),
        format!("max_iter={}", a.max_iter),
    ]);
    let (f, sol) = match a.variant {
        SolveVariant::Wolfe => {
            if a.q_diag.is_some() {
                return Err(invalid("wolfe minimizes Euclidean distance; drop --q-diag or pick a Frank-Wolfe variant"));
            }
            let shifted: Vec<Vec<f64>> = ps.points().iter().map(|p| linalg::sub(p, &b)).collect();
            let mut sol = wolfe_mnp_capped(&shifted, a.tol, a.max_iter)?;
            sol.x = linalg::add(&sol.x, &b);
            (QuadraticObjective::squared_distance(&b), sol)
        }
        v => {
            let f = match &a.q_diag {
                Some(q) => QuadraticObjective::diagonal(q, &b)?,
                None => QuadraticObjective::squared_distance(&b),
            };
            let start = (0..ps.len())
                .min_by(|&i, &j| f.value(ps.point(i)).total_cmp(&f.value(ps.point(j))))
                .expect("nonempty");
            let variant = match v {
                SolveVariant::Vanilla => Variant::Vanilla,
                SolveVariant::Away => Variant::Away,
                _ => Variant::Pairwise,
            };
            let opts = FwOptions { max_iter: a.max_iter, tol: a.tol };
            let x0 = polycond::solvers::vertex_weights(ps.len(), start);
            (f.clone(), frank_wolfe(variant, ps.points(), &f, &x0, &opts)?)
        }
    };
    let text = format_solution(&variant, &f, &sol, ps.points());
    match &a.output {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    Ok(if sol.converged() { 0 } else { 2 })
}

pub fn cond(a: CondArgs) -> Result<u8> {
    let (ps, source) = match (a.cube, &a.vertices) {
        (Some(d), _) => {
            if d == 0 || d > 16 {
                return Err(invalid("--cube needs 1 <= D <= 16"));
            }
            (cube_points(d), format!("cube={d}"))
        }
        (None, Some(p)) => (read_point_set(p)?, format!("vertices={}", p.display())),
        (None, None) => return Err(invalid("give a vertex file or --cube")),
    };
    let mut opts = MeasureOptions {
        width: false,
        minwidth: false,
        vf: false,
        phi: false,
        subset_cap: a.subset_cap,
        face_cap: a.face_cap,
    };
    for m in &a.measures {
        match m.trim() {
            "width" => opts.width = true,
            "minwidth" => opts.minwidth = true,
            "vf" => opts.vf = true,
            "phi" => opts.phi = true,
            other => {
                return Err(invalid(format!(
                    "unknown measure {other:?}; choose from width,minwidth,phi,vf"
                )))
            }
        }
    }
    echo(&[
        "command=cond".into(),
        source,
        format!("points={} dim={}", ps.len(), ps.dim()),
        format!("measures={}", a.measures.join(",")),
        format!("subset_cap={}", a.subset_cap),
        format!("face_cap={}", a.face_cap),
    ]);
    let report = measure_report(&ps, &opts)?;
    report.check_chain(CHAIN_SLACK)?;
    for n in &report.notes {
        eprintln!("note: {n}");
    }
    let text = format!("{MEASURE_CSV_HEADER}\n{}\n", report.to_csv_row());
    match &a.csv {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn experiment(a: ExperimentArgs) -> Result<u8> {
    let text = read_file(&a.config)?;
    let mut cfg = ExperimentConfig::parse_with_seed(&text, default_seed()?)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let prefix = a
        .output
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| a.config.with_extension(""));
    cfg.output = Some(prefix.display().to_string());
    let comments = config_comments(&cfg);
    echo(&comments);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.unwrap_or(0))
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    let table = pool.install(|| run_experiment(&cfg))?;
    let summary = summarize(&table);
    let trials_path = with_suffix(&prefix, ".trials.csv");
    write_file(&trials_path, &table.to_csv(&comments))?;
    write_file(&with_suffix(&prefix, ".summary.csv"), &summary.to_csv(&comments))?;
    let text = summary.to_text();
    write_file(&with_suffix(&prefix, ".summary.txt"), &text)?;
    print!("{text}");
    eprintln!("# wrote {} ({} trials)", trials_path.display(), table.records.len());
    let invalid = table.records.iter().filter(|r| r.label == "invalid").count();
    if invalid > 0 {
        eprintln!("# {invalid} trial(s) stayed degenerate after resampling and are recorded as NA");
    }
    Ok(0)
}

pub fn report(a: ReportArgs) -> Result<u8> {
    let mut tables = Vec::new();
    for p in &a.trials {
        let t = TrialTable::from_csv(&read_file(p)?).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{}: {message}", p.display()),
            },
            other => other,
        })?;
        tables.push(t);
    }
    let mut comments = vec!["command=report".to_string()];
    comments.extend(a.trials.iter().map(|p| format!("input={}", p.display())));
    echo(&comments);
    let table = TrialTable::merge(tables)?;
    let summary = summarize(&table);
    write_file(&a.out_dir.join("summary.csv"), &summary.to_csv(&comments))?;
    let text = summary.to_text();
    write_file(&a.out_dir.join("summary.txt"), &text)?;
    for col in &table.columns {
        for measure in ["median", "q25", "mean"] {
            let series = summary.series(col, measure);
            if series.is_empty() {
                continue;
            }
            let mut dat = format!("# d {measure}({col})\n");
            for (d, v) in series {
                let _ = writeln!(dat, "{d} {v}");
            }
            write_file(&a.out_dir.join(format!("{col}_{measure}.dat")), &dat)?;
        }
    }
    print!("{text}");
    Ok(0)
}

