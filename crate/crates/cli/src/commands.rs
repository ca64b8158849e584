use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;

use qvme::catalog::{build, find_builtin, Builtin, CatalogError, Engine, BUILTINS};
use qvme::cyclesim::{chi_square_test, exact_outcome_distribution, run_cycles, CycleSampler};
use qvme::eigensolve::{ground_state_with, EigenOptions};
use qvme::model::parse_model_config;
use qvme::qvbf::DeltaTable;
use qvme::thermo::{ThermoOptions, ThermoPoint};

use crate::report::{Cell, Table};
use crate::{param_map, Failure, Global, Tolerances};

pub const SWEEP_COLUMNS: &[&str] = &[
    "lambda", "delta", "d1", "d2", "work", "heat", "efficiency", "sigma2", "ebar", "e_min", "e_max", "qfi", "sigma_q",
    "valid", "notes",
];

const COMPARE_COLUMNS: &[&str] = &["quantity", "max_deviation", "lambda", "tolerance", "pass"];

const VERIFY_COLUMNS: &[&str] = &["lambda", "bound", "margin", "status", "reason"];

const MONTECARLO_COLUMNS: &[&str] = &[
    "lambda", "samples", "seed", "mean_work", "se_work", "exact_work", "z_work", "var_work", "se_var_work",
    "exact_sigma2", "z_var", "mean_heat", "se_heat", "exact_heat", "z_heat", "chi_square", "chi_dof", "chi_critical",
    "chi_pass",
];

const MODEL_COLUMNS: &[&str] = &["name", "kind", "params", "oracle", "summary"];

const DEFAULT_COMPARE_TOL: f64 = 1e-9;
const LIMIT_COMPARE_TOL: f64 = 1e-3;

struct Loaded {
    engine: Engine,
    builtin: Option<&'static Builtin>,
    params: BTreeMap<String, String>,
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn solver(e: impl std::fmt::Display) -> Failure {
    Failure::Solver(e.to_string())
}

fn read_table(path: &Path) -> Result<DeltaTable, Failure> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(usage)?;
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(usage)?;
        let field = |k: usize| -> Result<f64, Failure> {
            record
                .get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| usage(format!("{}: row {}: expected two numbers", path.display(), i + 1)))
        };
        samples.push((field(0)?, field(1)?));
    }
    DeltaTable::new(samples).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load(g: &Global) -> Result<Loaded, Failure> {
    let overrides = param_map(&g.params);
    if let Some(name) = &g.model {
        let builtin = find_builtin(name).ok_or_else(|| usage(CatalogError::UnknownModel(name.clone())))?;
        let mut overrides = overrides;
        if builtin.params.iter().any(|&(k, _)| k == "seed") {
            overrides.entry("seed".into()).or_insert_with(|| g.seed.to_string());
        }
        let params = builtin.resolve(&overrides).map_err(usage)?;
        let engine = build(name, &overrides).map_err(usage)?;
        return Ok(Loaded { engine, builtin: Some(builtin), params });
    }
    if !overrides.is_empty() {
        return Err(usage("--param applies to bundled models only"));
    }
    let engine = if let Some(path) = &g.config {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let spec = parse_model_config(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        Engine::numeric(&spec).map_err(usage)?
    } else if let Some(path) = &g.table {
        Engine::Table(read_table(path)?)
    } else {
        return Err(usage("choose a model with --model, --config or --table"));
    };
    Ok(Loaded { engine, builtin: None, params: BTreeMap::new() })
}

fn thermo_options(tol: &Tolerances) -> ThermoOptions {
    ThermoOptions {
        eigen: EigenOptions { degeneracy_tol: tol.degeneracy, lanczos_tol: tol.lanczos, ..EigenOptions::default() },
        ..ThermoOptions::default()
    }
}

fn evaluate_grid(engine: &Engine, points: &[f64], opts: &ThermoOptions) -> Result<Vec<ThermoPoint>, Failure> {
    points
        .par_iter()
        .map(|&x| engine.evaluate(x, opts).map_err(|e| solver(format!("λ = {x}: {e}"))))
        .collect()
}

pub fn sweep(g: &Global, tol: &Tolerances, points: &[f64], ground_only: bool, eta_limit: bool) -> Result<Table, Failure> {
    let loaded = load(g)?;
    let opts = ThermoOptions { ground_only, efficiency_limit: eta_limit, ..thermo_options(tol) };
    let mut table = Table::new(SWEEP_COLUMNS);
    for p in evaluate_grid(&loaded.engine, points, &opts)? {
        table.push(vec![
            p.lambda.into(),
            p.delta.into(),
            p.d1.into(),
            p.d2.into(),
            p.work.into(),
            p.heat.into(),
            p.efficiency.into(),
            p.sigma2.into(),
            p.ebar.into(),
            p.e_min.into(),
            p.e_max.into(),
            p.qfi.into(),
            p.sigma_q.into(),
            p.valid.into(),
            p.notes.join("; ").into(),
        ]);
    }
    Ok(table)
}

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
fn relative_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if a == b {
        0.0
    } else if scale == 0.0 || !scale.is_finite() {
        f64::INFINITY
    } else {
        (a - b).abs() / scale
    }
}

/// Deviation of optional values; a value present on one side only is infinitely off.
fn optional_deviation(a: Option<f64>, b: Option<f64>, metric: impl Fn(f64, f64) -> f64) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) => Some(metric(a, b)),
        (None, None) => None,
        _ => Some(f64::INFINITY),
    }
}

type Quantity = (&'static str, fn(&ThermoPoint) -> Option<f64>);

const COMPARED: &[Quantity] = &[
    ("delta", |p| Some(p.delta)),
    ("d1", |p| Some(p.d1)),
    ("d2", |p| p.d2),
    ("work", |p| Some(p.work)),
    ("heat", |p| Some(p.heat)),
    ("efficiency", |p| p.efficiency),
    ("sigma2", |p| p.sigma2),
    ("ebar", |p| p.ebar),
    ("qfi", |p| p.qfi),
];

pub fn compare(
    g: &Global,
    tol: &Tolerances,
    points: &[f64],
    oracle: Option<&str>,
) -> Result<(Table, Result<(), Failure>), Failure> {
    let loaded = load(g)?;
    let builtin = loaded.builtin.ok_or_else(|| usage("compare needs a bundled model (--model)"))?;
    let oracle_name = oracle
        .or(builtin.oracle)
        .ok_or_else(|| usage(format!("model `{}` has no registered oracle; pass --oracle", builtin.name)))?;
    let oracle_entry =
        find_builtin(oracle_name).ok_or_else(|| usage(CatalogError::UnknownModel(oracle_name.to_string())))?;
    let shared: BTreeMap<String, String> = loaded
        .params
        .iter()
        .filter(|(k, _)| oracle_entry.params.iter().any(|&(name, _)| name == k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let reference = build(oracle_name, &shared).map_err(usage)?;

    let per_site = matches!(oracle_name, "tfim_limit" | "osc_chain_limit");
    let (quantities, tolerance, sites): (&[Quantity], f64, f64) = if per_site {
        let n: f64 = shared.get("n").and_then(|s| s.parse().ok()).ok_or_else(|| usage("limit oracle needs `n`"))?;
        (&[COMPARED[0], COMPARED[6]], tol.compare.unwrap_or(LIMIT_COMPARE_TOL), n)
    } else {
        (COMPARED, tol.compare.unwrap_or(DEFAULT_COMPARE_TOL), 1.0)
    };
    let metric = |a: f64, b: f64| if per_site { (a - b).abs() / sites } else { relative_deviation(a, b) };

    let opts = thermo_options(tol);
    let model_points = evaluate_grid(&loaded.engine, points, &opts)?;
    let oracle_points = evaluate_grid(&reference, points, &opts)?;

    let mut table = Table::new(COMPARE_COLUMNS);
    let mut all_pass = true;
    for &(name, get) in quantities {
        let mut worst: Option<(f64, f64)> = None;
        for (m, o) in model_points.iter().zip(&oracle_points) {
            if let Some(dev) = optional_deviation(get(m), get(o), metric) {
                if worst.is_none_or(|(w, _)| dev > w || dev.is_nan()) {
                    worst = Some((dev, m.lambda));
                }
            }
        }
        let (dev, at) = match worst {
            Some((dev, at)) => (Cell::Float(dev), Cell::Float(at)),
            None => (Cell::Empty, Cell::Empty),
        };
        let pass = worst.is_none_or(|(d, _)| d <= tolerance);
        all_pass &= pass;
        table.push(vec![name.into(), dev, at, tolerance.into(), pass.into()]);
    }
    Ok((table, if all_pass { Ok(()) } else { Err(Failure::Check) }))
}

/// `(x − μ)/se`; zero when both spread and offset vanish.
fn z_score(estimate: f64, exact: f64, se: f64) -> f64 {
    let offset = estimate - exact;
    if se > 0.0 {
        offset / se
    } else if offset.abs() <= 1e-12 * exact.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn montecarlo(
    g: &Global,
    tol: &Tolerances,
    lambda: f64,
    samples: u64,
) -> Result<(Table, Result<(), Failure>), Failure> {
    if samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    if !lambda.is_finite() {
        return Err(usage("--lambda must be finite"));
    }
    let loaded = load(g)?;
    let ops = loaded.engine.operators().ok_or_else(|| usage("montecarlo needs a spin model"))?;
    let eigen = thermo_options(tol).eigen;
    let ground = ground_state_with(ops, lambda, &eigen).map_err(solver)?;
    let stats = run_cycles(&ground, ops, samples, g.seed).map_err(solver)?;
    let probs = exact_outcome_distribution(&ground, ops).map_err(solver)?;
    let sampler = CycleSampler::new(&ground, ops).map_err(solver)?;

    let mut exact_work = 0.0;
    let mut exact_heat = 0.0;
    for (k, &p) in probs.iter().enumerate().filter(|(_, &p)| p > 0.0) {
        let s = sampler.energetics(k);
        exact_work += p * s.work;
        exact_heat += p * s.heat;
    }
    let exact_sigma2: f64 = probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(k, &p)| p * (sampler.energetics(k).work - exact_work).powi(2))
        .sum();

    let z_work = z_score(stats.mean_work, exact_work, stats.se_work);
    let z_var = z_score(stats.var_work, exact_sigma2, stats.se_var_work);
    let z_heat = z_score(stats.mean_heat, exact_heat, stats.se_heat);
    let chi = chi_square_test(&stats, &probs, tol.chi_confidence);

    let mut table = Table::new(MONTECARLO_COLUMNS);
    table.push(vec![
        lambda.into(),
        samples.into(),
        g.seed.into(),
        stats.mean_work.into(),
        stats.se_work.into(),
        exact_work.into(),
        z_work.into(),
        stats.var_work.into(),
        stats.se_var_work.into(),
        exact_sigma2.into(),
        z_var.into(),
        stats.mean_heat.into(),
        stats.se_heat.into(),
        exact_heat.into(),
        z_heat.into(),
        chi.statistic.into(),
        (chi.dof as u64).into(),
        chi.critical.into(),
        chi.passes.into(),
    ]);
    let ok = [z_work, z_var, z_heat].iter().all(|z| z.abs() <= tol.z) && chi.passes;
    Ok((table, if ok { Ok(()) } else { Err(Failure::Check) }))
}

pub fn verify(g: &Global, tol: &Tolerances, points: &[f64]) -> Result<(Table, Result<(), Failure>), Failure> {
    let loaded = load(g)?;
    let opts = thermo_options(tol);
    let nonzero: Vec<f64> = points.iter().copied().filter(|&x| x != 0.0).collect();
    let evaluated = evaluate_grid(&loaded.engine, &nonzero, &opts)?;
    let mut evaluated = evaluated.into_iter();

    let mut table = Table::new(VERIFY_COLUMNS);
    let mut all_hold = true;
    for &lambda in points {
        if lambda == 0.0 {
            for (name, _) in qvme::thermo::BoundReport::default().verdicts() {
                table.push(vec![lambda.into(), name.into(), Cell::Empty, "skipped".into(), "bounds undefined at λ = 0".into()]);
            }
            continue;
        }
        let p = evaluated.next().expect("one evaluation per nonzero coupling");
        for (name, verdict) in p.bounds.verdicts() {
            let row = match verdict {
                Some(v) => {
                    let holds = v.margin >= -tol.bound;
                    all_hold &= holds;
                    vec![lambda.into(), name.into(), v.margin.into(), if holds { "pass" } else { "fail" }.into(), "".into()]
                }
                None => {
                    let reason = if name == "sandwich_upper" && p.sigma2.is_some() && p.e_max.is_none() {
                        "unbounded accessible spectrum"
                    } else {
                        "inputs unavailable"
                    };
                    vec![lambda.into(), name.into(), Cell::Empty, "skipped".into(), reason.into()]
                }
            };
            table.push(row);
        }
    }
    Ok((table, if all_hold { Ok(()) } else { Err(Failure::Check) }))
}

pub fn models() -> Table {
    let mut table = Table::new(MODEL_COLUMNS);
    for b in BUILTINS {
        let kind = match build(b.name, &BTreeMap::new()) {
            Ok(Engine::Numeric(_)) => "numeric",
            Ok(Engine::Exact(_)) => "exact",
            Ok(Engine::Table(_)) | Err(_) => "other",
        };
        let params: Vec<String> = b.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        table.push(vec![
            b.name.into(),
            kind.into(),
            params.join(" ").into(),
            b.oracle.map_or(Cell::Empty, Cell::from),
            b.summary.into(),
        ]);
    }
    table
}
