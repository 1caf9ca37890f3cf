use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use mobeq_core::city_data::{
    bundled_city, bundled_nominal_controls, load_city, load_controls, load_session, save_session,
    LoadError,
};
use mobeq_core::equilibrium::{oracle_solve, Configuration};
use mobeq_core::model::{build_instance, validate_controls, ScenarioControls};
use mobeq_core::session::{evaluate, EquilibriumReport, Session};
use mobeq_core::{CityModel, Error, KpiBundle};
use mobeq_server::ServerConfig;

use crate::{Format, TableFormat};

/// A failed command and the exit code it maps to.
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

type CmdResult<T = ()> = Result<T, Failure>;

fn invalid(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

fn internal(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

/// Problems with the user's inputs exit 1; anything else is an engine
/// defect and exits 2.
fn classify(e: Error) -> Failure {
    match e {
        Error::InvalidCity(_)
        | Error::InvalidControls(_)
        | Error::Precondition(_)
        | Error::Infeasible(_)
        | Error::OracleTooLarge { .. }
        | Error::MissingIteration(_) => invalid(e),
        _ => internal(e),
    }
}

fn load_error(path: &str, e: LoadError) -> Failure {
    let e = anyhow::Error::new(e).context(format!("cannot load `{path}`"));
    invalid(e)
}

/// A city file path, or the key of a bundled city.
fn city_arg(arg: &str) -> CmdResult<CityModel> {
    if Path::new(arg).exists() {
        return load_city(arg).map_err(|e| load_error(arg, e));
    }
    bundled_city(arg).ok_or_else(|| invalid(anyhow!("`{arg}` is neither a file nor a bundled city")))
}

/// Controls from a file; bundled cities default to their nominal controls,
/// other cities to no fleet at all.
fn controls_arg(city_arg: &str, path: Option<&Path>) -> CmdResult<ScenarioControls> {
    match path {
        Some(p) => load_controls(p).map_err(|e| load_error(&p.display().to_string(), e)),
        None if !Path::new(city_arg).exists() => Ok(bundled_nominal_controls(city_arg).unwrap_or_default()),
        None => Ok(ScenarioControls::default()),
    }
}

pub fn validate(city: &str, controls: Option<&Path>) -> CmdResult {
    let model = city_arg(city)?;
    println!(
        "ok: {} ({} zones, {} populations, {} modes incl. walking, {} travelers)",
        model.name,
        model.n_zones(),
        model.n_populations(),
        model.n_modes(),
        model.demand.total()
    );
    if let Some(path) = controls {
        let c = controls_arg(city, Some(path))?;
        let report = validate_controls(&model, &c);
        if !report.is_valid() {
            return Err(invalid(anyhow!("invalid controls `{}`:\n{report}", path.display())));
        }
        println!("ok: controls {}", path.display());
    }
    Ok(())
}

fn write_output(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write `{}`", path.display()))
            .map_err(internal),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(internal)
        }
    }
}

pub fn solve(city: &str, controls: Option<&Path>, oracle: bool, format: Format, out: Option<&Path>) -> CmdResult {
    let model = city_arg(city)?;
    let controls = controls_arg(city, controls)?;
    let report = evaluate(&model, &controls, 1).map_err(classify)?;

    if oracle {
        let inst = build_instance(&model, &controls).map_err(classify)?;
        let (_, stats) = oracle_solve(&inst).map_err(classify)?;
        let gap = (report.stats.objective - stats.objective).abs();
        eprintln!(
            "decomposed objective: {:.6}\noracle objective: {:.6}\nobjective gap: {gap:.3e}",
            report.stats.objective, stats.objective
        );
        if gap > 1e-6 * stats.objective.abs().max(1.0) {
            return Err(internal(anyhow!("decomposed and oracle objectives disagree by {gap}")));
        }
    }

    let text = match format {
        Format::Json => serde_json::to_string_pretty(&report).map_err(internal)? + "\n",
        Format::Csv => report_csv(&model, &report).map_err(internal)?,
    };
    write_output(out, &text)
}

/// One row per zone and mode, then the scalar KPIs as `kpi,value` rows.
fn report_csv(city: &CityModel, report: &EquilibriumReport) -> anyhow::Result<String> {
    let inst = build_instance(city, &report.controls)?;
    let d = inst.dims();
    let cfg = Configuration::from_sparse(d, &report.configuration)?;
    let mut revenue = vec![0.0; d.zones * d.modes];
    for (i, j, k) in inst.active_triples() {
        for m in 0..d.modes {
            revenue[d.zone_mode(i, m)] += inst.demand(i, j, k) * cfg.get(i, j, k, m) * inst.fare(i, j, m);
        }
    }

    let modes = city.all_modes();
    let kpis = &report.kpis;
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    w.write_record(["zone", "mode", "share", "riders", "revenue"])?;
    for (i, zone) in city.zones.iter().enumerate() {
        for mode in &modes {
            let m = mode.id;
            w.write_record([
                zone.name.clone(),
                mode.name.clone(),
                kpis.mode_share[i][m].to_string(),
                kpis.riders[i][m].to_string(),
                revenue[d.zone_mode(i, m)].to_string(),
            ])?;
        }
    }
    w.write_record([""])?;
    w.write_record(["kpi", "value"])?;
    for (name, value) in scalar_kpis(city, kpis) {
        w.write_record([name, value.to_string()])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Flattens the KPIs that are not per-zone into named values.
fn scalar_kpis(city: &CityModel, k: &KpiBundle) -> Vec<(String, f64)> {
    let mut rows = vec![
        ("avg_travel_time_min".to_string(), k.avg_travel_time),
        ("co2_kg".to_string(), k.co2),
        ("tax_revenue_usd".to_string(), k.tax_revenue),
    ];
    for mode in city.all_modes() {
        rows.push((format!("revenue_usd.{}", mode.name), k.revenue[mode.id]));
    }
    for mode in city.all_modes() {
        rows.push((format!("operating_cost_usd.{}", mode.name), k.operating_cost[mode.id]));
    }
    rows
}

/// Every KPI, including per-zone shares and riders, as named values.
fn all_kpis(city: &CityModel, k: &KpiBundle) -> Vec<(String, f64)> {
    let mut rows = scalar_kpis(city, k);
    let modes = city.all_modes();
    for (i, zone) in city.zones.iter().enumerate() {
        for mode in &modes {
            rows.push((format!("share.{}.{}", zone.name, mode.name), k.mode_share[i][mode.id]));
        }
    }
    for (i, zone) in city.zones.iter().enumerate() {
        for mode in &modes {
            rows.push((format!("riders.{}.{}", zone.name, mode.name), k.riders[i][mode.id]));
        }
    }
    rows
}

pub fn run(city: &str, controls: &[PathBuf], out: &Path) -> CmdResult {
    let model = city_arg(city)?;
    let mut session = Session::create(model).map_err(classify)?;
    for path in controls {
        let c = controls_arg(city, Some(path))?;
        let report = session.run_iteration(&c).map_err(classify)?;
        println!(
            "iteration {}: {} -> objective {:.2}, avg travel time {:.2} min",
            report.iteration,
            path.display(),
            report.stats.objective,
            report.kpis.avg_travel_time
        );
    }
    save_session(&session, out).map_err(|e| internal(anyhow::Error::new(e)))?;
    println!("saved session {} to {}", session.id(), out.display());
    Ok(())
}

fn session_arg(path: &Path) -> CmdResult<Session> {
    load_session(path).map_err(|e| load_error(&path.display().to_string(), e))
}

pub fn replay(path: &Path, tolerance: f64) -> CmdResult {
    let session = session_arg(path)?;
    let replayed = session.replay().map_err(classify)?;
    let mut failures = 0;
    for (stored, fresh) in session.history().iter().zip(&replayed) {
        let a = all_kpis(session.city(), &stored.kpis);
        let b = all_kpis(session.city(), &fresh.kpis);
        let (worst_name, worst) = a
            .iter()
            .zip(&b)
            .map(|((name, x), (_, y))| (name.as_str(), (x - y).abs()))
            .fold(("", 0.0), |acc, (n, dev)| if dev > acc.1 { (n, dev) } else { acc });
        let identical = stored.kpis == fresh.kpis && stored.configuration == fresh.configuration;
        if worst > tolerance || !fresh.nash.verdict {
            failures += 1;
            println!("iteration {}: MISMATCH, max deviation {worst:.3e} in {worst_name}", stored.iteration);
        } else if identical {
            println!("iteration {}: identical", stored.iteration);
        } else {
            println!("iteration {}: within tolerance, max deviation {worst:.3e}", stored.iteration);
        }
    }
    if failures > 0 {
        return Err(invalid(anyhow!(
            "{failures} of {} iterations did not reproduce",
            session.len()
        )));
    }
    println!("replayed {} iterations of session {}", session.len(), session.id());
    Ok(())
}

pub fn compare(path: &Path, a: usize, b: usize, format: TableFormat) -> CmdResult {
    let session = session_arg(path)?;
    let ra = session.report(a).map_err(classify)?;
    let rb = session.report(b).map_err(classify)?;
    let rows: Vec<(String, f64, f64)> = all_kpis(session.city(), &ra.kpis)
        .into_iter()
        .zip(all_kpis(session.city(), &rb.kpis))
        .map(|((name, x), (_, y))| (name, x, y))
        .collect();
    let text = match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["kpi", &format!("iteration_{a}"), &format!("iteration_{b}"), "delta"])
                .map_err(internal)?;
            for (name, x, y) in &rows {
                w.write_record([name.clone(), x.to_string(), y.to_string(), (y - x).to_string()])
                    .map_err(internal)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| internal(anyhow!("{e}")))?).map_err(internal)?
        }
        TableFormat::Table => {
            let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(3).max(3);
            let mut s = format!(
                "{:<width$}  {:>14}  {:>14}  {:>14}\n",
                "kpi",
                format!("#{a}"),
                format!("#{b}"),
                "delta"
            );
            for (name, x, y) in &rows {
                s += &format!("{name:<width$}  {x:>14.4}  {y:>14.4}  {:>+14.4}\n", y - x);
            }
            s
        }
    };
    write_output(None, &text)
}

pub fn serve(addr: IpAddr, port: u16, data_dir: Option<PathBuf>, static_dir: Option<PathBuf>) -> CmdResult {
    let config = ServerConfig {
        data_dir,
        static_dir,
        ..ServerConfig::default()
    };
    let runtime = tokio::runtime::Runtime::new().map_err(internal)?;
    runtime
        .block_on(mobeq_server::serve(SocketAddr::new(addr, port), config))
        .context("server stopped")
        .map_err(internal)
}
