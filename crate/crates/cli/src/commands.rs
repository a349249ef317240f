use kinproof::acceptance;
use kinproof::analytic::{classify, compute_report, delta_c, AnalyticReport};
use kinproof::crn::{complex, ADP, ATP, FREE, PHOSPHATE};
use kinproof::enlarged::{
    conservation_drift, direct_fluxes, external_fluxes, frozen_state, integrate_enlarged_grid, EnlargedParams,
};
use kinproof::finite::{solve, sweep_sigma};
use kinproof::half_line::verify_theorem_5;
use kinproof::mc::mc_sweep;
use kinproof::output::{num, Table};
use kinproof::pde::{initial_datum, relax, PdeKind, PdeParams};
use kinproof::variants::{profile_table, variant_exponent, variant_steady_profile, VariantSpec};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::plot::{line_plot, Series};

/// Files to write and text for standard output.
#[derive(Debug, Default)]
pub struct Output {
    pub files: Vec<(String, String)>,
    pub stdout: String,
}

impl Output {
    fn file(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    fn say(&mut self, line: impl AsRef<str>) {
        self.stdout.push_str(line.as_ref());
        self.stdout.push('\n');
    }

    fn svg(&mut self, cfg: &RunConfig, name: &str, title: &str, x: &str, y: &str, series: Vec<Series>) {
        if cfg.svg {
            self.file(name, line_plot(title, x, y, &series));
        }
    }
}

fn series(label: impl Into<String>, xs: &[f64], ys: &[f64]) -> Series {
    Series { label: label.into(), points: xs.iter().copied().zip(ys.iter().copied()).collect() }
}

fn key_values(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn report(cfg: &RunConfig) -> Result<Output, CliError> {
    let r = compute_report(&cfg.model()?)?;
    let mut out = Output::default();
    out.file("report.txt", r.to_key_value());
    out.file("report.csv", format!("{}\n{}\n", AnalyticReport::csv_header(), r.to_csv_row()));
    out.stdout = r.to_key_value();
    Ok(out)
}

pub fn pres(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = cfg.model()?;
    let s = solve(&p)?;
    let mut t = Table::new(&["n", "alpha", "delta", "sigma", "energy", "mu", "pres", "log_odds", "residual"]);
    t.push(vec![
        p.n.to_string(),
        num(p.alpha),
        num(p.delta),
        num(p.sigma),
        num(p.energy),
        num(p.mu()),
        num(s.pres),
        num(s.log_odds / p.n as f64),
        num(s.residual),
    ]);
    let mut out = Output::default();
    out.say(format!("pres={}", num(s.pres)));
    out.say(format!("log_odds={}", num(s.log_odds / p.n as f64)));
    out.say(format!("regime={}", classify(&p)));
    out.file("pres.csv", t.to_csv());
    Ok(out)
}

pub fn sweep(cfg: &RunConfig) -> Result<Output, CliError> {
    if cfg.deltas.is_empty() {
        return Err(CliError::Config("deltas must be nonempty".into()));
    }
    let grid = cfg.sigma_grid()?;
    let base = cfg.model()?;
    let mut out = Output::default();
    let mut lines = Vec::new();
    for &d in &cfg.deltas {
        let r = sweep_sigma(&base.with_delta(d), &grid)?;
        if let Some(e) = r.errors.iter().flatten().next() {
            return Err(e.clone().into());
        }
        let name = format!("sweep_delta_{d:?}.csv");
        out.say(format!(
            "{name}: delta={d:?} half_crossing={}",
            r.half_crossing().map_or("none".into(), num)
        ));
        out.file(name, r.to_csv());
        lines.push(series(format!("Δ = {d}"), &r.sigma, &r.pres));
    }
    out.svg(cfg, "sweep.svg", "response probability", "σ", "p_res", lines);
    Ok(out)
}

pub fn phase(cfg: &RunConfig) -> Result<Output, CliError> {
    let grid = cfg.sigma_grid()?;
    if !(cfg.alpha > 0.0 && cfg.energy > 0.0) {
        return Err(CliError::Config("alpha and energy must be positive".into()));
    }
    let dc: Vec<f64> = grid.iter().map(|&s| delta_c(cfg.alpha, cfg.energy, s)).collect();
    let mut t = Table::new(&["sigma", "delta_c"]);
    for (s, d) in grid.iter().zip(&dc) {
        t.push_nums(&[*s, *d]);
    }
    let mut out = Output::default();
    out.say(format!("delta_c(sigma_min)={} delta_c(sigma_max)={}", num(dc[0]), num(dc[dc.len() - 1])));
    out.file("phase.csv", t.to_csv());
    out.svg(cfg, "phase.svg", "critical Δ", "σ", "Δ_c", vec![series("Δ_c(σ)", &grid, &dc)]);
    Ok(out)
}

pub fn halfline(cfg: &RunConfig) -> Result<Output, CliError> {
    if cfg.taus.is_empty() {
        return Err(CliError::Config("taus must be nonempty".into()));
    }
    let p = cfg.model()?;
    let table = verify_theorem_5(cfg.theta, &cfg.taus, &p)?;
    let mut out = Output::default();
    out.say(format!("regime={}", table.target.regime));
    if let Some(c) = table.target.case {
        out.say(format!("case={c:?}"));
    }
    out.say(format!("limit={}", num(table.target.limit)));
    out.say(format!("gaps_decreasing={}", table.gaps_decreasing()));
    out.say(format!("final_gap={}", num(table.final_gap())));
    out.file("halfline.csv", table.table().to_csv());
    let taus: Vec<f64> = table.rows.iter().map(|r| r.tau).collect();
    let gaps: Vec<f64> = table.rows.iter().map(|r| r.gap).collect();
    out.svg(cfg, "halfline.svg", "gap along the ray", "τ", "gap", vec![series(format!("θ = {}", cfg.theta), &taus, &gaps)]);
    Ok(out)
}

pub fn enlarged(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = EnlargedParams::from_base(&cfg.model()?, cfg.e_t, cfg.e_d, cfg.e_p)?;
    if cfg.t_points < 1 || !(cfg.t_end > 0.0) {
        return Err(CliError::Config("t_end must be positive and t_points at least 1".into()));
    }
    let s0 = frozen_state(&p, cfg.delta);
    let times: Vec<f64> = (1..=cfg.t_points).map(|i| cfg.t_end * i as f64 / cfg.t_points as f64).collect();
    let traj = integrate_enlarged_grid(&s0, &p, &times)?;

    let mut header: Vec<String> = vec!["t".into()];
    header.extend((0..=p.n).map(complex));
    header.extend([ATP, ADP, PHOSPHATE, FREE].map(String::from));
    let mut t = Table { header, rows: Vec::new() };
    for (time, s) in std::iter::once((0.0, &s0)).chain(times.iter().copied().zip(&traj)) {
        t.push_nums(&std::iter::once(time).chain(s.to_vec()).collect::<Vec<_>>());
    }

    let f = external_fluxes(&p, cfg.delta)?;
    let d = direct_fluxes(&p, cfg.delta);
    let mut out = Output::default();
    out.stdout = key_values(&[
        ("j_t", num(f.j_t)),
        ("j_d", num(f.j_d)),
        ("j_p", num(f.j_p)),
        ("j_t_direct", num(d.j_t)),
        ("j_d_direct", num(d.j_d)),
        ("j_p_direct", num(d.j_p)),
        ("conservation_drift", num(conservation_drift(&traj, &s0))),
    ]);
    out.file("enlarged_fluxes.txt", out.stdout.clone());
    out.file("enlarged.csv", t.to_csv());
    let xs: Vec<f64> = t.column("t").unwrap();
    let lines = ["ATP", "ADP", "P", "S"].iter().map(|name| series(*name, &xs, &t.column(name).unwrap())).collect();
    out.svg(cfg, "enlarged.svg", "enlarged network from the frozen state", "t", "concentration", lines);
    Ok(out)
}

pub fn pde(cfg: &RunConfig, kind: PdeKind) -> Result<Output, CliError> {
    let p = PdeParams {
        beta: cfg.beta,
        loss: cfg.loss,
        alpha: cfg.alpha,
        energy: cfg.energy,
        delta: cfg.delta,
        length: cfg.length,
        cells: cfg.cells,
    };
    let fld = relax(&p, kind, &initial_datum(&p, kind)?)?;
    let slope = fld.log_slope()?;
    let mut pairs = vec![
        ("tau", num(fld.tau)),
        ("growth", num(fld.growth)),
        ("slope", num(slope.slope)),
        ("slope_se", num(slope.slope_se)),
    ];
    let name = match kind {
        PdeKind::Pde1 => {
            pairs.push(("lambda_printed", num(p.lambda1_printed())));
            pairs.push(("lambda_exact", num(p.lambda1_exact())));
            "pde1"
        }
        PdeKind::Pde2 => {
            let fit = fld.two_exp()?;
            pairs.push(("lambda_fit", num(fit.lambda)));
            pairs.push(("lambda_predicted", num(p.lambda2())));
            pairs.push(("discriminates", p.pde2_discriminates().to_string()));
            "pde2"
        }
    };
    let mut out = Output::default();
    out.stdout = key_values(&pairs);
    out.file(format!("{name}_fit.txt"), out.stdout.clone());
    out.file(format!("{name}.csv"), fld.table().to_csv());
    let logf: Vec<f64> = fld.f.iter().map(|v| v.ln()).collect();
    out.svg(cfg, &format!("{name}.svg"), "long-time shape", "x", "log f", vec![series(name, &fld.x, &logf)]);
    Ok(out)
}

pub fn variant(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = VariantSpec::new(cfg.variant_kind()?, cfg.model()?, cfg.truncation)?;
    let prof = variant_steady_profile(&spec)?;
    let e = variant_exponent(&spec)?;
    let mut out = Output::default();
    out.stdout = key_values(&[
        ("variant", spec.kind.name().to_string()),
        ("lambda", num(e.lambda)),
        ("slope_se", num(e.slope_se)),
        ("spread", num(e.spread)),
        ("sigma_sensitive", e.sigma_sensitive.to_string()),
    ]);
    out.file("variant_fit.txt", out.stdout.clone());
    out.file("variant.csv", profile_table(&prof).to_csv());
    let ks: Vec<f64> = (0..prof.len()).map(|k| k as f64).collect();
    let logn: Vec<f64> = prof.iter().map(|v| v.ln()).collect();
    out.svg(cfg, "variant.svg", "steady profile", "k", "log n", vec![series(spec.kind.name(), &ks, &logn)]);
    Ok(out)
}

pub fn mc(cfg: &RunConfig) -> Result<Output, CliError> {
    if cfg.mc_sigmas.is_empty() {
        return Err(CliError::Config("mc_sigmas must be nonempty".into()));
    }
    let (est, table) = mc_sweep(&cfg.model()?, &cfg.mc_sigmas, cfg.trials, cfg.seed)?;
    let mut out = Output::default();
    for (s, e) in cfg.mc_sigmas.iter().zip(&est) {
        out.say(format!("sigma={} p_hat={} stderr={}", num(*s), num(e.p_hat), num(e.stderr)));
    }
    out.file("mc.csv", table.to_csv());
    let p: Vec<f64> = est.iter().map(|e| e.p_hat).collect();
    out.svg(cfg, "mc.svg", "Monte Carlo estimate", "σ", "p̂", vec![series("p̂", &cfg.mc_sigmas, &p)]);
    Ok(out)
}

/// Runs the acceptance suite; a failing check yields exit code 4 after the files are written.
pub fn verify(_cfg: &RunConfig) -> (Output, Option<CliError>) {
    let results = acceptance::run_all();
    let mut t = Table::new(&["id", "name", "pass", "seconds", "detail"]);
    let mut out = Output::default();
    for r in &results {
        out.say(r.line());
        t.push(vec![
            r.id.to_string(),
            r.name.to_string(),
            r.pass.to_string(),
            format!("{:.3}", r.seconds),
            format!("\"{}\"", r.detail.replace('"', "'")),
        ]);
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    out.say(format!("{} of {} checks passed", results.len() - failed.len(), results.len()));
    out.file("verify.csv", t.to_csv());
    let err = (!failed.is_empty()).then(|| CliError::Verification(format!("checks {} failed", failed.join(", "))));
    (out, err)
}
