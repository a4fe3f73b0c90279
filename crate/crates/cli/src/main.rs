mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use klfactor::curves::{compute_returns, demean_panel, FillPolicy, IngestOptions, ReturnCurvePanel};
use klfactor::eval::acf;
use klfactor::forecast::{forecast_day, rolling_backtest, AueOptions, BacktestConfig, Method, RefitMode};
use klfactor::fpca::{fit_fpca, FpcaOptions, GridWeight};
use klfactor::io;
use klfactor::rolling::{self, Estimator, Penalty, RollingConfig};
use klfactor::sim::{simulate_panel, KlFactorSpec};
use klfactor::{Error, ErrorClass, Exec, Result};
use serde_json::json;

use config::FileConfig;

#[derive(Parser)]
#[command(name = "klfactor", version, about = "Functional PCA forecasts of intraday return curves")]
struct Cli {
    /// JSON config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default "."; also KLFACTOR_OUT_DIR).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn a timestamp,price CSV into a panel of daily return curves.
    Ingest(IngestArgs),
    /// Fit the functional principal components of a panel.
    Fpca(FpcaArgs),
    /// Forecast the day after the panel with one method.
    Forecast(ForecastArgs),
    /// Rolling-window evaluation of one-day-ahead forecasts.
    Backtest(BacktestArgs),
    /// Intraday forecasts of the last k returns of each day.
    Rolling(RollingArgs),
    /// Simulate a panel from a factor model spec.
    Simulate(SimulateArgs),
    /// Autocorrelation of eigenscores and squared eigenscores.
    DiagAcf(DiagArgs),
}

#[derive(Args)]
struct PanelInput {
    /// Panel CSV written by `ingest` or `simulate`.
    #[arg(long)]
    panel: PathBuf,
    /// Sidecar JSON (default: panel path with .json extension).
    #[arg(long)]
    meta: Option<PathBuf>,
}

impl PanelInput {
    fn load(&self) -> Result<ReturnCurvePanel> {
        let meta = self.meta.clone().unwrap_or_else(|| self.panel.with_extension("json"));
        io::read_panel(&self.panel, &meta)
    }
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    prices: PathBuf,
    #[arg(long)]
    grid_step: Option<i64>,
    /// forward_fill or strict.
    #[arg(long)]
    fill: Option<String>,
    #[arg(long)]
    day_offset_steps: Option<i64>,
}

#[derive(Args)]
struct FpcaArgs {
    #[command(flatten)]
    input: PanelInput,
    #[arg(long)]
    delta: Option<f64>,
    /// unit or uniform.
    #[arg(long)]
    weight: Option<String>,
}

#[derive(Args)]
struct ForecastArgs {
    #[command(flatten)]
    input: PanelInput,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// expanding or full_sample.
    #[arg(long)]
    aue_refit: Option<String>,
}

#[derive(Args)]
struct BacktestArgs {
    #[command(flatten)]
    input: PanelInput,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    horizon_days: Option<usize>,
    /// Comma-separated: argarch, arma_aue, var_sbekk, var_aue.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    aue_refit: Option<String>,
}

#[derive(Args)]
struct RollingArgs {
    #[command(flatten)]
    input: PanelInput,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    /// ols, ridge or lasso.
    #[arg(long)]
    estimator: Option<String>,
    /// A number, "default" or "cv".
    #[arg(long)]
    penalty: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    n_forecasts: Option<usize>,
    /// Search window sizes LO:HI and report the best sign rate.
    #[arg(long)]
    window_search: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Factor model spec JSON.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    days: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
}

#[derive(Args)]
struct DiagArgs {
    #[command(flatten)]
    input: PanelInput,
    #[arg(long)]
    max_lag: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
}

struct Ctx {
    out: PathBuf,
    exec: Exec,
    cfg: FileConfig,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Config(format!("invalid {what}: {s:?}")))
}

fn fill_policy(s: &str) -> Result<FillPolicy> {
    match s.to_ascii_lowercase().replace('-', "_").as_str() {
        "forward_fill" | "ffill" => Ok(FillPolicy::ForwardFill),
        "strict" => Ok(FillPolicy::Strict),
        _ => Err(Error::Config(format!("unknown fill policy {s:?}"))),
    }
}

fn grid_weight(s: &str) -> Result<GridWeight> {
    match s.to_ascii_lowercase().as_str() {
        "unit" => Ok(GridWeight::Unit),
        "uniform" => Ok(GridWeight::Uniform),
        _ => Err(Error::Config(format!("unknown grid weight {s:?}"))),
    }
}

fn refit_mode(s: &str) -> Result<RefitMode> {
    match s.to_ascii_lowercase().replace('-', "_").as_str() {
        "expanding" => Ok(RefitMode::Expanding),
        "full_sample" | "full" => Ok(RefitMode::FullSample),
        _ => Err(Error::Config(format!("unknown refit mode {s:?}"))),
    }
}

fn fpca_options(ctx: &Ctx, delta: Option<f64>, weight: Option<&str>) -> Result<FpcaOptions> {
    let weight = match weight.or(ctx.cfg.weight.as_deref()) {
        Some(w) => grid_weight(w)?,
        None => GridWeight::Unit,
    };
    Ok(FpcaOptions { delta: delta.or(ctx.cfg.delta).unwrap_or(0.85), weight, j_max: None })
}

fn aue_options(ctx: &Ctx, refit: Option<&str>) -> Result<AueOptions> {
    let mut o = AueOptions::default();
    if let Some(r) = refit.or(ctx.cfg.aue_refit.as_deref()) {
        o.refit = refit_mode(r)?;
    }
    Ok(o)
}

fn run_ingest(ctx: &Ctx, a: &IngestArgs) -> Result<serde_json::Value> {
    let mut opts = IngestOptions::default();
    if let Some(g) = a.grid_step.or(ctx.cfg.grid_step) {
        opts.grid_step = g;
    }
    if let Some(f) = a.fill.as_deref().or(ctx.cfg.fill.as_deref()) {
        opts.fill = fill_policy(f)?;
    }
    if let Some(d) = a.day_offset_steps.or(ctx.cfg.day_offset_steps) {
        opts.day_offset_steps = d;
    }
    let prices = io::read_prices(&a.prices)?;
    let ing = compute_returns(&prices, &opts)?;
    let panel = ReturnCurvePanel::from_ingested(ing, opts.grid_step)?;
    let (csv, meta) = (ctx.path("panel.csv"), ctx.path("panel.json"));
    io::write_panel(&panel, &csv, &meta)?;
    Ok(json!({ "panel": csv, "meta": meta, "N": panel.n(), "T": panel.t(), "fill": panel.fill }))
}

fn run_fpca(ctx: &Ctx, a: &FpcaArgs) -> Result<serde_json::Value> {
    let panel = a.input.load()?;
    let demeaned = if panel.is_demeaned() { panel } else { demean_panel(&panel)? };
    let basis = fit_fpca(&demeaned, &fpca_options(ctx, a.delta, a.weight.as_deref())?)?;
    let starts: Vec<i64> = demeaned.curves().iter().map(|c| c.day_start).collect();
    io::write_basis(&basis, &ctx.path("basis.json"))?;
    io::write_scores(&basis, &starts, &ctx.path("scores.csv"))?;
    Ok(json!({ "J": basis.j, "cpv": basis.cpv.get(basis.j.saturating_sub(1)), "sigma2_resid": basis.sigma2_resid }))
}

fn backtest_config(
    ctx: &Ctx,
    window: Option<usize>,
    level: Option<f64>,
    delta: Option<f64>,
    refit: Option<&str>,
) -> Result<BacktestConfig> {
    Ok(BacktestConfig {
        window: window.or(ctx.cfg.window).unwrap_or(250),
        horizon_days: ctx.cfg.horizon_days.unwrap_or(10),
        fpca: fpca_options(ctx, delta, None)?,
        methods: Method::ALL.to_vec(),
        level: level.or(ctx.cfg.level).unwrap_or(0.95),
        aue: aue_options(ctx, refit)?,
        sbekk: Default::default(),
        exec: ctx.exec,
    })
}

fn run_forecast(ctx: &Ctx, a: &ForecastArgs) -> Result<serde_json::Value> {
    let panel = a.input.load()?;
    if panel.is_demeaned() {
        return Err(Error::AlreadyDemeaned);
    }
    let cfg = backtest_config(ctx, a.window, a.level, a.delta, a.aue_refit.as_deref())?;
    let method: Method = parse(a.method.as_deref().or(ctx.cfg.method.as_deref()).unwrap_or("ARGARCH"), "method")?;
    let n = panel.n();
    let window = cfg.window.min(n);
    let w = panel.slice(n - window..n)?;
    let f = forecast_day(&w, &[method], &cfg)?.pop().expect("one method")?;
    io::write_forecast(&f, panel.grid(), None, &ctx.path("forecast.csv"))?;
    let last = panel.curves().last().map(|c| c.day_start + 86_400);
    let meta = io::ForecastMeta {
        method,
        level: f.level,
        j: f.j(),
        window,
        day: last,
        score_forecasts: f.score_forecasts.clone(),
        score_variances: f.score_variances.clone(),
        kappa: f.kappa,
    };
    io::write_json(&meta, &ctx.path("forecast.json"))?;
    Ok(serde_json::to_value(&meta)?)
}

fn run_backtest(ctx: &Ctx, a: &BacktestArgs) -> Result<serde_json::Value> {
    let panel = a.input.load()?;
    if panel.is_demeaned() {
        return Err(Error::AlreadyDemeaned);
    }
    let mut cfg = backtest_config(ctx, a.window, a.level, a.delta, a.aue_refit.as_deref())?;
    cfg.horizon_days = a.horizon_days.or(ctx.cfg.horizon_days).unwrap_or(10);
    if let Some(m) = a.methods.as_deref().or(ctx.cfg.methods.as_deref()) {
        cfg.methods = m.split(',').map(|s| parse(s.trim(), "method")).collect::<Result<Vec<Method>>>()?;
    }
    let (report, outcomes) = rolling_backtest(&panel, &cfg)?;
    io::write_report(&report, &ctx.path("report.json"), &ctx.path("table.csv"))?;
    io::write_json(&outcomes, &ctx.path("forecasts.json"))?;
    Ok(json!({ "aggregates": report.aggregates, "failures": report.failures.len() }))
}

fn run_rolling(ctx: &Ctx, a: &RollingArgs) -> Result<serde_json::Value> {
    let panel = a.input.load()?;
    let values = panel.restored();
    let flat: Vec<f64> = values.into_iter().flatten().collect();
    let starts: Vec<i64> = panel.curves().iter().map(|c| c.day_start).collect();
    let estimator: Estimator =
        parse(a.estimator.as_deref().or(ctx.cfg.estimator.as_deref()).unwrap_or("ols"), "estimator")?;
    let penalty = match a.penalty.as_deref().or(ctx.cfg.penalty.as_deref()).unwrap_or("default") {
        "default" => Penalty::Fixed(estimator.default_penalty()),
        "cv" => Penalty::CrossValidated,
        p => Penalty::Fixed(parse(p, "penalty")?),
    };
    let cfg = RollingConfig {
        t: panel.t(),
        k: a.k.or(ctx.cfg.k).unwrap_or(1),
        window: a.window.or(ctx.cfg.window).unwrap_or(100),
        delta: a.delta.or(ctx.cfg.delta).unwrap_or(0.85),
        estimator,
        penalty,
        n_forecasts: a.n_forecasts.or(ctx.cfg.n_forecasts).unwrap_or(200),
        exec: ctx.exec,
    };
    let mut summary = json!({});
    let cfg = if let Some(range) = a.window_search.as_deref().or(ctx.cfg.window_search.as_deref()) {
        let (lo, hi) = range
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("window search must be LO:HI, got {range:?}")))?;
        let (lo, hi): (usize, usize) = (parse(lo, "window")?, parse(hi, "window")?);
        let (best, all) = rolling::search_window(&flat, &cfg, lo..=hi)?;
        io::write_json(&all, &ctx.path("window_search.json"))?;
        summary["window_search"] = serde_json::to_value(best)?;
        RollingConfig { window: best.window, ..cfg }
    } else {
        cfg
    };
    let grid_step = panel.grid_step;
    let report = rolling::rolling_backtest(&flat, Some(&starts), grid_step, &cfg)?;
    io::write_rolling(&report, &ctx.path("rolling.csv"))?;
    io::write_json(&report, &ctx.path("rolling.json"))?;
    summary["rmse"] = json!(report.rmse);
    summary["mae"] = json!(report.mae);
    summary["sign_rate"] = json!(report.sign_rate);
    summary["window"] = json!(cfg.window);
    summary["failures"] = json!(report.failures.len());
    Ok(summary)
}

fn run_simulate(ctx: &Ctx, a: &SimulateArgs) -> Result<serde_json::Value> {
    let spec: KlFactorSpec = io::read_json(&a.spec)?;
    let days = a.days.or(ctx.cfg.days).unwrap_or(500);
    let burn = a.burn_in.or(ctx.cfg.burn_in).unwrap_or(500);
    let (panel, scores) = simulate_panel(&spec, days, burn)?;
    io::write_panel(&panel, &ctx.path("panel.csv"), &ctx.path("panel.json"))?;
    let header: Vec<String> = (1..=scores.ncols()).map(|j| format!("beta_{j}")).collect();
    io::write_matrix(&scores, &header, &ctx.path("true_scores.csv"))?;
    Ok(json!({ "N": panel.n(), "T": panel.t() }))
}

fn run_diag(ctx: &Ctx, a: &DiagArgs) -> Result<serde_json::Value> {
    let panel = a.input.load()?;
    let demeaned = if panel.is_demeaned() { panel } else { demean_panel(&panel)? };
    let basis = fit_fpca(&demeaned, &fpca_options(ctx, a.delta, None)?)?;
    let max_lag = a.max_lag.or(ctx.cfg.max_lag).unwrap_or(20);
    let mut out = Vec::new();
    for j in 0..basis.j {
        let s: Vec<f64> = basis.scores.column(j).iter().copied().collect();
        let sq: Vec<f64> = s.iter().map(|v| v * v).collect();
        out.push(json!({ "score": j + 1, "acf": acf(&s, max_lag)?, "acf_squared": acf(&sq, max_lag)? }));
    }
    let value = json!({ "J": basis.j, "series": out });
    io::write_json(&value, &ctx.path("acf.json"))?;
    Ok(json!({ "J": basis.j, "output": ctx.path("acf.json") }))
}

fn run(cli: &Cli) -> Result<serde_json::Value> {
    let cfg = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let out = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("KLFACTOR_OUT_DIR").map(PathBuf::from))
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)?;
    let ctx = Ctx { out, exec: Exec::from_threads(cli.threads.or(cfg.threads)), cfg };
    match &cli.command {
        Command::Ingest(a) => run_ingest(&ctx, a),
        Command::Fpca(a) => run_fpca(&ctx, a),
        Command::Forecast(a) => run_forecast(&ctx, a),
        Command::Backtest(a) => run_backtest(&ctx, a),
        Command::Rolling(a) => run_rolling(&ctx, a),
        Command::Simulate(a) => run_simulate(&ctx, a),
        Command::DiagAcf(a) => run_diag(&ctx, a),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Config => 2,
        ErrorClass::Data => 3,
        ErrorClass::Numerical => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.code(), "message": e.to_string() }));
            ExitCode::from(exit_code(&e))
        }
    }
}
