//! Command-line entry points: generation, the two tests, verification runs
//! and limit quantile tables.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cpt_test::{beta_process, run_cpt_test, threshold_grid, time_grid, CptConfig, ThresholdGrid, TimeGrid};
use crate::entropy::{check_a1, check_a2_integral, EntropyBudget};
use crate::error::{Error, Result};
use crate::io::{read_sample_file, read_series_file, write_sample, write_series};
use crate::limits::{dense_levels, functional_quantiles, Functional, QuantileTable, DEFAULT_BRIDGE_REPS, DEFAULT_BRIDGE_RESOLUTION, SCHEMA_VERSION};
use crate::report::TestReport;
use crate::seriesgen::{gen_regression, gen_setar, MixingSpec, RegressionSpec, SetarSpec};
use crate::setar_test::{run_setar_test, t_process, write_t_csv, KsSource, SetarTables, SetarTestConfig, StatisticChoice};
use crate::verify::{equicontinuity_modulus, fidi_check, moment_scaling, FidiConfig, ModulusConfig, MomentConfig};

pub const EXIT_ACCEPT: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_REJECT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "seqproc", version, about = "Sequential empirical process tests and Monte Carlo checks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config; JSON is accepted as well.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file; stdout when absent (except for `gen`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Long-format CSV for plotting.
    #[arg(long, global = true)]
    plot_data: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a series or regression sample to CSV, with a JSON sidecar.
    Gen,
    /// Threshold test on a `t,y` CSV.
    SetarTest { data: PathBuf },
    /// Changepoint test on a `t,y,x1..xd` CSV.
    CptTest { data: PathBuf },
    /// Monte Carlo and closed-form checks.
    Verify {
        #[arg(value_enum)]
        check: VerifyCheck,
    },
    /// Quantile table of a bridge functional.
    Quantiles {
        #[arg(long, default_value = "ks")]
        functional: Functional,
        /// Comma-separated levels; the dense 0.001 grid by default.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_BRIDGE_REPS)]
        reps: usize,
        #[arg(long, default_value_t = DEFAULT_BRIDGE_RESOLUTION)]
        resolution: usize,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum VerifyCheck {
    Moment,
    Modulus,
    Fidi,
    Entropy,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum GenSection {
    Setar(SetarSpec),
    Regression(RegressionSpec),
}

fn default_bridge_reps() -> usize {
    DEFAULT_BRIDGE_REPS
}

fn default_bridge_resolution() -> usize {
    DEFAULT_BRIDGE_RESOLUTION
}

#[derive(Debug, Deserialize)]
struct SetarSection {
    #[serde(flatten)]
    test: SetarTestConfig,
    #[serde(default)]
    ks_table: Option<PathBuf>,
    #[serde(default)]
    cvm_table: Option<PathBuf>,
    #[serde(default = "default_bridge_reps")]
    bridge_reps: usize,
    #[serde(default = "default_bridge_resolution")]
    bridge_resolution: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CptSection {
    s_grid: Option<TimeGrid>,
    z_grid: Option<ThresholdGrid>,
    reps: Option<usize>,
    level: Option<f64>,
}

fn default_truncation() -> u64 {
    1_000_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntropySection {
    q: u32,
    gamma: f64,
    bracket_exponent: f64,
    mixing: MixingSpec,
    #[serde(default = "default_truncation")]
    truncation: u64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
    gen: Option<serde_json::Value>,
    setar: Option<serde_json::Value>,
    cpt: Option<serde_json::Value>,
    moment: Option<serde_json::Value>,
    modulus: Option<serde_json::Value>,
    fidi: Option<serde_json::Value>,
    entropy: Option<serde_json::Value>,
}

fn config_error(section: &str, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("[{section}] {e}"))
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)?;
    let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    let value: serde_json::Value = if is_json {
        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
    } else {
        toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
    };
    serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
}

fn section<T: for<'de> Deserialize<'de>>(value: Option<&serde_json::Value>, name: &str) -> Result<T> {
    let v = value.cloned().ok_or_else(|| Error::Config(format!("missing section `[{name}]`")))?;
    serde_json::from_value(v).map_err(|e| config_error(name, e))
}

fn section_with_seed<T: for<'de> Deserialize<'de>>(value: Option<&serde_json::Value>, name: &str, seed: u64) -> Result<T> {
    let mut v = value.cloned().ok_or_else(|| Error::Config(format!("missing section `[{name}]`")))?;
    match v.as_object_mut() {
        Some(map) => {
            map.insert("seed".into(), json!(seed));
        }
        None => return Err(config_error(name, "expected a table")),
    }
    serde_json::from_value(v).map_err(|e| config_error(name, e))
}

struct Context {
    common: Common,
    file: FileConfig,
}

impl Context {
    fn seed(&self) -> Result<u64> {
        self.common
            .seed
            .or(self.file.seed)
            .ok_or_else(|| Error::Config("missing field `seed` (set it in the config or pass --seed)".into()))
    }

    fn out(&self) -> Option<PathBuf> {
        self.common.out.clone().or_else(|| self.file.out.clone())
    }

    fn emit<T: Serialize>(&self, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        match self.out() {
            Some(path) => std::fs::write(path, text + "\n")?,
            None => writeln!(std::io::stdout().lock(), "{text}")?,
        }
        Ok(())
    }

    fn plot<F: FnOnce(&mut BufWriter<File>) -> Result<()>>(&self, f: F) -> Result<()> {
        if let Some(path) = &self.common.plot_data {
            let mut w = BufWriter::new(File::create(path)?);
            f(&mut w)?;
            w.flush()?;
        }
        Ok(())
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_ACCEPT };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let file = load_config(cli.common.config.as_deref())?;
    let workers = cli.common.workers.or(file.workers);
    let ctx = Context { common: cli.common, file };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = workers {
        if k == 0 {
            return Err(Error::Config("--workers must be positive".into()));
        }
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Gen => cmd_gen(&ctx),
        Command::SetarTest { data } => cmd_setar_test(&ctx, &data),
        Command::CptTest { data } => cmd_cpt_test(&ctx, &data),
        Command::Verify { check } => cmd_verify(&ctx, check),
        Command::Quantiles { functional, levels, reps, resolution } => {
            let levels = levels.unwrap_or_else(dense_levels);
            let table = functional_quantiles(functional, &levels, resolution, reps, ctx.seed()?)?;
            ctx.emit(&table)?;
            Ok(EXIT_ACCEPT)
        }
    })
}

#[derive(Serialize)]
struct Sidecar<'a> {
    schema_version: u32,
    artifact: &'a str,
    version: &'a str,
    generator: serde_json::Value,
    seed: u64,
    data: String,
}

fn cmd_gen(ctx: &Context) -> Result<i32> {
    let seed = ctx.seed()?;
    let out = ctx.out().ok_or_else(|| Error::Config("missing field `out` (set it in the config or pass --out)".into()))?;
    let spec: GenSection = section(ctx.file.gen.as_ref(), "gen")?;
    let mut w = BufWriter::new(File::create(&out)?);
    let generator = match &spec {
        GenSection::Setar(s) => {
            write_series(&gen_setar(s, seed)?, &mut w)?;
            json!({ "kind": "setar", "spec": s })
        }
        GenSection::Regression(s) => {
            write_sample(&gen_regression(s, seed)?, &mut w)?;
            json!({ "kind": "regression", "spec": s })
        }
    };
    w.flush()?;
    let sidecar = Sidecar {
        schema_version: SCHEMA_VERSION,
        artifact: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        generator,
        seed,
        data: out.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
    };
    let mut side_path = out.clone().into_os_string();
    side_path.push(".json");
    std::fs::write(side_path, serde_json::to_string_pretty(&sidecar)? + "\n")?;
    Ok(EXIT_ACCEPT)
}

fn read_table(path: &Path, expected: Functional) -> Result<QuantileTable> {
    let table: QuantileTable = serde_json::from_slice(&std::fs::read(path)?)?;
    if table.functional != expected {
        return Err(Error::Config(format!("{} holds a {:?} table, expected {expected:?}", path.display(), table.functional)));
    }
    Ok(table)
}

fn decision(report: &TestReport) -> i32 {
    if report.rejects() {
        EXIT_REJECT
    } else {
        EXIT_ACCEPT
    }
}

fn cmd_setar_test(ctx: &Context, data: &Path) -> Result<i32> {
    let section: SetarSection = match ctx.file.setar.as_ref() {
        Some(_) => self::section(ctx.file.setar.as_ref(), "setar")?,
        None => serde_json::from_value(json!({})).map_err(|e| config_error("setar", e))?,
    };
    section.test.validate()?;
    let series = read_series_file(data)?;
    let wants_cvm = matches!(section.test.statistic, StatisticChoice::Cvm | StatisticChoice::Both);
    let wants_ks_table = section.test.ks_source == KsSource::Table
        && matches!(section.test.statistic, StatisticChoice::Ks | StatisticChoice::Both);
    let load_or_simulate = |path: &Option<PathBuf>, functional| -> Result<QuantileTable> {
        match path {
            Some(p) => read_table(p, functional),
            None => functional_quantiles(functional, &dense_levels(), section.bridge_resolution, section.bridge_reps, ctx.seed()?),
        }
    };
    let cvm = if wants_cvm { Some(load_or_simulate(&section.cvm_table, Functional::CvmIntegral)?) } else { None };
    let ks = if wants_ks_table { Some(load_or_simulate(&section.ks_table, Functional::KsSup)?) } else { None };
    let report = run_setar_test(&series, &section.test, &SetarTables { ks: ks.as_ref(), cvm: cvm.as_ref() })?;
    ctx.emit(&report)?;
    ctx.plot(|w| write_t_csv(&t_process(&series)?, w))?;
    Ok(decision(&report))
}

fn cmd_cpt_test(ctx: &Context, data: &Path) -> Result<i32> {
    let mut config = CptConfig::new(ctx.seed()?);
    if ctx.file.cpt.is_some() {
        let s: CptSection = section(ctx.file.cpt.as_ref(), "cpt")?;
        config.s_grid = s.s_grid.unwrap_or(config.s_grid);
        config.z_grid = s.z_grid.unwrap_or(config.z_grid);
        config.reps = s.reps.unwrap_or(config.reps);
        config.level = s.level.unwrap_or(config.level);
    }
    let sample = read_sample_file(data)?;
    let report = run_cpt_test(&sample, &config)?;
    ctx.emit(&report)?;
    ctx.plot(|w| {
        let s_grid = time_grid(sample.n(), &config.s_grid);
        let z_grid = threshold_grid(&sample, &config.z_grid)?;
        beta_process(&sample, &s_grid, &z_grid)?.write_csv(w)
    })?;
    Ok(decision(&report))
}

fn cmd_verify(ctx: &Context, check: VerifyCheck) -> Result<i32> {
    let file = &ctx.file;
    match check {
        VerifyCheck::Moment => {
            let c: MomentConfig = section_with_seed(file.moment.as_ref(), "moment", ctx.seed()?)?;
            let r = moment_scaling(&c)?;
            ctx.emit(&r)?;
            ctx.plot(|w| r.write_csv(w))?;
        }
        VerifyCheck::Modulus => {
            let c: ModulusConfig = section_with_seed(file.modulus.as_ref(), "modulus", ctx.seed()?)?;
            let r = equicontinuity_modulus(&c)?;
            ctx.emit(&r)?;
            ctx.plot(|w| r.write_csv(w))?;
        }
        VerifyCheck::Fidi => {
            let c: FidiConfig = section_with_seed(file.fidi.as_ref(), "fidi", ctx.seed()?)?;
            let r = fidi_check(&c)?;
            ctx.emit(&r)?;
            ctx.plot(|w| r.write_csv(w))?;
        }
        VerifyCheck::Entropy => {
            let c: EntropySection = section(file.entropy.as_ref(), "entropy")?;
            let budget = EntropyBudget::new(c.q, c.gamma, c.bracket_exponent, c.mixing)?;
            let reports = vec![check_a1(&budget, c.truncation)?, check_a2_integral(&budget)?];
            ctx.emit(&json!({ "schema_version": SCHEMA_VERSION, "budget": budget, "conditions": reports }))?;
            ctx.plot(|w| {
                writeln!(w, "condition,pass,value")?;
                for r in &reports {
                    let value = r.value.map(|v| v.to_string()).unwrap_or_default();
                    writeln!(w, "{},{},{value}", r.condition, r.pass)?;
                }
                Ok(())
            })?;
        }
    }
    Ok(EXIT_ACCEPT)
}
