//! Command-line front end. Every subcommand is a thin adapter over the
//! library; numbers printed are exactly the library's results.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 I/O error,
//! 4 malformed input data.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    censoring_rate, cdf_points, decrease_tests, filter_social, load_csv, summary_by_treatment, Dataset,
    SocialFilter, WilcoxonOptions, SUMMARY_ORDER,
};
use crate::error::Error;
use crate::experiment::{evaluate_hypotheses, predict, PredictionMode, Role, Treatment};
use crate::figures::{preset_table, sweep_table, Preset, Table};
use crate::model::{AgentParams, EconomyState};
use crate::oracle::{grid_argmax, GridSpec};
use crate::simlab::{export_csv, simulate, ParamDistribution, PopulationConfig};
use crate::solver::{linspace_step, solve, sweep_other_trend, sweep_own_trend, TrendLink};

/// Environment variable that overrides `simulate --seed`.
pub const SEED_ENV: &str = "TRENDFAIR_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DATA: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "trendfair", version, about = "Dictator-game redistribution with income-trend preferences")]
pub struct Cli {
    /// Output layout on standard output.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one dictator problem in closed form.
    Solve(SolveArgs),
    /// Optimal share (or utility) along a range of trends.
    Sweep(SweepArgs),
    /// Model-predicted giving in the lab treatments.
    Predict(PredictArgs),
    /// Check the four treatment-ordering hypotheses for one agent.
    Hypotheses(HypothesesArgs),
    /// Simulate a lab session and write the giving data as CSV.
    Simulate(SimulateArgs),
    /// Summaries, signed-rank tests, CDFs and censoring for giving data.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct AgentArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: f64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub agent: AgentArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub wi: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub wj: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub tax: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub di: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub dj: f64,
    /// Also run the brute-force grid maximizer and report the gap.
    #[arg(long)]
    pub grid_check: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Vary {
    Di,
    Dj,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Named parameter set: fig2a, fig2b, fig3a, fig3b or figC1.
    #[arg(long, conflicts_with_all = ["vary", "from", "to", "step"])]
    pub preset: Option<String>,
    /// Trend to sweep: the dictator's (di) or the recipient's (dj).
    #[arg(long, value_enum, requires_all = ["from", "to", "step"])]
    pub vary: Option<Vary>,
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub step: Option<f64>,
    /// With `--vary di`, move the recipient's trend together with the dictator's.
    #[arg(long)]
    pub lock_trends: bool,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub wi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub wj: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tax: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub di: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub dj: Option<f64>,
    /// Write the table to a file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub agent: AgentArgs,
    #[arg(long)]
    pub role: Option<String>,
    #[arg(long)]
    pub treatment: Option<String>,
    /// Restrict giving to the 10-cent choice set.
    #[arg(long)]
    pub discrete: bool,
}

#[derive(Debug, Args)]
pub struct HypothesesArgs {
    #[command(flatten)]
    pub agent: AgentArgs,
    #[arg(long)]
    pub discrete: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 294)]
    pub subjects: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub share_selfish: f64,
    /// Type ratio a/b of social subjects: `2`, `1:0.5,4:0.5` or `log-uniform:0.5:10`.
    #[arg(long, default_value = "2")]
    pub ab: String,
    /// Trend loss weight: `0.8`, `0.2:0.5,0.8:0.5` or `uniform:0:0.9`.
    #[arg(long, default_value = "0.8")]
    pub eta: String,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sd: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    Summary,
    Wilcoxon,
    Cdf,
    Censoring,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Keep only subjects giving at least this much in the stable treatment.
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [TableKind::Summary, TableKind::Wilcoxon, TableKind::Cdf, TableKind::Censoring])]
    pub tables: Vec<TableKind>,
    /// Use only the decisions that were paid out.
    #[arg(long)]
    pub implemented_only: bool,
    /// Also write each table (and one CDF file per cell) as CSV into this directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// A validation failure tied to one command-line flag.
#[derive(Debug)]
struct FlagError {
    flag: String,
    message: String,
}

enum Failure {
    Flag(FlagError),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<FlagError> for Failure {
    fn from(e: FlagError) -> Self {
        Failure::Flag(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::io("<stdout>", e))
    }
}

fn flag_for(name: &str) -> &str {
    match name {
        "w_i" => "wi",
        "w_j" => "wj",
        "d_i" => "di",
        "d_j" => "dj",
        "t_pot" => "tax",
        "social_ab" => "ab",
        "noise_sd" => "noise-sd",
        "share_selfish" => "share-selfish",
        other => other,
    }
}

fn flagged(e: Error) -> Failure {
    match e {
        Error::InvalidParameter { name, reason } => Failure::Flag(FlagError {
            flag: flag_for(name).to_owned(),
            message: reason,
        }),
        Error::DegenerateTax(t) => Failure::Flag(FlagError {
            flag: "tax".into(),
            message: format!("must be > 0, got {t}"),
        }),
        Error::UnknownId { kind, value } => Failure::Flag(FlagError {
            flag: kind.into(),
            message: format!("unknown value `{value}`"),
        }),
        other => Failure::Lib(other),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::Schema { .. } | Error::MissingColumn { .. } | Error::MissingStable { .. } | Error::Empty(_) => {
            EXIT_DATA
        }
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return e.exit_code();
        }
    };
    match dispatch(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(Failure::Flag(f)) => {
            let _ = writeln!(err, "error: invalid value for --{}: {}", f.flag, f.message);
            EXIT_USAGE
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Solve(args) => cmd_solve(args, cli.format, out, err),
        Command::Sweep(args) => cmd_sweep(args, cli.format, out),
        Command::Predict(args) => cmd_predict(args, cli.format, out),
        Command::Hypotheses(args) => cmd_hypotheses(args, cli.format, out),
        Command::Simulate(args) => cmd_simulate(args, out),
        Command::Analyze(args) => cmd_analyze(args, cli.format, out),
    }
}

fn agent_from(args: &AgentArgs) -> Result<AgentParams, Failure> {
    AgentParams::new(args.a, args.b, args.eta).map_err(flagged)
}

/// Rows of labelled text values, printed aligned or as CSV.
struct Report {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Report {
    fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    fn write(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "{}", self.columns.join(","))?;
                for r in &self.rows {
                    writeln!(out, "{}", r.join(","))?;
                }
            }
            Format::Text => {
                let widths: Vec<usize> = (0..self.columns.len())
                    .map(|i| self.rows.iter().map(|r| r[i].len()).chain([self.columns[i].len()]).max().unwrap())
                    .collect();
                let line = |cells: Vec<&str>| {
                    cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:<w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                        .trim_end()
                        .to_owned()
                };
                writeln!(out, "{}", line(self.columns.clone()))?;
                for r in &self.rows {
                    writeln!(out, "{}", line(r.iter().map(String::as_str).collect()))?;
                }
            }
        }
        Ok(())
    }

    fn save(&self, path: &Path) -> Result<(), Failure> {
        let mut buf = Vec::new();
        self.write(Format::Csv, &mut buf)?;
        fs::write(path, buf).map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn cmd_solve(args: &SolveArgs, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let agent = agent_from(&args.agent)?;
    let econ = EconomyState::new(args.wi, args.wj, args.di, args.dj, args.tax).map_err(flagged)?;
    if econ.trend_exceeds_income() {
        writeln!(err, "warning: a wage trend is larger than the wages that generated it")?;
    }
    let r = solve(&agent, &econ);
    let mut report = Report::new(vec!["quantity", "value"]);
    let mut add = |k: &str, v: String| report.rows.push(vec![k.to_owned(), v]);
    add("s_star", num(r.s_star));
    add("region", r.region.to_string());
    add("giving", num(r.giving));
    add("s_unclamped", num(r.s_unclamped));
    add("threshold_h", num(r.thresholds.h));
    add("threshold_u", num(r.thresholds.u_bound));
    add("threshold_l", num(r.thresholds.l_bound));
    if args.grid_check {
        let g = grid_argmax(&agent, &econ, GridSpec::default());
        add("grid_s", num(g.s_best));
        add("grid_gap", format!("{:.3e}", (g.s_best - r.s_star).abs()));
    }
    report.write(format, out)?;
    Ok(())
}

fn require(v: Option<f64>, flag: &str) -> Result<f64, FlagError> {
    v.ok_or_else(|| FlagError {
        flag: flag.to_owned(),
        message: "required with --vary".into(),
    })
}

fn cmd_sweep(args: &SweepArgs, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let table = match (&args.preset, args.vary) {
        (Some(name), _) => preset_table(name.parse::<Preset>().map_err(flagged)?),
        (None, Some(vary)) => {
            let agent = AgentParams::new(require(args.a, "a")?, require(args.b, "b")?, require(args.eta, "eta")?)
                .map_err(flagged)?;
            let econ = EconomyState::new(
                require(args.wi, "wi")?,
                require(args.wj, "wj")?,
                args.di.unwrap_or(0.0),
                args.dj.unwrap_or(0.0),
                require(args.tax, "tax")?,
            )
            .map_err(flagged)?;
            let xs = linspace_step(require(args.from, "from")?, require(args.to, "to")?, require(args.step, "step")?)
                .map_err(flagged)?;
            let points = match vary {
                Vary::Di => {
                    let link = if args.lock_trends { TrendLink::Locked } else { TrendLink::OtherFixed };
                    sweep_own_trend(&agent, &econ, &xs, link)
                }
                Vary::Dj => sweep_other_trend(&agent, &econ, &xs),
            };
            sweep_table(&points)
        }
        (None, None) => {
            return Err(FlagError {
                flag: "preset".into(),
                message: "give either --preset or --vary with --from/--to/--step".into(),
            }
            .into())
        }
    };
    write_table(&table, format, args.out.as_deref(), out)
}

fn write_table(table: &Table, format: Format, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => table.write_csv(&mut buf)?,
        Format::Text => table.write_text(&mut buf)?,
    }
    match path {
        Some(p) => fs::write(p, buf).map_err(|e| Error::io(p, e))?,
        None => out.write_all(&buf)?,
    }
    Ok(())
}

fn parse_opt<T: std::str::FromStr<Err = Error>>(v: &Option<String>) -> Result<Option<T>, Failure> {
    v.as_deref().map(str::parse).transpose().map_err(flagged)
}

fn mode(discrete: bool) -> PredictionMode {
    if discrete {
        PredictionMode::Discrete
    } else {
        PredictionMode::Continuous
    }
}

fn cmd_predict(args: &PredictArgs, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let agent = agent_from(&args.agent)?;
    let role: Option<Role> = parse_opt(&args.role)?;
    let treatment: Option<Treatment> = parse_opt(&args.treatment)?;
    let mut report = Report::new(vec!["role", "treatment", "s_star", "giving", "region"]);
    for r in Role::ALL.into_iter().filter(|r| role.is_none_or(|x| x == *r)) {
        for t in Treatment::ALL.into_iter().filter(|t| treatment.is_none_or(|x| x == *t)) {
            let p = predict(&agent, t, r, mode(args.discrete));
            report.rows.push(vec![
                r.to_string(),
                t.to_string(),
                num(p.s_star),
                format!("{:.2}", p.giving),
                p.region.to_string(),
            ]);
        }
    }
    report.write(format, out)?;
    Ok(())
}

fn cmd_hypotheses(args: &HypothesesArgs, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let agent = agent_from(&args.agent)?;
    let report = evaluate_hypotheses(&agent, mode(args.discrete));
    let mut giving = Report::new(vec!["role", "treatment", "giving", "region"]);
    for p in &report.predictions {
        giving.rows.push(vec![
            p.role.to_string(),
            p.treatment.to_string(),
            format!("{:.6}", p.giving),
            p.region.to_string(),
        ]);
    }
    giving.write(format, out)?;
    writeln!(out)?;
    let mut verdicts = Report::new(vec!["hypothesis", "role", "less", "more", "verdict"]);
    for v in &report.verdicts {
        let names = |ts: &[Treatment]| ts.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(" ");
        verdicts.rows.push(vec![
            v.hypothesis.label.to_owned(),
            v.hypothesis.role.to_string(),
            names(v.hypothesis.less),
            names(v.hypothesis.more),
            v.verdict.to_string(),
        ]);
    }
    verdicts.write(format, out)?;
    for note in &report.notes {
        writeln!(out, "note: {note}")?;
    }
    Ok(())
}

fn seed_override(flag_seed: u64) -> Result<u64, FlagError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| FlagError {
            flag: "seed".into(),
            message: format!("{SEED_ENV}=`{v}` is not an unsigned integer"),
        }),
        Err(_) => Ok(flag_seed),
    }
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let parse_dist = |s: &str, flag: &str| {
        s.parse::<ParamDistribution>().map_err(|e| FlagError {
            flag: flag.to_owned(),
            message: e.to_string(),
        })
    };
    let config = PopulationConfig {
        n_subjects: args.subjects,
        share_selfish: args.share_selfish,
        social_ab: parse_dist(&args.ab, "ab")?,
        eta: parse_dist(&args.eta, "eta")?,
        decision_noise_sd: args.noise_sd,
    };
    if let Err(Error::OddPopulation(n)) = config.validate() {
        return Err(FlagError {
            flag: "subjects".into(),
            message: format!("must be even and at least 2, got {n}"),
        }
        .into());
    }
    config.validate().map_err(flagged)?;
    let seed = seed_override(args.seed)?;
    let records = simulate(&config, seed)?;
    export_csv(&records, &args.out)?;
    writeln!(out, "wrote {} records to {}", records.len(), args.out.display())?;
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let mut data = load_csv(&args.input)?;
    if args.implemented_only {
        data = data.implemented_only();
    }
    if let Some(cutoff) = args.cutoff {
        data = filter_social(&data, SocialFilter::new(cutoff).map_err(flagged)?)?;
    }
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let save = |report: &Report, name: &str| -> Result<(), Failure> {
        match &args.out_dir {
            Some(dir) => report.save(&dir.join(name)),
            None => Ok(()),
        }
    };

    let mut first = true;
    let mut section = |title: &str, out: &mut dyn Write| -> io::Result<()> {
        if !first {
            writeln!(out)?;
        }
        first = false;
        if format == Format::Text {
            writeln!(out, "== {title} ==")?;
        }
        Ok(())
    };

    for kind in &args.tables {
        match kind {
            TableKind::Summary => {
                let report = summary_report(&data)?;
                section("summary", out)?;
                report.write(format, out)?;
                save(&report, "summary.csv")?;
            }
            TableKind::Wilcoxon => {
                let mut report = Report::new(vec![
                    "group",
                    "decreasing",
                    "baseline",
                    "n_pairs",
                    "n_effective",
                    "w_plus",
                    "p_value",
                    "method",
                ]);
                for t in decrease_tests(&data, WilcoxonOptions::default()) {
                    let (x, _) = crate::analysis::paired_samples(&data, &t.comparison);
                    report.rows.push(vec![
                        t.comparison.group.as_str().to_owned(),
                        t.comparison.decreasing.label.to_owned(),
                        t.comparison.baseline.label.to_owned(),
                        x.len().to_string(),
                        t.result.n_effective.to_string(),
                        format!("{}", t.result.w_plus),
                        format!("{:.4}", t.result.p_value),
                        t.result.method.as_str().to_owned(),
                    ]);
                }
                section("wilcoxon signed-rank", out)?;
                report.write(format, out)?;
                save(&report, "wilcoxon.csv")?;
            }
            TableKind::Censoring => {
                let rate = censoring_rate(&data)?;
                let mut report = Report::new(vec!["decisions", "censoring_rate"]);
                report.rows.push(vec![data.len().to_string(), format!("{rate:.4}")]);
                section("censoring", out)?;
                report.write(format, out)?;
                save(&report, "censoring.csv")?;
            }
            TableKind::Cdf => {
                let mut long = Report::new(vec!["treatment", "role", "giving", "cumulative"]);
                for role in Role::ALL {
                    for treatment in SUMMARY_ORDER {
                        let Ok(points) = cdf_points(&data, treatment, role) else {
                            continue;
                        };
                        let mut cell = Report::new(vec!["giving", "cumulative"]);
                        for (g, f) in points {
                            let (g, f) = (format!("{g:.2}"), format!("{f:.6}"));
                            long.rows.push(vec![treatment.to_string(), role.to_string(), g.clone(), f.clone()]);
                            cell.rows.push(vec![g, f]);
                        }
                        save(&cell, &format!("cdf_{treatment}_{role}.csv"))?;
                    }
                }
                section("cdf", out)?;
                long.write(format, out)?;
            }
        }
    }
    Ok(())
}

fn summary_report(data: &Dataset) -> Result<Report, Failure> {
    let s = summary_by_treatment(data)?;
    let mut report = Report::new(vec!["treatment", "role", "mean", "sd", "n"]);
    for c in &s.cells {
        report.rows.push(vec![
            c.treatment.to_string(),
            c.role.to_string(),
            format!("{:.4}", c.mean),
            format!("{:.4}", c.sd),
            c.n.to_string(),
        ]);
    }
    for (role, m) in &s.by_role {
        report.rows.push(vec![
            "all".into(),
            role.to_string(),
            format!("{:.4}", m.mean),
            format!("{:.4}", m.sd),
            m.n.to_string(),
        ]);
    }
    report.rows.push(vec![
        "all".into(),
        "all".into(),
        format!("{:.4}", s.overall.mean),
        format!("{:.4}", s.overall.sd),
        s.overall.n.to_string(),
    ]);
    Ok(report)
}
