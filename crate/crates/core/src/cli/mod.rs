//! Command-line driver: configuration, computations and table output.
//!
//! A run is described by a [`RunConfig`], assembled from defaults, an
//! optional `key = value` file and command-line flags, in that order of
//! precedence. Every command produces a [`Table`], written as CSV (with `#`
//! metadata lines echoing the full configuration, then a header row) or as
//! JSON lines. Exit status is 0 on success, 1 when a computation fails or a
//! validation check does not pass, and 2 for usage errors.

pub mod validation;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{pfa_energy, PfaEnergy};
use crate::energy::{
    c_perp, c_theta, classical_coefficient, energy_per_length, thermal_energy, EnergyResult,
    QuadratureSpec,
};
use crate::roundtrip::Channel;
use crate::scattering::Geometry;
use crate::{Error, Result};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "PARABOLIC_CASIMIR_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Energy per unit length for one geometry.
    Energy,
    /// Knife-edge constant C_perp.
    Cperp,
    /// c(theta) = cos(theta) C(theta) over a range of tilts.
    CthetaSweep,
    /// H^2 E and the PFA ratio over a range of H/R.
    HSweep,
    /// Finite-temperature energy; an infinite temperature gives the classical coefficient.
    Thermal,
    /// Exact energy against the proximity force approximation.
    Pfa,
    /// Oracle and identity checks.
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

fn value_name<T: ValueEnum>(value: &T) -> String {
    value
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_owned()
}

fn parse_value_enum<T: ValueEnum>(text: &str) -> Result<T> {
    T::from_str(text, true).map_err(Error::Config)
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&value_name(self))
    }
}

/// Everything that determines a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    /// Tip radius `R`.
    pub radius: f64,
    /// Tip-to-plane distance `H`.
    pub separation: f64,
    /// Tilt of the axis from the plane normal, degrees.
    pub angle_deg: f64,
    pub numax: usize,
    pub quad_nodes: usize,
    pub qmax_scaled: f64,
    pub qmin_scaled: f64,
    pub tolerance: f64,
    pub channel: Channel,
    /// Sweep start: degrees for `ctheta-sweep`, `H/R` for `h-sweep`.
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: Option<usize>,
    /// `T H` in natural units; `inf` selects the classical limit.
    pub temperature: Option<f64>,
    pub format: OutputFormat,
    /// Output file; standard output when absent.
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let spec = QuadratureSpec::default();
        RunConfig {
            command: Command::Energy,
            radius: 1.0,
            separation: 1.0,
            angle_deg: 0.0,
            numax: 100,
            quad_nodes: spec.node_count,
            qmax_scaled: spec.qmax_scaled,
            qmin_scaled: spec.qmin_scaled,
            tolerance: spec.tolerance,
            channel: Channel::Full,
            from: None,
            to: None,
            steps: None,
            temperature: None,
            format: OutputFormat::Csv,
            output: None,
        }
    }
}

fn parse_number<T: FromStr>(key: &str, text: &str) -> Result<T> {
    text.parse()
        .map_err(|_| Error::Config(format!("invalid value '{text}' for '{key}'")))
}

impl RunConfig {
    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            node_count: self.quad_nodes,
            qmax_scaled: self.qmax_scaled,
            qmin_scaled: self.qmin_scaled,
            tolerance: self.tolerance,
            ..QuadratureSpec::default()
        }
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(self.radius, self.separation, self.angle_deg.to_radians())
    }

    /// `(key, value)` pairs in a fixed order; absent optional fields are
    /// omitted.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("command", self.command.to_string()),
            ("radius", self.radius.to_string()),
            ("separation", self.separation.to_string()),
            ("angle_deg", self.angle_deg.to_string()),
            ("numax", self.numax.to_string()),
            ("quad_nodes", self.quad_nodes.to_string()),
            ("qmax_scaled", self.qmax_scaled.to_string()),
            ("qmin_scaled", self.qmin_scaled.to_string()),
            ("tolerance", self.tolerance.to_string()),
            ("channel", self.channel.to_string()),
        ];
        if let Some(v) = self.from {
            out.push(("from", v.to_string()));
        }
        if let Some(v) = self.to {
            out.push(("to", v.to_string()));
        }
        if let Some(v) = self.steps {
            out.push(("steps", v.to_string()));
        }
        if let Some(v) = self.temperature {
            out.push(("temperature", v.to_string()));
        }
        out.push(("format", value_name(&self.format)));
        if let Some(p) = &self.output {
            out.push(("output", p.display().to_string()));
        }
        out
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "command" => self.command = parse_value_enum(value)?,
            "radius" => self.radius = parse_number(key, value)?,
            "separation" => self.separation = parse_number(key, value)?,
            "angle_deg" => self.angle_deg = parse_number(key, value)?,
            "numax" => self.numax = parse_number(key, value)?,
            "quad_nodes" => self.quad_nodes = parse_number(key, value)?,
            "qmax_scaled" => self.qmax_scaled = parse_number(key, value)?,
            "qmin_scaled" => self.qmin_scaled = parse_number(key, value)?,
            "tolerance" => self.tolerance = parse_number(key, value)?,
            "channel" => self.channel = value.parse()?,
            "from" => self.from = Some(parse_number(key, value)?),
            "to" => self.to = Some(parse_number(key, value)?),
            "steps" => self.steps = Some(parse_number(key, value)?),
            "temperature" => self.temperature = Some(parse_number(key, value)?),
            "format" => self.format = parse_value_enum(value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            other => {
                return Err(Error::Config(format!(
                    "unknown configuration key '{other}'"
                )))
            }
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    /// Returns the keys that were set.
    pub fn apply_key_values(&mut self, text: &str) -> Result<Vec<String>> {
        let mut keys = Vec::new();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", number + 1))
            })?;
            self.set(key.trim(), value.trim())?;
            keys.push(key.trim().to_owned());
        }
        Ok(keys)
    }

    pub fn from_key_values(text: &str) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        config.apply_key_values(text)?;
        Ok(config)
    }

    pub fn to_key_values(&self) -> String {
        self.entries()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// Flags of the command-line interface; each overrides the configuration file.
#[derive(Debug, Parser)]
#[command(
    name = "parabolic-casimir",
    version,
    about = "Casimir energy of a parabolic cylinder above a plane",
    allow_negative_numbers = true
)]
struct Cli {
    /// Computation to run; may instead be given as `command` in the configuration file.
    #[arg(value_enum)]
    command: Option<Command>,
    /// File of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    separation: Option<f64>,
    /// Tilt in degrees.
    #[arg(long = "angle", alias = "angle-deg")]
    angle_deg: Option<f64>,
    #[arg(long)]
    numax: Option<usize>,
    #[arg(long)]
    quad_nodes: Option<usize>,
    #[arg(long)]
    qmax_scaled: Option<f64>,
    #[arg(long)]
    qmin_scaled: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// em, dirichlet or neumann.
    #[arg(long)]
    channel: Option<Channel>,
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// T H in natural units, or `inf`.
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long)]
    output: Option<PathBuf>,
}

impl Cli {
    fn into_config(self) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        let mut file_sets_command = false;
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            file_sets_command = config
                .apply_key_values(&text)?
                .iter()
                .any(|k| k == "command");
        }
        match self.command {
            Some(c) => config.command = c,
            None if file_sets_command => {}
            None => return Err(Error::Config("no command given".into())),
        }
        macro_rules! overlay {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { config.$field = v; })*
            };
        }
        overlay!(
            radius,
            separation,
            angle_deg,
            numax,
            quad_nodes,
            qmax_scaled,
            qmin_scaled,
            tolerance,
            channel,
            format
        );
        config.from = self.from.or(config.from);
        config.to = self.to.or(config.to);
        config.steps = self.steps.or(config.steps);
        config.temperature = self.temperature.or(config.temperature);
        config.output = self.output.or(config.output);
        Ok(config)
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // shortest round-trip form, exponent notation for large and small magnitudes
            Cell::Num(v) => write!(f, "{v:?}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl Cell {
    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) if v.is_finite() => serde_json::json!(v),
            Cell::Num(v) => serde_json::Value::String(v.to_string()),
            Cell::Int(v) => serde_json::json!(v),
            Cell::Text(s) => serde_json::Value::String(s.clone()),
            Cell::Bool(b) => serde_json::Value::Bool(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// Result of a command: named columns and rows in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Set when a check in the table did not pass.
    pub failed: bool,
}

impl Table {
    fn new(columns: &[&'static str]) -> Table {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
            failed: false,
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }
}

fn series_text(result: &EnergyResult) -> String {
    result
        .series
        .iter()
        .map(|(n, v)| format!("{n}:{v}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn result_cells(result: &EnergyResult) -> Vec<Cell> {
    vec![
        result.value.into(),
        result.extrapolated.into(),
        result.trunc_error.into(),
        result.quad_error.into(),
        series_text(result).into(),
    ]
}

const RESULT_COLUMNS: [&str; 5] = [
    "value",
    "extrapolated",
    "trunc_error",
    "quad_error",
    "series",
];

fn with_results(prefix: &[&'static str]) -> Vec<&'static str> {
    prefix
        .iter()
        .chain(RESULT_COLUMNS.iter())
        .copied()
        .collect()
}

/// Evenly spaced points, geometric when `geometric` is set.
fn sweep(from: f64, to: f64, steps: usize, geometric: bool) -> Result<Vec<f64>> {
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        return Err(Error::Config(format!(
            "invalid sweep {from} .. {to} in {steps} steps"
        )));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    if geometric && !(from > 0.0 && to > 0.0) {
        return Err(Error::Config(
            "geometric sweep needs positive bounds".into(),
        ));
    }
    Ok((0..steps)
        .map(|i| {
            let f = i as f64 / (steps - 1) as f64;
            if geometric {
                from * (to / from).powf(f)
            } else {
                from + (to - from) * f
            }
        })
        .collect())
}

/// PFA energy of one channel; each polarisation carries half.
fn channel_pfa(separation: f64, radius: f64, channel: Channel) -> Result<PfaEnergy> {
    let mut pfa = pfa_energy(separation, radius)?;
    if channel != Channel::Full {
        pfa.value *= 0.5;
    }
    Ok(pfa)
}

/// Runs the computation described by `config`.
pub fn run(config: &RunConfig) -> Result<Table> {
    let spec = config.quadrature();
    let channel = config.channel;
    match config.command {
        Command::Energy => {
            let geom = config.geometry()?;
            let result = energy_per_length(&geom, &spec, config.numax, channel)?;
            let mut table = Table::new(&with_results(&[
                "radius",
                "separation",
                "angle_deg",
                "channel",
                "numax",
            ]));
            let mut row: Vec<Cell> = vec![
                geom.radius.into(),
                geom.separation.into(),
                config.angle_deg.into(),
                channel.name().into(),
                config.numax.into(),
            ];
            row.extend(result_cells(&result));
            table.push(row);
            Ok(table)
        }
        Command::Cperp => {
            let result = c_perp(config.numax, &spec, channel)?;
            let mut table = Table::new(&with_results(&["channel", "numax"]));
            let mut row: Vec<Cell> = vec![channel.name().into(), config.numax.into()];
            row.extend(result_cells(&result));
            table.push(row);
            Ok(table)
        }
        Command::CthetaSweep => {
            let degrees = sweep(
                config.from.unwrap_or(0.0),
                config.to.unwrap_or(88.0),
                config.steps.unwrap_or(12),
                false,
            )?;
            let results: Vec<_> = degrees
                .par_iter()
                .map(|&d| c_theta(d.to_radians(), config.numax, &spec))
                .collect::<Result<_>>()?;
            let mut table =
                Table::new(&with_results(&["theta_deg", "channel", "numax", "warning"]));
            for (deg, r) in degrees.iter().zip(&results) {
                let mut row: Vec<Cell> = vec![
                    (*deg).into(),
                    channel.name().into(),
                    r.nu_max.max(config.numax).into(),
                    r.warning.clone().unwrap_or_default().into(),
                ];
                row.extend(result_cells(r.get(channel)));
                table.push(row);
            }
            Ok(table)
        }
        Command::HSweep => {
            if !(config.radius > 0.0) {
                return Err(Error::Config("h-sweep needs radius > 0".into()));
            }
            let ratios = sweep(
                config.from.unwrap_or(0.25),
                config.to.unwrap_or(4.0),
                config.steps.unwrap_or(9),
                true,
            )?;
            let rows: Vec<_> = ratios
                .par_iter()
                .map(|&ratio| -> Result<Vec<Cell>> {
                    let h = ratio * config.radius;
                    let geom = Geometry::new(config.radius, h, config.angle_deg.to_radians())?;
                    let r = energy_per_length(&geom, &spec, config.numax, channel)?.scaled(h * h);
                    let pfa = channel_pfa(h, config.radius, channel)?.value * h * h;
                    Ok(vec![
                        ratio.into(),
                        r.value.into(),
                        r.extrapolated.into(),
                        r.total_error().into(),
                        (r.extrapolated / pfa).into(),
                        (r.total_error() / pfa.abs()).into(),
                    ])
                })
                .collect::<Result<_>>()?;
            let mut table = Table::new(&[
                "h_over_r",
                "energy_h2",
                "energy_h2_extrapolated",
                "energy_h2_error",
                "pfa_ratio",
                "pfa_ratio_error",
            ]);
            rows.into_iter().for_each(|r| table.push(r));
            Ok(table)
        }
        Command::Thermal => {
            let t = config
                .temperature
                .ok_or_else(|| Error::Config("thermal needs --temperature".into()))?;
            let geom = config.geometry()?;
            let (quantity, result) = if t.is_infinite() && t > 0.0 {
                (
                    "classical_coefficient",
                    classical_coefficient(&geom, config.numax, &spec, channel)?,
                )
            } else {
                (
                    "energy",
                    thermal_energy(&geom, t, config.numax, &spec, channel)?,
                )
            };
            let mut table = Table::new(&with_results(&[
                "quantity",
                "temperature",
                "channel",
                "numax",
            ]));
            let mut row: Vec<Cell> = vec![
                quantity.into(),
                t.into(),
                channel.name().into(),
                config.numax.into(),
            ];
            row.extend(result_cells(&result));
            table.push(row);
            Ok(table)
        }
        Command::Pfa => {
            let geom = config.geometry()?;
            let pfa = channel_pfa(geom.separation, geom.radius, channel)?;
            let exact = energy_per_length(&geom, &spec, config.numax, channel)?;
            let ratio = if pfa.vanishes {
                f64::NAN
            } else {
                exact.extrapolated / pfa.value
            };
            let mut table = Table::new(&[
                "radius",
                "separation",
                "channel",
                "energy",
                "energy_error",
                "pfa_energy",
                "pfa_vanishes",
                "ratio",
                "ratio_error",
            ]);
            table.push(vec![
                geom.radius.into(),
                geom.separation.into(),
                channel.name().into(),
                exact.extrapolated.into(),
                exact.total_error().into(),
                pfa.value.into(),
                pfa.vanishes.into(),
                ratio.into(),
                if pfa.vanishes {
                    f64::NAN
                } else {
                    exact.total_error() / pfa.value.abs()
                }
                .into(),
            ]);
            Ok(table)
        }
        Command::Validate => {
            let checks = validation::identity_suite(0x5eed);
            let mut table = Table::new(&["check", "passed", "measured", "tolerance", "detail"]);
            for c in &checks {
                table.failed |= !c.passed;
                table.push(vec![
                    c.name.into(),
                    c.passed.into(),
                    c.measured.into(),
                    c.tolerance.into(),
                    c.detail.clone().into(),
                ]);
            }
            Ok(table)
        }
    }
}

/// Writes `table` in the configured format.
pub fn write_table<W: Write>(config: &RunConfig, table: &Table, mut out: W) -> Result<()> {
    match config.format {
        OutputFormat::Csv => {
            writeln!(
                out,
                "# {} {}",
                env!("CARGO_PKG_NAME"),
                env!("CARGO_PKG_VERSION")
            )?;
            for (key, value) in config.entries() {
                writeln!(out, "# {key} = {value}")?;
            }
            let mut writer = csv::Writer::from_writer(out);
            writer.write_record(&table.columns)?;
            for row in &table.rows {
                writer.write_record(row.iter().map(Cell::to_string))?;
            }
            writer.flush()?;
        }
        OutputFormat::Json => {
            for row in &table.rows {
                let object: serde_json::Map<String, serde_json::Value> = table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| ((*c).to_owned(), v.to_json()))
                    .collect();
                serde_json::to_writer(&mut out, &object)?;
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

fn diagnostic(error: &Error) -> Table {
    let mut table = Table::new(&["status", "kind", "message"]);
    table.push(vec![
        "error".into(),
        error.kind().into(),
        error.to_string().into(),
    ]);
    table.failed = true;
    table
}

fn emit(config: &RunConfig, table: &Table) -> Result<()> {
    match &config.output {
        Some(path) => write_table(config, table, io::BufWriter::new(fs::File::create(path)?)),
        None => write_table(config, table, io::stdout().lock()),
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(text) = std::env::var(THREADS_ENV) {
        let threads: usize = parse_number(THREADS_ENV, text.trim())?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let config = match cli
        .into_config()
        .and_then(|c| configure_threads().map(|()| c))
    {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let outcome = run(&config);
    let table = match &outcome {
        Ok(table) => table.clone(),
        Err(e) => {
            eprintln!("error ({}): {e}", e.kind());
            diagnostic(e)
        }
    };
    if let Err(e) = emit(&config, &table) {
        eprintln!("error writing output: {e}");
        return 1;
    }
    i32::from(table.failed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.numax, 100);
        assert_eq!(c.channel, Channel::Full);
        assert_eq!(c.channel.to_string(), "em");
    }

    #[test]
    fn key_values_round_trip() {
        let mut c = RunConfig {
            command: Command::CthetaSweep,
            radius: 0.0,
            angle_deg: 85.5,
            channel: Channel::Neumann,
            from: Some(-10.0),
            steps: Some(7),
            temperature: Some(f64::INFINITY),
            format: OutputFormat::Json,
            output: Some(PathBuf::from("out dir/c.json")),
            ..RunConfig::default()
        };
        let text = c.to_key_values();
        assert_eq!(RunConfig::from_key_values(&text).unwrap(), c);
        c.tolerance = 1.0 / 3.0;
        assert_eq!(RunConfig::from_key_values(&c.to_key_values()).unwrap(), c);
        let json = serde_json::to_string(&RunConfig::default()).unwrap();
        assert_eq!(
            serde_json::from_str::<RunConfig>(&json).unwrap(),
            RunConfig::default()
        );
    }

    #[test]
    fn config_errors() {
        assert!(matches!(
            RunConfig::from_key_values("numax = ten"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::from_key_values("colour = red"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::from_key_values("numax 10"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::from_key_values("channel = tm"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(
            &path,
            "# knife edge\ncommand = cperp\nnumax = 20\nchannel = dirichlet\n",
        )
        .unwrap();
        let cli = Cli::try_parse_from(["x", "--config", path.to_str().unwrap(), "--numax", "30"])
            .unwrap();
        let config = cli.into_config().unwrap();
        assert_eq!(
            (config.command, config.numax, config.channel),
            (Command::Cperp, 30, Channel::Dirichlet)
        );
        assert!(Cli::try_parse_from(["x"]).unwrap().into_config().is_err());
    }

    #[test]
    fn usage_errors_exit_with_two() {
        assert_eq!(main_with_args(["x", "energy", "--numax", "many"]), 2);
        assert_eq!(main_with_args(["x", "nonsense"]), 2);
        assert_eq!(main_with_args(["x", "energy", "--channel", "tm"]), 2);
    }

    #[test]
    fn failures_exit_with_one_and_a_diagnostic() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("bad.json");
        let status = main_with_args([
            "x",
            "energy",
            "--separation",
            "-1",
            "--format",
            "json",
            "--output",
            out.to_str().unwrap(),
        ]);
        assert_eq!(status, 1);
        let line = fs::read_to_string(&out).unwrap();
        let value: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(value["kind"], "domain");
    }

    #[test]
    fn cperp_csv_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("c.csv");
        let run_once = || {
            let status = main_with_args([
                "x",
                "cperp",
                "--numax",
                "16",
                "--output",
                out.to_str().unwrap(),
            ]);
            assert_eq!(status, 0);
            fs::read(&out).unwrap()
        };
        let first = run_once();
        assert_eq!(first, run_once());
        let text = String::from_utf8(first).unwrap();
        assert!(text.starts_with("# parabolic-casimir"));
        assert!(text.contains("# command = cperp"));
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        assert_eq!(
            lines.next().unwrap(),
            "channel,numax,value,extrapolated,trunc_error,quad_error,series"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        let value: f64 = row[3].parse().unwrap();
        assert!((value - 0.0067415).abs() < 2e-4, "{value}");
    }

    #[test]
    fn sweeps() {
        assert_eq!(sweep(0.0, 10.0, 3, false).unwrap(), vec![0.0, 5.0, 10.0]);
        let g = sweep(0.25, 4.0, 3, true).unwrap();
        assert!((g[1] - 1.0).abs() < 1e-15);
        assert!(sweep(0.0, 1.0, 0, false).is_err());
        assert!(sweep(0.0, 1.0, 3, true).is_err());
    }
}
