//! Scenario runner behind the `hmjacobi` binary.
//!
//! A scenario comes from long flags, optionally layered over a config file of
//! `key = value` lines. Every command produces one JSON object with a top-level
//! `"pass"` and the tolerance table; `spectrum` can also emit CSV.

use crate::catalog;
use crate::error::{Error, Result};
use crate::jacobi;
use crate::maps;
use crate::rigidity::{self, SkewGenerator};
use crate::spectral;
use crate::tolerances;
use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyTheorem,
    Spectrum,
    Corollary,
    Energy,
    Rigidity,
    TothCheck,
    ListExamples,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Parser, Debug, Default)]
#[command(name = "hmjacobi", version, about = "Jacobi operators along harmonic maps and harmonic morphisms")]
pub struct Cli {
    /// Scenario to run (may also come from the config file)
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Config file of `key = value` lines; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Inner map (harmonic morphism) for verify-theorem and corollary
    #[arg(long)]
    pub phi: Option<String>,
    /// Outer map for verify-theorem and corollary
    #[arg(long)]
    pub psi: Option<String>,
    /// Map for spectrum and energy
    #[arg(long)]
    pub map: Option<String>,
    /// Section id
    #[arg(long)]
    pub field: Option<String>,
    /// Grid resolution (points per circle)
    #[arg(long)]
    pub grid: Option<usize>,
    /// Highest Fourier mode of the spectral basis
    #[arg(long)]
    pub mmax: Option<usize>,
    /// Override the command's pass threshold
    #[arg(long)]
    pub tol: Option<f64>,
    /// Comma-separated flow times
    #[arg(long)]
    pub t_samples: Option<String>,
    /// Report path (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Fit a rotation generator (rigidity)
    #[arg(long)]
    pub fit: bool,
    /// Compare with the rotation flow (rigidity)
    #[arg(long)]
    pub local: bool,
    /// Machine-readable catalog listing
    #[arg(long)]
    pub json: bool,
    /// List only harmonic morphisms
    #[arg(long)]
    pub morphisms_only: bool,
    /// Absolute zero tolerance for eigenvalues
    #[arg(long)]
    pub zero_tol: Option<f64>,
    /// Fiber points per base point for projectability
    #[arg(long)]
    pub fiber_samples: Option<usize>,
    /// Expected value: `index,nullity` for spectrum, a number for energy
    #[arg(long)]
    pub expected: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub command: Command,
    pub phi: Option<String>,
    pub psi: Option<String>,
    pub map: Option<String>,
    pub field: Option<String>,
    pub grid: usize,
    pub m_max: usize,
    pub tol: Option<f64>,
    pub t_samples: Vec<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub fit: bool,
    pub local: bool,
    pub json: bool,
    pub morphisms_only: bool,
    pub zero_tol: Option<f64>,
    pub fiber_samples: usize,
    pub expected: Option<String>,
}

/// One `key = value` entry with its source position.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigEntry {
    pub value: String,
    pub line: usize,
    pub column: usize,
}

const CONFIG_KEYS: &[&str] = &[
    "command",
    "phi",
    "psi",
    "map",
    "field",
    "grid",
    "mmax",
    "tol",
    "t_samples",
    "out",
    "format",
    "fit",
    "local",
    "json",
    "morphisms_only",
    "zero_tol",
    "fiber_samples",
    "expected",
];

pub fn parse_config(text: &str) -> Result<BTreeMap<String, ConfigEntry>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let eq = content.find('=').ok_or_else(|| Error::ConfigParse {
            line,
            column: indent + 1,
            message: "expected `key = value`".into(),
        })?;
        let key = content[..eq].trim().replace('-', "_");
        if key.is_empty() || !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::ConfigParse {
                line,
                column: indent + 1,
                message: format!("unknown key `{}`", content[..eq].trim()),
            });
        }
        let after = &content[eq + 1..];
        let value = after.trim();
        let column = eq + 2 + (after.len() - after.trim_start().len());
        if value.is_empty() {
            return Err(Error::ConfigParse {
                line,
                column,
                message: format!("missing value for `{key}`"),
            });
        }
        out.insert(
            key,
            ConfigEntry {
                value: value.to_string(),
                line,
                column,
            },
        );
    }
    Ok(out)
}

fn parse_entry<T: std::str::FromStr>(key: &str, e: &ConfigEntry) -> Result<T> {
    e.value.parse().map_err(|_| Error::ConfigParse {
        line: e.line,
        column: e.column,
        message: format!("invalid value `{}` for `{key}`", e.value),
    })
}

fn parse_bool(key: &str, e: &ConfigEntry) -> Result<bool> {
    match e.value.as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::ConfigParse {
            line: e.line,
            column: e.column,
            message: format!("invalid boolean `{}` for `{key}`", e.value),
        }),
    }
}

pub fn parse_t_samples(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|t| t.is_finite())
                .ok_or_else(|| Error::InvalidArgument(format!("invalid flow time `{}`", p.trim())))
        })
        .collect()
}

impl Scenario {
    /// Merges flags over the optional config file and validates the result.
    pub fn from_cli(cli: &Cli) -> Result<Scenario> {
        let file = match &cli.config {
            Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
            None => BTreeMap::new(),
        };
        let get = |k: &str| file.get(k);
        let command = match cli.command {
            Some(c) => c,
            None => match get("command") {
                Some(e) => Command::from_str(&e.value, true).map_err(|_| Error::ConfigParse {
                    line: e.line,
                    column: e.column,
                    message: format!("unknown command `{}`", e.value),
                })?,
                None => return Err(Error::InvalidArgument("no command given".into())),
            },
        };
        let string = |flag: &Option<String>, k: &str| flag.clone().or_else(|| get(k).map(|e| e.value.clone()));
        let grid = match (cli.grid, get("grid")) {
            (Some(g), _) => g,
            (None, Some(e)) => parse_entry("grid", e)?,
            (None, None) => 32,
        };
        let m_max = match (cli.mmax, get("mmax")) {
            (Some(m), _) => m,
            (None, Some(e)) => parse_entry("mmax", e)?,
            (None, None) => 8,
        };
        let tol = match (cli.tol, get("tol")) {
            (Some(t), _) => Some(t),
            (None, Some(e)) => Some(parse_entry("tol", e)?),
            (None, None) => None,
        };
        let zero_tol = match (cli.zero_tol, get("zero_tol")) {
            (Some(t), _) => Some(t),
            (None, Some(e)) => Some(parse_entry("zero_tol", e)?),
            (None, None) => None,
        };
        let fiber_samples = match (cli.fiber_samples, get("fiber_samples")) {
            (Some(n), _) => n,
            (None, Some(e)) => parse_entry("fiber_samples", e)?,
            (None, None) => 20,
        };
        let t_samples = match (&cli.t_samples, get("t_samples")) {
            (Some(s), _) => parse_t_samples(s)?,
            (None, Some(e)) => parse_t_samples(&e.value).map_err(|err| Error::ConfigParse {
                line: e.line,
                column: e.column,
                message: err.to_string(),
            })?,
            (None, None) => vec![0.1, 0.5, 1.0],
        };
        let format = match (cli.format, get("format")) {
            (Some(f), _) => f,
            (None, Some(e)) => Format::from_str(&e.value, true).map_err(|_| Error::ConfigParse {
                line: e.line,
                column: e.column,
                message: format!("unknown format `{}`", e.value),
            })?,
            (None, None) => Format::Json,
        };
        let flag = |set: bool, k: &str| -> Result<bool> {
            Ok(set || get(k).map(|e| parse_bool(k, e)).transpose()?.unwrap_or(false))
        };
        let scenario = Scenario {
            command,
            phi: string(&cli.phi, "phi"),
            psi: string(&cli.psi, "psi"),
            map: string(&cli.map, "map"),
            field: string(&cli.field, "field"),
            grid,
            m_max,
            tol,
            t_samples,
            out: cli.out.clone().or_else(|| get("out").map(|e| PathBuf::from(&e.value))),
            format,
            fit: flag(cli.fit, "fit")?,
            local: flag(cli.local, "local")?,
            json: flag(cli.json, "json")?,
            morphisms_only: flag(cli.morphisms_only, "morphisms_only")?,
            zero_tol,
            fiber_samples,
            expected: string(&cli.expected, "expected"),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<()> {
        if self.grid < 4 {
            return Err(Error::InvalidArgument(format!("grid resolution must be at least 4 (got {})", self.grid)));
        }
        for (name, t) in [("tol", self.tol), ("zero_tol", self.zero_tol)] {
            if let Some(t) = t {
                if !(t > 0.0) || !t.is_finite() {
                    return Err(Error::InvalidArgument(format!("{name} must be positive (got {t})")));
                }
            }
        }
        if self.fiber_samples == 0 {
            return Err(Error::InvalidArgument("fiber_samples must be positive".into()));
        }
        for id in [&self.phi, &self.psi, &self.map].into_iter().flatten() {
            catalog::map(id)?;
        }
        Ok(())
    }

    fn need<'a>(&self, v: &'a Option<String>, what: &str) -> Result<&'a str> {
        v.as_deref()
            .ok_or_else(|| Error::InvalidArgument(format!("`{:?}` needs --{what}", self.command)))
    }
}

/// Result of a scenario: the JSON report, optional CSV body, and the verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub report: Value,
    pub csv: Option<String>,
}

fn finish(command: Command, pass: bool, mut fields: Map<String, Value>) -> Outcome {
    fields.insert("command".into(), json!(command));
    fields.insert("pass".into(), json!(pass));
    fields.insert("tolerances".into(), json!(tolerances::table()));
    Outcome {
        pass,
        report: Value::Object(fields),
        csv: None,
    }
}

fn object<T: Serialize>(v: &T) -> Map<String, Value> {
    match serde_json::to_value(v) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    }
}

pub fn run_scenario(s: &Scenario) -> Result<Outcome> {
    match s.command {
        Command::ListExamples => Ok(list_examples(s.json, s.morphisms_only)),
        Command::VerifyTheorem => verify_theorem(s),
        Command::Spectrum => spectrum(s),
        Command::Corollary => {
            let phi = catalog::map(s.need(&s.phi, "phi")?)?;
            let psi = catalog::map(s.need(&s.psi, "psi")?)?;
            let r = spectral::corollary_check(&phi, &psi, s.m_max)?;
            let mut m = object(&r);
            m.insert("M_max".into(), json!(s.m_max));
            Ok(finish(s.command, r.pass, m))
        }
        Command::Energy => energy(s),
        Command::Rigidity => rigidity_cmd(s),
        Command::TothCheck => {
            let phi = catalog::map(s.need(&s.phi, "phi")?)?;
            let v = catalog::section(s.need(&s.field, "field")?, &phi)?;
            let grid = phi.domain().quadrature_grid(s.grid)?;
            let c = rigidity::harmonic_variation_check(&v, &grid, &s.t_samples, s.fiber_samples)?;
            let mut m = object(&c);
            m.insert("map".into(), json!(phi.name()));
            m.insert("field".into(), json!(v.name()));
            m.insert("grid".into(), json!(s.grid));
            Ok(finish(s.command, c.agree, m))
        }
    }
}

fn verify_theorem(s: &Scenario) -> Result<Outcome> {
    let phi = catalog::map(s.need(&s.phi, "phi")?)?;
    let psi = catalog::map(s.need(&s.psi, "psi")?)?;
    let v = catalog::section(s.need(&s.field, "field")?, &psi)?;
    let grid = phi.domain().quadrature_grid(s.grid)?;
    let residuals = jacobi::composition_residuals(&phi, &psi, &v, &grid)?;
    let mut max_residual = 0.0f64;
    let mut failures = 0usize;
    for r in &residuals {
        max_residual = max_residual.max(r.residual);
        let tol = s.tol.unwrap_or(r.tolerance);
        if !(r.residual < tol) {
            failures += 1;
        }
    }
    let morphism = maps::morphism_report(&phi, &grid);
    let mut m = Map::new();
    m.insert("phi".into(), json!(phi.name()));
    m.insert("psi".into(), json!(psi.name()));
    m.insert("field".into(), json!(v.name()));
    m.insert("grid".into(), json!(s.grid));
    m.insert("points".into(), json!(residuals.len()));
    m.insert("max_residual".into(), json!(max_residual));
    m.insert("failing_points".into(), json!(failures));
    m.insert("tolerance".into(), json!(s.tol.unwrap_or(tolerances::COMPOSITION)));
    m.insert("phi_is_morphism".into(), json!(morphism.is_morphism));
    m.insert("min_dilation".into(), json!(morphism.min_dilation));
    m.insert("max_dilation".into(), json!(morphism.max_dilation));
    Ok(finish(s.command, failures == 0, m))
}

fn parse_expected_pair(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("expected `index,nullity`, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn spectrum(s: &Scenario) -> Result<Outcome> {
    let phi = catalog::map(s.need(&s.map, "map")?)?;
    if !matches!(phi.domain(), crate::Manifold::Sphere { dim: 1, .. }) {
        let grid = phi.domain().quadrature_grid(s.grid)?;
        let r = spectral::rayleigh_index_bound(&phi, &grid)?;
        let mut m = object(&r);
        m.insert("grid".into(), json!(s.grid));
        m.insert("kind".into(), json!("rayleigh_lower_bound"));
        let pass = r.unconfirmed == 0;
        return Ok(finish(s.command, pass, m));
    }
    let op = spectral::assemble_circle_domain(&phi, s.m_max)?;
    let report = spectral::index_nullity(&op, s.zero_tol)?;
    let mut pass = op.tension_residual < tolerances::HARMONIC;
    if let Some(e) = &s.expected {
        let (i, n) = parse_expected_pair(e)?;
        pass &= report.index == i && report.nullity == n;
    }
    let mut m = object(&report);
    m.insert("tension_residual".into(), json!(op.tension_residual));
    let mut out = finish(s.command, pass, m);
    if s.format == Format::Csv {
        let mut buf = Vec::new();
        spectral::write_csv(&report, &mut buf)?;
        out.csv = Some(String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))?);
    }
    Ok(out)
}

fn energy(s: &Scenario) -> Result<Outcome> {
    let phi = catalog::map(s.need(&s.map, "map")?)?;
    let grid = phi.domain().quadrature_grid(s.grid)?;
    let e = jacobi::energy(&phi, &grid);
    let mut m = Map::new();
    m.insert("map".into(), json!(phi.name()));
    m.insert("grid".into(), json!(s.grid));
    m.insert("energy".into(), json!(e));
    let mut pass = true;
    if let Some(x) = &s.expected {
        let want: f64 = x
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("expected a number, got `{x}`")))?;
        let rel = (e - want).abs() / want.abs().max(f64::MIN_POSITIVE);
        let tol = s.tol.unwrap_or(1e-3);
        pass = rel < tol;
        m.insert("expected".into(), json!(want));
        m.insert("relative_error".into(), json!(rel));
        m.insert("tolerance".into(), json!(tol));
    }
    Ok(finish(s.command, pass, m))
}

fn rigidity_cmd(s: &Scenario) -> Result<Outcome> {
    let phi = catalog::map(s.need(&s.phi, "phi")?)?;
    let field = s.need(&s.field, "field")?;
    let v = catalog::section(field, &phi)?;
    let grid = phi.domain().quadrature_grid(s.grid)?;
    let report = rigidity::variation_report(&v, &grid, s.fiber_samples)?;
    let mut m = object(&report);
    m.insert("map".into(), json!(phi.name()));
    m.insert("field".into(), json!(v.name()));
    m.insert("grid".into(), json!(s.grid));
    let mut pass = true;
    let mut generator: Option<SkewGenerator> = None;
    if s.fit {
        let fit = rigidity::fit_skew_generator(&v, &grid)?;
        let tol = s.tol.unwrap_or(tolerances::FIT_RESIDUAL);
        pass &= fit.fit_residual < tol;
        m.insert("generator".into(), json!(fit.generator.row_major()));
        m.insert("fit_residual".into(), json!(fit.fit_residual));
        m.insert("fit_condition".into(), json!(fit.condition));
        generator = Some(fit.generator);
    }
    if s.local {
        // the image may not span the sphere; fall back to the named generator
        if generator.is_none() {
            match rigidity::fit_skew_generator(&v, &grid) {
                Ok(fit) => generator = Some(fit.generator),
                Err(Error::IllConditionedFit { .. }) if field.starts_with("killing") => {
                    let k = catalog::killing_generator(field, phi.codomain().ambient_dim())?;
                    generator = Some(SkewGenerator::from_matrix(&k)?);
                }
                Err(e) => return Err(e),
            }
        }
        match rigidity::local_rigidity_check(&v, generator.as_ref(), &grid, &s.t_samples, 8) {
            Ok(l) => {
                pass &= l.passes();
                m.insert("flow_mismatch".into(), json!(l.flow_mismatch));
                m.insert("geodesic_residual".into(), json!(l.geodesic_residual));
                m.insert("generator".into(), json!(l.generator.row_major()));
                m.insert("local".into(), json!("checked"));
            }
            Err(Error::NotApplicable(why)) => {
                m.insert("local".into(), json!("not_applicable"));
                m.insert("local_reason".into(), json!(why));
            }
            Err(Error::NotConstantNorm { variation }) => {
                pass = false;
                m.insert("local".into(), json!("not_constant_norm"));
                m.insert("local_reason".into(), json!(format!("relative norm variation {variation:e}")));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(finish(s.command, pass, m))
}

/// Catalog listing as a text table or a JSON array.
pub fn list_examples(as_json: bool, morphisms_only: bool) -> Outcome {
    let entries: Vec<_> = catalog::entries()
        .into_iter()
        .filter(|e| !morphisms_only || e.morphism)
        .collect();
    let report = json!({
        "maps": entries,
        "fields": catalog::field_ids(),
    });
    let csv = if as_json {
        None
    } else {
        let mut text = String::new();
        for e in &entries {
            text.push_str(&format!(
                "{:<26} {:>4} -> {:<4} harmonic={} morphism={}\n",
                e.id, e.domain, e.codomain, e.harmonic, e.morphism
            ));
        }
        text.push_str("\nfields:\n");
        for f in catalog::field_ids() {
            text.push_str(&format!("  {f}\n"));
        }
        Some(text)
    };
    Outcome {
        pass: true,
        report: if as_json { Value::Array(entries.iter().map(|e| json!(e)).collect()) } else { report },
        csv,
    }
}

/// Writes the report to `path`, or returns it as text when `path` is `None`.
pub fn emit_report(outcome: &Outcome, format: Format, path: Option<&Path>) -> Result<Option<String>> {
    let body = match (format, &outcome.csv) {
        (Format::Csv, Some(csv)) => csv.clone(),
        (Format::Csv, None) => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(["key", "value"]).map_err(|e| Error::Io(e.to_string()))?;
            if let Value::Object(m) = &outcome.report {
                for (k, v) in m {
                    if !v.is_object() && !v.is_array() {
                        let cell = match v {
                            Value::String(s) => s.clone(),
                            other => other.to_string(),
                        };
                        w.write_record([k.as_str(), cell.as_str()])
                            .map_err(|e| Error::Io(e.to_string()))?;
                    }
                }
            }
            String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
                .map_err(|e| Error::Io(e.to_string()))?
        }
        (Format::Json, _) => {
            let mut s = serde_json::to_string_pretty(&outcome.report).map_err(|e| Error::Io(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    match path {
        Some(p) => {
            std::fs::write(p, body)?;
            Ok(None)
        }
        None => Ok(Some(body)),
    }
}

/// Runs the binary's logic and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let scenario = match Scenario::from_cli(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let outcome = match run_scenario(&scenario) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let format = if scenario.command == Command::ListExamples && !scenario.json {
        Format::Csv
    } else {
        scenario.format
    };
    match emit_report(&outcome, format, scenario.out.as_deref()) {
        Ok(Some(text)) => print!("{text}"),
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    }
    if outcome.pass {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_errors_carry_position() {
        let err = parse_config("grid = 8\n  bogus = 1\n").unwrap_err();
        assert_eq!(
            err,
            Error::ConfigParse {
                line: 2,
                column: 3,
                message: "unknown key `bogus`".into()
            }
        );
        let err = parse_config("# comment\nmap\n").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 2, column: 1, .. }));
        let ok = parse_config("map = circle:k=2  # trailing\n\nmmax=4\n").unwrap();
        assert_eq!(ok["map"].value, "circle:k=2");
        assert_eq!(ok["mmax"].column, 6);
    }

    #[test]
    fn t_samples_parse() {
        assert_eq!(parse_t_samples("0.1, 0.5,1").unwrap(), vec![0.1, 0.5, 1.0]);
        assert!(parse_t_samples("0.1,x").is_err());
    }
}
