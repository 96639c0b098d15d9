//! Subcommands of the `multislit` binary. Each one reads a JSON config,
//! writes CSV tables and a `manifest.json` into the output directory, and
//! maps failures onto the exit codes below.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use multislit::config::{EigenstateConfig, SimulationConfig};
use multislit::grid::Convention;
use multislit::pipeline::{simulate, sweep, SweepParam};
use multislit::validate::{run_validation, ValidateOptions, ValidationReport};
use multislit::{fourier, Wavefunction};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug)]
pub enum Failure {
    /// Unusable input: bad config, bad flag values, unwritable paths.
    Config(String),
    Numerical(String),
    /// The validation suite ran and some checks failed.
    Validation(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Numerical(_) => EXIT_NUMERICAL,
            Failure::Validation(_) => EXIT_VALIDATION,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Validation(m) => write!(f, "validation failed: {m}"),
        }
    }
}

impl From<multislit::Error> for Failure {
    fn from(e: multislit::Error) -> Self {
        match e {
            multislit::Error::Numerical(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Config(format!("csv: {e}"))
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

/// Shortest round-trip representation, always with '.' as the decimal mark.
fn num(v: f64) -> String {
    format!("{v:e}")
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Collects output files and writes the manifest last.
struct Artifacts {
    dir: PathBuf,
    files: Vec<Value>,
    started: String,
}

impl Artifacts {
    fn new(dir: &Path) -> Outcome<Self> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf(), files: Vec::new(), started: now() })
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Outcome<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(header)?;
        let mut count = 0usize;
        for row in rows {
            w.write_record(&row)?;
            count += 1;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Config(format!("csv: {e}")))?;
        fs::write(self.dir.join(name), &bytes)?;
        self.files.push(json!({ "file": name, "rows": count, "bytes": bytes.len(), "sha256": sha256_hex(&bytes) }));
        Ok(())
    }

    fn finish(self, command: &str, config: Value, seed: Option<u64>) -> Outcome<PathBuf> {
        let manifest = json!({
            "tool": "multislit",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": config,
            "seed": seed,
            "started_utc": self.started,
            "finished_utc": now(),
            "outputs": self.files,
        });
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn read_config(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

/// Manifest block describing the input: path, hash of the canonical form,
/// and the canonical form itself.
fn config_block(path: &Path, canonical: &Value, resolved: Option<Value>) -> Value {
    let text = serde_json::to_string(canonical).expect("config serialises");
    json!({
        "path": path.display().to_string(),
        "sha256": sha256_hex(text.as_bytes()),
        "canonical": canonical,
        "resolved": resolved,
    })
}

fn check_finite(psi: &Wavefunction, what: &str) -> Outcome<()> {
    psi.check_finite().map_err(|e| Failure::Numerical(format!("{what}: {e}")))
}

fn position_rows(psi: &Wavefunction) -> Vec<Vec<String>> {
    psi.grid().coords().into_iter().zip(psi.densities()).map(|(x, d)| vec![num(x), num(d)]).collect()
}

fn momentum_rows(psi: &Wavefunction) -> Outcome<Vec<Vec<String>>> {
    let phi = fourier(psi)?;
    Ok(phi.grid().coords().into_iter().zip(phi.densities()).map(|(k, d)| vec![num(k), num(d)]).collect())
}

const POSITION_HEADER: [&str; 2] = ["x [T]", "|psi|^2 [1/T]"];
const MOMENTUM_HEADER: [&str; 2] = ["k [1/T]", "|psi~|^2 [T]"];

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub transmitted: f64,
    pub blocked: f64,
    pub image_leakage: f64,
    pub image_distance: f64,
    pub eigenstate_leakage: Option<f64>,
}

pub fn cmd_simulate(config_path: &Path, out: &Path) -> Outcome<SimulateSummary> {
    let parsed = SimulationConfig::from_json(&read_config(config_path)?)?;
    let config = parsed.resolve()?;
    let run = simulate(&config)?;
    let mut art = Artifacts::new(out)?;
    for (name, psi) in [("prepared", &run.prepared), ("after_grating", &run.after_grating), ("imaged", &run.imaged)] {
        check_finite(psi, name)?;
        art.csv(&format!("stage_{name}_position.csv"), &POSITION_HEADER, position_rows(psi))?;
        art.csv(&format!("stage_{name}_momentum.csv"), &MOMENTUM_HEADER, momentum_rows(psi)?)?;
    }
    let r = &run.report;
    art.csv(
        "summary.csv",
        &[
            "stage",
            "probability [1]",
            "distance [1]",
            "overlap [1]",
            "leakage [1]",
            "leakage_total [1]",
            "peaks [count]",
        ],
        r.stages.iter().map(|s| {
            vec![
                s.stage.to_string(),
                num(s.probability),
                num(s.distance),
                num(s.overlap),
                num(s.leakage),
                num(s.leakage_total),
                s.peaks.len().to_string(),
            ]
        }),
    )?;
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    art.csv(
        "run.csv",
        &["quantity", "value", "unit"],
        [
            ("transmitted", num(r.transmitted), "1"),
            ("blocked", num(r.blocked), "1"),
            ("t_prime", opt(r.t_prime), "T"),
            ("wavelength", num(r.wavelength_m), "m"),
            ("fresnel_number", num(r.fresnel_number), "1"),
            ("eigenstate_leakage", opt(r.eigenstate_leakage), "1"),
        ]
        .into_iter()
        .map(|(q, v, u)| vec![q.to_string(), v, u.to_string()]),
    )?;
    let imaged = r.stage(multislit::pipeline::Stage::Imaged);
    let peaks = &imaged.peaks;
    art.csv(
        "peaks_imaged.csv",
        &["centre [T]", "mass [1]", "first [index]", "last [index]"],
        peaks.iter().map(|p| vec![num(p.centre), num(p.mass), p.first.to_string(), p.last.to_string()]),
    )?;
    let resolved = serde_json::to_value(&config).ok();
    art.finish("simulate", config_block(config_path, &parsed.to_json(), resolved), None)?;
    Ok(SimulateSummary {
        transmitted: r.transmitted,
        blocked: r.blocked,
        image_leakage: imaged.leakage,
        image_distance: imaged.distance,
        eigenstate_leakage: r.eigenstate_leakage,
    })
}

#[derive(Debug, Serialize)]
pub struct EigenstateSummary {
    pub position_residual: f64,
    pub momentum_residual: f64,
    pub tail_fraction: f64,
    pub replicas: usize,
}

pub fn cmd_eigenstate(config_path: &Path, out: &Path) -> Outcome<EigenstateSummary> {
    let cfg = EigenstateConfig::from_json(&read_config(config_path)?)?;
    let state = cfg.build()?;
    check_finite(&state.psi, "eigenstate")?;
    let mut art = Artifacts::new(out)?;
    let psi = &state.psi;
    art.csv(
        "eigenstate_position.csv",
        &["x [T]", "re psi [1/sqrt(T)]", "im psi [1/sqrt(T)]", "|psi|^2 [1/T]"],
        psi.grid().coords().into_iter().zip(psi.values()).map(|(x, v)| vec![num(x), num(v.re), num(v.im), num(v.norm_sqr())]),
    )?;
    art.csv("eigenstate_momentum.csv", &MOMENTUM_HEADER, momentum_rows(psi)?)?;
    let total: f64 = state.replicas.iter().map(|r| r.weight.norm_sqr()).sum();
    art.csv(
        "replicas.csv",
        &["index [1]", "centre [T]", "re weight [1]", "im weight [1]", "mass fraction [1]"],
        state.replicas.iter().map(|r| {
            vec![r.index.to_string(), num(r.centre), num(r.weight.re), num(r.weight.im), num(r.weight.norm_sqr() / total)]
        }),
    )?;
    let predicted = state.predicted_norm_sq();
    art.csv(
        "summary.csv",
        &["quantity", "value", "unit"],
        [
            ("position_residual", state.position_residual, "1"),
            ("momentum_residual", state.momentum_residual, "1"),
            ("raw_norm_sq", state.raw_norm_sq, "1"),
            ("predicted_norm_sq", predicted, "1"),
            ("tail_fraction", state.tail_fraction, "1"),
            ("central_pair_mass", state.central_pair_mass(), "1"),
        ]
        .into_iter()
        .map(|(q, v, u)| vec![q.to_string(), num(v), u.to_string()]),
    )?;
    let canonical = serde_json::to_value(cfg).expect("config serialises");
    art.finish("eigenstate", config_block(config_path, &canonical, None), None)?;
    Ok(EigenstateSummary {
        position_residual: state.position_residual,
        momentum_residual: state.momentum_residual,
        tail_fraction: state.tail_fraction,
        replicas: state.replicas.len(),
    })
}

/// Runs the check suite. A failed check is `Failure::Validation`; the
/// report is returned alongside so the caller can still print it.
pub fn cmd_validate(seed: u64, convention: Convention, out: Option<&Path>) -> (ValidationReport, Outcome<()>) {
    let report = match run_validation(&ValidateOptions { seed, convention }) {
        Ok(r) => r,
        Err(e) => {
            let empty = ValidationReport { seed, checks: Vec::new(), seconds: 0.0 };
            return (empty, Err(e.into()));
        }
    };
    let written = out.map_or(Ok(()), |dir| {
        let mut art = Artifacts::new(dir)?;
        art.csv(
            "validate.csv",
            &["group", "check", "value [1]", "bound", "passed", "seconds [s]"],
            report.checks.iter().map(|c| {
                vec![
                    c.group.to_string(),
                    c.name.clone(),
                    num(c.value),
                    c.bound.to_string(),
                    c.passed.to_string(),
                    format!("{:.3}", c.seconds),
                ]
            }),
        )?;
        art.finish("validate", Value::Null, Some(seed)).map(|_| ())
    });
    let status = written.and_then(|()| {
        let failed: Vec<&str> = report.failures().iter().map(|c| c.name.as_str()).collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Failure::Validation(format!("failed: {}", failed.join(", "))))
        }
    });
    (report, status)
}

/// Parses `--values`: comma-separated numbers or inclusive ranges `a..b`
/// and `a..b:step`.
pub fn parse_values(text: &str) -> Outcome<Vec<f64>> {
    let bad = |item: &str| Failure::Config(format!("bad value '{item}' in --values"));
    let mut values = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, rest)) = item.split_once("..") {
            let (hi, step) = match rest.split_once(':') {
                Some((hi, step)) => (hi, step.trim().parse::<f64>().map_err(|_| bad(item))?),
                None => (rest, 1.0),
            };
            let lo: f64 = lo.trim().parse().map_err(|_| bad(item))?;
            let hi: f64 = hi.trim().parse().map_err(|_| bad(item))?;
            if !(step > 0.0 && lo <= hi && lo.is_finite() && hi.is_finite()) {
                return Err(bad(item));
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize;
            values.extend((0..=count).map(|i| lo + i as f64 * step));
        } else {
            values.push(item.parse().map_err(|_| bad(item))?);
        }
    }
    if values.is_empty() {
        return Err(Failure::Config("--values is empty".into()));
    }
    Ok(values)
}

pub fn cmd_sweep(config_path: &Path, param: &str, values: &str, out: &Path) -> Outcome<usize> {
    let param: SweepParam = param.parse()?;
    let values = parse_values(values)?;
    let parsed = SimulationConfig::from_json(&read_config(config_path)?)?;
    let config = parsed.resolve()?;
    let rows = sweep(&config, param, &values)?;
    if rows.iter().any(|r| !(r.transmitted.is_finite() && r.leakage.is_finite() && r.distance.is_finite())) {
        return Err(Failure::Numerical("sweep produced non-finite values".into()));
    }
    let mut art = Artifacts::new(out)?;
    let first = format!("{} [{}]", param.name(), param.unit());
    art.csv(
        "sweep.csv",
        &[&first, "transmitted [1]", "leakage [1]", "distance [1]", "overlap [1]"],
        rows.iter().map(|r| vec![num(r.value), num(r.transmitted), num(r.leakage), num(r.distance), num(r.overlap)]),
    )?;
    let resolved = serde_json::to_value(&config).ok();
    let mut block = config_block(config_path, &parsed.to_json(), resolved);
    block["sweep"] = json!({ "param": param.name(), "values": values });
    art.finish("sweep", block, None)?;
    Ok(rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_lists_and_ranges() {
        assert_eq!(parse_values("0..3").unwrap(), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(parse_values("1, 2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(parse_values("0..1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_values("").is_err());
        assert!(parse_values(" , ").is_err());
        assert!(parse_values("3..1").is_err());
        assert!(parse_values("a").is_err());
    }

    #[test]
    fn numbers_use_a_dot() {
        assert_eq!(num(0.25), "2.5e-1");
        assert_eq!(num(-1.0), "-1e0");
    }

    #[test]
    fn error_kinds_map_to_exit_codes() {
        let e: Failure = multislit::Error::Numerical("x".into()).into();
        assert_eq!(e.exit_code(), EXIT_NUMERICAL);
        let e: Failure = multislit::Error::UnknownParameter("x".into()).into();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
        assert_eq!(Failure::Validation(String::new()).exit_code(), EXIT_VALIDATION);
    }
}
