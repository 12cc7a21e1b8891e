//! File formats and configuration.
//!
//! One JSON family covers everything the tool reads and writes:
//!
//! * **config** — a single JSON document naming the window, driving
//!   measure, scaling factor, time/step parameters, seed, and budgets.
//!   `STITLAB_CONFIG` supplies a default path; command-line flags
//!   override individual fields.
//! * **tessellation file** — `{dim, window, cells, meta}` with every
//!   coordinate an exact rational string `"p/q"`, so a write/read cycle
//!   reproduces the geometry losslessly.
//! * **event log** — newline-delimited JSON, one split per line.
//! * **chain / CFTP files** — a sequence of exact states plus the
//!   parameters that produced them.
//! * **report file** — canonical JSON from the verification suites.
//!
//! Every output embeds the SHA-256 hash of the producing config, so any
//! artifact can be traced back to its exact inputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{ConvexPolytope, Direction, Window};
use crate::measure::DrivingMeasure;
use crate::renorm::RenormConfig;
use crate::scalar::{format_scalar, parse_scalar, Scalar};
use crate::sim::JumpEvent;
use crate::tess::Tessellation;
use crate::verify::TestReport;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot access {path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("no config: pass --config or set STITLAB_CONFIG")]
    NoConfig,
    #[error("bad tessellation file: {0}")]
    BadTessellation(String),
}

fn cfg_err(field: &str, message: impl std::fmt::Display) -> IoError {
    IoError::Config {
        field: field.to_string(),
        message: message.to_string(),
    }
}

/// Environment variable naming the default config path.
pub const CONFIG_ENV: &str = "STITLAB_CONFIG";

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

/// Driving-measure selector in config files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// The two coordinate directions with unit weight (dimension 2).
    Axis2,
    /// Arbitrary weighted normal directions (dimension 2).
    Discrete { directions: Vec<DirectionWeight> },
    /// Rotation-invariant lines with the given density (dimension 2).
    Isotropic { density: f64 },
    /// Point cuts with Lebesgue intensity (dimension 1).
    Lebesgue1d,
}

/// One weighted normal direction of a discrete measure.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DirectionWeight {
    /// Integer components; canonicalized on load.
    pub normal: Vec<i64>,
    /// Positive rational weight, `"p/q"`.
    pub weight: String,
}

fn default_factor() -> String {
    "2/1".to_string()
}
fn default_time() -> f64 {
    1.0
}
fn default_seed() -> u64 {
    17
}
fn default_max_events() -> u64 {
    1_000_000
}
fn default_steps() -> u32 {
    1
}

/// A full run description. Everything an invocation needs beyond the
/// subcommand itself lives here; flags override single fields.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Ambient dimension, 1 or 2.
    pub dimension: u8,
    /// Window vertices as exact rational strings; must contain the
    /// origin in its interior.
    pub window: Vec<Vec<String>>,
    pub measure: MeasureSpec,
    /// Scaling factor `a > 1` for chain and factor-map runs, `"p/q"`.
    #[serde(default = "default_factor")]
    pub a: String,
    /// Time horizon for `simulate`.
    #[serde(default = "default_time")]
    pub time: f64,
    /// Step count for `chain`.
    #[serde(default = "default_steps")]
    pub steps: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Split budget per run; exceeding it is a hard error.
    #[serde(default = "default_max_events")]
    pub max_events: u64,
    /// Suites run by `verify` when none are named on the command line;
    /// empty means all of them.
    #[serde(default)]
    pub suites: Vec<String>,
}

impl Config {
    /// Reads and fully validates a config file.
    pub fn from_path(path: &Path) -> Result<Config, IoError> {
        let text = fs::read_to_string(path).map_err(|source| IoError::File {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: Config = serde_json::from_str(&text).map_err(|source| IoError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Resolves the config from an explicit path or `STITLAB_CONFIG`.
    pub fn load(explicit: Option<&Path>) -> Result<Config, IoError> {
        match explicit {
            Some(p) => Config::from_path(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) => Config::from_path(Path::new(&p)),
                None => Err(IoError::NoConfig),
            },
        }
    }

    /// Checks every field that later constructors would reject, with the
    /// offending field path in the error.
    pub fn validate(&self) -> Result<(), IoError> {
        self.window()?;
        self.measure()?;
        self.factor()?;
        if !(self.time >= 0.0) || !self.time.is_finite() {
            return Err(cfg_err("time", "must be a finite non-negative number"));
        }
        if self.max_events == 0 {
            return Err(cfg_err("max_events", "must be positive"));
        }
        for s in &self.suites {
            if !crate::verify::SUITE_NAMES.contains(&s.as_str()) {
                return Err(cfg_err(
                    "suites",
                    format!(
                        "unknown suite `{s}`; known: {}",
                        crate::verify::SUITE_NAMES.join(", ")
                    ),
                ));
            }
        }
        Ok(())
    }

    /// The window polytope; fails unless the origin is interior.
    pub fn window(&self) -> Result<Window, IoError> {
        if self.dimension != 1 && self.dimension != 2 {
            return Err(cfg_err("dimension", "must be 1 or 2"));
        }
        let mut pts = Vec::with_capacity(self.window.len());
        for (i, v) in self.window.iter().enumerate() {
            let mut pt = Vec::with_capacity(v.len());
            for (j, s) in v.iter().enumerate() {
                let x = parse_scalar(s)
                    .map_err(|e| cfg_err(&format!("window[{i}][{j}]"), e))?;
                pt.push(x);
            }
            pts.push(pt);
        }
        let poly = ConvexPolytope::new(self.dimension, pts)
            .map_err(|e| cfg_err("window", e))?;
        Window::new(poly).map_err(|e| cfg_err("window", e))
    }

    /// The driving measure; fails unless it matches `dimension`.
    pub fn measure(&self) -> Result<DrivingMeasure, IoError> {
        let m = match &self.measure {
            MeasureSpec::Axis2 => DrivingMeasure::axis2(),
            MeasureSpec::Discrete { directions } => {
                let mut dirs = Vec::with_capacity(directions.len());
                for (i, dw) in directions.iter().enumerate() {
                    let d = Direction::from_ints(self.dimension, &dw.normal)
                        .map_err(|e| {
                            cfg_err(&format!("measure.directions[{i}].normal"), e)
                        })?;
                    let w = parse_scalar(&dw.weight).map_err(|e| {
                        cfg_err(&format!("measure.directions[{i}].weight"), e)
                    })?;
                    dirs.push((d, w));
                }
                DrivingMeasure::discrete(dirs).map_err(|e| cfg_err("measure", e))?
            }
            MeasureSpec::Isotropic { density } => {
                DrivingMeasure::isotropic(*density).map_err(|e| cfg_err("measure", e))?
            }
            MeasureSpec::Lebesgue1d => DrivingMeasure::lebesgue_points(),
        };
        if m.dim() != self.dimension {
            return Err(cfg_err(
                "measure",
                format!(
                    "measure is for dimension {}, config says {}",
                    m.dim(),
                    self.dimension
                ),
            ));
        }
        Ok(m)
    }

    /// The scaling factor; fails unless `a > 1`.
    pub fn factor(&self) -> Result<Scalar, IoError> {
        let a = parse_scalar(&self.a).map_err(|e| cfg_err("a", e))?;
        if a <= Scalar::from_integer(1.into()) {
            return Err(cfg_err("a", "must exceed 1"));
        }
        Ok(a)
    }

    /// Window, measure, and factor assembled for chain runs.
    pub fn renorm(&self) -> Result<RenormConfig, IoError> {
        RenormConfig::new(self.window()?, self.measure()?, self.factor()?)
            .map_err(|e| cfg_err("config", e))
    }

    /// SHA-256 of the canonical serialization; stamped into every output.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(&bytes);
        let digest = h.finalize();
        let mut s = String::with_capacity(64);
        for b in digest {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Tessellation files
// ---------------------------------------------------------------------------

/// Exact polygon/interval geometry in transit.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PolyDto {
    pub vertices: Vec<Vec<String>>,
}

impl PolyDto {
    pub fn of(poly: &ConvexPolytope) -> Self {
        PolyDto {
            vertices: poly
                .vertices()
                .iter()
                .map(|v| v.iter().map(format_scalar).collect())
                .collect(),
        }
    }

    pub fn to_poly(&self, dim: u8) -> Result<ConvexPolytope, IoError> {
        let mut pts = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            let mut pt = Vec::with_capacity(v.len());
            for s in v {
                pt.push(
                    parse_scalar(s).map_err(|e| IoError::BadTessellation(e.to_string()))?,
                );
            }
            pts.push(pt);
        }
        ConvexPolytope::new(dim, pts).map_err(|e| IoError::BadTessellation(e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CellDto {
    pub vertices: Vec<Vec<String>>,
    pub key: String,
}

/// Provenance carried by every artifact.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Meta {
    pub time: f64,
    pub seed: u64,
    pub measure: String,
    pub config_hash: String,
}

/// On-disk tessellation: exact window, exact cells, provenance.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TessFile {
    pub dim: u8,
    pub window: PolyDto,
    pub cells: Vec<CellDto>,
    pub meta: Meta,
}

impl TessFile {
    pub fn of(t: &Tessellation, meta: Meta) -> Self {
        TessFile {
            dim: t.window().dim(),
            window: PolyDto::of(t.window()),
            cells: t
                .cells()
                .iter()
                .map(|c| CellDto {
                    vertices: PolyDto::of(&c.poly).vertices,
                    key: c.key.as_str().to_string(),
                })
                .collect(),
            meta,
        }
    }

    /// Rebuilds the exact tessellation, checking the partition property
    /// and that every recorded key matches the recomputed canonical key.
    pub fn to_tessellation(&self) -> Result<Tessellation, IoError> {
        let window = self.window.to_poly(self.dim)?;
        let mut cells = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            let dto = PolyDto {
                vertices: c.vertices.clone(),
            };
            cells.push(dto.to_poly(self.dim)?);
        }
        let t = Tessellation::new(window, cells)
            .map_err(|e| IoError::BadTessellation(e.to_string()))?;
        for c in &self.cells {
            if t.find(&crate::geometry::CellKey::from_string(c.key.clone())).is_none() {
                return Err(IoError::BadTessellation(format!(
                    "recorded key {} does not match any rebuilt cell",
                    c.key
                )));
            }
        }
        Ok(t)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    fs::write(path, text + "\n").map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_tessellation(path: &Path, t: &Tessellation, meta: Meta) -> Result<(), IoError> {
    write_json(path, &TessFile::of(t, meta))
}

pub fn read_tessellation(path: &Path) -> Result<(Tessellation, Meta), IoError> {
    let file: TessFile = read_json(path)?;
    let t = file.to_tessellation()?;
    Ok((t, file.meta))
}

// ---------------------------------------------------------------------------
// Event log
// ---------------------------------------------------------------------------

/// One split, as logged. Direction components are integers in canonical
/// form; the offset is an exact rational.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub parent_key: String,
    pub normal: Vec<String>,
    pub offset: String,
    pub child_keys: [String; 2],
}

impl EventRecord {
    pub fn of(e: &JumpEvent) -> Self {
        EventRecord {
            time: e.time,
            parent_key: e.parent_key.as_str().to_string(),
            normal: e
                .hyperplane
                .normal()
                .components()
                .iter()
                .map(|c| c.to_string())
                .collect(),
            offset: format_scalar(e.hyperplane.offset()),
            child_keys: [
                e.child_keys.0.as_str().to_string(),
                e.child_keys.1.as_str().to_string(),
            ],
        }
    }
}

/// Newline-delimited JSON, one record per split, in event order.
pub fn write_event_log(path: &Path, events: &[JumpEvent]) -> Result<(), IoError> {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(&EventRecord::of(e)).expect("serializable"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_event_log(path: &Path) -> Result<Vec<EventRecord>, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(line).map_err(|source| IoError::Json {
                path: path.to_path_buf(),
                source,
            })?,
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Chain and CFTP files
// ---------------------------------------------------------------------------

/// One indexed state of a chain (the index is the chain time).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateDto {
    pub n: i64,
    pub cells: Vec<CellDto>,
}

impl StateDto {
    pub fn of(n: i64, t: &Tessellation) -> Self {
        StateDto {
            n,
            cells: TessFile::of(t, blank_meta()).cells,
        }
    }
}

fn blank_meta() -> Meta {
    Meta {
        time: 0.0,
        seed: 0,
        measure: String::new(),
        config_hash: String::new(),
    }
}

/// A sampled chain trajectory: states at consecutive chain times.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ChainFile {
    pub dim: u8,
    pub window: PolyDto,
    pub states: Vec<StateDto>,
    pub meta: Meta,
}

/// Outcome of a coupling-from-the-past run, plus the exact output states
/// at times `0 ..= horizon` when it coalesced.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CftpFile {
    pub dim: u8,
    pub window: PolyDto,
    pub horizon: u32,
    pub coalesced: bool,
    /// First depth whose outputs matched the previous probe exactly
    /// (absent when the cap was exceeded).
    pub depth: Option<u32>,
    /// Probed depths, in order, with their match flags.
    pub probes: Vec<(u32, bool)>,
    pub states: Vec<StateDto>,
    pub meta: Meta,
}

pub fn write_chain(path: &Path, file: &ChainFile) -> Result<(), IoError> {
    write_json(path, file)
}

pub fn read_chain(path: &Path) -> Result<ChainFile, IoError> {
    read_json(path)
}

pub fn write_cftp(path: &Path, file: &CftpFile) -> Result<(), IoError> {
    write_json(path, file)
}

pub fn read_cftp(path: &Path) -> Result<CftpFile, IoError> {
    read_json(path)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Canonical report bytes: wall time zeroed so identical (config, seed)
/// invocations write identical files.
pub fn write_report(path: &Path, report: &TestReport) -> Result<(), IoError> {
    fs::write(path, report.canonical_json() + "\n").map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Multi-suite report: a JSON array of canonical per-suite reports.
pub fn write_reports(path: &Path, reports: &[TestReport]) -> Result<(), IoError> {
    let values: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| serde_json::from_str(&r.canonical_json()).expect("canonical JSON parses"))
        .collect();
    let text = serde_json::to_string_pretty(&values).expect("serializable");
    fs::write(path, text + "\n").map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_stream, StreamPart};
    use crate::sim::run;

    fn sample_config() -> Config {
        Config {
            dimension: 2,
            window: vec![
                vec!["-1/2".into(), "-1/2".into()],
                vec!["1/2".into(), "-1/2".into()],
                vec!["1/2".into(), "1/2".into()],
                vec!["-1/2".into(), "1/2".into()],
            ],
            measure: MeasureSpec::Axis2,
            a: "2/1".into(),
            time: 1.5,
            steps: 2,
            seed: 99,
            max_events: 100_000,
            suites: vec![],
        }
    }

    #[test]
    fn config_roundtrip_and_hash_stability() {
        let cfg = sample_config();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: Config = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.hash(), back.hash());
        assert_eq!(cfg.hash().len(), 64);
        let mut other = cfg.clone();
        other.seed = 100;
        assert_ne!(cfg.hash(), other.hash());
    }

    #[test]
    fn config_validation_reports_field_paths() {
        let mut cfg = sample_config();
        cfg.window[0][0] = "1/x".into();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("window[0][0]"), "{err}");

        let mut cfg = sample_config();
        cfg.a = "1/2".into();
        assert!(cfg.validate().unwrap_err().to_string().contains("exceed 1"));

        let mut cfg = sample_config();
        // Window must keep the origin interior.
        for v in &mut cfg.window {
            v[0] = format!("{}", parse_scalar(&v[0]).unwrap() + Scalar::from_integer(5.into()))
                .replace(' ', "");
        }
        assert!(cfg.window().is_err());

        let mut cfg = sample_config();
        cfg.measure = MeasureSpec::Lebesgue1d;
        assert!(cfg.measure().is_err());
    }

    #[test]
    fn tessellation_file_roundtrip_is_lossless() {
        let cfg = sample_config();
        let w = cfg.window().unwrap();
        let m = cfg.measure().unwrap();
        let mut rng = derive_stream(cfg.seed, &[StreamPart::Tag("io-test")]);
        let run = run(w.as_poly(), &m, cfg.time, &mut rng).unwrap();
        let meta = Meta {
            time: cfg.time,
            seed: cfg.seed,
            measure: m.kind_label(),
            config_hash: cfg.hash(),
        };

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        write_tessellation(&path, run.final_tess(), meta.clone()).unwrap();
        let (back, back_meta) = read_tessellation(&path).unwrap();
        assert_eq!(&back, run.final_tess());
        assert_eq!(back_meta, meta);

        // Bytes are stable under rewrite.
        let first = fs::read(&path).unwrap();
        write_tessellation(&path, &back, back_meta).unwrap();
        assert_eq!(first, fs::read(&path).unwrap());
    }

    #[test]
    fn event_log_roundtrip() {
        let cfg = sample_config();
        let w = cfg.window().unwrap();
        let m = cfg.measure().unwrap();
        let mut rng = derive_stream(3, &[StreamPart::Tag("io-events")]);
        let run = run(w.as_poly(), &m, 2.0, &mut rng).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.ndjson");
        write_event_log(&path, run.events()).unwrap();
        let back = read_event_log(&path).unwrap();
        assert_eq!(back.len(), run.events().len());
        for (rec, ev) in back.iter().zip(run.events()) {
            assert_eq!(rec, &EventRecord::of(ev));
            // Offsets and normals survive as exact text.
            assert_eq!(
                parse_scalar(&rec.offset).unwrap(),
                *ev.hyperplane.offset()
            );
        }
    }

    #[test]
    fn corrupted_key_is_rejected() {
        let cfg = sample_config();
        let w = cfg.window().unwrap();
        let m = cfg.measure().unwrap();
        let mut rng = derive_stream(5, &[StreamPart::Tag("io-corrupt")]);
        let run = run(w.as_poly(), &m, 1.0, &mut rng).unwrap();
        let mut file = TessFile::of(
            run.final_tess(),
            Meta {
                time: 1.0,
                seed: 5,
                measure: m.kind_label(),
                config_hash: cfg.hash(),
            },
        );
        file.cells[0].key = "bogus".into();
        assert!(file.to_tessellation().is_err());
    }
}
