//! Run configurations, result envelopes and field dumps behind the `conic`
//! command line. Exit codes: 0 on success, 2 when the gate rejects a spec,
//! 1 on errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::acceptance;
use crate::geometry::{classify, dimension_report, ConeAngleVector, ConicSurfaceSpec};
use crate::indicial::{self, IndicialOperator};
use crate::liouville::{self, ConformalSolution, LiouvilleError, SolverOptions};
use crate::mode_spectral::{self, ModeEigenproblem, SpectralError};
use crate::model_metrics::{evaluate_model, Chart, ModelMetric};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_REJECTED: i32 = 2;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Rejected(String),
    #[error("{0}")]
    Failed(String),
    #[error("io error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Rejected(_) => EXIT_REJECTED,
            _ => EXIT_ERROR,
        }
    }
}

impl From<LiouvilleError> for RunError {
    fn from(e: LiouvilleError) -> Self {
        match e {
            LiouvilleError::NotUniformizable { .. } => Self::Rejected(e.to_string()),
            other => Self::Failed(other.to_string()),
        }
    }
}

impl From<SpectralError> for RunError {
    fn from(e: SpectralError) -> Self {
        Self::Failed(e.to_string())
    }
}

/// A cone parameter given as a number or as an exact fraction such as `"-1/2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaValue {
    Number(f64),
    Exact(String),
}

impl BetaValue {
    fn exact(&self) -> Result<Option<Rational64>, RunError> {
        match self {
            Self::Number(_) => Ok(None),
            Self::Exact(s) => s
                .trim()
                .parse::<Rational64>()
                .map(Some)
                .map_err(|_| RunError::Config(format!("cannot parse cone parameter {s:?} as a fraction"))),
        }
    }

    pub fn value(&self) -> Result<f64, RunError> {
        match self {
            Self::Number(x) => Ok(*x),
            Self::Exact(_) => {
                let q = self.exact()?.expect("exact");
                Ok(*q.numer() as f64 / *q.denom() as f64)
            }
        }
    }
}

/// Angles are exact when every entry is a fraction.
pub fn cone_angles(betas: &[BetaValue]) -> Result<ConeAngleVector, RunError> {
    let exact: Vec<Option<Rational64>> = betas.iter().map(|b| b.exact()).collect::<Result<_, _>>()?;
    let angles = if !exact.is_empty() && exact.iter().all(Option::is_some) {
        ConeAngleVector::from_rationals(exact.into_iter().flatten().collect())
    } else {
        ConeAngleVector::new(betas.iter().map(|b| b.value()).collect::<Result<_, _>>()?)
    };
    angles.map_err(|e| RunError::Config(e.to_string()))
}

/// A surface spec as read from JSON, with an optional solver block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub genus: u32,
    pub betas: Vec<BetaValue>,
    /// Unit vectors on the sphere, or `[x, y]` in the unit square for the torus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverOptions>,
}

impl SpecFile {
    pub fn to_spec(&self) -> Result<ConicSurfaceSpec, RunError> {
        let positions = self.positions.as_ref().map(|ps| points(ps)).transpose()?;
        ConicSurfaceSpec::new(self.genus, cone_angles(&self.betas)?, positions).map_err(|e| RunError::Config(e.to_string()))
    }
}

fn points(ps: &[Vec<f64>]) -> Result<Vec<[f64; 3]>, RunError> {
    ps.iter()
        .map(|p| match p.as_slice() {
            [x, y] => Ok([*x, *y, 0.0]),
            [x, y, z] => Ok([*x, *y, *z]),
            _ => Err(RunError::Config(format!("position {p:?} needs 2 or 3 coordinates"))),
        })
        .collect()
}

/// A path `β(t) = (1 − t)·from + t·to` sampled at `steps + 1` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub genus: u32,
    pub positions: Vec<Vec<f64>>,
    pub from: Vec<BetaValue>,
    pub to: Vec<BetaValue>,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverOptions>,
}

impl SweepFile {
    pub fn path(&self) -> Result<Vec<(f64, ConeAngleVector)>, RunError> {
        if self.from.len() != self.to.len() || self.steps == 0 {
            return Err(RunError::Config("sweep needs equal-length endpoints and steps >= 1".into()));
        }
        let exact = |v: &[BetaValue]| -> Result<Option<Vec<Rational64>>, RunError> {
            v.iter().map(|b| b.exact()).collect::<Result<Option<Vec<_>>, _>>()
        };
        let (a, b) = (exact(&self.from)?, exact(&self.to)?);
        (0..=self.steps)
            .map(|i| {
                let angles = match (&a, &b) {
                    (Some(a), Some(b)) => {
                        let t = Rational64::new(i as i64, self.steps as i64);
                        ConeAngleVector::from_rationals(a.iter().zip(b).map(|(p, q)| p + (q - p) * t).collect())
                    }
                    _ => {
                        let t = i as f64 / self.steps as f64;
                        let from: Vec<f64> = self.from.iter().map(|b| b.value()).collect::<Result<_, _>>()?;
                        let to: Vec<f64> = self.to.iter().map(|b| b.value()).collect::<Result<_, _>>()?;
                        ConeAngleVector::new(from.iter().zip(&to).map(|(p, q)| p + (q - p) * t).collect())
                    }
                };
                Ok((i as f64 / self.steps as f64, angles.map_err(|e| RunError::Config(e.to_string()))?))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumGeometry {
    Cone,
    Football,
    Cusp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    Classify {
        spec: SpecFile,
    },
    Model {
        beta: f64,
        curvature: f64,
        chart: Chart,
        r_min: f64,
        r_max: f64,
        samples: usize,
    },
    Indicial {
        operator: IndicialOperator,
        beta: f64,
        window: (f64, f64),
    },
    Spectrum {
        geometry: SpectrumGeometry,
        beta: f64,
        curvature: f64,
        modes: (i64, i64),
        count: usize,
        grid: usize,
        /// Dirichlet radius for cones and cusps.
        r_max: f64,
    },
    Uniformize {
        spec: SpecFile,
        /// CSV dump of the solved field.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        field: Option<PathBuf>,
    },
    Sweep {
        sweep: SweepFile,
    },
    Accept {
        criteria: Vec<u32>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Seeds the randomized parts of `accept`; other commands are deterministic.
    pub seed: u64,
}

/// How a reported number is established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimBasis {
    /// Identity that holds exactly, such as Gauss–Bonnet.
    Theorem,
    /// Direct evaluation of a closed form.
    Formula,
    /// Output of a numerical solve.
    Computed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    /// JSON pointer into the payload.
    pub pointer: String,
    pub basis: ClaimBasis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub tool_version: String,
    pub config: RunConfig,
    pub wall_time: f64,
    pub payload: Value,
    pub claims: Vec<Claim>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub envelope: ResultEnvelope,
    /// Tabular output of `model` and `spectrum`.
    pub csv: Option<String>,
    pub exit_code: i32,
}

fn claims(list: &[(&str, ClaimBasis)]) -> Vec<Claim> {
    list.iter().map(|(p, b)| Claim { pointer: p.to_string(), basis: *b }).collect()
}

/// Dispatches a config. Failures are reported in the envelope payload as
/// `{"error": ...}` with the matching exit code.
pub fn run(config: &RunConfig) -> RunOutcome {
    let start = Instant::now();
    let result = dispatch(config);
    let wall_time = start.elapsed().as_secs_f64();
    let (payload, claims, csv, exit_code) = match result {
        Ok(out) => {
            let code = out.exit_code;
            (out.payload, out.claims, out.csv, code)
        }
        Err(e) => {
            let kind = if e.exit_code() == EXIT_REJECTED { "rejected" } else { "error" };
            (json!({ kind: e.to_string() }), Vec::new(), None, e.exit_code())
        }
    };
    RunOutcome {
        envelope: ResultEnvelope { tool_version: env!("CARGO_PKG_VERSION").into(), config: config.clone(), wall_time, payload, claims },
        csv,
        exit_code,
    }
}

struct Dispatched {
    payload: Value,
    claims: Vec<Claim>,
    csv: Option<String>,
    exit_code: i32,
}

impl Dispatched {
    fn json(payload: Value, claims: Vec<Claim>) -> Self {
        Self { payload, claims, csv: None, exit_code: EXIT_OK }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn dispatch(config: &RunConfig) -> Result<Dispatched, RunError> {
    use ClaimBasis::*;
    match &config.command {
        Command::Classify { spec } => {
            let spec = spec.to_spec()?;
            let class = classify(&spec);
            let payload = json!({
                "tag": class.tag,
                "chi_beta": class.chi_beta,
                "violated_index": class.violated_index,
                "dimensions": dimension_report(&spec),
            });
            Ok(Dispatched::json(payload, claims(&[("/tag", Theorem), ("/chi_beta", Formula), ("/dimensions", Formula)])))
        }
        Command::Model { beta, curvature, chart, r_min, r_max, samples } => {
            let metric = ModelMetric::new(*beta, *curvature, *chart).map_err(|e| RunError::Config(e.to_string()))?;
            if *samples < 2 || !(r_min < r_max) {
                return Err(RunError::Config("model needs samples >= 2 and r_min < r_max".into()));
            }
            let mut csv = String::from("r,f,fp,curvature\n");
            let mut rows = Vec::new();
            for i in 0..*samples {
                let r = r_min + (r_max - r_min) * i as f64 / (*samples - 1) as f64;
                let s = evaluate_model(&metric, r).map_err(|e| RunError::Config(e.to_string()))?;
                writeln!(csv, "{:.16e},{:.16e},{:.16e},{:.16e}", s.r, s.f, s.fp, s.curvature()).expect("string write");
                rows.push(s);
            }
            Ok(Dispatched { payload: json!({ "samples": rows }), claims: claims(&[("/samples", Formula)]), csv: Some(csv), exit_code: EXIT_OK })
        }
        Command::Indicial { operator, beta, window } => {
            if !(*beta > -1.0 && *beta < 0.0) || !(window.0 <= window.1) {
                return Err(RunError::Config("indicial needs beta in (-1, 0) and lo <= hi".into()));
            }
            let table = indicial::root_table(*operator, *beta, *window);
            Ok(Dispatched::json(to_value(&table), claims(&[("/roots", Formula)])))
        }
        Command::Spectrum { geometry, beta, curvature, modes, count, grid, r_max } => {
            if modes.0 > modes.1 || *count == 0 {
                return Err(RunError::Config("spectrum needs lo <= hi modes and count >= 1".into()));
            }
            let problems = (modes.0..=modes.1)
                .map(|k| match geometry {
                    SpectrumGeometry::Cone => ModelMetric::new(*beta, *curvature, Chart::Polar)
                        .map_err(|e| SpectralError::InvalidProblem(e.to_string()))
                        .and_then(|m| ModeEigenproblem::cone(m, k, *r_max, *grid)),
                    SpectrumGeometry::Football => ModeEigenproblem::football(*beta, *curvature, k, *grid),
                    SpectrumGeometry::Cusp => ModeEigenproblem::cusp(k, 1e-3 * r_max, *r_max, *grid, 0.0),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut csv = String::from("mode,index,eigenvalue,error_bar\n");
            let mut results = Vec::new();
            for spectrum in mode_spectral::solve_modes(&problems, *count) {
                let spectrum = spectrum?;
                for e in &spectrum.eigenvalues {
                    writeln!(csv, "{},{},{:.16e},{:.16e}", e.mode, e.index, e.value, e.error_bar).expect("string write");
                }
                results.push(spectrum);
            }
            Ok(Dispatched { payload: to_value(&results), claims: claims(&[("", Computed)]), csv: Some(csv), exit_code: EXIT_OK })
        }
        Command::Uniformize { spec: file, field } => {
            let spec = file.to_spec()?;
            let options = file.solver.unwrap_or_default();
            let sol = liouville::uniformize(&spec, &options)?;
            let audit = liouville::exponent_audit(&sol).map(|f| to_value(&f)).unwrap_or_else(|e| json!({ "unavailable": e.to_string() }));
            if let Some(path) = field {
                write_atomically(path, &field_csv(&sol))?;
            }
            let payload = json!({
                "k_target": sol.k_target,
                "vertices": sol.background.mesh.vertex_count(),
                "diagnostics": sol.diagnostics,
                "newton_history": sol.newton_history,
                "exponents": audit,
            });
            Ok(Dispatched::json(
                payload,
                claims(&[("/k_target", Theorem), ("/diagnostics", Computed), ("/newton_history", Computed), ("/exponents", Computed)]),
            ))
        }
        Command::Sweep { sweep } => {
            let path = sweep.path()?;
            let positions = points(&sweep.positions)?;
            let report = liouville::family_sweep(sweep.genus, &positions, &path, &sweep.solver.unwrap_or_default())?;
            let exit_code = if report.rejected_at.is_some() { EXIT_REJECTED } else { EXIT_OK };
            Ok(Dispatched {
                payload: to_value(&report),
                claims: claims(&[("/points", Computed), ("/k_target_zero", Theorem), ("/curvature_zero", Computed)]),
                csv: None,
                exit_code,
            })
        }
        Command::Accept { criteria } => {
            let ids: Vec<u32> = if criteria.is_empty() { acceptance::CRITERIA.iter().map(|c| c.0).collect() } else { criteria.clone() };
            let results = acceptance::run(&ids, config.seed);
            let exit_code = if results.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_ERROR };
            Ok(Dispatched { payload: to_value(&results), claims: claims(&[("", Computed)]), csv: None, exit_code })
        }
    }
}

/// `vertex_id,x,y,z,phi` with 17 significant digits.
pub fn field_csv(sol: &ConformalSolution) -> String {
    let mut out = String::from("vertex_id,x,y,z,phi\n");
    for (i, (x, phi)) in sol.background.mesh.vertices.iter().zip(&sol.phi).enumerate() {
        writeln!(out, "{i},{:.16e},{:.16e},{:.16e},{:.16e}", x[0], x[1], x[2], phi).expect("string write");
    }
    out
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomically(path: &Path, contents: &str) -> Result<(), RunError> {
    let io = |e: std::io::Error| RunError::Io { path: path.to_path_buf(), message: e.to_string() };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

/// Parses a JSON document strictly, reporting line and column on failure.
pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, RunError> {
    serde_json::from_str(text).map_err(|e| RunError::Config(format!("{what}: {e}")))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    parse_json(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify_config(text: &str) -> RunConfig {
        RunConfig { command: Command::Classify { spec: parse_json(text, "spec").unwrap() }, seed: 0 }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = parse_json::<SpecFile>(r#"{"genus": 0, "betas": [-0.5], "postions": []}"#, "spec").unwrap_err();
        assert!(err.to_string().contains("unknown field `postions`"), "{err}");
        assert!(err.to_string().contains("line 1"), "{err}");
        let err = parse_json::<SpecFile>(r#"{"genus": 0, "betas": [], "solver": {"mesh_levle": 3}}"#, "spec").unwrap_err();
        assert!(err.to_string().contains("mesh_levle"));
    }

    #[test]
    fn exact_betas_are_rational() {
        let spec: SpecFile = parse_json(r#"{"genus": 0, "betas": ["-1/2", "-1/2", "-1/2", "-1/2"]}"#, "spec").unwrap();
        let spec = spec.to_spec().unwrap();
        assert!(spec.angles.exact().is_some());
        assert_eq!(classify(&spec).tag, crate::geometry::GeometryTag::Euclidean);
        let mixed: SpecFile = parse_json(r#"{"genus": 0, "betas": ["-1/2", -0.5]}"#, "spec").unwrap();
        assert!(mixed.to_spec().unwrap().angles.exact().is_none());
        assert!(parse_json::<SpecFile>(r#"{"genus": 0, "betas": ["half"]}"#, "spec").unwrap().to_spec().is_err());
    }

    #[test]
    fn classify_outside_region_succeeds() {
        let out = run(&classify_config(r#"{"genus": 0, "betas": [-0.8, -0.1, -0.1]}"#));
        assert_eq!(out.exit_code, EXIT_OK);
        assert_eq!(out.envelope.payload["tag"], "OutsideTroyanov");
        assert_eq!(out.envelope.payload["violated_index"], 1);
    }

    #[test]
    fn uniformize_rejection_exits_two() {
        let spec = parse_json(r#"{"genus": 0, "betas": [-0.3, -0.6], "positions": [[0,0,1],[0,0,-1]]}"#, "spec").unwrap();
        let out = run(&RunConfig { command: Command::Uniformize { spec, field: None }, seed: 0 });
        assert_eq!(out.exit_code, EXIT_REJECTED);
        assert!(out.envelope.payload["rejected"].as_str().unwrap().contains("TwoConeUnequal"));
    }

    #[test]
    fn envelope_round_trips() {
        let out = run(&classify_config(r#"{"genus": 2, "betas": [-0.25, "-1/3"], "positions": [[0,0,1],[1,0,0]]}"#));
        let text = serde_json::to_string(&out.envelope).unwrap();
        let back: ResultEnvelope = serde_json::from_str(&text).unwrap();
        assert_eq!(back, out.envelope);
    }

    #[test]
    fn config_round_trips_and_is_strict() {
        let text = r#"{"command": {"indicial": {"operator": "P", "beta": -0.5, "window": [-1.5, 1.5]}}, "seed": 3}"#;
        let config: RunConfig = parse_json(text, "config").unwrap();
        assert_eq!(config.seed, 3);
        let again: RunConfig = serde_json::from_str(&serde_json::to_string(&config).unwrap()).unwrap();
        assert_eq!(again, config);
        let out = run(&config);
        assert_eq!(out.exit_code, EXIT_OK);
        assert!(!out.envelope.payload["roots"].as_array().unwrap().is_empty());
        let typo = r#"{"command": {"indicial": {"operator": "P", "beta": -0.5, "windw": [-1.5, 1.5]}}, "seed": 3}"#;
        assert!(parse_json::<RunConfig>(typo, "config").unwrap_err().to_string().contains("windw"));
    }

    #[test]
    fn sweep_path_is_exact_for_fractions() {
        let sweep: SweepFile = parse_json(
            r#"{"genus": 0, "positions": [[0,0,1],[1,0,0],[0,1,0],[0,0,-1]], "from": ["-2/5","-2/5","-2/5","-2/5"], "to": ["-3/5","-3/5","-3/5","-3/5"], "steps": 10}"#,
            "sweep",
        )
        .unwrap();
        let path = sweep.path().unwrap();
        assert_eq!(path.len(), 11);
        assert_eq!(path[5].1.exact().unwrap()[0], Rational64::new(-1, 2));
    }

    #[test]
    fn model_csv_has_one_row_per_sample() {
        let config = RunConfig {
            command: Command::Model { beta: -0.5, curvature: 1.0, chart: Chart::Polar, r_min: 0.1, r_max: 3.0, samples: 5 },
            seed: 0,
        };
        let out = run(&config);
        assert_eq!(out.exit_code, EXIT_OK);
        assert_eq!(out.csv.unwrap().lines().count(), 6);
    }
}
