//! Scenario files.
//!
//! ```toml
//! [scenario]
//! x0_axis = [0.0, 0.0, 1.0]     # unperturbed rotation axis, |x0_axis| = |X0|
//! q_axis = [0.0, 0.0, 1.0]      # surviving symmetry axis, normalized on load
//! epsilons = [0.005, 0.01]      # strictly ascending, each in [0, epsilon_cap]
//! seeds = 50                    # limit-set survey size, 0 skips the survey
//!
//! [field]                       # either a builtin ...
//! builtin = "equatorial_trap"   # equatorial_trap | polar_shift | zero
//! epsilon_cap = 0.1             # optional, default 0.1
//!
//! # ... or a monomial table (component 1..=3 selects G1, G2, G3)
//! # [[field.terms]]
//! # component = 2
//! # exponents = [1, 0, 1]
//! # coefficient = 1.0
//!
//! [tolerances]                  # optional, any subset
//! rtol = 1e-10
//!
//! [output]
//! directory = "out"             # relative paths resolve against the config file
//! ```

use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{PerturbationField, Polynomial};
use crate::flows::{Scenario, Tolerances};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: RawScenario,
    field: RawField,
    #[serde(default)]
    tolerances: RawTolerances,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    x0_axis: [f64; 3],
    q_axis: [f64; 3],
    epsilons: Vec<f64>,
    #[serde(default)]
    seeds: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    builtin: Option<String>,
    #[serde(default)]
    terms: Vec<FieldTerm>,
    epsilon_cap: Option<f64>,
}

/// One monomial `coefficient * x1^a x2^b x3^c` of one field component.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FieldTerm {
    pub component: usize,
    pub exponents: [u32; 3],
    pub coefficient: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    rtol: Option<f64>,
    atol: Option<f64>,
    chart_tol: Option<f64>,
    newton: Option<f64>,
    quadrature: Option<f64>,
    phi_min: Option<f64>,
    chart_delta: Option<f64>,
    max_step_divisions: Option<f64>,
    scan_points: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default = "default_directory")]
    directory: PathBuf,
}

impl Default for RawOutput {
    fn default() -> Self {
        Self { directory: default_directory() }
    }
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

/// The field as written in the config, kept for the report echo.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSpec {
    Builtin(String),
    Terms(Vec<FieldTerm>),
}

/// A validated scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub x0_axis: Vector3<f64>,
    pub q_axis: Vector3<f64>,
    pub field_spec: FieldSpec,
    pub field: PerturbationField,
    pub epsilons: Vec<f64>,
    pub seeds: usize,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

fn finite3(field: &str, v: [f64; 3]) -> Result<Vector3<f64>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(invalid(field, "components must be finite"));
    }
    Ok(Vector3::from(v))
}

fn positive(field: &str, v: Option<f64>, default: f64) -> Result<f64> {
    match v {
        None => Ok(default),
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        Some(x) => Err(invalid(field, format!("must be positive and finite, got {x}"))),
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parses and validates config text; a relative output directory is joined onto `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;

        let x0_axis = finite3("scenario.x0_axis", raw.scenario.x0_axis)?;
        if x0_axis.norm() == 0.0 {
            return Err(invalid("scenario.x0_axis", "must be nonzero"));
        }
        let q_axis = finite3("scenario.q_axis", raw.scenario.q_axis)?;
        if !(q_axis.norm() > 1e-12) {
            return Err(invalid("scenario.q_axis", format!("norm {:e} is too small to normalize", q_axis.norm())));
        }

        let cap = match raw.field.epsilon_cap {
            None => None,
            Some(c) if c >= 0.0 && c.is_finite() => Some(c),
            Some(c) => return Err(invalid("field.epsilon_cap", format!("must be finite and >= 0, got {c}"))),
        };
        let (field_spec, field) = match (raw.field.builtin, raw.field.terms.is_empty()) {
            (Some(_), false) => return Err(invalid("field", "give either builtin or terms, not both")),
            (None, true) => return Err(invalid("field", "needs builtin or at least one [[field.terms]] entry")),
            (Some(name), true) => {
                let f = PerturbationField::builtin(&name)
                    .ok_or_else(|| invalid("field.builtin", format!("unknown builtin {name:?}")))?;
                (FieldSpec::Builtin(name), f)
            }
            (None, false) => {
                let mut g = [Polynomial::zero(), Polynomial::zero(), Polynomial::zero()];
                for (i, t) in raw.field.terms.iter().enumerate() {
                    if !(1..=3).contains(&t.component) {
                        return Err(invalid(&format!("field.terms[{i}].component"), "must be 1, 2 or 3"));
                    }
                    if !t.coefficient.is_finite() {
                        return Err(invalid(&format!("field.terms[{i}].coefficient"), "must be finite"));
                    }
                    g[t.component - 1].add_term(t.exponents, t.coefficient);
                }
                let [g1, g2, g3] = g;
                let f = PerturbationField::new(g1, g2, g3, PerturbationField::zero().epsilon_cap())
                    .map_err(|e| invalid("field.terms", e))?;
                (FieldSpec::Terms(raw.field.terms), f)
            }
        };
        let field = match cap {
            Some(c) => field.with_epsilon_cap(c),
            None => field,
        };

        let epsilons = raw.scenario.epsilons;
        if epsilons.is_empty() {
            return Err(invalid("scenario.epsilons", "must list at least one value"));
        }
        for (i, e) in epsilons.iter().enumerate() {
            if !(*e >= 0.0 && *e <= field.epsilon_cap()) {
                return Err(invalid(
                    "scenario.epsilons",
                    format!("entry {i} = {e} outside [0, {}]", field.epsilon_cap()),
                ));
            }
        }
        if epsilons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("scenario.epsilons", "must be strictly ascending"));
        }

        let d = Tolerances::default();
        let t = raw.tolerances;
        let phi_min = positive("tolerances.phi_min", t.phi_min, d.phi_min)?;
        if phi_min >= std::f64::consts::FRAC_PI_2 {
            return Err(invalid("tolerances.phi_min", "must be below pi/2"));
        }
        let scan_points = t.scan_points.unwrap_or(d.scan_points);
        if scan_points < 2 {
            return Err(invalid("tolerances.scan_points", "must be at least 2"));
        }
        let tolerances = Tolerances {
            rtol: positive("tolerances.rtol", t.rtol, d.rtol)?,
            atol: positive("tolerances.atol", t.atol, d.atol)?,
            chart_tol: positive("tolerances.chart_tol", t.chart_tol, d.chart_tol)?,
            newton: positive("tolerances.newton", t.newton, d.newton)?,
            quadrature: positive("tolerances.quadrature", t.quadrature, d.quadrature)?,
            phi_min,
            chart_delta: positive("tolerances.chart_delta", t.chart_delta, d.chart_delta)?,
            max_step_divisions: positive("tolerances.max_step_divisions", t.max_step_divisions, d.max_step_divisions)?,
            scan_points,
        };

        let dir = raw.output.directory;
        let output_dir = if dir.is_absolute() { dir } else { base_dir.join(dir) };

        Ok(Self {
            x0_axis,
            q_axis,
            field_spec,
            field,
            epsilons,
            seeds: raw.scenario.seeds,
            tolerances,
            output_dir,
        })
    }

    /// The scenario at `eps`.
    pub fn scenario(&self, eps: f64) -> Result<Scenario> {
        Ok(Scenario::from_rates(self.x0_axis, self.q_axis, self.field.clone(), eps)?.with_tolerances(self.tolerances))
    }
}
