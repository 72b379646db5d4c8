//! Flat `key = value` configuration files.
//!
//! ```text
//! model = model1
//! cycles = 3.5, 12.5, 34.5
//!
//! [nondim]
//! re = 10
//! pe = 1000
//! p_f = 1
//! p_g = 5
//! p_beta = 1
//! p_gamma = 125.28
//! p_a = 0
//! p_b = 0
//! ```
//!
//! Sections: `[model]`, `[geometry]`, `[nondim]`, `[grid]`, `[integrator]`,
//! `[bc]`, `[output]`. Keys before the first section header are accepted for
//! `model` and `cycles`. `#` starts a comment. Unknown or repeated keys are
//! errors. Exactly one of `[geometry]` and `[nondim]` must be present.

use std::collections::BTreeMap;

use crate::constitutive::{ConstitutiveModel, ModelKind};
use crate::error::{Error, Result};
use crate::forcing::{AxialForcing, BcMode, WallMotion};
use crate::integrator::IntegratorConfig;
use crate::params::{NondimParams, PhysicalInputs};
use crate::residual::Drive;
use crate::study::{InputGroup, StudyConfig, DEFAULT_NODES};

const SECTIONS: [&str; 7] = ["model", "geometry", "nondim", "grid", "integrator", "bc", "output"];

fn allowed_keys(section: &str) -> &'static [&'static str] {
    match section {
        "" => &["model", "cycles"],
        "model" => &["kind", "alpha", "beta", "gamma", "sigma", "n"],
        "geometry" => &["r_i", "r_o", "omega_theta", "f_theta", "f_z", "a", "b", "rho_f", "mu0", "d_c"],
        "nondim" => &["re", "pe", "p_f", "p_g", "p_gamma", "p_beta", "p_a", "p_b"],
        "grid" => &["n_nodes"],
        "integrator" => &["rel_tol", "abs_tol", "newton_tol", "max_newton", "dt_init", "dt_max", "safety"],
        "bc" => &["mode", "c_tilde", "c_bar", "r_bar", "c_fixed", "wall_velocity", "axial_forcing"],
        "output" => &["cycles", "dir"],
        _ => &[],
    }
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

type Table = BTreeMap<String, BTreeMap<String, Entry>>;

fn tokenize(text: &str) -> Result<Table> {
    let mut table: Table = BTreeMap::new();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::ConfigParse {
                line: line_no,
                message: "unterminated section header".into(),
            })?;
            let name = name.trim().to_ascii_lowercase();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(Error::ConfigParse {
                    line: line_no,
                    message: format!("unknown section [{name}]"),
                });
            }
            if table.contains_key(&name) {
                return Err(Error::ConfigParse {
                    line: line_no,
                    message: format!("section [{name}] repeated"),
                });
            }
            table.insert(name.clone(), BTreeMap::new());
            section = name;
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigParse {
            line: line_no,
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(Error::ConfigParse {
                line: line_no,
                message: "empty key or value".into(),
            });
        }
        if !allowed_keys(&section).contains(&key.as_str()) {
            let place = if section.is_empty() {
                "top level".to_string()
            } else {
                format!("[{section}]")
            };
            return Err(Error::ConfigParse {
                line: line_no,
                message: format!("unknown key `{key}` in {place}"),
            });
        }
        let entries = table.entry(section.clone()).or_default();
        if entries.contains_key(&key) {
            return Err(Error::ConfigParse {
                line: line_no,
                message: format!("key `{key}` repeated"),
            });
        }
        entries.insert(
            key,
            Entry {
                value: value.to_string(),
                line: line_no,
            },
        );
    }
    Ok(table)
}

struct Section<'a> {
    name: &'static str,
    entries: Option<&'a BTreeMap<String, Entry>>,
}

impl<'a> Section<'a> {
    fn get(&self, key: &str) -> Option<&'a Entry> {
        self.entries.and_then(|e| e.get(key))
    }

    fn qualified(&self, key: &str) -> String {
        if self.name.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.name)
        }
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<f64>().map(Some).map_err(|_| Error::ConfigParse {
                line: e.line,
                message: format!("`{}` is not a number: `{}`", self.qualified(key), e.value),
            }),
        }
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.number(key)?.ok_or_else(|| Error::ConfigValidation {
            key: self.qualified(key),
            message: "missing".into(),
        })
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<usize>().map(Some).map_err(|_| Error::ConfigParse {
                line: e.line,
                message: format!("`{}` is not a non-negative integer: `{}`", self.qualified(key), e.value),
            }),
        }
    }
}

fn parse_cycles(entry: &Entry) -> Result<Vec<f64>> {
    entry
        .value
        .split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| Error::ConfigParse {
                line: entry.line,
                message: format!("bad cycle count `{}`", s.trim()),
            })
        })
        .collect()
}

/// Turns a parameter error into a validation error on `prefix.name`.
fn scoped(prefix: &'static str) -> impl Fn(Error) -> Error {
    move |err| match err {
        Error::Parameter { name, reason } => Error::ConfigValidation {
            key: if prefix.is_empty() {
                name.to_string()
            } else {
                format!("{prefix}.{name}")
            },
            message: reason,
        },
        other => other,
    }
}

/// Parsed configuration plus the optional output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub study: StudyConfig,
    pub output_dir: Option<String>,
}

pub fn parse_config(text: &str) -> Result<StudyConfig> {
    parse_config_full(text).map(|p| p.study)
}

pub fn parse_config_full(text: &str) -> Result<ParsedConfig> {
    let table = tokenize(text)?;
    let section = |name: &'static str| Section {
        name,
        entries: table.get(name),
    };
    let top = section("");
    let model_s = section("model");

    // model
    let kind_entry = match (top.get("model"), model_s.get("kind")) {
        (Some(_), Some(e)) => {
            return Err(Error::ConfigParse {
                line: e.line,
                message: "model given both at top level and in [model]".into(),
            })
        }
        (Some(e), None) | (None, Some(e)) => e,
        (None, None) => {
            return Err(Error::ConfigValidation {
                key: "model".into(),
                message: "missing".into(),
            })
        }
    };
    let kind: ModelKind = kind_entry.value.parse().map_err(|_| Error::ConfigParse {
        line: kind_entry.line,
        message: format!("unknown model `{}`", kind_entry.value),
    })?;
    let mut model = ConstitutiveModel::builtin(kind);
    if let Some(x) = model_s.number("alpha")? {
        model.alpha = x;
    }
    if let Some(x) = model_s.number("beta")? {
        model.beta = x;
    }
    if let Some(x) = model_s.number("gamma")? {
        model.gamma = x;
    }
    if let Some(x) = model_s.number("sigma")? {
        model.sigma = x;
    }
    if let Some(x) = model_s.number("n")? {
        model.n_const = x;
    }
    let check = model.validate();
    if let Some(v) = check.violations.first() {
        let key = if v.contains("gamma") { "model.gamma" } else { "model.beta" };
        return Err(Error::ConfigValidation {
            key: key.into(),
            message: v.clone(),
        });
    }

    // input group
    let inputs = match (table.contains_key("geometry"), table.contains_key("nondim")) {
        (true, true) | (false, false) => {
            return Err(Error::ConfigValidation {
                key: "geometry/nondim".into(),
                message: "exactly one input group must be given".into(),
            })
        }
        (true, false) => {
            let g = section("geometry");
            let f_theta = g.required("f_theta")?;
            let phys = PhysicalInputs {
                r_i: g.required("r_i")?,
                r_o: g.required("r_o")?,
                omega_theta: g.required("omega_theta")?,
                f_theta,
                f_z: g.number("f_z")?.unwrap_or(f_theta),
                a: g.number("a")?.unwrap_or(0.0),
                b: g.number("b")?.unwrap_or(0.0),
                rho_f: g.required("rho_f")?,
                mu0: g.required("mu0")?,
                d_c: g.required("d_c")?,
            };
            phys.derive_nondim(&model).map_err(scoped("geometry"))?;
            InputGroup::Physical(phys)
        }
        (false, true) => {
            let s = section("nondim");
            let p = NondimParams {
                re: s.required("re")?,
                pe: s.required("pe")?,
                p_f: s.required("p_f")?,
                p_g: s.required("p_g")?,
                p_gamma: s.required("p_gamma")?,
                p_beta: s.required("p_beta")?,
                p_a: s.required("p_a")?,
                p_b: s.required("p_b")?,
            };
            p.validate().map_err(scoped("nondim"))?;
            InputGroup::Nondim(p)
        }
    };

    // grid
    let n_nodes = section("grid").count("n_nodes")?.unwrap_or(DEFAULT_NODES);

    // integrator
    let is = section("integrator");
    let d = IntegratorConfig::default();
    let integrator = IntegratorConfig {
        rel_tol: is.number("rel_tol")?.unwrap_or(d.rel_tol),
        abs_tol: is.number("abs_tol")?.unwrap_or(d.abs_tol),
        newton_tol: is.number("newton_tol")?.unwrap_or(d.newton_tol),
        max_newton: is.count("max_newton")?.unwrap_or(d.max_newton),
        dt_init: is.number("dt_init")?.unwrap_or(d.dt_init),
        dt_max: is.number("dt_max")?.unwrap_or(d.dt_max),
        safety: is.number("safety")?.unwrap_or(d.safety),
    };
    integrator.validate().map_err(scoped("integrator"))?;

    // boundary conditions
    let bs = section("bc");
    let mode = bs.get("mode").map_or("ramp", |e| e.value.as_str());
    let bc = match mode {
        "ramp" => BcMode::Ramp,
        "feedback" | "feedback_switch" => BcMode::FeedbackSwitch {
            c_tilde: bs.number("c_tilde")?.unwrap_or(BcMode::DEFAULT_C_TILDE),
            c_bar: bs.number("c_bar")?.unwrap_or(BcMode::DEFAULT_C_BAR),
            r_bar: bs.number("r_bar")?.unwrap_or(BcMode::DEFAULT_R_BAR),
        },
        "fixed" => BcMode::Fixed(bs.required("c_fixed")?),
        other => {
            return Err(Error::ConfigParse {
                line: bs.get("mode").map_or(0, |e| e.line),
                message: format!("unknown bc mode `{other}` (ramp, feedback, fixed)"),
            })
        }
    };
    let feedback_keys = ["c_tilde", "c_bar", "r_bar"];
    for key in feedback_keys {
        if let (Some(e), false) = (bs.get(key), matches!(bc, BcMode::FeedbackSwitch { .. })) {
            return Err(Error::ConfigParse {
                line: e.line,
                message: format!("`bc.{key}` only applies to mode = feedback"),
            });
        }
    }
    if let (Some(e), false) = (bs.get("c_fixed"), matches!(bc, BcMode::Fixed(_))) {
        return Err(Error::ConfigParse {
            line: e.line,
            message: "`bc.c_fixed` only applies to mode = fixed".into(),
        });
    }
    bc.validate().map_err(scoped("bc"))?;
    let drive = Drive {
        wall: bs
            .number("wall_velocity")?
            .map_or(WallMotion::Oscillating, WallMotion::Steady),
        axial: bs
            .number("axial_forcing")?
            .map_or(AxialForcing::PressureGradient, AxialForcing::Steady),
    };

    // output
    let os = section("output");
    let cycles = match (top.get("cycles"), os.get("cycles")) {
        (Some(_), Some(e)) => {
            return Err(Error::ConfigParse {
                line: e.line,
                message: "cycles given both at top level and in [output]".into(),
            })
        }
        (Some(e), None) | (None, Some(e)) => parse_cycles(e)?,
        (None, None) => {
            return Err(Error::ConfigValidation {
                key: "cycles".into(),
                message: "missing".into(),
            })
        }
    };
    let output_dir = os.get("dir").map(|e| e.value.clone());

    let study = StudyConfig {
        model,
        inputs,
        n_nodes,
        integrator,
        bc,
        cycles,
        drive,
    };
    study.validate().map_err(scoped(""))?;
    Ok(ParsedConfig { study, output_dir })
}
