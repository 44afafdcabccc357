//! Problem files: a jet space, named entities and one command.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use jetsym::dynsys::DynamicalSystem;
use jetsym::gauge::{mu_from_gauge, sigma_from_gauge};
use jetsym::prolong::TwistData;
use jetsym::symmetry::DiffEq;
use jetsym::variational::Lagrangian;
use jetsym::{Expr, JetSpace, Matrix, Oracle, VectorField};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Malformed input: exit code 2.
#[derive(Debug)]
pub struct InputError {
    pub file: String,
    pub line: Option<usize>,
    pub entity: String,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}: {}", self.file, line, self.entity, self.message),
            None => write!(f, "{}: {}: {}", self.file, self.entity, self.message),
        }
    }
}

impl std::error::Error for InputError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDecl {
    pub independent: Vec<String>,
    pub dependent: Vec<String>,
    pub order: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDecl {
    /// Omitted for vertical fields.
    #[serde(default)]
    pub xi: Vec<String>,
    pub phi: Vec<String>,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TwistDecl {
    Lambda(String),
    /// One matrix per independent variable.
    Mu(Vec<Vec<Vec<String>>>),
    Sigma(Vec<Vec<String>>),
    /// `A⁻¹ D_i A` for a declared matrix.
    MuGauge(String),
    SigmaGauge(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationDecl {
    pub lead: String,
    pub rhs: String,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OracleDecl {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CommandDecl {
    pub op: String,
    #[serde(default)]
    pub args: serde_json::Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    space: SpaceDecl,
    #[serde(default)]
    fields: BTreeMap<String, FieldDecl>,
    #[serde(default)]
    twists: BTreeMap<String, TwistDecl>,
    #[serde(default)]
    equations: BTreeMap<String, Vec<EquationDecl>>,
    #[serde(default)]
    lagrangians: BTreeMap<String, String>,
    #[serde(default)]
    matrices: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default)]
    systems: BTreeMap<String, Vec<String>>,
    /// Lists of field names.
    #[serde(default)]
    algebras: BTreeMap<String, Vec<String>>,
    command: Option<CommandDecl>,
    oracle: Option<OracleDecl>,
}

/// Parsed and validated problem file.
pub struct Problem {
    file: String,
    text: String,
    pub space: JetSpace,
    pub fields: BTreeMap<String, VectorField>,
    pub twists: BTreeMap<String, TwistData>,
    pub equations: BTreeMap<String, DiffEq>,
    pub lagrangians: BTreeMap<String, Lagrangian>,
    pub matrices: BTreeMap<String, Matrix>,
    pub systems: BTreeMap<String, DynamicalSystem>,
    pub algebras: BTreeMap<String, Vec<String>>,
    pub command: Option<CommandDecl>,
    pub oracle: OracleDecl,
}

impl Problem {
    pub fn load(path: &Path) -> Result<Problem, InputError> {
        let file = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| InputError {
            file: file.clone(),
            line: None,
            entity: "file".into(),
            message: e.to_string(),
        })?;
        Problem::from_text(&file, text)
    }

    pub fn from_text(file: &str, text: String) -> Result<Problem, InputError> {
        let raw: RawProblem = serde_json::from_str(&text).map_err(|e| InputError {
            file: file.into(),
            line: Some(e.line()),
            entity: "problem".into(),
            message: e.to_string(),
        })?;
        let mut p = Problem {
            file: file.into(),
            text,
            space: JetSpace::new(&["x"], &["u"], 0).expect("trivial space"),
            fields: BTreeMap::new(),
            twists: BTreeMap::new(),
            equations: BTreeMap::new(),
            lagrangians: BTreeMap::new(),
            matrices: BTreeMap::new(),
            systems: BTreeMap::new(),
            algebras: raw.algebras,
            command: raw.command,
            oracle: raw.oracle.unwrap_or_default(),
        };
        let indep: Vec<&str> = raw.space.independent.iter().map(String::as_str).collect();
        let dep: Vec<&str> = raw.space.dependent.iter().map(String::as_str).collect();
        p.space = JetSpace::new(&indep, &dep, raw.space.order).map_err(|e| p.error("space", e))?;

        for (name, m) in &raw.matrices {
            let rows = m
                .iter()
                .map(|row| row.iter().map(|t| p.expr(name, t)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            let mat = Matrix::from_rows(rows).map_err(|e| p.error(name, e))?;
            p.matrices.insert(name.clone(), mat);
        }
        for (name, f) in &raw.fields {
            let xi = if f.xi.is_empty() {
                vec![Expr::zero(); p.space.n()]
            } else {
                f.xi.iter().map(|t| p.expr(name, t)).collect::<Result<_, _>>()?
            };
            let phi = f.phi.iter().map(|t| p.expr(name, t)).collect::<Result<_, _>>()?;
            let field = VectorField::new(&p.space, xi, phi).map_err(|e| p.error(name, e))?;
            p.fields.insert(name.clone(), field);
        }
        for (name, eqs) in &raw.equations {
            let pairs: Vec<(&str, &str)> = eqs.iter().map(|e| (e.lead.as_str(), e.rhs.as_str())).collect();
            let eq = DiffEq::parse(&p.space, &pairs).map_err(|e| p.error(name, e))?;
            p.equations.insert(name.clone(), eq);
        }
        for (name, text) in &raw.lagrangians {
            let l = Lagrangian::new(&p.space, p.expr(name, text)?).map_err(|e| p.error(name, e))?;
            p.lagrangians.insert(name.clone(), l);
        }
        for (name, rhs) in &raw.systems {
            let f = rhs.iter().map(|t| p.expr(name, t)).collect::<Result<_, _>>()?;
            let ds = DynamicalSystem::new(&p.space, f).map_err(|e| p.error(name, e))?;
            p.systems.insert(name.clone(), ds);
        }
        for (name, members) in &p.algebras {
            if let Some(missing) = members.iter().find(|m| !p.fields.contains_key(*m)) {
                return Err(p.error(name, format!("undefined field `{missing}`")));
            }
        }
        let oracle = p.oracle();
        for (name, t) in raw.twists {
            let twist = match t {
                TwistDecl::Lambda(text) => TwistData::Lambda(p.expr(&name, &text)?),
                TwistDecl::Mu(ms) => TwistData::Mu(
                    ms.iter()
                        .map(|m| {
                            let rows = m
                                .iter()
                                .map(|row| row.iter().map(|t| p.expr(&name, t)).collect::<Result<Vec<_>, _>>())
                                .collect::<Result<Vec<_>, _>>()?;
                            Matrix::from_rows(rows).map_err(|e| p.error(&name, e))
                        })
                        .collect::<Result<_, _>>()?,
                ),
                TwistDecl::Sigma(rows) => {
                    let rows = rows
                        .iter()
                        .map(|row| row.iter().map(|t| p.expr(&name, t)).collect::<Result<Vec<_>, _>>())
                        .collect::<Result<Vec<_>, _>>()?;
                    TwistData::Sigma(Matrix::from_rows(rows).map_err(|e| p.error(&name, e))?)
                }
                TwistDecl::MuGauge(m) => {
                    let a = p.matrix(&m)?;
                    mu_from_gauge(a, &p.space, &oracle).map_err(|e| p.error(&name, e))?
                }
                TwistDecl::SigmaGauge(m) => {
                    let a = p.matrix(&m)?;
                    sigma_from_gauge(a, &p.space, &oracle).map_err(|e| p.error(&name, e))?
                }
            };
            twist.validate(&p.space).map_err(|e| p.error(&name, e))?;
            p.twists.insert(name, twist);
        }
        Ok(p)
    }

    /// Oracle settings from the file, with the environment seed as default.
    pub fn oracle(&self) -> Oracle {
        let base = default_oracle();
        Oracle::new(
            self.oracle.seed.unwrap_or(base.seed),
            self.oracle.trials.unwrap_or(base.trials),
            self.oracle.tol.unwrap_or(base.tol),
        )
    }

    fn line_of(&self, entity: &str) -> Option<usize> {
        let key = format!("\"{entity}\"");
        self.text.lines().position(|l| l.contains(&key)).map(|i| i + 1)
    }

    pub fn error(&self, entity: &str, message: impl fmt::Display) -> InputError {
        InputError { file: self.file.clone(), line: self.line_of(entity), entity: entity.into(), message: message.to_string() }
    }

    /// Parse an expression belonging to `entity`.
    pub fn expr(&self, entity: &str, text: &str) -> Result<Expr, InputError> {
        self.space.parse(text).map_err(|e| self.error(entity, format!("in `{text}`: {e}")))
    }

    pub fn field(&self, name: &str) -> Result<&VectorField, InputError> {
        self.fields.get(name).ok_or_else(|| self.error(name, "undefined field"))
    }

    pub fn twist(&self, name: &str) -> Result<&TwistData, InputError> {
        self.twists.get(name).ok_or_else(|| self.error(name, "undefined twist"))
    }

    pub fn equation(&self, name: &str) -> Result<&DiffEq, InputError> {
        self.equations.get(name).ok_or_else(|| self.error(name, "undefined equation"))
    }

    pub fn lagrangian(&self, name: &str) -> Result<&Lagrangian, InputError> {
        self.lagrangians.get(name).ok_or_else(|| self.error(name, "undefined Lagrangian"))
    }

    pub fn matrix(&self, name: &str) -> Result<&Matrix, InputError> {
        self.matrices.get(name).ok_or_else(|| self.error(name, "undefined matrix"))
    }

    pub fn system(&self, name: &str) -> Result<&DynamicalSystem, InputError> {
        self.systems.get(name).ok_or_else(|| self.error(name, "undefined system"))
    }

    /// Fields named directly, or through an algebra of that name.
    pub fn field_list(&self, names: &[String]) -> Result<Vec<VectorField>, InputError> {
        if let [single] = names {
            if let Some(members) = self.algebras.get(single) {
                return members.iter().map(|m| self.field(m).cloned()).collect();
            }
        }
        names.iter().map(|n| self.field(n).cloned()).collect()
    }

    /// Deserialize the command arguments.
    pub fn args<T: DeserializeOwned>(&self, args: &serde_json::Value) -> Result<T, InputError> {
        let value = if args.is_null() { serde_json::Value::Object(Default::default()) } else { args.clone() };
        serde_json::from_value(value).map_err(|e| self.error("args", e))
    }
}

/// Built-in oracle, with `JETSYM_SEED` overriding the default seed.
pub fn default_oracle() -> Oracle {
    let o = Oracle::default();
    match std::env::var("JETSYM_SEED").ok().and_then(|s| s.trim().parse().ok()) {
        Some(seed) => o.with_seed(seed),
        None => o,
    }
}
