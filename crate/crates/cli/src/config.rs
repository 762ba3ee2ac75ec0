//! Suite configuration: a single versioned JSON document declaring named
//! objects and the checks to run against them.
//!
//! Loading happens in two passes. The document is first deserialized into
//! raw structs (unknown fields rejected, with the JSON path of any problem),
//! then every name is resolved and every expression parsed and bound to its
//! patch dimensions.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use conncurv::bundle::{BundlePatch, ChristoffelField, FiberBundleMorphism, Section, DERIVATIVE_TOL};
use conncurv::expr::{parse, Dims, Expr};
use conncurv::lie::{AlgebraElement, MatrixLieAlgebra};
use conncurv::linear::{LinearChristoffel, DEFAULT_LAMBDAS};
use conncurv::principal::GaugePotential;
use nalgebra::DMatrix;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const CONFIG_VERSION: u32 = 1;
/// Environment variable multiplying every tolerance.
pub const TOL_SCALE_VAR: &str = "CONNCURV_TOL_SCALE";
const DEFAULT_SAMPLES: usize = 10;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}: at `{field}`: {message}")]
    Schema { file: String, field: String, message: String },

    #[error("{file}: at `{field}`: in `{expr}`: {source}")]
    Expression {
        file: String,
        field: String,
        expr: String,
        #[source]
        source: conncurv::Error,
    },

    #[error("{TOL_SCALE_VAR}: expected a positive number, got `{0}`")]
    TolScale(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    CurvatureCoefficients,
    NijenhuisVsCoefficients,
    CommutatorIdentity,
    ThetaEquivariance,
    ParallelMorphism,
    ConnectionAxiom,
    CartanCrossCheck,
    BchTheta,
    Linearity,
    LinearConsistency,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::CurvatureCoefficients => "curvature-coefficients",
            CheckKind::NijenhuisVsCoefficients => "nijenhuis-vs-coefficients",
            CheckKind::CommutatorIdentity => "commutator-identity",
            CheckKind::ThetaEquivariance => "theta-equivariance",
            CheckKind::ParallelMorphism => "parallel-morphism",
            CheckKind::ConnectionAxiom => "connection-axiom",
            CheckKind::CartanCrossCheck => "cartan-cross-check",
            CheckKind::BchTheta => "bch-theta",
            CheckKind::Linearity => "linearity",
            CheckKind::LinearConsistency => "linear-consistency",
        }
    }

    fn default_tolerance(self) -> f64 {
        match self {
            CheckKind::CurvatureCoefficients
            | CheckKind::NijenhuisVsCoefficients
            | CheckKind::CommutatorIdentity
            | CheckKind::ThetaEquivariance
            | CheckKind::ParallelMorphism
            | CheckKind::Linearity
            | CheckKind::LinearConsistency => DERIVATIVE_TOL,
            CheckKind::ConnectionAxiom => 1e-8,
            CheckKind::CartanCrossCheck => 1e-6,
            CheckKind::BchTheta => 1e-4,
        }
    }

    /// Optional fields this kind accepts besides the common ones.
    fn fields(self) -> &'static [&'static str] {
        match self {
            CheckKind::CurvatureCoefficients => &["connection", "expected", "expect_flat"],
            CheckKind::NijenhuisVsCoefficients => &["connection", "random"],
            CheckKind::CommutatorIdentity => &["connection", "section", "random"],
            CheckKind::ThetaEquivariance => &["bundle", "transition", "random"],
            CheckKind::ParallelMorphism => &["morphism", "connection", "target_connection"],
            CheckKind::ConnectionAxiom => &["potential", "drop_adjoint"],
            CheckKind::CartanCrossCheck => &["potential"],
            CheckKind::BchTheta => &["algebra", "x", "y", "z"],
            CheckKind::Linearity => &["connection", "lambdas"],
            CheckKind::LinearConsistency => &["linear_connection", "random"],
        }
    }
}

/// Whether a check asserts that its identity holds or, as a negative
/// control, that it is violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    #[default]
    Hold,
    Violated,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: u32,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    bundles: BTreeMap<String, RawBundle>,
    #[serde(default)]
    connections: BTreeMap<String, RawConnection>,
    #[serde(default)]
    sections: BTreeMap<String, RawSection>,
    #[serde(default)]
    linear_connections: BTreeMap<String, RawLinear>,
    #[serde(default)]
    morphisms: BTreeMap<String, RawMorphism>,
    #[serde(default)]
    algebras: BTreeMap<String, RawAlgebra>,
    #[serde(default)]
    potentials: BTreeMap<String, RawPotential>,
    #[serde(default)]
    checks: Vec<RawCheck>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBundle {
    m: usize,
    n: usize,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConnection {
    bundle: String,
    gamma: Vec<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSection {
    bundle: String,
    comps: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLinear {
    bundle: String,
    gamma: Vec<Vec<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMorphism {
    source: String,
    target: String,
    comps: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgebra {
    basis: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    algebra: String,
    m: usize,
    components: Vec<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExpected {
    alpha: usize,
    mu: usize,
    nu: usize,
    value: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheck {
    name: String,
    kind: CheckKind,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    expect: Expect,
    connection: Option<String>,
    target_connection: Option<String>,
    section: Option<String>,
    bundle: Option<String>,
    morphism: Option<String>,
    potential: Option<String>,
    algebra: Option<String>,
    linear_connection: Option<String>,
    transition: Option<Vec<String>>,
    random: Option<usize>,
    lambdas: Option<Vec<f64>>,
    drop_adjoint: Option<bool>,
    expected: Option<Vec<RawExpected>>,
    expect_flat: Option<bool>,
    x: Option<Vec<f64>>,
    y: Option<Vec<f64>>,
    z: Option<Vec<f64>>,
}

impl RawCheck {
    fn present_fields(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut note = |name, present: bool| {
            if present {
                out.push(name)
            }
        };
        note("connection", self.connection.is_some());
        note("target_connection", self.target_connection.is_some());
        note("section", self.section.is_some());
        note("bundle", self.bundle.is_some());
        note("morphism", self.morphism.is_some());
        note("potential", self.potential.is_some());
        note("algebra", self.algebra.is_some());
        note("linear_connection", self.linear_connection.is_some());
        note("transition", self.transition.is_some());
        note("random", self.random.is_some());
        note("lambdas", self.lambdas.is_some());
        note("drop_adjoint", self.drop_adjoint.is_some());
        note("expected", self.expected.is_some());
        note("expect_flat", self.expect_flat.is_some());
        note("x", self.x.is_some());
        note("y", self.y.is_some());
        note("z", self.z.is_some());
        out
    }
}

/// A connection given by name or drawn at random per check.
#[derive(Debug, Clone, PartialEq)]
pub enum Family<T> {
    Named(T),
    /// Number of random instances, patch dimensions in `1..=3`.
    Random(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    CurvatureCoefficients {
        connection: ChristoffelField,
        /// Zero-based `(α, μ, ν, value)`.
        expected: Vec<(usize, usize, usize, f64)>,
        expect_flat: bool,
    },
    NijenhuisVsCoefficients(Family<ChristoffelField>),
    CommutatorIdentity {
        family: Family<ChristoffelField>,
        section: Option<Section>,
    },
    /// Transitions with the base dimension they act over.
    ThetaEquivariance(Family<(usize, Vec<Expr>)>),
    ParallelMorphism {
        morphism: FiberBundleMorphism,
        source: ChristoffelField,
        target: ChristoffelField,
    },
    ConnectionAxiom {
        potential: GaugePotential,
        drop_adjoint: bool,
    },
    CartanCrossCheck(GaugePotential),
    BchTheta {
        algebra: MatrixLieAlgebra,
        xyz: Option<[AlgebraElement; 3]>,
    },
    Linearity {
        connection: ChristoffelField,
        lambdas: Vec<f64>,
    },
    LinearConsistency(Family<LinearChristoffel>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSpec {
    pub name: String,
    pub kind: CheckKind,
    pub samples: usize,
    /// Tolerance after applying the environment scale.
    pub tolerance: f64,
    pub expect: Expect,
    pub target: Target,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub version: u32,
    pub seed: u64,
    /// Hex SHA-256 of the document bytes.
    pub digest: String,
    pub checks: Vec<CheckSpec>,
}

/// Reads the tolerance scale from the environment (1 when unset).
pub fn tolerance_scale_from_env() -> Result<f64, ConfigError> {
    match std::env::var(TOL_SCALE_VAR) {
        Err(_) => Ok(1.0),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
            _ => Err(ConfigError::TolScale(s)),
        },
    }
}

pub fn load_config(path: &Path) -> Result<SuiteConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, &path.display().to_string(), tolerance_scale_from_env()?)
}

/// Parses and validates a config document; `file` only labels diagnostics.
pub fn parse_config(text: &str, file: &str, tol_scale: f64) -> Result<SuiteConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
        file: file.to_string(),
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let digest = Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    Resolver { file, raw: &raw, tol_scale }.resolve(digest)
}

struct Resolver<'a> {
    file: &'a str,
    raw: &'a RawConfig,
    tol_scale: f64,
}

impl Resolver<'_> {
    fn schema<T>(&self, field: impl Into<String>, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError::Schema {
            file: self.file.to_string(),
            field: field.into(),
            message: message.into(),
        })
    }

    fn lib<T>(&self, field: &str, r: conncurv::Result<T>) -> Result<T, ConfigError> {
        r.or_else(|e| self.schema(field, e.to_string()))
    }

    fn expr(&self, field: &str, src: &str, dims: Dims) -> Result<Expr, ConfigError> {
        parse(src, dims).map_err(|source| ConfigError::Expression {
            file: self.file.to_string(),
            field: field.to_string(),
            expr: src.to_string(),
            source,
        })
    }

    fn lookup<'b, T>(&self, map: &'b BTreeMap<String, T>, what: &str, name: &str, field: &str) -> Result<&'b T, ConfigError> {
        match map.get(name) {
            Some(v) => Ok(v),
            None => self.schema(field, format!("undeclared {what} `{name}`")),
        }
    }

    fn bundle(&self, name: &str, field: &str) -> Result<BundlePatch, ConfigError> {
        let b = self.lookup(&self.raw.bundles, "bundle", name, field)?;
        let path = format!("bundles.{name}");
        let patch = self.lib(&path, BundlePatch::new(b.m, b.n))?;
        match &b.labels {
            Some(l) => self.lib(&format!("{path}.labels"), patch.with_labels(l.clone())),
            None => Ok(patch),
        }
    }

    fn connection(&self, name: &str, field: &str) -> Result<ChristoffelField, ConfigError> {
        let c = self.lookup(&self.raw.connections, "connection", name, field)?;
        let path = format!("connections.{name}");
        let patch = self.bundle(&c.bundle, &format!("{path}.bundle"))?;
        if c.gamma.len() != patch.n || c.gamma.iter().any(|r| r.len() != patch.m) {
            return self.schema(
                format!("{path}.gamma"),
                format!("expected {} rows (fiber) of {} entries (base)", patch.n, patch.m),
            );
        }
        let mut gamma = Vec::new();
        for (a, row) in c.gamma.iter().enumerate() {
            let mut out = Vec::new();
            for (mu, src) in row.iter().enumerate() {
                out.push(self.expr(&format!("{path}.gamma[{a}][{mu}]"), src, patch.dims())?);
            }
            gamma.push(out);
        }
        self.lib(&path, ChristoffelField::new(patch, gamma))
    }

    fn section(&self, name: &str, field: &str) -> Result<Section, ConfigError> {
        let s = self.lookup(&self.raw.sections, "section", name, field)?;
        let path = format!("sections.{name}");
        let patch = self.bundle(&s.bundle, &format!("{path}.bundle"))?;
        let dims = Dims::new(patch.m, 0);
        let comps = s
            .comps
            .iter()
            .enumerate()
            .map(|(a, src)| self.expr(&format!("{path}.comps[{a}]"), src, dims))
            .collect::<Result<Vec<_>, _>>()?;
        self.lib(&path, Section::new(patch, comps))
    }

    fn linear(&self, name: &str, field: &str) -> Result<LinearChristoffel, ConfigError> {
        let l = self.lookup(&self.raw.linear_connections, "linear connection", name, field)?;
        let path = format!("linear_connections.{name}");
        let patch = self.bundle(&l.bundle, &format!("{path}.bundle"))?;
        let dims = Dims::new(patch.m, 0);
        let mut gamma3 = Vec::new();
        for (a, block) in l.gamma.iter().enumerate() {
            let mut rows = Vec::new();
            for (mu, row) in block.iter().enumerate() {
                let mut out = Vec::new();
                for (w, src) in row.iter().enumerate() {
                    out.push(self.expr(&format!("{path}.gamma[{a}][{mu}][{w}]"), src, dims)?);
                }
                rows.push(out);
            }
            gamma3.push(rows);
        }
        self.lib(&format!("{path}.gamma"), LinearChristoffel::new(patch, gamma3))
    }

    fn morphism(&self, name: &str, field: &str) -> Result<FiberBundleMorphism, ConfigError> {
        let mo = self.lookup(&self.raw.morphisms, "morphism", name, field)?;
        let path = format!("morphisms.{name}");
        let source = self.bundle(&mo.source, &format!("{path}.source"))?;
        let target = self.bundle(&mo.target, &format!("{path}.target"))?;
        let comps = mo
            .comps
            .iter()
            .enumerate()
            .map(|(a, src)| self.expr(&format!("{path}.comps[{a}]"), src, source.dims()))
            .collect::<Result<Vec<_>, _>>()?;
        self.lib(&path, FiberBundleMorphism::new(source, target, comps))
    }

    fn algebra(&self, name: &str, field: &str) -> Result<MatrixLieAlgebra, ConfigError> {
        if let Some(a) = self.raw.algebras.get(name) {
            let path = format!("algebras.{name}.basis");
            let mut basis = Vec::new();
            for (i, rows) in a.basis.iter().enumerate() {
                let d = rows.len();
                if d == 0 || rows.iter().any(|r| r.len() != d) {
                    return self.schema(format!("{path}[{i}]"), "basis matrices must be square, given as rows");
                }
                basis.push(DMatrix::from_row_iterator(d, d, rows.iter().flatten().copied()));
            }
            return self.lib(&path, MatrixLieAlgebra::new(name, basis));
        }
        match MatrixLieAlgebra::builtin(name) {
            Some(a) => Ok(a),
            None => self.schema(field, format!("undeclared algebra `{name}` (built-ins: so2, so3, sl2)")),
        }
    }

    fn potential(&self, name: &str, field: &str) -> Result<GaugePotential, ConfigError> {
        let p = self.lookup(&self.raw.potentials, "potential", name, field)?;
        let path = format!("potentials.{name}");
        let algebra = self.algebra(&p.algebra, &format!("{path}.algebra"))?;
        if p.components.len() != algebra.k || p.components.iter().any(|r| r.len() != p.m) {
            return self.schema(
                format!("{path}.components"),
                format!("expected {} rows (algebra) of {} entries (base)", algebra.k, p.m),
            );
        }
        let dims = Dims::new(p.m, 0);
        let mut comps = Vec::new();
        for (a, row) in p.components.iter().enumerate() {
            let mut out = Vec::new();
            for (mu, src) in row.iter().enumerate() {
                out.push(self.expr(&format!("{path}.components[{a}][{mu}]"), src, dims)?);
            }
            comps.push(out);
        }
        self.lib(&path, GaugePotential::new(algebra, p.m, comps))
    }

    fn required<'b>(&self, v: &'b Option<String>, field: String) -> Result<&'b str, ConfigError> {
        match v {
            Some(s) => Ok(s),
            None => self.schema(field, "missing required field"),
        }
    }

    fn family<T>(
        &self,
        named: &Option<String>,
        random: Option<usize>,
        field: &str,
        key: &str,
        load: impl Fn(&str, &str) -> Result<T, ConfigError>,
    ) -> Result<Family<T>, ConfigError> {
        match (named, random) {
            (Some(name), None) => Ok(Family::Named(load(name, &format!("{field}.{key}"))?)),
            (None, Some(count)) if count > 0 => Ok(Family::Random(count)),
            (None, Some(_)) => self.schema(format!("{field}.random"), "must be positive"),
            (Some(_), Some(_)) => self.schema(field, format!("give either `{key}` or `random`, not both")),
            (None, None) => self.schema(field, format!("missing `{key}` (or `random`)")),
        }
    }

    fn element(&self, alg: &MatrixLieAlgebra, v: &[f64], field: String) -> Result<AlgebraElement, ConfigError> {
        if v.len() != alg.k {
            return self.schema(field, format!("expected {} coefficients", alg.k));
        }
        Ok(AlgebraElement::new(v.to_vec()))
    }

    fn check(&self, i: usize, c: &RawCheck) -> Result<CheckSpec, ConfigError> {
        let field = format!("checks[{i}]");
        let allowed = c.kind.fields();
        if let Some(extra) = c.present_fields().into_iter().find(|f| !allowed.contains(f)) {
            return self.schema(
                format!("{field}.{extra}"),
                format!("not a field of `{}` checks", c.kind.as_str()),
            );
        }
        let tolerance = c.tolerance.unwrap_or_else(|| c.kind.default_tolerance());
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return self.schema(format!("{field}.tolerance"), "must be a positive number");
        }
        let samples = c.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return self.schema(format!("{field}.samples"), "must be positive");
        }
        let f = |k: &str| format!("{field}.{k}");
        let target = match c.kind {
            CheckKind::CurvatureCoefficients => {
                let connection = self.connection(self.required(&c.connection, f("connection"))?, &f("connection"))?;
                let mut expected = Vec::new();
                for (j, e) in c.expected.iter().flatten().enumerate() {
                    let (n, m) = (connection.n(), connection.m());
                    if !(1..=n).contains(&e.alpha) || !(1..=m).contains(&e.mu) || !(1..=m).contains(&e.nu) {
                        return self.schema(format!("{field}.expected[{j}]"), "index out of range (indices are 1-based)");
                    }
                    expected.push((e.alpha - 1, e.mu - 1, e.nu - 1, e.value));
                }
                Target::CurvatureCoefficients {
                    connection,
                    expected,
                    expect_flat: c.expect_flat.unwrap_or(false),
                }
            }
            CheckKind::NijenhuisVsCoefficients => Target::NijenhuisVsCoefficients(self.family(
                &c.connection,
                c.random,
                &field,
                "connection",
                |n, p| self.connection(n, p),
            )?),
            CheckKind::CommutatorIdentity => {
                let family = self.family(&c.connection, c.random, &field, "connection", |n, p| self.connection(n, p))?;
                let section = match (&c.section, &family) {
                    (Some(s), Family::Named(g)) => {
                        let s = self.section(s, &f("section"))?;
                        if s.patch.dims() != g.patch.dims() {
                            return self.schema(f("section"), "section and connection live on different bundles");
                        }
                        Some(s)
                    }
                    (Some(_), Family::Random(_)) => {
                        return self.schema(f("section"), "random connections use random sections");
                    }
                    (None, _) => None,
                };
                Target::CommutatorIdentity { family, section }
            }
            CheckKind::ThetaEquivariance => match (&c.transition, c.random) {
                (Some(t), None) => {
                    let bundle = self.bundle(self.required(&c.bundle, f("bundle"))?, &f("bundle"))?;
                    if t.len() != bundle.n {
                        return self.schema(f("transition"), format!("expected {} components", bundle.n));
                    }
                    let h = t
                        .iter()
                        .enumerate()
                        .map(|(a, src)| self.expr(&format!("{field}.transition[{a}]"), src, bundle.dims()))
                        .collect::<Result<Vec<_>, _>>()?;
                    Target::ThetaEquivariance(Family::Named((bundle.m, h)))
                }
                (None, Some(n)) if n > 0 => {
                    if c.bundle.is_some() {
                        return self.schema(f("bundle"), "only used with `transition`");
                    }
                    Target::ThetaEquivariance(Family::Random(n))
                }
                _ => return self.schema(field, "give exactly one of `transition` or a positive `random`"),
            },
            CheckKind::ParallelMorphism => {
                let morphism = self.morphism(self.required(&c.morphism, f("morphism"))?, &f("morphism"))?;
                let source = self.connection(self.required(&c.connection, f("connection"))?, &f("connection"))?;
                let target = match &c.target_connection {
                    Some(t) => self.connection(t, &f("target_connection"))?,
                    None => source.clone(),
                };
                if morphism.source.dims() != source.patch.dims() || morphism.target.dims() != target.patch.dims() {
                    return self.schema(f("morphism"), "morphism does not map between the connection bundles");
                }
                Target::ParallelMorphism { morphism, source, target }
            }
            CheckKind::ConnectionAxiom => Target::ConnectionAxiom {
                potential: self.potential(self.required(&c.potential, f("potential"))?, &f("potential"))?,
                drop_adjoint: c.drop_adjoint.unwrap_or(false),
            },
            CheckKind::CartanCrossCheck => {
                Target::CartanCrossCheck(self.potential(self.required(&c.potential, f("potential"))?, &f("potential"))?)
            }
            CheckKind::BchTheta => {
                let algebra = self.algebra(self.required(&c.algebra, f("algebra"))?, &f("algebra"))?;
                let xyz = match (&c.x, &c.y, &c.z) {
                    (None, None, None) => None,
                    (Some(x), Some(y), z) => {
                        let z = match z {
                            Some(z) => self.element(&algebra, z, f("z"))?,
                            None => algebra.zero(),
                        };
                        Some([self.element(&algebra, x, f("x"))?, self.element(&algebra, y, f("y"))?, z])
                    }
                    _ => return self.schema(field, "give both `x` and `y` (and optionally `z`), or none"),
                };
                Target::BchTheta { algebra, xyz }
            }
            CheckKind::Linearity => {
                let lambdas = c.lambdas.clone().unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec());
                if lambdas.is_empty() || lambdas.iter().any(|l| !l.is_finite()) {
                    return self.schema(f("lambdas"), "must be a non-empty list of finite numbers");
                }
                Target::Linearity {
                    connection: self.connection(self.required(&c.connection, f("connection"))?, &f("connection"))?,
                    lambdas,
                }
            }
            CheckKind::LinearConsistency => Target::LinearConsistency(self.family(
                &c.linear_connection,
                c.random,
                &field,
                "linear_connection",
                |n, p| self.linear(n, p),
            )?),
        };
        Ok(CheckSpec {
            name: c.name.clone(),
            kind: c.kind,
            samples,
            tolerance: tolerance * self.tol_scale,
            expect: c.expect,
            target,
        })
    }

    fn resolve(&self, digest: String) -> Result<SuiteConfig, ConfigError> {
        if self.raw.version != CONFIG_VERSION {
            return self.schema("version", format!("unsupported version {}, expected {CONFIG_VERSION}", self.raw.version));
        }
        // declarations are validated even when no check uses them
        for name in self.raw.bundles.keys() {
            self.bundle(name, "bundles")?;
        }
        for name in self.raw.connections.keys() {
            self.connection(name, "connections")?;
        }
        for name in self.raw.sections.keys() {
            self.section(name, "sections")?;
        }
        for name in self.raw.linear_connections.keys() {
            self.linear(name, "linear_connections")?;
        }
        for name in self.raw.morphisms.keys() {
            self.morphism(name, "morphisms")?;
        }
        for name in self.raw.algebras.keys() {
            self.algebra(name, "algebras")?;
        }
        for name in self.raw.potentials.keys() {
            self.potential(name, "potentials")?;
        }

        let mut seen = BTreeSet::new();
        let mut checks = Vec::new();
        for (i, c) in self.raw.checks.iter().enumerate() {
            if c.name.is_empty() {
                return self.schema(format!("checks[{i}].name"), "must not be empty");
            }
            if !seen.insert(c.name.as_str()) {
                return self.schema(format!("checks[{i}].name"), format!("duplicate check name `{}`", c.name));
            }
            checks.push(self.check(i, c)?);
        }
        Ok(SuiteConfig {
            version: self.raw.version,
            seed: self.raw.seed,
            digest,
            checks,
        })
    }
}
