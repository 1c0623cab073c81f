//! Scenario files (TOML). See `SCHEMA.md` next to this crate's manifest.

use std::path::Path;
use std::sync::Arc;

use legendre_core::amplitude::{HermiteTerm, SchwartzAmplitude};
use legendre_core::contact::SplittingData;
use legendre_core::corner::MembershipRule;
use legendre_core::oscillatory::{
    CutoffSpectrumTable, EvalOptions, Fibred, FibredAmplitude, Intersecting, SpectralAmplitude, Type1, Type2,
    YbarCutoff,
};
use legendre_core::phase::{ModelPhaseData, PhaseFunction};
use legendre_core::poly::Polynomial;
use legendre_core::quad::QuadOptions;
use legendre_core::Cx64;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Type1,
    Type2,
    Intersecting,
    Fibred,
}

/// One monomial `c·z^exps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub exps: Vec<u32>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HermiteSpec {
    pub index: u32,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default)]
    pub modulation: f64,
    pub coeff: Vec<Term>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchwartzSpec {
    pub terms: Vec<HermiteSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffSpec {
    pub start: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    /// Hermite–Gaussian amplitude in `ζ`, passive `(x, y, ȳ)`.
    Hermite,
    /// `x^{e+1} α(y_k/x) f(x, y)` from a polynomial `f`.
    Converse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub kind: ComponentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<HermiteSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<SchwartzSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ybar_cutoff: Option<CutoffSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Type1Spec {
    /// Phase polynomial in `y`.
    pub phase: Vec<Term>,
    /// Amplitude polynomial in `(x, y)`.
    pub amplitude: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Type2Spec {
    /// One factor per `y'` coordinate, passive `(x, y'')`.
    pub factors: Vec<SchwartzSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FibredSpec {
    /// `0` (smooth amplitude) or `1` (Schwartz in `v`).
    #[serde(default)]
    pub n_v: usize,
    /// Phase polynomial in `(ρ, w, y'', v)`.
    pub phase: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smooth: Option<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schwartz: Option<SchwartzSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values(Vec<f64>),
    Range(RangeSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>, ConfigError> {
        match self {
            Axis::Values(v) => Ok(v.clone()),
            Axis::Range(r) => {
                if r.count == 0 {
                    return invalid("range count must be positive");
                }
                if r.count == 1 {
                    return Ok(vec![r.min]);
                }
                let steps = (r.count - 1) as f64;
                match r.spacing {
                    Spacing::Linear => Ok((0..r.count).map(|i| r.min + (r.max - r.min) * i as f64 / steps).collect()),
                    Spacing::Geometric => {
                        if !(r.min > 0.0 && r.max > 0.0) {
                            return invalid("geometric ranges need positive endpoints");
                        }
                        let q = (r.max / r.min).ln();
                        Ok((0..r.count).map(|i| r.min * (q * i as f64 / steps).exp()).collect())
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Axis>,
    /// One axis per `y` coordinate; the grid is their tensor product with `x`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub y: Vec<Axis>,
    /// Extra points `[x, y_1, …, y_{n−1}]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EvalPath {
    #[default]
    Default,
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EvalSpec {
    #[serde(default)]
    pub method: EvalPath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DecomposeSpec {
    /// `x` values at which `g` is tabulated; defaults to the grid's `x` values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_slices: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultiplierDomain {
    /// Polynomial in `(x, y)`, pulled back to the chart.
    X,
    /// Polynomial in the chart coordinates `(ρ, σ, w, y'')`.
    Chart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplierSpec {
    pub name: String,
    pub on: MultiplierDomain,
    pub poly: Vec<Term>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrefactorSpec {
    pub rho: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CornerSpec {
    /// `j` of the projective chart `y_j > 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefactor: Option<PrefactorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond_threshold: Option<f64>,
    /// Remaining chart coordinates `(w, y'')`, held fixed; zeros by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rest: Option<Vec<f64>>,
    /// Multiplier applied by `classify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<MultiplierSpec>,
    /// Multipliers compared by `witness`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub multipliers: Vec<MultiplierSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct LemmaSpec {
    /// Reduced `T` in `y`; the model phase uses `y_k·T`. Empty means zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t: Vec<Term>,
    /// Reduced `Y_1, …, Y_{k−1}` in `y`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub y: Vec<Vec<Term>>,
    /// `y''` of the base point (`y' = 0`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub y_double_prime: Vec<f64>,
    /// Fibre parameters `v ∈ R^{k−1}`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub v: Vec<f64>,
    /// Compare against `V1` itself instead of the conormal tangent space.
    #[serde(default)]
    pub self_pair: bool,
    /// Random model pairs drawn with `--seed`.
    #[serde(default)]
    pub random_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_verdict")]
    pub verdict: f64,
    /// Corner entries with a larger fit uncertainty leave the verdict undecided.
    #[serde(default = "default_max_unc")]
    pub max_unc: f64,
    #[serde(default = "default_lemma")]
    pub lemma: f64,
    #[serde(default = "default_inner_abs")]
    pub inner_abs: f64,
    #[serde(default = "default_inner_rel")]
    pub inner_rel: f64,
    #[serde(default = "default_outer_abs")]
    pub outer_abs: f64,
    #[serde(default = "default_outer_rel")]
    pub outer_rel: f64,
}

fn default_verdict() -> f64 {
    1e-8
}
fn default_max_unc() -> f64 {
    1e-4
}
fn default_lemma() -> f64 {
    1e-10
}
fn default_inner_abs() -> f64 {
    1e-13
}
fn default_inner_rel() -> f64 {
    1e-11
}
fn default_outer_abs() -> f64 {
    1e-15
}
fn default_outer_rel() -> f64 {
    1e-10
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            verdict: default_verdict(),
            max_unc: default_max_unc(),
            lemma: default_lemma(),
            inner_abs: default_inner_abs(),
            inner_rel: default_inner_rel(),
            outer_abs: default_outer_abs(),
            outer_rel: default_outer_rel(),
        }
    }
}

impl Tolerances {
    /// Applies a `key=value` override.
    pub fn set(&mut self, spec: &str) -> Result<(), ConfigError> {
        let Some((key, value)) = spec.split_once('=') else {
            return invalid(format!("tolerance override `{spec}` is not key=value"));
        };
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| ConfigError::Invalid(format!("tolerance `{key}` is not a number")))?;
        if !(v > 0.0 && v.is_finite()) {
            return invalid(format!("tolerance `{key}` must be positive"));
        }
        let slot = match key.trim() {
            "verdict" => &mut self.verdict,
            "max_unc" => &mut self.max_unc,
            "lemma" => &mut self.lemma,
            "inner_abs" => &mut self.inner_abs,
            "inner_rel" => &mut self.inner_rel,
            "outer_abs" => &mut self.outer_abs,
            "outer_rel" => &mut self.outer_rel,
            other => return invalid(format!("unknown tolerance `{other}`")),
        };
        *slot = v;
        Ok(())
    }

    pub fn membership(&self) -> MembershipRule<f64> {
        MembershipRule { tol: self.verdict, max_unc: self.max_unc }
    }

    pub fn eval_options(&self) -> EvalOptions<f64> {
        let mut o = EvalOptions::default();
        o.inner.abs_tol = self.inner_abs;
        o.inner.rel_tol = self.inner_rel;
        o.outer.abs_tol = self.outer_abs;
        o.outer.rel_tol = self.outer_rel;
        o
    }

    pub fn quad_options(&self) -> QuadOptions<f64> {
        let mut q = QuadOptions::new(self.outer_abs, self.outer_rel.min(1e-12));
        q.max_panels = q.max_panels.max(2000);
        q
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub n: usize,
    pub k: usize,
    pub class: Class,
    pub m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type1: Option<Type1Spec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type2: Option<Type2Spec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fibred: Option<FibredSpec>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub eval: EvalSpec,
    #[serde(default)]
    pub decompose: DecomposeSpec,
    #[serde(default)]
    pub corner: CornerSpec,
    #[serde(default)]
    pub lemma: LemmaSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let c: Self = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn split(&self) -> Result<SplittingData, ConfigError> {
        SplittingData::new(self.n, self.k).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Structural checks; arity checks happen when the model is built.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return invalid(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return invalid("name must be nonempty and use only [A-Za-z0-9_-]");
        }
        self.split()?;
        if !self.m.is_finite() {
            return invalid("m must be finite");
        }
        let present = [
            (Class::Intersecting, !self.components.is_empty()),
            (Class::Type1, self.type1.is_some()),
            (Class::Type2, self.type2.is_some()),
            (Class::Fibred, self.fibred.is_some()),
        ];
        for (class, has) in present {
            if has != (class == self.class) {
                let what = match class {
                    Class::Intersecting => "[[components]]",
                    Class::Type1 => "[type1]",
                    Class::Type2 => "[type2]",
                    Class::Fibred => "[fibred]",
                };
                return invalid(if has {
                    format!("{what} given but class is {:?}", self.class)
                } else {
                    format!("class {:?} needs {what}", self.class)
                });
            }
        }
        if self.class == Class::Fibred && self.r.is_none() {
            return invalid("class fibred needs r");
        }
        for (i, c) in self.components.iter().enumerate() {
            match c.kind {
                ComponentKind::Hermite if c.terms.is_none() || c.f.is_some() => {
                    return invalid(format!("component {i}: hermite components take `terms` and no `f`"))
                }
                ComponentKind::Converse if c.f.is_none() || c.terms.is_some() || c.ybar_cutoff.is_some() => {
                    return invalid(format!("component {i}: converse components take `f`, plus a profile when k = 2"))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// `r = m + 1/2`, the setting in which the fibred and intersecting classes are compared.
    pub fn check_comparison_orders(&self) -> Result<(), ConfigError> {
        if let Some(r) = self.r {
            if (r - (self.m + 0.5)).abs() > 1e-12 {
                return invalid(format!("comparing classes needs r = m + 1/2, got m = {}, r = {r}", self.m));
            }
        }
        Ok(())
    }

    /// Grid points `(x, y)`.
    pub fn grid_points(&self) -> Result<Vec<(f64, Vec<f64>)>, ConfigError> {
        let ny = self.n - 1;
        let mut out = Vec::new();
        if let Some(xa) = &self.grid.x {
            if self.grid.y.len() != ny {
                return invalid(format!("grid.y needs {ny} axes"));
            }
            let xs = xa.values()?;
            let axes = self.grid.y.iter().map(Axis::values).collect::<Result<Vec<_>, _>>()?;
            for &x in &xs {
                let mut idx = vec![0usize; ny];
                'outer: loop {
                    if axes.iter().any(Vec::is_empty) {
                        break;
                    }
                    out.push((x, idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect()));
                    for d in (0..ny).rev() {
                        idx[d] += 1;
                        if idx[d] < axes[d].len() {
                            continue 'outer;
                        }
                        idx[d] = 0;
                    }
                    break;
                }
            }
        } else if !self.grid.y.is_empty() {
            return invalid("grid.y given without grid.x");
        }
        for p in &self.grid.points {
            if p.len() != self.n {
                return invalid(format!("grid point {p:?} needs {} entries [x, y...]", self.n));
            }
            out.push((p[0], p[1..].to_vec()));
        }
        for (x, _) in &out {
            if !(*x > 0.0 && x.is_finite()) {
                return invalid(format!("grid x = {x} must be positive"));
            }
        }
        if out.is_empty() {
            return invalid("the grid is empty");
        }
        Ok(out)
    }
}

pub fn real_poly(nvars: usize, terms: &[Term], what: &str) -> Result<Polynomial<f64>, ConfigError> {
    for t in terms {
        if t.im != 0.0 {
            return invalid(format!("{what}: coefficients must be real"));
        }
    }
    Polynomial::from_terms(nvars, terms.iter().map(|t| (t.exps.clone(), t.re)))
        .map_err(|_| ConfigError::Invalid(format!("{what}: exponent vectors need {nvars} entries")))
}

pub fn complex_poly(nvars: usize, terms: &[Term], what: &str) -> Result<Polynomial<Cx64>, ConfigError> {
    Polynomial::from_terms(nvars, terms.iter().map(|t| (t.exps.clone(), Cx64::new(t.re, t.im))))
        .map_err(|_| ConfigError::Invalid(format!("{what}: exponent vectors need {nvars} entries")))
}

pub fn schwartz(n_passive: usize, terms: &[HermiteSpec], what: &str) -> Result<SchwartzAmplitude<f64>, ConfigError> {
    let terms = terms
        .iter()
        .map(|h| {
            if !(h.width > 0.0) {
                return invalid(format!("{what}: widths must be positive"));
            }
            Ok(HermiteTerm {
                coeff: complex_poly(n_passive, &h.coeff, what)?,
                index: h.index,
                center: h.center,
                width: h.width,
                modulation: h.modulation,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    SchwartzAmplitude::new(n_passive, terms).map_err(|e| ConfigError::Invalid(format!("{what}: {e}")))
}

fn core_err(what: &str) -> impl Fn(legendre_core::Error) -> ConfigError + '_ {
    move |e| ConfigError::Invalid(format!("{what}: {e}"))
}

/// The scenario's distribution, one entry per component for the intersecting class.
#[derive(Debug, Clone)]
pub enum Model {
    Type1(Type1<f64>),
    Type2(Type2<f64>),
    Intersecting(Vec<Intersecting<f64>>),
    Fibred(Fibred<f64>),
}

impl Model {
    /// Exponents `(ρ, σ)` of the natural corner prefactor.
    pub fn natural_prefactor(&self) -> (f64, f64) {
        match self {
            Model::Type1(d) => (d.exponent(), d.exponent()),
            Model::Type2(d) => (d.exponent(), d.exponent()),
            Model::Intersecting(cs) => {
                let e = cs[0].exponent() + 1.0;
                (e, e)
            }
            Model::Fibred(d) => (d.rho_exponent(), d.sigma_exponent()),
        }
    }
}

pub fn build_model(c: &ScenarioConfig) -> Result<Model, ConfigError> {
    let split = c.split()?;
    let n = c.n;
    match c.class {
        Class::Type1 => {
            let s = c.type1.as_ref().expect("validated");
            let phase = PhaseFunction::new(n - 1, 0, real_poly(n - 1, &s.phase, "type1.phase")?)
                .map_err(core_err("type1.phase"))?;
            let amp = complex_poly(n, &s.amplitude, "type1.amplitude")?;
            Ok(Model::Type1(Type1::new(n, c.m, phase, amp).map_err(core_err("type1"))?))
        }
        Class::Type2 => {
            let s = c.type2.as_ref().expect("validated");
            let np = 1 + split.dim_c();
            let factors = s
                .factors
                .iter()
                .enumerate()
                .map(|(i, f)| schwartz(np, &f.terms, &format!("type2.factors[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Model::Type2(Type2::new(split, c.m, factors).map_err(core_err("type2"))?))
        }
        Class::Fibred => {
            let s = c.fibred.as_ref().expect("validated");
            let nv = s.n_v;
            let phase = PhaseFunction::new(n - 1, nv, real_poly(n - 1 + nv, &s.phase, "fibred.phase")?)
                .map_err(core_err("fibred.phase"))?;
            let amp = match (&s.smooth, &s.schwartz) {
                (Some(p), None) => FibredAmplitude::Smooth(complex_poly(n, p, "fibred.smooth")?),
                (None, Some(a)) => FibredAmplitude::Schwartz(schwartz(n, &a.terms, "fibred.schwartz")?),
                _ => return invalid("fibred needs exactly one of `smooth`, `schwartz`"),
            };
            let r = c.r.expect("validated");
            Ok(Model::Fibred(Fibred::new(split, c.m, r, phase, amp).map_err(core_err("fibred"))?))
        }
        Class::Intersecting => {
            let table = if c.components.iter().any(|s| s.kind == ComponentKind::Converse) {
                Some(Arc::new(
                    CutoffSpectrumTable::new().map_err(|e| ConfigError::Invalid(format!("cutoff spectrum: {e}")))?,
                ))
            } else {
                None
            };
            let mut out = Vec::new();
            for (i, s) in c.components.iter().enumerate() {
                let what = format!("components[{i}]");
                let amplitude = match s.kind {
                    ComponentKind::Hermite => {
                        SpectralAmplitude::HermiteGaussian(schwartz(n + 1, s.terms.as_deref().unwrap_or(&[]), &what)?)
                    }
                    ComponentKind::Converse => SpectralAmplitude::CutoffSpectrum {
                        multiplier: complex_poly(n, s.f.as_deref().unwrap_or(&[]), &what)?,
                        table: table.clone().expect("built above"),
                    },
                };
                let profile = match &s.profile {
                    Some(p) => Some(schwartz(n, &p.terms, &format!("{what}.profile"))?),
                    None => None,
                };
                let cut = s.ybar_cutoff.map(|c| YbarCutoff { start: c.start, width: c.width });
                let d = Intersecting::new(split, c.m, amplitude, profile, cut).map_err(|e| ConfigError::Invalid(format!("{what}: {e}")))?;
                out.push(d);
            }
            Ok(Model::Intersecting(out))
        }
    }
}

pub fn build_lemma_phase(c: &ScenarioConfig) -> Result<ModelPhaseData<f64>, ConfigError> {
    let split = c.split()?;
    let nv = ModelPhaseData::<f64>::local_nvars(split);
    let l = &c.lemma;
    if l.t.is_empty() && l.y.is_empty() {
        return Ok(ModelPhaseData::zero(split));
    }
    let t = real_poly(nv, &l.t, "lemma.t")?;
    if l.y.len() != split.k - 1 {
        return invalid(format!("lemma.y needs k - 1 = {} polynomials", split.k - 1));
    }
    let y = l
        .y
        .iter()
        .enumerate()
        .map(|(i, p)| real_poly(nv, p, &format!("lemma.y[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    ModelPhaseData::from_reduced(split, t, y).map_err(core_err("lemma"))
}
