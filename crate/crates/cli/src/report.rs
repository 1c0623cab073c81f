//! Report types. Every file the runner writes parses back into these.

use legendre_core::corner::{AsymptoticTable, Membership, Verdict, WitnessCase};
use legendre_core::decompose::SliceDiagnostics;
use legendre_core::poly::Polynomial;
use legendre_core::Cx64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ScenarioConfig, Term, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport<R> {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    /// SHA-256 of the effective scenario (after overrides) in canonical JSON.
    pub config_hash: String,
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub result: R,
}

impl<R> RunReport<R> {
    pub fn new(command: &str, scenario: &ScenarioConfig, seed: u64, result: R) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.into(),
            config_hash: config_hash(scenario),
            seed,
            scenario: scenario.clone(),
            result,
        }
    }
}

pub fn config_hash(c: &ScenarioConfig) -> String {
    let canonical = serde_json::to_vec(c).expect("scenario serializes");
    let digest = Sha256::digest(&canonical);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// One row of the `eval` CSV; `y` columns are `y1 … y{n−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub x: f64,
    pub y: Vec<f64>,
    pub re_u: f64,
    pub im_u: f64,
    pub abs_u: f64,
    pub est_error: f64,
    pub method: String,
}

pub fn eval_header(ny: usize) -> Vec<String> {
    let mut h = vec!["x".to_string()];
    h.extend((1..=ny).map(|i| format!("y{i}")));
    h.extend(["re_u", "im_u", "abs_u", "est_error", "method"].map(String::from));
    h
}

impl EvalRow {
    pub fn record(&self) -> Vec<String> {
        let mut r = vec![fmt(self.x)];
        r.extend(self.y.iter().map(|&v| fmt(v)));
        r.extend([self.re_u, self.im_u, self.abs_u, self.est_error].map(fmt));
        r.push(self.method.clone());
        r
    }

    pub fn parse(ny: usize, rec: &csv::StringRecord) -> Result<Self, String> {
        if rec.len() != ny + 6 {
            return Err(format!("expected {} fields, got {}", ny + 6, rec.len()));
        }
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| format!("field {i}: {e}"));
        let method = rec[ny + 5].to_string();
        if !["direct_quadrature", "fourier_reduced", "closed_form"].contains(&method.as_str()) {
            return Err(format!("unknown method {method}"));
        }
        Ok(Self {
            x: num(0)?,
            y: (1..=ny).map(num).collect::<Result<_, _>>()?,
            re_u: num(ny + 1)?,
            im_u: num(ny + 2)?,
            abs_u: num(ny + 3)?,
            est_error: num(ny + 4)?,
            method,
        })
    }
}

/// Shortest round-trip representation.
fn fmt(v: f64) -> String {
    format!("{v:e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalResult {
    pub csv: String,
    pub rows: usize,
    pub converged: bool,
    pub max_est_error: f64,
}

pub fn terms_of(p: &Polynomial<Cx64>) -> Vec<Term> {
    p.terms().map(|(e, c)| Term { exps: e.clone(), re: c.re, im: c.im }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayReportOut {
    pub slope: Option<f64>,
    pub exponents: Vec<Option<f64>>,
    pub passes: Vec<bool>,
    pub fitted_points: usize,
}

/// Non-finite values (an empty fit has slope `−∞`) are written as `null`.
fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceOut {
    pub x: f64,
    pub b_cancellation: f64,
    pub interpolation_tail: f64,
    pub remainder_bound: f64,
    pub decay: DecayReportOut,
}

impl From<&SliceDiagnostics<f64>> for SliceOut {
    fn from(s: &SliceDiagnostics<f64>) -> Self {
        Self {
            x: s.x,
            b_cancellation: s.b_cancellation,
            interpolation_tail: s.interpolation_tail,
            remainder_bound: s.remainder_bound,
            decay: DecayReportOut {
                slope: finite(s.decay.slope),
                exponents: s.decay.exponents.iter().map(|&e| finite(e)).collect(),
                passes: s.decay.passes.clone(),
                fitted_points: s.decay.fitted_points,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentOut {
    pub f_coefficients: Vec<Term>,
    pub remainder_terms: bool,
    pub decay_passes: bool,
    pub slices: Vec<SliceOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GSample {
    pub x: f64,
    pub y: Vec<f64>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeResult {
    /// Prefactor exponent `e + 1` of `x^{e+1}[α(Z) f + g]`.
    pub exponent: f64,
    /// `f` summed over components, as terms in `(x, y)`.
    pub f_coefficients: Vec<Term>,
    pub g_samples: Vec<GSample>,
    /// `max |reconstruction − u| / max(|u|, x^{e+1})` over the grid.
    pub residual: f64,
    pub decay_passes: bool,
    pub components: Vec<ComponentOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableOut {
    pub order: usize,
    pub prefactor_rho: f64,
    pub prefactor_sigma: f64,
    pub condition: f64,
    /// `c[j][l] = [re, im]` of the coefficient of `σ^j ρ^l`.
    pub c: Vec<Vec<[f64; 2]>>,
    pub unc: Vec<Vec<f64>>,
}

impl From<&AsymptoticTable<f64>> for TableOut {
    fn from(t: &AsymptoticTable<f64>) -> Self {
        Self {
            order: t.order,
            prefactor_rho: t.prefactor.rho,
            prefactor_sigma: t.prefactor.sigma,
            condition: t.condition,
            c: t.c.iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect(),
            unc: t.unc.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictOut {
    Intersecting,
    NotIntersecting,
    Inconclusive,
}

impl From<Verdict> for VerdictOut {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Intersecting => Self::Intersecting,
            Verdict::NotIntersecting => Self::NotIntersecting,
            Verdict::Inconclusive => Self::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationOut {
    pub j: usize,
    pub l: usize,
    pub re: f64,
    pub im: f64,
    pub unc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyResult {
    pub chart_index: usize,
    pub multiplier: Option<String>,
    pub table: TableOut,
    pub verdict: VerdictOut,
    pub violations: Vec<ViolationOut>,
    pub indeterminate: Vec<[usize; 2]>,
}

fn violations(m: &Membership<f64>) -> (Vec<ViolationOut>, Vec<[usize; 2]>) {
    (
        m.violations
            .iter()
            .map(|v| ViolationOut { j: v.j, l: v.l, re: v.value.re, im: v.value.im, unc: v.unc })
            .collect(),
        m.indeterminate.iter().map(|&(j, l)| [j, l]).collect(),
    )
}

impl ClassifyResult {
    pub fn new(chart_index: usize, multiplier: Option<String>, t: &AsymptoticTable<f64>, m: &Membership<f64>) -> Self {
        let (violations, indeterminate) = violations(m);
        Self {
            chart_index,
            multiplier,
            table: t.into(),
            verdict: m.verdict.into(),
            violations,
            indeterminate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseOut {
    pub name: String,
    pub smooth_on_x: bool,
    pub verdict: VerdictOut,
    pub violations: Vec<ViolationOut>,
    pub indeterminate: Vec<[usize; 2]>,
    pub table: TableOut,
}

impl From<&WitnessCase<f64>> for CaseOut {
    fn from(c: &WitnessCase<f64>) -> Self {
        let (violations, indeterminate) = violations(&c.membership);
        Self {
            name: c.name.clone(),
            smooth_on_x: c.smooth_on_x,
            verdict: c.membership.verdict.into(),
            violations,
            indeterminate,
            table: (&c.table).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessResult {
    pub chart_index: usize,
    pub base: CaseOut,
    pub cases: Vec<CaseOut>,
    pub proper: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasePointOut {
    pub y: Vec<f64>,
    pub tau: f64,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomLemmaOut {
    pub pairs: usize,
    pub succeeded: usize,
    pub rejected_generations: usize,
    pub min_strength: Option<f64>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaResult {
    /// 1-based `j ≤ k` with `dy_j` nonzero on `T_q L_1`.
    pub index: usize,
    pub strengths: Vec<f64>,
    pub intersection_dim: usize,
    pub base: BasePointOut,
    pub random: Option<RandomLemmaOut>,
}
