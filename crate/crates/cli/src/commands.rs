use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use legendre_core::blowup::{from_chart, Chart, ChartPoint};
use legendre_core::contact::{conormal_tangent, transversal_coordinate_index, SplittingData};
use legendre_core::corner::{check_membership, extract_coefficients, properness_witness, CornerGrid, Multiplier, Prefactor, Verdict};
use legendre_core::decompose::{decompose_forward, DecomposeOptions, Decomposition};
use legendre_core::linalg::Matrix;
use legendre_core::oscillatory::{
    eval_batch, eval_fibred, eval_intersecting_direct, EvalMethod, EvalOptions, EvalReport, ModelDistribution,
};
use legendre_core::phase::{build_model_phase, legendrian_tangent, ModelPhaseData};
use legendre_core::poly::Polynomial;
use legendre_core::{Cx64, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{
    build_lemma_phase, build_model, real_poly, ConfigError, EvalPath, Model, MultiplierDomain, MultiplierSpec,
    ScenarioConfig,
};
use crate::report::*;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Inconclusive(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

/// Input-shaped core errors are configuration errors; the rest are numerical.
fn core(e: Error) -> CliError {
    match e {
        Error::DimensionMismatch { .. }
        | Error::DependentBasis { .. }
        | Error::Precondition(_)
        | Error::OutOfDomain(_)
        | Error::NoTransversalCoordinate(_)
        | Error::Invalid(_) => CliError::Config(ConfigError::Invalid(e.to_string())),
        _ => CliError::Numerical(e.to_string()),
    }
}

pub struct Context {
    pub config: ScenarioConfig,
    pub out: PathBuf,
    pub seed: u64,
}

impl Context {
    fn write_json<R: Serialize>(&self, command: &str, result: R) -> Result<PathBuf, CliError> {
        let report = RunReport::new(command, &self.config, self.seed, result);
        let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        let path = self.path(command, "json");
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    fn path(&self, command: &str, ext: &str) -> PathBuf {
        self.out.join(format!("{}.{command}.{ext}", self.config.name))
    }
}

fn method_name(m: EvalMethod) -> &'static str {
    match m {
        EvalMethod::DirectQuadrature => "direct_quadrature",
        EvalMethod::FourierReduced => "fourier_reduced",
        EvalMethod::ClosedForm => "closed_form",
    }
}

fn sum_reports(parts: Vec<EvalReport<f64>>) -> EvalReport<f64> {
    let mut it = parts.into_iter();
    let mut acc = it.next().expect("at least one component");
    for p in it {
        acc.value += p.value;
        acc.est_error += p.est_error;
        acc.converged &= p.converged;
    }
    acc
}

/// Values of the scenario's distribution at `(x, y)` points, in order.
fn evaluate(model: &Model, points: &[(f64, Vec<f64>)], path: EvalPath, opts: &EvalOptions<f64>) -> Result<Vec<EvalReport<f64>>, CliError> {
    let batch = |d: ModelDistribution<f64>| eval_batch(&d, points, opts).into_iter().collect::<Result<Vec<_>, _>>();
    let per_component: Vec<Vec<EvalReport<f64>>> = match model {
        Model::Type1(d) => vec![batch(ModelDistribution::Type1(d.clone())).map_err(core)?],
        Model::Type2(d) => vec![batch(ModelDistribution::Type2(d.clone())).map_err(core)?],
        Model::Fibred(d) => vec![batch(ModelDistribution::Fibred(d.clone())).map_err(core)?],
        Model::Intersecting(cs) => cs
            .iter()
            .map(|c| match path {
                EvalPath::Default => batch(ModelDistribution::Intersecting(c.clone())),
                EvalPath::Direct => points.iter().map(|(x, y)| eval_intersecting_direct(c, *x, y, opts)).collect(),
            })
            .collect::<Result<_, _>>()
            .map_err(core)?,
    };
    Ok((0..points.len())
        .map(|i| sum_reports(per_component.iter().map(|c| c[i]).collect()))
        .collect())
}

pub fn cmd_eval(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let c = &ctx.config;
    let model = build_model(c)?;
    let points = c.grid_points()?;
    let reports = evaluate(&model, &points, c.eval.method, &c.tolerances.eval_options())?;
    let csv_path = ctx.path("eval", "csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| CliError::Io(e.to_string()))?;
    w.write_record(eval_header(c.n - 1)).map_err(|e| CliError::Io(e.to_string()))?;
    let mut converged = true;
    let mut max_err = 0.0f64;
    for ((x, y), r) in points.iter().zip(&reports) {
        converged &= r.converged;
        max_err = max_err.max(r.est_error);
        let row = EvalRow {
            x: *x,
            y: y.clone(),
            re_u: r.value.re,
            im_u: r.value.im,
            abs_u: r.value.norm(),
            est_error: r.est_error,
            method: method_name(r.method).into(),
        };
        w.write_record(row.record()).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    let result = EvalResult {
        csv: csv_path.file_name().unwrap().to_string_lossy().into_owned(),
        rows: points.len(),
        converged,
        max_est_error: max_err,
    };
    let json = ctx.write_json("eval", result)?;
    if !converged {
        return Err(CliError::Numerical(format!(
            "quadrature did not converge at every grid point (reports written to {})",
            json.display()
        )));
    }
    Ok(vec![csv_path, json])
}

fn intersecting_components(model: Model, command: &str) -> Result<Vec<legendre_core::Intersecting64>, CliError> {
    match model {
        Model::Intersecting(cs) => Ok(cs),
        _ => Err(ConfigError::Invalid(format!("{command} needs class = \"intersecting\"")).into()),
    }
}

pub fn cmd_decompose(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let c = &ctx.config;
    let comps = intersecting_components(build_model(c)?, "decompose")?;
    let points = c.grid_points()?;
    let mut opts = DecomposeOptions::<f64>::default();
    opts.x_slices = match &c.decompose.x_slices {
        Some(v) => v.clone(),
        None => {
            let xs: BTreeSet<u64> = points.iter().map(|(x, _)| x.to_bits()).collect();
            xs.into_iter().map(f64::from_bits).collect()
        }
    };
    if let Some(o) = c.decompose.order {
        opts.order = o;
    }
    if let Some(o) = c.decompose.decay_order {
        opts.decay_order = o;
    }
    opts.quad = c.tolerances.quad_options();
    let decs: Vec<Decomposition<f64>> = comps
        .iter()
        .enumerate()
        .map(|(i, d)| {
            decompose_forward(d, &opts).map_err(|e| match e {
                Error::DecayCheck(msg) => CliError::Numerical(format!("component {i}: decay check failed: {msg}")),
                other => core(other),
            })
        })
        .collect::<Result<_, _>>()?;
    let eo = c.tolerances.eval_options();
    let direct = evaluate(&Model::Intersecting(comps), &points, EvalPath::Default, &eo)?;
    let exponent = decs[0].exponent();
    let mut f = Polynomial::<Cx64>::zero(c.n);
    for d in &decs {
        f = &f + d.f_polynomial();
    }
    let mut residual = 0.0f64;
    let mut g_samples = Vec::with_capacity(points.len());
    for ((x, y), u) in points.iter().zip(&direct) {
        let mut g = Cx64::new(0.0, 0.0);
        let mut rec = Cx64::new(0.0, 0.0);
        for d in &decs {
            g += d.g(*x, y) + d.remainder_part(*x, y);
            rec += d.reconstruct(*x, y);
        }
        let scale = u.value.norm().max(x.powf(exponent));
        residual = residual.max((rec - u.value).norm() / scale);
        g_samples.push(GSample { x: *x, y: y.clone(), re: g.re, im: g.im });
    }
    let components: Vec<ComponentOut> = decs
        .iter()
        .map(|d| ComponentOut {
            f_coefficients: terms_of(d.f_polynomial()),
            remainder_terms: d.diagnostics.remainder_terms,
            decay_passes: d.diagnostics.decay_passes(opts.decay_order),
            slices: d.diagnostics.slices.iter().map(SliceOut::from).collect(),
        })
        .collect();
    let result = DecomposeResult {
        exponent,
        f_coefficients: terms_of(&f),
        g_samples,
        residual,
        decay_passes: components.iter().all(|c| c.decay_passes),
        components,
    };
    Ok(vec![ctx.write_json("decompose", result)?])
}

struct Corner {
    chart: Chart,
    j: usize,
    prefactor: Prefactor<f64>,
    grid: CornerGrid<f64>,
}

fn corner_setup(c: &ScenarioConfig, model: &Model) -> Result<Corner, CliError> {
    let s = &c.corner;
    let j = s.chart_index.unwrap_or(c.k);
    if j == 0 || j > c.k {
        return Err(ConfigError::Invalid(format!("corner.chart_index must lie in 1..={}", c.k)).into());
    }
    let (rho, sigma) = match s.prefactor {
        Some(p) => (p.rho, p.sigma),
        None => model.natural_prefactor(),
    };
    let rest = s.rest.clone().unwrap_or_else(|| vec![0.0; c.n - 2]);
    if rest.len() != c.n - 2 {
        return Err(ConfigError::Invalid(format!("corner.rest needs {} entries", c.n - 2)).into());
    }
    let mut grid = CornerGrid::new(rest);
    if let Some(v) = s.sigma0 {
        grid.sigma0 = v;
    }
    if let Some(v) = s.rho0 {
        grid.rho0 = v;
    }
    if let Some(v) = s.levels {
        grid.levels = v;
    }
    if let Some(v) = s.order {
        grid.order = v;
    }
    if let Some(v) = s.cond_threshold {
        grid.cond_threshold = v;
    }
    Ok(Corner { chart: Chart::FfProjective(j), j, prefactor: Prefactor { rho, sigma }, grid })
}

fn multiplier(spec: &MultiplierSpec, split: SplittingData, j: usize) -> Result<Multiplier<f64>, CliError> {
    let what = format!("multiplier {}", spec.name);
    let p = real_poly(split.n, &spec.poly, &what)?;
    Ok(match spec.on {
        MultiplierDomain::X => Multiplier::on_x(&spec.name, &p, split, j).map_err(core)?,
        MultiplierDomain::Chart => Multiplier::on_chart(&spec.name, p),
    })
}

fn chart_value(model: &Model, split: SplittingData, cp: &ChartPoint<f64>, opts: &EvalOptions<f64>) -> legendre_core::Result<Cx64> {
    if let Model::Fibred(d) = model {
        return Ok(eval_fibred(d, cp, opts)?.value);
    }
    let p = from_chart(cp, split)?;
    let v = match model {
        Model::Type1(d) => ModelDistribution::Type1(d.clone()).eval(p.x, &p.y, opts)?.value,
        Model::Type2(d) => ModelDistribution::Type2(d.clone()).eval(p.x, &p.y, opts)?.value,
        Model::Intersecting(cs) => {
            let mut acc = Cx64::new(0.0, 0.0);
            for c in cs {
                acc += ModelDistribution::Intersecting(c.clone()).eval(p.x, &p.y, opts)?.value;
            }
            acc
        }
        Model::Fibred(_) => unreachable!(),
    };
    Ok(v)
}

pub fn cmd_classify(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let c = &ctx.config;
    c.check_comparison_orders()?;
    let split = c.split()?;
    let model = build_model(c)?;
    let corner = corner_setup(c, &model)?;
    let opts = c.tolerances.eval_options();
    let h = c.corner.multiplier.as_ref().map(|m| multiplier(m, split, corner.j)).transpose()?;
    let u = |cp: &ChartPoint<f64>| -> legendre_core::Result<Cx64> {
        let v = chart_value(&model, split, cp, &opts)?;
        Ok(match &h {
            Some(h) => v * h.eval(&cp.coords),
            None => v,
        })
    };
    let table = extract_coefficients(&u, corner.chart, corner.prefactor, &corner.grid).map_err(core)?;
    let membership = check_membership(&table, &c.tolerances.membership());
    let result = ClassifyResult::new(corner.j, h.map(|h| h.name), &table, &membership);
    let path = ctx.write_json("classify", result)?;
    if membership.verdict == Verdict::Inconclusive {
        return Err(CliError::Inconclusive(format!(
            "entries {:?} are indeterminate (report written to {})",
            membership.indeterminate,
            path.display()
        )));
    }
    Ok(vec![path])
}

pub fn cmd_witness(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let c = &ctx.config;
    c.check_comparison_orders()?;
    let split = c.split()?;
    let model = build_model(c)?;
    let corner = corner_setup(c, &model)?;
    if c.corner.multipliers.is_empty() {
        return Err(ConfigError::Invalid("witness needs corner.multipliers".into()).into());
    }
    let hs = c
        .corner
        .multipliers
        .iter()
        .map(|m| multiplier(m, split, corner.j))
        .collect::<Result<Vec<_>, _>>()?;
    let opts = c.tolerances.eval_options();
    let u = |cp: &ChartPoint<f64>| chart_value(&model, split, cp, &opts);
    let w = properness_witness(&u, corner.chart, corner.prefactor, &corner.grid, &hs, &c.tolerances.membership()).map_err(core)?;
    let result = WitnessResult {
        chart_index: corner.j,
        base: (&w.base).into(),
        cases: w.cases.iter().map(CaseOut::from).collect(),
        proper: w.proper,
    };
    let path = ctx.write_json("witness", result)?;
    if !w.proper {
        return Err(CliError::Inconclusive(format!(
            "the multipliers do not witness a proper inclusion (report written to {})",
            path.display()
        )));
    }
    Ok(vec![path])
}

fn random_poly(r: &mut ChaCha8Rng, n: usize) -> Polynomial<f64> {
    let mut terms = vec![(vec![0; n], r.gen_range(-1.0..1.0))];
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        terms.push((e.clone(), r.gen_range(-1.0..1.0)));
        for j in i..n {
            let mut q = e.clone();
            q[j] += 1;
            terms.push((q, r.gen_range(-1.0..1.0)));
        }
    }
    Polynomial::from_terms(n, terms).expect("arity")
}

fn random_lemma(r: &mut ChaCha8Rng, n: usize, k: usize, tol: f64) -> Result<Option<f64>, String> {
    let split = SplittingData::new(n, k).map_err(|e| e.to_string())?;
    let nv = ModelPhaseData::<f64>::local_nvars(split);
    let t = random_poly(r, nv);
    let ys = (0..k - 1).map(|_| random_poly(r, nv)).collect();
    let data = ModelPhaseData::from_reduced(split, t, ys).map_err(|e| e.to_string())?;
    let phi = build_model_phase(&data);
    let mut y = vec![0.0; n - 1];
    for v in y.iter_mut().skip(k) {
        *v = r.gen_range(-0.5..0.5);
    }
    let v: Vec<f64> = (0..k - 1).map(|_| r.gen_range(-1.0..1.0)).collect();
    let Ok(v1) = legendrian_tangent(&phi, &y, &v) else {
        return Ok(None);
    };
    if n - 1 > k {
        let rows: Vec<Vec<f64>> = v1.basis().iter().map(|b| b.dy[k..].to_vec()).collect();
        let rank = Matrix::from_rows(n - 1 - k, &rows).map_err(|e| e.to_string())?.svd().rank(1e-8);
        if rank < n - 1 - k {
            return Ok(None);
        }
    }
    let v2 = conormal_tangent(v1.base(), split).map_err(|e| e.to_string())?;
    let rep = transversal_coordinate_index(&v1, &v2, split, tol).map_err(|e| format!("n={n} k={k}: {e}"))?;
    Ok(Some(rep.strengths[rep.index - 1]))
}

pub fn cmd_lemma_check(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let c = &ctx.config;
    let split = c.split()?;
    let l = &c.lemma;
    let data = build_lemma_phase(c)?;
    let phi = build_model_phase(&data);
    let ydp = if l.y_double_prime.is_empty() { vec![0.0; split.dim_c()] } else { l.y_double_prime.clone() };
    if ydp.len() != split.dim_c() {
        return Err(ConfigError::Invalid(format!("lemma.y_double_prime needs {} entries", split.dim_c())).into());
    }
    let v = if l.v.is_empty() { vec![0.0; c.k - 1] } else { l.v.clone() };
    if v.len() != c.k - 1 {
        return Err(ConfigError::Invalid(format!("lemma.v needs {} entries", c.k - 1)).into());
    }
    let y: Vec<f64> = std::iter::repeat(0.0).take(c.k).chain(ydp).collect();
    let v1 = legendrian_tangent(&phi, &y, &v).map_err(core)?;
    let v2 = if l.self_pair { v1.clone() } else { conormal_tangent(v1.base(), split).map_err(core)? };
    let rep = transversal_coordinate_index(&v1, &v2, split, c.tolerances.lemma).map_err(core)?;
    let base = v1.base();
    let random = (l.random_pairs > 0).then(|| {
        let mut r = ChaCha8Rng::seed_from_u64(ctx.seed);
        let mut out = RandomLemmaOut { pairs: 0, succeeded: 0, rejected_generations: 0, min_strength: None, failures: Vec::new() };
        while out.pairs < l.random_pairs {
            let n = 2 + out.pairs % 3;
            let k = r.gen_range(1..n);
            match random_lemma(&mut r, n, k, c.tolerances.lemma) {
                Ok(None) => out.rejected_generations += 1,
                Ok(Some(s)) => {
                    out.pairs += 1;
                    out.succeeded += 1;
                    out.min_strength = Some(out.min_strength.map_or(s, |m: f64| m.min(s)));
                }
                Err(e) => {
                    out.pairs += 1;
                    out.failures.push(e);
                }
            }
        }
        out
    });
    let failed = random.as_ref().is_some_and(|r| !r.failures.is_empty());
    let result = LemmaResult {
        index: rep.index,
        strengths: rep.strengths,
        intersection_dim: rep.intersection_dim,
        base: BasePointOut { y: base.y.clone(), tau: base.tau, mu: base.mu.clone() },
        random,
    };
    let path = ctx.write_json("lemma-check", result)?;
    if failed {
        return Err(CliError::Numerical(format!("some random pairs failed (report written to {})", path.display())));
    }
    Ok(vec![path])
}

pub fn ensure_dir(p: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}
