//! Evaluation of the model distribution classes at interior points.
//!
//! Fourier convention throughout: `â(Z) = ∫ e^{iζZ} a(ζ) dζ`.
//!
//! Intersecting distributions use the phase `ψ = v·ỹ + ζ(y_k − ȳ)` with
//! `s = ȳ ≥ 0` and passive amplitude variables `(x, y_1, …, y_{n−1}, ȳ)`. When
//! `k = 2` a separable profile `P(x, y; v)` carries the `v`-dependence.

use std::cell::Cell;
use std::sync::Arc;

use rayon::prelude::*;

use crate::amplitude::{alpha, alpha_prime, FrozenAmplitude, SchwartzAmplitude};
use crate::blowup::{to_chart, transition, Chart, ChartPoint, XPoint};
use crate::chebyshev::PiecewiseChebyshev;
use crate::contact::SplittingData;
use crate::error::{check_dim, Error, Result};
use crate::phase::PhaseFunction;
use crate::poly::Polynomial;
use crate::quad::{self, integrate_breaks, refine_breaks, QuadOptions, QuadResult};
use crate::scalar::{expi, real, Cx, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    DirectQuadrature,
    FourierReduced,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport<T> {
    pub value: Cx<T>,
    pub est_error: T,
    pub method: EvalMethod,
    pub converged: bool,
}

impl<T: Scalar> EvalReport<T> {
    fn closed(value: Cx<T>) -> Self {
        Self {
            value,
            est_error: T::zero(),
            method: EvalMethod::ClosedForm,
            converged: true,
        }
    }

    fn from_quad(prefactor: Cx<T>, q: QuadResult<T>, method: EvalMethod) -> Self {
        Self {
            value: prefactor * q.value,
            est_error: prefactor.norm() * q.error,
            method,
            converged: q.converged,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions<T> {
    /// Inner (oscillatory) integrals.
    pub inner: QuadOptions<T>,
    /// Outer `ȳ` integral and reduced one-dimensional integrals.
    pub outer: QuadOptions<T>,
    /// Largest panel length in oscillation periods; GK15 then samples at
    /// least ten points per period.
    pub periods_per_panel: T,
}

impl<T: Scalar> Default for EvalOptions<T> {
    fn default() -> Self {
        let mut inner = QuadOptions::new(1e-13, 1e-11);
        inner.max_panels = 20_000;
        Self {
            inner,
            outer: QuadOptions::new(1e-15, 1e-10),
            periods_per_panel: T::lit(1.5),
        }
    }
}

pub fn type1_exponent<T: Scalar>(m: T, n: usize) -> T {
    m + T::from_usize_lossy(n) / T::lit(4.0)
}

pub fn type2_exponent<T: Scalar>(m: T, n: usize, k: usize) -> T {
    type1_exponent(m, n) - T::from_usize_lossy(k) / T::lit(2.0)
}

/// Prefactor exponent `m + n/4 − (p+1)/2` with `p = k` parameters `(v, ζ)`.
pub fn intersecting_exponent<T: Scalar>(m: T, n: usize, k: usize) -> T {
    type1_exponent(m, n) - T::from_usize_lossy(k + 1) / T::lit(2.0)
}

fn check_x<T: Scalar>(x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfDomain("evaluation needs x > 0".into()))
    }
}

fn xy_args<T: Scalar>(x: T, y: &[T]) -> Vec<Cx<T>> {
    std::iter::once(x).chain(y.iter().copied()).map(real).collect()
}

/// `u = x^q e^{iφ(y)/x} a(x, y)` with `q = m + n/4`.
#[derive(Debug, Clone, PartialEq)]
pub struct Type1<T> {
    pub n: usize,
    pub m: T,
    pub phase: PhaseFunction<T>,
    /// Polynomial in `(x, y)`.
    pub amplitude: Polynomial<Cx<T>>,
}

impl<T: Scalar> Type1<T> {
    pub fn new(n: usize, m: T, phase: PhaseFunction<T>, amplitude: Polynomial<Cx<T>>) -> Result<Self> {
        check_dim(n - 1, phase.n_y())?;
        check_dim(0, phase.n_v())?;
        check_dim(n, amplitude.nvars())?;
        Ok(Self { n, m, phase, amplitude })
    }

    pub fn exponent(&self) -> T {
        type1_exponent(self.m, self.n)
    }
}

pub fn eval_type1<T: Scalar>(d: &Type1<T>, x: T, y: &[T]) -> Result<EvalReport<T>> {
    check_x(x)?;
    check_dim(d.n - 1, y.len())?;
    let a = d.amplitude.eval(&xy_args(x, y));
    let phase = d.phase.eval(y, &[]) / x;
    Ok(EvalReport::closed(expi(phase) * a * x.powf(d.exponent())))
}

/// `u = x^q V(x, y'/x, y'')` with `q = m + n/4 − k/2` and
/// `V = Π_j V_j(x, y''; Z_j)`, each factor with passive variables `(x, y'')`.
#[derive(Debug, Clone, PartialEq)]
pub struct Type2<T> {
    pub n: usize,
    pub k: usize,
    pub m: T,
    pub factors: Vec<SchwartzAmplitude<T>>,
}

impl<T: Scalar> Type2<T> {
    pub fn new(split: SplittingData, m: T, factors: Vec<SchwartzAmplitude<T>>) -> Result<Self> {
        check_dim(split.k, factors.len())?;
        for f in &factors {
            check_dim(1 + split.dim_c(), f.n_passive())?;
        }
        Ok(Self { n: split.n, k: split.k, m, factors })
    }

    pub fn exponent(&self) -> T {
        type2_exponent(self.m, self.n, self.k)
    }

    fn passive(&self, x: T, y: &[T]) -> Vec<T> {
        std::iter::once(x).chain(y[self.k..].iter().copied()).collect()
    }
}

pub fn eval_type2<T: Scalar>(d: &Type2<T>, x: T, y: &[T]) -> Result<EvalReport<T>> {
    check_x(x)?;
    check_dim(d.n - 1, y.len())?;
    let p = d.passive(x, y);
    let mut v = real(x.powf(d.exponent()));
    for (j, f) in d.factors.iter().enumerate() {
        v = v * f.eval(&p, y[j] / x);
    }
    Ok(EvalReport::closed(v))
}

/// Evaluates each factor as `V_j(Z) = ∫ e^{iZη} W_j(η) dη` by quadrature, with
/// `W_j` the inverse transform of `V_j`.
pub fn eval_type2_synthesis<T: Scalar>(d: &Type2<T>, x: T, y: &[T], opts: &EvalOptions<T>) -> Result<EvalReport<T>> {
    check_x(x)?;
    check_dim(d.n - 1, y.len())?;
    let p = d.passive(x, y);
    let mut total = QuadResult {
        value: real(x.powf(d.exponent())),
        error: T::zero(),
        evaluations: 0,
        converged: true,
    };
    for (j, f) in d.factors.iter().enumerate() {
        let w = f.inverse_fourier_transform();
        let fr = w.freeze(&p);
        let z = y[j] / x;
        let q = oscillatory_line(&fr, &w, z, opts);
        total = QuadResult {
            value: total.value * q.value,
            error: total.error * q.value.norm() + total.value.norm() * q.error,
            evaluations: total.evaluations + q.evaluations,
            converged: total.converged && q.converged,
        };
    }
    Ok(EvalReport {
        value: total.value,
        est_error: total.error,
        method: EvalMethod::DirectQuadrature,
        converged: total.converged,
    })
}

/// `∫ e^{iωt} a(t) dt` over the support hint of `a`, with panels resolving
/// both the amplitude and the oscillation.
fn oscillatory_line<T: Scalar>(fr: &FrozenAmplitude<T>, a: &SchwartzAmplitude<T>, omega: T, opts: &EvalOptions<T>) -> QuadResult<T> {
    if fr.is_zero() {
        return zero_result();
    }
    let (lo, hi) = a.support_hint();
    let period = T::lit(2.0) * T::PI() / omega.abs().max(T::lit(1e-300));
    let width = (opts.periods_per_panel * period).min(a.length_scale() * T::lit(2.0));
    let breaks = refine_breaks(&[lo, hi], width);
    let f = |t: T| expi(omega * t) * fr.eval(t);
    integrate_breaks(&f, &breaks, &opts.inner)
}

fn zero_result<T: Scalar>() -> QuadResult<T> {
    QuadResult {
        value: real(T::zero()),
        error: T::zero(),
        evaluations: 0,
        converged: true,
    }
}

/// `A(ζ) = (2π)^{-1} ∫_0^1 e^{−iζt} α'(t) dt`, whose transform is `α'`;
/// tabulated on `[−L, L]` and taken as zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffSpectrumTable<T> {
    table: PiecewiseChebyshev<T>,
    half_width: T,
}

impl<T: Scalar> CutoffSpectrumTable<T> {
    pub fn new() -> Result<Self> {
        let half_width = T::lit(800.0);
        let panels = 64;
        let samples: Vec<(T, T)> = (0..panels)
            .flat_map(|p| {
                let a = T::from_usize_lossy(p) / T::from_usize_lossy(panels);
                let b = T::from_usize_lossy(p + 1) / T::from_usize_lossy(panels);
                quad::gk15_rule(a, b)
            })
            .map(|(t, w)| (t, w * alpha_prime(t)))
            .collect();
        let scale = T::one() / (T::lit(2.0) * T::PI());
        let f = |z: T| {
            let mut s = real(T::zero());
            for &(t, w) in &samples {
                s = s + expi(-z * t) * w;
            }
            s * scale
        };
        let table = PiecewiseChebyshev::adaptive(&f, -half_width, half_width, 24, T::floor_tol(1e-16), 20)?;
        Ok(Self { table, half_width })
    }

    pub fn eval(&self, zeta: T) -> Cx<T> {
        self.table.eval(zeta).unwrap_or_else(|| real(T::zero()))
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }
}

#[derive(Debug, Clone)]
pub enum SpectralAmplitude<T> {
    /// Hermite–Gaussian in `ζ`, passive `(x, y, ȳ)`.
    HermiteGaussian(SchwartzAmplitude<T>),
    /// `f(x, y)·A(ζ)` with `Â = α'`.
    CutoffSpectrum {
        multiplier: Polynomial<Cx<T>>,
        table: Arc<CutoffSpectrumTable<T>>,
    },
}

/// `χ(ȳ) = 1 − α((ȳ − start)/width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YbarCutoff<T> {
    pub start: T,
    pub width: T,
}

impl<T: Scalar> YbarCutoff<T> {
    pub fn eval(&self, ybar: T) -> T {
        T::one() - alpha((ybar - self.start) / self.width)
    }
}

#[derive(Debug, Clone)]
pub struct Intersecting<T> {
    pub n: usize,
    pub k: usize,
    pub m: T,
    pub amplitude: SpectralAmplitude<T>,
    /// `v`-profile for `k = 2`, passive `(x, y)`.
    pub transverse: Option<SchwartzAmplitude<T>>,
    pub ybar_cutoff: Option<YbarCutoff<T>>,
    transform: Option<SchwartzAmplitude<T>>,
    transverse_transform: Option<SchwartzAmplitude<T>>,
}

impl<T: Scalar> Intersecting<T> {
    pub fn new(
        split: SplittingData,
        m: T,
        amplitude: SpectralAmplitude<T>,
        transverse: Option<SchwartzAmplitude<T>>,
        ybar_cutoff: Option<YbarCutoff<T>>,
    ) -> Result<Self> {
        let (n, k) = (split.n, split.k);
        if n > 3 || k > 2 {
            return Err(Error::Invalid("intersecting distributions are implemented for n <= 3, k <= 2".into()));
        }
        match &amplitude {
            SpectralAmplitude::HermiteGaussian(a) => check_dim(n + 1, a.n_passive())?,
            SpectralAmplitude::CutoffSpectrum { multiplier, .. } => check_dim(n, multiplier.nvars())?,
        }
        match (&transverse, k) {
            (Some(p), 2) => check_dim(n, p.n_passive())?,
            (None, 1) => {}
            _ => return Err(Error::Invalid("a v-profile is required exactly when k = 2".into())),
        }
        if let Some(c) = ybar_cutoff {
            if !(c.width > T::zero()) {
                return Err(Error::Invalid("cutoff width must be positive".into()));
            }
        }
        let transform = match &amplitude {
            SpectralAmplitude::HermiteGaussian(a) => Some(a.fourier_transform()),
            _ => None,
        };
        let transverse_transform = transverse.as_ref().map(|p| p.fourier_transform());
        Ok(Self { n, k, m, amplitude, transverse, ybar_cutoff, transform, transverse_transform })
    }

    pub fn hermite(split: SplittingData, m: T, a: SchwartzAmplitude<T>) -> Result<Self> {
        Self::new(split, m, SpectralAmplitude::HermiteGaussian(a), None, None)
    }

    pub fn split(&self) -> SplittingData {
        SplittingData { n: self.n, k: self.k }
    }

    pub fn exponent(&self) -> T {
        intersecting_exponent(self.m, self.n, self.k)
    }

    /// Index of `ȳ` among the passive variables.
    pub fn ybar_index(&self) -> usize {
        self.n
    }

    pub fn depends_on_ybar(&self) -> bool {
        match &self.amplitude {
            SpectralAmplitude::HermiteGaussian(a) => a.depends_on_passive(self.n),
            _ => false,
        }
    }

    /// Closed-form `â` for Hermite amplitudes.
    pub fn transform(&self) -> Option<&SchwartzAmplitude<T>> {
        self.transform.as_ref()
    }

    fn passive(&self, x: T, y: &[T], ybar: T) -> Vec<T> {
        std::iter::once(x).chain(y.iter().copied()).chain(std::iter::once(ybar)).collect()
    }

    fn transverse_direct(&self, x: T, y: &[T], opts: &EvalOptions<T>) -> QuadResult<T> {
        match &self.transverse {
            None => QuadResult { value: real(T::one()), ..zero_result() },
            Some(p) => {
                let mut pas = vec![x];
                pas.extend_from_slice(y);
                oscillatory_line(&p.freeze(&pas), p, y[0] / x, opts)
            }
        }
    }

    fn transverse_closed(&self, x: T, y: &[T]) -> Cx<T> {
        match &self.transverse_transform {
            None => real(T::one()),
            Some(ph) => {
                let mut pas = vec![x];
                pas.extend_from_slice(y);
                ph.eval(&pas, y[0] / x)
            }
        }
    }

    /// Length scale of `â` in `Z'`.
    fn z_scale(&self) -> T {
        match &self.transform {
            Some(t) if !t.is_zero() => t.length_scale(),
            _ => T::lit(0.05),
        }
    }

    /// Interval of `Z'` outside which `â` is negligible.
    fn z_support(&self) -> (T, T) {
        match &self.transform {
            Some(t) => t.support_hint(),
            None => (T::zero(), T::one()),
        }
    }
}

/// Breakpoints on `[0, ∞)` for a `ȳ`-integrand whose mass sits in
/// `support`: outward scan at doubling offsets from `center` (stopping once
/// quiet or beyond `reach`), refined to `step` inside the support.
fn ybar_breaks<T: Scalar>(f: &dyn Fn(T) -> Cx<T>, center: T, step: T, support: (T, T), reach: T, extra: &[T], threshold: T) -> Vec<T> {
    let center = center.max(T::zero());
    let mut pts = vec![center];
    let mut peak = f(center).norm();
    for dir in [-T::one(), T::one()] {
        let mut quiet = 0;
        let mut off = step;
        loop {
            let t = center + dir * off;
            if t <= T::zero() {
                pts.push(T::zero());
                break;
            }
            let m = f(t).norm();
            peak = peak.max(m);
            pts.push(t);
            if m <= threshold * peak {
                quiet += 1;
            } else {
                quiet = 0;
            }
            if quiet >= 2 || off > reach {
                break;
            }
            off = off * T::lit(2.0);
        }
    }
    let lo = pts.iter().copied().fold(T::infinity(), T::min);
    let hi = pts.iter().copied().fold(T::neg_infinity(), T::max);
    let (s_lo, s_hi) = (support.0.max(lo), support.1.min(hi));
    pts.extend(extra.iter().copied().chain([s_lo, s_hi]).filter(|&e| e > lo && e < hi));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    let mut out = Vec::with_capacity(pts.len());
    for w in pts.windows(2) {
        if w[0] >= s_lo && w[1] <= s_hi {
            let r = refine_breaks(w, step * T::lit(4.0));
            out.extend_from_slice(&r[..r.len() - 1]);
        } else {
            out.push(w[0]);
        }
    }
    out.push(hi);
    out
}

impl<T: Scalar> Intersecting<T> {
    fn outer_breaks(&self, f: &dyn Fn(T) -> Cx<T>, x: T, yk: T, threshold: T) -> Vec<T> {
        let step = x * self.z_scale();
        let (zlo, zhi) = self.z_support();
        let mut extra = vec![yk];
        if let Some(c) = self.ybar_cutoff {
            extra.extend([c.start, c.start + c.width]);
        }
        let reach = x * (zlo.abs().max(zhi.abs()) * T::lit(2.0) + T::lit(64.0));
        ybar_breaks(f, yk, step, (yk - x * zhi, yk - x * zlo), reach, &extra, threshold)
    }
}

/// Nested quadrature of `x^e ∫_0^∞ ∫ e^{iζ(y_k−ȳ)/x} a dζ dȳ` (times the
/// `v`-integral when `k = 2`).
pub fn eval_intersecting_direct<T: Scalar>(d: &Intersecting<T>, x: T, y: &[T], opts: &EvalOptions<T>) -> Result<EvalReport<T>> {
    check_x(x)?;
    check_dim(d.n - 1, y.len())?;
    let yk = y[d.k - 1];
    let inner_err = Cell::new(T::zero());
    let inner_ok = Cell::new(true);
    let chi = |ybar: T| d.ybar_cutoff.map(|c| c.eval(ybar)).unwrap_or_else(T::one);
    let frozen_fixed = match &d.amplitude {
        SpectralAmplitude::HermiteGaussian(a) if !d.depends_on_ybar() => Some(a.freeze(&d.passive(x, y, T::zero()))),
        _ => None,
    };
    let inner = |ybar: T| -> Cx<T> {
        let c = chi(ybar);
        if c == T::zero() {
            return real(T::zero());
        }
        let omega = (yk - ybar) / x;
        let q = match &d.amplitude {
            SpectralAmplitude::HermiteGaussian(a) => match &frozen_fixed {
                Some(fr) => oscillatory_line(fr, a, omega, opts),
                None => oscillatory_line(&a.freeze(&d.passive(x, y, ybar)), a, omega, opts),
            },
            SpectralAmplitude::CutoffSpectrum { table, .. } => {
                let l = table.half_width();
                let period = T::lit(2.0) * T::PI() / (omega.abs() + T::one());
                let breaks = refine_breaks(&[-l, l], opts.periods_per_panel * period);
                let f = |z: T| expi(omega * z) * table.eval(z);
                integrate_breaks(&f, &breaks, &opts.inner)
            }
        };
        inner_err.set(inner_err.get().max(q.error));
        inner_ok.set(inner_ok.get() && q.converged);
        q.value * c
    };
    let breaks = d.outer_breaks(&inner, x, yk, opts.outer.tail_threshold);
    let span = breaks.last().copied().unwrap_or(T::zero()) - breaks[0];
    let mut outer_opts = opts.outer;
    outer_opts.abs_tol = outer_opts.abs_tol.max(span * inner_err.get().max(opts.inner.abs_tol));
    let outer = integrate_breaks(&inner, &breaks, &outer_opts);
    let trans = d.transverse_direct(x, y, opts);
    let pre = real(x.powf(d.exponent())) * trans.value;
    let multiplier = match &d.amplitude {
        SpectralAmplitude::CutoffSpectrum { multiplier, .. } => multiplier.eval(&xy_args(x, y)),
        _ => real(T::one()),
    };
    let value = pre * multiplier * outer.value;
    let err = (pre * multiplier).norm() * (outer.error + inner_err.get() * span) + (x.powf(d.exponent()) * multiplier.norm() * outer.value.norm()) * trans.error;
    Ok(EvalReport {
        value,
        est_error: err,
        method: EvalMethod::DirectQuadrature,
        converged: outer.converged && inner_ok.get() && trans.converged,
    })
}

/// Closed-form `â` integrated in one dimension: `x^{e+1} ∫_{−∞}^{Z} â(Z') dZ'`
/// with `Z = y_k/x`, or `x^e ∫_0^∞ χ(ȳ) â((y_k − ȳ)/x) dȳ` when `a`
/// depends on `ȳ` or a `ȳ`-cutoff is present.
pub fn eval_intersecting_reduced<T: Scalar>(d: &Intersecting<T>, x: T, y: &[T], opts: &EvalOptions<T>) -> Result<EvalReport<T>> {
    check_x(x)?;
    check_dim(d.n - 1, y.len())?;
    let yk = y[d.k - 1];
    let z = yk / x;
    let trans = d.transverse_closed(x, y);
    let e = d.exponent();
    let xy = xy_args(x, y);
    let q = if !d.depends_on_ybar() && d.ybar_cutoff.is_none() {
        let pre = real(x.powf(e + T::one())) * trans;
        let q = match &d.amplitude {
            SpectralAmplitude::HermiteGaussian(_) => {
                let ah = d.transform.as_ref().expect("hermite transform");
                let fr = ah.freeze(&d.passive(x, y, T::zero()));
                if fr.is_zero() {
                    zero_result()
                } else {
                    let (lo, _) = ah.support_hint();
                    let f = |t: T| fr.eval(t);
                    if lo < z {
                        integrate_breaks(&f, &refine_breaks(&[lo, z], ah.length_scale()), &opts.outer)
                    } else {
                        quad::integrate_tail(&f, z, -T::one(), ah.length_scale(), &opts.outer)
                    }
                }
            }
            SpectralAmplitude::CutoffSpectrum { multiplier, .. } => {
                let top = z.min(T::one());
                if top <= T::zero() {
                    zero_result()
                } else {
                    let breaks = refine_breaks(&[T::zero(), top], T::lit(0.0625));
                    let q = integrate_breaks(&|t: T| real(alpha_prime(t)), &breaks, &opts.outer);
                    q.scaled(multiplier.eval(&xy))
                }
            }
        };
        return Ok(EvalReport::from_quad(pre, q, EvalMethod::FourierReduced));
    } else {
        let integrand = |ybar: T| -> Cx<T> {
            let c = d.ybar_cutoff.map(|c| c.eval(ybar)).unwrap_or_else(T::one);
            if c == T::zero() {
                return real(T::zero());
            }
            let zp = (yk - ybar) / x;
            let v = match &d.amplitude {
                SpectralAmplitude::HermiteGaussian(_) => d.transform.as_ref().expect("hermite").eval(&d.passive(x, y, ybar), zp),
                SpectralAmplitude::CutoffSpectrum { multiplier, .. } => multiplier.eval(&xy) * alpha_prime(zp),
            };
            v * c
        };
        let breaks = d.outer_breaks(&integrand, x, yk, opts.outer.tail_threshold);
        integrate_breaks(&integrand, &breaks, &opts.outer)
    };
    let pre = real(x.powf(e)) * trans;
    Ok(EvalReport::from_quad(pre, q, EvalMethod::FourierReduced))
}

/// Fibred amplitude: smooth in chart coordinates (`p = 0`), or Schwartz in `v`
/// with passive chart coordinates (`p = 1`).
#[derive(Debug, Clone, PartialEq)]
pub enum FibredAmplitude<T> {
    Smooth(Polynomial<Cx<T>>),
    Schwartz(SchwartzAmplitude<T>),
}

/// `ρ^{r+n/4−k/2} σ^{m+n/4−p/2} ∫ e^{iφ̃/σ} a dv` in the chart
/// `ff_projective_k`, with `ρ = y_k`, `σ = x/y_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fibred<T> {
    pub n: usize,
    pub k: usize,
    pub m: T,
    pub r: T,
    /// `φ̃` in `(ρ, w, y'', v)`.
    pub phase: PhaseFunction<T>,
    pub amplitude: FibredAmplitude<T>,
}

impl<T: Scalar> Fibred<T> {
    pub fn new(split: SplittingData, m: T, r: T, phase: PhaseFunction<T>, amplitude: FibredAmplitude<T>) -> Result<Self> {
        let n = split.n;
        check_dim(n - 1, phase.n_y())?;
        match (&amplitude, phase.n_v()) {
            (FibredAmplitude::Smooth(a), 0) => check_dim(n, a.nvars())?,
            (FibredAmplitude::Schwartz(a), 1) => check_dim(n, a.n_passive())?,
            _ => return Err(Error::Invalid("fibred amplitudes: smooth with p = 0 or Schwartz with p = 1".into())),
        }
        Ok(Self { n, k: split.k, m, r, phase, amplitude })
    }

    pub fn split(&self) -> SplittingData {
        SplittingData { n: self.n, k: self.k }
    }

    pub fn p(&self) -> usize {
        self.phase.n_v()
    }

    pub fn rho_exponent(&self) -> T {
        type2_exponent(self.r, self.n, self.k)
    }

    pub fn sigma_exponent(&self) -> T {
        type1_exponent(self.m, self.n) - T::from_usize_lossy(self.p()) / T::lit(2.0)
    }
}

pub fn eval_fibred<T: Scalar>(d: &Fibred<T>, cp: &ChartPoint<T>, opts: &EvalOptions<T>) -> Result<EvalReport<T>> {
    let split = d.split();
    let cp = transition(cp, Chart::FfProjective(d.k), split)?;
    let c = &cp.coords;
    let (rho, sigma) = (c[0], c[1]);
    if !(rho > T::zero() && sigma > T::zero()) {
        return Err(Error::OutOfDomain("fibred evaluation needs an interior point".into()));
    }
    let base: Vec<T> = std::iter::once(rho).chain(c[2..].iter().copied()).collect();
    let pre = real(rho.powf(d.rho_exponent()) * sigma.powf(d.sigma_exponent()));
    match &d.amplitude {
        FibredAmplitude::Smooth(a) => {
            let args: Vec<Cx<T>> = c.iter().map(|&t| real(t)).collect();
            let v = expi(d.phase.eval(&base, &[]) / sigma) * a.eval(&args);
            Ok(EvalReport::closed(pre * v))
        }
        FibredAmplitude::Schwartz(a) => {
            let fr = a.freeze(c);
            if fr.is_zero() {
                return Ok(EvalReport::closed(real(T::zero())));
            }
            let (lo, hi) = a.support_hint();
            let samples = 64;
            let mut slope = T::zero();
            for i in 0..=samples {
                let v = lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(samples);
                slope = slope.max(d.phase.grad_v(&base, &[v])[0].abs());
            }
            let omega = slope / sigma;
            let period = T::lit(2.0) * T::PI() / omega.max(T::lit(1e-300));
            let breaks = refine_breaks(&[lo, hi], (opts.periods_per_panel * period).min(a.length_scale() * T::lit(2.0)));
            let f = |v: T| expi(d.phase.eval(&base, &[v]) / sigma) * fr.eval(v);
            let q = integrate_breaks(&f, &breaks, &opts.inner);
            Ok(EvalReport::from_quad(pre, q, EvalMethod::DirectQuadrature))
        }
    }
}

#[derive(Debug, Clone)]
pub enum ModelDistribution<T> {
    Type1(Type1<T>),
    Type2(Type2<T>),
    Intersecting(Intersecting<T>),
    Fibred(Fibred<T>),
}

impl<T: Scalar> ModelDistribution<T> {
    pub fn n(&self) -> usize {
        match self {
            Self::Type1(d) => d.n,
            Self::Type2(d) => d.n,
            Self::Intersecting(d) => d.n,
            Self::Fibred(d) => d.n,
        }
    }

    /// Default evaluation path for each class.
    pub fn eval(&self, x: T, y: &[T], opts: &EvalOptions<T>) -> Result<EvalReport<T>> {
        match self {
            Self::Type1(d) => eval_type1(d, x, y),
            Self::Type2(d) => eval_type2(d, x, y),
            Self::Intersecting(d) => eval_intersecting_reduced(d, x, y, opts),
            Self::Fibred(d) => {
                let p = XPoint::new(x, y.to_vec())?;
                let cp = to_chart(&p, Chart::FfProjective(d.k), d.split())?;
                eval_fibred(d, &cp, opts)
            }
        }
    }
}

/// Evaluates at every point in parallel; output order matches input order.
pub fn eval_batch<T: Scalar>(
    d: &ModelDistribution<T>,
    points: &[(T, Vec<T>)],
    opts: &EvalOptions<T>,
) -> Vec<Result<EvalReport<T>>> {
    points.par_iter().map(|(x, y)| d.eval(*x, y, opts)).collect()
}
