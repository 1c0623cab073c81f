//! Splitting an intersecting distribution into `α(Z)·f + g` with `g`
//! Schwartz in `Z = y_k/x`, and the converse synthesis.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::amplitude::{alpha, alpha_prime, schwartz_decay_report, DecayReport, DecayWindow, HermiteTerm, SchwartzAmplitude};
use crate::chebyshev::PiecewiseChebyshev;
use crate::contact::SplittingData;
use crate::error::{check_dim, Error, Result};
use crate::oscillatory::{
    eval_type2, eval_type2_synthesis, CutoffSpectrumTable, EvalOptions, Intersecting, SpectralAmplitude, Type2,
};
use crate::poly::Polynomial;
use crate::quad::{integrate_breaks, integrate_line, refine_breaks, QuadOptions};
use crate::scalar::{cx, real, Cx, Scalar};

/// Amplitude after trading `(y_k − ȳ)^j` for `(ix ∂_ζ)^j`.
#[derive(Debug, Clone)]
pub struct YbarReduction<T> {
    /// `Σ_{j≤N} (ix)^j ∂_ζ^j a_j`, free of `ȳ`.
    pub main: SchwartzAmplitude<T>,
    /// `Σ_{j>N} (ix)^j ∂_ζ^j a_j`.
    pub remainder: SchwartzAmplitude<T>,
    /// `(j, ∂_ζ^j a_j)` for `j > N`.
    remainder_terms: Vec<(u32, SchwartzAmplitude<T>)>,
}

impl<T: Scalar> YbarReduction<T> {
    pub fn has_remainder(&self) -> bool {
        !self.remainder.is_zero()
    }

    /// `Σ_{j>N} x^j ‖F[∂^j a_j](x, y; ·)‖_{L¹}`, which bounds the remainder's
    /// contribution relative to the prefactor `x^{e+1}`.
    pub fn remainder_bound(&self, x: T, y: &[T]) -> T {
        let mut passive = vec![x];
        passive.extend_from_slice(y);
        passive.push(T::zero());
        let opts = QuadOptions::default();
        let mut total = T::zero();
        for (j, a) in &self.remainder_terms {
            let ah = a.fourier_transform();
            let fr = ah.freeze(&passive);
            if fr.is_zero() {
                continue;
            }
            let (lo, hi) = ah.support_hint();
            let q = integrate_line(&|z: T| real(fr.eval(z).norm()), (lo + hi) * T::lit(0.5), ah.length_scale(), &opts);
            total = total + x.powi(*j as i32) * q.value.re;
        }
        total
    }
}

/// Reduces the `ȳ`-dependence of an amplitude with passive variables
/// `(x, y_1, …, y_{n−1}, ȳ)`, where `y_k` sits at passive index `k`.
pub fn reduce_ybar_dependence<T: Scalar>(a: &SchwartzAmplitude<T>, k: usize, order: u32) -> Result<YbarReduction<T>> {
    let np = a.n_passive();
    if k == 0 || k + 1 >= np {
        return Err(Error::Invalid("y_k must be a passive variable before ȳ".into()));
    }
    let ybar = np - 1;
    // ȳ = y_k − δ, with δ stored in the ȳ slot
    let subs: Vec<Polynomial<Cx<T>>> = (0..np)
        .map(|i| {
            if i == ybar {
                &Polynomial::var(np, k) - &Polynomial::var(np, ybar)
            } else {
                Polynomial::var(np, i)
            }
        })
        .collect();
    let mut by_power: BTreeMap<u32, Vec<HermiteTerm<T>>> = BTreeMap::new();
    for t in a.terms() {
        for (j, part) in t.coeff.compose(&subs).split_by_power(ybar).into_iter().enumerate() {
            if !part.is_zero() {
                by_power.entry(j as u32).or_default().push(HermiteTerm { coeff: part, ..t.clone() });
            }
        }
    }
    let mut main = SchwartzAmplitude::zero(np);
    let mut remainder = SchwartzAmplitude::zero(np);
    let mut remainder_terms = Vec::new();
    for (j, terms) in by_power {
        let mut dj = SchwartzAmplitude::new(np, terms)?;
        for _ in 0..j {
            dj = dj.derivative();
        }
        let mut e = vec![0; np];
        e[0] = j;
        let factor = Polynomial::monomial(e, i_pow::<T>(j));
        let piece = dj.mul_poly(&factor);
        if j <= order {
            main = main.add(&piece);
        } else {
            remainder = remainder.add(&piece);
            remainder_terms.push((j, dj));
        }
    }
    Ok(YbarReduction { main, remainder, remainder_terms })
}

fn i_pow<T: Scalar>(j: u32) -> Cx<T> {
    match j % 4 {
        0 => cx(T::one(), T::zero()),
        1 => cx(T::zero(), T::one()),
        2 => cx(-T::one(), T::zero()),
        _ => cx(T::zero(), -T::one()),
    }
}

#[derive(Debug, Clone)]
pub struct DecomposeOptions<T> {
    /// Integration-by-parts steps in the `ȳ` reduction.
    pub order: u32,
    /// `x`-values at which `g` is tabulated.
    pub x_slices: Vec<T>,
    pub z_window: (T, T),
    pub interp_degree: usize,
    pub interp_tol: T,
    /// Largest `N` for the decay check on `g`.
    pub decay_order: usize,
    pub quad: QuadOptions<T>,
}

impl<T: Scalar> Default for DecomposeOptions<T> {
    fn default() -> Self {
        Self {
            order: 4,
            x_slices: Vec::new(),
            z_window: (T::lit(-12.0), T::lit(12.0)),
            interp_degree: 20,
            interp_tol: T::floor_tol(1e-12),
            decay_order: 6,
            quad: QuadOptions::new(1e-15, 1e-12),
        }
    }
}

/// `ĥ_e(x, Z')`, the coefficient of `y^e` in the transformed amplitude.
#[derive(Debug, Clone)]
struct Component<T> {
    y_exps: Vec<u32>,
    transform: SchwartzAmplitude<T>,
    /// `∫ ĥ_e`, a polynomial in `x`.
    integral: Polynomial<Cx<T>>,
}

impl<T: Scalar> Component<T> {
    /// `∫_{−∞}^{Z} (ĥ_e − d_e α')`, by quadrature from whichever side is shorter.
    fn g_quadrature(&self, x: T, z: T, opts: &QuadOptions<T>) -> Cx<T> {
        let fr = self.transform.freeze(&[x]);
        let d = self.integral.eval(&[real(x)]);
        let b = |t: T| fr.eval(t) - d * alpha_prime(t);
        let (lo, hi) = self.transform.support_hint();
        let lo = lo.min(T::zero());
        let hi = hi.max(T::one());
        let width = self.transform.length_scale().min(T::lit(0.25));
        let half = T::lit(0.5);
        let (a, c, sign) = if z <= half { (lo.min(z), z, T::one()) } else { (z, hi.max(z), -T::one()) };
        if a == c {
            return real(T::zero());
        }
        let mut br = vec![a];
        br.extend([T::zero(), T::one()].into_iter().filter(|&p| p > a && p < c));
        br.push(c);
        let q = integrate_breaks(&b, &refine_breaks(&br, width), opts);
        q.value * sign
    }

    fn cancellation(&self, x: T, opts: &QuadOptions<T>) -> T {
        let fr = self.transform.freeze(&[x]);
        let d = self.integral.eval(&[real(x)]);
        let (lo, hi) = self.transform.support_hint();
        let br = refine_breaks(&[lo.min(T::zero()), T::zero(), T::one(), hi.max(T::one())], self.transform.length_scale().min(T::lit(0.25)));
        let br: Vec<T> = {
            let mut v = br;
            v.dedup();
            v
        };
        integrate_breaks(&|t: T| fr.eval(t) - d * alpha_prime(t), &br, opts).value.norm()
    }
}

#[derive(Debug, Clone)]
struct Slice<T> {
    x: T,
    tables: Vec<PiecewiseChebyshev<T>>,
}

#[derive(Debug, Clone)]
pub struct SliceDiagnostics<T> {
    pub x: T,
    /// `max_e |∫_ℝ b_e|`.
    pub b_cancellation: T,
    pub interpolation_tail: T,
    /// Decay of `Z ↦ g(x, y(Z))` with the non-`k` coordinates of `y` at zero.
    pub decay: DecayReport<T>,
    pub remainder_bound: T,
}

#[derive(Debug, Clone)]
pub struct DecompositionDiagnostics<T> {
    pub slices: Vec<SliceDiagnostics<T>>,
    pub remainder_terms: bool,
}

impl<T: Scalar> DecompositionDiagnostics<T> {
    pub fn max_b_cancellation(&self) -> T {
        self.slices.iter().map(|s| s.b_cancellation).fold(T::zero(), T::max)
    }

    pub fn decay_passes(&self, n: usize) -> bool {
        self.slices.iter().all(|s| s.decay.passes_up_to(n))
    }
}

/// `u = x^{e+1} [P̂(y_1/x)] [α(Z) f(x, y) + g(x, y) + r(x, y)]`, `Z = y_k/x`,
/// with `r` the reduction remainder.
#[derive(Debug, Clone)]
pub struct Decomposition<T> {
    pub split: SplittingData,
    pub m: T,
    exponent: T,
    f: Polynomial<Cx<T>>,
    components: Vec<Component<T>>,
    slices: Vec<Slice<T>>,
    z_window: (T, T),
    remainder: Option<SchwartzAmplitude<T>>,
    transverse: Option<SchwartzAmplitude<T>>,
    quad: QuadOptions<T>,
    pub diagnostics: DecompositionDiagnostics<T>,
}

impl<T: Scalar> Decomposition<T> {
    /// `f` as a polynomial in `(x, y)`.
    pub fn f_polynomial(&self) -> &Polynomial<Cx<T>> {
        &self.f
    }

    pub fn f(&self, x: T, y: &[T]) -> Cx<T> {
        self.f.eval(&xy(x, y))
    }

    /// Prefactor exponent `e + 1` of the reconstruction.
    pub fn exponent(&self) -> T {
        self.exponent
    }

    pub fn g(&self, x: T, y: &[T]) -> Cx<T> {
        let z = y[self.split.k - 1] / x;
        let slice = self.slices.iter().find(|s| s.x == x);
        let inside = z >= self.z_window.0 && z <= self.z_window.1;
        let mut total = real(T::zero());
        for (i, c) in self.components.iter().enumerate() {
            let ge = match slice {
                Some(s) if inside => s.tables[i].eval(z).unwrap_or_else(|| c.g_quadrature(x, z, &self.quad)),
                _ => c.g_quadrature(x, z, &self.quad),
            };
            total = total + ge * monomial(&c.y_exps, y);
        }
        total
    }

    /// `∫_{−∞}^{Z} r̂`, zero without remainder terms.
    pub fn remainder_part(&self, x: T, y: &[T]) -> Cx<T> {
        let Some(r) = &self.remainder else {
            return real(T::zero());
        };
        let z = y[self.split.k - 1] / x;
        let mut passive = vec![x];
        passive.extend_from_slice(y);
        passive.push(T::zero());
        let fr = r.freeze(&passive);
        let (lo, _) = r.support_hint();
        if z <= lo {
            return real(T::zero());
        }
        integrate_breaks(&|t: T| fr.eval(t), &refine_breaks(&[lo, z], r.length_scale()), &self.quad).value
    }

    fn transverse_factor(&self, x: T, y: &[T]) -> Cx<T> {
        match &self.transverse {
            None => real(T::one()),
            Some(p) => p.eval(&xy(x, y).iter().map(|c| c.re).collect::<Vec<_>>(), y[0] / x),
        }
    }

    pub fn reconstruct(&self, x: T, y: &[T]) -> Cx<T> {
        let z = y[self.split.k - 1] / x;
        let inner = self.f(x, y) * alpha(z) + self.g(x, y) + self.remainder_part(x, y);
        inner * self.transverse_factor(x, y) * x.powf(self.exponent)
    }
}

fn xy<T: Scalar>(x: T, y: &[T]) -> Vec<Cx<T>> {
    std::iter::once(x).chain(y.iter().copied()).map(real).collect()
}

fn monomial<T: Scalar>(e: &[u32], y: &[T]) -> T {
    e.iter().zip(y).fold(T::one(), |acc, (&k, &v)| acc * v.powi(k as i32))
}

/// Drops the trailing (`ȳ`) variable of a polynomial that does not depend on it.
fn drop_last<T: Scalar>(p: &Polynomial<Cx<T>>) -> Polynomial<Cx<T>> {
    let n = p.nvars() - 1;
    Polynomial::from_terms(n, p.terms().map(|(e, c)| (e[..n].to_vec(), *c))).expect("arity")
}

/// Splits the coefficients by `y`-monomial, leaving amplitudes with passive `x` only.
fn split_by_y<T: Scalar>(a: &SchwartzAmplitude<T>, n_y: usize) -> Vec<(Vec<u32>, SchwartzAmplitude<T>)> {
    let mut groups: BTreeMap<Vec<u32>, Vec<HermiteTerm<T>>> = BTreeMap::new();
    for t in a.terms() {
        let mut by_e: BTreeMap<Vec<u32>, Vec<(Vec<u32>, Cx<T>)>> = BTreeMap::new();
        for (e, c) in t.coeff.terms() {
            by_e.entry(e[1..1 + n_y].to_vec()).or_default().push((vec![e[0]], *c));
        }
        for (ye, cs) in by_e {
            let coeff = Polynomial::from_terms(1, cs).expect("arity");
            groups.entry(ye).or_default().push(HermiteTerm { coeff, ..t.clone() });
        }
    }
    groups
        .into_iter()
        .map(|(e, terms)| (e, SchwartzAmplitude::new(1, terms).expect("arity")))
        .collect()
}

/// Forward decomposition of an intersecting distribution without `ȳ`-cutoff.
pub fn decompose_forward<T: Scalar>(d: &Intersecting<T>, opts: &DecomposeOptions<T>) -> Result<Decomposition<T>> {
    if d.ybar_cutoff.is_some() {
        return Err(Error::Precondition("decomposition needs an amplitude polynomial in ȳ (no ȳ-cutoff)".into()));
    }
    let split = d.split();
    let n_y = split.n - 1;
    let transverse = d.transverse.as_ref().map(|p| p.fourier_transform());
    let exponent = d.exponent() + T::one();
    let (f, components, reduction) = match &d.amplitude {
        SpectralAmplitude::CutoffSpectrum { multiplier, .. } => (multiplier.clone(), Vec::new(), None),
        SpectralAmplitude::HermiteGaussian(a) => {
            let red = reduce_ybar_dependence(a, split.k, opts.order)?;
            let ah = red.main.fourier_transform();
            let f = drop_last(&ah.integral_over_line());
            let comps = split_by_y(&ah, n_y)
                .into_iter()
                .map(|(y_exps, transform)| {
                    let integral = transform.integral_over_line();
                    Component { y_exps, transform, integral }
                })
                .collect();
            (f, comps, Some(red))
        }
    };
    let remainder = reduction.as_ref().filter(|r| r.has_remainder()).map(|r| r.remainder.fourier_transform());
    let xs = if opts.x_slices.is_empty() { vec![T::lit(0.1)] } else { opts.x_slices.clone() };
    let mut slices = Vec::with_capacity(xs.len());
    let mut diags = Vec::with_capacity(xs.len());
    let (zl, zh) = opts.z_window;
    let mut decomp = Decomposition {
        split,
        m: d.m,
        exponent,
        f,
        components,
        slices: Vec::new(),
        z_window: opts.z_window,
        remainder,
        transverse,
        quad: opts.quad,
        diagnostics: DecompositionDiagnostics { slices: Vec::new(), remainder_terms: false },
    };
    for &x in &xs {
        if !(x > T::zero()) {
            return Err(Error::OutOfDomain("x-slices must be positive".into()));
        }
        let mut tables = Vec::with_capacity(decomp.components.len());
        let mut cancel = T::zero();
        for c in &decomp.components {
            let g = |z: T| c.g_quadrature(x, z, &opts.quad);
            tables.push(PiecewiseChebyshev::adaptive(&g, zl, zh, opts.interp_degree, opts.interp_tol, 16)?);
            cancel = cancel.max(c.cancellation(x, &opts.quad));
        }
        let tail = tables.iter().map(|t| t.max_tail()).fold(T::zero(), T::max);
        slices.push(Slice { x, tables });
        diags.push((x, cancel, tail));
    }
    decomp.slices = slices;
    let (r_lo, r_hi) = decay_window_radii(&decomp);
    for (x, cancel, tail) in diags {
        let k = split.k;
        let profile = |z: T| {
            let mut y = vec![T::zero(); n_y];
            y[k - 1] = x * z;
            decomp.g(x, &y)
        };
        let window = DecayWindow::new(r_lo, r_hi);
        let decay = schwartz_decay_report(&profile, opts.decay_order, &window)?;
        let remainder_bound = reduction.as_ref().map(|r| r.remainder_bound(x, &vec![T::zero(); n_y])).unwrap_or(T::zero());
        decomp.diagnostics.slices.push(SliceDiagnostics { x, b_cancellation: cancel, interpolation_tail: tail, decay, remainder_bound });
    }
    decomp.diagnostics.remainder_terms = decomp.remainder.is_some();
    if !decomp.diagnostics.decay_passes(opts.decay_order) {
        return Err(Error::DecayCheck(format!(
            "g fails the Schwartz decay check up to N = {}",
            opts.decay_order
        )));
    }
    Ok(decomp)
}

/// Tail radii covering the region where the transformed amplitude lives.
fn decay_window_radii<T: Scalar>(d: &Decomposition<T>) -> (T, T) {
    let mut reach = T::one();
    for c in &d.components {
        let (lo, hi) = c.transform.support_hint();
        reach = reach.max(lo.abs()).max(hi.abs());
    }
    (T::one() + reach * T::lit(0.1), T::lit(2.0) * reach + T::lit(4.0))
}

/// An intersecting distribution whose value is `x^{e+1} α(y_k/x) f(x, y)`, `e + 1 = m + n/4 − k/2 + 1/2`.
pub fn decompose_converse<T: Scalar>(
    split: SplittingData,
    f: Polynomial<Cx<T>>,
    m: T,
    table: Arc<CutoffSpectrumTable<T>>,
) -> Result<Intersecting<T>> {
    check_dim(split.n, f.nvars())?;
    Intersecting::new(split, m, SpectralAmplitude::CutoffSpectrum { multiplier: f, table }, None, None)
}

/// Builds `x^{m+1/2} V(x, y/x)` (`n = 2`) as a type-2 distribution and compares
/// its synthesis from the inverse transform against the closed form; the
/// residual is `max |synthesised − closed| / x^{m+1/2}` over `points`.
pub fn type2_roundtrip<T: Scalar>(v: &SchwartzAmplitude<T>, m: T, points: &[(T, T)], opts: &EvalOptions<T>) -> Result<(Type2<T>, T)> {
    let d = Type2::new(SplittingData::new(2, 1)?, m + T::lit(0.5), vec![v.clone()])?;
    let mut residual = T::zero();
    for &(x, y) in points {
        let closed = eval_type2(&d, x, &[y])?;
        let synth = eval_type2_synthesis(&d, x, &[y], opts)?;
        residual = residual.max((closed.value - synth.value).norm() / x.powf(m + T::lit(0.5)));
    }
    Ok((d, residual))
}
