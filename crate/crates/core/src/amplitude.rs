//! Hermite–Gaussian Schwartz amplitudes, closed under the Fourier transform
//! `â(Z) = ∫ e^{iζZ} a(ζ) dζ`, and the canonical cutoff `α`.
//!
//! A term is `c(p)·e^{iβw}·H_k(t)·e^{−t²}` with `t = (w − c₀)/σ`, physicists'
//! Hermite polynomials `H_k`, and a coefficient polynomial `c` in passive
//! variables `p` (such as `x`, `y`, `ȳ`).

use num_traits::Zero;

use crate::blowup::fit_slope;
use crate::error::{check_dim, Error, Result};
use crate::poly::Polynomial;
use crate::scalar::{cx, expi, real, Cx, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct HermiteTerm<T> {
    pub coeff: Polynomial<Cx<T>>,
    pub index: u32,
    pub center: T,
    pub width: T,
    pub modulation: T,
}

impl<T: Scalar> HermiteTerm<T> {
    /// Constant coefficient, no modulation.
    pub fn simple(n_passive: usize, coeff: Cx<T>, index: u32, center: T, width: T) -> Self {
        Self {
            coeff: Polynomial::constant(n_passive, coeff),
            index,
            center,
            width,
            modulation: T::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchwartzAmplitude<T> {
    n_passive: usize,
    terms: Vec<HermiteTerm<T>>,
}

/// `H_k(t)·e^{−t²}` by the three-term recurrence.
pub fn hermite_function<T: Scalar>(k: u32, t: T) -> T {
    let g = (-t * t).exp();
    if k == 0 {
        return g;
    }
    let two = T::lit(2.0);
    let (mut h0, mut h1) = (T::one(), two * t);
    for j in 1..k {
        let h2 = two * t * h1 - two * T::from_usize_lossy(j as usize) * h0;
        h0 = h1;
        h1 = h2;
    }
    h1 * g
}

fn i_pow<T: Scalar>(k: u32) -> Cx<T> {
    match k % 4 {
        0 => real(T::one()),
        1 => cx(T::zero(), T::one()),
        2 => real(-T::one()),
        _ => cx(T::zero(), -T::one()),
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |a, j| a * j as f64)
}

impl<T: Scalar> SchwartzAmplitude<T> {
    pub fn new(n_passive: usize, terms: Vec<HermiteTerm<T>>) -> Result<Self> {
        for t in &terms {
            check_dim(n_passive, t.coeff.nvars())?;
            if !(t.width > T::zero()) || !t.center.is_finite() || !t.modulation.is_finite() {
                return Err(Error::Invalid("Hermite terms need width > 0 and finite parameters".into()));
            }
        }
        let terms = terms.into_iter().filter(|t| !t.coeff.is_zero()).collect();
        Ok(Self { n_passive, terms })
    }

    pub fn zero(n_passive: usize) -> Self {
        Self { n_passive, terms: Vec::new() }
    }

    /// `e^{−w²}` with unit coefficient.
    pub fn gaussian(n_passive: usize) -> Self {
        Self::single(n_passive, real(T::one()), 0, T::zero(), T::one())
    }

    pub fn single(n_passive: usize, coeff: Cx<T>, index: u32, center: T, width: T) -> Self {
        Self::new(n_passive, vec![HermiteTerm::simple(n_passive, coeff, index, center, width)]).expect("valid term")
    }

    pub fn n_passive(&self) -> usize {
        self.n_passive
    }

    pub fn terms(&self) -> &[HermiteTerm<T>] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n_passive, other.n_passive);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { n_passive: self.n_passive, terms }
    }

    /// Multiplies every coefficient by a passive polynomial.
    pub fn mul_poly(&self, p: &Polynomial<Cx<T>>) -> Self {
        assert_eq!(p.nvars(), self.n_passive);
        let terms = self
            .terms
            .iter()
            .map(|t| HermiteTerm { coeff: &t.coeff * p, ..t.clone() })
            .filter(|t| !t.coeff.is_zero())
            .collect();
        Self { n_passive: self.n_passive, terms }
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        self.mul_poly(&Polynomial::constant(self.n_passive, s))
    }

    /// Replaces the coefficient polynomials by `f(coeff)`.
    pub fn map_coeffs(&self, n_passive: usize, f: impl Fn(&Polynomial<Cx<T>>) -> Polynomial<Cx<T>>) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let c = f(&t.coeff);
                assert_eq!(c.nvars(), n_passive);
                HermiteTerm { coeff: c, ..t.clone() }
            })
            .filter(|t| !t.coeff.is_zero())
            .collect();
        Self { n_passive, terms }
    }

    fn basis(t: &HermiteTerm<T>, w: T) -> Cx<T> {
        let s = (w - t.center) / t.width;
        let h = hermite_function(t.index, s);
        if t.modulation == T::zero() {
            real(h)
        } else {
            expi(t.modulation * w) * h
        }
    }

    /// `Σ c(p)·basis(w)` as a polynomial in the passive variables.
    pub fn eval_coefficients(&self, w: T) -> Polynomial<Cx<T>> {
        let mut out = Polynomial::zero(self.n_passive);
        for t in &self.terms {
            out = &out + &t.coeff.scale(&Self::basis(t, w));
        }
        out
    }

    /// Evaluates the coefficients once; the result is a fast profile in `w`.
    pub fn freeze(&self, passive: &[T]) -> FrozenAmplitude<T> {
        debug_assert_eq!(passive.len(), self.n_passive);
        let args: Vec<Cx<T>> = passive.iter().map(|&p| real(p)).collect();
        let terms = self
            .terms
            .iter()
            .map(|t| FrozenTerm {
                coeff: t.coeff.eval(&args),
                index: t.index,
                center: t.center,
                width: t.width,
                modulation: t.modulation,
            })
            .filter(|t| t.coeff != Cx::zero())
            .collect();
        FrozenAmplitude { terms }
    }

    pub fn eval(&self, passive: &[T], w: T) -> Cx<T> {
        self.freeze(passive).eval(w)
    }

    /// `â(Z) = ∫ e^{iζZ} a(ζ) dζ`, in closed form.
    pub fn fourier_transform(&self) -> Self {
        let sqrt_pi = T::PI().sqrt();
        let mut terms = Vec::new();
        for t in &self.terms {
            let k = t.index;
            let phase = expi(t.center * t.modulation) * i_pow::<T>(k) * (t.width * sqrt_pi);
            for j in 0..=k / 2 {
                let mult = T::lit(factorial(k) / (factorial(j) * factorial(k - 2 * j)));
                terms.push(HermiteTerm {
                    coeff: t.coeff.scale(&(phase * mult)),
                    index: k - 2 * j,
                    center: -t.modulation,
                    width: T::lit(2.0) / t.width,
                    modulation: t.center,
                });
            }
        }
        Self { n_passive: self.n_passive, terms }
    }

    /// `a(−w)`.
    pub fn reflect(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| HermiteTerm {
                coeff: if t.index % 2 == 1 { -&t.coeff } else { t.coeff.clone() },
                index: t.index,
                center: -t.center,
                width: t.width,
                modulation: -t.modulation,
            })
            .collect();
        Self { n_passive: self.n_passive, terms }
    }

    /// Inverse of [`fourier_transform`](Self::fourier_transform): `(2π)^{-1} ∫ e^{−iZζ} a(Z) dZ`.
    pub fn inverse_fourier_transform(&self) -> Self {
        self.fourier_transform().reflect().scale(real(T::one() / (T::lit(2.0) * T::PI())))
    }

    /// `∂_w a`.
    pub fn derivative(&self) -> Self {
        let mut terms = Vec::new();
        for t in &self.terms {
            if t.modulation != T::zero() {
                terms.push(HermiteTerm {
                    coeff: t.coeff.scale(&cx(T::zero(), t.modulation)),
                    ..t.clone()
                });
            }
            terms.push(HermiteTerm {
                coeff: t.coeff.scale(&real(-t.width.recip())),
                index: t.index + 1,
                ..t.clone()
            });
        }
        Self { n_passive: self.n_passive, terms }
    }

    /// `∫_ℝ a(w) dw = â(0)`, as a polynomial in the passive variables.
    pub fn integral_over_line(&self) -> Polynomial<Cx<T>> {
        self.fourier_transform().eval_coefficients(T::zero())
    }

    /// Evaluates the passive variable `var` at `value`, keeping the arity.
    pub fn substitute_passive(&self, var: usize, value: T) -> Self {
        let n = self.n_passive;
        let subs: Vec<Polynomial<Cx<T>>> = (0..n)
            .map(|i| if i == var { Polynomial::constant(n, real(value)) } else { Polynomial::var(n, i) })
            .collect();
        self.map_coeffs(n, |c| c.compose(&subs))
    }

    pub fn depends_on_passive(&self, var: usize) -> bool {
        self.terms.iter().any(|t| t.coeff.depends_on(var))
    }

    /// A length scale below which the amplitude varies (smallest width or
    /// modulation wavelength).
    pub fn length_scale(&self) -> T {
        self.terms
            .iter()
            .map(|t| {
                let osc = if t.modulation == T::zero() { T::infinity() } else { T::one() / t.modulation.abs() };
                let hermite = t.width / (T::one() + T::from_usize_lossy(t.index as usize)).sqrt();
                hermite.min(osc)
            })
            .fold(T::infinity(), T::min)
    }

    /// An interval outside which every term is below `e^{-40}` of its scale.
    pub fn support_hint(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for t in &self.terms {
            let r = t.width * (T::lit(7.0) + T::from_usize_lossy(t.index as usize).sqrt());
            lo = lo.min(t.center - r);
            hi = hi.max(t.center + r);
        }
        if lo > hi {
            (T::zero(), T::zero())
        } else {
            (lo, hi)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrozenTerm<T> {
    pub coeff: Cx<T>,
    pub index: u32,
    pub center: T,
    pub width: T,
    pub modulation: T,
}

/// An amplitude with its passive variables fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenAmplitude<T> {
    pub terms: Vec<FrozenTerm<T>>,
}

impl<T: Scalar> FrozenAmplitude<T> {
    pub fn eval(&self, w: T) -> Cx<T> {
        let mut acc = Cx::zero();
        for t in &self.terms {
            let h = hermite_function(t.index, (w - t.center) / t.width);
            if h == T::zero() {
                continue;
            }
            let b = if t.modulation == T::zero() { real(h) } else { expi(t.modulation * w) * h };
            acc = acc + t.coeff * b;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// `h(t) = e^{−1/t}` for `t > 0`, else 0.
fn bump_h<T: Scalar>(t: T) -> T {
    if t > T::zero() {
        (-t.recip()).exp()
    } else {
        T::zero()
    }
}

/// Canonical smooth step: 0 for `t ≤ 0`, 1 for `t ≥ 1`.
pub fn alpha<T: Scalar>(t: T) -> T {
    let a = bump_h(t);
    let b = bump_h(T::one() - t);
    if a + b == T::zero() {
        return if t >= T::one() { T::one() } else { T::zero() };
    }
    a / (a + b)
}

pub fn alpha_prime<T: Scalar>(t: T) -> T {
    if t <= T::zero() || t >= T::one() {
        return T::zero();
    }
    let s = T::one() - t;
    let a = bump_h(t);
    let b = bump_h(s);
    let da = a / (t * t);
    let db = b / (s * s);
    let den = a + b;
    (da * b + a * db) / (den * den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayWindow<T> {
    /// Tail radii `R` span `[r_min, r_max]` geometrically.
    pub r_min: T,
    pub r_max: T,
    pub radii: usize,
    /// Sampling density of `f` per doubling of `|Z|`.
    pub samples_per_octave: usize,
    pub positive: bool,
    pub negative: bool,
    /// Envelope values below `noise_floor · max|f|` are excluded from the fit.
    pub noise_floor: T,
}

impl<T: Scalar> DecayWindow<T> {
    pub fn new(r_min: T, r_max: T) -> Self {
        Self {
            r_min,
            r_max,
            radii: 16,
            samples_per_octave: 64,
            positive: true,
            negative: true,
            noise_floor: T::floor_tol(1e-12),
        }
    }

    pub fn positive_only(mut self) -> Self {
        self.negative = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport<T> {
    /// Fitted slope of `log sup_{|Z|≥R}|f|` against `log R`; `-∞` when the
    /// envelope drops below the noise floor too quickly to fit.
    pub slope: T,
    /// `slope + N` for `N = 0..=n_max`: growth exponent of `sup |Z|^N |f|`.
    pub exponents: Vec<T>,
    pub passes: Vec<bool>,
    /// Number of radii used in the fit.
    pub fitted_points: usize,
}

impl<T: Scalar> DecayReport<T> {
    pub fn passes_up_to(&self, n: usize) -> bool {
        self.passes[..=n].iter().all(|&p| p)
    }
}

/// Fits the decay of the tail envelope `sup_{R≤|Z|≤r_max}|f(Z)|` over the
/// window; order `N` passes when the fitted exponent of `|Z|^N |f|` is ≤ 0.2.
pub fn schwartz_decay_report<T: Scalar>(f: &dyn Fn(T) -> Cx<T>, n_max: usize, window: &DecayWindow<T>) -> Result<DecayReport<T>> {
    if !(window.r_min > T::zero() && window.r_max > window.r_min) || window.radii < 3 {
        return Err(Error::Invalid("decay window needs 0 < r_min < r_max and >= 3 radii".into()));
    }
    let octaves = (window.r_max / window.r_min).log2();
    let count = (octaves * T::from_usize_lossy(window.samples_per_octave)).ceil().to_usize().unwrap_or(1).max(2);
    let ratio = (window.r_max / window.r_min).powf(T::one() / T::from_usize_lossy(count));
    let mut samples = Vec::with_capacity(count + 1);
    let mut r = window.r_min;
    for _ in 0..=count {
        let mut m = T::zero();
        if window.positive {
            m = m.max(f(r).norm());
        }
        if window.negative {
            m = m.max(f(-r).norm());
        }
        samples.push((r, m));
        r = r * ratio;
    }
    let peak = samples.iter().map(|s| s.1).fold(T::zero(), T::max);
    let rr = (window.r_max / window.r_min).powf(T::one() / T::from_usize_lossy(window.radii - 1));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut radius = window.r_min;
    for _ in 0..window.radii {
        let env = samples.iter().filter(|s| s.0 >= radius * T::lit(1.0 - 1e-12)).map(|s| s.1).fold(T::zero(), T::max);
        if env > window.noise_floor * peak && env > T::zero() {
            xs.push(radius.ln());
            ys.push(env.ln());
        }
        radius = radius * rr;
    }
    let slope = if peak == T::zero() || xs.len() < 3 { T::neg_infinity() } else { fit_slope(&xs, &ys) };
    let exponents: Vec<T> = (0..=n_max).map(|n| slope + T::from_usize_lossy(n)).collect();
    let passes = exponents.iter().map(|&e| e <= T::lit(0.2)).collect();
    Ok(DecayReport { slope, exponents, passes, fitted_points: xs.len() })
}
