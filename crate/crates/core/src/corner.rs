//! Corner asymptotics at `mf ∩ ff` in a projective chart `(ρ, σ, …)` and the
//! Taylor criterion `c_{jl} = 0` for `l < j`.

use rayon::prelude::*;

use crate::blowup::{Chart, ChartPoint};
use crate::contact::SplittingData;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::poly::Polynomial;
use crate::scalar::{cx, real, Cx, Scalar};

/// Exponents `ρ^a σ^b` divided out before fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prefactor<T> {
    pub rho: T,
    pub sigma: T,
}

impl<T: Scalar> Prefactor<T> {
    /// `x^q = (ρσ)^q`.
    pub fn power_of_x(q: T) -> Self {
        Self { rho: q, sigma: q }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CornerGrid<T> {
    pub sigma0: T,
    pub rho0: T,
    /// Geometric levels `2^{-i}` for `i < levels`.
    pub levels: usize,
    pub order: usize,
    pub cond_threshold: T,
    /// Remaining chart coordinates, held fixed.
    pub rest: Vec<T>,
}

impl<T: Scalar> CornerGrid<T> {
    pub fn new(rest: Vec<T>) -> Self {
        Self {
            sigma0: T::lit(0.4),
            rho0: T::lit(0.2),
            levels: 8,
            order: 4,
            cond_threshold: T::lit(1e10),
            rest,
        }
    }

    fn sigmas(&self) -> Vec<T> {
        geometric(self.sigma0, self.levels)
    }

    fn rhos(&self) -> Vec<T> {
        geometric(self.rho0, self.levels)
    }
}

fn geometric<T: Scalar>(t0: T, levels: usize) -> Vec<T> {
    (0..levels).map(|i| t0 * T::lit(0.5).powi(i as i32)).collect()
}

/// `c[j][l]` multiplies `σ^j ρ^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticTable<T> {
    pub order: usize,
    pub c: Vec<Vec<Cx<T>>>,
    pub unc: Vec<Vec<T>>,
    pub prefactor: Prefactor<T>,
    /// Condition number of the (scaled) Vandermonde matrices.
    pub condition: T,
}

impl<T: Scalar> AsymptoticTable<T> {
    /// An exact table with zero uncertainty.
    pub fn exact(c: Vec<Vec<Cx<T>>>, prefactor: Prefactor<T>) -> Self {
        let order = c.len() - 1;
        let unc = vec![vec![T::zero(); order + 1]; order + 1];
        Self { order, c, unc, prefactor, condition: T::one() }
    }

    /// The fit cannot resolve the entry to `max_unc`.
    pub fn is_indeterminate(&self, j: usize, l: usize, max_unc: T) -> bool {
        !(self.unc[j][l] <= max_unc)
    }
}

fn vandermonde<T: Scalar>(ts: &[T], order: usize) -> Matrix<T> {
    let rows: Vec<Vec<T>> = ts.iter().map(|&t| (0..=order).map(|p| t.powi(p as i32)).collect()).collect();
    Matrix::from_rows(order + 1, &rows).expect("rectangular")
}

/// Least-squares polynomial coefficients of `vals` at nodes `ts`.
fn poly_fit<T: Scalar>(ts: &[T], vals: &[Cx<T>], order: usize, cond_max: T) -> Result<(Vec<Cx<T>>, T)> {
    let svd = vandermonde(ts, order).svd();
    let cond = svd.condition_number();
    if !(cond <= cond_max) {
        return Err(Error::IllConditioned {
            condition: cond.to_f64().unwrap_or(f64::INFINITY),
            hint: format!(
                "Vandermonde condition exceeds {:e}; lower the order or widen the grid",
                cond_max.to_f64().unwrap_or(f64::NAN)
            ),
        });
    }
    let re: Vec<T> = vals.iter().map(|v| v.re).collect();
    let im: Vec<T> = vals.iter().map(|v| v.im).collect();
    let tol = T::floor_tol(1e-14);
    let a = svd.solve(&re, tol);
    let b = svd.solve(&im, tol);
    Ok((a.into_iter().zip(b).map(|(r, i)| cx(r, i)).collect(), cond))
}

/// Two-stage fit on scaled nodes `s = σ/σ0`, `r = ρ/ρ0`, using only the
/// selected levels; returns unscaled coefficients.
fn two_stage<T: Scalar>(
    vals: &[Vec<Cx<T>>],
    grid: &CornerGrid<T>,
    rho_idx: &[usize],
    sig_idx: &[usize],
) -> Result<(Vec<Vec<Cx<T>>>, T)> {
    let n = grid.order;
    let s: Vec<T> = sig_idx.iter().map(|&i| T::lit(0.5).powi(i as i32)).collect();
    let r: Vec<T> = rho_idx.iter().map(|&i| T::lit(0.5).powi(i as i32)).collect();
    let mut cond = T::zero();
    let mut d = Vec::with_capacity(rho_idx.len());
    for &ir in rho_idx {
        let row: Vec<Cx<T>> = sig_idx.iter().map(|&is| vals[ir][is]).collect();
        let (coef, c) = poly_fit(&s, &row, n, grid.cond_threshold)?;
        cond = cond.max(c);
        d.push(coef);
    }
    let mut c = vec![vec![real(T::zero()); n + 1]; n + 1];
    for j in 0..=n {
        let col: Vec<Cx<T>> = d.iter().map(|dj| dj[j]).collect();
        let (coef, cc) = poly_fit(&r, &col, n, grid.cond_threshold)?;
        cond = cond.max(cc);
        for l in 0..=n {
            c[j][l] = coef[l] / (grid.sigma0.powi(j as i32) * grid.rho0.powi(l as i32));
        }
    }
    Ok((c, cond))
}

fn jackknife<T: Scalar>(reps: &[Vec<Vec<Cx<T>>>], order: usize) -> Vec<Vec<T>> {
    let m = T::from_usize_lossy(reps.len());
    let mut out = vec![vec![T::zero(); order + 1]; order + 1];
    for j in 0..=order {
        for l in 0..=order {
            let mean = reps.iter().fold(real(T::zero()), |a, r| a + r[j][l]) / m;
            let ss = reps.iter().map(|r| (r[j][l] - mean).norm_sqr()).sum::<T>();
            out[j][l] = (ss * (m - T::one()) / m).sqrt();
        }
    }
    out
}

/// Evaluates `u` on the geometric grid of the projective chart, strips the
/// prefactor and fits `Σ c_{jl} σ^j ρ^l`. Uncertainties combine leave-one-level-out
/// jackknife estimates over the `σ` and `ρ` levels.
pub fn extract_coefficients<T: Scalar>(
    u: &(dyn Fn(&ChartPoint<T>) -> Result<Cx<T>> + Sync),
    chart: Chart,
    prefactor: Prefactor<T>,
    grid: &CornerGrid<T>,
) -> Result<AsymptoticTable<T>> {
    if !matches!(chart, Chart::FfProjective(_)) {
        return Err(Error::Invalid("corner coefficients need a projective front-face chart".into()));
    }
    if grid.levels < grid.order + 2 {
        return Err(Error::Invalid("the grid needs at least order + 2 levels per axis".into()));
    }
    if !(grid.sigma0 < T::one() && grid.sigma0 > T::zero() && grid.rho0 > T::zero()) {
        return Err(Error::Invalid("need 0 < sigma0 < 1 and rho0 > 0".into()));
    }
    let sig = grid.sigmas();
    let rho = grid.rhos();
    let pts: Vec<(usize, usize)> = (0..rho.len()).flat_map(|i| (0..sig.len()).map(move |j| (i, j))).collect();
    let flat: Vec<Result<Cx<T>>> = pts
        .par_iter()
        .map(|&(i, j)| {
            let mut coords = vec![rho[i], sig[j]];
            coords.extend_from_slice(&grid.rest);
            let v = u(&ChartPoint { chart, coords })?;
            Ok(v / (rho[i].powf(prefactor.rho) * sig[j].powf(prefactor.sigma)))
        })
        .collect();
    let mut vals = vec![vec![real(T::zero()); sig.len()]; rho.len()];
    for ((i, j), v) in pts.into_iter().zip(flat) {
        vals[i][j] = v?;
    }
    let all: Vec<usize> = (0..grid.levels).collect();
    let (c, condition) = two_stage(&vals, grid, &all, &all)?;
    let drop = |skip: usize| -> Vec<usize> { all.iter().copied().filter(|&i| i != skip).collect() };
    let mut sig_reps = Vec::new();
    let mut rho_reps = Vec::new();
    for p in 0..grid.levels {
        sig_reps.push(two_stage(&vals, grid, &all, &drop(p))?.0);
        rho_reps.push(two_stage(&vals, grid, &drop(p), &all)?.0);
    }
    let us = jackknife(&sig_reps, grid.order);
    let ur = jackknife(&rho_reps, grid.order);
    let unc = us
        .iter()
        .zip(&ur)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (*x * *x + *y * *y).sqrt()).collect())
        .collect();
    Ok(AsymptoticTable { order: grid.order, c, unc, prefactor, condition })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Intersecting,
    NotIntersecting,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation<T> {
    pub j: usize,
    pub l: usize,
    pub value: Cx<T>,
    pub unc: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership<T> {
    pub verdict: Verdict,
    pub violations: Vec<Violation<T>>,
    pub indeterminate: Vec<(usize, usize)>,
}

impl<T> Membership<T> {
    pub fn intersecting(&self) -> bool {
        self.verdict == Verdict::Intersecting
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipRule<T> {
    /// Magnitudes below this count as zero regardless of the uncertainty.
    pub tol: T,
    /// Entries with a larger uncertainty are undecided.
    pub max_unc: T,
}

impl<T: Scalar> Default for MembershipRule<T> {
    fn default() -> Self {
        Self { tol: T::floor_tol(1e-8), max_unc: T::lit(1e-4) }
    }
}

impl<T: Scalar> MembershipRule<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Checks `|c_{jl}| ≤ max(tol, 3·unc_{jl})` for every `l < j`. Any clear
/// violation decides `NotIntersecting`; otherwise entries whose uncertainty
/// exceeds `max_unc` make the verdict `Inconclusive`.
pub fn check_membership<T: Scalar>(t: &AsymptoticTable<T>, rule: &MembershipRule<T>) -> Membership<T> {
    let mut violations = Vec::new();
    let mut indeterminate = Vec::new();
    for j in 1..=t.order {
        for l in 0..j {
            let (c, u) = (t.c[j][l], t.unc[j][l]);
            if c.norm() > rule.tol.max(T::lit(3.0) * u) {
                violations.push(Violation { j, l, value: c, unc: u });
            } else if t.is_indeterminate(j, l, rule.max_unc) {
                indeterminate.push((j, l));
            }
        }
    }
    let verdict = if !violations.is_empty() {
        Verdict::NotIntersecting
    } else if !indeterminate.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::Intersecting
    };
    Membership { verdict, violations, indeterminate }
}

/// A multiplier given in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplier<T> {
    pub name: String,
    pub chart_poly: Polynomial<T>,
    pub smooth_on_x: bool,
}

impl<T: Scalar> Multiplier<T> {
    /// A polynomial in the chart coordinates `(ρ, σ, w, y'')`.
    pub fn on_chart(name: &str, chart_poly: Polynomial<T>) -> Self {
        Self { name: name.into(), chart_poly, smooth_on_x: false }
    }

    /// A polynomial `h(x, y)` pulled back to `ff_projective_j`.
    pub fn on_x(name: &str, h: &Polynomial<T>, split: SplittingData, j: usize) -> Result<Self> {
        let n = split.n;
        if h.nvars() != n || j == 0 || j > split.k {
            return Err(Error::Invalid("multiplier arity or chart index mismatch".into()));
        }
        let rho = Polynomial::var(n, 0);
        let sigma = Polynomial::var(n, 1);
        let mut subs = vec![&rho * &sigma];
        for i in 0..n - 1 {
            let s = if i + 1 == j {
                rho.clone()
            } else if i < split.k {
                let slot = if i + 1 < j { 2 + i } else { 1 + i };
                &rho * &Polynomial::var(n, slot)
            } else {
                Polynomial::var(n, i + 1)
            };
            subs.push(s);
        }
        Ok(Self { name: name.into(), chart_poly: h.compose(&subs), smooth_on_x: true })
    }

    pub fn eval(&self, coords: &[T]) -> T {
        self.chart_poly.eval(coords)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessCase<T> {
    pub name: String,
    pub smooth_on_x: bool,
    pub table: AsymptoticTable<T>,
    pub membership: Membership<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport<T> {
    pub base: WitnessCase<T>,
    pub cases: Vec<WitnessCase<T>>,
    /// The base passes, every `X`-smooth multiple passes and some other
    /// multiple fails.
    pub proper: bool,
}

/// Classifies `u` and each `h·u`.
pub fn properness_witness<T: Scalar>(
    u: &(dyn Fn(&ChartPoint<T>) -> Result<Cx<T>> + Sync),
    chart: Chart,
    prefactor: Prefactor<T>,
    grid: &CornerGrid<T>,
    multipliers: &[Multiplier<T>],
    rule: &MembershipRule<T>,
) -> Result<WitnessReport<T>> {
    let classify = |name: &str, smooth: bool, h: Option<&Multiplier<T>>| -> Result<WitnessCase<T>> {
        let f = |cp: &ChartPoint<T>| -> Result<Cx<T>> {
            let v = u(cp)?;
            Ok(match h {
                Some(h) => v * h.eval(&cp.coords),
                None => v,
            })
        };
        let table = extract_coefficients(&f, chart, prefactor, grid)?;
        let membership = check_membership(&table, rule);
        Ok(WitnessCase { name: name.into(), smooth_on_x: smooth, table, membership })
    };
    let base = classify("1", true, None)?;
    let cases = multipliers
        .iter()
        .map(|h| classify(&h.name, h.smooth_on_x, Some(h)))
        .collect::<Result<Vec<_>>>()?;
    let proper = base.membership.intersecting()
        && cases.iter().filter(|c| c.smooth_on_x).all(|c| c.membership.intersecting())
        && cases.iter().any(|c| !c.smooth_on_x && c.membership.verdict == Verdict::NotIntersecting);
    Ok(WitnessReport { base, cases, proper })
}
