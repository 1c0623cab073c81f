//! Charts on the blow-up `Y = [X; C]` of `C = {x = 0, y' = 0}`.
//!
//! Projective charts are centred on a positive primed coordinate `y_j > 0`
//! with coordinates `(ρ, σ, w, y'')`, `ρ = y_j`, `σ = x/y_j`, `w_i = y_i/y_j`
//! (`i ≠ j` primed); the `ff_x` chart uses `(x, Z' = y'/x, y'')`.

use rayon::prelude::*;

use crate::contact::SplittingData;
use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct XPoint<T> {
    pub x: T,
    pub y: Vec<T>,
}

impl<T: Scalar> XPoint<T> {
    pub fn new(x: T, y: Vec<T>) -> Result<Self> {
        if !(x >= T::zero()) {
            return Err(Error::OutOfDomain("x must be nonnegative".into()));
        }
        Ok(Self { x, y })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    /// `(x, y)` away from `C`.
    InteriorMf,
    /// Projective chart on `y_j > 0`, `j` 1-based in `1..=k`.
    FfProjective(usize),
    /// `(x, Z', y'')` on `x > 0` up to the interior of the front face.
    FfX,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    Main,
    Front,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint<T> {
    pub chart: Chart,
    pub coords: Vec<T>,
}

fn primed_norm<T: Scalar>(y: &[T], k: usize) -> T {
    y[..k].iter().map(|&a| a * a).sum::<T>().sqrt()
}

fn check_chart(chart: Chart, split: SplittingData) -> Result<()> {
    if let Chart::FfProjective(j) = chart {
        if j == 0 || j > split.k {
            return Err(Error::Invalid(format!("projective chart index {j} outside 1..={}", split.k)));
        }
    }
    Ok(())
}

/// Checks that `coords` lie in the closed domain of `chart`.
pub fn validate<T: Scalar>(cp: &ChartPoint<T>, split: SplittingData) -> Result<()> {
    check_chart(cp.chart, split)?;
    check_dim(split.n, cp.coords.len())?;
    let ok = match cp.chart {
        Chart::InteriorMf => cp.coords[0] >= T::zero() && (cp.coords[0] > T::zero() || primed_norm(&cp.coords[1..], split.k) > T::zero()),
        Chart::FfProjective(_) => cp.coords[0] >= T::zero() && cp.coords[1] >= T::zero(),
        Chart::FfX => cp.coords[0] >= T::zero(),
    };
    if ok && cp.coords.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(format!("{:?} outside the domain of {:?}", cp.coords, cp.chart)))
    }
}

/// Positions of the primed `w_i` (`i ≠ j`) inside projective coordinates.
fn w_slot(i: usize, j: usize) -> usize {
    // coords = [ρ, σ, w_1..w_k without j, y'']
    if i < j {
        2 + i
    } else {
        1 + i
    }
}

pub fn to_chart<T: Scalar>(p: &XPoint<T>, chart: Chart, split: SplittingData) -> Result<ChartPoint<T>> {
    check_chart(chart, split)?;
    check_dim(split.n - 1, p.y.len())?;
    let k = split.k;
    if !(p.x >= T::zero()) {
        return Err(Error::OutOfDomain("x must be nonnegative".into()));
    }
    let coords = match chart {
        Chart::InteriorMf => {
            if p.x == T::zero() && primed_norm(&p.y, k) == T::zero() {
                return Err(Error::OutOfDomain("the interior chart excludes C".into()));
            }
            let mut c = vec![p.x];
            c.extend_from_slice(&p.y);
            c
        }
        Chart::FfProjective(j) => {
            let yj = p.y[j - 1];
            if !(yj > T::zero()) {
                return Err(Error::OutOfDomain(format!("ff_projective_{j} requires y_{j} > 0")));
            }
            let mut c = vec![yj, p.x / yj];
            c.extend((0..k).filter(|&i| i != j - 1).map(|i| p.y[i] / yj));
            c.extend_from_slice(&p.y[k..]);
            c
        }
        Chart::FfX => {
            if !(p.x > T::zero()) {
                return Err(Error::OutOfDomain("ff_x requires x > 0 at points of X".into()));
            }
            let mut c = vec![p.x];
            c.extend(p.y[..k].iter().map(|&a| a / p.x));
            c.extend_from_slice(&p.y[k..]);
            c
        }
    };
    Ok(ChartPoint { chart, coords })
}

/// Blow-down map; defined on the whole closed chart domain.
pub fn from_chart<T: Scalar>(cp: &ChartPoint<T>, split: SplittingData) -> Result<XPoint<T>> {
    validate(cp, split)?;
    let k = split.k;
    let c = &cp.coords;
    Ok(match cp.chart {
        Chart::InteriorMf => XPoint { x: c[0], y: c[1..].to_vec() },
        Chart::FfProjective(j) => {
            let (rho, sigma) = (c[0], c[1]);
            let mut y = Vec::with_capacity(split.n - 1);
            for i in 0..k {
                y.push(if i == j - 1 { rho } else { rho * c[w_slot(i, j - 1)] });
            }
            y.extend_from_slice(&c[k + 1..]);
            XPoint { x: rho * sigma, y }
        }
        Chart::FfX => {
            let x = c[0];
            let mut y: Vec<T> = c[1..=k].iter().map(|&z| x * z).collect();
            y.extend_from_slice(&c[k + 1..]);
            XPoint { x, y }
        }
    })
}

/// Chart change on the overlap of the two domains, including boundary points.
pub fn transition<T: Scalar>(cp: &ChartPoint<T>, target: Chart, split: SplittingData) -> Result<ChartPoint<T>> {
    validate(cp, split)?;
    check_chart(target, split)?;
    if cp.chart == target {
        return Ok(cp.clone());
    }
    let k = split.k;
    let c = &cp.coords;
    let outside = || Error::OutOfDomain(format!("{:?} is not in the overlap of {:?} and {:?}", c, cp.chart, target));
    let coords = match (cp.chart, target) {
        (Chart::FfProjective(j), Chart::FfX) => {
            let sigma = c[1];
            if !(sigma > T::zero()) {
                return Err(outside());
            }
            let mut out = vec![c[0] * sigma];
            for i in 0..k {
                out.push(if i == j - 1 { sigma.recip() } else { c[w_slot(i, j - 1)] / sigma });
            }
            out.extend_from_slice(&c[k + 1..]);
            out
        }
        (Chart::FfX, Chart::FfProjective(j)) => {
            let zj = c[j];
            if !(zj > T::zero()) {
                return Err(outside());
            }
            let mut out = vec![c[0] * zj, zj.recip()];
            out.extend((0..k).filter(|&i| i != j - 1).map(|i| c[1 + i] / zj));
            out.extend_from_slice(&c[k + 1..]);
            out
        }
        (Chart::FfProjective(j), Chart::FfProjective(l)) => {
            let wl = c[w_slot(l - 1, j - 1)];
            if !(wl > T::zero()) {
                return Err(outside());
            }
            let mut out = vec![c[0] * wl, c[1] / wl];
            for i in (0..k).filter(|&i| i != l - 1) {
                out.push(if i == j - 1 { wl.recip() } else { c[w_slot(i, j - 1)] / wl });
            }
            out.extend_from_slice(&c[k + 1..]);
            out
        }
        (_, Chart::InteriorMf) => {
            let p = from_chart(cp, split)?;
            return to_chart(&p, target, split).map_err(|_| outside());
        }
        (Chart::InteriorMf, _) => {
            let p = from_chart(cp, split)?;
            return to_chart(&p, target, split).map_err(|_| outside());
        }
        (Chart::FfX, Chart::FfX) => unreachable!("handled as identity"),
    };
    let out = ChartPoint { chart: target, coords };
    validate(&out, split).map_err(|_| outside())?;
    Ok(out)
}

/// Coordinate indices of the defining functions of `mf` and `ff` in a chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceFunctions {
    pub mf: Option<usize>,
    pub ff: Option<usize>,
}

impl FaceFunctions {
    pub fn eval_mf<T: Scalar>(&self, coords: &[T]) -> Option<T> {
        self.mf.map(|i| coords[i])
    }

    pub fn eval_ff<T: Scalar>(&self, coords: &[T]) -> Option<T> {
        self.ff.map(|i| coords[i])
    }
}

pub fn boundary_defining_functions(chart: Chart) -> FaceFunctions {
    match chart {
        Chart::InteriorMf => FaceFunctions { mf: Some(0), ff: None },
        Chart::FfProjective(_) => FaceFunctions { mf: Some(1), ff: Some(0) },
        Chart::FfX => FaceFunctions { mf: None, ff: Some(0) },
    }
}

/// The defining function of `face` in `chart`, or an error if the chart misses the face.
pub fn face_function(chart: Chart, face: Face) -> Result<usize> {
    let f = boundary_defining_functions(chart);
    match face {
        Face::Main => f.mf,
        Face::Front => f.ff,
    }
    .ok_or_else(|| Error::Precondition(format!("{chart:?} does not meet the {face:?} face")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeGrid<T> {
    /// Boundary point approached, in chart coordinates.
    pub anchor: Vec<T>,
    /// Direction of approach (into the chart domain).
    pub direction: Vec<T>,
    /// Distances `d_i = d0 · 2^{-i}`, `i < levels`.
    pub d0: T,
    pub levels: usize,
    /// Difference step as a fraction of `d_i`.
    pub step_fraction: T,
    /// The slope is fitted over this many finest levels.
    pub fit_levels: usize,
}

impl<T: Scalar> ProbeGrid<T> {
    pub fn new(anchor: Vec<T>, direction: Vec<T>) -> Self {
        Self {
            anchor,
            direction,
            d0: T::lit(0.25),
            levels: 8,
            step_fraction: T::lit(0.1),
            fit_levels: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport<T> {
    pub smooth: bool,
    /// Largest fitted exponent `g` with `|∂^α f| ~ d^{-g}`.
    pub max_derivative_growth: T,
    /// Multi-index attaining the maximum.
    pub worst_multi_index: Vec<u32>,
}

fn multi_indices(dim: usize, max_order: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; dim]];
    for _ in 0..max_order {
        let mut next = Vec::new();
        for a in &out {
            for i in 0..dim {
                let mut b = a.clone();
                b[i] += 1;
                if !out.contains(&b) && !next.contains(&b) {
                    next.push(b);
                }
            }
        }
        out.extend(next);
    }
    out.retain(|a| a.iter().sum::<u32>() >= 1);
    out
}

/// Tensor-product central difference `∂^α f(c)` with step `h`, plus the
/// largest `|f|` seen on the stencil.
fn central_difference<T: Scalar>(f: &dyn Fn(&[T]) -> T, c: &[T], alpha: &[u32], h: T) -> (T, T) {
    // δ^m f = Σ_i (−1)^i C(m, i) f(c + (m/2 − i) h)
    let axes: Vec<(usize, u32)> = alpha.iter().enumerate().filter(|(_, &m)| m > 0).map(|(i, &m)| (i, m)).collect();
    let mut total = T::zero();
    let mut fmax = T::zero();
    let mut idx = vec![0u32; axes.len()];
    loop {
        let mut pt = c.to_vec();
        let mut w = T::one();
        for (slot, &(axis, m)) in axes.iter().enumerate() {
            let i = idx[slot];
            let offset = T::lit(m as f64 / 2.0 - i as f64) * h;
            pt[axis] = pt[axis] + offset;
            let sign = if i % 2 == 0 { T::one() } else { -T::one() };
            w = w * sign * T::lit(binomial(m, i));
        }
        let v = f(&pt);
        fmax = fmax.max(v.abs());
        total = total + w * v;
        let mut s = 0;
        loop {
            if s == axes.len() {
                let order: u32 = alpha.iter().sum();
                return (total / h.powi(order as i32), fmax);
            }
            idx[s] += 1;
            if idx[s] <= axes[s].1 {
                break;
            }
            idx[s] = 0;
            s += 1;
        }
    }
}

fn binomial(m: u32, i: u32) -> f64 {
    (0..i).fold(1.0, |acc, t| acc * (m - t) as f64 / (t + 1) as f64)
}

/// Least-squares slope of `ys` against `xs`.
pub(crate) fn fit_slope<T: Scalar>(xs: &[T], ys: &[T]) -> T {
    let n = T::from_usize_lossy(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Estimates whether `f`, pulled back to `chart`, has bounded derivatives up to
/// `order` as the anchor is approached along `grid.direction`.
pub fn smoothness_probe<T: Scalar>(
    f: &(dyn Fn(&XPoint<T>) -> T + Sync),
    chart: Chart,
    split: SplittingData,
    order: u32,
    grid: &ProbeGrid<T>,
    tol: T,
) -> Result<ProbeReport<T>> {
    check_chart(chart, split)?;
    check_dim(split.n, grid.anchor.len())?;
    check_dim(split.n, grid.direction.len())?;
    if grid.fit_levels < 3 || grid.fit_levels > grid.levels {
        return Err(Error::Invalid("the probe needs 3 <= fit_levels <= levels".into()));
    }
    let pulled = |c: &[T]| -> T {
        let cp = ChartPoint { chart, coords: c.to_vec() };
        match from_chart(&cp, split) {
            Ok(p) => f(&p),
            Err(_) => T::nan(),
        }
    };
    let alphas = multi_indices(split.n, order);
    let floor = T::lit(1e-6);
    let four = T::lit(4.0);
    let three = T::lit(3.0);
    let rows: Vec<Vec<T>> = (grid.levels - grid.fit_levels..grid.levels)
        .into_par_iter()
        .map(|i| {
            let d = grid.d0 * T::lit(0.5).powi(i as i32);
            let c: Vec<T> = grid.anchor.iter().zip(&grid.direction).map(|(&a, &u)| a + d * u).collect();
            let h = d * grid.step_fraction;
            alphas
                .iter()
                .map(|alpha| {
                    let (d1, m1) = central_difference(&pulled, &c, alpha, h);
                    let (d2, m2) = central_difference(&pulled, &c, alpha, h / T::lit(2.0));
                    let est = (four * d2 - d1) / three;
                    let ord = alpha.iter().sum::<u32>() as i32;
                    let noise = T::lit(1e3) * T::epsilon() * m1.max(m2) / (h / T::lit(2.0)).powi(ord);
                    let mag = est.abs();
                    if mag <= noise.max(floor) { floor } else { mag }
                })
                .collect()
        })
        .collect();
    let first = grid.levels - grid.fit_levels;
    let logd: Vec<T> = (first..grid.levels).map(|i| (grid.d0 * T::lit(0.5).powi(i as i32)).ln()).collect();
    let mut worst = T::neg_infinity();
    let mut worst_alpha = Vec::new();
    for (a, alpha) in alphas.iter().enumerate() {
        let ys: Vec<T> = rows.iter().map(|r| r[a].ln()).collect();
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::Convergence(format!("evaluation failed for derivative {alpha:?}")));
        }
        let growth = -fit_slope(&logd, &ys);
        if growth > worst {
            worst = growth;
            worst_alpha = alpha.clone();
        }
    }
    Ok(ProbeReport {
        smooth: worst <= tol,
        max_derivative_growth: worst,
        worst_multi_index: worst_alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: usize, k: usize) -> SplittingData {
        SplittingData::new(n, k).unwrap()
    }

    #[test]
    fn chart_examples() {
        let sp = s(2, 1);
        let p = XPoint::<f64>::new(0.01, vec![0.1]).unwrap();
        let c = to_chart(&p, Chart::FfProjective(1), sp).unwrap();
        assert!((c.coords[0] - 0.1).abs() < 1e-15 && (c.coords[1] - 0.1).abs() < 1e-15);
        let z = to_chart(&p, Chart::FfX, sp).unwrap();
        assert!((z.coords[0] - 0.01).abs() < 1e-15 && (z.coords[1] - 10.0).abs() < 1e-12);
        let t = transition(&c, Chart::FfX, sp).unwrap();
        assert!((t.coords[0] - 0.01).abs() < 1e-15 && (t.coords[1] - 10.0).abs() < 1e-12);
        assert_eq!(transition(&c, Chart::FfProjective(1), sp).unwrap(), c);
        let q = XPoint::new(0.01, vec![-0.1]).unwrap();
        assert!(matches!(to_chart(&q, Chart::FfProjective(1), sp), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn n3_projective_to_ffx() {
        let sp = s(3, 2);
        let cp = ChartPoint::<f64> { chart: Chart::FfProjective(2), coords: vec![0.2, 0.05, 0.7] };
        let t = transition(&cp, Chart::FfX, sp).unwrap();
        let (sigma, w) = (0.05f64, 0.7f64);
        assert!((t.coords[0] - 0.2 * sigma).abs() < 1e-15);
        assert!((t.coords[1] - w / sigma).abs() < 1e-12);
        assert!((t.coords[2] - 1.0 / sigma).abs() < 1e-12);
        let back = transition(&t, Chart::FfProjective(2), sp).unwrap();
        for (a, b) in back.coords.iter().zip(&cp.coords) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn face_functions() {
        assert_eq!(boundary_defining_functions(Chart::FfProjective(1)), FaceFunctions { mf: Some(1), ff: Some(0) });
        assert_eq!(boundary_defining_functions(Chart::InteriorMf), FaceFunctions { mf: Some(0), ff: None });
        assert_eq!(boundary_defining_functions(Chart::FfX), FaceFunctions { mf: None, ff: Some(0) });
        assert!(face_function(Chart::FfX, Face::Main).is_err());
        assert!(face_function(Chart::InteriorMf, Face::Front).is_err());
    }

    #[test]
    fn boundary_transitions_on_front_face() {
        let sp = s(2, 1);
        let cp = ChartPoint { chart: Chart::FfProjective(1), coords: vec![0.0, 0.25] };
        let t = transition(&cp, Chart::FfX, sp).unwrap();
        assert_eq!(t.coords, vec![0.0, 4.0]);
    }

    #[test]
    fn probe_examples() {
        let sp = s(2, 1);
        let f = |p: &XPoint<f64>| p.x / (p.x * p.x + p.y[0] * p.y[0]).sqrt();
        let g = ProbeGrid::new(vec![0.3, 0.0], vec![0.0, 1.0]);
        let r = smoothness_probe(&f, Chart::FfProjective(1), sp, 3, &g, 0.1).unwrap();
        assert!(r.smooth, "{r:?}");

        let h = |p: &XPoint<f64>| p.x * p.y[0] / (p.x * p.x + p.y[0] * p.y[0]);
        let gx = ProbeGrid::new(vec![0.0, 0.0], vec![1.0, 0.5]);
        let r = smoothness_probe(&h, Chart::InteriorMf, sp, 2, &gx, 0.1).unwrap();
        assert!(!r.smooth, "{r:?}");
        let r = smoothness_probe(&h, Chart::FfProjective(1), sp, 3, &g, 0.1).unwrap();
        assert!(r.smooth, "{r:?}");

        let lin = |p: &XPoint<f64>| p.y[0];
        for chart in [Chart::FfProjective(1), Chart::InteriorMf] {
            let grid = if chart == Chart::InteriorMf { ProbeGrid::new(vec![0.0, 0.3], vec![1.0, 0.0]) } else { g.clone() };
            assert!(smoothness_probe(&lin, chart, sp, 3, &grid, 0.1).unwrap().smooth);
        }
        let gz = ProbeGrid::new(vec![0.0, 1.0], vec![1.0, 0.0]);
        assert!(smoothness_probe(&lin, Chart::FfX, sp, 3, &gz, 0.1).unwrap().smooth);
    }
}
