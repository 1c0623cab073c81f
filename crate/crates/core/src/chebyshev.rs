//! Complex-valued Chebyshev interpolants, single-interval and adaptive piecewise.

use crate::error::{Error, Result};
use crate::scalar::{Cx, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevSeries<T> {
    a: T,
    b: T,
    coeffs: Vec<Cx<T>>,
}

impl<T: Scalar> ChebyshevSeries<T> {
    /// Nodes (first kind) on `[a, b]` for `n` coefficients.
    pub fn nodes(a: T, b: T, n: usize) -> Vec<T> {
        let half = T::lit(0.5);
        (0..n)
            .map(|j| {
                let t = (T::PI() * (T::from_usize_lossy(j) + half) / T::from_usize_lossy(n)).cos();
                (a + b) * half + (b - a) * half * t
            })
            .collect()
    }

    /// Interpolates `values` given at [`nodes`](Self::nodes).
    pub fn from_values(a: T, b: T, values: &[Cx<T>]) -> Self {
        let n = values.len();
        let nn = T::from_usize_lossy(n);
        let half = T::lit(0.5);
        let coeffs = (0..n)
            .map(|k| {
                let mut s = Cx::new(T::zero(), T::zero());
                for (j, v) in values.iter().enumerate() {
                    let ang = T::PI() * T::from_usize_lossy(k) * (T::from_usize_lossy(j) + half) / nn;
                    s = s + *v * ang.cos();
                }
                let w = if k == 0 { T::one() / nn } else { T::lit(2.0) / nn };
                s * w
            })
            .collect();
        Self { a, b, coeffs }
    }

    pub fn fit(f: &dyn Fn(T) -> Cx<T>, a: T, b: T, n: usize) -> Self {
        let vals: Vec<Cx<T>> = Self::nodes(a, b, n).into_iter().map(f).collect();
        Self::from_values(a, b, &vals)
    }

    pub fn eval(&self, x: T) -> Cx<T> {
        let t = (T::lit(2.0) * x - self.a - self.b) / (self.b - self.a);
        let two_t = t + t;
        let zero = Cx::new(T::zero(), T::zero());
        let (mut b1, mut b2) = (zero, zero);
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = *c + b1 * two_t - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + b1 * t - b2
    }

    /// Largest magnitude among the last `count` coefficients.
    pub fn tail(&self, count: usize) -> T {
        let n = self.coeffs.len();
        self.coeffs[n.saturating_sub(count)..].iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    pub fn interval(&self) -> (T, T) {
        (self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseChebyshev<T> {
    breaks: Vec<T>,
    pieces: Vec<ChebyshevSeries<T>>,
}

impl<T: Scalar> PiecewiseChebyshev<T> {
    /// Bisects `[a, b]` until each piece's last three coefficients are below `tol`.
    pub fn adaptive(f: &dyn Fn(T) -> Cx<T>, a: T, b: T, degree: usize, tol: T, max_depth: u32) -> Result<Self> {
        let mut pieces = Vec::new();
        let mut stack = vec![(a, b, 0u32)];
        while let Some((lo, hi, depth)) = stack.pop() {
            let s = ChebyshevSeries::fit(f, lo, hi, degree + 1);
            if s.tail(3) <= tol {
                pieces.push(s);
            } else if depth >= max_depth {
                return Err(Error::Convergence(format!(
                    "Chebyshev interpolation did not reach {:e} on [{}, {}]",
                    tol.to_f64().unwrap_or(f64::NAN),
                    lo,
                    hi
                )));
            } else {
                let mid = (lo + hi) * T::lit(0.5);
                stack.push((mid, hi, depth + 1));
                stack.push((lo, mid, depth + 1));
            }
        }
        Ok(Self::from_pieces(pieces))
    }

    /// Assembles contiguous pieces given in increasing order.
    pub fn from_pieces(pieces: Vec<ChebyshevSeries<T>>) -> Self {
        let mut breaks: Vec<T> = pieces.iter().map(|p| p.a).collect();
        if let Some(last) = pieces.last() {
            breaks.push(last.b);
        }
        Self { breaks, pieces }
    }

    pub fn domain(&self) -> (T, T) {
        (self.breaks[0], *self.breaks.last().expect("nonempty"))
    }

    pub fn contains(&self, x: T) -> bool {
        let (a, b) = self.domain();
        x >= a && x <= b
    }

    pub fn num_pieces(&self) -> usize {
        self.pieces.len()
    }

    /// `None` outside the domain.
    pub fn eval(&self, x: T) -> Option<Cx<T>> {
        if !self.contains(x) {
            return None;
        }
        let i = match self.breaks.binary_search_by(|b| b.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(self.pieces.len() - 1),
            Err(i) => i - 1,
        };
        Some(self.pieces[i].eval(x))
    }

    pub fn max_tail(&self) -> T {
        self.pieces.iter().map(|p| p.tail(3)).fold(T::zero(), T::max)
    }
}
