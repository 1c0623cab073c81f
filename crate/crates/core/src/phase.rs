//! Polynomial phase functions `φ(y, v)`, nondegeneracy, and the Legendrians they
//! parametrize via `(τ, μ) = (−φ, d_yφ)` on `{d_vφ = 0}`.

use crate::contact::{ContactPoint, SplittingData, TangentSubspace, TangentVector};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Matrix, DEFAULT_RANK_RTOL};
use crate::poly::Polynomial;
use crate::scalar::Scalar;

/// A phase in variables `(y_1, …, y_{n_y}, v_1, …, v_{n_v})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFunction<T> {
    n_y: usize,
    n_v: usize,
    poly: Polynomial<T>,
    grad: Vec<Polynomial<T>>,
    hess: Vec<Vec<Polynomial<T>>>,
}

impl<T: Scalar> PhaseFunction<T> {
    pub fn new(n_y: usize, n_v: usize, poly: Polynomial<T>) -> Result<Self> {
        check_dim(n_y + n_v, poly.nvars())?;
        let grad = poly.gradient();
        let hess = grad.iter().map(|g| g.gradient()).collect();
        Ok(Self { n_y, n_v, poly, grad, hess })
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn polynomial(&self) -> &Polynomial<T> {
        &self.poly
    }

    fn args(&self, y: &[T], v: &[T]) -> Vec<T> {
        debug_assert_eq!(y.len(), self.n_y);
        debug_assert_eq!(v.len(), self.n_v);
        let mut z = y.to_vec();
        z.extend_from_slice(v);
        z
    }

    pub fn eval(&self, y: &[T], v: &[T]) -> T {
        self.poly.eval(&self.args(y, v))
    }

    pub fn grad_y(&self, y: &[T], v: &[T]) -> Vec<T> {
        let z = self.args(y, v);
        self.grad[..self.n_y].iter().map(|g| g.eval(&z)).collect()
    }

    pub fn grad_v(&self, y: &[T], v: &[T]) -> Vec<T> {
        let z = self.args(y, v);
        self.grad[self.n_y..].iter().map(|g| g.eval(&z)).collect()
    }

    /// Rows `d(∂φ/∂v_i)` over `(y, v)`-space, a `n_v × (n_y + n_v)` matrix.
    pub fn hess_mixed(&self, y: &[T], v: &[T]) -> Matrix<T> {
        let z = self.args(y, v);
        let cols = self.n_y + self.n_v;
        let mut m = Matrix::zeros(self.n_v, cols);
        for i in 0..self.n_v {
            for j in 0..cols {
                m[(i, j)] = self.hess[self.n_y + i][j].eval(&z);
            }
        }
        m
    }

    pub fn hessian(&self, y: &[T], v: &[T]) -> Matrix<T> {
        let z = self.args(y, v);
        let nz = z.len();
        let mut m = Matrix::zeros(nz, nz);
        for i in 0..nz {
            for j in 0..nz {
                m[(i, j)] = self.hess[i][j].eval(&z);
            }
        }
        m
    }

    /// Largest discrepancy between the exact gradient and central differences
    /// of `eval` with step `h`, relative to `1 + |∇φ|`.
    pub fn gradient_self_test(&self, y: &[T], v: &[T], h: T) -> T {
        let z = self.args(y, v);
        let two = T::lit(2.0);
        let mut worst = T::zero();
        for i in 0..z.len() {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[i] = zp[i] + h;
            zm[i] = zm[i] - h;
            let fd = (self.poly.eval(&zp) - self.poly.eval(&zm)) / (two * h);
            let exact = self.grad[i].eval(&z);
            worst = worst.max((fd - exact).abs() / (T::one() + exact.abs()));
        }
        worst
    }

    fn contact_point(&self, y: &[T], v: &[T]) -> ContactPoint<T> {
        ContactPoint {
            y: y.to_vec(),
            tau: -self.eval(y, v),
            mu: self.grad_y(y, v),
        }
    }

    /// Differential of `(y, v) ↦ (y, −φ, d_yφ)` applied to `(δy, δv)`.
    fn push_forward(&self, y: &[T], v: &[T], delta: &[T]) -> TangentVector<T> {
        let gy = self.grad_y(y, v);
        let gv = self.grad_v(y, v);
        let h = self.hessian(y, v);
        let (dy, dv) = delta.split_at(self.n_y);
        let dtau = -(linalg::dot(&gy, dy) + linalg::dot(&gv, dv));
        let hd = h.mul_vec(delta);
        TangentVector {
            dy: dy.to_vec(),
            dtau,
            dmu: hd[..self.n_y].to_vec(),
        }
    }
}

/// A phase whose last parameter `s` ranges over `[0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectingPhase<T> {
    phase: PhaseFunction<T>,
}

impl<T: Scalar> IntersectingPhase<T> {
    pub fn new(phase: PhaseFunction<T>) -> Result<Self> {
        if phase.n_v == 0 {
            return Err(Error::Invalid("an intersecting phase needs the parameter s".into()));
        }
        Ok(Self { phase })
    }

    pub fn phase(&self) -> &PhaseFunction<T> {
        &self.phase
    }

    /// Index of `s` among the parameters.
    pub fn s_index(&self) -> usize {
        self.phase.n_v - 1
    }

    /// `φ(y, v, 0)` as a phase in `(y, v)`.
    pub fn restriction_s0(&self) -> PhaseFunction<T> {
        let nv = self.phase.poly.nvars();
        let last = nv - 1;
        let terms = self
            .phase
            .poly
            .terms()
            .filter(|(e, _)| e[last] == 0)
            .map(|(e, c)| (e[..last].to_vec(), *c));
        let poly = Polynomial::from_terms(last, terms).expect("consistent arity");
        PhaseFunction::new(self.phase.n_y, self.phase.n_v - 1, poly).expect("consistent arity")
    }
}

/// `T′` and `Ỹ` of the model phase, as polynomials in `(y_k, y'', v)`;
/// both must vanish on `y_k = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPhaseData<T> {
    split: SplittingData,
    t_prime: Polynomial<T>,
    y_tilde: Vec<Polynomial<T>>,
}

impl<T: Scalar> ModelPhaseData<T> {
    /// Number of local variables `(y_k, y'', v)`, equal to `n − 1`.
    pub fn local_nvars(split: SplittingData) -> usize {
        split.n - 1
    }

    pub fn new(split: SplittingData, t_prime: Polynomial<T>, y_tilde: Vec<Polynomial<T>>) -> Result<Self> {
        let nv = Self::local_nvars(split);
        check_dim(nv, t_prime.nvars())?;
        check_dim(split.k - 1, y_tilde.len())?;
        for p in &y_tilde {
            check_dim(nv, p.nvars())?;
        }
        if !t_prime.vanishes_on_hyperplane(0) || y_tilde.iter().any(|p| !p.vanishes_on_hyperplane(0)) {
            return Err(Error::Precondition("T' and Y~ must vanish on y_k = 0".into()));
        }
        Ok(Self { split, t_prime, y_tilde })
    }

    /// `T′ = y_k·T`, `Ỹ = y_k·Y`.
    pub fn from_reduced(split: SplittingData, t: Polynomial<T>, y: Vec<Polynomial<T>>) -> Result<Self> {
        let nv = Self::local_nvars(split);
        check_dim(nv, t.nvars())?;
        let yk = Polynomial::var(nv, 0);
        let mut yt = Vec::with_capacity(y.len());
        for p in &y {
            check_dim(nv, p.nvars())?;
            yt.push(&yk * p);
        }
        Self::new(split, &yk * &t, yt)
    }

    pub fn zero(split: SplittingData) -> Self {
        let nv = Self::local_nvars(split);
        Self {
            split,
            t_prime: Polynomial::zero(nv),
            y_tilde: vec![Polynomial::zero(nv); split.k - 1],
        }
    }

    pub fn split(&self) -> SplittingData {
        self.split
    }

    pub fn t_prime(&self) -> &Polynomial<T> {
        &self.t_prime
    }

    pub fn y_tilde(&self) -> &[Polynomial<T>] {
        &self.y_tilde
    }

    /// Global positions of the local variables `(y_k, y'', v)` in `(y, v, …)`.
    fn mapping(&self) -> Vec<usize> {
        let (n, k) = (self.split.n, self.split.k);
        let mut m = vec![k - 1];
        m.extend(k..n - 1);
        m.extend((0..k - 1).map(|i| n - 1 + i));
        m
    }

    fn phi_poly(&self, total: usize) -> Polynomial<T> {
        let map = self.mapping();
        let n = self.split.n;
        let mut phi = -&self.t_prime.embed(total, &map);
        for (i, yt) in self.y_tilde.iter().enumerate() {
            let v = Polynomial::var(total, n - 1 + i);
            let yi = Polynomial::var(total, i);
            let diff = &yi - &yt.embed(total, &map);
            phi = &phi + &(&v * &diff);
        }
        phi
    }
}

/// `φ(y, v) = −T′ + v·(ỹ − Ỹ)` with `v ∈ ℝ^{k−1}`.
pub fn build_model_phase<T: Scalar>(data: &ModelPhaseData<T>) -> PhaseFunction<T> {
    let (n, k) = (data.split.n, data.split.k);
    let total = n - 1 + k - 1;
    PhaseFunction::new(n - 1, k - 1, data.phi_poly(total)).expect("consistent arity")
}

/// `ψ(y, v, ζ, ȳ) = −T′ + v·(ỹ − Ỹ) + ζ(y_k − ȳ)`, parameters `(v, ζ, ȳ)` with `s = ȳ`.
pub fn build_model_intersecting_phase<T: Scalar>(data: &ModelPhaseData<T>) -> IntersectingPhase<T> {
    let (n, k) = (data.split.n, data.split.k);
    let total = n - 1 + k + 1;
    let zeta = Polynomial::var(total, total - 2);
    let ybar = Polynomial::var(total, total - 1);
    let yk = Polynomial::var(total, k - 1);
    let psi = &data.phi_poly(total) + &(&zeta * &(&yk - &ybar));
    IntersectingPhase::new(PhaseFunction::new(n - 1, k + 1, psi).expect("consistent arity")).expect("has s")
}

fn check_critical<T: Scalar>(grad_v: &[T], tol: T) -> Result<()> {
    let r = linalg::norm(grad_v);
    if r > tol {
        return Err(Error::NotCritical {
            residual: r.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

fn rank_rtol<T: Scalar>() -> T {
    T::floor_tol(DEFAULT_RANK_RTOL)
}

/// True iff the differentials `d(∂φ/∂v_i)` are linearly independent at a critical point.
pub fn nondegeneracy_check<T: Scalar>(phi: &PhaseFunction<T>, y: &[T], v: &[T], tol: T) -> Result<bool> {
    check_dim(phi.n_y, y.len())?;
    check_dim(phi.n_v, v.len())?;
    check_critical(&phi.grad_v(y, v), tol)?;
    if phi.n_v == 0 {
        return Ok(true);
    }
    Ok(phi.hess_mixed(y, v).svd().rank(rank_rtol()) == phi.n_v)
}

/// True iff `d(∂ψ/∂s)`, `d(∂ψ/∂v_i)` and `ds` are linearly independent at a
/// critical point (critical in all parameters, `s ≥ 0`).
pub fn intersecting_nondeg_check<T: Scalar>(psi: &IntersectingPhase<T>, y: &[T], params: &[T], tol: T) -> Result<bool> {
    let phi = &psi.phase;
    check_dim(phi.n_y, y.len())?;
    check_dim(phi.n_v, params.len())?;
    if params[psi.s_index()] < T::zero() {
        return Err(Error::OutOfDomain("the parameter s must be nonnegative".into()));
    }
    check_critical(&phi.grad_v(y, params), tol)?;
    let h = phi.hess_mixed(y, params);
    let cols = phi.n_y + phi.n_v;
    let mut ds = vec![T::zero(); cols];
    ds[cols - 1] = T::one();
    let rows: Vec<Vec<T>> = (0..phi.n_v).map(|i| h.row(i).to_vec()).chain(std::iter::once(ds)).collect();
    let m = Matrix::from_rows(cols, &rows)?;
    Ok(m.svd().rank(rank_rtol()) == phi.n_v + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOptions<T> {
    /// Residual target for `|d_vφ|`.
    pub tol: T,
    pub max_iter: usize,
    /// Seeds whose iterates move farther than this are abandoned.
    pub max_radius: T,
    /// Converged points closer than this (in `(y, v)`) are merged.
    pub dedup_tol: T,
}

impl<T: Scalar> Default for SampleOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::floor_tol(1e-12),
            max_iter: 50,
            max_radius: T::lit(1e3),
            dedup_tol: T::floor_tol(1e-9),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSample<T> {
    pub y: Vec<T>,
    pub v: Vec<T>,
    pub point: ContactPoint<T>,
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedFailure {
    pub y_index: usize,
    pub seed_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendrianSample<T> {
    pub points: Vec<CriticalSample<T>>,
    pub failures: Vec<SeedFailure>,
}

/// Damped minimum-norm Newton on `d_vφ = 0`, jointly in `(y, v)`.
pub fn find_critical_point<T: Scalar>(
    phi: &PhaseFunction<T>,
    y0: &[T],
    v0: &[T],
    opts: &SampleOptions<T>,
) -> Result<(Vec<T>, Vec<T>, T)> {
    check_dim(phi.n_y, y0.len())?;
    check_dim(phi.n_v, v0.len())?;
    let ny = phi.n_y;
    let mut z: Vec<T> = y0.iter().chain(v0).copied().collect();
    let start = z.clone();
    let resid = |z: &[T]| phi.grad_v(&z[..ny], &z[ny..]);
    let mut r = resid(&z);
    let mut rn = linalg::norm(&r);
    for _ in 0..opts.max_iter {
        if rn <= opts.tol {
            return Ok((z[..ny].to_vec(), z[ny..].to_vec(), rn));
        }
        let svd = phi.hess_mixed(&z[..ny], &z[ny..]).svd();
        if svd.rank(rank_rtol()) < phi.n_v {
            return Err(Error::Convergence("degenerate critical-set Jacobian".into()));
        }
        let step = svd.solve(&r, rank_rtol());
        let mut lambda = T::one();
        loop {
            let trial: Vec<T> = z.iter().zip(&step).map(|(&a, &s)| a - lambda * s).collect();
            let rt = resid(&trial);
            let rtn = linalg::norm(&rt);
            if rtn < rn || rtn <= opts.tol {
                z = trial;
                r = rt;
                rn = rtn;
                break;
            }
            lambda = lambda * T::lit(0.5);
            if lambda < T::lit(1e-6) {
                return Err(Error::Convergence(format!(
                    "line search stalled at residual {:e}",
                    rn.to_f64().unwrap_or(f64::NAN)
                )));
            }
        }
        let dist: Vec<T> = z.iter().zip(&start).map(|(&a, &b)| a - b).collect();
        if linalg::norm(&dist) > opts.max_radius {
            return Err(Error::Convergence("iterate left the search region".into()));
        }
    }
    if rn <= opts.tol {
        return Ok((z[..ny].to_vec(), z[ny..].to_vec(), rn));
    }
    Err(Error::Convergence(format!(
        "no convergence in {} iterations (residual {:e})",
        opts.max_iter,
        rn.to_f64().unwrap_or(f64::NAN)
    )))
}

/// Samples the Legendrian `{(y, −φ, d_yφ) : d_vφ(y, v) = 0}` by Newton from
/// every pair `(y_grid[i], v_seeds[j])`. Failed seeds are skipped and reported.
pub fn induced_legendrian_sample<T: Scalar>(
    phi: &PhaseFunction<T>,
    y_grid: &[Vec<T>],
    v_seeds: &[Vec<T>],
    opts: &SampleOptions<T>,
) -> Result<LegendrianSample<T>> {
    let no_params = [Vec::new()];
    let seeds: &[Vec<T>] = if phi.n_v == 0 && v_seeds.is_empty() { &no_params } else { v_seeds };
    let mut points: Vec<CriticalSample<T>> = Vec::new();
    let mut failures = Vec::new();
    for (yi, y0) in y_grid.iter().enumerate() {
        for (si, v0) in seeds.iter().enumerate() {
            match find_critical_point(phi, y0, v0, opts) {
                Ok((y, v, residual)) => {
                    let dup = points.iter().any(|p| {
                        let d: T = p.y.iter().chain(&p.v).zip(y.iter().chain(&v)).map(|(&a, &b)| (a - b) * (a - b)).sum();
                        d.sqrt() <= opts.dedup_tol
                    });
                    if !dup {
                        let point = phi.contact_point(&y, &v);
                        points.push(CriticalSample { y, v, point, residual });
                    }
                }
                Err(Error::Convergence(reason)) => failures.push(SeedFailure {
                    y_index: yi,
                    seed_index: si,
                    reason,
                }),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(LegendrianSample { points, failures })
}

/// Exact tangent space of the induced Legendrian at a nondegenerate critical point.
pub fn legendrian_tangent<T: Scalar>(phi: &PhaseFunction<T>, y: &[T], v: &[T]) -> Result<TangentSubspace<T>> {
    let kernel = critical_kernel(phi, y, v)?;
    let vecs: Vec<_> = kernel.iter().map(|d| phi.push_forward(y, v, d)).collect();
    TangentSubspace::new(phi.contact_point(y, v), &vecs)
}

fn critical_kernel<T: Scalar>(phi: &PhaseFunction<T>, y: &[T], v: &[T]) -> Result<Vec<Vec<T>>> {
    let cols = phi.n_y + phi.n_v;
    let kernel = if phi.n_v == 0 {
        (0..cols)
            .map(|i| (0..cols).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect()
    } else {
        phi.hess_mixed(y, v).svd().nullspace(rank_rtol())
    };
    if kernel.len() != phi.n_y {
        return Err(Error::Precondition("phase is degenerate at this critical point".into()));
    }
    Ok(kernel)
}

/// Tangent space estimated by central differences of re-projected critical
/// points along the kernel directions, with step `h`.
pub fn estimate_tangent_space<T: Scalar>(phi: &PhaseFunction<T>, y: &[T], v: &[T], h: T) -> Result<TangentSubspace<T>> {
    let kernel = critical_kernel(phi, y, v)?;
    let ny = phi.n_y;
    let opts = SampleOptions {
        max_radius: T::lit(10.0) * h + T::lit(1.0),
        ..SampleOptions::default()
    };
    let base: Vec<T> = y.iter().chain(v).copied().collect();
    let mut vecs = Vec::with_capacity(kernel.len());
    for d in &kernel {
        let mut ends = Vec::with_capacity(2);
        for sign in [T::one(), -T::one()] {
            let z: Vec<T> = base.iter().zip(d).map(|(&b, &di)| b + sign * h * di).collect();
            let (yy, vv, _) = find_critical_point(phi, &z[..ny], &z[ny..], &opts)?;
            ends.push(phi.contact_point(&yy, &vv).to_flat());
        }
        let diff: Vec<T> = ends[0].iter().zip(&ends[1]).map(|(&a, &b)| (a - b) / (T::lit(2.0) * h)).collect();
        vecs.push(TangentVector::from_flat(ny, &diff)?);
    }
    TangentSubspace::new(phi.contact_point(y, v), &vecs)
}
