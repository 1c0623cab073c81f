//! Linear contact algebra on the boundary of the scattering cotangent bundle.
//!
//! Coordinates are `(y, τ, μ)` with `y, μ ∈ ℝ^{n-1}`; the contact form is
//! `χ = dτ + μ·dy` and `dχ = Σ dμ_i ∧ dy_i`. Tangent vectors are flattened as
//! `[dy, dτ, dμ]` (length `2n − 1`) whenever matrices are assembled.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Matrix, DEFAULT_RANK_RTOL};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ContactPoint<T> {
    pub y: Vec<T>,
    pub tau: T,
    pub mu: Vec<T>,
}

impl<T: Scalar> ContactPoint<T> {
    pub fn new(y: Vec<T>, tau: T, mu: Vec<T>) -> Result<Self> {
        check_dim(y.len(), mu.len())?;
        Ok(Self { y, tau, mu })
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            y: vec![T::zero(); dim],
            tau: T::zero(),
            mu: vec![T::zero(); dim],
        }
    }

    /// `n − 1`, the number of boundary coordinates.
    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn to_flat(&self) -> Vec<T> {
        let mut v = self.y.clone();
        v.push(self.tau);
        v.extend_from_slice(&self.mu);
        v
    }

    pub fn distance(&self, other: &Self) -> T {
        self.to_flat()
            .iter()
            .zip(other.to_flat())
            .map(|(&a, b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<T> {
    pub dy: Vec<T>,
    pub dtau: T,
    pub dmu: Vec<T>,
}

impl<T: Scalar> TangentVector<T> {
    pub fn new(dy: Vec<T>, dtau: T, dmu: Vec<T>) -> Result<Self> {
        check_dim(dy.len(), dmu.len())?;
        Ok(Self { dy, dtau, dmu })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dy: vec![T::zero(); dim],
            dtau: T::zero(),
            dmu: vec![T::zero(); dim],
        }
    }

    /// `∂/∂y_i` (0-based `i`).
    pub fn dy_unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        v.dy[i] = T::one();
        v
    }

    pub fn dtau_unit(dim: usize) -> Self {
        let mut v = Self::zero(dim);
        v.dtau = T::one();
        v
    }

    /// `∂/∂μ_i` (0-based `i`).
    pub fn dmu_unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        v.dmu[i] = T::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.dy.len()
    }

    pub fn to_flat(&self) -> Vec<T> {
        let mut v = self.dy.clone();
        v.push(self.dtau);
        v.extend_from_slice(&self.dmu);
        v
    }

    pub fn from_flat(dim: usize, flat: &[T]) -> Result<Self> {
        check_dim(2 * dim + 1, flat.len())?;
        Ok(Self {
            dy: flat[..dim].to_vec(),
            dtau: flat[dim],
            dmu: flat[dim + 1..].to_vec(),
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            dy: self.dy.iter().zip(&other.dy).map(|(&a, &b)| a + b).collect(),
            dtau: self.dtau + other.dtau,
            dmu: self.dmu.iter().zip(&other.dmu).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            dy: self.dy.iter().map(|&a| a * s).collect(),
            dtau: self.dtau * s,
            dmu: self.dmu.iter().map(|&a| a * s).collect(),
        }
    }
}

/// Linear subspace of the tangent space at `base`, stored with an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentSubspace<T> {
    base: ContactPoint<T>,
    basis: Vec<TangentVector<T>>,
}

impl<T: Scalar> TangentSubspace<T> {
    /// Orthonormalizes `vectors`; fails if they are linearly dependent.
    pub fn new(base: ContactPoint<T>, vectors: &[TangentVector<T>]) -> Result<Self> {
        let dim = base.dim();
        for v in vectors {
            check_dim(dim, v.dim())?;
        }
        let flat: Vec<Vec<T>> = vectors.iter().map(|v| v.to_flat()).collect();
        let ortho = linalg::orthonormalize(2 * dim + 1, &flat, T::lit(DEFAULT_RANK_RTOL))?;
        let basis = ortho
            .iter()
            .map(|f| TangentVector::from_flat(dim, f))
            .collect::<Result<_>>()?;
        Ok(Self { base, basis })
    }

    pub fn base(&self) -> &ContactPoint<T> {
        &self.base
    }

    pub fn basis(&self) -> &[TangentVector<T>] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.dim()
    }

    /// Distance from `v` to the subspace, relative to `|v|`.
    pub fn relative_distance(&self, v: &TangentVector<T>) -> T {
        let f = v.to_flat();
        let nv = linalg::norm(&f);
        if nv == T::zero() {
            return T::zero();
        }
        let mut r = f.clone();
        for b in &self.basis {
            let bf = b.to_flat();
            let c = linalg::dot(&f, &bf);
            for (ri, bi) in r.iter_mut().zip(&bf) {
                *ri = *ri - c * *bi;
            }
        }
        linalg::norm(&r) / nv
    }

    pub fn contains(&self, v: &TangentVector<T>, tol: T) -> bool {
        self.relative_distance(v) <= tol
    }
}

/// Splitting `y = (y', y'')` with `y' = (y_1, …, y_k)`; `C = {x = 0, y' = 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplittingData {
    pub n: usize,
    pub k: usize,
}

impl SplittingData {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n < 2 || k < 1 || k > n - 1 {
            return Err(Error::Invalid(format!(
                "splitting requires 1 <= k <= n-1, got n={n}, k={k}"
            )));
        }
        Ok(Self { n, k })
    }

    /// Number of `y''` coordinates, `dim C = n − 1 − k`.
    pub fn dim_c(&self) -> usize {
        self.n - 1 - self.k
    }
}

/// `χ_q(v) = dτ + Σ μ_i dy_i`.
pub fn contact_eval<T: Scalar>(q: &ContactPoint<T>, v: &TangentVector<T>) -> Result<T> {
    check_dim(q.dim(), v.dim())?;
    Ok(v.dtau + q.mu.iter().zip(&v.dy).map(|(&m, &d)| m * d).sum::<T>())
}

/// `dχ(v, w) = Σ (v.dμ_i w.dy_i − v.dy_i w.dμ_i)`.
pub fn dchi_pairing<T: Scalar>(v: &TangentVector<T>, w: &TangentVector<T>) -> Result<T> {
    check_dim(v.dim(), w.dim())?;
    Ok((0..v.dim())
        .map(|i| v.dmu[i] * w.dy[i] - v.dy[i] * w.dmu[i])
        .sum())
}

/// Largest `|χ(b)|` and `|dχ(b, b')|` over the (orthonormal) basis.
fn isotropy_defect<T: Scalar>(v: &TangentSubspace<T>) -> T {
    let mut worst = T::zero();
    for (i, b) in v.basis.iter().enumerate() {
        worst = worst.max(contact_eval(&v.base, b).expect("dims checked").abs());
        for b2 in &v.basis[i + 1..] {
            worst = worst.max(dchi_pairing(b, b2).expect("dims checked").abs());
        }
    }
    worst
}

/// True iff `V` has dimension `n − 1` and both `χ` and `dχ` vanish on it (to `tol`).
pub fn is_legendre_subspace<T: Scalar>(v: &TangentSubspace<T>, tol: T) -> bool {
    v.dim() == v.ambient_dim() && isotropy_defect(v) <= tol
}

/// `W' = {w' : χ(w') = 0, dχ(w', w) = 0 ∀ w ∈ W}` for an isotropic `W ⊂ ker χ`.
pub fn annihilator_in_ker<T: Scalar>(w: &TangentSubspace<T>, tol: T) -> Result<TangentSubspace<T>> {
    let defect = isotropy_defect(w);
    if defect > tol {
        return Err(Error::Precondition(format!(
            "chi and dchi must vanish on W (defect {:e})",
            defect.to_f64().unwrap_or(f64::NAN)
        )));
    }
    let d = w.ambient_dim();
    let cols = 2 * d + 1;
    let mut rows = Vec::with_capacity(1 + w.dim());
    let mut chi_row = vec![T::zero(); cols];
    chi_row[..d].copy_from_slice(&w.base.mu);
    chi_row[d] = T::one();
    rows.push(chi_row);
    for b in &w.basis {
        let mut r = vec![T::zero(); cols];
        for i in 0..d {
            r[i] = -b.dmu[i];
            r[d + 1 + i] = b.dy[i];
        }
        rows.push(r);
    }
    let m = Matrix::from_rows(cols, &rows)?;
    let ns = m.svd().nullspace(T::lit(DEFAULT_RANK_RTOL));
    let vecs = ns
        .iter()
        .map(|f| TangentVector::from_flat(d, f))
        .collect::<Result<Vec<_>>>()?;
    TangentSubspace::new(w.base.clone(), &vecs)
}

/// `V1 ∩ V2` as a subspace at the common base point.
pub fn intersection<T: Scalar>(v1: &TangentSubspace<T>, v2: &TangentSubspace<T>, tol: T) -> Result<TangentSubspace<T>> {
    check_dim(v1.ambient_dim(), v2.ambient_dim())?;
    let d = v1.ambient_dim();
    let b1: Vec<Vec<T>> = v1.basis.iter().map(|b| b.to_flat()).collect();
    let b2: Vec<Vec<T>> = v2.basis.iter().map(|b| b.to_flat()).collect();
    let w = linalg::intersect_subspaces(2 * d + 1, &b1, &b2, tol);
    let vecs = w
        .iter()
        .map(|f| TangentVector::from_flat(d, f))
        .collect::<Result<Vec<_>>>()?;
    TangentSubspace::new(v1.base.clone(), &vecs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransversalReport<T> {
    /// 1-based index `j ∈ {1, …, k}` of a `y'` coordinate with `dy_j|_{V1} ≠ 0`.
    pub index: usize,
    /// Norm of the functional `v ↦ v.dy_j` on `V1`, for each `j = 1..=k`.
    pub strengths: Vec<T>,
    pub intersection_dim: usize,
}

/// Finds a primed coordinate whose differential does not vanish on `V1 = T_q L_1`,
/// given `V2 = T_q L_2` meeting it cleanly in codimension one.
pub fn transversal_coordinate_index<T: Scalar>(
    v1: &TangentSubspace<T>,
    v2: &TangentSubspace<T>,
    split: SplittingData,
    tol: T,
) -> Result<TransversalReport<T>> {
    let d = v1.ambient_dim();
    check_dim(split.n - 1, d)?;
    check_dim(d, v2.ambient_dim())?;
    let scale = T::one().max(linalg::norm(&v1.base.to_flat()));
    if v1.base.distance(&v2.base) > tol * scale {
        return Err(Error::Precondition("V1 and V2 are based at different points".into()));
    }
    for (name, v) in [("V1", v1), ("V2", v2)] {
        if !is_legendre_subspace(v, tol) {
            return Err(Error::Precondition(format!("{name} is not a Legendre subspace")));
        }
    }
    let w = intersection(v1, v2, tol.sqrt().max(tol))?;
    if w.dim() + 1 != d {
        return Err(Error::Precondition(format!(
            "clean codimension-one intersection requires dim(V1 ∩ V2) = {}, got {}",
            d - 1,
            w.dim()
        )));
    }
    let dim_c = split.dim_c();
    if dim_c > 0 {
        let rows: Vec<Vec<T>> = w.basis.iter().map(|b| b.dy[split.k..].to_vec()).collect();
        let rank = Matrix::from_rows(dim_c, &rows)?.svd().rank(T::lit(DEFAULT_RANK_RTOL));
        if rank != dim_c {
            return Err(Error::Precondition(format!(
                "dy'' must be independent on V1 ∩ V2 (rank {rank} < {dim_c})"
            )));
        }
    }
    let strengths: Vec<T> = (0..split.k)
        .map(|j| v1.basis.iter().map(|b| b.dy[j] * b.dy[j]).sum::<T>().sqrt())
        .collect();
    let (best, &value) = strengths
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("k >= 1");
    if value <= tol {
        return Err(Error::NoTransversalCoordinate(format!(
            "all dy' vanish on V1 (max {:e}); inputs contradict the clean-intersection hypotheses",
            value.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(TransversalReport {
        index: best + 1,
        strengths,
        intersection_dim: w.dim(),
    })
}

/// Tangent space of `L_2 = N*(C; X) = {y' = 0, τ = 0, μ'' = 0}` at `q`:
/// spanned by `∂_{y''}` and `∂_{μ'}`.
pub fn conormal_tangent<T: Scalar>(q: &ContactPoint<T>, split: SplittingData) -> Result<TangentSubspace<T>> {
    let d = q.dim();
    check_dim(split.n - 1, d)?;
    let mut vecs = Vec::with_capacity(d);
    for j in split.k..d {
        vecs.push(TangentVector::dy_unit(d, j));
    }
    for j in 0..split.k {
        vecs.push(TangentVector::dmu_unit(d, j));
    }
    TangentSubspace::new(q.clone(), &vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tv(dy: &[f64], dtau: f64, dmu: &[f64]) -> TangentVector<f64> {
        TangentVector::new(dy.to_vec(), dtau, dmu.to_vec()).unwrap()
    }

    #[test]
    fn contact_eval_examples() {
        let q = ContactPoint::new(vec![0.3, -1.0], 2.0, vec![0.7, 5.0]).unwrap();
        assert_eq!(contact_eval(&q, &TangentVector::zero(2)).unwrap(), 0.0);
        let q0 = ContactPoint::new(vec![1.0, 1.0], 0.0, vec![0.0, 0.0]).unwrap();
        assert_eq!(contact_eval(&q0, &TangentVector::dy_unit(2, 0)).unwrap(), 0.0);
        let q2 = ContactPoint::new(vec![0.0, 0.0], 0.0, vec![2.0, 0.0]).unwrap();
        assert_eq!(contact_eval(&q2, &tv(&[1.0, 0.0], 1.0, &[0.0, 0.0])).unwrap(), 3.0);
        assert!(matches!(
            contact_eval(&q2, &TangentVector::zero(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dchi_examples() {
        let v = TangentVector::<f64>::dmu_unit(2, 0);
        let w = TangentVector::<f64>::dy_unit(2, 0);
        assert_eq!(dchi_pairing(&v, &v).unwrap(), 0.0);
        assert_eq!(dchi_pairing(&v, &w).unwrap(), 1.0);
        assert_eq!(dchi_pairing(&w, &v).unwrap(), -1.0);
    }

    #[test]
    fn legendre_examples() {
        for d in 1..4 {
            let q = ContactPoint::<f64>::origin(d);
            let zero_section: Vec<_> = (0..d).map(|i| TangentVector::dy_unit(d, i)).collect();
            let v = TangentSubspace::new(q.clone(), &zero_section).unwrap();
            assert!(is_legendre_subspace(&v, 1e-12));

            let q1 = ContactPoint::new(vec![0.4; d], -1.0, vec![0.9; d]).unwrap();
            let fibre: Vec<_> = (0..d).map(|i| TangentVector::dmu_unit(d, i)).collect();
            assert!(is_legendre_subspace(&TangentSubspace::new(q1, &fibre).unwrap(), 1e-12));

            let mut bad = vec![TangentVector::dtau_unit(d)];
            bad.extend((1..d).map(|i| TangentVector::dy_unit(d, i)));
            assert!(!is_legendre_subspace(&TangentSubspace::new(q, &bad).unwrap(), 1e-12));
        }
    }

    #[test]
    fn dependent_basis_rejected() {
        let q = ContactPoint::<f64>::origin(2);
        let v = TangentVector::dy_unit(2, 0);
        assert!(matches!(
            TangentSubspace::new(q, &[v.clone(), v.scale(2.0)]),
            Err(Error::DependentBasis { .. })
        ));
    }

    #[test]
    fn annihilator_examples() {
        let q = ContactPoint::<f64>::origin(1);
        let empty = TangentSubspace::new(q.clone(), &[]).unwrap();
        let wp = annihilator_in_ker(&empty, 1e-12).unwrap();
        assert_eq!(wp.dim(), 2);
        assert!(wp.contains(&TangentVector::dy_unit(1, 0), 1e-12));
        assert!(wp.contains(&TangentVector::dmu_unit(1, 0), 1e-12));

        let w = TangentSubspace::new(q, &[TangentVector::dmu_unit(1, 0)]).unwrap();
        let wp = annihilator_in_ker(&w, 1e-12).unwrap();
        assert_eq!(wp.dim(), 1);
        assert!(wp.contains(&TangentVector::dmu_unit(1, 0), 1e-12));

        let q3 = ContactPoint::<f64>::origin(2);
        let w = TangentSubspace::new(q3, &[TangentVector::dy_unit(2, 0), TangentVector::dy_unit(2, 1)]).unwrap();
        let wp = annihilator_in_ker(&w, 1e-12).unwrap();
        assert_eq!(wp.dim(), 2);
        for b in w.basis() {
            assert!(wp.contains(b, 1e-12));
        }

        let notiso = TangentSubspace::new(ContactPoint::origin(1), &[TangentVector::dtau_unit(1)]).unwrap();
        assert!(matches!(annihilator_in_ker(&notiso, 1e-12), Err(Error::Precondition(_))));
    }

    #[test]
    fn transversal_index_examples() {
        let q = ContactPoint::<f64>::origin(1);
        let split = SplittingData::new(2, 1).unwrap();
        let v1 = TangentSubspace::new(q.clone(), &[TangentVector::dy_unit(1, 0)]).unwrap();
        let v2 = TangentSubspace::new(q.clone(), &[TangentVector::dmu_unit(1, 0)]).unwrap();
        let r = transversal_coordinate_index(&v1, &v2, split, 1e-10).unwrap();
        assert_eq!(r.index, 1);
        assert_eq!(r.intersection_dim, 0);

        let q = ContactPoint::<f64>::origin(2);
        let split = SplittingData::new(3, 2).unwrap();
        let v1 = TangentSubspace::new(q.clone(), &[TangentVector::dy_unit(2, 1), TangentVector::dmu_unit(2, 0)]).unwrap();
        let v2 = conormal_tangent(&q, split).unwrap();
        let r = transversal_coordinate_index(&v1, &v2, split, 1e-10).unwrap();
        assert_eq!(r.index, 2);
        assert!(r.strengths[0] < 1e-12);

        assert!(matches!(
            transversal_coordinate_index(&v2, &v2, split, 1e-10),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn splitting_bounds() {
        assert!(SplittingData::new(3, 0).is_err());
        assert!(SplittingData::new(3, 3).is_err());
        assert_eq!(SplittingData::new(4, 1).unwrap().dim_c(), 2);
    }

    fn vec_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-2.0f64..2.0, 2 * d + 1)
    }

    proptest! {
        #[test]
        fn dchi_antisymmetric(a in vec_strategy(3), b in vec_strategy(3)) {
            let v = TangentVector::from_flat(3, &a).unwrap();
            let w = TangentVector::from_flat(3, &b).unwrap();
            let s = dchi_pairing(&v, &w).unwrap() + dchi_pairing(&w, &v).unwrap();
            prop_assert!(s.abs() < 1e-12);
        }

        #[test]
        fn dchi_nondegenerate_on_ker_chi(d in 1usize..4, seed in vec_strategy(3), q in vec_strategy(3)) {
            let base = ContactPoint::new(q[..d].to_vec(), q[3], q[4..4 + d].to_vec()).unwrap();
            let mut v = TangentVector::from_flat(d, &seed[..2 * d + 1]).unwrap();
            // project onto ker χ by adjusting dτ
            v.dtau = v.dtau - contact_eval(&base, &v).unwrap();
            prop_assume!(linalg::norm(&v.to_flat()) > 1e-6);
            let mut best = 0.0f64;
            for i in 0..d {
                for w in [TangentVector::dy_unit(d, i), TangentVector::dmu_unit(d, i)] {
                    let mut w = w;
                    w.dtau = -contact_eval(&base, &w).unwrap();
                    best = best.max(dchi_pairing(&v, &w).unwrap().abs());
                }
            }
            prop_assert!(best > 0.0);
        }

        #[test]
        fn annihilator_dimension(d in 1usize..4, coeffs in proptest::collection::vec(-1.0f64..1.0, 9), dimw in 0usize..4) {
            // isotropic W: random combinations of ∂y's at μ = 0 (zero section is Legendre)
            let dimw = dimw.min(d);
            let base = ContactPoint::<f64>::origin(d);
            let vecs: Vec<_> = (0..dimw)
                .map(|r| {
                    let mut v = TangentVector::zero(d);
                    for i in 0..d {
                        v.dy[i] = coeffs[(r * 3 + i) % 9] + if i == r { 3.0 } else { 0.0 };
                    }
                    v
                })
                .collect();
            let w = TangentSubspace::new(base, &vecs).unwrap();
            let wp = annihilator_in_ker(&w, 1e-10).unwrap();
            prop_assert_eq!(wp.dim() + w.dim(), 2 * d);
            for b in w.basis() {
                prop_assert!(wp.contains(b, 1e-9));
            }
        }
    }
}
