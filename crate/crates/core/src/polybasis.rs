//! Orthonormal polynomial bases built from data (arbitrary polynomial chaos).
//!
//! Two construction routes produce the same [`OrthonormalBasis1D`]:
//!
//! * [`build_basis`] works from a [`MomentSet`] alone. It factors the Hankel
//!   moment matrix `H = RᵀR` and reads the three-term recurrence coefficients
//!   off the Cholesky factor.
//! * [`build_basis_from_samples`] runs a Stieltjes/Lanczos iteration directly
//!   on the weighted sample set, with full reorthogonalization against the
//!   sample inner product. This is the route the piecewise bases use.
//!
//! Both routes first map the samples affinely onto `[-1, 1]` (by their range)
//! and keep that map inside the basis. The recurrence is stored in the mapped
//! variable `t`:
//!
//! ```text
//! b[k+1] φ_{k+1}(t) = (t - a[k]) φ_k(t) - b[k] φ_{k-1}(t),   φ_0 = 1
//! ```

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summation::CompensatedSum;

/// Relative positive-definiteness threshold on Hankel eigenvalues.
pub const PD_TOL: f64 = 1e-12;

/// Raw moments `m_0..=m_K` of a (weighted) sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    raw: Vec<f64>,
    /// Moments of `t = (x - center) / half_width`.
    mapped: Vec<f64>,
    center: f64,
    half_width: f64,
    count: usize,
}

impl MomentSet {
    /// Wraps externally known moments (e.g. analytic ones). No internal
    /// rescaling is applied.
    pub fn from_moments(moments: Vec<f64>) -> Result<Self> {
        if moments.is_empty() || moments.iter().any(|m| !m.is_finite()) {
            return Err(Error::DegenerateMoments("moments must be finite and non-empty".into()));
        }
        if (moments[0] - 1.0).abs() > 1e-12 {
            return Err(Error::DegenerateMoments(format!(
                "m_0 must equal 1, got {}",
                moments[0]
            )));
        }
        Ok(Self {
            mapped: moments.clone(),
            raw: moments,
            center: 0.0,
            half_width: 1.0,
            count: 0,
        })
    }

    /// Moments of the original variable.
    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn max_order(&self) -> usize {
        self.raw.len() - 1
    }

    /// Number of samples behind the moments (0 for analytic moments).
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn hankel(&self, order: usize) -> Result<DMatrix<f64>> {
        if 2 * order > self.max_order() {
            return Err(Error::DegenerateMoments(format!(
                "Hankel of order {order} needs moments up to {}, have {}",
                2 * order,
                self.max_order()
            )));
        }
        Ok(DMatrix::from_fn(order + 1, order + 1, |i, j| self.mapped[i + j]))
    }
}

fn normalized_weights(n: usize, weights: Option<&[f64]>) -> Result<Vec<f64>> {
    match weights {
        None => Ok(vec![1.0 / n as f64; n]),
        Some(w) => {
            if w.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: w.len(),
                });
            }
            if w.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
                return Err(Error::DegenerateMoments("weights must be finite and nonnegative".into()));
            }
            let total: f64 = w.iter().sum();
            if !(total > 0.0) {
                return Err(Error::DegenerateMoments("weights sum to zero".into()));
            }
            Ok(w.iter().map(|x| x / total).collect())
        }
    }
}

/// Range of the positively weighted samples and their number of distinct values.
fn support_stats(samples: &[f64], w: &[f64]) -> (f64, f64, usize) {
    let mut xs: Vec<f64> = samples
        .iter()
        .zip(w)
        .filter(|(_, &wi)| wi > 0.0)
        .map(|(&x, _)| x)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    match (xs.first(), xs.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi, xs.len()),
        _ => (0.0, 0.0, 0),
    }
}

fn affine_map(lo: f64, hi: f64) -> (f64, f64) {
    let half = 0.5 * (hi - lo);
    (0.5 * (hi + lo), if half > 0.0 { half } else { 1.0 })
}

/// Raw moments `m_k = Σ w_i x_i^k / Σ w_i`, `k = 0..=k_max`, with compensated
/// summation. Requires at least `ceil(k_max / 2) + 1` distinct values.
pub fn raw_moments(samples: &[f64], weights: Option<&[f64]>, k_max: usize) -> Result<MomentSet> {
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateMoments("non-finite sample".into()));
    }
    let w = normalized_weights(samples.len(), weights)?;
    let (lo, hi, distinct) = support_stats(samples, &w);
    let needed = k_max.div_ceil(2) + 1;
    if distinct < needed {
        return Err(Error::DegenerateMoments(format!(
            "{distinct} distinct sample values, moments up to order {k_max} need {needed}"
        )));
    }
    let (center, half_width) = affine_map(lo, hi);
    let moments = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        let mut acc = vec![CompensatedSum::default(); k_max + 1];
        for (&x, &wi) in samples.iter().zip(&w) {
            let y = f(x);
            let mut p = wi;
            for a in acc.iter_mut() {
                a.add(p);
                p *= y;
            }
        }
        acc.iter().map(|a| a.value()).collect()
    };
    let raw = moments(&|x| x);
    let mapped = moments(&|x| (x - center) / half_width);
    Ok(MomentSet {
        raw,
        mapped,
        center,
        half_width,
        count: samples.len(),
    })
}

/// Orthonormal polynomials `φ_0..=φ_degree` stored as a three-term recurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthonormalBasis1D {
    /// `a[0..degree]` in the mapped variable.
    a: Vec<f64>,
    /// `b[1..=degree]` in the mapped variable (stored 0-based).
    b: Vec<f64>,
    center: f64,
    half_width: f64,
    /// `max |G - I|` of the Gram matrix under the construction measure.
    gram_error: f64,
}

fn check_positive_definite(h: &DMatrix<f64>) -> Result<()> {
    let eig = SymmetricEigen::new(h.clone()).eigenvalues;
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(min > PD_TOL * max) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    Ok(())
}

/// Builds the orthonormal basis of degrees `0..=degree` for the measure whose
/// moments are given (Hankel/Cholesky route).
pub fn build_basis(moments: &MomentSet, degree: usize) -> Result<OrthonormalBasis1D> {
    let h = moments.hankel(degree)?;
    check_positive_definite(&h)?;
    let r = h
        .cholesky()
        .ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: f64::NAN,
            max_eigenvalue: f64::NAN,
        })?
        .l()
        .transpose();
    let mut a = Vec::with_capacity(degree);
    let mut b = Vec::with_capacity(degree);
    for k in 0..degree {
        let prev = if k == 0 { 0.0 } else { r[(k - 1, k)] / r[(k - 1, k - 1)] };
        a.push(r[(k, k + 1)] / r[(k, k)] - prev);
        b.push(r[(k + 1, k + 1)] / r[(k, k)]);
    }
    let mut basis = OrthonormalBasis1D {
        a,
        b,
        center: moments.center,
        half_width: moments.half_width,
        gram_error: 0.0,
    };
    basis.gram_error = basis.gram_error_from_moments(moments);
    Ok(basis)
}

/// Builds the orthonormal basis of degrees `0..=degree` under the weighted
/// empirical measure of `samples` (Lanczos route with reorthogonalization).
pub fn build_basis_from_samples(
    samples: &[f64],
    weights: Option<&[f64]>,
    degree: usize,
) -> Result<OrthonormalBasis1D> {
    let moments = raw_moments(samples, weights, 2 * degree)?;
    check_positive_definite(&moments.hankel(degree)?)?;
    let w = normalized_weights(samples.len(), weights)?;
    let (center, half_width) = (moments.center, moments.half_width);
    let t: Vec<f64> = samples.iter().map(|x| (x - center) / half_width).collect();

    let dot = |u: &[f64], v: &[f64]| {
        let mut acc = CompensatedSum::default();
        for ((ui, vi), wi) in u.iter().zip(v).zip(&w) {
            acc.add(wi * ui * vi);
        }
        acc.value()
    };

    let mut q: Vec<Vec<f64>> = vec![vec![1.0; t.len()]];
    let mut a = Vec::with_capacity(degree);
    let mut b: Vec<f64> = Vec::with_capacity(degree);
    for k in 0..degree {
        let qk = &q[k];
        let mut r: Vec<f64> = t.iter().zip(qk).map(|(ti, qi)| ti * qi).collect();
        let mut ak = dot(&r, qk);
        let bk = if k == 0 { 0.0 } else { b[k - 1] };
        for i in 0..r.len() {
            r[i] -= ak * qk[i] + if k == 0 { 0.0 } else { bk * q[k - 1][i] };
        }
        // two passes of classical Gram–Schmidt against all previous vectors;
        // the correction onto q_k is folded into a_k, the rest is roundoff
        for _ in 0..2 {
            for (j, qj) in q.iter().enumerate() {
                let c = dot(&r, qj);
                if j == k {
                    ak += c;
                }
                for (ri, qi) in r.iter_mut().zip(qj) {
                    *ri -= c * qi;
                }
            }
        }
        let norm = dot(&r, &r).sqrt();
        if !(norm > 1e-10) {
            return Err(Error::DegenerateMoments(format!(
                "recurrence breaks down at degree {} (norm {norm:e})",
                k + 1
            )));
        }
        r.iter_mut().for_each(|x| *x /= norm);
        a.push(ak);
        b.push(norm);
        q.push(r);
    }

    let mut basis = OrthonormalBasis1D {
        a,
        b,
        center,
        half_width,
        gram_error: 0.0,
    };
    basis.gram_error = basis.gram_error_on(samples, &w);
    Ok(basis)
}

impl OrthonormalBasis1D {
    /// The constant basis `{φ_0 ≡ 1}`.
    pub fn constant() -> Self {
        Self {
            a: Vec::new(),
            b: Vec::new(),
            center: 0.0,
            half_width: 1.0,
            gram_error: 0.0,
        }
    }

    pub fn degree(&self) -> usize {
        self.a.len()
    }

    pub fn gram_error(&self) -> f64 {
        self.gram_error
    }

    /// `(center, half_width)` of the internal map `t = (x - center) / half_width`.
    pub fn affine_map(&self) -> (f64, f64) {
        (self.center, self.half_width)
    }

    /// Recurrence coefficients in the original variable:
    /// `b[k] φ_k(x) = (x - a[k-1]) φ_{k-1}(x) - b[k-1] φ_{k-2}(x)`.
    /// Returns `(a_0..a_{N-1}, b_1..b_N)`.
    pub fn recurrence(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.a.iter().map(|a| self.center + self.half_width * a).collect(),
            self.b.iter().map(|b| self.half_width * b).collect(),
        )
    }

    /// Rebuilds a basis from stored recurrence data (mapped variable).
    pub fn from_parts(a: Vec<f64>, b: Vec<f64>, center: f64, half_width: f64, gram_error: f64) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Parse(format!(
                "recurrence lengths differ: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        let finite = a.iter().chain(&b).chain([&center, &half_width]).all(|x| x.is_finite());
        if !finite || b.iter().any(|&x| x <= 0.0) || !(half_width > 0.0) {
            return Err(Error::Parse("invalid recurrence coefficients".into()));
        }
        Ok(Self {
            a,
            b,
            center,
            half_width,
            gram_error,
        })
    }

    /// Raw parts `(a, b, center, half_width)` in the mapped variable.
    pub fn parts(&self) -> (&[f64], &[f64], f64, f64) {
        (&self.a, &self.b, self.center, self.half_width)
    }

    /// Writes `φ_0(x)..=φ_degree(x)` into `out` (length `degree + 1`).
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        let t = (x - self.center) / self.half_width;
        out[0] = 1.0;
        if self.a.is_empty() {
            return;
        }
        out[1] = (t - self.a[0]) / self.b[0];
        for k in 1..self.a.len() {
            out[k + 1] = ((t - self.a[k]) * out[k] - self.b[k - 1] * out[k - 1]) / self.b[k];
        }
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.degree() + 1];
        self.eval_into(x, &mut out);
        out
    }

    /// `max |G - I|` where `G_pq = Σ w_i φ_p(x_i) φ_q(x_i)` (weights normalized).
    pub fn gram_error_on(&self, samples: &[f64], weights: &[f64]) -> f64 {
        let n = self.degree() + 1;
        let mut g = vec![CompensatedSum::default(); n * n];
        let mut v = vec![0.0; n];
        for (&x, &w) in samples.iter().zip(weights) {
            self.eval_into(x, &mut v);
            for p in 0..n {
                for q in 0..=p {
                    g[p * n + q].add(w * v[p] * v[q]);
                }
            }
        }
        let mut err: f64 = 0.0;
        for p in 0..n {
            for q in 0..=p {
                let target = if p == q { 1.0 } else { 0.0 };
                err = err.max((g[p * n + q].value() - target).abs());
            }
        }
        err
    }

    /// Monomial coefficients (in the mapped variable) of every basis polynomial.
    fn mapped_monomials(&self) -> Vec<Vec<f64>> {
        let n = self.degree() + 1;
        let mut polys = vec![vec![0.0; n]; n];
        polys[0][0] = 1.0;
        for k in 0..self.degree() {
            let mut next = vec![0.0; n];
            for i in 0..n - 1 {
                next[i + 1] += polys[k][i];
            }
            for i in 0..n {
                next[i] -= self.a[k] * polys[k][i];
                if k > 0 {
                    next[i] -= self.b[k - 1] * polys[k - 1][i];
                }
                next[i] /= self.b[k];
            }
            polys[k + 1] = next;
        }
        polys
    }

    fn gram_error_from_moments(&self, moments: &MomentSet) -> f64 {
        let polys = self.mapped_monomials();
        let n = polys.len();
        let mut err: f64 = 0.0;
        for p in 0..n {
            for q in 0..=p {
                let mut g = 0.0;
                for (i, cp) in polys[p].iter().enumerate() {
                    for (j, cq) in polys[q].iter().enumerate() {
                        g += cp * cq * moments.mapped[i + j];
                    }
                }
                let target = if p == q { 1.0 } else { 0.0 };
                err = err.max((g - target).abs());
            }
        }
        err
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn legendre_moments(k: usize) -> MomentSet {
        let m = (0..=k)
            .map(|i| if i % 2 == 1 { 0.0 } else { 1.0 / (i as f64 + 1.0) })
            .collect();
        MomentSet::from_moments(m).unwrap()
    }

    /// Expands the original-variable recurrence into monomial coefficients.
    fn monomials_in_x(basis: &OrthonormalBasis1D) -> Vec<Vec<f64>> {
        let (a, b) = basis.recurrence();
        let n = basis.degree() + 1;
        let mut polys = vec![vec![0.0; n]; n];
        polys[0][0] = 1.0;
        for k in 0..basis.degree() {
            let mut next = vec![0.0; n];
            for i in 0..n - 1 {
                next[i + 1] += polys[k][i];
            }
            for i in 0..n {
                next[i] -= a[k] * polys[k][i];
                if k > 0 {
                    next[i] -= b[k - 1] * polys[k - 1][i];
                }
                next[i] /= b[k];
            }
            polys[k + 1] = next;
        }
        polys
    }

    fn horner(c: &[f64], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
    }

    #[test]
    fn moments_of_symmetric_pair() {
        let m = raw_moments(&[-1.0, 1.0], None, 2).unwrap();
        assert_eq!(m.raw(), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn moments_of_uniform_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        let m = raw_moments(&xs, None, 4).unwrap();
        for k in 1..=4 {
            let exact = 1.0 / (k as f64 + 1.0);
            // sd of x^k under U(0,1): sqrt(1/(2k+1) - 1/(k+1)^2)
            let sd = (1.0 / (2.0 * k as f64 + 1.0) - exact * exact).sqrt() / (1e5f64).sqrt();
            assert!((m.raw()[k] - exact).abs() < 3.0 * sd, "k={k}");
        }
    }

    #[test]
    fn constant_samples_are_degenerate() {
        assert!(matches!(
            raw_moments(&[2.0; 10], None, 1),
            Err(Error::DegenerateMoments(_))
        ));
        assert!(raw_moments(&[2.0; 10], None, 0).is_ok());
        assert!(raw_moments(&[1.0, 2.0], Some(&[0.0, 0.0]), 1).is_err());
        assert!(raw_moments(&[1.0, 2.0], Some(&[1.0, -1.0]), 1).is_err());
    }

    #[test]
    fn weighted_moments() {
        let m = raw_moments(&[0.0, 1.0, 2.0], Some(&[1.0, 2.0, 1.0]), 2).unwrap();
        assert!((m.raw()[1] - 1.0).abs() < 1e-15);
        assert!((m.raw()[2] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn legendre_from_analytic_moments() {
        let basis = build_basis(&legendre_moments(4), 2).unwrap();
        let v = basis.eval(0.7);
        assert!((v[1] - 3f64.sqrt() * 0.7).abs() < 1e-10);
        let p2 = 5f64.sqrt() / 2.0 * (3.0 * 0.49 - 1.0);
        assert!((v[2] - p2).abs() < 1e-10);
        let (a, b) = basis.recurrence();
        assert!(a.iter().all(|x| x.abs() < 1e-12));
        assert!((b[0] - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!(basis.eval(0.0)[1].abs() < 1e-15);
    }

    #[test]
    fn degree_zero_is_constant() {
        let basis = build_basis(&legendre_moments(0), 0).unwrap();
        assert_eq!(basis.eval(123.0), vec![1.0]);
        let basis = build_basis_from_samples(&[3.0, 3.0], None, 0).unwrap();
        assert_eq!(basis.eval(-4.0), vec![1.0]);
    }

    #[test]
    fn hankel_not_positive_definite() {
        // two distinct atoms cannot support a degree-2 basis
        let m = raw_moments(&[0.0, 1.0, 0.0, 1.0], None, 4);
        assert!(m.is_err());
        let m = MomentSet::from_moments(vec![1.0, 0.5, 0.5, 0.5, 0.5]).unwrap();
        match build_basis(&m, 2) {
            Err(Error::NotPositiveDefinite { min_eigenvalue, .. }) => {
                assert!(min_eigenvalue.abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        assert!(build_basis(&legendre_moments(3), 2).is_err());
    }

    #[test]
    fn hermite_recurrence_from_normal_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
        let fit = |s: &[f64]| build_basis(&raw_moments(s, None, 6).unwrap(), 3).unwrap().recurrence();
        let (a, b) = fit(&xs);
        // bootstrap error bars
        let reps = 200;
        let mut sa = vec![Vec::new(); 3];
        let mut sb = vec![Vec::new(); 3];
        let mut brng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..reps {
            let res: Vec<f64> = (0..xs.len()).map(|_| xs[brng.random_range(0..xs.len())]).collect();
            let (ra, rb) = fit(&res);
            for k in 0..3 {
                sa[k].push(ra[k]);
                sb[k].push(rb[k]);
            }
        }
        let sd = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
        };
        for k in 0..3 {
            assert!(a[k].abs() < 5.0 * sd(&sa[k]), "a_{k} = {}", a[k]);
            let target = ((k + 1) as f64).sqrt();
            assert!((b[k] - target).abs() < 5.0 * sd(&sb[k]), "b_{} = {}", k + 1, b[k]);
        }
    }

    #[test]
    fn routes_agree_on_empirical_measure() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..2000).map(|_| rng.random::<f64>().powi(2) * 3.0 + 1.0).collect();
        let from_m = build_basis(&raw_moments(&xs, None, 12).unwrap(), 6).unwrap();
        let from_s = build_basis_from_samples(&xs, None, 6).unwrap();
        for x in [1.0, 1.7, 2.5, 4.0] {
            for (p, q) in from_m.eval(x).iter().zip(from_s.eval(x)) {
                assert!((p - q).abs() < 1e-7, "{p} vs {q}");
            }
        }
    }

    #[test]
    fn gram_identity_on_construction_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in [512usize, 4096] {
            let xs: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal).exp()).collect();
            let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.1).collect();
            for degree in 0..=6 {
                let s = build_basis_from_samples(&xs, Some(&w), degree).unwrap();
                let wn = normalized_weights(n, Some(&w)).unwrap();
                assert!(s.gram_error_on(&xs, &wn) <= 1e-6);
                assert!(s.gram_error() <= 1e-6);
                let m = build_basis(&raw_moments(&xs, Some(&w), 2 * degree).unwrap(), degree).unwrap();
                assert!(m.gram_error_on(&xs, &wn) <= 1e-6, "moment route, degree {degree}");
            }
        }
    }

    #[test]
    fn monomial_dual_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let xs: Vec<f64> = (0..1000).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        for degree in 0..=8 {
            let basis = build_basis_from_samples(&xs, None, degree).unwrap();
            let mono = monomials_in_x(&basis);
            for i in 0..=40 {
                let x = -2.0 + 4.0 * i as f64 / 40.0;
                let v = basis.eval(x);
                for p in 0..=degree {
                    let h = horner(&mono[p], x);
                    assert!((v[p] - h).abs() <= 1e-9 * (1.0 + h.abs()), "deg {p} at {x}: {} vs {h}", v[p]);
                }
            }
        }
    }

    #[test]
    fn acceptance_legendre_degree_four() {
        let basis = build_basis(&legendre_moments(8), 4).unwrap();
        let (a, b) = basis.recurrence();
        for k in 0..4 {
            let kk = (k + 1) as f64;
            assert!(a[k].abs() < 1e-10);
            assert!((b[k] - kk / (4.0 * kk * kk - 1.0).sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn deterministic() {
        let xs: Vec<f64> = (0..300).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let a = build_basis_from_samples(&xs, None, 5).unwrap();
        let b = build_basis_from_samples(&xs, None, 5).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn affine_equivariance(seed in 0u64..1000, s in 0.01f64..100.0, shift in -50.0f64..50.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs: Vec<f64> = (0..600).map(|_| rng.random::<f64>().powf(1.5)).collect();
            let ys: Vec<f64> = xs.iter().map(|x| s * x + shift).collect();
            let bx = build_basis_from_samples(&xs, None, 5).unwrap();
            let by = build_basis_from_samples(&ys, None, 5).unwrap();
            for &x in xs.iter().take(50) {
                for (p, q) in bx.eval(x).iter().zip(by.eval(s * x + shift)) {
                    prop_assert!((p - q).abs() < 1e-9, "{p} vs {q}");
                }
            }
        }
    }
}
