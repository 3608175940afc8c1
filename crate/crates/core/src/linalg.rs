//! Dense complex linear algebra shared by the numerical modules.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// `B(u, v) = tr(uv)`, the invariant form on gl(n, C).
pub fn trace_product(u: &CMat, v: &CMat) -> Complex64 {
    let n = u.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += u[(i, j)] * v[(j, i)];
        }
    }
    acc
}

/// Adjoint action `m · v = m v m⁻¹`.
pub fn conjugate(m: &CMat, m_inv: &CMat, v: &CMat) -> CMat {
    m * v * m_inv
}

pub fn unitarity_defect(m: &CMat) -> f64 {
    (m.adjoint() * m - identity(m.nrows())).norm()
}

/// Nearest unitary matrix in Frobenius norm (unitary factor of the polar
/// decomposition).
pub fn polar_unitary(m: &CMat) -> CMat {
    let svd = sorted_svd(m);
    &svd.u * svd.v.adjoint()
}

pub fn anti_hermitian_part(m: &CMat) -> CMat {
    (m - m.adjoint()).scale(0.5)
}

/// Singular value decomposition with values sorted in decreasing order.
pub struct SortedSvd<T: ComplexField> {
    pub u: DMatrix<T>,
    pub singular_values: Vec<f64>,
    /// Columns are right singular vectors, aligned with `singular_values`.
    pub v: DMatrix<T>,
}

/// Sorted SVD by one-sided Jacobi rotations. Wide inputs are padded with
/// zero rows so that `v` is always square and spans the whole domain.
///
/// Columns of `u` belonging to zero singular values are left at zero.
pub fn sorted_svd<T>(a: &DMatrix<T>) -> SortedSvd<T>
where
    T: ComplexField<RealField = f64>,
{
    let (m, n) = a.shape();
    let mut w = if m < n {
        let mut p = DMatrix::<T>::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let mut v = DMatrix::<T>::identity(n, n);
    let tol = f64::EPSILON * (w.nrows() as f64).sqrt();
    // columns below this are treated as exact zeros
    let negligible = (w.norm() * f64::EPSILON).powi(2) * f64::EPSILON;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.clone().modulus();
                if alpha <= negligible || beta <= negligible || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.unscale(g).conjugate();
                let phase = phase.clone().unscale(phase.clone().modulus());
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = (1.0 + t * t).sqrt().recip();
                let s = c * t;
                rotate_columns(&mut w, p, q, phase.clone(), c, s);
                rotate_columns(&mut v, p, q, phase, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u_sorted = DMatrix::<T>::zeros(m, n);
    let mut v_sorted = DMatrix::<T>::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    for (c, &src) in order.iter().enumerate() {
        let s = norms[src];
        if s > 0.0 {
            u_sorted.set_column(c, &w.column(src).rows(0, m).unscale(s));
        }
        v_sorted.set_column(c, &v.column(src));
        singular_values.push(s);
    }
    SortedSvd { u: u_sorted, singular_values, v: v_sorted }
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// Applies `[x_p, x_q] ← [x_p, φ x_q] · [[c, s], [−s, c]]`.
fn rotate_columns<T>(x: &mut DMatrix<T>, p: usize, q: usize, phase: T, c: f64, s: f64)
where
    T: ComplexField<RealField = f64>,
{
    for i in 0..x.nrows() {
        let xp = x[(i, p)].clone();
        let xq = x[(i, q)].clone() * phase.clone();
        x[(i, p)] = xp.clone().scale(c) - xq.clone().scale(s);
        x[(i, q)] = xp.scale(s) + xq.scale(c);
    }
}

/// Rank decision with a relative singular-value threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankPolicy {
    /// Threshold relative to the reference scale.
    pub relative: f64,
    /// Lower bound on the reference scale, so that an operator made only of
    /// roundoff is not mistaken for a full-rank one.
    pub floor: f64,
    /// Singular values within this factor of the threshold are ambiguous.
    pub ambiguity: f64,
}

impl Default for RankPolicy {
    fn default() -> Self {
        RankPolicy { relative: 1e-8, floor: 1.0, ambiguity: 10.0 }
    }
}

impl RankPolicy {
    pub fn threshold(&self, singular_values: &[f64]) -> f64 {
        let largest = singular_values.first().copied().unwrap_or(0.0);
        self.relative * largest.max(self.floor)
    }

    pub fn rank(&self, singular_values: &[f64]) -> Result<usize> {
        let thr = self.threshold(singular_values);
        if let Some(s) = singular_values
            .iter()
            .find(|&&s| s > thr / self.ambiguity && s < thr * self.ambiguity)
        {
            return Err(Error::Conditioning(format!(
                "singular value {s:.3e} straddles the rank threshold {thr:.3e}"
            )));
        }
        Ok(singular_values.iter().filter(|&&s| s > thr).count())
    }
}

/// Orthonormal kernel basis (as columns) and the rank of `a`.
pub fn nullspace<T>(a: &DMatrix<T>, policy: &RankPolicy) -> Result<(DMatrix<T>, usize)>
where
    T: ComplexField<RealField = f64>,
{
    let svd = sorted_svd(a);
    let rank = policy.rank(&svd.singular_values)?;
    let n = a.ncols();
    let kernel = svd.v.columns(rank, n - rank).into_owned();
    Ok((kernel, rank))
}

/// Orthonormal basis (as columns) of the column space of `a`.
pub fn range<T>(a: &DMatrix<T>, policy: &RankPolicy) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64>,
{
    let svd = sorted_svd(a);
    let rank = policy.rank(&svd.singular_values)?;
    Ok(svd.u.columns(0, rank).into_owned())
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn min_norm_solve(a: &CMat, b: &CVec, policy: &RankPolicy) -> Result<CVec> {
    let svd = sorted_svd(a);
    let rank = policy.rank(&svd.singular_values)?;
    let mut x = CVec::zeros(a.ncols());
    for k in 0..rank {
        let coeff = svd.u.column(k).dotc(b) / Complex64::from(svd.singular_values[k]);
        x += svd.v.column(k) * coeff;
    }
    Ok(x)
}

/// Matrix with i.i.d. standard complex Gaussian entries, scaled by `1/√n`.
pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let scale = (2.0 * n as f64).sqrt().recip();
    CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * scale
    })
}

/// Haar-distributed unitary matrix (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let qr = ginibre(n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

pub fn unit_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(1.0, theta)
}

/// Principal n-th root of a nonzero complex number.
pub fn nth_root(z: Complex64, n: usize) -> Complex64 {
    z.powf(1.0 / n as f64)
}

/// Column-major flattening of a list of equally sized square matrices.
pub fn flatten(values: &[CMat]) -> CVec {
    let per = values.first().map(|m| m.len()).unwrap_or(0);
    let mut out = CVec::zeros(per * values.len());
    for (s, m) in values.iter().enumerate() {
        out.rows_mut(s * per, per).copy_from_slice(m.as_slice());
    }
    out
}

pub fn unflatten(v: &[Complex64], slots: usize, n: usize) -> Vec<CMat> {
    let per = n * n;
    (0..slots)
        .map(|s| CMat::from_column_slice(n, n, &v[s * per..(s + 1) * per]))
        .collect()
}

/// Real coordinates (real parts followed by imaginary parts).
pub fn realify(v: &CVec) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

pub fn complexify(v: &DVector<f64>) -> CVec {
    let n = v.len() / 2;
    CVec::from_fn(n, |i, _| Complex64::new(v[i], v[i + n]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_samples_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=4 {
            let u = haar_unitary(n, &mut rng);
            assert!(unitarity_defect(&u) < 1e-13);
        }
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = CMat::from_fn(3, 7, |_, _| Complex64::new(rng.random(), rng.random()));
        let (k, rank) = nullspace(&a, &RankPolicy::default()).unwrap();
        assert_eq!(rank, 3);
        assert_eq!(k.ncols(), 4);
        assert!((&a * &k).norm() < 1e-12);
        assert!((k.adjoint() * &k - CMat::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn svd_reconstructs_tall_and_wide() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (m, n) in [(16, 4), (4, 16), (6, 6), (9, 2)] {
            let a = CMat::from_fn(m, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let svd = sorted_svd(&a);
            let k = m.min(n);
            let s = CMat::from_diagonal(&CVec::from_iterator(k, svd.singular_values[..k].iter().map(|&x| Complex64::from(x))));
            let rec = svd.u.columns(0, k) * s * svd.v.columns(0, k).adjoint();
            assert!((rec - &a).norm() < 1e-13 * a.norm());
            assert!((svd.v.adjoint() * &svd.v - CMat::identity(n, n)).norm() < 1e-13);
            assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rank_policy_flags_ambiguity() {
        let p = RankPolicy::default();
        assert_eq!(p.rank(&[2.0, 1.0, 1e-15]).unwrap(), 2);
        assert!(p.rank(&[2.0, 1.0, 2e-8]).is_err());
        // roundoff-only operator has rank zero
        assert_eq!(p.rank(&[3e-16, 1e-17]).unwrap(), 0);
    }

    #[test]
    fn polar_projection_is_idempotent_on_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(3, &mut rng);
        assert!((polar_unitary(&u) - &u).norm() < 1e-13);
    }

    #[test]
    fn min_norm_solution_is_orthogonal_to_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = CMat::from_fn(2, 5, |_, _| Complex64::new(rng.random(), rng.random()));
        let b = CVec::from_fn(2, |_, _| Complex64::new(rng.random(), rng.random()));
        let x = min_norm_solve(&a, &b, &RankPolicy::default()).unwrap();
        assert!((&a * &x - &b).norm() < 1e-12);
        let (k, _) = nullspace(&a, &RankPolicy::default()).unwrap();
        assert!((k.adjoint() * &x).norm() < 1e-12);
    }
}
