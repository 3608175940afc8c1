//! Group cocycles with values in gl(n, C) twisted by the adjoint action.
//!
//! A cocycle is stored by its values on the generators; [`Cocycle::extend`]
//! evaluates it on any word through the twisted additivity law
//! `χ(γ₁γ₂) = χ(γ₁) + σ(γ₁)·χ(γ₂)`. The relator constraint `χ(R) = 0` cuts out
//! Z¹ inside the space of generator-value tuples; [`cocycle_basis`] computes
//! Z¹, the coboundaries B¹ and an orthogonal complement of B¹ in Z¹ that
//! stands in for H¹.
//!
//! Only class-level quantities (pairings of classes, distances modulo B¹)
//! are geometric; individual cocycle representatives are not.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, RankPolicy};
use crate::rep::{fox_jacobian, Flavor, Representation};
use crate::tolerance;
use crate::word::{Generator, GroupRingElement, Word};

/// A 1-cochain on the surface group given by its generator values.
#[derive(Clone, Debug)]
pub struct Cocycle {
    base: Arc<Representation>,
    values: Vec<CMat>,
}

pub(crate) fn same_base(a: &Arc<Representation>, b: &Arc<Representation>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Cocycle {
    /// Wraps generator values (slot order `a1, b1, ...`). Only shapes are
    /// checked; see [`Cocycle::relator_residual`] for the cocycle condition.
    pub fn new(base: Arc<Representation>, values: Vec<CMat>) -> Result<Self> {
        let n = base.rank();
        if values.len() != base.images().len() {
            return Err(Error::InvalidInput(format!(
                "expected {} generator values, got {}",
                base.images().len(),
                values.len()
            )));
        }
        if values.iter().any(|v| v.nrows() != n || v.ncols() != n) {
            return Err(Error::InvalidInput(format!("cocycle values must be {n}×{n}")));
        }
        Ok(Cocycle { base, values })
    }

    pub fn zero(base: Arc<Representation>) -> Self {
        let n = base.rank();
        let values = vec![linalg::zeros(n); base.images().len()];
        Cocycle { base, values }
    }

    /// Value `v` on one generator and zero on the others.
    pub fn indicator(base: Arc<Representation>, g: Generator, v: CMat) -> Result<Self> {
        base.presentation().check_generator(g)?;
        let mut c = Cocycle::zero(base);
        if v.shape() != c.values[0].shape() {
            return Err(Error::InvalidInput("indicator value has the wrong size".into()));
        }
        c.values[g.slot()] = v;
        Ok(c)
    }

    pub fn from_flat(base: Arc<Representation>, flat: &[Complex64]) -> Result<Self> {
        let n = base.rank();
        let slots = base.images().len();
        if flat.len() != slots * n * n {
            return Err(Error::InvalidInput("flat cocycle has the wrong length".into()));
        }
        let values = linalg::unflatten(flat, slots, n);
        Ok(Cocycle { base, values })
    }

    pub fn base(&self) -> &Arc<Representation> {
        &self.base
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    pub fn value(&self, g: Generator) -> &CMat {
        &self.values[g.slot()]
    }

    pub fn flatten(&self) -> CVec {
        linalg::flatten(&self.values)
    }

    /// Frobenius norm over all generator values.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt()
    }

    /// Evaluates the cocycle on a word, letter by letter.
    pub fn extend(&self, w: &Word) -> CMat {
        let n = self.base.rank();
        let images = self.base.images();
        let inverses = self.base.inverses();
        let mut acc = linalg::zeros(n);
        let mut prefix = linalg::identity(n);
        let mut prefix_inv = linalg::identity(n);
        for letter in w.letters() {
            let s = letter.generator.slot();
            if letter.inverse {
                // χ(x⁻¹) = −σ(x⁻¹)·χ(x)
                let local = -(&inverses[s] * &self.values[s] * &images[s]);
                acc += &prefix * local * &prefix_inv;
                prefix = &prefix * &inverses[s];
                prefix_inv = &images[s] * &prefix_inv;
            } else {
                acc += &prefix * &self.values[s] * &prefix_inv;
                prefix = &prefix * &images[s];
                prefix_inv = &inverses[s] * &prefix_inv;
            }
        }
        acc
    }

    /// Linear extension to the integral group ring.
    pub fn extend_ring(&self, e: &GroupRingElement) -> CMat {
        let n = self.base.rank();
        let mut acc = linalg::zeros(n);
        for (w, c) in e.terms() {
            acc += self.extend(w) * Complex64::from(c as f64);
        }
        acc
    }

    /// `χ(R)` through the Fox expansion `Σ_x (∂R/∂x) ⊳ χ(x)`.
    pub fn relator_value_fox(&self) -> CMat {
        let n = self.base.rank();
        let jac = constraint_matrix(&self.base);
        let v = jac * self.flatten();
        CMat::from_column_slice(n, n, v.as_slice())
    }

    /// `‖χ(R)‖_F`, evaluated letter by letter.
    pub fn relator_residual(&self) -> f64 {
        self.extend(&self.base.presentation().full_relator()).norm()
    }

    fn check_base(&self, other: &Cocycle) -> Result<()> {
        if same_base(&self.base, &other.base) {
            Ok(())
        } else {
            Err(Error::BaseMismatch("cocycles live over different representations".into()))
        }
    }

    pub fn try_add(&self, other: &Cocycle) -> Result<Cocycle> {
        self.check_base(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Cocycle { base: self.base.clone(), values })
    }

    pub fn try_sub(&self, other: &Cocycle) -> Result<Cocycle> {
        self.check_base(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Cocycle { base: self.base.clone(), values })
    }

    pub fn scale(&self, c: Complex64) -> Cocycle {
        let values = self.values.iter().map(|v| v * c).collect();
        Cocycle { base: self.base.clone(), values }
    }

    /// `Σ coeffs[i] · cocycles[i]`; all cocycles must share `base`.
    pub fn combination(base: Arc<Representation>, coeffs: &[Complex64], cocycles: &[Cocycle]) -> Result<Cocycle> {
        let mut acc = Cocycle::zero(base);
        for (c, chi) in coeffs.iter().zip(cocycles) {
            acc.check_base(chi)?;
            for (a, v) in acc.values.iter_mut().zip(&chi.values) {
                *a += v * *c;
            }
        }
        Ok(acc)
    }

    /// The same generator values over another representation. Used to carry
    /// directions between nearby base points; the result is in general only
    /// an approximate cocycle.
    pub fn rebased(&self, base: Arc<Representation>) -> Result<Cocycle> {
        Cocycle::new(base, self.values.clone())
    }

    /// Values conjugated by `M` to go with `base.conjugated_by(M)`.
    pub fn conjugated(&self, base: Arc<Representation>, m: &CMat) -> Result<Cocycle> {
        let m_inv = m
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("conjugating matrix is singular".into()))?;
        let values = self.values.iter().map(|v| m * v * &m_inv).collect();
        Cocycle::new(base, values)
    }
}

/// `δv(γ) = σ(γ)·v − v`.
pub fn coboundary(v: &CMat, base: &Arc<Representation>) -> Result<Cocycle> {
    let n = base.rank();
    if v.shape() != (n, n) {
        return Err(Error::InvalidInput(format!("coboundary argument must be {n}×{n}")));
    }
    let values = base
        .images()
        .iter()
        .zip(base.inverses())
        .map(|(x, x_inv)| x * v * x_inv - v)
        .collect();
    Ok(Cocycle { base: base.clone(), values })
}

fn require_unitary(base: &Representation) -> Result<()> {
    if base.flavor() != Flavor::Unitary {
        return Err(Error::Precondition("operation needs a unitary base representation".into()));
    }
    Ok(())
}

/// Value-wise conjugate transpose. Maps cocycles to cocycles when the base
/// is unitary.
pub fn star_involution(chi: &Cocycle) -> Result<Cocycle> {
    require_unitary(&chi.base)?;
    let values = chi.values.iter().map(|v| v.adjoint()).collect();
    Ok(Cocycle { base: chi.base.clone(), values })
}

/// `(χ − χ*)/2`, the u(n)-valued part of a cocycle over a unitary base.
pub fn anti_hermitian_part(chi: &Cocycle) -> Result<Cocycle> {
    require_unitary(&chi.base)?;
    let values = chi.values.iter().map(linalg::anti_hermitian_part).collect();
    Ok(Cocycle { base: chi.base.clone(), values })
}

/// Linear map from flattened generator values to the flattened `χ(R)`.
pub fn constraint_matrix(base: &Representation) -> CMat {
    fox_jacobian(base.presentation(), base.images(), base.inverses())
}

/// Columns are the flattened coboundaries of the matrix units `E_ij`
/// (column-major order).
pub fn coboundary_matrix(base: &Representation) -> CMat {
    let n = base.rank();
    let nn = n * n;
    let slots = base.images().len();
    let mut d = CMat::zeros(slots * nn, nn);
    for j in 0..n {
        for i in 0..n {
            let mut e = linalg::zeros(n);
            e[(i, j)] = linalg::ONE;
            for (s, (x, x_inv)) in base.images().iter().zip(base.inverses()).enumerate() {
                let v = x * &e * x_inv - &e;
                d.view_mut((s * nn, i + j * n), (nn, 1)).copy_from_slice(v.as_slice());
            }
        }
    }
    d
}

/// `(2g − 2) n² + 2`, the dimension of H¹ at an irreducible representation.
pub fn expected_h1_dimension(genus: usize, n: usize) -> usize {
    (2 * genus - 2) * n * n + 2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dimensions {
    pub z1: usize,
    pub b1: usize,
    pub h1: usize,
}

/// Orthonormal bases of Z¹, B¹ and of the orthogonal complement of B¹ in Z¹,
/// in the flattened Frobenius inner product.
#[derive(Clone, Debug)]
pub struct CocycleBasis {
    base: Arc<Representation>,
    pub z1: Vec<Cocycle>,
    pub b1: Vec<Cocycle>,
    pub h1: Vec<Cocycle>,
    pub dims: Dimensions,
    /// Flattened B¹ basis as columns, kept for projections.
    b1_columns: CMat,
}

impl CocycleBasis {
    pub fn base(&self) -> &Arc<Representation> {
        &self.base
    }

    /// Component of `χ` orthogonal to B¹, flattened.
    pub fn class_component(&self, chi: &Cocycle) -> Result<CVec> {
        if !same_base(&self.base, &chi.base) {
            return Err(Error::BaseMismatch("cocycle is not over the basis representation".into()));
        }
        let v = chi.flatten();
        let b = &self.b1_columns;
        Ok(&v - b * (b.adjoint() * &v))
    }

    /// Norm of `χ₁ − χ₂` modulo B¹.
    pub fn class_distance(&self, a: &Cocycle, b: &Cocycle) -> Result<f64> {
        Ok(self.class_component(&a.try_sub(b)?)?.norm())
    }

    /// Coordinates of the class of `χ` in the `h1` basis.
    pub fn h1_coordinates(&self, chi: &Cocycle) -> Result<CVec> {
        let v = self.class_component(chi)?;
        Ok(CVec::from_iterator(self.h1.len(), self.h1.iter().map(|h| h.flatten().dotc(&v))))
    }
}

fn columns_to_cocycles(base: &Arc<Representation>, m: &CMat) -> Vec<Cocycle> {
    m.column_iter()
        .map(|c| Cocycle::from_flat(base.clone(), c.as_slice()).expect("column length matches"))
        .collect()
}

/// Computes Z¹, B¹ and an H¹ complement by rank–nullity.
pub fn cocycle_basis(base: &Arc<Representation>) -> Result<CocycleBasis> {
    let defect = base.relator_defect();
    if defect > tolerance::CONSTRUCTION {
        return Err(Error::Precondition(format!("relator defect {defect:.3e} too large")));
    }
    let policy = RankPolicy::default();
    let (z, _) = linalg::nullspace(&constraint_matrix(base), &policy)?;
    let b = linalg::range(&coboundary_matrix(base), &policy)?;
    let projected = &z - &b * (b.adjoint() * &z);
    let h = linalg::range(&projected, &policy)?;
    let dims = Dimensions { z1: z.ncols(), b1: b.ncols(), h1: h.ncols() };
    if dims.z1 != dims.b1 + dims.h1 {
        return Err(Error::Conditioning(format!(
            "rank–nullity mismatch: Z1={} B1={} H1={}",
            dims.z1, dims.b1, dims.h1
        )));
    }
    Ok(CocycleBasis {
        base: base.clone(),
        z1: columns_to_cocycles(base, &z),
        b1: columns_to_cocycles(base, &b),
        h1: columns_to_cocycles(base, &h),
        dims,
        b1_columns: b,
    })
}

/// Real structure of the tangent space at a unitary representation: the
/// u(n)-valued cocycles modulo u(n)-valued coboundaries.
#[derive(Clone, Debug)]
pub struct UnitaryTangent {
    pub z1_real_dim: usize,
    pub b1_real_dim: usize,
    /// Real-orthonormal basis of anti-Hermitian cocycles complementary to
    /// the anti-Hermitian coboundaries.
    pub h1: Vec<Cocycle>,
}

/// Basis of `u(n)` over the reals.
fn unitary_algebra_basis(n: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        let mut m = linalg::zeros(n);
        m[(j, j)] = linalg::I;
        out.push(m);
        for k in (j + 1)..n {
            let mut m = linalg::zeros(n);
            m[(j, k)] = linalg::ONE;
            m[(k, j)] = -linalg::ONE;
            out.push(m);
            let mut m = linalg::zeros(n);
            m[(j, k)] = linalg::I;
            m[(k, j)] = linalg::I;
            out.push(m);
        }
    }
    out
}

pub fn unitary_tangent(basis: &CocycleBasis) -> Result<UnitaryTangent> {
    let base = &basis.base;
    require_unitary(base)?;
    let policy = RankPolicy::default();
    let dim = base.images().len() * base.rank() * base.rank();
    let mut spanning = Vec::with_capacity(2 * basis.z1.len());
    for z in &basis.z1 {
        spanning.push(linalg::realify(&anti_hermitian_part(z)?.flatten()));
        spanning.push(linalg::realify(&anti_hermitian_part(&z.scale(linalg::I))?.flatten()));
    }
    let zr = linalg::range(&DMatrix::from_columns(&spanning), &policy)?;
    let coboundaries = unitary_algebra_basis(base.rank())
        .iter()
        .map(|v| Ok(linalg::realify(&coboundary(v, base)?.flatten())))
        .collect::<Result<Vec<_>>>()?;
    let br = linalg::range(&DMatrix::from_columns(&coboundaries), &policy)?;
    let projected = &zr - &br * (br.transpose() * &zr);
    let hr = linalg::range(&projected, &policy)?;
    if zr.ncols() != br.ncols() + hr.ncols() {
        return Err(Error::Conditioning("real rank–nullity mismatch".into()));
    }
    debug_assert_eq!(zr.nrows(), 2 * dim);
    let h1 = hr
        .column_iter()
        .map(|c| Cocycle::from_flat(base.clone(), linalg::complexify(&c.into_owned()).as_slice()))
        .collect::<Result<Vec<_>>>()?;
    Ok(UnitaryTangent { z1_real_dim: zr.ncols(), b1_real_dim: br.ncols(), h1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::random_representation;
    use crate::word::Presentation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rep(g: usize, n: usize, flavor: Flavor, seed: u64) -> Arc<Representation> {
        Arc::new(random_representation(g, n, flavor, seed).unwrap())
    }

    fn random_values(base: &Arc<Representation>, rng: &mut ChaCha8Rng) -> Cocycle {
        let n = base.rank();
        let values = (0..base.images().len()).map(|_| linalg::ginibre(n, rng)).collect();
        Cocycle::new(base.clone(), values).unwrap()
    }

    #[test]
    fn extension_basics() {
        let base = rep(2, 2, Flavor::Unitary, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let chi = random_values(&base, &mut rng);
        assert_eq!(chi.extend(&Word::empty()), linalg::zeros(2));
        let pr = *base.presentation();
        let w = pr.parse_word("a1 b2 B1 a2 a2").unwrap();
        let ww = Word::from_letters(w.letters().chain(w.inverse().letters()));
        assert!(ww.is_empty());
        // χ(w)+σ(w)·χ(w⁻¹) vanishes by the law
        let (m, m_inv) = base.evaluate_with_inverse(&w);
        let lhs = chi.extend(&w) + &m * chi.extend(&w.inverse()) * &m_inv;
        assert!(lhs.norm() < 1e-12);
    }

    #[test]
    fn trivial_action_is_additive() {
        let pr = Presentation::new(2).unwrap();
        let base = Arc::new(Representation::trivial(pr, 1));
        let values: Vec<CMat> = (0..4)
            .map(|k| CMat::from_element(1, 1, Complex64::new(k as f64 + 1.0, 0.5)))
            .collect();
        let chi = Cocycle::new(base, values.clone()).unwrap();
        let w = pr.parse_word("a1 b1").unwrap();
        assert_eq!(chi.extend(&w), &values[0] + &values[1]);
    }

    #[test]
    fn extend_ring_examples() {
        let pr = Presentation::new(2).unwrap();
        let base = Arc::new(Representation::trivial(pr, 1));
        let one = CMat::from_element(1, 1, linalg::ONE);
        let chi = Cocycle::indicator(base, Generator::A(1), one.clone()).unwrap();
        assert_eq!(chi.extend_ring(&GroupRingElement::term(2, Word::empty())), linalg::zeros(1));
        // ∂R/∂a1 = 1 − a1 b1 a1⁻¹: χ(1) − χ(a1 b1 a1⁻¹) = 0 − (1 + 0 − 1)
        let d = pr.fox_derivative(Generator::A(1)).unwrap();
        assert_eq!(chi.extend_ring(&d), linalg::zeros(1));
        let a1 = Word::generator(Generator::A(1));
        let e = &GroupRingElement::from_word(a1.clone()) + &GroupRingElement::from_word(a1);
        assert_eq!(chi.extend_ring(&e), one * Complex64::from(2.0));
    }

    #[test]
    fn fox_expansion_agrees_with_letter_extension() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (g, n) in [(2, 2), (3, 2), (2, 3)] {
            let base = rep(g, n, Flavor::GeneralLinear, 3);
            let chi = random_values(&base, &mut rng);
            let direct = chi.extend(&base.presentation().full_relator());
            assert!((direct - chi.relator_value_fox()).norm() < 1e-11);
        }
    }

    #[test]
    fn coboundary_examples() {
        let base = rep(2, 2, Flavor::Unitary, 2);
        assert!(coboundary(&linalg::zeros(2), &base).unwrap().norm() == 0.0);
        assert!(coboundary(&linalg::identity(2), &base).unwrap().norm() < 1e-14);
        let trivial = Arc::new(Representation::trivial(*base.presentation(), 2));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(coboundary(&linalg::ginibre(2, &mut rng), &trivial).unwrap().norm(), 0.0);
        let d = coboundary(&linalg::ginibre(2, &mut rng), &base).unwrap();
        assert!(d.relator_residual() < 1e-13);
    }

    #[test]
    fn dimensions_small_cases() {
        let pr = Presentation::new(2).unwrap();
        let trivial = Arc::new(Representation::trivial(pr, 1));
        let b = cocycle_basis(&trivial).unwrap();
        assert_eq!(b.dims, Dimensions { z1: 4, b1: 0, h1: 4 });

        let b = cocycle_basis(&rep(2, 2, Flavor::Unitary, 0)).unwrap();
        assert_eq!(b.dims, Dimensions { z1: 13, b1: 3, h1: 10 });
        assert_eq!(b.dims.h1, expected_h1_dimension(2, 2));

        let b = cocycle_basis(&rep(3, 2, Flavor::GeneralLinear, 0)).unwrap();
        assert_eq!(b.dims.h1, 18);
    }

    #[test]
    fn basis_elements_are_cocycles() {
        let b = cocycle_basis(&rep(2, 2, Flavor::GeneralLinear, 4)).unwrap();
        for chi in b.z1.iter().chain(&b.b1).chain(&b.h1) {
            assert!(chi.relator_residual() < 1e-10);
        }
        // B¹ ⊂ Z¹: projection of each coboundary onto the Z¹ span is itself
        let z: Vec<CVec> = b.z1.iter().map(|c| c.flatten()).collect();
        for d in &b.b1 {
            let v = d.flatten();
            let proj: CVec = z.iter().fold(CVec::zeros(v.len()), |acc, zi| acc + zi * zi.dotc(&v));
            assert!((proj - v).norm() < 1e-10);
        }
    }

    #[test]
    fn star_involution_properties() {
        let base = rep(2, 2, Flavor::Unitary, 6);
        let b = cocycle_basis(&base).unwrap();
        let chi = &b.h1[0];
        let ah = anti_hermitian_part(chi).unwrap();
        let neg = star_involution(&ah).unwrap();
        assert!(neg.try_add(&ah).unwrap().norm() < 1e-15);
        let twice = star_involution(&star_involution(chi).unwrap()).unwrap();
        assert_eq!(twice.values(), chi.values());
        assert!(star_involution(chi).unwrap().relator_residual() < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let v = linalg::ginibre(2, &mut rng);
        let lhs = star_involution(&coboundary(&v, &base).unwrap()).unwrap();
        let rhs = coboundary(&v.adjoint(), &base).unwrap();
        assert!(lhs.try_sub(&rhs).unwrap().norm() < 1e-13);

        let gl = rep(2, 2, Flavor::GeneralLinear, 6);
        assert!(matches!(star_involution(&Cocycle::zero(gl)), Err(Error::Precondition(_))));
    }

    #[test]
    fn unitary_real_dimensions() {
        let b = cocycle_basis(&rep(2, 2, Flavor::Unitary, 7)).unwrap();
        let t = unitary_tangent(&b).unwrap();
        assert_eq!(t.z1_real_dim, b.dims.z1);
        assert_eq!(t.b1_real_dim, 3);
        assert_eq!(t.h1.len(), b.dims.h1);
        for chi in &t.h1 {
            for v in chi.values() {
                assert!((v + v.adjoint()).norm() < 1e-14);
            }
            assert!(chi.relator_residual() < 1e-10);
        }
    }

    #[test]
    fn class_distance_ignores_coboundaries() {
        let base = rep(2, 2, Flavor::Unitary, 9);
        let b = cocycle_basis(&base).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = coboundary(&linalg::ginibre(2, &mut rng), &base).unwrap();
        let shifted = b.h1[1].try_add(&d).unwrap();
        assert!(b.class_distance(&shifted, &b.h1[1]).unwrap() < 1e-12);
        assert!((b.class_distance(&b.h1[0], &Cocycle::zero(base)).unwrap() - 1.0).abs() < 1e-12);
    }
}
