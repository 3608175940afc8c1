//! Surface-group representations into U(n) and GL(n, C).
//!
//! A [`Representation`] assigns an invertible matrix to each generator and is
//! only ever constructed when the relator evaluates to the identity within
//! [`tolerance::CONSTRUCTION`]. Random representations are produced by
//! sampling all handles but the last freely and solving the last handle with
//! [`commutator_factor`]; [`newton_project`] pulls perturbed generator images
//! back onto the relator variety.

use std::fmt;
use std::str::FromStr;

use nalgebra::linalg::Schur;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, RankPolicy};
use crate::tolerance;
use crate::word::{fox_derivative, Generator, Presentation, Word};

/// Newton iterations allowed before giving up.
pub const NEWTON_MAX_ITERATIONS: usize = 50;
/// Inputs with a larger relator defect are outside the Newton basin.
pub const NEWTON_BASIN: f64 = 0.1;
/// Defect below which no further Newton step is taken.
const NEWTON_TARGET: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    Unitary,
    GeneralLinear,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flavor::Unitary => write!(f, "unitary"),
            Flavor::GeneralLinear => write!(f, "general-linear"),
        }
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unitary" => Ok(Flavor::Unitary),
            "general-linear" => Ok(Flavor::GeneralLinear),
            other => Err(Error::InvalidInput(format!("unknown flavor {other:?}"))),
        }
    }
}

/// Evaluates a word on raw generator images; returns the image and its inverse.
pub(crate) fn evaluate_pair(images: &[CMat], inverses: &[CMat], w: &Word) -> (CMat, CMat) {
    let n = images[0].nrows();
    let mut m = linalg::identity(n);
    let mut m_inv = linalg::identity(n);
    for letter in w.letters() {
        let s = letter.generator.slot();
        let (x, x_inv) = if letter.inverse {
            (&inverses[s], &images[s])
        } else {
            (&images[s], &inverses[s])
        };
        m = &m * x;
        m_inv = x_inv * &m_inv;
    }
    (m, m_inv)
}

fn compute_inverses(images: &[CMat], flavor: Flavor) -> Result<Vec<CMat>> {
    images
        .iter()
        .map(|m| match flavor {
            Flavor::Unitary => Ok(m.adjoint()),
            Flavor::GeneralLinear => m
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Conditioning("singular generator image".into())),
        })
        .collect()
}

fn defect_of(presentation: &Presentation, images: &[CMat], inverses: &[CMat]) -> f64 {
    let (r, _) = evaluate_pair(images, inverses, &presentation.full_relator());
    (r - linalg::identity(images[0].nrows())).norm()
}

/// A homomorphism from the surface group, given by its generator images.
#[derive(Clone, Debug)]
pub struct Representation {
    presentation: Presentation,
    flavor: Flavor,
    seed: Option<u64>,
    images: Vec<CMat>,
    inverses: Vec<CMat>,
}

impl PartialEq for Representation {
    fn eq(&self, other: &Self) -> bool {
        self.presentation == other.presentation
            && self.flavor == other.flavor
            && self.images == other.images
    }
}

impl Representation {
    /// Validates generator images (in slot order `a1, b1, ...`) and builds the
    /// representation.
    pub fn new(
        presentation: Presentation,
        flavor: Flavor,
        images: Vec<CMat>,
        seed: Option<u64>,
    ) -> Result<Self> {
        if images.len() != presentation.num_generators() {
            return Err(Error::InvalidInput(format!(
                "expected {} generator images, got {}",
                presentation.num_generators(),
                images.len()
            )));
        }
        let n = images[0].nrows();
        if n == 0 || images.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::InvalidInput("generator images must be square of equal size".into()));
        }
        if flavor == Flavor::Unitary {
            for (s, m) in images.iter().enumerate() {
                let d = linalg::unitarity_defect(m);
                if d > tolerance::CONSTRUCTION {
                    return Err(Error::Precondition(format!(
                        "image of {} is not unitary (defect {d:.3e})",
                        Generator::from_slot(s)
                    )));
                }
            }
        }
        let inverses = compute_inverses(&images, flavor)?;
        let defect = defect_of(&presentation, &images, &inverses);
        if !(defect <= tolerance::CONSTRUCTION) {
            return Err(Error::Precondition(format!("relator defect {defect:.3e} too large")));
        }
        Ok(Representation { presentation, flavor, seed, images, inverses })
    }

    /// The trivial representation of rank `n`.
    pub fn trivial(presentation: Presentation, n: usize) -> Self {
        let images = vec![linalg::identity(n); presentation.num_generators()];
        Representation {
            presentation,
            flavor: Flavor::Unitary,
            seed: None,
            inverses: images.clone(),
            images,
        }
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn genus(&self) -> usize {
        self.presentation.genus()
    }

    pub fn rank(&self) -> usize {
        self.images[0].nrows()
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn images(&self) -> &[CMat] {
        &self.images
    }

    pub fn inverses(&self) -> &[CMat] {
        &self.inverses
    }

    pub fn image(&self, g: Generator) -> &CMat {
        &self.images[g.slot()]
    }

    pub fn evaluate(&self, w: &Word) -> CMat {
        evaluate_pair(&self.images, &self.inverses, w).0
    }

    pub fn evaluate_with_inverse(&self, w: &Word) -> (CMat, CMat) {
        evaluate_pair(&self.images, &self.inverses, w)
    }

    /// `‖ρ(R_g) − I‖_F`.
    pub fn relator_defect(&self) -> f64 {
        defect_of(&self.presentation, &self.images, &self.inverses)
    }

    /// `x ↦ M ρ(x) M⁻¹`. A unitary base stays unitary only if `M` is unitary.
    pub fn conjugated_by(&self, m: &CMat) -> Result<Representation> {
        let m_inv = m
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("conjugating matrix is singular".into()))?;
        let images = self.images.iter().map(|x| m * x * &m_inv).collect();
        let flavor = if self.flavor == Flavor::Unitary && linalg::unitarity_defect(m) < 1e-12 {
            Flavor::Unitary
        } else {
            Flavor::GeneralLinear
        };
        Representation::new(self.presentation, flavor, images, self.seed)
    }

    /// Block-diagonal sum `ρ ⊕ ρ'`.
    pub fn direct_sum(&self, other: &Representation) -> Result<Representation> {
        if self.presentation != other.presentation {
            return Err(Error::BaseMismatch("direct sum of different genera".into()));
        }
        let (n, m) = (self.rank(), other.rank());
        let images = self
            .images
            .iter()
            .zip(&other.images)
            .map(|(x, y)| {
                let mut z = CMat::zeros(n + m, n + m);
                z.view_mut((0, 0), (n, n)).copy_from(x);
                z.view_mut((n, n), (m, m)).copy_from(y);
                z
            })
            .collect();
        let flavor = if self.flavor == Flavor::Unitary && other.flavor == Flavor::Unitary {
            Flavor::Unitary
        } else {
            Flavor::GeneralLinear
        };
        Representation::new(self.presentation, flavor, images, None)
    }
}

/// Linear map from generator-value tuples `(ξ_x)` to `Σ_x (∂R/∂x) ⊳ ξ_x`, the
/// first-order change of `ρ(R)ρ(R)⁻¹` under `ρ(x) ↦ (I + ξ_x)ρ(x)`.
///
/// Rows index the column-major entries of an n×n matrix; columns index the
/// flattened tuple, slot-major.
pub(crate) fn fox_jacobian(presentation: &Presentation, images: &[CMat], inverses: &[CMat]) -> CMat {
    let n = images[0].nrows();
    let nn = n * n;
    let slots = presentation.num_generators();
    let relator = presentation.full_relator();
    let mut jac = CMat::zeros(nn, slots * nn);
    for x in presentation.generators() {
        let s = x.slot();
        for (w, c) in fox_derivative(&relator, x).terms() {
            let (m, m_inv) = evaluate_pair(images, inverses, w);
            let c = Complex64::from(c as f64);
            for j in 0..n {
                for i in 0..n {
                    // column of E_ij: c · M[:, i] ⊗ M⁻¹[j, :]
                    let col = s * nn + i + j * n;
                    for q in 0..n {
                        let right = m_inv[(j, q)] * c;
                        for r in 0..n {
                            jac[(r + q * n, col)] += m[(r, i)] * right;
                        }
                    }
                }
            }
        }
    }
    jac
}

/// Eigenvectors of an upper-triangular matrix, one column per diagonal entry.
fn triangular_eigenvectors(t: &CMat) -> Result<CMat> {
    let n = t.nrows();
    let scale = t.norm().max(1.0);
    let mut y = CMat::zeros(n, n);
    for i in 0..n {
        let lambda = t[(i, i)];
        y[(i, i)] = linalg::ONE;
        for j in (0..i).rev() {
            let mut num = linalg::ZERO;
            for l in (j + 1)..=i {
                num += t[(j, l)] * y[(l, i)];
            }
            let den = t[(j, j)] - lambda;
            if den.norm() < 1e-12 * scale {
                // repeated eigenvalue: fine inside an eigenspace, fatal for a Jordan block
                if num.norm() < 1e-10 * scale {
                    y[(j, i)] = linalg::ZERO;
                } else {
                    return Err(Error::Conditioning(
                        "defective matrix: repeated eigenvalue without an eigenbasis".into(),
                    ));
                }
            } else {
                y[(j, i)] = -num / den;
            }
        }
        let norm = y.column(i).norm();
        let mut col = y.column_mut(i);
        col /= Complex64::from(norm);
    }
    Ok(y)
}

/// Cyclic shift `e_i ↦ e_{i+1}`, with one column negated in even dimension so
/// that its determinant is one.
fn cyclic_shift(n: usize) -> CMat {
    let mut p = CMat::zeros(n, n);
    for i in 0..n {
        p[((i + 1) % n, i)] = linalg::ONE;
    }
    if n % 2 == 0 {
        let mut col = p.column_mut(0);
        col.neg_mut();
    }
    p
}

/// Diagonal `E` with `P E P⁻¹ E⁻¹ = diag(λ)` for the cyclic shift `P`.
///
/// Requires `∏ λ_i = 1`; the recursion is `e_{i+1} = e_i / λ_{i+1}`.
pub fn shift_commutator_diagonal(lambda: &[Complex64]) -> Vec<Complex64> {
    let n = lambda.len();
    let mut e = vec![linalg::ONE; n];
    for i in 0..n.saturating_sub(1) {
        e[i + 1] = e[i] / lambda[i + 1];
    }
    e
}

/// Factors a determinant-one matrix as a commutator `A B A⁻¹ B⁻¹`.
///
/// `U = V Λ V⁻¹` is diagonalised; `A = V P V⁻¹` with `P` the cyclic shift and
/// `B = V E V⁻¹` with `E` diagonal. In the unitary flavor `V` is the unitary
/// Schur factor and both factors are unitary.
pub fn commutator_factor(u: &CMat, flavor: Flavor) -> Result<(CMat, CMat)> {
    let n = u.nrows();
    if n == 0 || u.ncols() != n {
        return Err(Error::InvalidInput("commutator_factor needs a nonempty square matrix".into()));
    }
    let det = u.determinant();
    if (det - linalg::ONE).norm() > tolerance::CONSTRUCTION {
        return Err(Error::Precondition(format!("determinant {det} is not one")));
    }
    if flavor == Flavor::Unitary && linalg::unitarity_defect(u) > tolerance::CONSTRUCTION {
        return Err(Error::Precondition("matrix is not unitary".into()));
    }
    if n == 1 {
        return Ok((linalg::identity(1), linalg::identity(1)));
    }
    let (q, t) = Schur::new(u.clone()).unpack();
    let mut lambda: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let (v, v_inv) = match flavor {
        Flavor::Unitary => {
            for l in lambda.iter_mut() {
                *l /= l.norm();
            }
            let v_inv = q.adjoint();
            (q, v_inv)
        }
        Flavor::GeneralLinear => {
            let v = &q * triangular_eigenvectors(&t)?;
            let sv = linalg::sorted_svd(&v).singular_values;
            let cond = sv[0] / sv[n - 1];
            if !(cond < 1e8) {
                return Err(Error::Conditioning(format!(
                    "eigenbasis condition number {cond:.3e}"
                )));
            }
            let v_inv = v.clone().try_inverse().ok_or_else(|| {
                Error::Conditioning("eigenbasis is singular".into())
            })?;
            (v, v_inv)
        }
    };
    let product: Complex64 = lambda.iter().product();
    let correction = linalg::nth_root(product, n);
    for l in lambda.iter_mut() {
        *l /= correction;
    }
    let mut e = shift_commutator_diagonal(&lambda);
    if flavor == Flavor::GeneralLinear {
        let log_mean = e.iter().map(|z| z.norm().ln()).sum::<f64>() / n as f64;
        let s = (-log_mean).exp();
        for z in e.iter_mut() {
            *z *= s;
        }
    }
    let p = cyclic_shift(n);
    let e_inv = CMat::from_diagonal(&CVec::from_iterator(n, e.iter().map(|z| z.inv())));
    let e = CMat::from_diagonal(&CVec::from_vec(e));
    let a = &v * &p * &v_inv;
    let b = &v * &e * &v_inv;
    let (a_inv, b_inv) = match flavor {
        Flavor::Unitary => (a.adjoint(), b.adjoint()),
        Flavor::GeneralLinear => (
            &v * p.transpose() * &v_inv,
            &v * e_inv * &v_inv,
        ),
    };
    let err = (&a * &b * a_inv * b_inv - u).norm();
    if !(err <= tolerance::CONSTRUCTION * u.norm().max(1.0)) {
        return Err(Error::Conditioning(format!(
            "commutator reconstruction error {err:.3e}"
        )));
    }
    Ok((a, b))
}

fn sample_image(flavor: Flavor, n: usize, rng: &mut ChaCha8Rng) -> CMat {
    match flavor {
        Flavor::Unitary => linalg::haar_unitary(n, rng),
        Flavor::GeneralLinear => {
            // Haar unitary times a Ginibre-driven positive factor: generic but
            // well conditioned, so relator words stay of moderate norm
            let u = linalg::haar_unitary(n, rng);
            let g = linalg::ginibre(n, rng);
            let h = (&g + g.adjoint()) * Complex64::from(0.5 * GL_SPREAD);
            u * h.exp()
        }
    }
}

/// Scale of the Hermitian log-factor of general-linear samples.
const GL_SPREAD: f64 = 0.5;

fn central_scalar(flavor: Flavor, rng: &mut ChaCha8Rng) -> Complex64 {
    let phase = linalg::unit_phase(rng);
    match flavor {
        Flavor::Unitary => phase,
        Flavor::GeneralLinear => {
            let r: f64 = rng.sample(StandardNormal);
            phase * (0.3 * r).exp()
        }
    }
}

/// Seeded random representation. The first `g − 1` handles are drawn from the
/// Haar (unitary) or Ginibre (general-linear) ensemble; the last handle solves
/// `[a_g, b_g] = ρ(R_{g−1})⁻¹` and is multiplied by random central scalars.
pub fn random_representation(genus: usize, n: usize, flavor: Flavor, seed: u64) -> Result<Representation> {
    let presentation = Presentation::new(genus)?;
    if n == 0 {
        return Err(Error::InvalidInput("rank must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempt = 0;
    let images = loop {
        attempt += 1;
        match draw_images(&presentation, n, flavor, &mut rng) {
            Ok(images) => break images,
            Err(Error::Conditioning(_)) if attempt < MAX_DRAWS => continue,
            Err(e) => return Err(e),
        }
    };
    let inverses = compute_inverses(&images, flavor)?;
    if defect_of(&presentation, &images, &inverses) <= NEWTON_TARGET {
        return Representation::new(presentation, flavor, images, Some(seed));
    }
    // ill-conditioned general-linear draws lose a few digits; polish them
    let (rep, _) = newton_project(presentation, flavor, images, Some(seed))?;
    Ok(rep)
}

/// Redraws allowed when the last handle cannot be factored stably.
const MAX_DRAWS: usize = 16;

fn draw_images(presentation: &Presentation, n: usize, flavor: Flavor, rng: &mut ChaCha8Rng) -> Result<Vec<CMat>> {
    let genus = presentation.genus();
    let mut images = Vec::with_capacity(2 * genus);
    for _ in 1..genus {
        images.push(sample_image(flavor, n, rng));
        images.push(sample_image(flavor, n, rng));
    }
    let target = if genus == 1 {
        linalg::identity(n)
    } else {
        let inverses = compute_inverses(&images, flavor)?;
        let (_, r_inv) = evaluate_pair(&images, &inverses, &presentation.relator(genus - 1)?);
        let det = r_inv.determinant();
        r_inv / linalg::nth_root(det, n)
    };
    let (a, b) = commutator_factor(&target, flavor)?;
    let za = central_scalar(flavor, rng);
    let zb = central_scalar(flavor, rng);
    images.push(a * za);
    images.push(b * zb);
    Ok(images)
}

/// Dimension of `{X : ρ(x) X = X ρ(x) for all generators x}`.
pub fn commutant_dimension(rep: &Representation) -> Result<usize> {
    let n = rep.rank();
    let nn = n * n;
    let mut stacked = CMat::zeros(rep.images().len() * nn, nn);
    for (s, x) in rep.images().iter().enumerate() {
        for j in 0..n {
            for i in 0..n {
                let mut e = CMat::zeros(n, n);
                e[(i, j)] = linalg::ONE;
                let c = x * &e - &e * x;
                stacked
                    .view_mut((s * nn, i + j * n), (nn, 1))
                    .copy_from_slice(c.as_slice());
            }
        }
    }
    let sv = linalg::sorted_svd(&stacked).singular_values;
    Ok(nn - RankPolicy::default().rank(&sv)?)
}

pub fn is_irreducible(rep: &Representation) -> Result<bool> {
    Ok(commutant_dimension(rep)? == 1)
}

/// Outcome of a Newton projection.
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    pub initial_defect: f64,
    pub final_defect: f64,
    /// Frobenius distance between input and output generator images.
    pub correction_norm: f64,
}

/// Gauss–Newton projection of approximate generator images onto the relator
/// variety.
///
/// Each step solves the linearised relator equation in the minimum-norm
/// sense, which keeps the step orthogonal to the kernel of the linearisation
/// and in particular to the conjugation orbit. In the unitary flavor iterates
/// are pulled back to U(n) by polar decomposition.
pub fn newton_project(
    presentation: Presentation,
    flavor: Flavor,
    images: Vec<CMat>,
    seed: Option<u64>,
) -> Result<(Representation, NewtonReport)> {
    newton_project_to(presentation, flavor, images, seed, NEWTON_TARGET)
}

/// [`newton_project`] with an explicit stopping defect. Iteration also stops
/// once the defect is below the construction tolerance and no longer halves,
/// so a target of zero runs to the roundoff floor. Finite-difference callers
/// use that to make the projection a smooth function of its input.
pub fn newton_project_to(
    presentation: Presentation,
    flavor: Flavor,
    images: Vec<CMat>,
    seed: Option<u64>,
    target: f64,
) -> Result<(Representation, NewtonReport)> {
    if images.len() != presentation.num_generators() {
        return Err(Error::InvalidInput("wrong number of generator images".into()));
    }
    let original = images.clone();
    let mut images = images;
    if flavor == Flavor::Unitary {
        for m in images.iter_mut() {
            if linalg::unitarity_defect(m) > NEWTON_TARGET {
                *m = linalg::polar_unitary(m);
            }
        }
    }
    let n = images[0].nrows();
    let slots = images.len();
    let mut inverses = compute_inverses(&images, flavor)?;
    let mut defect = defect_of(&presentation, &images, &inverses);
    let initial_defect = defect;
    if !(defect < NEWTON_BASIN) {
        return Err(Error::Convergence { iterations: 0, defect });
    }
    let policy = RankPolicy::default();
    let relator = presentation.full_relator();
    let mut iterations = 0;
    let mut previous = f64::INFINITY;
    loop {
        if defect <= target || (defect <= tolerance::CONSTRUCTION && defect > 0.5 * previous) {
            break;
        }
        if iterations == NEWTON_MAX_ITERATIONS {
            return Err(Error::Convergence { iterations, defect });
        }
        let jac = fox_jacobian(&presentation, &images, &inverses);
        let (_, r_inv) = evaluate_pair(&images, &inverses, &relator);
        let rhs = CVec::from_column_slice((r_inv - linalg::identity(n)).as_slice());
        let step = linalg::min_norm_solve(&jac, &rhs, &policy)?;
        let xi = linalg::unflatten(step.as_slice(), slots, n);
        for (m, d) in images.iter_mut().zip(&xi) {
            let updated = (linalg::identity(n) + d) * &*m;
            *m = match flavor {
                Flavor::Unitary => linalg::polar_unitary(&updated),
                Flavor::GeneralLinear => updated,
            };
        }
        inverses = compute_inverses(&images, flavor)?;
        previous = defect;
        defect = defect_of(&presentation, &images, &inverses);
        iterations += 1;
    }
    if !(defect <= tolerance::CONSTRUCTION) {
        return Err(Error::Convergence { iterations, defect });
    }
    let correction_norm = images
        .iter()
        .zip(&original)
        .map(|(a, b)| (a - b).norm_squared())
        .sum::<f64>()
        .sqrt();
    let rep = Representation { presentation, flavor, seed, images, inverses };
    Ok((
        rep,
        NewtonReport { iterations, initial_defect, final_defect: defect, correction_norm },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluate_basics() {
        let rep = random_representation(2, 2, Flavor::Unitary, 7).unwrap();
        assert_eq!(rep.evaluate(&Word::empty()), linalg::identity(2));
        assert!(rep.relator_defect() < 1e-10);
        let pr = *rep.presentation();
        let w = pr.parse_word("a1 b2 A2 b1 b1").unwrap();
        let ww = rep.evaluate(&w) * rep.evaluate(&w.inverse());
        assert!((ww - linalg::identity(2)).norm() < 1e-13);
    }

    #[test]
    fn shift_commutator_hand_example() {
        // U = diag(i, −i), P = [[0,1],[1,0]], E = diag(1, i)
        let e = shift_commutator_diagonal(&[I, -I]);
        assert_eq!(e, vec![c(1.0, 0.0), I]);
        let p = CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let ee = CMat::from_diagonal(&CVec::from_vec(e.clone()));
        let e_inv = CMat::from_diagonal(&CVec::from_vec(e.iter().map(|z| z.inv()).collect()));
        let comm = &p * &ee * &p * e_inv;
        let expected = CMat::from_diagonal(&CVec::from_vec(vec![I, -I]));
        assert!((comm - expected).norm() < 1e-15);
    }

    #[test]
    fn commutator_factor_identity_and_diagonal() {
        for flavor in [Flavor::Unitary, Flavor::GeneralLinear] {
            let id = linalg::identity(3);
            let (a, b) = commutator_factor(&id, flavor).unwrap();
            assert!((&a * &b - &b * &a).norm() < 1e-12);

            let u = CMat::from_diagonal(&CVec::from_vec(vec![I, -I]));
            let (a, b) = commutator_factor(&u, flavor).unwrap();
            let comm = &a * &b * a.clone().try_inverse().unwrap() * b.clone().try_inverse().unwrap();
            assert!((comm - u).norm() < 1e-12);
        }
    }

    #[test]
    fn commutator_factor_rejects_bad_determinant() {
        let u = linalg::identity(2) * c(2.0, 0.0);
        assert!(matches!(commutator_factor(&u, Flavor::GeneralLinear), Err(Error::Precondition(_))));
        let nonunitary = CMat::from_row_slice(2, 2, &[c(2., 0.), c(0., 0.), c(0., 0.), c(0.5, 0.)]);
        assert!(matches!(commutator_factor(&nonunitary, Flavor::Unitary), Err(Error::Precondition(_))));
    }

    #[test]
    fn commutator_factor_rejects_jordan_block() {
        let j = CMat::from_row_slice(2, 2, &[c(1., 0.), c(1., 0.), c(0., 0.), c(1., 0.)]);
        assert!(matches!(commutator_factor(&j, Flavor::GeneralLinear), Err(Error::Conditioning(_))));
    }

    #[test]
    fn abelian_random_representation() {
        let rep = random_representation(2, 1, Flavor::Unitary, 3).unwrap();
        for m in rep.images() {
            assert!((m[(0, 0)].norm() - 1.0).abs() < 1e-15);
        }
        // exact arithmetic gives zero; floating point leaves a few ulps
        assert!(rep.relator_defect() <= 16.0 * f64::EPSILON);
    }

    #[test]
    fn seeded_unitary_defect_is_tiny() {
        let rep = random_representation(2, 2, Flavor::Unitary, 42).unwrap();
        assert!(rep.relator_defect() < 1e-12);
    }

    #[test]
    fn commutant_dimensions() {
        let pr = Presentation::new(2).unwrap();
        assert_eq!(commutant_dimension(&Representation::trivial(pr, 2)).unwrap(), 4);
        let r1 = random_representation(2, 1, Flavor::Unitary, 1).unwrap();
        let r2 = random_representation(2, 1, Flavor::Unitary, 2).unwrap();
        assert_eq!(commutant_dimension(&r1.direct_sum(&r2).unwrap()).unwrap(), 2);
        let irr = random_representation(2, 2, Flavor::Unitary, 0).unwrap();
        assert_eq!(commutant_dimension(&irr).unwrap(), 1);
        let irr3 = random_representation(2, 3, Flavor::Unitary, 5).unwrap();
        assert_eq!(commutant_dimension(&irr.direct_sum(&irr3).unwrap()).unwrap(), 2);
        let gl = random_representation(3, 3, Flavor::GeneralLinear, 9).unwrap();
        assert_eq!(commutant_dimension(&gl).unwrap(), 1);
    }

    #[test]
    fn newton_fixed_point() {
        let rep = random_representation(2, 2, Flavor::Unitary, 11).unwrap();
        let (out, report) =
            newton_project(*rep.presentation(), rep.flavor(), rep.images().to_vec(), rep.seed()).unwrap();
        assert_eq!(report.iterations, 0);
        assert_eq!(out.images(), rep.images());
    }

    #[test]
    fn newton_restores_perturbed_relator() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for flavor in [Flavor::Unitary, Flavor::GeneralLinear] {
            let rep = random_representation(2, 2, flavor, 12).unwrap();
            let images: Vec<CMat> = rep
                .images()
                .iter()
                .map(|m| {
                    let noise = linalg::ginibre(2, &mut rng) * c(1e-3, 0.0);
                    let noise = match flavor {
                        Flavor::Unitary => linalg::anti_hermitian_part(&noise),
                        Flavor::GeneralLinear => noise,
                    };
                    (noise.exp()) * m
                })
                .collect();
            let (out, report) = newton_project(*rep.presentation(), flavor, images, None).unwrap();
            assert!(report.initial_defect > 1e-5);
            assert!(out.relator_defect() <= 1e-10);
            assert!(report.iterations >= 1);
        }
    }

    #[test]
    fn newton_rejects_far_inputs() {
        let rep = random_representation(2, 2, Flavor::GeneralLinear, 13).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let direction = linalg::ginibre(2, &mut rng);
        let base = rep.images().to_vec();
        let mut images = base.clone();
        for t in 1..400 {
            images[0] = (linalg::identity(2) + &direction * c(0.01 * t as f64, 0.0)) * &base[0];
            let inv = compute_inverses(&images, Flavor::GeneralLinear).unwrap();
            if defect_of(rep.presentation(), &images, &inv) > 0.5 {
                break;
            }
        }
        let err = newton_project(*rep.presentation(), Flavor::GeneralLinear, images, None).unwrap_err();
        assert!(matches!(err, Error::Convergence { defect, .. } if defect > 0.1));
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let a = random_representation(3, 3, Flavor::GeneralLinear, 5).unwrap();
        let b = random_representation(3, 3, Flavor::GeneralLinear, 5).unwrap();
        assert_eq!(a.images(), b.images());
        let c = random_representation(3, 3, Flavor::GeneralLinear, 6).unwrap();
        assert_ne!(a.images(), c.images());
    }
}
