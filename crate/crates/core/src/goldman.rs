//! The Goldman pairing on H¹(Γ, gl(n)) and its Gram matrices.
//!
//! Two independent evaluations are provided. [`pairing_dual`] uses the
//! closed form in the dual generators `α_k`, `β_k`; [`pairing_cup`] evaluates
//! the cup-product cochain `B(χ₁(γ₁), σ(γ₁)·χ₂(γ₂))` on the fundamental
//! 2-cycle term by term. `B(u, v) = tr(uv)` throughout and the pairing is
//! complex bilinear.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::cocycle::{self, Cocycle, CocycleBasis};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, RankPolicy};
use crate::rep::{Flavor, Representation};
use crate::tolerance;
use crate::word::{Generator, Word};

fn check_same_base(c1: &Cocycle, c2: &Cocycle) -> Result<()> {
    if cocycle::same_base(c1.base(), c2.base()) {
        Ok(())
    } else {
        Err(Error::BaseMismatch("pairing needs cocycles over the same representation".into()))
    }
}

/// Words and matrices of the dual-generator formula for one base.
struct DualContext {
    alphas: Vec<Word>,
    betas: Vec<Word>,
    /// `(σ(R_k), σ(R_k)⁻¹)` for `k = 0..=g`.
    prefixes: Vec<(CMat, CMat)>,
}

impl DualContext {
    fn new(base: &Representation) -> Self {
        let pr = base.presentation();
        let g = pr.genus();
        let mut alphas = Vec::with_capacity(g);
        let mut betas = Vec::with_capacity(g);
        for k in 1..=g {
            let (a, b) = pr.dual_pair(k).expect("handle in range");
            alphas.push(a);
            betas.push(b);
        }
        let prefixes = (0..=g)
            .map(|k| base.evaluate_with_inverse(&pr.relator(k).expect("k in range")))
            .collect();
        DualContext { alphas, betas, prefixes }
    }

    /// Left factors `χ(α_k), χ(β_k)`, interleaved by handle.
    fn left(&self, chi: &Cocycle) -> Vec<CMat> {
        self.alphas
            .iter()
            .zip(&self.betas)
            .flat_map(|(a, b)| [chi.extend(a), chi.extend(b)])
            .collect()
    }

    /// Right factors `σ(R_{k−1})·χ(a_k)` and `−σ(R_k)·χ(b_k)`.
    fn right(&self, chi: &Cocycle, beta_sign: f64) -> Vec<CMat> {
        let g = self.alphas.len();
        let mut out = Vec::with_capacity(2 * g);
        for k in 1..=g {
            let (p, p_inv) = &self.prefixes[k - 1];
            let (c, c_inv) = &self.prefixes[k];
            out.push(linalg::conjugate(p, p_inv, chi.value(Generator::A(k))));
            out.push(linalg::conjugate(c, c_inv, chi.value(Generator::B(k))) * Complex64::from(-beta_sign));
        }
        out
    }
}

fn contract(left: &[CMat], right: &[CMat]) -> Complex64 {
    left.iter().zip(right).map(|(l, r)| linalg::trace_product(l, r)).sum()
}

/// `Σ_k B(χ₁(α_k), σ(R_{k−1})·χ₂(a_k)) − B(χ₁(β_k), σ(R_k)·χ₂(b_k))`.
pub fn pairing_dual(c1: &Cocycle, c2: &Cocycle) -> Result<Complex64> {
    pairing_dual_signed(c1, c2, 1.0)
}

/// The dual formula with the sign of the `β` terms multiplied by
/// `beta_sign`. Only `±1` are meaningful; `−1` is the mutation used to check
/// that the verification suite notices a transcription error.
pub(crate) fn pairing_dual_signed(c1: &Cocycle, c2: &Cocycle, beta_sign: f64) -> Result<Complex64> {
    check_same_base(c1, c2)?;
    let ctx = DualContext::new(c1.base());
    Ok(contract(&ctx.left(c1), &ctx.right(c2, beta_sign)))
}

/// The cup-product 2-cochain `B(χ₁(γ₁), σ(γ₁)·χ₂(γ₂))`.
pub fn cup_cochain(c1: &Cocycle, c2: &Cocycle, g1: &Word, g2: &Word) -> Result<Complex64> {
    check_same_base(c1, c2)?;
    let (m, m_inv) = c1.base().evaluate_with_inverse(g1);
    Ok(linalg::trace_product(&c1.extend(g1), &linalg::conjugate(&m, &m_inv, &c2.extend(g2))))
}

/// The cup product evaluated on the fundamental 2-cycle
/// `Σ_x (∂R/∂x, x)`, extended linearly over the group-ring coefficients.
pub fn pairing_cup(c1: &Cocycle, c2: &Cocycle) -> Result<Complex64> {
    check_same_base(c1, c2)?;
    let base = c1.base();
    let cycle = base.presentation().fundamental_two_cycle();
    let mut acc = linalg::ZERO;
    for (coefficient, x) in &cycle.terms {
        let chi2_x = c2.value(*x);
        for (w, k) in coefficient.terms() {
            let (m, m_inv) = base.evaluate_with_inverse(w);
            let term = linalg::trace_product(&c1.extend(w), &linalg::conjugate(&m, &m_inv, chi2_x));
            acc += term * Complex64::from(k as f64);
        }
    }
    Ok(acc)
}

/// `G_ij = ω(χ_i, χ_j)` by the dual formula. Rows are computed
/// independently, so the parallel and serial results are identical.
pub fn gram_of(cocycles: &[Cocycle], parallel: bool) -> Result<CMat> {
    gram_of_signed(cocycles, parallel, 1.0)
}

pub(crate) fn gram_of_signed(cocycles: &[Cocycle], parallel: bool, beta_sign: f64) -> Result<CMat> {
    let d = cocycles.len();
    let Some(first) = cocycles.first() else {
        return Ok(CMat::zeros(0, 0));
    };
    for c in cocycles {
        check_same_base(first, c)?;
    }
    let ctx = DualContext::new(first.base());
    let (lefts, rights): (Vec<_>, Vec<_>) = if parallel {
        cocycles.par_iter().map(|c| (ctx.left(c), ctx.right(c, beta_sign))).unzip()
    } else {
        cocycles.iter().map(|c| (ctx.left(c), ctx.right(c, beta_sign))).unzip()
    };
    let row = |i: usize| -> Vec<Complex64> { (0..d).map(|j| contract(&lefts[i], &rights[j])).collect() };
    let rows: Vec<Vec<Complex64>> = if parallel {
        (0..d).into_par_iter().map(row).collect()
    } else {
        (0..d).map(row).collect()
    };
    Ok(CMat::from_fn(d, d, |i, j| rows[i][j]))
}

/// `‖G + Gᵀ‖_F`.
pub fn skewness(g: &CMat) -> f64 {
    (g + g.transpose()).norm()
}

/// Which cocycles a Gram matrix is taken over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    /// The orthonormal Z¹ basis; B¹ lies in the radical.
    Z1,
    /// The orthogonal complement of B¹ in Z¹.
    H1,
    /// An explicit list of cocycles.
    Given,
}

#[derive(Clone, Debug)]
pub struct GoldmanGram {
    base: Arc<Representation>,
    pub space: Space,
    pub basis: Vec<Cocycle>,
    pub matrix: CMat,
    pub skewness: f64,
    /// Sorted in decreasing order.
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

impl GoldmanGram {
    pub fn from_cocycles(cocycles: Vec<Cocycle>, space: Space, parallel: bool) -> Result<Self> {
        let base = cocycles
            .first()
            .map(|c| c.base().clone())
            .ok_or_else(|| Error::InvalidInput("Gram matrix of an empty list".into()))?;
        let matrix = gram_of(&cocycles, parallel)?;
        let singular_values = linalg::sorted_svd(&matrix).singular_values;
        let rank = RankPolicy::default().rank(&singular_values)?;
        Ok(GoldmanGram {
            base,
            space,
            skewness: skewness(&matrix),
            basis: cocycles,
            matrix,
            singular_values,
            rank,
        })
    }

    pub fn base(&self) -> &Arc<Representation> {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Ratio of the smallest kept to the largest discarded singular value,
    /// infinite when nothing is discarded.
    pub fn rank_margin(&self) -> f64 {
        match (self.rank.checked_sub(1), self.singular_values.get(self.rank)) {
            (Some(k), Some(&discarded)) => self.singular_values[k] / discarded,
            _ => f64::INFINITY,
        }
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.rank == self.dim()
    }
}

pub fn gram(basis: &CocycleBasis, space: Space) -> Result<GoldmanGram> {
    let cocycles = match space {
        Space::Z1 => basis.z1.clone(),
        Space::H1 => basis.h1.clone(),
        Space::Given => {
            return Err(Error::InvalidInput("use GoldmanGram::from_cocycles for explicit lists".into()))
        }
    };
    GoldmanGram::from_cocycles(cocycles, space, false)
}

/// Pairs `(e_i, f_i)` with `ω(e_i, f_j) = δ_ij` and `ω(e_i, e_j) = ω(f_i, f_j) = 0`.
#[derive(Clone, Debug)]
pub struct SymplecticBasis {
    pub e: Vec<Cocycle>,
    pub f: Vec<Cocycle>,
    /// Columns are coefficients of `e_1..e_m, f_1..f_m` in the Gram basis.
    pub transform: CMat,
    /// `‖Tᵀ G T − J‖_F`.
    pub residual: f64,
}

/// The standard block matrix `[[0, I], [−I, 0]]` of size `2m`.
pub fn standard_j(m: usize) -> CMat {
    let mut j = CMat::zeros(2 * m, 2 * m);
    for i in 0..m {
        j[(i, m + i)] = linalg::ONE;
        j[(m + i, i)] = -linalg::ONE;
    }
    j
}

/// Skew Gram–Schmidt with full pivoting. Returns `T` with `Tᵀ G T = J`.
pub fn symplectic_transform(g: &CMat) -> Result<CMat> {
    let d = g.nrows();
    if g.ncols() != d {
        return Err(Error::InvalidInput("Gram matrix must be square".into()));
    }
    if d % 2 == 1 {
        return Err(Error::Degenerate {
            index: d,
            vector: "odd dimension admits no nondegenerate skew form".into(),
        });
    }
    let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let threshold = tolerance::VERIFICATION * scale.max(f64::MIN_POSITIVE);
    let omega = |u: &linalg::CVec, v: &linalg::CVec| (u.transpose() * g * v)[(0, 0)];
    let mut remaining: Vec<linalg::CVec> = (0..d).map(|i| linalg::CVec::from_fn(d, |r, _| if r == i { linalg::ONE } else { linalg::ZERO })).collect();
    let mut es = Vec::with_capacity(d / 2);
    let mut fs = Vec::with_capacity(d / 2);
    while !remaining.is_empty() {
        let mut best = (0, 0, 0.0);
        for p in 0..remaining.len() {
            for q in p + 1..remaining.len() {
                let v = omega(&remaining[p], &remaining[q]).norm();
                if v > best.2 {
                    best = (p, q, v);
                }
            }
        }
        let (p, q, size) = best;
        if size <= threshold {
            let index = es.len() * 2;
            let vector = remaining[0].iter().map(|z| format!("{:.3e}{:+.3e}i", z.re, z.im)).collect::<Vec<_>>().join(" ");
            return Err(Error::Degenerate { index, vector });
        }
        let f_raw = remaining.remove(q);
        let e = remaining.remove(p);
        let f = &f_raw / omega(&e, &f_raw);
        for w in remaining.iter_mut() {
            let wf = omega(w, &f);
            let we = omega(w, &e);
            *w = &*w - &e * wf + &f * we;
        }
        es.push(e);
        fs.push(f);
    }
    let columns: Vec<_> = es.into_iter().chain(fs).collect();
    Ok(DMatrix::from_columns(&columns))
}

pub fn symplectic_basis(gram: &GoldmanGram) -> Result<SymplecticBasis> {
    let t = symplectic_transform(&gram.matrix)?;
    let m = t.ncols() / 2;
    let residual = (t.transpose() * &gram.matrix * &t - standard_j(m)).norm();
    let combine = |col: usize| {
        let coeffs: Vec<Complex64> = t.column(col).iter().copied().collect();
        Cocycle::combination(gram.base.clone(), &coeffs, &gram.basis)
    };
    let e = (0..m).map(combine).collect::<Result<Vec<_>>>()?;
    let f = (m..2 * m).map(combine).collect::<Result<Vec<_>>>()?;
    Ok(SymplecticBasis { e, f, transform: t, residual })
}

/// Outcome of [`unitary_restriction_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryReport {
    pub pairs: usize,
    pub max_imaginary: f64,
    /// Indices of the pair with the largest imaginary part.
    pub worst_pair: Option<(usize, usize)>,
    pub real_rank: usize,
    pub dim: usize,
    pub real_values: bool,
    pub nondegenerate: bool,
}

impl UnitaryReport {
    pub fn passed(&self) -> bool {
        self.real_values && self.nondegenerate
    }
}

/// Checks that the pairing is real on u(n)-valued cocycles over a unitary
/// base, and that the real skew form on them is nondegenerate.
pub fn unitary_restriction_check(cocycles: &[Cocycle]) -> Result<UnitaryReport> {
    let Some(first) = cocycles.first() else {
        return Ok(UnitaryReport {
            pairs: 0,
            max_imaginary: 0.0,
            worst_pair: None,
            real_rank: 0,
            dim: 0,
            real_values: true,
            nondegenerate: true,
        });
    };
    if first.base().flavor() != Flavor::Unitary {
        return Err(Error::Precondition("unitary restriction needs a unitary base".into()));
    }
    for (i, c) in cocycles.iter().enumerate() {
        let off: f64 = c.values().iter().map(|v| (v + v.adjoint()).norm()).sum();
        if off > tolerance::CONSTRUCTION * c.norm().max(1.0) {
            return Err(Error::Precondition(format!("cocycle {i} is not anti-Hermitian ({off:.3e})")));
        }
    }
    let g = gram_of(cocycles, false)?;
    let d = g.nrows();
    let mut max_imaginary = 0.0;
    let mut worst_pair = None;
    for i in 0..d {
        for j in 0..d {
            let im = g[(i, j)].im.abs();
            if im > max_imaginary || worst_pair.is_none() {
                max_imaginary = im;
                worst_pair = Some((i, j));
            }
        }
    }
    let real = g.map(|z| z.re);
    let real_rank = RankPolicy::default().rank(&linalg::sorted_svd(&real).singular_values)?;
    Ok(UnitaryReport {
        pairs: d * d,
        max_imaginary,
        worst_pair,
        real_rank,
        dim: d,
        real_values: max_imaginary < tolerance::CONSTRUCTION,
        nondegenerate: real_rank == d,
    })
}
