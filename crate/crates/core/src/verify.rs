//! The bundled property suite behind `goldman verify`.
//!
//! Each property reports `name: samples=N max_residual=R threshold=T PASS|FAIL`
//! and passes when `R ≤ T`. The report is a pure function of the
//! configuration, so two runs with the same configuration print the same
//! bytes. A property that raises an error is reported as failed with an
//! infinite residual; the remaining properties still run.
//!
//! Report grammar, one `key: value` line each:
//!
//! ```text
//! suite: verify
//! genus: <int>
//! rank: <int>
//! flavor: unitary | general-linear
//! seed: <u64>
//! mutation: none | dual-sign
//! <property>: samples=<int> max_residual=<float> threshold=<float> PASS|FAIL
//! ...
//! summary: passed=<int> failed=<int>
//! ```

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::{
    class_separation, closedness_check, convergence_orders, convergence_ratios, deform, rh_differential,
    rh_word_values, Chart, DeformationCurve,
};
use crate::cocycle::{
    self, coboundary, cocycle_basis, expected_h1_dimension, star_involution, unitary_tangent, Cocycle, CocycleBasis,
};
use crate::config::{Mutation, RunConfig};
use crate::error::Result;
use crate::goldman::{
    gram, gram_of, pairing_cup, pairing_dual_signed, symplectic_basis, unitary_restriction_check, Space,
};
use crate::linalg::{self, CMat};
use crate::rep::{
    commutant_dimension, commutator_factor, newton_project, random_representation, Flavor, Representation,
};
use crate::word::{fox_derivative, Generator, GroupRingElement, Letter, Presentation, Word};

/// Outcome of one property.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyResult {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub threshold: f64,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.threshold
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: samples={} max_residual={:.3e} threshold={:.3e} {}",
            self.name,
            self.samples,
            self.max_residual,
            self.threshold,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub config: RunConfig,
    pub mutation: Mutation,
    pub results: Vec<PropertyResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.results.iter().all(PropertyResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyResult> {
        self.results.iter().filter(|r| !r.passed())
    }

    pub fn get(&self, name: &str) -> Option<&PropertyResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite: verify")?;
        writeln!(f, "genus: {}", self.config.genus)?;
        writeln!(f, "rank: {}", self.config.rank)?;
        writeln!(f, "flavor: {}", self.config.flavor)?;
        writeln!(f, "seed: {}", self.config.seed)?;
        writeln!(f, "mutation: {}", self.mutation)?;
        for r in &self.results {
            writeln!(f, "{r}")?;
        }
        let failed = self.failures().count();
        writeln!(f, "summary: passed={} failed={}", self.results.len() - failed, failed)
    }
}

/// `(samples, max residual)` of one property body.
type Outcome = Result<(usize, f64)>;

struct Runner {
    seed: u64,
    results: Vec<PropertyResult>,
}

impl Runner {
    fn rng(&self) -> ChaCha8Rng {
        // every property draws from its own stream
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.results.len() as u64 + 1);
        rng
    }

    fn check(&mut self, name: &str, threshold: f64, body: impl FnOnce(&mut ChaCha8Rng) -> Outcome) {
        let mut rng = self.rng();
        let (samples, max_residual) = match body(&mut rng) {
            Ok((s, r)) if r.is_nan() => (s, f64::INFINITY),
            Ok(v) => v,
            Err(_) => (0, f64::INFINITY),
        };
        self.results.push(PropertyResult { name: name.to_string(), samples, max_residual, threshold });
    }
}

fn random_word(pr: &Presentation, len: usize, rng: &mut impl Rng) -> Word {
    Word::from_letters(random_letters(pr, len, rng))
}

fn random_letters(pr: &Presentation, len: usize, rng: &mut impl Rng) -> Vec<Letter> {
    (0..len)
        .map(|_| {
            let g = Generator::from_slot(rng.random_range(0..pr.num_generators()));
            Letter { generator: g, inverse: rng.random_bool(0.5) }
        })
        .collect()
}

fn random_ring_element(pr: &Presentation, rng: &mut impl Rng) -> GroupRingElement {
    let mut e = GroupRingElement::zero();
    for _ in 0..rng.random_range(1..4) {
        let len = rng.random_range(0..5);
        e.add_term(rng.random_range(-3..=3), random_word(pr, len, rng));
    }
    e
}

/// Free reduction by cancelling adjacent inverse pairs in random order.
fn reduce_in_random_order(letters: &[Letter], rng: &mut impl Rng) -> Vec<Letter> {
    let mut v = letters.to_vec();
    loop {
        let spots: Vec<usize> = (0..v.len().saturating_sub(1)).filter(|&i| v[i].inverted() == v[i + 1]).collect();
        if spots.is_empty() {
            return v;
        }
        let i = spots[rng.random_range(0..spots.len())];
        v.drain(i..i + 2);
    }
}

/// Letters with deliberately planted cancellations.
fn cancellable_letters(pr: &Presentation, rng: &mut impl Rng) -> Vec<Letter> {
    let mut v = random_letters(pr, 6, rng);
    for _ in 0..6 {
        let pos = rng.random_range(0..=v.len());
        let inner = random_letters(pr, rng.random_range(1..4), rng);
        let inverse: Vec<Letter> = inner.iter().rev().map(|l| l.inverted()).collect();
        let mut block = inner;
        block.extend(inverse);
        v.splice(pos..pos, block);
    }
    v
}

fn count_bool(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

fn word_properties(run: &mut Runner, pr: Presentation) {
    run.check("word.reduction_confluence", 0.0, |rng| {
        let mut bad = 0.0;
        for _ in 0..100 {
            let letters = cancellable_letters(&pr, rng);
            let eager = Word::from_letters(letters.iter().copied());
            let lazy = reduce_in_random_order(&letters, rng);
            let ok = eager.letters().collect::<Vec<_>>() == lazy
                && Word::from_letters(eager.letters()) == eager;
            bad += count_bool(ok);
        }
        Ok((100, bad))
    });
    run.check("word.fox_product_rule", 0.0, |rng| {
        let mut bad = 0.0;
        let mut samples = 0;
        for x in pr.generators() {
            for _ in 0..100 {
                let u = random_word(&pr, rng.random_range(0..8), rng);
                let v = random_word(&pr, rng.random_range(0..8), rng);
                let lhs = fox_derivative(&u.concat(&v), x);
                let rhs = &fox_derivative(&u, x) + &fox_derivative(&v, x).left_mul_word(&u);
                bad += count_bool(lhs == rhs);
                samples += 1;
            }
        }
        Ok((samples, bad))
    });
    run.check("word.fox_closed_form", 0.0, |_| {
        let mut bad = 0.0;
        for x in pr.generators() {
            bad += count_bool(pr.fox_derivative(x)? == pr.fox_derivative_closed_form(x)?);
        }
        Ok((pr.num_generators(), bad))
    });
    run.check("word.dual_identities", 0.0, |_| {
        let mut bad = 0.0;
        let g = pr.genus();
        let script = |k: usize| -> Result<Word> { Ok(pr.relator(k)?.inverse()) };
        for k in 1..=g {
            let (alpha, beta) = pr.dual_pair(k)?;
            let comm = alpha.commutator(&beta);
            let r_dual = comm.concat(&pr.relator(k)?).concat(&pr.relator(k - 1)?.inverse());
            let a_inv = script(k)?.concat(&beta).concat(&script(k - 1)?.inverse());
            let b_inv = script(k - 1)?.concat(&alpha).concat(&script(k)?.inverse());
            bad += count_bool(r_dual.is_empty());
            bad += count_bool(a_inv == Word::generator_inverse(Generator::A(k)));
            bad += count_bool(b_inv == Word::generator_inverse(Generator::B(k)));
        }
        let mut total = Word::empty();
        for k in 1..=g {
            let (alpha, beta) = pr.dual_pair(k)?;
            total = total.concat(&alpha.commutator(&beta));
        }
        bad += count_bool(total.concat(&pr.full_relator()).is_empty());
        Ok((3 * g + 1, bad))
    });
    run.check("word.ring_axioms", 0.0, |rng| {
        let mut bad = 0.0;
        for _ in 0..100 {
            let e = random_ring_element(&pr, rng);
            let f = random_ring_element(&pr, rng);
            let h = random_ring_element(&pr, rng);
            bad += count_bool(&e * &(&f + &h) == &(&e * &f) + &(&e * &h));
            bad += count_bool(&(&f + &h) * &e == &(&f * &e) + &(&h * &e));
            bad += count_bool(&(&e * &f) * &h == &e * &(&f * &h));
            bad += count_bool((&e * &f).anti_involution() == &f.anti_involution() * &e.anti_involution());
            bad += count_bool(e.anti_involution().anti_involution() == e);
        }
        Ok((100, bad))
    });
}

fn random_special(n: usize, flavor: Flavor, rng: &mut ChaCha8Rng) -> CMat {
    match flavor {
        Flavor::Unitary => {
            let u = linalg::haar_unitary(n, rng);
            let phase = linalg::nth_root(u.determinant(), n);
            u / phase
        }
        Flavor::GeneralLinear => {
            let g = linalg::ginibre(n, rng);
            let trace = g.trace() / Complex64::from(n as f64);
            (g - linalg::identity(n) * trace).exp()
        }
    }
}

fn rep_properties(run: &mut Runner, config: &RunConfig, base: &Arc<Representation>) {
    let pr = *base.presentation();
    let tol = config.tolerances;
    run.check("rep.relator_defect", 1e-12, |_| Ok((1, base.relator_defect())));
    run.check("rep.multiplicativity", 1e-12, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let u = random_word(&pr, rng.random_range(0..10), rng);
            let v = random_word(&pr, rng.random_range(0..10), rng);
            let prod = base.evaluate(&u) * base.evaluate(&v);
            let err = (base.evaluate(&u.concat(&v)) - &prod).norm() / prod.norm().max(1.0);
            worst = worst.max(err);
        }
        Ok((100, worst))
    });
    run.check("rep.partial_relator_determinant", tol.construction, |_| {
        let mut worst: f64 = 0.0;
        for k in 0..=pr.genus() {
            worst = worst.max((base.evaluate(&pr.relator(k)?).determinant() - linalg::ONE).norm());
        }
        Ok((pr.genus() + 1, worst))
    });
    run.check("rep.commutator_factor", tol.construction, |rng| {
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            let n = 2 + i % 3;
            let u = random_special(n, config.flavor, rng);
            let (a, b) = commutator_factor(&u, config.flavor)?;
            let comm = &a * &b * a.clone().try_inverse().expect("invertible") * b.clone().try_inverse().expect("invertible");
            worst = worst.max((comm - &u).norm() / u.norm().max(1.0));
        }
        Ok((100, worst))
    });
    run.check("rep.commutant_dimension", 0.0, |_| Ok((1, (commutant_dimension(base)? as f64 - 1.0).abs())));
    run.check("rep.newton_restores", tol.construction, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let images: Vec<CMat> = base
                .images()
                .iter()
                .map(|m| {
                    let noise = linalg::ginibre(base.rank(), rng) * Complex64::from(1e-3);
                    let noise = match config.flavor {
                        Flavor::Unitary => linalg::anti_hermitian_part(&noise),
                        Flavor::GeneralLinear => noise,
                    };
                    noise.exp() * m
                })
                .collect();
            let (out, _) = newton_project(pr, config.flavor, images, None)?;
            worst = worst.max(out.relator_defect());
        }
        Ok((5, worst))
    });
    run.check("rep.reproducibility", 0.0, |_| {
        let again = random_representation(config.genus, config.rank, config.flavor, config.seed)?;
        Ok((1, count_bool(again == **base)))
    });
}

fn random_cocycle(basis: &CocycleBasis, rng: &mut ChaCha8Rng) -> Result<Cocycle> {
    let coeffs: Vec<Complex64> = (0..basis.z1.len()).map(|_| linalg::ginibre(1, rng)[(0, 0)]).collect();
    Cocycle::combination(basis.base().clone(), &coeffs, &basis.z1)
}

fn cocycle_properties(run: &mut Runner, config: &RunConfig, basis: &CocycleBasis) {
    let base = basis.base();
    let pr = *base.presentation();
    let n = base.rank();
    let tol = config.tolerances;
    run.check("cocycle.dimension_formula", 0.0, |_| {
        let d = basis.dims;
        let formula = expected_h1_dimension(pr.genus(), n) as f64;
        let rank_nullity = (d.z1 as f64 - d.b1 as f64 - d.h1 as f64).abs();
        Ok((1, (d.h1 as f64 - formula).abs() + rank_nullity + (d.b1 as f64 - (n * n - 1) as f64).abs()))
    });
    run.check("cocycle.basis_cocycle_law", tol.verification, |rng| {
        let mut worst: f64 = 0.0;
        let mut samples = 0;
        for chi in &basis.z1 {
            for _ in 0..100 {
                let u = random_word(&pr, rng.random_range(0..8), rng);
                let v = random_word(&pr, rng.random_range(0..8), rng);
                let (m, m_inv) = base.evaluate_with_inverse(&u);
                let law = chi.extend(&u.concat(&v)) - chi.extend(&u) - &m * chi.extend(&v) * &m_inv;
                worst = worst.max(law.norm());
                samples += 1;
            }
            worst = worst.max(chi.relator_residual());
        }
        Ok((samples, worst))
    });
    run.check("cocycle.coboundary_containment", tol.construction, |rng| {
        let jac = cocycle::constraint_matrix(base);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let v = linalg::ginibre(n, rng);
            let w = linalg::ginibre(n, rng);
            let dv = coboundary(&v, base)?;
            worst = worst.max((&jac * dv.flatten()).norm());
            let lin = coboundary(&(&v + &w * Complex64::new(2.0, -1.0)), base)?
                .try_sub(&dv.try_add(&coboundary(&w, base)?.scale(Complex64::new(2.0, -1.0)))?)?;
            worst = worst.max(lin.norm());
        }
        Ok((20, worst))
    });
    run.check("cocycle.fox_expansion", tol.construction, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let values = (0..pr.num_generators()).map(|_| linalg::ginibre(n, rng)).collect();
            let chi = Cocycle::new(base.clone(), values)?;
            let letters = chi.extend(&pr.full_relator());
            worst = worst.max((chi.relator_value_fox() - letters).norm());
        }
        Ok((20, worst))
    });
    if config.flavor == Flavor::Unitary {
        run.check("cocycle.star_involution", tol.construction, |rng| {
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                let chi = random_cocycle(basis, rng)?;
                let star = star_involution(&chi)?;
                worst = worst.max(star_involution(&star)?.try_sub(&chi)?.norm());
                worst = worst.max(star.relator_residual());
                let v = linalg::ginibre(n, rng);
                let lhs = star_involution(&coboundary(&v, base)?)?;
                worst = worst.max(lhs.try_sub(&coboundary(&v.adjoint(), base)?)?.norm());
            }
            Ok((20, worst))
        });
        run.check("cocycle.unitary_real_dimension", 0.0, |_| {
            let t = unitary_tangent(basis)?;
            let split = (t.z1_real_dim as f64 - (t.b1_real_dim + t.h1.len()) as f64).abs();
            let target = (t.h1.len() as f64 - basis.dims.h1 as f64).abs();
            Ok((1, split + target))
        });
    }
}

fn goldman_properties(run: &mut Runner, config: &RunConfig, basis: &CocycleBasis, beta_sign: f64) {
    let base = basis.base();
    let n = base.rank();
    let tol = config.tolerances;
    let omega = move |a: &Cocycle, b: &Cocycle| pairing_dual_signed(a, b, beta_sign);
    run.check("goldman.cup_dual_equivalence", tol.construction, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let c1 = random_cocycle(basis, rng)?;
            let c2 = random_cocycle(basis, rng)?;
            worst = worst.max((omega(&c1, &c2)? - pairing_cup(&c1, &c2)?).norm());
        }
        Ok((100, worst))
    });
    run.check("goldman.coboundary_invariance", tol.verification / 10.0, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let c1 = random_cocycle(basis, rng)?;
            let c2 = random_cocycle(basis, rng)?;
            let dv = coboundary(&linalg::ginibre(n, rng), base)?;
            let w = omega(&c1, &c2)?;
            worst = worst.max((omega(&c1.try_add(&dv)?, &c2)? - w).norm());
            worst = worst.max((omega(&c1, &c2.try_add(&dv)?)? - w).norm());
        }
        Ok((100, worst))
    });
    run.check("goldman.antisymmetry", tol.verification / 10.0, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let c1 = random_cocycle(basis, rng)?;
            let c2 = random_cocycle(basis, rng)?;
            worst = worst.max((omega(&c1, &c2)? + omega(&c2, &c1)?).norm());
        }
        Ok((100, worst))
    });
    run.check("goldman.bilinearity", tol.construction, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let (c1, c2, c3) = (random_cocycle(basis, rng)?, random_cocycle(basis, rng)?, random_cocycle(basis, rng)?);
            let (s, t) = (linalg::ginibre(1, rng)[(0, 0)], linalg::ginibre(1, rng)[(0, 0)]);
            let mix = c1.scale(s).try_add(&c3.scale(t))?;
            worst = worst.max((omega(&mix, &c2)? - s * omega(&c1, &c2)? - t * omega(&c3, &c2)?).norm());
            worst = worst.max((omega(&c2, &mix)? - s * omega(&c2, &c1)? - t * omega(&c2, &c3)?).norm());
        }
        Ok((20, worst))
    });
    run.check("goldman.conjugation_equivariance", tol.verification / 10.0, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let c1 = random_cocycle(basis, rng)?;
            let c2 = random_cocycle(basis, rng)?;
            let m = linalg::identity(n) + linalg::ginibre(n, rng) * Complex64::from(0.5);
            let moved = Arc::new(base.conjugated_by(&m)?);
            let d1 = c1.conjugated(moved.clone(), &m)?;
            let d2 = c2.conjugated(moved, &m)?;
            worst = worst.max((omega(&d1, &d2)? - omega(&c1, &c2)?).norm());
        }
        Ok((20, worst))
    });
    let gram_h1 = gram(basis, Space::H1);
    run.check("goldman.gram_skewness", tol.verification, |_| {
        let g = gram_h1.as_ref().map_err(clone_error)?;
        Ok((1, g.skewness))
    });
    run.check("goldman.h1_nondegenerate", 0.0, |_| {
        let g = gram_h1.as_ref().map_err(clone_error)?;
        Ok((1, (g.dim() - g.rank) as f64))
    });
    run.check("goldman.z1_rank_margin", 1e-3, |_| {
        let z = gram(basis, Space::Z1)?;
        let rank_gap = (z.rank as f64 - basis.dims.h1 as f64).abs();
        Ok((1, rank_gap + 1.0 / z.rank_margin()))
    });
    run.check("goldman.symplectic_basis", tol.verification, |_| {
        let g = gram_h1.as_ref().map_err(clone_error)?;
        let sb = symplectic_basis(g)?;
        let m = sb.e.len();
        let mut worst = sb.residual;
        for i in 0..m {
            for j in 0..m {
                let delta = if i == j { linalg::ONE } else { linalg::ZERO };
                worst = worst.max((omega(&sb.e[i], &sb.f[j])? - delta).norm());
            }
        }
        Ok((m * m, worst))
    });
    if config.flavor == Flavor::Unitary {
        run.check("goldman.unitary_reality", tol.construction, |_| {
            let t = unitary_tangent(basis)?;
            let report = unitary_restriction_check(&t.h1)?;
            let degenerate = if report.nondegenerate { 0.0 } else { f64::INFINITY };
            Ok((report.pairs, report.max_imaginary + degenerate))
        });
    }
    run.check("goldman.parallel_matches_serial", 0.0, |_| {
        let serial = gram_of(&basis.z1, false)?;
        let parallel = gram_of(&basis.z1, true)?;
        Ok((serial.len(), count_bool(serial == parallel)))
    });
}

fn clone_error(e: &crate::Error) -> crate::Error {
    crate::Error::InvalidInput(e.to_string())
}

fn unit_class(basis: &CocycleBasis, rng: &mut ChaCha8Rng) -> Result<Cocycle> {
    let coeffs: Vec<Complex64> = (0..basis.h1.len()).map(|_| linalg::ginibre(1, rng)[(0, 0)]).collect();
    let c = Cocycle::combination(basis.base().clone(), &coeffs, &basis.h1)?;
    Ok(c.scale(Complex64::from(1.0 / c.norm())))
}

/// A unit direction tangent to the flavor's character variety.
fn unit_direction(basis: &CocycleBasis, rng: &mut ChaCha8Rng) -> Result<Cocycle> {
    match basis.base().flavor() {
        Flavor::GeneralLinear => unit_class(basis, rng),
        Flavor::Unitary => {
            let frame = unitary_tangent(basis)?.h1;
            let coeffs: Vec<Complex64> = frame.iter().map(|_| Complex64::from(rng.random_range(-1.0..1.0))).collect();
            let c = Cocycle::combination(basis.base().clone(), &coeffs, &frame)?;
            Ok(c.scale(Complex64::from(1.0 / c.norm())))
        }
    }
}

fn chart_properties(run: &mut Runner, config: &RunConfig, basis: &CocycleBasis) {
    let base = basis.base().clone();
    let pr = *base.presentation();
    let tol = config.tolerances;
    run.check("chart.deform_correction_order", 0.25, |rng| {
        let chi = unit_direction(basis, rng)?;
        let steps = [1e-2, 1e-3, 1e-4];
        let mut corrections = Vec::new();
        for &t in &steps {
            let d = deform(&base, &chi, t)?;
            if d.rep.relator_defect() > tol.construction {
                return Ok((steps.len(), f64::INFINITY));
            }
            corrections.push(d.correction_norm);
        }
        let worst = convergence_orders(&steps, &corrections).into_iter().map(|o| (o - 2.0).abs()).fold(0.0, f64::max);
        Ok((steps.len(), worst))
    });
    run.check("chart.rh_round_trip", tol.finite_difference / 10.0, |rng| {
        let chi = unit_direction(basis, rng)?;
        let recovered = rh_differential(&DeformationCurve::along(&chi), 1e-4)?;
        Ok((1, basis.class_distance(&recovered, &chi)?))
    });
    run.check("chart.rh_round_trip_order", 0.5, |rng| {
        let chi = unit_direction(basis, rng)?;
        let curve = DeformationCurve::along(&chi);
        let errors = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
            .iter()
            .map(|&h| basis.class_distance(&rh_differential(&curve, h)?, &chi))
            .collect::<Result<Vec<_>>>()?;
        let worst = convergence_ratios(&errors).into_iter().map(|r| (r - 4.0).abs()).fold(0.0, f64::max);
        Ok((errors.len(), worst))
    });
    run.check("chart.rh_cocycle_law_order", 0.5, |rng| {
        let chi = unit_direction(basis, rng)?;
        let curve = DeformationCurve::along(&chi);
        let pairs: Vec<(Word, Word)> = (0..50)
            .map(|_| {
                let u = random_word(&pr, rng.random_range(1..6), rng);
                let v = random_word(&pr, rng.random_range(1..6), rng);
                (u, v)
            })
            .collect();
        let mut words = Vec::with_capacity(150);
        for (u, v) in &pairs {
            words.extend([u.clone(), v.clone(), u.concat(v)]);
        }
        let law = |h: f64| -> Result<f64> {
            let vals = rh_word_values(&curve, h, &words)?;
            let mut worst: f64 = 0.0;
            for (i, (u, _)) in pairs.iter().enumerate() {
                let (m, m_inv) = base.evaluate_with_inverse(u);
                let r = &vals[3 * i + 2] - &vals[3 * i] - &m * &vals[3 * i + 1] * &m_inv;
                worst = worst.max(r.norm());
            }
            Ok(worst)
        };
        let (coarse, fine) = (law(2e-2)?, law(1e-2)?);
        Ok((pairs.len(), (coarse / fine - 4.0).abs()))
    });
    let chart = Chart::from_basis(basis);
    run.check("chart.closedness", tol.finite_difference, |_| {
        let chart = chart.as_ref().map_err(clone_error)?;
        if chart.dim() < 3 {
            return Ok((0, 0.0));
        }
        Ok((1, closedness_check(chart, (0, 1, 2), 1e-3)?.residual))
    });
    run.check("chart.closedness_order", 0.5, |_| {
        let chart = chart.as_ref().map_err(clone_error)?;
        if chart.dim() < 3 || config.rank == 1 {
            return Ok((0, 0.0));
        }
        let steps = [8e-3, 4e-3, 2e-3];
        let residuals = steps
            .iter()
            .map(|&h| Ok(closedness_check(chart, (0, 1, 2), h)?.residual))
            .collect::<Result<Vec<_>>>()?;
        let worst = convergence_orders(&steps, &residuals).into_iter().map(|o| (o - 2.0).abs()).fold(0.0, f64::max);
        Ok((steps.len(), worst))
    });
    run.check("chart.commuting_flows", 10.0, |rng| {
        let chi = unit_direction(basis, rng)?;
        let psi = unit_direction(basis, rng)?;
        let mut worst: f64 = 0.0;
        for t in [1e-2, 5e-3] {
            let one = Arc::new(deform(&base, &chi, t)?.rep);
            let one = deform(&one, &psi.rebased(one.clone())?, t)?.rep;
            let two = Arc::new(deform(&base, &psi, t)?.rep);
            let two = deform(&two, &chi.rebased(two.clone())?, t)?.rep;
            worst = worst.max(class_separation(basis, &one, &two)? / (t * t));
        }
        Ok((2, worst))
    });
    run.check("chart.irreducible_points", 0.0, |rng| {
        let chart = chart.as_ref().map_err(clone_error)?;
        let mut bad = 0.0;
        for _ in 0..5 {
            let eps: Vec<f64> = (0..chart.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = eps.iter().map(|e| e * e).sum::<f64>().sqrt();
            let eps: Vec<f64> = eps.iter().map(|e| 0.05 * e / norm).collect();
            let p = chart.point(&eps)?;
            bad += count_bool(commutant_dimension(&p)? == 1 && p.relator_defect() <= tol.construction);
        }
        Ok((5, bad))
    });
}

/// Runs the suite. Errors are returned only when the base representation
/// itself cannot be built; property-level errors are reported as failures.
pub fn run(config: &RunConfig, mutation: Mutation) -> Result<Report> {
    config.validate()?;
    let pr = Presentation::new(config.genus)?;
    let mut runner = Runner { seed: config.seed, results: Vec::new() };
    word_properties(&mut runner, pr);
    if config.genus >= 2 {
        let base = Arc::new(random_representation(config.genus, config.rank, config.flavor, config.seed)?);
        rep_properties(&mut runner, config, &base);
        match cocycle_basis(&base) {
            Ok(basis) => {
                let beta_sign = match mutation {
                    Mutation::None => 1.0,
                    Mutation::DualSign => -1.0,
                };
                cocycle_properties(&mut runner, config, &basis);
                goldman_properties(&mut runner, config, &basis, beta_sign);
                chart_properties(&mut runner, config, &basis);
            }
            Err(_) => runner.check("cocycle.basis", 0.0, |_| Ok((0, f64::INFINITY))),
        }
    }
    Ok(Report { config: config.clone(), mutation, results: runner.results })
}
