//! Deformation curves, the finite-difference differential of the holonomy
//! map, and a finite-difference test that the Goldman form is closed.
//!
//! A chart around `σ` sends real coordinates `ε` to the representation
//! obtained from `exp(Σ ε_i χ_i(x))·σ(x)` by Newton projection. Tangent
//! vectors are recovered by central differences divided on the right:
//! `χ(x) ≈ [σ_{+h}(x) − σ_{−h}(x)]/(2h) · σ(x)⁻¹`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::cocycle::{unitary_tangent, Cocycle, CocycleBasis};
use crate::error::{Error, Result};
use crate::goldman::pairing_dual;
use crate::linalg::{self, CMat};
use crate::rep::{newton_project_to, Flavor, NewtonReport, Representation};
use crate::word::Word;

/// `|t|·‖χ‖` may not exceed this in [`deform`].
pub const TRUST_RADIUS: f64 = 0.1;
/// Smallest admissible finite-difference step.
pub const MIN_STEP: f64 = 1e-9;
/// Admissible range of the outer step in [`closedness_check`].
pub const CLOSEDNESS_STEPS: (f64, f64) = (1e-4, 1e-2);

/// The right-division convention used for tangent cocycles.
pub const CONVENTION: &str = "chi(x) = d/dt sigma_t(x) sigma(x)^-1";

#[derive(Clone, Debug)]
pub struct Deformation {
    pub rep: Representation,
    /// Frobenius distance between `exp(tχ)σ` and the projected images.
    pub correction_norm: f64,
    pub newton: NewtonReport,
}

fn check_base(sigma: &Representation, chi: &Cocycle) -> Result<()> {
    if **chi.base() == *sigma {
        Ok(())
    } else {
        Err(Error::BaseMismatch("direction is not a cocycle over the deformed representation".into()))
    }
}

/// `exp(t·χ(x))·σ(x)` followed by Newton projection onto the relator variety.
pub fn deform(sigma: &Representation, chi: &Cocycle, t: f64) -> Result<Deformation> {
    check_base(sigma, chi)?;
    let reach = t.abs() * chi.norm();
    if reach > TRUST_RADIUS {
        let max = if chi.norm() > 0.0 { TRUST_RADIUS / chi.norm() } else { f64::INFINITY };
        return Err(Error::Step { step: t, min: -max, max });
    }
    if t == 0.0 {
        let newton = NewtonReport {
            iterations: 0,
            initial_defect: sigma.relator_defect(),
            final_defect: sigma.relator_defect(),
            correction_norm: 0.0,
        };
        return Ok(Deformation { rep: sigma.clone(), correction_norm: 0.0, newton });
    }
    let images: Vec<CMat> = sigma
        .images()
        .iter()
        .zip(chi.values())
        .map(|(s, v)| (v * Complex64::from(t)).exp() * s)
        .collect();
    let (rep, newton) = newton_project_to(*sigma.presentation(), sigma.flavor(), images, sigma.seed(), 0.0)?;
    Ok(Deformation { correction_norm: newton.correction_norm, rep, newton })
}

type Evaluator = Box<dyn Fn(f64) -> Result<Representation> + Send + Sync>;

/// A curve `t ↦ σ_t` of representations through `center` at `t = 0`.
pub struct DeformationCurve {
    center: Arc<Representation>,
    direction: Option<Cocycle>,
    /// Largest admissible `|t|`.
    trust: f64,
    evaluator: Evaluator,
}

impl fmt::Debug for DeformationCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DeformationCurve")
            .field("trust", &self.trust)
            .field("has_direction", &self.direction.is_some())
            .finish()
    }
}

impl DeformationCurve {
    pub fn new(
        center: Arc<Representation>,
        trust: f64,
        evaluator: impl Fn(f64) -> Result<Representation> + Send + Sync + 'static,
    ) -> Self {
        DeformationCurve { center, direction: None, trust, evaluator: Box::new(evaluator) }
    }

    /// `t ↦ deform(σ, χ, t)` with `σ` the base of `χ`.
    pub fn along(chi: &Cocycle) -> Self {
        let center = chi.base().clone();
        let trust = if chi.norm() > 0.0 { TRUST_RADIUS / chi.norm() } else { f64::INFINITY };
        let c = chi.clone();
        let sigma = center.clone();
        DeformationCurve {
            center,
            direction: Some(chi.clone()),
            trust,
            evaluator: Box::new(move |t| Ok(deform(&sigma, &c, t)?.rep)),
        }
    }

    /// `t ↦ exp(tv)·σ·exp(−tv)`.
    pub fn conjugation(center: Arc<Representation>, v: &CMat) -> Self {
        let trust = if v.norm() > 0.0 { TRUST_RADIUS / v.norm() } else { f64::INFINITY };
        let sigma = center.clone();
        let v = v.clone();
        DeformationCurve::new(center, trust, move |t| sigma.conjugated_by(&(&v * Complex64::from(t)).exp()))
    }

    pub fn constant(center: Arc<Representation>) -> Self {
        let sigma = center.clone();
        DeformationCurve::new(center, f64::INFINITY, move |_| Ok((*sigma).clone()))
    }

    pub fn center(&self) -> &Arc<Representation> {
        &self.center
    }

    pub fn direction(&self) -> Option<&Cocycle> {
        self.direction.as_ref()
    }

    pub fn trust(&self) -> f64 {
        self.trust
    }

    pub fn at(&self, t: f64) -> Result<Representation> {
        if t == 0.0 {
            return Ok((*self.center).clone());
        }
        (self.evaluator)(t)
    }
}

/// Central-difference tangent cocycle of a curve at `t = 0`.
pub fn rh_differential(curve: &DeformationCurve, h: f64) -> Result<Cocycle> {
    if !(h >= MIN_STEP && h <= curve.trust) {
        return Err(Error::Step { step: h, min: MIN_STEP, max: curve.trust });
    }
    let plus = curve.at(h)?;
    let minus = curve.at(-h)?;
    let scale = Complex64::from(0.5 / h);
    let values = plus
        .images()
        .iter()
        .zip(minus.images())
        .zip(curve.center.inverses())
        .map(|((p, m), s_inv)| (p - m) * s_inv * scale)
        .collect();
    Cocycle::new(curve.center.clone(), values)
}

/// `[σ_{+h}(w) − σ_{−h}(w)]/(2h) · σ(w)⁻¹` on whole words, computed from the
/// curve directly rather than through the cocycle extension.
pub fn rh_word_values(curve: &DeformationCurve, h: f64, words: &[Word]) -> Result<Vec<CMat>> {
    if !(h >= MIN_STEP && h <= curve.trust) {
        return Err(Error::Step { step: h, min: MIN_STEP, max: curve.trust });
    }
    let plus = curve.at(h)?;
    let minus = curve.at(-h)?;
    let scale = Complex64::from(0.5 / h);
    Ok(words
        .iter()
        .map(|w| {
            let (_, s_inv) = curve.center.evaluate_with_inverse(w);
            (plus.evaluate(w) - minus.evaluate(w)) * s_inv * scale
        })
        .collect())
}

/// Coordinates `ε ∈ ℝ^d` around a representation along a fixed frame of
/// cocycles.
#[derive(Clone, Debug)]
pub struct Chart {
    center: Arc<Representation>,
    frame: Vec<Cocycle>,
}

impl Chart {
    pub fn new(center: Arc<Representation>, frame: Vec<Cocycle>) -> Result<Self> {
        if frame.is_empty() {
            return Err(Error::InvalidInput("chart frame is empty".into()));
        }
        for f in &frame {
            check_base(&center, f)?;
        }
        Ok(Chart { center, frame })
    }

    /// Chart along the H¹ complement of a cocycle basis. Over a unitary base
    /// the frame is the u(n)-valued one, so chart points stay unitary.
    pub fn from_basis(basis: &CocycleBasis) -> Result<Self> {
        let frame = match basis.base().flavor() {
            Flavor::Unitary => unitary_tangent(basis)?.h1,
            Flavor::GeneralLinear => basis.h1.clone(),
        };
        Chart::new(basis.base().clone(), frame)
    }

    pub fn center(&self) -> &Arc<Representation> {
        &self.center
    }

    pub fn frame(&self) -> &[Cocycle] {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    fn direction(&self, eps: &[f64]) -> Result<Cocycle> {
        if eps.len() != self.frame.len() {
            return Err(Error::InvalidInput(format!(
                "chart has {} coordinates, got {}",
                self.frame.len(),
                eps.len()
            )));
        }
        let coeffs: Vec<Complex64> = eps.iter().map(|&e| Complex64::from(e)).collect();
        Cocycle::combination(self.center.clone(), &coeffs, &self.frame)
    }

    pub fn point(&self, eps: &[f64]) -> Result<Representation> {
        let dir = self.direction(eps)?;
        if eps.iter().all(|&e| e == 0.0) {
            return Ok((*self.center).clone());
        }
        Ok(deform(&self.center, &dir, 1.0)?.rep)
    }

    /// Image of the coordinate vector `∂/∂ε_a` at `ε`, as a cocycle over the
    /// chart point.
    pub fn tangent(&self, eps: &[f64], a: usize, h: f64) -> Result<Cocycle> {
        let at = Arc::new(self.point(eps)?);
        self.tangent_at(eps, at, a, h)
    }

    fn tangent_at(&self, eps: &[f64], at: Arc<Representation>, a: usize, h: f64) -> Result<Cocycle> {
        if a >= self.frame.len() {
            return Err(Error::InvalidInput(format!("coordinate {a} outside the chart")));
        }
        let chart = self.clone();
        let eps = eps.to_vec();
        let trust = TRUST_RADIUS / self.frame[a].norm().max(f64::MIN_POSITIVE);
        let curve = DeformationCurve::new(at, trust, move |s| {
            let mut e = eps.clone();
            e[a] += s;
            chart.point(&e)
        });
        rh_differential(&curve, h)
    }

    /// `ω(∂_a, ∂_b)` at the chart point `ε`.
    pub fn omega(&self, eps: &[f64], a: usize, b: usize, h: f64) -> Result<Complex64> {
        let at = Arc::new(self.point(eps)?);
        let ta = self.tangent_at(eps, at.clone(), a, h)?;
        let tb = self.tangent_at(eps, at, b, h)?;
        pairing_dual(&ta, &tb)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Closedness {
    pub triple: (usize, usize, usize),
    pub h: f64,
    pub value: Complex64,
    /// `|dω_ijk|`.
    pub residual: f64,
}

/// Central-difference `dω_ijk = ∂_i ω_jk − ∂_j ω_ik + ∂_k ω_ij` at the chart
/// center. Tangents are recovered with the same step `h`.
pub fn closedness_check(chart: &Chart, triple: (usize, usize, usize), h: f64) -> Result<Closedness> {
    let (i, j, k) = triple;
    let d = chart.dim();
    if i >= d || j >= d || k >= d {
        return Err(Error::InvalidInput(format!("triple {triple:?} outside a {d}-dimensional chart")));
    }
    let (lo, hi) = CLOSEDNESS_STEPS;
    if !(h >= lo && h <= hi) {
        return Err(Error::Step { step: h, min: lo, max: hi });
    }
    if i == j || j == k || i == k {
        return Ok(Closedness { triple, h, value: linalg::ZERO, residual: 0.0 });
    }
    let derivative = |along: usize, a: usize, b: usize| -> Result<Complex64> {
        let mut plus = vec![0.0; d];
        plus[along] = h;
        let mut minus = vec![0.0; d];
        minus[along] = -h;
        Ok((chart.omega(&plus, a, b, h)? - chart.omega(&minus, a, b, h)?) / Complex64::from(2.0 * h))
    };
    let value = derivative(i, j, k)? - derivative(j, i, k)? + derivative(k, i, j)?;
    Ok(Closedness { triple, h, value, residual: value.norm() })
}

/// Observed orders `log(e_i/e_{i+1}) / log(h_i/h_{i+1})` of a convergence
/// sequence.
pub fn convergence_orders(steps: &[f64], errors: &[f64]) -> Vec<f64> {
    steps
        .windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

/// Successive ratios `e_i / e_{i+1}`.
pub fn convergence_ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|e| e[0] / e[1]).collect()
}

/// Norm modulo B¹ of `(ρ₁(x) − ρ₂(x))·σ(x)⁻¹`, a first-order comparison of
/// two representations near the basis center `σ`.
pub fn class_separation(basis: &CocycleBasis, rho1: &Representation, rho2: &Representation) -> Result<f64> {
    let center = basis.base();
    let values = rho1
        .images()
        .iter()
        .zip(rho2.images())
        .zip(center.inverses())
        .map(|((a, b), s_inv)| (a - b) * s_inv)
        .collect();
    let diff = Cocycle::new(center.clone(), values)?;
    Ok(basis.class_component(&diff)?.norm())
}
