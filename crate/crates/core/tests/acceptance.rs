//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits nonzero if any fails.

use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use surface_goldman::chart::{
    closedness_check, convergence_orders, convergence_ratios, rh_differential, Chart, DeformationCurve,
};
use surface_goldman::cocycle::{
    anti_hermitian_part, coboundary, cocycle_basis, expected_h1_dimension, unitary_tangent, Cocycle, CocycleBasis,
};
use surface_goldman::config::{Mutation, RunConfig};
use surface_goldman::goldman::{
    gram, gram_of, pairing_cup, pairing_dual, unitary_restriction_check, Space,
};
use surface_goldman::linalg::{self, CMat};
use surface_goldman::rep::{
    commutant_dimension, commutator_factor, random_representation, Flavor, Representation,
};
use surface_goldman::verify;
use surface_goldman::word::{Generator, Presentation};

const GENERA: [usize; 2] = [2, 3];
const RANKS: [usize; 3] = [1, 2, 3];
const FLAVORS: [Flavor; 2] = [Flavor::Unitary, Flavor::GeneralLinear];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn grid() -> impl Iterator<Item = (usize, usize, Flavor)> {
    GENERA
        .into_iter()
        .flat_map(|g| RANKS.into_iter().flat_map(move |n| FLAVORS.into_iter().map(move |f| (g, n, f))))
}

fn basis_for(g: usize, n: usize, flavor: Flavor, seed: u64) -> CocycleBasis {
    let rep = random_representation(g, n, flavor, seed).expect("seeded representation");
    cocycle_basis(&Arc::new(rep)).expect("cocycle basis")
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_cocycle(basis: &CocycleBasis, rng: &mut ChaCha8Rng) -> Cocycle {
    let coeffs: Vec<Complex64> = basis.z1.iter().map(|_| random_complex(rng)).collect();
    Cocycle::combination(basis.base().clone(), &coeffs, &basis.z1).unwrap()
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(n, n, |_, _| random_complex(rng))
}

fn timed(limit: Option<Duration>, body: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = body();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        o.passed &= elapsed < limit;
        o.detail = format!("{} elapsed={:.2}s limit={}s", o.detail, elapsed.as_secs_f64(), limit.as_secs());
    }
    o
}

fn dimension_formula() -> Outcome {
    let mut bad = Vec::new();
    let mut count = 0;
    for (g, n, flavor) in grid() {
        let b = basis_for(g, n, flavor, 0);
        let irreducible = commutant_dimension(b.base()).unwrap() == 1;
        count += 1;
        if !irreducible || b.dims.h1 != expected_h1_dimension(g, n) || b.dims.z1 != b.dims.b1 + b.dims.h1 {
            bad.push(format!("g={g} n={n} {flavor} H1={}", b.dims.h1));
        }
    }
    outcome(bad.is_empty(), format!("sizes={count} mismatches={bad:?}"))
}

fn dual_vs_cup() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for (g, n, flavor) in grid() {
        let b = basis_for(g, n, flavor, 1);
        for _ in 0..30 {
            let (c1, c2) = (random_cocycle(&b, &mut rng), random_cocycle(&b, &mut rng));
            worst = worst.max((pairing_dual(&c1, &c2).unwrap() - pairing_cup(&c1, &c2).unwrap()).norm());
            pairs += 1;
        }
    }
    outcome(pairs >= 300 && worst < 1e-10, format!("pairs={pairs} max_diff={worst:.3e} threshold=1e-10"))
}

fn class_well_defined() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut shift, mut anti): (f64, f64) = (0.0, 0.0);
    let mut sizes = 0;
    for (g, n, flavor) in grid() {
        let b = basis_for(g, n, flavor, 2);
        sizes += 1;
        for _ in 0..100 {
            let (c1, c2) = (random_cocycle(&b, &mut rng), random_cocycle(&b, &mut rng));
            let w = pairing_dual(&c1, &c2).unwrap();
            let dv = coboundary(&random_matrix(n, &mut rng), b.base()).unwrap();
            let dw = coboundary(&random_matrix(n, &mut rng), b.base()).unwrap();
            shift = shift.max((pairing_dual(&c1.try_add(&dv).unwrap(), &c2).unwrap() - w).norm());
            shift = shift.max((pairing_dual(&c1, &c2.try_add(&dw).unwrap()).unwrap() - w).norm());
            anti = anti.max((w + pairing_dual(&c2, &c1).unwrap()).norm());
        }
    }
    outcome(
        shift < 1e-9 && anti < 1e-9,
        format!("sizes={sizes} trials_per_size=100 max_shift={shift:.3e} max_antisym={anti:.3e} threshold=1e-9"),
    )
}

fn nondegeneracy() -> Outcome {
    let mut bad = Vec::new();
    let mut min_margin = f64::INFINITY;
    let mut count = 0;
    for (g, n, flavor) in grid() {
        for seed in 0..2 {
            let b = basis_for(g, n, flavor, seed);
            let h = gram(&b, Space::H1).unwrap();
            let z = gram(&b, Space::Z1).unwrap();
            let margin = z.rank_margin();
            min_margin = min_margin.min(margin);
            count += 1;
            if h.rank != b.dims.h1 || z.rank != b.dims.h1 || margin < 1e3 {
                bad.push(format!("g={g} n={n} {flavor} seed={seed} rank={} margin={margin:.2e}", h.rank));
            }
        }
    }
    outcome(bad.is_empty(), format!("cases={count} min_margin={min_margin:.3e} failures={bad:?}"))
}

/// `Σ_k u(a_k)v(b_k) − u(b_k)v(a_k)` on the indicator of each generator.
fn intersection_form(g: usize) -> Vec<Vec<f64>> {
    let slots: Vec<Generator> = (1..=g).flat_map(|k| [Generator::A(k), Generator::B(k)]).collect();
    let ind = |x: Generator, y: Generator| if x == y { 1.0 } else { 0.0 };
    slots
        .iter()
        .map(|&x| {
            slots
                .iter()
                .map(|&y| {
                    (1..=g)
                        .map(|k| {
                            let (a, b) = (Generator::A(k), Generator::B(k));
                            ind(x, a) * ind(y, b) - ind(x, b) * ind(y, a)
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

fn abelian_specialization() -> Outcome {
    let mut worst: f64 = 0.0;
    for g in GENERA {
        let pr = Presentation::new(g).unwrap();
        let base = Arc::new(Representation::trivial(pr, 1));
        let indicators: Vec<Cocycle> = pr
            .generators()
            .map(|x| Cocycle::indicator(base.clone(), x, linalg::identity(1)).unwrap())
            .collect();
        let m = gram_of(&indicators, false).unwrap();
        let oracle = intersection_form(g);
        for (i, row) in oracle.iter().enumerate() {
            for (j, &expected) in row.iter().enumerate() {
                worst = worst.max((m[(i, j)] - Complex64::from(expected)).norm());
            }
        }
    }
    outcome(worst < 1e-12, format!("genera={GENERA:?} max_entry_error={worst:.3e} threshold=1e-12"))
}

fn unit_frame(b: &CocycleBasis) -> Vec<Cocycle> {
    let frame = match b.base().flavor() {
        Flavor::Unitary => unitary_tangent(b).unwrap().h1,
        Flavor::GeneralLinear => b.h1.clone(),
    };
    frame.into_iter().map(|c| c.scale(Complex64::from(1.0 / c.norm()))).collect()
}

fn rh_round_trip() -> Outcome {
    let steps = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let mut ratios_seen = Vec::new();
    let mut bad = 0;
    for (g, n, flavor) in [(2, 2, Flavor::Unitary), (2, 2, Flavor::GeneralLinear), (3, 2, Flavor::Unitary)] {
        let b = basis_for(g, n, flavor, 0);
        for chi in unit_frame(&b).iter().take(3) {
            let curve = DeformationCurve::along(chi);
            let errors: Vec<f64> = steps
                .iter()
                .map(|&h| b.class_distance(&rh_differential(&curve, h).unwrap(), chi).unwrap())
                .collect();
            for r in convergence_ratios(&errors) {
                if !(3.5..=4.5).contains(&r) {
                    bad += 1;
                }
                ratios_seen.push(r);
            }
        }
    }
    let lo = ratios_seen.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios_seen.iter().copied().fold(0.0, f64::max);
    outcome(bad == 0, format!("ratios={} range=[{lo:.4}, {hi:.4}] allowed=[3.5, 4.5]", ratios_seen.len()))
}

fn closedness() -> Outcome {
    let steps = [4e-3, 2e-3, 1e-3];
    let mut worst_fine: f64 = 0.0;
    let mut orders = Vec::new();
    for flavor in FLAVORS {
        let chart = Chart::from_basis(&basis_for(2, 2, flavor, 0)).unwrap();
        for triple in [(0, 1, 2), (0, 3, 7), (2, 5, 9)] {
            let r: Vec<f64> =
                steps.iter().map(|&h| closedness_check(&chart, triple, h).unwrap().residual).collect();
            worst_fine = worst_fine.max(r[2]);
            orders.extend(convergence_orders(&steps, &r));
        }
    }
    let mut abelian: f64 = 0.0;
    for flavor in FLAVORS {
        let chart = Chart::from_basis(&basis_for(2, 1, flavor, 0)).unwrap();
        for triple in [(0, 1, 2), (1, 2, 3)] {
            abelian = abelian.max(closedness_check(&chart, triple, 1e-3).unwrap().residual);
        }
    }
    let lo = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = orders.iter().copied().fold(0.0, f64::max);
    outcome(
        (1.5..=2.5).contains(&lo) && (1.5..=2.5).contains(&hi) && worst_fine < 1e-4 && abelian < 1e-10,
        format!("orders=[{lo:.3}, {hi:.3}] residual_at_1e-3={worst_fine:.3e} abelian={abelian:.3e}"),
    )
}

fn unitary_locus() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut imaginary: f64 = 0.0;
    let mut degenerate = Vec::new();
    let mut pairs = 0;
    for g in GENERA {
        for n in RANKS {
            let b = basis_for(g, n, Flavor::Unitary, 0);
            let report = unitary_restriction_check(&unitary_tangent(&b).unwrap().h1).unwrap();
            imaginary = imaginary.max(report.max_imaginary);
            pairs += report.pairs;
            if !report.nondegenerate || report.real_rank != b.dims.h1 {
                degenerate.push(format!("g={g} n={n}"));
            }
            // arbitrary u(n)-valued cocycles, coboundary parts included
            let ah: Vec<Cocycle> =
                (0..6).map(|_| anti_hermitian_part(&random_cocycle(&b, &mut rng)).unwrap()).collect();
            for c1 in &ah {
                for c2 in &ah {
                    imaginary = imaginary.max(pairing_dual(c1, c2).unwrap().im.abs());
                    pairs += 1;
                }
            }
        }
    }
    outcome(
        imaginary < 1e-10 && degenerate.is_empty(),
        format!("pairs={pairs} max_imaginary={imaginary:.3e} threshold=1e-10 degenerate={degenerate:?}"),
    )
}

fn construction_quality() -> Outcome {
    let mut defect: f64 = 0.0;
    let mut reducible = Vec::new();
    let mut reps = 0;
    for g in GENERA {
        for n in 1..=4 {
            for flavor in FLAVORS {
                for seed in 0..3 {
                    let rep = random_representation(g, n, flavor, seed).unwrap();
                    defect = defect.max(rep.relator_defect());
                    if commutant_dimension(&rep).unwrap() != 1 {
                        reducible.push(format!("g={g} n={n} {flavor} seed={seed}"));
                    }
                    reps += 1;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut factor: f64 = 0.0;
    let mut draws = 0;
    for flavor in FLAVORS {
        for i in 0..100 {
            let n = 1 + i % 4;
            let u = match flavor {
                Flavor::Unitary => {
                    let h = linalg::haar_unitary(n, &mut rng);
                    &h / linalg::nth_root(h.determinant(), n)
                }
                Flavor::GeneralLinear => {
                    let x = random_matrix(n, &mut rng);
                    let x = &x - linalg::identity(n) * (x.trace() / Complex64::from(n as f64));
                    x.exp()
                }
            };
            let (a, b) = commutator_factor(&u, flavor).unwrap();
            let comm = &a * &b * a.clone().try_inverse().unwrap() * b.clone().try_inverse().unwrap();
            factor = factor.max((comm - &u).norm());
            draws += 1;
        }
    }
    outcome(
        defect <= 1e-12 && reducible.is_empty() && factor < 1e-10,
        format!(
            "reps={reps} max_defect={defect:.3e} reducible={reducible:?} factor_draws={draws} max_factor_error={factor:.3e}"
        ),
    )
}

fn reproducibility() -> Outcome {
    let mut identical = true;
    let mut runs = 0;
    for flavor in FLAVORS {
        let config = RunConfig { flavor, ..RunConfig::default() };
        let first = verify::run(&config, Mutation::None).unwrap().to_string();
        let second = verify::run(&config, Mutation::None).unwrap().to_string();
        identical &= first == second;
        runs += 2;
    }
    let cli = || {
        Command::new(env!("CARGO_BIN_EXE_goldman"))
            .args(["verify", "--genus", "2", "--rank", "2", "--seed", "0"])
            .output()
            .expect("run goldman")
    };
    let (a, b) = (cli(), cli());
    identical &= a.stdout == b.stdout && !a.stdout.is_empty();
    runs += 2;
    outcome(identical, format!("runs={runs} byte_identical={identical}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Option<u64>, fn() -> Outcome); 10] = [
        ("dimension_formula", Some(10), dimension_formula),
        ("dual_vs_cup", Some(30), dual_vs_cup),
        ("class_well_defined", None, class_well_defined),
        ("nondegeneracy", None, nondegeneracy),
        ("abelian_intersection_form", None, abelian_specialization),
        ("rh_round_trip", None, rh_round_trip),
        ("closedness", Some(120), closedness),
        ("unitary_locus", None, unitary_locus),
        ("construction_quality", None, construction_quality),
        ("reproducibility", None, reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, limit, body)) in criteria.iter().enumerate() {
        let o = timed(limit.map(Duration::from_secs), body);
        if !o.passed {
            failed += 1;
        }
        println!("criterion {:>2} {name}: {} {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: passed={} failed={failed}", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
