//! `goldman`: command-line front end.
//!
//! Exit statuses: 0 success, 1 property failure, 2 input or schema error,
//! 3 numerical conditioning.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use surface_goldman::chart::{
    closedness_check, convergence_orders, convergence_ratios, deform, rh_differential, Chart, DeformationCurve,
    CONVENTION,
};
use surface_goldman::cocycle::{cocycle_basis, expected_h1_dimension, unitary_tangent, Cocycle, CocycleBasis};
use surface_goldman::config::{Mutation, RunConfig, Tolerances};
use surface_goldman::goldman::{symplectic_basis, GoldmanGram, Space};
use surface_goldman::io::{self, format_float, MatrixFile};
use surface_goldman::rep::{is_irreducible, random_representation, Flavor, Representation};
use surface_goldman::word::Presentation;
use surface_goldman::{verify, Error, Result};

#[derive(Parser, Debug)]
#[command(name = "goldman", version, about = "Goldman symplectic form on surface-group character varieties")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    #[arg(long, global = true, default_value_t = 2)]
    genus: usize,
    #[arg(long, global = true, default_value_t = 2)]
    rank: usize,
    #[arg(long, global = true, default_value = "unitary")]
    flavor: Flavor,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance override `key=value`; keys: construction, verification, finite-difference.
    #[arg(long = "tol", global = true, value_name = "KEY=VALUE")]
    tol: Vec<String>,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    parallel: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SpaceArg {
    Z1,
    H1,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dimensions of Z¹, B¹ and H¹ against the closed formula.
    Dims {
        /// Use the trivial representation instead of a random one.
        #[arg(long)]
        trivial: bool,
        #[arg(long)]
        rep: Option<PathBuf>,
    },
    /// Samples a representation and writes it.
    RandomRep,
    /// Writes a representation and an H¹ basis of cocycles into `--out`.
    CocycleBasis {
        #[arg(long)]
        rep: Option<PathBuf>,
    },
    /// Gram matrix of the pairing on given cocycle files, or on a generated basis.
    Gram {
        #[arg(long)]
        rep: Option<PathBuf>,
        #[arg(long, value_enum, conflicts_with = "cocycles")]
        space: Option<SpaceArg>,
        cocycles: Vec<PathBuf>,
    },
    /// Symplectic basis of the pairing, written into `--out`.
    SymplecticBasis {
        #[arg(long)]
        rep: Option<PathBuf>,
        cocycles: Vec<PathBuf>,
    },
    /// Deformation along a cocycle and the finite-difference round trip.
    Deform {
        #[arg(long)]
        rep: Option<PathBuf>,
        /// Direction; defaults to the first chart frame vector.
        #[arg(long)]
        cocycle: Option<PathBuf>,
    },
    /// Finite-difference closedness of the pairing in a chart.
    Closedness {
        #[arg(long)]
        rep: Option<PathBuf>,
        /// Chart indices `i,j,k`.
        #[arg(long, default_value = "0,1,2")]
        triple: String,
        /// Finest outer step; the report also uses 2h and 4h.
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
    },
    /// Runs the property suite.
    Verify {
        #[arg(long, default_value = "none")]
        mutate: Mutation,
    },
}

fn config_of(global: &Global) -> Result<RunConfig> {
    let mut tolerances = Tolerances::default();
    for t in &global.tol {
        tolerances.apply(t)?;
    }
    let config = RunConfig {
        genus: global.genus,
        rank: global.rank,
        flavor: global.flavor,
        seed: global.seed,
        tolerances,
        out: global.out.clone(),
        parallel: global.parallel,
    };
    config.validate()?;
    Ok(config)
}

fn load_or_sample(config: &RunConfig, rep: &Option<PathBuf>) -> Result<Arc<Representation>> {
    let rep = match rep {
        Some(path) => io::read_representation(&io::read_file(path)?)?,
        None => random_representation(config.genus, config.rank, config.flavor, config.seed)?,
    };
    Ok(Arc::new(rep))
}

fn read_cocycles(paths: &[PathBuf], base: &Arc<Representation>) -> Result<Vec<Cocycle>> {
    paths.iter().map(|p| io::read_cocycle(&io::read_file(p)?, base)).collect()
}

fn out_dir(config: &RunConfig) -> Result<&Path> {
    config
        .out
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("this subcommand writes several files and needs --out DIR".into()))
}

/// Writes `text` to `--out` if given, else to standard output.
fn emit(config: &RunConfig, text: &str) -> Result<()> {
    match &config.out {
        Some(path) => io::write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(" ")
}

/// The tangent frame a chart uses: u(n)-valued classes for a unitary base.
fn frame(basis: &CocycleBasis) -> Result<Vec<Cocycle>> {
    match basis.base().flavor() {
        Flavor::Unitary => Ok(unitary_tangent(basis)?.h1),
        Flavor::GeneralLinear => Ok(basis.h1.clone()),
    }
}

fn cmd_dims(config: &RunConfig, trivial: bool, rep: &Option<PathBuf>) -> Result<i32> {
    let base = if trivial {
        Arc::new(Representation::trivial(Presentation::new(config.genus)?, config.rank))
    } else {
        load_or_sample(config, rep)?
    };
    let d = cocycle_basis(&base)?.dims;
    let formula = expected_h1_dimension(base.genus(), base.rank());
    let verdict = if d.h1 == formula { "MATCH" } else { "MISMATCH" };
    println!("Z1={} B1={} H1={} formula={formula} {verdict}", d.z1, d.b1, d.h1);
    // the formula only applies at irreducible representations
    Ok(if d.h1 != formula && is_irreducible(&base)? { 1 } else { 0 })
}

fn cmd_cocycle_basis(config: &RunConfig, rep: &Option<PathBuf>) -> Result<i32> {
    let dir = out_dir(config)?;
    let base = load_or_sample(config, rep)?;
    let basis = cocycle_basis(&base)?;
    io::write_file(&dir.join("base.rep"), &io::write_representation(&base))?;
    for (i, c) in basis.h1.iter().enumerate() {
        io::write_file(&dir.join(format!("h1_{i:03}.cocycle")), &io::write_cocycle(c))?;
    }
    let d = basis.dims;
    println!("Z1={} B1={} H1={}", d.z1, d.b1, d.h1);
    println!("written: {}", basis.h1.len() + 1);
    Ok(0)
}

fn gram_metadata(g: &GoldmanGram) -> Vec<(String, String)> {
    vec![
        ("skewness".into(), format_float(g.skewness)),
        ("rank".into(), g.rank.to_string()),
        ("base-hash".into(), io::representation_hash(g.base())),
    ]
}

fn cocycles_for(config: &RunConfig, rep: &Option<PathBuf>, files: &[PathBuf]) -> Result<(Vec<Cocycle>, Space)> {
    let base = load_or_sample(config, rep)?;
    if files.is_empty() {
        Ok((cocycle_basis(&base)?.h1, Space::H1))
    } else {
        Ok((read_cocycles(files, &base)?, Space::Given))
    }
}

fn cmd_gram(config: &RunConfig, rep: &Option<PathBuf>, space: Option<SpaceArg>, files: &[PathBuf]) -> Result<i32> {
    let (cocycles, space) = match space {
        Some(s) => {
            let basis = cocycle_basis(&load_or_sample(config, rep)?)?;
            match s {
                SpaceArg::Z1 => (basis.z1, Space::Z1),
                SpaceArg::H1 => (basis.h1, Space::H1),
            }
        }
        None => cocycles_for(config, rep, files)?,
    };
    let g = GoldmanGram::from_cocycles(cocycles, space, config.parallel)?;
    let label = match space {
        Space::Z1 => "gram-z1",
        Space::H1 => "gram-h1",
        Space::Given => "gram",
    };
    let file = MatrixFile { label: label.into(), metadata: gram_metadata(&g), matrix: g.matrix.clone() };
    emit(config, &io::write_matrix(&file))?;
    if config.out.is_some() {
        println!("skewness: {}", format_float(g.skewness));
    }
    Ok(0)
}

fn cmd_symplectic_basis(config: &RunConfig, rep: &Option<PathBuf>, files: &[PathBuf]) -> Result<i32> {
    let dir = out_dir(config)?;
    let (cocycles, space) = cocycles_for(config, rep, files)?;
    let g = GoldmanGram::from_cocycles(cocycles, space, config.parallel)?;
    let sb = symplectic_basis(&g)?;
    io::write_file(&dir.join("base.rep"), &io::write_representation(g.base()))?;
    for (i, (e, f)) in sb.e.iter().zip(&sb.f).enumerate() {
        io::write_file(&dir.join(format!("e_{i:03}.cocycle")), &io::write_cocycle(e))?;
        io::write_file(&dir.join(format!("f_{i:03}.cocycle")), &io::write_cocycle(f))?;
    }
    let mut metadata = gram_metadata(&g);
    metadata.push(("residual".into(), format_float(sb.residual)));
    let file = MatrixFile { label: "symplectic-transform".into(), metadata, matrix: sb.transform.clone() };
    io::write_file(&dir.join("transform.matrix"), &io::write_matrix(&file))?;
    println!("pairs: {}", sb.e.len());
    println!("residual: {}", format_float(sb.residual));
    Ok(0)
}

fn cmd_deform(config: &RunConfig, rep: &Option<PathBuf>, cocycle: &Option<PathBuf>) -> Result<i32> {
    let base = load_or_sample(config, rep)?;
    let basis = cocycle_basis(&base)?;
    let chi = match cocycle {
        Some(path) => io::read_cocycle(&io::read_file(path)?, &base)?,
        None => frame(&basis)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::Precondition("H¹ is zero, nothing to deform along".into()))?,
    };
    let chi = chi.scale(Complex64::from(1.0 / chi.norm()));
    let steps = [1e-2, 1e-3, 1e-4];
    let mut corrections = Vec::new();
    let mut defects = Vec::new();
    for &t in &steps {
        let d = deform(&base, &chi, t)?;
        corrections.push(d.correction_norm);
        defects.push(d.rep.relator_defect());
    }
    let curve = DeformationCurve::along(&chi);
    let hs = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let errors = hs
        .iter()
        .map(|&h| basis.class_distance(&rh_differential(&curve, h)?, &chi))
        .collect::<Result<Vec<_>>>()?;
    let mut out = String::new();
    let _ = writeln!(out, "convention: {CONVENTION}");
    let _ = writeln!(out, "genus: {}", base.genus());
    let _ = writeln!(out, "rank: {}", base.rank());
    let _ = writeln!(out, "flavor: {}", base.flavor());
    let _ = writeln!(out, "direction-norm: {:.6e}", chi.norm());
    let _ = writeln!(out, "steps: {}", join(&steps));
    let _ = writeln!(out, "relator-defects: {}", join(&defects));
    let _ = writeln!(out, "corrections: {}", join(&corrections));
    let _ = writeln!(out, "correction-orders: {}", join(&convergence_orders(&steps, &corrections)));
    let _ = writeln!(out, "round-trip-steps: {}", join(&hs));
    let _ = writeln!(out, "round-trip-errors: {}", join(&errors));
    let _ = writeln!(out, "round-trip-ratios: {}", join(&convergence_ratios(&errors)));
    emit(config, &out)?;
    Ok(0)
}

fn parse_triple(s: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| Error::InvalidInput(format!("bad triple {s:?}"))))
        .collect::<Result<_>>()?;
    match parts[..] {
        [i, j, k] => Ok((i, j, k)),
        _ => Err(Error::InvalidInput(format!("triple {s:?} needs three indices"))),
    }
}

fn cmd_closedness(config: &RunConfig, rep: &Option<PathBuf>, triple: &str, h: f64) -> Result<i32> {
    let triple = parse_triple(triple)?;
    let base = load_or_sample(config, rep)?;
    let chart = Chart::from_basis(&cocycle_basis(&base)?)?;
    let steps = [4.0 * h, 2.0 * h, h];
    let residuals = steps
        .iter()
        .map(|&s| Ok(closedness_check(&chart, triple, s)?.residual))
        .collect::<Result<Vec<_>>>()?;
    let mut out = String::new();
    let _ = writeln!(out, "convention: {CONVENTION}");
    let _ = writeln!(out, "genus: {}", base.genus());
    let _ = writeln!(out, "rank: {}", base.rank());
    let _ = writeln!(out, "flavor: {}", base.flavor());
    let _ = writeln!(out, "chart-dim: {}", chart.dim());
    let _ = writeln!(out, "triple: {},{},{}", triple.0, triple.1, triple.2);
    let _ = writeln!(out, "steps: {}", join(&steps));
    let _ = writeln!(out, "residuals: {}", join(&residuals));
    let _ = writeln!(out, "orders: {}", join(&convergence_orders(&steps, &residuals)));
    emit(config, &out)?;
    Ok(0)
}

fn cmd_verify(config: &RunConfig, mutation: Mutation) -> Result<i32> {
    let report = verify::run(config, mutation)?;
    emit(config, &report.to_string())?;
    Ok(if report.passed() { 0 } else { 1 })
}

fn run(cli: &Cli) -> Result<i32> {
    let config = config_of(&cli.global)?;
    match &cli.command {
        Command::Dims { trivial, rep } => cmd_dims(&config, *trivial, rep),
        Command::RandomRep => {
            let rep = random_representation(config.genus, config.rank, config.flavor, config.seed)?;
            emit(&config, &io::write_representation(&rep))?;
            Ok(0)
        }
        Command::CocycleBasis { rep } => cmd_cocycle_basis(&config, rep),
        Command::Gram { rep, space, cocycles } => cmd_gram(&config, rep, *space, cocycles),
        Command::SymplecticBasis { rep, cocycles } => cmd_symplectic_basis(&config, rep, cocycles),
        Command::Deform { rep, cocycle } => cmd_deform(&config, rep, cocycle),
        Command::Closedness { rep, triple, h } => cmd_closedness(&config, rep, triple, *h),
        Command::Verify { mutate } => cmd_verify(&config, *mutate),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
