//! Command-line driver for the sympbend toolkit.
//!
//! Subcommands expose the individual layers (algebra inspection, cocycle
//! verification, model embedding, bending, density certification, orbit
//! separation) and `run-pipeline` chains them end to end from a flat
//! key-value configuration file.  All output is deterministic.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use sympbend::cert::{bad_prime_set, orbit_separation, CertVerdict, ChainBudget};
use sympbend::cocycle::{
    connecting_delta, fixed_algebra, is_cocycle, kronecker_cocycle, product_identity_check,
    t_cocycle,
};
use sympbend::exact::{Place, Rational};
use sympbend::model::{b_search, commutant_lattice, BendElement, RightRegularModel};
use sympbend::pipeline::{render_model, run_pipeline, PipelineConfig};
use sympbend::quat::{OrderBasis, QuaternionAlgebra};
use sympbend::surface::{
    assemble_with_order, bend, bundled_datum, independent_datum, Representation, SurfaceDatum,
};

#[derive(Parser)]
#[command(
    name = "sympbend",
    version,
    about = "Exact symplectic representations from quaternion orders: bending and mod-p certificates",
    long_about = None
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ramification, division, and definiteness of a quaternion algebra (a,b).
    AlgebraInfo {
        /// Structure constant a (i² = a).
        #[arg(allow_negative_numbers = true)]
        a: i64,
        /// Structure constant b (j² = b).
        #[arg(allow_negative_numbers = true)]
        b: i64,
    },
    /// Run the Galois-cocycle invariant suite for the algebra (a,b).
    CocycleVerify {
        /// Structure constant a.
        #[arg(allow_negative_numbers = true)]
        a: i64,
        /// Structure constant b.
        #[arg(allow_negative_numbers = true)]
        b: i64,
    },
    /// Build the right-regular symplectic model and print it.
    Embed {
        /// Structure constant a.
        #[arg(allow_negative_numbers = true)]
        a: i64,
        /// Structure constant b.
        #[arg(allow_negative_numbers = true)]
        b: i64,
        /// Coordinates of the pairing unit μ, four whitespace-separated rationals.
        #[arg(long, default_value = "0 1 0 0")]
        mu: String,
        /// Order basis: "standard" or a basis file.
        #[arg(long, default_value = "standard")]
        order: String,
    },
    /// Search for a bend element and print the bent generator images.
    Bend {
        /// Datum source: "bundled", "independent", or a datum file.
        #[arg(long)]
        datum: String,
        /// Coordinate-height bound for the bend search.
        #[arg(long, default_value_t = 2)]
        height: i64,
    },
    /// Sweep good primes and emit a density certificate (exit 0 iff dense-certified).
    Certify {
        /// Datum source: "bundled", "independent", or a datum file.
        #[arg(long)]
        datum: String,
        /// Bend by the first element found at this height before certifying.
        #[arg(long)]
        height: Option<i64>,
        /// Upper bound of the prime sweep.
        #[arg(long, default_value_t = 50)]
        sweep_bound: u64,
        /// Also print the certificate as JSON.
        #[arg(long)]
        emit_json: bool,
    },
    /// Compare a representation with its bent form modulo a witness prime.
    Separate {
        /// Datum source: "bundled", "independent", or a datum file.
        #[arg(long)]
        datum: String,
        /// Coordinate-height bound for the bend search.
        #[arg(long, default_value_t = 2)]
        height: i64,
        /// Witness prime.
        #[arg(long, default_value_t = 5)]
        prime: u64,
        /// Auxiliary primes, whitespace-separated.
        #[arg(long, default_value = "")]
        aux: String,
        /// Also print the report as JSON.
        #[arg(long)]
        emit_json: bool,
    },
    /// Run every stage from a configuration: "bundled", "independent", or a file.
    RunPipeline {
        /// Configuration source.
        #[arg(long)]
        config: String,
        /// Directory for the report files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Also write JSON copies of the certificate and the separation report.
        #[arg(long)]
        emit_json: bool,
    },
}

/// Exit code for malformed inputs (configuration or argument values).
const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::AlgebraInfo { a, b } => algebra_info(a, b),
        Command::CocycleVerify { a, b } => cocycle_verify(a, b),
        Command::Embed { a, b, mu, order } => embed(a, b, &mu, &order),
        Command::Bend { datum, height } => bend_command(&datum, height),
        Command::Certify { datum, height, sweep_bound, emit_json } => {
            certify(&datum, height, sweep_bound, emit_json)
        }
        Command::Separate { datum, height, prime, aux, emit_json } => {
            separate(&datum, height, prime, &aux, emit_json)
        }
        Command::RunPipeline { config, out_dir, emit_json } => {
            pipeline(&config, &out_dir, emit_json)
        }
    }
}

fn usage_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_USAGE)
}

fn algebra_info(a: i64, b: i64) -> ExitCode {
    let algebra = match QuaternionAlgebra::from_integers(a, b) {
        Ok(alg) => alg,
        Err(e) => return usage_error(e),
    };
    let places: Vec<String> = algebra
        .ramified_places()
        .iter()
        .map(|p| match p {
            Place::Finite(q) => q.to_string(),
            Place::Infinity => "infinity".to_string(),
        })
        .collect();
    println!("algebra: ({a}, {b})");
    println!("ramification: {{{}}}", places.join(", "));
    println!("division: {}", if algebra.is_division() { "yes" } else { "no" });
    println!("indefinite: {}", if algebra.is_indefinite() { "yes" } else { "no" });
    ExitCode::SUCCESS
}

fn cocycle_verify(a: i64, b: i64) -> ExitCode {
    let (ra, rb) = (Rational::from_integer(a.into()), Rational::from_integer(b.into()));
    let cocycle = match t_cocycle(&ra, &rb) {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    println!("cocycle suite for ({a}, {b})");
    let mut pass = true;

    let pairs_ok = is_cocycle(&cocycle);
    pass &= pairs_ok;

    let identity_ok = match product_identity_check(&cocycle, &cocycle) {
        Ok(ok) => ok,
        Err(e) => return usage_error(e),
    };
    pass &= identity_ok;
    println!(
        "{} cocycle pairs, product identity: {}",
        if pairs_ok { "16/16" } else { "failed" },
        if identity_ok { "pass" } else { "fail" },
    );

    match fixed_algebra(&cocycle) {
        Ok(basis) => {
            println!("fixed algebra dimension: {}", basis.len());
            pass &= basis.len() == 4;
        }
        Err(e) => return usage_error(e),
    }

    // The Kronecker lift of the cocycle with itself takes genuinely
    // orthogonal values, so its connecting set must trivialise.
    let lifted = match kronecker_cocycle(&cocycle, &cocycle) {
        Ok(l) => l,
        Err(e) => return usage_error(e),
    };
    match connecting_delta(&lifted) {
        Ok(delta) => {
            let ok = delta.is_coboundary();
            println!(
                "connecting set of the orthogonal lift is a coboundary: {}",
                if ok { "yes" } else { "no" }
            );
            pass &= ok;
        }
        Err(e) => return usage_error(e),
    }

    if pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: cocycle suite failed");
        ExitCode::FAILURE
    }
}

fn parse_mu(text: &str) -> Result<[Rational; 4], String> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != 4 {
        return Err("mu needs four rational coordinates".to_string());
    }
    let mut coords = Vec::with_capacity(4);
    for part in parts {
        coords.push(Rational::from_str(part).map_err(|e| format!("mu: {e}"))?);
    }
    Ok(coords.try_into().expect("length checked"))
}

fn load_order(algebra: &QuaternionAlgebra, source: &str) -> Result<OrderBasis, String> {
    if source == "standard" {
        return OrderBasis::standard(algebra.clone()).map_err(|e| e.to_string());
    }
    let loaded = OrderBasis::from_file(Path::new(source)).map_err(|e| e.to_string())?;
    if loaded.algebra().a() != algebra.a() || loaded.algebra().b() != algebra.b() {
        return Err("order file is over a different algebra".to_string());
    }
    Ok(loaded)
}

fn embed(a: i64, b: i64, mu_text: &str, order_text: &str) -> ExitCode {
    let algebra = match QuaternionAlgebra::from_integers(a, b) {
        Ok(alg) => alg,
        Err(e) => return usage_error(e),
    };
    let mu = match parse_mu(mu_text) {
        Ok(coords) => algebra.from_coords(coords),
        Err(e) => return usage_error(e),
    };
    let order = match load_order(&algebra, order_text) {
        Ok(o) => o,
        Err(e) => return usage_error(e),
    };
    match RightRegularModel::new(order, mu) {
        Ok(model) => {
            print!("{}", render_model(&model));
            ExitCode::SUCCESS
        }
        Err(e) => usage_error(e),
    }
}

fn load_datum(source: &str) -> Result<SurfaceDatum, String> {
    match source {
        "bundled" => Ok(bundled_datum()),
        "independent" => Ok(independent_datum()),
        path => SurfaceDatum::from_file(Path::new(path)).map_err(|e| e.to_string()),
    }
}

/// Assembles a datum and finds the first bend element at the given height.
fn assemble_and_search(
    datum: &SurfaceDatum,
    height: i64,
) -> Result<(RightRegularModel, Representation, BendElement), String> {
    let order = OrderBasis::standard(datum.algebra.clone()).map_err(|e| e.to_string())?;
    let (model, rep) = assemble_with_order(datum, order).map_err(|e| e.to_string())?;
    let curve_matrix = rep.evaluate(&datum.curve.word);
    let lattice =
        commutant_lattice(std::slice::from_ref(&curve_matrix)).map_err(|e| e.to_string())?;
    let blocks = vec![2usize; 2 * datum.copies()];
    let hits = b_search(&lattice, rep.form(), &blocks, height).map_err(|e| e.to_string())?;
    let chosen = hits
        .first()
        .cloned()
        .ok_or_else(|| format!("no bend element at height {height}"))?;
    Ok((model, rep, chosen))
}

fn render_rational_matrix(m: &sympbend::exact::RingMatrix<Rational>) -> String {
    let mut out = String::new();
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|c| m[(r, c)].to_string()).collect();
        out.push_str("  ");
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn bend_command(datum_text: &str, height: i64) -> ExitCode {
    let datum = match load_datum(datum_text) {
        Ok(d) => d,
        Err(e) => return usage_error(e),
    };
    let (_, rep, chosen) = match assemble_and_search(&datum, height) {
        Ok(t) => t,
        Err(e) => return usage_error(e),
    };
    let bent = match bend(&rep, &datum.curve, &chosen.matrix) {
        Ok(rep) => rep,
        Err(e) => return usage_error(e),
    };
    println!("bend element: coordinates {:?}, height {}", chosen.coords, chosen.height);
    println!("matrix:");
    print!("{}", render_rational_matrix(&chosen.matrix));
    println!("bent generator images:");
    for (name, image) in datum.presentation.names().iter().zip(bent.images()) {
        println!("{name}:");
        print!("{}", render_rational_matrix(image));
    }
    ExitCode::SUCCESS
}

fn certify(datum_text: &str, height: Option<i64>, sweep_bound: u64, emit_json: bool) -> ExitCode {
    let datum = match load_datum(datum_text) {
        Ok(d) => d,
        Err(e) => return usage_error(e),
    };
    let budget = ChainBudget::default();
    let certificate = match height {
        Some(h) => {
            let (model, rep, chosen) = match assemble_and_search(&datum, h) {
                Ok(t) => t,
                Err(e) => return usage_error(e),
            };
            let bent = match bend(&rep, &datum.curve, &chosen.matrix) {
                Ok(rep) => rep,
                Err(e) => return usage_error(e),
            };
            bad_prime_set(&bent, model.divisors(), sweep_bound, &budget)
        }
        None => {
            let order = match OrderBasis::standard(datum.algebra.clone()) {
                Ok(o) => o,
                Err(e) => return usage_error(e),
            };
            let (model, rep) = match assemble_with_order(&datum, order) {
                Ok(t) => t,
                Err(e) => return usage_error(e),
            };
            bad_prime_set(&rep, model.divisors(), sweep_bound, &budget)
        }
    };
    print!("{}", certificate.render_text());
    if emit_json {
        println!("{}", certificate.render_json());
    }
    if certificate.verdict == CertVerdict::DenseCertified {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn separate(
    datum_text: &str,
    height: i64,
    prime: u64,
    aux_text: &str,
    emit_json: bool,
) -> ExitCode {
    let datum = match load_datum(datum_text) {
        Ok(d) => d,
        Err(e) => return usage_error(e),
    };
    let mut aux = Vec::new();
    for part in aux_text.split_whitespace() {
        match part.parse::<u64>() {
            Ok(p) => aux.push(p),
            Err(e) => return usage_error(format!("aux: {e}")),
        }
    }
    let (model, rep, chosen) = match assemble_and_search(&datum, height) {
        Ok(t) => t,
        Err(e) => return usage_error(e),
    };
    let budget = ChainBudget::default();
    match orbit_separation(
        &rep,
        &datum.curve,
        &chosen.matrix,
        model.divisors(),
        prime,
        &aux,
        &budget,
    ) {
        Ok(report) => {
            print!("{}", report.render_text());
            if emit_json {
                println!("{}", report.render_json());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn pipeline(config_text: &str, out_dir: &Path, emit_json: bool) -> ExitCode {
    let config = match config_text {
        "bundled" => PipelineConfig::bundled(),
        "independent" => PipelineConfig::independent(),
        path => match PipelineConfig::from_file(Path::new(path)) {
            Ok(c) => c,
            Err(e) => return usage_error(e),
        },
    };
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return usage_error(format!("out-dir: {e}"));
    }
    match run_pipeline(&config, out_dir, emit_json) {
        Ok(output) => {
            println!("pipeline complete");
            println!("bend height: {}", output.bend_height);
            println!("certificate verdict: {}", output.certificate.verdict.render());
            println!("separation conclusion: {}", output.separation.conclusion.render());
            for file in &output.files {
                println!("wrote {}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.stage as u8)
        }
    }
}
