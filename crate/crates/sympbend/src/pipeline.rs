//! End-to-end driver: validate the algebra, build the right-regular model,
//! load a generator datum, check the bending curve, search for a bend
//! element, bend, certify density by a prime sweep, and test mapping-class
//! orbit separation.
//!
//! Stages run in a fixed order and every stage revalidates its inputs; a
//! failure carries the stage index (used as the process exit code) and a
//! short message.  Given the same configuration the pipeline is fully
//! deterministic: reports and certificates are byte-identical across runs.
//! No randomness is used anywhere.

use crate::cert::{
    bad_prime_set, orbit_separation, ChainBudget, DensityCertificate, OrbitSeparation,
};
use crate::exact::{rat_int, Rational, RingMatrix};
use crate::model::{b_search, commutant_lattice, RightRegularModel};
use crate::quat::{OrderBasis, Quaternion, QuaternionAlgebra};
use crate::surface::{
    assemble_with_order, bend, bundled_datum, independent_datum, CurveKind, SurfaceDatum, Word,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

/// Where the maximal-order basis comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderSource {
    /// The standard basis 1, i, j, ij.
    Standard,
    /// A basis file: a header line `a b` followed by four coordinate rows.
    File(PathBuf),
}

/// Where the generator datum comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatumSource {
    /// The shipped reference datum (`g ↦ 2+i`, `h ↦ j`).
    Bundled,
    /// The shipped independence datum (`g ↦ 2+i`, `h ↦ 2+ij`).
    Independent,
    /// A datum file in the sectioned key/value format.
    File(PathBuf),
}

/// Flat key-value pipeline configuration.  One `key: value` pair per line,
/// `#` starts a comment, every key is required exactly once.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Structure constants (a, b) of the quaternion algebra.
    pub algebra: (i64, i64),
    /// Order basis selection.
    pub order: OrderSource,
    /// Coordinates of the trace-zero unit μ defining the skew pairing.
    pub mu: [Rational; 4],
    /// Number of diagonal copies the datum must carry.
    pub copies: usize,
    /// Generator datum selection.
    pub datum: DatumSource,
    /// The bending curve as a word in the datum's generators.
    pub curve: String,
    /// Coordinate-height bound for the bend-element search.
    pub height: i64,
    /// Upper bound of the certification prime sweep.
    pub sweep_bound: u64,
    /// Witness prime for the orbit-separation report.
    pub separation_prime: u64,
}

/// The canonical configuration text for the shipped reference datum.
pub const BUNDLED_CONFIG: &str = "\
# Reference pipeline configuration.
algebra: 3 -1
order: standard
mu: 0 1 0 0
copies: 1
datum: bundled
curve: g
height: 2
sweep_bound: 50
separation_prime: 5
";

/// The canonical configuration text for the shipped independence datum.
pub const INDEPENDENT_CONFIG: &str = "\
# Independence pipeline configuration.
algebra: 3 -1
order: standard
mu: 0 1 0 0
copies: 1
datum: independent
curve: g
height: 2
sweep_bound: 13
separation_prime: 5
";

/// Configuration-file failure.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {0}: expected 'key: value'")]
    Syntax(usize),
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("duplicate key '{0}'")]
    DuplicateKey(String),
    #[error("missing key '{0}'")]
    MissingKey(String),
    #[error("key '{0}': {1}")]
    BadValue(String, String),
    #[error("io: {0}")]
    Io(String),
}

const CONFIG_KEYS: [&str; 9] = [
    "algebra",
    "order",
    "mu",
    "copies",
    "datum",
    "curve",
    "height",
    "sweep_bound",
    "separation_prime",
];

impl PipelineConfig {
    /// Parses the flat key-value format, strictly: unknown, duplicate, and
    /// missing keys are all errors, so a configuration file means exactly
    /// one run.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut seen: Vec<(String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once(':').ok_or(ConfigError::Syntax(idx + 1))?;
            let key = key.trim().to_string();
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey(key));
            }
            if seen.iter().any(|(k, _)| *k == key) {
                return Err(ConfigError::DuplicateKey(key));
            }
            seen.push((key, value.trim().to_string()));
        }
        let get = |key: &str| -> Result<&str, ConfigError> {
            seen.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| ConfigError::MissingKey(key.to_string()))
        };
        let bad = |key: &str, why: &str| ConfigError::BadValue(key.to_string(), why.to_string());

        let algebra_raw = get("algebra")?;
        let parts: Vec<&str> = algebra_raw.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(bad("algebra", "expected two integers 'a b'"));
        }
        let a = parts[0].parse::<i64>().map_err(|e| bad("algebra", &e.to_string()))?;
        let b = parts[1].parse::<i64>().map_err(|e| bad("algebra", &e.to_string()))?;

        let order = match get("order")? {
            "standard" => OrderSource::Standard,
            path => OrderSource::File(PathBuf::from(path)),
        };

        let mu_parts: Vec<&str> = get("mu")?.split_whitespace().collect();
        if mu_parts.len() != 4 {
            return Err(bad("mu", "expected four rational coordinates"));
        }
        let mut mu_coords = Vec::with_capacity(4);
        for part in &mu_parts {
            mu_coords.push(Rational::from_str(part).map_err(|e| bad("mu", &e.to_string()))?);
        }
        let mu: [Rational; 4] = mu_coords.try_into().expect("length checked");

        let copies = get("copies")?
            .parse::<usize>()
            .map_err(|e| bad("copies", &e.to_string()))?;
        if copies == 0 {
            return Err(bad("copies", "must be at least 1"));
        }

        let datum = match get("datum")? {
            "bundled" => DatumSource::Bundled,
            "independent" => DatumSource::Independent,
            path => DatumSource::File(PathBuf::from(path)),
        };

        let curve = get("curve")?.to_string();
        if curve.is_empty() {
            return Err(bad("curve", "must name a word in the generators"));
        }

        let height = get("height")?
            .parse::<i64>()
            .map_err(|e| bad("height", &e.to_string()))?;
        if height < 0 {
            return Err(bad("height", "must be nonnegative"));
        }

        let sweep_bound = get("sweep_bound")?
            .parse::<u64>()
            .map_err(|e| bad("sweep_bound", &e.to_string()))?;
        let separation_prime = get("separation_prime")?
            .parse::<u64>()
            .map_err(|e| bad("separation_prime", &e.to_string()))?;

        Ok(PipelineConfig {
            algebra: (a, b),
            order,
            mu,
            copies,
            datum,
            curve,
            height,
            sweep_bound,
            separation_prime,
        })
    }

    /// Reads and parses a configuration file.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(e.to_string()))?;
        Self::parse(&text)
    }

    /// The parsed form of [`BUNDLED_CONFIG`].
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_CONFIG).expect("bundled config must parse")
    }

    /// The parsed form of [`INDEPENDENT_CONFIG`].
    pub fn independent() -> Self {
        Self::parse(INDEPENDENT_CONFIG).expect("independent config must parse")
    }
}

/// Stage-labeled pipeline failure; `stage` doubles as the process exit code.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("stage {stage} ({name}): {message}")]
pub struct PipelineError {
    pub stage: usize,
    pub name: &'static str,
    pub message: String,
}

/// Stage names in execution order.
pub const STAGES: [&str; 8] = [
    "algebra",
    "model",
    "datum",
    "curve",
    "search",
    "bend",
    "certify",
    "separate",
];

fn fail(stage: usize, message: impl Into<String>) -> PipelineError {
    PipelineError { stage, name: STAGES[stage - 1], message: message.into() }
}

/// Everything a completed run produced, alongside the files written.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub model_report: String,
    pub search_report: String,
    pub bend_coords: Vec<i64>,
    pub bend_height: i64,
    pub certificate: DensityCertificate,
    pub separation: OrbitSeparation,
    pub files: Vec<PathBuf>,
}

fn render_matrix(m: &RingMatrix<Rational>) -> String {
    let mut out = String::new();
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|c| m[(r, c)].to_string()).collect();
        let _ = writeln!(out, "  {}", row.join(" "));
    }
    out
}

/// Deterministic text description of a model: algebra, μ, skew Gram
/// matrix, elementary divisors, and the primitive form.
pub fn render_model(model: &RightRegularModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "right-regular model");
    let _ = writeln!(out, "algebra: ({}, {})", model.algebra().a(), model.algebra().b());
    let mu: Vec<String> = model.mu().coords().iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "mu: {}", mu.join(" "));
    let _ = writeln!(out, "skew gram matrix:");
    out.push_str(&render_matrix(model.gram().matrix()));
    let divisors: Vec<String> = model.divisors().iter().map(|d| d.to_string()).collect();
    let _ = writeln!(out, "elementary divisors: {}", divisors.join(" "));
    let _ = writeln!(out, "primitive form:");
    out.push_str(&render_matrix(model.primitive_form().matrix()));
    out
}

fn curve_image_in_copy(
    datum: &SurfaceDatum,
    copy: usize,
    word: &Word,
) -> Result<Quaternion, String> {
    let mut acc = datum.algebra.one();
    for letter in word.letters() {
        let q = &datum.assignment[letter.generator][copy];
        let factor = if letter.inverse {
            q.inverse().ok_or("curve word passes through a non-invertible element")?
        } else {
            q.clone()
        };
        acc = acc.mul(&factor);
    }
    Ok(acc)
}

/// Runs all eight stages, writes the reports into `out_dir`, and returns
/// the structured results.  With `emit_json` a machine-readable copy of the
/// certificate and the separation report is written alongside the text.
pub fn run_pipeline(
    config: &PipelineConfig,
    out_dir: &Path,
    emit_json: bool,
) -> Result<PipelineOutput, PipelineError> {
    // Stage 1: the algebra must be an indefinite division algebra.
    let (a, b) = config.algebra;
    let algebra = QuaternionAlgebra::from_integers(a, b).map_err(|e| fail(1, e.to_string()))?;
    if !algebra.is_indefinite() {
        return Err(fail(1, "not indefinite"));
    }
    if !algebra.is_division() {
        return Err(fail(1, "not a division algebra (empty ramification set)"));
    }

    // Stage 2: build the model over the requested order.
    let order = match &config.order {
        OrderSource::Standard => {
            OrderBasis::standard(algebra.clone()).map_err(|e| fail(2, e.to_string()))?
        }
        OrderSource::File(path) => {
            let loaded = OrderBasis::from_file(path).map_err(|e| fail(2, e.to_string()))?;
            if loaded.algebra().a() != algebra.a() || loaded.algebra().b() != algebra.b() {
                return Err(fail(2, "order file is over a different algebra"));
            }
            loaded
        }
    };
    let mu = algebra.from_coords(config.mu.clone());
    let model_probe =
        RightRegularModel::new(order.clone(), mu.clone()).map_err(|e| fail(2, e.to_string()))?;
    let model_report = render_model(&model_probe);
    drop(model_probe);

    // Stage 3: load the datum and cross-validate it against the config.
    let datum = match &config.datum {
        DatumSource::Bundled => bundled_datum(),
        DatumSource::Independent => independent_datum(),
        DatumSource::File(path) => {
            SurfaceDatum::from_file(path).map_err(|e| fail(3, e.to_string()))?
        }
    };
    if datum.algebra.a() != algebra.a() || datum.algebra.b() != algebra.b() {
        return Err(fail(3, "datum algebra differs from the configured algebra"));
    }
    if datum.mu.coords() != mu.coords() {
        return Err(fail(3, "datum mu differs from the configured mu"));
    }
    if datum.copies() != config.copies {
        return Err(fail(
            3,
            format!("datum has {} copies, config expects {}", datum.copies(), config.copies),
        ));
    }
    let (model, rep) =
        assemble_with_order(&datum, order).map_err(|e| fail(3, e.to_string()))?;

    // Stage 4: the configured curve must be the datum's curve, its stable
    // data must be in range, and its image in every copy must be a
    // noncentral Pell element x0 + x1·i with x0² − a·x1² = 1.
    let curve_word = Word::parse(&config.curve, datum.presentation.names())
        .map_err(|e| fail(4, e.to_string()))?;
    if curve_word != datum.curve.word {
        return Err(fail(4, "curve selection does not match the datum curve"));
    }
    match &datum.curve.kind {
        CurveKind::Nonseparating { stable } => {
            if *stable >= datum.presentation.rank() {
                return Err(fail(4, "stable letter out of range"));
            }
        }
        CurveKind::Separating { side } => {
            if side.iter().any(|k| *k >= datum.presentation.rank()) {
                return Err(fail(4, "separating side letter out of range"));
            }
        }
    }
    let one = rat_int(1);
    let zero = rat_int(0);
    for copy in 0..config.copies {
        let image = curve_image_in_copy(&datum, copy, &curve_word)
            .map_err(|m| fail(4, format!("copy {copy}: {m}")))?;
        let coords = image.coords();
        if coords[2] != zero || coords[3] != zero {
            return Err(fail(4, format!("copy {copy}: curve image is not a Pell element")));
        }
        let pell = &coords[0] * &coords[0] - algebra.a() * &coords[1] * &coords[1];
        if pell != one {
            return Err(fail(4, format!("copy {copy}: curve image fails the Pell equation")));
        }
        if coords[1] == zero {
            return Err(fail(4, format!("copy {copy}: curve image is central")));
        }
    }

    // Stage 5: search the curve's commutant lattice for bend elements.
    let curve_matrix = rep.evaluate(&datum.curve.word);
    let lattice = commutant_lattice(std::slice::from_ref(&curve_matrix))
        .map_err(|e| fail(5, e.to_string()))?;
    let blocks = vec![2usize; 2 * config.copies];
    let hits = if config.height == 0 {
        Vec::new()
    } else {
        b_search(&lattice, rep.form(), &blocks, config.height)
            .map_err(|e| fail(5, e.to_string()))?
    };
    let Some(chosen) = hits.first() else {
        return Err(fail(5, format!("no bend element at height {}", config.height)));
    };
    let mut search_report = String::new();
    let _ = writeln!(search_report, "bend search");
    let _ = writeln!(search_report, "commutant lattice rank: {}", lattice.len());
    let _ = writeln!(search_report, "height bound: {}", config.height);
    let _ = writeln!(search_report, "candidates found: {}", hits.len());
    let _ = writeln!(search_report, "chosen coordinates: {:?}", chosen.coords);
    let _ = writeln!(search_report, "chosen height: {}", chosen.height);
    let _ = writeln!(search_report, "chosen matrix:");
    search_report.push_str(&render_matrix(&chosen.matrix));

    // Stage 6: bend along the curve.
    let bent = bend(&rep, &datum.curve, &chosen.matrix).map_err(|e| fail(6, e.to_string()))?;

    // Stage 7: sweep the good primes and assemble the density certificate.
    let budget = ChainBudget::default();
    let certificate = bad_prime_set(&bent, model.divisors(), config.sweep_bound, &budget);

    // Stage 8: orbit-separation report at the witness prime.
    let separation = orbit_separation(
        &rep,
        &datum.curve,
        &chosen.matrix,
        model.divisors(),
        config.separation_prime,
        &[],
        &budget,
    )
    .map_err(|e| fail(8, e.to_string()))?;

    // Write the artifacts in a fixed order.
    let mut files = Vec::new();
    let write = |stage: usize, name: &str, text: &str| -> Result<PathBuf, PipelineError> {
        let path = out_dir.join(name);
        std::fs::write(&path, text).map_err(|e| fail(stage, format!("io: {e}")))?;
        Ok(path)
    };
    files.push(write(2, "model.txt", &model_report)?);
    files.push(write(5, "search.txt", &search_report)?);
    files.push(write(7, "certificate.txt", &certificate.render_text())?);
    files.push(write(8, "separation.txt", &separation.render_text())?);
    if emit_json {
        files.push(write(7, "certificate.json", &certificate.render_json().to_string())?);
        files.push(write(8, "separation.json", &separation.render_json().to_string())?);
    }

    Ok(PipelineOutput {
        model_report,
        search_report,
        bend_coords: chosen.coords.clone(),
        bend_height: chosen.height,
        certificate,
        separation,
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::{CertVerdict, SeparationConclusion};

    fn tempdir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("sympbend-pipeline-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn bundled_config_round_trips() {
        let config = PipelineConfig::bundled();
        assert_eq!(config.algebra, (3, -1));
        assert_eq!(config.order, OrderSource::Standard);
        assert_eq!(config.copies, 1);
        assert_eq!(config.datum, DatumSource::Bundled);
        assert_eq!(config.curve, "g");
        assert_eq!(config.height, 2);
        assert_eq!(config.sweep_bound, 50);
        assert_eq!(config.separation_prime, 5);
    }

    #[test]
    fn config_parsing_is_strict() {
        assert_eq!(
            PipelineConfig::parse("algebra 3 -1\n"),
            Err(ConfigError::Syntax(1))
        );
        assert_eq!(
            PipelineConfig::parse("volume: 11\n"),
            Err(ConfigError::UnknownKey("volume".to_string()))
        );
        let doubled = format!("{BUNDLED_CONFIG}height: 3\n");
        assert_eq!(
            PipelineConfig::parse(&doubled),
            Err(ConfigError::DuplicateKey("height".to_string()))
        );
        assert_eq!(
            PipelineConfig::parse("algebra: 3 -1\n"),
            Err(ConfigError::MissingKey("order".to_string()))
        );
        let negative = BUNDLED_CONFIG.replace("height: 2", "height: -1");
        assert!(matches!(
            PipelineConfig::parse(&negative),
            Err(ConfigError::BadValue(k, _)) if k == "height"
        ));
    }

    #[test]
    fn definite_algebra_fails_the_first_stage() {
        let mut config = PipelineConfig::bundled();
        config.algebra = (-1, -1);
        let err = run_pipeline(&config, &tempdir("definite"), false).unwrap_err();
        assert_eq!(err.stage, 1);
        assert_eq!(err.message, "not indefinite");
    }

    #[test]
    fn split_algebra_fails_the_first_stage() {
        let mut config = PipelineConfig::bundled();
        config.algebra = (1, 1);
        let err = run_pipeline(&config, &tempdir("split"), false).unwrap_err();
        assert_eq!(err.stage, 1);
        assert!(err.message.contains("division"));
    }

    #[test]
    fn zero_height_reports_no_bend_element() {
        let mut config = PipelineConfig::bundled();
        config.height = 0;
        let err = run_pipeline(&config, &tempdir("height0"), false).unwrap_err();
        assert_eq!(err.stage, 5);
        assert_eq!(err.message, "no bend element at height 0");
    }

    #[test]
    fn mismatched_copies_fail_the_datum_stage() {
        let mut config = PipelineConfig::bundled();
        config.copies = 2;
        let err = run_pipeline(&config, &tempdir("copies"), false).unwrap_err();
        assert_eq!(err.stage, 3);
        assert!(err.message.contains("copies"));
    }

    #[test]
    fn wrong_curve_selection_fails_the_curve_stage() {
        let mut config = PipelineConfig::bundled();
        config.curve = "h".to_string();
        let err = run_pipeline(&config, &tempdir("curve"), false).unwrap_err();
        assert_eq!(err.stage, 4);
        assert!(err.message.contains("curve selection"));
    }

    #[test]
    fn bundled_run_completes_with_reproducible_reports() {
        let config = PipelineConfig::bundled();
        let dir = tempdir("bundled");
        let first = run_pipeline(&config, &dir, true).unwrap();
        assert_eq!(first.bend_height, 1);
        assert_eq!(first.certificate.sweep_bound, 50);
        assert_eq!(first.certificate.verdict, CertVerdict::NotCertified);
        assert_eq!(first.separation.conclusion, SeparationConclusion::NotSeparated);
        for name in ["model.txt", "search.txt", "certificate.txt", "separation.txt", "certificate.json", "separation.json"] {
            assert!(dir.join(name).is_file(), "{name} missing");
        }
        let cert_bytes = std::fs::read(dir.join("certificate.txt")).unwrap();
        let second = run_pipeline(&config, &dir, true).unwrap();
        assert_eq!(first.certificate.render_text(), second.certificate.render_text());
        assert_eq!(cert_bytes, std::fs::read(dir.join("certificate.txt")).unwrap());
        assert_eq!(first.search_report, second.search_report);
    }

    #[test]
    fn independent_run_is_dense_certified_and_separates() {
        let config = PipelineConfig::independent();
        let dir = tempdir("independent");
        let out = run_pipeline(&config, &dir, false).unwrap();
        assert_eq!(out.certificate.verdict, CertVerdict::DenseCertified);
        assert!(out.certificate.omega.is_empty());
        assert_eq!(out.separation.conclusion, SeparationConclusion::DistinctOrbits);
        assert!(out.separation.power_bend_agrees);
        assert_eq!(out.separation.bend_order, 10);
    }
}
