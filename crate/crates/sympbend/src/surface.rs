//! Surface-group representations and bending.
//!
//! A finitely presented group (free or one-relator surface presentation)
//! acts by integral symplectic matrices through the quaternionic model: each
//! generator is assigned a norm-one order element per copy, the copies are
//! assembled block-diagonally, and every relator is checked exactly.  A
//! simple closed curve on the surface is recorded as a word together with
//! either the generators on one side (separating) or a stable letter crossing
//! it (nonseparating); bending deforms the representation by an integral
//! symplectic matrix commuting with the curve's image, and precomposition by
//! validated word maps realizes mapping classes on the level of words.

use crate::exact::{ExactError, Rational, Ring, RingMatrix};
use crate::model::{phi_n, is_symplectic, ModelError, RightRegularModel, SkewFormZ};
use crate::quat::{OrderBasis, Quaternion, QuaternionAlgebra, QuatError};
use std::fmt::Write as _;
use thiserror::Error;

/// Errors from parsing, validation, and bending.
#[derive(Debug, Error, PartialEq)]
pub enum SurfaceError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown generator: {0}")]
    UnknownGenerator(String),
    #[error("count mismatch: {0}")]
    CountMismatch(String),
    #[error("matrix is not integral: {0}")]
    NotIntegral(String),
    #[error("matrix does not preserve the form: {0}")]
    NotSymplectic(String),
    #[error("relator does not map to the identity: {0}")]
    RelatorBroken(String),
    #[error("assigned element does not have reduced norm one: {0}")]
    NotUnitNorm(String),
    #[error("invalid curve datum: {0}")]
    CurveInvalid(String),
    #[error("invalid bending element: {0}")]
    BendInvalid(String),
    #[error("word map is not relator-compatible: {0}")]
    MapInvalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quat(#[from] QuatError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// One letter of a word: a generator index, possibly inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    fn inverted(self) -> Self {
        Letter { generator: self.generator, inverse: !self.inverse }
    }
}

/// A word in the free group on the presentation's generators.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word { letters: Vec::new() }
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Parses whitespace-separated tokens `name`, `name^-1`, `name^k`.
    pub fn parse(text: &str, names: &[String]) -> Result<Self, SurfaceError> {
        let mut letters = Vec::new();
        for token in text.split_whitespace() {
            let (name, power) = match token.split_once('^') {
                None => (token, 1i64),
                Some((n, p)) => {
                    let power: i64 = p
                        .parse()
                        .map_err(|_| SurfaceError::Parse(format!("bad exponent in '{token}'")))?;
                    (n, power)
                }
            };
            let generator = names
                .iter()
                .position(|g| g == name)
                .ok_or_else(|| SurfaceError::UnknownGenerator(name.to_string()))?;
            for _ in 0..power.unsigned_abs() {
                letters.push(Letter { generator, inverse: power < 0 });
            }
        }
        Ok(Word { letters })
    }

    /// Renders the word with `^-1` markers, or `1` for the empty word.
    pub fn display(&self, names: &[String]) -> String {
        if self.letters.is_empty() {
            return "1".to_string();
        }
        let mut out = String::new();
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}", names[l.generator]);
            if l.inverse {
                out.push_str("^-1");
            }
        }
        out
    }

    pub fn inverse(&self) -> Self {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverted()).collect(),
        }
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    /// Removes adjacent cancelling pairs until none remain.
    pub fn free_reduced(&self) -> Self {
        let mut stack: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if let Some(&top) = stack.last() {
                if top.generator == l.generator && top.inverse != l.inverse {
                    stack.pop();
                    continue;
                }
            }
            stack.push(l);
        }
        Word { letters: stack }
    }

    /// Free reduction followed by trimming cancelling first/last letters.
    pub fn cyclically_reduced(&self) -> Self {
        let mut w = self.free_reduced().letters;
        while w.len() >= 2 {
            let first = w[0];
            let last = w[w.len() - 1];
            if first.generator == last.generator && first.inverse != last.inverse {
                w.pop();
                w.remove(0);
            } else {
                break;
            }
        }
        Word { letters: w }
    }

    /// Substitutes each generator by its image word (inverting images of
    /// inverted letters).
    pub fn substitute(&self, images: &[Word]) -> Word {
        let mut out = Word::identity();
        for l in &self.letters {
            let image = &images[l.generator];
            let piece = if l.inverse { image.inverse() } else { image.clone() };
            out = out.concat(&piece);
        }
        out
    }
}

/// Are u and v conjugate in the free group?  True exactly when their cyclic
/// reductions are rotations of each other.
pub fn conjugate_in_free(u: &Word, v: &Word) -> bool {
    let a = u.cyclically_reduced().letters;
    let b = v.cyclically_reduced().letters;
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    let doubled: Vec<Letter> = a.iter().chain(a.iter()).copied().collect();
    doubled.windows(b.len()).any(|w| w == b.as_slice())
}

/// A finite presentation: named generators and relator words.
#[derive(Debug, Clone, PartialEq)]
pub struct Presentation {
    names: Vec<String>,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(names: Vec<String>, relators: Vec<Word>) -> Result<Self, SurfaceError> {
        if names.is_empty() {
            return Err(SurfaceError::Parse("no generators".into()));
        }
        for (k, n) in names.iter().enumerate() {
            if n.is_empty() || n.contains('^') || n.contains(char::is_whitespace) {
                return Err(SurfaceError::Parse(format!("bad generator name '{n}'")));
            }
            if names[..k].contains(n) {
                return Err(SurfaceError::Parse(format!("duplicate generator '{n}'")));
            }
        }
        for r in &relators {
            for l in r.letters() {
                if l.generator >= names.len() {
                    return Err(SurfaceError::Parse("relator letter out of range".into()));
                }
            }
        }
        Ok(Presentation { names, relators })
    }

    /// Free group on the given generator names.
    pub fn free(names: &[&str]) -> Result<Self, SurfaceError> {
        Presentation::new(names.iter().map(|s| s.to_string()).collect(), Vec::new())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Checks that a word map (generator → word) sends every relator to a
/// conjugate of a relator or an inverse relator, which is what an induced
/// surface mapping class does on the level of words.
pub fn check_word_map(p: &Presentation, images: &[Word]) -> Result<(), SurfaceError> {
    if images.len() != p.rank() {
        return Err(SurfaceError::CountMismatch(format!(
            "word map has {} images for {} generators",
            images.len(),
            p.rank()
        )));
    }
    for (k, r) in p.relators().iter().enumerate() {
        let image = r.substitute(images).free_reduced();
        let ok = p.relators().iter().any(|s| {
            conjugate_in_free(&image, s) || conjugate_in_free(&image, &s.inverse())
        });
        if !ok {
            return Err(SurfaceError::MapInvalid(format!(
                "relator {k} does not map to a conjugate of a relator"
            )));
        }
    }
    Ok(())
}

/// How a simple closed curve sits on the surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurveKind {
    /// The curve separates; bending conjugates the generators listed on the
    /// far side.
    Separating { side: Vec<usize> },
    /// The curve does not separate; bending multiplies the image of the
    /// stable letter crossing it.
    Nonseparating { stable: usize },
}

/// A curve on the surface: its word plus its topological kind.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveDatum {
    pub word: Word,
    pub kind: CurveKind,
}

impl CurveDatum {
    fn validate(&self, p: &Presentation) -> Result<(), SurfaceError> {
        for l in self.word.letters() {
            if l.generator >= p.rank() {
                return Err(SurfaceError::CurveInvalid("curve letter out of range".into()));
            }
        }
        if self.word.free_reduced().is_identity() {
            return Err(SurfaceError::CurveInvalid("curve word is trivial".into()));
        }
        match &self.kind {
            CurveKind::Separating { side } => {
                if side.is_empty() {
                    return Err(SurfaceError::CurveInvalid("empty far side".into()));
                }
                for &k in side {
                    if k >= p.rank() {
                        return Err(SurfaceError::CurveInvalid("side generator out of range".into()));
                    }
                }
            }
            CurveKind::Nonseparating { stable } => {
                if *stable >= p.rank() {
                    return Err(SurfaceError::CurveInvalid("stable letter out of range".into()));
                }
            }
        }
        Ok(())
    }
}

fn trace(m: &RingMatrix<Rational>) -> Rational {
    let mut t = Rational::zero();
    for k in 0..m.rows() {
        t = t + m[(k, k)].clone();
    }
    t
}

/// A validated integral symplectic representation of a presentation.
#[derive(Debug, Clone)]
pub struct Representation {
    presentation: Presentation,
    form: SkewFormZ,
    form_inv: RingMatrix<Rational>,
    images: Vec<RingMatrix<Rational>>,
    inverses: Vec<RingMatrix<Rational>>,
}

impl Representation {
    /// Validates sizes, integrality, the symplectic condition for every
    /// generator image, and every relator.
    pub fn new(
        presentation: Presentation,
        form: SkewFormZ,
        images: Vec<RingMatrix<Rational>>,
    ) -> Result<Self, SurfaceError> {
        if images.len() != presentation.rank() {
            return Err(SurfaceError::CountMismatch(format!(
                "{} images for {} generators",
                images.len(),
                presentation.rank()
            )));
        }
        let n = form.size();
        for (k, m) in images.iter().enumerate() {
            let name = &presentation.names()[k];
            if !m.is_square() || m.rows() != n {
                return Err(SurfaceError::CountMismatch(format!(
                    "image of {name} has size {}x{}, form has size {n}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.entries().iter().all(|e| e.is_integer()) {
                return Err(SurfaceError::NotIntegral(format!("image of {name}")));
            }
            if !is_symplectic(m, &form) {
                return Err(SurfaceError::NotSymplectic(format!("image of {name}")));
            }
        }
        let form_inv = form.matrix().inverse()?;
        let inverses = images
            .iter()
            .map(|m| form_inv.mul(&m.transpose()).mul(form.matrix()))
            .collect();
        let rep = Representation { presentation, form, form_inv, images, inverses };
        for (k, r) in rep.presentation.relators().iter().enumerate() {
            if !rep.evaluate(r).is_identity() {
                return Err(SurfaceError::RelatorBroken(format!("relator {k}")));
            }
        }
        Ok(rep)
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn form(&self) -> &SkewFormZ {
        &self.form
    }

    pub fn images(&self) -> &[RingMatrix<Rational>] {
        &self.images
    }

    pub fn degree(&self) -> usize {
        self.form.size()
    }

    /// The inverse of a symplectic matrix, computed through the form:
    /// `m⁻¹ = F⁻¹·mᵀ·F`.  Integral whenever m is.
    pub fn symplectic_inverse(&self, m: &RingMatrix<Rational>) -> RingMatrix<Rational> {
        self.form_inv.mul(&m.transpose()).mul(self.form.matrix())
    }

    /// Multiplies out a word, using the cached symplectic inverses.
    pub fn evaluate(&self, w: &Word) -> RingMatrix<Rational> {
        let mut acc = RingMatrix::identity(self.degree());
        for l in w.letters() {
            assert!(l.generator < self.images.len(), "letter out of range");
            let factor = if l.inverse { &self.inverses[l.generator] } else { &self.images[l.generator] };
            acc = acc.mul(factor);
        }
        acc
    }

    /// Do all relators evaluate to the identity?
    pub fn check_relators(&self) -> bool {
        self.presentation
            .relators()
            .iter()
            .all(|r| self.evaluate(r).is_identity())
    }

    /// Conjugates every generator image by an integral matrix preserving the
    /// form exactly.  Such a conjugation keeps images integral (the inverse
    /// `c⁻¹ = F⁻¹cᵀF` is integral too) and satisfies the same relators, so
    /// the result passes full revalidation.
    pub fn conjugated(&self, c: &RingMatrix<Rational>) -> Result<Representation, SurfaceError> {
        if !c.is_square() || c.rows() != self.degree() {
            return Err(SurfaceError::CountMismatch(format!(
                "conjugator has size {}x{}, representation has degree {}",
                c.rows(),
                c.cols(),
                self.degree()
            )));
        }
        if !c.entries().iter().all(|e| e.is_integer()) {
            return Err(SurfaceError::NotIntegral("conjugator".to_string()));
        }
        if !is_symplectic(c, &self.form) {
            return Err(SurfaceError::NotSymplectic("conjugator".to_string()));
        }
        let c_inv = self.symplectic_inverse(c);
        let images = self.images.iter().map(|m| c_inv.mul(m).mul(c)).collect();
        Representation::new(self.presentation.clone(), self.form.clone(), images)
    }

    /// Conjugation-invariant fingerprint: the sorted traces of all generator
    /// images and of all pairwise products.
    pub fn trace_profile(&self) -> Vec<Rational> {
        let mut profile = Vec::new();
        for m in &self.images {
            profile.push(trace(m));
        }
        for i in 0..self.images.len() {
            for j in i..self.images.len() {
                profile.push(trace(&self.images[i].mul(&self.images[j])));
            }
        }
        profile.sort();
        profile
    }
}

/// Precomposes a representation with a validated word map: generator k of
/// the new representation maps to the evaluation of `images[k]`.
pub fn precompose(rep: &Representation, map: &[Word]) -> Result<Representation, SurfaceError> {
    check_word_map(rep.presentation(), map)?;
    let images = map.iter().map(|w| rep.evaluate(w)).collect();
    Representation::new(rep.presentation().clone(), rep.form().clone(), images)
}

/// Bends a representation along a curve by a symplectic matrix commuting
/// with the curve's image.  Nonseparating curves multiply the stable
/// letter's image on the right; separating curves conjugate the far side.
/// The result is re-validated from scratch.
pub fn bend(
    rep: &Representation,
    curve: &CurveDatum,
    b: &RingMatrix<Rational>,
) -> Result<Representation, SurfaceError> {
    curve.validate(rep.presentation())?;
    if !b.entries().iter().all(|e| e.is_integer()) {
        return Err(SurfaceError::NotIntegral("bending element".into()));
    }
    if !is_symplectic(b, rep.form()) {
        return Err(SurfaceError::BendInvalid("bending element does not preserve the form".into()));
    }
    let curve_matrix = rep.evaluate(&curve.word);
    if b.mul(&curve_matrix) != curve_matrix.mul(b) {
        return Err(SurfaceError::BendInvalid(
            "bending element does not commute with the curve image".into(),
        ));
    }
    let mut images = rep.images().to_vec();
    match &curve.kind {
        CurveKind::Nonseparating { stable } => {
            images[*stable] = images[*stable].mul(b);
        }
        CurveKind::Separating { side } => {
            let b_inv = rep.symplectic_inverse(b);
            for &k in side {
                images[k] = b.mul(&images[k]).mul(&b_inv);
            }
        }
    }
    Representation::new(rep.presentation().clone(), rep.form().clone(), images)
}

/// Bends by b, b², …, b^count, each from the original representation.
pub fn iterate_bends(
    rep: &Representation,
    curve: &CurveDatum,
    b: &RingMatrix<Rational>,
    count: usize,
) -> Result<Vec<Representation>, SurfaceError> {
    let mut out = Vec::with_capacity(count);
    let mut power = b.clone();
    for _ in 0..count {
        out.push(bend(rep, curve, &power)?);
        power = power.mul(b);
    }
    Ok(out)
}

/// Are the two representations distinguishable by their trace profiles?
/// A `true` answer certifies they are not conjugate inside the symplectic
/// group; `false` only means this invariant does not separate them.
pub fn check_distinct(a: &Representation, b: &Representation) -> bool {
    a.trace_profile() != b.trace_profile()
}

/// A parsed representation datum: algebra and pairing element, surface
/// presentation, a norm-one order element per generator and copy, the
/// bending curve, and optional named word maps.
#[derive(Debug, Clone)]
pub struct SurfaceDatum {
    pub algebra: QuaternionAlgebra,
    pub mu: Quaternion,
    pub presentation: Presentation,
    pub assignment: Vec<Vec<Quaternion>>,
    pub curve: CurveDatum,
    pub maps: Vec<(String, Vec<Word>)>,
}

/// The reference datum shipped with the crate: the algebra with i² = 3 and
/// j² = −1, the free group on g and h, the assignment g ↦ 2 + i, h ↦ j, and
/// the nonseparating curve g crossed by h.
pub const BUNDLED_DATUM: &str = "\
# Reference datum: indefinite division algebra, rank-two free surface
# group, norm-one assignment, nonseparating bending curve.
[algebra]
params: 3 -1
mu: 0 1 0 0

[presentation]
generators: g h

[assignment]
g: 2 1 0 0
h: 0 0 1 0

[curve]
word: g
kind: nonseparating
stable: h

[maps]
twist: g, h g
";

/// Parses the reference datum.
pub fn bundled_datum() -> SurfaceDatum {
    SurfaceDatum::parse(BUNDLED_DATUM).expect("bundled datum must parse")
}

/// A second shipped datum on the same algebra whose second generator
/// 2 + ij does not normalise the subfield generated by the curve image.
/// Bending this datum produces representations that generate the full
/// symplectic group modulo every small good prime, so it demonstrates the
/// dense-certified and distinct-orbits paths of the toolkit.
pub const INDEPENDENT_DATUM: &str = "\
# Independence datum: same algebra and curve as the reference datum, but
# the second generator mangles the curve's eigenvalue field, so bends of
# this representation escape every invariant subfield structure.
[algebra]
params: 3 -1
mu: 0 1 0 0

[presentation]
generators: g h

[assignment]
g: 2 1 0 0
h: 2 0 0 1

[curve]
word: g
kind: nonseparating
stable: h

[maps]
twist: g, h g
";

/// Parses the independence datum.
pub fn independent_datum() -> SurfaceDatum {
    SurfaceDatum::parse(INDEPENDENT_DATUM).expect("independent datum must parse")
}

impl SurfaceDatum {
    /// Parses the sectioned key/value format of [`BUNDLED_DATUM`].  `#`
    /// starts a comment; sections may appear in any order.
    pub fn parse(text: &str) -> Result<Self, SurfaceError> {
        let mut sections: std::collections::BTreeMap<String, Vec<String>> =
            std::collections::BTreeMap::new();
        let mut current: Option<String> = None;
        for raw in text.lines() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_string();
                if sections.contains_key(&name) {
                    return Err(SurfaceError::Parse(format!("duplicate section [{name}]")));
                }
                sections.insert(name.clone(), Vec::new());
                current = Some(name);
                continue;
            }
            match &current {
                Some(name) => sections.get_mut(name).unwrap().push(line.to_string()),
                None => {
                    return Err(SurfaceError::Parse(format!(
                        "content before any section: '{line}'"
                    )))
                }
            }
        }
        let section = |name: &str| -> Result<&Vec<String>, SurfaceError> {
            sections
                .get(name)
                .ok_or_else(|| SurfaceError::Parse(format!("missing section [{name}]")))
        };
        let keyed = |lines: &[String], key: &str| -> Result<String, SurfaceError> {
            lines
                .iter()
                .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(':')))
                .map(|v| v.trim().to_string())
                .ok_or_else(|| SurfaceError::Parse(format!("missing key '{key}'")))
        };

        // [algebra]: structure parameters and the pairing element.
        let algebra_lines = section("algebra")?;
        let params = keyed(algebra_lines, "params")?;
        let parts: Vec<&str> = params.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(SurfaceError::Parse("params needs exactly two values".into()));
        }
        let a = crate::exact::parse_rational(parts[0])?;
        let b = crate::exact::parse_rational(parts[1])?;
        let algebra = QuaternionAlgebra::new(a, b)?;
        let mu_coords = parse_coords(&keyed(algebra_lines, "mu")?)?;
        let mu = algebra.from_coords(mu_coords);

        // [presentation]: generator names and optional relators.
        let pres_lines = section("presentation")?;
        let names: Vec<String> = keyed(pres_lines, "generators")?
            .split_whitespace()
            .map(|s| s.to_string())
            .collect();
        let mut relators = Vec::new();
        for line in pres_lines {
            if let Some(r) = line.strip_prefix("relator").and_then(|r| r.strip_prefix(':')) {
                relators.push(Word::parse(r, &names)?);
            }
        }
        let presentation = Presentation::new(names, relators)?;

        // [assignment]: per-generator, per-copy quaternion coordinates.
        let assign_lines = section("assignment")?;
        let mut assignment = vec![Vec::new(); presentation.rank()];
        let mut seen = vec![false; presentation.rank()];
        for line in assign_lines {
            let (name, rest) = line
                .split_once(':')
                .ok_or_else(|| SurfaceError::Parse(format!("bad assignment line '{line}'")))?;
            let k = presentation
                .index_of(name.trim())
                .ok_or_else(|| SurfaceError::UnknownGenerator(name.trim().to_string()))?;
            if seen[k] {
                return Err(SurfaceError::Parse(format!(
                    "duplicate assignment for '{}'",
                    name.trim()
                )));
            }
            seen[k] = true;
            for copy in rest.split('|') {
                let coords = parse_coords(copy)?;
                assignment[k].push(algebra.from_coords(coords));
            }
        }
        for (k, done) in seen.iter().enumerate() {
            if !done {
                return Err(SurfaceError::Parse(format!(
                    "missing assignment for '{}'",
                    presentation.names()[k]
                )));
            }
        }
        let copies = assignment[0].len();
        if copies == 0 || assignment.iter().any(|a| a.len() != copies) {
            return Err(SurfaceError::CountMismatch(
                "all generators need the same positive number of copies".into(),
            ));
        }

        // [curve]: word plus kind-specific data.
        let curve_lines = section("curve")?;
        let word = Word::parse(&keyed(curve_lines, "word")?, presentation.names())?;
        let kind = match keyed(curve_lines, "kind")?.as_str() {
            "nonseparating" => {
                let stable_name = keyed(curve_lines, "stable")?;
                let stable = presentation
                    .index_of(&stable_name)
                    .ok_or(SurfaceError::UnknownGenerator(stable_name))?;
                CurveKind::Nonseparating { stable }
            }
            "separating" => {
                let side_names = keyed(curve_lines, "side")?;
                let mut side = Vec::new();
                for n in side_names.split_whitespace() {
                    side.push(
                        presentation
                            .index_of(n)
                            .ok_or_else(|| SurfaceError::UnknownGenerator(n.to_string()))?,
                    );
                }
                CurveKind::Separating { side }
            }
            other => {
                return Err(SurfaceError::Parse(format!("unknown curve kind '{other}'")));
            }
        };
        let curve = CurveDatum { word, kind };
        curve.validate(&presentation)?;

        // [maps]: optional named word maps, images comma-separated.
        let mut maps = Vec::new();
        if let Some(map_lines) = sections.get("maps") {
            for line in map_lines {
                let (name, rest) = line
                    .split_once(':')
                    .ok_or_else(|| SurfaceError::Parse(format!("bad map line '{line}'")))?;
                let words: Result<Vec<Word>, SurfaceError> = rest
                    .split(',')
                    .map(|w| Word::parse(w, presentation.names()))
                    .collect();
                let words = words?;
                check_word_map(&presentation, &words)?;
                maps.push((name.trim().to_string(), words));
            }
        }
        Ok(SurfaceDatum { algebra, mu, presentation, assignment, curve, maps })
    }

    /// Reads and parses a datum file.
    pub fn from_file(path: &std::path::Path) -> Result<Self, SurfaceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SurfaceError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn copies(&self) -> usize {
        self.assignment[0].len()
    }

    pub fn map_named(&self, name: &str) -> Option<&[Word]> {
        self.maps
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, w)| w.as_slice())
    }
}

fn parse_coords(text: &str) -> Result<[Rational; 4], SurfaceError> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != 4 {
        return Err(SurfaceError::Parse(format!(
            "expected 4 coordinates, got {} in '{text}'",
            parts.len()
        )));
    }
    let mut coords = std::array::from_fn(|_| Rational::zero());
    for (k, p) in parts.iter().enumerate() {
        coords[k] = crate::exact::parse_rational(p)?;
    }
    Ok(coords)
}

/// Builds the quaternionic model on the standard order and assembles the
/// block-diagonal representation of the datum: generator k acts by the
/// direct sum over copies of the action of its assigned elements, and the
/// form is the matching direct sum of the model's content-one form.
pub fn assemble_representation(
    datum: &SurfaceDatum,
) -> Result<(RightRegularModel, Representation), SurfaceError> {
    let order = OrderBasis::standard(datum.algebra.clone())?;
    assemble_with_order(datum, order)
}

/// Like [`assemble_representation`] but over an explicit order of the same
/// algebra, so that non-standard (file-supplied) orders can drive the model.
pub fn assemble_with_order(
    datum: &SurfaceDatum,
    order: OrderBasis,
) -> Result<(RightRegularModel, Representation), SurfaceError> {
    if order.algebra().a() != datum.algebra.a() || order.algebra().b() != datum.algebra.b() {
        return Err(SurfaceError::CountMismatch(
            "order is defined over a different algebra than the datum".to_string(),
        ));
    }
    let model = RightRegularModel::new(order, datum.mu.clone())?;
    let one = crate::exact::rat_int(1);
    for (k, copies) in datum.assignment.iter().enumerate() {
        for q in copies {
            let name = &datum.presentation.names()[k];
            if !model.order().contains(q) {
                return Err(SurfaceError::NotIntegral(format!("assignment of {name}")));
            }
            if q.nrd() != one {
                return Err(SurfaceError::NotUnitNorm(format!("assignment of {name}")));
            }
        }
    }
    let copies = datum.copies();
    let form_blocks: Vec<RingMatrix<Rational>> =
        vec![model.primitive_form().matrix().clone(); copies];
    let form = SkewFormZ::new(crate::exact::block_diag(&form_blocks))?;
    let images: Result<Vec<RingMatrix<Rational>>, SurfaceError> = datum
        .assignment
        .iter()
        .map(|copies| {
            let blocks: Vec<RingMatrix<Rational>> =
                copies.iter().map(|q| model.rho(q)).collect();
            phi_n(&blocks).map_err(SurfaceError::from)
        })
        .collect();
    let rep = Representation::new(datum.presentation.clone(), form, images?)?;
    Ok((model, rep))
}
