//! Projective cocycles of the Klein four-group acting on matrices over the
//! biquadratic ring ℚ[√a, √b], their ±1-valued factor sets, connecting maps
//! into sign cohomology for orthogonal and symplectic targets, and the
//! subalgebra of matrices fixed by the twisted action.
//!
//! The central example is the map T^{a,b} sending the four group elements to
//!
//!   id ↦ I,   flip√a ↦ [0 1; 1 0],   flip√b ↦ [1 0; 0 −1],
//!   flip both ↦ [0 1; −1 0].
//!
//! It satisfies the cocycle identity only up to sign; the table of signs is a
//! 2-cocycle whose class is the obstruction measured by the quaternion
//! algebra (a, b), and whose matrix-fixed points recover that algebra.

use crate::exact::{
    galois_act, is_rational_square, rat_int, BiquadElement, ExactError, GaloisElement, Rational,
    Ring, RingMatrix,
};
use thiserror::Error;

/// Errors from cocycle construction and the connecting maps.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CocycleError {
    #[error("parameter {0} is a rational square; the sign-flip group does not act faithfully")]
    SquareParameter(String),
    #[error("cocycle parameters must be nonzero")]
    ZeroParameter,
    #[error("cocycle values must share one parameter pair")]
    MixedParameters,
    #[error("cocycle values must be square matrices of one size")]
    RaggedValues,
    #[error("the identity must map to the identity matrix")]
    NotNormalized,
    #[error("value at group index {0} fails the {1} similitude precondition")]
    TargetPrecondition(usize, &'static str),
    #[error("symplectic targets need even matrix size, got {0}")]
    OddDimension(usize),
    #[error("defect at group pair ({0}, {1}) is not ±1 times the expected value")]
    NonScalarDefect(usize, usize),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Apply a sign-flip group element to every entry of a matrix.
pub fn act_on_matrix(
    s: &GaloisElement,
    m: &RingMatrix<BiquadElement>,
) -> RingMatrix<BiquadElement> {
    m.map(|e| galois_act(s, e))
}

/// A map from the Klein four-group to square matrices over ℚ[√a, √b],
/// normalized so the identity goes to the identity matrix. It need not be an
/// exact homomorphism-twisted cocycle: the interesting ones satisfy the
/// cocycle identity only up to sign, and [`factor_set`] measures the failure.
#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle1 {
    a: Rational,
    b: Rational,
    n: usize,
    values: [RingMatrix<BiquadElement>; 4],
}

impl Cocycle1 {
    /// Values are indexed by [`GaloisElement::index`]: identity, flip √a,
    /// flip √b, flip both.
    pub fn new(
        a: Rational,
        b: Rational,
        values: [RingMatrix<BiquadElement>; 4],
    ) -> Result<Self, CocycleError> {
        if a.is_zero() || b.is_zero() {
            return Err(CocycleError::ZeroParameter);
        }
        let n = values[0].rows();
        for v in &values {
            if !v.is_square() || v.rows() != n {
                return Err(CocycleError::RaggedValues);
            }
            for e in v.entries() {
                if let Some(p) = e.params() {
                    if p != &(a.clone(), b.clone()) {
                        return Err(CocycleError::MixedParameters);
                    }
                }
            }
        }
        if !values[0].is_identity() {
            return Err(CocycleError::NotNormalized);
        }
        Ok(Cocycle1 { a, b, n, values })
    }

    pub fn params(&self) -> (&Rational, &Rational) {
        (&self.a, &self.b)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn value(&self, s: &GaloisElement) -> &RingMatrix<BiquadElement> {
        &self.values[s.index()]
    }

    pub fn values(&self) -> &[RingMatrix<BiquadElement>; 4] {
        &self.values
    }
}

fn biquad_const(a: &Rational, b: &Rational, v: i64) -> BiquadElement {
    BiquadElement::new(a, b, [rat_int(v), rat_int(0), rat_int(0), rat_int(0)])
}

/// The 2×2 projective cocycle T^{a,b} described in the module docs, for any
/// nonzero parameters (no square check; see [`t_cocycle`]).
pub fn t_cocycle_formal(a: &Rational, b: &Rational) -> Result<Cocycle1, CocycleError> {
    if a.is_zero() || b.is_zero() {
        return Err(CocycleError::ZeroParameter);
    }
    let c = |v: i64| biquad_const(a, b, v);
    let values = [
        RingMatrix::from_rows(vec![vec![c(1), c(0)], vec![c(0), c(1)]]),
        RingMatrix::from_rows(vec![vec![c(0), c(1)], vec![c(1), c(0)]]),
        RingMatrix::from_rows(vec![vec![c(1), c(0)], vec![c(0), c(-1)]]),
        RingMatrix::from_rows(vec![vec![c(0), c(1)], vec![c(-1), c(0)]]),
    ];
    Cocycle1::new(a.clone(), b.clone(), values)
}

/// The 2×2 projective cocycle T^{a,b}, requiring a, b, and ab to be
/// non-squares so that the four sign flips are genuinely distinct field
/// automorphisms.
pub fn t_cocycle(a: &Rational, b: &Rational) -> Result<Cocycle1, CocycleError> {
    if a.is_zero() || b.is_zero() {
        return Err(CocycleError::ZeroParameter);
    }
    for v in [a.clone(), b.clone(), a * b] {
        if is_rational_square(&v) {
            return Err(CocycleError::SquareParameter(crate::exact::format_rational(&v)));
        }
    }
    t_cocycle_formal(a, b)
}

/// Whether the values satisfy the cocycle identity up to sign:
/// M_s · s(M_t) = ±M_{st} for all pairs.
pub fn is_cocycle(c: &Cocycle1) -> bool {
    factor_signs(&c.values).is_ok()
}

/// A function (s, t) ↦ ±1 on pairs of sign-flip group elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorSet2 {
    signs: [[i8; 4]; 4],
}

impl FactorSet2 {
    pub fn new(signs: [[i8; 4]; 4]) -> Self {
        assert!(
            signs.iter().flatten().all(|&s| s == 1 || s == -1),
            "factor set values must be ±1"
        );
        FactorSet2 { signs }
    }

    pub fn trivial() -> Self {
        FactorSet2 { signs: [[1; 4]; 4] }
    }

    pub fn get(&self, s: &GaloisElement, t: &GaloisElement) -> i8 {
        self.signs[s.index()][t.index()]
    }

    pub fn signs(&self) -> &[[i8; 4]; 4] {
        &self.signs
    }

    /// Pointwise product (the group law on sign-valued 2-cochains).
    pub fn mul(&self, rhs: &Self) -> Self {
        let mut signs = [[1i8; 4]; 4];
        for s in 0..4 {
            for t in 0..4 {
                signs[s][t] = self.signs[s][t] * rhs.signs[s][t];
            }
        }
        FactorSet2 { signs }
    }

    pub fn is_trivial(&self) -> bool {
        self.signs.iter().flatten().all(|&s| s == 1)
    }

    /// The 2-cocycle identity c(s,t)·c(st,u) = c(t,u)·c(s,tu) over all 64
    /// triples (the group action on ±1 is trivial).
    pub fn is_two_cocycle(&self) -> bool {
        let all = GaloisElement::all();
        for s in all {
            for t in all {
                for u in all {
                    let lhs = self.get(&s, &t) * self.get(&s.compose(&t), &u);
                    let rhs = self.get(&t, &u) * self.get(&s, &t.compose(&u));
                    if lhs != rhs {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// The coboundary of a sign map m: (s, t) ↦ m(s)·m(t)·m(st).
    pub fn coboundary(m: &[i8; 4]) -> Self {
        assert!(m.iter().all(|&s| s == 1 || s == -1), "sign map values must be ±1");
        let all = GaloisElement::all();
        let mut signs = [[1i8; 4]; 4];
        for s in all {
            for t in all {
                signs[s.index()][t.index()] =
                    m[s.index()] * m[t.index()] * m[s.compose(&t).index()];
            }
        }
        FactorSet2 { signs }
    }

    /// Searches all 16 sign maps for one whose coboundary is this factor set.
    pub fn coboundary_witness(&self) -> Option<[i8; 4]> {
        for bits in 0..16u32 {
            let m = [
                if bits & 1 == 0 { 1 } else { -1 },
                if bits & 2 == 0 { 1 } else { -1 },
                if bits & 4 == 0 { 1 } else { -1 },
                if bits & 8 == 0 { 1 } else { -1 },
            ];
            if Self::coboundary(&m) == *self {
                return Some(m);
            }
        }
        None
    }

    pub fn is_coboundary(&self) -> bool {
        self.coboundary_witness().is_some()
    }
}

impl std::fmt::Display for FactorSet2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for row in &self.signs {
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", if *v == 1 { '+' } else { '-' })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Two factor sets represent the same sign-cohomology class when they differ
/// by a coboundary.
pub fn factor_set_equivalent(f: &FactorSet2, g: &FactorSet2) -> bool {
    f.mul(g).is_coboundary()
}

fn sign_of_scalar_defect(
    p: &RingMatrix<BiquadElement>,
    q: &RingMatrix<BiquadElement>,
) -> Option<i8> {
    if p == q {
        Some(1)
    } else if *p == q.neg() {
        Some(-1)
    } else {
        None
    }
}

fn factor_signs(values: &[RingMatrix<BiquadElement>; 4]) -> Result<FactorSet2, CocycleError> {
    let all = GaloisElement::all();
    let mut signs = [[1i8; 4]; 4];
    for s in all {
        for t in all {
            let p = values[s.index()].mul(&act_on_matrix(&s, &values[t.index()]));
            let q = &values[s.compose(&t).index()];
            signs[s.index()][t.index()] = sign_of_scalar_defect(&p, q)
                .ok_or(CocycleError::NonScalarDefect(s.index(), t.index()))?;
        }
    }
    Ok(FactorSet2::new(signs))
}

/// The factor set of a projective cocycle: the table of signs c(s, t) with
/// M_s · s(M_t) = c(s, t) · M_{st}. Errors if some defect is not ±1.
pub fn factor_set(c: &Cocycle1) -> Result<FactorSet2, CocycleError> {
    factor_signs(&c.values)
}

/// Which projective target group a connecting map lands in. The tag fixes the
/// similitude precondition imposed on every representative matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetTag {
    /// Meᵀ·M = ±I: representatives are orthogonal up to sign.
    Orthogonal,
    /// Mᵀ·J·M = ±J for the standard skew form J (block-diagonal 2×2 blocks
    /// [0 1; −1 0]): representatives are symplectic up to sign.
    Symplectic,
}

fn standard_skew_form(a: &Rational, b: &Rational, half: usize) -> RingMatrix<BiquadElement> {
    let c = |v: i64| biquad_const(a, b, v);
    let block = RingMatrix::from_rows(vec![vec![c(0), c(1)], vec![c(-1), c(0)]]);
    crate::exact::kronecker(&RingMatrix::identity(half), &block)
}

fn check_target(c: &Cocycle1, target: TargetTag) -> Result<(), CocycleError> {
    match target {
        TargetTag::Orthogonal => {
            let id = RingMatrix::identity(c.n);
            for (k, m) in c.values.iter().enumerate() {
                let g = m.transpose().mul(m);
                if g != id && g != id.neg() {
                    return Err(CocycleError::TargetPrecondition(k, "orthogonal"));
                }
            }
        }
        TargetTag::Symplectic => {
            if c.n % 2 != 0 {
                return Err(CocycleError::OddDimension(c.n));
            }
            let j = standard_skew_form(&c.a, &c.b, c.n / 2);
            for (k, m) in c.values.iter().enumerate() {
                let g = m.transpose().mul(&j).mul(m);
                if g != j && g != j.neg() {
                    return Err(CocycleError::TargetPrecondition(k, "symplectic"));
                }
            }
        }
    }
    Ok(())
}

/// Connecting map into sign cohomology: checks the similitude precondition
/// for the chosen target, then extracts the factor set of the
/// representatives.
pub fn connecting_factor_set(c: &Cocycle1, target: TargetTag) -> Result<FactorSet2, CocycleError> {
    check_target(c, target)?;
    factor_set(c)
}

/// Same connecting map evaluated on re-signed representatives ε_σ·M_σ; the
/// result differs from the original by the coboundary of ε, exhibiting
/// well-definedness of the cohomology class.
pub fn connecting_factor_set_with_signs(
    c: &Cocycle1,
    target: TargetTag,
    eps: &[i8; 4],
) -> Result<FactorSet2, CocycleError> {
    assert!(eps.iter().all(|&s| s == 1 || s == -1), "sign choices must be ±1");
    check_target(c, target)?;
    let scaled: [RingMatrix<BiquadElement>; 4] = std::array::from_fn(|k| {
        if eps[k] == 1 {
            c.values[k].clone()
        } else {
            c.values[k].neg()
        }
    });
    factor_signs(&scaled)
}

/// ∂_n: the connecting map for orthogonal-up-to-sign representatives.
pub fn connecting_partial(c: &Cocycle1) -> Result<FactorSet2, CocycleError> {
    connecting_factor_set(c, TargetTag::Orthogonal)
}

/// δ_{2n}: the connecting map for symplectic-up-to-sign representatives.
pub fn connecting_delta(c: &Cocycle1) -> Result<FactorSet2, CocycleError> {
    connecting_factor_set(c, TargetTag::Symplectic)
}

/// Entrywise Kronecker product of two families over the same parameters:
/// (η ⊗ ξ)_σ = η_σ ⊗ ξ_σ.
pub fn kronecker_cocycle(eta: &Cocycle1, xi: &Cocycle1) -> Result<Cocycle1, CocycleError> {
    if eta.a != xi.a || eta.b != xi.b {
        return Err(CocycleError::MixedParameters);
    }
    let values: [RingMatrix<BiquadElement>; 4] = std::array::from_fn(|k| {
        crate::exact::kronecker(&eta.values[k], &xi.values[k])
    });
    Cocycle1::new(eta.a.clone(), eta.b.clone(), values)
}

/// The product identity for connecting maps: for η orthogonal up to sign
/// (size n) and ξ symplectic up to sign (size 2), the Kronecker lift η ⊗ ξ is
/// symplectic up to sign for the standard skew form on 2n, and
///
///   δ_{2n}(η ⊗ ξ) = ∂_n(η) · δ₂(ξ)
///
/// holds exactly on representatives, by the mixed-product rule
/// (A ⊗ B)(C ⊗ D) = AC ⊗ BD. Returns whether the tables agree.
pub fn product_identity_check(eta: &Cocycle1, xi: &Cocycle1) -> Result<bool, CocycleError> {
    if xi.n != 2 {
        return Err(CocycleError::RaggedValues);
    }
    let partial = connecting_partial(eta)?;
    let delta2 = connecting_delta(xi)?;
    let lifted = kronecker_cocycle(eta, xi)?;
    let delta = connecting_delta(&lifted)?;
    Ok(delta == partial.mul(&delta2))
}

/// ℚ-basis of the fixed algebra of a projective cocycle: all matrices M over
/// ℚ[√a, √b] with M_σ · σ(M) = M · M_σ for every σ. Because conjugation by
/// M_σ kills the sign ambiguity, this is well-defined for projective
/// cocycles; for T^{a,b} it is a 4-dimensional algebra isomorphic to the
/// quaternion algebra (a, b).
pub fn fixed_algebra(c: &Cocycle1) -> Result<Vec<RingMatrix<BiquadElement>>, CocycleError> {
    let n = c.n;
    let unknowns = 4 * n * n;
    let coord_basis = [
        BiquadElement::new(&c.a, &c.b, [rat_int(1), rat_int(0), rat_int(0), rat_int(0)]),
        BiquadElement::sqrt_a(&c.a, &c.b),
        BiquadElement::sqrt_b(&c.a, &c.b),
        BiquadElement::sqrt_ab(&c.a, &c.b),
    ];
    // Stack the ℚ-linear conditions f(σ)·σ(E) − E·f(σ) = 0 over the three
    // nontrivial σ, one column per coordinate unknown of M.
    let mut rows_out: Vec<Vec<Rational>> = vec![Vec::with_capacity(unknowns); 3 * unknowns];
    for col in 0..unknowns {
        let k = col % 4;
        let rc = col / 4;
        let (r0, c0) = (rc / n, rc % n);
        let mut e = RingMatrix::<BiquadElement>::zero(n, n);
        e[(r0, c0)] = coord_basis[k].clone();
        for (si, s) in GaloisElement::all().into_iter().enumerate().skip(1) {
            let f = &c.values[s.index()];
            let g = f.mul(&act_on_matrix(&s, &e)).sub(&e.mul(f));
            for i in 0..n {
                for j in 0..n {
                    let coeffs = g[(i, j)].coeffs();
                    for l in 0..4 {
                        let row = ((si - 1) * n * n + i * n + j) * 4 + l;
                        rows_out[row].push(coeffs[l].clone());
                    }
                }
            }
        }
    }
    let system = RingMatrix::from_rows(rows_out);
    let kernel = system.kernel()?;
    let mut basis = Vec::with_capacity(kernel.len());
    for vec in kernel {
        let mut m = RingMatrix::<BiquadElement>::zero(n, n);
        for (col, coeff) in vec.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            let k = col % 4;
            let rc = col / 4;
            let (r0, c0) = (rc / n, rc % n);
            let term = coord_basis[k].mul(&BiquadElement::constant(coeff.clone()));
            m[(r0, c0)] = m[(r0, c0)].add(&term);
        }
        basis.push(m);
    }
    Ok(basis)
}
