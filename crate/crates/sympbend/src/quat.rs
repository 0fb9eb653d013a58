//! Rational quaternion algebras (a, b): the four-dimensional algebra with
//! basis 1, i, j, ij over ℚ subject to i² = a, j² = b, ij = −ji; together with
//! orders (integral lattices closed under multiplication), norm-one elements
//! of the real quadratic subring ℤ[i] found by Pell search, and the splitting
//! of the algebra into 2×2 matrices over the biquadratic ring.
//!
//! Ramification is computed eagerly from Hilbert symbols at the finitely many
//! candidate places dividing 2·a·b (and the archimedean place); it determines
//! both whether the algebra is division and whether it is indefinite.

use crate::exact::{
    format_rational, hilbert_symbol, is_rational_square, parse_rational, rat_int, squarefree_part,
    BiquadElement, ExactError, Place, Rational, Ring, RingMatrix,
};
use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::Signed;
use thiserror::Error;

/// Errors from quaternion-algebra and order construction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuatError {
    #[error("quaternion algebra parameters must be nonzero")]
    ZeroParameter,
    #[error("order basis must begin with the unit 1")]
    BasisUnit,
    #[error("order basis is degenerate (elements are linearly dependent)")]
    DegenerateBasis,
    #[error("standard order needs integer parameters, got a = {0}, b = {1}")]
    NonIntegralParameters(String, String),
    #[error("norm-one search needs a positive nonsquare integer, got {0}")]
    BadPellParameter(String),
    #[error("malformed order description: {0}")]
    Parse(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// The quaternion algebra (a, b) over ℚ with its ramified places precomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct QuaternionAlgebra {
    a: Rational,
    b: Rational,
    ramified: Vec<Place>,
}

fn prime_divisors(n: &BigInt) -> Vec<u64> {
    let mut m = n.abs();
    let mut out = Vec::new();
    let mut d = BigInt::from(2u64);
    while &d * &d <= m {
        if (&m % &d).is_zero() {
            out.push(u64::try_from(&d).expect("prime divisor fits u64"));
            while (&m % &d).is_zero() {
                m /= &d;
            }
        }
        d += 1;
    }
    if m > BigInt::from(1) {
        out.push(u64::try_from(&m).expect("prime divisor fits u64"));
    }
    out
}

impl QuaternionAlgebra {
    /// Builds (a, b) for any nonzero rational parameters and computes the set
    /// of ramified places. Split algebras (matrix algebras) are permitted;
    /// callers that need a division algebra check [`Self::is_division`].
    pub fn new(a: Rational, b: Rational) -> Result<Self, QuatError> {
        if a.is_zero() || b.is_zero() {
            return Err(QuatError::ZeroParameter);
        }
        let a0 = squarefree_part(&a)?;
        let b0 = squarefree_part(&b)?;
        // The symbol is +1 at every odd prime where both parameters are
        // units, so only 2, the divisors of a0·b0, and ∞ can ramify.
        let mut candidates = vec![2u64];
        for p in prime_divisors(&(&a0 * &b0)) {
            if p != 2 {
                candidates.push(p);
            }
        }
        candidates.sort_unstable();
        let mut ramified = Vec::new();
        for p in candidates {
            if hilbert_symbol(&a, &b, Place::Finite(p))? == -1 {
                ramified.push(Place::Finite(p));
            }
        }
        if hilbert_symbol(&a, &b, Place::Infinity)? == -1 {
            ramified.push(Place::Infinity);
        }
        // Hilbert reciprocity: an algebra ramifies at an even number of
        // places. A failure here would mean the symbol itself is broken.
        assert!(ramified.len() % 2 == 0, "odd ramification set for ({a}, {b})");
        Ok(QuaternionAlgebra { a, b, ramified })
    }

    pub fn from_integers(a: i64, b: i64) -> Result<Self, QuatError> {
        Self::new(rat_int(a), rat_int(b))
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    /// The places where the algebra is a division algebra locally, ascending
    /// with the archimedean place last.
    pub fn ramified_places(&self) -> &[Place] {
        &self.ramified
    }

    /// A quaternion algebra is division iff it ramifies somewhere.
    pub fn is_division(&self) -> bool {
        !self.ramified.is_empty()
    }

    /// Indefinite means split at the archimedean place, i.e. the real algebra
    /// is 2×2 matrices; equivalently some parameter is positive.
    pub fn is_indefinite(&self) -> bool {
        !self.ramified.contains(&Place::Infinity)
    }

    pub fn scalar(&self, r: Rational) -> Quaternion {
        Quaternion::new(self, [r, rat_int(0), rat_int(0), rat_int(0)])
    }

    pub fn one(&self) -> Quaternion {
        self.scalar(rat_int(1))
    }

    pub fn zero_element(&self) -> Quaternion {
        self.scalar(rat_int(0))
    }

    pub fn i(&self) -> Quaternion {
        Quaternion::new(self, [rat_int(0), rat_int(1), rat_int(0), rat_int(0)])
    }

    pub fn j(&self) -> Quaternion {
        Quaternion::new(self, [rat_int(0), rat_int(0), rat_int(1), rat_int(0)])
    }

    pub fn ij(&self) -> Quaternion {
        Quaternion::new(self, [rat_int(0), rat_int(0), rat_int(0), rat_int(1)])
    }

    pub fn from_coords(&self, coords: [Rational; 4]) -> Quaternion {
        Quaternion::new(self, coords)
    }
}

/// An element x0 + x1·i + x2·j + x3·ij of a quaternion algebra. The parameters
/// travel with the element; binary operations panic on mismatched parents.
#[derive(Clone, Debug, PartialEq)]
pub struct Quaternion {
    a: Rational,
    b: Rational,
    x: [Rational; 4],
}

impl Quaternion {
    pub fn new(algebra: &QuaternionAlgebra, coords: [Rational; 4]) -> Self {
        Quaternion { a: algebra.a.clone(), b: algebra.b.clone(), x: coords }
    }

    pub fn coords(&self) -> &[Rational; 4] {
        &self.x
    }

    pub fn params(&self) -> (&Rational, &Rational) {
        (&self.a, &self.b)
    }

    fn assert_same_parent(&self, rhs: &Self) {
        assert!(
            self.a == rhs.a && self.b == rhs.b,
            "mixed quaternion algebras: ({}, {}) vs ({}, {})",
            self.a,
            self.b,
            rhs.a,
            rhs.b
        );
    }

    pub fn is_zero(&self) -> bool {
        self.x.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.assert_same_parent(rhs);
        let x = [
            &self.x[0] + &rhs.x[0],
            &self.x[1] + &rhs.x[1],
            &self.x[2] + &rhs.x[2],
            &self.x[3] + &rhs.x[3],
        ];
        Quaternion { a: self.a.clone(), b: self.b.clone(), x }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        Quaternion {
            a: self.a.clone(),
            b: self.b.clone(),
            x: [-&self.x[0], -&self.x[1], -&self.x[2], -&self.x[3]],
        }
    }

    pub fn scalar_mul(&self, s: &Rational) -> Self {
        Quaternion {
            a: self.a.clone(),
            b: self.b.clone(),
            x: [s * &self.x[0], s * &self.x[1], s * &self.x[2], s * &self.x[3]],
        }
    }

    /// Product in the basis 1, i, j, ij with i² = a, j² = b, ij = −ji.
    pub fn mul(&self, rhs: &Self) -> Self {
        self.assert_same_parent(rhs);
        let (a, b) = (&self.a, &self.b);
        let x = &self.x;
        let y = &rhs.x;
        let z0 = &x[0] * &y[0] + a * &(&x[1] * &y[1]) + b * &(&x[2] * &y[2])
            - a * &(b * &(&x[3] * &y[3]));
        let z1 = &x[0] * &y[1] + &x[1] * &y[0] + b * &(&x[3] * &y[2]) - b * &(&x[2] * &y[3]);
        let z2 = &x[0] * &y[2] + &x[2] * &y[0] + a * &(&x[1] * &y[3]) - a * &(&x[3] * &y[1]);
        let z3 = &x[0] * &y[3] + &x[3] * &y[0] + &x[1] * &y[2] - &x[2] * &y[1];
        Quaternion { a: self.a.clone(), b: self.b.clone(), x: [z0, z1, z2, z3] }
    }

    /// Standard involution: negates the non-scalar coordinates.
    pub fn conj(&self) -> Self {
        Quaternion {
            a: self.a.clone(),
            b: self.b.clone(),
            x: [self.x[0].clone(), -&self.x[1], -&self.x[2], -&self.x[3]],
        }
    }

    /// Reduced trace x + x̄ = 2·x0.
    pub fn trd(&self) -> Rational {
        &self.x[0] + &self.x[0]
    }

    /// Reduced norm x·x̄ = x0² − a·x1² − b·x2² + ab·x3².
    pub fn nrd(&self) -> Rational {
        let (a, b) = (&self.a, &self.b);
        let [x0, x1, x2, x3] = &self.x;
        x0 * x0 - a * &(x1 * x1) - b * &(x2 * x2) + a * &(b * &(x3 * x3))
    }

    /// x̄ / nrd(x); `None` when the reduced norm vanishes (which for a
    /// division algebra happens only at zero).
    pub fn inverse(&self) -> Option<Self> {
        let n = self.nrd();
        if n.is_zero() {
            return None;
        }
        Some(self.conj().scalar_mul(&n.recip()))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Quaternion {
            a: self.a.clone(),
            b: self.b.clone(),
            x: [rat_int(1), rat_int(0), rat_int(0), rat_int(0)],
        };
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Embedding of (a, b) into 2×2 matrices over the biquadratic ring
/// ℚ[√a, √b]:
///
/// x ↦ [ x0 + √a·x1        √b·x2 + √(ab)·x3 ]
///     [ √b·x2 − √(ab)·x3  x0 − √a·x1       ]
///
/// It is an algebra homomorphism, and the determinant of the image is the
/// reduced norm.
pub fn matrix_model(q: &Quaternion) -> RingMatrix<BiquadElement> {
    let (a, b) = (&q.a, &q.b);
    let c = |r: &Rational| BiquadElement::new(a, b, [r.clone(), rat_int(0), rat_int(0), rat_int(0)]);
    let sa = BiquadElement::sqrt_a(a, b);
    let sb = BiquadElement::sqrt_b(a, b);
    let sab = BiquadElement::sqrt_ab(a, b);
    let [x0, x1, x2, x3] = q.coords();
    let d0 = c(x0);
    let d1 = sa.mul(&c(x1));
    let d2 = sb.mul(&c(x2));
    let d3 = sab.mul(&c(x3));
    RingMatrix::from_rows(vec![
        vec![d0.add(&d1), d2.add(&d3)],
        vec![d2.sub(&d3), d0.sub(&d1)],
    ])
}

/// A ℤ-basis (1, e1, e2, e3) of a lattice in a quaternion algebra, with the
/// change-of-basis matrix cached for coordinate computations.
#[derive(Clone, Debug)]
pub struct OrderBasis {
    algebra: QuaternionAlgebra,
    elements: [Quaternion; 4],
    /// Inverse of the 4×4 matrix whose columns are the basis coordinates.
    inverse: RingMatrix<Rational>,
}

impl OrderBasis {
    /// Builds the basis, requiring the first element to be 1 and the four
    /// elements to be linearly independent over ℚ.
    pub fn new(algebra: QuaternionAlgebra, elements: [Quaternion; 4]) -> Result<Self, QuatError> {
        if elements[0] != algebra.one() {
            return Err(QuatError::BasisUnit);
        }
        let mat = RingMatrix::new(
            4,
            4,
            (0..4)
                .flat_map(|r| (0..4).map(move |c| (r, c)))
                .map(|(r, c)| elements[c].coords()[r].clone())
                .collect(),
        );
        let inverse = mat.inverse().map_err(|_| QuatError::DegenerateBasis)?;
        Ok(OrderBasis { algebra, elements, inverse })
    }

    /// The basis (1, i, j, ij); an order exactly when a and b are integers.
    pub fn standard(algebra: QuaternionAlgebra) -> Result<Self, QuatError> {
        if !algebra.a.is_integer() || !algebra.b.is_integer() {
            return Err(QuatError::NonIntegralParameters(
                format_rational(&algebra.a),
                format_rational(&algebra.b),
            ));
        }
        let elements = [algebra.one(), algebra.i(), algebra.j(), algebra.ij()];
        Self::new(algebra, elements)
    }

    pub fn algebra(&self) -> &QuaternionAlgebra {
        &self.algebra
    }

    pub fn elements(&self) -> &[Quaternion; 4] {
        &self.elements
    }

    /// Coordinates of q in this basis (always defined: the basis spans).
    pub fn coordinates_of(&self, q: &Quaternion) -> [Rational; 4] {
        let v = self.inverse.apply(q.coords());
        [v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()]
    }

    /// Whether q lies in the lattice spanned by the basis.
    pub fn contains(&self, q: &Quaternion) -> bool {
        self.coordinates_of(q).iter().all(|c| c.is_integer())
    }

    /// Whether the lattice is an order: closed under multiplication and under
    /// the standard involution (it contains 1 by construction).
    pub fn order_closure_check(&self) -> bool {
        for e in &self.elements {
            if !self.contains(&e.conj()) {
                return false;
            }
        }
        for ei in &self.elements {
            for ej in &self.elements {
                if !self.contains(&ei.mul(ej)) {
                    return false;
                }
            }
        }
        true
    }

    /// Parses an order description: an "a b" header line, then four lines of
    /// four rationals giving basis coordinates. '#' starts a comment.
    pub fn parse(text: &str) -> Result<Self, QuatError> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| QuatError::Parse("empty input".into()))?;
        let params: Vec<&str> = header.split_whitespace().collect();
        if params.len() != 2 {
            return Err(QuatError::Parse(format!(
                "expected header 'a b', got '{header}'"
            )));
        }
        let a = parse_rational(params[0])?;
        let b = parse_rational(params[1])?;
        let algebra = QuaternionAlgebra::new(a, b)?;
        let mut rows = Vec::new();
        for line in lines {
            let coords: Vec<&str> = line.split_whitespace().collect();
            if coords.len() != 4 {
                return Err(QuatError::Parse(format!(
                    "expected 4 coordinates per basis line, got '{line}'"
                )));
            }
            let mut row = Vec::new();
            for c in coords {
                row.push(parse_rational(c)?);
            }
            rows.push(row);
        }
        if rows.len() != 4 {
            return Err(QuatError::Parse(format!(
                "expected 4 basis lines, got {}",
                rows.len()
            )));
        }
        let elements: Vec<Quaternion> = rows
            .into_iter()
            .map(|r| algebra.from_coords([r[0].clone(), r[1].clone(), r[2].clone(), r[3].clone()]))
            .collect();
        Self::new(
            algebra,
            [
                elements[0].clone(),
                elements[1].clone(),
                elements[2].clone(),
                elements[3].clone(),
            ],
        )
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, QuatError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QuatError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// A positive solution of x0² − a·x1² = 1: a norm-one unit x0 + x1·i of the
/// real quadratic subring ℤ[i] ⊂ (a, b).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PellElement {
    pub x0: i64,
    pub x1: i64,
}

impl PellElement {
    /// The corresponding quaternion x0 + x1·i; it has reduced norm 1.
    pub fn quaternion(&self, algebra: &QuaternionAlgebra) -> Quaternion {
        algebra.from_coords([rat_int(self.x0), rat_int(self.x1), rat_int(0), rat_int(0)])
    }
}

/// All solutions of x0² − a·x1² = 1 with 1 ≤ x0 ≤ max_x0 (and x1 ≥ 1),
/// ascending. Requires a to be a positive nonsquare integer, so that the
/// solution set is the infinite cyclic group generated by the fundamental
/// solution.
pub fn pell_search(a: i64, max_x0: i64) -> Result<Vec<PellElement>, QuatError> {
    if a <= 0 || is_rational_square(&rat_int(a)) {
        return Err(QuatError::BadPellParameter(a.to_string()));
    }
    assert!(max_x0 >= 0 && max_x0 < 1 << 31, "norm-one search bound out of range");
    let mut out = Vec::new();
    let limit = (max_x0 as i128) * (max_x0 as i128);
    let mut x1: i128 = 1;
    loop {
        let t = 1 + (a as i128) * x1 * x1;
        if t > limit {
            break;
        }
        let s = (t as u64).sqrt();
        if (s as i128) * (s as i128) == t {
            out.push(PellElement { x0: s as i64, x1: x1 as i64 });
        }
        x1 += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn alg(a: i64, b: i64) -> QuaternionAlgebra {
        QuaternionAlgebra::from_integers(a, b).unwrap()
    }

    fn q(algebra: &QuaternionAlgebra, coords: [i64; 4]) -> Quaternion {
        algebra.from_coords(coords.map(rat_int))
    }

    #[test]
    fn ramification_fixed_sets() {
        assert_eq!(alg(3, -1).ramified_places(), &[Place::Finite(2), Place::Finite(3)]);
        assert_eq!(alg(2, 3).ramified_places(), &[Place::Finite(2), Place::Finite(3)]);
        assert_eq!(alg(-1, -1).ramified_places(), &[Place::Finite(2), Place::Infinity]);
        assert_eq!(alg(2, 5).ramified_places(), &[Place::Finite(2), Place::Finite(5)]);
        assert_eq!(alg(1, 7).ramified_places(), &[] as &[Place]);
    }

    #[test]
    fn division_and_indefinite_flags() {
        let h = alg(3, -1);
        assert!(h.is_division());
        assert!(h.is_indefinite());
        let hamilton = alg(-1, -1);
        assert!(hamilton.is_division());
        assert!(!hamilton.is_indefinite());
        let split = alg(1, 7);
        assert!(!split.is_division());
        assert!(split.is_indefinite());
        assert!(QuaternionAlgebra::new(rat_int(0), rat_int(3)).is_err());
    }

    #[test]
    fn basis_products() {
        let h = alg(3, -1);
        let (i, j, ij) = (h.i(), h.j(), h.ij());
        assert_eq!(i.mul(&i), h.scalar(rat_int(3)));
        assert_eq!(j.mul(&j), h.scalar(rat_int(-1)));
        assert_eq!(i.mul(&j), ij);
        assert_eq!(j.mul(&i), ij.neg());
        assert_eq!(ij.mul(&ij), h.scalar(rat_int(3)));
        // (1 + i)(1 − i) = 1 − a = −2.
        let one = h.one();
        assert_eq!(
            one.add(&i).mul(&one.sub(&i)),
            h.scalar(rat_int(-2))
        );
    }

    #[test]
    fn norm_and_trace_fixed_values() {
        let h = alg(3, -1);
        assert_eq!(h.i().nrd(), rat_int(-3));
        assert_eq!(h.j().nrd(), rat_int(1));
        assert_eq!(h.ij().nrd(), rat_int(-3));
        let x = q(&h, [2, 1, 0, 0]);
        assert_eq!(x.nrd(), rat_int(1));
        assert_eq!(x.trd(), rat_int(4));
        assert_eq!(x.inverse().unwrap(), q(&h, [2, -1, 0, 0]));
    }

    fn small_quaternion(a: i64, b: i64) -> impl Strategy<Value = Quaternion> {
        let algebra = alg(a, b);
        [
            -6i64..=6,
            -6i64..=6,
            -6i64..=6,
            -6i64..=6,
        ]
        .prop_map(move |c| algebra.from_coords(c.map(rat_int)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn multiplication_is_associative(
            x in small_quaternion(3, -1),
            y in small_quaternion(3, -1),
            z in small_quaternion(3, -1),
        ) {
            prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        }

        #[test]
        fn norm_is_multiplicative(
            x in small_quaternion(2, 5),
            y in small_quaternion(2, 5),
        ) {
            prop_assert_eq!(x.mul(&y).nrd(), x.nrd() * y.nrd());
        }

        #[test]
        fn conjugation_reverses_products(
            x in small_quaternion(3, -1),
            y in small_quaternion(3, -1),
        ) {
            prop_assert_eq!(x.mul(&y).conj(), y.conj().mul(&x.conj()));
        }

        #[test]
        fn conjugate_identities(x in small_quaternion(3, -1)) {
            let h = alg(3, -1);
            prop_assert_eq!(x.add(&x.conj()), h.scalar(x.trd()));
            prop_assert_eq!(x.mul(&x.conj()), h.scalar(x.nrd()));
            prop_assert_eq!(x.conj().mul(&x), h.scalar(x.nrd()));
        }

        #[test]
        fn traces_of_products_commute(
            x in small_quaternion(3, -1),
            y in small_quaternion(3, -1),
        ) {
            prop_assert_eq!(x.mul(&y).trd(), y.mul(&x).trd());
        }

        #[test]
        fn nonzero_elements_invert_in_division_algebra(x in small_quaternion(3, -1)) {
            prop_assume!(!x.is_zero());
            let h = alg(3, -1);
            let inv = x.inverse().expect("division algebra");
            prop_assert_eq!(x.mul(&inv), h.one());
            prop_assert_eq!(inv.mul(&x), h.one());
        }

        #[test]
        fn matrix_model_is_homomorphism(
            x in small_quaternion(3, -1),
            y in small_quaternion(3, -1),
        ) {
            prop_assert_eq!(
                matrix_model(&x.mul(&y)),
                matrix_model(&x).mul(&matrix_model(&y))
            );
            prop_assert_eq!(
                matrix_model(&x.add(&y)),
                matrix_model(&x).add(&matrix_model(&y))
            );
        }

        #[test]
        fn matrix_model_determinant_is_norm(x in small_quaternion(2, 5)) {
            prop_assume!(!x.is_zero());
            let det = matrix_model(&x).det().unwrap();
            prop_assert_eq!(det, BiquadElement::constant(x.nrd()));
        }
    }

    #[test]
    fn matrix_model_fixed_image() {
        let h = alg(3, -1);
        let m = matrix_model(&q(&h, [2, 1, 0, 0]));
        let a = rat_int(3);
        let b = rat_int(-1);
        let diag = |r: i64, s: i64| {
            BiquadElement::new(&a, &b, [rat_int(r), rat_int(s), rat_int(0), rat_int(0)])
        };
        assert_eq!(m[(0, 0)], diag(2, 1));
        assert_eq!(m[(1, 1)], diag(2, -1));
        assert!(m[(0, 1)].is_zero());
        assert!(m[(1, 0)].is_zero());
    }

    #[test]
    fn standard_order_is_closed() {
        let order = OrderBasis::standard(alg(3, -1)).unwrap();
        assert!(order.order_closure_check());
        let order25 = OrderBasis::standard(alg(2, 5)).unwrap();
        assert!(order25.order_closure_check());
        // Fractional parameters have no standard order.
        let frac = QuaternionAlgebra::new(rat(1, 2), rat_int(3)).unwrap();
        assert!(matches!(
            OrderBasis::standard(frac),
            Err(QuatError::NonIntegralParameters(_, _))
        ));
    }

    #[test]
    fn half_integer_lattice_is_not_closed() {
        let h = alg(3, -1);
        let half_i = h.i().scalar_mul(&rat(1, 2));
        let basis = OrderBasis::new(
            h.clone(),
            [h.one(), half_i, h.j(), h.ij()],
        )
        .unwrap();
        // (i/2)² = 3/4 is not an integer combination of the basis.
        assert!(!basis.order_closure_check());
    }

    #[test]
    fn coordinates_round_trip() {
        let order = OrderBasis::standard(alg(3, -1)).unwrap();
        let x = order.algebra().from_coords([rat(5, 2), rat_int(-3), rat(1, 7), rat_int(0)]);
        assert_eq!(order.coordinates_of(&x), x.coords().clone());
        assert!(order.contains(&q(order.algebra(), [4, -2, 9, 11])));
        assert!(!order.contains(&x));
    }

    #[test]
    fn order_parsing_round_trip() {
        let text = "\
# quaternion parameters
3 -1
1 0 0 0
0 1 0 0   # i
0 0 1 0
0 0 0 1
";
        let order = OrderBasis::parse(text).unwrap();
        assert_eq!(order.algebra(), &alg(3, -1));
        assert!(order.order_closure_check());
        assert!(OrderBasis::parse("3 -1\n1 0 0 0\n").is_err());
        assert!(OrderBasis::parse("3\n").is_err());
        // First basis element must be the unit.
        let bad = "3 -1\n0 1 0 0\n1 0 0 0\n0 0 1 0\n0 0 0 1\n";
        assert!(matches!(OrderBasis::parse(bad), Err(QuatError::BasisUnit)));
    }

    #[test]
    fn norm_one_search_fixed_lists() {
        assert_eq!(
            pell_search(3, 10).unwrap(),
            vec![PellElement { x0: 2, x1: 1 }, PellElement { x0: 7, x1: 4 }]
        );
        assert_eq!(pell_search(2, 10).unwrap(), vec![PellElement { x0: 3, x1: 2 }]);
        assert_eq!(pell_search(5, 100).unwrap(), vec![PellElement { x0: 9, x1: 4 }]);
        assert!(pell_search(4, 10).is_err());
        assert!(pell_search(-3, 10).is_err());
    }

    #[test]
    fn norm_one_elements_have_norm_one() {
        let h = alg(3, -1);
        for sol in pell_search(3, 1000).unwrap() {
            let g = sol.quaternion(&h);
            assert_eq!(g.nrd(), rat_int(1));
            assert_eq!(g.mul(&g.inverse().unwrap()), h.one());
        }
    }
}
