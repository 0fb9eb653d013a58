//! The biquadratic ring ℚ[x,y]/(x²−a, y²−b) and the Klein four-group acting on
//! it by sign flips.
//!
//! Elements are written c0 + c1√a + c2√b + c3√(ab). The type deliberately
//! models the *ring* even when a or b is a rational square, so split parameter
//! pairs like (1,1) remain representable; nothing here assumes field-ness, and
//! `inverse` simply fails on zero divisors.

use super::ring::Ring;
use super::{rat_int, Rational};

/// Element of ℚ[x,y]/(x²−a, y²−b).
///
/// `params` is `None` only for parameter-free rational constants (c1=c2=c3=0),
/// which act as scalars of every biquadratic ring; binary operations unify the
/// parameters and panic if two different concrete parameter pairs meet.
#[derive(Clone, Debug)]
pub struct BiquadElement {
    params: Option<(Rational, Rational)>,
    c: [Rational; 4],
}

impl BiquadElement {
    pub fn new(a: &Rational, b: &Rational, coeffs: [Rational; 4]) -> Self {
        assert!(!a.is_zero() && !b.is_zero(), "biquadratic parameters must be nonzero");
        BiquadElement { params: Some((a.clone(), b.clone())), c: coeffs }
    }

    /// A rational constant, usable in any biquadratic ring.
    pub fn constant(r: Rational) -> Self {
        BiquadElement {
            params: None,
            c: [r, Rational::zero(), Rational::zero(), Rational::zero()],
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(rat_int(n))
    }

    /// √a in the ring with parameters (a, b).
    pub fn sqrt_a(a: &Rational, b: &Rational) -> Self {
        Self::new(a, b, [Rational::zero(), Rational::one(), Rational::zero(), Rational::zero()])
    }

    /// √b in the ring with parameters (a, b).
    pub fn sqrt_b(a: &Rational, b: &Rational) -> Self {
        Self::new(a, b, [Rational::zero(), Rational::zero(), Rational::one(), Rational::zero()])
    }

    /// √(ab) in the ring with parameters (a, b).
    pub fn sqrt_ab(a: &Rational, b: &Rational) -> Self {
        Self::new(a, b, [Rational::zero(), Rational::zero(), Rational::zero(), Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational; 4] {
        &self.c
    }

    pub fn params(&self) -> Option<&(Rational, Rational)> {
        self.params.as_ref()
    }

    /// The rational part if the element is a pure constant.
    pub fn as_rational(&self) -> Option<&Rational> {
        if self.c[1].is_zero() && self.c[2].is_zero() && self.c[3].is_zero() {
            Some(&self.c[0])
        } else {
            None
        }
    }

    fn unified_params<'a>(&'a self, rhs: &'a Self) -> Option<&'a (Rational, Rational)> {
        match (&self.params, &rhs.params) {
            (Some(p), Some(q)) => {
                assert_eq!(p, q, "mixed biquadratic ring parameters");
                Some(p)
            }
            (Some(p), None) => Some(p),
            (None, Some(q)) => Some(q),
            (None, None) => None,
        }
    }

    fn with_params(params: Option<(Rational, Rational)>, c: [Rational; 4]) -> Self {
        // Keep the invariant that parameter-free elements are pure constants.
        debug_assert!(
            params.is_some() || (c[1].is_zero() && c[2].is_zero() && c[3].is_zero()),
            "parameter-free biquadratic element with irrational part"
        );
        BiquadElement { params, c }
    }

    /// 4×4 rational matrix of multiplication by `self` on the basis
    /// (1, √a, √b, √(ab)); the workhorse behind `inverse`.
    pub fn regular_matrix(&self) -> super::RingMatrix<Rational> {
        let (a, b) = self
            .params
            .clone()
            .unwrap_or_else(|| (Rational::one(), Rational::one()));
        let ab: Rational = &a * &b;
        let [c0, c1, c2, c3] = self.c.clone();
        // Columns are self·1, self·√a, self·√b, self·√(ab).
        super::RingMatrix::from_rows(vec![
            vec![c0.clone(), &a * &c1, &b * &c2, &ab * &c3],
            vec![c1.clone(), c0.clone(), &b * &c3, &b * &c2],
            vec![c2.clone(), &a * &c3, c0.clone(), &a * &c1],
            vec![c3.clone(), c2.clone(), c1.clone(), c0.clone()],
        ])
    }
}

impl PartialEq for BiquadElement {
    fn eq(&self, other: &Self) -> bool {
        if let (Some(p), Some(q)) = (&self.params, &other.params) {
            if p != q {
                return false;
            }
        }
        self.c == other.c
    }
}

impl Ring for BiquadElement {
    fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    fn one() -> Self {
        Self::constant(Rational::one())
    }

    fn add(&self, rhs: &Self) -> Self {
        let params = self.unified_params(rhs).cloned();
        let c = [
            &self.c[0] + &rhs.c[0],
            &self.c[1] + &rhs.c[1],
            &self.c[2] + &rhs.c[2],
            &self.c[3] + &rhs.c[3],
        ];
        Self::with_params(params, c)
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    fn mul(&self, rhs: &Self) -> Self {
        let params = self.unified_params(rhs).cloned();
        let (a, b) = match &params {
            Some((a, b)) => (a.clone(), b.clone()),
            // Constant × constant never touches the parameters.
            None => (Rational::one(), Rational::one()),
        };
        let ab = &a * &b;
        let x = &self.c;
        let y = &rhs.c;
        let c0 = &x[0] * &y[0] + &a * &(&x[1] * &y[1]) + &b * &(&x[2] * &y[2]) + &ab * &(&x[3] * &y[3]);
        let c1 = &x[0] * &y[1] + &x[1] * &y[0] + &b * &(&x[2] * &y[3]) + &b * &(&x[3] * &y[2]);
        let c2 = &x[0] * &y[2] + &x[2] * &y[0] + &a * &(&x[1] * &y[3]) + &a * &(&x[3] * &y[1]);
        let c3 = &x[0] * &y[3] + &x[3] * &y[0] + &x[1] * &y[2] + &x[2] * &y[1];
        Self::with_params(params, [c0, c1, c2, c3])
    }

    fn neg(&self) -> Self {
        Self::with_params(
            self.params.clone(),
            [-&self.c[0], -&self.c[1], -&self.c[2], -&self.c[3]],
        )
    }

    fn is_zero(&self) -> bool {
        self.c.iter().all(Ring::is_zero)
    }

    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if let Some(r) = self.as_rational() {
            if r.is_zero() {
                return None;
            }
            return Some(Self::with_params(
                self.params.clone(),
                [r.recip(), Rational::zero(), Rational::zero(), Rational::zero()],
            ));
        }
        // Solve (mult-by-self) · v = e0 over ℚ; fails exactly on zero divisors.
        let m = self.regular_matrix();
        let inv = m.inverse().ok()?;
        let c = [
            inv[(0, 0)].clone(),
            inv[(1, 0)].clone(),
            inv[(2, 0)].clone(),
            inv[(3, 0)].clone(),
        ];
        Some(Self::with_params(self.params.clone(), c))
    }
}

/// Element of the Klein four-group Gal(ℚ(√a,√b)/ℚ) (formally, the sign-flip
/// group of the biquadratic ring): `flip_a` negates √a, `flip_b` negates √b,
/// and √(ab) picks up the product of the two signs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GaloisElement {
    pub flip_a: bool,
    pub flip_b: bool,
}

impl GaloisElement {
    pub const IDENTITY: GaloisElement = GaloisElement { flip_a: false, flip_b: false };

    pub fn new(flip_a: bool, flip_b: bool) -> Self {
        GaloisElement { flip_a, flip_b }
    }

    /// All four elements in the canonical order used everywhere in this crate:
    /// identity, flip √a, flip √b, flip both.
    pub fn all() -> [GaloisElement; 4] {
        [
            GaloisElement::new(false, false),
            GaloisElement::new(true, false),
            GaloisElement::new(false, true),
            GaloisElement::new(true, true),
        ]
    }

    pub fn index(&self) -> usize {
        (self.flip_a as usize) | ((self.flip_b as usize) << 1)
    }

    pub fn from_index(i: usize) -> Self {
        assert!(i < 4, "Klein-group index out of range");
        GaloisElement::new(i & 1 != 0, i & 2 != 0)
    }

    /// Group law (componentwise xor); every element is its own inverse.
    pub fn compose(&self, rhs: &GaloisElement) -> GaloisElement {
        GaloisElement::new(self.flip_a ^ rhs.flip_a, self.flip_b ^ rhs.flip_b)
    }

    pub fn is_identity(&self) -> bool {
        !self.flip_a && !self.flip_b
    }
}

/// The action of the Klein group on the biquadratic ring: a ring automorphism
/// flipping the signs of the √a and/or √b coordinates (√(ab) follows the
/// product of signs).
pub fn galois_act(s: &GaloisElement, x: &BiquadElement) -> BiquadElement {
    let mut c = x.c.clone();
    if s.flip_a {
        c[1] = -&c[1];
        c[3] = -&c[3];
    }
    if s.flip_b {
        c[2] = -&c[2];
        c[3] = -&c[3];
    }
    BiquadElement::with_params(x.params.clone(), c)
}
