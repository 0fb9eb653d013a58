//! Prime-field scalars with the modulus carried per value.
//!
//! `FpScalar` keeps its modulus inline so matrices over F_p can reuse the
//! generic exact-matrix machinery. The modulus 0 is a context-free sentinel
//! produced only by `Ring::zero`/`Ring::one`; binary operations unify it with
//! any concrete modulus, and two different nonzero moduli never mix.

use super::ring::Ring;

/// An element of ℤ/p for an odd prime p (p = 0 marks a context-free 0 or 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FpScalar {
    v: u64,
    p: u64,
}

impl FpScalar {
    pub fn new(v: i64, p: u64) -> Self {
        assert!(p >= 2, "modulus must be at least 2");
        let m = p as i64;
        let r = ((v % m) + m) % m;
        FpScalar { v: r as u64, p }
    }

    pub fn from_u64(v: u64, p: u64) -> Self {
        assert!(p >= 2, "modulus must be at least 2");
        FpScalar { v: v % p, p }
    }

    pub fn value(&self) -> u64 {
        self.v
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn unified_modulus(&self, rhs: &Self) -> u64 {
        match (self.p, rhs.p) {
            (0, q) => q,
            (p, 0) => p,
            (p, q) => {
                assert_eq!(p, q, "mixed prime-field moduli");
                p
            }
        }
    }

    /// Fast modular exponentiation; the base keeps its modulus.
    pub fn pow(&self, mut e: u64) -> Self {
        if self.p == 0 {
            // 0^0 = 1 and 1^e = 1 keep the sentinel exact.
            return if self.v == 0 && e > 0 { *self } else { FpScalar { v: 1, p: 0 } };
        }
        let mut base = self.v % self.p;
        let mut acc: u64 = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, base, self.p);
            }
            base = mulmod(base, base, self.p);
            e >>= 1;
        }
        FpScalar { v: acc, p: self.p }
    }
}

/// (a·b) mod p without overflow for p < 2^63.
pub fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// x with a·x ≡ 1 (mod p), if gcd(a, p) = 1.
pub fn invmod(a: u64, p: u64) -> Option<u64> {
    let (mut r0, mut r1) = (p as i128, (a % p) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    let p128 = p as i128;
    Some((((t0 % p128) + p128) % p128) as u64)
}

impl Ring for FpScalar {
    fn zero() -> Self {
        FpScalar { v: 0, p: 0 }
    }

    fn one() -> Self {
        FpScalar { v: 1, p: 0 }
    }

    fn add(&self, rhs: &Self) -> Self {
        let p = self.unified_modulus(rhs);
        if p == 0 {
            // Sentinel arithmetic only ever sees 0 and 1.
            return FpScalar { v: self.v + rhs.v, p: 0 };
        }
        FpScalar { v: (self.v % p + rhs.v % p) % p, p }
    }

    fn sub(&self, rhs: &Self) -> Self {
        let p = self.unified_modulus(rhs);
        if p == 0 {
            assert!(self.v >= rhs.v, "sentinel subtraction underflow");
            return FpScalar { v: self.v - rhs.v, p: 0 };
        }
        FpScalar { v: (self.v % p + p - rhs.v % p) % p, p }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let p = self.unified_modulus(rhs);
        if p == 0 {
            return FpScalar { v: self.v * rhs.v, p: 0 };
        }
        FpScalar { v: mulmod(self.v % p, rhs.v % p, p), p }
    }

    fn neg(&self) -> Self {
        if self.p == 0 {
            assert!(self.v == 0, "sentinel negation of a nonzero value");
            return *self;
        }
        FpScalar { v: (self.p - self.v % self.p) % self.p, p: self.p }
    }

    fn is_zero(&self) -> bool {
        self.v == 0
    }

    fn inverse(&self) -> Option<Self> {
        if self.p == 0 {
            return if self.v == 1 { Some(*self) } else { None };
        }
        invmod(self.v, self.p).map(|v| FpScalar { v, p: self.p })
    }
}
