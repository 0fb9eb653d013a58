//! Reduction of integral symplectic representations modulo odd primes and
//! exact certification of their images.
//!
//! The key quantities are finite and computed exactly: the order of the
//! full symplectic group over F_p comes from the classical product formula,
//! and the order of the subgroup generated by the reduced matrices comes
//! from a deterministic stabilizer chain acting on the nonzero vectors of
//! F_p^d.  The transversal product of a partial chain is always a lower
//! bound for the group order (distinct transversal tuples give distinct
//! group elements), and since every generator preserves the form the full
//! symplectic order is an upper bound — so the chain can stop early, with
//! an exact answer, the moment the product reaches that order.  All budgets
//! count work items rather than wall time, so every outcome — including
//! "undecided" — is reproducible bit for bit.
//!
//! On top of this sit two certificate builders: a prime sweep recording
//! which reductions are surjective (the density certificate with its bad
//! prime set Ω), and an orbit-separation report comparing a representation
//! with its bending.  Precomposition by a mapping class and conjugation
//! inside the integral symplectic group both preserve the image subgroup up
//! to conjugacy, hence preserve every reduction's image order; differing
//! surjectivity verdicts at a single good prime therefore separate the
//! orbits.

use crate::exact::{invmod, FpScalar, Rational, RingMatrix};
use crate::model::SkewFormZ;
use crate::surface::{bend, CurveDatum, Representation, SurfaceError};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use thiserror::Error;

/// Errors from reduction, order computation, and certification.
#[derive(Debug, Error, PartialEq)]
pub enum CertError {
    #[error("not a prime: {0}")]
    NotPrime(u64),
    #[error("bad reduction prime {0}: {1}")]
    BadPrime(u64, String),
    #[error("matrix is not integral: {0}")]
    NotIntegral(String),
    #[error("matrix is not symplectic modulo p: {0}")]
    NotSymplectic(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// Deterministic primality by trial division; inputs here are small sweep
/// bounds and witness primes.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn primes_up_to(bound: u64) -> Vec<u64> {
    (2..=bound).filter(|&n| is_prime(n)).collect()
}

/// Is p an odd prime dividing none of the listed elementary divisors?
pub fn is_good_prime(p: u64, divisors: &[BigInt]) -> bool {
    check_good_prime(p, divisors).is_ok()
}

fn check_good_prime(p: u64, divisors: &[BigInt]) -> Result<(), CertError> {
    if !is_prime(p) {
        return Err(CertError::NotPrime(p));
    }
    if p == 2 {
        return Err(CertError::BadPrime(p, "even prime".into()));
    }
    let m = BigInt::from(p);
    let zero = BigInt::from(0);
    if divisors.iter().any(|d| d % &m == zero) {
        return Err(CertError::BadPrime(p, "divides the form divisors".into()));
    }
    Ok(())
}

fn big_pow(base: &BigInt, e: u64) -> BigInt {
    let mut acc = BigInt::from(1);
    for _ in 0..e {
        acc = &acc * base;
    }
    acc
}

/// Order of Sp(2n, F_q): q^(n²) · ∏_{i=1..n} (q^(2i) − 1).
pub fn sp_order(n: usize, q: u64) -> BigInt {
    assert!(is_prime(q) && q % 2 == 1, "odd prime modulus required");
    assert!(n >= 1, "positive rank required");
    let qb = BigInt::from(q);
    let mut order = big_pow(&qb, (n * n) as u64);
    for i in 1..=n {
        order = &order * &(big_pow(&qb, 2 * i as u64) - BigInt::from(1));
    }
    order
}

fn rational_to_fp(x: &Rational, p: u64, what: &str) -> Result<FpScalar, CertError> {
    if !x.is_integer() {
        return Err(CertError::NotIntegral(what.to_string()));
    }
    let m = BigInt::from(p);
    let r = ((x.numer() % &m) + &m) % &m;
    Ok(FpScalar::from_u64(r.to_u64().expect("residue fits"), p))
}

/// Entrywise reduction of an integral matrix modulo p.
pub fn reduce_matrix(m: &RingMatrix<Rational>, p: u64) -> Result<RingMatrix<FpScalar>, CertError> {
    if !is_prime(p) {
        return Err(CertError::NotPrime(p));
    }
    let mut entries = Vec::with_capacity(m.rows() * m.cols());
    for e in m.entries() {
        entries.push(rational_to_fp(e, p, "reduced matrix")?);
    }
    Ok(RingMatrix::new(m.rows(), m.cols(), entries))
}

/// Value-level equality of matrices over F_p (ignores the sentinel modulus
/// that context-free zeros and ones carry).
pub fn fp_values_equal(a: &RingMatrix<FpScalar>, b: &RingMatrix<FpScalar>) -> bool {
    a.rows() == b.rows()
        && a.cols() == b.cols()
        && a.entries().iter().zip(b.entries()).all(|(x, y)| x.value() == y.value())
}

fn fp_is_symplectic(m: &RingMatrix<FpScalar>, form: &RingMatrix<FpScalar>) -> bool {
    fp_values_equal(&m.transpose().mul(form).mul(m), form)
}

/// An integral symplectic generator set reduced modulo an odd good prime.
/// Construction re-verifies the symplectic condition modulo p.
#[derive(Debug, Clone)]
pub struct ReducedRep {
    p: u64,
    form: RingMatrix<FpScalar>,
    matrices: Vec<RingMatrix<FpScalar>>,
}

impl ReducedRep {
    /// Reduces a validated representation's generator images.
    pub fn new(rep: &Representation, divisors: &[BigInt], p: u64) -> Result<Self, CertError> {
        Self::from_integral(rep.images(), rep.form(), divisors, p)
    }

    /// Reduces an explicit integral generator set with its form.
    pub fn from_integral(
        gens: &[RingMatrix<Rational>],
        form: &SkewFormZ,
        divisors: &[BigInt],
        p: u64,
    ) -> Result<Self, CertError> {
        check_good_prime(p, divisors)?;
        let form_p = reduce_matrix(form.matrix(), p)?;
        let n = form_p.rows();
        if flat_inv(n, p, &flat_from_fp(&form_p)).is_none() {
            return Err(CertError::BadPrime(p, "form degenerate".into()));
        }
        let mut matrices = Vec::with_capacity(gens.len());
        for (k, g) in gens.iter().enumerate() {
            let red = reduce_matrix(g, p)?;
            if red.rows() != n || red.cols() != n {
                return Err(CertError::Dimension(format!("generator {k}")));
            }
            if !fp_is_symplectic(&red, &form_p) {
                return Err(CertError::NotSymplectic(format!("generator {k}")));
            }
            matrices.push(red);
        }
        Ok(ReducedRep { p, form: form_p, matrices })
    }

    /// Wraps matrices already over F_p, validating the symplectic condition.
    pub fn from_fp_parts(
        p: u64,
        form: RingMatrix<FpScalar>,
        matrices: Vec<RingMatrix<FpScalar>>,
    ) -> Result<Self, CertError> {
        if !is_prime(p) || p == 2 {
            return Err(CertError::NotPrime(p));
        }
        let n = form.rows();
        if flat_inv(n, p, &flat_from_fp(&form)).is_none() {
            return Err(CertError::BadPrime(p, "form degenerate".into()));
        }
        for (k, m) in matrices.iter().enumerate() {
            if m.rows() != n || m.cols() != n {
                return Err(CertError::Dimension(format!("generator {k}")));
            }
            if !fp_is_symplectic(m, &form) {
                return Err(CertError::NotSymplectic(format!("generator {k}")));
            }
        }
        Ok(ReducedRep { p, form, matrices })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn form(&self) -> &RingMatrix<FpScalar> {
        &self.form
    }

    pub fn matrices(&self) -> &[RingMatrix<FpScalar>] {
        &self.matrices
    }

    pub fn degree(&self) -> usize {
        self.form.rows()
    }

    /// Half the degree: the rank parameter of the ambient Sp(2m, F_p).
    pub fn half(&self) -> usize {
        self.degree() / 2
    }
}

/// Symplectic transvections x ↦ x + ⟨x, v⟩·v for v running over the standard
/// basis vectors and all pairwise sums and differences.  Each one preserves
/// any skew form exactly; together they cover root subgroups of both lengths
/// and generate the full symplectic group of the form.
pub fn transvection_generators(
    form: &RingMatrix<FpScalar>,
    p: u64,
) -> Vec<RingMatrix<FpScalar>> {
    let n = form.rows();
    let mut vectors: Vec<Vec<u64>> = Vec::new();
    for i in 0..n {
        let mut v = vec![0u64; n];
        v[i] = 1;
        vectors.push(v);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut s = vec![0u64; n];
            s[i] = 1;
            s[j] = 1;
            vectors.push(s);
            let mut d = vec![0u64; n];
            d[i] = 1;
            d[j] = p - 1;
            vectors.push(d);
        }
    }
    let f = flat_from_fp(form);
    let mut out = Vec::new();
    for v in vectors {
        // fv[r] = Σ_c F[r][c] v[c];  T = I + v · (F v)ᵀ.
        let mut fv = vec![0u64; n];
        for r in 0..n {
            let mut acc = 0u64;
            for c in 0..n {
                acc = (acc + f[r * n + c] * v[c]) % p;
            }
            fv[r] = acc;
        }
        let mut t = vec![0u64; n * n];
        for r in 0..n {
            for c in 0..n {
                let mut e = v[r] * fv[c] % p;
                if r == c {
                    e = (e + 1) % p;
                }
                t[r * n + c] = e;
            }
        }
        if !flat_is_identity(n, &t) {
            out.push(flat_to_fp(n, p, &t));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Flat matrices over F_p: the stabilizer-chain hot path.
// ---------------------------------------------------------------------------

fn flat_from_fp(m: &RingMatrix<FpScalar>) -> Vec<u64> {
    m.entries().iter().map(FpScalar::value).collect()
}

fn flat_to_fp(n: usize, p: u64, m: &[u64]) -> RingMatrix<FpScalar> {
    RingMatrix::new(n, n, m.iter().map(|&v| FpScalar::from_u64(v, p)).collect())
}

fn flat_identity(n: usize) -> Vec<u64> {
    let mut m = vec![0u64; n * n];
    for i in 0..n {
        m[i * n + i] = 1;
    }
    m
}

fn flat_is_identity(n: usize, m: &[u64]) -> bool {
    m.iter()
        .enumerate()
        .all(|(k, &v)| if k / n == k % n { v == 1 } else { v == 0 })
}

fn flat_mul(n: usize, p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; n * n];
    if p < (1 << 28) {
        // Entries < 2^28, so n ≤ 16 products accumulate without overflow.
        for r in 0..n {
            for k in 0..n {
                let x = a[r * n + k];
                if x == 0 {
                    continue;
                }
                for c in 0..n {
                    out[r * n + c] += x * b[k * n + c];
                }
            }
            for c in 0..n {
                out[r * n + c] %= p;
            }
        }
    } else {
        for r in 0..n {
            for k in 0..n {
                let x = a[r * n + k] as u128;
                if x == 0 {
                    continue;
                }
                for c in 0..n {
                    let t = (x * b[k * n + c] as u128) % p as u128;
                    out[r * n + c] = ((out[r * n + c] as u128 + t) % p as u128) as u64;
                }
            }
        }
    }
    out
}

fn flat_inv(n: usize, p: u64, m: &[u64]) -> Option<Vec<u64>> {
    let mut a = m.to_vec();
    let mut inv = flat_identity(n);
    for col in 0..n {
        let pivot = (col..n).find(|&r| a[r * n + col] % p != 0)?;
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
                inv.swap(pivot * n + c, col * n + c);
            }
        }
        let scale = invmod(a[col * n + col], p)?;
        for c in 0..n {
            a[col * n + c] = a[col * n + c] * scale % p;
            inv[col * n + c] = inv[col * n + c] * scale % p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col] % p;
            if f == 0 {
                continue;
            }
            let neg = p - f;
            for c in 0..n {
                a[r * n + c] = (a[r * n + c] + neg * a[col * n + c]) % p;
                inv[r * n + c] = (inv[r * n + c] + neg * inv[col * n + c]) % p;
            }
        }
    }
    Some(inv)
}

fn point_image(n: usize, p: u64, m: &[u64], code: u64) -> u64 {
    let mut x = [0u64; 16];
    let mut c = code;
    for slot in x.iter_mut().take(n) {
        *slot = c % p;
        c /= p;
    }
    let mut out = 0u64;
    let mut weight = 1u64;
    for r in 0..n {
        let mut acc = 0u64;
        for k in 0..n {
            acc += m[r * n + k] * x[k];
        }
        out += (acc % p) * weight;
        weight *= p;
    }
    out
}

/// Deterministic resource limits for order computations.  Budgets count
/// work items (never wall time) so outcomes are reproducible; exceeding any
/// limit yields an "undecided" outcome, never a wrong order.
#[derive(Debug, Clone)]
pub struct ChainBudget {
    /// Maximum size p^d of the point domain.
    pub max_domain: u64,
    /// Maximum total scalar multiply–adds across the chain.
    pub max_scalar_ops: u64,
    /// Maximum number of strong generators accumulated.
    pub max_strong_gens: usize,
    /// Maximum iterations when computing a multiplicative order mod p.
    pub max_power_iters: u64,
}

impl Default for ChainBudget {
    fn default() -> Self {
        ChainBudget {
            max_domain: 10_000_000,
            max_scalar_ops: 50_000_000_000,
            max_strong_gens: 4096,
            max_power_iters: 1_000_000,
        }
    }
}

/// Outcome of an exact order computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderResult {
    Exact(BigInt),
    Undecided(String),
}

const REP_CACHE_BYTES: usize = 64 << 20;

struct Level {
    base: u64,
    gens: Vec<usize>,
    dirty: bool,
    orbit: Vec<u64>,
    pos: Vec<i32>,
    parent: Vec<(u32, u16)>,
    reps: Option<Vec<Vec<u64>>>,
}

struct Chain<'a> {
    n: usize,
    p: u64,
    domain: u64,
    pool: Vec<Vec<u64>>,
    levels: Vec<Level>,
    target: Option<&'a BigInt>,
    budget: &'a ChainBudget,
    work: u64,
    done: bool,
    fail: Option<String>,
}

impl<'a> Chain<'a> {
    fn charge(&mut self, ops: u64) {
        self.work = self.work.saturating_add(ops);
        if self.work > self.budget.max_scalar_ops && self.fail.is_none() {
            self.fail = Some("scalar operation budget exceeded".into());
        }
    }

    fn stopped(&self) -> bool {
        self.done || self.fail.is_some()
    }

    fn nn(&self) -> u64 {
        (self.n * self.n) as u64
    }

    fn nnn(&self) -> u64 {
        (self.n * self.n * self.n) as u64
    }

    fn candidate(&self) -> BigInt {
        let mut acc = BigInt::from(1);
        for l in &self.levels {
            acc = &acc * &BigInt::from(l.orbit.len() as u64);
        }
        acc
    }

    fn check_done(&mut self) {
        if let Some(t) = self.target {
            if &self.candidate() == t {
                self.done = true;
            }
        }
    }

    fn add_to_pool(&mut self, g: Vec<u64>) -> usize {
        self.pool.push(g);
        self.pool.len() - 1
    }

    /// Orbit size of `start` under the listed generators (no bookkeeping).
    fn orbit_size(&mut self, gens: &[usize], start: u64) -> u64 {
        let mut seen = vec![false; self.domain as usize];
        let mut queue = vec![start];
        seen[start as usize] = true;
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for &gi in gens {
                let y = point_image(self.n, self.p, &self.pool[gi], x);
                self.charge(self.nn());
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    queue.push(y);
                }
            }
            if self.stopped() {
                break;
            }
        }
        queue.len() as u64
    }

    /// Greedy deterministic base choice: the standard basis vector with the
    /// largest orbit under the given generators (ties to the lowest index).
    fn choose_base(&mut self, gens: &[usize]) -> u64 {
        let mut best = (0u64, 0u64);
        for i in 0..self.n {
            let start = self.encode_basis(i);
            let size = self.orbit_size(gens, start);
            if size > best.1 {
                best = (start, size);
            }
            if self.stopped() {
                break;
            }
        }
        assert!(best.1 >= 2, "a non-identity generator moves some basis vector");
        best.0
    }

    fn encode_basis(&self, i: usize) -> u64 {
        let mut w = 1u64;
        for _ in 0..i {
            w *= self.p;
        }
        w
    }

    fn rebuild(&mut self, l: usize) {
        let gens = self.levels[l].gens.clone();
        let base = self.levels[l].base;
        let mut pos = vec![-1i32; self.domain as usize];
        let mut orbit = vec![base];
        let mut parent: Vec<(u32, u16)> = vec![(0, u16::MAX)];
        pos[base as usize] = 0;
        let mut head = 0;
        while head < orbit.len() {
            let x = orbit[head];
            for (gslot, &gi) in gens.iter().enumerate() {
                let y = point_image(self.n, self.p, &self.pool[gi], x);
                self.charge(self.nn());
                if pos[y as usize] < 0 {
                    pos[y as usize] = orbit.len() as i32;
                    orbit.push(y);
                    parent.push((head as u32, gslot as u16));
                }
            }
            head += 1;
            if self.stopped() {
                break;
            }
        }
        let cache = orbit.len() * self.n * self.n * 8 <= REP_CACHE_BYTES;
        let reps = if cache {
            let mut reps: Vec<Vec<u64>> = Vec::with_capacity(orbit.len());
            reps.push(flat_identity(self.n));
            for slot in 1..orbit.len() {
                let (pslot, gslot) = parent[slot];
                let gi = gens[gslot as usize];
                let r = flat_mul(self.n, self.p, &self.pool[gi], &reps[pslot as usize]);
                self.charge(self.nnn());
                reps.push(r);
            }
            Some(reps)
        } else {
            None
        };
        let level = &mut self.levels[l];
        level.orbit = orbit;
        level.pos = pos;
        level.parent = parent;
        level.reps = reps;
        level.dirty = false;
        self.check_done();
    }

    /// Transversal element mapping the base of level l to orbit slot `slot`.
    fn rep_at(&mut self, l: usize, slot: usize) -> Vec<u64> {
        if let Some(reps) = &self.levels[l].reps {
            return reps[slot].clone();
        }
        let mut path = Vec::new();
        let mut s = slot;
        while s != 0 {
            let (pslot, gslot) = self.levels[l].parent[s];
            path.push(gslot);
            s = pslot as usize;
        }
        let mut acc = flat_identity(self.n);
        for &gslot in path.iter().rev() {
            let gi = self.levels[l].gens[gslot as usize];
            acc = flat_mul(self.n, self.p, &self.pool[gi], &acc);
            self.charge(self.nnn());
        }
        acc
    }

    /// Runs x through the chain starting at `from`; Ok means it factored
    /// through the transversals completely (x is in the group and fixes all
    /// base points below `from` — sifting witnesses membership).
    fn sift(&mut self, from: usize, mut x: Vec<u64>) -> Result<(), (usize, Vec<u64>)> {
        for l in from..self.levels.len() {
            if self.stopped() {
                return Ok(());
            }
            let beta = point_image(self.n, self.p, &x, self.levels[l].base);
            self.charge(self.nn());
            let slot = self.levels[l].pos[beta as usize];
            if slot < 0 {
                return Err((l, x));
            }
            if slot > 0 {
                let u = self.rep_at(l, slot as usize);
                let uinv = flat_inv(self.n, self.p, &u).expect("transversal invertible");
                self.charge(self.nnn());
                x = flat_mul(self.n, self.p, &uinv, &x);
                self.charge(self.nnn());
            }
        }
        if flat_is_identity(self.n, &x) {
            Ok(())
        } else {
            Err((self.levels.len(), x))
        }
    }

    fn extend_base(&mut self, gen_idx: usize) {
        let base = self.choose_base(&[gen_idx]);
        let mut pos = vec![-1i32; self.domain as usize];
        pos[base as usize] = 0;
        self.levels.push(Level {
            base,
            gens: Vec::new(),
            dirty: true,
            orbit: vec![base],
            pos,
            parent: vec![(0, u16::MAX)],
            reps: None,
        });
    }

    /// The double loop over Schreier generators of level l, adding residues
    /// below and re-completing the affected levels, after which level l is
    /// strong relative to the chain beneath it.  Level l's own generator
    /// list and orbit never change while its loop runs: residues are only
    /// ever inserted at levels strictly deeper.
    fn complete(&mut self, l: usize) {
        if self.stopped() {
            return;
        }
        if self.levels[l].dirty {
            self.rebuild(l);
            if self.stopped() {
                return;
            }
        }
        let orbit_len = self.levels[l].orbit.len();
        let gens = self.levels[l].gens.clone();
        for slot in 0..orbit_len {
            for (gslot, &gi) in gens.iter().enumerate() {
                if self.stopped() {
                    return;
                }
                let x = self.levels[l].orbit[slot];
                let child = point_image(self.n, self.p, &self.pool[gi], x);
                self.charge(self.nn());
                let child_slot = self.levels[l].pos[child as usize];
                debug_assert!(child_slot >= 0, "orbit closed under its generators");
                let child_slot = child_slot as usize;
                if self.levels[l].parent[child_slot] == (slot as u32, gslot as u16) {
                    // Tree edge: the Schreier generator is the identity.
                    continue;
                }
                let u_beta = self.rep_at(l, slot);
                let w = flat_mul(self.n, self.p, &self.pool[gi], &u_beta);
                self.charge(self.nnn());
                let u_child = self.rep_at(l, child_slot);
                let u_child_inv =
                    flat_inv(self.n, self.p, &u_child).expect("transversal invertible");
                self.charge(self.nnn());
                let s = flat_mul(self.n, self.p, &u_child_inv, &w);
                self.charge(self.nnn());
                if flat_is_identity(self.n, &s) {
                    continue;
                }
                match self.sift(l + 1, s) {
                    Ok(()) => {}
                    Err((j, residue)) => {
                        if self.pool.len() >= self.budget.max_strong_gens {
                            self.fail = Some("strong generator budget exceeded".into());
                            return;
                        }
                        let ridx = self.add_to_pool(residue);
                        let j = if j == self.levels.len() {
                            self.extend_base(ridx);
                            self.levels.len() - 1
                        } else {
                            j
                        };
                        for lev in (l + 1)..=j {
                            self.levels[lev].gens.push(ridx);
                            self.levels[lev].dirty = true;
                        }
                        for lev in ((l + 1)..=j).rev() {
                            self.complete(lev);
                            if self.stopped() {
                                return;
                            }
                        }
                    }
                }
            }
        }
    }

    fn run(&mut self) -> OrderResult {
        if self.levels.is_empty() {
            return OrderResult::Exact(BigInt::from(1));
        }
        self.complete(0);
        if self.done {
            return OrderResult::Exact(self.target.expect("done implies target").clone());
        }
        if let Some(msg) = &self.fail {
            return OrderResult::Undecided(msg.clone());
        }
        OrderResult::Exact(self.candidate())
    }
}

fn chain_order(
    n: usize,
    p: u64,
    gens: &[Vec<u64>],
    target: Option<&BigInt>,
    budget: &ChainBudget,
) -> OrderResult {
    let mut domain: u64 = 1;
    for _ in 0..n {
        domain = match domain.checked_mul(p) {
            Some(d) if d <= budget.max_domain => d,
            _ => {
                return OrderResult::Undecided(format!(
                    "point domain {p}^{n} exceeds the budget"
                ))
            }
        };
    }
    let live: Vec<Vec<u64>> =
        gens.iter().filter(|g| !flat_is_identity(n, g)).cloned().collect();
    if live.is_empty() {
        return OrderResult::Exact(BigInt::from(1));
    }
    let mut chain = Chain {
        n,
        p,
        domain,
        pool: Vec::new(),
        levels: Vec::new(),
        target,
        budget,
        work: 0,
        done: false,
        fail: None,
    };
    for g in live {
        chain.add_to_pool(g);
    }
    let all: Vec<usize> = (0..chain.pool.len()).collect();
    let base = chain.choose_base(&all);
    if let Some(msg) = &chain.fail {
        return OrderResult::Undecided(msg.clone());
    }
    let mut pos = vec![-1i32; chain.domain as usize];
    pos[base as usize] = 0;
    chain.levels.push(Level {
        base,
        gens: all,
        dirty: true,
        orbit: vec![base],
        pos,
        parent: vec![(0, u16::MAX)],
        reps: None,
    });
    chain.run()
}

/// Exact order of the matrix group generated by the reduced set, via a
/// deterministic stabilizer chain on the nonzero vectors of F_p^d.  Exceeding
/// the budget reports "undecided", never a wrong order.
pub fn group_order(r: &ReducedRep, budget: &ChainBudget) -> OrderResult {
    let target = sp_order(r.half(), r.prime());
    let flats: Vec<Vec<u64>> = r.matrices().iter().map(flat_from_fp).collect();
    chain_order(r.degree(), r.prime(), &flats, Some(&target), budget)
}

/// Surjectivity outcome for one reduced generator set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Surjectivity {
    Surjective,
    Proper(BigInt),
    Undecided(String),
}

/// Does the reduced set generate all of Sp(2m, F_p)?  Exact either way.
pub fn surjectivity(r: &ReducedRep, budget: &ChainBudget) -> Surjectivity {
    let full = sp_order(r.half(), r.prime());
    match group_order(r, budget) {
        OrderResult::Exact(o) => {
            if o == full {
                Surjectivity::Surjective
            } else {
                Surjectivity::Proper(o)
            }
        }
        OrderResult::Undecided(m) => Surjectivity::Undecided(m),
    }
}

pub fn is_surjective(r: &ReducedRep, budget: &ChainBudget) -> bool {
    matches!(surjectivity(r, budget), Surjectivity::Surjective)
}

/// Exhaustive breadth-first closure of the generated matrix group; `None`
/// if the group exceeds the cap.  An independent cross-check for the chain
/// on small orders.
pub fn bfs_closure(r: &ReducedRep, cap: usize) -> Option<u64> {
    let n = r.degree();
    let p = r.prime();
    let gens: Vec<Vec<u64>> = r.matrices().iter().map(flat_from_fp).collect();
    let mut seen = std::collections::HashSet::new();
    let start = flat_identity(n);
    seen.insert(start.clone());
    let mut queue = vec![start];
    let mut head = 0;
    while head < queue.len() {
        let x = queue[head].clone();
        head += 1;
        for g in &gens {
            let y = flat_mul(n, p, &x, g);
            if seen.insert(y.clone()) {
                if seen.len() > cap {
                    return None;
                }
                queue.push(y);
            }
        }
    }
    Some(seen.len() as u64)
}

// ---------------------------------------------------------------------------
// Certificates.
// ---------------------------------------------------------------------------

/// SHA-256 fingerprint of a form and generator list, binding certificates to
/// their exact integral inputs.
pub fn fingerprint(form: &SkewFormZ, gens: &[RingMatrix<Rational>]) -> String {
    let mut h = Sha256::new();
    let mut push = |tag: &str, m: &RingMatrix<Rational>| {
        h.update(tag.as_bytes());
        h.update(format!("{}x{}", m.rows(), m.cols()).as_bytes());
        for e in m.entries() {
            h.update(b";");
            if e.is_integer() {
                h.update(e.numer().to_string().as_bytes());
            } else {
                h.update(format!("{}/{}", e.numer(), e.denom()).as_bytes());
            }
        }
    };
    push("form", form.matrix());
    for g in gens {
        push("gen", g);
    }
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Verdict for one prime of a sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimeVerdict {
    Surjective,
    Proper(BigInt),
    Skipped(String),
}

impl PrimeVerdict {
    /// Canonical text form used in certificates and reports.
    pub fn render(&self) -> String {
        match self {
            PrimeVerdict::Surjective => "surjective".to_string(),
            PrimeVerdict::Proper(o) => format!("proper({o})"),
            PrimeVerdict::Skipped(r) => format!("skipped({r})"),
        }
    }
}

/// Overall verdict of a density certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertVerdict {
    DenseCertified,
    NotCertified,
    Undecided,
}

impl CertVerdict {
    /// Canonical text form used in certificates.
    pub fn render(&self) -> &'static str {
        match self {
            CertVerdict::DenseCertified => "dense-certified",
            CertVerdict::NotCertified => "not-certified",
            CertVerdict::Undecided => "undecided",
        }
    }
}

const DENSITY_ASSUMPTION: &str = "a surjective reduction at a single prime >= 5 \
certifies a Zariski-dense image (standard criterion); the converse direction \
(density implies surjectivity at almost all primes) is not used";

/// A prime sweep: per-prime surjectivity verdicts, the bad prime set Ω, and
/// the density verdict.
#[derive(Debug, Clone)]
pub struct DensityCertificate {
    pub fingerprint: String,
    pub form_divisors: Vec<BigInt>,
    pub sweep_bound: u64,
    pub verdicts: BTreeMap<u64, PrimeVerdict>,
    pub omega: Vec<u64>,
    pub verdict: CertVerdict,
}

impl DensityCertificate {
    /// Canonical text rendering; two sweeps with the same inputs produce
    /// byte-identical output.
    pub fn render_text(&self) -> String {
        let mut out = String::from("density certificate\n");
        out.push_str(&format!("generators: {}\n", self.fingerprint));
        let divisors: Vec<String> =
            self.form_divisors.iter().map(|d| d.to_string()).collect();
        out.push_str(&format!("form divisors: {}\n", divisors.join(" ")));
        out.push_str(&format!("sweep bound: {}\n", self.sweep_bound));
        for (p, v) in &self.verdicts {
            out.push_str(&format!("{p}: {}\n", v.render()));
        }
        let omega: Vec<String> = self.omega.iter().map(|p| p.to_string()).collect();
        out.push_str(&format!("omega: {}\n", omega.join(" ")));
        out.push_str(&format!("assumption: {DENSITY_ASSUMPTION}\n"));
        out.push_str(&format!("verdict: {}\n", self.verdict.render()));
        out
    }

    /// Machine-readable rendering with the same content as the text form.
    pub fn render_json(&self) -> serde_json::Value {
        json!({
            "kind": "density-certificate",
            "generators": self.fingerprint,
            "form_divisors": self.form_divisors.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
            "sweep_bound": self.sweep_bound,
            "primes": self.verdicts.iter().map(|(p, v)| json!([p, v.render()])).collect::<Vec<_>>(),
            "omega": self.omega.clone(),
            "assumption": DENSITY_ASSUMPTION,
            "verdict": self.verdict.render(),
        })
    }
}

/// Sweeps every prime up to the bound.  Good odd primes are reduced and
/// tested for surjectivity; 2, divisor primes, and budget-exceeded primes
/// are recorded as skipped with the reason.  Ω is the set of good primes
/// with a proper image.  The verdict is "dense-certified" exactly when some
/// prime ≥ 5 is surjective; the certificate states the criterion explicitly.
pub fn bad_prime_set(
    rep: &Representation,
    divisors: &[BigInt],
    bound: u64,
    budget: &ChainBudget,
) -> DensityCertificate {
    let primes = primes_up_to(bound);
    let results: Vec<(u64, PrimeVerdict)> = primes
        .par_iter()
        .map(|&p| {
            let verdict = match ReducedRep::new(rep, divisors, p) {
                Err(CertError::BadPrime(_, reason)) => PrimeVerdict::Skipped(reason),
                Err(e) => PrimeVerdict::Skipped(e.to_string()),
                Ok(red) => match surjectivity(&red, budget) {
                    Surjectivity::Surjective => PrimeVerdict::Surjective,
                    Surjectivity::Proper(o) => PrimeVerdict::Proper(o),
                    Surjectivity::Undecided(m) => {
                        PrimeVerdict::Skipped(format!("undecided: {m}"))
                    }
                },
            };
            (p, verdict)
        })
        .collect();
    let verdicts: BTreeMap<u64, PrimeVerdict> = results.into_iter().collect();
    let omega: Vec<u64> = verdicts
        .iter()
        .filter(|(_, v)| matches!(v, PrimeVerdict::Proper(_)))
        .map(|(p, _)| *p)
        .collect();
    let any_surjective = verdicts
        .iter()
        .any(|(p, v)| *p >= 5 && matches!(v, PrimeVerdict::Surjective));
    let verdict = if any_surjective {
        CertVerdict::DenseCertified
    } else if !omega.is_empty() {
        CertVerdict::NotCertified
    } else {
        CertVerdict::Undecided
    };
    DensityCertificate {
        fingerprint: fingerprint(rep.form(), rep.images()),
        form_divisors: divisors.to_vec(),
        sweep_bound: bound,
        verdicts,
        omega,
        verdict,
    }
}

/// Multiplicative order of an invertible matrix over F_p.
pub fn multiplicative_order(
    m: &RingMatrix<FpScalar>,
    p: u64,
    cap: u64,
) -> Result<u64, CertError> {
    let n = m.rows();
    let flat = flat_from_fp(m);
    let mut acc = flat.clone();
    let mut k = 1u64;
    while !flat_is_identity(n, &acc) {
        if k >= cap {
            return Err(CertError::Budget(format!(
                "multiplicative order exceeds {cap} iterations"
            )));
        }
        acc = flat_mul(n, p, &acc, &flat);
        k += 1;
    }
    Ok(k)
}

fn integral_power(m: &RingMatrix<Rational>, k: u64) -> RingMatrix<Rational> {
    let mut acc = RingMatrix::identity(m.rows());
    for _ in 0..k {
        acc = acc.mul(m);
    }
    acc
}

/// Conclusion of an orbit-separation report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationConclusion {
    DistinctOrbits,
    NotSeparated,
    Undecided,
}

impl SeparationConclusion {
    /// Canonical text form used in separation reports.
    pub fn render(&self) -> &'static str {
        match self {
            SeparationConclusion::DistinctOrbits => "distinct orbits",
            SeparationConclusion::NotSeparated => "not separated",
            SeparationConclusion::Undecided => "undecided",
        }
    }
}

/// Comparison of a representation with its bending: the bend matrix's order
/// k modulo the witness prime, the verified agreement of the k-th power
/// bend with the original at that prime, and per-prime surjectivity verdict
/// pairs.  One surjective and one proper verdict at the same good prime
/// separate the mapping-class orbits, because precomposition and integral
/// symplectic conjugation both preserve each reduction's image order.
#[derive(Debug, Clone)]
pub struct OrbitSeparation {
    pub base_fingerprint: String,
    pub bent_fingerprint: String,
    pub witness_prime: u64,
    pub bend_order: u64,
    pub power_bend_agrees: bool,
    pub verdicts: BTreeMap<u64, (PrimeVerdict, PrimeVerdict)>,
    pub conclusion: SeparationConclusion,
}

impl OrbitSeparation {
    /// Canonical text rendering (byte-reproducible).
    pub fn render_text(&self) -> String {
        let mut out = String::from("orbit separation report\n");
        out.push_str(&format!("base generators: {}\n", self.base_fingerprint));
        out.push_str(&format!("bent generators: {}\n", self.bent_fingerprint));
        out.push_str(&format!("witness prime: {}\n", self.witness_prime));
        out.push_str(&format!("bend order modulo witness: {}\n", self.bend_order));
        out.push_str(&format!(
            "power-bend reduction equals base reduction at witness: {}\n",
            if self.power_bend_agrees { "yes" } else { "no" }
        ));
        for (p, (a, b)) in &self.verdicts {
            out.push_str(&format!("{p}: base {}, bent {}\n", a.render(), b.render()));
        }
        out.push_str(&format!("conclusion: {}\n", self.conclusion.render()));
        out
    }

    /// Machine-readable rendering with the same content as the text form.
    pub fn render_json(&self) -> serde_json::Value {
        json!({
            "kind": "orbit-separation",
            "base_generators": self.base_fingerprint,
            "bent_generators": self.bent_fingerprint,
            "witness_prime": self.witness_prime,
            "bend_order": self.bend_order,
            "power_bend_agrees": self.power_bend_agrees,
            "primes": self.verdicts.iter()
                .map(|(p, (a, b))| json!([p, a.render(), b.render()]))
                .collect::<Vec<_>>(),
            "conclusion": self.conclusion.render(),
        })
    }
}

/// Builds the orbit-separation report for a representation and a bending
/// element along a curve: computes k = the multiplicative order of the bend
/// matrix modulo the witness prime, verifies matrix-by-matrix that bending
/// by the k-th power leaves the reduction at the witness unchanged, and
/// compares surjectivity of the original and the bent representation at the
/// witness and auxiliary primes.
pub fn orbit_separation(
    rep: &Representation,
    curve: &CurveDatum,
    b: &RingMatrix<Rational>,
    divisors: &[BigInt],
    witness: u64,
    auxiliary: &[u64],
    budget: &ChainBudget,
) -> Result<OrbitSeparation, CertError> {
    check_good_prime(witness, divisors)?;
    let b_mod = reduce_matrix(b, witness)?;
    let k = multiplicative_order(&b_mod, witness, budget.max_power_iters)?;
    if k > 10_000 {
        return Err(CertError::Budget(format!(
            "bend power {k} too large for exact integral arithmetic"
        )));
    }
    let rep_bent = bend(rep, curve, b)?;
    let rep_power = bend(rep, curve, &integral_power(b, k))?;
    let base_red = ReducedRep::new(rep, divisors, witness)?;
    let power_red = ReducedRep::new(&rep_power, divisors, witness)?;
    let power_bend_agrees = base_red
        .matrices()
        .iter()
        .zip(power_red.matrices())
        .all(|(a, b)| fp_values_equal(a, b))
        && base_red.matrices().len() == power_red.matrices().len();

    let mut primes: Vec<u64> = Vec::new();
    primes.push(witness);
    for &q in auxiliary {
        if q != witness && !primes.contains(&q) {
            primes.push(q);
        }
    }
    primes.sort_unstable();
    let pairs: Vec<(u64, (PrimeVerdict, PrimeVerdict))> = primes
        .par_iter()
        .map(|&q| {
            let verdict_of = |r: &Representation| match ReducedRep::new(r, divisors, q) {
                Err(CertError::BadPrime(_, reason)) => PrimeVerdict::Skipped(reason),
                Err(e) => PrimeVerdict::Skipped(e.to_string()),
                Ok(red) => match surjectivity(&red, budget) {
                    Surjectivity::Surjective => PrimeVerdict::Surjective,
                    Surjectivity::Proper(o) => PrimeVerdict::Proper(o),
                    Surjectivity::Undecided(m) => {
                        PrimeVerdict::Skipped(format!("undecided: {m}"))
                    }
                },
            };
            (q, (verdict_of(rep), verdict_of(&rep_bent)))
        })
        .collect();
    let verdicts: BTreeMap<u64, (PrimeVerdict, PrimeVerdict)> = pairs.into_iter().collect();

    let decided = |v: &PrimeVerdict| {
        matches!(v, PrimeVerdict::Surjective | PrimeVerdict::Proper(_))
    };
    let separated = verdicts.values().any(|(a, b)| {
        matches!(
            (a, b),
            (PrimeVerdict::Surjective, PrimeVerdict::Proper(_))
                | (PrimeVerdict::Proper(_), PrimeVerdict::Surjective)
        )
    });
    let any_decisive = verdicts.values().any(|(a, b)| decided(a) && decided(b));
    let conclusion = if separated {
        SeparationConclusion::DistinctOrbits
    } else if any_decisive {
        SeparationConclusion::NotSeparated
    } else {
        SeparationConclusion::Undecided
    };
    Ok(OrbitSeparation {
        base_fingerprint: fingerprint(rep.form(), rep.images()),
        bent_fingerprint: fingerprint(rep_bent.form(), rep_bent.images()),
        witness_prime: witness,
        bend_order: k,
        power_bend_agrees,
        verdicts,
        conclusion,
    })
}
