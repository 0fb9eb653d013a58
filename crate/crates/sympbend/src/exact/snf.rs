//! Integer matrix normal forms: Smith normal form with unimodular
//! transforms, saturation of a rational row space to a primitive integer
//! lattice basis, and the skew-symmetric congruence normal form whose block
//! multipliers are the elementary divisors of an integral symplectic form.

use super::{ExactError, Rational, RingMatrix};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

fn abs_cmp(x: &BigInt, y: &BigInt) -> std::cmp::Ordering {
    x.abs().cmp(&y.abs())
}

/// Smith normal form: returns unimodular (u, v) and the diagonal s with
/// u·m·v = s, nonnegative diagonal entries, and each dividing the next.
pub fn smith_normal_form(
    m: &RingMatrix<BigInt>,
) -> (RingMatrix<BigInt>, RingMatrix<BigInt>, RingMatrix<BigInt>) {
    let rows = m.rows();
    let cols = m.cols();
    let mut s = m.clone();
    let mut u = RingMatrix::<BigInt>::identity(rows);
    let mut v = RingMatrix::<BigInt>::identity(cols);

    let swap_rows = |s: &mut RingMatrix<BigInt>, u: &mut RingMatrix<BigInt>, a: usize, b: usize| {
        if a == b {
            return;
        }
        for j in 0..cols {
            let tmp = s[(a, j)].clone();
            s[(a, j)] = s[(b, j)].clone();
            s[(b, j)] = tmp;
        }
        for j in 0..rows {
            let tmp = u[(a, j)].clone();
            u[(a, j)] = u[(b, j)].clone();
            u[(b, j)] = tmp;
        }
    };
    let swap_cols = |s: &mut RingMatrix<BigInt>, v: &mut RingMatrix<BigInt>, a: usize, b: usize| {
        if a == b {
            return;
        }
        for i in 0..rows {
            let tmp = s[(i, a)].clone();
            s[(i, a)] = s[(i, b)].clone();
            s[(i, b)] = tmp;
        }
        for i in 0..cols {
            let tmp = v[(i, a)].clone();
            v[(i, a)] = v[(i, b)].clone();
            v[(i, b)] = tmp;
        }
    };
    // row_a ← row_a + c·row_b, mirrored in u.
    let add_row = |s: &mut RingMatrix<BigInt>,
                   u: &mut RingMatrix<BigInt>,
                   a: usize,
                   b: usize,
                   c: &BigInt| {
        for j in 0..cols {
            let t = &s[(a, j)] + &(c * &s[(b, j)]);
            s[(a, j)] = t;
        }
        for j in 0..rows {
            let t = &u[(a, j)] + &(c * &u[(b, j)]);
            u[(a, j)] = t;
        }
    };
    let add_col = |s: &mut RingMatrix<BigInt>,
                   v: &mut RingMatrix<BigInt>,
                   a: usize,
                   b: usize,
                   c: &BigInt| {
        for i in 0..rows {
            let t = &s[(i, a)] + &(c * &s[(i, b)]);
            s[(i, a)] = t;
        }
        for i in 0..cols {
            let t = &v[(i, a)] + &(c * &v[(i, b)]);
            v[(i, a)] = t;
        }
    };

    let mut t = 0;
    while t < rows.min(cols) {
        // Locate a minimal-magnitude nonzero pivot in the trailing block.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !s[(i, j)].is_zero()
                    && pivot.is_none_or(|(pi, pj)| {
                        abs_cmp(&s[(i, j)], &s[(pi, pj)]) == std::cmp::Ordering::Less
                    })
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        swap_rows(&mut s, &mut u, t, pi);
        swap_cols(&mut s, &mut v, t, pj);
        if s[(t, t)].is_negative() {
            let neg = BigInt::from(-2);
            // row_t ← row_t − 2·row_t flips the sign unimodularly.
            add_row(&mut s, &mut u, t, t, &neg);
        }

        let mut clean = false;
        while !clean {
            clean = true;
            for i in t + 1..rows {
                if s[(i, t)].is_zero() {
                    continue;
                }
                let q = s[(i, t)].div_floor(&s[(t, t)]);
                let c = -q;
                add_row(&mut s, &mut u, i, t, &c);
                if !s[(i, t)].is_zero() {
                    // Remainder is strictly smaller: promote it to pivot.
                    swap_rows(&mut s, &mut u, t, i);
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if s[(t, j)].is_zero() {
                    continue;
                }
                let q = s[(t, j)].div_floor(&s[(t, t)]);
                let c = -q;
                add_col(&mut s, &mut v, j, t, &c);
                if !s[(t, j)].is_zero() {
                    swap_cols(&mut s, &mut v, t, j);
                    clean = false;
                }
            }
            if clean {
                // Divisibility: the pivot must divide the trailing block.
                'scan: for i in t + 1..rows {
                    for j in t + 1..cols {
                        if !(&s[(i, j)] % &s[(t, t)]).is_zero() {
                            let one = BigInt::from(1);
                            add_row(&mut s, &mut u, t, i, &one);
                            clean = false;
                            break 'scan;
                        }
                    }
                }
            }
        }
        t += 1;
    }
    debug_assert_eq!(u.mul(m).mul(&v), s, "transforms must reproduce the normal form");
    (u, s, v)
}

/// Inverse of a unimodular integer matrix (computed exactly; panics if the
/// input is not unimodular).
pub fn unimodular_inverse(m: &RingMatrix<BigInt>) -> RingMatrix<BigInt> {
    let rational = m.map(|e| Rational::from_integer(e.clone()));
    let inv = rational.inverse().expect("unimodular matrix must invert");
    inv.map(|e| {
        assert!(e.is_integer(), "inverse of a unimodular matrix must be integral");
        e.numer().clone()
    })
}

/// Given rows spanning a subspace W ⊂ ℚ^n, returns a ℤ-basis of the
/// saturated lattice W ∩ ℤ^n (each vector primitive, deterministic order,
/// first nonzero entry positive).
pub fn saturated_row_basis(rows: &[Vec<Rational>]) -> Vec<Vec<BigInt>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let n = rows[0].len();
    // Clear denominators row by row; this spans the same ℚ-subspace.
    let integral: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|row| {
            assert_eq!(row.len(), n, "ragged row list");
            let lcm = row
                .iter()
                .fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()));
            row.iter()
                .map(|x| {
                    let scaled = x * Rational::from_integer(lcm.clone());
                    debug_assert!(scaled.is_integer());
                    scaled.numer().clone()
                })
                .collect()
        })
        .collect();
    let m = RingMatrix::new(
        integral.len(),
        n,
        integral.into_iter().flatten().collect(),
    );
    let (_, s, v) = smith_normal_form(&m);
    let rank = (0..m.rows().min(n)).filter(|&k| !s[(k, k)].is_zero()).count();
    // Rows t < rank of v⁻¹ form a basis of the saturation: for x ∈ W ∩ ℤ^n,
    // x·v is integral and supported on the first `rank` coordinates.
    let vinv = unimodular_inverse(&v);
    let mut basis = Vec::with_capacity(rank);
    for t in 0..rank {
        let mut row: Vec<BigInt> = (0..n).map(|j| vinv[(t, j)].clone()).collect();
        if let Some(first) = row.iter().find(|x| !x.is_zero()) {
            if first.is_negative() {
                for x in &mut row {
                    *x = -x.clone();
                }
            }
        }
        basis.push(row);
    }
    basis
}

fn is_skew(g: &RingMatrix<BigInt>) -> bool {
    if !g.is_square() {
        return false;
    }
    let n = g.rows();
    (0..n).all(|i| (0..n).all(|j| g[(i, j)] == -&g[(j, i)]))
}

fn block_form(divisors: &[BigInt], n: usize) -> RingMatrix<BigInt> {
    let mut d = RingMatrix::<BigInt>::zero(n, n);
    for (k, dk) in divisors.iter().enumerate() {
        d[(2 * k, 2 * k + 1)] = dk.clone();
        d[(2 * k + 1, 2 * k)] = -dk;
    }
    d
}

fn matches_block_form(g: &RingMatrix<BigInt>) -> Option<Vec<BigInt>> {
    let n = g.rows();
    if n % 2 != 0 {
        return None;
    }
    let mut divisors = Vec::with_capacity(n / 2);
    for k in 0..n / 2 {
        let d = g[(2 * k, 2 * k + 1)].clone();
        if !d.is_positive() {
            return None;
        }
        if let Some(prev) = divisors.last() {
            let rem: BigInt = &d % prev;
            if !rem.is_zero() {
                return None;
            }
        }
        divisors.push(d);
    }
    if g == &block_form(&divisors, n) {
        Some(divisors)
    } else {
        None
    }
}

/// Congruence normal form of a nondegenerate skew-symmetric integer matrix:
/// returns unimodular v and positive divisors d_1 | d_2 | … with
///
///   vᵀ · g · v = ⊕_k [0 d_k; −d_k 0].
///
/// When g is already in block form the transform is the identity.
pub fn skew_normal_form(
    g: &RingMatrix<BigInt>,
) -> Result<(RingMatrix<BigInt>, Vec<BigInt>), ExactError> {
    if !is_skew(g) {
        return Err(ExactError::Dimension("matrix is not skew-symmetric".into()));
    }
    let n = g.rows();
    if let Some(divisors) = matches_block_form(g) {
        return Ok((RingMatrix::identity(n), divisors));
    }
    let mut s = g.clone();
    let mut v = RingMatrix::<BigInt>::identity(n);

    // Congruence swap of basis vectors a and b.
    let swap = |s: &mut RingMatrix<BigInt>, v: &mut RingMatrix<BigInt>, a: usize, b: usize| {
        if a == b {
            return;
        }
        for i in 0..n {
            let tmp = s[(i, a)].clone();
            s[(i, a)] = s[(i, b)].clone();
            s[(i, b)] = tmp;
        }
        for j in 0..n {
            let tmp = s[(a, j)].clone();
            s[(a, j)] = s[(b, j)].clone();
            s[(b, j)] = tmp;
        }
        for i in 0..n {
            let tmp = v[(i, a)].clone();
            v[(i, a)] = v[(i, b)].clone();
            v[(i, b)] = tmp;
        }
    };
    // Congruence e_a ← e_a + c·e_b: col_a += c·col_b and row_a += c·row_b.
    let addmul = |s: &mut RingMatrix<BigInt>,
                  v: &mut RingMatrix<BigInt>,
                  a: usize,
                  b: usize,
                  c: &BigInt| {
        for i in 0..n {
            let t = &s[(i, a)] + &(c * &s[(i, b)]);
            s[(i, a)] = t;
        }
        for j in 0..n {
            let t = &s[(a, j)] + &(c * &s[(b, j)]);
            s[(a, j)] = t;
        }
        for i in 0..n {
            let t = &v[(i, a)] + &(c * &v[(i, b)]);
            v[(i, a)] = t;
        }
    };
    let negate = |s: &mut RingMatrix<BigInt>, v: &mut RingMatrix<BigInt>, a: usize| {
        for i in 0..n {
            s[(i, a)] = -&s[(i, a)];
        }
        for j in 0..n {
            s[(a, j)] = -&s[(a, j)];
        }
        for i in 0..n {
            v[(i, a)] = -&v[(i, a)];
        }
    };

    let mut divisors = Vec::new();
    let mut t = 0;
    while t + 1 < n {
        // Minimal-magnitude nonzero entry of the trailing block → (t, t+1).
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..n {
            for j in t..n {
                if !s[(i, j)].is_zero()
                    && pivot.is_none_or(|(pi, pj)| {
                        abs_cmp(&s[(i, j)], &s[(pi, pj)]) == std::cmp::Ordering::Less
                    })
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        swap(&mut s, &mut v, t, pi);
        let pj = if pj == t { pi } else { pj };
        swap(&mut s, &mut v, t + 1, pj);
        if s[(t, t + 1)].is_negative() {
            negate(&mut s, &mut v, t + 1);
        }

        let mut clean = false;
        while !clean {
            clean = true;
            let d = s[(t, t + 1)].clone();
            debug_assert!(d.is_positive());
            // Clear row t beyond the pivot using e_j ← e_j + c·e_{t+1}.
            for j in t + 2..n {
                if s[(t, j)].is_zero() {
                    continue;
                }
                let q = s[(t, j)].div_floor(&d);
                addmul(&mut s, &mut v, j, t + 1, &-q);
                if !s[(t, j)].is_zero() {
                    // Remainder 0 < r < d becomes the new, smaller pivot.
                    swap(&mut s, &mut v, t + 1, j);
                    clean = false;
                    break;
                }
            }
            if !clean {
                continue;
            }
            // Clear row t+1 beyond the pivot using e_j ← e_j + c·e_t
            // (this leaves row t untouched there since s[t][t] = 0).
            for j in t + 2..n {
                if s[(t + 1, j)].is_zero() {
                    continue;
                }
                // s[t+1][t] = −d, so the op changes s[t+1][j] by −c·d.
                let q = s[(t + 1, j)].div_floor(&d);
                addmul(&mut s, &mut v, j, t, &q);
                if !s[(t + 1, j)].is_zero() {
                    let r = s[(t + 1, j)].clone();
                    debug_assert!(r.abs() < d);
                    // Move the remainder into the pivot position.
                    swap(&mut s, &mut v, t, j);
                    if s[(t, t + 1)].is_negative() {
                        negate(&mut s, &mut v, t + 1);
                    }
                    clean = false;
                    break;
                }
            }
            if !clean {
                continue;
            }
            // Divisibility of the trailing block by the pivot.
            let d = s[(t, t + 1)].clone();
            'scan: for i in t + 2..n {
                for j in t + 2..n {
                    if !(&s[(i, j)] % &d).is_zero() {
                        // Fold the offending basis vector into e_t; the next
                        // sweep strictly shrinks the pivot.
                        addmul(&mut s, &mut v, t, i, &BigInt::from(1));
                        clean = false;
                        break 'scan;
                    }
                }
            }
        }
        divisors.push(s[(t, t + 1)].clone());
        t += 2;
    }
    debug_assert_eq!(
        v.transpose().mul(g).mul(&v),
        block_form(&divisors, n),
        "congruence must reproduce the block normal form"
    );
    Ok((v, divisors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn big(rows: Vec<Vec<i64>>) -> RingMatrix<BigInt> {
        let r = rows.len();
        let c = rows[0].len();
        RingMatrix::new(r, c, rows.into_iter().flatten().map(BigInt::from).collect())
    }

    #[test]
    fn smith_form_fixed_examples() {
        let m = big(vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]);
        let (u, s, v) = smith_normal_form(&m);
        assert_eq!(u.mul(&m).mul(&v), s);
        // Divisor oracle: d1 = gcd of entries = 2, d1·d2 = gcd of 2×2 minors
        // = 4, d1·d2·d3 = |det| = 624, hence the diagonal (2, 2, 156).
        let diag: Vec<i64> = (0..3).map(|k| i64::try_from(&s[(k, k)]).unwrap()).collect();
        assert_eq!(diag, vec![2, 2, 156]);
        // The divisors of diag(4, 6) are (2, 12).
        let m2 = big(vec![vec![4, 0], vec![0, 6]]);
        let (_, s2, _) = smith_normal_form(&m2);
        assert_eq!(i64::try_from(&s2[(0, 0)]).unwrap(), 2);
        assert_eq!(i64::try_from(&s2[(1, 1)]).unwrap(), 12);
    }

    #[test]
    fn saturation_divides_out_index() {
        // Rows span the plane {x : x1 + x2 + x3 = 0} but with index 3.
        let rows = vec![
            vec![rat(1, 1), rat(-1, 1), rat(0, 1)],
            vec![rat(1, 1), rat(2, 1), rat(-3, 1)],
        ];
        let basis = saturated_row_basis(&rows);
        assert_eq!(basis.len(), 2);
        // (0, 1, −1) lies in the saturation though not in the row lattice.
        let target = [BigInt::from(0), BigInt::from(1), BigInt::from(-1)];
        let in_lattice = |v: &[BigInt; 3], basis: &[Vec<BigInt>]| -> bool {
            // Solve over ℚ and check integrality of the coefficients.
            let a = RingMatrix::new(
                3,
                2,
                (0..3)
                    .flat_map(|r| basis.iter().map(move |b| {
                        Rational::from_integer(b[r].clone())
                    }).collect::<Vec<_>>())
                    .collect(),
            );
            // Least-naive approach: brute force small coefficients.
            for c0 in -6i64..=6 {
                for c1 in -6i64..=6 {
                    let combo: Vec<Rational> = (0..3)
                        .map(|r| {
                            &a[(r, 0)] * Rational::from_integer(BigInt::from(c0))
                                + &a[(r, 1)] * Rational::from_integer(BigInt::from(c1))
                        })
                        .collect();
                    if (0..3).all(|r| combo[r] == Rational::from_integer(v[r].clone())) {
                        return true;
                    }
                }
            }
            false
        };
        assert!(in_lattice(&target, &basis));
        // Saturated bases have all Smith divisors equal to 1.
        let m = RingMatrix::new(
            2,
            3,
            basis.iter().flatten().cloned().collect(),
        );
        let (_, s, _) = smith_normal_form(&m);
        assert_eq!(s[(0, 0)], BigInt::from(1));
        assert_eq!(s[(1, 1)], BigInt::from(1));
    }

    #[test]
    fn skew_form_fixed_examples() {
        // Already in block form: identity transform.
        let g = big(vec![
            vec![0, 6, 0, 0],
            vec![-6, 0, 0, 0],
            vec![0, 0, 0, 6],
            vec![0, 0, -6, 0],
        ]);
        let (v, d) = skew_normal_form(&g).unwrap();
        assert!(v.is_identity());
        assert_eq!(d, vec![BigInt::from(6), BigInt::from(6)]);
        // Mixed multipliers must be rebalanced to satisfy divisibility.
        let g2 = big(vec![
            vec![0, 2, 0, 0],
            vec![-2, 0, 0, 0],
            vec![0, 0, 0, 3],
            vec![0, 0, -3, 0],
        ]);
        let (v2, d2) = skew_normal_form(&g2).unwrap();
        assert_eq!(d2, vec![BigInt::from(1), BigInt::from(6)]);
        assert_eq!(
            v2.transpose().mul(&g2).mul(&v2),
            block_form(&d2, 4)
        );
        // A dense skew example.
        let g3 = big(vec![
            vec![0, 2, 4],
            vec![-2, 0, 6],
            vec![-4, -6, 0],
        ]);
        // Odd size: one hyperbolic pair plus a radical vector.
        let (v3, d3) = skew_normal_form(&g3).unwrap();
        assert_eq!(d3.len(), 1);
        assert_eq!(
            v3.transpose().mul(&g3).mul(&v3),
            block_form(&d3, 3)
        );
        assert!(!skew_normal_form(&big(vec![vec![1, 0], vec![0, 1]])).is_ok());
    }

    fn small_skew(n: usize) -> impl Strategy<Value = RingMatrix<BigInt>> {
        proptest::collection::vec(-9i64..=9, n * (n - 1) / 2).prop_map(move |vals| {
            let mut g = RingMatrix::<BigInt>::zero(n, n);
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    g[(i, j)] = BigInt::from(vals[k]);
                    g[(j, i)] = BigInt::from(-vals[k]);
                    k += 1;
                }
            }
            g
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn skew_normal_form_is_a_unimodular_congruence(g in small_skew(4)) {
            let (v, d) = skew_normal_form(&g).unwrap();
            let rational = v.map(|e| Rational::from_integer(e.clone()));
            let det = rational.det().unwrap();
            prop_assert!(det == rat(1, 1) || det == rat(-1, 1));
            prop_assert_eq!(v.transpose().mul(&g).mul(&v), block_form(&d, 4));
            for w in d.windows(2) {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
        }

        #[test]
        fn smith_form_is_unimodular_and_divides(
            vals in proptest::collection::vec(-9i64..=9, 12)
        ) {
            let m = RingMatrix::new(3, 4, vals.into_iter().map(BigInt::from).collect());
            let (u, s, v) = smith_normal_form(&m);
            for t in [&u, &v] {
                let det = t.map(|e| Rational::from_integer(e.clone())).det().unwrap();
                prop_assert!(det == rat(1, 1) || det == rat(-1, 1));
            }
            prop_assert_eq!(u.mul(&m).mul(&v), s.clone());
            for k in 0..3 {
                prop_assert!(!s[(k, k)].is_negative());
                for j in 0..4 {
                    if j != k {
                        prop_assert!(s[(k, j)].is_zero());
                    }
                }
            }
            for k in 0..2 {
                if !s[(k + 1, k + 1)].is_zero() {
                    prop_assert!(!s[(k, k)].is_zero());
                    prop_assert!((&s[(k + 1, k + 1)] % &s[(k, k)]).is_zero());
                }
            }
        }
    }
}
