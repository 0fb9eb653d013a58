//! The integral symplectic model of a quaternion order.
//!
//! An indefinite division quaternion algebra acts on itself by twisted right
//! multiplication `z ↦ z·ḡ`.  A pure quaternion μ in a fixed order turns the
//! order lattice into an integral symplectic module via the pairing
//! `β(z, w) = trd(μ·z·w̄)`, and the action preserves β up to the factor
//! `nrd(g)`, so norm-one elements act by integral symplectic matrices.  This
//! module builds that model exactly: the Gram matrix of β, its elementary
//! divisors, the matrix action, the commutant of a chosen element together
//! with its saturated integer lattice, an eigenvector frame exhibiting the
//! commutant's 2×2 block structure over a real quadratic field, and a
//! deterministic search for "bending" elements — commuting integral
//! symplectic matrices that mix every invariant plane.

use crate::exact::{
    galois_act, saturated_row_basis, skew_normal_form, BiquadElement, ExactError, GaloisElement,
    Rational, Ring, RingMatrix,
};
use crate::quat::{OrderBasis, Quaternion, QuaternionAlgebra};
use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

/// Errors from model construction and the bend search.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("the algebra is not a division algebra (it splits over the rationals)")]
    NotDivision,
    #[error("the algebra is definite; the construction needs an indefinite one")]
    NotIndefinite,
    #[error("the basis does not span an order (not closed under multiplication or conjugation)")]
    NotOrder,
    #[error("the pairing element must be nonzero")]
    MuZero,
    #[error("the pairing element must be a pure quaternion (zero reduced trace)")]
    MuNotPure,
    #[error("the pairing element must lie in the order")]
    MuNotInOrder,
    #[error("form matrix is not skew-symmetric")]
    FormNotSkew,
    #[error("form matrix is not integral")]
    FormNotIntegral,
    #[error("form matrix is degenerate")]
    FormDegenerate,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not integral: {0}")]
    NonIntegral(String),
    #[error("eigenvector frame unavailable: {0}")]
    FrameUnavailable(String),
    #[error("search bounds would overflow 64-bit intermediate products")]
    SearchOverflow,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// The 2×2 block `[[0, 1], [-1, 0]]` repeated `half` times down the
/// diagonal: the reference skew form in dimension `2·half`.
pub fn form_k(half: usize) -> RingMatrix<Rational> {
    let mut m = RingMatrix::zero(2 * half, 2 * half);
    for k in 0..half {
        m[(2 * k, 2 * k + 1)] = Rational::one();
        m[(2 * k + 1, 2 * k)] = -Rational::one();
    }
    m
}

/// A nondegenerate integral skew-symmetric bilinear form.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewFormZ {
    matrix: RingMatrix<Rational>,
}

impl SkewFormZ {
    /// Validates squareness, integrality, skew-symmetry and nondegeneracy.
    pub fn new(matrix: RingMatrix<Rational>) -> Result<Self, ModelError> {
        if !matrix.is_square() {
            return Err(ModelError::Dimension(format!(
                "form must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let n = matrix.rows();
        for i in 0..n {
            for j in 0..n {
                if !matrix[(i, j)].is_integer() {
                    return Err(ModelError::FormNotIntegral);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if matrix[(i, j)] != -matrix[(j, i)].clone() {
                    return Err(ModelError::FormNotSkew);
                }
            }
        }
        if matrix.det()?.is_zero() {
            return Err(ModelError::FormDegenerate);
        }
        Ok(Self { matrix })
    }

    /// The reference form [`form_k`] in dimension `2·half`.
    pub fn standard(half: usize) -> Self {
        assert!(half > 0, "empty form");
        Self { matrix: form_k(half) }
    }

    pub fn matrix(&self) -> &RingMatrix<Rational> {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    /// Entries as big integers.
    pub fn integer_matrix(&self) -> RingMatrix<BigInt> {
        self.matrix.map(|e| e.numer().clone())
    }

    /// Unimodular congruence to block normal form: returns (v, divisors)
    /// with `vᵀ·G·v = ⊕ [0 d; -d 0]` and `d_1 | d_2 | …`.
    pub fn normal_form(&self) -> Result<(RingMatrix<Rational>, Vec<BigInt>), ModelError> {
        let (v, divisors) = skew_normal_form(&self.integer_matrix())?;
        if 2 * divisors.len() != self.size() {
            return Err(ModelError::FormDegenerate);
        }
        Ok((v.map(|e| Rational::from_integer(e.clone())), divisors))
    }
}

/// The elementary divisors d_1 | d_2 | … of an integral skew form.
pub fn symplectic_divisors(form: &SkewFormZ) -> Result<Vec<BigInt>, ModelError> {
    Ok(form.normal_form()?.1)
}

/// Does m preserve the form exactly: `mᵀ·F·m = F`?
pub fn is_symplectic(m: &RingMatrix<Rational>, form: &SkewFormZ) -> bool {
    m.is_square()
        && m.rows() == form.size()
        && m.transpose().mul(form.matrix()).mul(m) == *form.matrix()
}

/// Block-diagonal assembly of even-dimensional matrices.  When each block
/// preserves the reference form of its own size, the assembly preserves the
/// reference form of the total size.
pub fn phi_n(blocks: &[RingMatrix<Rational>]) -> Result<RingMatrix<Rational>, ModelError> {
    if blocks.is_empty() {
        return Err(ModelError::Dimension("no blocks to assemble".into()));
    }
    for b in blocks {
        if !b.is_square() || b.rows() % 2 != 0 {
            return Err(ModelError::Dimension(format!(
                "blocks must be square of even size, got {}x{}",
                b.rows(),
                b.cols()
            )));
        }
    }
    Ok(crate::exact::block_diag(blocks))
}

/// Gram matrix of the pairing `β(z, w) = trd(μ·z·w̄)` on the order basis.
pub fn beta_gram(order: &OrderBasis, mu: &Quaternion) -> RingMatrix<Rational> {
    let e = order.elements();
    let mut g = RingMatrix::zero(4, 4);
    for k in 0..4 {
        for l in 0..4 {
            g[(k, l)] = mu.mul(&e[k]).mul(&e[l].conj()).trd();
        }
    }
    g
}

/// The twisted right-multiplication model of a quaternion order.
#[derive(Debug, Clone)]
pub struct RightRegularModel {
    order: OrderBasis,
    mu: Quaternion,
    gram: SkewFormZ,
    basis_change: RingMatrix<Rational>,
    basis_change_inv: RingMatrix<Rational>,
    divisors: Vec<BigInt>,
    primitive: SkewFormZ,
    normalized: SkewFormZ,
}

impl RightRegularModel {
    /// Builds the model, checking every structural precondition eagerly:
    /// the algebra must be an indefinite division algebra, the basis an
    /// order, and μ a nonzero pure quaternion inside the order.
    pub fn new(order: OrderBasis, mu: Quaternion) -> Result<Self, ModelError> {
        let algebra = order.algebra();
        if !algebra.is_division() {
            return Err(ModelError::NotDivision);
        }
        if !algebra.is_indefinite() {
            return Err(ModelError::NotIndefinite);
        }
        if !order.order_closure_check() {
            return Err(ModelError::NotOrder);
        }
        if mu.is_zero() {
            return Err(ModelError::MuZero);
        }
        if !mu.trd().is_zero() {
            return Err(ModelError::MuNotPure);
        }
        if !order.contains(&mu) {
            return Err(ModelError::MuNotInOrder);
        }
        let gram = SkewFormZ::new(beta_gram(&order, &mu))?;
        let (basis_change, divisors) = gram.normal_form()?;
        let basis_change_inv = basis_change.inverse()?;
        // The first divisor is the gcd of the Gram entries, so both the
        // Gram itself and its congruent block form stay integral after
        // dividing by it.
        let d1 = Rational::from_integer(divisors[0].clone());
        let primitive = SkewFormZ::new(gram.matrix().map(|e| e / &d1))?;
        let blocks = basis_change
            .transpose()
            .mul(gram.matrix())
            .mul(&basis_change);
        let normalized = SkewFormZ::new(blocks.map(|e| e / &d1))?;
        Ok(Self {
            order,
            mu,
            gram,
            basis_change,
            basis_change_inv,
            divisors,
            primitive,
            normalized,
        })
    }

    pub fn order(&self) -> &OrderBasis {
        &self.order
    }

    pub fn algebra(&self) -> &QuaternionAlgebra {
        self.order.algebra()
    }

    pub fn mu(&self) -> &Quaternion {
        &self.mu
    }

    /// Gram matrix of β on the order basis.
    pub fn gram(&self) -> &SkewFormZ {
        &self.gram
    }

    /// Elementary divisors of the Gram matrix.
    pub fn divisors(&self) -> &[BigInt] {
        &self.divisors
    }

    /// Unimodular v with `vᵀ·G·v` in block normal form.
    pub fn basis_change(&self) -> &RingMatrix<Rational> {
        &self.basis_change
    }

    /// The Gram matrix divided by its first divisor (the gcd of its
    /// entries): the content-one integral skew form on the *order basis*
    /// preserved exactly by [`Self::rho`] images of norm-one elements.
    pub fn primitive_form(&self) -> &SkewFormZ {
        &self.primitive
    }

    /// The block normal form divided by its first divisor: the integral
    /// skew form preserved by [`Self::rho_normalized`] images of norm-one
    /// order elements.  Equals the reference form `form_k(2)` whenever all
    /// divisors coincide.
    pub fn normalized_form(&self) -> &SkewFormZ {
        &self.normalized
    }

    /// The pairing `β(z, w) = trd(μ·z·w̄)`.
    pub fn beta(&self, z: &Quaternion, w: &Quaternion) -> Rational {
        self.mu.mul(z).mul(&w.conj()).trd()
    }

    /// Matrix of `z ↦ z·ḡ` on the order basis.  Columns are the coordinates
    /// of the images of the basis elements; they are integral whenever g
    /// lies in the order.
    pub fn rho(&self, g: &Quaternion) -> RingMatrix<Rational> {
        let gc = g.conj();
        let mut m = RingMatrix::zero(4, 4);
        for (c, e) in self.order.elements().iter().enumerate() {
            let image = e.mul(&gc);
            let coords = self.order.coordinates_of(&image);
            for (r, x) in coords.into_iter().enumerate() {
                m[(r, c)] = x;
            }
        }
        m
    }

    /// [`Self::rho`] rewritten in the normal-form basis: `v⁻¹·ρ(g)·v`.
    /// Still integral for order elements because v is unimodular, and
    /// symplectic for the normalized form when `nrd(g) = 1`.
    pub fn rho_normalized(&self, g: &Quaternion) -> RingMatrix<Rational> {
        self.basis_change_inv.mul(&self.rho(g)).mul(&self.basis_change)
    }

    /// Matrix of left multiplication `z ↦ g·z` on the order basis.  Left
    /// multiplications commute with every ρ image.
    pub fn left_regular(&self, g: &Quaternion) -> RingMatrix<Rational> {
        let mut m = RingMatrix::zero(4, 4);
        for (c, e) in self.order.elements().iter().enumerate() {
            let image = g.mul(e);
            let coords = self.order.coordinates_of(&image);
            for (r, x) in coords.into_iter().enumerate() {
                m[(r, c)] = x;
            }
        }
        m
    }
}

/// Structural identity check for the model: ρ(g) scales the pairing by
/// exactly `nrd(g)` and commutes with all left multiplications.
pub fn quaternionic_unitary_check(model: &RightRegularModel, g: &Quaternion) -> bool {
    let r = model.rho(g);
    let gmat = model.gram().matrix();
    let scaled = gmat.scalar_mul(&g.nrd());
    if r.transpose().mul(gmat).mul(&r) != scaled {
        return false;
    }
    model.order().elements().iter().all(|e| {
        let l = model.left_regular(e);
        l.mul(&r) == r.mul(&l)
    })
}

/// Basis of the space of rational matrices commuting with every generator:
/// the kernel of X ↦ (G·X − X·G) stacked over the generators.
pub fn commutant_basis(
    gens: &[RingMatrix<Rational>],
) -> Result<Vec<RingMatrix<Rational>>, ModelError> {
    if gens.is_empty() {
        return Err(ModelError::Dimension("no generators".into()));
    }
    let n = gens[0].rows();
    for g in gens {
        if !g.is_square() || g.rows() != n {
            return Err(ModelError::Dimension(
                "generators must be square of equal size".into(),
            ));
        }
    }
    let mut system: RingMatrix<Rational> = RingMatrix::zero(gens.len() * n * n, n * n);
    for (gi, g) in gens.iter().enumerate() {
        for r in 0..n {
            for c in 0..n {
                let row = (gi * n + r) * n + c;
                // (G·X)[r][c] contributes G[r][k] at unknown X[k][c];
                // (X·G)[r][c] contributes G[k][c] at unknown X[r][k].
                for k in 0..n {
                    let t = system[(row, k * n + c)].clone() + g[(r, k)].clone();
                    system[(row, k * n + c)] = t;
                    let t = system[(row, r * n + k)].clone() - g[(k, c)].clone();
                    system[(row, r * n + k)] = t;
                }
            }
        }
    }
    let kernel = system.kernel()?;
    Ok(kernel
        .into_iter()
        .map(|v| RingMatrix::new(n, n, v))
        .collect())
}

/// ℤ-basis of the lattice of *integer* matrices commuting with every
/// generator: the rational commutant saturated inside the integer matrices.
/// Deterministic: vectors are primitive with positive leading entry.
pub fn commutant_lattice(
    gens: &[RingMatrix<Rational>],
) -> Result<Vec<RingMatrix<Rational>>, ModelError> {
    let n = gens[0].rows();
    let rational = commutant_basis(gens)?;
    let rows: Vec<Vec<Rational>> = rational
        .iter()
        .map(|m| m.entries().to_vec())
        .collect();
    let basis = saturated_row_basis(&rows);
    Ok(basis
        .into_iter()
        .map(|row| {
            RingMatrix::new(
                n,
                n,
                row.into_iter().map(Rational::from_integer).collect(),
            )
        })
        .collect())
}

/// Eigenvector frame of a ρ image over the real quadratic subfield.
///
/// For g = x₀ + x₁·i with x₁ ≠ 0, the matrix ρ(g) has the two conjugate
/// eigenvalues λ = x₀ + x₁√a and σ(λ) = x₀ − x₁√a, each of multiplicity
/// two.  The frame columns alternate (λ, σλ, λ, σλ)-eigenvectors, with the
/// σλ-eigenvectors the exact Galois conjugates of the λ-eigenvectors.
#[derive(Debug, Clone)]
pub struct CentralizerFrame {
    frame: RingMatrix<BiquadElement>,
    frame_inv: RingMatrix<BiquadElement>,
    eigenvalue: BiquadElement,
    params: (Rational, Rational),
}

/// Interleaving permutation on 4 indices: frame order (λ, σλ, λ, σλ) →
/// block order (λ, λ, σλ, σλ).  Entry k is the frame index of the k-th
/// block-ordered vector.
pub const INTERLEAVE: [usize; 4] = [0, 2, 1, 3];

impl CentralizerFrame {
    pub fn matrix(&self) -> &RingMatrix<BiquadElement> {
        &self.frame
    }

    pub fn eigenvalue(&self) -> &BiquadElement {
        &self.eigenvalue
    }

    fn lift(&self, m: &RingMatrix<Rational>) -> RingMatrix<BiquadElement> {
        let (a, b) = &self.params;
        m.map(|e| BiquadElement::new(a, b, [e.clone(), Rational::zero(), Rational::zero(), Rational::zero()]))
    }

    /// Conjugates a rational matrix into frame coordinates: F⁻¹·m·F.
    pub fn to_frame(&self, m: &RingMatrix<Rational>) -> RingMatrix<BiquadElement> {
        self.frame_inv.mul(&self.lift(m)).mul(&self.frame)
    }

    /// Frame coordinates reordered by [`INTERLEAVE`], so that commuting
    /// matrices become block diagonal.
    pub fn interleaved(&self, m: &RingMatrix<Rational>) -> RingMatrix<BiquadElement> {
        let f = self.to_frame(m);
        let mut out = RingMatrix::zero(4, 4);
        for r in 0..4 {
            for c in 0..4 {
                out[(r, c)] = f[(INTERLEAVE[r], INTERLEAVE[c])].clone();
            }
        }
        out
    }

    /// Splits an interleaved matrix into diagonal 2×2 blocks; `None` if any
    /// off-diagonal block entry is nonzero.
    pub fn diagonal_blocks(
        &self,
        m: &RingMatrix<Rational>,
    ) -> Option<(RingMatrix<BiquadElement>, RingMatrix<BiquadElement>)> {
        let x = self.interleaved(m);
        for r in 0..4 {
            for c in 0..4 {
                if (r < 2) != (c < 2) && !x[(r, c)].is_zero() {
                    return None;
                }
            }
        }
        let block = |r0: usize, c0: usize| {
            RingMatrix::from_rows(vec![
                vec![x[(r0, c0)].clone(), x[(r0, c0 + 1)].clone()],
                vec![x[(r0 + 1, c0)].clone(), x[(r0 + 1, c0 + 1)].clone()],
            ])
        };
        Some((block(0, 0), block(2, 2)))
    }
}

/// Builds the eigenvector frame of ρ(g) for g = x₀ + x₁·i with x₁ ≠ 0.
pub fn eigenframe(
    model: &RightRegularModel,
    g: &Quaternion,
) -> Result<CentralizerFrame, ModelError> {
    let coords = g.coords();
    if !coords[2].is_zero() || !coords[3].is_zero() {
        return Err(ModelError::FrameUnavailable(
            "element must lie in the quadratic subfield generated by i".into(),
        ));
    }
    if coords[1].is_zero() {
        return Err(ModelError::FrameUnavailable(
            "element is rational; its eigenvalues do not separate".into(),
        ));
    }
    let a = model.algebra().a().clone();
    let b = model.algebra().b().clone();
    let lambda = BiquadElement::new(
        &a,
        &b,
        [coords[0].clone(), coords[1].clone(), Rational::zero(), Rational::zero()],
    );
    let sigma_a = GaloisElement::new(true, false);
    let lambda_bar = galois_act(&sigma_a, &lambda);
    let rho = model.rho(g);
    let lifted = rho.map(|e| {
        BiquadElement::new(&a, &b, [e.clone(), Rational::zero(), Rational::zero(), Rational::zero()])
    });
    let shifted = |ev: &BiquadElement| {
        let mut m = lifted.clone();
        for k in 0..4 {
            let t = m[(k, k)].sub(ev);
            m[(k, k)] = t;
        }
        m
    };
    let k1 = shifted(&lambda).kernel()?;
    let k2 = shifted(&lambda_bar).kernel()?;
    if k1.len() != 2 || k2.len() != 2 {
        return Err(ModelError::FrameUnavailable(format!(
            "eigenspaces have dimensions {} and {}, expected 2 and 2",
            k1.len(),
            k2.len()
        )));
    }
    // Columns alternate (λ, σλ, λ, σλ).
    let mut frame = RingMatrix::zero(4, 4);
    for r in 0..4 {
        frame[(r, 0)] = k1[0][r].clone();
        frame[(r, 1)] = k2[0][r].clone();
        frame[(r, 2)] = k1[1][r].clone();
        frame[(r, 3)] = k2[1][r].clone();
    }
    let frame_inv = frame.inverse()?;
    Ok(CentralizerFrame {
        frame,
        frame_inv,
        eigenvalue: lambda,
        params: (a, b),
    })
}

/// Verifies the block structure of a commutant basis in the frame of the
/// chosen element: every basis matrix, interleaved, must be block diagonal
/// with entries in the real quadratic subfield and with the second block
/// the exact Galois conjugate of the first.
pub fn centralizer_pattern_check(
    frame: &CentralizerFrame,
    basis: &[RingMatrix<Rational>],
) -> bool {
    let sigma_a = GaloisElement::new(true, false);
    basis.iter().all(|m| {
        let Some((upper, lower)) = frame.diagonal_blocks(m) else {
            return false;
        };
        for r in 0..2 {
            for c in 0..2 {
                let u = &upper[(r, c)];
                // Entries must avoid the √b and √(ab) coordinates.
                if !u.coeffs()[2].is_zero() || !u.coeffs()[3].is_zero() {
                    return false;
                }
                if galois_act(&sigma_a, u) != lower[(r, c)] {
                    return false;
                }
            }
        }
        true
    })
}

/// Does b mix the given coordinate blocks completely?  For each proper
/// nonempty set I of blocks, the blocks J that the image of ⊕_{i∈I} touches
/// must span a strictly larger dimension; otherwise b maps a partial sum of
/// planes into an equally small one and a bent representation could keep an
/// invariant decomposition.
pub fn genericity_check(b: &RingMatrix<Rational>, block_sizes: &[usize]) -> bool {
    let n: usize = block_sizes.iter().sum();
    assert!(b.is_square() && b.rows() == n, "block sizes must tile the matrix");
    let m = block_sizes.len();
    assert!(m <= 16, "too many blocks for subset enumeration");
    let mut starts = Vec::with_capacity(m);
    let mut acc = 0;
    for s in block_sizes {
        starts.push(acc);
        acc += s;
    }
    // nonzero[j][i] — block row j, block column i contains a nonzero entry.
    let mut nonzero = vec![vec![false; m]; m];
    for (j, nzrow) in nonzero.iter_mut().enumerate() {
        for (i, flag) in nzrow.iter_mut().enumerate() {
            'scan: for r in starts[j]..starts[j] + block_sizes[j] {
                for c in starts[i]..starts[i] + block_sizes[i] {
                    if !b[(r, c)].is_zero() {
                        *flag = true;
                        break 'scan;
                    }
                }
            }
        }
    }
    for subset in 1..(1u32 << m) - 1 {
        let mut dim_i = 0;
        let mut hit = vec![false; m];
        for i in 0..m {
            if subset & (1 << i) != 0 {
                dim_i += block_sizes[i];
                for j in 0..m {
                    if nonzero[j][i] {
                        hit[j] = true;
                    }
                }
            }
        }
        let dim_j: usize = (0..m).filter(|&j| hit[j]).map(|j| block_sizes[j]).sum();
        if dim_j <= dim_i {
            return false;
        }
    }
    true
}

/// A bending candidate found by [`b_search`]: an integer matrix in the span
/// of the commutant lattice, symplectic for the search form and generic for
/// the block decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct BendElement {
    /// Coordinates in the commutant lattice basis.
    pub coords: Vec<i64>,
    /// Coordinate height: max |c_k|.
    pub height: i64,
    /// The matrix itself.
    pub matrix: RingMatrix<Rational>,
}

fn matrix_to_i64(m: &RingMatrix<Rational>, what: &str) -> Result<Vec<i64>, ModelError> {
    m.entries()
        .iter()
        .map(|e| {
            if !e.is_integer() {
                return Err(ModelError::NonIntegral(what.into()));
            }
            i64::try_from(e.numer()).map_err(|_| ModelError::SearchOverflow)
        })
        .collect()
}

struct SearchSpace {
    lattice: Vec<Vec<i64>>,
    form: Vec<i64>,
    n: usize,
    dim: usize,
    height: i64,
}

impl SearchSpace {
    /// Checks bᵀ·J·b = J with early exit, using a caller scratch buffer.
    fn is_symplectic_flat(&self, b: &[i64], jb: &mut [i64]) -> bool {
        let n = self.n;
        for k in 0..n {
            for c in 0..n {
                let mut acc = 0i64;
                for l in 0..n {
                    acc += self.form[k * n + l] * b[l * n + c];
                }
                jb[k * n + c] = acc;
            }
        }
        for r in 0..n {
            for c in 0..n {
                let mut acc = 0i64;
                for k in 0..n {
                    acc += b[k * n + r] * jb[k * n + c];
                }
                if acc != self.form[r * n + c] {
                    return false;
                }
            }
        }
        true
    }

    fn descend(
        &self,
        depth: usize,
        partial: &[i64],
        coords: &mut Vec<i64>,
        jb: &mut [i64],
        hits: &mut Vec<(Vec<i64>, i64)>,
    ) {
        if depth == self.dim {
            if self.is_symplectic_flat(partial, jb) {
                let height = coords.iter().map(|c| c.abs()).max().unwrap_or(0);
                hits.push((coords.clone(), height));
            }
            return;
        }
        let lat = &self.lattice[depth];
        let mut buf = partial.to_vec();
        for (k, v) in buf.iter_mut().enumerate() {
            *v -= self.height * lat[k];
        }
        let mut c = -self.height;
        loop {
            coords.push(c);
            self.descend(depth + 1, &buf, coords, jb, hits);
            coords.pop();
            if c == self.height {
                break;
            }
            c += 1;
            for (k, v) in buf.iter_mut().enumerate() {
                *v += lat[k];
            }
        }
    }
}

/// Deterministic exhaustive search for bending elements.
///
/// Enumerates every integer combination of the lattice basis with
/// coordinates in `[-height, height]`, keeps those whose matrix preserves
/// the form exactly and mixes the block decomposition, and returns them
/// sorted by (coordinate height, lexicographic coordinates).  The lattice
/// is expected to be a commutant lattice, so form preservation makes a hit
/// a valid bending element for any representation containing the
/// centralized matrix.
pub fn b_search(
    lattice: &[RingMatrix<Rational>],
    form: &SkewFormZ,
    block_sizes: &[usize],
    height: i64,
) -> Result<Vec<BendElement>, ModelError> {
    if lattice.is_empty() {
        return Err(ModelError::Dimension("empty lattice".into()));
    }
    if height < 1 {
        return Err(ModelError::Dimension("height bound must be positive".into()));
    }
    let n = form.size();
    if block_sizes.iter().sum::<usize>() != n {
        return Err(ModelError::Dimension(
            "block sizes must tile the form dimension".into(),
        ));
    }
    let mut flat = Vec::with_capacity(lattice.len());
    for (k, m) in lattice.iter().enumerate() {
        if !m.is_square() || m.rows() != n {
            return Err(ModelError::Dimension(format!(
                "lattice element {k} has size {}x{}, expected {n}x{n}",
                m.rows(),
                m.cols()
            )));
        }
        flat.push(matrix_to_i64(m, &format!("lattice element {k}"))?);
    }
    let form_flat = matrix_to_i64(form.matrix(), "form")?;
    // Overflow bound for the i64 fast path: any entry of bᵀ·J·b is at most
    // n²·maxJ·(dim·height·maxL)².
    let max_l = flat
        .iter()
        .flat_map(|m| m.iter())
        .map(|v| v.unsigned_abs())
        .max()
        .unwrap_or(0) as i128;
    let max_j = form_flat.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0) as i128;
    let bound_b = lattice.len() as i128 * height as i128 * max_l;
    let bound_t = (n as i128) * (n as i128) * max_j * bound_b * bound_b;
    if bound_t > i64::MAX as i128 {
        return Err(ModelError::SearchOverflow);
    }
    let space = SearchSpace {
        lattice: flat,
        form: form_flat,
        n,
        dim: lattice.len(),
        height,
    };
    // Partition on the leading coordinate; the ordered collect keeps the
    // result independent of scheduling.
    let nested: Vec<Vec<(Vec<i64>, i64)>> = (-height..=height)
        .into_par_iter()
        .map(|c0| {
            let mut partial = vec![0i64; n * n];
            for (k, v) in partial.iter_mut().enumerate() {
                *v += c0 * space.lattice[0][k];
            }
            let mut coords = vec![c0];
            let mut jb = vec![0i64; n * n];
            let mut hits = Vec::new();
            space.descend(1, &partial, &mut coords, &mut jb, &mut hits);
            hits
        })
        .collect();
    let mut hits: Vec<(Vec<i64>, i64)> = nested.into_iter().flatten().collect();
    hits.sort_by(|(ca, ha), (cb, hb)| ha.cmp(hb).then_with(|| ca.cmp(cb)));
    let mut out = Vec::new();
    for (coords, height) in hits {
        let mut matrix = RingMatrix::zero(n, n);
        for (k, c) in coords.iter().enumerate() {
            if *c != 0 {
                matrix = matrix.add(&lattice[k].scalar_mul(&Rational::from_integer(BigInt::from(*c))));
            }
        }
        if genericity_check(&matrix, block_sizes) {
            out.push(BendElement { coords, height, matrix });
        }
    }
    Ok(out)
}
