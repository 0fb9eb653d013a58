//! Exact-arithmetic toolkit for building integral symplectic representations of
//! surface-type groups out of quaternion orders, deforming them by bending along
//! a designated curve, and certifying Zariski-density and orbit separation by
//! reduction modulo primes.
//!
//! Module map:
//! - [`exact`]: rationals, the biquadratic ring ℚ[x,y]/(x²−a, y²−b), finite
//!   prime fields, dense matrices over those rings, p-adic valuations and the
//!   Hilbert symbol.
//! - [`quat`]: quaternion algebras (a,b) over ℚ, orders, ramification,
//!   norm-one (Pell) elements, and the 2×2 biquadratic matrix model.
//! - [`cocycle`]: Klein-four Galois cocycles, fixed algebras, connecting maps
//!   into ±1-valued factor sets, and the Kronecker-product factor-set identity.
//! - [`model`]: integral symplectic forms, the right-regular model of an order
//!   with its pure-quaternion pairing, centralizer structure, integral skew
//!   normal form, and the bending-element search.
//! - [`surface`]: presentations, curve decompositions, representation assembly,
//!   automorphism precomposition, and the bending deformation itself.
//! - [`cert`]: reduction mod p, stabilizer-chain group orders, surjectivity and
//!   bad-prime sweeps, density certificates, and orbit-separation reports.
//! - [`pipeline`]: the deterministic end-to-end driver used by the CLI.

pub mod cert;
pub mod cocycle;
pub mod exact;
pub mod model;
pub mod pipeline;
pub mod quat;
pub mod surface;
