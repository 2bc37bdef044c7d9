//! Exact-arithmetic measure theory on desk-scale models.
//!
//! `measurelab` implements the constructive side of lifting theory on finite
//! measure models: refining dyadic partitions of `[0,1)^d`, finite unions of
//! rational intervals, and finite weighted atom spaces. On these models the
//! classical a.e. statements become exact, testable identities:
//!
//! - density points and lower densities for interval and partition bases
//!   ([`basis`]),
//! - von Neumann liftings of sets, functions, and vector-valued sections on
//!   purely atomic spaces ([`lifting`]),
//! - Bochner integrals of simple maps, shrinking-cell averages, Lebesgue
//!   points, and precise representatives ([`bochner`]),
//! - vector measures of bounded variation with restriction, pushforward,
//!   Bartle integration, and Radon–Nikodym derivatives ([`vecmeasure`]),
//! - disintegration of vector measures along a map ([`disint`]).
//!
//! All measure computations are exact: masses, densities, and set operations
//! use arbitrary-precision rationals ([`exact::Q`]). Floating point enters
//! only in midpoint quadrature of user-supplied evaluators without an exact
//! cell-integral interface. Euclidean norms of vectors are irrational in
//! general; they are handled through exact squared norms where possible and
//! through high-precision decimal approximations (error below `1e-60`)
//! elsewhere — see [`exact::sum_sqrt_approx`].
//!
//! The crate is `no_std` (with `alloc`): it contains no IO. Serialization,
//! file formats, and the experiment CLI live in the companion crate
//! `measurelab-cli`.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod atomic;
pub mod basis;
pub mod bochner;
pub mod disint;
mod error;
pub mod exact;
pub mod hierarchy;
pub mod interval;
pub mod lifting;
pub mod measure;
pub mod sample;
pub mod vecmeasure;

pub use error::{Error, Result};
