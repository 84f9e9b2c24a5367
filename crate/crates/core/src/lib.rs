//! Exact symbolic engine for the noncommutative two-variable Kontsevich map
//! `(x, y) -> (y^-1 H(x), y^-1 x y)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`coeff`]: exact rational coefficients with an inline `i64` fast path.
//! * [`blockring`]: the commutative ring `Q[t, t^-1, H(t)^-1]` in partial-fraction normal form.
//! * [`freealg`]: the free product of two block rings, i.e. the noncommutative algebra
//!   generated by `x`, `y` with `H(x)` (or `H(y)`) inverted, in alternating-word normal form.
//! * [`kontsevich`]: the automorphism, its inverse, iteration and Laurentness certificates.
//! * [`commutative`], [`divcheck`], [`pitoracle`], [`toric`]: independent cross-checks.

pub mod blockring;
pub mod coeff;
pub mod commutative;
pub mod divcheck;
pub mod freealg;
pub mod kontsevich;
pub mod pitoracle;
pub mod toric;

pub use blockring::{BlockElem, BlockRing, HSpec};
pub use coeff::Coeff;
pub use commutative::{CommLaurent, Frac};
pub use freealg::{Atom, EndoSpec, FreeAlgebra, NCElem, Side, Word};
pub use kontsevich::{Budget, IterateResult, Kontsevich, KontsevichError, Target};
