//! Exact rational arithmetic and exact linear algebra.
//!
//! Nothing in the solver paths touches floating point; [`Rat::to_f64_lossy`]
//! exists for display only.

mod matrix;
mod rat;

pub use matrix::{dot, solve_linear, RatMatrix};
pub use rat::Rat;

use num_bigint::BigUint;
use num_traits::{One, Pow};

/// Smallest integer `s` with `s >= n^(n/2)`, i.e. `⌈√(nⁿ)⌉`.
pub fn ceil_isqrt_pow(n: u32) -> BigUint {
    assert!(n >= 1, "ceil_isqrt_pow needs n >= 1");
    let nn: BigUint = Pow::pow(BigUint::from(n), n);
    let s = nn.sqrt();
    if &s * &s < nn {
        s + BigUint::one()
    } else {
        s
    }
}
