//! Numerics for Okamoto's one-parameter family of self-affine functions
//! `F_a` on `[0,1]` — the continuous solutions of the three-branch
//! functional equation that includes the Cantor staircase (`a = 1/2`) and
//! the classical nowhere-differentiable example at `a = 5/6` — and for its
//! parameter derivatives `M_{k,a} = d^k F_a / da^k`.
//!
//! The crate provides:
//!
//! - [`ternary`]: digit streams identifying points of `[0,1]`, their
//!   1-count statistics, run lengths, and frequency limits;
//! - [`evaluator`]: series evaluation of `F_a` and `M_{k,a}` with rigorous
//!   truncation bounds, exact values at ternary rationals, and an
//!   independent functional-equation route;
//! - [`increments`]: closed-form increments over ternary intervals, the
//!   polynomials `P_k(n,l)` and their recursions, the `a = 1/2` special
//!   case, and oscillation bounds;
//! - [`hermite`]: the polynomial family `q_{k+1} = t q_k - q_k'` whose
//!   scaled roots separate the signs of infinite derivatives;
//! - [`classifier`]: per-point derivative verdicts (finite zero, plus or
//!   minus infinity, neither, or honestly inconclusive) driven by digit
//!   statistics;
//! - [`dimension`]: box-counting dimension fits for the graphs and the
//!   Markov-chain machinery (entropy, critical parameter, iterated-
//!   logarithm simulation) behind the dimension lower bounds.
//!
//! Everything is deterministic: generated digit streams and Monte Carlo
//! runs are pure functions of their seeds.

mod math;
mod rng;

pub mod classifier;
pub mod dimension;
pub mod evaluator;
pub mod hermite;
pub mod increments;
pub mod ternary;
