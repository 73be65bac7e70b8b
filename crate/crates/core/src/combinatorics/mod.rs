//! Exact and log-space combinatorial kernels.

mod binomial;
mod bitstring;
mod krawtchouk;
mod wht;

pub use binomial::{
    big_mantissa_exp, big_to_f64_scaled, binom, binom_big, binom_exact, binom_f64, binom_lgamma, binom_row_big, ldexp,
    LogReal, EXACT_BINOM_MAX_N,
};
pub use bitstring::BitString;
pub use krawtchouk::{krawtchouk, krawtchouk_by_degree, krawtchouk_direct, KrawtchoukRows, KrawtchoukTable};
pub use wht::{wht, wht_in_place};
