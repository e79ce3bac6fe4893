//! Literature constants and derived proof constants.

use crate::error::{FppError, Result};

/// Bond percolation threshold p_c(d).
pub fn p_c(d: usize) -> Result<f64> {
    match d {
        // Kesten (1980): exactly 1/2 on Z^2.
        2 => Ok(0.5),
        // Wang, Zhou, Zhang, Garoni, Deng (2013): 0.248 811 85(10).
        3 => Ok(0.2488),
        _ => Err(FppError::ConstantUnavailable(format!("p_c({d})"))),
    }
}

/// Oriented bond percolation threshold on Z^2.
pub fn p_c_oriented(d: usize) -> Result<f64> {
    match d {
        // Jensen (1999) series estimate 0.644 700 185(5).
        2 => Ok(0.6447),
        _ => Err(FppError::ConstantUnavailable(format!("oriented p_c({d})"))),
    }
}

/// Covering constant for the greedy-animal tail bound.
///
/// A connected set of n vertices is covered by r+1 ≤ 5 n p^{1/d} boxes of
/// side 4l+1 with l = ⌈p^{-1/d}⌉; each contains at most 2d(4l+1)^d edges and
/// (4l+1)^d ≤ (5 p^{-1/d})^d ≤ 9^d / p once l ≤ 2 p^{-1/d}. The product gives
/// #edges ≤ 10 d 9^d n, so C₃(d) = 10·d·9^d.
pub fn c3(d: usize) -> f64 {
    10.0 * d as f64 * 9f64.powi(d as i32)
}

/// Segment budget of the directed-path construction.
pub fn segment_budget(d: usize) -> u64 {
    1609 + 104u64.pow(d as u32 - 1)
}

/// C_d = 13[1609 + 104^{d−1}] + 10.
pub fn barrier_length_constant(d: usize) -> f64 {
    13.0 * segment_budget(d) as f64 + 10.0
}

/// L̄ = [13(1609 + 104^{d−1}) + 10] ρ d M̄.
pub fn barrier_time_constant(d: usize, rho: f64, mbar: f64) -> f64 {
    barrier_length_constant(d) * rho * d as f64 * mbar
}

/// Stable text rendering of the table, hashed into report provenance.
pub fn table_fingerprint() -> String {
    let mut s = String::new();
    for d in 2..=3 {
        s.push_str(&format!("p_c({d})={:?};", p_c(d).ok()));
        s.push_str(&format!("op_c({d})={:?};", p_c_oriented(d).ok()));
        s.push_str(&format!("c3({d})={};", c3(d)));
        s.push_str(&format!("K({d})={};", segment_budget(d)));
    }
    s
}
