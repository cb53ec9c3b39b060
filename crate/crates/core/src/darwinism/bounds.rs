//! Closed-form distance bounds. Logarithms are base 2; `ln 2` converts Pinsker's
//! natural-log constant.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// Diamond distances between channels never exceed 2, so larger bounds say nothing.
pub const DIAMOND_MAX: f64 = 2.0;

fn check(d_a: usize, n: usize, delta: f64) -> Result<()> {
    if d_a < 2 {
        return Err(Error::Domain(format!("d_A must be at least 2, got {d_a}")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    Ok(())
}

fn core_constant(d_a: usize) -> f64 {
    let d = d_a as f64;
    27.0 * LN_2 * d.powi(6) * d.log2()
}

/// `(27 ln 2 · d_A⁶ log₂ d_A / (n δ³))^{1/3}`: all but a `δ` fraction of the
/// fragment channels lie within this diamond distance of a measure-and-prepare
/// channel sharing one POVM.
pub fn theorem1_bound(d_a: usize, n: usize, delta: f64) -> Result<f64> {
    check(d_a, n, delta)?;
    Ok((core_constant(d_a) / (n as f64 * delta.powi(3))).cbrt())
}

/// Same bound for the joint channel onto `t`-element groups of fragments.
pub fn theorem2_bound(d_a: usize, n: usize, t: usize, delta: f64) -> Result<f64> {
    check(d_a, n, delta)?;
    if t == 0 || t > n {
        return Err(Error::Domain(format!("t must lie in 1..={n}, got {t}")));
    }
    Ok(theorem1_bound(d_a, n, delta)? * (t as f64).cbrt())
}

/// Whether a diamond-distance bound exceeds the trivial value 2.
pub fn is_vacuous(bound: f64) -> bool {
    bound >= DIAMOND_MAX
}

/// Averaged bound before optimizing over `k`:
/// `√(2 ln 2 · d_A⁶ log₂ d_A / k) + 2 k t / n`, where at most `k t` of the `n`
/// fragments are touched by the probing measurements.
pub fn average_bound(d_a: usize, n: usize, k: usize, t: usize) -> Result<f64> {
    if d_a < 2 || n == 0 || k == 0 || t == 0 {
        return Err(Error::Domain("average bound needs d_A >= 2 and n, k, t >= 1".into()));
    }
    let d = d_a as f64;
    Ok((2.0 * LN_2 * d.powi(6) * d.log2() / k as f64).sqrt() + 2.0 * (k * t) as f64 / n as f64)
}

/// `d_A³ √(2 ln 2 · I)`: diamond-distance bound implied by a measured
/// conditional mutual information `I` (bits).
pub fn chain_bound(d_a: usize, cmi: f64) -> f64 {
    (d_a as f64).powi(3) * (2.0 * LN_2 * cmi.max(0.0)).sqrt()
}
