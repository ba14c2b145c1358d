use crate::error::MathError;

/// Absolute tolerance of all monotone root solves.
pub const ROOT_TOL: f64 = 1e-10;
/// Bracket expansion gives up beyond this magnitude.
pub const BRACKET_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub enum RootFailure {
    /// Expansion passed [`BRACKET_LIMIT`] without straddling the target.
    Unbracketed,
    Eval(MathError),
}

impl From<MathError> for RootFailure {
    fn from(e: MathError) -> Self {
        RootFailure::Eval(e)
    }
}

/// Solves `f(x) = target` for nondecreasing `f` by geometric bracket
/// expansion from `|x| = 1` (factor 2) followed by bisection.
///
/// Stops once the bracket is narrower than [`ROOT_TOL`] and the residual is
/// within [`ROOT_TOL`], or when the bracket can no longer be split.
pub fn solve_increasing(
    mut f: impl FnMut(f64) -> Result<f64, MathError>,
    target: f64,
) -> Result<f64, RootFailure> {
    let (mut lo, mut hi) = bracket(&mut f, target)?;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        x = 0.5 * (lo + hi);
        if x <= lo || x >= hi {
            break;
        }
        let r = f(x)? - target;
        if r == 0.0 || (hi - lo <= ROOT_TOL && r.abs() <= ROOT_TOL) {
            break;
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    Ok(x)
}

fn bracket(
    f: &mut impl FnMut(f64) -> Result<f64, MathError>,
    target: f64,
) -> Result<(f64, f64), RootFailure> {
    let mut lo = -1.0;
    let mut hi = 1.0;
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    if f_lo.is_nan() || f_hi.is_nan() {
        return Err(RootFailure::Unbracketed);
    }
    while f_hi < target {
        if hi > BRACKET_LIMIT {
            return Err(RootFailure::Unbracketed);
        }
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = f(hi)?;
        if f_hi.is_nan() {
            return Err(RootFailure::Unbracketed);
        }
    }
    while f_lo > target {
        if lo < -BRACKET_LIMIT {
            return Err(RootFailure::Unbracketed);
        }
        hi = lo;
        lo *= 2.0;
        f_lo = f(lo)?;
        if f_lo.is_nan() {
            return Err(RootFailure::Unbracketed);
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let x = solve_increasing(|x| Ok(x * x * x), 27.0).unwrap();
        assert!((x - 3.0).abs() < 1e-10);
    }

    #[test]
    fn negative_target_expands_down() {
        let x = solve_increasing(|x| Ok(2.0 * x), -1e6).unwrap();
        assert!((x + 5e5).abs() < 1e-9);
    }

    #[test]
    fn bounded_function_is_unbracketed() {
        let r = solve_increasing(|x: f64| Ok(x.atan()), 2.0);
        assert_eq!(r, Err(RootFailure::Unbracketed));
    }

    #[test]
    fn steep_function_meets_residual_tolerance() {
        let x = solve_increasing(|x: f64| Ok(x.exp()), 1e4).unwrap();
        assert!((x.exp() - 1e4).abs() <= ROOT_TOL * 1e4);
        assert!((x - 1e4f64.ln()).abs() < 1e-10);
    }
}
