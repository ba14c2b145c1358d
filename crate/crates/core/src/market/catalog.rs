//! Closed-form pricing rules addressable by name.

use crate::market::rule::{JumpPenalty, PricingRule};
use crate::mathcore::Func2;

pub const BACK_IDENTITY: &str = "back-identity";
pub const BACK_LOGNORMAL: &str = "back-lognormal";
pub const G_POSITIVE: &str = "g-positive";

pub const CATALOG_NAMES: [&str; 3] = [BACK_IDENTITY, BACK_LOGNORMAL, G_POSITIVE];

/// `H(t,x) = x`, `w = 1`, `c = j = g = 0`.
pub fn back_identity() -> PricingRule {
    PricingRule::new(BACK_IDENTITY, Func2::identity(), Func2::constant(1.0))
        .with_closed_kw(|_, x| x, |_, y| y)
        .with_h_inv(|_, a| a)
}

/// `H(t,x) = exp(x + (1-t)/2)`, `w = 1`.
pub fn back_lognormal() -> PricingRule {
    let e = |t: f64, x: f64| (x + 0.5 * (1.0 - t)).exp();
    let h = Func2::new(e)
        .with_dt(move |t, x| -0.5 * e(t, x))
        .with_dx(e)
        .with_dxx(e);
    PricingRule::new(BACK_LOGNORMAL, h, Func2::constant(1.0))
        .with_closed_kw(|_, x| x, |_, y| y)
        .with_h_inv(|t, a| if a > 0.0 { a.ln() - 0.5 * (1.0 - t) } else { f64::NAN })
}

/// `H(t,x) = x`, `w = 1 + t`, `g = 1/(1+t)^2`.
pub fn g_positive() -> PricingRule {
    let w = Func2::new(|t, _| 1.0 + t)
        .with_dt(|_, _| 1.0)
        .with_dx(|_, _| 0.0)
        .with_dxx(|_, _| 0.0);
    let g = Func2::new(|t, _| 1.0 / ((1.0 + t) * (1.0 + t)))
        .with_dt(|t, _| -2.0 / (1.0 + t).powi(3))
        .with_dx(|_, _| 0.0)
        .with_dxx(|_, _| 0.0);
    PricingRule::new(G_POSITIVE, Func2::identity(), w)
        .with_g(g)
        .with_closed_kw(|t, x| x / (1.0 + t), |t, y| y * (1.0 + t))
        .with_h_inv(|_, a| a)
}

/// Adds the penalties `c = c0` and `j(t, x, kappa) = lambda * kappa`.
pub fn penalized(rule: PricingRule, c0: f64, lambda: f64) -> PricingRule {
    if c0 == 0.0 && lambda == 0.0 {
        return rule;
    }
    let name = format!("{}[c0={},lambda={}]", rule.name, c0, lambda);
    let c = if c0 == 0.0 { Func2::zero() } else { Func2::constant(c0) };
    rule.with_c(c).with_j(JumpPenalty::linear(lambda, 0.0)).with_name(name)
}

pub fn by_name(name: &str) -> Option<PricingRule> {
    match name {
        BACK_IDENTITY => Some(back_identity()),
        BACK_LOGNORMAL => Some(back_lognormal()),
        G_POSITIVE => Some(g_positive()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        for name in CATALOG_NAMES {
            assert_eq!(by_name(name).unwrap().name, name);
        }
        assert!(by_name("kyle-1985").is_none());
    }

    #[test]
    fn penalized_variant_carries_penalties() {
        let r = penalized(back_identity(), 0.5, 0.25);
        assert!(!r.is_unpenalized());
        assert_eq!(r.c.eval(0.3, 9.0), 0.5);
        assert_eq!(r.j.eval(0.3, 9.0, 2.0), 0.5);
        assert!(penalized(back_identity(), 0.0, 0.0).is_unpenalized());
    }
}
