//! Closed-form expressions accepted in inline rule descriptors. Each carries
//! exact partial derivatives, so no finite differences are involved.

use serde::{Deserialize, Serialize};

use crate::mathcore::Func2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expr {
    /// `sum_k (a_k + b_k t) x^k`, with `coeffs[k] = [a_k, b_k]`.
    Poly { coeffs: Vec<[f64; 2]> },
    /// `scale * exp(alpha x + beta t + gamma)`.
    Exp {
        scale: f64,
        alpha: f64,
        #[serde(default)]
        beta: f64,
        #[serde(default)]
        gamma: f64,
    },
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Poly { coeffs: vec![[c, 0.0]] }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Expr::Poly { coeffs } => coeffs.iter().all(|&[a, b]| a == 0.0 && b == 0.0),
            Expr::Exp { scale, .. } => *scale == 0.0,
        }
    }

    /// The value when the expression does not depend on `t` or `x`.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Expr::Poly { coeffs } => {
                if coeffs.iter().enumerate().all(|(k, &[a, b])| b == 0.0 && (k == 0 || a == 0.0)) {
                    Some(coeffs.first().map_or(0.0, |c| c[0]))
                } else {
                    None
                }
            }
            Expr::Exp { scale, alpha, beta, gamma } => {
                (*alpha == 0.0 && *beta == 0.0).then(|| scale * gamma.exp())
            }
        }
    }

    pub fn check(&self) -> Result<(), String> {
        let finite = match self {
            Expr::Poly { coeffs } => coeffs.iter().flatten().all(|v| v.is_finite()),
            Expr::Exp { scale, alpha, beta, gamma } => [scale, alpha, beta, gamma].iter().all(|v| v.is_finite()),
        };
        if !finite {
            return Err("expression coefficients must be finite".into());
        }
        if let Expr::Poly { coeffs } = self {
            if coeffs.is_empty() {
                return Err("polynomial needs at least one coefficient".into());
            }
        }
        Ok(())
    }

    pub fn to_func(&self) -> Func2 {
        if self.is_zero() {
            return Func2::zero();
        }
        match self.clone() {
            Expr::Poly { coeffs } => {
                let c = coeffs.clone();
                let f = move |t: f64, x: f64| poly(&c, t, x, 0, false);
                let (c1, c2, c3) = (coeffs.clone(), coeffs.clone(), coeffs);
                Func2::new(f)
                    .with_dt(move |t, x| poly(&c1, t, x, 0, true))
                    .with_dx(move |t, x| poly(&c2, t, x, 1, false))
                    .with_dxx(move |t, x| poly(&c3, t, x, 2, false))
            }
            Expr::Exp { scale, alpha, beta, gamma } => {
                let e = move |t: f64, x: f64| scale * (alpha * x + beta * t + gamma).exp();
                Func2::new(e)
                    .with_dt(move |t, x| beta * e(t, x))
                    .with_dx(move |t, x| alpha * e(t, x))
                    .with_dxx(move |t, x| alpha * alpha * e(t, x))
            }
        }
    }
}

/// `order`-th x-derivative of the polynomial, or its t-derivative when `d_t`.
fn poly(coeffs: &[[f64; 2]], t: f64, x: f64, order: usize, d_t: bool) -> f64 {
    let mut acc = 0.0;
    for k in (order..coeffs.len()).rev() {
        let [a, b] = coeffs[k];
        let c = if d_t { b } else { a + b * t };
        let falling: f64 = (0..order).map(|i| (k - i) as f64).product();
        acc = acc * x + falling * c;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_partials() {
        // (1 + 2t) + 3 x - t x^2
        let e = Expr::Poly { coeffs: vec![[1.0, 2.0], [3.0, 0.0], [0.0, -1.0]] };
        let f = e.to_func();
        let (t, x) = (0.5, 2.0);
        assert_eq!(f.eval(t, x), 2.0 + 6.0 - 2.0);
        assert_eq!(f.d_t(t, x), 2.0 - 4.0);
        assert_eq!(f.d_x(t, x), 3.0 - 2.0);
        assert_eq!(f.d_xx(t, x), -1.0);
    }

    #[test]
    fn exponential_and_partials() {
        let e = Expr::Exp { scale: 2.0, alpha: 1.0, beta: -0.5, gamma: 0.5 };
        let f = e.to_func();
        let v = 2.0 * (0.3 - 0.05 + 0.5f64).exp();
        assert!((f.eval(0.1, 0.3) - v).abs() < 1e-15);
        assert!((f.d_t(0.1, 0.3) + 0.5 * v).abs() < 1e-15);
        assert!((f.d_xx(0.1, 0.3) - v).abs() < 1e-15);
    }

    #[test]
    fn constants_are_recognized() {
        assert_eq!(Expr::constant(2.0).as_constant(), Some(2.0));
        assert!(Expr::constant(0.0).to_func().is_zero());
        assert_eq!(Expr::Poly { coeffs: vec![[1.0, 0.0], [1.0, 0.0]] }.as_constant(), None);
        assert_eq!(Expr::Exp { scale: 1.0, alpha: 0.0, beta: 0.0, gamma: 0.0 }.as_constant(), Some(1.0));
    }

    #[test]
    fn parses_from_json() {
        let e: Expr = serde_json::from_str(r#"{"kind":"exp","scale":1,"alpha":1}"#).unwrap();
        assert_eq!(e, Expr::Exp { scale: 1.0, alpha: 1.0, beta: 0.0, gamma: 0.0 });
        assert!(serde_json::from_str::<Expr>(r#"{"kind":"poly","coeffs":[[1,0]],"extra":1}"#).is_err());
        assert!(serde_json::from_str::<Expr>(r#"{"kind":"sin","scale":1}"#).is_err());
    }
}
