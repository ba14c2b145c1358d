use std::fmt;
use std::sync::Arc;

use crate::mathcore::{Eval2, Func2, QuadratureSpec};

pub type JumpFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Jump penalty `j(t, x, kappa)`.
#[derive(Clone)]
pub struct JumpPenalty {
    f: JumpFn,
    zero: bool,
}

impl JumpPenalty {
    pub fn new(f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            zero: false,
        }
    }

    pub fn zero() -> Self {
        Self {
            f: Arc::new(|_, _, _| 0.0),
            zero: true,
        }
    }

    /// `j(t, x, kappa) = lambda * kappa + shift`.
    pub fn linear(lambda: f64, shift: f64) -> Self {
        if lambda == 0.0 && shift == 0.0 {
            return Self::zero();
        }
        Self::new(move |_, _, k| lambda * k + shift)
    }

    #[inline]
    pub fn eval(&self, t: f64, x: f64, kappa: f64) -> f64 {
        (self.f)(t, x, kappa)
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }
}

/// Closed forms a rule may supply in place of quadrature and root finding.
#[derive(Clone, Default)]
pub struct ClosedForms {
    pub kw: Option<Eval2>,
    pub kw_inv: Option<Eval2>,
    /// `(t, a) -> xi(t, a)`, the inverse of `H(t, .)`.
    pub h_inv: Option<Eval2>,
}

/// The market maker's pricing rule `(H, w, c, j)` together with the `g` of
/// the weighting PDE `w_t + w^2 w_xx / 2 = w^2 g`.
#[derive(Clone)]
pub struct PricingRule {
    pub name: String,
    pub h: Func2,
    pub w: Func2,
    pub c: Func2,
    pub j: JumpPenalty,
    pub g: Func2,
    pub closed: ClosedForms,
    pub quad: QuadratureSpec,
}

impl fmt::Debug for PricingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PricingRule")
            .field("name", &self.name)
            .field("c_zero", &self.c.is_zero())
            .field("j_zero", &self.j.is_zero())
            .field("g_zero", &self.g.is_zero())
            .field("closed_kw", &self.closed.kw.is_some())
            .field("closed_h_inv", &self.closed.h_inv.is_some())
            .finish()
    }
}

impl PricingRule {
    /// Rule with `c = j = g = 0`.
    pub fn new(name: impl Into<String>, h: Func2, w: Func2) -> Self {
        Self {
            name: name.into(),
            h,
            w,
            c: Func2::zero(),
            j: JumpPenalty::zero(),
            g: Func2::zero(),
            closed: ClosedForms::default(),
            quad: QuadratureSpec::default(),
        }
    }

    pub fn with_c(mut self, c: Func2) -> Self {
        self.c = c;
        self
    }

    pub fn with_j(mut self, j: JumpPenalty) -> Self {
        self.j = j;
        self
    }

    pub fn with_g(mut self, g: Func2) -> Self {
        self.g = g;
        self
    }

    /// Sets `g = w_t / w^2 + w_xx / 2`, the value that solves the weighting PDE.
    pub fn with_derived_g(mut self) -> Self {
        let w = self.w.clone();
        self.g = Func2::new(move |t, x| {
            let wv = w.eval(t, x);
            w.d_t(t, x) / (wv * wv) + 0.5 * w.d_xx(t, x)
        });
        self
    }

    pub fn with_closed_kw(
        mut self,
        kw: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        kw_inv: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.closed.kw = Some(Arc::new(kw));
        self.closed.kw_inv = Some(Arc::new(kw_inv));
        self
    }

    pub fn with_h_inv(mut self, h_inv: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.closed.h_inv = Some(Arc::new(h_inv));
        self
    }

    /// Same rule, every kernel routed through quadrature and root finding.
    pub fn without_closed_forms(mut self) -> Self {
        self.closed = ClosedForms::default();
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// True when neither `c` nor `j` penalizes non-smooth trading.
    pub fn is_unpenalized(&self) -> bool {
        self.c.is_zero() && self.j.is_zero()
    }
}
