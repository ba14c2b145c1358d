use std::fmt;
use std::sync::Arc;

/// Shared evaluator of a function of `(t, x)`.
pub type Eval2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Relative spatial step of the finite-difference fallback.
pub const FD_SCALE_X: f64 = 1e-5;
/// Temporal step of the finite-difference fallback.
pub const FD_STEP_T: f64 = 1e-5;
/// Upper bound on the declared spatial step, relative to `1 + |x|`.
pub const FD_SCALE_MAX: f64 = 1e-4;

/// A function on `[0,1] x R` with optional closed-form partials.
///
/// Missing partials fall back to central differences with step
/// `fd_scale * (1 + |x|)` in space and [`FD_STEP_T`] in time, one-sided at
/// the ends of the time interval.
#[derive(Clone)]
pub struct Func2 {
    f: Eval2,
    dt: Option<Eval2>,
    dx: Option<Eval2>,
    dxx: Option<Eval2>,
    fd_scale: f64,
    zero: bool,
}

impl fmt::Debug for Func2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Func2")
            .field("closed_dt", &self.dt.is_some())
            .field("closed_dx", &self.dx.is_some())
            .field("closed_dxx", &self.dxx.is_some())
            .field("zero", &self.zero)
            .finish()
    }
}

impl Func2 {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            dt: None,
            dx: None,
            dxx: None,
            fd_scale: FD_SCALE_X,
            zero: false,
        }
    }

    /// The zero function. Kernels skip integrals whose integrand carries it.
    pub fn zero() -> Self {
        let mut z = Self::constant(0.0);
        z.zero = true;
        z
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_, _| c)
            .with_dt(|_, _| 0.0)
            .with_dx(|_, _| 0.0)
            .with_dxx(|_, _| 0.0)
    }

    /// `f(t, x) = x`.
    pub fn identity() -> Self {
        Self::new(|_, x| x)
            .with_dt(|_, _| 0.0)
            .with_dx(|_, _| 1.0)
            .with_dxx(|_, _| 0.0)
    }

    pub fn with_dt(mut self, d: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.dt = Some(Arc::new(d));
        self
    }

    pub fn with_dx(mut self, d: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.dx = Some(Arc::new(d));
        self
    }

    pub fn with_dxx(mut self, d: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.dxx = Some(Arc::new(d));
        self
    }

    /// Sets the relative spatial finite-difference step.
    ///
    /// Panics if the step exceeds [`FD_SCALE_MAX`] or is not positive.
    pub fn with_fd_scale(mut self, scale: f64) -> Self {
        assert!(
            scale > 0.0 && scale <= FD_SCALE_MAX,
            "finite-difference scale {scale} outside (0, {FD_SCALE_MAX}]"
        );
        self.fd_scale = scale;
        self
    }

    /// Drops all closed-form partials, forcing the finite-difference path.
    pub fn without_partials(mut self) -> Self {
        self.dt = None;
        self.dx = None;
        self.dxx = None;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn has_closed_partials(&self) -> bool {
        self.dt.is_some() && self.dx.is_some() && self.dxx.is_some()
    }

    pub fn fd_scale(&self) -> f64 {
        self.fd_scale
    }

    #[inline]
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        (self.f)(t, x)
    }

    pub fn evaluator(&self) -> Eval2 {
        Arc::clone(&self.f)
    }

    #[inline]
    pub fn d_t(&self, t: f64, x: f64) -> f64 {
        if let Some(d) = &self.dt {
            return d(t, x);
        }
        let h = FD_STEP_T;
        if t < h {
            (self.eval(t + h, x) - self.eval(t, x)) / h
        } else if t > 1.0 - h {
            (self.eval(t, x) - self.eval(t - h, x)) / h
        } else {
            (self.eval(t + h, x) - self.eval(t - h, x)) / (2.0 * h)
        }
    }

    #[inline]
    pub fn d_x(&self, t: f64, x: f64) -> f64 {
        if let Some(d) = &self.dx {
            return d(t, x);
        }
        let h = self.fd_scale * (1.0 + x.abs());
        (self.eval(t, x + h) - self.eval(t, x - h)) / (2.0 * h)
    }

    #[inline]
    pub fn d_xx(&self, t: f64, x: f64) -> f64 {
        if let Some(d) = &self.dxx {
            return d(t, x);
        }
        let h = self.fd_scale * (1.0 + x.abs());
        (self.eval(t, x + h) - 2.0 * self.eval(t, x) + self.eval(t, x - h)) / (h * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_differences_match_closed_forms() {
        let closed = Func2::new(|t, x: f64| (x + 0.5 * (1.0 - t)).exp())
            .with_dt(|t, x: f64| -0.5 * (x + 0.5 * (1.0 - t)).exp())
            .with_dx(|t, x: f64| (x + 0.5 * (1.0 - t)).exp())
            .with_dxx(|t, x: f64| (x + 0.5 * (1.0 - t)).exp());
        let fd = closed.clone().without_partials();
        for &t in &[0.0, 0.3, 1.0] {
            for &x in &[-1.0, 0.0, 0.7] {
                assert!((closed.d_t(t, x) - fd.d_t(t, x)).abs() < 1e-4);
                assert!((closed.d_x(t, x) - fd.d_x(t, x)).abs() < 1e-8);
                assert!((closed.d_xx(t, x) - fd.d_xx(t, x)).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn one_sided_time_difference_at_endpoints() {
        let f = Func2::new(|t, _| t * t);
        assert!((f.d_t(0.0, 0.0) - 0.0).abs() < 1e-4);
        assert!((f.d_t(1.0, 0.0) - 2.0).abs() < 1e-4);
    }

    #[test]
    #[should_panic]
    fn rejects_coarse_fd_step() {
        let _ = Func2::identity().with_fd_scale(1e-3);
    }
}
