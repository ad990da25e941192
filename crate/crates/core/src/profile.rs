//! Radial core profiles: the potential well F, the core energy functional
//! on [0, R], its minimizing profile, and the core energy constant.

use crate::{Error, Result};

/// Potential well for the field modulus. The contract: F is smooth enough
/// on [0, infinity), vanishes only at 1, and is bounded below near 1 by a
/// positive multiple of (1 - s)^2, which a construction-time sample sweep
/// witnesses.
pub struct PotentialF {
    name: String,
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    df: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Witnessed coercivity constant: min of F(s)/(1-s)^2 over the sample
    /// sweep.
    coercivity: f64,
}

impl PotentialF {
    /// The standard well F(s) = (1 - s)^2.
    pub fn standard() -> PotentialF {
        PotentialF::new(
            "quartic",
            Box::new(|s| (1.0 - s) * (1.0 - s)),
            Box::new(|s| -2.0 * (1.0 - s)),
        )
        .expect("standard well satisfies its own contract")
    }

    /// Validate and wrap a well. Checks F(1) = 0, positivity away from 1,
    /// a positive coercivity constant on samples of [0, 4], and that `df`
    /// is the derivative of `f` (finite differences).
    pub fn new(
        name: &str,
        f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
        df: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Result<PotentialF> {
        if f(1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "potential well '{name}' must vanish at 1, got F(1) = {}",
                f(1.0)
            )));
        }
        let mut coercivity = f64::INFINITY;
        for k in 0..=400 {
            let s = k as f64 / 100.0;
            let v = f(s);
            if (s - 1.0).abs() < 1e-9 {
                continue;
            }
            if v <= 0.0 {
                return Err(Error::Precondition(format!(
                    "potential well '{name}' must be positive away from 1, got F({s}) = {v}"
                )));
            }
            coercivity = coercivity.min(v / (1.0 - s).powi(2));
            let h = 1e-6;
            let fd = (f(s + h) - f(s - h)) / (2.0 * h);
            if (fd - df(s)).abs() > 1e-4 * (1.0 + fd.abs()) {
                return Err(Error::Precondition(format!(
                    "derivative of potential well '{name}' is inconsistent at s = {s}: \
                     {} vs finite difference {fd}",
                    df(s)
                )));
            }
        }
        if !(coercivity > 0.0) {
            return Err(Error::Precondition(format!(
                "potential well '{name}' has no quadratic floor near 1"
            )));
        }
        Ok(PotentialF { name: name.to_string(), f, df, coercivity })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn eval(&self, s: f64) -> f64 {
        (self.f)(s)
    }
    pub fn deriv(&self, s: f64) -> f64 {
        (self.df)(s)
    }
    pub fn coercivity(&self) -> f64 {
        self.coercivity
    }
}
