use crate::error::{Error, Result};

/// A real function of one variable with an evaluation budget.
pub struct RealFn1D<F> {
    f: F,
    budget: usize,
    evaluations: usize,
}

impl<F: FnMut(f64) -> f64> RealFn1D<F> {
    pub const DEFAULT_BUDGET: usize = 100_000;

    pub fn new(f: F) -> Self {
        Self::with_budget(f, Self::DEFAULT_BUDGET)
    }

    /// # Panics
    /// If `budget` is zero.
    pub fn with_budget(f: F, budget: usize) -> Self {
        assert!(budget > 0, "evaluation budget must be positive");
        RealFn1D { f, budget, evaluations: 0 }
    }

    pub fn eval(&mut self, x: f64) -> Result<f64> {
        if self.evaluations >= self.budget {
            return Err(Error::Convergence {
                what: "function evaluation budget".into(),
                iterations: self.evaluations,
                residual: f64::NAN,
            });
        }
        self.evaluations += 1;
        Ok((self.f)(x))
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.evaluations
    }
}
