//! Model parameters and the constants derived from them.
//!
//! The growth model takes probabilities `alpha`, `beta`, `gamma` summing to
//! one (each strictly below one) and nonnegative degree offsets `delta_in`,
//! `delta_out`. Everything downstream (the recursion coefficients, the tail
//! exponents, the standardization exponent) is a deterministic function of
//! these five numbers and lives in [`DerivedConstants`].

use crate::scalar::Real;
use thiserror::Error;

/// Simplex tolerance: |alpha + beta + gamma - 1| up to this is accepted and
/// renormalized away (user configs carry decimal round-off).
pub const SIMPLEX_TOL: f64 = 1e-12;

/// The five model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta_in: T,
    pub delta_out: T,
}

/// Validation failure for raw parameter values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter {name} = {value} is not finite")]
    NonFinite { name: &'static str, value: f64 },
    #[error("parameter {name} = {value} is negative")]
    Negative { name: &'static str, value: f64 },
    #[error("parameter {name} = {value} must be strictly smaller than 1")]
    NotBelowOne { name: &'static str, value: f64 },
    #[error("alpha + beta + gamma = {sum} differs from 1 beyond tolerance {tol}")]
    SimplexSum { sum: f64, tol: f64 },
}

/// Non-fatal conditions: the simulator and the recursion stay well defined,
/// but the corresponding marginal tail is no longer guaranteed power-like.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailWarning {
    /// alpha * delta_in + gamma = 0
    InTailDegenerate,
    /// gamma * delta_out + alpha = 0
    OutTailDegenerate,
}

impl std::fmt::Display for TailWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TailWarning::InTailDegenerate => write!(
                f,
                "alpha*delta_in + gamma = 0: in-degree tail is not guaranteed to be power-like"
            ),
            TailWarning::OutTailDegenerate => write!(
                f,
                "gamma*delta_out + alpha = 0: out-degree tail is not guaranteed to be power-like"
            ),
        }
    }
}

/// Constants derived from validated parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants<T> {
    /// (alpha + beta) / (1 + delta_in (alpha + gamma))
    pub c1: T,
    /// (beta + gamma) / (1 + delta_out (alpha + gamma))
    pub c2: T,
    /// Standardization exponent a = c2 / c1.
    pub a: T,
    /// c1 delta_in + c2 delta_out + 1.
    pub rho: T,
    /// In-degree tail exponent, 1 + 1/c1.
    pub alpha_in: T,
    /// Out-degree tail exponent, 1 + 1/c2.
    pub alpha_out: T,
    /// alpha*delta_in + gamma > 0, i.e. the in-tail claim applies.
    pub in_tail_valid: bool,
    /// gamma*delta_out + alpha > 0, i.e. the out-tail claim applies.
    pub out_tail_valid: bool,
}

impl<T: Real> ModelParams<T> {
    /// Validates and normalizes raw values. Equivalent to
    /// `ModelParams { .. }.validate()`.
    pub fn new(alpha: T, beta: T, gamma: T, delta_in: T, delta_out: T) -> Result<Self, ParamError> {
        ModelParams {
            alpha,
            beta,
            gamma,
            delta_in,
            delta_out,
        }
        .validate()
    }

    /// Checks the parameter domain and renormalizes `(alpha, beta, gamma)`
    /// by their sum when the sum is within [`SIMPLEX_TOL`] of one.
    pub fn validate(self) -> Result<Self, ParamError> {
        let fields = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta_in", self.delta_in),
            ("delta_out", self.delta_out),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(ParamError::NonFinite {
                    name,
                    value: v.as_f64(),
                });
            }
            if v < T::zero() {
                return Err(ParamError::Negative {
                    name,
                    value: v.as_f64(),
                });
            }
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ] {
            if v >= T::one() {
                return Err(ParamError::NotBelowOne {
                    name,
                    value: v.as_f64(),
                });
            }
        }
        let sum = self.alpha + self.beta + self.gamma;
        // In f32 the nominal tolerance is below machine precision; widen to a
        // few ulps so exact inputs still validate.
        let tol = T::of(SIMPLEX_TOL).max(T::epsilon() * T::of(8.0));
        if (sum - T::one()).abs() > tol {
            return Err(ParamError::SimplexSum {
                sum: sum.as_f64(),
                tol: tol.as_f64(),
            });
        }
        Ok(ModelParams {
            alpha: self.alpha / sum,
            beta: self.beta / sum,
            gamma: self.gamma / sum,
            delta_in: self.delta_in,
            delta_out: self.delta_out,
        })
    }

    /// Degenerate-tail conditions. These are warnings, not errors: growth
    /// and the recursion remain well defined, only the tail-exponent claims
    /// are void.
    pub fn tail_warnings(&self) -> Vec<TailWarning> {
        let mut w = Vec::new();
        if self.alpha * self.delta_in + self.gamma == T::zero() {
            w.push(TailWarning::InTailDegenerate);
        }
        if self.gamma * self.delta_out + self.alpha == T::zero() {
            w.push(TailWarning::OutTailDegenerate);
        }
        w
    }

    /// Computes every derived constant. Cannot fail on validated input:
    /// `c1 > 0` because `alpha + beta = 1 - gamma > 0`, and `c2 > 0` because
    /// `beta + gamma = 1 - alpha > 0`.
    pub fn derive(&self) -> DerivedConstants<T> {
        let one = T::one();
        let s = self.alpha + self.gamma;
        let c1 = (self.alpha + self.beta) / (one + self.delta_in * s);
        let c2 = (self.beta + self.gamma) / (one + self.delta_out * s);
        DerivedConstants {
            c1,
            c2,
            a: c2 / c1,
            rho: c1 * self.delta_in + c2 * self.delta_out + one,
            alpha_in: one + one / c1,
            alpha_out: one + one / c2,
            in_tail_valid: self.alpha * self.delta_in + self.gamma > T::zero(),
            out_tail_valid: self.gamma * self.delta_out + self.alpha > T::zero(),
        }
    }

    /// Weight alpha/(alpha+gamma) of the "new node with one out-edge" source
    /// term. Well defined after validation (beta < 1 forces alpha+gamma > 0).
    pub fn alpha_branch_weight(&self) -> T {
        self.alpha / (self.alpha + self.gamma)
    }

    /// Weight gamma/(alpha+gamma) of the "new node with one in-edge" source
    /// term.
    pub fn gamma_branch_weight(&self) -> T {
        self.gamma / (self.alpha + self.gamma)
    }
}
