//! Exact sampling of the limiting joint degree law through its mixture
//! representation: a Bernoulli branch choice, a Pareto mixing variable, and
//! two conditionally independent negative binomial draws.
//!
//! Negative binomials of fractional order are drawn by gamma–Poisson
//! compounding: `T ~ Poisson(Λ)` with `Λ ~ Gamma(shape δ, scale (1−p)/p)`
//! has generating function `(s + (1−s)/p)^(−δ)`, exactly the required form,
//! for every real `δ > 0`.
//!
//! Determinism: all sampling is driven by a caller-supplied RNG; the
//! documented generator for reproducible runs is ChaCha8 seeded with
//! `seed_from_u64` (worker `k` of a parallel run uses stream `k` via
//! `set_stream`). Draw order within one limit sample is fixed: branch,
//! Pareto variable, in-degree NB, out-degree NB.

use crate::params::ModelParams;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01, Poisson};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("negative binomial order delta = {0} must be positive and finite")]
    BadOrder(f64),
    #[error("negative binomial scale p = {0} must lie in (0, 1)")]
    BadScale(f64),
}

/// Parameters of a negative binomial with generating function
/// `(s + (1-s)/p)^(-delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NbParams {
    delta: f64,
    p: f64,
}

impl NbParams {
    pub fn new(delta: f64, p: f64) -> Result<Self, SampleError> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(SampleError::BadOrder(delta));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(SampleError::BadScale(p));
        }
        Ok(NbParams { delta, p })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Mean `delta (1-p)/p`, from differentiating the generating function.
    pub fn mean(&self) -> f64 {
        self.delta * (1.0 - self.p) / self.p
    }
}

/// One draw of the negative binomial by gamma–Poisson compounding.
pub fn sample_nb<R: Rng + ?Sized>(nb: &NbParams, rng: &mut R) -> u64 {
    let scale = (1.0 - nb.p) / nb.p;
    let lambda: f64 = Gamma::new(nb.delta, scale)
        .expect("validated NB parameters")
        .sample(rng);
    if lambda <= 0.0 {
        // gamma underflow for tiny shape*scale
        return 0;
    }
    let draw: f64 = Poisson::new(lambda).expect("positive rate").sample(rng);
    draw as u64
}

/// Pareto variable on `[1, inf)` with tail `P(Z > z) = z^(-1/c1)`, drawn as
/// `U^(-c1)` for uniform `U` in `(0, 1)`.
pub fn sample_pareto<R: Rng + ?Sized>(c1: f64, rng: &mut R) -> f64 {
    debug_assert!(c1 > 0.0);
    let u: f64 = Open01.sample(rng);
    u.powf(-c1)
}

/// One draw of the limiting `(in, out)` pair with its latent variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeSample {
    pub i: u64,
    pub o: u64,
    /// Bernoulli branch: `true` selects the new-node-with-in-edge component
    /// (guaranteeing `i >= 1`), `false` the other one (`o >= 1`).
    pub branch: bool,
    /// The Pareto mixing value shared by both NB draws.
    pub z: f64,
}

/// Draws `(I, O)` from the limit law:
/// branch `B ~ Bernoulli(gamma/(alpha+gamma))`, `Z` Pareto with index
/// `1/c1`, then conditionally on `Z`
///
/// ```text
/// B = 1:  (1 + T[din+1](1/Z),  T[dout](Z^-a))
/// B = 0:  (T[din](1/Z),        1 + T[dout+1](Z^-a))
/// ```
///
/// with the two negative binomials independent given `Z`. An order of zero
/// degenerates to the constant zero.
pub fn sample_limit<R: Rng + ?Sized>(params: &ModelParams<f64>, rng: &mut R) -> DegreeSample {
    let d = params.derive();
    let branch = rng.gen::<f64>() < params.gamma_branch_weight();
    let z = sample_pareto(d.c1, rng);
    let p_in = 1.0 / z;
    let p_out = z.powf(-d.a);
    let nb_draw = |delta: f64, p: f64, rng: &mut R| -> u64 {
        if delta == 0.0 {
            return 0;
        }
        sample_nb(&NbParams::new(delta, p).expect("z > 1 keeps p in (0,1)"), rng)
    };
    let (i, o) = if branch {
        (
            1 + nb_draw(params.delta_in + 1.0, p_in, rng),
            nb_draw(params.delta_out, p_out, rng),
        )
    } else {
        (
            nb_draw(params.delta_in, p_in, rng),
            1 + nb_draw(params.delta_out + 1.0, p_out, rng),
        )
    };
    DegreeSample { i, o, branch, z }
}
