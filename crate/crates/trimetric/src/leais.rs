//! Stability metric: per-input-dimension Lyapunov-style exponents.
//!
//! Two readings of the same quantity are implemented. For a feedforward
//! model there is no time axis, so `t = 1` and the exponent of input
//! dimension `i` at a sampled point is `ln` of the L2 norm of Jacobian
//! column `i`; the headline value is the worst (max) exponent across
//! dimensions and sampled points, with the mean reported alongside. For a
//! one-dimensional iterated map the classical trajectory average
//! `(1/t) * sum ln |f'(x_k)|` applies after a transient is discarded.
//!
//! Zero-derivative directions would give `ln 0`; the norm is floored at
//! 1e-300 so every exponent stays finite and ordered.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{self, MlpModel, ModelError};

/// Norm floor applied before taking logs.
pub const NORM_FLOOR: f64 = 1e-300;

/// Tolerance for snapping a trajectory back onto the map's invariant domain
/// when rounding nudges it marginally outside.
const DOMAIN_SNAP: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LeaisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("trajectory left the map domain at step {step}: x = {value}")]
    DomainEscape { step: u64, value: f64 },
}

/// How the Jacobian is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeaisMode {
    Analytic,
    Fd,
}

/// Exponents at one sampled input point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointExponents {
    pub point: Vec<f64>,
    /// `ln ||J column i||` per input dimension.
    pub exponents: Vec<f64>,
    pub max: f64,
}

/// Aggregate stability estimate over sampled points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeaisResult {
    pub per_point: Vec<PointExponents>,
    pub max_over_points: f64,
    pub mean_over_points: f64,
    /// Always 1 for single-pass feedforward models.
    pub t: u32,
    pub sample_count: usize,
    pub seed: u64,
    pub mode: LeaisMode,
}

/// Estimates the stability exponent of a feedforward model over `sample_count`
/// points drawn uniformly from its input box.
pub fn leais_feedforward(
    model: &MlpModel,
    sample_count: usize,
    seed: u64,
    mode: LeaisMode,
    fd_step: f64,
) -> Result<LeaisResult, LeaisError> {
    if sample_count == 0 {
        return Err(LeaisError::InvalidParameter(
            "sample_count must be >= 1".into(),
        ));
    }
    if mode == LeaisMode::Fd && !(fd_step > 0.0 && fd_step.is_finite()) {
        return Err(LeaisError::InvalidParameter(
            "fd_step must be positive".into(),
        ));
    }
    let dims = model.input_dim();
    let points = model::sample_inputs(&model.input_spec, sample_count, seed);
    let mut per_point = Vec::with_capacity(sample_count);
    for x in points {
        let jac = match mode {
            LeaisMode::Analytic => model::jacobian_analytic(model, &x)?,
            LeaisMode::Fd => model::jacobian_fd(model, &x, fd_step)?,
        };
        let mut exponents = Vec::with_capacity(dims);
        for i in 0..dims {
            let norm = jac.iter().map(|row| row[i] * row[i]).sum::<f64>().sqrt();
            if !norm.is_finite() {
                return Err(ModelError::NonFiniteResult { point: x }.into());
            }
            exponents.push(norm.max(NORM_FLOOR).ln());
        }
        let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        per_point.push(PointExponents {
            point: x,
            exponents,
            max,
        });
    }
    let max_over_points = per_point
        .iter()
        .map(|p| p.max)
        .fold(f64::NEG_INFINITY, f64::max);
    let mean_over_points = per_point.iter().map(|p| p.max).sum::<f64>() / sample_count as f64;
    Ok(LeaisResult {
        per_point,
        max_over_points,
        mean_over_points,
        t: 1,
        sample_count,
        seed,
        mode,
    })
}

/// One-dimensional map families with a scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapFamily {
    Logistic,
    Tent,
    Linear,
}

/// A parameterized iterated map on its invariant domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IteratedMap {
    pub family: MapFamily,
    pub parameter: f64,
}

impl IteratedMap {
    pub fn new(family: MapFamily, parameter: f64) -> Result<Self, LeaisError> {
        if !parameter.is_finite() {
            return Err(LeaisError::InvalidParameter(
                "map parameter must be finite".into(),
            ));
        }
        match family {
            MapFamily::Logistic if !(0.0..=4.0).contains(&parameter) => Err(
                LeaisError::InvalidParameter("logistic parameter must be in [0, 4]".into()),
            ),
            MapFamily::Tent if !(parameter > 0.0 && parameter <= 2.0) => Err(
                LeaisError::InvalidParameter("tent parameter must be in (0, 2]".into()),
            ),
            MapFamily::Linear if parameter == 0.0 => Err(LeaisError::InvalidParameter(
                "linear parameter must be nonzero".into(),
            )),
            _ => Ok(IteratedMap { family, parameter }),
        }
    }

    pub fn logistic(r: f64) -> Result<Self, LeaisError> {
        Self::new(MapFamily::Logistic, r)
    }

    pub fn tent(mu: f64) -> Result<Self, LeaisError> {
        Self::new(MapFamily::Tent, mu)
    }

    pub fn linear(a: f64) -> Result<Self, LeaisError> {
        Self::new(MapFamily::Linear, a)
    }

    fn step(&self, x: f64) -> f64 {
        match self.family {
            MapFamily::Logistic => self.parameter * x * (1.0 - x),
            MapFamily::Tent => self.parameter * x.min(1.0 - x),
            MapFamily::Linear => self.parameter * x,
        }
    }

    /// |f'(x)|. At the tent map's kink the one-sided value `mu` is used.
    fn derivative_abs(&self, x: f64) -> f64 {
        match self.family {
            MapFamily::Logistic => (self.parameter * (1.0 - 2.0 * x)).abs(),
            MapFamily::Tent => self.parameter,
            MapFamily::Linear => self.parameter.abs(),
        }
    }

    fn domain(&self) -> Option<(f64, f64)> {
        match self.family {
            MapFamily::Logistic | MapFamily::Tent => Some((0.0, 1.0)),
            MapFamily::Linear => None,
        }
    }
}

/// Trajectory-averaged Lyapunov exponent of `map` started at `x0`:
/// `transient` steps are discarded, then `(1/t) * sum ln |f'(x_k)|` over the
/// next `t` states.
pub fn leais_iterated(
    map: &IteratedMap,
    x0: f64,
    t: u64,
    transient: u64,
) -> Result<f64, LeaisError> {
    if t == 0 {
        return Err(LeaisError::InvalidParameter("t must be >= 1".into()));
    }
    if !x0.is_finite() {
        return Err(LeaisError::InvalidParameter("x0 must be finite".into()));
    }
    let domain = map.domain();
    if let Some((lo, hi)) = domain {
        if x0 < lo || x0 > hi {
            return Err(LeaisError::DomainEscape { step: 0, value: x0 });
        }
    }
    let mut x = x0;
    let advance = |x: f64, step: u64| -> Result<f64, LeaisError> {
        let mut next = map.step(x);
        if let Some((lo, hi)) = domain {
            if next < lo || next > hi {
                // Rounding can nudge the iterate marginally outside; snap it
                // back, but treat anything beyond the tolerance as an escape.
                if next >= lo - DOMAIN_SNAP && next <= hi + DOMAIN_SNAP {
                    next = next.clamp(lo, hi);
                } else {
                    return Err(LeaisError::DomainEscape { step, value: next });
                }
            }
        }
        Ok(next)
    };
    for k in 0..transient {
        x = advance(x, k + 1)?;
    }
    // Kahan summation keeps the average exact to a few ulp even for long runs.
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for k in 0..t {
        let term = map.derivative_abs(x).max(NORM_FLOOR).ln();
        let y = term - carry;
        let s = sum + y;
        carry = (s - sum) - y;
        sum = s;
        if k + 1 < t {
            x = advance(x, transient + k + 1)?;
        }
    }
    Ok(sum / t as f64)
}
