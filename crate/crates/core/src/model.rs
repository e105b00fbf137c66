//! Model description: lane velocities, maximum densities, the lane-change
//! source and the nonlocal range, plus sampled validation of the structural
//! assumptions the scheme relies on.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::velocity::{VelocityLaw, VALIDATION_SAMPLES};

type RateFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Lane-change rate `H(w1, w2, x) >= 0`.
#[derive(Clone)]
pub enum LaneChange {
    /// `scale * chi_[a, b](x)`, evaluated sharply.
    Indicator { a: f64, b: f64, scale: f64 },
    Constant(f64),
    Custom(RateFn),
}

impl fmt::Debug for LaneChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LaneChange::Indicator { a, b, scale } => {
                write!(f, "Indicator {{ a: {a}, b: {b}, scale: {scale} }}")
            }
            LaneChange::Constant(c) => write!(f, "Constant({c})"),
            LaneChange::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl LaneChange {
    pub fn custom<F>(rate: F) -> Self
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        LaneChange::Custom(Arc::new(rate))
    }

    #[inline]
    pub fn rate(&self, w1: f64, w2: f64, x: f64) -> f64 {
        match self {
            LaneChange::Indicator { a, b, scale } => {
                if x >= *a && x <= *b {
                    *scale
                } else {
                    0.0
                }
            }
            LaneChange::Constant(c) => *c,
            LaneChange::Custom(h) => h(w1, w2, x),
        }
    }

    /// Exact bound metadata for the closed-form rates; `None` for custom ones.
    pub fn natural_bounds(&self) -> Option<HBounds> {
        match self {
            LaneChange::Indicator { scale, .. } => Some(HBounds {
                h: libm::fabs(*scale),
                h1: 0.0,
                h2: 0.0,
                h_bv: 2.0 * libm::fabs(*scale),
            }),
            LaneChange::Constant(c) => Some(HBounds { h: libm::fabs(*c), h1: 0.0, h2: 0.0, h_bv: 0.0 }),
            LaneChange::Custom(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LaneChange::Constant(c) if *c == 0.0)
            || matches!(self, LaneChange::Indicator { scale, .. } if *scale == 0.0)
    }
}

/// Supplied bounds on `H`: sup norm, sup of the two partial derivatives in
/// the density arguments, and the total variation in `x`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HBounds {
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
    pub h_bv: f64,
}

/// The lane-exchange term: lane 1 gains `+S`, lane 2 gains `-S`.
#[derive(Debug, Clone)]
pub struct SourceSpec {
    pub rate: LaneChange,
    pub bounds: HBounds,
}

impl SourceSpec {
    /// Uses the closed-form bounds of indicator and constant rates.
    pub fn new(rate: LaneChange) -> Result<Self> {
        let bounds = rate.natural_bounds().ok_or_else(|| {
            Error::InvalidParameter("custom lane-change rates need explicit bounds".into())
        })?;
        Ok(Self { rate, bounds })
    }

    pub fn with_bounds(rate: LaneChange, bounds: HBounds) -> Self {
        Self { rate, bounds }
    }

    pub fn none() -> Self {
        Self { rate: LaneChange::Constant(0.0), bounds: HBounds::default() }
    }
}

/// `(rho2 / rho_max2 - rho1 / rho_max1) * H(w1, w2, x)`, the rate added to lane 1.
#[inline]
pub fn source_rate(rho1: f64, rho2: f64, w1: f64, w2: f64, x: f64, rho_max: [f64; 2], spec: &SourceSpec) -> f64 {
    (rho2 / rho_max[1] - rho1 / rho_max[0]) * spec.rate.rate(w1, w2, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    /// Zero-order extrapolation ghost cells on both ends, constant
    /// continuation of the density beyond the right end for the kernel.
    #[default]
    OutflowExtrapolation,
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub velocity: [VelocityLaw; 2],
    pub rho_max: [f64; 2],
    pub source: SourceSpec,
    /// Nonlocal range; zero selects the local model.
    pub eta: f64,
    pub boundary: BoundaryPolicy,
}

impl ModelSpec {
    pub fn new(velocity: [VelocityLaw; 2], rho_max: [f64; 2], source: SourceSpec, eta: f64) -> Self {
        Self { velocity, rho_max, source, eta, boundary: BoundaryPolicy::default() }
    }

    pub fn with_eta(&self, eta: f64) -> Self {
        Self { eta, ..self.clone() }
    }

    pub fn is_local(&self) -> bool {
        self.eta == 0.0
    }

    #[inline]
    pub fn source_rate(&self, rho1: f64, rho2: f64, w1: f64, w2: f64, x: f64) -> f64 {
        source_rate(rho1, rho2, w1, w2, x, self.rho_max, &self.source)
    }

    pub fn rho_max_norm(&self) -> f64 {
        self.rho_max[0].max(self.rho_max[1])
    }

    /// Fails with every violation joined, or succeeds if the model is admissible.
    pub fn ensure_valid(&self) -> Result<()> {
        self.ensure_valid_on(DEFAULT_X_WINDOW)
    }

    /// As [`ModelSpec::ensure_valid`], sampling `H` over `window` in `x`.
    pub fn ensure_valid_on(&self, window: (f64, f64)) -> Result<()> {
        let violations = validate_model_on(self, window);
        if violations.is_empty() {
            return Ok(());
        }
        let mut msg = String::new();
        for (i, v) in violations.iter().enumerate() {
            if i > 0 {
                msg.push_str("; ");
            }
            msg.push_str(&format!("{v}"));
        }
        Err(Error::InvalidModel(msg))
    }
}

/// A failed structural check, naming the assumption it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub assumption: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.assumption, self.detail)
    }
}

pub const LANE_VELOCITIES: &str = "Lane-wise velocities";
pub const MAXIMUM_DENSITIES: &str = "Maximum lane densities";
pub const NONLOCAL_IMPACT: &str = "Nonlocal impact";
pub const LANE_CHANGING: &str = "RHS, lane changing";

/// Default sampling window in `x` for the lane-change rate.
pub const DEFAULT_X_WINDOW: (f64, f64) = (-10.0, 10.0);

pub fn validate_model(spec: &ModelSpec) -> Vec<Violation> {
    validate_model_on(spec, DEFAULT_X_WINDOW)
}

/// Sampled checks of the model assumptions, with `H` probed for `x` in `window`.
pub fn validate_model_on(spec: &ModelSpec, window: (f64, f64)) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |assumption, detail: String| out.push(Violation { assumption, detail });

    for (i, &cap) in spec.rho_max.iter().enumerate() {
        if !(cap > 0.0 && cap.is_finite()) {
            push(MAXIMUM_DENSITIES, format!("rho_max of lane {} must be positive, got {cap}", i + 1));
        }
    }
    if !(spec.eta >= 0.0 && spec.eta.is_finite()) {
        push(NONLOCAL_IMPACT, format!("eta must be >= 0, got {}", spec.eta));
    }

    let n = VALIDATION_SAMPLES;
    for (i, law) in spec.velocity.iter().enumerate() {
        let cap = spec.rho_max[i];
        if !(cap > 0.0 && cap.is_finite()) {
            continue;
        }
        let mut rising = None;
        let mut negative = None;
        for k in 0..n {
            let u = cap * k as f64 / (n - 1) as f64;
            let slope = law.derivative(u);
            if rising.is_none() && !(slope <= 0.0) {
                rising = Some((u, slope));
            }
            let speed = law.evaluate(u);
            if negative.is_none() && !(speed >= 0.0) {
                negative = Some((u, speed));
            }
        }
        if let Some((u, slope)) = rising {
            push(LANE_VELOCITIES, format!("V' > 0 detected for lane {} (V'({u}) = {slope})", i + 1));
        }
        if let Some((u, speed)) = negative {
            push(LANE_VELOCITIES, format!("V < 0 detected for lane {} (V({u}) = {speed})", i + 1));
        }
    }

    let b = spec.source.bounds;
    for (name, value) in [("H", b.h), ("H_1", b.h1), ("H_2", b.h2), ("H_BV", b.h_bv)] {
        if !(value >= 0.0 && value.is_finite()) {
            push(LANE_CHANGING, format!("bound {name} must be finite and >= 0, got {value}"));
        }
    }

    let w_cap = spec.rho_max_norm();
    if w_cap > 0.0 && w_cap.is_finite() {
        let (x_lo, x_hi) = window;
        let h = &spec.source.rate;
        let step = 1e-6 * w_cap;
        let (mut sup, mut sup1, mut sup2) = (0.0f64, 0.0f64, 0.0f64);
        let mut negative = None;
        for k in 0..n {
            // R3 low-discrepancy lattice over (w1, w2, x)
            let kf = k as f64 + 0.5;
            let w1 = w_cap * frac(kf * 0.819_172_513_396_164_4);
            let w2 = w_cap * frac(kf * 0.671_043_606_703_789_2);
            let x = x_lo + (x_hi - x_lo) * frac(kf * 0.549_700_477_901_970_5);
            let value = h.rate(w1, w2, x);
            if negative.is_none() && !(value >= 0.0) {
                negative = Some((w1, w2, x, value));
            }
            sup = sup.max(libm::fabs(value));
            let d1 = (h.rate((w1 + step).min(w_cap), w2, x) - h.rate((w1 - step).max(0.0), w2, x))
                / ((w1 + step).min(w_cap) - (w1 - step).max(0.0));
            let d2 = (h.rate(w1, (w2 + step).min(w_cap), x) - h.rate(w1, (w2 - step).max(0.0), x))
                / ((w2 + step).min(w_cap) - (w2 - step).max(0.0));
            sup1 = sup1.max(libm::fabs(d1));
            sup2 = sup2.max(libm::fabs(d2));
        }
        if let Some((w1, w2, x, value)) = negative {
            push(LANE_CHANGING, format!("H < 0 detected: H({w1}, {w2}, {x}) = {value}"));
        }
        let slack = |bound: f64| bound * (1.0 + 1e-6) + 1e-9;
        if sup > slack(b.h) {
            push(LANE_CHANGING, format!("sampled sup |H| = {sup} exceeds supplied bound {}", b.h));
        }
        if sup1 > slack(b.h1) {
            push(LANE_CHANGING, format!("sampled sup |d1 H| = {sup1} exceeds supplied bound {}", b.h1));
        }
        if sup2 > slack(b.h2) {
            push(LANE_CHANGING, format!("sampled sup |d2 H| = {sup2} exceeds supplied bound {}", b.h2));
        }
    }
    out
}

fn frac(v: f64) -> f64 {
    v - libm::floor(v)
}
