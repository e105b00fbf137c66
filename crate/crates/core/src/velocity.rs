//! Lane velocity laws `V(rho)` and the fundamental diagram `f(u) = u V(u)`.

use alloc::format;
use alloc::sync::Arc;
use core::fmt;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityFamily {
    Greenshields,
    Custom,
}

#[derive(Clone)]
enum Shape {
    /// `v_free * (1 - rho / rho_ref)`
    Affine,
    Custom { speed: ScalarFn, slope: ScalarFn },
}

/// A density-to-speed law with its derivative.
#[derive(Clone)]
pub struct VelocityLaw {
    v_free: f64,
    rho_ref: f64,
    shape: Shape,
}

impl fmt::Debug for VelocityLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VelocityLaw")
            .field("family", &self.family())
            .field("v_free", &self.v_free)
            .field("rho_ref", &self.rho_ref)
            .finish()
    }
}

/// Greenshields law `V(rho) = v_free (1 - rho / rho_ref)`.
pub fn greenshields(v_free: f64, rho_ref: f64) -> Result<VelocityLaw> {
    if !(v_free > 0.0 && v_free.is_finite()) {
        return Err(Error::InvalidParameter(format!("v_free must be positive, got {v_free}")));
    }
    if !(rho_ref > 0.0 && rho_ref.is_finite()) {
        return Err(Error::InvalidParameter(format!("rho_ref must be positive, got {rho_ref}")));
    }
    Ok(VelocityLaw { v_free, rho_ref, shape: Shape::Affine })
}

impl VelocityLaw {
    /// A user-supplied law. `v_free` is informational; `rho_ref` is the jam
    /// density over which the law is expected to be admissible.
    pub fn custom<V, D>(rho_ref: f64, speed: V, slope: D) -> Result<Self>
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(rho_ref > 0.0 && rho_ref.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho_ref must be positive, got {rho_ref}")));
        }
        let v_free = speed(0.0);
        Ok(Self { v_free, rho_ref, shape: Shape::Custom { speed: Arc::new(speed), slope: Arc::new(slope) } })
    }

    pub fn family(&self) -> VelocityFamily {
        match self.shape {
            Shape::Affine => VelocityFamily::Greenshields,
            Shape::Custom { .. } => VelocityFamily::Custom,
        }
    }

    pub fn v_free(&self) -> f64 {
        self.v_free
    }

    pub fn rho_ref(&self) -> f64 {
        self.rho_ref
    }

    #[inline]
    pub fn evaluate(&self, rho: f64) -> f64 {
        match &self.shape {
            Shape::Affine => self.v_free * (1.0 - rho / self.rho_ref),
            Shape::Custom { speed, .. } => speed(rho),
        }
    }

    #[inline]
    pub fn derivative(&self, rho: f64) -> f64 {
        match &self.shape {
            Shape::Affine => -self.v_free / self.rho_ref,
            Shape::Custom { slope, .. } => slope(rho),
        }
    }

    /// Flux `u V(u)`.
    #[inline]
    pub fn flux(&self, u: f64) -> f64 {
        u * self.evaluate(u)
    }

    /// `max |f'(u)|` sampled on `[0, cap]`, with `f'(u) = V(u) + u V'(u)`.
    pub fn max_wave_speed(&self, cap: f64) -> f64 {
        sample(cap, |u| libm::fabs(self.evaluate(u) + u * self.derivative(u)))
    }

    /// `sup V` sampled on `[0, cap]`.
    pub fn max_speed(&self, cap: f64) -> f64 {
        sample(cap, |u| self.evaluate(u))
    }

    /// `sup |V'|` sampled on `[0, cap]`.
    pub fn max_slope(&self, cap: f64) -> f64 {
        sample(cap, |u| libm::fabs(self.derivative(u)))
    }

    /// Extremum of the flux inside `[lo, hi]` besides the endpoints:
    /// the stationary point for the affine law, a golden-section search otherwise.
    pub(crate) fn interior_extremum(&self, lo: f64, hi: f64, maximize: bool) -> Option<f64> {
        if hi <= lo {
            return None;
        }
        match self.shape {
            Shape::Affine => {
                let sigma = 0.5 * self.rho_ref;
                (sigma > lo && sigma < hi).then_some(sigma)
            }
            Shape::Custom { .. } => {
                let sign = if maximize { 1.0 } else { -1.0 };
                Some(golden_section(lo, hi, |u| sign * self.flux(u)))
            }
        }
    }
}

pub(crate) const VALIDATION_SAMPLES: usize = 1024;

fn sample(cap: f64, g: impl Fn(f64) -> f64) -> f64 {
    let n = VALIDATION_SAMPLES;
    (0..n)
        .map(|k| g(cap * k as f64 / (n - 1) as f64))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Maximiser of a unimodal `g` on `[lo, hi]`.
fn golden_section(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let (mut ga, mut gb) = (g(a), g(b));
    for _ in 0..200 {
        if hi - lo <= 1e-14 * (1.0 + libm::fabs(hi)) {
            break;
        }
        if ga < gb {
            lo = a;
            a = b;
            ga = gb;
            b = lo + INV_PHI * (hi - lo);
            gb = g(b);
        } else {
            hi = b;
            b = a;
            gb = ga;
            a = hi - INV_PHI * (hi - lo);
            ga = g(a);
        }
    }
    0.5 * (lo + hi)
}
