//! The one-sided exponential look-ahead operator
//! `W[rho](x) = (1/eta) * int_x^inf exp((x - y)/eta) rho(y) dy`,
//! evaluated exactly for piecewise-constant densities by backward recursion.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `dx / eta` beyond which `exp(-dx/eta)` is treated as zero.
const UNDERFLOW_RATIO: f64 = 700.0;

/// Per-cell decay `q = exp(-dx/eta)` and cell weight `w = 1 - q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelWeights {
    q: f64,
    w: f64,
    eta: f64,
    dx: f64,
}

impl KernelWeights {
    pub fn new(eta: f64, dx: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::NonpositiveEta(eta));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("dx must be positive, got {dx}")));
        }
        let ratio = dx / eta;
        let q = if ratio > UNDERFLOW_RATIO { 0.0 } else { libm::exp(-ratio) };
        Ok(Self { q, w: 1.0 - q, eta, dx })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchoring {
    /// `W[j]` sits at the left edge of cell `j` and includes cell `j`.
    CellAnchored,
    /// `W[j]` sits at interface `j + 1/2` and sees only cells right of it.
    InterfaceAnchored,
}

/// Nonlocal impact of both lanes on a common anchoring.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalField {
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub anchoring: Anchoring,
    pub eta: f64,
}

impl NonlocalField {
    /// Both lanes, tails continued with each lane's last cell.
    pub fn compute(rho1: &[f64], rho2: &[f64], kw: &KernelWeights, anchoring: Anchoring) -> Result<Self> {
        let eval = match anchoring {
            Anchoring::CellAnchored => eval_cell_anchored,
            Anchoring::InterfaceAnchored => eval_interface_anchored,
        };
        let tail = |r: &[f64]| r.last().copied().unwrap_or(0.0);
        Ok(Self {
            w1: eval(rho1, kw, tail(rho1))?,
            w2: eval(rho2, kw, tail(rho2))?,
            anchoring,
            eta: kw.eta(),
        })
    }

    pub fn lane(&self, lane: usize) -> &[f64] {
        match lane {
            0 => &self.w1,
            _ => &self.w2,
        }
    }
}

/// `W[j] = w rho[j] + q W[j+1]`, closed by `W[n-1] = w rho[n-1] + q right_boundary`.
pub fn eval_cell_anchored(rho: &[f64], kw: &KernelWeights, right_boundary: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; rho.len()];
    eval_cell_anchored_into(rho, kw, right_boundary, &mut out)?;
    Ok(out)
}

pub fn eval_cell_anchored_into(rho: &[f64], kw: &KernelWeights, right_boundary: f64, out: &mut [f64]) -> Result<()> {
    check(rho, out)?;
    let (q, w) = (kw.q, kw.w);
    let mut acc = right_boundary;
    for (dst, &r) in out.iter_mut().zip(rho).rev() {
        acc = w * r + q * acc;
        *dst = acc;
    }
    Ok(())
}

/// `W_half[j] = w rho[j+1] + q W_half[j+1]`, closed by `W_half[n-1] = right_boundary`.
pub fn eval_interface_anchored(rho: &[f64], kw: &KernelWeights, right_boundary: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; rho.len()];
    eval_interface_anchored_into(rho, kw, right_boundary, &mut out)?;
    Ok(out)
}

pub fn eval_interface_anchored_into(
    rho: &[f64],
    kw: &KernelWeights,
    right_boundary: f64,
    out: &mut [f64],
) -> Result<()> {
    check(rho, out)?;
    let n = rho.len();
    let (q, w) = (kw.q, kw.w);
    let mut acc = right_boundary;
    out[n - 1] = acc;
    for j in (0..n - 1).rev() {
        acc = w * rho[j + 1] + q * acc;
        out[j] = acc;
    }
    Ok(())
}

fn check(rho: &[f64], out: &[f64]) -> Result<()> {
    if rho.is_empty() {
        return Err(Error::InvalidParameter("empty density array".into()));
    }
    if out.len() != rho.len() {
        return Err(Error::LengthMismatch { expected: rho.len(), found: out.len() });
    }
    Ok(())
}

/// Discrete defect of `d/dx W = (W - rho)/eta`, scaled by `eta`:
/// `max_j |(W[j+1] - W[j])/dx - (W[j] - rho[j])/eta| * eta` over `j < n-1`.
pub fn identity_residual(rho: &[f64], cell_w: &[f64], kw: &KernelWeights) -> Result<f64> {
    if rho.len() < 3 {
        return Err(Error::InvalidParameter(alloc::format!(
            "identity residual needs at least 3 cells, got {}",
            rho.len()
        )));
    }
    if cell_w.len() != rho.len() {
        return Err(Error::LengthMismatch { expected: rho.len(), found: cell_w.len() });
    }
    let (dx, eta) = (kw.dx, kw.eta);
    let worst = (0..rho.len() - 1)
        .map(|j| libm::fabs((cell_w[j + 1] - cell_w[j]) / dx - (cell_w[j] - rho[j]) / eta) * eta)
        .fold(0.0, f64::max);
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::vec::Vec;

    fn weights_with_q(q: f64) -> KernelWeights {
        // dx / eta = -ln q
        KernelWeights::new(1.0, -libm::log(q)).unwrap()
    }

    /// Direct weighted sum `W[j] = sum_{m>=j} w q^(m-j) rho[m] + q^(n-j) tail`.
    fn brute_cell(rho: &[f64], kw: &KernelWeights, tail: f64) -> Vec<f64> {
        let n = rho.len();
        (0..n)
            .map(|j| {
                let mut s = 0.0;
                for m in j..n {
                    s += kw.w() * libm::pow(kw.q(), (m - j) as f64) * rho[m];
                }
                s + libm::pow(kw.q(), (n - j) as f64) * tail
            })
            .collect()
    }

    fn brute_interface(rho: &[f64], kw: &KernelWeights, tail: f64) -> Vec<f64> {
        let n = rho.len();
        (0..n)
            .map(|j| {
                let mut s = 0.0;
                for m in j + 1..n {
                    s += kw.w() * libm::pow(kw.q(), (m - j - 1) as f64) * rho[m];
                }
                s + libm::pow(kw.q(), (n - 1 - j) as f64) * tail
            })
            .collect()
    }

    #[test]
    fn constant_density_is_reproduced() {
        for eta in [1e-3, 0.1, 1.0, 50.0] {
            let kw = KernelWeights::new(eta, 0.01).unwrap();
            let rho = vec![0.6; 40];
            for w in eval_cell_anchored(&rho, &kw, 0.6).unwrap() {
                assert!((w - 0.6).abs() < 1e-15);
            }
            for w in eval_interface_anchored(&rho, &kw, 0.6).unwrap() {
                assert!((w - 0.6).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn two_cell_hand_values() {
        let kw = weights_with_q(0.5);
        assert!((kw.q() - 0.5).abs() < 1e-15);
        let w = eval_cell_anchored(&[1.0, 0.0], &kw, 0.0).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-15 && w[1] == 0.0);
        let oracle = brute_cell(&[1.0, 0.0], &kw, 0.0);
        assert!((oracle[0] - 0.5).abs() < 1e-15 && oracle[1] == 0.0);

        let h = eval_interface_anchored(&[1.0, 0.0], &kw, 0.0).unwrap();
        assert_eq!(h, vec![0.0, 0.0]);
    }

    #[test]
    fn three_cell_with_tail() {
        let kw = weights_with_q(0.5);
        let w = eval_cell_anchored(&[0.0, 0.0, 1.0], &kw, 1.0).unwrap();
        let oracle = brute_cell(&[0.0, 0.0, 1.0], &kw, 1.0);
        for (got, want) in w.iter().zip([0.25, 0.5, 1.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        for (a, b) in w.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn small_eta_degenerates_to_downstream_cell() {
        let kw = KernelWeights::new(1e-12, 0.01).unwrap();
        assert_eq!((kw.q(), kw.w()), (0.0, 1.0));
        let rho = [0.1, 0.7, 0.3, 0.9];
        assert_eq!(eval_interface_anchored(&rho, &kw, 0.5).unwrap(), vec![0.7, 0.3, 0.9, 0.5]);
        assert_eq!(eval_cell_anchored(&rho, &kw, 0.5).unwrap(), rho.to_vec());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(KernelWeights::new(0.0, 0.1), Err(Error::NonpositiveEta(_))));
        assert!(KernelWeights::new(-1.0, 0.1).is_err());
        let kw = KernelWeights::new(0.1, 0.01).unwrap();
        assert!(eval_cell_anchored(&[], &kw, 0.0).is_err());
        let mut out = [0.0; 2];
        assert!(eval_cell_anchored_into(&[1.0, 2.0, 3.0], &kw, 0.0, &mut out).is_err());
        assert!(identity_residual(&[1.0, 1.0], &[1.0, 1.0], &kw).is_err());
    }

    #[test]
    fn identity_residual_vanishes_on_constants() {
        let kw = KernelWeights::new(0.1, 0.01).unwrap();
        let rho = vec![0.3; 50];
        let w = eval_cell_anchored(&rho, &kw, 0.3).unwrap();
        assert!(identity_residual(&rho, &w, &kw).unwrap() < 1e-12);
    }

    /// Cell averages of sin on cells of width dx starting at x0.
    fn sin_averages(x0: f64, dx: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|j| {
                let a = x0 + j as f64 * dx;
                (libm::cos(a) - libm::cos(a + dx)) / dx
            })
            .collect()
    }

    #[test]
    fn sine_matches_closed_form_and_identity() {
        // For rho = sin, W(x) = (sin x + eta cos x) / (1 + eta^2).
        let (eta, dx, n) = (0.1, 1e-3, 12_000);
        let x0 = -2.0;
        let rho = sin_averages(x0, dx, n);
        let kw = KernelWeights::new(eta, dx).unwrap();
        let w = eval_cell_anchored(&rho, &kw, rho[n - 1]).unwrap();
        // stay 40 eta away from the truncated tail
        let interior = n - (40.0 * eta / dx) as usize;
        let mut worst = 0.0f64;
        for j in 0..interior {
            let x = x0 + j as f64 * dx;
            let exact = (libm::sin(x) + eta * libm::cos(x)) / (1.0 + eta * eta);
            worst = worst.max((w[j] - exact).abs());
        }
        // piecewise-constant averaging costs O(dx^2)
        assert!(worst < 5.0 * dx * dx, "max deviation from closed form {worst}");
        let res = identity_residual(&rho, &w, &kw).unwrap();
        assert!(res <= 5.0 * dx, "identity residual {res}");
    }

    #[test]
    fn identity_residual_refines_on_random_data() {
        // fixed eta, piecewise-constant random profile sampled at two resolutions
        let eta = 0.05;
        let coarse: Vec<f64> = (0..64u64).map(|k| ((k * 2654435761) % 1000) as f64 / 1000.0).collect();
        let mut last = f64::INFINITY;
        for level in [1000usize, 2000, 4000] {
            let dx = 1.0 / level as f64;
            let rho: Vec<f64> = (0..level).map(|j| coarse[j * 64 / level]).collect();
            let kw = KernelWeights::new(eta, dx).unwrap();
            let w = eval_cell_anchored(&rho, &kw, rho[level - 1]).unwrap();
            let res = identity_residual(&rho, &w, &kw).unwrap();
            assert!(res.is_finite() && res < last);
            last = res;
        }
    }

    fn tv(a: &[f64]) -> f64 {
        a.windows(2).map(|p| (p[1] - p[0]).abs()).sum()
    }

    proptest! {
        #[test]
        fn recursion_matches_weighted_sum(
            rho in prop::collection::vec(0.0f64..1.0, 1..200),
            tail in 0.0f64..1.0,
            ratio in 1e-3f64..5.0,
        ) {
            let kw = KernelWeights::new(1.0, ratio).unwrap();
            let fast = eval_cell_anchored(&rho, &kw, tail).unwrap();
            let slow = brute_cell(&rho, &kw, tail);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300) + 1e-15);
            }
            let fast = eval_interface_anchored(&rho, &kw, tail).unwrap();
            let slow = brute_interface(&rho, &kw, tail);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300) + 1e-15);
            }
        }

        #[test]
        fn averaging_properties(
            pairs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..120),
            tail in 0.0f64..1.0,
            ratio in 1e-3f64..3.0,
            alpha in -2.0f64..2.0,
            beta in -2.0f64..2.0,
        ) {
            let kw = KernelWeights::new(1.0, ratio).unwrap();
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<f64> = pairs.iter().map(|p| p.0.max(p.1)).collect();
            let lo = a.iter().copied().fold(tail, f64::min);
            let hi = a.iter().copied().fold(tail, f64::max);
            for eval in [eval_cell_anchored, eval_interface_anchored] {
                let wa = eval(&a, &kw, tail).unwrap();
                let wb = eval(&b, &kw, tail).unwrap();
                for (&x, &y) in wa.iter().zip(&wb) {
                    // convex averaging and order preservation
                    prop_assert!(x >= lo - 1e-15 && x <= hi + 1e-15);
                    prop_assert!(x <= y + 1e-15);
                }
                // linearity
                let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + beta * y).collect();
                let wm = eval(&mix, &kw, (alpha + beta) * tail).unwrap();
                for ((m, x), y) in wm.iter().zip(&wa).zip(&wb) {
                    let expect = alpha * x + beta * y;
                    prop_assert!((m - expect).abs() <= 1e-12 * (alpha.abs() + beta.abs()).max(1.0));
                }
                // TV non-expansion with the boundary jump accounted
                let bound = tv(&a) + (a[a.len() - 1] - tail).abs();
                prop_assert!(tv(&wa) <= bound + 1e-12);
            }
        }
    }
}
