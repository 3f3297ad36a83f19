//! Multi-channel cubic Hermite splines on a uniform grid over `[0, 1]`.
//!
//! Knots store values and tangents, which gives exact endpoint control and
//! exact reproduction of piecewise-cubic reference motions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CubicHermite {
    /// Knot values, one row per channel, one column per knot.
    values: Vec<Vec<f64>>,
    /// Knot tangents d(value)/d(tau), same layout.
    tangents: Vec<Vec<f64>>,
}

impl CubicHermite {
    /// Build from dense matrices: `values` and `tangents` are channels x knots.
    pub fn new(values: DMatrix<f64>, tangents: DMatrix<f64>) -> Self {
        assert_eq!(values.shape(), tangents.shape());
        assert!(values.ncols() >= 2, "need at least two knots");
        let to_rows = |m: &DMatrix<f64>| {
            (0..m.nrows())
                .map(|r| m.row(r).iter().copied().collect())
                .collect()
        };
        Self {
            values: to_rows(&values),
            tangents: to_rows(&tangents),
        }
    }

    /// Sample a smooth function (value and tau-derivative) at `knots` uniform points.
    pub fn from_fn(
        channels: usize,
        knots: usize,
        mut f: impl FnMut(f64) -> (DVector<f64>, DVector<f64>),
    ) -> Self {
        let mut values = DMatrix::zeros(channels, knots);
        let mut tangents = DMatrix::zeros(channels, knots);
        for k in 0..knots {
            let tau = k as f64 / (knots - 1) as f64;
            let (v, d) = f(tau);
            values.set_column(k, &v);
            tangents.set_column(k, &d);
        }
        Self::new(values, tangents)
    }

    pub fn channels(&self) -> usize {
        self.values.len()
    }

    pub fn knots(&self) -> usize {
        self.values[0].len()
    }

    fn locate(&self, tau: f64) -> (usize, f64, f64) {
        let n_seg = self.knots() - 1;
        let t = tau.clamp(0.0, 1.0);
        let scaled = t * n_seg as f64;
        let mut seg = scaled.floor() as usize;
        if seg >= n_seg {
            seg = n_seg - 1;
        }
        let h = 1.0 / n_seg as f64;
        let s = scaled - seg as f64;
        (seg, s, h)
    }

    /// Evaluate all channels at `tau` (clamped to `[0, 1]`).
    pub fn eval(&self, tau: f64) -> DVector<f64> {
        let (seg, s, h) = self.locate(tau);
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        DVector::from_fn(self.channels(), |c, _| {
            h00 * self.values[c][seg]
                + h10 * h * self.tangents[c][seg]
                + h01 * self.values[c][seg + 1]
                + h11 * h * self.tangents[c][seg + 1]
        })
    }

    /// First derivative with respect to `tau`.
    pub fn eval_deriv(&self, tau: f64) -> DVector<f64> {
        let (seg, s, h) = self.locate(tau);
        let s2 = s * s;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        DVector::from_fn(self.channels(), |c, _| {
            d00 * self.values[c][seg]
                + d10 * self.tangents[c][seg]
                + d01 * self.values[c][seg + 1]
                + d11 * self.tangents[c][seg + 1]
        })
    }

    /// Second derivative with respect to `tau`.
    pub fn eval_second(&self, tau: f64) -> DVector<f64> {
        let (seg, s, h) = self.locate(tau);
        let d00 = (12.0 * s - 6.0) / (h * h);
        let d10 = (6.0 * s - 4.0) / h;
        let d01 = (-12.0 * s + 6.0) / (h * h);
        let d11 = (6.0 * s - 2.0) / h;
        DVector::from_fn(self.channels(), |c, _| {
            d00 * self.values[c][seg]
                + d10 * self.tangents[c][seg]
                + d01 * self.values[c][seg + 1]
                + d11 * self.tangents[c][seg + 1]
        })
    }

    /// Knot value column `k`.
    pub fn knot_value(&self, k: usize) -> DVector<f64> {
        DVector::from_fn(self.channels(), |c, _| self.values[c][k])
    }

    /// Knot tangent column `k`.
    pub fn knot_tangent(&self, k: usize) -> DVector<f64> {
        DVector::from_fn(self.channels(), |c, _| self.tangents[c][k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cubic(t: f64) -> (f64, f64) {
        // 2t^3 - t^2 + 3t - 5 and its derivative
        (
            2.0 * t * t * t - t * t + 3.0 * t - 5.0,
            6.0 * t * t - 2.0 * t + 3.0,
        )
    }

    #[test]
    fn reproduces_cubic_exactly() {
        let sp = CubicHermite::from_fn(1, 5, |t| {
            let (v, d) = cubic(t);
            (DVector::from_element(1, v), DVector::from_element(1, d))
        });
        for i in 0..101 {
            let t = i as f64 / 100.0;
            let (v, d) = cubic(t);
            assert_abs_diff_eq!(sp.eval(t)[0], v, epsilon = 1e-12);
            assert_abs_diff_eq!(sp.eval_deriv(t)[0], d, epsilon = 1e-11);
            assert_abs_diff_eq!(sp.eval_second(t)[0], 12.0 * t - 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn endpoints_match_knots_exactly() {
        let sp = CubicHermite::from_fn(2, 9, |t| {
            (
                DVector::from_vec(vec![t.sin(), t.cos()]),
                DVector::from_vec(vec![t.cos(), -t.sin()]),
            )
        });
        assert_eq!(sp.eval(0.0), sp.knot_value(0));
        assert_eq!(sp.eval(1.0), sp.knot_value(8));
        // Clamping outside [0,1]
        assert_eq!(sp.eval(1.5), sp.knot_value(8));
        assert_eq!(sp.eval(-0.2), sp.knot_value(0));
    }

    #[test]
    fn interpolation_error_is_fourth_order() {
        let err = |knots: usize| {
            let sp = CubicHermite::from_fn(1, knots, |t| {
                (
                    DVector::from_element(1, (2.0 * t).sin()),
                    DVector::from_element(1, 2.0 * (2.0 * t).cos()),
                )
            });
            (0..1000)
                .map(|i| {
                    let t = i as f64 / 999.0;
                    (sp.eval(t)[0] - (2.0 * t).sin()).abs()
                })
                .fold(0.0, f64::max)
        };
        let e1 = err(5);
        let e2 = err(9);
        // halving the segment width should shrink error ~16x
        assert!(e1 / e2 > 10.0, "e1={e1:.3e} e2={e2:.3e}");
    }
}
