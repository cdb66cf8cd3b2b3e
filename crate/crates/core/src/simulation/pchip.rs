//! Monotone piecewise-cubic Hermite interpolation with Fritsch-Carlson
//! slope limiting. Fitting non-decreasing data yields a non-decreasing
//! interpolant, which is what makes cumulative-hazard inversion safe.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl MonotoneCubic {
    /// Fits the interpolant. `x` must be strictly increasing with at least
    /// two points; `x` and `y` must have equal lengths.
    pub fn fit(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "interpolation needs at least two points, got {}",
                x.len()
            )));
        }
        if x.len() != y.len() {
            return Err(Error::InvalidConfig(format!(
                "abscissae ({}) and ordinates ({}) differ in length",
                x.len(),
                y.len()
            )));
        }
        if let Some(i) = x.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotoneCumHaz { index: i + 1 });
        }

        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = y
            .windows(2)
            .zip(&h)
            .map(|(w, h)| (w[1] - w[0]) / h)
            .collect();

        let mut slope = vec![0.0; n];
        for k in 1..n - 1 {
            if delta[k - 1] * delta[k] <= 0.0 {
                slope[k] = 0.0;
            } else {
                let w1 = 2.0 * h[k] + h[k - 1];
                let w2 = h[k] + 2.0 * h[k - 1];
                slope[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
            }
        }
        slope[0] = edge_slope(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], *delta.get(1).unwrap_or(&delta[0]));
        slope[n - 1] = edge_slope(
            h[n - 2],
            if n >= 3 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n >= 3 { delta[n - 3] } else { delta[n - 2] },
        );

        Ok(Self { x, y, slope })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Evaluates the interpolant; arguments outside the fitted range are
    /// clamped to the endpoints.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let k = self.x.partition_point(|v| *v <= t) - 1;
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s1 = 1.0 - s;
        let h00 = (1.0 + 2.0 * s) * s1 * s1;
        let h10 = s * s1 * s1;
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.y[k] + h10 * h * self.slope[k] + h01 * self.y[k + 1] + h11 * h * self.slope[k + 1]
    }
}

/// Three-point one-sided slope estimate with the Fritsch-Carlson endpoint
/// clamps, for the boundary knots.
fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn interpolates_nodes_exactly() {
        let x = vec![0.0, 1.0, 2.5, 4.0];
        let y = vec![0.0, 0.8, 1.0, 5.0];
        let f = MonotoneCubic::fit(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert_relative_eq!(f.eval(*xi), *yi, max_relative = 1e-15);
        }
    }

    #[test]
    fn reproduces_linear_data_exactly() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let f = MonotoneCubic::fit(x, y).unwrap();
        for t in [0.3, 4.78, 8.999] {
            assert_relative_eq!(f.eval(t), 2.0 * t + 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn clamps_outside_range() {
        let f = MonotoneCubic::fit(vec![1.0, 2.0], vec![3.0, 4.0]).unwrap();
        assert_eq!(f.eval(0.0), 3.0);
        assert_eq!(f.eval(10.0), 4.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(MonotoneCubic::fit(vec![1.0], vec![1.0]).is_err());
        assert!(MonotoneCubic::fit(vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(matches!(
            MonotoneCubic::fit(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]),
            Err(Error::NonMonotoneCumHaz { index: 2 })
        ));
    }

    proptest! {
        #[test]
        fn non_decreasing_data_gives_non_decreasing_interpolant(
            increments in proptest::collection::vec(0.0f64..2.0, 3..20),
            seed_x in 0.01f64..1.0,
        ) {
            let mut x = vec![0.0];
            let mut y = vec![0.0];
            for (i, inc) in increments.iter().enumerate() {
                x.push(x[i] + seed_x + (i as f64 * 0.37).sin().abs());
                y.push(y[i] + inc);
            }
            let f = MonotoneCubic::fit(x.clone(), y).unwrap();
            let (lo, hi) = f.range();
            let mut prev = f64::NEG_INFINITY;
            for j in 0..=400 {
                let t = lo + (hi - lo) * j as f64 / 400.0;
                let v = f.eval(t);
                prop_assert!(
                    v >= prev - 1e-12,
                    "interpolant decreased: {prev} -> {v} at t = {t}"
                );
                prev = v;
            }
        }
    }
}
