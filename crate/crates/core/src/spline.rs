//! Not-a-knot cubic spline interpolation on strictly increasing knots.

use crate::Real;

#[derive(Debug, Clone)]
pub(crate) struct CubicSpline<T> {
    x: Vec<T>,
    y: Vec<T>,
    /// Second derivatives at the knots.
    m: Vec<T>,
}

impl<T: Real> CubicSpline<T> {
    /// Builds the interpolant. Knots must be strictly increasing and there must
    /// be at least two of them; use [`dedup_knots`] first if the abscissae come
    /// from a phase that may have flat stretches.
    pub(crate) fn not_a_knot(x: Vec<T>, y: Vec<T>) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2, "spline needs two knots");
        let n = x.len();
        let m = match n {
            2 => vec![T::zero(); 2],
            3 => {
                // A single parabola through three points.
                let d0 = (y[1] - y[0]) / (x[1] - x[0]);
                let d1 = (y[2] - y[1]) / (x[2] - x[1]);
                let c = T::lit(2.0) * (d1 - d0) / (x[2] - x[0]);
                vec![c; 3]
            }
            _ => second_derivatives(&x, &y),
        };
        CubicSpline { x, y, m }
    }

    fn interval(&self, xq: T) -> usize {
        let n = self.x.len();
        // partition_point gives the first knot > xq.
        let p = self.x.partition_point(|&k| k <= xq);
        p.clamp(1, n - 1) - 1
    }

    fn eval_on(&self, i: usize, xq: T) -> T {
        let h = self.x[i + 1] - self.x[i];
        let t = xq - self.x[i];
        let six = T::lit(6.0);
        let slope =
            (self.y[i + 1] - self.y[i]) / h - h * (T::lit(2.0) * self.m[i] + self.m[i + 1]) / six;
        self.y[i]
            + t * (slope
                + t * (self.m[i] / T::lit(2.0) + t * (self.m[i + 1] - self.m[i]) / (six * h)))
    }

    /// Evaluates the spline; outside the knot range the end cubic is extended.
    pub(crate) fn eval(&self, xq: T) -> T {
        self.eval_on(self.interval(xq), xq)
    }
}

/// Solves for knot second derivatives with not-a-knot end conditions
/// (third derivative continuous across the second and penultimate knots).
fn second_derivatives<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    let n = x.len();
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let slope: Vec<T> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

    // Unknowns m[1..=n-2]; m[0] and m[n-1] are eliminated with the end conditions.
    let k = n - 2;
    let mut sub = vec![T::zero(); k];
    let mut diag = vec![T::zero(); k];
    let mut sup = vec![T::zero(); k];
    let mut rhs = vec![T::zero(); k];
    for r in 0..k {
        let i = r + 1;
        sub[r] = h[i - 1];
        diag[r] = two * (h[i - 1] + h[i]);
        sup[r] = h[i];
        rhs[r] = six * (slope[i] - slope[i - 1]);
    }
    // m0 = ((h0 + h1) m1 - h0 m2) / h1
    diag[0] = diag[0] + h[0] * (h[0] + h[1]) / h[1];
    if k > 1 {
        sup[0] = sup[0] - h[0] * h[0] / h[1];
    }
    // m_{n-1} = ((h_{n-3} + h_{n-2}) m_{n-2} - h_{n-2} m_{n-3}) / h_{n-3}
    let (a, b) = (h[n - 3], h[n - 2]);
    diag[k - 1] = diag[k - 1] + b * (a + b) / a;
    if k > 1 {
        sub[k - 1] = sub[k - 1] - b * b / a;
    }
    let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs);

    let mut m = vec![T::zero(); n];
    m[1..n - 1].copy_from_slice(&inner);
    m[0] = ((h[0] + h[1]) * m[1] - h[0] * m[2]) / h[1];
    m[n - 1] = ((a + b) * m[n - 2] - b * m[n - 3]) / a;
    m
}

/// Thomas algorithm. `sub[0]` and `sup[k-1]` are ignored.
fn solve_tridiagonal<T: Real>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T]) -> Vec<T> {
    let k = diag.len();
    let mut c = vec![T::zero(); k];
    let mut d = vec![T::zero(); k];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..k {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut out = vec![T::zero(); k];
    out[k - 1] = d[k - 1];
    for i in (0..k - 1).rev() {
        out[i] = d[i] - c[i] * out[i + 1];
    }
    out
}

/// Collapses runs of (nearly) coincident abscissae into single knots carrying
/// the mean ordinate. Input abscissae must be nondecreasing.
pub(crate) fn dedup_knots<T: Real>(x: &[T], y: &[T]) -> (Vec<T>, Vec<T>) {
    let n = x.len();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let span = (x[n - 1] - x[0]).abs();
    let eps = T::epsilon() * T::lit(64.0) * (span + x[0].abs() + T::one());
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        let mut acc = y[i];
        while j < n && x[j] - x[i] <= eps {
            acc = acc + y[j];
            j += 1;
        }
        xs.push(x[i]);
        ys.push(acc / T::from_len(j - i));
        i = j;
    }
    (xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        let x: Vec<f64> = vec![0.0, 0.3, 0.5, 1.1, 1.4, 2.0, 2.2];
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t - 0.7 * t * t * t;
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let s = CubicSpline::not_a_knot(x, y);
        for k in 0..50 {
            let t = -0.2 + 2.6 * k as f64 / 49.0;
            assert!((s.eval(t) - f(t)).abs() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn four_knots_single_cubic() {
        let x = vec![0.0, 1.0, 2.0, 4.0];
        let y: Vec<f64> = x.iter().map(|&t: &f64| t.powi(3)).collect();
        let s = CubicSpline::not_a_knot(x, y);
        assert!((s.eval(3.0) - 27.0).abs() < 1e-12);
    }

    #[test]
    fn small_knot_counts() {
        let s = CubicSpline::not_a_knot(vec![0.0f64, 2.0], vec![1.0, 5.0]);
        assert!((s.eval(1.0) - 3.0).abs() < 1e-15);
        let s = CubicSpline::not_a_knot(vec![0.0f64, 1.0, 3.0], vec![0.0, 1.0, 9.0]);
        assert!((s.eval(2.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn dedup_merges_repeats() {
        let (x, y) = dedup_knots(&[0.0, 1.0, 1.0, 2.0], &[0.0, 1.0, 3.0, 4.0]);
        assert_eq!(x, vec![0.0, 1.0, 2.0]);
        assert_eq!(y, vec![0.0, 2.0, 4.0]);
    }
}
