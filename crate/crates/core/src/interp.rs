//! Monotone piecewise-cubic Hermite interpolation (Fritsch-Butland slopes).

/// Node slopes for a shape-preserving cubic through `(x, y)`.
///
/// Interior slopes are weighted harmonic means of the neighbouring secants
/// and vanish at local extrema; end slopes use the three-point formula,
/// limited so the end cells stay monotone.
pub fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    debug_assert_eq!(n, y.len());
    if n < 2 {
        return vec![0.0; n];
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![d[0], d[0]];
    }
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        let (d0, d1) = (d[k - 1], d[k]);
        if d0 == 0.0 || d1 == 0.0 || d0.signum() != d1.signum() {
            m[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
        }
    }
    m[0] = end_slope(h[0], h[1], d[0], d[1]);
    m[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    m
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// Hermite basis values at reference coordinate `s` in `[0, 1]`:
/// `(h00, h10, h01, h11)` so that the cubic is
/// `h00 y0 + h h10 m0 + h01 y1 + h h11 m1`.
pub fn hermite_basis(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    ]
}

/// Derivatives of the Hermite basis with respect to `s`.
pub fn hermite_basis_ds(s: f64) -> [f64; 4] {
    let s2 = s * s;
    [
        6.0 * s2 - 6.0 * s,
        3.0 * s2 - 4.0 * s + 1.0,
        -6.0 * s2 + 6.0 * s,
        3.0 * s2 - 2.0 * s,
    ]
}

pub fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, h: f64, s: f64) -> f64 {
    let b = hermite_basis(s);
    b[0] * y0 + h * b[1] * m0 + b[2] * y1 + h * b[3] * m1
}

pub fn hermite_derivative(y0: f64, y1: f64, m0: f64, m1: f64, h: f64, s: f64) -> f64 {
    let b = hermite_basis_ds(s);
    (b[0] * y0 + b[2] * y1) / h + b[1] * m0 + b[3] * m1
}

/// Exact integral of the Hermite cubic over its cell of width `h`.
pub fn hermite_integral(y0: f64, y1: f64, m0: f64, m1: f64, h: f64) -> f64 {
    h * (y0 + y1) / 2.0 + h * h * (m0 - m1) / 12.0
}

/// Integral of the Hermite cubic from the left end of its cell to reference
/// coordinate `s`.
pub fn hermite_partial_integral(y0: f64, y1: f64, m0: f64, m1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let b00 = 0.5 * s4 - s3 + s;
    let b10 = 0.25 * s4 - 2.0 * s3 / 3.0 + 0.5 * s2;
    let b01 = -0.5 * s4 + s3;
    let b11 = 0.25 * s4 - s3 / 3.0;
    h * (b00 * y0 + h * b10 * m0 + b01 * y1 + h * b11 * m1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_integral() {
        // y = s^3 on [0, 1]: slopes 0 and 3
        assert!((hermite_integral(0.0, 1.0, 0.0, 3.0, 1.0) - 0.25).abs() < 1e-15);
        assert!((hermite(0.0, 1.0, 0.0, 3.0, 1.0, 0.5) - 0.125).abs() < 1e-15);
        assert!((hermite_derivative(0.0, 1.0, 0.0, 3.0, 1.0, 0.5) - 0.75).abs() < 1e-15);
        assert!((hermite_partial_integral(0.0, 1.0, 0.0, 3.0, 1.0, 0.5) - 0.015625).abs() < 1e-15);
        let (y0, y1, m0, m1, h) = (0.3, -1.2, 2.0, 0.7, 1.7);
        let full = hermite_integral(y0, y1, m0, m1, h);
        assert!((hermite_partial_integral(y0, y1, m0, m1, h, 1.0) - full).abs() < 1e-14);
    }

    #[test]
    fn flat_at_extrema() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0.0, 1.0, 0.5, 2.0];
        let m = pchip_slopes(&x, &y);
        assert_eq!(m[1], 0.0);
        assert_eq!(m[2], 0.0);
    }

    #[test]
    fn matches_reference_slopes() {
        // values from scipy.interpolate.PchipInterpolator on the same data
        let x = [1.0, 2.0, 4.0, 7.0];
        let y = [1.0, 3.0, 4.0, 4.5];
        let m = pchip_slopes(&x, &y);
        let want = [2.5, 0.8571428571428571, 0.25862068965517243, 0.0];
        for (a, b) in m.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}
