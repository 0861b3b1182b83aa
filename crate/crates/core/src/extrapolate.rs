use num_complex::Complex64;

/// Value at 0 of the polynomial interpolating `(xs[i], ys[i])` (Neville's scheme).
pub(crate) fn neville_at_zero(xs: &[f64], ys: &[Complex64]) -> Complex64 {
    assert_eq!(xs.len(), ys.len());
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xm) = (xs[i], xs[i + m]);
            p[i] = (p[i] * xm - p[i + 1] * xi) / (xm - xi);
        }
    }
    p[0]
}
