/// Weighted Pearson correlation, clamped to `[-1, 1]`. Returns 0 when
/// either variable has (numerically) zero variance or fewer than two
/// points are given.
pub fn weighted_pearson(xs: &[f64], ys: &[f64], ws: &[f64]) -> f64 {
    assert!(xs.len() == ys.len() && ys.len() == ws.len(), "length mismatch");
    if xs.len() < 2 {
        return 0.0;
    }
    let total: f64 = ws.iter().sum();
    let mean = |v: &[f64]| v.iter().zip(ws).map(|(a, w)| a * w).sum::<f64>() / total;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    let (mut mag_x, mut mag_y) = (0.0f64, 0.0f64);
    for ((&x, &y), &w) in xs.iter().zip(ys).zip(ws) {
        let (dx, dy) = (x - mx, y - my);
        sxx += w * dx * dx;
        syy += w * dy * dy;
        sxy += w * dx * dy;
        mag_x = mag_x.max(x.abs());
        mag_y = mag_y.max(y.abs());
    }
    let negligible = |s: f64, mag: f64| {
        let sd = (s / total).sqrt();
        sd.is_nan() || sd <= 1e-12 * mag || s <= 0.0
    };
    if negligible(sxx, mag_x) || negligible(syy, mag_y) {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}
