/// Minimizer of the cubic matching values and slopes at `a` and `b`, or
/// `None` when the cubic has no local minimizer.
pub(crate) fn cubic_minimizer(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> Option<f64> {
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let rad = d1 * d1 - da * db;
    if !(rad >= 0.0) {
        return None;
    }
    let d2 = (b - a).signum() * rad.sqrt();
    let t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
    t.is_finite().then_some(t)
}

/// Cubic step for the bracket `[a, b]` (`a < b`) kept inside the central
/// 90% of the interval. Returns the step and whether bisection was used.
pub(crate) fn safeguarded_cubic(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> (f64, bool) {
    let w = b - a;
    let mid = a + 0.5 * w;
    match cubic_minimizer(a, fa, da, b, fb, db) {
        Some(t) if t >= a + 0.05 * w && t <= b - 0.05 * w => (t, false),
        _ => (mid, true),
    }
}
