//! Small derivative-free maximizers shared by the solvers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a maximum of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Scans `n` equispaced points of `[lo, hi]` and polishes the best one with a
/// golden-section search on the neighbouring cells. On ties the point closest
/// to zero wins.
pub fn scan_then_golden<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> (f64, f64) {
    if hi <= lo || n < 2 {
        return (lo, f(lo));
    }
    let h = (hi - lo) / (n - 1) as f64;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    let mut best_x = lo;
    for i in 0..n {
        let x = lo + h * i as f64;
        let v = f(x);
        if v > best + 1e-15 || (v >= best - 1e-15 && x.abs() < best_x.abs()) {
            if v > best {
                best = v;
            }
            best_i = i;
            best_x = x;
        }
    }
    let a = lo + h * best_i.saturating_sub(1) as f64;
    let b = (lo + h * (best_i + 1) as f64).min(hi);
    let (x, v) = golden_max(&f, a, b, 40);
    if v > best + 1e-13 {
        (x, v)
    } else {
        (best_x, best)
    }
}

/// Compass search on a 2-D box: probe `±step` along each axis, accept strict
/// improvements, halve the step when no probe improves.
pub fn compass_max_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    start: (f64, f64, f64),
    step: f64,
    bounds: [(f64, f64); 2],
    rounds: usize,
) -> (f64, f64, f64) {
    let (mut x, mut y, mut best) = start;
    let mut h = step;
    for _ in 0..rounds {
        let mut improved = false;
        for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let nx = (x + dx).clamp(bounds[0].0, bounds[0].1);
            let ny = (y + dy).clamp(bounds[1].0, bounds[1].1);
            let v = f(nx, ny);
            if v > best {
                x = nx;
                y = ny;
                best = v;
                improved = true;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (x, y, best)
}
