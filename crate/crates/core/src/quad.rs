//! Quadrature building blocks shared by the forward-integral and
//! mollification evaluators.

/// Composite Simpson over the sorted breakpoint list, each interval split
/// into `subdiv` equal panels. Exact for cubics on every panel.
pub fn simpson<F: FnMut(f64) -> f64>(breakpoints: &[f64], subdiv: usize, mut f: F) -> f64 {
    debug_assert!(subdiv >= 1);
    let mut total = 0.0;
    for pair in breakpoints.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let h = (b - a) / subdiv as f64;
        for k in 0..subdiv {
            let lo = a + k as f64 * h;
            let hi = lo + h;
            let mid = 0.5 * (lo + hi);
            total += (f(lo) + 4.0 * f(mid) + f(hi)) * (hi - lo) / 6.0;
        }
    }
    total
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-guess; converges in a handful of iterations.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Map Gauss-Legendre nodes/weights onto [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (nodes, weights) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights.iter())
        .map(|(&x, &w)| (mid + half * x, half * w))
        .collect()
}

/// Sort, deduplicate (within `tol`) and clip a breakpoint list to [lo, hi].
pub fn breakpoints_in(mut pts: Vec<f64>, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
    pts.push(lo);
    pts.push(hi);
    pts.retain(|&s| s >= lo - tol && s <= hi + tol);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for s in pts {
        let s = s.clamp(lo, hi);
        if out.last().is_none_or(|&last| s - last > tol) {
            out.push(s);
        }
    }
    if out.len() < 2 {
        out = vec![lo, hi];
    } else {
        out[0] = lo;
        let n = out.len();
        out[n - 1] = hi;
    }
    out
}
