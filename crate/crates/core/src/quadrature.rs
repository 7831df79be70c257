//! Gauss-Legendre rules and graded meshes.

use std::sync::OnceLock;

/// An `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const MAX_CACHED: usize = 256;

impl GaussLegendre {
    /// The shared rule with `n` points (`1 <= n <= 256`).
    #[allow(clippy::new_ret_no_self)]
    pub fn new(n: usize) -> &'static GaussLegendre {
        static CACHE: [OnceLock<GaussLegendre>; MAX_CACHED + 1] = [const { OnceLock::new() }; MAX_CACHED + 1];
        assert!((1..=MAX_CACHED).contains(&n), "Gauss-Legendre order {n} out of range");
        CACHE[n].get_or_init(|| Self::compute(n))
    }

    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `P_n(x)` and `P_n'(x)`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights on `[0, t]` graded towards both endpoints.
///
/// Each half is mapped by `s = (t/2) u^g` (resp. `t - s = (t/2) u^g`) with `u`
/// uniform-GL on `[0, 1]`, so integrands behaving like a power of `s` or of
/// `t - s` near the ends become smooth.
pub fn graded_two_sided(t: f64, half_nodes: usize, exponent: f64) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(half_nodes);
    let h = 0.5 * t;
    let mut out = Vec::with_capacity(2 * half_nodes);
    for (u, w) in gl.on(0.0, 1.0) {
        let s = h * u.powf(exponent);
        let ds = h * exponent * u.powf(exponent - 1.0);
        out.push((s, w * ds));
    }
    let n = out.len();
    for i in (0..n).rev() {
        let (s, w) = out[i];
        out.push((t - s, w));
    }
    out
}
