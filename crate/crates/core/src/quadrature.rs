//! Small quadrature and interpolation kernels shared by the engines.

/// Gauss–Legendre 3-point nodes on `[0, 1]`.
pub(crate) const GL3_NODES: [f64; 3] = [
    0.5 - 0.387_298_334_620_741_7,
    0.5,
    0.5 + 0.387_298_334_620_741_7,
];
/// Matching weights; they sum to 1.
pub(crate) const GL3_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Gauss–Legendre 2-point nodes on `[0, 1]`, exact for cubics.
pub(crate) const GL2_NODES: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];

/// Panel count for an interval of length `len` at target step `h`: at least
/// eight, rounded up to even.
pub fn panels_for(len: f64, h: f64) -> usize {
    let p = if h > 0.0 && len.is_finite() {
        (len / h).ceil().min(1e7) as usize
    } else {
        0
    };
    let p = p.max(8);
    p + p % 2
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let panels = panels.max(2) + panels % 2;
    let h = (b - a) / panels as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..panels {
        let v = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// Simpson over `[a, b]` split at every cut strictly inside the interval, each
/// piece getting [`panels_for`] panels at step `h`.
pub fn simpson_pieces<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cuts: &mut Vec<f64>, h: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let tiny = 1e-12 * (b - a).max(b.abs());
    cuts.retain(|&c| c > a + tiny && c < b - tiny);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() <= tiny);
    let mut total = 0.0;
    let mut lo = a;
    for &c in cuts.iter().chain(std::iter::once(&b)) {
        // endpoints nudged inward so a jump at a cut is seen from the correct side
        let d = 1e-10 * (c - lo);
        let panels = panels_for(c - lo, h);
        let step = (c - lo) / panels as f64;
        total += simpson(
            |x| {
                if x - lo < 0.5 * step {
                    f(lo + d)
                } else if c - x < 0.5 * step {
                    f(c - d)
                } else {
                    f(x)
                }
            },
            lo,
            c,
            panels,
        );
        lo = c;
    }
    total
}

/// Integral of uniformly spaced samples: Simpson when the interval count is
/// even, otherwise Simpson plus a closing 3/8 panel.
pub fn simpson_uniform(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        3 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let intervals = n - 1;
            let simpson_end = if intervals % 2 == 0 { n - 1 } else { n - 4 };
            let mut acc = 0.0;
            let mut i = 0;
            while i + 2 <= simpson_end {
                acc += values[i] + 4.0 * values[i + 1] + values[i + 2];
                i += 2;
            }
            acc *= h / 3.0;
            if intervals % 2 == 1 {
                let k = n - 4;
                acc += 3.0 * h / 8.0
                    * (values[k] + 3.0 * values[k + 1] + 3.0 * values[k + 2] + values[k + 3]);
            }
            acc
        }
    }
}

/// Lagrange weights for nodes at offsets 0, 1, 2, 3 evaluated at `x`.
#[inline]
pub(crate) fn lagrange4(x: f64) -> [f64; 4] {
    let (a, b, c, d) = (x, x - 1.0, x - 2.0, x - 3.0);
    [
        -b * c * d / 6.0,
        a * c * d / 2.0,
        -a * b * d / 2.0,
        a * b * c / 6.0,
    ]
}

/// Cubic stencil start and weights for fractional index `u` in a run of
/// nodes `lo..=hi` (at least four nodes).
#[inline]
pub(crate) fn cubic_stencil(u: f64, lo: usize, hi: usize) -> (usize, [f64; 4]) {
    debug_assert!(hi >= lo + 3);
    let cell = u.floor();
    let start = if cell < lo as f64 + 1.0 {
        lo
    } else {
        (cell as usize - 1).min(hi - 3)
    };
    (start, lagrange4(u - start as f64))
}

/// Cubic interpolation of `values[offset + i * stride]` at fractional index `u`.
#[inline]
pub(crate) fn cubic_strided(values: &[f64], offset: usize, stride: usize, len: usize, u: f64) -> f64 {
    let (s, w) = cubic_stencil(u, 0, len - 1);
    let base = offset + s * stride;
    w[0] * values[base]
        + w[1] * values[base + stride]
        + w[2] * values[base + 2 * stride]
        + w[3] * values[base + 3 * stride]
}
