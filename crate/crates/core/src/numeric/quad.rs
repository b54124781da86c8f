//! Gauss–Kronrod (7, 15) quadrature for complex-valued integrands.

use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// The 15 Kronrod nodes on `[a, b]` with their Kronrod weights.
pub fn gk15_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 15];
    for i in 0..7 {
        out[2 * i] = (c - h * XGK[i], h * WGK[i]);
        out[2 * i + 1] = (c + h * XGK[i], h * WGK[i]);
    }
    out[14] = (c, h * WGK[7]);
    out
}

/// The 15 Kronrod nodes with Kronrod and embedded Gauss weights (0 off the
/// Gauss nodes).
pub fn gk15_nodes_weights(a: f64, b: f64) -> [(f64, f64, f64); 15] {
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0, 0.0); 15];
    for (j, (x, w)) in gk15_nodes(a, b).into_iter().enumerate() {
        let i = j / 2;
        let g = if j == 14 {
            WG[3]
        } else if i % 2 == 1 {
            WG[i / 2]
        } else {
            0.0
        };
        out[j] = (x, w, h * g);
    }
    out
}

/// Kronrod and embedded Gauss estimates on one panel.
pub fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, Complex64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, g * h)
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive bisection until the summed `|K − G|` error drops below
/// `max(abs_tol, rel_tol·|I|)` or `max_panels` is reached.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> QuadResult {
    let mut heap = BinaryHeap::new();
    let (k, g) = gk15(&mut f, a, b);
    let mut total = k;
    let mut err = (k - g).norm();
    heap.push(Panel {
        a,
        b,
        value: k,
        error: err,
    });
    while err > abs_tol.max(rel_tol * total.norm()) && heap.len() < max_panels {
        let p = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            heap.push(p);
            break;
        }
        let (k1, g1) = gk15(&mut f, p.a, mid);
        let (k2, g2) = gk15(&mut f, mid, p.b);
        let (e1, e2) = ((k1 - g1).norm(), (k2 - g2).norm());
        total += k1 + k2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel {
            a: p.a,
            b: mid,
            value: k1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: p.b,
            value: k2,
            error: e2,
        });
    }
    // Re-sum to shed the drift of incremental updates.
    let (mut value, mut error) = (Complex64::new(0.0, 0.0), 0.0);
    for p in heap.iter() {
        value += p.value;
        error += p.error;
    }
    QuadResult {
        value,
        error,
        panels: heap.len(),
        converged: error <= abs_tol.max(rel_tol * value.norm()),
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> (f64, f64) {
    let r = integrate(|x| Complex64::new(f(x), 0.0), a, b, abs_tol, rel_tol, max_panels);
    (r.value.re, r.error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let (k, g) = gk15(&mut |x: f64| Complex64::new(x.powi(20), 0.0), 0.0, 1.0);
        assert!((k.re - 1.0 / 21.0).abs() < 1e-15);
        assert!((g.re - 1.0 / 21.0).abs() > 1e-15);
    }

    #[test]
    fn nodes_sum_to_length() {
        let s: f64 = gk15_nodes(2.0, 5.0).iter().map(|&(_, w)| w).sum();
        assert!((s - 3.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_complex() {
        let r = integrate(|t| Complex64::new(0.0, 10.0 * t).exp(), 0.0, 3.0, 1e-14, 1e-13, 200);
        let exact = (Complex64::new(0.0, 30.0).exp() - 1.0) / Complex64::new(0.0, 10.0);
        assert!(r.converged);
        assert!((r.value - exact).norm() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let (v, _) = integrate_real(|x| x.powf(0.25), 0.0, 1.0, 1e-14, 1e-14, 500);
        assert!((v - 0.8).abs() < 1e-13);
    }
}
