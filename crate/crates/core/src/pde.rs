//! Coefficients `G1..G8` of the second-order equation satisfied by the Gauss
//! map of a surface in a unimodular group with `mu1 = mu2`:
//!
//! ```text
//! g_zzbar = G1 g_z g_zbar + G2 g_z conj(g)_zbar + G3 conj(g)_z g_zbar + G4 conj(g)_z conj(g)_zbar
//!         + G5 K_z g_zbar + G6 K_z conj(g)_zbar + G7 K_zbar g_z + G8 K_zbar conj(g)_z
//! ```
//!
//! Each coefficient depends on `g`, `mu1`, `mu3`, the curvature `x` and a
//! chosen square root `sqrt_x`. The positive branch uses the real root; the
//! null-coordinate equation uses `sqrt_x = i sqrt(-x)`.
//!
//! `G7` and `G8` are the expressions of `G5` and `G6` with `i` replaced by
//! `-i`. For real `sqrt_x` this makes `G7 = conj(G5)` while
//! `G8 = conj(G6) g^2 / conj(g)^2`.

use num_complex::Complex64;

use crate::C64;

/// `sum_k m_k r^k` for `r = |g|^2`.
fn poly(r: f64, m: &[f64]) -> f64 {
    m.iter().rev().fold(0.0, |acc, &c| acc * r + c)
}

/// The eight coefficients at a node.
pub fn coefficients(mu1: f64, mu3: f64, g: C64, x: f64, sqrt_x: C64) -> [C64; 8] {
    let i = Complex64::i();
    let gb = g.conj();
    let r = g.norm_sqr();
    let b = 1.0 + r;
    let b2 = b * b;
    let b3 = b2 * b;
    let b4 = b2 * b2;
    let bm2 = b - 2.0;
    let m1 = mu1;
    let m3 = mu3;
    let p = |m: &[f64]| poly(r, m);

    let den1 = b3
        * (b4 * x * x
            + m1 * m1 * (bm2 * bm2 * m1 + 4.0 * r * m3).powi(2)
            + 2.0 * x * (p(&[1.0, 0.0, 6.0, 0.0, 1.0]) * m1 * m1 + p(&[0.0, 4.0, -8.0, 4.0, 0.0]) * m1 * m3 + 8.0 * r * r * m3 * m3));
    let num1 = b3 * b3 * x * x
        + 2.0 * b2 * x * (p(&[0.0, 4.0, 2.0, 1.0, 1.0]) * m1 * m1 + p(&[1.0, -5.0, 1.0, 3.0, 0.0]) * m1 * m3 + p(&[0.0, 5.0, 3.0, 0.0, 0.0]) * m3 * m3)
        + 16.0 * r * r * bm2 * m1 * m3.powi(3)
        - m1 * ((1.0 + 6.0 * r - r * r * p(&[13.0, -10.0, 3.0, 0.0, 1.0])) * m1.powi(3)
            - 2.0 * bm2 * p(&[-1.0, -6.0, 18.0, 2.0, 3.0]) * m1 * m1 * m3
            - p(&[0.0, 2.0, 66.0, -18.0, 14.0]) * m1 * m3 * m3);
    let g1 = gb * 2.0 * num1 / den1;

    let pa = p(&[m1, 2.0 * m3, m1]);
    let pb = p(&[m1, 4.0 * m3 - 2.0 * m1, m1]);
    let common = b3 * sqrt_x * (x + m1 * m1) * (b4 * x + pb * pb);
    let base = C64::new(2.0 * b4 * x * x + b4 * x * m1 * m1 - m1 * m1 * pb * pb, 0.0);
    let mid = i * b2 * sqrt_x * (x + m1 * m1) * pa;
    let g2 = i * 2.0 * g * bm2 * (m3 - m1) * (base - mid) / common;
    let g3 = i * 2.0 * g * bm2 * (m1 - m3) * (base + mid) / common;
    let g4 = -g * g * g * 4.0 * bm2 * (m1 - m3).powi(2) * (-3.0 * b2 * x + p(&[m1 * m1, 8.0 * m1 * m3 - 6.0 * m1 * m1, m1 * m1]))
        / (b3 * (x + m1 * m1) * (b4 * x + pb * pb));

    let num5 = b2 * x + m1 * pb;
    let g5 = num5 / (4.0 * x * (sqrt_x + i * m1) * (b2 * sqrt_x + i * pb));
    let g7 = num5 / (4.0 * x * (sqrt_x - i * m1) * (b2 * sqrt_x - i * pb));
    let g6 = -i * g * g * (m1 - m3) / (sqrt_x * (sqrt_x + i * m1) * (b2 * sqrt_x + i * pb));
    let g8 = i * g * g * (m1 - m3) / (sqrt_x * (sqrt_x - i * m1) * (b2 * sqrt_x - i * pb));
    [g1, g2, g3, g4, g5, g6, g7, g8]
}

/// Right-hand side of the equation for given first derivatives of `g`
/// (`d1`, `d2` are the two derivative directions: `z`/`zbar` or `u`/`v`)
/// and of the curvature. The conjugate derivatives are taken from the
/// arguments so the same routine serves both conformal and null charts:
/// `gb_d1` is the derivative of `conj(g)` along direction 1, and so on.
#[allow(clippy::too_many_arguments)]
pub fn rhs(coeffs: &[C64; 8], g_d1: C64, gb_d1: C64, g_d2: C64, gb_d2: C64, k_d1: C64, k_d2: C64) -> C64 {
    let [g1, g2, g3, g4, g5, g6, g7, g8] = *coeffs;
    g1 * g_d1 * g_d2 + g2 * g_d1 * gb_d2 + g3 * gb_d1 * g_d2 + g4 * gb_d1 * gb_d2 + g5 * k_d1 * g_d2 + g6 * k_d1 * gb_d2 + g7 * k_d2 * g_d1 + g8 * k_d2 * gb_d1
}
