//! Curvature transfer between surfaces of the round sphere and of R3 that
//! share a Gauss map.
//!
//! Positive branch: `(log K*)_z = F_z` with `F = log((i + sqrt K)^4 / K)`.
//! Since `log K*` is real, `grad log K* = (2 Re F_z, -2 Im F_z)`, which is
//! `grad Re F` plus the rotated gradient of `Im F = 4 arccot(sqrt K)`. The
//! compatibility condition is the harmonicity of `Im F`.
//!
//! Negative branch: `(log -K*)_u = (F1(K))_u` and `(log -K*)_v = (F2(K))_v`
//! with `F1 = log((1 + sqrt(-K))^4 / -K)`, `F2 = log((-1 + sqrt(-K))^4 / -K)`.
//! Edge increments are exact differences of `F1`, `F2`, so the transfer and
//! its inverse carry no discretization error.

use crate::error::{Error, Result};
use crate::fields::{ComplexField, DiffOp, Field, GridDomain, GridKind, RealField};
use crate::negative::{log_term_u, log_term_v, FORBIDDEN_TOLERANCE};
use crate::report::ResidualReport;
use crate::C64;

/// Default bound on the disagreement of the two negative-branch sweeps.
pub const LINE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CorrespondenceResult {
    pub k_target: RealField,
    pub condition_residual: ResidualReport,
    /// Gauge constant imposed at the grid origin.
    pub base_point_value: f64,
    /// Largest difference of `log |K*|` between the two summation orders.
    pub path_dependence: f64,
}

fn require_kind(domain: &GridDomain, kind: GridKind, op: &'static str) -> Result<()> {
    if domain.kind != kind {
        return Err(Error::KindMismatch { op, kind: domain.kind.label() });
    }
    Ok(())
}

fn require_sign(k: &RealField, positive: bool) -> Result<()> {
    let d = *k.domain();
    match k.values().iter().position(|&v| if positive { !(v > 0.0) } else { !(v < 0.0) }) {
        Some(idx) => Err(Error::CurvatureSign {
            node: d.node(idx),
            k: k.at(idx),
        }),
        None => Ok(()),
    }
}

fn require_not_unit(k: &RealField) -> Result<()> {
    let d = *k.domain();
    match k.values().iter().position(|&v| (v + 1.0).abs() < FORBIDDEN_TOLERANCE) {
        Some(idx) => Err(Error::ForbiddenCurvature {
            node: d.node(idx),
            k: k.at(idx),
            forbidden: -1.0,
        }),
        None => Ok(()),
    }
}

/// `F(K) = log((i + sqrt K)^4 / K)` with the continuous branch
/// `Im F = 4 arccot(sqrt K)`.
pub fn positive_potential(k: f64) -> C64 {
    let root = k.sqrt();
    C64::new(2.0 * (1.0 + k).ln() - k.ln(), 4.0 * 1.0_f64.atan2(root))
}

/// `F'(K) = 2 / (sqrt K (i + sqrt K)) - 1/K`.
pub fn positive_potential_derivative(k: f64) -> C64 {
    let root = k.sqrt();
    2.0 / (root * C64::new(root, 1.0)) - 1.0 / k
}

/// `|(K_z / (2 sqrt K (1 + K)))_zbar|`.
pub fn condition_positive(k: &RealField) -> Result<ResidualReport> {
    require_kind(k.domain(), GridKind::Conformal, "condition_positive")?;
    require_sign(k, true)?;
    let k_z = k.differentiate(DiffOp::Dz)?;
    let inner = ComplexField::from_values(
        *k.domain(),
        k_z.values()
            .iter()
            .zip(k.values())
            .map(|(&kz, &kv)| kz / (2.0 * kv.sqrt() * (1.0 + kv)))
            .collect(),
    )?;
    let outer = inner.differentiate(DiffOp::Dzbar)?;
    Ok(ResidualReport::all_valid("positive correspondence condition", outer.map(|c| c.norm())))
}

/// The same condition written with `R = sqrt K`: `|(R_z / (1 + R^2))_zbar|`.
pub fn condition_positive_root(k: &RealField) -> Result<ResidualReport> {
    require_kind(k.domain(), GridKind::Conformal, "condition_positive")?;
    require_sign(k, true)?;
    let r = k.map(f64::sqrt);
    let r_z = r.differentiate(DiffOp::Dz)?;
    let inner = ComplexField::from_values(
        *k.domain(),
        r_z.values().iter().zip(r.values()).map(|(&rz, &rv)| rz / (1.0 + rv * rv)).collect(),
    )?;
    let outer = inner.differentiate(DiffOp::Dzbar)?;
    Ok(ResidualReport::all_valid(
        "positive correspondence condition (root form)",
        outer.map(|c| c.norm()),
    ))
}

/// `(d_x, d_y) log K*` from `K` and its finite-difference gradient.
pub fn positive_log_gradient(k: &RealField) -> (RealField, RealField) {
    let kx = k.partial(0);
    let ky = k.partial(1);
    let d = *k.domain();
    let mut lx = Vec::with_capacity(d.len());
    let mut ly = Vec::with_capacity(d.len());
    for idx in 0..d.len() {
        let f = positive_potential_derivative(k.at(idx));
        let (fx, fy) = (f * kx.at(idx), f * ky.at(idx));
        lx.push(fx.re + fy.im);
        ly.push(fy.re - fx.im);
    }
    (
        RealField::from_values(d, lx).expect("same domain"),
        RealField::from_values(d, ly).expect("same domain"),
    )
}

/// Trapezoidal line integrals of a gradient field from the origin node.
/// Returns the row-first result and the largest disagreement with the
/// column-first result.
pub fn integrate_gradient(gx: &RealField, gy: &RealField, base: f64) -> Result<(RealField, f64)> {
    if gx.domain() != gy.domain() {
        return Err(Error::DomainMismatch);
    }
    let d = *gx.domain();
    let row_first = sweep(
        &d,
        base,
        |a, b| (gx.at(a) + gx.at(b)) * 0.5 * d.step.0,
        |a, b| (gy.at(a) + gy.at(b)) * 0.5 * d.step.1,
        true,
    );
    let col_first = sweep(
        &d,
        base,
        |a, b| (gx.at(a) + gx.at(b)) * 0.5 * d.step.0,
        |a, b| (gy.at(a) + gy.at(b)) * 0.5 * d.step.1,
        false,
    );
    let gap = row_first.iter().zip(&col_first).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((RealField::from_values(d, row_first)?, gap))
}

/// Accumulates edge increments from the origin. With `row_first` the first
/// row (along axis 0) is summed before every column; otherwise the first
/// column comes first.
fn sweep(d: &GridDomain, base: f64, along_x: impl Fn(usize, usize) -> f64, along_y: impl Fn(usize, usize) -> f64, row_first: bool) -> Vec<f64> {
    let (n1, n2) = d.size;
    let mut out = vec![0.0; d.len()];
    out[0] = base;
    if row_first {
        for i in 1..n1 {
            let (a, b) = (d.index(i - 1, 0), d.index(i, 0));
            out[b] = out[a] + along_x(a, b);
        }
        for i in 0..n1 {
            for j in 1..n2 {
                let (a, b) = (d.index(i, j - 1), d.index(i, j));
                out[b] = out[a] + along_y(a, b);
            }
        }
    } else {
        for j in 1..n2 {
            let (a, b) = (d.index(0, j - 1), d.index(0, j));
            out[b] = out[a] + along_y(a, b);
        }
        for j in 0..n2 {
            for i in 1..n1 {
                let (a, b) = (d.index(i - 1, j), d.index(i, j));
                out[b] = out[a] + along_x(a, b);
            }
        }
    }
    out
}

fn require_base(base: Option<f64>, positive: bool) -> Result<f64> {
    let b = base.ok_or_else(|| Error::GaugeUnderdetermined("the transferred curvature is fixed only up to a constant factor; supply a base value".into()))?;
    let ok = if positive { b > 0.0 } else { b < 0.0 };
    if !ok {
        return Err(Error::GaugeUnderdetermined(format!("base value {b} has the wrong sign")));
    }
    Ok(b)
}

/// `K*` with `K*(origin) = base` from the gradient of `F`.
pub fn transfer_positive(k: &RealField, base: Option<f64>) -> Result<CorrespondenceResult> {
    let base = require_base(base, true)?;
    let condition = condition_positive(k)?;
    let (lx, ly) = positive_log_gradient(k);
    let (log_target, gap) = integrate_gradient(&lx, &ly, base.ln())?;
    Ok(CorrespondenceResult {
        k_target: log_target.map(f64::exp),
        condition_residual: condition,
        base_point_value: base,
        path_dependence: gap,
    })
}

/// Recovers `K` from `K*` with `K(origin) = k_base` by integrating
/// `grad K = M(K)^{-1} grad log K*` along the row-first path with Heun steps.
pub fn inverse_positive(k_target: &RealField, k_base: f64) -> Result<RealField> {
    require_kind(k_target.domain(), GridKind::Conformal, "inverse_positive")?;
    require_sign(k_target, true)?;
    if !(k_base > 0.0) {
        return Err(Error::CurvatureSign { node: (0, 0), k: k_base });
    }
    let log_t = k_target.map(f64::ln);
    let lx = log_t.partial(0);
    let ly = log_t.partial(1);
    let d = *k_target.domain();
    let slope = |k: f64, gx: f64, gy: f64| -> (f64, f64) {
        let f = positive_potential_derivative(k);
        let (p, q) = (f.re, f.im);
        let n = p * p + q * q;
        ((p * gx - q * gy) / n, (q * gx + p * gy) / n)
    };
    let heun = |k0: f64, a: usize, b: usize, axis: usize| -> Result<f64> {
        let h = if axis == 0 { d.step.0 } else { d.step.1 };
        let pick = |v: (f64, f64)| if axis == 0 { v.0 } else { v.1 };
        let s0 = pick(slope(k0, lx.at(a), ly.at(a)));
        let pred = k0 + h * s0;
        if !(pred > 0.0) {
            return Err(Error::CurvatureSign { node: d.node(b), k: pred });
        }
        let s1 = pick(slope(pred, lx.at(b), ly.at(b)));
        Ok(k0 + 0.5 * h * (s0 + s1))
    };
    let (n1, n2) = d.size;
    let mut out = vec![0.0; d.len()];
    out[0] = k_base;
    for i in 1..n1 {
        let (a, b) = (d.index(i - 1, 0), d.index(i, 0));
        out[b] = heun(out[a], a, b, 0)?;
    }
    for i in 0..n1 {
        for j in 1..n2 {
            let (a, b) = (d.index(i, j - 1), d.index(i, j));
            out[b] = heun(out[a], a, b, 1)?;
        }
    }
    RealField::from_values(d, out)
}

/// `|(-4 K_u / (sqrt(-K) (1 + K)))_v|`.
pub fn condition_negative(k: &RealField) -> Result<ResidualReport> {
    require_kind(k.domain(), GridKind::Null, "condition_negative")?;
    require_sign(k, false)?;
    require_not_unit(k)?;
    let k_u = k.partial(0);
    let inner = k_u.zip_map(k, |ku, kv| -4.0 * ku / ((-kv).sqrt() * (1.0 + kv)))?;
    Ok(ResidualReport::all_valid("negative correspondence condition", inner.partial(1).map(f64::abs)))
}

/// `K*` with `K*(origin) = base < 0`, summing exact `F1` increments along
/// `u` and `F2` increments along `v`. Fails with `InconsistentLines` when the
/// two summation orders differ by more than `tolerance` in `log(-K*)`.
pub fn transfer_negative(k: &RealField, base: Option<f64>, tolerance: f64) -> Result<CorrespondenceResult> {
    let base = require_base(base, false)?;
    let condition = condition_negative(k)?;
    let d = *k.domain();
    let f1: Vec<f64> = k.values().iter().map(|&v| log_term_u(v)).collect();
    let f2: Vec<f64> = k.values().iter().map(|&v| log_term_v(v)).collect();
    let du = |a: usize, b: usize| f1[b] - f1[a];
    let dv = |a: usize, b: usize| f2[b] - f2[a];
    let row_first = sweep(&d, (-base).ln(), du, dv, true);
    let col_first = sweep(&d, (-base).ln(), du, dv, false);
    let gap = row_first.iter().zip(&col_first).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if gap > tolerance {
        return Err(Error::InconsistentLines { discrepancy: gap });
    }
    Ok(CorrespondenceResult {
        k_target: RealField::from_values(d, row_first.into_iter().map(|l| -l.exp()).collect())?,
        condition_residual: condition,
        base_point_value: base,
        path_dependence: gap,
    })
}

/// Solves `f(r) = target` for `r = sqrt(-K)` on one side of `r = 1` by
/// bisection; `f` must be monotone there.
fn solve_side(f: impl Fn(f64) -> f64, target: f64, above_one: bool) -> Option<f64> {
    let (mut lo, mut hi) = if above_one { (1.0, 2.0) } else { (0.5, 1.0) };
    let increasing = if above_one { f(2.0) > f(1.5) } else { f(0.75) > f(0.5) };
    let below = |r: f64| if increasing { f(r) < target } else { f(r) > target };
    if above_one {
        while below(hi) {
            hi *= 2.0;
            if hi > 1e150 {
                return None;
            }
        }
    } else {
        while !below(lo) {
            lo /= 2.0;
            if lo < 1e-150 {
                return None;
            }
        }
    }
    // Geometric bisection keeps relative precision near both ends.
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid == lo || mid == hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = (lo * hi).sqrt();
    let err = (f(mid) - target).abs();
    (err <= 1e-9 * (1.0 + target.abs())).then_some(mid)
}

/// Recovers `K` from `K*` with `K(origin) = k_base`, inverting the edge
/// relations exactly. The solution keeps the side of `K = -1` of `k_base`.
pub fn inverse_negative(k_target: &RealField, k_base: f64) -> Result<RealField> {
    require_kind(k_target.domain(), GridKind::Null, "inverse_negative")?;
    require_sign(k_target, false)?;
    if !(k_base < 0.0) {
        return Err(Error::CurvatureSign { node: (0, 0), k: k_base });
    }
    if (k_base + 1.0).abs() < FORBIDDEN_TOLERANCE {
        return Err(Error::ForbiddenCurvature {
            node: (0, 0),
            k: k_base,
            forbidden: -1.0,
        });
    }
    let above = k_base < -1.0;
    let f1 = |r: f64| log_term_u(-r * r);
    let f2 = |r: f64| log_term_v(-r * r);
    let d = *k_target.domain();
    let log_t: Vec<f64> = k_target.values().iter().map(|&v| (-v).ln()).collect();
    let step = |k_prev: f64, a: usize, b: usize, along_u: bool| -> Result<f64> {
        let delta = log_t[b] - log_t[a];
        let r = if along_u {
            solve_side(f1, log_term_u(k_prev) + delta, above)
        } else {
            solve_side(f2, log_term_v(k_prev) + delta, above)
        };
        r.map(|r| -r * r)
            .ok_or_else(|| Error::DomainError(format!("no curvature on the same side of -1 reproduces node {:?}", d.node(b))))
    };
    let (n1, n2) = d.size;
    let mut out = vec![0.0; d.len()];
    out[0] = k_base;
    for i in 1..n1 {
        let (a, b) = (d.index(i - 1, 0), d.index(i, 0));
        out[b] = step(out[a], a, b, true)?;
    }
    for i in 0..n1 {
        for j in 1..n2 {
            let (a, b) = (d.index(i, j - 1), d.index(i, j));
            out[b] = step(out[a], a, b, false)?;
        }
    }
    RealField::from_values(d, out)
}

/// `Im F` for inspection of the harmonic part of the positive transfer.
pub fn positive_angle(k: &RealField) -> RealField {
    k.map(|v| positive_potential(v).im)
}

/// Convenience: constant field on a domain.
pub fn constant(domain: GridDomain, value: f64) -> RealField {
    Field::constant(domain, value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn null_grid() -> GridDomain {
        GridDomain::spanning((-1.0, 0.2), (-0.2, 1.0), (17, 17), GridKind::Null).unwrap()
    }

    fn conformal_grid(h: f64) -> GridDomain {
        GridDomain::centered((0.6, 0.0), 0.3, h, GridKind::Conformal).unwrap()
    }

    #[test]
    fn potential_matches_complex_log() {
        for k in [0.3_f64, 1.0, 2.5] {
            let direct = (C64::new(k.sqrt(), 1.0).powi(4) / k).ln();
            let f = positive_potential(k);
            assert!((f.re - direct.re).abs() < 1e-14);
            // Principal log and the continuous branch differ by a multiple of 2 pi.
            let turns = (f.im - direct.im) / std::f64::consts::TAU;
            assert!((turns - turns.round()).abs() < 1e-12);
        }
        let h = 1e-6;
        let k: f64 = 0.7;
        let fd = (positive_potential(k + h) - positive_potential(k - h)) / (2.0 * h);
        assert!((fd - positive_potential_derivative(k)).norm() < 1e-8);
    }

    #[test]
    fn unit_curvature_transfers_to_constant() {
        let k = constant(conformal_grid(0.05), 1.0);
        let r = transfer_positive(&k, Some(3.0)).unwrap();
        assert!(r.k_target.values().iter().all(|&v| (v - 3.0).abs() < 1e-12));
        assert!(matches!(transfer_positive(&k, None), Err(Error::GaugeUnderdetermined(_))));
    }

    #[test]
    fn negative_rejects_unit_curvature() {
        let k = constant(null_grid(), -1.0);
        assert!(matches!(
            transfer_negative(&k, Some(-1.0), LINE_TOLERANCE),
            Err(Error::ForbiddenCurvature { .. })
        ));
    }

    #[test]
    fn negative_inverse_is_exact() {
        let d = null_grid();
        for shift in [-2.5, -0.4] {
            let k = RealField::from_fn(d, |u, v| shift + 0.1 * (u * 2.0).sin() * if shift < -1.0 { 1.0 } else { 0.5 } + 0.0 * v);
            let t = transfer_negative(&k, Some(-0.7), LINE_TOLERANCE).unwrap();
            let back = inverse_negative(&t.k_target, k.at(0)).unwrap();
            let err = back.values().iter().zip(k.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "{err}");
        }
    }

    #[test]
    fn non_separable_curvature_gives_inconsistent_lines() {
        let k = RealField::from_fn(null_grid(), |u, v| -2.0 - 0.1 * u * v);
        assert!(matches!(
            transfer_negative(&k, Some(-1.0), LINE_TOLERANCE),
            Err(Error::InconsistentLines { .. })
        ));
    }
}
