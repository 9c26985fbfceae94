//! Unit quaternions as SU(2), path-ordered integration of the frame 1-form,
//! holonomy diagnostics, the curvature `K < 0` surface of revolution built
//! from the pseudosphere Gauss map, and an independent R4 embedding oracle.
//!
//! An element is stored as the pair `(z, w)` of the matrix
//! `[[z, w], [-conj(w), conj(z)]]`; as a point of R4 it is
//! `(Re z, Im z, Re w, Im w)`.

use std::io::Write;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use nalgebra::{Matrix3, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{create_writer, flush, Field, GridDomain, GridKind};
use crate::lie::GroupPreset;
use crate::negative::{self, NullFrameCoefficients};
use crate::positive::FrameCoefficients;
use crate::scenarios::pseudosphere;
use crate::{Vec3, C64};

pub type Vec4 = Vector4<f64>;

/// Tolerance on `| |q| - 1 |` for stored sphere samples.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-10;
/// Raw drift beyond which a profile step is rejected.
pub const MAX_STEP_DRIFT: f64 = 1e-8;
/// `|1 - x_pole|` below which a stereographic image is flagged.
pub const POLE_PROXIMITY: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat {
    pub z: C64,
    pub w: C64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat {
        z: Complex64::new(1.0, 0.0),
        w: Complex64::new(0.0, 0.0),
    };

    pub fn new(z: C64, w: C64) -> Self {
        Self { z, w }
    }

    /// `w1 E1 + w2 E2 + w3 E3`.
    pub fn from_algebra(v: &Vec3) -> Self {
        Self::new(C64::new(0.0, v[2]), C64::new(v[0], v[1]))
    }

    /// Components along `E1, E2, E3`; the real part is dropped.
    pub fn to_algebra(&self) -> Vec3 {
        Vec3::new(self.w.re, self.w.im, self.z.im)
    }

    pub fn from_r4(x: &Vec4) -> Self {
        Self::new(C64::new(x[0], x[1]), C64::new(x[2], x[3]))
    }

    pub fn to_r4(&self) -> Vec4 {
        Vec4::new(self.z.re, self.z.im, self.w.re, self.w.im)
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        [[self.z, self.w], [-self.w.conj(), self.z.conj()]]
    }

    pub fn norm(&self) -> f64 {
        (self.z.norm_sqr() + self.w.norm_sqr()).sqrt()
    }

    pub fn normalized(&self) -> Self {
        *self * (1.0 / self.norm())
    }

    /// Conjugate transpose of the matrix.
    pub fn conj(&self) -> Self {
        Self::new(self.z.conj(), -self.w)
    }

    pub fn inverse(&self) -> Self {
        let n2 = self.z.norm_sqr() + self.w.norm_sqr();
        self.conj() * (1.0 / n2)
    }

    /// Great-circle distance on the unit sphere.
    pub fn distance(&self, other: &Quat) -> f64 {
        let chord = (self.to_r4() - other.to_r4()).norm();
        2.0 * (chord / 2.0).min(1.0).asin()
    }
}

impl Mul for Quat {
    type Output = Quat;

    fn mul(self, rhs: Quat) -> Quat {
        Quat::new(self.z * rhs.z - self.w * rhs.w.conj(), self.z * rhs.w + self.w * rhs.z.conj())
    }
}

impl Mul<f64> for Quat {
    type Output = Quat;

    fn mul(self, rhs: f64) -> Quat {
        Quat::new(self.z * rhs, self.w * rhs)
    }
}

impl Add for Quat {
    type Output = Quat;

    fn add(self, rhs: Quat) -> Quat {
        Quat::new(self.z + rhs.z, self.w + rhs.w)
    }
}

impl Sub for Quat {
    type Output = Quat;

    fn sub(self, rhs: Quat) -> Quat {
        Quat::new(self.z - rhs.z, self.w - rhs.w)
    }
}

/// `E1, E2, E3`, orthonormal for the round metric of curvature one.
pub fn su2_basis() -> [Quat; 3] {
    [Quat::from_algebra(&Vec3::x()), Quat::from_algebra(&Vec3::y()), Quat::from_algebra(&Vec3::z())]
}

pub fn commutator(p: Quat, q: Quat) -> Quat {
    p * q - q * p
}

/// Closed-form exponential of `w1 E1 + w2 E2 + w3 E3`.
pub fn exp_su2(w: &Vec3) -> Quat {
    let angle = w.norm();
    if angle == 0.0 {
        return Quat::IDENTITY;
    }
    let scale = angle.sin() / angle;
    let pure = Quat::from_algebra(w);
    Quat::new(C64::new(angle.cos(), 0.0) + pure.z * scale, pure.w * scale)
}

/// Frames that provide real algebra-valued tangents along both grid axes.
pub trait TangentFrame {
    /// `phi^{-1} d phi` along axis 0 and axis 1.
    fn tangents(&self) -> (Field<Vec3>, Field<Vec3>);
}

impl TangentFrame for FrameCoefficients {
    fn tangents(&self) -> (Field<Vec3>, Field<Vec3>) {
        self.real_tangents()
    }
}

impl TangentFrame for NullFrameCoefficients {
    fn tangents(&self) -> (Field<Vec3>, Field<Vec3>) {
        self.real_tangents()
    }
}

impl TangentFrame for (Field<Vec3>, Field<Vec3>) {
    fn tangents(&self) -> (Field<Vec3>, Field<Vec3>) {
        self.clone()
    }
}

/// Ambient space of a sample: the unit sphere in R4, or R3 stored with a zero
/// fourth coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ambient {
    Sphere,
    Euclidean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    pub domain: GridDomain,
    pub ambient: Ambient,
    pub points: Vec<Vec4>,
    /// Largest `| |q| - 1 |` seen before renormalization.
    pub raw_drift: f64,
}

impl SurfaceSample {
    pub fn new(domain: GridDomain, ambient: Ambient, points: Vec<Vec4>) -> Result<Self> {
        if points.len() != domain.len() {
            return Err(Error::InvalidGrid(format!("{} points for {} nodes", points.len(), domain.len())));
        }
        let bad = |idx: usize| Error::DomainError(format!("sample point {idx} leaves the ambient space"));
        for (idx, p) in points.iter().enumerate() {
            let off = match ambient {
                Ambient::Sphere => (p.norm() - 1.0).abs(),
                Ambient::Euclidean => p[3].abs(),
            };
            if !(off <= UNIT_NORM_TOLERANCE) {
                return Err(bad(idx));
            }
        }
        Ok(Self {
            domain,
            ambient,
            points,
            raw_drift: 0.0,
        })
    }

    pub fn quat(&self, idx: usize) -> Quat {
        Quat::from_r4(&self.points[idx])
    }

    pub fn point3(&self, idx: usize) -> Vec3 {
        self.points[idx].xyz()
    }

    /// `q * self` pointwise.
    pub fn left_translated(&self, q: Quat) -> Self {
        Self {
            points: self.points.iter().map(|p| (q * Quat::from_r4(p)).to_r4()).collect(),
            ..self.clone()
        }
    }

    /// Largest ambient distance to another sample on the same grid.
    pub fn max_deviation(&self, other: &SurfaceSample) -> f64 {
        self.points.iter().zip(&other.points).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest Euclidean distance to another sample after removing the
    /// difference of centroids (translation-only alignment).
    pub fn max_deviation_up_to_translation(&self, other: &SurfaceSample) -> f64 {
        let n = self.points.len() as f64;
        let shift = (self.points.iter().sum::<Vec4>() - other.points.iter().sum::<Vec4>()) / n;
        self.points.iter().zip(&other.points).map(|(a, b)| (a - b - shift).norm()).fold(0.0, f64::max)
    }
}

fn step_along(tangent: &Field<Vec3>, from: usize, to: usize, h: f64) -> Vec3 {
    (tangent.at(from) + tangent.at(to)) * (0.5 * h)
}

fn check_frame_domain(tx: &Field<Vec3>, ty: &Field<Vec3>) -> Result<GridDomain> {
    if tx.domain() != ty.domain() {
        return Err(Error::DomainMismatch);
    }
    Ok(*tx.domain())
}

/// Sweeps the first column, then every row, advancing
/// `phi_next = phi * exp(h * omega_mid)` with `omega_mid` the average of the
/// two nodal tangents. `start` fixes the left-translation gauge.
pub fn integrate_frame(frame: &impl TangentFrame, start: Quat) -> Result<SurfaceSample> {
    let (tx, ty) = frame.tangents();
    let d = check_frame_domain(&tx, &ty)?;
    let (n1, n2) = d.size;
    let (h1, h2) = d.step;
    let mut pts = vec![Quat::IDENTITY; d.len()];
    let mut drift: f64 = 0.0;
    let mut advance = |q: Quat, w: Vec3| {
        let next = q * exp_su2(&w);
        drift = drift.max((next.norm() - 1.0).abs());
        next.normalized()
    };
    pts[0] = start.normalized();
    for j in 1..n2 {
        let (a, b) = (d.index(0, j - 1), d.index(0, j));
        pts[b] = advance(pts[a], step_along(&ty, a, b, h2));
    }
    for j in 0..n2 {
        for i in 1..n1 {
            let (a, b) = (d.index(i - 1, j), d.index(i, j));
            pts[b] = advance(pts[a], step_along(&tx, a, b, h1));
        }
    }
    let mut sample = SurfaceSample::new(d, Ambient::Sphere, pts.iter().map(Quat::to_r4).collect())?;
    sample.raw_drift = drift;
    Ok(sample)
}

/// Holonomy of the discrete connection around cell `(i, j)` (lower-left
/// corner), as a distance from the identity.
pub fn loop_closure_defect(frame: &impl TangentFrame, cell: (usize, usize)) -> Result<f64> {
    let (tx, ty) = frame.tangents();
    let d = check_frame_domain(&tx, &ty)?;
    cell_holonomy(&d, &tx, &ty, cell)
}

fn cell_holonomy(d: &GridDomain, tx: &Field<Vec3>, ty: &Field<Vec3>, (i, j): (usize, usize)) -> Result<f64> {
    if i + 1 >= d.size.0 || j + 1 >= d.size.1 {
        return Err(Error::InvalidGrid(format!("cell ({i}, {j}) outside the grid")));
    }
    let (p00, p10, p01, p11) = (d.index(i, j), d.index(i + 1, j), d.index(i, j + 1), d.index(i + 1, j + 1));
    let bottom = exp_su2(&step_along(tx, p00, p10, d.step.0));
    let right = exp_su2(&step_along(ty, p10, p11, d.step.1));
    let top = exp_su2(&step_along(tx, p01, p11, d.step.0));
    let left = exp_su2(&step_along(ty, p00, p01, d.step.1));
    let holonomy = bottom * right * top.inverse() * left.inverse();
    Ok(holonomy.distance(&Quat::IDENTITY))
}

/// Largest holonomy over cells whose corners are all at least `margin`
/// nodes from the boundary.
pub fn max_loop_closure_defect(frame: &impl TangentFrame, margin: usize) -> Result<f64> {
    let (tx, ty) = frame.tangents();
    let d = check_frame_domain(&tx, &ty)?;
    let mut worst: f64 = 0.0;
    for j in margin..d.size.1.saturating_sub(margin + 1) {
        for i in margin..d.size.0.saturating_sub(margin + 1) {
            worst = worst.max(cell_holonomy(&d, &tx, &ty, (i, j))?);
        }
    }
    Ok(worst)
}

/// The printed parametrization
/// `(sin a sin b cos t, sin a sin b sin t, cos a sin b, cos b)`.
pub fn revolution_point(alpha: f64, beta: f64, t: f64) -> Vec4 {
    let r = alpha.sin() * beta.sin();
    Vec4::new(r * t.cos(), r * t.sin(), alpha.cos() * beta.sin(), beta.cos())
}

/// `(A - a)` and `(A + a)` at `s` on the line `t = 0`, i.e. `(u, v) = (-s, s)`.
fn profile_generators(k: f64, s: f64) -> Result<(Vec3, Vec3)> {
    let jet = pseudosphere::null_jet(-s, s, k);
    let (a, big, _) = negative::closed_node(GroupPreset::S3.mu(), &jet)?.real();
    Ok((big - a, big + a))
}

/// Integrates `chi' = chi * (A - a)(s, 0)` from `chi(0) = 1` with classical
/// RK4, through the requested non-negative abscissae in increasing order,
/// using steps no longer than `max_step`.
#[derive(Debug, Clone, Copy)]
pub struct ProfileIntegrator {
    pub k: f64,
    pub max_step: f64,
}

impl ProfileIntegrator {
    pub fn new(k: f64, max_step: f64) -> Result<Self> {
        if !(k < 0.0) {
            return Err(Error::CurvatureSign { node: (0, 0), k });
        }
        if (k + 1.0).abs() < negative::FORBIDDEN_TOLERANCE {
            return Err(Error::ForbiddenCurvature {
                node: (0, 0),
                k,
                forbidden: -1.0,
            });
        }
        if !(max_step > 0.0) {
            return Err(Error::DomainError(format!("profile step {max_step} must be positive")));
        }
        Ok(Self { k, max_step })
    }

    fn rhs(&self, q: Quat, s: f64) -> Result<Quat> {
        Ok(q * Quat::from_algebra(&profile_generators(self.k, s)?.0))
    }

    fn rk4(&self, q: Quat, s: f64, h: f64) -> Result<Quat> {
        let k1 = self.rhs(q, s)?;
        let k2 = self.rhs(q + k1 * (h / 2.0), s + h / 2.0)?;
        let k3 = self.rhs(q + k2 * (h / 2.0), s + h / 2.0)?;
        let k4 = self.rhs(q + k3 * h, s + h)?;
        Ok(q + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
    }

    /// Profile values at `s_values` (any order) and the largest raw drift.
    pub fn solve(&self, s_values: &[f64]) -> Result<(Vec<Quat>, f64)> {
        if let Some(&bad) = s_values.iter().find(|&&s| !(s >= 0.0)) {
            return Err(Error::DomainError(format!("profile abscissa {bad} is negative")));
        }
        let mut order: Vec<usize> = (0..s_values.len()).collect();
        order.sort_by(|&a, &b| s_values[a].total_cmp(&s_values[b]));
        let mut out = vec![Quat::IDENTITY; s_values.len()];
        let (mut q, mut s, mut drift) = (Quat::IDENTITY, 0.0_f64, 0.0_f64);
        for idx in order {
            let target = s_values[idx];
            let span = target - s;
            if span > 0.0 {
                let n = (span / self.max_step).ceil().max(1.0) as usize;
                let h = span / n as f64;
                for step in 0..n {
                    let next = self.rk4(q, s + step as f64 * h, h)?;
                    let off = (next.norm() - 1.0).abs();
                    drift = drift.max(off);
                    if off > MAX_STEP_DRIFT {
                        return Err(Error::StepRejected { drift: off });
                    }
                    q = next.normalized();
                }
                s = target;
            }
            out[idx] = q;
        }
        Ok((out, drift))
    }
}

/// `alpha(s)`, `beta(s)` read off the profile `psi(s, 0)` through the printed
/// parametrization, together with how far the profile leaves the plane
/// `x2 = 0` that the parametrization assumes.
#[derive(Debug, Clone, PartialEq)]
pub struct RevolutionProfile {
    pub s: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// `max |x2|` along the profile; zero iff the printed ansatz is exact.
    pub ansatz_defect: f64,
    pub raw_drift: f64,
}

impl RevolutionProfile {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = create_writer(path)?;
        writeln!(w, "s,alpha,beta")?;
        for ((s, a), b) in self.s.iter().zip(&self.alpha).zip(&self.beta) {
            writeln!(w, "{s:.17e},{a:.17e},{b:.17e}")?;
        }
        flush(w)
    }
}

/// Parameters of the surface sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevolutionConfig {
    pub k: f64,
    pub s_range: (f64, f64),
    /// RK4 step.
    pub step: f64,
    /// Surface grid spacing in `s`, as a multiple of `step`.
    pub stride: usize,
    pub t_range: (f64, f64),
    pub t_nodes: usize,
}

impl Default for RevolutionConfig {
    fn default() -> Self {
        Self {
            k: -2.0,
            s_range: (0.1, 2.0),
            step: 1e-3,
            stride: 10,
            t_range: (0.0, std::f64::consts::TAU),
            t_nodes: 129,
        }
    }
}

/// The surface `psi(s, t) = exp(t X) chi(s) exp(-t Y)` with `Y = E3 / 2`
/// and `X = (A + a)(0, 0) + Y`: the Gauss map turns by the angle `t`, so the
/// surface is invariant under this one-parameter group of isometries.
#[derive(Debug, Clone)]
pub struct RevolutionSurface {
    pub profile: RevolutionProfile,
    pub sample: SurfaceSample,
    pub left_generator: Vec3,
    pub right_generator: Vec3,
}

pub fn symmetry_generators(k: f64) -> Result<(Vec3, Vec3)> {
    let spin = Vec3::new(0.0, 0.0, 0.5);
    let (_, sum) = profile_generators(k, 0.0)?;
    Ok((sum + spin, spin))
}

pub fn swept_point(left: &Vec3, right: &Vec3, chi: Quat, t: f64) -> Quat {
    exp_su2(&(left * t)) * chi * exp_su2(&(right * -t))
}

/// Solves the profile ODE with RK4 and sweeps it into a surface grid over
/// `(s, t)`.
pub fn revolution_ode(cfg: &RevolutionConfig) -> Result<RevolutionSurface> {
    let integrator = ProfileIntegrator::new(cfg.k, cfg.step)?;
    let (s0, s1) = cfg.s_range;
    if !(s0 > 0.0 && s1 > s0) {
        return Err(Error::DomainError(format!("s range ({s0}, {s1}) must be positive and increasing")));
    }
    let n = (s1 / cfg.step).round() as usize;
    let h = s1 / n as f64;
    let s_all: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
    let (chi, drift) = integrator.solve(&s_all)?;

    let mut alpha = Vec::with_capacity(chi.len());
    let mut beta = Vec::with_capacity(chi.len());
    let mut defect: f64 = 0.0;
    for q in &chi {
        let x = q.to_r4();
        alpha.push(x[0].atan2(x[2]));
        beta.push(x[3].clamp(-1.0, 1.0).acos());
        defect = defect.max(x[1].abs());
    }
    let profile = RevolutionProfile {
        s: s_all.clone(),
        alpha,
        beta,
        ansatz_defect: defect,
        raw_drift: drift,
    };

    let stride = cfg.stride.max(1);
    let first = (s0 / h).round() as usize;
    let rows: Vec<usize> = (first..=n).step_by(stride).collect();
    let (t0, t1) = cfg.t_range;
    let domain = GridDomain::new(
        (s_all[first], t0),
        (h * stride as f64, (t1 - t0) / (cfg.t_nodes.max(2) - 1) as f64),
        (rows.len(), cfg.t_nodes),
        GridKind::Parametric,
    )?;
    let (left, right) = symmetry_generators(cfg.k)?;
    let points = domain
        .nodes()
        .map(|(i, j)| {
            let (_, t) = domain.coords(i, j);
            swept_point(&left, &right, chi[rows[i]], t).to_r4()
        })
        .collect();
    let mut sample = SurfaceSample::new(domain, Ambient::Sphere, points)?;
    sample.raw_drift = drift;
    Ok(RevolutionSurface {
        profile,
        sample,
        left_generator: left,
        right_generator: right,
    })
}

/// Reference values of the swept surface at arbitrary null coordinates
/// `(u, v)` with `u <= v`, profile integrated with steps `<= max_step`.
pub fn revolution_reference(k: f64, domain: &GridDomain, max_step: f64) -> Result<SurfaceSample> {
    pseudosphere::check_domain(domain)?;
    let integrator = ProfileIntegrator::new(k, max_step)?;
    let st: Vec<(f64, f64)> = domain
        .nodes()
        .map(|(i, j)| {
            let (u, v) = domain.coords(i, j);
            ((v - u) / 2.0, (v + u) / 2.0)
        })
        .collect();
    let s_values: Vec<f64> = st.iter().map(|p| p.0).collect();
    let (chi, drift) = integrator.solve(&s_values)?;
    let (left, right) = symmetry_generators(k)?;
    let points = st.iter().zip(&chi).map(|(&(_, t), &q)| swept_point(&left, &right, q, t).to_r4()).collect();
    let mut sample = SurfaceSample::new(*domain, Ambient::Sphere, points)?;
    sample.raw_drift = drift;
    Ok(sample)
}

/// Fundamental forms and curvature measured from a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleNode {
    /// `(E, F, G)` of the first fundamental form in grid coordinates.
    pub first: [f64; 3],
    /// `(L, M, N)` of the second fundamental form for the unit normal chosen.
    pub second: [f64; 3],
    pub k_ext: f64,
    /// Unit normal used for `II`, in ambient coordinates.
    pub normal: Vec4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleForms {
    pub domain: GridDomain,
    /// `None` within the stencil margin of the boundary.
    pub nodes: Vec<Option<OracleNode>>,
}

/// Stencil half-width of the oracle.
pub const ORACLE_MARGIN: usize = 2;

impl OracleForms {
    pub fn measured(&self) -> impl Iterator<Item = (usize, &OracleNode)> + '_ {
        self.nodes.iter().enumerate().filter_map(|(i, n)| n.as_ref().map(|n| (i, n)))
    }

    /// Largest `|K_ext - target|` over measured nodes.
    pub fn max_curvature_error(&self, target: f64) -> f64 {
        self.measured().map(|(_, n)| (n.k_ext - target).abs()).fold(0.0, f64::max)
    }

    /// Same, restricted to nodes at least `margin` from the boundary.
    pub fn max_curvature_error_within(&self, target: f64, margin: usize) -> f64 {
        self.measured()
            .filter(|(idx, _)| {
                let (i, j) = self.domain.node(*idx);
                self.domain.is_interior(i, j, margin)
            })
            .map(|(_, n)| (n.k_ext - target).abs())
            .fold(0.0, f64::max)
    }
}

/// Unit vector orthogonal to three vectors of R4.
fn orthogonal_complement(a: &Vec4, b: &Vec4, c: &Vec4) -> Vec4 {
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&k| k != skip).collect();
        Matrix3::from_fn(|r, col| [a, b, c][r][cols[col]]).determinant()
    };
    let n = Vec4::new(minor(0), -minor(1), minor(2), -minor(3));
    n / n.norm()
}

/// Finite-difference `I`, `II` and `K_ext = det II / det I` with fourth-order
/// stencils. On the sphere the normal is orthogonal to the position and both
/// tangents, which realizes the tangential projection of the ambient
/// derivative; in R3 it is orthogonal to the tangents and the fourth axis.
pub fn embed_oracle_forms(sample: &SurfaceSample) -> Result<OracleForms> {
    let d = sample.domain;
    let (h1, h2) = d.step;
    let p = |i: usize, j: usize| sample.points[d.index(i, j)];
    let mut nodes = vec![None; d.len()];
    for (i, j) in d.nodes() {
        if !d.is_interior(i, j, ORACLE_MARGIN) {
            continue;
        }
        let x = p(i, j);
        let d1 = (-p(i + 2, j) + p(i + 1, j) * 8.0 - p(i - 1, j) * 8.0 + p(i - 2, j)) / (12.0 * h1);
        let d2 = (-p(i, j + 2) + p(i, j + 1) * 8.0 - p(i, j - 1) * 8.0 + p(i, j - 2)) / (12.0 * h2);
        let d11 = (-p(i + 2, j) + p(i + 1, j) * 16.0 - x * 30.0 + p(i - 1, j) * 16.0 - p(i - 2, j)) / (12.0 * h1 * h1);
        let d22 = (-p(i, j + 2) + p(i, j + 1) * 16.0 - x * 30.0 + p(i, j - 1) * 16.0 - p(i, j - 2)) / (12.0 * h2 * h2);
        let diff1 = |jj: usize| (-p(i + 2, jj) + p(i + 1, jj) * 8.0 - p(i - 1, jj) * 8.0 + p(i - 2, jj)) / (12.0 * h1);
        let d12 = (-diff1(j + 2) + diff1(j + 1) * 8.0 - diff1(j - 1) * 8.0 + diff1(j - 2)) / (12.0 * h2);

        let first = [d1.dot(&d1), d1.dot(&d2), d2.dot(&d2)];
        let det_i = first[0] * first[2] - first[1] * first[1];
        if !(det_i > 1e-12 * first[0] * first[2]) {
            return Err(Error::DegenerateTangents { node: (i, j) });
        }
        let third = match sample.ambient {
            Ambient::Sphere => x,
            Ambient::Euclidean => Vec4::w(),
        };
        let n = orthogonal_complement(&third, &d1, &d2);
        let second = [n.dot(&d11), n.dot(&d12), n.dot(&d22)];
        let det_ii = second[0] * second[2] - second[1] * second[1];
        nodes[d.index(i, j)] = Some(OracleNode {
            first,
            second,
            k_ext: det_ii / det_i,
            normal: n,
        });
    }
    Ok(OracleForms { domain: d, nodes })
}

/// Stereographic image in R3 with per-node pole flags.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoMesh {
    pub domain: GridDomain,
    pub points: Vec<Vec3>,
    pub near_pole: Vec<bool>,
}

/// Projects from the pole `+e_pole` (`pole` in `0..4`, default `3`):
/// the remaining coordinates divided by `1 - x_pole`.
pub fn stereo_s3_to_r3(sample: &SurfaceSample, pole: usize) -> Result<StereoMesh> {
    if sample.ambient != Ambient::Sphere {
        return Err(Error::DomainError("stereographic export needs a sphere sample".into()));
    }
    if pole > 3 {
        return Err(Error::DomainError(format!("pole axis {pole} outside 0..4")));
    }
    let mut points = Vec::with_capacity(sample.points.len());
    let mut near_pole = Vec::with_capacity(sample.points.len());
    for x in &sample.points {
        let den = 1.0 - x[pole];
        let rest: Vec<f64> = (0..4).filter(|&k| k != pole).map(|k| x[k]).collect();
        near_pole.push(den.abs() < POLE_PROXIMITY);
        points.push(Vec3::new(rest[0], rest[1], rest[2]) / den);
    }
    Ok(StereoMesh {
        domain: sample.domain,
        points,
        near_pole,
    })
}

/// Trapezoidal quadrature of an R3-valued exact 1-form with the same sweep
/// as [`integrate_frame`]. In flat space the frame coefficients are the
/// tangent vectors themselves.
pub fn r3_integrate(frame: &impl TangentFrame, start: Vec3) -> Result<SurfaceSample> {
    let (tx, ty) = frame.tangents();
    let d = check_frame_domain(&tx, &ty)?;
    let (n1, n2) = d.size;
    let mut pts = vec![Vec3::zeros(); d.len()];
    pts[0] = start;
    for j in 1..n2 {
        let (a, b) = (d.index(0, j - 1), d.index(0, j));
        pts[b] = pts[a] + step_along(&ty, a, b, d.step.1);
    }
    for j in 0..n2 {
        for i in 1..n1 {
            let (a, b) = (d.index(i - 1, j), d.index(i, j));
            pts[b] = pts[a] + step_along(&tx, a, b, d.step.0);
        }
    }
    SurfaceSample::new(d, Ambient::Euclidean, pts.iter().map(|p| Vec4::new(p.x, p.y, p.z, 0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: Quat, b: Quat, tol: f64) -> bool {
        (a.to_r4() - b.to_r4()).norm() < tol
    }

    #[test]
    fn basis_brackets_and_squares() {
        let [e1, e2, e3] = su2_basis();
        assert!(close(commutator(e2, e3), e1 * 2.0, 1e-15));
        assert!(close(commutator(e3, e1), e2 * 2.0, 1e-15));
        assert!(close(commutator(e1, e2), e3 * 2.0, 1e-15));
        for e in [e1, e2, e3] {
            assert!(close(e * e, Quat::IDENTITY * -1.0, 1e-15));
        }
        assert_eq!(e1.matrix()[1][0], C64::new(-1.0, 0.0));
        assert_eq!(e2.matrix()[1][0], C64::new(0.0, 1.0));
        assert_eq!(e3.matrix()[1][1], C64::new(0.0, -1.0));
    }

    #[test]
    fn exponential_examples() {
        let q = exp_su2(&Vec3::new(0.0, 0.0, FRAC_PI_2));
        assert!(close(q, Quat::new(C64::new(0.0, 1.0), C64::new(0.0, 0.0)), 1e-15));
        let t: f64 = 0.7;
        let m = exp_su2(&Vec3::new(t, 0.0, 0.0)).matrix();
        assert!((m[0][0] - t.cos()).norm() < 1e-15);
        assert!((m[0][1] - t.sin()).norm() < 1e-15);
        assert!((m[1][0] + t.sin()).norm() < 1e-15);
        assert_eq!(exp_su2(&Vec3::zeros()), Quat::IDENTITY);
    }

    #[test]
    fn profile_starts_at_right_angles() {
        let x = revolution_point(FRAC_PI_2, FRAC_PI_2, 0.0);
        assert!((x - Vec4::new(1.0, 0.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn stereographic_examples() {
        let d = GridDomain::new((0.0, 0.0), (1.0, 1.0), (5, 5), GridKind::Parametric).unwrap();
        let mut pts = vec![Vec4::new(1.0, 0.0, 0.0, 0.0); 25];
        pts[1] = Vec4::new(0.0, 0.0, 0.0, -1.0);
        pts[2] = Vec4::new(0.0, 0.0, 0.0, 1.0);
        let s = SurfaceSample::new(d, Ambient::Sphere, pts).unwrap();
        let m = stereo_s3_to_r3(&s, 3).unwrap();
        assert_eq!(m.points[0], Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(m.points[1], Vec3::zeros());
        assert!(m.near_pole[2] && !m.near_pole[0]);
    }

    #[test]
    fn profile_generator_closed_forms() {
        // On t = 0: A + a = (-sinh s, -sqrt2 cosh s, sinh^2 s) / cosh^2 s and
        // A - a = (sqrt2 sinh s, cosh s, -sqrt2 sinh^2 s) / cosh^2 s.
        let r2 = std::f64::consts::SQRT_2;
        for s in [0.0_f64, 0.4, 1.3] {
            let (diff, sum) = profile_generators(-2.0, s).unwrap();
            let c2 = s.cosh().powi(2);
            let sum_ref = Vec3::new(-s.sinh(), -r2 * s.cosh(), s.sinh().powi(2)) / c2;
            let diff_ref = Vec3::new(r2 * s.sinh(), s.cosh(), -r2 * s.sinh().powi(2)) / c2;
            assert!((sum - sum_ref).norm() < 1e-13);
            assert!((diff - diff_ref).norm() < 1e-13);
        }
    }

    #[test]
    fn oracle_rejects_degenerate_sample() {
        let d = GridDomain::new((0.0, 0.0), (0.1, 0.1), (6, 6), GridKind::Parametric).unwrap();
        let pts = d.nodes().map(|(i, _)| Vec4::new(i as f64, 0.0, 0.0, 0.0)).collect();
        let s = SurfaceSample::new(d, Ambient::Euclidean, pts).unwrap();
        assert!(matches!(embed_oracle_forms(&s), Err(Error::DegenerateTangents { .. })));
    }
}
