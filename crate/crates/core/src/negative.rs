//! Negative extrinsic curvature in proper null coordinates `(u, v)` of the
//! second fundamental form.
//!
//! With `s = 1/sqrt(-K)` the frame coefficients `a = phi^{-1} phi_u` and
//! `A = phi^{-1} phi_v` solve
//! `(I - s [N x] M) a = s N x N_u` and `(I + s [N x] M) A = -s N x N_v`;
//! both systems are real.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{normal_derivative, stereo_unproject, ComplexField, DiffOp, Field, GridKind, RealField};
use crate::lie::{ConnectionCoefficients, Mu, StructureConstants};
use crate::pde;
use crate::positive::{parallel_defect, SINGULAR_DET};
use crate::report::ResidualReport;
use crate::{cross_matrix, CVec3, Mat3, Vec3, C64};

/// Distance to an excluded curvature value that counts as hitting it.
pub const FORBIDDEN_TOLERANCE: f64 = 1e-10;

/// Gauss map and curvature data at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullJet {
    pub g: C64,
    pub g_u: C64,
    pub g_v: C64,
    pub k: f64,
}

impl NullJet {
    pub fn normal(&self) -> Vec3 {
        stereo_unproject(self.g)
    }

    pub fn normal_u(&self) -> Vec3 {
        normal_derivative(self.g, self.g_u, self.g_u.conj()).map(|c| c.re)
    }

    pub fn normal_v(&self) -> Vec3 {
        normal_derivative(self.g, self.g_v, self.g_v.conj()).map(|c| c.re)
    }

    /// `i (g_u conj(g_v) - conj(g_u) g_v)`, which is real.
    pub fn margin(&self) -> f64 {
        (Complex64::i() * (self.g_u * self.g_v.conj() - self.g_u.conj() * self.g_v)).re
    }
}

/// `phi^{-1} phi_u` and `phi^{-1} phi_v` at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullFrame {
    pub along_u: CVec3,
    pub along_v: CVec3,
}

impl NullFrame {
    /// Real parts, with the largest discarded imaginary component.
    pub fn real(&self) -> (Vec3, Vec3, f64) {
        let residue = self.along_u.iter().chain(self.along_v.iter()).map(|c| c.im.abs()).fold(0.0, f64::max);
        (self.along_u.map(|c| c.re), self.along_v.map(|c| c.re), residue)
    }
}

/// Matrices of the two real systems at a node: `(I - sX, I + sX)` with
/// `X = [N x] M`, and their right-hand sides.
pub fn frame_systems(conn: &ConnectionCoefficients, jet: &NullJet) -> ((Mat3, Vec3), (Mat3, Vec3)) {
    let n = jet.normal();
    let s = 1.0 / (-jet.k).sqrt();
    let cross = cross_matrix(&n);
    let x = cross * conn.along_normal(&n);
    let u = (Mat3::identity() - x * s, cross * jet.normal_u() * s);
    let v = (Mat3::identity() + x * s, -(cross * jet.normal_v()) * s);
    (u, v)
}

/// Generic solve; returns the smaller determinant on failure.
pub fn solve_node(conn: &ConnectionCoefficients, jet: &NullJet) -> std::result::Result<NullFrame, f64> {
    let ((mu_mat, mu_rhs), (mv_mat, mv_rhs)) = frame_systems(conn, jet);
    let det = mu_mat.determinant().abs().min(mv_mat.determinant().abs());
    if det < SINGULAR_DET {
        return Err(det);
    }
    let a = mu_mat.lu().solve(&mu_rhs).ok_or(det)?;
    let b = mv_mat.lu().solve(&mv_rhs).ok_or(det)?;
    Ok(NullFrame {
        along_u: crate::complexify(&a),
        along_v: crate::complexify(&b),
    })
}

/// The two excluded curvature values `-mu1^2` and
/// `-((|g|^2 - 1)^2 mu1 + 4 |g|^2 mu3)^2 / (1 + |g|^2)^4`.
pub fn forbidden_curvatures(mu: Mu, g: C64) -> (f64, f64) {
    let r = g.norm_sqr();
    let b = 1.0 + r;
    let w = (r - 1.0).powi(2) * mu.mu1 + 4.0 * r * mu.mu3;
    (-mu.mu1 * mu.mu1, -(w * w) / b.powi(4))
}

fn check_forbidden(mu: Mu, jet: &NullJet, node: (usize, usize)) -> Result<()> {
    let (f1, f2) = forbidden_curvatures(mu, jet.g);
    for forbidden in [f1, f2] {
        if (jet.k - forbidden).abs() < FORBIDDEN_TOLERANCE {
            return Err(Error::ForbiddenCurvature { node, k: jet.k, forbidden });
        }
    }
    Ok(())
}

/// Closed form of the null frame for `mu1 = mu2`.
pub fn closed_node(mu: Mu, jet: &NullJet) -> Result<NullFrame> {
    closed_node_at(mu, jet, (0, 0))
}

fn closed_node_at(mu: Mu, jet: &NullJet, node: (usize, usize)) -> Result<NullFrame> {
    mu.require_axial()?;
    check_forbidden(mu, jet, node)?;
    let i = Complex64::i();
    let m1 = mu.mu1;
    let m3 = mu.mu3;
    let g = jet.g;
    let gb = g.conj();
    let a = g * g - 1.0;
    let ab = a.conj();
    let r = g.norm_sqr();
    let b = 1.0 + r;
    let c = g - gb;
    let ct = g + gb;
    let root = (-jet.k).sqrt();
    let lower = root * b * b - (b - 2.0).powi(2) * m1 - 4.0 * r * m3;
    let upper = root * b * b + (b - 2.0).powi(2) * m1 + 4.0 * r * m3;
    let d1 = b * (root - m1) * lower;
    let d2 = b * (root + m1) * upper;

    let (gu, gbu) = (jet.g_u, jet.g_u.conj());
    let (gv, gbv) = (jet.g_v, jet.g_v.conj());
    let along_u = CVec3::new(
        i * ((ab * gu - a * gbu) * root * b + (-(ab + 2.0) * gu + (a + 2.0) * gbu) * (b - 2.0) * m1 + c * (gb * gu + g * gbu) * 2.0 * m3) / d1,
        ((gu * (ab + 2.0) + gbu * (a + 2.0)) * (-root * b) + (ab * gu + a * gbu) * (b - 2.0) * m1 + ct * (gb * gu + g * gbu) * 2.0 * m3) / d1,
        i * 2.0 * (-gb * gu + g * gbu) / lower,
    );
    let along_v = CVec3::new(
        -i * ((ab * gv - a * gbv) * root * b + ((ab + 2.0) * gv - (a + 2.0) * gbv) * (b - 2.0) * m1 - c * (gb * gv + g * gbv) * 2.0 * m3) / d2,
        ((gv * (ab + 2.0) + gbv * (a + 2.0)) * root * b + (ab * gv + a * gbv) * (b - 2.0) * m1 + ct * (gb * gv + g * gbv) * 2.0 * m3) / d2,
        -i * 2.0 * (-gb * gv + g * gbv) / upper,
    );
    Ok(NullFrame { along_u, along_v })
}

/// `I = Euu du^2 + 2 Fuv du dv + Gvv dv^2`, `II = 2 f du dv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullFundamentalForms {
    pub euu: f64,
    pub fuv: f64,
    pub gvv: f64,
    /// `Euu Gvv - Fuv^2`.
    pub d: f64,
    /// `+sqrt(-K D)`.
    pub f: f64,
}

impl NullFundamentalForms {
    pub fn new(euu: f64, fuv: f64, gvv: f64, k: f64) -> Self {
        let d = euu * gvv - fuv * fuv;
        Self {
            euu,
            fuv,
            gvv,
            d,
            f: (-k * d).max(0.0).sqrt(),
        }
    }

    pub fn from_frame(a: &Vec3, b: &Vec3, k: f64) -> Self {
        Self::new(a.dot(a), a.dot(b), b.dot(b), k)
    }

    pub fn recovered_curvature(&self) -> f64 {
        -self.f * self.f / self.d
    }
}

/// Closed-form first fundamental form on the round sphere.
pub fn forms_s3_node(jet: &NullJet) -> Result<NullFundamentalForms> {
    if (jet.k + 1.0).abs() < FORBIDDEN_TOLERANCE {
        return Err(Error::ForbiddenCurvature {
            node: (0, 0),
            k: jet.k,
            forbidden: -1.0,
        });
    }
    let b = 1.0 + jet.g.norm_sqr();
    let b2 = b * b;
    let root = (-jet.k).sqrt();
    let (gu, gv) = (jet.g_u, jet.g_v);
    let euu = 4.0 * gu.norm_sqr() / ((1.0 - root).powi(2) * b2);
    let fuv = 2.0 * (gu.conj() * gv + gu * gv.conj()).re / ((1.0 + jet.k) * b2);
    let gvv = 4.0 * gv.norm_sqr() / ((1.0 + root).powi(2) * b2);
    Ok(NullFundamentalForms::new(euu, fuv, gvv, jet.k))
}

/// Gauss map, curvature and first derivatives on a null grid.
#[derive(Debug, Clone)]
pub struct NullData {
    pub g: ComplexField,
    pub g_u: ComplexField,
    pub g_v: ComplexField,
    pub k: RealField,
    pub k_u: RealField,
    pub k_v: RealField,
    pub valid: Vec<bool>,
}

impl NullData {
    pub fn new(g: &ComplexField, k: &RealField) -> Result<Self> {
        if g.domain() != k.domain() {
            return Err(Error::DomainMismatch);
        }
        if g.domain().kind != GridKind::Null {
            return Err(Error::KindMismatch {
                op: "d_u",
                kind: g.domain().kind.label(),
            });
        }
        if let Some(idx) = k.values().iter().position(|&v| !(v < 0.0)) {
            return Err(Error::CurvatureSign {
                node: k.domain().node(idx),
                k: k.at(idx),
            });
        }
        Ok(Self {
            g: g.clone(),
            g_u: g.differentiate(DiffOp::Du)?,
            g_v: g.differentiate(DiffOp::Dv)?,
            k: k.clone(),
            k_u: k.partial(0),
            k_v: k.partial(1),
            valid: g.chart_mask(),
        })
    }

    pub fn jet(&self, idx: usize) -> NullJet {
        NullJet {
            g: self.g.at(idx),
            g_u: self.g_u.at(idx),
            g_v: self.g_v.at(idx),
            k: self.k.at(idx),
        }
    }

    pub fn len(&self) -> usize {
        self.g.domain().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn g_uv(&self) -> ComplexField {
        self.g_u.partial(1)
    }

    fn map_nodes<T: Copy>(&self, f: impl Fn(usize, &NullJet) -> Result<T>) -> Result<Field<T>> {
        let values = (0..self.len()).map(|idx| f(idx, &self.jet(idx))).collect::<Result<Vec<T>>>()?;
        Field::from_values(*self.g.domain(), values)
    }
}

/// Null frame per node.
#[derive(Debug, Clone, PartialEq)]
pub struct NullFrameCoefficients(pub Field<NullFrame>);

impl NullFrameCoefficients {
    pub fn along_u(&self, k: usize) -> ComplexField {
        self.0.map(|f| f.along_u[k])
    }

    pub fn along_v(&self, k: usize) -> ComplexField {
        self.0.map(|f| f.along_v[k])
    }

    /// Real tangent directions for integration.
    pub fn real_tangents(&self) -> (Field<Vec3>, Field<Vec3>) {
        (self.0.map(|f| f.real().0), self.0.map(|f| f.real().1))
    }

    /// Largest imaginary component over all nodes.
    pub fn imaginary_residue(&self) -> f64 {
        self.0.values().iter().map(|f| f.real().2).fold(0.0, f64::max)
    }
}

pub fn solve_linear_null(conn: &ConnectionCoefficients, g: &ComplexField, k: &RealField) -> Result<NullFrameCoefficients> {
    let data = NullData::new(g, k)?;
    let domain = *g.domain();
    data.map_nodes(|idx, jet| solve_node(conn, jet).map_err(|det| Error::SingularSystem { node: domain.node(idx), det }))
        .map(NullFrameCoefficients)
}

pub fn coeffs_negative_closed(mu: Mu, g: &ComplexField, k: &RealField) -> Result<NullFrameCoefficients> {
    mu.require_axial()?;
    let data = NullData::new(g, k)?;
    let domain = *g.domain();
    data.map_nodes(|idx, jet| closed_node_at(mu, jet, domain.node(idx))).map(NullFrameCoefficients)
}

/// `i (g_u conj(g_v) - conj(g_u) g_v)`; admissible where positive.
pub fn admissible_negative(g: &ComplexField) -> Result<RealField> {
    let gu = g.differentiate(DiffOp::Du)?;
    let gv = g.differentiate(DiffOp::Dv)?;
    gu.zip_map(&gv, |a, b| (Complex64::i() * (a * b.conj() - a.conj() * b)).re)
}

pub fn forms_s3_negative(g: &ComplexField, k: &RealField) -> Result<Field<NullFundamentalForms>> {
    let data = NullData::new(g, k)?;
    let domain = *g.domain();
    data.map_nodes(|idx, jet| {
        forms_s3_node(jet).map_err(|e| match e {
            Error::ForbiddenCurvature { k, forbidden, .. } => Error::ForbiddenCurvature {
                node: domain.node(idx),
                k,
                forbidden,
            },
            other => other,
        })
    })
}

/// `log((1 + sqrt(-K))^4 / -K)`.
pub fn log_term_u(k: f64) -> f64 {
    let root = (-k).sqrt();
    4.0 * (1.0 + root).ln() - (-k).ln()
}

/// `log((-1 + sqrt(-K))^4 / -K)`.
pub fn log_term_v(k: f64) -> f64 {
    let root = (-k).sqrt();
    4.0 * (root - 1.0).abs().ln() - (-k).ln()
}

/// Right-hand sides of the two curvature equations at a node.
pub fn sphere_equation_rhs(jet: &NullJet, g_uv: C64) -> (C64, C64) {
    let g = jet.g;
    let gb = g.conj();
    let b = 1.0 + g.norm_sqr();
    let (gu, gv) = (jet.g_u, jet.g_v);
    let (gbu, gbv) = (gu.conj(), gv.conj());
    let gbuv = g_uv.conj();
    let den = gbu * gv - gu * gbv;
    let first = (gbu * g_uv - gu * gbuv + (g * gbv - gb * gv) * 2.0 * gu.norm_sqr() / b) * 4.0 / den;
    let second = -(gbv * g_uv - gv * gbuv + (g * gbu - gb * gu) * 2.0 * gv.norm_sqr() / b) * 4.0 / den;
    (first, second)
}

/// Residuals of both lines of the curvature equation on the round sphere.
#[derive(Debug, Clone)]
pub struct NullIntegrability {
    pub along_u: ResidualReport,
    pub along_v: ResidualReport,
}

impl NullIntegrability {
    pub fn interior_max(&self) -> f64 {
        self.along_u.interior_max().max(self.along_v.interior_max())
    }
}

pub fn integrability_residual_neg(g: &ComplexField, k: &RealField) -> Result<NullIntegrability> {
    let data = NullData::new(g, k)?;
    let admissible: Vec<bool> = (0..data.len())
        .map(|idx| data.valid[idx] && data.jet(idx).margin().abs() > crate::positive::ADMISSIBLE_MARGIN && (data.k.at(idx) + 1.0).abs() > FORBIDDEN_TOLERANCE)
        .collect();
    let lhs_u = k.map(log_term_u).partial(0);
    let lhs_v = k.map(log_term_v).partial(1);
    let g_uv = data.g_uv();
    let ru = data.map_nodes(|idx, jet| Ok((C64::new(lhs_u.at(idx), 0.0) - sphere_equation_rhs(jet, g_uv.at(idx)).0).norm()))?;
    let rv = data.map_nodes(|idx, jet| Ok((C64::new(lhs_v.at(idx), 0.0) - sphere_equation_rhs(jet, g_uv.at(idx)).1).norm()))?;
    Ok(NullIntegrability {
        along_u: ResidualReport::new("curvature equation along u", ru, admissible.clone()),
        along_v: ResidualReport::new("curvature equation along v", rv, admissible),
    })
}

/// `|g_uv - 2 g_u g_v conj(g) / (1 + |g|^2)|`.
pub fn lorentz_harmonic_residual(g: &ComplexField) -> Result<ResidualReport> {
    let gu = g.differentiate(DiffOp::Du)?;
    let gv = g.differentiate(DiffOp::Dv)?;
    let guv = gu.partial(1);
    let values = (0..g.domain().len())
        .map(|idx| {
            let gval = g.at(idx);
            (guv.at(idx) - gu.at(idx) * gv.at(idx) * gval.conj() * 2.0 / (1.0 + gval.norm_sqr())).norm()
        })
        .collect();
    Ok(ResidualReport::new(
        "Lorentz harmonic defect",
        RealField::from_values(*g.domain(), values)?,
        g.chart_mask(),
    ))
}

/// Residual of the second-order equation in null coordinates, with the
/// coefficients evaluated at `sqrt(K) = i sqrt(-K)`.
pub fn second_order_residual(mu: Mu, g: &ComplexField, k: &RealField) -> Result<ResidualReport> {
    mu.require_axial()?;
    let data = NullData::new(g, k)?;
    let domain = *g.domain();
    let g_uv = data.g_uv();
    let residual = data.map_nodes(|idx, jet| {
        check_forbidden(mu, jet, domain.node(idx))?;
        let coeffs = pde::coefficients(mu.mu1, mu.mu3, jet.g, jet.k, C64::new(0.0, (-jet.k).sqrt()));
        let ku = C64::new(data.k_u.at(idx), 0.0);
        let kv = C64::new(data.k_v.at(idx), 0.0);
        let rhs = pde::rhs(&coeffs, jet.g_u, jet.g_u.conj(), jet.g_v, jet.g_v.conj(), ku, kv);
        Ok((g_uv.at(idx) - rhs).norm())
    })?;
    Ok(ResidualReport::new("second-order Gauss map equation (null)", residual, data.valid.clone()))
}

/// Codazzi-type vector `nabla_u(W_v) + nabla_v(W_u)` with
/// `W = (1/sqrt(-K)) nabla N`, and its parallelism defect against the normal.
#[derive(Debug, Clone)]
pub struct NullCommutatorResidual {
    pub v: Field<Vec3>,
    pub parallel_defect: ComplexField,
    pub valid: Vec<bool>,
}

impl NullCommutatorResidual {
    pub fn report(&self) -> ResidualReport {
        ResidualReport::new("normal parallelism defect (null)", self.parallel_defect.map(|v| v.norm()), self.valid.clone())
    }
}

pub fn commutator_residual(conn: &ConnectionCoefficients, g: &ComplexField, k: &RealField, frame: &NullFrameCoefficients) -> Result<NullCommutatorResidual> {
    let data = NullData::new(g, k)?;
    if frame.0.domain() != g.domain() {
        return Err(Error::DomainMismatch);
    }
    let (tu, tv) = frame.real_tangents();
    let covariant = |x: &Vec3, y: &Vec3| conn.covariant(&crate::complexify(x), &crate::complexify(y)).map(|c| c.re);
    let wu = data.map_nodes(|idx, jet| {
        let n = jet.normal();
        Ok((jet.normal_u() + covariant(&tu.at(idx), &n)) / (-jet.k).sqrt())
    })?;
    let wv = data.map_nodes(|idx, jet| {
        let n = jet.normal();
        Ok((jet.normal_v() + covariant(&tv.at(idx), &n)) / (-jet.k).sqrt())
    })?;
    let wv_u = wv.partial(0);
    let wu_v = wu.partial(1);
    let v = data.map_nodes(|idx, _| Ok(wv_u.at(idx) + covariant(&tu.at(idx), &wv.at(idx)) + wu_v.at(idx) + covariant(&tv.at(idx), &wu.at(idx))))?;
    let parallel = data.map_nodes(|idx, jet| Ok(parallel_defect(jet.g, &v.at(idx))))?;
    Ok(NullCommutatorResidual {
        v,
        parallel_defect: parallel,
        valid: data.valid,
    })
}

/// `A_u - a_v + [a, A]`, the flatness defect of the null frame.
pub fn maurer_cartan_residual(c: &StructureConstants, frame: &NullFrameCoefficients) -> Field<Vec3> {
    let (tu, tv) = frame.real_tangents();
    let tv_u = tv.partial(0);
    let tu_v = tu.partial(1);
    let cvec = c.as_vector();
    let d = *tu.domain();
    Field::from_values(
        d,
        (0..d.len())
            .map(|idx| tv_u.at(idx) - tu_v.at(idx) + crate::lie::algebra_cross(&tu.at(idx), &tv.at(idx)).component_mul(&cvec))
            .collect(),
    )
    .expect("same domain")
}
