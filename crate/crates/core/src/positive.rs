//! Positive extrinsic curvature in a conformal parameter `z` of the second
//! fundamental form.
//!
//! The frame coefficients `a = phi^{-1} phi_z` solve the linear system
//! `(I - (i/sqrt K) [N x] M) a = (i/sqrt K) N x N_z`, where
//! `(M a)_k = sum_{i,j} a_i N_j gamma[i][j][k]` is the connection part of
//! `nabla_{phi_z} N`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{normal_derivative, stereo_unproject, ComplexField, DiffOp, Field, GridKind, RealField};
use crate::lie::{ConnectionCoefficients, Mu, StructureConstants};
use crate::pde;
use crate::report::ResidualReport;
use crate::{complexify, cross_matrix, CMat3, CVec3, Vec3, C64};

/// Threshold below which the frame system is treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Strict admissibility threshold for `|g_zbar|^2 - |g_z|^2`.
pub const ADMISSIBLE_MARGIN: f64 = 1e-10;

/// Gauss map and curvature data at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalJet {
    pub g: C64,
    pub g_z: C64,
    pub g_zbar: C64,
    pub k: f64,
}

impl ConformalJet {
    /// Derivative of `conj(g)` in `z`, i.e. `conj(g_zbar)`.
    pub fn gbar_z(&self) -> C64 {
        self.g_zbar.conj()
    }

    pub fn gbar_zbar(&self) -> C64 {
        self.g_z.conj()
    }

    pub fn normal(&self) -> Vec3 {
        stereo_unproject(self.g)
    }

    pub fn normal_z(&self) -> CVec3 {
        normal_derivative(self.g, self.g_z, self.gbar_z())
    }

    pub fn margin(&self) -> f64 {
        self.g_zbar.norm_sqr() - self.g_z.norm_sqr()
    }
}

/// Matrix and right-hand side of the frame system at a node.
pub fn frame_system(conn: &ConnectionCoefficients, jet: &ConformalJet) -> (CMat3, CVec3) {
    let n = jet.normal();
    let scale = Complex64::i() / jet.k.sqrt();
    let cross = cross_matrix(&n);
    let m = cross * conn.along_normal(&n);
    let matrix = CMat3::identity() - m.map(|v| scale * v);
    let rhs = cross.map(|v| C64::new(v, 0.0)) * jet.normal_z() * scale;
    (matrix, rhs)
}

/// Solves the frame system; `None` when it is singular.
pub fn solve_node(conn: &ConnectionCoefficients, jet: &ConformalJet) -> Option<CVec3> {
    let (matrix, rhs) = frame_system(conn, jet);
    if matrix.determinant().norm() < SINGULAR_DET {
        return None;
    }
    matrix.lu().solve(&rhs)
}

/// Closed-form determinant of the frame system.
pub fn discriminant(mu: Mu, jet: &ConformalJet) -> C64 {
    let s = Scalars::new(jet);
    let Mu { mu1, mu2, mu3 } = mu;
    let sk = jet.k.sqrt();
    let real = s.b * s.b * jet.k - s.ct * s.ct * mu2 * mu3 + mu1 * (s.c_sq * mu3 - (s.b - 2.0).powi(2) * mu2);
    let imag = sk * (s.a.norm_sqr() * mu1 + (s.a + 2.0).norm_sqr() * mu2 + 4.0 * s.r * mu3);
    C64::new(real, -imag) / (s.b * s.b * jet.k)
}

/// Auxiliary quantities `A = g^2 - 1`, `B = 1 + |g|^2`, `C = g - conj g`,
/// `Ct = g + conj g`.
#[derive(Debug, Clone, Copy)]
struct Scalars {
    g: C64,
    gb: C64,
    r: f64,
    a: C64,
    b: f64,
    c: C64,
    /// `C^2`, which is real since `C` is imaginary.
    c_sq: f64,
    ct: f64,
}

impl Scalars {
    fn new(jet: &ConformalJet) -> Self {
        let g = jet.g;
        let gb = g.conj();
        let c = g - gb;
        Self {
            g,
            gb,
            r: g.norm_sqr(),
            a: g * g - 1.0,
            b: 1.0 + g.norm_sqr(),
            c,
            c_sq: (c * c).re,
            ct: 2.0 * g.re,
        }
    }
}

/// Closed form of the frame for `mu1 = mu2`.
pub fn closed_unimodular_node(mu: Mu, jet: &ConformalJet) -> Result<CVec3> {
    mu.require_axial()?;
    let i = Complex64::i();
    let Mu { mu1, mu2, mu3 } = mu;
    let s = Scalars::new(jet);
    let (g, gb, a, b, c) = (s.g, s.gb, s.a, s.b, s.c);
    let ab = a.conj();
    let sk = jet.k.sqrt();
    let (gz, gbz) = (jet.g_z, jet.gbar_z());
    let den = discriminant(mu, jet) * (s.b * s.b * jet.k) * b;
    let l = C64::new(mu1 + mu2, 2.0 * sk);

    let a1 = gbz * (a * b * sk - i * ((a + 2.0) * (b - 2.0) * mu2 + g * c * 2.0 * mu3))
        - gz * (ab * b * sk - i * ((ab + 2.0) * (b - 2.0) * mu2 - gb * c * 2.0 * mu3));
    let a2 = gbz * (-a * (b - 2.0) * mu1 - i * b * sk * (a + 2.0) - g * s.ct * 2.0 * mu3)
        - gz * (ab * (b - 2.0) * mu1 + i * b * sk * (ab + 2.0) + gb * s.ct * 2.0 * mu3);
    let a3 = i * ((g * (gz - g * g * gbz) - gb * (gbz - gb * gb * gz)) * (mu1 - mu2) + l * b * (g * gbz - gb * gz));
    Ok(CVec3::new(a1 / den, a2 / den, a3 / den))
}

/// Closed form of the frame on the round sphere.
pub fn closed_s3_node(jet: &ConformalJet) -> CVec3 {
    let i = Complex64::i();
    let g = jet.g;
    let gb = g.conj();
    let b = 1.0 + g.norm_sqr();
    let (gz, gbz) = (jet.g_z, jet.gbar_z());
    let den = C64::new(jet.k.sqrt(), -1.0) * b * b;
    let one = C64::new(1.0, 0.0);
    CVec3::new(
        ((one - gb * gb) * gz + (g * g - 1.0) * gbz) / den,
        -i * ((one + gb * gb) * gz + (one + g * g) * gbz) / den,
        (gb * gz - g * gbz) * 2.0 / den,
    )
}

/// Coefficients of `I = E dz^2 + 2F |dz|^2 + conj(E) dzbar^2` and
/// `II = ii_coeff |dz|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalForms {
    pub e: C64,
    pub f: f64,
    /// `|E|^2 - F^2`.
    pub d: f64,
    /// `2 rho` with `rho = sqrt(-K D)`.
    pub ii_coeff: f64,
}

impl FundamentalForms {
    pub fn from_e_f(e: C64, f: f64, k: f64) -> Self {
        let d = e.norm_sqr() - f * f;
        Self {
            e,
            f,
            d,
            ii_coeff: 2.0 * (-k * d).max(0.0).sqrt(),
        }
    }

    /// Forms induced by frame coefficients: `E = sum a_i^2`, `F = sum |a_i|^2`.
    pub fn from_frame(a: &CVec3, k: f64) -> Self {
        let e = a.iter().map(|v| v * v).sum();
        let f = a.iter().map(|v| v.norm_sqr()).sum();
        Self::from_e_f(e, f, k)
    }

    /// `-(ii_coeff / 2)^2 / D`.
    pub fn recovered_curvature(&self) -> f64 {
        -(self.ii_coeff / 2.0).powi(2) / self.d
    }
}

/// Fundamental forms on the round sphere in closed form.
pub fn forms_s3_node(jet: &ConformalJet) -> FundamentalForms {
    let g = jet.g;
    let b = 1.0 + g.norm_sqr();
    let sk = jet.k.sqrt();
    let e = -jet.g_z * jet.gbar_z() * 4.0 / (C64::new(sk, -1.0).powi(2) * b * b);
    let f = 2.0 * (jet.g_z.norm_sqr() + jet.gbar_z().norm_sqr()) / (b * b * (1.0 + jet.k));
    FundamentalForms::from_e_f(e, f, jet.k)
}

/// `rho = 2 sqrt(K) (|g_zbar|^2 - |g_z|^2) / ((1 + |g|^2)^2 (1 + K))` on the
/// round sphere, half of the `II` coefficient.
pub fn rho_s3_node(jet: &ConformalJet) -> f64 {
    let b = 1.0 + jet.g.norm_sqr();
    2.0 * jet.k.sqrt() * jet.margin() / (b * b * (1.0 + jet.k))
}

/// Fundamental forms in closed form for `mu1 = mu2`.
pub fn forms_mu12_node(mu: Mu, jet: &ConformalJet) -> Result<FundamentalForms> {
    mu.require_axial()?;
    let i = Complex64::i();
    let m1 = mu.mu1;
    let m3 = mu.mu3;
    let s = Scalars::new(jet);
    let (g, a, b, r) = (s.g, s.a, s.b, s.r);
    let k = jet.k;
    let sk = k.sqrt();
    let (gz, gbz, gzb, gbzb) = (jet.g_z, jet.gbar_z(), jet.g_zbar, jet.gbar_zbar());

    let r1 = a * a * m1 - (a + 2.0) * (a + 2.0) * m1 + g * g * 4.0 * m3;
    let r2 = a.norm_sqr() * m1 + (a + 2.0).norm_sqr() * m1 + 4.0 * r * m3;
    let r3 = 2.0 * b.powi(4) * k
        + a.norm_sqr().powi(2) * m1 * m1
        + (a + 2.0).norm_sqr().powi(2) * m1 * m1
        + 8.0 * r * (b - 2.0).powi(2) * m1 * m3
        + 16.0 * r * r * m3 * m3
        - 2.0 * s.c_sq * s.ct * s.ct * m1 * m1;
    let r4 = b * b * k + 4.0 * r * m1 * m3 + (b - 2.0).powi(2) * m1 * m1;
    let q = C64::new(b * b * k - 4.0 * r * m1 * m3 - (b - 2.0).powi(2) * m1 * m1, -sk * r2) * b;

    let t = i * 2.0 * b * b * sk + r2;
    let e = (gbz * r1 + gz * t) * (gz * r1.conj() + gbz * t) / (q * q);
    let f = (gbzb * (gbz * r1 * r2 + gz * r3) + gzb * (gz * r2 * r1.conj() + gbz * r3)) / q.norm_sqr();
    let inner = (gz.norm_sqr() - gbz.norm_sqr()) * r4 + i * sk * (gz * gzb * r1.conj() - gbz * gbzb * r1);
    let d = -(inner * inner) * 4.0 * b.powi(4) / q.norm_sqr().powi(2);
    Ok(FundamentalForms {
        e,
        f: f.re,
        d: d.re,
        ii_coeff: 2.0 * (-k * d.re).max(0.0).sqrt(),
    })
}

/// Gauss map, curvature and their first derivatives on a conformal grid.
#[derive(Debug, Clone)]
pub struct ConformalData {
    pub g: ComplexField,
    pub g_z: ComplexField,
    pub g_zbar: ComplexField,
    pub k: RealField,
    pub k_z: ComplexField,
    /// Chart-valid nodes (away from the stereographic pole).
    pub valid: Vec<bool>,
}

impl ConformalData {
    pub fn new(g: &ComplexField, k: &RealField) -> Result<Self> {
        if g.domain() != k.domain() {
            return Err(Error::DomainMismatch);
        }
        if g.domain().kind != GridKind::Conformal {
            return Err(Error::KindMismatch {
                op: "d_z",
                kind: g.domain().kind.label(),
            });
        }
        if let Some(idx) = k.values().iter().position(|&v| !(v > 0.0)) {
            return Err(Error::CurvatureSign {
                node: k.domain().node(idx),
                k: k.at(idx),
            });
        }
        Ok(Self {
            g: g.clone(),
            g_z: g.differentiate(DiffOp::Dz)?,
            g_zbar: g.differentiate(DiffOp::Dzbar)?,
            k: k.clone(),
            k_z: k.differentiate(DiffOp::Dz)?,
            valid: g.chart_mask(),
        })
    }

    pub fn jet(&self, idx: usize) -> ConformalJet {
        ConformalJet {
            g: self.g.at(idx),
            g_z: self.g_z.at(idx),
            g_zbar: self.g_zbar.at(idx),
            k: self.k.at(idx),
        }
    }

    pub fn len(&self) -> usize {
        self.g.domain().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `g_zzbar` by composing the two first-order stencils.
    pub fn g_zzbar(&self) -> ComplexField {
        self.g_z.differentiate(DiffOp::Dzbar).expect("conformal grid")
    }

    /// Chart-valid nodes with `|g_zbar|^2 - |g_z|^2 > ADMISSIBLE_MARGIN`.
    pub fn admissible(&self) -> Vec<bool> {
        (0..self.len())
            .map(|idx| self.valid[idx] && self.jet(idx).margin() > ADMISSIBLE_MARGIN)
            .collect()
    }

    fn map_nodes<T: Copy>(&self, f: impl Fn(usize, &ConformalJet) -> Result<T>) -> Result<Field<T>> {
        let values = (0..self.len()).map(|idx| f(idx, &self.jet(idx))).collect::<Result<Vec<T>>>()?;
        Field::from_values(*self.g.domain(), values)
    }
}

/// `(a1, a2, a3)` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameCoefficients(pub Field<CVec3>);

impl FrameCoefficients {
    pub fn component(&self, k: usize) -> ComplexField {
        self.0.map(|a| a[k])
    }

    pub fn field(&self) -> &Field<CVec3> {
        &self.0
    }

    /// Real tangent directions `phi^{-1} phi_x = 2 Re a` and
    /// `phi^{-1} phi_y = -2 Im a`.
    pub fn real_tangents(&self) -> (Field<Vec3>, Field<Vec3>) {
        (self.0.map(|a| a.map(|v| 2.0 * v.re)), self.0.map(|a| a.map(|v| -2.0 * v.im)))
    }
}

/// Generic solve of the frame system at every node.
pub fn solve_linear_positive(conn: &ConnectionCoefficients, g: &ComplexField, k: &RealField) -> Result<FrameCoefficients> {
    let data = ConformalData::new(g, k)?;
    let domain = *g.domain();
    data.map_nodes(|idx, jet| {
        let (matrix, _) = frame_system(conn, jet);
        let det = matrix.determinant().norm();
        solve_node(conn, jet).ok_or(Error::SingularSystem { node: domain.node(idx), det })
    })
    .map(FrameCoefficients)
}

pub fn coeffs_unimodular_closed(mu: Mu, g: &ComplexField, k: &RealField) -> Result<FrameCoefficients> {
    mu.require_axial()?;
    let data = ConformalData::new(g, k)?;
    data.map_nodes(|_, jet| closed_unimodular_node(mu, jet)).map(FrameCoefficients)
}

pub fn coeffs_s3(g: &ComplexField, k: &RealField) -> Result<FrameCoefficients> {
    let data = ConformalData::new(g, k)?;
    data.map_nodes(|_, jet| Ok(closed_s3_node(jet))).map(FrameCoefficients)
}

pub fn forms_s3(g: &ComplexField, k: &RealField) -> Result<Field<FundamentalForms>> {
    let data = ConformalData::new(g, k)?;
    data.map_nodes(|_, jet| Ok(forms_s3_node(jet)))
}

pub fn forms_mu12(mu: Mu, g: &ComplexField, k: &RealField) -> Result<Field<FundamentalForms>> {
    mu.require_axial()?;
    let data = ConformalData::new(g, k)?;
    data.map_nodes(|_, jet| forms_mu12_node(mu, jet))
}

/// `|g_zbar|^2 - |g_z|^2`; admissible where positive.
pub fn admissible_positive(g: &ComplexField) -> Result<RealField> {
    let gz = g.differentiate(DiffOp::Dz)?;
    let gzb = g.differentiate(DiffOp::Dzbar)?;
    gzb.zip_map(&gz, |b, a| b.norm_sqr() - a.norm_sqr())
}

/// Residuals of the curvature equation on the round sphere.
#[derive(Debug, Clone)]
pub struct SphereIntegrability {
    /// `|LHS - RHS|` of the equation linking `K_z` to second derivatives of `g`.
    pub equation: ResidualReport,
    /// `|2 (log q)_z - (sqrt K - i) K_z / (K (sqrt K + i))|` with
    /// `q = (1 - K - 2 i sqrt K) / sqrt K`.
    pub log_identity: ResidualReport,
}

/// `log((1 - K - 2 i sqrt K) / sqrt K)`; the argument stays in the open
/// lower half-plane so the principal branch is continuous.
pub fn sphere_log_term(k: f64) -> C64 {
    let sk = k.sqrt();
    (C64::new(1.0 - k, -2.0 * sk) / sk).ln()
}

/// `(sqrt K - i) / (K (sqrt K + i))`, the derivative of the log term times 2.
pub fn sphere_log_factor(k: f64) -> C64 {
    let sk = k.sqrt();
    C64::new(sk, -1.0) / (C64::new(sk, 1.0) * k)
}

/// Right-hand side of the sphere curvature equation at a node.
pub fn sphere_equation_rhs(jet: &ConformalJet, g_zzbar: C64) -> C64 {
    let g = jet.g;
    let gb = g.conj();
    let b = 1.0 + g.norm_sqr();
    let (gz, gbz, gzb, gbzb) = (jet.g_z, jet.gbar_z(), jet.g_zbar, jet.gbar_zbar());
    let gbzzb = g_zzbar.conj();
    let bracket = gbz * g_zzbar - gz * gbzzb + gz * gbz * 2.0 * (g * gbzb - gb * gzb) / b;
    bracket * 2.0 / jet.margin()
}

pub fn integrability_residual_s3(g: &ComplexField, k: &RealField) -> Result<SphereIntegrability> {
    let data = ConformalData::new(g, k)?;
    let admissible = data.admissible();
    let log_term = k.map(sphere_log_term);
    let lhs = log_term.differentiate(DiffOp::Dz)?;
    let g_zzbar = data.g_zzbar();
    let equation = data.map_nodes(|idx, jet| Ok((lhs.at(idx) - sphere_equation_rhs(jet, g_zzbar.at(idx))).norm()))?;
    let identity = data.map_nodes(|idx, jet| Ok((lhs.at(idx) * 2.0 - sphere_log_factor(jet.k) * data.k_z.at(idx)).norm()))?;
    Ok(SphereIntegrability {
        equation: ResidualReport::new("sphere curvature equation", equation, admissible.clone()),
        log_identity: ResidualReport::new("log-derivative identity", identity, data.valid.clone()),
    })
}

/// `|g_zzbar - G . (products of first derivatives)|` for `mu1 = mu2`.
pub fn second_order_residual(mu: Mu, g: &ComplexField, k: &RealField) -> Result<ResidualReport> {
    mu.require_axial()?;
    let data = ConformalData::new(g, k)?;
    let g_zzbar = data.g_zzbar();
    let k_zbar = data.k_z.conj();
    let residual = data.map_nodes(|idx, jet| {
        let coeffs = pde::coefficients(mu.mu1, mu.mu3, jet.g, jet.k, C64::new(jet.k.sqrt(), 0.0));
        let rhs = pde::rhs(&coeffs, jet.g_z, jet.gbar_z(), jet.g_zbar, jet.gbar_zbar(), data.k_z.at(idx), k_zbar.at(idx));
        Ok((g_zzbar.at(idx) - rhs).norm())
    })?;
    Ok(ResidualReport::new("second-order Gauss map equation", residual, data.valid.clone()))
}

/// `|g_zzbar - 2 g_z g_zbar conj(g) / (1 + |g|^2)|`.
pub fn harmonic_residual(g: &ComplexField) -> Result<ResidualReport> {
    let gz = g.differentiate(DiffOp::Dz)?;
    let gzb = g.differentiate(DiffOp::Dzbar)?;
    let gzzb = gz.differentiate(DiffOp::Dzbar)?;
    let values = (0..g.domain().len())
        .map(|idx| {
            let gv = g.at(idx);
            (gzzb.at(idx) - gz.at(idx) * gzb.at(idx) * gv.conj() * 2.0 / (1.0 + gv.norm_sqr())).norm()
        })
        .collect();
    Ok(ResidualReport::new(
        "harmonic map defect",
        RealField::from_values(*g.domain(), values)?,
        g.chart_mask(),
    ))
}

/// Codazzi-type vector and its parallelism defect against the normal.
#[derive(Debug, Clone)]
pub struct CommutatorResidual {
    pub v: Field<CVec3>,
    /// `(|g|^2 - 1)(w1 + i w2) - 2 g w3` with `w = Re V`.
    pub parallel_defect: ComplexField,
    pub valid: Vec<bool>,
}

impl CommutatorResidual {
    pub fn report(&self) -> ResidualReport {
        ResidualReport::new("normal parallelism defect", self.parallel_defect.map(|v| v.norm()), self.valid.clone())
    }
}

/// Defect of `w` being parallel to the normal with Gauss map `g`.
pub fn parallel_defect(g: C64, w: &Vec3) -> C64 {
    C64::new(w[0], w[1]) * (g.norm_sqr() - 1.0) - g * 2.0 * w[2]
}

/// `V = nabla_{phi_z}((1/sqrt K) nabla_{phi_zbar} N)` left-translated to the
/// identity, with `N` parallel to `Re V` exactly when the data integrate.
pub fn commutator_residual(conn: &ConnectionCoefficients, g: &ComplexField, k: &RealField, frame: &FrameCoefficients) -> Result<CommutatorResidual> {
    let data = ConformalData::new(g, k)?;
    if frame.0.domain() != g.domain() {
        return Err(Error::DomainMismatch);
    }
    let inner = data.map_nodes(|idx, jet| {
        let n = complexify(&jet.normal());
        let n_zbar = normal_derivative(jet.g, jet.g_zbar, jet.gbar_zbar());
        let abar = frame.0.at(idx).map(|v| v.conj());
        Ok((n_zbar + conn.covariant(&abar, &n)) * C64::new(1.0 / jet.k.sqrt(), 0.0))
    })?;
    let inner_z: Vec<ComplexField> = (0..3).map(|c| inner.map(|w| w[c]).differentiate(DiffOp::Dz)).collect::<Result<_>>()?;
    let v = data.map_nodes(|idx, _| {
        let w = inner.at(idx);
        let dz = CVec3::new(inner_z[0].at(idx), inner_z[1].at(idx), inner_z[2].at(idx));
        Ok(dz + conn.covariant(&frame.0.at(idx), &w))
    })?;
    let parallel = data.map_nodes(|idx, jet| Ok(parallel_defect(jet.g, &v.at(idx).map(|c| c.re))))?;
    Ok(CommutatorResidual {
        v,
        parallel_defect: parallel,
        valid: data.valid,
    })
}

/// `conj(a)_z - a_zbar + [a, conj(a)]`, the flatness defect of `phi^{-1} d phi`.
pub fn maurer_cartan_residual(c: &StructureConstants, frame: &FrameCoefficients) -> Result<Field<CVec3>> {
    let comps: Vec<ComplexField> = (0..3).map(|k| frame.component(k)).collect();
    let dz_bar_conj: Vec<ComplexField> = comps.iter().map(|f| f.conj().differentiate(DiffOp::Dz)).collect::<Result<_>>()?;
    let dzbar: Vec<ComplexField> = comps.iter().map(|f| f.differentiate(DiffOp::Dzbar)).collect::<Result<_>>()?;
    let cvec = complexify(&c.as_vector());
    let d = *frame.0.domain();
    let values = (0..d.len())
        .map(|idx| {
            let a = frame.0.at(idx);
            let ab = a.map(|v| v.conj());
            let bracket = crate::lie::algebra_cross(&a, &ab).component_mul(&cvec);
            CVec3::new(
                dz_bar_conj[0].at(idx) - dzbar[0].at(idx),
                dz_bar_conj[1].at(idx) - dzbar[1].at(idx),
                dz_bar_conj[2].at(idx) - dzbar[2].at(idx),
            ) + bracket
        })
        .collect();
    Field::from_values(d, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::GroupPreset;

    fn zbar_jet() -> ConformalJet {
        ConformalJet {
            g: C64::new(0.0, 0.0),
            g_z: C64::new(0.0, 0.0),
            g_zbar: C64::new(1.0, 0.0),
            k: 1.0,
        }
    }

    #[test]
    fn sphere_origin_frame() {
        let want = CVec3::new(C64::new(-0.5, -0.5), C64::new(0.5, -0.5), C64::new(0.0, 0.0));
        let jet = zbar_jet();
        let conn = GroupPreset::S3.mu().christoffel();
        assert!((solve_node(&conn, &jet).unwrap() - want).norm() < 1e-14);
        assert!((closed_s3_node(&jet) - want).norm() < 1e-14);
        assert!((closed_unimodular_node(GroupPreset::S3.mu(), &jet).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn sphere_origin_forms() {
        let jet = zbar_jet();
        let f = forms_s3_node(&jet);
        assert!(f.e.norm() < 1e-15);
        assert!((f.f - 1.0).abs() < 1e-15);
        assert!((f.d + 1.0).abs() < 1e-15);
        assert!((f.ii_coeff - 2.0).abs() < 1e-15);
        assert!((rho_s3_node(&jet) - 1.0).abs() < 1e-15);
        let m = forms_mu12_node(GroupPreset::S3.mu(), &jet).unwrap();
        assert!(m.e.norm() < 1e-15);
        assert!((m.f - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_gauss_map_gives_zero_frame() {
        let jet = ConformalJet {
            g: C64::new(0.3, 0.2),
            g_z: C64::new(0.0, 0.0),
            g_zbar: C64::new(0.0, 0.0),
            k: 2.0,
        };
        let conn = GroupPreset::S3.mu().christoffel();
        assert_eq!(solve_node(&conn, &jet).unwrap().norm(), 0.0);
        assert_eq!(closed_s3_node(&jet).norm(), 0.0);
    }

    #[test]
    fn closed_form_rejects_unequal_mu() {
        let jet = zbar_jet();
        assert!(matches!(closed_unimodular_node(GroupPreset::Sol3.mu(), &jet), Err(Error::MuMismatch { .. })));
    }

    #[test]
    fn flat_space_frame_is_normal_cross_derivative() {
        let jet = ConformalJet {
            g: C64::new(0.2, -0.5),
            g_z: C64::new(0.0, 0.0),
            g_zbar: C64::new(0.7, 0.1),
            k: 0.8,
        };
        let conn = GroupPreset::R3.mu().christoffel();
        let a = solve_node(&conn, &jet).unwrap();
        let n = complexify(&jet.normal());
        let want = crate::lie::algebra_cross(&n, &jet.normal_z()) * (Complex64::i() / jet.k.sqrt());
        assert!((a - want).norm() < 1e-14);
    }

    #[test]
    fn margin_examples() {
        let d = crate::fields::GridDomain::centered((0.0, 0.0), 0.5, 0.1, GridKind::Conformal).unwrap();
        let z = ComplexField::from_fn(d, C64::new);
        let m = admissible_positive(&z.conj()).unwrap();
        assert!(m.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        let m = admissible_positive(&z).unwrap();
        assert!(m.values().iter().all(|v| (v + 1.0).abs() < 1e-12));
        let mixed = z.conj().zip_map(&z, |a, b| a + b * 0.5).unwrap();
        let m = admissible_positive(&mixed).unwrap();
        assert!(m.values().iter().all(|v| (v - 0.75).abs() < 1e-12));
    }
}
