//! Built-in data sets: the anti-holomorphic Gauss map `g = conj(z)`, the
//! pseudosphere in proper null coordinates, and two reference spheres in S3.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector4;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{ComplexField, Field, GridDomain, GridKind};
use crate::negative::NullJet;
use crate::su2::{Ambient, SurfaceSample};
use crate::{Vec3, C64};

/// Catalog entries addressable by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// `g = conj(z)` on a conformal grid.
    Gzbar,
    /// Pseudosphere Gauss map on a null grid inside `u < v`.
    Pseudosphere,
    /// Geodesic sphere of radius `r` about the identity of S3.
    DistanceSphere { r: f64 },
    /// Totally geodesic great 2-sphere.
    GreatSphere,
}

impl Builtin {
    pub fn name(&self) -> String {
        match self {
            Self::Gzbar => "gzbar".into(),
            Self::Pseudosphere => "pseudosphere".into(),
            Self::DistanceSphere { r } => format!("distance-sphere({r})"),
            Self::GreatSphere => "great-sphere".into(),
        }
    }

    pub fn grid_kind(&self) -> GridKind {
        match self {
            Self::Gzbar => GridKind::Conformal,
            Self::Pseudosphere => GridKind::Null,
            Self::DistanceSphere { .. } | Self::GreatSphere => GridKind::Parametric,
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "gzbar" => return Ok(Self::Gzbar),
            "pseudosphere" | "s5-pseudosphere" => return Ok(Self::Pseudosphere),
            "great-sphere" => return Ok(Self::GreatSphere),
            _ => {}
        }
        let r = s
            .strip_prefix("distance-sphere(")
            .and_then(|rest| rest.strip_suffix(')'))
            .ok_or_else(|| Error::UnknownScenario(s.clone()))?
            .parse::<f64>()
            .map_err(|_| Error::UnknownScenario(s.clone()))?;
        if !(r > 0.0 && r < std::f64::consts::PI) {
            return Err(Error::DomainError(format!("distance-sphere radius {r} outside (0, pi)")));
        }
        Ok(Self::DistanceSphere { r })
    }
}

/// `g = conj(z)`.
pub fn gzbar(domain: GridDomain) -> Result<ComplexField> {
    if domain.kind != GridKind::Conformal {
        return Err(Error::KindMismatch {
            op: "gzbar",
            kind: domain.kind.label(),
        });
    }
    Ok(ComplexField::from_fn(domain, |x, y| C64::new(x, -y)))
}

/// The pseudosphere as printed, in null coordinates with `s = (v - u)/2`
/// and `t = (v + u)/2`.
pub mod pseudosphere {
    use super::*;

    fn st(u: f64, v: f64) -> (f64, f64) {
        ((v - u) / 2.0, (v + u) / 2.0)
    }

    /// Position in R3 (tractrix surface of revolution).
    pub fn position(u: f64, v: f64) -> Vec3 {
        let (s, t) = st(u, v);
        let sech = 1.0 / s.cosh();
        Vec3::new(sech * t.cos(), sech * t.sin(), s - s.tanh())
    }

    /// Unit normal compatible with the null coordinates, printed form.
    pub fn normal(u: f64, v: f64) -> Vec3 {
        let (s, t) = st(u, v);
        let root = ((u + v).exp() * (u.exp() - v.exp()).powi(2)).sqrt();
        let lead = -(-(u + v)).exp() / 2.0 / s.cosh();
        root * Vec3::new(lead * t.cos(), lead * t.sin(), 2.0 / ((2.0 * u).exp() - (2.0 * v).exp()))
    }

    /// Gauss map, printed form.
    pub fn gauss_map(u: f64, v: f64) -> C64 {
        let root = ((u + v).exp() * (u.exp() - v.exp()).powi(2)).sqrt();
        let phase = (C64::new(-1.0, 1.0) * ((u + v) / 2.0)).exp();
        phase * (u.exp() - v.exp()) * root / ((2.0 * v).exp() - (2.0 * u).exp() + 2.0 * root)
    }

    /// `(g, g_u, g_v)` from `g = -tanh(s/2) e^{it}`.
    pub fn jet(u: f64, v: f64) -> (C64, C64, C64) {
        let (s, t) = st(u, v);
        let phase = Complex64::from_polar(1.0, t);
        let g = -(s / 2.0).tanh() * phase;
        let g_s = -0.5 / (s / 2.0).cosh().powi(2) * phase;
        let g_t = Complex64::i() * g;
        (g, (g_t - g_s) * 0.5, (g_s + g_t) * 0.5)
    }

    /// Jet at `(u, v)` carrying curvature `k`.
    pub fn null_jet(u: f64, v: f64, k: f64) -> NullJet {
        let (g, g_u, g_v) = jet(u, v);
        NullJet { g, g_u, g_v, k }
    }

    /// The printed frame coefficients `(a, A)` of the curvature `-2` surface.
    pub fn printed_frame(u: f64, v: f64) -> (Vec3, Vec3) {
        let r2 = std::f64::consts::SQRT_2;
        let e = ((u + v) / 2.0).exp();
        let p = u.exp() + v.exp();
        let m = u.exp() - v.exp();
        let (c, sn) = (((u + v) / 2.0).cos(), ((u + v) / 2.0).sin());
        let th2 = ((u - v) / 2.0).tanh().powi(2);
        let a = Vec3::new(
            (1.0 + r2) * e * (m * c + p * sn) / (p * p),
            -(1.0 + r2) * e * (p * c - m * sn) / (p * p),
            (1.0 + r2) / 2.0 * th2,
        );
        let big = Vec3::new(
            (r2 - 1.0) * e * (-m * c + p * sn) / (p * p),
            -(r2 - 1.0) * e * (p * c + m * sn) / (p * p),
            -(r2 - 1.0) / 2.0 * th2,
        );
        (a, big)
    }

    /// Rejects grids that reach the singular line `u = v` or cross it.
    pub fn check_domain(domain: &GridDomain) -> Result<()> {
        if domain.kind != GridKind::Null {
            return Err(Error::KindMismatch {
                op: "pseudosphere",
                kind: domain.kind.label(),
            });
        }
        // The largest u - v over the rectangle sits at (u_max, v_min).
        let (u_max, _) = domain.upper();
        let v_min = domain.origin.1;
        if u_max - v_min >= -1e-12 {
            return Err(Error::DomainError(format!("null grid reaches u >= v (u_max = {u_max}, v_min = {v_min})")));
        }
        Ok(())
    }

    pub fn gauss_map_field(domain: GridDomain) -> Result<ComplexField> {
        check_domain(&domain)?;
        Ok(ComplexField::from_fn(domain, gauss_map))
    }

    pub fn normal_field(domain: GridDomain) -> Result<Field<Vec3>> {
        check_domain(&domain)?;
        Ok(Field::from_fn(domain, normal))
    }

    pub fn position_sample(domain: GridDomain) -> Result<SurfaceSample> {
        check_domain(&domain)?;
        let points = domain
            .nodes()
            .map(|(i, j)| {
                let (u, v) = domain.coords(i, j);
                let p = position(u, v);
                Vector4::new(p.x, p.y, p.z, 0.0)
            })
            .collect();
        SurfaceSample::new(domain, Ambient::Euclidean, points)
    }
}

/// Geodesic sphere of radius `r` about the identity, parametrized by
/// colatitude and longitude on a `Parametric` grid. Its shape operator is
/// `cot(r)` times the identity.
pub fn distance_sphere(domain: GridDomain, r: f64) -> Result<SurfaceSample> {
    let points = domain
        .nodes()
        .map(|(i, j)| {
            let (theta, phi) = domain.coords(i, j);
            let dir = Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
            let p = dir * r.sin();
            Vector4::new(r.cos(), p.x, p.y, p.z)
        })
        .collect();
    SurfaceSample::new(domain, Ambient::Sphere, points)
}

/// The great sphere `x4 = 0` through the identity.
pub fn great_sphere(domain: GridDomain) -> Result<SurfaceSample> {
    distance_sphere(domain, FRAC_PI_2)
}
