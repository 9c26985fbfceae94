//! Algebraic data of a three-dimensional unimodular Lie group with a
//! left-invariant metric diagonalized by an orthonormal basis {E1, E2, E3}.
//!
//! The bracket is `[E2,E3] = c1 E1`, `[E3,E1] = c2 E2`, `[E1,E2] = c3 E3`, and
//! the Levi-Civita connection of the basis is encoded by the three half-sums
//! `mu_i`.

use nalgebra::Vector3;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::CVec3;

/// Structure constants `(c1, c2, c3)` of the bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Connection parameters `(mu1, mu2, mu3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mu {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
}

impl StructureConstants {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Self {
        Self { c1, c2, c3 }
    }

    pub fn mu(&self) -> Mu {
        let Self { c1, c2, c3 } = *self;
        Mu {
            mu1: (-c1 + c2 + c3) / 2.0,
            mu2: (c1 - c2 + c3) / 2.0,
            mu3: (c1 + c2 - c3) / 2.0,
        }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.c1, self.c2, self.c3)
    }
}

impl Mu {
    pub fn new(mu1: f64, mu2: f64, mu3: f64) -> Self {
        Self { mu1, mu2, mu3 }
    }

    pub fn structure_constants(&self) -> StructureConstants {
        let Self { mu1, mu2, mu3 } = *self;
        StructureConstants {
            c1: mu2 + mu3,
            c2: mu1 + mu3,
            c3: mu1 + mu2,
        }
    }

    pub fn christoffel(&self) -> ConnectionCoefficients {
        ConnectionCoefficients::new(*self)
    }

    /// Closed forms for the frame and the PDE coefficients need `mu1 = mu2`.
    pub fn require_axial(&self) -> Result<()> {
        if self.mu1 == self.mu2 {
            Ok(())
        } else {
            Err(Error::MuMismatch { mu1: self.mu1, mu2: self.mu2 })
        }
    }

    pub fn is_flat(&self) -> bool {
        self.mu1 == 0.0 && self.mu2 == 0.0 && self.mu3 == 0.0
    }
}

/// Table `gamma[i][j][k]` with `nabla_{E_i} E_j = sum_k gamma[i][j][k] E_k`
/// (0-based indices).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionCoefficients {
    mu: Mu,
    gamma: [[[f64; 3]; 3]; 3],
}

impl ConnectionCoefficients {
    pub fn new(mu: Mu) -> Self {
        let mut gamma = [[[0.0; 3]; 3]; 3];
        gamma[0][1][2] = mu.mu1;
        gamma[0][2][1] = -mu.mu1;
        gamma[1][0][2] = -mu.mu2;
        gamma[1][2][0] = mu.mu2;
        gamma[2][0][1] = mu.mu3;
        gamma[2][1][0] = -mu.mu3;
        Self { mu, gamma }
    }

    pub fn mu(&self) -> Mu {
        self.mu
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma[i][j][k]
    }

    pub fn table(&self) -> &[[[f64; 3]; 3]; 3] {
        &self.gamma
    }

    /// Components of `nabla_X Y` for left-invariant `X = sum x_i E_i`,
    /// `Y = sum y_j E_j` with complex coefficients.
    pub fn covariant(&self, x: &CVec3, y: &CVec3) -> CVec3 {
        let mut out = CVec3::zeros();
        for (i, row) in self.gamma.iter().enumerate() {
            for (j, col) in row.iter().enumerate() {
                for (k, &coef) in col.iter().enumerate() {
                    if coef != 0.0 {
                        out[k] += x[i] * y[j] * coef;
                    }
                }
            }
        }
        out
    }

    /// Matrix `M` with `(M y)_k = sum_{i,j} y_i n_j gamma[i][j][k]`, i.e. the
    /// components of `nabla_Y N` contributed by the connection.
    pub fn along_normal(&self, n: &Vector3<f64>) -> nalgebra::Matrix3<f64> {
        let mut m = nalgebra::Matrix3::zeros();
        for (i, row) in self.gamma.iter().enumerate() {
            for (j, col) in row.iter().enumerate() {
                for (k, &coef) in col.iter().enumerate() {
                    m[(k, i)] += n[j] * coef;
                }
            }
        }
        m
    }
}

/// Named simply connected unimodular groups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupPreset {
    R3,
    S3,
    Berger { tau: f64 },
    Psl2 { tau: f64 },
    Nil3 { tau: f64 },
    Sol3,
}

impl GroupPreset {
    /// Builds a preset by name; `tau` is required (and must be positive) for
    /// `berger`, `psl2` and `nil3`, ignored otherwise.
    pub fn from_name(name: &str, tau: Option<f64>) -> Result<Self> {
        let need_tau = |preset: &'static str| -> Result<f64> {
            let tau = tau.ok_or(Error::InvalidTau { preset, tau: f64::NAN })?;
            if tau > 0.0 && tau.is_finite() {
                Ok(tau)
            } else {
                Err(Error::InvalidTau { preset, tau })
            }
        };
        match name.to_ascii_lowercase().as_str() {
            "r3" => Ok(Self::R3),
            "s3" => Ok(Self::S3),
            "berger" => Ok(Self::Berger { tau: need_tau("berger")? }),
            "psl2" => Ok(Self::Psl2 { tau: need_tau("psl2")? }),
            "nil3" => Ok(Self::Nil3 { tau: need_tau("nil3")? }),
            "sol3" => Ok(Self::Sol3),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn mu(&self) -> Mu {
        match *self {
            Self::R3 => Mu::new(0.0, 0.0, 0.0),
            Self::S3 => Mu::new(1.0, 1.0, 1.0),
            Self::Berger { tau } => Mu::new(tau, tau, (1.0 - 2.0 * tau * tau) / (2.0 * tau)),
            Self::Psl2 { tau } => Mu::new(-tau, -tau, (1.0 + 2.0 * tau * tau) / (2.0 * tau)),
            Self::Nil3 { tau } => Mu::new(tau, tau, -tau),
            Self::Sol3 => Mu::new(-1.0, 1.0, 0.0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::R3 => "r3",
            Self::S3 => "s3",
            Self::Berger { .. } => "berger",
            Self::Psl2 { .. } => "psl2",
            Self::Nil3 { .. } => "nil3",
            Self::Sol3 => "sol3",
        }
    }
}

impl fmt::Display for GroupPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Berger { tau } | Self::Psl2 { tau } | Self::Nil3 { tau } => {
                write!(f, "{}({tau})", self.name())
            }
            _ => f.write_str(self.name()),
        }
    }
}

impl FromStr for GroupPreset {
    type Err = Error;

    /// Accepts `s3`, `sol3`, `r3`, or `name(tau)` such as `nil3(1)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once('(') {
            Some((name, rest)) => {
                let tau = rest
                    .trim_end_matches(')')
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::UnknownPreset(s.to_string()))?;
                Self::from_name(name, Some(tau))
            }
            None => Self::from_name(s, None),
        }
    }
}

/// Right-handed cross product in the orthonormal basis.
pub fn algebra_cross<T>(w: &Vector3<T>, v: &Vector3<T>) -> Vector3<T>
where
    T: nalgebra::Scalar + Copy + std::ops::Mul<Output = T> + std::ops::Sub<Output = T>,
{
    Vector3::new(w[1] * v[2] - w[2] * v[1], w[2] * v[0] - w[0] * v[2], w[0] * v[1] - w[1] * v[0])
}

/// Lie bracket `[w, v] = diag(c1, c2, c3) (w x v)`.
pub fn algebra_bracket(c: &StructureConstants, w: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
    algebra_cross(w, v).component_mul(&c.as_vector())
}
