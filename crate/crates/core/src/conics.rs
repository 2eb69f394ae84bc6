//! Confocal conic families, elliptic coordinates, projective duality and the
//! Ivory scaling map.
//!
//! A family with semi-axes squared (a1², a2²) consists of the conics
//! x1²/(a1²+λ) + x2²/(a2²+λ) = 1: ellipses for λ > -a2², hyperbolas for
//! -a1² < λ < -a2². All members share the foci (±√(a1²-a2²), 0).

use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3};

/// Relative tolerance below which a member counts as degenerate: downstream
/// formulas divide by a_i² + λ, so members that close to -a1² or -a2² are
/// rejected at construction.
pub const DEGENERACY_REL_TOL: f64 = 1e-9;

/// Relative axis gap below which a family counts as a circle family.
const CIRCLE_REL_TOL: f64 = 1e-12;

/// A point of the Euclidean plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn dist(&self, other: Point2) -> f64 {
        (self.x1 - other.x1).hypot(self.x2 - other.x2)
    }

    pub fn norm(&self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    pub(crate) fn homogeneous(&self) -> Vector3<f64> {
        Vector3::new(self.x1, self.x2, 1.0)
    }
}

/// Ellipse or hyperbola, by the sign of λ + a2².
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConicKind {
    Ellipse,
    Hyperbola,
}

/// The confocal family x1²/(a1²+λ) + x2²/(a2²+λ) = 1 with foci at
/// (±√(a1²-a2²), 0). Equal axes give the concentric-circle degenerate
/// family, accepted only by operations that never reference foci.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfocalFamily {
    a1_sq: f64,
    a2_sq: f64,
}

impl ConfocalFamily {
    pub fn new(a1_sq: f64, a2_sq: f64) -> Result<Self> {
        if !(a1_sq.is_finite() && a2_sq.is_finite()) || !(a1_sq >= a2_sq && a2_sq > 0.0) {
            return Err(Error::InvalidFamily { a1_sq, a2_sq });
        }
        Ok(Self { a1_sq, a2_sq })
    }

    pub fn a1_sq(&self) -> f64 {
        self.a1_sq
    }

    pub fn a2_sq(&self) -> f64 {
        self.a2_sq
    }

    /// Squared focal distance a1² - a2².
    pub fn focal_sq(&self) -> f64 {
        self.a1_sq - self.a2_sq
    }

    /// The foci (-c, 0) and (c, 0).
    pub fn foci(&self) -> (Point2, Point2) {
        let c = self.focal_sq().max(0.0).sqrt();
        (Point2::new(-c, 0.0), Point2::new(c, 0.0))
    }

    /// Whether the family is a concentric-circle family (no usable foci).
    pub fn is_circle(&self) -> bool {
        self.a1_sq - self.a2_sq <= CIRCLE_REL_TOL * self.a1_sq
    }

    /// Length scale used for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.a1_sq.sqrt()
    }

    /// Select the member with parameter λ, rejecting degenerate values.
    pub fn conic(&self, lambda: f64) -> Result<ConfocalConic> {
        if !lambda.is_finite() {
            return Err(Error::NonFinite);
        }
        let tol = DEGENERACY_REL_TOL * self.a1_sq;
        if lambda + self.a1_sq < tol || (lambda + self.a2_sq).abs() < tol {
            return Err(Error::DegenerateLambda { lambda });
        }
        Ok(ConfocalConic {
            family: *self,
            lambda,
        })
    }
}

/// One member of a confocal family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfocalConic {
    family: ConfocalFamily,
    lambda: f64,
}

impl ConfocalConic {
    pub fn family(&self) -> ConfocalFamily {
        self.family
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kind(&self) -> ConicKind {
        if self.lambda > -self.family.a2_sq {
            ConicKind::Ellipse
        } else {
            ConicKind::Hyperbola
        }
    }

    pub fn is_ellipse(&self) -> bool {
        self.kind() == ConicKind::Ellipse
    }

    /// Semi-axes squared (a1² + λ, a2² + λ). The second is negative for a
    /// hyperbola.
    pub fn semi_axes_sq(&self) -> (f64, f64) {
        (
            self.family.a1_sq + self.lambda,
            self.family.a2_sq + self.lambda,
        )
    }

    /// Support function h(φ) = √((a1²+λ)cos²φ + (a2²+λ)sin²φ) of an ellipse
    /// member: the distance from the center to the tangent line with outward
    /// normal direction φ.
    pub fn support(&self, phi: f64) -> Result<f64> {
        let (e1, e2) = self.semi_axes_sq();
        if e2 <= 0.0 {
            return Err(Error::NotAnEllipse { lambda: self.lambda });
        }
        let (s, c) = phi.sin_cos();
        Ok((e1 * c * c + e2 * s * s).sqrt())
    }
}

/// Signed membership residual x1²/(a1²+λ) + x2²/(a2²+λ) - 1.
/// Zero exactly when the point lies on the conic.
pub fn evaluate_confocal(conic: &ConfocalConic, p: Point2) -> f64 {
    let (e1, e2) = conic.semi_axes_sq();
    p.x1 * p.x1 / e1 + p.x2 * p.x2 / e2 - 1.0
}

/// The parameters (λ1, λ2) of the unique confocal hyperbola and ellipse
/// through a point: λ1 ∈ [-a1², -a2²], λ2 ∈ [-a2², ∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticCoords {
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Elliptic coordinates of a point for a family with distinct foci.
///
/// The two values are the roots of the quadratic in λ obtained from the
/// family equation; the larger-magnitude root is computed first and its
/// companion recovered from the product, which avoids cancellation near the
/// axes.
pub fn elliptic_coords(family: &ConfocalFamily, p: Point2) -> Result<EllipticCoords> {
    if family.is_circle() {
        return Err(Error::CircleFamily);
    }
    if !p.is_finite() {
        return Err(Error::NonFinite);
    }
    let (a1, a2) = (family.a1_sq, family.a2_sq);
    let r = p.x1 * p.x1 + p.x2 * p.x2;
    // λ² + bλ + c = 0
    let b = a1 + a2 - r;
    let c = a1 * a2 - a2 * p.x1 * p.x1 - a1 * p.x2 * p.x2;
    let disc = (b * b - 4.0 * c).max(0.0);
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let (mut lo, mut hi) = if q == 0.0 {
        (-b, 0.0)
    } else {
        let (r1, r2) = (q, c / q);
        if r1 <= r2 {
            (r1, r2)
        } else {
            (r2, r1)
        }
    };
    // clamp roundoff at the range boundaries
    let tol = 1e-12 * a1;
    if lo < -a1 - tol || lo > -a2 + tol || hi < -a2 - tol {
        return Err(Error::CoordsOutOfRange {
            lambda1: lo,
            lambda2: hi,
        });
    }
    lo = lo.clamp(-a1, -a2);
    hi = hi.max(-a2);
    Ok(EllipticCoords {
        lambda1: lo,
        lambda2: hi,
    })
}

/// Cartesian point from elliptic coordinates, with quadrant chosen by the
/// signs pair (the coordinates themselves determine the point only up to the
/// axial symmetries).
pub fn from_elliptic(
    family: &ConfocalFamily,
    coords: EllipticCoords,
    signs: (f64, f64),
) -> Result<Point2> {
    if family.is_circle() {
        return Err(Error::CircleFamily);
    }
    let (a1, a2) = (family.a1_sq, family.a2_sq);
    let (l1, l2) = (coords.lambda1, coords.lambda2);
    let tol = 1e-12 * a1;
    if l1 < -a1 - tol || l1 > -a2 + tol || l2 < -a2 - tol || l1 > l2 {
        return Err(Error::CoordsOutOfRange {
            lambda1: l1,
            lambda2: l2,
        });
    }
    let x1_sq = (a1 + l1).max(0.0) * (a1 + l2) / (a1 - a2);
    let x2_sq = (a2 + l1).min(0.0) * (a2 + l2).max(0.0) / (a2 - a1);
    Ok(Point2::new(
        signs.0.signum() * x1_sq.sqrt(),
        signs.1.signum() * x2_sq.sqrt(),
    ))
}

/// The diagonal scaling Diag(√((a1²+μ)/(a1²+λ)), √((a2²+μ)/(a2²+λ))) that
/// maps the member λ onto the member μ while preserving the complementary
/// elliptic coordinate. Both members must be ellipses or both hyperbolas.
pub fn ivory_map(family: &ConfocalFamily, lambda: f64, mu: f64, p: Point2) -> Result<Point2> {
    if family.is_circle() {
        return Err(Error::CircleFamily);
    }
    // validate both members against degeneracy
    family.conic(lambda)?;
    family.conic(mu)?;
    let (a1, a2) = (family.a1_sq, family.a2_sq);
    let r1 = (a1 + mu) / (a1 + lambda);
    let r2 = (a2 + mu) / (a2 + lambda);
    if r1 <= 0.0 || r2 <= 0.0 {
        return Err(Error::SignMismatch { lambda, mu });
    }
    Ok(Point2::new(p.x1 * r1.sqrt(), p.x2 * r2.sqrt()))
}

/// A conic as a homogeneous symmetric 3×3 matrix, canonicalized to unit
/// Frobenius norm with the first nonzero entry positive so that up-to-scale
/// comparisons are plain matrix comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralConic {
    m: Matrix3<f64>,
}

impl GeneralConic {
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let norm = m.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::SingularMatrix);
        }
        if (m - m.transpose()).norm() > 1e-9 * norm {
            return Err(Error::NotSymmetric);
        }
        let mut s = (m + m.transpose()) * (0.5 / norm);
        s /= s.norm();
        // fix the overall sign by the first entry above noise
        for idx in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)] {
            if s[idx].abs() > 1e-14 {
                if s[idx] < 0.0 {
                    s = -s;
                }
                break;
            }
        }
        Ok(Self { m: s })
    }

    pub fn from_diagonal(d1: f64, d2: f64, d3: f64) -> Result<Self> {
        Self::from_matrix(Matrix3::from_diagonal(&Vector3::new(d1, d2, d3)))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    /// Homogeneous value pᵀ M p at a Euclidean point.
    pub fn eval_point(&self, p: Point2) -> f64 {
        let v = p.homogeneous();
        v.dot(&(self.m * v))
    }

    /// The six independent entries (m00, m01, m11, m02, m12, m22), used as a
    /// linear coordinate vector on the space of conics.
    pub fn coefficients(&self) -> [f64; 6] {
        [
            self.m[(0, 0)],
            self.m[(0, 1)],
            self.m[(1, 1)],
            self.m[(0, 2)],
            self.m[(1, 2)],
            self.m[(2, 2)],
        ]
    }

    /// Frobenius distance between canonicalized representatives; zero for
    /// projectively equal conics.
    pub fn distance(&self, other: &GeneralConic) -> f64 {
        (self.m - other.m).norm().min((self.m + other.m).norm())
    }
}

/// Homogeneous matrix Diag(1/(a1²+λ), 1/(a2²+λ), -1) of a family member,
/// canonicalized.
pub fn to_general(conic: &ConfocalConic) -> GeneralConic {
    let (e1, e2) = conic.semi_axes_sq();
    GeneralConic::from_diagonal(1.0 / e1, 1.0 / e2, -1.0)
        .expect("family member matrix is symmetric and nonzero")
}

fn adjugate(m: &Matrix3<f64>) -> Matrix3<f64> {
    let c = |i: usize, j: usize| {
        let (r0, r1) = match i {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let (c0, c1) = match j {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let minor = m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)];
        if (i + j).is_multiple_of(2) {
            minor
        } else {
            -minor
        }
    };
    // adjugate = transposed cofactor matrix
    Matrix3::new(
        c(0, 0),
        c(1, 0),
        c(2, 0),
        c(0, 1),
        c(1, 1),
        c(2, 1),
        c(0, 2),
        c(1, 2),
        c(2, 2),
    )
}

/// Projective dual of a nondegenerate conic: the adjugate matrix, up to
/// scale. Involutive on the canonicalized representatives.
pub fn dual_conic(c: &GeneralConic) -> Result<GeneralConic> {
    if c.m.determinant().abs() < 1e-13 {
        return Err(Error::SingularMatrix);
    }
    GeneralConic::from_matrix(adjugate(&c.m))
}

/// Rank-2 defect of a stack of dual conics: third singular value over the
/// first. For members of one confocal family it vanishes because the duals
/// form a pencil.
pub fn dual_pencil_gap(family: &ConfocalFamily, lambdas: &[f64; 3]) -> Result<f64> {
    let mut rows = nalgebra::DMatrix::zeros(3, 6);
    for (r, l) in lambdas.iter().enumerate() {
        let d = dual_conic(&to_general(&family.conic(*l)?))?;
        for (c, v) in d.coefficients().iter().enumerate() {
            rows[(r, c)] = *v;
        }
    }
    let sv = rows.svd(false, false).singular_values;
    Ok(sv[2] / sv[0])
}
