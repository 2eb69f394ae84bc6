//! Projective maps on points, lines and conics; reduction of a generic
//! nested ellipse pair to a confocal pair through the common self-polar
//! frame; and the closure test that upgrades confocal closure to the full
//! Poncelet porism.

use crate::canonical::rotation_number;
use crate::conics::{dual_conic, to_general, ConfocalFamily, GeneralConic, Point2};
use crate::error::{Error, Result};
use crate::linespace::OrientedLine;
use crate::numeric::{quadratic_roots, rational_approx};
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use std::f64::consts::TAU;

/// An invertible projective transformation of the plane, acting on points by
/// homogeneous multiplication and on conics by M ↦ T⁻ᵀ M T⁻¹.
#[derive(Debug, Clone)]
pub struct ProjectiveMap {
    t: Matrix3<f64>,
    t_inv: Matrix3<f64>,
}

impl ProjectiveMap {
    pub fn new(t: Matrix3<f64>) -> Result<Self> {
        let norm = t.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::SingularMatrix);
        }
        let t = t / norm;
        if t.determinant().abs() < 1e-12 {
            return Err(Error::SingularMatrix);
        }
        let t_inv = t.try_inverse().ok_or(Error::SingularMatrix)?;
        Ok(Self { t, t_inv })
    }

    pub fn identity() -> Self {
        Self {
            t: Matrix3::identity(),
            t_inv: Matrix3::identity(),
        }
    }

    /// Build from row-major entries.
    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::new(Matrix3::new(
            rows[0][0], rows[0][1], rows[0][2], rows[1][0], rows[1][1], rows[1][2], rows[2][0],
            rows[2][1], rows[2][2],
        ))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.t
    }

    /// Ratio of extreme singular values.
    pub fn condition_number(&self) -> f64 {
        let sv = self.t.svd(false, false).singular_values;
        sv.max() / sv.min()
    }

    pub fn inverse(&self) -> Self {
        Self {
            t: self.t_inv,
            t_inv: self.t,
        }
    }

    /// Image of a Euclidean point; errors when the image is ideal.
    pub fn apply_point(&self, p: Point2) -> Result<Point2> {
        let v = self.t * p.homogeneous();
        if v[2].abs() <= 1e-12 * v.norm() {
            return Err(Error::AtInfinity);
        }
        Ok(Point2::new(v[0] / v[2], v[1] / v[2]))
    }

    /// Image of a line (orientation is carried over from the computed
    /// representative); errors when the image is the line at infinity.
    pub fn apply_line(&self, l: &OrientedLine) -> Result<OrientedLine> {
        let lv = self.t_inv.transpose() * l.homogeneous();
        let n = lv[0].hypot(lv[1]);
        if n <= 1e-12 * lv.norm() {
            return Err(Error::AtInfinity);
        }
        Ok(OrientedLine::new(lv[1].atan2(lv[0]), -lv[2] / n))
    }

    /// Image of a conic.
    pub fn apply_conic(&self, c: &GeneralConic) -> GeneralConic {
        let m = self.t_inv.transpose() * c.matrix() * self.t_inv;
        GeneralConic::from_matrix(m).expect("conjugated conic stays symmetric and nonzero")
    }
}

/// Center, axis directions and semi-axes of a real ellipse given as a
/// general conic.
#[derive(Debug, Clone, Copy)]
pub struct EllipseGeometry {
    pub center: Point2,
    pub axis_dirs: [Vector2<f64>; 2],
    pub semi_axes: [f64; 2],
}

impl EllipseGeometry {
    /// Parametrized boundary point.
    pub fn point_at(&self, t: f64) -> Point2 {
        let v = self.center.homogeneous().xy()
            + self.axis_dirs[0] * (self.semi_axes[0] * t.cos())
            + self.axis_dirs[1] * (self.semi_axes[1] * t.sin());
        Point2::new(v[0], v[1])
    }
}

/// Decompose a general conic as a real ellipse; errors when the conic is
/// not one.
pub fn ellipse_geometry(c: &GeneralConic) -> Result<EllipseGeometry> {
    let m = c.matrix();
    let q = Matrix2::new(m[(0, 0)], m[(0, 1)], m[(0, 1)], m[(1, 1)]);
    let b = Vector2::new(m[(0, 2)], m[(1, 2)]);
    let det = q.determinant();
    if det <= 1e-14 {
        return Err(Error::NotNested);
    }
    let center = -q.try_inverse().ok_or(Error::SingularMatrix)? * b;
    let k = m[(2, 2)] + b.dot(&center);
    // (x-c)ᵀ Q (x-c) = -k with Q definite
    let eig = nalgebra::SymmetricEigen::new(q);
    let (q1, q2) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    let r1 = -k / q1;
    let r2 = -k / q2;
    if r1 <= 0.0 || r2 <= 0.0 {
        return Err(Error::NotNested);
    }
    Ok(EllipseGeometry {
        center: Point2::new(center[0], center[1]),
        axis_dirs: [eig.eigenvectors.column(0).into(), eig.eigenvectors.column(1).into()],
        semi_axes: [r1.sqrt(), r2.sqrt()],
    })
}

/// Check that `inner` lies strictly inside `outer` by sampling the inner
/// boundary against the sign of the outer form at the inner center.
fn assert_nested(inner: &GeneralConic, outer: &GeneralConic) -> Result<()> {
    let geom = ellipse_geometry(inner)?;
    ellipse_geometry(outer)?;
    let ref_sign = outer.eval_point(geom.center).signum();
    for j in 0..64 {
        let p = geom.point_at(TAU * j as f64 / 64.0);
        let v = outer.eval_point(p);
        if v.signum() != ref_sign || v.abs() < 1e-14 {
            return Err(Error::NotNested);
        }
    }
    Ok(())
}

/// Result of reducing a nested pair to confocal form: the inner conic maps
/// to the family member 0, the outer to `lambda_outer`.
#[derive(Debug, Clone)]
pub struct NormalizedPair {
    pub map: ProjectiveMap,
    pub family: ConfocalFamily,
    pub lambda_inner: f64,
    pub lambda_outer: f64,
    /// Max canonical matrix distance between the mapped conics and the
    /// family members they should equal.
    pub conic_distance: f64,
}

/// Relative eigenvalue separation below which two pencil eigenvalues count
/// as repeated.
const EIGEN_CLUSTER_REL: f64 = 1e-8;

/// Reduce a generic nested ellipse pair to a confocal pair: solve the
/// generalized eigenproblem of the pencil det(M_inner − t·M_outer) = 0,
/// diagonalize both conics in the common self-polar frame, then fix the
/// remaining axis scaling so both become members of one confocal family.
/// A repeated eigenvalue is accepted only with a full two-dimensional
/// eigenspace (concentric-circle pairs); complex or defective spectra are
/// reported as non-generic, never guessed.
pub fn normalize_pair(inner: &GeneralConic, outer: &GeneralConic) -> Result<NormalizedPair> {
    assert_nested(inner, outer)?;
    let m_in = *inner.matrix();
    let m_out = *outer.matrix();
    let b = m_out.try_inverse().ok_or(Error::SingularMatrix)? * m_in;

    let eigs = b.complex_eigenvalues();
    let scale = eigs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for e in eigs.iter() {
        if e.im.abs() > 1e-9 * scale {
            return Err(Error::NonGenericPencil {
                description: format!(
                    "complex pencil spectrum ({:.6e}±{:.6e}i)",
                    e.re,
                    e.im.abs()
                ),
            });
        }
    }
    let mut ts: Vec<f64> = eigs.iter().map(|c| c.re).collect();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let sep01 = (ts[1] - ts[0]).abs();
    let sep12 = (ts[2] - ts[1]).abs();
    let tol = EIGEN_CLUSTER_REL * scale;
    let u = if sep01 > tol && sep12 > tol {
        let cols: Vec<Vector3<f64>> = ts.iter().map(|t| null_vector(&(b - Matrix3::identity() * *t))).collect::<Result<_>>()?;
        Matrix3::from_columns(&cols)
    } else if sep01 <= tol && sep12 <= tol {
        return Err(Error::NonGenericPencil {
            description: "all pencil eigenvalues coincide (proportional conics)".into(),
        });
    } else {
        // one repeated eigenvalue: demand a full 2-D eigenspace and build an
        // M_outer-conjugate basis of it
        let (t_rep, t_simple) = if sep01 <= tol {
            (0.5 * (ts[0] + ts[1]), ts[2])
        } else {
            (0.5 * (ts[1] + ts[2]), ts[0])
        };
        let shifted = b - Matrix3::identity() * t_rep;
        let svd = shifted.svd(true, true);
        let sv = svd.singular_values;
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &c| sv[a].partial_cmp(&sv[c]).unwrap());
        if sv[order[1]] > 1e-6 * sv[order[2]].max(scale) {
            return Err(Error::NonGenericPencil {
                description: format!(
                    "defective repeated eigenvalue (second singular value {:.3e})",
                    sv[order[1]]
                ),
            });
        }
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let v1: Vector3<f64> = v_t.row(order[0]).transpose();
        let v2: Vector3<f64> = v_t.row(order[1]).transpose();
        let q11 = (v1.transpose() * m_out * v1)[0];
        if q11.abs() < 1e-12 {
            return Err(Error::NonGenericPencil {
                description: "isotropic direction in repeated eigenspace".into(),
            });
        }
        let w = v2 - v1 * ((v1.transpose() * m_out * v2)[0] / q11);
        let v3 = null_vector(&(b - Matrix3::identity() * t_simple))?;
        Matrix3::from_columns(&[v1, w.normalize(), v3])
    };

    // both forms are diagonal in the eigenbasis
    let d_in = u.transpose() * m_in * u;
    let d_out = u.transpose() * m_out * u;
    let off = |d: &Matrix3<f64>| {
        d[(0, 1)].abs().max(d[(0, 2)].abs()).max(d[(1, 2)].abs()) / d.norm()
    };
    if off(&d_in) > 1e-7 || off(&d_out) > 1e-7 {
        return Err(Error::NonGenericPencil {
            description: "eigenbasis fails to diagonalize the pair".into(),
        });
    }
    let din = [d_in[(0, 0)], d_in[(1, 1)], d_in[(2, 2)]];
    let dout = [d_out[(0, 0)], d_out[(1, 1)], d_out[(2, 2)]];

    // the homogeneous coordinate is the minority-sign direction
    let minority = |d: &[f64; 3]| -> Result<usize> {
        let pos = d.iter().filter(|v| **v > 0.0).count();
        match pos {
            1 => Ok(d.iter().position(|v| *v > 0.0).unwrap()),
            2 => Ok(d.iter().position(|v| *v < 0.0).unwrap()),
            _ => Err(Error::NotNested),
        }
    };
    let idx3 = minority(&dout)?;
    if minority(&din)? != idx3 {
        return Err(Error::NonGenericPencil {
            description: "self-polar vertices classify differently for the two conics".into(),
        });
    }
    let others: Vec<usize> = (0..3).filter(|i| *i != idx3).collect();
    let perm = [others[0], others[1], idx3];

    // semi-axes squared of both conics in the permuted frame
    let axes = |d: &[f64; 3]| -> Result<[f64; 2]> {
        let a0 = -d[perm[2]] / d[perm[0]];
        let a1 = -d[perm[2]] / d[perm[1]];
        if a0 <= 0.0 || a1 <= 0.0 {
            return Err(Error::NotNested);
        }
        Ok([a0, a1])
    };
    let ax_out = axes(&dout)?;
    let ax_in = axes(&din)?;
    let d0 = ax_out[0] - ax_in[0];
    let d1 = ax_out[1] - ax_in[1];
    if d0 <= 0.0 || d1 <= 0.0 {
        return Err(Error::NotNested);
    }
    // residual scaling freedom: make the axis gaps match
    let s = [1.0, (d0 / d1).sqrt()];
    let fam_axes = [ax_in[0] * s[0] * s[0], ax_in[1] * s[1] * s[1]];
    let lambda_outer = d0 * s[0] * s[0];

    // assemble T = (swap?) · scale · permute · U⁻¹
    let mut rows = Matrix3::zeros();
    for (new_row, &src) in perm.iter().enumerate() {
        rows[(new_row, src)] = if new_row < 2 { s[new_row] } else { 1.0 };
    }
    let u_inv = u.try_inverse().ok_or(Error::SingularMatrix)?;
    let mut t_total = rows * u_inv;
    let mut fam = fam_axes;
    if fam[0] < fam[1] {
        fam.swap(0, 1);
        t_total = Matrix3::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0) * t_total;
    }
    let map = ProjectiveMap::new(t_total)?;
    let family = ConfocalFamily::new(fam[0], fam[1])?;

    let image_in = map.apply_conic(inner);
    let image_out = map.apply_conic(outer);
    let target_in = to_general(&family.conic(0.0)?);
    let target_out = to_general(&family.conic(lambda_outer)?);
    let conic_distance = image_in
        .distance(&target_in)
        .max(image_out.distance(&target_out));

    Ok(NormalizedPair {
        map,
        family,
        lambda_inner: 0.0,
        lambda_outer,
        conic_distance,
    })
}

/// Null vector of a rank-2 matrix: the cross product of its two most
/// independent rows.
fn null_vector(m: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let rows = [
        Vector3::new(m[(0, 0)], m[(0, 1)], m[(0, 2)]),
        Vector3::new(m[(1, 0)], m[(1, 1)], m[(1, 2)]),
        Vector3::new(m[(2, 0)], m[(2, 1)], m[(2, 2)]),
    ];
    let mut best = Vector3::zeros();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let c = rows[i].cross(&rows[j]);
        if c.norm() > best.norm() {
            best = c;
        }
    }
    if best.norm() < 1e-13 {
        return Err(Error::SingularMatrix);
    }
    // deterministic sign: largest-magnitude component positive
    let mut idx = 0;
    for i in 1..3 {
        if best[i].abs() > best[idx].abs() {
            idx = i;
        }
    }
    if best[idx] < 0.0 {
        best = -best;
    }
    Ok(best.normalize())
}

/// Detected period of a nested pair plus the measured worst closure defect
/// of chord chains in the original frame.
#[derive(Debug, Clone, Copy)]
pub struct ClosureResult {
    pub n: u32,
    pub k: u32,
    pub max_defect: f64,
}

/// Tolerance for rational detection of the rotation number.
const RATIONAL_TOL: f64 = 1e-9;

/// Number of chord chains run in the original frame.
const CLOSURE_STARTS: usize = 20;

/// Poncelet closure test for a generic nested pair: normalize to confocal
/// form, read the rotation number there, detect a rational value k/n by
/// continued fractions, and — when one is found — run inscribed-
/// circumscribed chord chains in the original frame from scattered starts,
/// recording the worst n-step closure defect.
pub fn closure_test(
    inner: &GeneralConic,
    outer: &GeneralConic,
    n_max: u32,
) -> Result<Option<ClosureResult>> {
    let normalized = normalize_pair(inner, outer)?;
    let c = rotation_number(
        &normalized.family,
        normalized.lambda_inner,
        normalized.lambda_outer,
    )?
    .value;
    let Some((k, n)) = rational_approx(c, n_max, RATIONAL_TOL) else {
        return Ok(None);
    };

    let geom = ellipse_geometry(outer)?;
    let dual_inner = dual_conic(inner)?;
    let mut max_defect = 0.0_f64;
    for s in 0..CLOSURE_STARTS {
        let t0 = TAU * (s as f64 + 0.37) / CLOSURE_STARTS as f64;
        let start = geom.point_at(t0).homogeneous();
        let l0 = tangents_through(&dual_inner, &start)?[0];
        let mut vertex = start;
        let mut line = l0;
        for _ in 0..n {
            vertex = other_intersection(outer.matrix(), &line, &vertex);
            line = other_tangent(&dual_inner, &vertex, &line)?;
        }
        let end = Point2::new(vertex[0] / vertex[2], vertex[1] / vertex[2]);
        let begin = Point2::new(start[0] / start[2], start[1] / start[2]);
        max_defect = max_defect.max(end.dist(begin));
    }
    Ok(Some(ClosureResult { n, k, max_defect }))
}

/// The two tangent lines of a conic (given by its dual) through a point.
fn tangents_through(dual: &GeneralConic, point: &Vector3<f64>) -> Result<[Vector3<f64>; 2]> {
    // two independent lines through the point
    let mut candidates: Vec<Vector3<f64>> = Vec::new();
    for e in [Vector3::x(), Vector3::y(), Vector3::z()] {
        let l = point.cross(&e);
        if l.norm() > 1e-12 * point.norm() {
            candidates.push(l.normalize());
        }
    }
    candidates.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    let (l1, l2) = (candidates[0], candidates[1]);
    let d = dual.matrix();
    let a = (l1.transpose() * d * l1)[0];
    let bq = (l1.transpose() * d * l2)[0];
    let c = (l2.transpose() * d * l2)[0];
    // a α² + 2b αβ + c β² = 0 over the pencil α l1 + β l2
    let (r1, r2) = quadratic_roots(a, 2.0 * bq, c).ok_or(Error::PointInsideCaustic)?;
    Ok([
        (l1 * r1 + l2).normalize(),
        (l1 * r2 + l2).normalize(),
    ])
}

/// Second intersection of a line with a conic, given one intersection.
fn other_intersection(m: &Matrix3<f64>, line: &Vector3<f64>, known: &Vector3<f64>) -> Vector3<f64> {
    // any second point of the line
    let aux = line.cross(known);
    let qa = (known.transpose() * m * aux)[0];
    let qb = (aux.transpose() * m * aux)[0];
    // (known + s·aux)ᵀ M (known + s·aux) = 0 with s = 0 a root
    let s = -2.0 * qa / qb;
    let v = known + aux * s;
    v / v.norm()
}

/// The tangent line from a vertex that is not the incoming one.
fn other_tangent(
    dual: &GeneralConic,
    vertex: &Vector3<f64>,
    incoming: &Vector3<f64>,
) -> Result<Vector3<f64>> {
    let [t1, t2] = tangents_through(dual, vertex)?;
    let align = |l: &Vector3<f64>| {
        
        l.cross(incoming).norm() / (l.norm() * incoming.norm())
    };
    Ok(if align(&t1) > align(&t2) { t1 } else { t2 })
}

/// Convenience: the rotation number of a nested pair in its confocal frame.
pub fn pair_rotation_number(inner: &GeneralConic, outer: &GeneralConic) -> Result<f64> {
    let np = normalize_pair(inner, outer)?;
    Ok(rotation_number(&np.family, np.lambda_inner, np.lambda_outer)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::find_caustic_with_resolution;
    use crate::conics::evaluate_confocal;
    use crate::linespace::tangent_line;
    use crate::numeric::wrap_tau;
    use approx::assert_relative_eq;
    use rand::prelude::*;

    fn fam41() -> ConfocalFamily {
        ConfocalFamily::new(4.0, 1.0).unwrap()
    }

    fn random_map(rng: &mut StdRng, strength: f64) -> ProjectiveMap {
        loop {
            let mut t = Matrix3::identity();
            for i in 0..3 {
                for j in 0..3 {
                    t[(i, j)] += rng.gen_range(-strength..strength);
                }
            }
            if let Ok(map) = ProjectiveMap::new(t) {
                if map.condition_number() < 20.0 {
                    return map;
                }
            }
        }
    }

    /// A random map under which both conics stay real ellipses (and hence
    /// stay nested): the image is an ellipse iff the pulled-back line at
    /// infinity misses the conic.
    fn random_ellipse_preserving_map(
        rng: &mut StdRng,
        strength: f64,
        conics: &[&GeneralConic],
    ) -> ProjectiveMap {
        loop {
            let map = random_map(rng, strength);
            if conics
                .iter()
                .all(|c| ellipse_geometry(&map.apply_conic(c)).is_ok())
            {
                return map;
            }
        }
    }

    #[test]
    fn identity_fixes_everything() {
        let map = ProjectiveMap::identity();
        let p = Point2::new(0.3, -1.2);
        assert_eq!(map.apply_point(p).unwrap(), p);
        let c = to_general(&fam41().conic(0.0).unwrap());
        assert!(map.apply_conic(&c).distance(&c) < 1e-15);
    }

    #[test]
    fn axis_scaling_maps_circle_to_ellipse() {
        let map = ProjectiveMap::new(Matrix3::from_diagonal(&Vector3::new(2.0, 1.0, 1.0))).unwrap();
        let circle = GeneralConic::from_diagonal(1.0, 1.0, -1.0).unwrap();
        let image = map.apply_conic(&circle);
        let expect = GeneralConic::from_diagonal(0.25, 1.0, -1.0).unwrap();
        assert!(image.distance(&expect) < 1e-14);
    }

    #[test]
    fn incidence_is_preserved() {
        let mut rng = StdRng::seed_from_u64(61);
        let conic = to_general(&fam41().conic(0.0).unwrap());
        for _ in 0..20 {
            let map = random_map(&mut rng, 0.4);
            let image = map.apply_conic(&conic);
            let t: f64 = rng.gen_range(0.0..TAU);
            let p = Point2::new(2.0 * t.cos(), t.sin());
            assert!(conic.eval_point(p).abs() < 1e-12);
            let q = map.apply_point(p).unwrap();
            assert!(
                image.eval_point(q).abs() < 1e-10,
                "incidence broken: {}",
                image.eval_point(q)
            );
        }
    }

    #[test]
    fn tangency_is_preserved() {
        let mut rng = StdRng::seed_from_u64(67);
        let f = fam41();
        let caustic = f.conic(-0.75).unwrap();
        let conic = to_general(&caustic);
        for _ in 0..20 {
            let map = random_map(&mut rng, 0.4);
            let image = map.apply_conic(&conic);
            let dual = dual_conic(&image).unwrap();
            let l = tangent_line(&caustic, rng.gen_range(0.0..TAU)).unwrap();
            let lm = map.apply_line(&l).unwrap().homogeneous();
            let v = (lm.transpose() * dual.matrix() * lm)[0].abs();
            // normalized tangency residual
            let scale = (lm.transpose() * lm)[0] * dual.matrix().norm();
            assert!(v / scale < 1e-10, "tangency broken: {}", v / scale);
        }
    }

    #[test]
    fn normalize_already_confocal_pair() {
        let f = fam41();
        let inner = to_general(&f.conic(0.0).unwrap());
        let outer = to_general(&f.conic(5.0).unwrap());
        let np = normalize_pair(&inner, &outer).unwrap();
        assert!(np.conic_distance <= 1e-10, "distance {}", np.conic_distance);
        assert_relative_eq!(np.family.a1_sq(), 4.0, epsilon = 1e-9);
        assert_relative_eq!(np.family.a2_sq(), 1.0, epsilon = 1e-9);
        assert_relative_eq!(np.lambda_inner, 0.0);
        assert_relative_eq!(np.lambda_outer, 5.0, epsilon = 1e-9);
    }

    #[test]
    fn normalize_random_images_roundtrip() {
        let f = fam41();
        let inner = to_general(&f.conic(0.0).unwrap());
        let outer = to_general(&f.conic(5.0).unwrap());
        let mut rng = StdRng::seed_from_u64(71);
        for _ in 0..20 {
            let map = random_ellipse_preserving_map(&mut rng, 0.35, &[&inner, &outer]);
            let im_in = map.apply_conic(&inner);
            let im_out = map.apply_conic(&outer);
            let np = normalize_pair(&im_in, &im_out).unwrap();
            assert!(
                np.conic_distance <= 1e-8,
                "conic distance {}",
                np.conic_distance
            );
            // output really is confocal: axis gaps of the two images agree
            let gi = ellipse_geometry(&np.map.apply_conic(&im_in)).unwrap();
            let go = ellipse_geometry(&np.map.apply_conic(&im_out)).unwrap();
            let gap_i = gi.semi_axes[0].powi(2) - gi.semi_axes[1].powi(2);
            let gap_o = go.semi_axes[0].powi(2) - go.semi_axes[1].powi(2);
            assert!(
                (gap_i.abs() - gap_o.abs()).abs() <= 1e-10 * np.family.a1_sq().max(1.0),
                "axis gaps differ: {gap_i} vs {gap_o}"
            );
        }
    }

    #[test]
    fn normalize_concentric_circles() {
        let inner = GeneralConic::from_diagonal(4.0, 4.0, -1.0).unwrap(); // r = 1/2
        let outer = GeneralConic::from_diagonal(1.0, 1.0, -1.0).unwrap(); // r = 1
        let np = normalize_pair(&inner, &outer).unwrap();
        assert!(np.conic_distance <= 1e-10);
        assert!(np.family.is_circle());
    }

    #[test]
    fn normalize_rejects_non_nested() {
        // two congruent ellipses crossing at right angles
        let a = GeneralConic::from_diagonal(0.25, 1.0, -1.0).unwrap();
        let b = GeneralConic::from_diagonal(1.0, 0.25, -1.0).unwrap();
        assert!(normalize_pair(&a, &b).is_err());
        // same conic twice: proportional pencil
        let g = to_general(&fam41().conic(0.0).unwrap());
        assert!(normalize_pair(&g, &g).is_err());
    }

    #[test]
    fn rotation_number_is_projective_invariant() {
        let f = fam41();
        let inner = to_general(&f.conic(-0.75).unwrap());
        let outer = to_general(&f.conic(0.0).unwrap());
        let base = pair_rotation_number(&inner, &outer).unwrap();
        let mut rng = StdRng::seed_from_u64(73);
        for _ in 0..20 {
            let map = random_ellipse_preserving_map(&mut rng, 0.3, &[&inner, &outer]);
            let c = pair_rotation_number(&map.apply_conic(&inner), &map.apply_conic(&outer)).unwrap();
            assert!((c - base).abs() <= 1e-8, "c moved: {c} vs {base}");
        }
    }

    #[test]
    fn closure_test_on_constructed_pentagon_pair() {
        let f = fam41();
        let lambda = find_caustic_with_resolution(&f, 0.0, 1, 5, 1024).unwrap();
        let inner = to_general(&f.conic(lambda).unwrap());
        let outer = to_general(&f.conic(0.0).unwrap());
        let res = closure_test(&inner, &outer, 40).unwrap().unwrap();
        assert_eq!((res.n, res.k), (5, 1));
        assert!(res.max_defect <= 1e-7, "defect {}", res.max_defect);
    }

    #[test]
    fn closure_test_projective_image() {
        let f = fam41();
        let lambda = find_caustic_with_resolution(&f, 0.0, 1, 5, 1024).unwrap();
        let inner = to_general(&f.conic(lambda).unwrap());
        let outer = to_general(&f.conic(0.0).unwrap());
        let mut rng = StdRng::seed_from_u64(79);
        let map = random_ellipse_preserving_map(&mut rng, 0.3, &[&inner, &outer]);
        let res = closure_test(&map.apply_conic(&inner), &map.apply_conic(&outer), 40)
            .unwrap()
            .unwrap();
        assert_eq!((res.n, res.k), (5, 1));
        assert!(res.max_defect <= 1e-7, "defect {}", res.max_defect);
    }

    #[test]
    fn closure_test_circle_pair() {
        let inner = GeneralConic::from_diagonal(4.0, 4.0, -1.0).unwrap();
        let outer = GeneralConic::from_diagonal(1.0, 1.0, -1.0).unwrap();
        let res = closure_test(&inner, &outer, 10).unwrap().unwrap();
        assert_eq!((res.n, res.k), (3, 1));
        assert!(res.max_defect <= 1e-9);
    }

    #[test]
    fn closure_test_irrational_pair() {
        let f = fam41();
        let inner = to_general(&f.conic(-0.7321).unwrap());
        let outer = to_general(&f.conic(0.0).unwrap());
        assert!(closure_test(&inner, &outer, 12).unwrap().is_none());
    }

    #[test]
    fn closure_test_respects_denominator_cap() {
        let f = fam41();
        let lambda = find_caustic_with_resolution(&f, 0.0, 1, 5, 1024).unwrap();
        let inner = to_general(&f.conic(lambda).unwrap());
        let outer = to_general(&f.conic(0.0).unwrap());
        assert!(closure_test(&inner, &outer, 4).unwrap().is_none());
    }

    #[test]
    fn normalize_rejects_swapped_nesting() {
        let f = fam41();
        let inner = to_general(&f.conic(0.0).unwrap());
        let outer = to_general(&f.conic(5.0).unwrap());
        assert!(normalize_pair(&outer, &inner).is_err());
    }

    #[test]
    fn apply_point_at_infinity_errors() {
        // a map sending (1, 0) to infinity
        let t = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0);
        let map = ProjectiveMap::new(t).unwrap();
        assert!(matches!(
            map.apply_point(Point2::new(1.0, 0.0)),
            Err(Error::AtInfinity)
        ));
    }

    #[test]
    fn chord_chain_stays_tangent() {
        // internal consistency of the chain helpers
        let f = fam41();
        let inner = to_general(&f.conic(-0.75).unwrap());
        let outer_conic = f.conic(0.0).unwrap();
        let outer = to_general(&outer_conic);
        let dual = dual_conic(&inner).unwrap();
        let geom = ellipse_geometry(&outer).unwrap();
        let mut v = geom.point_at(0.9).homogeneous();
        let mut l = tangents_through(&dual, &v).unwrap()[1];
        for _ in 0..8 {
            v = other_intersection(outer.matrix(), &l, &v);
            let p = Point2::new(v[0] / v[2], v[1] / v[2]);
            assert!(evaluate_confocal(&outer_conic, p).abs() < 1e-9);
            let tangency = (l.transpose() * dual.matrix() * l)[0].abs();
            assert!(tangency < 1e-10 * dual.matrix().norm());
            l = other_tangent(&dual, &v, &l).unwrap();
        }
    }

    #[test]
    fn oriented_line_roundtrip_through_map() {
        // applying the identity to a line keeps its geometry
        let l = OrientedLine::new(1.2, 0.7);
        let map = ProjectiveMap::identity();
        let l2 = map.apply_line(&l).unwrap();
        let same_line = (wrap_tau(l2.phi()) - l.phi()).abs() < 1e-12 && (l2.p() - l.p()).abs() < 1e-12;
        let reversed = (wrap_tau(l2.phi() - std::f64::consts::PI) - l.phi()).abs() < 1e-12
            && (l2.p() + l.p()).abs() < 1e-12;
        assert!(same_line || reversed);
    }
}
