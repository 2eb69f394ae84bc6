//! Poncelet polygons, the grid of extended-side intersections, conic
//! fitting, confocality measures, and the Ivory equivalence of grid sets.
//!
//! For an n-periodic caustic, the n side lines ℓ_0, …, ℓ_{n-1} touch the
//! caustic at chart coordinates x0 + i/n in cyclic order. The grid is the
//! n(n+1)/2 points ℓ_i ∩ ℓ_j (with ℓ_j ∩ ℓ_j the tangency point); the
//! angular sets P_k collect pairs with i - j = k and lie on nested confocal
//! ellipses, the radial sets Q_k collect i + j = k and lie on confocal
//! hyperbolas.

use crate::canonical::{build_chart, effective_resolution, find_caustic_with_resolution, tangency_from_point, CanonicalChart, DEFAULT_RESOLUTION};
use crate::conics::{dual_conic, to_general, ConfocalFamily, GeneralConic, Point2};
use crate::error::{Error, Result};
use crate::linespace::{tangent_line, tangent_point, OrientedLine};
use crate::numeric::{gcd, wrap_unit};
use nalgebra::{DMatrix, Matrix3};

/// Distance from the origin beyond which an intersection counts as ideal
/// (at infinity), in units of a1.
const AT_INFINITY_REL: f64 = 1e6;

/// An n-periodic inscribed-circumscribed polygon. Side i is tangent to the
/// caustic at chart coordinate x0 + i/n; vertex i = ℓ_i ∩ ℓ_{i+k} is the
/// billiard reflection point on the outer member (sides i and i+1 for the
/// convex polygon k = 1).
#[derive(Debug, Clone)]
pub struct PonceletPolygon {
    pub family: ConfocalFamily,
    pub lambda_gamma: f64,
    pub lambda_caustic: f64,
    pub n: u32,
    pub k: u32,
    pub x0: f64,
    pub tangency_x: Vec<f64>,
    pub side_lines: Vec<OrientedLine>,
    pub vertices: Vec<Point2>,
    resolution: usize,
}

/// Build the polygon for the rotation number k/n: finds the periodic
/// caustic, charts it, and places the n tangent side lines.
pub fn build_polygon(
    family: &ConfocalFamily,
    lambda_gamma: f64,
    n: u32,
    k: u32,
    x0: f64,
) -> Result<PonceletPolygon> {
    build_polygon_with_resolution(family, lambda_gamma, n, k, x0, DEFAULT_RESOLUTION)
}

pub fn build_polygon_with_resolution(
    family: &ConfocalFamily,
    lambda_gamma: f64,
    n: u32,
    k: u32,
    x0: f64,
    resolution: usize,
) -> Result<PonceletPolygon> {
    if n < 3 || n.is_multiple_of(2) || k == 0 || k > (n - 1) / 2 || gcd(k, n) != 1 {
        return Err(Error::InvalidPolygonIndices { n, k });
    }
    let lambda_caustic = find_caustic_with_resolution(family, lambda_gamma, k, n, resolution)?;
    let resolution = effective_resolution(family, lambda_caustic, resolution);
    let chart = build_chart(family, lambda_caustic, resolution)?;
    let caustic = family.conic(lambda_caustic)?;
    let mut tangency_x = Vec::with_capacity(n as usize);
    let mut side_lines = Vec::with_capacity(n as usize);
    for i in 0..n {
        let x = wrap_unit(x0 + i as f64 / n as f64);
        tangency_x.push(x);
        side_lines.push(tangent_line(&caustic, chart.invert(x))?);
    }
    let mut vertices = Vec::with_capacity(n as usize);
    for i in 0..n as usize {
        let j = (i + k as usize) % n as usize;
        let v = intersect_lines(&side_lines[i], &side_lines[j]).ok_or(Error::AtInfinity)?;
        vertices.push(v);
    }
    Ok(PonceletPolygon {
        family: *family,
        lambda_gamma,
        lambda_caustic,
        n,
        k,
        x0,
        tangency_x,
        side_lines,
        vertices,
        resolution,
    })
}

impl PonceletPolygon {
    /// The chart used to place the sides (deterministic given the polygon).
    pub fn chart(&self) -> Result<CanonicalChart> {
        build_chart(&self.family, self.lambda_caustic, self.resolution)
    }
}

/// Intersection point of two lines, None when they are parallel within
/// machine tolerance.
pub fn intersect_lines(l1: &OrientedLine, l2: &OrientedLine) -> Option<Point2> {
    let det = (l2.phi() - l1.phi()).sin();
    if det.abs() < 1e-14 {
        return None;
    }
    let (s1, c1) = l1.phi().sin_cos();
    let (s2, c2) = l2.phi().sin_cos();
    Some(Point2::new(
        (l1.p() * s2 - l2.p() * s1) / det,
        (l2.p() * c1 - l1.p() * c2) / det,
    ))
}

/// Angular (P) or radial (Q) grid set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    P,
    Q,
}

/// One grid point ℓ_i ∩ ℓ_j. `position` is None for near-parallel sides
/// whose intersection is flagged at infinity rather than dropped.
#[derive(Debug, Clone, Copy)]
pub struct GridPoint {
    pub i: u32,
    pub j: u32,
    pub position: Option<Point2>,
}

/// One P_k or Q_k set of grid points.
#[derive(Debug, Clone)]
pub struct GridSet {
    pub kind: SetKind,
    pub index: u32,
    pub points: Vec<GridPoint>,
}

impl GridSet {
    /// The finite points of the set.
    pub fn finite_points(&self) -> Vec<Point2> {
        self.points.iter().filter_map(|g| g.position).collect()
    }
}

/// All grid sets of the polygon: P_k for k = 0..=(n-1)/2 (P_0 being the
/// tangency points), then Q_k for k = 0..n. Indices are cyclic; P_k and
/// P_{n-k} are the same unordered set and are canonicalized to k ≤ (n-1)/2.
pub fn grid_sets(poly: &PonceletPolygon) -> Result<Vec<GridSet>> {
    let n = poly.n as usize;
    let caustic = poly.family.conic(poly.lambda_caustic)?;
    let chart = poly.chart()?;
    let limit = AT_INFINITY_REL * poly.family.scale();

    let tangency = |i: usize| -> Result<Point2> {
        tangent_point(&caustic, chart.invert(poly.tangency_x[i]))
    };
    let grid_point = |i: usize, j: usize| -> Result<GridPoint> {
        let position = if i == j {
            Some(tangency(i)?)
        } else {
            intersect_lines(&poly.side_lines[i], &poly.side_lines[j])
                .filter(|p| p.norm() <= limit)
        };
        Ok(GridPoint {
            i: i as u32,
            j: j as u32,
            position,
        })
    };

    let mut sets = Vec::new();
    for k in 0..=(n - 1) / 2 {
        let mut points = Vec::with_capacity(n);
        for j in 0..n {
            let i = (j + k) % n;
            points.push(grid_point(i, j)?);
        }
        sets.push(GridSet {
            kind: SetKind::P,
            index: k as u32,
            points,
        });
    }
    for k in 0..n {
        let mut points = Vec::with_capacity(n.div_ceil(2));
        for j in 0..n {
            let i = (k + n - j) % n;
            if j <= i {
                points.push(grid_point(i, j)?);
            }
        }
        sets.push(GridSet {
            kind: SetKind::Q,
            index: k as u32,
            points,
        });
    }
    Ok(sets)
}

/// A least-squares conic through a point set, with the relative smallest
/// singular value of the design matrix as the fit residual.
#[derive(Debug, Clone)]
pub struct FittedConic {
    pub conic: GeneralConic,
    pub residual: f64,
}

impl FittedConic {
    /// Hyperbola iff the quadratic part has negative determinant.
    pub fn is_hyperbola(&self) -> bool {
        let m = self.conic.matrix();
        m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(0, 1)] < 0.0
    }
}

/// Least-squares conic through ≥ 5 points: smallest singular direction of
/// the [x², xy, y², x, y, 1] design matrix after isotropic (centroid +
/// scale) normalization.
pub fn fit_conic(points: &[Point2]) -> Result<FittedConic> {
    let m = points.len();
    if m < 5 {
        return Err(Error::TooFewPoints { needed: 5, got: m });
    }
    let cx = points.iter().map(|p| p.x1).sum::<f64>() / m as f64;
    let cy = points.iter().map(|p| p.x2).sum::<f64>() / m as f64;
    let mean_dist = points
        .iter()
        .map(|p| (p.x1 - cx).hypot(p.x2 - cy))
        .sum::<f64>()
        / m as f64;
    if mean_dist < 1e-300 {
        return Err(Error::DegenerateFit);
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;

    // collinearity: second moments of the normalized coordinates
    let mut mxx = 0.0;
    let mut mxy = 0.0;
    let mut myy = 0.0;
    for p in points {
        let (u, v) = ((p.x1 - cx) * s, (p.x2 - cy) * s);
        mxx += u * u;
        mxy += u * v;
        myy += v * v;
    }
    let tr = mxx + myy;
    let det = mxx * myy - mxy * mxy;
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let eig_min = tr / 2.0 - disc;
    if eig_min <= 1e-20 * tr {
        return Err(Error::DegenerateFit);
    }

    let mut design = DMatrix::zeros(m, 6);
    for (r, p) in points.iter().enumerate() {
        let (u, v) = ((p.x1 - cx) * s, (p.x2 - cy) * s);
        design[(r, 0)] = u * u;
        design[(r, 1)] = u * v;
        design[(r, 2)] = v * v;
        design[(r, 3)] = u;
        design[(r, 4)] = v;
        design[(r, 5)] = 1.0;
    }
    let svd = design.clone().svd(false, true);
    let sv = &svd.singular_values;
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut min_idx = 0;
    let mut max_idx = 0;
    for i in 0..sv.len() {
        if sv[i] < sv[min_idx] {
            min_idx = i;
        }
        if sv[i] > sv[max_idx] {
            max_idx = i;
        }
    }
    // exactly five points always determine a conic: the thin SVD has no
    // nullspace row, so take the smallest eigenvector of the normal matrix
    let (residual, row) = if v_t.nrows() < 6 {
        let eig = nalgebra::SymmetricEigen::new(design.transpose() * &design);
        let mut idx = 0;
        for i in 0..6 {
            if eig.eigenvalues[i] < eig.eigenvalues[idx] {
                idx = i;
            }
        }
        (0.0, eig.eigenvectors.column(idx).into_owned())
    } else {
        (sv[min_idx] / sv[max_idx], v_t.row(min_idx).transpose())
    };

    // conic in normalized coordinates -> original frame via u = s(x-c)
    let (a, b, c2, d, e, f) = (row[0], row[1], row[2], row[3], row[4], row[5]);
    let mn = Matrix3::new(
        a,
        b / 2.0,
        d / 2.0,
        b / 2.0,
        c2,
        e / 2.0,
        d / 2.0,
        e / 2.0,
        f,
    );
    let norm_map = Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0);
    let original = norm_map.transpose() * mn * norm_map;
    Ok(FittedConic {
        conic: GeneralConic::from_matrix(original)?,
        residual,
    })
}

/// Whether a radial set lies on a degenerate member of its hyperbola
/// family: collinear on a symmetry axis (for a circle family any diameter
/// is one). Such sets cannot be conic-fitted; the degeneracy is a real
/// feature of axis-symmetric grids, not a failure.
pub fn radial_set_is_degenerate(family: &ConfocalFamily, set: &GridSet) -> bool {
    if set.kind != SetKind::Q {
        return false;
    }
    let pts = set.finite_points();
    if pts.is_empty() {
        return false;
    }
    let scale = pts.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1e-300);
    if family.is_circle() {
        // collinear through the center
        let anchor = pts
            .iter()
            .cloned()
            .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
            .unwrap();
        if anchor.norm() < 1e-12 * scale {
            return false;
        }
        return pts
            .iter()
            .all(|p| (p.x1 * anchor.x2 - p.x2 * anchor.x1).abs() < 1e-7 * scale * anchor.norm());
    }
    let on_x = pts.iter().all(|p| p.x2.abs() < 1e-7 * scale);
    let on_y = pts.iter().all(|p| p.x1.abs() < 1e-7 * scale);
    on_x || on_y
}

/// Fit a grid set, completing small sets (< 5 finite points) by the axial
/// symmetries of the family first: a confocal locus is symmetric in both
/// axes, so completion is exact for true loci and destroys false ones.
pub fn fit_grid_set(family: &ConfocalFamily, set: &GridSet) -> Result<FittedConic> {
    let mut pts = set.finite_points();
    if pts.len() < 5 {
        let tol = 1e-9 * family.scale();
        let mut completed: Vec<Point2> = Vec::new();
        for p in &pts {
            for q in [
                *p,
                Point2::new(-p.x1, p.x2),
                Point2::new(p.x1, -p.x2),
                Point2::new(-p.x1, -p.x2),
            ] {
                if !completed.iter().any(|r| r.dist(q) < tol) {
                    completed.push(q);
                }
            }
        }
        pts = completed;
    }
    fit_conic(&pts)
}

/// The two confocality measures of a fitted conic against a family.
#[derive(Debug, Clone, Copy)]
pub struct ConfocalityResidual {
    /// |(s1 - s2) - (a1² - a2²)| / a1² for the centered axis-aligned form
    /// x²/s1 + y²/s2 = 1.
    pub axis_gap: f64,
    /// Rank-2 defect of the dual conic against the dual pencil of the
    /// family: third singular value over first.
    pub pencil_gap: f64,
}

impl ConfocalityResidual {
    pub fn max_gap(&self) -> f64 {
        self.axis_gap.max(self.pencil_gap)
    }
}

/// Tolerance on cross and linear terms (relative to the Frobenius norm)
/// beyond which a fit is rejected as not centered/axis-aligned.
const MISALIGNMENT_TOL: f64 = 1e-7;

/// Confocality of a fitted conic with the family: vanishing cross/linear
/// terms, semi-axis difference equal to a1² - a2², and membership of the
/// dual in the family's dual pencil.
pub fn confocality_residual(
    family: &ConfocalFamily,
    fc: &FittedConic,
) -> Result<ConfocalityResidual> {
    let (s1, s2) = centered_axes(fc)?;
    let axis_gap = ((s1 - s2) - family.focal_sq()).abs() / family.a1_sq();

    // dual-pencil membership against two distinct family members
    let d_fit = dual_conic(&fc.conic)?;
    let d_a = dual_conic(&to_general(&family.conic(0.0)?))?;
    let d_b = dual_conic(&to_general(&family.conic(family.a1_sq())?))?;
    let mut rows = DMatrix::zeros(3, 6);
    for (r, d) in [d_fit, d_a, d_b].iter().enumerate() {
        for (c, v) in d.coefficients().iter().enumerate() {
            rows[(r, c)] = *v;
        }
    }
    let sv = rows.svd(false, false).singular_values;
    Ok(ConfocalityResidual {
        axis_gap,
        pencil_gap: sv[2] / sv[0],
    })
}

/// Semi-axes squared (s1, s2) of a centered axis-aligned conic
/// x²/s1 + y²/s2 = 1; s2 < 0 for hyperbolas.
fn centered_axes(fc: &FittedConic) -> Result<(f64, f64)> {
    let m = fc.conic.matrix();
    let misalignment = m[(0, 1)].abs().max(m[(0, 2)].abs()).max(m[(1, 2)].abs());
    if misalignment > MISALIGNMENT_TOL {
        return Err(Error::NonCentralFit { misalignment });
    }
    if m[(0, 0)].abs() < 1e-12 || m[(1, 1)].abs() < 1e-12 || m[(2, 2)].abs() < 1e-12 {
        return Err(Error::DegenerateFit);
    }
    Ok((-m[(2, 2)] / m[(0, 0)], -m[(2, 2)] / m[(1, 1)]))
}

/// Family parameter of a fitted (confocal) conic, averaged over both axes.
pub fn lambda_of_fit(family: &ConfocalFamily, fc: &FittedConic) -> Result<f64> {
    let (s1, s2) = centered_axes(fc)?;
    Ok(0.5 * ((s1 - family.a1_sq()) + (s2 - family.a2_sq())))
}

/// Refine the family parameter of a confocal locus against the points
/// themselves (least squares on the member equation, Newton in λ). The
/// fitted-matrix estimate is accurate to the fit normalization only; for
/// loci close to a degeneracy the map ratios amplify that noise, and this
/// refinement removes it.
pub fn lambda_of_points(family: &ConfocalFamily, points: &[Point2], seed: f64) -> Result<f64> {
    let mut lambda = seed;
    for _ in 0..40 {
        let e1 = family.a1_sq() + lambda;
        let e2 = family.a2_sq() + lambda;
        if e1.abs() < 1e-14 || e2.abs() < 1e-14 {
            return Err(Error::DegenerateLambda { lambda });
        }
        let mut g = 0.0;
        let mut h = 0.0;
        for p in points {
            let (u, v) = (p.x1 * p.x1, p.x2 * p.x2);
            let r = u / e1 + v / e2 - 1.0;
            let dr = -u / (e1 * e1) - v / (e2 * e2);
            g += r * dr;
            h += dr * dr;
        }
        if h == 0.0 {
            break;
        }
        let step = g / h;
        lambda -= step;
        if step.abs() <= 1e-15 * family.a1_sq().max(lambda.abs()) {
            break;
        }
    }
    Ok(lambda)
}

/// Quadrant class of a radial set: the sign of x1·x2 at its tangency point
/// (the unique grid point with i = j, which lies on the caustic). The Ivory
/// scaling preserves quadrants, so two radial sets are ±A-equivalent only
/// when their tangency points sit in the same quadrant pair (I/III vs
/// II/IV); otherwise the minor-axis mirror must be composed in, which is
/// itself a symmetry of every confocal member.
fn radial_quadrant_class(set: &GridSet) -> f64 {
    set.points
        .iter()
        .find(|g| g.i == g.j)
        .and_then(|g| g.position)
        .map(|p| if p.x1 * p.x2 < 0.0 { -1.0 } else { 1.0 })
        .unwrap_or(1.0)
}

/// Ivory equivalence of two grid sets of the same kind: apply the diagonal
/// scaling between their fitted conics (with the global sign flipped when
/// the index difference is odd, and the minor-axis mirror composed in for
/// radial sets of opposite quadrant class) and return the largest distance
/// from an image point to the other set under the induced bijection.
pub fn equivalence_gap(family: &ConfocalFamily, set_a: &GridSet, set_b: &GridSet) -> Result<f64> {
    if set_a.kind != set_b.kind || set_a.points.len() != set_b.points.len() {
        return Err(Error::MismatchedSets);
    }
    let pts_a = set_a.finite_points();
    let pts_b = set_b.finite_points();
    if pts_a.len() != pts_b.len() {
        return Err(Error::MismatchedSets);
    }
    let lambda = lambda_of_points(
        family,
        &pts_a,
        lambda_of_fit(family, &fit_grid_set(family, set_a)?)?,
    )?;
    let mu = lambda_of_points(
        family,
        &pts_b,
        lambda_of_fit(family, &fit_grid_set(family, set_b)?)?,
    )?;
    let sign = if (set_a.index as i64 - set_b.index as i64).rem_euclid(2) == 1 {
        -1.0
    } else {
        1.0
    };
    let mirror = if set_a.kind == SetKind::Q
        && radial_quadrant_class(set_a) != radial_quadrant_class(set_b)
    {
        -1.0
    } else {
        1.0
    };
    let mut used = vec![false; pts_b.len()];
    let mut worst = 0.0_f64;
    for p in &pts_a {
        let image = crate::conics::ivory_map(family, lambda, mu, *p)?;
        let image = Point2::new(sign * mirror * image.x1, sign * image.x2);
        let mut best = f64::INFINITY;
        let mut best_idx = usize::MAX;
        for (idx, q) in pts_b.iter().enumerate() {
            let d = image.dist(*q);
            if d < best {
                best = d;
                best_idx = idx;
            }
        }
        if used[best_idx] {
            return Err(Error::MismatchedSets);
        }
        used[best_idx] = true;
        worst = worst.max(best);
    }
    Ok(worst)
}

/// Chart coordinates of one grid point: the tangency chart values of the
/// two tangents from the point are x - y and x + y with 0 ≤ y < 1/4.
#[derive(Debug, Clone, Copy)]
pub struct GridChartCoord {
    pub i: u32,
    pub j: u32,
    pub x: f64,
    pub y: f64,
}

/// Recover the (x, y) chart coordinates of every grid point geometrically
/// (tangency recovery from the point, then chart evaluation); tangency
/// points get y = 0 exactly.
pub fn grid_xy_coords(poly: &PonceletPolygon, chart: &CanonicalChart) -> Result<Vec<GridChartCoord>> {
    let n = poly.n as usize;
    let caustic = poly.family.conic(poly.lambda_caustic)?;
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        for i in j..n {
            if i == j {
                out.push(GridChartCoord {
                    i: i as u32,
                    j: j as u32,
                    x: poly.tangency_x[i],
                    y: 0.0,
                });
                continue;
            }
            let q = intersect_lines(&poly.side_lines[i], &poly.side_lines[j])
                .ok_or(Error::AtInfinity)?;
            let [t1, t2] = tangency_from_point(&caustic, q)?;
            let xa = chart.eval(t1.psi);
            let xb = chart.eval(t2.psi);
            let d = wrap_unit(xb - xa);
            let (x, y) = if d <= 0.5 {
                (wrap_unit(xa + d / 2.0), d / 2.0)
            } else {
                (wrap_unit(xb + (1.0 - d) / 2.0), (1.0 - d) / 2.0)
            };
            out.push(GridChartCoord {
                i: i as u32,
                j: j as u32,
                x,
                y,
            });
        }
    }
    Ok(out)
}
