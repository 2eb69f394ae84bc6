//! The space of oriented lines and the billiard ball map on it.
//!
//! An oriented line is stored as (φ, p): φ is the direction of its normal,
//! p its signed distance from the origin, so the point set is
//! {q : q·(cos φ, sin φ) = p} and travel direction is φ + π/2. In this chart
//! the invariant area form of the billiard map is dp ∧ dφ, which is what the
//! finite-difference Jacobian check measures.

use crate::conics::{ConfocalConic, ConfocalFamily, Point2};
use crate::error::{Error, Result};
use crate::numeric::{angle_diff, quadratic_roots, wrap_tau};
use std::f64::consts::{FRAC_PI_2, TAU};

/// An oriented line in the (φ, p) chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedLine {
    phi: f64,
    p: f64,
}

impl OrientedLine {
    pub fn new(phi: f64, p: f64) -> Self {
        Self {
            phi: wrap_tau(phi),
            p,
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Unit normal (cos φ, sin φ).
    pub fn normal(&self) -> (f64, f64) {
        (self.phi.cos(), self.phi.sin())
    }

    /// Unit travel direction, 90° counterclockwise from the normal.
    pub fn direction(&self) -> (f64, f64) {
        (-self.phi.sin(), self.phi.cos())
    }

    /// The same line with reversed travel direction: (φ+π, -p).
    pub fn reverse(&self) -> Self {
        Self::new(self.phi + std::f64::consts::PI, -self.p)
    }

    /// Point at arc parameter t along the travel direction.
    pub fn point_at(&self, t: f64) -> Point2 {
        let (nx, ny) = self.normal();
        let (dx, dy) = self.direction();
        Point2::new(self.p * nx + t * dx, self.p * ny + t * dy)
    }

    /// Signed distance of a point from the line (positive on the normal side).
    pub fn signed_distance(&self, q: Point2) -> f64 {
        let (nx, ny) = self.normal();
        q.x1 * nx + q.x2 * ny - self.p
    }

    /// Mirror image of a point in the line.
    pub fn mirror(&self, q: Point2) -> Point2 {
        let d = self.signed_distance(q);
        let (nx, ny) = self.normal();
        Point2::new(q.x1 - 2.0 * d * nx, q.x2 - 2.0 * d * ny)
    }

    /// Homogeneous line coordinates (cos φ, sin φ, -p).
    pub fn homogeneous(&self) -> nalgebra::Vector3<f64> {
        let (nx, ny) = self.normal();
        nalgebra::Vector3::new(nx, ny, -self.p)
    }

    /// Chart metric |Δφ| + |Δp| with the angle difference wrapped.
    pub fn chart_distance(&self, other: &OrientedLine) -> f64 {
        angle_diff(self.phi, other.phi).abs() + (self.p - other.p).abs()
    }
}

/// A chord of the boundary ellipse: the carrying line with its entry and
/// exit points in travel order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    pub line: OrientedLine,
    pub entry: Point2,
    pub exit: Point2,
}

/// Tangent line of an ellipse member with outward normal direction φ:
/// (φ, h_λ(φ)) with h the support function.
pub fn tangent_line(conic: &ConfocalConic, phi: f64) -> Result<OrientedLine> {
    Ok(OrientedLine::new(phi, conic.support(phi)?))
}

/// Tangency point of the support tangent line at normal direction φ:
/// h·n̂ + h'·t̂.
pub fn tangent_point(conic: &ConfocalConic, phi: f64) -> Result<Point2> {
    let h = conic.support(phi)?;
    let (e1, e2) = conic.semi_axes_sq();
    let (s, c) = phi.sin_cos();
    let dh = (e2 - e1) * s * c / h;
    Ok(Point2::new(h * c - dh * s, h * s + dh * c))
}

/// Parameter of the confocal member tangent to the line:
/// λ = p² - a1²cos²φ - a2²sin²φ. Total on all lines; λ > -a2² means the
/// line misses the focal segment (ellipse caustic), λ < -a2² that it
/// crosses it (hyperbola caustic).
pub fn caustic_parameter(family: &ConfocalFamily, line: &OrientedLine) -> f64 {
    let (s, c) = line.phi().sin_cos();
    line.p() * line.p() - family.a1_sq() * c * c - family.a2_sq() * s * s
}

/// Relative tolerance (in units of a1) under which the two intersection
/// parameters count as a tangency.
const TANGENT_REL_TOL: f64 = 1e-10;

/// The chord cut from a line by the boundary ellipse. Exit is the larger
/// arc parameter along the travel direction.
pub fn boundary_chord(line: &OrientedLine, boundary: &ConfocalConic) -> Result<Chord> {
    let (e1, e2) = boundary.semi_axes_sq();
    if e2 <= 0.0 {
        return Err(Error::NotAnEllipse {
            lambda: boundary.lambda(),
        });
    }
    let (s, c) = line.phi().sin_cos();
    let p = line.p();
    let a = s * s / e1 + c * c / e2;
    let b = 2.0 * p * s * c * (1.0 / e2 - 1.0 / e1);
    let k = p * p * (c * c / e1 + s * s / e2) - 1.0;
    let disc = b * b - 4.0 * a * k;
    let (t1, t2) = quadratic_roots(a, b, k).ok_or(Error::LineMissesBoundary { discriminant: disc })?;
    if t2 - t1 <= TANGENT_REL_TOL * boundary.family().scale() {
        return Err(Error::TangentLine);
    }
    Ok(Chord {
        line: *line,
        entry: line.point_at(t1),
        exit: line.point_at(t2),
    })
}

/// One step of the billiard ball map: reflect the travel direction in the
/// tangent line of the boundary at the exit point. The returned line enters
/// the boundary where the input left it, and is tangent to the same
/// confocal conic.
pub fn reflect(line: &OrientedLine, boundary: &ConfocalConic) -> Result<OrientedLine> {
    let chord = boundary_chord(line, boundary)?;
    Ok(reflect_at_exit(&chord, boundary))
}

/// Billiard step keeping the chord endpoints.
pub fn reflect_chord(chord: &Chord, boundary: &ConfocalConic) -> Result<Chord> {
    let out = reflect_at_exit(chord, boundary);
    boundary_chord(&out, boundary)
}

fn reflect_at_exit(chord: &Chord, boundary: &ConfocalConic) -> OrientedLine {
    let (e1, e2) = boundary.semi_axes_sq();
    let q = chord.exit;
    let (mut nx, mut ny) = (q.x1 / e1, q.x2 / e2);
    let nn = nx.hypot(ny);
    nx /= nn;
    ny /= nn;
    let (dx, dy) = chord.line.direction();
    let dn = dx * nx + dy * ny;
    let (rx, ry) = (dx - 2.0 * dn * nx, dy - 2.0 * dn * ny);
    let phi = wrap_tau(ry.atan2(rx) - FRAC_PI_2);
    let p = q.x1 * phi.cos() + q.x2 * phi.sin();
    OrientedLine::new(phi, p)
}

/// Finite-difference step for the Jacobian check, in units of a1 for the
/// p-direction and radians for φ.
const JACOBIAN_STEP: f64 = 1e-5;

/// Central-finite-difference determinant of the billiard map in the (φ, p)
/// chart. Equals 1 wherever the map is defined because the map preserves
/// dp ∧ dφ.
pub fn jacobian_det(line: &OrientedLine, boundary: &ConfocalConic) -> Result<f64> {
    let h_phi = JACOBIAN_STEP;
    let h_p = JACOBIAN_STEP * boundary.family().scale();
    let at = |dphi: f64, dp: f64| reflect(&OrientedLine::new(line.phi() + dphi, line.p() + dp), boundary);
    let fpp = at(h_phi, 0.0)?;
    let fpm = at(-h_phi, 0.0)?;
    let fqp = at(0.0, h_p)?;
    let fqm = at(0.0, -h_p)?;
    let dphi_dphi = angle_diff(fpp.phi(), fpm.phi()) / (2.0 * h_phi);
    let dp_dphi = (fpp.p() - fpm.p()) / (2.0 * h_phi);
    let dphi_dp = angle_diff(fqp.phi(), fqm.phi()) / (2.0 * h_p);
    let dp_dp = (fqp.p() - fqm.p()) / (2.0 * h_p);
    Ok(dphi_dphi * dp_dp - dp_dphi * dphi_dp)
}

/// The reflection-law identity on a pair of chained chords: reflect F1 in
/// the first line to F1', F2 in the second to F2', and measure
/// | |F1'F2| - |F1F2'| |. Vanishes exactly when the second chord is the
/// billiard reflection of the first, which is why a trajectory stays tangent
/// to one confocal conic.
pub fn focal_reflection_gap(chord1: &Chord, chord2: &Chord, family: &ConfocalFamily) -> Result<f64> {
    if family.is_circle() {
        return Err(Error::CircleFamily);
    }
    let gap = chord1.exit.dist(chord2.entry);
    if gap > 1e-9 * family.scale() {
        return Err(Error::ChordsNotChained { gap });
    }
    let (f1, f2) = family.foci();
    let f1_mirror = chord1.line.mirror(f1);
    let f2_mirror = chord2.line.mirror(f2);
    Ok((f1_mirror.dist(f2) - f1.dist(f2_mirror)).abs())
}

/// One invariant curve of the phase portrait, sampled over φ. Ellipse
/// caustics give two closed graphs; hyperbola caustics give arcs with gaps
/// where p² would be negative (the ∞-shaped figure at λ = -a2²).
#[derive(Debug, Clone)]
pub struct PhaseCurve {
    pub lambda: f64,
    /// (φ, +p) samples where the curve exists.
    pub upper: Vec<(f64, f64)>,
    /// (φ, -p) samples.
    pub lower: Vec<(f64, f64)>,
}

/// Sample the invariant curves p² = a1²cos²φ + a2²sin²φ + λ of the billiard
/// in the member λ_Γ, clipped to the lines that meet the table.
pub fn phase_portrait(
    family: &ConfocalFamily,
    lambda_gamma: f64,
    lambdas: &[f64],
    samples: usize,
) -> Result<Vec<PhaseCurve>> {
    let boundary = family.conic(lambda_gamma)?;
    if !boundary.is_ellipse() {
        return Err(Error::NotAnEllipse { lambda: lambda_gamma });
    }
    let mut curves = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(lambda > -family.a1_sq() && lambda < lambda_gamma) {
            return Err(Error::DegenerateLambda { lambda });
        }
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for j in 0..=samples {
            let phi = TAU * j as f64 / samples as f64;
            let (s, c) = phi.sin_cos();
            let p_sq = family.a1_sq() * c * c + family.a2_sq() * s * s + lambda;
            if p_sq < 0.0 {
                continue;
            }
            let p = p_sq.sqrt().min(boundary.support(phi)?);
            upper.push((phi, p));
            lower.push((phi, -p));
        }
        curves.push(PhaseCurve { lambda, upper, lower });
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conics::evaluate_confocal;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use std::f64::consts::PI;

    fn fam41() -> ConfocalFamily {
        ConfocalFamily::new(4.0, 1.0).unwrap()
    }

    fn gamma0() -> ConfocalConic {
        fam41().conic(0.0).unwrap()
    }

    /// A line through the interior, sampled by normal angle and a fraction of
    /// the support height.
    fn random_interior_line(rng: &mut StdRng, boundary: &ConfocalConic, margin: f64) -> OrientedLine {
        let phi = rng.gen_range(0.0..TAU);
        let h = boundary.support(phi).unwrap();
        OrientedLine::new(phi, rng.gen_range(-h * margin..h * margin))
    }

    #[test]
    fn oriented_line_conventions() {
        let l = OrientedLine::new(0.0, 2.0);
        // the vertical line x1 = 2 traveling +x2
        assert_eq!(l.direction(), (-0.0, 1.0));
        assert_relative_eq!(l.signed_distance(Point2::new(2.0, 5.0)), 0.0);
        let r = l.reverse();
        assert_relative_eq!(r.phi(), PI);
        assert_relative_eq!(r.p(), -2.0);
        assert_relative_eq!(r.signed_distance(Point2::new(2.0, 5.0)), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn tangent_line_examples() {
        let f = fam41();
        let l = tangent_line(&f.conic(0.0).unwrap(), 0.0).unwrap();
        assert_relative_eq!(l.p(), 2.0);
        let l = tangent_line(&f.conic(0.0).unwrap(), FRAC_PI_2).unwrap();
        assert_relative_eq!(l.p(), 1.0);
        let l = tangent_line(&f.conic(-0.75).unwrap(), FRAC_PI_2).unwrap();
        assert_relative_eq!(l.p(), 0.5);
        assert!(tangent_line(&f.conic(-2.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn tangent_point_is_on_conic_and_line() {
        let f = fam41();
        let conic = f.conic(-0.75).unwrap();
        for j in 0..32 {
            let phi = TAU * j as f64 / 32.0;
            let t = tangent_point(&conic, phi).unwrap();
            assert!(evaluate_confocal(&conic, t).abs() < 1e-14);
            let l = tangent_line(&conic, phi).unwrap();
            assert!(l.signed_distance(t).abs() < 1e-14);
        }
    }

    #[test]
    fn caustic_parameter_examples() {
        let f = fam41();
        assert_relative_eq!(caustic_parameter(&f, &OrientedLine::new(0.0, 2.0)), 0.0);
        assert_relative_eq!(
            caustic_parameter(&f, &OrientedLine::new(0.0, 3.0_f64.sqrt())),
            -1.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            caustic_parameter(&f, &OrientedLine::new(FRAC_PI_2, 0.5)),
            -0.75,
            epsilon = 1e-15
        );
    }

    #[test]
    fn tangency_consistency() {
        // caustic_parameter(tangent_line(λ, φ)) = λ
        let f = fam41();
        for &lambda in &[-0.999, -0.75, -0.2, 0.0, 2.5] {
            let conic = f.conic(lambda).unwrap();
            for j in 0..64 {
                let phi = TAU * j as f64 / 64.0;
                let l = tangent_line(&conic, phi).unwrap();
                assert!(
                    (caustic_parameter(&f, &l) - lambda).abs() <= 1e-12 * f.a1_sq().max(1.0),
                    "λ drifted at phi={phi}"
                );
            }
        }
    }

    #[test]
    fn major_axis_reflects_to_itself_reversed() {
        let l = OrientedLine::new(FRAC_PI_2, 0.0);
        let r = reflect(&l, &gamma0()).unwrap();
        assert_relative_eq!(r.phi(), 3.0 * FRAC_PI_2, epsilon = 1e-12);
        assert_relative_eq!(r.p(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn circle_billiard_is_a_rotation() {
        // in a circle the boundary angle advances by twice the inner angle
        let circ = ConfocalFamily::new(1.0, 1.0).unwrap().conic(0.0).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let l = random_interior_line(&mut rng, &circ, 0.98);
            let chord = boundary_chord(&l, &circ).unwrap();
            let theta_entry = chord.entry.x2.atan2(chord.entry.x1);
            let theta_exit = chord.exit.x2.atan2(chord.exit.x1);
            let advance = angle_diff(theta_exit, theta_entry);
            // inner angle between chord and tangent at entry
            let (dx, dy) = l.direction();
            let (tx, ty) = (-theta_entry.sin(), theta_entry.cos());
            let alpha = (dx * tx + dy * ty).clamp(-1.0, 1.0).acos();
            let r = reflect(&l, &circ).unwrap();
            let next = boundary_chord(&r, &circ).unwrap();
            let theta_next = next.exit.x2.atan2(next.exit.x1);
            assert!(
                (angle_diff(theta_next, theta_exit) - advance).abs() < 1e-10,
                "arc advance changed"
            );
            // advance equals ±2α mod 2π depending on travel sense
            let two_alpha = advance.abs();
            assert!(
                (two_alpha - 2.0 * alpha.min(PI - alpha)).abs() < 1e-10,
                "advance {two_alpha} vs inner angle {alpha}"
            );
        }
    }

    /// Independent straightedge reflection: intersect in Cartesian form and
    /// mirror the direction vector explicitly.
    fn oracle_reflect(line: &OrientedLine, boundary: &ConfocalConic) -> OrientedLine {
        let (e1, e2) = boundary.semi_axes_sq();
        let (a, b) = (e1.sqrt(), e2.sqrt());
        // scale to the unit circle, intersect, scale back
        let (nx, ny) = line.normal();
        let p = line.p();
        // line: nx·x + ny·y = p with x = a u, y = b v
        let (cu, cv) = (nx * a, ny * b);
        let nn = cu.hypot(cv);
        let (cu, cv, d) = (cu / nn, cv / nn, p / nn);
        // points on u² + v² = 1 with cu·u + cv·v = d
        let s = (1.0 - d * d).sqrt();
        let base = (cu * d, cv * d);
        let perp = (-cv, cu);
        let q1 = Point2::new(a * (base.0 + s * perp.0), b * (base.1 + s * perp.1));
        let q2 = Point2::new(a * (base.0 - s * perp.0), b * (base.1 - s * perp.1));
        // pick the exit: farther along the travel direction
        let (dx, dy) = line.direction();
        let t1 = q1.x1 * dx + q1.x2 * dy;
        let t2 = q2.x1 * dx + q2.x2 * dy;
        let exit = if t1 > t2 { q1 } else { q2 };
        // mirror the direction across the outward normal at the exit
        let (gx, gy) = (exit.x1 / e1, exit.x2 / e2);
        let g = gx.hypot(gy);
        let (gx, gy) = (gx / g, gy / g);
        let dn = dx * gx + dy * gy;
        let (rx, ry) = (dx - 2.0 * dn * gx, dy - 2.0 * dn * gy);
        let phi = wrap_tau(ry.atan2(rx) - FRAC_PI_2);
        OrientedLine::new(phi, exit.x1 * phi.cos() + exit.x2 * phi.sin())
    }

    #[test]
    fn reflect_agrees_with_straightedge_oracle() {
        let g = gamma0();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..500 {
            let l = random_interior_line(&mut rng, &g, 0.999);
            let ours = reflect(&l, &g).unwrap();
            let oracle = oracle_reflect(&l, &g);
            assert!(ours.chart_distance(&oracle) < 1e-9, "{l:?}");
            assert!(
                (caustic_parameter(&fam41(), &ours) - caustic_parameter(&fam41(), &l)).abs() <= 1e-10,
                "caustic parameter moved"
            );
        }
    }

    #[test]
    fn reflect_entry_is_previous_exit() {
        let g = gamma0();
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..100 {
            let l = random_interior_line(&mut rng, &g, 0.99);
            let chord = boundary_chord(&l, &g).unwrap();
            let next = boundary_chord(&reflect(&l, &g).unwrap(), &g).unwrap();
            assert!(chord.exit.dist(next.entry) < 1e-10);
            assert!(evaluate_confocal(&g, chord.entry).abs() < 1e-10);
            assert!(evaluate_confocal(&g, chord.exit).abs() < 1e-10);
        }
    }

    #[test]
    fn reflect_rejects_missing_and_tangent_lines() {
        let g = gamma0();
        assert!(matches!(
            reflect(&OrientedLine::new(0.0, 2.5), &g),
            Err(Error::LineMissesBoundary { .. })
        ));
        assert!(matches!(
            reflect(&OrientedLine::new(0.3, g.support(0.3).unwrap()), &g),
            Err(Error::TangentLine)
        ));
    }

    #[test]
    fn reversibility() {
        // reflect(reverse(reflect(l))) = reverse(l)
        let g = gamma0();
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..300 {
            let l = random_interior_line(&mut rng, &g, 0.99);
            let back = reflect(&reflect(&l, &g).unwrap().reverse(), &g).unwrap();
            assert!(back.chart_distance(&l.reverse()) < 1e-9);
        }
    }

    #[test]
    fn jacobian_is_one_on_random_lines() {
        let g = gamma0();
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..200 {
            let l = random_interior_line(&mut rng, &g, 0.9);
            let det = jacobian_det(&l, &g).unwrap();
            assert!((det - 1.0).abs() <= 1e-6, "det = {det}");
        }
    }

    #[test]
    fn jacobian_on_circle_and_near_major_axis() {
        let circ = ConfocalFamily::new(1.0, 1.0).unwrap().conic(0.0).unwrap();
        let det = jacobian_det(&OrientedLine::new(1.0, 0.4), &circ).unwrap();
        assert!((det - 1.0).abs() <= 1e-8);
        let det = jacobian_det(&OrientedLine::new(FRAC_PI_2 + 3e-3, 1e-3), &gamma0()).unwrap();
        assert!((det - 1.0).abs() <= 1e-5, "det = {det}");
    }

    #[test]
    fn focal_reflection_identity() {
        let f = fam41();
        let g = gamma0();
        // symmetric 2-periodic pair along the major axis
        let l = OrientedLine::new(FRAC_PI_2, 0.0);
        let c1 = boundary_chord(&l, &g).unwrap();
        let c2 = reflect_chord(&c1, &g).unwrap();
        assert!(focal_reflection_gap(&c1, &c2, &f).unwrap() < 1e-12);

        let mut rng = StdRng::seed_from_u64(29);
        for _ in 0..300 {
            let l = random_interior_line(&mut rng, &g, 0.99);
            let c1 = match boundary_chord(&l, &g) {
                Ok(c) => c,
                Err(_) => continue,
            };
            let c2 = reflect_chord(&c1, &g).unwrap();
            assert!(c1.exit.dist(c2.entry) < 1e-12);
            assert!(focal_reflection_gap(&c1, &c2, &f).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn focal_reflection_negative_control() {
        // a chord pair sharing an endpoint but violating the reflection law
        let f = fam41();
        let g = gamma0();
        let l = OrientedLine::new(0.3, 0.7);
        let c1 = boundary_chord(&l, &g).unwrap();
        // wrong second chord: join the exit to an unrelated boundary point
        let target = Point2::new(2.0 * 2.4_f64.cos(), 2.4_f64.sin());
        let dir = (target.x1 - c1.exit.x1, target.x2 - c1.exit.x2);
        let phi = wrap_tau(dir.1.atan2(dir.0) - FRAC_PI_2);
        let wrong = OrientedLine::new(phi, c1.exit.x1 * phi.cos() + c1.exit.x2 * phi.sin());
        let c2 = boundary_chord(&wrong, &g).unwrap();
        assert!(c1.exit.dist(c2.entry) < 1e-9);
        assert!(focal_reflection_gap(&c1, &c2, &f).unwrap() > 1e-6);
    }

    #[test]
    fn chords_must_share_an_endpoint() {
        let f = fam41();
        let g = gamma0();
        let c1 = boundary_chord(&OrientedLine::new(0.3, 0.7), &g).unwrap();
        let c2 = boundary_chord(&OrientedLine::new(2.3, 0.2), &g).unwrap();
        assert!(matches!(
            focal_reflection_gap(&c1, &c2, &f),
            Err(Error::ChordsNotChained { .. })
        ));
    }

    #[test]
    fn caustic_dichotomy_along_orbits() {
        // sign(λ + a2²) never changes along an orbit
        let f = fam41();
        let g = gamma0();
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..100 {
            let mut l = random_interior_line(&mut rng, &g, 0.98);
            let side = (caustic_parameter(&f, &l) + f.a2_sq()).signum();
            for _ in 0..50 {
                l = match reflect(&l, &g) {
                    Ok(next) => next,
                    Err(_) => break,
                };
                assert_eq!((caustic_parameter(&f, &l) + f.a2_sq()).signum(), side);
            }
        }
    }

    #[test]
    fn phase_portrait_examples() {
        let f = fam41();
        let curves = phase_portrait(&f, 0.0, &[-1.0, -0.75], 360).unwrap();
        // focal curve passes through (0, ±√3)
        let focal = &curves[0];
        let at0 = focal.upper.iter().find(|(phi, _)| *phi == 0.0).unwrap();
        assert_relative_eq!(at0.1, 3.0_f64.sqrt(), epsilon = 1e-12);
        // λ = -0.75 at φ = π/2 gives p = ±0.5 and stays inside the table
        let caustic = &curves[1];
        let boundary = f.conic(0.0).unwrap();
        for &(phi, p) in caustic.upper.iter().chain(caustic.lower.iter()) {
            assert!(p.abs() <= boundary.support(phi).unwrap() + 1e-12);
        }
        let near = caustic
            .upper
            .iter()
            .min_by(|a, b| {
                (a.0 - FRAC_PI_2).abs().partial_cmp(&(b.0 - FRAC_PI_2).abs()).unwrap()
            })
            .unwrap();
        assert!((near.1 - 0.5).abs() < 1e-3);

        // circle family: constant |p| rows
        let circ = ConfocalFamily::new(1.0, 1.0).unwrap();
        let rows = phase_portrait(&circ, 0.0, &[-0.75, -0.5], 64).unwrap();
        for row in rows {
            for &(_, p) in &row.upper {
                assert_relative_eq!(p, (1.0 + row.lambda).sqrt(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn phase_portrait_rejects_out_of_range() {
        let f = fam41();
        assert!(phase_portrait(&f, 0.0, &[-4.5], 16).is_err());
        assert!(phase_portrait(&f, 0.0, &[0.5], 16).is_err());
    }
}
