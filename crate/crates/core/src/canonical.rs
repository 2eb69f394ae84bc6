//! The canonical coordinate on an ellipse caustic in which every confocal
//! billiard map is a rigid shift x ↦ x + c.
//!
//! The invariant curve of lines tangent to the member λ is p = h_λ(φ) in the
//! (φ, p) chart, so the area between neighboring invariant curves over a
//! φ-interval has density ∂p/∂λ = 1/(2 h_λ(φ)). Normalizing the total to 1
//! gives the chart x(φ) realized here by a quadrature table. Rotation
//! numbers, the periodic-caustic search, the string construction, and the
//! tangent-pair orthogonality measure all build on it.

use crate::conics::{ConfocalConic, ConfocalFamily, Point2};
use crate::error::{Error, Result};
use crate::linespace::{reflect, tangent_line};
use crate::numeric::{adaptive_simpson, gcd, gl8, illinois, unit_diff, wrap_tau, wrap_unit};
use std::f64::consts::{PI, TAU};

/// Default quadrature resolution (panels over [0, 2π)).
pub const DEFAULT_RESOLUTION: usize = 4096;

/// Minimum accepted resolution.
pub const MIN_RESOLUTION: usize = 64;

/// Quadrature table for the canonical coordinate on an ellipse caustic.
///
/// `x_table[i]` is x at φ = 2πi/resolution; x is strictly increasing with
/// x(0) = 0, x(2π) = 1, and satisfies the central symmetry
/// x(φ+π) = x(φ) + 1/2 because the density is π-periodic.
#[derive(Debug, Clone)]
pub struct CanonicalChart {
    family: ConfocalFamily,
    lambda_caustic: f64,
    resolution: usize,
    x_table: Vec<f64>,
    /// Unnormalized total length ∫ dφ/(2h).
    z: f64,
}

/// Build the chart for an ellipse caustic by composite Gauss-Legendre
/// quadrature of the density 1/(2 h_λ(φ)), 8 nodes per panel.
pub fn build_chart(
    family: &ConfocalFamily,
    lambda_caustic: f64,
    resolution: usize,
) -> Result<CanonicalChart> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::ResolutionTooSmall { resolution });
    }
    let caustic = family.conic(lambda_caustic)?;
    if !caustic.is_ellipse() {
        return Err(Error::NotAnEllipse { lambda: lambda_caustic });
    }
    let density = chart_density(&caustic);
    let step = TAU / resolution as f64;
    let mut x_table = Vec::with_capacity(resolution + 1);
    x_table.push(0.0);
    let mut acc = 0.0;
    for i in 0..resolution {
        acc += gl8(&density, i as f64 * step, (i + 1) as f64 * step);
        x_table.push(acc);
    }
    let z = acc;
    for x in x_table.iter_mut() {
        *x /= z;
    }
    let last = x_table.len() - 1;
    x_table[last] = 1.0;
    Ok(CanonicalChart {
        family: *family,
        lambda_caustic,
        resolution,
        x_table,
        z,
    })
}

fn chart_density(caustic: &ConfocalConic) -> impl Fn(f64) -> f64 {
    let (e1, e2) = caustic.semi_axes_sq();
    move |phi: f64| {
        let (s, c) = phi.sin_cos();
        0.5 / (e1 * c * c + e2 * s * s).sqrt()
    }
}

impl CanonicalChart {
    pub fn family(&self) -> ConfocalFamily {
        self.family
    }

    pub fn lambda_caustic(&self) -> f64 {
        self.lambda_caustic
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// The uniform panel angles of the quadrature table.
    pub fn phi_grid(&self) -> Vec<f64> {
        (0..=self.resolution)
            .map(|i| TAU * i as f64 / self.resolution as f64)
            .collect()
    }

    /// The cumulative normalized table values at the panel angles.
    pub fn x_table(&self) -> &[f64] {
        &self.x_table
    }

    /// The normalization constant: the unnormalized total length.
    pub fn normalization(&self) -> f64 {
        self.z
    }

    /// Normalized density dx/dφ at φ.
    pub fn density(&self, phi: f64) -> f64 {
        let caustic = self
            .family
            .conic(self.lambda_caustic)
            .expect("validated at construction");
        chart_density(&caustic)(phi) / self.z
    }

    /// Chart coordinate x(φ) ∈ [0, 1).
    pub fn eval(&self, phi: f64) -> f64 {
        let phi = wrap_tau(phi);
        let step = TAU / self.resolution as f64;
        let i = ((phi / step) as usize).min(self.resolution - 1);
        let caustic = self
            .family
            .conic(self.lambda_caustic)
            .expect("validated at construction");
        let density = chart_density(&caustic);
        let x = self.x_table[i] + gl8(&density, i as f64 * step, phi) / self.z;
        wrap_unit(x)
    }

    /// Inverse chart: the angle φ ∈ [0, 2π) with x(φ) = x.
    pub fn invert(&self, x: f64) -> f64 {
        let x = wrap_unit(x);
        // bracketing panel from the table
        let mut lo = 0usize;
        let mut hi = self.resolution;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.x_table[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let step = TAU / self.resolution as f64;
        let (mut a, mut b) = (lo as f64 * step, hi as f64 * step);
        let mut phi = 0.5 * (a + b);
        for _ in 0..64 {
            let fx = self.eval_raw(phi) - x;
            if fx > 0.0 {
                b = phi;
            } else {
                a = phi;
            }
            let d = self.density(phi);
            let mut next = phi - fx / d;
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            if (next - phi).abs() < 1e-15 {
                phi = next;
                break;
            }
            phi = next;
        }
        wrap_tau(phi)
    }

    /// x(φ) without the final mod-1 wrap (used by the inverse iteration,
    /// where x = 1 at φ = 2π must not collapse to 0).
    fn eval_raw(&self, phi: f64) -> f64 {
        let phi = phi.clamp(0.0, TAU);
        let step = TAU / self.resolution as f64;
        let i = ((phi / step) as usize).min(self.resolution - 1);
        let caustic = self
            .family
            .conic(self.lambda_caustic)
            .expect("validated at construction");
        let density = chart_density(&caustic);
        self.x_table[i] + gl8(&density, i as f64 * step, phi) / self.z
    }
}

/// The billiard ball map as a self-map of the caustic: from the tangency
/// angle φ_a, extend the tangent line, reflect once in the member λ_Γ, and
/// return the reflected line's tangency angle on the caustic.
pub fn map_on_caustic(
    family: &ConfocalFamily,
    lambda_caustic: f64,
    lambda_gamma: f64,
    phi_a: f64,
) -> Result<f64> {
    let caustic = family.conic(lambda_caustic)?;
    if !caustic.is_ellipse() {
        return Err(Error::NotAnEllipse { lambda: lambda_caustic });
    }
    if lambda_caustic >= lambda_gamma {
        return Err(Error::DegenerateLambda { lambda: lambda_caustic });
    }
    let boundary = family.conic(lambda_gamma)?;
    let line = tangent_line(&caustic, phi_a)?;
    let out = reflect(&line, &boundary)?;
    // tangent lines of a centered ellipse have p = h(φ) > 0; a residual
    // negative p can only be the reversed representative
    Ok(if out.p() >= 0.0 {
        out.phi()
    } else {
        wrap_tau(out.phi() + PI)
    })
}

/// Rotation number with the sample spread over the start points; a caustic
/// is a rigid shift caustic exactly when the spread vanishes.
#[derive(Debug, Clone, Copy)]
pub struct RotationNumber {
    pub value: f64,
    pub spread: f64,
}

/// Spread bound above which rotation_number refuses to average.
const SHIFT_SPREAD_TOL: f64 = 1e-8;

/// Number of equispaced chart starts averaged by rotation_number.
const ROTATION_STARTS: usize = 16;

/// The shift c of the billiard map of Γ_{λ_Γ} in the canonical coordinate of
/// the caustic λ_c, averaged over equispaced starts.
pub fn rotation_number(
    family: &ConfocalFamily,
    lambda_caustic: f64,
    lambda_gamma: f64,
) -> Result<RotationNumber> {
    rotation_number_with_resolution(family, lambda_caustic, lambda_gamma, DEFAULT_RESOLUTION)
}

/// Panels needed so the quadrature resolves the density spike of width
/// √(e2/e1) that a near-focal caustic develops at φ = π/2: about four
/// panels per spike width, capped to keep runaway inputs bounded.
pub fn effective_resolution(family: &ConfocalFamily, lambda_caustic: f64, base: usize) -> usize {
    let e1 = family.a1_sq() + lambda_caustic;
    let e2 = family.a2_sq() + lambda_caustic;
    if e2 <= 0.0 || e1 <= 0.0 {
        return base;
    }
    let spike_width = (e2 / e1).sqrt();
    let needed = (4.0 * TAU / spike_width).ceil() as usize;
    base.max(needed.min(1 << 21))
}

pub fn rotation_number_with_resolution(
    family: &ConfocalFamily,
    lambda_caustic: f64,
    lambda_gamma: f64,
    resolution: usize,
) -> Result<RotationNumber> {
    let chart = build_chart(
        family,
        lambda_caustic,
        effective_resolution(family, lambda_caustic, resolution),
    )?;
    let mut first = None;
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for i in 0..ROTATION_STARTS {
        let x = i as f64 / ROTATION_STARTS as f64;
        let phi_a = chart.invert(x);
        let phi_b = map_on_caustic(family, lambda_caustic, lambda_gamma, phi_a)?;
        let raw = wrap_unit(chart.eval(phi_b) - x);
        // compare all samples on the branch of the first one
        let c = match first {
            None => {
                first = Some(raw);
                raw
            }
            Some(f0) => f0 + unit_diff(raw, f0),
        };
        sum += c;
        min = min.min(c);
        max = max.max(c);
    }
    let spread = max - min;
    if spread > SHIFT_SPREAD_TOL {
        return Err(Error::ShiftSpreadExceeded { spread });
    }
    Ok(RotationNumber {
        value: wrap_unit(sum / ROTATION_STARTS as f64),
        spread,
    })
}

/// Bisection width at which the caustic search stops, relative to a1².
/// Near-focal caustics have dc/dλ ~ 1/((λ+a2²)·ln²): the width must be far
/// below the 1e-12 contract for the n-step closure defect to stay at 1e-9.
const CAUSTIC_BISECTION_REL_TOL: f64 = 1e-15;

/// The ellipse caustic whose trajectories in Γ_{λ_Γ} close after n
/// reflections and k turns: bisection on λ for rotation number k/n, using
/// that c decreases from 1/2 (focal segment) to 0 (boundary). Any period
/// n ≥ 3 is searchable; the odd-n restriction belongs to the grid
/// construction, not to the caustic.
pub fn find_caustic(family: &ConfocalFamily, lambda_gamma: f64, k: u32, n: u32) -> Result<f64> {
    find_caustic_with_resolution(family, lambda_gamma, k, n, DEFAULT_RESOLUTION)
}

pub fn find_caustic_with_resolution(
    family: &ConfocalFamily,
    lambda_gamma: f64,
    k: u32,
    n: u32,
    resolution: usize,
) -> Result<f64> {
    if n < 3 || k == 0 || k > (n - 1) / 2 || gcd(k, n) != 1 {
        return Err(Error::InvalidRotationTarget { k, n });
    }
    let target = k as f64 / n as f64;
    let range = lambda_gamma + family.a2_sq();
    // strictly clear the member-degeneracy rejection zone (1e-9 * a1²)
    let eps = 2e-9 * family.a1_sq();
    let c_at = |l: f64| -> Result<f64> {
        Ok(rotation_number_with_resolution(family, l, lambda_gamma, resolution)?.value)
    };
    // march the endpoints inward: very close to -a2² the chart density
    // develops a spike the fixed-resolution quadrature cannot resolve, and
    // c is monotone anyway, so the mildest endpoints that still bracket the
    // target are the right ones
    let mut lo = f64::NAN;
    let mut c_lo = f64::NAN;
    let mut hi = f64::NAN;
    let mut c_hi = f64::NAN;
    for frac in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7] {
        let cand = (-family.a2_sq() + frac * range).max(-family.a2_sq() + eps);
        match c_at(cand) {
            Ok(c) => {
                lo = cand;
                c_lo = c;
                if c >= target {
                    break;
                }
            }
            Err(_) => break,
        }
    }
    for frac in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7] {
        let cand = (lambda_gamma - frac * range).min(lambda_gamma - eps);
        match c_at(cand) {
            Ok(c) => {
                hi = cand;
                c_hi = c;
                if c <= target {
                    break;
                }
            }
            Err(_) => break,
        }
    }
    if !(c_lo >= target && target >= c_hi) {
        return Err(Error::BracketFailure {
            c_lo,
            c_hi,
            target,
        });
    }
    let tol = CAUSTIC_BISECTION_REL_TOL * family.a1_sq();
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if c_at(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A tangency of one of the two tangent lines from an exterior point.
#[derive(Debug, Clone, Copy)]
pub struct Tangency {
    /// Tangency point on the conic.
    pub point: Point2,
    /// Outward normal angle of the tangent line (the chart angle).
    pub psi: f64,
    /// Standard parameter of the tangency point: (A cos θ, B sin θ).
    pub theta: f64,
}

/// The two tangencies from a point strictly outside an ellipse member,
/// computed in closed form through the affine scaling to the unit circle.
pub fn tangency_from_point(conic: &ConfocalConic, q: Point2) -> Result<[Tangency; 2]> {
    let (e1, e2) = conic.semi_axes_sq();
    if e2 <= 0.0 {
        return Err(Error::NotAnEllipse { lambda: conic.lambda() });
    }
    let (a, b) = (e1.sqrt(), e2.sqrt());
    let (u, v) = (q.x1 / a, q.x2 / b);
    let d_sq = u * u + v * v;
    if d_sq <= 1.0 + 1e-14 {
        return Err(Error::PointInsideCaustic);
    }
    let s = (d_sq - 1.0).sqrt();
    let make = |sgn: f64| {
        let tu = (u - sgn * s * v) / d_sq;
        let tv = (v + sgn * s * u) / d_sq;
        let point = Point2::new(a * tu, b * tv);
        Tangency {
            point,
            psi: wrap_tau((tv / b).atan2(tu / a)),
            theta: wrap_tau(tv.atan2(tu)),
        }
    };
    Ok([make(1.0), make(-1.0)])
}

/// Arc length of an ellipse member between standard parameters, by adaptive
/// quadrature of the parametrization speed. Signed and additive over
/// subdivision.
pub fn arc_length(family: &ConfocalFamily, lambda: f64, phi1: f64, phi2: f64) -> Result<f64> {
    let conic = family.conic(lambda)?;
    let (e1, e2) = conic.semi_axes_sq();
    if e2 <= 0.0 {
        return Err(Error::NotAnEllipse { lambda });
    }
    let speed = move |t: f64| {
        let (s, c) = t.sin_cos();
        (e1 * s * s + e2 * c * c).sqrt()
    };
    let tol = 1e-14 * e1.sqrt() * (1.0 + (phi2 - phi1).abs());
    Ok(adaptive_simpson(&speed, phi1, phi2, tol))
}

/// Full perimeter of an ellipse member.
pub fn perimeter(family: &ConfocalFamily, lambda: f64) -> Result<f64> {
    arc_length(family, lambda, 0.0, TAU)
}

/// The taut-string value at an exterior point q of the caustic: the two
/// tangent segment lengths plus the caustic arc on the far side of q.
pub fn string_value(family: &ConfocalFamily, lambda_caustic: f64, q: Point2) -> Result<f64> {
    let caustic = family.conic(lambda_caustic)?;
    let [t1, t2] = tangency_from_point(&caustic, q)?;
    let segments = q.dist(t1.point) + q.dist(t2.point);

    // candidate arc from t1 to t2 counterclockwise
    let dtheta = wrap_tau(t2.theta - t1.theta);
    let mid_theta = t1.theta + 0.5 * dtheta;
    // the arc is on the near (visible) side iff q lies outside the tangent
    // line at its midpoint
    let (e1, e2) = caustic.semi_axes_sq();
    let (a, b) = (e1.sqrt(), e2.sqrt());
    let mid = Point2::new(a * mid_theta.cos(), b * mid_theta.sin());
    let psi_mid = (mid.x2 / e2).atan2(mid.x1 / e1);
    let visible = q.x1 * psi_mid.cos() + q.x2 * psi_mid.sin() - caustic.support(psi_mid)? > 0.0;
    let arc = if visible {
        // far arc is the complement, t2 -> t1 counterclockwise
        arc_length(family, lambda_caustic, t2.theta, t1.theta + TAU)?
    } else {
        arc_length(family, lambda_caustic, t1.theta, t1.theta + dtheta)?
    };
    Ok(segments + arc)
}

/// String length of the nested pair: the taut-string value measured at a
/// vertex of the outer member. Constancy of string_value along the outer
/// member is equivalent to the caustic property.
pub fn string_length(family: &ConfocalFamily, lambda_caustic: f64, lambda_gamma: f64) -> Result<f64> {
    let outer = family.conic(lambda_gamma)?;
    let (e1, e2) = outer.semi_axes_sq();
    if e2 <= 0.0 {
        return Err(Error::NotAnEllipse { lambda: lambda_gamma });
    }
    if lambda_caustic >= lambda_gamma {
        return Err(Error::DegenerateLambda { lambda: lambda_caustic });
    }
    string_value(family, lambda_caustic, Point2::new(e1.sqrt(), 0.0))
}

/// The curve traced by pulling a closed string of length `length` taut
/// around the caustic: for each of `samples` ray directions from the center
/// the radius is solved so the string value matches.
pub fn string_curve(
    family: &ConfocalFamily,
    lambda_caustic: f64,
    length: f64,
    samples: usize,
) -> Result<Vec<Point2>> {
    let caustic = family.conic(lambda_caustic)?;
    let per = perimeter(family, lambda_caustic)?;
    if length.is_nan() || length <= per {
        return Err(Error::StringTooShort {
            length,
            perimeter: per,
        });
    }
    let (e1, e2) = caustic.semi_axes_sq();
    if e2 <= 0.0 {
        return Err(Error::NotAnEllipse { lambda: lambda_caustic });
    }
    let mut points = Vec::with_capacity(samples);
    for j in 0..samples {
        let theta = TAU * j as f64 / samples as f64;
        let (s, c) = theta.sin_cos();
        // polar radius of the caustic along this ray
        let r_caustic = 1.0 / (c * c / e1 + s * s / e2).sqrt();
        let value = |r: f64| {
            string_value(family, lambda_caustic, Point2::new(r * c, r * s))
                .map(|v| v - length)
                .unwrap_or(f64::NAN)
        };
        let lo = r_caustic * (1.0 + 1e-12) + 1e-300;
        let hi = r_caustic + length;
        let r = illinois(&value, lo, hi, 1e-12, 300).ok_or(Error::RootFindFailure)?;
        points.push(Point2::new(r * c, r * s));
    }
    Ok(points)
}

/// Base parameter step for the two neighboring outer points of the
/// orthogonality measure. Truncation is O(step²) with a coefficient that
/// grows like 1/(a2²+λ) for near-focal caustics, and rounding in the
/// intersections grows like 1/step, so the step used is the base scaled by
/// cbrt((a2²+λ)/(a1²+λ)).
const ORTHO_BASE_STEP: f64 = 1e-4;

/// Orthogonality measure of the string construction at the outer-member
/// point with standard parameter φ_x: take two nearby points x, x' of the
/// outer member, intersect their crossed tangent lines to the caustic
/// (p on one tangent of x and the opposite tangent of x', q on the other
/// pair), and return |cos angle| between the diagonal pq and the outer
/// tangent. The diagonal of that near-rhombus is orthogonal to the outer
/// member exactly when the pair is confocal, so ≈ 0 here.
pub fn orthogonality_gap(
    family: &ConfocalFamily,
    lambda_caustic: f64,
    lambda_gamma: f64,
    phi_x: f64,
) -> Result<f64> {
    let outer = family.conic(lambda_gamma)?;
    let (e1, e2) = outer.semi_axes_sq();
    if e2 <= 0.0 {
        return Err(Error::NotAnEllipse { lambda: lambda_gamma });
    }
    if lambda_caustic >= lambda_gamma {
        return Err(Error::DegenerateLambda { lambda: lambda_caustic });
    }
    let (a, b) = (e1.sqrt(), e2.sqrt());
    let at = |t: f64| {
        let (s, c) = t.sin_cos();
        Point2::new(a * c, b * s)
    };
    let (c1, c2) = family.conic(lambda_caustic)?.semi_axes_sq();
    let step = (ORTHO_BASE_STEP * (c2 / c1).cbrt()).clamp(1e-6, 1e-4);
    let (s, c) = phi_x.sin_cos();
    let tangent = (-a * s, b * c);
    orthogonality_gap_points(
        family,
        lambda_caustic,
        at(phi_x - 0.5 * step),
        at(phi_x + 0.5 * step),
        tangent,
    )
}

/// The same measure from two explicit nearby points of an outer curve and
/// its tangent direction between them; lets callers probe non-confocal
/// outer curves as a negative control.
pub fn orthogonality_gap_points(
    family: &ConfocalFamily,
    lambda_caustic: f64,
    x1: Point2,
    x2: Point2,
    tangent: (f64, f64),
) -> Result<f64> {
    let caustic = family.conic(lambda_caustic)?;
    let [a1, b1] = tangency_from_point(&caustic, x1)?;
    let [a2, b2] = tangency_from_point(&caustic, x2)?;
    let line = |t: &Tangency| tangent_line(&caustic, t.psi);
    let p = crate::grid::intersect_lines(&line(&a1)?, &line(&b2)?).ok_or(Error::AtInfinity)?;
    let q = crate::grid::intersect_lines(&line(&b1)?, &line(&a2)?).ok_or(Error::AtInfinity)?;
    let diag = (q.x1 - p.x1, q.x2 - p.x2);
    let dn = diag.0.hypot(diag.1);
    let tn = tangent.0.hypot(tangent.1);
    if dn < 1e-300 {
        return Err(Error::RootFindFailure);
    }
    Ok(((diag.0 * tangent.0 + diag.1 * tangent.1) / (dn * tn)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conics::evaluate_confocal;
    use crate::linespace::caustic_parameter;
    use approx::assert_relative_eq;
    use rand::prelude::*;

    fn fam41() -> ConfocalFamily {
        ConfocalFamily::new(4.0, 1.0).unwrap()
    }

    fn circle() -> ConfocalFamily {
        ConfocalFamily::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn chart_on_circle_is_uniform() {
        let chart = build_chart(&circle(), -0.75, 128).unwrap();
        for j in 0..=16 {
            let phi = TAU * j as f64 / 16.0;
            assert_relative_eq!(chart.eval(phi), wrap_unit(phi / TAU), epsilon = 1e-14);
        }
        assert_relative_eq!(chart.invert(0.25), PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn chart_central_symmetry() {
        let chart = build_chart(&fam41(), -0.75, 256).unwrap();
        assert!((chart.eval(PI) - 0.5).abs() <= 1e-12);
        for j in 0..100 {
            let phi = TAU * j as f64 / 100.0;
            let d = unit_diff(chart.eval(phi + PI), chart.eval(phi) + 0.5);
            assert!(d.abs() <= 1e-10, "asymmetry {d} at phi={phi}");
        }
    }

    #[test]
    fn chart_resolution_convergence() {
        // doubling the panel count moves x by quadrature error only
        let coarse = build_chart(&fam41(), -0.75, 256).unwrap();
        let fine = build_chart(&fam41(), -0.75, 512).unwrap();
        for j in 0..100 {
            let phi = TAU * (j as f64 + 0.31) / 100.0;
            assert!((coarse.eval(phi) - fine.eval(phi)).abs() <= 1e-10);
        }
    }

    #[test]
    fn chart_eval_invert_roundtrip() {
        let chart = build_chart(&fam41(), -0.75, 256).unwrap();
        assert_eq!(chart.eval(0.0), 0.0);
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..1000 {
            let phi = rng.gen_range(0.0..TAU);
            let back = chart.invert(chart.eval(phi));
            assert!(
                crate::numeric::angle_diff(back, phi).abs() < 1e-10,
                "phi={phi} back={back}"
            );
        }
    }

    #[test]
    fn chart_rejects_bad_inputs() {
        assert!(matches!(
            build_chart(&fam41(), -0.75, 32),
            Err(Error::ResolutionTooSmall { .. })
        ));
        assert!(build_chart(&fam41(), -2.0, 128).is_err());
    }

    #[test]
    fn map_on_caustic_circle_is_rotation_by_third() {
        let phi_b = map_on_caustic(&circle(), -0.75, 0.0, 0.3).unwrap();
        assert_relative_eq!(phi_b, 0.3 + TAU / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn map_on_caustic_preserves_tangency() {
        let f = fam41();
        let caustic = f.conic(-0.75).unwrap();
        let mut rng = StdRng::seed_from_u64(37);
        for _ in 0..100 {
            let phi_a = rng.gen_range(0.0..TAU);
            let phi_b = map_on_caustic(&f, -0.75, 0.0, phi_a).unwrap();
            let la = caustic_parameter(&f, &tangent_line(&caustic, phi_a).unwrap());
            let lb = caustic_parameter(&f, &tangent_line(&caustic, phi_b).unwrap());
            assert!((la - lb).abs() <= 1e-10);
        }
    }

    #[test]
    fn confocal_boundaries_commute() {
        let f = fam41();
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..100 {
            let phi = rng.gen_range(0.0..TAU);
            let ab = map_on_caustic(&f, -0.75, 5.0, map_on_caustic(&f, -0.75, 0.0, phi).unwrap())
                .unwrap();
            let ba = map_on_caustic(&f, -0.75, 0.0, map_on_caustic(&f, -0.75, 5.0, phi).unwrap())
                .unwrap();
            assert!(
                crate::numeric::angle_diff(ab, ba).abs() <= 1e-9,
                "composition orders differ at phi={phi}"
            );
        }
    }

    #[test]
    fn rotation_number_circle_values() {
        let c = rotation_number(&circle(), -0.75, 0.0).unwrap();
        assert_relative_eq!(c.value, 1.0 / 3.0, epsilon = 1e-12);
        assert!(c.spread <= 1e-12);
        let c = rotation_number(&circle(), -0.5, 0.0).unwrap();
        assert_relative_eq!(c.value, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn rotation_number_monotone_in_caustic() {
        let f = fam41();
        let mut prev = f64::INFINITY;
        for i in 0..12 {
            let lambda = -0.98 + 0.97 * i as f64 / 11.0;
            let c = rotation_number_with_resolution(&f, lambda, 0.0, 512)
                .unwrap()
                .value;
            assert!(c > 0.0 && c < 0.5);
            assert!(c < prev, "c not decreasing at λ={lambda}");
            prev = c;
        }
    }

    #[test]
    fn find_caustic_circle_sanity() {
        let l = find_caustic(&circle(), 0.0, 1, 3).unwrap();
        assert!((l - (-0.75)).abs() <= 1e-12);
        // inscribed square: caustic radius √2/2
        let l = find_caustic(&circle(), 0.0, 1, 4).unwrap();
        assert!((l - (-0.5)).abs() <= 1e-12);
        let l = find_caustic(&circle(), 0.0, 2, 5).unwrap();
        // caustic radius cos(2π/5)
        let r = (TAU / 5.0).cos();
        assert!((l - (r * r - 1.0)).abs() <= 1e-11);
    }

    #[test]
    fn find_caustic_closure_oracle() {
        // iterate the raw billiard map n times: the line must return
        let f = fam41();
        let lambda = find_caustic_with_resolution(&f, 0.0, 1, 5, 1024).unwrap();
        let caustic = f.conic(lambda).unwrap();
        let boundary = f.conic(0.0).unwrap();
        let mut rng = StdRng::seed_from_u64(43);
        for _ in 0..100 {
            let start = tangent_line(&caustic, rng.gen_range(0.0..TAU)).unwrap();
            let mut line = start;
            for _ in 0..5 {
                line = reflect(&line, &boundary).unwrap();
            }
            assert!(line.chart_distance(&start) <= 1e-9, "defect {}", line.chart_distance(&start));
        }
    }

    #[test]
    fn find_caustic_rejects_bad_targets() {
        let f = fam41();
        assert!(find_caustic(&f, 0.0, 2, 4).is_err()); // gcd 2
        assert!(find_caustic(&f, 0.0, 3, 9).is_err()); // gcd 3
        assert!(find_caustic(&f, 0.0, 3, 5).is_err()); // k beyond (n-1)/2
        assert!(find_caustic(&f, 0.0, 0, 5).is_err());
    }

    #[test]
    fn arc_length_circle_and_bounds() {
        let quarter = arc_length(&circle(), -0.75, 0.0, PI).unwrap();
        assert_relative_eq!(quarter, PI / 2.0, epsilon = 1e-12);
        let per = perimeter(&fam41(), 0.0).unwrap();
        assert!(per > TAU && per < 2.0 * TAU);
    }

    #[test]
    fn arc_length_additivity() {
        let f = fam41();
        let whole = arc_length(&f, -0.75, 0.2, 2.9).unwrap();
        let a = arc_length(&f, -0.75, 0.2, 1.1).unwrap();
        let b = arc_length(&f, -0.75, 1.1, 2.0).unwrap();
        let c = arc_length(&f, -0.75, 2.0, 2.9).unwrap();
        assert!((whole - (a + b + c)).abs() <= 1e-12);
    }

    #[test]
    fn tangency_from_point_geometry() {
        let f = fam41();
        let caustic = f.conic(-0.75).unwrap();
        let q = Point2::new(2.0, 0.0);
        let [t1, t2] = tangency_from_point(&caustic, q).unwrap();
        for t in [t1, t2] {
            assert!(evaluate_confocal(&caustic, t.point).abs() < 1e-13);
            // the tangent line at psi passes through q
            let l = tangent_line(&caustic, t.psi).unwrap();
            assert!(l.signed_distance(q).abs() < 1e-13);
        }
        assert!(matches!(
            tangency_from_point(&caustic, Point2::new(0.1, 0.1)),
            Err(Error::PointInsideCaustic)
        ));
    }

    #[test]
    fn string_length_circle_closed_form() {
        // L = 2√(R²-r²) + r(2π - 2 arccos(r/R)) for circles
        let r: f64 = 0.5;
        let big_r: f64 = 1.0;
        let expect = 2.0 * (big_r * big_r - r * r).sqrt()
            + r * (TAU - 2.0 * (r / big_r).acos());
        assert_relative_eq!(expect, TAU / 3.0 * 1.0 + 3.0_f64.sqrt(), epsilon = 1e-12);
        let got = string_length(&circle(), -0.75, 0.0).unwrap();
        assert!((got - expect).abs() <= 1e-9, "L = {got} vs {expect}");
    }

    #[test]
    fn string_length_constancy() {
        let f = fam41();
        let at_major = string_value(&f, -0.75, Point2::new(2.0, 0.0)).unwrap();
        let at_minor = string_value(&f, -0.75, Point2::new(0.0, 1.0)).unwrap();
        assert!((at_major - at_minor).abs() <= 1e-9);
        let mut rng = StdRng::seed_from_u64(47);
        for _ in 0..32 {
            let t: f64 = rng.gen_range(0.0..TAU);
            let q = Point2::new(2.0 * t.cos(), t.sin());
            let v = string_value(&f, -0.75, q).unwrap();
            assert!((v - at_major).abs() <= 1e-9, "string value varies: {v} vs {at_major}");
        }
    }

    #[test]
    fn string_length_tends_to_perimeter() {
        let f = fam41();
        let near = string_length(&f, -1e-7, 0.0).unwrap();
        let per = perimeter(&f, 0.0).unwrap();
        assert!((near - per).abs() < 1e-3);
    }

    #[test]
    fn string_curve_circle_and_graves() {
        // circle: the string of length 2π/3 + √3 around r = 1/2 gives r = 1
        let expect_len = TAU / 3.0 + 3.0_f64.sqrt();
        let pts = string_curve(&circle(), -0.75, expect_len, 64).unwrap();
        for p in &pts {
            assert!((p.norm() - 1.0).abs() <= 1e-6);
        }
        // confocal case: the curve lands on the member λ_Γ
        let f = fam41();
        let len = string_length(&f, -0.75, 0.0).unwrap();
        let pts = string_curve(&f, -0.75, len, 64).unwrap();
        let outer = f.conic(0.0).unwrap();
        for p in &pts {
            assert!(evaluate_confocal(&outer, *p).abs() <= 1e-6);
        }
    }

    #[test]
    fn string_curve_contract() {
        let f = fam41();
        let len = string_length(&f, -0.75, 0.0).unwrap();
        let pts = string_curve(&f, -0.75, len, 4).unwrap();
        assert_eq!(pts.len(), 4);
        for p in &pts {
            let v = string_value(&f, -0.75, *p).unwrap();
            assert!((v - len).abs() <= 1e-9);
        }
        assert!(matches!(
            string_curve(&f, -0.75, 1.0, 8),
            Err(Error::StringTooShort { .. })
        ));
    }

    #[test]
    fn orthogonality_on_confocal_pair() {
        // at the vertex the gap vanishes by symmetry up to the noise floor
        // of the short diagonal
        let f = fam41();
        assert!(orthogonality_gap(&f, -0.75, 0.0, 0.0).unwrap() <= 1e-9);
        let mut rng = StdRng::seed_from_u64(53);
        for _ in 0..100 {
            let gap = orthogonality_gap(&f, -0.75, 0.0, rng.gen_range(0.0..TAU)).unwrap();
            assert!(gap <= 1e-8, "gap {gap}");
        }
    }

    #[test]
    fn orthogonality_negative_control() {
        // a non-confocal outer ellipse fails the diagonal test
        let f = fam41();
        let (a, b) = (2.0 * 1.07, 1.0);
        let mut worst = 0.0_f64;
        for j in 0..50 {
            let t = TAU * (j as f64 + 0.37) / 50.0;
            let at = |t: f64| Point2::new(a * t.cos(), b * t.sin());
            let tangent = (-a * t.sin(), b * t.cos());
            let gap = orthogonality_gap_points(
                &f,
                -0.75,
                at(t - 5e-5),
                at(t + 5e-5),
                tangent,
            )
            .unwrap();
            worst = worst.max(gap);
        }
        assert!(worst > 1e-3, "perturbed outer ellipse still looked orthogonal: {worst}");
    }
}
