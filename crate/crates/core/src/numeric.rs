//! Small numerical helpers shared across modules.

use std::f64::consts::TAU;

/// 8-point Gauss-Legendre nodes on [-1, 1].
const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];

const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Single-panel 8-node Gauss-Legendre quadrature of `f` over [a, b].
pub(crate) fn gl8<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for i in 0..8 {
        acc += GL8_WEIGHTS[i] * f(mid + half * GL8_NODES[i]);
    }
    acc * half
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
        + adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, 48)
}

/// Wrap an angle into [0, 2π).
pub(crate) fn wrap_tau(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w == TAU {
        0.0
    } else {
        w
    }
}

/// Wrap a chart coordinate into [0, 1).
pub(crate) fn wrap_unit(x: f64) -> f64 {
    let w = x.rem_euclid(1.0);
    if w == 1.0 {
        0.0
    } else {
        w
    }
}

/// Signed angular difference a - b wrapped into (-π, π].
pub(crate) fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

/// Signed unit-interval difference a - b wrapped into (-1/2, 1/2].
pub(crate) fn unit_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    if d > 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// Stable roots of a*t² + b*t + c = 0, returned in increasing order.
/// Returns None when the discriminant is negative.
pub(crate) fn quadratic_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        (q / a, c / q)
    };
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

/// Bracketed root search combining bisection with the Illinois secant rule.
/// Requires f(lo) and f(hi) of opposite signs. Converges to relative width `rtol`.
pub(crate) fn illinois<F: Fn(f64) -> f64>(
    f: &F,
    mut lo: f64,
    mut hi: f64,
    rtol: f64,
    max_iter: usize,
) -> Option<f64> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        let scale = lo.abs().max(hi.abs()).max(1.0);
        if (hi - lo).abs() <= rtol * scale {
            break;
        }
        let mut x = (flo * hi - fhi * lo) / (flo - fhi);
        // keep the iterate strictly inside the bracket
        if !(x > lo.min(hi) && x < lo.max(hi)) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx == 0.0 {
            return Some(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// accepted when within `tol`. Continued-fraction convergents, smallest
/// denominator first.
pub(crate) fn rational_approx(x: f64, max_den: u32, tol: f64) -> Option<(u32, u32)> {
    let mut h = (1i64, 0i64); // numerator recurrences h_{-1}, h_{-2}
    let mut k = (0i64, 1i64);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor();
        if a.abs() > 1e17 {
            break;
        }
        let ai = a as i64;
        let hn = ai * h.0 + h.1;
        let kn = ai * k.0 + k.1;
        if kn > max_den as i64 {
            break;
        }
        if kn > 0 && (x - hn as f64 / kn as f64).abs() <= tol {
            return Some((hn as u32, kn as u32));
        }
        h = (hn, h.0);
        k = (kn, k.0);
        let frac = v - a;
        if frac.abs() < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    None
}

pub(crate) fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
