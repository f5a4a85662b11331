//! Real spherical harmonics with pole-safe tangential gradients.
//!
//! Convention: orthonormal real harmonics without the Condon-Shortley phase.
//! For degree l and order m,
//!
//! ```text
//! Y_{l,0}  = N_{l,0} P_l(cos t)
//! Y_{l,m}  = sqrt(2) N_{l,m} P_l^m(cos t) cos(m p)    m > 0
//! Y_{l,-m} = sqrt(2) N_{l,m} P_l^m(cos t) sin(m p)    m > 0
//! ```
//!
//! with colatitude t from +z, azimuth p from +x, and N the L^2(S^2)
//! normalizer, so that sum_m Y_{l,m}^2 = (2l+1)/(4 pi) pointwise.
//!
//! Gradients are computed in the spherical frame as
//! `dY/dt * that + (1/sin t) dY/dp * phat`. Both coefficients are evaluated
//! through recurrences for `P_l^m(cos t)`, its t-derivative, and the
//! *pre-divided* `P_l^m(cos t)/sin t` (a polynomial in cos t, sin t for
//! m >= 1), so nothing divides by `sin t` and the poles need no special
//! casing: at `sin t = 0` IEEE `atan2(0, 0) = 0` selects the `p = 0`
//! meridian limit, which is the correct gradient value by continuity.

use nalgebra::Vector3;

/// Largest supported harmonic degree. The diagonal Legendre seed grows like
/// (2l-1)!!, which stays comfortably inside f64 range up to this cap; the
/// surface validator rejects larger degrees.
pub const MAX_DEGREE: u32 = 64;

/// Pointwise sup bound `|Y_{l,m}| <= sqrt((2l+1)/(4 pi))`, from the addition
/// theorem. Used for conservative radius and diameter bounds.
pub fn sup_bound(l: u32) -> f64 {
    ((2.0 * f64::from(l) + 1.0) / (4.0 * std::f64::consts::PI)).sqrt()
}

/// Associated Legendre data at a fixed colatitude, for one (l, |m|) pair:
/// `value = P_l^m(c)`, `theta_deriv = d/dt P_l^m(cos t)`, and
/// `over_sin = P_l^m(c)/s` (only meaningful for m >= 1, where it is a
/// polynomial in c and s and therefore finite at the poles).
struct LegendreTriple {
    value: f64,
    theta_deriv: f64,
    over_sin: f64,
}

/// Evaluates the triple by the standard diagonal-seed upward recurrence,
/// with every relation differentiated in t alongside (s = sin t, c = cos t).
fn legendre_triple(l: u32, m: u32, s: f64, c: f64) -> LegendreTriple {
    debug_assert!(m <= l);
    // Diagonal seed P_m^m = (2m-1)!! s^m and its companions.
    let mut a;
    let mut da;
    let mut aos; // P/s, seeded at s^(m-1)
    if m == 0 {
        a = 1.0;
        da = 0.0;
        aos = f64::NAN; // never used for m = 0
    } else {
        let mut double_fact = 1.0;
        for j in 1..=m {
            double_fact *= f64::from(2 * j - 1);
        }
        let m_f = f64::from(m);
        a = double_fact * s.powi(m as i32);
        da = m_f * double_fact * s.powi(m as i32 - 1) * c;
        aos = double_fact * s.powi(m as i32 - 1);
    }
    if l == m {
        return LegendreTriple {
            value: a,
            theta_deriv: da,
            over_sin: aos,
        };
    }

    // First off-diagonal row: P_{m+1}^m = (2m+1) c P_m^m.
    let f = f64::from(2 * m + 1);
    let mut a_prev = a;
    let mut da_prev = da;
    let mut aos_prev = aos;
    a = f * c * a_prev;
    da = f * (c * da_prev - s * a_prev);
    aos = f * c * aos_prev;
    // Upward in l: (l-m) P_l^m = (2l-1) c P_{l-1}^m - (l+m-1) P_{l-2}^m.
    for row in (m + 2)..=l {
        let lm = f64::from(row - m);
        let c1 = f64::from(2 * row - 1);
        let c2 = f64::from(row + m - 1);
        let a_next = (c1 * c * a - c2 * a_prev) / lm;
        let da_next = (c1 * (c * da - s * a) - c2 * da_prev) / lm;
        let aos_next = (c1 * c * aos - c2 * aos_prev) / lm;
        a_prev = a;
        da_prev = da;
        aos_prev = aos;
        a = a_next;
        da = da_next;
        aos = aos_next;
    }
    LegendreTriple {
        value: a,
        theta_deriv: da,
        over_sin: aos,
    }
}

/// L^2 normalizer including the sqrt(2) of the real m != 0 harmonics.
fn normalizer(l: u32, m_abs: u32) -> f64 {
    let mut ratio = 1.0; // (l-m)! / (l+m)!
    for j in (l - m_abs + 1)..=(l + m_abs) {
        ratio /= f64::from(j);
    }
    let base = ((2.0 * f64::from(l) + 1.0) / (4.0 * std::f64::consts::PI) * ratio).sqrt();
    if m_abs == 0 {
        base
    } else {
        std::f64::consts::SQRT_2 * base
    }
}

/// Value and tangential (spherical) gradient of `Y_{l,m}` at the unit
/// direction `u`. The gradient lies in the tangent plane of the sphere at
/// `u` and is exact up to rounding; no finite differences are involved.
pub fn eval_with_gradient(l: u32, m: i32, u: &Vector3<f64>) -> (f64, Vector3<f64>) {
    let m_abs = m.unsigned_abs();
    debug_assert!(m_abs <= l, "order |{m}| exceeds degree {l}");
    let s = u.x.hypot(u.y);
    let c = u.z;
    // Unit azimuth trig; the pole convention (1, 0) matches atan2(0,0) = 0.
    let (cos_p, sin_p) = if s > 0.0 {
        (u.x / s, u.y / s)
    } else {
        (1.0, 0.0)
    };
    let that = Vector3::new(c * cos_p, c * sin_p, -s);
    let phat = Vector3::new(-sin_p, cos_p, 0.0);

    // cos(m p), sin(m p) by the angle-addition recurrence.
    let (mut cos_mp, mut sin_mp) = (1.0, 0.0);
    for _ in 0..m_abs {
        let next_cos = cos_mp * cos_p - sin_mp * sin_p;
        sin_mp = sin_mp * cos_p + cos_mp * sin_p;
        cos_mp = next_cos;
    }

    let triple = legendre_triple(l, m_abs, s, c);
    let norm = normalizer(l, m_abs);
    let (trig, trig_deriv) = if m >= 0 {
        (cos_mp, -f64::from(m_abs) * sin_mp)
    } else {
        (sin_mp, f64::from(m_abs) * cos_mp)
    };
    let value = norm * triple.value * trig;
    let theta_coef = norm * triple.theta_deriv * trig;
    let azim_coef = if m_abs == 0 {
        0.0
    } else {
        norm * triple.over_sin * trig_deriv
    };
    (value, theta_coef * that + azim_coef * phat)
}
