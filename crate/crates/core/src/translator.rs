//! The convex translating soliton of the power-of-curvature flow.
//!
//! With the outward normal `nu(theta) = (sin theta, -cos theta)`, the
//! translator moving upward with unit speed satisfies `kappa^alpha = cos theta`
//! on `|theta| < pi/2`. Arc length is `ds = cos^(-1/alpha) theta dtheta`, so
//! the half-width `X(theta)` and the depth `Y(theta)` of the cap measured from
//! the tip are
//!
//! ```text
//! X(theta) = int_0^theta cos^(1 - 1/alpha) u du
//! Y(theta) = int_0^theta sin u cos^(-1/alpha) u du = alpha/(1-alpha) (cos^(1-1/alpha) theta - 1)
//! ```
//!
//! `X` stays bounded as `theta -> pi/2`, so the translator lives in a slab of
//! width `w_alpha = 2 X(pi/2)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::error::{FlowError, Result};
use crate::quadrature::integrate;
use crate::report::CheckReport;

/// Absolute tolerance handed to the adaptive quadrature.
pub const QUAD_TOL: f64 = 1e-13;

/// Below this distance from one, `alpha` uses the grim reaper closed forms.
const ALPHA_ONE_EPS: f64 = 1e-12;

pub fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(FlowError::Domain(format!(
            "alpha must lie in (1/2, 1], got {alpha}"
        )));
    }
    Ok(())
}

#[inline]
fn is_grim_reaper(alpha: f64) -> bool {
    (alpha - 1.0).abs() < ALPHA_ONE_EPS
}

/// Exponent `1 - 1/alpha` of the arc-length weight `cos^(1-1/alpha)`.
#[inline]
fn weight_exponent(alpha: f64) -> f64 {
    1.0 - 1.0 / alpha
}

/// Curvature of the unit-speed translator at turning angle `theta`.
pub fn translator_curvature(theta: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(theta.abs() < FRAC_PI_2) {
        return Err(FlowError::Domain(format!(
            "translator curvature needs |theta| < pi/2, got {theta}"
        )));
    }
    Ok(theta.cos().powf(1.0 / alpha))
}

/// Both quadrature routes to the slab width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlabWidth {
    /// Width from the graph integral `int (1+y^2)^(-(3-1/alpha)/2) dy`.
    pub graph_form: f64,
    /// Width from the angle integral `2 int_0^{pi/2} cos^(1-1/alpha)`.
    pub angle_form: f64,
}

impl SlabWidth {
    pub fn value(&self) -> f64 {
        self.angle_form
    }

    pub fn discrepancy(&self) -> f64 {
        (self.graph_form - self.angle_form).abs()
    }
}

/// Width of the slab containing the translator, computed two ways.
pub fn slab_width(alpha: f64) -> Result<SlabWidth> {
    check_alpha(alpha)?;
    if is_grim_reaper(alpha) {
        let pi = std::f64::consts::PI;
        return Ok(SlabWidth {
            graph_form: pi,
            angle_form: pi,
        });
    }
    Ok(SlabWidth {
        graph_form: 2.0 * half_width_graph_form(alpha),
        angle_form: 2.0 * half_width_angle_form(alpha),
    })
}

/// `int_0^inf (1+y^2)^(-p) dy` with `p = (3 - 1/alpha)/2`.
///
/// On `[1, inf)` substitute `y = 1/s` and then `s = v^m` with
/// `m = alpha/(2 alpha - 1)`, which turns the tail into the bounded integral
/// `m int_0^1 (1 + v^(2m))^(-p) dv`.
fn half_width_graph_form(alpha: f64) -> f64 {
    let p = 0.5 * (3.0 - 1.0 / alpha);
    let m = alpha / (2.0 * alpha - 1.0);
    let near = integrate(|y: f64| (1.0 + y * y).powf(-p), 0.0, 1.0, QUAD_TOL);
    let far = integrate(
        |v: f64| m * (1.0 + v.powf(2.0 * m)).powf(-p),
        0.0,
        1.0,
        QUAD_TOL,
    );
    near + far
}

/// `int_0^{pi/2} cos^(1-1/alpha) theta dtheta`.
fn half_width_angle_form(alpha: f64) -> f64 {
    cos_weight_head(alpha) + sin_weight_tail(FRAC_PI_4, alpha)
}

/// `int_0^{pi/4} cos^(1-1/alpha) u du`; the integrand is smooth here.
fn cos_weight_head(alpha: f64) -> f64 {
    let q = weight_exponent(alpha);
    integrate(|u: f64| u.cos().powf(q), 0.0, FRAC_PI_4, QUAD_TOL)
}

/// `int_0^phi sin^(1-1/alpha) u du`, the part of the half-width carried by
/// turning angles within `phi` of `pi/2`.
///
/// The substitution `u = v^m`, `m = alpha/(2 alpha - 1)`, removes the
/// endpoint singularity: the integrand becomes `m (sin(v^m)/v^m)^(1-1/alpha)`.
fn sin_weight_tail(phi: f64, alpha: f64) -> f64 {
    if phi <= 0.0 {
        return 0.0;
    }
    if is_grim_reaper(alpha) {
        return phi;
    }
    let q = weight_exponent(alpha);
    let m = alpha / (2.0 * alpha - 1.0);
    let vmax = phi.powf(1.0 / m);
    integrate(
        |v: f64| {
            if v == 0.0 {
                return m;
            }
            let u = v.powf(m);
            m * (u.sin() / u).powf(q)
        },
        0.0,
        vmax,
        QUAD_TOL,
    )
}

/// Depth `Y(theta)` of the translator below the horizontal line through the
/// point with turning angle `theta`, measured from the tip.
pub fn cap_depth(theta: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(theta.abs() < FRAC_PI_2) {
        return Err(FlowError::Domain(format!(
            "cap depth needs |theta| < pi/2, got {theta}"
        )));
    }
    Ok(depth_from_ln_cos(theta.cos().ln(), alpha))
}

/// `alpha/(1-alpha) (cos^(1-1/alpha) - 1)` written as `-expm1(q L)/q` with
/// `q = 1 - 1/alpha`, `L = ln cos theta`; this form is stable as `alpha -> 1`,
/// where it tends to the grim reaper depth `-ln cos theta`.
fn depth_from_ln_cos(ln_cos: f64, alpha: f64) -> f64 {
    if is_grim_reaper(alpha) {
        return -ln_cos;
    }
    let q = weight_exponent(alpha);
    -(q * ln_cos).exp_m1() / q
}

/// Turning angle at which the translator cap reaches a given depth.
///
/// The angle is carried together with `ln cos theta`. Close to `pi/2` the
/// plain angle loses the information needed to recover the depth (one ulp of
/// `theta` moves the depth by `cos^(-1/alpha) theta` ulps), while the
/// logarithm keeps it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapAngle {
    pub theta: f64,
    pub ln_cos: f64,
}

impl CapAngle {
    /// `pi/2 - theta`, accurate for angles close to `pi/2`.
    pub fn co_angle(&self) -> f64 {
        self.ln_cos.exp().asin()
    }

    pub fn depth(&self, alpha: f64) -> f64 {
        depth_from_ln_cos(self.ln_cos, alpha)
    }

    /// Half-width of the cap at this angle.
    pub fn halfwidth(&self, alpha: f64) -> f64 {
        halfwidth_from_angles(self.theta, self.co_angle(), alpha)
    }
}

/// Invert [`cap_depth`]: the cut angle `theta_R` of a cap of depth `depth`.
pub fn cap_angle(depth: f64, alpha: f64) -> Result<CapAngle> {
    check_alpha(alpha)?;
    if !(depth >= 0.0) || !depth.is_finite() {
        return Err(FlowError::Domain(format!(
            "cap depth must be finite and non-negative, got {depth}"
        )));
    }
    let ln_cos = if is_grim_reaper(alpha) {
        -depth
    } else {
        let x = (1.0 - alpha) / alpha * depth;
        if x == 0.0 {
            0.0
        } else {
            -depth * x.ln_1p() / x
        }
    };
    Ok(CapAngle {
        theta: ln_cos.exp().acos(),
        ln_cos,
    })
}

/// Half-width `X(theta) = int_0^theta cos^(1-1/alpha) u du` of the cap cut at
/// turning angle `theta`; `|theta| = pi/2` gives half the slab width.
pub fn cap_halfwidth(theta: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(theta.abs() <= FRAC_PI_2) {
        return Err(FlowError::Domain(format!(
            "cap half-width needs |theta| <= pi/2, got {theta}"
        )));
    }
    let a = theta.abs();
    Ok(theta.signum() * halfwidth_from_angles(a, FRAC_PI_2 - a, alpha))
}

fn halfwidth_from_angles(theta: f64, co_angle: f64, alpha: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    if is_grim_reaper(alpha) {
        return theta;
    }
    if theta <= FRAC_PI_4 {
        let q = weight_exponent(alpha);
        integrate(|u: f64| u.cos().powf(q), 0.0, theta, QUAD_TOL)
    } else {
        cos_weight_head(alpha) + sin_weight_tail(FRAC_PI_4, alpha)
            - sin_weight_tail(co_angle, alpha)
    }
}

/// Upper bound `(2 alpha/(2 alpha - 1)) tan(theta0)^((1-2 alpha)/alpha)` on the
/// width the cap `|theta| < theta0` misses: `w - 2 X(theta0)`.
pub fn width_deficit_bound(theta0: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(FlowError::Domain(format!(
            "width deficit bound needs alpha in (1/2, 1), got {alpha}"
        )));
    }
    if !(theta0 > 0.0 && theta0 < FRAC_PI_2) {
        return Err(FlowError::Domain(format!(
            "width deficit bound needs theta0 in (0, pi/2), got {theta0}"
        )));
    }
    Ok(2.0 * alpha / (2.0 * alpha - 1.0) * theta0.tan().powf((1.0 - 2.0 * alpha) / alpha))
}

/// Closed-form data of the translator for one exponent.
#[derive(Clone, Debug)]
pub struct TranslatorProfile {
    pub alpha: f64,
    pub w_alpha: f64,
    pub width_discrepancy: f64,
}

/// One row of a sampled profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileSample {
    pub theta: f64,
    pub kappa: f64,
    pub x: f64,
    pub y: f64,
}

impl TranslatorProfile {
    pub fn new(alpha: f64) -> Result<Self> {
        let w = slab_width(alpha)?;
        Ok(Self {
            alpha,
            w_alpha: w.value(),
            width_discrepancy: w.discrepancy(),
        })
    }

    pub fn kappa(&self, theta: f64) -> Result<f64> {
        translator_curvature(theta, self.alpha)
    }

    /// Signed half-width `X(theta)`, odd in `theta`.
    pub fn x(&self, theta: f64) -> Result<f64> {
        cap_halfwidth(theta, self.alpha)
    }

    /// Height `Y(theta)` above the tip, even in `theta`.
    pub fn y(&self, theta: f64) -> Result<f64> {
        cap_depth(theta, self.alpha)
    }

    /// Profile sampled at `count` equally spaced angles strictly inside
    /// `(-pi/2, pi/2)`.
    pub fn table(&self, count: usize) -> Result<Vec<ProfileSample>> {
        if count == 0 {
            return Err(FlowError::Usage("profile needs at least one sample".into()));
        }
        let step = std::f64::consts::PI / (count + 1) as f64;
        (1..=count)
            .map(|i| {
                let theta = -FRAC_PI_2 + step * i as f64;
                Ok(ProfileSample {
                    theta,
                    kappa: self.kappa(theta)?,
                    x: self.x(theta)?,
                    y: self.y(theta)?,
                })
            })
            .collect()
    }
}

/// Agreement required between the two slab-width quadratures.
pub const WIDTH_AGREEMENT_TOL: f64 = 1e-8;
/// Accuracy of the closed forms, relative to `max(1, R)` for depths.
pub const CLOSED_FORM_TOL: f64 = 1e-12;

/// Identities of the translator at one exponent: the two slab-width
/// integrals agree, depth and cut angle invert each other on `R in [0, 1000]`,
/// and at `alpha = 1` everything reduces to the grim reaper.
pub fn translator_checks(alpha: f64) -> Result<Vec<CheckReport>> {
    let w = slab_width(alpha)?;
    let mut width = CheckReport::new(
        &format!("slab_width_dual[alpha={alpha}]"),
        "int (1+y^2)^(-(3-1/alpha)/2) dy = 2 int_0^(pi/2) cos^(1-1/alpha) theta dtheta",
    );
    width.set("w_alpha", w.value());
    width.set("discrepancy", w.discrepancy());
    width.require(WIDTH_AGREEMENT_TOL - w.discrepancy(), 0.0);

    let mut inverse = CheckReport::new(
        &format!("cap_depth_angle_inverse[alpha={alpha}]"),
        "R = int_0^theta_R sin u / cos^(1/alpha) u du is inverted by the cut angle",
    );
    let mut worst = 0.0f64;
    for i in 0..=1000 {
        let r = 1000.0 * (i as f64 / 1000.0).powi(3);
        let back = cap_angle(r, alpha)?.depth(alpha);
        worst = worst.max((back - r).abs() / r.max(1.0));
    }
    for i in 0..200 {
        let theta = 1.55 * i as f64 / 199.0;
        let back = cap_angle(cap_depth(theta, alpha)?, alpha)?.theta;
        worst = worst.max((back - theta).abs());
    }
    inverse.set("max_error", worst);
    inverse.require(CLOSED_FORM_TOL - worst, 0.0);
    let mut out = vec![width, inverse];

    if is_grim_reaper(alpha) {
        let mut reaper = CheckReport::new(
            "grim_reaper_reduction",
            "alpha = 1: w = pi, depth = -ln cos theta, half-width = theta",
        );
        let mut worst = (w.value() - std::f64::consts::PI).abs();
        for i in 0..200 {
            let theta = 1.55 * i as f64 / 199.0;
            worst = worst.max((cap_depth(theta, alpha)? + theta.cos().ln()).abs());
            worst = worst.max((cap_halfwidth(theta, alpha)? - theta).abs());
            worst = worst.max((translator_curvature(theta, alpha)? - theta.cos()).abs());
        }
        reaper.set("max_error", worst);
        reaper.require(CLOSED_FORM_TOL - worst, 0.0);
        out.push(reaper);
    }
    Ok(out)
}
