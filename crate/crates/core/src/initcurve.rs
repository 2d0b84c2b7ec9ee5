//! The doubled translator cap: the part of the translator below a horizontal
//! line at depth `R` under its tip, together with its mirror image across
//! that line.
//!
//! The cap is placed with its cut line on the x-axis, bottom tip at
//! `(0, -R)` and mirrored tip at `(0, R)`. The two caps meet at corners
//! `(±X(theta_R), 0)` where `theta_R` is the cut angle. Its support function
//! is known in closed form, so the radius of curvature is taken as the
//! discrete measure `d2(h) + h` of the exact support samples. Near
//! `theta = ±pi/2` the cap's long, almost vertical sides are swept out by an
//! angular interval far thinner than a grid cell, and pointwise samples of
//! `cos^(-1/alpha)` would miss almost all of their length; the discrete
//! measure keeps it.
//!
//! The corners (zero radius on an angular interval) are then lifted to radius
//! `eps` with the C1 cubic floor `r -> eps + r^2/(4 eps)` for `r < 2 eps`,
//! which bounds the initial speed by `eps^(-alpha)` and leaves the rest of
//! the profile untouched.

use std::f64::consts::FRAC_PI_2;

use crate::error::{FlowError, Result};
use crate::geometry::{solve_support_from_radius, CurveState};
use crate::grid::{radius_into, ThetaGrid};
use crate::report::{loglog_slope, CheckReport};
use crate::translator::{cap_angle, cap_depth, cap_halfwidth, check_alpha, slab_width, CapAngle};

/// Minimum number of grid cells the cap half-angle has to span.
pub const MIN_CAP_NODES: f64 = 8.0;

/// Mirror symmetry of a built cap, absolute.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct DoubledCapSpec {
    pub depth: f64,
    pub alpha: f64,
    pub eps: f64,
    pub grid: ThetaGrid,
}

impl DoubledCapSpec {
    /// Spec with the default corner radius `eps = 10 dtheta`.
    pub fn with_default_eps(depth: f64, alpha: f64, grid: ThetaGrid) -> Self {
        let eps = default_eps(&grid);
        Self {
            depth,
            alpha,
            eps,
            grid,
        }
    }

    pub fn cap_angle(&self) -> Result<CapAngle> {
        cap_angle(self.depth, self.alpha)
    }

    /// Check the parameters and return the cut angle.
    pub fn validate(&self) -> Result<CapAngle> {
        check_alpha(self.alpha)?;
        if !(self.depth > 0.0) {
            return Err(FlowError::Spec(format!(
                "cap depth must be positive, got {}",
                self.depth
            )));
        }
        // The translator has radius of curvature >= 1; keeping 2 eps below
        // that guarantees the floor never touches the cap itself.
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(FlowError::Spec(format!(
                "corner radius eps must lie in (0, 1/2), got {}",
                self.eps
            )));
        }
        let angle = self.cap_angle()?;
        if angle.theta < MIN_CAP_NODES * self.grid.dtheta() {
            return Err(FlowError::Resolution(format!(
                "cut angle {:.4} spans fewer than {MIN_CAP_NODES} cells of width {:.4}",
                angle.theta,
                self.grid.dtheta()
            )));
        }
        Ok(angle)
    }
}

pub fn default_eps(grid: &ThetaGrid) -> f64 {
    10.0 * grid.dtheta()
}

/// C1 floor: identity above `2 eps`, `eps + r^2/(4 eps)` below.
#[inline]
pub fn corner_floor(r: f64, eps: f64) -> f64 {
    if r >= 2.0 * eps {
        r
    } else {
        eps + r * r / (4.0 * eps)
    }
}

/// Exact support function of the unmollified doubled cap, evaluated at a
/// turning angle folded into `[0, pi/2]`.
fn cap_support(a: f64, angle: &CapAngle, halfwidth_r: f64, spec: &DoubledCapSpec) -> Result<f64> {
    if a < angle.theta && a < FRAC_PI_2 {
        let x = cap_halfwidth(a, spec.alpha)?;
        let y = cap_depth(a, spec.alpha)? - spec.depth;
        Ok(x * a.sin() - y * a.cos())
    } else {
        // corner point (X(theta_R), 0)
        Ok(halfwidth_r * a.sin())
    }
}

/// Visit each orbit of the node set under the two mirror symmetries once,
/// writing the same value to every image.
fn fill_symmetric<F: FnMut(usize) -> Result<f64>>(
    grid: &ThetaGrid,
    mut value: F,
) -> Result<Vec<f64>> {
    let n = grid.n();
    let mut out = vec![0.0; n];
    // representatives: theta in [0, pi/2], i.e. nodes n/2 ..= 3n/4
    for i in grid.idx_zero()..=grid.idx_half_pi() {
        let v = value(i)?;
        let my = grid.mirror_y_axis(i);
        out[i] = v;
        out[my] = v;
        out[grid.mirror_x_axis(i)] = v;
        out[grid.mirror_x_axis(my)] = v;
    }
    Ok(out)
}

/// Radius-of-curvature profile of the doubled cap before the corner floor.
pub fn raw_radius_profile(spec: &DoubledCapSpec) -> Result<Vec<f64>> {
    let angle = spec.validate()?;
    let grid = &spec.grid;
    let hr = angle.halfwidth(spec.alpha);
    let h = fill_symmetric(grid, |i| cap_support(grid.theta(i), &angle, hr, spec))?;
    let mut r = vec![0.0; grid.n()];
    radius_into(&h, grid.dtheta(), &mut r);
    fill_symmetric(grid, |i| Ok(r[i]))
}

/// Build the mollified doubled cap as a Steiner-centered state at `t = 0`.
pub fn build_doubled_cap(spec: &DoubledCapSpec) -> Result<CurveState> {
    let raw = raw_radius_profile(spec)?;
    let r: Vec<f64> = raw.iter().map(|&v| corner_floor(v, spec.eps)).collect();
    let sol = solve_support_from_radius(&r, &spec.grid)?;
    let h = fill_symmetric(&spec.grid, |i| Ok(sol.h[i]))?;
    CurveState::new(spec.grid.clone(), h, 0.0)
}

/// Sanity of a built cap: exact mirror symmetry, tip height `R` and
/// half-width `X(theta_R)` within `2 eps`, corners floored at `eps`.
pub fn check_construction(spec: &DoubledCapSpec, state: &CurveState) -> Result<CheckReport> {
    let angle = spec.validate()?;
    let g = &spec.grid;
    let mut rep = CheckReport::new(
        &format!("doubled_cap[R={}]", spec.depth),
        "doubled cap: tip at depth R, corners at (+-X(theta_R), 0), symmetric under both reflections",
    );
    let mut asym = 0.0f64;
    for i in 0..g.n() {
        asym = asym.max((state.h[i] - state.h[g.mirror_y_axis(i)]).abs());
        asym = asym.max((state.h[i] - state.h[g.mirror_x_axis(i)]).abs());
    }
    let d = state.diagnostics();
    let hr = angle.halfwidth(spec.alpha);
    let min_r = state.min_radius().1;
    rep.require(SYMMETRY_TOL - asym, 0.0);
    rep.require(2.0 * spec.eps - (d.ell - spec.depth).abs(), 0.0);
    rep.require(2.0 * spec.eps - (d.width_h - hr).abs(), 0.0);
    rep.require(min_r - spec.eps * (1.0 - 1e-9), 0.0);
    rep.set("theta_R", angle.theta);
    rep.set("ell", d.ell);
    rep.set("width_h", d.width_h);
    rep.set("cap_halfwidth", hr);
    rep.set("area", d.area);
    rep.set("min_radius", min_r);
    rep.set("max_asymmetry", asym);
    Ok(rep)
}

/// Initial-data estimates over a sweep of cap depths.
///
/// The half-width deficit `w/2 - h_R` is fitted directly against `R`. The
/// area deficit `2 w R - A_R` tends to a positive constant for
/// `alpha > 2/3`, so its `R`-dependent part is measured through the
/// increments between consecutive depths of a geometric ladder, which scale
/// like `R^p` whatever the sign of `p`.
pub fn initial_data_checks(sweep: &[(f64, CurveState)], alpha: f64) -> Result<Vec<CheckReport>> {
    if sweep.len() < 3 {
        return Err(FlowError::Usage(format!(
            "initial data checks need at least 3 cap depths, got {}",
            sweep.len()
        )));
    }
    check_alpha(alpha)?;
    let w = slab_width(alpha)?.value();
    let depths: Vec<f64> = sweep.iter().map(|(r, _)| *r).collect();
    let diags: Vec<_> = sweep.iter().map(|(_, s)| s.diagnostics()).collect();
    let h_def: Vec<f64> = diags.iter().map(|d| 0.5 * w - d.width_h).collect();
    let a_def: Vec<f64> = depths
        .iter()
        .zip(&diags)
        .map(|(r, d)| 2.0 * w * r - d.area)
        .collect();

    let mut hrep = CheckReport::new(
        "initial_halfwidth_deficit",
        "h_R(T_R) >= w_alpha/2 - C R^((1-2 alpha)/(1-alpha))",
    );
    let mut arep = CheckReport::new(
        "initial_area_deficit",
        "A_R(T_R) >= 2 w_alpha R - C (1 + R^((2-3 alpha)/(1-alpha)))",
    );
    for (i, r) in depths.iter().enumerate() {
        hrep.set(&format!("deficit_R={r}"), h_def[i]);
        arep.set(&format!("deficit_R={r}"), a_def[i]);
    }
    if (alpha - 1.0).abs() < 1e-12 {
        // Both exponents degenerate; the grim reaper deficit decays exponentially.
        hrep.set("exempt_alpha_one", 1.0);
        arep.set("exempt_alpha_one", 1.0);
        return Ok(vec![hrep, arep]);
    }
    let h_expected = (1.0 - 2.0 * alpha) / (1.0 - alpha);
    let a_expected = (2.0 - 3.0 * alpha) / (1.0 - alpha);

    match loglog_slope(&depths, &h_def) {
        Some((slope, icpt)) => {
            hrep.set("expected_exponent", h_expected);
            hrep.set("fitted_exponent", slope);
            hrep.set("fitted_C", icpt.exp());
            hrep.require(0.1 * h_expected.abs() - (slope - h_expected).abs(), 0.0);
        }
        None => hrep.fail(),
    }
    // the strip contains every cap
    for d in &h_def {
        hrep.require(*d, 0.0);
    }

    let inc_x: Vec<f64> = depths.windows(2).map(|p| p[0]).collect();
    let inc_y: Vec<f64> = a_def.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
    if let Some((slope, _)) = loglog_slope(&depths, &a_def) {
        arep.set("raw_deficit_loglog_slope", slope);
    }
    match loglog_slope(&inc_x, &inc_y) {
        Some((slope, _)) if inc_y.len() >= 2 => {
            arep.set("expected_exponent", a_expected);
            arep.set("fitted_exponent", slope);
            arep.require(
                0.1 * a_expected.abs().max(1.0) - (slope - a_expected).abs(),
                0.0,
            );
        }
        _ => arep.fail(),
    }
    Ok(vec![hrep, arep])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hausdorff_distance;
    use crate::quadrature::integrate;
    use std::f64::consts::PI;

    fn spec(depth: f64, alpha: f64, n: usize) -> DoubledCapSpec {
        DoubledCapSpec::with_default_eps(depth, alpha, ThetaGrid::new(n).unwrap())
    }

    #[test]
    fn floor_is_c1() {
        let eps = 0.1;
        assert_eq!(corner_floor(0.0, eps), eps);
        assert_eq!(corner_floor(0.5, eps), 0.5);
        let below = corner_floor(2.0 * eps - 1e-9, eps);
        assert!((below - 2.0 * eps).abs() < 1e-8);
        let slope =
            (corner_floor(2.0 * eps - 1e-6, eps) - corner_floor(2.0 * eps - 2e-6, eps)) / 1e-6;
        assert!((slope - 1.0).abs() < 1e-4);
    }

    #[test]
    fn small_cap_third_angle() {
        let depth = 3.0 * (2f64.cbrt() - 1.0);
        let s = spec(depth, 0.75, 512);
        assert!((s.cap_angle().unwrap().theta - PI / 3.0).abs() < 1e-13);
        let state = build_doubled_cap(&s).unwrap();
        let d = state.diagnostics();
        assert!(
            (d.ell - depth).abs() < 2.0 * s.eps,
            "ell {} vs {depth}",
            d.ell
        );
        assert!((d.ell - d.ell_minus).abs() < 1e-12);
    }

    #[test]
    fn construction_report() {
        for (depth, alpha) in [
            (3.0 * (2f64.cbrt() - 1.0), 0.75),
            (2f64.ln(), 1.0),
            (20.0, 0.75),
            (40.0, 0.6),
        ] {
            let s = spec(depth, alpha, 512);
            let st = build_doubled_cap(&s).unwrap();
            let rep = check_construction(&s, &st).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn grim_reaper_cap() {
        let s = spec(2f64.ln(), 1.0, 512);
        assert!((s.cap_angle().unwrap().theta - PI / 3.0).abs() < 1e-13);
        let d = build_doubled_cap(&s).unwrap().diagnostics();
        assert!((d.width_h - PI / 3.0).abs() < 2.0 * s.eps, "{}", d.width_h);
    }

    #[test]
    fn closure_and_symmetry() {
        for (depth, alpha) in [(0.8, 0.75), (20.0, 0.75), (40.0, 0.6), (5.0, 1.0)] {
            let s = spec(depth, alpha, 256);
            let raw = raw_radius_profile(&s).unwrap();
            let r: Vec<f64> = raw.iter().map(|&v| corner_floor(v, s.eps)).collect();
            let (a, b) = s.grid.fourier_mode(&r, 1).unwrap();
            let scale = r.iter().cloned().fold(0.0, f64::max);
            assert!(a.abs() < 1e-13 * scale && b.abs() < 1e-13 * scale);
            let st = build_doubled_cap(&s).unwrap();
            for i in 0..s.grid.n() {
                assert_eq!(st.h[i], st.h[s.grid.mirror_y_axis(i)]);
                assert_eq!(st.h[i], st.h[s.grid.mirror_x_axis(i)]);
            }
            let rr = st.radius_of_curvature();
            assert!(rr.iter().all(|&v| v >= s.eps * (1.0 - 1e-9)), "min r");
        }
    }

    #[test]
    fn deep_cap_keeps_its_depth_and_width() {
        for (depth, alpha) in [(20.0, 0.75), (80.0, 0.75), (40.0, 0.6)] {
            let s = spec(depth, alpha, 512);
            let d = build_doubled_cap(&s).unwrap().diagnostics();
            let hr = s.cap_angle().unwrap().halfwidth(alpha);
            assert!(
                (d.ell - depth).abs() < 1e-9 * depth,
                "ell {} R {depth}",
                d.ell
            );
            assert!((d.width_h - hr).abs() < 1e-9, "h {} vs {hr}", d.width_h);
            let w = slab_width(alpha).unwrap().value();
            assert!(d.width_h + d.width_h_minus <= w);
        }
    }

    #[test]
    fn interior_radius_matches_translator() {
        let s = spec(3.0, 0.75, 512);
        let raw = raw_radius_profile(&s).unwrap();
        let theta_r = s.cap_angle().unwrap().theta;
        for i in 0..s.grid.n() {
            let t = s.grid.theta(i);
            if t.abs() < theta_r - 2.0 * s.grid.dtheta() {
                let exact = t.cos().powf(-1.0 / 0.75);
                assert!(
                    (raw[i] - exact).abs() < 2.0 * exact * s.grid.dtheta().powi(2) * 10.0,
                    "theta {t}"
                );
            }
        }
    }

    #[test]
    fn area_matches_cap_quadrature() {
        // Twice the area between the cap and the cut line, by quadrature over
        // the profile: int_{-X}^{X} (R - y(x)) dx = int (R - Y(u)) X'(u) du.
        let (depth, alpha) = (3.0, 0.75);
        let s = spec(depth, alpha, 512);
        let theta_r = s.cap_angle().unwrap().theta;
        let half = integrate(
            |u: f64| (depth - cap_depth(u, alpha).unwrap()) * u.cos().powf(1.0 - 1.0 / alpha),
            0.0,
            theta_r,
            1e-12,
        );
        let exact = 4.0 * half;
        let a = build_doubled_cap(&s).unwrap().area();
        // corner arcs of radius eps add O(eps) area
        assert!((a - exact).abs() < 4.0 * s.eps, "{a} vs {exact}");
        let unmollified = {
            let raw = raw_radius_profile(&s).unwrap();
            let h = solve_support_from_radius(&raw, &s.grid).unwrap().h;
            CurveState::new(s.grid.clone(), h, 0.0).unwrap().area()
        };
        assert!(
            (unmollified - exact).abs() < 50.0 * s.grid.dtheta().powi(2),
            "{unmollified} vs {exact}"
        );
    }

    #[test]
    fn mollification_is_cauchy_in_eps() {
        let grid = ThetaGrid::new(1024).unwrap();
        let build = |eps| {
            build_doubled_cap(&DoubledCapSpec {
                depth: 1.0,
                alpha: 0.75,
                eps,
                grid: grid.clone(),
            })
            .unwrap()
        };
        let (a, b, c) = (build(0.2), build(0.1), build(0.05));
        let d1 = hausdorff_distance(&a, &b).unwrap();
        let d2 = hausdorff_distance(&b, &c).unwrap();
        assert!(d2 < d1, "{d2} !< {d1}");
    }

    #[test]
    fn construction_errors() {
        let g = ThetaGrid::new(128).unwrap();
        let bad_eps = DoubledCapSpec {
            depth: 3.0,
            alpha: 0.75,
            eps: 0.7,
            grid: g.clone(),
        };
        assert!(matches!(
            build_doubled_cap(&bad_eps),
            Err(FlowError::Spec(_))
        ));
        let tiny = DoubledCapSpec {
            depth: 0.01,
            alpha: 0.75,
            eps: 0.1,
            grid: g.clone(),
        };
        assert!(matches!(
            build_doubled_cap(&tiny),
            Err(FlowError::Resolution(_))
        ));
        let bad_alpha = DoubledCapSpec {
            depth: 3.0,
            alpha: 0.4,
            eps: 0.1,
            grid: g,
        };
        assert!(matches!(
            build_doubled_cap(&bad_alpha),
            Err(FlowError::Domain(_))
        ));
    }

    #[test]
    fn initial_data_needs_three_depths() {
        let s = spec(20.0, 0.75, 256);
        let st = build_doubled_cap(&s).unwrap();
        let sweep = vec![(20.0, st.clone()), (20.0, st)];
        assert!(matches!(
            initial_data_checks(&sweep, 0.75),
            Err(FlowError::Usage(_))
        ));
    }

    #[test]
    fn initial_data_alpha_one_is_exempt() {
        let sweep: Vec<_> = [5.0, 10.0, 20.0]
            .iter()
            .map(|&r| (r, build_doubled_cap(&spec(r, 1.0, 256)).unwrap()))
            .collect();
        let reps = initial_data_checks(&sweep, 1.0).unwrap();
        assert!(reps
            .iter()
            .all(|r| r.pass && r.fitted.contains_key("exempt_alpha_one")));
    }
}
