//! Convex curves represented by their support function on the turning-angle
//! grid.
//!
//! Outward normal `nu(theta) = (sin theta, -cos theta)`, unit tangent
//! `tau(theta) = (cos theta, sin theta)`. The curve point with turning angle
//! `theta` is `gamma = h nu + h' tau` and the radius of curvature is
//! `r = h'' + h`.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{FlowError, Result};
use crate::grid::{d1_into, radius_into, radius_symbol, ThetaGrid};

/// Relative size of the first Fourier mode of `r` tolerated by
/// [`solve_support_from_radius`].
pub const CLOSURE_TOL: f64 = 1e-8;

/// A convex curve at one instant of a flow.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveState {
    pub grid: ThetaGrid,
    pub h: Vec<f64>,
    pub t: f64,
}

/// Scalar diagnostics read off a state.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Diagnostics {
    /// Highest point: `h(pi) = max <gamma, e2>`.
    pub ell: f64,
    /// Depth of the lowest point: `h(0) = -min <gamma, e2>`.
    pub ell_minus: f64,
    /// Rightmost extent `h(pi/2)`.
    pub width_h: f64,
    /// Leftmost extent `h(-pi/2)`.
    pub width_h_minus: f64,
    pub area: f64,
    /// Curvature at the bottom tip, `kappa(0)`.
    pub tip_curvature: f64,
    /// Vertical extent `ell + ell_minus`.
    pub height: f64,
}

/// Result of inverting `r = h'' + h`.
#[derive(Clone, Debug)]
pub struct SupportSolution {
    pub h: Vec<f64>,
    /// Max-norm residual of `d2(h) + h - r`; equals the discarded first mode.
    pub residual: f64,
}

impl CurveState {
    pub fn new(grid: ThetaGrid, h: Vec<f64>, t: f64) -> Result<Self> {
        if h.len() != grid.n() {
            return Err(FlowError::Usage(format!(
                "support function has {} samples on a grid of {}",
                h.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, h, t })
    }

    /// Circle of radius `rho` centered at the origin.
    pub fn circle(grid: ThetaGrid, rho: f64) -> Self {
        let h = vec![rho; grid.n()];
        Self { grid, h, t: 0.0 }
    }

    /// Copy translated by the vector `p`: `h -> h + <p, nu>`.
    pub fn translated(&self, p: [f64; 2]) -> Self {
        let mut out = self.clone();
        for ((h, s), c) in out.h.iter_mut().zip(self.grid.sin()).zip(self.grid.cos()) {
            *h += p[0] * s - p[1] * c;
        }
        out
    }

    /// Steiner point `(1/pi) int h nu`, the translation carried by modes `±1`.
    pub fn steiner_point(&self) -> [f64; 2] {
        let (a, b) = self.grid.mode1_unchecked(&self.h);
        // h = a cos + b sin = <(b, -a), nu>
        [b, -a]
    }

    /// Steiner-centered copy and the offset that was removed.
    pub fn centered(&self) -> (Self, [f64; 2]) {
        let p = self.steiner_point();
        (self.translated([-p[0], -p[1]]), p)
    }

    /// Radius of curvature `r = d2(h) + h`.
    ///
    /// Evaluated on the Steiner-centered support function so that a pure
    /// translation has exactly zero radius.
    pub fn radius_of_curvature(&self) -> Vec<f64> {
        let hc = self.centered().0.h;
        let mut r = vec![0.0; hc.len()];
        radius_into(&hc, self.grid.dtheta(), &mut r);
        r
    }

    pub fn curvature(&self) -> Vec<f64> {
        self.radius_of_curvature().iter().map(|r| 1.0 / r).collect()
    }

    /// Enclosed area `(1/2) quad(h r)`. Along a semi-discrete flow
    /// `dA/dt = quad(h_t r)` holds exactly.
    pub fn area(&self) -> f64 {
        let hc = self.centered().0.h;
        let r = self.radius_of_curvature();
        0.5 * self
            .grid
            .quad_unchecked(&hc.iter().zip(&r).map(|(h, r)| h * r).collect::<Vec<_>>())
    }

    /// Points `gamma_i = h nu + d1(h) tau` of the curve.
    pub fn reconstruct_polyline(&self) -> Result<Vec<[f64; 2]>> {
        let r = self.radius_of_curvature();
        if let Some((node, &min_radius)) = r
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .filter(|(_, v)| **v <= 0.0)
        {
            return Err(FlowError::Convexity { min_radius, node });
        }
        let mut dh = vec![0.0; self.h.len()];
        d1_into(&self.h, self.grid.dtheta(), &mut dh);
        Ok(self
            .h
            .iter()
            .zip(&dh)
            .zip(self.grid.sin().iter().zip(self.grid.cos()))
            .map(|((h, dh), (s, c))| [h * s + dh * c, -h * c + dh * s])
            .collect())
    }

    pub fn diagnostics(&self) -> Diagnostics {
        let g = &self.grid;
        let r = self.radius_of_curvature();
        let ell = self.h[g.idx_pi()];
        let ell_minus = self.h[g.idx_zero()];
        Diagnostics {
            ell,
            ell_minus,
            width_h: self.h[g.idx_half_pi()],
            width_h_minus: self.h[g.idx_minus_half_pi()],
            area: self.area(),
            tip_curvature: 1.0 / r[g.idx_zero()],
            height: ell + ell_minus,
        }
    }

    pub fn min_radius(&self) -> (usize, f64) {
        self.radius_of_curvature()
            .into_iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("grid is never empty")
    }
}

/// Hausdorff distance between two convex bodies: the sup-norm distance of
/// their support functions.
pub fn hausdorff_distance(a: &CurveState, b: &CurveState) -> Result<f64> {
    if a.grid != b.grid {
        return Err(FlowError::Usage(format!(
            "states live on different grids ({} vs {})",
            a.grid.n(),
            b.grid.n()
        )));
    }
    Ok(a.h
        .iter()
        .zip(&b.h)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Invert the discrete `h'' + h = r` mode by mode, with the translation modes `±1` of
/// `h` set to zero.
pub fn solve_support_from_radius(r: &[f64], grid: &ThetaGrid) -> Result<SupportSolution> {
    let n = grid.n();
    if r.len() != n {
        return Err(FlowError::Usage(format!(
            "radius profile has {} samples on a grid of {n}",
            r.len()
        )));
    }
    let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (a, b) = grid.mode1_unchecked(r);
    let mode1 = a.hypot(b);
    let limit = CLOSURE_TOL * scale;
    if mode1 > limit {
        return Err(FlowError::Closure { mode1, limit });
    }

    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = r.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let dt = grid.dtheta();
    for (k, c) in buf.iter_mut().enumerate() {
        let wave = k.min(n - k);
        if wave == 1 {
            *c = Complex::new(0.0, 0.0);
            continue;
        }
        *c /= radius_symbol(wave, dt);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let h: Vec<f64> = buf.iter().map(|c| c.re / n as f64).collect();

    let mut lhs = vec![0.0; n];
    radius_into(&h, dt, &mut lhs);
    let residual = lhs
        .iter()
        .zip(r)
        .map(|(l, r)| (l - r).abs())
        .fold(0.0, f64::max);
    Ok(SupportSolution { h, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> ThetaGrid {
        ThetaGrid::new(n).unwrap()
    }

    /// Smooth strictly convex support function from a few Fourier modes.
    fn smooth_state(g: &ThetaGrid, coeffs: &[(f64, f64)]) -> CurveState {
        let h = g.sample(|t| {
            let mut v = 2.0;
            for (k, (a, b)) in coeffs.iter().enumerate() {
                let k = (k + 2) as f64;
                v += a * (k * t).cos() + b * (k * t).sin();
            }
            v
        });
        CurveState::new(g.clone(), h, 0.0).unwrap()
    }

    fn ellipse(g: &ThetaGrid, a: f64, b: f64) -> CurveState {
        let h = g.sample(|t| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt());
        CurveState::new(g.clone(), h, 0.0).unwrap()
    }

    #[test]
    fn circle_radius_and_point() {
        let g = grid(128);
        let r = CurveState::circle(g.clone(), 1.7).radius_of_curvature();
        assert!(r.iter().all(|v| (v - 1.7).abs() < 1e-12));
        let point = CurveState::new(g.clone(), vec![0.0; 128], 0.0)
            .unwrap()
            .translated([0.3, -1.2]);
        assert!(point.radius_of_curvature().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn solve_examples() {
        let g = grid(256);
        let s = solve_support_from_radius(&vec![1.0; 256], &g).unwrap();
        assert!(s.h.iter().all(|v| (v - 1.0).abs() < 1e-13));
        // (-4 + 1)(-0.1) = 0.3, up to the O(dtheta^2) symbol error of d2
        let r = g.sample(|t| 1.0 + 0.3 * (2.0 * t).cos());
        let s = solve_support_from_radius(&r, &g).unwrap();
        let expect = g.sample(|t| 1.0 - 0.1 * (2.0 * t).cos());
        let err =
            s.h.iter()
                .zip(&expect)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
        assert!(err < g.dtheta().powi(2), "{err}");
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn solve_rejects_open_profiles() {
        let g = grid(128);
        let r = g.sample(|t| 1.0 + 1e-3 * t.cos());
        assert!(matches!(
            solve_support_from_radius(&r, &g),
            Err(FlowError::Closure { .. })
        ));
    }

    #[test]
    fn area_examples() {
        let g = grid(256);
        assert!((CurveState::circle(g.clone(), 1.0).area() - PI).abs() < 1e-10);
        assert!((CurveState::circle(g.clone(), 2.0).area() - 4.0 * PI).abs() < 1e-10);
        let e1 = (ellipse(&g, 2.0, 1.0).area() - 2.0 * PI).abs();
        let e2 = (ellipse(&grid(512), 2.0, 1.0).area() - 2.0 * PI).abs();
        assert!(e1 < 10.0 * g.dtheta().powi(2), "{e1}");
        assert!(e1 / e2 > 3.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn diagnostics_examples() {
        let g = grid(128);
        let d = CurveState::circle(g.clone(), 1.5).diagnostics();
        assert_eq!(d.ell, 1.5);
        assert_eq!(d.width_h, 1.5);
        assert!((d.area - PI * 2.25).abs() < 1e-10);
        assert_eq!(d.height, 3.0);
        assert!((d.tip_curvature - 1.0 / 1.5).abs() < 1e-12);
        let d = CurveState::circle(g, 1.5)
            .translated([0.0, 0.4])
            .diagnostics();
        assert!((d.ell - 1.9).abs() < 1e-14);
        assert!((d.ell_minus - 1.1).abs() < 1e-14);
    }

    #[test]
    fn polyline_examples() {
        let g = grid(128);
        let pts = CurveState::circle(g.clone(), 1.0)
            .reconstruct_polyline()
            .unwrap();
        for (i, p) in pts.iter().enumerate() {
            let t = g.theta(i);
            assert!((p[0] - t.sin()).abs() < 1e-14 && (p[1] + t.cos()).abs() < 1e-14);
        }
        let pts = CurveState::circle(g.clone(), 1.0)
            .translated([0.5, -2.0])
            .reconstruct_polyline()
            .unwrap();
        for p in &pts {
            let d = ((p[0] - 0.5).powi(2) + (p[1] + 2.0).powi(2)).sqrt();
            assert!((d - 1.0).abs() < g.dtheta().powi(2));
        }
    }

    #[test]
    fn polyline_matches_integrated_positions() {
        // gamma(theta_1) - gamma(theta_0) = int (cos u, sin u) r(u) du
        let g = grid(512);
        let s = ellipse(&g, 2.0, 1.0);
        let pts = s.reconstruct_polyline().unwrap();
        let r = s.radius_of_curvature();
        let (mut x, mut y) = (pts[0][0], pts[0][1]);
        let mut worst = 0.0f64;
        for i in 1..g.n() {
            let c = 0.5 * (r[i - 1] * g.cos()[i - 1] + r[i] * g.cos()[i]);
            let sn = 0.5 * (r[i - 1] * g.sin()[i - 1] + r[i] * g.sin()[i]);
            x += c * g.dtheta();
            y += sn * g.dtheta();
            worst = worst.max((x - pts[i][0]).abs()).max((y - pts[i][1]).abs());
        }
        assert!(worst < 20.0 * g.dtheta().powi(2), "{worst}");
    }

    #[test]
    fn polyline_rejects_nonconvex() {
        let g = grid(128);
        let mut s = CurveState::circle(g.clone(), 1.0);
        s.h[10] += 0.1;
        assert!(matches!(
            s.reconstruct_polyline(),
            Err(FlowError::Convexity { .. })
        ));
    }

    #[test]
    fn hausdorff_examples() {
        let g = grid(128);
        let c = CurveState::circle(g.clone(), 1.0);
        assert_eq!(hausdorff_distance(&c, &c).unwrap(), 0.0);
        let c2 = CurveState::circle(g.clone(), 1.25);
        assert!((hausdorff_distance(&c, &c2).unwrap() - 0.25).abs() < 1e-15);
        let shifted = c.translated([0.0, 0.3]);
        assert!((hausdorff_distance(&c, &shifted).unwrap() - 0.3).abs() < 1e-14);
        let other = CurveState::circle(grid(256), 1.0);
        assert!(hausdorff_distance(&c, &other).is_err());
    }

    fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
        // amplitudes small enough that r = 2 + sum (1-k^2)(...) stays positive
        prop::collection::vec((-0.02f64..0.02, -0.02f64..0.02), 1..5)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn round_trip_recovers_centered_support(c in coeffs(), px in -3.0f64..3.0, py in -3.0f64..3.0) {
            let g = grid(128);
            let s = smooth_state(&g, &c).translated([px, py]);
            let back = solve_support_from_radius(&s.radius_of_curvature(), &g).unwrap();
            let centered = s.centered().0;
            let scale = s.h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in back.h.iter().zip(&centered.h) {
                prop_assert!((a - b).abs() <= 1e-10 * scale);
            }
        }

        #[test]
        fn area_is_translation_invariant(c in coeffs(), px in -5.0f64..5.0, py in -5.0f64..5.0) {
            let g = grid(128);
            let s = smooth_state(&g, &c);
            let a0 = s.area();
            let a1 = s.translated([px, py]).area();
            prop_assert!((a0 - a1).abs() <= 1e-10 * a0);
        }

        #[test]
        fn polyline_winds_once(c in coeffs()) {
            let g = grid(128);
            let pts = smooth_state(&g, &c).reconstruct_polyline().unwrap();
            let n = pts.len();
            let mut turning = 0.0;
            for i in 0..n {
                let a = pts[i];
                let b = pts[(i + 1) % n];
                let c = pts[(i + 2) % n];
                let e1 = [b[0] - a[0], b[1] - a[1]];
                let e2 = [c[0] - b[0], c[1] - b[1]];
                turning += (e1[0] * e2[1] - e1[1] * e2[0]).atan2(e1[0] * e2[0] + e1[1] * e2[1]);
            }
            prop_assert!((turning - 2.0 * PI).abs() < 1e-6);
        }

        #[test]
        fn hausdorff_is_a_metric(a in coeffs(), b in coeffs(), c in coeffs()) {
            let g = grid(128);
            let (sa, sb, sc) = (smooth_state(&g, &a), smooth_state(&g, &b), smooth_state(&g, &c));
            let ab = hausdorff_distance(&sa, &sb).unwrap();
            prop_assert_eq!(ab, hausdorff_distance(&sb, &sa).unwrap());
            let ac = hausdorff_distance(&sa, &sc).unwrap();
            let cb = hausdorff_distance(&sc, &sb).unwrap();
            prop_assert!(ab <= ac + cb + 1e-15);
        }
    }
}
