//! Explicit time integration of `h_t = -(h'' + h)^(-alpha)`, the
//! power-of-curvature flow written for the support function.
//!
//! Linearizing the right-hand side gives the diffusion coefficient
//! `alpha kappa^(alpha+1)`, which sets the explicit time step.

use crate::error::{FlowError, Result};
use crate::geometry::{CurveState, Diagnostics};
use crate::grid::{d2_into, radius_into, ThetaGrid};
use crate::report::CheckReport;
use crate::translator::check_alpha;

/// Rejections allowed for a single step before the run is abandoned.
pub const MAX_REJECTIONS: usize = 40;

/// Relative area increase over one step tolerated before the scheme is
/// declared broken.
const AREA_MONOTONE_TOL: f64 = 1e-12;

/// Relative accuracy required of the circle oracle.
pub const CIRCLE_TOL: f64 = 1e-3;
const CIRCLE_AREA_FLOOR: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Integrator {
    ForwardEuler,
    Midpoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowParams {
    pub alpha: f64,
    pub cfl_safety: f64,
    /// The run stops once the area falls below this fraction of the initial area.
    pub area_stop_fraction: f64,
    /// Flow time between stored snapshots.
    pub snapshot_interval: f64,
    /// Flow time between recorded diagnostics rows.
    pub record_interval: f64,
    pub max_steps: usize,
    pub integrator: Integrator,
}

impl FlowParams {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            cfl_safety: 0.4,
            area_stop_fraction: 1e-3,
            snapshot_interval: 0.5,
            record_interval: 0.05,
            max_steps: 50_000_000,
            integrator: Integrator::ForwardEuler,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(FlowError::Usage(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("snapshot_interval", self.snapshot_interval)?;
        positive("record_interval", self.record_interval)?;
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(FlowError::Usage(format!(
                "cfl_safety must lie in (0, 1), got {}",
                self.cfl_safety
            )));
        }
        if !(self.area_stop_fraction > 0.0 && self.area_stop_fraction < 1.0) {
            return Err(FlowError::Usage(format!(
                "area_stop_fraction must lie in (0, 1), got {}",
                self.area_stop_fraction
            )));
        }
        if self.max_steps == 0 {
            return Err(FlowError::Usage("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Time series of a run, with times shifted so that extinction is at `t = 0`.
#[derive(Clone, Debug)]
pub struct FlowTrace {
    pub alpha: f64,
    pub times: Vec<f64>,
    pub diagnostics: Vec<Diagnostics>,
    pub snapshots: Vec<CurveState>,
    /// Extrapolated lifetime of the run; the initial curve sits at `-t_extinction`.
    pub t_extinction: f64,
    /// Position of the extinction point in the frame of the initial curve.
    pub extinction_point: [f64; 2],
    /// Largest deviation of the final area samples from the fitted extinction law.
    pub fit_residual: f64,
    pub steps: usize,
    pub rejections: usize,
    pub min_dt: f64,
    pub max_dt: f64,
    /// False when `max_steps` ran out before the area target.
    pub complete: bool,
}

impl FlowTrace {
    /// Renormalized initial time, `T_R = -t_extinction`.
    pub fn initial_time(&self) -> f64 {
        -self.t_extinction
    }

    pub fn ensure_complete(&self) -> Result<()> {
        if self.complete {
            Ok(())
        } else {
            let a0 = self.diagnostics.first().map(|d| d.area).unwrap_or(1.0);
            let a1 = self.diagnostics.last().map(|d| d.area).unwrap_or(1.0);
            Err(FlowError::IncompleteRun {
                steps: self.steps,
                area_fraction: a1 / a0,
            })
        }
    }
}

/// Exact radius of a circle flowing to extinction at time `t_ext`:
/// `rho(t) = ((1 + alpha)(t_ext - t))^(1/(1+alpha))`.
pub fn circle_radius(t: f64, t_ext: f64, alpha: f64) -> f64 {
    ((1.0 + alpha) * (t_ext - t))
        .max(0.0)
        .powf(1.0 / (1.0 + alpha))
}

/// Largest stable explicit step: `cfl dtheta^2 / (2 alpha max kappa^(alpha+1))`.
pub fn stable_dt(state: &CurveState, params: &FlowParams) -> Result<f64> {
    let (node, min_radius) = state.min_radius();
    if !(min_radius > 0.0) {
        return Err(FlowError::Convexity { min_radius, node });
    }
    Ok(dt_from_min_radius(min_radius, state.grid.dtheta(), params))
}

#[inline]
fn dt_from_min_radius(min_r: f64, dtheta: f64, params: &FlowParams) -> f64 {
    params.cfl_safety * dtheta * dtheta / (2.0 * params.alpha) * min_r.powf(1.0 + params.alpha)
}

/// Normal speed `r^(-alpha)`, with `powf` avoided for the common exponents.
fn speed_into(r: &[f64], alpha: f64, out: &mut [f64]) {
    if alpha == 1.0 {
        for (s, r) in out.iter_mut().zip(r) {
            *s = 1.0 / r;
        }
    } else if alpha == 0.75 {
        for (s, r) in out.iter_mut().zip(r) {
            let q = r.sqrt();
            *s = 1.0 / (q * q.sqrt());
        }
    } else {
        for (s, r) in out.iter_mut().zip(r) {
            *s = r.powf(-alpha);
        }
    }
}

/// Radius, speed and area of one support function.
struct Eval {
    r: Vec<f64>,
    speed: Vec<f64>,
    min_r: f64,
    min_idx: usize,
    area: f64,
}

impl Eval {
    fn new(n: usize) -> Self {
        Self {
            r: vec![0.0; n],
            speed: vec![0.0; n],
            min_r: 0.0,
            min_idx: 0,
            area: 0.0,
        }
    }

    /// `h` must already be Steiner-centered.
    fn compute(&mut self, h: &[f64], dtheta: f64, alpha: f64) {
        radius_into(h, dtheta, &mut self.r);
        let mut min_r = f64::INFINITY;
        let mut min_idx = 0;
        let mut area = 0.0;
        for (i, (r, hi)) in self.r.iter().zip(h).enumerate() {
            area += hi * r;
            if *r < min_r {
                min_r = *r;
                min_idx = i;
            }
        }
        self.min_r = min_r;
        self.min_idx = min_idx;
        self.area = 0.5 * dtheta * area;
        if min_r > 0.0 {
            speed_into(&self.r, alpha, &mut self.speed);
        }
    }

    fn diagnostics(&self, h: &[f64], grid: &ThetaGrid) -> Diagnostics {
        let ell = h[grid.idx_pi()];
        let ell_minus = h[grid.idx_zero()];
        Diagnostics {
            ell,
            ell_minus,
            width_h: h[grid.idx_half_pi()],
            width_h_minus: h[grid.idx_minus_half_pi()],
            area: self.area,
            tip_curvature: 1.0 / self.r[grid.idx_zero()],
            height: ell + ell_minus,
        }
    }
}

/// Remove modes `±1` of `h` in place; returns the removed translation.
fn center_in_place(h: &mut [f64], grid: &ThetaGrid) -> [f64; 2] {
    let (a, b) = grid.mode1_unchecked(h);
    if a == 0.0 && b == 0.0 {
        return [0.0, 0.0];
    }
    for ((v, c), s) in h.iter_mut().zip(grid.cos()).zip(grid.sin()) {
        *v -= a * c + b * s;
    }
    [b, -a]
}

/// Workspace for repeated steps on one grid.
struct Stepper {
    grid: ThetaGrid,
    alpha: f64,
    integrator: Integrator,
    cur: Eval,
    next: Eval,
    stage: Eval,
    h_next: Vec<f64>,
    h_stage: Vec<f64>,
}

impl Stepper {
    fn new(grid: &ThetaGrid, params: &FlowParams) -> Self {
        let n = grid.n();
        Self {
            grid: grid.clone(),
            alpha: params.alpha,
            integrator: params.integrator,
            cur: Eval::new(n),
            next: Eval::new(n),
            stage: Eval::new(n),
            h_next: vec![0.0; n],
            h_stage: vec![0.0; n],
        }
    }

    fn prime(&mut self, h: &[f64]) {
        self.cur.compute(h, self.grid.dtheta(), self.alpha);
    }

    /// Propose `h_next` from `h` (whose evaluation is in `cur`); returns the
    /// translation removed by re-centering.
    fn propose(&mut self, h: &[f64], dt: f64) -> Option<[f64; 2]> {
        let dtheta = self.grid.dtheta();
        match self.integrator {
            Integrator::ForwardEuler => {
                for ((o, hi), s) in self.h_next.iter_mut().zip(h).zip(&self.cur.speed) {
                    *o = hi - dt * s;
                }
            }
            Integrator::Midpoint => {
                for ((o, hi), s) in self.h_stage.iter_mut().zip(h).zip(&self.cur.speed) {
                    *o = hi - 0.5 * dt * s;
                }
                center_in_place(&mut self.h_stage, &self.grid);
                self.stage.compute(&self.h_stage, dtheta, self.alpha);
                if !(self.stage.min_r > 0.0) {
                    return None;
                }
                for ((o, hi), s) in self.h_next.iter_mut().zip(h).zip(&self.stage.speed) {
                    *o = hi - dt * s;
                }
            }
        }
        let shift = center_in_place(&mut self.h_next, &self.grid);
        self.next.compute(&self.h_next, dtheta, self.alpha);
        if self.next.min_r > 0.0 {
            Some(shift)
        } else {
            None
        }
    }

    fn accept(&mut self, h: &mut Vec<f64>) {
        std::mem::swap(h, &mut self.h_next);
        std::mem::swap(&mut self.cur, &mut self.next);
    }
}

/// One explicit step of size `dt`.
pub fn step(state: &CurveState, dt: f64, params: &FlowParams) -> Result<CurveState> {
    let (centered, offset) = state.centered();
    let mut stepper = Stepper::new(&state.grid, params);
    stepper.prime(&centered.h);
    if !(stepper.cur.min_r > 0.0) {
        return Err(FlowError::Convexity {
            min_radius: stepper.cur.min_r,
            node: stepper.cur.min_idx,
        });
    }
    match stepper.propose(&centered.h, dt) {
        Some(shift) => {
            let out = CurveState::new(state.grid.clone(), stepper.h_next.clone(), state.t + dt)?;
            Ok(out.translated([offset[0] + shift[0], offset[1] + shift[1]]))
        }
        None => Err(FlowError::StepRejected {
            dt,
            min_radius: stepper.next.min_r.min(stepper.stage.min_r),
        }),
    }
}

/// Flow to (near) extinction and shift time so that extinction is at `t = 0`.
pub fn flow_to_extinction(state0: &CurveState, params: &FlowParams) -> Result<FlowTrace> {
    params.validate()?;
    let grid = state0.grid.clone();
    let dtheta = grid.dtheta();
    let (start, mut offset) = state0.centered();
    let mut h = start.h;
    let mut t = state0.t;
    let t0 = t;

    let mut stepper = Stepper::new(&grid, params);
    stepper.prime(&h);
    if !(stepper.cur.min_r > 0.0) {
        return Err(FlowError::Convexity {
            min_radius: stepper.cur.min_r,
            node: stepper.cur.min_idx,
        });
    }
    let area0 = stepper.cur.area;
    let area_stop = params.area_stop_fraction * area0;
    let fit_start = 10.0 * area_stop;

    let mut times = vec![t];
    let mut diagnostics = vec![stepper.cur.diagnostics(&h, &grid)];
    let mut snapshots = vec![CurveState::new(grid.clone(), h.clone(), t)?];
    let mut next_record = t + params.record_interval;
    let mut next_snapshot = t + params.snapshot_interval;
    let mut fit_t = Vec::new();
    let mut fit_a = Vec::new();
    let mut fit_offset = Vec::new();

    let mut steps = 0;
    let mut rejections = 0;
    let mut min_dt = f64::INFINITY;
    let mut max_dt = 0.0f64;
    let mut complete = false;

    while steps < params.max_steps {
        if stepper.cur.area <= area_stop {
            complete = true;
            break;
        }
        if stepper.cur.area <= fit_start {
            fit_t.push(t);
            fit_a.push(stepper.cur.area);
            fit_offset.push(offset);
        }
        let mut dt = dt_from_min_radius(stepper.cur.min_r, dtheta, params);
        let mut tries = 0;
        let shift = loop {
            if let Some(shift) = stepper.propose(&h, dt) {
                break shift;
            }
            tries += 1;
            rejections += 1;
            if tries > MAX_REJECTIONS {
                return Err(FlowError::Scheme(format!(
                    "step at t = {t} rejected {MAX_REJECTIONS} times"
                )));
            }
            dt *= 0.5;
        };
        let prev_area = stepper.cur.area;
        stepper.accept(&mut h);
        offset = [offset[0] + shift[0], offset[1] + shift[1]];
        if stepper.cur.area > prev_area * (1.0 + AREA_MONOTONE_TOL) {
            return Err(FlowError::Scheme(format!(
                "area increased from {prev_area} to {} at t = {t}",
                stepper.cur.area
            )));
        }
        t += dt;
        steps += 1;
        min_dt = min_dt.min(dt);
        max_dt = max_dt.max(dt);

        if t >= next_record {
            times.push(t);
            diagnostics.push(stepper.cur.diagnostics(&h, &grid));
            next_record = t + params.record_interval;
        }
        if t >= next_snapshot {
            snapshots.push(CurveState::new(grid.clone(), h.clone(), t)?);
            next_snapshot = t + params.snapshot_interval;
        }
    }
    if times.last() != Some(&t) {
        times.push(t);
        diagnostics.push(stepper.cur.diagnostics(&h, &grid));
    }
    if snapshots.last().map(|s| s.t) != Some(t) {
        snapshots.push(CurveState::new(grid.clone(), h.clone(), t)?);
    }
    if fit_t.len() < 2 {
        // Fall back to the recorded diagnostics when the run never reached the
        // fit window.
        let k = times.len().min(20);
        fit_t = times[times.len() - k..].to_vec();
        fit_a = diagnostics[diagnostics.len() - k..]
            .iter()
            .map(|d| d.area)
            .collect();
        fit_offset = vec![offset; k];
    }

    let (t_ext_abs, fit_residual) = extrapolate_extinction(&fit_t, &fit_a, params.alpha);
    let extinction_point = extrapolate_offset(&fit_t, &fit_offset, t_ext_abs).unwrap_or(offset);

    for time in times.iter_mut() {
        *time -= t_ext_abs;
    }
    for s in snapshots.iter_mut() {
        s.t -= t_ext_abs;
    }

    Ok(FlowTrace {
        alpha: params.alpha,
        times,
        diagnostics,
        snapshots,
        t_extinction: t_ext_abs - t0,
        extinction_point,
        fit_residual,
        steps,
        rejections,
        min_dt,
        max_dt,
        complete,
    })
}

/// Fit `A^((1+alpha)/2)` linearly in `t` (the shrinking-circle law
/// `A = c (T - t)^(2/(1+alpha))`) and return the zero crossing `T` together
/// with the largest relative deviation of the samples from the fit.
pub fn extrapolate_extinction(t: &[f64], area: &[f64], alpha: f64) -> (f64, f64) {
    let p = 0.5 * (1.0 + alpha);
    let y: Vec<f64> = area.iter().map(|a| a.powf(p)).collect();
    let (slope, icpt) = crate::report::linear_fit(t, &y);
    let t_ext = -icpt / slope;
    let scale = y.iter().cloned().fold(0.0, f64::max);
    let resid = t
        .iter()
        .zip(&y)
        .map(|(ti, yi)| (icpt + slope * ti - yi).abs() / scale)
        .fold(0.0, f64::max);
    (t_ext, resid)
}

fn extrapolate_offset(t: &[f64], off: &[[f64; 2]], t_ext: f64) -> Option<[f64; 2]> {
    if t.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = off.iter().map(|o| o[0]).collect();
    let ys: Vec<f64> = off.iter().map(|o| o[1]).collect();
    let (sx, cx) = crate::report::linear_fit(t, &xs);
    let (sy, cy) = crate::report::linear_fit(t, &ys);
    if !(sx.is_finite() && sy.is_finite()) {
        return None;
    }
    Some([cx + sx * t_ext, cy + sy * t_ext])
}

/// Unit circle flowed to extinction against `rho(t) = ((1+alpha)(T - t))^(1/(1+alpha))`
/// with `T = 1/(1+alpha)`.
///
/// Radii are compared while the area is at least 1% of the initial area.
pub fn circle_oracle(n: usize, params: &FlowParams) -> Result<CheckReport> {
    let alpha = params.alpha;
    let grid = ThetaGrid::new(n)?;
    let trace = flow_to_extinction(&CurveState::circle(grid, 1.0), params)?;
    trace.ensure_complete()?;
    let exact_t = 1.0 / (1.0 + alpha);
    let mut rep = CheckReport::new(
        &format!("circle_oracle[alpha={alpha}]"),
        "rho(t) = ((1 + alpha)(T - t))^(1/(1 + alpha)), T = 1/(1 + alpha)",
    );
    let a0 = trace.diagnostics[0].area;
    let mut worst = 0.0f64;
    for (t, d) in trace.times.iter().zip(&trace.diagnostics) {
        if d.area < CIRCLE_AREA_FLOOR * a0 {
            break;
        }
        let rho = circle_radius(t + trace.t_extinction, exact_t, alpha);
        worst = worst.max((d.ell / rho - 1.0).abs());
    }
    let t_err = (trace.t_extinction / exact_t - 1.0).abs();
    rep.require(CIRCLE_TOL - worst, 0.0);
    rep.require(CIRCLE_TOL - t_err, 0.0);
    rep.set("radius_rel_error", worst);
    rep.set("t_extinction", trace.t_extinction);
    rep.set("t_extinction_rel_error", t_err);
    rep.set("steps", trace.steps as f64);
    Ok(rep)
}

/// Flow two nested curves with a common time step and track
/// `min (h_outer - h_inner)` until the inner one has nearly vanished.
pub fn check_avoidance(
    inner: &CurveState,
    outer: &CurveState,
    params: &FlowParams,
    label: &str,
) -> Result<CheckReport> {
    params.validate()?;
    if inner.grid != outer.grid {
        return Err(FlowError::Usage("nested curves must share a grid".into()));
    }
    let gap = |a: &CurveState, b: &CurveState| {
        a.h.iter()
            .zip(&b.h)
            .map(|(i, o)| o - i)
            .fold(f64::INFINITY, f64::min)
    };
    let mut rep = CheckReport::new(
        &format!("avoidance[{label}]"),
        "nested convex curves stay nested",
    );
    let mut a = inner.clone();
    let mut b = outer.clone();
    let stop = params.area_stop_fraction * a.area();
    let mut worst = gap(&a, &b);
    let mut steps = 0usize;
    while a.area() > stop && steps < params.max_steps {
        let mut dt = stable_dt(&a, params)?.min(stable_dt(&b, params)?);
        let mut tries = 0;
        let (na, nb) = loop {
            match (step(&a, dt, params), step(&b, dt, params)) {
                (Ok(x), Ok(y)) => break (x, y),
                (Err(FlowError::StepRejected { .. }), _)
                | (_, Err(FlowError::StepRejected { .. }))
                    if tries < MAX_REJECTIONS =>
                {
                    dt *= 0.5;
                    tries += 1;
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        };
        a = na;
        b = nb;
        worst = worst.min(gap(&a, &b));
        steps += 1;
    }
    rep.require(worst, 0.0);
    rep.set("min_gap", worst);
    rep.set("steps", steps as f64);
    Ok(rep)
}

/// Consistency of the support-function evolution with the curvature
/// equation `kappa_t = kappa^2 (kappa^alpha)'' + kappa^(alpha+2)`.
///
/// For each consecutive snapshot pair, `kappa_t` is a difference quotient and
/// the right-hand side is averaged over the pair. The max-norm residual is
/// normalized by `max kappa^(alpha+2)`; the largest value over all pairs is
/// returned.
pub fn kappa_gauge_residual(trace: &FlowTrace) -> Result<f64> {
    kappa_gauge_residual_of(&trace.snapshots, trace.alpha)
}

pub fn kappa_gauge_residual_of(snapshots: &[CurveState], alpha: f64) -> Result<f64> {
    if snapshots.len() < 2 {
        return Err(FlowError::Usage(format!(
            "gauge residual needs at least 2 snapshots, got {}",
            snapshots.len()
        )));
    }
    let rhs = |s: &CurveState| -> (Vec<f64>, Vec<f64>, f64) {
        let kappa = s.curvature();
        let ka: Vec<f64> = kappa.iter().map(|k| k.powf(alpha)).collect();
        let mut dd = vec![0.0; ka.len()];
        d2_into(&ka, s.grid.dtheta(), &mut dd);
        let rhs: Vec<f64> = kappa
            .iter()
            .zip(&dd)
            .map(|(k, d)| k * k * d + k.powf(alpha + 2.0))
            .collect();
        let scale = kappa
            .iter()
            .map(|k| k.powf(alpha + 2.0))
            .fold(0.0, f64::max);
        (kappa, rhs, scale)
    };
    let mut worst = 0.0f64;
    let mut prev = rhs(&snapshots[0]);
    for pair in snapshots.windows(2) {
        let cur = rhs(&pair[1]);
        let dt = pair[1].t - pair[0].t;
        if dt <= 0.0 {
            return Err(FlowError::Usage(
                "snapshots must have increasing times".into(),
            ));
        }
        let scale = prev.2.max(cur.2);
        for i in 0..cur.0.len() {
            let kt = (cur.0[i] - prev.0[i]) / dt;
            let r = 0.5 * (cur.1[i] + prev.1[i]);
            worst = worst.max((kt - r).abs() / scale);
        }
        prev = cur;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> ThetaGrid {
        ThetaGrid::new(n).unwrap()
    }

    #[test]
    fn circle_oracle_passes_at_256() {
        let rep = circle_oracle(256, &FlowParams::new(1.0)).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!((rep.fitted["t_extinction"] - 0.5).abs() < 5e-4);
    }

    #[test]
    fn concentric_circles_stay_nested() {
        let g = grid(128);
        let p = FlowParams::new(0.75);
        let rep = check_avoidance(
            &CurveState::circle(g.clone(), 1.0),
            &CurveState::circle(g.clone(), 1.1),
            &p,
            "circles",
        )
        .unwrap();
        assert!(rep.pass);
        assert!(rep.fitted["min_gap"] > 0.0);
        // crossing pair
        let shifted = CurveState::circle(g.clone(), 1.0).translated([0.3, 0.0]);
        let rep = check_avoidance(&CurveState::circle(g, 1.0), &shifted, &p, "crossing").unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn stable_dt_circle_scaling() {
        let p = FlowParams::new(0.75);
        let g = grid(256);
        let d1 = stable_dt(&CurveState::circle(g.clone(), 1.0), &p).unwrap();
        let expect = p.cfl_safety * g.dtheta().powi(2) / (2.0 * 0.75);
        assert!((d1 - expect).abs() < 1e-12 * expect);
        let d2 = stable_dt(&CurveState::circle(g.clone(), 2.0), &p).unwrap();
        assert!((d2 / d1 - 2f64.powf(1.75)).abs() < 1e-9);
        let mut bad = CurveState::circle(g, 1.0);
        bad.h[3] += 0.5;
        assert!(matches!(
            stable_dt(&bad, &p),
            Err(FlowError::Convexity { .. })
        ));
    }

    #[test]
    fn circle_step_stays_round() {
        let p = FlowParams::new(0.6);
        let s = CurveState::circle(grid(128), 1.3);
        let dt = stable_dt(&s, &p).unwrap();
        let next = step(&s, dt, &p).unwrap();
        let expect = 1.3 - dt * 1.3f64.powf(-0.6);
        assert!(next.h.iter().all(|v| (v - expect).abs() < 1e-13));
        assert!((next.t - dt).abs() < 1e-18);
    }

    #[test]
    fn translator_piece_translates() {
        // Support function of the translator cap near its tip; one step
        // lowers it by dt cos theta, i.e. moves the curve up by dt.
        let g = grid(512);
        let alpha = 0.75;
        let theta_max = 1.0;
        let spec = crate::initcurve::DoubledCapSpec::with_default_eps(5.0, alpha, g.clone());
        let s = crate::initcurve::build_doubled_cap(&spec).unwrap();
        let p = FlowParams::new(alpha);
        let dt = 1e-5;
        let next = step(&s, dt, &p).unwrap();
        for i in 0..g.n() {
            let t = g.theta(i);
            if t.abs() <= theta_max {
                let drop = s.h[i] - next.h[i];
                assert!(
                    (drop - dt * t.cos()).abs() < dt * 20.0 * g.dtheta().powi(2),
                    "theta {t}"
                );
            }
        }
    }

    #[test]
    fn step_rejected_when_convexity_is_lost() {
        let g = grid(128);
        let p = FlowParams::new(0.75);
        let h = g.sample(|t| 1.0 + 0.06 * (4.0 * t).cos());
        let s = CurveState::new(g, h, 0.0).unwrap();
        assert!(matches!(
            step(&s, 10.0, &p),
            Err(FlowError::StepRejected { .. })
        ));
    }

    #[test]
    fn step_preserves_reflection_symmetry() {
        let g = grid(128);
        let h = g.sample(|t| 1.0 + 0.05 * (2.0 * t).cos() + 0.01 * (3.0 * t).cos());
        let s = CurveState::new(g.clone(), h, 0.0).unwrap();
        let p = FlowParams::new(0.75);
        let next = step(&s, stable_dt(&s, &p).unwrap(), &p).unwrap();
        for i in 1..g.n() {
            assert!((next.h[i] - next.h[g.mirror_y_axis(i)]).abs() < 1e-14);
        }
    }

    #[test]
    fn circle_extinction_time() {
        for (alpha, integrator) in [
            (0.75, Integrator::ForwardEuler),
            (1.0, Integrator::ForwardEuler),
            (0.6, Integrator::Midpoint),
        ] {
            let mut p = FlowParams::new(alpha);
            p.integrator = integrator;
            let tr = flow_to_extinction(&CurveState::circle(grid(128), 1.0), &p).unwrap();
            assert!(tr.complete);
            let exact = 1.0 / (1.0 + alpha);
            assert!(
                (tr.t_extinction - exact).abs() < 1e-3 * exact,
                "{alpha}: {}",
                tr.t_extinction
            );
            assert!(tr.times.iter().all(|&t| t < 0.0));
            assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
            assert!(tr.extinction_point[0].abs() < 1e-12 && tr.extinction_point[1].abs() < 1e-12);
        }
    }

    #[test]
    fn translated_circle_extinguishes_at_its_center() {
        let p = FlowParams::new(0.75);
        let s = CurveState::circle(grid(128), 1.0).translated([0.7, -0.2]);
        let tr = flow_to_extinction(&s, &p).unwrap();
        assert!((tr.extinction_point[0] - 0.7).abs() < 1e-9);
        assert!((tr.extinction_point[1] + 0.2).abs() < 1e-9);
    }

    #[test]
    fn incomplete_runs_are_flagged() {
        let mut p = FlowParams::new(0.75);
        p.max_steps = 10;
        let tr = flow_to_extinction(&CurveState::circle(grid(128), 1.0), &p).unwrap();
        assert!(!tr.complete);
        assert!(matches!(
            tr.ensure_complete(),
            Err(FlowError::IncompleteRun { .. })
        ));
    }

    #[test]
    fn speed_fast_paths_match_powf() {
        let r = [1e-3, 0.37, 1.0, 2.5, 4e4];
        for alpha in [0.75, 1.0] {
            let mut out = [0.0; 5];
            speed_into(&r, alpha, &mut out);
            for (s, r) in out.iter().zip(&r) {
                assert!((s / r.powf(-alpha) - 1.0).abs() < 4.0 * f64::EPSILON);
            }
        }
    }

    #[test]
    fn params_validation() {
        let mut p = FlowParams::new(0.75);
        assert!(p.validate().is_ok());
        p.cfl_safety = 1.5;
        assert!(p.validate().is_err());
        assert!(FlowParams::new(0.3).validate().is_err());
    }

    #[test]
    fn gauge_residual_on_circle() {
        let mut p = FlowParams::new(0.75);
        p.snapshot_interval = 0.01;
        let tr = flow_to_extinction(&CurveState::circle(grid(128), 1.0), &p).unwrap();
        // Use snapshots away from extinction, where kappa_tt stays moderate.
        let early: Vec<_> = tr
            .snapshots
            .iter()
            .filter(|s| s.t < -0.3)
            .cloned()
            .collect();
        let res = kappa_gauge_residual_of(&early, 0.75).unwrap();
        assert!(res < 0.05, "{res}");
        assert!(kappa_gauge_residual_of(&early[..1], 0.75).is_err());
    }
}
