//! Trajectory integration with event detection, transversal sections,
//! Poincare return maps, and return-map derivatives from the variational
//! flow.

mod rk;

pub use rk::{DenseStep, Dopri5, StepOutcome, MIN_STEP};

use crate::error::{CoreError, Result};
use crate::field::{Family, ParamPoint};
use crate::geom::{dist, dot, mat_vec, norm, perp, sub, Vec2};
use serde::{Deserialize, Serialize};

/// Default numeric knobs; the flat list mirrors the run-config fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSettings {
    /// Local error tolerance per step (absolute and relative).
    pub tol: f64,
    /// Time budget for one return-map flight.
    pub t_max_return: f64,
    /// Velocity floor under which a trajectory counts as converged.
    pub v_floor: f64,
    /// Displacement-over-unit-time floor for convergence.
    pub x_floor: f64,
    /// Nodes in a section scan for fixed points of the return map.
    pub section_grid: usize,
    /// |P(s) - s| below this (without a sign change) marks a tangency.
    pub tangency_floor: f64,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        IntegrationSettings {
            tol: 1e-9,
            t_max_return: 120.0,
            v_floor: 1e-9,
            x_floor: 1e-8,
            section_grid: 200,
            tangency_floor: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Terminal {
    TimeLimit,
    LeftDomain,
    ConvergedToPoint,
    CrossedSection,
}

/// Integrated orbit: samples at strictly increasing internal times.
/// `time_sign` is -1 for backward runs; physical time is `time_sign * t`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<(f64, Vec2)>,
    pub terminal: Terminal,
    pub time_sign: f64,
    pub step_underflow: bool,
}

impl Trajectory {
    pub fn last_point(&self) -> Vec2 {
        self.samples.last().expect("nonempty trajectory").1
    }

    pub fn last_time(&self) -> f64 {
        self.samples.last().expect("nonempty trajectory").0
    }

    pub fn polyline(&self) -> Vec<Vec2> {
        self.samples.iter().map(|&(_, p)| p).collect()
    }
}

/// Transversal segment: points `base + s * direction`, `|s| <= half_length`.
/// `orientation = +1` selects crossings with positive normal velocity, where
/// the normal is `direction` rotated by +90 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub base: Vec2,
    pub direction: Vec2,
    pub half_length: f64,
    pub orientation: f64,
}

impl Section {
    pub fn point(&self, s: f64) -> Vec2 {
        [
            self.base[0] + s * self.direction[0],
            self.base[1] + s * self.direction[1],
        ]
    }

    pub fn normal(&self) -> Vec2 {
        perp(self.direction)
    }

    /// Coordinate along the section.
    pub fn coord(&self, p: Vec2) -> f64 {
        dot(sub(p, self.base), self.direction)
    }

    /// Signed offset from the section line.
    pub fn offset(&self, p: Vec2) -> f64 {
        dot(sub(p, self.base), self.normal())
    }

    pub const TRANSVERSALITY_FLOOR: f64 = 1e-6;

    /// Field-vs-section transversality at a point.
    pub fn check_transversal(&self, v: Vec2) -> Result<()> {
        let vn = dot(v, self.normal()).abs();
        if vn < Self::TRANSVERSALITY_FLOOR * norm(v) {
            return Err(CoreError::NotTransversal {
                normal: vn,
                floor: Self::TRANSVERSALITY_FLOOR,
            });
        }
        Ok(())
    }
}

/// One application of the Poincare map.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReturnSample {
    pub s_in: f64,
    pub s_out: f64,
    pub flight_time: f64,
    /// dP/ds from the variational flow projected onto the section.
    pub dp: f64,
}

/// Adaptive integration with dense-output event location.
///
/// Stops on domain exit, convergence to a point (velocity below `v_floor`
/// and displacement over the trailing unit of time below `x_floor`), or at
/// `|t_max|`. Negative `t_max` integrates backward. A collapsed step size
/// is reported on the trajectory, not as an error.
pub fn integrate(
    family: &Family,
    eps: &ParamPoint,
    x0: Vec2,
    t_max: f64,
    tol: f64,
) -> Result<Trajectory> {
    let mut settings = IntegrationSettings::default();
    settings.tol = tol;
    integrate_with(family, eps, x0, t_max, &settings)
}

pub fn integrate_with(
    family: &Family,
    eps: &ParamPoint,
    x0: Vec2,
    t_max: f64,
    settings: &IntegrationSettings,
) -> Result<Trajectory> {
    family.check_param(eps)?;
    family.require_inside(x0)?;
    if t_max == 0.0 || !t_max.is_finite() {
        return Err(CoreError::Precondition("t_max must be nonzero".to_string()));
    }
    if settings.tol <= 0.0 {
        return Err(CoreError::Precondition("tol must be positive".to_string()));
    }
    let sign = t_max.signum();
    let horizon = t_max.abs();
    let e = &eps.0;
    let f = move |_t: f64, y: &[f64; 2]| {
        let v = family.eval_raw(e, *y);
        [sign * v[0], sign * v[1]]
    };

    let mut solver = Dopri5::new(&f, 0.0, x0, settings.tol);
    let mut samples: Vec<(f64, Vec2)> = vec![(0.0, x0)];
    let mut terminal = Terminal::TimeLimit;
    let mut underflow = false;
    // trailing window for the displacement-over-unit-time convergence test
    let mut window: std::collections::VecDeque<(f64, Vec2)> = Default::default();
    window.push_back((0.0, x0));

    'outer: loop {
        if solver.t >= horizon {
            break;
        }
        let remaining = horizon - solver.t;
        let (outcome, dense) = {
            if remaining < 1e-12 {
                break;
            }
            clamp_step(&mut solver, remaining);
            solver.step()
        };
        match outcome {
            StepOutcome::Underflow => {
                underflow = true;
                break;
            }
            StepOutcome::Accepted => {}
        }
        let dense = dense.expect("accepted step has dense output");

        // emit interior samples so polylines stay spatially dense
        let speed = norm(family.eval_raw(e, dense.y1));
        let subdiv = sample_subdivisions(dense.h, speed);
        for m in 1..=subdiv {
            let t = dense.t0 + dense.h * m as f64 / subdiv as f64;
            let p = dense.eval(t);
            if !family.contains(p) {
                // exit: bisect the dense interval for the first outside point
                let t_exit = bisect_exit(family, &dense, samples.last().unwrap().0.max(dense.t0), t);
                let p_exit = dense.eval(t_exit);
                samples.push((t_exit, p_exit));
                terminal = Terminal::LeftDomain;
                break 'outer;
            }
            samples.push((t, p));
            window.push_back((t, p));
        }

        while window.len() > 2 && window[0].0 < solver.t - 1.0 {
            window.pop_front();
        }
        let v_now = norm(family.eval_raw(e, solver.y));
        if v_now < settings.v_floor {
            let span = solver.t - window.front().unwrap().0;
            let disp = window
                .iter()
                .map(|&(_, p)| dist(p, solver.y))
                .fold(0.0_f64, f64::max);
            if span >= 0.999 && disp < settings.x_floor || span < 0.999 && v_now == 0.0 {
                terminal = Terminal::ConvergedToPoint;
                break;
            }
        }
    }

    Ok(Trajectory {
        samples,
        terminal,
        time_sign: sign,
        step_underflow: underflow,
    })
}

fn clamp_step<const N: usize>(solver: &mut Dopri5<N>, remaining: f64) {
    if solver.step_size() > remaining {
        solver.set_step_size(remaining);
    }
}

fn sample_subdivisions(h: f64, speed: f64) -> usize {
    let by_time = (h / 0.1).ceil() as usize;
    let by_arc = (h * speed / 0.02).ceil() as usize;
    by_time.max(by_arc).clamp(1, 64)
}

fn bisect_exit(family: &Family, dense: &DenseStep<2>, t_in: f64, t_out: f64) -> f64 {
    let (mut lo, mut hi) = (t_in, t_out);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if family.contains(dense.eval(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    hi
}

/// Integrates from the section point at coordinate `s` to the first
/// same-orientation crossing. The derivative dP/ds comes from the 2x2
/// variational system propagated alongside the state, projected onto the
/// section with the standard flight-time correction.
pub fn return_map(
    family: &Family,
    eps: &ParamPoint,
    section: &Section,
    s: f64,
    settings: &IntegrationSettings,
) -> Result<ReturnSample> {
    family.check_param(eps)?;
    let x0 = section.point(s);
    family.require_inside(x0)?;
    let v0 = family.eval(eps, x0);
    if norm(v0) < 1e-12 {
        return Err(CoreError::NoReturn("seed is an equilibrium".to_string()));
    }
    section.check_transversal(v0)?;

    let e = &eps.0;
    // augmented system: state + variational matrix columns
    let f = move |_t: f64, y: &[f64; 6]| {
        let x = [y[0], y[1]];
        let v = family.eval_raw(e, x);
        let j = family.jacobian_raw(e, x);
        [
            v[0],
            v[1],
            j[0][0] * y[2] + j[0][1] * y[4],
            j[0][0] * y[3] + j[0][1] * y[5],
            j[1][0] * y[2] + j[1][1] * y[4],
            j[1][0] * y[3] + j[1][1] * y[5],
        ]
    };

    let y0 = [x0[0], x0[1], 1.0, 0.0, 0.0, 1.0];
    let mut solver = Dopri5::new(&f, 0.0, y0, settings.tol);
    let n = section.normal();
    let mut g_prev = 0.0; // offset at departure is exactly zero
    let mut t_prev = 0.0;

    loop {
        if solver.t >= settings.t_max_return {
            return Err(CoreError::NoReturn(format!(
                "no crossing within t_max = {}",
                settings.t_max_return
            )));
        }
        let remaining = settings.t_max_return - solver.t;
        clamp_step(&mut solver, remaining);
        let (outcome, dense) = solver.step();
        if matches!(outcome, StepOutcome::Underflow) {
            return Err(CoreError::NoReturn("step size underflow".to_string()));
        }
        let dense = dense.expect("accepted step");
        let x_now = [solver.y[0], solver.y[1]];
        if !family.contains(x_now) {
            return Err(CoreError::NoReturn("trajectory left the domain".to_string()));
        }
        let g_now = section.offset(x_now);

        // scan the dense interval for oriented in-segment crossings
        if let Some(t_cross) = locate_crossing(section, &dense, t_prev, g_prev, g_now, family, e) {
            let yc = dense.eval(t_cross);
            let xc = [yc[0], yc[1]];
            let vc = family.eval_raw(e, xc);
            let y_mat = [[yc[2], yc[3]], [yc[4], yc[5]]];
            let d = section.direction;
            let yd = mat_vec(&y_mat, d);
            let vn = dot(vc, n);
            let dp = dot(d, yd) - dot(d, vc) * dot(n, yd) / vn;
            return Ok(ReturnSample {
                s_in: s,
                s_out: section.coord(xc),
                flight_time: t_cross,
                dp,
            });
        }
        let v_now = norm(family.eval_raw(e, x_now));
        if v_now < settings.v_floor {
            return Err(CoreError::NoReturn(
                "trajectory converged to an equilibrium".to_string(),
            ));
        }
        g_prev = g_now;
        t_prev = solver.t;
    }
}

/// Finds the earliest oriented in-segment crossing inside one dense step.
/// Subdivides first: one RK step can wrap most of a revolution.
fn locate_crossing(
    section: &Section,
    dense: &DenseStep<6>,
    t_prev: f64,
    g_start: f64,
    _g_end: f64,
    family: &Family,
    eps: &[f64],
) -> Option<f64> {
    const PARTS: usize = 8;
    let t0 = dense.t0.max(t_prev);
    let mut ta = t0;
    let mut ga = if ta == t_prev { g_start } else { offset_at(section, dense, ta) };
    for m in 1..=PARTS {
        let tb = dense.t0 + dense.h * m as f64 / PARTS as f64;
        if tb <= ta {
            continue;
        }
        let gb = offset_at(section, dense, tb);
        let crossed = (ga < 0.0 && gb >= 0.0) || (ga > 0.0 && gb <= 0.0);
        if crossed && tb > 1e-12 {
            // bisect to the crossing time
            let (mut lo, mut hi, mut glo) = (ta, tb, ga);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let gm = offset_at(section, dense, mid);
                if (glo < 0.0) == (gm < 0.0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 * (1.0 + hi.abs()) {
                    break;
                }
            }
            let tc = 0.5 * (lo + hi);
            let yc = dense.eval(tc);
            let xc = [yc[0], yc[1]];
            let vc = family.eval_raw(eps, xc);
            let oriented = dot(vc, section.normal()) * section.orientation > 0.0
                || section.orientation == 0.0;
            let inside = section.coord(xc).abs() <= section.half_length;
            if oriented && inside {
                return Some(tc);
            }
        }
        ta = tb;
        ga = gb;
    }
    None
}

fn offset_at(section: &Section, dense: &DenseStep<6>, t: f64) -> f64 {
    let y = dense.eval(t);
    section.offset([y[0], y[1]])
}

/// A fixed point of the return map on a section.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SectionFixedPoint {
    pub s: f64,
    pub dp: f64,
    pub flight_time: f64,
    /// Found through the tangency branch (no sign change of P - id).
    pub tangency: bool,
}

/// Result of scanning a section for fixed points of the return map.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReturnScan {
    pub fixed_points: Vec<SectionFixedPoint>,
    /// More than half of the scanned nodes had |P(s) - s| at noise level:
    /// a continuum of periodic orbits rather than isolated cycles.
    pub continuum_suspected: bool,
    pub failed_nodes: usize,
}

/// Scans `P(s) - s` on a uniform grid, polishes sign changes by
/// bisection-guarded secant and near-tangencies by quadratic minimization.
pub fn fixed_points_of_return(
    family: &Family,
    eps: &ParamPoint,
    section: &Section,
    settings: &IntegrationSettings,
) -> Result<ReturnScan> {
    family.check_param(eps)?;
    let n = settings.section_grid.max(8);
    let l = section.half_length;
    let displacement = |s: f64| -> Option<f64> {
        return_map(family, eps, section, s, settings)
            .ok()
            .map(|r| r.s_out - r.s_in)
    };

    let mut nodes: Vec<(f64, Option<f64>)> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let s = -l + 2.0 * l * i as f64 / n as f64;
        nodes.push((s, displacement(s)));
    }
    let ok: Vec<(f64, f64)> = nodes
        .iter()
        .filter_map(|&(s, d)| d.map(|d| (s, d)))
        .collect();
    let failed = nodes.len() - ok.len();

    let noise = settings.tangency_floor.max(10.0 * settings.tol);
    if ok.len() >= 8 {
        let tiny = ok.iter().filter(|&&(_, d)| d.abs() < noise).count();
        if tiny * 2 > ok.len() {
            return Ok(ReturnScan {
                fixed_points: vec![],
                continuum_suspected: true,
                failed_nodes: failed,
            });
        }
    }

    let mut found: Vec<SectionFixedPoint> = Vec::new();
    let push = |s: f64, tangency: bool, found: &mut Vec<SectionFixedPoint>| {
        if found.iter().any(|f| (f.s - s).abs() < 1e-7) {
            return;
        }
        if let Ok(r) = return_map(family, eps, section, s, settings) {
            found.push(SectionFixedPoint {
                s,
                dp: r.dp,
                flight_time: r.flight_time,
                tangency,
            });
        }
    };

    // sign changes between consecutive successful nodes
    for w in ok.windows(2) {
        let ((sa, da), (sb, db)) = (w[0], w[1]);
        if da == 0.0 {
            push(sa, false, &mut found);
        } else if da * db < 0.0 {
            if let Some(root) = refine_root(&displacement, sa, da, sb, db, settings.tol) {
                push(root, false, &mut found);
            }
        }
    }
    if let Some(&(s_last, d_last)) = ok.last() {
        if d_last == 0.0 {
            push(s_last, false, &mut found);
        }
    }

    // near-tangencies: interior local minima of |D| without a sign change,
    // polished by minimizing D^2. A quadratic vertex fit gates the expensive
    // minimization: only dips that can plausibly reach the tangency floor
    // are refined.
    let accept_floor = settings.tangency_floor.max(10.0 * settings.tol);
    for i in 1..ok.len().saturating_sub(1) {
        let (_, dm) = ok[i];
        let (_, dl) = ok[i - 1];
        let (_, dr) = ok[i + 1];
        if dm * dl > 0.0 && dm * dr > 0.0 && dm.abs() <= dl.abs() && dm.abs() <= dr.abs() {
            let curv = dl - 2.0 * dm + dr;
            let vertex = if curv.abs() > 0.0 {
                dm - (dr - dl) * (dr - dl) / (8.0 * curv)
            } else {
                dm
            };
            if vertex.abs() > 1e3 * accept_floor {
                continue;
            }
            let (sl, sr) = (ok[i - 1].0, ok[i + 1].0);
            if let Some((s_min, d_min)) = minimize_abs(&displacement, sl, sr) {
                if d_min.abs() < accept_floor {
                    push(s_min, true, &mut found);
                }
            }
        }
    }

    found.sort_by(|a, b| a.s.partial_cmp(&b.s).unwrap());
    Ok(ReturnScan {
        fixed_points: found,
        continuum_suspected: false,
        failed_nodes: failed,
    })
}

/// Bisection-guarded secant root refinement of a bracketed sign change.
fn refine_root(
    f: &dyn Fn(f64) -> Option<f64>,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
    tol: f64,
) -> Option<f64> {
    for _ in 0..80 {
        // secant proposal, clipped into the bracket interior
        let mut m = b - fb * (b - a) / (fb - fa);
        let width = b - a;
        if !m.is_finite() || m <= a + 0.01 * width || m >= b - 0.01 * width {
            m = 0.5 * (a + b);
        }
        let fm = f(m)?;
        if fm.abs() <= tol || width < 1e-13 {
            return Some(m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    Some(0.5 * (a + b))
}

/// Golden-section minimization of |f| over [a, c].
fn minimize_abs(f: &dyn Fn(f64) -> Option<f64>, a: f64, c: f64) -> Option<(f64, f64)> {
    const PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, c);
    let mut x1 = hi - PHI * (hi - lo);
    let mut x2 = lo + PHI * (hi - lo);
    let mut f1 = f(x1)?.abs();
    let mut f2 = f(x2)?.abs();
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - PHI * (hi - lo);
            f1 = f(x1)?.abs();
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + PHI * (hi - lo);
            f2 = f(x2)?.abs();
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    f(s).map(|d| (s, d))
}

/// Writes a trajectory as CSV rows `t,x,y` with signed physical time.
pub fn trajectory_to_csv(tr: &Trajectory) -> String {
    let mut out = String::from("t,x,y\n");
    for &(t, p) in &tr.samples {
        out.push_str(&format!("{},{},{}\n", tr.time_sign * t, p[0], p[1]));
    }
    out
}
