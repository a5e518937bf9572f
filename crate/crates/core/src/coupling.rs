//! Fluid-solid orchestration: the Picard map over a window, sub-iterated
//! coupled steps and full runs.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    boundary_defects, conormal_energy, entropy_residual, vorticity_residual, DiagnosticsRecord, History, Level,
};
use crate::error::{Error, Result};
use crate::fluid::{
    boundary_mismatch, compatibility_derivatives, fluid_step, stable_dt, FluidField, FluidParams, Frame,
    Regularization, StageFrames,
};
use crate::geometry::Mesh;
use crate::kinematics::{advance_configuration_with_floor, Configuration, SolidVelocity};
use crate::scenario::Scenario;
use crate::solid::{solid_rate, surface_load, BodyProps, Load};
use crate::Vec3;

/// How the Picard iteration is organised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingMode {
    /// Iterate `Λ` over a whole window of fluid steps.
    PartitionedWindow,
    /// Iterate fluid and solid within each step.
    #[default]
    SubiteratedStep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    pub mode: CouplingMode,
    pub window: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            mode: CouplingMode::SubiteratedStep,
            window: 0.05,
            picard_tol: 1e-10,
            picard_max: 50,
        }
    }
}

impl CouplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window > 0.0 && self.window.is_finite()) {
            return Err(Error::Validation(format!(
                "coupling.window must be > 0 (got {})",
                self.window
            )));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::Validation(format!(
                "coupling.picard_tol must be > 0 (got {})",
                self.picard_tol
            )));
        }
        if self.picard_max < 1 {
            return Err(Error::Validation("coupling.picard_max must be >= 1".into()));
        }
        Ok(())
    }
}

/// Solution at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub t: f64,
    pub u: FluidField,
    pub theta: SolidVelocity,
    pub conf: Configuration,
}

/// Everything that stays fixed during a run.
#[derive(Debug, Clone)]
pub struct Model {
    pub mesh: Mesh,
    pub params: FluidParams,
    pub props: BodyProps,
    pub reg: Regularization,
    pub det_floor: f64,
}

impl Model {
    pub fn initial_state(&self, u0: &FluidField, theta0: &SolidVelocity) -> CoupledState {
        CoupledState {
            t: 0.0,
            u: u0.clone(),
            theta: *theta0,
            conf: Configuration::initial(&self.mesh),
        }
    }

    pub fn frame(&self, state: &CoupledState) -> Result<Frame> {
        Frame::new(&self.mesh, &state.conf, &state.theta, state.t)
    }

    /// CFL-limited step for the current state.
    pub fn stable_dt(&self, state: &CoupledState) -> Result<f64> {
        stable_dt(&state.u, &self.frame(state)?, &self.mesh, &self.params, self.reg.eps)
    }

    pub fn load(&self, u: &FluidField) -> Result<Load> {
        let trace: Vec<f64> = self.mesh.solid_patch().nodes.iter().map(|&n| u.p[n]).collect();
        surface_load(&trace, &self.mesh)
    }
}

/// Fluid and configuration after one step along the linear path from
/// `start.theta` to `theta_end`.
fn advance_path(
    model: &Model,
    start: &CoupledState,
    start_frame: &Frame,
    theta_end: &SolidVelocity,
    dt: f64,
) -> Result<(FluidField, Configuration)> {
    let (t, th0, th1) = (start.t, start.theta, *theta_end);
    if start_frame.trivial && th0 == SolidVelocity::zero() && th1 == SolidVelocity::zero() {
        let u = fluid_step(
            &start.u,
            &StageFrames::frozen(start_frame),
            &model.reg,
            &model.mesh,
            &model.params,
            dt,
        )?;
        return Ok((u, start.conf.clone()));
    }
    let path = move |s: f64| th0 + (th1 - th0) * ((s - t) / dt);
    let spec = model.mesh.spec();
    let half = 0.5 * dt;
    let conf_mid = advance_configuration_with_floor(&start.conf, spec, &path, t, half, model.det_floor)?;
    let conf_end = advance_configuration_with_floor(&conf_mid, spec, &path, t + half, half, model.det_floor)?;
    let mid = Frame::new(&model.mesh, &conf_mid, &path(t + half), t + half)?;
    let end = Frame::new(&model.mesh, &conf_end, &th1, t + dt)?;
    let frames = StageFrames {
        start: start_frame,
        mid: &mid,
        end: &end,
    };
    let u = fluid_step(&start.u, &frames, &model.reg, &model.mesh, &model.params, dt)?;
    Ok((u, conf_end))
}

// Simpson increment of the body ODE along a guessed path with linearly
// interpolated loads.
fn solid_increment(
    props: &BodyProps,
    th0: &SolidVelocity,
    th1: &SolidVelocity,
    load0: &Load,
    load1: &Load,
    dt: f64,
) -> SolidVelocity {
    let mid = (*th0 + *th1) * 0.5;
    let r0 = solid_rate(th0, load0, props);
    let rm = solid_rate(&mid, &load0.lerp(load1, 0.5), props);
    let r1 = solid_rate(th1, load1, props);
    (r0 + rm * 4.0 + r1) * (dt / 6.0)
}

/// `Λ(guess)` over the window spanned by `guess` (samples at `t + k·dt`).
#[derive(Debug, Clone)]
pub struct WindowSolve {
    pub theta: Vec<SolidVelocity>,
    pub loads: Vec<Load>,
    /// State at the window end carrying `Λ(guess)` at that time.
    pub end: CoupledState,
}

/// Evolve the fluid over the window with the body following `guess`,
/// record the SOLID loads at every step and integrate the body equations
/// with the guessed cross terms.
pub fn picard_update(model: &Model, state: &CoupledState, guess: &[SolidVelocity], dt: f64) -> Result<WindowSolve> {
    if guess.len() < 2 {
        return Err(Error::InvalidParameter("a window needs at least two samples".into()));
    }
    let gap = guess[0].distance(&state.theta);
    if gap > 1e-12 * (1.0 + state.theta.max_abs()) {
        return Err(Error::Continuity { gap });
    }
    let mut cur = CoupledState {
        theta: guess[0],
        ..state.clone()
    };
    let mut loads = vec![model.load(&cur.u)?];
    for k in 0..guess.len() - 1 {
        let frame = model.frame(&cur)?;
        let (u, conf) = advance_path(model, &cur, &frame, &guess[k + 1], dt)?;
        loads.push(model.load(&u)?);
        cur = CoupledState {
            t: cur.t + dt,
            u,
            theta: guess[k + 1],
            conf,
        };
    }
    let mut theta = vec![state.theta];
    for k in 0..guess.len() - 1 {
        let inc = solid_increment(&model.props, &guess[k], &guess[k + 1], &loads[k], &loads[k + 1], dt);
        theta.push(theta[k] + inc);
    }
    cur.theta = *theta.last().unwrap();
    Ok(WindowSolve {
        theta,
        loads,
        end: cur,
    })
}

/// Result of one coupled advance.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub state: CoupledState,
    pub iterations: usize,
    /// Distance between the last two iterates.
    pub distance: f64,
}

fn sample_distance(a: &[SolidVelocity], b: &[SolidVelocity]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.distance(y)).fold(0.0, f64::max)
}

/// Advance the coupled system. Sub-iterated mode takes one step of `dt`;
/// window mode advances by `cfg.window` (or `dt` steps covering it).
pub fn coupled_step(model: &Model, state: &CoupledState, cfg: &CouplingConfig, dt: f64) -> Result<StepReport> {
    match cfg.mode {
        CouplingMode::SubiteratedStep => subiterated_step(model, state, cfg, dt),
        CouplingMode::PartitionedWindow => {
            let steps = (cfg.window / dt - 1e-9).ceil().max(1.0) as usize;
            window_step(model, state, cfg, cfg.window / steps as f64, steps)
        }
    }
}

fn subiterated_step(model: &Model, state: &CoupledState, cfg: &CouplingConfig, dt: f64) -> Result<StepReport> {
    let frame = model.frame(state)?;
    let load0 = model.load(&state.u)?;
    let mut guess = state.theta;
    let mut distance = f64::INFINITY;
    for it in 1..=cfg.picard_max {
        let (u, conf) = advance_path(model, state, &frame, &guess, dt)?;
        let load1 = model.load(&u)?;
        let next = state.theta + solid_increment(&model.props, &state.theta, &guess, &load0, &load1, dt);
        distance = next.distance(&guess);
        if distance <= cfg.picard_tol {
            return Ok(StepReport {
                state: CoupledState {
                    t: state.t + dt,
                    u,
                    theta: next,
                    conf,
                },
                iterations: it,
                distance,
            });
        }
        guess = next;
    }
    Err(Error::NonConvergence {
        iterations: cfg.picard_max,
        distance,
    })
}

/// Iterate `Λ` over `steps` fluid steps of `dt` until the samples settle.
pub fn window_step(
    model: &Model,
    state: &CoupledState,
    cfg: &CouplingConfig,
    dt: f64,
    steps: usize,
) -> Result<StepReport> {
    let mut guess = vec![state.theta; steps + 1];
    let mut distance = f64::INFINITY;
    for it in 1..=cfg.picard_max {
        let sol = picard_update(model, state, &guess, dt)?;
        distance = sample_distance(&sol.theta, &guess);
        if distance <= cfg.picard_tol {
            return Ok(StepReport {
                state: sol.end,
                iterations: it,
                distance,
            });
        }
        guess = sol.theta;
    }
    Err(Error::NonConvergence {
        iterations: cfg.picard_max,
        distance,
    })
}

/// Empirical Lipschitz ratio `‖Λ(Θ₁) − Λ(Θ₂)‖ / ‖Θ₁ − Θ₂‖` over a window of
/// `steps` steps, with `Θ₁` frozen at the current value and `Θ₂` a linear
/// ramp away from it reaching `delta` in every active component.
pub fn contraction_ratio(model: &Model, state: &CoupledState, dt: f64, steps: usize, delta: f64) -> Result<f64> {
    let base = vec![state.theta; steps + 1];
    let dir = if model.mesh.dim() == 2 {
        SolidVelocity::new(Vec3::new(1.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0))
    } else {
        SolidVelocity::new(Vec3::repeat(1.0), Vec3::repeat(1.0))
    };
    let ramp: Vec<SolidVelocity> = (0..=steps)
        .map(|k| state.theta + dir * (delta * k as f64 / steps as f64))
        .collect();
    let a = picard_update(model, state, &base, dt)?;
    let b = picard_update(model, state, &ramp, dt)?;
    Ok(sample_distance(&a.theta, &b.theta) / sample_distance(&base, &ramp))
}

/// One line of the time series.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub record: DiagnosticsRecord,
    pub theta: SolidVelocity,
    pub h: Vec3,
    pub picard_iters: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    /// Boundary defects of the initial data, orders `0..=K`.
    pub compat: Vec<f64>,
    pub final_state: CoupledState,
    pub steps: usize,
}

fn diagnose(
    model: &Model,
    state: &CoupledState,
    history: &History,
    compat: Vec<f64>,
) -> Result<DiagnosticsRecord> {
    let frame = model.frame(state)?;
    let level = Level {
        t: state.t,
        u: &state.u,
        theta: state.theta,
        frame: &frame,
    };
    let (mesh, params, props, reg) = (&model.mesh, &model.params, &model.props, &model.reg);
    Ok(DiagnosticsRecord {
        t: state.t,
        e0: conormal_energy(&level, None, mesh, params, props, 0)?,
        e1: conormal_energy(&level, Some(history), mesh, params, props, 1)?,
        vort_res: vorticity_residual(&level, history, mesh, params, reg)?,
        ent_res: entropy_residual(&level, history, mesh, reg)?,
        bc_mismatch: boundary_mismatch(&state.u, &state.theta, mesh),
        compat_res: compat,
    })
}

fn diagnose_after_step(model: &Model, prev: &CoupledState, state: &CoupledState) -> Result<DiagnosticsRecord> {
    let frame = model.frame(prev)?;
    let level = Level {
        t: prev.t,
        u: &prev.u,
        theta: prev.theta,
        frame: &frame,
    };
    diagnose(model, state, &History::Previous(&level), vec![])
}

/// Integrate a scenario from `t = 0` to `run.t_end`.
pub fn run(scenario: &Scenario) -> Result<Trajectory> {
    run_with(scenario, |_, _| Ok(()))
}

/// As [`run`], calling `observer` after every recorded row.
pub fn run_with(
    scenario: &Scenario,
    mut observer: impl FnMut(&CoupledState, &TrajectoryRow) -> Result<()>,
) -> Result<Trajectory> {
    let setup = scenario.build()?;
    let model = &setup.model;
    let controls = &setup.controls;
    let cfg = &setup.coupling;
    let mut state = model.initial_state(&setup.u0, &setup.theta0);
    let wrap = |t: f64, step: usize| move |e: Error| Error::Runtime { t, step, source: Box::new(e) };

    let compat = boundary_defects(&setup.moments, &model.mesh);
    let rate = match setup.moments.get(1) {
        Some(m) => m.u.clone(),
        None => compatibility_derivatives(&setup.u0, &setup.theta0, &model.mesh, &model.params, &model.props, 1)
            .map_err(wrap(0.0, 0))?[1]
            .u
            .clone(),
    };
    let record = diagnose(model, &state, &History::Rate(&rate), compat.clone()).map_err(wrap(0.0, 0))?;
    let row = TrajectoryRow {
        record,
        theta: state.theta,
        h: state.conf.h,
        picard_iters: 0,
    };
    observer(&state, &row)?;
    let mut rows = vec![row];

    let t_end = controls.t_end;
    let tol = 1e-12 * t_end.max(1.0);
    let mut next_output = controls.output_every;
    let mut steps = 0;
    while state.t < t_end - tol {
        let err = wrap(state.t, steps);
        let remaining = t_end - state.t;
        let report = match cfg.mode {
            CouplingMode::SubiteratedStep => {
                let mut dt = match controls.dt {
                    Some(dt) => dt,
                    None => model.stable_dt(&state).map_err(err)?,
                };
                dt = dt.min(remaining).min((next_output - state.t).max(tol));
                subiterated_step(model, &state, cfg, dt).map_err(wrap(state.t, steps))?
            }
            CouplingMode::PartitionedWindow => {
                let dt = match controls.dt {
                    Some(dt) => dt,
                    None => 0.9 * model.stable_dt(&state).map_err(err)?,
                };
                let window = cfg.window.min(remaining);
                let n = (window / dt - 1e-9).ceil().max(1.0) as usize;
                window_step(model, &state, cfg, window / n as f64, n).map_err(wrap(state.t, steps))?
            }
        };
        let prev = std::mem::replace(&mut state, report.state);
        steps += 1;
        if state.t >= next_output - tol || state.t >= t_end - tol {
            while next_output <= state.t + tol {
                next_output += controls.output_every;
            }
            let record = diagnose_after_step(model, &prev, &state).map_err(wrap(state.t, steps))?;
            let row = TrajectoryRow {
                record,
                theta: state.theta,
                h: state.conf.h,
                picard_iters: report.iterations,
            };
            observer(&state, &row)?;
            rows.push(row);
        }
    }
    Ok(Trajectory {
        rows,
        compat,
        final_state: state,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, DomainSpec, Resolution};
    use crate::solid::mass_properties;

    fn model(spec: DomainSpec, res: Resolution, u0: &FluidField, mass_scale: f64) -> Model {
        let mesh = build_mesh(&spec, res).unwrap();
        let mut props = mass_properties(1.0, &spec).unwrap();
        props.body_mass *= mass_scale;
        Model {
            reg: Regularization::none(&mesh, u0),
            mesh,
            params: FluidParams::default(),
            props,
            det_floor: 1e-3,
        }
    }

    #[test]
    fn rest_is_a_fixed_point_of_both_modes() {
        let spec = DomainSpec::default();
        let mesh = build_mesh(&spec, Resolution::planar(16, 32)).unwrap();
        let u0 = FluidField::uniform(mesh.num_nodes(), 1.0, Vec3::zeros(), 0.0);
        let m = model(spec, Resolution::planar(16, 32), &u0, 1.0);
        let s0 = m.initial_state(&u0, &SolidVelocity::zero());
        let dt = 0.5 * m.stable_dt(&s0).unwrap();
        let sol = picard_update(&m, &s0, &[SolidVelocity::zero(); 4], dt).unwrap();
        assert!(sol.theta.iter().all(|t| *t == SolidVelocity::zero()));
        for mode in [CouplingMode::SubiteratedStep, CouplingMode::PartitionedWindow] {
            let cfg = CouplingConfig {
                mode,
                window: 2.0 * dt,
                ..CouplingConfig::default()
            };
            let rep = coupled_step(&m, &s0, &cfg, dt).unwrap();
            assert_eq!(rep.iterations, 1);
            assert_eq!(rep.state.u, s0.u);
            assert_eq!(rep.state.theta, s0.theta);
        }
    }

    #[test]
    fn guess_must_start_at_current_velocity() {
        let spec = DomainSpec::default();
        let mesh = build_mesh(&spec, Resolution::planar(8, 16)).unwrap();
        let u0 = FluidField::uniform(mesh.num_nodes(), 1.0, Vec3::zeros(), 0.0);
        let m = model(spec, Resolution::planar(8, 16), &u0, 1.0);
        let s0 = m.initial_state(&u0, &SolidVelocity::zero());
        let off = SolidVelocity::new(Vec3::new(0.1, 0.0, 0.0), Vec3::zeros());
        assert!(matches!(
            picard_update(&m, &s0, &[off, off], 1e-3),
            Err(Error::Continuity { .. })
        ));
    }

    fn push_model(mass_scale: f64) -> (Model, CoupledState) {
        let spec = DomainSpec {
            offset: Vec3::new(0.2, 0.0, 0.0),
            ..DomainSpec::default()
        };
        let res = Resolution::planar(16, 32);
        let mesh = build_mesh(&spec, res).unwrap();
        let mut u0 = FluidField::uniform(mesh.num_nodes(), 1.0, Vec3::zeros(), 0.0);
        for (n, x) in mesh.positions().iter().enumerate() {
            u0.p[n] = 1.0 + 0.1 * x.x;
        }
        let m = model(spec, res, &u0, mass_scale);
        let s0 = m.initial_state(&u0, &SolidVelocity::zero());
        (m, s0)
    }

    #[test]
    fn heavy_body_converges_immediately() {
        let (m, s0) = push_model(1e9);
        let cfg = CouplingConfig {
            picard_tol: 1e-8,
            ..CouplingConfig::default()
        };
        let rep = coupled_step(&m, &s0, &cfg, 1e-3).unwrap();
        assert!(rep.iterations <= 2);
        assert!(rep.state.theta.max_abs() < 1e-9);
    }

    #[test]
    fn push_moves_down_the_gradient_and_subiterates_quickly() {
        let (m, s0) = push_model(1.0);
        let cfg = CouplingConfig::default();
        let mut s = s0.clone();
        for _ in 0..5 {
            let rep = coupled_step(&m, &s, &cfg, 1e-3).unwrap();
            assert!(rep.iterations <= 5, "{}", rep.iterations);
            s = rep.state;
        }
        let f0 = m.load(&s0.u).unwrap().force;
        assert!(f0.x < 0.0);
        assert!(s.theta.l_bar.x < 0.0 && s.conf.h.x < 0.0);

        // Λ at the committed value reproduces it.
        let rep = coupled_step(&m, &s, &cfg, 1e-3).unwrap();
        let again = picard_update(&m, &s, &[s.theta, rep.state.theta], 1e-3).unwrap();
        assert!(again.theta[1].distance(&rep.state.theta) <= 2.0 * cfg.picard_tol);
    }

    #[test]
    fn too_few_iterations_is_an_error() {
        let (m, s0) = push_model(1.0);
        let cfg = CouplingConfig {
            picard_max: 1,
            ..CouplingConfig::default()
        };
        assert!(matches!(
            coupled_step(&m, &s0, &cfg, 1e-3),
            Err(Error::NonConvergence { iterations: 1, .. })
        ));
    }
}
