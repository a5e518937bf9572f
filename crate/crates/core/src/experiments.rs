//! ε-sweep and mesh-refinement drivers.

use crate::coupling::{run, Trajectory};
use crate::error::{Error, Result};
use crate::fluid::FluidField;
use crate::geometry::{Mesh, Resolution};
use crate::scenario::Scenario;

/// One line of the ε-sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub final_e0: f64,
    /// Largest boundary mismatch over all recorded rows.
    pub bc_mismatch: f64,
    /// L² distance of the final fluid state to the reference run.
    pub distance: f64,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    /// ε of the run all distances are measured against.
    pub reference_eps: f64,
    pub dt: f64,
}

/// Time step shared by every member of a sweep: the scenario's own `dt`,
/// otherwise 0.8 of the most restrictive initial CFL step.
pub fn common_dt(scenario: &Scenario, eps: &[f64]) -> Result<f64> {
    if let Some(dt) = scenario.run.dt {
        return Ok(dt);
    }
    let mut dt = f64::INFINITY;
    for &e in eps {
        let mut sc = scenario.clone();
        sc.fluid.eps = e;
        let setup = sc.build()?;
        let state = setup.model.initial_state(&setup.u0, &setup.theta0);
        dt = dt.min(setup.model.stable_dt(&state)?);
    }
    Ok(0.8 * dt)
}

/// Run the scenario for every ε with a common time step. Distances are taken
/// against the smallest ε in the list.
pub fn sweep_eps(scenario: &Scenario, eps: &[f64]) -> Result<Sweep> {
    if eps.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one ε".into()));
    }
    let dt = common_dt(scenario, eps)?;
    let runs: Vec<(f64, Trajectory)> = eps
        .iter()
        .map(|&e| {
            let mut sc = scenario.clone();
            sc.fluid.eps = e;
            sc.run.dt = Some(dt);
            run(&sc).map(|t| (e, t))
        })
        .collect::<Result<_>>()?;
    let (reference_eps, reference) = runs
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(e, t)| (*e, &t.final_state.u))
        .expect("non-empty");
    let mesh = scenario.build()?.model.mesh;
    let rows = runs
        .iter()
        .map(|(e, traj)| SweepRow {
            eps: *e,
            final_e0: traj.rows.last().map_or(0.0, |r| r.record.e0),
            bc_mismatch: traj.rows.iter().map(|r| r.record.bc_mismatch).fold(0.0, f64::max),
            distance: traj.final_state.u.l2_distance(reference, &mesh),
            steps: traj.steps,
        })
        .collect();
    Ok(Sweep { rows, reference_eps, dt })
}

/// One line of the refinement table.
#[derive(Debug, Clone, PartialEq)]
pub struct RefineRow {
    pub resolution: Resolution,
    /// L² error against the finest run, sampled on this run's nodes.
    pub error: f64,
    /// `log2(e_prev / e)` against the next coarser row.
    pub order: Option<f64>,
}

/// Restrict a field on `fine` to the nodes of `coarse`; the meshes must be
/// nested by an integer factor.
pub fn restrict(fine_field: &FluidField, fine: &Mesh, coarse: &Mesh) -> Result<FluidField> {
    let rf = fine.resolution();
    let rc = coarse.resolution();
    let factor = rf.n_r / rc.n_r.max(1);
    let nested = factor >= 1
        && rf.n_r == factor * rc.n_r
        && rf.n_theta == factor * rc.n_theta
        && (coarse.dim() == 2 || rf.n_phi == factor * rc.n_phi);
    if !nested {
        return Err(Error::InvalidParameter(format!(
            "meshes are not nested: {rf:?} vs {rc:?}"
        )));
    }
    let mut out = FluidField::zeros(coarse.num_nodes());
    for n in 0..coarse.num_nodes() {
        let ix = coarse.node_index(n);
        let m = fine.index(ix.i * factor, ix.j * factor, ix.k * factor);
        out.p[n] = fine_field.p[m];
        out.u[n] = fine_field.u[m];
        out.s[n] = fine_field.s[m];
    }
    Ok(out)
}

/// Run the scenario on `levels` meshes, each refined by 2 in every
/// direction, and compare each final state with the finest one.
pub fn refine(scenario: &Scenario, levels: usize) -> Result<Vec<RefineRow>> {
    if levels < 2 {
        return Err(Error::InvalidParameter("refinement needs at least two levels".into()));
    }
    let base = scenario.resolution();
    let dim = scenario.geometry.dim;
    let mut results = Vec::with_capacity(levels);
    for l in 0..levels {
        let mut sc = scenario.clone();
        let res = base.refined(1 << l, dim);
        sc.set_resolution(res);
        sc.run.dt = scenario.run.dt.map(|dt| dt / (1 << l) as f64);
        let mesh = sc.build()?.model.mesh;
        let traj = run(&sc)?;
        results.push((res, mesh, traj.final_state.u));
    }
    let (_, fine_mesh, fine_u) = results.last().expect("levels >= 2");
    let mut rows: Vec<RefineRow> = Vec::with_capacity(levels - 1);
    for (res, mesh, u) in &results[..levels - 1] {
        let reference = restrict(fine_u, fine_mesh, mesh)?;
        let error = u.l2_distance(&reference, mesh);
        let order = rows.last().map(|prev| (prev.error / error).log2());
        rows.push(RefineRow {
            resolution: *res,
            error,
            order,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Preset;

    #[test]
    fn restriction_is_injection() {
        let sc = Scenario::preset(Preset::AcousticPulse);
        let coarse = sc.build().unwrap();
        let mut fine_sc = sc.clone();
        fine_sc.set_resolution(sc.resolution().refined(2, 2));
        let fine = fine_sc.build().unwrap();
        let r = restrict(&fine.u0, &fine.model.mesh, &coarse.model.mesh).unwrap();
        assert!(r.max_abs_diff(&coarse.u0) < 1e-14);
        assert!(restrict(&coarse.u0, &coarse.model.mesh, &fine.model.mesh).is_err());
    }

    #[test]
    fn rest_sweep_is_flat() {
        let mut sc = Scenario::preset(Preset::Rest);
        sc.mesh.n_r = 8;
        sc.mesh.n_theta = 16;
        sc.run.t_end = 0.05;
        let sweep = sweep_eps(&sc, &[0.1, 0.0]).unwrap();
        assert_eq!(sweep.reference_eps, 0.0);
        for row in &sweep.rows {
            assert!(row.distance < 1e-12 && row.bc_mismatch < 1e-12, "{row:?}");
        }
    }
}
