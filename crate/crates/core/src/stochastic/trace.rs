use std::io::Write;

use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::hgroup::Point;

use super::{run_game_traced, run_indexed, run_walk_traced, GameConfig, Strategy, WalkConfig};

/// One visited point of a trajectory. Walk rows carry no `s`/`t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub traj: usize,
    pub step: usize,
    pub point: Point,
    pub s: Option<u8>,
    pub t: Option<f64>,
}

fn collect<F>(n_traj: usize, base_seed: u64, run: F) -> Result<Vec<TraceRow>>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, &mut dyn FnMut(TraceRow)) -> Result<()> + Sync,
{
    let per: Vec<Vec<TraceRow>> = run_indexed(n_traj, base_seed, |i, rng| {
        let mut rows = Vec::new();
        run(rng, &mut |r: TraceRow| rows.push(TraceRow { traj: i, ..r }))?;
        Ok(rows)
    })?;
    Ok(per.into_iter().flatten().collect())
}

/// Full trajectories of `n_traj` walks, with the same streams as
/// [`super::estimate_walk_value`].
pub fn record_walk_trajectories<D: Domain + ?Sized>(
    dom: &D,
    cfg: &WalkConfig,
    q0: Point,
    n_traj: usize,
) -> Result<Vec<TraceRow>> {
    collect(n_traj, cfg.base_seed, |rng, hook| run_walk_traced(dom, cfg, q0, rng, hook).map(|_| ()))
}

/// Full trajectories of `n_traj` games, with the same streams as
/// [`super::estimate_game_value`].
pub fn record_game_trajectories<D: Domain + ?Sized>(
    dom: &D,
    cfg: &GameConfig,
    q0: Point,
    s_i: &dyn Strategy,
    s_ii: &dyn Strategy,
    n_traj: usize,
) -> Result<Vec<TraceRow>> {
    collect(n_traj, cfg.base_seed, |rng, hook| run_game_traced(dom, cfg, q0, s_i, s_ii, rng, hook).map(|_| ()))
}

/// CSV with header `traj_id,step,x,y,z,s_n,t_n`; missing fields are empty.
pub fn write_trajectory_csv<W: Write>(rows: &[TraceRow], mut w: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Format(e.to_string());
    writeln!(w, "traj_id,step,x,y,z,s_n,t_n").map_err(io)?;
    for r in rows {
        let s = r.s.map(|s| s.to_string()).unwrap_or_default();
        let t = r.t.map(|t| t.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{},{},{},{}", r.traj, r.step, r.point.x, r.point.y, r.point.z, s, t).map_err(io)?;
    }
    Ok(())
}
