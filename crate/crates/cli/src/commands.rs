//! One function per subcommand, each turning a parsed config into records.

use std::fs::File;
use std::io::BufWriter;
use std::time::Instant;

use heisenberg_core::averaging::{coefficient_fit, BallSearchSpec, QuadratureSpec};
use heisenberg_core::calculus::horizontal_jet;
use heisenberg_core::domains::Domain;
use heisenberg_core::dpp::{solve_dpp, sup_error_in_domain, write_binary, DppConfig, DppSolution, GridSpec};
use heisenberg_core::stochastic::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::*;
use crate::{CliError, ResultRecord};

type Records = Result<Vec<ResultRecord>, CliError>;

fn params(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

pub fn expand(cfg: &ExpandConfig, seed: u64) -> Records {
    let quad = QuadratureSpec::tensor_with_ball_nodes(cfg.quadrature_nodes);
    let search = BallSearchSpec { candidate_count: cfg.candidates, seed, ..BallSearchSpec::default() };
    let mut out = Vec::new();
    for op_spec in &cfg.operators {
        let op = op_spec.build()?;
        for field_spec in &cfg.fields {
            let f = field_spec.build()?;
            for &p in &cfg.points {
                let t = Instant::now();
                let q = point(p);
                let measured = coefficient_fit(|r| op.apply(&*f, r, q, &quad, &search), &*f, q, &cfg.radii)?;
                // the min-max and p-type references need a nonvanishing gradient
                let reference = horizontal_jet(&*f, q).and_then(|j| op.expected_coefficient(&j)).ok();
                let mut r = ResultRecord::new(
                    "expand",
                    "r2_coefficient",
                    params(json!({
                        "operator": to_json(op_spec),
                        "field": to_json(field_spec),
                        "point": p,
                        "radii": cfg.radii,
                        "quadrature_nodes": cfg.quadrature_nodes,
                        "candidates": cfg.candidates,
                        "seed": seed,
                    })),
                    measured,
                );
                r.reference = reference;
                r.wall_time_s = t.elapsed().as_secs_f64();
                out.push(r);
            }
        }
    }
    Ok(out)
}

fn solver_config(spec: &SolverSpec, eps: f64, seed: u64) -> Result<DppConfig, CliError> {
    let mut c = DppConfig::new(eps, spec.p, spec.variant()?)?;
    if let Some(tol) = spec.tol {
        c.tol = tol;
    }
    if let Some(m) = spec.max_iter {
        c.max_iter = m;
    }
    if let Some(n) = spec.quadrature_nodes {
        c.quad = QuadratureSpec::tensor_with_ball_nodes(n);
    }
    if let Some(n) = spec.candidates {
        c.search.candidate_count = n;
    }
    c.search.seed = seed;
    c.validate()?;
    Ok(c)
}

fn grid_spec(choice: &GridChoice, c: &DppConfig, dom: &dyn Domain) -> Result<GridSpec, CliError> {
    Ok(match *choice {
        GridChoice::Box { h_xy, h_z } => c.box_grid(dom, h_xy, h_z)?,
        GridChoice::Axisymmetric { h_rho, n_phi } => c.axisymmetric_grid(dom, h_rho, n_phi)?,
    })
}

pub fn dpp_solve(cfg: &DppSolveConfig, seed: u64) -> Records {
    let dom = cfg.domain.build()?;
    let data = cfg.data.build()?;
    let reference = cfg.reference.as_ref().map(FieldSpec::build).transpose()?;
    let upper = cfg.upper_data.as_ref().map(FieldSpec::build).transpose()?;
    if let Some(dir) = &cfg.field_dir {
        std::fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut out = Vec::new();
    let mut last_err: Option<(f64, f64)> = None;
    for &eps in &cfg.eps {
        let t = Instant::now();
        let c = solver_config(&cfg.solver, eps, seed)?;
        let grid = grid_spec(&cfg.solver.grid, &c, &*dom)?;
        let sol = solve_dpp(&*dom, &*data, &c, &grid)?;
        let base = json!({
            "domain": to_json(&cfg.domain),
            "data": to_json(&cfg.data),
            "eps": eps,
            "solver": to_json(&cfg.solver),
            "nodes": sol.u.values.len(),
            "iterations": sol.iterations,
            "seed": seed,
        });
        let elapsed = t.elapsed().as_secs_f64();
        let mut push = |quantity: &str, measured: f64, reference: Option<f64>, extra: Value| {
            let mut p = params(base.clone());
            p.extend(params(extra));
            let mut r = ResultRecord::new("dpp-solve", quantity, p, measured);
            r.reference = reference;
            r.residual = Some(sol.residual);
            r.wall_time_s = elapsed;
            out.push(r);
        };
        match &reference {
            Some(f) => {
                let e = sup_error_in_domain(&sol.u, &*dom, &**f)?;
                push("sup_error", e, None, json!({ "reference": to_json(&cfg.reference) }));
                if let Some((prev_eps, prev)) = last_err {
                    push("error_ratio", e / prev, None, json!({ "previous_eps": prev_eps }));
                }
                last_err = Some((eps, e));
            }
            None => push("residual", sol.residual, None, json!({})),
        }
        if let Some(g) = &upper {
            let hi = solve_dpp(&*dom, &**g, &c, &grid)?;
            let ordered = sol.u.values.iter().zip(&hi.u.values).all(|(a, b)| a <= b);
            push(
                "monotone_ok",
                if ordered { 1.0 } else { 0.0 },
                Some(1.0),
                json!({ "upper_data": to_json(&cfg.upper_data) }),
            );
        }
        if let Some(dir) = &cfg.field_dir {
            let f = File::create(dir.join(format!("u_eps{eps}.bin"))).map_err(io_err)?;
            write_binary(&sol.u, BufWriter::new(f))?;
        }
    }
    Ok(out)
}

fn write_trace(spec: &TraceSpec, rows: &[TraceRow]) -> Result<(), CliError> {
    let f = File::create(&spec.path).map_err(|e| CliError::Io(format!("{}: {e}", spec.path.display())))?;
    write_trajectory_csv(rows, BufWriter::new(f))?;
    Ok(())
}

fn estimate_record(experiment: &str, quantity: &str, p: Map<String, Value>, e: &Estimate) -> ResultRecord {
    let mut r = ResultRecord::new(experiment, quantity, p, e.mean);
    r.std_error = Some(e.std_error);
    r.truncated = Some(e.truncated_count);
    r
}

pub fn walk(cfg: &WalkConfigSpec, seed: u64) -> Records {
    let dom = cfg.domain.build()?;
    let f = cfg.field.build()?;
    let mut w = WalkConfig { base_seed: seed, ..WalkConfig::new(cfg.eps)? };
    if let Some(s) = cfg.stop_fraction {
        w.stop_fraction = s;
    }
    if let Some(m) = cfg.max_steps {
        w.max_steps = m;
    }
    w.validate()?;
    let mut out = Vec::new();
    for &p in &cfg.points {
        let t = Instant::now();
        let q = point(p);
        let e = estimate_walk_value(&*dom, &w, &*f, q, cfg.n_traj)?;
        let mut r = estimate_record(
            "walk",
            "walk_value",
            params(json!({
                "domain": to_json(&cfg.domain),
                "field": to_json(&cfg.field),
                "point": p,
                "eps": w.eps,
                "n_traj": cfg.n_traj,
                "stop_fraction": w.stop_fraction,
                "max_steps": w.max_steps,
                "seed": seed,
            })),
            &e,
        );
        if cfg.field.is_walk_invariant() {
            r.reference = Some(f.eval(q)?);
        }
        r.wall_time_s = t.elapsed().as_secs_f64();
        out.push(r);
    }
    if let (Some(spec), Some(&p)) = (&cfg.trajectories, cfg.points.first()) {
        write_trace(spec, &record_walk_trajectories(&*dom, &w, point(p), spec.count)?)?;
    }
    Ok(out)
}

pub fn game(cfg: &GameConfigSpec, seed: u64) -> Records {
    let t = Instant::now();
    let dom = cfg.domain.build()?;
    let data = cfg.data.build()?;
    let c = solver_config(&cfg.solver, cfg.eps, seed)?;
    let mut g = GameConfig { base_seed: seed, ..GameConfig::new(cfg.eps, cfg.solver.p, c.variant)? };
    if let Some(m) = cfg.max_steps {
        g.max_steps = m;
    }
    g.validate()?;
    let (sol, s_i, s_ii): (Option<DppSolution>, Box<dyn Strategy>, Box<dyn Strategy>) = match cfg.strategies {
        StrategyName::Zero => (None, Box::new(ZeroStrategy), Box::new(ZeroStrategy)),
        StrategyName::Greedy => {
            let sol = solve_dpp(&*dom, &*data, &c, &grid_spec(&cfg.solver.grid, &c, &*dom)?)?;
            let s_i = greedy_strategy(&sol, &g, Mode::Maximize)?;
            let s_ii = greedy_strategy(&sol, &g, Mode::Minimize)?;
            (Some(sol), Box::new(s_i), Box::new(s_ii))
        }
    };
    let setup = t.elapsed().as_secs_f64();
    let mut out = Vec::new();
    for &p in &cfg.points {
        let t = Instant::now();
        let q = point(p);
        let e = estimate_game_value(&*dom, &g, &*data, q, &*s_i, &*s_ii, cfg.n_traj)?;
        let mut r = estimate_record(
            "game",
            "game_value",
            params(json!({
                "domain": to_json(&cfg.domain),
                "data": to_json(&cfg.data),
                "point": p,
                "eps": cfg.eps,
                "n_traj": cfg.n_traj,
                "solver": to_json(&cfg.solver),
                "strategies": to_json(&cfg.strategies),
                "max_steps": g.max_steps,
                "seed": seed,
            })),
            &e,
        );
        if let Some(sol) = &sol {
            r.reference = Some(sol.u.interpolate(q)?);
            r.residual = Some(sol.residual);
        }
        r.wall_time_s = setup + t.elapsed().as_secs_f64();
        out.push(r);
    }
    if let (Some(spec), Some(&p)) = (&cfg.trajectories, cfg.points.first()) {
        write_trace(spec, &record_game_trajectories(&*dom, &g, point(p), &*s_i, &*s_ii, spec.count)?)?;
    }
    Ok(out)
}

pub fn annulus(cfg: &AnnulusConfig, seed: u64) -> Records {
    let t = Instant::now();
    let [r1, r2, r3] = cfg.radii;
    let mut a = AnnulusParams { seed, ..AnnulusParams::new(r1, r2, r3, cfg.p, cfg.eps, cfg.n_traj, cfg.xi) };
    if let Some(tol) = cfg.tol {
        a.tol = tol;
    }
    a.h_rho = cfg.h_rho;
    a.n_phi = cfg.n_phi;
    if let Some(m) = cfg.max_steps {
        a.max_steps = m;
    }
    let rep = annulus_experiment(&a)?;
    let mut r = estimate_record(
        "annulus",
        "exit_probability",
        params(json!({
            "radii": cfg.radii,
            "p": cfg.p,
            "eps": cfg.eps,
            "n_traj": cfg.n_traj,
            "xi": cfg.xi,
            "bound": rep.bound,
            "tol": a.tol,
            "solver_iterations": rep.solver_iterations,
            "seed": seed,
        })),
        &rep.exit_prob,
    );
    r.reference = Some(rep.bound + rep.xi);
    r.residual = Some(rep.solver_residual);
    r.wall_time_s = t.elapsed().as_secs_f64();
    Ok(vec![r])
}

pub fn regularity(cfg: &RegularityConfig, seed: u64) -> Records {
    let t = Instant::now();
    let dom = cfg.domain.build()?;
    let kind = match (cfg.probe, cfg.p) {
        (ProbeName::Walk, _) => ProbeKind::Walk,
        (ProbeName::Game, Some(p)) => ProbeKind::Game { p },
        (ProbeName::Game, None) => return Err(CliError::Config("the game probe needs p".into())),
    };
    let mut rp = RegularityParams { seed, ..RegularityParams::new(cfg.eta, cfg.delta, cfg.eps, cfg.n_traj, kind) };
    if let Some(v) = cfg.start_ratio {
        rp.start_ratio = v;
    }
    if let Some(v) = cfg.stop_fraction {
        rp.stop_fraction = v;
    }
    if let Some(v) = cfg.max_steps {
        rp.max_steps = v;
    }
    if let Some(v) = cfg.tol {
        rp.tol = v;
    }
    rp.h_xy = cfg.h_xy;
    rp.h_z = cfg.h_z;
    let rep = regularity_probe(&*dom, point(cfg.point), &rp)?;
    let mut r = estimate_record(
        "regularity",
        "hit_probability",
        params(json!({
            "domain": to_json(&cfg.domain),
            "point": cfg.point,
            "probe": to_json(&cfg.probe),
            "p": cfg.p,
            "eta": cfg.eta,
            "delta": cfg.delta,
            "delta_hat": rep.delta_hat,
            "eps": cfg.eps,
            "n_traj": cfg.n_traj,
            "regular": rep.regular,
            "seed": seed,
        })),
        &rep.hit,
    );
    r.reference = Some(1.0 - cfg.eta);
    r.wall_time_s = t.elapsed().as_secs_f64();
    Ok(vec![r])
}
