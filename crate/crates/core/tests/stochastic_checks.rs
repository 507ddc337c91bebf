use heisenberg_core::averaging::{DppVariant, QuadratureSpec};
use heisenberg_core::calculus::{FnField, Polynomial};
use heisenberg_core::domains::*;
use heisenberg_core::dpp::*;
use heisenberg_core::hgroup::Point;
use heisenberg_core::rng;
use heisenberg_core::stochastic::*;

fn unit_ball() -> BallDomain {
    make_ball_domain(Point::default(), 1.0).unwrap()
}

fn pool(n: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()
}

#[test]
fn walk_reproduces_coordinate_functions() {
    let dom = unit_ball();
    let cfg = WalkConfig { base_seed: 5, ..WalkConfig::new(0.2).unwrap() };
    let e = estimate_walk_value(&dom, &cfg, &Polynomial::x(), Point::new(0.3, 0.0, 0.0), 4000).unwrap();
    assert!(e.agrees_with(0.3, 3.0, 0.0), "{e:?}");
    let q = Point::new(0.3, 0.2, 0.1);
    let e = estimate_walk_value(&dom, &cfg, &Polynomial::z(), q, 4000).unwrap();
    assert!(e.agrees_with(0.1, 3.0, 0.0), "{e:?}");
    assert_eq!(e.truncated_count, 0);
}

#[test]
fn constant_data_estimates_are_exact() {
    let dom = unit_ball();
    let c = Polynomial::constant(0.37);
    let e = estimate_walk_value(&dom, &WalkConfig::new(0.3).unwrap(), &c, Point::default(), 200).unwrap();
    assert_eq!((e.mean, e.std_error), (0.37, 0.0));
    let g = GameConfig::new(0.3, 3.0, DppVariant::Dpp2).unwrap();
    let e = estimate_game_value(&dom, &g, &c, Point::default(), &ZeroStrategy, &ZeroStrategy, 200).unwrap();
    assert_eq!((e.mean, e.std_error), (0.37, 0.0));
}

#[test]
fn walk_terminal_mean_is_the_start() {
    let dom = unit_ball();
    let cfg = WalkConfig { base_seed: 6, ..WalkConfig::new(0.25).unwrap() };
    for f in [Polynomial::x(), Polynomial::y(), Polynomial::z()] {
        let e = estimate_walk_value(&dom, &cfg, &f, Point::default(), 10_000).unwrap();
        assert!(e.agrees_with(0.0, 3.0, 0.0), "{e:?}");
    }
}

#[test]
fn single_step_has_no_drift() {
    let q = Point::new(0.4, -0.3, 0.2);
    let mut r = rng::stream(7, 0);
    let n = 100_000;
    let mut inc = Vec::with_capacity(n);
    for _ in 0..n {
        let (a, b) = heisenberg_core::hgroup::sample_unit_disc(&mut r);
        inc.push(walk_step(q, 0.1, a, b) - q);
    }
    for c in 0..3 {
        let v: Vec<f64> = inc.iter().map(|p| p.to_array()[c]).collect();
        let e = Estimate::from_samples(&v, 0).unwrap();
        assert!(e.agrees_with(0.0, 4.0, 0.0), "component {c}: {e:?}");
    }
}

#[test]
fn zero_strategy_game_is_symmetric() {
    let dom = unit_ball();
    let g = GameConfig { base_seed: 8, ..GameConfig::new(0.2, 2.05, DppVariant::Dpp2).unwrap() };
    let q0 = Point::new(0.25, 0.1, 0.0);
    let e = estimate_game_value(&dom, &g, &Polynomial::x(), q0, &ZeroStrategy, &ZeroStrategy, 5000).unwrap();
    assert!(e.agrees_with(q0.x, 3.0, 0.0), "{e:?}");
}

#[test]
fn truncation_vanishes_with_more_steps() {
    let dom = unit_ball();
    let mut fracs = Vec::new();
    for max_steps in [5, 50, 5000] {
        let g = GameConfig { max_steps, base_seed: 9, ..GameConfig::new(0.1, 3.0, DppVariant::Dpp2).unwrap() };
        let e = estimate_game_value(&dom, &g, &Polynomial::x(), Point::default(), &ZeroStrategy, &ZeroStrategy, 2000)
            .unwrap();
        fracs.push(e.truncated_fraction());
    }
    assert!(fracs[0] > fracs[1] && fracs[1] > fracs[2], "{fracs:?}");
    assert_eq!(fracs[2], 0.0);
}

fn coordinate_field(cfg: &GameConfig) -> GridField {
    let dom = unit_ball();
    let spec = GridSpec::box_for(&dom, cfg.eps, cfg.eps * (1.0 + cfg.gamma().unwrap()), Some(0.1), Some(0.1)).unwrap();
    let grid = spec.build().unwrap();
    let vals = (0..grid.len()).map(|i| grid.node_point(i).x).collect();
    GridField::new(grid, vals).unwrap()
}

#[test]
fn greedy_selection_examples() {
    let cfg = GameConfig::new(0.3, 3.0, DppVariant::Dpp2).unwrap();
    let field = coordinate_field(&cfg);
    let max = GreedyStrategy::from_averaged(field.clone(), &cfg, Mode::Maximize, 0).unwrap();
    let min = GreedyStrategy::from_averaged(field.clone(), &cfg, Mode::Minimize, 0).unwrap();
    let q = Point::new(0.1, -0.2, 0.05);
    let s = max.advance(q, 0).unwrap();
    let best_x = max.net().iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    assert!((s.x - best_x).abs() < 1e-9 && s.x > 0.85, "{s:?}");
    let t = min.advance(q, 0).unwrap();
    assert!((t.x + s.x).abs() < 1e-9 && (t.y + s.y).abs() < 1e-9, "{s:?} vs {t:?}");

    let flat = GridField::new(field.grid.clone(), vec![2.0; field.values.len()]).unwrap();
    let g = GreedyStrategy::from_averaged(flat, &cfg, Mode::Maximize, 0).unwrap();
    assert_eq!(g.select(q).unwrap(), 0);
    assert!(g.advance(Point::new(50.0, 0.0, 0.0), 0).is_err());
}

struct Solved {
    dom: BallDomain,
    sol: DppSolution,
    game: GameConfig,
}

fn solved_unit_ball(eps: f64) -> Solved {
    let dom = unit_ball();
    let mut cfg = DppConfig::new(eps, 3.0, DppVariant::Dpp2).unwrap();
    cfg.quad = QuadratureSpec::tensor_with_ball_nodes(1024);
    let g = cfg.box_grid(&dom, None, Some(0.05)).unwrap();
    let sol = solve_dpp(&dom, &Polynomial::x(), &cfg, &g).unwrap();
    let game = GameConfig { base_seed: 10, ..GameConfig::new(eps, 3.0, DppVariant::Dpp2).unwrap() };
    Solved { dom, sol, game }
}

#[test]
fn game_value_orderings() {
    let s = solved_unit_ball(0.4);
    let max = greedy_strategy(&s.sol, &s.game, Mode::Maximize).unwrap();
    let min = greedy_strategy(&s.sol, &s.game, Mode::Minimize).unwrap();
    let f = Polynomial::x();
    let q0 = Point::new(0.2, 0.1, 0.0);
    let n = 4000;
    let base = estimate_game_value(&s.dom, &s.game, &f, q0, &max, &min, n).unwrap();
    let swapped = estimate_game_value(&s.dom, &s.game, &f, q0, &min, &max, n).unwrap();
    let zero_i = estimate_game_value(&s.dom, &s.game, &f, q0, &ZeroStrategy, &min, n).unwrap();
    let se = |a: &Estimate, b: &Estimate| (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!(swapped.mean <= base.mean + 3.0 * se(&swapped, &base), "{swapped:?} vs {base:?}");
    assert!(zero_i.mean <= base.mean + 3.0 * se(&zero_i, &base), "{zero_i:?} vs {base:?}");
    let u = s.sol.u.interpolate(q0).unwrap();
    assert!(base.agrees_with(u, 3.0, 2e-2), "{base:?} vs {u}");
}

#[test]
fn runs_are_deterministic_across_thread_counts() {
    let s = solved_unit_ball(0.4);
    let max = greedy_strategy(&s.sol, &s.game, Mode::Maximize).unwrap();
    let min = greedy_strategy(&s.sol, &s.game, Mode::Minimize).unwrap();
    let q0 = Point::new(-0.1, 0.3, 0.02);
    let run = |threads: usize| {
        pool(threads).install(|| {
            let traj = record_game_trajectories(&s.dom, &s.game, q0, &max, &min, 50).unwrap();
            let est = estimate_game_value(&s.dom, &s.game, &Polynomial::x(), q0, &max, &min, 500).unwrap();
            let wcfg = WalkConfig { base_seed: 3, ..WalkConfig::new(0.2).unwrap() };
            let walk = estimate_walk_value(&s.dom, &wcfg, &Polynomial::y(), q0, 500).unwrap();
            (traj, est, walk)
        })
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a, b);
    assert_eq!(a, run(1));
}

#[test]
fn trajectory_csv_dump() {
    let dom = unit_ball();
    let g = GameConfig::new(0.3, 3.0, DppVariant::Dpp2).unwrap();
    let rows = record_game_trajectories(&dom, &g, Point::default(), &ZeroStrategy, &ZeroStrategy, 3).unwrap();
    let mut out = Vec::new();
    write_trajectory_csv(&rows, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("traj_id,step,x,y,z,s_n,t_n\n"));
    assert_eq!(text.lines().count(), rows.len() + 1);
    for traj in 0..3 {
        let last = rows.iter().rfind(|r| r.traj == traj).unwrap();
        assert!(last.t.unwrap() > d_eps(&dom, 0.3, last.point));
    }
    let walk = record_walk_trajectories(&dom, &WalkConfig::new(0.3).unwrap(), Point::default(), 2).unwrap();
    assert!(walk.iter().all(|r| r.s.is_none() && dom.contains(r.point)));
}

#[test]
fn stopping_time_tail_decays() {
    let dom = unit_ball();
    let g = GameConfig { base_seed: 11, ..GameConfig::new(0.1, 3.0, DppVariant::Dpp2).unwrap() };
    let fit = stopping_time_tail(&dom, &g, Point::default(), &ZeroStrategy, &ZeroStrategy, 2000, 40, 6).unwrap();
    assert!(fit.slope < -0.01, "{fit:?}");
    assert!(fit.survival.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn regularity_probe_examples() {
    let dom = unit_ball();
    let q0 = Point::new(1.0, 0.0, 0.0);
    let p = RegularityParams { seed: 12, ..RegularityParams::new(0.2, 0.4, 0.05, 1000, ProbeKind::Walk) };
    let rep = regularity_probe(&dom, q0, &p).unwrap();
    assert!(rep.regular, "{rep:?}");
    assert!((rep.delta_hat - 0.05).abs() < 1e-15);

    let wide = RegularityParams { delta: 2.5, ..p };
    assert_eq!(regularity_probe(&dom, q0, &wide).unwrap().hit.mean, 1.0);

    let far = RegularityParams { delta: 0.02, start_ratio: 10.0, eps: 0.5, ..p };
    assert!(regularity_probe(&dom, q0, &far).unwrap().hit.mean < 0.9);

    assert!(regularity_probe(&dom, Point::new(0.5, 0.0, 0.0), &p).is_err());

    let game = RegularityParams { eps: 0.3, n_traj: 500, kind: ProbeKind::Game { p: 3.0 }, h_z: Some(0.05), ..p };
    let rep = regularity_probe(&dom, q0, &game).unwrap();
    assert!(rep.hit.mean > 0.5, "{rep:?}");
}

#[test]
fn dpp3_game_with_greedy_players() {
    let dom = unit_ball();
    let par = heisenberg_core::averaging::Dpp3Params::default_for(3.0).unwrap();
    let mut cfg = DppConfig::new(0.4, 3.0, DppVariant::Dpp3(par)).unwrap();
    cfg.quad = QuadratureSpec::tensor_with_ball_nodes(128);
    cfg.search.candidate_count = 16;
    let g = cfg.box_grid(&dom, Some(0.2), Some(0.2)).unwrap();
    let f = FnField::new(|q: Point| q.x);
    let sol = solve_dpp(&dom, &f, &cfg, &g).unwrap();
    let game = GameConfig { base_seed: 13, ..GameConfig::new(0.4, 3.0, DppVariant::Dpp3(par)).unwrap() };
    let max = greedy_strategy(&sol, &game, Mode::Maximize).unwrap();
    let min = greedy_strategy(&sol, &game, Mode::Minimize).unwrap();
    let e = estimate_game_value(&dom, &game, &f, Point::default(), &max, &min, 300).unwrap();
    // x is odd under the rotation by π, which preserves the ball
    assert!(e.mean.abs() < 0.3, "{e:?}");
}
