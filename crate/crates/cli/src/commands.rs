use std::fs;
use std::path::Path;

use asymdynkin_core::dynamics::{
    extract_strategies, mc_verify_sufficiency, pde_solve_system, simulate_filter_paths, simulate_regime_paths,
    DiffusionModel, PdeGrid, PdeOptions, PdeSurfaces, Recording, StoppingPayoffs, SufficiencyReport, VerifyOptions,
};
use asymdynkin_core::game::{Estimate, RandomDevice};
use asymdynkin_core::oracle::solve_scenario;
use asymdynkin_core::scenario::{
    best_response_values, certify_mart, certify_stop, ex_ante_check, martingale_report, support_report, Certificate,
    MartingaleReport, Overrides, SupportReport,
};
use serde::{Deserialize, Serialize};

use crate::args::{Cli, Command, DynamicsArgs, DynamicsStep};
use crate::io::{self, csv_writer, finish_csv, num, read_game, read_json, write_json, EquilibriumFile, Meta};
use crate::{exit, CliError};

/// Exit code and the line printed on success.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub summary: String,
}

impl Outcome {
    fn new(code: i32, summary: String) -> Self {
        Self { code, summary }
    }
}

/// Runs one command; errors are mapped to their exit codes by the caller.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Oracle { game, out, cap } => cmd_oracle(game, out, *cap),
        Command::Verify { game, equilibrium, tol, out, cap } => cmd_verify(game, equilibrium, *tol, out, *cap),
        Command::Dynamics(args) => cmd_dynamics(args),
    }
}

fn make_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

/// Solves the game exactly and writes `equilibrium.json`.
pub fn cmd_oracle(game_path: &Path, out: &Path, cap: usize) -> Result<Outcome, CliError> {
    let game = read_game(game_path)?;
    let sol = solve_scenario(&game, cap)?;
    make_dir(out)?;
    let surfaces = best_response_values(&game, &sol.profile)?;
    let mut file = EquilibriumFile::from_solution(&sol, Meta::new("oracle"));
    file.surfaces = Some(io::NodeValues { u0: surfaces.u[0].clone(), u1: surfaces.u[1].clone(), v: surfaces.v.clone() });
    write_json(&out.join("equilibrium.json"), &file)?;
    Ok(Outcome::new(
        exit::SUCCESS,
        format!("value {:?} gap {:.3e} rules {}", sol.value, sol.gap, sol.rules.len()),
    ))
}

/// Everything `verify` computes for a scenario equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub certified: bool,
    /// Value claimed by the equilibrium file.
    pub claimed_value: f64,
    /// Value of the best-response surfaces at the root.
    pub value: f64,
    pub tol: f64,
    pub certify_mart: Certificate,
    pub certify_stop: Certificate,
    pub martingale: MartingaleReport,
    pub support: SupportReport,
    /// Root residual of the ex-ante identity.
    pub ex_ante_residual: f64,
    pub meta: Meta,
}

/// Certifies an equilibrium file against its game; writes `report.json` and
/// the per-node table `nodes.csv`.
pub fn cmd_verify(game_path: &Path, eq_path: &Path, tol: f64, out: &Path, cap: usize) -> Result<Outcome, CliError> {
    let game = read_game(game_path)?;
    let eq: EquilibriumFile = read_json(eq_path)?;
    let profile = eq.to_profile(&game).map_err(|e| e.in_file(eq_path))?;
    let surfaces = best_response_values(&game, &profile)?;
    let root = game.tree.root();
    let martingale = martingale_report(&game, &profile, &surfaces, &Overrides::default(), tol)?;
    let support = support_report(&game, &profile, &surfaces)?;
    let ex_ante_residual = ex_ante_check(&game, &profile, &surfaces, root)?;
    let mart = certify_mart(&game, &profile, &surfaces, tol)?;
    let u0 = [surfaces.u[0][root], surfaces.u[1][root]];
    let stop = certify_stop(&game, &profile, u0, surfaces.value(root), cap, tol)?;
    let value = surfaces.value(root);
    let matches = (value - eq.value).abs() <= tol;
    let certified = mart.certified() && stop.certified() && matches;

    make_dir(out)?;
    let meta = Meta { tol: Some(tol), ..Meta::new("verify") };
    let path = out.join("nodes.csv");
    let mut w = csv_writer(&path, &meta)?;
    let csv_err = |e: csv::Error| CliError::Csv { path: path.clone(), message: e.to_string() };
    w.write_record(["node", "t", "p", "U0", "U1", "V", "Z0", "Z1", "Y2"]).map_err(csv_err)?;
    for n in 0..game.tree.len() {
        let t = game.grid.points()[game.tree.depth(n)];
        w.write_record([
            n.to_string(),
            num(t),
            num(surfaces.belief.p[n]),
            num(surfaces.u[0][n]),
            num(surfaces.u[1][n]),
            num(surfaces.v[n]),
            num(support.z[0][n]),
            num(support.z[1][n]),
            num(support.y[n]),
        ])
        .map_err(csv_err)?;
    }
    finish_csv(w, &path)?;

    let mut lines = vec![format!(
        "{} value {value:?} (claimed {:?})",
        if certified { "certified" } else { "rejected" },
        eq.value
    )];
    if !certified {
        lines.push("condition        where            residual".into());
        for (name, cert) in [("mart", &mart), ("stop", &stop)] {
            for v in &cert.violations {
                let at = match (v.node, v.rule, v.regime) {
                    (Some(n), _, Some(r)) => format!("node {n} regime {r}"),
                    (Some(n), _, None) => format!("node {n}"),
                    (None, Some(k), _) => format!("rule {k}"),
                    _ => "root".into(),
                };
                lines.push(format!("{name}:{:<10} {at:<16} {:.3e}", v.condition, v.residual));
            }
        }
        if !matches {
            lines.push(format!("value            root             {:.3e}", (value - eq.value).abs()));
        }
        lines.push(format!("flat-off informed               {:.3e}", support.max_flat_off_informed));
        lines.push(format!("flat-off uninformed             {:.3e}", support.max_flat_off_uninformed));
    }
    let report = ScenarioReport {
        certified,
        claimed_value: eq.value,
        value,
        tol,
        certify_mart: mart,
        certify_stop: stop,
        martingale,
        support,
        ex_ante_residual,
        meta,
    };
    write_json(&out.join("report.json"), &report)?;
    Ok(Outcome::new(if certified { exit::SUCCESS } else { exit::REJECTED }, lines.join("\n")))
}

/// Summary of a path simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub paths: usize,
    pub steps: usize,
    pub dt: f64,
    pub mean_terminal_psi: f64,
    pub stderr_terminal_psi: f64,
    pub exited: usize,
    pub clamped_steps: u64,
    pub max_clamp_excursion: f64,
    pub meta: Meta,
}

/// Summary of a PDE solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeSummary {
    /// `v`, `u^0`, `u^1` at `(0, pi, x0)`.
    pub v0: f64,
    pub u: [f64; 2],
    pub link_residual: f64,
    pub total_iterations: usize,
    pub max_iterations: usize,
    pub informed_stop_points: [usize; 2],
    pub uninformed_stop_points: usize,
    pub meta: Meta,
}

/// Summary of strategy extraction over simulated paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractSummary {
    pub paths: usize,
    /// Largest per-path informed mass placed outside the stopping sets.
    pub max_off_set_mass: [f64; 2],
    /// Fraction of paths on which the uninformed player stops before the horizon.
    pub uninformed_stops_early: f64,
    pub meta: Meta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsVerifyReport {
    pub passed: bool,
    pub value: f64,
    #[serde(flatten)]
    pub report: SufficiencyReport,
    pub meta: Meta,
}

fn dynamics_meta(args: &DynamicsArgs, step: &str, dt: f64) -> Meta {
    Meta {
        command: format!("dynamics-{step}"),
        seed: Some(args.seed),
        dt: Some(dt),
        grid: Some(args.grid.to_string()),
        paths: Some(args.paths),
        tol: None,
    }
}

fn surfaces_for(args: &DynamicsArgs, model: &DiffusionModel, payoffs: &StoppingPayoffs) -> Result<PdeSurfaces, CliError> {
    let options = PdeOptions::default();
    match &args.surfaces {
        Some(path) => {
            let (meta, s) = io::read_surfaces(path, model, payoffs, options.set_tol)?;
            if meta.grid.as_deref() != Some(args.grid.to_string().as_str()) {
                return Err(CliError::Input(format!(
                    "{}: surfaces on grid {:?}, --grid is {}",
                    path.display(),
                    meta.grid,
                    args.grid
                )));
            }
            Ok(s)
        }
        None => {
            let grid = PdeGrid::for_model(args.grid, model).map_err(|e| CliError::field("grid", e))?;
            Ok(pde_solve_system(model, payoffs, &grid, &options)?)
        }
    }
}

/// `dynamics simulate|pde|extract|verify`.
pub fn cmd_dynamics(args: &DynamicsArgs) -> Result<Outcome, CliError> {
    let (model, payoffs) = io::read_model(&args.model)?;
    if !(args.dt > 0.0 && args.dt.is_finite()) {
        return Err(CliError::Input(format!("--dt {} must be positive", args.dt)));
    }
    if args.paths == 0 {
        return Err(CliError::Input("--paths must be at least 1".into()));
    }
    let (steps, dt) = model.steps_for(args.dt)?;
    let device = RandomDevice::new(args.seed, 0);
    make_dir(&args.out)?;
    match args.step {
        DynamicsStep::Simulate => {
            let meta = dynamics_meta(args, "simulate", dt);
            let recording = Recording::Every(args.every.max(1));
            let bundle = if args.regime {
                simulate_regime_paths(&model, args.paths, dt, recording, device)?
            } else {
                simulate_filter_paths(&model, args.paths, dt, recording, device)?
            };
            let path = args.out.join("paths.csv");
            let mut w = csv_writer(&path, &meta)?;
            let csv_err = |e: csv::Error| CliError::Csv { path: path.clone(), message: e.to_string() };
            let mut header = vec!["path_id", "t", "X", "psi"];
            if bundle.regime.is_some() {
                header.push("J");
            }
            w.write_record(&header).map_err(csv_err)?;
            let times = bundle.times();
            for i in 0..bundle.n {
                let (x, psi) = (bundle.x_path(i), bundle.psi_path(i));
                for (c, t) in times.iter().enumerate() {
                    let mut row = vec![i.to_string(), num(*t), num(x[c]), num(psi[c])];
                    if let Some(j) = &bundle.regime {
                        row.push(j[i].to_string());
                    }
                    w.write_record(&row).map_err(csv_err)?;
                }
            }
            finish_csv(w, &path)?;
            let terminal = Estimate::from_samples(&bundle.terminal_psi());
            let summary = SimulateSummary {
                paths: bundle.n,
                steps,
                dt,
                mean_terminal_psi: terminal.mean,
                stderr_terminal_psi: terminal.stderr,
                exited: bundle.exited.iter().filter(|&&e| e).count(),
                clamped_steps: bundle.clamp.count,
                max_clamp_excursion: bundle.clamp.max_excursion,
                meta,
            };
            write_json(&args.out.join("simulate.json"), &summary)?;
            Ok(Outcome::new(
                exit::SUCCESS,
                format!("{} paths, mean psi_T {:.6} +- {:.2e}", bundle.n, terminal.mean, terminal.stderr),
            ))
        }
        DynamicsStep::Pde => {
            let meta = dynamics_meta(args, "pde", dt);
            let s = surfaces_for(args, &model, &payoffs)?;
            io::write_surfaces(&args.out.join("surfaces.csv"), &s, &meta)?;
            let count = |v: &[bool]| v.iter().filter(|&&b| b).count();
            let summary = PdeSummary {
                v0: s.v_at(0.0, model.pi, model.x0),
                u: [s.u_at(0, 0.0, model.pi, model.x0), s.u_at(1, 0.0, model.pi, model.x0)],
                link_residual: s.link_residual,
                total_iterations: s.iterations.iter().sum(),
                max_iterations: s.iterations.iter().copied().max().unwrap_or(0),
                informed_stop_points: [count(&s.informed_stop[0]), count(&s.informed_stop[1])],
                uninformed_stop_points: count(&s.uninformed_stop),
                meta,
            };
            write_json(&args.out.join("pde.json"), &summary)?;
            Ok(Outcome::new(
                exit::SUCCESS,
                format!("v(0, pi, x0) = {:.6} link residual {:.3e}", summary.v0, summary.link_residual),
            ))
        }
        DynamicsStep::Extract => {
            let meta = dynamics_meta(args, "extract", dt);
            let s = surfaces_for(args, &model, &payoffs)?;
            let map = extract_strategies(&s, dt);
            let bundle = simulate_regime_paths(&model, args.paths, dt, Recording::Full, device)?;
            let regimes = bundle.regime.as_ref().expect("regime simulation labels paths");
            let path = args.out.join("strategies.csv");
            let mut w = csv_writer(&path, &meta)?;
            let csv_err = |e: csv::Error| CliError::Csv { path: path.clone(), message: e.to_string() };
            w.write_record(["path_id", "t", "X", "psi", "J", "p", "xi0", "xi1", "zeta"]).map_err(csv_err)?;
            let times = bundle.times();
            let mut off = [0.0_f64; 2];
            let mut early = 0usize;
            for i in 0..bundle.n {
                let (x, psi) = (bundle.x_path(i), bundle.psi_path(i));
                let sp = map.evaluate(x, psi);
                for c in 0..2 {
                    off[c] = off[c].max(sp.off_set_mass[c]);
                }
                if sp.zeta.len() >= 2 && sp.zeta[sp.zeta.len() - 2] >= 1.0 {
                    early += 1;
                }
                for (k, t) in times.iter().enumerate() {
                    w.write_record([
                        i.to_string(),
                        num(*t),
                        num(x[k]),
                        num(psi[k]),
                        regimes[i].to_string(),
                        num(sp.belief[k]),
                        num(sp.xi[0][k]),
                        num(sp.xi[1][k]),
                        num(sp.zeta[k]),
                    ])
                    .map_err(csv_err)?;
                }
            }
            finish_csv(w, &path)?;
            let summary = ExtractSummary {
                paths: bundle.n,
                max_off_set_mass: off,
                uninformed_stops_early: early as f64 / bundle.n as f64,
                meta,
            };
            write_json(&args.out.join("extract.json"), &summary)?;
            Ok(Outcome::new(
                exit::SUCCESS,
                format!("{} paths, off-set mass {:.2e} / {:.2e}", bundle.n, off[0], off[1]),
            ))
        }
        DynamicsStep::Verify => {
            let meta = Meta { tol: Some(args.tol), ..dynamics_meta(args, "verify", dt) };
            let s = surfaces_for(args, &model, &payoffs)?;
            let map = extract_strategies(&s, dt);
            let options = VerifyOptions { n: args.paths, dt, alpha: args.alpha, tol: args.tol, ..VerifyOptions::default() };
            let options = VerifyOptions { blocks: options.blocks.min(steps), ..options };
            let report = mc_verify_sufficiency(&model, &payoffs, &s, &map, &options, device)?;
            let passed = report.all_passed();
            let lines: Vec<String> = report
                .conditions
                .iter()
                .map(|c| format!("({}) {} {:.3e}", c.condition, if c.passed { "pass" } else { "FAIL" }, c.statistic))
                .collect();
            let out = DynamicsVerifyReport { passed, value: s.v_at(0.0, model.pi, model.x0), report, meta };
            write_json(&args.out.join("verify.json"), &out)?;
            Ok(Outcome::new(if passed { exit::SUCCESS } else { exit::REJECTED }, lines.join("\n")))
        }
    }
}
