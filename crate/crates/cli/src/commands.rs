use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use ecoplatoon_core::ars::{checkpoint, train as ars_train, PlatoonRollout};
use ecoplatoon_core::eval::{
    ablation_er_vs_dr, eval_seeds, read_csv, rows_to_csv, run_controller, sweep_platoon_size, sweep_weights,
    time_space_svg, write_bands_csv, write_csv, Controller, Metrics, DEFAULT_RATIOS,
};
use ecoplatoon_core::ScenarioConfig;

use crate::manifest::{content_hash, unix_now, RunManifest};
use crate::{
    AblationArgs, Common, ControllerArg, EvalArgs, Overrides, PlotArgs, SizeArgs, TrainArgs, UsageError, WeightArgs,
};

/// File < flags, validated.
fn resolve(common: &Common, overrides: &Overrides, edit: impl FnOnce(&mut ScenarioConfig)) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(v) = overrides.iterations {
        cfg.ars.iterations = v;
    }
    if let Some(v) = overrides.omega1 {
        cfg.reward.omega1 = v;
    }
    if let Some(v) = overrides.omega2 {
        cfg.reward.omega2 = v;
    }
    if let Some(v) = overrides.platoon_size {
        cfg.world.platoon_size = v;
    }
    if let Some(v) = overrides.reward_mode {
        cfg.reward.mode = v.into();
    }
    if let Some(v) = overrides.episodes {
        cfg.eval.episodes = v;
    }
    edit(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn prepare(common: &Common) -> Result<()> {
    if let Some(jobs) = common.jobs {
        if jobs == 0 {
            return Err(UsageError("--jobs must be >= 1".into()).into());
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_trajectory(path: &Path, rows: &[ecoplatoon_core::eval::TrajectoryRow]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let file = File::create(path).with_context(|| format!("writing {}", path.display()))?;
    write_csv(rows, BufWriter::new(file))?;
    Ok(())
}

const CURVE_HEADER: &str = "iteration,mean_reward,smoothed_reward,eval_reward,update_norm\n";

#[derive(Serialize)]
struct CurveRow {
    iteration: usize,
    mean_reward: f64,
    smoothed_reward: f64,
    eval_reward: Option<f64>,
    update_norm: f64,
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let cfg = resolve(&args.common, &args.overrides, |c| {
        if let Some(s) = args.seed {
            c.ars.seed = s;
        }
    })?;
    prepare(&args.common)?;
    let started = unix_now();
    let out = &args.common.out;

    let env = PlatoonRollout::new(cfg.clone())?;
    let total = cfg.ars.iterations;
    let (policy, reports) = ars_train(&cfg.ars, &env, env.action_bounds(), |r, _| {
        if (r.iteration + 1) % 10 == 0 || r.iteration + 1 == total {
            eprintln!(
                "iteration {}/{total}: mean reward {:.2}, smoothed {:.2}",
                r.iteration + 1,
                r.mean_reward,
                r.smoothed_reward
            );
        }
    })?;

    let curve: Vec<CurveRow> = reports
        .iter()
        .map(|r| CurveRow {
            iteration: r.iteration,
            mean_reward: r.mean_reward,
            smoothed_reward: r.smoothed_reward,
            eval_reward: r.eval_reward,
            update_norm: r.update_norm,
        })
        .collect();
    let curve_csv = if curve.is_empty() { CURVE_HEADER.to_string() } else { rows_to_csv(&curve)? };
    write_text(&out.join("training_curve.csv"), &curve_csv)?;

    let sidecar = serde_json::json!({
        "obs_dim": cfg.obs_dim(),
        "platoon_size": cfg.world.platoon_size,
        "omega1": cfg.reward.omega1,
        "omega2": cfg.reward.omega2,
        "reward_mode": cfg.reward.mode,
        "iterations": cfg.ars.iterations,
        "seed": cfg.ars.seed,
        "config_hash": content_hash(cfg.to_toml_string().as_bytes()),
    });
    checkpoint::save(&out.join("policy.bin"), &policy, &sidecar)?;

    let mut manifest = RunManifest::new("train", &cfg, out, started);
    manifest.seeds = vec![cfg.ars.seed];
    manifest.write(out)?;
    println!("wrote {}", out.join("policy.bin").display());
    Ok(())
}

#[derive(Serialize)]
struct MetricsRow<'a> {
    controller: &'a str,
    episodes: usize,
    delay_per_vehicle: f64,
    energy_per_vehicle: f64,
    total_energy: f64,
    full_stops: f64,
    stop_free_fraction: f64,
    total_energy_var: f64,
    delay_var: f64,
}

impl<'a> MetricsRow<'a> {
    fn new(controller: &'a str, m: &Metrics) -> Self {
        Self {
            controller,
            episodes: m.episodes,
            delay_per_vehicle: m.delay_per_vehicle,
            energy_per_vehicle: m.energy_per_vehicle,
            total_energy: m.total_energy,
            full_stops: m.full_stops,
            stop_free_fraction: m.stop_free_fraction,
            total_energy_var: m.total_energy_var,
            delay_var: m.delay_var,
        }
    }
}

#[derive(Serialize)]
struct EpisodeRow {
    seed: u64,
    vehicles: usize,
    delay_per_vehicle: f64,
    energy_per_vehicle: f64,
    total_energy: f64,
    full_stops: usize,
    all_crossed: bool,
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let cfg = resolve(&args.common, &args.overrides, |c| {
        if let Some(s) = args.seed {
            c.eval.seed = s;
        }
    })?;
    let controller = match args.controller {
        ControllerArg::Idm => Controller::Idm,
        ControllerArg::Glosa => Controller::Glosa,
        ControllerArg::Policy => {
            let path = args
                .checkpoint
                .as_ref()
                .ok_or_else(|| UsageError("--controller policy requires --checkpoint".into()))?;
            Controller::Policy(checkpoint::load_for(path, cfg.obs_dim())?)
        }
    };
    prepare(&args.common)?;
    let started = unix_now();
    let out = &args.common.out;

    let seeds = eval_seeds(&cfg, 0, cfg.eval.episodes);
    let run = run_controller(&cfg, &controller, &seeds)?;
    write_text(
        &out.join("metrics.csv"),
        &rows_to_csv(&[MetricsRow::new(controller.name(), &run.metrics)])?,
    )?;
    let per_episode: Vec<EpisodeRow> = run
        .episodes
        .iter()
        .map(|e| EpisodeRow {
            seed: e.seed,
            vehicles: e.metrics.vehicles,
            delay_per_vehicle: e.metrics.delay_per_vehicle,
            energy_per_vehicle: e.metrics.energy_per_vehicle,
            total_energy: e.metrics.total_energy,
            full_stops: e.metrics.full_stops,
            all_crossed: e.metrics.all_crossed,
        })
        .collect();
    write_text(&out.join("episodes.csv"), &rows_to_csv(&per_episode)?)?;
    if args.export_trajectories {
        for e in &run.episodes {
            write_trajectory(&out.join("trajectories").join(format!("episode_{}.csv", e.seed)), &e.rows)?;
        }
    }

    let mut manifest = RunManifest::new("eval", &cfg, out, started);
    manifest.seeds = seeds;
    manifest.write(out)?;
    let m = &run.metrics;
    println!(
        "{}: {} episodes, delay/veh {:.2} s, energy/veh {:.2} Wh, stop-free {:.0}%",
        controller.name(),
        m.episodes,
        m.delay_per_vehicle,
        m.energy_per_vehicle,
        100.0 * m.stop_free_fraction
    );
    Ok(())
}

fn log_line(msg: String) {
    eprintln!("{msg}");
}

pub fn er_vs_dr(args: &AblationArgs) -> Result<()> {
    let cfg = resolve(&args.common, &args.overrides, |c| {
        if let Some(s) = args.seed {
            c.ars.seed = s;
        }
    })?;
    if args.agents == 0 || args.episodes_per_agent == 0 {
        return Err(UsageError("--agents and --episodes-per-agent must be >= 1".into()).into());
    }
    prepare(&args.common)?;
    let started = unix_now();
    let out = &args.common.out;

    let ablation = ablation_er_vs_dr(&cfg, args.agents, args.episodes_per_agent, &mut log_line)?;
    let rows = ablation.rows();
    write_text(&out.join("er_vs_dr.csv"), &rows_to_csv(&rows)?)?;

    let mut manifest = RunManifest::new("experiment er-vs-dr", &cfg, out, started);
    manifest.seeds = (0..args.agents as u64).map(|i| cfg.ars.seed + i).collect();
    manifest
        .seeds
        .extend(eval_seeds(&cfg, 0, args.agents * args.episodes_per_agent));
    manifest.write(out)?;
    for r in rows {
        println!(
            "{:>16}: delay/veh {:8.2} s, platoon energy {:8.2} Wh (var {:.2})",
            r.setting, r.delay_per_vehicle, r.total_energy, r.total_energy_var
        );
    }
    Ok(())
}

pub fn weight_sweep(args: &WeightArgs) -> Result<()> {
    let cfg = resolve(&args.common, &args.overrides, |c| {
        if let Some(s) = args.seed {
            c.ars.seed = s;
        }
    })?;
    let ratios = args.ratios.clone().unwrap_or_else(|| DEFAULT_RATIOS.to_vec());
    prepare(&args.common)?;
    let started = unix_now();
    let out = &args.common.out;

    let sweep = sweep_weights(&cfg, &ratios, &mut log_line)?;
    write_text(&out.join("weight_sweep.csv"), &rows_to_csv(&sweep.rows)?)?;
    write_text(&out.join("idm_baseline.csv"), &rows_to_csv(&[MetricsRow::new("idm", &sweep.idm)])?)?;

    let mut manifest = RunManifest::new("experiment weight-sweep", &cfg, out, started);
    manifest.seeds = std::iter::once(cfg.ars.seed)
        .chain(eval_seeds(&cfg, 0, cfg.eval.episodes))
        .collect();
    manifest.write(out)?;
    for r in &sweep.rows {
        println!(
            "{:>5}: delay {:+6.1}%  energy {:+6.1}%",
            r.ratio, r.delay_improvement_pct, r.energy_improvement_pct
        );
    }
    Ok(())
}

pub fn size_sweep(args: &SizeArgs) -> Result<()> {
    let cfg = resolve(&args.common, &args.overrides, |c| {
        if let Some(s) = args.seed {
            c.ars.seed = s;
        }
    })?;
    if args.sizes.is_empty() {
        return Err(UsageError("--sizes must list at least one platoon size".into()).into());
    }
    prepare(&args.common)?;
    let started = unix_now();
    let out = &args.common.out;

    let sweep = sweep_platoon_size(&cfg, &args.sizes, &mut log_line)?;
    write_text(&out.join("size_sweep.csv"), &rows_to_csv(&sweep.rows)?)?;
    for t in &sweep.trajectories {
        let stem = format!("size{}_{}", t.platoon_size, t.controller);
        write_trajectory(&out.join("trajectories").join(format!("{stem}.csv")), &t.episode.rows)?;
        let program = t.cfg.signal.program()?;
        let title = format!("n = {}, {}", t.platoon_size, t.controller);
        let svg = time_space_svg(&t.episode.rows, &program, t.cfg.world.lane_length_m, &title);
        fs::create_dir_all(out.join("plots"))?;
        write_text(&out.join("plots").join(format!("{stem}.svg")), &svg)?;
    }

    let mut manifest = RunManifest::new("experiment size-sweep", &cfg, out, started);
    manifest.seeds = std::iter::once(cfg.ars.seed)
        .chain(eval_seeds(&cfg, 0, cfg.eval.episodes))
        .collect();
    manifest.write(out)?;
    for r in &sweep.rows {
        println!(
            "n={:<2} {:>6}: delay/veh {:7.2} s, energy/veh {:7.2} Wh, stop-free {:3.0}%",
            r.platoon_size,
            r.controller,
            r.delay_per_vehicle,
            r.energy_per_vehicle,
            100.0 * r.stop_free_fraction
        );
    }
    Ok(())
}

pub fn export_plots(args: &PlotArgs) -> Result<()> {
    let cfg = resolve(&args.common, &Overrides::default(), |_| {})?;
    let file = File::open(&args.trajectories)
        .map_err(|e| UsageError(format!("cannot open {}: {e}", args.trajectories.display())))?;
    let rows = read_csv(file)?;
    prepare(&args.common)?;
    let started = unix_now();
    let out = &args.common.out;

    let program = cfg.signal.program()?;
    let svg = time_space_svg(&rows, &program, cfg.world.lane_length_m, &args.title);
    write_text(&out.join("time_space.svg"), &svg)?;
    let t0 = rows.iter().map(|r| r.time_s).fold(f64::INFINITY, f64::min);
    let t1 = rows.iter().map(|r| r.time_s).fold(f64::NEG_INFINITY, f64::max);
    let bands = if t1 > t0 { program.approach_bands(t0, t1) } else { Vec::new() };
    let file = File::create(out.join("signal_bands.csv"))?;
    write_bands_csv(&bands, BufWriter::new(file))?;

    RunManifest::new("export-plots", &cfg, out, started).write(out)?;
    println!("wrote {}", out.join("time_space.svg").display());
    Ok(())
}
