use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stochtri::harness::{
    evaluate_camera, evaluate_pose, extrinsics_ablation, frame_count_sweep, train_cam, train_pose, Report, SynthConfig,
    Series, Table, TrainConfig, TrainReport, RANSAC_ROW,
};
use stochtri::scorer::{ScoringNetwork, Task};
use stochtri::select::SelectionStrategy;
use stochtri::synth::{generate_dataset, Dataset};
use stochtri::{Error, Result, Skeleton};

#[derive(Parser)]
#[command(name = "stochtri", version, about = "Stochastic pose triangulation and relative camera pose")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat TOML configuration; missing keys take the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dataset JSON file.
    #[arg(long)]
    dataset: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (`dataset.json` in the output directory).
    Synth(Common),
    /// Train a pose scoring network.
    TrainPose(Common),
    /// Train a camera scoring network.
    TrainCam(Common),
    /// Evaluate every selection strategy of a trained network.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        weights: PathBuf,
    },
    /// Compare the weighted pose estimate with RANSAC triangulation.
    CompareRansac {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        weights: PathBuf,
    },
    /// Compare the camera model with the eight-point algorithm over frame counts.
    #[command(name = "compare-8pt")]
    Compare8pt {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50,60,70,80,90,100")]
        frames: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
    },
    /// Pose accuracy with known, partially estimated and estimated extrinsics.
    AblateExtrinsics {
        #[command(flatten)]
        common: Common,
        /// Pose network.
        #[arg(long)]
        weights: PathBuf,
        /// Camera network.
        #[arg(long)]
        cam_weights: PathBuf,
        /// Camera configuration (the pose configuration is `--config`).
        #[arg(long)]
        cam_config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn train_config(common: &Common, task: Task) -> Result<TrainConfig> {
    let mut cfg = match &common.config {
        Some(p) => TrainConfig::load(p, Some(task))?,
        None => TrainConfig::for_task(task),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(d) = &common.dataset {
        cfg.dataset = Some(d.clone());
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg_out: Option<&Path>) -> PathBuf {
    cfg_out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("out"))
}

/// Loads the configured dataset and records its hash in the report.
fn load_dataset(cfg: &TrainConfig, report: &mut Report) -> Result<Dataset> {
    let path = cfg
        .dataset
        .as_deref()
        .ok_or_else(|| Error::Config("no dataset given (--dataset or `dataset` key)".into()))?;
    let bytes = std::fs::read(path).map_err(|e| Error::Dataset {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    report.input("dataset", &bytes);
    let text = String::from_utf8(bytes).map_err(|e| Error::Dataset {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    Dataset::from_json(&text, path)
}

fn load_weights(path: &Path, name: &str, report: &mut Report) -> Result<ScoringNetwork> {
    let bytes = std::fs::read(path).map_err(|e| Error::Weights(format!("{}: {e}", path.display())))?;
    report.input(name, &bytes);
    ScoringNetwork::read_from(bytes.as_slice()).map_err(|e| match e {
        Error::Weights(m) => Error::Weights(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn finish(mut report: Report, dir: &Path) -> Result<()> {
    report.seal();
    for p in report.write(dir)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn loss_summary(rep: &TrainReport) -> Table {
    let mut t = Table::new("training", &["samples", "steps", "smoothed_loss"]);
    let n = rep.losses.len();
    t.push(rep.task.to_string(), vec![n as f64, rep.steps as f64, rep.smoothed_loss(n, 50)]);
    t
}

fn run(cmd: Command) -> Result<()> {
    let skel = Skeleton::human17();
    match cmd {
        Command::Synth(common) => {
            let mut cfg = match &common.config {
                Some(p) => SynthConfig::load(p)?,
                None => SynthConfig::default(),
            };
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            let data = generate_dataset(&cfg.spec()?, &skel)?;
            let dir = out_dir(common.out.as_deref());
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("dataset.json");
            data.save(&path)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::TrainPose(common) => train(&common, Task::Pose, &skel),
        Command::TrainCam(common) => train(&common, Task::Camera, &skel),
        Command::Eval { common, weights } => {
            let mut report = Report::new("eval", None);
            let net = load_weights(&weights, "weights", &mut report)?;
            let cfg = train_config(&common, net.task)?;
            report.config = Some(cfg.clone());
            let data = load_dataset(&cfg, &mut report)?;
            match net.task {
                Task::Pose => {
                    let ev = evaluate_pose(&net, &data, &skel, &SelectionStrategy::ALL, &cfg, true)?;
                    report.tables.push(ev.mpjpe_table());
                    report.tables.push(ev.prior_table());
                }
                Task::Camera => {
                    let ev = evaluate_camera(&net, &data, &SelectionStrategy::ALL, &cfg)?;
                    report.tables.push(ev.strategy_table());
                    report.tables.push(ev.pair_table());
                }
            }
            finish(report, &out_dir(cfg.out.as_deref()))
        }
        Command::CompareRansac { common, weights } => {
            let mut report = Report::new("compare-ransac", None);
            let net = load_weights(&weights, "weights", &mut report)?;
            let cfg = train_config(&common, Task::Pose)?;
            report.config = Some(cfg.clone());
            let data = load_dataset(&cfg, &mut report)?;
            let ev = evaluate_pose(&net, &data, &skel, &[SelectionStrategy::Weight], &cfg, true)?;
            report.tables.push(ev.mpjpe_table());
            report.tables.push(ev.prior_table());
            let mut per_frame = Series::new("per_frame", &["frame", "weight", RANSAC_ROW]);
            for (f, (w, r)) in ev.rows[0].per_frame.iter().zip(&ev.rows[1].per_frame).enumerate() {
                per_frame.rows.push(vec![f as f64, *w, *r]);
            }
            report.series.push(per_frame);
            finish(report, &out_dir(cfg.out.as_deref()))
        }
        Command::Compare8pt {
            common,
            weights,
            frames,
            repeats,
        } => {
            let mut report = Report::new("compare-8pt", None);
            let net = load_weights(&weights, "weights", &mut report)?;
            let cfg = train_config(&common, Task::Camera)?;
            report.config = Some(cfg.clone());
            let data = load_dataset(&cfg, &mut report)?;
            let sweep = frame_count_sweep(&net, &data, &cfg, &frames, repeats)?;
            report.series.push(sweep.series());
            let ev = evaluate_camera(&net, &data, &[SelectionStrategy::Weight], &cfg)?;
            report.tables.push(ev.strategy_table());
            report.tables.push(ev.pair_table());
            finish(report, &out_dir(cfg.out.as_deref()))
        }
        Command::AblateExtrinsics {
            common,
            weights,
            cam_weights,
            cam_config,
        } => {
            let mut report = Report::new("ablate-extrinsics", None);
            let pose_net = load_weights(&weights, "weights", &mut report)?;
            let cam_net = load_weights(&cam_weights, "cam_weights", &mut report)?;
            let pose_cfg = train_config(&common, Task::Pose)?;
            let cam_cfg = train_config(
                &Common {
                    config: cam_config,
                    ..common.clone()
                },
                Task::Camera,
            )?;
            report.config = Some(pose_cfg.clone());
            let data = load_dataset(&pose_cfg, &mut report)?;
            let res = extrinsics_ablation(&pose_net, &cam_net, &data, &skel, &pose_cfg, &cam_cfg)?;
            report.tables.push(res.table());
            let mut est = Table::new("camera_estimates", &["E_R", "E_t_mm", "E_2D_px", "E_3D_mm"]);
            for (v, e) in &res.estimates {
                est.push(
                    format!("({}, {v})", cam_cfg.reference_view),
                    vec![e.rotation, e.translation, e.reprojection_2d, e.reconstruction_3d],
                );
            }
            report.tables.push(est);
            finish(report, &out_dir(pose_cfg.out.as_deref()))
        }
    }
}

fn train(common: &Common, task: Task, skel: &Skeleton) -> Result<()> {
    let cfg = train_config(common, task)?;
    let mut report = Report::new(&format!("train-{task}"), Some(&cfg));
    let data = load_dataset(&cfg, &mut report)?;
    let (net, rep) = match task {
        Task::Pose => train_pose(&cfg, &data, skel)?,
        Task::Camera => train_cam(&cfg, &data)?,
    };
    let dir = out_dir(cfg.out.as_deref());
    std::fs::create_dir_all(&dir)?;
    let weights = dir.join(format!("{task}.net"));
    net.save(&weights)?;
    println!("{}", weights.display());
    report.tables.push(loss_summary(&rep));
    report.series.push(rep.loss_series());
    finish(report, &dir)
}
