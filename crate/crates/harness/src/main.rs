use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vistac_core::annotate::LabelKind;
use vistac_core::imageio::write_pgm;
use vistac_harness::config::DetectorChoice;
use vistac_harness::dataset_io::{load_detector, read_dataset, save_detector, write_dataset};
use vistac_harness::detection::{evaluate, make_samples, train_detector, Split};
use vistac_harness::experiments::{run_experiment_with, Artifacts, RunOutput};
use vistac_harness::report::{Condition, ExperimentId, ExperimentReport};
use vistac_harness::thresholds::checks;
use vistac_harness::{HarnessConfig, HarnessError, Result};

#[derive(Parser)]
#[command(name = "vistac", version, about = "Visual-tactile grasping simulator and experiment runner")]
struct Cli {
    /// JSON configuration with per-module sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write predicted Q maps as PGM under <out-dir>/heatmaps (`--dump-heatmaps=N` for N maps).
    #[arg(long, global = true, value_name = "N", num_args = 0..=1, require_equals = true, default_missing_value = "8")]
    dump_heatmaps: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    UnseenBackgrounds,
    UnseenClasses,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::UnseenBackgrounds => Split::UnseenBackgrounds,
            SplitArg::UnseenClasses => Split::UnseenClasses,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelArg {
    Gaussian,
    Binary,
}

#[derive(Subcommand)]
enum Command {
    /// Render a detection split to disk with a checksum manifest.
    GenDataset {
        #[arg(long, value_enum, default_value = "train")]
        split: SplitArg,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, value_enum)]
        label: Option<LabelArg>,
    },
    /// Train the detector and write its checkpoint.
    Train {
        /// Dataset directory from gen-dataset; generated in memory when absent.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Evaluate a detector checkpoint on a dataset or through E1/E1b/E2/E3.
    EvalDetect {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value = "E1")]
        experiment: String,
    },
    /// Grasping episodes: E4, E5 or E6.
    RunEpisodes {
        #[arg(long, default_value = "E5")]
        experiment: String,
        /// Use this detector checkpoint instead of the oracle.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Gaussian versus binary labels (E1c).
    AblateLabels,
    /// Tactile position exploration step sweep (E7).
    ExploreTpe,
    /// Summarise saved reports; with --check, exit 4 when a threshold fails.
    Report {
        #[arg(long)]
        check: bool,
        /// Run these experiments first (e.g. E5,E7) instead of only reading saved reports.
        #[arg(long, value_delimiter = ',')]
        run: Vec<String>,
    },
}

fn load_config(cli: &Cli) -> Result<HarnessConfig> {
    let mut cfg = match &cli.config {
        Some(p) => HarnessConfig::load(p)?,
        None => HarnessConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn reports_dir(out: &Path) -> PathBuf {
    out.join("reports")
}

fn default_checkpoint(out: &Path) -> PathBuf {
    out.join("models").join("detector")
}

fn print_report(r: &ExperimentReport) {
    println!("{} ({:.1} s)", r.id, r.wallclock_s);
    for Condition { name, n, metrics } in &r.conditions {
        let body: Vec<String> = metrics.iter().map(|(k, v)| format!("{k}={v:.4}")).collect();
        println!("  {name:<32} n={n:<5} {}", body.join(" "));
    }
}

fn finish(cli: &Cli, report: &ExperimentReport, out: RunOutput) -> Result<()> {
    let (json, _) = report.save(&reports_dir(&cli.out_dir))?;
    if cli.dump_heatmaps.is_some() {
        let dir = cli.out_dir.join("heatmaps");
        std::fs::create_dir_all(&dir)?;
        for (name, q) in &out.heatmaps {
            write_pgm(q, &dir.join(format!("{}_{name}.pgm", report.id)))?;
        }
    }
    print_report(report);
    println!("wrote {}", json.display());
    Ok(())
}

fn run_id(cli: &Cli, cfg: &HarnessConfig, id: ExperimentId, detector: Option<PathBuf>) -> Result<()> {
    let mut artifacts = Artifacts { keep_heatmaps: cli.dump_heatmaps.unwrap_or(0), ..Artifacts::default() };
    if let Some(stem) = detector {
        artifacts.detector = Some(load_detector(&stem)?.model);
    }
    let (report, out) = run_experiment_with(id, cfg, artifacts)?;
    finish(cli, &report, out)
}

fn run(cli: &Cli) -> Result<i32> {
    let mut cfg = load_config(cli)?;
    match &cli.command {
        Command::GenDataset { split, count, label } => {
            let split = Split::from(*split);
            let d = &cfg.detection;
            let count = count.unwrap_or(match split {
                Split::Train => d.train_images,
                _ => d.test_images,
            });
            let label = match label {
                Some(LabelArg::Gaussian) => LabelKind::Gaussian,
                Some(LabelArg::Binary) => LabelKind::Binary,
                None => d.label,
            };
            let samples = make_samples(d, split, count, cfg.seed, label)?;
            let dir = cli.out_dir.join("datasets").join(split.name());
            let m = write_dataset(&dir, &samples, split, cfg.seed, serde_json::to_value(d)?)?;
            println!("wrote {} samples ({} files) to {}", m.count, m.files.len(), dir.display());
        }
        Command::Train { dataset } => {
            let d = &cfg.detection;
            let samples = match dataset {
                Some(dir) => read_dataset(dir)?.1,
                None => make_samples(d, Split::Train, d.train_images, cfg.seed, d.label)?,
            };
            let (model, rep) = train_detector(d, &samples, |e, l| eprintln!("epoch {e:>3} loss {l:.6}"))?;
            let stem = default_checkpoint(&cli.out_dir);
            save_detector(&model, d.r_max_px, &stem)?;
            rep.write_csv(&stem.with_extension("loss.csv"))?;
            println!("initial loss {:.6}, final loss {:.6}", rep.initial_loss, rep.final_loss);
            println!("wrote {}", stem.with_extension("json").display());
        }
        Command::EvalDetect { checkpoint, dataset, experiment } => {
            let stem = checkpoint.clone().unwrap_or_else(|| default_checkpoint(&cli.out_dir));
            if let Some(dir) = dataset {
                let det = load_detector(&stem)?;
                let (_, samples) = read_dataset(dir)?;
                let (m, maps, _) = evaluate(&det.model, &samples, &cfg.detection)?;
                println!(
                    "n={} accuracy={:.4} mean_god={:.4} mean_argmax_dist_px={:.3}",
                    m.n, m.accuracy, m.mean_god, m.mean_argmax_dist
                );
                if let Some(k) = cli.dump_heatmaps {
                    let hdir = cli.out_dir.join("heatmaps");
                    std::fs::create_dir_all(&hdir)?;
                    for (i, map) in maps.iter().take(k).enumerate() {
                        write_pgm(&map.q, &hdir.join(format!("eval_{i:03}.pgm")))?;
                    }
                }
            } else {
                let id: ExperimentId = experiment.parse()?;
                if !matches!(id, ExperimentId::E1 | ExperimentId::E1b | ExperimentId::E2 | ExperimentId::E3) {
                    return Err(HarnessError::Config(format!("eval-detect runs E1, E1b, E2 or E3, not {id}")));
                }
                run_id(cli, &cfg, id, Some(stem))?;
            }
        }
        Command::RunEpisodes { experiment, checkpoint } => {
            let id: ExperimentId = experiment.parse()?;
            if !matches!(id, ExperimentId::E4 | ExperimentId::E5 | ExperimentId::E6) {
                return Err(HarnessError::Config(format!("run-episodes runs E4, E5 or E6, not {id}")));
            }
            if let Some(stem) = checkpoint {
                cfg.episodes.detector = DetectorChoice::Trained { checkpoint: stem.clone() };
            }
            run_id(cli, &cfg, id, None)?;
        }
        Command::AblateLabels => run_id(cli, &cfg, ExperimentId::E1c, None)?,
        Command::ExploreTpe => run_id(cli, &cfg, ExperimentId::E7, None)?,
        Command::Report { check, run } => {
            for name in run {
                let id: ExperimentId = name.parse()?;
                run_id(cli, &cfg, id, None)?;
            }
            let dir = reports_dir(&cli.out_dir);
            let mut found = 0;
            let mut failed = 0;
            for id in ExperimentId::ALL {
                let path = dir.join(format!("{id}.json"));
                if !path.exists() {
                    continue;
                }
                found += 1;
                let r = ExperimentReport::load(&path)?;
                print_report(&r);
                if *check {
                    for c in checks(&r) {
                        println!("  [{}] {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                        failed += !c.passed as usize;
                    }
                }
            }
            if found == 0 {
                return Err(HarnessError::MissingArtifact(format!("no reports under {}", dir.display())));
            }
            if failed > 0 {
                return Ok(4);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
