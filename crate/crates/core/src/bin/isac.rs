use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bistatic_isac::eval::{count_identity_swaps, evaluate, write_cdf_csv, write_summary_csv, EvalConfig};
use bistatic_isac::io::capture::{read_capture, write_capture, CaptureHeader};
use bistatic_isac::io::config::{load_sense_config, load_simulation_config};
use bistatic_isac::io::records::{load_track_records, load_truth_csv, save_track_records, save_truth_csv};
use bistatic_isac::pipeline::track_records;
use bistatic_isac::sim::synthesize_capture;
use bistatic_isac::{Error, Result, Sensor};

/// Bistatic OFDM sensing: simulate captures, detect and track targets,
/// score tracks against ground truth.
#[derive(Parser)]
#[command(name = "isac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a capture and its ground truth from a scene file.
    Simulate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ground-truth CSV; defaults to `<out stem>_truth.csv`.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Run the sensing chain over a capture and write track updates.
    Sense {
        #[arg(long)]
        capture: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Localization error of confirmed tracks against ground truth.
    Eval {
        #[arg(long)]
        tracks: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Summary CSV.
        #[arg(long)]
        out: PathBuf,
        /// Error CDF CSV; defaults to `<out stem>_cdf.csv`.
        #[arg(long)]
        cdf: Option<PathBuf>,
        /// Largest record-to-truth time gap, seconds.
        #[arg(long, default_value_t = EvalConfig::default().tolerance)]
        tolerance: f64,
        /// Largest errors left out of the trimmed mean.
        #[arg(long, default_value_t = EvalConfig::default().outliers_excluded)]
        outliers: usize,
    },
    /// Print a capture header.
    Info {
        #[arg(long)]
        capture: PathBuf,
    },
}

fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn create_file(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn simulate(scene: &Path, out: &Path, seed: u64, truth: Option<PathBuf>) -> Result<()> {
    let cfg = load_simulation_config(scene)?;
    let capture = synthesize_capture(&cfg.resolved_scene(), &cfg.radio, cfg.packets, seed)?;
    write_capture(out, &CaptureHeader::for_radio(&cfg.radio, cfg.packets), &capture.packets)?;
    let truth_path = truth.unwrap_or_else(|| sibling(out, "_truth", "csv"));
    save_truth_csv(&truth_path, &capture.truth)?;
    println!(
        "wrote {} packets to {} and {} truth rows to {}",
        cfg.packets,
        out.display(),
        capture.truth.len(),
        truth_path.display()
    );
    Ok(())
}

fn sense(capture: &Path, config: &Path, out: &Path) -> Result<()> {
    let cfg = load_sense_config(config)?;
    let file = read_capture(capture)?;
    let radio = cfg.radio_for(&file.header)?;
    let mut sensor = Sensor::new(radio, cfg)?;
    let reports = sensor.process_capture(&file.packets)?;
    let records = track_records(&reports);
    save_track_records(out, &records)?;
    let detections: usize = reports.iter().map(|r| r.detections.len()).sum();
    println!(
        "{} windows, {} detections, {} track updates written to {}",
        reports.len(),
        detections,
        records.len(),
        out.display()
    );
    Ok(())
}

fn eval(tracks: &Path, truth: &Path, out: &Path, cdf: Option<PathBuf>, cfg: EvalConfig) -> Result<()> {
    let records = load_track_records(tracks)?;
    let truth = load_truth_csv(truth)?;
    let report = evaluate(&records, &truth, &cfg)?;
    write_summary_csv(create_file(out)?, &report)?;
    let cdf_path = cdf.unwrap_or_else(|| sibling(out, "_cdf", "csv"));
    write_cdf_csv(create_file(&cdf_path)?, &report.cdf)?;
    let s = &report.overall;
    println!(
        "{} snapshots over {} targets: mean {:.3} m, min {:.3} m, max {:.3} m, {} identity swaps",
        s.count,
        report.targets.len(),
        s.mean,
        s.min,
        s.max,
        count_identity_swaps(&records, &truth, cfg.tolerance)
    );
    Ok(())
}

fn info(capture: &Path) -> Result<()> {
    let h = read_capture(capture)?.header;
    println!("version            {}", h.version);
    println!("subcarriers        {}", h.num_subcarriers);
    println!("antennas           {}", h.num_antennas);
    println!("packets            {}", h.num_packets);
    println!("subcarrier spacing {} Hz", h.subcarrier_spacing);
    println!("carrier frequency  {} Hz", h.carrier_frequency);
    println!("packet period      {} s", h.packet_period);
    println!(
        "duration           {} s",
        h.num_packets as f64 * h.packet_period
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { scene, out, seed, truth } => simulate(&scene, &out, seed, truth),
        Command::Sense { capture, config, out } => sense(&capture, &config, &out),
        Command::Eval {
            tracks,
            truth,
            out,
            cdf,
            tolerance,
            outliers,
        } => eval(
            &tracks,
            &truth,
            &out,
            cdf,
            EvalConfig {
                outliers_excluded: outliers,
                tolerance,
            },
        ),
        Command::Info { capture } => info(&capture),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
