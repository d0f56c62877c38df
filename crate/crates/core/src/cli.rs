//! The `egoflow` command line.
//!
//! Every subcommand reads and writes the documented file formats, so stages
//! can be rerun independently against recorded data. Exit status is 0 on
//! success, 2 on a usage error and 1 on any other failure, with a one-line
//! diagnostic on stderr.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::block_match::{compute_flow_field, GrayImage, MatchParams};
use crate::error::{Error, Result};
use crate::flow_core::{
    decode_mv_stream, encode_mv_stream, read_gyro_csv, read_pose_csv, read_range_csv,
    read_velocity_csv, write_pose_csv, write_velocity_csv, CameraIntrinsics, FlowField,
};
use crate::metric_scale::velocity_envelope;
use crate::motion_model::RansacParams;
use crate::pipeline_eval::{evaluate, run_pipeline, EvalReport, PipelineConfig};
use crate::simulator::{read_truth_csv, simulate_sequence, SimConfig};

#[derive(Parser, Debug)]
#[command(name = "egoflow", version, about = "Ground-facing camera ego-motion from block-matching flow")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a synthetic sequence with ground truth and sensor logs.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Override a config value, `key=value`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Block-match consecutive PGM frames into a motion-vector stream.
    Flow {
        /// Directory of `*.pgm` files, or a glob pattern.
        #[arg(long)]
        frames: String,
        #[arg(long)]
        out: String,
        #[command(flatten)]
        matcher: MatcherArgs,
        /// Frame rate used to timestamp the frames.
        #[arg(long, default_value_t = 30.0)]
        fps: f64,
    },
    /// Estimate velocity and pose from a motion-vector stream.
    Estimate {
        #[arg(long)]
        mv: PathBuf,
        #[arg(long)]
        gyro: PathBuf,
        #[arg(long)]
        range: PathBuf,
        #[command(flatten)]
        est: EstimatorArgs,
        #[arg(long)]
        out_vel: String,
        #[arg(long)]
        out_pose: String,
    },
    /// Score estimated velocities (and optionally poses) against ground truth.
    Eval {
        /// Velocity CSV.
        #[arg(long)]
        est: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Pose CSV; enables the trajectory metrics.
        #[arg(long)]
        pose: Option<PathBuf>,
        /// Text report; a `metric,value` CSV twin is written next to it.
        #[arg(long)]
        out: String,
        /// Fit the best rotation between the trajectories.
        #[arg(long)]
        align: bool,
    },
    /// Detectable speed range over a span of ground distances.
    Envelope {
        #[arg(long)]
        focal_px: f64,
        #[arg(long)]
        z_min: f64,
        #[arg(long)]
        z_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        fps: f64,
        #[arg(long, default_value_t = 64)]
        range: i32,
        #[arg(long, default_value_t = 2)]
        step: i32,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// simulate, flow, estimate and eval in one go.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[command(flatten)]
        matcher: MatcherArgs,
        #[arg(long, default_value_t = 210)]
        ransac_iters: usize,
        #[arg(long, default_value_t = 3.0)]
        inlier_thresh: f64,
        #[arg(long)]
        no_compensation: bool,
        #[arg(long)]
        align: bool,
    },
}

#[derive(Args, Debug)]
struct MatcherArgs {
    #[arg(long, default_value_t = 16)]
    mb_size: usize,
    #[arg(long, default_value_t = 64)]
    range: i32,
    #[arg(long, default_value_t = 2)]
    step: i32,
}

impl MatcherArgs {
    fn params(&self) -> MatchParams {
        MatchParams {
            macroblock_size: self.mb_size,
            search_range: self.range,
            step: self.step,
            ..MatchParams::default()
        }
    }
}

#[derive(Args, Debug)]
struct EstimatorArgs {
    #[arg(long)]
    focal_px: f64,
    /// Principal point; defaults to the centre of the macroblock grid.
    #[arg(long)]
    cx: Option<f64>,
    #[arg(long)]
    cy: Option<f64>,
    #[arg(long, default_value_t = 210)]
    ransac_iters: usize,
    #[arg(long, default_value_t = 3.0)]
    inlier_thresh: f64,
    #[arg(long)]
    no_compensation: bool,
}

/// Runs the command line and returns the process exit code. `args` includes
/// the program name.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("egoflow: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate {
            config,
            out_dir,
            overrides,
        } => {
            let cfg = load_config(&config, &overrides)?;
            simulate_sequence(&cfg)?.write_to_dir(&out_dir)
        }
        Command::Flow {
            frames,
            out,
            matcher,
            fps,
        } => {
            if !(fps > 0.0) {
                return Err(Error::domain(format!("fps must be > 0, got {fps}")));
            }
            let paths = frame_paths(&frames)?;
            let fields = flow_from_files(&paths, fps, &matcher.params())?;
            write_bytes(&out, &encode_mv_stream(&fields)?)
        }
        Command::Estimate {
            mv,
            gyro,
            range,
            est,
            out_vel,
            out_pose,
        } => {
            if out_vel == "-" && out_pose == "-" {
                return Err(Error::domain("only one of --out-vel/--out-pose can be `-`"));
            }
            let stream = decode_mv_stream(&read_file(&mv)?)?;
            if stream.truncated {
                eprintln!(
                    "egoflow: {}: truncated trailing frame ignored after byte {}",
                    mv.display(),
                    stream.bytes_consumed
                );
            }
            let gyro = read_gyro_csv(open(&gyro)?)?;
            let range = read_range_csv(open(&range)?)?;
            let cfg = est.config(stream.fields.first())?;
            let out = run_pipeline(&stream.fields, &gyro, &range, &cfg)?;
            write_velocity_csv(create(&out_vel)?, &out.velocities)?;
            write_pose_csv(create(&out_pose)?, &out.poses)
        }
        Command::Eval {
            est,
            truth,
            pose,
            out,
            align,
        } => {
            let vel = read_velocity_csv(open(&est)?)?;
            let truth = read_truth_csv(open(&truth)?)?;
            let poses = pose.map(|p| read_pose_csv(open(&p)?)).transpose()?;
            let report = evaluate(&vel, poses.as_deref(), &truth, align)?;
            write_report(&out, &report)
        }
        Command::Envelope {
            focal_px,
            z_min,
            z_max,
            steps,
            fps,
            range,
            step,
            out,
        } => {
            let rows = envelope_rows(focal_px, z_min, z_max, steps, fps, range, step)?;
            let mut w = csv::Writer::from_writer(create(&out)?);
            w.write_record(["z", "v_min", "v_max"])?;
            for (z, lo, hi) in rows {
                w.write_record([z.to_string(), lo.to_string(), hi.to_string()])?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Pipeline {
            config,
            out_dir,
            overrides,
            matcher,
            ransac_iters,
            inlier_thresh,
            no_compensation,
            align,
        } => {
            let cfg = load_config(&config, &overrides)?;
            let sim = simulate_sequence(&cfg)?;
            sim.write_to_dir(&out_dir)?;

            let params = matcher.params();
            let times = sim.frame_times();
            let fields = flow_from_frames(sim.frames.iter().map(Ok), &times, &params)?;
            write_bytes(
                &out_dir.join("flow.mvs").to_string_lossy(),
                &encode_mv_stream(&fields)?,
            )?;

            let pcfg = PipelineConfig {
                cam: cfg.cam,
                match_params: params,
                ransac: RansacParams {
                    iterations: ransac_iters,
                    inlier_threshold: inlier_thresh,
                    ..RansacParams::default()
                },
                compensation_enabled: !no_compensation,
            };
            let out = run_pipeline(&fields, &sim.gyro, &sim.range, &pcfg)?;
            let vel_path = out_dir.join("velocity.csv");
            let pose_path = out_dir.join("pose.csv");
            write_velocity_csv(create_path(&vel_path)?, &out.velocities)?;
            write_pose_csv(create_path(&pose_path)?, &out.poses)?;

            let report = evaluate(&out.velocities, Some(&out.poses), &sim.truth, align)?;
            write_report(&out_dir.join("report.txt").to_string_lossy(), &report)?;
            print!("{}", report.to_text());
            Ok(())
        }
    }
}

impl EstimatorArgs {
    fn config(&self, first: Option<&FlowField>) -> Result<PipelineConfig> {
        let first = first.ok_or_else(|| Error::domain("empty motion-vector stream"))?;
        let w = first.grid_w * first.macroblock_size;
        let h = first.grid_h * first.macroblock_size;
        let cam = CameraIntrinsics::new(
            self.focal_px,
            self.cx.unwrap_or(w as f64 / 2.0),
            self.cy.unwrap_or(h as f64 / 2.0),
            w,
            h,
        )?;
        let ransac = RansacParams {
            iterations: self.ransac_iters,
            inlier_threshold: self.inlier_thresh,
            ..RansacParams::default()
        };
        ransac.validate()?;
        Ok(PipelineConfig {
            cam,
            match_params: MatchParams {
                macroblock_size: first.macroblock_size,
                ..MatchParams::default()
            },
            ransac,
            compensation_enabled: !self.no_compensation,
        })
    }
}

fn load_config(path: &Path, overrides: &[String]) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let cfg = SimConfig::from_kv_str(&text)?;
    let pairs = overrides
        .iter()
        .map(|s| {
            s.split_once('=').ok_or_else(|| Error::Config {
                line: 0,
                msg: format!("override `{s}` is not key=value"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    cfg.with_overrides(pairs)
}

/// PGM files of a directory, or the matches of a glob, in lexical order.
fn frame_paths(spec: &str) -> Result<Vec<PathBuf>> {
    let pattern = if Path::new(spec).is_dir() {
        let escaped = glob::Pattern::escape(spec);
        format!("{}/*.pgm", escaped.trim_end_matches('/'))
    } else {
        spec.to_owned()
    };
    let entries = glob::glob(&pattern).map_err(|e| Error::domain(format!("bad pattern `{spec}`: {e}")))?;
    let mut paths = entries
        .map(|p| p.map_err(|e| Error::file(e.path().to_owned(), std::io::Error::other(e.to_string()))))
        .collect::<Result<Vec<_>>>()?;
    paths.retain(|p| p.is_file());
    paths.sort();
    if paths.is_empty() {
        return Err(Error::domain(format!("no frames found in `{spec}`")));
    }
    Ok(paths)
}

fn flow_from_files(paths: &[PathBuf], fps: f64, params: &MatchParams) -> Result<Vec<FlowField>> {
    let times: Vec<f64> = (0..paths.len()).map(|k| k as f64 / fps).collect();
    flow_from_frames(paths.iter().map(GrayImage::read_pgm), &times, params)
}

/// The stream for a frame sequence: a zero placeholder for frame 0, then the
/// field from each frame to the next. Only two frames are held at a time.
fn flow_from_frames<F>(
    frames: impl IntoIterator<Item = Result<F>>,
    times: &[f64],
    params: &MatchParams,
) -> Result<Vec<FlowField>>
where
    F: std::borrow::Borrow<GrayImage>,
{
    params.validate()?;
    let mut fields = Vec::with_capacity(times.len());
    let mut prev: Option<F> = None;
    for (k, frame) in frames.into_iter().enumerate() {
        let frame = frame?;
        let img = frame.borrow();
        let field = match &prev {
            None => FlowField::zeros(
                0,
                times[0],
                img.width / params.macroblock_size,
                img.height / params.macroblock_size,
                params.macroblock_size,
            ),
            Some(p) => compute_flow_field(p.borrow(), img, times[k], k as u32, params)?,
        };
        fields.push(field);
        prev = Some(frame);
    }
    Ok(fields)
}

fn envelope_rows(
    focal_px: f64,
    z_min: f64,
    z_max: f64,
    steps: usize,
    fps: f64,
    range: i32,
    step: i32,
) -> Result<Vec<(f64, f64, f64)>> {
    if steps == 0 {
        return Err(Error::domain("--steps must be at least 1"));
    }
    if !(z_min > 0.0 && z_max >= z_min) {
        return Err(Error::domain(format!("need 0 < z-min <= z-max, got {z_min}, {z_max}")));
    }
    // Only the focal length enters the envelope.
    let cam = CameraIntrinsics::centered(focal_px, 1, 1)?;
    let params = MatchParams {
        search_range: range,
        step,
        ..MatchParams::default()
    };
    (0..steps)
        .map(|i| {
            let z = if steps == 1 {
                z_min
            } else {
                z_min + (z_max - z_min) * i as f64 / (steps - 1) as f64
            };
            let (lo, hi) = velocity_envelope(&cam, z, fps, &params)?;
            Ok((z, lo, hi))
        })
        .collect()
}

fn write_report(out: &str, report: &EvalReport) -> Result<()> {
    if out == "-" {
        print!("{}", report.to_text());
        return Ok(());
    }
    let path = Path::new(out);
    let (text_path, csv_path) = if path.extension().is_some_and(|e| e == "csv") {
        (path.with_extension("txt"), path.to_owned())
    } else {
        (path.to_owned(), path.with_extension("csv"))
    };
    write_path(&text_path, report.to_text().as_bytes())?;
    write_path(&csv_path, report.to_csv().as_bytes())
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::file(path, e))
}

fn open(path: &Path) -> Result<impl Read> {
    File::open(path).map(BufReader::new).map_err(|e| Error::file(path, e))
}

fn create_path(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::file(path, e))
}

/// A file, or stdout for `-`.
fn create(out: &str) -> Result<Box<dyn Write>> {
    if out == "-" {
        Ok(Box::new(std::io::stdout().lock()))
    } else {
        Ok(Box::new(create_path(Path::new(out))?))
    }
}

fn write_path(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::file(path, e))
}

fn write_bytes(out: &str, bytes: &[u8]) -> Result<()> {
    let mut w = create(out)?;
    w.write_all(bytes)?;
    w.flush()?;
    Ok(())
}
