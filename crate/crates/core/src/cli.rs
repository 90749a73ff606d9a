//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 legalization failure,
//! 3 legal result after a global placement rollback. `check` exits 1 when
//! the placement has violations.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{
    generate_benchmark, parse_design, parse_layout, parse_metrics, parse_placement, write_design, write_layout,
    write_placement, write_svg, PlacementFile, Profile,
};
use crate::legalize::legalize;
use crate::model::{check_legality, merge_cascades, Design, FpgaLayout, Point};
use crate::pipeline::{place, PlaceConfig};
use crate::score::{score_table, HIDDEN_WEIGHT};
use crate::wirelength::hpwl;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_ROLLBACK: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "macroplace", version, about = "FPGA macro placement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic benchmark (layout and design) for a seed and profile.
    Generate {
        #[arg(long)]
        seed: u64,
        /// tiny, small or medium.
        #[arg(long)]
        profile: Profile,
        /// Output layout file.
        #[arg(long)]
        layout: PathBuf,
        /// Output design file.
        #[arg(long)]
        design: PathBuf,
    },
    /// Global placement and legalization.
    Place(PlaceArgs),
    /// Legalize the macros of an existing placement.
    Legalize {
        #[command(flatten)]
        input: PlacedInput,
        #[arg(long)]
        out: PathBuf,
        /// Candidate sites per macro in the matching phases.
        #[arg(long, default_value_t = crate::legalize::DEFAULT_K_CAND)]
        k_cand: usize,
    },
    /// Report legality violations; exit 0 only when there are none.
    Check {
        #[command(flatten)]
        input: PlacedInput,
    },
    /// Print total and per-net HPWL.
    Eval {
        #[command(flatten)]
        input: PlacedInput,
    },
    /// Score router metrics and print the weighted final score.
    Score {
        /// Metrics files.
        #[arg(required = true)]
        metrics: Vec<PathBuf>,
        /// Weight of hidden designs relative to public ones.
        #[arg(long, default_value_t = HIDDEN_WEIGHT)]
        hidden_weight: f64,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a placement as SVG.
    Plot {
        #[command(flatten)]
        input: PlacedInput,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct PlaceArgs {
    #[arg(long)]
    pub layout: PathBuf,
    #[arg(long)]
    pub design: PathBuf,
    /// Output placement file.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML file with `k_cand` and a `[gp]` table.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Global placement trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// SVG of the final placement.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Run manifest (JSON). Defaults to `<out>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlacedInput {
    #[arg(long)]
    pub layout: PathBuf,
    #[arg(long)]
    pub design: PathBuf,
    #[arg(long)]
    pub placement: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub layout: PathBuf,
    pub design: PathBuf,
    pub config_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub config: Option<PlaceConfig>,
    /// Wall clock of the run in minutes, three decimals.
    pub t_mp: f64,
    pub outputs: Vec<PathBuf>,
    pub exit_code: i32,
    pub message: String,
    pub converged: Option<bool>,
    pub rolled_back: Option<bool>,
    pub gp_iterations: Option<usize>,
    pub hpwl: Option<f64>,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible(_) | Error::Unmatchable { .. } | Error::InfeasibleRegion { .. } => EXIT_INFEASIBLE,
        _ => EXIT_INPUT,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        e => e,
    })
}

/// Write through a temporary sibling and rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn load(layout: &Path, design: &Path) -> Result<(FpgaLayout, Design)> {
    let l = with_path(layout, parse_layout(&read(layout)?))?;
    let d = with_path(design, parse_design(&read(design)?, &l))?;
    Ok((l, d))
}

fn load_placed(input: &PlacedInput) -> Result<(FpgaLayout, Design, PlacementFile, Vec<Point>)> {
    let (l, d) = load(&input.layout, &input.design)?;
    let p = with_path(&input.placement, parse_placement(&read(&input.placement)?, Some(&d)))?;
    let pos = p.positions_for(&d)?;
    Ok((l, d, p, pos))
}

/// Parse `args` (program name first) and run. Output goes to the given
/// writers so the front end can be driven from tests.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match cli.command {
        Command::Place(args) => cmd_place(&args, out, err),
        other => match dispatch(other, out) {
            Ok(code) => code,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                exit_code(&e)
            }
        },
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Generate {
            seed,
            profile,
            layout,
            design,
        } => {
            let (l, d) = generate_benchmark(seed, profile)?;
            write_atomic(&layout, write_layout(&l).as_bytes())?;
            write_atomic(&design, write_design(&d).as_bytes())?;
            writeln!(
                out,
                "{profile} seed {seed}: {} instances, {} nets, {} shapes, {} regions",
                d.instances.len(),
                d.nets.len(),
                d.shapes.len(),
                d.regions.len()
            )?;
            Ok(EXIT_OK)
        }
        Command::Legalize {
            input,
            out: path,
            k_cand,
        } => {
            let (l, d, _, pos) = load_placed(&input)?;
            let merged = merge_cascades(&d)?;
            let lg = legalize(&l, &merged, &merged.map.collapse(&pos), k_cand.max(1))?;
            let file = PlacementFile::from_positions(&d, &lg.positions, |i| lg.legal[i] && d.instances[i].is_macro());
            write_atomic(&path, write_placement(&file).as_bytes())?;
            let [a, b, c] = lg.report.phase_counts();
            writeln!(out, "phase1={a} phase2={b} phase3={c} cost={}", lg.report.total_cost)?;
            let report = check_legality(&l, &d, &lg.positions);
            Ok(if report.is_legal() { EXIT_OK } else { EXIT_INFEASIBLE })
        }
        Command::Check { input } => {
            let (l, d, _, pos) = load_placed(&input)?;
            let report = check_legality(&l, &d, &pos);
            writeln!(out, "{report}")?;
            Ok(if report.is_legal() { EXIT_OK } else { EXIT_INPUT })
        }
        Command::Eval { input } => {
            let (_, d, _, pos) = load_placed(&input)?;
            let h = hpwl(&d, &pos)?;
            writeln!(out, "total {}", h.total)?;
            for (net, v) in d.nets.iter().zip(&h.per_net) {
                writeln!(out, "{} {v}", net.name)?;
            }
            Ok(EXIT_OK)
        }
        Command::Score {
            metrics,
            hidden_weight,
            out: path,
        } => {
            let mut records = Vec::new();
            for m in &metrics {
                records.extend(with_path(m, parse_metrics(&read(m)?))?);
            }
            let table = score_table(&records, hidden_weight)?;
            match path {
                Some(p) => write_atomic(&p, table.as_bytes())?,
                None => write!(out, "{table}")?,
            }
            Ok(EXIT_OK)
        }
        Command::Plot { input, out: path } => {
            let (l, d, _, pos) = load_placed(&input)?;
            write_atomic(&path, write_svg(&l, &d, &pos).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Place(_) => unreachable!("handled by cmd_place"),
    }
}

fn manifest_path(args: &PlaceArgs) -> PathBuf {
    args.manifest.clone().unwrap_or_else(|| {
        let mut p = args.out.as_os_str().to_owned();
        p.push(".manifest.json");
        PathBuf::from(p)
    })
}

/// `place`: always leaves a manifest behind, whatever the outcome.
pub fn cmd_place(args: &PlaceArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let start = Instant::now();
    let mut m = RunManifest {
        command: "place".into(),
        layout: args.layout.clone(),
        design: args.design.clone(),
        config_path: args.config.clone(),
        seed: args.seed,
        config: None,
        t_mp: 0.0,
        outputs: Vec::new(),
        exit_code: EXIT_OK,
        message: String::new(),
        converged: None,
        rolled_back: None,
        gp_iterations: None,
        hpwl: None,
    };
    let result = place_inner(args, &mut m, out);
    match result {
        Ok(code) => m.exit_code = code,
        Err(e) => {
            m.exit_code = exit_code(&e);
            m.message = e.to_string();
            let _ = writeln!(err, "error: {e}");
        }
    }
    m.t_mp = (start.elapsed().as_secs_f64() / 60.0 * 1000.0).round() / 1000.0;
    let path = manifest_path(args);
    let json = serde_json::to_string_pretty(&m).expect("manifest serializes");
    if let Err(e) = write_atomic(&path, json.as_bytes()) {
        let _ = writeln!(err, "error: manifest {}: {e}", path.display());
        if m.exit_code == EXIT_OK {
            return EXIT_INPUT;
        }
    }
    m.exit_code
}

fn place_inner(args: &PlaceArgs, m: &mut RunManifest, out: &mut dyn Write) -> Result<i32> {
    let mut config = match &args.config {
        Some(p) => PlaceConfig::from_toml(&read(p)?)?,
        None => PlaceConfig::default(),
    };
    if let Some(s) = args.seed {
        config.gp.seed = s;
    }
    m.seed = Some(config.gp.seed);
    m.config = Some(config.clone());
    let (l, d) = load(&args.layout, &args.design)?;
    let res = place(&l, &d, &config)?;

    let file = PlacementFile::from_positions(&d, &res.positions, |i| res.legal[i] && d.instances[i].is_macro());
    write_atomic(&args.out, write_placement(&file).as_bytes())?;
    m.outputs.push(args.out.clone());
    if let Some(t) = &args.trace {
        write_atomic(t, res.trace.to_csv().as_bytes())?;
        m.outputs.push(t.clone());
    }
    if let Some(p) = &args.plot {
        write_atomic(p, write_svg(&l, &d, &res.positions).as_bytes())?;
        m.outputs.push(p.clone());
    }
    m.converged = Some(res.trace.converged);
    m.rolled_back = Some(res.trace.rolled_back);
    m.gp_iterations = Some(res.trace.rows.len());
    m.hpwl = Some(res.hpwl);
    writeln!(
        out,
        "gp iterations {} converged {} rolled_back {} hpwl {:.3}",
        res.trace.rows.len(),
        res.trace.converged,
        res.trace.rolled_back,
        res.hpwl
    )?;
    if !res.report.is_legal() {
        m.message = res.report.to_string();
        writeln!(out, "{}", res.report)?;
        return Ok(EXIT_INFEASIBLE);
    }
    Ok(if res.trace.rolled_back { EXIT_ROLLBACK } else { EXIT_OK })
}
