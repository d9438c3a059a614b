//! The `gstamp` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
//! invalid input), 3 numerical failure (matching, fitting, integration).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::catalog::fetch::{fetch_snapshot, FetchOptions, HttpDownloader};
use crate::catalog::upstream::{convert_upstream, UpstreamColumns};
use crate::catalog::{parse_catalog, reference_snapshot, serialize_catalog, validate, Catalog, REFERENCE_EPOCH_JYEAR};
use crate::config::{Config, PropagationMode};
use crate::dynamics::{integrate_orbit, velocity_distribution, Scheme};
use crate::epoch::{recover_epoch, resolution_curves};
use crate::frames::to_galactocentric;
use crate::simulate::{parse_quantity, simulate, SimulateParams};
use crate::stamp::{
    build_location_map, decode_stamp, encode_stamp, locate_sender, match_anchors, select_anchors, LocationMap,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => m,
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

fn numerical<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numerical(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "gstamp", version, about = "Globular-cluster location and time stamps")]
struct Cli {
    /// TOML configuration file; absent keys take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Never touch the network.
    #[arg(long, global = true)]
    offline: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CatalogArg {
    /// Catalog CSV; defaults to the bundled reference snapshot.
    #[arg(long)]
    catalog: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fetch or convert a catalog, validate it and write canonical CSV.
    Ingest {
        /// Local file to read instead of downloading.
        #[arg(long, conflicts_with = "url")]
        input: Option<PathBuf>,
        /// Upstream table URL (cached).
        #[arg(long)]
        url: Option<String>,
        /// Treat the input as a whitespace-delimited upstream table.
        #[arg(long)]
        upstream: bool,
        #[arg(long, default_value_t = REFERENCE_EPOCH_JYEAR)]
        epoch: f64,
        #[arg(long, default_value = ".gstamp-cache")]
        cache_dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Histogram of cluster speeds.
    Velocities {
        #[command(flatten)]
        cat: CatalogArg,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long, default_value_t = 1000.0)]
        v_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time resolution over distance-error cases and speeds.
    Resolution {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trajectory of one cluster in the Galactic potential.
    Orbit {
        #[command(flatten)]
        cat: CatalogArg,
        #[arg(long)]
        cluster: String,
        /// Overrides integrator.t_end_myr.
        #[arg(long)]
        t_end: Option<f64>,
        /// Overrides integrator.scheme.
        #[arg(long)]
        scheme: Option<Scheme>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stamp encoding and decoding.
    #[command(subcommand)]
    Stamp(StampCommand),
    /// Match a stamp against a catalog and fit the sender position.
    Locate {
        #[arg(long)]
        stamp: PathBuf,
        #[command(flatten)]
        cat: CatalogArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Elapsed-time recovery.
    #[command(subcommand)]
    Epoch(EpochCommand),
    /// Stamp, drift, degrade and recover in one run.
    Simulate {
        #[command(flatten)]
        cat: CatalogArg,
        /// Elapsed time, e.g. 0.5Myr or 500kyr.
        #[arg(long, default_value = "0")]
        dt: String,
        /// Distance noise, e.g. 0.1kpc or 100pc.
        #[arg(long, default_value = "0")]
        noise: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum StampCommand {
    /// Select anchors from a catalog and write the binary stamp.
    Encode {
        #[command(flatten)]
        cat: CatalogArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a stamp file as text.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum EpochCommand {
    Recover {
        #[arg(long)]
        stamp: PathBuf,
        #[command(flatten)]
        cat: CatalogArg,
        #[arg(long)]
        window_lo: Option<f64>,
        #[arg(long)]
        window_hi: Option<f64>,
        /// Rewind clusters along orbits instead of straight lines.
        #[arg(long)]
        orbit: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs the tool and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("gstamp: {}", e.message());
            e.code()
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Data(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Data(format!("cannot write to stdout: {e}"))),
    }
}

fn read_text(p: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(p).map_err(|e| CliError::Data(format!("cannot read {}: {e}", p.display())))
}

/// Reads a canonical catalog CSV, taking the epoch from its
/// `# epoch_jyear:` comment when present.
fn load_catalog(arg: &CatalogArg) -> Result<Catalog, CliError> {
    let Some(path) = &arg.catalog else {
        return Ok(reference_snapshot());
    };
    let text = read_text(path)?;
    let epoch = text
        .lines()
        .find_map(|l| l.strip_prefix("# epoch_jyear:"))
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Data(format!("bad epoch comment in {}", path.display())))
        })
        .transpose()?
        .unwrap_or(REFERENCE_EPOCH_JYEAR);
    parse_catalog(&text, epoch).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_stamp(path: &Path) -> Result<LocationMap, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    decode_stamp(&bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn comments(lines: &[String]) -> String {
    lines.iter().map(|l| format!("# {l}\n")).collect()
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let cfg = Config::load(cli.config.as_deref()).map_err(data)?;
    let header = cfg.header_lines(cli.seed);
    let fp = &cfg.frame;
    match cli.command {
        Command::Ingest { input, url, upstream, epoch, cache_dir, out } => {
            let (text, source) = match (&input, &url) {
                (Some(p), _) => (Some(read_text(p)?), p.display().to_string()),
                (None, Some(u)) => {
                    let opts = FetchOptions::from_env(cache_dir, cli.offline);
                    (Some(fetch_snapshot(u, &opts, &HttpDownloader).map_err(data)?), u.clone())
                }
                (None, None) => (None, "bundled reference snapshot".to_string()),
            };
            let cat = match text {
                None => reference_snapshot(),
                Some(t) if upstream || url.is_some() => {
                    let conv = convert_upstream(&t, &UpstreamColumns::default(), epoch, &source).map_err(data)?;
                    for name in &conv.excluded {
                        eprintln!("excluded (missing kinematics): {name}");
                    }
                    conv.catalog
                }
                Some(t) => parse_catalog(&t, epoch).map_err(data)?,
            };
            let report = validate(&cat);
            eprint!("{} records; {report}", cat.len());
            emit(out.as_deref(), serialize_catalog(&cat, &header).as_bytes())
        }
        Command::Velocities { cat, bins, v_max, out } => {
            let cat = load_catalog(&cat)?;
            let h = velocity_distribution(&cat, fp, bins, v_max).map_err(|e| CliError::Usage(e.to_string()))?;
            let mut text = comments(&header);
            text.push_str(&format!("# records: {}\n", cat.len()));
            text.push_str(&h.to_csv());
            emit(out.as_deref(), text.as_bytes())
        }
        Command::Resolution { out } => {
            let ec = &cfg.epoch;
            let curve = resolution_curves(&ec.dd_cases_kpc, ec.v_min_kms, ec.v_max_kms, ec.n_points).map_err(data)?;
            emit(out.as_deref(), curve.to_csv(&header).as_bytes())
        }
        Command::Orbit { cat, cluster, t_end, scheme, out } => {
            let cat = load_catalog(&cat)?;
            let i = cat
                .index_of(&cluster)
                .ok_or_else(|| CliError::Data(format!("no cluster named `{cluster}`")))?;
            let st = to_galactocentric(&cat.records()[i], fp);
            let t_end = t_end.unwrap_or(cfg.integrator.t_end_myr);
            let scheme = scheme.unwrap_or(cfg.integrator.scheme);
            let traj = integrate_orbit(&st, &cfg.potential, cfg.integrator.dt_myr, t_end, scheme).map_err(numerical)?;
            let mut text = comments(&header);
            text.push_str(&format!("# cluster: {cluster}\n# scheme: {scheme}\n"));
            text.push_str(&format!("# max_relative_energy_drift: {:e}\n", traj.max_relative_energy_drift()));
            text.push_str("t_myr,x_kpc,y_kpc,z_kpc,vx_kms,vy_kms,vz_kms,energy_kms2\n");
            for ((t, s), e) in traj.times_myr.iter().zip(&traj.states).zip(&traj.energy_kms2) {
                text.push_str(&format!(
                    "{t},{},{},{},{},{},{},{e}\n",
                    s.pos.x, s.pos.y, s.pos.z, s.vel.x, s.vel.y, s.vel.z
                ));
            }
            emit(out.as_deref(), text.as_bytes())
        }
        Command::Stamp(StampCommand::Encode { cat, out }) => {
            let cat = load_catalog(&cat)?;
            let idx = select_anchors(&cat, fp, cfg.stamp.k, cfg.stamp.min_sep_kpc).map_err(data)?;
            let map = build_location_map(&cat, fp, &idx).map_err(data)?;
            let bytes = encode_stamp(&map).map_err(data)?;
            for (a, &i) in idx.iter().enumerate() {
                eprintln!("anchor {a}: {}", cat.records()[i].name);
            }
            emit(Some(&out), bytes.as_bytes())
        }
        Command::Stamp(StampCommand::Decode { input, out }) => {
            let map = load_stamp(&input)?;
            let mut text = comments(&header);
            text.push_str(&format!("# k: {}\n# epoch_jyear: {}\n", map.k(), map.epoch_jyear));
            text.push_str("anchor,mv_q,feh_q,mv_abs,feh_dex,x_kpc,y_kpc,z_kpc\n");
            for (i, a) in map.anchors.iter().enumerate() {
                let s = &a.signature;
                text.push_str(&format!(
                    "{i},{},{},{},{},{},{},{}\n",
                    s.mv_q,
                    s.feh_q,
                    s.mv_abs(),
                    s.feh_dex(),
                    a.pos_rel.x,
                    a.pos_rel.y,
                    a.pos_rel.z
                ));
            }
            emit(out.as_deref(), text.as_bytes())
        }
        Command::Locate { stamp, cat, out } => {
            let map = load_stamp(&stamp)?;
            let cat = load_catalog(&cat)?;
            let corr = match_anchors(&map, &cat, fp, cfg.stamp.match_tol_kpc).map_err(numerical)?;
            let fix = locate_sender(&corr, &map, &cat, fp).map_err(numerical)?;
            let mut text = comments(&header);
            text.push_str(&format!("match_rms_kpc: {}\n", corr.rms_residual_kpc));
            for &(a, r) in &corr.pairs {
                text.push_str(&format!("anchor {a}: {}\n", cat.records()[r].name));
            }
            let p = fix.position;
            text.push_str(&format!("sender_kpc: {} {} {}\n", p.x, p.y, p.z));
            text.push_str(&format!("distance_from_sun_kpc: {}\n", p.distance(fp.sun_position())));
            text.push_str(&format!("rms_residual_kpc: {}\n", fix.rms_residual_kpc));
            text.push_str(&format!("iterations: {}\n", fix.iterations));
            emit(out.as_deref(), text.as_bytes())
        }
        Command::Epoch(EpochCommand::Recover { stamp, cat, window_lo, window_hi, orbit, out }) => {
            let map = load_stamp(&stamp)?;
            let cat = load_catalog(&cat)?;
            let mut opts = cfg.recover_options();
            opts.window_lo_myr = window_lo.unwrap_or(opts.window_lo_myr);
            opts.window_hi_myr = window_hi.unwrap_or(opts.window_hi_myr);
            if orbit {
                opts.propagation = cfg.propagation(PropagationMode::Orbit);
            }
            let est = recover_epoch(&map, &cat, fp, &opts).map_err(numerical)?;
            let mut text = comments(&header);
            text.push_str(&format!("dt_myr: {}\n", est.dt_myr));
            text.push_str(&format!("stamp_epoch_jyear: {}\n", cat.epoch_jyear() - est.dt_myr * 1e6));
            text.push_str(&format!("residual_kpc: {}\n", est.residual_kpc));
            text.push_str(&format!("bound_myr: {}\n", est.bound_myr));
            let p = est.sender_position;
            text.push_str(&format!("sender_kpc: {} {} {}\n", p.x, p.y, p.z));
            text.push_str(&format!("evaluations: {}\n", est.evaluations));
            for &(a, r) in &est.correspondence.pairs {
                text.push_str(&format!("anchor {a}: {}\n", cat.records()[r].name));
            }
            emit(out.as_deref(), text.as_bytes())
        }
        Command::Simulate { cat, dt, noise, out } => {
            let cat = load_catalog(&cat)?;
            let p = SimulateParams {
                dt_myr: parse_quantity(&dt, "Myr").map_err(CliError::Usage)?,
                noise_kpc: parse_quantity(&noise, "kpc").map_err(CliError::Usage)?,
                seed: cli.seed,
            };
            if p.noise_kpc < 0.0 {
                return Err(CliError::Usage(format!("noise must be non-negative, got {noise}")));
            }
            let report = simulate(&cat, &cfg, &p).map_err(data)?;
            emit(out.as_deref(), report.to_text(&header).as_bytes())?;
            match &report.failure {
                None => Ok(()),
                Some(f) => Err(CliError::Numerical(f.clone())),
            }
        }
    }
}
