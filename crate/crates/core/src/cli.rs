//! The `danzer` command line.
//!
//! Every subcommand writes one CSV or JSON document (to `--out` or stdout)
//! and a metadata sidecar `<out>.meta.json` (stderr without `--out`) holding
//! the tool version, the arguments and the full parsed configuration with
//! every default filled in, seed included.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    check_visibility, discrepancy, dispersion, dispersion_on_grid, estimate_visibility, find_empty_tube,
    fractional_parts, heavy_box, min_gap, sud_estimate, udt_check, vacant_strip, density_profile,
};
use crate::calibrate::{calibrate_hw, calibrate_visibility, Calibration, DEFAULT_HW_C};
use crate::epsnet::{d2_aligned_net, hw_net, verify_net, BoxSampler, Net};
use crate::error::{Error, Result};
use crate::generators::{PointSetSpec, SequenceSpec, PHI};
use crate::geometry::{stratified_directions, Window};
use crate::io::{format_real, point_header, read_points_csv, write_json, write_points_csv, write_table_csv};

#[derive(Debug, Parser, Serialize)]
#[command(name = "danzer", version, about = "Dense forests, Danzer-type sets and their diagnostics")]
pub struct Cli {
    /// Worker threads (0 = all cores); results do not depend on it
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", content = "args", rename_all = "kebab-case")]
pub enum Command {
    /// Enumerate a point set in [-R, R)^n
    Generate(GenerateArgs),
    /// Dispersion of a sequence's fractional parts or of a point file
    Dispersion(SampleArgs),
    /// Exact discrepancy (d <= 2) of a sequence's fractional parts or of a point file
    Discrepancy(SampleArgs),
    /// Super-uniform dispersion estimate over shifts and twists
    Sud(SudArgs),
    /// Empirical visibility V(eps), or hit fractions at a fixed length
    Visibility(VisibilityArgs),
    /// Longest segment avoiding the eps-neighbourhood of the set
    Tube(TubeArgs),
    /// Widest point-free strip among lattice-normal directions
    Strip(StripArgs),
    /// Point counts in Euclidean balls divided by T^n
    Density(DensityArgs),
    /// Minimum pairwise distance in windows of growing radius
    Mingap(MingapArgs),
    /// Build an eps-net of the unit square or cube
    Net(NetArgs),
    /// Monte Carlo check of an eps-net against random boxes
    VerifyNet(VerifyNetArgs),
    /// Uniformly Diophantine margin of a family of vectors
    Udt(UdtArgs),
    /// Search for a box of volume eps holding many points
    HeavyBox(HeavyBoxArgs),
    /// Calibrate the visibility scale and the random-net constant
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetName {
    Peres,
    GeneralizedPeres,
    ThreeGrid,
    D2,
    Candp,
    Z2,
    TwoGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeqName {
    Golden,
    Tsokanos,
    Quadratic,
    Concat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NetKind {
    Hw,
    D2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerName {
    Aligned,
    Rotated,
}

#[derive(Debug, Args, Serialize)]
pub struct SeqArgs {
    /// Driving sequence
    #[arg(long, value_enum, default_value = "golden")]
    pub seq: SeqName,
    /// Coefficient of the quadratic sequence (default: golden ratio)
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Vectors of the concatenated linear sequence, e.g. "0.5,0.1;0.7,0.3"
    #[arg(long)]
    pub thetas: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct SetArgs {
    /// Named point set
    #[arg(long, value_enum, default_value = "peres")]
    pub spec: SetName,
    /// JSON point-set document; overrides --spec
    #[arg(long)]
    pub spec_file: Option<PathBuf>,
    /// Dimension of generalized-peres and z2
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[command(flatten)]
    pub seq: SeqArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct OutArgs {
    /// Output file (stdout if absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub set: SetArgs,
    /// Half-width of the window [-R, R)^n
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    /// Point file (header x1,...,xn) instead of a sequence
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub seq: SeqArgs,
    /// Number of sequence terms
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    /// Grid resolution for dispersion in dimension >= 2
    #[arg(long)]
    pub resolution: Option<f64>,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SudArgs {
    #[command(flatten)]
    pub seq: SeqArgs,
    /// Numbers of terms, comma separated
    #[arg(long, value_delimiter = ',', default_value = "1024")]
    pub n: Vec<usize>,
    /// Largest index shift m
    #[arg(long, default_value_t = 64)]
    pub m_max: u64,
    /// Number of twist vectors xi
    #[arg(long, default_value_t = 256)]
    pub xi: usize,
    /// Random seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct VisibilityArgs {
    #[command(flatten)]
    pub set: SetArgs,
    /// Values of eps, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    /// Longest probe length
    #[arg(long, default_value_t = 8192.0)]
    pub l_max: f64,
    /// Fixed probe length; reports hit fractions instead of V(eps)
    #[arg(long)]
    pub length: Option<f64>,
    /// Number of probe segments
    #[arg(long, default_value_t = 1000)]
    pub probes: usize,
    /// Probe bases lie in [-R, R)^n
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
    /// Random seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct TubeArgs {
    #[command(flatten)]
    pub set: SetArgs,
    /// Neighbourhood radius eps (sup norm)
    #[arg(long)]
    pub eps: f64,
    /// Half-width of the search window
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
    /// Direction to try, e.g. "1,0" (repeatable; default: stratified directions)
    #[arg(long = "direction")]
    pub directions: Vec<String>,
    /// Parallel lines per direction
    #[arg(long, default_value_t = 64)]
    pub offsets: usize,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct StripArgs {
    #[command(flatten)]
    pub set: SetArgs,
    /// Window half-widths, comma separated
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub radius: Vec<f64>,
    /// Extra candidate direction, e.g. "1,2" (repeatable)
    #[arg(long = "direction")]
    pub directions: Vec<String>,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    #[command(flatten)]
    pub set: SetArgs,
    /// Ball radii T, comma separated and increasing
    #[arg(long, value_delimiter = ',', default_value = "10,100")]
    pub radii: Vec<f64>,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct MingapArgs {
    #[command(flatten)]
    pub set: SetArgs,
    /// Window half-widths, comma separated
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub radius: Vec<f64>,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct NetSource {
    /// Construction
    #[arg(long, value_enum, default_value = "hw")]
    pub method: NetKind,
    /// Target eps of the net
    #[arg(long, default_value_t = 0.01)]
    pub net_eps: f64,
    /// Dimension of a random net
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Size factor of a random net
    #[arg(long, default_value_t = DEFAULT_HW_C)]
    pub c: f64,
    /// Seed of a random net
    #[arg(long, default_value_t = 1)]
    pub net_seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct NetArgs {
    #[command(flatten)]
    pub source: NetSource,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyNetArgs {
    /// Net file (header x1,...,xn) instead of building one
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub source: NetSource,
    /// Box family
    #[arg(long, value_enum, default_value = "aligned")]
    pub sampler: SamplerName,
    /// Box volume (default: the net's eps)
    #[arg(long)]
    pub volume: Option<f64>,
    /// Number of sampled boxes
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Seed of the box sampler
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct UdtArgs {
    /// Vectors theta_i, e.g. "0;1.618" (default: 0 and the golden ratio)
    #[arg(long)]
    pub thetas: Option<String>,
    /// Twist xi, e.g. "0.3"; random samples if absent
    #[arg(long)]
    pub xi: Option<String>,
    /// Number of random xi in [0,1)^d
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Values of T, comma separated
    #[arg(long, value_delimiter = ',', default_value = "16")]
    pub t: Vec<u64>,
    /// Random seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct HeavyBoxArgs {
    /// Point file in the unit cube instead of building a net
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub source: NetSource,
    /// Box volume
    #[arg(long)]
    pub eps: f64,
    /// Skip rotated boxes
    #[arg(long)]
    pub aligned_only: bool,
    /// Number of rotated frames
    #[arg(long, default_value_t = 16)]
    pub rotations: usize,
    /// Random seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CalibrateArgs {
    /// Values of eps for the Peres visibility scale
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
    pub eps: Vec<f64>,
    /// Longest probe length
    #[arg(long, default_value_t = 8192.0)]
    pub l_max: f64,
    /// Number of probe segments
    #[arg(long, default_value_t = 10_000)]
    pub probes: usize,
    /// Probe bases lie in [-R, R)^2
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
    /// Box trials for the random-net constant
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Hit fraction the random-net constant must reach
    #[arg(long, default_value_t = 0.999)]
    pub target: f64,
    /// Random seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutArgs,
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match pool.install(|| execute(&cli, &args)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Argument(_) => 2,
                Error::Resource(_) => 3,
                _ => 1,
            }
        }
    }
}

/// One rendered output document.
enum Doc {
    Csv(Vec<u8>),
    Json(serde_json::Value),
}

fn execute(cli: &Cli, args: &[String]) -> Result<()> {
    let (doc, output) = match &cli.command {
        Command::Generate(a) => (generate(a)?, &a.output),
        Command::Dispersion(a) => (run_dispersion(a)?, &a.output),
        Command::Discrepancy(a) => (run_discrepancy(a)?, &a.output),
        Command::Sud(a) => (sud(a)?, &a.output),
        Command::Visibility(a) => (visibility(a)?, &a.output),
        Command::Tube(a) => (tube(a)?, &a.output),
        Command::Strip(a) => (strip(a)?, &a.output),
        Command::Density(a) => (density(a)?, &a.output),
        Command::Mingap(a) => (mingap(a)?, &a.output),
        Command::Net(a) => (net(a)?, &a.output),
        Command::VerifyNet(a) => (run_verify_net(a)?, &a.output),
        Command::Udt(a) => (udt(a)?, &a.output),
        Command::HeavyBox(a) => (run_heavy_box(a)?, &a.output),
        Command::Calibrate(a) => (calibrate(a)?, &a.output),
    };
    let meta = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "argv": args,
        "config": cli,
    });
    match &output.out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            write_doc(&mut f, &doc)?;
            f.flush()?;
            let mut f = BufWriter::new(File::create(sidecar(path))?);
            write_json(&mut f, &meta)?;
            f.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_doc(&mut lock, &doc)?;
            lock.flush()?;
            write_json(std::io::stderr().lock(), &meta)?;
        }
    }
    Ok(())
}

fn write_doc<W: Write>(mut w: W, doc: &Doc) -> Result<()> {
    match doc {
        Doc::Csv(bytes) => w.write_all(bytes)?,
        Doc::Json(v) => write_json(w, v)?,
    }
    Ok(())
}

/// `<out>.meta.json`.
pub fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn format_or(o: &OutArgs, default: Format) -> Format {
    o.format.unwrap_or(default)
}

fn table(header: &[&str], rows: &[Vec<String>]) -> Result<Doc> {
    let mut buf = Vec::new();
    write_table_csv(&mut buf, header, rows)?;
    Ok(Doc::Csv(buf))
}

fn to_json<T: Serialize>(v: &T) -> Result<Doc> {
    Ok(Doc::Json(serde_json::to_value(v)?))
}

fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| Error::arg(format!("bad number {x:?}: {e}"))))
        .collect()
}

fn parse_vectors(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';').map(parse_vector).collect()
}

pub fn sequence_spec(a: &SeqArgs) -> Result<SequenceSpec> {
    let spec = match a.seq {
        SeqName::Golden => SequenceSpec::Golden,
        SeqName::Tsokanos => SequenceSpec::Tsokanos,
        SeqName::Quadratic => SequenceSpec::Quadratic {
            alpha: a.alpha.unwrap_or(PHI),
        },
        SeqName::Concat => SequenceSpec::ConcatLinear {
            thetas: parse_vectors(
                a.thetas
                    .as_deref()
                    .ok_or_else(|| Error::arg("--seq concat needs --thetas"))?,
            )?,
        },
    };
    spec.validate()?;
    Ok(spec)
}

pub fn point_set_spec(a: &SetArgs) -> Result<PointSetSpec> {
    if let Some(path) = &a.spec_file {
        let spec: PointSetSpec = serde_json::from_reader(File::open(path)?)?;
        spec.compile()?;
        return Ok(spec);
    }
    let spec = match a.spec {
        SetName::Peres => PointSetSpec::PeresForest,
        SetName::GeneralizedPeres => PointSetSpec::GeneralizedPeres {
            seq: sequence_spec(&a.seq)?,
            n: a.dim,
        },
        SetName::ThreeGrid => PointSetSpec::three_grid_default(),
        SetName::D2 => PointSetSpec::D2,
        SetName::Candp => PointSetSpec::cut_and_project_default(),
        SetName::Z2 => PointSetSpec::integer_lattice(a.dim),
        SetName::TwoGrid => PointSetSpec::two_grid_default(),
    };
    spec.compile()?;
    Ok(spec)
}

fn centered(dim: usize, radius: f64) -> Result<Window> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::arg("radius must be a positive finite number"));
    }
    Window::centered(dim, radius)
}

fn generate(a: &GenerateArgs) -> Result<Doc> {
    let spec = point_set_spec(&a.set)?;
    let points: Vec<Vec<f64>> = spec
        .compile()?
        .enumerate(&centered(spec.dim(), a.radius)?)?
        .into_iter()
        .map(|p| p.coords)
        .collect();
    match format_or(&a.output, Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            write_points_csv(&mut buf, spec.dim(), &points)?;
            Ok(Doc::Csv(buf))
        }
        Format::Json => to_json(&json!({ "spec": spec, "dim": spec.dim(), "points": points })),
    }
}

fn load_points(path: &Path) -> Result<(usize, Vec<Vec<f64>>)> {
    read_points_csv(File::open(path)?)
}

fn sample(a: &SampleArgs) -> Result<Vec<Vec<f64>>> {
    match &a.input {
        Some(path) => Ok(load_points(path)?.1),
        None => fractional_parts(&sequence_spec(&a.seq)?, a.n),
    }
}

fn run_dispersion(a: &SampleArgs) -> Result<Doc> {
    let pts = sample(a)?;
    let report = match a.resolution {
        Some(h) => dispersion_on_grid(&pts, h)?,
        None => dispersion(&pts)?,
    };
    match format_or(&a.output, Format::Json) {
        Format::Json => to_json(&report),
        Format::Csv => table(
            &["N", "value", "exact", "grid_resolution"],
            &[vec![
                report.n.to_string(),
                format_real(report.value),
                report.exact.to_string(),
                report.grid_resolution.map(format_real).unwrap_or_default(),
            ]],
        ),
    }
}

fn run_discrepancy(a: &SampleArgs) -> Result<Doc> {
    let pts = sample(a)?;
    let value = discrepancy(&pts)?;
    match format_or(&a.output, Format::Json) {
        Format::Json => to_json(&json!({ "N": pts.len(), "value": value })),
        Format::Csv => table(&["N", "value"], &[vec![pts.len().to_string(), format_real(value)]]),
    }
}

fn sud(a: &SudArgs) -> Result<Doc> {
    let seq = sequence_spec(&a.seq)?;
    let est = a
        .n
        .iter()
        .map(|n| sud_estimate(&seq, *n, a.m_max, a.xi, a.seed))
        .collect::<Result<Vec<_>>>()?;
    match format_or(&a.output, Format::Csv) {
        Format::Json => to_json(&est),
        Format::Csv => table(
            &["N", "delta_hat"],
            &est.iter().map(|e| vec![e.n.to_string(), format_real(e.value)]).collect::<Vec<_>>(),
        ),
    }
}

fn visibility(a: &VisibilityArgs) -> Result<Doc> {
    let spec = point_set_spec(&a.set)?;
    let window = centered(spec.dim(), a.radius)?;
    if let Some(length) = a.length {
        let reports = a
            .eps
            .iter()
            .map(|e| check_visibility(&spec, *e, length, a.probes, &window, a.seed))
            .collect::<Result<Vec<_>>>()?;
        return match format_or(&a.output, Format::Csv) {
            Format::Json => to_json(&reports),
            Format::Csv => table(
                &["epsilon", "L", "hit_fraction"],
                &reports
                    .iter()
                    .map(|r| vec![format_real(r.eps), format_real(r.length), format_real(r.hit_fraction)])
                    .collect::<Vec<_>>(),
            ),
        };
    }
    let rows = a
        .eps
        .iter()
        .map(|e| Ok((*e, estimate_visibility(&spec, *e, a.l_max, a.probes, &window, a.seed)?)))
        .collect::<Result<Vec<_>>>()?;
    match format_or(&a.output, Format::Csv) {
        Format::Json => to_json(
            &rows
                .iter()
                .map(|(e, v)| json!({ "epsilon": e, "V_hat": v }))
                .collect::<Vec<_>>(),
        ),
        Format::Csv => table(
            &["epsilon", "V_hat"],
            &rows.iter().map(|(e, v)| vec![format_real(*e), format_real(*v)]).collect::<Vec<_>>(),
        ),
    }
}

fn tube(a: &TubeArgs) -> Result<Doc> {
    let spec = point_set_spec(&a.set)?;
    let window = centered(spec.dim(), a.radius)?;
    let dirs = if a.directions.is_empty() {
        stratified_directions(spec.dim())
    } else {
        a.directions.iter().map(|d| parse_vector(d)).collect::<Result<_>>()?
    };
    let (segment, length) = find_empty_tube(&spec, a.eps, &window, &dirs, a.offsets)?;
    match format_or(&a.output, Format::Json) {
        Format::Json => to_json(&json!({ "segment": segment, "length": length })),
        Format::Csv => {
            let mut header: Vec<String> = point_header(spec.dim()).iter().map(|h| format!("base_{h}")).collect();
            header.extend(point_header(spec.dim()).iter().map(|h| format!("dir_{h}")));
            header.push("length".into());
            let mut row: Vec<String> = segment.base.iter().chain(&segment.direction).map(|x| format_real(*x)).collect();
            row.push(format_real(length));
            table(&header.iter().map(String::as_str).collect::<Vec<_>>(), &[row])
        }
    }
}

fn strip(a: &StripArgs) -> Result<Doc> {
    let spec = point_set_spec(&a.set)?;
    let extra: Vec<Vec<f64>> = a.directions.iter().map(|d| parse_vector(d)).collect::<Result<_>>()?;
    let reports = a
        .radius
        .iter()
        .map(|r| vacant_strip(&spec, &centered(spec.dim(), *r)?, &extra))
        .collect::<Result<Vec<_>>>()?;
    match format_or(&a.output, Format::Json) {
        Format::Json => to_json(&reports),
        Format::Csv => {
            let mut header = vec!["radius".to_string(), "width".to_string()];
            header.extend(point_header(spec.dim()).iter().map(|h| format!("u_{h}")));
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    let mut row = vec![format_real(r.window_radius), format_real(r.width)];
                    row.extend(r.direction.iter().map(|x| format_real(*x)));
                    row
                })
                .collect();
            table(&header.iter().map(String::as_str).collect::<Vec<_>>(), &rows)
        }
    }
}

fn density(a: &DensityArgs) -> Result<Doc> {
    let spec = point_set_spec(&a.set)?;
    let rows = density_profile(&spec, &a.radii)?;
    match format_or(&a.output, Format::Csv) {
        Format::Json => to_json(&rows.iter().map(|(t, d)| json!({ "T": t, "density": d })).collect::<Vec<_>>()),
        Format::Csv => table(
            &["T", "density"],
            &rows.iter().map(|(t, d)| vec![format_real(*t), format_real(*d)]).collect::<Vec<_>>(),
        ),
    }
}

fn mingap(a: &MingapArgs) -> Result<Doc> {
    let spec = point_set_spec(&a.set)?;
    let rows = a
        .radius
        .iter()
        .map(|r| Ok((*r, min_gap(&spec, &centered(spec.dim(), *r)?)?)))
        .collect::<Result<Vec<_>>>()?;
    match format_or(&a.output, Format::Csv) {
        Format::Json => to_json(&rows.iter().map(|(r, g)| json!({ "radius": r, "min_gap": g })).collect::<Vec<_>>()),
        Format::Csv => table(
            &["radius", "min_gap"],
            &rows.iter().map(|(r, g)| vec![format_real(*r), format_real(*g)]).collect::<Vec<_>>(),
        ),
    }
}

fn build_net(s: &NetSource) -> Result<Net> {
    match s.method {
        NetKind::Hw => hw_net(s.net_eps, s.dim, s.c, s.net_seed),
        NetKind::D2 => d2_aligned_net(s.net_eps),
    }
}

fn net(a: &NetArgs) -> Result<Doc> {
    let net = build_net(&a.source)?;
    match format_or(&a.output, Format::Csv) {
        Format::Json => to_json(&net),
        Format::Csv => {
            let mut buf = Vec::new();
            write_points_csv(&mut buf, net.dim, &net.points)?;
            Ok(Doc::Csv(buf))
        }
    }
}

fn net_or_file(input: &Option<PathBuf>, source: &NetSource) -> Result<Net> {
    match input {
        Some(path) => {
            let (dim, points) = load_points(path)?;
            Ok(Net {
                dim,
                points,
                epsilon: source.net_eps,
                method: match source.method {
                    NetKind::Hw => crate::epsnet::NetMethod::HausslerWelzl,
                    NetKind::D2 => crate::epsnet::NetMethod::D2Aligned,
                },
            })
        }
        None => build_net(source),
    }
}

fn run_verify_net(a: &VerifyNetArgs) -> Result<Doc> {
    let net = net_or_file(&a.input, &a.source)?;
    let sampler = match a.sampler {
        SamplerName::Aligned => BoxSampler::Aligned,
        SamplerName::Rotated => BoxSampler::Rotated,
    };
    let report = verify_net(&net, sampler, a.volume.unwrap_or(net.epsilon), a.trials, a.seed)?;
    to_json(&report)
}

fn udt(a: &UdtArgs) -> Result<Doc> {
    let thetas = match &a.thetas {
        Some(s) => parse_vectors(s)?,
        None => vec![vec![0.0], vec![PHI]],
    };
    let d = thetas.first().map_or(0, Vec::len);
    let xis = match &a.xi {
        Some(s) => parse_vectors(s)?,
        None => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed);
            (0..a.samples).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect()
        }
    };
    let mut rows = Vec::new();
    for xi in &xis {
        for t in &a.t {
            let m = udt_check(&thetas, xi, *t)?;
            rows.push((xi.clone(), *t, m));
        }
    }
    match format_or(&a.output, Format::Csv) {
        Format::Json => to_json(
            &rows
                .iter()
                .map(|(xi, t, m)| json!({ "xi": xi, "T": t, "best_index": m.best_index, "margin": m.margin }))
                .collect::<Vec<_>>(),
        ),
        Format::Csv => {
            let mut header: Vec<String> = (1..=d).map(|i| format!("xi{i}")).collect();
            header.extend(["T", "best_index", "margin"].map(String::from));
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|(xi, t, m)| {
                    let mut row: Vec<String> = xi.iter().map(|x| format_real(*x)).collect();
                    row.extend([t.to_string(), m.best_index.to_string(), format_real(m.margin)]);
                    row
                })
                .collect();
            table(&header.iter().map(String::as_str).collect::<Vec<_>>(), &body)
        }
    }
}

fn run_heavy_box(a: &HeavyBoxArgs) -> Result<Doc> {
    let net = net_or_file(&a.input, &a.source)?;
    let hb = heavy_box(&net.points, a.eps, a.aligned_only, a.rotations, a.seed)?;
    to_json(&hb)
}

fn calibrate(a: &CalibrateArgs) -> Result<Doc> {
    let cal = Calibration {
        visibility: calibrate_visibility(&a.eps, a.l_max, a.probes, a.radius, a.seed)?,
        hw: calibrate_hw(0.01, a.trials, a.seed, a.target)?,
    };
    to_json(&cal)
}
