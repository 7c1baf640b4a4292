use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nocollide::embedding::EmbeddingMethod;
use nocollide::experiments::{Family, Method};

#[derive(Debug, Parser)]
#[command(name = "nocollide", version, about = "No-collision transport distances for image manifolds")]
pub struct Cli {
    /// Seed for randomized steps such as SMACOF restarts [default: 0, or
    /// the spec's own seed for `experiment`].
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for distance computations.
    #[arg(long, global = true, env = "NOCOLLIDE_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    /// Directory that receives the outputs; created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    /// Format of matrix, embedding and timing outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rasterize a family of transformed shapes into density files.
    Gen(GenArgs),
    /// Compute a pairwise distance matrix over a directory of densities.
    Distmat(DistmatArgs),
    /// Embed a distance matrix, or a feature matrix for `svd`.
    Embed(EmbedArgs),
    /// Run a full experiment described by a JSON spec file.
    Experiment(ExperimentArgs),
    /// Time distance-matrix computation over increasing sample counts.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Translation,
    Dilation,
    Rotation,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Translation => Family::Translation,
            FamilyArg::Dilation => Family::Dilation,
            FamilyArg::Rotation => Family::Rotation,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    PixelEuclidean,
    W2Exact,
    W2Analytic,
    Lot,
    NcMass,
    NcGeom,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::PixelEuclidean => Method::PixelEuclidean,
            MethodArg::W2Exact => Method::W2Exact,
            MethodArg::W2Analytic => Method::W2Analytic,
            MethodArg::Lot => Method::Lot,
            MethodArg::NcMass => Method::NcMass,
            MethodArg::NcGeom => Method::NcGeom,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmbedArg {
    Smacof,
    Classical,
    Svd,
    Isomap,
}

impl From<EmbedArg> for EmbeddingMethod {
    fn from(e: EmbedArg) -> EmbeddingMethod {
        match e {
            EmbedArg::Smacof => EmbeddingMethod::Smacof,
            EmbedArg::Classical => EmbeddingMethod::Classical,
            EmbedArg::Svd => EmbeddingMethod::Svd,
            EmbedArg::Isomap => EmbeddingMethod::Isomap,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    Mass,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Vertical,
    Horizontal,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Transformation family applied to the base shape.
    #[arg(long, value_enum)]
    pub family: FamilyArg,

    /// Parameter grid counts along each axis, e.g. `4x4`.
    #[arg(long, value_parser = parse_counts)]
    pub grid: Option<[usize; 2]>,

    /// Parameter range: `lo,hi` for a square or `x0,x1,y0,y1`.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub range: Option<[f64; 4]>,

    /// Number of equispaced rotation angles.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub angles: Option<u32>,

    /// Pixels per side of the square grid.
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u32).range(16..))]
    pub n: u32,

    /// First semi-axis of the base ellipse.
    #[arg(long, value_parser = positive, allow_hyphen_values = true)]
    pub a: Option<f64>,

    /// Second semi-axis of the base ellipse.
    #[arg(long, value_parser = positive, allow_hyphen_values = true)]
    pub b: Option<f64>,

    /// Center of the base shape, `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub u: Option<[f64; 2]>,

    /// Midpoint samples per pixel side.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub supersample: Option<u32>,

    /// Frame padding as a fraction of the union of supports.
    #[arg(long, value_parser = nonnegative)]
    pub margin: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DistmatArgs {
    /// Distance to compute.
    #[arg(long, value_enum)]
    pub method: MethodArg,

    /// Directory of densities written by `gen`.
    #[arg(long, default_value = ".")]
    pub input_dir: PathBuf,

    /// Cut depth for the no-collision methods.
    #[arg(long)]
    pub cuts: Option<usize>,

    /// Exponent of the no-collision distance.
    #[arg(long, value_parser = at_least_one)]
    pub p: Option<f64>,

    /// Per-cell weighting of the no-collision distance.
    #[arg(long, value_enum)]
    pub weighting: Option<WeightingArg>,

    /// Orientation of the first cut.
    #[arg(long, value_enum)]
    pub first_axis: Option<AxisArg>,

    /// LOT reference variance in squared pixel spacings.
    #[arg(long, value_parser = positive)]
    pub variance: Option<f64>,

    /// Family of the closed-form matrix; defaults to the one recorded by `gen`.
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Embedding algorithm.
    #[arg(long, value_enum)]
    pub method: EmbedArg,

    /// Distance matrix CSV, or a feature CSV for `svd`.
    #[arg(long)]
    pub input: PathBuf,

    /// Embedding dimension.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: u32,

    /// Neighbors of the Isomap graph.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub k_neighbors: u32,

    /// SMACOF random restarts.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub restarts: u32,

    /// SMACOF iteration cap per restart.
    #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_iter: u32,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment spec file (JSON).
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Transformation family of the timed samples.
    #[arg(long, value_enum)]
    pub family: FamilyArg,

    /// Strictly ascending sample counts, e.g. `9,16,25,36`.
    #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub sizes: Vec<u32>,

    /// Methods to time, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub methods: Vec<MethodArg>,

    /// Repetitions per method and size.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(3..))]
    pub repetitions: u32,

    /// Skip larger sizes once a method's median exceeds this many seconds.
    #[arg(long, value_parser = positive)]
    pub timeout: Option<f64>,

    /// Cut depths timed for the no-collision methods.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub cuts: Vec<usize>,

    /// Pixels per side of the square grid.
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u32).range(16..))]
    pub n: u32,
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn nonnegative(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be nonnegative, got {v}"))
    }
}

fn at_least_one(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v >= 1.0 {
        Ok(v)
    } else {
        Err(format!("must be at least 1, got {v}"))
    }
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    match s.split(',').map(number).collect::<Result<Vec<_>, _>>()?[..] {
        [x, y] => Ok([x, y]),
        _ => Err(format!("expected `x,y`, got {s:?}")),
    }
}

fn parse_range(s: &str) -> Result<[f64; 4], String> {
    let v = s.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
    let r = match v[..] {
        [lo, hi] => [lo, hi, lo, hi],
        [x0, x1, y0, y1] => [x0, x1, y0, y1],
        _ => return Err(format!("expected `lo,hi` or `x0,x1,y0,y1`, got {s:?}")),
    };
    if r[0] > r[1] || r[2] > r[3] {
        return Err(format!("range {s:?} is reversed"));
    }
    Ok(r)
}

fn parse_counts(s: &str) -> Result<[usize; 2], String> {
    let bad = || format!("expected `COLSxROWS` with positive counts, got {s:?}");
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b == 0 {
        return Err(bad());
    }
    Ok([a, b])
}
