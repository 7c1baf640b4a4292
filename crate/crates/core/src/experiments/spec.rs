use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embedding::{EmbeddingMethod, SmacofOptions};
use crate::error::{Error, Result};
use crate::measures::ShapeSpec;
use crate::slicing::{Axis, Weighting};
use crate::transport::DEFAULT_REFERENCE_VARIANCE;

/// Which family of transformed measures an experiment samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Translation,
    Dilation,
    Rotation,
    Mnist,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "translation" => Ok(Family::Translation),
            "dilation" => Ok(Family::Dilation),
            "rotation" => Ok(Family::Rotation),
            "mnist" => Ok(Family::Mnist),
            _ => Err(Error::invalid(format!(
                "unknown family {s:?} (expected translation, dilation, rotation or mnist)"
            ))),
        }
    }
}

/// A way of computing a distance matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PixelEuclidean,
    W2Exact,
    W2Analytic,
    Lot,
    NcMass,
    NcGeom,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::PixelEuclidean,
        Method::W2Exact,
        Method::W2Analytic,
        Method::Lot,
        Method::NcMass,
        Method::NcGeom,
    ];

    /// Snake-case name used in file names and reports.
    pub fn name(self) -> &'static str {
        match self {
            Method::PixelEuclidean => "pixel_euclidean",
            Method::W2Exact => "w2_exact",
            Method::W2Analytic => "w2_analytic",
            Method::Lot => "lot",
            Method::NcMass => "nc_mass",
            Method::NcGeom => "nc_geom",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Accepts snake-case or kebab-case names.
    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown method {s:?} (expected one of pixel-euclidean, w2-exact, w2-analytic, lot, nc-mass, nc-geom)"
                ))
            })
    }
}

/// The parameter set `Θ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParameterSet {
    /// `counts[0] x counts[1]` grid spanning `[lo, hi]`, x index outermost.
    Grid {
        lo: [f64; 2],
        hi: [f64; 2],
        counts: [usize; 2],
    },
    /// Explicit 2D parameters.
    Points { values: Vec<[f64; 2]> },
    /// `count` equispaced angles in `[0, 2 pi)`.
    Angles { count: usize },
    /// Explicit angles in radians.
    AngleList { values: Vec<f64> },
}

/// Resolved parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameters {
    Points(Vec<[f64; 2]>),
    Angles(Vec<f64>),
}

impl Parameters {
    pub fn len(&self) -> usize {
        match self {
            Parameters::Points(p) => p.len(),
            Parameters::Angles(a) => a.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl ParameterSet {
    pub fn resolve(&self) -> Result<Parameters> {
        let out = match self {
            ParameterSet::Grid { lo, hi, counts } => {
                if counts[0] == 0 || counts[1] == 0 {
                    return Err(Error::invalid("parameter grid counts must be positive"));
                }
                let axis = |d: usize, k: usize| {
                    if counts[d] == 1 {
                        lo[d]
                    } else {
                        lo[d] + (hi[d] - lo[d]) * k as f64 / (counts[d] - 1) as f64
                    }
                };
                let mut pts = Vec::with_capacity(counts[0] * counts[1]);
                for i in 0..counts[0] {
                    for j in 0..counts[1] {
                        pts.push([axis(0, i), axis(1, j)]);
                    }
                }
                Parameters::Points(pts)
            }
            ParameterSet::Points { values } => Parameters::Points(values.clone()),
            ParameterSet::Angles { count } => Parameters::Angles(
                (0..*count)
                    .map(|k| 2.0 * std::f64::consts::PI * k as f64 / *count as f64)
                    .collect(),
            ),
            ParameterSet::AngleList { values } => Parameters::Angles(values.clone()),
        };
        if out.is_empty() {
            return Err(Error::invalid("parameter set is empty"));
        }
        Ok(out)
    }
}

/// Where MNIST digits come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MnistSource {
    pub images: PathBuf,
    pub labels: PathBuf,
    #[serde(default = "default_digits")]
    pub digits: BTreeSet<u8>,
    #[serde(default = "default_limit")]
    pub limit: usize,
}

fn default_digits() -> BTreeSet<u8> {
    [0, 1].into_iter().collect()
}

fn default_limit() -> usize {
    600
}

/// Per-method knobs. Unset cut depths and embedding choices fall back to
/// per-family defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub nc_mass_cuts: Option<usize>,
    pub nc_geom_cuts: Option<usize>,
    pub p: f64,
    pub weighting: Weighting,
    pub first_axis: Axis,
    pub supersample: usize,
    /// Frame padding as a fraction of the union of supports, per side.
    pub margin: f64,
    /// Variance of the LOT reference Gaussian, in squared pixel spacings.
    pub lot_reference_variance: f64,
    pub embedding: Option<EmbeddingMethod>,
    pub embedding_dim: usize,
    pub k_neighbors: usize,
    pub smacof: SmacofOptions,
    /// Exact W2 is refused above this many samples.
    pub exact_max_samples: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            nc_mass_cuts: None,
            nc_geom_cuts: None,
            p: 2.0,
            weighting: Weighting::Mass,
            first_axis: Axis::Vertical,
            supersample: crate::measures::DEFAULT_SUPERSAMPLE,
            margin: 0.1,
            lot_reference_variance: DEFAULT_REFERENCE_VARIANCE,
            embedding: None,
            embedding_dim: 2,
            k_neighbors: 5,
            smacof: SmacofOptions::default(),
            exact_max_samples: 200,
        }
    }
}

impl Settings {
    /// Cut depth for an NC method: 4 for MNIST, 2 otherwise, unless set.
    pub fn cuts(&self, method: Method, family: Family) -> usize {
        let set = match method {
            Method::NcGeom => self.nc_geom_cuts,
            _ => self.nc_mass_cuts,
        };
        set.unwrap_or(if family == Family::Mnist { 4 } else { 2 })
    }

    /// Isomap for MNIST, classical MDS otherwise, unless set.
    pub fn embedding_for(&self, family: Family) -> EmbeddingMethod {
        self.embedding.unwrap_or(if family == Family::Mnist {
            EmbeddingMethod::Isomap
        } else {
            EmbeddingMethod::Classical
        })
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub family: Family,
    /// Base measure; defaults to the unit disk, or for rotations the
    /// ellipse with semi-axes 5 and 2 centered at `(0, 1)`.
    #[serde(default)]
    pub base: Option<ShapeSpec>,
    /// Defaults per family: a 4x4 grid on `[-1, 1]^2`, a 6x6 grid on
    /// `[0.5, 2] x [0.5, 4]`, or 16 equispaced angles.
    #[serde(default)]
    pub parameters: Option<ParameterSet>,
    #[serde(default = "default_n")]
    pub n: usize,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub settings: Settings,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mnist: Option<MnistSource>,
}

fn default_n() -> usize {
    128
}

impl ExperimentSpec {
    /// A spec with the family's default base, parameters and grid size.
    pub fn new(family: Family, methods: Vec<Method>) -> Self {
        ExperimentSpec {
            family,
            base: None,
            parameters: None,
            n: default_n(),
            methods,
            settings: Settings::default(),
            seed: 0,
            mnist: None,
        }
    }

    pub fn base_shape(&self) -> Result<ShapeSpec> {
        match (self.base, self.family) {
            (Some(b), _) => {
                b.validate()?;
                Ok(b)
            }
            (None, Family::Rotation) => ShapeSpec::ellipse([0.0, 1.0], 5.0, 2.0),
            (None, _) => ShapeSpec::disk([0.0, 0.0], 1.0),
        }
    }

    pub fn parameter_set(&self) -> ParameterSet {
        if let Some(p) = &self.parameters {
            return p.clone();
        }
        match self.family {
            Family::Translation | Family::Mnist => ParameterSet::Grid {
                lo: [-1.0, -1.0],
                hi: [1.0, 1.0],
                counts: [4, 4],
            },
            Family::Dilation => ParameterSet::Grid {
                lo: [0.5, 0.5],
                hi: [2.0, 4.0],
                counts: [6, 6],
            },
            Family::Rotation => ParameterSet::Angles { count: 16 },
        }
    }

    /// Checks the invariants that do not need any data.
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::invalid("no methods requested"));
        }
        let mut seen = BTreeSet::new();
        if let Some(m) = self.methods.iter().find(|m| !seen.insert(**m)) {
            return Err(Error::invalid(format!("method {m} listed twice")));
        }
        if self.family == Family::Mnist {
            if self.mnist.is_none() {
                return Err(Error::invalid("the mnist family needs an \"mnist\" source"));
            }
            return self.validate_settings();
        }
        if self.n < 16 {
            return Err(Error::invalid(format!("grid size must be at least 16, got {}", self.n)));
        }
        self.base_shape()?;
        let params = self.parameter_set().resolve()?;
        match (self.family, &params) {
            (Family::Rotation, Parameters::Angles(_)) => {}
            (Family::Rotation, _) => {
                return Err(Error::invalid("rotation experiments take angles"));
            }
            (_, Parameters::Angles(_)) => {
                return Err(Error::invalid("only rotation experiments take angles"));
            }
            (Family::Dilation, Parameters::Points(p))
                if p.iter().flatten().any(|&v| !(v > 0.0)) => {
                    return Err(Error::invalid("dilation parameters must be positive"));
                }
            _ => {}
        }
        self.validate_settings()
    }

    fn validate_settings(&self) -> Result<()> {
        let s = &self.settings;
        if !(s.p >= 1.0) || !s.p.is_finite() {
            return Err(Error::invalid(format!("p must be >= 1, got {}", s.p)));
        }
        if s.supersample == 0 {
            return Err(Error::invalid("supersample must be positive"));
        }
        if !(s.margin >= 0.0) {
            return Err(Error::invalid("margin must be nonnegative"));
        }
        if !(s.lot_reference_variance > 0.0) {
            return Err(Error::invalid("LOT reference variance must be positive"));
        }
        if s.embedding_dim == 0 {
            return Err(Error::invalid("embedding dimension must be at least 1"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}
