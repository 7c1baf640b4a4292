use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::spec::{ExperimentSpec, Family, Method, Parameters};
use crate::embedding::{
    classical_mds, frobenius_relative_error, isomap, kmeans, points_matrix, procrustes_align,
    purity, rescale_to_reference, smacof_mds, svd_embed, Embedding, EmbeddingMeta,
    EmbeddingMethod,
};
use crate::error::{Error, Result};
use crate::measures::{
    apply_transform, load_mnist_idx, padded_frame, rasterize_all, to_pointcloud, GridDensity,
    GridFrame, ShapeKind, ShapeSpec, TransformSpec,
};
use crate::slicing::{feature_sets, features_distance_matrix, FeatureKind, FeatureSet, SlicingSchedule};
use crate::transport::{
    dilation_matrix, exact_w2_matrix, gaussian_reference, lot_distance_matrix, lot_embed,
    quarter_turns, rhombus_witness, rotation_matrix, second_moments, shape_second_moments,
    translation_matrix, OracleKind, RotationOracleParams,
};
use crate::DistanceMatrix;

/// Outcome of one method.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    /// Set when the method failed; every other field may then be empty.
    pub error: Option<String>,
    /// Wall-clock seconds spent computing the distance matrix.
    pub seconds: f64,
    pub max_distance: Option<f64>,
    /// Factor applied so the largest entry matches the reference's largest.
    pub scale_factor: Option<f64>,
    /// Relative Frobenius error against the reference before rescaling.
    pub relative_error_raw: Option<f64>,
    /// Relative Frobenius error against the reference after rescaling.
    pub relative_error: Option<f64>,
    pub embedding: Option<EmbeddingMeta>,
    pub embedding_error: Option<String>,
    /// Alignment of the embedding onto the ground-truth parameters.
    pub procrustes: Option<Alignment>,
    /// Rhombus witness of this method's matrix at the quarter turns.
    pub rhombus_witness: Option<f64>,
    /// 2-means (or k-means over the label count) purity of the embedding.
    pub purity: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    /// RMS misfit over the RMS radius of the truth.
    pub residual: f64,
    /// RMS misfit in parameter units.
    pub rms: f64,
    /// RMS misfit over the diameter of the truth.
    pub relative_to_diameter: f64,
    /// RMS radius of the embedding over that of the truth.
    pub scale_ratio: f64,
}

/// Closed-form rhombus witnesses of the base shape.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witnesses {
    pub analytic_w2: f64,
    pub analytic_lot: f64,
}

/// Everything an experiment produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub samples: usize,
    pub frame: GridFrame,
    pub parameters: Option<Parameters>,
    pub labels: Option<Vec<u8>>,
    /// Method or oracle the errors are measured against.
    pub reference: Option<String>,
    /// `c` of the dilation oracle, from the analytic base shape.
    pub dilation_c: Option<[f64; 2]>,
    /// `c` estimated from the rasterized base shape.
    pub dilation_c_raster: Option<[f64; 2]>,
    pub witnesses: Option<Witnesses>,
    pub methods: BTreeMap<Method, MethodReport>,
    pub threads: usize,
    #[serde(skip)]
    pub reference_matrix: Option<DistanceMatrix>,
    #[serde(skip)]
    pub matrices: BTreeMap<Method, DistanceMatrix>,
    #[serde(skip)]
    pub embeddings: BTreeMap<Method, Embedding>,
}

impl ExperimentReport {
    pub fn method(&self, m: Method) -> Option<&MethodReport> {
        self.methods.get(&m)
    }

    /// The report as pretty JSON with every `seconds` field zeroed, for
    /// run-to-run comparisons.
    pub fn without_timings(&self) -> Result<String> {
        let mut r = self.clone();
        for m in r.methods.values_mut() {
            m.seconds = 0.0;
        }
        Ok(serde_json::to_string_pretty(&r)?)
    }

    /// Writes `spec.json`, `report.json`, `D_<method>.csv`, `E_<method>.csv`
    /// and, when there is one, `D_reference.csv` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, text: String| {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        write("spec.json", serde_json::to_string_pretty(&self.spec)?)?;
        write("report.json", serde_json::to_string_pretty(self)?)?;
        if let Some(r) = &self.reference_matrix {
            r.write_csv(&dir.join("D_reference.csv"))?;
        }
        for (m, d) in &self.matrices {
            d.write_csv(&dir.join(format!("D_{}.csv", m.name())))?;
        }
        for (m, e) in &self.embeddings {
            e.write_csv(&dir.join(format!("E_{}.csv", m.name())))?;
        }
        Ok(())
    }
}

/// Sampled densities plus what is known about them.
pub(crate) struct Sample {
    pub densities: Vec<GridDensity>,
    pub frame: GridFrame,
    pub parameters: Option<Parameters>,
    pub labels: Option<Vec<u8>>,
    /// Parameters the embedding should reproduce up to a rigid motion.
    pub truth: Option<Vec<[f64; 2]>>,
    /// Closed-form W2 matrix, when the family has one.
    pub oracle: Option<DistanceMatrix>,
    pub dilation_c: Option<[f64; 2]>,
    pub dilation_c_raster: Option<[f64; 2]>,
    pub witnesses: Option<Witnesses>,
}

/// Rotation oracle of a base shape for W2. A Gaussian with covariance `S`
/// behaves like the uniform ellipse with shape matrix `4 S`.
pub(crate) fn w2_rotation_params(base: &ShapeSpec) -> Result<RotationOracleParams> {
    let mut p = RotationOracleParams::from_shape(base)?;
    if base.kind == ShapeKind::Gaussian {
        p.trace *= 4.0;
        p.det *= 16.0;
    }
    p.kind = OracleKind::EllipseW2;
    Ok(p)
}

/// Rasterizes the family's shapes for the given parameters.
pub(crate) fn synthetic_sample(spec: &ExperimentSpec, params: Parameters) -> Result<Sample> {
    let base = spec.base_shape()?;
    let s = &spec.settings;
    let transforms: Vec<TransformSpec> = match (&params, spec.family) {
        (Parameters::Points(p), Family::Translation) => {
            p.iter().map(|&theta| TransformSpec::Translate { theta }).collect()
        }
        (Parameters::Points(p), Family::Dilation) => {
            p.iter().map(|&theta| TransformSpec::Dilate { theta }).collect()
        }
        (Parameters::Angles(a), Family::Rotation) => {
            a.iter().map(|&t| TransformSpec::Rotate { t }).collect()
        }
        _ => return Err(Error::invalid("parameters do not match the family")),
    };
    let shapes = transforms
        .iter()
        .map(|t| apply_transform(&base, t))
        .collect::<Result<Vec<_>>>()?;
    let frame = padded_frame(&shapes, spec.n, s.margin)?;
    let densities = rasterize_all(&shapes, frame, s.supersample)?;

    let mut sample = Sample {
        densities,
        frame,
        parameters: None,
        labels: None,
        truth: None,
        oracle: None,
        dilation_c: None,
        dilation_c_raster: None,
        witnesses: None,
    };
    sample.oracle = Some(oracle_matrix(spec.family, &base, &params)?);
    match &params {
        Parameters::Points(p) if spec.family == Family::Translation => {
            sample.truth = Some(p.clone());
        }
        Parameters::Points(p) => {
            let c = shape_second_moments(&base);
            sample.truth = Some(p.iter().map(|t| [c[0] * t[0], c[1] * t[1]]).collect());
            sample.dilation_c = Some(c);
            let raster = rasterize_all(&[base], frame, s.supersample)?;
            sample.dilation_c_raster = Some(second_moments(&raster[0]));
        }
        Parameters::Angles(_) => {
            let w2 = w2_rotation_params(&base)?;
            let lot = RotationOracleParams {
                kind: OracleKind::GaussianLot,
                ..RotationOracleParams::from_shape(&base)?
            };
            let q = quarter_turns();
            sample.witnesses = Some(Witnesses {
                analytic_w2: rhombus_witness(&rotation_matrix(&w2, &q)?)?,
                analytic_lot: rhombus_witness(&rotation_matrix(&lot, &q)?)?,
            });
        }
    }
    sample.parameters = Some(params);
    Ok(sample)
}

/// Closed-form W2 matrix of a synthetic family.
fn oracle_matrix(family: Family, base: &ShapeSpec, params: &Parameters) -> Result<DistanceMatrix> {
    match (params, family) {
        (Parameters::Points(p), Family::Translation) => translation_matrix(p),
        (Parameters::Points(p), Family::Dilation) => dilation_matrix(p, shape_second_moments(base)),
        (Parameters::Angles(a), Family::Rotation) => rotation_matrix(&w2_rotation_params(base)?, a),
        _ => Err(Error::invalid(format!("no closed-form W2 for the {family:?} family with these parameters"))),
    }
}

/// Closed-form W2 matrix for the spec's family, base shape and parameters.
pub fn analytic_matrix(spec: &ExperimentSpec) -> Result<DistanceMatrix> {
    oracle_matrix(spec.family, &spec.base_shape()?, &spec.parameter_set().resolve()?)
}

/// Rasterized samples of a synthetic family.
#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub densities: Vec<GridDensity>,
    pub frame: GridFrame,
    pub parameters: Parameters,
}

/// Rasterizes the spec's family over its parameter set.
pub fn generate(spec: &ExperimentSpec) -> Result<Generated> {
    spec.validate()?;
    let params = spec.parameter_set().resolve()?;
    let sample = synthetic_sample(spec, params.clone())?;
    Ok(Generated {
        densities: sample.densities,
        frame: sample.frame,
        parameters: params,
    })
}

/// One method's distance matrix on given densities, plus the feature rows
/// whose Euclidean distances it reproduces, when the method has them.
///
/// The closed-form method ignores the densities and uses the spec's family,
/// base shape and parameters.
pub fn method_matrix(
    method: Method,
    spec: &ExperimentSpec,
    densities: Vec<GridDensity>,
) -> Result<(DistanceMatrix, Option<Vec<Vec<f64>>>)> {
    let frame = densities
        .first()
        .map(GridDensity::frame)
        .ok_or_else(|| Error::invalid("no densities given"))?;
    let oracle = match method {
        Method::W2Analytic => Some(analytic_matrix(spec)?),
        _ => None,
    };
    let sample = Sample {
        densities,
        frame,
        parameters: None,
        labels: None,
        truth: None,
        oracle,
        dilation_c: None,
        dilation_c_raster: None,
        witnesses: None,
    };
    let c = compute(method, spec, &sample, &mut FeatureCache::default())?;
    Ok((c.matrix, c.features))
}

fn mnist_sample(spec: &ExperimentSpec) -> Result<Sample> {
    let src = spec
        .mnist
        .as_ref()
        .ok_or_else(|| Error::invalid("the mnist family needs an \"mnist\" source"))?;
    let loaded = load_mnist_idx(&src.images, &src.labels, &src.digits, src.limit)?;
    if loaded.is_empty() {
        return Err(Error::invalid("no digits matched the filter"));
    }
    let frame = loaded[0].0.frame();
    let (densities, labels) = loaded.into_iter().unzip();
    Ok(Sample {
        densities,
        frame,
        parameters: None,
        labels: Some(labels),
        truth: None,
        oracle: None,
        dilation_c: None,
        dilation_c_raster: None,
        witnesses: None,
    })
}

/// Cached no-collision features, one entry per depth.
#[derive(Default)]
pub(crate) struct FeatureCache {
    by_depth: BTreeMap<usize, Vec<FeatureSet>>,
}

impl FeatureCache {
    fn get(&mut self, ds: &[GridDensity], sched: &SlicingSchedule) -> Result<&[FeatureSet]> {
        if let std::collections::btree_map::Entry::Vacant(e) = self.by_depth.entry(sched.depth) {
            let fs = feature_sets(ds, sched)?;
            e.insert(fs);
        }
        Ok(&self.by_depth[&sched.depth])
    }
}

/// A distance matrix and, when the method has them, the feature rows whose
/// Euclidean distances it approximates.
pub(crate) struct Computed {
    pub matrix: DistanceMatrix,
    pub features: Option<Vec<Vec<f64>>>,
}

/// Computes one method's matrix for a sample.
pub(crate) fn compute(
    method: Method,
    spec: &ExperimentSpec,
    sample: &Sample,
    cache: &mut FeatureCache,
) -> Result<Computed> {
    let s = &spec.settings;
    let ds = &sample.densities;
    let m = ds.len();
    let computed = match method {
        Method::PixelEuclidean => Computed {
            matrix: DistanceMatrix::from_fn(m, |i, j| ds[i].pixel_distance(&ds[j]))?,
            features: Some(ds.iter().map(|d| d.mass().to_vec()).collect()),
        },
        Method::W2Analytic => Computed {
            matrix: sample
                .oracle
                .clone()
                .ok_or_else(|| Error::invalid(format!("no closed-form W2 for the {:?} family", spec.family)))?,
            features: None,
        },
        Method::W2Exact => {
            if m > s.exact_max_samples {
                return Err(Error::invalid(format!(
                    "exact W2 is disabled above {} samples (got {m}); raise exact_max_samples to enable it",
                    s.exact_max_samples
                )));
            }
            let clouds = ds
                .iter()
                .enumerate()
                .map(|(k, d)| to_pointcloud(d, 0.0).map_err(|e| e.at_density(k)))
                .collect::<Result<Vec<_>>>()?;
            Computed {
                matrix: exact_w2_matrix(&clouds)?,
                features: None,
            }
        }
        Method::Lot => {
            let reference = gaussian_reference(sample.frame, s.lot_reference_variance)?;
            let emb = lot_embed(&reference, ds)?;
            Computed {
                matrix: lot_distance_matrix(&emb)?,
                features: Some((0..emb.len()).map(|k| emb.feature_row(k)).collect()),
            }
        }
        Method::NcMass | Method::NcGeom => {
            let kind = if method == Method::NcMass {
                FeatureKind::MassCenter
            } else {
                FeatureKind::GeomCenter
            };
            let sched = SlicingSchedule::new(s.cuts(method, spec.family)).with_first_axis(s.first_axis);
            let fs = cache.get(ds, &sched)?;
            Computed {
                matrix: features_distance_matrix(fs, kind, s.p, s.weighting)?,
                features: Some(fs.iter().map(|f| f.flat_row(kind)).collect()),
            }
        }
    };
    Ok(computed)
}

fn embed(
    spec: &ExperimentSpec,
    d: &DistanceMatrix,
    features: Option<&[Vec<f64>]>,
    scale: f64,
) -> Result<Embedding> {
    let s = &spec.settings;
    let k = s.embedding_dim;
    match s.embedding_for(spec.family) {
        EmbeddingMethod::Classical => classical_mds(d, k),
        EmbeddingMethod::Smacof => smacof_mds(d, k, &s.smacof),
        EmbeddingMethod::Isomap => isomap(d, s.k_neighbors, k),
        EmbeddingMethod::Svd => {
            let rows = features.ok_or_else(|| {
                Error::invalid("SVD embedding needs a feature-based method")
            })?;
            let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
            svd_embed(&scaled, k)
        }
    }
}

fn align(e: &Embedding, truth: &[[f64; 2]]) -> Result<Alignment> {
    let y = points_matrix(truth);
    let p = procrustes_align(e.coords(), &y)?;
    let radius = |x: &nalgebra::DMatrix<f64>| {
        let mean = x.row_mean();
        let ss: f64 = x.row_iter().map(|r| (r - &mean).norm_squared()).sum();
        (ss / x.nrows() as f64).sqrt()
    };
    let diameter = DistanceMatrix::euclidean_2d(truth)?.max();
    Ok(Alignment {
        residual: p.residual,
        rms: p.rms,
        relative_to_diameter: p.rms / diameter,
        scale_ratio: radius(e.coords()) / radius(&y),
    })
}

/// Indices of the angles `0, pi/2, pi, 3pi/2` when all four are present.
fn quarter_turn_indices(params: Option<&Parameters>) -> Option<Vec<usize>> {
    let Some(Parameters::Angles(a)) = params else {
        return None;
    };
    quarter_turns()
        .iter()
        .map(|q| a.iter().position(|t| (t - q).abs() < 1e-12))
        .collect()
}

/// Runs every requested method on an already sampled family.
pub(crate) fn run_on_sample(spec: &ExperimentSpec, sample: Sample) -> Result<ExperimentReport> {
    let mut report = ExperimentReport {
        spec: spec.clone(),
        samples: sample.densities.len(),
        frame: sample.frame,
        parameters: sample.parameters.clone(),
        labels: sample.labels.clone(),
        reference: None,
        dilation_c: sample.dilation_c,
        dilation_c_raster: sample.dilation_c_raster,
        witnesses: sample.witnesses,
        methods: BTreeMap::new(),
        threads: rayon::current_num_threads(),
        reference_matrix: None,
        matrices: BTreeMap::new(),
        embeddings: BTreeMap::new(),
    };
    let mut cache = FeatureCache::default();
    let mut results: BTreeMap<Method, (Result<Computed>, f64)> = BTreeMap::new();
    for &method in &spec.methods {
        let start = Instant::now();
        let r = compute(method, spec, &sample, &mut cache);
        let seconds = start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE);
        results.insert(method, (r, seconds));
    }

    // Synthetic families measure against the closed form; MNIST against
    // exact W2 when it was computed.
    let reference = match (&sample.oracle, results.get(&Method::W2Exact)) {
        (Some(o), _) => Some((Method::W2Analytic, o.clone())),
        (None, Some((Ok(c), _))) => Some((Method::W2Exact, c.matrix.clone())),
        _ => None,
    };
    let quarter = quarter_turn_indices(sample.parameters.as_ref());

    for (method, (result, seconds)) in results {
        let mut mr = MethodReport {
            seconds,
            ..MethodReport::default()
        };
        let computed = match result {
            Ok(c) => c,
            Err(e) => {
                mr.error = Some(e.to_string());
                report.methods.insert(method, mr);
                continue;
            }
        };
        let d = computed.matrix;
        mr.max_distance = Some(d.max());
        let mut scale = 1.0;
        let mut for_embedding = d.clone();
        if let Some((_, r)) = &reference {
            mr.relative_error_raw = frobenius_relative_error(&d, r).ok();
            if let Ok(scaled) = rescale_to_reference(&d, r.max()) {
                scale = r.max() / d.max();
                mr.relative_error = frobenius_relative_error(&scaled, r).ok();
                mr.scale_factor = Some(scale);
                for_embedding = scaled;
            }
        }
        if let Some(idx) = &quarter {
            mr.rhombus_witness = d.select(idx).and_then(|q| rhombus_witness(&q)).ok();
        }
        match embed(spec, &for_embedding, computed.features.as_deref(), scale) {
            Ok(mut e) => {
                if let Some(truth) = &sample.truth {
                    if let Ok(a) = align(&e, truth) {
                        e.meta.residual = Some(a.residual);
                        mr.procrustes = Some(a);
                    }
                }
                if let Some(labels) = &sample.labels {
                    mr.purity = cluster_purity(&e, labels, spec.seed).ok();
                }
                mr.embedding = Some(e.meta.clone());
                report.embeddings.insert(method, e);
            }
            Err(e) => mr.embedding_error = Some(e.to_string()),
        }
        report.matrices.insert(method, d);
        report.methods.insert(method, mr);
    }
    if let Some((m, r)) = reference {
        report.reference = Some(m.name().to_string());
        report.reference_matrix = Some(r);
    }
    Ok(report)
}

/// k-means with one cluster per distinct label, scored by purity.
fn cluster_purity(e: &Embedding, labels: &[u8], seed: u64) -> Result<f64> {
    let k = labels.iter().collect::<std::collections::BTreeSet<_>>().len();
    let km = kmeans(e.coords(), k.min(e.len()).max(1), seed, 8)?;
    purity(&km.assignment, labels)
}

/// Samples the family, computes every requested distance matrix, rescales
/// against the reference, embeds and scores.
///
/// A failing method is recorded in its [`MethodReport`] and does not stop
/// the others.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    if spec.family == Family::Mnist {
        return mnist_pipeline(spec);
    }
    let params = spec.parameter_set().resolve()?;
    let sample = synthetic_sample(spec, params)?;
    run_on_sample(spec, sample)
}

/// Loads the digits named by `spec.mnist` and runs the requested methods
/// on them; embeddings default to Isomap and are clustered into as many
/// groups as there are labels.
pub fn mnist_pipeline(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    if spec.family != Family::Mnist {
        return Err(Error::invalid("mnist_pipeline needs the mnist family"));
    }
    spec.validate()?;
    let sample = mnist_sample(spec)?;
    run_on_sample(spec, sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::spec::ParameterSet;

    fn small(family: Family, methods: Vec<Method>) -> ExperimentSpec {
        let mut s = ExperimentSpec::new(family, methods);
        s.n = 32;
        s
    }

    #[test]
    fn translation_against_the_closed_form() {
        let s = small(Family::Translation, vec![Method::NcMass, Method::W2Analytic]);
        let r = run_experiment(&s).unwrap();
        assert_eq!(r.reference.as_deref(), Some("w2_analytic"));
        assert_eq!(r.method(Method::W2Analytic).unwrap().relative_error, Some(0.0));
        let nc = r.method(Method::NcMass).unwrap();
        assert!(nc.error.is_none());
        assert!(nc.relative_error.unwrap() < 0.05, "{nc:?}");
        assert!(nc.procrustes.unwrap().relative_to_diameter < 0.05);
        assert_eq!(r.matrices[&Method::NcMass].size(), 16);
    }

    #[test]
    fn failures_are_recorded_per_method() {
        let mut s = small(Family::Translation, vec![Method::W2Exact, Method::NcMass]);
        s.settings.exact_max_samples = 3;
        let r = run_experiment(&s).unwrap();
        let exact = r.method(Method::W2Exact).unwrap();
        assert!(exact.error.as_deref().unwrap().contains("disabled above 3"));
        assert!(r.method(Method::NcMass).unwrap().error.is_none());
        assert!(r.methods.values().all(|m| m.seconds > 0.0));
    }

    #[test]
    fn rotation_reports_witnesses() {
        let mut s = small(Family::Rotation, vec![Method::NcMass]);
        s.parameters = Some(ParameterSet::Angles { count: 8 });
        let r = run_experiment(&s).unwrap();
        let w = r.witnesses.unwrap();
        assert!((w.analytic_w2 + 9.0).abs() < 1e-12);
        assert!((w.analytic_lot + 36.0).abs() < 1e-12);
        assert!(r.method(Method::NcMass).unwrap().rhombus_witness.is_some());
        assert!(r.method(Method::NcMass).unwrap().procrustes.is_none());
    }

    #[test]
    fn reports_are_reproducible_and_written() {
        let mut s = small(Family::Dilation, vec![Method::NcMass, Method::NcGeom, Method::PixelEuclidean]);
        s.parameters = Some(ParameterSet::Grid {
            lo: [0.5, 0.5],
            hi: [1.5, 1.5],
            counts: [3, 3],
        });
        s.settings.embedding = Some(EmbeddingMethod::Smacof);
        let a = run_experiment(&s).unwrap();
        let b = run_experiment(&s).unwrap();
        assert_eq!(a.without_timings().unwrap(), b.without_timings().unwrap());
        assert_eq!(a.dilation_c, Some([0.5, 0.5]));
        let dir = tempfile::tempdir().unwrap();
        a.write_outputs(dir.path()).unwrap();
        for f in ["spec.json", "report.json", "D_reference.csv", "D_nc_mass.csv", "E_nc_geom.csv", "E_pixel_euclidean.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let back = DistanceMatrix::read_csv(&dir.path().join("D_nc_mass.csv")).unwrap();
        assert_eq!(&back, &a.matrices[&Method::NcMass]);
    }

    #[test]
    fn svd_embedding_uses_features() {
        let mut s = small(Family::Translation, vec![Method::NcMass, Method::W2Analytic]);
        s.settings.embedding = Some(EmbeddingMethod::Svd);
        let r = run_experiment(&s).unwrap();
        let nc = r.method(Method::NcMass).unwrap();
        assert_eq!(nc.embedding.as_ref().unwrap().method, EmbeddingMethod::Svd);
        assert!(nc.procrustes.unwrap().relative_to_diameter < 0.05);
        let a = r.method(Method::W2Analytic).unwrap();
        assert!(a.embedding_error.as_deref().unwrap().contains("feature-based"));
    }

    #[test]
    fn gaussian_rotation_oracle_matches_the_ellipse_form() {
        let g = ShapeSpec::gaussian([0.0, 1.0], [[4.0, 0.0], [0.0, 1.0]]).unwrap();
        let e = ShapeSpec::ellipse([0.0, 1.0], 4.0, 2.0).unwrap();
        let pg = w2_rotation_params(&g).unwrap();
        let pe = w2_rotation_params(&e).unwrap();
        assert_eq!(pg, pe);
    }
}
