use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use nocollide::embedding::{
    classical_mds, isomap, smacof_mds, svd_embed, Embedding, EmbeddingMethod, SmacofOptions,
};
use nocollide::experiments::{
    generate, method_matrix, run_experiment, timing_sweep, ExperimentSpec, Family, Method,
    ParameterSet, Parameters, Settings, TimingOptions,
};
use nocollide::measures::{list_density_stems, GridDensity, ShapeSpec};
use nocollide::slicing::{Axis, Weighting};
use nocollide::DistanceMatrix;
use serde_json::json;

use crate::args::{
    AxisArg, BenchArgs, DistmatArgs, EmbedArg, EmbedArgs, ExperimentArgs, Format, GenArgs,
    WeightingArg,
};
use crate::UsageError;

/// Flags shared by every subcommand.
pub struct Global {
    pub seed: Option<u64>,
    pub threads: usize,
    pub out_dir: PathBuf,
    pub format: Format,
}

impl Global {
    fn out(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out_dir)
            .with_context(|| format!("creating {}", self.out_dir.display()))?;
        Ok(self.out_dir.join(name))
    }

    fn ext(&self) -> &'static str {
        match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)
        .with_context(|| format!("writing {}", path.display()))
}

pub fn gen(g: &Global, a: &GenArgs) -> Result<()> {
    let family = Family::from(a.family);
    let rotation = family == Family::Rotation;
    if rotation && (a.grid.is_some() || a.range.is_some()) {
        return Err(usage("rotation takes --angles, not --grid or --range"));
    }
    if !rotation && a.angles.is_some() {
        return Err(usage("--angles only applies to the rotation family"));
    }

    let mut spec = ExperimentSpec::new(family, vec![Method::PixelEuclidean]);
    spec.n = a.n as usize;
    if let Some(s) = a.supersample {
        spec.settings.supersample = s as usize;
    }
    if let Some(m) = a.margin {
        spec.settings.margin = m;
    }
    if a.a.is_some() || a.b.is_some() || a.u.is_some() {
        let (da, db, du) = if rotation { (5.0, 2.0, [0.0, 1.0]) } else { (1.0, 1.0, [0.0, 0.0]) };
        let shape = ShapeSpec::ellipse(a.u.unwrap_or(du), a.a.unwrap_or(da), a.b.unwrap_or(db))
            .map_err(|e| usage(e.to_string()))?;
        spec.base = Some(shape);
    }
    if let Some(count) = a.angles {
        spec.parameters = Some(ParameterSet::Angles { count: count as usize });
    }
    if a.grid.is_some() || a.range.is_some() {
        let ParameterSet::Grid { lo, hi, counts } = spec.parameter_set() else {
            unreachable!("translation and dilation default to grids")
        };
        let (lo, hi) = match a.range {
            Some(r) => ([r[0], r[2]], [r[1], r[3]]),
            None => (lo, hi),
        };
        spec.parameters = Some(ParameterSet::Grid {
            lo,
            hi,
            counts: a.grid.unwrap_or(counts),
        });
    }
    spec.validate().map_err(|e| usage(e.to_string()))?;

    let generated = generate(&spec)?;
    let width = generated.densities.len().to_string().len().max(3);
    for (i, d) in generated.densities.iter().enumerate() {
        d.write(&g.out(&format!("sample_{i:0width$}"))?)?;
    }
    write_json(&g.out("spec.json")?, &serde_json::to_value(&spec)?)?;
    write_parameters(&g.out("parameters.csv")?, &generated.parameters)?;
    println!(
        "wrote {} densities ({}x{}) to {}",
        generated.densities.len(),
        generated.frame.width,
        generated.frame.height,
        g.out_dir.display()
    );
    Ok(())
}

fn write_parameters(path: &Path, params: &Parameters) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    match params {
        Parameters::Points(p) => {
            w.write_record(["index", "theta_x", "theta_y"])?;
            for (i, t) in p.iter().enumerate() {
                w.write_record([i.to_string(), t[0].to_string(), t[1].to_string()])?;
            }
        }
        Parameters::Angles(a) => {
            w.write_record(["index", "angle"])?;
            for (i, t) in a.iter().enumerate() {
                w.write_record([i.to_string(), t.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn distmat(g: &Global, a: &DistmatArgs) -> Result<()> {
    let dir = &a.input_dir;
    if !dir.is_dir() {
        return Err(usage(format!("input directory {} does not exist", dir.display())));
    }
    let stems = list_density_stems(dir)?;
    if stems.is_empty() {
        return Err(usage(format!("no densities in {}", dir.display())));
    }
    let method = Method::from(a.method);

    let recorded = dir.join("spec.json");
    let mut spec = if recorded.exists() {
        let text = fs::read_to_string(&recorded)?;
        ExperimentSpec::from_json(&text).with_context(|| format!("reading {}", recorded.display()))?
    } else {
        let family = a.family.map(Family::from).unwrap_or(Family::Translation);
        ExperimentSpec::new(family, vec![method])
    };
    if let Some(f) = a.family.map(Family::from) {
        if f != spec.family {
            return Err(usage(format!(
                "--family {f:?} contradicts the {:?} family recorded in {}",
                spec.family,
                recorded.display()
            )));
        }
    }
    if method == Method::W2Analytic && !recorded.exists() && a.family.is_none() {
        return Err(usage("w2-analytic needs --family or a spec.json written by gen"));
    }
    spec.methods = vec![method];
    let s = &mut spec.settings;
    if let Some(c) = a.cuts {
        s.nc_mass_cuts = Some(c);
        s.nc_geom_cuts = Some(c);
    }
    if let Some(p) = a.p {
        s.p = p;
    }
    if let Some(w) = a.weighting {
        s.weighting = match w {
            WeightingArg::Mass => Weighting::Mass,
            WeightingArg::Uniform => Weighting::Uniform,
        };
    }
    if let Some(ax) = a.first_axis {
        s.first_axis = match ax {
            AxisArg::Vertical => Axis::Vertical,
            AxisArg::Horizontal => Axis::Horizontal,
        };
    }
    if let Some(v) = a.variance {
        s.lot_reference_variance = v;
    }

    let densities = stems
        .iter()
        .map(|s| GridDensity::read(s))
        .collect::<nocollide::Result<Vec<_>>>()?;
    let count = densities.len();
    let (matrix, features) = method_matrix(method, &spec, densities)?;
    if matrix.size() != count {
        return Err(usage(format!(
            "the closed-form matrix has {} entries but {} densities were found",
            matrix.size(),
            count
        )));
    }

    let d_path = g.out(&format!("D_{}.{}", method.name(), g.ext()))?;
    match g.format {
        Format::Csv => matrix.write_csv(&d_path)?,
        Format::Json => write_json(&d_path, &matrix_json(&matrix))?,
    }
    println!("wrote {} ({count}x{count})", d_path.display());
    if let Some(rows) = features {
        let f_path = g.out(&format!("F_{}.{}", method.name(), g.ext()))?;
        match g.format {
            Format::Csv => write_features_csv(&f_path, &rows)?,
            Format::Json => write_json(&f_path, &json!({ "rows": rows }))?,
        }
        println!("wrote {}", f_path.display());
    }
    Ok(())
}

fn matrix_json(d: &DistanceMatrix) -> serde_json::Value {
    let rows: Vec<&[f64]> = (0..d.size()).map(|i| d.row(i)).collect();
    json!({ "size": d.size(), "rows": rows })
}

fn write_features_csv(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let dim = rows.first().map_or(0, Vec::len);
    let mut header = vec!["index".to_string()];
    header.extend((1..=dim).map(|c| format!("f{c}")));
    w.write_record(&header)?;
    for (i, r) in rows.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(r.iter().map(|v| format!("{v:e}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn json_rows(path: &Path, v: &serde_json::Value) -> Result<Vec<Vec<f64>>> {
    serde_json::from_value(v["rows"].clone())
        .map_err(|e| usage(format!("{}: expected a \"rows\" array of numbers: {e}", path.display())))
}

/// Reads a feature table; the first column of a CSV holds the row index.
fn read_features(path: &Path) -> Result<Vec<Vec<f64>>> {
    if is_json(path) {
        return json_rows(path, &read_json(path)?);
    }
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    if r.headers()?.get(0) != Some("index") {
        return Err(usage(format!(
            "{} is not a feature table; svd embeds the F_*.csv files written by distmat",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .skip(1)
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
        rows.push(row);
    }
    Ok(rows)
}

fn read_matrix(path: &Path) -> Result<DistanceMatrix> {
    if is_json(path) {
        let rows = json_rows(path, &read_json(path)?)?;
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(usage(format!("{} is not a square matrix", path.display())));
        }
        return Ok(DistanceMatrix::new(m, rows.concat())?);
    }
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    if r.headers()?.get(0) == Some("index") {
        return Err(usage(format!(
            "{} is a feature table; only svd embeds features",
            path.display()
        )));
    }
    Ok(DistanceMatrix::read_csv(path)?)
}

pub fn embed(g: &Global, a: &EmbedArgs) -> Result<()> {
    if !a.input.is_file() {
        return Err(usage(format!("input file {} does not exist", a.input.display())));
    }
    let k = a.k as usize;
    let method = EmbeddingMethod::from(a.method);
    let e: Embedding = match a.method {
        EmbedArg::Svd => svd_embed(&read_features(&a.input)?, k)?,
        EmbedArg::Classical => classical_mds(&read_matrix(&a.input)?, k)?,
        EmbedArg::Isomap => isomap(&read_matrix(&a.input)?, a.k_neighbors as usize, k)?,
        EmbedArg::Smacof => {
            let opts = SmacofOptions {
                restarts: a.restarts as usize,
                max_iter: a.max_iter as usize,
                seed: g.seed.unwrap_or(0),
                ..SmacofOptions::default()
            };
            smacof_mds(&read_matrix(&a.input)?, k, &opts)?
        }
    };

    let stem = a
        .input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("input");
    let stem = stem
        .strip_prefix("D_")
        .or_else(|| stem.strip_prefix("F_"))
        .unwrap_or(stem);
    let name = format!("E_{stem}_{}", method.name());
    let path = g.out(&format!("{name}.{}", g.ext()))?;
    match g.format {
        Format::Csv => {
            e.write_csv(&path)?;
            e.write_meta(&g.out(&format!("{name}.meta.json"))?)?;
        }
        Format::Json => {
            let coords: Vec<Vec<f64>> = (0..e.len()).map(|i| e.point(i)).collect();
            write_json(&path, &json!({ "meta": e.meta, "coords": coords }))?;
        }
    }
    println!("wrote {} ({}x{})", path.display(), e.len(), e.dim());
    Ok(())
}

/// Fields of an experiment spec that have no default.
const REQUIRED_FIELDS: [&str; 2] = ["family", "methods"];

pub fn experiment(g: &Global, a: &ExperimentArgs) -> Result<()> {
    if !a.spec.is_file() {
        return Err(usage(format!("spec file {} does not exist", a.spec.display())));
    }
    let value = read_json(&a.spec).map_err(|e| usage(format!("{e:#}")))?;
    let Some(obj) = value.as_object() else {
        return Err(usage(format!("{}: the spec must be a JSON object", a.spec.display())));
    };
    let missing: Vec<&str> = REQUIRED_FIELDS
        .into_iter()
        .filter(|f| !obj.contains_key(*f))
        .collect();
    if !missing.is_empty() {
        return Err(usage(format!(
            "{}: missing required field(s): {}",
            a.spec.display(),
            missing.join(", ")
        )));
    }
    let mut spec: ExperimentSpec = serde_json::from_value(value)
        .map_err(|e| usage(format!("{}: {e}", a.spec.display())))?;
    if let Some(seed) = g.seed {
        spec.seed = seed;
    }
    spec.validate().map_err(|e| usage(format!("{}: {e}", a.spec.display())))?;

    let report = run_experiment(&spec)?;
    fs::create_dir_all(&g.out_dir)?;
    report.write_outputs(&g.out_dir)?;
    for (m, r) in &report.methods {
        if let Some(e) = &r.error {
            println!("{:<16} failed: {e}", m.name());
            continue;
        }
        let err = r
            .relative_error
            .map(|e| format!("{:.3}%", 100.0 * e))
            .unwrap_or_else(|| "n/a".into());
        println!("{:<16} error {err:>9}  {:.3}s", m.name(), r.seconds);
    }
    println!("wrote report to {}", g.out_dir.display());
    Ok(())
}

pub fn bench(g: &Global, a: &BenchArgs) -> Result<()> {
    let opts = TimingOptions {
        repetitions: a.repetitions as usize,
        threads: g.threads,
        timeout: a.timeout,
        nc_cuts: a.cuts.clone(),
        n: a.n as usize,
    };
    let sizes: Vec<usize> = a.sizes.iter().map(|&s| s as usize).collect();
    let methods: Vec<Method> = a.methods.iter().map(|&m| m.into()).collect();
    let table = timing_sweep(a.family.into(), &sizes, &methods, &Settings::default(), &opts)?;
    let path = g.out(&format!("timing.{}", g.ext()))?;
    match g.format {
        Format::Csv => table.write_csv(&path)?,
        Format::Json => write_json(&path, &serde_json::to_value(&table)?)?,
    }
    println!("wrote {} ({} rows)", path.display(), table.rows.len());
    Ok(())
}
