use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::run::{compute, synthetic_sample, FeatureCache};
use super::spec::{ExperimentSpec, Family, Method, ParameterSet, Parameters, Settings};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingOptions {
    /// Repetitions per (method, size); at least 3.
    pub repetitions: usize,
    /// Size of the thread pool the timed stage runs in.
    pub threads: usize,
    /// A method whose median exceeds this many seconds is not run at larger sizes.
    pub timeout: Option<f64>,
    /// Cut depths to time for the no-collision methods.
    pub nc_cuts: Vec<usize>,
    /// Grid size of the rasterized samples.
    pub n: usize,
}

impl Default for TimingOptions {
    fn default() -> Self {
        TimingOptions {
            repetitions: 3,
            threads: 1,
            timeout: None,
            nc_cuts: vec![2],
            n: 128,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingStatus {
    Ok,
    /// An earlier size already exceeded the timeout.
    Timeout,
    Error(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub method: Method,
    /// Cut depth, for the no-collision methods.
    pub cuts: Option<usize>,
    pub size: usize,
    /// Median wall-clock seconds; `None` unless the status is `Ok`.
    pub median_seconds: Option<f64>,
    pub repetitions: usize,
    pub status: TimingStatus,
}

impl TimingRow {
    /// Method name with the cut depth appended, e.g. `nc_mass_N2`.
    pub fn label(&self) -> String {
        match self.cuts {
            Some(c) => format!("{}_N{c}", self.method.name()),
            None => self.method.name().to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingTable {
    pub family: Family,
    pub threads: usize,
    pub rows: Vec<TimingRow>,
}

impl TimingTable {
    /// Median seconds of a method at a size, if it ran.
    pub fn median(&self, method: Method, cuts: Option<usize>, size: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.cuts == cuts && r.size == size)
            .and_then(|r| r.median_seconds)
    }

    /// Columns `method, cuts, size, median_seconds, repetitions, status, threads`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["method", "cuts", "size", "median_seconds", "repetitions", "status", "threads"])?;
        for r in &self.rows {
            let status = match &r.status {
                TimingStatus::Ok => "ok".to_string(),
                TimingStatus::Timeout => "timeout".to_string(),
                TimingStatus::Error(e) => format!("error: {e}"),
            };
            w.write_record([
                r.label(),
                r.cuts.map(|c| c.to_string()).unwrap_or_default(),
                r.size.to_string(),
                r.median_seconds.map(|s| format!("{s:e}")).unwrap_or_default(),
                r.repetitions.to_string(),
                status,
                self.threads.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}

/// The first `size` parameters of the family's default sweep: the
/// points of the smallest square grid holding `size` points over the
/// family's default range, or `size` equispaced angles.
pub fn sweep_parameters(family: Family, size: usize) -> Result<Parameters> {
    if size == 0 {
        return Err(Error::invalid("sweep sizes must be positive"));
    }
    let side = (1..).find(|k| k * k >= size).expect("unbounded");
    let (lo, hi) = match family {
        Family::Translation => ([-1.0, -1.0], [1.0, 1.0]),
        Family::Dilation => ([0.5, 0.5], [2.0, 4.0]),
        Family::Rotation => return ParameterSet::Angles { count: size }.resolve(),
        Family::Mnist => return Err(Error::invalid("timing sweeps need a synthetic family")),
    };
    let Parameters::Points(mut p) = (ParameterSet::Grid {
        lo,
        hi,
        counts: [side, side],
    })
    .resolve()?
    else {
        unreachable!("grids resolve to points")
    };
    p.truncate(size);
    Ok(Parameters::Points(p))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

/// Times the distance-matrix stage of each method over increasing sample
/// counts.
///
/// Rasterization is not timed. Feature extraction, transport solves and
/// pairwise distances are, inside a dedicated pool of `opts.threads`
/// threads. No-collision methods get one row per depth in `opts.nc_cuts`.
pub fn timing_sweep(
    family: Family,
    sizes: &[usize],
    methods: &[Method],
    settings: &Settings,
    opts: &TimingOptions,
) -> Result<TimingTable> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("sweep sizes must be strictly ascending"));
    }
    if opts.repetitions < 3 {
        return Err(Error::invalid("timing needs at least 3 repetitions"));
    }
    if opts.threads == 0 {
        return Err(Error::invalid("thread count must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::invalid(e.to_string()))?;

    let mut variants: Vec<(Method, Option<usize>)> = Vec::new();
    for &m in methods {
        if matches!(m, Method::NcMass | Method::NcGeom) {
            variants.extend(opts.nc_cuts.iter().map(|&c| (m, Some(c))));
        } else {
            variants.push((m, None));
        }
    }
    let mut timed_out = vec![false; variants.len()];
    let mut rows = Vec::new();
    for &size in sizes {
        let mut spec = ExperimentSpec::new(family, methods.to_vec());
        spec.n = opts.n;
        spec.settings = settings.clone();
        let sample = synthetic_sample(&spec, sweep_parameters(family, size)?)?;
        for (v, &(method, cuts)) in variants.iter().enumerate() {
            let mut row = TimingRow {
                method,
                cuts,
                size,
                median_seconds: None,
                repetitions: 0,
                status: TimingStatus::Ok,
            };
            if timed_out[v] {
                row.status = TimingStatus::Timeout;
                rows.push(row);
                continue;
            }
            let mut s = spec.clone();
            if let Some(c) = cuts {
                s.settings.nc_mass_cuts = Some(c);
                s.settings.nc_geom_cuts = Some(c);
            }
            let mut times = Vec::with_capacity(opts.repetitions);
            for _ in 0..opts.repetitions {
                let mut cache = FeatureCache::default();
                let start = Instant::now();
                let r = pool.install(|| compute(method, &s, &sample, &mut cache));
                let t = start.elapsed().as_secs_f64();
                if let Err(e) = r {
                    row.status = TimingStatus::Error(e.to_string());
                    break;
                }
                times.push(t);
            }
            row.repetitions = times.len();
            if row.status == TimingStatus::Ok {
                let med = median(times);
                row.median_seconds = Some(med);
                if opts.timeout.is_some_and(|limit| med > limit) {
                    timed_out[v] = true;
                }
            }
            rows.push(row);
        }
    }
    Ok(TimingTable {
        family,
        threads: opts.threads,
        rows,
    })
}
