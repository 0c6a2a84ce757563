//! Labelled trajectory datasets: scenario presets, parameter sampling,
//! generation, measurement noise and CSV persistence.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::damping::{self, DampingConfig, DEFAULT_FINE_POINTS};
use crate::dephasing::{self, plus_state, DephasingConfig};
use crate::error::{Error, Result};
use crate::fourier;
use crate::rng::{self, Purpose, StreamRng};
use crate::spectral::{InverseTemperature, SpectralDensity};
use crate::timeseries::uniform_grid;

pub const FORMAT_VERSION: u32 = 1;

/// Gap kept from an open interval endpoint when sampling.
pub const OPEN_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OhmicityClass {
    SubOhmic = 0,
    Ohmic = 1,
    SuperOhmic = 2,
}

impl OhmicityClass {
    pub const ALL: [OhmicityClass; 3] = [Self::SubOhmic, Self::Ohmic, Self::SuperOhmic];

    pub fn from_s(s: f64) -> Self {
        if s < 1.0 {
            Self::SubOhmic
        } else if s == 1.0 {
            Self::Ohmic
        } else {
            Self::SuperOhmic
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::SubOhmic => "sub-ohmic",
            Self::Ohmic => "ohmic",
            Self::SuperOhmic => "super-ohmic",
        }
    }
}

impl fmt::Display for OhmicityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Dephasing,
    Damping,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Dephasing => "dephasing",
            Model::Damping => "damping",
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dephasing" => Ok(Model::Dephasing),
            "damping" => Ok(Model::Damping),
            other => Err(Error::Config(format!("unknown model {other:?}"))),
        }
    }
}

/// Real interval with per-end openness. `lo == hi` (closed) is a fixed value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: false, hi_open: false }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: true, hi_open: true }
    }

    pub fn left_open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: true, hi_open: false }
    }

    pub fn right_open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: false, hi_open: true }
    }

    pub fn fixed(v: f64) -> Self {
        Self::closed(v, v)
    }

    /// Sampling range after shrinking open ends by [`OPEN_GAP`].
    pub fn effective(&self) -> (f64, f64) {
        let lo = if self.lo_open { self.lo + OPEN_GAP } else { self.lo };
        let hi = if self.hi_open { self.hi - OPEN_GAP } else { self.hi };
        (lo, hi)
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        let (lo, hi) = self.effective();
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Config(format!(
                "{what} interval {self} is empty or inverted"
            )));
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let (lo, hi) = self.effective();
        if lo == hi {
            return lo;
        }
        lo + (hi - lo) * rng.random::<f64>()
    }

    pub fn contains(&self, v: f64) -> bool {
        let (lo, hi) = self.effective();
        v >= lo && v <= hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_open { '(' } else { '[' },
            self.lo,
            self.hi,
            if self.hi_open { ')' } else { ']' }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub model: Model,
    pub s_sub: Interval,
    pub s_super: Interval,
    pub eta: Interval,
    pub omega_c: Interval,
    pub beta: InverseTemperature,
    /// Qubit splitting; only used by the damping model.
    pub omega0: f64,
    pub n_train: usize,
    pub n_valid: usize,
    pub n_test: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
    pub seed: u64,
}

pub const PRESET_NAMES: [&str; 13] = [
    "pd-separated",
    "pd-adjacent",
    "pd-varying-0",
    "pd-varying-1",
    "pd-varying-2",
    "pd-varying-3",
    "pd-varying-4",
    "pd-varying-5",
    "pd-varying-6",
    "pd-varying-7",
    "pd-varying-8",
    "pd-varying-9",
    "ad-default",
];

fn pd_base(name: &str) -> ScenarioSpec {
    ScenarioSpec {
        name: name.to_string(),
        model: Model::Dephasing,
        s_sub: Interval::open(0.0, 1.0),
        s_super: Interval::left_open(1.0, 4.0),
        eta: Interval::fixed(0.25),
        omega_c: Interval::fixed(0.5),
        beta: InverseTemperature::Infinite,
        omega0: 0.0,
        n_train: 4800,
        n_valid: 2400,
        n_test: 2400,
        t_min: 0.0,
        t_max: 10.0,
        n_points: 400,
        seed: 0,
    }
}

/// Named scenario with seed 0.
pub fn preset(name: &str) -> Result<ScenarioSpec> {
    let spec = match name {
        "pd-separated" => ScenarioSpec {
            s_sub: Interval::left_open(0.0, 0.5),
            s_super: Interval::closed(1.5, 4.0),
            ..pd_base(name)
        },
        "pd-adjacent" => pd_base(name),
        "ad-default" => ScenarioSpec {
            name: name.to_string(),
            model: Model::Damping,
            s_sub: Interval::right_open(0.3, 1.0),
            s_super: Interval::left_open(1.0, 2.0),
            eta: Interval::left_open(0.0, 0.2),
            omega_c: Interval::closed(0.1, 2.0),
            beta: InverseTemperature::Finite(0.1),
            omega0: 1.0,
            n_train: 1500,
            n_valid: 300,
            n_test: 300,
            t_min: 0.0,
            t_max: 10.0,
            n_points: 400,
            seed: 0,
        },
        other => {
            let k = other
                .strip_prefix("pd-varying-")
                .and_then(|k| k.parse::<u32>().ok())
                .filter(|&k| k <= 9)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "unknown preset {other:?}; valid presets: {}",
                        PRESET_NAMES.join(", ")
                    ))
                })?;
            let range = Interval::closed(0.25, 0.25 + 0.2 * k as f64);
            ScenarioSpec {
                eta: range,
                omega_c: range,
                ..pd_base(name)
            }
        }
    };
    Ok(spec)
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        self.s_sub.validate("sub-Ohmic s")?;
        self.s_super.validate("super-Ohmic s")?;
        self.eta.validate("eta")?;
        self.omega_c.validate("omega_c")?;
        let (lo, hi) = self.s_sub.effective();
        if !(lo > 0.0 && hi < 1.0) {
            return Err(Error::Config(format!(
                "sub-Ohmic s interval {} must lie inside (0, 1)",
                self.s_sub
            )));
        }
        if !(self.s_super.effective().0 > 1.0) {
            return Err(Error::Config(format!(
                "super-Ohmic s interval {} must lie above 1",
                self.s_super
            )));
        }
        if self.eta.effective().0 < 0.0 {
            return Err(Error::Config("eta must be non-negative".into()));
        }
        if !(self.omega_c.effective().0 > 0.0) {
            return Err(Error::Config("omega_c must be positive".into()));
        }
        for (n, what) in [(self.n_train, "train"), (self.n_valid, "valid"), (self.n_test, "test")] {
            if n == 0 || n % 3 != 0 {
                return Err(Error::Config(format!(
                    "{what} size {n} must be a positive multiple of 3"
                )));
            }
        }
        if !(self.t_min >= 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) || self.n_points < 2 {
            return Err(Error::Config(format!(
                "bad time window [{}, {}) with {} points",
                self.t_min, self.t_max, self.n_points
            )));
        }
        if self.model == Model::Damping {
            let InverseTemperature::Finite(b) = self.beta else {
                return Err(Error::Config("the damping model needs a finite beta".into()));
            };
            if !(b > 0.0) {
                return Err(Error::Config("beta must be positive".into()));
            }
            // output samples must land on the RK4 step grid
            let steps = (DEFAULT_FINE_POINTS - 1) / 2;
            if self.t_min != 0.0 || !steps.is_multiple_of(self.n_points) {
                return Err(Error::Config(format!(
                    "damping trajectories need t_min = 0 and n_points dividing {steps}"
                )));
            }
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        uniform_grid(self.t_min, self.t_max, self.n_points)
    }

    pub fn split_size(&self, split: Split) -> usize {
        match split {
            Split::Train => self.n_train,
            Split::Valid => self.n_valid,
            Split::Test => self.n_test,
        }
    }
}

/// `(s, η, ω_c)` for one trajectory of the given class.
pub fn sample_parameters(spec: &ScenarioSpec, class: OhmicityClass, rng: &mut impl Rng) -> Result<(f64, f64, f64)> {
    spec.validate()?;
    Ok(draw(spec, class, rng))
}

fn draw(spec: &ScenarioSpec, class: OhmicityClass, rng: &mut impl Rng) -> (f64, f64, f64) {
    let s = match class {
        OhmicityClass::SubOhmic => spec.s_sub.sample(rng),
        OhmicityClass::Ohmic => 1.0,
        OhmicityClass::SuperOhmic => spec.s_super.sample(rng),
    };
    let eta = spec.eta.sample(rng);
    let omega_c = spec.omega_c.sample(rng);
    (s, eta, omega_c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train = 0,
    Valid = 1,
    Test = 2,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryParams {
    pub s: f64,
    pub eta: f64,
    pub omega_c: f64,
    pub beta: InverseTemperature,
    pub omega0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTrajectory {
    pub label: OhmicityClass,
    pub params: TrajectoryParams,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub scenario: String,
    pub model: Model,
    pub seed: u64,
    /// Standard deviation of the measurement noise already added.
    pub sigma: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
    pub train: Vec<LabeledTrajectory>,
    pub valid: Vec<LabeledTrajectory>,
    pub test: Vec<LabeledTrajectory>,
}

impl Dataset {
    pub fn times(&self) -> Vec<f64> {
        uniform_grid(self.t_min, self.t_max, self.n_points)
    }

    pub fn split(&self, split: Split) -> &[LabeledTrajectory] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    fn split_mut(&mut self, split: Split) -> &mut Vec<LabeledTrajectory> {
        match split {
            Split::Train => &mut self.train,
            Split::Valid => &mut self.valid,
            Split::Test => &mut self.test,
        }
    }

    /// Per-class counts `[sub, ohmic, super]` of a split.
    pub fn class_counts(&self, split: Split) -> [usize; 3] {
        let mut c = [0; 3];
        for t in self.split(split) {
            c[t.label.index()] += 1;
        }
        c
    }
}

fn simulate(spec: &ScenarioSpec, p: (f64, f64, f64)) -> Result<Vec<f64>> {
    let sd = SpectralDensity::new(p.1, p.2, p.0)?;
    match spec.model {
        Model::Dephasing => {
            let cfg = DephasingConfig {
                sd,
                beta: spec.beta,
                rho0: plus_state(),
                t_min: spec.t_min,
                t_max: spec.t_max,
                n_points: spec.n_points,
            };
            let values = dephasing::sigma_x_trajectory(&cfg)?.values;
            if let Some(v) = values.iter().find(|v| !(v.abs() <= 1.0)) {
                return Err(Error::Unphysical(format!("<sigma_x> = {v} outside [-1, 1]")));
            }
            Ok(values)
        }
        Model::Damping => {
            let cfg = DampingConfig {
                sd,
                beta: spec.beta,
                omega0: spec.omega0,
                bloch0: [1.0, 0.0, 0.0],
                t_min: spec.t_min,
                t_max: spec.t_max,
                n_points: spec.n_points,
                fine_points: DEFAULT_FINE_POINTS,
            };
            let values = damping::sigma_x_trajectory_damping(&cfg)?.values;
            damping::check_bounds(&values)?;
            Ok(values)
        }
    }
}

/// Draws parameters for every trajectory and simulates them.
///
/// Trajectory `i` of a split has class `i mod 3` and its parameters come
/// from its own random stream, so the result is independent of scheduling.
/// Identical parameter triples are simulated once.
pub fn generate_dataset(spec: &ScenarioSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut draws: Vec<(Split, OhmicityClass, (f64, f64, f64))> = Vec::new();
    for split in Split::ALL {
        for i in 0..spec.split_size(split) {
            let class = OhmicityClass::ALL[i % 3];
            let mut r: StreamRng = rng::stream(spec.seed, Purpose::Parameters, split as u8, i as u64);
            draws.push((split, class, draw(spec, class, &mut r)));
        }
    }

    let mut unique: Vec<(f64, f64, f64)> = Vec::new();
    let mut slot: HashMap<[u64; 3], usize> = HashMap::new();
    let which: Vec<usize> = draws
        .iter()
        .map(|&(_, _, p)| {
            *slot
                .entry([p.0.to_bits(), p.1.to_bits(), p.2.to_bits()])
                .or_insert_with(|| {
                    unique.push(p);
                    unique.len() - 1
                })
        })
        .collect();

    let curves: Vec<Vec<f64>> = unique
        .par_iter()
        .map(|&p| {
            simulate(spec, p).map_err(|e| match e {
                Error::Unphysical(m) | Error::Quadrature(m) => Error::Unphysical(format!(
                    "s = {}, eta = {}, omega_c = {}: {m}",
                    p.0, p.1, p.2
                )),
                other => other,
            })
        })
        .collect::<Result<_>>()?;

    let mut ds = Dataset {
        scenario: spec.name.clone(),
        model: spec.model,
        seed: spec.seed,
        sigma: 0.0,
        t_min: spec.t_min,
        t_max: spec.t_max,
        n_points: spec.n_points,
        train: Vec::with_capacity(spec.n_train),
        valid: Vec::with_capacity(spec.n_valid),
        test: Vec::with_capacity(spec.n_test),
    };
    for (&(split, label, p), &u) in draws.iter().zip(&which) {
        ds.split_mut(split).push(LabeledTrajectory {
            label,
            params: TrajectoryParams {
                s: p.0,
                eta: p.1,
                omega_c: p.2,
                beta: spec.beta,
                omega0: (spec.model == Model::Damping).then_some(spec.omega0),
            },
            values: curves[u].clone(),
        });
    }
    Ok(ds)
}

/// Adds independent N(0, σ²) noise to every sample of every split.
pub fn inject_noise(dataset: &Dataset, sigma: f64, noise_seed: u64) -> Result<Dataset> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!("noise sigma must be >= 0, got {sigma}")));
    }
    let mut out = dataset.clone();
    if sigma == 0.0 {
        return Ok(out);
    }
    for split in Split::ALL {
        out.split_mut(split)
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, traj)| {
                let mut r = rng::stream(noise_seed, Purpose::Noise, split as u8, i as u64);
                for v in &mut traj.values {
                    let z: f64 = r.sample(StandardNormal);
                    *v += sigma * z;
                }
            });
    }
    out.sigma = dataset.sigma.hypot(sigma);
    Ok(out)
}

/// Feature matrix (one row per trajectory) with class indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSplit {
    pub x: Array2<f64>,
    pub labels: Vec<usize>,
}

impl FeatureSplit {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub train: FeatureSplit,
    pub valid: FeatureSplit,
    pub test: FeatureSplit,
}

impl FeatureSet {
    pub fn n_features(&self) -> usize {
        self.train.n_features()
    }
}

/// Builds a [`FeatureSet`] by mapping every trajectory through `f`.
pub fn featurize_with<F>(dataset: &Dataset, width: usize, f: F) -> Result<FeatureSet>
where
    F: Fn(&[f64]) -> Result<fourier::FeatureVector> + Sync,
{
    let one = |split: &[LabeledTrajectory]| -> Result<FeatureSplit> {
        let rows: Vec<fourier::FeatureVector> = split
            .par_iter()
            .map(|t| f(&t.values))
            .collect::<Result<_>>()?;
        let mut x = Array2::zeros((rows.len(), width));
        for (mut dst, src) in x.rows_mut().into_iter().zip(&rows) {
            if src.len() != width {
                return Err(Error::Shape(format!(
                    "feature vector of length {} where {width} was expected",
                    src.len()
                )));
            }
            dst.assign(&ndarray::ArrayView1::from(src.as_slice()));
        }
        Ok(FeatureSplit {
            x,
            labels: split.iter().map(|t| t.label.index()).collect(),
        })
    };
    Ok(FeatureSet {
        train: one(&dataset.train)?,
        valid: one(&dataset.valid)?,
        test: one(&dataset.test)?,
    })
}

/// DFT features of the full trajectories.
pub fn featurize(dataset: &Dataset) -> Result<FeatureSet> {
    featurize_with(dataset, 2 * dataset.n_points, fourier::dft_features)
}

fn fmt_beta(b: InverseTemperature) -> String {
    match b {
        InverseTemperature::Infinite => "inf".into(),
        InverseTemperature::Finite(v) => format!("{v:.16e}"),
    }
}

fn parse_beta(s: &str) -> Option<InverseTemperature> {
    if s == "inf" {
        return Some(InverseTemperature::Infinite);
    }
    let v: f64 = s.parse().ok()?;
    InverseTemperature::finite(v).ok()
}

pub const SPLIT_FILES: [&str; 3] = ["train.csv", "valid.csv", "test.csv"];
pub const META_FILE: &str = "dataset.meta";

/// Writes `train.csv`, `valid.csv`, `test.csv` and `dataset.meta` into `dir`.
pub fn save_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (split, file) in Split::ALL.into_iter().zip(SPLIT_FILES) {
        let path = dir.join(file);
        let f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(f);
        let write = |w: &mut BufWriter<fs::File>| -> std::io::Result<()> {
            write!(w, "label,s,eta,omega_c,beta,omega0")?;
            for n in 0..dataset.n_points {
                write!(w, ",x{n}")?;
            }
            writeln!(w)?;
            for t in dataset.split(split) {
                let p = &t.params;
                write!(
                    w,
                    "{},{:.16e},{:.16e},{:.16e},{},",
                    t.label.index(),
                    p.s,
                    p.eta,
                    p.omega_c,
                    fmt_beta(p.beta)
                )?;
                if let Some(o) = p.omega0 {
                    write!(w, "{o:.16e}")?;
                }
                for v in &t.values {
                    write!(w, ",{v:.16e}")?;
                }
                writeln!(w)?;
            }
            w.flush()
        };
        write(&mut w).map_err(|e| Error::io(&path, e))?;
    }
    let path = dir.join(META_FILE);
    let meta = format!(
        "format_version={FORMAT_VERSION}\nscenario={}\nmodel={}\nseed={}\nsigma={:.16e}\nt_min={:.16e}\nt_max={:.16e}\nn_points={}\nn_train={}\nn_valid={}\nn_test={}\n",
        dataset.scenario,
        dataset.model.name(),
        dataset.seed,
        dataset.sigma,
        dataset.t_min,
        dataset.t_max,
        dataset.n_points,
        dataset.train.len(),
        dataset.valid.len(),
        dataset.test.len(),
    );
    fs::write(&path, meta).map_err(|e| Error::io(&path, e))
}

/// Parses `key=value` lines, skipping blanks and `#` comments.
pub fn parse_key_values(text: &str, path: &Path) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, format!("line {}: expected key=value", i + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn meta_field<T: FromStr>(meta: &HashMap<String, String>, key: &str, path: &Path) -> Result<T> {
    let raw = meta
        .get(key)
        .ok_or_else(|| Error::parse(path, format!("missing field {key:?}")))?;
    raw.parse()
        .map_err(|_| Error::parse(path, format!("field {key:?} has invalid value {raw:?}")))
}

fn read_split(path: &Path, n_points: usize, expected: usize) -> Result<Vec<LabeledTrajectory>> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(f).lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(path, e))?
        .ok_or_else(|| Error::parse(path, "empty file"))?;
    if header.split(',').count() != 6 + n_points {
        return Err(Error::parse(path, format!(
            "header has {} columns, expected {}",
            header.split(',').count(),
            6 + n_points
        )));
    }
    let mut out = Vec::with_capacity(expected);
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let bad = |msg: String| Error::parse(path, format!("row {row}: {msg}"));
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 + n_points {
            return Err(bad(format!("{} columns, expected {}", cols.len(), 6 + n_points)));
        }
        let num = |k: usize| -> Result<f64> {
            cols[k]
                .parse::<f64>()
                .map_err(|_| bad(format!("column {} is not a number: {:?}", k + 1, cols[k])))
        };
        let label = cols[0]
            .parse::<usize>()
            .ok()
            .and_then(OhmicityClass::from_index)
            .ok_or_else(|| bad(format!("invalid label {:?}", cols[0])))?;
        let s = num(1)?;
        if OhmicityClass::from_s(s) != label {
            return Err(bad(format!("label {label} inconsistent with s = {s}")));
        }
        let beta = parse_beta(cols[4]).ok_or_else(|| bad(format!("invalid beta {:?}", cols[4])))?;
        let omega0 = if cols[5].is_empty() { None } else { Some(num(5)?) };
        let values = (6..cols.len()).map(num).collect::<Result<Vec<f64>>>()?;
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(bad(format!("value x{k} is not finite")));
        }
        out.push(LabeledTrajectory {
            label,
            params: TrajectoryParams {
                s,
                eta: num(2)?,
                omega_c: num(3)?,
                beta,
                omega0,
            },
            values,
        });
    }
    if out.len() != expected {
        return Err(Error::parse(path, format!(
            "{} rows, metadata promises {expected}",
            out.len()
        )));
    }
    Ok(out)
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let meta_path = dir.join(META_FILE);
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta = parse_key_values(&text, &meta_path)?;
    let version = meta.get("format_version").cloned().unwrap_or_default();
    if version != FORMAT_VERSION.to_string() {
        return Err(Error::FormatVersion {
            path: meta_path,
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let n_points: usize = meta_field(&meta, "n_points", &meta_path)?;
    let model: String = meta_field(&meta, "model", &meta_path)?;
    let model = model
        .parse::<Model>()
        .map_err(|e| Error::parse(&meta_path, e.to_string()))?;
    let mut splits = Vec::with_capacity(3);
    for (file, key) in SPLIT_FILES.iter().zip(["n_train", "n_valid", "n_test"]) {
        let expected: usize = meta_field(&meta, key, &meta_path)?;
        splits.push(read_split(&dir.join(file), n_points, expected)?);
    }
    let test = splits.pop().unwrap_or_default();
    let valid = splits.pop().unwrap_or_default();
    let train = splits.pop().unwrap_or_default();
    Ok(Dataset {
        scenario: meta_field(&meta, "scenario", &meta_path)?,
        model,
        seed: meta_field(&meta, "seed", &meta_path)?,
        sigma: meta_field(&meta, "sigma", &meta_path)?,
        t_min: meta_field(&meta, "t_min", &meta_path)?,
        t_max: meta_field(&meta, "t_max", &meta_path)?,
        n_points,
        train,
        valid,
        test,
    })
}
