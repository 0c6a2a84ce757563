//! Experiment runners and their file-producing command wrappers.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dataset::{self, generate_dataset, inject_noise, preset, Dataset, FeatureSet, ScenarioSpec};
use crate::error::{Error, Result};
use crate::nn::{self, Mlp, TrainReport, DEFAULT_LR};
use crate::rng::derive_seed;
use crate::selection::{self, rank_dataset, reduced_dataset, select_uniform};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const INIT_TAG: u64 = 1;
const NOISE_TAG: u64 = 2;

/// Seed of the model initialisation for an experiment seed.
pub fn init_seed(seed: u64) -> u64 {
    derive_seed(seed, INIT_TAG)
}

/// Seed of the noise stream used at level `sigma`.
pub fn noise_seed(seed: u64, sigma: f64) -> u64 {
    derive_seed(derive_seed(seed, NOISE_TAG), sigma.to_bits())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Generate,
    Train,
    Evaluate,
    SweepNoise,
    SweepInterval,
    FeatselCurve,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Generate => "generate",
            Command::Train => "train",
            Command::Evaluate => "evaluate",
            Command::SweepNoise => "sweep-noise",
            Command::SweepInterval => "sweep-interval",
            Command::FeatselCurve => "featsel-curve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Correlation,
    Uniform,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Correlation => "correlation",
            Method::Uniform => "uniform",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "correlation" => Ok(Method::Correlation),
            "uniform" => Ok(Method::Uniform),
            other => Err(Error::Config(format!(
                "unknown selection method {other:?} (expected correlation or uniform)"
            ))),
        }
    }
}

/// Iteration counts used in the original experiments.
pub fn default_iterations(command: Command, preset_name: &str) -> usize {
    let varying_k = preset_name
        .strip_prefix("pd-varying-")
        .and_then(|k| k.parse::<u32>().ok());
    match (command, preset_name) {
        (Command::SweepInterval, _) => 20_000,
        (_, "ad-default") => 10_000,
        (Command::SweepNoise, "pd-separated" | "pd-adjacent") => 1_000,
        (Command::SweepNoise, _) if varying_k == Some(0) => 10_000,
        (_, "pd-separated") => 80,
        (_, "pd-adjacent") => 5_000,
        _ => 20_000,
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Noise levels swept for each scenario.
pub fn default_sigmas(preset_name: &str) -> Vec<f64> {
    match preset_name {
        "pd-separated" => linspace(0.1, 1.0, 6),
        "pd-adjacent" => linspace(0.01, 0.19, 6),
        "pd-varying-0" => linspace(0.01, 0.1, 6),
        _ => linspace(0.001, 0.01, 6),
    }
}

pub const DEFAULT_POINTS: [usize; 7] = [5, 10, 20, 40, 100, 250, 400];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: String,
    pub seed: u64,
    /// `None` picks [`default_iterations`].
    pub iterations: Option<usize>,
    pub budget: f64,
    pub lr: f64,
    pub sigmas: Option<Vec<f64>>,
    pub points: Vec<usize>,
    pub methods: Vec<Method>,
    pub ks: Vec<u32>,
    pub out: PathBuf,
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub report_every: usize,
    pub n_train: Option<usize>,
    pub n_valid: Option<usize>,
    pub n_test: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            preset: "pd-separated".into(),
            seed: 0,
            iterations: None,
            budget: 1.0,
            lr: DEFAULT_LR,
            sigmas: None,
            points: DEFAULT_POINTS.to_vec(),
            methods: vec![Method::Correlation, Method::Uniform],
            ks: (0..10).collect(),
            out: PathBuf::from("out"),
            data: None,
            model: None,
            report_every: 10,
            n_train: None,
            n_valid: None,
            n_test: None,
        }
    }
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Config(format!("{key}: cannot parse {s:?}")))
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {raw:?}")))
}

pub const CONFIG_KEYS: [&str; 16] = [
    "preset",
    "seed",
    "iters",
    "budget",
    "lr",
    "sigma",
    "points",
    "method",
    "ks",
    "out",
    "data",
    "model",
    "report_every",
    "n_train",
    "n_valid",
    "n_test",
];

impl ExperimentConfig {
    /// Preset defaults, then `file` entries, then `flags`; later wins.
    pub fn resolve(file: Option<&HashMap<String, String>>, flags: &HashMap<String, String>) -> Result<Self> {
        let mut cfg = Self::default();
        for layer in file.into_iter().chain(std::iter::once(flags)) {
            let mut keys: Vec<&String> = layer.keys().collect();
            keys.sort();
            for key in keys {
                cfg.set(key, &layer[key])?;
            }
        }
        preset(&cfg.preset)?;
        if !(cfg.budget > 0.0 && cfg.budget.is_finite()) {
            return Err(Error::Config(format!("budget must be positive, got {}", cfg.budget)));
        }
        if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", cfg.lr)));
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<HashMap<String, String>> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        dataset::parse_key_values(&text, path)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        match key.as_str() {
            "preset" => self.preset = value.trim().to_string(),
            "seed" => self.seed = parse_one(&key, value)?,
            "iters" => self.iterations = Some(parse_one(&key, value)?),
            "budget" => self.budget = parse_one(&key, value)?,
            "lr" => self.lr = parse_one(&key, value)?,
            "sigma" => self.sigmas = Some(parse_list(&key, value)?),
            "points" => self.points = parse_list(&key, value)?,
            "method" => self.methods = parse_list(&key, value)?,
            "ks" => self.ks = parse_list(&key, value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            "data" => self.data = Some(PathBuf::from(value.trim())),
            "model" => self.model = Some(PathBuf::from(value.trim())),
            "report_every" => self.report_every = parse_one(&key, value)?,
            "n_train" => self.n_train = Some(parse_one(&key, value)?),
            "n_valid" => self.n_valid = Some(parse_one(&key, value)?),
            "n_test" => self.n_test = Some(parse_one(&key, value)?),
            other => {
                return Err(Error::Config(format!(
                    "unknown config key {other:?}; known keys: {}",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Iterations after applying the budget factor (at least 1 unless 0
    /// was requested explicitly).
    pub fn iterations_for(&self, command: Command, preset_name: &str) -> usize {
        let base = self
            .iterations
            .unwrap_or_else(|| default_iterations(command, preset_name));
        scale_iterations(base, self.budget)
    }

    pub fn scenario(&self, name: &str) -> Result<ScenarioSpec> {
        let mut spec = preset(name)?;
        spec.seed = self.seed;
        if let Some(n) = self.n_train {
            spec.n_train = n;
        }
        if let Some(n) = self.n_valid {
            spec.n_valid = n;
        }
        if let Some(n) = self.n_test {
            spec.n_test = n;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn sigmas_for(&self, preset_name: &str) -> Vec<f64> {
        self.sigmas.clone().unwrap_or_else(|| default_sigmas(preset_name))
    }

    /// `# key=value` lines describing this run.
    pub fn header(&self, command: Command, extra: &[(&str, String)]) -> String {
        let mut s = format!("# sdclass {VERSION} {}\n", command.name());
        let mut kv: Vec<(&str, String)> = vec![
            ("preset", self.preset.clone()),
            ("seed", self.seed.to_string()),
            ("budget", self.budget.to_string()),
            ("lr", self.lr.to_string()),
        ];
        kv.extend(extra.iter().cloned());
        for (k, v) in kv {
            let _ = writeln!(s, "# {k}={v}");
        }
        s
    }
}

pub fn scale_iterations(base: usize, budget: f64) -> usize {
    if base == 0 {
        return 0;
    }
    ((base as f64 * budget).round() as usize).max(1)
}

/// Writes through a temporary sibling so a failed run leaves no partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("partial");
    if let Err(e) = fs::write(&tmp, contents) {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracies {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

fn accuracies(model: &Mlp, data: &FeatureSet) -> Result<Accuracies> {
    Ok(Accuracies {
        train: nn::accuracy(model, &data.train)?,
        valid: nn::accuracy(model, &data.valid)?,
        test: nn::accuracy(model, &data.test)?,
    })
}

/// Trains a fresh `[d, 250, 80, 3]` network on `features`.
pub fn fit(features: &FeatureSet, iterations: usize, lr: f64, seed: u64, report_every: usize) -> Result<(Mlp, TrainReport, Accuracies)> {
    let mut model = nn::init_model(&nn::default_dims(features.n_features()), init_seed(seed))?;
    let report = nn::train(&mut model, features, iterations, report_every, lr)?;
    let acc = Accuracies {
        train: report.last().train_acc,
        valid: nn::accuracy(&model, &features.valid)?,
        test: report.test_acc,
    };
    Ok((model, report, acc))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseRow {
    pub sigma: f64,
    pub acc: Accuracies,
}

/// One fresh model per noise level, σ ascending.
pub fn noise_sweep(
    clean: &Dataset,
    sigmas: &[f64],
    iterations: usize,
    lr: f64,
    progress: &mut dyn FnMut(&NoiseRow),
) -> Result<Vec<NoiseRow>> {
    let mut sorted = sigmas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut rows = Vec::with_capacity(sorted.len());
    for sigma in sorted {
        let noisy = inject_noise(clean, sigma, noise_seed(clean.seed, sigma))?;
        let features = dataset::featurize(&noisy)?;
        let (_, _, acc) = fit(&features, iterations, lr, clean.seed, iterations.max(1))?;
        let row = NoiseRow { sigma, acc };
        progress(&row);
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalRow {
    pub k: u32,
    pub interval_length: f64,
    pub acc: Accuracies,
}

/// Trains on `pd-varying-k` for every `k`.
pub fn interval_sweep(
    cfg: &ExperimentConfig,
    iterations: usize,
    progress: &mut dyn FnMut(&IntervalRow),
) -> Result<Vec<IntervalRow>> {
    let mut rows = Vec::new();
    for &k in &cfg.ks {
        let spec = cfg.scenario(&format!("pd-varying-{k}"))?;
        let data = generate_dataset(&spec)?;
        let data = match cfg.sigmas.as_deref() {
            Some([s]) if *s > 0.0 => inject_noise(&data, *s, noise_seed(cfg.seed, *s))?,
            _ => data,
        };
        let features = dataset::featurize(&data)?;
        let (_, _, acc) = fit(&features, iterations, cfg.lr, cfg.seed, iterations.max(1))?;
        let row = IntervalRow {
            k,
            interval_length: spec.eta.hi - spec.eta.lo,
            acc,
        };
        progress(&row);
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub k_points: usize,
    pub method: Method,
    pub acc: Accuracies,
}

pub fn selected_indices(method: Method, ranking: &selection::FeatureRanking, n: usize, k: usize) -> Result<Vec<usize>> {
    match method {
        Method::Correlation => ranking.retained(k),
        Method::Uniform => select_uniform(n, k),
    }
}

/// Retrains on NUDFT features of `k` selected time points, for every
/// method and `k`.
pub fn feature_curve(
    data: &Dataset,
    points: &[usize],
    methods: &[Method],
    iterations: usize,
    lr: f64,
    progress: &mut dyn FnMut(&CurveRow),
) -> Result<(Vec<CurveRow>, selection::FeatureRanking, Vec<f64>)> {
    let (ranking, relevance) = rank_dataset(data)?;
    let mut rows = Vec::new();
    // k = N selects every point under both methods
    let mut seen: HashMap<Vec<usize>, Accuracies> = HashMap::new();
    for &method in methods {
        for &k in points {
            let idx = selected_indices(method, &ranking, data.n_points, k)?;
            let acc = match seen.get(&idx) {
                Some(&acc) => acc,
                None => {
                    let features = reduced_dataset(data, &idx)?;
                    let (_, _, acc) = fit(&features, iterations, lr, data.seed, iterations.max(1))?;
                    seen.insert(idx, acc);
                    acc
                }
            };
            let row = CurveRow { k_points: k, method, acc };
            progress(&row);
            rows.push(row);
        }
    }
    Ok((rows, ranking, relevance))
}

fn load_or_generate(cfg: &ExperimentConfig) -> Result<Dataset> {
    match &cfg.data {
        Some(dir) => dataset::load_dataset(dir),
        None => generate_dataset(&cfg.scenario(&cfg.preset)?),
    }
}

fn single_sigma(cfg: &ExperimentConfig) -> Result<f64> {
    match cfg.sigmas.as_deref() {
        None => Ok(0.0),
        Some([s]) => Ok(*s),
        Some(list) => Err(Error::Config(format!(
            "this command takes one noise level, got {}",
            list.len()
        ))),
    }
}

/// Writes the dataset for `cfg.preset` (plus optional noise) to `cfg.out`.
pub fn cmd_generate(cfg: &ExperimentConfig) -> Result<Dataset> {
    let spec = cfg.scenario(&cfg.preset)?;
    let mut data = generate_dataset(&spec)?;
    let sigma = single_sigma(cfg)?;
    if sigma > 0.0 {
        data = inject_noise(&data, sigma, noise_seed(cfg.seed, sigma))?;
    }
    dataset::save_dataset(&data, &cfg.out)?;
    Ok(data)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Mlp,
    pub report: TrainReport,
    pub acc: Accuracies,
    pub iterations: usize,
}

/// Trains on `cfg.data` (or a freshly generated preset) and writes
/// `model.txt` and `train_log.csv` to `cfg.out`.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<TrainOutcome> {
    let mut data = load_or_generate(cfg)?;
    let sigma = single_sigma(cfg)?;
    if sigma > 0.0 {
        data = inject_noise(&data, sigma, noise_seed(data.seed, sigma))?;
    }
    let iterations = cfg.iterations_for(Command::Train, &data.scenario);
    let features = dataset::featurize(&data)?;
    let mut model = nn::init_model(&nn::default_dims(features.n_features()), init_seed(data.seed))?;
    let report = nn::train(&mut model, &features, iterations, cfg.report_every, cfg.lr)?;
    let acc = Accuracies {
        train: report.last().train_acc,
        valid: nn::accuracy(&model, &features.valid)?,
        test: report.test_acc,
    };
    ensure_dir(&cfg.out)?;
    nn::save_model(&model, &cfg.out.join("model.txt"))?;
    let header = cfg.header(
        Command::Train,
        &[
            ("scenario", data.scenario.clone()),
            ("iterations", iterations.to_string()),
            ("sigma", data.sigma.to_string()),
        ],
    );
    write_atomic(&cfg.out.join("train_log.csv"), &(header + &report.to_csv()))?;
    Ok(TrainOutcome {
        model,
        report,
        acc,
        iterations,
    })
}

/// Accuracy of `cfg.model` on every split of `cfg.data`.
pub fn cmd_evaluate(cfg: &ExperimentConfig) -> Result<Accuracies> {
    let model_path = cfg.model.clone().unwrap_or_else(|| cfg.out.join("model.txt"));
    let model = nn::load_model(&model_path)?;
    let data = load_or_generate(cfg)?;
    let features = dataset::featurize(&data)?;
    if features.n_features() != model.n_inputs() {
        return Err(Error::Shape(format!(
            "dataset gives {} features but the model expects {}",
            features.n_features(),
            model.n_inputs()
        )));
    }
    let acc = accuracies(&model, &features)?;
    ensure_dir(&cfg.out)?;
    let header = cfg.header(
        Command::Evaluate,
        &[
            ("scenario", data.scenario.clone()),
            ("model", model_path.display().to_string()),
        ],
    );
    let body = format!(
        "split,accuracy\ntrain,{}\nvalid,{}\ntest,{}\n",
        acc.train, acc.valid, acc.test
    );
    write_atomic(&cfg.out.join("evaluate.csv"), &(header + &body))?;
    Ok(acc)
}

pub fn cmd_sweep_noise(cfg: &ExperimentConfig, progress: &mut dyn FnMut(&NoiseRow)) -> Result<Vec<NoiseRow>> {
    let clean = load_or_generate(cfg)?;
    if clean.sigma != 0.0 {
        return Err(Error::Config("noise sweeps start from a clean dataset".into()));
    }
    let iterations = cfg.iterations_for(Command::SweepNoise, &clean.scenario);
    let sigmas = cfg.sigmas_for(&clean.scenario);
    let rows = noise_sweep(&clean, &sigmas, iterations, cfg.lr, progress)?;
    ensure_dir(&cfg.out)?;
    let mut body = cfg.header(
        Command::SweepNoise,
        &[
            ("scenario", clean.scenario.clone()),
            ("iterations", iterations.to_string()),
        ],
    );
    body.push_str("sigma,train_acc,valid_acc,test_acc\n");
    for r in &rows {
        let _ = writeln!(body, "{},{},{},{}", r.sigma, r.acc.train, r.acc.valid, r.acc.test);
    }
    write_atomic(&cfg.out.join("sweep_noise.csv"), &body)?;
    Ok(rows)
}

pub fn cmd_sweep_interval(cfg: &ExperimentConfig, progress: &mut dyn FnMut(&IntervalRow)) -> Result<Vec<IntervalRow>> {
    let iterations = cfg.iterations_for(Command::SweepInterval, "pd-varying-0");
    let rows = interval_sweep(cfg, iterations, progress)?;
    ensure_dir(&cfg.out)?;
    let mut body = cfg.header(Command::SweepInterval, &[("iterations", iterations.to_string())]);
    body.push_str("k,interval_length,train_acc,valid_acc,test_acc\n");
    for r in &rows {
        let _ = writeln!(
            body,
            "{},{},{},{},{}",
            r.k,
            r.interval_length,
            r.acc.train,
            r.acc.valid,
            r.acc.test
        );
    }
    write_atomic(&cfg.out.join("sweep_interval.csv"), &body)?;
    Ok(rows)
}

pub fn cmd_featsel_curve(cfg: &ExperimentConfig, progress: &mut dyn FnMut(&CurveRow)) -> Result<Vec<CurveRow>> {
    let data = load_or_generate(cfg)?;
    let iterations = cfg.iterations_for(Command::FeatselCurve, &data.scenario);
    let (rows, ranking, relevance) = feature_curve(&data, &cfg.points, &cfg.methods, iterations, cfg.lr, progress)?;
    ensure_dir(&cfg.out)?;
    let mut body = cfg.header(
        Command::FeatselCurve,
        &[
            ("scenario", data.scenario.clone()),
            ("iterations", iterations.to_string()),
        ],
    );
    body.push_str("k_points,method,train_acc,valid_acc,test_acc\n");
    for r in &rows {
        let _ = writeln!(
            body,
            "{},{},{},{},{}",
            r.k_points,
            r.method.name(),
            r.acc.train,
            r.acc.valid,
            r.acc.test
        );
    }
    write_atomic(&cfg.out.join("featsel_curve.csv"), &body)?;
    write_atomic(
        &cfg.out.join("ranking.csv"),
        &selection::ranking_csv(&ranking, &relevance, &data.times()),
    )?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(pairs: &[(&str, &str)]) -> HashMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn precedence_flags_over_file_over_defaults() {
        let file = flags(&[("seed", "5"), ("lr", "0.01"), ("preset", "pd-adjacent")]);
        let cli = flags(&[("seed", "9")]);
        let cfg = ExperimentConfig::resolve(Some(&file), &cli).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.lr, 0.01);
        assert_eq!(cfg.preset, "pd-adjacent");
        assert_eq!(cfg.report_every, 10);
        assert!(ExperimentConfig::resolve(None, &flags(&[("preset", "nope")])).is_err());
        assert!(ExperimentConfig::resolve(None, &flags(&[("bogus", "1")])).is_err());
        assert!(ExperimentConfig::resolve(None, &flags(&[("budget", "0")])).is_err());
    }

    #[test]
    fn iteration_defaults_and_budget() {
        assert_eq!(default_iterations(Command::Train, "pd-separated"), 80);
        assert_eq!(default_iterations(Command::Train, "pd-adjacent"), 5000);
        assert_eq!(default_iterations(Command::SweepNoise, "pd-adjacent"), 1000);
        assert_eq!(default_iterations(Command::SweepNoise, "ad-default"), 10_000);
        assert_eq!(default_iterations(Command::SweepInterval, "pd-varying-3"), 20_000);
        let mut cfg = ExperimentConfig {
            budget: 0.5,
            ..Default::default()
        };
        assert_eq!(cfg.iterations_for(Command::Train, "pd-adjacent"), 2500);
        cfg.iterations = Some(0);
        assert_eq!(cfg.iterations_for(Command::Train, "pd-adjacent"), 0);
        assert_eq!(scale_iterations(3, 0.01), 1);
    }

    #[test]
    fn default_sigma_lists() {
        let s = default_sigmas("pd-separated");
        assert_eq!(s.len(), 6);
        assert_eq!((s[0], s[5]), (0.1, 1.0));
        let a = default_sigmas("pd-adjacent");
        assert_eq!((a[0], a[5]), (0.01, 0.19));
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(default_sigmas("ad-default")[5], 0.01);
    }

    #[test]
    fn noise_seeds_differ_by_level() {
        assert_ne!(noise_seed(1, 0.1), noise_seed(1, 0.2));
        assert_ne!(noise_seed(1, 0.1), noise_seed(2, 0.1));
        assert_ne!(init_seed(1), noise_seed(1, 0.0));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_atomic(&p, "x").unwrap();
        write_atomic(&p, "y").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "y");
        assert!(!dir.path().join("a.partial").exists());
        assert!(write_atomic(&dir.path().join("missing/a.csv"), "x").is_err());
    }
}
