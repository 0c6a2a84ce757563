use sdclass::dataset::{self, generate_dataset, inject_noise, preset, Dataset, Split};
use sdclass::experiment::{self, fit, ExperimentConfig};
use sdclass::nn;
use sdclass::selection::{rank_dataset, reduced_dataset};

fn small(name: &str, seed: u64) -> Dataset {
    let mut spec = preset(name).unwrap();
    spec.seed = seed;
    (spec.n_train, spec.n_valid, spec.n_test) = (30, 12, 12);
    generate_dataset(&spec).unwrap()
}

#[test]
fn generation_is_deterministic_and_seed_sensitive() {
    let a = small("pd-adjacent", 5);
    assert_eq!(a, small("pd-adjacent", 5));
    assert_ne!(a.train[0].values, small("pd-adjacent", 6).train[0].values);
    assert_eq!(a.class_counts(Split::Train), [10, 10, 10]);
    for t in a.train.iter().chain(&a.valid).chain(&a.test) {
        assert_eq!(t.values.len(), 400);
        assert_eq!(t.values[0], 1.0);
        assert!(t.values.iter().all(|v| (-1.0..=1.0).contains(v)));
    }
}

#[test]
fn noise_changes_values_but_not_labels() {
    let clean = small("pd-separated", 1);
    let noisy = inject_noise(&clean, 0.1, 9).unwrap();
    assert_eq!(noisy, inject_noise(&clean, 0.1, 9).unwrap());
    assert_eq!(inject_noise(&clean, 0.0, 9).unwrap().train, clean.train);
    for (c, n) in clean.train.iter().zip(&noisy.train) {
        assert_eq!((c.label, c.params), (n.label, n.params));
        assert_ne!(c.values, n.values);
    }
    let spread: f64 = clean
        .train
        .iter()
        .zip(&noisy.train)
        .flat_map(|(c, n)| c.values.iter().zip(&n.values).map(|(a, b)| (a - b).powi(2)))
        .sum::<f64>()
        / (30.0 * 400.0);
    assert!((spread.sqrt() - 0.1).abs() < 0.01, "{}", spread.sqrt());
}

#[test]
fn full_selection_reproduces_dft_features() {
    let data = small("pd-adjacent", 2);
    let full = dataset::featurize(&data).unwrap();
    let all: Vec<usize> = (0..400).collect();
    let reduced = reduced_dataset(&data, &all).unwrap();
    assert_eq!(full.n_features(), 800);
    let diff = (&full.train.x - &reduced.train.x).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(diff < 1e-12, "{diff}");

    let (ranking, relevance) = rank_dataset(&data).unwrap();
    assert_eq!(ranking.len(), 400);
    assert_eq!(relevance.len(), 400);
    let kept = ranking.retained(20).unwrap();
    assert_eq!(reduced_dataset(&data, &kept).unwrap().n_features(), 40);
}

#[test]
fn training_lowers_the_loss() {
    let features = dataset::featurize(&small("pd-separated", 3)).unwrap();
    let (_, report, _) = fit(&features, 40, 1e-3, 3, 10).unwrap();
    assert_eq!(report.rows.len(), 41);
    assert!(report.last().loss < report.rows[0].loss);
    let again = fit(&features, 40, 1e-3, 3, 10).unwrap().1;
    assert_eq!(report, again);
}

#[test]
fn train_then_evaluate_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let data_dir = dir.path().join("data");
    let cfg = ExperimentConfig {
        preset: "pd-separated".into(),
        seed: 4,
        iterations: Some(15),
        n_train: Some(12),
        n_valid: Some(6),
        n_test: Some(6),
        out: data_dir.clone(),
        ..Default::default()
    };
    let generated = experiment::cmd_generate(&cfg).unwrap();
    assert_eq!(dataset::load_dataset(&data_dir).unwrap(), generated);

    let run = ExperimentConfig {
        data: Some(data_dir),
        out: dir.path().join("run"),
        ..cfg
    };
    let outcome = experiment::cmd_train(&run).unwrap();
    assert_eq!(outcome.iterations, 15);
    let evaluated = experiment::cmd_evaluate(&run).unwrap();
    assert_eq!(evaluated, outcome.acc);
    let model = nn::load_model(&run.out.join("model.txt")).unwrap();
    assert_eq!(model, outcome.model);
}
