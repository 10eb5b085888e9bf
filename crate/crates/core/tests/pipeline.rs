use std::fs;

use fairstream_core::classifiers::{ClassifierConfig, ClassifierKind, Learner};
use fairstream_core::dataset::{load_dataset, DatasetDescriptor};
use fairstream_core::engine::{run_chunks, ExperimentConfig, Source};
use fairstream_core::fairness::{Corrector, DetectorConfig, Technique};
use fairstream_core::generator::{generate_stream, GeneratorConfig, ScheduleOptions};
use fairstream_core::report::write_trace;
use fairstream_core::schema::{Label, Value};
use fairstream_core::strategy::{StrategyKind, StrategyState};
use fairstream_core::stream::into_chunks;

fn stationary(chunks: usize, spp: f64, seed: u64) -> GeneratorConfig {
    GeneratorConfig::stationary(250, chunks, spp, seed)
}

fn accuracy(pred: &[Label], truth: &[Label]) -> f64 {
    pred.iter().zip(truth).filter(|(p, t)| p == t).count() as f64 / truth.len() as f64
}

#[test]
fn learners_are_accurate_on_a_fair_stationary_stream() {
    let (schema, chunks, _) = generate_stream(stationary(51, 0.0, 3)).unwrap();
    for kind in ClassifierKind::ALL {
        let mut model = ClassifierConfig::new(kind).build(schema.attributes());
        let mut scores = Vec::new();
        for (t, chunk) in chunks.iter().enumerate() {
            if t >= 2 {
                let pred: Vec<Label> = model.predict_chunk(chunk).iter().map(|p| p.label).collect();
                scores.push(accuracy(&pred, &chunk.labels()));
            }
            model.train_chunk(chunk);
        }
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        assert_eq!(scores.len(), 49);
        assert!(mean > 0.80, "{kind}: prequential accuracy {mean:.4}");
    }
}

#[test]
fn reset_baseline_matches_plain_learning_without_triggers() {
    let (schema, chunks, _) = generate_stream(stationary(20, 0.0, 4)).unwrap();
    let classifier = ClassifierConfig::new(ClassifierKind::Nb);
    // A threshold no parity can exceed keeps the detector silent.
    let detector = DetectorConfig::new(1.0).unwrap();
    let corrector = Corrector::new(Technique::Massaging);
    let mut state = StrategyState::initialize(
        StrategyKind::Reset,
        &classifier,
        schema.clone(),
        detector,
        corrector,
        &chunks[0],
    )
    .unwrap();
    let mut plain = classifier.build(schema.attributes());
    plain.train_chunk(&chunks[0]);
    for chunk in &chunks[1..] {
        let out = state.step(chunk).unwrap();
        assert!(!out.metrics.triggered && !out.metrics.reset);
        assert_eq!(out.predictions, plain.predict_chunk(chunk));
        plain.train_chunk(chunk);
        assert_eq!(state.learner(), &plain);
    }
}

#[test]
fn predictions_use_only_earlier_chunks() {
    let (schema, chunks, _) = generate_stream(stationary(8, 0.2, 5)).unwrap();
    for kind in ClassifierKind::ALL {
        let classifier = ClassifierConfig::new(kind);
        let detector = DetectorConfig::new(0.0).unwrap();
        let corrector = Corrector::new(Technique::Massaging);
        let mut state = StrategyState::initialize(
            StrategyKind::M1,
            &classifier,
            schema.clone(),
            detector,
            corrector,
            &chunks[0],
        )
        .unwrap();
        for chunk in &chunks[1..] {
            let snapshot = state.learner().clone();
            let out = state.step(chunk).unwrap();
            assert_eq!(
                out.predictions,
                snapshot.predict_chunk(chunk),
                "{kind} chunk {}",
                chunk.index
            );
            assert_ne!(
                state.learner(),
                &snapshot,
                "{kind} chunk {} did not update",
                chunk.index
            );
        }
    }
}

#[test]
fn identical_config_gives_identical_trace_bytes() {
    let options = ScheduleOptions {
        chunks: 30,
        drifts: 2,
        drift_margin: [6, 6],
        ..ScheduleOptions::default()
    };
    let cfg = GeneratorConfig::randomized(&options, 11).unwrap();
    let (schema, chunks, _) = generate_stream(cfg.clone()).unwrap();
    let exp = ExperimentConfig::new(
        Source::Generator(cfg),
        ClassifierKind::Ht,
        StrategyKind::M2,
        Technique::Reweighting,
    );
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = run_chunks(&exp, &schema, &chunks).unwrap();
        assert_eq!(out.trace.len(), chunks.len() - 1);
        let path = dir.path().join(name);
        write_trace(&path, &out.trace).unwrap();
        bytes.push(fs::read(path).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn config_round_trip_reproduces_the_run() {
    let source = Source::Generator(stationary(6, 0.1, 12));
    let mut cfg = ExperimentConfig::new(source, ClassifierKind::Knn, StrategyKind::M3, Technique::Massaging);
    cfg.seed = 12;
    let text = serde_json::to_string(&cfg).unwrap();
    let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
    let a = fairstream_core::engine::run(&cfg).unwrap();
    let b = fairstream_core::engine::run(&back).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.trace.len(), 5);
}

#[test]
fn chunks_preserve_file_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.csv");
    let mut text = String::from("id,g,y\n");
    for i in 0..23 {
        text.push_str(&format!("{i},{},{}\n", ["f", "m"][i % 2], ["no", "yes"][i % 3 % 2]));
    }
    fs::write(&path, text).unwrap();
    let ds = load_dataset(&DatasetDescriptor::csv(&path, "g", "f", "y", "yes")).unwrap();
    let chunks = into_chunks(ds.instances.clone(), 5).unwrap();
    assert_eq!(chunks.len(), 5);
    assert_eq!(chunks.last().unwrap().len(), 3);
    let ids: Vec<f64> = chunks
        .iter()
        .flat_map(|c| &c.instances)
        .map(|inst| match inst.features[0] {
            Value::Numeric(x) => x,
            ref other => panic!("unexpected {other:?}"),
        })
        .collect();
    assert_eq!(ids, (0..23).map(f64::from).collect::<Vec<_>>());
}
