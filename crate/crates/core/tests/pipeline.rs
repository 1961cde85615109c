//! Manifest → features → model → metrics, through files on disk.

use std::f64::consts::PI;
use std::fmt::Write as _;

use emogap_core::audio_features::{extract_from_file, FeatureParams, HandcraftedKind};
use emogap_core::datasets::{combine, make_record_splits};
use emogap_core::embedding_io::{join_with_labels, read_emb1, write_emb1};
use emogap_core::eval::{evaluate, fit, LabeledSet};
use emogap_core::gap_analysis::{divergence_matrix, DivergenceInput, DivergenceParams};
use emogap_core::regressor::{load_checkpoint, predict, save_checkpoint};
use emogap_core::{Dataset, DatasetId, EmbeddingTable, FeatureMatrix, Split, TrainConfig, VectorKind};
use ndarray::Array2;

fn write_manifest(dir: &std::path::Path, id: DatasetId, n: usize, lo: f64, hi: f64) -> Dataset {
    let mut csv = String::from("clip_id,audio_path,duration_s,valence,arousal,genre\n");
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let v = lo + (hi - lo) * t;
        let a = hi - (hi - lo) * t * t;
        let _ = writeln!(csv, "c{i},c{i}.wav,30,{v},{a},{}", if i % 2 == 0 { "pop" } else { "" });
    }
    let manifest = dir.join(format!("{id}.csv"));
    let scale = dir.join(format!("{id}.json"));
    std::fs::write(&manifest, csv).unwrap();
    std::fs::write(
        &scale,
        format!(r#"{{"dataset_id":"{id}","v_min":{lo},"v_max":{hi},"a_min":{lo},"a_max":{hi}}}"#),
    )
    .unwrap();
    Dataset::load(&manifest, &scale).unwrap()
}

/// Features that carry the label plus a fixed nuisance pattern.
fn embeddings(ds: &Dataset, dim: usize, offset: f32) -> EmbeddingTable {
    let mut table = EmbeddingTable::new("synthetic", 3, dim);
    for (i, clip) in ds.normalized().iter().enumerate() {
        let row = (0..dim)
            .map(|j| match j {
                0 => clip.label.valence as f32,
                1 => clip.label.arousal as f32,
                _ => ((i * 31 + j * 17) % 13) as f32 / 13.0 + offset,
            })
            .collect();
        table.push(clip.clip_id.clone(), row).unwrap();
    }
    table
}

#[test]
fn manifest_to_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let ds = write_manifest(dir.path(), DatasetId::D, 120, 1.0, 9.0);
    let clips = ds.normalized();
    assert!(clips.iter().all(|c| (-1.0..=1.0).contains(&c.label.valence)));

    let path = dir.path().join("d.emb1");
    let mut table = embeddings(&ds, 6, 0.0);
    // one clip without a label, which the join must report and skip
    table.push("stray", vec![0.0; 6]).unwrap();
    write_emb1(&table, &path).unwrap();
    let table = read_emb1(&path).unwrap();
    let (features, labels, report) = join_with_labels(&table, &clips).unwrap();
    assert_eq!(report.matched, 120);
    assert_eq!(report.only_in_table, ["stray"]);
    assert_eq!(labels.len(), 120);

    let set = LabeledSet::from_clips(&features, &clips).unwrap();
    let splits = make_record_splits(&ds.records, 3).unwrap();
    let config = TrainConfig {
        hidden_units: [32, 16],
        learning_rate: 3e-3,
        max_epochs: 200,
        ..TrainConfig::default()
    };
    let (params, train_report) = fit(&set, &splits, &config).unwrap();
    assert!(train_report.best_epoch >= 1);
    let test = set.subset(&splits, Split::Test);
    assert_eq!(test.len(), 12);
    let result = evaluate(&params, test.x.view(), test.y.view()).unwrap();
    assert!(result.r2_avg > 0.8, "{result:?}");

    let ckpt = dir.path().join("model.mlp1");
    save_checkpoint(&params, &ckpt).unwrap();
    let restored = load_checkpoint(&ckpt).unwrap();
    // checkpoints hold f32 weights
    let before = predict(&params, test.x.view()).unwrap();
    let after = predict(&restored, test.x.view()).unwrap();
    for (a, b) in before.iter().zip(&after) {
        assert!((a.0 - b.0).abs() < 1e-5 && (a.1 - b.1).abs() < 1e-5);
    }
}

#[test]
fn combined_corpus_keeps_member_splits_apart() {
    let dir = tempfile::tempdir().unwrap();
    let e = write_manifest(dir.path(), DatasetId::E, 50, 1.0, 9.0);
    let p = write_manifest(dir.path(), DatasetId::P, 40, 0.0, 1.0);
    let both = combine(&[e.clone(), p.clone()], 0).unwrap();
    assert_eq!(both.clips.len(), 90);
    assert!(both.clips.iter().any(|c| c.clip_id == "E:c0"));
    assert!(both.clips.iter().any(|c| c.clip_id == "P:c0"));
    // combined splits are the union of the per-member splits
    let e_splits = make_record_splits(&e.records, 0).unwrap();
    for id in e_splits.ids(Split::Test) {
        assert_eq!(both.splits.get(&format!("E:{id}")), Some(Split::Test));
    }
    assert_eq!(both.splits.count(Split::Test), 5 + 4);
}

#[test]
fn divergences_grow_with_shift() {
    let dir = tempfile::tempdir().unwrap();
    let input = |id, offset| {
        let ds = write_manifest(dir.path(), id, 60, 1.0, 9.0);
        let clips = ds.normalized();
        let m = embeddings(&ds, 4, offset).to_matrix(VectorKind::Embedding);
        let set = LabeledSet::from_clips(&m, &clips).unwrap();
        DivergenceInput {
            name: id.to_string(),
            features: set.x,
            annotations: set.y,
        }
    };
    let inputs = [input(DatasetId::E, 0.0), input(DatasetId::D, 0.5), input(DatasetId::W2, 3.0)];
    let m = divergence_matrix(&inputs, &DivergenceParams::default()).unwrap();
    let near = m.get("D", "E").unwrap();
    let far = m.get("W2", "E").unwrap();
    assert!(far.wd_data > near.wd_data);
    assert!(far.js_data >= near.js_data);
    // identical label sets on every dataset
    assert!(near.wd_annot.abs() < 1e-12 && far.js_annot.abs() < 1e-12);
}

#[test]
fn audio_file_to_descriptor() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.wav");
    let spec = hound::WavSpec {
        channels: 2,
        sample_rate: 44_100,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(&path, spec).unwrap();
    for i in 0..44_100 * 3 {
        let s = (0.4 * (2.0 * PI * 392.0 * i as f64 / 44_100.0).sin() * 32767.0) as i16;
        w.write_sample(s).unwrap();
        w.write_sample(s).unwrap();
    }
    w.finalize().unwrap();

    let params = FeatureParams::default();
    let chroma = extract_from_file(&path, HandcraftedKind::Chroma, &params, 1).unwrap();
    let mfcc = extract_from_file(&path, HandcraftedKind::Mfcc, &params, 1).unwrap();
    assert_eq!((chroma.dim(), mfcc.dim()), (96, 160));
    // order-0 block: (mean, std) per pitch class; G has the largest mean
    let g = 7;
    let means: Vec<f64> = chroma.values[..24].iter().step_by(2).copied().collect();
    assert!(means.iter().enumerate().all(|(k, &m)| k == g || m < means[g]), "{means:?}");

    let fm = FeatureMatrix {
        kind: VectorKind::ChromaStat,
        clip_ids: vec!["a".into()],
        values: Array2::from_shape_vec((1, 96), chroma.values.clone()).unwrap(),
    };
    let table = EmbeddingTable::from_matrix("chroma", 0, &fm).unwrap();
    assert_eq!(table.dim, 96);
}
