mod common;

use std::fs;
use std::path::Path;

use emopool::audio::{read_wav, write_wav, Waveform};
use emopool::dataio::{load_manifest, ClassTable};
use emopool::model::Checkpoint;
use emopool::train::evaluate;

use common::run_cli;

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = run_cli(args, cwd);
    assert!(
        out.status.success(),
        "`emopool {}` exited {:?}: {}",
        args.join(" "),
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str], cwd: &Path, code: i32) -> String {
    let out = run_cli(args, cwd);
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}",
        String::from_utf8_lossy(&out.stdout)
    );
    String::from_utf8(out.stderr).unwrap()
}

const SMALL: &[&str] = &["--counts", "24,24,24,24,24,24", "--dim", "12"];

fn synth_small(cwd: &Path, out: &str) {
    let mut args = vec!["synth", "--out", out, "--seed", "4"];
    args.extend_from_slice(SMALL);
    ok(&args, cwd);
}

fn write_config(cwd: &Path, name: &str, extra: &str) {
    fs::write(
        cwd.join(name),
        format!(
            "# small run\nmanifest = data/manifest.csv\nclasses = data/classes.txt\n\
             lr = 1e-3\nmax_epochs = 4\nhidden_width = 16\n{extra}"
        ),
    )
    .unwrap();
}

#[test]
fn synth_defaults_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    let summary = ok(&["synth", "--out", "a"], cwd);
    assert!(summary.contains("1000 samples, 6 classes"), "{summary}");
    let manifest = fs::read_to_string(cwd.join("a/manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 1 + 1000);
    assert_eq!(
        fs::read_to_string(cwd.join("a/classes.txt")).unwrap(),
        "neutral\ndisgust\nanger\njoy\nsadness\nfear\n"
    );

    synth_small(cwd, "b");
    synth_small(cwd, "c");
    for entry in fs::read_dir(cwd.join("b/features")).unwrap() {
        let name = entry.unwrap().file_name();
        let b = fs::read(cwd.join("b/features").join(&name)).unwrap();
        let c = fs::read(cwd.join("c/features").join(&name)).unwrap();
        assert_eq!(b, c, "{name:?}");
    }
    assert_eq!(
        fs::read(cwd.join("b/manifest.csv")).unwrap(),
        fs::read(cwd.join("c/manifest.csv")).unwrap()
    );
}

#[test]
fn synth_rejects_bad_flags() {
    let dir = tempfile::tempdir().unwrap();
    let err = fails(
        &["synth", "--out", "x", "--counts", "10,10,10,10,10"],
        dir.path(),
        2,
    );
    assert!(err.contains("--counts"), "{err}");
    fails(
        &["synth", "--out", "x", "--speech-frames", "9-3"],
        dir.path(),
        2,
    );
    fails(&["synth", "--out", "x", "--bogus"], dir.path(), 2);
    fails(&["synth"], dir.path(), 2);
}

#[test]
fn train_eval_and_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    synth_small(cwd, "data");
    write_config(cwd, "run.cfg", "");
    for seed in ["1", "2", "3"] {
        let out = format!("r{seed}");
        let log = ok(
            &[
                "train", "--config", "run.cfg", "--seed", seed, "--out", &out,
            ],
            cwd,
        );
        assert!(log.contains("epoch   1"), "{log}");
        for f in [
            "best.emck",
            "history.csv",
            "metrics.txt",
            "confusion.csv",
            "resolved_config.txt",
            "val_split.csv",
        ] {
            assert!(cwd.join(&out).join(f).is_file(), "{out}/{f}");
        }
    }
    let history = fs::read_to_string(cwd.join("r1/history.csv")).unwrap();
    assert!(history.starts_with("epoch,train_loss,val_macro_f1,lr\n"));
    assert!(history.lines().count() >= 2);
    let resolved = fs::read_to_string(cwd.join("r1/resolved_config.txt")).unwrap();
    assert!(resolved.contains("seed = 1"), "{resolved}");

    // Re-scoring the best checkpoint on its validation split reproduces the recorded value.
    let classes = ClassTable::load(&cwd.join("data/classes.txt")).unwrap();
    let ck = Checkpoint::load(&cwd.join("r1/best.emck")).unwrap();
    let (_, val) = load_manifest(&cwd.join("r1/val_split.csv"), &classes).unwrap();
    assert_eq!(
        evaluate(&ck.params, &val, 1).unwrap().macro_f1,
        ck.meta.best_val_f1
    );

    let table = ok(
        &[
            "eval",
            "--checkpoint",
            "r1/best.emck",
            "--manifest",
            "r1/val_split.csv",
            "--classes",
            "data/classes.txt",
            "--out",
            "ev",
        ],
        cwd,
    );
    assert!(table.contains("macro F1"), "{table}");
    let confusion = fs::read_to_string(cwd.join("ev/confusion.csv")).unwrap();
    assert!(confusion.starts_with("true\\pred,neutral,"), "{confusion}");

    let args = |cks: &[&'static str]| {
        let mut a = vec!["ensemble"];
        a.extend_from_slice(cks);
        a.extend_from_slice(&[
            "--manifest",
            "data/manifest.csv",
            "--classes",
            "data/classes.txt",
            "--out",
            "en",
        ]);
        a
    };
    let report = ok(
        &args(&["r1/best.emck", "r2/best.emck", "r3/best.emck"]),
        cwd,
    );
    assert!(report.contains("ensemble (hard voting)"), "{report}");
    fails(&args(&["r1/best.emck", "r2/best.emck"]), cwd, 2);

    let same = ok(
        &args(&["r1/best.emck", "r1/best.emck", "r1/best.emck"]),
        cwd,
    );
    let solo = ok(
        &[
            "eval",
            "--checkpoint",
            "r1/best.emck",
            "--manifest",
            "data/manifest.csv",
            "--classes",
            "data/classes.txt",
            "--out",
            "ev2",
        ],
        cwd,
    );
    let macro_line = |s: &str| {
        s.lines()
            .find(|l| l.starts_with("macro F1"))
            .unwrap()
            .to_string()
    };
    assert_eq!(macro_line(&same), macro_line(&solo));
}

#[test]
fn train_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    synth_small(cwd, "data");
    write_config(cwd, "bad.cfg", "learning_rate = 0.1\n");
    let err = fails(&["train", "--config", "bad.cfg", "--out", "x"], cwd, 2);
    assert!(err.contains("learning_rate"), "{err}");
    write_config(cwd, "bad2.cfg", "dropout = 1.5\n");
    fails(&["train", "--config", "bad2.cfg", "--out", "x"], cwd, 2);
    fails(&["train", "--config", "missing.cfg"], cwd, 2);
    fails(&["train"], cwd, 2);
}

#[test]
fn train_without_a_class_fails_with_its_name() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    synth_small(cwd, "data");
    let manifest = fs::read_to_string(cwd.join("data/manifest.csv")).unwrap();
    let kept: String = manifest
        .lines()
        .filter(|l| !l.ends_with(",fear"))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(cwd.join("data/manifest.csv"), kept).unwrap();
    write_config(cwd, "run.cfg", "");
    let err = fails(&["train", "--config", "run.cfg", "--out", "x"], cwd, 1);
    assert!(err.contains("\"fear\""), "{err}");
}

#[test]
fn eval_with_mismatched_class_table_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    synth_small(cwd, "data");
    write_config(cwd, "run.cfg", "");
    ok(&["train", "--config", "run.cfg", "--out", "r"], cwd);
    fs::write(cwd.join("four.txt"), "neutral\ndisgust\nanger\njoy\n").unwrap();
    fails(
        &[
            "eval",
            "--checkpoint",
            "r/best.emck",
            "--manifest",
            "data/manifest.csv",
            "--classes",
            "four.txt",
        ],
        cwd,
        1,
    );

    ok(
        &[
            "synth",
            "--out",
            "wide",
            "--dim",
            "20",
            "--counts",
            "3,3,3,3,3,3",
        ],
        cwd,
    );
    fails(
        &[
            "eval",
            "--checkpoint",
            "r/best.emck",
            "--manifest",
            "wide/manifest.csv",
            "--classes",
            "data/classes.txt",
        ],
        cwd,
        1,
    );
}

fn tone(len: usize, rate: u32) -> Waveform {
    Waveform::new(
        (0..len).map(|i| 0.4 * (i as f32 * 0.05).sin()).collect(),
        rate,
    )
    .unwrap()
}

#[test]
fn augment_logs_and_reports_corrupt_files() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    fs::create_dir(cwd.join("wavs")).unwrap();
    for i in 0..6 {
        fs::write(
            cwd.join(format!("wavs/clip{i}.wav")),
            write_wav(&tone(4000 + 500 * i, 16_000)),
        )
        .unwrap();
    }

    ok(
        &[
            "augment",
            "--input",
            "wavs",
            "--out",
            "p0",
            "--probability",
            "0",
        ],
        cwd,
    );
    for i in 0..6 {
        let name = format!("clip{i}.wav");
        assert_eq!(
            fs::read(cwd.join("wavs").join(&name)).unwrap(),
            fs::read(cwd.join("p0").join(&name)).unwrap()
        );
    }

    ok(
        &[
            "augment",
            "--input",
            "wavs",
            "--out",
            "p1",
            "--probability",
            "1",
            "--seed",
            "9",
        ],
        cwd,
    );
    ok(
        &[
            "augment",
            "--input",
            "wavs",
            "--out",
            "p1b",
            "--probability",
            "1",
            "--seed",
            "9",
            "--workers",
            "3",
        ],
        cwd,
    );
    let log = fs::read_to_string(cwd.join("p1/augment_log.csv")).unwrap();
    assert_eq!(
        log,
        fs::read_to_string(cwd.join("p1b/augment_log.csv")).unwrap()
    );
    assert!(log.starts_with("file,transform,parameters\n"));
    assert_eq!(log.lines().count(), 7);
    assert!(log.lines().skip(1).all(|l| !l.contains(",none,")), "{log}");
    for i in 0..6 {
        let bytes = fs::read(cwd.join(format!("p1/clip{i}.wav"))).unwrap();
        assert_eq!(read_wav(&bytes).unwrap().sample_rate, 16_000);
    }

    fs::write(cwd.join("wavs/broken.wav"), b"RIFF\x10\x00\x00\x00WAVEjunk").unwrap();
    let err = fails(
        &[
            "augment",
            "--input",
            "wavs",
            "--out",
            "p2",
            "--probability",
            "1",
        ],
        cwd,
        1,
    );
    assert!(err.contains("broken.wav"), "{err}");
    let log = fs::read_to_string(cwd.join("p2/augment_log.csv")).unwrap();
    assert!(log.contains("broken.wav,error,"), "{log}");
    assert!(cwd.join("p2/clip5.wav").is_file());
}

#[test]
fn augment_resamples_to_16k() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    fs::create_dir(cwd.join("wavs")).unwrap();
    fs::write(cwd.join("wavs/a.wav"), write_wav(&tone(8000, 8000))).unwrap();
    ok(
        &[
            "augment",
            "--input",
            "wavs",
            "--out",
            "o",
            "--probability",
            "0",
        ],
        cwd,
    );
    let w = read_wav(&fs::read(cwd.join("o/a.wav")).unwrap()).unwrap();
    assert_eq!((w.sample_rate, w.samples.len()), (16_000, 16_000));
}
