use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wam")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn synth(dir: &Path, seed: &str, vocab: &str, sentences: &str) {
    let out = wam(&[
        "synth",
        "--out",
        dir.to_str().unwrap(),
        "--seed",
        seed,
        "--vocab-size",
        vocab,
        "--sentences",
        sentences,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

/// A short desk-scale config over the corpus in `data`.
fn write_config(dir: &Path, data: &Path, steps: u64, extra: &str) -> std::path::PathBuf {
    let cfg = dir.join("run.cfg");
    let text = format!(
        "[run]\nseed = 3\nsteps = {steps}\noutput_dir = \"out\"\n\
         [corpus]\nsource = \"{d}/source.txt\"\ntarget = \"{d}/target.txt\"\ndictionary = \"{d}/dictionary.txt\"\n\
         [model]\nd_model = 16\nn_heads = 2\nd_ff = 32\nn_encoder_layers = 1\nn_decoder_layers = 1\n\
         [optimizer]\nwarmup_steps = 10\n[train]\ncheckpoint_every = 5\n{extra}",
        d = data.display()
    );
    fs::write(&cfg, text).unwrap();
    cfg
}

#[test]
fn synth_is_reproducible_and_sized() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    synth(&a, "5", "200", "2000");
    synth(&b, "5", "200", "2000");
    for f in ["source.txt", "target.txt", "dictionary.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let dict = fs::read_to_string(a.join("dictionary.txt")).unwrap();
    assert_eq!(dict.lines().count(), 200);
    assert_eq!(fs::read_to_string(a.join("source.txt")).unwrap().lines().count(), 2000);
}

#[test]
fn train_eval_export_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, "1", "30", "120");
    let cfg = write_config(tmp.path(), &data, 12, "");
    let out = wam(&["train", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let run = tmp.path().join("out");
    let log = fs::read_to_string(run.join("metrics.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 12);
    for f in ["config.resolved.toml", "checkpoint.json", "checkpoint-000005.json", "checkpoint-000010.json"] {
        assert!(run.join(f).is_file(), "{f} missing");
    }
    assert_eq!(fs::read_to_string(run.join("validation.jsonl")).unwrap().lines().count(), 2);

    let ckpt = run.join("checkpoint.json");
    let dict = data.join("dictionary.txt");
    let vecs = tmp.path().join("vecs");
    let proj = tmp.path().join("proj.tsv");
    let out = wam(&[
        "eval",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--dictionary",
        dict.to_str().unwrap(),
        "--export",
        vecs.to_str().unwrap(),
        "--project",
        proj.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(run.join("eval.json")).unwrap();
    assert!(report.contains("\"acc10\""));
    let header = fs::read_to_string(vecs.join("source.vec")).unwrap();
    assert!(header.starts_with("30 16\n"));
    assert_eq!(fs::read_to_string(&proj).unwrap().lines().count(), 61);

    // re-evaluating from the exported tables reproduces the report exactly
    let again = tmp.path().join("again.json");
    let out = wam(&[
        "eval",
        "--source-vectors",
        vecs.join("source.vec").to_str().unwrap(),
        "--target-vectors",
        vecs.join("target.vec").to_str().unwrap(),
        "--dictionary",
        dict.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(&again).unwrap(), report);

    let side = tmp.path().join("target.vec");
    let out = wam(&["export", "--checkpoint", ckpt.to_str().unwrap(), "--side", "target", "--out", side.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(&side).unwrap(), fs::read(vecs.join("target.vec")).unwrap());
}

#[test]
fn identical_configs_give_identical_logs() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, "2", "20", "60");
    let cfg = write_config(tmp.path(), &data, 6, "");
    let mut logs = Vec::new();
    for name in ["r1", "r2"] {
        let out = wam(&["train", "--config", cfg.to_str().unwrap(), "--output", tmp.path().join(name).to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        logs.push(fs::read(tmp.path().join(name).join("metrics.jsonl")).unwrap());
    }
    assert_eq!(logs[0], logs[1]);
}

#[test]
fn validation_errors_exit_with_one_and_list_everything() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "[run]\nmode = \"supervised-landmark\"\n[model]\nd_model = 10\nn_heads = 4\n").unwrap();
    let out = wam(&["train", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    for needle in ["run.seed", "corpus.source", "corpus.target", "corpus.dictionary", "d_model"] {
        assert!(err.contains(needle), "missing {needle} in {err}");
    }
    assert!(!tmp.path().join("runs").exists());

    assert_eq!(code(&wam(&["train"])), 1);
    assert_eq!(code(&wam(&["frobnicate"])), 1);
}

#[test]
fn missing_inputs_are_runtime_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.json");
    let out = wam(&["export", "--checkpoint", missing.to_str().unwrap(), "--side", "source", "--out", "x.vec"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.json"));
}

#[test]
fn unknown_metric_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let v = tmp.path().join("v.vec");
    fs::write(&v, "1 2\na 1 0\n").unwrap();
    let d = tmp.path().join("d.txt");
    fs::write(&d, "a a\n").unwrap();
    let out = wam(&[
        "eval",
        "--source-vectors",
        v.to_str().unwrap(),
        "--target-vectors",
        v.to_str().unwrap(),
        "--dictionary",
        d.to_str().unwrap(),
        "--metric",
        "csls",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn untrained_checkpoint_scores_near_chance() {
    use wam::checkpoint::Checkpoint;
    use wam::corpus::{read_parallel, Side, Vocab};
    use wam::transformer::{Transformer, TransformerConfig};

    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, "4", "200", "2000");
    let pairs = read_parallel(&data.join("source.txt"), &data.join("target.txt")).unwrap();
    let sv = Vocab::build(&pairs, Side::Source, 1, "source").unwrap();
    let tv = Vocab::build(&pairs, Side::Target, 1, "target").unwrap();
    let model = Transformer::new(TransformerConfig::default(), sv.len(), tv.len(), 4).unwrap();
    let ckpt = tmp.path().join("untrained.json");
    Checkpoint::capture(&model, &sv, &tv, 0).save(&ckpt).unwrap();

    let out = wam(&["eval", "--checkpoint", ckpt.to_str().unwrap(), "--dictionary", data.join("dictionary.txt").to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(tmp.path().join("eval.json")).unwrap();
    let acc1: f64 = report
        .lines()
        .find_map(|l| l.trim().strip_prefix("\"acc1\": "))
        .map(|v| v.trim_end_matches(',').parse().unwrap())
        .expect("acc1 in report");
    assert!(acc1 <= 5.0 / 200.0, "untrained acc@1 {acc1}");
}

#[test]
fn resolved_config_reproduces_a_run_from_elsewhere() {
    let tmp = tempfile::tempdir().unwrap();
    synth(&tmp.path().join("data"), "6", "20", "60");
    fs::create_dir_all(tmp.path().join("cfg")).unwrap();
    fs::write(
        tmp.path().join("cfg/run.cfg"),
        "[run]\nseed = 8\nsteps = 5\noutput_dir = \"../out\"\n\
         [corpus]\nsource = \"../data/source.txt\"\ntarget = \"../data/target.txt\"\n\
         [model]\nd_model = 8\nn_heads = 2\nd_ff = 16\nn_encoder_layers = 1\nn_decoder_layers = 1\n\
         [optimizer]\nwarmup_steps = 4\n",
    )
    .unwrap();
    let run = |cwd: &Path, args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_wam")).current_dir(cwd).args(args).output().unwrap();
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    };
    run(tmp.path(), &["train", "--config", "cfg/run.cfg"]);
    let resolved = fs::read_to_string(tmp.path().join("out/config.resolved.toml")).unwrap();
    assert!(resolved.contains("output_dir = \"/"), "{resolved}");

    run(&tmp.path().join("data"), &["train", "--config", "../out/config.resolved.toml", "--output", "again"]);
    assert_eq!(
        fs::read(tmp.path().join("out/metrics.jsonl")).unwrap(),
        fs::read(tmp.path().join("data/again/metrics.jsonl")).unwrap()
    );
}
