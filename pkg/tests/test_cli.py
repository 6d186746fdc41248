import json

from nightfuse.cli import main


def test_gen_synthetic_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["gen-synthetic", "--out", str(tmp_path / name), "--seed", "7", "--frames", "5",
                     "--width", "64", "--height", "48", "--scenario", "noisy"]) == 0
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert len(files) == 11
    for rel in files:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_gen_seed_changes_scene(tmp_path):
    for seed in ("1", "2"):
        main(["gen-synthetic", "--out", str(tmp_path / seed), "--seed", seed, "--frames", "2", "--width", "64", "--height", "48"])
    assert (tmp_path / "1/vis/vis_000000.ppm").read_bytes() != (tmp_path / "2/vis/vis_000000.ppm").read_bytes()


def test_run_success(tmp_path, capsys):
    main(["gen-synthetic", "--out", str(tmp_path / "s"), "--frames", "6", "--width", "64", "--height", "48"])
    code = main(["run", "--ir-dir", str(tmp_path / "s/ir"), "--vis-dir", str(tmp_path / "s/vis"),
                 "--out-dir", str(tmp_path / "o"), "--threshold", "30", "--connectivity", "8", "--emit-masks"])
    assert code == 0
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary["frames_processed"] == 6
    assert (tmp_path / "o/mask_000005.pgm").exists()


def test_validation_exit_code(tmp_path):
    assert main(["run", "--ir-dir", "a", "--vis-dir", "b", "--out-dir", str(tmp_path),
                 "--ratio-min", "5", "--ratio-max", "2"]) == 1


def test_unknown_config_key_exit_code(tmp_path):
    (tmp_path / "c.json").write_text('{"treshold": 3}')
    assert main(["run", "--ir-dir", "a", "--vis-dir", "b", "--out-dir", str(tmp_path / "o"),
                 "--config", str(tmp_path / "c.json")]) == 1


def test_bad_flag_exit_code():
    assert main(["run", "--ir-dir", "a"]) == 1
    assert main(["run", "--ir-dir", "a", "--vis-dir", "b", "--out-dir", "c", "--connectivity", "6"]) == 1


def test_runtime_error_exit_code(tmp_path):
    assert main(["run", "--ir-dir", str(tmp_path / "missing"), "--vis-dir", str(tmp_path / "missing"),
                 "--out-dir", str(tmp_path / "o")]) == 2
