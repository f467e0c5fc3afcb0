import json
import os

import pytest

from twirllab.cli import ConfigError, RunConfig, main, materialize_point


def _config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


BASIC = {
    "version": 1,
    "seed": 5,
    "experiments": [
        {"id": "matchgate_uniform_chi", "grid": {"n": [1, 4], "mode": ["exact"]}},
    ],
}


def test_config_requires_seed():
    doc = dict(BASIC)
    doc.pop("seed")
    with pytest.raises(ConfigError):
        RunConfig.from_dict(doc)


def test_config_requires_known_version():
    with pytest.raises(ConfigError):
        RunConfig.from_dict(dict(BASIC, version=99))


def test_config_rejects_bad_format():
    with pytest.raises(ConfigError):
        RunConfig.from_dict(dict(BASIC, format="xml"))


def test_config_hash_tracks_semantic_fields_only():
    a = RunConfig.from_dict(BASIC)
    b = RunConfig.from_dict(dict(BASIC, workers=8, out="elsewhere"))
    c = RunConfig.from_dict(dict(BASIC, seed=6))
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()


def test_materialize_rejects_unknown_experiment():
    with pytest.raises(ConfigError):
        materialize_point("not_an_experiment", {}, 0)


def test_materialize_rejects_unknown_parameters():
    with pytest.raises(ConfigError):
        materialize_point("matchgate_uniform_chi", {"bogus": 1}, 0)


def test_run_writes_jsonl_and_manifest(tmp_path):
    cfg = _config(tmp_path, BASIC)
    out = str(tmp_path / "out")
    assert main(["run", "--config", cfg, "--out", out]) == 0
    records = [
        json.loads(line)
        for line in open(os.path.join(out, "matchgate_uniform_chi.jsonl"))
    ]
    assert len(records) == 2
    assert records[0]["payload"]["estimate"] == 2.0
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert manifest["config_hash"] == RunConfig.from_dict(BASIC).config_hash()
    assert manifest["records"] == 2


def test_run_is_deterministic_excluding_walltime(tmp_path):
    doc = {
        "version": 1,
        "seed": 9,
        "experiments": [
            {"id": "clifford4_distinguisher",
             "grid": {"ensemble": ["haar"], "n": [2], "samples": [50]}},
        ],
    }
    cfg = _config(tmp_path, doc)
    outs = []
    for name in ("a", "b"):
        out = str(tmp_path / name)
        assert main(["run", "--config", cfg, "--out", out]) == 0
        payloads = [
            json.loads(line)["payload"]
            for line in open(os.path.join(out, "clifford4_distinguisher.jsonl"))
        ]
        outs.append(payloads)
    assert outs[0] == outs[1]


def test_run_rejects_unknown_experiment(tmp_path):
    doc = dict(BASIC, experiments=[{"id": "nope", "grid": {}}])
    assert main(["run", "--config", _config(tmp_path, doc),
                 "--out", str(tmp_path / "o")]) == 2


def test_run_rejects_invalid_brick_combo(tmp_path):
    doc = {
        "version": 1,
        "seed": 1,
        "experiments": [
            {"id": "symplectic_state_witness",
             "grid": {"ensemble": [{"depth": 1, "arity": 2}],
                      "n": [4], "samples": [5]}},
        ],
    }
    assert main(["run", "--config", _config(tmp_path, doc),
                 "--out", str(tmp_path / "o")]) == 2


def test_env_var_overrides_output_dir(tmp_path, monkeypatch):
    cfg = _config(tmp_path, BASIC)
    env_out = str(tmp_path / "env-out")
    monkeypatch.setenv("TWIRLLAB_OUT", env_out)
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "flag-out")]) == 0
    assert os.path.isdir(env_out)
    assert not os.path.isdir(str(tmp_path / "flag-out"))


def test_list_prints_catalog(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "clifford4_distinguisher" in out
    assert "matchgate_transfer_chi" in out
    assert "anchor:" in out


def test_verify_passes(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out


def test_report_renders_table(tmp_path, capsys):
    cfg = _config(tmp_path, BASIC)
    out = str(tmp_path / "out")
    assert main(["run", "--config", cfg, "--out", out]) == 0
    capsys.readouterr()
    assert main(["report", "--out", out]) == 0
    table = capsys.readouterr().out
    assert "matchgate_uniform_chi" in table and "exact" in table


def test_report_errors_on_missing_dir(tmp_path):
    assert main(["report", "--out", str(tmp_path / "missing")]) == 2
