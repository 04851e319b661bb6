import json

import pytest

from partbench import cli, io
from partbench.completion import read_conditioning
from partbench.errors import ConfigError
from partbench.pipeline import PipelineConfig, cmd_all, read_bundle
from partbench.recon import read_field


def _config(tmp_path, **kw):
    base = dict(output_dir=str(tmp_path / "out"), dataset_size=2, tile=48, carve_resolution=32, volume_samples=20_000, novel_views=1)
    base.update(kw)
    return PipelineConfig(**base)


def test_config_round_trip(tmp_path):
    cfg = _config(tmp_path, noise={"merge": 0.3, "drop": 0.1, "morph_radius": 2, "runs": 5})
    path = cfg.save(tmp_path / "cfg.json")
    again = PipelineConfig.load(path)
    assert again == cfg and again.dumps() == cfg.dumps()


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        PipelineConfig(completer="diffusion")
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({"version": 99})
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({"version": 1, "bogus": 1})
    with pytest.raises(ConfigError):
        PipelineConfig.load(tmp_path / "missing.json")


def test_full_run_artifacts(tmp_path):
    cfg = _config(tmp_path)
    summary = cmd_all(cfg)
    out = cfg.out
    assert summary["segmentation"]["mAP"]["0.5"] == 1.0
    assert (out / "eval" / "recall_at_k.png").exists()
    assert (out / "compose" / "reassembly_psnr.png").exists()
    aid = io.read_json(out / "manifest.json")["assets"][0]["id"]
    bundle = read_bundle(out / "views" / aid)
    assert bundle.masks.sum(axis=0).max() <= 1
    seg = io.read_json(out / "views" / aid / "segmap.json")
    assert len(seg["permutation"]) == cfg.palette_q
    block, header = read_conditioning(out / "completions" / aid / "seg_00.pbcb")
    assert header["shape"] == (25, 12, 12)
    assert read_field(out / "fields" / aid / "whole.pbpf").resolution == 32
    doc = json.loads((out / "summary.json").read_text())
    assert doc["not_reported"] == ["CLIP", "LPIPS"]


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.run(["eval", "--config", str(tmp_path / "nope.json")]) == 2
    path = _config(tmp_path).save(tmp_path / "cfg.json")
    assert cli.run(["eval", "--config", str(path)]) == 3
    assert "missing input" in capsys.readouterr().err
    assert cli.run(["gen", "--config", str(path), "--seed", "4"]) == 0
    manifest = io.read_json(tmp_path / "out" / "manifest.json")
    assert manifest["seed"] == 4
    assert cli.run(["complete", "--config", str(path), "--completer", "bogus"]) == 2


def test_external_proposals_are_used(tmp_path):
    cfg = _config(tmp_path, dataset_size=1)
    cmd_all(cfg)
    aid = io.read_json(cfg.out / "manifest.json")["assets"][0]["id"]
    ext = tmp_path / "ext"
    ext.mkdir()
    doc = io.read_json(cfg.out / "proposals" / f"{aid}.json")
    doc["proposals"] = doc["proposals"][:1]
    for p in doc["proposals"]:
        p.pop("run"), p.pop("slot")
    io.write_json(ext / f"{aid}.json", doc)
    cfg2 = _config(tmp_path, dataset_size=1, external_proposals=str(ext))
    from partbench.pipeline import cmd_eval, cmd_segment

    cmd_segment(cfg2)
    result = cmd_eval(cfg2)
    assert result["mAP"]["0.5"] < 1.0
