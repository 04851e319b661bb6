"""Pipeline configuration and the file-backed stage commands.

Every stage reads the previous stage's files under ``output_dir`` and
writes its own; all randomness comes from the named seeds in the config.

Layout::

    assets/<id>.json            gen
    manifest.json               gen
    views/<id>/...              render (PNG grids, PFM depths, RLE masks, segmap)
    proposals/<id>.json         segment --mode auto
    proposals/<id>.seeded.json  segment --mode seeded
    eval/                       eval (metrics.json, per_sample.csv, recall.csv, figures)
    completions/<id>/...        complete
    fields/<id>/...             carve
    compose/                    compose (report.json, report.csv, renders, visibility)
    summary.json                all
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io, metrics, plotting, segmap
from .camera import Camera, make_rig
from .completion import (
    COMPLETERS,
    CompletionRequest,
    complete,
    pack_conditioning,
    write_conditioning,
)
from .compose import ReassemblyConfig, evaluate_reassembly
from .errors import ConfigError, PartbenchError, StageError
from .proposals import (
    NoiseSpec,
    ProposalSet,
    RankedProposals,
    rank_and_dedup,
    sample_noisy_oracle,
    seed_point,
    seeded_query,
)
from .recon import CarveConfig, carve, read_field, write_field
from .render import MarchConfig, ViewBundle, foreground_psnr, render_views
from .scene import Asset, GeneratorSpec, generate_asset, part_volume_fractions

log = logging.getLogger(__name__)

CONFIG_VERSION = 1
OCCLUSION_THRESHOLD = 0.3
STAGES = ("gen", "render", "segment", "eval", "complete", "carve", "compose", "all")


@dataclass
class PipelineConfig:
    output_dir: str = "partbench-out"
    dataset_size: int = 20
    seeds: dict = field(
        default_factory=lambda: {"dataset": 0, "palette": 0, "permutation": 0, "sampler": 0, "novel_views": 0}
    )
    template: str | None = None
    min_parts: int = 2
    max_parts: int = 8
    volume_samples: int = 100_000
    tile: int = 128
    fov: float = 40.0
    distance: float = 2.7
    march: dict = field(default_factory=lambda: dataclasses.asdict(MarchConfig()))
    palette_q: int = segmap.DEFAULT_Q
    min_pixels: int = segmap.DEFAULT_MIN_PIXELS
    noise: dict = field(default_factory=lambda: {"merge": 0.0, "drop": 0.0, "morph_radius": 0, "runs": 1})
    proposal_cap: int | None = None
    thresholds: list = field(default_factory=lambda: list(metrics.THRESHOLDS))
    k_max: int = 10
    sample_counts: list = field(default_factory=lambda: [1, 5, 10])
    completer: str = "oracle"
    carve_resolution: int = 64
    kappa: float = 50.0
    step: float | None = None
    novel_views: int = 4
    seed_points: str | None = None
    external_proposals: str | None = None
    external_completions: str | None = None
    figures: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        try:
            if self.dataset_size < 1:
                raise ValueError("dataset_size must be at least 1")
            if self.completer not in COMPLETERS:
                raise ValueError(f"completer must be one of {COMPLETERS}")
            if self.tile % 4:
                raise ValueError("tile size must be divisible by 4 (latent factor 8 on the 2x2 grid)")
            GeneratorSpec(self.template, self.min_parts, self.max_parts, self.volume_samples).validate()
            self.march_config()
            self.noise_spec()
            self.carve_config()
            if not 2 <= self.palette_q <= 64 or self.palette_q < self.max_parts:
                raise ValueError("palette_q must lie in [2, 64] and cover max_parts")
            if any(not 0 < t <= 1 for t in self.thresholds):
                raise ValueError("thresholds must lie in (0, 1]")
            missing = {"dataset", "palette", "permutation", "sampler", "novel_views"} - set(self.seeds)
            if missing:
                raise ValueError(f"missing seeds: {sorted(missing)}")
        except (ValueError, TypeError, PartbenchError) as exc:
            raise ConfigError(str(exc)) from exc

    # typed views ---------------------------------------------------------

    def march_config(self) -> MarchConfig:
        return MarchConfig(**self.march)

    def noise_spec(self, runs: int | None = None) -> NoiseSpec:
        doc = dict(self.noise)
        if runs is not None:
            doc["runs"] = runs
        return NoiseSpec(**doc)

    def carve_config(self) -> CarveConfig:
        return CarveConfig(resolution=self.carve_resolution, kappa=self.kappa)

    def generator_spec(self) -> GeneratorSpec:
        return GeneratorSpec(self.template, self.min_parts, self.max_parts, self.volume_samples)

    def rig(self):
        return make_rig(self.tile, self.tile, self.distance, self.fov)

    def reassembly_config(self) -> ReassemblyConfig:
        return ReassemblyConfig(
            tile=self.tile,
            fov=self.fov,
            distance=self.distance,
            carve=self.carve_config(),
            march=self.march_config(),
            step=self.step,
            completer=self.completer,
            noise=self.noise_spec(),
            novel_views=self.novel_views,
            seed=self.seeds["novel_views"],
        )

    @property
    def out(self) -> Path:
        return Path(self.output_dir)

    # file form -------------------------------------------------------------

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["version"] = CONFIG_VERSION
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        doc = dict(doc)
        version = doc.pop("version", None)
        if version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {version!r}")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(doc)

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps())
        return path


def _require(path: Path, stage: str) -> Path:
    if not path.exists():
        raise StageError(stage, f"missing input {path}")
    return path


def _manifest(cfg: PipelineConfig, stage: str) -> dict:
    return io.read_json(_require(cfg.out / "manifest.json", stage))


def _load_asset(cfg: PipelineConfig, entry: dict, stage: str) -> Asset:
    return Asset.loads(_require(cfg.out / entry["file"], stage).read_text())


# gen ---------------------------------------------------------------------------


def cmd_gen(cfg: PipelineConfig) -> dict:
    spec = cfg.generator_spec()
    base = cfg.seeds["dataset"]
    entries = []
    for i in range(cfg.dataset_size):
        seed = base + i
        asset = generate_asset(seed, spec)
        fractions = part_volume_fractions(asset, spec.volume_samples, seed)
        rel = Path("assets") / f"{asset.id}.json"
        path = cfg.out / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(asset.dumps() + "\n")
        entries.append(
            {"id": asset.id, "file": rel.as_posix(), "seed": seed, "part_count": asset.n_parts, "volume_fractions": fractions}
        )
    manifest = {"format": "partbench-manifest", "version": 1, "seed": base, "generator_version": 1, "assets": entries}
    io.write_json(cfg.out / "manifest.json", manifest)
    log.info("gen: %d assets", len(entries))
    return io.format_floats(manifest)


# render ------------------------------------------------------------------------


def write_bundle(directory, bundle: ViewBundle, palette=None, perm=None):
    d = Path(directory)
    io.save_png(d / "grid.png", bundle.rgb)
    io.save_mask_png(d / "foreground.png", bundle.foreground)
    for k in range(bundle.n_parts):
        io.save_png(d / f"part_{k:02d}.png", bundle.part_rgb[k])
        io.save_mask_png(d / f"part_{k:02d}_fg.png", bundle.part_foreground[k])
        io.write_pfm(d / f"depth_{k:02d}.pfm", bundle.part_depth[k])
        io.save_mask_png(d / f"mask_{k:02d}.png", bundle.masks[k])
    io.write_json(d / "masks.json", {"parts": bundle.n_parts, "masks": [io.rle_encode(m) for m in bundle.masks]})
    io.write_json(d / "rig.json", {"cameras": [c.to_dict() for c in bundle.cameras]})
    if palette is not None:
        io.save_png(d / "segmap.png", segmap.encode(bundle.masks, palette, perm))
        io.write_json(
            d / "segmap.json",
            {"palette": palette.colors, "permutation": [int(p) for p in perm], "background": [0.0, 0.0, 0.0]},
        )


def read_bundle(directory, stage: str = "render") -> ViewBundle:
    d = Path(directory)
    masks_doc = io.read_json(_require(d / "masks.json", stage))
    s = masks_doc["parts"]
    cams = [Camera.from_dict(c) for c in io.read_json(_require(d / "rig.json", stage))["cameras"]]
    rgb = io.load_png(_require(d / "grid.png", stage))
    masks = np.stack([io.rle_decode(r) for r in masks_doc["masks"]])
    part_rgb = np.stack([io.load_png(_require(d / f"part_{k:02d}.png", stage)) for k in range(s)])
    depth = np.stack([io.read_pfm(_require(d / f"depth_{k:02d}.pfm", stage)) for k in range(s)])
    fg = io.load_mask_png(_require(d / "foreground.png", stage))
    return ViewBundle(rgb, depth, part_rgb, masks, fg, cams)


def cmd_render(cfg: PipelineConfig, manifest: dict | None = None) -> list:
    manifest = manifest or _manifest(cfg, "render")
    rig = cfg.rig()
    march = cfg.march_config()
    palette = segmap.make_palette(cfg.palette_q, cfg.seeds["palette"])
    done = []
    for i, entry in enumerate(manifest["assets"]):
        asset = _load_asset(cfg, entry, "render")
        bundle = render_views(asset, rig, march)
        perm = segmap.random_permutation(cfg.palette_q, cfg.seeds["permutation"] + i)
        write_bundle(cfg.out / "views" / entry["id"], bundle, palette, perm)
        done.append(entry["id"])
    log.info("render: %d bundles", len(done))
    return done


# segment ---------------------------------------------------------------------------


def gt_masks(bundle: ViewBundle):
    """Visible (non-empty) part masks and their part indices."""
    visible = [k for k in range(bundle.n_parts) if bundle.masks[k].any()]
    return bundle.masks[visible], visible


def auto_proposals(cfg: PipelineConfig, asset_id: str, gt, index: int, runs: int | None = None) -> RankedProposals:
    if cfg.external_proposals:
        path = _require(Path(cfg.external_proposals) / f"{asset_id}.json", "segment")
        ext = RankedProposals.from_dict(io.read_json(path))
        ranked = rank_and_dedup(ProposalSet(ext.masks, ext.runs, ext.slots), scores=ext.scores)
    else:
        noise = cfg.noise_spec(runs)
        ranked = rank_and_dedup(sample_noisy_oracle(gt, noise, cfg.seeds["sampler"] + index))
    if cfg.proposal_cap is not None:
        ranked = ranked.subset(np.arange(min(cfg.proposal_cap, len(ranked))))
    return ranked


def _seed_points(cfg: PipelineConfig, asset_id: str, gt, visible):
    if cfg.seed_points:
        doc = io.read_json(_require(Path(cfg.seed_points), "segment"))
        return [(int(k), (int(r), int(c))) for k, r, c in doc.get(asset_id, [])]
    return [(k, seed_point(m)) for k, m in zip(visible, gt)]


def cmd_segment(cfg: PipelineConfig, mode: str = "auto") -> list:
    if mode not in ("auto", "seeded"):
        raise ConfigError(f"unknown segmentation mode {mode!r}")
    manifest = _manifest(cfg, "segment")
    written = []
    for i, entry in enumerate(manifest["assets"]):
        bundle = read_bundle(cfg.out / "views" / entry["id"], "segment")
        gt, visible = gt_masks(bundle)
        ranked = auto_proposals(cfg, entry["id"], gt, i)
        if mode == "auto":
            path = io.write_json(cfg.out / "proposals" / f"{entry['id']}.json", ranked.to_dict())
        else:
            queries = []
            for k, u in _seed_points(cfg, entry["id"], gt, visible):
                hits = seeded_query(ranked, u)
                queries.append({"part": k, "seed": list(u), "proposals": hits.to_dict()})
            path = io.write_json(cfg.out / "proposals" / f"{entry['id']}.seeded.json", {"queries": queries})
        written.append(path)
    log.info("segment (%s): %d files", mode, len(written))
    return written


# eval ----------------------------------------------------------------------------------


def cmd_eval(cfg: PipelineConfig) -> dict:
    manifest = _manifest(cfg, "eval")
    taus = [float(t) for t in cfg.thresholds]
    rows, curves = [], {t: [] for t in taus}
    seeded = {t: [] for t in taus}
    by_runs = {n: {t: [] for t in taus} for n in cfg.sample_counts}
    for i, entry in enumerate(manifest["assets"]):
        bundle = read_bundle(cfg.out / "views" / entry["id"], "eval")
        gt, visible = gt_masks(bundle)
        doc = io.read_json(_require(cfg.out / "proposals" / f"{entry['id']}.json", "eval"))
        ranked = RankedProposals.from_dict(doc)
        row = {"asset": entry["id"], "gt_parts": len(visible), "proposals": len(ranked)}
        for t in taus:
            row[f"ap@{t:g}"] = metrics.sample_ap(ranked, gt, t)
            curves[t].append(metrics.recall_curve(ranked, gt, t, cfg.k_max))
        rows.append(row)
        seeded_path = cfg.out / "proposals" / f"{entry['id']}.seeded.json"
        if seeded_path.exists():
            masks_by_part = dict(zip(visible, gt))
            for q in io.read_json(seeded_path)["queries"]:
                hits = RankedProposals.from_dict(q["proposals"])
                for t in taus:
                    seeded[t].append(metrics.sample_ap(hits, masks_by_part[q["part"]][None], t))
        if not cfg.external_proposals:
            for n in cfg.sample_counts:
                r = auto_proposals(cfg, entry["id"], gt, i, runs=n)
                for t in taus:
                    by_runs[n][t].append(metrics.sample_ap(r, gt, t))
    result = {
        "thresholds": taus,
        "mAP": {f"{t:g}": metrics.mean_ap([r[f"ap@{t:g}"] for r in rows]) for t in taus},
        "recall_at_k": {f"{t:g}": np.mean(curves[t], axis=0).tolist() for t in taus},
        "seeded_mAP": {f"{t:g}": metrics.mean_ap(seeded[t]) for t in taus} if seeded[taus[0]] else None,
        "mAP_by_runs": (
            {str(n): {f"{t:g}": metrics.mean_ap(v[t]) for t in taus} for n, v in by_runs.items()}
            if not cfg.external_proposals
            else None
        ),
        "not_reported": ["CLIP", "LPIPS"],
    }
    out = cfg.out / "eval"
    io.write_json(out / "metrics.json", result)
    _write_csv(out / "per_sample.csv", rows)
    _write_csv(
        out / "recall.csv",
        [{"tau": f"{t:g}", "K": k, "recall": v} for t in taus for k, v in enumerate(np.mean(curves[t], axis=0))],
    )
    if cfg.figures:
        plotting.recall_curves(
            {f"tau={t:g}": np.mean(curves[t], axis=0) for t in taus}, out / "recall_at_k.png"
        )
    log.info("eval: mAP %s", result["mAP"])
    return io.format_floats(result)


def _write_csv(path: Path, rows: list):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if not rows:
            return
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{v:.9g}" if isinstance(v, float) else v) for k, v in row.items()})


# complete ----------------------------------------------------------------------------


def _segments(cfg: PipelineConfig, entry: dict, bundle: ViewBundle, stage: str):
    doc = io.read_json(_require(cfg.out / "proposals" / f"{entry['id']}.json", stage))
    ranked = RankedProposals.from_dict(doc)
    gt, visible = gt_masks(bundle)
    if len(ranked) == 0 or not visible:
        return ranked, []
    m = metrics.iou_matrix(ranked.masks, gt)
    return ranked, [visible[int(np.argmax(row))] for row in m]


def completion_scores(bundle: ViewBundle, mask, owner: int, seed: int = 0) -> dict:
    """Masked-region PSNR of each built-in completer against the gt part render."""
    req = CompletionRequest.from_image(bundle.rgb, mask)
    gt_img, gt_fg = bundle.part_rgb[owner], bundle.part_foreground[owner]
    out = {}
    for name in COMPLETERS:
        res = complete(name, req, (gt_img, gt_fg), seed)
        out[name] = foreground_psnr(gt_img, res.image, gt_fg) if gt_fg.any() else None
    visible = int(np.count_nonzero(bundle.masks[owner]))
    total = int(np.count_nonzero(gt_fg))
    out["occlusion"] = 1.0 - visible / total if total else 0.0
    return out


def cmd_complete(cfg: PipelineConfig, completer: str | None = None) -> dict:
    completer = completer or cfg.completer
    if completer not in COMPLETERS:
        raise ConfigError(f"unknown completer {completer!r}")
    manifest = _manifest(cfg, "complete")
    rows = []
    for entry in manifest["assets"]:
        bundle = read_bundle(cfg.out / "views" / entry["id"], "complete")
        ranked, owners = _segments(cfg, entry, bundle, "complete")
        d = cfg.out / "completions" / entry["id"]
        for k, (mask, owner) in enumerate(zip(ranked.masks, owners)):
            req = CompletionRequest.from_image(bundle.rgb, mask)
            if cfg.external_completions:
                src = Path(cfg.external_completions) / entry["id"]
                image = io.load_png(_require(src / f"seg_{k:02d}.png", "complete"))
                fg = io.load_mask_png(_require(src / f"seg_{k:02d}_fg.png", "complete"))
            else:
                res = complete(completer, req, (bundle.part_rgb[owner], bundle.part_foreground[owner]))
                image, fg = res.image, res.foreground
            io.save_png(d / f"seg_{k:02d}.png", image)
            io.save_mask_png(d / f"seg_{k:02d}_fg.png", fg)
            write_conditioning(d / f"seg_{k:02d}.pbcb", pack_conditioning(req))
            scores = completion_scores(bundle, mask, owner)
            rows.append({"asset": entry["id"], "segment": k, "part": owner, **scores})
        io.write_json(d / "segments.json", {"completer": completer, "count": len(ranked), "owners": owners})
    occluded = [r for r in rows if r["occlusion"] >= OCCLUSION_THRESHOLD and r["oracle"] is not None]
    ordered = [r for r in occluded if r["oracle"] >= r["symmetry"] >= r["passthrough"]]
    report = {
        "completer": completer,
        "segments": len(rows),
        "mean_psnr": {n: float(np.mean([r[n] for r in rows if r[n] is not None])) for n in COMPLETERS}
        if rows
        else None,
        "occluded_segments": len(occluded),
        "ordering_rate": len(ordered) / len(occluded) if occluded else None,
    }
    io.write_json(cfg.out / "completions" / "report.json", report)
    _write_csv(cfg.out / "completions" / "per_segment.csv", rows)
    if cfg.figures and report["mean_psnr"]:
        plotting.completion_bars(report["mean_psnr"], cfg.out / "completions" / "completion_psnr.png")
    log.info("complete: %d segments", len(rows))
    return io.format_floats(report)


# carve ----------------------------------------------------------------------------


def cmd_carve(cfg: PipelineConfig) -> list:
    manifest = _manifest(cfg, "carve")
    carve_cfg = cfg.carve_config()
    written = []
    for entry in manifest["assets"]:
        views = cfg.out / "views" / entry["id"]
        rig = [Camera.from_dict(c) for c in io.read_json(_require(views / "rig.json", "carve"))["cameras"]]
        src = cfg.out / "completions" / entry["id"]
        count = io.read_json(_require(src / "segments.json", "carve"))["count"]
        d = cfg.out / "fields" / entry["id"]
        d.mkdir(parents=True, exist_ok=True)
        for k in range(count):
            image = io.load_png(_require(src / f"seg_{k:02d}.png", "carve"))
            fg = io.load_mask_png(_require(src / f"seg_{k:02d}_fg.png", "carve"))
            write_field(d / f"seg_{k:02d}.pbpf", carve(image, fg, rig, carve_cfg))
        rgb = io.load_png(_require(views / "grid.png", "carve"))
        fg = io.load_mask_png(_require(views / "foreground.png", "carve"))
        write_field(d / "whole.pbpf", carve(rgb, fg, rig, carve_cfg))
        io.write_json(d / "fields.json", {"count": count})
        written.append(d)
    log.info("carve: %d assets", len(written))
    return written


# compose ------------------------------------------------------------------------------


def cmd_compose(cfg: PipelineConfig) -> dict:
    manifest = _manifest(cfg, "compose")
    rcfg = cfg.reassembly_config()
    reports = []
    out = cfg.out / "compose"
    for entry in manifest["assets"]:
        asset = _load_asset(cfg, entry, "compose")
        d = cfg.out / "fields" / entry["id"]
        count = io.read_json(_require(d / "fields.json", "compose"))["count"]
        parts = [read_field(_require(d / f"seg_{k:02d}.pbpf", "compose")) for k in range(count)]
        whole = read_field(_require(d / "whole.pbpf", "compose"))
        rig = [Camera.from_dict(c) for c in io.read_json(cfg.out / "views" / entry["id"] / "rig.json")["cameras"]]
        report, renders = evaluate_reassembly(asset, parts, whole, rig[0], rcfg)
        reports.append(report)
        for v, (comp_rgb, flat_rgb, vis) in enumerate(renders):
            io.save_png(out / entry["id"] / f"view_{v}_compositional.png", comp_rgb)
            io.save_png(out / entry["id"] / f"view_{v}_unstructured.png", flat_rgb)
            for h in range(vis.shape[0]):
                io.write_pfm(out / entry["id"] / f"view_{v}_visibility_{h:02d}.pfm", vis[h])
    comp = [r["psnr_compositional"] for r in reports]
    flat = [r["psnr_unstructured"] for r in reports]
    summary = {
        "completer": rcfg.completer,
        "assets": len(reports),
        "psnr_compositional": float(np.mean(comp)),
        "psnr_unstructured": float(np.mean(flat)),
        "psnr_delta": float(np.mean(comp) - np.mean(flat)),
        "per_asset": reports,
        "not_reported": ["CLIP", "LPIPS"],
    }
    io.write_json(out / "report.json", summary)
    _write_csv(
        out / "report.csv",
        [{k: r[k] for k in ("asset", "n_parts", "n_segments", "psnr_compositional", "psnr_unstructured", "psnr_delta")} for r in reports],
    )
    if cfg.figures:
        plotting.reassembly_scatter(comp, flat, out / "reassembly_psnr.png")
    log.info("compose: delta PSNR %.3f dB", summary["psnr_delta"])
    return io.format_floats(summary)


# all ---------------------------------------------------------------------------------------


def cmd_all(cfg: PipelineConfig, completer: str | None = None) -> dict:
    stages = [
        ("gen", lambda: cmd_gen(cfg)),
        ("render", lambda: cmd_render(cfg)),
        ("segment", lambda: cmd_segment(cfg, "auto")),
        ("segment", lambda: cmd_segment(cfg, "seeded")),
        ("eval", lambda: cmd_eval(cfg)),
        ("complete", lambda: cmd_complete(cfg, completer)),
        ("carve", lambda: cmd_carve(cfg)),
        ("compose", lambda: cmd_compose(cfg)),
    ]
    results = {}
    for name, fn in stages:
        try:
            results[name] = fn()
        except StageError:
            raise
        except Exception as exc:  # any failure aborts with the stage id
            raise StageError(name, f"{type(exc).__name__}: {exc}") from exc
    ev, comp, rec = results["eval"], results["complete"], results["compose"]
    summary = {
        "format": "partbench-summary",
        "version": 1,
        "assets": cfg.dataset_size,
        "segmentation": {
            "mAP": ev["mAP"],
            "mAP_by_runs": ev["mAP_by_runs"],
            "seeded_mAP": ev["seeded_mAP"],
            "recall_at_k": ev["recall_at_k"],
        },
        "completion": {
            "mean_psnr": comp["mean_psnr"],
            "occluded_segments": comp["occluded_segments"],
            "ordering_rate": comp["ordering_rate"],
        },
        "reassembly": {k: rec[k] for k in ("completer", "psnr_compositional", "psnr_unstructured", "psnr_delta")},
        "not_reported": ["CLIP", "LPIPS"],
    }
    io.write_json(cfg.out / "summary.json", summary)
    return io.format_floats(summary)
