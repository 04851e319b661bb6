"""Benchmark toolkit for part-level segmentation, completion and reassembly
of procedurally generated 3D assets."""

from .errors import PartbenchError
from .scene import Asset, PartPrimitive, GeneratorSpec, generate_asset, filter_asset, part_volume_fractions
from .camera import Camera, make_rig
from .render import MarchConfig, ViewBundle, render_views, foreground_psnr
from .segmap import Palette, make_palette, encode, decode
from .proposals import NoiseSpec, sample_noisy_oracle, rank_and_dedup, seeded_query
from .metrics import iou, greedy_match, average_precision, recall_at_k
from .completion import CompletionRequest, complete
from .recon import PartField, CarveConfig, carve, render_field
from .compose import Assembly, compose_render, merge_fields, reassembly_report

__version__ = "0.1.0"
