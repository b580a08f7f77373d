"""Batch embedding exporter: image folders and class prompts to FSEB files
plus JSON manifests."""

from .encoders import HFClipEncoder, ToyEncoder, make_encoder
from .extract import ExtractJob, extract_text, extract_visual
from .formats import write_fseb, write_manifest

__version__ = "0.1.0"
