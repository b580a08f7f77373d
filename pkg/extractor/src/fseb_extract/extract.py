"""Batch extraction jobs: image folders -> FSEB + manifest, class names ->
FSEB text heads.

Image layout: ``image_root/<class_name>/<image files>``. Manifest class
order equals the job's class-name order (the logit alignment contract),
and row order equals manifest item order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .formats import write_fseb, write_manifest

logger = logging.getLogger(__name__)

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp", ".webp"}


@dataclass
class ExtractJob:
    image_root: str | None
    class_names: list[str]
    output_embeddings: str
    output_manifest: str | None = None
    prompt_template: str = "a photo of a {class_name}"
    dataset_name: str = "extracted"

    def __post_init__(self):
        if not self.class_names:
            raise ValueError("class name list must not be empty")


def _class_images(root: Path, class_name: str) -> list[Path]:
    d = root / class_name
    if not d.is_dir():
        return []
    return sorted(p for p in d.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS)


def extract_visual(job: ExtractJob, encoder) -> dict:
    """Embed every readable image under the class folders.

    Unreadable images are skipped with a warning and excluded from the
    manifest. Returns a summary dict (rows, skipped).
    """
    root = Path(job.image_root)
    rows, items, skipped = [], [], 0
    row_index = 0
    for class_index, class_name in enumerate(job.class_names):
        for path in _class_images(root, class_name):
            try:
                vec = encoder.encode_images([path])[0]
            except OSError as exc:
                logger.warning("skipping unreadable image %s: %s", path, exc)
                skipped += 1
                continue
            rows.append(vec)
            items.append((f"{class_name}/{path.name}", class_index, row_index))
            row_index += 1

    if not rows:
        raise ValueError(f"no readable images under {root}")
    write_fseb(job.output_embeddings, np.stack(rows))
    if job.output_manifest:
        write_manifest(job.output_manifest, job.dataset_name, job.class_names, items)
    return {"rows": len(rows), "skipped": skipped}


def extract_text(job: ExtractJob, encoder) -> dict:
    """Embed one prompt per class; row order equals class order."""
    prompts = [
        job.prompt_template.format(class_name=name) for name in job.class_names
    ]
    write_fseb(job.output_embeddings, encoder.encode_texts(prompts))
    return {"rows": len(prompts)}
