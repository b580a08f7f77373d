"""CLI for the embedding exporter.

    fseb-extract visual --image-root data/train --classes cat dog bird \
        --encoder toy --out train_a.fseb --manifest train_manifest.json
    fseb-extract text --classes cat dog bird --encoder toy --out text_a.fseb
"""

from __future__ import annotations

import argparse
import logging
import sys

from .encoders import make_encoder
from .extract import ExtractJob, extract_text, extract_visual


def _encoder_from_args(args):
    kwargs = {"dims": args.dims, "seed": args.seed}
    if args.encoder == "hf-clip":
        kwargs = {
            "model_name": args.model,
            "device": args.device,
            "batch_size": args.batch_size,
        }
    return make_encoder(args.encoder, **kwargs)


def _add_common(p):
    p.add_argument("--classes", nargs="+", required=True,
                   help="ordered class names; defines logit column order")
    p.add_argument("--encoder", choices=["toy", "hf-clip"], default="toy")
    p.add_argument("--model", default=None,
                   help="checkpoint id or path for the hf-clip encoder")
    p.add_argument("--device", default="cpu")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--dims", type=int, default=64, help="toy encoder output width")
    p.add_argument("--seed", type=int, default=0, help="toy encoder seed")
    p.add_argument("--prompt-template", default="a photo of a {class_name}")
    p.add_argument("--dataset-name", default="extracted")
    p.add_argument("--out", required=True, help="output FSEB path")


def build_parser():
    parser = argparse.ArgumentParser(prog="fseb-extract")
    sub = parser.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("visual", help="embed an image folder tree")
    v.add_argument("--image-root", required=True)
    v.add_argument("--manifest", default=None, help="output manifest JSON path")
    _add_common(v)

    t = sub.add_parser("text", help="embed one prompt per class")
    _add_common(t)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING)
    args = build_parser().parse_args(argv)
    try:
        encoder = _encoder_from_args(args)
        if args.cmd == "visual":
            job = ExtractJob(
                image_root=args.image_root,
                class_names=args.classes,
                output_embeddings=args.out,
                output_manifest=args.manifest,
                prompt_template=args.prompt_template,
                dataset_name=args.dataset_name,
            )
            summary = extract_visual(job, encoder)
        else:
            job = ExtractJob(
                image_root=None,
                class_names=args.classes,
                output_embeddings=args.out,
                prompt_template=args.prompt_template,
                dataset_name=args.dataset_name,
            )
            summary = extract_text(job, encoder)
        print(f"wrote {summary['rows']} rows to {args.out}")
        return 0
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
