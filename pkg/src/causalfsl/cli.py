"""Command-line entry point.

Subcommands: ``gen`` (synthetic datasets), ``eval`` (per-method accuracy,
with optional cache fine-tuning), ``ablate`` (alpha/beta grid plus the
head-toggle table), and ``causal-verify`` (front-door property suite).
Reports are canonical JSON (sorted keys, no timestamps), so identical
flags and seed reproduce byte-identical files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import causal, synth
from .episodes import Episode, full_split_episode, subsample_shots
from .errors import CausalFSLError
from .predictors import METHODS, HyperParams, ablation_toggles, evaluate
from .store import Manifest, load_unit_rows, write_embeddings
from .trainer import TrainConfig, train_cache

FORMAT_VERSION = 1

DEFAULT_ALPHA_GRID = [1.0, 10.0, 100.0, 1000.0, 10000.0]
DEFAULT_BETA_GRID = [0.3, 0.45, 0.6, 0.75, 0.9]


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def emit(report: dict, out: str | None) -> None:
    text = canonical_json(report)
    if out:
        Path(out).write_text(text)
    sys.stdout.write(text)


@dataclasses.dataclass
class LoadedData:
    train_manifest: Manifest
    test_manifest: Manifest
    train_a: np.ndarray
    train_b: np.ndarray | None
    test_a: np.ndarray
    test_b: np.ndarray | None
    text_a: np.ndarray | None
    text_b: np.ndarray | None
    renorm_warnings: int


def load_data_dir(path, shots: int | None = None, seed: int = 0) -> LoadedData:
    d = Path(path)

    def opt(name):
        p = d / name
        if not p.exists():
            return None, 0
        return load_unit_rows(p)

    train_a, w1 = load_unit_rows(d / "train_a.fseb")
    test_a, w2 = load_unit_rows(d / "test_a.fseb")
    train_b, w3 = opt("train_b.fseb")
    test_b, w4 = opt("test_b.fseb")
    text_a, w5 = opt("text_a.fseb")
    text_b, w6 = opt("text_b.fseb")

    train_manifest = Manifest.load(d / "train_manifest.json")
    test_manifest = Manifest.load(d / "test_manifest.json")
    if shots is not None:
        train_manifest = subsample_shots(train_manifest, shots, seed)

    return LoadedData(
        train_manifest=train_manifest,
        test_manifest=test_manifest,
        train_a=train_a,
        train_b=train_b,
        test_a=test_a,
        test_b=test_b,
        text_a=text_a,
        text_b=text_b,
        renorm_warnings=w1 + w2 + w3 + w4 + w5 + w6,
    )


def build_episode(data: LoadedData) -> Episode:
    return full_split_episode(
        data.train_manifest,
        data.test_manifest,
        data.train_a,
        data.test_a,
        train_features_alt=data.train_b,
        test_features_alt=data.test_b,
    )


def require_inputs(method: str, data: LoadedData) -> None:
    missing = []
    if method in ("tip", "zs-clip", "ours", "ours-f") and data.text_a is None:
        missing.append("text_a.fseb")
    if method in ("zs-blip", "ours", "ours-f"):
        if data.text_b is None:
            missing.append("text_b.fseb")
        if data.test_b is None:
            missing.append("test_b.fseb")
    if missing:
        raise CausalFSLError(f"method {method!r} needs missing inputs: {missing}")


def hp_from_args(args) -> HyperParams:
    return HyperParams(alpha=args.alpha, beta=args.beta, tip_alpha=args.tip_alpha)


def config_echo(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys}


def cmd_gen(args) -> int:
    spec = synth.SynthSpec(
        n_classes=args.n_classes,
        dims=args.dims,
        train_per_class=args.train_per_class,
        test_per_class=args.test_per_class,
        visual_noise=args.visual_noise,
        text_noise_a=args.text_noise_a,
        text_noise_b=args.text_noise_b,
        seed=args.seed,
    )
    ds = synth.generate(spec)
    synth.write_dataset(ds, args.out)
    print(f"wrote synthetic dataset to {args.out}")
    return 0


def _eval_one(method, episode, data, hp, args):
    require_inputs(method, data)
    entry = {}
    if method == "ours-f":
        cfg = TrainConfig(
            epochs=args.epochs,
            lr=args.lr,
            batch_size=args.batch_size,
            hp=hp,
            seed=args.seed,
        )
        cache, trace = train_cache(
            episode, cfg, text_heads=data.text_a, text_heads_alt=data.text_b
        )
        episode = dataclasses.replace(episode, support_features=cache)
        entry["loss_trace"] = trace
        if args.save_cache:
            write_embeddings(args.save_cache, cache)
            log = {
                "config": {
                    "epochs": cfg.epochs,
                    "lr": cfg.lr,
                    "batch_size": cfg.batch_size,
                    "seed": cfg.seed,
                    "alpha": hp.alpha,
                    "beta": hp.beta,
                },
                "loss_trace": trace,
            }
            Path(str(args.save_cache) + ".log.json").write_text(canonical_json(log))
    entry.update(
        evaluate(episode, method, hp, text_heads=data.text_a, text_heads_alt=data.text_b)
    )
    return entry


def print_accuracy_table(results: list[dict]) -> None:
    width = max(len(r["method"]) for r in results)
    print(f"{'method':<{width}}  accuracy")
    for r in results:
        print(f"{r['method']:<{width}}  {100.0 * r['accuracy']:7.2f}")


def cmd_eval(args) -> int:
    methods = args.method.split(",")
    for m in methods:
        if m not in METHODS:
            raise CausalFSLError(f"unknown method {m!r}; choose from {METHODS}")
    data = load_data_dir(args.data_dir, shots=args.shots, seed=args.seed)
    for m in methods:
        require_inputs(m, data)  # reject before any compute or writes
    episode = build_episode(data)
    hp = hp_from_args(args)

    results = [_eval_one(m, episode, data, hp, args) for m in methods]
    report = {
        "format_version": FORMAT_VERSION,
        "command": "eval",
        "config": config_echo(
            args,
            ["data_dir", "method", "alpha", "beta", "tip_alpha", "shots",
             "epochs", "lr", "batch_size", "seed"],
        ),
        "renormalized_rows": data.renorm_warnings,
        "results": results,
    }
    print_accuracy_table(results)
    emit(report, args.out)
    return 0


def cmd_ablate(args) -> int:
    data = load_data_dir(args.data_dir, shots=args.shots, seed=args.seed)
    require_inputs("ours", data)
    episode = build_episode(data)

    grid = []
    for a in args.alpha_grid:
        for b in args.beta_grid:
            hp = HyperParams(alpha=a, beta=b, tip_alpha=args.tip_alpha)
            r = evaluate(episode, "ours", hp, data.text_a, data.text_b)
            grid.append({"alpha": a, "beta": b, "accuracy": r["accuracy"]})

    hp = hp_from_args(args)
    toggles = ablation_toggles(episode, hp, data.text_a, data.text_b)

    print("alpha      beta   accuracy")
    for cell in grid:
        print(f"{cell['alpha']:<9g}  {cell['beta']:<5g}  {100.0 * cell['accuracy']:6.2f}")
    print("\np1 p2 p3  accuracy")
    for row in toggles:
        marks = "".join(" x" if row[k] else " ." for k in ("p1", "p2", "p3"))
        print(f"{marks}   {100.0 * row['accuracy']:6.2f}")

    report = {
        "format_version": FORMAT_VERSION,
        "command": "ablate",
        "config": config_echo(
            args,
            ["data_dir", "alpha_grid", "beta_grid", "alpha", "beta",
             "tip_alpha", "shots", "seed"],
        ),
        "grid": grid,
        "toggles": toggles,
    }
    emit(report, args.out)
    return 0


def cmd_causal_verify(args) -> int:
    cards = tuple(args.cards)
    tol = 1e-10
    worst = {"frontdoor": 0.0, "partial_z": 0.0, "partial_y": 0.0, "collapse": 0.0}
    failures = []

    for seed in range(args.seeds):
        scm = causal.random_scm(cards, seed=seed, concentration=args.concentration)
        scm_obs = scm
        if args.inject_fault and seed == 0:
            # Feed the estimator a perturbed mediator table while keeping
            # the truth route on the original SCM; the suite must notice.
            bad = scm.p_z_given_x * 0.5 + 0.5 / cards[2]
            scm_obs = dataclasses.replace(scm, p_z_given_x=bad)

        for x in range(cards[1]):
            est = causal.frontdoor_estimate(scm_obs, x)
            truth = causal.interventional_truth(scm, x)
            dev = float(np.max(np.abs(est - truth)))
            worst["frontdoor"] = max(worst["frontdoor"], dev)
            if dev > tol:
                failures.append({"seed": seed, "x": x, "check": "frontdoor", "dev": dev})
            if cards[0] == 1:
                cdev = float(
                    np.max(np.abs(est - causal.observational_conditional(scm, x)))
                )
                worst["collapse"] = max(worst["collapse"], cdev)
                if cdev > tol:
                    failures.append(
                        {"seed": seed, "x": x, "check": "collapse", "dev": cdev}
                    )

        pe = causal.partial_effects(scm)
        worst["partial_z"] = max(worst["partial_z"], pe["max_dev_z_do_x"])
        worst["partial_y"] = max(worst["partial_y"], pe["max_dev_y_do_z"])
        if pe["max_dev_z_do_x"] > tol or pe["max_dev_y_do_z"] > tol:
            failures.append({"seed": seed, "check": "partial_effects", **pe})

    passed = not failures
    report = {
        "format_version": FORMAT_VERSION,
        "command": "causal-verify",
        "config": config_echo(args, ["seeds", "cards", "concentration", "inject_fault"]),
        "tolerance": tol,
        "worst_deviation": worst,
        "failures": failures[:20],
        "pass": passed,
    }
    print(f"causal-verify: {'PASS' if passed else 'FAIL'} "
          f"(worst frontdoor dev {worst['frontdoor']:.3e})")
    emit(report, args.out)
    return 0 if passed else 1


def _add_hp_flags(p):
    p.add_argument("--alpha", type=float, default=100.0)
    p.add_argument("--beta", type=float, default=0.6)
    p.add_argument("--tip-alpha", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causalfsl")
    sub = parser.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset directory")
    g.add_argument("--out", required=True)
    g.add_argument("--n-classes", type=int, default=10)
    g.add_argument("--dims", type=int, default=64)
    g.add_argument("--train-per-class", type=int, default=16)
    g.add_argument("--test-per-class", type=int, default=20)
    g.add_argument("--visual-noise", type=float, default=0.35)
    g.add_argument("--text-noise-a", type=float, default=0.2)
    g.add_argument("--text-noise-b", type=float, default=0.2)
    g.add_argument("--seed", type=int, default=42)
    g.set_defaults(fn=cmd_gen)

    e = sub.add_parser("eval", help="evaluate methods on a dataset directory")
    e.add_argument("--data-dir", required=True)
    e.add_argument("--method", default="ours",
                   help="comma-separated subset of " + ",".join(METHODS))
    _add_hp_flags(e)
    e.add_argument("--shots", type=int, default=None,
                   help="subsample the train manifest to this many shots per class")
    e.add_argument("--epochs", type=int, default=20)
    e.add_argument("--lr", type=float, default=1e-3)
    e.add_argument("--batch-size", type=int, default=256)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--save-cache", default=None,
                   help="write the fine-tuned cache (FSEB) and a training log here")
    e.add_argument("--out", default=None)
    e.set_defaults(fn=cmd_eval)

    a = sub.add_parser("ablate", help="alpha/beta grid and head-toggle table")
    a.add_argument("--data-dir", required=True)
    a.add_argument("--alpha-grid", type=float, nargs="+", default=DEFAULT_ALPHA_GRID)
    a.add_argument("--beta-grid", type=float, nargs="+", default=DEFAULT_BETA_GRID)
    _add_hp_flags(a)
    a.add_argument("--shots", type=int, default=None)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", default=None)
    a.set_defaults(fn=cmd_ablate)

    c = sub.add_parser("causal-verify", help="run the front-door property suite")
    c.add_argument("--seeds", type=int, default=100)
    c.add_argument("--cards", type=int, nargs=4, default=[4, 4, 4, 4])
    c.add_argument("--concentration", type=float, default=1.0)
    c.add_argument("--inject-fault", action="store_true",
                   help="perturb one table to confirm the suite can fail")
    c.add_argument("--out", default=None)
    c.set_defaults(fn=cmd_causal_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (CausalFSLError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
