"""Acceptance suite: each test prints one PASS/FAIL line for its criterion."""

import time

import numpy as np
import pytest

from causalfsl.causal import (
    confounded_witness,
    frontdoor_estimate,
    interventional_truth,
    observational_conditional,
    partial_effects,
    random_scm,
    total_variation,
)
from causalfsl.cli import main
from causalfsl.episodes import full_split_episode
from causalfsl.numerics import l2_normalize_rows
from causalfsl.predictors import (
    HyperParams,
    ablation_toggles,
    argmax_class,
    attention_p1,
    combine,
    evaluate,
    matching_networks,
    prototypical_networks,
    tip_adapter_logits,
    zero_shot_logits,
)
from causalfsl.synth import SynthSpec, generate
from causalfsl.trainer import TrainBatch, TrainConfig, grad_check, loss_and_grad, train_cache


def report(name, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name} {detail}")
    assert ok, f"{name}: {detail}"


def test_frontdoor_identity_100_seeds():
    start = time.monotonic()
    worst = 0.0
    for seed in range(100):
        scm = random_scm((6, 6, 6, 6), seed=seed)
        for x in range(6):
            dev = float(
                np.max(np.abs(frontdoor_estimate(scm, x) - interventional_truth(scm, x)))
            )
            worst = max(worst, dev)
    elapsed = time.monotonic() - start
    report(
        "front-door identity (100 seeds, cards 6,6,6,6)",
        worst <= 1e-10 and elapsed < 10.0,
        f"worst dev {worst:.3e}, {elapsed:.2f}s",
    )


def test_confounding_witness():
    scm = confounded_witness()
    min_gap, worst_dev = np.inf, 0.0
    for x in range(2):
        obs = observational_conditional(scm, x)
        truth = interventional_truth(scm, x)
        est = frontdoor_estimate(scm, x)
        min_gap = min(min_gap, total_variation(obs, truth))
        worst_dev = max(worst_dev, float(np.max(np.abs(est - truth))))
    report(
        "confounding witness",
        min_gap >= 0.05 and worst_dev <= 1e-10,
        f"tv gap {min_gap:.3f}, frontdoor dev {worst_dev:.3e}",
    )


def test_partial_effects_100_seeds():
    worst_z, worst_y = 0.0, 0.0
    for seed in range(100):
        pe = partial_effects(random_scm((4, 4, 4, 4), seed=seed))
        worst_z = max(worst_z, pe["max_dev_z_do_x"])
        worst_y = max(worst_y, pe["max_dev_y_do_z"])
    report(
        "partial effects (100 seeds)",
        worst_z <= 1e-10 and worst_y <= 1e-10,
        f"dev z|do(x) {worst_z:.3e}, y|do(z) {worst_y:.3e}",
    )


def _random_train_batch(seed):
    rng = np.random.Generator(np.random.Philox(seed))
    cache = l2_normalize_rows(rng.standard_normal((6, 4)))
    support_labels = np.zeros((6, 3))
    for j in range(6):
        support_labels[j, j % 3] = 1.0
    queries = l2_normalize_rows(rng.standard_normal((2, 4)))
    return cache, TrainBatch(
        queries=queries,
        labels=rng.integers(0, 3, size=2),
        support_labels=support_labels,
        text_heads=l2_normalize_rows(rng.standard_normal((3, 4))),
        text_heads_alt=l2_normalize_rows(rng.standard_normal((3, 4))),
    )


def test_gradient_correctness():
    hp = HyperParams(alpha=2.0, beta=0.4)
    worst = 0.0
    for seed in range(20):
        cache, batch = _random_train_batch(seed)
        worst = max(worst, grad_check(cache, batch, hp, h=1e-6))

    # self-test: a corrupted analytic gradient must be flagged
    cache, batch = _random_train_batch(0)
    _, analytic = loss_and_grad(cache, batch, hp)
    corrupted = analytic.copy()
    corrupted[0, 0] += 1.0
    h = 1e-6
    numeric = np.zeros_like(cache)
    for i in range(cache.shape[0]):
        for j in range(cache.shape[1]):
            plus, minus = cache.copy(), cache.copy()
            plus[i, j] += h
            minus[i, j] -= h
            numeric[i, j] = (
                loss_and_grad(plus, batch, hp)[0] - loss_and_grad(minus, batch, hp)[0]
            ) / (2 * h)
    fault_err = float(
        np.max(np.abs(corrupted - numeric) / np.maximum(1.0, np.abs(numeric)))
    )
    report(
        "gradient correctness (20 configs + fault self-test)",
        worst <= 1e-4 and fault_err >= 0.5,
        f"max rel err {worst:.3e}, fault err {fault_err:.3f}",
    )


def test_compositional_identities():
    rng = np.random.Generator(np.random.Philox(321))
    ok = True
    details = []
    for seed in range(10):
        f = l2_normalize_rows(rng.standard_normal((4, 5)))
        labels = np.zeros((4, 2))
        for j in range(4):
            labels[j, j % 2] = 1.0
        heads = l2_normalize_rows(rng.standard_normal((2, 5)))
        heads_alt = l2_normalize_rows(rng.standard_normal((2, 5)))
        q = l2_normalize_rows(rng.standard_normal((1, 5)))[0]
        ta = float(rng.uniform(0.0, 5.0))

        p1 = attention_p1(q, f, labels)
        p2 = zero_shot_logits(q, heads)
        p3 = zero_shot_logits(q, heads_alt)

        tip = tip_adapter_logits(q, f, labels, heads, ta)
        ok &= bool(np.max(np.abs(tip - (ta * p1 + p2))) <= 1e-12)
        ok &= bool(
            np.max(np.abs(combine(p1, p2, p3, HyperParams(alpha=0.0)) - p1)) <= 1e-12
        )
        hp = HyperParams(alpha=3.5, beta=1.0)
        ok &= bool(
            np.max(np.abs(combine(p1, p2, p3, hp) - (p1 + 3.5 * p2))) <= 1e-12
        )
        # K = 1: prototypes collapse to the lone support
        f1 = l2_normalize_rows(rng.standard_normal((3, 5)))
        l1 = np.eye(3)
        ok &= argmax_class(prototypical_networks(q, f1, l1)) == argmax_class(
            matching_networks(q, f1, l1)
        )
    report("compositional identities", ok, "; ".join(details))


def test_desk_scale_ablation_pattern():
    ds = generate(SynthSpec())  # seed 42, 10-way 16-shot, d=64
    ep = full_split_episode(
        ds.train_manifest,
        ds.test_manifest,
        ds.train_a,
        ds.test_a,
        train_features_alt=ds.train_b,
        test_features_alt=ds.test_b,
    )
    hp = HyperParams()
    toggles = {
        (r["p1"], r["p2"], r["p3"]): r["accuracy"]
        for r in ablation_toggles(ep, hp, ds.text_a, ds.text_b)
    }
    combined = toggles[(True, True, True)]
    singles = [
        toggles[(True, False, False)],
        toggles[(False, True, False)],
        toggles[(False, False, True)],
    ]

    untuned = evaluate(ep, "ours", hp, ds.text_a, ds.text_b)["accuracy"]
    cfg = TrainConfig(hp=hp, seed=0)
    cache, _ = train_cache(ep, cfg, ds.text_a, ds.text_b)
    import dataclasses

    tuned_ep = dataclasses.replace(ep, support_features=cache)
    tuned = evaluate(tuned_ep, "ours", hp, ds.text_a, ds.text_b)["accuracy"]

    ok = all(combined >= s for s in singles) and tuned >= untuned
    report(
        "desk-scale ablation pattern",
        ok,
        f"combined {combined:.3f} vs singles {singles}, tuned {tuned:.3f} >= "
        f"untuned {untuned:.3f}",
    )


def test_cli_determinism(tmp_path):
    d = tmp_path / "data"
    assert main(["gen", "--out", str(d), "--seed", "42"]) == 0
    outs = []
    for name in ("r1.json", "r2.json"):
        out = tmp_path / name
        rc = main([
            "eval", "--data-dir", str(d), "--method", "ours,ours-f",
            "--epochs", "3", "--seed", "7", "--out", str(out),
        ])
        assert rc == 0
        outs.append(out.read_bytes())
    cv = []
    for name in ("c1.json", "c2.json"):
        out = tmp_path / name
        assert main(["causal-verify", "--seeds", "10", "--out", str(out)]) == 0
        cv.append(out.read_bytes())
    report(
        "CLI determinism (byte-identical reports)",
        outs[0] == outs[1] and cv[0] == cv[1],
    )
