"""Few-shot classification engine: cache attention over support embeddings,
dual zero-shot text heads combined linearly, baselines, and an exact
discrete-SCM verifier for the mediator (front-door) adjustment."""

from .causal import (
    DiscreteSCM,
    confounded_witness,
    frontdoor_estimate,
    interventional_truth,
    observational_joint,
    partial_effects,
    random_scm,
)
from .episodes import Episode, full_split_episode, sample_episode, subsample_shots
from .numerics import (
    OptimizerState,
    adamw_step,
    cross_entropy,
    l2_normalize_rows,
    softmax,
)
from .predictors import (
    HyperParams,
    PredictionBreakdown,
    attention_p1,
    combine,
    evaluate,
    matching_networks,
    prototypical_networks,
    tip_adapter_logits,
    zero_shot_logits,
)
from .store import Manifest, ManifestItem, build_onehot, read_embeddings, write_embeddings
from .synth import SynthSpec, generate
from .trainer import TrainBatch, TrainConfig, grad_check, loss_and_grad, train_cache

__version__ = "0.1.0"
