"""Exact inference on discrete structural causal models over the graph
U -> X, U -> Y, X -> Z, Z -> Y.

Three routes to P(y | do(x)) coexist here on purpose:

  * ``interventional_truth`` evaluates the mutilated graph directly,
  * ``frontdoor_estimate`` uses only quantities readable off the
    observational joint (the mediator adjustment),
  * property suites additionally cross-check against naive enumeration.

All tables are float64 numpy arrays; sums are exact to ~1e-12 at the
cardinalities this module targets (<= 6 per variable).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .episodes import rng_for
from .errors import InvalidTablesError, PositivityViolationError

logger = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteSCM:
    """Probability tables for the four-variable confounded mediator graph."""

    p_u: np.ndarray          # (U,)
    p_x_given_u: np.ndarray  # (U, X)
    p_z_given_x: np.ndarray  # (X, Z)
    p_y_given_zu: np.ndarray # (Z, U, Y)

    @property
    def cards(self) -> tuple[int, int, int, int]:
        return (
            self.p_u.shape[0],
            self.p_x_given_u.shape[1],
            self.p_z_given_x.shape[1],
            self.p_y_given_zu.shape[2],
        )

    def validate(self) -> None:
        u, x, z, y = self.cards
        shapes = {
            "p_u": (self.p_u, (u,)),
            "p_x_given_u": (self.p_x_given_u, (u, x)),
            "p_z_given_x": (self.p_z_given_x, (x, z)),
            "p_y_given_zu": (self.p_y_given_zu, (z, u, y)),
        }
        for name, (table, shape) in shapes.items():
            if table.shape != shape:
                raise InvalidTablesError(f"{name} has shape {table.shape}, want {shape}")
            if np.any(table < 0) or not np.all(np.isfinite(table)):
                raise InvalidTablesError(f"{name} has negative or non-finite entries")
            sums = np.sum(table, axis=-1)
            if np.any(np.abs(sums - 1.0) > ROW_SUM_TOL):
                raise InvalidTablesError(
                    f"{name} rows do not sum to 1 (max dev "
                    f"{np.max(np.abs(sums - 1.0)):.3e})"
                )

    def to_json(self) -> dict:
        return {
            "cards": list(self.cards),
            "p_u": self.p_u.ravel().tolist(),
            "p_x_given_u": self.p_x_given_u.ravel().tolist(),
            "p_z_given_x": self.p_z_given_x.ravel().tolist(),
            "p_y_given_zu": self.p_y_given_zu.ravel().tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DiscreteSCM":
        u, x, z, y = obj["cards"]
        scm = cls(
            p_u=np.asarray(obj["p_u"], dtype=np.float64).reshape(u),
            p_x_given_u=np.asarray(obj["p_x_given_u"], dtype=np.float64).reshape(u, x),
            p_z_given_x=np.asarray(obj["p_z_given_x"], dtype=np.float64).reshape(x, z),
            p_y_given_zu=np.asarray(obj["p_y_given_zu"], dtype=np.float64).reshape(z, u, y),
        )
        scm.validate()
        return scm

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True))

    @classmethod
    def load(cls, path) -> "DiscreteSCM":
        return cls.from_json(json.loads(Path(path).read_text()))


def observational_joint(scm: DiscreteSCM) -> np.ndarray:
    """P(u, x, z, y) from the graph factorization; sums to 1."""
    scm.validate()
    return np.einsum(
        "u,ux,xz,zuy->uxzy",
        scm.p_u,
        scm.p_x_given_u,
        scm.p_z_given_x,
        scm.p_y_given_zu,
    )


def observational_conditional(scm: DiscreteSCM, x: int) -> np.ndarray:
    """P(y | x) from the observational joint."""
    joint = observational_joint(scm)
    p_xy = joint.sum(axis=(0, 2))  # (X, Y)
    return p_xy[x] / p_xy[x].sum()


def interventional_truth(scm: DiscreteSCM, x: int) -> np.ndarray:
    """P(y | do(x)) by mutilating the graph: cut U -> X, clamp X = x."""
    scm.validate()
    # sum_u P(u) sum_z P(z|x) P(y|z,u)
    return np.einsum("u,z,zuy->y", scm.p_u, scm.p_z_given_x[x], scm.p_y_given_zu)


def frontdoor_estimate(scm: DiscreteSCM, x: int, strict: bool = True) -> np.ndarray:
    """P(y | do(x)) via the mediator, using only observational quantities.

    sum_z P(z|x) sum_x' P(y|x',z) P(x'). With ``strict`` on, any zero-mass
    (x', z) cell raises PositivityViolationError; otherwise those terms are
    skipped with a warning.
    """
    joint = observational_joint(scm)
    p_xz = joint.sum(axis=(0, 3))    # (X, Z)
    p_xzy = joint.sum(axis=0)        # (X, Z, Y)
    p_x = p_xz.sum(axis=1)           # (X,)
    p_z_given_x = p_xz[x] / p_x[x]

    zero_cells = p_xz == 0.0
    if np.any(zero_cells):
        if strict:
            xi, zi = np.argwhere(zero_cells)[0]
            raise PositivityViolationError(
                f"P(x'={xi}, z={zi}) = 0; conditional undefined"
            )
        logger.warning(
            "skipping %d zero-mass (x', z) cells in the mediator adjustment",
            int(np.count_nonzero(zero_cells)),
        )

    n_y = scm.cards[3]
    out = np.zeros(n_y, dtype=np.float64)
    for z in range(scm.cards[2]):
        inner = np.zeros(n_y, dtype=np.float64)
        for xp in range(scm.cards[1]):
            if p_xz[xp, z] == 0.0:
                continue
            inner += p_x[xp] * (p_xzy[xp, z] / p_xz[xp, z])
        out += p_z_given_x[z] * inner
    return out


def partial_effects(scm: DiscreteSCM) -> dict:
    """Check the two mediation identities against graph mutilation.

    * P(z | do(x)) must equal the observational P(z | x).
    * P(y | do(z)) must equal sum_x' P(x') P(y | x', z).

    Both do-quantities come from mutilated-graph enumeration. Returns a
    report with the worst absolute deviation for each identity.
    """
    scm.validate()
    joint = observational_joint(scm)
    p_xz = joint.sum(axis=(0, 3))
    p_xzy = joint.sum(axis=0)
    p_x = p_xz.sum(axis=1)

    # do(x): cut U -> X; joint over (u, z) is P(u) P(z|x).
    dev_zx = 0.0
    for x in range(scm.cards[1]):
        p_z_do_x = np.einsum("u,z->z", scm.p_u, scm.p_z_given_x[x])
        p_z_obs = p_xz[x] / p_x[x]
        dev_zx = max(dev_zx, float(np.max(np.abs(p_z_do_x - p_z_obs))))

    # do(z): cut X -> Z; joint over (u, x, y) is P(u) P(x|u) P(y|z,u).
    dev_yz = 0.0
    for z in range(scm.cards[2]):
        p_y_do_z = np.einsum("u,ux,uy->y", scm.p_u, scm.p_x_given_u, scm.p_y_given_zu[z])
        adjusted = np.zeros(scm.cards[3], dtype=np.float64)
        for xp in range(scm.cards[1]):
            if p_xz[xp, z] == 0.0:
                continue
            adjusted += p_x[xp] * (p_xzy[xp, z] / p_xz[xp, z])
        dev_yz = max(dev_yz, float(np.max(np.abs(p_y_do_z - adjusted))))

    return {"max_dev_z_do_x": dev_zx, "max_dev_y_do_z": dev_yz}


def random_scm(cards, seed: int, concentration: float = 1.0) -> DiscreteSCM:
    """Random SCM with rows drawn from a symmetric Dirichlet; deterministic
    per seed. Entries are strictly positive for concentration >= 1 (up to
    floating point)."""
    u, x, z, y = cards
    rng = rng_for(seed)

    def rows(shape, k):
        flat = rng.dirichlet(np.full(k, concentration), size=int(np.prod(shape)))
        return flat.reshape(*shape, k)

    scm = DiscreteSCM(
        p_u=rng.dirichlet(np.full(u, concentration)),
        p_x_given_u=rows((u,), x),
        p_z_given_x=rows((x,), z),
        p_y_given_zu=rows((z, u), y),
    )
    scm.validate()
    return scm


def confounded_witness() -> DiscreteSCM:
    """Fixed SCM where the confounder drives both X and Y strongly while
    the mediator barely matters, so P(y|x) is far from P(y|do(x))."""
    return DiscreteSCM(
        p_u=np.array([0.5, 0.5]),
        p_x_given_u=np.array([[0.9, 0.1], [0.1, 0.9]]),
        p_z_given_x=np.array([[0.8, 0.2], [0.2, 0.8]]),
        p_y_given_zu=np.array(
            [
                # z = 0
                [[0.90, 0.10], [0.10, 0.90]],  # rows: u = 0, u = 1
                # z = 1
                [[0.85, 0.15], [0.15, 0.85]],
            ]
        ),
    )


def total_variation(p, q) -> float:
    return float(0.5 * np.sum(np.abs(np.asarray(p) - np.asarray(q))))
