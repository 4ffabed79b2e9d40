"""Best responses and the induced payoffs of the classification game.

The institution publishes a classifier ``f``; each contestant at grid point x
then moves to whichever point maximises acceptance probability net of the
manipulation cost, staying put unless a move is a strict improvement.  The
institution's utility is the accuracy it collects after everyone has moved,
and the cost of strategy is the manipulation spend of the qualified mass.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import Classifier, CostFunction, Population

__all__ = [
    "BestResponse",
    "KnifeEdgeWarning",
    "best_response",
    "utility",
    "strategy_cost",
    "efficiency",
    "KNIFE_EDGE_ATOL",
]

# Pairs whose gain sits this close to their cost are numerically knife-edge:
# the strict ">" in the best response can flip under one-ulp perturbations.
KNIFE_EDGE_ATOL = 1e-12


class KnifeEdgeWarning(UserWarning):
    """A gain ties its cost to within KNIFE_EDGE_ATOL; tie-break is in play."""


@dataclass(frozen=True, eq=False)
class BestResponse:
    """Where each grid point moves under a published classifier."""

    target: np.ndarray  # target[i] = index the contestant at i reports
    moved: np.ndarray  # boolean, target[i] != i

    def __post_init__(self):
        for name in ("target", "moved"):
            arr = getattr(self, name)
            arr = np.asarray(arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def _target_indices(values: np.ndarray, costs: np.ndarray) -> np.ndarray:
    """Best-response targets for acceptance values ``values`` and cost matrix.

    A move i -> j is available iff values[j] - values[i] exceeds
    costs[i, j] by more than KNIFE_EDGE_ATOL.  A gain that merely ties its
    cost must stay put, and a float pipeline cannot hold that line with an
    exact ">": kernel arithmetic wobbles saturated acceptance values by an
    ulp, which would turn cost-free sideways moves into phantom strict
    improvements.  So the comparison demands a margin no wider than the
    knife-edge band already flagged as untrustworthy; within the band the
    contestant stays and a KnifeEdgeWarning fires.  Among available moves
    (plus staying put) the contestant picks the highest value; ties go to
    the smallest grid index.  Because costs are nonnegative, any available
    move strictly beats staying, so the stay option only wins when no move
    is available.
    """
    q = values
    gains = q[None, :] - q[:, None]
    mask = gains > costs + KNIFE_EDGE_ATOL
    np.fill_diagonal(mask, False)

    near = (gains > 0) & (np.abs(gains - costs) < KNIFE_EDGE_ATOL)
    np.fill_diagonal(near, False)
    if np.any(near):
        i, j = [int(v[0]) for v in np.nonzero(near)]
        warnings.warn(
            f"gain ties cost to within {KNIFE_EDGE_ATOL:g} for move {i} -> {j}; "
            "contestants inside this band stay put, but the outcome is "
            "sensitive to rounding",
            KnifeEdgeWarning,
            stacklevel=3,
        )

    cand = np.where(mask, q[None, :], -np.inf)
    best = cand.max(axis=1)
    top = np.maximum(q, best)
    attain = cand == top[:, None]
    idx = np.arange(q.size)
    attain[idx, idx] |= q == top
    return attain.argmax(axis=1)


def best_response(f: Classifier, c: CostFunction) -> BestResponse:
    """Each point's strict-improvement move under classifier ``f``."""
    if not f.space.matches(c.space):
        raise ValueError("classifier and cost function live on different grids")
    target = _target_indices(f.probs, c.costs)
    moved = target != np.arange(f.space.n)
    return BestResponse(target=target, moved=moved)


def _accuracy(pi: np.ndarray, h: np.ndarray, accepted: np.ndarray) -> float:
    """Expected accuracy when point i is accepted with probability accepted[i]."""
    return float(np.dot(pi, accepted * (2.0 * h - 1.0) + (1.0 - h)))


def _strategy_cost(
    pi: np.ndarray, h: np.ndarray, costs: np.ndarray, target: np.ndarray
) -> float:
    """Manipulation spend of the qualified mass under targets ``target``."""
    n = pi.size
    return float(np.dot(pi * h, costs[np.arange(n), target]))


def utility(f: Classifier, pop: Population, c: CostFunction) -> float:
    """Institution's expected accuracy after contestants best-respond."""
    br = best_response(f, c)
    return _accuracy(pop.pi, pop.h, f.probs[br.target])


def strategy_cost(f: Classifier, pop: Population, c: CostFunction) -> float:
    """Expected manipulation cost paid by qualified contestants."""
    br = best_response(f, c)
    return _strategy_cost(pop.pi, pop.h, c.costs, br.target)


def efficiency(
    f: Classifier, pop: Population, c: CostFunction, beta: float = 1.0
) -> float:
    """Utility minus ``beta`` times the cost of strategy, in one pass."""
    br = best_response(f, c)
    u = _accuracy(pop.pi, pop.h, f.probs[br.target])
    k = _strategy_cost(pop.pi, pop.h, c.costs, br.target)
    return u - beta * k
