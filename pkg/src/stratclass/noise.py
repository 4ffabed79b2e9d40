"""The game observed through a noisy feature channel, and subpopulations.

With a noise kernel in play, a contestant who reports signal x is observed at
x' with probability ``rows[x, x']``, so the published classifier ``f`` acts
on contestants through its effective acceptance curve q = rows @ f.
Contestants best-respond to q exactly as they would to a classifier.

Subpopulation scenarios share one feature distribution and one kernel but
price manipulation differently per group; the institution publishes a single
classifier and we report each group's accuracy separately.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .game import (
    KNIFE_EDGE_ATOL,
    BestResponse,
    KnifeEdgeWarning,
    _accuracy,
    _strategy_cost,
    _target_indices,
)
from .model import (
    Classifier,
    CostFunction,
    NoiseKernel,
    Population,
    SubpopulationScenario,
    ValidationError,
)

__all__ = [
    "SubpopReport",
    "SweepPoint",
    "effective_acceptance",
    "noisy_best_response",
    "noisy_utility",
    "noisy_strategy_cost",
    "noisy_efficiency",
    "subpop_accuracies",
    "threshold_sweep",
    "solve_deterministic_noisy",
]


def _check_noisy_classifier(
    f: Classifier, kernel: NoiseKernel | None, allow_randomized: bool
) -> None:
    # The deterministic-only policy belongs to the genuinely noisy game;
    # with no kernel these functions are the noiseless game, where
    # randomized classifiers are the whole point.
    if kernel is not None and not allow_randomized and not f.is_deterministic:
        raise ValidationError(
            "the noisy pipeline expects a deterministic classifier "
            "(pass allow_randomized=True to override)"
        )


def effective_acceptance(f: Classifier, kernel: NoiseKernel | None) -> np.ndarray:
    """Acceptance probability each signal faces once noise is applied.

    With no kernel this is ``f.probs`` itself; the identity kernel produces
    the same bits, so the noiseless game is the exact special case.
    """
    if kernel is None:
        return f.probs
    if not kernel.space.matches(f.space):
        raise ValueError("kernel and classifier live on different grids")
    return kernel.rows @ f.probs


def noisy_best_response(
    f: Classifier,
    kernel: NoiseKernel | None,
    c: CostFunction,
    allow_randomized: bool = False,
) -> BestResponse:
    """Strict-improvement moves against the effective acceptance curve."""
    _check_noisy_classifier(f, kernel, allow_randomized)
    if not f.space.matches(c.space):
        raise ValueError("classifier and cost function live on different grids")
    q = effective_acceptance(f, kernel)
    target = _target_indices(q, c.costs)
    moved = target != np.arange(f.space.n)
    return BestResponse(target=target, moved=moved)


def noisy_utility(
    f: Classifier,
    pop: Population,
    kernel: NoiseKernel | None,
    c: CostFunction,
    allow_randomized: bool = False,
) -> float:
    """Expected accuracy through the channel after contestants respond."""
    _check_noisy_classifier(f, kernel, allow_randomized)
    q = effective_acceptance(f, kernel)
    target = _target_indices(q, c.costs)
    return _accuracy(pop.pi, pop.h, q[target])


def noisy_strategy_cost(
    f: Classifier,
    pop: Population,
    kernel: NoiseKernel | None,
    c: CostFunction,
    allow_randomized: bool = False,
) -> float:
    """Manipulation spend of the qualified mass through the channel."""
    _check_noisy_classifier(f, kernel, allow_randomized)
    q = effective_acceptance(f, kernel)
    target = _target_indices(q, c.costs)
    return _strategy_cost(pop.pi, pop.h, c.costs, target)


def noisy_efficiency(
    f: Classifier,
    pop: Population,
    kernel: NoiseKernel | None,
    c: CostFunction,
    beta: float = 1.0,
    allow_randomized: bool = False,
) -> float:
    """Accuracy minus ``beta`` times manipulation spend, through the channel."""
    _check_noisy_classifier(f, kernel, allow_randomized)
    q = effective_acceptance(f, kernel)
    target = _target_indices(q, c.costs)
    u = _accuracy(pop.pi, pop.h, q[target])
    k = _strategy_cost(pop.pi, pop.h, c.costs, target)
    return u - beta * k


@dataclass(frozen=True, eq=False)
class SubpopReport:
    """Per-group accuracy and manipulation spend under one classifier."""

    labels: tuple[str, ...]
    utilities: tuple[float, ...]
    costs: tuple[float, ...]
    utility: float  # share-weighted overall accuracy
    cost: float  # share-weighted overall manipulation spend
    gap: float  # spread between best- and worst-served group

    @property
    def efficiency(self) -> float:
        return self.utility - self.cost


def subpop_accuracies(
    f: Classifier,
    scenario: SubpopulationScenario,
    allow_randomized: bool = False,
) -> SubpopReport:
    """Evaluate a classifier group by group on a subpopulation scenario."""
    _check_noisy_classifier(f, scenario.kernel, allow_randomized)
    if not f.space.matches(scenario.space):
        raise ValueError("classifier and scenario live on different grids")
    pop = scenario.pop
    q = effective_acceptance(f, scenario.kernel)
    us: list[float] = []
    ks: list[float] = []
    for fn in scenario.cost_fns:
        target = _target_indices(q, fn.costs)
        us.append(_accuracy(pop.pi, pop.h, q[target]))
        ks.append(_strategy_cost(pop.pi, pop.h, fn.costs, target))
    us_arr = np.array(us)
    ks_arr = np.array(ks)
    return SubpopReport(
        labels=scenario.labels,
        utilities=tuple(us),
        costs=tuple(ks),
        utility=float(np.dot(scenario.shares, us_arr)),
        cost=float(np.dot(scenario.shares, ks_arr)),
        gap=float(us_arr.max() - us_arr.min()),
    )


@dataclass(frozen=True, eq=False)
class SweepPoint:
    """One threshold candidate's payoffs along a sweep."""

    tau: float
    strict: bool
    start: int  # first accepted grid index (n means all-reject)
    utility: float
    cost: float
    efficiency: float
    subpop_utilities: tuple[float, ...]
    subpop_costs: tuple[float, ...]
    gap: float


def _sweep_candidates(points: np.ndarray):
    """All (tau, strict) pairs on the grid, deduplicated by acceptance set.

    Candidates run from the most permissive set downward; each acceptance
    set keeps the first (tau, strict) pair that produces it, so a set that
    first appears as "strictly above the previous point" is reported that
    way.
    """
    seen: set[int] = set()
    n = points.size
    for k in range(n):
        for strict in (False, True):
            start = k + 1 if strict else k
            if start in seen:
                continue
            seen.add(start)
            yield float(points[k]), strict, start


def _fast_threshold_targets(costs: np.ndarray, start: int) -> np.ndarray:
    """Best response to a noiseless suffix classifier under monotone rows.

    Everyone below the threshold whose cheapest accepted destination costs
    under the unit gain jumps to the first accepted point; ties at smaller
    indices are automatic because rows are nondecreasing.
    """
    n = costs.shape[0]
    idx = np.arange(n)
    if start <= 0 or start >= n:
        return idx
    target = idx.copy()
    # the same banded comparison _target_indices applies, with gain = 1.0
    movers = (idx < start) & (1.0 > costs[:, start] + KNIFE_EDGE_ATOL)
    target[movers] = start
    return target


def threshold_sweep(scenario: SubpopulationScenario) -> tuple[SweepPoint, ...]:
    """Evaluate every threshold acceptance set on a scenario, bottom up.

    Returns one point per distinct acceptance suffix (n + 1 in all),
    covering both strict and non-strict thresholds at every grid value.
    """
    pop = scenario.pop
    space = scenario.space
    n = space.n
    kernel = scenario.kernel
    shares = scenario.shares

    # The noiseless fast path is valid when each cost row is nondecreasing
    # (so the first accepted point is the cheapest destination) and no cost
    # sits on the knife edge against the unit gain, where the generic path
    # would emit its diagnostic.
    fast_ok: list[bool] = []
    for fn in scenario.cost_fns:
        rows_monotone = bool(np.all(np.diff(fn.costs, axis=1) >= 0.0))
        no_knife = not np.any(np.abs(fn.costs - 1.0) < KNIFE_EDGE_ATOL)
        fast_ok.append(kernel is None and rows_monotone and no_knife)

    out: list[SweepPoint] = []
    for tau, strict, start in _sweep_candidates(space.points):
        probs = np.zeros(n)
        probs[start:] = 1.0
        q = probs if kernel is None else kernel.rows @ probs
        us: list[float] = []
        ks: list[float] = []
        for s, fn in enumerate(scenario.cost_fns):
            if fast_ok[s]:
                target = _fast_threshold_targets(fn.costs, start)
            else:
                target = _target_indices(q, fn.costs)
            us.append(_accuracy(pop.pi, pop.h, q[target]))
            ks.append(_strategy_cost(pop.pi, pop.h, fn.costs, target))
        us_arr = np.array(us)
        ks_arr = np.array(ks)
        u = float(np.dot(shares, us_arr))
        k = float(np.dot(shares, ks_arr))
        out.append(
            SweepPoint(
                tau=tau,
                strict=strict,
                start=start,
                utility=u,
                cost=k,
                efficiency=u - k,
                subpop_utilities=tuple(us),
                subpop_costs=tuple(ks),
                gap=float(us_arr.max() - us_arr.min()),
            )
        )
    return tuple(out)


def solve_deterministic_noisy(scenario: SubpopulationScenario):
    """Utility-best threshold on a (possibly noisy) subpopulation scenario.

    Scans the sweep from the most permissive acceptance set down and keeps
    the first strict improvement, then re-evaluates the winner through
    :func:`subpop_accuracies` so the reported numbers match a standalone
    evaluation bit for bit.
    """
    from .solvers import SolveReport

    points = threshold_sweep(scenario)
    best = points[0]
    for p in points[1:]:
        if p.utility > best.utility:
            best = p
    clf = Classifier.threshold(scenario.space, best.tau, strict=best.strict)
    report = subpop_accuracies(clf, scenario)
    return SolveReport(
        classifier=clf,
        objective=report.utility,
        method="enumeration",
        tau=best.tau,
        strict=best.strict,
        details={"report": report},
    )
