"""Estimators for event probabilities and their uniform deviations.

Three estimators are provided: the empirical mean, the empirical product of
marginals, and the two-phase product-grid estimator (grid from the first
subsample, per-representative empirical means from the second, extension by
trace lookup).  Sup-deviations over permutation-graph families are computed
exactly by max-weight assignment; explicit families are checked by full
enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .domain import (
    CapExceededError,
    Grid,
    NotEnumerableError,
    ProductDomain,
    Trace,
    build_grid,
)
from .distributions import (
    Distribution,
    Modulus,
    ProductDistribution,
    cell_probability_matrix,
    event_probability,
)
from .families import PermutationGraphs, SetFamily, perm_graph_bits, trace_of


# -- sample-size planners ------------------------------------------------------


@dataclass(frozen=True)
class SamplingPlan:
    """Accuracy / confidence targets plus the structural inputs of the planners.

    ``split`` optionally pins (m0, m1) directly, bypassing the planner's
    phase-2 sufficiency check; otherwise m0 = phase1_size(plan) and the
    remainder of the sample is phase 2.
    """

    epsilon: float
    delta: float
    lvc: int
    width: int
    modulus: Modulus
    c0: float = 1.0
    split: tuple[int, int] | None = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0 or not 0.0 < self.delta < 1.0:
            raise ValueError("epsilon and delta must lie in (0, 1)")
        if self.lvc < 1 or self.width < 1:
            raise ValueError("need lvc >= 1 and width >= 1")
        if self.split is not None:
            m0, m1 = self.split
            if m0 < 1 or m1 < 1:
                raise ValueError("split sizes must be positive")


def phase1_size(plan: SamplingPlan) -> int:
    """Grid-phase sample size: ``C0 d^2 / beta(eps/2)^2 (g + ln(1/delta))``."""
    beta = plan.modulus(plan.epsilon / 2.0)
    beta_sq = beta * beta
    if beta_sq <= 0.0:
        raise ValueError("modulus vanished at epsilon/2")
    value = (
        plan.c0
        * plan.width**2
        / beta_sq
        * (plan.lvc + math.log(1.0 / plan.delta))
    )
    return math.ceil(value)


def phase2_size(epsilon: float, delta: float, class_count: int) -> int:
    """Estimation-phase size: ``(2/eps^2) ln(4 * class_count / delta)``."""
    if class_count < 1:
        raise ValueError("need at least one trace class")
    return math.ceil(2.0 / epsilon**2 * math.log(4.0 * class_count / delta))


def product_case_size(
    epsilon: float, delta: float, g: int, d: int, constant: float = 1.0
) -> int:
    """Product-distribution sample size: ``C d^2 / eps^2 (g + ln(1/delta))``."""
    return math.ceil(constant * d**2 / epsilon**2 * (g + math.log(1.0 / delta)))


# -- basic estimators ----------------------------------------------------------


def empirical_mean(sample: np.ndarray, event, domain: ProductDomain) -> float:
    """Fraction of sample points inside the event."""
    sample = np.asarray(sample, dtype=np.int64)
    if sample.size == 0:
        raise ValueError("empty sample")
    if callable(event):
        return float(np.mean(np.asarray(event(sample), dtype=bool)))
    bits = np.asarray(event, dtype=bool)
    return float(np.mean(bits[domain.flat_index(sample)]))


def empirical_product_distribution(
    sample: np.ndarray, domain: ProductDomain
) -> ProductDistribution:
    """The product of the empirical marginals of the sample."""
    sample = np.asarray(sample, dtype=np.int64)
    if sample.size == 0:
        raise ValueError("empty sample")
    m = sample.shape[0]
    marginals = [
        np.bincount(sample[:, i], minlength=n) / m
        for i, n in enumerate(domain.sizes)
    ]
    return ProductDistribution(domain, marginals)


def empirical_product_estimate(
    sample: np.ndarray, event, domain: ProductDomain
) -> float:
    """Probability of the event under the empirical product of marginals."""
    return event_probability(empirical_product_distribution(sample, domain), event)


class EmpiricalMeanEstimator:
    """Wrapper exposing the empirical mean as an estimator object."""

    name = "empirical-mean"

    def __init__(self, sample: np.ndarray, domain: ProductDomain):
        self.domain = domain
        self.sample = domain.validate_points(np.asarray(sample, dtype=np.int64))

    def estimate(self, event) -> float:
        return empirical_mean(self.sample, event, self.domain)

    def cell_weights(self) -> np.ndarray | None:
        if self.domain.width != 2:
            return None
        counts = np.zeros(self.domain.sizes)
        np.add.at(counts, (self.sample[:, 0], self.sample[:, 1]), 1.0)
        return counts / self.sample.shape[0]


class EmpiricalProductEstimator:
    """Wrapper exposing the empirical product of marginals as an estimator."""

    name = "empirical-product"

    def __init__(self, sample: np.ndarray, domain: ProductDomain):
        self.domain = domain
        self.dist = empirical_product_distribution(
            domain.validate_points(np.asarray(sample, dtype=np.int64)), domain
        )

    def estimate(self, event) -> float:
        return event_probability(self.dist, event)

    def cell_weights(self) -> np.ndarray | None:
        if self.domain.width != 2:
            return None
        return np.outer(self.dist.marginals[0], self.dist.marginals[1])


class ExactEstimator:
    """The true distribution viewed as an estimator (zero-deviation reference)."""

    name = "exact"

    def __init__(self, dist: Distribution):
        self.domain = dist.domain
        self.dist = dist

    def estimate(self, event) -> float:
        return event_probability(self.dist, event)

    def cell_weights(self) -> np.ndarray | None:
        if self.domain.width != 2:
            return None
        return cell_probability_matrix(self.dist)


# -- the product-grid estimator --------------------------------------------------


class ProductGridEstimator:
    """The trained two-phase estimator: grid, trace index, query extension.

    In explicit mode the trace index maps each realized trace to the stored
    estimate of its representative (the member with the lexicographically
    smallest canonical encoding).  For permutation-graph families whose
    phase-1 grid covers the full domain, every trace class is a singleton and
    the index is held implicitly as the phase-2 cell-count matrix.
    """

    name = "product-grid"

    def __init__(
        self,
        grid: Grid,
        plan: SamplingPlan,
        class_count: int,
        split: tuple[int, int],
        seed=None,
        trace_index: dict | None = None,
        representatives: dict | None = None,
        cell_counts: np.ndarray | None = None,
    ):
        self.grid = grid
        self.domain = grid.domain
        self.plan = plan
        self.class_count = class_count
        self.split = split
        self.seed = seed
        self.trace_index = trace_index
        self.representatives = representatives
        self.cell_counts = cell_counts
        if cell_counts is not None:
            cell_counts.flags.writeable = False

    @property
    def is_structured(self) -> bool:
        return self.cell_counts is not None

    def query(self, event) -> float:
        """The stored estimate of the representative with the event's trace."""
        if self.is_structured:
            perm = self._as_permutation(event)
            m1 = self.split[1]
            n = self.domain.sizes[0]
            return float(self.cell_counts[np.arange(n), perm].sum() / m1)
        trace = trace_of(event, self.grid)
        try:
            return self.trace_index[trace]
        except KeyError:
            raise ValueError("trace not represented") from None

    # alias so all estimators expose .estimate
    estimate = query

    def representative(self, event) -> np.ndarray:
        """Dense bits of the representative of the event's trace class."""
        if self.is_structured:
            perm = self._as_permutation(event)
            return perm_graph_bits(perm, self.domain)
        trace = trace_of(event, self.grid)
        try:
            return self.representatives[trace]
        except KeyError:
            raise ValueError("trace not represented") from None

    def _as_permutation(self, event) -> np.ndarray:
        n = self.domain.sizes[0]
        if isinstance(event, np.ndarray) and event.ndim == 1 and event.dtype.kind in "iu":
            perm = event
        else:
            bits = trace_of(event, self.grid).to_array().reshape(self.domain.sizes)
            if not (
                np.all(bits.sum(axis=0) == 1) and np.all(bits.sum(axis=1) == 1)
            ):
                raise ValueError("trace not represented")
            perm = np.argmax(bits, axis=1)
        if sorted(perm.tolist()) != list(range(n)):
            raise ValueError("trace not represented")
        return np.asarray(perm, dtype=np.int64)

    def cell_weights(self) -> np.ndarray | None:
        if not self.is_structured:
            return None
        return self.cell_counts / self.split[1]

    def describe(self) -> str:
        return (
            f"product-grid(grid={self.grid.sizes}, classes={self.class_count}, "
            f"split={self.split})"
        )


def build_product_grid_estimator(
    sample: np.ndarray, family: SetFamily, plan: SamplingPlan, seed=None
) -> ProductGridEstimator:
    """Train the two-phase estimator on a single i.i.d. sample.

    The first m0 points build the grid; the rest are reserved for estimation
    and never touch the grid.  With the default split the builder refuses
    samples too small for phase 2 at the realized class count.
    """
    domain = family.domain
    sample = domain.validate_points(np.asarray(sample, dtype=np.int64))
    if plan.split is not None:
        m0, m1 = plan.split
        if sample.shape[0] < m0 + m1:
            raise ValueError(
                f"insufficient sample: need m0+m1 = {m0 + m1}, got {sample.shape[0]}"
            )
    else:
        m0 = phase1_size(plan)
        m1 = sample.shape[0] - m0
        if m1 < 1:
            raise ValueError(
                f"insufficient sample: phase 1 alone needs {m0} points"
            )
    s0 = sample[:m0]
    s1 = sample[m0 : m0 + m1]
    grid = build_grid(s0, domain)

    if isinstance(family, PermutationGraphs) and grid.is_full:
        n = family.n
        counts = np.zeros((n, n))
        np.add.at(counts, (s1[:, 0], s1[:, 1]), 1.0)
        class_count = family.member_count()
        estimator = ProductGridEstimator(
            grid, plan, class_count, (m0, m1), seed=seed, cell_counts=counts
        )
    else:
        try:
            members = family.members_matrix()
        except (NotEnumerableError, CapExceededError) as exc:
            raise NotEnumerableError(
                "family not trace-enumerable within caps"
            ) from exc
        cell_idx = grid.flat_domain_indices()
        encodings = np.packbits(members, axis=1)
        rep_of: dict[Trace, int] = {}
        for idx in range(members.shape[0]):
            trace = Trace.from_bool_array(members[idx, cell_idx])
            cur = rep_of.get(trace)
            if cur is None or encodings[idx].tobytes() < encodings[cur].tobytes():
                rep_of[trace] = idx
        s1_flat = domain.flat_index(s1)
        trace_index = {}
        representatives = {}
        for trace, idx in rep_of.items():
            rep = members[idx]
            trace_index[trace] = float(rep[s1_flat].mean())
            representatives[trace] = rep
        class_count = len(rep_of)
        estimator = ProductGridEstimator(
            grid,
            plan,
            class_count,
            (m0, m1),
            seed=seed,
            trace_index=trace_index,
            representatives=representatives,
        )

    if plan.split is None:
        need = phase2_size(plan.epsilon, plan.delta, estimator.class_count)
        if m1 < need:
            raise ValueError(
                f"insufficient sample: phase 2 needs {need} points for "
                f"{estimator.class_count} classes, got {m1}"
            )
    return estimator


def query_estimate(estimator: ProductGridEstimator, event) -> float:
    return estimator.query(event)


# -- uniform deviations ----------------------------------------------------------


def max_assignment_value(weights: np.ndarray) -> float:
    """Maximum total weight of a perfect matching (exact, via scipy)."""
    rows, cols = linear_sum_assignment(weights, maximize=True)
    return float(weights[rows, cols].sum())


def sup_deviation(
    estimator, family: SetFamily, dist: Distribution, method: str = "auto"
) -> float:
    """Exact ``sup_F |estimate(F) - P(F)|`` over the family.

    ``assignment`` requires a permutation-graph family and an estimator whose
    value on a graph decomposes into per-cell weights; the two signed sides
    are solved as max-weight matchings.  ``enumerate`` evaluates every member
    of an explicitly enumerable family.
    """
    if method == "auto":
        if (
            isinstance(family, PermutationGraphs)
            and getattr(estimator, "cell_weights", None) is not None
            and estimator.cell_weights() is not None
        ):
            method = "assignment"
        else:
            method = "enumerate"
    if method == "assignment":
        if not isinstance(family, PermutationGraphs):
            raise ValueError("method inapplicable: family is not permutation graphs")
        weights = estimator.cell_weights()
        if weights is None:
            raise ValueError("method inapplicable: estimator has no cell weights")
        truth = cell_probability_matrix(dist)
        diff = weights - truth
        upper = max_assignment_value(diff)
        lower = max_assignment_value(-diff)
        return max(upper, lower)
    if method == "enumerate":
        members = family.members_matrix()
        worst = 0.0
        table = dist.table().probs
        for row in members:
            dev = abs(estimator.estimate(row) - float(table[row].sum()))
            if dev > worst:
                worst = dev
        return worst
    raise ValueError(f"unknown method {method!r}")


def check_grid_hitting(
    family: SetFamily, grid: Grid, dist: Distribution, eps: float
) -> list[tuple[int, int]]:
    """All member pairs with ``P(F xor F') >= eps`` missed entirely by the grid.

    An empty list certifies the hitting property for this grid draw.  Pairs
    are indices into the family's member matrix, i < j.
    """
    members = family.members_matrix()
    m = members.astype(float)
    probs = dist.table().probs
    weighted = m * probs
    single = weighted.sum(axis=1)
    cross = weighted @ m.T
    sym_prob = single[:, None] + single[None, :] - 2.0 * cross

    gmask = grid.point_mask()
    mg = members[:, gmask].astype(np.int64)
    on_grid = mg.sum(axis=1)
    cross_grid = mg @ mg.T
    sym_cells = on_grid[:, None] + on_grid[None, :] - 2 * cross_grid

    bad = (sym_prob >= eps) & (sym_cells == 0)
    ii, jj = np.nonzero(np.triu(bad, k=1))
    return list(zip(ii.tolist(), jj.tolist()))


# -- deviation reports -------------------------------------------------------------


@dataclass
class DeviationReport:
    """Per-trial sup-deviation statistics with reproducibility metadata."""

    estimator: str
    family: str
    distribution: str
    trials: int
    seed: int
    deviations: list[float] = field(default_factory=list)
    mean: float = 0.0
    q50: float = 0.0
    q90: float = 0.0
    q99: float = 0.0
    wall_ms: float = 0.0

    @classmethod
    def from_deviations(
        cls,
        estimator: str,
        family: str,
        distribution: str,
        seed: int,
        deviations: np.ndarray,
        wall_ms: float = 0.0,
    ) -> "DeviationReport":
        deviations = np.asarray(deviations, dtype=float)
        if np.any((deviations < 0) | (deviations > 1)):
            raise ValueError("deviations must lie in [0, 1]")
        q50, q90, q99 = np.quantile(deviations, [0.5, 0.9, 0.99])
        return cls(
            estimator=estimator,
            family=family,
            distribution=distribution,
            trials=int(deviations.size),
            seed=int(seed),
            deviations=[float(v) for v in deviations],
            mean=float(deviations.mean()),
            q50=float(q50),
            q90=float(q90),
            q99=float(q99),
            wall_ms=float(wall_ms),
        )

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "family": self.family,
            "distribution": self.distribution,
            "trials": self.trials,
            "seed": self.seed,
            "deviations": self.deviations,
            "mean": self.mean,
            "q50": self.q50,
            "q90": self.q90,
            "q99": self.q99,
            "wall_ms": self.wall_ms,
        }
