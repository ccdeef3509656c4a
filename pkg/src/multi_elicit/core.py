"""
Core types: outcome spaces, distributions, product distributions, and the
property / multi-observation loss abstractions the other modules consume.

Conventions:
- An outcome tuple (ω1, …, ωm) is a ProductIndex; all m-tuples of a space are
  enumerated lexicographically, which is also the coordinate order of p^m.
- Loss evaluators are vectorized: ``evaluator(r, omega)`` receives a report
  array of shape (..., d) and an int array of outcome tuples of shape (T, m)
  and returns losses of shape (..., T).
- Identification functions take a single report of shape (d,) and return an
  array of shape (T, d).
"""
from dataclasses import dataclass
from functools import lru_cache, reduce
from itertools import product
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb

from .errors import ArityError, DistributionError, DomainError, MissingIdentificationError

ProductIndex = Tuple[int, ...]

SUM_TOL = 1e-12
RENORMALIZE_TOL = 1e-9


# =============================================================================
# OUTCOME SPACES AND DISTRIBUTIONS
# =============================================================================

@dataclass(frozen=True)
class OutcomeSpace:
    """
    A finite outcome space: ordered unique labels, each carrying a real value.

    Moment-type properties read the values; norm and indicator properties
    only look at outcome identity.
    """
    labels: Tuple[str, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(label) for label in self.labels))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.labels) < 2:
            raise DistributionError("An outcome space needs at least 2 outcomes")
        if len(set(self.labels)) != len(self.labels):
            raise DistributionError(f"Outcome labels must be unique: {self.labels}")
        if len(self.values) != len(self.labels):
            raise DistributionError("One value per outcome label is required")
        if not all(np.isfinite(self.values)):
            raise DistributionError(f"Outcome values must be finite: {self.values}")

    @classmethod
    def from_values(cls, values: Sequence[float], labels: Optional[Sequence[str]] = None) -> "OutcomeSpace":
        """
        Builds a space whose labels are the printed values (or y0, y1, ... when
        two values print the same).
        """
        values = [float(v) for v in values]
        if labels is None:
            labels = [f"{v:g}" for v in values]
            if len(set(labels)) != len(labels):
                labels = [f"y{i}" for i in range(len(values))]
        return cls(tuple(labels), tuple(values))

    @classmethod
    def categorical(cls, n: int) -> "OutcomeSpace":
        """n outcomes labelled 0..n-1 with values 0..n-1."""
        return cls.from_values(range(n))

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def value_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise DistributionError(f"Unknown outcome label: {label}") from None


@dataclass(frozen=True, eq=False)
class Distribution:
    """
    A probability vector over an OutcomeSpace.

    Inputs within 1e-9 of summing to one are renormalized; farther inputs are
    rejected. The stored vector is read-only.
    """
    space: OutcomeSpace
    probs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.probs, dtype=float).reshape(-1)
        if arr.shape != (self.space.size,):
            raise DistributionError(
                f"Expected {self.space.size} probabilities, got {arr.size}"
            )
        if not np.all(np.isfinite(arr)):
            raise DistributionError("Probabilities must be finite")
        if arr.min() < -SUM_TOL:
            raise DistributionError(f"Negative probability: {arr.min():.3g}")
        arr = np.clip(arr, 0.0, None)
        total = arr.sum()
        if abs(total - 1.0) > RENORMALIZE_TOL:
            raise DistributionError(f"Probabilities sum to {total:.12g}, not 1")
        if abs(total - 1.0) > SUM_TOL:
            arr = arr / total
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @classmethod
    def point_mass(cls, space: OutcomeSpace, index: int) -> "Distribution":
        probs = np.zeros(space.size)
        probs[index] = 1.0
        return cls(space, probs)

    @classmethod
    def uniform(cls, space: OutcomeSpace) -> "Distribution":
        return cls(space, np.full(space.size, 1.0 / space.size))

    def mean(self) -> float:
        return float(self.probs @ self.space.value_array)

    def moment(self, k: int) -> float:
        """Raw moment E[Y^k]."""
        return float(self.probs @ self.space.value_array ** k)

    def central_moment(self, k: int) -> float:
        """E[(Y − E[Y])^k], computed from centered values."""
        centered = self.space.value_array - self.mean()
        return float(self.probs @ centered ** k)

    def variance(self) -> float:
        return self.central_moment(2)

    def is_interior(self, margin: float = 0.0) -> bool:
        """True when every probability is strictly above margin."""
        return bool(np.all(self.probs > margin))

    def as_tuple(self) -> Tuple[float, ...]:
        return tuple(float(x) for x in self.probs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Distribution):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash((self.space, self.as_tuple()))

    def __repr__(self) -> str:
        probs = ", ".join(f"{x:.6g}" for x in self.probs)
        return f"Distribution([{probs}])"


# =============================================================================
# PRODUCT DISTRIBUTIONS
# =============================================================================

@lru_cache(maxsize=64)
def _product_indices(n: int, m: int) -> np.ndarray:
    table = np.array(list(product(range(n), repeat=m)), dtype=np.intp).reshape(-1, m)
    table.setflags(write=False)
    return table


def product_indices(n: int, m: int) -> np.ndarray:
    """
    All m-tuples over n outcomes, lexicographic, as an int array of shape (n^m, m).

    Raises:
        ArityError: If m < 1.
    """
    if m < 1:
        raise ArityError(f"Observation count must be at least 1, got {m}")
    return _product_indices(n, m)


def product_prob(p: Distribution, idx: ProductIndex, m: Optional[int] = None) -> float:
    """
    Probability of one outcome tuple under p^m: ∏ p(ω_i).

    Args:
        p: The distribution.
        idx: Outcome indices (ω1, …, ωm).
        m: Requested observation count; the tuple arity must match it.

    Raises:
        ArityError: On arity mismatch, an empty tuple or an invalid index.
    """
    idx = tuple(int(i) for i in idx)
    if len(idx) < 1:
        raise ArityError("An outcome tuple needs at least one observation")
    if m is not None and len(idx) != m:
        raise ArityError(f"Outcome tuple has {len(idx)} observations, expected {m}")
    if any(i < 0 or i >= p.space.size for i in idx):
        raise ArityError(f"Outcome index out of range in {idx}")
    return float(np.prod(p.probs[list(idx)]))


def product_weights(p: Distribution, m: int) -> np.ndarray:
    """The full vector p^m, ordered like product_indices."""
    if m < 1:
        raise ArityError(f"Observation count must be at least 1, got {m}")
    return reduce(np.multiply.outer, [p.probs] * m).reshape(-1)


# =============================================================================
# PROPERTIES AND LOSSES
# =============================================================================

@dataclass(frozen=True, eq=False)
class Property:
    """
    A statistic Γ: distributions → ℝ^d.

    The evaluator is exact. A property may restrict its domain (e.g. positive
    mean) and may declare a link ψ that maps its value to a linked target.
    """
    name: str
    report_dim: int
    evaluator: Callable[[Distribution], object]
    link: Optional[Callable[[np.ndarray], float]] = None
    linked_name: Optional[str] = None
    domain: Optional[Callable[[Distribution], bool]] = None
    domain_note: str = ""
    interior_only: bool = False
    description: str = ""

    def in_domain(self, p: Distribution) -> bool:
        if self.interior_only and not p.is_interior():
            return False
        return self.domain is None or bool(self.domain(p))

    def evaluate(self, p: Distribution) -> np.ndarray:
        """
        Γ(p) as an array of shape (d,).

        Raises:
            DomainError: If p lies outside the declared domain.
        """
        if not self.in_domain(p):
            note = f" ({self.domain_note})" if self.domain_note else ""
            raise DomainError(f"{self.name} is undefined at {p}{note}")
        value = np.atleast_1d(np.asarray(self.evaluator(p), dtype=float))
        if value.shape != (self.report_dim,):
            raise DomainError(f"{self.name} returned shape {value.shape}, expected ({self.report_dim},)")
        return value

    def value(self, p: Distribution) -> float:
        """Scalar Γ(p) for 1-dimensional properties."""
        return float(self.evaluate(p)[0])


@dataclass(frozen=True, eq=False)
class MultiObsLoss:
    """
    An m-observation loss ℓ(r, ω1, …, ωm) with d-dimensional reports.

    report_box holds one (low, high) search interval per report coordinate;
    `box_at`, when set, replaces it with an interval sized for a given p.
    `requires` is an optional precondition on p (e.g. a positive denominator),
    `link` maps the minimizing report to the target property and
    `inverse_link` maps a property value back to report coordinates.
    """
    name: str
    report_dim: int
    obs_count: int
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    report_box: Tuple[Tuple[float, float], ...]
    identification: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    link: Optional[Callable[[np.ndarray], float]] = None
    link_name: Optional[str] = None
    inverse_link: Optional[Callable[[np.ndarray], np.ndarray]] = None
    requires: Optional[Callable[[Distribution], bool]] = None
    requires_note: str = ""
    description: str = ""
    box_at: Optional[Callable[[Distribution], Tuple[Tuple[float, float], ...]]] = None

    def __post_init__(self):
        if self.report_dim < 1 or self.obs_count < 1:
            raise ArityError(f"{self.name}: report_dim and obs_count must be at least 1")
        box = tuple((float(lo), float(hi)) for lo, hi in self.report_box)
        if len(box) != self.report_dim:
            raise DomainError(f"{self.name}: one report interval per coordinate is required")
        if any(not (np.isfinite(lo) and np.isfinite(hi) and lo < hi) for lo, hi in box):
            raise DomainError(f"{self.name}: report intervals must be finite with low < high: {box}")
        object.__setattr__(self, "report_box", box)

    @property
    def target_dim(self) -> int:
        """Dimension of the reported value after the link."""
        return 1 if self.link is not None else self.report_dim

    def check_domain(self, p: Distribution):
        """
        Raises:
            DomainError: If the loss's precondition fails at p.
        """
        if self.requires is not None and not self.requires(p):
            note = f": {self.requires_note}" if self.requires_note else ""
            raise DomainError(f"{self.name} cannot be minimized at {p}{note}")

    def search_box(self, p: Optional[Distribution] = None) -> Tuple[Tuple[float, float], ...]:
        """The report intervals to search under p."""
        if self.box_at is None or p is None:
            return self.report_box
        return tuple((float(lo), float(hi)) for lo, hi in self.box_at(p))

    def in_box(self, r: np.ndarray, p: Optional[Distribution] = None, slack: float = 1e-9) -> bool:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return all(lo - slack <= x <= hi + slack for x, (lo, hi) in zip(r, self.search_box(p)))

    def reported(self, r: np.ndarray) -> np.ndarray:
        """The report after the link (or the report itself)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if self.link is None:
            return r
        return np.atleast_1d(float(self.link(r)))


class ExpectedLoss:
    """
    r ↦ E_{p^m}[ℓ(r, ω⃗)] for a fixed loss and distribution.

    The outcome tuples and p^m weights are computed once, so the minimizer can
    call it many times cheaply. Calls are exact sums, no sampling.
    """

    def __init__(self, loss: MultiObsLoss, p: Distribution):
        self.loss = loss
        self.p = p
        self.omega = product_indices(p.space.size, loss.obs_count)
        self.weights = product_weights(p, loss.obs_count)

    def __call__(self, r) -> float:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return float(self.loss.evaluator(r, self.omega) @ self.weights)

    def batch(self, reports: np.ndarray) -> np.ndarray:
        """Expected losses for reports of shape (K, d)."""
        reports = np.asarray(reports, dtype=float).reshape(-1, self.loss.report_dim)
        return self.loss.evaluator(reports, self.omega) @ self.weights


def expected_loss(loss: MultiObsLoss, r, p: Distribution) -> float:
    """
    Exact E_{(ω1..ωm)∼p^m}[ℓ(r, ω⃗)] by enumeration of all |𝕐|^m tuples.

    Raises:
        DomainError: If r lies outside the loss's report box.
    """
    if not loss.in_box(r, p):
        raise DomainError(f"Report {r} outside the box of {loss.name}: {loss.search_box(p)}")
    return ExpectedLoss(loss, p)(r)


def expected_identification(loss: MultiObsLoss, r, p: Distribution) -> np.ndarray:
    """
    Exact E_{p^m}[V(r, ω⃗)] as an array of shape (d,).

    Raises:
        MissingIdentificationError: If the loss carries no V.
    """
    if loss.identification is None:
        raise MissingIdentificationError(f"{loss.name} has no identification function")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    omega = product_indices(p.space.size, loss.obs_count)
    values = np.asarray(loss.identification(r, omega), dtype=float).reshape(len(omega), -1)
    return product_weights(p, loss.obs_count) @ values


# =============================================================================
# GRIDS AND RANDOM DISTRIBUTIONS
# =============================================================================

def _compositions(parts: int, total: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for k in range(total + 1):
        for rest in _compositions(parts - 1, total - k):
            yield (k,) + rest


def grid_size(space: OutcomeSpace, resolution: int) -> int:
    """C(N + |𝕐| − 1, |𝕐| − 1)."""
    return int(comb(resolution + space.size - 1, space.size - 1, exact=True))


def simplex_grid(space: OutcomeSpace, resolution: int) -> List[Distribution]:
    """
    All distributions (k1, …, k_n)/N with Σk_i = N, in lexicographic order of k.

    Raises:
        DistributionError: If resolution < 1.
    """
    if resolution < 1:
        raise DistributionError(f"Grid resolution must be at least 1, got {resolution}")
    return [
        Distribution(space, np.array(counts, dtype=float) / resolution)
        for counts in _compositions(space.size, resolution)
    ]


def interior_grid(space: OutcomeSpace, resolution: int) -> List[Distribution]:
    """simplex_grid restricted to points with every coordinate ≥ 1/(2N)."""
    margin = 1.0 / (2 * resolution)
    return [p for p in simplex_grid(space, resolution) if np.all(p.probs >= margin)]


def random_distributions(space: OutcomeSpace, count: int, rng: np.random.Generator) -> List[Distribution]:
    """Uniform draws from the simplex (normalized exponentials)."""
    g = rng.exponential(scale=1.0, size=(count, space.size))
    probs = g / g.sum(axis=1, keepdims=True)
    return [Distribution(space, row) for row in probs]


def random_distribution(space: OutcomeSpace, rng: np.random.Generator) -> Distribution:
    return random_distributions(space, 1, rng)[0]
