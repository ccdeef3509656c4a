"""
Loss constructions built from sum-of-products estimators.

A SumProductEstimator stores g(ω1, …, ωm) = Σ_i ∏_j f_ij(ω_j) as per-outcome
value tables. Because the observations are i.i.d., E_{p^m}[g] = Σ_i ∏_j E_p[f_ij],
so the squared loss (r − g)² elicits that sum with m observations.
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..core import Distribution, MultiObsLoss, OutcomeSpace, product_indices
from ..errors import ArityError, DistributionError, DomainError

RATIO_BOX_PAD = 1.05


@dataclass(frozen=True, eq=False)
class SumProductEstimator:
    """
    Σ_i ∏_j f_ij(ω_j) with every f_ij stored as a table over the outcomes.

    Signs and coefficients are folded into the factor values.
    """
    terms: Tuple[Tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        if not self.terms:
            raise ArityError("An estimator needs at least one product term")
        tables = []
        arity = len(self.terms[0])
        size = None
        for term in self.terms:
            if len(term) != arity or arity < 1:
                raise ArityError("Every product term must have the same number (≥ 1) of factors")
            factors = []
            for table in term:
                arr = np.array(table, dtype=float).reshape(-1)
                if size is None:
                    size = arr.size
                if arr.size != size or not np.all(np.isfinite(arr)):
                    raise DistributionError("Factor tables must be finite and cover every outcome")
                arr.setflags(write=False)
                factors.append(arr)
            tables.append(tuple(factors))
        object.__setattr__(self, "terms", tuple(tables))

    @property
    def arity(self) -> int:
        return len(self.terms[0])

    @property
    def size(self) -> int:
        return self.terms[0][0].size

    def g(self, omega: np.ndarray) -> np.ndarray:
        """The estimator on outcome tuples of shape (T, m)."""
        omega = np.asarray(omega)
        total = np.zeros(len(omega))
        for term in self.terms:
            prod = np.ones(len(omega))
            for j, table in enumerate(term):
                prod = prod * table[omega[:, j]]
            total += prod
        return total

    def expectation(self, p: Distribution) -> float:
        """Σ_i ∏_j E_p[f_ij]."""
        if p.space.size != self.size:
            raise DistributionError(f"Estimator covers {self.size} outcomes, distribution has {p.space.size}")
        return float(sum(np.prod([table @ p.probs for table in term]) for term in self.terms))

    def scaled(self, c: float) -> "SumProductEstimator":
        return SumProductEstimator(tuple((term[0] * c,) + term[1:] for term in self.terms))

    def padded(self, m: int) -> "SumProductEstimator":
        """Same estimator with constant-1 factors appended up to arity m."""
        if m < self.arity:
            raise ArityError(f"Cannot pad an arity-{self.arity} estimator down to {m}")
        ones = np.ones(self.size)
        return SumProductEstimator(tuple(term + (ones,) * (m - self.arity) for term in self.terms))

    def value_range(self) -> Tuple[float, float]:
        """Smallest and largest value of g over all outcome tuples."""
        values = self.g(product_indices(self.size, self.arity))
        return float(values.min()), float(values.max())

    def to_json(self) -> dict:
        return {"terms": [[table.tolist() for table in term] for term in self.terms]}


# =============================================================================
# ESTIMATOR BUILDERS
# =============================================================================

def mean_estimator(space: OutcomeSpace, m: int = 1) -> SumProductEstimator:
    """g = y1: elicits E[Y]."""
    return SumProductEstimator(((space.value_array,),)).padded(m)


def product_estimator(space: OutcomeSpace) -> SumProductEstimator:
    """g = y1·y2: elicits E[Y]²."""
    v = space.value_array
    return SumProductEstimator(((v, v),))


def half_squared_difference(space: OutcomeSpace) -> SumProductEstimator:
    """g = ½(y1 − y2)² = ½y1² + ½y2² − y1y2: elicits Var(Y)."""
    v = space.value_array
    ones = np.ones(space.size)
    return SumProductEstimator(((0.5 * v ** 2, ones), (ones, 0.5 * v ** 2), (v, -v)))


def all_equal_estimator(space: OutcomeSpace, k: int) -> SumProductEstimator:
    """g = 1{ω1 = … = ωk} = Σ_ω ∏_j 1_ω(ω_j): elicits Σ_ω p(ω)^k."""
    eye = np.eye(space.size)
    return SumProductEstimator(tuple((eye[w],) * k for w in range(space.size)))


def estimator_from_json(doc: Mapping, space: OutcomeSpace) -> SumProductEstimator:
    """
    Reads ``{"terms": [[[f_11 values], [f_12 values]], ...]}``.

    Raises:
        DistributionError: If a table does not have one value per outcome.
    """
    terms = doc.get("terms") if isinstance(doc, Mapping) else None
    if not terms:
        raise DistributionError("Estimator document needs a non-empty 'terms' list")
    est = SumProductEstimator(tuple(tuple(np.asarray(f, dtype=float) for f in term) for term in terms))
    if est.size != space.size:
        raise DistributionError(f"Estimator tables cover {est.size} outcomes, space has {space.size}")
    return est


# =============================================================================
# LOSSES
# =============================================================================

def _memo_on_omega(fn: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    """Caches fn(omega) for the most recent omega array (they are shared and read-only)."""
    last = [None]

    def wrapper(omega: np.ndarray) -> np.ndarray:
        cached = last[0]
        if cached is not None and cached[0] is omega:
            return cached[1]
        result = fn(omega)
        last[0] = (omega, result)
        return result
    return wrapper


def _padded_box(lo: float, hi: float) -> Tuple[float, float]:
    if hi - lo < 1e-9:
        return lo - 0.5, hi + 0.5
    return lo, hi


def estimator_loss(
    est: SumProductEstimator,
    name: str = "estimator",
    report_box: Optional[Tuple[float, float]] = None,
    link: Optional[Callable[[np.ndarray], float]] = None,
    link_name: Optional[str] = None,
    inverse_link: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    description: str = "",
) -> MultiObsLoss:
    """
    The squared loss ℓ(r, ω⃗) = (r − g(ω⃗))² with V(r, ω⃗) = r − g(ω⃗).

    Its unique expected-loss minimizer is Σ_i ∏_j E_p[f_ij]. Without an explicit
    report box the range of g is used (the minimizer always lies inside it).
    """
    target = _memo_on_omega(est.g)

    def evaluator(r, omega):
        return (np.asarray(r)[..., 0, None] - target(omega)) ** 2

    def identification(r, omega):
        return (r[0] - target(omega))[:, None]

    box = report_box if report_box is not None else _padded_box(*est.value_range())
    return MultiObsLoss(
        name=name,
        report_dim=1,
        obs_count=est.arity,
        evaluator=evaluator,
        report_box=(tuple(box),),
        identification=identification,
        link=link,
        link_name=link_name,
        inverse_link=inverse_link,
        description=description or f"squared loss against a {len(est.terms)}-term estimator",
    )


def ratio_loss(
    numer: SumProductEstimator,
    denom: SumProductEstimator,
    report_box: Optional[Tuple[float, float]] = None,
    name: str = "ratio",
    link: Optional[Callable[[np.ndarray], float]] = None,
    link_name: Optional[str] = None,
    inverse_link: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    description: str = "",
) -> MultiObsLoss:
    """
    ℓ(r, ω⃗) = b(ω⃗)·r² − 2a(ω⃗)·r with a from numer and b from denom.

    The expected loss E[b]r² − 2E[a]r is convex and minimized at E[a]/E[b]
    whenever E[b] > 0; the loss refuses distributions where it is not.
    V(r, ω⃗) = b(ω⃗)·r − a(ω⃗).

    Without a fixed report_box the search interval at p is sized from
    max|a| / E_p[b], which bounds |E[a]/E[b]|, so it widens as the
    denominator expectation shrinks. Nonnegative numerators search from 0.
    """
    m = max(numer.arity, denom.arity)
    numer, denom = numer.padded(m), denom.padded(m)
    a = _memo_on_omega(numer.g)
    b = _memo_on_omega(denom.g)
    a_lo, a_hi = numer.value_range()
    a_max = max(abs(a_lo), abs(a_hi))

    def interval(scale: float) -> Tuple[float, float]:
        hi = RATIO_BOX_PAD * a_max * scale + 1.0
        return (0.0 if a_lo >= 0 else -hi, hi)

    def box_at(p: Distribution):
        expected_denom = denom.expectation(p)
        if expected_denom <= 0:
            raise DomainError(f"{name}: denominator expectation {expected_denom:g} is not positive")
        return (interval(1.0 / expected_denom),)

    def evaluator(r, omega):
        r0 = np.asarray(r)[..., 0, None]
        return b(omega) * r0 ** 2 - 2.0 * a(omega) * r0

    def identification(r, omega):
        return (b(omega) * r[0] - a(omega))[:, None]

    fixed = report_box is not None
    return MultiObsLoss(
        name=name,
        report_dim=1,
        obs_count=m,
        evaluator=evaluator,
        report_box=(tuple(report_box) if fixed else interval(1.0),),
        identification=identification,
        link=link,
        link_name=link_name,
        inverse_link=inverse_link,
        requires=lambda p: denom.expectation(p) > 0,
        requires_note="denominator expectation must be positive",
        description=description or "ratio of two estimator expectations",
        box_at=None if fixed else box_at,
    )


def knorm_loss(space: OutcomeSpace, k: int) -> MultiObsLoss:
    """
    ℓ(r, y1..yk) = (r − 1{y1 = … = yk})², minimized at ‖p‖_k^k.
    The attached link r ↦ r^{1/k} yields the k-norm itself.

    Raises:
        ArityError: If k < 2.
    """
    if k < 2:
        raise ArityError(f"k-norm losses need k ≥ 2, got {k}")
    return estimator_loss(
        all_equal_estimator(space, k),
        name=f"knorm{k}",
        report_box=(0.0, 1.0),
        link=lambda r: max(float(r[0]), 0.0) ** (1.0 / k),
        link_name=f"knorm({k})",
        inverse_link=lambda x: np.atleast_1d(np.asarray(x, dtype=float)) ** k,
        description=f"indicator that all {k} observations coincide",
    )


Monomial = Tuple[int, ...]


def polynomial_estimator(coeffs: Mapping[Monomial, float], space: OutcomeSpace, m: int) -> SumProductEstimator:
    """
    Σ_c coeff_c · ∏ p(ω) for monomials given as tuples of outcome indices,
    e.g. (0, 1) ↦ p(ω₀)p(ω₁), (0, 0) ↦ p(ω₀)², () ↦ 1.

    Raises:
        ArityError: If a monomial's degree exceeds m or m < 1.
        DistributionError: If an index is outside the space.
    """
    if m < 1:
        raise ArityError(f"Observation count must be at least 1, got {m}")
    eye = np.eye(space.size)
    ones = np.ones(space.size)
    terms = []
    for monomial, coeff in coeffs.items():
        monomial = tuple(int(i) for i in monomial)
        if len(monomial) > m:
            raise ArityError(f"Monomial {monomial} has degree {len(monomial)} > m = {m}")
        if any(i < 0 or i >= space.size for i in monomial):
            raise DistributionError(f"Monomial {monomial} refers to an unknown outcome")
        factors = [eye[i] for i in monomial] + [ones] * (m - len(monomial))
        factors[0] = factors[0] * float(coeff)
        terms.append(tuple(factors))
    if not terms:
        terms.append((ones * 0.0,) + (ones,) * (m - 1))
    return SumProductEstimator(tuple(terms))


def polynomial_value(coeffs: Mapping[Monomial, float], p: Distribution) -> float:
    """The polynomial evaluated at p."""
    return float(sum(c * np.prod([p.probs[i] for i in monomial]) for monomial, c in coeffs.items()))


def polynomial_loss(coeffs: Mapping[Monomial, float], space: OutcomeSpace, m: int) -> MultiObsLoss:
    """Squared loss whose minimizer is the polynomial evaluated at p (indicator factors)."""
    return estimator_loss(
        polynomial_estimator(coeffs, space, m),
        name=f"polynomial{m}",
        description=f"polynomial in p with {len(coeffs)} monomials",
    )


def polynomial_from_json(doc) -> Dict[Monomial, float]:
    """Reads ``[{"monomial": [0, 1], "coeff": 1.0}, ...]`` (or ``{"terms": [...]}``)."""
    items = doc.get("terms", []) if isinstance(doc, Mapping) else doc
    coeffs: Dict[Monomial, float] = {}
    for item in items:
        monomial = tuple(sorted(int(i) for i in item.get("monomial", [])))
        coeffs[monomial] = coeffs.get(monomial, 0.0) + float(item.get("coeff", 1.0))
    return coeffs


def _squared_distance(r, targets: np.ndarray) -> np.ndarray:
    """Σ_j (r_j − t_j(ω))² for targets of shape (d, T); r of shape (..., d)."""
    diffs = np.asarray(r)[..., :, None] - targets
    return np.sum(diffs ** 2, axis=-2)


def moments_loss(
    space: OutcomeSpace,
    link: Optional[Callable[[np.ndarray], float]] = None,
    link_name: Optional[str] = None,
    name: str = "moments1",
    requires: Optional[Callable[[Distribution], bool]] = None,
    requires_note: str = "",
) -> MultiObsLoss:
    """
    ℓ(r, y) = (r1 − y)² + (r2 − y²)²: one observation, eliciting (E[Y], E[Y²]).
    """
    v = space.value_array
    targets = np.vstack([v, v ** 2])

    def evaluator(r, omega):
        return _squared_distance(r, targets[:, omega[:, 0]])

    def identification(r, omega):
        return (r[:, None] - targets[:, omega[:, 0]]).T

    box = (_padded_box(v.min(), v.max()), _padded_box((v ** 2).min(), (v ** 2).max()))
    return MultiObsLoss(
        name=name,
        report_dim=2,
        obs_count=1,
        evaluator=evaluator,
        report_box=box,
        identification=identification,
        link=link,
        link_name=link_name,
        requires=requires,
        requires_note=requires_note,
        description="first and second raw moments",
    )


def indicator_means_loss(
    space: OutcomeSpace,
    outcomes: Sequence[int],
    link: Optional[Callable[[np.ndarray], float]] = None,
    link_name: Optional[str] = None,
    name: str = "indicators1",
) -> MultiObsLoss:
    """
    ℓ(r, y) = Σ_j (r_j − 1{y = o_j})²: one observation, eliciting (p(o_1), …, p(o_d)).
    """
    outcomes = tuple(int(o) for o in outcomes)
    if not outcomes or any(o < 0 or o >= space.size for o in outcomes):
        raise DistributionError(f"Invalid outcome indices: {outcomes}")
    targets = np.eye(space.size)[list(outcomes)]

    def evaluator(r, omega):
        return _squared_distance(r, targets[:, omega[:, 0]])

    def identification(r, omega):
        return (r[:, None] - targets[:, omega[:, 0]]).T

    return MultiObsLoss(
        name=name,
        report_dim=len(outcomes),
        obs_count=1,
        evaluator=evaluator,
        report_box=((0.0, 1.0),) * len(outcomes),
        identification=identification,
        link=link,
        link_name=link_name,
        description=f"probabilities of outcomes {outcomes}",
    )


# Links used by the (2, 1) constructions on (E[Y], E[Y²])

def variance_link(r: np.ndarray) -> float:
    return float(r[1] - r[0] ** 2)


def dispersion_link(r: np.ndarray) -> float:
    if r[0] <= 0:
        return math.nan
    return float((r[1] - r[0] ** 2) / r[0])


def sharpe_link(r: np.ndarray) -> float:
    var = float(r[1] - r[0] ** 2)
    if var <= 0:
        return math.nan
    return float(r[0] / math.sqrt(var))


def require_positive_mean(p: Distribution) -> bool:
    return p.mean() > 0


def require_size(space: OutcomeSpace, size: int, what: str):
    if space.size != size:
        raise DomainError(f"{what} is defined on exactly {size} outcomes, got {space.size}")
