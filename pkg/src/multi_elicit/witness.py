"""
Certificates that a property is not directly elicitable with m observations.

If convex combinations of two distinct level sets, embedded into the
m-product simplex as p ↦ p^m, coincide, no m-observation loss with a scalar
report can elicit the property. Level sets are sampled along an edge or a
triangular face of the simplex, then a phase-1 simplex decides whether the
two embedded samples have intersecting convex hulls.

A negative answer only concerns the supplied samples and is reported as
``no_witness_in_sample``; it never claims elicitability.
"""
from functools import reduce
from typing import Callable, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .catalog import RefutationRecipe
from .core import Distribution, OutcomeSpace, Property, product_weights
from .errors import (
    ArityError,
    DegenerateSampleError,
    DomainError,
    InvalidWitnessError,
    ValueNotAttainedError,
)
from .feasibility import phase_one
from .session_log import get_session_log
from .settings import SolverSettings, WitnessSettings

WEIGHT_SUM_TOL = 1e-9
DEDUPE_TOL = 1e-9


# =============================================================================
# LEVEL SETS
# =============================================================================

class LevelSetSample:
    """Distributions p with |Γ(p) − r| ≤ level_tol, found on one face of the simplex."""

    def __init__(self, property_name: str, r: float, members: Sequence[Distribution],
                 level_tol: float, support: Tuple[int, ...] = ()):
        if not members:
            raise ValueNotAttainedError(f"{property_name} does not attain {r:g} on the scanned face")
        self.property_name = property_name
        self.r = float(r)
        self.members = list(members)
        self.level_tol = level_tol
        self.support = tuple(support)

    def __len__(self) -> int:
        return len(self.members)

    def __repr__(self) -> str:
        return f"LevelSetSample({self.property_name}, r={self.r:g}, k={len(self.members)})"


def _face_point(space: OutcomeSpace, support: Sequence[int], weights: Sequence[float]) -> Distribution:
    probs = np.zeros(space.size)
    probs[list(support)] = weights
    return Distribution(space, probs)


def _safe_value(prop: Property, p: Distribution) -> float:
    try:
        return prop.value(p)
    except DomainError:
        return np.nan


def _bisect(f: Callable[[float], float], a: float, b: float, fa: float, tol: float) -> Tuple[float, float]:
    """Bisection on a sign change of f over [a, b]; returns (root, |f(root)|)."""
    mid, fm = a, fa
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if not np.isfinite(fm):
            break
        if abs(fm) <= tol or b - a <= 1e-16:
            break
        if np.sign(fm) == np.sign(fa):
            a, fa = mid, fm
        else:
            b = mid
    return mid, abs(fm)


def _golden_abs(f: Callable[[float], float], a: float, b: float, tol: float) -> Tuple[float, float]:
    """Minimizes |f| on [a, b] (tangential level crossings)."""
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc, fd = abs(f(c)), abs(f(d))
    while b - a > 1e-13:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = abs(f(c))
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = abs(f(d))
        if min(fc, fd) <= tol:
            break
    return (c, fc) if fc <= fd else (d, fd)


def _dedupe(points: List[np.ndarray]) -> List[np.ndarray]:
    kept: List[np.ndarray] = []
    for point in sorted(points, key=lambda x: tuple(x)):
        if all(np.max(np.abs(point - other)) > DEDUPE_TOL for other in kept):
            kept.append(point)
    return kept


def _scan_edge(prop: Property, r: float, space: OutcomeSpace, support: Tuple[int, int],
               cfg: WitnessSettings, line_scan: int) -> List[np.ndarray]:
    a_idx, b_idx = support

    def point(t: float) -> Distribution:
        return _face_point(space, support, (1.0 - t, t))

    def f(t: float) -> float:
        return _safe_value(prop, point(t)) - r

    ts = np.arange(line_scan + 1) / line_scan
    values = np.array([f(t) for t in ts])
    roots = []
    for i, (t, v) in enumerate(zip(ts, values)):
        if np.isfinite(v) and abs(v) <= cfg.bisection_tol:
            roots.append(t)
    for i in range(line_scan):
        fa, fb = values[i], values[i + 1]
        if np.isfinite(fa) and np.isfinite(fb) and fa * fb < 0:
            t, err = _bisect(f, ts[i], ts[i + 1], fa, cfg.bisection_tol)
            if err <= cfg.level_tol:
                roots.append(t)
    # touching roots: local minima of |f| without a sign change
    absv = np.abs(values)
    for i in range(1, line_scan):
        window = values[i - 1:i + 2]
        if not np.all(np.isfinite(window)) or absv[i] <= cfg.bisection_tol:
            continue
        if absv[i] <= absv[i - 1] and absv[i] <= absv[i + 1] and window[0] * window[2] > 0 and window[0] * window[1] > 0:
            t, err = _golden_abs(f, ts[i - 1], ts[i + 1], cfg.bisection_tol)
            if err <= cfg.level_tol:
                roots.append(t)
    return [point(t).probs for t in roots]


def _scan_face(prop: Property, r: float, space: OutcomeSpace, support: Tuple[int, int, int],
               cfg: WitnessSettings, face_grid: int) -> List[np.ndarray]:
    N = face_grid
    values = {}
    for i in range(N + 1):
        for j in range(N + 1 - i):
            values[(i, j)] = _safe_value(prop, _face_point(space, support, (i / N, j / N, (N - i - j) / N))) - r

    def segment(a: Tuple[int, int], b: Tuple[int, int]):
        wa = np.array([a[0], a[1], N - a[0] - a[1]], dtype=float) / N
        wb = np.array([b[0], b[1], N - b[0] - b[1]], dtype=float) / N
        return lambda s: _safe_value(prop, _face_point(space, support, (1.0 - s) * wa + s * wb)) - r, wa, wb

    found = []
    for key, v in values.items():
        if np.isfinite(v) and abs(v) <= cfg.bisection_tol:
            found.append(np.array([key[0], key[1], N - key[0] - key[1]], dtype=float) / N)
    for (i, j), fa in values.items():
        if not np.isfinite(fa):
            continue
        for nb in ((i + 1, j), (i, j + 1), (i + 1, j - 1)):
            fb = values.get(nb)
            if fb is None or not np.isfinite(fb) or fa * fb >= 0:
                continue
            f, wa, wb = segment((i, j), nb)
            s, err = _bisect(f, 0.0, 1.0, fa, cfg.bisection_tol)
            if err <= cfg.level_tol:
                found.append((1.0 - s) * wa + s * wb)
    points = []
    for w in found:
        probs = np.zeros(space.size)
        probs[list(support)] = w
        points.append(probs)
    return points


def sample_level_set(
    prop: Property,
    r: float,
    space: OutcomeSpace,
    scan_resolution: Optional[int] = None,
    level_tol: Optional[float] = None,
    support: Optional[Sequence[int]] = None,
    settings: Optional[SolverSettings] = None,
) -> LevelSetSample:
    """
    Finds distributions on the face spanned by `support` with Γ(p) = r.

    Two support outcomes: scan the edge at `scan_resolution` points (default
    10⁴) and bisect every sign change, plus refine touching roots. Three
    support outcomes: scan the face grid (default N = 200) and bisect along
    every grid edge with a sign change.

    Args:
        prop: A scalar property.
        r: Target level.
        space: Outcome space.
        scan_resolution: Line points or face grid resolution.
        level_tol: Largest accepted |Γ(p) − r|.
        support: Outcome indices spanning the face; all outcomes of a 2- or
            3-outcome space, otherwise the first three.

    Raises:
        ArityError: If the property is not scalar or the support has not 2 or 3 outcomes.
        ValueNotAttainedError: If no member is found.
    """
    cfg = (settings or SolverSettings()).witness
    if prop.report_dim != 1:
        raise ArityError(f"Level sets are sampled for scalar properties, {prop.name} has d = {prop.report_dim}")
    support = tuple(int(i) for i in (support if support is not None else range(min(space.size, 3))))
    if len(support) not in (2, 3) or len(set(support)) != len(support) or any(i < 0 or i >= space.size for i in support):
        raise ArityError(f"Support must name 2 or 3 distinct outcomes, got {support}")
    tol = level_tol if level_tol is not None else cfg.level_tol

    if len(support) == 2:
        points = _scan_edge(prop, r, space, support, cfg, scan_resolution or cfg.line_scan)
    else:
        points = _scan_face(prop, r, space, support, cfg, scan_resolution or cfg.face_grid)

    members = []
    for probs in _dedupe(points):
        p = Distribution(space, probs)
        value = _safe_value(prop, p)
        if np.isfinite(value) and abs(value - r) <= tol:
            members.append(p)
    get_session_log().info(f"Level set {prop.name} = {r:g}: {len(members)} member(s) on support {support}")
    return LevelSetSample(prop.name, r, members, tol, support)


# =============================================================================
# EMBEDDINGS AND WITNESSES
# =============================================================================

def _embed_probs(probs: Sequence[float], m: int) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    return reduce(np.multiply.outer, [probs] * m).reshape(-1)


def embed_product(p: Distribution, m: int) -> np.ndarray:
    """
    p^m as a vector in ℝ^{|𝕐|^m}, tuples in lexicographic order.

    Raises:
        ArityError: If m < 1.
    """
    return product_weights(p, m)


class WitnessMember(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    p: List[float]
    weight: float = Field(..., alias="lambda")


class Witness(BaseModel):
    """Two coinciding mixtures of embedded level-set members."""
    model_config = ConfigDict(populate_by_name=True)

    status: Literal["witness"] = "witness"
    property: str = ""
    m: int = Field(..., ge=1)
    r1: float
    r2: float
    group1: List[WitnessMember]
    group2: List[WitnessMember]
    residual: float = Field(..., ge=0)

    def to_json(self) -> dict:
        return self.model_dump(by_alias=True)


class NoWitness(BaseModel):
    """The phase-1 problem had no solution for these samples."""
    status: Literal["no_witness_in_sample"] = "no_witness_in_sample"
    property: str = ""
    m: int
    r1: float
    r2: float
    k1: int
    k2: int
    reason: str = ""

    def to_json(self) -> dict:
        return self.model_dump()


def _mixture(group: Sequence[WitnessMember], m: int) -> np.ndarray:
    return sum(member.weight * _embed_probs(member.p, m) for member in group)


def verify_witness(w: Witness) -> float:
    """
    Recomputes both embedded mixtures and returns their ∞-norm difference.

    Raises:
        InvalidWitnessError: If a weight is negative, a group's weights do not
            sum to 1 within 1e-9, or a group is empty.
    """
    for label, group in (("group1", w.group1), ("group2", w.group2)):
        if not group:
            raise InvalidWitnessError(f"{label} is empty")
        weights = np.array([member.weight for member in group])
        if np.any(weights < 0):
            raise InvalidWitnessError(f"{label} has a negative weight")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidWitnessError(f"{label} weights sum to {weights.sum():.12g}")
    return float(np.max(np.abs(_mixture(w.group1, w.m) - _mixture(w.group2, w.m))))


def witness_search(
    A: LevelSetSample,
    B: LevelSetSample,
    m: int,
    settings: Optional[SolverSettings] = None,
) -> Union[Witness, NoWitness]:
    """
    Looks for λ₁, λ₂ ≥ 0 summing to one with Σλ₁ᵢ p₁ᵢ^m = Σλ₂ᵢ p₂ᵢ^m.

    Mixture equalities are relaxed to slabs of half-width `slab` and one
    coordinate (implied by the weight sums) is dropped. A solution is
    re-checked with verify_witness and rejected above `residual_tol`.

    Raises:
        ArityError: If m < 1.
        DegenerateSampleError: If a sample is empty or both share one level.
    """
    cfg = (settings or SolverSettings()).witness
    if m < 1:
        raise ArityError(f"Observation count must be at least 1, got {m}")
    if len(A.members) == 0 or len(B.members) == 0:
        raise DegenerateSampleError("Both level-set samples need at least one member")
    if A.r == B.r:
        raise DegenerateSampleError(f"Level sets must differ, both are at {A.r:g}")

    M1 = np.column_stack([embed_product(p, m) for p in A.members])
    M2 = np.column_stack([embed_product(p, m) for p in B.members])
    k1, k2 = M1.shape[1], M2.shape[1]
    D = np.hstack([M1, -M2])[:-1]
    A_ub = np.vstack([D, -D])
    b_ub = np.full(A_ub.shape[0], cfg.slab)
    A_eq = np.zeros((2, k1 + k2))
    A_eq[0, :k1] = 1.0
    A_eq[1, k1:] = 1.0
    result = phase_one(A_ub, b_ub, A_eq, np.ones(2), pivot_tol=cfg.pivot_tol)

    log = get_session_log()
    if not result.feasible:
        log.info(f"No witness for r1={A.r:g}, r2={B.r:g}, m={m} (k1={k1}, k2={k2}, {result.status})")
        return NoWitness(property=A.property_name, m=m, r1=A.r, r2=B.r, k1=k1, k2=k2,
                         reason=f"phase-1 objective {result.objective:.3g}")

    lam1 = result.x[:k1] / result.x[:k1].sum()
    lam2 = result.x[k1:] / result.x[k1:].sum()
    group1 = [WitnessMember(p=list(p.as_tuple()), weight=float(w)) for p, w in zip(A.members, lam1) if w > 0]
    group2 = [WitnessMember(p=list(p.as_tuple()), weight=float(w)) for p, w in zip(B.members, lam2) if w > 0]
    candidate = Witness(property=A.property_name, m=m, r1=A.r, r2=B.r, group1=group1, group2=group2, residual=0.0)
    residual = verify_witness(candidate)
    if residual > cfg.residual_tol:
        log.warning(f"Phase-1 solution rejected: residual {residual:.3g} > {cfg.residual_tol:g}")
        return NoWitness(property=A.property_name, m=m, r1=A.r, r2=B.r, k1=k1, k2=k2,
                         reason=f"residual {residual:.3g}")
    log.success(f"Witness for r1={A.r:g}, r2={B.r:g}, m={m}: residual {residual:.3g}")
    return candidate.model_copy(update={"residual": residual})


def refute(
    prop: Property,
    recipe: RefutationRecipe,
    space: OutcomeSpace,
    m: int,
    settings: Optional[SolverSettings] = None,
) -> Union[Witness, NoWitness]:
    """
    Picks two levels at the configured quantiles of Γ on the recipe's face,
    samples both level sets and runs witness_search.
    """
    cfg = (settings or SolverSettings()).witness
    support = tuple(range(min(recipe.support_size, space.size)))
    if len(support) == 2:
        ts = np.arange(cfg.line_scan + 1) / cfg.line_scan
        values = [_safe_value(prop, _face_point(space, support, (1.0 - t, t))) for t in ts]
    else:
        N = cfg.face_grid
        values = [
            _safe_value(prop, _face_point(space, support, (i / N, j / N, (N - i - j) / N)))
            for i in range(N + 1) for j in range(N + 1 - i)
        ]
    values = np.asarray(values)
    values = values[np.isfinite(values)]
    if values.size == 0:
        raise ValueNotAttainedError(f"{prop.name} is undefined everywhere on support {support}")
    r1, r2 = (float(x) for x in np.quantile(values, cfg.quantiles))
    if r1 == r2:
        raise DegenerateSampleError(f"{prop.name} is constant on support {support}")
    A = sample_level_set(prop, r1, space, support=support, settings=settings)
    B = sample_level_set(prop, r2, space, support=support, settings=settings)
    return witness_search(A, B, m, settings=settings)
