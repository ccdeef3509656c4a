"""
Finite properties from Voronoi diagrams in the m-product simplex.

A set of sites {x_r} in ℝ^{|𝕐|^m} defines the finite property
Γ(p) = {r : p^m lies in the Voronoi cell of x_r}. The m-observation loss
ℓ(r, ω⃗) = ‖x_r‖² − 2·x_r[ω⃗] elicits it, since
E_q[ℓ(r, ·)] = ‖q − x_r‖² − ‖q‖².
"""
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .core import (
    Distribution,
    ExpectedLoss,
    MultiObsLoss,
    OutcomeSpace,
    product_indices,
    product_weights,
    simplex_grid,
)
from .errors import DistributionError, SiteConstructionError
from .settings import SolverSettings


class SiteSet(BaseModel):
    """
    Labelled sites in ℝ^{|𝕐|^m}, plus the statistic u when the sites were
    built as bands of ⟨q, u⟩.
    """
    m: int = Field(..., ge=1)
    labels: List[str]
    sites: List[List[float]]
    statistic: Optional[List[float]] = None

    @model_validator(mode="after")
    def validate_sites(self):
        if len(self.labels) < 2 or len(self.labels) != len(self.sites):
            raise ValueError("Need at least two sites and one label per site")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"Site labels must be unique: {self.labels}")
        dims = {len(site) for site in self.sites}
        if len(dims) != 1:
            raise ValueError("All sites must have the same dimension")
        X = self.array
        if not np.all(np.isfinite(X)):
            raise ValueError("Sites must be finite")
        for i in range(len(X)):
            for j in range(i + 1, len(X)):
                if np.array_equal(X[i], X[j]):
                    raise ValueError(f"Sites {self.labels[i]} and {self.labels[j]} coincide")
        if self.statistic is not None and len(self.statistic) != X.shape[1]:
            raise ValueError("Statistic must have the site dimension")
        self.outcome_count()
        return self

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.sites, dtype=float)

    @property
    def dimension(self) -> int:
        return len(self.sites[0])

    def outcome_count(self) -> int:
        """|𝕐| such that |𝕐|^m equals the site dimension."""
        n = int(round(self.dimension ** (1.0 / self.m)))
        for candidate in (n - 1, n, n + 1):
            if candidate >= 2 and candidate ** self.m == self.dimension:
                return candidate
        raise ValueError(f"Site dimension {self.dimension} is not |𝕐|^{self.m} for any |𝕐| ≥ 2")

    def check_space(self, space: OutcomeSpace):
        """
        Raises:
            DistributionError: If the sites do not live in the space's m-product simplex.
        """
        if space.size ** self.m != self.dimension:
            raise DistributionError(
                f"Sites have dimension {self.dimension}, expected {space.size}^{self.m} = {space.size ** self.m}"
            )

    @classmethod
    def from_json_file(cls, path: str) -> "SiteSet":
        """Reads ``{m, labels:[...], sites:[[...]]}``."""
        with open(Path(path), "r", encoding="utf-8") as f:
            return cls.model_validate(json.load(f))


@dataclass(frozen=True)
class FiniteProperty:
    """Set-valued property Δ_𝕐 ⇉ labels; ties return every tied label."""
    labels: Tuple[str, ...]
    rule: Callable[[Distribution], FrozenSet[str]]

    def __call__(self, p: Distribution) -> FrozenSet[str]:
        result = self.rule(p)
        if not result:
            raise SiteConstructionError(f"Empty assignment at {p}")
        return result


def _tied(values: np.ndarray, labels: Sequence[str], tie_tol: float) -> FrozenSet[str]:
    best = values.min()
    return frozenset(label for label, v in zip(labels, values) if v - best <= tie_tol)


# =============================================================================
# LOSS AND ASSIGNMENT
# =============================================================================

def site_loss(sites: SiteSet) -> MultiObsLoss:
    """
    ℓ(r, ω⃗) = ‖x_r‖² − 2·x_r[ω⃗] with the report r an index into the labels.
    Non-integer reports are rounded to the nearest index.
    """
    X = sites.array
    norms = np.sum(X ** 2, axis=1)
    n = sites.outcome_count()
    strides = n ** np.arange(sites.m - 1, -1, -1)

    def evaluator(r, omega):
        idx = np.clip(np.rint(np.asarray(r)[..., 0]).astype(int), 0, len(X) - 1)
        flat = np.asarray(omega) @ strides
        return norms[idx][..., None] - 2.0 * X[idx][..., flat]

    return MultiObsLoss(
        name=f"voronoi{sites.m}",
        report_dim=1,
        obs_count=sites.m,
        evaluator=evaluator,
        report_box=((0.0, float(len(X) - 1)),),
        description=f"Voronoi site loss over {len(X)} labels",
    )


def elicited_labels(sites: SiteSet, p: Distribution, settings: Optional[SolverSettings] = None) -> FrozenSet[str]:
    """All labels minimizing the expected site loss under p^m."""
    cfg = (settings or SolverSettings()).voronoi
    sites.check_space(p.space)
    objective = ExpectedLoss(site_loss(sites), p)
    values = objective.batch(np.arange(len(sites.labels), dtype=float)[:, None])
    return _tied(values, sites.labels, cfg.tie_tol)


def assign_cell(sites: SiteSet, p: Distribution, settings: Optional[SolverSettings] = None) -> FrozenSet[str]:
    """
    Labels of the sites nearest to p^m (squared distances within tie_tol of
    the minimum).
    """
    cfg = (settings or SolverSettings()).voronoi
    sites.check_space(p.space)
    q = product_weights(p, sites.m)
    distances = np.sum((sites.array - q) ** 2, axis=1)
    return _tied(distances, sites.labels, cfg.tie_tol)


def finite_property(sites: SiteSet, settings: Optional[SolverSettings] = None) -> FiniteProperty:
    return FiniteProperty(tuple(sites.labels), lambda p: assign_cell(sites, p, settings))


# =============================================================================
# SITE CONSTRUCTIONS
# =============================================================================

def mode_sites(space: OutcomeSpace) -> SiteSet:
    """One observation, sites at the vertices: the mode."""
    return SiteSet(m=1, labels=list(space.labels), sites=np.eye(space.size).tolist())


def diagonal_statistic(space: OutcomeSpace, m: int = 2) -> np.ndarray:
    """u(ω⃗) = 1{ω1 = … = ωm}; ⟨p^m, u⟩ = Σ_ω p(ω)^m."""
    omega = product_indices(space.size, m)
    return np.all(omega == omega[:, :1], axis=1).astype(float)


def variance_statistic(space: OutcomeSpace) -> np.ndarray:
    """u(ω1, ω2) = ½(v(ω1) − v(ω2))²; ⟨p², u⟩ = Var(Y)."""
    v = space.value_array
    omega = product_indices(space.size, 2)
    return 0.5 * (v[omega[:, 0]] - v[omega[:, 1]]) ** 2


def _default_band_labels(count: int) -> List[str]:
    if count == 2:
        return ["low", "high"]
    if count == 3:
        return ["low", "medium", "high"]
    return [f"band{i}" for i in range(count)]


def band_sites(
    statistic: Sequence[float],
    thresholds: Sequence[float],
    m: int,
    labels: Optional[Sequence[str]] = None,
) -> SiteSet:
    """
    Collinear sites x_r = c_r·u whose cells are the bands
    t_{r−1} ≤ ⟨q, u⟩ ≤ t_r.

    Consecutive sites meet at (c_r + c_{r+1})·‖u‖²/2 = t_r, so every c_r is
    affine in c₁ and the ordering c_r < c_{r+1} becomes an interval for c₁.
    c₁ is the interval midpoint, or one below its upper end when the
    interval is unbounded below.

    Raises:
        SiteConstructionError: If u is zero, the thresholds are not strictly
            increasing, or the interval for c₁ is empty.
    """
    u = np.asarray(statistic, dtype=float).reshape(-1)
    t = np.asarray(thresholds, dtype=float).reshape(-1)
    s = float(u @ u)
    if s == 0.0:
        raise SiteConstructionError("Statistic vector u must be nonzero")
    if t.size < 1 or np.any(np.diff(t) <= 0):
        raise SiteConstructionError(f"Thresholds must be strictly increasing: {t.tolist()}")
    count = t.size + 1
    labels = list(labels) if labels is not None else _default_band_labels(count)
    if len(labels) != count:
        raise SiteConstructionError(f"Need {count} labels for {t.size} threshold(s), got {len(labels)}")

    # c_r = alpha_r + beta_r * c1
    alpha, beta = [0.0], [1.0]
    for r in range(t.size):
        alpha.append(2.0 * t[r] / s - alpha[r])
        beta.append(-beta[r])

    lo, hi = -np.inf, np.inf
    for r in range(t.size):
        # c_r < c_{r+1}  ⇔  2·beta_r·c1 < alpha_{r+1} − alpha_r
        bound = (alpha[r + 1] - alpha[r]) / (2.0 * beta[r])
        if beta[r] > 0:
            hi = min(hi, bound)
        else:
            lo = max(lo, bound)
        if lo >= hi:
            raise SiteConstructionError(
                f"No site spacing satisfies threshold {r + 1} (t = {t[r]:g}): c₁ must lie in ({lo:g}, {hi:g})"
            )

    if np.isfinite(lo) and np.isfinite(hi):
        c1 = 0.5 * (lo + hi)
    elif np.isfinite(hi):
        c1 = hi - 1.0
    else:
        c1 = lo + 1.0
    coefficients = [a + b * c1 for a, b in zip(alpha, beta)]
    return SiteSet(
        m=m,
        labels=labels,
        sites=[(c * u).tolist() for c in coefficients],
        statistic=u.tolist(),
    )


def cell_map(sites: SiteSet, space: OutcomeSpace, resolution: int, settings: Optional[SolverSettings] = None) -> str:
    """
    One CSV row per simplex-grid distribution: probabilities, ⟨p^m, u⟩
    (empty without a statistic) and the assigned labels joined by ``|``.
    """
    sites.check_space(space)
    u = np.asarray(sites.statistic) if sites.statistic is not None else None
    header = [f"p_{i}" for i in range(space.size)] + ["stat", "labels"]
    lines = [",".join(header)]
    for p in simplex_grid(space, resolution):
        stat = f"{float(product_weights(p, sites.m) @ u):.10g}" if u is not None else ""
        cell = assign_cell(sites, p, settings)
        labels = "|".join(label for label in sites.labels if label in cell)
        lines.append(",".join([f"{x:.10g}" for x in p.probs] + [stat, labels]))
    return "\n".join(lines) + "\n"
