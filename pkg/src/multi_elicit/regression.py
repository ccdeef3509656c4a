"""
Multi-observation regression.

Scattered (x, y) pairs are grouped by nearby covariates into pseudo-i.i.d.
samples (x̄, y1, …, ym); a multi-observation squared loss is then minimized
over linear models by ordinary least squares on the per-group targets.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import ndtri

from .errors import ArityError, DegenerateSampleError, DistributionError, RankError
from .session_log import get_session_log
from .settings import SolverSettings

TWO_53 = 2 ** 53


# =============================================================================
# DATA
# =============================================================================

@dataclass(frozen=True, eq=False)
class ScatterDataset:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(-1)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if x.size == 0 or x.size != y.size:
            raise DistributionError("A dataset needs the same, nonzero, number of x and y values")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DistributionError("Dataset values must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.x.size

    @classmethod
    def from_csv(cls, path: str) -> "ScatterDataset":
        """Reads a two-column ``x,y`` CSV with a header row."""
        table = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
        if table.shape[1] != 2:
            raise DistributionError(f"Expected two columns x,y in {path}, got {table.shape[1]}")
        return cls(table[:, 0], table[:, 1])


@dataclass(frozen=True, eq=False)
class ClusteredDataset:
    """Samples (x̄_i, y_i1, …, y_im): xbar of shape (k,), ys of shape (k, m)."""
    xbar: np.ndarray
    ys: np.ndarray
    mode: str

    @property
    def m(self) -> int:
        return self.ys.shape[1]

    def __len__(self) -> int:
        return self.xbar.size


def cluster_points(data: ScatterDataset, m: int, mode: str = "sliding") -> ClusteredDataset:
    """
    Sorts by x (ties keep input order) and groups consecutive points.

    sliding: windows of m stepping by one (n − m + 1 samples).
    disjoint: consecutive blocks of m, remainder dropped (⌊n/m⌋ samples).
    x̄ is the mean x of the group.

    Raises:
        ArityError: If m < 1 or the mode is unknown.
        DegenerateSampleError: If n < m.
    """
    if m < 1:
        raise ArityError(f"Group size must be at least 1, got {m}")
    n = len(data)
    if n < m:
        raise DegenerateSampleError(f"Cannot form groups of {m} from {n} points")
    order = np.argsort(data.x, kind="stable")
    xs, ys = data.x[order], data.y[order]
    if mode == "sliding":
        starts = np.arange(n - m + 1)
    elif mode == "disjoint":
        starts = np.arange(n // m) * m
    else:
        raise ArityError(f"Unknown clustering mode '{mode}' (sliding, disjoint)")
    index = starts[:, None] + np.arange(m)[None, :]
    return ClusteredDataset(xbar=xs[index].mean(axis=1), ys=ys[index], mode=mode)


def cluster_near_anchors(data: ScatterDataset, anchors: Sequence[float], m: int, epsilon: float) -> ClusteredDataset:
    """
    For each anchor x* in turn, takes the m unused points nearest to x*
    among those within ε; anchors with fewer such points are dropped.

    Raises:
        DegenerateSampleError: If no anchor collects m points.
    """
    if m < 1 or epsilon <= 0:
        raise ArityError("Need m ≥ 1 and ε > 0")
    used = np.zeros(len(data), dtype=bool)
    xbar, groups = [], []
    for anchor in anchors:
        distance = np.abs(data.x - anchor)
        candidates = np.flatnonzero((distance <= epsilon) & ~used)
        if candidates.size < m:
            continue
        chosen = candidates[np.argsort(distance[candidates], kind="stable")[:m]]
        used[chosen] = True
        xbar.append(float(anchor))
        groups.append(data.y[chosen])
    if not groups:
        raise DegenerateSampleError(f"No anchor has {m} points within ε = {epsilon:g}")
    return ClusteredDataset(xbar=np.array(xbar), ys=np.vstack(groups), mode="anchored")


# =============================================================================
# TARGETS AND MODELS
# =============================================================================

def half_squared_difference(ys: np.ndarray) -> np.ndarray:
    """½(y1 − y2)², the two-observation variance target."""
    ys = np.asarray(ys, dtype=float)
    if ys.shape[1] != 2:
        raise ArityError(f"½(y1 − y2)² needs two observations per sample, got {ys.shape[1]}")
    return 0.5 * (ys[:, 0] - ys[:, 1]) ** 2


def mean_target(ys: np.ndarray) -> np.ndarray:
    return np.asarray(ys, dtype=float).mean(axis=1)


def all_equal_target(ys: np.ndarray) -> np.ndarray:
    """1{y1 = … = ym}: regresses Σ_ω p(ω|x)^m for categorical responses."""
    ys = np.asarray(ys)
    return np.all(ys == ys[:, :1], axis=1).astype(float)


@dataclass(frozen=True)
class LinearModel:
    intercept: float
    slope: float

    def __post_init__(self):
        if not (np.isfinite(self.intercept) and np.isfinite(self.slope)):
            raise RankError(f"Non-finite coefficients ({self.intercept}, {self.slope})")

    def __call__(self, x):
        return self.intercept + self.slope * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class IndirectVarianceModel:
    """x ↦ f₂(x) − f₁(x)² from linear fits of y and y²."""
    mean_model: LinearModel
    square_model: LinearModel

    def __call__(self, x):
        return self.square_model(x) - self.mean_model(x) ** 2


def _ols(x: np.ndarray, t: np.ndarray) -> LinearModel:
    """Least squares of t on (1, x) through the normal equations."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if x.size < 2 or np.all(x == x[0]):
        raise RankError("Need at least two distinct covariate values")
    X = np.column_stack([np.ones_like(x), x])
    beta = np.linalg.solve(X.T @ X, X.T @ t)
    return LinearModel(intercept=float(beta[0]), slope=float(beta[1]))


def fit_target_linear(data: ClusteredDataset, target: Callable[[np.ndarray], np.ndarray]) -> LinearModel:
    """
    Exact ERM of Σ_i (f(x̄_i) − g(ys_i))² over f(x) = a + b·x.

    Raises:
        RankError: If fewer than two samples or all x̄ coincide.
    """
    return _ols(data.xbar, target(data.ys))


def fit_variance_indirect(data: ScatterDataset) -> IndirectVarianceModel:
    """
    Fits E[Y|X] and E[Y²|X] linearly and combines them as f₂ − f₁².

    Raises:
        RankError: If all x coincide.
    """
    return IndirectVarianceModel(mean_model=_ols(data.x, data.y), square_model=_ols(data.x, data.y ** 2))


# =============================================================================
# SIMULATION
# =============================================================================

class SimConfig(BaseModel):
    """y = a·sin(4πx) + Z with x ~ U(0, 1), Z ~ N(0, 1); true Var(Y|X) ≡ 1."""
    a: float = Field(default=10.0, description="Amplitude of the conditional mean.")
    n: int = Field(default=10_000, ge=4, description="Samples per trial.")
    trials: int = Field(default=4000, ge=1, description="Independent trials.")
    seed: int = Field(default=42, ge=0, description="Trial t uses seed + t.")
    mode: Literal["sliding", "disjoint"] = Field(default="sliding", description="Pairing of sorted points.")


@dataclass
class SimulationResult:
    config: SimConfig
    mse_multi_obs: np.ndarray
    mse_indirect: np.ndarray
    methods: List[str] = field(default_factory=lambda: ["multi_obs", "indirect"])

    def summary(self) -> List[dict]:
        rows = []
        for method, mse in zip(self.methods, (self.mse_multi_obs, self.mse_indirect)):
            rows.append({
                "n": self.config.n,
                "a": self.config.a,
                "trials": self.config.trials,
                "mode": self.config.mode,
                "method": method,
                "mse_mean": float(np.mean(mse)),
                "mse_median": float(np.median(mse)),
            })
        return rows

    @property
    def multi_obs_wins(self) -> int:
        """Trials where the two-observation fit has the smaller error."""
        return int(np.sum(self.mse_multi_obs < self.mse_indirect))

    def to_csv(self) -> str:
        """CSV with header ``n,a,trials,mode,method,mse_mean,mse_median``."""
        lines = ["n,a,trials,mode,method,mse_mean,mse_median"]
        for row in self.summary():
            lines.append(
                f"{row['n']},{row['a']:g},{row['trials']},{row['mode']},{row['method']},"
                f"{row['mse_mean']:.10g},{row['mse_median']:.10g}"
            )
        return "\n".join(lines) + "\n"


def simulate_dataset(a: float, n: int, seed: int) -> ScatterDataset:
    """
    One trial's data from PCG64(seed): n uniforms for x, then n 53-bit
    integers k mapped to Z = Φ⁻¹((k + ½)/2⁵³).
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.random(n)
    k = rng.integers(0, TWO_53, size=n, dtype=np.int64)
    z = ndtri((k.astype(float) + 0.5) / TWO_53)
    return ScatterDataset(x, a * np.sin(4.0 * np.pi * x) + z)


def _trial(cfg: SimConfig, t: int, grid: np.ndarray):
    data = simulate_dataset(cfg.a, cfg.n, cfg.seed + t)
    multi = fit_target_linear(cluster_points(data, 2, cfg.mode), half_squared_difference)
    indirect = fit_variance_indirect(data)
    return float(np.mean((multi(grid) - 1.0) ** 2)), float(np.mean((indirect(grid) - 1.0) ** 2))


def run_simulation(cfg: SimConfig, settings: Optional[SolverSettings] = None, jobs: int = 1) -> SimulationResult:
    """
    Runs cfg.trials independent trials and scores both variance fits by
    their mean squared deviation from 1 on a uniform x-grid over [0, 1].
    """
    grid = np.linspace(0.0, 1.0, (settings or SolverSettings()).regression.grid_points)
    log = get_session_log()
    log.info(f"Simulating a={cfg.a:g}, n={cfg.n}, trials={cfg.trials}, mode={cfg.mode}")

    def run(t: int):
        return _trial(cfg, t, grid)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            errors = list(pool.map(run, range(cfg.trials)))
    else:
        errors = [run(t) for t in range(cfg.trials)]
    errors = np.asarray(errors)
    result = SimulationResult(config=cfg, mse_multi_obs=errors[:, 0], mse_indirect=errors[:, 1])
    log.success(f"multi_obs beat indirect in {result.multi_obs_wins} of {cfg.trials} trials")
    return result
