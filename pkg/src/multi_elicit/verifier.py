"""
Numerical elicitation checks.

minimize_report locates argmin_r E_{p^m}[ℓ(r, ω⃗)] on the loss's report box;
verify_elicits compares that minimizer (through the loss's link) against the
exact property value on a simplex grid; check_identification does the same
for the identification function; frontier_scan assembles both sides into a
(d, m) table.

A passing report is evidence on the grid, labelled "verified (grid)".
"""
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .catalog import default_space, frontier_claims, get_loss, named_property
from .core import (
    Distribution,
    ExpectedLoss,
    MultiObsLoss,
    OutcomeSpace,
    Property,
    expected_identification,
    interior_grid,
    simplex_grid,
)
from .errors import (
    ArityError,
    DomainError,
    ElicitationError,
    MissingIdentificationError,
    NonUniqueMinimizerError,
    ReportBoxError,
)
from .session_log import get_session_log
from .settings import MinimizerSettings, SolverSettings
from .witness import Witness, refute

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

# =============================================================================
# MINIMIZATION
# =============================================================================


def golden_section(f: Callable[[float], float], a: float, b: float, width: float) -> float:
    """
    Golden-section search for a minimum of f on [a, b], shrinking the
    bracket to the given width.
    """
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > width:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _line_minimum(objective: ExpectedLoss, r: np.ndarray, axis: int, box: Tuple[float, float],
                  cfg: MinimizerSettings, name: str) -> float:
    """
    Coarse grid along one report coordinate, then golden-section on the best bracket.

    Raises:
        NonUniqueMinimizerError: If the objective is flat along the coordinate.
        ReportBoxError: If the best grid point is an edge of the box and the
            objective keeps decreasing one grid step beyond it.
    """
    lo, hi = box
    grid = np.linspace(lo, hi, cfg.coarse_grid)
    reports = np.repeat(r[None, :], cfg.coarse_grid, axis=0)
    reports[:, axis] = grid
    values = objective.batch(reports)
    if values.max() - values.min() < cfg.flat_tol:
        raise NonUniqueMinimizerError(
            f"Expected loss of {name} is flat along report coordinate {axis} on [{lo:g}, {hi:g}]"
        )
    i = int(np.argmin(values))
    if i in (0, cfg.coarse_grid - 1):
        step = grid[1] - grid[0]
        beyond = reports[i].copy()
        beyond[axis] += step if i else -step
        if objective(beyond) < values[i] - cfg.flat_tol * max(1.0, abs(values[i])):
            raise ReportBoxError(
                f"Minimizer of {name} lies beyond report coordinate {axis}'s box [{lo:g}, {hi:g}]"
            )
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, cfg.coarse_grid - 1)]

    def along(x: float) -> float:
        point = r.copy()
        point[axis] = x
        return objective(point)

    return golden_section(along, a, b, cfg.golden_width)


def minimize_report(loss: MultiObsLoss, p: Distribution, settings: Optional[SolverSettings] = None) -> np.ndarray:
    """
    Locates the expected-loss minimizer over the report box.

    d = 1: coarse grid then golden-section refinement. d = 2: per-coordinate
    alternation of the same line search, stopping once a sweep moves the
    report by less than the golden-section width.

    Args:
        loss: The loss to minimize (report_dim ≤ 2).
        p: The distribution of each observation.
        settings: Solver settings; defaults when omitted.

    Returns:
        The minimizing report, shape (d,).

    Raises:
        ArityError: If report_dim > 2.
        DomainError: If the loss's precondition fails at p.
        NonUniqueMinimizerError: If the expected loss is flat along a coordinate.
        ReportBoxError: If the minimizer lies outside the search box.
    """
    cfg = (settings or SolverSettings()).minimizer
    if loss.report_dim > 2:
        raise ArityError(f"{loss.name}: numerical minimization supports report_dim ≤ 2, got {loss.report_dim}")
    loss.check_domain(p)
    objective = ExpectedLoss(loss, p)
    box = loss.search_box(p)
    r = np.array([0.5 * (lo + hi) for lo, hi in box])

    if loss.report_dim == 1:
        r[0] = _line_minimum(objective, r, 0, box[0], cfg, loss.name)
        return r

    for _ in range(cfg.sweeps):
        previous = r.copy()
        for axis in range(loss.report_dim):
            r[axis] = _line_minimum(objective, r, axis, box[axis], cfg, loss.name)
        if np.max(np.abs(r - previous)) <= cfg.golden_width:
            break
    return r


# =============================================================================
# VERIFICATION REPORTS
# =============================================================================

class PointError(BaseModel):
    p: List[float]
    error: Optional[float] = Field(default=None, description="Absolute report error; None when unresolved.")


class VerificationReport(BaseModel):
    """Outcome of verify_elicits on one (loss, property, grid) triple."""
    loss: str
    property: str
    resolution: int
    tolerance: float = Field(..., gt=0)
    evaluated: int = 0
    skipped: int = Field(default=0, description="Grid points outside the property or loss domain.")
    unresolved: int = Field(default=0, description="Grid points with a non-unique or out-of-box minimizer, or a non-finite link value.")
    worst_error: float = 0.0
    worst_at: Optional[List[float]] = None
    errors: List[PointError] = Field(default_factory=list)
    passed: bool = False
    status: str = "failed (grid)"

    @model_validator(mode="after")
    def check_consistency(self):
        """passed ⇔ every evaluated point resolved and within tolerance."""
        if not math.isfinite(self.worst_error):
            raise ValueError("worst_error must be finite")
        expected = self.evaluated > 0 and self.unresolved == 0 and self.worst_error <= self.tolerance
        if self.passed != expected:
            raise ValueError("passed flag inconsistent with worst_error and tolerance")
        self.status = "verified (grid)" if self.passed else "failed (grid)"
        return self


class IdentificationReport(BaseModel):
    loss: str
    property: str
    resolution: int
    tolerance: float = Field(..., gt=0)
    evaluated: int = 0
    skipped: int = 0
    worst_residual: float = 0.0
    worst_at: Optional[List[float]] = None
    sanity_failures: int = Field(default=0, description="Points where an offset report still looked identified.")
    passed: bool = False


def _verification_grid(prop: Property, loss: MultiObsLoss, space: OutcomeSpace, resolution: int,
                       interior: Optional[bool]) -> List[Distribution]:
    if interior is None:
        interior = prop.interior_only or prop.domain is not None or loss.requires is not None
    return interior_grid(space, resolution) if interior else simplex_grid(space, resolution)


def _parallel_map(fn: Callable, items: Sequence, jobs: int) -> List:
    """Ordered map, threaded when jobs > 1."""
    if jobs <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def verify_elicits(
    loss: MultiObsLoss,
    prop: Property,
    space: OutcomeSpace,
    resolution: int,
    tol: float = 1e-3,
    interior: Optional[bool] = None,
    jobs: int = 1,
    settings: Optional[SolverSettings] = None,
) -> VerificationReport:
    """
    Minimizes the expected loss at every grid distribution and compares the
    (linked) minimizer to the exact property value.

    Grid points outside the property's or the loss's domain are skipped and
    counted. Domain-restricted and interior-only properties are checked on the
    interior grid (coordinates ≥ 1/(2N)) unless `interior` says otherwise.

    Raises:
        ArityError: If the loss's linked report dimension differs from the property's.
    """
    if loss.target_dim != prop.report_dim:
        raise ArityError(
            f"{loss.name} reports {loss.target_dim} value(s) after its link, {prop.name} has {prop.report_dim}"
        )
    log = get_session_log()
    grid = _verification_grid(prop, loss, space, resolution, interior)
    log.info(f"Verifying {loss.name} against {prop.name} on {len(grid)} grid distributions (N={resolution})")

    def check(p: Distribution):
        try:
            truth = prop.evaluate(p)
            loss.check_domain(p)
        except DomainError:
            return "skipped", None
        try:
            report = loss.reported(minimize_report(loss, p, settings))
        except (NonUniqueMinimizerError, ReportBoxError):
            return "unresolved", None
        error = float(np.max(np.abs(report - truth)))
        if not math.isfinite(error):
            return "unresolved", None
        return "ok", error

    outcomes = _parallel_map(check, grid, jobs)

    entries = []
    skipped = unresolved = 0
    for p, (state, error) in zip(grid, outcomes):
        if state == "skipped":
            skipped += 1
            continue
        if state == "unresolved":
            unresolved += 1
        entries.append(PointError(p=list(p.as_tuple()), error=error))
    entries.sort(key=lambda e: e.p)

    worst_error, worst_at = 0.0, None
    for entry in entries:
        if entry.error is not None and (worst_at is None or entry.error > worst_error):
            worst_error, worst_at = entry.error, entry.p

    evaluated = len(entries)
    passed = evaluated > 0 and unresolved == 0 and worst_error <= tol
    report = VerificationReport(
        loss=loss.name,
        property=prop.name,
        resolution=resolution,
        tolerance=tol,
        evaluated=evaluated,
        skipped=skipped,
        unresolved=unresolved,
        worst_error=worst_error,
        worst_at=worst_at,
        errors=entries,
        passed=passed,
    )
    if passed:
        log.success(f"{loss.name} → {prop.name}: verified (grid), worst error {worst_error:.3g}")
    else:
        log.info(f"{loss.name} → {prop.name}: failed (grid), worst error {worst_error:.3g}, unresolved {unresolved}")
    return report


def check_identification(
    loss: MultiObsLoss,
    prop: Property,
    space: OutcomeSpace,
    resolution: int,
    tol: float = 1e-6,
    interior: Optional[bool] = None,
) -> IdentificationReport:
    """
    Checks ‖E_{p^m}[V(Γ(p), ω⃗)]‖∞ ≤ tol at every grid p, and that moving the
    report by ±10·tol makes the expectation exceed tol.

    Property values are mapped to report coordinates through the loss's
    inverse link when the loss carries a link.

    Raises:
        MissingIdentificationError: If the loss has no V, or has a link but
            no inverse link.
    """
    if loss.identification is None:
        raise MissingIdentificationError(f"{loss.name} has no identification function")
    if loss.link is not None and loss.inverse_link is None:
        raise MissingIdentificationError(f"{loss.name} has a link but no inverse link to map property values")

    grid = _verification_grid(prop, loss, space, resolution, interior)
    evaluated = skipped = sanity_failures = 0
    worst, worst_at = 0.0, None
    for p in grid:
        try:
            value = prop.evaluate(p)
            loss.check_domain(p)
        except DomainError:
            skipped += 1
            continue
        r = np.atleast_1d(loss.inverse_link(value)) if loss.link is not None else value
        residual = float(np.max(np.abs(expected_identification(loss, r, p))))
        evaluated += 1
        if worst_at is None or residual > worst:
            worst, worst_at = residual, list(p.as_tuple())
        for offset in (10 * tol, -10 * tol):
            moved = float(np.max(np.abs(expected_identification(loss, r + offset, p))))
            if moved <= tol:
                sanity_failures += 1
                break

    passed = evaluated > 0 and worst <= tol and sanity_failures == 0
    return IdentificationReport(
        loss=loss.name,
        property=prop.name,
        resolution=resolution,
        tolerance=tol,
        evaluated=evaluated,
        skipped=skipped,
        worst_residual=worst,
        worst_at=worst_at,
        sanity_failures=sanity_failures,
        passed=passed,
    )


# =============================================================================
# FRONTIER SCANS
# =============================================================================

class FrontierCell(BaseModel):
    d: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    status: str = Field(..., pattern="^(verified|refuted|unknown)$")
    evidence: str = ""


def _closure(cells: Dict[Tuple[int, int], FrontierCell]):
    """
    Verified cells propagate up and to the right; direct (d = 1) refutations
    propagate to fewer observations.
    """
    verified = [key for key, cell in cells.items() if cell.status == "verified" and not cell.evidence.startswith("closure")]
    for d0, m0 in verified:
        for (d, m), cell in cells.items():
            if d >= d0 and m >= m0 and cell.status != "verified":
                if cell.status == "refuted":
                    get_session_log().warning(f"Cell ({d},{m}) refuted but ({d0},{m0}) verified; keeping verified")
                cells[(d, m)] = FrontierCell(d=d, m=m, status="verified", evidence=f"closure:({d0},{m0})")
    refuted = [key for key, cell in cells.items() if cell.status == "refuted" and key[0] == 1]
    for _, m0 in refuted:
        for m in range(1, m0):
            cell = cells.get((1, m))
            if cell is not None and cell.status == "unknown":
                cells[(1, m)] = FrontierCell(d=1, m=m, status="refuted", evidence=f"closure:(1,{m0})")


def frontier_scan(
    property_name: str,
    max_d: int,
    max_m: int,
    space: Optional[OutcomeSpace] = None,
    resolution: int = 10,
    tol: float = 1e-3,
    jobs: int = 1,
    settings: Optional[SolverSettings] = None,
) -> List[FrontierCell]:
    """
    Classifies every (d, m) with d ≤ max_d, m ≤ max_m as verified, refuted or
    unknown from the property's catalog claims.

    Constructions are verified numerically (d ≤ 2 only); refutation recipes
    run a witness search (d = 1 only). Anything else stays unknown.
    """

    log = get_session_log()
    prop = named_property(property_name, space)
    space = space or default_space(property_name)
    claims = frontier_claims(property_name, space)
    log.section(f"Frontier scan: {prop.name} (d ≤ {max_d}, m ≤ {max_m})")

    cells: Dict[Tuple[int, int], FrontierCell] = {}
    for d in range(1, max_d + 1):
        for m in range(1, max_m + 1):
            status, evidence = "unknown", ""
            loss_name = claims.constructions.get((d, m))
            recipe = claims.refutations.get((d, m))
            if loss_name is not None:
                if d > 2:
                    evidence = f"unverifiable:{loss_name}"
                else:
                    try:
                        report = verify_elicits(get_loss(loss_name, space), prop, space, resolution, tol,
                                                jobs=jobs, settings=settings)
                        status = "verified" if report.passed else "unknown"
                        evidence = f"{'verify' if report.passed else 'verify-failed'}:{loss_name}"
                    except ElicitationError as e:
                        log.warning(f"({d},{m}) {loss_name}: {e}")
                        evidence = f"error:{loss_name}"
            elif recipe is not None and d == 1:
                try:
                    result = refute(prop, recipe, space, m, settings=settings)
                    if isinstance(result, Witness):
                        status = "refuted"
                        evidence = f"witness:r1={result.r1:.6g};r2={result.r2:.6g}"
                    else:
                        evidence = result.status
                except ElicitationError as e:
                    log.warning(f"({d},{m}) refutation: {e}")
                    evidence = "error:witness"
            cells[(d, m)] = FrontierCell(d=d, m=m, status=status, evidence=evidence)

    _closure(cells)
    ordered = [cells[key] for key in sorted(cells)]
    assert_frontier_monotone(ordered)
    return ordered


def assert_frontier_monotone(cells: Iterable[FrontierCell]):
    """
    Raises:
        ElicitationError: If a cell up or right of a verified cell is refuted.
    """
    cells = list(cells)
    verified = [(c.d, c.m) for c in cells if c.status == "verified"]
    for c in cells:
        if c.status != "refuted":
            continue
        for d0, m0 in verified:
            if c.d >= d0 and c.m >= m0:
                raise ElicitationError(f"Cell ({c.d},{c.m}) is refuted but ({d0},{m0}) is verified")


def frontier_csv(cells: Iterable[FrontierCell]) -> str:
    """CSV with header ``d,m,status,evidence``."""
    lines = ["d,m,status,evidence"]
    for c in cells:
        lines.append(f"{c.d},{c.m},{c.status},{c.evidence}")
    return "\n".join(lines) + "\n"
