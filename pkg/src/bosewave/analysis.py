"""Parameter sweeps and derived diagnostics.

Dispersion/attenuation curves over the rarefaction parameter h, the peak
absorption state h_max (argmax of lambda_i along a branch), the
localization-length column 1/lambda_i, and the orientation scan that
exhibits the resonance jump at theta = pi/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import dispersion
from .errors import DomainError, NoInteriorMaximumError

__all__ = [
    "SweepRow",
    "SweepTable",
    "PeakResult",
    "ThetaScanRow",
    "sweep",
    "find_hmax",
    "localization_length",
    "theta_scan",
    "DEFAULT_H_RANGE",
]

DEFAULT_H_RANGE = (1e-2, 1e2)
SCAN_POINTS = 240              # coarse log-grid size for peak bracketing
GOLDEN_REL_TOL = 5e-5          # final bracket width stays below 1e-4 * h_max
LAMBDA_I_FLOOR = 1e-12         # below this the branch counts as unattenuated
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SweepRow:
    h: float
    B: float
    theta: float
    n: int
    branch: str
    lambda_r: float
    lambda_i: float
    residual: float
    loc_length: float | None = None


@dataclass(frozen=True)
class SweepTable:
    rows: tuple

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class PeakResult:
    h_max: float
    lambda_i_max: float
    bracket: tuple


@dataclass(frozen=True)
class ThetaScanRow:
    theta: float
    branch: str
    max_lambda_i: float


def _seeded_h_grid(h_top: float) -> np.ndarray:
    """Descending continuation grid from the seeding region down to h_top."""
    start = max(1e6, 10.0 * h_top)
    decades = math.log10(start / h_top)
    steps = max(2, int(math.ceil(decades * dispersion.CONTINUATION_PER_DECADE)) + 1)
    return np.geomspace(start, h_top, steps)


class _BranchLine:
    """Acoustic-branch tracker along one (theta, B, n) line.

    Seeds u = 1 at large h_b once, then answers point queries with a single
    polynomial solve by continuing from the nearest previously visited h_b
    anchor (golden-section refinement stays local, so this is safe).
    """

    def __init__(self, theta: float, B: float, n: int, h_top: float):
        self.theta = theta
        self.B = B
        self.n = n
        self._anchors_h = []   # log(h_b), descending visit order not required
        self._anchors_u = []
        u = 1.0 + 0j
        h_b_top = h_top * (1.0 + B)
        for h_b in _seeded_h_grid(h_b_top):
            u = self._nearest_root(h_b, u)
        self._remember(h_b_top, u)

    def _nearest_root(self, h_b: float, u_ref: complex) -> complex:
        roots = dispersion.solve_roots(
            dispersion.assemble_polynomial(h_b, self.theta, self.n))
        return complex(roots[np.argmin(np.abs(roots - u_ref))])

    def _remember(self, h_b: float, u: complex) -> None:
        self._anchors_h.append(math.log(h_b))
        self._anchors_u.append(u)

    def acoustic_u(self, h: float) -> complex:
        h_b = h * (1.0 + self.B)
        k = int(np.argmin(np.abs(np.array(self._anchors_h) - math.log(h_b))))
        u = self._nearest_root(h_b, self._anchors_u[k])
        self._remember(h_b, u)
        return u

    def lambda_i(self, h: float, branch: str) -> float:
        h_b = h * (1.0 + self.B)
        u_ac = self.acoustic_u(h)
        if branch == "acoustic":
            return dispersion.principal_lambda(u_ac).imag
        roots = dispersion.solve_roots(
            dispersion.assemble_polynomial(h_b, self.theta, self.n))
        idx = int(np.argmin(np.abs(roots - u_ac)))
        rest = [dispersion.principal_lambda(u).imag
                for k, u in enumerate(roots) if k != idx]
        if not rest:
            return math.inf  # branch escaped to infinity at a degenerate angle
        return max(rest)


def sweep(theta_list, B_list, h_grid, n: int,
          branch_policy: str = "acoustic") -> SweepTable:
    """Continuation-tracked roots for every (theta, B) line of the h grid.

    Rows are ordered theta-major, then B, then h descending.  Solver
    failures become explicit rows (branch "error", NaN values) rather than
    silently dropped.
    """
    theta_list = list(theta_list)
    B_list = list(B_list)
    h_grid = np.asarray(sorted(set(float(h) for h in h_grid), reverse=True))
    if len(theta_list) == 0 or len(B_list) == 0 or h_grid.size == 0:
        raise DomainError("theta_list, B_list and h_grid must be nonempty")
    if np.any(h_grid <= 0):
        raise DomainError("h_grid must be positive")
    if branch_policy not in ("acoustic", "all"):
        raise DomainError("branch_policy must be 'acoustic' or 'all'")

    rows = []
    for theta in theta_list:
        for B in B_list:
            u_prev = 1.0 + 0j
            seed_grid = _seeded_h_grid(h_grid[0] * (1.0 + B))
            for h_b in seed_grid:
                roots = dispersion.solve_roots(
                    dispersion.assemble_polynomial(h_b, theta, n))
                u_prev = complex(roots[np.argmin(np.abs(roots - u_prev))])
            for h in h_grid:
                h_b = h * (1.0 + B)
                try:
                    roots = dispersion.solve_roots(
                        dispersion.assemble_polynomial(h_b, theta, n))
                except Exception:
                    rows.append(SweepRow(h=h, B=B, theta=theta, n=n,
                                         branch="error", lambda_r=math.nan,
                                         lambda_i=math.nan, residual=math.nan))
                    continue
                u_prev = complex(roots[np.argmin(np.abs(roots - u_prev))])
                lam = dispersion.principal_lambda(u_prev)
                rows.append(SweepRow(
                    h=h, B=B, theta=theta, n=n, branch="acoustic",
                    lambda_r=lam.real, lambda_i=lam.imag,
                    residual=dispersion.root_residual(lam, h_b, theta, n)))
                if branch_policy == "all":
                    idx = int(np.argmin(np.abs(roots - u_prev)))
                    rest = [complex(u) for k, u in enumerate(roots) if k != idx]
                    rest.sort(key=lambda u: -dispersion.principal_lambda(u).imag)
                    for j, u in enumerate(rest, start=1):
                        lam_s = dispersion.principal_lambda(u)
                        rows.append(SweepRow(
                            h=h, B=B, theta=theta, n=n, branch=f"secondary({j})",
                            lambda_r=lam_s.real, lambda_i=lam_s.imag,
                            residual=dispersion.root_residual(lam_s, h_b, theta, n)))
    return SweepTable(rows=tuple(rows))


def _golden_max(f, a: float, b: float, rel_tol: float):
    """Golden-section maximization on a log-h axis."""
    la, lb = math.log(a), math.log(b)
    lc = lb - INV_PHI * (lb - la)
    ld = la + INV_PHI * (lb - la)
    fc, fd = f(math.exp(lc)), f(math.exp(ld))
    while (lb - la) > rel_tol:
        if fc >= fd:
            lb, ld, fd = ld, lc, fc
            lc = lb - INV_PHI * (lb - la)
            fc = f(math.exp(lc))
        else:
            la, lc, fc = lc, ld, fd
            ld = la + INV_PHI * (lb - la)
            fd = f(math.exp(ld))
    h_lo, h_hi = math.exp(la), math.exp(lb)
    h_best = math.sqrt(h_lo * h_hi)
    return h_best, f(h_best), (h_lo, h_hi)


def find_hmax(theta: float, B: float, n: int = 2, branch: str = "acoustic",
              h_range: tuple = DEFAULT_H_RANGE) -> PeakResult:
    """Locate the maximum-absorption state h_max on a branch.

    Coarse log-grid scan (>= 200 points) to bracket the peak, then
    golden-section refinement until the bracket is under 1e-4 relative
    width.  Raises
    :class:`NoInteriorMaximumError` when lambda_i is monotone on the range
    or the branch is unattenuated (e.g. the acoustic branch at theta=pi/4).
    """
    lo, hi = h_range
    if not (0 < lo < hi):
        raise DomainError("h_range must satisfy 0 < lo < hi")
    if branch not in ("acoustic", "secondary"):
        raise DomainError("branch must be 'acoustic' or 'secondary'")
    line = _BranchLine(theta, B, n, hi)
    grid = np.geomspace(hi, lo, SCAN_POINTS)[::-1]   # visit descending, report ascending
    values = np.array([line.lambda_i(h, branch) for h in grid[::-1]])[::-1]
    k = int(np.argmax(values))
    if values[k] < LAMBDA_I_FLOOR:
        raise NoInteriorMaximumError(
            "lambda_i is zero on the whole range (unattenuated branch)")
    if k == 0 or k == len(grid) - 1:
        raise NoInteriorMaximumError(
            "lambda_i is monotone on the range: no interior maximum")
    h_best, li_best, bracket = _golden_max(
        lambda h: line.lambda_i(h, branch),
        grid[k - 1], grid[k + 1], GOLDEN_REL_TOL)
    return PeakResult(h_max=h_best, lambda_i_max=li_best, bracket=bracket)


def localization_length(table: SweepTable) -> SweepTable:
    """Attach the localization length 1/lambda_i to every row.

    Rows with lambda_i at (numerical) zero get an explicit infinite marker,
    never a large sentinel.
    """
    rows = []
    for row in table:
        if not math.isfinite(row.lambda_i) or row.lambda_i < LAMBDA_I_FLOOR:
            loc = math.inf
        else:
            loc = 1.0 / row.lambda_i
        rows.append(replace(row, loc_length=loc))
    return SweepTable(rows=tuple(rows))


def _max_over_h(f, h_cap: float) -> float:
    """Maximum of f over h in (0, h_cap]: grid max, refined when interior."""
    grid = np.geomspace(h_cap * 1e-4, h_cap, SCAN_POINTS)
    values = np.array([f(h) for h in grid[::-1]])[::-1]   # descending visits
    if np.any(np.isinf(values)):
        return math.inf
    k = int(np.argmax(values))
    if values[k] < LAMBDA_I_FLOOR:
        return 0.0
    if k == 0 or k == len(grid) - 1:
        return float(values[k])
    _, best, _ = _golden_max(f, grid[k - 1], grid[k + 1], GOLDEN_REL_TOL)
    return float(max(best, values[k]))


def theta_scan(B: float, n: int, h_cap: float, theta_grid) -> list:
    """Max-over-h attenuation per orientation, acoustic and secondary branches.

    For each theta the table reports max lambda_i over h in (0, h_cap] on
    the acoustic branch and on the largest-lambda_i secondary branch.  At
    theta = pi/4 (n = 2) the acoustic value is 0 while the secondary value
    is Im sqrt(1 + i*h_cap*(1+B)), the resonance jump.  Angles where the
    secondary root escapes to infinity report inf.
    """
    if not h_cap > 0:
        raise DomainError("h_cap must be positive")
    theta_grid = list(theta_grid)
    if not theta_grid:
        raise DomainError("theta_grid must be nonempty")
    rows = []
    for theta in theta_grid:
        line = _BranchLine(theta, B, n, h_cap)
        ac = _max_over_h(lambda h: line.lambda_i(h, "acoustic"), h_cap)
        sec = _max_over_h(lambda h: line.lambda_i(h, "secondary"), h_cap)
        rows.append(ThetaScanRow(theta=theta, branch="acoustic", max_lambda_i=ac))
        rows.append(ThetaScanRow(theta=theta, branch="secondary", max_lambda_i=sec))
    return rows
