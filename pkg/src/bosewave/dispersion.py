"""Complex dispersion relation of the 2n-velocity gas.

Plane waves D_m = a_m exp(i(kx - wt)) in the linearized kinetic system obey

    (1 + i*h_b - 2*lambda^2 * cos^2[theta+(m-1)pi/n]) a_m
        - (i*h_b/n) * sum_k a_k = 0,         m = 1..n,

with lambda = k*c/(sqrt(2)*omega).  Eliminating the amplitudes gives the
scalar relation

    1 - (i*h_b/n) * sum_m 1/(1 + i*h_b - 2*lambda^2*cos^2[...]) = 0,

which, after clearing denominators, is a polynomial of degree <= n in
u = lambda^2.  This module assembles that polynomial, finds all roots,
classifies branches (the acoustic branch is the one continued from
lambda = 1 at large h_b, i.e. the hydrodynamic limit), and reconstructs
mode shapes.

Conventions: forward wave exp(i(kx - wt)) with real omega > 0, so
lambda_r >= 0 and lambda_i >= 0 means damped rightward propagation.
"""

from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    BranchAmbiguityError,
    ConvergenceError,
    DomainError,
    SingularDenominatorError,
)

__all__ = [
    "DispersionPolynomial",
    "DispersionRoot",
    "ModeShape",
    "assemble_polynomial",
    "solve_roots",
    "closed_form_n2",
    "principal_lambda",
    "residual",
    "root_residual",
    "mode_shape",
    "select_branch",
    "acoustic_root",
    "continuation_track",
]

TRIM_REL_TOL = 1e-13          # leading-coefficient trim, relative to max |coeff|
ROOT_RESIDUAL_TOL = 1e-12     # solver target on the normalized polynomial residual
CONTRACT_RESIDUAL_TOL = 1e-9  # acceptance bound carried by DispersionRoot
SINGULAR_TOL = 1e-14          # denominator magnitude treated as singular
AMBIGUITY_TOL = 1e-8          # two roots this close at an endpoint: degenerate
CONTINUATION_START = 1e6      # h_b where the acoustic branch is seeded at u = 1
CONTINUATION_PER_DECADE = 8


def _cos2(theta: float, n: int) -> np.ndarray:
    return np.cos(theta + np.arange(n) * np.pi / n) ** 2


@dataclass(frozen=True)
class DispersionPolynomial:
    """Monic cleared-denominator polynomial in u = lambda^2.

    coeffs are complex, ordered by descending degree, with leading
    coefficients of relative magnitude below TRIM_REL_TOL trimmed away
    (roots escaping to infinity at degenerate angles are dropped, not
    fabricated).
    """

    coeffs: np.ndarray
    degree: int
    params: tuple  # (h_b, theta, n) snapshot

    def __call__(self, u: complex) -> complex:
        return complex(np.polyval(self.coeffs, u))


@dataclass(frozen=True)
class DispersionRoot:
    """One root of the dispersion relation.

    lam is the principal lambda (Re >= 0); u = lam^2; branch is "acoustic"
    or "secondary(j)"; residual is the magnitude of the rational dispersion
    relation at lam, except at points where a resolvent denominator
    vanishes (possible on secondary branches at degenerate angles), where
    the normalized polynomial residual is reported instead.
    """

    lam: complex
    u: complex
    branch: str
    residual: float

    @property
    def lambda_r(self) -> float:
        return self.lam.real

    @property
    def lambda_i(self) -> float:
        return self.lam.imag


@dataclass(frozen=True)
class ModeShape:
    """Amplitude vector a_m, scaled so the largest-magnitude entry is 1."""

    amplitudes: np.ndarray


def assemble_polynomial(h_b: float, theta: float, n: int) -> DispersionPolynomial:
    """Clear the denominators of the dispersion relation.

    Returns the monic polynomial prod_m d_m(u) - (i*h_b/n) sum_m prod_{j!=m} d_j(u)
    with d_m(u) = 1 + i*h_b - 2*u*cos^2[theta+(m-1)pi/n].  For n=2 this is
    sin^2(2*theta)*u^2 - (2+i*h_b)*u + (1+i*h_b) up to the monic scaling.
    """
    if not h_b > 0:
        raise DomainError("h_b must be positive")
    if n < 2:
        raise DomainError("n must be >= 2")
    z = 1j * h_b
    factors = [np.array([-2.0 * c2, 1.0 + z], dtype=complex) for c2 in _cos2(theta, n)]

    def product_skipping(skip):
        p = np.array([1.0 + 0j])
        for m, f in enumerate(factors):
            if m != skip:
                p = np.convolve(p, f)
        return p

    poly = product_skipping(None)
    tail = None
    for m in range(n):
        pm = product_skipping(m)
        tail = pm if tail is None else np.polyadd(tail, pm)
    poly = np.polyadd(poly, -(z / n) * tail)

    scale = np.max(np.abs(poly))
    k = 0
    while k < len(poly) - 1 and abs(poly[k]) < TRIM_REL_TOL * scale:
        k += 1
    poly = poly[k:] / poly[k]
    return DispersionPolynomial(coeffs=poly, degree=len(poly) - 1,
                                params=(h_b, theta, n))


def _normalized_poly_residual(coeffs: np.ndarray, u: np.ndarray) -> np.ndarray:
    d = len(coeffs) - 1
    return np.abs(np.polyval(coeffs, u)) / np.maximum(1.0, np.abs(u)) ** d


def _residual_acceptable(coeffs: np.ndarray, u: np.ndarray) -> bool:
    # spec bound, or the double-precision evaluation floor when the monic
    # coefficients are huge (near-degenerate angles)
    d = len(coeffs) - 1
    pu = np.abs(np.polyval(coeffs, u))
    au = np.abs(u)
    bound = ROOT_RESIDUAL_TOL * np.maximum(1.0, au) ** d
    floor = np.zeros_like(au)
    for i, c in enumerate(coeffs):
        floor = floor + abs(c) * au ** (d - i)
    return bool(np.all(pu <= np.maximum(bound, 64 * np.finfo(float).eps * floor)))


def _aberth_pass(coeffs: np.ndarray, radius: float, maxiter: int) -> np.ndarray:
    deg = len(coeffs) - 1
    dcoeffs = coeffs[:-1] * np.arange(deg, 0, -1)
    zs = radius * np.exp(1j * (2 * np.pi * np.arange(deg) / deg + 0.4 / deg))
    for _ in range(maxiter):
        pz = np.polyval(coeffs, zs)
        dpz = np.polyval(dcoeffs, zs)
        newton = np.where(dpz != 0, pz / dpz, 0.1 + 0.1j)
        diff = zs[:, None] - zs[None, :]
        np.fill_diagonal(diff, np.inf)
        denom = 1.0 - newton * np.sum(1.0 / diff, axis=1)
        w = np.where(denom != 0, newton / denom, newton)
        zs = zs - w
        if np.all(np.abs(w) <= 1e-14 * (1.0 + np.abs(zs))):
            break
    for _ in range(3):  # Newton polish
        pz = np.polyval(coeffs, zs)
        dpz = np.polyval(dcoeffs, zs)
        zs = zs - np.where(dpz != 0, pz / dpz, 0.0)
    return zs


def solve_roots(poly: DispersionPolynomial, maxiter: int = 200) -> np.ndarray:
    """All roots (with multiplicity) of the dispersion polynomial.

    Aberth-Ehrlich simultaneous iteration seeded on a circle of radius
    1 + max|coeff|; a second start on a product-of-roots-scaled circle and a
    companion-eigenvalue fallback cover ill-conditioned degenerate corners.
    """
    coeffs = poly.coeffs
    deg = len(coeffs) - 1
    if deg < 1:
        raise DomainError("polynomial degree must be >= 1")
    if deg == 1:
        return np.array([-coeffs[1] / coeffs[0]])

    radii = (1.0 + max(abs(c) for c in coeffs),
             max(abs(coeffs[-1]) ** (1.0 / deg), 1e-6))
    for radius in radii:
        zs = _aberth_pass(coeffs, radius, maxiter)
        if _residual_acceptable(coeffs, zs):
            return zs
    zs = np.roots(coeffs)
    dcoeffs = coeffs[:-1] * np.arange(deg, 0, -1)
    for _ in range(5):
        pz = np.polyval(coeffs, zs)
        dpz = np.polyval(dcoeffs, zs)
        zs = zs - np.where(dpz != 0, pz / dpz, 0.0)
    if _residual_acceptable(coeffs, zs):
        return zs
    raise ConvergenceError(
        "root refinement did not meet the residual bound; perturb h_b by an "
        "ulp-scale epsilon and retry")


def closed_form_n2(h_b: float, theta: float) -> np.ndarray:
    """Independent oracle for n=2: roots of sin^2(2θ)u^2 - (2+i h_b)u + (1+i h_b).

    Uses the numerically stable quadratic formula; collapses to the linear
    root (1+i h_b)/(2+i h_b) when sin^2(2θ) is below the trim tolerance.
    """
    if not h_b > 0:
        raise DomainError("h_b must be positive")
    z = 1j * h_b
    s = np.sin(2.0 * theta) ** 2
    coeffs = np.array([s, -(2.0 + z), 1.0 + z], dtype=complex)
    scale = np.max(np.abs(coeffs))
    if abs(s) < TRIM_REL_TOL * scale:
        return np.array([(1.0 + z) / (2.0 + z)])
    disc = cmath.sqrt(coeffs[1] ** 2 - 4.0 * coeffs[0] * coeffs[2])
    if abs(coeffs[1] - disc) >= abs(coeffs[1] + disc):
        q = -(coeffs[1] - disc) / 2.0
    else:
        q = -(coeffs[1] + disc) / 2.0
    return np.array([q / coeffs[0], coeffs[2] / q])


def principal_lambda(u: complex) -> complex:
    """Square root of u on the forward-wave branch: Re > 0, or Re = 0 and Im >= 0."""
    lam = cmath.sqrt(u)
    if lam.real < 0 or (lam.real == 0 and lam.imag < 0):
        lam = -lam
    return lam


def residual(lam: complex, h_b: float, theta: float, n: int) -> complex:
    """Left side of the rational dispersion relation, evaluated exactly.

    Raises :class:`SingularDenominatorError` if any denominator is within
    1e-14 of zero (e.g. the secondary root at theta = pi/4, n = 2).
    """
    denoms = 1.0 + 1j * h_b - 2.0 * lam * lam * _cos2(theta, n)
    if np.any(np.abs(denoms) < SINGULAR_TOL):
        raise SingularDenominatorError(
            "resolvent denominator vanishes at this lambda")
    return complex(1.0 - (1j * h_b / n) * np.sum(1.0 / denoms))


def root_residual(lam: complex, h_b: float, theta: float, n: int) -> float:
    """|residual| with a polynomial fallback where the rational form is singular.

    Near-singularity is judged relative to each denominator's natural scale
    (1 + h_b + 2|lam|^2 cos^2): rational evaluation there is dominated by
    cancellation noise, so the normalized cleared-polynomial residual is the
    reliable certificate (e.g. the secondary branch at theta = pi/4).
    """
    c2 = _cos2(theta, n)
    denoms = 1.0 + 1j * h_b - 2.0 * lam * lam * c2
    scales = 1.0 + h_b + 2.0 * abs(lam) ** 2 * c2
    if np.all(np.abs(denoms) > 1e-12 * scales):
        return abs(complex(1.0 - (1j * h_b / n) * np.sum(1.0 / denoms)))
    poly = assemble_polynomial(h_b, theta, n)
    return float(_normalized_poly_residual(poly.coeffs, np.array([lam * lam]))[0])


def mode_shape(lam: complex, h_b: float, theta: float, n: int) -> ModeShape:
    """Amplitudes a_m = C/(1 + i h_b - 2 lam^2 cos^2[...]), max-normalized.

    Requires lam to be a verified root (root_residual below the contract
    tolerance); raises :class:`SingularDenominatorError` when a denominator
    magnitude is below 1e-12.
    """
    if root_residual(lam, h_b, theta, n) >= CONTRACT_RESIDUAL_TOL:
        raise DomainError("lam is not a root of the dispersion relation "
                          "(residual check failed)")
    denoms = 1.0 + 1j * h_b - 2.0 * lam * lam * _cos2(theta, n)
    if np.any(np.abs(denoms) < 1e-12):
        raise SingularDenominatorError(
            "mode shape undefined: resolvent denominator below 1e-12")
    amps = 1.0 / denoms
    amps = amps / amps[np.argmax(np.abs(amps))]
    return ModeShape(amplitudes=amps)


def _make_root(u: complex, h_b: float, theta: float, n: int, branch: str) -> DispersionRoot:
    lam = principal_lambda(u)
    return DispersionRoot(lam=lam, u=complex(u), branch=branch,
                          residual=root_residual(lam, h_b, theta, n))


def _solve_u(h_b: float, theta: float, n: int) -> np.ndarray:
    return solve_roots(assemble_polynomial(h_b, theta, n))


def _track_to(h_b: float, theta: float, n: int) -> complex:
    """Continue the acoustic root from u = 1 at large h_b down (or up) to h_b."""
    start = CONTINUATION_START if h_b <= CONTINUATION_START else 10.0 * h_b
    decades = abs(np.log10(start / h_b))
    steps = max(2, int(np.ceil(decades * CONTINUATION_PER_DECADE)) + 1)
    grid = np.geomspace(start, h_b, steps)
    u_prev = 1.0 + 0j
    for hb in grid:
        roots = _solve_u(hb, theta, n)
        u_prev = roots[np.argmin(np.abs(roots - u_prev))]
    return complex(u_prev)


def _nearest_with_ambiguity_check(roots: np.ndarray, u_target: complex) -> complex:
    order = np.argsort(np.abs(roots - u_target))
    best = roots[order[0]]
    if len(order) > 1:
        second = roots[order[1]]
        if abs(best - second) < AMBIGUITY_TOL * max(1.0, abs(best)):
            raise BranchAmbiguityError(
                f"two roots within {AMBIGUITY_TOL} of each other near "
                f"u = {u_target:.6g}: degenerate crossing")
    return complex(best)


def select_branch(roots, h_b: float, theta: float, n: int, policy: str = "acoustic"):
    """Classify roots into the acoustic branch and secondary branches.

    The acoustic branch is the root connected by continuation to lambda = 1
    as h_b -> infinity.  policy="acoustic" returns that single
    :class:`DispersionRoot`; policy="all" returns every root, secondaries
    indexed in order of descending lambda_i.
    """
    roots = np.asarray(roots, dtype=complex)
    if roots.size == 0:
        raise DomainError("roots must be nonempty")
    u_ac = _track_to(h_b, theta, n)
    u_best = _nearest_with_ambiguity_check(roots, u_ac)
    if policy == "acoustic":
        return _make_root(u_best, h_b, theta, n, "acoustic")
    if policy != "all":
        raise DomainError("policy must be 'acoustic' or 'all'")
    out = [_make_root(u_best, h_b, theta, n, "acoustic")]
    idx_best = int(np.argmin(np.abs(roots - u_best)))
    rest = [complex(u) for k, u in enumerate(roots) if k != idx_best]
    rest.sort(key=lambda u: -principal_lambda(u).imag)
    for j, u in enumerate(rest, start=1):
        out.append(_make_root(complex(u), h_b, theta, n, f"secondary({j})"))
    return out


def acoustic_root(h_b: float, theta: float, n: int) -> DispersionRoot:
    """Acoustic-branch root at a single parameter point."""
    return select_branch(_solve_u(h_b, theta, n), h_b, theta, n, policy="acoustic")


def continuation_track(theta: float, n: int, B: float, h_grid) -> list:
    """Track the acoustic branch down a descending h grid.

    The first (largest) h must be >= 1e4 so the seed u = 1 is reliable; at
    each later h the root nearest (in u) to the previous one is taken.
    Monitors the lambda_i >= 0 convention and warns (does not clamp) on
    violations, which indicate a branch crossing.
    """
    h_grid = np.asarray(h_grid, dtype=float)
    if h_grid.size == 0 or np.any(np.diff(h_grid) >= 0):
        raise DomainError("h_grid must be sorted strictly descending")
    if h_grid[0] < 1e4:
        raise DomainError("h_grid must start at h >= 1e4 for reliable seeding")
    out = []
    u_prev = 1.0 + 0j
    for h in h_grid:
        h_b = h * (1.0 + B)
        try:
            roots = _solve_u(h_b, theta, n)
        except ConvergenceError as exc:
            raise ConvergenceError(f"{exc} (at h = {h:.6g})") from exc
        u_prev = complex(roots[np.argmin(np.abs(roots - u_prev))])
        root = _make_root(u_prev, h_b, theta, n, "acoustic")
        if root.lam.imag < -1e-12:
            warnings.warn(
                f"acoustic lambda_i < 0 at h = {h:.6g} (branch-crossing "
                "diagnostic)", RuntimeWarning, stacklevel=2)
        out.append(root)
    return out
