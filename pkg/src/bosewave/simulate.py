"""Kinetic wave simulator: the independent verification path.

Integrates the 2n-component kinetic system on a 1D grid and measures the
complex wavenumber of a boundary-driven plane wave, to be compared against
the dispersion-relation roots.

Linear dynamics (perturbations P_m, pair partner index m+n mod 2n):

    dP_m/dt + U_mx dP_m/dx + 2cSN0(1+B)(P_m + P_{m+n})
        = (2cSN0(1+B)/n) * sum_{k=1}^{2n} P_k

Nonlinear dynamics (number densities N_i = N0(1+P_i), indices cyclic):

    dN_i/dt + U_ix dN_i/dx =
        (cS/n) sum_j N_j N_{j+n} (1+g N_{j+1})(1+g N_{j+n+1})
        - 2cS N_i N_{i+n} (1+g N_{i+1})(1+g N_{i+n+1}),      g = gamma

Scheme: operator split, advection first then collisions.  Advection is
second-order upwind (Beam-Warming), stable for Courant numbers up to 2,
with a first-order one-sided closure at the boundary-adjacent node;
collisions are integrated with one RK4 substep.  Using the same RK4 map for
the linear and nonlinear right-hand sides keeps the nonlinear stepper
linearization-consistent with the linear one to O(eps^2) per step.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import dispersion
from .errors import (
    CFLError,
    DomainError,
    FitError,
    InstabilityError,
    PositivityError,
)
from .model import ModelConfig, reduced_params, validate

__all__ = [
    "VelocityLattice",
    "WaveField",
    "FitResult",
    "build_lattice",
    "step_linear",
    "step_nonlinear",
    "run_forced",
    "fit_wave",
    "pair_averages",
    "dump_snapshot",
]

SQRT2 = math.sqrt(2.0)
CFL_LIMIT = 0.9
COLLISION_DT_LIMIT = 0.5      # dt * 4cSN0(1+B) must stay below this
SAMPLES_PER_PERIOD = 32
INSTABILITY_FACTOR = 1e3
ZERO_SPEED_TOL = 1e-14        # |cos| below this (times c) snaps to an exact zero
KINETIC_CLEARANCE = 6.0       # e-foldings of the slowest secondary mode to skip
AMP_FLOOR_RATIO = 1e-2        # fit keeps cells above this fraction of window start


@dataclass(frozen=True)
class VelocityLattice:
    """x-components of the 2n discrete velocities; entry i+n is -entry i."""

    n: int
    x_speeds: np.ndarray


@dataclass(frozen=True)
class WaveField:
    """Perturbations P_i on a uniform grid of M cells at time t."""

    P: np.ndarray          # shape (2n, M)
    dx: float
    t: float
    config: ModelConfig


@dataclass(frozen=True)
class FitResult:
    """Measured wavenumber of a forced run: k = k_r + i k_i, lambda = k c/(sqrt2 w)."""

    k_r: float
    k_i: float
    lambda_meas: complex
    rms_residual: float


def build_lattice(config: ModelConfig) -> VelocityLattice:
    """x-speeds c*cos[theta+(i-1)pi/n] for i=1..n and their negatives.

    Speeds within rounding of zero (e.g. cos(pi/2)) are snapped to exactly 0,
    so zero-speed components are recognized reliably downstream.
    """
    config = validate(config)
    angles = config.theta + np.arange(config.n) * np.pi / config.n
    half = config.c * np.cos(angles)
    half[np.abs(half) < ZERO_SPEED_TOL * config.c] = 0.0
    return VelocityLattice(n=config.n, x_speeds=np.concatenate([half, -half]))


def _collision_rate(config: ModelConfig) -> float:
    return 4.0 * config.c * config.S * config.N0 * (1.0 + config.B)


def _check_step_pre(field: WaveField, dt: float) -> VelocityLattice:
    lattice = build_lattice(field.config)
    vmax = float(np.max(np.abs(lattice.x_speeds)))
    if vmax > 0 and dt * vmax / field.dx > CFL_LIMIT + 1e-12:
        raise CFLError(f"dt*max|x_speed|/dx = {dt * vmax / field.dx:.4g} "
                       f"exceeds {CFL_LIMIT}")
    if dt * _collision_rate(field.config) > COLLISION_DT_LIMIT + 1e-12:
        raise CFLError(f"dt*4cSN0(1+B) = {dt * _collision_rate(field.config):.4g} "
                       f"exceeds {COLLISION_DT_LIMIT}")
    return lattice


def _advect(P: np.ndarray, courant: np.ndarray, bc: str) -> np.ndarray:
    """Second-order upwind update of every component; courant is signed."""
    Q = P.copy()
    if bc == "periodic":
        for i in range(P.shape[0]):
            v = courant[i]
            if v == 0.0:
                continue
            w = abs(v)
            up1 = np.roll(P[i], 1) if v > 0 else np.roll(P[i], -1)
            up2 = np.roll(P[i], 2) if v > 0 else np.roll(P[i], -2)
            Q[i] = P[i] - w * (P[i] - up1) - 0.5 * w * (1 - w) * (P[i] - 2 * up1 + up2)
        return Q
    if bc != "open":
        raise DomainError("bc must be 'periodic' or 'open'")
    for i in range(P.shape[0]):
        v = courant[i]
        if v > 0:
            # node 0 is owned by the inflow boundary condition
            Q[i, 1:] -= v * (P[i, 1:] - P[i, :-1])
            Q[i, 2:] -= 0.5 * v * (1 - v) * (P[i, 2:] - 2 * P[i, 1:-1] + P[i, :-2])
        elif v < 0:
            w = -v
            # zeroth-order extrapolated ghost at the right end: no change there
            Q[i, :-1] -= w * (P[i, :-1] - P[i, 1:])
            Q[i, :-2] -= 0.5 * w * (1 - w) * (P[i, :-2] - 2 * P[i, 1:-1] + P[i, 2:])
    return Q


def _rk4(rhs, P: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(P)
    k2 = rhs(P + 0.5 * dt * k1)
    k3 = rhs(P + 0.5 * dt * k2)
    k4 = rhs(P + dt * k3)
    return P + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _linear_rhs(config: ModelConfig):
    n = config.n
    p2 = 2 * n
    kappa = 0.5 * _collision_rate(config)       # 2cSN0(1+B)
    L = np.full((p2, p2), kappa / n)
    for m in range(p2):
        L[m, m] -= kappa
        L[m, (m + n) % p2] -= kappa

    def rhs(P):
        return L @ P

    return rhs


def _nonlinear_rhs(config: ModelConfig):
    n = config.n
    p2 = 2 * n
    cS = config.c * config.S
    N0 = config.N0
    g = config.gamma
    i1 = np.arange(1, p2 + 1) % p2
    inn = np.arange(n, p2 + n) % p2
    in1 = np.arange(n + 1, p2 + n + 1) % p2

    def rhs(P):
        N = N0 * (1.0 + P)
        pair = N * N[inn] * (1.0 + g * N[i1]) * (1.0 + g * N[in1])
        gain = (cS / n) * np.sum(pair, axis=0)
        return (gain - 2.0 * cS * pair) / N0

    return rhs


def step_linear(field: WaveField, dt: float, bc: str = "periodic") -> WaveField:
    """One operator-split step of the linearized system."""
    lattice = _check_step_pre(field, dt)
    P = _advect(field.P, lattice.x_speeds * dt / field.dx, bc)
    P = _rk4(_linear_rhs(field.config), P, dt)
    return replace(field, P=P, t=field.t + dt)


def step_nonlinear(field: WaveField, dt: float, bc: str = "periodic") -> WaveField:
    """One operator-split step of the full quantum kinetic system."""
    lattice = _check_step_pre(field, dt)
    if np.any(field.P <= -1.0):
        raise PositivityError("number density N_i = N0(1+P_i) not positive")
    P = _advect(field.P, lattice.x_speeds * dt / field.dx, bc)
    P = _rk4(_nonlinear_rhs(field.config), P, dt)
    if np.any(P <= -1.0):
        raise PositivityError("positivity lost during nonlinear step "
                              "(amplitude too large for the scheme)")
    return replace(field, P=P, t=field.t + dt)


def pair_averages(field: WaveField) -> np.ndarray:
    """D_m = (P_m + P_{m+n})/2 for m = 1..n, per cell."""
    n = field.config.n
    return 0.5 * (field.P[:n] + field.P[n:])


def _mode_drive_weights(config: ModelConfig, lattice: VelocityLattice):
    """Complex inflow amplitudes lifted from the acoustic mode shape.

    The pair difference of the plane-wave mode is (P_m - P_{m+n})/2
    = sqrt(2)*lam*cos_m * a_m, so the component amplitudes are
    a_m*(1 ± sqrt(2)*lam*cos_m).
    """
    n = config.n
    h_b = reduced_params(config).h_b
    root = dispersion.acoustic_root(h_b, config.theta, n)
    shape = dispersion.mode_shape(root.lam, h_b, config.theta, n)
    cosines = lattice.x_speeds[:n] / config.c
    fwd = shape.amplitudes * (1.0 + SQRT2 * root.lam * cosines)
    bwd = shape.amplitudes * (1.0 - SQRT2 * root.lam * cosines)
    return np.concatenate([fwd, bwd]), root


def hydrodynamic_wavelength(config: ModelConfig) -> float:
    """Continuum-limit wavelength estimate 2*pi*c/(sqrt(2)*omega)."""
    return 2.0 * math.pi * config.c / (SQRT2 * config.omega)


def run_forced(config: ModelConfig, wavelengths: int = 12,
               points_per_wavelength: int = 40, periods: int = 5,
               mode: str = "linear", eps: float = 1e-3,
               drive: str = "mode", cfl: float = CFL_LIMIT,
               ramp_periods: float = 2.0,
               transient_periods: int | None = None) -> list[WaveField]:
    """Drive a plane wave from x=0 and return snapshots of the settled state.

    Inflow components (x_speed > 0) are forced at x=0 with the acoustic mode
    shape restricted to inflow entries (drive="uniform" forces them all
    equally instead), ramped on with a half cosine over `ramp_periods`.
    Outflow is zeroth-order extrapolated at both ends; zero-speed components
    evolve freely.  The transient discarded before recording covers the
    domain-crossing time of the slowest inflow component plus 5 periods
    (at least 10 periods); snapshots then cover the final `periods` periods
    at 32 samples per period.
    """
    config = validate(config)
    if mode not in ("linear", "nonlinear"):
        raise DomainError("mode must be 'linear' or 'nonlinear'")
    if drive not in ("mode", "uniform"):
        raise DomainError("drive must be 'mode' or 'uniform'")
    if mode == "linear" and config.n > 2:
        warnings.warn("linear collision form for n > 2 is extrapolated beyond "
                      "the n = 2 derivation", RuntimeWarning, stacklevel=2)

    lattice = build_lattice(config)
    omega = config.omega
    T = 2.0 * math.pi / omega
    lam_est = hydrodynamic_wavelength(config)
    dx = lam_est / points_per_wavelength
    M = wavelengths * points_per_wavelength + 1
    L = (M - 1) * dx

    vmax = float(np.max(np.abs(lattice.x_speeds)))
    dt_max = min(cfl * dx / vmax, COLLISION_DT_LIMIT / _collision_rate(config))
    steps_per_period = SAMPLES_PER_PERIOD * int(
        math.ceil(T / (SAMPLES_PER_PERIOD * dt_max)))
    dt = T / steps_per_period
    stride = steps_per_period // SAMPLES_PER_PERIOD

    inflow = lattice.x_speeds > 0
    if not np.any(inflow):
        raise DomainError("no inflow components: theta leaves no positive x-speed")
    if drive == "mode":
        weights, _ = _mode_drive_weights(config, lattice)
    else:
        weights = np.where(inflow, 1.0 + 0j, 0.0 + 0j)
    weights = weights / np.max(np.abs(weights[inflow]))

    if transient_periods is None:
        v_min_in = float(np.min(lattice.x_speeds[inflow]))
        transient_periods = max(10, math.ceil((L / v_min_in + 5.0 * T) / T))
    total_steps = (transient_periods + periods) * steps_per_period
    record_from = transient_periods * steps_per_period

    rhs = _linear_rhs(config) if mode == "linear" else _nonlinear_rhs(config)
    courant = lattice.x_speeds * dt / dx
    t_ramp = ramp_periods * T

    P = np.zeros((2 * config.n, M))
    snapshots: list[WaveField] = []
    for step in range(1, total_steps + 1):
        P = _advect(P, courant, bc="open")
        P = _rk4(rhs, P, dt)
        t = step * dt
        envelope = 0.5 * (1.0 - math.cos(math.pi * t / t_ramp)) if t < t_ramp else 1.0
        P[inflow, 0] = eps * envelope * np.real(
            1j * weights[inflow] * np.exp(-1j * omega * t))
        if mode == "nonlinear" and np.any(P <= -1.0):
            raise PositivityError("positivity lost during forced nonlinear run")
        if np.max(np.abs(P)) > INSTABILITY_FACTOR * eps:
            raise InstabilityError(f"field magnitude exceeded {INSTABILITY_FACTOR} "
                                   f"* eps at t = {t:.6g}")
        if step > record_from and (step - record_from) % stride == 0:
            snapshots.append(WaveField(P=P.copy(), dx=dx, t=t, config=config))
    return snapshots


def _default_fit_window(config: ModelConfig, L: float, dx: float):
    """Window start clears the inlet ramp and the secondary-mode transients."""
    lam_est = hydrodynamic_wavelength(config)
    h_b = reduced_params(config).h_b
    margin = 0.0
    roots = dispersion.select_branch(
        dispersion.solve_roots(dispersion.assemble_polynomial(
            h_b, config.theta, config.n)),
        h_b, config.theta, config.n, policy="all")
    k_scale = SQRT2 * config.omega / config.c
    ki_ac = k_scale * roots[0].lam.imag
    for root in roots[1:]:
        k_i = k_scale * root.lam.imag
        if k_i > max(ki_ac, 1e-12):
            margin = max(margin, KINETIC_CLEARANCE / k_i)
    x_lo = max(1.5 * lam_est, lam_est + margin)
    x_lo = min(x_lo, L - 2.0 * dx - 3.0 * lam_est)  # keep >= 3 wavelengths
    x_lo = max(x_lo, lam_est)
    return x_lo, L - 2.0 * dx


def fit_wave(series: list[WaveField], omega: float | None = None,
             fit_window: tuple[float, float] | None = None) -> FitResult:
    """Measure (k_r, k_i) of the settled forced wave by demodulation.

    Each cell's total perturbation sum_i P_i is demodulated at omega over
    the recorded whole periods (discrete Fourier projection per cell,
    computed jointly with constant and linear drift terms so slow startup
    transients cannot leak into the tone estimate).  Log-amplitude and
    unwrapped phase are then fit linearly in x;
    lambda_meas = (k_r + i k_i) * c / (sqrt(2) * omega).
    """
    if len(series) < 2:
        raise FitError("need at least two snapshots")
    config = series[0].config
    if omega is None:
        omega = config.omega
    dx = series[0].dx
    M = series[0].P.shape[1]
    L = (M - 1) * dx
    lam_est = hydrodynamic_wavelength(config)

    times = np.array([f.t for f in series])
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9):
        raise FitError("snapshots are not uniformly spaced in time")

    if fit_window is None:
        x_lo, x_hi = _default_fit_window(config, L, dx)
    else:
        x_lo, x_hi = fit_window
        if x_lo < lam_est - 1e-9:
            raise DomainError("fit_window must exclude the first (inlet) wavelength")
        if x_hi > L - dx + 1e-9:
            raise DomainError("fit_window must exclude the outlet cell")

    signal = np.stack([f.P.sum(axis=0) for f in series])   # (T, M)
    tc = times - times.mean()
    # joint per-cell least squares on [1, t, cos wt, sin wt]: exact for pure
    # tones over whole periods, and separates slow drift from the tone
    basis = np.vstack([np.ones_like(tc), tc,
                       np.cos(omega * times), np.sin(omega * times)]).T
    coef, *_ = np.linalg.lstsq(basis, signal, rcond=None)
    Z = coef[2] + 1j * coef[3]     # P ~ Re[Z * exp(-i w t)] convention

    x = np.arange(M) * dx
    sel = np.where((x >= x_lo) & (x <= x_hi))[0]
    if sel.size < 8:
        raise FitError("fit window contains fewer than 8 cells")
    amp0 = np.abs(Z[sel[0]])
    if not amp0 > 0 or np.max(np.abs(Z[sel])) < 1e-300:
        raise FitError("zero signal in fit window")
    keep = np.abs(Z[sel]) >= AMP_FLOOR_RATIO * amp0
    cut = int(np.argmin(keep)) if not keep.all() else sel.size
    sel = sel[:max(cut, 8)]

    log_amp = np.log(np.abs(Z[sel]))
    raw_phase = np.angle(Z[sel])
    phase = np.unwrap(raw_phase)
    jumps = np.abs(np.diff(phase))
    if np.any(jumps > 0.5 * math.pi):
        raise FitError("phase jumps exceed pi/2 between adjacent cells "
                       "(under-resolved grid)")
    ki_fit = np.polyfit(x[sel], log_amp, 1)
    kr_fit = np.polyfit(x[sel], phase, 1)
    k_i = -ki_fit[0]
    k_r = kr_fit[0]
    if not k_r > 0:
        raise FitError("fitted k_r is not positive: no forward wave found")
    resid = np.hypot(log_amp - np.polyval(ki_fit, x[sel]),
                     phase - np.polyval(kr_fit, x[sel]))
    lam = (k_r + 1j * k_i) * config.c / (SQRT2 * omega)
    return FitResult(k_r=float(k_r), k_i=float(k_i), lambda_meas=complex(lam),
                     rms_residual=float(np.sqrt(np.mean(resid ** 2))))


def dump_snapshot(field: WaveField, path, stride: int = 1) -> None:
    """Write one snapshot as a plain-text table: x, P_1 .. P_{2n} per cell.

    The header documents the parameters; the cell stride subsamples rows.
    """
    if stride < 1:
        raise DomainError("stride must be >= 1")
    cfg = field.config
    p2, M = field.P.shape
    x = np.arange(M) * field.dx
    lines = [
        f"# bosewave snapshot: n={cfg.n} theta={cfg.theta!r} c={cfg.c!r} "
        f"S={cfg.S!r} N0={cfg.N0!r} omega={cfg.omega!r} gamma={cfg.gamma!r} "
        f"B={cfg.B!r} dx={field.dx!r} t={field.t!r} cells={M} stride={stride}",
        "# x " + " ".join(f"P_{i+1}" for i in range(p2)),
    ]
    for j in range(0, M, stride):
        row = [format(x[j], ".17g")] + [format(field.P[i, j], ".17g")
                                        for i in range(p2)]
        lines.append(" ".join(row))
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
