"""Atomic realization of the driving complex stable noise on [-M, M].

A JumpMeasure is a finite list of atoms (location, complex value) standing in
for the restriction of an isotropic alpha-stable random measure to the
window.  Atom values follow the shot-noise series construction
calibration * Gamma_i^(-1/alpha) * exp(i*theta_i) with uniform locations;
the calibration constant converts the unit series to the sampler scale
convention of rng_stable (see series_unit_scale below) and carries the
(2M)^(1/alpha) window factor.

Single and double integrals against the measure are plain atom sums, so
algebraic identities between them hold exactly, not just in the limit.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammaln, j0

from .errors import ParameterError, QuadratureError, SingularityError
from .quadrature import QuadratureSpec, grid_integral_2d, log_integral_1d
from .rng_stable import RngStream, poisson_arrivals

__all__ = [
    "KernelSpec",
    "JumpMeasure",
    "build_jump_measure",
    "integrate",
    "integrate_qv",
    "quadratic_variation",
    "double_integrate",
    "condition_value",
    "series_unit_scale",
    "estimate_series_unit_scale",
    "jump_measure_to_csv",
    "jump_measure_from_csv",
]

log = logging.getLogger(__name__)

CALIBRATION_SEED = 20260301

# Scale of the real part of sum_i Gamma_i^(-1/alpha) exp(i theta_i), the
# unit-window shot-noise series.  Frozen from
# estimate_series_unit_scale(alpha, n_terms=6000, replications=60000) at the
# calibration seed; values not in the table are estimated on demand.
_UNIT_SERIES_SCALE: dict[float, float] = {
    0.5: 0.9116814153143168,
    0.6: 0.9229281905923832,
    0.7: 0.9411715983126737,
    0.8: 0.9584288906939292,
    0.9: 0.9785266739927605,
    1.0: 1.0032132333661572,
    1.1: 1.0327679506895435,
    1.2: 1.068707246634064,
    1.3: 1.114515253533293,
    1.4: 1.172875553282591,
    1.5: 1.2503629887005085,
    1.6: 1.3571573406029347,
    1.7: 1.5175916175407997,
    1.8: 1.7901909207022983,
    1.9: 2.414822088253012,
}
_estimated_scales: dict[float, float] = {}


@dataclass(frozen=True)
class KernelSpec:
    """A deterministic integrand together with what the integrators must know
    about it: arity, declared singular points, and an optional support test."""

    arity: int
    evaluator: Callable
    singular_points: tuple[float, ...] = ()
    support: Callable | None = None

    def __post_init__(self) -> None:
        if self.arity not in (1, 2):
            raise ParameterError(f"kernel arity must be 1 or 2, got {self.arity}")

    @classmethod
    def coerce(cls, f, arity: int) -> "KernelSpec":
        if isinstance(f, cls):
            if f.arity != arity:
                raise ParameterError(
                    f"expected an arity-{arity} kernel, got arity {f.arity}"
                )
            return f
        if callable(f):
            return cls(arity, f)
        raise ParameterError(f"not a kernel: {f!r}")


@dataclass(frozen=True, eq=False)
class JumpMeasure:
    """Atoms of one realization, sorted by strictly increasing location."""

    locations: np.ndarray
    values: np.ndarray
    alpha: float
    half_width: float
    calibration: float
    n_terms: int
    master_seed: int | None = None
    stream_index: int | None = None

    def __post_init__(self) -> None:
        if self.locations.shape != self.values.shape or self.locations.ndim != 1:
            raise ParameterError("locations and values must be aligned 1-d arrays")
        if self.n_terms != self.locations.size:
            raise ParameterError("n_terms must equal the atom count")
        if self.locations.size and (
            np.any(np.diff(self.locations) <= 0.0)
            or abs(self.locations[0]) > self.half_width
            or abs(self.locations[-1]) > self.half_width
        ):
            raise ParameterError(
                "locations must be strictly increasing inside [-half_width, half_width]"
            )


def series_unit_scale(alpha: float) -> float:
    """Scale of Re(unit series) under the sampler convention; table first,
    deterministic on-demand estimate otherwise."""
    for key, val in _UNIT_SERIES_SCALE.items():
        if abs(alpha - key) < 1e-12:
            return val
    for key, val in _estimated_scales.items():
        if abs(alpha - key) < 1e-12:
            return val
    est = estimate_series_unit_scale(alpha)
    _estimated_scales[alpha] = est
    return est


def _series_remainder_var(alpha: float, n_terms: int) -> float:
    """Variance of the real part of the dropped series tail beyond n_terms."""
    c = 2.0 / alpha
    i = np.arange(n_terms + 1, n_terms + 61, dtype=float)
    head = float(np.exp(gammaln(i - c) - gammaln(i)).sum())
    tail = (n_terms + 60.5) ** (1.0 - c) / (c - 1.0)
    return 0.5 * (head + tail)


def estimate_series_unit_scale(
    alpha: float,
    n_terms: int = 4000,
    replications: int = 20000,
    seed: int = CALIBRATION_SEED,
) -> float:
    """Empirical characteristic-function estimate of the unit series scale.

    Draws truncated series, Rao-Blackwellizes the ECF over the rotation group
    (the ECF of an isotropic variable is E[J0(t|Z|)]), and compensates the
    truncated tail by its Gaussian characteristic exponent before matching
    exp(-(sigma*t)**alpha) on a refined t-grid.
    """
    if not (0.0 < alpha < 2.0):
        raise ParameterError(f"alpha must be in (0, 2), got {alpha}")
    g = RngStream(seed, 0).generator
    mods = np.empty(replications)
    done = 0
    per = max(1, int(6_000_000 // n_terms))
    while done < replications:
        r = min(per, replications - done)
        gam = np.cumsum(g.exponential(1.0, (r, n_terms)), axis=1)
        theta = g.uniform(0.0, 2.0 * np.pi, (r, n_terms))
        series = np.sum(gam ** (-1.0 / alpha) * np.exp(1j * theta), axis=1)
        mods[done : done + r] = np.abs(series)
        done += r
    v = _series_remainder_var(alpha, n_terms)
    sigma = 1.0
    for _ in range(2):
        t_grid = np.linspace(0.25, 0.9, 8) / sigma
        ecf = np.array([j0(t * mods).mean() for t in t_grid])
        exponent = -np.log(ecf) + 0.5 * v * t_grid**2
        sigma = float(np.median(exponent / t_grid**alpha)) ** (1.0 / alpha)
    return sigma


def build_jump_measure(
    alpha: float,
    half_width: float,
    n_terms: int,
    rng: RngStream,
    calibration: float | None = None,
) -> JumpMeasure:
    """Draw one atomic realization of the noise on [-half_width, half_width]."""
    if not (0.0 < alpha < 2.0):
        raise ParameterError(f"alpha must be in (0, 2), got {alpha}")
    if half_width <= 0.0:
        raise ParameterError(f"half_width must be positive, got {half_width}")
    if n_terms < 1:
        raise ParameterError(f"n_terms must be a positive integer, got {n_terms}")
    if calibration is None:
        calibration = (2.0 * half_width) ** (1.0 / alpha) / series_unit_scale(alpha)
    if calibration <= 0.0:
        raise ParameterError(f"calibration must be positive, got {calibration}")

    g = rng.generator
    locations = g.uniform(-half_width, half_width, n_terms)
    arrivals = poisson_arrivals(n_terms, rng)
    angles = g.uniform(0.0, 2.0 * np.pi, n_terms)
    values = calibration * arrivals ** (-1.0 / alpha) * np.exp(1j * angles)

    for _ in range(64):
        order = np.argsort(locations, kind="stable")
        ls = locations[order]
        dup = np.flatnonzero(np.diff(ls) == 0.0)
        if dup.size == 0:
            break
        offenders = order[dup + 1]
        log.warning(
            "resampling %d tied atom location(s) at %s",
            offenders.size,
            ls[dup][:4],
        )
        locations[offenders] = g.uniform(-half_width, half_width, offenders.size)
    else:
        raise RuntimeError("could not resolve tied atom locations")

    return JumpMeasure(
        locations=ls,
        values=values[order],
        alpha=alpha,
        half_width=half_width,
        calibration=calibration,
        n_terms=n_terms,
        master_seed=rng.master_seed,
        stream_index=rng.stream_index,
    )


def _eval_finite(vals: np.ndarray, where: np.ndarray, what: str) -> None:
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise SingularityError(f"{what} is non-finite at location {where[idx]!r}")


def integrate(jm: JumpMeasure, f) -> complex:
    """Single integral of f against the measure: sum_i f(s_i) * value_i."""
    spec = KernelSpec.coerce(f, 1)
    if jm.n_terms == 0:
        return 0j
    vals = np.asarray(spec.evaluator(jm.locations))
    _eval_finite(vals, jm.locations, "arity-1 kernel")
    return complex(np.sum(vals * jm.values))


def integrate_qv(jm: JumpMeasure, phi, check_nonnegative: bool = True) -> float:
    """Integral of phi against the pathwise quadratic variation measure:
    sum_i phi(s_i) * |value_i|^2."""
    spec = KernelSpec.coerce(phi, 1)
    if jm.n_terms == 0:
        return 0.0
    vals = np.asarray(spec.evaluator(jm.locations), dtype=float)
    _eval_finite(vals, jm.locations, "quadratic-variation integrand")
    if check_nonnegative and np.any(vals < 0.0):
        idx = int(np.argmax(vals < 0.0))
        raise ParameterError(
            f"quadratic-variation integrand is negative at location "
            f"{jm.locations[idx]!r}; pass check_nonnegative=False for diagnostics"
        )
    weights = jm.values.real**2 + jm.values.imag**2
    return float(np.sum(vals * weights))


def quadratic_variation(jm: JumpMeasure) -> float:
    """Total pathwise quadratic variation sum_i |value_i|^2."""
    if jm.n_terms == 0:
        return 0.0
    weights = jm.values.real**2 + jm.values.imag**2
    return float(np.sum(weights))


def double_integrate(jm: JumpMeasure, f) -> complex:
    """Strictly lower-triangular double integral:
    sum over location-ordered pairs u_k < s_i of f(s_i, u_k) * conj(v_k) * v_i.

    The kernel is evaluated only on pairs inside the triangle, so integrands
    that are singular or undefined elsewhere are safe.
    """
    spec = KernelSpec.coerce(f, 2)
    s = jm.locations
    z = jm.values
    n = s.size
    if n < 2:
        return 0j
    zc = np.conj(z)
    total = 0j
    block = max(1, 2_097_152 // n)
    for i0 in range(1, n, block):
        i1 = min(n, i0 + block)
        rows = np.arange(i0, i1)
        mask = np.arange(i1)[None, :] < rows[:, None]
        s_i = np.broadcast_to(s[rows][:, None], mask.shape)[mask]
        s_k = np.broadcast_to(s[None, :i1], mask.shape)[mask]
        vals = np.asarray(spec.evaluator(s_i, s_k), dtype=complex)
        bad = ~np.isfinite(vals)
        if np.any(bad):
            idx = int(np.argmax(bad))
            raise SingularityError(
                f"arity-2 kernel is non-finite at pair ({s_i[idx]!r}, {s_k[idx]!r})"
            )
        grid = np.zeros(mask.shape, dtype=complex)
        grid[mask] = vals
        total += complex(np.einsum("ik,k,i->", grid, zc[:i1], z[rows]))
    return total


def _check_psi_normalization(psi_fn, alpha: float) -> None:
    norm = log_integral_1d(lambda s: np.asarray(psi_fn(s), dtype=float) ** alpha)
    if abs(norm - 1.0) > 0.01:
        raise ParameterError(
            f"psi**alpha must integrate to 1 (within 1%), quadrature gives {norm!r}"
        )


def condition_value(f, alpha: float, psi_fn, quad: QuadratureSpec) -> float:
    """Existence functional of an arity-2 kernel:
    the grid estimate of  integral of |f|^alpha * (1 + log_+(|f| / (psi(s) psi(u)))).

    Monotone nondecreasing in the outer cutoff and under inner-cutoff
    refinement by powers of ten, by construction of the grid.
    """
    spec = KernelSpec.coerce(f, 2)
    if not (0.0 < alpha <= 2.0):
        raise ParameterError(f"alpha must be in (0, 2], got {alpha}")
    _check_psi_normalization(psi_fn, alpha)

    def integrand(s, u):
        fv = np.abs(np.asarray(spec.evaluator(s, u)))
        env = np.asarray(psi_fn(s), dtype=float) * np.asarray(psi_fn(u), dtype=float)
        out = np.zeros(np.broadcast(s, u).shape)
        pos = fv > 0.0
        ratio = np.divide(fv, env, out=np.ones_like(out), where=pos)
        out[pos] = fv[pos] ** alpha * (1.0 + np.log(np.maximum(ratio[pos], 1.0)))
        return out

    return grid_integral_2d(integrand, quad, label="condition integrand")


def jump_measure_to_csv(jm: JumpMeasure, path) -> None:
    """Atom table as CSV (location, re, im) at 17 significant digits, with
    the build metadata on a leading comment line."""
    meta = (
        f"# alpha={jm.alpha!r} half_width={jm.half_width!r} "
        f"calibration={jm.calibration!r} n_terms={jm.n_terms} "
        f"master_seed={jm.master_seed} stream_index={jm.stream_index}"
    )
    with open(path, "w", newline="") as fh:
        fh.write(meta + "\n")
        writer = csv.writer(fh)
        writer.writerow(["location", "re", "im"])
        for loc, val in zip(jm.locations, jm.values):
            writer.writerow(
                [format(loc, ".17g"), format(val.real, ".17g"), format(val.imag, ".17g")]
            )


def jump_measure_from_csv(path) -> JumpMeasure:
    with open(path, newline="") as fh:
        meta_line = fh.readline().strip()
        if not meta_line.startswith("# "):
            raise ParameterError(f"{path}: missing jump-measure metadata line")
        meta = dict(item.split("=", 1) for item in meta_line[2:].split())
        rows = list(csv.reader(fh))
    if rows and rows[0] == ["location", "re", "im"]:
        rows = rows[1:]
    locations = np.array([float(r[0]) for r in rows])
    values = np.array([complex(float(r[1]), float(r[2])) for r in rows])

    def opt_int(text: str) -> int | None:
        return None if text == "None" else int(text)

    return JumpMeasure(
        locations=locations,
        values=values,
        alpha=float(meta["alpha"]),
        half_width=float(meta["half_width"]),
        calibration=float(meta["calibration"]),
        n_terms=int(meta["n_terms"]),
        master_seed=opt_int(meta["master_seed"]),
        stream_index=opt_int(meta["stream_index"]),
    )
