"""Pathwise-coupled unit increments of the process and their limit objects.

Given one atomic noise realization, this module produces, on the same atoms:

* the increment series Y_j = sum_i exp(i j s_i) r(s_i) v_i,
* the realized long-run limit U of the quadratic statistic Q_n / n,
* the realized double-integral limit of the rescaled error
  n^(2-2H) (Q_n/n - U),

so the finite-n identities between these quantities hold exactly and the
limit theorems can be checked distributionally across realizations.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ParameterError, SingularityError
from .kernels import ModelParams, kernel_h, kernel_hn, kernel_r, phi_qv
from .levy_model import JumpMeasure, KernelSpec, double_integrate, integrate_qv

__all__ = [
    "IncrementSeries",
    "CoupledRealization",
    "simulate_increments",
    "realized_U",
    "quadratic_statistic",
    "normalized_error",
    "realized_rosenblatt",
    "rosenblatt_fast",
    "tail_error_estimate",
    "couple",
    "h_kernel",
    "hn_kernel",
    "increments_to_csv",
    "increments_from_csv",
    "realization_to_json",
]

# steps between exact phase resets of the rotation recurrence
RESET_INTERVAL = 1024

# atom count above which the pair sum switches to the t-quadrature route
BRUTE_FORCE_ATOM_LIMIT = 2000


@dataclass(frozen=True, eq=False)
class IncrementSeries:
    """Unit-lag increments Y_0 .. Y_{n-1} of one realization."""

    n: int
    increments: np.ndarray
    params: ModelParams
    master_seed: int | None = None
    stream_index: int | None = None
    half_width: float | None = None
    n_terms: int | None = None

    def __post_init__(self) -> None:
        if self.increments.shape != (self.n,):
            raise ParameterError("increments must be a length-n complex vector")


@dataclass(frozen=True, eq=False)
class CoupledRealization:
    """Increments, realized limit U, partial quadratic statistics and
    (optionally) the realized double-integral limit, all on shared atoms."""

    params: ModelParams
    increments: IncrementSeries
    u_realized: float
    q_partial: tuple[tuple[int, float], ...]
    rosenblatt: float | None = None
    master_seed: int | None = None
    stream_index: int | None = None
    half_width: float | None = None
    n_terms: int | None = None


def h_kernel(p: ModelParams) -> KernelSpec:
    """Limit kernel as an integrable KernelSpec (axes singular for gamma<0)."""
    return KernelSpec(
        2, lambda s, u: kernel_h(s, u, p), singular_points=(0.0,)
    )


def hn_kernel(n: int, p: ModelParams) -> KernelSpec:
    """Pre-limit kernel at level n as a KernelSpec."""
    return KernelSpec(
        2, lambda s, u: kernel_hn(s, u, n, p), singular_points=(0.0,)
    )


def simulate_increments(jm: JumpMeasure, n: int, p: ModelParams) -> IncrementSeries:
    """Evaluate the increment series by per-atom rotation recurrence.

    Each step multiplies the running atom terms by exp(i s); every
    RESET_INTERVAL steps the terms are recomputed from the reduced phase
    j*s mod 2*pi, which keeps the accumulated drift far below 1e-9.
    """
    if n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    base = kernel_r(jm.locations, p) * jm.values
    rot = np.exp(1j * jm.locations)
    out = np.empty(n, dtype=complex)
    cur = base.copy()
    for j in range(n):
        if j and j % RESET_INTERVAL == 0:
            cur = base * np.exp(1j * np.mod(j * jm.locations, 2.0 * np.pi))
        out[j] = cur.sum()
        cur *= rot
    return IncrementSeries(
        n=n,
        increments=out,
        params=p,
        master_seed=jm.master_seed,
        stream_index=jm.stream_index,
        half_width=jm.half_width,
        n_terms=jm.n_terms,
    )


def realized_U(jm: JumpMeasure, p: ModelParams) -> float:
    """Realized limit of Q_n / n on these atoms: twice the quadratic-variation
    integral of the spectral density phi."""
    return 2.0 * integrate_qv(jm, lambda s: phi_qv(s, p))


def quadratic_statistic(series: IncrementSeries, m: int) -> float:
    """Quadratic statistic Q_m, the sum of the first m squared increment moduli."""
    if not (1 <= m <= series.n):
        raise ParameterError(f"m must be in [1, {series.n}], got {m}")
    y = series.increments[:m]
    return float(np.sum(y.real**2 + y.imag**2))


def normalized_error(q_m: float, u_realized: float, m: int, p: ModelParams) -> float:
    """Rescaled deviation m^(2-2H) * (Q_m / m - U)."""
    if m < 1:
        raise ParameterError(f"m must be a positive integer, got {m}")
    return float(m) ** (2.0 - 2.0 * p.hurst) * (q_m / m - u_realized)


def realized_rosenblatt(jm: JumpMeasure, p: ModelParams) -> float:
    """Realized double-integral limit 2 Re of the pair sum of the limit kernel.

    Small measures go through the generic pair sum; larger ones through the
    algebraically equivalent t-quadrature route.
    """
    if jm.n_terms < 2:
        return 0.0
    if jm.n_terms <= BRUTE_FORCE_ATOM_LIMIT:
        return 2.0 * complex(double_integrate(jm, h_kernel(p))).real
    return rosenblatt_fast(jm, p)


def rosenblatt_fast(jm: JumpMeasure, p: ModelParams, t_nodes: int = 256) -> float:
    """O(t_nodes * atoms) evaluation of the realized double-integral limit.

    The kernel prefactor is the t-average of exp(i t (s-u)) over [0, 1], so
    the pair sum collapses to the Gauss-Legendre quadrature of |A(t)|^2 with
    A(t) = sum_i exp(i t s_i) |s_i|^gamma v_i, minus the diagonal term.
    """
    if t_nodes < 2:
        raise ParameterError(f"t_nodes must be at least 2, got {t_nodes}")
    if jm.n_terms < 2:
        return 0.0
    gamma = p.gamma
    s = jm.locations
    if gamma < 0.0 and np.any(np.abs(s) < 1e-300):
        raise SingularityError("atom at s = 0 with gamma < 0")
    amp = np.abs(s) ** gamma * jm.values
    diag = float(np.sum(amp.real**2 + amp.imag**2))
    x, w = leggauss(t_nodes)
    t = 0.5 * (x + 1.0)
    w = 0.5 * w
    total = 0.0
    block = max(1, 4_194_304 // max(s.size, 1))
    for q0 in range(0, t_nodes, block):
        q1 = min(t_nodes, q0 + block)
        a = np.exp(1j * t[q0:q1, None] * s[None, :]) @ amp
        total += float(w[q0:q1] @ (a.real**2 + a.imag**2))
    return total - diag * float(np.sum(w))


def tail_error_estimate(p: ModelParams, half_width: float) -> float:
    """Window-truncation surrogate for the limit U: the alpha-energy of the
    increment kernel outside [-half_width, half_width]."""
    if half_width < 1.0:
        raise ParameterError(f"half_width must be at least 1, got {half_width}")
    ah = p.alpha * p.hurst
    return 2.0 * half_width ** (-ah) / ah


def couple(
    jm: JumpMeasure,
    p: ModelParams,
    n: int,
    q_marks: tuple[int, ...] | None = None,
    with_rosenblatt: bool = False,
) -> CoupledRealization:
    """Simulate increments and collect the coupled statistics of one path."""
    marks = tuple(q_marks) if q_marks is not None else (n,)
    if any(not (1 <= m <= n) for m in marks):
        raise ParameterError(f"q_marks must lie in [1, {n}], got {marks}")
    series = simulate_increments(jm, n, p)
    q_partial = tuple((m, quadratic_statistic(series, m)) for m in marks)
    ros = realized_rosenblatt(jm, p) if with_rosenblatt else None
    return CoupledRealization(
        params=p,
        increments=series,
        u_realized=realized_U(jm, p),
        q_partial=q_partial,
        rosenblatt=ros,
        master_seed=jm.master_seed,
        stream_index=jm.stream_index,
        half_width=jm.half_width,
        n_terms=jm.n_terms,
    )


def increments_to_csv(series: IncrementSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j", "re", "im"])
        for j, y in enumerate(series.increments):
            writer.writerow([j, format(y.real, ".17g"), format(y.imag, ".17g")])


def increments_from_csv(path, p: ModelParams) -> IncrementSeries:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows and rows[0] == ["j", "re", "im"]:
        rows = rows[1:]
    vals = np.array([complex(float(r[1]), float(r[2])) for r in rows])
    return IncrementSeries(n=vals.size, increments=vals, params=p)


def realization_to_json(cr: CoupledRealization) -> str:
    """Stable-format JSON of one coupled realization."""
    obj = {
        "seed": cr.master_seed,
        "stream": cr.stream_index,
        "alpha": cr.params.alpha,
        "hurst": cr.params.hurst,
        "M": cr.half_width,
        "n_terms": cr.n_terms,
        "u_realized": cr.u_realized,
        "rosenblatt": cr.rosenblatt,
        "q_partial": [[int(m), q] for m, q in cr.q_partial],
    }
    return json.dumps(obj)
