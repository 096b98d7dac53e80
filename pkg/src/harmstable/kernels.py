"""Deterministic kernels of the unit-increment model.

Everything in this module is a pure function of real inputs.  The complex
exponential ratios are evaluated through the half-angle rewrite

    (exp(ix) - 1) / (ix) = exp(ix/2) * sin(x/2) / (x/2)

which is free of cancellation near x = 0 and carries its removable limit 1
automatically.  All functions accept scalars or numpy arrays and broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SingularityError

__all__ = [
    "ModelParams",
    "kernel_r",
    "kernel_gn",
    "kernel_hn",
    "kernel_h",
    "phi_qv",
    "psi",
    "psi_norm_constant",
    "nearest_2pi",
    "gn_bound",
]

TWO_PI = 2.0 * math.pi

# Inputs with |s| below this are treated as exact zeros when the zero limit
# exists; smaller magnitudes would overflow |s|**gamma for gamma < 0 anyway.
ZERO_FLOOR = 1e-300


@dataclass(frozen=True)
class ModelParams:
    """Stability index and self-similarity index of the model.

    alpha must lie in (0, 2) and hurst in (0, 1).  The derived exponent
    gamma = 1 - hurst - 1/alpha and the slow-growth regime flag are exposed
    as properties so they can never drift out of sync with the fields.
    """

    alpha: float
    hurst: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 2.0):
            raise ParameterError(f"alpha must be in (0, 2), got {self.alpha}")
        if not (0.0 < self.hurst < 1.0):
            raise ParameterError(f"hurst must be in (0, 1), got {self.hurst}")

    @property
    def gamma(self) -> float:
        return 1.0 - self.hurst - 1.0 / self.alpha

    @property
    def clt_regime(self) -> bool:
        """True when the normalized quadratic error admits its weak limit."""
        return self.hurst > 0.5 and self.alpha * (1.0 - self.hurst) < 0.5


def _half_angle_ratio(x: np.ndarray, sign: float) -> np.ndarray:
    """exp(sign*ix/2) * sin(x/2)/(x/2), the stable form of (e^{s*ix}-1)/(s*ix)."""
    sinc = np.sinc(x / TWO_PI)
    return np.exp(sign * 0.5j * x) * sinc


def _as_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _maybe_scalar(arr: np.ndarray, scalar: bool):
    return arr[()] if scalar else arr


def kernel_r(s, p: ModelParams):
    """Frequency kernel of a unit-time increment: (1-e^{-is})/(is) * |s|^gamma.

    For gamma >= 0 evaluation at s = 0 returns 0 (the limit for gamma > 0 and
    the convention at gamma == 0); for gamma < 0 it raises SingularityError.
    """
    arr, scalar = _as_array(s)
    gamma = p.gamma
    at_zero = np.abs(arr) < ZERO_FLOOR
    if np.any(at_zero):
        if gamma < 0.0:
            raise SingularityError("kernel_r is singular at s = 0 for gamma < 0")
        out = np.zeros(arr.shape, dtype=complex)
        ok = ~at_zero
        sv = arr[ok]
        out[ok] = _half_angle_ratio(sv, -1.0) * np.abs(sv) ** gamma
        return _maybe_scalar(out, scalar)
    out = _half_angle_ratio(arr, -1.0) * np.abs(arr) ** gamma
    return _maybe_scalar(out, scalar)


def kernel_gn(x, n: int):
    """Geometric sum of n unit-spaced complex exponentials at frequency x.

    Computed as the ratio form e^{i(n-1)y/2} * sin(ny/2)/sin(y/2) after
    reducing x by its nearest multiple of 2*pi, expressed through sinc so the
    removable limit n at multiples of 2*pi needs no special branch.
    """
    if n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    arr, scalar = _as_array(x)
    y = arr - TWO_PI * np.round(arr / TWO_PI)
    ratio = n * np.sinc(n * y / TWO_PI) / np.sinc(y / TWO_PI)
    out = np.exp(0.5j * (n - 1) * y) * ratio
    return _maybe_scalar(out, scalar)


def kernel_hn(s, u, n: int, p: ModelParams):
    """Pre-limit double kernel n^{1-2H} g_n(s-u) r(s) conj(r(u)) 1_{u<s}."""
    if n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    s_arr, s_scalar = _as_array(s)
    u_arr, u_scalar = _as_array(u)
    s_b, u_b = np.broadcast_arrays(s_arr, u_arr)
    out = np.zeros(s_b.shape, dtype=complex)
    mask = u_b < s_b
    if np.any(mask):
        sv = s_b[mask]
        uv = u_b[mask]
        scale = float(n) ** (1.0 - 2.0 * p.hurst)
        out[mask] = scale * kernel_gn(sv - uv, n) * kernel_r(sv, p) * np.conj(kernel_r(uv, p))
    return _maybe_scalar(out, s_scalar and u_scalar)


def kernel_h(s, u, p: ModelParams):
    """Limit double kernel: the n-free quadrature of e^{it(s-u)} over t in [0,1]
    times |su|^gamma, supported on u < s.

    The exponential prefactor is (e^{i(s-u)} - 1)/(i(s-u)) with removable
    limit 1 on the diagonal; the power factor is singular on the axes when
    gamma < 0.
    """
    s_arr, s_scalar = _as_array(s)
    u_arr, u_scalar = _as_array(u)
    s_b, u_b = np.broadcast_arrays(s_arr, u_arr)
    out = np.zeros(s_b.shape, dtype=complex)
    mask = u_b < s_b
    if np.any(mask):
        sv = s_b[mask]
        uv = u_b[mask]
        gamma = p.gamma
        prod = np.abs(sv * uv)
        if gamma < 0.0 and np.any(prod < ZERO_FLOOR):
            raise SingularityError("kernel_h is singular on the axes for gamma < 0")
        out[mask] = _half_angle_ratio(sv - uv, +1.0) * prod**gamma
    return _maybe_scalar(out, s_scalar and u_scalar)


def phi_qv(s, p: ModelParams):
    """Quadratic-variation integrand |s|^{-2H-2/alpha} (1 - cos s).

    Evaluated as 2 sin^2(s/2) |s|^{-2H-2/alpha}; s = 0 always raises.
    """
    arr, scalar = _as_array(s)
    if np.any(np.abs(arr) < ZERO_FLOOR):
        raise SingularityError("phi_qv is singular at s = 0")
    expo = -2.0 * p.hurst - 2.0 / p.alpha
    out = 2.0 * np.sin(0.5 * arr) ** 2 * np.abs(arr) ** expo
    return _maybe_scalar(out, scalar)


def psi_norm_constant(r_exp: float, alpha: float) -> float:
    """Normalizing constant making the integral of psi^alpha equal 1."""
    if alpha <= 0.0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if r_exp * alpha <= 1.0:
        raise ParameterError(
            f"need r_exp * alpha > 1 for integrability, got {r_exp * alpha}"
        )
    return (2.0 * (1.0 + 1.0 / (r_exp * alpha - 1.0))) ** (-1.0 / alpha)


def psi(s, r_exp: float, alpha: float):
    """Reference envelope: constant on |s| <= 1, |s|^{-r_exp} decay outside,
    normalized so that psi^alpha integrates to 1 over the line."""
    c = psi_norm_constant(r_exp, alpha)
    arr, scalar = _as_array(s)
    a = np.abs(arr)
    out = np.ones(a.shape)
    tail = a > 1.0
    out[tail] = a[tail] ** (-r_exp)
    out *= c
    return _maybe_scalar(out, scalar)


def nearest_2pi(x):
    """Nearest multiple of 2*pi to x >= 0, ties resolved to the smaller one."""
    arr, scalar = _as_array(x)
    if np.any(arr < 0.0):
        raise ParameterError("nearest_2pi requires nonnegative input")
    j = np.ceil(arr / TWO_PI - 0.5)
    out = TWO_PI * j
    return _maybe_scalar(out, scalar)


def gn_bound(x, n: int):
    """Envelope min(n, 2/|1 - e^{ix}|) dominating |kernel_gn| pointwise."""
    if n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    arr, scalar = _as_array(x)
    denom = 2.0 * np.abs(np.sin(0.5 * arr))
    out = np.full(arr.shape, float(n))
    pos = denom > 0.0
    np.minimum(out, np.divide(2.0, denom, out=np.full(arr.shape, np.inf), where=pos), out=out)
    return _maybe_scalar(out, scalar)
