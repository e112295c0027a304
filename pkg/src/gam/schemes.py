"""
Closed-form constellation generators.

Golden-angle schemes
    :func:`gen_disc` (generalized disc), :func:`gen_gb_hr` (Gaussian-like
    radii by inverse sampling), :func:`gen_pb_se` (disc geometry with the
    minimum-power geometric pmf at a given entropy) and
    :func:`gen_geometric_pmf_disc` (the one-parameter pmf family searched by
    the P2 optimizer).

Baselines
    :func:`gen_qam`, :func:`gen_psk`.

The geometric pmf ``p_n = (1-xi)/(1-xi**N) * xi**(n-1)`` is evaluated through
``u = -ln(xi)`` with ``expm1`` so that both ends of ``(0, 1)`` stay accurate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .constellation import Constellation, ConstellationError, build_constellation

__all__ = [
    "PbseSolution",
    "gen_disc",
    "gen_gb_hr",
    "gb_hr_radii",
    "geometric_log_pmf",
    "geometric_mean_index",
    "geometric_entropy_nats",
    "solve_xi_for_entropy",
    "gen_pb_se",
    "gen_geometric_pmf_disc",
    "gen_qam",
    "gen_psk",
    "pair_code_indices",
    "pair_code_papr",
    "SCHEMES",
    "generate",
]

XI_LO = 1e-12
XI_HI = 1.0 - 1e-12


def _check_power(power: float) -> float:
    power = float(power)
    if not power > 0 or not math.isfinite(power):
        raise ConstellationError(f"average power must be positive, got {power}")
    return power


def gen_disc(n_low: int = 1, n_high: int = 16, power: float = 1.0) -> Constellation:
    """Generalized disc-GAM on indices ``n_low..n_high``.

    Radii are ``c*sqrt(n)`` with uniform probabilities; ``n_low > 1`` cuts a
    hole in the disc and lowers the PAPR.
    """
    n_low, n_high = int(n_low), int(n_high)
    power = _check_power(power)
    if n_low < 1:
        raise ConstellationError("n_low must be >= 1")
    if n_high < n_low:
        raise ConstellationError("n_high must be >= n_low")
    n = n_high - n_low + 1
    c2 = 2.0 * power * n / (n_high * (n_high + 1.0) - n_low * (n_low - 1.0))
    idx = np.arange(n_low, n_high + 1, dtype=float)
    return build_constellation(np.sqrt(c2 * idx), np.full(n, 1.0 / n),
                               index_offset=n_low, tag="gam-disc")


def gb_hr_radii(n_points: int, power: float = 1.0) -> np.ndarray:
    n = int(n_points)
    if n < 2:
        raise ConstellationError("n_points must be >= 2")
    power = _check_power(power)
    # N ln N - ln N!, with ln N! from the log-gamma function
    denom = n * math.log(n) - float(gammaln(n + 1.0))
    k = np.arange(n, dtype=float)
    # ln(N/(N-k)) = -log1p(-k/N)
    return np.sqrt(n * power / denom * -np.log1p(-k / n))


def gen_gb_hr(n_points: int, power: float = 1.0) -> Constellation:
    """High-rate geometric bell GAM, indices ``0..N-1`` (``r_0 = 0``)."""
    r = gb_hr_radii(n_points, power)
    n = r.size
    return build_constellation(r, np.full(n, 1.0 / n), index_offset=0,
                               tag="gam-gb-hr")


# -- geometric pmf family ------------------------------------------------------

def _u_of_xi(xi: float) -> float:
    if not 0.0 < xi <= 1.0:
        raise ConstellationError(f"xi must lie in (0, 1], got {xi}")
    return -math.log1p(xi - 1.0) if xi > 0.5 else -math.log(xi)


def _log_norm(u: float, n: int) -> float:
    """ln((1-xi)/(1-xi**N)) for xi = exp(-u)."""
    if u == 0.0:
        return -math.log(n)
    return math.log(-math.expm1(-u)) - math.log(-math.expm1(-n * u))


def _mean_index_u(u: float, n: int) -> float:
    """E[n] = 1/(1-xi) - N xi**N/(1-xi**N) for xi = exp(-u)."""
    if n * u < 1e-3:
        # Bernoulli series of x/(e^x - 1); the 1/u poles cancel exactly
        return ((n + 1) / 2.0 - (n * n - 1.0) * u / 12.0
                + (n ** 4 - 1.0) * u ** 3 / 720.0)
    return 1.0 / -math.expm1(-u) - n * math.exp(-n * u) / -math.expm1(-n * u)


def geometric_log_pmf(xi: float, n_points: int) -> np.ndarray:
    u = _u_of_xi(xi)
    return _log_norm(u, n_points) - u * np.arange(n_points, dtype=float)


def geometric_mean_index(xi: float, n_points: int) -> float:
    """Mean of the index ``n in 1..N`` under the geometric pmf."""
    return _mean_index_u(_u_of_xi(xi), int(n_points))


def geometric_entropy_nats(xi: float, n_points: int) -> float:
    """Closed-form entropy of the truncated geometric pmf, in nats.

    Equals ``-ln((1-xi)/(1-xi**N)) + (N xi**N/(1-xi**N) - xi/(1-xi)) ln(xi)``.
    """
    n = int(n_points)
    u = _u_of_xi(xi)
    return -_log_norm(u, n) + (_mean_index_u(u, n) - 1.0) * u


@dataclass(frozen=True)
class PbseSolution:
    xi: float
    c_pbse: float
    entropy_nats: float
    n_points: int
    power: float = 1.0


def solve_xi_for_entropy(n_points: int, target_entropy_nats: float,
                         power: float = 1.0) -> PbseSolution:
    """Find the pmf ratio ``xi`` whose geometric pmf has the target entropy.

    The entropy is continuous and strictly increasing in ``xi`` on (0, 1), so
    plain bisection on ``(1e-12, 1 - 1e-12)`` is used.
    """
    n = int(n_points)
    if n < 2:
        raise ConstellationError("n_points must be >= 2")
    h = float(target_entropy_nats)
    if not 0.0 < h < math.log(n):
        raise ConstellationError(
            f"target entropy must lie in (0, ln N) = (0, {math.log(n):.6g}) nats")
    lo, hi = XI_LO, XI_HI
    h_lo = geometric_entropy_nats(lo, n)
    h_hi = geometric_entropy_nats(hi, n)
    if not h_lo < h < h_hi:
        raise ConstellationError(
            f"target entropy {h} is outside the reachable range "
            f"({h_lo:.3g}, {h_hi:.15g})")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if geometric_entropy_nats(mid, n) < h:
            lo = mid
        else:
            hi = mid
    xi = lo if abs(geometric_entropy_nats(lo, n) - h) <= abs(
        geometric_entropy_nats(hi, n) - h) else hi
    power = _check_power(power)
    c = math.sqrt(power / geometric_mean_index(xi, n))
    return PbseSolution(xi, c, geometric_entropy_nats(xi, n), n, power)


def gen_pb_se(n_points: int, target_entropy_bits: float,
              power: float = 1.0) -> Constellation:
    """Probabilistic bell GAM: disc radii with the entropy-constrained pmf."""
    n = int(n_points)
    if n < 2:
        raise ConstellationError("n_points must be >= 2")
    if not 0.0 < target_entropy_bits < math.log2(n):
        raise ConstellationError(
            f"target entropy must lie in (0, log2 N) = (0, {math.log2(n):.6g}) bits")
    sol = solve_xi_for_entropy(n, target_entropy_bits * math.log(2.0), power)
    radii = sol.c_pbse * np.sqrt(np.arange(1, n + 1, dtype=float))
    probs = np.exp(geometric_log_pmf(sol.xi, n))
    return build_constellation(radii, probs, index_offset=1, tag="gam-pb-se")


def gen_geometric_pmf_disc(n_points: int, xi: float, snr: float,
                           noise_var: float = 1.0) -> Constellation:
    """Disc radii ``c_d*sqrt(n)``, geometric pmf of ratio ``xi``.

    ``c_d`` is chosen so that ``sum p_n r_n**2 / noise_var == snr``;
    ``xi = 1`` is the uniform limit and returns disc-GAM exactly.
    """
    n = int(n_points)
    if n < 1:
        raise ConstellationError("n_points must be >= 1")
    xi = float(xi)
    if not 0.0 < xi <= 1.0:
        raise ConstellationError(f"xi must lie in (0, 1], got {xi}")
    if not snr > 0 or not noise_var > 0:
        raise ConstellationError("snr and noise_var must be positive")
    power = snr * noise_var
    if xi == 1.0:
        c = gen_disc(1, n, power)
        return Constellation(c.points, c.probs, "gam-pb-xi", c.index_offset)
    c2 = power / geometric_mean_index(xi, n)
    radii = np.sqrt(c2 * np.arange(1, n + 1, dtype=float))
    probs = np.exp(geometric_log_pmf(xi, n))
    return build_constellation(radii, probs, index_offset=1, tag="gam-pb-xi")


# -- baselines -----------------------------------------------------------------

def gen_qam(m_side: int, power: float = 1.0) -> Constellation:
    """Square QAM with ``m_side**2`` points on the odd-integer grid."""
    m = int(m_side)
    if m < 2 or m % 2:
        raise ConstellationError("m_side must be an even integer >= 2")
    power = _check_power(power)
    levels = np.arange(-(m - 1), m, 2, dtype=float)
    a = math.sqrt(power / (2.0 * (m * m - 1) / 3.0))
    re, im = np.meshgrid(levels, levels, indexing="ij")
    pts = a * (re + 1j * im).ravel()
    return Constellation(pts, np.full(m * m, 1.0 / (m * m)), "qam", 0)


def gen_psk(n_points: int, power: float = 1.0) -> Constellation:
    n = int(n_points)
    if n < 1:
        raise ConstellationError("n_points must be >= 1")
    power = _check_power(power)
    pts = math.sqrt(power) * np.exp(2j * np.pi * np.arange(n) / n)
    return Constellation(pts, np.full(n, 1.0 / n), "psk", 0)


# -- two-symbol constant-magnitude code ----------------------------------------

def pair_code_indices(n_points: int) -> list[tuple[int, int]]:
    """Partner indices ``(n, N+1-n)`` for ``n = 1..N`` of disc-GAM.

    With disc radii ``c*sqrt(n)`` the pair's summed power is always
    ``c**2 (N+1) = 2 * power``.
    """
    n = int(n_points)
    if n < 1:
        raise ConstellationError("n_points must be >= 1")
    return [(k, n + 1 - k) for k in range(1, n + 1)]


def pair_code_papr(n_points: int) -> float:
    """Per-symbol peak over average power of the pair code, ``2N/(N+1)``."""
    n = int(n_points)
    return 2.0 * n / (n + 1.0)


SCHEMES = ("disc", "disc-generalized", "gb-hr", "pb-se", "pb-xi", "qam", "psk")


def generate(scheme: str, n: int | None = None, *, n_low: int | None = None,
             n_high: int | None = None, entropy_bits: float | None = None,
             xi: float | None = None, power: float = 1.0) -> Constellation:
    """Build a constellation by scheme name, as used by the command line.

    ``pb-se`` defaults to ``log2(N) - 1`` bits of entropy; ``pb-xi`` needs
    ``xi``; ``qam`` needs ``n`` to be the square of an even integer.
    """
    if scheme == "disc":
        _need(n, "--n")
        return gen_disc(1, n, power)
    if scheme == "disc-generalized":
        _need(n_low, "--n-low")
        _need(n_high, "--n-high")
        return gen_disc(n_low, n_high, power)
    if scheme == "gb-hr":
        _need(n, "--n")
        return gen_gb_hr(n, power)
    if scheme == "pb-se":
        _need(n, "--n")
        h = math.log2(n) - 1.0 if entropy_bits is None else entropy_bits
        return gen_pb_se(n, h, power)
    if scheme == "pb-xi":
        _need(n, "--n")
        _need(xi, "--xi")
        return gen_geometric_pmf_disc(n, xi, power, 1.0)
    if scheme == "qam":
        _need(n, "--n")
        m = math.isqrt(int(n))
        if m * m != n:
            raise ConstellationError("qam needs n to be a perfect square")
        return gen_qam(m, power)
    if scheme == "psk":
        _need(n, "--n")
        return gen_psk(n, power)
    raise ConstellationError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def _need(value, flag: str) -> None:
    if value is None:
        raise ConstellationError(f"{flag} is required for this scheme")
