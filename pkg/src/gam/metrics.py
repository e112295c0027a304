"""
Mutual information, symbol error rate and the AWGN channel.

MI of a discrete input over complex AWGN is ``h(Y) - log2(pi e sigma2)``.
:func:`mi_quadrature` integrates ``-f_Y log2 f_Y`` on a square lattice
clipped to a disc; :func:`mi_monte_carlo` averages the sample estimator
``log2 p(y|x) / sum_n p(y|x_n) p_n``.

Both evaluate the Gaussian mixture through :class:`_CellIndex`, which bins the
constellation into square cells so each output sample only sees components
within a cutoff distance. Dropped components are below ``exp(-64)`` relative
to the nearest one, far under any tolerance used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import erfc, logsumexp

from .constellation import Constellation, average_power, entropy_bits
from .parallel import BLOCK_SIZE, run_blocks

__all__ = [
    "AwgnChannel",
    "MiEstimate",
    "QuadratureError",
    "db_to_linear",
    "linear_to_db",
    "awgn_capacity",
    "mixture_logpdf",
    "mixture_pdf",
    "mi_quadrature",
    "mi_monte_carlo",
    "entropy_lattice",
    "entropy_gradient_radii",
    "q_function",
    "ser_disc_analytic",
    "ser_gb_analytic",
    "ser_monte_carlo",
]

LN2 = math.log(2.0)
# squared cutoff distance in units of sigma2 beyond which components are dropped
CUTOFF_SIGMA2 = 64.0
# quadrature disc radius beyond the outermost point, in units of sigma
PAD_SIGMAS = 8.0


class QuadratureError(RuntimeError):
    """Quadrature refinement did not reach the requested tolerance."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def awgn_capacity(snr: float) -> float:
    return math.log2(1.0 + snr)


@dataclass(frozen=True)
class AwgnChannel:
    """Complex AWGN; real and imaginary noise parts each have variance noise_var/2."""

    noise_var: float
    snr: float = float("nan")

    def __post_init__(self):
        if not self.noise_var > 0:
            raise ValueError("noise_var must be positive")

    @classmethod
    def for_constellation(cls, c: Constellation, snr: float) -> "AwgnChannel":
        """Channel giving ``average_power(c) / noise_var == snr``."""
        if not snr > 0:
            raise ValueError("snr must be positive")
        return cls(average_power(c) / snr, float(snr))

    @classmethod
    def from_snr_db(cls, snr_db: float, power: float = 1.0) -> "AwgnChannel":
        s = db_to_linear(snr_db)
        return cls(power / s, s)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.noise_var)

    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        s = math.sqrt(self.noise_var / 2.0)
        re = rng.standard_normal(size)
        im = rng.standard_normal(size)
        return s * (re + 1j * im)


@dataclass(frozen=True)
class MiEstimate:
    bits: float
    method: str
    std_err_bits: float = 0.0
    samples: int = 0


# -- local mixture evaluation --------------------------------------------------

class _CellIndex:
    """Constellation points binned into square cells of side ``>= cutoff``."""

    def __init__(self, points, probs, sigma2: float, cell: Optional[float] = None):
        keep = probs > 0
        self.points = np.asarray(points)[keep]
        self.logp = np.log(np.asarray(probs)[keep])
        self.sigma2 = float(sigma2)
        self.cutoff = _cutoff(probs, sigma2)
        self.cell = max(self.cutoff, cell or 0.0)
        ci = np.floor(self.points.real / self.cell).astype(np.int64)
        cj = np.floor(self.points.imag / self.cell).astype(np.int64)
        self._bins: dict = {}
        for k, key in enumerate(zip(ci.tolist(), cj.tolist())):
            self._bins.setdefault(key, []).append(k)
        self._near: dict = {}

    def near(self, i: int, j: int) -> np.ndarray:
        key = (i, j)
        out = self._near.get(key)
        if out is None:
            idx = []
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    idx.extend(self._bins.get((i + di, j + dj), ()))
            out = np.array(sorted(idx), dtype=np.int64)
            self._near[key] = out
        return out

    def log_terms(self, y: np.ndarray, comps: np.ndarray) -> np.ndarray:
        """``log p_n - |y - x_n|^2 / sigma2`` for the given components."""
        x = self.points[comps]
        dr = y.real[:, None] - x.real[None, :]
        di = y.imag[:, None] - x.imag[None, :]
        return self.logp[comps][None, :] - (dr * dr + di * di) / self.sigma2

    def groups(self, y: np.ndarray):
        """Yield ``(selection, components)`` grouping ``y`` by cell."""
        ci = np.floor(y.real / self.cell).astype(np.int64)
        cj = np.floor(y.imag / self.cell).astype(np.int64)
        key = np.column_stack([ci, cj])
        uniq, inv = np.unique(key, axis=0, return_inverse=True)
        inv = inv.ravel()
        order = np.argsort(inv, kind="stable")
        bounds = np.searchsorted(inv[order], np.arange(uniq.shape[0] + 1))
        for g in range(uniq.shape[0]):
            sel = order[bounds[g]:bounds[g + 1]]
            yield sel, self.near(int(uniq[g, 0]), int(uniq[g, 1]))

    def logsumexp(self, y: np.ndarray) -> np.ndarray:
        """``log sum_n p_n exp(-|y - x_n|^2 / sigma2)``, -inf if nothing is near."""
        out = np.full(y.shape, -np.inf)
        for sel, comps in self.groups(y):
            if comps.size:
                out[sel] = _lse_rows(self.log_terms(y[sel], comps))
        return out


def _cutoff(probs, sigma2: float) -> float:
    logp = np.log(np.asarray(probs)[np.asarray(probs) > 0])
    spread = float(logp.max() - logp.min())
    return math.sqrt(sigma2 * (CUTOFF_SIGMA2 + min(spread, 700.0)))


def _block_steps(cutoff: float, h: float) -> int:
    m = max(2, int(math.ceil(cutoff / h)))
    return m + m % 2


def _lse_rows(t: np.ndarray) -> np.ndarray:
    m = t.max(axis=1)
    return m + np.log(np.exp(t - m[:, None]).sum(axis=1))


def mixture_logpdf(c: Constellation, sigma2: float, y) -> np.ndarray:
    """Natural log of the output density ``f_Y`` (all components, no cutoff)."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    keep = c.probs > 0
    x = c.points[keep]
    d2 = np.abs(y[:, None] - x[None, :]) ** 2
    t = np.log(c.probs[keep])[None, :] - d2 / sigma2
    return logsumexp(t, axis=1) - math.log(math.pi * sigma2)


def mixture_pdf(c: Constellation, sigma2: float, y) -> np.ndarray:
    """``f_Y(y) = (1/(pi sigma2)) sum_n p_n exp(-|y - x_n|^2 / sigma2)``."""
    return np.exp(mixture_logpdf(c, sigma2, y))


# -- quadrature ----------------------------------------------------------------

def _lattice_cells(radius: float, h: float, cell: float):
    """Yield lattice index vectors ``(kx, ky)`` covering ``[-radius, radius]^2``.

    Each block spans ``m`` lattice steps (``m*h >= cell``, ``m`` even so the
    coarse sub-lattice of even indices is aligned).
    """
    kmax = int(math.ceil(radius / h))
    m = int(round(cell / h))
    first = -((kmax + m - 1) // m)
    last = kmax // m
    for bi in range(first, last + 1):
        kx = np.arange(bi * m, (bi + 1) * m)
        kx = kx[np.abs(kx) <= kmax]
        for bj in range(first, last + 1):
            ky = np.arange(bj * m, (bj + 1) * m)
            ky = ky[np.abs(ky) <= kmax]
            yield bi, bj, kx, ky


def entropy_lattice(points, probs, sigma2: float, h: float,
                    radius: Optional[float] = None, coarse: bool = False):
    """Lattice-sum estimate of ``h(Y)`` in nats.

    The integrand ``-f ln f`` is summed on the lattice ``h*Z^2`` restricted to
    a disc of ``radius`` (default: outermost point plus 8 sigma). With
    ``coarse=True`` the estimate on the ``2h`` sub-lattice is returned too.
    """
    points = np.asarray(points, dtype=complex)
    probs = np.asarray(probs, dtype=float)
    sigma = math.sqrt(sigma2)
    if radius is None:
        radius = float(np.max(np.abs(points[probs > 0]))) + PAD_SIGMAS * sigma
    m = _block_steps(_cutoff(probs, sigma2), h)
    index = _CellIndex(points, probs, sigma2, cell=m * h)
    lognorm = math.log(math.pi * sigma2)
    r2 = radius * radius
    fine = 0.0
    crude = 0.0
    for bi, bj, kx, ky in _lattice_cells(radius, h, index.cell):
        comps = index.near(bi, bj)
        if comps.size == 0 or kx.size == 0 or ky.size == 0:
            continue
        gx, gy = np.meshgrid(kx, ky, indexing="ij")
        y = h * (gx + 1j * gy)
        inside = (y.real ** 2 + y.imag ** 2) <= r2
        if not inside.any():
            continue
        yv = y[inside]
        lnf = _lse_rows(index.log_terms(yv, comps)) - lognorm
        g = -np.exp(lnf) * lnf
        fine += g.sum()
        if coarse:
            even = ((gx[inside] % 2) == 0) & ((gy[inside] % 2) == 0)
            crude += g[even].sum()
    fine *= h * h
    if coarse:
        return fine, crude * 4.0 * h * h
    return fine


def entropy_gradient_radii(radii, phases, probs, sigma2: float, h: float,
                           radius: Optional[float] = None) -> np.ndarray:
    """Derivative of ``h(Y)`` (bits) with respect to each radius.

    Uses ``d h / d r_n = -(1/ln 2) * integral (1 + ln f) d f / d r_n`` with
    ``d f / d r_n = p_n phi_n(y) (2/sigma2) (Re{y e^{-i theta_n}} - r_n)``,
    evaluated on the same lattice as :func:`entropy_lattice`.
    """
    radii = np.asarray(radii, dtype=float)
    phases = np.asarray(phases, dtype=float)
    probs = np.asarray(probs, dtype=float)
    points = radii * np.exp(1j * phases)
    sigma = math.sqrt(sigma2)
    if radius is None:
        radius = float(radii.max()) + PAD_SIGMAS * sigma
    # keep zero-probability points so the gradient is indexed like the input
    probs = np.maximum(probs, 1e-300)
    m = _block_steps(_cutoff(probs, sigma2), h)
    index = _CellIndex(points, probs, sigma2, cell=m * h)
    lognorm = math.log(math.pi * sigma2)
    cos, sin = np.cos(phases), np.sin(phases)
    grad = np.zeros(radii.size)
    r2 = radius * radius
    for bi, bj, kx, ky in _lattice_cells(radius, h, index.cell):
        comps = index.near(bi, bj)
        if comps.size == 0 or kx.size == 0 or ky.size == 0:
            continue
        gx, gy = np.meshgrid(kx, ky, indexing="ij")
        y = h * (gx + 1j * gy)
        inside = (y.real ** 2 + y.imag ** 2) <= r2
        if not inside.any():
            continue
        yv = y[inside]
        t = index.log_terms(yv, comps)
        lnf = _lse_rows(t) - lognorm
        w = np.exp(t - lognorm)  # p_n phi_n(y)
        proj = (yv.real[:, None] * cos[comps] + yv.imag[:, None] * sin[comps]
                - radii[comps])
        grad[comps] += ((1.0 + lnf)[:, None] * w * proj).sum(axis=0)
    return -(2.0 / (sigma2 * LN2)) * h * h * grad


def mi_quadrature(c: Constellation, channel: AwgnChannel, tol: float = 1e-4,
                  max_refinements: int = 4, spacing: Optional[float] = None) -> MiEstimate:
    """MI by lattice quadrature of ``h(Y)``.

    Starts at spacing ``sigma/6`` and halves it until two successive
    estimates agree to ``tol`` bits; raises :class:`QuadratureError` if
    that does not happen within ``max_refinements`` halvings.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    sigma2 = channel.noise_var
    sigma = math.sqrt(sigma2)
    h = spacing if spacing is not None else sigma / 6.0
    hw = math.log2(math.pi * math.e * sigma2)
    prev, est = entropy_lattice(c.points, c.probs, sigma2, h / 2.0, coarse=True)
    h /= 2.0
    for _ in range(max_refinements):
        if abs(est - prev) / LN2 < tol:
            break
        h /= 2.0
        prev, est = est, entropy_lattice(c.points, c.probs, sigma2, h)
    if abs(est - prev) / LN2 >= tol:
        raise QuadratureError(
            f"h(Y) estimates still differ by {abs(est - prev) / LN2:.3g} bits "
            f"after {max_refinements} refinements; tol={tol} is too tight")
    return MiEstimate(float(max(0.0, est / LN2 - hw)), "quadrature")


# -- Monte Carlo ---------------------------------------------------------------

def _sample_inputs(c: Constellation, rng: np.random.Generator, size: int) -> np.ndarray:
    cdf = np.cumsum(c.probs)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(size), side="right")
    return np.minimum(idx, c.n_points - 1)


def mi_monte_carlo(c: Constellation, channel: AwgnChannel, k_mc: int, seed: int,
                   workers: Optional[int] = None,
                   block_size: int = BLOCK_SIZE) -> MiEstimate:
    """Sample-average MI estimator with its standard error.

    Draws are partitioned into fixed blocks seeded by ``(seed, block)``, so the
    result is identical for any number of workers.
    """
    k_mc = int(k_mc)
    if k_mc < 1:
        raise ValueError("k_mc must be >= 1")
    sigma2 = channel.noise_var
    index = _CellIndex(c.points, c.probs, sigma2)

    def block(rng, size):
        idx = _sample_inputs(c, rng, size)
        w = channel.sample(size, rng)
        y = c.points[idx] + w
        num = -(w.real ** 2 + w.imag ** 2) / sigma2
        den = index.logsumexp(y)
        lost = ~np.isfinite(den)
        if lost.any():
            den[lost] = logsumexp(
                np.log(c.probs)[None, :] - np.abs(y[lost, None] - c.points[None, :]) ** 2 / sigma2,
                axis=1)
        return (num - den) / LN2

    terms = np.concatenate(run_blocks(k_mc, seed, block, block_size, workers))
    mean = float(terms.mean())
    se = float(terms.std(ddof=1) / math.sqrt(k_mc)) if k_mc > 1 else 0.0
    return MiEstimate(mean, "monte_carlo", se, k_mc)


# -- symbol error rate ---------------------------------------------------------

def q_function(x):
    """Gaussian tail probability ``Q(x) = erfc(x/sqrt(2))/2``."""
    out = 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


def _square_region_ser(arg):
    q = q_function(arg)
    # 1 - (1 - 2Q)^2 written without cancellation
    return 4.0 * q - 4.0 * q * q


def ser_disc_analytic(n_points: int, snr: float) -> float:
    """Square decision-region SER approximation for disc-GAM (N_l = 1)."""
    if not snr > 0:
        raise ValueError("snr must be positive")
    return float(_square_region_ser(math.sqrt(math.pi * snr / (n_points + 1.0))))


def ser_gb_analytic(n_points: int, snr: float) -> float:
    """SER approximation for high-rate GB-GAM.

    Averages ``4Q(f) - 4Q(f)^2`` over n = 0..N-1 with decision area
    ``pi (r_{n+1}^2 - r_n^2)``; the outermost point has unbounded area.
    """
    from scipy.special import gammaln

    n = int(n_points)
    if n < 2:
        raise ValueError("n_points must be >= 2")
    if not snr > 0:
        raise ValueError("snr must be positive")
    denom = n * math.log(n) - float(gammaln(n + 1.0))
    k = np.arange(n - 1, dtype=float)
    # ln((N-n)/(N-n-1)) = -log1p(-1/(N-n))
    area = -np.log1p(-1.0 / (n - k))
    f = np.sqrt(snr * n * math.pi * area / (2.0 * denom))
    terms = np.append(_square_region_ser(f), 0.0)
    return float(terms.mean())


def ser_monte_carlo(c: Constellation, channel: AwgnChannel, k_mc: int, seed: int,
                    workers: Optional[int] = None,
                    block_size: int = BLOCK_SIZE) -> Tuple[float, float]:
    """Simulated MAP-detector SER and its standard error.

    Uniform pmfs use nearest-point detection via a k-d tree, which is the MAP
    rule there; otherwise ``argmax_n log p_n - |y - x_n|^2 / sigma2``.
    """
    k_mc = int(k_mc)
    if k_mc < 1:
        raise ValueError("k_mc must be >= 1")
    sigma2 = channel.noise_var
    uniform = np.ptp(c.probs) <= 1e-15 * c.probs.max()
    if uniform:
        from scipy.spatial import cKDTree
        tree = cKDTree(np.column_stack([c.points.real, c.points.imag]))
    logp = np.log(np.where(c.probs > 0, c.probs, 1e-300))

    def detect(y):
        if uniform:
            return tree.query(np.column_stack([y.real, y.imag]))[1]
        out = np.empty(y.size, dtype=np.int64)
        step = max(1, (1 << 22) // c.n_points)
        for s in range(0, y.size, step):
            yy = y[s:s + step]
            d2 = np.abs(yy[:, None] - c.points[None, :]) ** 2
            out[s:s + step] = np.argmax(logp[None, :] - d2 / sigma2, axis=1)
        return out

    def block(rng, size):
        idx = _sample_inputs(c, rng, size)
        y = c.points[idx] + channel.sample(size, rng)
        return int(np.count_nonzero(detect(y) != idx))

    errors = sum(run_blocks(k_mc, seed, block, block_size, workers))
    ser = errors / k_mc
    return ser, math.sqrt(ser * (1.0 - ser) / k_mc)


def mi_upper_bounds(c: Constellation, snr: float) -> Tuple[float, float]:
    """``(entropy_bits, log2(1 + snr))``, both upper bounds on the MI."""
    return entropy_bits(c), awgn_capacity(snr)
