"""
Constellation data model and the golden-angle phase law.

A :class:`Constellation` holds complex amplitudes and their probabilities as
numpy arrays. Point ``k`` of a golden-angle constellation sits at phase
``2*pi*phi*(index_offset + k)`` with ``phi = (3 - sqrt(5))/2``; the offset is
kept so each scheme can use its natural index range (1..N, 0..N-1, Nl..Nh).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from functools import lru_cache
from pathlib import Path
from typing import Sequence, Union

import numpy as np

PHI = (3.0 - math.sqrt(5.0)) / 2.0
GOLDEN_ANGLE = 2.0 * math.pi * PHI

NORMALIZED_TOL = 1e-12

__all__ = [
    "PHI",
    "GOLDEN_ANGLE",
    "Constellation",
    "ConstellationError",
    "golden_angle_phase",
    "golden_phases",
    "build_constellation",
    "average_power",
    "rescale_to_power",
    "papr",
    "papr_db",
    "entropy_bits",
    "constellation_mean",
    "min_distance",
    "save_json",
    "load_json",
]


class ConstellationError(ValueError):
    """Raised for inputs that cannot form a valid constellation."""


_DIGIT_BITS = 26


@lru_cache(maxsize=8)
def _split_phi(phi: float):
    # Index n is split into base-2**26 digits d_j.  For each digit position
    # frac(2**(26 j) * phi) is stored as hi + lo with a 26-bit hi, so d_j*hi
    # is exact.  The golden value is expanded from its exact surd.
    with localcontext() as ctx:
        ctx.prec = 80
        exact = (3 - Decimal(5).sqrt()) / 2 if phi == PHI else Decimal(phi)
        parts = []
        for j in range(3):
            psi = exact * (Decimal(2) ** (_DIGIT_BITS * j))
            psi -= int(psi)
            hi = math.ldexp(math.floor(math.ldexp(float(psi), _DIGIT_BITS)), -_DIGIT_BITS)
            parts.append((hi, float(psi - Decimal(hi))))
    return tuple(parts)


def _frac_mul(n, phi: float):
    """Fractional part of ``n*phi``, accurate to ~1e-16 for any int64 ``n``."""
    n = np.asarray(n, dtype=np.int64)
    neg = n < 0
    m = np.abs(n).astype(np.uint64)
    frac = np.zeros(n.shape, dtype=float)
    mask = np.uint64((1 << _DIGIT_BITS) - 1)
    for j, (hi, lo) in enumerate(_split_phi(phi)):
        d = ((m >> np.uint64(_DIGIT_BITS * j)) & mask).astype(float)
        frac += np.mod(d * hi, 1.0) + d * lo
    frac = np.mod(frac, 1.0)
    frac = np.where(neg & (frac > 0), 1.0 - frac, frac)
    return frac


def golden_angle_phase(n: int, phi: float = PHI) -> float:
    """Phase ``2*pi*phi*n`` reduced to ``[0, 2*pi)``."""
    theta = 2.0 * math.pi * float(_frac_mul(n, phi))
    return 0.0 if theta >= 2.0 * math.pi else theta


def golden_phases(indices, phi: float = PHI) -> np.ndarray:
    """Vectorized :func:`golden_angle_phase`."""
    theta = 2.0 * np.pi * _frac_mul(indices, phi)
    theta[theta >= 2.0 * np.pi] = 0.0
    return theta


@dataclass(frozen=True)
class Constellation:
    """Complex points with a probability mass function.

    Parameters
    ----------
    points : ndarray of complex
        Complex amplitudes, ordered by list position.
    probs : ndarray of float
        Point probabilities, summing to one.
    scheme : str
        Free-form label. Labels starting with ``"gam"`` mark golden-angle
        constellations whose phase law is checked by :meth:`validate`.
    index_offset : int
        Index of the first point in the golden-angle phase law.
    """

    points: np.ndarray
    probs: np.ndarray
    scheme: str = "custom"
    index_offset: int = 0
    radii: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        p = np.asarray(self.probs, dtype=float).ravel()
        pts.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "probs", p)
        radii = np.abs(pts)
        radii.setflags(write=False)
        object.__setattr__(self, "radii", radii)
        self.validate()

    def __len__(self) -> int:
        return self.points.size

    @property
    def n_points(self) -> int:
        return self.points.size

    @property
    def is_gam(self) -> bool:
        return self.scheme.startswith("gam")

    def validate(self) -> None:
        if self.points.size == 0:
            raise ConstellationError("constellation must have at least one point")
        if self.points.size != self.probs.size:
            raise ConstellationError("points and probs differ in length")
        if not np.all(np.isfinite(self.points)) or not np.all(np.isfinite(self.probs)):
            raise ConstellationError("points and probs must be finite")
        if np.any(self.probs < 0):
            raise ConstellationError("probabilities must be non-negative")
        if abs(self.probs.sum() - 1.0) > NORMALIZED_TOL:
            raise ConstellationError("probabilities must sum to 1")
        # |r e^{i theta}| can differ from r by an ulp, so equal radii need slack
        slack = 4 * np.finfo(float).eps * float(self.radii.max(initial=0.0))
        if self.is_gam and np.any(np.diff(self.radii) < -slack):
            raise ConstellationError("GAM radii must be non-decreasing")

    def with_points(self, points) -> "Constellation":
        return Constellation(points, self.probs, self.scheme, self.index_offset)

    def rotated(self, theta: float) -> "Constellation":
        """Copy multiplied by ``exp(i*theta)``; no longer tagged as GAM."""
        return Constellation(self.points * np.exp(1j * theta), self.probs,
                             "rotated-" + self.scheme, self.index_offset)


def _normalize(probs: np.ndarray) -> np.ndarray:
    total = probs.sum()
    if not total > 0:
        raise ConstellationError("probability vector is all zero")
    p = probs / total
    if abs(p.sum() - 1.0) > NORMALIZED_TOL:
        # one more pass absorbs the rounding left by the division
        p = p / p.sum()
    return p


def build_constellation(radii: Sequence[float], probs: Sequence[float],
                        index_offset: int = 0, tag: str = "gam",
                        phi: float = PHI) -> Constellation:
    """Place ``radii[k]`` at golden-angle phase ``index_offset + k``.

    Probabilities are renormalized rather than rejected.
    """
    r = np.asarray(radii, dtype=float).ravel()
    p = np.asarray(probs, dtype=float).ravel()
    if r.size == 0:
        raise ConstellationError("need at least one radius")
    if r.size != p.size:
        raise ConstellationError(
            f"radii and probs differ in length ({r.size} != {p.size})")
    if not np.all(np.isfinite(r)) or not np.all(np.isfinite(p)):
        raise ConstellationError("radii and probs must be finite")
    if np.any(r < 0):
        raise ConstellationError("radii must be non-negative")
    if np.any(np.diff(r) < 0):
        raise ConstellationError("radii must be non-decreasing")
    if np.any(p < 0):
        raise ConstellationError("probabilities must be non-negative")
    p = _normalize(p)
    theta = golden_phases(index_offset + np.arange(r.size), phi)
    return Constellation(r * np.exp(1j * theta), p, tag, int(index_offset))


def average_power(c: Constellation) -> float:
    """Mean symbol energy ``sum_n p_n |x_n|^2``."""
    return float(np.dot(c.probs, c.radii ** 2))


def rescale_to_power(c: Constellation, target: float) -> Constellation:
    """Scale all radii uniformly so the average power equals ``target``."""
    if not target > 0:
        raise ConstellationError("target power must be positive")
    p0 = average_power(c)
    if not p0 > 0:
        raise ConstellationError("cannot rescale a zero-power constellation")
    if p0 == target:
        return c
    return c.with_points(c.points * math.sqrt(target / p0))


def papr(c: Constellation) -> float:
    """Peak-to-average power ratio (linear)."""
    p0 = average_power(c)
    if not p0 > 0:
        raise ConstellationError("PAPR undefined for a zero-power constellation")
    return float(np.max(c.radii) ** 2 / p0)


def papr_db(c: Constellation) -> float:
    return 10.0 * math.log10(papr(c))


def entropy_bits(c: Constellation) -> float:
    p = c.probs[c.probs > 0]
    return float(-np.dot(p, np.log2(p)))


def constellation_mean(c: Constellation) -> complex:
    """DC component ``sum_n p_n x_n``; reported only, never removed."""
    return complex(np.dot(c.probs, c.points))


def min_distance(c: Constellation) -> float:
    """Smallest pairwise Euclidean distance between points."""
    from scipy.spatial import cKDTree

    xy = np.column_stack([c.points.real, c.points.imag])
    d, _ = cKDTree(xy).query(xy, k=2)
    return float(d[:, 1].min())


# -- persistence ---------------------------------------------------------------

def to_dict(c: Constellation) -> dict:
    return {
        "scheme": c.scheme,
        "index_offset": int(c.index_offset),
        "avg_power": average_power(c),
        "points": [{"re": float(z.real), "im": float(z.imag), "p": float(p)}
                   for z, p in zip(c.points, c.probs)],
    }


def from_dict(d: dict) -> Constellation:
    try:
        pts = d["points"]
        z = np.array([complex(float(q["re"]), float(q["im"])) for q in pts])
        p = np.array([float(q["p"]) for q in pts])
        scheme = str(d.get("scheme", "custom"))
        offset = int(d.get("index_offset", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConstellationError(f"malformed constellation record: {exc}") from exc
    if p.size and abs(p.sum() - 1.0) > NORMALIZED_TOL:
        p = _normalize(p)
    return Constellation(z, p, scheme, offset)


def save_json(c: Constellation, path: Union[str, Path]) -> None:
    # json uses repr() for floats, which is shortest round-trip exact
    Path(path).write_text(json.dumps(to_dict(c), indent=1) + "\n")


def load_json(path: Union[str, Path]) -> Constellation:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConstellationError(f"{path}: not valid JSON ({exc})") from exc
    return from_dict(d)
