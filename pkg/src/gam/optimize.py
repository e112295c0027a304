"""
MI-maximizing constellation design.

Five formulations share one recipe: eliminate constraints by
parameterization, then maximize MI with an unconstrained quasi-Newton loop.

========  =====================================  ================================
name      free variables                         parameterization
========  =====================================  ================================
G1        radii, uniform pmf                     ``r = cumsum(s**2)``
G2        coefficients of ``f_P(x) = sum c_k x^k`` ``r_n = sqrt(f_P(n/N))`` (SLSQP)
P1        pmf on disc radii                      ``p = softmax(z)``
P2        ratio ``xi`` of a geometric pmf        golden-section search
GP1       radii and pmf                          G1 and P1 combined
========  =====================================  ================================

The SNR equality is always met exactly by rescaling the radii, since the
feasible sets are closed under uniform scaling. An optional PAPR cap is
handled with an augmented-Lagrangian term followed by a terminal repair that
compresses the outermost radii until the cap holds.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy.optimize import minimize

from .constellation import (Constellation, average_power, build_constellation,
                            golden_phases, papr)
from .metrics import (LN2, AwgnChannel, MiEstimate, db_to_linear,
                      entropy_gradient_radii, entropy_lattice, mi_monte_carlo,
                      mi_quadrature)
from .schemes import (gb_hr_radii, gen_geometric_pmf_disc, geometric_log_pmf,
                      solve_xi_for_entropy)

log = logging.getLogger(__name__)

__all__ = [
    "FORMULATIONS",
    "OptimizationProblem",
    "OptimizationResult",
    "SpiralPowerPoly",
    "optimize",
    "optimize_g1",
    "optimize_g2",
    "optimize_p1",
    "optimize_p2",
    "optimize_gp1",
    "papr_constraint_residual",
    "repair_papr",
]

FORMULATIONS = ("G1", "G2", "P1", "P2", "GP1")
_POINT_CAPS = {"G1": 64, "GP1": 32}


@dataclass
class OptimizationProblem:
    """Settings for one MI-maximization run.

    ``snr`` is linear; ``noise_var`` fixes the absolute scale (the
    constellation ends with average power ``snr * noise_var``).
    """

    formulation: str
    n_points: int
    snr: float
    noise_var: float = 1.0
    papr_cap: Optional[float] = None
    poly_degree: int = 3
    mi_method: str = "quadrature"
    tol: float = 1e-4
    k_mc: int = 20000
    seed: int = 0
    max_iters: int = 200
    ftol: float = 1e-10
    gtol: float = 1e-7
    n_starts: int = 3
    gradient: str = "fd"
    decreasing_probs: bool = False
    max_points: Optional[int] = None

    def __post_init__(self):
        self.formulation = self.formulation.upper()
        if self.formulation not in FORMULATIONS:
            raise ValueError(f"unknown formulation {self.formulation!r}; "
                             f"expected one of {FORMULATIONS}")
        if not self.snr > 0:
            raise ValueError("snr must be positive")
        if not self.noise_var > 0:
            raise ValueError("noise_var must be positive")
        if self.papr_cap is not None and not self.papr_cap > 1:
            raise ValueError("papr_cap must exceed 1")
        if self.mi_method not in ("quadrature", "monte_carlo"):
            raise ValueError("mi_method must be 'quadrature' or 'monte_carlo'")
        if self.gradient not in ("fd", "analytic"):
            raise ValueError("gradient must be 'fd' or 'analytic'")
        if int(self.n_points) < 2:
            raise ValueError("n_points must be >= 2")
        if not 1 <= int(self.poly_degree) <= 8:
            raise ValueError("poly_degree must be in 1..8")
        cap = self.max_points or _POINT_CAPS.get(self.formulation)
        if cap is not None and self.n_points > cap:
            raise ValueError(f"{self.formulation} is limited to N <= {cap} "
                             f"(set max_points to override)")

    @property
    def power(self) -> float:
        return self.snr * self.noise_var

    @property
    def channel(self) -> AwgnChannel:
        return AwgnChannel(self.noise_var, self.snr)

    @classmethod
    def from_config(cls, cfg: dict) -> "OptimizationProblem":
        """Build from a JSON-style dict; ``snr_db`` is accepted in place of ``snr``."""
        cfg = dict(cfg)
        if "snr_db" in cfg:
            cfg["snr"] = db_to_linear(float(cfg.pop("snr_db")))
        known = set(cls.__dataclass_fields__)
        unknown = set(cfg) - known
        if unknown:
            raise ValueError(f"unknown problem fields: {sorted(unknown)}")
        return cls(**cfg)


@dataclass
class SpiralPowerPoly:
    """Polynomial spiral power function ``f_P(x) = sum_k c_k x**k``."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.size < 2:
            raise ValueError("need degree >= 1")

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coeffs)

    def derivative(self, x):
        return np.polynomial.polynomial.polyval(
            x, np.polynomial.polynomial.polyder(self.coeffs))

    def is_valid(self, n_points: int, atol: float = 1e-12) -> bool:
        x = np.arange(1, n_points + 1) / n_points
        return bool(self(x[0]) >= -atol and np.all(self.derivative(x) >= -atol))


@dataclass
class OptimizationResult:
    """Outcome of :func:`optimize`.

    ``objective_trace`` holds the best merit value reached after each
    iteration of the winning start, so it is non-decreasing.
    ``constraint_residuals`` has ``power`` (absolute SNR error) and ``papr``
    (excess over the cap, 0 when uncapped).
    """

    constellation: Constellation
    mi_bits: float
    objective_trace: List[float]
    iterations: int
    converged: bool
    constraint_residuals: dict
    initial_mi_bits: float = float("nan")
    start_index: int = 0
    evaluations: int = 0
    seconds: float = 0.0
    mi_std_err: float = 0.0
    extra: dict = field(default_factory=dict)

    def diagnostics(self) -> dict:
        return {
            "mi_bits": self.mi_bits,
            "mi_std_err": self.mi_std_err,
            "initial_mi_bits": self.initial_mi_bits,
            "iterations": self.iterations,
            "converged": self.converged,
            "trace": list(self.objective_trace),
            "residuals": dict(self.constraint_residuals),
            "start_index": self.start_index,
            "evaluations": self.evaluations,
            "seconds": self.seconds,
            **self.extra,
        }


# -- constraint helpers --------------------------------------------------------

def papr_constraint_residual(c: Constellation, papr_cap: float) -> float:
    """``max(0, papr(c) - papr_cap)``; zero means the cap holds."""
    if not papr_cap > 1:
        raise ValueError("papr_cap must exceed 1")
    return max(0.0, papr(c) - papr_cap)


def _rescale(radii: np.ndarray, probs: np.ndarray, power: float) -> np.ndarray:
    p0 = float(np.dot(probs, radii * radii))
    return radii * math.sqrt(power / p0)


def repair_papr(radii: np.ndarray, probs: np.ndarray, power: float,
                papr_cap: float) -> np.ndarray:
    """Clip radii at a ceiling ``t`` and rescale, choosing ``t`` so PAPR <= cap.

    Ordering is preserved; returns the input (rescaled) if already feasible.
    """
    radii = _rescale(np.asarray(radii, dtype=float), probs, power)

    def ratio(t):
        r = np.minimum(radii, t)
        return t * t / float(np.dot(probs, r * r))

    top = float(radii.max())
    if ratio(top) <= papr_cap:
        return radii
    lo, hi = 0.0, top
    lo = float(radii[probs > 0].min()) if np.any(probs > 0) else 0.0
    lo = max(lo, 1e-300)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ratio(mid) <= papr_cap:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * top:
            break
    return _rescale(np.minimum(radii, lo), probs, power)


# -- objective -----------------------------------------------------------------

class _Evaluator:
    """MI of a constellation under the problem's evaluator; counts calls."""

    def __init__(self, problem: OptimizationProblem):
        self.problem = problem
        self.sigma2 = problem.noise_var
        self.h = math.sqrt(self.sigma2) / 6.0
        self.hw = math.log2(math.pi * math.e * self.sigma2)
        self.calls = 0

    def __call__(self, points, probs) -> float:
        self.calls += 1
        pr = self.problem
        if pr.mi_method == "quadrature":
            return entropy_lattice(points, probs, self.sigma2, self.h) / LN2 - self.hw
        c = Constellation(points, probs)
        return mi_monte_carlo(c, pr.channel, pr.k_mc, pr.seed).bits

    def final(self, c: Constellation) -> MiEstimate:
        pr = self.problem
        if pr.mi_method == "quadrature":
            return mi_quadrature(c, pr.channel, tol=pr.tol)
        return mi_monte_carlo(c, pr.channel, pr.k_mc, pr.seed)


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max())
    return e / e.sum()


def _probs_from_logits(z: np.ndarray, decreasing: bool) -> np.ndarray:
    if not decreasing:
        return _softmax(z)
    # reverse cumulative sum of positive weights is non-increasing
    w = np.exp(z - z.max())
    p = np.cumsum(w[::-1])[::-1]
    return p / p.sum()


def _logits_from_probs(p: np.ndarray, decreasing: bool) -> np.ndarray:
    p = np.maximum(np.asarray(p, dtype=float), 1e-300)
    if not decreasing:
        return np.log(p) - np.log(p).mean()
    w = np.maximum(p - np.append(p[1:], 0.0), 1e-12 * p.max())
    return np.log(w)


def _cumsq(s: np.ndarray, strict: float = 0.0) -> np.ndarray:
    q = np.cumsum(s * s)
    if strict:
        q = q + strict * np.arange(1, s.size + 1)
    return q


def _cumsq_inverse(radii: np.ndarray, floor: float = 0.0) -> np.ndarray:
    d = np.diff(np.concatenate([[0.0], np.asarray(radii, dtype=float)]))
    return np.sqrt(np.maximum(d, floor))


class _Run:
    """Bookkeeping for one start: merit with PAPR term, trace, memo."""

    def __init__(self, decode: Callable, evaluate: _Evaluator,
                 problem: OptimizationProblem, offset: int = 0):
        self.decode = decode
        self.evaluate = evaluate
        self.problem = problem
        self.phases = golden_phases(offset + np.arange(problem.n_points))
        self.lam = 0.0
        self.mu = 10.0
        self.trace: List[float] = []
        self._memo: dict = {}

    def mi(self, x: np.ndarray) -> float:
        key = x.tobytes()
        if key not in self._memo:
            if len(self._memo) > 64:
                self._memo.clear()
            radii, probs = self.decode(x)
            pts = radii * np.exp(1j * self.phases)
            self._memo[key] = (self.evaluate(pts, probs), radii, probs)
        return self._memo[key]

    def merit(self, x: np.ndarray) -> float:
        value, radii, probs = self.mi(x)
        cap = self.problem.papr_cap
        if cap is not None:
            g = float(radii.max() ** 2 / np.dot(probs, radii * radii)) - cap
            value -= (max(0.0, self.lam + self.mu * g) ** 2 - self.lam ** 2) / (2 * self.mu)
        return value

    def papr_gap(self, x) -> float:
        _, radii, probs = self.mi(x)
        return float(radii.max() ** 2 / np.dot(probs, radii * radii)) - self.problem.papr_cap


def _lbfgs(run: _Run, x0: np.ndarray, jac: Optional[Callable] = None):
    pr = run.problem
    total_iters = 0
    converged = False
    x = np.asarray(x0, dtype=float)
    outer = 8 if pr.papr_cap is not None else 1
    for _ in range(outer):
        res = minimize(lambda v: -run.merit(v), x,
                       jac=(lambda v: -jac(v)) if jac is not None else None,
                       method="L-BFGS-B",
                       callback=lambda v: run.trace.append(run.merit(v)),
                       options={"maxiter": pr.max_iters, "ftol": pr.ftol,
                                "gtol": pr.gtol, "maxfun": 50 * pr.max_iters})
        x = res.x
        total_iters += int(res.nit)
        converged = bool(res.success)
        if pr.papr_cap is None:
            break
        gap = run.papr_gap(x)
        run.lam = max(0.0, run.lam + run.mu * gap)
        if gap <= 1e-6:
            break
        run.mu *= 10.0
    return x, total_iters, converged


def _finish(problem: OptimizationProblem, evaluator: _Evaluator, radii, probs,
            offset: int, tag: str, trace, iters, converged, initial, start,
            t0, extra=None) -> OptimizationResult:
    radii = np.asarray(radii, dtype=float)
    probs = np.asarray(probs, dtype=float)
    probs = probs / probs.sum()
    if problem.papr_cap is not None:
        radii = repair_papr(radii, probs, problem.power, problem.papr_cap)
    else:
        radii = _rescale(radii, probs, problem.power)
    radii = np.maximum.accumulate(radii)
    c = build_constellation(radii, probs, index_offset=offset, tag=tag)
    est = evaluator.final(c)
    resid = {"power": abs(average_power(c) / problem.noise_var - problem.snr)}
    if problem.papr_cap is not None:
        resid["papr"] = papr_constraint_residual(c, problem.papr_cap)
    else:
        resid["papr"] = 0.0
    # report the best objective reached so far; SQP iterates need not be monotone
    trace = np.maximum.accumulate(np.asarray(trace, dtype=float)).tolist() if len(trace) else []
    return OptimizationResult(c, est.bits, trace, iters, converged, resid,
                              initial, start, evaluator.calls,
                              time.perf_counter() - t0, est.std_err_bits,
                              extra or {})


def _best_of(runs):
    """Highest MI; within 1e-9 bits the earlier start wins."""
    best = None
    for item in runs:
        if best is None or item[0] > best[0] + 1e-9:
            best = item
    return best


def _random_radii(rng, n):
    return np.sort(rng.rayleigh(1.0, n))


# -- G1 ------------------------------------------------------------------------

def _radii_starts(problem: OptimizationProblem) -> List[np.ndarray]:
    n = problem.n_points
    starts = [gb_hr_radii(n, problem.power),
              np.sqrt(np.arange(1, n + 1, dtype=float))]
    rng = np.random.default_rng(problem.seed)
    while len(starts) < problem.n_starts:
        starts.append(_random_radii(rng, n))
    return starts[:max(1, problem.n_starts)]


def _g1_analytic_jac(run: _Run, problem: OptimizationProblem, probs, phases, h):
    def jac(s):
        q = _cumsq(s)
        a2 = problem.power / float(np.dot(probs, q * q))
        a = math.sqrt(a2)
        r = a * q
        g_r = entropy_gradient_radii(r, phases, probs, problem.noise_var, h)
        g_q = a * g_r - a * float(np.dot(g_r, q)) * probs * q / float(np.dot(probs, q * q))
        g_s = 2.0 * s * np.cumsum(g_q[::-1])[::-1]
        if problem.papr_cap is not None:
            # gradient of the penalty by forward differences
            eps = 1e-7
            base = run.merit(s) - run.mi(s)[0]
            pen = np.array([run.merit(s + eps * e) - run.mi(s + eps * e)[0]
                            for e in np.eye(s.size)])
            g_s = g_s + (pen - base) / eps
        return g_s
    return jac


def optimize_g1(problem: OptimizationProblem) -> OptimizationResult:
    """Optimize all N radii for a uniform pmf."""
    if problem.formulation != "G1":
        raise ValueError("problem.formulation must be G1")
    t0 = time.perf_counter()
    n = problem.n_points
    probs = np.full(n, 1.0 / n)
    ev = _Evaluator(problem)

    def decode(s):
        return _rescale(_cumsq(s) + 1e-300, probs, problem.power), probs

    results = []
    initial = None
    for k, r0 in enumerate(_radii_starts(problem)):
        r0 = _rescale(r0, probs, problem.power)
        run = _Run(decode, ev, problem)
        s0 = _cumsq_inverse(r0)
        # s = 0 is a stationary point of the cumulative-squares map
        s0 = np.maximum(s0, 1e-4 * math.sqrt(r0.max()))
        mi0 = run.mi(s0)[0]
        if k == 0:
            initial = mi0
        jac = None
        if problem.gradient == "analytic" and problem.mi_method == "quadrature":
            jac = _g1_analytic_jac(run, problem, probs, run.phases, ev.h)
        run.trace.append(run.merit(s0))
        x, iters, conv = _lbfgs(run, s0, jac)
        mi, radii, _ = run.mi(x)
        log.info("G1 start %d: %.5f -> %.5f bits in %d iterations", k, mi0, mi, iters)
        results.append((mi, k, radii, run.trace, iters, conv))
    mi, k, radii, trace, iters, conv = _best_of(results)
    return _finish(problem, ev, radii, probs, 0, "gam-g1", trace, iters, conv,
                   initial, k, t0)


# -- G2 ------------------------------------------------------------------------

def _g2_matrices(n: int, degree: int):
    x = np.arange(1, n + 1, dtype=float) / n
    powers = np.arange(degree + 1)
    vander = x[:, None] ** powers[None, :]
    deriv = np.zeros_like(vander)
    deriv[:, 1:] = powers[None, 1:] * x[:, None] ** (powers[None, 1:] - 1)
    return x, vander, deriv


def _g2_feasible(target: np.ndarray, vander: np.ndarray, deriv: np.ndarray,
                 cap: Optional[float]) -> np.ndarray:
    """Coefficients closest to ``target`` (on the grid) that satisfy the G2 constraints."""
    target = target / target.mean()
    mean_row = vander.mean(axis=0)
    cons = [{"type": "ineq", "fun": lambda c: deriv @ c, "jac": lambda c: deriv},
            {"type": "ineq", "fun": lambda c: vander[:1] @ c, "jac": lambda c: vander[:1]},
            {"type": "eq", "fun": lambda c: np.array([mean_row @ c - 1.0]),
             "jac": lambda c: mean_row[None, :]}]
    if cap is not None:
        cons.append({"type": "ineq", "fun": lambda c: np.array([cap - vander[-1] @ c]),
                     "jac": lambda c: -vander[-1:]})
    c0, *_ = np.linalg.lstsq(vander, target, rcond=None)
    res = minimize(lambda c: 0.5 * np.sum((vander @ c - target) ** 2), c0,
                   jac=lambda c: vander.T @ (vander @ c - target),
                   method="SLSQP", constraints=cons,
                   options={"maxiter": 500, "ftol": 1e-14})
    return res.x


def _g2_starts(problem: OptimizationProblem, vander: np.ndarray) -> List[np.ndarray]:
    n, k1 = vander.shape
    hr = gb_hr_radii(n, 1.0) ** 2
    fit, *_ = np.linalg.lstsq(vander, hr, rcond=None)
    disc = np.zeros(k1)
    disc[1] = 1.0
    starts = [fit, disc]
    rng = np.random.default_rng(problem.seed)
    while len(starts) < problem.n_starts:
        c = np.abs(rng.standard_normal(k1))
        starts.append(c)
    _, _, deriv = _g2_matrices(n, k1 - 1)
    return [_g2_feasible(vander @ c, vander, deriv, problem.papr_cap)
            for c in starts[:max(1, problem.n_starts)]]


def optimize_g2(problem: OptimizationProblem) -> OptimizationResult:
    """Optimize the coefficients of a polynomial spiral power function.

    The constraints are linear in the coefficients once their scale is fixed
    by ``mean f_P(n/N) = 1``: ``f_P'(n/N) >= 0`` for n = 1..N,
    ``f_P(1/N) >= 0`` and, with a cap, ``f_P(1) <= papr_cap``. SLSQP handles
    them directly; radii are then rescaled to the target SNR.
    """
    if problem.formulation != "G2":
        raise ValueError("problem.formulation must be G2")
    t0 = time.perf_counter()
    n = problem.n_points
    _, vander, deriv = _g2_matrices(n, problem.poly_degree)
    probs = np.full(n, 1.0 / n)
    ev = _Evaluator(problem)
    phases = golden_phases(1 + np.arange(n))
    mean_row = vander.mean(axis=0)

    def decode(c):
        f = np.maximum(vander @ c, 0.0)
        f = np.maximum.accumulate(f)
        if not f.any():
            f = np.arange(1, n + 1, dtype=float)
        return _rescale(np.sqrt(f), probs, problem.power)

    memo: dict = {}

    def mi(c):
        key = c.tobytes()
        if key not in memo:
            if len(memo) > 64:
                memo.clear()
            r = decode(c)
            memo[key] = ev(r * np.exp(1j * phases), probs)
        return memo[key]

    cons = [
        {"type": "ineq", "fun": lambda c: deriv @ c, "jac": lambda c: deriv},
        {"type": "ineq", "fun": lambda c: np.array([vander[0] @ c]),
         "jac": lambda c: vander[:1]},
        {"type": "eq", "fun": lambda c: np.array([mean_row @ c - 1.0]),
         "jac": lambda c: mean_row[None, :]},
    ]
    if problem.papr_cap is not None:
        cap = problem.papr_cap
        cons.append({"type": "ineq", "fun": lambda c: np.array([cap - vander[-1] @ c]),
                     "jac": lambda c: -vander[-1:]})

    results = []
    initial = None
    for k, c0 in enumerate(_g2_starts(problem, vander)):
        trace = [mi(c0)]
        if k == 0:
            initial = trace[0]
        res = minimize(lambda c: -mi(c), c0, method="SLSQP", constraints=cons,
                       callback=lambda c: trace.append(mi(c)),
                       options={"maxiter": problem.max_iters, "ftol": 1e-10})
        c_opt = res.x
        if mi(c0) > mi(c_opt):
            c_opt = c0
        log.info("G2 start %d: %.5f -> %.5f bits in %d iterations (%s)",
                 k, trace[0], mi(c_opt), res.nit, res.message)
        results.append((mi(c_opt), k, c_opt, trace, int(res.nit), bool(res.success)))
    best, k, c_opt, trace, iters, conv = _best_of(results)
    poly = SpiralPowerPoly(c_opt * problem.power / float(np.dot(probs, np.maximum(vander @ c_opt, 0))))
    return _finish(problem, ev, decode(c_opt), probs, 1, "gam-g2", trace, iters,
                   conv, initial, k, t0,
                   {"poly_coeffs": poly.coeffs.tolist(),
                    "poly_valid": poly.is_valid(n, atol=1e-9 * abs(poly.coeffs).max())})


# -- P1 ------------------------------------------------------------------------

def _disc_radii(n: int) -> np.ndarray:
    return np.sqrt(np.arange(1, n + 1, dtype=float))


def _pmf_starts(problem: OptimizationProblem) -> List[np.ndarray]:
    n = problem.n_points
    starts = [np.full(n, 1.0 / n)]
    # geometric pmf one bit below uniform; half a bit for tiny N
    target = math.log(n) - (math.log(2.0) if n > 2 else 0.5 * math.log(2.0))
    xi = solve_xi_for_entropy(n, target).xi
    starts.append(np.exp(geometric_log_pmf(xi, n)))
    rng = np.random.default_rng(problem.seed)
    while len(starts) < problem.n_starts:
        starts.append(rng.dirichlet(np.ones(n)))
    return starts[:max(1, problem.n_starts)]


def optimize_p1(problem: OptimizationProblem) -> OptimizationResult:
    """Optimize the pmf on disc radii ``c*sqrt(n)``, n = 1..N."""
    if problem.formulation != "P1":
        raise ValueError("problem.formulation must be P1")
    t0 = time.perf_counter()
    n = problem.n_points
    base = _disc_radii(n)
    ev = _Evaluator(problem)
    dec = problem.decreasing_probs

    def decode(z):
        p = _probs_from_logits(z, dec)
        return _rescale(base, p, problem.power), p

    results = []
    initial = None
    for k, p0 in enumerate(_pmf_starts(problem)):
        if dec:
            p0 = np.sort(p0)[::-1]
        run = _Run(decode, ev, problem, offset=1)
        z0 = _logits_from_probs(p0, dec)
        mi0 = run.mi(z0)[0]
        if k == 0:
            initial = mi0
        run.trace.append(run.merit(z0))
        x, iters, conv = _lbfgs(run, z0)
        mi, radii, probs = run.mi(x)
        log.info("P1 start %d: %.5f -> %.5f bits in %d iterations", k, mi0, mi, iters)
        results.append((mi, k, (radii, probs), run.trace, iters, conv))
    mi, k, (radii, probs), trace, iters, conv = _best_of(results)
    return _finish(problem, ev, radii, probs, 1, "gam-p1", trace, iters, conv,
                   initial, k, t0)


# -- P2 ------------------------------------------------------------------------

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def optimize_p2(problem: OptimizationProblem, grid: int = 40) -> OptimizationResult:
    """Maximize MI over the ratio ``xi`` of the geometric pmf on disc radii.

    A coarse scan over ``(0, 1]`` brackets the best ``xi``; golden-section
    search then narrows the bracket to 1e-4.
    """
    if problem.formulation != "P2":
        raise ValueError("problem.formulation must be P2")
    t0 = time.perf_counter()
    n = problem.n_points
    ev = _Evaluator(problem)
    trace: List[float] = []
    memo: dict = {}

    def mi(xi):
        xi = min(1.0, max(1e-6, float(xi)))
        if xi not in memo:
            c = gen_geometric_pmf_disc(n, xi, problem.snr, problem.noise_var)
            radii, probs = c.radii, c.probs
            if problem.papr_cap is not None:
                radii = repair_papr(radii, probs, problem.power, problem.papr_cap)
            pts = radii * np.exp(1j * golden_phases(1 + np.arange(n)))
            memo[xi] = ev(pts, probs)
        return memo[xi]

    xs = np.linspace(1.0 / grid, 1.0, grid)
    vals = [mi(x) for x in xs]
    trace.extend(np.maximum.accumulate(vals).tolist())
    i = int(np.argmax(vals))
    initial = vals[-1]
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, grid - 1)]
    c1 = b - _INVPHI * (b - a)
    c2 = a + _INVPHI * (b - a)
    f1, f2 = mi(c1), mi(c2)
    iters = 0
    while b - a > 1e-4:
        iters += 1
        if f1 >= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - _INVPHI * (b - a)
            f1 = mi(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + _INVPHI * (b - a)
            f2 = mi(c2)
        trace.append(max(trace[-1], f1, f2))
    cands = [(mi(x), -j, x) for j, x in enumerate([xs[i], c1, c2, a, b])]
    best_mi, _, xi = max(cands)
    c = gen_geometric_pmf_disc(n, xi, problem.snr, problem.noise_var)
    return _finish(problem, ev, c.radii, c.probs, 1, "gam-p2", trace, iters, True,
                   initial, 0, t0, {"xi": float(min(1.0, max(1e-6, xi)))})


# -- GP1 -----------------------------------------------------------------------

def optimize_gp1(problem: OptimizationProblem) -> OptimizationResult:
    """Jointly optimize radii (strictly increasing) and the pmf."""
    if problem.formulation != "GP1":
        raise ValueError("problem.formulation must be GP1")
    t0 = time.perf_counter()
    n = problem.n_points
    ev = _Evaluator(problem)
    dec = problem.decreasing_probs
    strict = 1e-9

    def decode(x):
        s, z = x[:n], x[n:]
        p = _probs_from_logits(z, dec)
        return _rescale(_cumsq(s, strict), p, problem.power), p

    radii_starts = _radii_starts(problem)
    pmf_starts = _pmf_starts(problem)
    # pair geometry and pmf starts: (HR, uniform), (disc, bell pmf), (random, random)
    starts = list(zip(radii_starts, pmf_starts))

    results = []
    initial = None
    for k, (r0, p0) in enumerate(starts):
        if dec:
            p0 = np.sort(p0)[::-1]
        r0 = _rescale(r0, p0, problem.power)
        s0 = _cumsq_inverse(r0)
        s0 = np.maximum(s0, 1e-4 * math.sqrt(r0.max()))
        x0 = np.concatenate([s0, _logits_from_probs(p0, dec)])
        run = _Run(decode, ev, problem)
        mi0 = run.mi(x0)[0]
        if k == 0:
            initial = mi0
        run.trace.append(run.merit(x0))
        x, iters, conv = _lbfgs(run, x0)
        mi, radii, probs = run.mi(x)
        log.info("GP1 start %d: %.5f -> %.5f bits in %d iterations", k, mi0, mi, iters)
        results.append((mi, k, (radii, probs), run.trace, iters, conv))
    mi, k, (radii, probs), trace, iters, conv = _best_of(results)
    res = _finish(problem, ev, radii, probs, 0, "gam-gp1", trace, iters, conv,
                  initial, k, t0)
    return res


_DISPATCH = {"G1": optimize_g1, "G2": optimize_g2, "P1": optimize_p1,
             "P2": optimize_p2, "GP1": optimize_gp1}


def optimize(problem: OptimizationProblem) -> OptimizationResult:
    return _DISPATCH[problem.formulation](problem)
