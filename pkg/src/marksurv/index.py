"""Characteristic-index families for exchangeable Markov survival processes.

A characteristic index is a strictly increasing sequence starting at zero.
Its value at n is the total failure intensity of the risk-set chain while n
individuals remain at risk, and its signed forward differences give the
intensity attached to each possible block of simultaneous failures.  This
module provides the built-in families, numerically stable difference
evaluation (closed forms where available, scaled adaptive quadrature
otherwise), splitting-rule tables with normalization/consistency
diagnostics, and the conversions between the dislocation-measure and
Levy-measure representations of the same process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

__all__ = [
    "ParameterError",
    "NumericError",
    "CharacteristicIndex",
    "HarmonicIndex",
    "GammaIndex",
    "PowerIndex",
    "GeometricIndex",
    "LinearIndex",
    "LinearShiftIndex",
    "BetaSplitIndex",
    "MeasureIndex",
    "DislocationMeasure",
    "LevyMeasure",
    "SplittingTable",
    "build_table",
    "normalization_defect",
    "consistency_defect",
    "weak_continuity_defect",
    "difference_positivity_defect",
    "levy_from_dislocation",
    "dislocation_from_levy",
    "index_from_spec",
]


class ParameterError(ValueError):
    """Parameter or argument outside its admissible domain."""


class NumericError(ArithmeticError):
    """A rate evaluation failed to converge or produced a non-finite value."""


# Differences of order above this are evaluated through the integral
# representation instead of the raw alternating sum.
_NAIVE_DIFF_MAX = 8
# Estimated relative precision lost to cancellation above which the naive
# alternating sum is rejected even at low order.  Kept near machine level
# so tabulated rules meet the 1e-10 normalization budget.
_CANCEL_TOL = 5e-12
# Adaptive quadrature settings; limit=476 caps the node count near 1e4.
_QUAD_KW = dict(epsabs=1e-13, epsrel=1e-11, limit=476)

_EPS = 2.220446049250313e-16


def _check_rd(r: int, d: int) -> None:
    if r < 0:
        raise ParameterError(f"survivor count must be >= 0, got {r}")
    if d < 1:
        raise ParameterError(f"failure block size must be >= 1, got {d}")


def _log1mexp(z: float) -> float:
    """log(1 - exp(-z)) for z > 0 without intermediate underflow."""
    if z > 0.693:
        return math.log1p(-math.exp(-z))
    return math.log(-math.expm1(-z))


def _alternating_difference(seq: Callable[[int], float], r: int, d: int):
    """Signed d-th forward difference of ``seq`` at r, with a cancellation estimate.

    Returns ``(value, cancellation)`` where ``value`` carries the sign that
    makes consistent sequences non-negative and ``cancellation`` estimates the
    relative precision lost to the alternating sum.
    """
    total = 0.0
    absum = 0.0
    for j in range(d + 1):
        term = (-1.0) ** (j + 1) * math.comb(d, j) * seq(r + j)
        total += term
        absum += abs(term)
    if not total > 0.0:
        return total, math.inf
    return total, absum * _EPS / total


def _log_quad(log_f: Callable[[float], float], lo: float, hi: float,
              probes) -> float:
    """log of the integral of exp(log_f) over (lo, hi).

    The integrand is rescaled by its maximum over the probe points so that
    quadrature runs near unit magnitude; this keeps pure relative accuracy
    even when the integral itself is far below 1.
    """
    peak = -math.inf
    for z in probes:
        v = log_f(z)
        if math.isfinite(v) and v > peak:
            peak = v
    if not math.isfinite(peak):
        raise NumericError("quadrature scaling failed: no finite probe value")

    def f(z: float) -> float:
        v = log_f(z) - peak
        return math.exp(v) if v > -745.0 else 0.0

    out = integrate.quad(f, lo, hi, full_output=1, **_QUAD_KW)
    value, err = out[0], out[1]
    if len(out) > 3 or not value > 0.0 or err > max(1e-13, 1e-8 * value):
        raise NumericError(
            f"quadrature did not converge (value={value!r}, err={err!r})")
    return peak + math.log(value)


class CharacteristicIndex:
    """Rate sequence defining a consistent exchangeable survival process.

    ``total_rate(n)`` is the failure intensity while n individuals remain at
    risk; ``block_rate(r, d)`` is the intensity that one particular set of d
    individuals fails next, leaving r; ``split_prob(r, d)`` is the chance
    that the next failure block is that particular set.  Splitting
    probabilities depend only on the unit-scale sequence, so families with a
    multiplicative rate parameter expose it separately through ``scale``.

    Instances are immutable after construction and safe for concurrent reads.
    """

    @property
    def scale(self) -> float:
        return 1.0

    def unit_total_rate(self, n: int) -> float:
        raise NotImplementedError

    def unit_block_rate(self, r: int, d: int) -> float:
        raise NotImplementedError

    def total_rate(self, n: int) -> float:
        if n < 0:
            raise ParameterError(f"risk-set size must be >= 0, got {n}")
        if n == 0:
            return 0.0
        return self.scale * self.unit_total_rate(n)

    def block_rate(self, r: int, d: int) -> float:
        _check_rd(r, d)
        return self.scale * self.unit_block_rate(r, d)

    def log_unit_block_rate(self, r: int, d: int) -> float:
        _check_rd(r, d)
        v = self.unit_block_rate(r, d)
        return math.log(v) if v > 0.0 else -math.inf

    def split_prob(self, r: int, d: int) -> float:
        _check_rd(r, d)
        q = self.unit_block_rate(r, d) / self.unit_total_rate(r + d)
        return min(max(q, 0.0), 1.0)

    def _dp_tables(self, n: int):
        """Optional (A, B, C) lookup arrays with log block rate = A[d] + B[r] + C[r+d].

        Families without a separable closed form return None and fall back to
        elementwise evaluation.
        """
        return None

    def first_block_log_weights(self, m: int) -> np.ndarray:
        """log of C(m, d) * split_prob(m - d, d) for d = 1..m."""
        if m < 1:
            raise ParameterError("need at least one individual at risk")
        d = np.arange(1, m + 1)
        logc = (special.gammaln(m + 1) - special.gammaln(d + 1)
                - special.gammaln(m - d + 1))
        tabs = self._dp_tables(m)
        if tabs is not None:
            a, b, c = tabs
            lograte = a[1:m + 1] + b[m - 1::-1] + c[m]
        else:
            lograte = np.array(
                [self.log_unit_block_rate(m - di, di) for di in range(1, m + 1)])
        return logc + lograte - math.log(self.unit_total_rate(m))

    def describe(self) -> str:
        """Family name plus named parameters, as a small text record."""
        name = _FAMILY_NAMES.get(type(self), type(self).__name__)
        try:
            params = ", ".join(
                f"{f.name}={getattr(self, f.name)!r}" for f in fields(self))
        except TypeError:
            params = ""
        return f"{name}({params})"

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return self.describe()


@dataclass(frozen=True, repr=False)
class HarmonicIndex(CharacteristicIndex):
    """Digamma-difference family; its predictive distributions are the only
    ones among Markov survival processes that vary weakly continuously with
    the observed failure times."""

    nu: float = 1.0
    rho: float = 1.0

    def __post_init__(self):
        if not (self.nu > 0.0):
            raise ParameterError(f"nu must be positive, got {self.nu}")
        if not (self.rho > 0.0):
            raise ParameterError(f"rho must be positive, got {self.rho}")

    @property
    def scale(self) -> float:
        return self.nu

    def unit_total_rate(self, n: int) -> float:
        return float(special.digamma(n + self.rho) - special.digamma(self.rho))

    def log_unit_block_rate(self, r: int, d: int) -> float:
        _check_rd(r, d)
        a = self.rho + r
        return math.lgamma(d) + math.lgamma(a) - math.lgamma(a + d)

    def unit_block_rate(self, r: int, d: int) -> float:
        return math.exp(self.log_unit_block_rate(r, d))

    def _dp_tables(self, n: int):
        i = np.arange(n + 1, dtype=float)
        g = special.gammaln(self.rho + i)
        return special.gammaln(np.maximum(i, 1.0)), g, -g


@dataclass(frozen=True, repr=False)
class GammaIndex(CharacteristicIndex):
    """Logarithmic family generated by a gamma random hazard measure."""

    nu: float = 1.0
    rho: float = 1.0

    def __post_init__(self):
        if not (self.nu > 0.0):
            raise ParameterError(f"nu must be positive, got {self.nu}")
        if not (self.rho > 0.0):
            raise ParameterError(f"rho must be positive, got {self.rho}")

    @property
    def scale(self) -> float:
        return self.nu

    def unit_total_rate(self, n: int) -> float:
        return math.log1p(n / self.rho)

    def unit_block_rate(self, r: int, d: int) -> float:
        _check_rd(r, d)
        if d <= _NAIVE_DIFF_MAX:
            val, cancel = _alternating_difference(self.unit_total_rate, r, d)
            if cancel <= _CANCEL_TOL:
                return val
        return math.exp(self._log_rate_quad(r, d))

    def log_unit_block_rate(self, r: int, d: int) -> float:
        _check_rd(r, d)
        if d <= _NAIVE_DIFF_MAX:
            val, cancel = _alternating_difference(self.unit_total_rate, r, d)
            if cancel <= _CANCEL_TOL:
                return math.log(val)
        return self._log_rate_quad(r, d)

    def _log_rate_quad(self, r: int, d: int) -> float:
        a = self.rho + r

        def log_f(z: float) -> float:
            return -a * z + d * _log1mexp(z) - math.log(z)

        probes = np.geomspace(1e-8, 200.0, 40)
        return _log_quad(log_f, 0.0, np.inf, probes)


@dataclass(frozen=True, repr=False)
class PowerIndex(CharacteristicIndex):
    """Fractional-power family n**alpha for 0 < alpha < 1."""

    alpha: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ParameterError(
                f"alpha must lie in (0, 1), got {self.alpha}")

    def unit_total_rate(self, n: int) -> float:
        return float(n) ** self.alpha

    def unit_block_rate(self, r: int, d: int) -> float:
        _check_rd(r, d)
        if d <= _NAIVE_DIFF_MAX:
            val, cancel = _alternating_difference(self.unit_total_rate, r, d)
            if cancel <= _CANCEL_TOL:
                return val
        return math.exp(self._log_rate_quad(r, d))

    def log_unit_block_rate(self, r: int, d: int) -> float:
        _check_rd(r, d)
        if d <= _NAIVE_DIFF_MAX:
            val, cancel = _alternating_difference(self.unit_total_rate, r, d)
            if cancel <= _CANCEL_TOL:
                return math.log(val)
        return self._log_rate_quad(r, d)

    def _log_rate_quad(self, r: int, d: int) -> float:
        al = self.alpha
        lead = math.log(al) - math.lgamma(1.0 - al)

        def log_f(z: float) -> float:
            return -r * z + d * _log1mexp(z) - (1.0 + al) * math.log(z)

        probes = np.geomspace(1e-8, 200.0, 40)
        if r == 0:
            # The integrand decays only algebraically; integrate to a cutoff
            # and add the closed-form tail, where 1 - exp(-z) is 1 to within
            # exp(-cutoff).
            cutoff = 60.0
            log_main = _log_quad(log_f, 0.0, cutoff, probes[probes < cutoff])
            log_tail = -al * math.log(cutoff) - math.log(al)
            return lead + np.logaddexp(log_main, log_tail)
        return lead + _log_quad(log_f, 0.0, np.inf, probes)


@dataclass(frozen=True, repr=False)
class GeometricIndex(CharacteristicIndex):
    """Bounded family 1 - alpha**n with binomial block rates."""

    alpha: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ParameterError(
                f"alpha must lie in (0, 1), got {self.alpha}")

    def unit_total_rate(self, n: int) -> float:
        return -math.expm1(n * math.log(self.alpha))

    def log_unit_block_rate(self, r: int, d: int) -> float:
        _check_rd(r, d)
        return r * math.log(self.alpha) + d * math.log1p(-self.alpha)

    def unit_block_rate(self, r: int, d: int) -> float:
        return math.exp(self.log_unit_block_rate(r, d))

    def _dp_tables(self, n: int):
        i = np.arange(n + 1, dtype=float)
        return (i * math.log1p(-self.alpha), i * math.log(self.alpha),
                np.zeros(n + 1))


@dataclass(frozen=True, repr=False)
class LinearIndex(CharacteristicIndex):
    """Identity sequence: every failure is a singleton (iid exponential)."""

    def unit_total_rate(self, n: int) -> float:
        return float(n)

    def unit_block_rate(self, r: int, d: int) -> float:
        _check_rd(r, d)
        return 1.0 if d == 1 else 0.0

    def _dp_tables(self, n: int):
        a = np.full(n + 1, -np.inf)
        if n >= 1:
            a[1] = 0.0
        return a, np.zeros(n + 1), np.zeros(n + 1)


@dataclass(frozen=True, repr=False)
class LinearShiftIndex(CharacteristicIndex):
    """Shifted linear sequence n + rho: singleton splits plus a total-failure
    block taking out the whole risk set."""

    rho: float = 1.0

    def __post_init__(self):
        if not (self.rho >= 0.0):
            raise ParameterError(f"rho must be >= 0, got {self.rho}")

    def unit_total_rate(self, n: int) -> float:
        return n + self.rho

    def unit_block_rate(self, r: int, d: int) -> float:
        _check_rd(r, d)
        if d == 1:
            return 1.0 + self.rho if r == 0 else 1.0
        return self.rho if r == 0 else 0.0

    def first_block_log_weights(self, m: int) -> np.ndarray:
        if m < 1:
            raise ParameterError("need at least one individual at risk")
        w = np.zeros(m)
        z = self.unit_total_rate(m)
        w[0] = m * self.unit_block_rate(m - 1, 1) / z
        if m >= 2:
            w[m - 1] = self.unit_block_rate(0, m) / z
        with np.errstate(divide="ignore"):
            return np.log(w)


@dataclass(frozen=True, repr=False)
class BetaSplitIndex(CharacteristicIndex):
    """Family whose dislocation measure has a beta-type density
    x**(rho-1) * (1-x)**(beta-1); block rates are exact beta integrals.

    beta = 0 coincides with the harmonic family at unit scale.
    """

    rho: float = 1.0
    beta: float = 0.5

    def __post_init__(self):
        if not (self.rho > 0.0):
            raise ParameterError(f"rho must be positive, got {self.rho}")
        if not (self.beta > -1.0):
            raise ParameterError(f"beta must exceed -1, got {self.beta}")

    def unit_total_rate(self, n: int) -> float:
        b = self.beta
        if b == 0.0:
            return float(special.digamma(n + self.rho)
                         - special.digamma(self.rho))
        head = math.exp(math.lgamma(self.rho) - math.lgamma(self.rho + b))
        tail = math.exp(math.lgamma(n + self.rho)
                        - math.lgamma(n + self.rho + b))
        return math.exp(math.lgamma(b + 1.0)) / b * (head - tail)

    def log_unit_block_rate(self, r: int, d: int) -> float:
        _check_rd(r, d)
        return float(special.betaln(self.rho + r, self.beta + d))

    def unit_block_rate(self, r: int, d: int) -> float:
        return math.exp(self.log_unit_block_rate(r, d))

    def _dp_tables(self, n: int):
        i = np.arange(n + 1, dtype=float)
        return (special.gammaln(np.maximum(self.beta + i, _EPS)),
                special.gammaln(self.rho + i),
                -special.gammaln(self.rho + self.beta + i))


# ---------------------------------------------------------------------------
# Measure representations


def _finite_probe_values(log_f, xs):
    out = []
    for x in xs:
        try:
            v = log_f(x)
        except (ValueError, ZeroDivisionError, OverflowError):
            continue
        if math.isfinite(v):
            out.append(x)
    return out


@dataclass(frozen=True)
class DislocationMeasure:
    """Measure on [0, 1) entering the integral representation of a
    consistent splitting rule, given as a density, atoms, or both.

    The defining integrability requirement is that (1 - x) be integrable;
    construction verifies it by quadrature.
    """

    density: Optional[Callable[[float], float]] = None
    atoms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(
            (float(x), float(m)) for x, m in self.atoms))
        for x, m in self.atoms:
            if not (0.0 <= x < 1.0):
                raise ParameterError(f"atom location {x} outside [0, 1)")
            if not (m > 0.0):
                raise ParameterError(f"atom mass must be positive, got {m}")
        if self.density is None and not self.atoms:
            raise ParameterError("measure needs a density or at least one atom")
        try:
            check = self._integral(0, 1)  # integral of (1 - x) vs the measure
        except NumericError as exc:
            raise ParameterError(
                "dislocation measure fails the (1 - x) integrability check"
            ) from exc
        if not math.isfinite(check):
            raise ParameterError(
                "dislocation measure fails the (1 - x) integrability check")

    def _integral(self, r: int, d: int) -> float:
        """Integral of x**r * (1-x)**d against the measure."""
        total = sum(m * x ** r * (1.0 - x) ** d for x, m in self.atoms)
        if self.density is not None:
            p = self.density

            def log_f(x: float) -> float:
                try:
                    v = p(x)
                except (ValueError, ZeroDivisionError, OverflowError):
                    return -math.inf
                if not v > 0.0:
                    return -math.inf
                return r * math.log(x) + d * math.log1p(-x) + math.log(v)

            xs = _finite_probe_values(
                log_f, np.concatenate([np.geomspace(1e-9, 0.5, 12),
                                       1.0 - np.geomspace(1e-9, 0.5, 12)]))
            if xs:
                total += math.exp(_log_quad(log_f, 0.0, 1.0, xs))
        return total

    def survival_moment(self, n: int) -> float:
        """Integral of (1 - x**n) against the measure."""
        if n == 0:
            return 0.0
        total = sum(m * -math.expm1(n * math.log(x)) if x > 0.0 else m
                    for x, m in self.atoms)
        if self.density is not None:
            p = self.density

            def log_f(x: float) -> float:
                try:
                    v = p(x)
                except (ValueError, ZeroDivisionError, OverflowError):
                    return -math.inf
                if not v > 0.0:
                    return -math.inf
                return math.log(-math.expm1(n * math.log(x))) + math.log(v)

            xs = _finite_probe_values(
                log_f, np.concatenate([np.geomspace(1e-9, 0.5, 12),
                                       1.0 - np.geomspace(1e-9, 0.5, 12)]))
            if xs:
                total += math.exp(_log_quad(log_f, 0.0, 1.0, xs))
        return total

    def block_integral(self, r: int, d: int) -> float:
        _check_rd(r, d)
        return self._integral(r, d)


@dataclass(frozen=True)
class LevyMeasure:
    """Drift plus jump measure on (0, inf]; an atom at +inf models killing."""

    drift: float = 0.0
    density: Optional[Callable[[float], float]] = None
    atoms: tuple = ()

    def __post_init__(self):
        if not (self.drift >= 0.0):
            raise ParameterError(f"drift must be >= 0, got {self.drift}")
        object.__setattr__(self, "atoms", tuple(
            (float(z), float(m)) for z, m in self.atoms))
        for z, m in self.atoms:
            if not (z > 0.0):
                raise ParameterError(f"jump location must be positive, got {z}")
            if not (m > 0.0):
                raise ParameterError(f"jump mass must be positive, got {m}")
        try:
            finite = math.isfinite(self.exponent(1.0))
        except NumericError:
            finite = False
        if not finite:
            raise ParameterError(
                "Levy measure fails the (1 - exp(-z)) integrability check")

    def exponent(self, t: float) -> float:
        """Laplace exponent: drift * t plus the (1 - exp(-z t)) integral."""
        if t == 0.0:
            return 0.0
        if t < 0.0:
            raise ParameterError("exponent defined for t >= 0")
        total = self.drift * t
        total += sum(m if math.isinf(z) else m * -math.expm1(-z * t)
                     for z, m in self.atoms)
        if self.density is not None:
            w = self.density

            def log_f(z: float) -> float:
                try:
                    v = w(z)
                except (ValueError, ZeroDivisionError, OverflowError):
                    return -math.inf
                if not v > 0.0:
                    return -math.inf
                return _log1mexp(z * t) + math.log(v)

            zs = _finite_probe_values(log_f, np.geomspace(1e-9, 300.0, 40))
            if zs:
                total += math.exp(_log_quad(log_f, 0.0, np.inf, zs))
        return total


def levy_from_dislocation(measure: DislocationMeasure,
                          erosion: float = 0.0) -> LevyMeasure:
    """Push the dislocation measure through x -> -log x; erosion becomes drift.

    A density picks up the Jacobian factor exp(-z); atom masses are carried
    over unchanged (an atom at x = 0 maps to a killing atom at +inf).
    """
    if not (erosion >= 0.0):
        raise ParameterError(f"erosion must be >= 0, got {erosion}")
    density = None
    if measure.density is not None:
        p = measure.density

        def density(z: float, _p=p) -> float:
            return math.exp(-z) * _p(math.exp(-z))

    atoms = tuple((math.inf if x == 0.0 else -math.log(x), m)
                  for x, m in measure.atoms)
    return LevyMeasure(drift=erosion, density=density, atoms=atoms)


def dislocation_from_levy(levy: LevyMeasure):
    """Inverse of :func:`levy_from_dislocation`; returns (measure, erosion)."""
    density = None
    if levy.density is not None:
        w = levy.density

        def density(x: float, _w=w) -> float:
            return _w(-math.log(x)) / x

    atoms = tuple((0.0 if math.isinf(z) else math.exp(-z), m)
                  for z, m in levy.atoms)
    return DislocationMeasure(density=density, atoms=atoms), levy.drift


@dataclass(frozen=True, repr=False)
class MeasureIndex(CharacteristicIndex):
    """Index built directly from a dislocation measure and erosion constant."""

    dislocation: DislocationMeasure = None
    erosion: float = 0.0

    def __post_init__(self):
        if self.dislocation is None:
            raise ParameterError("a dislocation measure is required")
        if not (self.erosion >= 0.0):
            raise ParameterError(f"erosion must be >= 0, got {self.erosion}")

    def unit_total_rate(self, n: int) -> float:
        return self.dislocation.survival_moment(n) + n * self.erosion

    def unit_block_rate(self, r: int, d: int) -> float:
        _check_rd(r, d)
        val = self.dislocation.block_integral(r, d)
        if d == 1:
            val += self.erosion
        return val


# ---------------------------------------------------------------------------
# Splitting-rule tables and diagnostics


@dataclass(frozen=True, eq=False)
class SplittingTable:
    """Dense table of splitting probabilities q(r, d) for r + d <= max_n."""

    max_n: int
    probs: np.ndarray

    def prob(self, r: int, d: int) -> float:
        _check_rd(r, d)
        if r + d > self.max_n:
            raise ParameterError(
                f"table covers r + d <= {self.max_n}, got r={r}, d={d}")
        return float(self.probs[r, d])

    def first_block_weights(self, m: int) -> np.ndarray:
        """C(m, d) * q(m - d, d) for d = 1..m."""
        if not (1 <= m <= self.max_n):
            raise ParameterError(f"m must lie in 1..{self.max_n}, got {m}")
        d = np.arange(1, m + 1)
        comb = np.array([float(math.comb(m, int(di))) for di in d])
        return comb * self.probs[m - d, d]


def build_table(index: CharacteristicIndex, max_n: int,
                tol: float = 1e-8) -> SplittingTable:
    """Tabulate q(r, d) for r + d <= max_n, validating row normalization."""
    if max_n < 1:
        raise ParameterError(f"max_n must be >= 1, got {max_n}")
    q = np.full((max_n + 1, max_n + 1), np.nan)
    for n in range(1, max_n + 1):
        for d in range(1, n + 1):
            r = n - d
            v = index.split_prob(r, d)
            if not math.isfinite(v):
                raise NumericError(
                    f"splitting probability q({r},{d}) is not finite")
            q[r, d] = v
    table = SplittingTable(max_n=max_n, probs=q)
    defect = normalization_defect(table)
    if defect > tol:
        raise NumericError(
            f"table rows violate normalization (max defect {defect:.3g})")
    return table


def normalization_defect(table: SplittingTable, n: Optional[int] = None) -> float:
    """Max over rows of |sum_d C(n,d) q(n-d,d) - 1|; a single row if n given."""
    rows = [n] if n is not None else range(1, table.max_n + 1)
    worst = 0.0
    for m in rows:
        if not (1 <= m <= table.max_n):
            raise ParameterError(f"row {m} outside table range")
        worst = max(worst, abs(math.fsum(table.first_block_weights(m)) - 1.0))
    return worst


def consistency_defect(table: SplittingTable, n: int, d: int) -> float:
    """Defect of the one-step deletion identity linking rows n and n + 1."""
    if not (1 <= d <= n):
        raise ParameterError(f"need 1 <= d <= n, got n={n}, d={d}")
    lhs = (1.0 - table.prob(n, 1)) * table.prob(n - d, d)
    rhs = table.prob(n - d, d + 1) + table.prob(n - d + 1, d)
    return abs(lhs - rhs)


def weak_continuity_defect(index: CharacteristicIndex, r: int, d: int) -> float:
    """Gap between the tied-failure hazard atom and the sum of the d singleton
    atoms obtained by splitting the tie; identically zero only for the
    harmonic family."""
    _check_rd(r, d)
    tied = (index.log_unit_block_rate(r + 1, d)
            - index.log_unit_block_rate(r, d))
    split = (index.log_unit_block_rate(r + d, 1)
             - index.log_unit_block_rate(r, 1))
    return tied - split


def difference_positivity_defect(index: CharacteristicIndex,
                                 n_check: int = 40) -> float:
    """Most negative signed difference over r + d <= n_check (0 when valid)."""
    worst = 0.0
    for n in range(1, n_check + 1):
        for d in range(1, n + 1):
            worst = min(worst, index.unit_block_rate(n - d, d))
    return worst


_FAMILY_NAMES = {
    HarmonicIndex: "harmonic",
    GammaIndex: "gamma",
    PowerIndex: "power",
    GeometricIndex: "geometric",
    LinearIndex: "linear",
    LinearShiftIndex: "linear-shift",
    BetaSplitIndex: "beta",
    MeasureIndex: "measure",
}


def index_from_spec(family: str, **params) -> CharacteristicIndex:
    """Build an index from a family name and named parameters."""
    table = {
        "harmonic": HarmonicIndex,
        "gamma": GammaIndex,
        "power": PowerIndex,
        "geometric": GeometricIndex,
        "linear": LinearIndex,
        "linear-shift": LinearShiftIndex,
        "beta": BetaSplitIndex,
        "measure": MeasureIndex,
    }
    if family not in table:
        raise ParameterError(f"unknown family {family!r}")
    return table[family](**params)
