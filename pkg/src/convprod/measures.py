"""Finitely supported probability measures on the integers.

Measures are stored densely over their support interval ``[offset, offset + L)``.
All values are immutable once built, so they can be shared between threads.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    DuplicatePoint,
    EmptySupport,
    FamilyExhausted,
    MassDeviation,
    NegativeMass,
    ParameterOutOfRange,
)

MASS_TOL = 1e-9
TRIM_TOL = 1e-15
# direct convolution while La * Lb stays below this
FFT_CROSSOVER = 2**16


@dataclass(frozen=True, eq=False)
class LatticeMeasure:
    """Probability measure on Z with mass ``weights[i]`` at ``offset + i``."""

    offset: int
    weights: np.ndarray
    mass_tol: float = MASS_TOL

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise EmptySupport("a measure needs at least one support point")
        if not np.all(np.isfinite(w)):
            raise NegativeMass("weights must be finite")
        if np.any(w < 0):
            raise NegativeMass(f"negative mass {w.min()!r}")
        if abs(w.sum() - 1.0) > self.mass_tol:
            raise MassDeviation(f"total mass {w.sum()!r} differs from 1 by more than {self.mass_tol}")
        if w[0] <= 0 or w[-1] <= 0:
            raise ValueError("weights must be trimmed (non-zero at both ends)")
        w.setflags(write=False)
        object.__setattr__(self, "offset", int(self.offset))
        object.__setattr__(self, "weights", w)

    @property
    def width(self) -> int:
        return self.weights.size

    @property
    def support(self) -> np.ndarray:
        """Integer points of the support interval (including interior zeros)."""
        return np.arange(self.offset, self.offset + self.width, dtype=np.int64)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def __call__(self, k: int) -> float:
        i = k - self.offset
        if 0 <= i < self.width:
            return float(self.weights[i])
        return 0.0

    def points(self) -> list[tuple[int, float]]:
        """Non-zero ``(k, mass)`` pairs in increasing ``k``."""
        return [(self.offset + i, float(w)) for i, w in enumerate(self.weights) if w > 0]

    def __eq__(self, other):
        if not isinstance(other, LatticeMeasure):
            return NotImplemented
        return self.offset == other.offset and np.array_equal(self.weights, other.weights)

    __hash__ = None

    def allclose(self, other: "LatticeMeasure", atol: float = 1e-12) -> bool:
        lo = min(self.offset, other.offset)
        hi = max(self.offset + self.width, other.offset + other.width)
        return bool(np.allclose(_dense(self, lo, hi), _dense(other, lo, hi), rtol=0, atol=atol))

    def __repr__(self):
        return f"LatticeMeasure(offset={self.offset}, width={self.width})"


def _dense(mu: LatticeMeasure, lo: int, hi: int) -> np.ndarray:
    out = np.zeros(hi - lo)
    out[mu.offset - lo : mu.offset - lo + mu.width] = mu.weights
    return out


def _canonical(offset: int, w: np.ndarray, mass_tol: float = MASS_TOL,
               trim: float = TRIM_TOL) -> LatticeMeasure:
    """Trim edge weights below ``trim`` (exact zeros when ``trim == 0``) and
    renormalize if anything was cut."""
    w = np.where(w < 0, 0.0, w)  # FFT round-off only; real negatives are rejected upstream
    above = np.flatnonzero(w >= trim if trim > 0 else w > 0)
    if above.size == 0:
        raise EmptySupport("all mass below trimming threshold")
    lo, hi = above[0], above[-1] + 1
    if lo > 0 or hi < w.size:
        total = w.sum()
        w = w[lo:hi]
        w = w * (total / w.sum())
    return LatticeMeasure(offset + int(lo), w, mass_tol)


def new_measure(points: Iterable[tuple[int, float]], mass_tol: float = MASS_TOL) -> LatticeMeasure:
    """Build a measure from ``(k, mass)`` pairs.

    >>> new_measure([(-1, 0.25), (0, 0.5), (1, 0.25)]).weights
    array([0.25, 0.5 , 0.25])
    """
    pts = [(int(k), float(m)) for k, m in points]
    if not pts:
        raise EmptySupport("no support points given")
    ks = [k for k, _ in pts]
    if len(set(ks)) != len(ks):
        raise DuplicatePoint("duplicate support point")
    for k, m in pts:
        if not m >= 0:
            raise NegativeMass(f"mass {m!r} at {k}")
    total = sum(m for _, m in pts)
    if abs(total - 1.0) > mass_tol:
        raise MassDeviation(f"total mass {total!r} differs from 1 by more than {mass_tol}")
    positive = [(k, m) for k, m in pts if m > 0]
    lo = min(k for k, _ in positive)
    hi = max(k for k, _ in positive)
    w = np.zeros(hi - lo + 1)
    for k, m in positive:
        w[k - lo] = m
    return LatticeMeasure(lo, w, mass_tol)


def point_mass(k: int = 0) -> LatticeMeasure:
    return LatticeMeasure(k, np.ones(1))


def lazy_walk(p: float = 0.5) -> LatticeMeasure:
    """Mass ``p`` at 0 and ``(1 - p) / 2`` at each of -1 and 1."""
    if not 0 <= p <= 1:
        raise ParameterOutOfRange(f"lazy-walk holding probability {p} outside [0, 1]")
    if p == 1:
        return point_mass(0)
    q = (1.0 - p) / 2.0
    return LatticeMeasure(-1, np.array([q, p, q]))


def convolve_direct(a: LatticeMeasure, b: LatticeMeasure) -> LatticeMeasure:
    # no round-off noise on this path: keep the full tail, drop only underflowed zeros
    return _canonical(a.offset + b.offset, np.convolve(a.weights, b.weights), _tol(a, b), trim=0.0)


def convolve_fft(a: LatticeMeasure, b: LatticeMeasure) -> LatticeMeasure:
    n = a.width + b.width - 1
    size = 1 << max(0, (n - 1).bit_length())
    w = np.fft.irfft(np.fft.rfft(a.weights, size) * np.fft.rfft(b.weights, size), size)[:n]
    return _canonical(a.offset + b.offset, w, _tol(a, b))


def _tol(a, b):
    return a.mass_tol + b.mass_tol


def convolve(a: LatticeMeasure, b: LatticeMeasure) -> LatticeMeasure:
    """Convolution ``(a * b)(k) = sum_j a(j) b(k - j)``.

    Direct summation for small products of widths, FFT above ``FFT_CROSSOVER``.
    Only the FFT path trims edge weights below ``TRIM_TOL``.
    """
    if a.width * b.width <= FFT_CROSSOVER:
        return convolve_direct(a, b)
    return convolve_fft(a, b)


def convolve_all(measures: Sequence[LatticeMeasure]) -> LatticeMeasure:
    return reduce(convolve, measures)


def reflect(mu: LatticeMeasure) -> LatticeMeasure:
    """``k -> mu(-k)``."""
    return LatticeMeasure(-(mu.offset + mu.width - 1), mu.weights[::-1].copy(), mu.mass_tol)


def symmetrize(mu: LatticeMeasure) -> LatticeMeasure:
    """``mu * reflect(mu)``, made exactly symmetric."""
    lam = convolve(mu, reflect(mu))
    w = 0.5 * (lam.weights + lam.weights[::-1])
    return LatticeMeasure(lam.offset, w, lam.mass_tol)


def moment(mu: LatticeMeasure, p: float) -> float:
    """``sum_k |k|^p mu(k)``."""
    if p <= 0:
        raise ParameterOutOfRange("moment order must be positive")
    k = np.abs(mu.support).astype(np.float64)
    return float(np.dot(k**p, mu.weights))


def expectation(mu: LatticeMeasure) -> float:
    return float(np.dot(mu.support.astype(np.float64), mu.weights))


def is_strictly_aperiodic(mu: LatticeMeasure) -> bool:
    """True iff the support is in no coset ``beta Z + alpha`` with ``beta >= 2``.

    On Z this is the condition that the support differences have gcd 1.
    A single point lies in a coset of every subgroup, so it is never aperiodic.
    """
    idx = np.flatnonzero(mu.weights > 0)
    return math.gcd(*(int(d) for d in idx - idx[0])) == 1


def coset_mass(mu: LatticeMeasure, beta: int, alpha: int) -> float:
    """``mu(beta Z + alpha)``."""
    k = mu.support
    return float(mu.weights[(k - alpha) % beta == 0].sum())


def coset_concentration(mu: LatticeMeasure, beta_max: int = 64) -> tuple[float, int, int]:
    """Largest mass carried by a coset ``beta Z + alpha``, ``2 <= beta <= beta_max``.

    Returns ``(mass, beta, alpha)``; ties go to the smallest beta, then alpha.
    """
    if beta_max < 2:
        raise ParameterOutOfRange("beta_max must be at least 2")
    best = (-1.0, 0, 0)
    k = mu.support
    for beta in range(2, beta_max + 1):
        masses = np.bincount(k % beta, weights=mu.weights, minlength=beta)
        alpha = int(np.argmax(masses))
        if masses[alpha] > best[0]:
            best = (float(masses[alpha]), beta, alpha)
    return best


# ---------------------------------------------------------------------------
# families


class MeasureFamily:
    """A sequence ``nu_1, nu_2, ...`` with cached prefix products.

    ``factor(i)`` returns ``nu_i`` (1-based).  ``length`` is ``None`` for an
    unbounded family.  ``descriptor`` is the JSON-able family spec.
    """

    def __init__(self, factor: Callable[[int], LatticeMeasure], descriptor: dict,
                 length: int | None = None):
        self._factor = factor
        self.descriptor = descriptor
        self.length = length
        self._nu: dict[int, LatticeMeasure] = {}
        self._prefix: dict[int, LatticeMeasure] = {}
        self._lock = threading.Lock()

    @property
    def name(self) -> str:
        return self.descriptor["family"]

    def nu(self, i: int) -> LatticeMeasure:
        if i < 1:
            raise ValueError("family index starts at 1")
        if self.length is not None and i > self.length:
            raise FamilyExhausted(f"family has {self.length} factors, asked for {i}")
        with self._lock:
            if i not in self._nu:
                self._nu[i] = self._factor(i)
            return self._nu[i]

    def factors(self, n: int) -> list[LatticeMeasure]:
        return [self.nu(i) for i in range(1, n + 1)]

    def prefix(self, n: int) -> LatticeMeasure:
        """``mu_n = nu_1 * ... * nu_n``."""
        if n < 1:
            raise ValueError("prefix products start at n = 1")
        if self.length is not None and n > self.length:
            raise FamilyExhausted(f"family has {self.length} factors, asked for {n}")
        with self._lock:
            if n in self._prefix:
                return self._prefix[n]
            start = max((m for m in self._prefix if m < n), default=0)
        mu = self._prefix[start] if start else None
        for i in range(start + 1, n + 1):
            nu = self.nu(i)
            mu = nu if mu is None else convolve(mu, nu)
            with self._lock:
                mu = self._prefix.setdefault(i, mu)
        return mu

    def prefixes(self, n: int) -> list[LatticeMeasure]:
        self.prefix(n)
        return [self._prefix[i] for i in range(1, n + 1)]

    def __repr__(self):
        return f"MeasureFamily({self.descriptor!r})"


def prefix_product(fam: MeasureFamily, n: int) -> LatticeMeasure:
    return fam.prefix(n)


def lazy_walk_family(p: float = 0.5) -> MeasureFamily:
    nu = lazy_walk(p)
    return MeasureFamily(lambda i: nu, {"family": "lazy-walk", "params": {"p": p}})


def explicit_family(measures: Sequence[LatticeMeasure]) -> MeasureFamily:
    measures = list(measures)
    desc = {"family": "explicit", "params": {"measures": [m.points() for m in measures]}}
    return MeasureFamily(lambda i: measures[i - 1], desc, length=len(measures))


class ASequence:
    """Parameter sequence ``a_1, a_2, ...`` for the holding family.

    Accepted specs:

    * a number -- constant sequence
    * a list of numbers -- finite explicit sequence
    * ``{"kind": "complement-power", "q": q}`` -- ``a_n = 1 - (n + 1)^-q`` (tends to 1)
    * ``{"kind": "power", "scale": c, "q": q}`` -- ``a_n = c (n + 1)^-q`` (tends to 0)
    """

    def __init__(self, spec=None):
        if spec is None:
            spec = {"kind": "complement-power", "q": 2}
        self.spec = spec
        self.length = None
        if isinstance(spec, (int, float)):
            self._f = lambda n: float(spec)
        elif isinstance(spec, (list, tuple)):
            vals = [float(v) for v in spec]
            self.length = len(vals)
            self._f = lambda n: vals[n - 1]
        elif isinstance(spec, dict):
            kind = spec.get("kind")
            q = float(spec.get("q", 2))
            if kind == "complement-power":
                self._f = lambda n: 1.0 - (n + 1.0) ** (-q)
            elif kind == "power":
                c = float(spec.get("scale", 1.0))
                self._f = lambda n: c * (n + 1.0) ** (-q)
            else:
                raise ParameterOutOfRange(f"unknown a-sequence kind {kind!r}")
        else:
            raise ParameterOutOfRange(f"cannot interpret a-sequence spec {spec!r}")
        if self.length is not None:
            for n in range(1, self.length + 1):
                self(n)
        elif isinstance(spec, (int, float)):
            self(1)

    def __call__(self, n: int) -> float:
        if self.length is not None and n > self.length:
            raise FamilyExhausted(f"a-sequence has {self.length} terms, asked for {n}")
        a = self._f(n)
        if not 0 < a < 1:
            raise ParameterOutOfRange(f"a_{n} = {a!r} outside (0, 1)")
        return a

    def values(self, n: int) -> np.ndarray:
        return np.array([self(i) for i in range(1, n + 1)])

    def product(self, n: int) -> float:
        """``a_1 * ... * a_n``."""
        return float(np.prod(self.values(n)))


def holding_measure(a: float) -> LatticeMeasure:
    """Mass ``a`` at 0 and ``(1 - a) / 2`` at each of -1 and 1."""
    if not 0 < a < 1:
        raise ParameterOutOfRange(f"holding parameter {a!r} outside (0, 1)")
    q = (1.0 - a) / 2.0
    return LatticeMeasure(-1, np.array([q, a, q]))


def holding_family(a=None) -> MeasureFamily:
    """Family ``nu_n = (1 - a_n)/2 (delta_-1 + delta_1) + a_n delta_0``.

    The ``a_sequence`` attribute exposes ``a_n`` and the running product.
    """
    seq = a if isinstance(a, ASequence) else ASequence(a)
    fam = MeasureFamily(lambda i: holding_measure(seq(i)),
                        {"family": "remark19", "params": {"a": seq.spec}}, length=seq.length)
    fam.a_sequence = seq
    return fam


def family_from_spec(spec: dict) -> MeasureFamily:
    """Build a family from ``{"family": ..., "params": {...}}``."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise ParameterOutOfRange("family spec must be an object with a 'family' key")
    name = spec["family"]
    params = spec.get("params", {}) or {}
    if name == "lazy-walk":
        return lazy_walk_family(float(params.get("p", 0.5)))
    if name in ("remark19", "holding"):
        return holding_family(params.get("a"))
    if name == "explicit":
        raw = params.get("measures")
        if not raw:
            raise ParameterOutOfRange("explicit family needs a non-empty 'measures' list")
        return explicit_family([new_measure(m) for m in raw])
    raise ParameterOutOfRange(f"unknown family {name!r}")
