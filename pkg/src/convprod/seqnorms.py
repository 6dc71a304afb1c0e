"""Variation and oscillation norms of finite sequences.

The variation norm is computed exactly by a quadratic dynamic program.
Repeated indices in a subsequence contribute zero differences, so it is
enough to range over strictly increasing subsequences: the best sum ending
at position ``i`` is ``S(i) = max_{j<i} S(j) + |x_i - x_j|^rho`` and the norm
is ``(max_i S(i))^(1/rho)``.

Indices are labels: ``start`` is the label of ``xs[0]``.  Variation norms
default to 0-based labels, block operations to 1-based labels (``n >= 1``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BlockOutOfRange, EmptySequence, RhoOutOfRange, TooLong

RHO_MAX = 64.0
BRUTEFORCE_MAX = 18


@dataclass(frozen=True)
class NormResult:
    """Value of a sequence norm plus the indices that attain it.

    For ``kind == "variation"`` the witness is the maximizing subsequence.
    For ``kind == "oscillation"`` it holds the per-block argmax labels and
    ``block_maxima`` the matching ``max |x_n - x_{n_k}|``.
    """

    kind: str
    exponent: float
    value: float
    witness: tuple[int, ...]
    block_maxima: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "exponent": self.exponent, "value": self.value,
             "witness": list(self.witness)}
        if self.kind == "oscillation":
            d["block_maxima"] = list(self.block_maxima)
        return d


@dataclass(frozen=True)
class BlockSpec:
    """Strictly increasing breakpoints ``n_1 < n_2 < ...``; block k is ``[n_k, n_{k+1})``."""

    breakpoints: tuple[int, ...]

    def __post_init__(self):
        bp = tuple(int(b) for b in self.breakpoints)
        if not bp:
            raise BlockOutOfRange("need at least one breakpoint")
        if bp[0] < 1 or any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise BlockOutOfRange(f"breakpoints must be positive and strictly increasing: {bp}")
        object.__setattr__(self, "breakpoints", bp)

    @classmethod
    def powers(cls, k_max: int, base: int = 4) -> "BlockSpec":
        """Breakpoints ``1, base, base^2, ..., base^k_max``."""
        return cls(tuple(base**k for k in range(k_max + 1)))

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "BlockSpec":
        """``"4^k"`` (powers of 4 up to ``n``) or a comma-separated list."""
        text = text.strip()
        if "^" in text:
            base = int(text.split("^")[0])
            if n is None:
                raise BlockOutOfRange("power blocks need the sequence length")
            k = 0
            while base ** (k + 1) <= n:
                k += 1
            return cls.powers(k, base)
        return cls(tuple(int(v) for v in text.split(",") if v.strip()))

    def pairs(self):
        return list(zip(self.breakpoints, self.breakpoints[1:]))


def _check(xs, rho):
    x = np.asarray(xs)
    if x.ndim != 1 and x.size:
        x = x.ravel()
    if x.size == 0:
        raise EmptySequence("sequence is empty")
    if not 1 <= rho <= RHO_MAX:
        raise RhoOutOfRange(f"rho must lie in [1, {RHO_MAX}], got {rho}")
    return x


def variation_norm(xs: Sequence[float], rho: float, start: int = 0) -> NormResult:
    """Exact variation rho-norm with a maximizing subsequence.

    Ties are broken toward the smallest index.

    >>> variation_norm([0, 1, 0, 1], 2).witness
    (0, 1, 2, 3)
    """
    x = _check(xs, rho)
    n = x.size
    best = np.zeros(n)
    back = np.full(n, -1)
    for i in range(1, n):
        cand = best[:i] + np.abs(x[i] - x[:i]) ** rho
        j = int(np.argmax(cand))
        best[i] = cand[j]
        back[i] = j
    end = int(np.argmax(best))
    path = [end]
    while back[path[-1]] >= 0 and best[path[-1]] > 0:
        path.append(int(back[path[-1]]))
    path.reverse()
    return NormResult("variation", float(rho), float(best[end] ** (1.0 / rho)),
                      tuple(p + start for p in path))


def variation_profile(X: np.ndarray, rho: float) -> np.ndarray:
    """Running variation sums along axis 0, vectorized over the other axes.

    ``out[i]`` is ``max_{i' <= i} S(i')`` for the prefix ``X[:i+1]``, i.e. the
    rho-th power of the variation norm of that prefix.
    """
    X = np.asarray(X)
    if X.shape[0] == 0:
        raise EmptySequence("sequence is empty")
    if not 1 <= rho <= RHO_MAX:
        raise RhoOutOfRange(f"rho must lie in [1, {RHO_MAX}], got {rho}")
    S = np.zeros(X.shape, dtype=np.float64)
    for i in range(1, X.shape[0]):
        S[i] = np.max(S[:i] + np.abs(X[i] - X[:i]) ** rho, axis=0)
    return np.maximum.accumulate(S, axis=0)


def variation_values(X: np.ndarray, rho: float) -> np.ndarray:
    return variation_profile(X, rho)[-1] ** (1.0 / rho)


def variation_norm_bruteforce(xs: Sequence[float], rho: float, start: int = 0) -> NormResult:
    """Variation norm by enumerating every subsequence (test oracle, ``N <= 18``)."""
    x = _check(xs, rho)
    n = x.size
    if n > BRUTEFORCE_MAX:
        raise TooLong(f"brute force limited to {BRUTEFORCE_MAX} terms, got {n}")
    masks = np.array(list(itertools.product((False, True), repeat=n)), dtype=bool).reshape(-1, n)
    total = np.zeros(masks.shape[0])
    last = np.zeros(masks.shape[0], dtype=x.dtype)
    seen = np.zeros(masks.shape[0], dtype=bool)
    for i in range(n):
        sel = masks[:, i]
        total += np.where(sel & seen, np.abs(x[i] - last) ** rho, 0.0)
        last = np.where(sel, x[i], last)
        seen |= sel
    best = int(np.argmax(total))
    witness = tuple(int(i) + start for i in np.flatnonzero(masks[best]))
    return NormResult("variation", float(rho), float(total[best] ** (1.0 / rho)), witness)


def _slice(x, start, lo, hi, what):
    a, b = lo - start, hi - start
    if a < 0 or b > x.shape[0]:
        raise BlockOutOfRange(f"{what} [{lo}, {hi}) not covered by indices "
                              f"[{start}, {start + x.shape[0]})")
    return x[a:b]


def block_variation(xs: Sequence[float], blocks: BlockSpec, rho: float,
                    start: int = 1) -> list[NormResult]:
    """Variation norm on each half-open block ``n_k <= n < n_{k+1}``."""
    x = _check(xs, rho)
    return [variation_norm(_slice(x, start, lo, hi, "block"), rho, start=lo)
            for lo, hi in blocks.pairs()]


def block_variation_values(X: np.ndarray, blocks: BlockSpec, rho: float,
                           start: int = 1) -> np.ndarray:
    """Batch form of :func:`block_variation`; returns shape ``(n_blocks, ...)``."""
    X = np.asarray(X)
    return np.stack([variation_values(_slice(X, start, lo, hi, "block"), rho)
                     for lo, hi in blocks.pairs()])


def oscillation_norm(xs: Sequence[float], blocks: BlockSpec, s: float, start: int = 1,
                     tail: bool = False) -> NormResult:
    """``(sum_k max_{n_k <= n <= n_{k+1}} |x_n - x_{n_k}|^s)^(1/s)``.

    Block maxima run over the closed range.  With ``tail=True`` the last
    breakpoint opens one more block reaching the end of the sequence.
    """
    x = _check(xs, s)
    maxima, witness = [], []
    for lo, hi in _closed_pairs(blocks, start, x.shape[0], tail):
        seg = np.abs(_slice(x, start, lo, hi + 1, "closed block") - x[lo - start])
        i = int(np.argmax(seg))
        maxima.append(float(seg[i]))
        witness.append(lo + i)
    value = math.fsum(m**s for m in maxima) ** (1.0 / s)
    return NormResult("oscillation", float(s), value, tuple(witness), tuple(maxima))


def oscillation_values(X: np.ndarray, blocks: BlockSpec, start: int = 1,
                       tail: bool = False) -> np.ndarray:
    """Per-block closed maxima ``max |X_n - X_{n_k}|``, shape ``(n_blocks, ...)``."""
    X = np.asarray(X)
    out = []
    for lo, hi in _closed_pairs(blocks, start, X.shape[0], tail):
        seg = _slice(X, start, lo, hi + 1, "closed block")
        out.append(np.max(np.abs(seg - seg[0]), axis=0))
    return np.stack(out)


def _closed_pairs(blocks, start, n, tail):
    pairs = blocks.pairs()
    last = start + n - 1
    if tail and blocks.breakpoints[-1] < last:
        pairs.append((blocks.breakpoints[-1], last))
    if not pairs:
        raise BlockOutOfRange("oscillation needs at least one block")
    return pairs


def two_norm(xs: Sequence[float]) -> float:
    """Euclidean norm with exactly rounded summation (order independent)."""
    x = np.abs(np.asarray(xs, dtype=complex if np.iscomplexobj(xs) else float)).ravel()
    return math.sqrt(math.fsum(x * x))
