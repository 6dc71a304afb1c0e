"""Dyadic frequency shells and the block kernels ``K_n = mu_n - mu_{4^(k-1)}``.

Shell ``E_j = [-2^-j, -2^-(j+1)) U [2^-(j+1), 2^-j)`` for ``j >= 0``; its
indicator is extended one-periodically by reducing ``t`` to ``[-1/2, 1/2)``.
After that reduction ``E_0`` contains no point, and shells with ``j < 0``
are empty by definition, so only ``j >= 1`` ever contributes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterOutOfRange, RangeViolation
from .measures import MeasureFamily, moment
from .spectral import SpectralSamples, TorusGrid, char_fun

# n-sample size drawn from the block interior in addition to the endpoints
INTERIOR_SAMPLES = 5


def reduce_torus(t):
    """Map ``t`` to its representative in ``[-1/2, 1/2)``."""
    t = np.asarray(t, dtype=np.float64)
    return t - np.floor(t + 0.5)


def in_shell(j: int, t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if j < 0:
        return np.zeros(t.shape, dtype=bool)
    hi, lo = 2.0**-j, 2.0 ** -(j + 1)
    return ((t >= -hi) & (t < -lo)) | ((t >= lo) & (t < hi))


def chi(j: int, t):
    """One-periodic indicator of ``E_j`` (0 for every ``t`` when ``j < 0``)."""
    out = in_shell(j, reduce_torus(t)).astype(int)
    return int(out) if out.ndim == 0 else out


def shell_mask(j: int, grid: TorusGrid) -> np.ndarray:
    return in_shell(j, grid.nodes)


def max_shell(grid: TorusGrid) -> int:
    """Largest shell index that meets a non-zero node of ``grid``."""
    return int(math.log2(grid.size))


class _Spectra:
    """Memoized ``mu_n_hat`` on a fixed grid for one family."""

    def __init__(self, fam: MeasureFamily, grid: TorusGrid):
        self.fam, self.grid = fam, grid
        self._mu = {}
        self._nu = {}

    def mu(self, n):
        if n not in self._mu:
            self._mu[n] = char_fun(self.fam.prefix(n), self.grid).values
        return self._mu[n]

    def nu(self, n):
        if n not in self._nu:
            self._nu[n] = char_fun(self.fam.nu(n), self.grid).values
        return self._nu[n]


_cache: dict = {}


def _spectra(fam, grid) -> _Spectra:
    key = (id(fam), grid.size)
    sp = _cache.get(key)
    if sp is None or sp.fam is not fam:
        sp = _cache[key] = _Spectra(fam, grid)
    return sp


def _check_block(k, n):
    if k < 1:
        raise RangeViolation(f"k must be positive, got {k}")
    if not 4 ** (k - 1) <= n < 4**k:
        raise RangeViolation(f"n = {n} outside [4^{k - 1}, 4^{k})")


def k_kernel(fam: MeasureFamily, k: int, n: int, grid: TorusGrid) -> SpectralSamples:
    """``K_n_hat = mu_n_hat - mu_{4^(k-1)}_hat`` for ``4^(k-1) <= n < 4^k``."""
    _check_block(k, n)
    sp = _spectra(fam, grid)
    return SpectralSamples(grid, sp.mu(n) - sp.mu(4 ** (k - 1)))


@dataclass(frozen=True)
class BlockKernel:
    j: int
    k: int
    n: int
    hatK_n: SpectralSamples
    hatK_jn: SpectralSamples
    mask: np.ndarray


def k_block(fam: MeasureFamily, j: int, k: int, n: int, grid: TorusGrid) -> BlockKernel:
    """Frequency-localized piece ``K_jn_hat = K_n_hat * chi_{j+k}``."""
    full = k_kernel(fam, k, n, grid)
    mask = shell_mask(j + k, grid)
    return BlockKernel(j, k, n, full, SpectralSamples(grid, np.where(mask, full.values, 0)), mask)


def block_samples(k: int, full_sweep: bool = False, seed: int = 0) -> list[int]:
    """Values of n examined in block k: endpoints, midpoint and seeded interior draws."""
    lo, hi = 4 ** (k - 1), 4**k - 1
    if full_sweep or hi - lo + 1 <= 3 + INTERIOR_SAMPLES:
        return list(range(lo, hi + 1))
    picks = {lo, (lo + hi) // 2, hi}
    rng = np.random.default_rng([seed, k])
    interior = [n for n in range(lo + 1, hi) if n not in picks]
    picks.update(int(n) for n in rng.choice(interior, INTERIOR_SAMPLES, replace=False))
    return sorted(picks)


def shell_amplitude_constant(fam: MeasureFamily, j: int, k: int, grid: TorusGrid,
                             full_sweep: bool = False, seed: int = 0,
                             samples: list[int] | None = None) -> float:
    """Empirical ``max_n max_t |K_jn_hat(t)| * 4^|j|`` over the sampled n."""
    if j + k < 1:
        return 0.0
    ns = samples if samples is not None else block_samples(k, full_sweep, seed)
    mask = shell_mask(j + k, grid)
    if not mask.any():
        return 0.0
    best = 0.0
    for n in ns:
        best = max(best, float(np.max(np.abs(k_kernel(fam, k, n, grid).values[mask]))))
    return best * 4.0 ** abs(j)


@dataclass(frozen=True)
class ShellIncrement:
    value: float
    degenerate: bool


def shell_increment_constant(fam: MeasureFamily, j: int, k: int, n: int,
                             grid: TorusGrid) -> ShellIncrement:
    """Empirical ``max_t |K_jn_hat - K_j(n+1)_hat| * 4^k / m_2(nu_{n+1})``.

    When ``m_2(nu_{n+1}) = 0`` the increment vanishes identically; the result
    is then 0 and flagged ``degenerate``.
    """
    if n + 1 >= 4**k:
        raise RangeViolation(f"n + 1 = {n + 1} must stay below 4^{k}")
    diff = k_block(fam, j, k, n, grid).hatK_jn.values - k_block(fam, j, k, n + 1, grid).hatK_jn.values
    m2 = moment(fam.nu(n + 1), 2)
    if m2 == 0:
        return ShellIncrement(0.0, True)
    return ShellIncrement(float(np.max(np.abs(diff))) * 4.0**k / m2, False)


def increment_identity_residual(fam: MeasureFamily, j: int, k: int, n: int, grid: TorusGrid) -> float:
    """``max |(K_jn_hat - K_j(n+1)_hat) - mu_n_hat (1 - nu_{n+1}_hat) chi_{j+k}|``."""
    sp = _spectra(fam, grid)
    lhs = k_block(fam, j, k, n, grid).hatK_jn.values - k_block(fam, j, k, n + 1, grid).hatK_jn.values
    rhs = sp.mu(n) * (1.0 - sp.nu(n + 1)) * shell_mask(j + k, grid)
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class CoarseningScheme:
    """``N = 3 min(4^(k-1), 4^|j|)`` equally spaced integers starting at ``4^(k-1)``."""

    j: int
    k: int
    N: int
    alphas: tuple[int, ...]

    def anchor(self, n: int) -> int:
        """``alpha_m`` with ``alpha_m <= n < alpha_{m+1}`` (the last one for the tail)."""
        if not self.alphas[0] <= n < 4**self.k:
            raise RangeViolation(f"n = {n} outside the block of level {self.k}")
        i = int(np.searchsorted(self.alphas, n, side="right")) - 1
        return self.alphas[i]

    @property
    def saturated(self) -> bool:
        return self.N == 3 * 4 ** (self.k - 1)


def coarsening(j: int, k: int) -> CoarseningScheme:
    if k < 1:
        raise ParameterOutOfRange("k must be positive")
    lo = 4 ** (k - 1)
    n_pts = 3 * min(lo, 4 ** abs(j))
    step = 3 * lo / n_pts
    alphas = sorted({lo + int(round(m * step)) for m in range(n_pts)})
    return CoarseningScheme(j, k, n_pts, tuple(alphas))


def coarse_block(fam: MeasureFamily, scheme: CoarseningScheme, n: int, grid: TorusGrid) -> BlockKernel:
    """The coarsened kernel ``A_n = K_{j, alpha_m}`` for ``alpha_m <= n < alpha_{m+1}``."""
    return k_block(fam, scheme.j, scheme.k, scheme.anchor(n), grid)
