"""Characteristic functions on a uniform grid of the torus [-1/2, 1/2).

Sign convention: ``mu_hat(t) = sum_k mu(k) exp(-2 pi i k t)``, so that the
reflected measure has transform ``mu_hat(-t)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonCenteredFamily, ParameterOutOfRange
from .measures import LatticeMeasure, MeasureFamily, expectation, moment

# direct evaluation while width * grid size stays below this
DIRECT_LIMIT = 2**20
# |nu_hat| at or above 1 - UNIT_TOL counts as no decay
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class TorusGrid:
    size: int

    def __post_init__(self):
        m = self.size
        if m < 8 or m & (m - 1):
            raise ParameterOutOfRange(f"grid size must be a power of two >= 8, got {m}")

    @property
    def nodes(self) -> np.ndarray:
        return -0.5 + np.arange(self.size) / self.size

    @property
    def zero_index(self) -> int:
        return self.size // 2

    def mirror(self) -> np.ndarray:
        """Index of the node at ``-t`` (mod 1) for every node."""
        return (-np.arange(self.size)) % self.size


@dataclass(frozen=True)
class SpectralSamples:
    grid: TorusGrid
    values: np.ndarray

    def __sub__(self, other):
        return SpectralSamples(self.grid, self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, SpectralSamples):
            return SpectralSamples(self.grid, self.values * other.values)
        return SpectralSamples(self.grid, self.values * other)

    @property
    def abs(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True)
class DecayCertificate:
    """Grid-sampled certificate for ``|nu_hat(t)| <= exp(-C t^2)``.

    ``best_C`` is the grid infimum of ``-log|nu_hat(t)| / t^2``; the bound holds
    on the grid with any ``C <= best_C``.  ``N_0`` is only meaningful for
    family certificates.
    """

    best_C: float
    holds: bool
    worst_node: float
    N_0: int = 0
    grid_size: int = 0

    def to_dict(self) -> dict:
        return {"best_C": self.best_C, "holds": self.holds, "worst_node": self.worst_node,
                "N_0": self.N_0, "grid_size": self.grid_size, "sampling": "grid"}


def char_fun_direct(mu: LatticeMeasure, grid: TorusGrid) -> SpectralSamples:
    k = mu.support.astype(np.float64)
    phase = np.exp(-2j * np.pi * np.outer(grid.nodes, k))
    return SpectralSamples(grid, phase @ mu.weights)


def char_fun_fft(mu: LatticeMeasure, grid: TorusGrid) -> SpectralSamples:
    # exp(-2 pi i k (-1/2 + m/M)) = (-1)^k exp(-2 pi i k m / M)
    m = grid.size
    k = mu.support
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    a = np.bincount(k % m, weights=sign * mu.weights, minlength=m)
    return SpectralSamples(grid, np.fft.fft(a))


def char_fun(mu: LatticeMeasure, grid: TorusGrid) -> SpectralSamples:
    if mu.width * grid.size <= DIRECT_LIMIT:
        return char_fun_direct(mu, grid)
    return char_fun_fft(mu, grid)


def product_identity_residual(fam: MeasureFamily, n: int, grid: TorusGrid) -> float:
    """``max |mu_n_hat - prod_i nu_i_hat|`` over the grid."""
    if n == 1:
        fam.nu(1)
        return 0.0
    direct = char_fun(fam.prefix(n), grid).values
    prod = np.ones(grid.size, dtype=complex)
    for nu in fam.factors(n):
        prod = prod * char_fun(nu, grid).values
    return float(np.max(np.abs(direct - prod)))


def gaussian_decay(nu: LatticeMeasure, grid: TorusGrid) -> DecayCertificate:
    """Largest ``C`` with ``|nu_hat(t)| <= exp(-C t^2)`` at every grid node.

    Nodes where the transform vanishes impose no constraint and are skipped.
    """
    t = grid.nodes
    mag = char_fun(nu, grid).abs
    keep = (t != 0) & (mag > 0)
    t, mag = t[keep], mag[keep]
    if t.size == 0:
        return DecayCertificate(float("inf"), True, 0.0, 0, grid.size)
    logs = np.where(mag >= 1 - UNIT_TOL, 0.0, -np.log(np.minimum(mag, 1.0)))
    ratio = logs / t**2
    i = int(np.argmin(ratio))
    best = float(ratio[i])
    return DecayCertificate(best, best > 0, float(t[i]), 0, grid.size)


def certify_family(fam: MeasureFamily, n_max: int, grid: TorusGrid) -> DecayCertificate:
    """Certify the decay bound for ``nu_i``, ``N_0 < i <= n_max``.

    ``N_0`` is the last index in range whose certificate fails (0 if none).
    The reported constant is the minimum over the certified tail.
    """
    certs = [gaussian_decay(fam.nu(i), grid) for i in range(1, n_max + 1)]
    failed = [i for i, c in enumerate(certs, start=1) if not c.holds]
    n0 = failed[-1] if failed else 0
    tail = certs[n0:]
    if not tail:
        return DecayCertificate(0.0, False, 0.0, n0, grid.size)
    worst = min(tail, key=lambda c: c.best_C)
    return DecayCertificate(worst.best_C, True, worst.worst_node, n0, grid.size)


def second_moment_bound_ratio(fam: MeasureFamily, n: int, grid: TorusGrid,
                              c: float = 2 * np.pi**2, nodes: np.ndarray | None = None) -> float:
    """``max_t |1 - mu_n_hat(t)| / (c t^2 sum_{i<=n} m_2(nu_i))`` over non-zero nodes.

    With ``c = 2 pi^2`` the ratio is at most 1 for centered families.
    ``nodes`` optionally restricts the maximum to a subset of grid indices.
    """
    if c <= 0:
        raise ParameterOutOfRange("c must be positive")
    factors = fam.factors(n)
    for i, nu in enumerate(factors, start=1):
        if abs(expectation(nu)) > 1e-12:
            raise NonCenteredFamily(f"E(nu_{i}) = {expectation(nu)!r}")
    m2 = sum(moment(nu, 2) for nu in factors)
    t = grid.nodes
    gap = np.abs(1.0 - char_fun(fam.prefix(n), grid).values)
    idx = np.flatnonzero(t != 0) if nodes is None else np.asarray(nodes)
    if m2 == 0:
        return 0.0 if np.all(gap[idx] == 0) else float("inf")
    return float(np.max(gap[idx] / (c * t[idx] ** 2 * m2)))
