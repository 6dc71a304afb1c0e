"""Empirical checks of the operator inequalities on the cyclic shift system.

The measure-preserving system is ``Z_M`` with the shift ``x -> x + 1`` and
counting measure.  Averages ``(mu f)(x) = sum_j mu(j) f(x + j mod M)`` are
circular correlations, evaluated through the FFT.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .dyadic import coarsening, k_kernel, shell_mask
from .errors import ConfigError, PreconditionFailed, SizeMismatch
from .measures import (
    ASequence,
    LatticeMeasure,
    MeasureFamily,
    coset_concentration,
    coset_mass,
    expectation,
    family_from_spec,
    holding_family,
    is_strictly_aperiodic,
    moment,
    symmetrize,
)
from .seqnorms import (
    BlockSpec,
    oscillation_values,
    two_norm,
    variation_profile,
    variation_values,
)
from .spectral import TorusGrid, certify_family, char_fun, gaussian_decay


@dataclass(frozen=True)
class CyclicField:
    """A function on ``Z_M``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.size == 0:
            raise SizeMismatch("a field is a non-empty vector")
        if not np.all(np.isfinite(v)):
            raise ValueError("field entries must be finite")
        object.__setattr__(self, "values", v)

    @property
    def M(self) -> int:
        return self.values.size

    def norm(self) -> float:
        return two_norm(self.values)

    def shift(self, by: int = 1) -> "CyclicField":
        """``x -> f(x + by)``."""
        return CyclicField(np.roll(self.values, -by))


def wrap(mu: LatticeMeasure, M: int) -> np.ndarray:
    """Fold the measure onto ``Z_M``."""
    return np.bincount(mu.support % M, weights=mu.weights, minlength=M)


def multiplier(mu: LatticeMeasure, M: int) -> np.ndarray:
    """Fourier multiplier of ``f -> mu f`` on ``Z_M`` (numpy FFT convention)."""
    return np.conj(np.fft.fft(wrap(mu, M)))


def apply_measure(mu: LatticeMeasure, f: CyclicField, method: str = "fft") -> CyclicField:
    """``(mu f)(x) = sum_j mu(j) f(x + j mod M)``."""
    v = f.values
    if method == "direct":
        out = np.zeros(v.shape, dtype=np.result_type(v, float))
        for k, w in zip(mu.support, mu.weights):
            if w:
                out += w * np.roll(v, -int(k))
        return CyclicField(out)
    out = np.fft.ifft(multiplier(mu, f.M) * np.fft.fft(v))
    return CyclicField(out if np.iscomplexobj(v) else out.real)


def frequency_norm(mu: LatticeMeasure, f: CyclicField) -> float:
    """``||mu f||_2`` evaluated on the Fourier side (Parseval)."""
    spec = multiplier(mu, f.M) * np.fft.fft(f.values)
    return math.sqrt(math.fsum(np.abs(spec) ** 2) / f.M)


def sfunc(fields: Sequence[CyclicField]) -> CyclicField:
    """Pointwise square function ``(sum_n |g_n(x)|^2)^(1/2)``."""
    if not fields:
        raise SizeMismatch("square function of an empty collection")
    M = fields[0].M
    if any(g.M != M for g in fields):
        raise SizeMismatch("fields live on different cyclic groups")
    return CyclicField(np.sqrt(np.sum(np.stack([np.abs(g.values) ** 2 for g in fields]), axis=0)))


# ---------------------------------------------------------------------------
# experiments


@dataclass
class ExperimentConfig:
    family: dict = field(default_factory=lambda: {"family": "lazy-walk", "params": {"p": 0.5}})
    M: int = 4096
    k_max: int = 3
    s: float = 3.0
    trials: int = 20
    seed: int = 0
    grid: int = 1024
    threads: int = 1
    j_values: tuple = (-2, -1, 0, 1, 2)

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2 or self.M & (self.M - 1):
            raise ConfigError(f"M must be a power of two, got {self.M}")
        if self.k_max < 1:
            raise ConfigError("k_max must be at least 1")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        TorusGrid(self.grid)
        self.j_values = tuple(int(j) for j in self.j_values)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["j_values"] = list(self.j_values)
        return d


@dataclass
class RatioReport:
    """Ratios ``(norm of the outputs) / ||f||_2`` for each trial and level.

    ``curves[name][t][k-1]`` is the ratio of trial ``t`` using levels ``1..k``.
    ``growth[name]`` is the max over trials at each level.
    """

    experiment: str
    config: dict
    curves: dict
    constants: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    preconditions: dict = field(default_factory=dict)

    @property
    def growth(self) -> dict:
        return {name: np.max(np.array(c), axis=0).tolist() for name, c in self.curves.items()}

    @property
    def ratios(self) -> dict:
        return {name: [row[-1] for row in c] for name, c in self.curves.items()}

    def growth_factor(self, name: str, k_from: int, k_to: int) -> float:
        g = self.growth[name]
        return g[k_to - 1] / g[k_from - 1]

    def to_dict(self, timestamp: bool = True) -> dict:
        ratios = self.ratios
        d = {
            "experiment": self.experiment,
            "version": __version__,
            "seed": self.config.get("seed"),
            "config": self.config,
            "ratios": ratios,
            "max": {k: max(v) for k, v in ratios.items()},
            "mean": {k: math.fsum(v) / len(v) for k, v in ratios.items()},
            "growth": self.growth,
            "curves": self.curves,
            "constants": self.constants,
            "flags": self.flags,
            "preconditions": self.preconditions,
            "sampling": "grid",
        }
        if timestamp:
            d["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        return d

    def to_json(self, timestamp: bool = True) -> str:
        return json.dumps(self.to_dict(timestamp), indent=2, sort_keys=True)

    def csv_rows(self) -> list[tuple]:
        rows = []
        for name in sorted(self.curves):
            for t, row in enumerate(self.curves[name]):
                for k, r in enumerate(row, start=1):
                    rows.append((name, k, t, r))
        return rows


def check_preconditions(fam: MeasureFamily, n_max: int, grid: TorusGrid) -> dict:
    """Verify strict aperiodicity, centering and decay for ``nu_1 .. nu_n_max``.

    The moment growth conditions cannot fail on a finite range; their margins
    ``max_n (sum_{i<=n} m_2^p(nu_i)) / n`` are reported for ``p = 1, 2``.
    """
    m2 = []
    for i in range(1, n_max + 1):
        nu = fam.nu(i)
        if not is_strictly_aperiodic(nu):
            raise PreconditionFailed("strict-aperiodicity", f"nu_{i} lives on a proper coset")
        e = expectation(nu)
        if abs(e) > 1e-12:
            raise PreconditionFailed("zero-expectation", f"E(nu_{i}) = {e!r}")
        m2.append(moment(nu, 2))
    m2 = np.array(m2)
    n = np.arange(1, n_max + 1)
    cert = certify_family(fam, n_max, grid)
    if not cert.holds:
        raise PreconditionFailed("gaussian-decay", f"no certified tail below n = {n_max}")
    return {
        "n_max": n_max,
        "m2_squared_sum_over_n": float(np.max(np.cumsum(m2**2) / n)),
        "m2_sum_over_n": float(np.max(np.cumsum(m2) / n)),
        "decay": cert.to_dict(),
    }


def _unit_field(seed: int, trial: int, M: int) -> np.ndarray:
    rng = np.random.default_rng([seed, trial])
    f = rng.standard_normal(M)
    return f / two_norm(f)


def _run_trials(cfg: ExperimentConfig, one) -> list:
    if cfg.threads == 1:
        return [one(t) for t in range(cfg.trials)]
    with ThreadPoolExecutor(cfg.threads) as pool:
        return list(pool.map(one, range(cfg.trials)))


def _setup(cfg: ExperimentConfig, n_max: int):
    fam = family_from_spec(cfg.family)
    pre = check_preconditions(fam, n_max, TorusGrid(cfg.grid))
    mus = fam.prefixes(n_max)
    flags = {"wrap_around": any(mu.width > cfg.M for mu in mus)}
    return fam, mus, pre, flags


def _level_norms(per_level: np.ndarray, f_norm: float) -> list[float]:
    # per_level: (levels, M) pointwise values
    return [two_norm(row) / f_norm for row in per_level]


def fields_along(mus: Sequence[LatticeMeasure], f: np.ndarray) -> np.ndarray:
    """``mu_n f`` for every measure, stacked as rows."""
    M = f.size
    F = np.fft.fft(f)
    mult = np.stack([multiplier(mu, M) for mu in mus])
    return np.fft.ifft(mult * F, axis=1).real


def variation_experiment(cfg: ExperimentConfig, f_override: np.ndarray | None = None) -> RatioReport:
    """Ratios of ``|| ||mu_n f||_v(s) ||_2`` and ``|| ||mu_n f||_o(2) ||_2`` to ``||f||_2``.

    The sequence runs over ``1 <= n <= 4^k`` at level k; the oscillation
    breakpoints are ``1, 4, ..., 4^k`` so every closed block is complete.
    """
    if not cfg.s > 2:
        raise ConfigError(f"the variation bound needs 2 < s < inf, got s = {cfg.s}")
    n_max = 4**cfg.k_max
    fam, mus, pre, flags = _setup(cfg, n_max)
    blocks = BlockSpec.powers(cfg.k_max)
    mult = np.stack([multiplier(mu, cfg.M) for mu in mus])
    ends = [4**k - 1 for k in range(1, cfg.k_max + 1)]

    def one(t):
        f = _unit_field(cfg.seed, t, cfg.M) if f_override is None else f_override
        X = np.fft.ifft(mult * np.fft.fft(f), axis=1).real
        fn = two_norm(f)
        v = variation_profile(X, cfg.s)[ends] ** (1.0 / cfg.s)
        osc = np.sqrt(np.cumsum(oscillation_values(X, blocks) ** 2, axis=0))
        if fn == 0:
            return [0.0] * cfg.k_max, [0.0] * cfg.k_max
        return _level_norms(v, fn), _level_norms(osc, fn)

    res = _run_trials(cfg, one)
    curves = {f"v({cfg.s:g})": [r[0] for r in res], "o(2)": [r[1] for r in res]}
    return RatioReport("theorem17", cfg.to_dict(), curves, flags=flags, preconditions=pre)


def symmetrization_experiment(cfg: ExperimentConfig) -> RatioReport:
    """Ratio of ``|| (sum_k |mu_{4^k} f - lambda_{4^k} f|^2)^(1/2) ||_2`` to ``||f||_2``,
    ``lambda = mu * reflect(mu)``."""
    n_max = 4**cfg.k_max
    fam, mus, pre, flags = _setup(cfg, n_max)
    diff = []
    for k in range(1, cfg.k_max + 1):
        mu = mus[4**k - 1]
        lam = symmetrize(mu)
        flags["wrap_around"] |= lam.width > cfg.M
        diff.append(multiplier(mu, cfg.M) - multiplier(lam, cfg.M))
    diff = np.stack(diff)

    def one(t):
        f = _unit_field(cfg.seed, t, cfg.M)
        D = np.fft.ifft(diff * np.fft.fft(f), axis=1).real
        return _level_norms(np.sqrt(np.cumsum(D**2, axis=0)), two_norm(f))

    curves = {"square": _run_trials(cfg, one)}
    return RatioReport("theorem133", cfg.to_dict(), curves, flags=flags, preconditions=pre)


def block_variation_experiment(cfg: ExperimentConfig) -> RatioReport:
    """Ratio of ``|| (sum_k ||mu_n f : 4^(k-1) <= n < 4^k||_v(2)^2)^(1/2) ||_2`` to ``||f||_2``.

    The same quantity for ``K_n f = mu_n f - mu_{4^(k-1)} f`` must coincide,
    since the two differ by a constant within each block; the largest
    discrepancy is recorded and must stay below 1e-10.
    """
    n_max = 4**cfg.k_max - 1
    fam, mus, pre, flags = _setup(cfg, n_max)
    mult = np.stack([multiplier(mu, cfg.M) for mu in mus])
    blocks = BlockSpec.powers(cfg.k_max)

    def one(t):
        f = _unit_field(cfg.seed, t, cfg.M)
        X = np.fft.ifft(mult * np.fft.fft(f), axis=1).real
        vb, resid = [], 0.0
        for lo, hi in blocks.pairs():
            seg = X[lo - 1 : hi - 1]
            v_mu = variation_values(seg, 2.0)
            v_k = variation_values(seg - seg[0], 2.0)
            resid = max(resid, float(np.max(np.abs(v_mu - v_k))))
            vb.append(v_mu)
        sq = np.sqrt(np.cumsum(np.stack(vb) ** 2, axis=0))
        return _level_norms(sq, two_norm(f)), resid

    res = _run_trials(cfg, one)
    resid = max(r[1] for r in res)
    if resid > 1e-10:
        raise AssertionError(f"mu_n and K_n block variations differ by {resid!r}")
    curves = {"block-v(2)": [r[0] for r in res]}
    return RatioReport("theorem141", cfg.to_dict(), curves, flags=flags, preconditions=pre,
                       constants={"kn_equality_residual": resid})


def _operator_multiplier(samples: np.ndarray, M: int) -> np.ndarray:
    """Multiplier at FFT index l of ``f -> sum_i K(i) f(x + i)``: ``K_hat(-l/M)``.

    ``samples`` are torus-grid values at ``-1/2 + m/M``; node ``m`` represents
    ``-l/M`` when ``m = M/2 - l (mod M)``.
    """
    l = np.arange(M)
    return samples[(M // 2 - l) % M]


def shell_experiment(cfg: ExperimentConfig) -> RatioReport:
    """Frequency-localized pieces of the block variation.

    For each ``j`` in ``cfg.j_values`` record, relative to ``||f||_2``:

    * ``K[j]``: ``(sum_k || ||K_jn f : block k||_v(2) ||_2^2)^(1/2)``
    * ``A[j]``: the same for the coarsened operators ``A_n``
    * ``A-K[j]``: the same for ``A_n - K_jn``

    ``constants`` holds the max ratios multiplied by ``4^(|j|/2)``.
    """
    n_max = 4**cfg.k_max - 1
    fam, mus, pre, flags = _setup(cfg, n_max)
    grid = TorusGrid(cfg.M) if cfg.M >= 8 else None
    if grid is None:
        raise ConfigError("shell experiment needs M >= 8")
    mults = {}
    for j in cfg.j_values:
        for k in range(1, cfg.k_max + 1):
            scheme = coarsening(j, k)
            mask = shell_mask(j + k, grid)
            rows_k, rows_a = [], []
            for n in range(4 ** (k - 1), 4**k):
                kk = k_kernel(fam, k, n, grid).values * mask
                ka = k_kernel(fam, k, scheme.anchor(n), grid).values * mask
                rows_k.append(_operator_multiplier(kk, cfg.M))
                rows_a.append(_operator_multiplier(ka, cfg.M))
            mults[j, k] = (np.stack(rows_k), np.stack(rows_a))

    def one(t):
        f = _unit_field(cfg.seed, t, cfg.M)
        F = np.fft.fft(f)
        fn = two_norm(f)
        out = {}
        for j in cfg.j_values:
            acc = {"K": [], "A": [], "A-K": []}
            for k in range(1, cfg.k_max + 1):
                mk, ma = mults[j, k]
                XK = np.fft.ifft(mk * F, axis=1)
                XA = np.fft.ifft(ma * F, axis=1)
                acc["K"].append(variation_values(XK, 2.0))
                acc["A"].append(variation_values(XA, 2.0))
                acc["A-K"].append(variation_values(XA - XK, 2.0))
            for name, vals in acc.items():
                sq = np.sqrt(np.cumsum(np.stack(vals) ** 2, axis=0))
                out[f"{name}[j={j}]"] = _level_norms(sq, fn)
        return out

    res = _run_trials(cfg, one)
    curves = {name: [r[name] for r in res] for name in res[0]}
    rep = RatioReport("shell", cfg.to_dict(), curves, flags=flags, preconditions=pre)
    for j in cfg.j_values:
        for name in ("K", "A", "A-K"):
            key = f"{name}[j={j}]"
            rep.constants[f"{key}*4^(|j|/2)"] = max(rep.ratios[key]) * 2.0 ** abs(j)
    return rep


EXPERIMENTS = {
    "theorem17": variation_experiment,
    "theorem133": symmetrization_experiment,
    "theorem141": block_variation_experiment,
    "shell": shell_experiment,
}
ALIASES = {"variation": "theorem17", "symmetrization": "theorem133",
           "block-variation": "theorem141"}


def run_experiment(name: str, cfg: ExperimentConfig) -> RatioReport:
    key = ALIASES.get(name, name)
    if key not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}")
    return EXPERIMENTS[key](cfg)


# ---------------------------------------------------------------------------
# holding family diagnostics


def counterexample_explorer(a=None, n_max: int = 64, grid_size: int = 1024,
                            beta_max: int = 64) -> dict:
    """Per-n diagnostics for the holding family ``nu_n = a_n delta_0 + (1 - a_n)/2 (delta_-1 + delta_1)``.

    Nothing is claimed about convergence; the report lists ``mu_n(0)`` against
    the lower bound ``prod a_i``, the second moment against ``sum (1 - a_i)``,
    the odd-coset mass of ``nu_n`` and the decay certificate of ``nu_n_hat``.
    """
    seq = a if isinstance(a, ASequence) else ASequence(a)
    fam = holding_family(seq)
    grid = TorusGrid(grid_size)
    half = 0  # node t = -1/2
    rows = []
    checks = {"mu0_above_product": True, "odd_coset_mass": True, "second_moment": True,
              "half_node_value": True}
    prod = 1.0
    m2_sum = 0.0
    for n in range(1, n_max + 1):
        a_n = seq(n)
        nu = fam.nu(n)
        mu = fam.prefix(n)
        prod *= a_n
        m2_sum += 1.0 - a_n
        odd = coset_mass(nu, 2, 1)
        conc = coset_concentration(nu, beta_max)
        cert = gaussian_decay(nu, grid)
        at_half = abs(char_fun(nu, grid).values[half])
        m2 = moment(mu, 2)
        row = {
            "n": n, "a_n": a_n, "mu_n(0)": mu(0), "prod_a": prod,
            "m2_mu_n": m2, "sum_1_minus_a": m2_sum,
            "odd_coset_mass": odd, "coset_concentration": list(conc),
            "abs_nu_hat_half": float(at_half), "abs_2a_minus_1": abs(2 * a_n - 1),
            "decay_best_C": cert.best_C, "decay_holds": cert.holds,
        }
        checks["mu0_above_product"] &= bool(mu(0) >= prod)
        checks["odd_coset_mass"] &= bool(odd == 1.0 - a_n)
        checks["second_moment"] &= bool(abs(m2 - m2_sum) <= 1e-9)
        checks["half_node_value"] &= bool(abs(at_half - abs(2 * a_n - 1)) <= 1e-12)
        rows.append(row)
    return {"a": seq.spec, "n_max": n_max, "grid": grid_size, "rows": rows,
            "checks": checks, "sampling": "grid"}
