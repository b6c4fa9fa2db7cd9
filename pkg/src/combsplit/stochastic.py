"""Seeded samplers and splitting verification for the random systems.

Draws come from counter-based generators keyed by (seed, stream) plus the
inflation level, consumed positionally per tile, so a rerun with a larger
target extends the earlier draws instead of reshuffling them and identical
specs reproduce identical point sets bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .combs import dirac_comb, lattice_comb, linear_combine
from .eberlein import AveragingSpec, FBRow, fb_scan, pair_correlation
from .inflate import TypedPointSet, _philox_uniforms, random_fibonacci_rule, realize_geometric
from .zroot5 import FourierModulePoint

__all__ = [
    "RngSpec",
    "Check",
    "bernoulli_gas",
    "bernoulli_verify",
    "BernoulliReport",
    "random_fibonacci",
    "empirical_pp_split",
    "PPSplitReport",
]


@dataclass(frozen=True)
class RngSpec:
    """Seed and stream id; equal specs reproduce equal output exactly."""

    seed: int
    stream: int = 0


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    threshold: float
    passed: bool


def bernoulli_gas(p: float, N: int, rng: RngSpec) -> np.ndarray:
    """Independent site occupation on {-N, ..., N} with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    if N < 0:
        raise ValueError("N must be nonnegative")
    u = _philox_uniforms(rng.seed, rng.stream, 0, 2 * N + 1)
    sites = np.arange(-N, N + 1, dtype=np.int64)
    return sites[u < p]


@dataclass(frozen=True)
class BernoulliReport:
    p: float
    N: int
    rng: RngSpec
    gamma: dict[int, float]  # correlation atoms at integer lags
    nu_corr: dict[int, float]  # correlation of the centered comb
    cross_sup: float
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def bernoulli_verify(
    p: float,
    N: int,
    rng: RngSpec,
    r_max: int = 50,
    tol_gamma0: float = 2e-3,
    tol_gamma: float = 3e-3,
    tol_nu: float = 3e-3,
) -> BernoulliReport:
    """Sample a gas, split its comb as p * delta_Z plus fluctuation, verify.

    The occupation comb should correlate to p at lag zero and p^2 at every
    other lag; the centered comb nu = delta - p * delta_Z should correlate
    to p(1-p) at zero and nothing elsewhere, with both cross correlations
    against the periodic part near zero.
    """
    sites = bernoulli_gas(p, N, rng)
    keys = np.stack([sites, np.zeros_like(sites)], axis=1)
    lam = dirac_comb(keys, (-float(N), float(N)))
    omega = lattice_comb(-N, N, weight=p)
    nu = linear_combine([(1.0, lam), (-1.0, omega)])

    R = float(N)
    gamma = pair_correlation(lam, lam, "symmetric", R, r_max)
    nu_corr = pair_correlation(nu, nu, "symmetric", R, r_max)
    cross_a = pair_correlation(omega, nu, "symmetric", R, r_max)
    cross_b = pair_correlation(nu, omega, "symmetric", R, r_max)

    g = {int(m): float(w.real) for (m, _), w in gamma.atoms_dict().items()}
    v = {int(m): float(w.real) for (m, _), w in nu_corr.atoms_dict().items()}
    gamma_err = max(abs(g.get(m, 0.0) - p * p) for m in range(1, r_max + 1))
    nu_off = max(
        (abs(w) for m, w in v.items() if m != 0),
        default=0.0,
    )
    checks = (
        Check("gamma(0) = p", abs(g.get(0, 0.0) - p), tol_gamma0,
              abs(g.get(0, 0.0) - p) <= tol_gamma0),
        Check("gamma(m) = p^2 off zero", gamma_err, tol_gamma,
              gamma_err <= tol_gamma),
        Check("nu~*nu(0) = p(1-p)", abs(v.get(0, 0.0) - p * (1 - p)), tol_nu,
              abs(v.get(0, 0.0) - p * (1 - p)) <= tol_nu),
        Check("nu~*nu off zero", nu_off, tol_nu, nu_off <= tol_nu),
    )
    cross_sup = max(cross_a.sup_norm(), cross_b.sup_norm())
    return BernoulliReport(p, N, rng, g, v, cross_sup, checks)


def random_fibonacci(p: float, R: float, rng: RngSpec) -> TypedPointSet:
    """Locally randomized golden-chain realization on [0, R].

    The long tile splits into long-short with probability p and short-long
    otherwise, independently per tile per level; the short tile always maps
    to a long one.  Control points are exact.
    """
    rule = random_fibonacci_rule(p)
    return realize_geometric(rule, "a", R, rng_seed=rng.seed, stream=rng.stream)


@dataclass(frozen=True)
class PPSplitReport:
    rows: tuple[FBRow, ...]  # per (type, k, R); row order follows the types
    types: tuple[str, ...]
    amplitudes: dict[str, dict[FourierModulePoint, complex]]  # at the final R
    intensities: dict[FourierModulePoint, float]
    total_mass: float
    residual_mass: float
    max_cauchy: float


def empirical_pp_split(
    tps: TypedPointSet,
    K: Sequence[FourierModulePoint],
    spec: AveragingSpec,
    weights: dict[str, complex] | None = None,
) -> PPSplitReport:
    """Per-type FB amplitudes across R with the pure-point intensity tally.

    For each type and wave number the scan reports the FB value along the R
    grid with Cauchy differences; at the final R the weighted amplitude sums
    give the empirical sharp intensities.  The residual mass, total
    autocorrelation mass at zero minus the captured intensity sum, bounds
    what the listed wave numbers leave unexplained.  Diagnostic only: no
    continuous component is reconstructed.
    """
    if weights is None:
        weights = {t: 1.0 for t in tps.types()}
    R_final = spec.R_list[-1]
    all_rows: list[FBRow] = []
    amplitudes: dict[str, dict[FourierModulePoint, complex]] = {}
    max_cauchy = 0.0
    for t in tps.types():
        comb = tps.comb(t)
        rows = fb_scan(comb, K, spec)
        all_rows.extend(rows)
        final = {r.k: r.value for r in rows if r.R == R_final}
        amplitudes[t] = final
        max_cauchy = max(
            max_cauchy,
            max((r.cauchy for r in rows if r.cauchy is not None), default=0.0),
        )

    intensities = {
        k: abs(sum(weights[t] * amplitudes[t][k] for t in tps.types())) ** 2
        for k in K
    }

    lo, hi = (0.0, R_final) if spec.shape == "one_sided" else (-R_final, R_final)
    vol = R_final if spec.shape == "one_sided" else 2 * R_final
    total = 0.0
    for t in tps.types():
        pos = tps.comb(t).positions
        count = int(np.count_nonzero((pos >= lo) & (pos <= hi)))
        total += abs(weights[t]) ** 2 * count / vol
    residual = total - sum(intensities.values())
    return PPSplitReport(
        tuple(all_rows),
        tps.types(),
        amplitudes,
        intensities,
        float(total),
        float(residual),
        float(max_cauchy),
    )
