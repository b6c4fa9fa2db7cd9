"""Weighted Dirac combs on exact point sets, and the omega/nu splitting.

A comb is a finite collection of atoms, keyed by exact coordinates (m, n)
for the position m + n*tau (pure integers use n = 0), together with a
coverage interval on which the atom list is complete.  Combs of point sets
generated on a half line carry coverage (-inf, R]: there really are no
atoms to the left, and correlation kernels rely on that.

Combs built from inexact (non-Z[tau]) geometry use a uniform grid basis
instead: key m then means position m * grid, with positions merged at the
grid resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import cps
from .zroot5 import embed_array

__all__ = [
    "WeightedComb",
    "dirac_comb",
    "lattice_comb",
    "reflect_conjugate",
    "linear_combine",
    "restrict",
    "split_pp",
    "ContainmentError",
]

_CODE_SHIFT = np.int64(2**32)


class ContainmentError(ValueError):
    """A point set escapes the model set it is supposed to sit inside."""

    def __init__(self, message: str, offenders: list[tuple[int, int]]):
        super().__init__(message)
        self.offenders = offenders


def _encode(keys: np.ndarray) -> np.ndarray:
    # single int64 per (m, n) key; safe for |m| < 2^30, |n| < 2^31
    return keys[:, 0] * _CODE_SHIFT + keys[:, 1]


@dataclass(frozen=True)
class WeightedComb:
    """Atoms at exact positions with complex (or real) weights.

    keys      (N, 2) int64, positions sorted ascending
    weights   (N,) float64 or complex128, no exact zeros
    coverage  interval on which the atom list is complete
    grid      None for Z[tau] keys; else the spacing of a real-valued grid
    """

    keys: np.ndarray
    weights: np.ndarray
    coverage: tuple[float, float]
    grid: float | None = None

    def __post_init__(self):
        if self.keys.ndim != 2 or self.keys.shape[1] != 2:
            raise ValueError("keys must have shape (N, 2)")
        if len(self.keys) != len(self.weights):
            raise ValueError("keys and weights must have equal length")
        if len(self.keys):
            pos = self.positions
            lo, hi = self.coverage
            if pos.min() < lo - 1e-9 or pos.max() > hi + 1e-9:
                raise ValueError("atoms outside the coverage interval")

    @property
    def positions(self) -> np.ndarray:
        if self.grid is None:
            return embed_array(self.keys[:, 0], self.keys[:, 1])
        return self.keys[:, 0].astype(np.float64) * self.grid

    def __len__(self) -> int:
        return len(self.keys)

    def is_integer_supported(self) -> bool:
        """True when every atom sits on Z (n = 0 throughout, Z[tau] basis)."""
        return self.grid is None and bool(np.all(self.keys[:, 1] == 0))

    def atoms_dict(self) -> dict[tuple[int, int], complex]:
        return {
            (int(m), int(n)): w
            for (m, n), w in zip(self.keys, self.weights)
        }

    def atom(self, key: tuple[int, int]) -> complex:
        hits = np.flatnonzero(
            (self.keys[:, 0] == key[0]) & (self.keys[:, 1] == key[1])
        )
        if len(hits) == 0:
            return 0.0
        return self.weights[hits[0]]

    def total_mass(self) -> complex:
        return complex(self.weights.sum()) if len(self) else 0.0

    def sup_norm(self) -> float:
        return float(np.abs(self.weights).max()) if len(self) else 0.0


def _sorted_comb(keys, weights, coverage, grid) -> WeightedComb:
    keys = np.asarray(keys, dtype=np.int64).reshape(-1, 2)
    weights = np.asarray(weights)
    if grid is None:
        pos = embed_array(keys[:, 0], keys[:, 1])
    else:
        pos = keys[:, 0].astype(np.float64) * grid
    order = np.argsort(pos, kind="stable")
    return WeightedComb(keys[order], weights[order], coverage, grid)


def dirac_comb(
    keys: np.ndarray | Sequence[tuple[int, int]],
    coverage: tuple[float, float],
    weight: complex = 1.0,
    grid: float | None = None,
) -> WeightedComb:
    """Comb with a constant weight on each of the given exact points."""
    keys = np.asarray(keys, dtype=np.int64).reshape(-1, 2)
    dtype = np.float64 if isinstance(weight, (int, float)) else np.complex128
    weights = np.full(len(keys), weight, dtype=dtype)
    return _sorted_comb(keys, weights, coverage, grid)


def lattice_comb(lo: int, hi: int, weight: complex = 1.0) -> WeightedComb:
    """The comb weight * delta_Z on the integer sites lo..hi inclusive."""
    ms = np.arange(lo, hi + 1, dtype=np.int64)
    keys = np.stack([ms, np.zeros_like(ms)], axis=1)
    return dirac_comb(keys, (float(lo), float(hi)), weight)


def reflect_conjugate(mu: WeightedComb) -> WeightedComb:
    """Atom w at x becomes conj(w) at -x; coverage is negated."""
    keys = -mu.keys[::-1]
    weights = np.conj(mu.weights[::-1])
    lo, hi = mu.coverage
    return WeightedComb(keys, weights, (-hi, -lo), mu.grid)


def restrict(mu: WeightedComb, lo: float, hi: float) -> WeightedComb:
    """Keep the atoms inside the closed interval [lo, hi].

    The result is a fully known finite measure, so its coverage is the
    whole line.
    """
    if lo > hi:
        return WeightedComb(
            np.empty((0, 2), dtype=np.int64),
            mu.weights[:0],
            (-math.inf, math.inf),
            mu.grid,
        )
    pos = mu.positions
    mask = (pos >= lo) & (pos <= hi)
    return WeightedComb(
        mu.keys[mask], mu.weights[mask], (-math.inf, math.inf), mu.grid
    )


def linear_combine(
    terms: Sequence[tuple[complex, WeightedComb]],
) -> WeightedComb:
    """Atomwise combination sum_i c_i * mu_i on the common coverage.

    Atoms outside the coverage intersection are dropped, exact zero
    weights are removed, and the result is sorted by position.
    """
    if not terms:
        raise ValueError("linear_combine needs at least one term")
    grids = {mu.grid for _, mu in terms}
    if len(grids) != 1:
        raise ValueError("cannot combine combs with different key bases")
    grid = grids.pop()
    lo = max(mu.coverage[0] for _, mu in terms)
    hi = min(mu.coverage[1] for _, mu in terms)

    key_parts = []
    weight_parts = []
    complex_out = any(
        np.iscomplexobj(mu.weights) or isinstance(c, complex) for c, mu in terms
    )
    dtype = np.complex128 if complex_out else np.float64
    for c, mu in terms:
        pos = mu.positions
        mask = (pos >= lo) & (pos <= hi)
        key_parts.append(mu.keys[mask])
        weight_parts.append(mu.weights[mask].astype(dtype) * c)
    keys = np.concatenate(key_parts)
    weights = np.concatenate(weight_parts)

    if len(keys) == 0:
        return WeightedComb(keys.reshape(0, 2), weights, (lo, hi), grid)

    codes = _encode(keys)
    uniq, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
    merged = np.zeros(len(uniq), dtype=dtype)
    if complex_out:
        np.add.at(merged.real, inverse, weights.real)
        np.add.at(merged.imag, inverse, weights.imag)
    else:
        np.add.at(merged, inverse, weights)
    keep = merged != 0
    return _sorted_comb(keys[first][keep], merged[keep], (lo, hi), grid)


def split_pp(
    points: np.ndarray,
    window: "cps.Window",
    alpha: float,
    rng: tuple[float, float],
    model_points: np.ndarray | None = None,
) -> tuple[WeightedComb, WeightedComb]:
    """Split a point comb into its model-set part and the remainder.

    Returns (omega, nu) with omega = alpha * delta_{model set} on rng and
    nu = delta_points - omega, so that omega + nu reproduces the input comb
    atom-for-atom.  Requires every input point to lie in the model set of
    the window; violations raise ContainmentError with the offenders.
    """
    points = np.asarray(points, dtype=np.int64).reshape(-1, 2)
    if model_points is None:
        model_points = cps.cut_and_project(window, rng)
    point_codes = _encode(points)
    model_codes = _encode(model_points)
    missing = ~np.isin(point_codes, model_codes)
    if np.any(missing):
        offenders = [
            (int(m), int(n)) for m, n in points[missing][:20]
        ]
        raise ContainmentError(
            f"{int(missing.sum())} point(s) outside the model set of the window",
            offenders,
        )
    omega = dirac_comb(model_points, rng, weight=float(alpha))
    nu = linear_combine([(1.0, dirac_comb(points, rng)), (-1.0, omega)])
    return omega, nu
