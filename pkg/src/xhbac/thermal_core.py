"""Thermo-majorization machinery for finite-level systems in contact with a heat bath.

Populations are plain numpy arrays over energy eigenstates.  A state p can be
pushed around by dephasing thermalizations, which act on populations as
Gibbs-stochastic matrices (column-stochastic, thermal state fixed).  The set of
reachable populations is a polytope whose extremal points are produced by the
beta-permutation maps built here.

Everything in this module is a pure function of immutable inputs; nothing
mutates its arguments.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "EnergySpectrum",
    "CompositeSpec",
    "ThermoCurve",
    "ExtremalPointSet",
    "GibbsStochasticCheck",
    "default_tolerance",
    "as_population",
    "gibbs_state",
    "beta_order",
    "thermo_curve",
    "curve_height",
    "thermo_majorizes",
    "beta_permutation",
    "extremal_points",
    "maximally_active",
    "verify_gibbs_stochastic",
]

#: Fallback absolute tolerance for curve comparisons and matrix verification.
BASE_TOLERANCE = 1e-12
#: Relative tolerance used when comparing thermo-majorization curves.
CURVE_RTOL = 1e-9


def default_tolerance() -> float:
    """Absolute tolerance floor, overridable through the XHBAC_TOL env var."""
    raw = os.environ.get("XHBAC_TOL")
    if raw is None:
        return BASE_TOLERANCE
    value = float(raw)
    if value <= 0:
        raise ValueError(f"XHBAC_TOL must be positive, got {raw!r}")
    return value


@dataclass(frozen=True)
class EnergySpectrum:
    """Energy levels E_0 <= ... <= E_{d-1} plus the bath inverse temperature.

    Only the products beta*E_i ever enter the math, so the units of `levels`
    and `beta` just have to cancel.
    """

    levels: tuple[float, ...]
    beta: float

    def __post_init__(self) -> None:
        levels = tuple(float(e) for e in np.atleast_1d(np.asarray(self.levels, dtype=float)))
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "beta", float(self.beta))
        if len(levels) < 1:
            raise ValueError("spectrum needs at least one level")
        if any(a > b for a, b in zip(levels, levels[1:])):
            raise ValueError("energy levels must be non-decreasing")
        if not (math.isfinite(self.beta) and self.beta >= 0.0):
            raise ValueError(f"beta must be finite and non-negative, got {self.beta}")

    @property
    def dim(self) -> int:
        return len(self.levels)

    @property
    def omega(self) -> float:
        """Total spectral width E_{d-1} - E_0."""
        return self.levels[-1] - self.levels[0]

    @property
    def gap(self) -> float:
        """Single gap of a two-level spectrum."""
        if self.dim != 2:
            raise ValueError(f"gap is only defined for qubits, dim={self.dim}")
        return self.levels[1] - self.levels[0]


@dataclass(frozen=True)
class CompositeSpec:
    """System plus optional ancilla, with joint levels in (system, ancilla) lex order.

    The joint level table E_i + E_a is generally not sorted; all core
    operations only read Boltzmann factors per level, so that is fine.  The
    pair (i, a) lives at joint index i*r + a.
    """

    system: EnergySpectrum
    ancilla: EnergySpectrum | None = None
    ancilla_population: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.system.dim < 2:
            raise ValueError("system must have at least two levels")
        if self.ancilla is not None and self.ancilla.beta != self.system.beta:
            raise ValueError("system and ancilla must share the same beta")
        if self.ancilla_population is not None:
            if self.ancilla is None:
                raise ValueError("ancilla population given without an ancilla spectrum")
            pop = as_population(self.ancilla_population, self.ancilla.dim)
            object.__setattr__(self, "ancilla_population", tuple(float(x) for x in pop))
        sys_levels = np.asarray(self.system.levels)
        if self.ancilla is None:
            joint = tuple(self.system.levels)
        else:
            anc_levels = np.asarray(self.ancilla.levels)
            joint = tuple(float(x) for x in np.add.outer(sys_levels, anc_levels).ravel())
        object.__setattr__(self, "_joint_levels", joint)

    @property
    def beta(self) -> float:
        return self.system.beta

    @property
    def levels(self) -> tuple[float, ...]:
        return self._joint_levels  # type: ignore[attr-defined]

    @property
    def d(self) -> int:
        return self.system.dim

    @property
    def r(self) -> int:
        return 1 if self.ancilla is None else self.ancilla.dim

    @property
    def dim(self) -> int:
        return self.d * self.r

    def pair_index(self, i: int, a: int) -> int:
        if not (0 <= i < self.d and 0 <= a < self.r):
            raise ValueError(f"pair ({i}, {a}) outside {self.d}x{self.r} space")
        return i * self.r + a

    def index_pair(self, m: int) -> tuple[int, int]:
        if not 0 <= m < self.dim:
            raise ValueError(f"joint index {m} outside dimension {self.dim}")
        return divmod(m, self.r)

    def ancilla_state(self) -> np.ndarray | None:
        """Ancilla populations used at the start of each round (thermal by default)."""
        if self.ancilla is None:
            return None
        if self.ancilla_population is not None:
            return np.asarray(self.ancilla_population, dtype=float)
        return gibbs_state(self.ancilla)

    def joint_population(self, p_system: Sequence[float]) -> np.ndarray:
        p = as_population(p_system, self.d)
        anc = self.ancilla_state()
        return p.copy() if anc is None else np.kron(p, anc)

    def system_marginal(self, joint: np.ndarray) -> np.ndarray:
        joint = np.asarray(joint, dtype=float)
        if joint.shape != (self.dim,):
            raise ValueError(f"expected joint vector of length {self.dim}")
        return joint.reshape(self.d, self.r).sum(axis=1)


def _level_array(spectrum) -> np.ndarray:
    return np.asarray(spectrum.levels, dtype=float)


def _boltzmann_weights(spectrum) -> np.ndarray:
    """Unnormalized weights e^{-beta E_i}; must stay strictly positive."""
    w = np.exp(-spectrum.beta * _level_array(spectrum))
    if np.any(w <= 0.0) or np.any(~np.isfinite(w)):
        raise ValueError("Boltzmann weight under/overflow; beta*E spread too large")
    return w


def as_population(p, dim: int | None = None) -> np.ndarray:
    """Validate and return a probability vector as a float array."""
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"population must be a vector, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {arr.size}")
    if np.any(arr < -1e-12):
        raise ValueError(f"negative population entry: min={arr.min()}")
    total = arr.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"population must sum to 1, got {total}")
    return np.clip(arr, 0.0, None)


def gibbs_state(spectrum) -> np.ndarray:
    """Normalized thermal populations for the given spectrum."""
    e = _level_array(spectrum)
    w = np.exp(-spectrum.beta * (e - e.min()))
    return w / w.sum()


def beta_order(p, spectrum, tie_rtol: float = 1e-12) -> np.ndarray:
    """Permutation sorting p_i * e^{beta E_i} into non-increasing order.

    Returned as position -> level indices.  Keys within `tie_rtol` of each
    other count as tied and go to the lower original index; without the
    tolerance an exactly thermal state would pick up a noise-driven order,
    since e^{-x} e^{x} does not round-trip in floating point.  Tied keys have
    equal curve slopes, so the choice never changes the curve.
    """
    p = as_population(p, len(spectrum.levels))
    e = _level_array(spectrum)
    keys = p * np.exp(spectrum.beta * (e - e.max()))
    order = np.argsort(-keys, kind="stable")
    ranked = keys[order]
    out = np.empty_like(order)
    start = 0
    for i in range(1, p.size + 1):
        if i == p.size or ranked[i] < ranked[start] * (1.0 - tie_rtol):
            out[start:i] = np.sort(order[start:i])
            start = i
    return out


def _as_permutation(perm, dim: int) -> np.ndarray:
    arr = np.asarray(perm, dtype=int)
    if arr.shape != (dim,) or not np.array_equal(np.sort(arr), np.arange(dim)):
        raise ValueError(f"not a permutation of range({dim}): {perm}")
    return arr


@dataclass(frozen=True)
class ThermoCurve:
    """Piecewise-linear concave curve of cumulative Gibbs weight vs cumulative population."""

    xs: np.ndarray  # d+1 strictly increasing abscissae, from 0 to the partition sum
    ys: np.ndarray  # d+1 non-decreasing ordinates, from 0 to 1

    @property
    def partition(self) -> float:
        return float(self.xs[-1])

    def height(self, x: float) -> float:
        tol = max(default_tolerance(), 1e-12 * self.partition)
        if x < -tol or x > self.partition + tol:
            raise ValueError(f"x={x} outside curve domain [0, {self.partition}]")
        return float(np.interp(np.clip(x, 0.0, self.partition), self.xs, self.ys))

    def heights(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return np.interp(np.clip(xs, 0.0, self.partition), self.xs, self.ys)


def thermo_curve(p, spectrum) -> ThermoCurve:
    """Elbow points (sum of e^{-beta E}, sum of p) accumulated in beta-order."""
    order = beta_order(p, spectrum)
    p = as_population(p, len(spectrum.levels))
    w = _boltzmann_weights(spectrum)
    xs = np.concatenate(([0.0], np.cumsum(w[order])))
    ys = np.concatenate(([0.0], np.cumsum(p[order])))
    return ThermoCurve(xs, ys)


def curve_height(curve: ThermoCurve, x: float) -> float:
    """Height of the curve at abscissa x in [0, partition sum]."""
    return curve.height(x)


def thermo_majorizes(p, q, spectrum, rtol: float | None = None, atol: float | None = None) -> bool:
    """True when the curve of p is nowhere below the curve of q.

    Checking the elbow abscissae of both curves suffices because both are
    piecewise linear.  Equality within tolerance counts as majorization, so
    the relation is reflexive under floating point.
    """
    if rtol is None:
        rtol = CURVE_RTOL
    if atol is None:
        atol = default_tolerance()
    cp = thermo_curve(p, spectrum)
    cq = thermo_curve(q, spectrum)
    xs = np.union1d(cp.xs, cq.xs)
    hp = cp.heights(xs)
    hq = cq.heights(xs)
    return bool(np.all(hq <= hp + np.maximum(atol, rtol * np.abs(hp))))


def beta_permutation(pi, alpha, spectrum) -> np.ndarray:
    """Extremal Gibbs-stochastic matrix mapping beta-order pi states onto order alpha.

    Rows are filled in alpha-order against columns in pi-order: row m grabs as
    much population for its target level as the thermo-majorization constraint
    allows, continuing from the column where the previous row stopped.  The
    result is returned in the natural level basis.
    """
    w = _boltzmann_weights(spectrum)
    d = w.size
    pi = _as_permutation(pi, d)
    alpha = _as_permutation(alpha, d)
    wp = w[pi]
    wa = w[alpha]
    cum_p = np.cumsum(wp)
    cum_a = np.cumsum(wa)

    G = np.zeros((d, d))
    col_used = np.zeros(d)
    k_prev = 0
    for m in range(d):
        if cum_a[m] < cum_p[k_prev]:
            # Only a fraction of the current column fits under the curve.
            G[m, k_prev] = wa[m] / wp[k_prev]
            k_m = k_prev
        else:
            k_m = min(int(np.searchsorted(cum_p, cum_a[m], side="left")), d - 1)
            G[m, k_prev] = 1.0 - col_used[k_prev]
            if k_m > k_prev:
                G[m, k_prev + 1 : k_m] = 1.0
                G[m, k_m] = (cum_a[m] - cum_p[k_m - 1]) / wp[k_m]
        col_used += G[m]
        k_prev = k_m

    P = np.zeros((d, d))
    P[np.ix_(alpha, pi)] = G
    return P


def maximally_active(p, spectrum) -> np.ndarray:
    """Populations sorted ascending and assigned to energies ascending.

    This is the most energetic arrangement on the unitary orbit of a diagonal
    state, and it thermo-majorizes every other arrangement.
    """
    p = as_population(p, len(spectrum.levels))
    order = np.argsort(_level_array(spectrum), kind="stable")
    out = np.empty_like(p)
    out[order] = np.sort(p)
    return out


@dataclass(frozen=True)
class ExtremalPointSet:
    """Deduplicated extremal candidates plus the raw counts.

    For degenerate spectra the deduplicated set may still be a strict superset
    of the polytope's vertex set; both counts are surfaced so callers can see
    how much collapsing happened, and no exactness is claimed.
    """

    points: np.ndarray
    n_orders: int
    n_distinct: int


@lru_cache(maxsize=8)
def _permutation_table(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.intp)


def extremal_points(p, spectrum, max_dim: int = 8, dedup_tol: float = 1e-10) -> ExtremalPointSet:
    """Apply every extremal map for the beta-order of p and deduplicate the images.

    Refuses dimensions above `max_dim` because the number of orders grows as
    d factorial.
    """
    p = as_population(p, len(spectrum.levels))
    d = p.size
    if d > max_dim:
        raise ValueError(f"dimension {d} exceeds the factorial-enumeration guard {max_dim}")
    pi = beta_order(p, spectrum)
    candidates = np.empty((math.factorial(d), d))
    for idx, alpha in enumerate(_permutation_table(d)):
        candidates[idx] = beta_permutation(pi, alpha, spectrum) @ p

    order = np.lexsort(candidates.T[::-1])
    kept: list[np.ndarray] = []
    firsts: list[float] = []
    window = 0
    for row in candidates[order]:
        while window < len(kept) and firsts[window] < row[0] - dedup_tol:
            window += 1
        block = kept[window:]
        if block and np.min(np.max(np.abs(np.asarray(block) - row), axis=1)) < dedup_tol:
            continue
        kept.append(row)
        firsts.append(row[0])
    points = np.asarray(kept) if kept else np.empty((0, d))
    return ExtremalPointSet(points=points, n_orders=candidates.shape[0], n_distinct=len(kept))


@dataclass(frozen=True)
class GibbsStochasticCheck:
    """Outcome of the three Gibbs-stochasticity conditions with worst violations."""

    ok: bool
    worst_violation: float
    negativity: float
    column_sum_error: float
    fixed_point_error: float

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        return (
            f"negativity={self.negativity:.3e} "
            f"column_sum={self.column_sum_error:.3e} "
            f"fixed_point={self.fixed_point_error:.3e}"
        )


def verify_gibbs_stochastic(matrix, spectrum, tol: float | None = None) -> GibbsStochasticCheck:
    """Check non-negativity, column sums and Gibbs preservation of a matrix."""
    if tol is None:
        tol = default_tolerance()
    M = np.asarray(matrix, dtype=float)
    d = len(spectrum.levels)
    if M.shape != (d, d):
        raise ValueError(f"expected a {d}x{d} matrix, got shape {M.shape}")
    negativity = float(max(0.0, -M.min()))
    column_sum_error = float(np.max(np.abs(M.sum(axis=0) - 1.0)))
    g = gibbs_state(spectrum)
    fixed_point_error = float(np.max(np.abs(M @ g - g)))
    worst = max(negativity, column_sum_error, fixed_point_error)
    return GibbsStochasticCheck(
        ok=worst <= tol,
        worst_violation=worst,
        negativity=negativity,
        column_sum_error=column_sum_error,
        fixed_point_error=fixed_point_error,
    )
