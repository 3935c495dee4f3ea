"""Physical realizations of the qubit cooling protocol on a truncated Fock space.

A single thermal bosonic mode is enough to implement the full population swap
exactly: the joint unitary exchanges |1, n-1> and |0, n> and leaves |0, 0>
alone, circulating populations so that the same mode can be reused round after
round with no reset.  A resonant exchange coupling only approximates that
unitary; its de-excitation probability for interaction angle s is
(1 - e^{-bE}) sum_n sin^2(s sqrt(n)) e^{-bE(n-1)}, which we optimize over s
and compare against the temperature-dependent ceiling.

Mode dissipation between interactions follows the diagonal rate equation
    dt_n = A(nbar+1)[(n+1) t_{n+1} - n t_n] + A nbar [n t_{n-1} - (n+1) t_n],
truncated with a reflecting top level so probability is conserved exactly and
the truncated thermal vector is an exact fixed point.

States are Fock-diagonal throughout: the exchange coupling conserves total
excitation number, so block coherences never reach the diagonal marginals
tracked here (a dense-matrix reference in the test suite confirms this).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FockTruncation",
    "ModePopulations",
    "JointDiagState",
    "CavityParams",
    "InteractionTime",
    "anharmonic_level_table",
    "u_beta_apply",
    "pauli_x",
    "reuse_protocol_trace",
    "anharmonic_cooling_sums",
    "jc_deexcitation",
    "optimize_interaction_time",
    "upper_bound_G",
    "asymptotic_upper_bound",
    "rethermalize_mode",
    "jc_round",
    "intensity_dependent_jc_round",
    "atom_stream_sim",
    "jc_reuse_trace",
]


@dataclass(frozen=True)
class FockTruncation:
    """Fock cutoff plus the thermal weight neglected above it."""

    n_max: int
    tail_bound: float

    def __post_init__(self) -> None:
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        if not 0.0 <= self.tail_bound <= 1.0:
            raise ValueError("tail bound must be a probability")

    @classmethod
    def thermal(cls, beta_e: float, n_max: int) -> "FockTruncation":
        return cls(n_max=n_max, tail_bound=math.exp(-beta_e * (n_max + 1)))

    @classmethod
    def for_rounds(cls, beta_e: float, rounds: int, tol: float = 1e-10) -> "FockTruncation":
        """Cutoff such that the thermal tail beyond n_max - rounds stays below tol.

        Each protocol round shifts the occupied ladder up by one level, so the
        cutoff has to leave that much headroom.
        """
        if beta_e <= 0:
            raise ValueError("need beta_e > 0 to bound the thermal tail")
        headroom = int(math.ceil(-math.log(tol) / beta_e))
        return cls.thermal(beta_e, max(1, rounds - 1 + headroom))


def anharmonic_level_table(gap: float, tau: float, n_max: int) -> np.ndarray:
    """Ladder with gaps gap * (1 - (n+1) tau^2); raises once a gap turns non-positive."""
    n = np.arange(1, n_max + 1)
    factors = 1.0 - n * tau**2
    if np.any(factors <= 0.0):
        raise ValueError(f"tau={tau} drives a gap non-positive below n_max={n_max}")
    return np.concatenate(([0.0], np.cumsum(gap * factors)))


@dataclass
class ModePopulations:
    """Diagonal Fock populations with their thermal context.

    Initialization truncates the thermal distribution without renormalizing;
    the missing tail is visible through `deficit`.
    """

    t: np.ndarray
    beta: float
    gap: float
    levels: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.t = np.asarray(self.t, dtype=float)
        if self.t.ndim != 1 or self.t.size < 2:
            raise ValueError("mode populations must be a vector with at least two levels")
        if np.any(self.t < -1e-12):
            raise ValueError("negative mode population")
        if self.t.sum() > 1.0 + 1e-9:
            raise ValueError("mode populations exceed unit probability")

    @classmethod
    def thermal(cls, beta: float, gap: float, n_max: int) -> "ModePopulations":
        n = np.arange(n_max + 1)
        q = math.exp(-beta * gap)
        return cls(t=(1.0 - q) * q**n, beta=beta, gap=gap)

    @property
    def n_max(self) -> int:
        return self.t.size - 1

    @property
    def deficit(self) -> float:
        return 1.0 - float(self.t.sum())

    def copy(self) -> "ModePopulations":
        return ModePopulations(self.t.copy(), self.beta, self.gap, self.levels)


@dataclass
class JointDiagState:
    """Joint diagonal populations p[i, n] of a qubit and the truncated mode.

    Population pushed past the cutoff accumulates in `lost` and is never
    silently renormalized away.
    """

    p: np.ndarray
    lost: float = 0.0

    def __post_init__(self) -> None:
        self.p = np.asarray(self.p, dtype=float)
        if self.p.ndim != 2 or self.p.shape[0] != 2:
            raise ValueError("joint state must have shape (2, n_max+1)")

    @classmethod
    def product(cls, qubit, mode: ModePopulations) -> "JointDiagState":
        qubit = np.asarray(qubit, dtype=float)
        return cls(p=np.outer(qubit, mode.t))

    @property
    def n_max(self) -> int:
        return self.p.shape[1] - 1

    @property
    def qubit_marginal(self) -> np.ndarray:
        return self.p.sum(axis=1)

    @property
    def mode_marginal(self) -> np.ndarray:
        return self.p.sum(axis=0)

    @property
    def total(self) -> float:
        return float(self.p.sum())


def pauli_x(state: JointDiagState) -> JointDiagState:
    """Swap the qubit populations in every Fock sector."""
    return JointDiagState(p=state.p[::-1].copy(), lost=state.lost)


def u_beta_apply(state: JointDiagState) -> JointDiagState:
    """Exact swap unitary on populations: |1, n-1> <-> |0, n>, |0, 0> fixed.

    The |1, n_max> population would move to |0, n_max+1>, outside the
    truncation; it is added to the lost-weight tracker instead.
    """
    p = state.p
    out = np.empty_like(p)
    out[0, 0] = p[0, 0]
    out[0, 1:] = p[1, :-1]
    out[1, :-1] = p[0, 1:]
    out[1, -1] = 0.0
    return JointDiagState(p=out, lost=state.lost + float(p[1, -1]))


def reuse_protocol_trace(p0: float, trunc: FockTruncation, spectrum, rounds: int,
                         tol: float = 1e-10) -> np.ndarray:
    """Qubit ground population per round when the same thermal mode is reused throughout.

    The mode is prepared thermal once and never reset; each round applies the
    qubit flip followed by the exact swap unitary.  Raises when the requested
    number of rounds would push more than `tol` of probability past the cutoff.
    """
    beta_e = spectrum.beta * spectrum.gap
    if math.exp(-beta_e * (trunc.n_max - rounds + 1)) > tol:
        raise ValueError(
            f"truncation n_max={trunc.n_max} too small for {rounds} rounds at beta*E={beta_e}"
        )
    mode = ModePopulations.thermal(spectrum.beta, spectrum.gap, trunc.n_max)
    state = JointDiagState.product([p0, 1.0 - p0], mode)
    ground = np.empty(rounds + 1)
    ground[0] = state.qubit_marginal[0]
    for k in range(1, rounds + 1):
        state = u_beta_apply(pauli_x(state))
        ground[k] = state.qubit_marginal[0]
    return ground


def anharmonic_cooling_sums(tau: float, trunc: FockTruncation, spectrum, k: int) -> tuple[float, float]:
    """Cooling sums sum_{n<k} t_n for the anharmonic and the harmonic ladder.

    Both distributions are normalized over the same truncated ladder so the
    tau = 0 case is exactly degenerate.
    """
    if k < 1 or k > trunc.n_max + 1:
        raise ValueError(f"k must lie in [1, {trunc.n_max + 1}], got {k}")
    beta, gap = spectrum.beta, spectrum.gap
    levels_an = anharmonic_level_table(gap, tau, trunc.n_max)
    levels_h = gap * np.arange(trunc.n_max + 1)
    w_an = np.exp(-beta * levels_an)
    w_h = np.exp(-beta * levels_h)
    return float(w_an[:k].sum() / w_an.sum()), float(w_h[:k].sum() / w_h.sum())


def jc_deexcitation(s, spectrum, trunc: FockTruncation):
    """De-excitation probability of the resonant exchange coupling at angle s.

    Evaluates (1 - e^{-bE}) sum_{n>=1} sin^2(s sqrt(n)) e^{-bE (n-1)} truncated
    at n_max; the neglected weight is bounded by trunc.tail_bound.  Accepts a
    scalar or an array of angles.
    """
    beta_e = spectrum.beta * spectrum.gap
    n = np.arange(1, trunc.n_max + 1)
    weights = (1.0 - math.exp(-beta_e)) * np.exp(-beta_e * (n - 1))
    s_arr = np.asarray(s, dtype=float)
    values = np.sin(np.multiply.outer(s_arr, np.sqrt(n))) ** 2 @ weights
    return float(values) if np.isscalar(s) or s_arr.ndim == 0 else values


@dataclass(frozen=True)
class InteractionTime:
    s_star: float
    probability: float


def _golden_max(f, lo: float, hi: float, iterations: int = 80) -> float:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iterations):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def optimize_interaction_time(spectrum, s_lo: float, s_hi: float, trunc: FockTruncation,
                              grid_step: float = 1e-3, chunk: int = 200_000) -> InteractionTime:
    """Maximize the de-excitation probability over a bounded window of angles.

    The target is an almost-periodic sum with many local maxima, so a dense
    global grid comes first; golden-section then polishes the winning bracket.
    During the bracketing scan, ladder terms whose thermal weight sits below
    float64 resolution are dropped (they cannot change a double); the
    refinement stage evaluates the full truncation.  Deterministic for fixed
    grid parameters.
    """
    if not s_lo < s_hi:
        raise ValueError("need s_lo < s_hi")
    beta_e = spectrum.beta * spectrum.gap
    scan_cap = min(trunc.n_max, max(2, int(math.ceil(17.0 * math.log(10.0) / beta_e)) + 1))
    scan_trunc = FockTruncation.thermal(beta_e, scan_cap)
    count = int(math.ceil((s_hi - s_lo) / grid_step)) + 1
    grid = np.linspace(s_lo, s_hi, count)
    best_s, best_v = s_lo, -1.0
    for start in range(0, count, chunk):
        block = grid[start : start + chunk]
        vals = jc_deexcitation(block, spectrum, scan_trunc)
        i = int(np.argmax(vals))
        if vals[i] > best_v:
            best_v = float(vals[i])
            best_s = float(block[i])
    lo = max(s_lo, best_s - grid_step)
    hi = min(s_hi, best_s + grid_step)
    s_star = _golden_max(lambda s: jc_deexcitation(s, spectrum, trunc), lo, hi)
    value = jc_deexcitation(s_star, spectrum, trunc)
    grid_value = jc_deexcitation(best_s, spectrum, trunc)
    if value < grid_value:
        s_star, value = best_s, grid_value
    return InteractionTime(s_star=s_star, probability=value)


def upper_bound_G(beta_bar):
    """Temperature-dependent ceiling on the exchange-coupling de-excitation probability.

    Two branches meeting at beta_bar = log(4)/3.
    """
    b = np.asarray(beta_bar, dtype=float)
    if np.any(b < 0):
        raise ValueError("beta_bar must be non-negative")
    low = (8.0 * np.exp(-b) - np.exp(2.0 * b) + np.exp(3.0 * b) + 8.0) / 16.0
    high = np.exp(-4.0 * b) - np.exp(-3.0 * b) + 1.0
    out = np.where(b < math.log(4.0) / 3.0, low, high)
    return float(out) if np.isscalar(beta_bar) or b.ndim == 0 else out


def asymptotic_upper_bound(beta_bar):
    """Ceiling on the asymptotic ground population reachable with the exchange coupling."""
    b = np.asarray(beta_bar, dtype=float)
    if np.any(b < 0):
        raise ValueError("beta_bar must be non-negative")
    eb = np.exp(b)
    with np.errstate(divide="ignore"):
        low = 1.0 / (eb + 16.0 * np.exp(2.0 * b) / (-16.0 * eb + np.exp(3.0 * b) - 8.0) + 1.0)
    high = 1.0 / (eb / (np.exp(4.0 * b) + 1.0) + 1.0)
    out = np.where(b < math.log(4.0) / 3.0, low, high)
    return float(out) if np.isscalar(beta_bar) or b.ndim == 0 else out


@dataclass(frozen=True)
class CavityParams:
    """Exchange coupling g, photon loss rate, reservoir occupation and firing rate."""

    g: float
    loss_rate: float
    nbar: float
    firing_rate: float | None = None

    def __post_init__(self) -> None:
        if self.g < 0 or self.loss_rate < 0 or self.nbar < 0:
            raise ValueError("cavity parameters must be non-negative")
        if self.firing_rate is not None and self.firing_rate < 0:
            raise ValueError("firing rate must be non-negative")

    @classmethod
    def resonant(cls, g: float, loss_rate: float, beta: float, gap: float,
                 firing_rate: float | None = None) -> "CavityParams":
        nbar = 1.0 / math.expm1(beta * gap)
        return cls(g=g, loss_rate=loss_rate, nbar=nbar, firing_rate=firing_rate)


def _rate_generator(n_levels: int, loss_rate: float, nbar: float) -> np.ndarray:
    """Birth-death generator of the damped mode, reflecting at the top level.

    Down rates A(nbar+1) n, up rates A nbar (n+1); the up rate out of the top
    level is dropped so the truncated chain conserves probability and keeps
    the truncated thermal vector as its exact fixed point.
    """
    n = np.arange(n_levels)
    down = loss_rate * (nbar + 1.0) * n
    up = loss_rate * nbar * (n + 1.0)
    up[-1] = 0.0
    M = np.zeros((n_levels, n_levels))
    M[n[:-1], n[:-1] + 1] = down[1:]
    M[n[1:], n[1:] - 1] = up[:-1]
    M[n, n] = -(down + up)
    return M


def _rk4_propagator(generator: np.ndarray, h: float) -> np.ndarray:
    """One fixed step of the classic fourth-order scheme for a linear generator.

    For a constant linear system the four-stage update collapses to the
    degree-four Taylor polynomial of exp(h M), which we precompute once.
    """
    n = generator.shape[0]
    R = np.eye(n)
    for k in (4, 3, 2, 1):
        R = np.eye(n) + (h / k) * generator @ R
    return R


def _max_stable_dt(loss_rate: float, nbar: float, n_max: int) -> float:
    return 0.1 / (loss_rate * (nbar + 1.0) * n_max)


def _rethermalize_array(arr: np.ndarray, loss_rate: float, nbar: float, duration: float,
                        dt: float | None) -> np.ndarray:
    """Integrate the rate equation on each row of `arr` for `duration`."""
    if duration < 0:
        raise ValueError("duration must be non-negative")
    if duration == 0.0 or loss_rate == 0.0:
        return arr.copy()
    n_levels = arr.shape[-1]
    cap = _max_stable_dt(loss_rate, nbar, n_levels - 1)
    if dt is None:
        dt = cap / 2.0
    elif dt >= cap:
        raise ValueError(f"dt={dt} violates the stability guard {cap}")
    steps = max(1, int(math.ceil(duration / dt)))
    h = duration / steps
    R = _rk4_propagator(_rate_generator(n_levels, loss_rate, nbar), h)
    out = arr.copy()
    for _ in range(steps):
        out = out @ R.T
    return out


def rethermalize_mode(mode: ModePopulations, params: CavityParams, duration: float,
                      dt: float | None = None) -> ModePopulations:
    """Let the mode relax toward thermal occupation nbar for the given duration."""
    t = _rethermalize_array(mode.t[None, :], params.loss_rate, params.nbar, duration, dt)[0]
    return ModePopulations(t=t, beta=mode.beta, gap=mode.gap, levels=mode.levels)


def jc_round(state: JointDiagState, g: float, t_int: float) -> JointDiagState:
    """Resonant exchange interaction for time t_int on the joint populations.

    Each excitation sector {|0, n>, |1, n-1>} rotates by the angle
    g * t_int * sqrt(n); |0, 0> is left alone, and the orphaned top entry
    |1, n_max> (whose partner lies past the cutoff) stays in place.
    """
    s = g * t_int
    p = state.p
    n = np.arange(1, p.shape[1])
    c2 = np.cos(s * np.sqrt(n)) ** 2
    s2 = 1.0 - c2
    out = p.copy()
    upper = p[0, 1:]
    lower = p[1, :-1]
    out[0, 1:] = c2 * upper + s2 * lower
    out[1, :-1] = s2 * upper + c2 * lower
    return JointDiagState(p=out, lost=state.lost)


def intensity_dependent_jc_round(state: JointDiagState, s: float) -> JointDiagState:
    """Exchange interaction whose rotation angle is s in every excitation sector.

    At s = pi/2 this reproduces the exact swap unitary on populations.
    """
    p = state.p
    c2 = math.cos(s) ** 2
    s2 = 1.0 - c2
    out = p.copy()
    upper = p[0, 1:]
    lower = p[1, :-1]
    out[0, 1:] = c2 * upper + s2 * lower
    out[1, :-1] = s2 * upper + c2 * lower
    return JointDiagState(p=out, lost=state.lost)


def _thermal_qubit(beta_e: float) -> np.ndarray:
    x = math.exp(-beta_e)
    return np.array([1.0, x]) / (1.0 + x)


def atom_stream_sim(params: CavityParams, n_atoms: int, t_int: float, trunc: FockTruncation,
                    beta: float, gap: float, dt: float | None = None) -> np.ndarray:
    """Final ground populations of thermal atoms fired through two lossy cavities.

    Per atom: qubit flip, exchange interaction with cavity one, qubit flip,
    exchange interaction with cavity two, then both cavities dissipate for the
    inter-atom interval 1/firing_rate (a firing rate of None or 0 means the
    cavities fully re-thermalize between atoms).  The mode marginals stay
    Fock-diagonal throughout, so tracing out each atom is exact.
    """
    if n_atoms < 1:
        raise ValueError("need at least one atom")
    beta_e = beta * gap
    fresh = ModePopulations.thermal(beta, gap, trunc.n_max)
    cavities = [fresh.copy(), fresh.copy()]
    if params.firing_rate is None or params.firing_rate == 0.0:
        t_wait = math.inf
    else:
        t_wait = 1.0 / params.firing_rate

    finals = np.empty(n_atoms)
    for atom in range(n_atoms):
        qubit = _thermal_qubit(beta_e)
        for cavity in cavities:
            qubit = qubit[::-1]
            joint = jc_round(JointDiagState(p=np.outer(qubit, cavity.t)), params.g, t_int)
            qubit = joint.qubit_marginal
            cavity.t = joint.mode_marginal
        finals[atom] = qubit[0]
        for cavity in cavities:
            if math.isinf(t_wait):
                cavity.t = fresh.t.copy()
            else:
                cavity.t = _rethermalize_array(
                    cavity.t[None, :], params.loss_rate, params.nbar, t_wait, dt
                )[0]
    return finals


def jc_reuse_trace(p0: float, s: float, t_wait: float, params: CavityParams,
                   trunc: FockTruncation, beta: float, gap: float, rounds: int,
                   dt: float | None = None) -> np.ndarray:
    """Ground population per round for one qubit repeatedly coupled to one cavity.

    Each round: qubit flip, exchange interaction at angle s, then the mode
    dissipates for t_wait while keeping its classical correlations with the
    qubit (the rate equation acts on each qubit sector separately).  An
    infinite t_wait resets the mode to thermal and discards correlations.
    """
    mode = ModePopulations.thermal(beta, gap, trunc.n_max)
    state = JointDiagState.product([p0, 1.0 - p0], mode)
    ground = np.empty(rounds + 1)
    ground[0] = state.qubit_marginal[0]
    for k in range(1, rounds + 1):
        state = intensity_free_round(state, s)
        if math.isinf(t_wait):
            state = JointDiagState.product(state.qubit_marginal, mode)
        elif t_wait > 0.0:
            state = JointDiagState(
                p=_rethermalize_array(state.p, params.loss_rate, params.nbar, t_wait, dt),
                lost=state.lost,
            )
        ground[k] = state.qubit_marginal[0]
    return ground


def intensity_free_round(state: JointDiagState, s: float) -> JointDiagState:
    """One protocol round with the plain exchange coupling: flip then rotate by s sqrt(n)."""
    return jc_round(pauli_x(state), 1.0, s)
