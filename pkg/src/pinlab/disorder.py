"""Heavy-tailed disorder under a single coupling.

One exponential/uniform stream drives both the discrete size-N order
statistics and their continuum limit, so per-index convergence holds
pathwise: the i-th rescaled maximum M_disc[i] -> M_inf[i] = T_i^(-1/alpha)
and the grid position Y_disc[i] -> Y_inf[i] as N grows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Minimum length of the internal exponential/uniform buffer.
BUFFER_MIN = 4096


@dataclass(frozen=True)
class DisorderLaw:
    """Pure Pareto disorder: P(omega > t) = (t/t_min)^(-alpha) for t >= t_min."""

    alpha: float
    t_min: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0,1), got {self.alpha}")
        if self.t_min <= 0.0:
            raise ValueError(f"t_min must be positive, got {self.t_min}")

    def survival(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.where(t < self.t_min, 1.0, (t / self.t_min) ** (-self.alpha))


def pareto_quantile(law: DisorderLaw, p) -> float | np.ndarray:
    """Inverse CDF: F^(-1)(p) = t_min * (1-p)^(-1/alpha), strictly increasing."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0.0) or np.any(p >= 1.0):
        raise ValueError("quantile level must lie in [0,1)")
    out = law.t_min * (1.0 - p) ** (-1.0 / law.alpha)
    return float(out) if out.ndim == 0 else out


def compute_b_N(law: DisorderLaw, N: int) -> float:
    """Rescaling constant solving P(omega > b_N) = 1/N: b_N = t_min * N^(1/alpha)."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return law.t_min * float(N) ** (1.0 / law.alpha)


@dataclass(frozen=True)
class CoupledDisorder:
    """Discrete and continuum rescaled maxima built from one random stream.

    T holds cumulative sums of unit-mean exponentials; M_inf[i] = T[i]^(-1/alpha)
    exactly, while M_disc uses the order-statistics representation
    b_N^(-1) * quantile(1 - T_i/T_N), so its marginal law equals that of
    ranked i.i.d. Pareto maxima divided by b_N.  Y_disc is a bijection onto
    the interior grid {1/N, ..., (N-1)/N} obtained by snapping Y_inf.
    """

    law: DisorderLaw
    N: int
    k: int
    T: np.ndarray
    M_inf: np.ndarray
    Y_inf: np.ndarray
    M_disc: np.ndarray
    Y_disc: np.ndarray
    b_N: float

    def __post_init__(self):
        for name in ("T", "M_inf", "Y_inf", "M_disc", "Y_disc"):
            getattr(self, name).setflags(write=False)


def draw_base(size: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw the shared randomness: cumulative exponentials T and uniforms Y."""
    T = np.cumsum(rng.standard_exponential(size))
    Y = rng.uniform(0.0, 1.0, size)
    return T, Y


def _assign_grid(y_inf: np.ndarray, N: int) -> np.ndarray:
    """Snap each rank's uniform position to the nearest free interior grid slot.

    Slots are tried in order of distance to N*y, scanning outward and
    preferring the left side on exact distance ties; with N-1 ranks and N-1
    slots this is a bijection.
    """
    occupied = np.zeros(N, dtype=bool)  # slots 1..N-1
    slots = np.empty(N - 1, dtype=np.int64)
    for i in range(N - 1):
        x = N * y_inf[i]
        lo = int(np.floor(x))
        hi = lo + 1
        while True:
            lo_in = lo >= 1
            hi_in = hi <= N - 1
            if lo_in and (not hi_in or (x - lo) <= (hi - x)):
                j = lo
                lo -= 1
            else:
                j = hi
                hi += 1
            if 1 <= j <= N - 1 and not occupied[j]:
                break
        occupied[j] = True
        slots[i] = j
    return slots


def couple(law: DisorderLaw, T: np.ndarray, Y_inf: np.ndarray, N: int, k: int) -> CoupledDisorder:
    """Build the coupled pair of disorders from shared base randomness.

    T and Y_inf must have length >= max(N, k); reusing the same base across
    several N values is what makes the discrete-to-continuum convergence
    hold per index on a single realization.
    """
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    need = max(N, k)
    if T.shape[0] < need or Y_inf.shape[0] < need:
        raise ValueError(f"base buffer too short: need {need}, have {T.shape[0]}")
    b_N = compute_b_N(law, N)
    M_inf = T ** (-1.0 / law.alpha)
    M_disc = pareto_quantile(law, 1.0 - T[: N - 1] / T[N - 1]) / b_N
    M_disc = np.atleast_1d(M_disc)
    slots = _assign_grid(Y_inf, N)
    Y_disc = slots / float(N)
    return CoupledDisorder(
        law=law, N=N, k=k, T=T.copy(), M_inf=M_inf, Y_inf=Y_inf.copy(),
        M_disc=M_disc, Y_disc=Y_disc, b_N=b_N,
    )


def sample_coupled(law: DisorderLaw, N: int, k: int, rng: np.random.Generator) -> CoupledDisorder:
    """Sample a coupled disorder; the internal buffer is sized max(N, k, 4096)."""
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    T, Y = draw_base(max(N, k, BUFFER_MIN), rng)
    return couple(law, T, Y, N, k)


def truncation_residual(d: CoupledDisorder, k: int) -> float:
    """Sum of discrete rescaled maxima of rank > k; identically 0 for k >= N-1."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return float(np.sum(d.M_disc[k:]))


def continuum_residual(d: CoupledDisorder, k: int) -> tuple[float, float]:
    """Continuum mark mass beyond rank k within the buffer, plus a tail bound.

    The bound (alpha/(1-alpha)) * T_last^(1 - 1/alpha) dominates the mass the
    finite buffer cannot see, by comparing the summable T_i^(-1/alpha) tail
    with its integral.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    partial = float(np.sum(d.M_inf[k:]))
    a = d.law.alpha
    t_last = float(d.T[-1])
    bound = (a / (1.0 - a)) * t_last ** (1.0 - 1.0 / a)
    return partial, bound
