"""Stretched-exponential inter-arrival laws with a possible atom at infinity.

Provides exact construction of K(n) = C n^rho exp(-c n^gamma) on a truncated
support with a certified tail-mass budget, exponential tilting into a
terminating law, the renewal function by convolution recursion, and the
heavy-tail convolution diagnostics q^{*m}(n)/q(n) -> m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

#: Fraction of the finite mass allowed beyond the truncated support.
TAIL_BUDGET = 1e-10

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class RenewalLaw:
    """Inter-arrival law on {1..n_max} plus an atom K_inf at infinity.

    K[n] is the mass at n (index 0 is a zero sentinel).  The shape parameters
    (gamma, c, rho) and the normalizing constant are kept so diagnostics can
    check log K(n)/n^gamma -> -c against the closed form.
    """

    gamma: float
    c: float
    rho: float
    K: np.ndarray
    K_inf: float
    n_max: int
    norm_const: float

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0,1), got {self.gamma}")
        if self.c <= 0.0:
            raise ValueError(f"c must be positive, got {self.c}")
        # K_inf can round to exactly 1.0 under extreme tilts while the finite
        # part stays positive, so the closed upper endpoint is tolerated
        if not 0.0 <= self.K_inf <= 1.0:
            raise ValueError(f"K_inf must lie in [0,1], got {self.K_inf}")
        if self.K.shape[0] != self.n_max + 1 or self.K[0] != 0.0:
            raise ValueError("K must be indexed 0..n_max with K[0] == 0")
        if np.any(self.K[1:] <= 0.0):
            raise ValueError("K(n) must be positive up to n_max (underflow? reduce n_max)")
        total = float(np.sum(self.K)) + self.K_inf
        if abs(total - 1.0) > _NORM_TOL:
            raise ValueError(f"K must sum to 1 with the atom, off by {total - 1.0:.3e}")
        # closed form gives |log K(n)/n^g + c| == |rho log n + log C| / n^g exactly
        n = self.n_max
        lhs = abs(math.log(self.K[n]) / n**self.gamma + self.c)
        rhs = (abs(self.rho) * math.log(n) + abs(math.log(self.norm_const))) / n**self.gamma
        if lhs > rhs * (1.0 + 1e-9) + 1e-12:
            raise ValueError("K table is inconsistent with its stretched-exponential shape")
        self.K.setflags(write=False)

    @property
    def q(self) -> np.ndarray:
        """Conditional law on finite values, q = K / (1 - K_inf)."""
        if self.K_inf >= 1.0:
            raise ValueError("conditional law undefined: the atom carries all mass")
        return self.K / (1.0 - self.K_inf)


def build_law(gamma: float, c: float, rho: float = 0.0, K_inf_target: float = 0.0,
              n_max: int = 100_000) -> RenewalLaw:
    """Normalize K(n) = C n^rho exp(-c n^gamma) over 1..n_max to mass 1 - K_inf.

    The analytic tail mass beyond n_max (an integral bound, valid where the
    density is decreasing) must stay below TAIL_BUDGET of the finite mass,
    otherwise n_max is too small and construction fails.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0,1), got {gamma}")
    if c <= 0.0:
        raise ValueError(f"c must be positive, got {c}")
    if not 0.0 <= K_inf_target < 1.0:
        raise ValueError(f"K_inf_target must lie in [0,1), got {K_inf_target}")
    if n_max < 10:
        raise ValueError(f"n_max must be >= 10, got {n_max}")
    if rho > 0.0 and c * gamma * n_max**gamma <= rho:
        raise ValueError("density not yet decreasing at n_max; enlarge n_max")

    n = np.arange(0, n_max + 1, dtype=float)
    logk = np.full(n_max + 1, -np.inf)
    logk[1:] = rho * np.log(n[1:]) - c * n[1:] ** gamma
    m = logk[1:].max()
    raw_sum = float(np.exp(logk[1:] - m).sum())
    log_norm = math.log1p(-K_inf_target) - (m + math.log(raw_sum))
    K = np.exp(logk + log_norm)
    K[0] = 0.0
    if np.any(K[1:] == 0.0):
        raise ValueError("K underflows before n_max; reduce n_max or c")
    # exact renormalization so the law invariant holds to 1e-12
    K[1:] *= (1.0 - K_inf_target) / K[1:].sum()

    norm_const = math.exp(log_norm)
    tail_integral, _ = integrate.quad(
        lambda x: x**rho * math.exp(-c * x**gamma), n_max, np.inf, limit=200
    )
    if norm_const * tail_integral > TAIL_BUDGET * (1.0 - K_inf_target):
        raise ValueError(
            f"tail mass beyond n_max is {norm_const * tail_integral:.3e}, "
            f"over budget {TAIL_BUDGET * (1.0 - K_inf_target):.3e}; n_max too small"
        )
    return RenewalLaw(gamma=gamma, c=c, rho=rho, K=K, K_inf=K_inf_target,
                      n_max=n_max, norm_const=norm_const)


def tilt(law: RenewalLaw, h: float) -> RenewalLaw:
    """Scale the finite part by exp(-h), moving mass to the atom at infinity.

    h > 0 turns a proper law into a terminating one; h < 0 is allowed only
    while the finite mass stays below 1.
    """
    scale = math.exp(-h)
    finite = scale * (1.0 - law.K_inf)
    if finite > 1.0 + _NORM_TOL:
        raise ValueError(f"tilt by h={h} would give finite mass {finite} > 1")
    K = law.K * scale
    K[0] = 0.0
    return RenewalLaw(gamma=law.gamma, c=law.c, rho=law.rho, K=K,
                      K_inf=1.0 - min(finite, 1.0), n_max=law.n_max,
                      norm_const=law.norm_const * scale)


def renewal_function(law: RenewalLaw, n: int) -> np.ndarray:
    """Return the table u(0..n) of visit probabilities, u(0) = 1.

    u(m) = sum_{j=1}^{m} K(j) u(m-j): each value conditions on the first
    arrival, so everything stays in (0,1].
    """
    if n > law.n_max:
        raise ValueError(f"horizon {n} exceeds law support n_max={law.n_max}")
    if n < 0:
        raise ValueError("horizon must be >= 0")
    u = np.empty(n + 1)
    u[0] = 1.0
    K = law.K
    for m in range(1, n + 1):
        u[m] = K[1 : m + 1] @ u[m - 1 :: -1]
    return u


def subexp_diagnostics(law: RenewalLaw, n: int, k_shift: int = 1) -> dict[str, float]:
    """Heavy-tail convolution ratios at n for q = K/(1-K_inf).

    Returns q(n+k)/q(n), q*2(n)/q(n), q*3(n)/q(n) (direct summation) and
    u(n)/K(n); the first three approach 1, 2, 3 and the last 1/K_inf^2 for
    terminating laws.
    """
    if n + k_shift > law.n_max:
        raise ValueError(f"n + k_shift = {n + k_shift} exceeds n_max={law.n_max}")
    if n < 3:
        raise ValueError("need n >= 3 for the convolution ratios")
    q = law.q[1 : n + 1]  # q[i] = q(i+1)
    conv2 = np.convolve(q, q)          # index j <-> mass at j+2
    q2_at_n = float(conv2[n - 2])
    conv3 = np.convolve(conv2[: n + 1], q)  # index j <-> mass at j+3
    q3_at_n = float(conv3[n - 3])
    u = renewal_function(law, n)
    qn = float(q[n - 1])
    return {
        "shift_ratio": float(law.q[n + k_shift] / qn),
        "conv2_ratio": q2_at_n / qn,
        "conv3_ratio": q3_at_n / qn,
        "u_over_K": float(u[n] / law.K[n]),
    }


def convolution_power(law: RenewalLaw, m: int, n: int) -> np.ndarray:
    """Table K^{*m}(0..n) by repeated direct convolution (test oracle)."""
    base = np.zeros(n + 1)
    base[1 : min(law.n_max, n) + 1] = law.K[1 : min(law.n_max, n) + 1]
    out = np.zeros(n + 1)
    out[0] = 1.0
    for _ in range(m):
        out = np.convolve(out, base)[: n + 1]
    return out
