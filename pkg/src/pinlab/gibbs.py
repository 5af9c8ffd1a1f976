"""Pinning Gibbs measure on the rescaled zero set.

Exact log-space partition function by forward recursion, exact backward
sampling of the pinned configuration, and Monte Carlo estimation of
concentration probabilities with Wilson intervals.  All arithmetic is in
log space: site weights exp(beta*omega - h) overflow doubles for
heavy-tailed omega long before the recursion becomes expensive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .geometry import PinnedSet, hausdorff
from .renewal import RenewalLaw


@dataclass(frozen=True)
class PinningModel:
    """Renewal bridge over {0,1/N,...,1} reweighted by exp(beta*omega_n - h).

    With truncation k set, every omega outside the k largest values is
    replaced by 0 while the renewal prior is untouched.
    """

    law: RenewalLaw
    omega: np.ndarray
    beta: float
    h: float
    N: int
    k: int | None = None

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float)
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if om.shape != (self.N - 1,):
            raise ValueError(f"omega must have length N-1 = {self.N - 1}")
        if np.any(om < 0.0):
            raise ValueError("omega must be nonnegative")
        if self.beta < 0.0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.k is not None and self.k < 0:
            raise ValueError(f"truncation k must be >= 0, got {self.k}")
        om.setflags(write=False)
        object.__setattr__(self, "omega", om)

    @property
    def effective_omega(self) -> np.ndarray:
        """omega with everything outside the top-k values zeroed."""
        if self.k is None or self.k >= self.N - 1:
            return self.omega
        keep = np.argsort(-self.omega, kind="stable")[: self.k]
        out = np.zeros_like(self.omega)
        out[keep] = self.omega[keep]
        return out

    @property
    def site_log_weights(self) -> np.ndarray:
        """Per-site log factor beta*omega_n - h at interior sites n=1..N-1."""
        return self.beta * self.effective_omega - self.h


@dataclass(frozen=True)
class GibbsSample:
    """Grid-aligned pinned configuration, stored as indices n with point n/N."""

    indices: tuple[int, ...]
    N: int

    def __post_init__(self):
        if self.indices[0] != 0 or self.indices[-1] != self.N:
            raise ValueError("a sample must contain both endpoints 0 and N")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly increasing")

    @property
    def set(self) -> PinnedSet:
        return PinnedSet(np.asarray(self.indices, dtype=float) / self.N)

    def to_index_list(self) -> list[int]:
        return list(self.indices)


def forward_table(model: PinningModel) -> np.ndarray:
    """log Z_0..log Z_N where Z_n sums path weights of bridges ending at n.

    Z_0 = 1; interior Z_n carry the site weight at n, the endpoint N does
    not (the energy runs over n = 1..N-1 only).
    """
    N = model.N
    if N > model.law.n_max:
        raise ValueError(f"horizon N={N} exceeds law support n_max={model.law.n_max}")
    logK = np.full(N + 1, -np.inf)
    logK[1:] = np.log(model.law.K[1 : N + 1])
    site = model.site_log_weights
    logZ = np.empty(N + 1)
    logZ[0] = 0.0
    for n in range(1, N + 1):
        inner = logsumexp(logZ[:n] + logK[n:0:-1])
        logZ[n] = inner + (site[n - 1] if n < N else 0.0)
    return logZ


def log_partition(model: PinningModel) -> float:
    """log of the partition function (the normalizer over bridges)."""
    return float(forward_table(model)[model.N])


def set_log_weight(model: PinningModel, sample) -> float:
    """Unnormalized log weight of a configuration: renewal prior + site terms.

    A gap outside the law support carries K = 0 and yields -inf.
    """
    idx = sample.indices if isinstance(sample, GibbsSample) else tuple(sample)
    if idx[0] != 0 or idx[-1] != model.N:
        raise ValueError("configuration must contain 0 and N")
    gaps = np.diff(np.asarray(idx))
    if np.any(gaps > model.law.n_max):
        return -math.inf
    out = float(np.sum(np.log(model.law.K[gaps])))
    site = model.site_log_weights
    interior = np.asarray(idx[1:-1], dtype=int)
    if interior.size:
        out += float(np.sum(site[interior - 1]))
    return out


def exact_sample(model: PinningModel, rng: np.random.Generator,
                 table: np.ndarray | None = None) -> GibbsSample:
    """Draw exactly from the pinned Gibbs measure by backward decomposition.

    From n, the previous point is m with probability proportional to
    Z_m * K(n-m); iterating down to 0 gives an exact draw because each Z_m
    already accounts for everything left of m.
    """
    if table is None:
        table = forward_table(model)
    N = model.N
    logK = np.full(N + 1, -np.inf)
    logK[1:] = np.log(model.law.K[1 : N + 1])
    points = [N]
    n = N
    while n > 0:
        logits = table[:n] + logK[n:0:-1]
        p = np.exp(logits - logits.max())
        p /= p.sum()
        m = int(rng.choice(n, p=p))
        points.append(m)
        n = m
    return GibbsSample(indices=tuple(reversed(points)), N=N)


def enumerate_distribution(model: PinningModel) -> dict[tuple[int, ...], float]:
    """Exact probabilities of every configuration (exponential in N; N <= 20)."""
    N = model.N
    if N > 20:
        raise ValueError("full enumeration is capped at N = 20")
    logw = {}
    for mask in range(1 << (N - 1)):
        idx = (0,) + tuple(i + 1 for i in range(N - 1) if mask >> i & 1) + (N,)
        logw[idx] = set_log_weight(model, idx)
    norm = logsumexp(np.array(list(logw.values())))
    return {idx: math.exp(lw - norm) for idx, lw in logw.items()}


@dataclass(frozen=True)
class ConcentrationEstimate:
    """Monte Carlo exceedance frequency with a 95% Wilson score interval."""

    estimate: float
    lo: float
    hi: float
    exceed: int
    n_samples: int


_Z95 = 1.959963984540054


def wilson_interval(successes: int, n: int, z: float = _Z95) -> tuple[float, float]:
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def concentration_probability(model: PinningModel, ref: PinnedSet, delta: float,
                              n_samples: int, rng: np.random.Generator,
                              table: np.ndarray | None = None) -> ConcentrationEstimate:
    """Estimate P(d_H(I, ref) > delta) under the model by exact sampling."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if table is None:
        table = forward_table(model)
    exceed = 0
    for _ in range(n_samples):
        s = exact_sample(model, rng, table)
        if hausdorff(s.set, ref) > delta:
            exceed += 1
    lo, hi = wilson_interval(exceed, n_samples)
    return ConcentrationEstimate(exceed / n_samples, lo, hi, exceed, n_samples)
