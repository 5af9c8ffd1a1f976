"""Ground state of a directed polymer among heavy-tailed point charges.

Charges live in the diamond D = {(x,y): |y| <= min(x, 1-x)}; a path is
1-Lipschitz, pinned to height 0 at both ends, and pays the binary-entropy
rate of its slope.  Because that rate is convex, an optimal path is
piecewise linear with vertices on the charges it collects, which reduces
the ground-state problem to a DP over charges sorted by x.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

ON_PATH_TOL = 1e-12

ENUM_MAX = 20  # threshold enumeration cap; the DP handles anything larger
BISECT_TOL = 1e-9
_PRECOMP_MAX = 4096


def binary_entropy_rate(x):
    """e(x) = ((1+x)log(1+x) + (1-x)log(1-x))/2 on [-1,1], with 0 log 0 = 0.

    Even and convex with e(0) = 0 and e(+-1) = log 2; slopes outside [-1,1]
    are Lipschitz violations and rejected.  Uses log1p so the ~x^2/2 behavior
    near 0 survives the cancellation between the two terms.
    """
    arr = np.asarray(x, dtype=float)
    ax = np.abs(arr)
    if np.any(ax > 1.0):
        raise ValueError("slope outside [-1,1]")
    safe = np.where(ax == 1.0, 0.0, arr)
    val = 0.5 * ((1.0 + safe) * np.log1p(safe) + (1.0 - safe) * np.log1p(-safe))
    out = np.where(ax == 1.0, math.log(2.0), val)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PolymerEnvironment:
    """Charges (x_i, y_i, w_i) in the diamond with weights decreasing in i."""

    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    alpha: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if not (x.shape == y.shape == w.shape) or x.ndim != 1:
            raise ValueError("x, y, w must be 1-d arrays of equal length")
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0,2), got {self.alpha}")
        if x.size and np.any(np.abs(y) > np.minimum(x, 1.0 - x)):
            raise ValueError("charges must lie in the diamond |y| <= min(x,1-x)")
        if np.any(w <= 0.0) or (w.size > 1 and np.any(np.diff(w) >= 0.0)):
            raise ValueError("weights must be positive and strictly decreasing")
        for a in (x, y, w):
            a.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "w", w)

    @property
    def size(self) -> int:
        return int(self.x.size)

    @classmethod
    def sample(cls, alpha: float, k: int, rng: np.random.Generator) -> "PolymerEnvironment":
        """k charges: weights T_i^(-1/alpha) from cumulative exponentials,
        locations uniform on the diamond (by rejection from its bounding box)."""
        T = np.cumsum(rng.standard_exponential(k))
        xs = np.empty(k)
        ys = np.empty(k)
        have = 0
        while have < k:
            n = 2 * (k - have) + 8
            cx = rng.uniform(0.0, 1.0, n)
            cy = rng.uniform(-0.5, 0.5, n)
            ok = np.abs(cy) <= np.minimum(cx, 1.0 - cx)
            take = min(int(ok.sum()), k - have)
            xs[have : have + take] = cx[ok][:take]
            ys[have : have + take] = cy[ok][:take]
            have += take
        return cls(xs, ys, T ** (-1.0 / alpha), alpha)

    def truncate(self, k: int) -> "PolymerEnvironment":
        """Keep the k heaviest charges (a prefix, since weights decrease)."""
        return PolymerEnvironment(self.x[:k], self.y[:k], self.w[:k], self.alpha)

    def to_json(self) -> str:
        return json.dumps([[xi, yi, wi] for xi, yi, wi in zip(self.x, self.y, self.w)])

    @classmethod
    def from_json(cls, text: str, alpha: float) -> "PolymerEnvironment":
        rows = json.loads(text)
        arr = np.asarray(rows, dtype=float).reshape(-1, 3)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], alpha)


@dataclass(frozen=True)
class PolymerPath:
    """Piecewise-linear 1-Lipschitz path from (0,0) to (1,0)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 2:
            raise ValueError("vertices must be an (m,2) array with m >= 2")
        if tuple(v[0]) != (0.0, 0.0) or tuple(v[-1]) != (1.0, 0.0):
            raise ValueError("path must run from (0,0) to (1,0)")
        dx = np.diff(v[:, 0])
        dy = np.diff(v[:, 1])
        if np.any(dx <= 0.0):
            raise ValueError("x must be strictly increasing (no zero-length segments)")
        if np.any(np.abs(dy) > dx):
            raise ValueError("segments must satisfy |dy| <= dx (1-Lipschitz)")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def through(cls, points) -> "PolymerPath":
        """Path with the given interior vertices, endpoints added."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return cls(np.vstack([[0.0, 0.0], pts, [1.0, 0.0]]))

    @classmethod
    def flat(cls) -> "PolymerPath":
        return cls(np.array([[0.0, 0.0], [1.0, 0.0]]))

    def to_json(self) -> str:
        return json.dumps([[xi, yi] for xi, yi in self.vertices])


def path_entropy(p: PolymerPath) -> float:
    """Integral of the slope entropy rate: sum over segments of dx * e(dy/dx)."""
    dx = np.diff(p.vertices[:, 0])
    dy = np.diff(p.vertices[:, 1])
    return float(np.sum(dx * binary_entropy_rate(dy / dx)))


def env_energy(env: PolymerEnvironment, p: PolymerPath) -> float:
    """Total weight of charges on the path's graph (within 1e-12 vertically)."""
    if env.size == 0:
        return 0.0
    on_path = np.interp(env.x, p.vertices[:, 0], p.vertices[:, 1])
    return float(np.sum(env.w[np.abs(on_path - env.y) <= ON_PATH_TOL]))


def tent_path(x: float, y: float) -> PolymerPath:
    """Linear interpolation through the single interior vertex (x, y)."""
    return PolymerPath.through([[x, y]])


def tent_entropy(x: float, y: float) -> float:
    """Entropy of the tent through (x,y): x e(y/x) + (1-x) e(y/(1-x))."""
    if y == 0.0:
        return 0.0
    return x * binary_entropy_rate(y / x) + (1.0 - x) * binary_entropy_rate(y / (1.0 - x))


def _sorted_nodes(env: PolymerEnvironment):
    order = np.lexsort((env.y, env.x))
    return env.x[order], env.y[order], env.w[order], order


def _segment_entropy_matrix(xs, ys) -> np.ndarray:
    """Entropy cost between endpoint-augmented nodes; +inf where infeasible."""
    ex = np.concatenate(([0.0], xs, [1.0]))
    ey = np.concatenate(([0.0], ys, [0.0]))
    dx = ex[None, :] - ex[:, None]
    dy = ey[None, :] - ey[:, None]
    feasible = (dx > 0.0) & (np.abs(dy) <= dx)
    slope = np.where(feasible, dy / np.where(dx > 0.0, dx, 1.0), 0.0)
    cost = dx * binary_entropy_rate(slope)
    return np.where(feasible, cost, np.inf)


def _polymer_dp(xs, ys, ws, beta, seg=None):
    """Best-path DP over charges in x order; returns selected sorted indices.

    Ties broken by fewer vertices, then smallest predecessor.
    """
    m = xs.size
    best = np.empty(m + 2)
    best[0] = 0.0
    cnt = np.zeros(m + 2, dtype=np.int64)
    bp = np.zeros(m + 2, dtype=np.int64)
    ex = np.concatenate(([0.0], xs, [1.0]))
    ey = np.concatenate(([0.0], ys, [0.0]))
    for j in range(1, m + 2):
        if seg is not None:
            cost = seg[:j, j]
        else:
            dx = ex[j] - ex[:j]
            dy = ey[j] - ey[:j]
            feas = (dx > 0.0) & (np.abs(dy) <= dx)
            slope = np.where(feas, dy / np.where(dx > 0.0, dx, 1.0), 0.0)
            cost = np.where(feas, dx * binary_entropy_rate(slope), np.inf)
        gain = beta * ws[j - 1] if j <= m else 0.0
        cand = best[:j] + gain - cost
        vmax = cand.max()
        if vmax == -np.inf:
            best[j] = -np.inf
            bp[j] = 0
            continue
        tie = np.flatnonzero(cand == vmax)
        i = int(tie[np.argmin(cnt[tie])])
        best[j] = vmax
        cnt[j] = cnt[i] + (1 if j <= m else 0)
        bp[j] = i
    sel = []
    node = m + 1
    while node != 0:
        node = int(bp[node])
        if node != 0:
            sel.append(node - 1)
    return tuple(reversed(sel))


def _path_from_selection(xs, ys, sel) -> PolymerPath:
    if not sel:
        return PolymerPath.flat()
    pts = np.column_stack([xs[list(sel)], ys[list(sel)]])
    return PolymerPath.through(pts)


def solve_polymer(env: PolymerEnvironment, beta: float) -> tuple[PolymerPath, float]:
    """Ground-state path and value u = max(beta * collected - entropy) >= 0.

    Vertices are restricted to charge locations: straightening a path
    between the charges it touches never loses energy and never raises the
    entropy, by convexity of the slope rate.
    """
    if beta < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    if env.size == 0:
        return PolymerPath.flat(), 0.0
    xs, ys, ws, _ = _sorted_nodes(env)
    sel = _polymer_dp(xs, ys, ws, beta)
    path = _path_from_selection(xs, ys, sel)
    value = beta * float(np.sum(ws[list(sel)])) - path_entropy(path)
    return path, value


def solve_polymer_bruteforce(env: PolymerEnvironment, beta: float) -> tuple[PolymerPath, float]:
    """Exhaustive search over feasible charge chains (oracle, small k only)."""
    if env.size > ENUM_MAX:
        raise ValueError(f"brute force capped at {ENUM_MAX} charges")
    xs, ys, ws, _ = _sorted_nodes(env)
    m = xs.size
    seg = _segment_entropy_matrix(xs, ys)
    best = (-math.inf, 0, ())
    stack = [(0, 0.0, 0.0, ())]
    while stack:
        last, wsum, eo, sel = stack.pop()
        if math.isfinite(seg[last, m + 1]):
            val = beta * wsum - (eo + seg[last, m + 1])
            key = (-val, len(sel), sel)
            if key < (-best[0], best[1], best[2]):
                best = (val, len(sel), sel)
        for j in range(last, m):
            if math.isfinite(seg[last, j + 1]):
                stack.append((j + 1, wsum + ws[j], eo + seg[last, j + 1], sel + (j,)))
    sel = best[2]
    path = _path_from_selection(xs, ys, sel)
    value = beta * float(np.sum(ws[list(sel)])) - path_entropy(path)
    return path, value


def _polymer_dp_sums(ws, beta, seg):
    """Lean DP: (value, weight sum, entropy) of one maximizing chain."""
    m = ws.size
    best = np.empty(m + 2)
    wsum = np.empty(m + 2)
    esum = np.empty(m + 2)
    best[0] = 0.0
    wsum[0] = 0.0
    esum[0] = 0.0
    for j in range(1, m + 2):
        gain = beta * ws[j - 1] if j <= m else 0.0
        cand = best[:j] + gain - seg[:j, j]
        i = int(np.argmax(cand))
        best[j] = cand[i]
        wsum[j] = wsum[i] + (ws[j - 1] if j <= m else 0.0)
        esum[j] = esum[i] + seg[i, j]
    return float(best[m + 1]), float(wsum[m + 1]), float(esum[m + 1])


def polymer_beta_critical(env: PolymerEnvironment, method: str = "auto") -> float:
    """Threshold coupling below which the ground state stays flat.

    min over feasible nonempty chains of path entropy / collected weight;
    0 as soon as a charge sits on the axis, +inf for an empty environment.
    Ratio enumeration up to 20 charges; above that a parametric iteration on
    the chain DP lands on the minimizing ratio exactly ("bisect" forces
    plain bisection via the DP, tolerance 1e-9, for cross-validation).
    """
    if env.size == 0:
        return math.inf
    if np.any(np.abs(env.y) <= ON_PATH_TOL):
        return 0.0
    if method not in ("auto", "enumerate", "parametric", "bisect"):
        raise ValueError(f"unknown method {method!r}")
    xs, ys, ws, _ = _sorted_nodes(env)
    m = xs.size
    if method == "enumerate" or (method == "auto" and m <= ENUM_MAX):
        if m > ENUM_MAX:
            raise ValueError(f"enumeration capped at {ENUM_MAX} charges")
        seg = _segment_entropy_matrix(xs, ys)
        best = math.inf
        stack = [(0, 0.0, 0.0)]
        while stack:
            last, wsum, eo = stack.pop()
            if last != 0 and math.isfinite(seg[last, m + 1]):
                best = min(best, (eo + seg[last, m + 1]) / wsum)
            for j in range(last, m):
                if math.isfinite(seg[last, j + 1]):
                    stack.append((j + 1, wsum + ws[j], eo + seg[last, j + 1]))
        return best
    seg = _segment_entropy_matrix(xs, ys)
    tents = np.array([tent_entropy(x, y) for x, y in zip(xs, ys)])
    if method == "bisect":
        hi = float((tents / ws).min()) * (1.0 + 1e-6) + 1e-12
        lo = 0.0

        def nonflat(beta: float) -> bool:
            return len(_polymer_dp(xs, ys, ws, beta, seg)) > 0

        if not nonflat(hi):  # numerical guard; widen once
            hi *= 1.0 + 1e-3
        while hi - lo > BISECT_TOL:
            mid = 0.5 * (lo + hi)
            if nonflat(mid):
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)
    beta = float((tents / ws).min())
    for _ in range(100):
        value, wsum, esum = _polymer_dp_sums(ws, beta, seg)
        if wsum <= 0.0 or value <= 0.0:
            return beta
        new_beta = esum / wsum
        if new_beta >= beta - 1e-15 * max(1.0, beta):
            return new_beta
        beta = new_beta
    return beta
