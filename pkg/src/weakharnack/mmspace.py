"""Finite metric measure spaces: balls, volumes and doubling constants.

A space is a finite point set ``0..n-1`` with a metric table, positive
point masses and a scaling function ``w(x, r) = a(x) r**beta``.  Balls are
open: ``B(x, r) = {y : d(x, y) < r}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "Ball",
    "MetricMeasureSpace",
    "SpaceValidationError",
    "DegenerateGridError",
    "EmptyBallError",
    "ball_points",
    "ball_mask",
    "volume",
    "volume_table",
    "vd_constant",
    "rvd_constants",
    "scaling_envelope",
    "occupation_measure",
    "sweep_radii",
    "space_to_dict",
    "space_from_dict",
    "load_space",
    "save_space",
]


class SpaceValidationError(ValueError):
    """Raised when a metric table, measure or scaling prefactor is invalid."""


class DegenerateGridError(ValueError):
    """Raised when a sweep has too few radii to fit anything."""


class EmptyBallError(ValueError):
    """Raised when a ball has zero mass."""


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Ball:
    """Open ball identified by its center and radius (not by its point set)."""

    center: int
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", int(self.center))
        object.__setattr__(self, "radius", float(self.radius))

    def scaled(self, lam: float) -> "Ball":
        """Return ``lam * B``: same center, radius multiplied by ``lam``."""
        return Ball(self.center, lam * self.radius)


@dataclass(frozen=True, eq=False)
class MetricMeasureSpace:
    """Immutable finite metric measure space with scaling ``w = a(x) r**beta``.

    Parameters
    ----------
    dist : array_like, shape (n, n)
        Symmetric metric table with zero diagonal.
    mu : array_like, shape (n,)
        Positive point masses.
    w_a : array_like, shape (n,), optional
        Positive scaling prefactors ``a(x)``; defaults to ones.
    w_beta : float
        Scaling exponent ``beta > 0``.
    ultrametric : bool
        Whether the metric is claimed to be an ultrametric.
    validate : bool or {"full", "basic"}
        ``True``/``"full"`` checks every invariant including the triangle
        inequality; ``"basic"`` skips the cubic triangle scan.
    name : str
        Free-form identifier used in reports and witnesses.
    """

    dist: np.ndarray
    mu: np.ndarray
    w_a: np.ndarray = None
    w_beta: float = 2.0
    ultrametric: bool = False
    name: str = "space"
    validate: object = field(default=True, repr=False)
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        dist = _frozen(self.dist)
        mu = _frozen(self.mu)
        n = mu.shape[0] if mu.ndim == 1 else -1
        w_a = np.ones(n) if self.w_a is None else self.w_a
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "w_a", _frozen(w_a))
        object.__setattr__(self, "w_beta", float(self.w_beta))
        if self.validate:
            _validate(self, full=self.validate != "basic")
        pos = np.unique(dist[dist > 0])
        object.__setattr__(self, "radius_grid", _frozen(pos))

    @property
    def n(self) -> int:
        return int(self.mu.shape[0])

    @property
    def diam(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    @property
    def total_mass(self) -> float:
        return float(self.mu.sum())

    def w(self, x, r):
        """Scaling function ``w(x, r) = a(x) r**beta`` (broadcasts)."""
        return self.w_a[x] * np.power(r, self.w_beta)

    def w_ball(self, ball: Ball) -> float:
        return float(self.w(ball.center, ball.radius))


def _validate(space: MetricMeasureSpace, full: bool = True) -> None:
    d, mu, a = space.dist, space.mu, space.w_a
    if mu.ndim != 1 or mu.size == 0:
        raise SpaceValidationError("mu must be a non-empty 1-d array")
    n = mu.size
    if d.shape != (n, n):
        raise SpaceValidationError(f"dist has shape {d.shape}, expected {(n, n)}")
    if a.shape != (n,):
        raise SpaceValidationError(f"w.a has shape {a.shape}, expected {(n,)}")
    if not np.all(np.isfinite(d)):
        i, j = np.argwhere(~np.isfinite(d))[0]
        raise SpaceValidationError(f"dist[{i}][{j}] is not finite")
    bad = np.flatnonzero(~(mu > 0) | ~np.isfinite(mu))
    if bad.size:
        raise SpaceValidationError(f"mu[{bad[0]}] = {mu[bad[0]]} is not positive")
    bad = np.flatnonzero(~(a > 0) | ~np.isfinite(a))
    if bad.size:
        raise SpaceValidationError(f"w.a[{bad[0]}] = {a[bad[0]]} is not positive")
    if not space.w_beta > 0:
        raise SpaceValidationError(f"w.beta = {space.w_beta} is not positive")
    diag = np.flatnonzero(np.diag(d) != 0)
    if diag.size:
        i = diag[0]
        raise SpaceValidationError(f"dist[{i}][{i}] = {d[i, i]} != 0")
    asym = np.argwhere(d != d.T)
    if asym.size:
        i, j = asym[0]
        raise SpaceValidationError(f"dist[{i}][{j}] != dist[{j}][{i}]")
    nonpos = d <= 0
    np.fill_diagonal(nonpos, False)
    if np.any(nonpos):
        i, j = np.argwhere(nonpos)[0]
        raise SpaceValidationError(f"dist[{i}][{j}] = {d[i, j]} is not positive for i != j")
    if not full:
        return
    tol = 1e-12 * max(1.0, float(d.max()))
    for k in range(n):
        if space.ultrametric:
            bound = np.maximum(d[:, k][:, None], d[k, :][None, :])
            kind = "ultrametric inequality"
        else:
            bound = d[:, k][:, None] + d[k, :][None, :]
            kind = "triangle inequality"
        viol = np.argwhere(d > bound + tol)
        if viol.size:
            i, j = viol[0]
            raise SpaceValidationError(
                f"{kind} fails: dist[{i}][{j}] > bound through point {k}"
            )


def ball_mask(space: MetricMeasureSpace, ball: Ball) -> np.ndarray:
    """Boolean membership vector of the open ball."""
    return space.dist[ball.center] < ball.radius


def ball_points(space: MetricMeasureSpace, ball: Ball) -> np.ndarray:
    """Sorted indices of the points of ``ball`` (strict inequality)."""
    return np.flatnonzero(ball_mask(space, ball))


def volume(space: MetricMeasureSpace, center: int, r: float) -> float:
    """``V(x, r) = mu(B(x, r))``."""
    return float(space.mu[ball_mask(space, Ball(center, r))].sum())


def sweep_radii(space: MetricMeasureSpace, horizon: Optional[float] = None,
                strict: bool = True) -> np.ndarray:
    """Distinct positive distances and midpoints between consecutive ones.

    Every ball membership class ``(d_k, d_{k+1}]`` is represented by both its
    right end and its midpoint.  With ``horizon`` set, only radii below it
    (``strict``) or at most it are kept.
    """
    g = space.radius_grid
    if g.size == 0:
        return g.copy()
    mids = 0.5 * (g[1:] + g[:-1])
    radii = np.unique(np.concatenate([g, mids]))
    if horizon is not None:
        radii = radii[radii < horizon] if strict else radii[radii <= horizon]
    return radii


def _class_ends(space: MetricMeasureSpace, scales: Sequence[float]) -> np.ndarray:
    """Right ends of the radius intervals on which ``B(x, c r)`` is constant
    for every ``x`` and every ``c`` in ``scales``; the last entry is an
    arbitrary radius above all breakpoints."""
    g = space.radius_grid
    if g.size == 0:
        return np.array([1.0])
    br = np.unique(np.concatenate([g / c for c in scales]))
    return np.concatenate([br, [2.0 * br[-1]]])


def volume_table(space: MetricMeasureSpace, radii) -> np.ndarray:
    """``V(x, r)`` for every point ``x`` and every radius in ``radii``."""
    radii = np.asarray(radii, dtype=float)
    out = np.empty((space.n, radii.size))
    for x in range(space.n):
        order = np.argsort(space.dist[x], kind="stable")
        cm = np.concatenate([[0.0], np.cumsum(space.mu[order])])
        out[x] = cm[np.searchsorted(space.dist[x, order], radii, side="left")]
    return out


def vd_constant(space: MetricMeasureSpace, horizon: Optional[float] = None):
    """Volume doubling constant ``C_mu = sup V(x, 2r) / V(x, r)``.

    The supremum is taken over every real ``r > 0`` (with ``2r <= horizon``
    when a horizon is given).  Both volumes are piecewise constant in ``r``
    with breakpoints at ``d`` and ``d/2``, so evaluating at the right end of
    each interval is exact.

    Returns
    -------
    dict
        ``{"C_mu", "d2", "witness": {"center", "r"}}`` with ``d2 = log2 C_mu``.
    """
    radii = _class_ends(space, (1.0, 2.0))
    if horizon is not None:
        radii = radii[2 * radii <= horizon]
    best, wit = 1.0, None
    if radii.size:
        v1 = volume_table(space, radii)
        v2 = volume_table(space, 2 * radii)
        ratio = v2 / v1
        k = int(np.argmax(ratio))
        x, j = divmod(k, radii.size)
        if ratio[x, j] > best:
            best, wit = float(ratio[x, j]), {"center": x, "r": float(radii[j])}
    return {"C_mu": best, "d2": math.log2(best), "witness": wit}


def rvd_constants(space: MetricMeasureSpace, horizon: Optional[float] = None):
    """Reverse volume doubling fit ``V(x,R)/V(x,r) >= C_d (R/r)**d1``.

    ``d1`` is the least-squares slope of ``log(V(x,R)/V(x,r))`` against
    ``log(R/r)`` over all centers and grid pairs ``r < R < horizon``; ``C_d``
    is then the largest constant (capped at 1) making the inequality hold on
    every sampled pair.

    Raises
    ------
    DegenerateGridError
        If fewer than two grid radii lie below the horizon.
    """
    hz = space.diam if horizon is None else horizon
    radii = sweep_radii(space, hz)
    if radii.size < 2:
        raise DegenerateGridError(
            f"need at least 2 radii below horizon {hz}, found {radii.size}")
    vols = volume_table(space, radii)
    logv = np.log(vols)
    logr = np.log(radii)
    n = space.n
    # least-squares line through all (log(R/r), log ratio) points, accumulated
    # one inner radius at a time to keep memory linear in the grid size
    S = np.zeros(5)  # count, sum x, sum y, sum xx, sum xy
    for a in range(radii.size - 1):
        x = logr[a + 1:] - logr[a]
        y = logv[:, a + 1:] - logv[:, [a]]
        S += [n * x.size, n * x.sum(), y.sum(), n * (x * x).sum(),
              (y * x[None, :]).sum()]
    cnt, sx, sy, sxx, sxy = S
    d1 = float((cnt * sxy - sx * sy) / (cnt * sxx - sx * sx))
    best = (math.inf, None)
    for a in range(radii.size - 1):
        x = logr[a + 1:] - logr[a]
        slack = logv[:, a + 1:] - logv[:, [a]] - d1 * x[None, :]
        k = int(np.argmin(slack))
        if slack.flat[k] < best[0]:
            pt, b = divmod(k, x.size)
            best = (float(slack.flat[k]), (pt, a, a + 1 + b))
    pt, ia, ib = best[1]
    C_d = float(min(1.0, math.exp(best[0])))
    return {
        "C_d": C_d,
        "d1": d1,
        "pass": d1 > 0,
        "witness": {"center": int(pt), "r": float(radii[ia]),
                    "R": float(radii[ib])},
    }


def scaling_envelope(space: MetricMeasureSpace):
    """Envelope ``C1 (R/r)**b1 <= w(x,R)/w(y,r) <= C2 (R/r)**b2``.

    For ``w = a(x) r**beta`` the tight constants are ``b1 = b2 = beta``,
    ``C1 = min a / max a`` and ``C2 = max a / min a`` (pairs with
    ``d(x, y) <= R`` include all pairs once ``R >= diam``).
    """
    a = space.w_a
    lo, hi = float(a.min()), float(a.max())
    return {"C1": lo / hi, "C2": hi / lo, "beta1": space.w_beta,
            "beta2": space.w_beta}


def occupation_measure(space: MetricMeasureSpace, A, ball: Ball) -> float:
    """``omega_B(A) = mu(A & B) / mu(B)``; ``A`` is an index set or mask."""
    mask = ball_mask(space, ball)
    mB = space.mu[mask].sum()
    if mB <= 0:
        raise EmptyBallError(f"ball {ball} has zero mass")
    inA = _as_mask(space.n, A)
    return float(space.mu[mask & inA].sum() / mB)


def _as_mask(n: int, A) -> np.ndarray:
    A = np.asarray(A)
    if A.dtype == bool:
        if A.shape != (n,):
            raise ValueError("mask has wrong length")
        return A
    m = np.zeros(n, dtype=bool)
    m[A.astype(int)] = True
    return m


# --- serialization ---------------------------------------------------------

def space_to_dict(space: MetricMeasureSpace) -> dict:
    """JSON-ready dict; ultrametric codes are used when present in ``meta``."""
    out = {
        "n": space.n,
        "mu": space.mu.tolist(),
        "w": {"a": space.w_a.tolist(), "beta": space.w_beta},
        "flags": {"ultrametric": bool(space.ultrametric)},
        "name": space.name,
    }
    code = space.meta.get("ultrametric_code")
    if code is not None:
        out["ultrametric_code"] = code
    else:
        out["dist"] = space.dist.tolist()
    return out


def ultrametric_dist_from_code(code: dict) -> np.ndarray:
    """Dense product-ultrametric table from its compact code.

    ``code = {"q", "depth": [L_i], "alpha": [a_i], "digits": [[[...], ...]]}``
    where ``digits[x][i]`` is the base-``q`` leaf address of point ``x`` in
    factor ``i``.  The factor distance is ``q**(k/alpha_i)`` with ``k`` the
    number of levels above the deepest common ancestor; the product distance
    is the maximum over factors.
    """
    q = float(code["q"])
    depth = code["depth"]
    alpha = code["alpha"]
    digits = code["digits"]
    n = len(digits)
    d = np.zeros((n, n))
    for i, (L, al) in enumerate(zip(depth, alpha)):
        dig = np.array([digits[x][i] for x in range(n)], dtype=int).reshape(n, L)
        # length of the common prefix, one digit at a time to keep memory O(n^2)
        agree = np.ones((n, n), dtype=bool)
        prefix = np.zeros((n, n), dtype=np.int16)
        for level in range(L):
            agree &= dig[:, None, level] == dig[None, :, level]
            prefix += agree
        k = L - prefix
        di = np.where(k > 0, q ** (k / al), 0.0)
        np.maximum(d, di, out=d)
    return d


def space_from_dict(obj: dict, validate=True) -> MetricMeasureSpace:
    """Parse and validate a space dict (see :func:`space_to_dict`)."""
    try:
        n = int(obj["n"])
        mu = np.asarray(obj["mu"], dtype=float)
        w = obj.get("w", {})
        a = np.asarray(w.get("a", np.ones(n)), dtype=float)
        beta = float(w.get("beta", 2.0))
        flags = obj.get("flags", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise SpaceValidationError(f"malformed space file: {exc}") from exc
    meta = {}
    if "dist" in obj:
        dist = np.asarray(obj["dist"], dtype=float)
    elif "ultrametric_code" in obj:
        dist = ultrametric_dist_from_code(obj["ultrametric_code"])
        meta["ultrametric_code"] = obj["ultrametric_code"]
    else:
        raise SpaceValidationError("space file needs 'dist' or 'ultrametric_code'")
    if mu.shape != (n,):
        raise SpaceValidationError(f"mu has length {mu.size}, expected n = {n}")
    return MetricMeasureSpace(dist, mu, a, beta,
                              ultrametric=bool(flags.get("ultrametric", False)),
                              name=obj.get("name", "space"), validate=validate,
                              meta=meta)


def load_space(path, validate=True) -> MetricMeasureSpace:
    with open(path) as fh:
        return space_from_dict(json.load(fh), validate=validate)


def save_space(space: MetricMeasureSpace, path) -> None:
    with open(path, "w") as fh:
        json.dump(space_to_dict(space), fh)
