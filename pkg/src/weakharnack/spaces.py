"""Generators for example spaces and forms.

Each generator returns ``(space, form)``.  Besides the path and torus
substrates there are a stable-like jump torus, a product of ultrametric
trees whose jumps live on coordinate fibers, a dumbbell (two cliques and a
weak neck) and the Sierpinski gasket graph.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import shortest_path
import scipy.sparse as sp

from .dirichlet import DirichletForm
from .mmspace import MetricMeasureSpace

__all__ = [
    "GeneratorSpec",
    "make_path",
    "make_torus",
    "make_stable_torus",
    "make_ultrametric_product",
    "make_dumbbell",
    "make_gasket",
    "generate",
]

GASKET_MAX_LEVEL = 7


@dataclass
class GeneratorSpec:
    """Parameters for :func:`generate`.

    ``kind`` selects the generator; remaining fields are used as relevant:
    ``n`` (path/torus size), ``beta`` (scaling/jump exponent), ``local``
    (add nearest-neighbour edges to the stable torus), ``q``, ``depth``,
    ``alpha`` and ``a_bound`` (ultrametric product), ``clique``, ``neck``,
    ``eps`` (dumbbell), ``level`` (gasket) and ``seed``.
    """

    kind: str
    n: int = 64
    beta: Optional[float] = None
    local: bool = False
    q: int = 2
    depth: Sequence[int] = (4, 4)
    alpha: Sequence[float] = (1.0, 1.0)
    a_bound: float = 2.0
    clique: int = 20
    neck: int = 10
    eps: float = 1.0
    level: int = 3
    seed: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["depth"] = list(self.depth)
        d["alpha"] = list(self.alpha)
        return d


def _path_edges(n):
    return [(i, i + 1, 1.0) for i in range(n - 1)]


def make_path(n: int, beta: float = 2.0):
    """Path ``0..n-1`` with unit conductances, unit masses and ``w = r**beta``."""
    if n < 2:
        raise ValueError("path needs n >= 2")
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :]).astype(float)
    space = MetricMeasureSpace(dist, np.ones(n), None, beta, name=f"path{n}")
    return space, DirichletForm.from_edges(space, _path_edges(n))


def _cycle_dist(n):
    idx = np.arange(n)
    k = np.abs(idx[:, None] - idx[None, :])
    return np.minimum(k, n - k).astype(float)


def make_torus(n: int, beta: float = 2.0):
    """Cycle of ``n`` points (geodesic metric) with unit conductances."""
    if n < 2:
        raise ValueError("torus needs n >= 2")
    dist = _cycle_dist(n)
    space = MetricMeasureSpace(dist, np.ones(n), None, beta, name=f"torus{n}")
    edges = _path_edges(n)
    if n > 2:
        edges.append((n - 1, 0, 1.0))
    return space, DirichletForm.from_edges(space, edges)


def make_stable_torus(n: int, beta: float = 1.0, alpha: float = 1.0,
                      local: bool = False):
    """Cycle with pair masses ``d(x, y)**-(alpha + beta)`` and ``w = r**beta``.

    Parameters
    ----------
    n : int
        Number of points, at least 4.
    beta : float
        Jump index; the scaling function is ``r**beta``.
    alpha : float
        Volume growth exponent of the substrate (1 for a cycle).
    local : bool
        Also add unit nearest-neighbour conductances.
    """
    if n < 4:
        raise ValueError("stable torus needs n >= 4")
    if not alpha + beta > 0 or not beta > 0:
        raise ValueError("need beta > 0 and alpha + beta > 0")
    dist = _cycle_dist(n)
    space = MetricMeasureSpace(dist, np.ones(n), None, beta,
                               name=f"stable_torus{n}")
    i, j = np.triu_indices(n, k=1)
    jump = np.stack([i, j, dist[i, j] ** (-(alpha + beta))], axis=1)
    edges = None
    if local:
        edges = _path_edges(n) + [(n - 1, 0, 1.0)]
    return space, DirichletForm.from_edges(space, edges, jump)


def make_ultrametric_product(q: int = 2, depth: Sequence[int] = (4, 4),
                             alpha: Sequence[float] = (1.0, 1.0),
                             beta: float = 1.0, a_bound: float = 2.0,
                             seed: int = 0):
    """Product of ultrametric trees with fiber-supported jumps.

    Factor ``i`` consists of the ``q**L_i`` leaves of a ``q``-ary tree of
    depth ``L_i`` with counting measure and distance ``q**(k/alpha_i)``, where
    ``k`` counts the levels above the deepest common ancestor.  The product
    carries the max metric and product measure.  The factor kernel is
    ``J_i(x, y) = d_i(x, y)**-(alpha_i + beta)`` and a pair of points gets
    jump mass ``J_i(x_i, y_i) mu_i(y_i) mu(x)`` when it differs in exactly
    coordinate ``i``; pairs differing in both coordinates get nothing.  The
    scaling function is ``a(x) r**beta`` with ``log a`` drawn uniformly from
    ``[-log a_bound, log a_bound]``.
    """
    depth = tuple(int(L) for L in depth)
    alpha = tuple(float(a) for a in alpha)
    if q < 2 or any(L < 1 for L in depth) or len(depth) != len(alpha):
        raise ValueError("need q >= 2, depths >= 1 and one alpha per factor")
    if not beta > 0 or any(a <= 0 for a in alpha) or not a_bound >= 1:
        raise ValueError("need beta > 0, alpha_i > 0 and a_bound >= 1")
    leaves = [list(itertools.product(range(q), repeat=L)) for L in depth]
    points = list(itertools.product(*leaves))
    n = len(points)
    code = {"q": q, "depth": list(depth), "alpha": list(alpha),
            "digits": [[list(c) for c in p] for p in points]}
    from .mmspace import ultrametric_dist_from_code
    dist = ultrametric_dist_from_code(code)
    # factor distances, recomputed per coordinate for the fiber masses
    sizes = [q ** L for L in depth]
    idx = np.array(np.unravel_index(np.arange(n), sizes)).T  # (n, factors)
    rng = np.random.default_rng(seed)
    a = np.exp(rng.uniform(-math.log(a_bound), math.log(a_bound), size=n))
    mu = np.ones(n)
    space = MetricMeasureSpace(dist, mu, a, beta, ultrametric=True,
                               name=f"ultra_q{q}_d{'x'.join(map(str, depth))}",
                               validate="basic" if n > 2048 else True,
                               meta={"ultrametric_code": code})
    rows, cols, vals = [], [], []
    for f, (L, al) in enumerate(zip(depth, alpha)):
        leaf = np.array(leaves[f])
        same = leaf[:, None, :] == leaf[None, :, :]
        k = L - np.cumprod(same, axis=2).sum(axis=2)
        df = float(q) ** (k / al)
        Jf = np.where(k > 0, df ** (-(al + beta)), 0.0)  # mu_f = counting
        others = [c for c in range(len(depth)) if c != f]
        for x in range(n):
            # partners: same in every other coordinate, different in f
            mask = np.all(idx[:, others] == idx[x, others], axis=1)
            ys = np.flatnonzero(mask & (idx[:, f] != idx[x, f]))
            ys = ys[ys > x]
            rows.append(np.full(ys.size, x))
            cols.append(ys)
            vals.append(Jf[idx[x, f], idx[ys, f]] * mu[ys] * mu[x])
    jump = np.stack([np.concatenate(rows), np.concatenate(cols),
                     np.concatenate(vals)], axis=1)
    return space, DirichletForm.from_edges(space, None, jump)


def make_dumbbell(clique: int = 20, neck: int = 10, eps: float = 1.0,
                  beta: float = 2.0):
    """Two ``clique``-cliques joined through a path of ``neck`` edges.

    Clique edges have unit conductance and the neck edges conductance
    ``eps``; the metric is the hop distance.
    """
    if clique < 3 or neck < 1 or not eps > 0:
        raise ValueError("need clique >= 3, neck >= 1 and eps > 0")
    m = clique
    n = 2 * m + neck - 1
    edges = []
    for off in (0, m + neck - 1):
        for i in range(m):
            for j in range(i + 1, m):
                edges.append((off + i, off + j, 1.0))
    chain = [m - 1] + list(range(m, m + neck - 1)) + [m + neck - 1]
    for a, b in zip(chain[:-1], chain[1:]):
        edges.append((a, b, eps))
    e = np.array(edges)
    adj = sp.coo_matrix((np.ones(len(e)), (e[:, 0].astype(int), e[:, 1].astype(int))),
                        shape=(n, n)).tocsr()
    dist = shortest_path(adj, method="D", directed=False, unweighted=True)
    space = MetricMeasureSpace(dist, np.ones(n), None, beta,
                               name=f"dumbbell{m}_{neck}_eps{eps:g}")
    return space, DirichletForm.from_edges(space, edges)


def _gasket_edges(level: int):
    s = 2 ** level
    tri = [((0, 0), (s, 0), (0, s))]
    for _ in range(level):
        nxt = []
        for a, b, c in tri:
            ab = ((a[0] + b[0]) // 2, (a[1] + b[1]) // 2)
            bc = ((b[0] + c[0]) // 2, (b[1] + c[1]) // 2)
            ca = ((c[0] + a[0]) // 2, (c[1] + a[1]) // 2)
            nxt += [(a, ab, ca), (ab, b, bc), (ca, bc, c)]
        tri = nxt
    edges = set()
    for a, b, c in tri:
        for p, q in ((a, b), (b, c), (c, a)):
            edges.add((min(p, q), max(p, q)))
    verts = sorted({v for e in edges for v in e})
    index = {v: i for i, v in enumerate(verts)}
    return len(verts), sorted((index[p], index[q]) for p, q in edges)


def make_gasket(level: int, beta: Optional[float] = None):
    """Level-``level`` Sierpinski gasket graph.

    Unit conductances, graph metric, degree measure and by default
    ``w = r**(log 5 / log 2)``.
    """
    if not 0 <= level <= GASKET_MAX_LEVEL:
        raise ValueError(f"gasket level must be in [0, {GASKET_MAX_LEVEL}]")
    beta = math.log(5) / math.log(2) if beta is None else beta
    n, pairs = _gasket_edges(level)
    e = np.array(pairs)
    adj = sp.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n)).tocsr()
    dist = shortest_path(adj, method="D", directed=False, unweighted=True)
    deg = np.asarray((adj + adj.T).sum(axis=1)).ravel()
    space = MetricMeasureSpace(dist, deg, None, beta, name=f"gasket{level}",
                               validate="basic" if n > 2048 else True)
    return space, DirichletForm.from_edges(space, [(i, j, 1.0) for i, j in pairs])


def generate(spec: GeneratorSpec):
    """Dispatch on ``spec.kind``."""
    k = spec.kind
    if k == "path":
        return make_path(spec.n, 2.0 if spec.beta is None else spec.beta)
    if k == "torus":
        return make_torus(spec.n, 2.0 if spec.beta is None else spec.beta)
    if k == "stable_torus":
        return make_stable_torus(spec.n, 1.0 if spec.beta is None else spec.beta,
                                 local=spec.local)
    if k == "ultrametric_product":
        return make_ultrametric_product(spec.q, spec.depth, spec.alpha,
                                        1.0 if spec.beta is None else spec.beta,
                                        spec.a_bound, spec.seed)
    if k == "dumbbell":
        return make_dumbbell(spec.clique, spec.neck, spec.eps,
                             2.0 if spec.beta is None else spec.beta)
    if k == "gasket":
        return make_gasket(spec.level, spec.beta)
    raise ValueError(f"unknown generator kind {k!r}")
