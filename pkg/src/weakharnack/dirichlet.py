"""Mixed local/jump Dirichlet forms on finite metric measure spaces.

The local part is a set of symmetric edge conductances ``c_ij``; the jump
part is a symmetric matrix of pair masses ``Jm[i, j] = J({i}, {j})``.  The
energy is::

    E(u, v) = sum_edges c_ij (u_i - u_j)(v_i - v_j)
            + sum_{i != j} Jm_ij (u_i - u_j)(v_i - v_j)

where the jump sum runs over ordered pairs, so each unordered pair counts
twice.  The transition kernel is ``J(x, {y}) = Jm[x, y] / mu(x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .mmspace import Ball, MetricMeasureSpace, _as_mask, ball_mask, sweep_radii

__all__ = [
    "DirichletForm",
    "SingularSystemError",
    "energy",
    "apply_generator",
    "tail",
    "tail_w",
    "tj_constant",
    "jle_constant",
    "capacity",
    "cap_le_constant",
    "cutoff_family",
    "gcap_check",
    "gcap_sweep",
    "ep_check",
    "fit_ep_constant",
    "ep_constant_bound",
    "form_to_dict",
    "form_from_dict",
]

DENSE_MAX = 2000


class SingularSystemError(ValueError):
    """Raised when a restricted form matrix is singular."""


def _sym_sparse(n, entries, what):
    if entries is None or len(entries) == 0:
        return sp.csr_matrix((n, n))
    arr = np.asarray(entries, dtype=float).reshape(-1, 3)
    i = arr[:, 0].astype(int)
    j = arr[:, 1].astype(int)
    c = arr[:, 2]
    if np.any(i == j):
        raise ValueError(f"{what}: diagonal entry at index {int(i[i == j][0])}")
    if np.any(c < 0) or not np.all(np.isfinite(c)):
        raise ValueError(f"{what}: negative or non-finite weight")
    if np.any((i < 0) | (i >= n) | (j < 0) | (j >= n)):
        raise ValueError(f"{what}: index out of range")
    m = sp.coo_matrix((c, (i, j)), shape=(n, n)).tocsr()
    return (m + m.T).tocsr()


def _laplacian(m: sp.csr_matrix) -> sp.csr_matrix:
    deg = np.asarray(m.sum(axis=1)).ravel()
    return (sp.diags(deg) - m).tocsr()


@dataclass(frozen=True, eq=False)
class DirichletForm:
    """Immutable mixed Dirichlet form.

    Parameters
    ----------
    space : MetricMeasureSpace
    conductance : sparse (n, n)
        Symmetric edge conductances, zero diagonal.
    jump_mass : sparse (n, n)
        Symmetric pair masses ``J({i}, {j})``, zero diagonal.

    Use :meth:`from_edges` to build from ``(i, j, weight)`` lists where each
    unordered pair appears once.
    """

    space: MetricMeasureSpace
    conductance: sp.csr_matrix
    jump_mass: sp.csr_matrix
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        n = self.space.n
        for name in ("conductance", "jump_mass"):
            m = sp.csr_matrix(getattr(self, name), dtype=float)
            if m.shape != (n, n):
                raise ValueError(f"{name} has shape {m.shape}, expected {(n, n)}")
            if m.nnz and abs(m - m.T).max() > 0:
                raise ValueError(f"{name} is not symmetric")
            if m.diagonal().any():
                raise ValueError(f"{name} has a non-zero diagonal")
            if m.nnz and m.data.min() < 0:
                raise ValueError(f"{name} has negative entries")
            m.eliminate_zeros()
            object.__setattr__(self, name, m)

    @classmethod
    def from_edges(cls, space, local_edges=None, jump=None) -> "DirichletForm":
        n = space.n
        return cls(space, _sym_sparse(n, local_edges, "local_edges"),
                   _sym_sparse(n, jump, "jump"))

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def L_local(self) -> sp.csr_matrix:
        if "Ll" not in self._cache:
            self._cache["Ll"] = _laplacian(self.conductance)
        return self._cache["Ll"]

    @property
    def L_jump(self) -> sp.csr_matrix:
        """Matrix of the jump energy (twice the pair-mass Laplacian)."""
        if "Lj" not in self._cache:
            self._cache["Lj"] = 2.0 * _laplacian(self.jump_mass)
        return self._cache["Lj"]

    @property
    def K(self) -> sp.csr_matrix:
        """Energy matrix: ``E(u, v) = u @ K @ v``."""
        if "K" not in self._cache:
            self._cache["K"] = (self.L_local + self.L_jump).tocsr()
        return self._cache["K"]

    @property
    def K_dense(self) -> np.ndarray:
        if "Kd" not in self._cache:
            kd = self.K.toarray()
            kd.setflags(write=False)
            self._cache["Kd"] = kd
        return self._cache["Kd"]

    @property
    def J_dense(self) -> np.ndarray:
        if "Jd" not in self._cache:
            jd = self.jump_mass.toarray()
            jd.setflags(write=False)
            self._cache["Jd"] = jd
        return self._cache["Jd"]

    @property
    def adjacency(self) -> sp.csr_matrix:
        """Support graph of the form (local edges and jump pairs)."""
        if "adj" not in self._cache:
            a = (self.conductance + self.jump_mass).tocsr()
            a.data[:] = 1.0
            self._cache["adj"] = a
        return self._cache["adj"]

    def kernel_row(self, x: int) -> np.ndarray:
        """``J(x, {y})`` for every ``y``."""
        return self.J_dense[x] / self.space.mu[x]


def _vec(form, u):
    u = np.asarray(u, dtype=float)
    if u.shape != (form.n,):
        raise ValueError(f"function has shape {u.shape}, expected ({form.n},)")
    return u


def energy(form: DirichletForm, u, v=None):
    """Local, jump and total energy ``E(u, v)``.

    Returns
    -------
    tuple of float
        ``(local, jump, total)``.
    """
    u = _vec(form, u)
    v = u if v is None else _vec(form, v)
    loc = float(u @ (form.L_local @ v))
    jmp = float(u @ (form.L_jump @ v))
    return loc, jmp, loc + jmp


def apply_generator(form: DirichletForm, u) -> np.ndarray:
    """Discrete generator ``Lu`` with ``sum(Lu * phi * mu) = -E(u, phi)``."""
    u = _vec(form, u)
    return -(form.K @ u) / form.space.mu


def _set_mask(space, X) -> np.ndarray:
    if isinstance(X, Ball):
        return ball_mask(space, X)
    return _as_mask(space.n, X)


def tail(form: DirichletForm, v, U, Omega) -> float:
    """``T_{U,Omega}(v) = max_{x in U} sum_{y not in Omega} |v(y)| J(x, {y})``.

    ``U`` and ``Omega`` are balls, index sets or boolean masks.
    """
    sp_ = form.space
    Um = _set_mask(sp_, U)
    Om = _set_mask(sp_, Omega)
    if np.any(Um & ~Om):
        raise ValueError("tail requires U to be a subset of Omega")
    if not Um.any():
        return 0.0
    av = np.abs(_vec(form, v)) * ~Om
    vals = (form.jump_mass[Um] @ av) / sp_.mu[Um]
    return float(max(vals.max(), 0.0))


def tail_w(form: DirichletForm, v, center: int, R: float) -> float:
    """``Tail_w = sum_{z outside B(x0,R)} |v(z)| mu(z) / (V(x0,d) w(x0,d))``
    with ``d = d(x0, z)``."""
    sp_ = form.space
    v = _vec(form, v)
    d = sp_.dist[center]
    out = np.flatnonzero(d >= R)
    if out.size == 0:
        return 0.0
    order = np.argsort(d, kind="stable")
    ds = d[order]
    cm = np.concatenate([[0.0], np.cumsum(sp_.mu[order])])
    vol = cm[np.searchsorted(ds, d[out], side="left")]  # mass of {d < d(z)}
    w = sp_.w(center, d[out])
    return float(np.sum(np.abs(v[out]) * sp_.mu[out] / (vol * w)))


def tj_constant(form: DirichletForm) -> dict:
    """``max_{x, R} w(x, R) J(x, B(x, R)^c)`` over grid radii.

    The set ``B(x,R)^c = {d >= R}`` is constant on ``(d_k, d_{k+1}]`` while
    ``w`` increases, so the sup over real ``R`` is attained at distances,
    which belong to the grid.
    """
    sp_ = form.space
    if form.jump_mass.nnz == 0:
        return {"C": 0.0, "witness": None}
    radii = sweep_radii(sp_)
    best, wit = 0.0, None
    J = form.J_dense
    for x in range(sp_.n):
        d = sp_.dist[x]
        order = np.argsort(d, kind="stable")
        ds = d[order]
        suffix = np.concatenate([np.cumsum(J[x, order][::-1])[::-1], [0.0]])
        k = np.searchsorted(ds, radii, side="left")
        vals = sp_.w(x, radii) * suffix[k] / sp_.mu[x]
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, wit = float(vals[i]), {"center": x, "R": float(radii[i])}
    return {"C": best, "witness": wit}


def jle_constant(form: DirichletForm) -> float:
    """Smallest ``C`` with ``J(x, y) <= C / (V(x, d) w(x, d))`` pointwise,
    where ``J(x, y) = Jm[x, y] / (mu(x) mu(y))`` is the density against
    ``mu x mu`` and ``V(x, d)`` is the open-ball volume at ``d = d(x, y)``."""
    sp_ = form.space
    J = form.J_dense
    best = 0.0
    for x in range(sp_.n):
        d = sp_.dist[x]
        nz = np.flatnonzero(J[x])
        if nz.size == 0:
            continue
        order = np.argsort(d, kind="stable")
        cm = np.concatenate([[0.0], np.cumsum(sp_.mu[order])])
        vol = cm[np.searchsorted(d[order], d[nz], side="left")]
        dens = J[x, nz] / (sp_.mu[x] * sp_.mu[nz])
        best = max(best, float(np.max(dens * vol * sp_.w(x, d[nz]))))
    return best


# --- linear solves ---------------------------------------------------------

def check_solvable(form: DirichletForm, I: np.ndarray) -> None:
    """Raise :class:`SingularSystemError` unless every connected component of
    ``I`` (under the form's support graph) couples to the complement."""
    I = np.asarray(I, dtype=int)
    if I.size == 0:
        return
    inI = np.zeros(form.n, dtype=bool)
    inI[I] = True
    A = form.adjacency
    sub = A[I][:, I]
    ncomp, lab = connected_components(sub, directed=False)
    out = np.asarray(A[I][:, ~inI].sum(axis=1)).ravel() > 0
    for c in range(ncomp):
        if not out[lab == c].any():
            pts = I[lab == c]
            raise SingularSystemError(
                f"component containing point {int(pts[0])} ({pts.size} points) "
                "has no coupling to the boundary")


def solve_restricted(form: DirichletForm, I: np.ndarray, rhs: np.ndarray,
                     check: bool = True) -> np.ndarray:
    """Solve ``K[I, I] x = rhs``."""
    I = np.asarray(I, dtype=int)
    if I.size <= DENSE_MAX:
        KII = form.K_dense[np.ix_(I, I)]
        try:
            # positive definite exactly when every component couples out
            cf = scipy.linalg.cho_factor(KII)
        except np.linalg.LinAlgError:
            check_solvable(form, I)
            raise SingularSystemError("restricted form matrix is not positive definite")
        if check and np.min(np.diag(cf[0])) <= 1e-7 * np.sqrt(np.max(np.diag(KII))):
            check_solvable(form, I)
        return scipy.linalg.cho_solve(cf, rhs)
    if check:
        check_solvable(form, I)
    from scipy.sparse.linalg import spsolve
    KII = form.K[I][:, I].tocsc()
    return spsolve(KII, rhs)


def capacity(form: DirichletForm, A, Omega, tol: float = 1e-9):
    """Capacity of ``A`` relative to ``Omega`` and its equilibrium potential.

    Minimizes ``E(phi, phi)`` over ``phi = 1`` on ``A`` and ``0`` off
    ``Omega`` by solving the stationarity system on ``Omega \\ A``.

    Returns
    -------
    cap : float
    phi : ndarray
        Equilibrium potential, asserted to lie in ``[0, 1]``.
    """
    sp_ = form.space
    Am = _set_mask(sp_, A)
    Om = _set_mask(sp_, Omega)
    if not Am.any():
        raise ValueError("capacity requires a non-empty set A")
    if np.any(Am & ~Om):
        raise ValueError("capacity requires A to be a subset of Omega")
    phi = Am.astype(float)
    I = np.flatnonzero(Om & ~Am)
    if I.size:
        rhs = -(form.K[I] @ phi)
        phi[I] = solve_restricted(form, I, rhs)
    lo, hi = phi.min(), phi.max()
    if lo < -tol or hi > 1 + tol:
        raise AssertionError(f"equilibrium potential leaves [0, 1]: [{lo}, {hi}]")
    cap = float(phi @ (form.K @ phi))
    return cap, phi


def cap_le_constant(form: DirichletForm, sigma: float = 1 / 3,
                    horizon: Optional[float] = None, centers=None) -> dict:
    """``max cap((2/3)B, B) w(B) / mu(B)`` over grid balls with radius below
    ``sigma * horizon``."""
    sp_ = form.space
    hz = sp_.diam if horizon is None else horizon
    radii = sweep_radii(sp_, sigma * hz)
    centers = range(sp_.n) if centers is None else centers
    best, wit = 0.0, None
    if form.K.nnz == 0:
        return {"C": 0.0, "witness": None}
    for x in centers:
        for R in radii:
            B = Ball(x, R)
            cap, _ = capacity(form, B.scaled(2.0 / 3.0), B)
            val = cap * sp_.w_ball(B) / sp_.mu[ball_mask(sp_, B)].sum()
            if val > best:
                best, wit = float(val), {"center": int(x), "R": float(R)}
    return {"C": best, "witness": wit}


# --- generalized capacity and energy product -------------------------------

def cutoff_family(form: DirichletForm, B0: Ball, B: Ball,
                  include_equilibrium: bool = True):
    """Candidate cutoffs in ``cutoff(B0, B)``.

    Radial profiles ``min(1, max(0, (S - d)/(S - R)))**g`` for
    ``g in {1/2, 1, 2}``, the indicators of ``B0`` and ``B``, and (optionally)
    the equilibrium potential of ``cap(B0, B)``.

    Returns
    -------
    names : list of str
    Phi : ndarray, shape (n, m)
    """
    sp_ = form.space
    d = sp_.dist[B0.center]
    R, S = B0.radius, B.radius
    lin = np.clip((S - d) / (S - R), 0.0, 1.0)
    names, cols = [], []
    for g in (0.5, 1.0, 2.0):
        names.append(f"radial^{g:g}")
        cols.append(lin ** g)
    names += ["indicator_inner", "indicator_outer"]
    cols += [(d < R).astype(float), (d < S).astype(float)]
    if include_equilibrium and form.K.nnz:
        try:
            _, phi = capacity(form, B0, B)
            names.append("equilibrium")
            cols.append(phi)
        except SingularSystemError:
            pass
    return names, np.stack(cols, axis=1)


def _check_annulus(sp_, B0: Ball, B: Ball):
    if B0.center != B.center:
        raise ValueError("balls must be concentric")
    if not B0.radius < B.radius:
        raise ValueError("inner radius must be smaller than outer radius")
    m0, m1 = ball_mask(sp_, B0), ball_mask(sp_, B)
    if np.array_equal(m0, m1):
        raise ValueError(f"empty annulus: {B0} and {B} have the same points")
    return m0, m1


def gcap_check(form: DirichletForm, B0: Ball, B: Ball, u_samples) -> dict:
    """Generalized capacity constant for one annulus.

    For each sample ``u`` picks the candidate cutoff minimizing
    ``E(u^2 phi, phi)`` and reports
    ``C = max_u w(x0, r) E(u^2 phi, phi) / int_B u^2`` with ``r`` the radius
    gap.  The result is verified with the candidate family only.
    """
    sp_ = form.space
    _, m1 = _check_annulus(sp_, B0, B)
    U = np.atleast_2d(np.asarray(u_samples, dtype=float))
    names, Phi = cutoff_family(form, B0, B)
    KPhi = form.K @ Phi
    E = (U ** 2) @ (Phi * KPhi)  # (samples, candidates)
    mass = (U ** 2)[:, m1] @ sp_.mu[m1]
    r = B.radius - B0.radius
    wr = float(sp_.w(B0.center, r))
    best, wit = 0.0, None
    for s in range(U.shape[0]):
        if mass[s] <= 0:
            continue
        k = int(np.argmin(E[s]))
        val = wr * E[s, k] / mass[s]
        if wit is None or val > best:
            best, wit = float(val), {"sample": s, "cutoff": names[k],
                                     "center": B0.center, "R": B0.radius,
                                     "R_outer": B.radius}
    return {"C": best, "witness": wit, "method": "candidate cutoff family"}


def gcap_sweep(form: DirichletForm, u_samples, sigma: float = 1 / 3,
               horizon: Optional[float] = None, centers=None) -> dict:
    """Max of :func:`gcap_check` over concentric grid pairs ``R < S`` below
    ``sigma * horizon`` (pairs with equal point sets are skipped)."""
    sp_ = form.space
    hz = sp_.diam if horizon is None else horizon
    radii = sweep_radii(sp_, sigma * hz)
    centers = range(sp_.n) if centers is None else centers
    best = {"C": 0.0, "witness": None, "method": "candidate cutoff family"}
    for x in centers:
        for a in range(radii.size):
            for b in range(a + 1, radii.size):
                B0, B = Ball(x, radii[a]), Ball(x, radii[b])
                if np.array_equal(ball_mask(sp_, B0), ball_mask(sp_, B)):
                    continue
                res = gcap_check(form, B0, B, u_samples)
                if res["witness"] is not None and (
                        best["witness"] is None or res["C"] > best["C"]):
                    best = res
    return best


def _ep_terms(form, B0, B, Omega, U):
    """Per (sample, cutoff) pieces of the energy-product inequality."""
    sp_ = form.space
    Om = _set_mask(sp_, Omega)
    names, Phi = cutoff_family(form, B0, B)
    K = form.K
    lhs = np.empty((U.shape[0], Phi.shape[1]))
    mid = np.empty_like(lhs)
    cross = np.empty_like(lhs)
    Jout = form.jump_mass[:, np.flatnonzero(~Om)]
    for s, u in enumerate(U):
        Ku = K @ u
        uP = u[:, None] * Phi
        lhs[s] = np.sum(uP * (K @ uP), axis=0)
        mid[s] = 1.5 * ((u[:, None] * Phi ** 2).T @ Ku)
        jo = (Jout @ u[~Om]) * Om  # sum over y outside of Jm[x, y] u(y), x in Omega
        cross[s] = 3.0 * ((u * jo) @ (Phi ** 2))
    l2 = (U ** 2)[:, Om] @ sp_.mu[Om]
    return names, lhs, mid, cross, l2


def ep_check(form: DirichletForm, B0: Ball, B: Ball, Omega: Ball, u_samples,
             C: float, C0: float, tol: float = 1e-9) -> dict:
    """Energy-product inequality slack for one triple of concentric balls.

    For each sample the best candidate cutoff is used; the returned slack is
    the minimum over samples of ``RHS - LHS``.
    """
    sp_ = form.space
    _check_annulus(sp_, B0, B)
    if not (Omega.center == B.center and B.radius < Omega.radius):
        raise ValueError("Omega must be concentric with radius above B's")
    U = np.atleast_2d(np.asarray(u_samples, dtype=float))
    names, lhs, mid, cross, l2 = _ep_terms(form, B0, B, Omega, U)
    r = B.radius - B0.radius
    coef = C / float(sp_.w(B0.center, r)) * (Omega.radius / r) ** C0
    slack = mid + coef * l2[:, None] + cross - lhs
    per = slack.max(axis=1)
    s = int(np.argmin(per))
    return {"slack": float(per[s]), "pass": bool(per[s] >= -tol),
            "witness": {"sample": s, "cutoff": names[int(np.argmax(slack[s]))]}}


def fit_ep_constant(form: DirichletForm, triples, u_samples, C0: float = 0.0) -> float:
    """Smallest ``C`` making every triple/sample satisfy the energy-product
    inequality with the candidate family (used to calibrate on a holdout)."""
    sp_ = form.space
    U = np.atleast_2d(np.asarray(u_samples, dtype=float))
    need = 0.0
    for B0, B, Om in triples:
        names, lhs, mid, cross, l2 = _ep_terms(form, B0, B, Om, U)
        r = B.radius - B0.radius
        unit = (Om.radius / r) ** C0 / float(sp_.w(B0.center, r))
        for s in range(U.shape[0]):
            if l2[s] <= 0:
                continue
            gap = lhs[s] - mid[s] - cross[s]  # must be <= C * unit * l2
            need = max(need, float(np.min(gap)) / (unit * l2[s]))
    return need


def ep_constant_bound(form: DirichletForm, triples, C0: float = 0.0,
                      tol: float = 1e-9) -> dict:
    """Constant making the energy-product inequality hold for every ``u``.

    For a fixed cutoff ``phi`` the gap ``LHS - (mid + cross)`` is a quadratic
    form in ``u``; the terms coupling to values outside ``Omega`` cancel
    between the generator and cross terms, so it only sees ``u`` on
    ``Omega``.  The best single cutoff per triple then gives
    ``min_phi lambda_max(gap, unit * diag(mu))``, an upper bound for the
    per-sample constant fitted by :func:`fit_ep_constant`.

    Returns
    -------
    dict
        ``{"C", "witness": {"triple", "cutoff"}}``.
    """
    sp_ = form.space
    K = form.K_dense
    Jm = form.jump_mass.toarray()
    best, wit = 0.0, None
    for t, (B0, B, Om) in enumerate(triples):
        _check_annulus(sp_, B0, B)
        om = _set_mask(sp_, Om)
        idx = np.flatnonzero(om)
        r = B.radius - B0.radius
        unit = (Om.radius / r) ** C0 / float(sp_.w(B0.center, r))
        names, Phi = cutoff_family(form, B0, B)
        s = 1.0 / np.sqrt(unit * sp_.mu[idx])
        vals = []
        for k in range(Phi.shape[1]):
            ph = Phi[:, k]
            p2 = ph ** 2
            A = ph[:, None] * K * ph[None, :]
            A -= 0.75 * (p2[:, None] * K + K * p2[None, :])
            X = 3.0 * p2[:, None] * Jm * (om[:, None] & ~om[None, :])
            A -= 0.5 * (X + X.T)
            leak = np.abs(A[np.ix_(idx, np.flatnonzero(~om))]).max(initial=0.0)
            if leak > tol * max(1.0, np.abs(A).max()):
                raise AssertionError(f"gap form couples outside Omega ({leak})")
            S = A[np.ix_(idx, idx)] * s[:, None] * s[None, :]
            vals.append(float(np.linalg.eigvalsh(0.5 * (S + S.T))[-1]))
        k = int(np.argmin(vals))
        if wit is None or vals[k] > best:
            best, wit = max(vals[k], 0.0), {"triple": t, "cutoff": names[k]}
    return {"C": best, "witness": wit}


# --- serialization ---------------------------------------------------------

def _upper_entries(m: sp.csr_matrix):
    t = sp.triu(m, k=1).tocoo()
    order = np.lexsort((t.col, t.row))
    return [[int(t.row[k]), int(t.col[k]), float(t.data[k])] for k in order]


def form_to_dict(form: DirichletForm) -> dict:
    return {"local_edges": _upper_entries(form.conductance),
            "jump": _upper_entries(form.jump_mass)}


def form_from_dict(space: MetricMeasureSpace, obj: dict) -> DirichletForm:
    return DirichletForm.from_edges(space, obj.get("local_edges", []),
                                    obj.get("jump", []))
