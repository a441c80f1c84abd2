"""Eigenvalue-based conditions: Dirichlet eigenvalues, Faber-Krahn,
Poincare and Nash constants, and Dirichlet heat kernels on balls."""

from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .dirichlet import DENSE_MAX, DirichletForm, _set_mask, energy
from .mmspace import Ball, ball_mask, sweep_radii

__all__ = [
    "lambda1",
    "fk_constants",
    "poincare_constant",
    "poincare_sweep",
    "nash_check",
    "dirichlet_heat_kernel",
    "heat_bound_fit",
    "chained_heat_A",
    "NU_MAX",
]

NU_MAX = 0.99
NU_MIN = 0.01


def lambda1(form: DirichletForm, D) -> float:
    """Smallest Dirichlet eigenvalue of ``D``.

    ``min E(u, u) / ||u||_2^2`` over ``u`` supported in ``D``: the smallest
    eigenvalue of ``K[D, D]`` against ``diag(mu[D])``.
    """
    idx = np.flatnonzero(_set_mask(form.space, D))
    if idx.size == 0:
        raise ValueError("lambda1 requires a non-empty set")
    mu = form.space.mu[idx]
    if idx.size <= DENSE_MAX:
        KD = form.K_dense[np.ix_(idx, idx)]
        s = 1.0 / np.sqrt(mu)
        S = KD * s[:, None] * s[None, :]
        val = scipy.linalg.eigh(S, eigvals_only=True, subset_by_index=[0, 0])[0]
    else:
        KD = form.K[idx][:, idx]
        s = sp.diags(1.0 / np.sqrt(mu))
        S = (s @ KD @ s).tocsc()
        v0 = np.ones(idx.size)
        val = eigsh(S, k=1, sigma=-1e-8, which="LM", v0=v0, tol=1e-12,
                    return_eigenvectors=False)[0]
    return float(max(val, 0.0))


def fk_constants(form: DirichletForm, pairs: Sequence) -> dict:
    """Fit the Faber-Krahn constants ``(C_F, nu)`` on ``(B, D)`` pairs.

    The inequality ``lambda1(D) >= C_F**-1 / w(B) * (mu(B)/mu(D))**nu`` is
    fitted by taking ``nu`` as the least-squares slope of
    ``log(lambda1(D) w(B))`` against ``log(mu(B)/mu(D))`` (clamped to
    ``[0.01, 0.99]``), then the largest ``C_F**-1`` valid on every pair.
    When all pairs have ``D = B`` the slope is undetermined and ``nu`` is
    set to ``0.5``.

    Returns
    -------
    dict
        ``{"C_F", "inv_C_F", "nu", "pass", "notes", "witness"}``; the verdict
        fails when some ``lambda1(D) = 0``.
    """
    sp_ = form.space
    lam, wB, ratio = [], [], []
    for B, D in pairs:
        bm = ball_mask(sp_, B)
        dm = _set_mask(sp_, D)
        if np.any(dm & ~bm) or not dm.any():
            raise ValueError("each D must be a non-empty subset of its ball")
        lam.append(lambda1(form, dm))
        wB.append(sp_.w_ball(B))
        ratio.append(sp_.mu[bm].sum() / sp_.mu[dm].sum())
    lam, wB, ratio = map(np.asarray, (lam, wB, ratio))
    notes = []
    tol = 1e-12
    if np.any(lam <= tol):
        k = int(np.argmin(lam))
        B, D = pairs[k]
        return {"C_F": math.inf, "inv_C_F": 0.0, "nu": None, "pass": False,
                "notes": ["zero Dirichlet eigenvalue"],
                "witness": {"pair": k, "center": B.center, "R": B.radius,
                            "D": np.flatnonzero(_set_mask(sp_, D)).tolist()}}
    x = np.log(ratio)
    y = np.log(lam * wB)
    if np.ptp(x) > 0:
        nu = float(np.polyfit(x, y, 1)[0])
    else:
        nu = 0.5
        notes.append("all sets equal their balls; nu defaulted to 0.5")
    if nu >= 1:
        notes.append(f"fitted nu = {nu:.4g} clamped to {NU_MAX}")
        nu = NU_MAX
    elif nu <= 0:
        notes.append(f"fitted nu = {nu:.4g} clamped to {NU_MIN}")
        nu = NU_MIN
    c = lam * wB / ratio ** nu
    k = int(np.argmin(c))
    B, D = pairs[k]
    return {"C_F": float(1 / c[k]), "inv_C_F": float(c[k]), "nu": nu,
            "pass": True, "notes": notes,
            "witness": {"pair": k, "center": B.center, "R": B.radius,
                        "D": np.flatnonzero(_set_mask(sp_, D)).tolist()}}


def _restricted_energy(form: DirichletForm, idx: np.ndarray) -> np.ndarray:
    """Energy of functions on ``idx`` counting only edges and jump pairs with
    both endpoints in ``idx``."""
    C = form.conductance[idx][:, idx]
    J = form.jump_mass[idx][:, idx]
    deg_c = np.asarray(C.sum(axis=1)).ravel()
    deg_j = np.asarray(J.sum(axis=1)).ravel()
    return (np.diag(deg_c) - C.toarray()) + 2.0 * (np.diag(deg_j) - J.toarray())


def _pi_eigen(form: DirichletForm, bidx: np.ndarray, kidx: np.ndarray,
              tol: float = 1e-10) -> float:
    """Largest generalized eigenvalue of the variance on ``bidx`` against the
    energy on ``kidx`` (without the ``w(B)`` normalization)."""
    mu = form.space.mu
    Kk = _restricted_energy(form, kidx)
    pos = np.searchsorted(kidx, bidx)
    mB = mu[bidx]
    # variance form on kidx coordinates, supported on bidx
    V = np.zeros_like(Kk)
    V[np.ix_(pos, pos)] = np.diag(mB) - np.outer(mB, mB) / mB.sum()
    evals, evecs = np.linalg.eigh(Kk)
    scale = max(1.0, float(np.abs(evals).max()))
    null = evals <= tol * scale
    Z = evecs[:, null]
    if Z.size:
        vz = np.einsum("ij,ij->j", Z, V @ Z)
        if np.any(vz > tol * max(1.0, mB.sum())):
            return math.inf
    Q = evecs[:, ~null]
    if Q.shape[1] == 0:
        return 0.0
    # in the eigenbasis the energy is diagonal; whiten it
    Wq = Q / np.sqrt(evals[~null])[None, :]
    M = Wq.T @ V @ Wq
    return float(max(np.linalg.eigvalsh(0.5 * (M + M.T))[-1], 0.0))


def poincare_constant(form: DirichletForm, B: Ball, kappa: float = 1.0) -> float:
    """Poincare constant of ``B`` with energy taken over ``kappa B``.

    Returns ``max_u int_B (u - u_B)^2 dmu / (w(B) E_{kappa B}(u))`` where
    ``E_{kappa B}`` keeps the local edges and jump pairs inside ``kappa B``;
    ``inf`` when some energy-null function on ``kappa B`` is non-constant on
    ``B``.
    """
    if kappa < 1:
        raise ValueError("kappa must be at least 1")
    sp_ = form.space
    bidx = np.flatnonzero(ball_mask(sp_, B))
    kidx = np.flatnonzero(ball_mask(sp_, B.scaled(kappa)))
    return _pi_eigen(form, bidx, kidx) / sp_.w_ball(B)


def poincare_sweep(form: DirichletForm, kappa: float = 1.0,
                   horizon: Optional[float] = None, centers=None) -> dict:
    """Max Poincare constant over grid balls with radius below
    ``horizon / kappa`` (``horizon`` defaults to the diameter)."""
    sp_ = form.space
    hz = sp_.diam if horizon is None else horizon
    radii = sweep_radii(sp_, hz / kappa)
    centers = range(sp_.n) if centers is None else centers
    cache = {}
    best, wit = 0.0, None
    for x in centers:
        for R in radii:
            B = Ball(x, R)
            bidx = np.flatnonzero(ball_mask(sp_, B))
            kidx = np.flatnonzero(ball_mask(sp_, B.scaled(kappa)))
            key = (bidx.tobytes(), kidx.tobytes())
            if key not in cache:
                cache[key] = _pi_eigen(form, bidx, kidx)
            val = cache[key] / sp_.w_ball(B)
            if wit is None or val > best:
                best, wit = val, {"center": int(x), "R": float(R)}
    return {"C": float(best), "kappa": kappa, "witness": wit}


def nash_check(form: DirichletForm, B: Ball, u_samples, nu: float) -> dict:
    """Worst ball-Nash ratio over samples supported in ``B``.

    ``||u||_2^(2+2nu) mu(B)^nu / (||u||_1^(2nu) (||u||_2^2 + w(B) E(u, u)))``
    """
    sp_ = form.space
    bm = ball_mask(sp_, B)
    U = np.atleast_2d(np.asarray(u_samples, dtype=float))
    mB = sp_.mu[bm].sum()
    wB = sp_.w_ball(B)
    best, wit = 0.0, None
    for s, u in enumerate(U):
        if np.any(u[~bm] != 0):
            raise ValueError(f"sample {s} is not supported in the ball")
        if not np.any(u):
            raise ValueError(f"sample {s} is the zero function")
        l2 = float(np.sum(u * u * sp_.mu))
        l1 = float(np.sum(np.abs(u) * sp_.mu))
        E = energy(form, u)[2]
        val = l2 ** (1 + nu) * mB ** nu / (l1 ** (2 * nu) * (l2 + wB * E))
        if wit is None or val > best:
            best, wit = val, {"sample": s}
    return {"C": float(best), "witness": wit}


def dirichlet_heat_kernel(form: DirichletForm, B, t: float):
    """Dirichlet heat kernel of ``B`` at time ``t``.

    ``p_t(x, y) = exp(-t L_B)[x, y] / mu(y)`` where ``L_B = mu^-1 K[B, B]``;
    computed from the symmetric matrix ``mu^-1/2 K[B, B] mu^-1/2``.

    Returns
    -------
    idx : ndarray
        Points of ``B`` (row/column labels).
    P : ndarray, shape (|B|, |B|)
    """
    if not t > 0:
        raise ValueError("t must be positive")
    idx, evals, evecs, s = _heat_eig(form, B)
    P = (evecs * np.exp(-t * evals)[None, :]) @ evecs.T
    return idx, P * s[:, None] * s[None, :]


def _heat_eig(form, B):
    idx = np.flatnonzero(_set_mask(form.space, B))
    s = 1.0 / np.sqrt(form.space.mu[idx])
    S = form.K_dense[np.ix_(idx, idx)] * s[:, None] * s[None, :]
    evals, evecs = np.linalg.eigh(0.5 * (S + S.T))
    return idx, np.maximum(evals, 0.0), evecs, s


def heat_bound_fit(form: DirichletForm, balls: Iterable[Ball], nu: float,
                   times_per_ball: int = 40) -> dict:
    """Smallest ``C`` with ``sup p_t^B <= C / mu(B) (w(B)/t)^(1/nu)``.

    For each ball, ``t`` runs over a log grid from ``1e-3 w(B)`` to
    ``1e3 w(B)``; the on-diagonal maximum is used since the kernel is a
    positive semidefinite operator kernel.
    """
    sp_ = form.space
    best, wit = 0.0, None
    for B in balls:
        idx, evals, evecs, s = _heat_eig(form, B)
        mB = sp_.mu[idx].sum()
        wB = sp_.w_ball(B)
        ts = wB * np.logspace(-3, 3, times_per_ball)
        for t in ts:
            diag = (evecs ** 2 * np.exp(-t * evals)[None, :]).sum(axis=1) * s ** 2
            val = float(diag.max()) * mB * (t / wB) ** (1 / nu)
            if wit is None or val > best:
                best, wit = val, {"center": B.center, "R": B.radius, "t": float(t)}
    return {"C": best, "witness": wit}


def chained_heat_A(C_d: float, d1: float, C: float, nu: float) -> float:
    """``A = C_d**(-1/d1) (2C)**(1/(nu d1))``, the radius factor of the
    heat-kernel bound obtained by chaining reverse doubling with Nash."""
    return C_d ** (-1.0 / d1) * (2.0 * C) ** (1.0 / (nu * d1))
