"""Boundary value problems: f-harmonic solves, superharmonicity tests,
superharmonic samplers and mean exit times."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .dirichlet import DirichletForm, SingularSystemError, _set_mask, solve_restricted
from .mmspace import Ball, ball_mask, sweep_radii

__all__ = [
    "BoundaryValueProblem",
    "SingularSystemError",
    "solve_f_harmonic",
    "is_f_superharmonic",
    "sample_superharmonic",
    "mean_exit_time",
    "monte_carlo_exit_time",
    "exit_time_bounds_check",
    "exit_time_sweep",
]


@dataclass
class BoundaryValueProblem:
    """Find ``u`` with ``E(u, phi) = (f, phi)`` for ``phi`` supported in
    ``Omega`` and ``u = g`` off ``Omega``.

    ``f`` and ``g`` are full-length arrays; only ``f`` on ``Omega`` and ``g``
    off ``Omega`` are used.  ``None`` means zero.
    """

    omega: object
    f: Optional[np.ndarray] = None
    g: Optional[np.ndarray] = None


def solve_f_harmonic(form: DirichletForm, bvp: BoundaryValueProblem) -> np.ndarray:
    """Solve the boundary value problem by a restricted linear solve.

    Raises
    ------
    SingularSystemError
        If a component of ``Omega`` does not couple to the complement.
    """
    sp_ = form.space
    Om = _set_mask(sp_, bvp.omega)
    if not Om.any():
        raise ValueError("domain must be non-empty")
    n = sp_.n
    f = np.zeros(n) if bvp.f is None else np.asarray(bvp.f, dtype=float)
    g = np.zeros(n) if bvp.g is None else np.asarray(bvp.g, dtype=float)
    u = np.where(Om, 0.0, g)
    I = np.flatnonzero(Om)
    rhs = f[I] * sp_.mu[I] - form.K[I] @ u
    u[I] = solve_restricted(form, I, rhs)
    return u


def is_f_superharmonic(form: DirichletForm, u, Omega, f=None,
                       tol: float = 1e-9) -> dict:
    """Check ``E(u, e_x) >= f(x) mu(x)`` at every ``x`` in ``Omega``.

    Point indicators generate the cone of non-negative test functions
    supported in ``Omega``, so this is the full condition.  The tolerance
    is relative to the size of the terms involved.

    Returns
    -------
    dict
        ``{"ok", "slack", "witness"}`` with ``slack`` the minimum of
        ``E(u, e_x) - f(x) mu(x)`` and ``witness`` the point attaining it.
    """
    sp_ = form.space
    Om = _set_mask(sp_, Omega)
    u = np.asarray(u, dtype=float)
    f = np.zeros(sp_.n) if f is None else np.asarray(f, dtype=float)
    I = np.flatnonzero(Om)
    if I.size == 0:
        return {"ok": True, "slack": 0.0, "witness": None}
    Ku = form.K[I] @ u
    slack = Ku - f[I] * sp_.mu[I]
    scale = (abs(form.K[I]) @ np.abs(u)) + np.abs(f[I]) * sp_.mu[I]
    k = int(np.argmin(slack))
    ok = bool(np.all(slack >= -tol * np.maximum(scale, 1e-300) - 1e-15))
    return {"ok": ok, "slack": float(slack[k]), "witness": int(I[k])}


def sample_superharmonic(form: DirichletForm, Omega, f=None, seed=0,
                         noise_scale: Optional[float] = None,
                         exterior_scale: float = 1.0,
                         negative_far: bool = False,
                         negative_weight: Optional[float] = None,
                         return_parts: bool = False):
    """Draw a non-negative f-superharmonic function in ``Omega``.

    The right-hand side is ``g = max(f, 0) + noise`` with non-negative
    sparse noise (so ``g >= f``), the exterior data are non-negative and
    sparse, and the solve with right-hand side ``g`` is f-superharmonic and
    non-negative on ``Omega`` by the maximum principle.  With
    ``negative_far`` a harmonic function with negative exterior data on a
    random part of the complement is added with the largest weight keeping
    the result non-negative on ``Omega`` times ``negative_weight`` (a random
    factor in ``[0, 0.9]`` by default); this produces non-zero tails of the
    negative part.

    Both properties are asserted on the result.
    """
    sp_ = form.space
    rng = np.random.default_rng(seed)
    n = sp_.n
    Om = _set_mask(sp_, Omega)
    f = np.zeros(n) if f is None else np.asarray(f, dtype=float)
    scale = float(np.mean(np.abs(f[Om]))) + 1.0 if noise_scale is None else noise_scale
    keep = rng.random(n) < rng.uniform(0.1, 1.0)
    g = np.maximum(f, 0.0) + scale * rng.random(n) * keep
    ext_keep = rng.random(n) < rng.uniform(0.1, 1.0)
    h = exterior_scale * rng.random(n) * ext_keep * ~Om
    if negative_far and (~Om).any():
        far = ~Om & (rng.random(n) < 0.5)
        h = np.where(far, 0.0, h)
    u = solve_f_harmonic(form, BoundaryValueProblem(Om, g, h))
    if negative_far and (~Om).any():
        neg = -exterior_scale * rng.random(n) * far
        v = solve_f_harmonic(form, BoundaryValueProblem(Om, None, neg))
        vm = v[Om]
        if np.any(vm < 0):
            fac = rng.uniform(0.0, 0.9) if negative_weight is None else negative_weight
            if not 0 <= fac < 1:
                raise ValueError("negative_weight must lie in [0, 1)")
            t = np.min(u[Om][vm < 0] / -vm[vm < 0]) * fac
            u = u + t * v
    chk = is_f_superharmonic(form, u, Om, f)
    if not chk["ok"]:
        raise AssertionError(f"sampler output not superharmonic: {chk}")
    if np.any(u[Om] < 0):
        raise AssertionError(f"sampler output negative in domain: {u[Om].min()}")
    if return_parts:
        return u, g
    return u


def mean_exit_time(form: DirichletForm, B) -> np.ndarray:
    """Mean exit time ``E^B``: ``E(E^B, phi) = (1, phi)`` for ``phi``
    supported in ``B`` and ``E^B = 0`` off ``B``."""
    return solve_f_harmonic(form, BoundaryValueProblem(B, np.ones(form.n), None))


def monte_carlo_exit_time(form: DirichletForm, B, start: int, walks: int = 10000,
                          seed: int = 0, max_steps: int = 10 ** 6) -> float:
    """Monte Carlo estimate of ``E^B(start)`` from the jump chain.

    Jump rates are ``(c_xy + 2 Jm_xy) / mu(x)``; each visit contributes the
    expected holding time ``1/q_x``.  For cross-validation only.
    """
    sp_ = form.space
    inB = _set_mask(sp_, B)
    rates = (form.conductance + 2.0 * form.jump_mass).toarray() / sp_.mu[:, None]
    q = rates.sum(axis=1)
    cum = np.cumsum(rates / np.where(q > 0, q, 1.0)[:, None], axis=1)
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(walks):
        x = start
        steps = 0
        while inB[x]:
            if q[x] <= 0:
                raise SingularSystemError(f"point {x} has no way out")
            total += 1.0 / q[x]
            x = min(int(np.searchsorted(cum[x], rng.random(), side="right")), sp_.n - 1)
            steps += 1
            if steps > max_steps:
                raise RuntimeError("walk did not exit")
    return total / walks


def exit_time_bounds_check(form: DirichletForm, balls: Iterable[Ball],
                           delta: float = 0.5) -> dict:
    """``C_lower = min min_{delta B} E^B / w(B)`` and
    ``C_upper = max max E^B / w(B)`` over the given balls.

    Balls whose mean exit time problem is singular (for instance a ball
    covering the whole space) are skipped and counted.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    sp_ = form.space
    lo, hi = None, None
    wlo = whi = None
    skipped = 0
    for B in balls:
        try:
            E = mean_exit_time(form, B)
        except SingularSystemError:
            skipped += 1
            continue
        wB = sp_.w_ball(B)
        inner = ball_mask(sp_, B.scaled(delta))
        a = float(E[inner].min()) / wB
        b = float(E.max()) / wB
        if lo is None or a < lo:
            lo, wlo = a, {"center": B.center, "R": B.radius}
        if hi is None or b > hi:
            hi, whi = b, {"center": B.center, "R": B.radius}
    return {"C_lower": lo, "C_upper": hi, "witness_lower": wlo,
            "witness_upper": whi, "skipped": skipped}


def exit_time_sweep(form: DirichletForm, sigma: float = 1 / 3,
                    delta: float = 0.5, horizon: Optional[float] = None,
                    centers=None) -> dict:
    """:func:`exit_time_bounds_check` over all grid balls of radius below
    ``sigma * horizon``."""
    sp_ = form.space
    hz = sp_.diam if horizon is None else horizon
    radii = sweep_radii(sp_, sigma * hz)
    centers = range(sp_.n) if centers is None else centers
    balls = [Ball(x, R) for x in centers for R in radii]
    return exit_time_bounds_check(form, balls, delta)
