"""Weak elliptic Harnack inequality: certification, equivalent forms and the
auxiliary estimates around it.

Conventions
-----------
Balls are open, ``B(x, r) = {d(x, .) < r}``, so the point set of a ball is
piecewise constant in ``r``.  Every "sup over radii" below is taken over
these constancy classes and is therefore exact over the continuous radius
range, not over a sampled grid.  Essential sup/inf are max/min over points
(all masses are positive).

The ratio certified by :func:`certify_weh` is::

    (mean_{B_r} u^p)^(1/p) / (min_{B_r} u + w(B_r) (T(u_-) + |f|_{inf, B_R}))

with ``T = T_{3/4 B_R, B_R}``.  Samples are non-negative on their domain
``Omega``, hence ``u_- = 0`` on ``Omega`` and the tail of ``u_-`` at ``x``
equals ``(Jm @ u_-)(x) / mu(x)`` for every ball inside ``Omega``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dirichlet import DirichletForm, _set_mask
from .mmspace import Ball, ball_mask, sweep_radii
from .solvers import BoundaryValueProblem, is_f_superharmonic, sample_superharmonic, solve_f_harmonic

__all__ = [
    "HarnackParams",
    "LGParams",
    "SuperharmonicSample",
    "HarnackCertificate",
    "CertificationError",
    "default_delta",
    "draw_samples",
    "weh_ratio",
    "certify_weh",
    "constants_translate",
    "threshold_map",
    "check_weh_variant",
    "lemma_of_growth_check",
    "lg0_check",
    "degiorgi_iteration",
    "crossover_radii",
    "crossover_check",
    "bmo_norm",
    "john_nirenberg_check",
    "krylov_safonov_enlarge",
    "draw_harmonic_samples",
    "holder_decay_check",
    "log_energy_rhs_lhs",
    "log_energy_check",
]

VARIANTS = ("wEH1", "wEH2", "wEH3", "wEH4")
INCONCLUSIVE_VACUOUS = 0.9


class CertificationError(ValueError):
    """Raised when a function handed to a ratio is not f-superharmonic."""


@dataclass(frozen=True)
class HarnackParams:
    """Constants ``(p, delta, sigma, C_H)`` of the weak Harnack inequality."""

    p: float = 0.5
    delta: float = 1 / 160
    sigma: float = 1 / 3
    C_H: float = 1.0

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if not 0 < self.delta < 1 or not 0 < self.sigma < 1:
            raise ValueError("delta and sigma must lie in (0, 1)")
        if not self.C_H >= 1:
            raise ValueError("C_H must be at least 1")

    def to_dict(self) -> dict:
        return {"p": self.p, "delta": self.delta, "sigma": self.sigma,
                "C_H": self.C_H}


@dataclass(frozen=True)
class LGParams:
    """Constants of the lemma of growth: ``epsilon0``, ``theta``, ``C_L``,
    ``sigma``.  Chained values are ``theta = 1/nu`` and
    ``C_L = C0 + beta2 + d2``."""

    epsilon0: float
    theta: float
    C_L: float
    sigma: float = 1 / 3

    def __post_init__(self):
        if not 0 < self.epsilon0 < 0.5:
            raise ValueError("epsilon0 must lie in (0, 1/2)")
        if not self.theta > 0 or not self.C_L > 0:
            raise ValueError("theta and C_L must be positive")
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {"epsilon0": self.epsilon0, "theta": self.theta,
                "C_L": self.C_L, "sigma": self.sigma}


@dataclass(eq=False)
class SuperharmonicSample:
    """A non-negative f-superharmonic function on ``omega``.

    ``tail_density`` is ``(Jm @ u_-) / mu``, the tail of the negative part at
    each point for any ball contained in ``omega``.
    """

    u: np.ndarray
    f: np.ndarray
    omega: np.ndarray
    seed: list
    center: int
    radius: float
    tail_density: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.tail_density is None:
            self.tail_density = np.zeros_like(self.u)

    def describe(self) -> dict:
        return {"seed": list(self.seed), "omega_center": int(self.center),
                "omega_radius": float(self.radius)}


@dataclass(eq=False)
class HarnackCertificate:
    """Result of :func:`certify_weh`.

    ``worst_ratio`` is the exact sup of the ratio over all admissible
    ``(B_R, B_r)`` and all samples; ``params.C_H`` is either the supplied
    constant or ``max(1, worst_ratio)``.  The form, samples and horizon are
    kept (not serialized) so variant checks can reuse the same family.
    """

    params: HarnackParams
    worst_ratio: float
    witness: Optional[dict]
    sample_count: int
    space_name: str
    horizon: float
    classes_evaluated: int = 0
    form: DirichletForm = field(default=None, repr=False)
    samples: list = field(default_factory=list, repr=False)

    @property
    def verdict(self) -> str:
        if self.classes_evaluated == 0:
            return "empty"
        return "pass" if np.isfinite(self.worst_ratio) and \
            self.worst_ratio <= self.params.C_H else "fail"

    def to_dict(self) -> dict:
        wr = self.worst_ratio
        return {"params": self.params.to_dict(),
                "worst_ratio": wr if np.isfinite(wr) else "inf",
                "witness": self.witness, "sample_count": self.sample_count,
                "space": self.space_name, "horizon": self.horizon,
                "classes_evaluated": self.classes_evaluated,
                "verdict": self.verdict}


def default_delta(kappa: float = 1.0) -> float:
    """``1 / (32 (4 kappa + 1))``, the default inner-ball fraction; small
    enough that the certificate chains into the full Harnack inequality."""
    if not kappa >= 1:
        raise ValueError("kappa must be at least 1")
    return 1.0 / (32.0 * (4.0 * kappa + 1.0))


# ---------------------------------------------------------------- samples

def _tail_density(form: DirichletForm, u: np.ndarray) -> np.ndarray:
    um = np.maximum(-u, 0.0)
    return np.asarray(form.jump_mass @ um).ravel() / form.space.mu


def draw_samples(form: DirichletForm, count: int, seed: int = 0,
                 sigma: float = 1 / 3, horizon: Optional[float] = None,
                 f_scale: float = 0.5, negative_far_prob: float = 0.5,
                 zero_f_fraction: float = 0.5) -> list:
    """Draw ``count`` certified non-negative f-superharmonic samples.

    Sample ``i`` uses the seed ``[seed, i]``.  Its domain is a ball
    ``B(xc, rho)`` different from the whole space with ``rho`` drawn from
    the distinct distances up to ``min(2 sigma horizon, diam)`` (biased
    towards the larger ones); a fraction
    ``zero_f_fraction`` of samples have ``f = 0`` and the others a random
    signed ``f`` of size up to ``f_scale``.  With probability
    ``negative_far_prob`` the sample has a negative far part, which gives
    non-zero tails.  Both the source size and the weight of the negative
    part are log-uniform over three decades so tails of all sizes occur.
    """
    sp_ = form.space
    hz = sp_.diam if horizon is None else float(horizon)
    top = min(2 * sigma * hz, sp_.diam)
    grid = sp_.radius_grid
    out = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        xc = int(rng.integers(sp_.n))
        d = sp_.dist[xc]
        # radii whose ball leaves something outside
        cand = grid[(grid <= top) & (grid <= d.max())]
        if cand.size == 0:
            cand = grid[:1]
        # bias towards large domains: they admit more ball pairs
        rho = float(cand[int(cand.size * rng.random() ** 0.5)])
        Om = d < rho
        if Om.all():
            Om = d < d.max()
        f = np.zeros(sp_.n)
        if rng.random() >= zero_f_fraction:
            f = f_scale * 10 ** rng.uniform(-3, 0) * rng.standard_normal(sp_.n)
        neg = bool(rng.random() < negative_far_prob)
        u = sample_superharmonic(form, Om, f, seed=[seed, i, 1], negative_far=neg,
                                 negative_weight=0.9 * 10 ** rng.uniform(-3, 0))
        out.append(SuperharmonicSample(u, f, Om, [int(seed), i], xc, rho,
                                       _tail_density(form, u)))
    return out


# ---------------------------------------------------------------- ratio

def _ratio(num, den):
    if num <= 0:
        return 0.0
    if den <= 0:
        return math.inf
    return float(num / den)


def weh_ratio(form: DirichletForm, u, f, B_R: Ball, B_r: Ball, p: float,
              check: bool = True) -> float:
    """The weak Harnack ratio for one pair of concentric balls.

    ``u`` must be non-negative and f-superharmonic in ``B_R``; with
    ``check`` both are verified and :class:`CertificationError` is raised
    otherwise.  Returns ``inf`` when the denominator vanishes and the
    numerator does not.
    """
    sp_ = form.space
    if B_R.center != B_r.center:
        raise ValueError("balls must be concentric")
    u = np.asarray(u, dtype=float)
    f = np.zeros(sp_.n) if f is None else np.asarray(f, dtype=float)
    inR = ball_mask(sp_, B_R)
    inr = ball_mask(sp_, B_r) & inR
    if check:
        if np.any(u[inR] < 0):
            raise CertificationError("u is negative in B_R")
        chk = is_f_superharmonic(form, u, inR, f)
        if not chk["ok"]:
            raise CertificationError(f"u is not f-superharmonic in B_R: {chk}")
    mu = sp_.mu
    num = (np.sum(mu[inr] * u[inr] ** p) / mu[inr].sum()) ** (1 / p)
    inner = sp_.dist[B_R.center] < 0.75 * B_R.radius
    um = np.where(inR, 0.0, np.maximum(-u, 0.0))
    T = float(np.max(np.asarray(form.jump_mass[inner] @ um).ravel() / mu[inner]))
    F = float(np.max(np.abs(f[inR])))
    den = float(u[inr].min()) + sp_.w_ball(B_r) * (T + F)
    return _ratio(num, den)


def _center_sup(sp_, smp, x0, p, delta, R_lim):
    """Exact sup of the ratio over admissible ``(R, r)`` for one center.

    Returns ``(value, witness, classes)``.
    """
    d = sp_.dist[x0]
    mu = sp_.mu
    outside = ~smp.omega
    Rc = float(d[outside].min()) if outside.any() else math.inf
    Rtop = min(R_lim, Rc)
    order = np.argsort(d, kind="stable")
    ds = d[order]
    a, starts = np.unique(ds, return_index=True)
    ends = np.append(starts[1:], ds.size)
    uo = smp.u[order]
    muo = mu[order]
    cm = np.cumsum(muo)
    cu = np.cumsum(muo * np.maximum(uo, 0.0) ** p)
    N = (cu[ends - 1] / cm[ends - 1]) ** (1 / p)
    m = np.minimum.accumulate(uo)[ends - 1]
    wj = sp_.w(x0, a)
    gmax = np.maximum.accumulate(smp.tail_density[order])
    fmax = np.maximum.accumulate(np.abs(smp.f[order]))

    pos = a[1:]
    br = np.unique(np.concatenate([pos, 4 * pos / 3]))
    lo = np.concatenate([[0.0], br])
    hi = np.concatenate([br, [math.inf]])
    keep = lo < Rtop
    lo, hi = lo[keep], hi[keep]
    if lo.size == 0:
        return 0.0, None, 0
    Rsup = np.minimum(hi, Rtop)
    Rev = np.where(np.isfinite(hi), hi, lo + 1.0)
    kT = np.searchsorted(ds, 0.75 * Rev, side="left")
    kF = np.searchsorted(ds, Rev, side="left")
    T = np.where(kT > 0, gmax[np.maximum(kT - 1, 0)], 0.0)
    F = fmax[kF - 1]
    S = T + F
    J = np.searchsorted(a, delta * Rsup, side="left")  # classes a_j < delta R
    jj = np.arange(a.size)
    valid = jj[None, :] < J[:, None]
    den = m[None, :] + wj[None, :] * S[:, None]
    num = np.broadcast_to(N[None, :], den.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(num <= 0, 0.0, np.where(den <= 0, np.inf, num / den))
    r = np.where(valid, r, -1.0)
    k, j = np.unravel_index(int(np.argmax(r)), r.shape)
    val = float(r[k, j])
    if val < 0:
        return 0.0, None, int(valid.sum())
    Rw = float(Rsup[k]) if Rsup[k] < R_lim else float(np.nextafter(Rsup[k], 0))
    r_rep = float(min(a[j + 1] if j + 1 < a.size else a[j] + 1.0, delta * Rw))
    wit = {"center": int(x0), "R": Rw, "R_class": [float(lo[k]), float(hi[k])],
           "r_limit": float(a[j]), "r": r_rep}
    return val, wit, int(valid.sum())


def certify_weh(form: DirichletForm, p: float = 0.5, delta: Optional[float] = None,
                sigma: float = 1 / 3, samples: Optional[list] = None,
                sample_count: int = 20, seed: int = 0,
                horizon: Optional[float] = None, C_H: Optional[float] = None,
                kappa: float = 1.0, centers: Optional[Sequence[int]] = None,
                sampler: Optional[dict] = None) -> HarnackCertificate:
    """Certify the weak Harnack inequality on a sample family.

    For every sample and every center in its domain the ratio is maximized
    exactly over outer radii ``R < sigma * horizon`` with ``B_R`` inside the
    domain and inner radii ``r <= delta R`` (see the module notes).  The
    returned certificate has ``worst_ratio`` equal to that sup; ``C_H``
    defaults to ``max(1, worst_ratio)``.

    Parameters
    ----------
    delta : float, optional
        Defaults to :func:`default_delta` of ``kappa``.
    samples : list of SuperharmonicSample, optional
        Drawn with :func:`draw_samples` (``sample_count``, ``seed`` and the
        ``sampler`` keyword overrides) when omitted.
    """
    sp_ = form.space
    delta = default_delta(kappa) if delta is None else float(delta)
    if not 0 < p < 1 or not 0 < delta < 1 or not 0 < sigma < 1:
        raise ValueError("p, delta and sigma must lie in (0, 1)")
    hz = sp_.diam if horizon is None else float(horizon)
    if samples is None:
        samples = draw_samples(form, sample_count, seed, sigma, hz, **(sampler or {}))
    R_lim = sigma * hz
    worst, wit, classes = 0.0, None, 0
    for si, smp in enumerate(samples):
        pts = np.flatnonzero(smp.omega)
        if centers is not None:
            pts = np.intersect1d(pts, np.asarray(centers, dtype=int))
        for x0 in pts:
            v, w, c = _center_sup(sp_, smp, int(x0), p, delta, R_lim)
            classes += c
            if w is not None and (wit is None or v > worst):
                worst = v
                wit = dict(w, space=sp_.name, sample=si, **smp.describe())
    if C_H is None:
        C = max(1.0, worst) if np.isfinite(worst) else 1.0
    else:
        C = float(C_H)
    params = HarnackParams(p, delta, sigma, C)
    return HarnackCertificate(params, float(worst), wit, len(samples), sp_.name,
                              hz, classes, form, list(samples))


# ---------------------------------------------------------------- constants

def _need(aux, *keys):
    missing = [k for k in keys if k not in aux or aux[k] is None]
    if missing:
        raise ValueError(f"missing auxiliary constants: {missing}")
    return [float(aux[k]) for k in keys]


def constants_translate(params, target: str, aux: Optional[dict] = None) -> dict:
    """Translate weak Harnack constants into those of an equivalent form.

    ``params`` is a :class:`HarnackParams` or a dict with ``p``, ``delta``,
    ``C_H``; ``p`` may also equal 1 here since the formulas make sense for
    it.  ``aux`` carries ``C2``, ``beta2`` (scaling envelope), ``C_mu``
    (doubling constant), optional ``eta`` and ``via`` (``"wEH"`` or
    ``"wEH3"`` for the measure-to-point form).

    Formulas
    --------
    * measure-to-point via the weak Harnack inequality:
      ``delta1 = delta / 4``,
      ``eps1(eta) = (C2 4**beta2 C_H)**-1 (eta / C_mu**2)**(1/p)``;
    * exponential form: ``delta2 = delta``, ``C = ln C_H + 1/p``;
    * threshold map: ``delta3 = delta2``, ``F(eta) = exp(-C/eta) / 2``;
    * measure-to-point via the threshold map: ``delta1 = delta3 / 8``,
      ``eps1(eta) = F(eta / C_mu**3) / (C2 8**beta2)``;
    * half-density form: ``eta3 = 1/2``, ``eps4 = F(1/2)``, ``delta4 = delta3``.
    """
    aux = dict(aux or {})
    if isinstance(params, HarnackParams):
        p, delta, C_H = params.p, params.delta, params.C_H
    else:
        p, delta, C_H = float(params["p"]), float(params["delta"]), float(params["C_H"])
    if not 0 < p <= 1 or not 0 < delta < 1 or not C_H >= 1:
        raise ValueError("need p in (0, 1], delta in (0, 1) and C_H >= 1")
    eta = aux.get("eta")
    if eta is not None and not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    C = math.log(C_H) + 1.0 / p
    out = {"target": target, "p": p, "delta": delta, "C_H": C_H}
    if target == "wEH2":
        out.update(delta2=delta, C=C)
    elif target == "wEH3":
        out.update(delta3=delta, C=C)
        if eta is not None:
            out["F"] = 0.5 * math.exp(-C / eta)
    elif target == "wEH4":
        out.update(delta4=delta, C=C, eta3=0.5, eps4=0.5 * math.exp(-2.0 * C))
    elif target == "wEH1":
        via = aux.get("via", "wEH")
        C2, beta2, C_mu = _need(aux, "C2", "beta2", "C_mu")
        if C2 <= 0 or beta2 < 0 or C_mu < 1:
            raise ValueError("need C2 > 0, beta2 >= 0 and C_mu >= 1")
        out.update(via=via, C2=C2, beta2=beta2, C_mu=C_mu)
        if via == "wEH":
            out["delta1"] = delta / 4
        elif via == "wEH3":
            out.update(delta1=delta / 8, C=C)
        else:
            raise ValueError("via must be 'wEH' or 'wEH3'")
        if eta is not None:
            out["eps1"] = threshold_map(out, eta)
    else:
        raise ValueError(f"unknown target {target!r}")
    return out


def threshold_map(consts: dict, eta: float) -> float:
    """Evaluate ``eps1(eta)`` or ``F(eta)`` for translated constants."""
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    t = consts["target"]
    if t in ("wEH3", "wEH4"):
        return 0.5 * math.exp(-consts["C"] / eta)
    if t != "wEH1":
        raise ValueError(f"no threshold map for {t}")
    C2, b2, Cm, p = consts["C2"], consts["beta2"], consts["C_mu"], consts["p"]
    if consts["via"] == "wEH":
        return (eta / Cm ** 2) ** (1 / p) / (C2 * 4 ** b2 * consts["C_H"])
    F = 0.5 * math.exp(-consts["C"] / (eta / Cm ** 3))
    return F / (C2 * 8 ** b2)


# ---------------------------------------------------------------- variants

class _Trial:
    """Per-trial geometry on one sample: ``B_R`` inside the domain with
    ``R < R_lim`` and helpers for the tail/source term."""

    def __init__(self, sp_, smp, rng, R_lim, x0=None):
        self.sp, self.smp = sp_, smp
        pts = np.flatnonzero(smp.omega)
        self.x0 = int(pts[rng.integers(pts.size)]) if x0 is None else int(x0)
        d = sp_.dist[self.x0]
        out = ~smp.omega
        Rc = float(d[out].min()) if out.any() else math.inf
        Rmax = min(Rc, R_lim)
        self.R = float(Rmax * rng.uniform(0.05, 1.0) ** 0.3)
        self.d = d

    def ball(self, r):
        return self.d < r

    def radius(self, limit, rng, inclusive=False):
        """Random radius in ``(0, limit)`` (or ``(0, limit]``), first choosing
        a point-set class of ``B(x0, r)`` uniformly and then a radius in it."""
        a = np.unique(self.d)
        a = a[a < limit]
        j = int(rng.integers(a.size))
        top = min(a[j + 1], limit) if j + 1 < a.size else limit
        frac = 1.0 - rng.random() if inclusive or top < limit else rng.uniform(0.01, 0.99)
        return float(a[j] + (top - a[j]) * frac)

    def source(self, tail_frac=0.75):
        """``T_{tail_frac B_R, B_R}(u_-) + |f|_{inf, B_R}``."""
        inner = self.d < tail_frac * self.R
        T = float(self.smp.tail_density[inner].max()) if inner.any() else 0.0
        F = float(np.abs(self.smp.f[self.d < self.R]).max())
        return T + F

    def omega_frac(self, mask, a):
        mu = self.sp.mu
        return float(mu[mask & (self.smp.u >= a)].sum() / mu[mask].sum())


def _level(u, mu, eta, rng, floor=0.0):
    """A level ``a > 0`` near the largest one with ``omega({u >= a}) >= eta``
    (occasionally above it to exercise vacuous trials).  When ``floor`` is
    below that largest level, most draws land in ``[floor, amax]``."""
    order = np.argsort(-u, kind="stable")
    cum = np.cumsum(mu[order]) / mu.sum()
    k = int(np.searchsorted(cum, eta * (1 - 1e-12), side="left"))
    k = min(k, u.size - 1)
    amax = float(u[order][k])
    top = float(u.max())
    if amax <= 0:
        amax = top if top > 0 else 1.0
    if 0 < floor <= amax and rng.random() < 0.8:
        return floor + (amax - floor) * rng.random()
    if rng.random() < 0.8:
        return amax * rng.uniform(0.3, 1.0)
    return amax * rng.uniform(1.0, 4.0)


def _tol(*vals):
    return 1e-12 * max(1.0, *[abs(v) for v in vals])


def _variant_trial(variant, consts, sp_, smp, rng, R_lim):
    t = _Trial(sp_, smp, rng, R_lim)
    u, mu = smp.u, sp_.mu
    x0, R = t.x0, t.R
    info = {"center": x0, "R": R}
    if variant == "wEH1":
        r = t.radius(consts["delta1"] * R, rng)
        Br = t.ball(r)
        eta = 1.0 - rng.random()
        a = _level(u[Br], mu[Br], eta, rng)
        om = t.omega_frac(Br, a)
        info.update(r=r, a=a, eta=eta, omega=om)
        if om < eta:
            return True, True, 0.0, info
        eps1 = threshold_map(consts, eta)
        bound = eps1 * a - sp_.w(x0, r) * t.source()
        lhs = float(u[t.ball(4 * r)].min())
        slack = lhs - bound
        return False, slack >= -_tol(lhs, bound), slack, info
    if variant == "wEH2":
        r = t.radius(consts["delta2"] * R, rng)
        Br = t.ball(r)
        lo, hi = float(u[Br].min()), float(u[Br].max())
        if hi > lo and rng.random() < 0.8:
            # strictly between the extremes gives 0 < omega < 1
            a = lo + (hi - lo) * (1.0 - rng.random())
        else:
            a = _level(u[Br], mu[Br], rng.uniform(0.05, 1.0), rng)
        a = max(a, 1e-300)
        om = t.omega_frac(Br, a)
        info.update(r=r, a=a, omega=om)
        if om <= 0 or om >= 1:
            return True, True, 0.0, info
        bound = a * math.exp(-consts["C"] / om) - sp_.w(x0, r) * t.source()
        lhs = float(u[Br].min())
        slack = lhs - bound
        return False, slack >= -_tol(lhs, bound), slack, info
    if variant == "wEH3":
        r = t.radius(consts["delta3"] * R, rng, inclusive=True)
        Br = t.ball(r)
        eta = 1.0 - rng.random()
        F = threshold_map(consts, eta)
        tail = sp_.w(x0, r) * t.source()
        a = _level(u[Br], mu[Br], eta, rng, floor=tail / F if F > 0 else math.inf)
        om = t.omega_frac(Br, a)
        info.update(r=r, a=a, eta=eta, omega=om)
        if om < eta or tail > F * a:
            return True, True, 0.0, info
        lhs = float(u[Br].min())
        slack = lhs - F * a
        return False, slack >= -_tol(lhs, F * a), slack, info
    if variant == "wEH4":
        r = consts["delta4"] * R
        Br = t.ball(r)
        eps4 = consts["eps4"]
        tail = sp_.w(x0, r) * t.source()
        a = _level(u[Br], mu[Br], 0.5, rng, floor=tail / eps4)
        om = t.omega_frac(Br, a)
        info.update(r=r, a=a, omega=om)
        if om < 0.5 or tail > eps4 * a:
            return True, True, 0.0, info
        lhs = float(u[t.ball(r / 2)].min())
        slack = lhs - eps4 * a
        return False, slack >= -_tol(lhs, eps4 * a), slack, info
    raise ValueError(f"unknown variant {variant!r}")


def _summarize(trials, vacuous, failures, worst, wit):
    nonvac = trials - vacuous
    frac = vacuous / trials if trials else 1.0
    if failures:
        verdict = "fail"
    elif trials == 0 or frac > INCONCLUSIVE_VACUOUS:
        verdict = "inconclusive"
    else:
        verdict = "pass"
    return {"verdict": verdict, "trials": trials, "vacuous": vacuous,
            "non_vacuous": nonvac, "vacuous_ratio": frac, "failures": failures,
            "worst_slack": worst, "witness": wit}


def check_weh_variant(cert: HarnackCertificate, variant: str, constants: dict,
                      trials: int = 1000, seed: int = 0,
                      samples: Optional[list] = None) -> dict:
    """Evaluate one equivalent form on random trials.

    Trials reuse the certificate's form, sample family and radius range
    (``R < sigma * horizon``).  For each trial the hypothesis is evaluated;
    unmet hypotheses count as vacuous.  The verdict is ``"fail"`` on any
    violated conclusion, ``"inconclusive"`` when more than 90% of trials
    are vacuous and ``"pass"`` otherwise.  The worst slack is the smallest
    ``lhs - rhs`` over non-vacuous trials.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    form = cert.form
    sp_ = form.space
    samples = cert.samples if samples is None else samples
    if not samples:
        return _summarize(0, 0, 0, None, None)
    R_lim = cert.params.sigma * cert.horizon
    vac = fails = 0
    worst, wit = None, None
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        si = int(rng.integers(len(samples)))
        smp = samples[si]
        v, ok, slack, info = _variant_trial(variant, constants, sp_, smp, rng, R_lim)
        if v:
            vac += 1
            continue
        fails += not ok
        if worst is None or slack < worst:
            worst = float(slack)
            wit = dict(info, trial=i, sample=si, space=sp_.name, **smp.describe())
    return _summarize(trials, vac, fails, worst, wit)


# ---------------------------------------------------------------- growth

def lemma_of_growth_check(form: DirichletForm, lg: LGParams, eps: float,
                          delta: float, samples: list, trials: int = 1000,
                          seed: int = 0, horizon: Optional[float] = None) -> dict:
    """Lemma of growth on random ``(B, sample, a)`` trials.

    ``B = B(x0, R)`` lies in the sample domain with ``R < sigma * horizon``.
    The hypothesis is::

        mu(B & {u < a}) / mu(B) <= eps0 (1-eps)^(2 theta) (1-delta)^(C_L theta)
                                    * (1 + w(B) (T + |f|) / (eps a))^(-theta)

    with ``T = T_{(3+delta)/4 B, B}(u_-)``; the conclusion is
    ``min_{delta B} u >= eps a``.
    """
    if not 0 < eps < 1 or not 0 < delta < 1:
        raise ValueError("eps and delta must lie in (0, 1)")
    sp_ = form.space
    hz = sp_.diam if horizon is None else float(horizon)
    R_lim = lg.sigma * hz
    mu = sp_.mu
    pre = lg.epsilon0 * (1 - eps) ** (2 * lg.theta) * (1 - delta) ** (lg.C_L * lg.theta)
    vac = fails = 0
    worst, wit = None, None
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        si = int(rng.integers(len(samples)))
        smp = samples[si]
        t = _Trial(sp_, smp, rng, R_lim)
        B = t.ball(t.R)
        uB = np.sort(smp.u[B])
        # levels just above the k smallest values of u in B
        k = int(min(rng.geometric(0.5) - 1, uB.size - 1))
        a = float(uB[k]) * (1 + 1e-9) + 1e-12 if rng.random() < 0.7 else \
            float(uB[k]) * rng.uniform(0.5, 1.0)
        if a <= 0:
            a = 1e-12
        frac = float(mu[B & (smp.u < a)].sum() / mu[B].sum())
        S = sp_.w(t.x0, t.R) * t.source((3 + delta) / 4)
        rhs = pre * (1 + S / (eps * a)) ** (-lg.theta)
        if frac > rhs:
            vac += 1
            continue
        lhs = float(smp.u[t.ball(delta * t.R)].min())
        slack = lhs - eps * a
        ok = slack >= -_tol(lhs, eps * a)
        fails += not ok
        if worst is None or slack < worst:
            worst = slack
            wit = {"trial": i, "sample": si, "center": t.x0, "R": t.R, "a": a,
                   "occupation": frac, "bound": rhs, **smp.describe()}
    return _summarize(trials, vac, fails, worst, wit)


def lg0_check(form: DirichletForm, cert: HarnackCertificate, eps0: float,
              trials: int = 500, seed: int = 0) -> dict:
    """Growth lemma for globally non-negative superharmonic functions.

    Uses the certificate samples that are non-negative on the whole space
    and superharmonic (``f = 0``) in the trial ball ``B``.  If
    ``mu(delta B & {u < a}) / mu(delta B) <= eps0`` then
    ``min_{delta B} u >= eta a`` with ``eta = (1 - eps0)**(1/p) / C_H``.
    """
    if not 0 <= eps0 < 1:
        raise ValueError("eps0 must lie in [0, 1)")
    sp_ = form.space
    P = cert.params
    eta = (1 - eps0) ** (1 / P.p) / P.C_H
    pool = [(i, s) for i, s in enumerate(cert.samples) if np.all(s.u >= 0)]
    if not pool:
        return _summarize(0, 0, 0, None, None)
    Ku = {i: np.asarray(form.K @ s.u).ravel() for i, s in pool}
    R_lim = P.sigma * cert.horizon
    mu = sp_.mu
    vac = fails = 0
    worst, wit = None, None
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        si, smp = pool[int(rng.integers(len(pool)))]
        t = _Trial(sp_, smp, rng, R_lim)
        B = t.ball(t.R)
        scale = np.abs(Ku[si][B]).max() + 1.0
        if np.any(Ku[si][B] < -1e-9 * scale):
            vac += 1
            continue
        dB = t.ball(P.delta * t.R)
        uB = np.sort(smp.u[dB])
        a = float(uB[int(rng.integers(uB.size))]) * rng.uniform(0.5, 1.5)
        a = a if a > 0 else 1.0
        frac = float(mu[dB & (smp.u < a)].sum() / mu[dB].sum())
        if frac > eps0:
            vac += 1
            continue
        lhs = float(smp.u[dB].min())
        slack = lhs - eta * a
        ok = slack >= -_tol(lhs, eta * a)
        fails += not ok
        if worst is None or slack < worst:
            worst = slack
            wit = {"trial": i, "sample": si, "center": t.x0, "R": t.R, "a": a,
                   **smp.describe()}
    out = _summarize(trials, vac, fails, worst, wit)
    out["eta"] = eta
    return out


def degiorgi_iteration(m0: float, A: float, D: float, lam: float, q: float,
                       kmax: int = 50) -> dict:
    """Worst case of ``m_k <= D A 2**(lam k) m_{k-1}**q`` and its majorant.

    The iterate is the equality recursion; the majorant is
    ``((D A)**(1/(q-1)) 2**(lam q/(q-1)**2) m0)**(q**k)``.  All arithmetic
    is done on logarithms so large ``k`` neither overflows nor underflows.
    The majorant needs ``D A >= 1``.
    ``small`` reports ``2**(lam q/(q-1)**2) (D A)**(1/(q-1)) m0 <= 1/2``, in
    which case the majorant is at most ``2**-(q**k)`` and tends to 0.

    Returns
    -------
    dict
        ``log_m``, ``log_majorant`` (lists, ``-inf`` for zero), ``m``,
        ``majorant``, ``small``, ``dominated`` (iterate below majorant at
        every ``k``) and ``limit_zero``.
    """
    if not q > 1:
        raise ValueError("q must exceed 1")
    if m0 < 0 or A <= 0 or D <= 0 or lam < 0:
        raise ValueError("need m0 >= 0, A > 0, D > 0, lam >= 0")
    if D * A < 1:
        # the majorant absorbs sum_j q**(k-j) ln(DA) only when ln(DA) >= 0
        raise ValueError("need D * A >= 1")
    ln2 = math.log(2.0)
    L = math.log(D * A)
    lm0 = math.log(m0) if m0 > 0 else -math.inf
    base = L / (q - 1) + lam * q / (q - 1) ** 2 * ln2 + lm0
    log_m, log_M = [lm0], [base]
    for k in range(1, kmax + 1):
        prev = log_m[-1]
        log_m.append(L + lam * k * ln2 + q * prev if prev > -math.inf else -math.inf)
        log_M.append(base * q ** k if base > -math.inf else -math.inf)
    dominated = all(
        lm <= lM + 1e-12 * max(1.0, abs(lM)) if np.isfinite(lM) else lm <= lM
        for lm, lM in zip(log_m, log_M))
    small = base <= -ln2
    limit_zero = None
    if small:
        # m_k <= 2**-(q**k) at every k, which tends to 0
        limit_zero = all(lm <= -ln2 * q ** k * (1 - 1e-12)
                         for k, lm in enumerate(log_m))
    with np.errstate(over="ignore", under="ignore"):
        m = np.exp(np.array(log_m)).tolist()
        M = np.exp(np.array(log_M)).tolist()
    return {"log_m": log_m, "log_majorant": log_M, "m": m, "majorant": M,
            "small": small, "dominated": dominated, "limit_zero": limit_zero}


# ---------------------------------------------------------------- crossover

def crossover_radii(space, center: int, r_max: float) -> np.ndarray:
    """One radius per point-set class of ``B(center, r)`` with ``0 < r <= r_max``."""
    a = np.unique(space.dist[center])
    a = a[a < r_max]
    nxt = np.append(a[1:], math.inf)
    return np.minimum(nxt, r_max)


def _threshold(form, smp, x0, R):
    sp_ = form.space
    d = sp_.dist[x0]
    inner = d < 0.75 * R
    T = float(smp.tail_density[inner].max())
    F = float(np.abs(smp.f[d < R]).max())
    return float(sp_.w(x0, R)) * (T + F)


def crossover_check(form: DirichletForm, B_R: Ball, r_sweep, samples: list,
                    p: float = 0.5, kappa: float = 1.0,
                    C: Optional[float] = None, lam_floor: float = 1e-12) -> dict:
    """Worst crossover product over samples and inner radii.

    ``lam`` is set to the threshold ``w(B_R)(T_{3/4 B_R, B_R}(u_-) + |f|)``
    of each sample; when that threshold is 0 the positive floor
    ``lam_floor * max(1, max u)`` is used instead.  Samples whose domain
    does not contain ``B_R`` are skipped.  Raises ``ValueError`` for
    ``r > R / (16 (4 kappa + 1))``.
    """
    sp_ = form.space
    rmax = B_R.radius / (16 * (4 * kappa + 1))
    r_sweep = np.atleast_1d(np.asarray(r_sweep, dtype=float))
    if np.any(r_sweep <= 0) or np.any(r_sweep > rmax * (1 + 1e-12)):
        raise ValueError(f"inner radii must lie in (0, {rmax}]")
    d = sp_.dist[B_R.center]
    inR = d < B_R.radius
    mu = sp_.mu
    worst, wit, used = 1.0, None, 0
    for si, smp in enumerate(samples):
        if np.any(inR & ~smp.omega):
            continue
        used += 1
        lam = _threshold(form, smp, B_R.center, B_R.radius)
        if lam <= 0:
            lam = lam_floor * max(1.0, float(smp.u.max()))
        ul = smp.u + lam
        for r in r_sweep:
            Br = d < r
            m = mu[Br] / mu[Br].sum()
            prod = float((m @ ul[Br] ** p) ** (1 / p) * (m @ ul[Br] ** (-p)) ** (1 / p))
            if prod > worst:
                worst = prod
                wit = {"sample": si, "center": B_R.center, "R": B_R.radius,
                       "r": float(r), "lambda": lam, **smp.describe()}
    return {"product": worst, "samples_used": used, "witness": wit,
            "pass": bool(np.isfinite(worst) and (C is None or worst <= C))}


def _ball_classes(space, Om, z):
    """Prefix classes of balls centred at ``z`` that stay inside ``Om``.

    Returns ``(order, ends, a)``: points sorted by distance from ``z``,
    exclusive ends of each distance group and the group distances, limited
    to groups whose closed ball ``{d <= a_j}`` lies in ``Om``.
    """
    d = space.dist[z]
    order = np.argsort(d, kind="stable")
    ds = d[order]
    a, starts = np.unique(ds, return_index=True)
    ends = np.append(starts[1:], ds.size)
    inside = np.cumprod(Om[order])[ends - 1] > 0
    k = int(np.argmin(inside)) if not inside.all() else inside.size
    return order, ends[:k], a[:k]


def bmo_norm(space, u, Omega) -> float:
    """``sup_{B in Omega} mean_B |u - u_B|`` over all balls (as point sets)
    contained in ``Omega``."""
    Om = _set_mask(space, Omega)
    u = np.asarray(u, dtype=float)
    mu = space.mu
    best = 0.0
    for z in np.flatnonzero(Om):
        order, ends, _ = _ball_classes(space, Om, z)
        if ends.size == 0:
            continue
        uo, mo = u[order], mu[order]
        for e in ends:
            m = mo[:e]
            avg = m @ uo[:e] / m.sum()
            best = max(best, float(m @ np.abs(uo[:e] - avg) / m.sum()))
    return best


def john_nirenberg_check(space, u, B0, b: float, c2: float = 1.0) -> dict:
    """Exponential integrability of a BMO function on the balls of ``B0``.

    ``c1`` is fitted as the smallest constant with
    ``mu(B & {|u - u_B| > t}) <= c1 exp(-c2 t / b) mu(B)`` for every
    ``t >= 0`` and every ball ``B`` inside ``B0`` (exact sup over ``t``).
    The product ``mean_B exp(s u) * mean_B exp(-s u)``, ``s = c2 / (2 b)``,
    is then evaluated on every ball with ``12 B`` inside ``B0`` and compared
    with ``(1 + c1)**2``.
    """
    Om = _set_mask(space, B0)
    u = np.asarray(u, dtype=float)
    bn = bmo_norm(space, u, Om)
    if not b > 0 or b < bn * (1 - 1e-12):
        raise ValueError(f"b = {b} is below the BMO norm {bn}")
    mu = space.mu
    s = c2 / (2 * b)
    c1, worst, wit, tested = 0.0, 1.0, None, 0
    for z in np.flatnonzero(Om):
        order, ends, a = _ball_classes(space, Om, z)
        uo, mo = u[order], mu[order]
        dz = space.dist[z]
        for e, aj in zip(ends, a):
            m = mo[:e] / mo[:e].sum()
            x = uo[:e]
            dev = np.abs(x - m @ x)
            srt = np.argsort(dev)
            tail_mass = np.cumsum(m[srt][::-1])[::-1]  # mass of dev >= dev_k
            c1 = max(c1, float(np.max(tail_mass * np.exp(c2 * dev[srt] / b))))
            if np.all(Om[dz <= 12 * aj]):
                tested += 1
                xc = x - m @ x  # centring keeps the exponentials tame
                prod = float((m @ np.exp(s * xc)) * (m @ np.exp(-s * xc)))
                if prod > worst:
                    worst = prod
                    wit = {"center": int(z), "radius_limit": float(aj)}
    bound = (1 + c1) ** 2
    return {"product": worst, "c1": c1, "c2": c2, "bound": bound,
            "balls_tested": tested, "bmo": bn, "witness": wit,
            "pass": bool(worst <= bound * (1 + 1e-12))}


# ---------------------------------------------------------------- covering

def krylov_safonov_enlarge(space, E, B_r: Ball, eta: float,
                           horizon: Optional[float] = None) -> dict:
    """Enlarged set ``[E]_eta`` and the covering dichotomy.

    ``[E]_eta`` is the union of ``B(x, 5 rho) & B_r`` over ``x`` in ``B_r``
    and ``0 < rho < r`` with ``mu(E & B(x, 5 rho)) > eta mu(B(x, rho))``.
    Radii run over one representative per constancy class of both balls,
    so the union is exact.  The dichotomy is ``[E]_eta = B_r`` or
    ``mu([E]_eta) >= mu(E) / eta``.
    """
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    hz = space.diam if horizon is None else float(horizon)
    r = B_r.radius
    if not r < hz / 5:
        raise ValueError(f"radius {r} must be below horizon/5 = {hz / 5}")
    mu = space.mu
    Br = ball_mask(space, B_r)
    Em = _set_mask(space, E)
    if np.any(Em & ~Br):
        raise ValueError("E must be a subset of B_r")
    enlarged = np.zeros(space.n, dtype=bool)
    for x in np.flatnonzero(Br):
        d = space.dist[x]
        c = np.unique(np.concatenate([d, d / 5]))
        c = c[(c > 0) & (c < r)]
        last = c[-1] if c.size else 0.0
        rho = np.append(c, 0.5 * (last + r))
        order = np.argsort(d, kind="stable")
        ds = d[order]
        cm = np.concatenate([[0.0], np.cumsum(mu[order])])
        ce = np.concatenate([[0.0], np.cumsum((mu * Em)[order])])
        vol = cm[np.searchsorted(ds, rho, side="left")]
        mE5 = ce[np.searchsorted(ds, 5 * rho, side="left")]
        good = mE5 > eta * vol
        if good.any():
            enlarged |= (d < 5 * rho[good].max()) & Br
    mEn, mE = float(mu[enlarged].sum()), float(mu[Em].sum())
    full = bool(np.array_equal(enlarged, Br))
    grows = mEn >= mE / eta * (1 - 1e-12)
    return {"enlarged": enlarged, "full": full, "mass_enlarged": mEn,
            "mass_E": mE, "holds": bool(full or grows)}


# ---------------------------------------------------------------- Hoelder

def draw_harmonic_samples(form: DirichletForm, count: int, seed: int = 0,
                          sigma: float = 1 / 3,
                          horizon: Optional[float] = None) -> list:
    """Harmonic functions in random balls with bounded random exterior data.

    Returns dicts ``{"u", "center", "r", "seed"}``; ``u`` is harmonic in
    ``B(center, r)`` with ``r < sigma * horizon`` and exterior values in
    ``[-1, 1]``.
    """
    sp_ = form.space
    hz = sp_.diam if horizon is None else float(horizon)
    out = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        x0 = int(rng.integers(sp_.n))
        radii = sweep_radii(sp_, sigma * hz)
        radii = radii[radii > sp_.radius_grid[0]]
        if radii.size == 0:
            radii = sweep_radii(sp_, sigma * hz)
        r = float(radii[rng.integers(radii.size)])
        B = sp_.dist[x0] < r
        g = rng.uniform(-1.0, 1.0, sp_.n)
        if rng.random() < 0.5:
            # smooth exterior data: a random far-field profile
            g = np.cos(rng.uniform(0, 2 * np.pi) + sp_.dist[x0] * rng.uniform(0.1, 1.0))
        u = solve_f_harmonic(form, BoundaryValueProblem(B, None, g))
        out.append({"u": u, "center": x0, "r": r, "seed": [int(seed), i]})
    return out


HOLDER_BETAS = tuple(np.round(np.arange(0.05, 0.951, 0.05), 2))


def holder_decay_check(form: DirichletForm, samples: list, C: float = 4.0,
                       betas: Sequence[float] = HOLDER_BETAS) -> dict:
    """Fit the oscillation decay exponent of harmonic functions.

    For a sample harmonic in ``B(x0, r)`` the ratio
    ``osc_{B(x0, rho)} u / (|u|_inf (rho/r)**beta)`` is maximized exactly
    over ``0 < rho <= r`` (its sup on each point-set class is the left
    limit).  ``beta`` is the largest grid value whose sup over all samples
    is at most ``C``.  The pointwise constant
    ``max |u(x) - u(y)| / ((d(x,y)/r)**beta |u|_inf)`` over
    ``x, y in B(x0, r/4)`` is reported for the fitted ``beta`` and must not
    exceed ``C`` either.
    """
    sp_ = form.space
    betas = np.asarray(sorted(betas), dtype=float)
    sup = np.zeros(betas.size)
    table = []
    for k, s in enumerate(samples):
        u, x0, r = np.asarray(s["u"]), s["center"], s["r"]
        nrm = float(np.abs(u).max())
        if nrm == 0:
            continue
        d = sp_.dist[x0]
        order = np.argsort(d, kind="stable")
        ds, uo = d[order], u[order]
        a, starts = np.unique(ds, return_index=True)
        ends = np.append(starts[1:], ds.size)
        osc = (np.maximum.accumulate(uo) - np.minimum.accumulate(uo))[ends - 1]
        keep = (a > 0) & (a < r)
        a, osc = a[keep], osc[keep]
        for aj, oj in zip(a, osc):
            table.append({"sample": k, "rho": float(aj), "osc": float(oj / nrm),
                          "scale": float(aj / r)})
        if a.size:
            rat = osc[None, :] / (nrm * (a[None, :] / r) ** betas[:, None])
            sup = np.maximum(sup, rat.max(axis=1))
    ok = sup <= C
    beta = float(betas[ok].max()) if ok.any() else 0.0
    pw = 0.0
    if beta > 0:
        for s in samples:
            u, x0, r = np.asarray(s["u"]), s["center"], s["r"]
            nrm = float(np.abs(u).max())
            pts = np.flatnonzero(sp_.dist[x0] < r / 4)
            if nrm == 0 or pts.size < 2:
                continue
            dd = sp_.dist[np.ix_(pts, pts)]
            du = np.abs(u[pts][:, None] - u[pts][None, :])
            off = dd > 0
            pw = max(pw, float((du[off] / ((dd[off] / r) ** beta * nrm)).max()))
    return {"beta": beta, "C": C, "sup_by_beta": dict(zip(betas.tolist(), sup.tolist())),
            "pointwise_C": pw, "table": table,
            "pass": bool(beta > 0 and pw <= C)}


# ---------------------------------------------------------------- log energy

def log_energy_rhs_lhs(form: DirichletForm, u, phi, B, lam: float):
    """Both sides of the logarithmic energy bound for the jump part.

    With ``u_lam = u + lam`` and ``psi = phi**2 / u_lam`` on ``B`` (0 off
    ``B``) the left side is ``E_J(u, psi)`` and the right side is::

        -1/2 sum_{x,y in B} min(phi^2) |ln(u_lam(y)/u_lam(x))|^2 J(x,y)
        + 3 E_J(phi, phi) - 2 sum_{x in B, y not in B} u_lam(y) phi(x)^2/u_lam(x) J(x,y)

    where ``J(x,y)`` is the pair mass and sums run over ordered pairs.
    """
    sp_ = form.space
    Bm = _set_mask(sp_, B)
    u = np.asarray(u, dtype=float)
    phi = np.where(Bm, np.asarray(phi, dtype=float), 0.0)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if np.any(u[Bm] < 0):
        raise ValueError("u must be non-negative in B")
    ul = u + lam
    psi = np.where(Bm, phi ** 2 / np.where(Bm, ul, 1.0), 0.0)
    Jm = form.jump_mass.tocoo()
    x, y, m = Jm.row, Jm.col, Jm.data
    lhs = float(np.sum((u[x] - u[y]) * (psi[x] - psi[y]) * m))
    inb = Bm[x] & Bm[y]
    p2 = phi ** 2
    lg = np.log(ul[y[inb]] / ul[x[inb]])
    t1 = -0.5 * float(np.sum(np.minimum(p2[x[inb]], p2[y[inb]]) * lg ** 2 * m[inb]))
    t2 = 3.0 * float(np.sum((phi[x] - phi[y]) ** 2 * m))
    cross = Bm[x] & ~Bm[y]
    t3 = -2.0 * float(np.sum(ul[y[cross]] * p2[x[cross]] / ul[x[cross]] * m[cross]))
    return lhs, t1 + t2 + t3


def log_energy_check(form: DirichletForm, B, trials: int = 100, seed: int = 0,
                     tol: float = 1e-9) -> dict:
    """Random ``(u, phi, lam)`` trials of :func:`log_energy_rhs_lhs`.

    ``u`` is non-negative in ``B`` and arbitrary (possibly negative) off
    ``B``; ``phi`` vanishes off ``B``; ``lam`` is log-uniform in
    ``[1e-3, 10]``.  Passes iff ``rhs - lhs >= -tol`` on every trial.
    """
    sp_ = form.space
    Bm = _set_mask(sp_, B)
    worst, wit = math.inf, None
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        u = np.where(Bm, rng.exponential(1.0, sp_.n) * rng.uniform(0.1, 10),
                     rng.normal(0.0, 2.0, sp_.n))
        if rng.random() < 0.3:
            u = np.where(Bm, rng.random(sp_.n) < 0.5, u) * 1.0
        phi = np.where(Bm, rng.uniform(-1, 1, sp_.n), 0.0)
        lam = float(10 ** rng.uniform(-3, 1))
        lhs, rhs = log_energy_rhs_lhs(form, u, phi, Bm, lam)
        slack = rhs - lhs
        if slack < worst:
            worst, wit = slack, {"trial": i, "lambda": lam, "lhs": lhs, "rhs": rhs}
    return {"worst_slack": worst, "witness": wit, "trials": trials,
            "pass": bool(worst >= -tol)}
