"""Transmit designs when Alice knows every channel exactly.

The SDP designs rely on two facts: replacing ``log det(I + G^H W G)`` by
``log(1 + Tr(G^H W G))`` loses nothing at the optimum (the optimal ``W`` is
rank one), and the resulting max-min ratio becomes a linear SDP after the
substitution ``W = Z / xi`` with the normalisation ``xi + h^H Z h = 1``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .channel import ChannelInstance
from .builder import ProblemBuilder
from .linalg import (
    as_hermitian,
    hermitian_eig,
    normalize_phase,
    orthogonal_complement_projector,
    principal_generalized_eigvec,
)

__all__ = [
    "TransmitDesign",
    "InternalInconsistencyError",
    "secrecy_rate",
    "eve_rates",
    "extract_beamformer",
    "solve_srm",
    "solve_src",
    "solve_srm_bisection",
    "one_eve_closed_form",
    "projected_mrt",
    "plain_mrt",
    "ZERO_RATE",
    "RANK_ONE_TOL",
]

ZERO_RATE = 1e-9
RANK_ONE_TOL = 1e-4
DEFAULT_TOL = 1e-9


class InternalInconsistencyError(RuntimeError):
    """A solver returned something the underlying theory rules out."""


@dataclass
class TransmitDesign:
    W: np.ndarray
    beamformer: np.ndarray
    rate: float
    rank_ratio: float
    power_used: float
    status: str
    info: dict = field(default_factory=dict)

    @property
    def optimal(self):
        return self.status == sdp.OPTIMAL


def _log2det_eye_plus(M):
    w, _ = hermitian_eig(M)
    return float(np.sum(np.log2(np.maximum(1.0 + w, 1e-300))))


def eve_rates(W, instance):
    """Per-Eve secrecy rates ``log2(1 + h^H W h) - log2 det(I + G_k^H W G_k)``."""
    W = as_hermitian(W)
    h = instance.h
    if W.shape != (h.size, h.size):
        raise ValueError(f"W has shape {W.shape}, expected {(h.size, h.size)}")
    bob = np.log2(1.0 + max(np.real(h.conj() @ W @ h), 0.0))
    return np.array([bob - _log2det_eye_plus(G.conj().T @ W @ G) for G in instance.eves])


def secrecy_rate(W, instance):
    """Worst-Eve secrecy rate of covariance ``W`` in bits/s/Hz."""
    rates = eve_rates(W, instance)
    if rates.size == 0:
        h = instance.h
        return float(np.log2(1.0 + max(np.real(h.conj() @ as_hermitian(W) @ h), 0.0)))
    return float(np.min(rates))


def extract_beamformer(W, tol=RANK_ONE_TOL):
    """Principal-direction beamformer of ``W`` and its rank ratio.

    Returns ``(w, ratio)`` where ``ratio = lambda_2 / lambda_1`` (0 for
    ``W = 0``) and ``w`` is ``None`` unless ``ratio <= tol``.  The returned
    ``w`` carries the full power, ``||w||^2 = Tr(W)``.
    """
    W = as_hermitian(W)
    lam, V = hermitian_eig(W)
    if lam[0] <= 0.0:
        return None, 0.0
    ratio = float(max(lam[1], 0.0) / lam[0]) if lam.size > 1 else 0.0
    if ratio > tol:
        return None, ratio
    w = normalize_phase(V[:, 0]) * np.sqrt(max(np.real(np.trace(W)), 0.0))
    return w, ratio


def _design(W, instance, status=sdp.OPTIMAL, rate=None, **info):
    W = as_hermitian(W)
    w, ratio = extract_beamformer(W)
    if rate is None:
        rate = secrecy_rate(W, instance)
    return TransmitDesign(
        W=W,
        beamformer=w,
        rate=float(rate),
        rank_ratio=ratio,
        power_used=float(np.real(np.trace(W))),
        status=status,
        info=info,
    )


def _zero_design(instance, **info):
    n = instance.n_t
    return TransmitDesign(np.zeros((n, n), dtype=complex), None, 0.0, 0.0, 0.0, sdp.OPTIMAL, info)


def _failed_design(instance, status, **info):
    n = instance.n_t
    return TransmitDesign(np.zeros((n, n), dtype=complex), None, float("nan"), float("nan"), 0.0, status, info)


def _rank_one(u):
    return np.outer(u, u.conj())


def solve_srm(instance, tol=DEFAULT_TOL):
    """Maximise the worst-Eve secrecy rate under ``Tr(W) <= P``.

    Solves, over ``(Z, xi, tau)``::

        minimize tau
        s.t.     xi + Tr(G_k G_k^H Z) <= tau   for all k
                 xi + h^H Z h == 1
                 Tr(Z) <= xi * P,  Z >= 0,  xi >= 0

    and returns ``W = Z / xi``.  ``info['gamma']`` holds ``tau*`` so the
    relaxed optimum is ``log2(1 / gamma)``.  A design whose achieved rate
    is at most ``ZERO_RATE`` is replaced by ``W = 0``.
    """
    h, P = instance.h, instance.power
    if not instance.eves:
        return plain_mrt(instance)
    b = ProblemBuilder()
    Z = b.hermitian("Z", instance.n_t, psd=True)
    xi = b.scalar("xi", nonneg=True)
    tau = b.scalar("tau")
    for G in instance.eves:
        GG = G @ G.conj().T
        b.nonneg(lambda v, GG=GG: v[tau] - v[xi] - np.real(np.trace(GG @ v[Z])), [Z, xi, tau])
    b.equal(lambda v: v[xi] + np.real(h.conj() @ v[Z] @ h) - 1.0, [Z, xi])
    b.nonneg(lambda v: v[xi] * P - np.real(np.trace(v[Z])), [Z, xi])
    b.minimize(lambda v: v[tau], [tau])
    sol = sdp.solve(b.build(), tol=tol)
    if sol.status != sdp.OPTIMAL:
        return _failed_design(instance, sol.status, solution=sol)
    vals = b.values(sol.x)
    xi_opt = vals[xi]
    if xi_opt <= 1e-12:
        raise InternalInconsistencyError(f"Charnes-Cooper scale xi = {xi_opt:.3e} at the optimum")
    gamma = vals[tau]
    W = vals[Z] / xi_opt
    design = _design(W, instance, gamma=gamma, xi=xi_opt, iterations=sol.iterations, solution=sol)
    if design.rate <= ZERO_RATE:
        return _zero_design(instance, gamma=1.0, iterations=sol.iterations, solution=sol)
    return design


def solve_src(instance, R, tol=DEFAULT_TOL):
    """Minimise ``Tr(W)`` subject to a worst-Eve secrecy rate of at least ``R``.

    Infeasible targets come back with ``status == 'primal-infeasible'`` and
    the solver's certificate in ``info['solution']``.
    """
    if not np.isfinite(R) or R < 0:
        raise ValueError(f"rate target must be finite and nonnegative, got {R}")
    if R == 0:
        return _zero_design(instance)
    h = instance.h
    scale = 2.0**R
    b = ProblemBuilder()
    W = b.hermitian("W", instance.n_t, psd=True)
    for G in instance.eves:
        GG = G @ G.conj().T
        b.nonneg(
            lambda v, GG=GG: 1.0 + np.real(h.conj() @ v[W] @ h) - scale * (1.0 + np.real(np.trace(GG @ v[W]))),
            [W],
        )
    if not instance.eves:
        b.nonneg(lambda v: 1.0 + np.real(h.conj() @ v[W] @ h) - scale, [W])
    b.minimize(lambda v: np.real(np.trace(v[W])), [W])
    sol = sdp.solve(b.build(), tol=tol)
    if sol.status != sdp.OPTIMAL:
        return _failed_design(instance, sol.status, solution=sol)
    return _design(b.values(sol.x)[W], instance, iterations=sol.iterations, solution=sol)


def _fixed_gamma_margin(instance, gamma, tol):
    # min t s.t. 1 + Tr(G G^H W) - gamma (1 + h^H W h) <= t, Tr(W) <= P, W >= 0
    h, P = instance.h, instance.power
    b = ProblemBuilder()
    W = b.hermitian("W", instance.n_t, psd=True)
    t = b.scalar("t")
    for G in instance.eves:
        GG = G @ G.conj().T
        b.nonneg(
            lambda v, GG=GG: v[t]
            - (1.0 + np.real(np.trace(GG @ v[W])) - gamma * (1.0 + np.real(h.conj() @ v[W] @ h))),
            [W, t],
        )
    b.nonneg(lambda v: P - np.real(np.trace(v[W])), [W])
    b.minimize(lambda v: v[t], [t])
    sol = sdp.solve(b.build(), tol=tol)
    vals = b.values(sol.x)
    return sol, vals[t], vals[W]


def solve_srm_bisection(instance, tol_gamma=1e-7, tol=DEFAULT_TOL):
    """Relaxed SRM by bisection on ``gamma``, one fixed-gamma SDP per step.

    At each ``gamma`` the SDP minimises the largest constraint violation
    ``t``; ``gamma`` is achievable iff ``t* <= 0``.
    """
    if not instance.eves:
        raise ValueError("bisection needs at least one Eve")
    lo, hi = 0.0, 1.0
    W_hi = np.zeros((instance.n_t, instance.n_t), dtype=complex)
    steps = 0
    while hi - lo > tol_gamma:
        mid = 0.5 * (lo + hi)
        sol, t, W = _fixed_gamma_margin(instance, mid, tol)
        steps += 1
        if sol.status != sdp.OPTIMAL:
            return _failed_design(instance, sol.status, solution=sol, steps=steps)
        if t <= 0.0:
            hi, W_hi = mid, W
        else:
            lo = mid
    if hi >= 1.0:
        return _zero_design(instance, gamma=1.0, gamma_interval=(lo, hi), steps=steps)
    design = _design(W_hi, instance, gamma=hi, gamma_interval=(lo, hi), steps=steps)
    if design.rate <= ZERO_RATE:
        return _zero_design(instance, gamma=1.0, gamma_interval=(lo, hi), steps=steps)
    return design


def one_eve_closed_form(h, G, P):
    """Optimal single-Eve design ``P q q^H`` from the generalised eigenvector."""
    h = np.asarray(h, dtype=complex).ravel()
    G = np.asarray(G, dtype=complex).reshape(h.size, -1)
    inst = ChannelInstance(h, (G,), P)
    n = h.size
    A = np.eye(n) + P * _rank_one(h)
    B = np.eye(n) + P * G @ G.conj().T
    q = principal_generalized_eigvec(A, B)
    W = P * _rank_one(q)
    if secrecy_rate(W, inst) <= 0.0:
        return _zero_design(inst)
    return _design(W, inst)


def projected_mrt(instance):
    """Beamform along Bob's channel projected off the span of every Eve."""
    P = instance.power
    if instance.eves:
        Pi = orthogonal_complement_projector(np.hstack(instance.eves))
    else:
        Pi = np.eye(instance.n_t)
    ph = Pi @ instance.h
    norm = np.linalg.norm(ph)
    if norm <= 1e-10:
        return _zero_design(instance)
    w = np.sqrt(P) * ph / norm
    return _design(_rank_one(w), instance)


def plain_mrt(instance):
    """Beamform along Bob's channel, ignoring the Eves; shut down if useless."""
    h, P = instance.h, instance.power
    W = (P / np.real(h.conj() @ h)) * _rank_one(h)
    design = _design(W, instance)
    if design.rate <= 0.0:
        return _zero_design(instance)
    return design
