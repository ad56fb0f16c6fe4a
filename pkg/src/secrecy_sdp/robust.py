"""Worst-case designs when Alice only knows each channel up to a ball.

Bob's channel is ``h = h_bar + e_b`` with ``||e_b|| <= eps_b`` and Eve k's is
``G_k = G_bar_k + E_k`` with ``||E_k||_F <= eps_e[k]``.  Every constraint
that must hold across a ball is a quadratic implication, which the
S-procedure turns into one linear matrix inequality with a nonnegative
multiplier.  Eve's matrix channel is handled through
``Tr(G^H W G) = vec(G)^H (I kron W) vec(G)``.

A radius of exactly zero skips the LMI and states the nominal scalar
constraint instead, since the S-procedure is vacuous on a single point.
"""

from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .builder import ProblemBuilder
from .channel import UncertaintySpec
from .linalg import as_hermitian, hermitian_eig, kron, vec
from .perfect import (
    DEFAULT_TOL,
    RANK_ONE_TOL,
    ZERO_RATE,
    InternalInconsistencyError,
    TransmitDesign,
    extract_beamformer,
    secrecy_rate,
)

__all__ = [
    "RobustDesign",
    "bob_lmi",
    "eve_lmi",
    "srm_bob_lmi",
    "srm_eve_lmi",
    "solve_robust_src",
    "solve_robust_srm",
    "worst_case_secrecy_rate",
    "worst_case_closed_form",
    "nonneg_rate_probability",
]


# Radii at or below this are treated as exactly zero: the nominal constraint
# is used instead of an S-procedure block.  A ball this small moves any rate
# by far less than the solver tolerance, while the block scaling in
# _balanced would overflow for radii near the floating-point minimum.
ZERO_RADIUS = 1e-12


@dataclass
class RobustDesign(TransmitDesign):
    lambda_b: float = 0.0
    lambda_e: tuple = ()
    theta: float = float("nan")
    xi: float = float("nan")
    tau: float = float("nan")
    worst_case_rate: float = float("nan")


# -- LMI blocks -----------------------------------------------------------------
#
# Each function below is the literal block formula.  The problem builder
# calls them on symbolic probes, so what the solver sees is exactly this.


def _bordered(top_left, col, corner):
    n = top_left.shape[0]
    M = np.empty((n + 1, n + 1), dtype=complex)
    M[:n, :n] = top_left
    M[:n, n] = col
    M[n, :n] = col.conj()
    M[n, n] = corner
    return M


def bob_lmi(W, lam, theta, h_bar, eps):
    """``T_b``: PSD iff ``1 + h^H W h >= theta`` for all ``h`` in Bob's ball (given ``lam >= 0``)."""
    n = h_bar.size
    Wh = W @ h_bar
    corner = -lam * eps**2 - theta + np.vdot(h_bar, Wh) + 1.0
    return _bordered(lam * np.eye(n) + W, Wh, corner)


def eve_lmi(W, lam, theta, G_bar, eps, R):
    """``T_e``: PSD iff ``1 + Tr(G^H W G) <= 2^-R theta`` for all ``G`` in Eve's ball."""
    n_e = G_bar.shape[1]
    WW = kron(np.eye(n_e), W)
    g = vec(G_bar)
    WWg = WW @ g
    corner = -lam * eps**2 - np.vdot(g, WWg) + 2.0 ** (-R) * theta - 1.0
    return _bordered(lam * np.eye(g.size) - WW, -WWg, corner)


def srm_bob_lmi(Z, lam, xi, h_bar, eps):
    """``M_b``: PSD iff ``xi + h^H Z h >= 1`` over Bob's ball."""
    n = h_bar.size
    Zh = Z @ h_bar
    corner = np.vdot(h_bar, Zh) + xi - lam * eps**2 - 1.0
    return _bordered(lam * np.eye(n) + Z, Zh, corner)


def srm_eve_lmi(Z, lam, xi, tau, G_bar, eps):
    """``M_e``: PSD iff ``xi + Tr(G^H Z G) <= tau`` over Eve's ball."""
    n_e = G_bar.shape[1]
    ZZ = kron(np.eye(n_e), Z)
    g = vec(G_bar)
    ZZg = ZZ @ g
    corner = -lam * eps**2 - xi + tau - np.vdot(g, ZZg)
    return _bordered(lam * np.eye(g.size) - ZZ, -ZZg, corner)


def _balanced(M, eps):
    """Congruence ``D M D`` with ``D = diag(sqrt(eps) I, 1 / sqrt(eps))``.

    PSD-ness is unchanged.  Together with the multiplier written as
    ``lambda = nu / eps`` it keeps every entry of an S-procedure block of
    order one as the radius shrinks, where the raw block would need a
    multiplier growing like ``1 / eps``.
    """
    n = M.shape[0] - 1
    d = np.full(n + 1, np.sqrt(eps))
    d[n] = 1.0 / np.sqrt(eps)
    return M * np.outer(d, d)


def _quad(h, M):
    return float(np.real(np.vdot(h, M @ h)))


def _leak(G, M):
    return float(np.real(np.trace(G.conj().T @ M @ G)))


# -- designs --------------------------------------------------------------------


def _robust_design(W, spec, status, **fields):
    W = as_hermitian(W)
    w, ratio = extract_beamformer(W)
    info = fields.pop("info", {})
    wc = fields.pop("worst_case_rate")
    return RobustDesign(
        W=W,
        beamformer=w,
        rate=float(wc),
        rank_ratio=ratio,
        power_used=float(np.real(np.trace(W))),
        status=status,
        info=info,
        worst_case_rate=float(wc),
        **fields,
    )


def _zero_robust(spec, **info):
    n = spec.n_t
    return RobustDesign(
        np.zeros((n, n), dtype=complex), None, 0.0, 0.0, 0.0, sdp.OPTIMAL, info,
        lambda_e=(0.0,) * spec.K, worst_case_rate=0.0,
    )


def _failed_robust(spec, status, **info):
    n = spec.n_t
    return RobustDesign(
        np.zeros((n, n), dtype=complex), None, float("nan"), float("nan"), 0.0, status, info,
        lambda_e=(float("nan"),) * spec.K,
    )


def solve_robust_src(spec, R, tol=DEFAULT_TOL):
    """Least power meeting a secrecy rate of ``R`` for every channel in the balls.

    Variables are ``W >= 0``, a free slack ``theta`` and multipliers
    ``lambda_b, lambda_e[k] >= 0``; the objective is ``Tr(W)``.  An
    unreachable target comes back with ``status == 'primal-infeasible'``.
    """
    if not isinstance(spec, UncertaintySpec):
        raise TypeError("spec must be an UncertaintySpec")
    if not (np.isfinite(R) and R > 0):
        raise ValueError(f"rate target must be finite and positive, got {R}")
    h = spec.h_bar
    b = ProblemBuilder()
    W = b.hermitian("W", spec.n_t, psd=True)
    theta = b.scalar("theta")
    if spec.eps_b > ZERO_RADIUS:
        lb = b.scalar("lambda_b", nonneg=True)
        eb = spec.eps_b
        b.psd(lambda v: _balanced(bob_lmi(v[W], v[lb] / eb, v[theta], h, eb), eb), [W, lb, theta])
    else:
        lb = None
        b.nonneg(lambda v: 1.0 + _quad(h, v[W]) - v[theta], [W, theta])
    les = []
    for k, (G, eps) in enumerate(zip(spec.G_bars, spec.eps_e)):
        if eps > ZERO_RADIUS:
            le = b.scalar(f"lambda_e{k}", nonneg=True)
            b.psd(
                lambda v, G=G, eps=eps, le=le: _balanced(eve_lmi(v[W], v[le] / eps, v[theta], G, eps, R), eps),
                [W, le, theta],
            )
        else:
            le = None
            b.nonneg(lambda v, G=G: 2.0 ** (-R) * v[theta] - 1.0 - _leak(G, v[W]), [W, theta])
        les.append(le)
    if not spec.G_bars:
        b.nonneg(lambda v: 2.0 ** (-R) * v[theta] - 1.0, [theta])
    b.minimize(lambda v: np.real(np.trace(v[W])), [W])
    sol = sdp.solve(b.build(), tol=tol)
    if sol.status != sdp.OPTIMAL:
        return _failed_robust(spec, sol.status, solution=sol)
    vals = b.values(sol.x)
    Wv = vals[W]
    _, ratio = extract_beamformer(Wv)
    wc = worst_case_secrecy_rate(Wv, spec, tol=tol) if ratio <= RANK_ONE_TOL else _relaxed_worst_case(Wv, spec, tol)
    return _robust_design(
        Wv, spec, sdp.OPTIMAL,
        lambda_b=vals[lb] / spec.eps_b if lb is not None else 0.0,
        lambda_e=tuple(vals[le] / eps if le is not None else 0.0 for le, eps in zip(les, spec.eps_e)),
        theta=vals[theta],
        worst_case_rate=wc,
        info={"iterations": sol.iterations, "solution": sol},
    )


def solve_robust_srm(spec, tol=DEFAULT_TOL):
    """Maximise the worst-case secrecy rate under ``Tr(W) <= P``.

    Solves, over ``(Z, xi, tau, lambda_b, lambda_e)``::

        minimize tau
        s.t.     M_b(Z, lambda_b, xi) >= 0,  M_e,k(Z, lambda_e,k, xi, tau) >= 0
                 Tr(Z) <= xi * P,  Z >= 0,  xi >= 0,  lambda >= 0

    and returns ``W = Z / xi`` with worst-case rate ``-log2(tau*)``.  When
    that optimum is at most ``ZERO_RATE`` the design is ``W = 0``.
    """
    if not isinstance(spec, UncertaintySpec):
        raise TypeError("spec must be an UncertaintySpec")
    h, P = spec.h_bar, spec.power
    b = ProblemBuilder()
    Z = b.hermitian("Z", spec.n_t, psd=True)
    xi = b.scalar("xi", nonneg=True)
    tau = b.scalar("tau")
    if spec.eps_b > ZERO_RADIUS:
        lb = b.scalar("lambda_b", nonneg=True)
        eb = spec.eps_b
        b.psd(lambda v: _balanced(srm_bob_lmi(v[Z], v[lb] / eb, v[xi], h, eb), eb), [Z, lb, xi])
    else:
        lb = None
        b.nonneg(lambda v: v[xi] + _quad(h, v[Z]) - 1.0, [Z, xi])
    les = []
    for k, (G, eps) in enumerate(zip(spec.G_bars, spec.eps_e)):
        if eps > ZERO_RADIUS:
            le = b.scalar(f"lambda_e{k}", nonneg=True)
            b.psd(
                lambda v, G=G, eps=eps, le=le: _balanced(srm_eve_lmi(v[Z], v[le] / eps, v[xi], v[tau], G, eps), eps),
                [Z, le, xi, tau],
            )
        else:
            le = None
            b.nonneg(lambda v, G=G: v[tau] - v[xi] - _leak(G, v[Z]), [Z, xi, tau])
        les.append(le)
    if not spec.G_bars:
        b.nonneg(lambda v: v[tau] - v[xi], [xi, tau])
    b.nonneg(lambda v: v[xi] * P - np.real(np.trace(v[Z])), [Z, xi])
    b.minimize(lambda v: v[tau], [tau])
    sol = sdp.solve(b.build(), tol=tol)
    if sol.status != sdp.OPTIMAL:
        return _failed_robust(spec, sol.status, solution=sol)
    vals = b.values(sol.x)
    xi_opt, tau_opt = vals[xi], vals[tau]
    if xi_opt <= 1e-12:
        raise InternalInconsistencyError(f"Charnes-Cooper scale xi = {xi_opt:.3e} at the optimum")
    bound = -np.log2(tau_opt) if tau_opt > 0 else np.inf
    if bound <= ZERO_RATE:
        return _zero_robust(spec, gamma=tau_opt, iterations=sol.iterations, solution=sol)
    Wv = vals[Z] / xi_opt
    _, ratio = extract_beamformer(Wv)
    wc = worst_case_secrecy_rate(Wv, spec, tol=tol) if ratio <= RANK_ONE_TOL else _relaxed_worst_case(Wv, spec, tol)
    if wc <= ZERO_RATE:
        return _zero_robust(spec, gamma=tau_opt, iterations=sol.iterations, solution=sol)
    return _robust_design(
        Wv, spec, sdp.OPTIMAL,
        lambda_b=vals[lb] / spec.eps_b / xi_opt if lb is not None else 0.0,
        lambda_e=tuple(vals[le] / eps / xi_opt if le is not None else 0.0 for le, eps in zip(les, spec.eps_e)),
        xi=xi_opt,
        tau=tau_opt,
        worst_case_rate=wc,
        info={"gamma": tau_opt, "bound": bound, "iterations": sol.iterations, "solution": sol},
    )


# -- worst-case evaluation ------------------------------------------------------


def _worst_bob(W, spec, tol):
    # largest t1 with 1 + h^H W h >= t1 for every h in Bob's ball
    h = spec.h_bar
    if spec.eps_b <= ZERO_RADIUS:
        return 1.0 + _quad(h, W)
    b = ProblemBuilder()
    t1 = b.scalar("t1")
    lam = b.scalar("lambda", nonneg=True)
    eb = spec.eps_b
    b.psd(lambda v: _balanced(bob_lmi(W, v[lam] / eb, v[t1], h, eb), eb), [t1, lam])
    b.minimize(lambda v: -v[t1], [t1])
    sol = sdp.solve(b.build(), tol=tol)
    if sol.status != sdp.OPTIMAL:
        raise InternalInconsistencyError(f"Bob worst-case SDP ended with status {sol.status}")
    return b.values(sol.x)[t1]


def _worst_eve(W, spec, tol):
    # smallest t2 with 1 + Tr(G_k^H W G_k) <= t2 for every k and every G_k in its ball
    if not spec.G_bars:
        return 1.0
    exact = [1.0 + _leak(G, W) for G, eps in zip(spec.G_bars, spec.eps_e) if eps <= ZERO_RADIUS]
    balls = [(G, eps) for G, eps in zip(spec.G_bars, spec.eps_e) if eps > ZERO_RADIUS]
    if not balls:
        return max(exact)
    b = ProblemBuilder()
    t2 = b.scalar("t2")
    for k, (G, eps) in enumerate(balls):
        lam = b.scalar(f"lambda{k}", nonneg=True)
        # eve_lmi with R = 0 reads: 1 + Tr(G^H W G) <= theta
        b.psd(lambda v, G=G, eps=eps, lam=lam: _balanced(eve_lmi(W, v[lam] / eps, v[t2], G, eps, 0.0), eps), [t2, lam])
    for value in exact:
        b.nonneg(lambda v, value=value: v[t2] - value, [t2])
    b.minimize(lambda v: v[t2], [t2])
    sol = sdp.solve(b.build(), tol=tol)
    if sol.status != sdp.OPTIMAL:
        raise InternalInconsistencyError(f"Eve worst-case SDP ended with status {sol.status}")
    return b.values(sol.x)[t2]


def _relaxed_worst_case(W, spec, tol=DEFAULT_TOL):
    """``log2 t1 - log2 t2`` without the rank check.

    For a general ``W`` this uses the trace form of Eve's rate, so it is a
    bound rather than the true worst case; it is only used to judge whether
    a design is better than shutting down.
    """
    W = as_hermitian(W)
    if np.real(np.trace(W)) <= 0:
        return 0.0
    t1 = _worst_bob(W, spec, tol)
    t2 = _worst_eve(W, spec, tol)
    return float(np.log2(max(t1, 1.0)) - np.log2(t2))


def worst_case_secrecy_rate(W, spec, tol=DEFAULT_TOL):
    """Minimum secrecy rate of rank-one ``W`` over every channel in the balls.

    Solves one SDP for Bob's worst channel and one for the worst Eve and
    returns ``log2 t1 - log2 t2`` in bits/s/Hz.  ``W = 0`` gives 0.

    Raises ``ValueError`` when ``W`` is not rank one (``lambda_2 / lambda_1
    > 1e-4``): for higher rank the worst Eve channel would have to be found
    for the determinant form, which this evaluator does not attempt.
    """
    W = as_hermitian(W)
    if W.shape != (spec.n_t, spec.n_t):
        raise ValueError(f"W has shape {W.shape}, expected {(spec.n_t, spec.n_t)}")
    lam, _ = hermitian_eig(W)
    if lam[0] <= 0.0:
        return 0.0
    ratio = max(lam[1], 0.0) / lam[0] if lam.size > 1 else 0.0
    if ratio > RANK_ONE_TOL:
        raise ValueError(f"worst-case evaluation needs a rank-one W (rank ratio {ratio:.3e})")
    return _relaxed_worst_case(W, spec, tol)


def worst_case_closed_form(w, spec):
    """Worst-case rate of ``W = w w^H`` from the aligned boundary channels.

    Bob's worst error points against ``w`` and Eve's along ``G_bar^H w``,
    giving ``t1 = 1 + max(0, |h_bar^H w| - eps_b ||w||)^2`` and
    ``t2 = max_k 1 + (||G_bar_k^H w|| + eps_k ||w||)^2``.
    """
    if w is None:
        return 0.0
    w = np.asarray(w, dtype=complex).ravel()
    nw = np.linalg.norm(w)
    if nw == 0.0:
        return 0.0
    t1 = 1.0 + max(0.0, abs(np.vdot(spec.h_bar, w)) - spec.eps_b * nw) ** 2
    t2 = max((1.0 + (np.linalg.norm(G.conj().T @ w) + eps * nw) ** 2 for G, eps in zip(spec.G_bars, spec.eps_e)), default=1.0)
    return float(np.log2(t1) - np.log2(t2))


def nonneg_rate_probability(pairs, tol=DEFAULT_TOL):
    """Fraction of ``(W, spec)`` pairs whose worst-case rate is ``>= -1e-9``."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("ensemble is empty")
    hits = sum(worst_case_secrecy_rate(W, spec, tol=tol) >= -1e-9 for W, spec in pairs)
    return hits / len(pairs)


def nominal_rate(design, spec):
    """Secrecy rate of a design at the channel means."""
    return secrecy_rate(design.W, spec.nominal())
