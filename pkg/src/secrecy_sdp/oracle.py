"""Independent checks that do not go through the SDP solver.

* :func:`brute_force_srm` grids over two-antenna beamformers.
* :func:`det_trace_check` compares ``det(I + A)`` with ``1 + Tr(A)``.
* :func:`sample_worst_case` draws channels inside the uncertainty balls and
  keeps the worst secrecy rate seen.
"""

import numpy as np

from .channel import ChannelInstance, UncertaintySpec
from .linalg import as_hermitian

__all__ = ["brute_force_srm", "det_trace_check", "sample_worst_case", "sample_ball"]


def _rates_rank_one(V, h, eves):
    """Secrecy rate of unit-power ``v v^H`` for each column ``v`` of ``V``.

    For rank-one covariance ``det(I + G^H v v^H G) = 1 + ||G^H v||^2``,
    so every rate is a ratio of scalars.
    """
    bob = np.abs(h.conj() @ V) ** 2
    if not eves:
        return bob, np.zeros_like(bob)
    leak = np.max([np.sum(np.abs(G.conj().T @ V) ** 2, axis=0) for G in eves], axis=0)
    return bob, leak


def brute_force_srm(instance, n_dir=200, n_pow=20):
    """Best worst-Eve secrecy rate over a grid of rank-one two-antenna designs.

    Beamformers are ``sqrt(p) * (cos t, sin t * e^{i phi})`` with ``t`` on an
    ``n_dir`` grid over ``[0, pi/2]``, ``phi`` on an ``n_dir`` grid over
    ``[0, 2 pi)`` and ``p`` log-spaced over ``[P * 1e-3, P]``.  The first
    entry is kept real since a global phase does not change any rate.
    Returns the largest rate found, clamped at zero (``W = 0`` is always
    available).  The ``t`` grid includes both end points, so it contains
    every coarser grid of the form ``n -> 2 n - 1``.
    """
    if not isinstance(instance, ChannelInstance):
        raise TypeError("instance must be a ChannelInstance")
    if instance.n_t != 2:
        raise ValueError(f"brute force supports exactly 2 transmit antennas, got {instance.n_t}")
    if n_dir < 2 or n_pow < 1:
        raise ValueError("need n_dir >= 2 and n_pow >= 1")
    t = np.linspace(0.0, 0.5 * np.pi, n_dir)
    phi = 2.0 * np.pi * np.arange(n_dir - 1) / (n_dir - 1)
    T, PH = np.meshgrid(t, phi, indexing="ij")
    V = np.vstack([np.cos(T).ravel(), (np.sin(T) * np.exp(1j * PH)).ravel()])
    bob, leak = _rates_rank_one(V, instance.h, instance.eves)
    P = instance.power
    powers = np.geomspace(P * 1e-3, P, n_pow) if n_pow > 1 else np.array([P])
    best = 0.0
    for p in powers:
        rates = np.log2(1.0 + p * bob) - np.log2(1.0 + p * leak)
        best = max(best, float(np.max(rates)))
    return best


def det_trace_check(A):
    """Return ``(det(I + A), 1 + Tr(A), tight)`` for PSD ``A``.

    ``tight`` is true when ``A`` is numerically rank at most one
    (``lambda_2 <= 1e-9 lambda_1``).  The determinant uses LAPACK
    eigenvalues so that this check does not depend on the package's own
    Jacobi routine.
    """
    A = as_hermitian(A)
    lam = np.linalg.eigvalsh(A)[::-1]
    scale = max(lam[0], 1.0)
    if lam[-1] < -1e-9 * scale:
        raise ValueError(f"A is not positive semidefinite (min eigenvalue {lam[-1]:.3e})")
    lam = np.maximum(lam, 0.0)
    lhs = float(np.prod(1.0 + lam))
    rhs = float(1.0 + np.sum(lam))
    tight = lam.size < 2 or lam[1] <= 1e-9 * lam[0]
    return lhs, rhs, bool(tight)


def sample_ball(rng, center, radius, n):
    """``n`` points drawn uniformly from the complex ball around ``center``.

    ``center`` may be a vector or a matrix (Frobenius ball).  Returns an
    array of shape ``(n,) + center.shape``.
    """
    center = np.asarray(center, dtype=complex)
    d = center.size
    z = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    # uniform in a ball of real dimension 2d
    r = radius * rng.random(n) ** (1.0 / (2 * d))
    pts = center.ravel()[None, :] + r[:, None] * z
    return pts.reshape((n,) + center.shape)


def _boundary_candidates(w, spec):
    # Bob's error anti-aligned with h_bar^H w, clipped so the gain stops at zero
    nw = np.linalg.norm(w)
    u = w / nw
    a = np.vdot(spec.h_bar, u)
    shrink = min(spec.eps_b, abs(a))
    phase = np.conj(a) / abs(a) if abs(a) > 0 else 1.0
    h_worst = spec.h_bar - shrink * phase * u
    # Eve's error along G_bar^H w, i.e. E = eps * u b^H with b the unit
    # direction of G_bar^H w
    g_worst = []
    for G, eps in zip(spec.G_bars, spec.eps_e):
        v = G.conj().T @ u
        nv = np.linalg.norm(v)
        b = v / nv if nv > 0 else np.eye(G.shape[1])[:, 0]
        g_worst.append(G + eps * np.outer(u, b.conj()))
    return h_worst, g_worst


def sample_worst_case(W, spec, n, rng, include_boundary=True):
    """Smallest secrecy rate of rank-one ``W`` over ``n`` sampled channels.

    Samples Bob and each Eve independently and uniformly from their balls.
    Since the secrecy rate of a rank-one ``W`` is Bob's term minus the
    largest Eve term, and the balls are independent, the minimum over all
    combinations equals the minimum Bob term minus the maximum Eve term,
    so no product enumeration is needed.  With ``include_boundary`` the
    analytic worst-case channels for ``W = w w^H`` are added as extra
    candidates, which makes the result equal to the exact worst case.
    """
    if not isinstance(spec, UncertaintySpec):
        raise TypeError("spec must be an UncertaintySpec")
    W = as_hermitian(W)
    lam, V = np.linalg.eigh(W)
    if lam[-1] <= 0.0:
        return 0.0
    if lam.size > 1 and max(lam[-2], 0.0) > 1e-4 * lam[-1]:
        raise ValueError("sampled worst case needs a rank-one W")
    w = V[:, -1] * np.sqrt(lam[-1])
    hs = sample_ball(rng, spec.h_bar, spec.eps_b, n)
    bob = np.abs(hs.conj() @ w) ** 2
    leak = []
    for G, eps in zip(spec.G_bars, spec.eps_e):
        Gs = sample_ball(rng, G, eps, n)
        leak.append(np.sum(np.abs(np.einsum("nij,i->nj", Gs.conj(), w)) ** 2, axis=1))
    bob_min = float(np.min(bob))
    leak_max = max((float(np.max(l)) for l in leak), default=0.0)
    if include_boundary:
        h_worst, g_worst = _boundary_candidates(w, spec)
        bob_min = min(bob_min, float(abs(np.vdot(h_worst, w)) ** 2))
        for Gw in g_worst:
            leak_max = max(leak_max, float(np.linalg.norm(Gw.conj().T @ w) ** 2))
    return float(np.log2(1.0 + bob_min) - np.log2(1.0 + leak_max))
