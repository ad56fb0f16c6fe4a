"""Dense block-structured semidefinite programming.

Problems are stated in inequality (LMI) form::

    minimize    c @ x
    subject to  F0_j + sum_i x_i F_ij  >= 0     for every block j
                A @ x == b

with ``x`` free.  Blocks are either real symmetric PSD blocks or scalar
nonnegativity constraints.  The dual problem is::

    maximize    -sum_j <F0_j, Z_j> - b @ y
    subject to  sum_j <F_ij, Z_j> - (A^T y)_i == c_i,   Z_j >= 0

:func:`solve` runs a primal-dual interior-point method on the homogeneous
self-dual embedding of this pair, with Nesterov-Todd scaling and a
Mehrotra predictor-corrector step.  The embedding gives an infeasible start
and rigorous infeasibility certificates for free.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.linalg.lapack

__all__ = [
    "ConeBlock",
    "SdpProblem",
    "SdpSolution",
    "SdpError",
    "solve",
    "verify_solution",
    "dump_problem",
    "load_problem",
    "OPTIMAL",
    "PRIMAL_INFEASIBLE",
    "DUAL_INFEASIBLE",
    "SLOW_PROGRESS",
]

OPTIMAL = "optimal"
PRIMAL_INFEASIBLE = "primal-infeasible"
DUAL_INFEASIBLE = "dual-infeasible-or-unbounded"
SLOW_PROGRESS = "slow-progress"

PSD = "psd"
NONNEG = "nonneg"

STEP_FRACTION = 0.98
MAX_ITERS = 200
STALL_ITERS = 10
KKT_RTOL = 1e-12


class SdpError(ValueError):
    """Raised for ill-formed problems."""


@dataclass(frozen=True)
class ConeBlock:
    """One cone constraint ``F0 + sum_i x_i F[i] >= 0``.

    ``F0`` has shape ``(d, d)`` and ``F`` shape ``(num_vars, d, d)``.  A
    ``"nonneg"`` block is the 1x1 case.
    """

    kind: str
    F0: np.ndarray
    F: np.ndarray

    @property
    def dim(self):
        return self.F0.shape[0]

    def value(self, x):
        return self.F0 + np.tensordot(x, self.F, axes=1)


@dataclass(frozen=True)
class SdpProblem:
    num_vars: int
    objective: np.ndarray
    blocks: tuple
    eq_A: np.ndarray
    eq_b: np.ndarray

    @classmethod
    def create(cls, objective, blocks, eq_A=None, eq_b=None):
        """Validate and freeze a problem.

        ``blocks`` is a sequence of ``(kind, F0, F)`` triples or
        :class:`ConeBlock` instances.
        """
        c = np.asarray(objective, dtype=float).ravel()
        n = c.size
        if n == 0:
            raise SdpError("problem has no variables")
        if not np.all(np.isfinite(c)):
            raise SdpError("objective has non-finite entries")
        frozen = []
        for j, blk in enumerate(blocks):
            if isinstance(blk, ConeBlock):
                kind, F0, F = blk.kind, blk.F0, blk.F
            else:
                kind, F0, F = blk
            F0 = np.atleast_2d(np.asarray(F0, dtype=float))
            F = np.asarray(F, dtype=float)
            d = F0.shape[0]
            if kind not in (PSD, NONNEG):
                raise SdpError(f"block {j}: unknown cone kind {kind!r}")
            if d < 1 or F0.shape != (d, d):
                raise SdpError(f"block {j}: F0 must be square, got {F0.shape}")
            if kind == NONNEG and d != 1:
                raise SdpError(f"block {j}: nonneg blocks must have dim 1")
            F = F.reshape(n, d, d) if F.size == n * d * d else None
            if F is None:
                raise SdpError(f"block {j}: expected {n} coefficient matrices of size {d}")
            if not (np.all(np.isfinite(F0)) and np.all(np.isfinite(F))):
                raise SdpError(f"block {j}: non-finite coefficients")
            if np.max(np.abs(F0 - F0.T), initial=0.0) > 1e-12 * (1 + np.abs(F0).max()):
                raise SdpError(f"block {j}: F0 is not symmetric")
            if np.max(np.abs(F - F.transpose(0, 2, 1)), initial=0.0) > 1e-12 * (1 + np.abs(F).max()):
                raise SdpError(f"block {j}: some F_i is not symmetric")
            F0 = 0.5 * (F0 + F0.T)
            F = 0.5 * (F + F.transpose(0, 2, 1))
            frozen.append(ConeBlock(kind, F0, F))
        if not frozen:
            raise SdpError("problem has no cone blocks")
        if eq_A is None or np.size(eq_A) == 0:
            A = np.zeros((0, n))
            b = np.zeros(0)
        else:
            A = np.atleast_2d(np.asarray(eq_A, dtype=float))
            b = np.asarray(eq_b, dtype=float).ravel()
            if A.shape[1] != n or A.shape[0] != b.size:
                raise SdpError(f"equality shapes {A.shape} and {b.shape} do not match {n} variables")
        return cls(n, c, tuple(frozen), A, b)


@dataclass
class SdpSolution:
    status: str
    x: np.ndarray
    block_values: list
    dual_values: list
    y: np.ndarray
    objective: float
    dual_objective: float
    duality_gap: float
    iterations: int
    certificate: dict = field(default=None)

    @property
    def optimal(self):
        return self.status == OPTIMAL


# -- cone bookkeeping ---------------------------------------------------------


class _Cones:
    """Stacked problem data split into one orthant block and PSD blocks."""

    def __init__(self, problem):
        n = problem.num_vars
        lin = [b for b in problem.blocks if b.kind == NONNEG]
        self.psd = [b for b in problem.blocks if b.kind == PSD]
        self.order = problem.blocks
        # s = h - G x, with h = F0 and G = -F
        self.Gl = -np.array([b.F[:, 0, 0] for b in lin]).reshape(len(lin), n)
        self.hl = np.array([b.F0[0, 0] for b in lin])
        self.Gs = [-b.F for b in self.psd]
        self.hs = [b.F0 for b in self.psd]
        self.dims = [b.dim for b in self.psd]
        self.nl = len(lin)
        self.degree = self.nl + sum(self.dims)

    def G(self, x):
        return [self.Gl @ x] + [np.tensordot(x, G, axes=1) for G in self.Gs]

    def GT(self, z):
        out = self.Gl.T @ z[0]
        for G, Z in zip(self.Gs, z[1:]):
            out = out + G.reshape(G.shape[0], -1) @ Z.ravel()
        return out

    def h(self):
        return [self.hl.copy()] + [H.copy() for H in self.hs]

    def identity(self):
        return [np.ones(self.nl)] + [np.eye(d) for d in self.dims]

    def blocks_in_order(self, v):
        """Re-interleave ``[orthant, psd...]`` into the problem's block order."""
        out, il, ip = [], 0, 1
        for b in self.order:
            if b.kind == NONNEG:
                out.append(np.array([[v[0][il]]]))
                il += 1
            else:
                out.append(v[ip])
                ip += 1
        return out


def _dot(u, v):
    return float(u[0] @ v[0] + sum(np.sum(a * b) for a, b in zip(u[1:], v[1:])))


def _norm(u):
    return np.sqrt(_dot(u, u))


def _axpy(a, u, v):
    return [a * ui + vi for ui, vi in zip(u, v)]


class _Scaling:
    """Nesterov-Todd scaling ``W`` with ``W^{-T} s = W z = lambda``.

    Orthant: ``W = diag(w)``.  PSD block: ``W(Z) = R^T Z R`` and
    ``W^{-T}(S) = R^{-1} S R^{-T}``.
    """

    def __init__(self, w, lam_l, R, Rinv, lam_s):
        self.w, self.lam_l = w, lam_l
        self.R, self.Rinv, self.lam_s = R, Rinv, lam_s

    @classmethod
    def from_pair(cls, s, z):
        w = np.sqrt(s[0] / z[0])
        lam_l = np.sqrt(s[0] * z[0])
        R, Rinv, lam_s = [], [], []
        for S, Z in zip(s[1:], z[1:]):
            r, ri, lam = _nt_block(S, Z)
            R.append(r)
            Rinv.append(ri)
            lam_s.append(lam)
        return cls(w, lam_l, R, Rinv, lam_s)

    def updated(self, s_tilde, z_tilde):
        """Scaling for the point whose scaled coordinates are given."""
        w = self.w * np.sqrt(s_tilde[0] / z_tilde[0])
        lam_l = np.sqrt(s_tilde[0] * z_tilde[0])
        R, Rinv, lam_s = [], [], []
        for R0, Ri0, S, Z in zip(self.R, self.Rinv, s_tilde[1:], z_tilde[1:]):
            r, ri, lam = _nt_block(S, Z)
            R.append(R0 @ r)
            Rinv.append(ri @ Ri0)
            lam_s.append(lam)
        return _Scaling(w, lam_l, R, Rinv, lam_s)

    def lam(self):
        return [self.lam_l] + [np.diag(l) for l in self.lam_s]

    def apply(self, z):
        """W z"""
        return [self.w * z[0]] + [R.T @ Z @ R for R, Z in zip(self.R, z[1:])]

    def apply_inv_t(self, s):
        """W^{-T} s"""
        return [s[0] / self.w] + [Ri @ S @ Ri.T for Ri, S in zip(self.Rinv, s[1:])]

    def apply_t(self, u):
        """W^T u"""
        return [self.w * u[0]] + [R @ U @ R.T for R, U in zip(self.R, u[1:])]

    def primal(self):
        return self.apply_t(self.lam())

    def dual(self):
        return [self.lam_l / self.w] + [Ri.T @ np.diag(l) @ Ri for Ri, l in zip(self.Rinv, self.lam_s)]


def _chol(M):
    M = 0.5 * (M + M.T)
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        # numerically semidefinite: fall back to a symmetric square root
        ev, V = np.linalg.eigh(M)
        ev = np.maximum(ev, 1e-300)
        _, L = np.linalg.qr((V * np.sqrt(ev)).T)
        L = L.T
        return L * np.sign(np.diag(L))


def _nt_block(S, Z):
    L1 = _chol(S)
    L2 = _chol(Z)
    M = L2.T @ L1
    try:
        U, lam, Vt = np.linalg.svd(M)
    except np.linalg.LinAlgError:
        # the divide-and-conquer driver occasionally fails to converge on
        # well-conditioned input; the QR-iteration driver does not
        U, lam, Vt = scipy.linalg.svd(M, lapack_driver="gesvd", check_finite=False)
    isq = 1.0 / np.sqrt(lam)
    R = (L1 @ Vt.T) * isq
    Rinv = (np.sqrt(lam)[:, None] * Vt) @ scipy.linalg.solve_triangular(L1, np.eye(L1.shape[0]), lower=True)
    return R, Rinv, lam


def _jordan(lam, u):
    """lambda o u for the diagonal scaled point lambda."""
    out = [lam[0] * u[0]]
    for l, U in zip(lam[1:], u[1:]):
        d = np.diag(l)
        out.append(0.5 * (d[:, None] * U + U * d[None, :]))
    return out


def _jordan_solve(lam, r):
    """u with lambda o u = r."""
    out = [r[0] / lam[0]]
    for l, Rm in zip(lam[1:], r[1:]):
        d = np.diag(l)
        out.append(2.0 * Rm / (d[:, None] + d[None, :]))
    return out


def _jordan_product(u, v):
    out = [u[0] * v[0]]
    for U, V in zip(u[1:], v[1:]):
        P = U @ V
        out.append(0.5 * (P + P.T))
    return out


def _max_step(lam, ds):
    """Largest alpha with lambda + alpha * ds in the cone (inf if unbounded)."""
    amax = np.inf
    neg = ds[0] < 0
    if np.any(neg):
        amax = min(amax, np.min(-lam[0][neg] / ds[0][neg]))
    for l, D in zip(lam[1:], ds[1:]):
        isq = 1.0 / np.sqrt(np.diag(l))
        ev = np.linalg.eigvalsh(isq[:, None] * D * isq[None, :])
        if ev[0] < 0:
            amax = min(amax, -1.0 / ev[0])
    return amax


class _KKT:
    """Solver for the scaled Newton system

        A^T dy + G^T dz = bx
        A dx            = by
        G dx - W^T W dz = bz

    returning ``(dx, dy, W dz)``.
    """

    def __init__(self, cones, A, scaling):
        self.cones, self.A, self.W = cones, A, scaling
        n = A.shape[1]
        Gl_hat = cones.Gl / scaling.w[:, None]
        self.Gs_hat = []
        rows = [Gl_hat]
        for G, Ri in zip(cones.Gs, scaling.Rinv):
            d = Ri.shape[0]
            # Ri @ G_i @ Ri^T for every i as two large products
            T = (Ri @ G.transpose(1, 0, 2).reshape(d, -1)).reshape(d, n, d).transpose(1, 0, 2)
            T = (T.reshape(-1, d) @ Ri.T).reshape(n, d, d)
            self.Gs_hat.append(T)
            # packed upper triangle, off-diagonals weighted so inner products match
            iu, ju = np.triu_indices(d)
            weight = np.where(iu == ju, 1.0, np.sqrt(2.0))
            rows.append((T[:, iu, ju] * weight).T)
        self.Gl_hat = Gl_hat
        self.n = n
        self.X = np.vstack(rows)
        self.used_qr = False
        try:
            R = scipy.linalg.cholesky(self.X.T @ self.X, check_finite=False)
        except np.linalg.LinAlgError:
            R = self._qr_factor()
        self._set_factor(R)

    def _qr_factor(self):
        # H = G_hat^T G_hat = R^T R from a QR factorisation, which avoids
        # squaring the condition number of G_hat
        self.used_qr = True
        qr, _, _, info = scipy.linalg.lapack.dgeqrf(self.X)
        if info != 0:
            raise np.linalg.LinAlgError("QR factorisation failed")
        return np.triu(qr[: self.n])

    def _set_factor(self, R):
        d = np.abs(np.diag(R))
        if d.size and d.min() <= 1e-14 * d.max():
            raise np.linalg.LinAlgError("scaled constraint matrix is rank deficient")
        self.R = R
        A = self.A
        if A.shape[0]:
            M = scipy.linalg.solve_triangular(R, A.T, trans="T", check_finite=False)
            self.MtM = scipy.linalg.cho_factor(M.T @ M, check_finite=False)
            self.M = M

    def _h_solve(self, r):
        # H^{-1} r via two triangular solves
        u = scipy.linalg.solve_triangular(self.R, r, trans="T", check_finite=False)
        return scipy.linalg.solve_triangular(self.R, u, check_finite=False)

    def _ghat(self, x):
        return [self.Gl_hat @ x] + [np.tensordot(x, G, axes=1) for G in self.Gs_hat]

    def _ghat_t(self, u):
        out = self.Gl_hat.T @ u[0]
        for G, U in zip(self.Gs_hat, u[1:]):
            out = out + G.reshape(G.shape[0], -1) @ U.ravel()
        return out

    def _solve_once(self, bx, by, bz_hat):
        r = bx + self._ghat_t(bz_hat)
        if self.A.shape[0]:
            u = scipy.linalg.solve_triangular(self.R, r, trans="T", check_finite=False)
            dy = scipy.linalg.cho_solve(self.MtM, self.M.T @ u - by, check_finite=False)
            dx = self._h_solve(r - self.A.T @ dy)
        else:
            dy = np.zeros(0)
            dx = self._h_solve(r)
        dz = _axpy(-1.0, bz_hat, self._ghat(dx))
        return dx, dy, dz

    def solve(self, bx, by, bz_hat, refinement=2):
        """``bz_hat`` is ``W^{-T} bz``.

        Starts from the Cholesky factor of the normal matrix and refines on
        the full system; if that leaves a large residual the factor is
        recomputed by QR and the solve repeated.
        """
        while True:
            dx, dy, dz = self._solve_once(bx, by, bz_hat)
            for _ in range(refinement):
                r1, r2, r3 = self._residual(bx, by, bz_hat, dx, dy, dz)
                ex, ey, ez = self._solve_once(r1, r2, r3)
                dx, dy, dz = dx + ex, dy + ey, _axpy(1.0, ez, dz)
            if self.used_qr:
                return dx, dy, dz
            r1, r2, r3 = self._residual(bx, by, bz_hat, dx, dy, dz)
            res = np.sqrt(r1 @ r1 + r2 @ r2 + _dot(r3, r3))
            size = np.sqrt(bx @ bx + by @ by + _dot(bz_hat, bz_hat))
            if res <= KKT_RTOL * max(size, 1e-300):
                return dx, dy, dz
            self._set_factor(self._qr_factor())

    def _residual(self, bx, by, bz_hat, dx, dy, dz):
        r1 = bx - self.A.T @ dy - self._ghat_t(dz)
        r2 = by - self.A @ dx
        r3 = _axpy(1.0, dz, _axpy(-1.0, self._ghat(dx), bz_hat))
        return r1, r2, r3


def _check_rank(problem):
    # the Newton system is solved through the normal matrix of the stacked
    # constraint map, so the variables must be determined by the constraints
    cols = [problem.eq_A] + [blk.F.reshape(problem.num_vars, -1).T for blk in problem.blocks]
    M = np.vstack(cols)
    if np.linalg.matrix_rank(M) < problem.num_vars:
        raise SdpError("constraint coefficients are linearly dependent (some direction of x is unconstrained)")


def solve(problem, tol=1e-9, max_iters=MAX_ITERS, verbose=False):
    """Solve an :class:`SdpProblem`.

    Returns an :class:`SdpSolution` whose status is one of ``optimal``,
    ``primal-infeasible`` (with a dual ray in ``certificate``),
    ``dual-infeasible-or-unbounded`` (with a primal ray) or ``slow-progress``
    when the iteration cap is hit or the Newton system breaks down.

    The stacked map ``x -> (A x, F_1 x_1 + ... )`` must be injective;
    otherwise :class:`SdpError` is raised.
    """
    if not isinstance(problem, SdpProblem):
        raise SdpError("expected an SdpProblem")
    if not (1e-10 <= tol <= 1e-4):
        raise SdpError(f"tol must lie in [1e-10, 1e-4], got {tol}")
    _check_rank(problem)
    cones = _Cones(problem)
    c, A, b = problem.objective, problem.eq_A, problem.eq_b
    n = problem.num_vars
    h = cones.h()
    e = cones.identity()
    nu = cones.degree

    resx0 = max(1.0, np.linalg.norm(c))
    resy0 = max(1.0, np.linalg.norm(b))
    resz0 = max(1.0, _norm(h))

    scale = max(1.0, _norm(h))
    x = np.zeros(n)
    y = np.zeros(A.shape[0])
    s = [scale * ei for ei in e]
    z = [scale * ei for ei in e]
    tau, kappa = 1.0, scale * scale
    W = _Scaling.from_pair(s, z)

    status = SLOW_PROGRESS
    certificate = None
    best = None
    it = 0
    for it in range(max_iters + 1):
        s, z = W.primal(), W.dual()
        lam = W.lam()
        Gx = cones.G(x)
        rx = A.T @ y + cones.GT(z) + c * tau
        ry = b * tau - A @ x
        rz = [hi * tau - gi - si for hi, gi, si in zip(h, Gx, s)]
        cx, by_, hz = c @ x, b @ y, _dot(h, z)
        rt = -cx - by_ - hz - kappa
        sz = _dot(s, z)
        mu = (sz + tau * kappa) / (nu + 1)

        pcost = cx / tau
        dcost = -(hz + by_) / tau
        # residuals relative to the size of the terms that form them, so
        # that large multipliers do not turn rounding into infeasibility
        GTz = rx - c * tau - A.T @ y
        Ax = A @ x
        pres = max(
            np.linalg.norm(ry) / max(tau * resy0, np.linalg.norm(Ax)),
            _norm(rz) / max(tau * resz0, _norm(Gx), _norm(s)),
        )
        dres = np.linalg.norm(rx) / max(tau * resx0, np.linalg.norm(A.T @ y), np.linalg.norm(GTz))
        gap = sz / tau**2
        relgap = gap / max(1.0, abs(pcost))
        if verbose:
            print(f"{it:3d} {pcost: .8e} {dcost: .8e} pres {pres:.1e} dres {dres:.1e} gap {relgap:.1e} tau {tau:.1e} kappa {kappa:.1e}")
        if pres <= tol and dres <= tol and relgap <= tol:
            status = OPTIMAL
            break
        merit = max(pres, dres, relgap)
        if best is None or merit < best[0]:
            best = (merit, it, x, y, z, tau, pres, dres, relgap)
        elif it - best[1] >= STALL_ITERS:
            break
        # infeasibility certificates: rays of the homogeneous model
        if hz + by_ < 0:
            pinf = np.linalg.norm(A.T @ y + cones.GT(z)) / resx0 / -(hz + by_)
            if pinf <= tol:
                status = PRIMAL_INFEASIBLE
                k = -1.0 / (hz + by_)
                certificate = {"y": k * y, "z": [k * zi for zi in z]}
                break
        if cx < 0:
            dinf = max(
                np.linalg.norm(A @ x) / resy0,
                _norm(_axpy(1.0, Gx, s)) / resz0,
            ) / -cx
            if dinf <= tol:
                status = DUAL_INFEASIBLE
                certificate = {"x": -x / cx}
                break
        if it == max_iters:
            break

        try:
            kkt = _KKT(cones, A, W)
        except (np.linalg.LinAlgError, ValueError):
            break
        h_hat = W.apply_inv_t(h)
        dx1, dy1, dz1 = kkt.solve(-c, b, h_hat)
        coef1 = _dot(dz1, dz1)

        def direction(eta, rc, rk):
            bz_hat = _axpy(-1.0, _jordan_solve(lam, rc), [eta * v for v in W.apply_inv_t(rz)])
            dx0, dy0, dz0 = kkt.solve(-eta * rx, eta * ry, bz_hat)
            num = -eta * rt + c @ dx0 + b @ dy0 + _dot(h_hat, dz0) + rk / tau
            dtau = num / (coef1 + kappa / tau)
            dx = dx0 + dtau * dx1
            dy = dy0 + dtau * dy1
            dz = _axpy(dtau, dz1, dz0)
            ds = _axpy(-1.0, dz, _jordan_solve(lam, rc))
            dkappa = (rk - kappa * dtau) / tau
            return dx, dy, dz, ds, dtau, dkappa

        def step_to_boundary(dz, ds, dtau, dkappa):
            a = min(_max_step(lam, ds), _max_step(lam, dz))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dkappa < 0:
                a = min(a, -kappa / dkappa)
            return a

        lamsq = _jordan(lam, lam)
        # predictor
        dxa, dya, dza, dsa, dtaua, dkappaa = direction(1.0, [-v for v in lamsq], -tau * kappa)
        aa = min(1.0, step_to_boundary(dza, dsa, dtaua, dkappaa))
        sigma = (1.0 - aa) ** 3
        # combined predictor-corrector
        rc = _axpy(-1.0, _jordan_product(dsa, dza), _axpy(sigma * mu, e, [-v for v in lamsq]))
        rk = -tau * kappa + sigma * mu - dtaua * dkappaa
        dx, dy, dz, ds, dtau, dkappa = direction(1.0 - sigma, rc, rk)
        if not all(np.all(np.isfinite(v)) for v in (dx, dy, dtau, dkappa)):
            break
        alpha = min(1.0, STEP_FRACTION * step_to_boundary(dz, ds, dtau, dkappa))

        x = x + alpha * dx
        y = y + alpha * dy
        tau = tau + alpha * dtau
        kappa = kappa + alpha * dkappa
        s_tilde = _axpy(alpha, ds, lam)
        z_tilde = _axpy(alpha, dz, lam)
        try:
            W = W.updated(s_tilde, z_tilde)
        except (np.linalg.LinAlgError, ValueError):
            break
        if not (np.isfinite(tau) and tau > 0 and kappa > 0):
            break

    if status == SLOW_PROGRESS and best is not None:
        # fall back to the best iterate seen; accept it within the 10x slack
        _, _, x, y, z, tau, pres, dres, relgap = best
        if max(pres, dres, relgap) <= 10 * tol:
            status = OPTIMAL
    if status in (OPTIMAL, SLOW_PROGRESS):
        xs = x / tau
        ys = y / tau
        zs = [zi / tau for zi in z]
    else:
        xs, ys, zs = x, y, z
    block_values = [blk.value(xs) for blk in problem.blocks]
    dual_values = cones.blocks_in_order(zs)
    pobj = float(c @ xs)
    dobj = float(-_dot(h, zs) - b @ ys)
    if certificate is not None:
        certificate["z"] = cones.blocks_in_order(certificate["z"]) if "z" in certificate else None
    return SdpSolution(
        status=status,
        x=xs,
        block_values=block_values,
        dual_values=dual_values,
        y=ys,
        objective=pobj,
        dual_objective=dobj,
        duality_gap=pobj - dobj,
        iterations=it,
        certificate=certificate,
    )


def verify_solution(problem, solution):
    """Recompute feasibility and optimality residuals from scratch.

    For an infeasibility certificate the report describes the ray instead.
    """
    c, A, b = problem.objective, problem.eq_A, problem.eq_b
    if solution.status == PRIMAL_INFEASIBLE:
        cert = solution.certificate
        Z, y = cert["z"], cert["y"]
        ray = -A.T @ y
        for blk, Zj in zip(problem.blocks, Z):
            ray = ray + blk.F.reshape(problem.num_vars, -1) @ Zj.ravel()
        value = sum(np.sum(blk.F0 * Zj) for blk, Zj in zip(problem.blocks, Z)) + b @ y
        return {
            "kind": "primal-infeasibility-ray",
            "ray_min_eig": min(np.linalg.eigvalsh(Zj)[0] for Zj in Z),
            "ray_residual": float(np.linalg.norm(ray)),
            "ray_value": float(value),
        }
    if solution.status == DUAL_INFEASIBLE:
        d = solution.certificate["x"]
        return {
            "kind": "dual-infeasibility-ray",
            "ray_min_eig": min(np.linalg.eigvalsh(np.tensordot(d, blk.F, axes=1))[0] for blk in problem.blocks),
            "ray_residual": float(np.linalg.norm(A @ d)),
            "ray_value": float(c @ d),
        }
    x, y = solution.x, solution.y
    values = [blk.value(x) for blk in problem.blocks]
    Z = solution.dual_values
    dual_res = -c - A.T @ y
    for blk, Zj in zip(problem.blocks, Z):
        dual_res = dual_res + blk.F.reshape(problem.num_vars, -1) @ Zj.ravel()
    pobj = float(c @ x)
    dobj = float(-sum(np.sum(blk.F0 * Zj) for blk, Zj in zip(problem.blocks, Z)) - b @ y)
    return {
        "kind": "primal-dual-point",
        "block_min_eigs": [float(np.linalg.eigvalsh(V)[0]) for V in values],
        "dual_min_eigs": [float(np.linalg.eigvalsh(Zj)[0]) for Zj in Z],
        "equality_residual": float(np.max(np.abs(A @ x - b), initial=0.0)),
        "dual_residual": float(np.max(np.abs(dual_res), initial=0.0)),
        "complementarity": [float(np.sum(V * Zj)) for V, Zj in zip(values, Z)],
        "primal_objective": pobj,
        "dual_objective": dobj,
        "gap": pobj - dobj,
    }


def dump_problem(problem, path):
    """Write ``problem`` as sparse triplets.

    Format, one record per line, blank and ``#`` lines ignored::

        vars <n>
        c <i> <value>
        block <j> <psd|nonneg> <dim>
        f <j> <i> <row> <col> <value>     # i = 0 is F0, i >= 1 is F_i
        eq <row> <i> <value>              # A[row, i - 1]
        rhs <row> <value>

    Only the upper triangle (``row <= col``) of each matrix is written.
    """
    lines = [f"vars {problem.num_vars}"]
    lines += [f"c {i + 1} {float(v)!r}" for i, v in enumerate(problem.objective) if v != 0.0]
    for j, blk in enumerate(problem.blocks):
        lines.append(f"block {j} {blk.kind} {blk.dim}")
        mats = np.concatenate([blk.F0[None], blk.F])
        for i, r, col in zip(*np.nonzero(np.triu(mats))):
            lines.append(f"f {j} {i} {r} {col} {float(mats[i, r, col])!r}")
    for r, row in enumerate(problem.eq_A):
        lines += [f"eq {r} {i + 1} {float(v)!r}" for i, v in enumerate(row) if v != 0.0]
        lines.append(f"rhs {r} {float(problem.eq_b[r])!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_problem(path):
    """Read a file written by :func:`dump_problem`."""
    n = None
    c = {}
    blocks = []
    eqs = {}
    rhs = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            try:
                if tok[0] == "vars":
                    n = int(tok[1])
                elif tok[0] == "c":
                    c[int(tok[1]) - 1] = float(tok[2])
                elif tok[0] == "block":
                    d = int(tok[3])
                    blocks.append([tok[2], np.zeros((n + 1, d, d))])
                elif tok[0] == "f":
                    j, i, r, col = map(int, tok[1:5])
                    M = blocks[j][1]
                    M[i, r, col] = M[i, col, r] = float(tok[5])
                elif tok[0] == "eq":
                    eqs.setdefault(int(tok[1]), {})[int(tok[2]) - 1] = float(tok[3])
                elif tok[0] == "rhs":
                    rhs[int(tok[1])] = float(tok[2])
                else:
                    raise SdpError(f"unknown record {tok[0]!r}")
            except (IndexError, ValueError, TypeError) as exc:
                raise SdpError(f"{path}:{lineno}: cannot parse {line!r} ({exc})") from None
    if n is None:
        raise SdpError(f"{path}: missing 'vars' record")
    cvec = np.zeros(n)
    for i, v in c.items():
        cvec[i] = v
    p = len(rhs)
    A = np.zeros((p, n))
    for r, row in eqs.items():
        for i, v in row.items():
            A[r, i] = v
    bvec = np.array([rhs[r] for r in range(p)])
    return SdpProblem.create(cvec, [(k, M[0], M[1:]) for k, M in blocks], A, bvec)
