"""Assemble :class:`~secrecy_sdp.sdp.SdpProblem` instances from affine maps.

Constraints are written as ordinary Python functions of the decision
variables, e.g. ``lambda v: v[lam] * I + v[W]``.  Because each such
function is affine, the builder recovers its coefficient matrices exactly by
evaluating it at zero and at each unit vector of the variables it uses.
Complex Hermitian blocks are mapped to real symmetric blocks with
:func:`~secrecy_sdp.linalg.real_embedding` before they reach the solver.
"""

import numpy as np

from .linalg import as_hermitian, real_embedding
from .sdp import NONNEG, PSD, SdpProblem

__all__ = ["ProblemBuilder", "Var", "hermitian_from_params", "hermitian_to_params"]


class Var:
    """Handle for a scalar or Hermitian-matrix decision variable."""

    def __init__(self, name, start, size, dim=None):
        self.name = name
        self.start = start
        self.size = size
        self.dim = dim

    @property
    def indices(self):
        return range(self.start, self.start + self.size)

    def __repr__(self):
        return f"Var({self.name!r}, {self.start}:{self.start + self.size})"


def hermitian_from_params(p, n):
    """Hermitian matrix from ``n`` real diagonal entries then (re, im) pairs
    of the strict upper triangle in row-major order."""
    p = np.asarray(p, dtype=float)
    M = np.diag(p[:n]).astype(complex)
    iu = np.triu_indices(n, 1)
    vals = p[n::2] + 1j * p[n + 1 :: 2]
    M[iu] = vals
    M[(iu[1], iu[0])] = vals.conj()
    return M


def hermitian_to_params(M):
    M = as_hermitian(M)
    n = M.shape[0]
    iu = np.triu_indices(n, 1)
    up = M[iu]
    out = np.empty(n * n)
    out[:n] = np.real(np.diag(M))
    out[n::2] = up.real
    out[n + 1 :: 2] = up.imag
    return out


class _Values:
    def __init__(self, x):
        self.x = x

    def __getitem__(self, var):
        chunk = self.x[var.start : var.start + var.size]
        if var.dim is None:
            return float(chunk[0])
        return hermitian_from_params(chunk, var.dim)


class ProblemBuilder:
    def __init__(self):
        self.vars = []
        self.num_vars = 0
        self._objective = None
        self._blocks = []
        self._eqs = []

    def _add(self, name, size, dim=None):
        v = Var(name, self.num_vars, size, dim)
        self.num_vars += size
        self.vars.append(v)
        return v

    def scalar(self, name, nonneg=False):
        v = self._add(name, 1)
        if nonneg:
            self.nonneg(lambda vals: vals[v], [v])
        return v

    def hermitian(self, name, n, psd=False):
        v = self._add(name, n * n, n)
        if psd:
            self.psd(lambda vals: vals[v], [v])
        return v

    def values(self, x):
        """Accessor mapping each :class:`Var` to its value in ``x``."""
        return _Values(np.asarray(x, dtype=float))

    def _probe(self, fn, uses, convert):
        x = np.zeros(self.num_vars)
        base = convert(fn(_Values(x)))
        coeffs = {}
        for var in uses:
            for i in var.indices:
                x[i] = 1.0
                coeffs[i] = convert(fn(_Values(x))) - base
                x[i] = 0.0
        return base, coeffs

    def psd(self, fn, uses, hermitian=True):
        """Require ``fn(values)`` to be positive semidefinite.

        ``fn`` must be affine in the variables listed in ``uses``.
        """
        if hermitian:
            convert = lambda M: real_embedding(as_hermitian(M))
        else:
            convert = lambda M: np.asarray(M, dtype=float)
        self._blocks.append((PSD, fn, uses, convert))

    def nonneg(self, fn, uses):
        """Require the real affine scalar ``fn(values) >= 0``."""
        self._blocks.append((NONNEG, fn, uses, lambda v: np.array([[float(np.real(v))]])))

    def equal(self, fn, uses):
        """Require the real affine scalar ``fn(values) == 0``."""
        self._eqs.append((fn, uses))

    def minimize(self, fn, uses):
        self._objective = (fn, uses)

    def build(self):
        n = self.num_vars
        c = np.zeros(n)
        if self._objective is not None:
            c0, coeffs = self._probe(*self._objective, float)
            for i, v in coeffs.items():
                c[i] = v
        blocks = []
        for kind, fn, uses, convert in self._blocks:
            F0, coeffs = self._probe(fn, uses, convert)
            F = np.zeros((n,) + F0.shape)
            for i, M in coeffs.items():
                F[i] = M
            blocks.append((kind, F0, F))
        A = np.zeros((len(self._eqs), n))
        b = np.zeros(len(self._eqs))
        for r, (fn, uses) in enumerate(self._eqs):
            a0, coeffs = self._probe(fn, uses, float)
            for i, v in coeffs.items():
                A[r, i] = v
            b[r] = -a0
        return SdpProblem.create(c, blocks, A, b)
