"""Small dense complex linear algebra.

Hermitian matrices are plain ``numpy`` complex arrays; :func:`as_hermitian`
is the checked constructor.  Eigen-decompositions use a cyclic Jacobi
sweep, which is accurate and plenty fast for the matrix sizes that occur
in transmit design (a few tens of rows at most).
"""

import numpy as np

__all__ = [
    "as_hermitian",
    "hermitian_eig",
    "principal_generalized_eigvec",
    "kron",
    "vec",
    "orthogonal_complement_projector",
    "real_embedding",
    "real_unembedding",
    "normalize_phase",
]

PINV_RTOL = 1e-10


def as_hermitian(A):
    """Return ``(A + A^H) / 2`` as a complex array, rejecting bad input."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return 0.5 * (A + A.conj().T)


def normalize_phase(v, tol=1e-12):
    """Rotate ``v`` so that its first non-negligible entry is real and >= 0."""
    v = np.asarray(v, dtype=complex)
    scale = np.max(np.abs(v)) if v.size else 0.0
    if scale == 0.0:
        return v.copy()
    idx = np.flatnonzero(np.abs(v) > tol * scale)[0]
    out = v * np.exp(-1j * np.angle(v[idx]))
    out[idx] = abs(v[idx])
    return out


def _jacobi_rotation(app, aqq, apq):
    # 2x2 unitary Q with Q^H [[app, apq], [conj(apq), aqq]] Q diagonal
    b = abs(apq)
    phase = apq / b
    tau = (aqq - app) / (2.0 * b)
    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    return np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])


def hermitian_eig(A, max_sweeps=100):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns
    -------
    w : ndarray
        Real eigenvalues in descending order.
    V : ndarray
        Unit-norm eigenvectors as columns, each phase-normalised so that its
        first non-negligible entry is real and nonnegative.
    """
    A = as_hermitian(A)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    if n > 1:
        fro = np.linalg.norm(A)
        for _ in range(max_sweeps):
            off = np.linalg.norm(A - np.diag(np.diag(A)))
            if off <= 1e-15 * fro:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    if abs(apq) <= 1e-300:
                        continue
                    Q = _jacobi_rotation(A[p, p].real, A[q, q].real, apq)
                    idx = [p, q]
                    A[:, idx] = A[:, idx] @ Q
                    A[idx, :] = Q.conj().T @ A[idx, :]
                    A[p, q] = A[q, p] = 0.0
                    A[p, p] = A[p, p].real
                    A[q, q] = A[q, q].real
                    V[:, idx] = V[:, idx] @ Q
    w = np.real(np.diag(A)).copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    V = V[:, order]
    V /= np.linalg.norm(V, axis=0)
    for i in range(n):
        V[:, i] = normalize_phase(V[:, i])
    return w, V


def principal_generalized_eigvec(A, B):
    """Unit vector maximizing ``q^H A q / q^H B q`` for Hermitian A and B > 0."""
    A = as_hermitian(A)
    B = as_hermitian(B)
    wb, Vb = hermitian_eig(B)
    if wb[-1] <= 1e-12:
        raise ValueError(f"B is not positive definite (min eigenvalue {wb[-1]:.3e})")
    # B^{-1/2} A B^{-1/2} has the same spectrum as the pencil
    B_isqrt = (Vb / np.sqrt(wb)) @ Vb.conj().T
    _, V = hermitian_eig(B_isqrt @ A @ B_isqrt)
    q = B_isqrt @ V[:, 0]
    return normalize_phase(q / np.linalg.norm(q))


def kron(A, B):
    return np.kron(np.asarray(A), np.asarray(B))


def vec(A):
    """Stack the columns of ``A`` into one vector."""
    return np.asarray(A).reshape(-1, order="F")


def orthogonal_complement_projector(G):
    """Projector onto the orthogonal complement of the column span of ``G``.

    Singular values below ``1e-10 * sigma_max`` count as zero.
    """
    G = np.asarray(G, dtype=complex)
    if G.ndim == 1:
        G = G[:, None]
    n = G.shape[0]
    if G.size == 0:
        return np.eye(n, dtype=complex)
    U, sv, _ = np.linalg.svd(G, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return np.eye(n, dtype=complex)
    U = U[:, sv > PINV_RTOL * sv[0]]
    return as_hermitian(np.eye(n) - U @ U.conj().T)


def real_embedding(A):
    """Map Hermitian ``A`` to the real symmetric ``[[Re A, -Im A], [Im A, Re A]]``."""
    A = np.asarray(A, dtype=complex)
    re, im = A.real, A.imag
    return np.block([[re, -im], [im, re]])


def real_unembedding(M):
    """Inverse of :func:`real_embedding`, averaging the redundant copies.

    Works for any real symmetric ``M`` of even size; for a non-structured
    ``M`` it returns the Hermitian matrix whose embedding is closest to it.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0] // 2
    re = 0.5 * (M[:n, :n] + M[n:, n:])
    im = 0.5 * (M[n:, :n] - M[:n, n:])
    return as_hermitian(re + 1j * im)
