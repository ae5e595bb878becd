"""Dense exact linear algebra over a FieldSpec.

Matrices are 2-d numpy int64 arrays of field elements.  Vectors are columns.
Everything here is deterministic: reduced row echelon forms use the first
nonzero entry at or below the current row as pivot.
"""
from __future__ import annotations

import itertools

import numpy as np

from .gf import FieldSpec


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.int64)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def as_matrix(data, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    a = np.array(data, dtype=np.int64)
    if rows is not None and cols is not None:
        a = a.reshape(rows, cols)
    if a.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    return a


def matmul(F: FieldSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"cannot multiply {A.shape} by {B.shape}")
    if A.size == 0 or B.size == 0:
        return zeros(A.shape[0], B.shape[1])
    p = F.p
    if F.n == 1:
        return (A @ B) % p
    # Multiply coefficient planes over GF(p), then reduce by the modulus.
    n = F.n
    D = F._digits
    Ad, Bd = D[A], D[B]
    acc = [None] * (2 * n - 1)
    for s in range(n):
        As = Ad[:, :, s]
        if not As.any():
            continue
        for t in range(n):
            prod = As @ Bd[:, :, t]
            acc[s + t] = prod if acc[s + t] is None else acc[s + t] + prod
    shape = (A.shape[0], B.shape[1])
    acc = [np.zeros(shape, dtype=np.int64) if a is None else a % p for a in acc]
    m = F.modulus
    for deg in range(2 * n - 2, n - 1, -1):
        c = acc[deg] % p
        if c.any():
            for i in range(n):
                if m[i]:
                    acc[deg - n + i] = (acc[deg - n + i] - c * m[i]) % p
    out = np.zeros(shape, dtype=np.int64)
    for i in range(n):
        out += (acc[i] % p) * (p ** i)
    return out


def mat_add(F: FieldSpec, A, B):
    return F.add(np.asarray(A, dtype=np.int64), np.asarray(B, dtype=np.int64))


def mat_sub(F: FieldSpec, A, B):
    return F.sub(np.asarray(A, dtype=np.int64), np.asarray(B, dtype=np.int64))


def mat_neg(F: FieldSpec, A):
    return F.neg(np.asarray(A, dtype=np.int64))


def scale(F: FieldSpec, c: int, A):
    return F.mul(np.asarray(A, dtype=np.int64), c)


def frob(F: FieldSpec, A):
    return F.frob(np.asarray(A, dtype=np.int64))


def kron(F: FieldSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    ra, ca = A.shape
    rb, cb = B.shape
    if A.size == 0 or B.size == 0:
        return zeros(ra * rb, ca * cb)
    prod = F.mul(A[:, None, :, None], B[None, :, None, :])
    return prod.reshape(ra * rb, ca * cb)


def block_diag(mats: list[np.ndarray]) -> np.ndarray:
    r = sum(m.shape[0] for m in mats)
    c = sum(m.shape[1] for m in mats)
    out = zeros(r, c)
    i = j = 0
    for m in mats:
        out[i:i + m.shape[0], j:j + m.shape[1]] = m
        i += m.shape[0]
        j += m.shape[1]
    return out


def rref(F: FieldSpec, A: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    M = np.array(A, dtype=np.int64, copy=True)
    rows, cols = M.shape
    pivots: list[int] = []
    r = 0
    prime = F.n == 1
    p = F.p
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(M[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            M[[r, i]] = M[[i, r]]
        piv = int(M[r, c])
        if piv != 1:
            M[r] = F.mul(M[r], F.inv(piv))
        col = M[:, c].copy()
        col[r] = 0
        others = np.flatnonzero(col)
        if others.size:
            if prime:
                M[others] = (M[others] - col[others, None] * M[r][None, :]) % p
            else:
                M[others] = F.sub(M[others], F.mul(col[others, None], M[r][None, :]))
        pivots.append(c)
        r += 1
    return M, pivots


def rank(F: FieldSpec, A: np.ndarray) -> int:
    if A.size == 0:
        return 0
    # Eliminate along the shorter side.
    if A.shape[0] > A.shape[1]:
        A = A.T
    return len(rref(F, A)[1])


def nullspace(F: FieldSpec, A: np.ndarray) -> np.ndarray:
    """Basis of {x : A x = 0} as columns, from the free variables of rref(A)."""
    cols = A.shape[1]
    if A.shape[0] == 0:
        return identity(cols)
    R, piv = rref(F, A)
    free = [j for j in range(cols) if j not in set(piv)]
    N = zeros(cols, len(free))
    for k, f in enumerate(free):
        N[f, k] = 1
        for i, pc in enumerate(piv):
            N[pc, k] = F.neg(int(R[i, f]))
    return N


def colspace(F: FieldSpec, A: np.ndarray) -> np.ndarray:
    """Canonical basis of the column space: the nonzero rows of rref(A^T), as columns."""
    if A.shape[1] == 0:
        return zeros(A.shape[0], 0)
    R, piv = rref(F, A.T)
    return np.ascontiguousarray(R[: len(piv)].T)


def independent_columns(F: FieldSpec, A: np.ndarray) -> list[int]:
    """Indices of the greedy left-to-right maximal independent set of columns."""
    if A.size == 0:
        return []
    return rref(F, A)[1]


def extend_columns(F: FieldSpec, base: np.ndarray, cand: np.ndarray) -> list[int]:
    """Indices into cand of columns that greedily extend the span of base."""
    k = base.shape[1]
    piv = independent_columns(F, np.hstack([base, cand]))
    return [j - k for j in piv if j >= k]


def solve(F: FieldSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray | None:
    """Some X with A X = B, or None when the system is inconsistent."""
    m, n = A.shape
    if B.ndim == 1:
        B = B[:, None]
    if m == 0:
        return zeros(n, B.shape[1])
    R, piv = rref(F, np.hstack([A, B]))
    if piv and piv[-1] >= n:
        return None
    X = zeros(n, B.shape[1])
    for i, pc in enumerate(piv):
        X[pc] = R[i, n:]
    return X


def inverse(F: FieldSpec, A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    R, piv = rref(F, np.hstack([A, identity(n)]))
    if piv[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return np.ascontiguousarray(R[:, n:])


def is_invertible(F: FieldSpec, A: np.ndarray) -> bool:
    return A.shape[0] == A.shape[1] and rank(F, A) == A.shape[0]


def left_annihilator(F: FieldSpec, basis: np.ndarray) -> np.ndarray:
    """Rows spanning the functionals vanishing on the column span of basis."""
    return nullspace(F, basis.T).T


def random_matrix(F: FieldSpec, rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.integers(0, F.q, size=(rows, cols), dtype=np.int64)


def random_invertible(F: FieldSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    while True:
        A = random_matrix(F, rng, n, n)
        if rank(F, A) == n:
            return A


def det(F: FieldSpec, A: np.ndarray) -> int:
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("determinant of a non-square matrix")
    M = np.array(A, dtype=np.int64, copy=True)
    result = 1
    for c in range(n):
        nz = np.flatnonzero(M[c:, c])
        if nz.size == 0:
            return 0
        i = c + int(nz[0])
        if i != c:
            M[[c, i]] = M[[i, c]]
            result = F.neg(result)
        piv = int(M[c, c])
        result = F.mul(result, piv)
        M[c] = F.mul(M[c], F.inv(piv))
        col = M[c + 1:, c].copy()
        rows = c + 1 + np.flatnonzero(col)
        if rows.size:
            M[rows] = F.sub(M[rows], F.mul(M[rows, c][:, None], M[c][None, :]))
    return int(result)


def compound(F: FieldSpec, A: np.ndarray, i: int) -> np.ndarray:
    """The i-th compound matrix: i x i minors indexed by sorted row/column subsets."""
    rows = list(itertools.combinations(range(A.shape[0]), i))
    cols = list(itertools.combinations(range(A.shape[1]), i))
    out = zeros(len(rows), len(cols))
    for b, S in enumerate(cols):
        sub = A[:, list(S)]
        for a, T in enumerate(rows):
            out[a, b] = det(F, sub[list(T)]) if i else 1
    return out


def quotient_projector(F: FieldSpec, sub: np.ndarray, quot: np.ndarray) -> np.ndarray:
    """P with P v = coordinates of v in the basis quot, modulo span(sub).

    The columns of [sub | quot] must be independent; P is exact on their span."""
    n = sub.shape[0]
    base = np.hstack([sub, quot])
    rest = identity(n)[:, extend_columns(F, base, identity(n))]
    if n == 0:
        return zeros(quot.shape[1], 0)
    inv = inverse(F, np.hstack([base, rest]))
    return np.ascontiguousarray(inv[sub.shape[1]:sub.shape[1] + quot.shape[1]])


def quotient_basis(F: FieldSpec, sub: np.ndarray, cand: np.ndarray) -> np.ndarray:
    """Greedy columns of cand independent modulo span(sub)."""
    return cand[:, extend_columns(F, sub, cand)]
