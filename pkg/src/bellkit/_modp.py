"""Streaming row reduction mod a random 31-bit prime, with exact back-ends.

Rank mod p never exceeds the rank over Q, so a mod-p rank equal to a known
geometric upper bound is exact.  Independence of the collected basis rows is
certified exactly by full rank modulo a second, independent prime (a nonzero
minor mod p is nonzero over Z).  A rational-elimination rank is provided for
small matrices as the slow cross-check.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy import sparse


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def sample_prime_31(rng: np.random.Generator) -> int:
    while True:
        n = int(rng.integers(2**30, 2**31)) | 1
        if _is_prime(n):
            return n


def _matmul_modp(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """(a @ b) mod p for int64 inputs already reduced mod p < 2^31.

    Splits a into 16-bit limbs so the accumulation fits in int64 for inner
    dimensions up to ~2^10.
    """
    lo = a & 0xFFFF
    hi = a >> 16
    return (lo @ b + (((hi @ b) % p) << 16)) % p


class ModpEchelon:
    """Reduced row echelon basis mod p, built by streaming rows.

    Tracks which original row indices contributed a pivot; those rows form an
    independent subset whose cardinality is the rank.
    """

    def __init__(self, ncols: int, p: int):
        self.ncols = ncols
        self.p = p
        self.rows: list[np.ndarray] = []
        self.pivots: list[int] = []
        self.basis_sources: list[int] = []
        self._basis = None  # dense cache (r, ncols)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def _basis_matrix(self) -> np.ndarray:
        if self._basis is None:
            self._basis = np.array(self.rows, dtype=np.int64).reshape(
                len(self.rows), self.ncols
            )
        return self._basis

    def _reduce_vector(self, v: np.ndarray) -> np.ndarray:
        if not self.rows:
            return v % self.p
        B = self._basis_matrix()
        coeffs = v[self.pivots] % self.p
        if not coeffs.any():
            return v % self.p
        return (v - _matmul_modp(coeffs[None, :], B, self.p)[0]) % self.p

    def _insert(self, v: np.ndarray, source: int) -> bool:
        v = self._reduce_vector(np.asarray(v, dtype=np.int64))
        nz = np.flatnonzero(v)
        if nz.size == 0:
            return False
        piv = int(nz[0])
        inv = pow(int(v[piv]), -1, self.p)
        v = (v * inv) % self.p
        # keep the basis fully reduced: clear the new pivot column above
        if self.rows:
            B = self._basis_matrix()
            col = B[:, piv].copy()
            if col.any():
                B -= np.outer(col, v)
                B %= self.p
            B = np.vstack([B, v[None, :]])
        else:
            B = v[None, :]
        self._basis = B
        self.rows = list(B)
        self.pivots.append(piv)
        self.basis_sources.append(source)
        return True

    def add_rows(self, rows: np.ndarray, sources=None):
        """Add dense rows (any integers); returns number of new pivots."""
        rows = np.asarray(rows, dtype=np.int64) % self.p
        n = rows.shape[0]
        if sources is None:
            sources = range(n)
        added = 0
        if self.rows:
            B = self._basis_matrix()
            proj = _matmul_modp(rows[:, self.pivots], B, self.p)
            resid = (rows - proj) % self.p
        else:
            resid = rows
        nonzero = np.flatnonzero(resid.any(axis=1))
        for i in nonzero:
            if self._insert(resid[i], sources[i]):
                added += 1
        return added

    def add_sparse_01(self, mat: sparse.spmatrix, sources) -> int:
        """Add 0/1 rows given sparse; cheap projection through pivot columns."""
        csr = mat.tocsr()
        n = csr.shape[0]
        if not self.rows:
            dense = np.asarray(csr.todense(), dtype=np.int64)
            return self.add_rows(dense, sources)
        B = self._basis_matrix()
        piv_sel = csr[:, self.pivots]
        proj = np.asarray((piv_sel @ B)) % self.p  # entries <= nnz/row * p < 2^62
        dense = np.asarray(csr.todense(), dtype=np.int64)
        resid = (dense - proj) % self.p
        nonzero = np.flatnonzero(resid.any(axis=1))
        added = 0
        for i in nonzero:
            if self._insert(resid[i], sources[i]):
                added += 1
        return added


def rank_modp_dense(rows: np.ndarray, p: int) -> int:
    ech = ModpEchelon(rows.shape[1], p)
    ech.add_rows(rows)
    return ech.rank


def rank_fraction(rows) -> int:
    """Exact rank over Q by rational Gaussian elimination (small matrices)."""
    mat = [[Fraction(int(x)) for x in row] for row in rows]
    nrows = len(mat)
    if nrows == 0:
        return 0
    ncols = len(mat[0])
    rank = 0
    col = 0
    while rank < nrows and col < ncols:
        piv = next((i for i in range(rank, nrows) if mat[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = 1 / mat[rank][col]
        mat[rank] = [x * inv for x in mat[rank]]
        for i in range(nrows):
            if i != rank and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[rank])]
        rank += 1
        col += 1
    return rank
