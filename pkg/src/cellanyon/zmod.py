"""Exact linear algebra over the residue rings Z/dZ.

Row spans and kernels are kept in Howell normal form, the canonical echelon
form over Z/dZ: it supports decidable membership with witnesses even when d
has zero divisors.  Quotients of modules are presented by a relation matrix
which is diagonalized by invertible transforms; together with the implicit
relations d*e_i this computes the invariant factors of the quotient lattice,
the same diagonal the integer Smith form of the lifted relation matrix would
produce, while every intermediate entry stays reduced mod d.

Matrices are numpy int64 arrays with entries in [0, d).  A small pure-Python
integer Smith normal form is included as an independent oracle for tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .errors import ArgumentError

# Entries are reduced mod d after every operation; intermediate products stay
# below d*d, which must fit in int64.
_MAX_MODULUS = 3_000_000_000


def _check_modulus(d: int):
    if d < 2 or d > _MAX_MODULUS:
        raise ArgumentError(f"modulus must be in [2, {_MAX_MODULUS}], got {d}")


def _as_matrix(A) -> np.ndarray:
    M = np.asarray(A, dtype=np.int64)
    if M.ndim != 2:
        raise ArgumentError("expected a 2-D matrix")
    return M


def unit_lift(a: int, d: int) -> tuple[int, int]:
    """Return (u, g) with u a unit mod d and u*a = g = gcd(a, d) mod d."""
    a %= d
    if a == 0:
        return 1, 0
    g = gcd(a, d)
    b, m = a // g, d // g
    u = pow(b % m, -1, m) if m > 1 else 1
    while gcd(u, d) != 1:
        u += m
    return u % d, g


@dataclass
class HowellBasis:
    """Canonical generating set of a row-span submodule of (Z/d)^n.

    rows[i] has its first nonzero entry (a divisor of d) at pivots[i][0];
    entries above each pivot are reduced mod the pivot value.  transform,
    when tracked, expresses each row over the rows of the original matrix.
    """

    d: int
    ncols: int
    rows: np.ndarray
    pivots: list[tuple[int, int]]
    transform: np.ndarray | None = None

    @property
    def span_order(self) -> int:
        n = 1
        for _, p in self.pivots:
            n *= self.d // p
        return n

    def member(self, v) -> np.ndarray | None:
        """Coefficients t with t @ rows == v mod d, or None if v is outside."""
        v = np.asarray(v, dtype=np.int64) % self.d
        if v.shape != (self.ncols,):
            raise ArgumentError(f"vector length {v.shape} != {self.ncols}")
        coeffs = np.zeros(len(self.pivots), dtype=np.int64)
        v = v.copy()
        for i, (col, p) in enumerate(self.pivots):
            e = int(v[col])
            if e == 0:
                continue
            if e % p != 0:
                return None
            t = e // p
            coeffs[i] = t
            v = (v - t * self.rows[i]) % self.d
        if np.any(v):
            return None
        return coeffs

    def contains(self, v) -> bool:
        return self.member(v) is not None


def howell_form(A, d: int, track_transform: bool = False) -> HowellBasis:
    """Howell normal form of the row span of A over Z/dZ."""
    _check_modulus(d)
    A = _as_matrix(A) % d
    nrows, ncols = A.shape
    if track_transform:
        work = np.concatenate([A, np.eye(nrows, dtype=np.int64)], axis=1)
    else:
        work = A.copy()
    pool = [row for row in work if row[:ncols].any() or row.any()]
    done_rows: list[np.ndarray] = []
    pivots: list[tuple[int, int]] = []

    for j in range(ncols):
        live = [r for r in pool if r[j] % d != 0]
        if not live:
            continue
        rest = [r for r in pool if r[j] % d == 0]
        # Merge all rows hitting column j into a single pivot row.
        pivot = live[0]
        for other in live[1:]:
            a, b = int(pivot[j]), int(other[j])
            if b % gcd(a, d) == 0:
                # a generates b in Z/d: one subtraction clears it.
                u, g = unit_lift(a, d)
                t = (b // g) * u % d
                other -= t * pivot
                other %= d
            else:
                g, s, t = _gcdex(a, b)
                new_pivot = (s * pivot + t * other) % d
                other[:] = ((-(b // g)) * pivot + (a // g) * other) % d
                pivot = new_pivot
            if other.any():
                rest.append(other)
        u, g = unit_lift(int(pivot[j]), d)
        pivot = (u * pivot) % d
        done_rows.append(pivot)
        pivots.append((j, int(pivot[j])))
        # Annihilator of a zero-divisor pivot re-enters the pool.
        ann = ((d // g) * pivot) % d
        if ann.any():
            rest.append(ann)
        pool = rest

    H = (
        np.array(done_rows, dtype=np.int64)
        if done_rows
        else np.zeros((0, work.shape[1]), dtype=np.int64)
    )
    # Reduce entries above each pivot mod the pivot value.  Ascending order:
    # later rows vanish on earlier pivot columns, so finished columns stay put.
    for i in range(len(pivots)):
        col, p = pivots[i]
        for k in range(i):
            q = int(H[k, col]) // p
            if q:
                H[k] = (H[k] - q * H[i]) % d
    if track_transform:
        return HowellBasis(d, ncols, H[:, :ncols], pivots, H[:, ncols:])
    return HowellBasis(d, ncols, H, pivots, None)


def _gcdex(a: int, b: int) -> tuple[int, int, int]:
    """g, s, t with s*a + t*b = g = gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def kernel_basis(A, d: int) -> HowellBasis:
    """Howell basis of {x : x @ A == 0 mod d}.

    Computed from the Howell form of [A | I]: rows whose A-block vanishes
    carry kernel vectors in the identity block, and by the Howell property
    they generate the whole kernel.
    """
    _check_modulus(d)
    A = _as_matrix(A) % d
    nrows, ncols = A.shape
    if nrows == 0:
        return HowellBasis(d, 0, np.zeros((0, 0), dtype=np.int64), [])
    aug = howell_form(np.concatenate([A, np.eye(nrows, dtype=np.int64)], axis=1), d)
    keep = [i for i in range(aug.rows.shape[0]) if not aug.rows[i, :ncols].any()]
    rows = aug.rows[keep][:, ncols:]
    pivots = [(c - ncols, p) for i in keep for (c, p) in [aug.pivots[i]]]
    return HowellBasis(d, nrows, rows, pivots)


def full_basis(n: int, d: int) -> HowellBasis:
    """Howell basis of all of (Z/d)^n."""
    return HowellBasis(d, n, np.eye(n, dtype=np.int64), [(i, 1) for i in range(n)])


@dataclass
class Diagonalization:
    """Invertible P, Q with P @ R @ Q diagonal over Z/dZ.

    Only Q and its inverse are tracked: for the quotient (Z/d)^k / rowspan(R)
    the canonical coordinates of t are (t @ Q) mod factors, and the row
    Qinv[j] generates the j-th cyclic factor.
    """

    d: int
    factors: np.ndarray
    Q: np.ndarray
    Qinv: np.ndarray


def diagonalize(R, d: int) -> Diagonalization:
    """Diagonalize R by invertible transforms, with divisor-chain diagonal.

    The resulting factors f_1 | f_2 | ... | d are the invariant factors of
    the quotient (Z/d)^k / rowspan(R): they match the Smith normal form of
    the integer relation matrix [R; d*I] with units kept as 1 entries.
    """
    _check_modulus(d)
    R = _as_matrix(R) % d
    nrows, k = R.shape
    D = R.copy()
    Q = np.eye(k, dtype=np.int64)
    Qinv = np.eye(k, dtype=np.int64)

    def col_add(src, dst, t):
        # dst column += t * src column; inverse op applied to Qinv rows.
        D[:, dst] = (D[:, dst] + t * D[:, src]) % d
        Q[:, dst] = (Q[:, dst] + t * Q[:, src]) % d
        Qinv[src] = (Qinv[src] - t * Qinv[dst]) % d

    def col_swap(i, j):
        D[:, [i, j]] = D[:, [j, i]]
        Q[:, [i, j]] = Q[:, [j, i]]
        Qinv[[i, j]] = Qinv[[j, i]]

    def col_combine(i, j, s, t, u, v):
        # (col_i, col_j) <- (s*col_i + t*col_j, u*col_i + v*col_j), det unit.
        ci, cj = D[:, i].copy(), D[:, j].copy()
        D[:, i] = (s * ci + t * cj) % d
        D[:, j] = (u * ci + v * cj) % d
        qi, qj = Q[:, i].copy(), Q[:, j].copy()
        Q[:, i] = (s * qi + t * qj) % d
        Q[:, j] = (u * qi + v * qj) % d
        det = (s * v - t * u) % d
        w = pow(int(det), -1, d)
        ri, rj = Qinv[i].copy(), Qinv[j].copy()
        Qinv[i] = (w * (v * ri - u * rj)) % d
        Qinv[j] = (w * (-t * ri + s * rj)) % d

    def row_combine(i, j, s, t, u, v):
        ri, rj = D[i].copy(), D[j].copy()
        D[i] = (s * ri + t * rj) % d
        D[j] = (u * ri + v * rj) % d

    limit = min(nrows, k)
    s_idx = 0
    while s_idx < limit:
        sub = D[s_idx:, s_idx:]
        nz = np.argwhere(sub % d != 0)
        if nz.size == 0:
            break
        # Pivot with minimal gcd against d (units first).
        vals = sub[nz[:, 0], nz[:, 1]]
        gcds = np.array([gcd(int(v), d) for v in vals])
        best = int(np.argmin(gcds))
        bi, bj = int(nz[best, 0]) + s_idx, int(nz[best, 1]) + s_idx
        if bi != s_idx:
            D[[s_idx, bi]] = D[[bi, s_idx]]
        if bj != s_idx:
            col_swap(s_idx, bj)

        while True:
            # Clear column s below the pivot.
            for i in range(s_idx + 1, nrows):
                b = int(D[i, s_idx])
                if b == 0:
                    continue
                a = int(D[s_idx, s_idx])
                if b % gcd(a, d) == 0:
                    u, g = unit_lift(a, d)
                    D[i] = (D[i] - (b // g) * u % d * D[s_idx]) % d
                else:
                    g, sc, tc = _gcdex(a, b)
                    row_combine(s_idx, i, sc % d, tc % d, (-(b // g)) % d, (a // g) % d)
            # Clear row s right of the pivot.
            for j in range(s_idx + 1, k):
                b = int(D[s_idx, j])
                if b == 0:
                    continue
                a = int(D[s_idx, s_idx])
                if b % gcd(a, d) == 0:
                    u, g = unit_lift(a, d)
                    col_add(s_idx, j, (-(b // g) * u) % d)
                else:
                    g, sc, tc = _gcdex(a, b)
                    col_combine(s_idx, j, sc % d, tc % d, (-(b // g)) % d, (a // g) % d)
            if np.any(D[s_idx + 1 :, s_idx]) or np.any(D[s_idx, s_idx + 1 :]):
                continue
            # Pivot must divide every remaining entry mod d.
            p = gcd(int(D[s_idx, s_idx]), d)
            rest = D[s_idx + 1 :, s_idx + 1 :]
            bad = np.argwhere(rest % p != 0)
            if bad.size == 0:
                break
            i = int(bad[0, 0]) + s_idx + 1
            D[s_idx] = (D[s_idx] + D[i]) % d
        s_idx += 1

    factors = np.full(k, d, dtype=np.int64)
    for i in range(limit):
        factors[i] = gcd(int(D[i, i]), d) or d
    return Diagonalization(d, factors, Q, Qinv)


def smith_normal_form_integer(A) -> list[int]:
    """Diagonal of the Smith normal form over Z, arbitrary precision.

    Pure-Python reference used as an independent oracle in tests; no
    transforms are tracked.
    """
    M = [[int(x) for x in row] for row in A]
    m = len(M)
    n = len(M[0]) if m else 0
    diag = []
    s = 0
    while s < min(m, n):
        # Find the smallest nonzero entry in the remaining block.
        best = None
        for i in range(s, m):
            for j in range(s, n):
                if M[i][j] and (best is None or abs(M[i][j]) < abs(M[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        bi, bj = best
        M[s], M[bi] = M[bi], M[s]
        for row in M:
            row[s], row[bj] = row[bj], row[s]
        while True:
            a = M[s][s]
            dirty = False
            for i in range(s + 1, m):
                if M[i][s]:
                    q = M[i][s] // a
                    for j in range(s, n):
                        M[i][j] -= q * M[s][j]
                    if M[i][s]:
                        M[s], M[i] = M[i], M[s]
                        dirty = True
                        break
            if dirty:
                continue
            for j in range(s + 1, n):
                if M[s][j]:
                    q = M[s][j] // a
                    for i in range(s, m):
                        M[i][j] -= q * M[i][s]
                    if M[s][j]:
                        for i in range(s, m):
                            M[i][s], M[i][j] = M[i][j], M[i][s]
                        dirty = True
                        break
            if dirty:
                continue
            a = M[s][s]
            bad = None
            for i in range(s + 1, m):
                for j in range(s + 1, n):
                    if M[i][j] % a:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            for j in range(s, n):
                M[s][j] += M[bad][j]
        diag.append(abs(M[s][s]))
        s += 1
    return diag
