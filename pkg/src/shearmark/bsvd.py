"""Bidiagonal singular value decomposition.

A real m x n matrix (m >= n) is reduced by Householder reflections to
``A = U_A @ B @ V_A.T`` with ``B`` upper bidiagonal and nonnegative on both
diagonals, then ``B`` is diagonalized by Golub-Kahan implicit-shift QR
sweeps, ``B = U_B @ diag(s) @ V_B.T``. Wide matrices are handled by
factoring the transpose and swapping the roles of the left and right
factors.

Everything here is deterministic: identical input bits give identical
output bits.
"""

from dataclasses import dataclass

import numba
import numpy as np

from .errors import InvalidInputError, NumericalFailureError

MAX_SWEEPS = 10_000
_EPS = np.finfo(np.float64).eps


def _as_matrix(a, name="matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{name} must be a non-empty 2-D array, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def _pow2_scale(x: np.ndarray) -> float:
    """Power of two near max|x|; dividing by it is exact and keeps squares in range."""
    peak = float(np.abs(x).max(initial=0.0))
    if peak == 0.0:
        return 1.0
    return float(np.ldexp(1.0, np.frexp(peak)[1]))


def _householder(x: np.ndarray):
    """Reflector ``I - beta v v^T`` mapping x onto ``+-||x|| e_1``.

    Returns (v, beta, alpha) where alpha is the resulting first entry. A
    zero tail gives the identity (beta = 0) so exact structure is kept.
    """
    alpha = x[0]
    tail = float(np.dot(x[1:], x[1:]))
    v = x.copy()
    if tail == 0.0:
        return v, 0.0, alpha
    norm = np.sqrt(alpha * alpha + tail)
    alpha_new = -norm if alpha >= 0 else norm
    v[0] = alpha - alpha_new
    beta = 1.0 / (norm * (norm + abs(alpha)))
    return v, beta, alpha_new


def bidiagonalize(a):
    """Householder reduction ``A = U_A @ B @ V_A.T``.

    Parameters
    ----------
    a : array_like
        Real m x n matrix with finite entries.

    Returns
    -------
    u_a : ndarray, shape (m, r)
    b : ndarray, shape (r, r)
        Upper bidiagonal with nonnegative diagonal and superdiagonal;
        every other entry is exactly zero.
    v_a : ndarray, shape (n, r)
        ``r = min(m, n)``. For m >= n, ``v_a`` is square orthogonal.
    """
    a = _as_matrix(a)
    m, n = a.shape
    if m < n:
        v_a, bt, u_a = bidiagonalize(a.T)
        # transpose of upper bidiagonal is lower; fold back to upper form
        return _lower_to_upper(u_a, bt.T, v_a)
    scale = _pow2_scale(a)
    w = a / scale
    left, right = [], []
    d = np.zeros(n)
    e = np.zeros(max(n - 1, 0))
    for k in range(n):
        v, beta, alpha = _householder(w[k:, k])
        if beta:
            w[k:, k:] -= beta * np.outer(v, v @ w[k:, k:])
        d[k] = alpha
        left.append((v, beta))
        if k < n - 2:
            v, beta, alpha = _householder(w[k, k + 1:])
            if beta:
                w[k:, k + 1:] -= beta * np.outer(w[k:, k + 1:] @ v, v)
            e[k] = alpha
            right.append((v, beta))
        elif k == n - 2:
            e[k] = w[k, k + 1]

    u_a = np.eye(m, n)
    for k in range(n - 1, -1, -1):
        v, beta = left[k]
        if beta:
            u_a[k:, k:] -= beta * np.outer(v, v @ u_a[k:, k:])
    v_a = np.eye(n)
    for k in range(len(right) - 1, -1, -1):
        v, beta = right[k]
        if beta:
            v_a[k + 1:, k + 1:] -= beta * np.outer(v, v @ v_a[k + 1:, k + 1:])

    # make both diagonals nonnegative with sign flips of factor columns
    for k in range(n):
        if d[k] < 0:
            d[k] = -d[k]
            u_a[:, k] = -u_a[:, k]
            if k < n - 1:
                e[k] = -e[k]
        if k < n - 1 and e[k] < 0:
            e[k] = -e[k]
            v_a[:, k + 1] = -v_a[:, k + 1]
            if k + 1 < n:
                d[k + 1] = -d[k + 1]
    b = np.diag(d)
    if n > 1:
        b[np.arange(n - 1), np.arange(1, n)] = e
    return u_a, b * scale, v_a


def _lower_to_upper(u, lower, v):
    """Rotate a lower bidiagonal ``u @ lower @ v.T`` into upper form."""
    n = lower.shape[0]
    b = lower.copy()
    u = u.copy()
    v = v.copy()
    for k in range(n - 1):
        # left rotation on rows k, k+1 clears b[k+1, k]
        y, z = b[k, k], b[k + 1, k]
        r = np.hypot(y, z)
        if r == 0.0 or z == 0.0:
            continue
        c, s = y / r, z / r
        rk, rk1 = b[k].copy(), b[k + 1].copy()
        b[k], b[k + 1] = c * rk + s * rk1, -s * rk + c * rk1
        b[k + 1, k] = 0.0
        uk, uk1 = u[:, k].copy(), u[:, k + 1].copy()
        u[:, k], u[:, k + 1] = c * uk + s * uk1, -s * uk + c * uk1
    for k in range(n):
        if b[k, k] < 0:
            b[k] = -b[k]
            u[:, k] = -u[:, k]
        if k < n - 1 and b[k, k + 1] < 0:
            b[:, k + 1] = -b[:, k + 1]
            v[:, k + 1] = -v[:, k + 1]
    return u, np.triu(np.tril(b, 1)), v


@numba.njit(cache=True)
def _rot_rows(m, i, j, c, s):
    # rows i, j of m <- (c*ri + s*rj, -s*ri + c*rj)
    for t in range(m.shape[1]):
        a = m[i, t]
        b = m[j, t]
        m[i, t] = c * a + s * b
        m[j, t] = -s * a + c * b


@numba.njit(cache=True)
def _bidiag_qr(d, e, ut, vt, max_sweeps):
    """Diagonalize the bidiagonal (d, e) in place.

    `ut` and `vt` hold the transposed left/right factors; rotations act on
    their rows. Returns the sweep count, or -1 if the cap was hit.
    """
    n = d.shape[0]
    eps = 2.220446049250313e-16
    bnorm = 0.0
    for i in range(n):
        bnorm = max(bnorm, abs(d[i]))
    for i in range(n - 1):
        bnorm = max(bnorm, abs(e[i]))
    if bnorm == 0.0:
        return 0
    sweeps = 0
    hi = n - 1
    while hi > 0:
        for i in range(hi):
            if abs(e[i]) <= eps * (abs(d[i]) + abs(d[i + 1])) or abs(e[i]) <= eps * eps * bnorm:
                e[i] = 0.0
        while hi > 0 and e[hi - 1] == 0.0:
            hi -= 1
        if hi == 0:
            break
        lo = hi - 1
        while lo > 0 and e[lo - 1] != 0.0:
            lo -= 1

        zero_at = -1
        for i in range(lo, hi + 1):
            if abs(d[i]) <= eps * bnorm:
                d[i] = 0.0
                zero_at = i
                break
        if zero_at >= 0:
            if zero_at < hi:
                # chase e[zero_at] rightwards with left rotations
                i = zero_at
                f = e[i]
                e[i] = 0.0
                for j in range(i + 1, hi + 1):
                    r = np.hypot(d[j], f)
                    c = d[j] / r
                    s = f / r
                    d[j] = r
                    _rot_rows(ut, j, i, c, s)
                    if j < hi:
                        f = -s * e[j]
                        e[j] = c * e[j]
            else:
                # chase e[hi-1] upwards with right rotations
                f = e[hi - 1]
                e[hi - 1] = 0.0
                for j in range(hi - 1, lo - 1, -1):
                    r = np.hypot(d[j], f)
                    c = d[j] / r
                    s = f / r
                    d[j] = r
                    _rot_rows(vt, j, hi, c, s)
                    if j > lo:
                        f = -s * e[j - 1]
                        e[j - 1] = c * e[j - 1]
            continue

        sweeps += 1
        if sweeps > max_sweeps:
            return -1

        # Wilkinson shift from the trailing 2x2 of B^T B
        dm = d[hi - 1]
        em = e[hi - 1]
        dh = d[hi]
        ep = e[hi - 2] if hi - 1 > lo else 0.0
        ta = dm * dm + ep * ep
        tb = dm * em
        tc = dh * dh + em * em
        delta = 0.5 * (ta - tc)
        denom = abs(delta) + np.hypot(delta, tb)
        if denom == 0.0:
            mu = tc
        else:
            sgn = 1.0 if delta >= 0 else -1.0
            mu = tc - sgn * tb * tb / denom

        y = d[lo] * d[lo] - mu
        z = d[lo] * e[lo]
        for k in range(lo, hi):
            r = np.hypot(y, z)
            if r == 0.0:
                c, s = 1.0, 0.0
            else:
                c, s = y / r, z / r
            if k > lo:
                e[k - 1] = r
            dk = d[k]
            ek = e[k]
            d[k] = c * dk + s * ek
            e[k] = -s * dk + c * ek
            bulge = s * d[k + 1]
            d[k + 1] = c * d[k + 1]
            _rot_rows(vt, k, k + 1, c, s)

            y = d[k]
            z = bulge
            r = np.hypot(y, z)
            if r == 0.0:
                c, s = 1.0, 0.0
            else:
                c, s = y / r, z / r
            d[k] = r
            ek = e[k]
            dk1 = d[k + 1]
            e[k] = c * ek + s * dk1
            d[k + 1] = -s * ek + c * dk1
            if k < hi - 1:
                z = s * e[k + 1]
                e[k + 1] = c * e[k + 1]
                y = e[k]
            _rot_rows(ut, k, k + 1, c, s)
    return sweeps


def bidiagonal_svd(b):
    """SVD of an upper bidiagonal square matrix.

    Returns ``(u, s, v)`` with ``b = u @ diag(s) @ v.T``, ``s`` descending
    and nonnegative.
    """
    b = _as_matrix(b, "bidiagonal matrix")
    n = b.shape[0]
    if b.shape != (n, n):
        raise InvalidInputError("bidiagonal matrix must be square")
    d = np.ascontiguousarray(np.diag(b).copy())
    e = np.ascontiguousarray(np.diag(b, 1).copy())
    ut = np.eye(n)
    vt = np.eye(n)
    # work at unit scale so squared entries in the shift cannot under/overflow
    scale = _pow2_scale(np.concatenate([d, e]))
    if n > 1:
        d /= scale
        e /= scale
        if _bidiag_qr(d, e, ut, vt, MAX_SWEEPS) < 0:
            raise NumericalFailureError(f"bidiagonal QR did not converge in {MAX_SWEEPS} sweeps")
        d *= scale
    neg = d < 0
    d[neg] = -d[neg]
    ut[neg] = -ut[neg]
    order = np.argsort(-d, kind="stable")
    return ut[order].T.copy(), d[order], vt[order].T.copy()


def svd(a):
    """Thin SVD ``a = u @ diag(s) @ v.T`` via bidiagonalization and QR.

    Parameters
    ----------
    a : array_like
        Real m x n matrix.

    Returns
    -------
    u : ndarray, shape (m, r)
    s : ndarray, shape (r,)
        Singular values, descending and nonnegative.
    v : ndarray, shape (n, r)
    """
    f = bsvd(a)
    return f.u_a @ f.u_b, f.s, f.v_a @ f.v_b


@dataclass(frozen=True, eq=False)
class FactorSet:
    """The five factors of ``A = U_A U_B diag(s) V_B^T V_A^T``."""

    u_a: np.ndarray
    u_b: np.ndarray
    s: np.ndarray
    v_b: np.ndarray
    v_a: np.ndarray

    @property
    def shape(self) -> tuple:
        return (self.u_a.shape[0], self.v_a.shape[0])

    def left(self) -> np.ndarray:
        return self.u_a @ self.u_b

    def right(self) -> np.ndarray:
        return self.v_a @ self.v_b


def bsvd(a) -> FactorSet:
    """Bidiagonal SVD of `a` as a :class:`FactorSet`."""
    u_a, b, v_a = bidiagonalize(a)
    u_b, s, v_b = bidiagonal_svd(b)
    return FactorSet(u_a=u_a, u_b=u_b, s=s, v_b=v_b, v_a=v_a)


def compose(f: FactorSet, s_override=None) -> np.ndarray:
    """Evaluate ``U_A U_B S' V_B^T V_A^T``.

    `s_override` may be a vector (used as a diagonal) or a full r x r
    matrix; ``None`` reuses ``f.s``.
    """
    r = f.s.shape[0]
    if s_override is None:
        s_override = f.s
    s_override = np.asarray(s_override, dtype=np.float64)
    if s_override.ndim == 1:
        if s_override.shape != (r,):
            raise InvalidInputError(f"expected {r} singular values, got {s_override.shape[0]}")
        return (f.left() * s_override) @ f.right().T
    if s_override.shape != (r, r):
        raise InvalidInputError(f"expected a {r}x{r} core, got {s_override.shape}")
    return f.left() @ s_override @ f.right().T
