"""Dense complex linear algebra for matrices of dimension <= 4.

``solve`` is an LU factorization with partial pivoting that broadcasts over
leading batch dimensions, so a whole frequency grid can be solved in one
call. ``eigenvalues`` finds the roots of the characteristic polynomial with
the Durand-Kerner iteration and optionally recovers eigenvectors by inverse
iteration.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, SingularMatrix

PIVOT_TOL = 1e-14
MAX_ITER = 500


@dataclass(frozen=True)
class EigenSet:
    """Eigenvalues sorted by (real, imag), with optional unit eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray | None = None  # vectors[k] belongs to values[k]


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected square matrix, got shape {m.shape}")
    if not 1 <= m.shape[-1] <= 4:
        raise ValueError(f"dimension {m.shape[-1]} outside supported range 1..4")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def norm(a) -> np.ndarray:
    """Frobenius norm over the last two axes."""
    a = np.asarray(a)
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))


def _lu(a: np.ndarray, check: bool):
    """In-place Doolittle LU with row pivoting on a batch of matrices."""
    n = a.shape[-1]
    lu = a.copy()
    perm = np.broadcast_to(np.arange(n), lu.shape[:-1]).copy()
    scale = norm(a)
    idx = np.indices(lu.shape[:-2])
    for k in range(n):
        p = k + np.argmax(np.abs(lu[..., k:, k]), axis=-1)
        if check:
            piv = np.abs(lu[(*idx, p, np.full_like(p, k))])
            if np.any(piv < PIVOT_TOL * scale) or np.any(scale == 0):
                raise SingularMatrix("pivot below 1e-14 * ||A||")
        swap = p != k
        if np.any(swap):
            row_k = lu[..., k, :].copy()
            row_p = lu[(*idx, p)].copy()
            lu[..., k, :] = np.where(swap[..., None], row_p, row_k)
            lu[(*idx, p)] = np.where(swap[..., None], row_k, row_p)
            pk = perm[..., k].copy()
            pp = perm[(*idx, p)].copy()
            perm[..., k] = np.where(swap, pp, pk)
            perm[(*idx, p)] = np.where(swap, pk, pp)
        pivot = lu[..., k, k]
        if not check:
            pivot = np.where(pivot == 0, PIVOT_TOL * np.where(scale == 0, 1.0, scale), pivot)
            lu[..., k, k] = pivot
        factors = lu[..., k + 1:, k] / pivot[..., None]
        lu[..., k + 1:, k] = factors
        lu[..., k + 1:, k + 1:] -= factors[..., :, None] * lu[..., k, None, k + 1:]
    return lu, perm


def _lu_solve(lu: np.ndarray, perm: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = lu.shape[-1]
    y = np.take_along_axis(b, perm, axis=-1).astype(complex)
    for i in range(1, n):
        y[..., i] -= np.sum(lu[..., i, :i] * y[..., :i], axis=-1)
    x = y
    for i in range(n - 1, -1, -1):
        x[..., i] = (x[..., i] - np.sum(lu[..., i, i + 1:] * x[..., i + 1:], axis=-1)) / lu[..., i, i]
    return x


def solve(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` by LU decomposition with partial pivoting.

    ``a`` may carry leading batch axes (shape ``(..., n, n)``); ``b`` has
    shape ``(..., n)`` and is broadcast against them.

    Raises
    ------
    SingularMatrix
        If any pivot magnitude falls below ``1e-14 * ||a||``.
    """
    a = as_matrix(a)
    b = np.asarray(b, dtype=complex)
    if b.shape[-1] != a.shape[-1]:
        raise ValueError("right-hand side length does not match matrix")
    shape = np.broadcast_shapes(a.shape[:-2], b.shape[:-1])
    a = np.broadcast_to(a, shape + a.shape[-2:])
    b = np.broadcast_to(b, shape + b.shape[-1:])
    lu, perm = _lu(a, check=True)
    return _lu_solve(lu, perm, b)


def charpoly(a) -> np.ndarray:
    """Monic characteristic polynomial coefficients, highest degree first.

    Faddeev-LeVerrier recursion; exact in exact arithmetic for any n and
    well conditioned at n <= 4.
    """
    a = as_matrix(a)
    n = a.shape[-1]
    coeffs = [1.0 + 0j]
    m = np.zeros_like(a)
    ident = np.eye(n, dtype=complex)
    c = 1.0 + 0j
    for k in range(1, n + 1):
        m = a @ m + c * ident
        c = -np.trace(a @ m) / k
        coeffs.append(c)
    return np.array(coeffs)


def _durand_kerner(coeffs: np.ndarray) -> np.ndarray:
    n = len(coeffs) - 1
    if n == 1:
        return np.array([-coeffs[1]])
    # Cauchy bound fixes the scale of the starting circle.
    radius = 1.0 + np.max(np.abs(coeffs[1:]))
    roots = radius * (0.4 + 0.9j) ** np.arange(n)
    scale = np.max(np.abs(coeffs))
    for _ in range(MAX_ITER):
        diff = roots[:, None] - roots[None, :]
        np.fill_diagonal(diff, 1.0)
        delta = np.polyval(coeffs, roots) / np.prod(diff, axis=1)
        roots = roots - delta
        if np.all(np.abs(delta) <= 1e-15 * np.maximum(1.0, np.abs(roots))):
            break
    else:
        if np.max(np.abs(np.polyval(coeffs, roots))) > 1e-9 * scale:
            raise NoConvergence(f"Durand-Kerner did not converge in {MAX_ITER} iterations")
    # Newton polish; rejects steps that do not reduce |p|.
    dcoeffs = np.polyder(coeffs)
    for _ in range(3):
        p = np.polyval(coeffs, roots)
        dp = np.polyval(dcoeffs, roots)
        ok = dp != 0
        trial = np.where(ok, roots - p / np.where(ok, dp, 1.0), roots)
        better = np.abs(np.polyval(coeffs, trial)) < np.abs(p)
        roots = np.where(better, trial, roots)
    return roots


def _sort(values: np.ndarray) -> np.ndarray:
    return np.array(sorted(values, key=lambda z: (round(z.real, 12), round(z.imag, 12), z.real, z.imag)))


def eigenvalues(a, vectors: bool = False) -> EigenSet:
    """All eigenvalues of a matrix of dimension <= 4.

    Roots are sorted by (real, imag) so the result is deterministic. With
    ``vectors=True`` each eigenvector is found by inverse iteration and
    normalized to unit Euclidean length.
    """
    a = as_matrix(a)
    if a.ndim != 2:
        raise ValueError("eigenvalues takes a single matrix")
    values = _sort(_durand_kerner(charpoly(a)))
    if not vectors:
        return EigenSet(values)
    return EigenSet(values, np.array([_inverse_iteration(a, lam) for lam in values]))


def _inverse_iteration(a: np.ndarray, lam: complex, iterations: int = 4) -> np.ndarray:
    n = a.shape[0]
    shift = lam + 1e-10 * max(norm(a), 1.0)
    lu, perm = _lu(a - shift * np.eye(n), check=False)
    v = np.ones(n, dtype=complex) + 0.1j * np.arange(n)
    v /= np.linalg.norm(v)
    for _ in range(iterations):
        v = _lu_solve(lu, perm, v)
        v /= np.linalg.norm(v)
    # fix the global phase: largest component real and positive
    k = np.argmax(np.abs(v))
    return v * (abs(v[k]) / v[k])


def adaptive_simpson(f, breakpoints, rtol: float = 1e-6, atol: float = 0.0,
                     max_depth: int = 40) -> float:
    """Integrate a vectorized ``f`` over consecutive panels of ``breakpoints``.

    All panels on one refinement level are evaluated in a single call to
    ``f``. A panel is accepted when the Simpson error estimate is below
    ``15 * max(rtol * |panel integral|, atol * width)``; the Richardson
    correction is added on acceptance.
    """
    x = np.asarray(breakpoints, dtype=float)
    a, b = x[:-1], x[1:]
    m = 0.5 * (a + b)
    n = len(a)
    vals = np.asarray(f(np.concatenate([a, m, b])), dtype=float)
    fa, fm, fb = vals[:n], vals[n:2 * n], vals[2 * n:]
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    total = 0.0
    for depth in range(max_depth + 1):
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        k = len(a)
        vals = np.asarray(f(np.concatenate([lm, rm])), dtype=float)
        flm, frm = vals[:k], vals[k:]
        left = (m - a) / 6 * (fa + 4 * flm + fm)
        right = (b - m) / 6 * (fm + 4 * frm + fb)
        err = left + right - whole
        tol = np.maximum(rtol * np.abs(left + right), atol * (b - a))
        done = np.abs(err) <= 15 * tol
        if depth == max_depth:
            done[:] = True
        total += float(np.sum((left + right + err / 15)[done]))
        keep = ~done
        if not np.any(keep):
            break
        a, m, b = a[keep], m[keep], b[keep]
        fa, fm, fb = fa[keep], fm[keep], fb[keep]
        flm, frm, lm, rm = flm[keep], frm[keep], lm[keep], rm[keep]
        left, right = left[keep], right[keep]
        a, m, b, fa, fm, fb, whole = (
            np.concatenate([a, m]), np.concatenate([lm, rm]), np.concatenate([m, b]),
            np.concatenate([fa, fm]), np.concatenate([flm, frm]), np.concatenate([fm, fb]),
            np.concatenate([left, right]),
        )
    return total


def bisect(f, lo: float, hi: float, rtol: float = 1e-6, max_iter: int = 200) -> float:
    """Root of ``f`` in ``[lo, hi]``; ``f(lo)`` and ``f(hi)`` must differ in sign."""
    flo = f(lo)
    if flo == 0:
        return lo
    if flo * f(hi) > 0:
        raise ValueError("root not bracketed")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
        if hi - lo <= rtol * abs(mid):
            break
    return 0.5 * (lo + hi)
