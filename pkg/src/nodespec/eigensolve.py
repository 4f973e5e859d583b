"""Dense symmetric eigendecomposition, implemented in-repo.

Classic two-stage scheme: Householder reduction to tridiagonal form with
accumulated transforms, then implicit-shift QL iteration with plane rotations
folded into the eigenvector matrix. Inner loops are vectorized row/column
updates, so the cost is the usual O(n^3) with numpy constants; this backs the
small-graph spectral oracle only and is capped well below production sizes.
"""

import numpy as np


def symmetric_eigh(a: np.ndarray, max_sweeps: int = 50):
    """Eigenvalues (ascending) and orthonormal eigenvectors of symmetric a.

    Returns (eigenvalues, basis) with basis columns as eigenvectors. Raises
    ValueError if a is not square/symmetric and RuntimeError if QL fails to
    converge (does not happen for genuinely symmetric input).
    """
    a = np.array(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    if n == 0:
        return np.empty(0), np.empty((0, 0))
    if not np.allclose(a, a.T, atol=1e-12, rtol=0.0):
        raise ValueError("matrix must be symmetric")
    a = 0.5 * (a + a.T)
    if n == 1:
        return a[0].copy(), np.ones((1, 1))

    d, e, z = _householder_tridiagonalize(a)
    _ql_implicit_shift(d, e, z, max_sweeps)
    order = np.argsort(d, kind="stable")
    return d[order], z[:, order]


def _householder_tridiagonalize(a: np.ndarray):
    """Reduce symmetric a to tridiagonal (d, e); a becomes the transform Q."""
    n = a.shape[0]
    d = np.zeros(n)
    e = np.zeros(n)
    for i in range(n - 1, 0, -1):
        l = i - 1
        h = 0.0
        if l > 0:
            scale = float(np.sum(np.abs(a[i, :l + 1])))
            if scale == 0.0:
                e[i] = a[i, l]
            else:
                a[i, :l + 1] /= scale
                h = float(a[i, :l + 1] @ a[i, :l + 1])
                f = a[i, l]
                g = -np.sqrt(h) if f >= 0.0 else np.sqrt(h)
                e[i] = scale * g
                h -= f * g
                a[i, l] = f - g
                u = a[i, :l + 1]
                a[:l + 1, i] = u / h
                # p = A u / h over the symmetric active block (lower triangle
                # is the live copy).
                block = np.tril(a[:l + 1, :l + 1])
                sym = block + np.tril(block, -1).T
                p = sym @ u / h
                hh = float(p @ u) / (2.0 * h)
                p -= hh * u
                e[:l + 1] = p
                a[:l + 1, :l + 1] -= np.outer(u, p) + np.outer(p, u)
        else:
            e[i] = a[i, l]
        d[i] = h
    d[0] = 0.0
    e[0] = 0.0
    # Accumulate the Householder transforms into an explicit orthogonal Q.
    for i in range(n):
        l = i
        if d[i] != 0.0:
            g = a[i, :l] @ a[:l, :l]
            a[:l, :l] -= np.outer(a[:l, i], g)
        d[i] = a[i, i]
        a[i, i] = 1.0
        a[i, :l] = 0.0
        a[:l, i] = 0.0
    return d, e, a


def _ql_implicit_shift(d: np.ndarray, e: np.ndarray, z: np.ndarray,
                       max_sweeps: int) -> None:
    """QL iteration with implicit shifts on the tridiagonal (d, e)."""
    n = d.size
    e[:-1] = e[1:]
    e[-1] = 0.0
    for l in range(n):
        iters = 0
        while True:
            for m in range(l, n - 1):
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) + dd == dd:
                    break
            else:
                m = n - 1
            if m == l:
                break
            iters += 1
            if iters > max_sweeps:
                raise RuntimeError("QL iteration failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + np.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                col_i = z[:, i].copy()
                z[:, i] = c * col_i - s * z[:, i + 1]
                z[:, i + 1] = s * col_i + c * z[:, i + 1]
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
