"""Generalized symmetric tridiagonal eigenproblems ``A x = nu B x``.

``B`` must be positive definite.  Eigenvalues are located by bisection on the
Sturm count (the number of negative pivots of ``A - sigma B``, which by
Sylvester's law of inertia equals the number of eigenvalues below
``sigma``); eigenvectors come from shifted inverse iteration.
"""

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConvergenceError

VALUE_TOL = 1e-12


class TridiagonalPencil:
    """Symmetric tridiagonal pair ``(A, B)`` stored by diagonals."""

    def __init__(self, a_diag, a_off, b_diag, b_off):
        self.a_diag = np.asarray(a_diag, dtype=float)
        self.a_off = np.asarray(a_off, dtype=float)
        self.b_diag = np.asarray(b_diag, dtype=float)
        self.b_off = np.asarray(b_off, dtype=float)
        n = self.a_diag.size
        if not (self.a_off.size == self.b_off.size == n - 1 and self.b_diag.size == n):
            raise ValueError("inconsistent tridiagonal storage")
        if not np.all(self.b_diag > 0):
            raise ValueError("B must have a positive diagonal")
        # congruence D A D, D B D with D = diag(b)^{-1/2}: same eigenvalues and
        # inertia, but rows of very different scale (graded meshes) equilibrated
        d = 1.0 / np.sqrt(self.b_diag)
        self._d = d
        self._sad = self.a_diag * d * d
        self._sao = self.a_off * d[:-1] * d[1:]
        self._sbd = np.ones(n)
        self._sbo = self.b_off * d[:-1] * d[1:]
        self._ad = self._sad.tolist()
        self._ao = self._sao.tolist()
        self._bd = self._sbd.tolist()
        self._bo = self._sbo.tolist()

    @property
    def n(self):
        return self.a_diag.size

    def count_below(self, sigma):
        """Number of eigenvalues strictly below ``sigma``."""
        ad, ao, bd, bo = self._ad, self._ao, self._bd, self._bo
        count = 0
        d = ad[0] - sigma * bd[0]
        if d < 0:
            count += 1
        for k in range(1, len(ad)):
            if d == 0.0:
                d = 1e-300
            e = ao[k - 1] - sigma * bo[k - 1]
            d = ad[k] - sigma * bd[k] - e * e / d
            if d < 0:
                count += 1
        return count

    @staticmethod
    def _tri_matvec(diag, off, x):
        y = diag * x
        y[:-1] += off * x[1:]
        y[1:] += off * x[:-1]
        return y

    def matvec_a(self, x):
        return self._tri_matvec(self.a_diag, self.a_off, x)

    def matvec_b(self, x):
        return self._tri_matvec(self.b_diag, self.b_off, x)

    def b_inner(self, x, y):
        return float(x @ self.matvec_b(y))

    def lower_bound(self):
        """A value below the smallest eigenvalue, found by doubling."""
        lo = -1.0
        while self.count_below(lo) > 0:
            lo *= 2.0
            if lo < -1e300:
                raise ConvergenceError("pencil appears unbounded below")
        return lo

    def eigenvalue(self, k, lo, hi, tol=VALUE_TOL, max_iter=200):
        """The ``k``-th (0-based) eigenvalue, assumed to lie in ``[lo, hi)``."""
        if not self.count_below(lo) <= k < self.count_below(hi):
            raise ConvergenceError(f"eigenvalue {k} not bracketed by [{lo}, {hi})",
                                   {"lo": lo, "hi": hi})
        for it in range(max_iter):
            if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
                return 0.5 * (lo + hi)
            mid = 0.5 * (lo + hi)
            if self.count_below(mid) > k:
                hi = mid
            else:
                lo = mid
        raise ConvergenceError(f"bisection for eigenvalue {k} did not converge",
                               {"lo": lo, "hi": hi, "iterations": max_iter})

    def eigenvector(self, nu, max_iter=8, rtol=1e-9, floor=1e-7):
        """Inverse iteration at ``nu``; returns a B-normalized vector.

        Works on the equilibrated pencil.  Stops once the relative residual
        drops below ``rtol``, or once it stagnates below ``floor``.
        """
        n = self.n
        sad, sao, sbo = self._sad, self._sao, self._sbo
        shift = nu - 1e-10 * max(1.0, abs(nu))
        ab = np.zeros((3, n))
        ab[0, 1:] = sao - shift * sbo
        ab[1] = sad - shift
        ab[2, :-1] = ab[0, 1:]
        abs_a = (np.abs(sad), np.abs(sao))
        y = np.random.default_rng(12345).standard_normal(n)
        res = np.inf
        for it in range(max_iter):
            z = solve_banded((1, 1), ab, self._tri_matvec(self._sbd, sbo, y))
            y = z / np.sqrt(z @ self._tri_matvec(self._sbd, sbo, z))
            ay = self._tri_matvec(sad, sao, y)
            by = self._tri_matvec(self._sbd, sbo, y)
            scale = np.linalg.norm(self._tri_matvec(*abs_a, np.abs(y))) + abs(nu) * np.linalg.norm(by)
            prev, res = res, np.linalg.norm(ay - nu * by) / scale
            if it >= 1 and (res < rtol or (res < floor and res > 0.5 * prev)):
                return self._d * y
        raise ConvergenceError(f"inverse iteration at nu={nu} stalled",
                               {"residual": res, "iterations": max_iter})

    def lowest(self, k, upper=None, tol=VALUE_TOL):
        """Lowest eigenpairs: the first ``k``, or all below ``upper`` (at most ``k``).

        Returns eigenvalues ascending and a matrix of B-orthonormal columns.
        """
        lo = self.lower_bound()
        if upper is not None:
            k = min(k, self.count_below(upper))
        if k == 0:
            return np.empty(0), np.empty((self.n, 0))
        hi = 1.0 if upper is None else upper
        while self.count_below(hi) < k:
            hi = 2 * abs(hi) + 1.0
        vals, vecs = [], []
        for j in range(k):
            nu = self.eigenvalue(j, lo, hi, tol)
            x = self.eigenvector(nu)
            for y in vecs:
                x = x - self.b_inner(y, x) * y
            x /= np.sqrt(self.b_inner(x, x))
            # sign: largest B-weighted entry positive
            imax = np.argmax(np.abs(x) / self._d)
            if x[imax] < 0:
                x = -x
            vals.append(nu)
            vecs.append(x)
            lo = nu
        return np.array(vals), np.column_stack(vecs)
