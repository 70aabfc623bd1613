"""Block-CSR matrices and the iterative-solver ingredients compared in the
experiments: block Jacobi, restarted GMRES, and block Jacobi / block ILU(0)
preconditioners."""

import numpy as np
import scipy.linalg
import scipy.sparse


class LinalgError(Exception):
    pass


class BlockSparseMatrix:
    """Square block-CSR matrix with uniform dense b x b blocks."""

    def __init__(self, n_block_rows, b, indptr, indices, blocks):
        self.n = int(n_block_rows)
        self.b = int(b)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.blocks = np.asarray(blocks)
        self._check()
        self._bsr = None

    def _check(self):
        if self.blocks.shape != (len(self.indices), self.b, self.b):
            raise LinalgError("block array shape mismatch")
        for i in range(self.n):
            cols = self.indices[self.indptr[i]:self.indptr[i + 1]]
            if np.any(np.diff(cols) <= 0):
                raise LinalgError(f"unsorted or duplicate columns in block row {i}")
            if i not in cols:
                raise LinalgError(f"missing diagonal block in row {i}")

    @classmethod
    def from_block_dict(cls, n, b, blocks):
        """Build from a {(row, col): b x b array} mapping; missing diagonal
        blocks are inserted as zeros."""
        entries = dict(blocks)
        for i in range(n):
            entries.setdefault((i, i), np.zeros((b, b)))
        indptr = [0]
        indices = []
        data = []
        for i in range(n):
            cols = sorted(j for (r, j) in entries if r == i)
            indices.extend(cols)
            data.extend(entries[(i, j)] for j in cols)
            indptr.append(len(indices))
        return cls(n, b, indptr, indices, np.array(data))

    @property
    def dim(self):
        return self.n * self.b

    @property
    def n_blocks(self):
        return len(self.indices)

    def matvec(self, x):
        if self._bsr is None:
            self._bsr = scipy.sparse.bsr_matrix(
                (self.blocks, self.indices, self.indptr),
                shape=(self.dim, self.dim))
        return self._bsr @ x

    def block(self, i, j):
        lo, hi = self.indptr[i], self.indptr[i + 1]
        k = np.searchsorted(self.indices[lo:hi], j)
        if k < hi - lo and self.indices[lo + k] == j:
            return self.blocks[lo + k]
        return None

    def diagonal_blocks(self):
        out = np.empty((self.n, self.b, self.b), dtype=self.blocks.dtype)
        for i in range(self.n):
            out[i] = self.block(i, i)
        return out

    def to_dense(self):
        A = np.zeros((self.dim, self.dim), dtype=self.blocks.dtype)
        b = self.b
        for i in range(self.n):
            for k in range(self.indptr[i], self.indptr[i + 1]):
                j = self.indices[k]
                A[i * b:(i + 1) * b, j * b:(j + 1) * b] = self.blocks[k]
        return A

    def scaled_add_diag(self, scale, diag_blocks):
        """Return scale * self with diag_blocks added on the block diagonal."""
        blocks = scale * self.blocks.copy()
        out = BlockSparseMatrix(self.n, self.b, self.indptr.copy(),
                                self.indices.copy(), blocks)
        for i in range(self.n):
            out.block(i, i)[...] += diag_blocks[i]
        return out

    def permuted(self, perm):
        """Symmetric permutation: row/col i of the result is perm[i] of self."""
        perm = np.asarray(perm)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(self.n)
        entries = {}
        for i in range(self.n):
            for k in range(self.indptr[i], self.indptr[i + 1]):
                entries[(inv[i], inv[self.indices[k]])] = self.blocks[k]
        return BlockSparseMatrix.from_block_dict(self.n, self.b, entries)

    def dump(self, path):
        """Block-coordinate text dump: `row col b values...` per block."""
        with open(path, "w") as f:
            for i in range(self.n):
                for k in range(self.indptr[i], self.indptr[i + 1]):
                    vals = " ".join(repr(v) for v in self.blocks[k].ravel())
                    f.write(f"{i} {self.indices[k]} {self.b} {vals}\n")


def _factor_diag(diag_blocks):
    """LU-with-pivoting factorization of each block; returns explicit inverses."""
    n, b, _ = diag_blocks.shape
    inv = np.empty_like(diag_blocks)
    eye = np.eye(b, dtype=diag_blocks.dtype)
    for i in range(n):
        lu, piv = scipy.linalg.lu_factor(diag_blocks[i], check_finite=False)
        if np.min(np.abs(np.diag(lu))) < 1e-300:
            raise LinalgError(f"singular diagonal block in row {i}")
        inv[i] = scipy.linalg.lu_solve((lu, piv), eye, check_finite=False)
    return inv


class BlockJacobiFactorization:
    """Per-row LU of the diagonal blocks; apply = multiply by D^{-1}."""

    def __init__(self, A):
        self.n = A.n
        self.b = A.b
        self.dinv = _factor_diag(A.diagonal_blocks())

    def apply(self, x):
        xb = x.reshape(self.n, self.b)
        return np.einsum("nij,nj->ni", self.dinv, xb).reshape(x.shape)


class BlockILU0Factorization:
    """In-place block ILU(0) on the (permuted) sparsity pattern of A.

    Block IKJ elimination visiting only existing blocks; storage equals the
    input block count. Sensitive to the element ordering, which is stored.
    """

    def __init__(self, A, ordering=None):
        self.n = A.n
        self.b = A.b
        if ordering is None:
            ordering = np.arange(A.n)
        self.ordering = np.asarray(ordering)
        P = A.permuted(self.ordering)
        self.indptr = P.indptr
        self.indices = P.indices
        self.blocks = P.blocks.copy()
        self._pos = {}
        for i in range(self.n):
            for k in range(self.indptr[i], self.indptr[i + 1]):
                self._pos[(i, self.indices[k])] = k
        self._factorize()

    def _factorize(self):
        eye = np.eye(self.b)
        self.uinv = np.empty((self.n, self.b, self.b))
        for i in range(self.n):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            row_cols = self.indices[lo:hi]
            for kk in range(lo, hi):
                kcol = self.indices[kk]
                if kcol >= i:
                    break
                # L_ik = A_ik U_kk^{-1}
                self.blocks[kk] = self.blocks[kk] @ self.uinv[kcol]
                Lik = self.blocks[kk]
                klo, khi = self.indptr[kcol], self.indptr[kcol + 1]
                for kj in range(klo, khi):
                    j = self.indices[kj]
                    if j <= kcol:
                        continue
                    pos = self._pos.get((i, j))
                    if pos is not None:
                        self.blocks[pos] = self.blocks[pos] - Lik @ self.blocks[kj]
            dpos = self._pos[(i, i)]
            lu, piv = scipy.linalg.lu_factor(self.blocks[dpos], check_finite=False)
            if np.min(np.abs(np.diag(lu))) < 1e-300:
                raise LinalgError(f"singular pivot block at elimination step {i}")
            self.uinv[i] = scipy.linalg.lu_solve((lu, piv), eye, check_finite=False)

    def apply(self, x):
        """Solve L U y = x (in the stored ordering)."""
        b = self.b
        xb = x.reshape(self.n, b)[self.ordering].copy()
        y = np.zeros_like(xb)
        for i in range(self.n):
            acc = xb[i]
            for k in range(self.indptr[i], self.indptr[i + 1]):
                j = self.indices[k]
                if j >= i:
                    break
                acc = acc - self.blocks[k] @ y[j]
            y[i] = acc
        z = np.zeros_like(xb)
        for i in range(self.n - 1, -1, -1):
            acc = y[i]
            for k in range(self.indptr[i], self.indptr[i + 1]):
                j = self.indices[k]
                if j > i:
                    acc = acc - self.blocks[k] @ z[j]
            z[i] = self.uinv[i] @ acc
        out = np.empty_like(z)
        out[self.ordering] = z
        return out.reshape(x.shape)

    def lu_product_dense(self):
        """Dense L @ U in the stored ordering (tests only)."""
        b = self.b
        dim = self.n * b
        L = np.eye(dim)
        U = np.zeros((dim, dim))
        for i in range(self.n):
            for k in range(self.indptr[i], self.indptr[i + 1]):
                j = self.indices[k]
                blk = self.blocks[k]
                if j < i:
                    L[i * b:(i + 1) * b, j * b:(j + 1) * b] = blk
                else:
                    U[i * b:(i + 1) * b, j * b:(j + 1) * b] = blk
        return L @ U


def factor_block_jacobi(A):
    return BlockJacobiFactorization(A)


def factor_bilu0(A, ordering=None):
    return BlockILU0Factorization(A, ordering)


def block_jacobi_solve(A, rhs, x0=None, tol=1e-14, max_iters=100000):
    """Fixed-point iteration x <- D^{-1} rhs + (I - D^{-1} A) x.

    Returns (x, iterations, converged); iterations is the first iterate index
    whose relative l2 residual meets tol.
    """
    fac = BlockJacobiFactorization(A)
    x = np.zeros(A.dim) if x0 is None else np.asarray(x0, float).copy()
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        bnorm = 1.0
    for it in range(max_iters + 1):
        r = rhs - A.matvec(x)
        if np.linalg.norm(r) <= tol * bnorm:
            return x, it, True
        x = x + fac.apply(r)
    return x, max_iters, False


def gmres(A, rhs, preconditioner=None, restart=20, tol=1e-14, max_iters=100000,
          x0=None):
    """Right-preconditioned restarted GMRES with Givens rotations.

    Convergence is declared on the true relative residual; the returned count
    is the total number of Arnoldi steps across restarts.
    """
    if preconditioner is None:
        prec = lambda v: v
    else:
        prec = preconditioner.apply
    n = A.dim
    x = np.zeros(n) if x0 is None else np.asarray(x0, float).copy()
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return x, 0, True
    total = 0
    while total <= max_iters:
        r = rhs - A.matvec(x)
        beta = np.linalg.norm(r)
        if beta <= tol * bnorm:
            return x, total, True
        V = np.zeros((restart + 1, n))
        H = np.zeros((restart + 1, restart))
        cs = np.zeros(restart)
        sn = np.zeros(restart)
        g = np.zeros(restart + 1)
        V[0] = r / beta
        g[0] = beta
        j_used = 0
        for j in range(restart):
            if total >= max_iters:
                break
            w = A.matvec(prec(V[j]))
            total += 1
            for i in range(j + 1):
                H[i, j] = np.dot(V[i], w)
                w = w - H[i, j] * V[i]
            # one re-orthogonalization pass
            for i in range(j + 1):
                c = np.dot(V[i], w)
                H[i, j] += c
                w = w - c * V[i]
            H[j + 1, j] = np.linalg.norm(w)
            happy = H[j + 1, j] < 1e-30 * bnorm
            if not happy:
                V[j + 1] = w / H[j + 1, j]
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            denom = np.hypot(H[j, j], H[j + 1, j])
            cs[j] = H[j, j] / denom
            sn[j] = H[j + 1, j] / denom
            H[j, j] = denom
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            j_used = j + 1
            if abs(g[j + 1]) <= tol * bnorm or happy:
                break
        if j_used == 0:
            break
        y = scipy.linalg.solve_triangular(H[:j_used, :j_used], g[:j_used],
                                          check_finite=False)
        x = x + prec(V[:j_used].T @ y)
    r = rhs - A.matvec(x)
    return x, total, np.linalg.norm(r) <= tol * bnorm


def jacobi_iteration_matrix(A, dim_cap=2000):
    """Dense R_J = I - D^{-1} A for spectral studies on small systems."""
    if A.dim > dim_cap:
        raise LinalgError(f"dimension {A.dim} exceeds cap {dim_cap}")
    dense = A.to_dense()
    n, b = A.n, A.b
    Dinv = np.zeros_like(dense)
    inv = _factor_diag_any(A.diagonal_blocks())
    for i in range(n):
        Dinv[i * b:(i + 1) * b, i * b:(i + 1) * b] = inv[i]
    return np.eye(A.dim, dtype=dense.dtype) - Dinv @ dense


def _factor_diag_any(diag_blocks):
    # complex-safe variant of _factor_diag
    n, b, _ = diag_blocks.shape
    inv = np.empty_like(diag_blocks)
    eye = np.eye(b, dtype=diag_blocks.dtype)
    for i in range(n):
        lu, piv = scipy.linalg.lu_factor(diag_blocks[i], check_finite=False)
        if np.min(np.abs(np.diag(lu))) < 1e-300:
            raise LinalgError(f"singular diagonal block in row {i}")
        inv[i] = scipy.linalg.lu_solve((lu, piv), eye, check_finite=False)
    return inv


def dense_complex_eigenvalues(A, cap=64):
    """Eigenvalues of a small dense (complex) matrix."""
    A = np.asarray(A)
    if A.shape[-1] != A.shape[-2] or A.shape[-1] > cap:
        raise LinalgError(f"matrix must be square with n <= {cap}")
    if not np.all(np.isfinite(A)):
        raise LinalgError("non-finite entries")
    return np.linalg.eigvals(A)


def spectral_radius(A):
    return float(np.max(np.abs(np.linalg.eigvals(np.asarray(A)))))
