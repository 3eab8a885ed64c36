"""Direct and block-preconditioned solves of the assembled saddle systems.

The coupled operator, ordered (u, w, p, lambda) with the zero-mean pressure
multiplier lambda, is

    [ A     Duw   -B^T   0 ]
    [ Dwu   C      0     0 ]
    [ -B    0      0     m ]
    [ 0     0      m^T   0 ]

Backends:

* ``splu``        scipy SuperLU on the monolithic matrix (default desk scale),
* ``umfpack``     cvxopt's UMFPACK binding, better fill behaviour on larger 3D
                  systems (optional dependency),
* ``block``       flexible GMRES on the monolithic system preconditioned by a
                  block upper-triangular solve: an exact (factorized) Stokes
                  block for (u, p, lambda) and Jacobi-CG on the microrotation
                  block.  Used where a monolithic factorization does not fit
                  in memory.

Every backend finishes with iterative refinement and the relative residual is
checked against 1e-9.
"""

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import SingularSystem, SolverBreakdown

_RESIDUAL_TOL = 1e-9

try:  # optional backend
    import cvxopt
    import cvxopt.umfpack as _um

    _HAVE_UMFPACK = True
except Exception:  # pragma: no cover - environment dependent
    _HAVE_UMFPACK = False


@dataclass
class SaddleSystem:
    """Assembled blocks of one mixed micropolar problem."""

    A: sp.spmatrix
    C: sp.spmatrix
    Duw: sp.spmatrix
    Dwu: sp.spmatrix
    B: sp.spmatrix
    mean_p: np.ndarray
    velocity_space: object = None
    pressure_space: object = None
    rhs_u: np.ndarray | None = None
    rhs_w: np.ndarray | None = None

    @property
    def nu(self):
        return self.A.shape[0]

    @property
    def nw(self):
        return self.C.shape[0]

    @property
    def np_(self):
        return self.B.shape[0]

    def matrix(self):
        m = sp.csr_matrix(self.mean_p.reshape(-1, 1))
        K = sp.bmat(
            [
                [self.A, self.Duw, -self.B.T, None],
                [self.Dwu, self.C, None, None],
                [-self.B, None, None, m],
                [None, None, m.T, None],
            ],
            format="csc",
        )
        return K

    def rhs(self, rhs_u=None, rhs_w=None):
        bu = self.rhs_u if rhs_u is None else rhs_u
        bw = self.rhs_w if rhs_w is None else rhs_w
        b = np.zeros(self.nu + self.nw + self.np_ + 1)
        if bu is not None:
            b[: self.nu] = bu
        if bw is not None:
            b[self.nu : self.nu + self.nw] = bw
        return b

    def split(self, x):
        nu, nw, npp = self.nu, self.nw, self.np_
        return x[:nu], x[nu : nu + nw], x[nu + nw : nu + nw + npp], x[nu + nw + npp :]


@dataclass
class SaddleResult:
    u: np.ndarray
    w: np.ndarray
    p: np.ndarray
    multipliers: np.ndarray
    residual: float


def _pick_backend(n):
    forced = os.environ.get("MICRODARCY_SOLVER", "").strip().lower()
    if forced in ("splu", "umfpack", "block"):
        if forced == "umfpack" and not _HAVE_UMFPACK:
            return "splu"
        return forced
    if n <= 230_000:
        return "splu"
    if _HAVE_UMFPACK and n <= 340_000:
        return "umfpack"
    return "block"


class _LinearSolve:
    """Wrapper giving splu and umfpack a common .solve interface."""

    def __init__(self, K, backend):
        self.backend = backend
        K = K.tocsc()
        self.K = K
        try:
            if backend == "umfpack":
                coo = K.tocoo()
                self._A = cvxopt.spmatrix(
                    coo.data, coo.row.astype(int), coo.col.astype(int), K.shape
                )
                self._sym = _um.symbolic(self._A)
                self._num = _um.numeric(self._A, self._sym)
            else:
                self._lu = spla.splu(K)
        except Exception as exc:
            raise SingularSystem(f"factorization failed: {exc}") from exc

    def solve(self, b):
        if self.backend == "umfpack":
            x = cvxopt.matrix(np.asarray(b, dtype=float))
            _um.solve(self._A, self._num, x)
            return np.array(x).ravel()
        return self._lu.solve(np.asarray(b, dtype=float))


def _refine(apply_K, solve, b, x, max_rounds=3):
    bn = np.linalg.norm(b)
    if bn == 0.0:
        return np.zeros_like(b), 0.0
    res = np.linalg.norm(b - apply_K(x)) / bn
    for _ in range(max_rounds):
        if res <= 1e-13:
            break
        dx = solve(b - apply_K(x))
        x2 = x + dx
        res2 = np.linalg.norm(b - apply_K(x2)) / bn
        if res2 >= res:
            break
        x, res = x2, res2
    return x, res


class _FGMRES:
    """Flexible GMRES with modified Gram-Schmidt, no restart."""

    def __init__(self, apply_K, apply_M, maxiter=150, tol=1e-11):
        self.apply_K = apply_K
        self.apply_M = apply_M
        self.maxiter = maxiter
        self.tol = tol

    def solve(self, b):
        n = len(b)
        bn = np.linalg.norm(b)
        if bn == 0.0:
            return np.zeros(n)
        m = self.maxiter
        V = np.zeros((m + 1, n))
        Z = np.zeros((m, n))
        H = np.zeros((m + 1, m))
        g = np.zeros(m + 1)
        V[0] = b / bn
        g[0] = bn
        cs = np.zeros(m)
        sn = np.zeros(m)
        k_final = 0
        for k in range(m):
            Z[k] = self.apply_M(V[k])
            w = self.apply_K(Z[k])
            for i in range(k + 1):
                H[i, k] = V[i] @ w
                w -= H[i, k] * V[i]
            H[k + 1, k] = np.linalg.norm(w)
            if H[k + 1, k] > 0:
                V[k + 1] = w / H[k + 1, k]
            for i in range(k):
                t = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
                H[i + 1, k] = -sn[i] * H[i, k] + cs[i] * H[i + 1, k]
                H[i, k] = t
            r = np.hypot(H[k, k], H[k + 1, k])
            if r == 0.0:
                k_final = k + 1
                break
            cs[k], sn[k] = H[k, k] / r, H[k + 1, k] / r
            H[k, k] = r
            H[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]
            k_final = k + 1
            if abs(g[k + 1]) / bn < self.tol:
                break
        y = np.linalg.solve(H[:k_final, :k_final], g[:k_final])
        return Z[:k_final].T @ y


class _BlockSolver:
    """Stokes-factorized, CG-on-C upper triangular preconditioner + FGMRES."""

    def __init__(self, system):
        self.system = system
        nu, npp = system.nu, system.np_
        m = sp.csr_matrix(system.mean_p.reshape(-1, 1))
        S = sp.bmat(
            [[system.A, -system.B.T, None], [-system.B, None, m], [None, m.T, None]],
            format="csc",
        )
        backend = "umfpack" if (_HAVE_UMFPACK and S.shape[0] > 230_000) else "splu"
        self._stokes = _LinearSolve(S, backend)
        self._C = system.C.tocsr()
        d = self._C.diagonal()
        d[d == 0.0] = 1.0
        self._Cdiag_inv = 1.0 / d
        self.K = sp.bmat(
            [
                [system.A, system.Duw, -system.B.T, None],
                [system.Dwu, system.C, None, None],
                [-system.B, None, None, m],
                [None, None, m.T, None],
            ],
            format="csr",
        )

    def _solve_C(self, r, tol=1e-8):
        x = np.zeros_like(r)
        rr = r.copy()
        z = self._Cdiag_inv * rr
        p = z.copy()
        rz = rr @ z
        rn0 = np.linalg.norm(r)
        if rn0 == 0.0:
            return x
        for _ in range(400):
            Cp = self._C @ p
            alpha = rz / (p @ Cp)
            x += alpha * p
            rr -= alpha * Cp
            if np.linalg.norm(rr) <= tol * rn0:
                break
            z = self._Cdiag_inv * rr
            rz_new = rr @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
        return x

    def _apply_M(self, r):
        sys_ = self.system
        nu, nw, npp = sys_.nu, sys_.nw, sys_.np_
        ru, rw, rp, rl = r[:nu], r[nu : nu + nw], r[nu + nw : nu + nw + npp], r[nu + nw + npp :]
        zw = self._solve_C(rw, tol=1e-6)
        rhs = np.concatenate([ru - sys_.Duw @ zw, rp, rl])
        zup = self._stokes.solve(rhs)
        return np.concatenate([zup[:nu], zw, zup[nu:]])

    def solve(self, b):
        fg = _FGMRES(lambda x: self.K @ x, self._apply_M)
        x = fg.solve(b)
        x, _ = _refine(lambda v: self.K @ v, lambda r: self._apply_M_tight(r), b, x)
        return x

    def _apply_M_tight(self, r):
        sys_ = self.system
        nu, nw, npp = sys_.nu, sys_.nw, sys_.np_
        fg = _FGMRES(lambda x: self.K @ x, self._apply_M, maxiter=60, tol=1e-8)
        return fg.solve(r)


class SaddleFactorization:
    """Shared factorization used to solve several right-hand sides."""

    def __init__(self, system, backend=None):
        self.system = system
        n = system.nu + system.nw + system.np_ + 1
        self.backend = backend or _pick_backend(n)
        if self.backend == "block":
            self._impl = _BlockSolver(system)
            self._K = self._impl.K
        else:
            self._K = system.matrix()
            self._impl = _LinearSolve(self._K, self.backend)

    def solve(self, rhs_u=None, rhs_w=None):
        b = self.system.rhs(rhs_u, rhs_w)
        bn = np.linalg.norm(b)
        if bn == 0.0:
            x, res = np.zeros(self._K.shape[0]), 0.0
        elif self.backend == "block":
            x = self._impl.solve(b)
            res = np.linalg.norm(b - self._K @ x) / bn
        else:
            x = self._impl.solve(b)
            x, res = _refine(lambda v: self._K @ v, self._impl.solve, b, x)
        if not np.isfinite(res) or res > _RESIDUAL_TOL:
            raise SolverBreakdown(
                f"saddle solve residual {res:.3e} above {_RESIDUAL_TOL}", residual=res
            )
        u, w, p, lam = self.system.split(x)
        return SaddleResult(u=u, w=w, p=p, multipliers=lam, residual=res)


def solve_saddle(system, rhs_u=None, rhs_w=None, backend=None):
    """Factorize and solve a single right-hand side; see SaddleFactorization."""
    return SaddleFactorization(system, backend=backend).solve(rhs_u, rhs_w)
