"""Dense primal-dual interior-point solver for small semidefinite programs.

Problem form (the moment side)::

    minimize    c' z
    subject to  a_r' z = b_r              r = 1..m
                F_j(z) = F_j0 + sum_a z_a F_ja  PSD   (one per block)

and its dual::

    maximize    b' lam - sum_j <F_j0, Z_j>
    subject to  c - A' lam = sum_j F_j^*(Z_j),   Z_j PSD

Blocks of size one form a nonnegative orthant and are handled together, so
linear programs are the special case with only 1x1 blocks.

The method is a Mehrotra predictor-corrector on the homogeneous self-dual
embedding with Nesterov-Todd scaling.  Infeasible and unbounded programs
are detected from the embedding's rays.  Linear algebra is dense
throughout; moment relaxations of order <= 3 stay well inside that regime.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np
import scipy.linalg as sla

from .moments import AffineMatrixMap, gram_polynomial
from .poly import Polynomial, max_abs_coefficient, rank_monomials

logger = logging.getLogger(__name__)

LinearForm = dict[int, float]

#: iterations without a better iterate before giving up
STALL_ITERS = 8
TAU_FLOOR = 1e-60


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITER = "MaxIter"
    NUMERICAL_FAILURE = "NumericalFailure"

    def __str__(self):
        return self.value


@dataclass
class ConicProgram:
    """Linear objective, affine equalities and affine PSD blocks over ``z``.

    ``objective_poly`` and ``equality_polys`` are optional: when a program
    comes from a moment relaxation they hold the polynomials whose Riesz
    functionals give the objective and each equality row, which lets
    :func:`check_certificate` rebuild the SOS identity in polynomial form.
    """

    nvar: int
    objective: LinearForm
    equalities: list[tuple[LinearForm, float]] = field(default_factory=list)
    psd_blocks: list[AffineMatrixMap] = field(default_factory=list)
    objective_poly: Polynomial | None = None
    equality_polys: list[Polynomial | None] | None = None
    equality_labels: list[str] | None = None

    def __post_init__(self):
        def check(form: LinearForm, what: str):
            for k in form:
                if not 0 <= k < self.nvar:
                    raise ValueError(f"{what} references rank {k} outside [0, {self.nvar})")

        check(self.objective, "objective")
        for r, (form, _) in enumerate(self.equalities):
            check(form, f"equality {r}")
        for j, blk in enumerate(self.psd_blocks):
            if blk.max_rank >= self.nvar:
                raise ValueError(f"block {j} references rank {blk.max_rank} outside [0, {self.nvar})")
        if self.equality_polys is not None and len(self.equality_polys) != len(self.equalities):
            raise ValueError("equality_polys must align with equalities")

    # dense views ---------------------------------------------------------
    def c_vector(self) -> np.ndarray:
        c = np.zeros(self.nvar)
        for k, v in self.objective.items():
            c[k] += v
        return c

    def a_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        A = np.zeros((len(self.equalities), self.nvar))
        b = np.zeros(len(self.equalities))
        for r, (form, rhs) in enumerate(self.equalities):
            for k, v in form.items():
                A[r, k] += v
            b[r] = rhs
        return A, b

    def objective_value(self, z) -> float:
        return float(sum(v * z[k] for k, v in self.objective.items()))


@dataclass
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 200
    #: residual level at which a stalled run is still reported as usable
    near_tol: float = 1e-6
    step_fraction: float = 0.99
    refine_steps: int = 3


@dataclass
class ConicSolution:
    status: Status
    primal_z: np.ndarray
    dual_eq: np.ndarray
    dual_psd: list[np.ndarray]
    primal_obj: float
    dual_obj: float
    gap: float
    primal_residual: float = np.inf
    dual_residual: float = np.inf
    iterations: int = 0
    #: residual of the improving ray when status is Infeasible/Unbounded
    certificate_residual: float | None = None

    @property
    def usable(self) -> bool:
        """Optimal, or stopped early with residuals at ``near_tol`` level."""
        return self.status is Status.OPTIMAL or getattr(self, "_near_optimal", False)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


# ---------------------------------------------------------------------------
# cone helpers: the cone is an orthant part (vector) plus a list of PSD blocks


class _Cone:
    def __init__(self, n_lin: int, sizes: Sequence[int]):
        self.n_lin = n_lin
        self.sizes = list(sizes)
        self.degree = n_lin + sum(self.sizes)

    def identity(self):
        return (np.ones(self.n_lin), [np.eye(s) for s in self.sizes])

    @staticmethod
    def dot(u, v) -> float:
        return float(u[0] @ v[0] + sum(np.vdot(a, b) for a, b in zip(u[1], v[1])))

    @staticmethod
    def add(u, v, alpha=1.0):
        return (u[0] + alpha * v[0], [a + alpha * b for a, b in zip(u[1], v[1])])

    @staticmethod
    def scale(u, alpha):
        return (alpha * u[0], [alpha * a for a in u[1]])

    @staticmethod
    def norm(u) -> float:
        return float(np.sqrt(u[0] @ u[0] + sum(np.vdot(a, a) for a in u[1])))


@dataclass
class _Scaling:
    # orthant: W = diag(d); PSD blocks: W(Z) = r' Z r, rti = r^{-T}
    d: np.ndarray
    r: list[np.ndarray]
    rti: list[np.ndarray]
    lam: tuple[np.ndarray, list[np.ndarray]]  # lam[1] holds the diagonal of each block


def _nt_scaling(s, z) -> _Scaling:
    sl, zl = s[0], z[0]
    lam_l = np.sqrt(sl * zl)
    d = np.sqrt(sl / zl)
    rs, rtis, lams = [], [], []
    for S, Z in zip(s[1], z[1]):
        Ls = np.linalg.cholesky(S)
        Lz = np.linalg.cholesky(Z)
        U, lam, Vt = np.linalg.svd(Lz.T @ Ls)
        isq = 1.0 / np.sqrt(lam)
        rs.append((Ls @ Vt.T) * isq[None, :])
        rtis.append((Lz @ U) * isq[None, :])
        lams.append(lam)
    return _Scaling(d, rs, rtis, (lam_l, lams))


def _sym(M):
    return 0.5 * (M + M.T)


def _lam_solve(W: _Scaling, rhs):
    """Solve ``lam o u = rhs`` (symmetrized product with diagonal lam)."""
    lin = rhs[0] / W.lam[0]
    blocks = []
    for lam, R in zip(W.lam[1], rhs[1]):
        blocks.append(2.0 * R / (lam[:, None] + lam[None, :]))
    return (lin, blocks)


def _lam_sq(W: _Scaling):
    return (W.lam[0] ** 2, [np.diag(l**2) for l in W.lam[1]])


def _jordan(u, v):
    return (u[0] * v[0], [_sym(a @ b) for a, b in zip(u[1], v[1])])


def _apply_W(W: _Scaling, z):
    return (z[0] * W.d, [r.T @ Z @ r for r, Z in zip(W.r, z[1])])


def _apply_Wt(W: _Scaling, u):
    return (u[0] * W.d, [_sym(r @ U @ r.T) for r, U in zip(W.r, u[1])])


def _apply_Winv(W: _Scaling, u):
    return (u[0] / W.d, [_sym(t @ U @ t.T) for t, U in zip(W.rti, u[1])])


def _apply_Winvt(W: _Scaling, s):
    """Scaled slack ``W^{-T} s``."""
    return (s[0] / W.d, [_sym(t.T @ S @ t) for t, S in zip(W.rti, s[1])])


def _max_step(W: _Scaling, v) -> float:
    """Largest alpha with lam + alpha v in the cone (inf if unbounded)."""
    worst = 0.0
    if len(v[0]):
        ratio = v[0] / W.lam[0]
        worst = max(worst, -float(ratio.min()))
    for lam, V in zip(W.lam[1], v[1]):
        isq = 1.0 / np.sqrt(lam)
        M = _sym(V * isq[:, None] * isq[None, :])
        worst = max(worst, -float(np.linalg.eigvalsh(M)[0]))
    return np.inf if worst <= 0 else 1.0 / worst


# ---------------------------------------------------------------------------


class _Data:
    """Internal, scaled problem data in the embedding's sign convention."""

    def __init__(self, prog: ConicProgram):
        self.prog = prog
        nvar = prog.nvar
        c = prog.c_vector()
        A, b = prog.a_matrix()
        self.keep, self.inconsistent = _independent_rows(A, b)
        A_k, b_k = A[self.keep], b[self.keep]
        self.row_scale = np.linalg.norm(A_k, axis=1) if len(A_k) else np.zeros(0)
        self.row_scale[self.row_scale == 0] = 1.0
        self.A = A_k / self.row_scale[:, None]
        self.b = b_k / self.row_scale
        self.c_scale = max(1.0, float(np.abs(c).max()) if nvar else 1.0)
        self.c = c / self.c_scale
        self.m_full = A.shape[0]
        # A' = [Q1 Q2] [R; 0]: Q2 spans the nullspace of A
        if len(self.A):
            Q, Rfull = np.linalg.qr(self.A.T, mode="complete")
            m = len(self.A)
            self.range_q, self.range_r, self.null = Q[:, :m], Rfull[:m], Q[:, m:]
        else:
            self.range_q = np.zeros((nvar, 0))
            self.range_r = np.zeros((0, 0))
            self.null = np.eye(nvar)

        lin_rows: list[np.ndarray] = []
        lin_h: list[float] = []
        self.lin_blocks: list[int] = []
        self.F: list[np.ndarray] = []
        self.F0: list[np.ndarray] = []
        self.psd_blocks: list[int] = []
        for j, blk in enumerate(prog.psd_blocks):
            T = blk.tensor(nvar)
            if blk.size == 1:
                lin_rows.append(T[:, 0, 0])
                lin_h.append(float(blk.constant_matrix()[0, 0]))
                self.lin_blocks.append(j)
            else:
                self.F.append(T)
                self.F0.append(blk.constant_matrix())
                self.psd_blocks.append(j)
        # G x + s = h  with  s = F(x) = F0 + sum x_a F_a  =>  G = -F, h = F0
        self.Flin = np.array(lin_rows).reshape(len(lin_rows), nvar)
        self.hlin = np.array(lin_h)
        self.Fflat = [T.reshape(nvar, -1) for T in self.F]
        self.cone = _Cone(len(lin_rows), [T.shape[1] for T in self.F])
        self.h = (self.hlin, [F0 for F0 in self.F0])

    # G and G' in the (vector, [matrices]) representation
    def G(self, x):
        lin = -(self.Flin @ x) if self.cone.n_lin else np.zeros(0)
        blocks = [-np.tensordot(x, T, axes=(0, 0)) for T in self.F]
        return (lin, blocks)

    def Gt(self, u) -> np.ndarray:
        out = np.zeros(self.prog.nvar)
        if self.cone.n_lin:
            out -= self.Flin.T @ u[0]
        for Ff, U in zip(self.Fflat, u[1]):
            out -= Ff @ U.ravel()
        return out


def _independent_rows(A: np.ndarray, b: np.ndarray, tol: float = 1e-10):
    """Greedy selection of linearly independent equality rows in input order.

    Returns the kept row indices and, when the dropped rows contradict the
    kept ones, the residual vector ``r`` with ``A' r = 0`` and ``b' r > 0``.
    """
    m, n = A.shape
    keep: list[int] = []
    Q = np.zeros((0, n))
    for r in range(m):
        a = A[r]
        na = np.linalg.norm(a)
        res = a - Q.T @ (Q @ a) if len(Q) else a.copy()
        if len(Q):
            res -= Q.T @ (Q @ res)
        nr = np.linalg.norm(res)
        if nr > tol * max(1.0, na):
            keep.append(r)
            Q = np.vstack([Q, res / nr])
    if not m:
        return keep, None
    if len(keep) == m:
        return keep, None
    # least squares on all rows: the residual is orthogonal to range(A)
    x_ls = np.linalg.lstsq(A, b, rcond=None)[0]
    resid = b - A @ x_ls
    if np.abs(resid).max() > 1e-9 * max(1.0, float(np.abs(b).max())):
        return keep, resid
    return keep, None


class _KKT:
    """Factorization of [[0, A', G'], [A, 0, 0], [G, 0, -W'W]]."""

    def __init__(self, data: _Data, W: _Scaling):
        self.data = data
        self.W = W
        n = data.prog.nvar
        H = np.zeros((n, n))
        if data.cone.n_lin:
            wl = 1.0 / W.d**2  # (W'W)^{-1} on the orthant
            H += (data.Flin.T * wl) @ data.Flin
        self.T = []
        for T, rti in zip(data.F, W.rti):
            Tt = np.matmul(np.matmul(rti.T[None, :, :], T), rti[None, :, :]).reshape(n, -1)
            self.T.append(Tt)
            H += Tt @ Tt.T
        self.H = H
        # reduced system on the nullspace of A (orthonormal basis from one QR)
        N = data.null
        Hn = N.T @ H @ N if N.shape[1] else np.zeros((0, 0))
        try:
            self.cH = sla.cho_factor(_sym(Hn), lower=True, check_finite=False) if N.shape[1] else None
        except np.linalg.LinAlgError:
            reg = 1e-13 * max(1.0, float(np.trace(Hn)) / max(Hn.shape[0], 1))
            self.cH = sla.cho_factor(_sym(Hn) + reg * np.eye(Hn.shape[0]), lower=True, check_finite=False)

    def _winv2(self, u):
        """(W'W)^{-1} u."""
        W = self.W
        lin = u[0] / W.d**2
        blocks = [_sym(t @ (t.T @ U @ t) @ t.T) for t, U in zip(W.rti, u[1])]
        return (lin, blocks)

    def solve(self, bx, by, bz):
        data = self.data
        # uz = (W'W)^{-1} (G ux - bz);  H ux + A' uy = bx + G' (W'W)^{-1} bz
        rhs = bx + data.Gt(self._winv2(bz))
        N, Q1, R = data.null, data.range_q, data.range_r
        # particular solution of A ux = by, then the nullspace component
        ux = Q1 @ sla.solve_triangular(R, by, trans="T", check_finite=False) if len(by) else np.zeros_like(rhs)
        if self.cH is not None:
            w = sla.cho_solve(self.cH, N.T @ (rhs - self.H @ ux), check_finite=False)
            ux = ux + N @ w
        if len(by):
            uy = sla.solve_triangular(R, Q1.T @ (rhs - self.H @ ux), check_finite=False)
        else:
            uy = np.zeros(0)
        Gux = data.G(ux)
        uz = self._winv2(_Cone.add(Gux, bz, -1.0))
        return ux, uy, uz

    def residual(self, ux, uy, uz, bx, by, bz):
        d = self.data
        rx = d.A.T @ uy + d.Gt(uz) - bx if len(d.A) else d.Gt(uz) - bx
        ry = d.A @ ux - by
        WtW = _apply_Wt(self.W, _apply_W(self.W, uz))
        rz = _Cone.add(_Cone.add(d.G(ux), WtW, -1.0), bz, -1.0)
        return rx, ry, rz

    def solve_refined(self, bx, by, bz, steps: int):
        ux, uy, uz = self.solve(bx, by, bz)
        for _ in range(steps):
            rx, ry, rz = self.residual(ux, uy, uz, bx, by, bz)
            dx, dy, dz = self.solve(rx, ry, rz)
            ux, uy, uz = ux - dx, uy - dy, _Cone.add(uz, dz, -1.0)
        return ux, uy, uz


def solve(prog: ConicProgram, opts: SolverOptions | None = None) -> ConicSolution:
    """Solve a :class:`ConicProgram`.  Deterministic for identical input."""
    opts = opts or SolverOptions()
    data = _Data(prog)
    nvar = prog.nvar
    m_full = data.m_full

    def pack(status, x, y, z, primal_obj, dual_obj, pres, dres, it, cert=None, near=False):
        lam = np.zeros(m_full)
        if len(data.keep):
            # internal y follows G'z + A'y + c = 0, so lam = -y (unscaled)
            lam[data.keep] = -y / data.row_scale * data.c_scale
        Z = [None] * len(prog.psd_blocks)
        for idx, j in enumerate(data.lin_blocks):
            Z[j] = np.array([[z[0][idx] * data.c_scale]])
        for idx, j in enumerate(data.psd_blocks):
            Z[j] = z[1][idx] * data.c_scale
        sol = ConicSolution(
            status=status,
            primal_z=x,
            dual_eq=lam,
            dual_psd=Z,
            primal_obj=primal_obj,
            dual_obj=dual_obj,
            gap=primal_obj - dual_obj,
            primal_residual=pres,
            dual_residual=dres,
            iterations=it,
            certificate_residual=cert,
        )
        sol._near_optimal = near
        return sol

    cone = data.cone
    zero_cone = (np.zeros(cone.n_lin), [np.zeros((s, s)) for s in cone.sizes])

    if data.inconsistent is not None:
        r = data.inconsistent
        lam = r / float(r @ prog.a_matrix()[1])
        sol = ConicSolution(
            status=Status.INFEASIBLE,
            primal_z=np.full(nvar, np.nan),
            dual_eq=lam,
            dual_psd=[np.zeros((b.size, b.size)) for b in prog.psd_blocks],
            primal_obj=np.inf,
            dual_obj=np.inf,
            gap=np.nan,
            certificate_residual=float(np.abs(prog.a_matrix()[0].T @ lam).max()),
        )
        return sol

    A, b, c, h = data.A, data.b, data.c, data.h
    m = A.shape[0]
    if cone.degree == 0:
        return _solve_no_cone(prog, data, pack)

    x = np.zeros(nvar)
    y = np.zeros(m)
    s, z = cone.identity(), cone.identity()
    tau, kappa = 1.0, 1.0
    resx0 = max(1.0, float(np.linalg.norm(c)))
    resy0 = max(1.0, float(np.linalg.norm(b)))
    resz0 = max(1.0, _Cone.norm(h))

    best = None
    best_it = 0
    best_cert = np.inf
    for it in range(opts.max_iter + 1):
        # residuals of the embedding
        hrx = -(A.T @ y) - data.Gt(z) if m else -data.Gt(z)
        hry = A @ x if m else np.zeros(0)
        hrz = _Cone.add(s, data.G(x))
        rx = hrx - c * tau
        ry = hry - b * tau
        rz = _Cone.add(hrz, h, -tau)
        cx = float(c @ x)
        by_hz = float(b @ y) + _Cone.dot(h, z)
        rt = kappa + cx + by_hz
        gap = _Cone.dot(s, z)
        mu = (gap + tau * kappa) / (cone.degree + 1)

        pcost = cx / tau
        dcost = -by_hz / tau
        pres = max(float(np.linalg.norm(ry)) / resy0, _Cone.norm(rz) / resz0) / tau
        dres = float(np.linalg.norm(rx)) / resx0 / tau
        gap_scale = max(1.0, min(abs(pcost), abs(dcost)))
        rel_gap_ok = min(gap / tau**2, abs(pcost - dcost)) <= opts.tol * gap_scale

        pinf = dinf = np.inf
        if by_hz < 0:
            pinf = float(np.linalg.norm(hrx)) / resx0 / -by_hz
        if cx < 0:
            dinf = max(float(np.linalg.norm(hry)) / resy0, _Cone.norm(hrz) / resz0) / -cx

        def finish(status, near=False, cert=None):
            if status is Status.INFEASIBLE:
                scale = -by_hz
                return pack(status, np.full(nvar, np.nan), y / scale, _Cone.scale(z, 1.0 / scale),
                            np.inf, np.inf, pres, dres, it, cert=cert)
            if status is Status.UNBOUNDED:
                return pack(status, x / -cx, np.zeros(m), zero_cone, -np.inf, -np.inf,
                            pres, dres, it, cert=cert)
            xs, ys, zs = x / tau, y / tau, _Cone.scale(z, 1.0 / tau)
            return pack(status, xs, ys, zs, pcost * data.c_scale, dcost * data.c_scale,
                        pres, dres, it, near=near)

        logger.debug("it %2d pcost %+.8e dcost %+.8e gap %.2e pres %.2e dres %.2e tau %.2e kappa %.2e",
                     it, pcost, dcost, gap / tau**2, pres, dres, tau, kappa)

        if pres <= opts.tol and dres <= opts.tol and rel_gap_ok:
            return finish(Status.OPTIMAL)
        if pinf <= opts.tol:
            return finish(Status.INFEASIBLE, cert=pinf)
        if dinf <= opts.tol:
            return finish(Status.UNBOUNDED, cert=dinf)

        score = max(pres, dres, min(gap / tau**2, abs(pcost - dcost)) / gap_scale)
        if best is None or score < best[0]:
            best = (score, finish(Status.MAX_ITER))
            best_it = it
        if min(pinf, dinf) < 0.5 * best_cert:
            # a converging infeasibility ray also counts as progress
            best_cert = min(pinf, dinf)
            best_it = it
        if it == opts.max_iter:
            break
        if it - best_it >= STALL_ITERS:
            logger.debug("no progress since iteration %d", best_it)
            sol = best[1]
            sol.status = Status.NUMERICAL_FAILURE
            sol._near_optimal = best[0] <= opts.near_tol
            sol.iterations = it
            return sol

        try:
            W = _nt_scaling(s, z)
            kkt = _KKT(data, W)
            # direction for the tau column
            x1, y1, z1 = kkt.solve_refined(-c, b, h, opts.refine_steps)
            Wz1 = _apply_W(W, z1)
            denom_base = _Cone.dot(Wz1, Wz1)

            lam_sq = _lam_sq(W)
            ds_aff = dz_aff = None
            dtau_aff = dkappa_aff = 0.0
            sigma = 0.0
            step = 0.0
            for phase in (0, 1):
                if phase == 0:
                    eta = 1.0
                    rc = _Cone.scale(lam_sq, -1.0)
                    rk = -tau * kappa
                else:
                    eta = 1.0 - sigma
                    cross = _jordan(ds_aff, dz_aff)
                    rc = _Cone.add(_Cone.add(_Cone.scale(lam_sq, -1.0), cross, -1.0),
                                   _Cone.scale(cone.identity(), sigma * mu))
                    rk = -tau * kappa - dtau_aff * dkappa_aff + sigma * mu
                u = _lam_solve(W, rc)
                Wtu = _apply_Wt(W, u)
                x2, y2, z2 = kkt.solve_refined(
                    eta * rx, -eta * ry, _Cone.add(_Cone.scale(rz, -eta), Wtu, -1.0), opts.refine_steps
                )
                num = -eta * rt - rk / tau - float(c @ x2) - float(b @ y2) - _Cone.dot(h, z2)
                dtau = num / (-kappa / tau - denom_base)
                dx = x2 + dtau * x1
                dy = y2 + dtau * y1
                dz = _Cone.add(z2, z1, dtau)
                dkappa = (rk - kappa * dtau) / tau
                zhat = _apply_W(W, dz)
                # ds from the linearized primal residual rather than W'(u - W dz):
                # keeps the residual decrease exact when W is ill-conditioned
                ds = _Cone.add(_Cone.add(_Cone.scale(rz, -eta), data.G(dx), -1.0), h, dtau)
                shat = _apply_Winvt(W, ds)
                alpha = min(_max_step(W, shat), _max_step(W, zhat))
                if dtau < 0:
                    alpha = min(alpha, -tau / dtau)
                if dkappa < 0:
                    alpha = min(alpha, -kappa / dkappa)
                if phase == 0:
                    alpha_aff = min(1.0, alpha)
                    sigma = min(1.0, max(0.0, 1.0 - alpha_aff)) ** 3
                    ds_aff, dz_aff = shat, zhat
                    dtau_aff, dkappa_aff = dtau, dkappa
                else:
                    step = min(1.0, opts.step_fraction * alpha)
            x = x + step * dx
            y = y + step * dy
            s = _Cone.add(s, ds, step)
            z = _Cone.add(z, dz, step)
            s = (s[0], [_sym(S) for S in s[1]])
            z = (z[0], [_sym(Z) for Z in z[1]])
            tau += step * dtau
            kappa += step * dkappa
            if not np.all(np.isfinite(x)) or not tau > TAU_FLOOR or kappa <= 0:
                raise np.linalg.LinAlgError("non-finite iterate")
        except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
            logger.debug("numerical failure at iteration %d: %s", it, exc)
            sol = best[1]
            near = best[0] <= opts.near_tol
            sol.status = Status.NUMERICAL_FAILURE
            sol._near_optimal = near
            sol.iterations = it
            return sol

    sol = best[1]
    sol.status = Status.MAX_ITER
    sol._near_optimal = best[0] <= opts.near_tol
    return sol


def _solve_no_cone(prog: ConicProgram, data: _Data, pack) -> ConicSolution:
    """Equality-only program: optimal iff c lies in the row space of A."""
    A, b, c = data.A, data.b, data.c
    m = A.shape[0]
    x = np.linalg.lstsq(A, b, rcond=None)[0] if m else np.zeros(prog.nvar)
    y = -np.linalg.lstsq(A.T, c, rcond=None)[0] if m else np.zeros(0)
    dres = float(np.linalg.norm(A.T @ y + c)) if m else float(np.linalg.norm(c))
    zero = (np.zeros(0), [])
    if dres > 1e-9 * max(1.0, float(np.linalg.norm(c))):
        ray = c - (A.T @ np.linalg.lstsq(A.T, c, rcond=None)[0] if m else 0.0)
        return pack(Status.UNBOUNDED, -ray, np.zeros(m), zero, -np.inf, -np.inf, 0.0, dres, 0, cert=0.0)
    pobj = float(c @ x) * data.c_scale
    dobj = float(-b @ y) * data.c_scale
    return pack(Status.OPTIMAL, x, y, zero, pobj, dobj, 0.0, dres, 0)


# ---------------------------------------------------------------------------
# certificates


@dataclass
class CertificateReport:
    max_residual: float
    min_eigenvalues: list[float]
    polynomial_route: bool
    residual_poly: Polynomial | None = None

    @property
    def min_eigenvalue(self) -> float:
        return min(self.min_eigenvalues, default=0.0)


def linear_residual(prog: ConicProgram, dual_eq, dual_psd) -> np.ndarray:
    """``c - A' lam - sum_j F_j^*(Z_j)`` computed from the linear forms."""
    res = prog.c_vector()
    for lam, (form, _) in zip(dual_eq, prog.equalities):
        for k, v in form.items():
            res[k] -= lam * v
    for blk, Z in zip(prog.psd_blocks, dual_psd):
        for r, col, k, v in blk.entries:
            res[k] -= v * (Z[r, col] if r == col else Z[r, col] + Z[col, r])
    return res


def check_certificate(prog: ConicProgram, sol: ConicSolution) -> CertificateReport:
    """Residual of the identity ``f - sum_r lam_r e_r - sum_j w_j v'Z_j v = 0``.

    When the program carries its generating polynomials the identity is
    rebuilt with polynomial arithmetic (Gram blocks turned back into SOS
    polynomials); otherwise the linear-form residual is used.
    """
    eigs = [float(np.linalg.eigvalsh(_sym(Z))[0]) if Z.size else 0.0 for Z in sol.dual_psd]
    poly_ok = (
        prog.objective_poly is not None
        and prog.equality_polys is not None
        and all(p is not None for p in prog.equality_polys)
        and all(b.weight is not None and b.basis_degree is not None for b in prog.psd_blocks)
    )
    if not poly_ok:
        res = linear_residual(prog, sol.dual_eq, sol.dual_psd)
        return CertificateReport(float(np.abs(res).max(initial=0.0)), eigs, False)
    resid = prog.objective_poly
    for lam, e in zip(sol.dual_eq, prog.equality_polys):
        if lam:
            resid = resid - e * float(lam)
    for blk, Z in zip(prog.psd_blocks, sol.dual_psd):
        sigma = gram_polynomial(_sym(Z), blk.n, blk.basis_degree)
        resid = resid - sigma * blk.weight
    return CertificateReport(max_abs_coefficient(resid), eigs, True, resid)


# ---------------------------------------------------------------------------
# plain-text dump


def dump_program(prog: ConicProgram, out: TextIO) -> None:
    """Write ``prog`` in the block text format described in the README."""
    w = out.write
    w("jmopt-conic 1\n")
    w(f"nvar {prog.nvar}\n")
    w(f"objective {len(prog.objective)}\n")
    for k in sorted(prog.objective):
        w(f"{k} {prog.objective[k]!r}\n")
    w(f"equalities {len(prog.equalities)}\n")
    for form, rhs in prog.equalities:
        w(f"row {len(form)} {rhs!r}\n")
        for k in sorted(form):
            w(f"{k} {form[k]!r}\n")
    w(f"blocks {len(prog.psd_blocks)}\n")
    for blk in prog.psd_blocks:
        const = [] if blk.constant is None else [
            (i, j, float(blk.constant[i, j]))
            for i in range(blk.size) for j in range(i, blk.size) if blk.constant[i, j]
        ]
        w(f"block {blk.size} {len(blk.entries)} {len(const)}\n")
        for r, c, k, v in blk.entries:
            w(f"{r} {c} {k} {v!r}\n")
        for i, j, v in const:
            w(f"{i} {j} {v!r}\n")


def load_program(lines: Iterable[str]) -> ConicProgram:
    it = iter(line for line in (l.strip() for l in lines) if line and not line.startswith("#"))

    def expect(word):
        parts = next(it).split()
        if parts[0] != word:
            raise ValueError(f"expected '{word}', got '{parts[0]}'")
        return parts[1:]

    if expect("jmopt-conic") != ["1"]:
        raise ValueError("unsupported dump version")
    nvar = int(expect("nvar")[0])
    obj = {}
    for _ in range(int(expect("objective")[0])):
        k, v = next(it).split()
        obj[int(k)] = float(v)
    eqs = []
    for _ in range(int(expect("equalities")[0])):
        nnz, rhs = expect("row")
        form = {}
        for _ in range(int(nnz)):
            k, v = next(it).split()
            form[int(k)] = float(v)
        eqs.append((form, float(rhs)))
    blocks = []
    for _ in range(int(expect("blocks")[0])):
        size, nent, nconst = (int(t) for t in expect("block"))
        entries = []
        for _ in range(nent):
            r, c, k, v = next(it).split()
            entries.append((int(r), int(c), int(k), float(v)))
        const = None
        if nconst:
            const = np.zeros((size, size))
            for _ in range(nconst):
                i, j, v = next(it).split()
                const[int(i), int(j)] = const[int(j), int(i)] = float(v)
        blocks.append(AffineMatrixMap(size, tuple(entries), constant=const))
    return ConicProgram(nvar, obj, eqs, blocks)
