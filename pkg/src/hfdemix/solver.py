"""First-order solver for the structured demixing cone program.

The program (one SOC residual constraint, two Hermitian PSD blocks with
Toeplitz substructure) is

    minimize   tr(Toep(u_f))/(2N) + t/2 + tau*tr(Toep(u_n))/(2N) + tau*tr(T)/2
    over       x in C^N, X in C^{LxN}, u_f, u_n in C^N (first entry real),
               t in R, T Hermitian LxL
    subject to ||y - A(x + lift(X))||_2 <= delta
               [Toep(u_f)  x ; x^H  t]       >= 0   (size N+1)
               [Toep(u_n)  X^H ; X  T]       >= 0   (size N+L)

solved by consensus ADMM: the structured variables S are split against
cone copies (Z1, Z2) for the two PSD blocks and z3 for the residual ball.
Every subproblem is closed form:

  * u/t/T updates are Toeplitz diagonal averaging plus a linear-term shift,
  * the coupled (x, X) update is a ridge least-squares problem solved via
    one cached M x M Cholesky factor (Woodbury identity; the Gram matrix
    of the stacked operator [A, A o lift] is A (I + diag(w)) A^H with
    w_n = ||B[n,:]||^2),
  * cone updates are eigenvalue clipping and ball projection.

Per-iteration cost is dominated by the two Hermitian eigendecompositions.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, NumericalFailure
from .measurement import lift_adjoint, lift_apply, lift_row_energies


# ---------------------------------------------------------------------------
# small structured-matrix helpers
# ---------------------------------------------------------------------------

def toep(u) -> np.ndarray:
    """Hermitian Toeplitz matrix with first column u."""
    return sla.toeplitz(u)


def toep_trace(u, n) -> float:
    """tr(Toep(u)) = n * Re(u[0])."""
    return n * float(np.real(u[0]))


def _diag_sums(w) -> np.ndarray:
    """Sums of the k-th subdiagonals, k = 0 .. N-1."""
    n = w.shape[0]
    return np.array([np.trace(w, offset=-k) for k in range(n)])


def toep_project_first_col(w) -> np.ndarray:
    """First column of the orthogonal projection of Hermitian w onto
    Hermitian Toeplitz matrices (diagonal averaging)."""
    n = w.shape[0]
    counts = n - np.arange(n)
    return _diag_sums(w) / counts


def psd_project(h) -> np.ndarray:
    """Nearest (Frobenius) Hermitian PSD matrix: clip negative eigenvalues.

    Non-Hermitian input is symmetrized first; non-finite entries raise.
    """
    h = np.asarray(h)
    if not np.all(np.isfinite(h)):
        raise NumericalFailure("psd_project received non-finite entries")
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    if w[0] >= 0.0:
        return h
    w = np.clip(w, 0.0, None)
    out = (v * w) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def soc_project(v, center, radius):
    """Project v onto the l2 ball of given radius around center."""
    diff = v - center
    nrm = float(np.linalg.norm(diff))
    if nrm <= radius:
        return v
    if radius == 0.0:
        return center.copy()
    return center + diff * (radius / nrm)


# ---------------------------------------------------------------------------
# program and solution containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConicProgram:
    """Compiled demixing program with cached factorizations."""

    combiner: np.ndarray          # A, M x N
    y: np.ndarray                 # length M
    basis: np.ndarray             # B, N x L
    tau: float
    delta: float
    _gram_chol: tuple = field(repr=False, default=None)

    @property
    def m(self) -> int:
        return self.combiner.shape[0]

    @property
    def n(self) -> int:
        return self.combiner.shape[1]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def objective(self, x, x_mat, u_far, u_near, t, t_mat) -> float:
        n, tau = self.n, self.tau
        return (toep_trace(u_far, n) / (2.0 * n) + 0.5 * t
                + tau * toep_trace(u_near, n) / (2.0 * n)
                + 0.5 * tau * float(np.real(np.trace(t_mat))))

    def forward(self, x, x_mat) -> np.ndarray:
        """A(x + lift(X))."""
        return self.combiner @ (x + lift_apply(self.basis, x_mat))

    def block_far(self, u_far, x, t) -> np.ndarray:
        n = self.n
        blk = np.empty((n + 1, n + 1), dtype=complex)
        blk[:n, :n] = toep(u_far)
        blk[:n, n] = x
        blk[n, :n] = np.conj(x)
        blk[n, n] = t
        return blk

    def block_near(self, u_near, x_mat, t_mat) -> np.ndarray:
        n, l = self.n, self.rank
        blk = np.empty((n + l, n + l), dtype=complex)
        blk[:n, :n] = toep(u_near)
        blk[:n, n:] = x_mat.conj().T
        blk[n:, :n] = x_mat
        blk[n:, n:] = t_mat
        return blk

    def constraint_gaps(self, x, x_mat, u_far, u_near, t, t_mat):
        """(negative part of lambda_min(block1), same for block2, SOC excess)."""
        lam1 = float(np.linalg.eigvalsh(self.block_far(u_far, x, t))[0])
        lam2 = float(np.linalg.eigvalsh(self.block_near(u_near, x_mat, t_mat))[0])
        soc = float(np.linalg.norm(self.y - self.forward(x, x_mat))) - self.delta
        return max(0.0, -lam1), max(0.0, -lam2), max(0.0, soc)


def compile_program(combiner, y, basis, tau, delta) -> ConicProgram:
    """Validate dimensions, cache the (x, X) update factorization."""
    combiner = np.asarray(combiner, dtype=complex)
    y = np.asarray(y, dtype=complex)
    basis = np.asarray(basis, dtype=complex)
    m, n = combiner.shape
    if y.shape != (m,):
        raise DomainError(f"y has length {y.shape}, expected {m}")
    if basis.shape[0] != n:
        raise DomainError(f"basis rows {basis.shape[0]} != combiner columns {n}")
    if basis.shape[1] > n:
        raise DomainError("subspace rank exceeds antenna count")
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    if delta < 0:
        raise DomainError(f"delta must be nonnegative, got {delta}")
    w = lift_row_energies(basis)
    gram = combiner @ ((1.0 + w)[:, None] * combiner.conj().T)
    gram[np.diag_indices(m)] += 2.0
    chol = sla.cho_factor(gram)
    return ConicProgram(combiner=combiner, y=y, basis=basis, tau=float(tau),
                        delta=float(delta), _gram_chol=chol)


@dataclass
class SolverOptions:
    rho: float = 1.0
    eps_abs: float = 1e-5
    eps_rel: float = 1e-4
    max_iters: int = 50_000
    relax: float = 1.0            # over-relaxation factor; >1 tends to hurt
                                  # the PSD blocks here, so default off
    adapt_every: int = 50         # rho rescaled at most this often
    adapt_ratio: float = 10.0     # trigger when residual ratio exceeds this
    log_csv: str | None = None    # per-iteration diagnostics stream
    log_every: int = 50
    polish: bool = True


@dataclass
class SolverState:
    """Full iterate, usable as a warm start."""

    x: np.ndarray
    x_mat: np.ndarray
    u_far: np.ndarray
    u_near: np.ndarray
    t: float
    t_mat: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    z3: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    rho: float

    @staticmethod
    def zeros(n, l, m, rho) -> "SolverState":
        return SolverState(
            x=np.zeros(n, complex), x_mat=np.zeros((l, n), complex),
            u_far=np.zeros(n, complex), u_near=np.zeros(n, complex),
            t=0.0, t_mat=np.zeros((l, l), complex),
            z1=np.zeros((n + 1, n + 1), complex),
            z2=np.zeros((n + l, n + l), complex),
            z3=np.zeros(m, complex),
            d1=np.zeros((n + 1, n + 1), complex),
            d2=np.zeros((n + l, n + l), complex),
            d3=np.zeros(m, complex),
            rho=rho,
        )

    def scaled(self, c) -> "SolverState":
        """Positive rescaling of the whole iterate (for homogeneity tests)."""
        return SolverState(
            x=self.x * c, x_mat=self.x_mat * c, u_far=self.u_far * c,
            u_near=self.u_near * c, t=self.t * c, t_mat=self.t_mat * c,
            z1=self.z1 * c, z2=self.z2 * c, z3=self.z3 * c,
            d1=self.d1 * c, d2=self.d2 * c, d3=self.d3 * c, rho=self.rho)


@dataclass(frozen=True)
class SdpSolution:
    """Solver output blocks plus convergence diagnostics."""

    x: np.ndarray
    x_mat: np.ndarray
    u_far: np.ndarray
    u_near: np.ndarray
    t: float
    t_mat: np.ndarray
    status: str                   # converged | max_iters
    iterations: int
    primal_residual: float
    dual_residual: float
    objective_value: float
    soc_residual: float           # ||y - A(x + lift(X))|| of returned blocks
    min_eig_far: float
    min_eig_near: float
    residual_history: np.ndarray  # rows (iter, primal, dual, objective)
    wall_seconds: float
    state: SolverState = field(repr=False, default=None)


# ---------------------------------------------------------------------------
# the ADMM loop
# ---------------------------------------------------------------------------

def _dual_map_norm(prog: ConicProgram, d1, d2, d3) -> float:
    """Norm of the adjoint of the constraint map applied to cone-space data.

    Used for the dual residual and its stopping threshold. Components follow
    from <G(S), D> matched against the variable-space inner product.
    """
    n, l = prog.n, prog.rank
    ah = prog.combiner.conj().T @ d3
    gx = 2.0 * d1[:n, n] + ah
    gt = float(np.real(d1[n, n]))
    s1 = _diag_sums(d1[:n, :n])
    gu_f = np.concatenate(([s1[0]], 2.0 * s1[1:]))
    g_xmat = 2.0 * d2[n:, :n] + lift_adjoint(prog.basis, ah)
    g_tmat = d2[n:, n:]
    s2 = _diag_sums(d2[:n, :n])
    gu_n = np.concatenate(([s2[0]], 2.0 * s2[1:]))
    return float(np.sqrt(
        np.linalg.norm(gx) ** 2 + gt**2 + np.linalg.norm(gu_f) ** 2
        + np.linalg.norm(g_xmat) ** 2 + np.linalg.norm(g_tmat) ** 2
        + np.linalg.norm(gu_n) ** 2))


def solve(prog: ConicProgram, opts: SolverOptions | None = None,
          warm: SolverState | None = None) -> SdpSolution:
    """Run the operator-splitting iteration on a compiled program.

    Returns the iterate with the best combined residual seen. Status is
    'converged' only if the residual criteria were met and the returned
    blocks pass the feasibility checks (after the optional polish step);
    otherwise 'max_iters'. Non-finite iterates raise NumericalFailure.
    """
    opts = opts or SolverOptions()
    n, l, m = prog.n, prog.rank, prog.m
    a_mat, y, b_mat = prog.combiner, prog.y, prog.basis
    tau = prog.tau

    st = warm if warm is not None else SolverState.zeros(n, l, m, opts.rho)
    rho = st.rho

    dim_pri = np.sqrt(2.0 * ((n + 1) ** 2 + (n + l) ** 2 + m))
    dim_dual = np.sqrt(2.0 * (n + l * n + 2 * n + l * l + 1))

    history = []
    best = None
    best_score = np.inf
    converged = False
    it = 0
    t0 = time.perf_counter()
    log_rows = []

    for it in range(1, opts.max_iters + 1):
        # ---- structured-variable update (closed forms) ----
        v1 = st.z1 - st.d1
        v1 = 0.5 * (v1 + v1.conj().T)
        v2 = st.z2 - st.d2
        v2 = 0.5 * (v2 + v2.conj().T)
        v3 = st.z3 - st.d3

        u_far = toep_project_first_col(v1[:n, :n])
        u_far[0] = u_far[0].real - 1.0 / (2.0 * rho * n)
        t_new = float(np.real(v1[n, n])) - 1.0 / (2.0 * rho)

        u_near = toep_project_first_col(v2[:n, :n])
        u_near[0] = u_near[0].real - tau / (2.0 * rho * n)
        t_mat = v2[n:, n:] - (tau / (2.0 * rho)) * np.eye(l)

        # coupled (x, X) ridge system via the cached Woodbury factor
        ah_v3 = a_mat.conj().T @ v3
        rhs_x = 2.0 * v1[:n, n] + ah_v3
        rhs_xm = 2.0 * v2[n:, :n] + lift_adjoint(b_mat, ah_v3)
        cr = a_mat @ (rhs_x + lift_apply(b_mat, rhs_xm))
        q = sla.cho_solve(prog._gram_chol, cr)
        ah_q = a_mat.conj().T @ q
        x = 0.5 * (rhs_x - ah_q)
        x_mat = 0.5 * (rhs_xm - lift_adjoint(b_mat, ah_q))

        st.x, st.x_mat, st.u_far, st.u_near, st.t, st.t_mat = (
            x, x_mat, u_far, u_near, t_new, t_mat)

        # ---- cone updates (with over-relaxation) ----
        g1 = prog.block_far(u_far, x, t_new)
        g2 = prog.block_near(u_near, x_mat, t_mat)
        g3 = a_mat @ (x + lift_apply(b_mat, x_mat))

        al = opts.relax
        g1_rel = al * g1 + (1.0 - al) * st.z1
        g2_rel = al * g2 + (1.0 - al) * st.z2
        g3_rel = al * g3 + (1.0 - al) * st.z3
        z1_new = psd_project(g1_rel + st.d1)
        z2_new = psd_project(g2_rel + st.d2)
        z3_new = soc_project(g3_rel + st.d3, y, prog.delta)

        st.d1 += g1_rel - z1_new
        st.d2 += g2_rel - z2_new
        st.d3 += g3_rel - z3_new
        r1, r2c, r3 = g1 - z1_new, g2 - z2_new, g3 - z3_new

        # ---- residuals and stopping ----
        pri = float(np.sqrt(np.linalg.norm(r1) ** 2 + np.linalg.norm(r2c) ** 2
                            + np.linalg.norm(r3) ** 2))
        dual = rho * _dual_map_norm(prog, z1_new - st.z1, z2_new - st.z2,
                                    z3_new - st.z3)
        st.z1, st.z2, st.z3 = z1_new, z2_new, z3_new

        if not (np.isfinite(pri) and np.isfinite(dual)):
            raise NumericalFailure(f"non-finite residuals at iteration {it}")

        obj = prog.objective(x, x_mat, u_far, u_near, t_new, t_mat)
        history.append((it, pri, dual, obj))
        if opts.log_csv and (it % opts.log_every == 0 or it == 1):
            log_rows.append(f"{it},{pri:.6e},{dual:.6e},{obj:.10e}")

        score = max(pri, dual)
        if score < best_score:
            best_score = score
            best = (x.copy(), x_mat.copy(), u_far.copy(), u_near.copy(),
                    t_new, t_mat.copy(), it, pri, dual)

        norm_g = np.sqrt(np.linalg.norm(g1) ** 2 + np.linalg.norm(g2) ** 2
                         + np.linalg.norm(g3) ** 2)
        norm_z = np.sqrt(np.linalg.norm(st.z1) ** 2 + np.linalg.norm(st.z2) ** 2
                         + np.linalg.norm(st.z3) ** 2)
        eps_pri = dim_pri * opts.eps_abs + opts.eps_rel * max(norm_g, norm_z)
        eps_dual = (dim_dual * opts.eps_abs
                    + opts.eps_rel * rho * _dual_map_norm(prog, st.d1, st.d2, st.d3))
        if pri <= eps_pri and dual <= eps_dual:
            converged = True
            best = (x, x_mat, u_far, u_near, t_new, t_mat, it, pri, dual)
            break

        # ---- adaptive penalty (scaled duals rescale inversely) ----
        if it % opts.adapt_every == 0:
            if pri > opts.adapt_ratio * dual:
                rho *= 2.0
                st.d1 *= 0.5
                st.d2 *= 0.5
                st.d3 *= 0.5
            elif dual > opts.adapt_ratio * pri:
                rho *= 0.5
                st.d1 *= 2.0
                st.d2 *= 2.0
                st.d3 *= 2.0
            st.rho = rho

    x, x_mat, u_far, u_near, t_new, t_mat, best_it, pri, dual = best

    if opts.polish:
        x, u_far, u_near, t_new, t_mat = _polish(
            prog, x, x_mat, u_far, u_near, t_new, t_mat)

    soc = float(np.linalg.norm(y - prog.forward(x, x_mat)))
    lam1 = float(np.linalg.eigvalsh(prog.block_far(u_far, x, t_new))[0])
    lam2 = float(np.linalg.eigvalsh(prog.block_near(u_near, x_mat, t_mat))[0])
    feas_ok = (soc <= prog.delta + 1e-6 * (1.0 + prog.delta)
               and -lam1 <= 1e-6 * (1.0 + np.linalg.norm(prog.block_far(u_far, x, t_new)))
               and -lam2 <= 1e-6 * (1.0 + np.linalg.norm(prog.block_near(u_near, x_mat, t_mat))))
    status = "converged" if (converged and feas_ok) else "max_iters"

    if opts.log_csv:
        with open(opts.log_csv, "w") as fh:
            fh.write("iter,primal_res,dual_res,objective\n")
            fh.write("\n".join(log_rows) + "\n")

    st.rho = rho
    return SdpSolution(
        x=x, x_mat=x_mat, u_far=u_far, u_near=u_near, t=t_new, t_mat=t_mat,
        status=status, iterations=it,
        primal_residual=pri, dual_residual=dual,
        objective_value=prog.objective(x, x_mat, u_far, u_near, t_new, t_mat),
        soc_residual=soc, min_eig_far=lam1, min_eig_near=lam2,
        residual_history=np.array(history), wall_seconds=time.perf_counter() - t0,
        state=st)


def _polish(prog, x, x_mat, u_far, u_near, t, t_mat):
    """Restore strict feasibility of the returned blocks.

    The data residual is projected back into the delta ball by a minimum-norm
    correction to x (which leaves the lifted component untouched), and the two
    PSD blocks get the smallest diagonal shift that clears their most negative
    eigenvalue. Both corrections are O(residual) at convergence.
    """
    a_mat, y = prog.combiner, prog.y
    resid = y - prog.forward(x, x_mat)
    rn = float(np.linalg.norm(resid))
    if rn > prog.delta:
        gram = a_mat @ a_mat.conj().T
        gram[np.diag_indices(prog.m)] += 1e-12 * max(1.0, np.trace(gram).real / prog.m)
        corr = a_mat.conj().T @ np.linalg.solve(gram, resid)
        x = x + corr * (1.0 - prog.delta / rn)

    lam1 = float(np.linalg.eigvalsh(prog.block_far(u_far, x, t))[0])
    if lam1 < 0.0:
        shift = -lam1 * (1.0 + 1e-9)
        u_far = u_far.copy()
        u_far[0] += shift
        t += shift
    lam2 = float(np.linalg.eigvalsh(prog.block_near(u_near, x_mat, t_mat))[0])
    if lam2 < 0.0:
        shift = -lam2 * (1.0 + 1e-9)
        u_near = u_near.copy()
        u_near[0] += shift
        t_mat = t_mat + shift * np.eye(prog.rank)
    return x, u_far, u_near, t, t_mat
