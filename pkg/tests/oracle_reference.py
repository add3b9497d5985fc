"""Offline cross-solver oracle for the demixing program.

Builds small seeded instances, solves them with an independent generic
conic solver (cvxpy + CLARABEL), and prints the optimal objectives that
are frozen into tests/test_acceptance.py. Run manually:

    python tests/oracle_reference.py

cvxpy is intentionally not a package dependency; it is only needed to
regenerate the frozen reference values.
"""

import numpy as np

from hfdemix import (SystemConfig, build_default_subspace, observe,
                     random_combiner, sample_hybrid_channel)

ORACLE_N = 8
ORACLE_L = 3
ORACLE_TAU = 1.0
ORACLE_SNR_DB = 10.0
ORACLE_SEEDS = (101, 202, 303, 404, 505)


def oracle_instance(seed):
    """One seeded N=8 instance: (combiner, y, basis, tau, delta)."""
    cfg = SystemConfig.full_sampling(ORACLE_N, 2, 30e9)
    basis = build_default_subspace(cfg, rank=ORACLE_L, grid_size=256, r_min=2.0)
    rng = np.random.default_rng(seed)
    channel = sample_hybrid_channel(1, 1, cfg, rng)
    combiner = random_combiner(cfg, rng)
    ens = observe(combiner, channel.h, ORACLE_SNR_DB, rng, cfg)
    return combiner, ens.y, basis, ORACLE_TAU, ens.noise_bound


def solve_reference(combiner, y, basis, tau, delta):
    import cvxpy as cp

    n = combiner.shape[1]
    l = basis.basis.shape[1]
    x = cp.Variable(n, complex=True)
    x_mat = cp.Variable((l, n), complex=True)
    u_far = cp.Variable(n, complex=True)
    u_near = cp.Variable(n, complex=True)
    t = cp.Variable()
    t_mat = cp.Variable((l, l), hermitian=True)

    def toep_expr(u):
        rows = []
        for i in range(n):
            cols = []
            for j in range(n):
                cols.append(u[i - j] if i >= j else cp.conj(u[j - i]))
            rows.append(cp.hstack(cols))
        return cp.vstack(rows)

    tf = toep_expr(u_far)
    tn = toep_expr(u_near)
    lifted = cp.hstack([basis.basis[i, :] @ x_mat[:, i] for i in range(n)])
    resid = y - combiner @ (x + lifted)

    block1 = cp.bmat([[tf, cp.reshape(x, (n, 1), order="C")],
                      [cp.reshape(cp.conj(x), (1, n), order="C"),
                       cp.reshape(t, (1, 1), order="C")]])
    block2 = cp.bmat([[tn, cp.conj(x_mat.T)], [x_mat, t_mat]])

    objective = (cp.real(cp.trace(tf)) / (2 * n) + t / 2
                 + tau * cp.real(cp.trace(tn)) / (2 * n)
                 + tau * cp.real(cp.trace(t_mat)) / 2)
    constraints = [cp.norm(resid, 2) <= delta,
                   block1 >> 0, block2 >> 0,
                   cp.imag(u_far[0]) == 0, cp.imag(u_near[0]) == 0]
    prob = cp.Problem(cp.Minimize(objective), constraints)
    prob.solve(solver=cp.CLARABEL)
    return prob.value, prob.status


def main():
    print("# seed -> reference objective (CLARABEL)")
    values = []
    for seed in ORACLE_SEEDS:
        inst = oracle_instance(seed)
        val, status = solve_reference(*inst)
        values.append(val)
        print(f"{seed}: {val!r}   ({status})")
    print("\nORACLE_OBJECTIVES =", tuple(values))


if __name__ == "__main__":
    main()
