"""Pilot measurement synthesis and the subspace lifting operator.

The receiver sees y = A h + n_eff, where A stacks P per-slot analog
combiners (constant-modulus entries of magnitude 1/sqrt(N)) and n_eff
stacks the per-slot combined noise A_p n_p. Pilot symbols are fixed to 1;
after the standard conjugate pre-scaling they drop out of the model.

The lifting operator connects the L x N coefficient matrix X of the
near-field component to a length-N channel vector:

    lift_apply(B, X)[n] = B[n, :] @ X[:, n]

It is the unique linear map satisfying, for every coefficient vector z and
frequency phi,

    lift_apply(B, z * phase_ramp(phi)^T) = (B z) * phase_ramp(phi)

i.e. rank-one atoms whose n-th column carries the phase exp(j 2 pi n phi)
map to the modulated steering vector. (Writing the atom with a conjugated
row, z * phase_ramp(phi)^H, flips the sign of phi in the output; no linear
map can avoid that, so the sign bookkeeping lives in parameter extraction.)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DomainError
from .model import SystemConfig


@dataclass(frozen=True)
class MeasurementEnsemble:
    """One trial's combiner, observation and noise bookkeeping."""

    combiner: np.ndarray      # M x N, |entries| = 1/sqrt(N)
    y: np.ndarray             # length M
    noise_sigma: float        # per-antenna noise std before combining
    noise_bound: float        # l2 budget delta for the demixing constraint

    @property
    def m(self) -> int:
        return self.combiner.shape[0]

    @property
    def n(self) -> int:
        return self.combiner.shape[1]


def random_combiner(cfg: SystemConfig, rng) -> np.ndarray:
    """M x N analog combiner with i.i.d. uniform phases, modulus 1/sqrt(N).

    Rows are grouped in pilot-slot order: rows [p*n_rf, (p+1)*n_rf) form
    the slot-p combiner A_p.
    """
    m = cfg.num_measurements
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(m, cfg.n))
    return np.exp(1j * phases) / np.sqrt(cfg.n)


def noise_bound(sigma_eff: float, m: int, epsilon: float = 0.05) -> float:
    """Chi-square-style l2 budget: sigma * sqrt(M + 2 sqrt(M log(1/eps))).

    Chosen so ||n_eff|| <= delta holds with probability about 1 - eps.
    """
    if sigma_eff == 0.0:
        return 0.0
    return float(sigma_eff * np.sqrt(m + 2.0 * np.sqrt(m * np.log(1.0 / epsilon))))


def observe(combiner, h, snr_db, rng, cfg: SystemConfig,
            epsilon: float = 0.05) -> MeasurementEnsemble:
    """Generate y = A h + n_eff at the requested post-combining SNR.

    Noise is drawn per pilot slot at the antennas and passed through that
    slot's combiner block, so it is colored by A_p exactly as in the
    receive chain. SNR is defined as ||A h||^2 / E||n_eff||^2; each entry
    of n_eff has variance sigma^2 because combiner rows have unit norm.
    snr_db = inf gives the noiseless ensemble with delta = 0.
    """
    combiner = np.asarray(combiner)
    h = np.asarray(h)
    m, n = combiner.shape
    if h.shape != (n,):
        raise DomainError(f"channel length {h.shape} does not match combiner width {n}")
    signal = combiner @ h

    if np.isinf(snr_db):
        return MeasurementEnsemble(combiner=combiner, y=signal,
                                   noise_sigma=0.0, noise_bound=0.0)

    sig_energy = float(np.linalg.norm(signal) ** 2)
    if sig_energy == 0.0:
        raise DegenerateInputError("zero channel cannot meet a finite SNR")
    # E||n_eff||^2 = sigma^2 * M since every combiner row has unit norm
    sigma2 = sig_energy / (m * 10.0 ** (snr_db / 10.0))
    sigma = float(np.sqrt(sigma2))

    n_rf = cfg.n_rf
    noise = np.empty(m, dtype=complex)
    for p in range(cfg.pilot_len):
        block = combiner[p * n_rf:(p + 1) * n_rf, :]
        n_p = sigma / np.sqrt(2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        noise[p * n_rf:(p + 1) * n_rf] = block @ n_p

    return MeasurementEnsemble(combiner=combiner, y=signal + noise,
                               noise_sigma=sigma,
                               noise_bound=noise_bound(sigma, m, epsilon))


# ---------------------------------------------------------------------------
# lifting operator and adjoint
# ---------------------------------------------------------------------------

def lift_apply(basis_matrix, x_mat) -> np.ndarray:
    """Map the L x N coefficient matrix to a channel vector; see module docs."""
    b = np.asarray(basis_matrix)
    x_mat = np.asarray(x_mat)
    if x_mat.shape != (b.shape[1], b.shape[0]):
        raise DomainError(f"expected shape {(b.shape[1], b.shape[0])}, got {x_mat.shape}")
    return np.einsum("nl,ln->n", b, x_mat)


def lift_adjoint(basis_matrix, v) -> np.ndarray:
    """Adjoint of :func:`lift_apply` under the trace inner product.

    Column n is v[n] * conj(B[n, :]); satisfies
    <lift_apply(X), v> = <X, lift_adjoint(v)> for all X, v.
    """
    b = np.asarray(basis_matrix)
    v = np.asarray(v)
    if v.shape != (b.shape[0],):
        raise DomainError(f"expected length {b.shape[0]}, got {v.shape}")
    return b.conj().T * v[None, :]


def lift_row_energies(basis_matrix) -> np.ndarray:
    """Row energies ||B[n,:]||^2; lift_apply o lift_adjoint = diag of these."""
    b = np.asarray(basis_matrix)
    return np.sum(np.abs(b) ** 2, axis=1)
