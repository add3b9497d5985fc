"""Two-stage greedy baseline over a far-field + polar near-field dictionary.

Stage 1 runs orthogonal matching pursuit against plane-wave atoms on a
uniform frequency grid, stage 2 continues on the residual against exact
spherical-wave atoms sampled on an angle grid times a range ladder that is
uniform in 1/r (curvature is linear in 1/r, so this grids the physical
parameter evenly). The split between stages is ceil(gamma * K) far
iterations, with gamma the assumed far-field path fraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import SystemConfig, near_steering_exact, phase_ramp, theta_from_phi


@dataclass(frozen=True)
class PolarDictionary:
    far_atoms: np.ndarray        # N x G_f, unit-norm columns
    far_phis: np.ndarray
    near_atoms: np.ndarray       # N x G_n, unit-norm columns
    near_params: np.ndarray      # G_n x 2 rows of (theta, r)


def build_polar_dictionary(cfg: SystemConfig, far_grid_size: int | None = None,
                           num_ranges: int = 8,
                           r_range: tuple = (10.0, 80.0)) -> PolarDictionary:
    """Far grid of size G_f (default 2N) uniform in phi; near grid of the
    same angles crossed with `num_ranges` distances uniform in 1/r."""
    n = cfg.n
    g_f = 2 * n if far_grid_size is None else far_grid_size
    if g_f < 1 or num_ranges < 1:
        raise ConfigurationError("grids must be nonempty")
    # uniform frequency comb; at g_f = n this is the DFT frequency set
    phis = -0.5 + np.arange(g_f) / g_f
    far = np.column_stack([phase_ramp(p, n) for p in phis]) / np.sqrt(n)

    # near-field angles use a half-cell offset so theta stays inside
    # (-pi/2, pi/2)
    theta_phis = -0.5 + (np.arange(g_f) + 0.5) / g_f
    thetas = theta_from_phi(theta_phis, cfg)
    inv_r = np.linspace(1.0 / r_range[1], 1.0 / r_range[0], num_ranges)
    cols, params = [], []
    for r in 1.0 / inv_r:
        for th in thetas:
            cols.append(near_steering_exact(th, r, cfg))
            params.append((th, r))
    near = np.column_stack(cols)
    near /= np.linalg.norm(near, axis=0, keepdims=True)
    return PolarDictionary(far_atoms=far, far_phis=phis, near_atoms=near,
                           near_params=np.array(params))


@dataclass(frozen=True)
class OmpEstimate:
    h_hat: np.ndarray
    far_indices: tuple
    near_indices: tuple
    coeffs: np.ndarray
    residual_norms: np.ndarray    # one entry per iteration, non-increasing

    def far_thetas(self, dictionary, cfg):
        return [phi_to_theta_safe(dictionary.far_phis[i], cfg) for i in self.far_indices]


def phi_to_theta_safe(phi, cfg):
    s = phi * cfg.wavelength / cfg.spacing
    return float(np.arcsin(np.clip(s, -1.0, 1.0)))


def hybrid_omp(y, combiner, dictionary: PolarDictionary, k: int,
               gamma: float) -> OmpEstimate:
    """Greedy recovery of k atoms, ceil(gamma*k) far then the rest near.

    Each iteration picks the atom whose measurement-domain column best
    correlates with the residual, then refits all selected atoms jointly
    by least squares (so residual norms never increase). The returned
    channel estimate is the joint fit mapped back to the antenna domain.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ConfigurationError(f"gamma={gamma} outside [0, 1]")
    k_far = int(np.ceil(gamma * k))
    k_near = k - k_far
    if k_far > dictionary.far_atoms.shape[1] or k_near > dictionary.near_atoms.shape[1]:
        raise ConfigurationError("sparsity k exceeds dictionary size")

    meas_far = combiner @ dictionary.far_atoms
    meas_near = combiner @ dictionary.near_atoms
    norm_far = np.linalg.norm(meas_far, axis=0)
    norm_near = np.linalg.norm(meas_near, axis=0)

    selected_cols = []     # measurement-domain columns
    channel_cols = []      # antenna-domain columns
    far_idx, near_idx = [], []
    resid = y.copy()
    resid_norms = []
    coeffs = np.zeros(0)

    def _select(meas, norms, taken):
        corr = np.abs(meas.conj().T @ resid) / np.maximum(norms, 1e-30)
        corr[list(taken)] = -1.0
        return int(np.argmax(corr))

    for it in range(k):
        if it < k_far:
            j = _select(meas_far, norm_far, far_idx)
            far_idx.append(j)
            selected_cols.append(meas_far[:, j])
            channel_cols.append(dictionary.far_atoms[:, j])
        else:
            j = _select(meas_near, norm_near, near_idx)
            near_idx.append(j)
            selected_cols.append(meas_near[:, j])
            channel_cols.append(dictionary.near_atoms[:, j])
        phi_mat = np.column_stack(selected_cols)
        coeffs = np.linalg.lstsq(phi_mat, y, rcond=None)[0]
        resid = y - phi_mat @ coeffs
        resid_norms.append(float(np.linalg.norm(resid)))

    h_hat = np.column_stack(channel_cols) @ coeffs if channel_cols else np.zeros(
        dictionary.far_atoms.shape[0], dtype=complex)
    return OmpEstimate(h_hat=h_hat, far_indices=tuple(far_idx),
                       near_indices=tuple(near_idx), coeffs=coeffs,
                       residual_norms=np.array(resid_norms))
