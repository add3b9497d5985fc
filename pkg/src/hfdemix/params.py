"""Gridless parameter recovery from the solved program blocks.

Angles come from Vandermonde decompositions of the two Toeplitz blocks
(matrix-pencil frequency retrieval plus nonnegative least squares for the
powers). Near-field ranges come from the recovered modulation waveforms:
the elementwise ratio of adjacent entries cancels the unknown complex
scale, and a least-squares fit of the unwrapped ratio phases against the
odd integers 1, 3, ..., 2N-3 yields the curvature parameter psi, hence
the range.

Sign bookkeeping: the lifting operator stores near-field atoms with
conjugated phase rows (see hfdemix.measurement), so frequencies read off
Toep(u_near) are the negatives of the physical phi values. extract_paths
undoes that; the far-field block needs no correction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .errors import DomainError
from .model import SystemConfig, phase_ramp
from .solver import toep
from .subspace import SubspaceBasis


def wrap_phi(phi):
    """Wrap a frequency to [-1/2, 1/2)."""
    return (np.asarray(phi) + 0.5) % 1.0 - 0.5


def wrap_phi_dist(a, b):
    """Wrap-around distance between frequencies."""
    d = np.abs(np.asarray(a) - np.asarray(b)) % 1.0
    return np.minimum(d, 1.0 - d)


def vandermonde_decompose(u, order_tol: float = 1e-2, order: int | None = None,
                          psd_tol: float = 1e-6):
    """Recover (frequency, power) pairs from a PSD Hermitian Toeplitz matrix.

    Model order is the number of eigenvalues above order_tol * lambda_max
    unless `order` is forced. A numerically full-rank flat spectrum has no
    identifiable discrete lines and returns an empty list. Frequencies come
    from the shift invariance of the signal subspace (matrix pencil);
    powers from a multiplicity-weighted nonnegative least-squares fit of
    the Toeplitz lags.
    """
    u = np.asarray(u, dtype=complex)
    n = u.size
    t_mat = toep(u)
    lam, vec = np.linalg.eigh(t_mat)
    lam_max = float(lam[-1])
    if lam[0] < -psd_tol * max(1.0, abs(lam_max)):
        raise DomainError(f"Toeplitz block is not PSD: lambda_min={lam[0]:.3e}")
    if lam_max <= 0.0:
        return []

    if order is None:
        k = int(np.sum(lam > order_tol * lam_max))
        if k == 0 or k >= n:
            return []
    else:
        k = int(order)
        if not 1 <= k <= n - 1:
            raise DomainError(f"forced order {k} not in [1, {n - 1}]")

    sig = vec[:, n - k:]
    pencil = np.linalg.lstsq(sig[:-1, :], sig[1:, :], rcond=None)[0]
    phis = np.sort(wrap_phi(np.angle(np.linalg.eigvals(pencil)) / (2.0 * np.pi)))

    # weighted lag fit: lag m appears N-m times (twice for m >= 1)
    weights = np.sqrt(np.concatenate(([float(n)], 2.0 * (n - np.arange(1, n)))))
    vand = np.exp(2j * np.pi * np.arange(n)[:, None] * phis[None, :])
    a_stack = np.vstack([np.real(vand) * weights[:, None],
                         np.imag(vand) * weights[:, None]])
    b_stack = np.concatenate([np.real(u) * weights, np.imag(u) * weights])
    powers = nnls(a_stack, b_stack)[0]
    return [(float(p), float(pw)) for p, pw in zip(phis, powers)]


def phi_to_theta(phi, cfg: SystemConfig) -> float:
    """arcsin(phi * wavelength / spacing); NaN if outside the arcsin domain."""
    s = phi * cfg.wavelength / cfg.spacing
    if np.abs(s) > 1.0:
        return float("nan")
    return float(np.arcsin(s))


def recover_modulations(x_mat, phis) -> np.ndarray:
    """Solve X = Z D^H for Z given the atom frequencies.

    Column k of the result estimates gain_k * z_k (known only up to that
    product). Duplicate frequencies make D rank deficient and raise.
    """
    x_mat = np.asarray(x_mat)
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    if phis.size == 0:
        raise DomainError("no frequencies given")
    if phis.size > 1:
        d = wrap_phi_dist(phis[:, None], phis[None, :])
        np.fill_diagonal(d, 1.0)
        if d.min() < 1e-9:
            raise DomainError("duplicate frequencies; Vandermonde matrix is singular")
    d_mat = np.column_stack([phase_ramp(p, x_mat.shape[1]) for p in phis])
    return x_mat @ np.linalg.pinv(d_mat.conj().T)


def fit_curvature(g) -> float:
    """Least-squares curvature psi of a quadratic-phase waveform.

    Works on c * curvature_ramp(psi) for any nonzero complex c: the
    shifted elementwise ratio g[1:]/g[:-1] has phases 2 pi psi (2n+1),
    which are unwrapped cumulatively and fit against [1, 3, ..., 2N-3].
    The fit carries an intercept because the solved program may trade a
    small linear phase ramp between the atom frequency and the modulation
    waveform; a through-origin fit would fold that ramp into the slope and
    bias the range. Returns NaN when the waveform has (near-)zero entries.
    """
    g = np.asarray(g)
    mags = np.abs(g)
    if mags.max() == 0.0 or mags.min() < 1e-9 * mags.max():
        return float("nan")
    ratio = g[1:] / g[:-1]
    phases = np.unwrap(np.angle(ratio))
    n0 = 2.0 * np.arange(g.size - 1) + 1.0
    design = np.column_stack([n0, np.ones_like(n0)])
    slope = float(np.linalg.lstsq(design, phases, rcond=None)[0][0])
    return slope / (2.0 * np.pi)


def estimate_range(z_col, basis: SubspaceBasis, theta_hat, cfg: SystemConfig) -> float:
    """Range estimate from one modulation coefficient column.

    Scale invariant by construction. Returns NaN (flagged invalid) when
    the fit degenerates: zero entries in B z, nonnegative curvature
    (far-field limit), or an invalid angle.
    """
    if not np.isfinite(theta_hat):
        return float("nan")
    psi = fit_curvature(basis.basis @ np.asarray(z_col))
    if not np.isfinite(psi) or psi >= 0.0:
        return float("nan")
    d = cfg.spacing
    return float(-(d**2) * np.cos(theta_hat) ** 2 / (2.0 * cfg.wavelength * psi))


# ---------------------------------------------------------------------------
# estimated path containers and the full extraction pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimatedPath:
    kind: str                 # 'far' | 'near'
    phi: float                # physical frequency in [-1/2, 1/2)
    power: float
    theta: float              # NaN when phi is outside the arcsin domain
    r: float = float("nan")   # near paths only; NaN flags an invalid fit


@dataclass(frozen=True)
class EstimatedPaths:
    far: tuple[EstimatedPath, ...]
    near: tuple[EstimatedPath, ...]

    @property
    def k_far(self) -> int:
        return len(self.far)

    @property
    def k_near(self) -> int:
        return len(self.near)


def extract_paths(x_mat, u_far, u_near, basis: SubspaceBasis, cfg: SystemConfig,
                  order_tol: float = 1e-2, k_far: int | None = None,
                  k_near: int | None = None) -> EstimatedPaths:
    """Angles and ranges from the solved blocks (see module docstring)."""
    far = []
    for phi, power in vandermonde_decompose(u_far, order_tol, order=k_far):
        far.append(EstimatedPath("far", phi, power, phi_to_theta(phi, cfg)))

    near = []
    lines = vandermonde_decompose(u_near, order_tol, order=k_near)
    if lines:
        internal_phis = [p for p, _ in lines]
        z_cols = recover_modulations(x_mat, internal_phis)
        for k, (phi_int, power) in enumerate(lines):
            phi = float(wrap_phi(-phi_int))       # undo the atom conjugation
            theta = phi_to_theta(phi, cfg)
            r = estimate_range(z_cols[:, k], basis, theta, cfg)
            near.append(EstimatedPath("near", phi, power, theta, r))
    return EstimatedPaths(far=tuple(far), near=tuple(near))


# ---------------------------------------------------------------------------
# evaluation bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathMatching:
    """Greedy nearest-frequency assignment between estimates and truth."""

    pairs: tuple            # (truth_index, est_index, phi_error)
    misses: tuple           # truth indices with no estimate
    false_alarms: tuple     # estimate indices with no truth


def match_paths(est_phis, true_phis) -> PathMatching:
    est = np.atleast_1d(np.asarray(est_phis, dtype=float))
    tru = np.atleast_1d(np.asarray(true_phis, dtype=float))
    if est.size == 0 or tru.size == 0:
        return PathMatching(pairs=(), misses=tuple(range(tru.size)),
                            false_alarms=tuple(range(est.size)))
    dist = wrap_phi_dist(tru[:, None], est[None, :])
    pairs = []
    used_t, used_e = set(), set()
    for _ in range(min(tru.size, est.size)):
        masked = dist.copy()
        masked[list(used_t), :] = np.inf
        masked[:, list(used_e)] = np.inf
        i, j = np.unravel_index(np.argmin(masked), masked.shape)
        pairs.append((int(i), int(j), float(dist[i, j])))
        used_t.add(int(i))
        used_e.add(int(j))
    misses = tuple(i for i in range(tru.size) if i not in used_t)
    false_alarms = tuple(j for j in range(est.size) if j not in used_e)
    return PathMatching(pairs=tuple(pairs), misses=misses, false_alarms=false_alarms)
