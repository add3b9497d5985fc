"""Low-rank subspace for the near-field quadratic-phase modulations.

The curvature waveforms curvature_ramp(psi) for psi in [psi_min, 0] live,
to good accuracy, in a low-dimensional subspace. We build a dense
dictionary of waveforms on a fine psi grid and keep the top-L left
singular vectors as the orthonormal basis B used by the demixing program.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError
from .model import SystemConfig, curvature_ramp


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal N x L basis plus provenance of its construction."""

    basis: np.ndarray               # complex, N x L, B^H B = I
    psi_grid: np.ndarray            # grid the dictionary was built on
    singular_values: np.ndarray     # full spectrum of the dictionary

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def energy_capture(self) -> float:
        """Fraction of the dictionary's squared singular mass kept by the basis."""
        s2 = self.singular_values**2
        return float(s2[: self.rank].sum() / s2.sum())

    def grid_hash(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.psi_grid).tobytes()).hexdigest()


def default_psi_grid(cfg: SystemConfig, r_min: float = 10.0, grid_size: int = 4096):
    """Uniform grid on [psi_min, 0] with psi_min = -d^2 / (2 wavelength r_min).

    cos^2(theta) <= 1, so this covers every curvature reachable at ranges
    of r_min and beyond.
    """
    if r_min <= 0:
        raise ConfigurationError("r_min must be positive")
    psi_min = -cfg.spacing**2 / (2.0 * cfg.wavelength * r_min)
    return np.linspace(psi_min, 0.0, grid_size)


def build_dictionary(psi_grid, n):
    """N x M matrix whose column m is curvature_ramp(psi_grid[m], n)."""
    psi_grid = np.asarray(psi_grid, dtype=float)
    if psi_grid.size == 0:
        raise ConfigurationError("psi grid is empty")
    if np.any(psi_grid > 0):
        raise ConfigurationError("psi grid values must be <= 0")
    idx2 = np.arange(n)[:, None] ** 2
    return np.exp(2j * np.pi * idx2 * psi_grid[None, :])


def build_subspace(dictionary, rank) -> SubspaceBasis:
    """Top-`rank` left singular vectors of the dictionary, sign-normalized.

    The phase of each basis column is fixed so the first nonzero entry of
    the matching right singular vector is real-positive; the basis is then
    reproducible across BLAS/LAPACK builds.
    """
    n, m = dictionary.shape
    if not 1 <= rank <= min(n, m):
        raise ConfigurationError(f"rank {rank} not in [1, {min(n, m)}]")
    u, s, vh = np.linalg.svd(dictionary, full_matrices=False)
    for k in range(rank):
        row = vh[k]
        nz = np.flatnonzero(np.abs(row) > 1e-12 * np.abs(row).max())
        if nz.size:
            ph = row[nz[0]] / np.abs(row[nz[0]])
            u[:, k] *= ph
    # psi grid is recovered from the dictionary's quadratic phases when the
    # caller built it via build_dictionary; store what we can infer cheaply.
    psi_grid = np.angle(dictionary[1, :]) / (2.0 * np.pi) if n > 1 else np.zeros(m)
    return SubspaceBasis(basis=u[:, :rank], psi_grid=np.asarray(psi_grid),
                         singular_values=s)


def build_default_subspace(cfg: SystemConfig, rank: int = 10, r_min: float = 10.0,
                           grid_size: int = 4096) -> SubspaceBasis:
    """Dictionary-plus-SVD construction on the default psi grid."""
    grid = default_psi_grid(cfg, r_min=r_min, grid_size=grid_size)
    basis = build_subspace(build_dictionary(grid, cfg.n), rank)
    return SubspaceBasis(basis=basis.basis, psi_grid=grid,
                         singular_values=basis.singular_values)


def subspace_residual(basis: SubspaceBasis, psi) -> float:
    """Relative energy of curvature_ramp(psi) outside the basis.

    Returns ||g - B B^H g||_2 / sqrt(N); the waveform itself has norm
    sqrt(N), so this is the relative modeling error.
    """
    g = curvature_ramp(psi, basis.n)
    coeff = basis.basis.conj().T @ g
    resid = g - basis.basis @ coeff
    return float(np.linalg.norm(resid) / np.sqrt(basis.n))


# ---------------------------------------------------------------------------
# binary cache (little-endian dump + JSON sidecar)
# ---------------------------------------------------------------------------

def save_basis(basis: SubspaceBasis, path):
    """Write `<path>.bin` (row-major little-endian complex128) and `<path>.json`."""
    path = Path(path)
    data = np.ascontiguousarray(basis.basis).astype("<c16")
    path.with_suffix(".bin").write_bytes(data.tobytes())
    meta = {
        "n": basis.n,
        "rank": basis.rank,
        "dtype": "<c16",
        "order": "C",
        "grid_hash": basis.grid_hash(),
        "psi_grid_min": float(basis.psi_grid.min()),
        "psi_grid_size": int(basis.psi_grid.size),
        "singular_values": basis.singular_values.tolist(),
    }
    path.with_suffix(".json").write_text(json.dumps(meta, indent=1))


def load_basis(path, expected_key=None) -> SubspaceBasis:
    """Load a cached basis; expected_key=(n, grid_hash, rank) is verified if given."""
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    if expected_key is not None:
        key = (meta["n"], meta["grid_hash"], meta["rank"])
        if tuple(expected_key) != key:
            raise ConfigurationError(f"cache key mismatch: {key} != {tuple(expected_key)}")
    raw = np.frombuffer(path.with_suffix(".bin").read_bytes(), dtype="<c16")
    basis = raw.reshape(meta["n"], meta["rank"]).astype(complex)
    grid = np.linspace(meta["psi_grid_min"], 0.0, meta["psi_grid_size"])
    loaded = SubspaceBasis(basis=basis, psi_grid=grid,
                           singular_values=np.asarray(meta["singular_values"]))
    if expected_key is not None and loaded.grid_hash() != meta["grid_hash"]:
        raise ConfigurationError("psi grid could not be reconstructed from sidecar")
    return loaded


def basis_or_cache(cfg: SystemConfig, rank, r_min, grid_size, cache_dir=None):
    """Build the default basis, round-tripping through a directory cache if given."""
    if cache_dir is None:
        return build_default_subspace(cfg, rank=rank, r_min=r_min, grid_size=grid_size)
    grid = default_psi_grid(cfg, r_min=r_min, grid_size=grid_size)
    ghash = hashlib.sha256(np.ascontiguousarray(grid).tobytes()).hexdigest()
    stem = Path(cache_dir) / f"basis_n{cfg.n}_L{rank}_{ghash[:16]}"
    if stem.with_suffix(".json").exists():
        try:
            return load_basis(stem, expected_key=(cfg.n, ghash, rank))
        except (ConfigurationError, DomainError, OSError, KeyError):
            pass
    basis = build_default_subspace(cfg, rank=rank, r_min=r_min, grid_size=grid_size)
    Path(cache_dir).mkdir(parents=True, exist_ok=True)
    save_basis(basis, stem)
    return basis
