"""Array geometry, steering vectors and random hybrid-channel generation.

All antenna indexing is 0-based: antenna n sits at (0, n*d) on the y axis,
so the reference antenna is n = 0. Angles are measured from the array
boresight (x axis), theta in (-pi/2, pi/2). Two normalized parameters are
used throughout:

    phi = (d / wavelength) * sin(theta)          (cycles per antenna)
    psi = -d^2 cos(theta)^2 / (2 wavelength r)   (cycles, quadratic term)

With half-wavelength spacing phi lives in [-1/2, 1/2) and psi <= 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class SystemConfig:
    """Uplink array / pilot configuration with derived geometry.

    Attributes
    ----------
    n : int
        Number of BS antennas (ULA).
    n_rf : int
        Number of RF chains (rows of each per-slot combiner).
    pilot_len : int
        Number of pilot slots P; total measurements M = n_rf * pilot_len.
    carrier_freq : float
        Carrier frequency in Hz.
    """

    n: int
    n_rf: int
    pilot_len: int
    carrier_freq: float

    def __post_init__(self):
        if self.n < 2:
            raise ConfigurationError(f"need at least 2 antennas, got {self.n}")
        if self.n_rf < 1 or self.pilot_len < 1:
            raise ConfigurationError("n_rf and pilot_len must be >= 1")
        if self.carrier_freq <= 0:
            raise ConfigurationError("carrier_freq must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def spacing(self) -> float:
        """Antenna spacing, fixed to half a wavelength."""
        return self.wavelength / 2.0

    @property
    def num_measurements(self) -> int:
        return self.n_rf * self.pilot_len

    @property
    def rayleigh_dist(self) -> float:
        """2 D^2 / wavelength with aperture D = (n-1)*spacing.

        The common alternative uses D = n*spacing; see
        :attr:`rayleigh_dist_full_aperture`. For n = 256 at 30 GHz the two
        evaluate to ~324.9 m and ~327.5 m.
        """
        aperture = (self.n - 1) * self.spacing
        return 2.0 * aperture**2 / self.wavelength

    @property
    def rayleigh_dist_full_aperture(self) -> float:
        """2 (n*spacing)^2 / wavelength, the D = n*d convention."""
        aperture = self.n * self.spacing
        return 2.0 * aperture**2 / self.wavelength

    @staticmethod
    def full_sampling(n, n_rf, carrier_freq, downsample=1):
        """Config whose measurement count is n / downsample.

        downsample=1 gives M = n ("no downsampling"); downsample=2 halves
        the pilot length so M = n/2.
        """
        if n % (downsample * n_rf) != 0:
            raise ConfigurationError(
                f"n={n} not divisible by downsample*n_rf={downsample * n_rf}"
            )
        return SystemConfig(n=n, n_rf=n_rf, pilot_len=n // (downsample * n_rf),
                            carrier_freq=carrier_freq)


# ---------------------------------------------------------------------------
# parameter transforms
# ---------------------------------------------------------------------------

def phi_from_theta(theta, cfg: SystemConfig):
    """Normalized spatial frequency phi = (d/wavelength) sin(theta)."""
    return cfg.spacing / cfg.wavelength * np.sin(theta)


def psi_from_theta_range(theta, r, cfg: SystemConfig):
    """Quadratic-phase parameter psi = -d^2 cos^2(theta) / (2 wavelength r)."""
    if np.any(np.asarray(r) <= 0):
        raise DomainError("range must be positive")
    d = cfg.spacing
    return -(d**2) * np.cos(theta) ** 2 / (2.0 * cfg.wavelength * r)


def theta_from_phi(phi, cfg: SystemConfig):
    """Inverse of :func:`phi_from_theta`; raises outside the arcsin domain."""
    s = phi * cfg.wavelength / cfg.spacing
    if np.any(np.abs(s) > 1.0):
        raise DomainError(f"phi={phi} maps outside |sin(theta)| <= 1")
    return np.arcsin(s)


def range_from_psi(theta, psi, cfg: SystemConfig):
    """Invert psi back to a range for a given angle. psi must be < 0."""
    if np.any(np.asarray(psi) >= 0):
        raise DomainError("psi must be negative for a finite range")
    d = cfg.spacing
    return -(d**2) * np.cos(theta) ** 2 / (2.0 * cfg.wavelength * psi)


# ---------------------------------------------------------------------------
# steering vectors
# ---------------------------------------------------------------------------

def phase_ramp(phi, n):
    """Unit-modulus vector [exp(j 2 pi k phi)]_{k=0..n-1} (far-field atom)."""
    return np.exp(2j * np.pi * phi * np.arange(n))


def curvature_ramp(psi, n):
    """Unit-modulus vector [exp(j 2 pi k^2 psi)]_{k=0..n-1} (near-field modulation)."""
    return np.exp(2j * np.pi * psi * np.arange(n) ** 2)


def far_steering(theta, cfg: SystemConfig):
    """Plane-wave array response; entry n is exp(j 2pi/wavelength * d n sin theta)."""
    if not -np.pi / 2 < theta < np.pi / 2:
        raise DomainError(f"theta={theta} outside (-pi/2, pi/2)")
    return phase_ramp(phi_from_theta(theta, cfg), cfg.n)


def element_range(theta, r, n, cfg: SystemConfig):
    """Exact distance from a scatterer at polar (r, theta) to antenna n (0-based)."""
    if r <= 0:
        raise DomainError(f"range must be positive, got {r}")
    y = n * cfg.spacing
    return np.sqrt(r**2 + y**2 - 2.0 * r * y * np.sin(theta))


def near_steering_exact(theta, r, cfg: SystemConfig):
    """Spherical-wave array response, entry n = exp(-j 2pi/wl (r_n - r)).

    The reference antenna n = 0 always gets phase 0. Converges to
    :func:`far_steering` (same sign convention) as r grows.
    """
    if r <= 0:
        raise DomainError(f"range must be positive, got {r}")
    y = np.arange(cfg.n) * cfg.spacing
    dist = np.sqrt(r**2 + y**2 - 2.0 * r * y * np.sin(theta))
    return np.exp(-2j * np.pi / cfg.wavelength * (dist - r))


def near_steering_approx(theta, r, cfg: SystemConfig):
    """Second-order (Fresnel) approximation of :func:`near_steering_exact`.

    Equals phase_ramp(phi) * curvature_ramp(psi) elementwise, with
    phi, psi from the transforms above.
    """
    phi = phi_from_theta(theta, cfg)
    psi = psi_from_theta_range(theta, r, cfg)
    return phase_ramp(phi, cfg.n) * curvature_ramp(psi, cfg.n)


# ---------------------------------------------------------------------------
# random hybrid channels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathParams:
    """One propagation path: kind is 'far' or 'near' (near carries a range)."""

    kind: str
    gain: complex
    theta: float
    r: float | None = None

    def phi(self, cfg: SystemConfig) -> float:
        return float(phi_from_theta(self.theta, cfg))

    def psi(self, cfg: SystemConfig) -> float:
        if self.kind != "near":
            raise DomainError("psi is defined for near-field paths only")
        return float(psi_from_theta_range(self.theta, self.r, cfg))

    def steering(self, cfg: SystemConfig) -> np.ndarray:
        if self.kind == "far":
            return far_steering(self.theta, cfg)
        return near_steering_exact(self.theta, self.r, cfg)


@dataclass(frozen=True)
class HybridChannel:
    """Channel vector h plus the ground-truth paths that generated it."""

    h: np.ndarray
    paths: tuple[PathParams, ...]

    @property
    def k_far(self) -> int:
        return sum(1 for p in self.paths if p.kind == "far")

    @property
    def k_near(self) -> int:
        return sum(1 for p in self.paths if p.kind == "near")

    @property
    def k(self) -> int:
        return len(self.paths)


@dataclass(frozen=True)
class ChannelSampling:
    """How random path parameters are drawn.

    Angles are uniform on theta_range with a minimum wrap-around phi
    separation enforced across all paths (far and near together); near-field
    ranges are uniform on r_range. min_phi_sep=None means 1/n.
    """

    theta_range: tuple[float, float] = (-np.pi / 3, np.pi / 3)
    r_range: tuple[float, float] = (10.0, 80.0)
    min_phi_sep: float | None = None

    def resolved_sep(self, cfg: SystemConfig) -> float:
        return 1.0 / cfg.n if self.min_phi_sep is None else self.min_phi_sep


def _wrap_dist(a, b):
    """Wrap-around distance on the unit phi circle."""
    d = np.abs(a - b) % 1.0
    return np.minimum(d, 1.0 - d)


def assemble_channel(paths, cfg: SystemConfig) -> HybridChannel:
    """Sum sqrt(N/K) * gain * steering over the path list (exact near-field)."""
    if not paths:
        raise ConfigurationError("need at least one path")
    k = len(paths)
    h = np.zeros(cfg.n, dtype=complex)
    for p in paths:
        h += p.gain * p.steering(cfg)
    h *= np.sqrt(cfg.n / k)
    return HybridChannel(h=h, paths=tuple(paths))


def sample_hybrid_channel(k_far, k_near, cfg: SystemConfig, rng,
                          sampling: ChannelSampling | None = None) -> HybridChannel:
    """Draw a random hybrid channel with CN(0,1) gains.

    Angles are redrawn (rejection sampling) until all pairwise phi
    separations clear the configured minimum; an infeasible request
    raises ConfigurationError.
    """
    if k_far + k_near < 1:
        raise ConfigurationError("k_far + k_near must be >= 1")
    sampling = sampling or ChannelSampling()
    k = k_far + k_near
    sep = sampling.resolved_sep(cfg)

    lo, hi = sampling.theta_range
    phi_lo = float(phi_from_theta(lo, cfg))
    phi_hi = float(phi_from_theta(hi, cfg))
    if (phi_hi - phi_lo) < (k - 1) * sep:
        raise ConfigurationError(
            f"cannot place {k} paths with phi separation {sep:.4g} "
            f"inside a phi interval of length {phi_hi - phi_lo:.4g}"
        )

    for _ in range(5000):
        thetas = rng.uniform(lo, hi, size=k)
        phis = phi_from_theta(thetas, cfg)
        diffs = _wrap_dist(phis[:, None], phis[None, :])
        np.fill_diagonal(diffs, 1.0)
        if diffs.min() >= sep:
            break
    else:
        raise ConfigurationError(
            f"could not sample {k} paths at separation {sep:.4g} "
            f"in theta range {sampling.theta_range}"
        )

    gains = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / np.sqrt(2.0)
    paths = []
    for i in range(k):
        if i < k_far:
            paths.append(PathParams("far", complex(gains[i]), float(thetas[i])))
        else:
            r = float(rng.uniform(*sampling.r_range))
            paths.append(PathParams("near", complex(gains[i]), float(thetas[i]), r))
    return assemble_channel(paths, cfg)
