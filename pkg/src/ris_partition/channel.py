"""Spatially correlated Rayleigh channel generation for the Tx-RIS-UE links.

Channels are drawn with unit transmit power (covariance beta * R); the
transmit power enters the SINR only through the sigma^2 / P_t noise term,
so power is injected at exactly one point of the pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

PSD_EIGENVALUE_FLOOR = -1e-10


class CorrelationModelError(ValueError):
    """Correlation matrix violates symmetry / PSD requirements."""


def dbm_to_watts(p_dbm: float) -> float:
    """Convert a power level in dBm to watts."""
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_watts: float) -> float:
    """Convert a power level in watts to dBm."""
    if p_watts <= 0:
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * np.log10(p_watts) + 30.0


def path_gain(distance: float, exponent: float, carrier_frequency: float) -> float:
    """Log-distance path gain: free-space constant times d^(-exponent).

    Uses beta = (c / (4 pi f_c))^2 * d^(-exponent), i.e. free-space gain at
    a 1 m reference distance extended with a configurable exponent.
    """
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    if exponent < 2:
        raise ValueError(f"path-loss exponent must be >= 2, got {exponent}")
    if carrier_frequency <= 0:
        raise ValueError(f"carrier frequency must be positive, got {carrier_frequency}")
    reference = (SPEED_OF_LIGHT / (4.0 * np.pi * carrier_frequency)) ** 2
    return reference * distance ** (-exponent)


@dataclass(frozen=True)
class RisGeometry:
    """Rectangular RIS element layout.

    spacing is the element pitch as a multiple of the carrier wavelength.
    """

    rows: int
    cols: int
    spacing: float = 0.25
    carrier_frequency: float = 1.8e9

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be >= 1")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.carrier_frequency <= 0:
            raise ValueError("carrier frequency must be positive")

    @property
    def n(self) -> int:
        return self.rows * self.cols

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency


def element_positions(geometry: RisGeometry) -> np.ndarray:
    """Element positions (meters) on a regular grid, row-major, first at origin.

    Returns an (N, 2) array; the element at grid cell (row, col) sits at
    (col * pitch, row * pitch) with pitch = spacing * wavelength.
    """
    pitch = geometry.spacing * geometry.wavelength
    rows = np.arange(geometry.rows)
    cols = np.arange(geometry.cols)
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    return np.column_stack([cc.ravel() * pitch, rr.ravel() * pitch])


@dataclass
class CorrelationMatrix:
    """Real symmetric spatial correlation matrix with unit diagonal."""

    entries: np.ndarray
    _factor: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise CorrelationModelError("correlation matrix must be square")
        if not np.allclose(self.entries, self.entries.T, atol=1e-12):
            raise CorrelationModelError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(self.entries), 1.0, atol=1e-12):
            raise CorrelationModelError("correlation matrix must have unit diagonal")
        if np.max(np.abs(self.entries)) > 1.0 + 1e-12:
            raise CorrelationModelError("correlation entries must lie in [-1, 1]")

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, n: int) -> "CorrelationMatrix":
        return cls(np.eye(n))

    def factor(self) -> np.ndarray:
        """Symmetric PSD square root of the matrix.

        Eigenvalues in [PSD_EIGENVALUE_FLOOR, 0) are clipped to zero; anything
        below the floor signals a geometry or convention bug and is an error.
        """
        if self._factor is None:
            eigvals, eigvecs = np.linalg.eigh(self.entries)
            if eigvals.min() < PSD_EIGENVALUE_FLOOR:
                raise CorrelationModelError(
                    f"correlation matrix is not PSD: min eigenvalue {eigvals.min():.3e}"
                )
            eigvals = np.clip(eigvals, 0.0, None)
            self._factor = (eigvecs * np.sqrt(eigvals)) @ eigvecs.T
        return self._factor


def correlation_matrix(positions: np.ndarray, wavelength: float) -> CorrelationMatrix:
    """Sinc spatial correlation: entry (w, w~) = sinc(2 ||u_w - u_w~|| / lambda).

    Normalized sinc convention, sinc(x) = sin(pi x) / (pi x), so correlation
    vanishes exactly at half-wavelength separation.
    """
    positions = np.asarray(positions, dtype=float)
    if positions.size == 0:
        raise ValueError("positions must be non-empty")
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    diffs = positions[:, None, :] - positions[None, :, :]
    dists = np.linalg.norm(diffs, axis=-1)
    return CorrelationMatrix(np.sinc(2.0 * dists / wavelength))


def sample_correlated(
    corr: CorrelationMatrix,
    variance: float,
    rng: np.random.Generator,
    trials: int | None = None,
) -> np.ndarray:
    """Draw circularly symmetric complex Gaussian vectors with covariance variance * R.

    Returns shape (n,) when trials is None, else (trials, n).  Uses the
    symmetric PSD square root of R applied to i.i.d. unit-variance CN samples.
    """
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    n = corr.n
    shape = (n,) if trials is None else (trials, n)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    if variance == 0:
        return np.zeros(shape, dtype=complex)
    factor = corr.factor()
    return np.sqrt(variance) * (z @ factor.T)


@dataclass(frozen=True)
class LinkBudget:
    """Transmit/noise powers and linear path gains of the three links.

    beta_v: RIS-UE1 link, beta_g: Tx-RIS link, beta_h: RIS-UE2 link.
    """

    transmit_power_dbm: float
    noise_power_dbm: float
    beta_v: float
    beta_g: float
    beta_h: float
    distances: tuple[float, float, float] = (300.0, 100.0, 100.0)
    path_loss_exponent: float = 2.2

    def __post_init__(self):
        for name in ("beta_v", "beta_g", "beta_h"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {value}")

    @classmethod
    def from_distances(
        cls,
        transmit_power_dbm: float,
        noise_power_dbm: float,
        d_tx_ris: float,
        d_ris_ue1: float,
        d_ris_ue2: float,
        path_loss_exponent: float = 2.2,
        carrier_frequency: float = 1.8e9,
    ) -> "LinkBudget":
        return cls(
            transmit_power_dbm=transmit_power_dbm,
            noise_power_dbm=noise_power_dbm,
            beta_v=path_gain(d_ris_ue1, path_loss_exponent, carrier_frequency),
            beta_g=path_gain(d_tx_ris, path_loss_exponent, carrier_frequency),
            beta_h=path_gain(d_ris_ue2, path_loss_exponent, carrier_frequency),
            distances=(d_tx_ris, d_ris_ue1, d_ris_ue2),
            path_loss_exponent=path_loss_exponent,
        )

    @property
    def transmit_power_watts(self) -> float:
        return dbm_to_watts(self.transmit_power_dbm)

    @property
    def noise_power_watts(self) -> float:
        return dbm_to_watts(self.noise_power_dbm)


@dataclass
class ChannelRealization:
    """One joint draw of the three per-element channel vectors."""

    v: np.ndarray  # RIS -> UE1
    g: np.ndarray  # Tx -> RIS
    h: np.ndarray  # RIS <-> UE2 (TDD-reciprocal)

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=complex)
        self.g = np.asarray(self.g, dtype=complex)
        self.h = np.asarray(self.h, dtype=complex)
        if not (self.v.shape == self.g.shape == self.h.shape):
            raise ValueError("v, g, h must share a common length")
        for name, vec in (("v", self.v), ("g", self.g), ("h", self.h)):
            if not np.all(np.isfinite(vec.view(float))):
                raise ValueError(f"channel vector {name} has non-finite entries")

    @property
    def n(self) -> int:
        return self.v.shape[-1]


def draw_realization(
    corr: CorrelationMatrix,
    budget: LinkBudget,
    rng: np.random.Generator,
) -> ChannelRealization:
    """Draw v, g, h jointly (independent links, common spatial correlation)."""
    return ChannelRealization(
        v=sample_correlated(corr, budget.beta_v, rng),
        g=sample_correlated(corr, budget.beta_g, rng),
        h=sample_correlated(corr, budget.beta_h, rng),
    )
