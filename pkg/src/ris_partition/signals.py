"""Received-signal synthesis: RIS phase configuration, aggregate terms, SINR.

BF-set elements are co-phased against the cascaded v*g channel; ID-set
elements replay the binary (0/pi) reflection pattern and apply no
beamforming.  The connected user's probe x is unmodulated (x = 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ris_partition.partition import Partition

TWO_PI = 2.0 * np.pi


def _check_binary_phases(phi: np.ndarray):
    if phi.size and not np.all((phi == 0.0) | (phi == np.pi)):
        raise ValueError("identification phases must be 0 or pi")


@dataclass
class PhaseConfig:
    """Phase shifts per partition: theta over bf_set, phi over id_set.

    theta[k] applies to element partition.bf_set[k]; phi[k] to
    partition.id_set[k].
    """

    partition: Partition
    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if self.theta.size != self.partition.bf_set.size:
            raise ValueError("theta length must match bf_set size")
        if self.phi.size != self.partition.id_set.size:
            raise ValueError("phi length must match id_set size")
        if self.theta.size and not np.all((self.theta >= 0) & (self.theta < TWO_PI)):
            raise ValueError("theta entries must lie in [0, 2*pi)")
        _check_binary_phases(self.phi)


@dataclass
class PsrpPattern:
    """Binary reflection pattern: M symbol slots by N' ID-set elements.

    The default construction broadcasts one +-1 signature across all ID
    elements per symbol, which is what makes the surface identifiable by a
    UE that knows the signature.
    """

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.ndim != 2:
            raise ValueError("pattern matrix must be 2-D (symbols x elements)")
        _check_binary_phases(self.matrix)

    @property
    def n_symbols(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_elements(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def broadcast(cls, n_symbols: int, n_elements: int, pattern_seed: int = 0) -> "PsrpPattern":
        """Deterministic surface-wide +-1 signature from a pattern seed."""
        rng = np.random.default_rng(pattern_seed)
        signs = rng.integers(0, 2, size=n_symbols)  # 0 -> phase 0, 1 -> phase pi
        return cls(np.pi * np.repeat(signs[:, None], n_elements, axis=1))

    def signature(self) -> np.ndarray:
        """Per-symbol +-1 signature (first element's column as reference)."""
        return np.cos(self.matrix[:, 0]) if self.n_elements else np.ones(self.n_symbols)


def psrp_row(pattern: PsrpPattern, m: int) -> np.ndarray:
    """Phase vector of the m-th symbol slot."""
    if not 0 <= m < pattern.n_symbols:
        raise IndexError(f"symbol index {m} out of range [0, {pattern.n_symbols})")
    return pattern.matrix[m]


def bf_cophase(v: np.ndarray, g: np.ndarray, bf_set: np.ndarray) -> np.ndarray:
    """Co-phasing angles theta_i = (-arg(v_i g_i)) mod 2*pi over the BF set.

    Makes every BF term v_i e^{j theta_i} g_i real nonnegative, so the BF
    aggregate equals sum |v_i| |g_i|.
    """
    v = np.asarray(v)
    g = np.asarray(g)
    bf_set = np.asarray(bf_set, dtype=np.intp)
    if bf_set.size and bf_set.max() >= v.size:
        raise ValueError("bf_set index out of range for channel length")
    theta = np.mod(-np.angle(v[bf_set] * g[bf_set]), TWO_PI)
    # -arg of a positive real is -0.0; mod can return 2*pi - eps for tiny
    # negative angles, fold exact 2*pi back to 0
    theta[theta >= TWO_PI] = 0.0
    return theta


def received_identification(
    f: np.ndarray, phases: np.ndarray, noise_sample: complex = 0.0
) -> complex:
    """Identification-phase received sample: sum_i f_i^2 e^{j phi_i} + n."""
    f = np.asarray(f)
    phases = np.asarray(phases, dtype=float)
    if f.shape != phases.shape:
        raise ValueError(f"length mismatch: {f.shape} vs {phases.shape}")
    return complex(np.sum(f * f * np.exp(1j * phases)) + noise_sample)


@dataclass
class AggregateTerms:
    """The four cascaded sums at UE1 and their A/B grouping."""

    v_bf: complex  # sum over BF of v e^{j theta} g
    v_id: complex  # sum over ID of v e^{j phi} g
    h_bf: complex  # sum over BF of h e^{j theta} g
    h_id: complex  # sum over ID of h e^{j phi} g

    @property
    def a(self) -> complex:
        return self.v_bf

    @property
    def b(self) -> complex:
        return self.v_id + self.h_bf + self.h_id


def aggregate_terms_ue1(
    v: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    partition: Partition,
    phases: PhaseConfig,
) -> AggregateTerms:
    """The four per-set cascaded sums feeding the UE1 SINR."""
    v = np.asarray(v)
    g = np.asarray(g)
    h = np.asarray(h)
    if not (v.size == g.size == h.size == partition.n):
        raise ValueError("channel lengths must equal partition size")
    bf, ident = partition.bf_set, partition.id_set
    e_theta = np.exp(1j * phases.theta)
    e_phi = np.exp(1j * phases.phi)
    return AggregateTerms(
        v_bf=complex(np.sum(v[bf] * e_theta * g[bf])),
        v_id=complex(np.sum(v[ident] * e_phi * g[ident])),
        h_bf=complex(np.sum(h[bf] * e_theta * g[bf])),
        h_id=complex(np.sum(h[ident] * e_phi * g[ident])),
    )


@dataclass
class Ue2Signal:
    """Hybrid-phase received sample at UE2 with its term decomposition."""

    total: complex
    signal_id: complex
    signal_bf: complex
    interference_id: complex
    interference_bf: complex
    noise: complex


def received_ue2(
    x: complex,
    q: complex,
    h: np.ndarray,
    v: np.ndarray,
    partition: Partition,
    phases: PhaseConfig,
    noise_sample: complex = 0.0,
) -> Ue2Signal:
    """Hybrid-phase sample at UE2: probe reflections plus Tx interference."""
    h = np.asarray(h)
    v = np.asarray(v)
    if not (h.size == v.size == partition.n):
        raise ValueError("channel lengths must equal partition size")
    bf, ident = partition.bf_set, partition.id_set
    e_theta = np.exp(1j * phases.theta)
    e_phi = np.exp(1j * phases.phi)
    signal_id = complex(x * np.sum(h[ident] ** 2 * e_phi))
    signal_bf = complex(x * np.sum(h[bf] ** 2 * e_theta))
    interference_id = complex(q * np.sum(v[ident] * e_phi * h[ident]))
    interference_bf = complex(q * np.sum(v[bf] * e_theta * h[bf]))
    total = signal_id + signal_bf + interference_id + interference_bf + noise_sample
    return Ue2Signal(
        total=total,
        signal_id=signal_id,
        signal_bf=signal_bf,
        interference_id=interference_id,
        interference_bf=interference_bf,
        noise=complex(noise_sample),
    )


def sinr_ue1(terms: AggregateTerms, noise_power: float, transmit_power: float) -> float:
    """SINR at the beamforming user: |A|^2 / (|B|^2 + sigma^2 / P_t)."""
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    if transmit_power <= 0:
        raise ValueError("transmit power must be positive")
    a2 = abs(terms.a) ** 2
    b2 = abs(terms.b) ** 2
    return a2 / (b2 + noise_power / transmit_power)
