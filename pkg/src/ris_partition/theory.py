"""Analytical outage probability via characteristic-function inversion.

The beamformed aggregate A is modeled as a real Gaussian (co-phasing makes
it a sum of nonnegative products of Rayleigh magnitudes), so |A|^2 is a
scaled non-central chi-square with one degree of freedom.  The interference
aggregate B is circularly symmetric complex Gaussian; Moments.var_b stores
its TOTAL complex variance E|B|^2, and the chi-square factor of the
characteristic function uses the per-quadrature variance var_b / 2.  The
decision variable is Y = |A|^2 - r |B|^2 and the outage probability is its
CDF at r * sigma^2 / P_t.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import erf

MIN_SORTED_TRIALS = 10_000


class InversionError(RuntimeError):
    """Quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class Moments:
    """Gaussian moments of the aggregates A (real) and B (complex, zero mean)."""

    mu_a: float
    var_a: float
    var_b: float

    def __post_init__(self):
        if self.mu_a < 0:
            raise ValueError("mu_a must be nonnegative")
        if self.var_a < 0 or self.var_b < 0:
            raise ValueError("variances must be nonnegative")


@dataclass(frozen=True)
class InversionSettings:
    """Gil-Pelaez quadrature controls.

    truncation is the upper integration limit in the scale-normalized
    frequency variable; None selects it automatically so that
    |Psi(Omega)| / Omega < tolerance / 10.
    """

    truncation: float | None = None
    tolerance: float = 1e-6

    def __post_init__(self):
        if self.truncation is not None and self.truncation <= 0:
            raise ValueError("truncation must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


def moments_unsorted(
    n: int, n_id: int, sigma_v2: float, sigma_g2: float, sigma_h2: float
) -> Moments:
    """Closed-form moments for a uniformly random element allocation.

    sigma_*2 are the per-element complex channel variances, so a channel
    magnitude has mean sigma * sqrt(pi / 4) and second moment sigma^2.
    """
    if not 0 <= n_id <= n:
        raise ValueError(f"n_id must lie in [0, {n}], got {n_id}")
    if min(sigma_v2, sigma_g2, sigma_h2) < 0:
        raise ValueError("channel variances must be nonnegative")
    n_bf = n - n_id
    sig_vg = np.sqrt(sigma_v2 * sigma_g2)
    mu_a = n_bf * sig_vg * np.pi / 4.0
    var_a = n_bf * sigma_v2 * sigma_g2 * (1.0 - np.pi**2 / 16.0)
    var_b = (
        n_id * sigma_v2 * sigma_g2
        + n_bf * sigma_h2 * sigma_g2
        + n_id * sigma_h2 * sigma_g2
    )
    return Moments(mu_a=mu_a, var_a=var_a, var_b=var_b)


@lru_cache(maxsize=64)
def _sorted_order_statistics(
    n: int, n_id: int, trials: int, seed: int
) -> tuple[float, float, float, float, float]:
    """Order-statistic moments of unit-variance product magnitudes.

    Draws |v||g| for unit-variance channels, sorts each row descending, and
    returns (E[X_top], E[X_top^2], E[X_bot^2], E[|g|^2 top], E[|g|^2 bot])
    where "top" is the n - n_id largest products.  Scale-invariant: actual
    channel variances multiply back in afterwards.
    """
    rng = np.random.default_rng(seed)
    n_bf = n - n_id
    top_x = top_x2 = bot_x2 = g2_top = g2_bot = 0.0
    count = 0
    chunk = max(1, min(trials, 200_000 // max(n, 1)))
    remaining = trials
    while remaining > 0:
        k = min(chunk, remaining)
        # Rayleigh magnitudes of unit-variance complex Gaussians
        av = rng.rayleigh(scale=np.sqrt(0.5), size=(k, n))
        ag = rng.rayleigh(scale=np.sqrt(0.5), size=(k, n))
        x = av * ag
        order = np.argsort(-x, axis=1, kind="stable")
        x_sorted = np.take_along_axis(x, order, axis=1)
        g_sorted = np.take_along_axis(ag, order, axis=1)
        if n_bf:
            top_x += float(np.sum(x_sorted[:, :n_bf])) / n_bf
            top_x2 += float(np.sum(x_sorted[:, :n_bf] ** 2)) / n_bf
            g2_top += float(np.sum(g_sorted[:, :n_bf] ** 2)) / n_bf
        if n_id:
            bot_x2 += float(np.sum(x_sorted[:, n_bf:] ** 2)) / n_id
            g2_bot += float(np.sum(g_sorted[:, n_bf:] ** 2)) / n_id
        count += k
        remaining -= k
    return (top_x / count, top_x2 / count, bot_x2 / count, g2_top / count, g2_bot / count)


def moments_sorted(
    n: int,
    n_id: int,
    sigma_v2: float,
    sigma_g2: float,
    sigma_h2: float,
    trials: int = 100_000,
    seed: int = 0,
) -> Moments:
    """Moments under gain-sorted allocation, via empirical order statistics.

    The per-set effective deviations have no closed form; they are estimated
    by Monte-Carlo over sorted product magnitudes and plugged into the same
    structural formulas as the unsorted case.  Deterministic for a fixed seed
    and cached per (n, n_id, trials, seed); results scale exactly with the
    channel variances.
    """
    if not 0 <= n_id <= n:
        raise ValueError(f"n_id must lie in [0, {n}], got {n_id}")
    if trials < MIN_SORTED_TRIALS:
        raise ValueError(f"trials must be >= {MIN_SORTED_TRIALS} for a stable estimate")
    n_bf = n - n_id
    ex_top, ex2_top, ex2_bot, g2_top, g2_bot = _sorted_order_statistics(n, n_id, trials, seed)
    scale_vg = np.sqrt(sigma_v2 * sigma_g2)
    mu_a = n_bf * ex_top * scale_vg
    var_a = n_bf * max(ex2_top - ex_top**2, 0.0) * sigma_v2 * sigma_g2
    var_b = (
        n_id * ex2_bot * sigma_v2 * sigma_g2
        + n_bf * sigma_h2 * g2_top * sigma_g2
        + n_id * sigma_h2 * g2_bot * sigma_g2
    )
    return Moments(mu_a=mu_a, var_a=var_a, var_b=var_b)


def char_fn(omega, moments: Moments, r: float):
    """Characteristic function of Y = |A|^2 - r |B|^2 at real frequency omega.

    Non-central chi-square (1 dof) factor for |A|^2, central chi-square
    (2 dof) factor for |B|^2 with per-quadrature variance var_b / 2;
    principal branch of the square root.
    """
    if r <= 0:
        raise ValueError("threshold r must be positive")
    omega = np.asarray(omega, dtype=float)
    denom_a = 1.0 - 2j * omega * moments.var_a
    result = (
        np.exp(1j * omega * moments.mu_a**2 / denom_a)
        / (np.sqrt(denom_a) * (1.0 + 1j * omega * r * moments.var_b))
    )
    return result if result.shape else complex(result)


def _char_fn_envelope(omega: float, moments: Moments, r: float) -> float:
    """Upper bound on |Psi(omega)| used for truncation selection."""
    mag_a = (1.0 + 4.0 * omega**2 * moments.var_a**2) ** -0.25
    mag_b = (1.0 + omega**2 * (r * moments.var_b) ** 2) ** -0.5
    return mag_a * mag_b


def _auto_truncation(moments: Moments, r: float, tolerance: float) -> float:
    omega = 1.0
    for _ in range(120):
        if _char_fn_envelope(omega, moments, r) / omega < tolerance / 10.0:
            return omega
        omega *= 2.0
    raise InversionError("could not find a truncation point; moments may be degenerate")


def _gil_pelaez_integral(cf, y: float, upper: float, tolerance: float, mean: float) -> tuple[float, float]:
    """Evaluate integral of Im(e^{-j w y} Psi(w)) / w over (0, inf).

    cf maps a frequency array to complex CF values.  The finite omega -> 0
    limit of the integrand is mean - y.  For oscillatory y the integral is
    split into Fourier sine/cosine pieces handled by weighted quadrature,
    with the 1/omega singularity of the sine piece removed analytically
    against a Gaussian envelope.
    """
    abs_y = abs(y)
    quad_kwargs = dict(epsabs=tolerance / 10.0, epsrel=0.0, limit=400)

    if abs_y * upper < 30.0:
        # mild oscillation: direct adaptive quadrature on (0, upper]
        def integrand(w):
            if w == 0.0:
                return mean - y
            return float(np.imag(np.exp(-1j * w * y) * cf(w)) / w)

        value, err = integrate.quad(integrand, 0.0, upper, limit=2000,
                                    epsabs=tolerance / 10.0, epsrel=0.0)
        return value, err

    # Fourier split: Im(e^{-jwy} Psi) = Im(Psi) cos(wy) - Re(Psi) sin(wy)
    def im_part(w):
        if w == 0.0:
            return mean
        return float(np.imag(cf(w)) / w)

    cos_val, cos_err = integrate.quad(im_part, 0.0, np.inf,
                                      weight="cos", wvar=abs_y, **quad_kwargs)

    # subtract a Gaussian with matching small-omega curvature to remove the
    # 1/omega singularity; its sine transform has a closed form
    s = max(1e-300, 0.25 * (mean**2 + 1.0))

    def re_part_regular(w):
        if w == 0.0:
            return 0.0
        return float((np.real(cf(w)) - np.exp(-s * w * w)) / w)

    sin_val, sin_err = integrate.quad(re_part_regular, 0.0, np.inf,
                                      weight="sin", wvar=abs_y, **quad_kwargs)
    sin_val += float(np.pi / 2.0 * erf(abs_y / (2.0 * np.sqrt(s))))
    sign = 1.0 if y >= 0 else -1.0
    return cos_val - sign * sin_val, cos_err + sin_err


def gil_pelaez_cdf_from_cf(
    cf, y: float, settings: InversionSettings = InversionSettings(), mean: float = 0.0
) -> float:
    """Gil-Pelaez CDF inversion for an arbitrary characteristic function.

    cf must be the CF of a real random variable with the given mean (the
    mean fixes the finite omega -> 0 limit of the integrand).  Returns
    P(X < y), clamped to [0, 1] when quadrature overshoot stays within
    tolerance and raised as InversionError otherwise.
    """
    upper = settings.truncation if settings.truncation is not None else 256.0
    value, err = _gil_pelaez_integral(cf, y, upper, settings.tolerance, mean)
    if err > 50.0 * settings.tolerance:
        raise InversionError(
            f"quadrature error estimate {err:.3e} exceeds tolerance {settings.tolerance:.3e}"
        )
    prob = 0.5 - value / np.pi
    if prob < -settings.tolerance - err or prob > 1.0 + settings.tolerance + err:
        raise InversionError(f"inverted probability {prob:.6f} outside [0, 1] beyond tolerance")
    return float(np.clip(prob, 0.0, 1.0))


def gil_pelaez_cdf(
    y: float,
    moments: Moments,
    r: float,
    settings: InversionSettings = InversionSettings(),
) -> float:
    """P(Y < y) for Y = |A|^2 - r |B|^2 under the Gaussian moment model.

    Internally rescales Y by its characteristic magnitude so the quadrature
    operates on O(1) frequencies regardless of the link budget's absolute
    power scale.
    """
    scale = moments.mu_a**2 + moments.var_a + r * moments.var_b
    if scale <= 0:
        # degenerate: Y is identically zero
        return 1.0 if y > 0 else 0.0
    scaled = Moments(
        mu_a=moments.mu_a / np.sqrt(scale),
        var_a=moments.var_a / scale,
        var_b=moments.var_b / scale,
    )
    mean = scaled.mu_a**2 + scaled.var_a - r * scaled.var_b
    upper = (
        settings.truncation
        if settings.truncation is not None
        else _auto_truncation(scaled, r, settings.tolerance)
    )
    value, err = _gil_pelaez_integral(
        lambda w: char_fn(w, scaled, r), y / scale, upper, settings.tolerance, mean
    )
    if err > 50.0 * settings.tolerance:
        raise InversionError(
            f"quadrature error estimate {err:.3e} exceeds tolerance {settings.tolerance:.3e}"
        )
    prob = 0.5 - value / np.pi
    if prob < -settings.tolerance - err or prob > 1.0 + settings.tolerance + err:
        raise InversionError(f"inverted probability {prob:.6f} outside [0, 1] beyond tolerance")
    return float(np.clip(prob, 0.0, 1.0))


def outage_theoretical(
    pt_watts: float,
    noise_watts: float,
    r: float,
    moments: Moments,
    settings: InversionSettings = InversionSettings(),
) -> float:
    """Outage probability P(Y < r * sigma^2 / P_t)."""
    if pt_watts <= 0:
        raise ValueError("transmit power must be positive")
    if noise_watts <= 0:
        raise ValueError("noise power must be positive")
    return gil_pelaez_cdf(r * noise_watts / pt_watts, moments, r, settings)
