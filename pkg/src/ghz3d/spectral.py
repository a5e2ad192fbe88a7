"""Joint-spectral-amplitude model for the temporal distinguishability of
photon pairs born in separate crystals, and the four-photon dip it predicts.

All spectral widths are 1/e half-widths in ordinary frequency (Hz), i.e. the
sigma of exp(-(w/sigma)^2); FWHM conversions are provided as helpers.  The
sinc phase-matching profile is replaced by a Gaussian of equal FWHM, giving
the factorization-scale width

    sigma_gvm = 2 / (sqrt(5) * L * (1/v_pump - 1/v_downconverted)),

and the closed-form interference visibility

    V = sigma_gvm * sqrt(2 sigma_f^2 + sigma_gvm^2) / (sigma_f^2 + sigma_gvm^2).

The numeric route integrates the four-frequency coincidence probability

    P4(dT) = C * Int |phi(w1,w2) phi(w1',w2')
                      - phi(w1',w2) phi(w1,w2') e^{i (w1'-w1) dT}|^2

by Gauss-Hermite quadrature over the same Gaussian JSA.  The pump and
group-velocity-mismatch widths enter through the combined anti-diagonal
width 1/sigma_s^2 = 1/sigma_p^2 + 1/sigma_gvm^2; the closed form above is
the sigma_p -> infinity limit of the same integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.optimize import curve_fit

from ._kernels import p4_sums

C_LIGHT = 299_792_458.0  # m/s

DEFAULT_QUAD_ORDER = 24


class QuadratureNotConverged(RuntimeError):
    """Doubling the quadrature order moved the result by more than the tolerance."""


class FitDiverged(RuntimeError):
    """Least-squares dip fit failed to converge."""


def sigma_gvm(crystal_length: float, delta_inv_gv: float) -> float:
    """Group-velocity-mismatch width (Hz) of a crystal of given length (m).

    ``delta_inv_gv`` is the inverse-group-velocity difference between the
    pump and the down-converted photons, in s/m.
    """
    if crystal_length <= 0 or delta_inv_gv <= 0:
        raise ValueError("crystal length and group-velocity mismatch must be positive")
    return 2.0 / (math.sqrt(5.0) * crystal_length * delta_inv_gv)


def bandwidth_to_wavelength(delta_nu: float, lambda_c: float) -> float:
    """Convert a frequency bandwidth (Hz) to wavelength units (m) at lambda_c."""
    return lambda_c**2 * delta_nu / C_LIGHT


def wavelength_to_bandwidth(delta_lambda: float, lambda_c: float) -> float:
    """Convert a wavelength bandwidth (m) at lambda_c to frequency units (Hz)."""
    return C_LIGHT * delta_lambda / lambda_c**2


def fwhm_to_sigma(fwhm: float) -> float:
    """1/e half-width of a Gaussian exp(-(x/sigma)^2) with the given FWHM."""
    return fwhm / (2.0 * math.sqrt(math.log(2.0)))


def sigma_to_fwhm(sigma: float) -> float:
    return sigma * 2.0 * math.sqrt(math.log(2.0))


def visibility(sigma_f: float, sigma_gvm_: float) -> float:
    """Closed-form four-photon interference visibility for Gaussian filters."""
    if sigma_f <= 0 or sigma_gvm_ <= 0:
        raise ValueError("spectral widths must be positive")
    sf2 = sigma_f**2
    sg2 = sigma_gvm_**2
    return sigma_gvm_ * math.sqrt(2 * sf2 + sg2) / (sf2 + sg2)


@dataclass(frozen=True)
class SpectralModel:
    """Gaussian joint-spectral-amplitude parameters of one pair source."""

    sigma_f: float            # spectral filter width, Hz
    sigma_p: float            # pump spectral width, Hz
    crystal_length: float     # m
    delta_inv_gv: float       # 1/v_pump - 1/v_downconv, s/m
    lambda_c: float           # downconverted center wavelength, m

    def __post_init__(self) -> None:
        for name in ("sigma_f", "sigma_p", "crystal_length", "delta_inv_gv", "lambda_c"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def reference_defaults(cls) -> "SpectralModel":
        """Headline configuration: 1 mm ppKTP, 1.2 nm filters at 808 nm, 2 nm pump at 404 nm."""
        return cls(
            sigma_f=wavelength_to_bandwidth(1.2e-9, 808e-9),
            sigma_p=wavelength_to_bandwidth(2e-9, 404e-9),
            crystal_length=1e-3,
            delta_inv_gv=1.6e-9,
            lambda_c=808e-9,
        )

    @property
    def sigma_gvm(self) -> float:
        return sigma_gvm(self.crystal_length, self.delta_inv_gv)

    @property
    def sigma_s(self) -> float:
        """Combined anti-diagonal JSA width: pump and phase matching."""
        return 1.0 / math.sqrt(1.0 / self.sigma_p**2 + 1.0 / self.sigma_gvm**2)

    def jsa(self, w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
        """Gaussian joint spectral amplitude at detuning frequencies (Hz)."""
        return np.exp(-((w1**2 + w2**2) / self.sigma_f**2) - ((w1 + w2) ** 2) / self.sigma_s**2)

    def predicted_visibility(self) -> float:
        """Closed form evaluated with the pump width folded in."""
        return visibility(self.sigma_f, self.sigma_s)


def _p4_quadrature(model: SpectralModel, delta_t: float, order: int) -> float:
    x, w = hermgauss(order)
    # scale so the product-state diagonal decay matches the GH weight
    lam = 1.0 / math.sqrt(2.0 / model.sigma_f**2 + 2.0 / model.sigma_s**2)
    omega = lam * x
    weights = lam * w * np.exp(x**2)
    phi = model.jsa(omega[:, None], omega[None, :])
    phase = np.exp(-1j * omega * delta_t)
    i2, cross = p4_sums(weights, phi, phase)
    return 2.0 * (i2**2) - 2.0 * cross


def p4_numeric(
    model: SpectralModel,
    delta_t: float,
    order: int = DEFAULT_QUAD_ORDER,
    check: bool = True,
    rtol: float = 1e-6,
) -> float:
    """Unnormalized four-fold coincidence probability at pair delay dT (s).

    Deterministic for a fixed quadrature order.  With ``check`` the order is
    doubled once and QuadratureNotConverged raised if the relative change
    exceeds ``rtol``.
    """
    value = _p4_quadrature(model, delta_t, order)
    if check:
        refined = _p4_quadrature(model, delta_t, 2 * order)
        scale = max(abs(refined), abs(value), 1e-300)
        if abs(refined - value) > rtol * scale:
            raise QuadratureNotConverged(
                f"order {order} -> {2 * order} changed P4 by more than rtol={rtol}"
            )
    return value


def p4_limit(model: SpectralModel, order: int = DEFAULT_QUAD_ORDER) -> float:
    """Large-delay limit of P4: the oscillatory cross term averages out."""
    x, w = hermgauss(order)
    lam = 1.0 / math.sqrt(2.0 / model.sigma_f**2 + 2.0 / model.sigma_s**2)
    omega = lam * x
    weights = lam * w * np.exp(x**2)
    phi = model.jsa(omega[:, None], omega[None, :])
    i2 = float(np.sum(weights[:, None] * weights[None, :] * phi * phi))
    return 2.0 * i2**2


def visibility_numeric(model: SpectralModel, order: int = DEFAULT_QUAD_ORDER) -> float:
    """(P4(inf) - P4(0)) / P4(inf) from the quadrature route."""
    p_inf = p4_limit(model, order)
    p_zero = _p4_quadrature(model, 0.0, order)
    return (p_inf - p_zero) / p_inf


@dataclass(frozen=True)
class DipModel:
    """Phenomenological Gaussian dip in the four-fold rate vs delay position.

    ``width`` is the 1/e half-width of the fitted Gaussian in delay-stage
    position units (m).  The 1/e convention is this library's choice and is
    documented rather than universal.
    """

    baseline: float   # counts/s far from the dip
    visibility: float
    width: float      # m
    center: float     # m

    def __post_init__(self) -> None:
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError("visibility must lie in [0, 1]")
        if self.width <= 0:
            raise ValueError("width must be positive")

    def rate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.baseline * (1.0 - self.visibility * np.exp(-(((x - self.center) / self.width) ** 2)))


def dip_curve(dip: DipModel, positions: Sequence[float]) -> tuple[tuple[float, float], ...]:
    """(position, rate) samples of the dip model."""
    xs = np.asarray(positions, dtype=float)
    rates = dip.rate(xs)
    return tuple((float(x), float(r)) for x, r in zip(xs, rates))


def fit_dip(samples: Sequence[tuple[float, float]]) -> DipModel:
    """Least-squares fit of the four dip parameters to (position, rate) data.

    Round-trips noiseless dip_curve data to 1e-6 relative accuracy.
    """
    if len(samples) < 5:
        raise ValueError("need at least 5 samples spanning the dip")
    xs = np.asarray([s[0] for s in samples], dtype=float)
    ys = np.asarray([s[1] for s in samples], dtype=float)

    def f(x, baseline, vis, width, center):
        return baseline * (1.0 - vis * np.exp(-(((x - center) / width) ** 2)))

    baseline0 = float(np.max(ys))
    vis0 = float(np.clip(1.0 - np.min(ys) / baseline0 if baseline0 > 0 else 0.0, 0.0, 1.0))
    center0 = float(xs[np.argmin(ys)])
    span = float(np.ptp(xs))
    width0 = max(span / 6.0, 1e-12)
    try:
        popt, _ = curve_fit(
            f,
            xs,
            ys,
            p0=(baseline0, max(vis0, 1e-3), width0, center0),
            bounds=([0.0, 0.0, 1e-15, xs.min() - span], [np.inf, 1.0, np.inf, xs.max() + span]),
            maxfev=20000,
        )
    except (RuntimeError, ValueError) as exc:
        raise FitDiverged(str(exc)) from exc
    return DipModel(baseline=float(popt[0]), visibility=float(popt[1]), width=float(popt[2]), center=float(popt[3]))
