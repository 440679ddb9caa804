"""Recovering the counting function from the heat trace.

The counting function is the inverse Laplace transform of K(t)/t,
evaluated along a vertical contour Re(t) = c:

    N(lam) = (1/2 pi i) * integral_{c-i inf}^{c+i inf} K(t) e^(lam t) / t dt,

with c above the abscissa of convergence of the Dirichlet series, here
estimated as the tail maximum of (ln n)/lam_n.  Conjugate symmetry folds
the contour onto [0, T]:

    N(lam) = (e^(c lam) / pi) * integral_0^T Re[K(c + i w) e^(i lam w) / (c + i w)] dw,

computed by the trapezoidal rule with step h.  At a jump the limit is
the midpoint N(lam-) + mult/2.

Contour selection: the trapezoid discretization with step h reproduces
the counting function plus aliased copies N(lam + 2 pi k / h) damped by
e^(-2 pi c k / h); with h = pi/(8 lam) and c = kappa/lam the damping is
e^(-16 kappa k).  kappa = 2 keeps aliases below 1e-12 while keeping the
e^(c lam) amplification of the truncated-tail error small, and T is
chosen from a per-term bound on that tail so the truncation error stays
below AUTO_TRUNCATION_TOL.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, InsufficientDataError
from .evaltable import EvalTable
from .spectrum import Spectrum
from .transforms import CountingMode, counting

KAPPA = 2.0                  # target c * lam for the auto contour
AUTO_TRUNCATION_TOL = 2e-3   # absolute truncation-error budget for auto T
T_CAP_FACTOR = 1e5           # hard cap T <= T_CAP_FACTOR * c
TERM_DROP_EXPONENT = 46.0    # drop spectral terms with c*(lam_n - lam) beyond this
BLOCK = 1 << 16


@dataclass(frozen=True)
class InversionConfig:
    """Contour abscissa c, truncation height T, and trapezoid step h.

    With ``auto`` (the default) all three are derived from the evaluation
    point and the spectrum; a manual configuration must supply them all.
    """

    c: float | None = None
    T: float | None = None
    h: float | None = None
    auto: bool = True


@dataclass(frozen=True)
class InversionResult:
    value: float
    oscillation_estimate: float
    config_used: InversionConfig

    def __post_init__(self):
        if self.oscillation_estimate < 0:
            raise ValueError("oscillation_estimate must be >= 0")


@dataclass(frozen=True)
class AbscissaReport:
    """Tail estimate of lim sup (ln n)/lam_n with a trend diagnostic."""

    estimate: float
    tail_size: int
    nonincreasing_fraction: float


def abscissa_report(s: Spectrum) -> AbscissaReport:
    """Estimate the abscissa of convergence from the stored tail.

    Uses the cumulative index n_k at each distinct eigenvalue over the
    top half of the spectrum and reports the maximum of (ln n_k)/lam_k
    there, plus the fraction of tail steps on which the ratio does not
    increase (a limit that exists shows a monotone tail).
    """
    if s.total_count < 32:
        raise InsufficientDataError(
            f"abscissa estimate needs >= 32 eigenvalues (with multiplicity), got {s.total_count}"
        )
    k0 = s.values.size // 2
    lam = s.values[k0:]
    n_k = s.cumulative[k0 + 1 :].astype(np.float64)
    positive = lam > 0
    lam = lam[positive]
    n_k = n_k[positive]
    if lam.size == 0:
        raise InsufficientDataError("no positive eigenvalues in the spectrum tail")
    ratios = np.log(n_k) / lam
    if ratios.size > 1:
        steps = np.diff(ratios)
        fraction = float(np.mean(steps <= 0))
    else:
        fraction = 1.0
    return AbscissaReport(float(np.max(ratios)), int(lam.size), fraction)


def abscissa_estimate(s: Spectrum) -> float:
    return abscissa_report(s).estimate


def _resolve_config(s: Spectrum, lam: float, cfg: InversionConfig) -> InversionConfig:
    if cfg.auto:
        try:
            est = abscissa_estimate(s)
        except InsufficientDataError:
            est = 0.0  # small spectra: fall back to the pure damping target
        c = max(2.0 * est, KAPPA / lam)
        below = s.values[(s.values < lam) & (s.values > 0)]
        lam_ref = float(below[-1]) if below.size else lam
        h = min(math.pi / (8.0 * lam), math.pi / (8.0 * lam_ref))
        T = _auto_truncation(s, lam, c, h)
        return InversionConfig(c=c, T=T, h=h, auto=True)
    if cfg.c is None or cfg.T is None or cfg.h is None:
        raise ConfigurationError("manual inversion config requires c, T and h")
    if not (cfg.c > 0):
        raise ConfigurationError(f"contour abscissa c must be positive, got {cfg.c!r}")
    if not (0 < cfg.h < cfg.T):
        raise ConfigurationError(f"need 0 < h < T, got h={cfg.h!r}, T={cfg.T!r}")
    if s.total_count >= 32:
        est = abscissa_estimate(s)
        if cfg.c <= est:
            raise ConfigurationError(
                f"contour abscissa c={cfg.c!r} does not exceed the convergence "
                f"abscissa estimate {est!r}"
            )
    return cfg


def _auto_truncation(s: Spectrum, lam: float, c: float, h: float) -> float:
    """Pick T so the estimated contour-truncation error is below budget.

    The tail of the folded integral past T contributes, per spectral term,
    about a_n e^(c lam) / (pi mu T) with mu the term's oscillation
    frequency |lam - lam_n| as seen by the trapezoid grid (wrapped at the
    sampling frequency); a term in resonance (mu = 0) leaves a c/(pi T)
    tail instead.
    """
    a_n = s.multiplicities * np.exp(-np.minimum(c * s.values, 745.0))
    mu = lam - s.values
    mu_eff = np.abs(2.0 * np.sin(0.5 * mu * h)) / h
    weights = np.where(mu_eff < 1e-9 * lam, c, 1.0 / np.maximum(mu_eff, 1e-300))
    t_req = math.exp(c * lam) * float(np.sum(a_n * weights)) / (math.pi * AUTO_TRUNCATION_TOL)
    t_min = max(20.0 * c, 4.0 * math.pi / lam, 8.0 * h)
    return float(min(max(t_req, t_min), T_CAP_FACTOR * c))


def bromwich_invert(s: Spectrum, lam: float, cfg: InversionConfig | None = None) -> InversionResult:
    """Evaluate the contour integral for N(lam) by the trapezoidal rule.

    Away from eigenvalues the value converges to the counting function;
    at an eigenvalue it converges to the jump midpoint.  The oscillation
    estimate is the magnitude of the last contour segment's contribution
    (one oscillation period), a proxy for the truncated-tail size.
    """
    if not (lam > 0):
        raise DomainError(f"inversion point must be positive, got {lam!r}")
    cfg = _resolve_config(s, lam, cfg or InversionConfig())
    c, T, h = cfg.c, cfg.T, cfg.h
    if c * lam > 700.0:
        raise ConfigurationError(
            f"e^(c*lam) overflows for c*lam = {c * lam:g}; choose a smaller contour abscissa"
        )

    # Terms too far above lam are damped below resolution; drop them.
    keep = c * (s.values - lam) <= TERM_DROP_EXPONENT
    values = s.values[keep]
    coeffs = s.multiplicities[keep] * np.exp(-values * c)

    m_steps = int(math.ceil(T / h))
    acc = 0.0
    for j0 in range(0, m_steps + 1, BLOCK):
        j = np.arange(j0, min(j0 + BLOCK, m_steps + 1))
        omega = j * h
        trace = coeffs @ np.exp(-1j * np.outer(values, omega))
        integrand = np.real(trace * np.exp(1j * lam * omega) / (c + 1j * omega))
        weights = np.ones(j.size)
        if j[0] == 0:
            weights[0] = 0.5
        if j[-1] == m_steps:
            weights[-1] = 0.5
        acc += float(np.sum(weights * integrand))
    prefactor = math.exp(c * lam) / math.pi
    value = prefactor * h * acc

    _assert_conjugate_symmetry(values, coeffs, lam, c, h * max(m_steps // 2, 1), value)

    # Last full oscillation period of e^(i lam w).
    n_tail = max(int(math.ceil(2.0 * math.pi / (lam * h))), 2)
    j = np.arange(max(m_steps + 1 - n_tail, 0), m_steps + 1)
    omega = j * h
    trace = coeffs @ np.exp(-1j * np.outer(values, omega))
    integrand = np.real(trace * np.exp(1j * lam * omega) / (c + 1j * omega))
    weights = np.ones(j.size)
    weights[-1] = 0.5
    osc_raw = abs(prefactor * h * float(np.sum(weights * integrand)))
    oscillation = max(osc_raw, 2.0**-40 * (1.0 + abs(value)))
    return InversionResult(value, oscillation, cfg)


def _assert_conjugate_symmetry(values, coeffs, lam, c, omega, value) -> None:
    # One symmetric node pair: the imaginary parts must cancel exactly.
    up = complex(coeffs @ np.exp(-values * complex(c, omega))) * cmath.exp(
        1j * lam * omega
    ) / complex(c, omega)
    down = complex(coeffs @ np.exp(-values * complex(c, -omega))) * cmath.exp(
        -1j * lam * omega
    ) / complex(c, -omega)
    residual = abs((up + down).imag)
    scale = max(abs(value), abs(up + down), 1e-30)
    if residual > 1e-10 * scale:
        raise AssertionError(
            f"conjugate symmetry violated: imaginary residual {residual!r} at omega={omega!r}"
        )


def invert_profile(s: Spectrum, grid, cfg: InversionConfig | None = None) -> EvalTable:
    """Batch inversion over a grid of evaluation points.

    One row per point, sorted by abscissa; rows whose rounded value
    disagrees with the counting oracle carry match="no".  Per-row errors
    are recorded as match="error" without aborting the batch.
    """
    grid = [float(x) for x in grid]
    if not grid:
        raise DomainError("inversion grid must not be empty")
    table = EvalTable(("lambda", "value", "oscillation_estimate", "rounded", "oracle", "match"))
    for lam in sorted(grid):
        oracle = counting(s, lam, CountingMode.STRICT)
        try:
            res = bromwich_invert(s, lam, cfg)
        except (DomainError, ConfigurationError) as exc:
            table.append(lam, math.nan, math.nan, None, oracle, f"error: {exc}")
            continue
        rounded = int(math.floor(res.value + 0.5))
        table.append(
            lam,
            res.value,
            res.oscillation_estimate,
            rounded,
            oracle,
            "yes" if rounded == oracle else "no",
        )
    return table
