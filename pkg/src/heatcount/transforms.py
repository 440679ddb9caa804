"""Counting function, heat trace, partial exponential sums, and the
forward Laplace identity connecting them.

For a truncated spectrum with boundary L (``Spectrum.coverage``), the
analytic integration of the step function N gives

    t * integral_0^L N(lam) e^(-lam t) dlam
        = sum_n mult_n (e^(-lam_n t) - e^(-L t))
        = K(t) - N(L) e^(-L t),

so the step-exact mode reproduces the heat trace up to an explicit
truncation correction.  The quadrature mode integrates the same step
function numerically and extends the domain until its own boundary term
is negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import AccuracyError, CoverageError, DomainError, InvalidParameterError
from .evaltable import EvalTable
from .spectrum import Spectrum

# Adaptive Simpson controls.
QUAD_TOL_SCALE = 1e-10        # absolute tolerance = QUAD_TOL_SCALE * result scale
QUAD_MAX_DEPTH = 30           # hard subdivision cap
QUAD_MAX_PANELS = 1 << 21
QUAD_ALIGN_LIMIT = 10_000     # align panels with eigenvalues up to this many distinct values
BOUNDARY_DROP = 1e-12         # quadrature extends domain until boundary term < this * result

# Compensated accumulation kicks in above this many distinct entries.
FSUM_THRESHOLD = 100_000


class CountingMode(Enum):
    """Boundary semantics of the counting function at an eigenvalue."""

    STRICT = "strict"        # count eigenvalues < lam
    INCLUSIVE = "inclusive"  # count eigenvalues <= lam


@dataclass(frozen=True)
class TailBound:
    """Bound on the heat-trace mass lost to truncation at ``truncation_cutoff``."""

    truncation_cutoff: float
    bound_value: float
    valid: bool

    def __post_init__(self):
        if self.bound_value < 0:
            raise ValueError("bound_value must be >= 0")


class HeatTraceResult(NamedTuple):
    value: float
    tail: TailBound


def counting(s: Spectrum, lam: float, mode: CountingMode = CountingMode.STRICT) -> int:
    """Number of eigenvalues (with multiplicity) below lam.

    STRICT counts lam_n < lam, INCLUSIVE counts lam_n <= lam.  Binary
    search over the distinct values, O(log n).
    """
    mode = CountingMode(mode)
    side = "left" if mode is CountingMode.STRICT else "right"
    idx = int(np.searchsorted(s.values, lam, side=side))
    return int(s.cumulative[idx])


def _exp_sum(values: np.ndarray, mults: np.ndarray, t: float) -> float:
    """sum_n mult_n * exp(-lam_n * t), summed in ascending eigenvalue order."""
    terms = mults * np.exp(-values * t)
    if values.size > FSUM_THRESHOLD:
        return math.fsum(terms)
    return float(np.sum(terms))


def heat_trace(s: Spectrum, t: float) -> HeatTraceResult:
    """Heat trace K(t) = sum_n mult_n e^(-lam_n t) over the stored spectrum.

    Returns the truncated sum together with a bound on the missing tail,
    derived from the generator metadata (no bound for file spectra).
    """
    if not (t > 0):
        raise DomainError(f"heat trace requires t > 0, got {t!r}")
    value = _exp_sum(s.values, s.multiplicities, t)
    return HeatTraceResult(value, _tail_bound(s, t))


def _tail_bound(s: Spectrum, t: float) -> TailBound:
    kind = s.generator.get("kind")
    cutoff = s.coverage
    if kind == "interval":
        length = float(s.generator["length"])
        count = s.total_count
        k = math.pi / length
        nxt = ((count + 1) * k) ** 2
        gap = ((count + 2) * k) ** 2 - nxt
        denom = -math.expm1(-gap * t)
        return TailBound(cutoff, math.exp(-nxt * t) / denom, True)
    if kind == "constant_density":
        c = float(s.generator["density"])
        nxt = (s.total_count + 1) / c
        denom = -math.expm1(-t / c)
        return TailBound(cutoff, math.exp(-nxt * t) / denom, True)
    if kind == "rectangle":
        a = float(s.generator["a"])
        b = float(s.generator["b"])
        # Elementary lattice-box bound N(lam) <= (a*b/pi^2) * lam.
        alpha = a * b / math.pi**2
        bound = math.exp(-cutoff * t) * (alpha * (cutoff + 1.0 / t) - s.total_count)
        return TailBound(cutoff, max(bound, 0.0), True)
    if kind == "torus":
        # Lattice points in the disk of squared radius lam fit in a square:
        # N(lam) <= (2 sqrt(lam) + 1)^2 <= (4 + 4/sqrt(L)) lam + 1 for lam >= L >= 1.
        # Torus eigenvalues are integers, so starting the tail at max(cutoff, 1)
        # skips no eigenvalue.
        start = max(cutoff, 1.0)
        alpha = 4.0 + 4.0 / math.sqrt(start)
        bound = math.exp(-start * t) * (alpha * (start + 1.0 / t) + 1.0 - s.total_count)
        return TailBound(cutoff, max(bound, 0.0), True)
    return TailBound(cutoff, 0.0, False)


def partial_exponential_sum(s: Spectrum, u: float, t: float) -> float:
    """A(u, t) = sum over lam_n <= u of mult_n e^(-lam_n t).

    A(lam, 0) is the inclusive counting function; A(max value, t) equals
    the heat trace bit for bit (same summation path).
    """
    if t < 0:
        raise DomainError(f"partial exponential sum requires t >= 0, got {t!r}")
    idx = int(np.searchsorted(s.values, u, side="right"))
    if idx == 0:
        return 0.0
    return _exp_sum(s.values[:idx], s.multiplicities[:idx], t)


def truncation_correction(s: Spectrum, t: float) -> float:
    """The boundary term N(L) e^(-L t) dropped by the step-exact transform."""
    if not (t > 0):
        raise DomainError(f"truncation correction requires t > 0, got {t!r}")
    return s.total_count * math.exp(-s.coverage * t)


def laplace_of_counting(s: Spectrum, t: float, method: str = "step_exact") -> float:
    """Forward Laplace transform t * integral N(lam) e^(-lam t) dlam.

    ``step_exact`` integrates the step function analytically over
    [0, coverage]; adding ``truncation_correction`` recovers the heat
    trace to roundoff.  ``quadrature`` applies adaptive Simpson to the
    same integrand, with panels aligned to the eigenvalue jumps and the
    domain extended until the boundary term is below 1e-12 of the result.
    """
    if not (t > 0):
        raise DomainError(f"laplace transform requires t > 0, got {t!r}")
    if method == "step_exact":
        big = math.exp(-s.coverage * t)
        terms = s.multiplicities * (np.exp(-s.values * t) - big)
        if s.values.size > FSUM_THRESHOLD:
            return math.fsum(terms)
        return float(np.sum(terms))
    if method == "quadrature":
        return _laplace_quadrature(s, t)
    raise InvalidParameterError("method", f"expected 'step_exact' or 'quadrature', got {method!r}")


def _laplace_quadrature(s: Spectrum, t: float) -> float:
    scale = max(_exp_sum(s.values, s.multiplicities, t), 5e-324)
    total = s.total_count
    # Extend past the stored coverage until N(L_q) e^(-L_q t) is negligible.
    needed = (math.log(total) - math.log(BOUNDARY_DROP * scale)) / t
    lam_hi = max(s.coverage, needed)

    values = s.values
    cum = s.cumulative
    if values.size <= QUAD_ALIGN_LIMIT:
        inner = values[(values > 0.0) & (values < lam_hi)]
        edges = np.concatenate(([0.0], inner, [lam_hi]))
        # N restricted to each open panel (lam_k, lam_{k+1}) is the
        # inclusive count at the left edge; endpoint evaluations use the
        # interior value so the jump carries no quadrature weight.
        left_counts = cum[np.searchsorted(values, edges[:-1], side="right")]
        panel_n = left_counts.astype(np.float64)
        lookup = None
    else:
        # Without eigenvalue-aligned panels, concentrate the initial grid on
        # the region where the exponential still carries mass; beyond
        # ``domain`` the dropped boundary term stays under the 1e-12 budget.
        domain = (math.log(total) - math.log(1e-13 * scale)) / t
        edges = np.linspace(0.0, min(lam_hi, domain), 4097)
        panel_n = None

        def lookup(x: np.ndarray) -> np.ndarray:
            return cum[np.searchsorted(values, x, side="left")].astype(np.float64)

    try:
        integral, _ = _adaptive_simpson_exp(
            edges, panel_n, lookup, t, tol=QUAD_TOL_SCALE * scale / t
        )
    except AccuracyError as exc:
        raise AccuracyError(
            "laplace quadrature did not converge",
            estimate=t * exc.estimate,
            error_estimate=t * exc.error_estimate,
        ) from exc
    return t * integral


def _adaptive_simpson_exp(edges, panel_n, lookup, t, tol):
    """Vectorized adaptive Simpson for f(lam) = N(lam) * exp(-lam * t).

    ``panel_n`` carries the constant value of N on each initial panel when
    the panels are eigenvalue-aligned; otherwise ``lookup`` evaluates N
    pointwise.  Budget: per-panel tolerance proportional to panel length;
    Richardson-extrapolated acceptance at |S2 - S1|/15.
    """
    a = edges[:-1].copy()
    b = edges[1:].copy()
    total_len = edges[-1] - edges[0]

    def f(x, n_const):
        weight = n_const if lookup is None else lookup(x)
        return weight * np.exp(-x * t)

    n_const = panel_n if lookup is None else np.zeros_like(a)
    fa = f(a, n_const)
    fb = f(b, n_const)
    mid = 0.5 * (a + b)
    fm = f(mid, n_const)
    s_whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    result = 0.0
    err_accum = 0.0
    panels = a.size
    for depth in range(QUAD_MAX_DEPTH + 1):
        lm = 0.5 * (a + mid)
        rm = 0.5 * (mid + b)
        flm = f(lm, n_const)
        frm = f(rm, n_const)
        s_left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm)
        s_right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb)
        s2 = s_left + s_right
        err = np.abs(s2 - s_whole) / 15.0
        # length-proportional budget with a roundoff floor: panels whose
        # Simpson correction is at machine noise cannot refine further
        ok = err <= np.maximum(tol * (b - a) / total_len, 32.0 * 2.3e-16 * np.abs(s2))
        result += float(np.sum(np.where(ok, s2 + (s2 - s_whole) / 15.0, 0.0)))
        err_accum += float(np.sum(np.where(ok, err, 0.0)))
        if bool(np.all(ok)):
            return result, err_accum
        keep = ~ok
        panels += 2 * int(np.count_nonzero(keep))
        if depth == QUAD_MAX_DEPTH or panels > QUAD_MAX_PANELS:
            raise AccuracyError(
                "adaptive Simpson did not converge within the subdivision cap",
                estimate=result + float(np.sum(s2[keep])),
                error_estimate=err_accum + float(np.sum(err[keep])),
            )
        # split failing panels into halves
        a = np.concatenate((a[keep], mid[keep]))
        b = np.concatenate((mid[keep], b[keep]))
        fa = np.concatenate((fa[keep], fm[keep]))
        fb = np.concatenate((fm[keep], fb[keep]))
        mid_new = np.concatenate((lm[keep], rm[keep]))
        fm = np.concatenate((flm[keep], frm[keep]))
        s_whole = np.concatenate((s_left[keep], s_right[keep]))
        mid = mid_new
        if lookup is None:
            n_const = np.concatenate((n_const[keep], n_const[keep]))
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class DensityResult:
    """Binned eigenvalue density with a constancy diagnostic."""

    table: EvalTable
    constancy_deviation: float
    mean_density: float


def density_estimate(s: Spectrum, bin_width: float, lam_range: tuple[float, float]) -> DensityResult:
    """Per-bin eigenvalue count divided by the bin width.

    Bins are left-open, right-closed: (lo + k*w, lo + (k+1)*w], so a
    spectrum with exact spacing 1/C lands C*w eigenvalues in every bin.
    The range is trimmed to whole bins.  The table's error column is the
    absolute deviation of each bin from the mean density; the constancy
    diagnostic is the max relative deviation across bins.
    """
    if not (bin_width > 0):
        raise DomainError(f"bin width must be positive, got {bin_width!r}")
    lo, hi = float(lam_range[0]), float(lam_range[1])
    if not (lo < hi):
        raise DomainError(f"empty range [{lo!r}, {hi!r}]")
    if lo < 0:
        raise DomainError(f"range must start at >= 0, got {lo!r}")
    if hi > s.coverage * (1 + 1e-12):
        raise CoverageError(f"range end {hi!r} beyond spectral coverage {s.coverage!r}")
    n_bins = int(math.floor((hi - lo) / bin_width + 1e-9))
    if n_bins < 1:
        raise DomainError("range shorter than one bin")
    edges = lo + bin_width * np.arange(n_bins + 1, dtype=np.float64)
    idx = np.searchsorted(s.values, edges, side="right")
    counts = np.diff(s.cumulative[idx]).astype(np.float64)
    densities = counts / bin_width
    in_range = float(np.sum(counts))
    mean = in_range / (n_bins * bin_width)
    deviations = np.abs(densities - mean)
    if mean > 0:
        constancy = float(np.max(deviations) / mean)
    else:
        constancy = 0.0
    table = EvalTable(
        ("abscissa", "value", "error_estimate"),
        metadata={"bin_width": bin_width, "range": [lo, hi], "mean_density": mean},
    )
    centers = 0.5 * (edges[:-1] + edges[1:])
    for center, dens, dev in zip(centers, densities, deviations):
        table.append(float(center), float(dens), float(dev))
    return DensityResult(table, constancy, mean)
