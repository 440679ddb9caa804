"""Eigenvalue spectra: construction, closed-form generators, persistence.

A spectrum is a finite truncation of a Laplace-operator eigenvalue list
{lam_1 <= lam_2 <= ...}, stored as strictly increasing distinct values
with integer multiplicities.  The truncation boundary is kept in
``cutoff`` so downstream operations can account for the missing tail.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (
    EmptySpectrumError,
    InvalidParameterError,
    SpectrumFormatError,
    ValidationError,
)

# Relative tolerance for merging near-duplicate eigenvalues read from files.
# Generator output merges on exact equality instead.
FILE_MERGE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Immutable truncated eigenvalue spectrum.

    Attributes
    ----------
    values : ndarray of float64, strictly increasing, all >= 0
    multiplicities : ndarray of int64, all >= 1
    label : free-text description
    generator : parameters the spectrum was built from ({"kind": ...})
    cutoff : truncation boundary; every eigenvalue <= cutoff is present
    """

    values: np.ndarray
    multiplicities: np.ndarray
    label: str = ""
    generator: dict = field(default_factory=dict)
    cutoff: float | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        mults = np.asarray(self.multiplicities, dtype=np.int64)
        if values.ndim != 1 or mults.ndim != 1 or values.shape != mults.shape:
            raise ValidationError("values and multiplicities must be 1-d arrays of equal length")
        if values.size == 0:
            raise ValidationError("spectrum must contain at least one eigenvalue")
        if not np.all(np.isfinite(values)):
            raise ValidationError("eigenvalues must be finite")
        if values[0] < 0.0:
            raise ValidationError(f"negative eigenvalue {values[0]!r}")
        if values.size > 1 and not np.all(values[1:] > values[:-1]):
            raise ValidationError("eigenvalues must be strictly increasing; merge duplicates first")
        if np.any(mults < 1):
            raise ValidationError("multiplicities must be >= 1")
        if self.cutoff is not None and self.cutoff < values[-1]:
            raise ValidationError(
                f"cutoff {self.cutoff!r} below largest stored eigenvalue {values[-1]!r}"
            )
        values.flags.writeable = False
        mults.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "multiplicities", mults)

    # -- derived views -------------------------------------------------

    @cached_property
    def cumulative(self) -> np.ndarray:
        """Prefix sums of multiplicities with a leading 0 (length n+1)."""
        cum = np.zeros(self.values.size + 1, dtype=np.int64)
        np.cumsum(self.multiplicities, out=cum[1:])
        cum.flags.writeable = False
        return cum

    @property
    def total_count(self) -> int:
        return int(self.cumulative[-1])

    @property
    def coverage(self) -> float:
        """Truncation boundary: cutoff when recorded, else the largest value."""
        return float(self.cutoff) if self.cutoff is not None else float(self.values[-1])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Spectrum):
            return NotImplemented
        return (
            np.array_equal(self.values, other.values)
            and np.array_equal(self.multiplicities, other.multiplicities)
            and self.label == other.label
            and self.generator == other.generator
            and self.coverage == other.coverage
        )

    def __repr__(self) -> str:
        kind = self.generator.get("kind", "raw")
        return (
            f"Spectrum({kind}, {self.values.size} distinct, total={self.total_count}, "
            f"range=[{self.values[0]:g}, {self.values[-1]:g}])"
        )

    # -- construction --------------------------------------------------

    @classmethod
    def from_entries(
        cls,
        values,
        multiplicities=None,
        *,
        label: str = "",
        generator: dict | None = None,
        cutoff: float | None = None,
        merge_rtol: float = 0.0,
    ) -> "Spectrum":
        """Build a spectrum from possibly unsorted, possibly repeated values.

        Equal values are merged into multiplicities; with ``merge_rtol > 0``
        values within that relative distance merge too (file inputs carry
        rounding noise, generator output does not).
        """
        values = np.asarray(values, dtype=np.float64)
        if multiplicities is None:
            mults = np.ones(values.shape, dtype=np.int64)
        else:
            mults = np.asarray(multiplicities, dtype=np.int64)
        if values.size and np.any(values < 0):
            bad = int(np.argmax(values < 0))
            raise ValidationError(f"entries[{bad}].value: negative eigenvalue {values[bad]!r}")
        order = np.argsort(values, kind="stable")
        values = values[order]
        mults = mults[order]
        merged_v, merged_m = _merge_sorted(values, mults, merge_rtol)
        return cls(
            merged_v,
            merged_m,
            label=label,
            generator=dict(generator or {}),
            cutoff=cutoff,
        )


def _merge_sorted(values: np.ndarray, mults: np.ndarray, rtol: float):
    """Collapse sorted values into distinct ones, summing multiplicities."""
    if values.size == 0:
        return values, mults
    if rtol > 0.0:
        gaps = np.diff(values)
        scale = np.maximum(np.abs(values[:-1]), np.abs(values[1:]))
        new_group = gaps > rtol * scale
    else:
        new_group = values[1:] != values[:-1]
    starts = np.concatenate(([0], np.nonzero(new_group)[0] + 1))
    out_v = values[starts]
    ends = np.concatenate((starts[1:], [values.size]))
    cum = np.concatenate(([0], np.cumsum(mults)))
    out_m = cum[ends] - cum[starts]
    return out_v, out_m


# -- closed-form generators ---------------------------------------------


def generate_interval(length: float, count: int) -> Spectrum:
    """Dirichlet spectrum of the interval [0, length]: lam_n = (n*pi/length)^2."""
    if not (length > 0):
        raise InvalidParameterError("length", f"must be positive, got {length!r}")
    if count < 1:
        raise InvalidParameterError("count", f"must be >= 1, got {count!r}")
    n = np.arange(1, count + 1, dtype=np.float64)
    values = (n * (math.pi / length)) ** 2
    return Spectrum(
        values,
        np.ones(count, dtype=np.int64),
        label=f"interval L={length:g}",
        generator={"kind": "interval", "length": float(length), "count": int(count)},
        cutoff=float(values[-1]),
    )


def generate_rectangle(a: float, b: float, lam_max: float) -> Spectrum:
    """Dirichlet spectrum of the a x b rectangle up to lam_max.

    lam_{m,n} = (m*pi/a)^2 + (n*pi/b)^2 with m, n >= 1; equal eigenvalues
    merge into multiplicities.
    """
    if not (a > 0):
        raise InvalidParameterError("a", f"must be positive, got {a!r}")
    if not (b > 0):
        raise InvalidParameterError("b", f"must be positive, got {b!r}")
    lam_11 = (math.pi / a) ** 2 + (math.pi / b) ** 2
    if not (lam_max > 0):
        raise InvalidParameterError("lambda_max", f"must be positive, got {lam_max!r}")
    if lam_max < lam_11:
        raise EmptySpectrumError(
            f"lambda_max={lam_max!r} is below the smallest eigenvalue {lam_11!r}"
        )
    ka = math.pi / a
    kb = math.pi / b
    chunks = []
    m = 1
    while (m * ka) ** 2 + kb**2 <= lam_max:
        rem = lam_max - (m * ka) ** 2
        n_max = int(math.floor(math.sqrt(rem) / kb))
        while ((n_max + 1) * kb) ** 2 <= rem:  # guard floor against roundoff
            n_max += 1
        while n_max >= 1 and (n_max * kb) ** 2 > rem:
            n_max -= 1
        n = np.arange(1, n_max + 1, dtype=np.float64)
        chunks.append((m * ka) ** 2 + (n * kb) ** 2)
        m += 1
    values = np.concatenate(chunks)
    distinct, mults = np.unique(values, return_counts=True)
    return Spectrum(
        distinct,
        mults.astype(np.int64),
        label=f"rectangle {a:g}x{b:g}",
        generator={"kind": "rectangle", "a": float(a), "b": float(b), "lambda_max": float(lam_max)},
        cutoff=float(lam_max),
    )


def generate_torus(lam_max: float) -> Spectrum:
    """Flat-torus spectrum lam = m^2 + n^2 over integer pairs (m, n).

    Multiplicity of k is the number of lattice points on the circle of
    squared radius k; the zero mode is included with multiplicity 1.
    """
    if lam_max < 0:
        raise InvalidParameterError("lambda_max", f"must be >= 0, got {lam_max!r}")
    side = int(math.floor(math.sqrt(lam_max)))
    coords = np.arange(-side, side + 1, dtype=np.int64)
    squared = coords**2
    grid = squared[:, None] + squared[None, :]
    flat = grid.ravel()
    flat = flat[flat <= lam_max]
    distinct, mults = np.unique(flat, return_counts=True)
    return Spectrum(
        distinct.astype(np.float64),
        mults.astype(np.int64),
        label="flat torus",
        generator={"kind": "torus", "lambda_max": float(lam_max)},
        cutoff=float(lam_max),
    )


def generate_constant_density(c: float, count: int) -> Spectrum:
    """Spectrum with exactly constant eigenvalue density c: lam_n = n/c."""
    if not (c > 0):
        raise InvalidParameterError("density", f"must be positive, got {c!r}")
    if count < 1:
        raise InvalidParameterError("count", f"must be >= 1, got {count!r}")
    values = np.arange(1, count + 1, dtype=np.float64) / c
    return Spectrum(
        values,
        np.ones(count, dtype=np.int64),
        label=f"constant density C={c:g}",
        generator={"kind": "constant_density", "density": float(c), "count": int(count)},
        cutoff=float(values[-1]),
    )


@dataclass(frozen=True)
class GeneratorSpec:
    """Declarative recipe for one generator call (used by the CLI)."""

    kind: str
    length: float | None = None
    a: float | None = None
    b: float | None = None
    density: float | None = None
    count: int | None = None
    lam_max: float | None = None

    def build(self) -> Spectrum:
        if self.kind == "interval":
            self._require("length", "count")
            return generate_interval(self.length, self.count)
        if self.kind == "rectangle":
            self._require("a", "b", "lam_max")
            return generate_rectangle(self.a, self.b, self.lam_max)
        if self.kind == "torus":
            self._require("lam_max")
            return generate_torus(self.lam_max)
        if self.kind == "constant_density":
            self._require("density", "count")
            return generate_constant_density(self.density, self.count)
        raise InvalidParameterError("shape", f"unknown generator kind {self.kind!r}")

    def _require(self, *names):
        for name in names:
            if getattr(self, name) is None:
                flag = "lambda_max" if name == "lam_max" else name
                raise InvalidParameterError(flag, f"required for shape {self.kind!r}")


# -- persistence ----------------------------------------------------------


def spectrum_to_dict(s: Spectrum) -> dict:
    return {
        "label": s.label,
        "generator": s.generator,
        "cutoff": s.coverage,
        "entries": [
            {"value": float(v), "multiplicity": int(m)}
            for v, m in zip(s.values, s.multiplicities)
        ],
    }


def spectrum_from_dict(payload: dict) -> Spectrum:
    if not isinstance(payload, dict):
        raise SpectrumFormatError("top-level JSON value must be an object")
    entries = payload.get("entries")
    if not isinstance(entries, list) or not entries:
        raise SpectrumFormatError("entries: must be a non-empty list")
    values = np.empty(len(entries), dtype=np.float64)
    mults = np.empty(len(entries), dtype=np.int64)
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "value" not in entry:
            raise SpectrumFormatError(f"entries[{i}]: expected an object with a 'value' field")
        value = entry["value"]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SpectrumFormatError(f"entries[{i}].value: expected a number, got {value!r}")
        if value < 0:
            raise ValidationError(f"entries[{i}].value: negative eigenvalue {value!r}")
        mult = entry.get("multiplicity", 1)
        if isinstance(mult, bool) or not isinstance(mult, int):
            raise SpectrumFormatError(f"entries[{i}].multiplicity: expected an integer, got {mult!r}")
        if mult < 1:
            raise ValidationError(f"entries[{i}].multiplicity: must be >= 1, got {mult!r}")
        values[i] = value
        mults[i] = mult
    sorted_strictly = bool(np.all(values[1:] > values[:-1]))
    if not sorted_strictly:
        warnings.warn("spectrum entries not strictly increasing; sorting and merging", stacklevel=3)
    cutoff = payload.get("cutoff")
    if cutoff is not None and (isinstance(cutoff, bool) or not isinstance(cutoff, (int, float))):
        raise SpectrumFormatError(f"cutoff: expected a number, got {cutoff!r}")
    generator = payload.get("generator")
    if generator is None:
        generator = {"kind": "file"}
    s = Spectrum.from_entries(
        values,
        mults,
        label=str(payload.get("label", "")),
        generator=generator,
        cutoff=None if cutoff is None else float(cutoff),
        merge_rtol=FILE_MERGE_RTOL,
    )
    if sorted_strictly and s.values.size < values.size:
        warnings.warn(
            f"merged {values.size - s.values.size} near-duplicate entries "
            f"(relative tolerance {FILE_MERGE_RTOL:g})",
            stacklevel=3,
        )
    return s


def save_spectrum(s: Spectrum, path) -> None:
    """Write a spectrum as JSON; values round-trip exactly (repr precision)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        json.dump(spectrum_to_dict(s), handle, indent=1)
        handle.write("\n")


def load_spectrum(path) -> Spectrum:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except json.JSONDecodeError as exc:
        raise SpectrumFormatError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    return spectrum_from_dict(payload)
