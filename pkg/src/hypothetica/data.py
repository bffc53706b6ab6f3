"""Longitudinal trial data with intercurrent events.

A :class:`TrialDataset` holds, per subject, the randomised arm ``a0``,
baseline covariates ``l0``, then alternating time-varying covariates ``l[k]``
and binary intercurrent-event (ICE) indicators ``a[:, k]`` for k = 1..K, and
a final outcome ``y``.  Missing cells are encoded as NaN and exposed through
explicit masks; no sentinel numeric (such as ``-999``) is ever used.

Two structural rules are enforced on construction:

* ``a0`` is never missing (randomisation precedes everything else), and
* observation is monotone in the ICE indicators: once ``a[:, k]`` is missing,
  every later indicator and covariate, and the outcome, must be missing too.

The ICE process itself is *not* forced to be monotone: an indicator may
return to 0 after an earlier 1, which matches protocols where the event can
recur or resolve (and matches the reference data-generating process used by
the simulator).
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import CsvFormatError, DataValidationError, SchemaError

__all__ = [
    "TrialDataset",
    "Regime",
    "EstimateResult",
    "read_csv",
    "write_csv",
    "ice_free_mask",
]


def _as_float_matrix(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DataValidationError(f"{name} must be a vector or matrix")
    return arr


@dataclass(frozen=True)
class TrialDataset:
    """Immutable wide-format trial data; see the module docstring.

    ``l`` is a length-K list of (n, p_k) matrices; ``a`` is an (n, K) matrix
    of ICE indicators in {0, 1, NaN}; ``y`` is length n.
    """

    a0: np.ndarray
    l0: np.ndarray
    l: tuple
    a: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        a0 = np.asarray(self.a0, dtype=float)
        if a0.ndim != 1:
            raise DataValidationError("a0 must be a vector")
        n = a0.shape[0]
        l0 = _as_float_matrix(self.l0, "l0")
        l = tuple(_as_float_matrix(lk, f"l{k + 1}") for k, lk in enumerate(self.l))
        a = np.asarray(self.a, dtype=float)
        if a.ndim == 1:
            a = a.reshape(-1, 1) if a.size else a.reshape(n, 0)
        k = a.shape[1] if a.size or a.ndim == 2 else 0
        y = np.asarray(self.y, dtype=float)

        if np.isnan(a0).any():
            raise SchemaError("a0 (randomised arm) must never be missing")
        if not np.isin(a0, (0.0, 1.0)).all():
            raise DataValidationError("a0 must be 0/1")
        if l0.shape[0] != n or a.shape[0] != n or y.shape[0] != n:
            raise DataValidationError("all per-subject arrays must share length n")
        if len(l) != k:
            raise DataValidationError(f"got {len(l)} covariate blocks but {k} ICE columns")
        if np.isnan(l0).any():
            raise DataValidationError("baseline covariates l0 must be fully observed")
        obs_a = ~np.isnan(a)
        if not np.isin(a[obs_a], (0.0, 1.0)).all():
            raise DataValidationError("ICE indicators must be 0/1 or missing")
        for kk in range(k):
            if l[kk].shape[0] != n:
                raise DataValidationError("all covariate blocks must have n rows")

        # Monotone observation: a missing indicator at k hides everything later.
        for kk in range(k):
            dropped = ~obs_a[:, kk]
            if not dropped.any():
                continue
            later_a = obs_a[dropped, kk + 1 :].any(axis=1)
            later_l = np.zeros(int(dropped.sum()), dtype=bool)
            for jj in range(kk + 1, k):
                later_l |= (~np.isnan(l[jj][dropped])).any(axis=1)
            later_y = ~np.isnan(y[dropped])
            bad = later_a | later_l | later_y
            if bad.any():
                subj = int(np.flatnonzero(dropped)[np.flatnonzero(bad)[0]])
                raise DataValidationError(
                    f"subject {subj}: values observed after missing ICE indicator a{kk + 1} "
                    "(observation must be monotone)"
                )

        object.__setattr__(self, "a0", a0.astype(np.int64))
        object.__setattr__(self, "l0", l0)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "y", y)
        for arr in (self.a0, self.l0, self.a, self.y) + self.l:
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.a0.shape[0]

    @property
    def k(self) -> int:
        return self.a.shape[1]

    def p(self, k: int) -> int:
        """Dimension of the covariate block at time k (0 = baseline)."""
        return self.l0.shape[1] if k == 0 else self.l[k - 1].shape[1]

    def l_block(self, k: int) -> np.ndarray:
        """Covariate matrix at time k (0 = baseline)."""
        return self.l0 if k == 0 else self.l[k - 1]

    def arm_mask(self, arm: int) -> np.ndarray:
        return self.a0 == arm

    def take(self, indices) -> "TrialDataset":
        """Row subset / resample (used by the bootstrap); preserves invariants."""
        idx = np.asarray(indices)
        return TrialDataset(
            a0=self.a0[idx],
            l0=self.l0[idx],
            l=tuple(lk[idx] for lk in self.l),
            a=self.a[idx],
            y=self.y[idx],
        )


def ice_free_mask(data: TrialDataset, through_k: int) -> np.ndarray:
    """True where a1..a_{through_k} are all observed and zero.

    ``through_k = 0`` is the empty conjunction: all True.
    """
    if not 0 <= through_k <= data.k:
        raise ValueError(f"through_k must be in [0, {data.k}]")
    mask = np.ones(data.n, dtype=bool)
    for kk in range(through_k):
        col = data.a[:, kk]
        mask &= ~np.isnan(col) & (col == 0.0)
    return mask


@dataclass(frozen=True)
class Regime:
    """A static assignment: arm ``a0`` plus an ICE vector (all zero for the
    hypothetical 'events prevented' regime)."""

    a0: int
    ice: tuple

    def __post_init__(self):
        if self.a0 not in (0, 1):
            raise DataValidationError("regime a0 must be 0 or 1")
        ice = tuple(int(v) for v in self.ice)
        if any(v not in (0, 1) for v in ice):
            raise DataValidationError("regime ice entries must be 0 or 1")
        object.__setattr__(self, "ice", ice)

    @classmethod
    def hypothetical(cls, a0: int, k: int) -> "Regime":
        return cls(a0=a0, ice=(0,) * k)


@dataclass(frozen=True)
class EstimateResult:
    """Per-arm potential-outcome means under no ICE and their contrast."""

    mean_treated: float
    mean_control: float
    n_used_per_arm: tuple  # (control, treated)
    se: float | None = None
    ci_lower: float | None = None
    ci_upper: float | None = None
    contrast: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "contrast", self.mean_treated - self.mean_control)

    def with_uncertainty(self, se: float, ci_lower: float, ci_upper: float) -> "EstimateResult":
        return EstimateResult(
            mean_treated=self.mean_treated,
            mean_control=self.mean_control,
            n_used_per_arm=self.n_used_per_arm,
            se=se,
            ci_lower=ci_lower,
            ci_upper=ci_upper,
        )


# ---------------------------------------------------------------------------
# CSV ingestion / emission
#
# Wide format, one row per subject, header
#   a0,l0_1..l0_p0,l1_1..,a1,l2_1..,a2,...,y
# UTF-8, '.' decimal point, empty field = missing.
# ---------------------------------------------------------------------------

_L_COL = re.compile(r"^l(\d+)_(\d+)$")
_A_COL = re.compile(r"^a(\d+)$")


def _canonical_header(header: Sequence[str], schema: Mapping[str, str] | None):
    """Map file column names to canonical ones and derive (K, dims)."""
    if schema:
        reverse = {actual: canonical for canonical, actual in schema.items()}
        header = [reverse.get(h, h) for h in header]
    cols = [h.strip() for h in header]
    if "a0" not in cols:
        raise SchemaError("missing required column a0")
    if "y" not in cols:
        raise SchemaError("missing required column y")
    dims: dict[int, int] = {}
    ks: set[int] = set()
    for c in cols:
        m = _L_COL.match(c)
        if m:
            t, j = int(m.group(1)), int(m.group(2))
            dims[t] = max(dims.get(t, 0), j)
            continue
        m = _A_COL.match(c)
        if m:
            if int(m.group(1)) > 0:
                ks.add(int(m.group(1)))
            continue
        if c not in ("a0", "y"):
            raise SchemaError(f"unrecognised column {c!r}")
    k = max(ks) if ks else 0
    if ks and ks != set(range(1, k + 1)):
        raise SchemaError("ICE columns a1..aK must be contiguous")
    if 0 not in dims:
        raise SchemaError("missing baseline covariate columns l0_*")
    for t in range(k + 1):
        pt = dims.get(t, 0)
        if t > 0 and pt == 0:
            raise SchemaError(f"missing covariate columns l{t}_* for time {t}")
        present = set()
        for c in cols:
            m = _L_COL.match(c)
            if m and int(m.group(1)) == t:
                present.add(int(m.group(2)))
        if present != set(range(1, pt + 1)):
            raise SchemaError(f"covariate columns l{t}_1..l{t}_{pt} must be contiguous")
    if max(dims) > k:
        raise SchemaError(f"covariate block l{max(dims)} has no matching ICE column a{max(dims)}")
    return cols, k, dims


def _parse_cell(text: str, line: int, col: str) -> float:
    text = text.strip()
    if text == "":
        return np.nan
    try:
        return float(text)
    except ValueError:
        raise CsvFormatError(f"line {line}, column {col}: cannot parse {text!r} as a number") from None


def read_csv(path, schema: Mapping[str, str] | None = None) -> TrialDataset:
    """Read a wide-format CSV into a validated :class:`TrialDataset`.

    ``schema`` optionally maps canonical column names (``a0``, ``l0_1``, ...)
    to the names actually used in the file.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        cols, k, dims = _canonical_header(header, schema)
        col_index = {c: i for i, c in enumerate(cols)}
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(cols):
                raise CsvFormatError(f"line {line_no}: expected {len(cols)} fields, got {len(row)}")
            rows.append([_parse_cell(cell, line_no, cols[i]) for i, cell in enumerate(row)])

    n = len(rows)
    mat = np.asarray(rows, dtype=float) if n else np.empty((0, len(cols)))
    a0 = mat[:, col_index["a0"]] if n else np.empty(0)
    if n and np.isnan(a0).any():
        bad = int(np.flatnonzero(np.isnan(a0))[0])
        raise SchemaError(f"subject {bad}: a0 is missing")
    l_blocks = []
    for t in range(k + 1):
        pt = dims.get(t, 0)
        block = mat[:, [col_index[f"l{t}_{j}"] for j in range(1, pt + 1)]] if n else np.empty((0, pt))
        l_blocks.append(block)
    a = mat[:, [col_index[f"a{t}"] for t in range(1, k + 1)]] if n else np.empty((0, k))
    y = mat[:, col_index["y"]] if n else np.empty(0)
    return TrialDataset(a0=a0, l0=l_blocks[0], l=tuple(l_blocks[1:]), a=a, y=y)


def _format_cell(v: float) -> str:
    if np.isnan(v):
        return ""
    return repr(float(v))


def write_csv(data: TrialDataset, path) -> None:
    """Write a dataset in the wide format accepted by :func:`read_csv`.

    Floats are written with shortest round-trip formatting, so a
    read/write cycle reproduces the file byte for byte.
    """
    header = ["a0"] + [f"l0_{j}" for j in range(1, data.p(0) + 1)]
    for t in range(1, data.k + 1):
        header += [f"l{t}_{j}" for j in range(1, data.p(t) + 1)]
        header.append(f"a{t}")
    header.append("y")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(data.n):
            row = [str(int(data.a0[i]))]
            row += [_format_cell(v) for v in data.l0[i]]
            for t in range(1, data.k + 1):
                row += [_format_cell(v) for v in data.l[t - 1][i]]
                cell = data.a[i, t - 1]
                row.append("" if np.isnan(cell) else str(int(cell)))
            row.append(_format_cell(data.y[i]))
            writer.writerow(row)
