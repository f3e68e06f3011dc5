"""Time-series diagnostics, domain-of-dependence check and breakdown detection."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

CSV_COLUMNS = ("t", "Q", "energy", "mass", "poisson_res", "max_grad_u", "max_grad_p", "dod_dev", "breakdown")


@dataclass
class DiagnosticsSeries:
    """Sampled diagnostics; ``extra`` holds additional named columns of equal length."""

    t: list = field(default_factory=list)
    Q: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    poisson_res: list = field(default_factory=list)
    max_grad_u: list = field(default_factory=list)
    max_grad_p: list = field(default_factory=list)
    dod_dev: list = field(default_factory=list)
    breakdown: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    breakdown_time: Optional[float] = None
    breakdown_reason: Optional[str] = None
    recovery_failed_at: Optional[float] = None

    def append(self, **values) -> None:
        if self.t and values["t"] <= self.t[-1]:
            raise ValueError("sample times must increase")
        n = len(self.t)
        extras = {k: v for k, v in values.items() if k not in CSV_COLUMNS}
        for k in set(extras) | set(self.extra):
            if k not in extras or len(self.extra.get(k, [])) != n:
                raise ValueError(f"extra column {k!r} out of step")
        for name in CSV_COLUMNS:
            getattr(self, name).append(values.get(name, 0.0 if name != "breakdown" else False))
        for k, v in extras.items():
            self.extra.setdefault(k, []).append(v)

    def __len__(self) -> int:
        return len(self.t)

    def array(self, name: str) -> np.ndarray:
        if name in CSV_COLUMNS:
            return np.asarray(getattr(self, name), dtype=float)
        return np.asarray(self.extra[name], dtype=float)

    def upto(self, t_max: float) -> np.ndarray:
        """Boolean mask of samples with t <= t_max."""
        return self.array("t") <= t_max

    def to_csv(self, path) -> None:
        path = Path(path)
        names = list(CSV_COLUMNS) + sorted(self.extra)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names)
            for i in range(len(self.t)):
                row = [getattr(self, c)[i] for c in CSV_COLUMNS] + [self.extra[k][i] for k in sorted(self.extra)]
                w.writerow([int(x) if isinstance(x, (bool, np.bool_)) else repr(float(x)) for x in row])

    def summary(self) -> dict:
        return {
            "samples": len(self.t),
            "t_final": float(self.t[-1]) if self.t else 0.0,
            "breakdown_time": self.breakdown_time,
            "breakdown_reason": self.breakdown_reason,
            "max_dod_dev": float(max(self.dod_dev)) if self.dod_dev else 0.0,
        }


def dod_check(r, fields, background, R_t: float, dr: float) -> float:
    """sup over r >= R_t + 3 dr of |field - background|, maximised over fields."""
    r = np.asarray(r)
    far = r >= R_t + 3.0 * dr
    if not np.any(far):
        return 0.0
    dev = 0.0
    for f, b in zip(fields, background):
        dev = max(dev, float(np.max(np.abs(np.asarray(f)[far] - b))))
    return dev


def max_gradient(w, dr: float) -> float:
    return float(np.max(np.abs(np.diff(w)))) / dr


def steepening(u, atol: float = 1e-12) -> float:
    """Largest single-face compressive jump of u as a fraction of its total range.

    A value near one means the profile has collapsed onto one cell, where the
    minmod limiter clips every slope; this is used as the limiter-saturation
    signal.  Profiles whose range is below ``atol`` (round-off about a state
    at rest) return 0.
    """
    u = np.asarray(u)
    span = float(u.max() - u.min())
    if span <= atol:
        return 0.0
    return max(0.0, -float(np.min(np.diff(u)))) / span


@dataclass(frozen=True)
class BreakdownThresholds:
    grad_factor: float = 100.0
    steepening: float = 0.15


@dataclass(frozen=True)
class BreakdownEvent:
    t: float
    criterion: str


def breakdown_detector(series: DiagnosticsSeries,
                       thresholds: BreakdownThresholds = BreakdownThresholds()) -> Optional[BreakdownEvent]:
    """Earliest sample where a breakdown criterion fires, or None.

    Criteria: max|du/dr| above ``grad_factor`` times its initial value,
    primitive recovery failure, or limiter saturation (``steepening``).
    """
    if len(series) == 0:
        raise ValueError("empty series")
    t = series.array("t")
    g = series.array("max_grad_u")
    events = []
    g0 = g[0]
    if g0 > 0:
        hit = np.nonzero(g > thresholds.grad_factor * g0)[0]
        if hit.size:
            events.append(BreakdownEvent(float(t[hit[0]]), "gradient"))
    if "steepening" in series.extra:
        st = series.array("steepening")
        hit = np.nonzero(st > thresholds.steepening)[0]
        if hit.size:
            events.append(BreakdownEvent(float(t[hit[0]]), "limiter_saturation"))
    if series.recovery_failed_at is not None:
        events.append(BreakdownEvent(float(series.recovery_failed_at), "recovery_failure"))
    if not events:
        return None
    return min(events, key=lambda e: e.t)


def write_profile_csv(path, r, columns: dict) -> None:
    """Dump a profile snapshot as CSV with columns r followed by ``columns`` in order."""
    names = ["r"] + list(columns)
    data = np.column_stack([np.asarray(r)] + [np.asarray(v) for v in columns.values()])
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in data:
            w.writerow([repr(float(x)) for x in row])
