"""Complex field samples, per-run diagnostics, and their CSV serialization."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


class ValidationError(ValueError):
    """Raised when a config or file fails schema/precondition checks."""


class NumericalFailure(RuntimeError):
    """Raised when an integration produces non-finite values."""


@dataclass
class RadialField:
    """One sample psi(t, x) on a uniform symmetric grid.

    The grid is periodic with period 2 * half_width; x = 0 sits at index
    n // 2 so on-axis values are grid points, not interpolants.
    """

    t: float
    x_grid: np.ndarray
    psi: np.ndarray
    level: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def dx(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])

    @property
    def n(self) -> int:
        return self.x_grid.size

    def on_axis(self) -> complex:
        return complex(self.psi[self.n // 2])

    def sup_norm(self) -> float:
        return float(np.abs(self.psi).max())

    def power(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.dx)

    def boundary_ratio(self, fraction: float = 0.03) -> float:
        """max |psi| over the outer `fraction` of the domain, relative to sup."""
        k = max(1, int(self.n * fraction))
        edge = max(np.abs(self.psi[:k]).max(), np.abs(self.psi[-k:]).max())
        sup = self.sup_norm()
        return float(edge / sup) if sup > 0 else 0.0


def symmetric_grid(half_width: float, n: int) -> np.ndarray:
    """Uniform grid on [-W, W) with x=0 at index n//2 (periodic, 2W period)."""
    dx = 2.0 * half_width / n
    return -half_width + dx * np.arange(n)


@dataclass
class DiagnosticsSeries:
    """Per-sample scalar diagnostics of a PDE run."""

    t: np.ndarray
    L: np.ndarray
    sup_norm: np.ndarray
    power: np.ndarray
    hamiltonian: np.ndarray
    phase0: np.ndarray       # unwrapped on-axis phase arg psi(t, 0)
    axis_amp: np.ndarray     # |psi(t, 0)|
    dt: np.ndarray
    level: np.ndarray
    damping_integral: np.ndarray  # integral of |psi|^(q+1) dx
    config_hash: str = ""
    status: str = ""
    flags: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.t.size


def config_hash(config_dict: dict) -> str:
    blob = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _write_rows(fh, columns: list[np.ndarray]) -> None:
    ncol = len(columns)
    fmt = ",".join([FLOAT_FMT] * ncol)
    for row in zip(*columns):
        fh.write(fmt % tuple(float(v) for v in row))
        fh.write("\n")


def write_field_csv(path: str | Path, fld: RadialField) -> Path:
    """Snapshot CSV (x, Re psi, Im psi) plus a .meta.json sidecar."""
    path = Path(path)
    with open(path, "w") as fh:
        fh.write("x,re_psi,im_psi\n")
        _write_rows(fh, [fld.x_grid, fld.psi.real, fld.psi.imag])
    meta = {"t": fld.t, "level": fld.level, "n": fld.n}
    meta.update(fld.meta)
    sidecar = path.with_suffix(".meta.json")
    sidecar.write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n")
    return path


def read_field_csv(path: str | Path) -> RadialField:
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    sidecar = path.with_suffix(".meta.json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    t = float(meta.pop("t", 0.0))
    level = int(meta.pop("level", 0))
    meta.pop("n", None)
    return RadialField(t=t, x_grid=data[:, 0], psi=data[:, 1] + 1j * data[:, 2],
                       level=level, meta=meta)


DIAG_COLUMNS = ["t", "L", "sup_norm", "power", "hamiltonian", "phase0",
                "axis_amp", "dt", "level", "damping_integral"]


def write_diagnostics_csv(path: str | Path, diag: DiagnosticsSeries) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(f"# config_hash={diag.config_hash} status={diag.status}\n")
        fh.write(",".join(DIAG_COLUMNS) + "\n")
        _write_rows(fh, [getattr(diag, c) for c in DIAG_COLUMNS])
    return path


def read_diagnostics_csv(path: str | Path) -> DiagnosticsSeries:
    path = Path(path)
    with open(path) as fh:
        first = fh.readline().strip()
    cfg, status = "", ""
    if first.startswith("#"):
        for tok in first[1:].split():
            if tok.startswith("config_hash="):
                cfg = tok.split("=", 1)[1]
            elif tok.startswith("status="):
                status = tok.split("=", 1)[1]
    data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
    cols = {name: data[:, i] for i, name in enumerate(DIAG_COLUMNS)}
    cols["level"] = cols["level"].astype(int)
    return DiagnosticsSeries(config_hash=cfg, status=status, **cols)
