"""Numerical surrogate of the Jacob's ladder and its reverse iterations.

The surrogate is the antiderivative

    phi(t) = phi(t0) + integral_{t0}^{t} Z~^2(u) du

tabulated at panel edges by compensated cumulative Gauss-Legendre sums.
Between edges phi is evaluated by integrating Z~^2 from the panel's left
edge with the same rule, so dphi/dt = Z~^2 holds to quadrature accuracy
everywhere and the change-of-variables identities behind the factorization
formulas are exact up to numerics.  phi is strictly increasing because Z~^2
vanishes only at isolated zeros.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .errors import AnchorError, ConsistencyError, DomainError, RangeError
from .quadrature import gauss_legendre, neumaier_cumsum, panel_integrals
from .zeta_core import DEFAULT_CONFIG, EvalConfig, z_tilde_sq

__all__ = [
    "EULER_GAMMA",
    "MAX_RESOLUTION",
    "LadderTable",
    "IteratedInterval",
    "default_anchor",
    "build_ladder",
    "phi1",
    "phi1_inv",
    "iterate_forward",
    "reverse_interval",
    "plan_ladder_range",
    "save_table",
    "load_table",
]

EULER_GAMMA = 0.57721566490153286061
MAX_RESOLUTION = 0.05
_ANCHOR_SLOPE = 2.0 + math.log(2 * math.pi) - 2 * EULER_GAMMA
_CLAMP_MARGIN = 1.0


@dataclass(frozen=True, eq=False)
class LadderTable:
    """Tabulated surrogate; immutable once built.

    ``interpolation_order`` is the number of Gauss-Legendre nodes used both
    for the panel integrals and for evaluation between edges.
    """

    grid: np.ndarray
    phi: np.ndarray
    anchor: tuple[float, float]
    interpolation_order: int
    cfg: EvalConfig = DEFAULT_CONFIG
    z_tilde_sq_grid: np.ndarray = field(default=None, repr=False)
    resolution: float = MAX_RESOLUTION

    def __post_init__(self):
        for arr in (self.grid, self.phi, self.z_tilde_sq_grid):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def t_lo(self) -> float:
        return float(self.grid[0])

    @property
    def t_hi(self) -> float:
        return float(self.grid[-1])

    @property
    def phi_range(self) -> tuple[float, float]:
        return float(self.phi[0]), float(self.phi[-1])

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.grid).tobytes())
        h.update(np.ascontiguousarray(self.phi).tobytes())
        h.update(json.dumps(_sidecar_meta(self), sort_keys=True).encode())
        return h.hexdigest()


@dataclass(frozen=True)
class IteratedInterval:
    r: int
    lo: float
    hi: float

    def __post_init__(self):
        if self.r < 0:
            raise DomainError("iteration depth must be >= 0")
        if not self.lo < self.hi:
            raise DomainError(f"interval needs lo < hi, got ({self.lo!r}, {self.hi!r})")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, strict: bool = True) -> bool:
        return self.lo < x < self.hi if strict else self.lo <= x <= self.hi


def default_anchor(t0: float) -> float:
    """phi(t0) = t0 - (2 + ln 2pi - 2 gamma) t0 / ln t0."""
    return t0 - _ANCHOR_SLOPE * t0 / math.log(t0)


def build_ladder(t_lo: float, t_hi: float, resolution: float = MAX_RESOLUTION,
                 cfg: EvalConfig = DEFAULT_CONFIG, anchor: float | None = None,
                 nodes: int = 6) -> LadderTable:
    """Tabulate the surrogate ladder on [t_lo, t_hi] with panels of width <= resolution.

    With ``anchor=None`` the default anchor is used and lowered if needed so
    that phi(t) < t on every edge; an explicit anchor violating that raises
    :class:`AnchorError`.
    """
    if not t_hi > t_lo:
        raise DomainError("empty ladder table: need t_hi > t_lo")
    if t_lo < cfg.t_min:
        raise DomainError(f"t_lo = {t_lo!r} is below t_min = {cfg.t_min!r}")
    if not 0 < resolution <= MAX_RESOLUTION:
        raise DomainError(f"resolution must lie in (0, {MAX_RESOLUTION}] to resolve Z~^2")
    if nodes < 2:
        raise DomainError("need at least 2 quadrature nodes per panel")

    n_panels = int(math.ceil((t_hi - t_lo) / resolution - 1e-9))
    grid = t_lo + (t_hi - t_lo) * (np.arange(n_panels + 1) / n_panels)
    grid[-1] = t_hi

    pieces = []
    chunk = 20000
    for start in range(0, n_panels, chunk):
        stop = min(start + chunk, n_panels)
        pieces.append(
            panel_integrals(lambda x: z_tilde_sq(x, cfg), grid[start:stop], grid[start + 1 : stop + 1], nodes)
        )
    increments = np.concatenate(pieces)

    user_anchor = anchor is not None
    a = float(anchor) if user_anchor else default_anchor(t_lo)
    phi = neumaier_cumsum(increments, a)
    if not np.all(np.diff(phi) > 0):
        raise ConsistencyError("cumulative table is not strictly increasing")

    excess = float(np.max(phi - grid))
    if excess >= 0:
        if user_anchor:
            raise AnchorError(
                f"phi(t) >= t on the table (max excess {excess:.6g}); lower the anchor below "
                f"{a - excess - _CLAMP_MARGIN:.6f}"
            )
        a -= excess + _CLAMP_MARGIN
        phi = neumaier_cumsum(increments, a)

    zt = z_tilde_sq(grid, cfg)
    return LadderTable(grid=grid, phi=phi, anchor=(float(t_lo), float(phi[0])),
                       interpolation_order=nodes, cfg=cfg, z_tilde_sq_grid=zt,
                       resolution=float(resolution))


def _in_domain(table: LadderTable, t: np.ndarray) -> bool:
    return bool(np.all(t >= table.grid[0]) and np.all(t <= table.grid[-1]))


def phi1(table: LadderTable, t):
    """Surrogate ladder value at t (scalar or array) inside the table range."""
    arr = np.asarray(t, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    if not _in_domain(table, flat):
        raise DomainError(
            f"t outside ladder range [{table.t_lo}, {table.t_hi}]: "
            f"min {float(flat.min())!r}, max {float(flat.max())!r}"
        )
    idx = np.searchsorted(table.grid, flat, side="right") - 1
    idx = np.clip(idx, 0, len(table.grid) - 1)
    left = table.grid[idx]
    h = flat - left
    out = table.phi[idx].copy()
    moving = h > 0
    if moving.any():
        x, w = gauss_legendre(table.interpolation_order)
        hm = h[moving]
        nodes = left[moving][:, None] + (0.5 * hm)[:, None] * (x[None, :] + 1.0)
        vals = z_tilde_sq(nodes, table.cfg)
        out[moving] += 0.5 * hm * (vals @ w)
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def phi1_inv(table: LadderTable, y: float) -> float:
    """The unique t in the table with phi(t) = y (bracketed Brent search)."""
    y = float(y)
    lo, hi = table.phi_range
    if not lo <= y <= hi:
        raise DomainError(f"y = {y!r} outside the achievable range [{lo!r}, {hi!r}]")
    i = int(np.searchsorted(table.phi, y, side="right")) - 1
    i = min(max(i, 0), len(table.grid) - 2)
    if table.phi[i] == y:
        return float(table.grid[i])
    if table.phi[i + 1] == y:
        return float(table.grid[i + 1])
    return brentq(lambda t: phi1(table, t) - y, table.grid[i], table.grid[i + 1],
                  xtol=table.cfg.rootfind_abs_tol, rtol=4 * np.finfo(float).eps, maxiter=200)


def iterate_forward(table: LadderTable, t, j: int):
    """phi applied j times; every argument must stay inside the table."""
    cur = np.asarray(t, dtype=float)
    for depth in range(j):
        if not _in_domain(table, np.atleast_1d(cur)):
            raise RangeError(f"forward iterate {depth} leaves the ladder table")
        cur = np.asarray(phi1(table, cur))
    return float(cur) if cur.ndim == 0 else cur


def reverse_interval(table: LadderTable, base: IteratedInterval, r: int) -> IteratedInterval:
    """r-th reverse iterate of ``base`` (an r = 0 interval) under the ladder."""
    if base.r != 0:
        raise DomainError("base interval must have r = 0")
    if r < 0:
        raise DomainError("r must be >= 0")
    lo, hi = base.lo, base.hi
    for depth in range(1, r + 1):
        try:
            lo, hi = phi1_inv(table, lo), phi1_inv(table, hi)
        except DomainError as exc:
            raise RangeError(f"reverse iterate at depth {depth} escapes the ladder table: {exc}") from exc
    return IteratedInterval(r, lo, hi)


def plan_ladder_range(pi_L: float, U: float, k: int, margin: float = 0.15) -> tuple[float, float]:
    """Heuristic [t_lo, t_hi] covering k reverse iterates of [pi L, pi L + U].

    t_lo = pi L keeps the base inside phi's range under the default anchor;
    each reverse step is advanced using the mean deficit of Z~^2 below 1.
    """
    t_lo = float(pi_L)
    offset = t_lo - default_anchor(t_lo)
    t = t_lo + U
    for _ in range(k):
        # phi(t) ~ t - offset - deficit * (t - t_lo); solve phi(t_next) = t.
        deficit = (1 + math.log(2 * math.pi) - 2 * EULER_GAMMA) / math.log(t)
        t = (t + offset - deficit * t_lo) / (1 - deficit)
    return t_lo, t_lo + (t - t_lo) * (1 + margin) + 5.0


def _sidecar_meta(table: LadderTable) -> dict:
    return {
        "anchor": list(table.anchor),
        "interpolation_order": table.interpolation_order,
        "resolution": table.resolution,
        "config": table.cfg.to_dict(),
        "label": "surrogate",
    }


def save_table(table: LadderTable, path) -> Path:
    """Write CSV rows (t, phi, z_tilde_sq) plus a JSON sidecar."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "phi", "z_tilde_sq"])
        for t, p, z in zip(table.grid.tolist(), table.phi.tolist(), table.z_tilde_sq_grid.tolist()):
            writer.writerow([repr(t), repr(p), repr(z)])
    meta = _sidecar_meta(table)
    meta["csv_sha256"] = hashlib.sha256(path.read_bytes()).hexdigest()
    meta["checksum"] = table.checksum()
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def load_table(path) -> LadderTable:
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    if hashlib.sha256(path.read_bytes()).hexdigest() != meta["csv_sha256"]:
        raise ConsistencyError(f"{path} does not match its sidecar checksum")
    rows = list(csv.reader(path.open()))[1:]
    data = np.array([[float(x) for x in row] for row in rows])
    table = LadderTable(
        grid=data[:, 0].copy(),
        phi=data[:, 1].copy(),
        anchor=tuple(meta["anchor"]),
        interpolation_order=int(meta["interpolation_order"]),
        cfg=EvalConfig.from_dict(meta["config"]),
        z_tilde_sq_grid=data[:, 2].copy(),
        resolution=float(meta["resolution"]),
    )
    if table.checksum() != meta["checksum"]:
        raise ConsistencyError("reloaded table differs from the saved one")
    return table
