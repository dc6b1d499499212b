"""Random sampling sets on boxes, and finite-window density diagnostics.

Three generators cover the sampling models under study: i.i.d. uniform
points on a cube, a fixed number of uniform points per unit cube, and
spatial Poisson processes (homogeneous, or inhomogeneous via thinning).
Every point set carries enough metadata to be regenerated bit-exactly from
its seed.

The diagnostics are finite-window surrogates for asymptotic quantities
(Beurling density, largest hole): minima over a placement grid, with a bias
of the order of the grid step.  They are heuristics, not proofs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from ._accel import window_counts
from .rng import master_rng

MODELS = (
    "iid-uniform-cube",
    "uniform-per-cube",
    "poisson-homogeneous",
    "poisson-inhomogeneous",
)


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray  # (n, d)
    region: np.ndarray  # (d, 2) lo/hi per axis
    model: str
    params: dict
    seed: int

    def __post_init__(self):
        reg = np.array(self.region, dtype=float).reshape(-1, 2)
        pts = np.array(self.points, dtype=float).reshape(-1, reg.shape[0])
        if pts.size and (
            np.any(pts < reg[None, :, 0] - 1e-9) or np.any(pts > reg[None, :, 1] + 1e-9)
        ):
            raise ValueError("points fall outside the declared region")
        pts.flags.writeable = False
        reg.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "region", reg)

    @property
    def region_array(self) -> np.ndarray:
        return self.region

    @property
    def dimension(self) -> int:
        return self.region.shape[0]

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def metadata(self) -> dict:
        return {
            "model": self.model,
            "params": self.params,
            "seed": self.seed,
            "region": self.region.tolist(),
        }

    def regenerate(self) -> "PointSet":
        """Rebuild the identical point set from the stored metadata."""
        return generate(self.metadata())


def generate(metadata: dict) -> PointSet:
    """Dispatch on stored metadata; inverse of ``PointSet.metadata``."""
    model = metadata["model"]
    params = metadata["params"]
    seed = metadata["seed"]
    if model == "iid-uniform-cube":
        return iid_uniform_cube(params["R"], params["d"], params["r"], seed)
    if model == "uniform-per-cube":
        return uniform_per_cube(np.array(params["anchors"], dtype=np.int64), params["r"], seed)
    if model == "poisson-homogeneous":
        return poisson_homogeneous(np.array(metadata["region"]), params["rho"], seed)
    if model == "poisson-inhomogeneous":
        spec = params["intensity"]
        if spec.get("kind") == "custom":
            raise ValueError("point sets with custom intensity callables cannot be regenerated")
        return poisson_inhomogeneous(
            np.array(metadata["region"]), spec, params["intensity_max"], seed
        )
    raise ValueError(f"unknown model {model!r}")


def iid_uniform_cube(R: float, d: int, r: int, seed: int) -> PointSet:
    """r i.i.d. points uniform on the centered cube [-R/2, R/2]^d."""
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    rng = master_rng(seed)
    pts = rng.uniform(-R / 2.0, R / 2.0, size=(r, d))
    region = np.array([[-R / 2.0, R / 2.0]] * d)
    return PointSet(pts, region, "iid-uniform-cube", {"R": float(R), "d": int(d), "r": int(r)}, seed)


def uniform_per_cube(anchors, r: int, seed: int) -> PointSet:
    """Exactly r independent uniform points in each unit cube k + [0,1]^d.

    `anchors` is an (m, d) integer array of cube corners k.
    """
    anchors = np.asarray(anchors, dtype=np.int64)
    if anchors.ndim == 1:
        anchors = anchors.reshape(-1, 1)
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    m, d = anchors.shape
    rng = master_rng(seed)
    offsets = rng.random(size=(m, r, d))
    pts = (anchors[:, None, :] + offsets).reshape(m * r, d)
    region = np.stack([anchors.min(axis=0), anchors.max(axis=0) + 1], axis=1).astype(float)
    return PointSet(
        pts,
        region,
        "uniform-per-cube",
        {"anchors": anchors.tolist(), "r": int(r)},
        seed,
    )


def integer_anchors(lo: Sequence[int], hi: Sequence[int]) -> np.ndarray:
    """All integer cube corners k with lo <= k < hi, row-major."""
    axes = [np.arange(int(a), int(b)) for a, b in zip(np.atleast_1d(lo), np.atleast_1d(hi))]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def poisson_homogeneous(region, rho: float, seed: int) -> PointSet:
    """Homogeneous spatial Poisson process at intensity rho on a box."""
    region = np.asarray(region, dtype=float).reshape(-1, 2)
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    vol = float(np.prod(region[:, 1] - region[:, 0]))
    rng = master_rng(seed)
    n = int(rng.poisson(rho * vol))
    pts = region[:, 0] + (region[:, 1] - region[:, 0]) * rng.random(size=(n, region.shape[0]))
    return PointSet(pts, region, "poisson-homogeneous", {"rho": float(rho)}, seed)


def log_intensity(c0: float) -> dict:
    """Intensity record for lambda(x) = c0 * (1 + log+ |x|)."""
    return {"kind": "one-plus-log", "c0": float(c0)}


def constant_intensity(rho: float) -> dict:
    return {"kind": "constant", "rho": float(rho)}


def _resolve_intensity(spec: Union[dict, Callable]) -> Tuple[Callable, dict]:
    if callable(spec):
        return spec, {"kind": "custom"}
    kind = spec.get("kind")
    if kind == "one-plus-log":
        c0 = float(spec["c0"])

        def fn(x):
            radius = np.linalg.norm(np.atleast_2d(x), axis=1)
            return c0 * (1.0 + np.log(np.maximum(radius, 1.0)))

        return fn, dict(spec)
    if kind == "constant":
        rho = float(spec["rho"])
        return (lambda x: np.full(np.atleast_2d(x).shape[0], rho)), dict(spec)
    raise ValueError(f"unknown intensity spec {spec!r}")


def poisson_inhomogeneous(region, intensity, intensity_max: float, seed: int) -> PointSet:
    """Inhomogeneous Poisson process by thinning a homogeneous one.

    `intensity` is a callable or an intensity record (see ``log_intensity``);
    it must not exceed `intensity_max` on the region, which is checked on a
    probe grid.
    """
    region = np.asarray(region, dtype=float).reshape(-1, 2)
    d = region.shape[0]
    fn, record = _resolve_intensity(intensity)
    axes = [np.linspace(a, b, 33) for a, b in region]
    grids = np.meshgrid(*axes, indexing="ij")
    probe = np.stack([g.ravel() for g in grids], axis=1)
    vals = np.asarray(fn(probe), dtype=float)
    if np.any(vals > intensity_max * (1.0 + 1e-9)):
        raise ValueError(
            f"intensity exceeds intensity_max={intensity_max} on the probe grid "
            f"(max {vals.max():.6g})"
        )
    rng = master_rng(seed)
    vol = float(np.prod(region[:, 1] - region[:, 0]))
    n = int(rng.poisson(intensity_max * vol))
    pts = region[:, 0] + (region[:, 1] - region[:, 0]) * rng.random(size=(n, d))
    keep = rng.random(n) * intensity_max < np.asarray(fn(pts), dtype=float)
    return PointSet(
        pts[keep],
        region,
        "poisson-inhomogeneous",
        {"intensity": record, "intensity_max": float(intensity_max)},
        seed,
    )


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class DensityReport:
    dimension: int
    n_points: int
    window_sides: Tuple[float, ...]
    density_estimates: Tuple[float, ...]
    hole_side: float
    max_unit_count: int
    separation: float
    region_extent: float
    grid_step: float


def _origin_grid(region: np.ndarray, side: float, step: float) -> np.ndarray:
    axes = []
    for lo, hi in region:
        n = int(math.floor((hi - lo - side) / step + 1e-9)) + 1
        axes.append(lo + step * np.arange(max(n, 1)))
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def density_diagnostics(
    X: PointSet, window_sides: Sequence[float], hole_grid_step: float
) -> DensityReport:
    """Finite-window density minima, largest empty cube found by grid
    search, max count per unit cube, and minimal pairwise separation."""
    if X.n_points == 0:
        raise ValueError("point set is empty")
    if hole_grid_step <= 0:
        raise ValueError("hole_grid_step must be positive")
    region = X.region_array
    extent = float((region[:, 1] - region[:, 0]).min())
    d = X.dimension

    densities = []
    for side in window_sides:
        if side <= 0 or side > extent + 1e-9:
            raise ValueError(f"window side {side} does not fit the region extent {extent}")
        counts = window_counts(X.points, _origin_grid(region, side, hole_grid_step), side)
        densities.append(float(counts.min()) / side**d)

    def has_empty(side: float) -> bool:
        counts = window_counts(X.points, _origin_grid(region, side, hole_grid_step), side)
        return bool((counts == 0).any())

    qmax = int(math.floor(extent / hole_grid_step))
    hole = 0.0
    if qmax >= 1 and has_empty(hole_grid_step):
        lo_q, hi_q = 1, qmax  # largest q with an empty window of side q*step
        while lo_q < hi_q:
            mid = (lo_q + hi_q + 1) // 2
            if has_empty(mid * hole_grid_step):
                lo_q = mid
            else:
                hi_q = mid - 1
        hole = lo_q * hole_grid_step

    unit_side = min(1.0, extent)
    unit_counts = window_counts(X.points, _origin_grid(region, unit_side, hole_grid_step), unit_side)
    max_unit = int(unit_counts.max())

    if X.n_points >= 2:
        dist, _ = cKDTree(X.points).query(X.points, k=2)
        separation = float(dist[:, 1].min())
    else:
        separation = math.inf

    return DensityReport(
        dimension=d,
        n_points=X.n_points,
        window_sides=tuple(float(s) for s in window_sides),
        density_estimates=tuple(densities),
        hole_side=hole,
        max_unit_count=max_unit,
        separation=separation,
        region_extent=extent,
        grid_step=float(hole_grid_step),
    )


@dataclass(frozen=True)
class PropHoleVerdict:
    """Finite-window reading of the stable-sampling necessary conditions.

    All flags are heuristics computed from one realization; they indicate,
    not prove.  `beurling_sufficient` is only defined in dimension 1.
    """

    necessary_density_met: bool
    bounded_holes: bool
    bounded_counts: bool
    beurling_sufficient: Optional[bool]
    note: str = "finite-window heuristics"


def classify_prop_hole(report: DensityReport) -> PropHoleVerdict:
    """Flags from a density report: density >= 1, holes below half the
    region, no runaway cube counts, and (d = 1) the strict sufficient pair
    density > 1 plus positive separation."""
    density = report.density_estimates[
        int(np.argmax(report.window_sides))
    ]  # largest window: closest to the density liminf
    necessary = density >= 1.0 - 1e-9
    bounded_holes = report.hole_side <= 0.5 * report.region_extent
    bounded_counts = report.max_unit_count <= max(8, report.n_points / 2)
    beurling = None
    if report.dimension == 1:
        beurling = bool(density > 1.0 + 1e-9 and report.separation > 0.0)
    return PropHoleVerdict(
        necessary_density_met=bool(necessary),
        bounded_holes=bool(bounded_holes),
        bounded_counts=bool(bounded_counts),
        beurling_sufficient=beurling,
    )


# ---------------------------------------------------------------------------
# file format: header lines then one point per line


def save_points(X: PointSet, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# prolate-points format=1\n")
        fh.write(f"# model={X.model}\n")
        fh.write(f"# seed={X.seed}\n")
        fh.write(f"# params={json.dumps(X.params, sort_keys=True)}\n")
        fh.write(f"# region={json.dumps(X.region.tolist())}\n")
        for row in X.points:
            fh.write(" ".join(repr(float(c)) for c in row) + "\n")


def load_points(path: str) -> PointSet:
    header = {}
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, val = body.split("=", 1)
                    header[key.strip()] = val.strip()
                continue
            rows.append([float(tok) for tok in line.split()])
    region = np.array(json.loads(header["region"]), dtype=float)
    pts = np.array(rows, dtype=float).reshape(-1, region.shape[0])
    return PointSet(
        points=pts,
        region=region,
        model=header["model"],
        params=json.loads(header["params"]),
        seed=int(header["seed"]),
    )
