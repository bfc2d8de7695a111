"""Site geometry: axis-aligned buildings, line-of-sight tests, link angles.

Buildings are closed axis-aligned boxes standing on the ground plane z=0.
A segment is considered blocked only when its open interior crosses a box
through an interval of positive length, so rays that merely graze a face,
edge or corner keep line of sight.  Endpoints that lie exactly on a face
(e.g. a reflector mounted on a facade) are nudged a micrometer outward
along the face normal before testing, which keeps the test total and makes
links leaving a facade see past their own building.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

# Endpoints within _FACE_TOL of a face plane count as lying on it and get
# pushed _FACE_NUDGE outward before the slab test.
_FACE_TOL = 1e-9
_FACE_NUDGE = 1e-6
# Minimum chord length (in the segment parameter times geometry scale) for a
# crossing to count as blockage; grazing contact stays below this.
_BLOCK_EPS = 1e-12

Point3 = tuple[float, float, float]


def _point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3D point, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("point coordinates must be finite")
    return a


@dataclass(frozen=True)
class Building:
    """Axis-aligned box from min_corner to max_corner, base on the ground."""

    min_corner: Point3
    max_corner: Point3

    def __post_init__(self):
        mn = _point(self.min_corner)
        mx = _point(self.max_corner)
        object.__setattr__(self, "min_corner", tuple(map(float, mn)))
        object.__setattr__(self, "max_corner", tuple(map(float, mx)))
        if not np.all(mx > mn):
            raise ValueError("max_corner must exceed min_corner componentwise")
        if abs(mn[2]) > _FACE_TOL:
            raise ValueError("buildings must stand on the ground plane z=0")

    @property
    def height(self) -> float:
        return self.max_corner[2]

    def footprint_contains(self, x: float, y: float) -> bool:
        mn, mx = self.min_corner, self.max_corner
        return mn[0] <= x <= mx[0] and mn[1] <= y <= mx[1]


@dataclass(frozen=True)
class Scene:
    """Deployment site: one AP, buildings, user positions, ground area."""

    ap_position: Point3
    ap_tilt_deg: float
    buildings: tuple[Building, ...]
    ues: tuple[Point3, ...]
    area_x: tuple[float, float]
    area_y: tuple[float, float]

    def __post_init__(self):
        ap = _point(self.ap_position)
        object.__setattr__(self, "ap_position", tuple(map(float, ap)))
        object.__setattr__(self, "buildings", tuple(self.buildings))
        object.__setattr__(
            self, "ues", tuple(tuple(map(float, _point(u))) for u in self.ues)
        )
        object.__setattr__(self, "area_x", tuple(map(float, self.area_x)))
        object.__setattr__(self, "area_y", tuple(map(float, self.area_y)))
        if not (self.area_x[0] < self.area_x[1] and self.area_y[0] < self.area_y[1]):
            raise ValueError("area bounds must be increasing")
        if not (-90.0 < self.ap_tilt_deg <= 90.0):
            raise ValueError("ap_tilt_deg must lie in (-90, 90]")
        for u in self.ues:
            if not (
                self.area_x[0] <= u[0] <= self.area_x[1]
                and self.area_y[0] <= u[1] <= self.area_y[1]
            ):
                raise ValueError(f"UE {u} lies outside the scene area")
            if u[2] >= self.ap_position[2]:
                raise ValueError("UEs must sit below the AP")
            for b in self.buildings:
                mn, mx = b.min_corner, b.max_corner
                if (
                    mn[0] < u[0] < mx[0]
                    and mn[1] < u[1] < mx[1]
                    and u[2] < mx[2]
                ):
                    raise ValueError(f"UE {u} lies inside a building")

    @cached_property
    def _boxes(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.buildings:
            return np.zeros((0, 3)), np.zeros((0, 3))
        mn = np.array([b.min_corner for b in self.buildings], dtype=float)
        mx = np.array([b.max_corner for b in self.buildings], dtype=float)
        return mn, mx

    @property
    def num_ues(self) -> int:
        return len(self.ues)


@dataclass(frozen=True)
class CandidateSpot:
    """One facade-mounted candidate position for a reflecting surface."""

    id: int
    position: Point3
    facet_normal: Point3
    building_index: int
    face_index: int
    grid_w: float
    grid_h: float


@dataclass(frozen=True)
class LinkGeometry:
    """Distances and pattern angles of one link from a to b.

    depression_deg is the depression of the ray a->b below the horizontal
    (positive downward).  departure_offaxis_deg is that depression minus the
    source boresight tilt (None when no tilt was given).  The arrival angles
    describe the direction from b back toward a relative to b's facet
    normal: arrival_polar_deg is the off-normal angle and
    arrival_azimuth_deg the signed horizontal bearing around the normal
    (None when no normal was given).
    """

    dist_3d: float
    dist_2d: float
    depression_deg: float
    departure_offaxis_deg: float | None = None
    arrival_polar_deg: float | None = None
    arrival_azimuth_deg: float | None = None


def _nudged_endpoint(p: np.ndarray, mn: np.ndarray, mx: np.ndarray) -> np.ndarray:
    """Push p outward off every building face it lies on (within tolerance)."""
    if mn.shape[0] == 0:
        return p
    q = p.copy()
    touching = np.all((p >= mn - _FACE_TOL) & (p <= mx + _FACE_TOL), axis=1)
    for b in np.nonzero(touching)[0]:
        on_min = np.abs(p - mn[b]) <= _FACE_TOL
        on_max = np.abs(p - mx[b]) <= _FACE_TOL
        if on_min.any() or on_max.any():
            q = q - _FACE_NUDGE * on_min + _FACE_NUDGE * on_max
    return q


def _segment_blocked(a: np.ndarray, b: np.ndarray, mn: np.ndarray, mx: np.ndarray) -> bool:
    """True if the open segment a-b crosses any box with positive length."""
    if mn.shape[0] == 0:
        return False
    d = b - a
    n_boxes = mn.shape[0]
    t_lo = np.zeros(n_boxes)
    t_hi = np.ones(n_boxes)
    alive = np.ones(n_boxes, dtype=bool)
    for ax in range(3):
        if abs(d[ax]) > 1e-15:
            t1 = (mn[:, ax] - a[ax]) / d[ax]
            t2 = (mx[:, ax] - a[ax]) / d[ax]
            lo = np.minimum(t1, t2)
            hi = np.maximum(t1, t2)
            t_lo = np.maximum(t_lo, lo)
            t_hi = np.minimum(t_hi, hi)
        else:
            # Segment runs parallel to this slab; it can only pass through
            # boxes it is strictly inside of along this axis.
            alive &= (a[ax] > mn[:, ax]) & (a[ax] < mx[:, ax])
    return bool(np.any(alive & (t_hi - t_lo > _BLOCK_EPS)))


def los_clear(a, b, scene: Scene) -> bool:
    """Whether the segment between a and b is free of building blockage.

    Total: coincident endpoints are trivially clear, endpoints on facades
    look past their own face, and grazing contact does not block.
    """
    pa = _point(a)
    pb = _point(b)
    if np.array_equal(pa, pb):
        return True
    mn, mx = scene._boxes
    pa = _nudged_endpoint(pa, mn, mx)
    pb = _nudged_endpoint(pb, mn, mx)
    return not _segment_blocked(pa, pb, mn, mx)


def _arrival_frame(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Local (x', z') axes of a facet: z' is the normal, x' horizontal."""
    z_axis = np.array([0.0, 0.0, 1.0])
    x_local = np.cross(z_axis, normal)
    nrm = np.linalg.norm(x_local)
    if nrm < 1e-12:
        # Degenerate (vertical normal): any horizontal axis works.
        x_local = np.array([1.0, 0.0, 0.0])
    else:
        x_local = x_local / nrm
    return x_local, normal


def link_geometry(
    a,
    b,
    *,
    source_tilt_deg: float | None = None,
    target_normal=None,
) -> LinkGeometry:
    """Distances and antenna angles for the link from a to b.

    Pass source_tilt_deg when a carries the tilted AP array and
    target_normal when b is a facade-mounted surface; the corresponding
    angle fields stay None otherwise.
    """
    pa = _point(a)
    pb = _point(b)
    v = pb - pa
    d3 = float(np.linalg.norm(v))
    if d3 <= 0.0:
        raise ValueError("link endpoints must be distinct")
    d2 = float(math.hypot(v[0], v[1]))
    depression = math.degrees(math.atan2(-v[2], d2))

    offaxis = None
    if source_tilt_deg is not None:
        offaxis = depression - float(source_tilt_deg)

    polar = None
    azimuth = None
    if target_normal is not None:
        n = _point(target_normal)
        nn = np.linalg.norm(n)
        if nn <= 0:
            raise ValueError("target_normal must be nonzero")
        n = n / nn
        u = -v / d3  # direction from b back toward a
        x_local, z_local = _arrival_frame(n)
        cos_polar = float(np.clip(np.dot(u, z_local), -1.0, 1.0))
        polar = math.degrees(math.acos(cos_polar))
        azimuth = math.degrees(math.atan2(float(np.dot(u, x_local)), cos_polar))

    return LinkGeometry(
        dist_3d=d3,
        dist_2d=d2,
        depression_deg=depression,
        departure_offaxis_deg=offaxis,
        arrival_polar_deg=polar,
        arrival_azimuth_deg=azimuth,
    )


# The four vertical faces of a box, as (fixed axis, side, outward normal).
_FACES = (
    (0, 0, (-1.0, 0.0, 0.0)),
    (0, 1, (1.0, 0.0, 0.0)),
    (1, 0, (0.0, -1.0, 0.0)),
    (1, 1, (0.0, 1.0, 0.0)),
)


def generate_candidate_spots(
    scene: Scene,
    grid_w: float,
    grid_h: float,
    min_mount_height: float = 6.0,
) -> list[CandidateSpot]:
    """Grid the vertical facades of every building into candidate spots.

    Each face is tiled with grid_w x grid_h cells starting at the face's
    lower-left corner, keeping only full cells above min_mount_height; spot
    positions are the cell centers.  Ordering (and therefore ids) is
    deterministic: buildings in scene order, faces -x, +x, -y, +y, cells
    row-major from the bottom row up.
    """
    if not (grid_w > 0 and grid_h > 0):
        raise ValueError("grid_w and grid_h must be positive")
    if min_mount_height < 0:
        raise ValueError("min_mount_height must be >= 0")
    spots: list[CandidateSpot] = []
    for bi, bld in enumerate(scene.buildings):
        mn = np.asarray(bld.min_corner)
        mx = np.asarray(bld.max_corner)
        usable_h = bld.height - min_mount_height
        n_rows = int(math.floor(usable_h / grid_h + 1e-9)) if usable_h > 0 else 0
        for fi, (axis, side, normal) in enumerate(_FACES):
            width_axis = 1 - axis
            width = mx[width_axis] - mn[width_axis]
            n_cols = int(math.floor(width / grid_w + 1e-9))
            plane = mx[axis] if side else mn[axis]
            for r in range(n_rows):
                z = min_mount_height + (r + 0.5) * grid_h
                for c in range(n_cols):
                    w = mn[width_axis] + (c + 0.5) * grid_w
                    pos = [0.0, 0.0, z]
                    pos[axis] = float(plane)
                    pos[width_axis] = float(w)
                    spots.append(
                        CandidateSpot(
                            id=len(spots),
                            position=tuple(pos),
                            facet_normal=normal,
                            building_index=bi,
                            face_index=fi,
                            grid_w=float(grid_w),
                            grid_h=float(grid_h),
                        )
                    )
    return spots


def filter_candidates_by_ap_los(
    spots: list[CandidateSpot], scene: Scene
) -> list[CandidateSpot]:
    """Keep spots that see the AP from their front side, reindexed 0..M-1.

    A spot survives when the AP lies strictly on the outward side of its
    facet and no building blocks the AP-spot segment.  Relative order is
    preserved, so the operation is idempotent apart from the renumbering.
    """
    ap = np.asarray(scene.ap_position)
    kept = []
    for s in spots:
        to_ap = ap - np.asarray(s.position)
        if float(np.dot(np.asarray(s.facet_normal), to_ap)) <= 0.0:
            continue
        if not los_clear(scene.ap_position, s.position, scene):
            continue
        kept.append(replace(s, id=len(kept)))
    return kept


def scatter_street_points(
    area_x: tuple[float, float],
    area_y: tuple[float, float],
    buildings: tuple[Building, ...],
    count: int,
    rng: np.random.Generator,
    *,
    height: float = 1.5,
    min_spacing: float = 2.0,
    max_attempts: int = 200_000,
) -> list[Point3]:
    """Drop points uniformly on the streets (outside every footprint).

    Rejection sampling with a minimum pairwise 2D spacing; deterministic for
    a given generator state.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    pts: list[Point3] = []
    xy = np.empty((0, 2))
    attempts = 0
    while len(pts) < count:
        if attempts >= max_attempts:
            raise RuntimeError(
                f"could not place {count} street points after {max_attempts} draws"
            )
        attempts += 1
        x = float(rng.uniform(area_x[0], area_x[1]))
        y = float(rng.uniform(area_y[0], area_y[1]))
        if any(b.footprint_contains(x, y) for b in buildings):
            continue
        if xy.shape[0] and np.min(np.hypot(xy[:, 0] - x, xy[:, 1] - y)) < min_spacing:
            continue
        pts.append((x, y, float(height)))
        xy = np.vstack([xy, [x, y]])
    return pts
