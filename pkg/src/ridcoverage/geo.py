"""City GeoJSON ingestion, local projection, occupancy grids and receiver sites.

Input datasets are GeoJSON FeatureCollections in WGS84 lon/lat, one per
theme (buildings, vendors, residential land use). Everything downstream works
in a local planar frame in metres, obtained by an equirectangular projection
about the ROI centroid.
"""

from __future__ import annotations

import enum
import json
import logging
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import shapely
from shapely.geometry import Polygon, shape
from shapely.ops import unary_union

from .geometry import Point2
from .rng import RngLike, as_generator

log = logging.getLogger(__name__)

EARTH_RADIUS_M = 6371000.0
FEET_TO_M = 0.3048
DEFAULT_CELL_SIZE_M = 10.0
DEFAULT_HEIGHT_M = 8.0
METERS_PER_LEVEL = 3.0
_SLIVER = 1e-6  # minimum overlap, as a fraction of the cell area


class Theme(str, enum.Enum):
    BUILDINGS = "Buildings"
    VENDORS = "Vendors"
    RESIDENTIAL = "Residential"


class GeoDataError(ValueError):
    """Unreadable or unusable geographic input."""

    def __init__(self, message: str, byte_offset: Optional[int] = None):
        if byte_offset is not None:
            message = f"{message} (at byte {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


def feet_to_meters(feet: float) -> float:
    return float(feet) * FEET_TO_M


# --- parsing ------------------------------------------------------------------


@dataclass
class ThemeData:
    """Features of one theme, still in lon/lat.

    ``geometries`` holds shapely polygons (buildings, residential) or points
    (vendors). ``heights`` is filled for buildings only.
    """

    theme: Theme
    geometries: list = field(default_factory=list)
    heights: list[float] = field(default_factory=list)
    skipped: int = 0
    missing_height: int = 0
    warnings: list[str] = field(default_factory=list)


_NUMBER = re.compile(r"[-+]?\d+(?:\.\d+)?")


def _parse_height(props: dict) -> Optional[float]:
    for key in ("height", "Height", "HEIGHT", "building:height"):
        raw = props.get(key)
        if raw is None:
            continue
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            return float(raw)
        m = _NUMBER.search(str(raw))
        if m:
            value = float(m.group())
            return value * FEET_TO_M if re.search(r"ft|'", str(raw)) else value
    for key in ("building:levels", "levels"):
        raw = props.get(key)
        if raw is None:
            continue
        m = _NUMBER.search(str(raw))
        if m:
            return float(m.group()) * METERS_PER_LEVEL
    return None


def _polygons_of(geom) -> list[Polygon]:
    if geom.geom_type == "Polygon":
        return [geom]
    if geom.geom_type == "MultiPolygon":
        return list(geom.geoms)
    return []


def _load_json(data: Union[bytes, str]):
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise GeoDataError("input is not UTF-8", exc.start) from exc
    else:
        text = data
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise GeoDataError(f"malformed JSON: {exc.msg}", offset) from exc


def parse_theme_geojson(
    data: Union[bytes, str],
    theme: Union[Theme, str],
    default_height: float = DEFAULT_HEIGHT_M,
) -> ThemeData:
    """Parse one themed FeatureCollection.

    Buildings keep polygon parts with a height in metres (``height`` tag,
    else ``building:levels`` times 3 m, else ``default_height``). Vendors
    become one point per feature, polygons via their centroid. Residential
    keeps polygon parts. Features with other geometry types are skipped and
    counted.
    """
    theme = Theme(theme)
    doc = _load_json(data)
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise GeoDataError("expected a GeoJSON FeatureCollection")
    out = ThemeData(theme)
    for i, feat in enumerate(doc.get("features") or []):
        geom_json = (feat or {}).get("geometry")
        props = (feat or {}).get("properties") or {}
        try:
            geom = shape(geom_json) if geom_json else None
        except Exception as exc:  # shapely raises a zoo of types here
            geom = None
            out.warnings.append(f"feature {i}: invalid geometry ({exc})")
        if geom is None or geom.is_empty:
            out.skipped += 1
            if geom_json is None:
                out.warnings.append(f"feature {i}: no geometry")
            continue
        gtype = geom.geom_type
        if theme is Theme.VENDORS:
            if gtype == "Point":
                out.geometries.append(geom)
            elif gtype == "MultiPoint":
                out.geometries.extend(geom.geoms)
            elif gtype in ("Polygon", "MultiPolygon"):
                out.geometries.append(geom.centroid)
            else:
                out.skipped += 1
                out.warnings.append(f"feature {i}: unsupported {gtype} for {theme.value}")
            continue
        parts = _polygons_of(geom)
        if not parts:
            out.skipped += 1
            out.warnings.append(f"feature {i}: unsupported {gtype} for {theme.value}")
            continue
        if theme is Theme.BUILDINGS:
            h = _parse_height(props)
            if h is None or not math.isfinite(h) or h < 0:
                h = float(default_height)
                out.missing_height += 1
                out.warnings.append(f"feature {i}: missing height, using {default_height} m")
            for p in parts:
                out.geometries.append(p)
                out.heights.append(h)
        else:
            out.geometries.extend(parts)
    if out.skipped:
        log.warning("%s: skipped %d feature(s)", theme.value, out.skipped)
    return out


# --- projection -------------------------------------------------------------------


def project_to_local(lon, lat, reference: tuple[float, float]):
    """Equirectangular projection about ``reference = (lon, lat)``; returns metres."""
    lon0, lat0 = reference
    if abs(lat0) >= 85.0 or np.any(np.abs(np.asarray(lat)) >= 85.0):
        raise ValueError("latitude must satisfy |lat| < 85 degrees")
    k = math.cos(math.radians(lat0))
    x = EARTH_RADIUS_M * np.radians(np.asarray(lon, dtype=float) - lon0) * k
    y = EARTH_RADIUS_M * np.radians(np.asarray(lat, dtype=float) - lat0)
    if np.ndim(x) == 0:
        return Point2(float(x), float(y))
    return x, y


def unproject_from_local(x, y, reference: tuple[float, float]):
    lon0, lat0 = reference
    k = math.cos(math.radians(lat0))
    lon = lon0 + np.degrees(np.asarray(x, dtype=float) / (EARTH_RADIUS_M * k))
    lat = lat0 + np.degrees(np.asarray(y, dtype=float) / EARTH_RADIUS_M)
    if np.ndim(lon) == 0:
        return float(lon), float(lat)
    return lon, lat


def project_geometry(geom, reference: tuple[float, float]):
    def f(coords):
        x, y = project_to_local(coords[:, 0], coords[:, 1], reference)
        return np.column_stack([x, y])

    return shapely.transform(geom, f)


def unproject_geometry(geom, reference: tuple[float, float]):
    def f(coords):
        lon, lat = unproject_from_local(coords[:, 0], coords[:, 1], reference)
        return np.column_stack([lon, lat])

    return shapely.transform(geom, f)


# --- domain types -----------------------------------------------------------------


@dataclass(frozen=True)
class BuildingFootprint:
    """Projected footprint (exterior ring only) and height in metres."""

    polygon: Polygon
    height: float

    @property
    def centroid(self) -> Point2:
        c = self.polygon.centroid
        return Point2(c.x, c.y)


@dataclass(frozen=True)
class RegionOfInterest:
    boundary: Polygon
    obstacle_hull: Polygon

    @classmethod
    def from_boundary(cls, boundary) -> "RegionOfInterest":
        if not boundary.is_valid:
            raise GeoDataError("ROI boundary is self-intersecting or otherwise invalid")
        if boundary.geom_type == "MultiPolygon":
            boundary = max(boundary.geoms, key=lambda g: g.area)
        return cls(boundary, boundary.convex_hull)


@dataclass(frozen=True)
class OccupancyGrid:
    """Boolean obstacle raster; ``cells[row, col]`` with row 0 at ``origin.y``."""

    origin: Point2
    cell_size: float
    width: int
    height: int
    altitude_ft: float
    cells: np.ndarray

    @property
    def altitude_m(self) -> float:
        return feet_to_meters(self.altitude_ft)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        x0, y0 = self.origin
        return x0, y0, x0 + self.width * self.cell_size, y0 + self.height * self.cell_size

    def cell_index(self, xy) -> tuple[np.ndarray, np.ndarray]:
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        col = np.floor((xy[:, 0] - self.origin.x) / self.cell_size).astype(np.int64)
        row = np.floor((xy[:, 1] - self.origin.y) / self.cell_size).astype(np.int64)
        return row, col

    def is_free(self, xy) -> np.ndarray:
        """Free-cell test; points outside the grid are not free."""
        row, col = self.cell_index(xy)
        inside = (row >= 0) & (row < self.height) & (col >= 0) & (col < self.width)
        free = np.zeros(row.shape, dtype=bool)
        free[inside] = ~self.cells[row[inside], col[inside]]
        return free

    def header(self) -> dict:
        return {
            "origin": [self.origin.x, self.origin.y],
            "cell_size": self.cell_size,
            "width": self.width,
            "height": self.height,
            "altitude_ft": self.altitude_ft,
            "altitude_m": self.altitude_m,
            "occupied_cells": int(self.cells.sum()),
        }

    def to_pgm(self) -> str:
        """Plain (P2) PGM, north row first; obstacles black (0), free white (1)."""
        lines = ["P2", f"# altitude_ft {self.altitude_ft} cell_size {self.cell_size}", f"{self.width} {self.height}", "1"]
        for row in self.cells[::-1]:
            lines.append(" ".join("0" if c else "1" for c in row))
        return "\n".join(lines) + "\n"


def build_occupancy_grid(
    buildings: Sequence[BuildingFootprint],
    roi: RegionOfInterest,
    altitude_ft: float,
    cell_size: float = DEFAULT_CELL_SIZE_M,
) -> OccupancyGrid:
    """Rasterise buildings at least as tall as the cruise altitude.

    A cell is occupied iff a qualifying footprint overlaps it with positive
    area; footprints that merely touch a cell edge, or overlap it by a
    round-off sliver, do not count.
    """
    if cell_size <= 0:
        raise ValueError("cell_size must be positive")
    minx, miny, maxx, maxy = roi.obstacle_hull.bounds
    # slack absorbs projection round-off on extents that are exact multiples
    width = max(1, int(math.ceil((maxx - minx) / cell_size - 1e-9)))
    height = max(1, int(math.ceil((maxy - miny) / cell_size - 1e-9)))
    cells = np.zeros((height, width), dtype=bool)
    alt_m = feet_to_meters(altitude_ft)
    for b in buildings:
        if b.height < alt_m:
            continue
        bx0, by0, bx1, by1 = b.polygon.bounds
        c0 = max(int(math.floor((bx0 - minx) / cell_size)), 0)
        c1 = min(int(math.floor((bx1 - minx) / cell_size)), width - 1)
        r0 = max(int(math.floor((by0 - miny) / cell_size)), 0)
        r1 = min(int(math.floor((by1 - miny) / cell_size)), height - 1)
        if c1 < c0 or r1 < r0:
            continue
        rr, cc = np.mgrid[r0 : r1 + 1, c0 : c1 + 1]
        rr, cc = rr.ravel(), cc.ravel()
        boxes = shapely.box(minx + cc * cell_size, miny + rr * cell_size, minx + (cc + 1) * cell_size, miny + (rr + 1) * cell_size)
        poly = b.polygon
        shapely.prepare(poly)
        hit = shapely.intersects(poly, boxes) & ~shapely.touches(poly, boxes)
        # drop slivers left by projection round-off along cell edges
        idx = np.flatnonzero(hit)
        hit[idx] = shapely.area(shapely.intersection(poly, boxes[idx])) > _SLIVER * cell_size**2
        cells[rr[hit], cc[hit]] = True
    return OccupancyGrid(Point2(minx, miny), float(cell_size), width, height, float(altitude_ft), cells)


def candidate_receiver_sites(buildings: Sequence[BuildingFootprint]) -> np.ndarray:
    """Area-weighted footprint centroids, shape ``(n, 2)``."""
    if not buildings:
        return np.zeros((0, 2))
    return np.array([b.centroid for b in buildings], dtype=float)


def sample_customers(residential: Sequence[Polygon], n: int, rng: RngLike) -> np.ndarray:
    """``n`` points uniform over the union of residential polygons.

    Chooses a polygon with probability proportional to its area, then
    rejection-samples inside that polygon's bounding box. Returns ``(n, 2)``.
    """
    if n <= 0:
        return np.zeros((0, 2))
    polys = [p for p in residential if p.area > 0]
    areas = np.array([p.area for p in polys], dtype=float)
    if not polys or areas.sum() <= 0:
        raise GeoDataError("residential polygons have zero total area")
    gen = as_generator(rng)
    choice = gen.choice(len(polys), size=n, p=areas / areas.sum())
    out = np.empty((n, 2))
    for i in np.unique(choice):
        poly = polys[i]
        shapely.prepare(poly)
        slots = np.flatnonzero(choice == i)
        need = slots.size
        x0, y0, x1, y1 = poly.bounds
        batch = max(16, int(2 * need * (x1 - x0) * (y1 - y0) / poly.area))
        got = []
        while need > 0:
            cand = gen.uniform((x0, y0), (x1, y1), size=(batch, 2))
            ok = cand[shapely.contains_xy(poly, cand[:, 0], cand[:, 1])][:need]
            got.append(ok)
            need -= ok.shape[0]
        out[slots] = np.concatenate(got)
    return out


def points_in_polygons(points: np.ndarray, polygons: Sequence[Polygon]) -> np.ndarray:
    """Mask of points covered by at least one polygon (boundary included)."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if not polygons:
        return np.zeros(points.shape[0], dtype=bool)
    union = unary_union(list(polygons))
    shapely.prepare(union)
    return shapely.intersects_xy(union, points[:, 0], points[:, 1])


# --- whole-city loading -----------------------------------------------------------


@dataclass
class CityData:
    """Projected city: ROI, buildings, vendors, customers and receiver sites."""

    reference: tuple[float, float]
    roi: RegionOfInterest
    buildings: list[BuildingFootprint]
    vendors: np.ndarray
    customers: np.ndarray
    residential: list[Polygon]
    cell_size: float = DEFAULT_CELL_SIZE_M
    warnings: list[str] = field(default_factory=list)
    _grids: dict = field(default_factory=dict, repr=False)

    @cached_property
    def sites(self) -> np.ndarray:
        return candidate_receiver_sites(self.buildings)

    def grid(self, altitude_ft: float) -> OccupancyGrid:
        key = float(altitude_ft)
        if key not in self._grids:
            self._grids[key] = build_occupancy_grid(self.buildings, self.roi, key, self.cell_size)
        return self._grids[key]


def _read(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise GeoDataError(f"cannot read {path}: {exc.strerror or exc}") from exc


def build_city(
    buildings: ThemeData,
    vendors: ThemeData,
    residential: ThemeData,
    roi_lonlat=None,
    n_customers: int = 1000,
    rng: RngLike = 0,
    cell_size: float = DEFAULT_CELL_SIZE_M,
) -> CityData:
    """Assemble a projected :class:`CityData` from parsed themes.

    Without an explicit ROI the boundary is the convex hull of the vendor and
    residential geometry. Vendors outside the boundary are dropped, customers
    are sampled inside residential land clipped to the boundary, and
    buildings are kept when they touch the boundary's convex hull.
    """
    if roi_lonlat is None:
        pieces = list(vendors.geometries) + list(residential.geometries)
        if not pieces:
            raise GeoDataError("cannot infer an ROI without vendors or residential areas")
        roi_lonlat = unary_union(pieces).convex_hull
    c = roi_lonlat.centroid
    reference = (c.x, c.y)
    roi = RegionOfInterest.from_boundary(project_geometry(roi_lonlat, reference))
    if roi.boundary.area <= 0:
        raise GeoDataError("ROI has zero area")

    hull = roi.obstacle_hull
    shapely.prepare(hull)
    foot = []
    for g, h in zip(buildings.geometries, buildings.heights):
        p = Polygon(project_geometry(g, reference).exterior)
        if p.is_empty or p.area <= 0:
            continue
        if not p.is_valid:
            p = p.buffer(0)
            if p.geom_type != "Polygon":
                continue
        if hull.intersects(p):
            foot.append(BuildingFootprint(p, float(h)))

    boundary = roi.boundary
    shapely.prepare(boundary)
    if vendors.geometries:
        v = np.array([project_to_local(p.x, p.y, reference) for p in vendors.geometries], dtype=float)
        v = v[shapely.intersects_xy(boundary, v[:, 0], v[:, 1])]
    else:
        v = np.zeros((0, 2))

    res = []
    for g in residential.geometries:
        clipped = project_geometry(g, reference)
        if not clipped.is_valid:
            clipped = clipped.buffer(0)
        clipped = clipped.intersection(boundary)
        res.extend(_polygons_of(clipped))
    customers = sample_customers(res, n_customers, rng)

    warnings = buildings.warnings + vendors.warnings + residential.warnings
    return CityData(reference, roi, foot, v, customers, res, float(cell_size), warnings)


def load_city(
    buildings_path,
    vendors_path,
    residential_path,
    roi_path=None,
    n_customers: int = 1000,
    rng: RngLike = 0,
    cell_size: float = DEFAULT_CELL_SIZE_M,
    default_height: float = DEFAULT_HEIGHT_M,
) -> CityData:
    b = parse_theme_geojson(_read(buildings_path), Theme.BUILDINGS, default_height)
    v = parse_theme_geojson(_read(vendors_path), Theme.VENDORS)
    r = parse_theme_geojson(_read(residential_path), Theme.RESIDENTIAL)
    roi = None
    if roi_path is not None:
        roi = load_roi_lonlat(roi_path)
    return build_city(b, v, r, roi, n_customers, rng, cell_size)


def load_roi_lonlat(path):
    """Union of all polygon features in a GeoJSON file (lon/lat)."""
    doc = _load_json(_read(path))
    if doc.get("type") == "FeatureCollection":
        geoms = [shape(f["geometry"]) for f in doc.get("features", []) if f.get("geometry")]
    elif doc.get("type") == "Feature":
        geoms = [shape(doc["geometry"])]
    else:
        geoms = [shape(doc)]
    polys = [p for g in geoms for p in _polygons_of(g)]
    if not polys:
        raise GeoDataError(f"{path}: no polygon in ROI file")
    return unary_union(polys)
