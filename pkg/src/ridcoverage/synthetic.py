"""Synthetic city datasets with hand-checkable geometry.

Builds the three themed GeoJSON FeatureCollections (plus an ROI polygon) for a
square city laid out in local metres and expressed in lon/lat about a
reference point, so they go through exactly the same ingestion path as real
data.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .geo import unproject_from_local
from .rng import RngLike, as_generator

SF_REFERENCE = (-122.4194, 37.7749)


def _ring(x0, y0, x1, y1, reference):
    xs = [x0, x1, x1, x0, x0]
    ys = [y0, y0, y1, y1, y0]
    lon, lat = unproject_from_local(np.array(xs, float), np.array(ys, float), reference)
    return [[float(a), float(b)] for a, b in zip(lon, lat)]


def _poly_feature(x0, y0, x1, y1, reference, props=None):
    return {
        "type": "Feature",
        "properties": props or {},
        "geometry": {"type": "Polygon", "coordinates": [_ring(x0, y0, x1, y1, reference)]},
    }


def _point_feature(x, y, reference, props=None):
    lon, lat = unproject_from_local(x, y, reference)
    return {"type": "Feature", "properties": props or {}, "geometry": {"type": "Point", "coordinates": [lon, lat]}}


def _collection(features):
    return {"type": "FeatureCollection", "features": features}


def synthetic_city(
    size_m: float = 2000.0,
    spacing_m: float = 100.0,
    building_m: float = 40.0,
    heights_m: Sequence[float] = (10.0, 30.0, 70.0, 130.0),
    n_vendors: int = 12,
    residential_margin_m: float = 100.0,
    reference: tuple[float, float] = SF_REFERENCE,
    jitter_m: float = 0.0,
    rng: RngLike = 0,
) -> dict:
    """Square city centred on ``reference``.

    * Buildings: squares of side ``building_m`` on a regular grid of pitch
      ``spacing_m``, heights cycling through ``heights_m``.
    * Vendors: ``n_vendors`` points on a ring at 30 % of the half-size (one of
      them as a small polygon, to exercise centroid handling).
    * Residential: four quadrant blocks inset by ``residential_margin_m``.
    * ROI: the full square.

    ``jitter_m`` displaces building centres uniformly by up to that amount.
    """
    half = size_m / 2.0
    gen = as_generator(rng)
    buildings = []
    coords = np.arange(-half + spacing_m / 2.0, half, spacing_m)
    k = 0
    for y in coords:
        for x in coords:
            if jitter_m:
                x, y = np.array([x, y]) + gen.uniform(-jitter_m, jitter_m, 2)
            h = heights_m[k % len(heights_m)]
            s = building_m / 2.0
            buildings.append(_poly_feature(x - s, y - s, x + s, y + s, reference, {"height": h}))
            k += 1

    vendors = []
    angles = np.linspace(0.0, 2 * np.pi, n_vendors, endpoint=False)
    for i, a in enumerate(angles):
        # between building rows so vendors sit on streets
        vx, vy = 0.3 * half * np.cos(a), 0.3 * half * np.sin(a)
        vx = np.round(vx / spacing_m) * spacing_m
        vy = np.round(vy / spacing_m) * spacing_m
        if i == 0:
            vendors.append(_poly_feature(vx - 5, vy - 5, vx + 5, vy + 5, reference, {"name": "mall"}))
        else:
            vendors.append(_point_feature(vx, vy, reference, {"name": f"store {i}"}))

    m = residential_margin_m
    residential = [
        _poly_feature(-half + m, -half + m, -m, -m, reference),
        _poly_feature(m, -half + m, half - m, -m, reference),
        _poly_feature(-half + m, m, -m, half - m, reference),
        _poly_feature(m, m, half - m, half - m, reference),
    ]
    roi = [_poly_feature(-half, -half, half, half, reference, {"name": "roi"})]
    return {
        "buildings": _collection(buildings),
        "vendors": _collection(vendors),
        "residential": _collection(residential),
        "roi": _collection(roi),
    }


def write_city(directory, collections: dict, prefix: str = "") -> dict:
    """Write each collection to ``<directory>/<prefix><name>.geojson``; returns paths."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, doc in collections.items():
        p = d / f"{prefix}{name}.geojson"
        p.write_text(json.dumps(doc))
        paths[name] = p
    return paths


def disk_roi(radius_m: float, reference: tuple[float, float] = SF_REFERENCE, n: int = 256) -> dict:
    """Regular ``n``-gon circumscribing a circle of ``radius_m``, as an ROI collection."""
    ang = np.linspace(0.0, 2 * np.pi, n, endpoint=False) + np.pi / n
    r = radius_m / np.cos(np.pi / n)
    lon, lat = unproject_from_local(r * np.cos(ang), r * np.sin(ang), reference)
    ring = [[float(a), float(b)] for a, b in zip(lon, lat)]
    ring.append(ring[0])
    return _collection([{"type": "Feature", "properties": {}, "geometry": {"type": "Polygon", "coordinates": [ring]}}])


def write_synthetic_city(directory, prefix: str = "", extra: Optional[dict] = None, **kwargs) -> dict:
    docs = synthetic_city(**kwargs)
    if extra:
        docs.update(extra)
    return write_city(directory, docs, prefix)
