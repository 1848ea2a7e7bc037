"""Nominatim-compatible geocoding client.

Builds deterministic search queries (country and viewbox filters), fetches
GeoJSON boundaries, and layers an append-only persistent cache plus a
global rate gate (politeness: live request starts are at least one second
apart, regardless of caller concurrency) on top of the transport.

Transports are pluggable: live HTTP, replay from recorded fixtures, or a
recording wrapper that captures live traffic for later replay.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional, Protocol
from urllib.parse import quote_plus

import httpx
from pydantic import Field, field_validator

from . import geometry
from .errors import FixtureMissingError, ParseError, TransportError
from .model import BoundingBox, Frozen, GeoShape, ShapeKind, shape_from_geojson

DEFAULT_BASE_URL = "https://nominatim.openstreetmap.org"
DEFAULT_USER_AGENT = "mapmotion/0.1 (script-driven map animation authoring; contact: ops@mapmotion.dev)"
DEFAULT_TTL_HOURS = 24.0
MIN_REQUEST_INTERVAL_S = 1.0


class GeocodeRequest(Frozen):
    query: str = Field(min_length=1)
    country_codes: Optional[tuple[str, ...]] = None
    viewbox: Optional[BoundingBox] = None
    bounded: bool = False
    want_polygon: bool = True

    @field_validator("country_codes")
    @classmethod
    def _codes(cls, v: Optional[tuple[str, ...]]) -> Optional[tuple[str, ...]]:
        if v is None:
            return v
        for code in v:
            if len(code) != 2 or not code.isalpha() or code != code.lower():
                raise ValueError(f"country code {code!r} must be two lowercase letters")
        return v


class GeocodeResult(Frozen):
    display_name: str
    shape: GeoShape
    importance: float = 0.0
    osm_type: str = ""
    osm_id: str = ""
    fetched_at: float = 0.0


def _coord(value: float) -> str:
    return format(value, "g")


def build_query(req: GeocodeRequest) -> str:
    """Deterministic percent-encoded parameter string, fixed parameter
    order: q, format, polygon_geojson, countrycodes, viewbox, bounded.
    Viewbox serializes as lon1,lat1,lon2,lat2."""
    parts = [f"q={quote_plus(req.query)}", "format=geojson"]
    if req.want_polygon:
        parts.append("polygon_geojson=1")
    if req.country_codes:
        parts.append("countrycodes=" + ",".join(req.country_codes))
    if req.viewbox is not None:
        vb = req.viewbox
        parts.append(
            "viewbox=" + ",".join(_coord(v) for v in (vb.min.lon, vb.min.lat, vb.max.lon, vb.max.lat))
        )
    if req.bounded:
        parts.append("bounded=1")
    return "&".join(parts)


def request_to_doc(req: GeocodeRequest) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "query": req.query,
        "country_codes": list(req.country_codes) if req.country_codes else None,
        "viewbox": None,
        "bounded": req.bounded,
        "want_polygon": req.want_polygon,
    }
    if req.viewbox is not None:
        doc["viewbox"] = {
            "min": {"lat": req.viewbox.min.lat, "lon": req.viewbox.min.lon},
            "max": {"lat": req.viewbox.max.lat, "lon": req.viewbox.max.lon},
        }
    return doc


def request_from_doc(doc: dict[str, Any]) -> GeocodeRequest:
    viewbox = None
    if doc.get("viewbox"):
        vb = doc["viewbox"]
        viewbox = BoundingBox(
            min={"lat": vb["min"]["lat"], "lon": vb["min"]["lon"]},
            max={"lat": vb["max"]["lat"], "lon": vb["max"]["lon"]},
        )
    codes = doc.get("country_codes")
    return GeocodeRequest(
        query=doc["query"],
        country_codes=tuple(codes) if codes else None,
        viewbox=viewbox,
        bounded=doc.get("bounded", False),
        want_polygon=doc.get("want_polygon", True),
    )


def fixture_key(query_string: str) -> str:
    return hashlib.sha256(query_string.encode("utf-8")).hexdigest()[:24]


# ---------------------------------------------------------------------------
# Transports and rate limiting
# ---------------------------------------------------------------------------


class GeocodeTransport(Protocol):
    requires_rate_limit: bool

    def fetch(self, query_string: str) -> str:
        """Raw response body for a /search query string."""
        ...  # pragma: no cover


class RateGate:
    """Serializes request starts at least min_interval seconds apart."""

    def __init__(
        self,
        min_interval_s: float = MIN_REQUEST_INTERVAL_S,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.min_interval_s = min_interval_s
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._last: float | None = None

    def wait(self) -> None:
        with self._lock:
            now = self._clock()
            if self._last is not None and now - self._last < self.min_interval_s:
                self._sleep(self.min_interval_s - (now - self._last))
                now = self._clock()
            self._last = now


GLOBAL_RATE_GATE = RateGate()


class HttpGeocodeTransport:
    requires_rate_limit = True

    def __init__(self, base_url: str = DEFAULT_BASE_URL, user_agent: str = DEFAULT_USER_AGENT, timeout_s: float = 30.0):
        if not user_agent:
            raise ValueError("a descriptive user agent is mandatory for the geocoding service")
        self.base_url = base_url.rstrip("/")
        self.user_agent = user_agent
        self.timeout_s = timeout_s

    def fetch(self, query_string: str) -> str:
        url = f"{self.base_url}/search?{query_string}"
        try:
            resp = httpx.get(url, headers={"User-Agent": self.user_agent}, timeout=self.timeout_s)
        except httpx.HTTPError as exc:
            raise TransportError(f"geocoder transport failure: {exc}") from exc
        if resp.status_code != 200:
            raise TransportError(f"geocoder returned status {resp.status_code}")
        return resp.text


class FixtureGeocodeTransport:
    """Replays recorded responses from fixtures/geocoder/<key>.json."""

    requires_rate_limit = False

    def __init__(self, fixtures_dir: Path | str):
        self.dir = Path(fixtures_dir)

    def path_for(self, query_string: str) -> Path:
        return self.dir / f"{fixture_key(query_string)}.json"

    def fetch(self, query_string: str) -> str:
        path = self.path_for(query_string)
        if not path.exists():
            raise FixtureMissingError(fixture_key(query_string), str(path))
        return path.read_text(encoding="utf-8")


class RecordingGeocodeTransport:
    def __init__(self, inner: GeocodeTransport, fixtures_dir: Path | str):
        self.inner = inner
        self.dir = Path(fixtures_dir)

    @property
    def requires_rate_limit(self) -> bool:
        return getattr(self.inner, "requires_rate_limit", True)

    def fetch(self, query_string: str) -> str:
        body = self.inner.fetch(query_string)
        self.dir.mkdir(parents=True, exist_ok=True)
        (self.dir / f"{fixture_key(query_string)}.json").write_text(body, encoding="utf-8")
        return body


# ---------------------------------------------------------------------------
# Client
# ---------------------------------------------------------------------------


@dataclass
class _CacheEntry:
    fetched_at: float
    body: str


class NominatimClient:
    """Shareable across threads: cache reads are concurrent, writes are
    serialized, and the rate gate is a single token gate."""

    def __init__(
        self,
        transport: GeocodeTransport | None = None,
        cache_path: Path | str | None = None,
        ttl_hours: float | None = None,
        clock: Callable[[], float] = time.time,
        rate_gate: RateGate | None = None,
    ):
        self.transport = transport or HttpGeocodeTransport(
            base_url=os.environ.get("GEOCODER_BASE_URL", DEFAULT_BASE_URL),
            user_agent=os.environ.get("GEOCODER_USER_AGENT", DEFAULT_USER_AGENT),
        )
        if ttl_hours is None:
            ttl_hours = float(os.environ.get("GEOCODER_CACHE_TTL_HOURS", DEFAULT_TTL_HOURS))
        self.ttl_s = ttl_hours * 3600.0
        self.clock = clock
        self.rate_gate = rate_gate if rate_gate is not None else GLOBAL_RATE_GATE
        self.cache_path = Path(cache_path) if cache_path else None
        self._cache: dict[str, _CacheEntry] = {}
        self._cache_lock = threading.Lock()
        if self.cache_path and self.cache_path.exists():
            self._load_cache()

    def _load_cache(self) -> None:
        assert self.cache_path is not None
        for line in self.cache_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                self._cache[record["key"]] = _CacheEntry(record["fetched_at"], record["body"])
            except (json.JSONDecodeError, KeyError):
                continue  # a torn tail record must not poison the cache

    def _store(self, key: str, body: str, fetched_at: float) -> None:
        with self._cache_lock:
            self._cache[key] = _CacheEntry(fetched_at, body)
            if self.cache_path:
                self.cache_path.parent.mkdir(parents=True, exist_ok=True)
                with self.cache_path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps({"key": key, "fetched_at": fetched_at, "body": body}) + "\n")

    def geocode(self, req: GeocodeRequest) -> list[GeocodeResult]:
        """Results sorted by importance descending; an exact-request cache
        hit inside the TTL performs no transport call; zero matches yield
        an empty list, not an error."""
        key = build_query(req)
        now = self.clock()
        entry = self._cache.get(key)
        if entry is not None and now - entry.fetched_at < self.ttl_s:
            return parse_results(entry.body, entry.fetched_at)
        if getattr(self.transport, "requires_rate_limit", True):
            self.rate_gate.wait()
        body = self.transport.fetch(key)
        fetched_at = self.clock()
        results = parse_results(body, fetched_at)  # parse before caching a bad body
        self._store(key, body, fetched_at)
        return results


def parse_results(body: str, fetched_at: float) -> list[GeocodeResult]:
    try:
        data = json.loads(body)
    except json.JSONDecodeError as exc:
        raise ParseError(f"geocoder response is not valid JSON: {exc}", raw=body) from exc
    if not isinstance(data, dict) or data.get("type") != "FeatureCollection":
        raise ParseError("geocoder response is not a FeatureCollection", raw=body)
    results = []
    for feature in data.get("features", []):
        props = feature.get("properties", {})
        shape = shape_from_geojson(feature.get("geometry", {}))
        results.append(
            GeocodeResult(
                display_name=str(props.get("display_name", "")),
                shape=shape,
                importance=float(props.get("importance", 0.0)),
                osm_type=str(props.get("osm_type", "")),
                osm_id=str(props.get("osm_id", "")),
                fetched_at=fetched_at,
            )
        )
    results.sort(key=lambda r: -r.importance)
    return results


def pick_best(results: list[GeocodeResult]) -> GeocodeResult | None:
    """Selection policy when an agent needs exactly one match: highest
    importance, ties broken by largest polygon area, then lexicographic
    display name."""
    if not results:
        return None

    def sort_key(r: GeocodeResult):
        area = 0.0
        if r.shape.kind in (ShapeKind.polygon, ShapeKind.multipolygon):
            area = geometry.area_km2(r.shape)
        return (-r.importance, -area, r.display_name)

    return min(results, key=sort_key)
