"""Author the replay fixtures for the test scripts.

The build environment has no network access to chat providers or the
geocoding service, so the recorded fixtures are authored here instead of
captured from live traffic. Everything still flows through the real agent
code paths: an authoring gateway answers each canonical request (writing
the fixture file keyed by the request hash exactly as record mode would)
and the geocoder replays authored boundary documents. Rerunning this tool
after a prompt change refreshes every fixture key.

Usage: python tools/make_fixtures.py
"""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from mapmotion.app import Engine  # noqa: E402
from mapmotion.gateway import Gateway, GatewayConfig, parse_provider_response  # noqa: E402
from mapmotion.geocoder import FixtureGeocodeTransport, NominatimClient, RateGate, build_query, GeocodeRequest  # noqa: E402
from mapmotion.geometry import haversine_km  # noqa: E402
from mapmotion.model import GeoPoint  # noqa: E402
from mapmotion.project import fixed_clock  # noqa: E402
from mapmotion.store import ProjectStore  # noqa: E402

FIXTURES = ROOT / "fixtures"
DATA = ROOT / "tests" / "data"
SCRIPTS = DATA / "scripts"

MACE_SCRIPT = (
    "Let's follow the journey of the ceremonial mace starting its delivery sail "
    "from London, going through the Atlantic Ocean, entering North America "
    "through the St. Lawrence Seaway, and finally reaching Toronto."
)
COLUMBUS_SCRIPT = (
    "In 1492, Christopher Columbus set sail from Palos, Spain, and after weeks "
    "at sea, he arrived in the Bahamas, forever altering world history."
)
ANDHRA_SCRIPT = "Highlight the region of Andhra Pradesh as it existed before 2014."
ROCKIES_SCRIPT = (
    "Very few people live in the interior of the western United States. Show "
    "the Rocky Mountains and highlight the range."
)
BUILDING_SCRIPT = "Zoom to the Ontario Legislative Building in Toronto and mark it on the map."

CHAT_REDUCTION = "remove the Canadian part"
CHAT_INFO = "what year was the building constructed?"

MACE_ROUTE = [
    (51.5074, -0.1278),
    (49.5, -8.0),
    (47.0, -20.0),
    (45.5, -33.0),
    (45.0, -45.0),
    (46.5, -52.5),
    (47.5, -60.0),
    (48.2, -69.5),
    (46.8, -71.2),
    (45.5, -73.55),
    (44.2, -76.5),
    (43.6532, -79.3832),
]

COLUMBUS_ROUTE = [
    (37.22, -7.08),
    (33.0, -16.0),
    (28.1, -15.4),
    (26.5, -30.0),
    (25.5, -45.0),
    (24.5, -60.0),
    (24.0, -74.5),
]


# ---------------------------------------------------------------------------
# Authored geocoder documents
# ---------------------------------------------------------------------------


def feature(display_name, geometry, importance, osm_type="relation", osm_id="1"):
    return {
        "type": "Feature",
        "properties": {
            "display_name": display_name,
            "importance": importance,
            "osm_type": osm_type,
            "osm_id": osm_id,
        },
        "geometry": geometry,
        "bbox": None,
    }


def point(lat, lon):
    return {"type": "Point", "coordinates": [lon, lat]}


def box_polygon(lat0, lon0, lat1, lon1):
    return {
        "type": "Polygon",
        "coordinates": [[[lon0, lat0], [lon1, lat0], [lon1, lat1], [lon0, lat1], [lon0, lat0]]],
    }


GEOCODER_DOCS: list[tuple[GeocodeRequest, list]] = [
    (GeocodeRequest(query="London", want_polygon=False), [feature("London, Greater London, England, United Kingdom", point(51.5074, -0.1278), 0.86, "relation", "65606")]),
    (GeocodeRequest(query="Toronto", want_polygon=False), [feature("Toronto, Golden Horseshoe, Ontario, Canada", point(43.6532, -79.3832), 0.81, "relation", "324211")]),
    (GeocodeRequest(query="Toronto"), [feature("Toronto, Golden Horseshoe, Ontario, Canada", box_polygon(43.58, -79.64, 43.86, -79.11), 0.81, "relation", "324211")]),
    (GeocodeRequest(query="Andhra Pradesh, India", want_polygon=False), [feature("Andhra Pradesh, India", point(15.9129, 79.74), 0.64, "relation", "2022095")]),
    (GeocodeRequest(query="Telangana, India"), [feature("Telangana, India", box_polygon(15.8, 77.2, 19.9, 81.3), 0.62, "relation", "3250963")]),
    (GeocodeRequest(query="Andhra Pradesh, India"), [feature("Andhra Pradesh, India", box_polygon(12.6, 77.2, 15.8, 84.7), 0.64, "relation", "2022095")]),
    (GeocodeRequest(query="Rocky Mountains", want_polygon=False), [feature("Rocky Mountains, North America", point(43.0, -110.0), 0.71, "relation", "9253973")]),
    (GeocodeRequest(query="Rocky Mountains"), [feature("Rocky Mountains, North America", box_polygon(35.0, -118.0, 55.0, -105.0), 0.71, "relation", "9253973")]),
    (GeocodeRequest(query="Canada"), [feature("Canada", box_polygon(49.0, -141.0, 70.0, -52.0), 0.93, "relation", "1428125")]),
    (GeocodeRequest(query="Ontario Legislative Building", want_polygon=False), [feature("Ontario Legislative Building, Queen's Park, Toronto, Ontario, Canada", point(43.6626, -79.3918), 0.44, "way", "28508545")]),
]


# ---------------------------------------------------------------------------
# Authored chat responses
# ---------------------------------------------------------------------------


def tool_response(name, arguments, text=None):
    body = {
        "choices": [
            {
                "message": {
                    "role": "assistant",
                    "content": text,
                    "tool_calls": [
                        {
                            "id": "call_0",
                            "type": "function",
                            "function": {"name": name, "arguments": json.dumps(arguments, sort_keys=True)},
                        }
                    ],
                }
            }
        ],
        "usage": {"prompt_tokens": 1200, "completion_tokens": 180},
    }
    return json.dumps(body, sort_keys=True)


def text_response(text):
    body = {
        "choices": [{"message": {"role": "assistant", "content": text}}],
        "usage": {"prompt_tokens": 900, "completion_tokens": 60},
    }
    return json.dumps(body, sort_keys=True)


def breakdown_items(*items):
    payload = [
        {"id": "", "kind": kind, "short_description": short, "long_description": long}
        for kind, short, long in items
    ]
    return tool_response("emit_breakdown", {"items": payload})


def waypoint_text(route):
    return "; ".join(f"({lat}, {lon})" for lat, lon in route)


BREAKDOWNS = {
    "ceremonial mace": breakdown_items(
        (
            "camera_zoom",
            "Zoom to London, where the mace's journey begins.",
            "Fly the camera to London, United Kingdom (51.5074, -0.1278). Geocode query: 'London'. Zoom level 10.",
        ),
        (
            "element_route",
            "Animate the mace's delivery sail across the Atlantic to Toronto.",
            "Generate a sea route from London across the Atlantic Ocean, in through the Gulf of St. Lawrence and the seaway, "
            f"ending at Toronto harbour. Waypoint sketch: {waypoint_text(MACE_ROUTE)}. About 8 seconds.",
        ),
        (
            "camera_zoom",
            "Zoom to Toronto, the mace's destination.",
            "Fly the camera to Toronto, Canada (43.6532, -79.3832). Geocode query: 'Toronto'. Zoom level 10.",
        ),
        (
            "highlight_area",
            "Highlight the city of Toronto.",
            "Fetch the municipal boundary polygon for geocode query 'Toronto' and shade it. About 4 seconds.",
        ),
    ),
    "Columbus": breakdown_items(
        (
            "camera_zoom",
            "Zoom to Palos de la Frontera, Spain, the expedition's port of departure.",
            "Fly the camera to Palos de la Frontera (37.22, -7.08). Geocode query: 'Palos de la Frontera'. Zoom level 9.",
        ),
        (
            "element_route",
            "Animate the 1492 voyage across the Atlantic to the Bahamas.",
            f"Generate a sea route from Palos via the Canary Islands to the Bahamas. Waypoint sketch: {waypoint_text(COLUMBUS_ROUTE)}. About 10 seconds.",
        ),
        (
            "camera_zoom",
            "Zoom to the Bahamas landfall.",
            "Fly the camera to San Salvador Island, Bahamas (24.0, -74.5). Zoom level 8.",
        ),
        (
            "highlight_point",
            "Mark the landfall site in the Bahamas.",
            "Drop a marker at the 1492 landfall, San Salvador Island (24.0, -74.5). Label it 'Landfall, October 1492'.",
        ),
    ),
    "Andhra Pradesh": breakdown_items(
        (
            "camera_zoom",
            "Zoom to the Andhra Pradesh region.",
            "Fly the camera to Andhra Pradesh, India (15.9129, 79.74). Geocode query: 'Andhra Pradesh, India'. Zoom level 6.",
        ),
        (
            "highlight_area",
            "Highlight Andhra Pradesh as it existed before 2014.",
            "The pre-2014 state spanned today's Telangana and Andhra Pradesh; merge the present-day boundaries of "
            "'Telangana, India' and 'Andhra Pradesh, India' into one shape. About 5 seconds.",
        ),
    ),
    "Rocky Mountains": breakdown_items(
        (
            "camera_zoom",
            "Zoom out to frame the Rocky Mountains.",
            "Fly the camera to the Rocky Mountains (43.0, -110.0). Geocode query: 'Rocky Mountains'. Zoom level 5.",
        ),
        (
            "highlight_area",
            "Highlight the Rocky Mountain range.",
            "Fetch the boundary polygon for geocode query 'Rocky Mountains' and shade it. About 5 seconds.",
        ),
    ),
    "Ontario Legislative Building": breakdown_items(
        (
            "camera_zoom",
            "Zoom to the Ontario Legislative Building in Toronto.",
            "Fly the camera to the Ontario Legislative Building at Queen's Park, Toronto (43.6626, -79.3918). "
            "Geocode query: 'Ontario Legislative Building'. Zoom level 15.",
        ),
        (
            "highlight_point",
            "Mark the Ontario Legislative Building.",
            "Drop a marker at the Ontario Legislative Building (43.6626, -79.3918). Geocode query: "
            "'Ontario Legislative Building'. Label it 'Ontario Legislative Building'.",
        ),
    ),
}


def researcher_response(request) -> str:
    system = request.messages[0].content
    user = request.messages[-1].content

    if CHAT_REDUCTION in user:
        return tool_response(
            "resolve_geojson",
            {"action": "reduction", "base_query": "Rocky Mountains", "mask_query": "Canada", "params": {}},
        )
    if CHAT_INFO in user:
        return text_response(
            "The Ontario Legislative Building at Queen's Park was completed in 1892 and opened in 1893."
        )

    if ":camera_zoom]" in system:
        if "London" in user:
            return tool_response(
                "resolve_geojson",
                {"action": "query", "query": "London", "params": {"zoom_level": "10"},
                 "citations": ["openstreetmap.org relation 65606"]},
            )
        if "Ontario Legislative Building" in user:
            return tool_response(
                "resolve_geojson",
                {"action": "query", "query": "Ontario Legislative Building", "params": {"zoom_level": "15"}},
            )
        if "Toronto" in user:
            return tool_response(
                "resolve_geojson",
                {"action": "query", "query": "Toronto", "params": {"zoom_level": "10"},
                 "citations": ["openstreetmap.org relation 324211"]},
            )
        if "Andhra" in user:
            return tool_response(
                "resolve_geojson",
                {"action": "query", "query": "Andhra Pradesh, India", "params": {"zoom_level": "6"}},
            )
        if "Rocky" in user:
            return tool_response(
                "resolve_geojson",
                {"action": "query", "query": "Rocky Mountains", "params": {"zoom_level": "5"}},
            )
    if ":element_route]" in system and "sea route from London" in user:
        return tool_response(
            "resolve_geojson",
            {
                "action": "generation",
                "waypoints": [[lat, lon] for lat, lon in MACE_ROUTE],
                "mode": "sea",
                "params": {},
                "citations": ["standard transatlantic shipping lane via the Gulf of St. Lawrence"],
            },
        )
    if ":highlight_area]" in system:
        if "Telangana" in user:
            return tool_response(
                "resolve_geojson",
                {
                    "action": "addition",
                    "sub_queries": ["Telangana, India", "Andhra Pradesh, India"],
                    "params": {"label": "Andhra Pradesh (pre-2014)"},
                    "citations": ["the 2014 bifurcation split the state into Telangana and residual Andhra Pradesh"],
                },
            )
        if "Rocky" in user:
            return tool_response(
                "resolve_geojson",
                {"action": "query", "query": "Rocky Mountains", "params": {"label": "Rocky Mountains"}},
            )
        if "Toronto" in user:
            return tool_response(
                "resolve_geojson",
                {"action": "query", "query": "Toronto", "params": {"label": "Toronto"}},
            )
    if ":highlight_point]" in system and "Ontario Legislative Building" in user:
        return tool_response(
            "resolve_geojson",
            {
                "action": "query",
                "query": "Ontario Legislative Building",
                "params": {"label": "Ontario Legislative Building"},
            },
        )
    raise RuntimeError(f"no authored researcher response for request:\n{user[:400]}")


def breakdown_response(request) -> str:
    script = request.messages[-1].content
    for marker, response in BREAKDOWNS.items():
        if marker in script:
            return response
    raise RuntimeError(f"no authored breakdown for script:\n{script[:200]}")


class AuthoringGateway(Gateway):
    """Answers canonical requests from the authored tables and writes each
    one to the fixture store, exactly as record mode would."""

    def __init__(self, fixtures_dir: Path):
        super().__init__(GatewayConfig(mode="record", fixtures_dir=fixtures_dir))
        self.count = 0

    def complete(self, request, agent="default"):
        if agent == "breakdown":
            raw = breakdown_response(request)
        elif agent == "researcher":
            raw = researcher_response(request)
        else:
            raise RuntimeError(f"unexpected agent {agent!r}")
        self._write_fixture(request, agent, raw)
        self.count += 1
        return parse_provider_response(raw, latency_ms=0.0)


def main() -> None:
    for sub in ("breakdown", "researcher", "geocoder"):
        target = FIXTURES / sub
        if target.exists():
            shutil.rmtree(target)
        target.mkdir(parents=True)
    SCRIPTS.mkdir(parents=True, exist_ok=True)

    # sanity: every generated route hop stays under the plausibility bar
    for route in (MACE_ROUTE, COLUMBUS_ROUTE):
        for i in range(1, len(route)):
            hop = haversine_km(GeoPoint(lat=route[i - 1][0], lon=route[i - 1][1]),
                               GeoPoint(lat=route[i][0], lon=route[i][1]))
            assert hop < 2000.0, f"authored route hop {i} is {hop:.0f} km"

    # geocoder fixtures, keyed by the canonical query string
    geo_dir = FIXTURES / "geocoder"
    replay = FixtureGeocodeTransport(geo_dir)
    for request, features in GEOCODER_DOCS:
        body = json.dumps(
            {"type": "FeatureCollection", "licence": "Data (c) OpenStreetMap contributors, ODbL 1.0", "features": features},
            sort_keys=True,
        )
        replay.path_for(build_query(request)).write_text(body, encoding="utf-8")

    # scripts
    scripts = {
        "ceremonial_mace.txt": MACE_SCRIPT,
        "columbus.txt": COLUMBUS_SCRIPT,
        "andhra.txt": ANDHRA_SCRIPT,
        "rockies.txt": ROCKIES_SCRIPT,
        "building.txt": BUILDING_SCRIPT,
    }
    for name, text in scripts.items():
        (SCRIPTS / name).write_text(text + "\n", encoding="utf-8")

    # run the real pipeline against the authored responses so every fixture
    # is validated (and keyed) by the same code that will replay it
    gateway = AuthoringGateway(FIXTURES)
    geocoder = NominatimClient(transport=replay, cache_path=None, clock=fixed_clock, rate_gate=RateGate(min_interval_s=0.0))
    engine = Engine(store=ProjectStore(ROOT / "build" / "authoring-data"), gateway=gateway, geocoder=geocoder, clock=fixed_clock)

    for name in scripts:
        # pipeline exactly the file contents so request hashes match what
        # the CLI and service will send in replay
        script = (SCRIPTS / name).read_text(encoding="utf-8")
        project = engine.create_project(script)
        project = engine.run_breakdown(project)
        if name != "columbus.txt":  # Columbus is a breakdown-shape fixture only
            project = engine.research_all(project)
            unresolved = [it.id for it in project.breakdown.items if not it.resolved]
            assert not unresolved, f"authoring left unresolved items: {unresolved}"
        if name == "rockies.txt":
            highlight = next(it for it in project.breakdown.items if it.kind.value == "highlight_area")
            reply, updated, project = engine.chat(project, highlight.id, CHAT_REDUCTION)
            assert updated is not None, "reduction chat did not update the shape"
        if name == "building.txt":
            marker = next(it for it in project.breakdown.items if it.kind.value == "highlight_point")
            reply, updated, project = engine.chat(project, marker.id, CHAT_INFO)
            assert updated is None and "1893" in reply

    # reference polylines for the route-accuracy validator: the "real"
    # route differs from the resolved one by well under a kilometer
    refs = {
        "ceremonial_mace": {
            "kind": "element_route",
            "reference": [[lat + 0.004, lon] for lat, lon in MACE_ROUTE],
        }
    }
    (DATA / "route_refs.json").write_text(json.dumps(refs, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    shutil.rmtree(ROOT / "build" / "authoring-data", ignore_errors=True)
    print(f"wrote {gateway.count} chat fixtures, {len(GEOCODER_DOCS)} geocoder fixtures, {len(scripts)} scripts")


if __name__ == "__main__":
    main()
