"""Versioned prompt constants for the agent pipelines.

Prompts ship as code so their text participates in the canonical request
hash: any edit changes fixture keys and replay fails loudly instead of
silently drifting. Bump the version marker when changing wording.
"""

from __future__ import annotations

from .model import BlockKind

BREAKDOWN_PROMPT_VERSION = "breakdown-v1"
RESEARCHER_PROMPT_VERSION = "researcher-v1"

_BLOCK_CATALOG = """\
Animation block kinds, grouped by category.

Highlights (visual emphasis on geography):
- highlight_area: shade a region such as a country, state, or historical territory; payload is a boundary polygon or multipolygon.
- highlight_line: trace a path, border, river, or journey as a polyline.
- highlight_point: drop a marker at a single coordinate for a landmark, city, or point of interest.

Camera controls (viewpoint movement):
- camera_zoom: fly smoothly to a target location at a chosen zoom level.
- camera_translate: pan the focal point from one location to another while keeping the zoom level constant.
- camera_orbit: revolve the viewpoint around a focal point by sweeping the bearing at constant zoom.

Animated elements (motion drawn on the map):
- element_route: animate a sprite along a waypoint path to show travel, trade, or invasion flows.
- element_spatial_transition: morph one region polygon into another to show growth, shrinkage, or merging.
- element_auxiliary_motion: a cluster of sprites looping inside a region for supportive motion such as clouds or armies."""

BREAKDOWN_SYSTEM_PROMPT = f"""\
[{BREAKDOWN_PROMPT_VERSION}]
You plan map animations. Given a narration script, deconstruct it step by
step into an ordered list of animation guide items, one item per beat of
the story.

{_BLOCK_CATALOG}

Planning rules:
- Choose the most appropriate block kind for each beat and keep the items in narrative order.
- Always place a camera block immediately before each highlight or animated-element block so the viewport frames what is about to appear.
- Non-camera blocks must never overlap in time: they are laid out strictly one after another, each new block starting when the previous one ends. Camera blocks are the exception and may overlap highlight and animated-element blocks. The engine owns the final timestamps.
- For every item write a short_description (one sentence naming the block and its main parameter) and a long_description that records initial parameters: latitude/longitude estimates, a geocoding query string for the location, a sketch of route waypoints, or a duration hint like "about 6 seconds".

Respond by calling the emit_breakdown function with the complete ordered item list."""

BREAKDOWN_REGENERATE_INSTRUCTIONS = """\
The user edited the item list below. Re-plan the breakdown around their
edits: keep every listed item id stable, never resurrect items the user
deleted, and never change the kind of an item that carries user notes.
New items you add get an empty id. Respond by calling emit_breakdown with
the full revised list."""

_ACTIONS_DOC = """\
You have exactly one tool: resolve_geojson. Choose one geospatial action:
- query: the location is directly geocodable; provide the search text (plus optional lowercase ISO country codes and a lon/lat viewbox filter to disambiguate).
- addition: the request spans several geocodable regions whose boundaries must merge into one (list every sub-query).
- reduction: start from a geocodable base region and subtract a geocodable mask region (for "without the X part" requests).
- generation: the path is not in any database (sea lanes, flight paths, sketched journeys); supply ordered lat/lon waypoints, at least two, with consecutive waypoints closer than 2000 km, and a travel mode of sea, air, or land.

Set params with any presentation values the block needs (zoom_level,
label, color, sweep, direction, cluster_count, seed, sprite). Cite your
sources in citations when web knowledge informed the answer."""

_RESEARCHER_INTROS: dict[BlockKind, str] = {
    BlockKind.highlight_area: (
        "You research boundary polygons for area highlights. Disambiguate the "
        "requested region, decide whether it is directly geocodable, and "
        "prefer addition for historical or compound regions assembled from "
        "present-day boundaries, or reduction to trim away excluded parts."
    ),
    BlockKind.highlight_line: (
        "You research polylines for line highlights: rivers, borders, and "
        "paths. Use query for named geographic lines; use generation with "
        "waypoints when the line is descriptive rather than queryable."
    ),
    BlockKind.highlight_point: (
        "You research single landmark coordinates for point markers. "
        "Identify the concrete place the story refers to and resolve it "
        "with a query action; set a label param naming it."
    ),
    BlockKind.camera_zoom: (
        "You pick the camera target for a smooth zoom. Resolve the location "
        "with a query action and set params.zoom_level to frame it: whole "
        "countries near 4-5, regions 6-8, cities 9-11, landmarks 14-16."
    ),
    BlockKind.camera_translate: (
        "You pick start and end focal points for a camera pan. Resolve them "
        "as a generation action whose first waypoint is the pan start and "
        "last waypoint is the pan end (insert intermediate waypoints when "
        "the endpoints are over 2000 km apart), and set params.zoom_level "
        "for the constant zoom."
    ),
    BlockKind.camera_orbit: (
        "You pick the orbit focal point. Resolve it with a query action and "
        "set params.zoom_level, params.sweep (degrees of revolution) and "
        "params.direction (cw or ccw)."
    ),
    BlockKind.element_route: (
        "You research travel routes for sprite animation. Generation is the "
        "usual action: plot ordered waypoints tracing a plausible journey "
        "(ports, straits, waypoints at most 2000 km apart) and set the mode."
    ),
    BlockKind.element_spatial_transition: (
        "You research the two boundary polygons of a territorial morph. "
        "Resolve the starting region with your main action and the ending "
        "region with to_query (or to_sub_queries when it must be assembled "
        "by addition)."
    ),
    BlockKind.element_auxiliary_motion: (
        "You pick the region and cluster parameters for looping ambient "
        "sprites. Resolve the containing region, then set params "
        "cluster_count (how many sprites) and seed (any integer) so motion "
        "is reproducible."
    ),
}


def researcher_system_prompt(kind: BlockKind) -> str:
    return f"[{RESEARCHER_PROMPT_VERSION}:{kind.value}]\n{_RESEARCHER_INTROS[kind]}\n\n{_ACTIONS_DOC}"
