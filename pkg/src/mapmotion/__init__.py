"""Script-driven map animation engine.

Turns natural-language scripts into editable, typed animation timelines
(scene breakdown agent), grounds each block in real geospatial data
(researcher agent + geocoder + polygon operations), and deterministically
evaluates the timeline into per-frame camera and overlay states.
"""

__version__ = "0.1.0"
