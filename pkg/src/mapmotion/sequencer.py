"""Pure frame evaluation.

``evaluate(timeline, t)`` is a pure function from a timeline and a time to
a frame: one camera state plus the overlay state of every active block.
Blocks are active on the half-open interval ``start <= t < end`` so a
boundary never double-activates. Continuous-time evaluation means export,
tests, and UI scrubbing all share one code path instead of a tick loop.

Camera zoom blocks follow the van Wijk & Nuij optimal zoom-and-pan
trajectory (zoom out, pan, zoom in for large viewpoint changes) with an
ease-in-out-cubic time remap; translate and orbit interpolate linearly.
When no camera block is active the camera holds the final state of the
most recent one, or a configured world view before any.
"""

from __future__ import annotations

import math
from typing import Iterator, Optional

from pydantic import Field, model_validator

from . import geometry
from .canonical import canonical_json, round_time
from .errors import InvariantError
from .model import (
    AnimationBlock,
    BlockKind,
    BoundingBox,
    CameraOrbitArgs,
    CameraTranslateArgs,
    CameraZoomArgs,
    ElementAuxiliaryMotionArgs,
    ElementRouteArgs,
    ElementSpatialTransitionArgs,
    Frozen,
    GeoPoint,
    GeoShape,
    HighlightAreaArgs,
    HighlightLineArgs,
    HighlightPointArgs,
    StyleOverrides,
    Timeline,
    is_camera,
    point_to_doc,
    shape_to_geojson,
    style_to_doc,
)

RHO = math.sqrt(2.0)
WORLD_SPAN_DEG = 360.0


class CameraState(Frozen):
    center: GeoPoint
    zoom: float = Field(ge=0.0, le=22.0)
    bearing: float
    pitch: float = Field(default=0.0, ge=0.0, le=60.0)

    @classmethod
    def make(cls, center: GeoPoint, zoom: float, bearing: float = 0.0, pitch: float = 0.0) -> "CameraState":
        return cls(center=center, zoom=zoom, bearing=bearing % 360.0, pitch=pitch)


class SpritePose(Frozen):
    position: GeoPoint
    heading: float


class ClusterPose(Frozen):
    position: GeoPoint
    phase: float


class OverlayState(Frozen):
    block_id: str
    kind: BlockKind
    shape: GeoShape
    progress: float = Field(ge=0.0, le=1.0)
    sprite_pose: Optional[SpritePose] = None
    cluster_poses: Optional[tuple[ClusterPose, ...]] = None
    style: StyleOverrides = StyleOverrides()

    @model_validator(mode="after")
    def _poses_match_kind(self) -> "OverlayState":
        if (self.sprite_pose is not None) != (self.kind is BlockKind.element_route):
            raise ValueError("sprite pose is present exactly for route overlays")
        if (self.cluster_poses is not None) != (self.kind is BlockKind.element_auxiliary_motion):
            raise ValueError("cluster poses are present exactly for auxiliary-motion overlays")
        return self


class Frame(Frozen):
    t: float
    camera: CameraState
    overlays: tuple[OverlayState, ...] = ()


class SequencerConfig(Frozen):
    default_camera: CameraState = CameraState(center=GeoPoint(lat=20.0, lon=0.0), zoom=1.5, bearing=0.0, pitch=0.0)
    fade_in_seconds: float = 0.3


DEFAULT_CONFIG = SequencerConfig()


def ease_in_out_cubic(p: float) -> float:
    p = min(1.0, max(0.0, p))
    if p < 0.5:
        return 4.0 * p * p * p
    return 1.0 - ((-2.0 * p + 2.0) ** 3) / 2.0


# ---------------------------------------------------------------------------
# Smooth zoom-and-pan trajectory
# ---------------------------------------------------------------------------


def _zoom_to_width(zoom: float) -> float:
    return WORLD_SPAN_DEG * 2.0 ** (-zoom)


def _width_to_zoom(width: float) -> float:
    return max(0.0, min(22.0, math.log2(WORLD_SPAN_DEG / width)))


def smooth_zoom_pan(start: CameraState, target: GeoPoint, target_zoom: float, progress: float) -> tuple[GeoPoint, float]:
    """Optimal zoom-and-pan position at a path-length fraction: zooms out,
    pans, and zooms back in for large viewpoint changes. Exact at both
    endpoints."""
    if progress <= 0.0:
        return start.center, start.zoom
    if progress >= 1.0:
        return target, target_zoom

    w0 = _zoom_to_width(start.zoom)
    w1 = _zoom_to_width(target_zoom)
    dx = target.lon - start.center.lon
    dy = target.lat - start.center.lat
    u1 = math.hypot(dx, dy)

    if u1 < 1e-9:
        if abs(w1 - w0) < 1e-12:
            return start.center, start.zoom
        w = w0 * (w1 / w0) ** progress  # pure exponential zoom
        return start.center, _width_to_zoom(w)

    b0 = (w1 * w1 - w0 * w0 + RHO**4 * u1 * u1) / (2.0 * w0 * RHO * RHO * u1)
    b1 = (w1 * w1 - w0 * w0 - RHO**4 * u1 * u1) / (2.0 * w1 * RHO * RHO * u1)
    r0 = math.log(-b0 + math.sqrt(b0 * b0 + 1.0))
    r1 = math.log(-b1 + math.sqrt(b1 * b1 + 1.0))
    total = (r1 - r0) / RHO
    s = progress * total
    u = (w0 / (RHO * RHO)) * math.cosh(r0) * math.tanh(RHO * s + r0) - (w0 / (RHO * RHO)) * math.sinh(r0)
    w = w0 * math.cosh(r0) / math.cosh(RHO * s + r0)
    f = u / u1
    center = GeoPoint(lat=start.center.lat + dy * f, lon=start.center.lon + dx * f)
    return center, _width_to_zoom(w)


# ---------------------------------------------------------------------------
# Camera evaluation
# ---------------------------------------------------------------------------


def camera_state(block: AnimationBlock, local_progress: float, prior: CameraState) -> CameraState:
    """State of one camera block at a local progress, given the camera
    state the block starts from."""
    if not is_camera(block.kind):
        raise InvariantError(f"block {block.id} ({block.kind.value}) is not a camera block")
    p = min(1.0, max(0.0, local_progress))
    args = block.args
    if isinstance(args, CameraZoomArgs):
        center, zoom = smooth_zoom_pan(prior, args.target, args.zoom_level, ease_in_out_cubic(p))
        return CameraState(center=center, zoom=zoom, bearing=prior.bearing, pitch=prior.pitch)
    if isinstance(args, CameraTranslateArgs):
        center = GeoPoint(
            lat=args.from_point.lat + (args.to_point.lat - args.from_point.lat) * p,
            lon=args.from_point.lon + (args.to_point.lon - args.from_point.lon) * p,
        )
        return CameraState(center=center, zoom=args.zoom_level, bearing=prior.bearing, pitch=prior.pitch)
    if isinstance(args, CameraOrbitArgs):
        start_bearing = args.start_bearing if args.start_bearing is not None else prior.bearing
        sign = 1.0 if args.direction == "ccw" else -1.0
        bearing = (start_bearing + sign * args.sweep * p) % 360.0
        return CameraState(center=args.center, zoom=args.zoom_level, bearing=bearing, pitch=prior.pitch)
    raise InvariantError(f"unhandled camera args {type(args).__name__}")  # pragma: no cover


class _CameraPlan:
    """Sorted camera blocks with the chained state entering each one."""

    def __init__(self, timeline: Timeline, config: SequencerConfig):
        self.config = config
        self.cameras = sorted(
            (b for b in timeline.blocks if is_camera(b.kind)), key=lambda b: (b.start_time, b.id)
        )
        self.entry_states: list[CameraState] = []
        self.end_states: list[CameraState] = []
        for i, cam in enumerate(self.cameras):
            state = config.default_camera
            for j in range(i):
                if self.cameras[j].end_time <= cam.start_time:
                    state = self.end_states[j]
            self.entry_states.append(state)
            self.end_states.append(camera_state(cam, 1.0, state))

    def state_at(self, t: float) -> CameraState:
        active_idx = None
        for i, cam in enumerate(self.cameras):
            if cam.start_time <= t < cam.end_time:
                active_idx = i  # latest-starting wins: sorted order makes the last match win
        if active_idx is not None:
            cam = self.cameras[active_idx]
            duration = cam.end_time - cam.start_time
            progress = (t - cam.start_time) / duration if duration > 0 else 1.0
            return camera_state(cam, progress, self.entry_states[active_idx])
        ended = [i for i, cam in enumerate(self.cameras) if cam.end_time <= t]
        if not ended:
            return self.config.default_camera
        latest = max(ended, key=lambda i: (self.cameras[i].end_time, self.cameras[i].start_time))
        return self.end_states[latest]


# ---------------------------------------------------------------------------
# Overlay evaluation
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def _unit_rand(seed: int, sprite: int, salt: int) -> float:
    """Counter-based generator: fully deterministic, no hidden state."""
    mixed = _splitmix64(seed ^ _splitmix64((sprite << 8) | salt))
    return mixed / float(1 << 64)


def _cluster_poses(args: ElementAuxiliaryMotionArgs, progress: float) -> tuple[ClusterPose, ...]:
    """Each sprite loops on a seeded closed Lissajous-style path inside the
    region; integer frequencies close the loop at progress 1."""
    box = args.region
    span_lat = box.max.lat - box.min.lat
    span_lon = box.max.lon - box.min.lon
    poses = []
    for i in range(args.cluster_count):
        amp_lat = (0.1 + 0.3 * _unit_rand(args.seed, i, 1)) * span_lat / 2.0
        amp_lon = (0.1 + 0.3 * _unit_rand(args.seed, i, 2)) * span_lon / 2.0
        c_lat = box.min.lat + amp_lat + _unit_rand(args.seed, i, 3) * (span_lat - 2.0 * amp_lat)
        c_lon = box.min.lon + amp_lon + _unit_rand(args.seed, i, 4) * (span_lon - 2.0 * amp_lon)
        freq_a = 1 + int(_unit_rand(args.seed, i, 5) * 3)
        freq_b = 1 + int(_unit_rand(args.seed, i, 6) * 3)
        phase = _unit_rand(args.seed, i, 7)
        phase_b = _unit_rand(args.seed, i, 8)
        lat = c_lat + amp_lat * math.sin(2.0 * math.pi * (freq_a * progress + phase))
        lon = c_lon + amp_lon * math.cos(2.0 * math.pi * (freq_b * progress + phase_b))
        poses.append(ClusterPose(position=GeoPoint(lat=lat, lon=lon), phase=phase))
    return tuple(poses)


def _partial_path(path: GeoShape, fraction: float) -> tuple[GeoShape, SpritePose]:
    head, heading = geometry.point_along(path, fraction)
    pts = path.path
    seg_lengths = [geometry.haversine_km(a, b) for a, b in zip(pts[:-1], pts[1:])]
    total = sum(seg_lengths)
    target = min(1.0, max(0.0, fraction)) * total
    drawn = [pts[0]]
    walked = 0.0
    for p, d in zip(pts[1:], seg_lengths):
        if walked + d > target:
            break
        walked += d
        drawn.append(p)
    if drawn[-1] != head or len(drawn) < 2:
        drawn.append(head)
    return GeoShape.from_path(drawn), SpritePose(position=head, heading=heading)


class _MorphCache:
    def __init__(self):
        self._store: dict[str, geometry.RingCorrespondence] = {}

    def correspondence(self, block: AnimationBlock) -> geometry.RingCorrespondence:
        corr = self._store.get(block.id)
        if corr is None:
            args = block.args
            corr = geometry.ring_correspondence(args.from_shape, args.to_shape)
            self._store[block.id] = corr
        return corr


def element_state(
    block: AnimationBlock,
    local_progress: float,
    config: SequencerConfig = DEFAULT_CONFIG,
    _morphs: _MorphCache | None = None,
) -> OverlayState:
    """Overlay state of one non-camera block at a local progress."""
    if is_camera(block.kind):
        raise InvariantError(f"block {block.id} ({block.kind.value}) is a camera block, not an overlay")
    p = min(1.0, max(0.0, local_progress))
    args = block.args
    style = block.style

    elapsed = p * block.duration
    if config.fade_in_seconds > 0:
        fade = min(1.0, elapsed / config.fade_in_seconds)
    else:
        fade = 1.0

    if isinstance(args, HighlightAreaArgs):
        return OverlayState(
            block_id=block.id,
            kind=block.kind,
            shape=args.shape,
            progress=p,
            style=style.model_copy(update={"opacity": style.opacity * fade}),
        )
    if isinstance(args, HighlightLineArgs):
        return OverlayState(
            block_id=block.id,
            kind=block.kind,
            shape=args.path,
            progress=p,
            style=style.model_copy(update={"opacity": style.opacity * fade}),
        )
    if isinstance(args, HighlightPointArgs):
        return OverlayState(
            block_id=block.id,
            kind=block.kind,
            shape=GeoShape.from_point(args.point),
            progress=p,
            style=style.model_copy(update={"opacity": style.opacity * fade}),
        )
    if isinstance(args, ElementRouteArgs):
        shape, pose = _partial_path(args.path, p)
        return OverlayState(
            block_id=block.id, kind=block.kind, shape=shape, progress=p, sprite_pose=pose, style=style
        )
    if isinstance(args, ElementSpatialTransitionArgs):
        corr = (_morphs or _MorphCache()).correspondence(block)
        shape = geometry.morph_with_correspondence(corr, p)
        return OverlayState(block_id=block.id, kind=block.kind, shape=shape, progress=p, style=style)
    if isinstance(args, ElementAuxiliaryMotionArgs):
        region_shape = GeoShape.from_polygon(
            [
                [
                    (args.region.min.lat, args.region.min.lon),
                    (args.region.min.lat, args.region.max.lon),
                    (args.region.max.lat, args.region.max.lon),
                    (args.region.max.lat, args.region.min.lon),
                ]
            ]
        )
        return OverlayState(
            block_id=block.id,
            kind=block.kind,
            shape=region_shape,
            progress=p,
            cluster_poses=_cluster_poses(args, p),
            style=style,
        )
    raise InvariantError(f"unhandled args {type(args).__name__}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Frame evaluation and export
# ---------------------------------------------------------------------------


class _TimelineContext:
    def __init__(self, timeline: Timeline, config: SequencerConfig):
        self.timeline = timeline
        self.config = config
        self.plan = _CameraPlan(timeline, config)
        self.morphs = _MorphCache()
        self.overlay_blocks = sorted(
            (b for b in timeline.blocks if not is_camera(b.kind)),
            key=lambda b: (b.start_time, b.id),
        )

    def frame_at(self, t: float) -> Frame:
        overlays = []
        for block in self.overlay_blocks:
            if block.start_time <= t < block.end_time:
                duration = block.end_time - block.start_time
                progress = (t - block.start_time) / duration
                overlays.append(element_state(block, progress, self.config, self.morphs))
        return Frame(t=t, camera=self.plan.state_at(t), overlays=tuple(overlays))


def evaluate(timeline: Timeline, t: float, config: SequencerConfig = DEFAULT_CONFIG) -> Frame:
    """Frame at time t; depends only on its arguments."""
    if t < 0:
        raise InvariantError(f"cannot evaluate at negative time {t}")
    return _TimelineContext(timeline, config).frame_at(t)


def export_frames(timeline: Timeline, fps: int, config: SequencerConfig = DEFAULT_CONFIG) -> Iterator[Frame]:
    """Frames at t = 0, 1/fps, ... through the final frame at (or past)
    duration: floor(duration * fps) + 1 frames in total."""
    if fps < 1:
        raise InvariantError(f"fps must be >= 1, got {fps}")
    ctx = _TimelineContext(timeline, config)
    count = int(math.floor(timeline.duration * fps + 1e-9)) + 1
    for i in range(count):
        yield ctx.frame_at(i / fps)


def frame_to_doc(frame: Frame) -> dict:
    return {
        "t": round_time(frame.t),
        "camera": {
            "center": point_to_doc(frame.camera.center),
            "zoom": frame.camera.zoom,
            "bearing": frame.camera.bearing,
            "pitch": frame.camera.pitch,
        },
        "overlays": [
            {
                "block_id": o.block_id,
                "kind": o.kind.value,
                "shape": shape_to_geojson(o.shape),
                "progress": o.progress,
                "sprite_pose": None
                if o.sprite_pose is None
                else {"position": point_to_doc(o.sprite_pose.position), "heading": o.sprite_pose.heading},
                "cluster_poses": None
                if o.cluster_poses is None
                else [{"position": point_to_doc(cp.position), "phase": cp.phase} for cp in o.cluster_poses],
                "style": style_to_doc(o.style),
            }
            for o in frame.overlays
        ],
    }


def frame_lines(timeline: Timeline, fps: int, config: SequencerConfig = DEFAULT_CONFIG) -> Iterator[str]:
    """Newline-delimited canonical frame stream (the renderer contract)."""
    for frame in export_frames(timeline, fps, config):
        yield canonical_json(frame_to_doc(frame))
