/**
 * Canvas rendering of a frame: a light basemap (style-tinted background
 * with a graticule; any raster tile provider can be slotted in via a URL
 * template at build time) plus the frame's overlay shapes, sprite poses,
 * and cluster poses, projected web-mercator style around the camera.
 */

import type { FrameDoc, GeometryDoc, OverlayDoc, Position, StyleDoc } from "./types.js";

export interface Viewport {
  width: number;
  height: number;
}

export interface ScreenPoint {
  x: number;
  y: number;
}

const TILE_SPAN = 360;

export const STYLE_BACKGROUNDS: Record<string, string> = {
  streets: "#e8e4dc",
  satellite: "#22301f",
  light: "#f4f4f2",
  dark: "#191b1f",
  terrain: "#dde7d2",
};

const KIND_COLORS: Record<string, string> = {
  highlight_area: "#e4572e",
  highlight_line: "#1d7874",
  highlight_point: "#c1292e",
  element_route: "#235789",
  element_spatial_transition: "#7768ae",
  element_auxiliary_motion: "#544b3d",
};

function mercatorY(lat: number): number {
  const clamped = Math.max(-85.05, Math.min(85.05, lat));
  const rad = (clamped * Math.PI) / 180;
  return Math.log(Math.tan(Math.PI / 4 + rad / 2));
}

/** Project lon/lat to screen space for a camera (center + zoom). */
export function project(
  lon: number,
  lat: number,
  camera: FrameDoc["camera"],
  viewport: Viewport,
): ScreenPoint {
  const scale = (viewport.width / TILE_SPAN) * Math.pow(2, camera.zoom);
  const x = (lon - camera.center.lon) * scale + viewport.width / 2;
  const yUnit = (mercatorY(camera.center.lat) - mercatorY(lat)) * (180 / Math.PI);
  const y = yUnit * scale + viewport.height / 2;
  return { x, y };
}

export function resolveColor(kind: string, style: StyleDoc): string {
  return style.color ?? KIND_COLORS[kind] ?? "#333333";
}

type Ctx = CanvasRenderingContext2D;

function tracePath(ctx: Ctx, positions: Position[], camera: FrameDoc["camera"], viewport: Viewport): void {
  positions.forEach(([lon, lat], i) => {
    const p = project(lon, lat, camera, viewport);
    if (i === 0) {
      ctx.moveTo(p.x, p.y);
    } else {
      ctx.lineTo(p.x, p.y);
    }
  });
}

function drawGeometry(ctx: Ctx, shape: GeometryDoc, overlay: OverlayDoc, camera: FrameDoc["camera"], viewport: Viewport): void {
  const color = resolveColor(overlay.kind, overlay.style);
  ctx.globalAlpha = overlay.style.opacity;
  if (shape.type === "Point") {
    const [lon, lat] = shape.coordinates;
    const p = project(lon, lat, camera, viewport);
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(p.x, p.y, 6, 0, Math.PI * 2);
    ctx.fill();
  } else if (shape.type === "LineString") {
    ctx.strokeStyle = color;
    ctx.lineWidth = 3;
    ctx.beginPath();
    tracePath(ctx, shape.coordinates, camera, viewport);
    ctx.stroke();
  } else if (shape.type === "Polygon") {
    ctx.fillStyle = color;
    ctx.strokeStyle = color;
    ctx.beginPath();
    for (const ring of shape.coordinates) {
      tracePath(ctx, ring, camera, viewport);
      ctx.closePath();
    }
    ctx.globalAlpha = overlay.style.opacity * 0.35;
    ctx.fill("evenodd");
    ctx.globalAlpha = overlay.style.opacity;
    ctx.stroke();
  } else {
    for (const polygon of shape.coordinates) {
      ctx.fillStyle = color;
      ctx.strokeStyle = color;
      ctx.beginPath();
      for (const ring of polygon) {
        tracePath(ctx, ring, camera, viewport);
        ctx.closePath();
      }
      ctx.globalAlpha = overlay.style.opacity * 0.35;
      ctx.fill("evenodd");
      ctx.globalAlpha = overlay.style.opacity;
      ctx.stroke();
    }
  }
  ctx.globalAlpha = 1;
}

function drawGraticule(ctx: Ctx, camera: FrameDoc["camera"], viewport: Viewport): void {
  ctx.strokeStyle = "rgba(100,100,100,0.25)";
  ctx.lineWidth = 1;
  const spanLon = TILE_SPAN / Math.pow(2, camera.zoom);
  const step = niceStep(spanLon / 6);
  const lonStart = Math.floor((camera.center.lon - spanLon) / step) * step;
  for (let lon = lonStart; lon <= camera.center.lon + spanLon; lon += step) {
    ctx.beginPath();
    const top = project(lon, 85, camera, viewport);
    const bottom = project(lon, -85, camera, viewport);
    ctx.moveTo(top.x, top.y);
    ctx.lineTo(bottom.x, bottom.y);
    ctx.stroke();
  }
  for (let lat = -80; lat <= 80; lat += step) {
    ctx.beginPath();
    const left = project(camera.center.lon - spanLon, lat, camera, viewport);
    const right = project(camera.center.lon + spanLon, lat, camera, viewport);
    ctx.moveTo(left.x, left.y);
    ctx.lineTo(right.x, right.y);
    ctx.stroke();
  }
}

export function niceStep(raw: number): number {
  const candidates = [0.1, 0.25, 0.5, 1, 2, 5, 10, 15, 30, 45, 90];
  for (const c of candidates) {
    if (raw <= c) {
      return c;
    }
  }
  return 90;
}

export function renderFrame(ctx: Ctx, frame: FrameDoc, viewport: Viewport, mapStyle = "streets"): void {
  ctx.save();
  ctx.fillStyle = STYLE_BACKGROUNDS[mapStyle] ?? STYLE_BACKGROUNDS["streets"] ?? "#e8e4dc";
  ctx.fillRect(0, 0, viewport.width, viewport.height);
  drawGraticule(ctx, frame.camera, viewport);

  for (const overlay of frame.overlays) {
    drawGeometry(ctx, overlay.shape, overlay, frame.camera, viewport);
    if (overlay.sprite_pose) {
      const p = project(overlay.sprite_pose.position.lon, overlay.sprite_pose.position.lat, frame.camera, viewport);
      ctx.save();
      ctx.translate(p.x, p.y);
      ctx.rotate(((overlay.sprite_pose.heading - 90) * Math.PI) / 180);
      ctx.fillStyle = resolveColor(overlay.kind, overlay.style);
      ctx.beginPath();
      ctx.moveTo(10, 0);
      ctx.lineTo(-6, 5);
      ctx.lineTo(-6, -5);
      ctx.closePath();
      ctx.fill();
      ctx.restore();
    }
    if (overlay.cluster_poses) {
      ctx.fillStyle = resolveColor(overlay.kind, overlay.style);
      for (const pose of overlay.cluster_poses) {
        const p = project(pose.position.lon, pose.position.lat, frame.camera, viewport);
        ctx.globalAlpha = 0.8;
        ctx.beginPath();
        ctx.arc(p.x, p.y, 4, 0, Math.PI * 2);
        ctx.fill();
      }
      ctx.globalAlpha = 1;
    }
    if (overlay.style.label) {
      const anchor = labelAnchor(overlay.shape);
      if (anchor) {
        const p = project(anchor[0], anchor[1], frame.camera, viewport);
        ctx.fillStyle = "#1a1a1a";
        ctx.font = "12px sans-serif";
        ctx.fillText(overlay.style.label, p.x + 8, p.y - 8);
      }
    }
  }
  ctx.restore();
}

export function labelAnchor(shape: GeometryDoc): Position | null {
  if (shape.type === "Point") {
    return shape.coordinates;
  }
  if (shape.type === "LineString") {
    return shape.coordinates[0] ?? null;
  }
  if (shape.type === "Polygon") {
    return shape.coordinates[0]?.[0] ?? null;
  }
  return shape.coordinates[0]?.[0]?.[0] ?? null;
}
