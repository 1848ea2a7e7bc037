/**
 * Wire documents exchanged with the engine service.
 *
 * These mirror the canonical JSON schema the service emits; the studio
 * never invents its own project representation, it renders and edits
 * these documents directly (single source of truth is the server store).
 */

export interface GeoPointDoc {
  lat: number;
  lon: number;
}

export type Position = [number, number]; // GeoJSON order: lon, lat

export type GeometryDoc =
  | { type: "Point"; coordinates: Position; properties?: Record<string, string> }
  | { type: "LineString"; coordinates: Position[]; properties?: Record<string, string> }
  | { type: "Polygon"; coordinates: Position[][]; properties?: Record<string, string> }
  | { type: "MultiPolygon"; coordinates: Position[][][]; properties?: Record<string, string> };

export type BlockKind =
  | "highlight_area"
  | "highlight_line"
  | "highlight_point"
  | "camera_zoom"
  | "camera_translate"
  | "camera_orbit"
  | "element_route"
  | "element_spatial_transition"
  | "element_auxiliary_motion";

export const CAMERA_KINDS: ReadonlySet<BlockKind> = new Set([
  "camera_zoom",
  "camera_translate",
  "camera_orbit",
]);

export function isCameraKind(kind: BlockKind): boolean {
  return CAMERA_KINDS.has(kind);
}

export interface StyleDoc {
  color: string | null;
  opacity: number;
  label: string | null;
  image_asset: string | null;
}

export interface BlockDoc {
  id: string;
  kind: BlockKind;
  start_time: number;
  end_time: number;
  args: Record<string, unknown>;
  style: StyleDoc;
}

export interface TimelineDoc {
  blocks: BlockDoc[];
  duration: number;
  map_style: "streets" | "satellite" | "light" | "dark" | "terrain";
}

export interface BreakdownItemDoc {
  id: string;
  kind: BlockKind;
  short_description: string;
  long_description: string;
  resolved: boolean;
  user_notes: string;
  resolved_args: Record<string, unknown> | null;
}

export interface BreakdownDoc {
  items: BreakdownItemDoc[];
  source_script_hash: string;
}

export interface ChatMessageDoc {
  role: "system" | "user" | "assistant" | "tool";
  content: string;
}

export interface SessionDoc {
  block_id: string;
  messages: ChatMessageDoc[];
  chosen_action: Record<string, unknown> | null;
  resolved_shape: GeometryDoc | null;
  resolved_to_shape: GeometryDoc | null;
  resolved_params: Record<string, string>;
  citations: string[];
  error: string | null;
}

export interface ProjectDoc {
  id: string;
  script: string;
  breakdown: BreakdownDoc;
  timeline: TimelineDoc;
  sessions: Record<string, SessionDoc>;
  assets: Record<string, string>;
  created: number;
  modified: number;
}

export interface CameraDoc {
  center: GeoPointDoc;
  zoom: number;
  bearing: number;
  pitch: number;
}

export interface SpritePoseDoc {
  position: GeoPointDoc;
  heading: number;
}

export interface ClusterPoseDoc {
  position: GeoPointDoc;
  phase: number;
}

export interface OverlayDoc {
  block_id: string;
  kind: BlockKind;
  shape: GeometryDoc;
  progress: number;
  sprite_pose: SpritePoseDoc | null;
  cluster_poses: ClusterPoseDoc[] | null;
  style: StyleDoc;
}

export interface FrameDoc {
  t: number;
  camera: CameraDoc;
  overlays: OverlayDoc[];
}

export interface ValidationReportDoc {
  errors: { code: string; message: string; block_ids: string[] }[];
  warnings: { code: string; message: string; block_ids: string[] }[];
  valid: boolean;
}

export interface ApiErrorDoc {
  code: "not_found" | "invalid_input" | "agent_failed" | "geocode_failed" | "conflict" | "internal";
  message: string;
  detail: Record<string, unknown>;
}

export type EditDoc =
  | { op: "retime"; block_id: string; start_time: number; end_time: number }
  | { op: "reorder"; block_id: string; index: number }
  | { op: "delete"; block_id: string }
  | { op: "update_args"; block_id: string; args: Record<string, unknown> }
  | { op: "update_style"; block_id: string; style: Partial<StyleDoc> }
  | { op: "insert"; block: BlockDoc; index?: number };

export type ItemEditDoc =
  | { op: "delete"; id: string }
  | { op: "update"; id: string; short_description?: string; long_description?: string; user_notes?: string }
  | { op: "reorder"; id: string; index: number }
  | { op: "insert"; kind: BlockKind; short_description: string; long_description?: string; index?: number };

export interface BreakdownOptionsDoc {
  target_duration?: number;
  default_block_seconds?: number;
  camera_lead_seconds?: number;
}
