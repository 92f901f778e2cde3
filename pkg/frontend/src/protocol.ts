// Wire types for the session protocol. The client never invents state:
// everything rendered comes from these messages.

export type Vec3 = [number, number, number];

export interface Envelope {
  seq: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface GestureEventDict {
  t: number;
  kind: string;
  px?: [number, number];
  hand?: 'left' | 'right';
  point?: number[];
  dt?: number;
}

export interface FeedbackDict {
  t: number;
  kind: string;
  [key: string]: unknown;
}

export interface LayoutBox {
  id: string;
  center: Vec3;
  half_extent: number;
}

export interface AttributeBox extends LayoutBox {
  key: string;
  value: string | number;
}

export interface ContainerBox extends LayoutBox {
  collapsed: boolean;
  members: string[];
}

export interface LayoutPayload {
  anchor: Vec3;
  scale_used: number;
  boxes: LayoutBox[];
  attribute_boxes: AttributeBox[];
  containers: ContainerBox[];
}

export interface SceneNodeDict {
  id: string;
  label: string;
  bbox: [number, number, number, number];
  level: number;
  attributes: Record<string, string | number>;
  children: SceneNodeDict[];
  world_pos?: Vec3;
}

export interface SnapshotPayload {
  scene: {
    image_size: [number, number];
    nodes: SceneNodeDict[];
    [key: string]: unknown;
  };
  positions: Record<string, Vec3>;
  unplaced: string[];
  spatializer_bypassed: boolean;
  warnings: string[];
}

export function isEnvelope(value: unknown): value is Envelope {
  return (
    typeof value === 'object' &&
    value !== null &&
    typeof (value as Envelope).seq === 'number' &&
    typeof (value as Envelope).kind === 'string' &&
    typeof (value as Envelope).payload === 'object'
  );
}

export function* walkNodes(nodes: SceneNodeDict[]): Generator<SceneNodeDict> {
  for (const node of nodes) {
    yield node;
    yield* walkNodes(node.children ?? []);
  }
}
