// The view model is a pure function of received messages: applyEnvelope
// never mutates its input and holds zero interaction logic. Unknown ids
// in feedback are recorded and ignored.

import {
  type Envelope,
  type FeedbackDict,
  type LayoutPayload,
  type SnapshotPayload,
  type Vec3,
  walkNodes,
} from './protocol.js';

export interface PanelState {
  id: string;
  attributes: Record<string, string | number>;
  point: Vec3;
}

export interface ViewModel {
  connection: 'connecting' | 'open' | 'closed';
  banner: string | null;
  snapshot: SnapshotPayload | null;
  layout: LayoutPayload | null;
  objectHighlights: Record<string, string>;
  proxyHighlights: Record<string, string>;
  selection: string[];
  panel: PanelState | null;
  aggregates: Record<string, { key: string; value: number }>;
  level: number;
  console: string[];
  unknownIds: string[];
}

const CONSOLE_LIMIT = 80;

export function initialViewModel(): ViewModel {
  return {
    connection: 'connecting',
    banner: null,
    snapshot: null,
    layout: null,
    objectHighlights: {},
    proxyHighlights: {},
    selection: [],
    panel: null,
    aggregates: {},
    level: 1,
    console: [],
    unknownIds: [],
  };
}

function knownIds(vm: ViewModel): Set<string> {
  const ids = new Set<string>();
  if (vm.snapshot) {
    for (const node of walkNodes(vm.snapshot.scene.nodes)) ids.add(node.id);
  }
  if (vm.layout) {
    for (const box of vm.layout.boxes) ids.add(box.id);
    for (const c of vm.layout.containers) ids.add(c.id);
    for (const a of vm.layout.attribute_boxes) ids.add(a.id);
  }
  return ids;
}

function logLine(event: FeedbackDict): string {
  const rest = Object.entries(event)
    .filter(([key]) => key !== 't' && key !== 'kind' && key !== 'layout')
    .map(([key, value]) => `${key}=${JSON.stringify(value)}`)
    .join(' ');
  return `${event.t} ${event.kind} ${rest}`.trim();
}

function withConsole(vm: ViewModel, line: string): ViewModel {
  return { ...vm, console: [...vm.console.slice(-(CONSOLE_LIMIT - 1)), line] };
}

export function applyFeedback(vm: ViewModel, event: FeedbackDict): ViewModel {
  vm = withConsole(vm, logLine(event));
  const valid = knownIds(vm);
  const checked = (id: string): boolean => {
    if (valid.has(id)) return true;
    return false;
  };
  switch (event.kind) {
    case 'HighlightObject': {
      const id = event.id as string;
      if (!checked(id)) return { ...vm, unknownIds: [...vm.unknownIds, id] };
      return { ...vm, objectHighlights: { ...vm.objectHighlights, [id]: event.color as string } };
    }
    case 'HighlightProxy': {
      const id = event.id as string;
      if (!checked(id)) return { ...vm, unknownIds: [...vm.unknownIds, id] };
      return { ...vm, proxyHighlights: { ...vm.proxyHighlights, [id]: event.color as string } };
    }
    case 'SelectionChanged':
      // the batch re-sends highlights for the new selection right after
      return { ...vm, selection: event.ids as string[], objectHighlights: {}, proxyHighlights: {} };
    case 'ShowPanel':
      return {
        ...vm,
        panel: {
          id: event.id as string,
          attributes: event.attributes as Record<string, string | number>,
          point: event.point as Vec3,
        },
      };
    case 'HidePanel':
      return { ...vm, panel: null };
    case 'LevelChanged':
      return { ...vm, level: event.level as number };
    case 'AggregateComputed': {
      const id = event.id as string;
      return {
        ...vm,
        aggregates: { ...vm.aggregates, [id]: { key: event.key as string, value: event.value as number } },
      };
    }
    case 'LayoutUpdated':
      return { ...vm, layout: event.layout as unknown as LayoutPayload };
    default:
      // GroupCreated/GroupUpdated geometry arrives via LayoutUpdated;
      // CommandIssued and Notice are console-only.
      return vm;
  }
}

export function applyEnvelope(vm: ViewModel, envelope: Envelope): ViewModel {
  switch (envelope.kind) {
    case 'Snapshot':
      return {
        ...initialViewModel(),
        connection: vm.connection,
        banner: null,
        snapshot: envelope.payload as unknown as SnapshotPayload,
      };
    case 'Layout':
      return { ...vm, layout: (envelope.payload as { layout: LayoutPayload }).layout };
    case 'Feedback':
      return applyFeedback(vm, (envelope.payload as { event: FeedbackDict }).event);
    case 'Error':
      return withConsole(vm, `error ${JSON.stringify(envelope.payload.reason)}`);
    case 'Configure':
      return withConsole(vm, 'configure acknowledged');
    default:
      return vm;
  }
}
