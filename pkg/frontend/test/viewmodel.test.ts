import { readFileSync } from 'node:fs';
import { join } from 'node:path';

import { describe, expect, it } from 'vitest';

import type { Envelope, FeedbackDict } from '../src/protocol.js';
import { applyEnvelope, applyFeedback, initialViewModel, type ViewModel } from '../src/viewmodel.js';

const FIXTURES = join(__dirname, '..', '..', 'fixtures');

function goldenEvents(name: string): FeedbackDict[] {
  return readFileSync(join(FIXTURES, 'traces', `${name}.golden.jsonl`), 'utf-8')
    .trim()
    .split('\n')
    .map((line) => JSON.parse(line));
}

function sceneSnapshotEnvelope(scene: string): Envelope {
  const doc = JSON.parse(readFileSync(join(FIXTURES, scene, 'scene.json'), 'utf-8'));
  return {
    seq: 1,
    kind: 'Snapshot',
    payload: { scene: doc, positions: {}, unplaced: [], spatializer_bypassed: false, warnings: [] },
  };
}

function play(scene: string, events: FeedbackDict[]): ViewModel {
  let vm = applyEnvelope(initialViewModel(), sceneSnapshotEnvelope(scene));
  for (const event of events) vm = applyFeedback(vm, event);
  return vm;
}

describe('view model', () => {
  it('is a pure function of the message stream', () => {
    const events = goldenEvents('office-01');
    const a = play('office', events);
    const b = play('office', events);
    expect(a).toEqual(b);
    // immutability: replaying from a snapshot of the midpoint gives the same tail
    let vm = applyEnvelope(initialViewModel(), sceneSnapshotEnvelope('office'));
    const mid = Math.floor(events.length / 2);
    for (const event of events.slice(0, mid)) vm = applyFeedback(vm, event);
    const frozen = JSON.parse(JSON.stringify(vm));
    let resumed = vm;
    for (const event of events.slice(mid)) resumed = applyFeedback(resumed, event);
    expect(JSON.parse(JSON.stringify(vm))).toEqual(frozen); // input untouched
    expect(resumed).toEqual(a);
  });

  it('mirrors dual feedback: selection highlights both views', () => {
    const events = goldenEvents('office-01');
    // find a SelectionChanged with ids and apply through that batch
    let vm = applyEnvelope(initialViewModel(), sceneSnapshotEnvelope('office'));
    let checked = 0;
    for (const event of events) {
      vm = applyFeedback(vm, event);
      if (event.kind === 'HighlightProxy') {
        const id = event.id as string;
        if (vm.selection.includes(id)) {
          expect(vm.objectHighlights[id]).toBeDefined();
          expect(vm.proxyHighlights[id]).toBeDefined();
          checked += 1;
        }
      }
    }
    expect(checked).toBeGreaterThan(3);
  });

  it('tracks level changes and layouts from the kitchen walkthrough', () => {
    const vm = play('kitchen', goldenEvents('kitchen-01'));
    expect(vm.level).toBe(2);
    expect(vm.layout?.boxes.map((b) => b.id)).toEqual(['1.1', '1.2']);
  });

  it('shows aggregate badges on containers', () => {
    const vm = play('office', goldenEvents('office-01'));
    expect(vm.aggregates['container:1']).toEqual({ key: 'price', value: 108 });
  });

  it('renders panels from ShowPanel and clears them on HidePanel', () => {
    const events = goldenEvents('office-01');
    let vm = applyEnvelope(initialViewModel(), sceneSnapshotEnvelope('office'));
    let seenPanel = false;
    for (const event of events) {
      vm = applyFeedback(vm, event);
      if (event.kind === 'ShowPanel') {
        seenPanel = true;
        expect(vm.panel?.id).toBe(event.id);
      }
      if (event.kind === 'HidePanel') expect(vm.panel).toBeNull();
    }
    expect(seenPanel).toBe(true);
  });

  it('logs and ignores unknown ids instead of crashing', () => {
    let vm = applyEnvelope(initialViewModel(), sceneSnapshotEnvelope('office'));
    vm = applyFeedback(vm, { t: 1, kind: 'HighlightObject', id: 'ghost', color: '#fff' });
    expect(vm.unknownIds).toEqual(['ghost']);
    expect(vm.objectHighlights['ghost']).toBeUndefined();
  });

  it('keeps every rendered highlight traceable to a received event', () => {
    const events = goldenEvents('building-01');
    let vm = applyEnvelope(initialViewModel(), sceneSnapshotEnvelope('building'));
    const receivedColors = new Set<string>();
    for (const event of events) {
      if (event.kind === 'HighlightObject') receivedColors.add(`${event.id}:${event.color}`);
      vm = applyFeedback(vm, event);
    }
    for (const [id, color] of Object.entries(vm.objectHighlights)) {
      expect(receivedColors.has(`${id}:${color}`)).toBe(true);
    }
  });
});
