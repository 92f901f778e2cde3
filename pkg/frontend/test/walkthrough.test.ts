// UI acceptance walkthrough: spawn the real service, drive the office
// scenario purely through the documented pointer keymap over a live
// socket, and require the server-side feedback to equal the frozen
// golden byte for byte.

import { spawn, type ChildProcess } from 'node:child_process';
import { readFileSync } from 'node:fs';
import { join } from 'node:path';

import { WebSocket } from 'ws';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { PointerMapper, type PointerStep } from '../src/gestures.js';
import { applyEnvelope, initialViewModel, type ViewModel } from '../src/viewmodel.js';
import { isEnvelope } from '../src/protocol.js';

const REPO = join(__dirname, '..', '..');
const FIXTURES = join(REPO, 'fixtures');
const PORT = 8977;

let service: ChildProcess;

async function waitForHealth(): Promise<void> {
  for (let attempt = 0; attempt < 60; attempt++) {
    try {
      const response = await fetch(`http://127.0.0.1:${PORT}/health`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error('service did not become healthy');
}

beforeAll(async () => {
  service = spawn(
    'python3',
    ['-m', 'sceneproxy.cli', 'serve', '--port', String(PORT), '--quiet'],
    { env: { ...process.env, PROXY_FIXTURE_DIR: FIXTURES }, stdio: 'ignore' },
  );
  await waitForHealth();
}, 30_000);

afterAll(() => {
  service?.kill();
});

/** Extract the feedback event's raw canonical bytes from a Feedback frame. */
function rawFeedbackEvent(frame: string): string | null {
  const prefix = '{"kind":"Feedback","payload":{"event":';
  if (!frame.startsWith(prefix)) return null;
  const cut = frame.lastIndexOf('},"seq":');
  return frame.slice(prefix.length, cut);
}

interface Collected {
  rawEvents: string[];
  parsedKinds: string[];
  latencies: number[];
  vm: ViewModel;
}

async function driveWalkthrough(steps: PointerStep[]): Promise<Collected> {
  const mapper = new PointerMapper();
  let vm = initialViewModel();
  const ws = new WebSocket(`ws://127.0.0.1:${PORT}/session`);
  const queue: string[] = [];
  let wake: (() => void) | null = null;
  ws.on('message', (data) => {
    queue.push(String(data));
    wake?.();
  });
  const nextFrame = async (): Promise<string> => {
    while (queue.length === 0) {
      await new Promise<void>((resolve) => {
        wake = resolve;
      });
      wake = null;
    }
    return queue.shift()!;
  };
  await new Promise<void>((resolve, reject) => {
    ws.on('open', () => resolve());
    ws.on('error', (err) => reject(err));
  });

  let seq = 0;
  const send = (kind: string, payload: unknown) => {
    seq += 1;
    ws.send(JSON.stringify({ seq, kind, payload }));
  };

  send('LoadScene', { scene: 'office/scene.json' });
  const snapshotFrame = JSON.parse(await nextFrame());
  expect(snapshotFrame.kind).toBe('Snapshot');
  vm = applyEnvelope(vm, snapshotFrame);

  const rawEvents: string[] = [];
  const parsedKinds: string[] = [];
  const latencies: number[] = [];

  for (const step of steps) {
    for (const event of mapper.mapStep(step)) {
      const started = performance.now();
      send('Gesture', { event });
      send('Configure', { config: {} });
      for (;;) {
        const frame = await nextFrame();
        const parsed = JSON.parse(frame);
        if (!isEnvelope(parsed)) throw new Error(`bad frame: ${frame}`);
        if (parsed.kind === 'Configure') break;
        vm = applyEnvelope(vm, parsed);
        if (parsed.kind === 'Feedback') {
          const raw = rawFeedbackEvent(frame);
          if (raw === null) throw new Error(`unparseable feedback frame: ${frame}`);
          rawEvents.push(raw);
          parsedKinds.push((parsed.payload as { event: { kind: string } }).event.kind);
          if ((parsed.payload as { event: { kind: string } }).event.kind === 'LayoutUpdated') {
            const layout = (parsed.payload as { event: { layout: { anchor: [number, number, number] } } }).event
              .layout;
            mapper.setAnchor(layout.anchor);
          }
        }
      }
      latencies.push(performance.now() - started);
    }
  }
  ws.close();
  return { rawEvents, parsedKinds, latencies, vm };
}

describe('office walkthrough through the pointer keymap', () => {
  it('drives every feature and reproduces the golden feedback log byte for byte', async () => {
    const steps: PointerStep[] = JSON.parse(
      readFileSync(join(FIXTURES, 'traces', 'office-01.pointer.json'), 'utf-8'),
    );
    const golden = readFileSync(join(FIXTURES, 'traces', 'office-01.golden.jsonl'), 'utf-8');

    const result = await driveWalkthrough(steps);

    // the client rendered the office fixture
    expect(result.vm.snapshot?.scene.nodes.map((n) => n.label)).toEqual(['bookshelf', 'whiteboard', 'rack']);
    expect(result.vm.layout).not.toBeNull();

    // all seven interaction features produced feedback:
    expect(result.parsedKinds).toContain('ShowPanel'); // skim previews
    expect(result.parsedKinds).toContain('SelectionChanged'); // brush + filter + lasso
    expect(result.parsedKinds).toContain('LevelChanged'); // spatial zoom
    expect(result.parsedKinds).toContain('GroupCreated'); // custom group container
    expect(result.parsedKinds).toContain('AggregateComputed'); // container totals
    expect(result.parsedKinds).toContain('GroupUpdated'); // semantic grouping rebind
    expect(result.parsedKinds).toContain('HighlightObject'); // in-place highlights

    // server-side feedback equals the frozen golden, byte for byte
    const log = result.rawEvents.map((raw) => raw + '\n').join('');
    expect(log).toBe(golden);

    // local round-trip latency per gesture stays under 100 ms
    const worst = Math.max(...result.latencies);
    expect(worst).toBeLessThan(100);
  }, 60_000);
});
