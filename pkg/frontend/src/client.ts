// Session client: one socket, envelopes in seq order, auto-reconnect with
// a fresh LoadScene. Interaction state lives entirely on the server.

import { PointerMapper, type PointerStep } from './gestures.js';
import { isEnvelope, type Envelope, type GestureEventDict, type Vec3 } from './protocol.js';
import { applyEnvelope, initialViewModel, type ViewModel } from './viewmodel.js';

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientOptions {
  url: string;
  scene: string;
  socketFactory?: SocketFactory;
  onUpdate?: (vm: ViewModel) => void;
  reconnectDelayMs?: number;
  scheduler?: (fn: () => void, ms: number) => void;
}

export class SessionClient {
  vm: ViewModel = initialViewModel();
  mapper = new PointerMapper();
  private socket: SocketLike | null = null;
  private seqOut = 0;
  private lastSeqIn = 0;
  private stopped = false;

  constructor(private options: ClientOptions) {}

  connect(): void {
    const factory =
      this.options.socketFactory ?? ((url: string) => new WebSocket(url) as unknown as SocketLike);
    this.update({ ...this.vm, connection: 'connecting' });
    let socket: SocketLike;
    try {
      socket = factory(this.options.url);
    } catch (err) {
      this.update({ ...this.vm, connection: 'closed', banner: `connection failed: ${err}` });
      this.scheduleReconnect();
      return;
    }
    this.socket = socket;
    this.seqOut = 0;
    this.lastSeqIn = 0;
    socket.onopen = () => {
      this.update({ ...this.vm, connection: 'open', banner: null });
      this.sendEnvelope('LoadScene', { scene: this.options.scene });
    };
    socket.onmessage = (event) => this.receive(String(event.data));
    socket.onclose = () => {
      if (this.stopped) return;
      this.update({ ...this.vm, connection: 'closed', banner: 'connection lost, retrying...' });
      this.scheduleReconnect();
    };
    socket.onerror = () => {
      this.update({ ...this.vm, banner: 'connection error' });
    };
  }

  stop(): void {
    this.stopped = true;
    this.socket?.close();
  }

  private scheduleReconnect(): void {
    if (this.stopped) return;
    const schedule = this.options.scheduler ?? ((fn, ms) => setTimeout(fn, ms));
    schedule(() => {
      if (!this.stopped) this.connect();
    }, this.options.reconnectDelayMs ?? 1000);
  }

  private receive(raw: string): void {
    let parsed: unknown;
    try {
      parsed = JSON.parse(raw);
    } catch {
      return; // a malformed server frame is dropped, never crashes the client
    }
    if (!isEnvelope(parsed)) return;
    const envelope = parsed as Envelope;
    if (envelope.seq <= this.lastSeqIn) return; // stale or replayed frame
    this.lastSeqIn = envelope.seq;
    this.update(applyEnvelope(this.vm, envelope));
    const layout =
      envelope.kind === 'Layout'
        ? (envelope.payload as { layout: { anchor: Vec3 } }).layout
        : envelope.kind === 'Feedback' &&
            (envelope.payload as { event: { kind: string } }).event.kind === 'LayoutUpdated'
          ? (envelope.payload as { event: { layout: { anchor: Vec3 } } }).event.layout
          : null;
    if (layout) this.mapper.setAnchor(layout.anchor);
  }

  private update(vm: ViewModel): void {
    this.vm = vm;
    this.options.onUpdate?.(vm);
  }

  sendEnvelope(kind: string, payload: Record<string, unknown>): void {
    this.socket?.send(JSON.stringify({ seq: ++this.seqOut, kind, payload }));
  }

  sendGesture(event: GestureEventDict): void {
    this.sendEnvelope('Gesture', { event });
  }

  sendStep(step: PointerStep): void {
    for (const event of this.mapper.mapStep(step)) this.sendGesture(event);
  }
}
