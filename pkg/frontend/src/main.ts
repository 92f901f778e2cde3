// Browser bootstrap: wires DOM input to the pointer mapper and renders
// the view model on every server message.

import { SessionClient } from './client.js';
import type { PointerStep } from './gestures.js';
import { drawBanner, drawConsole, drawProxyPanel, drawWorld } from './render.js';

const LONG_PRESS_MS = 550;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function main(): void {
  const world = el<HTMLCanvasElement>('world');
  const panel = el<HTMLCanvasElement>('panel');
  const pad = el<HTMLCanvasElement>('pad');
  const consoleEl = el<HTMLDivElement>('console');
  const bannerEl = el<HTMLDivElement>('banner');
  const sceneInput = el<HTMLInputElement>('scene');
  const camera = el<HTMLCanvasElement>('camera');

  const params = new URLSearchParams(location.search);
  const scene = params.get('scene') ?? 'office/scene.json';
  sceneInput.value = scene;
  const url = `ws://${location.host}/session`;

  const client = new SessionClient({
    url,
    scene,
    onUpdate: (vm) => {
      drawWorld(world.getContext('2d')!, vm);
      drawProxyPanel(panel.getContext('2d')!, vm);
      drawConsole(consoleEl, vm);
      drawBanner(bannerEl, vm);
      drawCamera(camera, vm);
    },
  });
  client.connect();
  sceneInput.addEventListener('change', () => {
    location.search = `?scene=${encodeURIComponent(sceneInput.value)}`;
  });

  const now = () => Math.round(performance.now());
  const send = (step: PointerStep) => client.sendStep(step);
  let elevation = 0;
  let pressTimer: number | null = null;
  let pressed = false;

  // camera view hover = gaze (image pixels)
  camera.addEventListener('pointermove', (ev) => {
    const scaleX = (client.vm.snapshot?.scene.image_size[0] ?? 1000) / camera.width;
    const scaleY = (client.vm.snapshot?.scene.image_size[1] ?? 1000) / camera.height;
    send({ type: 'gaze', u: ev.offsetX * scaleX, v: ev.offsetY * scaleY, t: now() });
  });
  camera.addEventListener('pointerdown', (ev) => {
    send({ type: 'down', hand: ev.shiftKey ? 'left' : 'right', t: now() });
  });
  camera.addEventListener('pointerup', (ev) => {
    send({ type: 'up', hand: ev.shiftKey ? 'left' : 'right', t: now() });
  });

  // proxy panel: hand movement, pinches, holds, double taps, wheel zoom
  panel.addEventListener('pointermove', (ev) => {
    send({ type: 'move', hand: ev.shiftKey ? 'left' : 'right', x: ev.offsetX, y: ev.offsetY, elev: elevation, t: now() });
  });
  panel.addEventListener('pointerdown', (ev) => {
    const hand = ev.shiftKey ? 'left' : 'right';
    if (ev.button === 2 || ev.altKey) {
      pressed = true;
      send({ type: 'press', x: ev.offsetX, y: ev.offsetY, elev: elevation, t: now() });
      return;
    }
    pressTimer = window.setTimeout(() => {
      pressed = true;
      send({ type: 'press', x: ev.offsetX, y: ev.offsetY, elev: elevation, t: now() });
      pressTimer = null;
    }, LONG_PRESS_MS);
    send({ type: 'down', hand, t: now() });
  });
  panel.addEventListener('pointerup', (ev) => {
    if (pressTimer !== null) {
      clearTimeout(pressTimer);
      pressTimer = null;
    }
    if (pressed) {
      pressed = false;
      send({ type: 'release', t: now() });
    }
    send({ type: 'up', hand: ev.shiftKey ? 'left' : 'right', t: now() });
  });
  panel.addEventListener('dblclick', (ev) => {
    send({ type: 'dbl', x: ev.offsetX, y: ev.offsetY, elev: elevation, t: now() });
  });
  panel.addEventListener('wheel', (ev) => {
    ev.preventDefault();
    send({ type: 'wheel', dy: ev.deltaY, x: ev.offsetX, y: ev.offsetY, elev: elevation, t: now() });
  });
  panel.addEventListener('contextmenu', (ev) => ev.preventDefault());
  window.addEventListener('keydown', (ev) => {
    if (ev.key === '[') elevation -= 8;
    if (ev.key === ']') elevation += 8;
  });

  // surface pad: lasso drawing
  let drawing = false;
  pad.addEventListener('pointerdown', (ev) => {
    drawing = true;
    send({ type: 'path', x: ev.offsetX, y: ev.offsetY, t: now() });
  });
  pad.addEventListener('pointermove', (ev) => {
    if (drawing) send({ type: 'path', x: ev.offsetX, y: ev.offsetY, t: now() });
  });
  pad.addEventListener('pointerup', () => {
    drawing = false;
    send({ type: 'pathend', t: now() });
  });

  // steady ticks keep the lazy-follow anchor honest
  let last = performance.now();
  const tick = () => {
    const current = performance.now();
    if (current - last >= 50 && client.vm.connection === 'open') {
      send({ type: 'tick', dt: (current - last) / 1000, t: Math.round(current) });
      last = current;
    }
    requestAnimationFrame(tick);
  };
  requestAnimationFrame(tick);
}

function drawCamera(canvas: HTMLCanvasElement, vm: import('./viewmodel.js').ViewModel): void {
  const ctx = canvas.getContext('2d')!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = '#141a21';
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const snapshot = vm.snapshot;
  if (!snapshot) return;
  const [iw, ih] = snapshot.scene.image_size;
  const sx = canvas.width / iw;
  const sy = canvas.height / ih;
  ctx.font = '10px system-ui';
  const draw = (nodes: typeof snapshot.scene.nodes, ox: number, oy: number) => {
    for (const node of nodes) {
      const [x, y, w, h] = node.bbox;
      const rx = (ox + x) * sx;
      const ry = (oy + y) * sy;
      ctx.strokeStyle = vm.objectHighlights[node.id] ?? '#3d5366';
      ctx.strokeRect(rx, ry, w * sx, h * sy);
      ctx.fillStyle = '#9fb2c2';
      ctx.fillText(node.label, rx + 2, ry + 10);
      draw(node.children ?? [], ox + x, oy + y);
    }
  };
  draw(snapshot.scene.nodes, 0, 0);
}

main();
