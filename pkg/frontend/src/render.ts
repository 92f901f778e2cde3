// Canvas rendering. Pure draw-from-viewmodel: no state of its own.

import { PANEL_CX, PANEL_CY, PANEL_SCALE } from './gestures.js';
import { walkNodes, type Vec3 } from './protocol.js';
import type { ViewModel } from './viewmodel.js';

const OBJECT_COLOR = '#5a6b7a';
const PROXY_COLOR = '#8fa3b5';

interface WorldTransform {
  toCanvas(p: Vec3): [number, number];
}

/** Top-down (x/z) world view fitted to the known object positions. */
function worldTransform(vm: ViewModel, width: number, height: number): WorldTransform {
  const points = Object.values(vm.snapshot?.positions ?? {});
  let minX = -1, maxX = 1, minZ = 0, maxZ = 4;
  if (points.length) {
    minX = Math.min(...points.map((p) => p[0]));
    maxX = Math.max(...points.map((p) => p[0]));
    minZ = Math.min(...points.map((p) => p[2]));
    maxZ = Math.max(...points.map((p) => p[2]));
  }
  const pad = 0.5;
  const scale = Math.min(width / (maxX - minX + 2 * pad), height / (maxZ - minZ + 2 * pad));
  return {
    toCanvas: (p) => [(p[0] - minX + pad) * scale, height - (p[2] - minZ + pad) * scale],
  };
}

export function drawWorld(ctx: CanvasRenderingContext2D, vm: ViewModel): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = '#10161c';
  ctx.fillRect(0, 0, width, height);
  if (!vm.snapshot) return;
  const tf = worldTransform(vm, width, height);
  ctx.font = '11px system-ui';
  const labels = new Map<string, string>();
  for (const node of walkNodes(vm.snapshot.scene.nodes)) labels.set(node.id, node.label);
  for (const [id, pos] of Object.entries(vm.snapshot.positions)) {
    const [x, y] = tf.toCanvas(pos);
    const highlight = vm.objectHighlights[id];
    ctx.beginPath();
    ctx.arc(x, y, highlight ? 8 : 5, 0, Math.PI * 2);
    ctx.fillStyle = highlight ?? OBJECT_COLOR;
    ctx.fill();
    ctx.fillStyle = '#c7d2dc';
    ctx.fillText(`${id} ${labels.get(id) ?? ''}`, x + 10, y + 4);
  }
  if (vm.panel) {
    const [x, y] = tf.toCanvas(vm.panel.point);
    const lines = Object.entries(vm.panel.attributes).map(([k, v]) => `${k}: ${v}`);
    const w = 150;
    const h = 16 * (lines.length + 1) + 6;
    ctx.fillStyle = 'rgba(20, 30, 40, 0.92)';
    ctx.strokeStyle = '#86c5ff';
    ctx.fillRect(x + 12, y - h, w, h);
    ctx.strokeRect(x + 12, y - h, w, h);
    ctx.fillStyle = '#e8f1f8';
    ctx.fillText(vm.panel.id, x + 18, y - h + 14);
    lines.forEach((line, i) => ctx.fillText(line, x + 18, y - h + 30 + 16 * i));
  }
}

/** Hand-anchored proxy panel: layout-frame x across, z down, y ignored. */
export function drawProxyPanel(ctx: CanvasRenderingContext2D, vm: ViewModel): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = '#0b0f14';
  ctx.fillRect(0, 0, width, height);
  ctx.font = '10px system-ui';
  if (!vm.layout) return;
  const px = (cx: number) => PANEL_CX + cx * PANEL_SCALE;
  const py = (cz: number) => PANEL_CY + cz * PANEL_SCALE;
  for (const c of vm.layout.containers) {
    const size = c.half_extent * 2 * PANEL_SCALE;
    ctx.strokeStyle = vm.proxyHighlights[c.id] ?? '#b78cd6';
    ctx.setLineDash(c.collapsed ? [] : [4, 3]);
    ctx.strokeRect(px(c.center[0]) - size / 2, py(c.center[2]) - size / 2, size, size);
    ctx.setLineDash([]);
    const badge = vm.aggregates[c.id];
    ctx.fillStyle = '#e8d8f5';
    const label = badge ? `${c.id} ${badge.key}=${badge.value}` : `${c.id} (${c.members.length})`;
    ctx.fillText(label, px(c.center[0]) - size / 2, py(c.center[2]) - size / 2 - 4);
  }
  for (const box of vm.layout.boxes) {
    const size = box.half_extent * 2 * PANEL_SCALE;
    const x = px(box.center[0]) - size / 2;
    const y = py(box.center[2]) - size / 2;
    const highlight = vm.proxyHighlights[box.id];
    ctx.fillStyle = highlight ?? PROXY_COLOR;
    ctx.fillRect(x, y, size, size);
    if (vm.selection.includes(box.id)) {
      ctx.strokeStyle = '#ffd400';
      ctx.lineWidth = 2;
      ctx.strokeRect(x - 2, y - 2, size + 4, size + 4);
      ctx.lineWidth = 1;
    }
    ctx.fillStyle = '#9fb2c2';
    ctx.fillText(box.id, x, y - 3);
  }
  for (const attr of vm.layout.attribute_boxes) {
    const size = attr.half_extent * 2 * PANEL_SCALE;
    const x = px(attr.center[0]) - size / 2;
    const y = py(attr.center[2]) - size / 2;
    ctx.fillStyle = '#2d4a63';
    ctx.fillRect(x, y, size, size);
    ctx.strokeStyle = '#86c5ff';
    ctx.strokeRect(x, y, size, size);
    ctx.fillStyle = '#bfe0ff';
    ctx.fillText(`${attr.key}=${attr.value}`, x, y + size + 10);
  }
}

export function drawConsole(element: HTMLElement, vm: ViewModel): void {
  element.textContent = vm.console.slice(-18).join('\n');
}

export function drawBanner(element: HTMLElement, vm: ViewModel): void {
  element.textContent = vm.banner ?? '';
  element.style.display = vm.banner ? 'block' : 'none';
}
