// Pointer-to-gesture keymap. The mapper is pure and deterministic: given
// the same steps and the same layout anchor it emits the same events, so
// a scripted pointer sequence replays to byte-identical server feedback.
//
// Documented keymap (desk-scale stand-in for gaze + pinch input):
//   hover on the camera view        -> GazeMove at the image pixel
//   mouse down / up                 -> PinchStart / PinchEnd
//     (Shift held = the left hand; otherwise the right hand)
//   pointer move on the proxy panel -> HandMove at the mapped 3D point
//   long press / release            -> HoldStart / HoldEnd
//   single click                    -> HandMove + PinchStart + PinchEnd
//   double click                    -> DoubleTap
//   wheel                           -> a synthetic two-hand stretch or
//                                      squeeze past the zoom thresholds
//   drawing on the surface pad      -> SurfacePathPoint... SurfacePathEnd
//   animation frames                -> Tick(dt)
//
// Panel transform: the proxy panel is a top-down view of the layout frame
// (world x right, world z down the canvas, world y on the elevation axis):
//   world = anchor + [(x - 320) / 512, elev / 512, (y - 240) / 512]
// The trace generator mirrors these exact operations, which is what makes
// walkthroughs reproduce golden logs bit for bit.

import type { GestureEventDict, Vec3 } from './protocol.js';

export const PANEL_CX = 320;
export const PANEL_CY = 240;
export const PANEL_SCALE = 512;

export type PointerStep =
  | { type: 'gaze'; u: number; v: number; t: number }
  | { type: 'move'; hand: 'left' | 'right'; x: number; y: number; elev: number; t: number }
  | { type: 'down'; hand: 'left' | 'right'; t: number }
  | { type: 'up'; hand: 'left' | 'right'; t: number }
  | { type: 'click'; hand: 'left' | 'right'; x: number; y: number; elev: number; t: number }
  | { type: 'press'; x: number; y: number; elev: number; t: number }
  | { type: 'release'; t: number }
  | { type: 'tap'; x: number; y: number; elev: number; t: number }
  | { type: 'dbl'; x: number; y: number; elev: number; t: number }
  | { type: 'path'; x: number; y: number; t: number }
  | { type: 'pathend'; t: number }
  | { type: 'tick'; dt: number; t: number }
  | { type: 'wheel'; dy: number; x: number; y: number; elev: number; t: number };

export class PointerMapper {
  anchor: Vec3 = [0, 0, 0];

  /** Update from the latest Layout message; the panel view is anchored there. */
  setAnchor(anchor: Vec3): void {
    this.anchor = anchor;
  }

  panelToWorld(x: number, y: number, elev: number): number[] {
    const a = this.anchor;
    return [a[0] + (x - PANEL_CX) / PANEL_SCALE, a[1] + elev / PANEL_SCALE, a[2] + (y - PANEL_CY) / PANEL_SCALE];
  }

  padToSurface(x: number, y: number): number[] {
    return [(x - PANEL_CX) / PANEL_SCALE, (y - PANEL_CY) / PANEL_SCALE];
  }

  mapStep(step: PointerStep): GestureEventDict[] {
    switch (step.type) {
      case 'gaze':
        return [{ t: step.t, kind: 'GazeMove', px: [step.u, step.v] }];
      case 'move':
        return [{ t: step.t, kind: 'HandMove', hand: step.hand, point: this.panelToWorld(step.x, step.y, step.elev) }];
      case 'down':
        return [{ t: step.t, kind: 'PinchStart', hand: step.hand }];
      case 'up':
        return [{ t: step.t, kind: 'PinchEnd', hand: step.hand }];
      case 'click':
        return [
          { t: step.t, kind: 'HandMove', hand: step.hand, point: this.panelToWorld(step.x, step.y, step.elev) },
          { t: step.t, kind: 'PinchStart', hand: step.hand },
          { t: step.t + 1, kind: 'PinchEnd', hand: step.hand },
        ];
      case 'press':
        return [{ t: step.t, kind: 'HoldStart', point: this.panelToWorld(step.x, step.y, step.elev) }];
      case 'release':
        return [{ t: step.t, kind: 'HoldEnd' }];
      case 'tap':
        return [{ t: step.t, kind: 'Tap', point: this.panelToWorld(step.x, step.y, step.elev) }];
      case 'dbl':
        return [{ t: step.t, kind: 'DoubleTap', point: this.panelToWorld(step.x, step.y, step.elev) }];
      case 'path':
        return [{ t: step.t, kind: 'SurfacePathPoint', point: this.padToSurface(step.x, step.y) }];
      case 'pathend':
        return [{ t: step.t, kind: 'SurfacePathEnd' }];
      case 'tick':
        return [{ t: step.t, kind: 'Tick', dt: step.dt }];
      case 'wheel':
        return this.wheelZoom(step);
      default:
        return [];
    }
  }

  /**
   * Wheel shortcut: synthesize a two-hand session centered on the hovered
   * point. Wheel up stretches 16 px -> 24 px (ratio 1.5, past the 1.4
   * descend threshold); wheel down squeezes 16 px -> 10 px (ratio 0.625,
   * past the 0.7 ascend threshold).
   */
  private wheelZoom(step: { dy: number; x: number; y: number; elev: number; t: number }): GestureEventDict[] {
    const spread = step.dy < 0 ? 12 : 5;
    const half = 8;
    const at = (dx: number) => this.panelToWorld(step.x + dx, step.y, step.elev);
    let t = step.t;
    const next = () => ++t;
    return [
      { t: next(), kind: 'HandMove', hand: 'left', point: at(-half) },
      { t: next(), kind: 'HandMove', hand: 'right', point: at(half) },
      { t: next(), kind: 'PinchStart', hand: 'left' },
      { t: next(), kind: 'PinchStart', hand: 'right' },
      { t: next(), kind: 'HandMove', hand: 'left', point: at(-spread) },
      { t: next(), kind: 'HandMove', hand: 'right', point: at(spread) },
      { t: next(), kind: 'PinchEnd', hand: 'left' },
      { t: next(), kind: 'PinchEnd', hand: 'right' },
    ];
  }
}
