// Canvas drawing. Everything rendered comes from a stream message; the
// only client-side math is the orthographic projection.

import type { CatalogPlatform, StreamMessage } from './api.js';
import {
  coreMarkers,
  projectPoint,
  skeletonSegments,
  View,
  Viewport,
} from './project.js';

const CORE_COLOR = '#e8b23c';
const LIMB_COLOR = '#6db3e8';
const GROUND_COLOR = '#333';

export function drawScene(
  ctx: CanvasRenderingContext2D,
  platform: CatalogPlatform,
  message: StreamMessage | null,
  view: View,
  vp: Viewport,
  stale: boolean,
): void {
  ctx.clearRect(0, 0, vp.width, vp.height);
  ctx.fillStyle = '#111';
  ctx.fillRect(0, 0, vp.width, vp.height);

  if (view !== 'top') {
    // Ground line through the body origin height.
    const [, gy] = projectPoint(view, [0, 0, 0], [0, 0, 0], vp);
    ctx.strokeStyle = GROUND_COLOR;
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(0, gy);
    ctx.lineTo(vp.width, gy);
    ctx.stroke();
  }

  if (message === null) {
    ctx.fillStyle = '#888';
    ctx.font = '14px sans-serif';
    ctx.fillText('waiting for stream...', 12, 24);
    return;
  }

  for (const seg of skeletonSegments(platform, message, view, vp)) {
    ctx.strokeStyle = seg.core ? CORE_COLOR : LIMB_COLOR;
    ctx.lineWidth = seg.core ? 5 : 2.5;
    ctx.beginPath();
    ctx.moveTo(seg.from[0], seg.from[1]);
    ctx.lineTo(seg.to[0], seg.to[1]);
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.beginPath();
    ctx.arc(seg.to[0], seg.to[1], seg.core ? 4 : 3, 0, 2 * Math.PI);
    ctx.fill();
  }

  ctx.fillStyle = CORE_COLOR;
  for (const [mx, my] of coreMarkers(platform, message, view, vp)) {
    ctx.fillRect(mx - 5, my - 5, 10, 10);
  }

  ctx.fillStyle = '#888';
  ctx.font = '12px monospace';
  ctx.fillText(`${view}  seq ${message.seq}  t ${message.t.toFixed(2)}s`,
    12, vp.height - 12);
  if (stale) {
    ctx.fillStyle = '#e85c5c';
    ctx.font = 'bold 14px sans-serif';
    ctx.fillText('STALE: no frames for over 1 s', 12, 24);
  }
}
