// Orthographic projections of streamed frames onto the canvas, plus the
// skeleton segment layout. Body axes: x=Left, y=Forward, z=High. The
// front view looks at the platform from ahead, so +x (its left) renders
// toward the viewer's left and +z renders up.

import type { CatalogPlatform, StreamMessage } from './api.js';

export type View = 'front' | 'side' | 'top';

export interface Viewport {
  width: number;
  height: number;
  scale: number; // pixels per meter
}

export function projectPoint(
  view: View,
  point: number[],
  base: number[],
  vp: Viewport,
): [number, number] {
  const x = point[0] + base[0];
  const y = point[1] + base[1];
  const z = point[2] + base[2];
  const cx = vp.width / 2;
  const cy = vp.height / 2;
  switch (view) {
    case 'front':
      return [cx - vp.scale * x, cy - vp.scale * z];
    case 'side':
      return [cx + vp.scale * y, cy - vp.scale * z];
    case 'top':
      return [cx - vp.scale * x, cy - vp.scale * y];
  }
}

export interface Segment {
  link: string;
  from: [number, number];
  to: [number, number];
  core: boolean;
}

// Core link positions, drawn as distinct hub markers. A single-link core
// is the tree root and owns no segment, so segments alone cannot show it.
export function coreMarkers(
  platform: CatalogPlatform,
  message: StreamMessage,
  view: View,
  vp: Viewport,
): [number, number][] {
  const markers: [number, number][] = [];
  for (const linkId of platform.core_links) {
    const frame = message.frames[linkId];
    if (frame) markers.push(projectPoint(view, frame, message.base, vp));
  }
  return markers;
}

// One segment per non-root link whose frame (and parent frame) streamed.
export function skeletonSegments(
  platform: CatalogPlatform,
  message: StreamMessage,
  view: View,
  vp: Viewport,
): Segment[] {
  const coreLinks = new Set(platform.core_links);
  const segments: Segment[] = [];
  for (const link of platform.links) {
    if (link.parent === null) continue;
    const here = message.frames[link.id];
    const parent = message.frames[link.parent];
    if (!here || !parent) continue;
    segments.push({
      link: link.id,
      from: projectPoint(view, parent, message.base, vp),
      to: projectPoint(view, here, message.base, vp),
      core: coreLinks.has(link.id),
    });
  }
  return segments;
}
