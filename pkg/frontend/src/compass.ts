// The 26 spatial pulls plus place-middle, and the picker model built from
// a catalog pair. Availability comes from the catalog only; the compass
// never invents an option the service did not report.

import type { CatalogPair } from './api.js';

export interface Pull {
  lateral: -1 | 0 | 1;
  sagittal: -1 | 0 | 1;
  vertical: -1 | 0 | 1;
}

const LATERAL: Record<number, string> = { 1: 'left', [-1]: 'right' };
const SAGITTAL: Record<number, string> = { 1: 'forward', [-1]: 'back' };
const LEVEL: Record<number, string> = { 1: 'high', 0: 'middle', [-1]: 'low' };

export function pullName(p: Pull): string {
  const parts: string[] = [];
  if (p.lateral) parts.push(LATERAL[p.lateral]);
  if (p.sagittal) parts.push(SAGITTAL[p.sagittal]);
  if (parts.length === 0) parts.push('place');
  parts.push(LEVEL[p.vertical]);
  return parts.join('-');
}

const COMPONENTS: (-1 | 0 | 1)[] = [1, 0, -1];

// All 27 cells, grouped per level for the 3x3x3 widget: rows run
// forward -> back, columns left -> right, levels high -> low.
export function compassGrid(): Pull[][][] {
  const levels: Pull[][][] = [];
  for (const vertical of COMPONENTS) {
    const rows: Pull[][] = [];
    for (const sagittal of COMPONENTS) {
      const row: Pull[] = [];
      for (const lateral of COMPONENTS) {
        row.push({ lateral, sagittal, vertical });
      }
      rows.push(row);
    }
    levels.push(rows);
  }
  return levels;
}

export interface CompassOption {
  name: string;
  pull: Pull;
  available: boolean;
  kmax: number;
}

export function compassOption(pull: Pull, pair: CatalogPair): CompassOption {
  const name = pullName(pull);
  const available = pair.directions.includes(name);
  return { name, pull, available, kmax: pair.kmax[name] ?? 0 };
}

// The picker's option list: exactly the catalog's array, order preserved.
export function availableDirections(pair: CatalogPair): string[] {
  return pair.directions.slice();
}
