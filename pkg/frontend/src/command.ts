// Builds command text from picker state. The output must match the
// service grammar byte-for-byte, so the shape is fixed here and pinned by
// tests against server-formatted strings.

export interface Selection {
  limb: string | null;
  origin: string | null;
  direction: string | null;
  size: number | null;
}

export function emptySelection(): Selection {
  return { limb: null, origin: null, direction: null, size: null };
}

export function commandText(sel: Selection): string | null {
  if (!sel.limb || !sel.origin || !sel.direction) return null;
  if (sel.size === null || !Number.isInteger(sel.size) || sel.size < 1) {
    return null;
  }
  return `${sel.limb} @ ${sel.origin} -> ${sel.direction} * ${sel.size}`;
}

// Slider label for sizes past the stored range: the excess becomes base
// translation on mobile platforms.
export function overflowLabel(size: number, kmax: number): string | null {
  if (size <= kmax) return null;
  return `locomotion +${size - kmax}`;
}

export interface HistoryEntry {
  text: string;
  accepted: boolean;
  detail: string;
}
