// WebSocket side of the contract: messages applied in seq order,
// out-of-order drops, staleness after a silent second.

import type { StreamMessage } from './api.js';

export const STALE_AFTER_MS = 1000;

export interface StreamState {
  latest: StreamMessage | null;
  lastSeq: number;
  lastAtMs: number;
}

export function createStreamState(): StreamState {
  return { latest: null, lastSeq: 0, lastAtMs: 0 };
}

export function applyMessage(
  state: StreamState,
  message: StreamMessage,
  nowMs: number,
): boolean {
  if (message.seq <= state.lastSeq) return false;
  state.latest = message;
  state.lastSeq = message.seq;
  state.lastAtMs = nowMs;
  return true;
}

export function isStale(state: StreamState, nowMs: number): boolean {
  if (state.latest === null) return true;
  return nowMs - state.lastAtMs > STALE_AFTER_MS;
}

export interface SocketLike {
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface StreamHandle {
  state: StreamState;
  close(): void;
}

export function connectStream(
  url: string,
  onUpdate: (state: StreamState) => void,
  factory?: SocketFactory,
  now: () => number = () => Date.now(),
): StreamHandle {
  const make: SocketFactory =
    factory ?? ((u) => new WebSocket(u) as unknown as SocketLike);
  const state = createStreamState();
  const socket = make(url);
  socket.onmessage = (ev) => {
    let message: StreamMessage;
    try {
      message = JSON.parse(ev.data) as StreamMessage;
    } catch {
      return;
    }
    if (applyMessage(state, message, now())) onUpdate(state);
  };
  return { state, close: () => socket.close() };
}
