import { describe, expect, it } from 'vitest';

import type { Resolution, StreamMessage } from '../src/api.js';
import {
  applyMessage,
  connectStream,
  createStreamState,
  isStale,
  SocketLike,
} from '../src/stream.js';
import { loadFixture } from './util.js';

interface StreamFixture {
  platform: string;
  command: string;
  resolution: Resolution;
  messages: StreamMessage[];
}

const reach = loadFixture<StreamFixture>('stream_left_high.json');

function message(seq: number): StreamMessage {
  return { v: 1, seq, t: seq / 10, pose: [0], base: [0, 0, 0], frames: {} };
}

describe('stream state', () => {
  it('applies messages in seq order and drops stale seq', () => {
    const state = createStreamState();
    expect(applyMessage(state, message(3), 0)).toBe(true);
    expect(applyMessage(state, message(5), 10)).toBe(true);
    expect(applyMessage(state, message(4), 20)).toBe(false);
    expect(applyMessage(state, message(5), 30)).toBe(false);
    expect(state.latest!.seq).toBe(5);
  });

  it('reports staleness after a silent second', () => {
    const state = createStreamState();
    expect(isStale(state, 0)).toBe(true);
    applyMessage(state, message(1), 1000);
    expect(isStale(state, 1500)).toBe(false);
    expect(isStale(state, 2001)).toBe(true);
  });

  it('replays a captured session to the resolved goal', () => {
    const state = createStreamState();
    let applied = 0;
    for (const msg of reach.messages) {
      if (applyMessage(state, msg, applied)) applied += 1;
    }
    expect(applied).toBe(reach.messages.length);
    expect(state.latest!.pose).toEqual(reach.resolution.goal);
  });

  it('wires a socket and parses frames', () => {
    const socket: SocketLike = { onmessage: null, onclose: null, close() {} };
    const updates: number[] = [];
    const handle = connectStream(
      'ws://test', (s) => updates.push(s.lastSeq), () => socket, () => 0,
    );
    socket.onmessage!({ data: JSON.stringify(message(1)) });
    socket.onmessage!({ data: 'not json' });
    socket.onmessage!({ data: JSON.stringify(message(2)) });
    expect(updates).toEqual([1, 2]);
    expect(handle.state.latest!.seq).toBe(2);
    handle.close();
  });
});
