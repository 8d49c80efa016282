import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { debounce, LatestWins } from '../src/scheduling.js';

describe('debounce', () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it('fires once with the last arguments after the quiet period', () => {
    const calls: number[] = [];
    const fn = debounce((v: number) => calls.push(v), 250);
    fn(1);
    vi.advanceTimersByTime(100);
    fn(2);
    vi.advanceTimersByTime(100);
    fn(3);
    vi.advanceTimersByTime(249);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(1);
    expect(calls).toEqual([3]);
  });

  it('can be canceled', () => {
    const calls: number[] = [];
    const fn = debounce((v: number) => calls.push(v), 50);
    fn(1);
    fn.cancel();
    vi.advanceTimersByTime(200);
    expect(calls).toEqual([]);
  });
});

function deferred(): { promise: Promise<void>; resolve: () => void } {
  let resolve!: () => void;
  const promise = new Promise<void>((r) => {
    resolve = r;
  });
  return { promise, resolve };
}

describe('LatestWins', () => {
  it('runs a task immediately when idle', async () => {
    const queue = new LatestWins();
    let ran = false;
    queue.schedule(async () => {
      ran = true;
    });
    await vi.waitFor(() => expect(ran).toBe(true));
  });

  it('newer tasks replace the queued one while busy', async () => {
    const queue = new LatestWins();
    const gate = deferred();
    const order: string[] = [];
    queue.schedule(async () => {
      order.push('first');
      await gate.promise;
    });
    queue.schedule(async () => {
      order.push('second');
    });
    queue.schedule(async () => {
      order.push('third');
    });
    expect(queue.busy).toBe(true);
    gate.resolve();
    await vi.waitFor(() => expect(queue.busy).toBe(false));
    // "second" was superseded before it ever started
    expect(order).toEqual(['first', 'third']);
  });

  it('reports busy transitions', async () => {
    const states: boolean[] = [];
    const queue = new LatestWins((b) => states.push(b));
    queue.schedule(async () => {});
    await vi.waitFor(() => expect(states).toEqual([true, false]));
  });

  it('recovers after a task throws', async () => {
    const queue = new LatestWins();
    queue.schedule(async () => {
      throw new Error('boom');
    });
    await vi.waitFor(() => expect(queue.busy).toBe(false));
    let ran = false;
    queue.schedule(async () => {
      ran = true;
    });
    await vi.waitFor(() => expect(ran).toBe(true));
  });
});
