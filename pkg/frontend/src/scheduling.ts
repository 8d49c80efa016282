/** Request pacing: a trailing-edge debounce for the threshold slider
 * and a latest-wins queue that keeps a single refinement in flight. */

export interface Debounced<A extends unknown[]> {
  (...args: A): void;
  cancel(): void;
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): Debounced<A> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  const wrapped = (...args: A) => {
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      fn(...args);
    }, waitMs);
  };
  wrapped.cancel = () => {
    if (timer !== null) clearTimeout(timer);
    timer = null;
  };
  return wrapped;
}

/** Runs at most one async task at a time. Tasks scheduled while one is
 * running replace any queued task, so only the newest request survives
 * (dragging a slider never piles up stale refinements). */
export class LatestWins {
  private running = false;
  private pending: (() => Promise<void>) | null = null;

  constructor(private readonly onStateChange?: (busy: boolean) => void) {}

  get busy(): boolean {
    return this.running;
  }

  schedule(task: () => Promise<void>): void {
    if (this.running) {
      this.pending = task;
      return;
    }
    void this.run(task);
  }

  private async run(task: () => Promise<void>): Promise<void> {
    this.running = true;
    this.onStateChange?.(true);
    try {
      let current: (() => Promise<void>) | null = task;
      while (current) {
        try {
          await current();
        } catch (err) {
          // tasks report their own failures; never wedge the queue
          console.error('scheduled task failed', err);
        }
        current = this.pending;
        this.pending = null;
      }
    } finally {
      this.running = false;
      this.onStateChange?.(false);
    }
  }
}
