/**
 * Single-flight work queue: one backend call in flight at a time (models
 * own the accelerator exclusively), excess requests queued up to a bounded
 * depth, anything beyond that shed immediately with QueueFullError so the
 * caller can retry.
 */

export class QueueFullError extends Error {
  constructor(depth: number) {
    super(`server busy: request queue full (depth ${depth}); retry later`);
  }
}

export class SingleFlightQueue {
  private tail: Promise<void> = Promise.resolve();
  private pending = 0; // in flight + waiting

  constructor(readonly maxDepth: number) {
    if (maxDepth < 0) throw new Error("queue depth must be non-negative");
  }

  get depth(): number {
    return this.pending;
  }

  async run<T>(task: () => Promise<T>): Promise<T> {
    // one slot in flight plus maxDepth waiting
    if (this.pending > this.maxDepth) throw new QueueFullError(this.maxDepth);
    this.pending += 1;
    const turn = this.tail;
    let release!: () => void;
    this.tail = new Promise<void>((resolve) => { release = resolve; });
    await turn;
    try {
      return await task();
    } finally {
      this.pending -= 1;
      release();
    }
  }
}
