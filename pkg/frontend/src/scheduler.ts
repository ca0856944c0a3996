/** Debounced single-flight request scheduling with supersession.
 *
 * Slider drags fire many adjustments; the scheduler coalesces them (150 ms
 * debounce) and keeps at most one request outstanding.  A response is only
 * delivered when no newer adjustment exists (queued or still debouncing):
 * anything stale is dropped, so the latest response is always the one that
 * renders.
 */

export const DEBOUNCE_MS = 150;

export interface SchedulerHooks<T> {
  run: () => Promise<T>;
  onResult: (result: T) => void;
  onError: (error: unknown) => void;
}

export class AdjustmentScheduler<T> {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private queued: SchedulerHooks<T> | null = null;
  private inFlight = false;

  constructor(private readonly debounceMs: number = DEBOUNCE_MS) {}

  /** Schedule an adjustment; newer calls supersede pending and in-flight ones. */
  request(hooks: SchedulerHooks<T>): void {
    this.queued = hooks;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.maybeLaunch();
    }, this.debounceMs);
  }

  /** True while a request is awaiting its response. */
  get busy(): boolean {
    return this.inFlight;
  }

  private superseded(): boolean {
    return this.queued !== null || this.timer !== null;
  }

  private async maybeLaunch(): Promise<void> {
    if (this.inFlight || this.queued === null) return;
    const hooks = this.queued;
    this.queued = null;
    this.inFlight = true;
    try {
      const result = await hooks.run();
      if (!this.superseded()) hooks.onResult(result);
    } catch (error) {
      if (!this.superseded()) hooks.onError(error);
    } finally {
      this.inFlight = false;
      if (this.queued !== null && this.timer === null) void this.maybeLaunch();
    }
  }
}
