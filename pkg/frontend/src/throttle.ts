// Per-widget rate limiting for param_set traffic: at most one send per key
// per interval, trailing-edge so the last value of a drag always lands.
// Clock and timer are injectable for deterministic tests.

export type Clock = () => number;
export type Scheduler = (fn: () => void, delayMs: number) => void;

export class PerKeyThrottle {
  private lastSent = new Map<string, number>();
  private pending = new Map<string, () => void>();
  private scheduled = new Set<string>();

  constructor(
    private intervalMs: number,
    private now: Clock = () => Date.now(),
    private schedule: Scheduler = (fn, delay) => {
      setTimeout(fn, delay);
    },
  ) {}

  push(key: string, send: () => void): void {
    const at = this.now();
    const last = this.lastSent.get(key);
    if (!this.scheduled.has(key)
        && (last === undefined || at - last >= this.intervalMs)) {
      this.lastSent.set(key, at);
      send();
      return;
    }
    this.pending.set(key, send);
    if (!this.scheduled.has(key)) {
      this.scheduled.add(key);
      const wait = Math.max(this.intervalMs - (at - (last ?? at)), 0);
      this.schedule(() => this.flush(key), wait);
    }
  }

  private flush(key: string): void {
    this.scheduled.delete(key);
    const send = this.pending.get(key);
    if (send) {
      this.pending.delete(key);
      this.lastSent.set(key, this.now());
      send();
    }
  }
}
