// Per-case timer display. The service owns the authoritative accumulated
// time; the client extrapolates between syncs while the case is open.

export class CaseTimer {
  private syncedSeconds = 0;
  private openedAt: number | null = null;

  constructor(private now: () => number = () => Date.now() / 1000) {}

  /** Resync with the service's accumulated_seconds and (re)start ticking. */
  sync(accumulatedSeconds: number): void {
    this.syncedSeconds = accumulatedSeconds;
    this.openedAt = this.now();
  }

  pause(): void {
    if (this.openedAt !== null) {
      this.syncedSeconds += this.now() - this.openedAt;
      this.openedAt = null;
    }
  }

  seconds(): number {
    const running = this.openedAt === null ? 0 : this.now() - this.openedAt;
    return this.syncedSeconds + running;
  }

  /** "m:ss" display, e.g. 224.45 -> "3:44". */
  display(): string {
    const total = Math.floor(this.seconds());
    const minutes = Math.floor(total / 60);
    const seconds = total % 60;
    return `${minutes}:${String(seconds).padStart(2, "0")}`;
  }
}
