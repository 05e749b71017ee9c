// Playback ticker: calls the advance callback at the playback frame rate.

export class FramePlayer {
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(private onTick: () => void) {}

  start(fps: number): void {
    this.stop();
    this.timer = setInterval(this.onTick, 1000 / Math.max(fps, 1));
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  get running(): boolean {
    return this.timer !== null;
  }
}
