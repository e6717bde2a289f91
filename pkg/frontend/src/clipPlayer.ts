// Plays one pre-generated clip by stepping a cursor through its recorded
// configuration states. Each step shows for the clip's render hint duration
// (500 ms by default, so an 8-step clip loops about every four seconds).

import type { Clip, ClipStep } from "./types.js";

export interface TimerHost {
  setInterval(handler: () => void, ms: number): number;
  clearInterval(id: number): void;
}

export class ClipPlayer {
  readonly clip: Clip;
  cursor = 0;
  /** Called after every cursor move so the owner can re-render. */
  onTick: () => void = () => {};

  private readonly host: TimerHost;
  private timer: number | null = null;

  constructor(clip: Clip, host?: TimerHost) {
    if (clip.steps.length === 0) throw new Error("clip has no steps");
    this.clip = clip;
    this.host = host ?? (globalThis as unknown as TimerHost);
  }

  get length(): number {
    return this.clip.steps.length;
  }

  get playing(): boolean {
    return this.timer !== null;
  }

  currentStep(): ClipStep {
    return this.clip.steps[this.cursor]!;
  }

  /** Move one step forward, wrapping back to the start to loop. */
  advance(): void {
    this.cursor = (this.cursor + 1) % this.length;
    this.onTick();
  }

  restart(): void {
    this.cursor = 0;
    this.onTick();
  }

  play(): void {
    if (this.timer !== null) return;
    this.timer = this.host.setInterval(() => this.advance(), this.clip.render_hint_ms_per_step);
  }

  pause(): void {
    if (this.timer === null) return;
    this.host.clearInterval(this.timer);
    this.timer = null;
  }
}
