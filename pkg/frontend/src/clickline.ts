/** Click-line play loop: sequences of ten stimuli, distance scoring.
 *
 * DOM-free state machine; rendering and input capture live in main.ts.
 * The first sequence is the training phase (the service starts every
 * session at the easiest tier).
 */

import { ApiClient, ClicklineResult, ClicklineStimulus } from "./api.js";

export type Phase = "idle" | "showing" | "answered" | "summary";

export class ClicklineGame {
  session: string | null = null;
  stimulus: ClicklineStimulus | null = null;
  lastResult: ClicklineResult | null = null;
  phase: Phase = "idle";
  sequenceScores: number[] = [];
  lastError: string | null = null;

  constructor(private api: ApiClient) {}

  /** First sequence of a session is the labeled training phase. */
  get isTraining(): boolean {
    return (this.stimulus?.sequence ?? 0) === 0;
  }

  get sequenceMean(): number | null {
    if (this.sequenceScores.length === 0) return null;
    const sum = this.sequenceScores.reduce((a, b) => a + b, 0);
    return sum / this.sequenceScores.length;
  }

  async next(): Promise<ClicklineStimulus | null> {
    this.lastError = null;
    try {
      // passing the stored session resumes at the current sequence
      // index after a disconnect
      this.stimulus = await this.api.clicklineNext(this.session ?? undefined);
      this.session = this.stimulus.session;
      this.lastResult = null;
      this.phase = "showing";
      return this.stimulus;
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
      return null;
    }
  }

  async answer(x: number, y: number): Promise<ClicklineResult | null> {
    if (this.phase !== "showing" || !this.session) return null;
    this.lastError = null;
    try {
      const result = await this.api.clicklineAnswer(this.session, x, y);
      this.lastResult = result;
      this.sequenceScores.push(result.score);
      if (result.sequence_complete) {
        this.phase = "summary";
      } else {
        this.phase = "answered";
      }
      return result;
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
      return null;
    }
  }

  /** Leave the end-of-sequence summary and start the next sequence. */
  acknowledgeSummary(): void {
    if (this.phase === "summary") {
      this.sequenceScores = [];
      this.phase = "answered";
    }
  }
}
