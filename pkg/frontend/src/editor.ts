/** Dot editor state: points, undo stack, detection overlay.
 *
 * The overlay invariant: it either corresponds to the last detect
 * response for the current points, or `overlayStale` is true.  Every
 * edit marks the overlay stale; only a successful detect clears it.
 */

import {
  ApiClient,
  Detection,
  DetectorConfig,
  Domain,
  PatternFile,
} from "./api.js";

export type Point = [number, number];

export class EditorState {
  points: Point[] = [];
  overlay: Detection[] = [];
  overlayStale = false;
  config: DetectorConfig = { mode: "basic", filter: "masking" };
  lastError: string | null = null;
  lastArchiveId: string | null = null;

  private undoStack: Point[][] = [];
  private detectInFlight = false;

  constructor(
    public domain: Domain,
    private api: ApiClient,
  ) {}

  private pushUndo(): void {
    this.undoStack.push(this.points.map((p) => [p[0], p[1]]));
  }

  private markDirty(): void {
    this.overlayStale = true;
  }

  addDot(x: number, y: number): void {
    if (x < 0 || y < 0 || x > this.domain.width || y > this.domain.height) {
      return;
    }
    this.pushUndo();
    this.points.push([x, y]);
    this.markDirty();
  }

  /** Remove the dot nearest to (x, y) within `radius`, if any. */
  removeDotNear(x: number, y: number, radius = 8): boolean {
    let best = -1;
    let bestDist = radius;
    this.points.forEach(([px, py], i) => {
      const d = Math.hypot(px - x, py - y);
      if (d <= bestDist) {
        best = i;
        bestDist = d;
      }
    });
    if (best < 0) return false;
    this.pushUndo();
    this.points.splice(best, 1);
    this.markDirty();
    return true;
  }

  addRandomDots(count: number, rand: () => number = Math.random): void {
    this.pushUndo();
    for (let i = 0; i < count; i++) {
      this.points.push([
        rand() * this.domain.width,
        rand() * this.domain.height,
      ]);
    }
    this.markDirty();
  }

  loadPoints(points: Point[]): void {
    this.pushUndo();
    this.points = points.map((p) => [p[0], p[1]]);
    this.markDirty();
  }

  clear(): void {
    this.pushUndo();
    this.points = [];
    this.overlay = [];
    this.markDirty();
  }

  undo(): boolean {
    const prev = this.undoStack.pop();
    if (!prev) return false;
    this.points = prev;
    this.markDirty();
    return true;
  }

  get canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  toPattern(): PatternFile {
    return {
      domain: { ...this.domain },
      points: this.points.map((p) => [p[0], p[1]]),
    };
  }

  /** Run detection; at most one request in flight at a time. */
  async detect(): Promise<boolean> {
    if (this.detectInFlight) return false;
    this.detectInFlight = true;
    this.lastError = null;
    try {
      this.overlay = await this.api.detect(this.toPattern(), this.config);
      this.overlayStale = false;
      return true;
    } catch (err) {
      // the drawing survives server errors; only the message changes
      this.lastError = err instanceof Error ? err.message : String(err);
      return false;
    } finally {
      this.detectInFlight = false;
    }
  }

  async archive(note?: string): Promise<boolean> {
    this.lastError = null;
    try {
      const entry = await this.api.archive(
        this.toPattern(),
        this.config,
        note,
        this.lastArchiveId ?? undefined,
      );
      this.lastArchiveId = entry.id;
      return true;
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
      return false;
    }
  }
}
