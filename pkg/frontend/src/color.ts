/** Continuous red-to-blue color map over a batch's log10(NFA) range.
 *
 * The most significant detection (smallest log NFA) renders red, the
 * least significant blue; a single detection renders red.
 */

export function nfaColor(logNfa: number, lo: number, hi: number): string {
  let x: number;
  if (hi <= lo) {
    x = 0;
  } else {
    x = (logNfa - lo) / (hi - lo);
    x = Math.min(1, Math.max(0, x));
  }
  const r = Math.round(255 * (1 - x));
  const b = Math.round(255 * x);
  return `rgb(${r}, 26, ${b})`;
}

/** log10(NFA) range of a set of detections, for nfaColor. */
export function nfaRange(scores: number[]): [number, number] {
  if (scores.length === 0) return [0, 0];
  return [Math.min(...scores), Math.max(...scores)];
}
