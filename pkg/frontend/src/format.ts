/** Display formatting. The only client-side number work is rounding. */

/** Renders a wire probability exactly as the service sent it. */
export function exactProbability(p: number): string {
  return String(p);
}

/** Two-decimal bar labels; the displayed pair always sums to 1.00. */
export function barLabels(pOutcome1: number): [string, string] {
  const cents = Math.round(pOutcome1 * 100);
  return [(cents / 100).toFixed(2), ((100 - cents) / 100).toFixed(2)];
}

/** Bar segment widths as CSS percentages, matching the labels. */
export function barWidths(pOutcome1: number): [string, string] {
  const cents = Math.round(pOutcome1 * 100);
  return [`${cents}%`, `${100 - cents}%`];
}
