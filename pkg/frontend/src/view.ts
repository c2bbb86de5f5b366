/** Pure view formatting; DOM wiring lives in main.ts. */

export interface BagRow {
  itemId: string;
  label: string;
}

/** Parse the service bag description ("(empty)" or "- id (kind): desc" lines). */
export function bagRows(bag: string): BagRow[] {
  if (bag.trim() === "(empty)" || bag.trim() === "") return [];
  const rows: BagRow[] = [];
  for (const line of bag.split("\n")) {
    const m = /^- (\S+) \(([^)]+)\): (.*)$/.exec(line.trim());
    if (m) rows.push({ itemId: m[1]!, label: `${m[1]} (${m[2]}) — ${m[3]}` });
  }
  return rows;
}

export function stepCounter(used: number, limit: number): string {
  return `step ${used} / ${limit}`;
}

/** Terminal banner text, or null while the episode is running. */
export function bannerFor(status: string, stepsUsed: number): string | null {
  if (status === "escaped") return `Escaped successfully in ${stepsUsed} steps!`;
  if (status === "failed") return `Out of steps after ${stepsUsed} — no escape.`;
  return null;
}

/** Reconnect delay schedule for the frame stream, milliseconds. */
export function backoffDelay(attempt: number): number {
  return Math.min(500 * 2 ** Math.max(0, attempt - 1), 8000);
}
