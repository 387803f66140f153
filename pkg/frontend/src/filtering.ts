/** Client-side antenna filtering.
 *
 * Semantics are identical to the pipeline's own filter: an antenna is
 * visible iff its population strictly exceeds min_volume AND its
 * vulnerable fraction strictly exceeds beta. Unpopulated antennas are
 * never visible. Both sides compute the fraction as one IEEE double
 * division, so the comparison agrees bit for bit with the export.
 */

import type { AntennaRow } from "./types.js";

export function vulnerableFraction(row: AntennaRow): number | null {
  return row.N === 0 ? null : row.V / row.N;
}

export function isVisible(row: AntennaRow, beta: number, minVolume: number): boolean {
  if (row.N === 0 || row.N <= minVolume) return false;
  return row.V / row.N > beta;
}

/** Sorted ids of the antennas passing the filters. */
export function visibleSet(rows: AntennaRow[], beta: number, minVolume: number): string[] {
  return rows
    .filter((row) => isVisible(row, beta, minVolume))
    .map((row) => row.id)
    .sort();
}
