/** Byte-compatible re-implementation of the pipeline's CSV export.
 *
 * The shortlist download must match the primary export row for row, so
 * floats are rendered exactly the way CPython's repr() renders them:
 * shortest round-tripping digits, positional notation while the decimal
 * point sits in (-4, 16], otherwise scientific with a sign and at least
 * two exponent digits.
 */

import type { AntennaRow } from "./types.js";

interface Decomposed {
  digits: string; // significant digits, no leading/trailing zeros
  decpt: number; // value = 0.digits * 10^decpt
}

function parsePrecision(s: string): Decomposed {
  let mant = s;
  let exp = 0;
  const eIdx = s.search(/[eE]/);
  if (eIdx >= 0) {
    mant = s.slice(0, eIdx);
    exp = parseInt(s.slice(eIdx + 1), 10);
  }
  let digits: string;
  let point: number;
  const dot = mant.indexOf(".");
  if (dot >= 0) {
    digits = mant.slice(0, dot) + mant.slice(dot + 1);
    point = dot;
  } else {
    digits = mant;
    point = mant.length;
  }
  let lead = 0;
  while (lead < digits.length - 1 && digits[lead] === "0") lead += 1;
  digits = digits.slice(lead);
  point -= lead;
  let end = digits.length;
  while (end > 1 && digits[end - 1] === "0") end -= 1;
  return { digits: digits.slice(0, end), decpt: point + exp };
}

function shortestDigits(ax: number): Decomposed {
  for (let p = 1; p <= 17; p += 1) {
    const s = ax.toPrecision(p);
    if (Number(s) === ax) return parsePrecision(s);
  }
  return parsePrecision(ax.toPrecision(17));
}

export function pyFloatRepr(x: number): string {
  if (Number.isNaN(x)) return "nan";
  if (x === Infinity) return "inf";
  if (x === -Infinity) return "-inf";
  if (x === 0) return Object.is(x, -0) ? "-0.0" : "0.0";
  const negative = x < 0;
  const { digits, decpt } = shortestDigits(Math.abs(x));

  let body: string;
  if (decpt <= -4 || decpt > 16) {
    const mantissa = digits.length > 1 ? `${digits[0]}.${digits.slice(1)}` : digits;
    const e = decpt - 1;
    const sign = e < 0 ? "-" : "+";
    body = `${mantissa}e${sign}${String(Math.abs(e)).padStart(2, "0")}`;
  } else if (decpt <= 0) {
    body = `0.${"0".repeat(-decpt)}${digits}`;
  } else if (decpt >= digits.length) {
    body = `${digits}${"0".repeat(decpt - digits.length)}.0`;
  } else {
    body = `${digits.slice(0, decpt)}.${digits.slice(decpt)}`;
  }
  return negative ? `-${body}` : body;
}

export const CSV_HEADER = "antenna_id,lat,lon,N,V,intensity,radius_scale";

export function csvRow(row: AntennaRow, radiusConstant: number): string {
  const intensity = row.V / row.N;
  const radius = radiusConstant * Math.sqrt(row.N);
  return [
    row.id,
    pyFloatRepr(row.lat),
    pyFloatRepr(row.lon),
    String(row.N),
    String(row.V),
    pyFloatRepr(intensity),
    pyFloatRepr(radius),
  ].join(",");
}

/** Shortlist CSV: header plus one row per antenna, sorted by id. */
export function shortlistCsv(
  rows: AntennaRow[],
  ids: Iterable<string>,
  radiusConstant: number,
): string {
  const byId = new Map(rows.map((r) => [r.id, r]));
  const lines = [CSV_HEADER];
  for (const id of [...ids].sort()) {
    const row = byId.get(id);
    if (row === undefined) throw new Error(`unknown antenna ${id}`);
    if (row.N === 0) throw new Error(`antenna ${id} has no population`);
    lines.push(csvRow(row, radiusConstant));
  }
  return lines.join("\n") + "\n";
}
