import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { CSV_HEADER, csvRow, pyFloatRepr, shortlistCsv } from "../src/format.js";
import { parseBundle } from "../src/types.js";

const fixturesDir = join(__dirname, "..", "fixtures");
const bundle = parseBundle(readFileSync(join(fixturesDir, "viewer_bundle.json"), "utf-8"));
const primaryCsv = readFileSync(join(fixturesDir, "heatmap_all.csv"), "utf-8");

describe("pyFloatRepr", () => {
  // expected strings frozen from CPython repr()
  const cases: [number, string][] = [
    [0.25, "0.25"],
    [1.0, "1.0"],
    [10.0, "10.0"],
    [-27.45, "-27.45"],
    [0.30000000000000004, "0.30000000000000004"],
    [0.3333333333333333, "0.3333333333333333"],
    [0.0001, "0.0001"],
    [1e-5, "1e-05"],
    [2e-5, "2e-05"],
    [1e16, "1e+16"],
    [9999999999999998.0, "9999999999999998.0"],
    [1.5e16, "1.5e+16"],
    [123456.789, "123456.789"],
    [0.7377049180327869, "0.7377049180327869"],
    [17.549928774784245, "17.549928774784245"],
    [5e-324, "5e-324"],
    [1e22, "1e+22"],
    [-0.001953125, "-0.001953125"],
    [7.810249675906654, "7.810249675906654"],
    [0.0, "0.0"],
    [100.0, "100.0"],
    [0.6666666666666666, "0.6666666666666666"],
    [1e-7, "1e-07"],
    [3.141592653589793, "3.141592653589793"],
  ];
  for (const [value, expected] of cases) {
    it(`renders ${expected}`, () => {
      expect(pyFloatRepr(value)).toBe(expected);
    });
  }

  it("round-trips every bundle coordinate", () => {
    for (const row of bundle.antennas) {
      expect(Number(pyFloatRepr(row.lat))).toBe(row.lat);
      expect(Number(pyFloatRepr(row.lon))).toBe(row.lon);
    }
  });
});

describe("shortlist CSV versus the primary export", () => {
  const primaryLines = primaryCsv.split("\n");
  const primaryById = new Map<string, string>();
  for (const line of primaryLines.slice(1)) {
    if (line) primaryById.set(line.split(",")[0], line);
  }

  it("agrees byte for byte on the full antenna set", () => {
    const populated = bundle.antennas.filter((r) => r.N > 0).map((r) => r.id);
    const mine = shortlistCsv(bundle.antennas, populated, bundle.radius_constant);
    expect(mine).toBe(primaryCsv);
  });

  it("produces byte-identical rows for a three-antenna shortlist", () => {
    const ids = [...primaryById.keys()].slice(0, 3);
    const csv = shortlistCsv(bundle.antennas, ids, bundle.radius_constant);
    const lines = csv.trimEnd().split("\n");
    expect(lines[0]).toBe(CSV_HEADER);
    expect(lines.length).toBe(4);
    for (const line of lines.slice(1)) {
      const id = line.split(",")[0];
      expect(line).toBe(primaryById.get(id));
    }
  });

  it("orders rows by antenna id regardless of insertion order", () => {
    const ids = ["A0005", "A0001", "A0003"];
    const csv = shortlistCsv(bundle.antennas, ids, bundle.radius_constant);
    const got = csv.trimEnd().split("\n").slice(1).map((l) => l.split(",")[0]);
    expect(got).toEqual(["A0001", "A0003", "A0005"]);
  });

  it("rejects unknown antennas", () => {
    expect(() => shortlistCsv(bundle.antennas, ["GHOST"], 1.0)).toThrow(/unknown/);
  });

  it("csvRow recomputes intensity exactly as exported", () => {
    for (const row of bundle.antennas) {
      if (row.N === 0) continue;
      const line = csvRow(row, bundle.radius_constant);
      const exported = primaryById.get(row.id)!;
      const myIntensity = Number(line.split(",")[5]);
      const exportedIntensity = Number(exported.split(",")[5]);
      expect(Math.abs(myIntensity - exportedIntensity)).toBeLessThan(1e-9);
    }
  });
});
