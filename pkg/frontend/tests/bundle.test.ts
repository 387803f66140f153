import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { BundleError, parseBundle } from "../src/types.js";

const fixturesDir = join(__dirname, "..", "fixtures");
const bundleText = readFileSync(join(fixturesDir, "viewer_bundle.json"), "utf-8");

describe("parseBundle", () => {
  it("accepts the pipeline-produced fixture", () => {
    const bundle = parseBundle(bundleText);
    expect(bundle.antennas.length).toBe(30);
    expect(bundle.radius_constant).toBe(1.0);
    expect(bundle.presets.map((p) => p.name)).toContain("mexico");
    expect(bundle.zone.geometry.type).toBe("MultiPolygon");
  });

  it("keeps antennas sorted with valid indicator bounds", () => {
    const bundle = parseBundle(bundleText);
    for (const row of bundle.antennas) {
      expect(row.V).toBeLessThanOrEqual(row.N);
      expect(row.VC).toBeLessThanOrEqual(row.C);
    }
  });

  it("rejects non-JSON input", () => {
    expect(() => parseBundle("{nope")).toThrow(BundleError);
  });

  it("rejects a wrong schema marker", () => {
    const doc = JSON.parse(bundleText);
    doc.schema = "riskmap-viewer-bundle@999";
    expect(() => parseBundle(JSON.stringify(doc))).toThrow(/schema mismatch/);
  });

  it("rejects V greater than N", () => {
    const doc = JSON.parse(bundleText);
    doc.antennas[0].V = doc.antennas[0].N + 1;
    expect(() => parseBundle(JSON.stringify(doc))).toThrow(/V exceeds N/);
  });

  it("rejects coordinates out of range", () => {
    const doc = JSON.parse(bundleText);
    doc.antennas[2].lon = 541.0;
    expect(() => parseBundle(JSON.stringify(doc))).toThrow(/longitude/);
  });

  it("rejects duplicate ids", () => {
    const doc = JSON.parse(bundleText);
    doc.antennas[1].id = doc.antennas[0].id;
    expect(() => parseBundle(JSON.stringify(doc))).toThrow(/duplicate/);
  });

  it("rejects a missing zone", () => {
    const doc = JSON.parse(bundleText);
    delete doc.zone;
    expect(() => parseBundle(JSON.stringify(doc))).toThrow(/zone/);
  });
});
