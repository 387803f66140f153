/** Bundle schema shared with the pipeline's --emit-viewer-bundle export. */

export const BUNDLE_SCHEMA = "riskmap-viewer-bundle@1";

export interface AntennaRow {
  id: string;
  lat: number;
  lon: number;
  N: number;
  V: number;
  C: number;
  VC: number;
}

export interface Preset {
  name: string;
  beta: number;
  min_volume: number;
}

export interface ZoneGeometry {
  type: "MultiPolygon";
  coordinates: number[][][][];
}

export interface ViewerBundle {
  schema: string;
  antennas: AntennaRow[];
  zone: { type: "Feature"; properties: { name?: string }; geometry: ZoneGeometry };
  radius_constant: number;
  presets: Preset[];
}

export class BundleError extends Error {}

function isFiniteNumber(x: unknown): x is number {
  return typeof x === "number" && Number.isFinite(x);
}

function isCount(x: unknown): x is number {
  return isFiniteNumber(x) && Number.isInteger(x) && x >= 0;
}

function checkAntenna(row: unknown, index: number): AntennaRow {
  if (typeof row !== "object" || row === null) {
    throw new BundleError(`antennas[${index}] is not an object`);
  }
  const r = row as Record<string, unknown>;
  if (typeof r.id !== "string" || r.id.length === 0) {
    throw new BundleError(`antennas[${index}] has no id`);
  }
  if (!isFiniteNumber(r.lat) || r.lat < -90 || r.lat > 90) {
    throw new BundleError(`antenna ${r.id}: latitude out of range`);
  }
  if (!isFiniteNumber(r.lon) || r.lon < -180 || r.lon > 180) {
    throw new BundleError(`antenna ${r.id}: longitude out of range`);
  }
  for (const key of ["N", "V", "C", "VC"] as const) {
    if (!isCount(r[key])) {
      throw new BundleError(`antenna ${r.id}: ${key} is not a count`);
    }
  }
  const a = r as unknown as AntennaRow;
  if (a.V > a.N) throw new BundleError(`antenna ${a.id}: V exceeds N`);
  if (a.VC > a.C) throw new BundleError(`antenna ${a.id}: VC exceeds C`);
  return a;
}

/** Parse and validate bundle JSON; throws BundleError with a readable reason. */
export function parseBundle(text: string): ViewerBundle {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    throw new BundleError(`not valid JSON: ${(err as Error).message}`);
  }
  if (typeof doc !== "object" || doc === null) {
    throw new BundleError("bundle is not a JSON object");
  }
  const b = doc as Record<string, unknown>;
  if (b.schema !== BUNDLE_SCHEMA) {
    throw new BundleError(
      `schema mismatch: expected ${BUNDLE_SCHEMA}, got ${JSON.stringify(b.schema)}`,
    );
  }
  if (!Array.isArray(b.antennas)) throw new BundleError("antennas is not an array");
  const antennas = b.antennas.map(checkAntenna);
  const ids = new Set(antennas.map((a) => a.id));
  if (ids.size !== antennas.length) throw new BundleError("duplicate antenna ids");

  if (!isFiniteNumber(b.radius_constant) || b.radius_constant <= 0) {
    throw new BundleError("radius_constant must be a positive number");
  }

  const zone = b.zone as ViewerBundle["zone"] | undefined;
  if (
    !zone ||
    zone.type !== "Feature" ||
    !zone.geometry ||
    zone.geometry.type !== "MultiPolygon" ||
    !Array.isArray(zone.geometry.coordinates)
  ) {
    throw new BundleError("zone must be a GeoJSON MultiPolygon feature");
  }

  if (!Array.isArray(b.presets)) throw new BundleError("presets is not an array");
  const presets: Preset[] = (b.presets as unknown[]).map((p, i) => {
    const q = p as Record<string, unknown>;
    if (
      typeof q !== "object" ||
      q === null ||
      typeof q.name !== "string" ||
      !isFiniteNumber(q.beta) ||
      q.beta < 0 ||
      q.beta > 1 ||
      !isCount(q.min_volume)
    ) {
      throw new BundleError(`presets[${i}] is malformed`);
    }
    return { name: q.name, beta: q.beta, min_volume: q.min_volume };
  });

  return {
    schema: BUNDLE_SCHEMA,
    antennas,
    zone,
    radius_constant: b.radius_constant,
    presets,
  };
}
