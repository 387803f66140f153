/** Continuous yellow-to-red ramp over the vulnerable fraction. */

type Rgb = [number, number, number];

const STOPS: Rgb[] = [
  [255, 255, 178],
  [254, 178, 76],
  [240, 59, 32],
  [189, 0, 38],
];

function lerp(a: number, b: number, t: number): number {
  return a + (b - a) * t;
}

export function rampColor(intensity: number): string {
  const t = Math.min(1, Math.max(0, intensity));
  const scaled = t * (STOPS.length - 1);
  const i = Math.min(STOPS.length - 2, Math.floor(scaled));
  const frac = scaled - i;
  const [r0, g0, b0] = STOPS[i];
  const [r1, g1, b1] = STOPS[i + 1];
  const r = Math.round(lerp(r0, r1, frac));
  const g = Math.round(lerp(g0, g1, frac));
  const b = Math.round(lerp(b0, b1, frac));
  return `rgb(${r},${g},${b})`;
}
