/** Pan/zoom camera over an equirectangular lat/lon projection.
 *
 * Pure state transitions: the rendered scene is a function of
 * (bundle, filters, ViewState), so replaying the same inputs reproduces
 * the same view.
 */

export interface ViewState {
  centerLat: number;
  centerLon: number;
  scale: number; // pixels per degree
}

export function project(
  view: ViewState,
  width: number,
  height: number,
  lat: number,
  lon: number,
): [number, number] {
  const x = width / 2 + (lon - view.centerLon) * view.scale;
  const y = height / 2 - (lat - view.centerLat) * view.scale;
  return [x, y];
}

export function unproject(
  view: ViewState,
  width: number,
  height: number,
  x: number,
  y: number,
): [number, number] {
  const lon = view.centerLon + (x - width / 2) / view.scale;
  const lat = view.centerLat - (y - height / 2) / view.scale;
  return [lat, lon];
}

export function pan(view: ViewState, dxPx: number, dyPx: number): ViewState {
  return {
    centerLat: view.centerLat + dyPx / view.scale,
    centerLon: view.centerLon - dxPx / view.scale,
    scale: view.scale,
  };
}

/** Zoom by `factor`, keeping the point under the cursor fixed. */
export function zoomAround(
  view: ViewState,
  width: number,
  height: number,
  px: number,
  py: number,
  factor: number,
): ViewState {
  const scale = Math.min(1e6, Math.max(0.1, view.scale * factor));
  if (scale === view.scale) return view;
  const [lat, lon] = unproject(view, width, height, px, py);
  // solve for the center that leaves (lat, lon) at (px, py) after scaling
  const centerLon = lon - (px - width / 2) / scale;
  const centerLat = lat + (py - height / 2) / scale;
  return { centerLat, centerLon, scale };
}

export function fitBounds(
  points: Iterable<{ lat: number; lon: number }>,
  width: number,
  height: number,
  padding = 40,
): ViewState {
  let minLat = Infinity;
  let maxLat = -Infinity;
  let minLon = Infinity;
  let maxLon = -Infinity;
  for (const p of points) {
    minLat = Math.min(minLat, p.lat);
    maxLat = Math.max(maxLat, p.lat);
    minLon = Math.min(minLon, p.lon);
    maxLon = Math.max(maxLon, p.lon);
  }
  if (!Number.isFinite(minLat)) {
    return { centerLat: 0, centerLon: 0, scale: 2 };
  }
  const spanLat = Math.max(maxLat - minLat, 1e-6);
  const spanLon = Math.max(maxLon - minLon, 1e-6);
  const scale = Math.min(
    (width - 2 * padding) / spanLon,
    (height - 2 * padding) / spanLat,
  );
  return {
    centerLat: (minLat + maxLat) / 2,
    centerLon: (minLon + maxLon) / 2,
    scale: Math.max(0.1, scale),
  };
}
