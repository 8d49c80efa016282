/** Mask overlay pixels: a server mask (single-channel, 0 or 255) is
 * rendered as a tinted translucent fill with a fully opaque boundary
 * outline. The overlay never invents pixels: alpha is non-zero exactly
 * where the mask is foreground. */

export interface Rgb {
  r: number;
  g: number;
  b: number;
}

export const OVERLAY_COLOR: Rgb = { r: 255, g: 200, b: 0 };
export const DEFAULT_OVERLAY_OPACITY = 0.5;

/** Foreground test used everywhere: any value above 127 counts. */
export function grayToMask(gray: Uint8Array | Uint8ClampedArray): Uint8Array {
  const out = new Uint8Array(gray.length);
  for (let i = 0; i < gray.length; i++) out[i] = gray[i] > 127 ? 1 : 0;
  return out;
}

/** Extract the gray channel from RGBA pixel data (as produced by
 * drawing the mask PNG onto a canvas). */
export function rgbaToGray(data: Uint8ClampedArray): Uint8Array {
  const out = new Uint8Array(data.length / 4);
  for (let i = 0; i < out.length; i++) out[i] = data[i * 4];
  return out;
}

function isBoundary(mask: Uint8Array, width: number, height: number, i: number): boolean {
  const x = i % width;
  const y = (i / width) | 0;
  if (x === 0 || y === 0 || x === width - 1 || y === height - 1) return true;
  return !(
    mask[i - 1] &&
    mask[i + 1] &&
    mask[i - width] &&
    mask[i + width]
  );
}

/** Build RGBA overlay pixels from a binary mask. Interior pixels get
 * the requested opacity; boundary pixels are opaque so the outline
 * stays readable at any opacity. */
export function maskToOverlayRgba(
  mask: Uint8Array,
  width: number,
  height: number,
  opacity: number = DEFAULT_OVERLAY_OPACITY,
  color: Rgb = OVERLAY_COLOR,
): Uint8ClampedArray {
  const out = new Uint8ClampedArray(width * height * 4);
  const fillAlpha = Math.round(255 * Math.min(1, Math.max(0, opacity)));
  for (let i = 0; i < mask.length; i++) {
    if (!mask[i]) continue;
    const o = i * 4;
    out[o] = color.r;
    out[o + 1] = color.g;
    out[o + 2] = color.b;
    out[o + 3] = isBoundary(mask, width, height, i) ? 255 : fillAlpha;
  }
  return out;
}
