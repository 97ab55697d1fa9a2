/** Evidence-box geometry: API pixel coordinates scaled onto the rendered
 * page image. The API reports boxes in the stored page's natural pixel
 * space; the <img> element may render at any size. */

export interface OverlayRect {
  left: number;
  top: number;
  width: number;
  height: number;
}

export function scaleBbox(
  bbox: readonly [number, number, number, number],
  naturalWidth: number,
  naturalHeight: number,
  renderedWidth: number,
  renderedHeight: number,
): OverlayRect {
  if (naturalWidth <= 0 || naturalHeight <= 0) {
    throw new Error(`invalid natural size ${naturalWidth}x${naturalHeight}`);
  }
  const scaleX = renderedWidth / naturalWidth;
  const scaleY = renderedHeight / naturalHeight;
  const [x0, y0, x1, y1] = bbox;
  return {
    left: x0 * scaleX,
    top: y0 * scaleY,
    width: (x1 - x0) * scaleX,
    height: (y1 - y0) * scaleY,
  };
}

export function overlayStyle(rect: OverlayRect): string {
  const px = (v: number) => `${Math.round(v * 100) / 100}px`;
  return `left:${px(rect.left)};top:${px(rect.top)};width:${px(rect.width)};height:${px(rect.height)}`;
}
