// Box overlay geometry and drawing. Boxes arrive in original frame pixels;
// the canvas is sized to the thumbnail, so every box is mapped through the
// frame -> canvas scale before drawing.

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export const REGION_COLORS = [
  "#e4572e",
  "#17bebb",
  "#ffc914",
  "#76b041",
  "#b66dff",
  "#ff66c4",
];

export function mapBox(
  box: number[],
  frameW: number,
  frameH: number,
  canvasW: number,
  canvasH: number,
): Rect {
  const sx = canvasW / frameW;
  const sy = canvasH / frameH;
  const [x0, y0, x1, y1] = box;
  return { x: x0 * sx, y: y0 * sy, w: (x1 - x0) * sx, h: (y1 - y0) * sy };
}

export function drawBoxes(
  ctx: CanvasRenderingContext2D,
  boxes: number[][],
  frameW: number,
  frameH: number,
  style: { color?: string; palette?: string[]; lineWidth: number },
): void {
  const { width, height } = ctx.canvas;
  boxes.forEach((box, i) => {
    const r = mapBox(box, frameW, frameH, width, height);
    ctx.strokeStyle = style.palette
      ? style.palette[i % style.palette.length]
      : style.color ?? "#ffffff";
    ctx.lineWidth = style.lineWidth;
    ctx.strokeRect(r.x, r.y, r.w, r.h);
  });
}
