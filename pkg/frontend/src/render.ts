// Canvas painting of the view state: map raster, posterior overlay,
// recorded trail, robot glyph, laser crosshair.

import { DecodedMap, PGM_FREE, PGM_OCCUPIED } from "./pgm";
import { ViewState } from "./state";

export interface Viewport {
  scale: number;   // pixels per meter
  height: number;  // canvas pixels (for y flip)
}

function mapToImageData(map: DecodedMap, overlay: DecodedMap | null): ImageData {
  const img = new ImageData(map.width, map.height);
  for (let row = 0; row < map.height; row++) {
    for (let col = 0; col < map.width; col++) {
      const value = map.pixels[row * map.width + col];
      const i = (row * map.width + col) * 4;
      let r = 205, g = 205, b = 205;          // unknown
      if (value === PGM_OCCUPIED) { r = g = b = 30; }
      else if (value >= PGM_FREE) { r = g = b = 238; }
      if (overlay) {
        const over = overlay.pixels[row * map.width + col];
        if (over === PGM_OCCUPIED && value >= PGM_FREE) {
          r = 220; g = 80; b = 80;            // taught keep-off area
        }
      }
      img.data[i] = r; img.data[i + 1] = g; img.data[i + 2] = b;
      img.data[i + 3] = 255;
    }
  }
  return img;
}

export function worldToCanvas(view: Viewport, x: number, y: number): [number, number] {
  return [x * view.scale, view.height - y * view.scale];
}

export function canvasToNorm(view: Viewport, map: DecodedMap,
                             px: number, py: number): [number, number] {
  const x = px / view.scale;
  const y = (view.height - py) / view.scale;
  return [x / (map.width * map.resolution), y / (map.height * map.resolution)];
}

export function drawView(ctx: CanvasRenderingContext2D, view: ViewState,
                         showPosterior: boolean): Viewport {
  const canvas = ctx.canvas;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const map = view.prior;
  if (!map) {
    ctx.fillStyle = "#666";
    ctx.fillText("waiting for map...", 20, 30);
    return { scale: 50, height: canvas.height };
  }
  const scale = Math.min(canvas.width / (map.width * map.resolution),
                         canvas.height / (map.height * map.resolution));
  const viewport: Viewport = { scale, height: Math.round(map.height * map.resolution * scale) };

  const img = mapToImageData(map, showPosterior ? view.posterior : null);
  const off = new OffscreenCanvas(map.width, map.height);
  const offCtx = off.getContext("2d")!;
  offCtx.putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  // PGM rows are top-down while world y grows upward: draw flipped
  ctx.save();
  ctx.scale(1, 1);
  ctx.drawImage(off, 0, 0, map.width, map.height,
                0, 0, map.width * map.resolution * scale, viewport.height);
  ctx.restore();

  if (view.trail.length > 1) {
    ctx.strokeStyle = "#d4772c";
    ctx.lineWidth = 2;
    ctx.beginPath();
    const [sx, sy] = worldToCanvas(viewport, view.trail[0][0], view.trail[0][1]);
    ctx.moveTo(sx, sy);
    for (const [x, y] of view.trail.slice(1)) {
      const [cx, cy] = worldToCanvas(viewport, x, y);
      ctx.lineTo(cx, cy);
    }
    ctx.stroke();
  }

  if (view.laser) {
    const [lx, ly] = worldToCanvas(viewport, view.laser[0], view.laser[1]);
    ctx.strokeStyle = "#e02020";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(lx - 8, ly); ctx.lineTo(lx + 8, ly);
    ctx.moveTo(lx, ly - 8); ctx.lineTo(lx, ly + 8);
    ctx.stroke();
    ctx.beginPath();
    ctx.arc(lx, ly, 4, 0, 2 * Math.PI);
    ctx.stroke();
  }

  const [rx, ry] = worldToCanvas(viewport, view.pose[0], view.pose[1]);
  const yaw = -view.pose[2]; // canvas y is flipped
  ctx.fillStyle = "#1d4ed8";
  ctx.beginPath();
  ctx.moveTo(rx + 12 * Math.cos(yaw), ry + 12 * Math.sin(yaw));
  ctx.lineTo(rx + 9 * Math.cos(yaw + 2.5), ry + 9 * Math.sin(yaw + 2.5));
  ctx.lineTo(rx + 9 * Math.cos(yaw - 2.5), ry + 9 * Math.sin(yaw - 2.5));
  ctx.closePath();
  ctx.fill();
  return viewport;
}
