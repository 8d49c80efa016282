/** Browser entry point: canvas renderer plus DOM wiring. */

import { AnnotationApi } from './api.js';
import type { StrokeLabel } from './api.js';
import { AnnotatorApp, TAU0_DEFAULT } from './app.js';
import type { RendererPort } from './app.js';
import {
  DEFAULT_OVERLAY_OPACITY,
  grayToMask,
  maskToOverlayRgba,
  rgbaToGray,
} from './overlay.js';
import { displayToImage } from './strokes.js';

const STROKE_COLORS: Record<StrokeLabel, string> = {
  fg: '#2563eb', // positive examples in blue
  bg: '#dc2626', // hard negatives in red
  erase: '#000000',
};

class CanvasRenderer implements RendererPort {
  private scale = 1;
  private width = 0;
  private height = 0;
  private mask: Uint8Array | null = null;
  private opacity = DEFAULT_OVERLAY_OPACITY;

  constructor(
    private readonly stack: HTMLElement,
    private readonly base: HTMLCanvasElement,
    private readonly strokes: HTMLCanvasElement,
    private readonly overlay: HTMLCanvasElement,
    private readonly spinner: HTMLElement,
    private readonly toasts: HTMLElement,
  ) {}

  get currentScale(): number {
    return this.scale;
  }

  async openImage(
    imageData: ArrayBuffer,
    width: number,
    height: number,
    scale: number,
  ): Promise<void> {
    const bitmap = await createImageBitmap(new Blob([imageData]));
    this.scale = scale;
    this.width = width;
    this.height = height;
    for (const canvas of [this.base, this.strokes, this.overlay]) {
      canvas.width = width;
      canvas.height = height;
      canvas.style.width = `${Math.round(width * scale)}px`;
      canvas.style.height = `${Math.round(height * scale)}px`;
    }
    this.stack.style.width = `${Math.round(width * scale)}px`;
    this.stack.style.height = `${Math.round(height * scale)}px`;
    this.base.getContext('2d')!.drawImage(bitmap, 0, 0);
    this.strokes.getContext('2d')!.clearRect(0, 0, width, height);
    this.clearOverlay();
  }

  strokeSegment(
    label: StrokeLabel,
    from: { x: number; y: number },
    to: { x: number; y: number },
    radius: number,
  ): void {
    const ctx = this.strokes.getContext('2d')!;
    ctx.save();
    ctx.globalCompositeOperation = label === 'erase' ? 'destination-out' : 'source-over';
    ctx.strokeStyle = STROKE_COLORS[label];
    ctx.fillStyle = STROKE_COLORS[label];
    ctx.lineCap = 'round';
    ctx.lineJoin = 'round';
    if (from.x === to.x && from.y === to.y) {
      ctx.beginPath();
      ctx.arc(from.x, from.y, Math.max(radius, 0.5), 0, 2 * Math.PI);
      ctx.fill();
    } else {
      ctx.lineWidth = Math.max(2 * radius, 1);
      ctx.beginPath();
      ctx.moveTo(from.x, from.y);
      ctx.lineTo(to.x, to.y);
      ctx.stroke();
    }
    ctx.restore();
  }

  async setOverlay(maskPng: ArrayBuffer): Promise<void> {
    const bitmap = await createImageBitmap(new Blob([maskPng]));
    const scratch = document.createElement('canvas');
    scratch.width = this.width;
    scratch.height = this.height;
    const ctx = scratch.getContext('2d')!;
    ctx.drawImage(bitmap, 0, 0);
    const rgba = ctx.getImageData(0, 0, this.width, this.height).data;
    this.mask = grayToMask(rgbaToGray(rgba));
    this.paintOverlay();
  }

  clearOverlay(): void {
    this.mask = null;
    this.overlay.getContext('2d')?.clearRect(0, 0, this.width, this.height);
  }

  setOverlayOpacity(opacity: number): void {
    this.opacity = opacity;
    if (this.mask) this.paintOverlay();
  }

  private paintOverlay(): void {
    if (!this.mask) return;
    const rgba = maskToOverlayRgba(this.mask, this.width, this.height, this.opacity);
    const ctx = this.overlay.getContext('2d')!;
    ctx.putImageData(new ImageData(new Uint8ClampedArray(rgba), this.width, this.height), 0, 0);
  }

  setBusy(busy: boolean): void {
    this.spinner.classList.toggle('visible', busy);
    document.querySelectorAll<HTMLButtonElement | HTMLInputElement>('[data-lockable]').forEach(
      (el) => {
        el.disabled = busy;
      },
    );
  }

  toast(message: string): void {
    const el = document.createElement('div');
    el.className = 'toast';
    el.textContent = message;
    this.toasts.appendChild(el);
    setTimeout(() => el.remove(), 4500);
  }
}

function mustGet<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('api');
  return fromQuery ?? '';
}

function setup(): void {
  const stack = mustGet<HTMLElement>('canvas-stack');
  const renderer = new CanvasRenderer(
    stack,
    mustGet<HTMLCanvasElement>('base-canvas'),
    mustGet<HTMLCanvasElement>('strokes-canvas'),
    mustGet<HTMLCanvasElement>('overlay-canvas'),
    mustGet<HTMLElement>('spinner'),
    mustGet<HTMLElement>('toasts'),
  );
  const app = new AnnotatorApp(new AnnotationApi(apiBase()), renderer);

  const fileInput = mustGet<HTMLInputElement>('file-input');
  const scoremapInput = mustGet<HTMLInputElement>('scoremap-input');
  const refineButton = mustGet<HTMLButtonElement>('refine-btn');
  const exportButton = mustGet<HTMLButtonElement>('export-btn');
  const radiusInput = mustGet<HTMLInputElement>('radius');
  const tauSlider = mustGet<HTMLInputElement>('tau0');
  const tauValue = mustGet<HTMLElement>('tau0-value');
  const opacitySlider = mustGet<HTMLInputElement>('opacity');
  const status = mustGet<HTMLElement>('status');
  const toolButtons = Array.from(
    document.querySelectorAll<HTMLButtonElement>('button[data-tool]'),
  );

  app.onStateChange = () => {
    exportButton.disabled = !app.canExport || app.busy;
    refineButton.disabled = !app.session || app.busy;
    tauValue.textContent = app.tau0.toFixed(2);
    status.textContent = app.session
      ? `${app.imageName} — ${app.session.width}x${app.session.height}, ` +
        `${app.strokeCounts.fg_pixels} fg / ${app.strokeCounts.bg_pixels} bg px` +
        (app.scoremapAttached ? ', score map attached' : '')
      : 'no image';
  };
  app.onStateChange();

  fileInput.addEventListener('change', async () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    const viewport = mustGet<HTMLElement>('viewport');
    await app.openFile(
      await file.arrayBuffer(),
      file.name,
      viewport.clientWidth || 960,
      viewport.clientHeight || 640,
    );
  });

  scoremapInput.addEventListener('change', async () => {
    const file = scoremapInput.files?.[0];
    if (file) await app.attachScoremap(await file.arrayBuffer());
  });

  for (const button of toolButtons) {
    button.addEventListener('click', () => {
      app.tool = button.dataset.tool as StrokeLabel;
      toolButtons.forEach((b) => b.classList.toggle('active', b === button));
    });
  }

  radiusInput.addEventListener('change', () => {
    app.radius = Math.max(0, Number(radiusInput.value) || 0);
  });

  tauSlider.value = String(TAU0_DEFAULT);
  tauSlider.addEventListener('input', () => app.setTau0(Number(tauSlider.value)));
  opacitySlider.addEventListener('input', () =>
    app.setOverlayOpacity(Number(opacitySlider.value)),
  );

  refineButton.addEventListener('click', () => app.refineNow());

  exportButton.addEventListener('click', async () => {
    const result = await app.exportMask();
    if (!result) return;
    const url = URL.createObjectURL(new Blob([result.data], { type: 'image/png' }));
    const link = document.createElement('a');
    link.href = url;
    link.download = result.filename;
    link.click();
    URL.revokeObjectURL(url);
  });

  const pointerTarget = mustGet<HTMLCanvasElement>('overlay-canvas');
  pointerTarget.addEventListener('pointerdown', (ev) => {
    pointerTarget.setPointerCapture(ev.pointerId);
    app.pointerDown(displayToImage(ev.offsetX, ev.offsetY, renderer.currentScale));
  });
  pointerTarget.addEventListener('pointermove', (ev) => {
    if (ev.buttons & 1) {
      app.pointerMove(displayToImage(ev.offsetX, ev.offsetY, renderer.currentScale));
    }
  });
  pointerTarget.addEventListener('pointerup', () => void app.pointerUp());
}

setup();
