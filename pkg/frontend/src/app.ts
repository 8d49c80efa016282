/** Application controller: session lifecycle, stroke capture, refine
 * scheduling and export. All rendering goes through `RendererPort`, so
 * the controller is testable without a DOM; the canvas implementation
 * lives in main.ts. */

import { AnnotationApi, ApiError } from './api.js';
import type { SessionInfo, StrokeCounts, StrokeLabel } from './api.js';
import { debounce, LatestWins } from './scheduling.js';
import type { Debounced } from './scheduling.js';
import { fitScale, StrokeTracker } from './strokes.js';
import type { Point } from './strokes.js';

export interface RendererPort {
  openImage(imageData: ArrayBuffer, width: number, height: number, scale: number): Promise<void>;
  strokeSegment(label: StrokeLabel, from: Point, to: Point, radius: number): void;
  setOverlay(maskPng: ArrayBuffer): Promise<void>;
  clearOverlay(): void;
  setOverlayOpacity(opacity: number): void;
  setBusy(busy: boolean): void;
  toast(message: string): void;
}

export const TAU0_MIN = 0.05;
export const TAU0_MAX = 0.95;
export const TAU0_STEP = 0.05;
export const TAU0_DEFAULT = 0.3;
export const REFINE_DEBOUNCE_MS = 250;

function stem(filename: string): string {
  const base = filename.replace(/^.*[\\/]/, '');
  const dot = base.lastIndexOf('.');
  return dot > 0 ? base.slice(0, dot) : base;
}

export class AnnotatorApp {
  session: SessionInfo | null = null;
  imageName = 'image';
  tool: StrokeLabel = 'fg';
  radius = 4;
  tau0 = TAU0_DEFAULT;
  hasMask = false;
  scoremapAttached = false;
  strokeCounts: StrokeCounts = { fg_pixels: 0, bg_pixels: 0 };
  onStateChange: (() => void) | null = null;

  private tracker: StrokeTracker | null = null;
  private readonly queue: LatestWins;
  private readonly debouncedTau0: Debounced<[number]>;

  constructor(
    private readonly api: AnnotationApi,
    private readonly renderer: RendererPort,
    debounceMs: number = REFINE_DEBOUNCE_MS,
  ) {
    this.queue = new LatestWins((busy) => {
      this.renderer.setBusy(busy);
      this.onStateChange?.();
    });
    this.debouncedTau0 = debounce((value: number) => this.patchTau0(value), debounceMs);
  }

  get busy(): boolean {
    return this.queue.busy;
  }

  get canExport(): boolean {
    return this.session !== null && this.hasMask;
  }

  async openFile(
    data: ArrayBuffer,
    filename: string,
    viewWidth: number,
    viewHeight: number,
  ): Promise<SessionInfo | null> {
    try {
      const info = await this.api.createSession(data, stem(filename));
      this.session = info;
      this.imageName = filename;
      this.hasMask = false;
      this.scoremapAttached = false;
      this.strokeCounts = { fg_pixels: 0, bg_pixels: 0 };
      const scale = fitScale(info.width, info.height, viewWidth, viewHeight);
      await this.renderer.openImage(data, info.width, info.height, scale);
      this.renderer.clearOverlay();
      this.onStateChange?.();
      return info;
    } catch (err) {
      this.renderer.toast(`upload failed: ${describe(err)}`);
      return null;
    }
  }

  pointerDown(p: Point): void {
    if (!this.session || this.busy) return;
    this.tracker = new StrokeTracker(this.tool, this.radius);
    this.tracker.begin(p);
    this.renderer.strokeSegment(this.tool, p, p, this.radius);
  }

  pointerMove(p: Point): void {
    if (!this.tracker) return;
    const prev = this.tracker.extend(p);
    if (prev) this.renderer.strokeSegment(this.tracker.label, prev, p, this.tracker.radius);
  }

  async pointerUp(): Promise<void> {
    if (!this.tracker || !this.session) return;
    const payload = this.tracker.finish();
    this.tracker = null;
    if (!payload) return;
    try {
      this.strokeCounts = await this.api.addStrokes(this.session.sessionId, [payload]);
      this.onStateChange?.();
    } catch (err) {
      this.renderer.toast(`stroke sync failed: ${describe(err)}`);
    }
  }

  refineNow(): void {
    const session = this.session;
    if (!session) {
      this.renderer.toast('open an image first');
      return;
    }
    this.queue.schedule(async () => {
      try {
        const result = await this.api.refine(session.sessionId, { tau0: this.tau0 });
        await this.renderer.setOverlay(result.maskPng);
        this.hasMask = true;
        this.onStateChange?.();
      } catch (err) {
        // keep the previous overlay on failure
        this.renderer.toast(`refine failed: ${describe(err)}`);
      }
    });
  }

  async attachScoremap(data: ArrayBuffer): Promise<void> {
    const session = this.session;
    if (!session) {
      this.renderer.toast('open an image first');
      return;
    }
    try {
      await this.api.attachScoremap(session.sessionId, data);
      this.scoremapAttached = true;
      this.onStateChange?.();
      this.renderer.toast('score map attached; the threshold slider now re-refines');
    } catch (err) {
      this.renderer.toast(`score map rejected: ${describe(err)}`);
    }
  }

  /** Slider handler; PATCHes the service after the drag settles. */
  setTau0(value: number): void {
    this.tau0 = Math.min(TAU0_MAX, Math.max(TAU0_MIN, value));
    this.onStateChange?.();
    if (this.session && this.scoremapAttached) this.debouncedTau0(this.tau0);
  }

  private patchTau0(value: number): void {
    const session = this.session;
    if (!session) return;
    this.queue.schedule(async () => {
      try {
        const result = await this.api.setTau0(session.sessionId, value);
        await this.renderer.setOverlay(result.maskPng);
        this.hasMask = true;
        this.onStateChange?.();
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          this.renderer.toast('attach a score map to tune the threshold');
        } else {
          this.renderer.toast(`threshold update failed: ${describe(err)}`);
        }
      }
    });
  }

  setOverlayOpacity(opacity: number): void {
    this.renderer.setOverlayOpacity(opacity);
  }

  async exportMask(): Promise<{ filename: string; data: ArrayBuffer } | null> {
    const session = this.session;
    if (!session || !this.hasMask) return null;
    try {
      const data = await this.api.exportMask(session.sessionId);
      return { filename: `${stem(this.imageName)}.mask.png`, data };
    } catch (err) {
      this.renderer.toast(`export failed: ${describe(err)}`);
      return null;
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.message} (${err.status})`;
  return err instanceof Error ? err.message : String(err);
}
