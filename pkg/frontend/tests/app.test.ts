import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { AnnotationApi } from '../src/api.js';
import type { MaskResponse, SessionInfo, StrokeCounts, StrokeLabel } from '../src/api.js';
import { AnnotatorApp } from '../src/app.js';
import type { RendererPort } from '../src/app.js';
import type { Point } from '../src/strokes.js';

class FakeRenderer implements RendererPort {
  images: { width: number; height: number; scale: number }[] = [];
  segments: { label: StrokeLabel; from: Point; to: Point; radius: number }[] = [];
  overlays: ArrayBuffer[] = [];
  overlayCleared = 0;
  opacity = 0.5;
  busyStates: boolean[] = [];
  toasts: string[] = [];

  async openImage(_data: ArrayBuffer, width: number, height: number, scale: number) {
    this.images.push({ width, height, scale });
  }
  strokeSegment(label: StrokeLabel, from: Point, to: Point, radius: number) {
    this.segments.push({ label, from, to, radius });
  }
  async setOverlay(maskPng: ArrayBuffer) {
    this.overlays.push(maskPng);
  }
  clearOverlay() {
    this.overlayCleared += 1;
  }
  setOverlayOpacity(opacity: number) {
    this.opacity = opacity;
  }
  setBusy(busy: boolean) {
    this.busyStates.push(busy);
  }
  toast(message: string) {
    this.toasts.push(message);
  }
}

type Deferred<T> = { promise: Promise<T>; resolve: (v: T) => void; reject: (e: unknown) => void };

function deferred<T>(): Deferred<T> {
  let resolve!: (v: T) => void;
  let reject!: (e: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

class FakeApi {
  session: SessionInfo = { sessionId: 'sid-1', width: 200, height: 100 };
  strokeCalls: unknown[] = [];
  refineCalls = 0;
  tau0Calls: number[] = [];
  refineGate: Deferred<MaskResponse> | null = null;
  failNextRefine = false;
  tau0Error: { status: number; message: string } | null = null;

  async createSession(): Promise<SessionInfo> {
    return this.session;
  }
  async addStrokes(_sid: string, strokes: unknown[]): Promise<StrokeCounts> {
    this.strokeCalls.push(strokes);
    return { fg_pixels: 10, bg_pixels: 4 };
  }
  async attachScoremap(): Promise<void> {}
  async refine(): Promise<MaskResponse> {
    this.refineCalls += 1;
    if (this.failNextRefine) {
      this.failNextRefine = false;
      const { ApiError } = await import('../src/api.js');
      throw new ApiError(409, 'need fg and bg strokes to refine');
    }
    if (this.refineGate) return this.refineGate.promise;
    return { maskPng: new Uint8Array([this.refineCalls]).buffer, stats: null };
  }
  async setTau0(_sid: string, tau0: number): Promise<MaskResponse> {
    this.tau0Calls.push(tau0);
    if (this.tau0Error) {
      const { ApiError } = await import('../src/api.js');
      throw new ApiError(this.tau0Error.status, this.tau0Error.message);
    }
    return { maskPng: new Uint8Array([99]).buffer, stats: null };
  }
  async exportMask(): Promise<ArrayBuffer> {
    return new Uint8Array([7, 7]).buffer;
  }
}

function makeApp(debounceMs = 0) {
  const api = new FakeApi();
  const renderer = new FakeRenderer();
  const app = new AnnotatorApp(api as unknown as AnnotationApi, renderer, debounceMs);
  return { app, api, renderer };
}

async function open(app: AnnotatorApp): Promise<void> {
  await app.openFile(new ArrayBuffer(4), 'scene.png', 100, 100);
}

describe('AnnotatorApp', () => {
  it('opens an image at fit-to-viewport zoom', async () => {
    const { app, renderer } = makeApp();
    const info = await app.openFile(new ArrayBuffer(4), 'big.png', 100, 100);
    expect(info?.sessionId).toBe('sid-1');
    // 200x100 image in a 100x100 viewport -> scale 0.5
    expect(renderer.images).toEqual([{ width: 200, height: 100, scale: 0.5 }]);
    expect(app.canExport).toBe(false);
  });

  it('shows a toast and keeps no session when upload fails', async () => {
    const { app, api, renderer } = makeApp();
    api.createSession = async () => {
      const { ApiError } = await import('../src/api.js');
      throw new ApiError(415, 'not a PNG or JPEG image');
    };
    const info = await app.openFile(new ArrayBuffer(4), 'bad.bin', 100, 100);
    expect(info).toBeNull();
    expect(app.session).toBeNull();
    expect(renderer.toasts[0]).toContain('upload failed');
  });

  it('paints strokes locally and syncs the polyline on release', async () => {
    const { app, api, renderer } = makeApp();
    await open(app);
    app.tool = 'bg';
    app.radius = 3;
    app.pointerDown({ x: 1, y: 2 });
    app.pointerMove({ x: 4, y: 6 });
    await app.pointerUp();
    expect(renderer.segments.length).toBe(2); // dot feedback + segment
    expect(api.strokeCalls).toEqual([
      [{ label: 'bg', radius: 3, points: [[1, 2], [4, 6]] }],
    ]);
    expect(app.strokeCounts).toEqual({ fg_pixels: 10, bg_pixels: 4 });
  });

  it('eraser strokes sync with the erase label', async () => {
    const { app, api } = makeApp();
    await open(app);
    app.tool = 'erase';
    app.pointerDown({ x: 5, y: 5 });
    await app.pointerUp();
    expect((api.strokeCalls[0] as { label: string }[])[0].label).toBe('erase');
  });

  it('refine sets the overlay and enables export', async () => {
    const { app, renderer } = makeApp();
    await open(app);
    app.refineNow();
    await vi.waitFor(() => expect(app.hasMask).toBe(true));
    expect(renderer.overlays.length).toBe(1);
    expect(app.canExport).toBe(true);
    const exported = await app.exportMask();
    expect(exported?.filename).toBe('scene.mask.png');
    expect(new Uint8Array(exported!.data)).toEqual(new Uint8Array([7, 7]));
  });

  it('keeps the previous overlay when refine fails', async () => {
    const { app, api, renderer } = makeApp();
    await open(app);
    app.refineNow();
    await vi.waitFor(() => expect(renderer.overlays.length).toBe(1));
    api.failNextRefine = true;
    app.refineNow();
    await vi.waitFor(() => expect(renderer.toasts.length).toBe(1));
    expect(renderer.overlays.length).toBe(1); // unchanged
    expect(renderer.toasts[0]).toContain('refine failed');
  });

  it('locks input while a refinement is in flight', async () => {
    const { app, api, renderer } = makeApp();
    await open(app);
    api.refineGate = deferred<MaskResponse>();
    app.refineNow();
    await vi.waitFor(() => expect(app.busy).toBe(true));
    app.pointerDown({ x: 1, y: 1 });
    expect(renderer.segments.length).toBe(0); // ignored while busy
    api.refineGate.resolve({ maskPng: new ArrayBuffer(1), stats: null });
    await vi.waitFor(() => expect(app.busy).toBe(false));
    expect(renderer.busyStates).toEqual([true, false]);
  });

  describe('tau0 slider', () => {
    beforeEach(() => vi.useFakeTimers());
    afterEach(() => vi.useRealTimers());

    it('debounces dragging into a single PATCH with the final value', async () => {
      const { app, api } = makeApp(250);
      await open(app);
      await app.attachScoremap(new ArrayBuffer(4));
      app.setTau0(0.4);
      await vi.advanceTimersByTimeAsync(100);
      app.setTau0(0.45);
      await vi.advanceTimersByTimeAsync(100);
      app.setTau0(0.5);
      await vi.advanceTimersByTimeAsync(250);
      await vi.waitFor(() => expect(api.tau0Calls).toEqual([0.5]));
    });

    it('updates the overlay in place, never reloading the image', async () => {
      const { app, api, renderer } = makeApp(50);
      await open(app);
      await app.attachScoremap(new ArrayBuffer(4));
      const imagesLoads = renderer.images.length;
      app.setTau0(0.6);
      await vi.advanceTimersByTimeAsync(50);
      await vi.waitFor(() => expect(renderer.overlays.length).toBe(1));
      expect(api.tau0Calls).toEqual([0.6]);
      expect(renderer.images.length).toBe(imagesLoads);
    });

    it('does not PATCH before a score map is attached', async () => {
      const { app, api } = makeApp(50);
      await open(app);
      app.setTau0(0.7);
      await vi.advanceTimersByTimeAsync(200);
      expect(api.tau0Calls).toEqual([]);
    });

    it('clamps the slider value into its range', async () => {
      const { app } = makeApp(50);
      await open(app);
      app.setTau0(1.7);
      expect(app.tau0).toBe(0.95);
      app.setTau0(-2);
      expect(app.tau0).toBe(0.05);
    });

    it('explains a 409 from tau0 tuning', async () => {
      const { app, api, renderer } = makeApp(10);
      await open(app);
      await app.attachScoremap(new ArrayBuffer(4));
      api.tau0Error = { status: 409, message: 'tau0 tuning needs an attached score map' };
      app.setTau0(0.5);
      await vi.advanceTimersByTimeAsync(10);
      await vi.waitFor(() =>
        expect(renderer.toasts).toContain('attach a score map to tune the threshold'),
      );
    });
  });

  it('export is unavailable before the first refinement', async () => {
    const { app } = makeApp();
    await open(app);
    expect(app.canExport).toBe(false);
    expect(await app.exportMask()).toBeNull();
  });
});
