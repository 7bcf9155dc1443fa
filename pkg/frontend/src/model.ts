/** Gallery state: entries, selection, and per-image decode history.
 *
 * Invariants enforced here rather than in the view:
 *   - history levels are strictly increasing per image
 *   - cumulative read cost never decreases
 *   - at most one decode request in flight per image; later steps queue
 */

import {
    ApiClient,
    DecodeRequest,
    DecodeResponse,
    GalleryEntry,
} from "./api.js";

export interface HistoryPoint {
    level: number;
    psnr: number | null;
    cumulativeReadCost: number;
    imageUrl: string;
}

export interface DecodeSettings {
    coverage: number;
    rates: { sub: number; ins: number; del: number };
    seed: number;
    mode: string;
}

export const DEFAULT_SETTINGS: DecodeSettings = {
    coverage: 5,
    rates: { sub: 0.004, ins: 0.002, del: 0.006 },
    seed: 0,
    mode: "poisson",
};

export class GalleryModel {
    entries: GalleryEntry[] = [];
    selected: number | null = null;
    private history = new Map<number, HistoryPoint[]>();
    private inFlight = new Map<number, Promise<DecodeResponse>>();
    private queued = new Map<number, number[]>();

    constructor(
        readonly api: ApiClient,
        readonly settings: DecodeSettings = DEFAULT_SETTINGS,
    ) {}

    async load(): Promise<void> {
        this.entries = await this.api.listImages();
    }

    select(imageId: number): void {
        if (!this.entries.some((e) => e.imageId === imageId)) {
            throw new Error(`no image ${imageId} in the gallery`);
        }
        this.selected = imageId;
    }

    historyFor(imageId: number): HistoryPoint[] {
        return this.history.get(imageId) ?? [];
    }

    lastLevel(imageId: number): number {
        const points = this.historyFor(imageId);
        return points.length ? points[points.length - 1].level : -1;
    }

    /** Whether the step control for this level should be enabled. */
    canStep(imageId: number, targetLevel: number): boolean {
        return targetLevel > this.lastLevel(imageId);
    }

    /** Decode up to targetLevel. Only one request per image runs at a
     * time; further levels wait for the current one and run in order. */
    async stepDecode(imageId: number, targetLevel: number): Promise<DecodeResponse> {
        const pending = this.inFlight.get(imageId);
        if (pending !== undefined) {
            const queue = this.queued.get(imageId) ?? [];
            queue.push(targetLevel);
            this.queued.set(imageId, queue);
            await pending.catch(() => undefined);
            return this.drainQueue(imageId);
        }
        return this.issue(imageId, targetLevel);
    }

    private async drainQueue(imageId: number): Promise<DecodeResponse> {
        const queue = this.queued.get(imageId) ?? [];
        const next = queue.shift();
        this.queued.set(imageId, queue);
        if (next === undefined) {
            throw new Error("queue drained twice");
        }
        return this.stepDecode(imageId, next);
    }

    private async issue(imageId: number, targetLevel: number): Promise<DecodeResponse> {
        if (!this.canStep(imageId, targetLevel)) {
            throw new Error(
                `level ${targetLevel} is not past the last decoded level ${this.lastLevel(imageId)}`,
            );
        }
        const request: DecodeRequest = {
            targetLevel,
            coverage: this.settings.coverage,
            rates: this.settings.rates,
            seed: this.settings.seed,
            mode: this.settings.mode,
        };
        const promise = this.api.decode(imageId, request);
        this.inFlight.set(imageId, promise);
        try {
            const response = await promise;
            this.record(imageId, targetLevel, response);
            return response;
        } finally {
            this.inFlight.delete(imageId);
        }
    }

    private record(imageId: number, level: number, response: DecodeResponse): void {
        const points = this.history.get(imageId) ?? [];
        const last = points.length ? points[points.length - 1] : null;
        if (last !== null && level <= last.level) {
            throw new Error(`history level ${level} not past ${last.level}`);
        }
        if (last !== null && response.cumulativeReadCost < last.cumulativeReadCost) {
            throw new Error("cumulative read cost decreased");
        }
        points.push({
            level,
            psnr: response.psnr,
            cumulativeReadCost: response.cumulativeReadCost,
            imageUrl: response.imageUrl,
        });
        this.history.set(imageId, points);
    }
}
