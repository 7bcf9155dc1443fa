/** DOM wiring: thumbnail gallery, decode panel, chart and error banner. */

import { ApiClient, ApiError } from "./api.js";
import { renderChart } from "./chart.js";
import { GalleryModel } from "./model.js";

const MAX_LEVEL = 4;

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) {
        node.className = className;
    }
    if (text) {
        node.textContent = text;
    }
    return node;
}

class App {
    private readonly api: ApiClient;
    private readonly model: GalleryModel;
    private readonly gallery: HTMLElement;
    private readonly panel: HTMLElement;
    private readonly banner: HTMLElement;

    constructor(root: HTMLElement, baseUrl: string) {
        this.api = new ApiClient(baseUrl);
        this.model = new GalleryModel(this.api);
        this.banner = el("div", "banner hidden");
        this.gallery = el("div", "gallery");
        this.panel = el("div", "panel hidden");
        root.append(this.banner, this.gallery, this.panel);
    }

    async start(): Promise<void> {
        try {
            await this.model.load();
        } catch (error) {
            this.showError(error, () => this.start());
            return;
        }
        this.hideError();
        this.renderGallery();
    }

    private renderGallery(): void {
        this.gallery.replaceChildren();
        if (!this.model.entries.length) {
            this.gallery.append(el("p", "empty", "The pool contains no images."));
            return;
        }
        for (const entry of this.model.entries) {
            const tile = el("button", "tile");
            const img = el("img");
            img.src = this.api.imageUrl(entry.thumbnailUrl);
            img.alt = `thumbnail of image ${entry.imageId}`;
            tile.append(img, el("span", "tile-id", `image ${entry.imageId}`));
            tile.addEventListener("click", () => {
                this.model.select(entry.imageId);
                this.renderPanel();
            });
            this.gallery.append(tile);
        }
    }

    private renderPanel(): void {
        const imageId = this.model.selected;
        if (imageId === null) {
            return;
        }
        this.panel.classList.remove("hidden");
        this.panel.replaceChildren(el("h2", "", `image ${imageId}`));

        const history = this.model.historyFor(imageId);
        const last = history.length ? history[history.length - 1] : null;

        const preview = el("div", "preview");
        if (last !== null) {
            const img = el("img");
            img.src = this.api.imageUrl(last.imageUrl);
            img.alt = `image ${imageId} at level ${last.level}`;
            preview.append(img);
            const badge = last.psnr === null ? "lossless" : `${last.psnr.toFixed(1)} dB`;
            preview.append(el("span", "psnr-badge", badge));
            preview.append(
                el("span", "cost-badge", `${last.cumulativeReadCost.toFixed(2)} nt/px`),
            );
        }
        this.panel.append(preview);

        const controls = el("div", "controls");
        for (let level = 0; level <= MAX_LEVEL; level++) {
            const button = el("button", "step", `level ${level}`);
            button.disabled = !this.model.canStep(imageId, level);
            button.addEventListener("click", () => this.step(imageId, level));
            controls.append(button);
        }
        this.panel.append(controls);

        const chart = el("div", "chart");
        chart.innerHTML = renderChart(history);
        this.panel.append(chart);
    }

    private async step(imageId: number, level: number): Promise<void> {
        try {
            await this.model.stepDecode(imageId, level);
            this.hideError();
        } catch (error) {
            if (error instanceof ApiError && error.body.layer !== undefined) {
                this.showError(
                    new Error(
                        `layer ${error.body.layer} failed to decode; try a higher coverage`,
                    ),
                    () => this.step(imageId, level),
                );
            } else {
                this.showError(error, () => this.step(imageId, level));
            }
        }
        this.renderPanel();
    }

    private showError(error: unknown, retry: () => void): void {
        const message = error instanceof Error ? error.message : String(error);
        this.banner.replaceChildren(el("span", "", message));
        const button = el("button", "retry", "retry");
        button.addEventListener("click", retry);
        this.banner.append(button);
        this.banner.classList.remove("hidden");
    }

    private hideError(): void {
        this.banner.classList.add("hidden");
    }
}

const root = document.getElementById("app");
if (root) {
    const base = root.dataset.apiBase ?? "";
    void new App(root, base).start();
}
