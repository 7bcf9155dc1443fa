/** Typed client for the decode service. All numbers shown anywhere in the
 * UI come from these responses verbatim; nothing is recomputed here. */

export interface GalleryEntry {
    imageId: number;
    thumbnailUrl: string;
    primerPairId: number;
}

export interface ErrorRates {
    sub: number;
    ins: number;
    del: number;
}

export interface DecodeRequest {
    targetLevel: number;
    coverage: number;
    rates: ErrorRates;
    seed: number;
    mode?: string;
}

export interface LayerCost {
    layer: number;
    oligos: number;
    nucleotides: number;
    readCost: number;
}

export interface DecodeResponse {
    imageUrl: string;
    psnr: number | null;
    layerCosts: LayerCost[];
    cumulativeReadCost: number;
    gains: { pd: number; ra: number };
}

export interface ApiErrorBody {
    code: string;
    message: string;
    layer?: number;
}

export class ApiError extends Error {
    constructor(
        readonly status: number,
        readonly body: ApiErrorBody,
    ) {
        super(body.message);
    }
}

async function parseFailure(response: Response): Promise<never> {
    let body: ApiErrorBody;
    try {
        body = (await response.json()) as ApiErrorBody;
    } catch {
        body = { code: "http-" + response.status, message: response.statusText };
    }
    throw new ApiError(response.status, body);
}

export class ApiClient {
    constructor(readonly baseUrl: string = "") {}

    async listImages(): Promise<GalleryEntry[]> {
        const response = await fetch(this.baseUrl + "/api/images");
        if (!response.ok) {
            return parseFailure(response);
        }
        return (await response.json()) as GalleryEntry[];
    }

    async decode(imageId: number, request: DecodeRequest): Promise<DecodeResponse> {
        const response = await fetch(
            `${this.baseUrl}/api/images/${imageId}/decode`,
            {
                method: "POST",
                headers: { "Content-Type": "application/json" },
                body: JSON.stringify(request),
            },
        );
        if (!response.ok) {
            return parseFailure(response);
        }
        return (await response.json()) as DecodeResponse;
    }

    imageUrl(relative: string): string {
        return this.baseUrl + relative;
    }
}
