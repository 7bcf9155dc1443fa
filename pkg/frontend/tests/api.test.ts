import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), {
        status,
        headers: { "Content-Type": "application/json" },
    });
}

afterEach(() => {
    vi.unstubAllGlobals();
});

describe("ApiClient", () => {
    it("lists images from the configured base URL", async () => {
        const fetchMock = vi.fn().mockResolvedValue(
            jsonResponse([{ imageId: 0, thumbnailUrl: "/t0", primerPairId: 0 }]),
        );
        vi.stubGlobal("fetch", fetchMock);
        const client = new ApiClient("http://api.example");
        const entries = await client.listImages();
        expect(fetchMock).toHaveBeenCalledWith("http://api.example/api/images");
        expect(entries[0].imageId).toBe(0);
    });

    it("posts decode requests as JSON", async () => {
        const body = {
            imageUrl: "/api/images/2/image.bmp?level=1",
            psnr: 21.5,
            layerCosts: [],
            cumulativeReadCost: 2.5,
            gains: { pd: 3, ra: 5 },
        };
        const fetchMock = vi.fn().mockResolvedValue(jsonResponse(body));
        vi.stubGlobal("fetch", fetchMock);
        const client = new ApiClient();
        const request = {
            targetLevel: 1,
            coverage: 5,
            rates: { sub: 0.004, ins: 0.002, del: 0.006 },
            seed: 0,
        };
        const response = await client.decode(2, request);
        expect(response).toEqual(body);
        const [url, init] = fetchMock.mock.calls[0];
        expect(url).toBe("/api/images/2/decode");
        expect(init.method).toBe("POST");
        expect(JSON.parse(init.body)).toEqual(request);
    });

    it("surfaces structured errors with status and body", async () => {
        const fetchMock = vi.fn().mockResolvedValue(
            jsonResponse({ code: "layer-recovery", message: "layer 2 failed", layer: 2 }, 422),
        );
        vi.stubGlobal("fetch", fetchMock);
        const client = new ApiClient();
        const failure = await client
            .decode(0, { targetLevel: 4, coverage: 1, rates: { sub: 0, ins: 0, del: 0 }, seed: 0 })
            .catch((e: unknown) => e);
        expect(failure).toBeInstanceOf(ApiError);
        const error = failure as ApiError;
        expect(error.status).toBe(422);
        expect(error.body.code).toBe("layer-recovery");
        expect(error.body.layer).toBe(2);
    });

    it("copes with non-JSON error bodies", async () => {
        const fetchMock = vi.fn().mockResolvedValue(
            new Response("boom", { status: 500, statusText: "Server Error" }),
        );
        vi.stubGlobal("fetch", fetchMock);
        const failure = await new ApiClient().listImages().catch((e: unknown) => e);
        expect(failure).toBeInstanceOf(ApiError);
        expect((failure as ApiError).body.code).toBe("http-500");
    });

    it("prefixes relative image URLs", () => {
        const client = new ApiClient("http://api.example");
        expect(client.imageUrl("/api/images/0/image.bmp?level=3")).toBe(
            "http://api.example/api/images/0/image.bmp?level=3",
        );
    });
});
