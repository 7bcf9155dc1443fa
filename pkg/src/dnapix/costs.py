"""Read-cost and read-cost-gain model, plus Table-style reporting.

Costs are nucleotides sequenced per pixel of the target image. Three
retrieval strategies are compared: sequencing the whole pool, progressive
decoding (all images up to layer K), and progressive decoding with random
access (thumbnails of all images plus layers 1..K of one image).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ContractError
from .pool import OLIGO_LENGTH


@dataclass
class CostInputs:
    n_images: int
    n_levels: int
    oligo_counts: dict[tuple[int, int], int]  # (image, layer) -> count
    coverage: list[float]  # per layer
    input_pixels: int
    oligo_length: int = OLIGO_LENGTH

    def __post_init__(self):
        if len(self.coverage) != self.n_levels:
            raise ContractError("coverage vector length must equal the level count")
        if any(c < 0 for c in self.coverage):
            raise ContractError("coverage must be >= 0")
        if any(v < 0 for v in self.oligo_counts.values()):
            raise ContractError("oligo counts must be >= 0")

    def count(self, image: int, layer: int) -> int:
        if not (0 <= image < self.n_images and 0 <= layer < self.n_levels):
            raise ContractError(f"index ({image}, {layer}) out of range")
        return self.oligo_counts.get((image, layer), 0)


def nucs(inputs: CostInputs, image: int, layer: int) -> float:
    """Nucleotides to sequence for one (image, layer) cell."""
    return inputs.coverage[layer] * inputs.count(image, layer) * inputs.oligo_length


def read_cost_variants(inputs: CostInputs, image: int, target_level: int):
    """(Rc, Rc_pd, Rc_ra): whole pool, progressive, progressive + random access."""
    if not (0 <= image < inputs.n_images and 0 <= target_level < inputs.n_levels):
        raise ContractError("image or level index out of range")
    if inputs.input_pixels <= 0:
        raise ContractError("input pixel count must be positive")
    total = sum(
        nucs(inputs, i, k)
        for i in range(inputs.n_images)
        for k in range(inputs.n_levels)
    )
    pd = sum(
        nucs(inputs, i, k)
        for i in range(inputs.n_images)
        for k in range(target_level + 1)
    )
    ra = sum(nucs(inputs, i, 0) for i in range(inputs.n_images)) + sum(
        nucs(inputs, image, k) for k in range(1, target_level + 1)
    )
    px = inputs.input_pixels
    return total / px, pd / px, ra / px


def gains(inputs: CostInputs, image: int, target_level: int):
    """(G_pd, G_ra) = Rc / Rc_pd and Rc / Rc_ra."""
    rc, rc_pd, rc_ra = read_cost_variants(inputs, image, target_level)
    if rc_pd == 0 or rc_ra == 0:
        raise ContractError("gain denominator is zero")
    return rc / rc_pd, rc / rc_ra


def gains_from_cumulative(pd_cumulative, ra_cumulative, coverages=None):
    """Gains straight from per-level cumulative oligo counts.

    The published table reports cumulative counts through each level: the
    pool-wide count for the progressive rows and thumbnails-plus-one-image
    for the random-access rows. With coverage 1 the oligo length cancels and
    the gains are plain count ratios.
    """
    n = len(pd_cumulative)
    if len(ra_cumulative) != n:
        raise ContractError("cumulative count vectors must have equal length")
    cov = list(coverages) if coverages is not None else [1.0] * n
    if len(cov) != n:
        raise ContractError("coverage vector length mismatch")
    pd_inc = [pd_cumulative[0]] + [
        pd_cumulative[k] - pd_cumulative[k - 1] for k in range(1, n)
    ]
    ra_inc = [ra_cumulative[0]] + [
        ra_cumulative[k] - ra_cumulative[k - 1] for k in range(1, n)
    ]
    total = sum(c * inc for c, inc in zip(cov, pd_inc))
    g_pd, g_ra = [], []
    pd_acc = ra_acc = 0.0
    for k in range(n):
        pd_acc += cov[k] * pd_inc[k]
        ra_acc += cov[k] * ra_inc[k]
        g_pd.append(total / pd_acc)
        g_ra.append(total / ra_acc)
    return g_pd, g_ra


@dataclass
class CostReport:
    """Per-layer sequencing tallies for one decoded image."""

    image_id: int
    input_pixels: int
    oligo_length: int = OLIGO_LENGTH
    layer_oligos: dict[int, int] = field(default_factory=dict)
    layer_nucleotides: dict[int, int] = field(default_factory=dict)

    def add_layer(self, layer: int, oligos: int, nucleotides: int) -> None:
        self.layer_oligos[layer] = oligos
        self.layer_nucleotides[layer] = nucleotides

    @property
    def layers(self) -> list[int]:
        return sorted(self.layer_nucleotides)

    @property
    def total_nucleotides(self) -> int:
        return sum(self.layer_nucleotides.values())

    @property
    def cumulative_read_cost(self) -> float:
        return self.total_nucleotides / self.input_pixels

    def layer_costs(self) -> dict[int, float]:
        return {
            k: v / self.input_pixels for k, v in sorted(self.layer_nucleotides.items())
        }

    def to_dict(self) -> dict:
        return {
            "imageId": self.image_id,
            "inputPixels": self.input_pixels,
            "oligoLength": self.oligo_length,
            "perLayer": [
                {
                    "layer": k,
                    "oligos": self.layer_oligos.get(k, 0),
                    "nucleotides": self.layer_nucleotides[k],
                    "readCost": self.layer_nucleotides[k] / self.input_pixels,
                }
                for k in self.layers
            ],
            "cumulativeReadCost": self.cumulative_read_cost,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def pool_cost_inputs(pool, coverage=None) -> CostInputs:
    """CostInputs for a pool, defaulting to coverage 1 on every layer."""
    counts = {}
    for e in pool.manifest:
        counts[(e.image_id, e.layer)] = counts.get((e.image_id, e.layer), 0) + e.oligos
    cov = list(coverage) if coverage is not None else [1.0] * pool.num_levels
    pixels = 1
    if pool.image_dims:
        w, h, _ = next(iter(sorted(pool.image_dims.items())))[1]
        pixels = w * h
    return CostInputs(
        n_images=len(pool.image_ids),
        n_levels=pool.num_levels,
        oligo_counts={
            (pool.image_ids.index(i), k): v for (i, k), v in counts.items()
        },
        coverage=cov,
        input_pixels=pixels,
    )


def pool_gain_table(pool, coverage=None) -> dict:
    """Table-shaped report: pool-wide cumulative counts, average gains."""
    inputs = pool_cost_inputs(pool, coverage)
    n = inputs.n_levels
    pd_cum = []
    acc = 0
    for k in range(n):
        acc += sum(inputs.count(i, k) for i in range(inputs.n_images))
        pd_cum.append(acc)
    g_pd = []
    g_ra = []
    for k in range(n):
        per_image = [gains(inputs, i, k) for i in range(inputs.n_images)]
        g_pd.append(sum(p for p, _ in per_image) / len(per_image))
        g_ra.append(sum(r for _, r in per_image) / len(per_image))
    thumb_total = sum(inputs.count(i, 0) for i in range(inputs.n_images))
    ra_cum = []
    for k in range(n):
        per_image = [
            thumb_total + sum(inputs.count(i, j) for j in range(1, k + 1))
            for i in range(inputs.n_images)
        ]
        ra_cum.append(sum(per_image) / len(per_image))
    return {
        "levels": list(range(n)),
        "pdCumulativeOligos": pd_cum,
        "raCumulativeOligos": ra_cum,
        "coverage": inputs.coverage,
        "gainsPd": g_pd,
        "gainsRa": g_ra,
    }


def format_gain_table(table: dict) -> str:
    """Aligned text rendering of :func:`pool_gain_table`."""
    headers = ["Layer"] + [f"L{k}" for k in table["levels"]]
    rows = [
        ("# Oligos (pd, cumulative)", table["pdCumulativeOligos"], "{:d}"),
        ("G_pd read-cost gain", table["gainsPd"], "{:.3g}"),
        ("# Oligos (ra, cumulative)", [round(v, 1) for v in table["raCumulativeOligos"]], "{}"),
        ("G_ra read-cost gain", table["gainsRa"], "{:.3g}"),
        ("Coverage", table["coverage"], "{}"),
    ]
    cells = [headers] + [
        [label] + [fmt.format(v) if fmt != "{}" else str(v) for v in values]
        for label, values, fmt in rows
    ]
    widths = [max(len(str(row[i])) for row in cells) for i in range(len(headers))]
    lines = [
        "  ".join(str(cell).rjust(w) for cell, w in zip(row, widths)) for row in cells
    ]
    return "\n".join(lines)


def rd_curve_csv(points) -> str:
    """CSV of (readCost, PSNR) pairs for distortion-vs-cost curves."""
    lines = ["readCost,psnr"]
    for cost, value in points:
        lines.append(f"{cost},{value}")
    return "\n".join(lines) + "\n"
