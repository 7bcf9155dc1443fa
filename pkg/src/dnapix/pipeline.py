"""End-to-end decode orchestration: PCR selection, sequencing, read
reconstruction and progressive image assembly, with per-layer reuse.

The reconstruction stage only ever sees read strings and the registry;
oligo provenance stays on the selection side of the channel.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .channel import ErrorRates, sequence
from .codec import decode_layers
from .costs import CostInputs, CostReport, gains as cost_gains
from .errors import ContractError, DnapixError, LayerRecoveryError
from .pool import OligoPool, pcr_select_all
from .primers import DEFAULT_TAU, PrimerPair
from .reconstruct import (
    TrimmedRead,
    cluster_reads,
    assemble_layer_container,
    recover_layer_blocks,
    trim_and_identify,
)

# A PCR round copies every selected oligo; sequencing then samples reads per
# copy, so the effective depth is amplification x coverage.
DEFAULT_AMPLIFICATION = 6


def _layer_seed(seed: int, layer: int) -> int:
    return (seed * 0x9E3779B9 + layer) % (1 << 62)


@dataclass
class LayerTrace:
    layer: int
    oligos_selected: int
    reads_seen: int
    clusters_formed: int
    consensus_failures: int
    bytes_recovered: int
    blocks_recovered: int = 0
    blocks_expected: int = 0

    def to_dict(self) -> dict:
        return {
            "layer": self.layer,
            "oligosSelected": self.oligos_selected,
            "readsSeen": self.reads_seen,
            "clustersFormed": self.clusters_formed,
            "consensusFailures": self.consensus_failures,
            "bytesRecovered": self.bytes_recovered,
            "blocksRecovered": self.blocks_recovered,
            "blocksExpected": self.blocks_expected,
        }


@dataclass
class DecodeResult:
    image: object
    report: CostReport
    traces: list[LayerTrace]
    gains: tuple[float, float]
    sequenced_layers: list[int]


@dataclass
class _ImageCache:
    containers: dict = field(default_factory=dict)  # layer -> LayerContainer
    layer_oligos: dict = field(default_factory=dict)
    layer_nucleotides: dict = field(default_factory=dict)
    traces: dict = field(default_factory=dict)


class ProgressiveDecoder:
    """Stateful decoder over one pool: repeated calls for the same image
    re-sequence only layers not recovered before."""

    def __init__(self, pool: OligoPool, tau: int = DEFAULT_TAU,
                 amplification: int = DEFAULT_AMPLIFICATION):
        if amplification < 1:
            raise ContractError("amplification must be >= 1")
        self.pool = pool
        self.tau = tau
        self.amplification = amplification
        self._cache: dict[int, _ImageCache] = defaultdict(_ImageCache)

    def layer_traces(self, image_id: int) -> list[LayerTrace]:
        """Traces for every layer attempted so far, in layer order."""
        cache = self._cache[image_id]
        return [cache.traces[k] for k in sorted(cache.traces)]

    def image_id_for_pair(self, pair: PrimerPair) -> int:
        for i, p in enumerate(self.pool.registry.image_pairs):
            if p == pair:
                return i
        raise ContractError("primer pair does not belong to the pool registry")

    def _recover_layer(self, image_id: int, pair: PrimerPair, layer: int,
                       coverage: float, rates: ErrorRates, seed: int, mode: str):
        registry = self.pool.registry
        selection = pcr_select_all(
            self.pool,
            [pair, registry.layer_pairs[layer]],
            tau=0,
            amplification=self.amplification,
        )
        readset = sequence(selection, coverage, rates, _layer_seed(seed, layer), mode)
        trimmed = []
        for read in readset.reads:
            t = trim_and_identify(read, registry, self.tau)
            if isinstance(t, TrimmedRead) and t.layer_id == layer:
                trimmed.append(t)
        clusters, rescue, _ = cluster_reads(trimmed, registry, self.tau)
        keyed = {k: c for k, c in clusters.items() if k[0] == image_id and k[1] == layer}
        stats = Counter()
        blocks = recover_layer_blocks(keyed, rescue.get((image_id, layer)), stats)
        cache = self._cache[image_id]
        cache.layer_oligos[layer] = len(selection)
        cache.layer_nucleotides[layer] = readset.total_nucleotides
        expected = self.pool.manifest_count(image_id, layer)
        recovered = len([i for i in blocks if i < expected]) if expected else len(blocks)
        try:
            container = assemble_layer_container(blocks)
        except DnapixError as exc:
            cache.traces[layer] = LayerTrace(
                layer, len(selection), len(readset.reads), len(keyed),
                stats["consensusFailures"], 0, recovered, expected,
            )
            raise LayerRecoveryError(layer, f"layer {layer}: {exc}") from exc
        cache.traces[layer] = LayerTrace(
            layer, len(selection), len(readset.reads), len(keyed),
            stats["consensusFailures"], len(container.serialize()),
            recovered, expected,
        )
        cache.containers[layer] = container

    def decode(self, pair: PrimerPair, target_level: int, coverage: float,
               rates: ErrorRates, seed: int, mode: str = "poisson") -> DecodeResult:
        image_id = self.image_id_for_pair(pair)
        cache = self._cache[image_id]
        newly_sequenced = []
        failure = None
        for layer in range(target_level + 1):
            if layer in cache.containers:
                continue
            try:
                self._recover_layer(image_id, pair, layer, coverage, rates, seed, mode)
                newly_sequenced.append(layer)
            except LayerRecoveryError as exc:
                failure = exc
                break
        best = -1
        while best + 1 in cache.containers:
            best += 1
        if failure is not None or best < target_level:
            layer = failure.layer if failure is not None else best + 1
            partial = None
            if best >= 0:
                partial = decode_layers(list(cache.containers.values()), best)
            raise LayerRecoveryError(
                layer,
                f"layer {layer} could not be recovered (best decodable level {best})",
                partial=partial,
                best_level=best if best >= 0 else None,
            )
        image = decode_layers(
            [cache.containers[k] for k in range(target_level + 1)], target_level
        )
        base = cache.containers[0]
        pixels = base.width * base.height
        report = CostReport(image_id=image_id, input_pixels=pixels)
        for layer in sorted(cache.layer_nucleotides):
            if layer <= target_level:
                report.add_layer(
                    layer, cache.layer_oligos[layer], cache.layer_nucleotides[layer]
                )
        g = self._gains(image_id, target_level, report, coverage)
        traces = [cache.traces[k] for k in sorted(cache.traces) if k <= target_level]
        return DecodeResult(image, report, traces, g, newly_sequenced)

    def _gains(self, image_id: int, target_level: int, report: CostReport,
               nominal_coverage: float):
        """Observed gains: per-layer coverage from actual sequenced
        nucleotides; unsequenced layers assume the nominal depth."""
        pool = self.pool
        counts = {}
        for e in pool.manifest:
            key = (pool.image_ids.index(e.image_id), e.layer)
            counts[key] = counts.get(key, 0) + e.oligos
        image_index = pool.image_ids.index(image_id)
        coverage = []
        for k in range(pool.num_levels):
            own = counts.get((image_index, k), 0)
            nts = report.layer_nucleotides.get(k)
            if nts is not None and own > 0:
                coverage.append(nts / (own * report.oligo_length))
            else:
                coverage.append(nominal_coverage * self.amplification)
        inputs = CostInputs(
            n_images=len(pool.image_ids),
            n_levels=pool.num_levels,
            oligo_counts=counts,
            coverage=coverage,
            input_pixels=report.input_pixels,
        )
        return cost_gains(inputs, image_index, target_level)


def decode_image(pool: OligoPool, pair: PrimerPair, target_level: int,
                 coverage: float, rates: ErrorRates, seed: int,
                 mode: str = "poisson", tau: int = DEFAULT_TAU,
                 amplification: int = DEFAULT_AMPLIFICATION) -> DecodeResult:
    """One-shot decode of a single image at the requested resolution level."""
    decoder = ProgressiveDecoder(pool, tau=tau, amplification=amplification)
    return decoder.decode(pair, target_level, coverage, rates, seed, mode)


def coverage_sweep(pool: OligoPool, image_id: int, target_level: int,
                   rates: ErrorRates, coverages, seed_count: int = 3,
                   amplification: int = 1, mode: str = "poisson"):
    """Decode success fraction per coverage value, over ``seed_count`` seeds."""
    if not coverages:
        raise ContractError("coverage list must be nonempty")
    pair = pool.registry.image_pairs[image_id]
    rows = []
    for coverage in coverages:
        successes = 0
        for seed in range(seed_count):
            try:
                decode_image(
                    pool, pair, target_level, coverage, rates, seed,
                    mode=mode, amplification=amplification,
                )
                successes += 1
            except DnapixError:
                pass
        rows.append((coverage, successes / seed_count))
    return rows
