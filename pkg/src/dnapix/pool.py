"""Oligo assembly, the multi-image pool, PCR selection and FASTA persistence.

Oligo field order (outermost first): layer-left, image-left, data block,
image-right, layer-right. Layer primers sit outermost; image primers inner.
The rotating data code is seeded with the last nucleotide of the inner left
primer so the block can never extend a primer homopolymer run.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .codec import LayeredStream, encode_layers
from .distance import levenshtein, encode_seq
from .errors import ContractError, ParseError
from .image import Image
from .primers import PRIMER_LENGTH, PrimerPair, PrimerRegistry
from .transcode import (
    BLOCK_NT,
    DataBlock,
    block_to_nucleotides,
    blocks_from_stream,
    nucleotides_to_block,
)

OLIGO_LENGTH = 4 * PRIMER_LENGTH + BLOCK_NT  # 272 nt


@dataclass(frozen=True)
class Provenance:
    """Ground truth for assertions only; never an input to reconstruction."""

    image_id: int
    layer: int
    block_index: int


@dataclass(frozen=True)
class Oligo:
    sequence: str
    provenance: Provenance


def assemble_oligo(layer_pair: PrimerPair, image_pair: PrimerPair, block: DataBlock,
                   provenance: Provenance) -> Oligo:
    body = block_to_nucleotides(block, prev=image_pair.left[-1])
    seq = layer_pair.left + image_pair.left + body + image_pair.right + layer_pair.right
    return Oligo(sequence=seq, provenance=provenance)


def disassemble_block(oligo: Oligo, image_pair: PrimerPair) -> DataBlock:
    """Noise-free inverse of :func:`assemble_oligo` at the known offsets."""
    body = oligo.sequence[2 * PRIMER_LENGTH : 2 * PRIMER_LENGTH + BLOCK_NT]
    return nucleotides_to_block(body, prev=image_pair.left[-1])


@dataclass
class ManifestEntry:
    image_id: int
    layer: int
    oligos: int
    layer_bytes: int


@dataclass
class OligoPool:
    oligos: list[Oligo]
    registry: PrimerRegistry
    manifest: list[ManifestEntry]
    num_levels: int
    q: int
    image_dims: dict[int, tuple[int, int, int]] = field(default_factory=dict)

    def manifest_count(self, image_id: int, layer: int) -> int:
        for e in self.manifest:
            if e.image_id == image_id and e.layer == layer:
                return e.oligos
        return 0

    @property
    def image_ids(self) -> list[int]:
        return sorted({e.image_id for e in self.manifest})


def build_pool(images, num_levels: int, q: int, registry: PrimerRegistry) -> OligoPool:
    """Encode every (id, Image) into layers and pool all oligos together."""
    oligos: list[Oligo] = []
    manifest: list[ManifestEntry] = []
    dims: dict[int, tuple[int, int, int]] = {}
    layer0 = registry.layer_pairs[0]
    for image_id, img in images:
        if image_id >= len(registry.image_pairs):
            raise ContractError(f"no image primer pair for image id {image_id}")
        image_pair = registry.image_pairs[image_id]
        stream: LayeredStream = encode_layers(img, num_levels, q)
        dims[image_id] = (img.width, img.height, img.channels)
        for container in stream.layers:
            layer_pair = layer0 if container.layer_index == 0 else registry.layer_pairs[
                container.layer_index
            ]
            layer_bytes = container.serialize()
            blocks = blocks_from_stream(layer_bytes)
            for block in blocks:
                oligos.append(
                    assemble_oligo(
                        layer_pair,
                        image_pair,
                        block,
                        Provenance(image_id, container.layer_index, block.index),
                    )
                )
            manifest.append(
                ManifestEntry(image_id, container.layer_index, len(blocks), len(layer_bytes))
            )
    return OligoPool(oligos, registry, manifest, num_levels, q, dims)


def _window_match(window: str, primer: str, tau: int) -> bool:
    if window == primer:
        return True
    if tau == 0:
        return False
    return levenshtein(encode_seq(window), encode_seq(primer)) <= tau


def _pair_matches(seq: str, pair: PrimerPair, tau: int) -> bool:
    outer_l, inner_l = seq[:PRIMER_LENGTH], seq[PRIMER_LENGTH : 2 * PRIMER_LENGTH]
    outer_r, inner_r = seq[-PRIMER_LENGTH:], seq[-2 * PRIMER_LENGTH : -PRIMER_LENGTH]
    if _window_match(outer_l, pair.left, tau) and _window_match(outer_r, pair.right, tau):
        return True
    return _window_match(inner_l, pair.left, tau) and _window_match(inner_r, pair.right, tau)


def pcr_select(pool: OligoPool, pairs, tau: int = 0, amplification: int = 1) -> list[Oligo]:
    """Select oligos matching ANY requested pair, copied ``amplification`` times."""
    if tau < 0 or amplification < 1:
        raise ContractError("tau must be >= 0 and amplification >= 1")
    out = []
    for oligo in pool.oligos:
        if any(_pair_matches(oligo.sequence, p, tau) for p in pairs):
            out.extend([oligo] * amplification)
    return out


def pcr_select_all(pool: OligoPool, pairs, tau: int = 0, amplification: int = 1) -> list[Oligo]:
    """Conjunction round: an oligo must match EVERY requested pair."""
    if tau < 0 or amplification < 1:
        raise ContractError("tau must be >= 0 and amplification >= 1")
    out = []
    for oligo in pool.oligos:
        if all(_pair_matches(oligo.sequence, p, tau) for p in pairs):
            out.extend([oligo] * amplification)
    return out


_HEADER_RE = re.compile(r"^img(\d+)_L(\d+)_b(\d+)$")


def save_pool(pool: OligoPool, fasta_path, meta_path=None) -> None:
    fasta_path = str(fasta_path)
    meta_path = str(meta_path) if meta_path else fasta_path + ".meta.json"
    with open(fasta_path, "w") as fh:
        for oligo in pool.oligos:
            p = oligo.provenance
            fh.write(f">img{p.image_id}_L{p.layer}_b{p.block_index:05}\n{oligo.sequence}\n")
    meta = {
        "registry": json.loads(pool.registry.to_json()),
        "manifest": [
            {"image": e.image_id, "layer": e.layer, "oligos": e.oligos, "layerBytes": e.layer_bytes}
            for e in pool.manifest
        ],
        "codec": {"numLevels": pool.num_levels, "q": pool.q},
        "imageDims": {
            str(i): {"width": w, "height": h, "channels": c}
            for i, (w, h, c) in sorted(pool.image_dims.items())
        },
    }
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=2)


def load_pool(fasta_path, meta_path=None) -> OligoPool:
    fasta_path = str(fasta_path)
    meta_path = str(meta_path) if meta_path else fasta_path + ".meta.json"
    oligos = []
    with open(fasta_path) as fh:
        header = None
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith(">"):
                m = _HEADER_RE.match(line[1:])
                if not m:
                    raise ParseError(f"{fasta_path}:{lineno}: malformed header {line!r}")
                header = tuple(int(g) for g in m.groups())
            else:
                if header is None:
                    raise ParseError(f"{fasta_path}:{lineno}: sequence before any header")
                if not set(line) <= set("ACGT"):
                    raise ParseError(f"{fasta_path}:{lineno}: non-ACGT sequence")
                oligos.append(Oligo(line, Provenance(*header)))
                header = None
    try:
        with open(meta_path) as fh:
            meta = json.load(fh)
        registry = PrimerRegistry.from_json(json.dumps(meta["registry"]))
        manifest = [
            ManifestEntry(e["image"], e["layer"], e["oligos"], e["layerBytes"])
            for e in meta["manifest"]
        ]
        codec = meta["codec"]
        dims = {
            int(i): (d["width"], d["height"], d["channels"])
            for i, d in meta.get("imageDims", {}).items()
        }
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{meta_path}: malformed sidecar: {exc}") from exc
    return OligoPool(oligos, registry, manifest, codec["numLevels"], codec["q"], dims)
