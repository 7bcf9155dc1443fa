"""Deterministic primer generation and fuzzy primer identification.

Primers are 20-mers with bounded homopolymer runs and balanced GC content,
rejection-sampled so that every pair of registry primers (and every primer
against every reverse complement) is at Hamming distance >= 8. The distance
floor makes snapping of reads corrupted by <= 3 edits unambiguous.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .distance import encode_seq, levenshtein
from .errors import CapacityError, ContractError, ParseError, UnidentifiedPrimerError

PRIMER_LENGTH = 20
MIN_HAMMING = 8
MAX_HOMOPOLYMER = 3
GC_RANGE = (0.40, 0.60)
DEFAULT_TAU = 3
MAX_DRAWS = 10**6
NUCLEOTIDE_ALPHABET = "ACGT"

_COMPLEMENT = str.maketrans("ACGT", "TGCA")


def reverse_complement(seq: str) -> str:
    return seq.translate(_COMPLEMENT)[::-1]


def gc_fraction(seq: str) -> float:
    return (seq.count("G") + seq.count("C")) / len(seq)


def max_homopolymer(seq: str) -> int:
    best = run = 1
    for prev, cur in zip(seq, seq[1:]):
        run = run + 1 if cur == prev else 1
        if run > best:
            best = run
    return best if seq else 0


def hamming(a: str, b: str) -> int:
    return sum(1 for x, y in zip(a, b) if x != y)


@dataclass(frozen=True)
class PrimerPair:
    left: str
    right: str


@dataclass
class PrimerRegistry:
    seed: int
    layer_pairs: list[PrimerPair]
    image_pairs: list[PrimerPair]

    def all_primers(self) -> list[str]:
        out = []
        for p in self.layer_pairs + self.image_pairs:
            out.extend([p.left, p.right])
        return out

    @property
    def num_levels(self) -> int:
        return len(self.layer_pairs)

    @property
    def num_images(self) -> int:
        return len(self.image_pairs)

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "layerPairs": [
                    {"k": k, "left": p.left, "right": p.right}
                    for k, p in enumerate(self.layer_pairs)
                ],
                "imagePairs": [
                    {"i": i, "left": p.left, "right": p.right}
                    for i, p in enumerate(self.image_pairs)
                ],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "PrimerRegistry":
        try:
            doc = json.loads(text)
            layer = sorted(doc["layerPairs"], key=lambda e: e["k"])
            image = sorted(doc["imagePairs"], key=lambda e: e["i"])
            return cls(
                seed=doc["seed"],
                layer_pairs=[PrimerPair(e["left"], e["right"]) for e in layer],
                image_pairs=[PrimerPair(e["left"], e["right"]) for e in image],
            )
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ParseError(f"malformed registry document: {exc}") from exc


def _candidate_ok(candidate: str, accepted: list[str]) -> bool:
    if max_homopolymer(candidate) > MAX_HOMOPOLYMER:
        return False
    gc = gc_fraction(candidate)
    if not GC_RANGE[0] <= gc <= GC_RANGE[1]:
        return False
    for other in accepted:
        if hamming(candidate, other) < MIN_HAMMING:
            return False
        if hamming(candidate, reverse_complement(other)) < MIN_HAMMING:
            return False
    return True


def generate_registry(n_levels: int, n_images: int, seed: int) -> PrimerRegistry:
    """Rejection-sample a registry; identical inputs give identical output."""
    needed = 2 * (n_levels + n_images)
    if needed > 4096:
        raise ContractError(f"{needed} primers exceeds the practical sampling bound")
    rng = random.Random(seed)
    accepted: list[str] = []
    draws = 0
    while len(accepted) < needed:
        candidate = "".join(rng.choice(NUCLEOTIDE_ALPHABET) for _ in range(PRIMER_LENGTH))
        draws += 1
        if draws > MAX_DRAWS:
            raise CapacityError(f"no valid primer after {MAX_DRAWS} draws")
        if _candidate_ok(candidate, accepted):
            accepted.append(candidate)
    pairs = [PrimerPair(accepted[i], accepted[i + 1]) for i in range(0, needed, 2)]
    return PrimerRegistry(
        seed=seed,
        layer_pairs=pairs[:n_levels],
        image_pairs=pairs[n_levels : n_levels + n_images],
    )


def match_primer(window: str, primer: str, tau: int = DEFAULT_TAU):
    """Edit distance if within ``tau``, else None."""
    if tau < 0:
        raise ContractError("tau must be >= 0")
    dist = levenshtein(encode_seq(window), encode_seq(primer))
    return dist if dist <= tau else None


def nearest_primer(observed: str, primers: list[str], tau: int = DEFAULT_TAU):
    """(index, distance) of the closest primer; ties pick the lowest index."""
    if not primers:
        raise ContractError("empty primer list")
    obs = encode_seq(observed)
    best_id, best_dist = 0, None
    for i, p in enumerate(primers):
        if observed == p:
            return i, 0
        d = levenshtein(obs, encode_seq(p))
        if best_dist is None or d < best_dist:
            best_id, best_dist = i, d
    if best_dist > tau:
        raise UnidentifiedPrimerError(
            f"closest primer (id {best_id}) is at distance {best_dist} > tau={tau}"
        )
    return best_id, best_dist


def nearest_registry_primer(observed: str, registry: PrimerRegistry, tau: int = DEFAULT_TAU):
    """Snap against every primer in the registry, in registry order."""
    return nearest_primer(observed, registry.all_primers(), tau)
