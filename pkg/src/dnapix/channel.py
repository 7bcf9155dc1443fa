"""Sequencing simulator: coverage sampling plus per-base noise.

Each oligo draws from its own substream seeded by (seed, ordinal), so the
result is independent of any parallelization across oligos.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ParseError

_NT = np.frombuffer(b"ACGT", dtype=np.uint8)
_NT_CODE = np.full(256, 255, dtype=np.uint8)
for _i, _c in enumerate(b"ACGT"):
    _NT_CODE[_c] = _i


@dataclass(frozen=True)
class ErrorRates:
    sub: float = 0.004
    ins: float = 0.002
    dele: float = 0.006

    def __post_init__(self):
        for name, value in (("sub", self.sub), ("ins", self.ins), ("del", self.dele)):
            if not 0.0 <= value <= 0.2:
                raise ContractError(f"{name} rate {value} outside [0, 0.2]")
        if self.sub + self.ins + self.dele >= 1.0:
            raise ContractError("error rates must sum to < 1")

    @property
    def zero(self) -> bool:
        return self.sub == 0.0 and self.ins == 0.0 and self.dele == 0.0

    def to_dict(self):
        return {"sub": self.sub, "ins": self.ins, "del": self.dele}

    @classmethod
    def from_dict(cls, d):
        return cls(sub=d.get("sub", 0.0), ins=d.get("ins", 0.0), dele=d.get("del", 0.0))


ZERO_RATES = ErrorRates(0.0, 0.0, 0.0)


@dataclass
class ReadSet:
    reads: list[str]
    seed: int
    rates: ErrorRates
    nominal_coverage: float
    mode: str = "poisson"

    @property
    def total_nucleotides(self) -> int:
        return sum(len(r) for r in self.reads)


def _corrupt_codes(codes: np.ndarray, rates: ErrorRates, rng: np.random.Generator) -> np.ndarray:
    """Left-to-right scan: delete, else insert-then-emit, else substitute."""
    n = codes.shape[0]
    u = rng.random(n)
    ins_bases = rng.integers(0, 4, n, dtype=np.uint8)
    sub_shift = rng.integers(1, 4, n, dtype=np.uint8)
    p_del = rates.dele
    p_ins = p_del + rates.ins
    p_sub = p_ins + rates.sub
    keep = u >= p_del
    ins = (u >= p_del) & (u < p_ins)
    sub = (u >= p_ins) & (u < p_sub)
    emitted = np.where(sub, (codes + sub_shift) % 4, codes)
    counts = keep.astype(np.int64) + ins.astype(np.int64)
    total = int(counts.sum())
    out = np.empty(total, dtype=np.uint8)
    ends = np.cumsum(counts)
    out[ends[keep] - 1] = emitted[keep]
    out[ends[ins] - 2] = ins_bases[ins]
    return out


def corrupt(seq: str, rates: ErrorRates, rng: np.random.Generator) -> str:
    if rates.zero:
        return seq
    codes = _NT_CODE[np.frombuffer(seq.encode("ascii"), dtype=np.uint8)]
    return _NT[_corrupt_codes(codes, rates, rng)].tobytes().decode("ascii")


def _oligo_rng(seed: int, ordinal: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, ordinal]))


def sequence(selection, coverage: float, rates: ErrorRates, seed: int,
             mode: str = "poisson") -> ReadSet:
    """Sample noisy reads from a selected multiset of oligos.

    ``selection`` may contain Oligo objects or plain sequences; only the
    nucleotide strings are ever read.
    """
    if coverage < 0:
        raise ContractError("coverage must be >= 0")
    if mode not in ("poisson", "exact"):
        raise ContractError(f"unknown sequencing mode {mode!r}")
    if mode == "exact":
        n_exact = int(coverage)
        if n_exact != coverage:
            raise ContractError("exact mode requires integer coverage")
    reads: list[str] = []
    for ordinal, oligo in enumerate(selection):
        seq_str = getattr(oligo, "sequence", oligo)
        rng = _oligo_rng(seed, ordinal)
        n = int(rng.poisson(coverage)) if mode == "poisson" else n_exact
        if rates.zero:
            reads.extend([seq_str] * n)
        else:
            codes = _NT_CODE[np.frombuffer(seq_str.encode("ascii"), dtype=np.uint8)]
            for _ in range(n):
                reads.append(_NT[_corrupt_codes(codes, rates, rng)].tobytes().decode("ascii"))
    order = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
    perm = order.permutation(len(reads))
    reads = [reads[i] for i in perm]
    return ReadSet(reads, seed, rates, coverage, mode)


def save_readset(rs: ReadSet, fasta_path, meta_path=None) -> None:
    fasta_path = str(fasta_path)
    meta_path = str(meta_path) if meta_path else fasta_path + ".meta.json"
    with open(fasta_path, "w") as fh:
        for i, read in enumerate(rs.reads):
            fh.write(f">read{i}\n{read}\n")
    with open(meta_path, "w") as fh:
        json.dump(
            {
                "seed": rs.seed,
                "rates": rs.rates.to_dict(),
                "nominalCoverage": rs.nominal_coverage,
                "mode": rs.mode,
            },
            fh,
            indent=2,
        )


def load_readset(fasta_path, meta_path=None) -> ReadSet:
    fasta_path = str(fasta_path)
    meta_path = str(meta_path) if meta_path else fasta_path + ".meta.json"
    reads = []
    with open(fasta_path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith(">"):
                continue
            if not set(line) <= set("ACGT"):
                raise ParseError(f"{fasta_path}:{lineno}: non-ACGT read")
            reads.append(line)
    try:
        with open(meta_path) as fh:
            meta = json.load(fh)
        return ReadSet(
            reads,
            seed=meta["seed"],
            rates=ErrorRates.from_dict(meta["rates"]),
            nominal_coverage=meta["nominalCoverage"],
            mode=meta["mode"],
        )
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{meta_path}: malformed sidecar: {exc}") from exc
