"""Random linear network coding of chunk generations over GF(2^8).

Field arithmetic uses log/antilog tables for the reduction polynomial
x^8 + x^4 + x^3 + x + 1 (0x11B) with generator 0x03. Payloads and
coefficient vectors are ``uint8`` numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FIELD_SIZE = 256
POLY = 0x11B
GENERATOR = 0x03


def _slow_mul(a: int, b: int) -> int:
    """Shift-and-add multiply, reduced modulo POLY. Used to build the tables."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= POLY
    return r


def _build_tables() -> tuple[np.ndarray, np.ndarray]:
    exp = np.zeros(512, dtype=np.uint8)
    log = np.zeros(256, dtype=np.int32)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x = _slow_mul(x, GENERATOR)
    exp[255:510] = exp[:255]
    return exp, log


EXP, LOG = _build_tables()
# full 256x256 product table; 64 KiB, makes vectorized multiply a single gather
MUL = np.zeros((256, 256), dtype=np.uint8)
_nz = np.arange(1, 256)
MUL[1:, 1:] = EXP[(LOG[_nz][:, None] + LOG[_nz][None, :]) % 255]
INV = np.zeros(256, dtype=np.uint8)
INV[1:] = EXP[(255 - LOG[_nz]) % 255]


def gf_add(a, b):
    return np.bitwise_xor(a, b)


def gf_mul(a, b):
    return MUL[np.asarray(a, dtype=np.uint8), np.asarray(b, dtype=np.uint8)]


def gf_inv(a):
    a = np.asarray(a, dtype=np.uint8)
    if np.any(a == 0):
        raise ZeroDivisionError("0 has no multiplicative inverse in GF(256)")
    return INV[a]


class DecodeError(Exception):
    pass


class RankDeficient(DecodeError):
    def __init__(self, rank: int, needed: int):
        super().__init__(f"coefficient matrix has rank {rank}, need {needed}")
        self.rank = rank
        self.needed = needed


class GenerationMismatch(DecodeError):
    pass


def _u8(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.size and (arr.min() < 0 or arr.max() >= FIELD_SIZE):
        raise ValueError("field elements must lie in [0, 256)")
    return arr.astype(np.uint8)


@dataclass(frozen=True)
class Generation:
    """One block window: ``r`` uncoded chunks of equal width."""

    index: int
    payloads: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        p = _u8(self.payloads)
        if p.ndim != 2 or p.shape[0] < 1:
            raise ValueError("payloads must be a non-empty 2-D array (r x width)")
        p.setflags(write=False)
        object.__setattr__(self, "payloads", p)

    @property
    def size(self) -> int:
        return self.payloads.shape[0]

    @property
    def width(self) -> int:
        return self.payloads.shape[1]

    @classmethod
    def random(cls, index: int, r: int, width: int, seed=None) -> "Generation":
        rng = np.random.default_rng(seed)
        return cls(index, rng.integers(0, FIELD_SIZE, size=(r, width), dtype=np.uint8))


@dataclass(frozen=True)
class CodedChunk:
    coefficients: np.ndarray
    payload: np.ndarray = field(repr=False)
    generation_index: int

    def __post_init__(self) -> None:
        c, p = _u8(self.coefficients), _u8(self.payload)
        c.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "payload", p)


def combine(coeffs: np.ndarray, payloads: np.ndarray) -> np.ndarray:
    """Sum_p coeffs[p] * payloads[p] over GF(256), element-wise."""
    out = np.zeros(payloads.shape[1], dtype=np.uint8)
    for c, row in zip(coeffs, payloads):
        if c:
            out ^= MUL[c][row]
    return out


def encode(gen: Generation, coeffs) -> CodedChunk:
    coeffs = _u8(coeffs).reshape(-1)
    if coeffs.shape[0] != gen.size:
        raise ValueError(f"expected {gen.size} coefficients, got {coeffs.shape[0]}")
    return CodedChunk(coeffs, combine(coeffs, gen.payloads), gen.index)


def random_coded_chunk(gen: Generation, rng_seed) -> CodedChunk:
    """Coded chunk with coefficients drawn uniformly from GF(256).

    ``rng_seed`` may be anything accepted by ``numpy.random.default_rng``,
    including an existing Generator (which is then advanced).
    """
    rng = np.random.default_rng(rng_seed)
    coeffs = rng.integers(0, FIELD_SIZE, size=gen.size, dtype=np.uint8)
    return encode(gen, coeffs)


def _eliminate(matrix: np.ndarray, rhs: np.ndarray | None) -> int:
    """In-place Gauss-Jordan over GF(256). Returns the rank."""
    rows, cols = matrix.shape
    rank = 0
    for col in range(cols):
        pivots = np.nonzero(matrix[rank:, col])[0]
        if pivots.size == 0:
            continue
        p = rank + pivots[0]
        if p != rank:
            matrix[[rank, p]] = matrix[[p, rank]]
            if rhs is not None:
                rhs[[rank, p]] = rhs[[p, rank]]
        inv = INV[matrix[rank, col]]
        matrix[rank] = MUL[inv][matrix[rank]]
        if rhs is not None:
            rhs[rank] = MUL[inv][rhs[rank]]
        for other in range(rows):
            f = matrix[other, col]
            if other != rank and f:
                matrix[other] ^= MUL[f][matrix[rank]]
                if rhs is not None:
                    rhs[other] ^= MUL[f][rhs[rank]]
        rank += 1
        if rank == rows:
            break
    return rank


def rank(matrix) -> int:
    return _eliminate(_u8(matrix).copy(), None)


def decode(chunks) -> np.ndarray:
    """Recover the r uncoded payloads of a generation from r coded chunks.

    Raises GenerationMismatch if the chunks come from different generations
    or have inconsistent shapes, RankDeficient if their coefficient rows do
    not span the generation.
    """
    chunks = list(chunks)
    if not chunks:
        raise ValueError("need at least one coded chunk")
    gen_ids = {c.generation_index for c in chunks}
    if len(gen_ids) != 1:
        raise GenerationMismatch(f"chunks span generations {sorted(gen_ids)}")
    r = chunks[0].coefficients.shape[0]
    width = chunks[0].payload.shape[0]
    if any(c.coefficients.shape[0] != r or c.payload.shape[0] != width for c in chunks):
        raise GenerationMismatch("chunks disagree on generation size or width")
    a = np.stack([c.coefficients for c in chunks])
    y = np.stack([c.payload for c in chunks])
    got = _eliminate(a, y)
    if got < r:
        raise RankDeficient(got, r)
    return y[:r].copy()


def batch_invertible(mats: np.ndarray) -> np.ndarray:
    """Vectorized invertibility test for a stack of square GF(256) matrices.

    ``mats`` has shape (N, r, r); returns a boolean array of length N.
    """
    a = _u8(mats).copy()
    n, r, _ = a.shape
    ok = np.ones(n, dtype=bool)
    idx = np.arange(n)
    for col in range(r):
        nz = a[:, col:, col] != 0
        has = nz.any(axis=1)
        ok &= has
        p = col + np.argmax(nz, axis=1)
        rows_p = a[idx, p].copy()
        a[idx, p] = a[:, col]
        a[:, col] = rows_p
        inv = INV[a[:, col, col]]
        pivot_row = MUL[inv[:, None], a[:, col]]
        for below in range(col + 1, r):
            f = a[:, below, col]
            a[:, below] ^= MUL[f[:, None], pivot_row]
    return ok


def invertible_fraction_theory(r: int, q: int = FIELD_SIZE) -> float:
    """P(uniform random r x r matrix over GF(q) is invertible)."""
    p = 1.0
    for k in range(1, r + 1):
        p *= 1.0 - q ** (-k)
    return p


def invertible_fraction(r: int, trials: int, seed=None) -> float:
    rng = np.random.default_rng(seed)
    mats = rng.integers(0, FIELD_SIZE, size=(trials, r, r), dtype=np.uint8)
    return float(batch_invertible(mats).mean())


def intuition_demo(width: int = 8, seed: int = 0) -> list[dict]:
    """Two-segment, four-drive comparison of replication against coding.

    Replication stores X1, X1, X2, X2; coding stores X1, X2, X1+X2, X1+2*X2
    (over GF(256) X1-X2 would equal X1+X2, so the fourth drive uses the
    coefficient 2). For each pair of reachable drives, reports whether the
    user can recover both segments.
    """
    gen = Generation.random(0, 2, width, seed)
    layouts = {
        "replication": [(1, 0), (1, 0), (0, 1), (0, 1)],
        "coded": [(1, 0), (0, 1), (1, 1), (1, 2)],
    }
    rows = []
    for name, stored in layouts.items():
        drives = [encode(gen, c) for c in stored]
        for a in range(4):
            for b in range(a + 1, 4):
                try:
                    out = decode([drives[a], drives[b]])
                    ok = bool(np.array_equal(out, gen.payloads))
                except RankDeficient:
                    ok = False
                rows.append({"system": name, "drives": (a + 1, b + 1), "decodable": ok})
    return rows
