"""Deterministic signature construction from device identities.

Signatures are built the way objects are inserted into a Bloom filter: the
integer identity drives the selection of K distinct RAOs and of one preamble
per selected RAO.  Chosen RAOs and preambles are removed from their candidate
lists between iterations, so every generated signature has exactly K active
RAOs and K pairwise-distinct preamble columns (which caps K at min(M, L)).

Two hashing modes exist:

* ``raw``   -- the modulus of the identity itself indexes the remaining
  candidate lists.  Canonical, but consecutive identities map to strongly
  correlated signatures.
* ``mix64`` -- the identity is first passed through the splitmix64 finalizer
  (a fixed, published 64-bit mixer), then used as in ``raw``.  Default.

Both modes are deterministic; the mode is recorded in the codebook so that
exported codebooks stay bit-compatible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .ormac import Signature

MIXER_MODES = ("raw", "mix64")
_MASK64 = (1 << 64) - 1


def mix64(u: int) -> int:
    """splitmix64 finalizer: a fixed 64-bit integer mixer."""
    z = u & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class DeviceIdentity:
    """Integer identification (IMSI and establishment cause packed into one int)."""

    u: int
    label: str = ""

    def __post_init__(self) -> None:
        if self.u < 0:
            raise ValueError("identity must be a non-negative integer")


def _check_params(L: int, M: int, K: int) -> None:
    if L < 1 or M < 1:
        raise ValueError(f"need L >= 1 and M >= 1, got L={L}, M={M}")
    # with a single preamble there is no preamble choice to exhaust, so only
    # the RAO list bounds K; for M > 1 preamble removal caps K at min(M, L)
    cap = L if M == 1 else min(M, L)
    if not 0 <= K <= cap:
        raise ValueError(f"need 0 <= K <= {cap} for (L={L}, M={M}), got K={K}")


def generate_signature(
    u: int, L: int, M: int, K: int, mixer: str = "mix64"
) -> Signature:
    """Deterministically map identity ``u`` to a weight-K signature.

    Iteration j (1-based) picks position mod(u, L+1-j) in the remaining
    ordered RAO list and position mod(u, M+1-j) in the remaining ordered
    preamble list; both lists shrink as entries are consumed.
    """
    _check_params(L, M, K)
    if mixer not in MIXER_MODES:
        raise ValueError(f"unknown mixer mode {mixer!r}; expected one of {MIXER_MODES}")
    h = mix64(u) if mixer == "mix64" else int(u)
    raos = list(range(L))
    preambles = list(range(M))
    rows = np.full(L, -1, dtype=np.int16)
    for j in range(K):
        i = raos.pop(h % (L - j))
        rows[i] = preambles.pop(h % (M - j)) if M > 1 else 0
    return Signature.from_rows(rows, M)


def random_signature(L: int, M: int, rng: np.random.Generator) -> Signature:
    """Draw a full-weight (K = L) signature: one uniform preamble per RAO."""
    _check_params(L, M, min(M, L))
    rows = rng.integers(0, M, size=L).astype(np.int16)
    return Signature.from_rows(rows, M)


def signature_space_size(L: int, M: int, K: int) -> int:
    """Exact number of distinct weight-K signatures: C(L, K) * M**K."""
    _check_params(L, M, K)
    return math.comb(L, K) * M**K


def shared_signature_prob(T: int, L: int, M: int, K: int) -> float:
    """Probability that two or more of T devices share one signature.

    Each device is modelled as drawing uniformly among the C(L,K)*M^K
    signatures; the result is the binomial tail P(X >= 2) for any fixed
    signature value, evaluated exactly in rational arithmetic because the
    interesting regimes are far below double-precision resolution.
    """
    if T < 2:
        raise ValueError("need T >= 2")
    p = Fraction(1, signature_space_size(L, M, K))
    q = 1 - p
    tail = 1 - q**T - T * p * q ** (T - 1)
    return float(tail)


def distinct_rao_collision_prob(L: int, K: int) -> float:
    """Probability that K independent uniform RAO draws are not all distinct.

    This is the failure mode of naive Bloom-style hashing that the
    removal-based construction avoids: 1 - K! * C(L, K) / L**K.
    """
    if not 0 <= K <= L:
        raise ValueError(f"need 0 <= K <= L, got K={K}, L={L}")
    if K <= 1:
        return 0.0
    good = Fraction(math.factorial(K) * math.comb(L, K), L**K)
    return float(1 - good)


@dataclass
class Codebook:
    """All T device signatures for one (L, M, K, mixer) parameter set."""

    L: int
    M: int
    K: int
    mixer: str
    identities: List[DeviceIdentity]
    signatures: List[Signature]
    duplicate_count: int = 0
    _rows: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.identities)

    def signature_for(self, u: int) -> Signature:
        return self.signatures[self.index_of(u)]

    def index_of(self, u: int) -> int:
        try:
            return self._index[u]
        except AttributeError:
            object.__setattr__(
                self, "_index", {ident.u: i for i, ident in enumerate(self.identities)}
            )
            return self._index[u]

    def packed_rows(self) -> np.ndarray:
        """(T, L) int16 array of per-RAO preamble indices, -1 for idle RAOs."""
        if self._rows is None:
            rows = np.full((len(self.signatures), self.L), -1, dtype=np.int16)
            for i, sig in enumerate(self.signatures):
                rows[i] = sig.row_preambles()
            self._rows = rows
        return self._rows


def build_codebook(
    identities: Sequence[DeviceIdentity] | Sequence[int],
    L: int,
    M: int,
    K: int,
    mixer: str = "mix64",
) -> Codebook:
    """Generate one signature per identity; duplicates are counted, not rejected."""
    idents = [
        ident if isinstance(ident, DeviceIdentity) else DeviceIdentity(int(ident))
        for ident in identities
    ]
    if len({ident.u for ident in idents}) != len(idents):
        raise ValueError("duplicate identities in codebook population")
    sigs = [generate_signature(ident.u, L, M, K, mixer=mixer) for ident in idents]
    seen: Dict[bytes, int] = {}
    duplicates = 0
    for sig in sigs:
        key = sig.grid.tobytes()
        if key in seen:
            duplicates += 1
        seen[key] = seen.get(key, 0) + 1
    return Codebook(L, M, K, mixer, idents, sigs, duplicate_count=duplicates)


def save_codebook(codebook: Codebook, path) -> None:
    """Write the line-oriented text export: header then `u <hex bitmap>` rows."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{codebook.L} {codebook.M} {codebook.K} {codebook.mixer}\n")
        for ident, sig in zip(codebook.identities, codebook.signatures):
            packed = np.packbits(sig.grid.reshape(-1))
            fh.write(f"{ident.u} {packed.tobytes().hex()}\n")


def load_codebook(path) -> Codebook:
    """Inverse of :func:`save_codebook`; round-trips bit-exactly."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 4:
            raise ValueError(f"malformed codebook header: {header!r}")
        L, M, K = (int(x) for x in header[:3])
        mixer = header[3]
        if mixer not in MIXER_MODES:
            raise ValueError(f"unknown mixer mode in codebook header: {mixer!r}")
        idents: List[DeviceIdentity] = []
        sigs: List[Signature] = []
        nbits = L * M
        for line in fh:
            if not line.strip():
                continue
            u_text, hex_text = line.split()
            bits = np.unpackbits(
                np.frombuffer(bytes.fromhex(hex_text), dtype=np.uint8)
            )[:nbits]
            idents.append(DeviceIdentity(int(u_text)))
            sigs.append(Signature(bits.reshape(L, M)))
    seen: Dict[bytes, int] = {}
    duplicates = 0
    for sig in sigs:
        key = sig.grid.tobytes()
        if key in seen:
            duplicates += 1
        seen[key] = seen.get(key, 0) + 1
    return Codebook(L, M, K, mixer, idents, sigs, duplicate_count=duplicates)
