"""Masking-string sets: construction, verification, extension, persistence.

A masking string is a weight-w bit string of length c1*k*w with exactly one 1
in each length-(c1*k) segment; we store only the w per-segment offsets.  Two
strings "collide" at a segment when they chose the same offset there, and all
set-quality notions are statistics of pairwise collision counts:

* The per-trial decode conditions (`check_lcs_conditions`): the defectives'
  strings must collide with each other, and every outside string with the
  defective multiset, in at most w/2 positions total.

* The deterministic certificate (`verify_promising`): for every string, the
  collision counts against the other |S|-1 strings must have mean within 4%
  of w/(c1*k), max deviation from that mean at most 6.1, and squared-deviation
  sum at most (|S|-1) * 2w/(c1*k).  The constants are asymptotic: at desk-size
  parameters random candidates essentially never satisfy the max-deviation
  bound, which is why construction also offers an unverified path.

* The very-sparse variant (`build_smallk_set`): every pair collides at most
  w/(2k) times.

All verification arithmetic is exact (scaled integers; the means are rationals
with denominator |S|-1), so the certificate cannot drift with float rounding.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ConstructionFailed,
    CorruptDesignFile,
    IndexOutOfRange,
    InvalidInput,
    ShapeMismatch,
)
from .params import SchemeParams, params_with_weight
from .seeding import derive_seed

STATUS_UNVERIFIED = "unverified"
STATUS_PROMISING = "promising"
STATUS_SMALLK = "smallk_verified"
_STATUSES = (STATUS_UNVERIFIED, STATUS_PROMISING, STATUS_SMALLK)

_SET_FORMAT = "bitmix-masking-set"
_SET_VERSION = 1


@dataclass
class MaskingString:
    """One string in sparse form: offsets[j] is the 1-position in segment j."""

    offsets: np.ndarray
    segment_len: int

    def __post_init__(self):
        self.offsets = np.asarray(self.offsets, dtype=np.int64)
        if self.offsets.ndim != 1 or self.offsets.size < 1:
            raise InvalidInput("offsets must be a non-empty vector")
        if self.offsets.min() < 0 or self.offsets.max() >= self.segment_len:
            raise InvalidInput(f"offsets must lie in [0, {self.segment_len})")

    @property
    def weight(self) -> int:
        return self.offsets.size

    def to_bits(self) -> np.ndarray:
        """Dense 0/1 form, length segment_len * w."""
        bits = np.zeros(self.segment_len * self.weight, dtype=np.uint8)
        bits[np.arange(self.weight) * self.segment_len + self.offsets] = 1
        return bits


def collisions(a: MaskingString, b: MaskingString) -> int:
    """Number of segments where a and b share their 1-position (= dense dot)."""
    if a.segment_len != b.segment_len or a.weight != b.weight:
        raise ShapeMismatch(
            f"strings disagree on (segment_len, w): "
            f"({a.segment_len}, {a.weight}) vs ({b.segment_len}, {b.weight})"
        )
    return int(np.count_nonzero(a.offsets == b.offsets))


@dataclass
class MaskingSet:
    """|S| masking strings plus the params and provenance they were built for."""

    offsets: np.ndarray  # (s_size, w) per-segment offsets
    params: SchemeParams
    seed: int
    status: str = STATUS_UNVERIFIED
    _flat: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.offsets = np.asarray(self.offsets, dtype=np.int32)
        if self.status not in _STATUSES:
            raise InvalidInput(f"unknown status {self.status!r}")
        expect = (self.params.s_size, self.params.w)
        if self.offsets.shape != expect:
            raise ShapeMismatch(f"offsets shape {self.offsets.shape} != {expect}")
        if self.offsets.size and (
            self.offsets.min() < 0 or self.offsets.max() >= self.params.segment_len
        ):
            raise InvalidInput("offsets outside [0, c1*k)")

    def __len__(self) -> int:
        return self.offsets.shape[0]

    def string(self, i: int) -> MaskingString:
        if not 0 <= i < len(self):
            raise IndexOutOfRange(f"string index {i} outside [0, {len(self)})")
        return MaskingString(self.offsets[i].astype(np.int64), self.params.segment_len)

    @property
    def flat_positions(self) -> np.ndarray:
        """(s_size, w) global bit positions of each string's 1s (cached)."""
        if self._flat is None:
            seg = np.arange(self.params.w, dtype=np.int64) * self.params.segment_len
            self._flat = self.offsets.astype(np.int64) + seg[None, :]
        return self._flat


def construct_candidate(params: SchemeParams, seed: int) -> MaskingSet:
    """Draw |S| strings with i.i.d. uniform segment offsets (unverified)."""
    rng = np.random.default_rng(seed)
    offsets = rng.integers(
        0, params.segment_len, size=(params.s_size, params.w), dtype=np.int32
    )
    return MaskingSet(offsets, params, seed, STATUS_UNVERIFIED)


def pairwise_collisions(offsets: np.ndarray) -> np.ndarray:
    """Symmetric |S| x |S| matrix of pair collision counts (diagonal = w)."""
    s = offsets.shape[0]
    out = np.empty((s, s), dtype=np.int64)
    # Block the comparison so the (rows x s x w) boolean tensor stays modest.
    block = max(1, (1 << 24) // max(1, offsets.shape[0] * offsets.shape[1]))
    for lo in range(0, s, block):
        hi = min(s, lo + block)
        eq = offsets[lo:hi, None, :] == offsets[None, :, :]
        out[lo:hi] = eq.sum(axis=2, dtype=np.int64)
    return out


@dataclass
class CollisionStats:
    """Exact per-string collision statistics against the rest of the set.

    Means are sums/n_others; max deviations are max_dev_num/n_others; squared
    deviation sums are sq_dev_num/n_others**2 (kept as Python ints: they can
    exceed int64 once sets are concatenated a few times).
    """

    sums: np.ndarray
    max_dev_num: np.ndarray
    sq_dev_num: list
    n_others: int

    @property
    def means(self) -> np.ndarray:
        return self.sums / self.n_others

    @property
    def max_devs(self) -> np.ndarray:
        return self.max_dev_num / self.n_others

    @property
    def sq_dev_sums(self) -> np.ndarray:
        return np.array([s / self.n_others**2 for s in self.sq_dev_num])


@dataclass
class VerifyReport:
    passed: bool
    stats: CollisionStats | None
    first_violation: tuple | None  # (string index, condition, detail)
    generalized: bool
    degenerate: bool = False


def verify_promising(mset: MaskingSet) -> VerifyReport:
    """Check the three deterministic collision conditions for every string.

    Condition names in the report: "mean" (mean within 4% of w/(c1*k)),
    "max_dev" (every deviation from the string's own mean at most 6.1),
    "sq_dev" (squared-deviation sum at most (|S|-1) * 2w/(c1*k)).  All three
    are evaluated in exact integer arithmetic.  On pass, the set's status is
    upgraded to "promising".  Sets built with c1 != 4 use the generalized
    targets and are flagged as such.  O(|S|^2 w) time.
    """
    params = mset.params
    s_size, w = params.s_size, params.w
    c1k = params.segment_len
    generalized = params.c1 != 4

    if s_size < 2:
        mset.status = STATUS_PROMISING
        return VerifyReport(True, None, None, generalized, degenerate=True)

    c = pairwise_collisions(mset.offsets)
    n_others = s_size - 1
    sums = c.sum(axis=1) - np.int64(w)  # remove the diagonal self-term

    # Deviations as exact numerators over denominator n_others.
    dev = n_others * c - sums[:, None]
    np.fill_diagonal(dev, 0)
    abs_dev = np.abs(dev)
    max_dev_num = abs_dev.max(axis=1)
    # Row sums of dev^2 fit int64 comfortably at any size we construct
    # directly, but the rhs bound 2*w*N^3 may not: compare with Python ints.
    sq_dev_num = [int(v) for v in np.einsum("ij,ij->i", dev, dev)]

    mean_ok = 25 * np.abs(c1k * sums - w * np.int64(n_others)) <= w * np.int64(n_others)
    max_ok = 10 * max_dev_num <= 61 * np.int64(n_others)
    sq_bound = 2 * w * n_others**3  # Python int
    sq_ok = [c1k * v <= sq_bound for v in sq_dev_num]

    stats = CollisionStats(sums, max_dev_num, sq_dev_num, n_others)

    first = None
    for i in range(s_size):
        if not mean_ok[i]:
            first = (i, "mean", f"mean {sums[i] / n_others:.4f} vs target {w / c1k:.4f} +- 4%")
            break
        if not max_ok[i]:
            first = (i, "max_dev", f"max deviation {max_dev_num[i] / n_others:.3f} > 6.1")
            break
        if not sq_ok[i]:
            first = (
                i,
                "sq_dev",
                f"squared-deviation sum {sq_dev_num[i] / n_others**2:.2f} "
                f"> {2 * w * n_others / c1k:.2f}",
            )
            break

    passed = first is None
    if passed:
        mset.status = STATUS_PROMISING
    return VerifyReport(passed, stats, first, generalized)


def build_lcs(params: SchemeParams, seed: int, max_attempts: int = 16) -> MaskingSet:
    """Draw candidates until one passes verify_promising.

    Raises ConstructionFailed when the budget runs out — which, at desk-scale
    parameters, is the expected outcome: the certificate's constants only
    become satisfiable at very large k.  Callers that just need a design (not
    a certificate) should use construct_candidate directly.
    """
    last = None
    for attempt in range(max_attempts):
        cand = construct_candidate(params, derive_seed(seed, attempt))
        report = verify_promising(cand)
        if report.passed:
            return cand
        last = report.first_violation
    raise ConstructionFailed(
        f"no candidate passed the collision certificate in {max_attempts} attempts "
        f"(last violation: {last}); at these parameters the certificate constants "
        "are typically unattainable — construct_candidate offers the uncertified path"
    )


def extend_lcs(mset: MaskingSet, c: int) -> MaskingSet:
    """Concatenate each string with itself c times (collision counts scale by c)."""
    if not isinstance(c, int) or c < 1:
        raise InvalidInput(f"extension factor must be a positive integer, got {c}")
    if c == 1:
        return replace(mset, _flat=None)
    new_params = params_with_weight(mset.params, c * mset.params.w)
    return MaskingSet(np.tile(mset.offsets, (1, c)), new_params, mset.seed, mset.status)


def smallk_pairs_ok(mset: MaskingSet) -> bool:
    """True when every pair collides in at most w/(2k) segments."""
    c = pairwise_collisions(mset.offsets)
    np.fill_diagonal(c, 0)
    return bool((2 * mset.params.k * c <= mset.params.w).all())


def build_smallk_set(params: SchemeParams, seed: int, max_attempts: int = 1000) -> MaskingSet:
    """Rejection-sample a set whose every pair collides <= w/(2k) times.

    Acceptance per attempt is a few percent at typical very-sparse parameters,
    hence the generous default budget; each attempt costs only O(|S|^2 w).
    """
    for attempt in range(max_attempts):
        cand = construct_candidate(params, derive_seed(seed, attempt))
        if smallk_pairs_ok(cand):
            cand.status = STATUS_SMALLK
            return cand
    raise ConstructionFailed(
        f"no candidate met the pairwise collision bound w/(2k) in {max_attempts} attempts"
    )


def _collisions_vs_chosen(mset: MaskingSet, chosen: np.ndarray) -> np.ndarray:
    """(s_size, k') matrix: collisions of every set string with each chosen one."""
    chosen_off = mset.offsets[chosen]
    eq = mset.offsets[:, None, :] == chosen_off[None, :, :]
    return eq.sum(axis=2, dtype=np.int64)


def _validate_chosen(mset: MaskingSet, chosen) -> np.ndarray:
    chosen = np.asarray(chosen, dtype=np.int64)
    if chosen.ndim != 1:
        raise InvalidInput("chosen must be a flat sequence of string indices")
    if chosen.size and (chosen.min() < 0 or chosen.max() >= len(mset)):
        raise IndexOutOfRange(f"chosen indices outside [0, {len(mset)})")
    return chosen


def check_lcs_conditions(mset: MaskingSet, chosen, i: int) -> dict:
    """Per-trial decode-safety conditions for a realized selection.

    chosen is the multiset of selected string indices (repeats allowed), i a
    position within it.  Returns {"cond1": ..., "cond2": ...} where cond1
    says every string outside the multiset collides with it at most w/2 in
    total, and cond2 says chosen[i] collides with the other chosen strings at
    most w/2 in total.  O(|S| * k' * w).
    """
    chosen = _validate_chosen(mset, chosen)
    if not 0 <= i < chosen.size:
        raise IndexOutOfRange(f"position {i} outside the chosen multiset")
    w = mset.params.w
    per = _collisions_vs_chosen(mset, chosen)
    totals = per.sum(axis=1)
    outside = np.ones(len(mset), dtype=bool)
    outside[chosen] = False
    cond1 = bool((2 * totals[outside] <= w).all())
    cond2 = bool(2 * (totals[chosen[i]] - per[chosen[i], i]) <= w)
    return {"cond1": cond1, "cond2": cond2}


def check_lcs_conditions_all(mset: MaskingSet, chosen) -> dict:
    """cond1 plus the conjunction of cond2 over every position of chosen."""
    chosen = _validate_chosen(mset, chosen)
    w = mset.params.w
    if chosen.size == 0:
        return {"cond1": True, "cond2_all": True}
    per = _collisions_vs_chosen(mset, chosen)
    totals = per.sum(axis=1)
    outside = np.ones(len(mset), dtype=bool)
    outside[chosen] = False
    cond1 = bool((2 * totals[outside] <= w).all())
    own = totals[chosen] - per[chosen, np.arange(chosen.size)]
    cond2_all = bool((2 * own <= w).all())
    return {"cond1": cond1, "cond2_all": cond2_all}


# ---------------------------------------------------------------------------
# Persistence.


def _offsets_dtype(segment_len: int) -> str:
    return "<u2" if segment_len <= 0xFFFF else "<u4"


def _canonical_payload(mset: MaskingSet) -> dict:
    dtype = _offsets_dtype(mset.params.segment_len)
    return {
        "format": _SET_FORMAT,
        "version": _SET_VERSION,
        "regime": mset.params.regime,
        "params": mset.params.to_json(),
        "seed": int(mset.seed),
        "status": mset.status,
        "offsets_dtype": dtype,
        "offsets": base64.b64encode(
            np.ascontiguousarray(mset.offsets, dtype=dtype).tobytes()
        ).decode("ascii"),
    }


def _payload_hash(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("ascii")).hexdigest()


def save_masking_set(mset: MaskingSet, path: str | os.PathLike) -> None:
    payload = _canonical_payload(mset)
    payload["sha256"] = _payload_hash({k: v for k, v in payload.items() if k != "sha256"})
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_masking_set(path: str | os.PathLike) -> MaskingSet:
    try:
        with open(path, encoding="ascii") as fh:
            payload = json.load(fh)
    except (OSError, ValueError) as exc:
        raise CorruptDesignFile(f"cannot read masking set from {path}: {exc}") from exc
    return masking_set_from_payload(payload, path)


def masking_set_from_payload(payload: dict, origin="<memory>", require_hash=True) -> MaskingSet:
    if not isinstance(payload, dict) or payload.get("format") != _SET_FORMAT:
        raise CorruptDesignFile(f"{origin}: not a masking-set file")
    if payload.get("version") != _SET_VERSION:
        raise CorruptDesignFile(f"{origin}: unsupported version {payload.get('version')!r}")
    if require_hash or "sha256" in payload:
        recorded = payload.get("sha256")
        body = {k: v for k, v in payload.items() if k != "sha256"}
        if recorded != _payload_hash(body):
            raise CorruptDesignFile(f"{origin}: content hash mismatch")
    try:
        params = SchemeParams.from_json(payload["params"], regime=payload["regime"])
        raw = base64.b64decode(payload["offsets"].encode("ascii"), validate=True)
        dtype = payload.get("offsets_dtype", "<u2")
        if dtype not in ("<u2", "<u4"):
            raise CorruptDesignFile(f"{origin}: unsupported offsets dtype {dtype!r}")
        offsets = np.frombuffer(raw, dtype=dtype).astype(np.int32)
        offsets = offsets.reshape(params.s_size, params.w)
        mset = MaskingSet(offsets, params, int(payload["seed"]), payload["status"])
    except CorruptDesignFile:
        raise
    except Exception as exc:
        raise CorruptDesignFile(f"{origin}: inconsistent content ({exc})") from exc
    return mset
