"""A design bundle pins everything the test design depends on.

Masking set + codebook shape + assignment seed fully determine both batches
for every item, so a persisted bundle can be rebuilt bit-identically later or
on another machine.  Files are JSON with a sha256 over the canonical payload;
any edit (or a params/offsets mismatch) surfaces as CorruptDesignFile.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

from .code import Codebook
from .errors import CorruptDesignFile
from .masking import (
    MaskingSet,
    build_lcs,
    build_smallk_set,
    construct_candidate,
    masking_set_from_payload,
    _canonical_payload,
)
from .params import REGIME_GENERAL, REGIME_SMALLK, SchemeParams, derive_params
from .scheme import Assignment
from .seeding import derive_seed

_BUNDLE_FORMAT = "bitmix-design"
_BUNDLE_VERSION = 1


@dataclass
class DesignBundle:
    masking: MaskingSet
    assignment_seed: int

    def __post_init__(self):
        p = self.params
        self._codebook = Codebook(p.n, p.w, p.ell)

    @property
    def params(self) -> SchemeParams:
        return self.masking.params

    @property
    def codebook(self) -> Codebook:
        return self._codebook

    @property
    def assignment(self) -> Assignment:
        return Assignment(self.assignment_seed, self.params.s_size)


def build_design(
    n: int,
    k: int,
    xi: float = 0.0,
    regime: str | None = None,
    seed: int = 0,
    verify: bool = True,
    max_attempts: int | None = None,
) -> DesignBundle:
    """Derive params and construct a design for one (n, k, xi) cell.

    verify=True runs the regime's certificate (collision conditions for
    general, the pairwise bound for smallk) and may raise ConstructionFailed;
    verify=False returns the plain random construction with status
    "unverified".  The masking and assignment seeds are both derived from the
    single input seed.
    """
    regime = REGIME_GENERAL if regime is None else regime
    params = derive_params(n, k, xi=xi, regime=regime)
    mask_seed = derive_seed(seed, 0xDE51)
    assign_seed = derive_seed(seed, 0xA551)
    if not verify:
        mset = construct_candidate(params, mask_seed)
    elif regime == REGIME_SMALLK:
        kwargs = {} if max_attempts is None else {"max_attempts": max_attempts}
        mset = build_smallk_set(params, mask_seed, **kwargs)
    else:
        kwargs = {} if max_attempts is None else {"max_attempts": max_attempts}
        mset = build_lcs(params, mask_seed, **kwargs)
    return DesignBundle(mset, assign_seed)


def save_design(bundle: DesignBundle, path: str | os.PathLike) -> None:
    payload = {
        "format": _BUNDLE_FORMAT,
        "version": _BUNDLE_VERSION,
        "assignment_seed": int(bundle.assignment_seed),
        "codebook": {
            "w": bundle.codebook.w,
            "ell": bundle.codebook.ell,
            "m": bundle.codebook.m,
        },
        "masking": _canonical_payload(bundle.masking),
    }
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    payload["sha256"] = hashlib.sha256(canon.encode("ascii")).hexdigest()
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_design(path: str | os.PathLike) -> DesignBundle:
    try:
        with open(path, encoding="ascii") as fh:
            payload = json.load(fh)
    except (OSError, ValueError) as exc:
        raise CorruptDesignFile(f"cannot read design from {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != _BUNDLE_FORMAT:
        raise CorruptDesignFile(f"{path}: not a design file")
    if payload.get("version") != _BUNDLE_VERSION:
        raise CorruptDesignFile(f"{path}: unsupported version {payload.get('version')!r}")
    recorded = payload.pop("sha256", None)
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    if recorded != hashlib.sha256(canon.encode("ascii")).hexdigest():
        raise CorruptDesignFile(f"{path}: content hash mismatch")
    mset = masking_set_from_payload(payload["masking"], origin=path, require_hash=False)
    cb = payload.get("codebook", {})
    if (cb.get("w"), cb.get("ell")) != (mset.params.w, mset.params.ell):
        raise CorruptDesignFile(f"{path}: codebook shape disagrees with params")
    bundle = DesignBundle(mset, int(payload["assignment_seed"]))
    if cb.get("m") != bundle.codebook.m:
        raise CorruptDesignFile(f"{path}: codebook message length disagrees with n")
    return bundle
