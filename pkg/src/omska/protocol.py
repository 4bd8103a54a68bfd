"""One-message key-agreement sessions over a sampled source.

The sender observes x, publishes two hash seeds and a short check value, and
both sides extract keys from their reconstructed source block.  The receiver
builds the list of source blocks whose conditional surprisal given y stays
under the plan's threshold, keeps the candidates whose check hash matches,
and aborts unless exactly one survives.

Candidate enumeration is deterministic: the binary-cascade fast path walks
flip patterns by increasing Hamming weight (lexicographic within a weight),
the general path does depth-first search with positions in natural order and
per-position symbols sorted by ascending cost.  Both paths enumerate the same
set; tests pin that down.  Searches are capped by a node/candidate budget
(default 1e8, overridable via the OMSKA_BUDGET environment variable) and
raise BudgetExceededError instead of thrashing.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, asdict

import numpy as np

from .planner import Plan
from .source import JointSource, detect_bsc_chain, sample
from .uhash import (BitString, GFContext, SeedHasher, decode_symbols, encode_symbols,
                    field_for_source, fresh_seed, hash as uhf_hash, symbol_width)

DEFAULT_SEARCH_BUDGET = 10 ** 8

# floor() guard: threshold arithmetic may land a hair under an exact radius
_RADIUS_TOL = 1e-9


class BudgetExceededError(RuntimeError):
    """Raised when list enumeration would exceed the configured node budget."""


def search_budget() -> int:
    raw = os.environ.get("OMSKA_BUDGET")
    if raw is None:
        return DEFAULT_SEARCH_BUDGET
    try:
        budget = int(float(raw))
    except ValueError as exc:
        raise ValueError(f"OMSKA_BUDGET must be numeric, got {raw!r}") from exc
    if budget < 1:
        raise ValueError(f"OMSKA_BUDGET must be positive, got {budget}")
    return budget


@dataclass(frozen=True)
class Transcript:
    """Everything the eavesdropper sees: both seeds, the check value, the plan."""

    recon_seed: BitString
    key_seed: BitString
    check_value: BitString
    plan: Plan

    def to_json_dict(self) -> dict:
        def bs(b: BitString) -> dict:
            return {"hex": b.to_hex(), "bits": b.length}
        return {
            "recon_seed": bs(self.recon_seed),
            "key_seed": bs(self.key_seed),
            "check_value": bs(self.check_value),
            "plan": asdict(self.plan),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json_dict(cls, data: dict) -> "Transcript":
        def bs(d: dict) -> BitString:
            return BitString.from_hex(d["hex"], d["bits"])
        return cls(
            recon_seed=bs(data["recon_seed"]),
            key_seed=bs(data["key_seed"]),
            check_value=bs(data["check_value"]),
            plan=Plan(**data["plan"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "Transcript":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class SessionResult:
    """Outcome of one run: 'agreed', 'mismatched', or 'aborted'.

    'agreed' means the receiver decoded a unique candidate and both extracted
    keys coincide; 'mismatched' means a unique candidate survived but the keys
    differ (an undetected hash collision); 'aborted' means zero or several
    candidates matched the check value.
    """

    outcome: str
    key_alice: BitString
    key_bob: BitString | None
    decoded: np.ndarray | None
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    transcript: Transcript


def alice_send(x: np.ndarray, recon_seed: BitString, plan: Plan, ctx: GFContext,
               alphabet_size: int) -> BitString:
    """Sender's check value: the reconciliation hash of the encoded block."""
    encoded = encode_symbols(x, alphabet_size)
    if encoded.length != ctx.bits:
        raise ValueError(f"block encodes to {encoded.length} bits, field has {ctx.bits}")
    return uhf_hash(encoded, recon_seed, plan.recon_bits, ctx)


def _bsc_radius(plan: Plan, n: int, p: float) -> int:
    """Largest flip weight whose surprisal stays within the plan threshold."""
    lam = plan.list_log_threshold
    if p == 0.0:
        # flips have probability zero; only the exact copy can qualify
        return 0 if lam + _RADIUS_TOL >= 0.0 else -1
    base = n * -math.log2(1.0 - p)
    if p == 0.5:
        # all blocks equally likely at n bits of surprisal
        return n if lam + _RADIUS_TOL >= n else -1
    if lam + _RADIUS_TOL < base:
        return -1
    step = math.log2((1.0 - p) / p)
    return min(n, math.floor((lam - base) / step + _RADIUS_TOL))


def _iter_flip_patterns(n: int, radius: int):
    """Flip-position tuples by increasing weight, lexicographic within weight."""
    for w in range(radius + 1):
        yield from itertools.combinations(range(n), w)


def guess_set(y: np.ndarray, plan: Plan, src: JointSource) -> np.ndarray:
    """All source blocks whose surprisal given y is at most the plan threshold.

    Returns an array of shape (count, n) in the deterministic enumeration
    order described in the module docstring.  Raises BudgetExceededError when
    the enumeration would exceed the search budget.
    """
    y = np.asarray(y, dtype=np.int64)
    n = y.shape[0]
    budget = search_budget()
    params = detect_bsc_chain(src)
    if params is not None:
        radius = _bsc_radius(plan, n, params.p)
        if radius < 0:
            return np.empty((0, n), dtype=np.int64)
        count = sum(math.comb(n, w) for w in range(radius + 1))
        if count > budget:
            raise BudgetExceededError(
                f"guess list holds {count} blocks, budget is {budget}")
        out = np.tile(y, (count, 1))
        row = 0
        for positions in _iter_flip_patterns(n, radius):
            for j in positions:
                out[row, j] ^= 1
            row += 1
        return out
    return _guess_set_general(y, plan, src, budget)


def _guess_set_general(y: np.ndarray, plan: Plan, src: JointSource,
                       budget: int) -> np.ndarray:
    n = y.shape[0]
    size_x = src.alphabet_sizes[0]
    p_xy = src.p_xy()
    p_y = p_xy.sum(axis=0)
    lam = plan.list_log_threshold + _RADIUS_TOL
    # per-position candidate columns sorted by ascending cost, ties by symbol
    columns = []
    for i in range(n):
        yv = int(y[i])
        if p_y[yv] <= 0.0:
            raise ValueError(f"observed symbol {yv} at position {i} has probability zero")
        cond = p_xy[:, yv] / p_y[yv]
        entries = [(-math.log2(cond[a]), a) for a in range(size_x) if cond[a] > 0.0]
        entries.sort()
        columns.append(entries)
    suffix_min = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_min[i] = suffix_min[i + 1] + columns[i][0][0]

    # iterative depth-first search (recursion would cap n at the stack limit);
    # each frame is [position, accumulated cost, next column index]
    found: list[list[int]] = []
    prefix = [0] * n
    nodes = 0
    frames: list[list] = []
    if suffix_min[0] <= lam:
        frames.append([0, 0.0, 0])
    while frames:
        frame = frames[-1]
        i, acc, idx = frame
        if i == n:
            found.append(prefix.copy())
            frames.pop()
            continue
        if idx >= len(columns[i]):
            frames.pop()
            continue
        cost, symbol = columns[i][idx]
        frame[2] = idx + 1
        total = acc + cost
        if total + suffix_min[i + 1] > lam:
            frames.pop()  # column sorted ascending, later symbols only cost more
            continue
        nodes += 1
        if nodes > budget or len(found) > budget:
            raise BudgetExceededError(
                f"list search exceeded budget {budget} at depth {i}")
        prefix[i] = symbol
        frames.append([i + 1, total, 0])
    if not found:
        return np.empty((0, n), dtype=np.int64)
    return np.array(found, dtype=np.int64)


def _decode_scan(y: np.ndarray, check_value: BitString, recon_seed: BitString,
                 plan: Plan, ctx: GFContext, src: JointSource):
    size_x = src.alphabet_sizes[0]
    candidates = guess_set(y, plan, src)
    match = None
    for row in candidates:
        v = uhf_hash(encode_symbols(row, size_x), recon_seed, plan.recon_bits, ctx)
        if v == check_value:
            if match is not None:
                return "abort", None  # ambiguous, stop at the second hit
            match = row
    if match is None:
        return "abort", None
    return "ok", np.array(match, dtype=np.int64)


def _decode_ball(y: np.ndarray, check_value: BitString, recon_seed: BitString,
                 plan: Plan, ctx: GFContext, src: JointSource):
    """Vectorized binary path: hash(y xor e) = hash(y) xor basis products of e."""
    params = detect_bsc_chain(src)
    if params is None:
        raise ValueError("ball decoding requires a binary cascade source")
    if ctx.bits > 64:
        raise ValueError("ball decoding supports fields up to 64 bits")
    y = np.asarray(y, dtype=np.int64)
    n = y.shape[0]
    radius = _bsc_radius(plan, n, params.p)
    if radius < 0:
        return "abort", None
    budget = search_budget()
    count = sum(math.comb(n, w) for w in range(radius + 1))
    if count > budget:
        raise BudgetExceededError(
            f"guess list holds {count} blocks, budget is {budget}")

    hasher = SeedHasher(recon_seed, ctx)
    basis = hasher.table_u64()
    base = np.uint64(hasher.product(encode_symbols(y, 2).value))
    shift = np.uint64(ctx.bits - plan.recon_bits)
    target = np.uint64(check_value.value)

    match = None
    for w in range(radius + 1):
        if w == 0:
            prods = np.array([base], dtype=np.uint64)
            combos = np.empty((1, 0), dtype=np.int64)
        else:
            combos = np.array(list(itertools.combinations(range(n), w)), dtype=np.int64)
            # symbol j occupies bit n-1-j of the big-endian encoding
            gathered = basis[(n - 1) - combos]
            acc = gathered[:, 0].copy()
            for k in range(1, w):
                acc ^= gathered[:, k]
            prods = acc ^ base
        hits = np.nonzero((prods >> shift) == target)[0] if plan.recon_bits > 0 \
            else np.arange(prods.shape[0])
        for idx in hits:
            if match is not None:
                return "abort", None
            cand = y.copy()
            for j in combos[idx]:
                cand[j] ^= 1
            match = cand
    if match is None:
        return "abort", None
    return "ok", match


def bob_decode(y: np.ndarray, check_value: BitString, recon_seed: BitString,
               plan: Plan, ctx: GFContext, src: JointSource, method: str = "auto"):
    """Receiver's list decode: ('ok', block) on a unique hash match, else
    ('abort', None) for zero or multiple matches.

    method 'ball' is the vectorized binary fast path, 'scan' the generic
    candidate sweep, 'auto' picks 'ball' when the source is a binary cascade
    and the field fits in 64 bits.
    """
    if check_value.length != plan.recon_bits:
        raise ValueError(
            f"check value has {check_value.length} bits, plan says {plan.recon_bits}")
    if method == "auto":
        method = "ball" if detect_bsc_chain(src) is not None and ctx.bits <= 64 \
            else "scan"
    if method == "ball":
        return _decode_ball(y, check_value, recon_seed, plan, ctx, src)
    if method == "scan":
        return _decode_scan(y, check_value, recon_seed, plan, ctx, src)
    raise ValueError(f"unknown decode method {method!r}")


def bob_extract(block: np.ndarray, key_seed: BitString, plan: Plan, ctx: GFContext,
                alphabet_size: int) -> BitString:
    """Key hash of a reconstructed block; empty key when the plan allots 0 bits."""
    encoded = encode_symbols(block, alphabet_size)
    return uhf_hash(encoded, key_seed, plan.key_bits, ctx)


def run_session(src: JointSource, plan: Plan, rng_seed, method: str = "auto") -> SessionResult:
    """Sample one block triple, run the full exchange, and report the outcome.

    rng_seed feeds a SeedSequence split three ways (source sample, hash seed,
    key seed), so runs are reproducible and seeds are independent.
    """
    size_x = src.alphabet_sizes[0]
    ctx = field_for_source(plan.n, size_x)
    if plan.recon_bits > ctx.bits:
        raise ValueError(
            f"plan wants a {plan.recon_bits}-bit check but the field has {ctx.bits} bits")
    if plan.key_bits > ctx.bits:
        raise ValueError(
            f"plan wants a {plan.key_bits}-bit key but the field has {ctx.bits} bits")
    seq = rng_seed if isinstance(rng_seed, np.random.SeedSequence) \
        else np.random.SeedSequence(rng_seed)
    # derive children without seq.spawn(): spawning advances the parent's
    # counter, which would make repeat runs on the same sequence diverge
    children = [np.random.SeedSequence(seq.entropy,
                                       spawn_key=tuple(seq.spawn_key) + (i,),
                                       pool_size=seq.pool_size) for i in range(3)]
    rng_sample, rng_recon, rng_key = (np.random.default_rng(s) for s in children)
    x, y, z = sample(src, plan.n, rng_sample)
    recon_seed = fresh_seed(ctx, rng_recon)
    key_seed = fresh_seed(ctx, rng_key)

    check_value = alice_send(x, recon_seed, plan, ctx, size_x)
    transcript = Transcript(recon_seed=recon_seed, key_seed=key_seed,
                            check_value=check_value, plan=plan)
    key_alice = bob_extract(x, key_seed, plan, ctx, size_x)

    status, decoded = bob_decode(y, check_value, recon_seed, plan, ctx, src, method)
    if status != "ok":
        return SessionResult("aborted", key_alice, None, None, x, y, z, transcript)
    key_bob = bob_extract(decoded, key_seed, plan, ctx, size_x)
    outcome = "agreed" if key_bob == key_alice else "mismatched"
    return SessionResult(outcome, key_alice, key_bob, decoded, x, y, z, transcript)
