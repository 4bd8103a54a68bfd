"""Tripartite memoryless sources and their entropy statistics.

A source is a joint pmf over (X, Y, Z): the sender observes X, the receiver Y,
and the eavesdropper Z, all drawn IID across positions.  Everything downstream
(planners, the protocol, the verifiers) consumes either the pmf itself or the
per-symbol entropy statistics computed here.  Logs are base 2 throughout and
zero-probability cells contribute zero to every sum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

PMF_TOL = 1e-12


@dataclass(frozen=True)
class BscChainParams:
    """Crossover probabilities of the cascaded-flip source: Y is X through a
    symmetric bit flipper with probability p, Z is Y through another with q."""

    p: float
    q: float

    def __post_init__(self):
        for name, v in (("p", self.p), ("q", self.q)):
            if not (0.0 <= v <= 0.5):
                raise ValueError(f"{name} must lie in [0, 1/2], got {v!r}")


@dataclass(frozen=True)
class JointSource:
    """Dense joint pmf over the three alphabets.

    Attributes
    ----------
    alphabet_sizes : (|X|, |Y|, |Z|)
    pmf : ndarray of shape alphabet_sizes, entries >= 0 summing to 1 (+-1e-12)
    labels : optional symbol labels per axis, purely cosmetic
    """

    alphabet_sizes: tuple[int, int, int]
    pmf: np.ndarray
    labels: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.alphabet_sizes)
        if len(sizes) != 3 or any(s < 1 for s in sizes):
            raise ValueError(f"alphabet_sizes must be three positive ints, got {self.alphabet_sizes!r}")
        arr = np.asarray(self.pmf, dtype=float)
        if arr.shape != sizes:
            raise ValueError(f"pmf shape {arr.shape} does not match alphabet_sizes {sizes}")
        if np.any(arr < 0):
            raise ValueError("pmf has negative entries")
        total = float(arr.sum())
        if abs(total - 1.0) > PMF_TOL:
            raise ValueError(f"pmf sums to {total!r}, not 1 within {PMF_TOL}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "alphabet_sizes", sizes)
        object.__setattr__(self, "pmf", arr)

    # convenience marginals, all tiny
    def p_xy(self) -> np.ndarray:
        return self.pmf.sum(axis=2)

    def p_xz(self) -> np.ndarray:
        return self.pmf.sum(axis=1)

    def p_y(self) -> np.ndarray:
        return self.pmf.sum(axis=(0, 2))

    def p_z(self) -> np.ndarray:
        return self.pmf.sum(axis=(0, 1))


@dataclass(frozen=True)
class EntropyProfile:
    """Per-symbol conditional-entropy statistics of a source (bits / bits^2 / bits^3).

    var_* are the variances of the conditional information density
    -log2 P(X|·) under the joint law; rho_x_given_y is its third absolute
    central moment on the receiver side.  Profiles add: the sum of two
    profiles is the profile of the corresponding independent pair of
    positions (totals, no longer per-symbol).
    """

    h_x_given_y: float
    h_x_given_z: float
    var_x_given_y: float
    var_x_given_z: float
    rho_x_given_y: float

    def __add__(self, other: "EntropyProfile") -> "EntropyProfile":
        if not isinstance(other, EntropyProfile):
            return NotImplemented
        return EntropyProfile(
            self.h_x_given_y + other.h_x_given_y,
            self.h_x_given_z + other.h_x_given_z,
            self.var_x_given_y + other.var_x_given_y,
            self.var_x_given_z + other.var_x_given_z,
            self.rho_x_given_y + other.rho_x_given_y,
        )

    def scaled(self, factor: float) -> "EntropyProfile":
        return EntropyProfile(
            self.h_x_given_y * factor,
            self.h_x_given_z * factor,
            self.var_x_given_y * factor,
            self.var_x_given_z * factor,
            self.rho_x_given_y * factor,
        )


def binary_entropy(p: float) -> float:
    """h2(p) in bits; 0 at the endpoints."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"probability out of range: {p!r}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def crossover_convolve(p: float, q: float) -> float:
    """Effective crossover of two cascaded symmetric flippers: p(1-q) + (1-p)q."""
    for v in (p, q):
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"probability out of range: {v!r}")
    return p * (1.0 - q) + (1.0 - p) * q


def bsc_chain(params: BscChainParams | float, q: float | None = None) -> JointSource:
    """Build the binary cascade source: X uniform, Y = flip_p(X), Z = flip_q(Y).

    Accepts either a BscChainParams or the two floats directly.
    P(x,y,z) = 1/2 * p^[x!=y] (1-p)^[x=y] * q^[y!=z] (1-q)^[y=z].
    """
    if isinstance(params, BscChainParams):
        if q is not None:
            raise ValueError("pass either BscChainParams or two floats, not both")
        pp = params
    else:
        if q is None:
            raise ValueError("missing second crossover probability")
        pp = BscChainParams(float(params), float(q))
    p_, q_ = pp.p, pp.q
    pmf = np.empty((2, 2, 2))
    for x in range(2):
        for y in range(2):
            for z in range(2):
                leg1 = p_ if x != y else 1.0 - p_
                leg2 = q_ if y != z else 1.0 - q_
                pmf[x, y, z] = 0.5 * leg1 * leg2
    return JointSource((2, 2, 2), pmf)


def detect_bsc_chain(src: JointSource, tol: float = 1e-12) -> BscChainParams | None:
    """Return the cascade parameters if `src` is entrywise a bsc_chain source, else None.

    Used by the decoder to decide whether the Hamming-ball specialization applies.
    """
    if src.alphabet_sizes != (2, 2, 2):
        return None
    p_fit = float(src.p_xy()[0, 1] + src.p_xy()[1, 0])
    q_fit = float(src.pmf.sum(axis=0)[0, 1] + src.pmf.sum(axis=0)[1, 0])
    if not (0.0 <= p_fit <= 0.5 and 0.0 <= q_fit <= 0.5):
        return None
    candidate = bsc_chain(p_fit, q_fit)
    if np.max(np.abs(candidate.pmf - src.pmf)) <= tol:
        return BscChainParams(p_fit, q_fit)
    return None


def load_joint_pmf(desc: str | dict) -> JointSource:
    """Parse a serialized source description.

    The description is a JSON object, either explicit:

        {"alphabet_sizes": [2, 2, 2], "pmf": [  ... flat row-major ... ],
         "labels": {"x": [...], "y": [...], "z": [...]}}   # labels optional

    or a builtin generator:

        {"generator": "bsc_chain", "p": 0.02, "q": 0.15}

    Accepts the JSON text or an already-parsed dict.  Parse failures,
    negative entries, and mass-sum violations raise distinct ValueErrors.
    """
    if isinstance(desc, str):
        try:
            obj = json.loads(desc)
        except json.JSONDecodeError as e:
            raise ValueError(f"source description is not valid JSON: {e}") from e
    elif isinstance(desc, dict):
        obj = desc
    else:
        raise ValueError(f"source description must be JSON text or a dict, got {type(desc).__name__}")
    if not isinstance(obj, dict):
        raise ValueError("source description must be a JSON object")

    if "generator" in obj:
        gen = obj["generator"]
        if gen != "bsc_chain":
            raise ValueError(f"unknown generator {gen!r}")
        try:
            p_, q_ = float(obj["p"]), float(obj["q"])
        except (KeyError, TypeError) as e:
            raise ValueError(f"generator 'bsc_chain' needs numeric p and q: {e}") from e
        return bsc_chain(p_, q_)

    try:
        sizes = tuple(int(s) for s in obj["alphabet_sizes"])
        flat = obj["pmf"]
    except (KeyError, TypeError, ValueError) as e:
        raise ValueError(f"malformed source description: {e}") from e
    if len(sizes) != 3:
        raise ValueError(f"alphabet_sizes must have three entries, got {len(sizes)}")
    expected = sizes[0] * sizes[1] * sizes[2]
    if not isinstance(flat, list) or len(flat) != expected:
        raise ValueError(f"pmf must be a flat list of {expected} entries (row-major x, y, z)")
    arr = np.asarray(flat, dtype=float).reshape(sizes)
    return JointSource(sizes, arr, labels=obj.get("labels"))


def _cond_info_moments(joint2: np.ndarray) -> tuple[float, float, float]:
    """Mean, variance, third absolute central moment of -log2 P(X|V) under a
    joint |X| x |V| table.  Zero-probability cells are skipped outright."""
    marg = joint2.sum(axis=0)
    mask = joint2 > 0
    cond = np.zeros_like(joint2)
    cols = marg > 0
    cond[:, cols] = joint2[:, cols] / marg[cols]
    w = np.zeros_like(joint2)
    w[mask] = -np.log2(cond[mask])
    pm = joint2[mask]
    wm = w[mask]
    mean = float(np.dot(pm, wm))
    var = float(np.dot(pm, (wm - mean) ** 2))
    rho = float(np.dot(pm, np.abs(wm - mean) ** 3))
    return mean, var, rho


def entropy_profile(src: JointSource) -> EntropyProfile:
    """Per-symbol conditional entropies, variances, and the receiver-side third
    absolute moment, by direct summation over the joint pmf."""
    h_y, var_y, rho_y = _cond_info_moments(src.p_xy())
    h_z, var_z, _ = _cond_info_moments(src.p_xz())
    return EntropyProfile(h_y, h_z, var_y, var_z, rho_y)


def combined_profile(sources: Sequence[JointSource]) -> EntropyProfile:
    """Summed profile of a list of independent (not necessarily identical)
    per-position sources; the IID case is a single-element list scaled by n."""
    if not sources:
        raise ValueError("need at least one source")
    total = entropy_profile(sources[0])
    for s in sources[1:]:
        total = total + entropy_profile(s)
    return total


def ow_capacity_less_noisy(src: JointSource) -> float:
    """H(X|Z) - H(X|Y), the one-way key rate when the wiretap side is less
    noisy.  Returned as-is; may be negative when the hypothesis fails and the
    caller is responsible for checking applicability."""
    prof = entropy_profile(src)
    return prof.h_x_given_z - prof.h_x_given_y


def sample(src: JointSource, n: int, rng_seed: int | np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw n IID positions; returns (x, y, z) arrays of dtype int64.

    Deterministic given rng_seed (an int or an existing Generator).
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    flat = src.pmf.ravel()
    cells = rng.choice(flat.size, size=n, p=flat)
    x, y, z = np.unravel_index(cells, src.alphabet_sizes)
    return x.astype(np.int64), y.astype(np.int64), z.astype(np.int64)
