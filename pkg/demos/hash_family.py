"""The seeded hash family under the hood.

Hashing is multiplication in GF(2^m) followed by truncation to the top t
bits.  The family is strongly 2-universal over nonzero seeds, and because
multiplication distributes over XOR it is linear in the input, which is what
lets the receiver check list candidates incrementally.
"""

import numpy as np

from omska import (BitString, GFContext, HashSeed, fresh_seed, gf_mul, hash,
                   uhf_collision_census)

ctx = GFContext.for_bits(8)
print(f"field GF(2^8), reduction polynomial 0x{ctx.poly:X}")

# the classic inverse pair in this field
print(f"0x53 * 0xCA = 0x{gf_mul(0x53, 0xCA, ctx):02X}")
print(f"0x57 * 0x83 = 0x{gf_mul(0x57, 0x83, ctx):02X}")
print()

# linearity: hash(a ^ b) == hash(a) ^ hash(b), any seed, any output length
rng = np.random.default_rng(5)
seed = fresh_seed(ctx, rng)
for _ in range(4):
    a, b = (int(v) for v in rng.integers(0, 256, size=2))
    lhs = hash(BitString(a ^ b, 8), seed, 5, ctx).value
    rhs = hash(BitString(a, 8), seed, 5, ctx).value ^ \
        hash(BitString(b, 8), seed, 5, ctx).value
    print(f"hash({a:3} ^ {b:3}) = {lhs:2}   hash xor hash = {rhs:2}")
print()

# the zero seed sends everything to zero; it is kept in the family so the
# seed average matches the 2^-t collision rate exactly
zero = HashSeed(0, 8)
print(f"zero seed: hash(0xAB) = {hash(BitString(0xAB, 8), zero, 6, ctx).value}")
print()

# census: for every pair x != x', count seeds with hash(x) == hash(x').
# strong 2-universality shows up as a constant off-diagonal
for t in (2, 5, 8):
    counts = uhf_collision_census(ctx, t)
    off = counts[~np.eye(256, dtype=bool)]
    print(f"t={t}: off-diagonal collision count is {off.min()}..{off.max()} "
          f"(2^(m-t) = {1 << (8 - t)}) over {off.size} pairs")
