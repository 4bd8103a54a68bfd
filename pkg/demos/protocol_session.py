"""One full session at desk scale, with the transcript printed.

n = 64 with relaxed targets (eps = 0.3, sigma = 0.4) is the smallest setting
in the running example where the exact desk planner still leaves one key bit
after the reconciliation hash is paid for.
"""

from omska import bsc_chain, plan_desk_exact, run_session

src = bsc_chain(0.02, 0.15)
plan = plan_desk_exact(src, 64, eps=0.3, sigma=0.4)

print(f"plan: n={plan.n}  recon_bits={plan.recon_bits}  key_bits={plan.key_bits}")
print(f"      ball_radius={plan.ball_radius}  list_size={plan.list_size}")
print(f"      feasible={plan.feasible}")
print()

res = run_session(src, plan, rng_seed=2025)
tr = res.transcript

print("public transcript (all the eavesdropper sees):")
print(f"  reconciliation seed  {tr.recon_seed.to_hex()}")
print(f"  key seed             {tr.key_seed.to_hex()}")
print(f"  check value          {tr.check_value.to_hex()}")
print()

# the receiver decodes by hashing every block in its guess list and keeping
# the ones that match the check value; exactly one match means success
print(f"outcome: {res.outcome}")
print(f"  sender key    {res.key_alice.to_hex()}")
print(f"  receiver key  {res.key_bob.to_hex() if res.key_bob else '(none)'}")
if res.decoded is not None:
    flips = int((res.x != res.y).sum())
    print(f"  y differed from x in {flips} positions, decoded block "
          f"{'==' if (res.decoded == res.x).all() else '!='} x")

print()
print("transcript serializes losslessly:")
print(tr.to_json()[:112] + " ...")
