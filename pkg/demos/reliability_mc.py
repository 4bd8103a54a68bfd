"""Monte Carlo reliability check against the planned failure budget."""

from omska import bsc_chain, estimate_reliability, plan_desk_exact

src = bsc_chain(0.02, 0.15)
plan = plan_desk_exact(src, 32, eps=0.05, sigma=0.05)
print(f"n={plan.n}  recon_bits={plan.recon_bits}  list_size={plan.list_size}  "
      f"eps={plan.eps}")

# a trial fails whenever the outcome is not 'agreed': either the guess list
# missed the true block, or the check value matched more than one candidate
est = estimate_reliability(src, plan, trials=2000, rng_seed=1)
print(f"outcomes: {est.outcome_counts}")
print(f"failure rate {est.failure_rate:.4f}  "
      f"wilson 95% [{est.wilson_lower:.4f}, {est.wilson_upper:.4f}]")
print(f"upper end vs eps target: {est.wilson_upper:.4f} "
      f"{'<=' if est.meets_target else '>'} {est.eps_target}")
