"""Finite-length planners and key-length bounds.

Every formula here is evaluated in its pre-asymptotic form with all constants
explicit; unspecified O(1) terms are set to zero, so the reported values are
second-order approximations wherever a bound statement suppressed a constant.
Conventions: logs base 2, hash lengths round up, key lengths round down, and
negative key lengths clamp to zero with a feasibility flag rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .source import EntropyProfile, JointSource, detect_bsc_chain

PLAN_MODES = ("theorem_main", "remark", "berry_esseen", "desk_exact")

# least n for which the n-dependent privacy/reliability splits are defined
MIN_PLAN_N = 2

_SQRT2PI = math.sqrt(2.0 * math.pi)


def qfunc(x: float) -> float:
    """Gaussian upper tail Q(x) = P(N(0,1) > x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


# Acklam's rational approximation to the standard normal quantile,
# refined below by Newton steps on erfc; the combination is accurate to
# well under 1e-9 across (0, 1).
_ACKLAM_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
             1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACKLAM_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
             6.680131188771972e+01, -1.328068155288572e+01)
_ACKLAM_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
             -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACKLAM_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
             3.754408661907416e+00)


def _normal_quantile_approx(u: float) -> float:
    a, b, c, d = _ACKLAM_A, _ACKLAM_B, _ACKLAM_C, _ACKLAM_D
    p_low = 0.02425
    if u < p_low:
        q = math.sqrt(-2.0 * math.log(u))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    if u > 1.0 - p_low:
        q = math.sqrt(-2.0 * math.log(1.0 - u))
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
                ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    q = u - 0.5
    r = q * q
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)


def qfunc_inv(p: float) -> float:
    """Inverse Gaussian tail: the x with Q(x) = p, for p in (0, 1).

    Rational initial approximation followed by Newton refinement on the exact
    erfc-based Q; accurate to better than 1e-9.
    """
    if not (0.0 < p < 1.0):
        raise ValueError(f"tail probability must be in (0, 1), got {p!r}")
    x = -_normal_quantile_approx(p)
    for _ in range(3):
        pdf = math.exp(-0.5 * x * x) / _SQRT2PI
        if pdf == 0.0:
            break
        x += (qfunc(x) - p) / pdf
    return x


@dataclass(frozen=True)
class Plan:
    """Session parameters fixed during initiation.

    recon_bits is the reconciliation hash length (rounded up), key_bits the
    extracted key length (rounded down, clamped at zero), list_log_threshold
    the log-probability cutoff defining the receiver's guess list.  The three
    eps_* fields echo how the reliability/secrecy targets were split; the two
    *_slack fields are the per-symbol entropy slacks implied by the split.
    feasible means key_bits >= 1.
    """

    mode: str
    n: int
    eps: float
    sigma: float
    eps_miss: float
    eps_collide: float
    eps_smooth: float
    miss_slack: float
    smooth_slack: float
    list_log_threshold: float
    recon_bits: int
    key_bits: int
    key_real: float
    feasible: bool
    ball_radius: int | None = None
    list_size: int | None = None

    def __post_init__(self):
        if self.mode not in PLAN_MODES:
            raise ValueError(f"unknown plan mode {self.mode!r}")
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.eps_miss + self.eps_collide > self.eps + 1e-12:
            raise ValueError("reliability split exceeds the target")
        if self.eps_smooth >= self.sigma / 2:
            raise ValueError("smoothing budget must stay below sigma/2")
        if self.list_log_threshold < 0 or self.recon_bits < 0 or self.key_bits < 0:
            raise ValueError("threshold and hash lengths must be nonnegative")


@dataclass(frozen=True)
class BoundReport:
    """One evaluated bound: value in bits, rate = value / n, plus input echo."""

    bound_name: str
    n: int
    value_bits: float
    rate: float
    inputs_echo: dict
    details: dict = field(default_factory=dict)


def _report(name: str, n: int, value: float, eps: float, sigma: float,
            profile: EntropyProfile, details: dict | None = None) -> BoundReport:
    echo = {
        "eps": eps,
        "sigma": sigma,
        "h_x_given_y": profile.h_x_given_y,
        "h_x_given_z": profile.h_x_given_z,
    }
    return BoundReport(name, n, value, value / n, echo, details or {})


def _check_targets(n: int, eps: float, sigma: float) -> None:
    if n < MIN_PLAN_N:
        raise ValueError(f"n must be at least {MIN_PLAN_N}, got {n}")
    if not (0.0 < eps < 1.0):
        raise ValueError(f"reliability target eps must be in (0, 1), got {eps!r}")
    if not (0.0 < sigma < 1.0):
        raise ValueError(f"secrecy target sigma must be in (0, 1), got {sigma!r}")


def _entropy_slack(n: int, log_alpha: float, budget: float) -> float:
    """Per-symbol slack delta with 2^(-n*delta^2 / (2*log_alpha^2)) = budget."""
    return math.sqrt(2.0 * log_alpha * log_alpha * math.log2(1.0 / budget) / n)


def _key_length_real(n: int, profile: EntropyProfile, log_alpha: float,
                     eps_miss: float, eps_collide: float, eps_smooth: float,
                     sigma: float) -> float:
    """Extractable key length, real-valued, before rounding and clamping.

    H(X^n|Z^n) - H(X^n|Y^n) + 2 + log2(eps_collide * (sigma - 2 eps_smooth)^2)
    minus the two sqrt(2n) entropy-slack terms.  Returns -inf when the
    secrecy margin sigma - 2*eps_smooth is nonpositive (log of a nonpositive
    number is guarded, not evaluated).
    """
    margin = sigma - 2.0 * eps_smooth
    if margin <= 0.0 or eps_collide <= 0.0 or eps_miss <= 0.0:
        return -math.inf
    gap = n * (profile.h_x_given_z - profile.h_x_given_y)
    penalty = math.sqrt(2.0 * n) * log_alpha * (
        math.sqrt(math.log2(1.0 / eps_smooth)) + math.sqrt(math.log2(1.0 / eps_miss)))
    return gap + 2.0 + math.log2(eps_collide * margin * margin) - penalty


def _assemble_plan(mode: str, n: int, eps: float, sigma: float, profile: EntropyProfile,
                   alphabet_x: int, eps_miss: float, eps_collide: float,
                   eps_smooth: float) -> Plan:
    log_alpha = math.log2(alphabet_x + 3)
    miss_slack = _entropy_slack(n, log_alpha, eps_miss)
    smooth_slack = _entropy_slack(n, log_alpha, eps_smooth)
    threshold = n * (profile.h_x_given_y + miss_slack)
    recon_bits = math.ceil(threshold - math.log2(eps_collide))
    key_real = _key_length_real(n, profile, log_alpha, eps_miss, eps_collide,
                                eps_smooth, sigma)
    key_bits = max(0, math.floor(key_real)) if math.isfinite(key_real) else 0
    return Plan(
        mode=mode, n=n, eps=eps, sigma=sigma,
        eps_miss=eps_miss, eps_collide=eps_collide, eps_smooth=eps_smooth,
        miss_slack=miss_slack, smooth_slack=smooth_slack,
        list_log_threshold=threshold, recon_bits=recon_bits,
        key_bits=key_bits, key_real=key_real, feasible=key_bits >= 1,
    )


def plan_theorem_main(n: int, eps: float, sigma: float, profile: EntropyProfile,
                      alphabet_x: int) -> Plan:
    """Main finite-length plan: split eps as ((n-1)/n, 1/n) between the guess
    list and the hash collisions, sigma smoothing budget (n-1)/(2n)*sigma.

    The resulting key length equals
        n*(H(X|Z) - H(X|Y)) + 2 + log2(eps*sigma^2/n^3)
        - sqrt(2n)*log2(|X|+3)*(sqrt(log2(n/((n-1)eps))) + sqrt(log2(2n/((n-1)sigma))))
    rounded down and clamped; infeasibility sets key_bits = 0 and the flag,
    never an exception.
    """
    _check_targets(n, eps, sigma)
    return _assemble_plan("theorem_main", n, eps, sigma, profile, alphabet_x,
                          eps_miss=(n - 1) / n * eps,
                          eps_collide=eps / n,
                          eps_smooth=(n - 1) / (2 * n) * sigma)


def plan_remark(n: int, eps: float, sigma: float, profile: EntropyProfile,
                alphabet_x: int) -> Plan:
    """Alternative split with sqrt(n)/fourth-root(n) denominators, trading the
    third-order term against the sqrt(n) coefficient."""
    _check_targets(n, eps, sigma)
    rt = math.sqrt(n)
    rt4 = n ** 0.25
    return _assemble_plan("remark", n, eps, sigma, profile, alphabet_x,
                          eps_miss=(rt - 1) / (2 * rt) * eps,
                          eps_collide=eps / rt,
                          eps_smooth=(rt4 - 1) / (2 * rt4) * sigma)


def bound_theorem_main(n: int, eps: float, sigma: float, profile: EntropyProfile,
                       alphabet_x: int) -> BoundReport:
    """Real-valued (pre-rounding) key length of plan_theorem_main, clamped at 0."""
    plan = plan_theorem_main(n, eps, sigma, profile, alphabet_x)
    return _report("theorem_main", n, max(0.0, plan.key_real), eps, sigma, profile,
                   {"feasible": plan.feasible})


def bound_remark(n: int, eps: float, sigma: float, profile: EntropyProfile,
                 alphabet_x: int) -> BoundReport:
    plan = plan_remark(n, eps, sigma, profile, alphabet_x)
    return _report("remark", n, max(0.0, plan.key_real), eps, sigma, profile,
                   {"feasible": plan.feasible})


def bound_berry_esseen(n: int, eps: float, sigma: float,
                       profile: EntropyProfile) -> BoundReport:
    """Second-order normal-approximation bound for the IID case.

    value = n*(H(X|Z)-H(X|Y)) - sqrt(n)*(Qinv(eps)*sd_y + Qinv(sigma/2)*sd_z)
            - (3/2)*log2(n),   clamped at 0,
    with sd_* the conditional-information standard deviations.  The additive
    constant of the underlying statement is unspecified and set to 0.

    details carries the strict finite-n correction terms: theta_n (receiver
    side) and eta_n (eavesdropper side).  When eps > theta_n and
    sigma > eta_n the corrected form
        n*dH - sqrt(n)*(Qinv(eps-theta_n)*sd_y + Qinv((sigma-eta_n)/2)*sd_z) - 1.5*log2(n)
    is valid at this exact n and reported as details["strict_value_bits"];
    otherwise strict_ok is False and only the approximation is available.
    """
    _check_targets(n, eps, sigma)
    if profile.var_x_given_y <= 0.0 or profile.var_x_given_z <= 0.0:
        raise ValueError("normal approximation needs positive conditional variances")
    sd_y = math.sqrt(profile.var_x_given_y)
    sd_z = math.sqrt(profile.var_x_given_z)
    gap = n * (profile.h_x_given_z - profile.h_x_given_y)
    rn = math.sqrt(n)
    value = gap - rn * (qfunc_inv(eps) * sd_y + qfunc_inv(sigma / 2.0) * sd_z) \
        - 1.5 * math.log2(n)
    theta_n = (1.0 + 3.0 * profile.rho_x_given_y / profile.var_x_given_y ** 1.5) / rn
    eta_n = 2.0 / rn
    strict_ok = (eps - theta_n > 0.0) and (sigma - eta_n > 0.0)
    strict_value = None
    if strict_ok:
        strict_value = gap - rn * (qfunc_inv(eps - theta_n) * sd_y
                                   + qfunc_inv((sigma - eta_n) / 2.0) * sd_z) \
            - 1.5 * math.log2(n)
    details = {"theta_n": theta_n, "eta_n": eta_n, "strict_ok": strict_ok,
               "strict_value_bits": strict_value}
    return _report("berry_esseen", n, max(0.0, value), eps, sigma, profile, details)


def _hr_check(eps: float, sigma: float) -> None:
    if not (0.0 < eps < 0.25 and 0.0 < sigma < 0.25):
        raise ValueError(f"comparison bounds require eps, sigma < 1/4, got {eps!r}, {sigma!r}")


def bound_hr_random_linear(n: int, eps: float, sigma: float, profile: EntropyProfile,
                           alphabet_x: int, alphabet_y: int) -> BoundReport:
    """Random-linear-code comparison bound: [n*dH - sqrt(n)*f']+ with
    f' = 90*log2(|X||Y|)*(sqrt(log2(1/eps)) + sqrt(log2(1/sigma)))."""
    _hr_check(eps, sigma)
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    f_lin = 90.0 * math.log2(alphabet_x * alphabet_y) * (
        math.sqrt(math.log2(1.0 / eps)) + math.sqrt(math.log2(1.0 / sigma)))
    raw = n * (profile.h_x_given_z - profile.h_x_given_y) - math.sqrt(n) * f_lin
    details = {"penalty_sqrt_n": f_lin}
    if n < 100:
        details["small_n_caution"] = "stated only for large n"
    return _report("hr_linear", n, max(0.0, raw), eps, sigma, profile, details)


def bound_hr_concatenated(n: int, eps: float, sigma: float, profile: EntropyProfile,
                          alphabet_x: int, alphabet_y: int) -> BoundReport:
    """Concatenated-construction comparison bound:
    [n*dH - n^(3/4)*g'' - sqrt(n)*f'']+ with
    g'' = (2^22 * log2(1/eps) * log2^2|X| * log2^2(|X||Y|))^(1/4),
    f'' = 8*log2|X|*sqrt(log2(1/sigma))."""
    _hr_check(eps, sigma)
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    g_cat = (2.0 ** 22 * math.log2(1.0 / eps) * math.log2(alphabet_x) ** 2
             * math.log2(alphabet_x * alphabet_y) ** 2) ** 0.25
    f_cat = 8.0 * math.log2(alphabet_x) * math.sqrt(math.log2(1.0 / sigma))
    raw = n * (profile.h_x_given_z - profile.h_x_given_y) \
        - n ** 0.75 * g_cat - math.sqrt(n) * f_cat
    details = {"penalty_n34": g_cat, "penalty_sqrt_n": f_cat}
    if n < 100:
        details["small_n_caution"] = "stated only for large n"
    return _report("hr_concat", n, max(0.0, raw), eps, sigma, profile, details)


def comm_cost(n: int, eps: float, profile: EntropyProfile, alphabet_x: int,
              iid: bool = True) -> float:
    """Public-message length in bits needed for reconciliation at reliability eps.

    IID form uses the conditional-information dispersion,
        n*H(X|Y) + sqrt(n)*Qinv(eps)*sd_y + (1/2)*log2(n);
    the general independent-experiments form replaces the dispersion term with
    sqrt(2)*log2(|X|+3)*sqrt(log2(1/eps)).  O(1) set to 0.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not (0.0 < eps < 1.0):
        raise ValueError(f"reliability target eps must be in (0, 1), got {eps!r}")
    base = n * profile.h_x_given_y + 0.5 * math.log2(n)
    if iid:
        if profile.var_x_given_y < 0.0:
            raise ValueError("negative variance in profile")
        return base + math.sqrt(n) * qfunc_inv(eps) * math.sqrt(profile.var_x_given_y)
    return base + math.sqrt(n) * math.sqrt(2.0) * math.log2(alphabet_x + 3) \
        * math.sqrt(math.log2(1.0 / eps))


BOUND_NAMES = ("theorem_main", "remark", "berry_esseen", "hr_linear", "hr_concat")


def _raw_bound_value(bound_name: str, n: int, eps: float, sigma: float,
                     profile: EntropyProfile, alphabet_x: int, alphabet_y: int) -> float:
    """Unclamped bound value, used by the positivity search."""
    if bound_name == "theorem_main":
        return plan_theorem_main(n, eps, sigma, profile, alphabet_x).key_real
    if bound_name == "remark":
        return plan_remark(n, eps, sigma, profile, alphabet_x).key_real
    if bound_name == "berry_esseen":
        gap = n * (profile.h_x_given_z - profile.h_x_given_y)
        g = qfunc_inv(eps) * math.sqrt(profile.var_x_given_y) \
            + qfunc_inv(sigma / 2.0) * math.sqrt(profile.var_x_given_z)
        return gap - math.sqrt(n) * g - 1.5 * math.log2(n)
    if bound_name == "hr_linear":
        f_lin = 90.0 * math.log2(alphabet_x * alphabet_y) * (
            math.sqrt(math.log2(1.0 / eps)) + math.sqrt(math.log2(1.0 / sigma)))
        return n * (profile.h_x_given_z - profile.h_x_given_y) - math.sqrt(n) * f_lin
    if bound_name == "hr_concat":
        g_cat = (2.0 ** 22 * math.log2(1.0 / eps) * math.log2(alphabet_x) ** 2
                 * math.log2(alphabet_x * alphabet_y) ** 2) ** 0.25
        f_cat = 8.0 * math.log2(alphabet_x) * math.sqrt(math.log2(1.0 / sigma))
        return n * (profile.h_x_given_z - profile.h_x_given_y) \
            - n ** 0.75 * g_cat - math.sqrt(n) * f_cat
    raise ValueError(f"unknown bound {bound_name!r}")


def min_positive_n(bound_name: str, eps: float, sigma: float, profile: EntropyProfile,
                   alphabet_x: int, alphabet_y: int, ceiling: int = 10 ** 12) -> int | None:
    """Smallest n at which the named bound is strictly positive.

    Doubling search followed by bisection; the result is verified locally
    (value(n*) > 0 and value(n*-1) <= 0).  Returns None if the bound never
    turns positive at or below the ceiling.  The bounds here are eventually
    monotone in n for positive-rate sources, which is all the search needs.
    """
    if bound_name not in BOUND_NAMES:
        raise ValueError(f"unknown bound {bound_name!r}")
    if ceiling > 10 ** 12:
        raise ValueError("ceiling above 1e12 not supported")

    def value(n: int) -> float:
        return _raw_bound_value(bound_name, n, eps, sigma, profile, alphabet_x, alphabet_y)

    lo = MIN_PLAN_N
    if value(lo) > 0.0:
        return lo
    hi = lo
    while True:
        hi = min(hi * 2, ceiling)
        if value(hi) > 0.0:
            break
        if hi >= ceiling:
            return None
    # invariant: value(lo) <= 0 < value(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if value(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    if not (value(hi) > 0.0 and value(hi - 1) <= 0.0):
        raise ArithmeticError(f"positivity crossing not locally monotone near n={hi}")
    return hi


def plan_desk_exact(src: JointSource, n: int, eps: float, sigma: float) -> Plan:
    """Exactly analyzable desk-scale plan for the binary cascade source.

    The guess list is the Hamming ball whose binomial tail mass is at most
    eps/2; the hash length covers the list's collision mass with another
    eps/2; the key length is the largest ell with
    (1/2)*sqrt(2^(recon_bits + ell - Hmin)) <= sigma, where Hmin is the exact
    average conditional min-entropy of X^n given Z^n (product form, exact for
    IID sources).  recon_bits is capped at the encoding width n, where the
    hash is injective and the collision mass is exactly zero.
    """
    params = detect_bsc_chain(src)
    if params is None:
        raise ValueError("desk-exact planning needs a binary cascade source")
    if not (1 <= n <= 64):
        raise ValueError(f"desk-exact planning supports 1 <= n <= 64, got {n}")
    if not (0.0 < eps < 1.0) or not (0.0 < sigma < 1.0):
        raise ValueError("targets eps and sigma must be in (0, 1)")
    p = params.p

    # exact binomial survival scan: smallest d with P(Bin(n, p) > d) <= eps/2
    pmf = [math.comb(n, k) * p ** k * (1.0 - p) ** (n - k) for k in range(n + 1)]
    ball_radius = None
    for d in range(n + 1):
        tail = sum(pmf[d + 1:])
        if tail <= eps / 2.0:
            ball_radius = d
            break
    assert ball_radius is not None  # tail at d = n is exactly 0

    list_size = sum(math.comb(n, k) for k in range(ball_radius + 1))
    recon_bits = min(n, math.ceil(math.log2(list_size) + math.log2(2.0 / eps)))

    # -log2 probability of a flip pattern of exactly ball_radius errors;
    # p = 0 forces ball_radius = 0 so the p-term never evaluates log2(0)
    threshold = (n - ball_radius) * -math.log2(1.0 - p)
    if ball_radius > 0:
        threshold += ball_radius * -math.log2(p)

    # exact average min-entropy of X^n given Z^n, product form
    per_symbol = float(src.p_xz().max(axis=0).sum())
    hmin_total = -n * math.log2(per_symbol)
    key_real = hmin_total - recon_bits + 2.0 + 2.0 * math.log2(sigma)
    key_bits = max(0, math.floor(key_real))

    return Plan(
        mode="desk_exact", n=n, eps=eps, sigma=sigma,
        eps_miss=eps / 2.0, eps_collide=eps / 2.0, eps_smooth=0.0,
        miss_slack=0.0, smooth_slack=0.0,
        list_log_threshold=threshold, recon_bits=recon_bits,
        key_bits=key_bits, key_real=key_real, feasible=key_bits >= 1,
        ball_radius=ball_radius, list_size=list_size,
    )
