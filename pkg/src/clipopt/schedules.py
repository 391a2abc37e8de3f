"""Theorem-driven hyperparameter schedules.

Everything an optimizer run needs is computed here up front: the accelerated
method's coefficient sequences ``alpha_{k+1} = (k+2)/(2aL)``,
``A_{k+1} = (k+1)(k+4)/(4aL)`` and per-step clipping levels
``lambda_{k+1} = B / alpha_{k+1}``; convex and strongly convex SGD parameter
sets; per-iteration batch sizes; and restart plans whose clip scale halves
(``B_t ~ 2^-t``) while batches double (``m^t ~ 2^t``).

The large numerical constants (6000, 10368, 27, 80, 81, 320, ...) are kept
verbatim from the convergence analysis; `practical_scale` multiplies them all
so they can be tuned down in practice without touching the formulas.
Batch sizes are rounded with ceil so the analysis requirement is never
undershot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

__all__ = [
    "sstm_alpha",
    "SstmSchedule",
    "sstm_theorem_params",
    "sstm_batch_policy",
    "SgdSchedule",
    "sgd_theorem_params",
    "sgd_strongly_convex_params",
    "sgd_manual",
    "sstm_manual",
    "d_clipped_sgd_schedule",
    "d_clipped_sgd_schedule_update",
    "epoch_boundary_period",
    "decayed_clipping_level",
    "RestartPlan",
    "restart_plan_sstm",
    "restart_plan_sgd",
    "small_batch_restart_params",
]

C_SSTM = math.sqrt(5.0)
C_SGD = math.sqrt(2.0)


def sstm_alpha(k: int, a: float, L: float) -> tuple[float, float]:
    """(alpha_{k+1}, A_{k+1}) for the accelerated sequences.

    alpha_{k+1} = (k+2)/(2aL) and the closed form
    A_{k+1} = (k+1)(k+4)/(4aL), which equals the recurrence
    A_{k+1} = A_k + alpha_{k+1} exactly and satisfies
    A_{k+1} >= a L alpha_{k+1}^2 for all k >= 0.
    """
    if a <= 0 or L <= 0:
        raise ValueError("a and L must be positive")
    if k < 0:
        raise ValueError("k must be >= 0")
    alpha = (k + 2) / (2.0 * a * L)
    A = (k + 1) * (k + 4) / (4.0 * a * L)
    return alpha, A


def _require_log_condition(N: int, beta: float, tau: int = 1) -> float:
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must be in (0,1), got {beta}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    ln_term = math.log(4.0 * N * tau / beta)
    if ln_term < 2.0:
        raise ValueError(
            f"ln(4*{N}*{tau}/{beta}) = {ln_term:.4f} < 2; the parameter "
            "formulas require ln(4N/beta) >= 2"
        )
    return ln_term


def _sstm_a_lower_bound(ln_term: float, C: float, scale: float) -> float:
    root = math.sqrt(4.0 * ln_term**2 + 2.0 * ln_term)
    return max(
        1.0,
        scale * 16.0 * ln_term / C,
        scale * 36.0 * (2.0 * ln_term + root) ** 2,
    )


@dataclass(frozen=True)
class SstmSchedule:
    """Parameters for one accelerated clipped run.

    ``B = inf`` is the no-clipping sentinel.  `m_factor` carries the 2^t
    batch inflation of restart stages; `ln_term` is ln(4N/beta) for a plain
    run and ln(4 N0 tau / beta) inside a restart plan.
    """

    a: float
    L: float
    B: float
    N: int
    ln_term: float
    C: float = C_SSTM
    sigma2: float = 0.0
    R0: float = 1.0
    m_factor: float = 1.0
    practical_scale: float = 1.0
    policy: str = "theorem"
    m_const: int = 0  # > 0 pins every batch to this size (manual runs)
    notes: tuple = ()

    def alpha(self, k: int) -> tuple[float, float]:
        return sstm_alpha(k, self.a, self.L)

    def lam_at(self, k: int) -> float:
        """Clipping level used at step k: lambda_{k+1} = B / alpha_{k+1}."""
        if math.isinf(self.B):
            return math.inf
        alpha, _ = self.alpha(k)
        return self.B / alpha

    def batch_at(self, k: int) -> int:
        """m_k = ceil(max{1, 6000 s^2 a^2 N ln / (C R0)^2, 10368 s^2 a^2 N / (C R0)^2})."""
        if self.m_const > 0:
            return self.m_const
        if self.sigma2 <= 0.0:
            return 1
        alpha, _ = self.alpha(k)
        common = (
            self.m_factor
            * self.sigma2
            * alpha**2
            * self.N
            / (self.C**2 * self.R0**2)
        )
        s = self.practical_scale
        m = max(1.0, s * 6000.0 * common * self.ln_term, s * 10368.0 * common)
        return int(math.ceil(m))

    def max_batch(self) -> int:
        # alpha_{k+1} grows with k, so the last step has the largest batch
        return self.batch_at(self.N - 1)

    def total_oracle_calls(self) -> int:
        return sum(self.batch_at(k) for k in range(self.N))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = "sstm"
        d["notes"] = list(self.notes)
        return d


def sstm_theorem_params(
    L: float,
    sigma2: float,
    R0: float,
    N: int,
    beta: float,
    C: float = C_SSTM,
    practical_scale: float = 1.0,
) -> SstmSchedule:
    """Exact convex-case parameters: B = C R0 / (8 ln(4N/beta)) and
    a = max{1, 16 ln/C, 36 (2 ln + sqrt(4 ln^2 + 2 ln))^2}."""
    if R0 <= 0:
        raise ValueError("R0 must be positive")
    if L <= 0:
        raise ValueError("L must be positive")
    ln_term = _require_log_condition(N, beta)
    B = C * R0 / (8.0 * ln_term)
    a = _sstm_a_lower_bound(ln_term, C, practical_scale)
    return SstmSchedule(
        a=a,
        L=L,
        B=B,
        N=N,
        ln_term=ln_term,
        C=C,
        sigma2=sigma2,
        R0=R0,
        practical_scale=practical_scale,
        policy="theorem",
    )


def sstm_batch_policy(
    policy: str,
    L: float,
    sigma2: float,
    R0: float,
    N: int,
    beta: float,
    a0: float | None = None,
    C: float = C_SSTM,
    practical_scale: float = 1.0,
) -> SstmSchedule:
    """Alternative stepsize-coefficient policies trading iterations for batch size.

    - ``theorem``: a at its analysis lower bound; batches grow like k^2 N.
    - ``medium``: a = N ln(4N/beta); batches grow like (k+2)^2/(N ln).
    - ``constant``: a = a0 N^{3/2} sqrt(ln(4N/beta)); with a0 = sigma/(L R0)
      batches stay O(1).
    - ``combined``: a = max{theorem bound, sigma N^{3/2} sqrt(ln)/(L R0)},
      which also keeps batches O(1).

    Each non-theorem policy must dominate the theorem's lower bound for `a`;
    if it does not, the schedule falls back to the theorem value and records
    a note.
    """
    base = sstm_theorem_params(L, sigma2, R0, N, beta, C, practical_scale)
    if policy == "theorem":
        return base
    ln_term = base.ln_term
    notes: list[str] = []
    if policy == "medium":
        a = N * ln_term
    elif policy == "constant":
        if a0 is None:
            if sigma2 <= 0:
                raise ValueError("constant-batch policy needs a0 when sigma = 0")
            a0 = math.sqrt(sigma2) / (L * R0)
        a = a0 * N**1.5 * math.sqrt(ln_term)
    elif policy == "combined":
        a = max(base.a, math.sqrt(sigma2) * N**1.5 * math.sqrt(ln_term) / (L * R0))
    else:
        raise ValueError(f"unknown batch policy {policy!r}")
    if a < base.a:
        notes.append(
            f"policy {policy!r} gives a = {a:.6g} below the required lower bound "
            f"{base.a:.6g}; falling back to the exact value"
        )
        a = base.a
        policy = f"{policy}->theorem"
    return SstmSchedule(
        a=a,
        L=L,
        B=base.B,
        N=N,
        ln_term=ln_term,
        C=C,
        sigma2=sigma2,
        R0=R0,
        practical_scale=practical_scale,
        policy=policy,
        notes=tuple(notes),
    )


# ----------------------------------------------------------------------
# SGD schedules
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SgdSchedule:
    """Stepsize, clipping level(s) and batch size(s) for an SGD-family run.

    `variant` selects between the constant-parameter convex theorem
    ("convex"), the strongly convex theorem with decaying lambda_l and
    growing m_k ("strongly-convex"), the periodically decreasing clipping
    heuristic ("decaying"), and free-form "manual" settings.  The convex
    variant's output iterate is the running average; the others return the
    last iterate.
    """

    gamma: float
    variant: str
    lam: float = math.inf
    m: int = 1
    N: int = 0
    L: float = 0.0
    mu: float = 0.0
    r0: float = 0.0
    sigma2: float = 0.0
    ln_term: float = 0.0
    C: float = C_SGD
    practical_scale: float = 1.0
    # decaying-heuristic knobs
    decay_factor: float = 1.0
    decay_period: int = 0
    output: str = "last"
    notes: tuple = ()

    def lam_at(self, k: int) -> float:
        if self.variant == "strongly-convex":
            return 4.0 * math.sqrt(
                self.L * (1.0 - self.gamma * self.mu) ** k * self.r0
            )
        if self.variant == "decaying" and self.decay_period > 0:
            return self.lam * self.decay_factor ** (k // self.decay_period)
        return self.lam

    def batch_at(self, k: int) -> int:
        if self.variant != "strongly-convex" or self.sigma2 <= 0.0:
            return self.m
        s = self.practical_scale
        m = max(
            1.0,
            s
            * 27.0
            * self.N
            * self.sigma2
            / (
                16.0
                * self.L
                * self.r0
                * (1.0 - self.gamma * self.mu) ** k
                * self.ln_term
            ),
        )
        return int(math.ceil(m))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = "sgd"
        d["notes"] = list(self.notes)
        return d


def sgd_theorem_params(
    L: float,
    sigma2: float,
    R0: float,
    N: int,
    beta: float,
    C: float = C_SGD,
    practical_scale: float = 1.0,
) -> SgdSchedule:
    """Convex clipped-SGD: lambda = 2 L C R0, gamma = 1/(80 L ln(4N/beta)),
    m = ceil(max{1, 27 N sigma^2 / (2 (C R0)^2 L^2 ln(4N/beta))}).

    The guaranteed output is the running average of the first N iterates.
    """
    if R0 <= 0 or L <= 0:
        raise ValueError("L and R0 must be positive")
    ln_term = _require_log_condition(N, beta)
    s = practical_scale
    lam = 2.0 * L * C * R0
    gamma = 1.0 / (s * 80.0 * L * ln_term)
    m = 1
    if sigma2 > 0:
        m = int(
            math.ceil(
                max(1.0, s * 27.0 * N * sigma2 / (2.0 * (C * R0) ** 2 * L**2 * ln_term))
            )
        )
    return SgdSchedule(
        gamma=gamma,
        variant="convex",
        lam=lam,
        m=m,
        N=N,
        L=L,
        sigma2=sigma2,
        ln_term=ln_term,
        C=C,
        practical_scale=practical_scale,
        output="average",
    )


def sgd_strongly_convex_params(
    L: float,
    mu: float,
    sigma2: float,
    r0: float,
    N: int,
    beta: float,
    practical_scale: float = 1.0,
) -> SgdSchedule:
    """Strongly convex clipped-SGD: gamma = 1/(81 L ln(4N/beta)),
    lambda_l = 4 sqrt(L (1-gamma mu)^l r0),
    m_k = ceil(max{1, 27 N sigma^2 / (16 L r0 (1-gamma mu)^k ln(4N/beta))}).

    Clipping levels decay geometrically while batches grow; the guaranteed
    output is the last iterate.
    """
    if mu <= 0:
        raise ValueError("mu must be positive (use the convex variant when mu = 0)")
    if r0 <= 0:
        raise ValueError("r0 = f(x0) - f* must be positive")
    ln_term = _require_log_condition(N, beta)
    gamma = 1.0 / (practical_scale * 81.0 * L * ln_term)
    return SgdSchedule(
        gamma=gamma,
        variant="strongly-convex",
        m=1,
        N=N,
        L=L,
        mu=mu,
        r0=r0,
        sigma2=sigma2,
        ln_term=ln_term,
        practical_scale=practical_scale,
        output="last",
    )


def sgd_manual(
    gamma: float, lam: float = math.inf, m: int = 1, output: str = "last"
) -> SgdSchedule:
    """Free-form schedule (the experiments-style configuration)."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    if m < 1:
        raise ValueError("m must be >= 1")
    return SgdSchedule(gamma=gamma, variant="manual", lam=lam, m=int(m), output=output)


def sstm_manual(
    a: float, L: float, B: float = math.inf, N: int = 1, m: int = 1
) -> SstmSchedule:
    """Free-form accelerated schedule with a constant batch size."""
    if a <= 0 or L <= 0:
        raise ValueError("a and L must be positive")
    if m < 1:
        raise ValueError("m must be >= 1")
    return SstmSchedule(
        a=a, L=L, B=B, N=int(N), ln_term=2.0, policy="manual", m_const=int(m)
    )


def epoch_boundary_period(n_samples: int, l_epochs: float, m: int) -> int:
    """Iterations between clipping-level decreases: ceil(r l / m)."""
    if l_epochs <= 0:
        raise ValueError("l must be >= 1 epoch")
    if m < 1 or n_samples < 1:
        raise ValueError("need positive batch size and sample count")
    return int(math.ceil(n_samples * l_epochs / m))


def d_clipped_sgd_schedule(
    gamma: float,
    lam0: float,
    alpha_dec: float,
    period: int,
    m: int = 1,
) -> SgdSchedule:
    """Periodically decreasing clipping level: every `period` iterations the
    level is multiplied by alpha_dec in (0,1)."""
    if not 0.0 < alpha_dec < 1.0:
        raise ValueError(f"alpha_dec must lie in (0,1), got {alpha_dec}")
    if lam0 <= 0:
        raise ValueError("initial clipping level must be positive")
    if period < 1:
        raise ValueError("period must be >= 1")
    return SgdSchedule(
        gamma=gamma,
        variant="decaying",
        lam=lam0,
        m=int(m),
        decay_factor=alpha_dec,
        decay_period=int(period),
        output="last",
    )


def d_clipped_sgd_schedule_update(
    lam: float, iteration: int, period: int, alpha_dec: float
) -> float:
    """lambda' after finishing `iteration`: multiplied by alpha_dec at each
    epoch boundary (every `period` iterations), unchanged otherwise."""
    if not 0.0 < alpha_dec < 1.0:
        raise ValueError(f"alpha_dec must lie in (0,1), got {alpha_dec}")
    if period < 1:
        raise ValueError("period must be >= 1")
    if iteration > 0 and iteration % period == 0:
        return lam * alpha_dec
    return lam


def decayed_clipping_level(lam0: float, k: int, period: int, alpha_dec: float) -> float:
    """Closed form of the decay: lambda_k = lambda0 * alpha_dec^(k // period)."""
    return lam0 * alpha_dec ** (k // period)


# ----------------------------------------------------------------------
# Restart plans
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class RestartPlan:
    """Outer-loop plan: tau restarts of N0 inner iterations each.

    For the accelerated method the stage-t clip scale is
    ``B_t = C R / (8 * 2^t * ln(4 N0 tau / beta))`` and batches carry a 2^t
    factor; for SGD the stage batch is
    ``m^t = ceil(max{1, 27 * 2^t N0 sigma^2 / (2 (C R)^2 L^2 ln)})`` with the
    clip level interpolated from the contraction of the radius,
    ``lambda_t = 2 L C R 2^{-t/2}``.
    """

    method: str  # "sstm" | "sgd"
    N0: int
    tau: int
    R: float
    L: float
    mu: float
    sigma2: float
    beta: float
    ln_term: float
    C: float
    a: float = 0.0  # sstm stepsize coefficient
    gamma: float = 0.0  # sgd stepsize
    practical_scale: float = 1.0
    provenance: str = ""
    fixed_point_iters: int = 0
    notes: tuple = ()

    def B_t(self, t: int) -> float:
        return self.C * self.R / (8.0 * 2.0**t * self.ln_term)

    def lam_t(self, t: int) -> float:
        return 2.0 * self.L * self.C * self.R * 2.0 ** (-t / 2.0)

    def m_t(self, t: int) -> int:
        if self.sigma2 <= 0:
            return 1
        m = max(
            1.0,
            self.practical_scale
            * 27.0
            * 2.0**t
            * self.N0
            * self.sigma2
            / (2.0 * (self.C * self.R) ** 2 * self.L**2 * self.ln_term),
        )
        return int(math.ceil(m))

    def stage_schedule(self, t: int):
        if not 0 <= t < max(self.tau, 1):
            raise ValueError(f"stage {t} outside 0..{self.tau - 1}")
        if self.method == "sstm":
            return SstmSchedule(
                a=self.a,
                L=self.L,
                B=self.B_t(t),
                N=self.N0,
                ln_term=self.ln_term,
                C=self.C,
                sigma2=self.sigma2,
                R0=self.R,
                m_factor=2.0**t,
                practical_scale=self.practical_scale,
                policy=f"restart-stage-{t}",
            )
        return SgdSchedule(
            gamma=self.gamma,
            variant="convex",
            lam=self.lam_t(t),
            m=self.m_t(t),
            N=self.N0,
            L=self.L,
            sigma2=self.sigma2,
            ln_term=self.ln_term,
            C=self.C,
            practical_scale=self.practical_scale,
            output="average",
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = "restart-plan"
        d["notes"] = list(self.notes)
        d["stages"] = [
            {
                "t": t,
                "B_t": self.B_t(t) if self.method == "sstm" else None,
                "lam_t": self.lam_t(t) if self.method == "sgd" else None,
                "m_t": self.m_t(t) if self.method == "sgd" else None,
            }
            for t in range(self.tau)
        ]
        return d


def restart_count(mu: float, R: float, epsilon: float) -> int:
    """tau = ceil(log2(mu R^2 / (2 epsilon))); 0 when the target is already met.

    The halving argument is binary, so the count uses log base 2.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    ratio = mu * R * R / (2.0 * epsilon)
    if ratio <= 1.0:
        return 0
    return int(math.ceil(math.log2(ratio)))


def _fixed_point_ln(
    tau: int, beta: float, n0_of_ln, max_iter: int = 100
) -> tuple[int, float, int]:
    """Solve ln_term = ln(4 N0 tau / beta) with N0 = n0_of_ln(ln_term)."""
    ln_term = 2.0
    N0 = max(1, n0_of_ln(ln_term))
    for it in range(1, max_iter + 1):
        ln_new = math.log(4.0 * N0 * max(tau, 1) / beta)
        N0_new = max(1, n0_of_ln(ln_new))
        if N0_new == N0 and abs(ln_new - ln_term) < 1e-12:
            if ln_new < 2.0:
                raise ValueError(
                    f"ln(4 N0 tau / beta) = {ln_new:.4f} < 2 at the fixed point"
                )
            return N0, ln_new, it
        N0, ln_term = N0_new, ln_new
    raise RuntimeError(
        f"restart sizing did not reach a fixed point in {max_iter} iterations"
    )


def restart_plan_sstm(
    L: float,
    mu: float,
    sigma2: float,
    r0: float,
    epsilon: float,
    beta: float,
    C: float = C_SSTM,
    practical_scale: float = 1.0,
) -> RestartPlan:
    """Accelerated restart plan: R = sqrt(2 r0 / mu), N0 >= C sqrt(8 a L / mu),
    B_t halving and m_k^t doubling per stage.

    `r0` is f(x0) - f* (or any upper bound on it); the inner stepsize
    coefficient `a` and N0 are resolved jointly with ln(4 N0 tau / beta) by
    fixed-point iteration.
    """
    if mu <= 0:
        raise ValueError("restarts require mu > 0")
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    R = math.sqrt(2.0 * r0 / mu)
    tau = restart_count(mu, R, epsilon)
    if tau == 0:
        return RestartPlan(
            method="sstm", N0=0, tau=0, R=R, L=L, mu=mu, sigma2=sigma2,
            beta=beta, ln_term=2.0, C=C, a=1.0,
            provenance="target already met (epsilon >= r0)",
        )

    a_holder = {}

    def n0_of_ln(ln_term: float) -> int:
        a = _sstm_a_lower_bound(ln_term, C, practical_scale)
        a_holder["a"] = a
        return int(math.ceil(C * math.sqrt(8.0 * a * L / mu)))

    N0, ln_term, iters = _fixed_point_ln(tau, beta, n0_of_ln)
    return RestartPlan(
        method="sstm",
        N0=N0,
        tau=tau,
        R=R,
        L=L,
        mu=mu,
        sigma2=sigma2,
        beta=beta,
        ln_term=ln_term,
        C=C,
        a=a_holder["a"],
        practical_scale=practical_scale,
        provenance="strongly-convex accelerated restart theorem",
        fixed_point_iters=iters,
    )


def restart_plan_sgd(
    L: float,
    mu: float,
    sigma2: float,
    r0: float,
    epsilon: float,
    beta: float,
    C: float = C_SGD,
    practical_scale: float = 1.0,
) -> RestartPlan:
    """SGD restart plan: N0 / ln(4 N0 tau / beta) >= 320 C^2 L / mu, constant
    per-stage batch m^t doubling in t, gamma = 1/(80 L ln(4 N0 tau / beta))."""
    if mu <= 0:
        raise ValueError("restarts require mu > 0")
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    R = math.sqrt(2.0 * r0 / mu)
    tau = restart_count(mu, R, epsilon)
    if tau == 0:
        return RestartPlan(
            method="sgd", N0=0, tau=0, R=R, L=L, mu=mu, sigma2=sigma2,
            beta=beta, ln_term=2.0, C=C, gamma=0.0,
            provenance="target already met (epsilon >= r0)",
        )

    s = practical_scale

    def n0_of_ln(ln_term: float) -> int:
        return int(math.ceil(s * 320.0 * C**2 * L / mu * ln_term))

    N0, ln_term, iters = _fixed_point_ln(tau, beta, n0_of_ln)
    gamma = 1.0 / (s * 80.0 * L * ln_term)
    return RestartPlan(
        method="sgd",
        N0=N0,
        tau=tau,
        R=R,
        L=L,
        mu=mu,
        sigma2=sigma2,
        beta=beta,
        ln_term=ln_term,
        C=C,
        gamma=gamma,
        practical_scale=practical_scale,
        provenance="strongly-convex SGD restart theorem",
        fixed_point_iters=iters,
    )


def small_batch_restart_params(
    L: float,
    mu: float,
    sigma2: float,
    epsilon: float,
    beta: float,
    R: float,
    theta_a: float = 1.0,
    theta_n: float = 1.0,
    C: float = C_SSTM,
    practical_scale: float = 1.0,
) -> RestartPlan:
    """Constant-batch restart sizing: a ~ theta_a sigma^4 ln^2(N0 tau/beta)
    / (L mu eps^2) and N0 ~ theta_n sqrt(a L / mu), solved to a fixed point.

    All stage batches m_k^t then evaluate to an epsilon-independent constant.
    The proportionality constants default to 1 and are exposed as knobs;
    sigma = 0 degenerates to the exact theorem plan (every batch is 1).
    """
    if mu <= 0 or R <= 0:
        raise ValueError("need mu > 0 and R > 0")
    r0 = mu * R * R / 2.0
    if sigma2 <= 0.0:
        plan = restart_plan_sstm(L, mu, 0.0, r0, epsilon, beta, C, practical_scale)
        return RestartPlan(
            **{**_plan_fields(plan), "provenance": "small-batch corollary (sigma = 0 fallback)"}
        )
    tau = restart_count(mu, R, epsilon)
    if tau == 0:
        return restart_plan_sstm(L, mu, sigma2, r0, epsilon, beta, C, practical_scale)

    a_holder = {}

    def n0_of_ln(ln4_term: float) -> int:
        # the corollary's log is ln(N0 tau / beta): recover it from ln(4 N0 tau/beta)
        ln0 = max(ln4_term - math.log(4.0), 1e-9)
        a = theta_a * sigma2**2 * ln0**2 / (L * mu * epsilon**2)
        a_holder["a"] = a
        return max(1, int(math.ceil(theta_n * math.sqrt(a * L / mu))))

    N0, ln_term, iters = _fixed_point_ln(tau, beta, n0_of_ln)
    return RestartPlan(
        method="sstm",
        N0=N0,
        tau=tau,
        R=R,
        L=L,
        mu=mu,
        sigma2=sigma2,
        beta=beta,
        ln_term=ln_term,
        C=C,
        a=a_holder["a"],
        practical_scale=practical_scale,
        provenance="small-batch restart corollary",
        fixed_point_iters=iters,
    )


def _plan_fields(plan: RestartPlan) -> dict:
    d = asdict(plan)
    d["notes"] = tuple(d["notes"])
    return d
