"""Multiplicative-envelope robustness of postselected acceptance statistics.

Given a base outcome distribution {p_z}, the envelope at ratio c >= 1
is the set of distributions q with p_z / c <= q_z <= c * p_z for every
outcome and sum 1.  The conditional acceptance Pr[o=1 | p=1] under any
q in the envelope is sandwiched inside [base/c^2, base*c^2], and inside
the regime c^2 < 1 + 2*delta a promise gap of delta survives: YES-side
conditionals stay above 1/2 and NO-side ones below 1/2 - 2*delta^2.

The extremal conditionals over the envelope form a linear-fractional
program; the production solver is Dinkelbach's parametric iteration
(each step a continuous knapsack), cross-checked elsewhere against
brute-force vertex enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DINKELBACH_TOL = 1e-12
SANDWICH_SLACK = 1e-12
SUBSET_ATOL = 1e-12


def _prepare(p: dict[str, float], c: float, numerator, denominator):
    if c < 1.0:
        raise ValueError(f"envelope ratio c must be >= 1, got {c!r}")
    keys = list(p.keys())
    pz = np.array([p[z] for z in keys], dtype=float)
    if np.any(pz < 0.0):
        raise ValueError("base distribution has negative mass")
    total = float(pz.sum())
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"base distribution sums to {total!r}, expected 1")
    num_set = set(numerator)
    den_set = set(denominator)
    if not num_set <= den_set:
        raise ValueError("numerator outcomes must be a subset of denominator outcomes")
    unknown = (num_set | den_set) - set(keys)
    if unknown:
        raise ValueError(f"objective references unknown outcomes {sorted(unknown)[:4]}")
    num_mask = np.array([z in num_set for z in keys], dtype=float)
    den_mask = np.array([z in den_set for z in keys], dtype=float)
    if float(pz @ den_mask) <= 0.0:
        raise ValueError("conditioning event has zero base probability")
    return keys, pz, num_mask, den_mask


def _knapsack(weights: np.ndarray, lower: np.ndarray, upper: np.ndarray, sense: str) -> np.ndarray:
    """Optimize a linear function over the box intersected with the simplex.

    Fills coordinates from the lower bounds in weight order until the
    unit budget is spent; stable argsort keeps the solution
    deterministic under weight ties.
    """
    q = lower.copy()
    budget = 1.0 - float(lower.sum())
    if budget <= 0.0:
        return q
    order = np.argsort(weights, kind="stable")
    if sense == "max":
        order = order[::-1]
    for idx in order:
        room = upper[idx] - lower[idx]
        take = min(room, budget)
        q[idx] += take
        budget -= take
        if budget <= 1e-18:
            break
    return q


@dataclass
class EnvelopeSolution:
    value: float
    q: dict[str, float]
    iterations: int
    base_value: float


def envelope_optimize(
    p: dict[str, float],
    c: float,
    numerator,
    denominator,
    sense: str = "min",
) -> EnvelopeSolution:
    """Extremal conditional mass(numerator)/mass(denominator) over the envelope.

    Dinkelbach parametric iteration: at ratio guess lam, optimize the
    linear surrogate N(q) - lam*D(q) over the envelope polytope (a
    continuous knapsack); the optimizer's ratio becomes the next guess.
    Terminates when the surrogate optimum reaches zero within 1e-12.
    """
    if sense not in ("min", "max"):
        raise ValueError(f"sense must be min or max, got {sense!r}")
    keys, pz, num_mask, den_mask = _prepare(p, c, numerator, denominator)
    lower = pz / c
    upper = pz * c
    base_value = float(pz @ num_mask) / float(pz @ den_mask)
    lam = base_value
    q = pz.copy()
    for iteration in range(1, 200):
        weights = num_mask - lam * den_mask
        q = _knapsack(weights, lower, upper, sense)
        num = float(q @ num_mask)
        den = float(q @ den_mask)
        if den <= 0.0:
            raise ValueError("conditioning event lost all mass inside the envelope")
        surplus = num - lam * den
        new_lam = num / den
        if abs(surplus) <= DINKELBACH_TOL * max(1.0, den) or abs(new_lam - lam) <= DINKELBACH_TOL:
            lam = new_lam
            break
        lam = new_lam
    return EnvelopeSolution(
        value=float(lam),
        q={z: float(v) for z, v in zip(keys, q)},
        iterations=iteration,
        base_value=base_value,
    )


def vertex_optimize(
    p: dict[str, float],
    c: float,
    numerator,
    denominator,
    sense: str = "min",
    support_cap: int = 8,
) -> EnvelopeSolution:
    """Brute-force oracle: best ratio over all vertices of the envelope polytope.

    A vertex pins every coordinate but one to a bound, the last being
    fixed by the unit-sum constraint.  Only intended for supports up to
    `support_cap` outcomes.
    """
    keys, pz, num_mask, den_mask = _prepare(p, c, numerator, denominator)
    s = len(keys)
    if s > support_cap:
        raise ValueError(f"vertex enumeration capped at support {support_cap}, got {s}")
    lower = pz / c
    upper = pz * c
    best = None
    best_q = None
    for free in range(s):
        others = [i for i in range(s) if i != free]
        for pattern in range(1 << (s - 1)):
            q = np.empty(s)
            for j, idx in enumerate(others):
                q[idx] = upper[idx] if (pattern >> j) & 1 else lower[idx]
            rest = 1.0 - q[others].sum() if others else 1.0
            if rest < lower[free] - 1e-12 or rest > upper[free] + 1e-12:
                continue
            q[free] = min(max(rest, lower[free]), upper[free])
            den = float(q @ den_mask)
            if den <= 0.0:
                continue
            value = float(q @ num_mask) / den
            better = best is None or (value < best if sense == "min" else value > best)
            if better:
                best = value
                best_q = q.copy()
    if best is None:
        raise ValueError("no feasible vertex found")
    return EnvelopeSolution(
        value=best,
        q={z: float(v) for z, v in zip(keys, best_q)},
        iterations=0,
        base_value=float(pz @ num_mask) / float(pz @ den_mask),
    )


@dataclass
class SubsetCheckResult:
    passed: bool
    checked: int
    failures: list[str] = field(default_factory=list)


def subset_check(
    p: dict[str, float],
    q: dict[str, float],
    c: float,
    num_subsets: int = 100,
    seed: int = 0,
    atol: float = SUBSET_ATOL,
) -> SubsetCheckResult:
    """Verify sum_S p / c <= sum_S q <= c * sum_S p over many outcome subsets.

    Checks the empty set, every singleton, the full support, and
    `num_subsets` seeded random subsets.  The multiplicative envelope is
    closed under summation, so any failure flags a q outside the
    envelope (the negative-control path relies on this).
    """
    if c < 1.0:
        raise ValueError(f"envelope ratio c must be >= 1, got {c!r}")
    keys = sorted(set(p) | set(q))
    pa = np.array([p.get(z, 0.0) for z in keys])
    qa = np.array([q.get(z, 0.0) for z in keys])
    rng = np.random.default_rng(seed)
    masks = [np.zeros(len(keys), dtype=bool), np.ones(len(keys), dtype=bool)]
    for i in range(len(keys)):
        m = np.zeros(len(keys), dtype=bool)
        m[i] = True
        masks.append(m)
    for _ in range(num_subsets):
        masks.append(rng.random(len(keys)) < 0.5)
    failures = []
    for m in masks:
        ps = float(pa[m].sum())
        qs = float(qa[m].sum())
        if not (ps / c - atol <= qs <= c * ps + atol):
            failures.append(
                f"subset of size {int(m.sum())}: p-mass {ps!r}, q-mass {qs!r}, c {c!r}"
            )
    return SubsetCheckResult(passed=not failures, checked=len(masks), failures=failures)


@dataclass
class Theorem2Verdict:
    label: str
    c: float
    delta: float
    k_prime: int
    base_value: float
    extremal_value: float
    closed_form: float
    target: float
    in_regime: bool
    boundary: bool
    sandwich_ok: bool
    bound_ok: bool
    precondition_ok: bool
    suggested_copies: int | None


def _copies_to_enter_regime(c: float, delta: float, cap: int = 99) -> int | None:
    """Smallest odd majority-vote count whose amplified gap re-enters the regime."""
    from .verifier import amplify_majority

    for copies in range(1, cap + 1, 2):
        amplified = amplify_majority(0.5 + delta, copies) - 0.5
        if c * c < 1.0 + 2.0 * amplified:
            return copies
    return None


def theorem2_verdict(
    label: str,
    c: float,
    delta: float,
    k_prime: int,
    base_value: float,
    extremal_value: float,
) -> Theorem2Verdict:
    """Judge an extremal envelope conditional against the closed-form targets.

    YES: minimum stays above 1/2 (closed form (1/2+delta)/c^2); NO:
    maximum stays below 1/2 - 2*delta^2 (closed form c^2*(1/2-delta)).
    Requires the regime c^2 < 1 + 2*delta; outside it the verdict is
    flagged rather than failed, with a majority-vote copy count that
    would re-enter the regime.  k_prime records the envelope consumer's
    own postselection floor exponent (bookkeeping only).
    """
    if label not in ("YES", "NO"):
        raise ValueError(f"label must be YES or NO, got {label!r}")
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta!r}")
    if c < 1.0:
        raise ValueError(f"envelope ratio c must be >= 1, got {c!r}")
    if k_prime < 0:
        raise ValueError(f"k_prime must be >= 0, got {k_prime!r}")
    c2 = c * c
    in_regime = c2 < 1.0 + 2.0 * delta
    boundary = abs(c2 - (1.0 + 2.0 * delta)) <= 1e-12
    if label == "YES":
        closed = (0.5 + delta) / c2
        target = 0.5
        precondition_ok = base_value >= 0.5 + delta - 1e-12
        sandwich_ok = extremal_value >= base_value / c2 - SANDWICH_SLACK
        bound_ok = (not in_regime) or extremal_value > target
    else:
        closed = c2 * (0.5 - delta)
        target = 0.5 - 2.0 * delta * delta
        precondition_ok = base_value <= 0.5 - delta + 1e-12
        sandwich_ok = extremal_value <= base_value * c2 + SANDWICH_SLACK
        bound_ok = (not in_regime) or extremal_value < target
    return Theorem2Verdict(
        label=label,
        c=c,
        delta=delta,
        k_prime=k_prime,
        base_value=base_value,
        extremal_value=extremal_value,
        closed_form=closed,
        target=target,
        in_regime=in_regime,
        boundary=boundary,
        sandwich_ok=sandwich_ok,
        bound_ok=bound_ok,
        precondition_ok=precondition_ok,
        suggested_copies=None if in_regime else _copies_to_enter_regime(c, delta),
    )
