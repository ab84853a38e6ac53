"""End-to-end experiment harness over shipped or user-supplied instances.

An experiment takes a promise instance (Hamiltonian file with a
``#promise`` line), builds the synthetic two-stage verifier, sweeps
witness fidelities and perturbation directions through the Theorem-1
bound chain, then feeds the exact outcome distribution into the
Theorem-2 envelope suite, and finally checks that folding the two
postselection registers into one via TOFFOLI changes nothing.

Experiment configuration is a flat ``key = value`` text file; every key
can be overridden on the command line.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .hamiltonians import (
    LocalHamiltonian,
    PromiseInstance,
    parse_hamiltonian_with_promise,
    promise_label,
    scale_shift,
    ground,
)
from .postselect import event_mass
from .states import QuantumState, tensor, tensor_power
from .theorem1 import (
    PairResult,
    SyntheticVerifier,
    branch_stats,
    build_synthetic_verifier,
    check_propagation,
    perturbation_directions,
    theorem1_verdict,
)
from .theorem2 import (
    envelope_optimize,
    subset_check,
    theorem2_verdict,
    vertex_optimize,
)
from .verifier import povm_circuit, accept_probability, verify_instance

MERGE_ATOL = 1e-12
POVM_ATOL = 1e-10
VERTEX_ATOL = 1e-9
VERTEX_SUPPORT_CAP = 8

_CONFIG_TYPES = {
    "instance": str,
    "m_prime": int,
    "k": int,
    "s": int,
    "kappa": float,
    "c": float,
    "delta": float,
    "r": float,
    "directions": int,
    "seed": int,
    "subsets": int,
    "inject": str,
}


@dataclass
class ExperimentConfig:
    instance: str
    m_prime: int = 1
    k: int = 1
    s: int = 12
    kappa: float = 1.0
    c: float = 1.1
    delta: float = 0.1
    r: float = 0.5
    directions: int = 20
    seed: int = 0
    subsets: int = 100
    inject: str = "none"

    def __post_init__(self):
        if self.m_prime < 1 or self.k < 1:
            raise ValueError("m_prime and k must be >= 1")
        if self.s < 4 or self.s % 4 != 0:
            raise ValueError(f"s must be a positive multiple of 4, got {self.s}")
        if not 0.0 < self.delta < 0.5:
            raise ValueError(f"delta must lie in (0, 1/2), got {self.delta!r}")
        if not 0.0 < self.r <= 1.0:
            raise ValueError(f"r must lie in (0, 1], got {self.r!r}")
        if self.c < 1.0:
            raise ValueError(f"c must be >= 1, got {self.c!r}")
        if self.kappa <= 0.0:
            raise ValueError(f"kappa must be positive, got {self.kappa!r}")
        if self.directions < 1 or self.subsets < 0:
            raise ValueError("directions must be >= 1 and subsets >= 0")
        if self.inject not in ("none", "envelope"):
            raise ValueError(f"inject must be none or envelope, got {self.inject!r}")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def parse_experiment_config(text: str) -> ExperimentConfig:
    values: dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if "=" not in line:
            raise ValueError(f"line {line_no}: expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_TYPES:
            raise ValueError(f"line {line_no}: unknown config key {key!r}")
        if key in values:
            raise ValueError(f"line {line_no}: duplicate config key {key!r}")
        try:
            values[key] = _CONFIG_TYPES[key](value)
        except ValueError:
            raise ValueError(f"line {line_no}: bad value {value!r} for key {key!r}")
    if "instance" not in values:
        raise ValueError("config is missing the required key 'instance'")
    return ExperimentConfig(**values)


def apply_overrides(cfg: ExperimentConfig, pairs) -> ExperimentConfig:
    """Apply ``key=value`` strings (from repeated --set flags) onto a config."""
    updates = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"override {pair!r} is not of the form key=value")
        key, _, value = pair.partition("=")
        key = key.strip()
        if key not in _CONFIG_TYPES:
            raise ValueError(f"unknown config key {key!r}")
        try:
            updates[key] = _CONFIG_TYPES[key](value.strip())
        except ValueError:
            raise ValueError(f"bad value {value!r} for key {key!r}")
    return replace(cfg, **updates)


# ----------------------------------------------------------------------
# instance loading


@dataclass
class InstanceData:
    name: str
    hamiltonian: LocalHamiltonian
    a: float
    b: float

    @property
    def promise(self) -> PromiseInstance:
        return PromiseInstance(self.hamiltonian, self.a, self.b)


def builtin_instance_names() -> list[str]:
    root = resources.files("postlab") / "instances"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ham"))


def load_instance(name_or_path: str) -> InstanceData:
    """Load a named builtin instance or a .ham file path, promise line required."""
    if "/" not in name_or_path and not name_or_path.endswith(".ham"):
        ref = resources.files("postlab") / "instances" / f"{name_or_path}.ham"
        if not ref.is_file():
            raise ValueError(
                f"unknown instance {name_or_path!r}; builtins: {builtin_instance_names()}"
            )
        text = ref.read_text()
        name = name_or_path
    else:
        path = Path(name_or_path)
        text = path.read_text()
        name = path.stem
    h, promise = parse_hamiltonian_with_promise(text)
    if promise is None:
        raise ValueError(f"instance {name!r} has no #promise line")
    return InstanceData(name=name, hamiltonian=h, a=promise[0], b=promise[1])


def builtin_config(name: str) -> ExperimentConfig:
    ref = resources.files("postlab") / "instances" / f"{name}.cfg"
    if not ref.is_file():
        raise ValueError(f"no builtin config for instance {name!r}")
    return parse_experiment_config(ref.read_text())


def load_config(name_or_path: str) -> ExperimentConfig:
    if "/" not in name_or_path and not name_or_path.endswith(".cfg"):
        return builtin_config(name_or_path)
    return parse_experiment_config(Path(name_or_path).read_text())


# ----------------------------------------------------------------------
# fidelity sweep


@dataclass
class SweepRow:
    grid: str
    mode: str
    direction: str
    f_per_copy: float
    joint_fidelity: float
    eps: float
    bound: float
    d_joint: float
    d_post: float
    yes_lb: float | None
    no_ub: float | None
    cond_exact: float
    cond_approx: float
    p_exact: float
    p_approx: float
    pass_propagation: bool
    pass_verdict: bool
    pass_floor: bool
    vacuous: bool
    precondition_ok: bool

    def __post_init__(self):
        # numpy scalars sneak in through the bound arithmetic; JSON and the
        # CSV booleans need native types
        for fld in ("f_per_copy", "joint_fidelity", "eps", "bound", "d_joint",
                    "d_post", "yes_lb", "no_ub", "cond_exact", "cond_approx",
                    "p_exact", "p_approx"):
            value = getattr(self, fld)
            if value is not None:
                object.__setattr__(self, fld, float(value))
        for fld in ("pass_propagation", "pass_verdict", "pass_floor",
                    "vacuous", "precondition_ok"):
            object.__setattr__(self, fld, bool(getattr(self, fld)))


def fidelity_grid(cfg: ExperimentConfig) -> list[tuple[str, float]]:
    """Joint-fidelity targets: 1, then 1 - 2^-j for j = 4, 8, ..., s, then
    the schedule value 1 - kappa * 2^-4k if it is not already present."""
    points = [("1", 1.0)]
    j = 4
    while j <= cfg.s:
        points.append((f"1-2^-{j}", 1.0 - 2.0**-j))
        j += 4
    schedule = 1.0 - cfg.kappa * 2.0 ** (-4 * cfg.k)
    if schedule < 0.0:
        raise ValueError(f"kappa {cfg.kappa!r} too large for k={cfg.k}")
    if all(abs(schedule - v) > 1e-15 for _, v in points):
        points.append(("schedule", schedule))
    return points


def _mix_distributions(parts: list[tuple[float, dict[str, float]]]) -> dict[str, float]:
    out: dict[str, float] = {}
    for weight, dist in parts:
        if weight == 0.0:
            continue
        for key, prob in dist.items():
            out[key] = out.get(key, 0.0) + weight * prob
    return out


class SweepRunner:
    """Caches per-direction pure branch runs so the fidelity grid is cheap.

    A rank-2 mixed witness tensor power is a convex mixture of pure
    product branches over {g, d}; outcome probabilities are mixed with
    the same weights, which reproduces the density-matrix pipeline
    exactly (checked against it in the acceptance battery).
    """

    def __init__(self, sv: SyntheticVerifier, g: QuantumState):
        self.sv = sv
        self.g = g
        self.exact_dist = sv.run(tensor_power(g, sv.m_prime))
        self.exact_stats = branch_stats(sv, self.exact_dist)

    def _branches(self, direction: QuantumState) -> dict[tuple[str, ...], dict[str, float]]:
        vectors = {"g": self.g, "d": direction}
        out = {}
        for combo in itertools.product(("g", "d"), repeat=self.sv.m_prime):
            if all(sym == "g" for sym in combo):
                out[combo] = self.exact_dist
                continue
            block = vectors[combo[0]]
            for sym in combo[1:]:
                block = tensor(block, vectors[sym])
            out[combo] = self.sv.run(block)
        return out

    def pair(self, f: float, direction: QuantumState, mode: str, name: str,
             branches=None) -> PairResult:
        from .theorem1 import approx_state

        m = self.sv.m_prime
        if mode == "pure":
            block = tensor_power(approx_state(self.g, f, direction, "pure"), m)
            dist = self.sv.run(block)
        else:
            if branches is None:
                branches = self._branches(direction)
            parts = []
            for combo, d in branches.items():
                w = 1.0
                for sym in combo:
                    w *= f if sym == "g" else (1.0 - f)
                parts.append((w, d))
            dist = _mix_distributions(parts)
        approx = branch_stats(self.sv, dist)
        return PairResult(
            exact=self.exact_stats,
            approx=approx,
            fidelity_per_copy=f,
            joint_fidelity=f**m,
            m_prime=m,
            mode=mode,
            direction_name=name,
        )


def run_sweep(
    sv: SyntheticVerifier,
    g: QuantumState,
    directions: list[tuple[str, QuantumState]],
    cfg: ExperimentConfig,
    label: str,
    runner: SweepRunner | None = None,
) -> list[SweepRow]:
    if runner is None:
        runner = SweepRunner(sv, g)
    grid = fidelity_grid(cfg)
    rows: list[SweepRow] = []
    for dir_name, direction in directions:
        branches = runner._branches(direction)
        for mode in ("pure", "mixed"):
            for grid_name, joint in grid:
                f = joint ** (1.0 / sv.m_prime)
                pair = runner.pair(f, direction, mode, dir_name,
                                   branches=branches if mode == "mixed" else None)
                prop = check_propagation(pair)
                verdict = theorem1_verdict(pair, cfg.delta, cfg.k, cfg.r, label)
                rows.append(SweepRow(
                    grid=grid_name,
                    mode=mode,
                    direction=dir_name,
                    f_per_copy=f,
                    joint_fidelity=pair.joint_fidelity,
                    eps=prop.eps,
                    bound=prop.bound,
                    d_joint=prop.d_joint,
                    d_post=prop.d_marginal,
                    yes_lb=verdict.yes_lower,
                    no_ub=verdict.no_upper,
                    cond_exact=pair.exact.conditional,
                    cond_approx=pair.approx.conditional,
                    p_exact=pair.exact.p_success,
                    p_approx=pair.approx.p_success,
                    pass_propagation=prop.joint_ok and prop.marginal_ok,
                    pass_verdict=verdict.bound_ok,
                    pass_floor=verdict.floor_ok,
                    vacuous=verdict.vacuous,
                    precondition_ok=verdict.precondition_ok,
                ))
    return rows


# ----------------------------------------------------------------------
# report assembly


@dataclass
class InequalityRow:
    name: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    note: str = ""


@dataclass
class ExperimentReport:
    meta: dict
    rows: list[InequalityRow] = field(default_factory=list)
    sweep: list[SweepRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def add(self, name: str, lhs: float, rhs: float, passed: bool, note: str = ""):
        self.rows.append(InequalityRow(
            name=name, lhs=float(lhs), rhs=float(rhs),
            margin=float(lhs - rhs), passed=bool(passed), note=note,
        ))

    def to_json_dict(self) -> dict:
        return {
            "meta": self.meta,
            "passed": self.passed,
            "rows": [
                {
                    "name": r.name, "lhs": r.lhs, "rhs": r.rhs,
                    "margin": r.margin, "pass": r.passed, "note": r.note,
                }
                for r in self.rows
            ],
            "sweep": [
                {k: getattr(row, k) for k in (
                    "grid", "mode", "direction", "f_per_copy", "joint_fidelity",
                    "eps", "bound", "d_joint", "d_post", "yes_lb", "no_ub",
                    "cond_exact", "cond_approx", "p_exact", "p_approx",
                    "pass_propagation", "pass_verdict", "pass_floor",
                    "vacuous", "precondition_ok",
                )}
                for row in self.sweep
            ],
        }


def _objective_sets(dist: dict[str, float], o_index: int, conditions):
    den = {
        z for z in dist
        if all(z[q] == str(bit) for q, bit in conditions)
    }
    num = {z for z in den if z[o_index] == "1"}
    return num, den


def _conditional(dist, o_index, conditions) -> tuple[float, float, float]:
    p = event_mass(dist, conditions)
    joint = event_mass(dist, list(conditions) + [(o_index, 1)])
    return p, joint, joint / p


def _broken_envelope(q: dict[str, float], p: dict[str, float], c: float) -> dict[str, float]:
    """Deliberately push one coordinate outside the envelope (negative control)."""
    z_star = max(p, key=lambda z: (p[z], z))
    broken = dict(q)
    broken[z_star] = 1.5 * c * p[z_star]
    total = sum(broken.values())
    return {z: v / total for z, v in broken.items()}


def end_to_end(cfg: ExperimentConfig) -> ExperimentReport:
    """Run the whole pipeline on one instance and collect every inequality."""
    inst = load_instance(cfg.instance)
    label = promise_label(inst.promise)
    if label == "OUTSIDE_PROMISE":
        raise ValueError(f"instance {inst.name!r} is outside the promise")
    h = inst.hamiltonian
    spectral = ground(h)
    g = spectral.ground_state
    sv = build_synthetic_verifier(h, inst.b, cfg.m_prime, cfg.k)
    report = ExperimentReport(meta={
        "instance": inst.name,
        "label": label,
        "config": cfg.to_dict(),
        "n_qubits": h.n_qubits,
        "term_count": h.term_count,
        "ground_energy": spectral.ground_energy,
        "spectral_gap": spectral.spectral_gap,
        "degenerate": spectral.degenerate,
        "b_prime": sv.gap.b_prime,
        "threshold_eps": sv.gap.threshold_eps,
        "total_qubits": sv.circuit.n_qubits,
        "ancillas": sv.m,
    })

    # --- verifier stage on the exact ground witness
    ver = verify_instance(inst.promise, g)
    if label == "YES":
        report.add("verifier/diluted>=yes_floor", ver.witness_diluted, ver.yes_floor,
                   ver.witness_diluted >= ver.yes_floor)
    else:
        report.add("verifier/best_diluted<=no_ceiling", ver.no_ceiling, ver.best_diluted,
                   ver.best_diluted <= ver.no_ceiling)
    scaled = scale_shift(h)
    direct = accept_probability(scaled, g)
    channel = povm_circuit(scaled).accept_prob(g)
    report.add("verifier/povm_matches_affine", POVM_ATOL, abs(direct - channel),
               abs(direct - channel) <= POVM_ATOL)

    # --- fidelity sweep and bound chains
    directions = perturbation_directions(spectral, cfg.directions, cfg.seed)
    runner = SweepRunner(sv, g)
    sweep = run_sweep(sv, g, directions, cfg, label, runner=runner)
    report.sweep = sweep
    by_cell: dict[tuple[str, str], list[SweepRow]] = {}
    for row in sweep:
        by_cell.setdefault((row.grid, row.mode), []).append(row)
    worst_d = max(sweep, key=lambda r: r.d_joint)
    report.meta["worst_direction"] = worst_d.direction
    report.meta["worst_d_joint"] = worst_d.d_joint
    for (grid_name, mode), cell in sorted(by_cell.items()):
        tag = f"[{grid_name},{mode}]"
        worst = max(cell, key=lambda r: max(r.d_joint, r.d_post))
        report.add(f"thm1/propagation{tag}", worst.bound + MERGE_ATOL,
                   max(worst.d_joint, worst.d_post),
                   all(r.pass_propagation for r in cell))
        if label == "YES":
            w = min(cell, key=lambda r: r.cond_approx - (r.yes_lb or 0.0))
            report.add(f"thm1/yes_lower{tag}", w.cond_approx, w.yes_lb,
                       all(r.pass_verdict for r in cell),
                       note="" if w.yes_lb > 0.5 else "weak bound (<= 1/2)")
        else:
            if any(r.vacuous for r in cell):
                report.add(f"thm1/no_upper{tag}", 0.0, 0.0, True,
                           note="vacuous: 2^-k - 2*sqrt(eps) <= 0")
            else:
                w = max(cell, key=lambda r: r.cond_approx - r.no_ub)
                report.add(f"thm1/no_upper{tag}", w.no_ub, w.cond_approx,
                           all(r.pass_verdict for r in cell))
        wf = min(cell, key=lambda r: cfg.r**cfg.m_prime * r.p_approx)
        floor = max(cfg.r**cfg.m_prime * (wf.p_exact - 2.0 * np.sqrt(wf.eps)),
                    cfg.r**cfg.m_prime * (2.0**-cfg.k - 2.0 * np.sqrt(wf.eps)))
        report.add(f"thm1/success_floor{tag}",
                   cfg.r**cfg.m_prime * wf.p_approx, floor,
                   all(r.pass_floor for r in cell))
    report.add("thm1/preconditions", 1.0, 0.0, all(r.precondition_ok for r in sweep),
               note="exact branch satisfies the 2^-k floor and the promise gap")

    # --- envelope optimization on the exact outcome distribution
    p_dist = runner.exact_dist
    conditions = sv.postselect_conditions(merged=True)
    num, den = _objective_sets(p_dist, sv.o_index, conditions)
    _, _, base_value = _conditional(p_dist, sv.o_index, conditions)
    env_min = envelope_optimize(p_dist, cfg.c, num, den, "min")
    env_max = envelope_optimize(p_dist, cfg.c, num, den, "max")
    extremal = env_min.value if label == "YES" else env_max.value
    t2 = theorem2_verdict(label, cfg.c, cfg.delta, cfg.k, base_value, extremal)
    report.meta["thm2"] = {
        "base_value": base_value,
        "min_value": env_min.value,
        "max_value": env_max.value,
        "closed_form": t2.closed_form,
        "in_regime": t2.in_regime,
        "boundary": t2.boundary,
        "suggested_copies": t2.suggested_copies,
        "support": len(p_dist),
    }
    report.add("thm2/sandwich_lower", env_min.value, base_value / cfg.c**2 - MERGE_ATOL,
               env_min.value >= base_value / cfg.c**2 - MERGE_ATOL)
    report.add("thm2/sandwich_upper", base_value * cfg.c**2 + MERGE_ATOL, env_max.value,
               env_max.value <= base_value * cfg.c**2 + MERGE_ATOL)
    if t2.in_regime:
        if label == "YES":
            report.add("thm2/min>1/2", env_min.value, 0.5, t2.bound_ok)
        else:
            report.add("thm2/max<1/2-2delta^2", t2.target, env_max.value, t2.bound_ok)
    else:
        report.add("thm2/regime", 1.0 + 2.0 * cfg.delta, cfg.c**2, True,
                   note=f"OUTSIDE_REGIME: c^2 >= 1+2*delta; "
                        f"majority copies to re-enter: {t2.suggested_copies}")
    report.add("thm2/precondition", 1.0, 0.0, t2.precondition_ok,
               note="base conditional respects the promise gap")
    if len(p_dist) <= VERTEX_SUPPORT_CAP:
        vx = vertex_optimize(p_dist, cfg.c, num, den, "min")
        report.add("thm2/vertex_oracle", VERTEX_ATOL, abs(vx.value - env_min.value),
                   abs(vx.value - env_min.value) <= VERTEX_ATOL)
    q_checked = env_min.q if cfg.inject == "none" else _broken_envelope(env_min.q, p_dist, cfg.c)
    sub = subset_check(p_dist, q_checked, cfg.c, cfg.subsets, cfg.seed)
    report.add("thm2/subset_envelope", float(sub.checked), float(len(sub.failures)),
               sub.passed,
               note="injected out-of-envelope q" if cfg.inject == "envelope" else "")
    sub_max = subset_check(p_dist, env_max.q, cfg.c, cfg.subsets, cfg.seed)
    report.add("thm2/subset_envelope_max", float(sub_max.checked), float(len(sub_max.failures)),
               sub_max.passed)

    # --- merging the two postselection registers must change nothing
    two_dist = sv.run(tensor_power(g, sv.m_prime), merged=False)
    two_conditions = sv.postselect_conditions(merged=False)
    p1, j1, c1 = _conditional(p_dist, sv.o_index, conditions)
    p2, j2, c2 = _conditional(two_dist, sv.o_index, two_conditions)
    report.add("merge/p_success", MERGE_ATOL, abs(p1 - p2), abs(p1 - p2) <= MERGE_ATOL)
    report.add("merge/joint", MERGE_ATOL, abs(j1 - j2), abs(j1 - j2) <= MERGE_ATOL)
    report.add("merge/conditional", MERGE_ATOL, abs(c1 - c2), abs(c1 - c2) <= MERGE_ATOL)
    num2, den2 = _objective_sets(two_dist, sv.o_index, two_conditions)
    env_min2 = envelope_optimize(two_dist, cfg.c, num2, den2, "min")
    env_max2 = envelope_optimize(two_dist, cfg.c, num2, den2, "max")
    report.add("merge/thm2_min", MERGE_ATOL, abs(env_min.value - env_min2.value),
               abs(env_min.value - env_min2.value) <= MERGE_ATOL)
    report.add("merge/thm2_max", MERGE_ATOL, abs(env_max.value - env_max2.value),
               abs(env_max.value - env_max2.value) <= MERGE_ATOL)
    extremal2 = env_min2.value if label == "YES" else env_max2.value
    t2b = theorem2_verdict(label, cfg.c, cfg.delta, cfg.k, c2, extremal2)
    report.add("merge/thm2_verdict", float(t2.bound_ok), float(t2b.bound_ok),
               t2.bound_ok == t2b.bound_ok and t2.in_regime == t2b.in_regime)
    return report
