"""Command line front end.

Subcommands: ham (inspect an instance file), verify (diluted-energy
verifier), thm1 (fidelity sweep and bound chains), thm2 (envelope
optimization suite), e2e (full pipeline), suite (acceptance battery).
Exit codes: 0 on success, 1 when an inequality fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    apply_overrides,
    builtin_instance_names,
    end_to_end,
    load_config,
    load_instance,
)
from .hamiltonians import (
    PromiseInstance,
    ground,
    parse_hamiltonian_with_promise,
    promise_label,
    scale_shift,
)
from .report import write_report
from .verifier import GapParameters, accept_probability, povm_circuit, verify_instance

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _read_instance_text(target: str) -> tuple[str, str]:
    """Resolve a builtin instance name or a file path to (name, text)."""
    if "/" not in target and not target.endswith(".ham"):
        ref = resources.files("postlab") / "instances" / f"{target}.ham"
        if ref.is_file():
            return target, ref.read_text()
        raise ValueError(
            f"unknown instance {target!r}; builtins: {builtin_instance_names()}"
        )
    path = Path(target)
    return path.stem, path.read_text()


def _resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.set:
        cfg = apply_overrides(cfg, args.set)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def _add_run_options(sub, default_config="I1"):
    sub.add_argument("--config", default=default_config,
                     help="builtin instance name or .cfg path (default %(default)s)")
    sub.add_argument("--set", action="append", metavar="KEY=VALUE", default=[],
                     help="override a config key; repeatable")
    _add_output_options(sub)


def _add_output_options(sub):
    sub.add_argument("--seed", type=int, default=None, help="override the config seed")
    sub.add_argument("--out", type=Path, default=None,
                     help="directory for delimited reports and figures")
    sub.add_argument("--format", choices=("csv", "json", "both"), default="both",
                     dest="fmt", help="which delimited views to write")


def _print_rows(report: ExperimentReport, verbose_fail=True) -> int:
    failed = [r for r in report.rows if not r.passed]
    print(f"rows {len(report.rows)} passed {len(report.rows) - len(failed)} "
          f"failed {len(failed)}")
    if verbose_fail:
        for r in failed:
            print(f"FAIL {r.name} lhs={r.lhs!r} rhs={r.rhs!r} note={r.note}")
    return EXIT_FAIL if failed else EXIT_OK


def _emit(report: ExperimentReport, args, stem: str, figures=()) -> None:
    if args.out is None:
        return
    written = write_report(report, args.out, stem, args.fmt)
    for fn in figures:
        written.extend(fn(args.out, stem))
    for path in written:
        print(f"wrote {path}")


def cmd_ham(args) -> int:
    name, text = _read_instance_text(args.target)
    h, promise = parse_hamiltonian_with_promise(text)
    a = args.a if args.a is not None else (promise[0] if promise else None)
    b = args.b if args.b is not None else (promise[1] if promise else None)
    spectral = ground(h)
    t = float(h.term_count)
    info = {
        "instance": name,
        "qubits": h.n_qubits,
        "terms": h.term_count,
        "t": t,
        "ground_energy": spectral.ground_energy,
        "spectral_gap": spectral.spectral_gap,
        "degenerate": spectral.degenerate,
        "scaled_ground_energy": (spectral.ground_energy + t) / 2.0,
    }
    if b is not None:
        inst = PromiseInstance(h, 0.0 if a is None else a, b)
        info["a"] = inst.a
        info["b"] = inst.b
        info["b_prime"] = GapParameters(term_count=h.term_count, b=b).b_prime
        info["label"] = promise_label(inst)
    for key, value in info.items():
        print(f"{key} {value!r}" if isinstance(value, float) else f"{key} {value}")
    amps = spectral.ground_state.vector
    order = np.argsort(-np.abs(amps), kind="stable")[:8]
    print("ground_state (largest amplitudes):")
    for i in order:
        if abs(amps[i]) < 1e-12:
            continue
        print(f"  {format(int(i), f'0{h.n_qubits}b')} {complex(amps[i])!r}")
    if args.out is not None:
        report = ExperimentReport(meta=info)
        for key, value in info.items():
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                report.add(f"ham/{key}", float(value), float(value), True)
        _emit(report, args, "ham")
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = load_instance(args.target)
    a = inst.a if args.a is None else args.a
    b = inst.b if args.b is None else args.b
    instance = PromiseInstance(inst.hamiltonian, a, b)
    spectral = ground(inst.hamiltonian)
    witness = spectral.ground_state
    ver = verify_instance(instance, witness)
    scaled = scale_shift(inst.hamiltonian)
    direct = accept_probability(scaled, witness)
    channel = povm_circuit(scaled).accept_prob(witness)
    report = ExperimentReport(meta={
        "instance": inst.name,
        "label": ver.label,
        "verdict": ver.verdict,
        "margin": ver.margin,
        "witness_diluted": ver.witness_diluted,
        "best_diluted": ver.best_diluted,
        "yes_floor": ver.yes_floor,
        "no_ceiling": ver.no_ceiling,
        "b_prime": ver.gap.b_prime,
        "ground_energy": ver.ground_energy,
    })
    if ver.label == "YES":
        report.add("verifier/diluted>=yes_floor", ver.witness_diluted, ver.yes_floor,
                   ver.witness_diluted >= ver.yes_floor)
    else:
        report.add("verifier/best_diluted<=no_ceiling", ver.no_ceiling,
                   ver.best_diluted, ver.best_diluted <= ver.no_ceiling)
    report.add("verifier/verdict_matches_label", 1.0, 0.0, ver.verdict == ver.label,
               note=f"label={ver.label} verdict={ver.verdict}")
    report.add("verifier/povm_matches_affine", 1e-10, abs(direct - channel),
               abs(direct - channel) <= 1e-10)
    print(f"instance {inst.name} label {ver.label} verdict {ver.verdict} "
          f"margin {ver.margin!r}")
    code = _print_rows(report)
    _emit(report, args, "verify", figures=(_rows_figure(report),))
    return code


def _rows_figure(report):
    def render(out_dir, stem):
        from .plots import render_rows

        return render_rows(report.rows, out_dir, stem)

    return render


def _sweep_figure(report):
    def render(out_dir, stem):
        from .plots import render_sweep

        return render_sweep(report.sweep, out_dir, stem)

    return render


def _envelope_figure(report, cfg):
    def render(out_dir, stem):
        from .plots import render_envelope

        return render_envelope(report.meta["thm2"], cfg.c, cfg.delta, out_dir, stem)

    return render


def _sliced(report: ExperimentReport, prefix: str, keep_sweep: bool) -> ExperimentReport:
    return ExperimentReport(
        meta=report.meta,
        rows=[r for r in report.rows if r.name.startswith(prefix)],
        sweep=report.sweep if keep_sweep else [],
    )


def cmd_thm1(args) -> int:
    cfg = _resolve_config(args)
    part = _sliced(end_to_end(cfg), "thm1/", keep_sweep=True)
    meta = part.meta
    print(f"instance {meta['instance']} label {meta['label']} "
          f"m_prime {cfg.m_prime} k {cfg.k} sweep_rows {len(part.sweep)}")
    code = _print_rows(part)
    _emit(part, args, "thm1", figures=(_sweep_figure(part), _rows_figure(part)))
    return code


def cmd_thm2(args) -> int:
    cfg = _resolve_config(args)
    part = _sliced(end_to_end(cfg), "thm2/", keep_sweep=False)
    t2 = part.meta["thm2"]
    print(f"instance {part.meta['instance']} label {part.meta['label']} "
          f"c {cfg.c!r} delta {cfg.delta!r} "
          f"min {t2['min_value']!r} max {t2['max_value']!r}")
    if not t2["in_regime"]:
        copies = t2["suggested_copies"]
        hint = (f"suggested majority copies {copies}" if copies is not None
                else "no majority copy count restores the regime for this c")
        print(f"warning: outside amplification regime (c^2 = {cfg.c ** 2!r} >= "
              f"1 + 2*delta = {1.0 + 2.0 * cfg.delta!r}); {hint}")
    code = _print_rows(part)
    _emit(part, args, "thm2", figures=(_envelope_figure(part, cfg), _rows_figure(part)))
    return code


def cmd_e2e(args) -> int:
    cfg = _resolve_config(args)
    report = end_to_end(cfg)
    meta = report.meta
    print(f"instance {meta['instance']} label {meta['label']} "
          f"qubits {meta['total_qubits']} sweep_rows {len(report.sweep)}")
    code = _print_rows(report)
    _emit(report, args, "e2e",
          figures=(_sweep_figure(report), _envelope_figure(report, cfg),
                   _rows_figure(report)))
    return code


def cmd_suite(args) -> int:
    from .acceptance import run_battery

    battery = run_battery(seed=args.seed if args.seed is not None else 0)
    for res in battery.results:
        mark = "PASS" if res.passed else "FAIL"
        print(f"[{mark}] {res.index:02d} {res.name}: {res.summary}")
    total = len(battery.results)
    good = sum(1 for r in battery.results if r.passed)
    print(f"acceptance: {good}/{total} criteria passed")
    report = battery.report()
    _emit(report, args, "suite", figures=(_rows_figure(report),))
    return EXIT_OK if battery.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="postlab",
        description="exact postselected-circuit lab for 3-local Hamiltonians",
    )
    parser.add_argument("--version", action="version", version=f"postlab {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    ham = subs.add_parser("ham", help="inspect a Hamiltonian instance")
    ham.add_argument("target", help="builtin instance name or .ham path")
    ham.add_argument("--a", type=float, default=None, help="promise threshold a")
    ham.add_argument("--b", type=float, default=None, help="promise threshold b")
    _add_output_options(ham)
    ham.set_defaults(func=cmd_ham)

    verify = subs.add_parser("verify", help="run the diluted-energy verifier")
    verify.add_argument("target", help="builtin instance name or .ham path")
    verify.add_argument("--a", type=float, default=None, help="promise threshold a")
    verify.add_argument("--b", type=float, default=None, help="promise threshold b")
    _add_output_options(verify)
    verify.set_defaults(func=cmd_verify)

    thm1 = subs.add_parser("thm1", help="fidelity sweep and acceptance bound chains")
    _add_run_options(thm1)
    thm1.set_defaults(func=cmd_thm1)

    thm2 = subs.add_parser("thm2", help="classical envelope optimization suite")
    _add_run_options(thm2)
    thm2.set_defaults(func=cmd_thm2)

    e2e = subs.add_parser("e2e", help="full pipeline on one instance")
    _add_run_options(e2e)
    e2e.set_defaults(func=cmd_e2e)

    suite = subs.add_parser("suite", help="acceptance battery, one line per criterion")
    _add_output_options(suite)
    suite.set_defaults(func=cmd_suite)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
