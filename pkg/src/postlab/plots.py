"""Figure rendering for the report path.

Kept separate from the simulation core on purpose: nothing in here is
load-bearing, and matplotlib is only imported when a report is actually
written to disk.  PNGs are rendered with a pinned Software tag and no
date metadata so repeated runs stay comparable.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_PNG_META = {"Software": "postlab"}


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=130, metadata=_PNG_META)
    plt.close(fig)
    return path


def render_sweep(sweep, out_dir: Path, stem: str) -> list[Path]:
    """Propagation distances against the 2*sqrt(eps) bound, and the
    conditional acceptance against the verdict bounds, across the grid."""
    if not sweep:
        return []
    written = []
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    eps = [max(r.eps, 1e-16) for r in sweep]
    ax.scatter(eps, [max(r.d_joint, 1e-18) for r in sweep],
               s=14, alpha=0.6, label="|d_joint|")
    ax.scatter(eps, [max(r.d_post, 1e-18) for r in sweep],
               s=14, alpha=0.6, marker="x", label="|d_post|")
    grid_eps = sorted({max(r.eps, 1e-16) for r in sweep})
    ax.plot(grid_eps, [2.0 * e**0.5 for e in grid_eps], "k--", lw=1,
            label="bound 2*sqrt(eps)")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("eps = 1 - F^m'")
    ax.set_ylabel("probability shift")
    ax.legend(fontsize=8)
    ax.set_title("fidelity propagation vs bound")
    fig.tight_layout()
    written.append(_save(fig, Path(out_dir) / f"{stem}_propagation.png"))

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    xs = list(range(len(sweep)))
    ax.plot(xs, [r.cond_approx for r in sweep], ".", ms=4, label="cond approx")
    ax.plot(xs, [r.cond_exact for r in sweep], lw=1, alpha=0.7, label="cond exact")
    lbs = [(i, r.yes_lb) for i, r in enumerate(sweep) if r.yes_lb is not None]
    ubs = [(i, r.no_ub) for i, r in enumerate(sweep) if r.no_ub is not None]
    if lbs:
        ax.plot([i for i, _ in lbs], [v for _, v in lbs], "g--", lw=1, label="YES lower bound")
    if ubs:
        ax.plot([i for i, _ in ubs], [v for _, v in ubs], "r--", lw=1, label="NO upper bound")
    ax.axhline(0.5, color="gray", lw=0.8)
    ax.set_xlabel("sweep row")
    ax.set_ylabel("Pr[o=1 | p=1]")
    ax.legend(fontsize=8)
    ax.set_title("conditional acceptance vs verdict bounds")
    fig.tight_layout()
    written.append(_save(fig, Path(out_dir) / f"{stem}_bounds.png"))
    return written


def render_envelope(meta_thm2: dict, c: float, delta: float, out_dir: Path, stem: str) -> list[Path]:
    """Extremal envelope conditionals against the c^2 sandwich."""
    base = meta_thm2["base_value"]
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    ax.axhspan(base / c**2, base * c**2, color="tab:blue", alpha=0.15,
               label="sandwich [base/c^2, base*c^2]")
    ax.axhline(base, color="tab:blue", lw=1, label="base conditional")
    ax.plot([0], [meta_thm2["min_value"]], "v", color="tab:red", label="envelope min")
    ax.plot([0], [meta_thm2["max_value"]], "^", color="tab:green", label="envelope max")
    ax.axhline(0.5, color="gray", lw=0.8, ls=":")
    ax.axhline(0.5 - 2 * delta * delta, color="gray", lw=0.8, ls="--",
               label="NO target 1/2 - 2*delta^2")
    ax.set_xticks([])
    ax.set_ylabel("Pr[o=1 | p=1]")
    ax.set_title(f"envelope extremes, c={c}, delta={delta}")
    ax.legend(fontsize=8, loc="best")
    fig.tight_layout()
    return [_save(fig, Path(out_dir) / f"{stem}_envelope.png")]


def render_rows(rows, out_dir: Path, stem: str) -> list[Path]:
    """Horizontal margin bars, one per inequality row."""
    if not rows:
        return []
    fig_h = max(2.5, 0.22 * len(rows) + 1.2)
    fig, ax = plt.subplots(figsize=(7.2, fig_h))
    names = [r.name for r in rows]
    margins = [r.margin for r in rows]
    colors = ["tab:green" if r.passed else "tab:red" for r in rows]
    ax.barh(range(len(rows)), margins, color=colors, height=0.6)
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(names, fontsize=6)
    ax.invert_yaxis()
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_xlabel("margin (lhs - rhs)")
    ax.set_title("inequality margins")
    fig.tight_layout()
    return [_save(fig, Path(out_dir) / f"{stem}_margins.png")]
