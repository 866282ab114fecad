"""Command-line workbench.

Subcommands cover the randomized inequality checks (``verify``), the
magnification quantities (``magnify``), coupling-entropy maximization
(``dhr``, ``maxent``), large-deviation series (``sanov``, ``growth``),
the distance-ordering search (``witnesses``), and type counting
(``types``). All output is canonical JSON (sorted keys, floats at 12
significant digits) or CSV, so identical runs produce identical bytes.

Exit status: 0 on success, 1 when a checked inequality or identity is
violated (or a search comes back partial), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

from . import __version__
from .coupling import grid_oracle, max_pushforward_entropy
from .dist import Dist
from .groups import GroupSpec, LinearForm
from .harness import (
    HarnessConfig,
    ordering_witnesses,
    registry_ids,
    run_suite,
)
from .magnification import BipartiteGraph, lambda_entropic, mu_combinatorial
from .types_sanov import (
    TypicalSetConfig,
    count_types,
    nearest_type,
    sanov_exact,
    sumset_growth_rate,
    type_class_size,
    type_log_probability,
    typical_counts_band,
    typical_set_size,
)

__all__ = ["main", "dispatch", "emit_report", "canonical_json"]


def _canon(value):
    """Normalize a report tree for byte-stable JSON output."""
    if isinstance(value, float):
        return float(f"{value:.12g}") if math.isfinite(value) else str(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, dict):
        return {str(k): _canon(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canon(v) for v in value]
    if isinstance(value, (frozenset, set)):
        return sorted(_canon(v) for v in value)
    return value


def canonical_json(obj) -> str:
    return json.dumps(_canon(obj), sort_keys=True, indent=2) + "\n"


def emit_report(report, path: str | None) -> None:
    """Write canonical JSON (or pre-rendered text) to a file or stdout."""
    text = report if isinstance(report, str) else canonical_json(report)
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def _envelope(config: dict, payload: dict) -> dict:
    return {
        "tool": {"name": "entroset", "version": __version__},
        "config": config,
        **payload,
    }


def _default_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("ENTROSET_SEED")
    return int(env) if env else 0


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc


def _load_dist(path: str) -> Dist:
    return Dist.from_json(_load_json(path))


def _parse_probs(text: str) -> tuple[float, ...]:
    probs = tuple(float(Fraction(part)) for part in text.split(","))
    if not probs or abs(sum(probs) - 1.0) > 1e-9:
        raise ValueError(f"probabilities {text!r} do not sum to 1")
    return probs


def _parse_form(text: str) -> LinearForm:
    if text == "x+y":
        return LinearForm((1, 1))
    if text == "x-y":
        return LinearForm((1, -1))
    try:
        coeffs = tuple(int(c) for c in text.split(","))
    except ValueError:
        raise ValueError(f"cannot parse linear form {text!r}") from None
    return LinearForm(coeffs)


def _parse_ns(text: str) -> list[int]:
    ns = [int(part) for part in text.split(",")]
    if not ns or any(n < 1 for n in ns):
        raise ValueError(f"bad length list {text!r}")
    return ns


# ---------------------------------------------------------------------------
# Subcommand handlers. Each returns the process exit code.
# ---------------------------------------------------------------------------


def _cmd_verify(args) -> int:
    seed = _default_seed(args.seed)
    cfg = HarnessConfig(tol=args.tol, max_support=args.max_support)
    report = run_suite(args.id, args.trials, seed, cfg, jobs=args.jobs)
    emit_report(_envelope(cfg.to_json() | {"jobs": args.jobs}, report.to_json()), args.out)
    return 0 if report.violations == 0 else 1


def _cmd_magnify(args) -> int:
    graph = BipartiteGraph.from_json(_load_json(args.graph))
    seed = _default_seed(args.seed)
    mu = mu_combinatorial(graph)
    lam = lambda_entropic(graph, tol=args.tol, starts=args.starts, seed=seed)
    payload = {
        "mu": mu.ratio,
        "log_mu": mu.log_ratio,
        "lambda": lam.value,
        "argmin_subset": sorted(mu.argmin),
        "lambda_argmin_subset": sorted(lam.subset_argmin),
        "discrepancy_flag": lam.discrepancy,
    }
    config = {"graph": args.graph, "tol": args.tol, "seed": seed, "starts": args.starts}
    emit_report(_envelope(config, payload), args.out)
    return 1 if lam.discrepancy else 0


def _cmd_dhr(args) -> int:
    px = _load_dist(args.px)
    py = _load_dist(args.py)
    res = max_pushforward_entropy(px, py, LinearForm((1, -1)), tol=args.tol)
    value = res.value - 0.5 * px.entropy() - 0.5 * py.entropy()
    payload = {
        "value": value,
        "max_entropy": res.value,
        **{k: v for k, v in res.to_json(args.include_coupling).items() if k != "value"},
    }
    config = {"px": args.px, "py": args.py, "tol": args.tol}
    emit_report(_envelope(config, payload), args.out)
    return 0 if res.converged else 1


def _cmd_maxent(args) -> int:
    px = _load_dist(args.px)
    py = _load_dist(args.py)
    form = _parse_form(args.form)
    res = max_pushforward_entropy(px, py, form, tol=args.tol)
    payload = res.to_json(args.include_coupling)
    if args.oracle:
        payload["oracle"] = grid_oracle(px, py, form, args.resolution)
    config = {
        "px": args.px,
        "py": args.py,
        "form": str(form),
        "tol": args.tol,
        "oracle": args.oracle,
    }
    emit_report(_envelope(config, payload), args.out)
    return 0 if res.converged else 1


def _cmd_sanov(args) -> int:
    mu = _parse_probs(args.mu)
    target = _parse_probs(args.target)
    if len(target) != len(mu):
        raise ValueError(
            f"target has {len(target)} entries but mu has {len(mu)}"
        )
    radius = args.radius

    def event(nu: tuple[float, ...]) -> bool:
        return max(abs(a - b) for a, b in zip(nu, target)) <= radius

    lines = ["n,rate"]
    for n in _parse_ns(args.ns):
        lp = sanov_exact(mu, event, n)
        rate = -lp if math.isfinite(lp) else float("inf")
        lines.append(f"{n},{rate:.12g}")
    emit_report("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_growth(args) -> int:
    group = GroupSpec.integers(1)
    if args.px:
        px = _load_dist(args.px)
        py = _load_dist(args.py) if args.py else px
    else:
        px = Dist.uniform(((0,), (1,)), group)
        py = px
    lines = ["n,rate"]
    for n in _parse_ns(args.ns):
        rate = sumset_growth_rate(px, py, n, args.omega)
        lines.append(f"{n},{rate:.12g}")
    emit_report("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_witnesses(args) -> int:
    seed = _default_seed(args.seed)
    report = ordering_witnesses(
        budget=args.budget, seed=seed, tol=args.tol, margin=args.margin
    )
    config = {
        "budget": args.budget,
        "seed": seed,
        "tol": args.tol,
        "margin": args.margin,
    }
    emit_report(_envelope(config, report.to_json()), args.out)
    return 1 if report.partial else 0


def _cmd_types(args) -> int:
    payload: dict = {
        "alphabet": args.alphabet,
        "n": args.n,
        "count_types": str(count_types(args.alphabet, args.n)),
    }
    if args.mu:
        mu = _parse_probs(args.mu)
        if len(mu) != args.alphabet:
            raise ValueError(
                f"mu has {len(mu)} entries but alphabet is {args.alphabet}"
            )
        tv = nearest_type(mu, args.n)
        payload["nearest_type"] = list(tv.counts)
        payload["class_size"] = str(type_class_size(tv))
        payload["log2_probability"] = type_log_probability(mu, tv)
        cfg = TypicalSetConfig(mu, args.n, args.omega)
        payload["typical_band"] = [list(b) for b in typical_counts_band(cfg)]
        payload["typical_size"] = str(typical_set_size(cfg))
    emit_report(_envelope({"alphabet": args.alphabet, "n": args.n}, payload), args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entroset",
        description="Sumset and entropy-inequality workbench over finite abelian groups.",
    )
    parser.add_argument(
        "--version", action="version", version=f"entroset {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", help="write the report here instead of stdout")

    p = sub.add_parser("verify", help="fuzz one registered inequality or identity")
    p.add_argument("id", choices=registry_ids(), metavar="id")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-support", type=int, default=5)
    p.add_argument("--jobs", type=int, default=1)
    add_out(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("magnify", help="magnification ratio, combinatorial and entropic")
    p.add_argument("--graph", required=True, help="bipartite graph JSON file")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--starts", type=int, default=20)
    add_out(p)
    p.set_defaults(func=_cmd_magnify)

    p = sub.add_parser("dhr", help="coupling-maximized entropy distance of two laws")
    p.add_argument("--px", required=True, help="distribution JSON file")
    p.add_argument("--py", required=True, help="distribution JSON file")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--include-coupling", action="store_true")
    add_out(p)
    p.set_defaults(func=_cmd_dhr)

    p = sub.add_parser("maxent", help="maximize H(f(X, Y)) over couplings")
    p.add_argument("--px", required=True)
    p.add_argument("--py", required=True)
    p.add_argument(
        "--form",
        default="x+y",
        help="x+y, x-y, or comma-separated integer coefficients",
    )
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--include-coupling", action="store_true")
    p.add_argument("--oracle", action="store_true", help="also run the grid search")
    p.add_argument("--resolution", type=float, default=1e-3)
    add_out(p)
    p.set_defaults(func=_cmd_maxent)

    p = sub.add_parser("sanov", help="exact rare-event probabilities by type counting")
    p.add_argument("--mu", required=True, help="source law, e.g. 1/2,1/2")
    p.add_argument("--target", required=True, help="center of the empirical event")
    p.add_argument("--radius", type=float, default=0.05)
    p.add_argument("--ns", default="8,16,32,64", help="comma-separated lengths")
    add_out(p)
    p.set_defaults(func=_cmd_sanov)

    p = sub.add_parser("growth", help="typical-sumset growth rate series")
    p.add_argument("--ns", default="4,8,16,32,64")
    p.add_argument("--px", help="distribution JSON (default: uniform on {0,1})")
    p.add_argument("--py", help="distribution JSON (default: same as --px)")
    p.add_argument("--omega", type=float, default=None, help="band width override")
    add_out(p)
    p.set_defaults(func=_cmd_growth)

    p = sub.add_parser("witnesses", help="search for distance-ordering witnesses")
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--margin", type=float, default=1e-3)
    add_out(p)
    p.set_defaults(func=_cmd_witnesses)

    p = sub.add_parser("types", help="type counting and typical-set sizes")
    p.add_argument("--alphabet", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mu", help="optional law for nearest-type and band queries")
    p.add_argument("--omega", type=float, default=None)
    add_out(p)
    p.set_defaults(func=_cmd_types)

    return parser


def dispatch(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"entroset: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch())
