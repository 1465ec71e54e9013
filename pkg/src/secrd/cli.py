"""Command-line front end.

Subcommands: eval, sweep, binary, classify, simulate. Every run is
deterministic given its flags and optional config file; flags win over
config-file values. Exit codes: 0 success, 2 input error, 3 domain
invariant violation, 4 resource guard.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import binary as binary_mod
from . import ordering, region, simulate
from .probs import InvalidArgument, ParseError, load_conditional
from .region import AuxScheme, SearchConfig, SecureSource, best_reconstruction

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INVARIANT = 3
EXIT_RESOURCE = 4


def _read_config(path: str) -> dict[str, str]:
    """Key-value config file: one `key value` (or `key = value`) per line."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, _, val = line.partition("=")
        else:
            key, _, val = line.partition(" ")
        key, val = key.strip(), val.strip()
        if not key or not val:
            raise ParseError(f"malformed config line: {raw!r}")
        out[key.replace("-", "_")] = val
    return out


def _merge_config(args: argparse.Namespace):
    if not getattr(args, "config", None):
        return
    parser = args.subparser  # the subcommand parser owns the defaults
    file_vals = _read_config(args.config)
    for key, val in file_vals.items():
        if not hasattr(args, key):
            raise ParseError(f"unknown config key {key!r}")
        default = parser.get_default(key)
        if getattr(args, key) == default:  # flag not given: config wins
            current = getattr(args, key)
            caster = type(default) if default is not None else str
            if isinstance(default, bool):
                val = val.lower() in ("1", "true", "yes")
                setattr(args, key, val)
            else:
                setattr(args, key, caster(val) if default is not None else val)


def load_source_file(path: str) -> SecureSource:
    """Source file: a joint block over A, B, E plus distortion lines.

        joint
        axis A: 0 1
        axis B: 0 e 1
        axis E: 0 1
        mass: ...
        dmax: 1.0
        distortion: <|A|*|A| row-major floats>
    """
    text = Path(path).read_text()
    joint_lines, dmax, dist = [], 1.0, None
    for line in text.splitlines():
        stripped = line.split("#", 1)[0].strip()
        if stripped.startswith("dmax:"):
            dmax = float(stripped[5:])
        elif stripped.startswith("distortion:"):
            dist = [float(t) for t in stripped[11:].split()]
        else:
            joint_lines.append(line)
    from .probs import load_joint

    joint = load_joint("\n".join(joint_lines))
    na = len(joint.alphabet("A"))
    if dist is None:
        raise ParseError("source file missing 'distortion:' line")
    if len(dist) != na * na:
        raise ParseError(f"distortion needs {na * na} entries, got {len(dist)}")
    return SecureSource(joint, np.array(dist).reshape(na, na), d_max=dmax)


def load_scheme_file(path: str, source: SecureSource) -> AuxScheme:
    """Scheme file: two conditional blocks separated by a line '---'.

    First block is the A->V channel, second the V->U channel. The
    reconstruction map is the distortion-optimal one.
    """
    text = Path(path).read_text()
    blocks = [b for b in text.split("---") if b.strip()]
    if len(blocks) != 2:
        raise ParseError("scheme file needs two '---'-separated conditional blocks")
    v_channel = load_conditional(blocks[0])
    u_channel = load_conditional(blocks[1])
    recon = best_reconstruction(source, v_channel)
    return AuxScheme(v_channel, u_channel, recon)


def _write(out: str | None, text: str) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_eval(args) -> int:
    source = load_source_file(args.source)
    scheme = load_scheme_file(args.scheme, source)
    scheme.check_caps(source)
    tup = region.evaluate_scheme(source, scheme)
    if args.format == "json":
        _write(args.out, json.dumps({"R": round(tup.rate, 6),
                                     "D": round(tup.distortion, 6),
                                     "Delta": round(tup.equivocation, 6)}) + "\n")
    else:
        _write(args.out, f"R={tup.rate:.6f} D={tup.distortion:.6f} "
                         f"Delta={tup.equivocation:.6f}\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    params = ordering.BecBscParams(args.p, args.eps)
    source = binary_mod.build_source(params)
    grid = np.linspace(0.0, args.d_max, args.grid)
    config = SearchConfig(rate_budget=args.rate_budget)
    curve = region.sweep_boundary(source, grid, config)
    _write(args.out, curve.to_csv())
    return EXIT_OK


def cmd_binary(args) -> int:
    params = ordering.BecBscParams(args.p, args.eps)
    if args.curve:
        eps = params.eps
        grid = np.linspace(0.0, eps / 2.0, args.grid) if eps > 0 else [0.0]
        points = binary_mod.sweep_curve(params, grid)
        _write(args.out, binary_mod.curve_csv(points))
        return EXIT_OK
    columns = binary_mod.benchmark_table(params, rate_budget_fraction=args.rate_budget)
    if args.format == "csv":
        _write(args.out, binary_mod.table_csv(columns))
    else:
        _write(args.out, binary_mod.table_text(columns))
    return EXIT_OK


def cmd_classify(args) -> int:
    if args.source:
        source = load_source_file(args.source)
        ch_b, ch_e = ordering.side_channels(source)
        deg_fwd, _ = ordering.is_degraded(ch_b, ch_e)
        deg_rev, _ = ordering.is_degraded(ch_e, ch_b)
        mc_fwd, mc_rev = ordering.is_more_capable(source)
        ln_fwd = "yes" if deg_fwd else (
            "unknown" if ordering.less_noisy_search(source)[0] == "no-violation"
            else "no")
        rev_source = SecureSource(
            _swap_be(source), source.distortion, source.d_max)
        ln_rev = "yes" if deg_rev else (
            "unknown" if ordering.less_noisy_search(rev_source)[0] == "no-violation"
            else "no")
        verdict = ordering.OrderingVerdict(
            (deg_fwd, deg_rev), (ln_fwd, ln_rev),
            (mc_fwd or ln_fwd == "yes", mc_rev or ln_rev == "yes"))
    else:
        verdict = ordering.classify_bec_bsc(ordering.BecBscParams(args.p, args.eps))
    _write(args.out, verdict.to_record() + "\n")
    return EXIT_OK


def _swap_be(source: SecureSource):
    from .probs import JointPmf

    joint = source.joint
    names = list(joint.names)
    ib, ie = names.index("B"), names.index("E")
    mass = np.swapaxes(joint.mass, ib, ie)
    axes = list(joint.axes)
    axes[ib] = ("B", joint.alphabet("E"))
    axes[ie] = ("E", joint.alphabet("B"))
    return JointPmf(tuple(axes), mass)


def cmd_simulate(args) -> int:
    params = ordering.BecBscParams(args.p, args.eps)
    source = binary_mod.build_source(params)
    scheme = binary_mod.aux_scheme(
        params, binary_mod.BinaryScheme(args.alpha, args.beta))
    na = len(source.a_alphabet)
    if na ** args.n > simulate.ENUM_LIMIT:
        print(f"error: |A|^n = {na ** args.n} exceeds enumeration limit "
              f"{simulate.ENUM_LIMIT}", file=sys.stderr)
        return EXIT_RESOURCE
    rates = simulate.achievability_rates(source, scheme, slack=args.slack)
    cfg = simulate.SimConfig(n=args.n, rates=rates, trials=args.trials,
                             seed=args.seed, typ_tol=args.typ_tol,
                             typ_mode=args.mode)
    summary = simulate.run_trials(source, scheme, cfg)
    header = (f"# n={args.n} trials={args.trials} seed={args.seed} "
              f"mean_distortion={summary.mean_distortion:.6f} "
              f"mean_equivocation={summary.mean_equivocation:.6f} "
              f"encode_failure_rate={summary.encode_failure_rate:.6f} "
              f"decode_failure_rate={summary.decode_failure_rate:.6f}\n")
    _write(args.out, header + summary.to_csv())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secrd",
        description="Secure lossy source coding: region evaluation, "
                    "side-information ordering, binary example, and "
                    "random-binning simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key-value config file; flags win")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json", "text"),
                       default="text")
        p.set_defaults(subparser=p)

    p_eval = sub.add_parser("eval", help="evaluate a scheme on a source")
    p_eval.add_argument("--source", required=True)
    p_eval.add_argument("--scheme", required=True)
    common(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep", help="boundary sweep on the binary model")
    p_sweep.add_argument("--p", type=float, default=0.1)
    p_sweep.add_argument("--eps", type=float, default=0.469)
    p_sweep.add_argument("--grid", type=int, default=8)
    p_sweep.add_argument("--d-max", type=float, default=0.2, dest="d_max")
    p_sweep.add_argument("--rate-budget", type=float, default=None)
    common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_bin = sub.add_parser("binary", help="worked-example table and curve")
    p_bin.add_argument("--p", type=float, default=0.1)
    p_bin.add_argument("--eps", type=float, default=0.469)
    p_bin.add_argument("--curve", action="store_true")
    p_bin.add_argument("--grid", type=int, default=200)
    p_bin.add_argument("--rate-budget", type=float, default=0.8)
    common(p_bin)
    p_bin.set_defaults(func=cmd_binary)

    p_cls = sub.add_parser("classify", help="side-information ordering verdict")
    p_cls.add_argument("--p", type=float, default=0.1)
    p_cls.add_argument("--eps", type=float, default=0.469)
    p_cls.add_argument("--source", help="classify a source file instead")
    common(p_cls)
    p_cls.set_defaults(func=cmd_classify)

    p_sim = sub.add_parser("simulate", help="finite-blocklength binning trials")
    p_sim.add_argument("--p", type=float, default=0.1)
    p_sim.add_argument("--eps", type=float, default=0.469)
    p_sim.add_argument("--alpha", type=float, default=0.031)
    p_sim.add_argument("--beta", type=float, default=0.05)
    p_sim.add_argument("--n", type=int, default=10)
    p_sim.add_argument("--trials", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--slack", type=float, default=0.1)
    p_sim.add_argument("--typ-tol", type=float, default=0.1, dest="typ_tol")
    p_sim.add_argument("--mode", choices=("ml", "strong", "entropy"),
                       default="ml", help="codeword matching convention")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args)
        return args.func(args)
    except (ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except simulate.ResourceLimit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except simulate.DegenerateParameters as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
