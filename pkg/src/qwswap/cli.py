"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 bad arguments,
3 circuit file errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional, Sequence

from .dsl import CircuitParseError, builtin_protocol_source, parse, parse_file
from .hilbert import PhotonKet, SparseState
from .photon_stats import Regime, pattern_name
from .protocol import (
    SwapConfig,
    Verdict,
    heralded_outcome,
    run_protocol,
    success_probability,
)
from .sampling import sample_shots
from .verify import run_checks
from .walk import Circuit, Coin, position_distribution, run_single_walker

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_CIRCUIT = 0, 1, 2, 3


class _CircuitError(Exception):
    pass


def _unit_interval(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (math.isfinite(x) and 0 <= x <= 1):
        raise argparse.ArgumentTypeError(f"must lie in [0, 1]: {text!r}")
    return x


def _nonneg_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (math.isfinite(x) and x >= 0):
        raise argparse.ArgumentTypeError(f"must be a finite number >= 0: {text!r}")
    return x


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return n


def _regime(text: str) -> Regime:
    try:
        return Regime(text)
    except ValueError:
        raise argparse.ArgumentTypeError("regime must be 'sync' or 'async'")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qwswap",
        description="Entanglement swapping with a three-step two-photon walk.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run all four branches and tabulate detector clicks")
    s.add_argument("--a", type=_unit_interval, required=True, help="pair coefficient a; b = sqrt(1 - a^2)")
    s.add_argument("--regime", type=_regime, default=Regime.SYNCHRONIZED, help="sync (default) or async")
    s.add_argument("--circuit", help="circuit file (.qwc); default is the built-in protocol")
    s.add_argument("--format", choices=("text", "json"), default="text")

    s = sub.add_parser("sweep", help="success probability as a function of a")
    s.add_argument("--a-min", type=_unit_interval, default=0.0)
    s.add_argument("--a-max", type=_unit_interval, default=1.0)
    s.add_argument("--points", type=int, default=11)
    s.add_argument("--eta", type=_unit_interval, default=1.0, help="detector efficiency")
    s.add_argument("--format", choices=("text", "csv"), default="text")

    s = sub.add_parser("sample", help="Monte Carlo shots with lossy detectors")
    s.add_argument("--a", type=_unit_interval, required=True)
    s.add_argument("--shots", type=_positive_int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--eta", type=_unit_interval, default=1.0)
    s.add_argument("--jitter-sigma", type=_nonneg_float, default=0.0, help="HWP angle error, radians")
    s.add_argument("--regime", type=_regime, default=Regime.SYNCHRONIZED)
    s.add_argument("--circuit")
    s.add_argument("--format", choices=("text", "json"), default="text")

    s = sub.add_parser("verify", help="check the simulator against closed-form results")
    s.add_argument("--circuit", help="verify this circuit instead of the built-in one")
    s.add_argument("--format", choices=("text", "json"), default="text")

    s = sub.add_parser("walk", help="single-walker walk on one line")
    s.add_argument("--coin-angle", type=float, default=22.5, help="HWP angle in degrees (22.5 = Hadamard)")
    s.add_argument("--steps", type=int, default=3)
    s.add_argument("--initial-pol", choices=("H", "V"), default="H")
    s.add_argument("--format", choices=("text", "json"), default="text")
    return p


def _load_circuit(path: Optional[str]) -> Circuit:
    try:
        if path is None:
            circuit, _ = parse(builtin_protocol_source())
            return circuit
        circuit, warnings = parse_file(path)
    except CircuitParseError as exc:
        raise _CircuitError("\n".join(f"{path}:{d}" for d in exc.diagnostics))
    except OSError as exc:
        raise _CircuitError(f"{path}: {exc.strerror or exc}")
    for w in warnings:
        print(f"{path}:{w}", file=sys.stderr)
    return circuit


def _state_terms(state: SparseState) -> list[dict]:
    return [{"ket": label, "amplitude": [round(a.real, 15), round(a.imag, 15)]} for label, a in _labelled(state)]


def _labelled(state: SparseState):
    for key, amp in state:
        if isinstance(key, PhotonKet):
            label = f"|{key}>"
        elif isinstance(key, tuple):
            label = f"|{key[0]}>_2 |{key[1]}>_3"
        else:
            label = f"|{key.first}; {key.second}>_sym"
        yield label, amp


def _amp(a: complex) -> str:
    if abs(a.imag) < 1e-15:
        return f"{a.real:+.10f}"
    return f"{a.real:+.10f}{a.imag:+.10f}i"


def cmd_simulate(args) -> str:
    circuit = _load_circuit(args.circuit)
    config = SwapConfig(args.a, regime=args.regime)
    results = run_protocol(config, circuit, strict=args.circuit is None)
    outcomes = {v: heralded_outcome(results, v) for v in Verdict}
    p_succ = success_probability(config.a, config.b)

    if args.format == "json":
        doc = {
            "a": config.a,
            "b": config.b,
            "regime": config.regime.value,
            "success_probability": p_succ,
            "branches": [
                {
                    "branch": r.branch.index,
                    "remote_bell": r.branch.remote_bell.value,
                    "coefficient": r.branch.coefficient,
                    "weight": r.branch.coefficient**2,
                    "final_state": _state_terms(r.final),
                    "clicks": {pattern_name(k): v for k, v in r.clicks.items()},
                    "verdicts": {k.value: v for k, v in r.verdicts.items()},
                }
                for r in results
            ],
            "heralded": {
                v.value: {
                    "probability": o.probability,
                    "bell_fidelity": o.bell_fidelity,
                    "concurrence": o.concurrence,
                }
                for v, o in outcomes.items()
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    out = io.StringIO()
    w = out.write
    w(f"a = {config.a:.10f}  b = {config.b:.10f}  regime = {config.regime.value}\n")
    w(f"success probability 2a^2b^2 = {p_succ:.10f}\n")
    if p_succ == 0:
        w("note: ab = 0, the coincidence branches carry no weight; nothing is swapped\n")
    for r in results:
        br = r.branch
        w(f"\nbranch {br.index}  remote {br.remote_bell.value:<4}  coefficient {br.coefficient:.10f}  weight {br.coefficient**2:.10f}\n")
        w("  final state:\n")
        for label, amp in _labelled(r.final):
            w(f"    {_amp(amp)}  {label}\n")
    w("\nclick table (probability of each pattern given the branch)\n")
    w(f"  {'branch':<8}{'clicks':<52}{'verdict'}\n")
    for r in results:
        cells = ", ".join(f"{pattern_name(k)}:{v:.6f}" for k, v in r.clicks.items())
        verdict = max(r.verdicts, key=lambda v: r.verdicts[v])
        w(f"  {r.branch.index:<8}{cells:<52}{verdict.value} ({r.verdicts[verdict]:.6f})\n")
    w("\nheralded remote state of photons 1 and 4\n")
    for v, o in outcomes.items():
        w(f"  {v.value:<13} probability {o.probability:.10f}  bell fidelity {o.bell_fidelity:.10f}  concurrence {o.concurrence:.10f}\n")
    return out.getvalue()


def cmd_sweep(args) -> str:
    if not args.a_min < args.a_max:
        raise _UsageError("--a-min must be smaller than --a-max")
    if args.points < 2:
        raise _UsageError("--points must be >= 2")
    rows = []
    for i in range(args.points):
        a = args.a_min + (args.a_max - args.a_min) * i / (args.points - 1)
        b = math.sqrt(max(0.0, 1 - a * a))
        p = success_probability(a, b)
        rows.append((a, p, p * args.eta**2))
    if args.format == "csv":
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["a", "p_success", "p_success_eta"])
        for a, p, pe in rows:
            wr.writerow([f"{a:.10f}", f"{p:.12f}", f"{pe:.12f}"])
        return buf.getvalue()
    out = [f"{'a':>14}{'p_success':>16}{'p_success_eta':>16}   (eta = {args.eta})"]
    out += [f"{a:>14.10f}{p:>16.12f}{pe:>16.12f}" for a, p, pe in rows]
    best = max(rows, key=lambda r: r[1])
    out.append(f"peak p_success = {best[1]:.12f} at a = {best[0]:.10f}")
    return "\n".join(out) + "\n"


def cmd_sample(args) -> str:
    circuit = _load_circuit(args.circuit)
    config = SwapConfig(
        args.a,
        regime=args.regime,
        rng_seed=args.seed,
        shots=args.shots,
        detector_efficiency=args.eta,
        hwp_angle_jitter_sigma=args.jitter_sigma,
    )
    rep = sample_shots(config, circuit)
    if args.format == "json":
        doc = {
            "shots": rep.shots,
            "seed": args.seed,
            "eta": rep.efficiency,
            "counts": [{"branch": k, "clicks": p, "count": n} for (k, p), n in rep.counts.items()],
            "conclusive": rep.conclusive,
            "success_rate": rep.success_rate,
            "expected_success": rep.expected_success,
            "sigma": rep.sigma,
            "misclassified": rep.misclassified,
            "accuracy": None if math.isnan(rep.accuracy) else rep.accuracy,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    out = [f"shots {rep.shots}  seed {args.seed}  eta {rep.efficiency}  jitter {args.jitter_sigma} rad"]
    out.append(f"{'branch':<8}{'clicks':<12}{'count':>10}")
    out += [f"{k:<8}{p:<12}{n:>10}" for (k, p), n in rep.counts.items()]
    out.append(
        f"coincidence success rate {rep.success_rate:.6f}  expected {rep.expected_success:.6f}  sigma {rep.sigma:.6f}"
    )
    out.append(f"misclassified {rep.misclassified}  accuracy {rep.accuracy:.6f}")
    return "\n".join(out) + "\n"


def cmd_verify(args) -> tuple[str, int]:
    circuit = None if args.circuit is None else _load_circuit(args.circuit)
    checks = run_checks(circuit)
    ok = all(c.passed for c in checks)
    if args.format == "json":
        doc = {
            "passed": ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "max_error": None if math.isinf(c.error) else c.error, "detail": c.detail}
                for c in checks
            ],
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        lines = []
        for c in checks:
            err = "n/a" if math.isinf(c.error) else f"{c.error:.2e}"
            extra = f"  ({c.detail})" if c.detail else ""
            lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  max error {err}{extra}")
        lines.append(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
        text = "\n".join(lines) + "\n"
    return text, EXIT_OK if ok else EXIT_VERIFY


def cmd_walk(args) -> str:
    if args.steps < 0:
        raise _UsageError("--steps must be >= 0")
    if not math.isfinite(args.coin_angle):
        raise _UsageError("--coin-angle must be finite")
    start = SparseState.single({PhotonKet.at(args.initial_pol, 2, 0): 1.0})
    final = run_single_walker(start, Coin.hwp(math.radians(args.coin_angle)), args.steps)
    dist = position_distribution(final)
    if args.format == "json":
        return json.dumps({"positions": {str(k): v for k, v in dist.items()}, "state": _state_terms(final)}, indent=2) + "\n"
    out = [f"HWP {args.coin_angle} deg coin, {args.steps} steps from |{args.initial_pol},0>"]
    out += [f"{x:+4d}  {p:.12f}" for x, p in dist.items()]
    return "\n".join(out) + "\n"


class _UsageError(Exception):
    pass


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on bad arguments
    try:
        if args.command == "verify":
            text, code = cmd_verify(args)
        else:
            handler = {"simulate": cmd_simulate, "sweep": cmd_sweep, "sample": cmd_sample, "walk": cmd_walk}
            text, code = handler[args.command](args), EXIT_OK
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qwswap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _CircuitError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CIRCUIT
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
