"""Command-line entry point: ``qmaverify <subcommand> [flags]``.

Exit codes: 0 success, 1 input error, 2 a bound check failed.
"""

from __future__ import annotations

import argparse
import logging
import sys

from qmaverify import harness
from qmaverify import lh
from qmaverify import protocol as proto

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_BOUND = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit 2, which we reserve for bound failures
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _promise(text: str) -> lh.EnergyPromise:
    try:
        e_a, e_b = (float(v) for v in text.split(","))
        return lh.EnergyPromise(e_a, e_b)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--promise wants Ea,Eb with Ea < Eb ({exc})") from None


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _common(p: argparse.ArgumentParser, shots: bool = True) -> None:
    p.add_argument("--seed", type=_seed, default=0)
    if shots:
        p.add_argument("--shots", type=int, default=10_000)
        p.add_argument("--workers", type=int, default=1, help="threads for shot chunks; output is unchanged")
    p.add_argument("--out", default="-", help="report path, '-' for stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmaverify", description="Simulate measurement-only QMA verification protocols.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stab-test", help="stabilizer test on a graph state")
    p.add_argument("--graph", required=True, help="JSON file or builtin: " + ", ".join(harness.GRAPH_BUILTINS))
    p.add_argument("--witness", help="zero, one, plus, random:<seed>, mixed:<seed> or a JSON state")
    p.add_argument("--noise", type=float, default=0.0, help="weight of the maximally mixed state")
    _common(p)

    p = sub.add_parser("mbqc-run", help="full verifier on a compiled circuit")
    p.add_argument("--circuit", required=True, help="JSON file or builtin: " + ", ".join(harness.CIRCUIT_BUILTINS))
    p.add_argument("--witness")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--q", type=float, help="computation-branch probability (default: balancing q, capped at 1)")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--a", type=float, default=2 / 3)
    p.add_argument("--b", type=float, default=1 / 3)
    _common(p)

    for name, text in (("lh-verify", "one-bit local Hamiltonian verifier"),
                       ("estimate-energy", "energy estimate from the verifier's bits")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--hamiltonian", required=True, help="JSON file or builtin: " + ", ".join(lh.BUILTINS))
        p.add_argument("--witness", help="ground (default), zero, plus, random:<seed>, mixed:<seed> or JSON")
        p.add_argument("--noise", type=float, default=0.0)
        if name == "lh-verify":
            p.add_argument("--promise", type=_promise, help="Ea,Eb; default derives one from the spectrum")
        _common(p)

    p = sub.add_parser("gap-report", help="closed-form gap table over |x|")
    p.add_argument("--x-min", type=int, default=4)
    p.add_argument("--x-max", type=int, default=100)
    p.add_argument("--a", type=float, default=2 / 3)
    p.add_argument("--b", type=float, default=1 / 3)
    _common(p, shots=False)

    p = sub.add_parser("sweep", help="grid over q, epsilon, |x| and noise")
    p.add_argument("--q", help="comma list or start:stop:count")
    p.add_argument("--epsilon", help="comma list or start:stop:count")
    p.add_argument("--x", help="comma list of |x| values")
    p.add_argument("--noise", help="comma list or start:stop:count of mixing weights")
    p.add_argument("--graph")
    p.add_argument("--circuit")
    p.add_argument("--witness")
    p.add_argument("--a", type=float, default=2 / 3)
    p.add_argument("--b", type=float, default=1 / 3)
    _common(p, shots=False)
    return parser


def _rows(args) -> list[harness.ReportRow]:
    cmd = args.command
    if cmd == "gap-report":
        return harness.gap_report(args.x_min, args.x_max, args.a, args.b)
    if cmd == "sweep":
        xs = [int(v) for v in harness.parse_grid(args.x)]
        return harness.sweep(harness.parse_grid(args.q), harness.parse_grid(args.epsilon), xs,
                             harness.parse_grid(args.noise), args.a, args.b,
                             graph=args.graph, circuit=args.circuit, witness=args.witness)
    common = dict(shots=args.shots, seed=args.seed, workers=args.workers, witness=args.witness,
                  noise=args.noise, experiment_id=cmd)
    if cmd == "stab-test":
        spec = harness.ExperimentSpec("stab-only", graph=args.graph, **common)
    elif cmd == "mbqc-run":
        try:
            params = proto.ProtocolParams(q=0.5, epsilon=args.epsilon, a=args.a, b=args.b)
        except proto.ProtocolError as exc:
            raise harness.InputError(str(exc)) from None
        spec = harness.ExperimentSpec("mbqc", circuit=args.circuit, params=params, q=args.q, **common)
    elif cmd == "lh-verify":
        spec = harness.ExperimentSpec("lh", hamiltonian=args.hamiltonian, promise=args.promise, **common)
    else:
        spec = harness.ExperimentSpec("estimate-energy", hamiltonian=args.hamiltonian, **common)
    return harness.run(spec)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        rows = _rows(args)
        text = harness.render(rows, args.format)
    except (ValueError, OSError) as exc:  # every package error type derives from ValueError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    failed = [r for r in rows if not r.passed]
    for r in failed:
        bad = [k for k, v in r.checks.items() if not v]
        print(f"bound check failed in {r.experiment}: {', '.join(bad)}", file=sys.stderr)
    return EXIT_BOUND if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
