"""Command-line interface: ``stabkit <subcommand> [options]``.

Reports go to stdout (or ``--out``) as JSON; logs go to stderr.  Exit codes:
0 success, 1 cap overflow or no candidate, 2 invalid parameters, 3 a
``verify`` identity failed.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import logging
import os
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from . import f2lin, learners, oracle, states
from .errors import CapExceededError, NoCandidateError, ParameterError
from .sampling import SampleMode, bell_difference_samples

log = logging.getLogger("stabkit")

EXIT_OK, EXIT_CAP, EXIT_PARAM, EXIT_VERIFY = 0, 1, 2, 3


# --------------------------------------------------------------------------
# identity suite used by ``verify``


def run_identity_suite(n: int, trials: int, rng: np.random.Generator, tol: float = 1e-9) -> dict:
    """Check the p-mass and q-mass subspace identities and Fourier invariance.

    Each trial draws a Haar state and a uniformly random subspace of random
    dimension.  Returns pass/fail counts per identity and the largest error.
    """
    counts = {k: {"pass": 0, "fail": 0, "max_err": 0.0} for k in ("p_mass", "q_mass", "fourier_invariance")}

    def record(name: str, err: float, limit: float) -> None:
        c = counts[name]
        c["pass" if err <= limit else "fail"] += 1
        c["max_err"] = max(c["max_err"], err)

    for _ in range(trials):
        psi = states.haar_random(n, rng)
        T = f2lin.random_subspace(n, int(rng.integers(0, 2 * n + 1)), rng)
        Tp = T.complement()
        p = psi.char_distribution.p
        q = psi.weyl_distribution.q
        pT = states.subspace_mass(p, T)
        pTp = states.subspace_mass(p, Tp)
        record("p_mass", abs(pT - len(T) / 2**n * pTp), tol)
        idx = Tp.elements_array()
        record("q_mass", abs(states.subspace_mass(q, T) / len(T) - float(np.sum(p[idx] ** 2))), tol)
        record("fourier_invariance", float(np.max(np.abs(2**n * states.symplectic_fourier(p) - p))), 1e-10)
    return counts


# --------------------------------------------------------------------------
# helpers


def _load_input(args) -> states.PureState:
    if args.state_file:
        if args.circuit_file:
            log.warning("both --state-file and --circuit-file given; using --state-file")
        return states.load_state(args.state_file)
    if args.circuit_file:
        n, gates = states.parse_circuit(Path(args.circuit_file).read_text())
        if args.n is not None:
            if args.n < n:
                raise ParameterError(f"--n {args.n} is smaller than the circuit's qubit range {n}")
            n = args.n
        return states.from_circuit(n, gates)
    raise ParameterError("an input state is required: pass --state-file or --circuit-file")


def _require(args, *names: str) -> None:
    for name in names:
        if getattr(args, name) is None:
            raise ParameterError(f"--{name.replace('_', '-')} is required for {args.command}")


def _envelope(args, seed: int, payload: dict) -> dict:
    return {
        "command": args.command,
        "seed": seed,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "report": payload,
    }


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, obj: dict) -> None:
    _emit(args, json.dumps(obj, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _seed(args) -> int:
    if args.seed is None:
        return int(np.random.SeedSequence().entropy % (1 << 63))
    return args.seed


# --------------------------------------------------------------------------
# subcommands


def cmd_sample(args) -> int:
    psi = _load_input(args)
    seed = _seed(args)
    gen, _ = learners.make_rng(seed)
    mode = SampleMode(args.mode)
    xs = bell_difference_samples(psi, args.count, gen, mode)
    bits = [f2lin.to_bits(int(x), psi.n) for x in xs]
    if args.format == "json":
        _emit_json(args, _envelope(args, seed, {"mode": mode.value, "count": args.count, "n": psi.n, "samples": bits}))
    else:
        _emit(args, "".join(b + "\n" for b in bits))
    return EXIT_OK


def cmd_dist(args) -> int:
    psi = _load_input(args)
    table = psi.char_distribution.p if args.which == "p" else psi.weyl_distribution.q
    if args.format == "json":
        payload = {"which": args.which, "n": psi.n,
                   "values": {f2lin.to_bits(x, psi.n): float(v) for x, v in enumerate(table)}}
        _emit_json(args, _envelope(args, args.seed, payload))
    else:
        buf = io.StringIO()
        states.dump_distribution_csv(table, psi.n, buf)
        _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_distinguish(args) -> int:
    _require(args, "delta")
    psi = _load_input(args)
    seed = _seed(args)
    rep = learners.distinguish(psi, args.delta, seed, SampleMode(args.mode), args.early_exit, args.m_override)
    _emit_json(args, _envelope(args, seed, rep.to_json()))
    return EXIT_OK


def cmd_fidelity(args) -> int:
    _require(args, "tau", "eps", "delta")
    psi = _load_input(args)
    seed = _seed(args)
    rep = learners.estimate_fidelity(psi, args.tau, args.eps, args.delta, seed,
                                     cap_vertices=args.cap_vertices, m_clique=args.m_override)
    _emit_json(args, _envelope(args, seed, rep.to_json()))
    return EXIT_OK


def cmd_eta(args) -> int:
    psi = _load_input(args)
    seed = _seed(args)
    m = args.m_override if args.m_override is not None else 1000
    eta = learners.eta_estimate(psi, m, seed)
    _emit_json(args, _envelope(args, seed, {"eta_hat": eta, "m": m, "n": psi.n}))
    return EXIT_OK


def cmd_test(args) -> int:
    _require(args, "alpha1", "alpha2", "delta")
    learners.tolerant_gap(args.alpha1, args.alpha2)
    psi = _load_input(args)
    seed = _seed(args)
    rep = learners.tolerant_test(psi, args.alpha1, args.alpha2, args.delta, seed)
    _emit_json(args, _envelope(args, seed, rep.to_json()))
    return EXIT_OK


def cmd_regime_grid(args) -> int:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha1", "alpha2", "ours", "gnw"])
    for a1, a2, ours, gnw in learners.regime_grid(args.steps):
        w.writerow([f"{float(a1):.3f}", f"{float(a2):.3f}", int(ours), int(gnw)])
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_verify(args) -> int:
    n = 3 if args.n is None else args.n
    if not 1 <= n <= states.DIST_CAP:
        raise CapExceededError(f"verify supports n in 1..{states.DIST_CAP}")
    seed = _seed(args)
    gen, _ = learners.make_rng(seed)
    counts = run_identity_suite(n, args.trials, gen)
    ok = all(c["fail"] == 0 for c in counts.values())
    _emit_json(args, _envelope(args, seed, {"n": n, "trials": args.trials, "checks": counts, "all_passed": ok}))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_catalog(args) -> int:
    n = 1 if args.n is None else args.n
    _emit_json(args, oracle.catalog(n).to_json())
    return EXIT_OK


COMMANDS: dict[str, Callable] = {
    "sample": cmd_sample,
    "dist": cmd_dist,
    "distinguish": cmd_distinguish,
    "fidelity": cmd_fidelity,
    "eta": cmd_eta,
    "test": cmd_test,
    "regime-grid": cmd_regime_grid,
    "verify": cmd_verify,
    "catalog": cmd_catalog,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--delta", type=float)
    common.add_argument("--tau", type=float)
    common.add_argument("--eps", type=float)
    common.add_argument("--alpha1", type=float)
    common.add_argument("--alpha2", type=float)
    common.add_argument("--mode", choices=[m.value for m in SampleMode], default="exact")
    common.add_argument("--state-file")
    common.add_argument("--circuit-file")
    common.add_argument("--out")
    common.add_argument("--format", choices=["json", "csv", "text"])
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("--m-override", type=int)
    common.add_argument("--cap-vertices", type=int, default=60)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="stabkit", description="Stabilizer estimation by Bell difference sampling.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("sample", parents=[common], help="draw Bell difference samples")
    p.add_argument("--count", type=int, default=100)
    p = sub.add_parser("dist", parents=[common], help="dump the p or q table")
    p.add_argument("--which", choices=["p", "q"], default="q")
    d = sub.add_parser("distinguish", parents=[common], help="Haar versus doped-Clifford test")
    d.add_argument("--early-exit", action="store_true")
    sub.add_parser("fidelity", parents=[common], help="find a high-fidelity stabilizer state")
    sub.add_parser("eta", parents=[common], help="estimate the eta statistic")
    sub.add_parser("test", parents=[common], help="tolerant stabilizer testing")
    g = sub.add_parser("regime-grid", parents=[common], help="feasibility grid as CSV")
    g.add_argument("--steps", type=int, default=200)
    sub.add_parser("verify", parents=[common], help="run the subspace identity suite")
    sub.add_parser("catalog", parents=[common], help="export all stabilizer states for small n")
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    threads = os.environ.get("STABKIT_THREADS")
    try:
        limit = int(threads) if threads else None
    except ValueError:
        print(f"error: STABKIT_THREADS must be an integer, got {threads!r}", file=sys.stderr)
        return EXIT_PARAM
    try:
        with threadpool_limits(limits=limit):
            return COMMANDS[args.command](args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except (CapExceededError, NoCandidateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
