"""Command-line front end: compile, simulate, sweep, statmodel, identity-bench.

All commands are deterministic given --seed; every output file records the
seed.  Noise values are always fractions (0.006), never percent.  Exit codes:
0 success, 1 runtime failure, 2 usage or validation error.

Thread count for the simulator kernels can be pinned with the QEDC_THREADS
environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from .circuit import Circuit, CircuitError, ParseError, parse, serialize
from .compile import code_for, encode
from .grover import (
    GroverSpec,
    build_grover_bare,
    build_grover_logical,
    grover_reference_resources,
    ideal_success,
    measured_resources,
)
from .iceberg import (
    REJECTION_CAUSES,
    CodeLayout,
    CodeParams,
    SyndromeSchedule,
    decode_table,
    destructive_measure,
    prepare_zero,
    syndrome_measure,
)
from .sim import CompiledCircuit, NoiseModel, run_shots
from .stats import (
    DetectionModel,
    SweepPoint,
    bootstrap_ci,
    expected_success,
    gamma_of_delta,
    metrics,
    optimal_syndrome,
    sweep_points_from_csv,
    sweep_points_to_csv,
)


class UsageError(ValueError):
    pass


def _trial_seed(master: int, tag: int, p: float, r: int, trial: int) -> int:
    """Order-independent per-trial seed from the grid coordinates."""
    ss = np.random.SeedSequence([int(master), tag, int(round(p * 1e9)), r + 1, trial])
    return int(ss.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# Experiment evaluation
# ---------------------------------------------------------------------------

def evaluate_encoded(spec: GroverSpec, p: float, r: int, shots: int, trials: int,
                     seed: int, engine: str = "numba") -> SweepPoint:
    """Run trials x shots of the encoded circuit; pooled success estimate with
    per-trial bootstrap CI.  Catastrophic trials (no accepted shots) score 0."""
    logical = build_grover_logical(spec)
    phys, layout = encode(logical, None, SyndromeSchedule(r))
    comp = CompiledCircuit(phys)
    noise = NoiseModel.uniform(p)
    marked = np.array([int(b) for b in spec.marked], dtype=np.uint8)
    per_trial = []
    pooled_acc = pooled_ok = 0
    total = 0
    rejections = {c: 0 for c in REJECTION_CAUSES}
    for t in range(trials):
        table = run_shots(comp, noise, shots, _trial_seed(seed, 0, p, r, t), engine=engine)
        accepted, bits, cause = decode_table(table, layout)
        ok = accepted & (bits[:, :spec.s] == marked).all(axis=1)
        n_acc = int(accepted.sum())
        pooled_acc += n_acc
        pooled_ok += int(ok.sum())
        total += shots
        per_trial.append(float(ok.sum() / n_acc) if n_acc else 0.0)
        for idx, c in enumerate(REJECTION_CAUSES):
            rejections[c] += int((cause == idx).sum())
    success = pooled_ok / pooled_acc if pooled_acc else 0.0
    if trials >= 2:
        lo, hi = bootstrap_ci(per_trial, stream=np.random.default_rng(_trial_seed(seed, 2, p, r, 0)))
    else:
        lo = hi = per_trial[0]
    return SweepPoint(p=p, s=spec.s, iterations=spec.iterations, r=r, shots=shots,
                      trials=trials, success=success, survival=pooled_acc / total,
                      ci_low=min(lo, success), ci_high=max(hi, success),
                      rejections=rejections)


def evaluate_bare(spec: GroverSpec, p: float, shots: int, trials: int, seed: int,
                  engine: str = "numba") -> SweepPoint:
    bare = build_grover_bare(spec)
    comp = CompiledCircuit(bare)
    noise = NoiseModel.uniform(p)
    marked = np.array([int(b) for b in spec.marked], dtype=np.uint8)
    per_trial = []
    pooled_ok = 0
    for t in range(trials):
        table = run_shots(comp, noise, shots, _trial_seed(seed, 1, p, -1, t), engine=engine)
        m = table.column("m")
        ok = (m == marked).all(axis=1)
        pooled_ok += int(ok.sum())
        per_trial.append(float(ok.mean()))
    success = pooled_ok / (shots * trials)
    if trials >= 2:
        lo, hi = bootstrap_ci(per_trial, stream=np.random.default_rng(_trial_seed(seed, 3, p, -1, 0)))
    else:
        lo = hi = per_trial[0]
    return SweepPoint(p=p, s=spec.s, iterations=spec.iterations, r=None, shots=shots,
                      trials=trials, success=success, survival=1.0,
                      ci_low=min(lo, success), ci_high=max(hi, success))


# ---------------------------------------------------------------------------
# Identity benchmark circuits
# ---------------------------------------------------------------------------

IDENTITY_ROUNDS = 30


def identity_bench_circuit(r: int, n: int = 6, rounds_total: int = IDENTITY_ROUNDS):
    """Memory benchmark: FT prep, noisy-identity rounds with r syndrome gadgets
    (every rounds_total/r rounds; r=1 lands at the end), destructive readout.

    The noisy identity is U(0,0,0): ideal identity drawing one single-qubit
    fault sample per data qubit per round.
    """
    if r < 1 or rounds_total % r:
        raise UsageError(f"r={r} does not divide {rounds_total} identity rounds")
    params = CodeParams(n)
    layout = CodeLayout.create(params, rounds=r)
    circ = Circuit(layout.qubit_count)
    layout.attach_registers(circ)
    prepare_zero(circ, layout)
    every = rounds_total // r
    done = 0
    for rnd in range(1, rounds_total + 1):
        for q in layout.data:
            circ.u(q, 0.0, 0.0, 0.0)
        if rnd % every == 0 and done < r:
            syndrome_measure(circ, layout, done)
            done += 1
    destructive_measure(circ, layout)
    return circ, layout


def identity_bare_circuit(k: int = 4, rounds_total: int = IDENTITY_ROUNDS) -> Circuit:
    circ = Circuit(k)
    circ.add_creg("m", k)
    for _ in range(rounds_total):
        for q in range(k):
            circ.u(q, 0.0, 0.0, 0.0)
    for q in range(k):
        circ.measure(q, "m", q)
    return circ


def evaluate_identity(p: float, r: int, shots: int, trials: int, seed: int,
                      engine: str = "numba") -> SweepPoint:
    noise = NoiseModel.uniform(p)
    per_trial = []
    if r == 0:
        comp = CompiledCircuit(identity_bare_circuit())
        pooled_ok = 0
        for t in range(trials):
            table = run_shots(comp, noise, shots, _trial_seed(seed, 4, p, -1, t), engine=engine)
            ok = (table.column("m") == 0).all(axis=1)
            pooled_ok += int(ok.sum())
            per_trial.append(float(ok.mean()))
        success, survival = pooled_ok / (shots * trials), 1.0
    else:
        circ, layout = identity_bench_circuit(r)
        comp = CompiledCircuit(circ)
        pooled_acc = pooled_ok = 0
        for t in range(trials):
            table = run_shots(comp, noise, shots, _trial_seed(seed, 4, p, r, t), engine=engine)
            accepted, bits, _ = decode_table(table, layout)
            ok = accepted & (bits == 0).all(axis=1)
            pooled_acc += int(accepted.sum())
            pooled_ok += int(ok.sum())
            per_trial.append(float(ok.sum() / accepted.sum()) if accepted.any() else 0.0)
        success = pooled_ok / pooled_acc if pooled_acc else 0.0
        survival = pooled_acc / (shots * trials)
    if trials >= 2:
        lo, hi = bootstrap_ci(per_trial, stream=np.random.default_rng(_trial_seed(seed, 5, p, r, 0)))
    else:
        lo = hi = per_trial[0]
    return SweepPoint(p=p, s=4, iterations=0, r=r, shots=shots, trials=trials,
                      success=success, survival=survival,
                      ci_low=min(lo, success), ci_high=max(hi, success))


# ---------------------------------------------------------------------------
# CLI plumbing
# ---------------------------------------------------------------------------

def _parse_spec(text: str) -> GroverSpec:
    fields = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"bad --spec fragment {part!r} (want s=INT,d=INT[,marked=BITS])")
        key, val = part.split("=", 1)
        fields[key.strip()] = val.strip()
    try:
        s = int(fields.pop("s"))
        d = int(fields.pop("d"))
    except KeyError as exc:
        raise UsageError(f"--spec missing {exc}") from None
    marked = fields.pop("marked", "")
    if fields:
        raise UsageError(f"unknown --spec keys {sorted(fields)}")
    try:
        return GroverSpec(s, d, marked)
    except CircuitError as exc:
        raise UsageError(str(exc)) from None


def _parse_list(text: str, conv):
    try:
        return [conv(tok) for tok in text.split(",") if tok != ""]
    except ValueError as exc:
        raise UsageError(f"bad list {text!r}: {exc}") from None


def _setup_threads():
    var = os.environ.get("QEDC_THREADS")
    if var:
        try:
            import numba
            numba.set_num_threads(max(1, int(var)))
        except (ImportError, ValueError):
            pass


def cmd_compile(args) -> int:
    if args.input:
        try:
            with open(args.input) as fh:
                logical = parse(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read {args.input}: {exc}") from None
        spec = None
    else:
        spec = _parse_spec(args.spec)
        logical = build_grover_logical(spec)
    schedule = SyndromeSchedule(args.r)
    phys, layout = encode(logical, None, schedule)
    report = measured_resources(phys, layout)
    report.extra["data_qubits"] = layout.n
    report.extra["seed"] = None
    out = args.out or "compiled"
    circ_path = f"{out}.circuit.json"
    res_path = f"{out}.resources.json"
    with open(circ_path, "w") as fh:
        fh.write(serialize(phys))
    with open(res_path, "w") as fh:
        json.dump(report.to_json(), fh, indent=1)
    print(f"wrote {circ_path} and {res_path}")
    print(f"total qubits {report.qubits} (data block {layout.n}), "
          f"measurements {report.measurements}, RZZ {report.rzz_count}, "
          f"U {report.u_count}, depth {report.depth}")
    if spec is not None and spec.s % 2 == 0 and spec.iterations >= 1:
        ref = grover_reference_resources(spec.s, spec.iterations)
        print("reference comparison (measured / closed form, delta):")
        for name in ("qubits", "measurements", "rzz_count", "u_count", "depth"):
            got = getattr(report, name)
            want = getattr(ref, name)
            delta = (got - want) / want if want else float("nan")
            print(f"  {name:12s} {got:6d} / {want:6d}   {delta:+.1%}")
    return 0


def cmd_simulate(args) -> int:
    try:
        with open(args.circuit) as fh:
            circ = parse(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {args.circuit}: {exc}") from None
    if args.shots < 1 or args.trials < 1:
        raise UsageError("shots and trials must be >= 1")
    noise = NoiseModel.uniform(args.p)
    result = {"p": args.p, "shots": args.shots, "trials": args.trials, "seed": args.seed}
    if "layout" in circ.meta:
        layout = CodeLayout.from_meta(circ.meta["layout"])
        comp = CompiledCircuit(circ)
        per_trial = []
        pooled_acc = pooled_ok = 0
        rejections = {c: 0 for c in REJECTION_CAUSES}
        for t in range(args.trials):
            table = run_shots(comp, noise, args.shots, _trial_seed(args.seed, 0, args.p, -1, t))
            accepted, bits, cause = decode_table(table, layout)
            marked = args.marked or "1" * layout.k
            want = np.array([int(b) for b in marked[:layout.k]], dtype=np.uint8)
            ok = accepted & (bits[:, :len(want)] == want).all(axis=1)
            pooled_acc += int(accepted.sum())
            pooled_ok += int(ok.sum())
            per_trial.append(float(ok.sum() / accepted.sum()) if accepted.any() else 0.0)
            for idx, c in enumerate(REJECTION_CAUSES):
                rejections[c] += int((cause == idx).sum())
        result["mode"] = "encoded"
        result["success"] = pooled_ok / pooled_acc if pooled_acc else 0.0
        result["survival"] = pooled_acc / (args.shots * args.trials)
        result["rejections"] = rejections
    elif circ.meta.get("bare"):
        comp = CompiledCircuit(circ)
        marked = args.marked or circ.meta.get("marked")
        s = circ.meta.get("s", circ.num_clbits)
        want = np.array([int(b) for b in marked], dtype=np.uint8)
        per_trial = []
        for t in range(args.trials):
            table = run_shots(comp, noise, args.shots, _trial_seed(args.seed, 1, args.p, -1, t))
            per_trial.append(float((table.column("m")[:, :s] == want).all(axis=1).mean()))
        result["mode"] = "bare"
        result["success"] = float(np.mean(per_trial))
        result["survival"] = 1.0
    else:
        raise UsageError("circuit file has neither layout metadata nor a bare marker")
    if args.trials >= 2:
        lo, hi = bootstrap_ci(per_trial, stream=np.random.default_rng(args.seed))
        result["ci_low"], result["ci_high"] = lo, hi
    text = json.dumps(result, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(text)
    return 0


def cmd_sweep(args) -> int:
    spec = _parse_spec(args.spec)
    ps = _parse_list(args.p, float)
    rs = _parse_list(args.r, int)
    if not ps or not rs:
        raise UsageError("empty --p or --r grid")
    if args.shots < 1 or args.trials < 1:
        raise UsageError("shots and trials must be >= 1")
    out = args.out or "sweep.csv"
    existing = []
    if os.path.exists(out):
        existing = sweep_points_from_csv(out)
    have = {(pt.p, pt.s, pt.iterations, pt.r) for pt in existing}
    points = list(existing)
    for p in ps:
        if (p, spec.s, spec.iterations, None) not in have:
            points.append(evaluate_bare(spec, p, args.shots, args.trials, args.seed))
            sweep_points_to_csv(points, out, seed=args.seed)
        for r in rs:
            if (p, spec.s, spec.iterations, r) in have:
                continue
            points.append(evaluate_encoded(spec, p, r, args.shots, args.trials, args.seed))
            sweep_points_to_csv(points, out, seed=args.seed)
    summary = {"seed": args.seed, "spec": {"s": spec.s, "d": spec.iterations,
                                           "marked": spec.marked}, "per_p": {}}
    p_ideal = ideal_success(2 ** spec.s, 1, spec.iterations)
    for p in ps:
        enc = [pt for pt in points if pt.r is not None and pt.p == p
               and pt.s == spec.s and pt.iterations == spec.iterations]
        bare = [pt for pt in points if pt.r is None and pt.p == p
                and pt.s == spec.s and pt.iterations == spec.iterations]
        if not enc or not bare:
            continue
        choice = optimal_syndrome(enc, p_bare=bare[0].success, p_ideal=p_ideal)
        mm = metrics(choice.success_star, bare[0].success, p_ideal)
        summary["per_p"][str(p)] = {
            "r_star": choice.r_star,
            "success_star": choice.success_star,
            "bare": bare[0].success,
            "ideal": p_ideal,
            "nu_star": choice.nu_star,
            "nu_p75": choice.nu_p75,
            "nu_mean": choice.nu_mean,
            "eta_enc_star": mm.eta_enc,
            "eta_bare": mm.eta_bare,
        }
    with open(os.path.splitext(out)[0] + ".summary.json", "w") as fh:
        json.dump(summary, fh, indent=1)
    print(f"sweep written to {out}; summary alongside")
    return 0


def cmd_statmodel(args) -> int:
    eps = _parse_list(args.eps, float)
    if args.delta:
        deltas = _parse_list(args.delta, float)
    else:
        deltas = list(np.round(np.linspace(0.0, 1.0, args.delta_steps), 10))
    out = args.out or "statmodel.csv"
    with open(out, "w", newline="") as fh:
        fh.write(f"# seed={args.seed}\n")
        w = csv.writer(fh)
        w.writerow(["epsilon", "delta", "gamma", "shots", "expected_success"])
        for e in eps:
            for d in deltas:
                g = gamma_of_delta(d)
                val = expected_success(DetectionModel(e, d, g, args.shots))
                w.writerow([e, d, g, args.shots, val])
    print(f"wrote {out}")
    return 0


def cmd_identity_bench(args) -> int:
    ps = _parse_list(args.p, float)
    rs = _parse_list(args.r, int)
    for r in rs:
        if r != 0 and (r < 0 or IDENTITY_ROUNDS % r):
            raise UsageError(
                f"r={r} rejected: syndrome gadgets go after every {IDENTITY_ROUNDS}/r identity "
                f"rounds, so r must divide {IDENTITY_ROUNDS} (r=0 runs the bare 4-qubit circuit)")
    out = args.out or "identity_bench.csv"
    with open(out, "w", newline="") as fh:
        fh.write(f"# seed={args.seed}\n")
        w = csv.writer(fh)
        w.writerow(["p", "r", "shots", "trials", "success", "survival", "ci_low", "ci_high"])
        for p in ps:
            for r in rs:
                pt = evaluate_identity(p, r, args.shots, args.trials, args.seed)
                w.writerow([p, r, pt.shots, pt.trials, pt.success, pt.survival,
                            pt.ci_low, pt.ci_high])
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qedc",
        description="Fault-tolerant compilation and noisy simulation for [[n, n-2, 2]] codes")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a logical circuit or builtin Grover spec")
    c.add_argument("--spec", help="builtin Grover: s=INT,d=INT[,marked=BITS]")
    c.add_argument("--input", help="logical circuit JSON file")
    c.add_argument("--r", type=int, default=0, help="syndrome rounds")
    c.add_argument("--out", help="output path prefix")
    c.set_defaults(func=cmd_compile)

    s = sub.add_parser("simulate", help="simulate a compiled circuit file")
    s.add_argument("--circuit", required=True)
    s.add_argument("--p", type=float, required=True, help="noise fraction, e.g. 0.006")
    s.add_argument("--shots", type=int, default=1000)
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--seed", type=int, default=2024)
    s.add_argument("--marked", help="override success bit string")
    s.add_argument("--out", help="result JSON path")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="noise x syndrome-round grid with bare baseline")
    w.add_argument("--spec", required=True)
    w.add_argument("--p", default="0.002,0.004,0.006,0.008")
    w.add_argument("--r", default=",".join(str(i) for i in range(1, 13)))
    w.add_argument("--shots", type=int, default=1000)
    w.add_argument("--trials", type=int, default=10)
    w.add_argument("--seed", type=int, default=2024)
    w.add_argument("--out", help="CSV path (resumable)")
    w.add_argument("--format", choices=("csv", "json"), default="csv")
    w.set_defaults(func=cmd_sweep)

    m = sub.add_parser("statmodel", help="closed-form detection-model curves")
    m.add_argument("--eps", default="0.1,0.3,0.6")
    m.add_argument("--delta", help="explicit delta list (default: grid)")
    m.add_argument("--delta-steps", type=int, default=101)
    m.add_argument("--shots", type=int, default=10)
    m.add_argument("--seed", type=int, default=2024)
    m.add_argument("--out")
    m.set_defaults(func=cmd_statmodel)

    b = sub.add_parser("identity-bench", help="noisy-identity memory benchmark")
    b.add_argument("--p", default="0.005,0.01,0.015")
    b.add_argument("--r", default="0,1,2,3,5,6,10,15,30")
    b.add_argument("--shots", type=int, default=100)
    b.add_argument("--trials", type=int, default=10)
    b.add_argument("--seed", type=int, default=2024)
    b.add_argument("--out")
    b.set_defaults(func=cmd_identity_bench)
    return ap


def main(argv=None) -> int:
    _setup_threads()
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "compile" and not (args.spec or args.input):
        ap.error("compile needs --spec or --input")
    try:
        return args.func(args)
    except (UsageError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CircuitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
