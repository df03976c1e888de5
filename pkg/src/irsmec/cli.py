"""Command line entry point: ``irsmec {solve,sweep,oracle,validate}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from .channel import realize_trial, trial_rng
from .exceptions import IrsMecError
from .harness import (ExperimentSpec, check_invariants, load_spec, rows_to_csv,
                      run_experiment, write_channel_dump)
from .model import validate_scenario
from .oracle import grouping_oracle, subset_oracle
from .selection import solve_finite_q, solve_infinite_q
from . import baselines


def _spec(args) -> ExperimentSpec:
    spec = load_spec(args.spec) if args.spec else ExperimentSpec()
    if args.seed is not None:
        spec.seed = args.seed
    if getattr(args, "trials", None) is not None:
        if args.trials < 1:
            raise ValueError("--trials must be >= 1")
        spec.trials = args.trials
    return spec


def _one_realization(spec: ExperimentSpec, trial: int = 0):
    params, geo, templates = spec.scenario(spec.sweep_values[0])
    validate_scenario(params, templates)
    devices, channels = realize_trial(params, geo, templates, trial_rng(spec.seed, trial))
    return params, devices, channels


def _solve_named(name, devices, channels, params, rng):
    if name == "infinite_q":
        return solve_infinite_q(devices, channels, params)
    if name == "finite_q":
        return solve_finite_q(devices, channels, params)
    if name == "random_beam":
        return baselines.solve_random_beam(devices, channels, params, rng)
    fn = {"offload_only": baselines.solve_offload_only, "local_only": baselines.solve_local,
          "no_irs": baselines.solve_no_irs,
          "offload_only_no_irs": baselines.solve_offload_only_no_irs}.get(name)
    if fn is None:
        raise ValueError(f"solver {name!r} does not produce a Solution")
    return fn(devices, channels, params)


def cmd_solve(args) -> int:
    spec = _spec(args)
    params, devices, channels = _one_realization(spec)
    if args.dump_channels:
        write_channel_dump(args.dump_channels, [(0, channels)])
    out = {}
    for name in spec.solvers:
        sol = _solve_named(name, devices, channels, params, trial_rng(spec.seed, 0, 1))
        out[name] = sol.summary()
    text = json.dumps(out, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_sweep(args) -> int:
    spec = _spec(args)
    if args.dump_channels:
        params, geo, templates = spec.scenario(spec.sweep_values[0])
        dump = [(t, realize_trial(params, geo, templates, trial_rng(spec.seed, t))[1])
                for t in range(spec.trials)]
        write_channel_dump(args.dump_channels, dump)
    rows = run_experiment(spec, n_jobs=args.jobs, timing=args.timing)
    text = rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_oracle(args) -> int:
    spec = _spec(args)
    params, devices, channels = _one_realization(spec)
    t0 = time.perf_counter()
    inf = solve_infinite_q(devices, channels, params)
    orc = subset_oracle(devices, channels, params)
    lines = [
        f"infinite_q     rate={inf.sum_rate_bits:.6e} offload={sorted(inf.offload_set)}",
        f"oracle_subset  rate={orc.best_rate_bits:.6e} offload={sorted(orc.best_offload_set)} "
        f"enumerated={orc.enumerated_count}",
        f"gap_infinite   {1 - inf.sum_rate_bits / orc.best_rate_bits:.3e}",
    ]
    if len(devices) <= 6 and params.q_budget <= 3 and params.n_elements <= 4:
        fin = solve_finite_q(devices, channels, params)
        grp = grouping_oracle(devices, channels, params)
        lines += [
            f"finite_q       rate={fin.sum_rate_bits:.6e} offload={sorted(fin.offload_set)}",
            f"oracle_group   rate={grp.best_rate_bits:.6e} offload={sorted(grp.best_offload_set)} "
            f"enumerated={grp.enumerated_count}",
            f"ratio_finite   {fin.sum_rate_bits / grp.best_rate_bits:.6f}",
        ]
    lines.append(f"elapsed_s      {time.perf_counter() - t0:.3f}")
    print("\n".join(lines))
    return 0


def cmd_validate(args) -> int:
    spec = _spec(args)
    params, devices, channels = _one_realization(spec)
    report = check_invariants(devices, channels, params, trial_rng(spec.seed, 0, 2))
    failed = 0
    for name, ok, detail in report:
        print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
        failed += not ok
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="irsmec", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, trials=False):
        sp.add_argument("--spec", help="JSON experiment spec (defaults built in)")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None)
        if trials:
            sp.add_argument("--trials", type=int, default=None)

    sp = sub.add_parser("solve", help="solve one realization and print the allocation")
    common(sp)
    sp.add_argument("--dump-channels", default=None, help="write the realization as CSV")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("sweep", help="Monte Carlo sweep to CSV")
    common(sp, trials=True)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--timing", action="store_true",
                    help="fill mean_runtime_ms (makes the CSV non-reproducible)")
    sp.add_argument("--dump-channels", default=None)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("oracle", help="compare solvers against brute force")
    common(sp)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("validate", help="check solver invariants on one realization")
    common(sp)
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (IrsMecError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
