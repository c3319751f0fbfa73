"""Compiled kernel against the pure-Python one.

Two measurements:

* raw transitions: the same random coded words fed to both kernel modules;
* end to end: ``axver verify`` on corpus programs, once normally and once
  in a child process with ``AXVER_PURE_PYTHON=1``.

Usage: ``python benchmarks/bench_kernel.py [--words N] [--repeat K]``
"""

from __future__ import annotations

import argparse
import importlib
import json
import os
import random
import subprocess
import sys
import time
from importlib import resources

from axver import _kernel
from axver.executions import Assign, AssignFn, AssumeEq, AssumeNegRel, AssumeNeq, AssumeRel
from axver.scc_automaton import Space

PROGRAMS = ["sorted_search.axv", "sorted_search_verbatim.axv", "max_total.axv",
            "reach_chain.axv", "memoizing_comm.axv"]


def _alphabet(variables):
    out = []
    for x in variables:
        for y in variables:
            out += [Assign(x, y), AssumeEq(x, y), AssumeNeq(x, y), AssignFn(x, "f", (y,)),
                    AssumeRel("R", (x, y)), AssumeNegRel("R", (x, y))]
            out += [AssignFn(x, "g", (y, z)) for z in variables]
    return out


def _words(n, seed=1):
    variables = ["a", "b", "c", "d", "e", "v*"]
    space = Space(variables, {"R"})
    codes = [space.encode(a) for a in _alphabet(variables)]
    rng = random.Random(seed)
    return space, [[rng.choice(codes) for _ in range(rng.randint(5, 25))] for _ in range(n)]


def _drive(kernel, space, words, hist):
    trans = frozenset({"R"})
    steps = 0
    t0 = time.perf_counter()
    for word in words:
        q = kernel.initial(len(space), hist)
        for code in word:
            q, _ = kernel.step(q, code, trans, space.aux)
            steps += 1
            if q is None:
                break
    return steps, time.perf_counter() - t0


def _verify_ms(name, pure):
    env = dict(os.environ)
    if pure:
        env["AXVER_PURE_PYTHON"] = "1"
    else:
        env.pop("AXVER_PURE_PYTHON", None)
    path = str(resources.files("axver.corpus").joinpath(name))
    proc = subprocess.run([sys.executable, "-m", "axver.cli", "stats", path, "--json"],
                          env=env, capture_output=True, text=True)
    kernel = json.loads(proc.stdout)["kernel"]
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "axver.cli", "verify", path, "--json"],
                          env=env, capture_output=True, text=True)
    wall = time.perf_counter() - t0
    report = json.loads(proc.stdout)
    return kernel, report["outcome"], report["stats"]["millis"], wall


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--words", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    try:
        ckernel = importlib.import_module("axver._ckernel")
    except ImportError:
        sys.exit("the compiled kernel is not built; reinstall without AXVER_PURE_PYTHON")

    space, words = _words(args.words)
    print(f"raw transitions over {args.words} random words (best of {args.repeat})")
    print(f"{'mode':<12}{'kernel':<10}{'steps':>9}{'seconds':>10}{'steps/s':>12}")
    for hist in (False, True):
        mode = "coherence" if hist else "feasibility"
        best = {}
        for name, k in (("python", _kernel), ("compiled", ckernel)):
            runs = [_drive(k, space, words, hist) for _ in range(args.repeat)]
            steps, secs = min(runs, key=lambda r: r[1])
            best[name] = secs
            print(f"{mode:<12}{name:<10}{steps:>9}{secs:>10.3f}{steps / secs:>12.0f}")
        print(f"{'':<12}speedup {best['python'] / best['compiled']:.2f}x")

    print("\nend to end: axver verify (search time reported by the tool)")
    print(f"{'program':<30}{'python ms':>11}{'compiled ms':>13}{'speedup':>9}  outcome")
    for name in PROGRAMS:
        kp, op, msp, _ = _verify_ms(name, True)
        kc, oc, msc, _ = _verify_ms(name, False)
        assert (kp, kc) == ("python", "compiled"), (kp, kc)
        assert op == oc, (name, op, oc)
        print(f"{name:<30}{msp:>11.1f}{msc:>13.1f}{msp / max(msc, 1e-3):>8.2f}x  {oc}")


if __name__ == "__main__":
    main()
