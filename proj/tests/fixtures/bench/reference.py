"""Evaluation counts of pycma on the sphere and Rosenbrock benchmarks.

Writes reference.json next to this script. Counts are the number of
evaluations until the first candidate below the target, with the same start
points, step sizes and default population sizes as the C++ benchmark.
"""
import json
import pathlib
import statistics

import cma
import numpy as np


def evals_to_target(fn, x0, sigma0, target, budget, seed):
    es = cma.CMAEvolutionStrategy(x0, sigma0, {"seed": seed, "verbose": -9, "maxfevals": budget,
                                               "tolfun": 0, "tolx": 0, "tolfunhist": 0, "tolstagnation": 10**9})
    count = 0
    while count < budget:
        xs = es.ask()
        fs = [fn(np.asarray(x)) for x in xs]
        for f in fs:
            count += 1
            if f < target:
                return count
        es.tell(xs, fs)
    return None


def sphere(x):
    return float(np.sum(x * x))


def rosenbrock(x):
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


seeds = list(range(1, 22))
out = {"pycma_version": cma.__version__, "seeds": seeds}
sph = [evals_to_target(sphere, [1.0] * 10, 0.3, 1e-10, 5000, s) for s in seeds]
ros = [evals_to_target(rosenbrock, [0.0] * 5, 0.5, 1e-6, 30000, s) for s in seeds]
out["sphere_dim10"] = {"evals": sph, "median": statistics.median([e for e in sph if e is not None])}
out["rosenbrock_dim5"] = {"evals": ros, "median": statistics.median([e for e in ros if e is not None])}
pathlib.Path(__file__).with_name("reference.json").write_text(json.dumps(out, indent=2) + "\n")
print(out["sphere_dim10"]["median"], out["rosenbrock_dim5"]["median"])
