"""Compare greedy selection rules against uniform sampling on a lasso
problem with correlated features.

Greedy rules pay n inner products per step but make far better choices;
on sparse ground truth they reach a given suboptimality in a small
fraction of the iterations uniform sampling needs.

Run:  python3 demos/lasso_rule_comparison.py
"""

import numpy as np

from greedycd.data_io import CorrelatedLasso, SynthSpec, gen_synthetic
from greedycd.objectives import make_lasso, objective_value
from greedycd.selection import Rule
from greedycd.solver import SolverConfig, solve_l1


def main():
    ds = gen_synthetic(SynthSpec(
        CorrelatedLasso(500, 80, density=0.05, correlation=0.3, noise=0.01),
        seed=0))
    lam = 0.1 * float(np.abs(ds.matrix.matvec_T(ds.labels)).max())
    p = make_lasso(ds.matrix, ds.labels, lam)

    ref = solve_l1(p, SolverConfig(max_iters=20000, tol=1e-12,
                                   trace_every=10**9))
    f_star = objective_value(p, ref.final_state)
    print("n = %d coordinates, lambda = %.4f, F* = %.8f" % (p.n, lam, f_star))

    target = f_star + 1e-6
    print("\niterations to reach F* + 1e-6:")
    for rule in (Rule.GSS, Rule.GSR, Rule.GSQ, Rule.UNIFORM):
        tr = solve_l1(p, SolverConfig(rule=rule, max_iters=50000, tol=0.0,
                                      seed=1))
        hit = np.nonzero(tr.f_values <= target)[0]
        iters = "%6d" % hit[0] if len(hit) else "  >%d" % tr.n_steps
        nnz = tr.final_state.nnz
        print("  %-8s %s   (final nnz = %d)" % (rule.value, iters, nnz))


if __name__ == "__main__":
    main()
