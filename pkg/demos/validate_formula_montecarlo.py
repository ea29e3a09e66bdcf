"""
Checking the variance formula by simulation
===========================================

The closed-form variances and covariance are first-order
approximations.  Drawing many test sets from a fixed distribution
gives their empirical counterparts, and the two should agree to within
sampling error.
"""

# %%
import math

from fcompare.montecarlo import JointPmf, run_validation

pmf = JointPmf.from_rates(0.15, (0.7, 0.6), (0.05, 0.06), 0.5, 0.3)
print(pmf.as_dict())

# %%
# 20 000 replicates of a 1000-example test set.  Work is spread over
# threads but the result does not depend on the number of workers.
r = run_validation(pmf, n=1000, reps=20_000, seed=7, workers=4)
print(f"retained {r.reps_retained} of {r.reps_total}")

# %%
# Side by side, with the deviation expressed in combined standard errors.
rows = [
    ("Var F1", r.emp_var1, r.mean_analytic_var1, r.se_emp_var1, r.se_analytic_var1),
    ("Var F2", r.emp_var2, r.mean_analytic_var2, r.se_emp_var2, r.se_analytic_var2),
    ("Cov", r.emp_cov, r.mean_analytic_cov, r.se_emp_cov, r.se_analytic_cov),
]
for name, emp, ana, se_e, se_a in rows:
    print(f"{name:7s} simulated {emp:.4e}  formula {ana:.4e}  "
          f"({(ana - emp) / math.hypot(se_e, se_a):+.2f} s.e.)")
print(f"corr    simulated {r.emp_corr:.4f}  formula {r.mean_analytic_corr:.4f}")

# %%
# Variances shrink as 1/n, so n * Var should be roughly flat.
for n in (250, 500, 1000, 2000):
    v = run_validation(pmf, n=n, reps=4000, seed=n).emp_var1
    print(n, n * v)
