"""
Measuring congestion: the functionals J and Psi
===============================================

Two numbers summarise how rough a run was.  ``J`` integrates the total
variation of the density over time - the amount of spatial oscillation
the solution carried.  ``Psi`` integrates a queue weight (a ramp that
switches on between density 0.75 and 0.85) over time and over an
observation window on the approach to the slow zone - the time cars
spent sitting in a dense queue there.  This demo computes both on the
reference instance and shows the raw material they are built from.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from nlwr import (
    DEFAULT_QUEUE_WEIGHT,
    baseline_config,
    build_problem,
    functional_j,
    functional_psi,
    solve,
)
from nlwr.functionals import DEFAULT_WINDOW

OUT = Path(__file__).resolve().parent / "output"
OUT.mkdir(exist_ok=True)

cfg = baseline_config()
solution = solve(build_problem(cfg))

J = functional_j(solution)
Psi = functional_psi(solution)
print(f"J   (time-integrated total variation)   = {J:.6f}")
print(f"Psi (queue weight over {DEFAULT_WINDOW}) = {Psi:.6f}")

# --- the ingredients ---------------------------------------------------
fig, axes = plt.subplots(1, 3, figsize=(13, 4), constrained_layout=True)

# TV(t): zero while the datum is constant, jumping to life at the first
# speed-limit switch; J is the area under this curve
axes[0].plot(solution.step_times, solution.tv_history, lw=0.9)
for t_switch in (cfg.switch_t1, cfg.switch_t2):
    axes[0].axvline(t_switch, color="r", ls="--", lw=0.8)
axes[0].set_xlabel("t")
axes[0].set_ylabel("TV(rho(t))")
axes[0].set_title(f"total variation; J = area = {J:.3f}")

# the queue weight: which densities count as "queued"
rho = np.linspace(0.0, 1.0, 400)
axes[1].plot(rho, DEFAULT_QUEUE_WEIGHT(rho))
axes[1].set_xlabel("rho")
axes[1].set_ylabel("q(rho)")
axes[1].set_title("queue weight (ramp 0.75 -> 0.85)")

# where the queue time accumulated along the road; Psi sums the shaded
# observation window, which sits on the approach to the slow zone
x = solution.grid.centers()
axes[2].plot(x, solution.queue_time_integral, lw=0.9)
axes[2].axvspan(*DEFAULT_WINDOW, color="0.85")
axes[2].set_xlabel("x")
axes[2].set_ylabel("integral of q(rho) dt")
axes[2].set_title("queue time per cell; window shaded")

target = OUT / "congestion_functionals.png"
fig.savefig(target, dpi=150)
print(f"figure written to {target}")

# --- the functionals react to the kernel offset ------------------------
# looking slightly behind (delta < 0) or ahead (delta > 0) changes how
# traffic piles up; the full story is in the parameter-sweep demo
print("\n delta      J         Psi")
print(f" {cfg.delta:+.2f}   {J:8.5f}   {Psi:8.5f}   (reference)")
for delta in (-0.04, 0.06):
    sol = solve(build_problem(cfg.replaced(delta=delta)))
    print(f" {delta:+.2f}   {functional_j(sol):8.5f}   {functional_psi(sol):8.5f}")
