"""A small phase picture in (b, s) at unit vorticity.

Dilute suspensions settle to one steady state; concentrated ones tumble.
Set SMOLU_THREADS to spread the cells over several processes.
"""
from smolu.dynamics import FlowParams, SimConfig
from smolu.longtime import sweep, sweep_summary
from smolu.spectral import KernelSpec

template = SimConfig(kernel=KernelSpec.maier_saupe(1.0), flow=FlowParams(1.0, 0.0), t_end=200.0)
cells = sweep([0.5, 2.0, 6.0], [0.05], [1.0], template, seed=3)
for c in cells:
    r = c.result
    extra = f"period {r.period:.6f}" if r.period else f"residual {r.residual_steady:.1e}"
    print(f"b = {c.b:<4g} s = {c.s:<5g} omega = {c.omega:<3g} {r.kind:<10s} {extra}")
print(sweep_summary(cells))
