"""The nematic branch: where it starts, what it looks like, and how stiff it is.

Above the critical concentration b = 4 a peaked equilibrium
g = exp(r cos 2theta) / Z appears.  We tabulate r(b), check the fourth
moment against 1 - 4/b and look at the linearized operator about g.
"""
import numpy as np

from smolu.equilibria import NematicState, nematic_field, order_params, solve_r
from smolu.linear import assemble, nonresonance, spectrum

print("b       r(b)          <cos 4theta>   1 - 4/b       Z - 2pi")
for b in (4.001, 4.5, 5.0, 6.0, 8.0, 12.0):
    state = NematicState.from_b(b)
    y = order_params(nematic_field(state, 64)).y
    print(f"{b:<7g} {state.r:<13.10f} {y[1]:<14.10f} {1 - 4 / b:<13.10f} {nonresonance(b)[0]:.6f}")
print("below threshold solve_r(3.9) ->", solve_r(3.9))

rep = spectrum(assemble(NematicState.from_b(6.0), 64))
lam = np.sort(rep.eigenvalues.real)[::-1]
print(f"\nlinearization at b = 6 with 64 modes: kernel dimension {rep.kernel_dim}, "
      f"kernel vector within {rep.kernel_angle:.1e} rad of d(g)/d(theta)")
print("five least negative eigenvalues:", np.array2string(lam[:5], precision=5))
print("the eigenvalue closest to zero after the kernel comes from the odd harmonics: "
      "slow hopping between the two nematic wells")
