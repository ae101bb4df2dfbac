# %% [markdown]
# # Homogeneous front
# A kink launched in a constant medium relaxes to the travelling-wave
# solution. We compare the fitted speed and width with the closed forms.

# %%
from frontlab import pde
from frontlab.defects import Constant
from frontlab.kinkfit import trajectory

a, s = 0.3, 0.3
grid = pde.Grid(-100, 100, 4000)
u0 = pde.kink_state(grid, -40.0, pde.homogeneous_width(s))
states = pde.integrate(u0, Constant(s), pde.ReactionParams(a), pde.SolverConfig(t_max=150.0, dt_out=1.0))
traj = trajectory(states)

# %%
print("fitted speed", traj.speed[-10:].mean(), "analytic", pde.homogeneous_speed(s, a))
print("fitted width", traj.w[-10:].mean(), "analytic", pde.homogeneous_width(s))
