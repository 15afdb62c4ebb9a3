# %% [markdown]
# # One particle, one dimension
#
# Both attractors sit at the origin, so the only thing that moves is the
# particle itself. Changing how the random weights are handled changes the
# character of the orbit completely.

# %%
import numpy as np

from psokit import TrajectoryStudyConfig, simulate_single_particle
from psokit.kinematics import constricted_parameter_set, polynomial_acceleration

# %% [markdown]
# Replace the uniform draws by their mean (0.5). With `iw = sw = 2` the
# recurrence collapses to `x[t+1] = -x[t-1]`: the particle bounces between
# +100 and -100, spending two steps on each side.

# %%
mean = simulate_single_particle(TrajectoryStudyConfig(weight_mode="mean", steps=12))
print(mean.x)

# %% [markdown]
# Drop the random weights entirely (`U = 1`). Below an acceleration sum of 4
# the orbit stays bounded forever; at 4 and beyond it grows without limit.

# %%
for aw in (1.0, 3.0, 3.9, 4.0, 4.5):
    traj = simulate_single_particle(TrajectoryStudyConfig(
        weight_mode="removed", iw=aw / 2, sw=aw / 2, steps=2000))
    print(f"iw+sw={aw:4}: max |x| = {np.nanmax(np.abs(traj.x)):.3e}")

# %% [markdown]
# Even gentle weights explode once the draws are random and no velocity
# limit is imposed. A clamp tames the same configuration.

# %%
free = [simulate_single_particle(TrajectoryStudyConfig(iw=0.5, sw=0.5, steps=5000, seed=s))
        for s in range(10)]
print("median peak, no clamp:", np.median([np.nanmax(np.abs(t.x)) for t in free]))
clamped = simulate_single_particle(TrajectoryStudyConfig(iw=0.5, sw=0.5, steps=5000, v_max=50.0))
print("peak with v_max=50:", np.abs(clamped.x).max())

# %% [markdown]
# Two ways of taming it through the parameters instead: the constriction
# factor, and the quartic that pairs an inertia weight with an acceleration
# sum.

# %%
print(constricted_parameter_set(4.1))
for w in (0.0, 0.5, 0.7, 0.9):
    print(f"w={w}: iw+sw ~ {polynomial_acceleration(w):.3f}")
