"""
Log dimensionless jerk
======================

LDLJ summarises how smooth a trajectory is; higher is smoother.  It ignores
the amplitude of the motion and the time scale, so it only reacts to shape.
"""

import numpy as np

from animqa import ldlj

fps = 100.0
t = np.arange(0.0, 1.0 + 1e-9, 1 / fps)

# a minimum-jerk reach is about as smooth as a point-to-point move gets
reach = 10 * t**3 - 15 * t**4 + 6 * t**5
print(f"minimum-jerk reach   {ldlj(reach, fps):8.3f}")

# same movement, ten times larger: unchanged
print(f"scaled by 10         {ldlj(10 * reach, fps):8.3f}")

# the cubic x = t^3 has a closed form, -ln 36
print(f"cubic                {ldlj(t**3, fps):8.3f}   (exact {-np.log(36):.3f})")

# jitter and dropped frames both cost smoothness
rng = np.random.default_rng(0)
print(f"with 1 mm jitter     {ldlj(reach + rng.normal(0, 1e-3, t.size), fps):8.3f}")
held = reach[(np.arange(t.size) // 4) * 4]  # every fourth sample held
print(f"sample-and-hold x4   {ldlj(held, fps):8.3f}")
