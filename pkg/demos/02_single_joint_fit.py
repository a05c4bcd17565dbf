"""
Fitting one joint from motion
=============================

Two bodies that share a ball joint agree, every frame, on one world
point.  Stacking that agreement over frames gives a small linear
system whose solution locates the joint in both body frames at once.
No poses, angles, or limb lengths are assumed up front.
"""
import numpy as np

from skelfit import Excitation, SynthBody, SynthSpec, generate, solve_joint

# an upper arm hanging off a torso: the joint sits at c in the arm
# frame and l in the torso frame
truth_c = np.array([0.05, 0.12, -0.03])
truth_l = np.array([0.02, 0.13, -0.01])

spec = SynthSpec(
    bodies=(
        SynthBody(0, None, label="torso"),
        SynthBody(1, 0, c=truth_c, l=truth_l, excitation=Excitation(max_angle=1.0)),
    ),
    frame_count=400,
    seed=11,
)
session, _ = generate(spec)

fit = solve_joint(session, 1, 0)
print("classification:", fit.classification)
print("c  (child frame):", np.round(fit.c, 9), " truth", truth_c)
print("l (parent frame):", np.round(fit.l, 9), " truth", truth_l)
print("fit error epsilon:", fit.epsilon, "m")

# the six singular values tell the story: all comfortably nonzero
# means the motion pinned the joint down in every direction
print("singular values:", np.round(fit.singular_values, 3))
