"""When the scale is genuinely unobservable, say so.

The constant-distance constraint solves for r from the difference between
two views' ground-plane readings.  Its denominator is n . v - n' . v': how
differently the observation ray tilts against the local ground across the
pair.  If the camera translates parallel to a flat ground at constant
height, every view reads the same tilt, every denominator cancels, and no
view pair constrains the scale at all.  That is not an estimator weakness —
the data simply does not contain the answer — and the right behaviour is a
loud, typed failure instead of a confidently wrong number.

Run:  python3 demos/04_degenerate_motion.py
"""

import numpy as np

from trajrec.errors import AllPairsDegenerate
from trajrec.pipeline import reconstruct_trajectory
from trajrec.synthetic import SceneConfig, generate_scene

print("=== constant-height parallel camera motion ===")
config = SceneConfig(frame_count=10, degenerate_parallel=True)
scene = generate_scene(config, seed=0)

heights = np.array([scene.sfm_b.cameras[f].center[1] for f in sorted(scene.sfm_b.cameras)])
print(f"camera heights: {heights.min():.6f} .. {heights.max():.6f} "
      f"(spread {heights.max() - heights.min():.1e})")

try:
    reconstruct_trajectory(
        scene.sfm_o, scene.sfm_b, scene.label_maps, scene.semantic, "constant-distance"
    )
    print("unexpectedly got an estimate — this scene should not constrain the scale")
except AllPairsDegenerate as exc:
    print(f"raised AllPairsDegenerate: {exc}")
    print("(the CLI maps this to exit code 3 with error=degenerate-camera-motion)")

print("\n=== same scene geometry, orbiting camera ===")
ok = generate_scene(SceneConfig(frame_count=10), seed=0)
result = reconstruct_trajectory(ok.sfm_o, ok.sfm_b, ok.label_maps, ok.semantic, "constant-distance")
print(f"orbit varies the ray/ground tilt, so the pair {result.estimate.chosen_pair} "
      f"recovers r = {result.estimate.scale_ratio:.9f} (true {ok.true_scale_ratio})")
