"""Recover the object-to-background scale ratio, two ways.

A single monocular reconstruction of a moving object is scale-blind: every
positive ratio r produces a geometrically valid trajectory o = c + r * v
along the observation rays.  What pins r down is a physical statement about
the ground: the object's height above its local ground plane is the same in
any two views.  Writing that equality for a view pair and solving gives the
constant-distance estimator.  The intersection baseline instead drops each
ray onto the ground plane and takes the first forward hit — simpler, but
biased toward the visible (upper) part of the object unless the tracked
points include ground contacts.

Run:  python3 demos/02_recover_scale.py
"""

import numpy as np

from trajrec.synthetic import SceneConfig, generate_scene
from trajrec.pipeline import reconstruct_trajectory
from trajrec.trajectory import candidate_view_pairs, rank_view_pairs


def run(scene, method):
    return reconstruct_trajectory(
        scene.sfm_o, scene.sfm_b, scene.label_maps, scene.semantic, method
    )


base = dict(frame_count=10, object_path="s-curve", ground="inclined", ground_angle_deg=7.0)

print("=== clean scene (no noise) ===")
scene = generate_scene(SceneConfig(**base), seed=3)
r_true = scene.true_scale_ratio
for method in ("constant-distance", "intersection"):
    result = run(scene, method)
    r = result.estimate.scale_ratio
    print(f"{method:18s} r = {r:.9f}   rel err {abs(r - r_true) / r_true:.2e}"
          + (f"   (view pair {result.estimate.chosen_pair})" if result.estimate.chosen_pair else ""))
print(f"{'true ratio':18s} r = {r_true:.9f}")
print("Constant-distance is exact here; the baseline lands high because the")
print("tracked object points float above the ground by at least the wheel clearance.")

# The estimator does not use an arbitrary view pair: pairs are ranked by how
# far apart their plane-distance readings are (big numerator = strong
# constraint) and by how consistently the per-point solutions agree.
result = run(scene, "constant-distance")
pairs = candidate_view_pairs(result.family.frame_ids)
scores = rank_view_pairs(result.family, result.planes, pairs)
print(f"\ntop of the view-pair ranking ({len(scores)} candidates):")
for s in scores[:4]:
    print(f"  pair {s.pair}: |numerator| {abs(s.numerator):.4f}, "
          f"ratio variance {s.ratio_variance:.3e}")

print("\n=== noisy scene (pixel sigma 1.0, point sigma 0.01) ===")
errs = {m: [] for m in ("constant-distance", "intersection")}
for seed in range(8):
    noisy = generate_scene(SceneConfig(**base, pixel_sigma=1.0, point_sigma=0.01), seed=seed)
    for method in errs:
        r = run(noisy, method).estimate.scale_ratio
        errs[method].append(abs(r - noisy.true_scale_ratio) / noisy.true_scale_ratio)
for method, e in errs.items():
    print(f"{method:18s} median rel err over 8 seeds: {float(np.median(e)):.4f}")

print("\n=== contact points close the baseline's gap ===")
contact = generate_scene(SceneConfig(**base, include_contact_points=True), seed=3)
r = run(contact, "intersection").estimate.scale_ratio
print(f"intersection with wheel-contact tracks: r = {r:.9f} "
      f"(rel err {abs(r - contact.true_scale_ratio) / contact.true_scale_ratio:.2e})")
print("When some tracked points actually touch the ground, the first forward")
print("ray/plane hit is the right answer and the bias disappears.")
