"""Step-size stability bounds and what happens when you cross them."""

from fclms import (
    ConstantProfile,
    DesignInput,
    NetworkConfig,
    NodeConfig,
    PlantModel,
    Uniform,
    builtin_specs,
    compare_stability,
    dlms_stability_bound,
    dnlms_stability_bound,
)

# ten nodes, 32 taps, uniform-distribution inputs, uniform fusion weights
d = DesignInput(n_nodes=10, filter_length=32, kurtoses=(1.8,) * 10,
                weights=(0.1,) * 10)
print("network-wide normalized step bounds, ten cooperating nodes:")
print(f"  plain algorithm:      {dlms_stability_bound(d):.4f}")
print(f"  normalized algorithm: {dnlms_stability_bound(d):.4f}")

# a node running alone gets no averaging from the fusion and must use a
# much smaller step
lone = DesignInput(n_nodes=1, filter_length=32, kurtoses=(1.8,))
print(f"  same bound for a lone node: {dlms_stability_bound(lone):.4f}")

# sweep multiples of the single-node bound on the bundled ten-node scenario;
# cooperation keeps the recursion stable well past 1x
spec = builtin_specs()["fig3a"]
print("\nmultiplier sweep (base: single-node bound), theory recursion:")
rows = compare_stability(spec, [0.5, 1.0, 2.0, 4.0, 6.0], base="isolated")
for row in rows:
    verdict = "diverged" if row.theory_diverged else "stable"
    print(f"  {row.multiplier:4.1f}x  predicted "
          f"{'stable  ' if row.predicted_stable else 'unstable'}  "
          f"recursion {verdict}")

# the network-wide bound is sharp for stationary inputs: with constant
# power profiles the recursion flips right at 1x. (With strongly varying
# powers, as above, it is only a guideline.)
const = NetworkConfig(
    nodes=tuple(NodeConfig(weight=0.25, step=0.01, noise_power=1e-6,
                           profile=ConstantProfile(p), dist=Uniform())
                for p in (0.5, 1.0, 1.5, 2.0)),
    filter_length=32,
    plant=PlantModel(32, 1e-9, (1.0,) + (0.0,) * 31))
print("\nmultiplier sweep (base: network bound, constant powers):")
for row in compare_stability(const, [0.99, 1.01], base="network"):
    verdict = "diverged" if row.theory_diverged else "stable"
    print(f"  {row.multiplier:5.2f}x  predicted "
          f"{'stable  ' if row.predicted_stable else 'unstable'}  "
          f"recursion {verdict}  (agrees: {row.agrees})")
