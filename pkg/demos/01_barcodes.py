"""Death-times of small point clouds and what beta-connectivity means."""
import numpy as np

from topodense import barcode, barcode_backward, is_beta_connected

# Three points on a line: merges happen at distances 1 and 2.
line = np.array([0.0, 1.0, 3.0])
bc = barcode(line)
for e in bc.edges:
    print(f"points {e.i} and {e.j} merge at r = {e.length:g}")

# Connected means every merge radius is strictly below beta.
for beta in (2.0, 2.5):
    print(f"beta = {beta}: connected = {is_beta_connected(line, beta)}")

# Gradients: lengthening the (0, 1) edge needs point 0 to move left, point 1 right.
grad, _ = barcode_backward(line, bc, upstream=np.array([1.0, 0.0]))
print("d(first death)/dz =", grad.ravel())

# A noisy circle keeps all death-times small; a two-cluster cloud has one long bar.
rng = np.random.default_rng(0)
theta = rng.uniform(0, 2 * np.pi, 40)
circle = np.column_stack([np.cos(theta), np.sin(theta)])
clusters = np.concatenate([rng.normal(0, 0.1, (20, 2)), rng.normal(0, 0.1, (20, 2)) + [3, 0]])
print("circle:   longest death", barcode(circle).deaths.max().round(3))
print("clusters: longest death", barcode(clusters).deaths.max().round(3))
