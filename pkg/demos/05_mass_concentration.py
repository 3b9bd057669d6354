"""Grow balls around training latents and count held-out latents inside.

For each radius r, p is the held-out fraction within r of a training anchor
and q the fraction within r + beta. The bound says q >= R(p) for the true
class measure; at desk scale the empirical curve sits well above it.
"""
import numpy as np

from topodense import min_extension_mass
from topodense.analysis import estimate_c_beta, mass_concentration_by_class
from topodense.sampler import SamplerConfig
from topodense.trainer import (
    ModelConfig, TrainConfig, latents_by_class, make_blobs, train, train_test_split,
)

full = make_blobs(3, 100, 10, center_scale=1.5, seed=1)
train_set, test_set = train_test_split(full, 50, seed=1)
beta, b = 1.0, 4
cfg = TrainConfig(lr0=0.05, epochs=200, lambda_topo=0.05, beta=beta, sampler=SamplerConfig(b=b, n=3))
model = train(ModelConfig(10, (32,), 8, 3), cfg, train_set, test_set).model

z_test, z_train = latents_by_class(model, test_set), latents_by_class(model, train_set)
beta_est = 1.75 * beta  # estimating with a larger beta than trained
c_hat = estimate_c_beta(z_test, b, beta_est).pooled
_, pooled = mass_concentration_by_class(z_train, z_test, np.linspace(0, 4, 17), beta_est)

print(f"pooled c_beta at beta={beta_est}: {c_hat:.3f}")
print("    r    p_hat  q_hat  R(p_hat)")
for m in pooled:
    print(f"{m.r:5.2f}  {m.p_hat:6.3f} {m.q_hat:6.3f} {min_extension_mass(m.p_hat, 1, b, c_hat):8.3f}")
