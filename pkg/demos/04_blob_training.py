"""Train a small MLP on Gaussian blobs with and without the connectivity penalty.

The penalty pulls the death-times of same-class latent sub-batches toward
beta, which shows up in the held-out lifetime means.
"""
from topodense.analysis import estimate_c_beta, lifetime_distribution
from topodense.sampler import SamplerConfig
from topodense.trainer import (
    ModelConfig, TrainConfig, evaluate, latents_by_class, make_blobs, train, train_test_split,
)

full = make_blobs(num_classes=3, per_class=100, dim=10, center_scale=1.5, seed=0)
train_set, test_set = train_test_split(full, train_size=50, seed=0)
model_cfg = ModelConfig(input_dim=10, hidden_layers=(32,), latent_dim=8, num_classes=3)

print(" run        test err  mean death  c_beta(1.0)")
for label, lam, beta in [("vanilla", 0.0, 1.0), ("beta=0.5", 0.05, 0.5),
                         ("beta=1.0", 0.05, 1.0), ("beta=1.5", 0.05, 1.5)]:
    cfg = TrainConfig(lr0=0.05, epochs=200, lambda_topo=lam, beta=beta,
                      sampler=SamplerConfig(b=4, n=3, seed=0))
    result = train(model_cfg, cfg, train_set, test_set)
    z = latents_by_class(result.model, test_set)
    life = lifetime_distribution(z, b=4, trials=500)
    c = estimate_c_beta(z, b=4, beta=1.0, trials=500).pooled
    print(f" {label:9s}  {evaluate(result.model, test_set):8.3f}  {life.mean:10.3f}  {c:11.3f}")
