"""Topological densification of latent class distributions.

Differentiable 0-dimensional Vietoris-Rips persistence, the connectivity
penalty on label-pure sub-batches, bounds relating the connectivity
probability of b-samples to mass concentration, and desk-scale training and
estimation utilities built on numpy.
"""
from .bounds import (
    BoundQuery,
    IndexTriple,
    critical_mass_holds,
    critical_mass_threshold,
    index_set,
    min_extension_mass,
    monte_carlo_theorem1,
    psi,
    psi_rewrites,
    trinomial_event_probability,
)
from .measures import Gaussian, GaussianMixture, PointMass, ReferenceSet, Ring, UniformBall
from .persistence import (
    Barcode,
    MSTEdge,
    barcode,
    barcode_backward,
    batch_death_times,
    death_times,
    is_beta_connected,
    pairwise_distances,
)
from .regularizer import (
    connectivity_loss,
    connectivity_loss_backward,
    one_sided_connectivity_loss,
)
from .sampler import LabeledDataset, SamplerConfig, epoch_iterator, sample_minibatch

__version__ = "0.1.0"
