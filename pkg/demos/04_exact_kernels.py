"""Exact transition matrices on a four-state space.

Assembling each sampler's kernel as a matrix shows what it leaves
invariant, with no Monte Carlo error.
"""
# %%
import numpy as np

from phsmc.finite import (
    DiscreteTarget,
    mh_kernel_matrix,
    phs_joint_kernel,
    product_measure,
    pt_joint_kernel,
    stationary_distribution,
)

log_mass = np.log([0.1, 0.2, 0.3, 0.4])
q = (np.ones((4, 4)) - np.eye(4)) / 3
f = DiscreteTarget(log_mass).probabilities()

# %%
k = mh_kernel_matrix(log_mass, q)
flux = f[:, None] * k
print("MH detailed balance gap:", np.abs(flux - flux.T).max())

# %%
kp = phs_joint_kernel(log_mass, q, 3)
mu = product_measure([f] * 3)
print("PHS |mu K - mu|:", np.abs(mu @ kp - mu).max())
joint = stationary_distribution(kp).reshape(4, 4, 4)
print("PHS chain 1 marginal:", np.round(joint.sum(axis=(1, 2)), 6))

# %%
kt = pt_joint_kernel(log_mass, q, (1.0, 2.0), swap_rate=0.3)
pt = stationary_distribution(kt).reshape(4, 4)
print("PT cold marginal:", np.round(pt.sum(axis=1), 6))
print("PT hot marginal: ", np.round(pt.sum(axis=0), 6), "vs f^(1/2):", np.round(DiscreteTarget(log_mass).probabilities(2.0), 6))
