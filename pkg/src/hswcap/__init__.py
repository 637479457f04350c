"""Classical (product-state) capacity of qubit channels from the geometry
of relative entropy on the Bloch ball."""

from .bloch import (
    BlochDomainError,
    bloch_to_density,
    density_to_bloch,
    relative_entropy,
    von_neumann_entropy,
)
from .capacity import (
    CapacityResult,
    IterConfig,
    Method,
    SignalEnsemble,
    capacity_sweep,
    holevo_chi,
    iterative_capacity,
    linear_capacity_axis_aligned,
    linear_capacity_general,
    solve_capacity,
    unital_capacity,
)
from .channels import ChannelKind, ChannelParams, NamedChannelSpec, named_channel
from .oracle import brute_force_capacity

__version__ = "0.1.0"
