"""Multiple-try Metropolis sampling toolkit.

Subpackages by responsibility:

- ``targets``: benchmark distributions (banana, funnel, mixture,
  regression, lighthouse, eight schools) with analytic gradients.
- ``proposals``: the four random-walk configurations and their
  adaptation rules.
- ``weights``: candidate weight families and the selection step.
- ``kernels``: full-vector and component-wise multiple-try kernels plus
  the chain driver.
- ``balance``: involution / Jacobian / stationarity verification,
  including exact enumeration on small discrete spaces.
- ``diagnostics``: burn-in screening, multivariate ESS, KS distances,
  outlier filtering.
- ``harness``: factorial experiment plans, deterministic seeding,
  result CSVs and summaries.
- ``cli``: the ``multitry`` command.
"""

from .kernels import ChainRun, KernelConfig, StepResult, cw_mtm_step, mtm_step, run_chain
from .proposals import ProposalConfig, ProposalKind, make_proposal_state
from .targets import TargetDistribution
from .weights import WeightKind, WeightSpec

__version__ = "0.1.0"

__all__ = [
    "ChainRun",
    "KernelConfig",
    "StepResult",
    "cw_mtm_step",
    "mtm_step",
    "run_chain",
    "ProposalConfig",
    "ProposalKind",
    "make_proposal_state",
    "TargetDistribution",
    "WeightKind",
    "WeightSpec",
    "__version__",
]
