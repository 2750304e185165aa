"""Dyadic spike blocks, lacunary trials, and their desk-scale verification.

The building blocks: a deterministic bit-tape model of points of the circle
(:mod:`.bits`), dyadic spikes and blocks with exact laws (:mod:`.spikes`),
trial amplification (:mod:`.trials`), the stage scheduler and manifests
(:mod:`.master`), exact Fourier tails (:mod:`.fourier`), the parameter
regimes (:mod:`.regimes`), and the seeded verification harness
(:mod:`.mc`, :mod:`.suites`, :mod:`.cli`).
"""

from .bits import BitTape, ForcedTape, read_window, valuation, window_all_zero
from .fourier import (band_support_check, block_tail, f_tail, spike_coeff,
                      spike_tail, tail_profile)
from .master import (DeskCaps, Manifest, StageConfig, StageRecord, StageState,
                     average_at, build_manifest, build_stage,
                     enumerate_exponents, f_eval, manifest_from_text,
                     manifest_to_text, master_signal_check, plan_lengths,
                     read_manifest, write_manifest)
from .mc import growth_scan, independence_suite, mc_estimate
from .regimes import (AdmissibilityReport, BoundedConfig, EndpointConfig,
                      HitSetManifest, LpConfig, admissible_check,
                      bounded_build, bounded_membership,
                      endpoint_choose_lambda, endpoint_scale_check,
                      lp_stage_params)
from .spikes import (BlockLaw, BlockParams, SpikeParams, block_eval,
                     block_floor, block_moments, choose_depth, spike_eval)
from .trials import (TrialSpec, WeightProfile, amplification_check,
                     good_event, good_prob_exact, trial_sum, weights)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
