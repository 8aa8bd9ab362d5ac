"""teich-lab: interval exchanges, translation surfaces, and dimension estimates."""

from ._kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .dimension import (CoverLevel, CoverReport, DimensionEstimate, accumulate_cover,
                        estimate_dimension, hausdorff_sum_check)
from .dynamics import (BadSetMask, DirectionGrid, ObservableF,
                       birkhoff_average_continuous, birkhoff_average_discrete,
                       capped_systole_observable, bump_observable, correlation_decay_test,
                       deviation_masks, independence_diagnostic, non_recurrent_cover,
                       recurrence_mask, recurrence_miss_count)
from .heights import (ContractionParams, HeightFunction, height_eval,
                      verify_circle_average, verify_horocycle_average)
from .iet import IET, IdocVerdict, PartitionReport, WeakMixingReport
from .permutations import (Permutation, QForm, TypeWResult, basis_vector, build_q_form,
                           classify_type_w, is_irreducible, is_rotation, q_evaluate)
from .surfaces import (SL2Matrix, SaddleConnection, TranslationSurface, act, make_matrix,
                       square_torus, regular_octagon, double_pentagon, surface_by_name,
                       systole)
from .suspension import (SuspensionData, Transversal, compare_first_return,
                         first_return_oracle, suspension_polygon,
                         short_interval_saddle_connection, standard_transversal, suspend,
                         verify_local_product, vertical_first_return)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
