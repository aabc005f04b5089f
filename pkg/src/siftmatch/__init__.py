"""siftmatch: SIFT descriptor matching by cosine angle distance.

Provides a floating-point reference matcher and a bit-faithful, cycle-timed
model of a fully pipelined FPGA matching core, plus the roofline model used
to size its memory-bandwidth budget.
"""

from .fixedpoint import (
    FxSample,
    QFormat,
    UQ1_15,
    UQ2_14,
    UQ2_30,
    fx_add,
    fx_from_real,
    fx_mul,
    fx_resize,
)
from .descriptors import (
    Descriptor,
    DescriptorSet,
    DescriptorFormatError,
    generate_synthetic,
    load_descriptor_set,
    normalize,
    save_descriptor_set,
)
from .reference import MatchResult, angular_distance, dot_product, match_all, match_one
from .cordic import (
    AngleSample,
    CordicConfig,
    cordic_arccos,
    cordic_polar_angle,
    cordic_sqrt,
    one_minus_x_squared,
)
from .pipeline import (
    MinPairEntry,
    PipelineConfig,
    RunReport,
    dot_product_core,
    match_check,
    min_find,
    predict_cycles,
    run_pipeline,
)
from .perf import (
    RooflineConfig,
    RooflinePoint,
    attainable_throughput,
    effective_throughput_with_blocking,
    roofline_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AngleSample",
    "CordicConfig",
    "Descriptor",
    "DescriptorFormatError",
    "DescriptorSet",
    "FxSample",
    "MatchResult",
    "MinPairEntry",
    "PipelineConfig",
    "QFormat",
    "RooflineConfig",
    "RooflinePoint",
    "RunReport",
    "UQ1_15",
    "UQ2_14",
    "UQ2_30",
    "angular_distance",
    "attainable_throughput",
    "cordic_arccos",
    "cordic_polar_angle",
    "cordic_sqrt",
    "dot_product",
    "dot_product_core",
    "effective_throughput_with_blocking",
    "fx_add",
    "fx_from_real",
    "fx_mul",
    "fx_resize",
    "generate_synthetic",
    "load_descriptor_set",
    "match_all",
    "match_check",
    "match_one",
    "min_find",
    "normalize",
    "one_minus_x_squared",
    "predict_cycles",
    "roofline_sweep",
    "run_pipeline",
    "save_descriptor_set",
]
