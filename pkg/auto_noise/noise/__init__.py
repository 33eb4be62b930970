"""
噪声模型：PAEMS 与五种基线的参数化，以及编译成随机误差事件调度
"""

from auto_noise.noise.channels import adc_from_decoherence, sdc_from_fidelity
from auto_noise.noise.models import (
    CouplerParams,
    LeakagePolicy,
    ModelKind,
    NoiseModel,
    QubitParams,
)
from auto_noise.noise.params import (
    ParamMask,
    apply_vector,
    describe_vector,
    parameter_vector,
)
from auto_noise.noise.schedule import (
    ChannelKind,
    ErrorEvent,
    ErrorSchedule,
    EventOrigin,
    compile_schedule,
)

__all__ = [
    "adc_from_decoherence",
    "sdc_from_fidelity",
    "CouplerParams",
    "LeakagePolicy",
    "ModelKind",
    "NoiseModel",
    "QubitParams",
    "ParamMask",
    "apply_vector",
    "describe_vector",
    "parameter_vector",
    "ChannelKind",
    "ErrorEvent",
    "ErrorSchedule",
    "EventOrigin",
    "compile_schedule",
]
