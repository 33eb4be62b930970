"""
文件读写：标定记录、噪声模型文件、shot 数据集
"""

from auto_noise.io.calibration import (
    CalibrationRecord,
    CouplerCalibration,
    QubitCalibration,
    init_model,
    load_calibration,
    load_calibration_csv,
    loads_calibration,
    write_calibration,
)
from auto_noise.io.dataset import (
    Prb1Writer,
    iter_prb1,
    read_dataset,
    read_p01,
    read_prb1,
    write_dataset,
    write_p01,
    write_prb1,
)
from auto_noise.io.model_file import (
    dumps_model,
    loads_model,
    parse_model_spec,
    read_model,
    write_model,
)

__all__ = [
    "CalibrationRecord",
    "CouplerCalibration",
    "QubitCalibration",
    "init_model",
    "load_calibration",
    "load_calibration_csv",
    "loads_calibration",
    "write_calibration",
    "Prb1Writer",
    "iter_prb1",
    "read_dataset",
    "read_p01",
    "read_prb1",
    "write_dataset",
    "write_p01",
    "write_prb1",
    "dumps_model",
    "loads_model",
    "parse_model_spec",
    "read_model",
    "write_model",
]
