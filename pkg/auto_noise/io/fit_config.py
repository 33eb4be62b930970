"""
拟合配置文件（``paems-fit v1``）::

    paems-fit v1
    [fit]
    mode = multiround
    stages = 1,2,3
    stage1_budget = 300
    sim_shots = 4096

    [weights stage3]
    w_time = 1.0
    w_fraction = 0.5
"""

from pathlib import Path
from typing import Any, Dict, Union

from pydantic import ValidationError as PydanticValidationError

from auto_noise.errors import FormatError, ValidationError
from auto_noise.fitter.models import FitConfig
from auto_noise.io.kvtext import Block, dumps_kv, loads_kv

FIT_HEADER = "paems-fit v1"


def _weight(block: Block, key: str) -> Any:
    value = block.values[key]
    if key == "fraction_term":
        return value
    try:
        return float(value)
    except ValueError as e:
        raise FormatError(
            f"[{block.title}] {key} 不是数字: {value!r}", line=block.line
        ) from e


def loads_fit_config(text: str) -> FitConfig:
    doc = loads_kv(text, FIT_HEADER)
    fit = doc.single("fit", required=False)
    values: Dict[str, Any] = dict(fit.values) if fit else {}
    if "stages" in values:
        values["stages"] = [s.strip() for s in values["stages"].split(",") if s.strip()]

    weights: Dict[str, Dict[str, Any]] = {}
    for block in doc.of_kind("weights"):
        if not block.label:
            raise FormatError("[weights] 块缺少阶段名", line=block.line)
        weights[block.label] = {k: _weight(block, k) for k in block.values}
    if weights:
        values["weights"] = weights

    unknown = set(values) - set(FitConfig.model_fields)
    if unknown:
        raise ValidationError(f"未知拟合配置项: {sorted(unknown)}")
    try:
        cfg = FitConfig(**values)
        for name in cfg.weights:
            cfg.objective(name)
    except PydanticValidationError as e:
        raise ValidationError(f"拟合配置非法: {e}") from e
    except TypeError as e:
        raise ValidationError(f"拟合配置的权重项非法: {e}") from e
    return cfg


def read_fit_config(path: Union[str, Path]) -> FitConfig:
    return loads_fit_config(Path(path).read_text(encoding="utf-8"))


def dumps_fit_config(cfg: FitConfig) -> str:
    data = cfg.model_dump(mode="json", exclude={"weights"}, exclude_none=True)
    data["stages"] = ",".join(str(s) for s in data["stages"])
    fit = {
        k: str(v).lower() if isinstance(v, bool) else str(v) for k, v in data.items()
    }
    blocks = [Block("fit", values=fit)]
    for name, weights in sorted(cfg.weights.items()):
        blocks.append(Block("weights", name, {k: str(v) for k, v in weights.items()}))
    return dumps_kv(FIT_HEADER, blocks)
