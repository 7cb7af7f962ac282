"""
Reading and writing the toolkit's files: games, profiles, correlated
distributions, matrices and JSON/CSV reports. Every JSON input is checked
against its schema before it is turned into objects.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

import jsonschema
import numpy as np

from settings.schemas import CORRELATED_SCHEMA, DESCRIPTOR_SCHEMA, PROFILE_SCHEMA, STRATEGY_SCHEMA
from src.constructions import game_from_descriptor, game_from_inline
from src.strategies import (
    CorrelatedDistribution,
    KUniformDistribution,
    KUniformStrategy,
    MixedProfile,
    MixedStrategy,
    SpecError,
    Strategy,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def validate_document(data: Any, schema: Dict, what: str):
    try:
        jsonschema.validate(instance=data, schema=schema)
    except jsonschema.ValidationError as error:
        raise SpecError(f"Invalid {what}: {error.message}") from error


def load_json(path: PathLike, schema: Dict, what: str) -> Dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as error:
        raise SpecError(f"{path} is not valid JSON: {error}") from error
    validate_document(data, schema, what)
    return data


def to_jsonable(value):
    """numpy scalars and arrays into plain Python values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def dumps(data: Dict) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(to_jsonable(data), sort_keys=True, indent=2) + "\n"


def write_json(path: PathLike, data: Dict):
    Path(path).write_text(dumps(data), encoding="utf-8")
    logger.info("Wrote %s", path)


def write_text(path: PathLike, text: str):
    Path(path).write_text(text, encoding="utf-8")
    logger.info("Wrote %s", path)


# Strategies and distributions


def strategy_from_dict(data: Dict) -> Strategy:
    validate_document(data, STRATEGY_SCHEMA, "strategy")
    if "counts" in data:
        return KUniformStrategy(tuple(data["counts"]), data["k"])
    return MixedStrategy(np.array(data["probs"], dtype=float))


def profile_from_dict(data: Dict) -> MixedProfile:
    validate_document(data, PROFILE_SCHEMA, "profile")
    strategies = tuple(strategy_from_dict(s) for s in data["strategies"])
    default = strategy_from_dict(data["default"]) if "default" in data else None
    return MixedProfile(strategies, default, data.get("n"))


def distribution_from_dict(data: Dict) -> CorrelatedDistribution:
    validate_document(data, CORRELATED_SCHEMA, "correlated distribution")
    support = data["support"]
    if all("count" in item for item in support):
        rows = [item["actions"] for item in support for _ in range(item["count"])]
        distribution = KUniformDistribution(np.array(rows, dtype=np.int64))
        if "k" in data and data["k"] != distribution.k:
            raise SpecError(f"Counts add up to {distribution.k}, file declares k={data['k']}")
        return distribution
    if not all("weight" in item for item in support):
        raise SpecError("Every support entry needs a weight, or every entry a count")
    return CorrelatedDistribution.from_pairs(((item["actions"], item["weight"]) for item in support), data.get("k"))


def load_profile(path: PathLike) -> MixedProfile:
    return profile_from_dict(load_json(path, PROFILE_SCHEMA, "profile"))


def load_distribution(path: PathLike) -> CorrelatedDistribution:
    return distribution_from_dict(load_json(path, CORRELATED_SCHEMA, "correlated distribution"))


# Games


def load_game(spec: str, seed: int = 0):
    """
    A game from a JSON file (explicit tensor or family descriptor) or from an
    inline 'family:key=value,...' descriptor.
    """
    path = Path(spec)
    if path.is_file():
        descriptor = load_json(path, DESCRIPTOR_SCHEMA, "game descriptor")
        if "matrix_file" in descriptor:
            descriptor = dict(descriptor)
            descriptor["matrix"] = read_matrix(path.parent / descriptor.pop("matrix_file")).tolist()
        return game_from_descriptor(descriptor)
    if ":" not in spec and spec.endswith((".json", ".spec")):
        raise FileNotFoundError(f"No game file {spec}")
    return game_from_inline(spec, default_seed=seed)


# Matrices


def parse_matrix(text: str) -> np.ndarray:
    """Header 'n m', then n rows of m 0/1 tokens."""
    lines = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 2:
        raise SpecError("Matrix files start with a header line 'n m'")
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
        rows = [[int(token) for token in line] for line in lines[1:]]
    except ValueError as error:
        raise SpecError(f"Matrix entries must be integers: {error}") from error
    if len(rows) != n or any(len(row) != m for row in rows):
        raise SpecError(f"Matrix header says {n}x{m}, body does not match")
    matrix = np.array(rows, dtype=np.int64).reshape(n, m)
    if not np.isin(matrix, (0, 1)).all():
        raise SpecError("Matrix entries must be 0 or 1")
    return matrix


def format_matrix(matrix) -> str:
    matrix = np.asarray(matrix, dtype=np.int64)
    lines = [f"{matrix.shape[0]} {matrix.shape[1]}"]
    lines += [" ".join(str(v) for v in row) for row in matrix.tolist()]
    return "\n".join(lines) + "\n"


def read_matrix(path: PathLike) -> np.ndarray:
    return parse_matrix(Path(path).read_text(encoding="utf-8"))


def write_matrix(path: PathLike, matrix):
    write_text(path, format_matrix(matrix))
