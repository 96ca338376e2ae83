import json
import logging
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np

from cvteleport.common import gaussian

logger = logging.getLogger(__name__)


class PresetError(ValueError):
    """Malformed preset or unreadable state file"""


def split_preset(text: str) -> Tuple[str, List[str]]:
    """Split "name:p1,p2" into its name and raw parameters"""
    name, _, params = text.strip().partition(":")
    return name.lower(), [p.strip() for p in params.split(",")] if params else []


def parse_amplitude(text: str) -> complex:
    """Parse a complex amplitude written as "1+0.5i" or "-2j" """
    try:
        return complex(text.replace("i", "j").replace(" ", ""))
    except ValueError:
        raise PresetError(f"Invalid complex amplitude: {text!r}")


def parse_nonnegative(name: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise PresetError(f"{name} must be a number, got {text!r}")
    if not np.isfinite(value) or value < 0:
        raise PresetError(f"{name} must be a finite number >= 0, got {value}")
    return value


def _expect_params(name: str, params: List[str], count: int):
    if len(params) != count:
        raise PresetError(
            f"Preset {name!r} takes {count} parameter(s), got {len(params)}")


def _expect_modes(name: str, n_modes: int, allowed: int):
    if n_modes != allowed:
        raise PresetError(
            f"Preset {name!r} describes {allowed} mode(s), but {n_modes} are needed here")


def _vacuum(params: List[str], n_modes: int) -> gaussian.GaussianState:
    _expect_params("vacuum", params, 0)
    return gaussian.vacuum(n_modes)


def _coherent(params: List[str], n_modes: int) -> gaussian.GaussianState:
    _expect_params("coherent", params, 1)
    _expect_modes("coherent", n_modes, 1)
    return gaussian.coherent(parse_amplitude(params[0]))


def _thermal(params: List[str], n_modes: int) -> gaussian.GaussianState:
    _expect_params("thermal", params, 1)
    nbar = parse_nonnegative("nbar", params[0])
    # Uncorrelated thermal modes with equal occupation.
    state = gaussian.thermal(nbar)
    for _ in range(n_modes - 1):
        state = gaussian.tensor(state, gaussian.thermal(nbar))
    return state


def _svs(params: List[str], n_modes: int) -> gaussian.GaussianState:
    _expect_params("svs", params, 1)
    _expect_modes("svs", n_modes, 2)
    return gaussian.two_mode_squeezed_vacuum(parse_nonnegative("r", params[0]))


def _tmst(params: List[str], n_modes: int) -> gaussian.GaussianState:
    _expect_params("tmst", params, 2)
    _expect_modes("tmst", n_modes, 2)
    return gaussian.two_mode_squeezed_thermal(
        parse_nonnegative("r", params[0]), parse_nonnegative("nbar", params[1]))


PRESETS: Dict[str, Callable[[List[str], int], gaussian.GaussianState]] = {
    "vacuum": _vacuum,
    "coherent": _coherent,
    "thermal": _thermal,
    "svs": _svs,
    "tmst": _tmst,
}


def load_state_file(path: Path) -> gaussian.GaussianState:
    """Read a state in the JSON state format.

    Raises:
        PresetError: If the file is missing or does not parse.
        UnphysicalStateError: If the stored covariance is unphysical.
    """
    try:
        text = path.read_text()
    except OSError as e:
        raise PresetError(f"Cannot read state file {path}: {e}")
    try:
        return gaussian.from_json(text)
    except gaussian.Error:
        raise
    except (ValueError, TypeError, KeyError) as e:
        raise PresetError(f"Cannot parse state file {path}: {e}")


def resolve_state(spec: str, n_modes: int) -> gaussian.GaussianState:
    """Turn a preset or JSON path into a state with the required mode count"""
    name, params = split_preset(spec)
    if name in PRESETS:
        state = PRESETS[name](params, n_modes)
        logger.debug(f"Resolved preset {spec!r} to a {state.n_modes}-mode state")
        return state

    path = Path(spec)
    if path.suffix.lower() != ".json" and not path.exists():
        raise PresetError(
            f"Unknown preset {name!r}; expected one of {sorted(PRESETS)} or a JSON file")
    state = load_state_file(path)
    if state.n_modes != n_modes:
        raise PresetError(
            f"State file {path} has {state.n_modes} mode(s), expected {n_modes}")
    logger.debug(f"Loaded {n_modes}-mode state from {path}")
    return state


def resolve_input(spec: str) -> gaussian.GaussianState:
    return resolve_state(spec, 1)


def resolve_resource(spec: str) -> gaussian.GaussianState:
    return resolve_state(spec, 2)


def write_state_file(state: gaussian.GaussianState, path: Path):
    path.write_text(json.dumps(gaussian.to_dict(state), indent=2))
