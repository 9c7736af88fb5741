import json
import logging
from typing import Any, Dict, Optional

from bassflow.common.errors import SpecError

log = logging.getLogger(__name__)


def load_config(path: Optional[str]) -> Dict[str, Any]:
    """
    Load a declarative solve file.

    Keys use the long flag names with dashes or underscores (``n-atoms`` and ``n_atoms`` are equivalent).

    Args:
        path (Optional[str]): Path to a JSON document, or None for an empty configuration.

    Returns:
        Dict[str, Any]: The configuration with keys normalised to underscores.

    Raises:
        SpecError: If the file cannot be read or is not a JSON object.
    """
    if path is None:
        return {}

    log.debug(f"Loading solve configuration from {path}.")
    try:
        with open(path, 'r') as file:
            config = json.load(file)
    except (OSError, ValueError) as e:
        log.error(f"Failed to read configuration file {path}: {e}")
        raise SpecError(f"Failed to read configuration file {path}: {e}") from e

    if not isinstance(config, dict):
        log.error(f"Configuration file {path} must contain a JSON object")
        raise SpecError(f"Configuration file {path} must contain a JSON object")

    config = {key.replace('-', '_'): value for key, value in config.items()}
    log.info(f"Loaded {len(config)} configuration entries from {path}.")
    return config


def merge_options(flags: Dict[str, Any], config: Dict[str, Any], defaults: Dict[str, Any]) -> Dict[str, Any]:
    """
    Resolve options with precedence flags > configuration file > defaults.

    A flag counts as unset when its value is None.
    """
    merged = dict(defaults)
    merged.update({key: value for key, value in config.items() if value is not None})
    merged.update({key: value for key, value in flags.items() if value is not None})
    return merged


def format_float(value: float) -> str:
    return format(value, '.17g')


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """
    Serialise to JSON with every float written at 17 significant digits.

    The standard encoder always uses the shortest round-trip repr, so floats are rendered here.
    Non-finite floats become null.
    """
    pad = ' ' * (indent * (_level + 1))
    end = ' ' * (indent * _level)

    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return format_float(obj) if obj == obj and abs(obj) != float('inf') else 'null'
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return '{}'
        items = [f"{pad}{json.dumps(str(key))}: {dumps(value, indent, _level + 1)}" for key, value in obj.items()]
        return '{\n' + ',\n'.join(items) + '\n' + end + '}'
    if isinstance(obj, (list, tuple)):
        if not obj:
            return '[]'
        items = [f"{pad}{dumps(value, indent, _level + 1)}" for value in obj]
        return '[\n' + ',\n'.join(items) + '\n' + end + ']'

    # numpy scalars
    if hasattr(obj, 'item'):
        return dumps(obj.item(), indent, _level)
    raise TypeError(f"Object of type {type(obj).__name__} is not serialisable")
