"""
JSON process-spec documents, CLI shorthands and fingerprints.

Document schema::

    {"name": str, "kind": str, "d": int, "params": {...}}

The fingerprint is the SHA-256 of the canonical JSON of the document (sorted
keys, compact separators); reports embed it so reruns can be matched.
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Union

from src.catalog.processes import ALL_KINDS, ProcessSpec, make_named
from src.errors import SpecError

# Positional parameter names for the ``kind:p1,p2`` shorthand
SHORTHAND_PARAMS = {
    'stable': ('alpha',),
    'relativistic': ('alpha', 'm'),
    'truncated': ('alpha',),
    'tempered': ('alpha',),
    'lamperti': ('alpha', 'delta'),
    'layered': ('alpha', 'alpha1'),
    'log-perturbed': ('a',),
    'log-delta': ('delta',),
    'gauss-log': (),
}


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def stable_hash(value: Any) -> str:
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


def spec_fingerprint(spec: ProcessSpec) -> str:
    return stable_hash(spec.document)


def spec_from_document(document: Dict[str, Any]) -> ProcessSpec:
    """
    Build a ProcessSpec from a parsed JSON document, running the invariant checks

    Raises:
        SpecError: schema violations, unknown kinds, parameter-range violations
    """
    if not isinstance(document, dict):
        raise SpecError("Spec document must be a JSON object")
    kind = document.get('kind')
    if kind not in ALL_KINDS:
        raise SpecError(f"Unknown or missing kind {kind!r}. Known kinds: {', '.join(ALL_KINDS)}")
    params = document.get('params', {})
    if not isinstance(params, dict):
        raise SpecError("'params' must be a JSON object")
    d = document.get('d', 3)
    if isinstance(d, float) and d.is_integer():
        d = int(d)
    return make_named(kind, params, d=d, name=document.get('name'))


def load_spec(path: Union[str, Path]) -> ProcessSpec:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise SpecError(f"Invalid JSON in {path}: {exc}") from exc
    return spec_from_document(document)


def dump_spec(spec: ProcessSpec, path: Union[str, Path, None] = None) -> str:
    """Serialize a spec document; write it when ``path`` is given"""
    text = json.dumps(spec.document, sort_keys=True, indent=2, ensure_ascii=False)
    if path is not None:
        Path(path).write_text(text + "\n", encoding='utf-8')
    return text


def parse_shorthand(text: str, d: int = 3) -> ProcessSpec:
    """``kind[:p1,p2]``, e.g. ``stable:1.5`` or ``relativistic:1,1``"""
    kind, _, raw = text.partition(':')
    kind = kind.strip()
    if kind not in SHORTHAND_PARAMS:
        raise SpecError(f"No shorthand for kind '{kind}'. Shorthand kinds: {', '.join(SHORTHAND_PARAMS)}")
    names = SHORTHAND_PARAMS[kind]
    values = [v for v in raw.split(',') if v.strip()] if raw else []
    if len(values) > len(names):
        raise SpecError(f"'{kind}' takes at most {len(names)} parameter(s), got {len(values)}")
    try:
        params = {name: float(value) for name, value in zip(names, values)}
    except ValueError as exc:
        raise SpecError(f"Invalid numeric parameter in '{text}'") from exc
    return make_named(kind, params, d=d)


def resolve_spec(text: str, d: int = 3) -> ProcessSpec:
    """A JSON spec path (its own ``d`` wins) or a catalog shorthand"""
    if text.endswith('.json') or Path(text).is_file():
        return load_spec(text)
    return parse_shorthand(text, d=d)
