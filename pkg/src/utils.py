"""
Utility functions for the curb CLI: configuration loading and trace/lineage files
"""
import json
import logging
import os
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml
from pydantic import ValidationError as PydanticValidationError

from .adaptation import MutationOperator
from .config_models import AdaptationSpec, OutputSpec, SystemSpec
from .errors import ConfigParseError, ConfigSemanticError, ModelError, TraceIOError, UsageError
from .metamodel.lineage import LineageEntry
from .metamodel.states import StateDomain, StateValue
from .metamodel.topology import Neighborhood, TopologySpec
from .rule_language import RuleSource

logger = logging.getLogger(__name__)

# Allowed keys per section of a configuration file
CONFIG_KEYS: Dict[str, Tuple[str, ...]] = {
    'system': ('entities', 'state_domain', 'topology', 'include_self', 'iterations', 'seed', 'mode', 'workers'),
    'init': ('states',),
    'rules': ('file', 'shared'),
    'adaptation': ('schedule', 'max_retries', 'max_depth', 'weights'),
    'output': ('trace', 'lineage'),
}

_SECTION = re.compile(r"\[([A-Za-z_]+)\]")
_SCHEDULE = re.compile(r"every\s+(\d+)\s+for\s+(\d+)")
_TRACE_LINE = re.compile(r"t=(\d+) states=(-?\d+(?:,-?\d+)*)")

# (value, line number or None)
Entry = Tuple[str, Optional[int]]
Sections = Dict[str, Dict[str, Entry]]


# ==== Environment expansion ====

# Innermost reference: a default holding another ${...} only matches once that one is resolved
_ENV_REF = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)(?::-([^{}]*))?\}")
_ENV_PASSES = 8


def expand_env_vars(text: str) -> str:
    """
    Substitute ${NAME} and ${NAME:-default} references in config text.

    Empty variables count as unset. Nested references such as
    ${CURB_SEED:-${SEED:-0}} resolve from the inside out; anything that does not
    parse as a reference is left as written.
    """
    def substitute(match: re.Match) -> str:
        name, default = match.group(1), match.group(2)
        value = os.environ.get(name)
        if value:
            return value
        if default is None:
            logger.warning(f"Config references unset variable {name}; substituting an empty value")
            return ''
        return default

    for _ in range(_ENV_PASSES):
        expanded = _ENV_REF.sub(substitute, text)
        if expanded == text:
            break
        text = expanded
    return text


# ==== Section parsing ====

def parse_config_text(text: str) -> Sections:
    """
    Parse the line-oriented `key = value` format.

    Blank lines and `#` comments are ignored; every key must sit in a known section
    and may appear once.

    Raises:
        ConfigParseError: With the 1-based line number of the offending line
    """
    sections: Sections = {}
    current: Optional[str] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue

        header = _SECTION.fullmatch(line)
        if header:
            current = header.group(1).lower()
            if current not in CONFIG_KEYS:
                raise ConfigParseError(f"unknown section [{current}]", lineno)
            sections.setdefault(current, {})
            continue

        if '=' not in line:
            raise ConfigParseError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ConfigParseError("key outside of a section", lineno)

        key, value = (part.strip() for part in line.split('=', 1))
        if key not in CONFIG_KEYS[current]:
            raise ConfigParseError(f"unknown key '{key}' in [{current}]", lineno)
        if key in sections[current]:
            raise ConfigParseError(f"duplicate key '{key}' in [{current}]", lineno)
        sections[current][key] = (value, lineno)

    return sections


def parse_config_yaml(text: str) -> Sections:
    """Same sections as YAML mappings (no line numbers)"""
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        raise ConfigParseError(f"invalid YAML: {e}", mark.line + 1 if mark else None)
    if not isinstance(data, dict):
        raise ConfigParseError("top level must be a mapping of sections")

    sections: Sections = {}
    for section, body in data.items():
        if section not in CONFIG_KEYS:
            raise ConfigParseError(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigParseError(f"section [{section}] must be a mapping")
        entries = {}
        for key, value in body.items():
            if key not in CONFIG_KEYS[section]:
                raise ConfigParseError(f"unknown key '{key}' in [{section}]")
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, list):
                value = ",".join(str(v) for v in value)
            entries[key] = (str(value), None)
        sections[section] = entries
    return sections


# ==== Value parsing ====

class _Fields:
    """Typed access to parsed sections, raising ConfigParseError with the key's line"""

    def __init__(self, sections: Sections, base_dir: Path):
        self.sections = sections
        self.base_dir = base_dir

    def entry(self, section: str, key: str) -> Optional[Entry]:
        return self.sections.get(section, {}).get(key)

    def require(self, section: str, key: str) -> Entry:
        entry = self.entry(section, key)
        if entry is None:
            raise ConfigParseError(f"missing key '{key}' in [{section}]")
        return entry

    def integer(self, section: str, key: str, default: Optional[int] = None) -> int:
        entry = self.entry(section, key) if default is not None else self.require(section, key)
        if entry is None:
            return default
        value, line = entry
        try:
            return int(value)
        except ValueError:
            raise ConfigParseError(f"'{key}' must be an integer, got {value!r}", line)

    def boolean(self, section: str, key: str, default: bool) -> bool:
        entry = self.entry(section, key)
        if entry is None:
            return default
        value, line = entry
        if value.lower() not in ('true', 'false'):
            raise ConfigParseError(f"'{key}' must be true or false, got {value!r}", line)
        return value.lower() == 'true'

    def path(self, value: str) -> Path:
        p = Path(value).expanduser()
        return p if p.is_absolute() else self.base_dir / p


def _parse_domain(fields: _Fields) -> StateDomain:
    value, line = fields.require('system', 'state_domain')
    try:
        return StateDomain.parse(value)
    except ValueError as e:
        raise ConfigParseError(str(e), line)
    except ModelError as e:
        raise ConfigSemanticError(f"line {line}: {e}")


def _read_adjacency(path: Path, line: Optional[int]) -> List[List[int]]:
    """One row per entity: neighbour indices separated by spaces or commas, '-' for none"""
    if not path.exists():
        raise ConfigParseError(f"adjacency file not found: {path}", line)
    rows = []
    for n, raw in enumerate(path.read_text(encoding='utf-8').splitlines(), start=1):
        text = raw.split('#', 1)[0].strip()
        if not text:
            continue
        if text == '-':
            rows.append([])
            continue
        try:
            rows.append([int(tok) for tok in re.split(r"[,\s]+", text) if tok])
        except ValueError:
            raise ConfigParseError(f"{path.name}: bad adjacency row {raw!r}", n, str(path))
    return rows


def _parse_topology(fields: _Fields) -> TopologySpec:
    value, line = fields.require('system', 'topology')
    include_self = fields.boolean('system', 'include_self', False)
    parts = value.split()
    try:
        if parts[0] == 'ring' and len(parts) == 2:
            return TopologySpec.ring(int(parts[1]), include_self)
        if parts[0] == 'grid' and len(parts) == 5:
            if parts[4] not in ('wrap', 'nowrap'):
                raise ValueError(parts[4])
            return TopologySpec.grid(
                int(parts[1]), int(parts[2]), Neighborhood(parts[3]), parts[4] == 'wrap', include_self
            )
        if parts[0] == 'explicit' and len(parts) == 2:
            return TopologySpec.explicit(_read_adjacency(fields.path(parts[1]), line), include_self)
    except (ValueError, IndexError):
        pass
    raise ConfigParseError(
        f"topology must be 'ring <radius>', 'grid <w> <h> moore|vonneumann wrap|nowrap' "
        f"or 'explicit <file>', got {value!r}", line
    )


def _parse_states(fields: _Fields, domain: StateDomain, n: int, seed: int) -> List[StateValue]:
    value, line = fields.require('init', 'states')
    parts = value.split()
    try:
        if parts and parts[0] == 'impulse':
            on = [int(p) for p in parts[1:]]
            if not on:
                raise ValueError("impulse needs at least one index")
            bad = [i for i in on if not 0 <= i < max(n, 0)]
            if bad and n > 0:
                raise ConfigSemanticError(f"line {line}: impulse index {bad[0]} outside 0..{n - 1}")
            return [domain.on_value() if i in on else domain.lowest() for i in range(max(n, 0))]
        if value == 'random':
            values = list(domain.values())
            draws = np.random.default_rng(seed).integers(0, len(values), size=max(n, 0))
            return [values[int(k)] for k in draws]
        raws = [p.strip() for p in value.split(',')]
        states = []
        for raw in raws:
            if domain.is_boolean and raw in ('true', 'false'):
                states.append(domain.value(raw == 'true'))
            else:
                states.append(domain.coerce(int(raw)))
        return states
    except ValueError as e:
        raise ConfigParseError(f"bad states value {value!r}: {e}", line)
    except ModelError as e:
        raise ConfigSemanticError(f"line {line}: {e}")


def _parse_rules(fields: _Fields, shared: bool, n: int) -> Tuple[List[Path], List[RuleSource]]:
    value, line = fields.require('rules', 'file')
    paths = [fields.path(p.strip()) for p in value.split(',') if p.strip()]
    for p in paths:
        if not p.exists():
            raise ConfigParseError(f"rule file not found: {p}", line)
    if not shared and len(paths) == 1 and n > 1:
        paths = paths * n
    sources = [RuleSource(p.read_text(encoding='utf-8'), name=p.name) for p in paths]
    return paths, sources


def _parse_adaptation(fields: _Fields) -> Dict[str, Any]:
    data: Dict[str, Any] = {}
    entry = fields.entry('adaptation', 'schedule')
    if entry is not None and entry[0] != 'none':
        match = _SCHEDULE.fullmatch(entry[0])
        if not match:
            raise ConfigParseError(f"schedule must be 'every <k> for <m>' or 'none', got {entry[0]!r}", entry[1])
        data['schedule'] = {'every': int(match.group(1)), 'events': int(match.group(2))}
    for key in ('max_retries', 'max_depth'):
        if fields.entry('adaptation', key) is not None:
            data[key] = fields.integer('adaptation', key)
    entry = fields.entry('adaptation', 'weights')
    if entry is not None:
        weights = {op.value: 1.0 for op in MutationOperator}
        for item in entry[0].split(','):
            name, sep, weight = item.partition(':')
            try:
                weights[name.strip()] = float(weight)
            except ValueError:
                raise ConfigParseError(f"weights must be 'Operator:weight, ...', got {item.strip()!r}", entry[1])
            if not sep:
                raise ConfigParseError(f"weights must be 'Operator:weight, ...', got {item.strip()!r}", entry[1])
        data['weights'] = weights
    return data


def build_spec(sections: Sections, config_path: Path) -> SystemSpec:
    """
    Turn parsed sections into a validated SystemSpec.

    Raises:
        ConfigParseError: Malformed values, missing keys or files
        ConfigSemanticError: Values that parse but violate the model's constraints
    """
    fields = _Fields(sections, config_path.parent)

    n = fields.integer('system', 'entities')
    seed = fields.integer('system', 'seed', 0)
    domain = _parse_domain(fields)
    topology = _parse_topology(fields)
    states = _parse_states(fields, domain, n, seed)
    shared = fields.boolean('rules', 'shared', True)
    rule_files, rule_sources = _parse_rules(fields, shared, n)

    mode_entry = fields.entry('system', 'mode')
    if mode_entry is not None and mode_entry[0] not in ('faithful', 'bound'):
        raise ConfigParseError(f"mode must be faithful or bound, got {mode_entry[0]!r}", mode_entry[1])

    stem = config_path.stem
    trace_entry = fields.entry('output', 'trace')
    lineage_entry = fields.entry('output', 'lineage')
    output = {
        'trace': fields.path(trace_entry[0]) if trace_entry else config_path.with_name(f"{stem}.trace"),
        'lineage': fields.path(lineage_entry[0]) if lineage_entry else config_path.with_name(f"{stem}.lineage"),
    }

    try:
        return SystemSpec(
            entities=n,
            state_domain=domain,
            topology=topology,
            initial_states=states,
            rule_files=rule_files,
            rule_sources=rule_sources,
            shared=shared,
            iterations=fields.integer('system', 'iterations', 0),
            seed=seed,
            mode=mode_entry[0] if mode_entry else 'faithful',
            workers=fields.integer('system', 'workers', 1),
            adaptation=AdaptationSpec(**_parse_adaptation(fields)),
            output=OutputSpec(**output),
            config_path=config_path,
        )
    except PydanticValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigSemanticError(problems)


def load_config(config_path: str) -> SystemSpec:
    """
    Load a system configuration with environment variable substitution.

    `.yaml`/`.yml` files are read as YAML mappings of sections; anything else uses
    the line-oriented `key = value` format.

    Raises:
        ConfigParseError: Missing file, syntax errors (with line number), missing rule files
        ConfigSemanticError: Cross-field violations such as a states/entities count mismatch
    """
    from dotenv import load_dotenv

    load_dotenv()

    path = Path(config_path)
    if not path.exists():
        raise ConfigParseError(f"config file not found: {config_path}", path=str(path))

    text = expand_env_vars(path.read_text(encoding='utf-8'))
    if path.suffix in ('.yaml', '.yml'):
        sections = parse_config_yaml(text)
    else:
        sections = parse_config_text(text)
    spec = build_spec(sections, path)

    logger.info(f"Loaded {path.name}: {spec.entities} entities, {spec.state_domain}, "
                f"{spec.topology.describe()}, T={spec.iterations}")
    return spec


# ==== Traces ====

def format_trace_line(t: int, states: Sequence[StateValue]) -> str:
    return f"t={t} states={','.join(s.trace_text() for s in states)}"


def write_trace(rows: Sequence[Sequence[StateValue]], path: Path, start: int = 0) -> None:
    """
    Write one `t=<iteration> states=<v0>,...` line per state vector.

    Raises:
        UsageError: For an empty trajectory (nothing is written)
        TraceIOError: If the file cannot be written
    """
    if not rows:
        raise UsageError("cannot write an empty trajectory")
    text = "".join(format_trace_line(start + t, states) + "\n" for t, states in enumerate(rows))
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
    except OSError as e:
        raise TraceIOError(f"cannot write trace {path}: {e}")


def read_trace(path: Path) -> List[Tuple[int, List[int]]]:
    """Parse a trace file into (iteration, values) rows"""
    try:
        lines = Path(path).read_text(encoding='utf-8').splitlines()
    except OSError as e:
        raise TraceIOError(f"cannot read trace {path}: {e}")
    rows = []
    for n, line in enumerate(lines, start=1):
        match = _TRACE_LINE.fullmatch(line)
        if not match:
            raise TraceIOError(f"{path}:{n}: not a trace line: {line!r}")
        rows.append((int(match.group(1)), [int(v) for v in match.group(2).split(',')]))
    return rows


def first_difference(a: Path, b: Path) -> Optional[Tuple[int, str, str]]:
    """First differing line of two text files as (line number, line in a, line in b), or None"""
    try:
        left = Path(a).read_text(encoding='utf-8').splitlines()
        right = Path(b).read_text(encoding='utf-8').splitlines()
    except OSError as e:
        raise TraceIOError(str(e))
    for n in range(max(len(left), len(right))):
        la = left[n] if n < len(left) else "<end of file>"
        lb = right[n] if n < len(right) else "<end of file>"
        if la != lb:
            return n + 1, la, lb
    return None


# ==== Lineage ====

def write_lineage(entries: Sequence[LineageEntry], path: Path) -> None:
    """One record line per lineage entry"""
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            for entry in entries:
                f.write(entry.record() + "\n")
    except OSError as e:
        raise TraceIOError(f"cannot write lineage {path}: {e}")


def save_generation_record(path: Path, record_data: Dict[str, Any]) -> None:
    """Save generation record JSON"""
    try:
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            json.dump(record_data, f, indent=2, ensure_ascii=False)
            f.write("\n")
    except OSError as e:
        raise TraceIOError(f"cannot write generation record {path}: {e}")


def load_generation_record(path: Path) -> Dict[str, Any]:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise TraceIOError(f"cannot read generation record {path}: {e}")


def generation_record(
    entries: Sequence[LineageEntry],
    roots: Sequence[RuleSource],
    seed: int
) -> Dict[str, Any]:
    """JSON-ready record of a lineage: the root rule texts plus every entry with its descriptor"""
    return {
        'seed': seed,
        'roots': [{'name': source.name, 'text': source.text} for source in roots],
        'entries': [entry.to_dict() for entry in entries],
    }


def lineage_entries(record: Dict[str, Any]) -> List[LineageEntry]:
    return [LineageEntry.from_dict(item) for item in record.get('entries', [])]


def record_roots(record: Dict[str, Any]) -> List[RuleSource]:
    """Root rule sources stored in a generation record, in slot order"""
    roots = record.get('roots') or []
    if not roots:
        raise UsageError("generation record holds no root rules; pass the root rule file")
    try:
        return [RuleSource(item['text'], name=item.get('name', f"root{i}")) for i, item in enumerate(roots)]
    except (KeyError, TypeError) as e:
        raise TraceIOError(f"malformed root entry in generation record: {e}")
