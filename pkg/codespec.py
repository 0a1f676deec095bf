"""ABS+ code specifications: validation, spec files and recursion-tree node classification.

A node of the decoding recursion tree is a plain ``(layer, phase)`` tuple with
``0 <= layer <= m`` and ``1 <= phase <= 2**layer``. All message indices are
1-based, as in the spec files.
"""
import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional


class SpecSyntaxError(ValueError):
    """Spec text that cannot be read, with the line and field where it failed."""

    def __init__(self, message, line=None, field=None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        super().__init__(f"{message} ({', '.join(location)})" if location else message)
        self.line = line
        self.field = field


class SpecConstraintError(ValueError):
    """A well-formed spec that violates the code constraints."""

    def __init__(self, report):
        super().__init__(f"Invalid code spec: {report}")
        self.report = report


@dataclass(frozen=True)
class CrcSpec:
    poly: int
    width: int

    def to_dict(self):
        return {'poly_hex': f"0x{self.poly:0{(self.width + 3) // 4}X}", 'width': self.width}


@dataclass(frozen=True)
class Violation:
    constraint: str
    layer: Optional[int]
    indices: tuple
    message: str

    def __str__(self):
        where = f" at layer {self.layer}" if self.layer is not None else ""
        return f"[{self.constraint}]{where}: {self.message}"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def add(self, constraint, layer, indices, message):
        self.violations.append(Violation(constraint, layer, tuple(indices), message))

    def __str__(self):
        return 'ok' if self.ok else '; '.join(str(v) for v in self.violations)


def _freeze_layers(m, sets):
    layers = {lam: frozenset() for lam in range(2, m + 1)}
    for lam, indices in (sets or {}).items():
        layers[int(lam)] = frozenset(int(i) for i in indices)
    return layers


@dataclass(frozen=True, eq=False)
class CodeSpec:
    """An ABS+ polar code: length 2**m, frozen set and per-layer swap/add index sets."""

    m: int
    k: int
    frozen: frozenset
    swap_sets: Mapping = field(default_factory=dict)
    add_sets: Mapping = field(default_factory=dict)
    crc: Optional[CrcSpec] = None

    def __post_init__(self):
        object.__setattr__(self, 'frozen', frozenset(int(i) for i in self.frozen))
        object.__setattr__(self, 'swap_sets', _freeze_layers(self.m, self.swap_sets))
        object.__setattr__(self, 'add_sets', _freeze_layers(self.m, self.add_sets))

    def _key(self):
        return (self.m, self.k, tuple(sorted(self.frozen)),
                tuple((lam, tuple(sorted(s))) for lam, s in sorted(self.swap_sets.items()) if s),
                tuple((lam, tuple(sorted(s))) for lam, s in sorted(self.add_sets.items()) if s),
                self.crc)

    def __eq__(self, other):
        if not isinstance(other, CodeSpec):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    @property
    def n(self):
        return 1 << self.m

    @property
    def crc_width(self):
        return self.crc.width if self.crc else 0

    @property
    def is_classical(self):
        return not any(self.swap_sets.values()) and not any(self.add_sets.values())

    @cached_property
    def info_positions(self):
        return tuple(i for i in range(1, self.n + 1) if i not in self.frozen)

    @cached_property
    def _unions(self):
        return {lam: self.swap_sets.get(lam, frozenset()) | self.add_sets.get(lam, frozenset())
                for lam in range(0, self.m + 1)}

    def union(self, lam):
        """I^lam = I_S^lam | I_A^lam (empty for layers 0 and 1)."""
        return self._unions.get(lam, frozenset())

    def transform_at(self, lam, i):
        """'swap', 'add' or None for the adjacent pair (i, i+1) at layer lam."""
        if i in self.swap_sets.get(lam, ()):
            return 'swap'
        if i in self.add_sets.get(lam, ()):
            return 'add'
        return None

    @cached_property
    def right_separated_table(self):
        """Per layer, a tuple indexed by phase (index 0 unused) of right-separation flags."""
        table = []
        for lam in range(self.m + 1):
            flags = [False] * ((1 << lam) + 1)
            for i in range(1, (1 << lam) + 1):
                flags[i] = all((i << d) not in self.union(lam + d) for d in range(1, self.m - lam + 1))
            table.append(tuple(flags))
        return tuple(table)

    def right_separated(self, lam, i):
        return self.right_separated_table[lam][i]


def _check_node(spec, node):
    lam, i = node
    if not 0 <= lam <= spec.m or not 1 <= i <= (1 << lam):
        raise ValueError(f"Node {node} is out of range for m={spec.m}")


def is_right_separated(spec, node):
    """True iff the rightmost descent from ``node`` uses only (lam, i) -> (lam+1, 2i) edges."""
    _check_node(spec, node)
    return spec.right_separated(*node)


def children(spec, node):
    """Ordered children of an internal node of the decoding recursion tree."""
    _check_node(spec, node)
    lam, i = node
    if lam == spec.m:
        raise ValueError(f"Node {node} is a leaf")
    union = spec.union(lam + 1)
    kids = []
    if 2 * (i - 1) not in union:
        kids.append((lam + 1, 2 * i - 1))
    kids.append((lam + 1, 2 * i))
    if 2 * i in union:
        kids.append((lam + 1, 2 * i + 1))
    return kids


def walk_tree(spec):
    """Depth-first, left-to-right list of all nodes reachable from the root."""
    order = []
    stack = [(0, 1)]
    while stack:
        node = stack.pop()
        order.append(node)
        if node[0] < spec.m:
            stack.extend(reversed(children(spec, node)))
    return order


def validate(spec):
    report = ValidationReport()
    if spec.m < 1:
        report.add('length', None, (spec.m,), f"m must be a positive integer, got {spec.m}")
        return report
    n = spec.n
    if spec.crc is not None:
        if spec.crc.width < 1:
            report.add('crc', None, (spec.crc.width,), "CRC width must be positive")
        elif not 0 <= spec.crc.poly < (1 << spec.crc.width):
            report.add('crc', None, (spec.crc.poly,), f"CRC polynomial does not fit in {spec.crc.width} bits")
    if not 0 <= spec.k <= n - spec.crc_width:
        report.add('dimension', None, (spec.k,), f"k={spec.k} does not fit in n={n} with {spec.crc_width} CRC bits")
    outside = sorted(i for i in spec.frozen if not 1 <= i <= n)
    if outside:
        report.add('frozen-range', None, outside, f"frozen indices must lie in 1..{n}")
    expected = n - spec.k - spec.crc_width
    if len(spec.frozen) != expected:
        report.add('frozen-size', None, (len(spec.frozen),), f"expected {expected} frozen indices, got {len(spec.frozen)}")

    for sets in (spec.swap_sets, spec.add_sets):
        stray = sorted(lam for lam, s in sets.items() if s and not 2 <= lam <= spec.m)
        if stray:
            report.add('layer-range', None, stray, f"transform layers must lie in 2..{spec.m}")

    for lam in range(2, spec.m + 1):
        swaps = spec.swap_sets.get(lam, frozenset())
        adds = spec.add_sets.get(lam, frozenset())
        both = sorted(swaps & adds)
        if both:
            report.add('disjoint', lam, both, "index is both a swap and an add")
        union = sorted(swaps | adds)
        bad = [i for i in union if i % 2 or not 1 <= i <= (1 << lam) - 1]
        if bad:
            report.add('even-range', lam, bad, f"indices must be even and lie in 1..{(1 << lam) - 1}")
        close = [(a, b) for a, b in zip(union, union[1:]) if b < a + 4]
        if close:
            report.add('spacing', lam, [i for pair in close for i in pair],
                       "consecutive indices must differ by at least 4")
    return report


def require_valid(spec):
    report = validate(spec)
    if not report.ok:
        raise SpecConstraintError(report)
    return spec


def classical(m, k, frozen, crc=None):
    """A spec with every swap/add set empty."""
    return CodeSpec(m=m, k=k, frozen=frozenset(frozen), crc=crc)


# --- Spec files ---

def spec_to_dict(spec):
    data = {
        'm': spec.m,
        'k': spec.k,
        'frozen': sorted(spec.frozen),
        'layers': [{'lambda': lam,
                    'swap': sorted(spec.swap_sets.get(lam, ())),
                    'add': sorted(spec.add_sets.get(lam, ()))}
                   for lam in range(2, spec.m + 1)],
    }
    if spec.crc is not None:
        data['crc'] = spec.crc.to_dict()
    return data


def _line_of(text, name):
    if text is None:
        return None
    match = re.search(rf'"{re.escape(name)}"\s*:', text)
    return text.count('\n', 0, match.start()) + 1 if match else None


def _int_list(value, name, text):
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise SpecSyntaxError("expected a list of integers", _line_of(text, name), name)
    return value


def spec_from_dict(data, text=None):
    """Build a CodeSpec from the JSON object form; does not validate constraints."""
    if not isinstance(data, dict):
        raise SpecSyntaxError("spec must be a JSON object", 1)
    for name in ('m', 'k', 'frozen'):
        if name not in data:
            raise SpecSyntaxError("missing required field", None, name)
    for name in ('m', 'k'):
        if not isinstance(data[name], int) or isinstance(data[name], bool):
            raise SpecSyntaxError("expected an integer", _line_of(text, name), name)
    frozen = _int_list(data['frozen'], 'frozen', text)
    swaps, adds = {}, {}
    layers = data.get('layers', [])
    if not isinstance(layers, list):
        raise SpecSyntaxError("expected a list of layer objects", _line_of(text, 'layers'), 'layers')
    for entry in layers:
        if not isinstance(entry, dict) or 'lambda' not in entry:
            raise SpecSyntaxError("layer entry needs a 'lambda' key", _line_of(text, 'layers'), 'layers')
        lam = entry['lambda']
        if not isinstance(lam, int) or isinstance(lam, bool):
            raise SpecSyntaxError("expected an integer", _line_of(text, 'lambda'), 'lambda')
        if lam in swaps:
            raise SpecSyntaxError(f"layer {lam} listed twice", _line_of(text, 'layers'), 'layers')
        swaps[lam] = _int_list(entry.get('swap', []), 'swap', text)
        adds[lam] = _int_list(entry.get('add', []), 'add', text)
    crc = None
    if data.get('crc') is not None:
        raw = data['crc']
        if not isinstance(raw, dict) or 'poly_hex' not in raw or 'width' not in raw:
            raise SpecSyntaxError("crc needs 'poly_hex' and 'width'", _line_of(text, 'crc'), 'crc')
        try:
            crc = CrcSpec(poly=int(str(raw['poly_hex']), 16), width=int(raw['width']))
        except (TypeError, ValueError):
            raise SpecSyntaxError("unreadable CRC descriptor", _line_of(text, 'crc'), 'crc')
    try:
        return CodeSpec(m=data['m'], k=data['k'], frozen=frozenset(frozen),
                        swap_sets=swaps, add_sets=adds, crc=crc)
    except (TypeError, ValueError) as e:
        raise SpecSyntaxError(f"unusable layer sets: {e}", _line_of(text, 'layers'), 'layers')


def parse_spec(text):
    """Parse and validate spec text; raises SpecSyntaxError or SpecConstraintError."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecSyntaxError(e.msg, e.lineno)
    return require_valid(spec_from_dict(data, text))


def serialize_spec(spec):
    """Canonical text form: one top-level key per line, index lists inline and sorted."""
    data = spec_to_dict(spec)
    lines = ['{',
             f'  "m": {data["m"]},',
             f'  "k": {data["k"]},',
             f'  "frozen": {json.dumps(data["frozen"])},',
             '  "layers": [']
    layer_lines = [f'    {json.dumps(entry)}' for entry in data['layers']]
    if layer_lines:
        lines.append(',\n'.join(layer_lines))
    lines.append('  ]' + (',' if 'crc' in data else ''))
    if 'crc' in data:
        lines.append(f'  "crc": {json.dumps(data["crc"])}')
    lines.append('}')
    return '\n'.join(lines) + '\n'


def load_spec(path):
    with open(path, encoding='utf-8') as fh:
        return parse_spec(fh.read())
