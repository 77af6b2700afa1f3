"""Run configuration files: YAML in, validated RunConfig out, canonical YAML back.

Validation failures are reported one per field with the line of the nearest
YAML node, e.g. ``line 7: solver.p: Field required``.
"""

from pathlib import Path

import yaml
from pydantic import ValidationError

from .errors import ConfigInvalid
from .geometry import TargetManifold, build_manifold
from .mesh import DomainMesh, build_unit_disk_mesh, build_unit_square_grid, read_mesh
from .models import MeshSpec, RunConfig


def _node_lines(node: yaml.Node, path: tuple = (), lines: dict | None = None) -> dict[tuple, int]:
    """1-based line of every key path in a composed YAML tree."""
    if lines is None:
        lines = {}
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            child = path + (key.value,)
            _node_lines(value, child, lines)
            lines[child] = key.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            _node_lines(item, path + (i,), lines)
    return lines


def _line_for(loc: tuple, lines: dict[tuple, int]) -> int:
    """Line of the deepest existing node along loc (discriminator tags are skipped)."""
    cur: tuple = ()
    for seg in loc:
        if cur + (seg,) in lines:
            cur = cur + (seg,)
    return lines.get(cur, 1)


def _diagnostics(err: ValidationError, lines: dict[tuple, int]) -> list[str]:
    out = []
    for e in err.errors():
        loc = tuple(e["loc"])
        field = ".".join(str(s) for s in loc) or "<root>"
        out.append(f"line {_line_for(loc, lines)}: {field}: {e['msg']}")
    return out


BALL_COMMANDS = ("uniqueness", "sweep")


def _command_diagnostics(config: RunConfig, lines: dict[tuple, int]) -> list[str]:
    """Requirements that span sections, checked once the fields themselves are valid."""
    out = []
    if config.command in BALL_COMMANDS and config.solver.ball is None:
        out.append(f"line {_line_for(('solver', 'ball'), lines)}: solver.ball: "
                   f"command '{config.command}' needs a ball constraint")
    points = config.experiment.init_points
    if config.command == "nonuniqueness-demo" and len(points) == 1:
        out.append(f"line {_line_for(('experiment', 'init_points'), lines)}: experiment.init_points: "
                   f"needs at least two points (or none for the poles)")
    return out


def parse_config(text: str, command: str | None = None) -> RunConfig:
    """Validate configuration text; `command` overrides the file's command."""
    try:
        root = yaml.compose(text)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else 1
        raise ConfigInvalid([f"line {line}: {getattr(e, 'problem', None) or e}"])
    if raw is None:
        raw, lines = {}, {(): 1}
    else:
        lines = _node_lines(root)
    if not isinstance(raw, dict):
        raise ConfigInvalid(["line 1: top level must be a mapping of sections"])
    if command is not None:
        raw["command"] = command
    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigInvalid(_diagnostics(e, lines))
    problems = _command_diagnostics(config, lines)
    if problems:
        raise ConfigInvalid(problems)
    return config


def load_config(path: Path, command: str | None = None) -> RunConfig:
    """Read and validate a configuration file (OSError propagates)."""
    return parse_config(Path(path).read_text(encoding="utf-8"), command)


def canonical_dump(config: RunConfig) -> str:
    """Canonical YAML: every field present, keys sorted."""
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=True, default_flow_style=False,
                          allow_unicode=True)


def build_mesh(spec: MeshSpec) -> DomainMesh:
    if spec.builder == "square":
        return build_unit_square_grid(spec.n_per_side)
    if spec.builder == "disk":
        return build_unit_disk_mesh(spec.refinement)
    return read_mesh(Path(spec.path))


def build_target(config: RunConfig) -> TargetManifold:
    return build_manifold(config.manifold)
