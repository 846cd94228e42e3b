"""Ansible playbook parsing, static validation, semantic scoring, and infilling.

Playbooks are YAML documents whose root is a list of plays.  Tasks are
normalized into (module, args, directives) triples so that validation and
scoring can treat every surface form (short-form `copy: src=a dest=b`,
mapping args, free-form shell) uniformly.
"""

from __future__ import annotations

import json
import re
import shlex
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path

import yaml

from .core import (
    Diagnostic,
    InfillError,
    ParseError,
    ScoreError,
    SemanticScore,
    ValidationReport,
)

TASK_DIRECTIVES = {
    "name", "when", "loop", "with_items", "with_dict", "with_fileglob",
    "with_sequence", "register", "become", "become_user", "become_method",
    "ignore_errors", "delegate_to", "delegate_facts", "run_once", "vars",
    "tags", "notify", "changed_when", "failed_when", "until", "retries",
    "delay", "environment", "no_log", "loop_control", "check_mode",
    "any_errors_fatal", "throttle", "timeout", "listen",
}

PLAY_KEYS = {
    "name", "hosts", "vars", "vars_files", "become", "become_user",
    "become_method", "gather_facts", "roles", "handlers", "remote_user",
    "connection", "serial", "tags", "environment", "any_errors_fatal",
    "max_fail_percentage", "strategy", "force_handlers", "vars_prompt",
}

FREE_FORM_MODULES = {
    "ansible.builtin.shell", "ansible.builtin.command", "ansible.builtin.raw",
    "ansible.builtin.script",
}

SHELL_FAMILY = {"ansible.builtin.shell", "ansible.builtin.command", "ansible.builtin.raw"}

MAGIC_VARS = {
    "item", "inventory_hostname", "ansible_hostname", "hostvars", "groups",
    "group_names", "play_hosts", "ansible_facts", "ansible_os_family",
    "ansible_distribution", "ansible_env", "ansible_user", "ansible_date_time",
    "ansible_default_ipv4", "playbook_dir", "role_path", "ansible_architecture",
    "ansible_fqdn", "ansible_kernel", "ansible_version", "omit",
}

_VAR_REF = re.compile(r"\{\{\s*([A-Za-z_]\w*)")
_BARE_VAR = re.compile(r"\{\{\s*([A-Za-z_]\w*)\s*\}\}")


@dataclass(frozen=True)
class AnsibleTask:
    module: str
    args: dict[str, object] = field(default_factory=dict)
    directives: dict[str, object] = field(default_factory=dict)
    name: str | None = None


@dataclass(frozen=True)
class AnsiblePlay:
    tasks: tuple[AnsibleTask, ...]
    config: dict[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class AnsiblePlaybook:
    plays: tuple[AnsiblePlay, ...]


@dataclass(frozen=True)
class ModuleSpec:
    required: frozenset[str]
    mutually_exclusive: tuple[frozenset[str], ...]
    arg_types: dict[str, str]
    aliases: dict[str, str]
    open_args: bool = False


class ModuleSpecRegistry:
    def __init__(self, specs: dict[str, ModuleSpec]):
        self._specs = specs

    def get(self, module: str) -> ModuleSpec | None:
        return self._specs.get(module)

    def __contains__(self, module: str) -> bool:
        return module in self._specs

    def __len__(self) -> int:
        return len(self._specs)


def load_registry(path: str | Path | None = None) -> ModuleSpecRegistry:
    if path is None:
        text = (
            importlib_resources.files("dslrepair.data")
            .joinpath("ansible_modules.json")
            .read_text()
        )
    else:
        text = Path(path).read_text()
    raw = json.loads(text)
    specs = {}
    for module, entry in raw.items():
        specs[module] = ModuleSpec(
            required=frozenset(entry.get("required", [])),
            mutually_exclusive=tuple(
                frozenset(group) for group in entry.get("mutually_exclusive", [])
            ),
            arg_types=dict(entry.get("arg_types", {})),
            aliases=dict(entry.get("aliases", {})),
            open_args=bool(entry.get("open_args", False)),
        )
    return ModuleSpecRegistry(specs)


def _perr(code: str, message: str) -> ParseError:
    return ParseError(Diagnostic(code, message))


def canonical_module(key: str) -> str:
    return key if "." in key else f"ansible.builtin.{key}"


def _parse_short_form(module: str, value: str) -> dict[str, object]:
    if module in FREE_FORM_MODULES:
        return {"cmd": value}
    args: dict[str, object] = {}
    try:
        tokens = shlex.split(value)
    except ValueError as exc:
        raise _perr("ANS_BAD_STRUCTURE", f"unparseable short-form args: {exc}")
    for token in tokens:
        if "=" not in token:
            raise _perr(
                "ANS_BAD_STRUCTURE",
                f"short-form argument {token!r} is not key=value",
            )
        k, _, v = token.partition("=")
        args[k] = v
    return args


def parse_task(node: object) -> list[AnsibleTask]:
    """Parse one task mapping; blocks expand to their flattened task lists."""
    if not isinstance(node, dict):
        raise _perr("ANS_BAD_STRUCTURE", f"task is not a mapping: {node!r}")
    if "block" in node:
        tasks: list[AnsibleTask] = []
        for section in ("block", "rescue", "always"):
            entries = node.get(section)
            if entries is None:
                continue
            if not isinstance(entries, list):
                raise _perr("ANS_BAD_STRUCTURE", f"{section} is not a list")
            for child in entries:
                tasks.extend(parse_task(child))
        return tasks

    name = None
    directives: dict[str, object] = {}
    module_keys: list[str] = []
    extra_args: dict[str, object] = {}
    for key, value in node.items():
        if not isinstance(key, str):
            raise _perr("ANS_BAD_STRUCTURE", f"non-string task key: {key!r}")
        if key == "name":
            name = value
        elif key == "args":
            if not isinstance(value, dict):
                raise _perr("ANS_BAD_STRUCTURE", "args directive is not a mapping")
            extra_args.update(value)
        elif key in TASK_DIRECTIVES:
            directives[key] = value
        else:
            module_keys.append(key)

    if len(module_keys) == 0:
        raise _perr("ANS_NO_MODULE", "task declares no module")
    if len(module_keys) > 1:
        raise _perr(
            "ANS_AMBIGUOUS_MODULE",
            f"task declares multiple modules: {', '.join(sorted(module_keys))}",
        )

    raw_key = module_keys[0]
    module = canonical_module(raw_key)
    value = node[raw_key]
    if value is None:
        args: dict[str, object] = {}
    elif isinstance(value, dict):
        args = dict(value)
    elif isinstance(value, str):
        args = _parse_short_form(module, value)
    else:
        raise _perr("ANS_BAD_STRUCTURE", f"module args for {raw_key!r} are {type(value).__name__}")
    args.update(extra_args)
    return [AnsibleTask(module=module, args=args, directives=directives, name=name)]


def parse_task_list(node: object) -> list[AnsibleTask]:
    if not isinstance(node, list):
        raise _perr("ANS_BAD_STRUCTURE", "task list is not a list")
    tasks: list[AnsibleTask] = []
    for entry in node:
        tasks.extend(parse_task(entry))
    return tasks


def parse_playbook(text: str) -> AnsiblePlaybook:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise _perr("ANS_YAML", f"invalid YAML: {exc}") from exc
    if not isinstance(doc, list):
        raise _perr("ANS_NOT_A_PLAYBOOK", "document root must be a list of plays")
    if not doc:
        raise _perr("ANS_NOT_A_PLAYBOOK", "playbook contains no plays")

    plays: list[AnsiblePlay] = []
    for play_node in doc:
        if not isinstance(play_node, dict):
            raise _perr("ANS_BAD_STRUCTURE", f"play is not a mapping: {play_node!r}")
        tasks: list[AnsibleTask] = []
        config: dict[str, object] = {}
        for key, value in play_node.items():
            if key in ("tasks", "pre_tasks", "post_tasks"):
                if value is None:
                    continue
                tasks.extend(parse_task_list(value))
            else:
                config[key] = value
        if not tasks and not config.get("roles"):
            raise _perr("ANS_BAD_STRUCTURE", "play has no tasks and no roles")
        plays.append(AnsiblePlay(tasks=tuple(tasks), config=config))
    return AnsiblePlaybook(plays=tuple(plays))


def task_to_node(task: AnsibleTask) -> dict:
    node: dict[str, object] = {}
    if task.name is not None:
        node["name"] = task.name
    node[task.module] = dict(task.args) if task.args else None
    node.update(task.directives)
    return node


def playbook_to_yaml(pb: AnsiblePlaybook) -> str:
    doc = []
    for play in pb.plays:
        play_node = dict(play.config)
        if play.tasks:
            play_node["tasks"] = [task_to_node(t) for t in play.tasks]
        doc.append(play_node)
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)


# ---------------------------------------------------------------------------
# validation

def _type_ok(tag: str, value: object) -> bool:
    if value is None:
        return True
    if isinstance(value, str) and "{{" in value:
        return True  # templated value, statically unknown
    if tag == "any":
        return True
    if tag == "bool":
        return isinstance(value, bool) or (
            isinstance(value, str) and value.strip().lower() in {"yes", "no", "true", "false"}
        )
    if tag == "int":
        if isinstance(value, bool):
            return False
        if isinstance(value, int):
            return True
        return isinstance(value, str) and value.strip().lstrip("-").isdigit()
    if tag in ("string", "path"):
        return isinstance(value, (str, int, float)) and not isinstance(value, bool)
    if tag == "list":
        return isinstance(value, (list, str))
    return True


def _referenced_vars(value: object) -> set[str]:
    refs: set[str] = set()
    if isinstance(value, str):
        refs.update(_VAR_REF.findall(value))
    elif isinstance(value, dict):
        for v in value.values():
            refs |= _referenced_vars(v)
    elif isinstance(value, list):
        for v in value:
            refs |= _referenced_vars(v)
    return refs


def validate_playbook(pb: AnsiblePlaybook, registry: ModuleSpecRegistry) -> ValidationReport:
    """Statically check module usage and variable references; never raises."""
    diagnostics: list[Diagnostic] = []

    for play_idx, play in enumerate(pb.plays):
        defined: set[str] = set(MAGIC_VARS)
        play_vars = play.config.get("vars")
        if isinstance(play_vars, dict):
            defined.update(str(k) for k in play_vars)
        for task_idx, task in enumerate(play.tasks):
            where = f"play {play_idx + 1} task {task_idx + 1}"
            spec = registry.get(task.module)
            if spec is None:
                diagnostics.append(
                    Diagnostic("ANS_UNKNOWN_MODULE", f"{where}: unknown module {task.module!r}")
                )
                continue
            if task.module in SHELL_FAMILY:
                diagnostics.append(
                    Diagnostic("ANS_SHELL_MODULE", f"{where}: shell-family module {task.module!r}")
                )

            args = {}
            for k, v in task.args.items():
                args[spec.aliases.get(k, k)] = v

            for req in sorted(spec.required):
                if req not in args:
                    diagnostics.append(
                        Diagnostic(
                            "ANS_MISSING_REQUIRED",
                            f"{where}: {task.module} requires argument {req!r}",
                        )
                    )
            for group in spec.mutually_exclusive:
                present = sorted(k for k in group if k in args)
                if len(present) > 1:
                    diagnostics.append(
                        Diagnostic(
                            "ANS_MUTUALLY_EXCLUSIVE",
                            f"{where}: arguments {', '.join(present)} are mutually exclusive",
                        )
                    )
            for arg, value in args.items():
                if arg not in spec.arg_types:
                    if not spec.open_args:
                        diagnostics.append(
                            Diagnostic(
                                "ANS_UNKNOWN_ARG",
                                f"{where}: {task.module} does not take argument {arg!r}",
                            )
                        )
                    continue
                if not _type_ok(spec.arg_types[arg], value):
                    diagnostics.append(
                        Diagnostic(
                            "ANS_BAD_ARG_TYPE",
                            f"{where}: argument {arg!r} expects {spec.arg_types[arg]}, "
                            f"got {type(value).__name__} {value!r}",
                        )
                    )

            # variable references must be resolvable in scope
            task_defined = set(defined)
            task_vars = task.directives.get("vars")
            if isinstance(task_vars, dict):
                task_defined.update(str(k) for k in task_vars)
            loop_control = task.directives.get("loop_control")
            if isinstance(loop_control, dict) and "loop_var" in loop_control:
                task_defined.add(str(loop_control["loop_var"]))
            for ref in sorted(_referenced_vars(task.args) | _referenced_vars(task.directives)):
                if ref not in task_defined:
                    diagnostics.append(
                        Diagnostic("ANS_UNDEFINED_VAR", f"{where}: undefined variable {ref!r}")
                    )

            # later tasks may reference what this one registers or sets
            reg = task.directives.get("register")
            if isinstance(reg, str):
                defined.add(reg)
            if task.module == "ansible.builtin.set_fact":
                defined.update(str(k) for k in task.args)

    return ValidationReport.from_diagnostics(diagnostics)


# ---------------------------------------------------------------------------
# scoring

def _normalize_value(value: object) -> object:
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        s = value.strip()
        low = s.lower()
        if low in {"yes", "true"}:
            return True
        if low in {"no", "false"}:
            return False
        body = s[1:] if s.startswith("-") else s
        # leading zeros stay textual so file modes like "0644" keep their form
        if body.isdigit() and (len(body) == 1 or body[0] != "0"):
            return int(s)
        return s
    if isinstance(value, list):
        return tuple(_normalize_value(v) for v in value)
    if isinstance(value, dict):
        return tuple(sorted((str(k), repr(_normalize_value(v))) for k, v in value.items()))
    return value


def task_pairs(task: AnsibleTask, include_module: bool = True) -> set[tuple[str, object]]:
    pairs = {(str(k), repr(_normalize_value(v))) for k, v in task.args.items()}
    if include_module:
        pairs.add(("__module__", repr(task.module)))
    return pairs


def task_score(
    gt: AnsibleTask, pred: AnsibleTask | None, include_module: bool = True
) -> SemanticScore:
    """Fraction of ground-truth (key, value) pairs present in the prediction."""
    gt_pairs = task_pairs(gt, include_module)
    if pred is None:
        return SemanticScore(0.0)
    pred_pairs = task_pairs(pred, include_module)
    return SemanticScore(len(gt_pairs & pred_pairs) / len(gt_pairs))


def play_score(gt: AnsiblePlay, pred: AnsiblePlay | None, include_module: bool = True) -> float:
    if not gt.tasks:
        raise ScoreError("ground-truth play has no tasks")
    if pred is None:
        return 0.0
    consumed = [False] * len(pred.tasks)
    total = 0.0
    for gt_task in gt.tasks:
        match = None
        for j, pred_task in enumerate(pred.tasks):
            if not consumed[j] and pred_task.module == gt_task.module:
                consumed[j] = True
                match = pred_task
                break
        total += task_score(gt_task, match, include_module).value
    return total / len(gt.tasks)


def playbook_score(
    gt: AnsiblePlaybook, pred: AnsiblePlaybook, include_module: bool = True
) -> SemanticScore:
    """Mean play score; plays paired by index, missing prediction plays score 0."""
    if not gt.plays:
        raise ScoreError("ground-truth playbook has no plays")
    total = 0.0
    for i, gt_play in enumerate(gt.plays):
        pred_play = pred.plays[i] if i < len(pred.plays) else None
        total += play_score(gt_play, pred_play, include_module)
    return SemanticScore(total / len(gt.plays))


# ---------------------------------------------------------------------------
# variable and role infilling

@dataclass
class RoleContext:
    """Filesystem role tree plus the layered variable sources.

    Precedence, lowest to highest: role defaults < role vars < play vars
    < inventory vars < extra vars.
    """

    root: Path
    inventory_vars: dict[str, object] = field(default_factory=dict)
    extra_vars: dict[str, object] = field(default_factory=dict)

    def role_dir(self, name: str) -> Path:
        return Path(self.root) / "roles" / name


@dataclass
class InfillResult:
    playbook: AnsiblePlaybook
    diagnostics: tuple[Diagnostic, ...]


def _load_vars_file(path: Path) -> dict[str, object]:
    if not path.is_file():
        return {}
    data = yaml.safe_load(path.read_text())
    return data if isinstance(data, dict) else {}


def _role_names(roles_value: object) -> list[str]:
    names = []
    if not isinstance(roles_value, list):
        raise InfillError(f"roles is not a list: {roles_value!r}")
    for entry in roles_value:
        if isinstance(entry, str):
            names.append(entry)
        elif isinstance(entry, dict) and ("role" in entry or "name" in entry):
            names.append(str(entry.get("role", entry.get("name"))))
        else:
            raise InfillError(f"unrecognized role reference: {entry!r}")
    return names


def _substitute(value, resolve, unresolved: set[str]):
    if isinstance(value, str):
        full = _BARE_VAR.fullmatch(value.strip())
        if full:
            hit, resolved = resolve(full.group(1))
            if hit:
                return resolved
            unresolved.add(full.group(1))
            return value

        def repl(m):
            hit, resolved = resolve(m.group(1))
            if hit:
                return str(resolved)
            unresolved.add(m.group(1))
            return m.group(0)

        return _BARE_VAR.sub(repl, value)
    if isinstance(value, list):
        return [_substitute(v, resolve, unresolved) for v in value]
    if isinstance(value, dict):
        return {k: _substitute(v, resolve, unresolved) for k, v in value.items()}
    return value


def infill_playbook(pb: AnsiblePlaybook, ctx: RoleContext) -> InfillResult:
    """Inline role task lists and substitute resolvable {{ var }} references."""
    root = Path(ctx.root)
    if not root.is_dir():
        raise InfillError(f"role context root does not exist: {root}")

    unresolved: set[str] = set()
    plays: list[AnsiblePlay] = []
    for play in pb.plays:
        role_defaults: dict[str, object] = {}
        role_vars: dict[str, object] = {}
        role_tasks: list[AnsibleTask] = []

        config = dict(play.config)
        roles_value = config.pop("roles", None)
        if roles_value is not None:
            for role in _role_names(roles_value):
                role_dir = ctx.role_dir(role)
                if not role_dir.is_dir():
                    raise InfillError(f"role directory not found: {role_dir}")
                tasks_file = role_dir / "tasks" / "main.yml"
                if tasks_file.is_file():
                    node = yaml.safe_load(tasks_file.read_text())
                    role_tasks.extend(parse_task_list(node if node is not None else []))
                role_defaults.update(_load_vars_file(role_dir / "defaults" / "main.yml"))
                role_vars.update(_load_vars_file(role_dir / "vars" / "main.yml"))

        play_vars = config.get("vars") if isinstance(config.get("vars"), dict) else {}
        layers = [role_defaults, role_vars, play_vars, ctx.inventory_vars, ctx.extra_vars]

        def resolve(name: str):
            for layer in reversed(layers):
                if name in layer:
                    return True, layer[name]
            return False, None

        new_tasks = []
        for task in list(role_tasks) + list(play.tasks):
            new_tasks.append(
                AnsibleTask(
                    module=task.module,
                    args=_substitute(task.args, resolve, unresolved),
                    directives=_substitute(task.directives, resolve, unresolved),
                    name=task.name,
                )
            )
        plays.append(AnsiblePlay(tasks=tuple(new_tasks), config=config))

    diagnostics = tuple(
        Diagnostic("ANS_UNRESOLVED_VAR", f"variable {name!r} is not defined in any source")
        for name in sorted(unresolved)
    )
    return InfillResult(playbook=AnsiblePlaybook(plays=tuple(plays)), diagnostics=diagnostics)
