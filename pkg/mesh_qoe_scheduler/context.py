"""Configuration tree used to describe experiments.

The tree is built from YAML or JSON documents. String leaves may be Jinja2
templates; they are rendered into native Python values against the root of
the tree when they are read, so one value can be computed from another:

    scheduler:
      k: "{{ 1 / 4 }}"
    experiment:
      sweep:
        axis: app_count
        values: "{{ range(15, 40, 5) | list }}"
"""

import inspect
import os
from collections import UserDict, UserList
from typing import Any, Iterable, List, Tuple

import yaml
from jinja2 import StrictUndefined
from jinja2.nativetypes import NativeEnvironment

from mesh_qoe_scheduler.errors import InvalidConfig
from mesh_qoe_scheduler.logging import LoggingMixin


def new_template_environment(root: "ConfigNode") -> NativeEnvironment:
    """Create a native-types Jinja2 environment whose globals are the config root."""
    env = NativeEnvironment(undefined=StrictUndefined)
    env.globals["root"] = root
    return env


def _is_template(value: Any) -> bool:
    return isinstance(value, str) and ("{{" in value or "{%" in value)


class ConfigNodeMixin:
    """A mixin to help create tree nodes for the configuration tree.

    Values stored in a node are converted to nodes themselves (mappings to
    `ConfigNode`, lists to `_ListNode`) and know their parent, so any node
    can find the root for template rendering.
    """

    _parent: "ConfigNodeMixin" = None

    @property
    def root(self) -> "ConfigNodeMixin":
        """Lookup and return the root node in the tree."""
        node = self
        while node._parent is not None:  # pylint:disable=protected-access
            node = node._parent  # pylint:disable=protected-access
        return node

    def _create_node(self, value):
        """Wrap `value` in the proper node type and attach it to this node."""
        if isinstance(value, ConfigNodeMixin):
            value._parent = self  # pylint:disable=protected-access
            return value
        if isinstance(value, dict):
            value = ConfigNode(value)
        elif isinstance(value, (list, tuple)):
            value = _ListNode(value)
        else:
            return value
        value._parent = self  # pylint:disable=protected-access
        return value

    def _render(self, value):
        """Render template leaves; other values are returned unchanged."""
        if not _is_template(value):
            return value
        root = self.root
        env = getattr(root, "_env", None)
        if env is None:
            env = new_template_environment(root)
            root._env = env  # pylint:disable=protected-access,attribute-defined-outside-init
        context = dict(root.data) if hasattr(root, "data") else {}
        return env.from_string(value).render(**context)

    def to_native(self):
        """Return the subtree as plain dicts and lists with every template rendered."""
        if isinstance(self, ConfigNode):
            return {key: _native(self[key]) for key in self.data}
        return [_native(self[i]) for i in range(len(self.data))]


def _native(value):
    if isinstance(value, ConfigNodeMixin):
        return value.to_native()
    if isinstance(value, list):
        return [_native(item) for item in value]
    if isinstance(value, dict):
        return {key: _native(item) for key, item in value.items()}
    return value


class _ListNode(ConfigNodeMixin, UserList):
    """`_ListNode` is a `collections.UserList` whose items are tree nodes."""

    def __init__(self, initlist=None):
        super().__init__(initlist)
        for i, item in enumerate(self.data):
            self.data[i] = self._create_node(item)

    def __getitem__(self, index):
        """Get an item, rendering it if it is a template."""
        return self._render(self.data[index])

    def __iter__(self):
        """Iterate over rendered items."""
        for i in range(len(self.data)):
            yield self[i]


class ConfigNode(ConfigNodeMixin, UserDict):
    """A mapping node whose keys are also available as attributes.

    Updating a node with another mapping merges recursively: nested mappings
    are merged key by key, everything else is replaced.
    """

    def __init__(self, data=None):
        """Build the node from an optional mapping."""
        super().__init__()
        if data:
            self.update(data)

    def __setitem__(self, key, value):
        """Store a value, merging into an existing mapping node if there is one."""
        existing = self.data.get(key)
        if isinstance(existing, ConfigNode) and isinstance(value, (dict, ConfigNode)):
            existing.update(value.data if isinstance(value, ConfigNode) else value)
            return
        self.data[key] = self._create_node(value)

    def __getitem__(self, key):
        """Get a value, rendering it if it is a template."""
        return self._render(self.data[key])

    def __getattr__(self, attr) -> Any:
        """Retrieve the dictionary key that matches `attr`.

        Raises:
            AttributeError: If no dictionary key matching the attribute name exists.
        """
        if attr.startswith("_") or attr == "data":
            raise AttributeError(attr)
        if attr in self.data:
            return self[attr]
        raise AttributeError(f"'{self.__class__.__name__}' object has no attribute '{attr}'")

    def get(self, key, default=None):
        """Rendered value for `key`, or `default`."""
        if key in self.data:
            return self[key]
        return default


def context_file(*ctx_files):
    """Add a packaged YAML file of base values to a context class.

    Context files are loaded once per class hierarchy, base classes first,
    and merged beneath whatever data the context is created with.
    """

    def wrapper(context_cls):
        if "__base_contexts" not in context_cls.__dict__:
            setattr(context_cls, "__base_contexts", [])
        base_contexts = getattr(context_cls, "__base_contexts")
        for ctx_file in ctx_files:
            if ctx_file not in base_contexts:
                base_contexts.append(ctx_file)
        return context_cls

    return wrapper


def load_yaml_resource(cls, resource: str):
    """Load a YAML file stored next to the module that defines `cls`."""
    path = os.path.join(os.path.dirname(inspect.getfile(cls)), resource)
    with open(path, encoding="UTF-8") as file:
        return yaml.safe_load(file)


class Context(ConfigNode, LoggingMixin):
    """A context is a configuration tree with base files and validation.

    Args:
        data: a mapping of values merged on top of the class's context files.
    """

    def __init__(self, data: dict = None):
        """Merge the base context files, then the supplied data."""
        super().__init__()
        for base, filename in self.base_context_files():
            values = load_yaml_resource(base, filename)
            if values:
                self.update(values)
        if data:
            self.update(data)

    @classmethod
    def base_context_files(cls) -> List[Tuple[type, str]]:
        """Calculate the complete list of context files for the class, base classes first."""
        bases = list(inspect.getmro(cls))
        bases.reverse()
        files = []
        for base in bases:
            for filename in base.__dict__.get("__base_contexts", []):
                files.append((base, filename))
        return files

    @classmethod
    def load(cls, yaml_or_mapping):
        """Load a context from a YAML/JSON document or a mapping."""
        if isinstance(yaml_or_mapping, dict):
            return cls(data=yaml_or_mapping)
        if isinstance(yaml_or_mapping, list):
            raise ValueError("Can only load mappings or yaml")
        loaded = yaml.safe_load(yaml_or_mapping)
        if loaded is None:
            return cls()
        return cls.load(loaded)

    @classmethod
    def load_file(cls, filename: str):
        """Load a context from a YAML or JSON file."""
        with open(filename, encoding="UTF-8") as file:
            return cls.load(file.read())

    def validators(self) -> Iterable[str]:
        """Names of the validate_ methods, in alphabetical order."""
        return [name for name in dir(self) if name.startswith("validate_") and callable(getattr(self, name))]

    def validate(self):
        """Run every `validate_` method and raise one InvalidConfig listing all problems.

        Raises:
            InvalidConfig: if any validator failed.
        """
        problems = []
        for method in self.validators():
            try:
                getattr(self, method)()
            except InvalidConfig as ex:
                problems.extend(ex.problems or [ex.message])
        if problems:
            self.log_failure(message=f"Configuration has {len(problems)} problem(s)")
            raise InvalidConfig("Invalid configuration", problems)
