"""UI configuration space, adaptation actions, context model, and encodings.

Everything else in the engine is built on these types: a UI configuration is a
point in a small discrete space (120 combinations of five attributes), an
adaptation action assigns a single attribute value (or does nothing), and the
context model carries the user/platform/environment signals that condition
rewards. The module also owns the canonical enumeration/index orders and the
16-dimensional one-hot state encoding shared by the reward model and agents.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping, Optional, Union

import numpy as np


class Domain(str, Enum):
    COURSES = "courses"
    TRIPS = "trips"


class Layout(str, Enum):
    LIST = "list"
    GRID2 = "grid2"
    GRID3 = "grid3"
    GRID4 = "grid4"
    GRID5 = "grid5"


class FontSize(str, Enum):
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


class Density(str, Enum):
    DETAILED = "detailed"
    CONDENSED = "condensed"


class Theme(str, Enum):
    LIGHT = "light"
    DARK = "dark"


class Widget(str, Enum):
    LIST_MENU = "list_menu"
    DROPDOWN = "dropdown"


class Attribute(str, Enum):
    LAYOUT = "layout"
    FONT_SIZE = "font_size"
    DENSITY = "density"
    THEME = "theme"
    WIDGET = "widget"


AttributeValue = Union[Layout, FontSize, Density, Theme, Widget]

# Declared attribute order; fixes enumeration, encoding blocks, action indices.
ATTRIBUTES: tuple[Attribute, ...] = (
    Attribute.LAYOUT,
    Attribute.FONT_SIZE,
    Attribute.DENSITY,
    Attribute.THEME,
    Attribute.WIDGET,
)

ATTRIBUTE_VALUES: Mapping[Attribute, tuple[AttributeValue, ...]] = {
    Attribute.LAYOUT: tuple(Layout),
    Attribute.FONT_SIZE: tuple(FontSize),
    Attribute.DENSITY: tuple(Density),
    Attribute.THEME: tuple(Theme),
    Attribute.WIDGET: tuple(Widget),
}

DOMAINS: tuple[Domain, ...] = tuple(Domain)


@dataclass(frozen=True)
class UiConfig:
    """One concrete UI configuration (a full assignment of all attributes)."""

    layout: Layout
    font_size: FontSize
    density: Density
    theme: Theme
    widget: Widget

    def get(self, attribute: Attribute) -> AttributeValue:
        return getattr(self, attribute.value)

    def with_value(self, attribute: Attribute, value: AttributeValue) -> "UiConfig":
        return dataclasses.replace(self, **{attribute.value: value})


# Factory default every episode and the non-adaptive technique start from.
DEFAULT_CONFIG = UiConfig(
    layout=Layout.LIST,
    font_size=FontSize.MEDIUM,
    density=Density.DETAILED,
    theme=Theme.LIGHT,
    widget=Widget.LIST_MENU,
)


@dataclass(frozen=True)
class AdaptationAction:
    """Assign one attribute value, or do nothing (attribute=None, value=None)."""

    attribute: Optional[Attribute] = None
    value: Optional[AttributeValue] = None

    def __post_init__(self) -> None:
        if (self.attribute is None) != (self.value is None):
            raise ValueError("attribute and value must both be set or both be None")
        if self.attribute is not None:
            allowed = ATTRIBUTE_VALUES[self.attribute]
            if self.value not in allowed:
                raise ValueError(f"{self.value!r} is not a value of {self.attribute.value}")

    @property
    def is_noop(self) -> bool:
        return self.attribute is None

    @classmethod
    def noop(cls) -> "AdaptationAction":
        return cls()

    @classmethod
    def assign(cls, attribute: Attribute, value: AttributeValue) -> "AdaptationAction":
        return cls(attribute=attribute, value=value)


def apply_action(config: UiConfig, action: AdaptationAction) -> UiConfig:
    """Pure transition: assignment replaces one attribute, no-op returns config.

    Assigning the currently-held value is permitted and leaves the config equal.
    """
    if action.is_noop:
        return config
    assert action.attribute is not None and action.value is not None
    return config.with_value(action.attribute, action.value)


# Action space: NoOp first, then assignments in attribute-block order. 15 total.
ACTIONS: tuple[AdaptationAction, ...] = (AdaptationAction.noop(),) + tuple(
    AdaptationAction.assign(attr, value)
    for attr in ATTRIBUTES
    for value in ATTRIBUTE_VALUES[attr]
)
ACTION_COUNT = len(ACTIONS)

_ACTION_INDEX: Mapping[AdaptationAction, int] = {a: i for i, a in enumerate(ACTIONS)}


def action_index(action: AdaptationAction) -> int:
    return _ACTION_INDEX[action]


def _enumerate_configs() -> tuple[UiConfig, ...]:
    out = []
    for layout in Layout:
        for font in FontSize:
            for density in Density:
                for theme in Theme:
                    for widget in Widget:
                        out.append(UiConfig(layout, font, density, theme, widget))
    return tuple(out)


# Lexicographic in declared attribute order; layout varies slowest.
ALL_CONFIGS: tuple[UiConfig, ...] = _enumerate_configs()
CONFIG_COUNT = len(ALL_CONFIGS)

_CONFIG_INDEX: Mapping[UiConfig, int] = {c: i for i, c in enumerate(ALL_CONFIGS)}


def enumerate_configs() -> tuple[UiConfig, ...]:
    """All 120 configurations in the fixed lexicographic order."""
    return ALL_CONFIGS


def config_index(config: UiConfig) -> int:
    return _CONFIG_INDEX[config]


def domain_index(domain: Domain) -> int:
    return DOMAINS.index(domain)


# One-hot block layout: layout 0-4, font 5-7, density 8-9, theme 10-11,
# widget 12-13, domain 14-15.
STATE_DIM = 16

_BLOCK_OFFSETS: dict[Attribute, int] = {}
_off = 0
for _attr in ATTRIBUTES:
    _BLOCK_OFFSETS[_attr] = _off
    _off += len(ATTRIBUTE_VALUES[_attr])
_DOMAIN_OFFSET = _off  # 14


def encode_state(config: UiConfig, domain: Domain) -> np.ndarray:
    """16-dim float64 one-hot encoding; exactly six ones (five blocks + domain)."""
    x = np.zeros(STATE_DIM, dtype=np.float64)
    for attr in ATTRIBUTES:
        values = ATTRIBUTE_VALUES[attr]
        x[_BLOCK_OFFSETS[attr] + values.index(config.get(attr))] = 1.0
    x[_DOMAIN_OFFSET + domain_index(domain)] = 1.0
    return x


# --- JSON codecs ------------------------------------------------------------
# Wire format: lower_snake_case field names, enum values as their string forms.


def config_to_json(config: UiConfig) -> dict[str, str]:
    return {attr.value: config.get(attr).value for attr in ATTRIBUTES}


def config_from_json(obj: Mapping[str, Any]) -> UiConfig:
    try:
        return UiConfig(
            layout=Layout(obj["layout"]),
            font_size=FontSize(obj["font_size"]),
            density=Density(obj["density"]),
            theme=Theme(obj["theme"]),
            widget=Widget(obj["widget"]),
        )
    except (KeyError, ValueError) as exc:
        raise ValueError(f"malformed config object: {exc}") from exc


def config_slug(config: UiConfig) -> str:
    """Compact comma-joined form, e.g. "list,small,detailed,light,list_menu"."""
    return ",".join(config.get(attr).value for attr in ATTRIBUTES)


def config_from_slug(slug: str) -> UiConfig:
    parts = slug.split(",")
    if len(parts) != len(ATTRIBUTES):
        raise ValueError(f"config slug needs {len(ATTRIBUTES)} comma-joined values")
    return config_from_json(dict(zip((a.value for a in ATTRIBUTES), parts)))


def action_to_json(action: AdaptationAction) -> dict[str, str]:
    if action.is_noop:
        return {"kind": "noop"}
    assert action.attribute is not None and action.value is not None
    return {"kind": "assign", "attribute": action.attribute.value, "value": action.value.value}


def action_from_json(obj: Mapping[str, Any]) -> AdaptationAction:
    kind = obj.get("kind")
    if kind == "noop":
        return AdaptationAction.noop()
    if kind == "assign":
        try:
            attr = Attribute(obj["attribute"])
            value_str = obj["value"]
        except (KeyError, ValueError) as exc:
            raise ValueError(f"malformed action object: {exc}") from exc
        for value in ATTRIBUTE_VALUES[attr]:
            if value.value == value_str:
                return AdaptationAction.assign(attr, value)
        raise ValueError(f"{value_str!r} is not a value of {attr.value}")
    raise ValueError(f"unknown action kind: {kind!r}")


# --- Context model ----------------------------------------------------------


class AgeBand(str, Enum):
    UNDER_25 = "under_25"
    FROM_25_TO_34 = "25_34"
    FROM_35_TO_49 = "35_49"
    OVER_50 = "over_50"


class InputDevice(str, Enum):
    MOUSE = "mouse"
    TOUCH = "touch"


@dataclass(frozen=True)
class UserContext:
    age_band: AgeBand = AgeBand.FROM_25_TO_34
    interaction_count: int = 0
    declared_pref: Optional[UiConfig] = None

    def __post_init__(self) -> None:
        if self.interaction_count < 0:
            raise ValueError("interaction_count must be >= 0")


@dataclass(frozen=True)
class PlatformContext:
    screen_w_px: int = 1920
    screen_h_px: int = 1080
    input: InputDevice = InputDevice.MOUSE

    def __post_init__(self) -> None:
        if self.screen_w_px <= 0 or self.screen_h_px <= 0:
            raise ValueError("screen dimensions must be positive")


@dataclass(frozen=True)
class EnvironmentContext:
    ambient_light: float = 0.8
    noise_level: float = 0.1

    def __post_init__(self) -> None:
        if not 0.0 <= self.ambient_light <= 1.0:
            raise ValueError("ambient_light must lie in [0, 1]")
        if not 0.0 <= self.noise_level <= 1.0:
            raise ValueError("noise_level must lie in [0, 1]")


@dataclass(frozen=True)
class ContextModel:
    user: UserContext = UserContext()
    platform: PlatformContext = PlatformContext()
    environment: EnvironmentContext = EnvironmentContext()


def default_context() -> ContextModel:
    return ContextModel()


def context_to_json(ctx: ContextModel) -> dict[str, Any]:
    return {
        "user": {
            "age_band": ctx.user.age_band.value,
            "interaction_count": ctx.user.interaction_count,
            "declared_pref": (
                None if ctx.user.declared_pref is None else config_to_json(ctx.user.declared_pref)
            ),
        },
        "platform": {
            "screen_w_px": ctx.platform.screen_w_px,
            "screen_h_px": ctx.platform.screen_h_px,
            "input": ctx.platform.input.value,
        },
        "environment": {
            "ambient_light": ctx.environment.ambient_light,
            "noise_level": ctx.environment.noise_level,
        },
    }


def context_from_json(obj: Mapping[str, Any]) -> ContextModel:
    user = obj.get("user", {})
    platform = obj.get("platform", {})
    environment = obj.get("environment", {})
    declared = user.get("declared_pref")
    return ContextModel(
        user=UserContext(
            age_band=AgeBand(user.get("age_band", AgeBand.FROM_25_TO_34.value)),
            interaction_count=int(user.get("interaction_count", 0)),
            declared_pref=None if declared is None else config_from_json(declared),
        ),
        platform=PlatformContext(
            screen_w_px=int(platform.get("screen_w_px", 1920)),
            screen_h_px=int(platform.get("screen_h_px", 1080)),
            input=InputDevice(platform.get("input", InputDevice.MOUSE.value)),
        ),
        environment=EnvironmentContext(
            ambient_light=float(environment.get("ambient_light", 0.8)),
            noise_level=float(environment.get("noise_level", 0.1)),
        ),
    )
