"""Parametric synthetic users.

A persona scores a UI configuration by weighted agreement with its per-domain
preferred configuration: engagement = 1 - sum(w_k * [attr_k differs]), with an
optional context rule (prefer the dark theme when ambient light is dim) and
optional Gaussian observation noise, clamped to [0, 1]. Personas stand in for
human participants when exercising the feedback loop end to end, and a broad
"general user" persona stands in for a population-level engagement model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np

from .env import ClipSegment, RewardProvider
from .ranking import PreferenceLabel
from .ui import (
    ALL_CONFIGS,
    ATTRIBUTES,
    Attribute,
    ContextModel,
    Density,
    Domain,
    FontSize,
    Layout,
    Theme,
    UiConfig,
    Widget,
    apply_action,
    default_context,
)

DIM_LIGHT_THRESHOLD = 0.3
TIE_EPS = 1e-9


@dataclass(frozen=True)
class Persona:
    """Weights follow the declared attribute order (layout, font_size, density,
    theme, widget) and are normalized to sum to one on construction."""

    id: str
    preferred: Mapping[Domain, UiConfig]
    weights: tuple[float, float, float, float, float]
    noise_sd: float = 0.0
    dark_when_dim: bool = False

    def __post_init__(self) -> None:
        if set(self.preferred) != set(Domain):
            raise ValueError("preferred must map every domain")
        if len(self.weights) != len(ATTRIBUTES):
            raise ValueError(f"need {len(ATTRIBUTES)} weights")
        if any(w < 0 or w > 1 for w in self.weights):
            raise ValueError("weights must lie in [0, 1]")
        total = float(sum(self.weights))
        if total <= 0:
            raise ValueError("weights must not all be zero")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        object.__setattr__(self, "weights", tuple(w / total for w in self.weights))


def preferred_config(p: Persona, domain: Domain, ctx: ContextModel) -> UiConfig:
    """Context-adjusted preference: dim light flips the preferred theme to dark."""
    pref = p.preferred[domain]
    if p.dark_when_dim and ctx.environment.ambient_light < DIM_LIGHT_THRESHOLD:
        pref = pref.with_value(Attribute.THEME, Theme.DARK)
    return pref


def engagement(
    p: Persona,
    config: UiConfig,
    domain: Domain,
    ctx: ContextModel,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """Engagement in [0, 1]; pass an rng to add N(0, noise_sd) before clamping."""
    pref = preferred_config(p, domain, ctx)
    value = 1.0
    for w, attr in zip(p.weights, ATTRIBUTES):
        if config.get(attr) != pref.get(attr):
            value -= w
    if rng is not None and p.noise_sd > 0:
        value += float(rng.normal(0.0, p.noise_sd))
    return min(1.0, max(0.0, value))


def oracle_best(p: Persona, domain: Domain, ctx: ContextModel) -> tuple[UiConfig, float]:
    """Exhaustive argmax of noiseless engagement; ties go to enumeration order."""
    best_config = ALL_CONFIGS[0]
    best_value = -math.inf
    for config in ALL_CONFIGS:
        value = engagement(p, config, domain, ctx)
        if value > best_value:
            best_config, best_value = config, value
    return best_config, best_value


def persona_reward_provider(
    p: Persona,
    domain: Domain,
    rng: Optional[np.random.Generator] = None,
) -> RewardProvider:
    """Reward provider scoring the post-action configuration."""

    def rp(state, action, ctx):
        return engagement(p, apply_action(state, action), domain, ctx, rng=rng)

    return rp


def clip_mean_engagement(p: Persona, clip: ClipSegment, ctx: ContextModel) -> float:
    """Mean noiseless engagement over a clip's recorded states."""
    values = [engagement(p, s, clip.domain, ctx) for s in clip.states()]
    return float(sum(values) / len(values))


def simulated_comparator(
    p: Persona,
    ctx: Optional[ContextModel] = None,
    tie_eps: float = TIE_EPS,
) -> Callable[[ClipSegment, ClipSegment], PreferenceLabel]:
    """Noiseless stand-in for a human judge: higher mean engagement wins,
    differences below tie_eps count as Equal."""
    context = ctx if ctx is not None else default_context()

    def compare(a: ClipSegment, b: ClipSegment) -> PreferenceLabel:
        diff = clip_mean_engagement(p, a, context) - clip_mean_engagement(p, b, context)
        if abs(diff) < tie_eps:
            return PreferenceLabel.EQUAL
        return PreferenceLabel.LEFT if diff > 0 else PreferenceLabel.RIGHT

    return compare


# --- Preset library ---------------------------------------------------------


def _readability() -> Persona:
    return Persona(
        id="readability",
        preferred={
            Domain.COURSES: UiConfig(Layout.LIST, FontSize.LARGE, Density.DETAILED, Theme.LIGHT, Widget.LIST_MENU),
            Domain.TRIPS: UiConfig(Layout.GRID2, FontSize.LARGE, Density.DETAILED, Theme.LIGHT, Widget.LIST_MENU),
        },
        weights=(0.15, 0.45, 0.2, 0.1, 0.1),
    )


def _aesthetics() -> Persona:
    return Persona(
        id="aesthetics",
        preferred={
            Domain.COURSES: UiConfig(Layout.GRID3, FontSize.MEDIUM, Density.CONDENSED, Theme.DARK, Widget.DROPDOWN),
            Domain.TRIPS: UiConfig(Layout.GRID4, FontSize.MEDIUM, Density.CONDENSED, Theme.DARK, Widget.DROPDOWN),
        },
        weights=(0.2, 0.1, 0.1, 0.45, 0.15),
        dark_when_dim=True,
    )


def _density_averse() -> Persona:
    return Persona(
        id="density-averse",
        preferred={
            Domain.COURSES: UiConfig(Layout.GRID2, FontSize.MEDIUM, Density.CONDENSED, Theme.LIGHT, Widget.DROPDOWN),
            Domain.TRIPS: UiConfig(Layout.GRID2, FontSize.MEDIUM, Density.CONDENSED, Theme.LIGHT, Widget.LIST_MENU),
        },
        weights=(0.15, 0.1, 0.5, 0.1, 0.15),
    )


PRESETS: dict[str, Callable[[], Persona]] = {
    "readability": _readability,
    "aesthetics": _aesthetics,
    "density-averse": _density_averse,
}

PRESET_NAMES = tuple(PRESETS)


def preset_persona(name: str) -> Persona:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown persona preset {name!r}; choose from {sorted(PRESETS)}") from None


def baseline_persona() -> Persona:
    """Broad "general user" engagement model: even weights, near-default tastes.

    Used as the population-level engagement source when blending with a
    per-user learned reward model.
    """
    return Persona(
        id="baseline",
        preferred={
            Domain.COURSES: UiConfig(Layout.GRID3, FontSize.MEDIUM, Density.DETAILED, Theme.LIGHT, Widget.LIST_MENU),
            Domain.TRIPS: UiConfig(Layout.GRID2, FontSize.MEDIUM, Density.DETAILED, Theme.LIGHT, Widget.DROPDOWN),
        },
        weights=(0.2, 0.2, 0.2, 0.2, 0.2),
    )


def make_personas(n: int, seed: int = 0) -> list[Persona]:
    """n personas: the named presets first (up to three), then seeded randoms."""
    if n < 0:
        raise ValueError("n must be >= 0")
    personas = [PRESETS[name]() for name in list(PRESETS)[: min(n, len(PRESETS))]]
    rng = np.random.default_rng(seed)
    while len(personas) < n:
        preferred = {}
        for domain in Domain:
            preferred[domain] = ALL_CONFIGS[int(rng.integers(len(ALL_CONFIGS)))]
        raw = rng.uniform(0.05, 1.0, size=len(ATTRIBUTES))
        personas.append(
            Persona(
                id=f"persona-{len(personas):03d}",
                preferred=preferred,
                weights=tuple(float(w) for w in raw),
                noise_sd=float(rng.uniform(0.0, 0.05)),
                dark_when_dim=bool(rng.random() < 0.5),
            )
        )
    return personas
