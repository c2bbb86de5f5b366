"""Furniture catalog used to dress generated rooms.

Entries carry footprint sizes, an optional resting surface height for props,
style tags, and a flat render color.  Decoys are never interactable.
"""

from __future__ import annotations

from dataclasses import dataclass

STYLES = ("living_room", "kitchen", "bathroom", "bedroom")


@dataclass(frozen=True)
class FurnitureCatalogEntry:
    name: str
    style_tags: frozenset[str]
    size: tuple[float, float, float]  # width (x), depth (z), height (y), meters
    surface_height: float | None = None  # props may rest here
    interactable: bool = False
    color: tuple[int, int, int] = (128, 128, 128)

    def __post_init__(self) -> None:
        w, d, h = self.size
        if w <= 0 or d <= 0 or h <= 0:
            raise ValueError(f"{self.name}: sizes must be strictly positive")
        if self.surface_height is not None and self.surface_height > h:
            raise ValueError(f"{self.name}: surface_height above the item itself")
        bad = self.style_tags - set(STYLES)
        if bad:
            raise ValueError(f"{self.name}: unknown style tags {sorted(bad)}")


def _e(name, styles, size, surface=None, color=(128, 128, 128)):
    return FurnitureCatalogEntry(name, frozenset(styles), size, surface, False, color)


CATALOG: tuple[FurnitureCatalogEntry, ...] = (
    # living room
    _e("sofa", ("living_room",), (1.8, 0.85, 0.8), color=(70, 90, 140)),
    _e("armchair", ("living_room", "bedroom"), (0.9, 0.85, 0.85), color=(90, 110, 150)),
    _e("coffee_table", ("living_room",), (1.1, 0.6, 0.45), 0.45, color=(150, 110, 70)),
    _e("tv_stand", ("living_room",), (1.4, 0.45, 0.5), 0.5, color=(60, 50, 45)),
    _e("bookshelf", ("living_room", "bedroom"), (0.9, 0.35, 1.9), color=(120, 85, 55)),
    _e("floor_lamp", ("living_room", "bedroom"), (0.35, 0.35, 1.6), color=(200, 190, 150)),
    _e("side_table", ("living_room", "bedroom"), (0.5, 0.5, 0.55), 0.55, color=(160, 120, 80)),
    _e("rug_chest", ("living_room",), (1.0, 0.5, 0.5), 0.5, color=(110, 70, 50)),
    # kitchen
    _e("dining_table", ("kitchen", "living_room"), (1.5, 0.9, 0.75), 0.75, color=(170, 130, 90)),
    _e("kitchen_counter", ("kitchen",), (1.6, 0.65, 0.9), 0.9, color=(180, 180, 175)),
    _e("fridge", ("kitchen",), (0.75, 0.75, 1.8), color=(220, 220, 225)),
    _e("stove", ("kitchen",), (0.65, 0.65, 0.9), 0.9, color=(60, 60, 65)),
    _e("kitchen_island", ("kitchen",), (1.2, 0.8, 0.9), 0.9, color=(190, 175, 160)),
    _e("bar_stool", ("kitchen",), (0.4, 0.4, 0.75), color=(100, 80, 60)),
    _e("pantry_cabinet", ("kitchen",), (0.9, 0.45, 1.8), color=(140, 100, 65)),
    _e("trash_bin", ("kitchen", "bathroom"), (0.35, 0.35, 0.6), color=(90, 95, 100)),
    # bathroom
    _e("bathtub", ("bathroom",), (1.6, 0.75, 0.6), color=(235, 235, 235)),
    _e("washbasin", ("bathroom",), (0.6, 0.5, 0.85), 0.85, color=(225, 225, 230)),
    _e("toilet", ("bathroom",), (0.45, 0.7, 0.75), color=(240, 240, 240)),
    _e("towel_rack", ("bathroom",), (0.7, 0.25, 1.2), color=(180, 170, 160)),
    _e("laundry_basket", ("bathroom", "bedroom"), (0.45, 0.45, 0.6), color=(200, 180, 140)),
    _e("bathroom_cabinet", ("bathroom",), (0.8, 0.35, 0.9), 0.9, color=(210, 205, 195)),
    # bedroom
    _e("bed", ("bedroom",), (2.0, 1.6, 0.55), 0.55, color=(140, 110, 120)),
    _e("nightstand", ("bedroom",), (0.5, 0.4, 0.55), 0.55, color=(150, 115, 75)),
    _e("wardrobe", ("bedroom",), (1.2, 0.6, 2.0), color=(125, 90, 60)),
    _e("dresser", ("bedroom",), (1.0, 0.5, 0.8), 0.8, color=(155, 120, 85)),
    _e("desk", ("bedroom", "living_room"), (1.2, 0.6, 0.75), 0.75, color=(165, 130, 95)),
    _e("desk_chair", ("bedroom", "living_room"), (0.5, 0.5, 0.9), color=(80, 80, 90)),
)

#: Render colors for prop kinds and the room shell.
PROP_COLORS = {
    "key": (230, 190, 40),
    "paper": (250, 250, 235),
    "box": (130, 85, 45),
    "exit_door": (150, 40, 35),
    "entrance_door": (105, 105, 110),
}
SHELL_COLORS = {
    "wall": (185, 180, 170),
    "floor": (110, 100, 90),
    "ceiling": (225, 222, 215),
}

#: Footprints for chain props, (w, d, h) meters.
PROP_SIZES = {
    "key": (0.16, 0.16, 0.04),
    "paper": (0.22, 0.3, 0.02),
    "box": (0.45, 0.35, 0.3),
}
DOOR_SIZE = (1.0, 0.12, 2.2)


def entries_for_style(style: str) -> list[FurnitureCatalogEntry]:
    if style not in STYLES:
        raise ValueError(f"unknown style {style!r}")
    return [e for e in CATALOG if style in e.style_tags]


def entry(name: str) -> FurnitureCatalogEntry:
    for e in CATALOG:
        if e.name == name:
            return e
    raise KeyError(name)
