#!/usr/bin/env python3
"""Authors the bundled scene fixtures under data/scenes/.

Run from the repository root: python3 tools/fixtures/make_scenes.py
The output is committed; rerun only when the layouts below change.
"""
import json
import re
from pathlib import Path

OUT = Path(__file__).resolve().parents[2] / "data" / "scenes"
FACADE_INSET = 0.05  # footprints reach slightly into the street so rays report the object


def rect(x0, y0, x1, y1):
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]


def box(cx, cy, w, h):
    return rect(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)


def building(oid, x0, y0, x1, y1, height, caption=None, cls="building"):
    i = FACADE_INSET
    o = {"id": oid, "class": cls, "footprint": rect(x0 - i, y0 - i, x1 + i, y1 + i), "height": height}
    if caption:
        o["caption"] = caption
    return o


def prop(oid, cls, cx, cy, w, h, height, caption=None):
    o = {"id": oid, "class": cls, "footprint": box(cx, cy, w, h), "height": height}
    if caption:
        o["caption"] = caption
    return o


def kendall_layout():
    """Main street runs north along x in [0, 24] for 200 m. A side street leaves
    west at y in [150, 166]; the corner plaza x in [-30, 0], y in [108, 150]
    holds the subway kiosk. A shortcut alley runs west at y in [60, 64] and
    north along x in [-64, -59] to the side street."""
    walkable = [
        rect(0, 0, 24, 200),        # main street
        rect(-120, 150, 1, 166),    # side street
        rect(-30, 108, 1, 151),     # corner plaza
        rect(-60, 60, 1, 64),       # alley, east-west leg
        rect(-64, 60, -59, 151),    # alley, north-south leg
    ]
    objects = [
        building("b-west-01", -30, 0, 0, 28, 18, "glass office tower"),
        building("b-west-02", -30, 28, 0, 60, 24),
        building("b-west-03", -30, 64, 0, 108, 30, "biotech lab"),
        building("b-west-04", -59, 64, -30, 108, 16),
        building("b-west-05", -59, 108, -30, 150, 14),
        building("b-west-06", -120, 100, -64, 150, 20),
        building("b-west-07", -90, 60, -64, 100, 10),
        building("b-west-08", -60, 30, -30, 60, 12),
        building("b-north-01", -120, 166, -40, 210, 22),
        building("b-north-02", -40, 166, 0, 210, 26, "hotel"),
        building("b-north-03", 0, 200, 24, 215, 35),
        building("b-east-01", 24, 0, 54, 50, 20, "cafe"),
        building("b-east-02", 24, 50, 54, 100, 28),
        building("b-east-03", 24, 100, 54, 150, 32, "glass office tower"),
        building("b-east-04", 24, 150, 54, 200, 18),
        {"id": "r-south", "class": "road", "footprint": rect(-10, -12, 34, 0.05), "height": 0.0},
        prop("subway-kiosk", "subway-entrance", -6, 140, 4, 4, 3.5, "Subway sign"),
        prop("t-east-01", "tree", 22.5, 30, 1.5, 1.5, 8),
        prop("t-east-02", "tree", 22.5, 70, 1.5, 1.5, 8),
        prop("t-east-03", "tree", 22.5, 110, 1.5, 1.5, 8),
        prop("t-east-04", "tree", 22.5, 150, 1.5, 1.5, 8),
        prop("t-east-05", "tree", 22.5, 190, 1.5, 1.5, 8),
        prop("t-west-01", "tree", 1.5, 20, 1.5, 1.5, 7),
        prop("t-west-02", "tree", 1.5, 45, 1.5, 1.5, 7),
        prop("t-plaza-01", "tree", -25, 113, 2, 2, 9),
        prop("t-plaza-02", "tree", -25, 145, 2, 2, 9),
        prop("bench-plaza-01", "bench", -20, 126, 2, 0.6, 0.5),
        prop("bench-east-01", "bench", 23, 90, 0.6, 2, 0.5),
        prop("ped-01", "pedestrian", 21, 125, 0.6, 0.6, 1.7),
        prop("ped-02", "pedestrian", -15, 158, 0.6, 0.6, 1.7),
        prop("veh-01", "vehicle", -90, 158, 4.5, 2, 1.5),
        prop("sign-01", "sign", 0.6, 100, 0.4, 0.4, 3, "Main Street"),
        prop("fence-alley", "fence", -40, 61, 6, 0.3, 1.2),
    ]
    goals = [{"id": "subway", "name": "Subway station entrance", "polygon": box(-6, 140, 7, 7)}]
    spawns = [
        {"id": "default", "position": [12, 5], "heading": 0},
        {"id": "alt1", "position": [18, 12], "heading": 0},
        {"id": "alt2", "position": [8, 40], "heading": 0},
    ]
    return walkable, objects, goals, spawns


def tokyo_layout():
    """Main street runs east along y in [0, 18] for 180 m. A side street leaves
    north at x in [150, 164]; the corner plaza x in [100, 150], y in [18, 52]
    holds the subway kiosk. A covered arcade links the main street to the side
    street further east."""
    walkable = [
        rect(0, 0, 180, 18),         # main street
        rect(149, 17, 164, 150),     # side street
        rect(100, 17, 150, 52),      # corner plaza
        rect(60, 17, 65, 80),        # arcade, north leg
        rect(60, 75, 150, 80),       # arcade, east leg
    ]
    objects = [
        building("tk-s-01", 0, -25, 60, 0, 8, "wooden tea house"),
        building("tk-s-02", 60, -25, 120, 0, 30),
        building("tk-s-03", 120, -25, 180, 0, 40, "department store"),
        building("tk-n-01", 0, 18, 60, 70, 9, "wooden shop"),
        building("tk-n-02", 65, 18, 100, 75, 25),
        building("tk-n-03", 100, 52, 149, 75, 18),
        building("tk-n-04", 0, 70, 60, 120, 12),
        building("tk-n-05", 65, 80, 149, 150, 22),
        building("tk-e-01", 164, 18, 200, 150, 28, "glass office tower"),
        building("tk-end", 180, -25, 200, 18, 15),
        building("tk-top", 149, 150, 164, 165, 20),
        {"id": "r-west", "class": "road", "footprint": rect(-12, -5, 0.05, 23), "height": 0.0},
        prop("subway-kiosk", "subway-entrance", 138, 25, 4, 4, 3.5, "Subway sign"),
        prop("tr-01", "tree", 20, 16.5, 1.5, 1.5, 6),
        prop("tr-02", "tree", 45, 16.5, 1.5, 1.5, 6),
        prop("tr-03", "tree", 106, 46, 2, 2, 7),
        prop("tr-04", "tree", 146, 48, 2, 2, 7),
        prop("bench-01", "bench", 30, 1.2, 2, 0.6, 0.5),
        prop("bench-02", "bench", 110, 38, 0.6, 2, 0.5),
        prop("lantern-01", "sign", 100, 1, 0.4, 0.4, 2.5, "Ramen"),
        prop("ped-01", "pedestrian", 80, 2, 0.6, 0.6, 1.6),
        prop("ped-02", "pedestrian", 157, 100, 0.6, 0.6, 1.6),
        prop("bike-01", "vehicle", 62.5, 60, 0.6, 1.8, 1.1),
    ]
    goals = [{"id": "subway", "name": "Subway station entrance", "polygon": box(138, 25, 7, 7)}]
    spawns = [
        {"id": "default", "position": [5, 9], "heading": 90},
        {"id": "alt1", "position": [12, 4], "heading": 90},
        {"id": "alt2", "position": [40, 12], "heading": 90},
    ]
    return walkable, objects, goals, spawns


APPENDIX = {
    "kendall_base": {
        "season": "summer", "time_of_day": "morning", "weather": "bright", "locale": "Kendall Square",
        "description": "A bright summer morning in Kendall Square, Cambridge, MA. Modern glass buildings and bustling "
                       "streets with pedestrians, cyclists, and outdoor cafes creating a lively and vibrant atmosphere.",
    },
    "kendall_winter": {
        "season": "winter", "time_of_day": "morning", "weather": "snowy", "locale": "Kendall Square",
        "description": "A snowy winter morning in Kendall Square, Cambridge, MA. Heavy snow blankets the streets and "
                       "modern buildings, with bundled-up pedestrians, and a quiet stillness filling the air.",
    },
    "kendall_night": {
        "season": "summer", "time_of_day": "night", "weather": "quiet", "locale": "Kendall Square",
        "description": "A quiet summer nighttime streetscape in Kendall Square, Cambridge, MA. Streets are softly "
                       "illuminated by warm streetlights and the gentle glow of modern office buildings with large "
                       "glass facades.",
    },
    "tokyo": {
        "season": "summer", "time_of_day": "morning", "weather": "bright", "locale": "Tokyo",
        "description": "A bright summer morning in Tokyo, Japan. Mix of traditional wooden buildings and modern "
                       "structures. Bustling streets filled with pedestrians, cyclists, and outdoor tea houses "
                       "creating a vibrant atmosphere.",
    },
}


def write(name, layout):
    walkable, objects, goals, spawns = layout
    meta = dict(APPENDIX[name])
    meta["setting"] = "street"
    doc = {
        "schema_version": 1,
        "name": name,
        "metadata": meta,
        "walkable": walkable,
        "objects": objects,
        "goals": goals,
        "spawns": spawns,
    }
    text = json.dumps(doc, indent=1)
    # one [x, y] pair per line
    text = re.sub(r"\[\s+(-?[0-9.]+),\s+(-?[0-9.]+)\s+\]", r"[\1, \2]", text)
    (OUT / f"{name}.json").write_text(text + "\n")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name in ("kendall_base", "kendall_winter", "kendall_night"):
        write(name, kendall_layout())
    write("tokyo", tokyo_layout())


if __name__ == "__main__":
    main()
