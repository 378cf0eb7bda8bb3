#!/usr/bin/env python3
"""Builds data/default_world.json from the hand-drawn zone maps below.

Legend:
  #  building           R  roof
  K  forbidden_backside L  forbidden_leftside
  P  car_park           b  bike_park
  =  road               k  bike_road
  -  pedestrian_road    z  zebra_crossing
  g  grass

Each map is written out as one zone entry per kind with an explicit cell
list, so the world file stays auditable without this script.
"""

import json
import pathlib
import sys

LEGEND = {
    "#": "building",
    "R": "roof",
    "K": "forbidden_backside",
    "L": "forbidden_leftside",
    "P": "car_park",
    "b": "bike_park",
    "=": "road",
    "k": "bike_road",
    "-": "pedestrian_road",
    "z": "zebra_crossing",
    "g": "grass",
}

# Six waypoints on a rectangular loop around the building, clockwise from
# the south-west corner. The back of the building faces north and its left
# side faces west.
WAYPOINTS = [
    ("south-west", (56.16970, 10.18950), [
        "gggLLLL#RRRRRRRR",
        "gggLLLL#RRRRRRRR",
        "gggLLLL#RRRRRRRR",
        "gggLLLL#RRRRRRRR",
        "gggLLLL#RRRRRRRR",
        "gggLLLL#########",
        "----------------",
        "PPPPPPPPg-bbbbbb",
        "PPPPPPPPg-bbbbbb",
        "PPPPPPPPg-kkkkkk",
        "PPPPPPPPg-kkkkkk",
        "----------------",
        "======zz========",
        "======zz========",
        "----------------",
        "gggggggggggggggg",
    ]),
    ("south", (56.16970, 10.19000), [
        "RRRRRRRRRRRRRRRR",
        "RRRRRRRRRRRRRRRR",
        "RRRRRRRRRRRRRRRR",
        "################",
        "----------------",
        "PPPPPPPPPPPPPPPP",
        "PPPPPPPPPPPPPPPP",
        "PPPPPPPPPPPPPPPP",
        "gggg--gggggg--gg",
        "==========zz====",
        "==========zz====",
        "kkkkkkkkkkkkkkkk",
        "----------------",
        "gggggggggggggggg",
        "bbbbbgggggbbbbbb",
        "bbbbbgggggbbbbbb",
    ]),
    ("south-east", (56.16970, 10.19050), [
        "RRRRRRRR#-kkbbbb",
        "RRRRRRRR#-kkbbbb",
        "RRRRRRRR#-kkbbbb",
        "RRRRRRRR#-kkbbbb",
        "RRRRRRRR#-kkgggg",
        "#########-kkgggg",
        "----------kk----",
        "PPPPPPPg--kk-PPP",
        "PPPPPPPg--kk-PPP",
        "PPPPPPPg--kk-PPP",
        "----------kk----",
        "=============zz=",
        "=============zz=",
        "----------------",
        "gggggggggggggggg",
        "gggggggggggggggg",
    ]),
    ("east", (56.17010, 10.19050), [
        "KKKKKKKKKKg-==kb",
        "KKKKKKKKKKg-==kb",
        "KKKKKKKKKKg-==kb",
        "########KKg-==kb",
        "RRRRRRR#KKg-==kb",
        "RRRRRRR#----zz-b",
        "RRRRRRR#-PPg==kb",
        "RRRRRRR#-PPg==kb",
        "RRRRRRR#-PPg==kb",
        "RRRRRRR#-PPg==kb",
        "RRRRRRR#-PPg==kb",
        "RRRRRRR#-PPg==kb",
        "########-PPg==kb",
        "---------PPg==kb",
        "gggggggg-PPg==kb",
        "gggggggg-PPg==kb",
    ]),
    ("north", (56.17030, 10.19000), [
        "================",
        "=======zz=======",
        "kkkkkkkkkkkkkkkk",
        "PPPP-gggbbb-PPPP",
        "PPPP-gggbbb-PPPP",
        "KKKKKKKKKKKKKKKK",
        "KKKKKKKKKKKKKKKK",
        "KKKKKKKKKKKKKKKK",
        "KKKKKKKKKKKKKKKK",
        "################",
        "RRRRRRRRRRRRRRRR",
        "RRRRRRRRRRRRRRRR",
        "RRRRRRRRRRRRRRRR",
        "RRRRRRRRRRRRRRRR",
        "RRRRRRRRRRRRRRRR",
        "RRRRRRRRRRRRRRRR",
    ]),
    ("west", (56.17010, 10.18950), [
        "==k-LLLLLL#RRRRR",
        "==k-LLLLLL#RRRRR",
        "==k-LLLLLL#RRRRR",
        "==k-LLLLLL#RRRRR",
        "zzk-LLLLLL#RRRRR",
        "==k-LLLLLL#RRRRR",
        "==k-LLLLLL#RRRRR",
        "==k-LLLLLL#RRRRR",
        "==k-LLLLLL#RRRRR",
        "==k-LLLLLL#RRRRR",
        "==k-LLLLLL#RRRRR",
        "==k-LLLLLL######",
        "==k-gggggggggggg",
        "==k-PPPPPPPbbbbb",
        "==k-PPPPPPPbbbbb",
        "==k-------------",
    ]),
]

RULES = [
    {"category": "car", "zones": ["car_park", "road"], "count": [3, 8]},
    {"category": "pedestrian",
     "zones": ["pedestrian_road", "zebra_crossing", "grass", "forbidden_leftside"], "count": [2, 6]},
    {"category": "bus", "zones": ["road"], "count": [0, 1]},
    {"category": "van", "zones": ["road", "car_park"], "count": [0, 2]},
    {"category": "truck", "zones": ["road"], "count": [0, 2]},
    {"category": "bicycle", "zones": ["bike_road", "bike_park"], "count": [1, 4]},
    {"category": "motorbike", "zones": ["road", "car_park", "bike_road"], "count": [0, 2]},
    {"category": "trailer", "zones": ["car_park"], "count": [0, 1]},
]

RARE_LIST = [
    ["pedestrian", "roof"],
    ["truck", "car_park"],
    ["bicycle", "car_park"],
]


def zones_of(rows):
    assert len(rows) == 16, rows
    cells = {}
    for r, line in enumerate(rows):
        assert len(line) == 16, (r, line)
        for c, glyph in enumerate(line):
            cells.setdefault(LEGEND[glyph], []).append([r, c])
    return [{"kind": kind, "cells": cells[kind]} for kind in LEGEND.values() if kind in cells]


def main():
    world = {
        "grid": {"image_width": 1080, "image_height": 1080, "cells_x": 16, "cells_y": 16},
        "seed": 20200901,
        "waypoints": [
            {"name": name, "gps": list(gps), "gps_jitter": 1e-5, "zones": zones_of(rows)}
            for name, gps, rows in WAYPOINTS
        ],
        "rules": RULES,
        "rare_list": RARE_LIST,
    }
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data/default_world.json")
    out.write_text(json.dumps(world, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main()
