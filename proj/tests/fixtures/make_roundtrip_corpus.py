#!/usr/bin/env python3
"""Regenerates tests/fixtures/roundtrip/{gt,pred}: 30 ground-truth and 20
prediction label files covering edge boxes, empty files, blank lines and
mixed whitespace. Values carry at most six fractional digits."""
import pathlib
import random

root = pathlib.Path(__file__).resolve().parent / "roundtrip"
rng = random.Random(2024)

EDGE_BOXES = [
    (0, 0.0, 0.0, 0.1, 0.1),
    (1, 1.0, 1.0, 0.2, 0.2),
    (0, 0.0, 1.0, 0.2, 0.2),
    (1, 0.5, 0.5, 1.0, 1.0),
    (0, 0.999999, 0.000001, 0.000001, 0.000001),
    (1, 1.0, 0.0, 1.0, 0.05),
]


def num(v, style):
    if style == 0:
        return f"{v:.6f}"
    text = f"{v:.6f}".rstrip("0").rstrip(".")
    return text or "0"


def line(det, conf, style):
    cls, cx, cy, w, h = det
    fields = [str(cls)] + [num(v, style) for v in (cx, cy, w, h)]
    if conf is not None:
        fields.append(num(conf, style))
    sep = "\t" if style == 2 else " "
    return sep.join(fields)


def random_det():
    w = round(rng.uniform(0.01, 0.3), 6)
    h = round(rng.uniform(0.01, 0.3), 6)
    return (rng.randint(0, 1), round(rng.uniform(0, 1), 6), round(rng.uniform(0, 1), 6), w, h)


def write(kind, index, prediction):
    path = root / kind / f"{kind}_{index:02d}.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    if index % 10 == 3:
        path.write_text("")  # empty frame
        return
    dets = [random_det() for _ in range(rng.randint(1, 12))]
    if index % 5 == 0:
        dets[:0] = EDGE_BOXES
    style = index % 3
    eol = "\r\n" if index % 7 == 4 else "\n"
    lines = []
    for d in dets:
        conf = round(rng.uniform(0, 1), 6) if prediction else None
        if prediction and index % 4 == 1:
            conf = rng.choice([0.0, 1.0, conf])
        lines.append(line(d, conf, style) + ("  " if index % 6 == 5 else ""))
        if index % 8 == 2:
            lines.append("")  # blank line, skipped by the parser
    body = eol.join(lines) + (eol if index % 9 != 8 else "")
    path.write_bytes(body.encode())


for i in range(30):
    write("gt", i, False)
for i in range(20):
    write("pred", i, True)
