"""Regenerates the toy dataset: 20 small synthetic images with face boxes,
plus matching prediction runs, ground truth and a worker submission log.

Run from this directory: python3 generate.py
"""

import json
import os

import numpy as np
from PIL import Image, ImageDraw

rng = np.random.default_rng(2022)

CATEGORIES = {
    0: ("bow tie", "clothing"),
    1: ("harmonica", "instrument"),
    2: ("volleyball", "sports"),
    3: ("lakeside", "scene"),
    4: ("goldfish", "animal"),
}
W, H = 96, 72
N = 20


def rand_box(max_w, max_h):
    w = int(rng.integers(8, max_w))
    h = int(rng.integers(8, max_h))
    x = int(rng.integers(0, W - w))
    y = int(rng.integers(0, H - h))
    return [x, y, x + w, y + h]


def render(faces, objects):
    yy, xx = np.mgrid[0:H, 0:W]
    base = rng.uniform(0.2, 0.8, size=3)
    tilt = rng.uniform(-0.004, 0.004, size=(3, 2))
    img = np.stack(
        [base[c] + tilt[c, 0] * xx + tilt[c, 1] * yy for c in range(3)], axis=-1
    )
    img += rng.normal(0, 0.03, size=img.shape)
    img = (np.clip(img, 0, 1) * 255).round().astype(np.uint8)
    pil = Image.fromarray(img, "RGB")
    draw = ImageDraw.Draw(pil)
    for o in objects:
        draw.rectangle([o[0], o[1], o[2] - 1, o[3] - 1], outline=(20, 20, 120), width=2)
    for f in faces:
        draw.ellipse([f[0], f[1], f[2] - 1, f[3] - 1], fill=(224, 172, 140))
        cx, cy = (f[0] + f[2]) / 2, (f[1] + f[3]) / 2
        r = max(1, (f[2] - f[0]) // 8)
        for dx in (-1, 1):
            ex = cx + dx * (f[2] - f[0]) / 5
            draw.ellipse([ex - r, cy - r * 2, ex + r, cy], fill=(30, 30, 30))
    return pil


def main():
    os.makedirs("images", exist_ok=True)
    records = []
    for i in range(N):
        cat = i % len(CATEGORIES)
        n_faces = int(rng.choice([0, 0, 1, 1, 2, 3]))
        faces = [rand_box(28, 28) for _ in range(n_faces)]
        objects = [rand_box(60, 50)] if i % 3 != 2 else []
        jpeg = i in (5, 13)
        name = f"images/toy{i:02d}.{'jpg' if jpeg else 'png'}"
        img = render(faces, objects)
        if jpeg:
            img.save(name, quality=92)
        else:
            img.save(name, optimize=False)
        rec = {
            "image_id": f"toy{i:02d}",
            "file": name,
            "width": W,
            "height": H,
            "category": cat,
            "category_name": CATEGORIES[cat][0],
            "faces": faces,
        }
        if objects:
            rec["objects"] = objects
        records.append(rec)

    with open("annotations.jsonl", "w") as f:
        for r in records:
            f.write(json.dumps(r, separators=(",", ":")) + "\n")

    with open("hierarchy.tsv", "w") as f:
        for c, (_, sup) in CATEGORIES.items():
            f.write(f"{c}\t{sup}\n")

    # ground truth: drop one face here and there, add a missed face elsewhere
    with open("ground_truth.jsonl", "w") as f:
        for i, r in enumerate(records):
            g = dict(r)
            faces = list(r["faces"])
            if i % 4 == 1 and faces:
                faces = faces[:-1]
            if i % 5 == 2:
                faces.append(rand_box(20, 20))
            g["faces"] = faces
            f.write(json.dumps(g, separators=(",", ":")) + "\n")

    # worker submissions for a few images; the last one for toy03 wins
    with open("submissions.jsonl", "w") as f:
        subs = [
            ("s1", "toy01", [[10, 10, 30, 34]], 1700000000),
            ("s1", "toy03", [], 1700000005),
            ("s2", "toy03", [[40, 20, 60, 44], [40.5, 20, 60, 44]], 1700000010),
            ("s2", "toy07", [[-4, 50, 20, 80]], 1700000020),
        ]
        for sid, img, boxes, ts in subs:
            f.write(
                json.dumps(
                    {"session_id": sid, "image_id": img, "boxes": boxes, "timestamp": ts},
                    separators=(",", ":"),
                )
                + "\n"
            )

    # two seeds of a baseline and a face-blurred model
    os.makedirs("predictions", exist_ok=True)
    for variant, noise in (("baseline", 0.8), ("blurred", 1.0)):
        for seed in range(2):
            with open(f"predictions/{variant}_seed{seed}.jsonl", "w") as f:
                for r in records:
                    scores = rng.normal(0, noise, size=len(CATEGORIES))
                    scores[r["category"]] += 1.2
                    ranked = [[c, round(float(s), 4)] for c, s in enumerate(scores)]
                    f.write(
                        json.dumps(
                            {"image_id": r["image_id"], "label": r["category"], "ranked": ranked},
                            separators=(",", ":"),
                        )
                        + "\n"
                    )


if __name__ == "__main__":
    main()
