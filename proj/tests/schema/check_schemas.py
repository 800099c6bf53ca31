#!/usr/bin/env python3
"""Runs every vpfix subcommand with --json and validates its output against schemas/."""

import argparse
import json
import signal
import struct
import subprocess
import sys
import tempfile
import urllib.request
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator
from PIL import Image, ImageDraw

failures = []


def load_schemas(root):
    schemas = {}
    for path in sorted(root.glob("*.schema.json")):
        schema = json.loads(path.read_text())
        Draft202012Validator.check_schema(schema)
        schemas[path.name.removesuffix(".schema.json")] = Draft202012Validator(schema)
    return schemas


def check(schemas, name, label, doc):
    errors = sorted(schemas[name].iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        failures.append(label)
        print(f"FAIL {label}: {name}")
        for e in errors[:5]:
            print(f"    at /{'/'.join(map(str, e.path))}: {e.message}")
    else:
        print(f"ok   {label}: {name}")


def run(cli, *args, expect=0):
    proc = subprocess.run([cli, "--json", *args], capture_output=True, text=True, timeout=60)
    if proc.returncode != expect:
        failures.append(" ".join(args[:1]))
        print(f"FAIL {args[0]}: exit {proc.returncode}, expected {expect}\n{proc.stderr}")
    return json.loads(proc.stdout)


def write_fixtures(d):
    img = np.zeros((48, 64), np.uint8)
    img[10:38, 20:44] = 200
    Image.fromarray(img).save(d / "square.png")
    rng = np.random.default_rng(3)
    # Strokes aimed at (80, -300) so detect-vps has a candidate to report.
    lines = Image.new("L", (160, 160))
    draw = ImageDraw.Draw(lines)
    for x in np.linspace(10, 150, 8):
        t = rng.uniform(0.5, 0.8)
        draw.line([(x, 155), (x + t * (80 - x), 155 + t * (-300 - 155))], fill=255, width=3)
    lines.save(d / "lines.png")
    seg = np.zeros((32, 32), np.uint8)
    seg[11:21, 11:21] = 1
    Image.fromarray(seg).save(d / "seg.png")
    (d / "vps.json").write_text(json.dumps({"vps": [[1, 0, 0], [0, 1, 0]]}))
    values = rng.standard_normal(64).astype(np.float32)
    (d / "z0.lat").write_bytes(b"VPLT0001" + struct.pack("<4I", 3, 4, 4, 4) + values.tobytes())
    Image.fromarray(np.full((32, 32), 255, np.uint8)).convert("1").save(d / "all.png")
    (d / "images").mkdir()
    (d / "ann").mkdir()
    Image.open(d / "square.png").save(d / "images" / "sq.png")
    (d / "ann" / "sq.vps.json").write_text(json.dumps({"vps": [[0, 1, 0]]}))


def http_json(base, method, path, body=None, headers=None):
    data = None if body is None else json.dumps(body).encode()
    req = urllib.request.Request(base + path, data=data, method=method, headers=headers or {})
    if data is not None:
        req.add_header("Content-Type", "application/json")
    with urllib.request.urlopen(req, timeout=30) as resp:
        return json.loads(resp.read())


def check_service(cli, schemas, d, golden):
    proc = subprocess.Popen(
        [cli, "--json", "serve", "--listen", "127.0.0.1:0", "--images", str(d / "images"),
         "--store", str(d / "store")],
        stdout=subprocess.PIPE, text=True)
    try:
        first = json.loads(proc.stdout.readline())
        check(schemas, "serve_events", "serve (listening)", first)
        base = "http://" + first["listening"]
        check(schemas, "health", "GET /api/health", http_json(base, "GET", "/api/health"))
        check(schemas, "image_list", "GET /api/images", http_json(base, "GET", "/api/images"))
        check(schemas, "vp_candidates", "GET vp-candidates",
              http_json(base, "GET", "/api/images/sq/vp-candidates"))
        record = json.loads((golden / "rectangle.annotation.json").read_text())
        record.update(image_id="sq", image_size=[64, 48])
        saved = http_json(base, "PUT", "/api/images/sq/annotation", record)
        check(schemas, "annotation_record", "PUT annotation", saved)
        check(schemas, "annotation_record", "GET annotation",
              http_json(base, "GET", "/api/images/sq/annotation"))
        manifest = http_json(base, "POST", "/api/export", {"name": "set", "image_ids": ["sq"]})
        check(schemas, "dataset_manifest", "POST /api/export", manifest)
        on_disk = d / "store" / "exports" / "set" / "manifest.json"
        check(schemas, "dataset_manifest", "manifest.json", json.loads(on_disk.read_text()))
    finally:
        proc.send_signal(signal.SIGTERM)
        rest = proc.stdout.read()
        proc.wait(timeout=30)
    check(schemas, "serve_events", "serve (stopped)", json.loads(rest) if rest.strip() else {})
    if proc.returncode != 0:
        failures.append("serve exit")
        print(f"FAIL serve: exit {proc.returncode}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True, type=Path)
    ap.add_argument("--schemas", required=True, type=Path)
    args = ap.parse_args()
    cli = str(args.cli)
    schemas = load_schemas(args.schemas)
    golden = Path(__file__).resolve().parent.parent / "golden"

    with tempfile.TemporaryDirectory() as tmp:
        d = Path(tmp)
        write_fixtures(d)
        check(schemas, "annotation_record", "golden annotation",
              json.loads((golden / "rectangle.annotation.json").read_text()))
        check(schemas, "score", "score",
              run(cli, "score", "--pred", str(d / "square.png"), "--gt", str(d / "square.png"),
                  "--vps", str(d / "vps.json")))
        check(schemas, "grad_check", "grad-check", run(cli, "grad-check", "--trials", "2",
                                                       "--step", "1e-6"))
        out = run(cli, "extract-outlines", "--seg", str(d / "seg.png"), "--vps",
                  str(d / "vps.json"), "--out", str(d / "outl"))
        check(schemas, "extract_outlines", "extract-outlines", out)
        check(schemas, "outlines", "outlines file", json.loads(Path(out["outlines_file"]).read_text()))
        check(schemas, "make_mask", "make-mask",
              run(cli, "make-mask", "--annotation", str(golden / "rectangle.annotation.json"),
                  "--out", str(d / "m.png")))
        check(schemas, "vp_candidates", "detect-vps (none)",
              run(cli, "detect-vps", "--image", str(d / "square.png")))
        found = run(cli, "detect-vps", "--image", str(d / "lines.png"), "--out", str(d / "c.json"))
        check(schemas, "vp_candidates", "detect-vps", found)
        if not found["candidates"]:
            failures.append("detect-vps found nothing")
            print("FAIL detect-vps: no candidate on the converging-lines fixture")
        check(schemas, "vp_candidates", "detect-vps --out file", json.loads((d / "c.json").read_text()))
        check(schemas, "aa_report", "eval-aa",
              run(cli, "eval-aa", "--images", str(d / "images"), "--annotations", str(d / "ann"),
                  "--thresholds", "0.5,3,10", "--out", str(d / "aa.json")))
        check(schemas, "aa_report", "aa_report.json", json.loads((d / "aa.json").read_text()))
        check(schemas, "simulate_inpaint", "simulate-inpaint",
              run(cli, "simulate-inpaint", "--z0", str(d / "z0.lat"), "--mask", str(d / "all.png"),
                  "--predictor", "mock:true-eps", "--out", str(d / "o.lat")))
        check(schemas, "error", "validation error", run(cli, "grad-check", "--size", "2", expect=3))
        check(schemas, "error", "io error",
              run(cli, "make-mask", "--annotation", str(d / "none.json"), "--out", str(d / "x.png"),
                  expect=2))
        check_service(cli, schemas, d, golden)

    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
