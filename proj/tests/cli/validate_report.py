"""Runs the demo and validates its report and a certificate against the shipped schema."""
import json
import pathlib
import subprocess
import sys

import jsonschema

cli, schema_path, work = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
work.mkdir(parents=True, exist_ok=True)
schema = json.loads(schema_path.read_text())
jsonschema.Draft202012Validator.check_schema(schema)

for extra in ([], ["--act", "abs", "--corollary"]):
    out = work / ("schema_demo%s.json" % ("_abs" if extra else ""))
    subprocess.run([cli, "demo", "--seed", "7", "--samples", "50", *extra, "--out", str(out)], check=True)
    report = json.loads(out.read_text())
    jsonschema.validate(report, schema)
    assert report["verdict"] is True, "demo verdict is false"
    assert all(c["passed"] for c in report["checks"])

cert_schema = {"$defs": schema["$defs"], "$ref": "#/$defs/certificate"}
subprocess.run([cli, "gen-data", "--spec", "xor", "--out", str(work / "schema_xor.csv")], check=True)
subprocess.run([cli, "construct", "--data", str(work / "schema_xor.csv"), "--dims", "2,3,1", "--act", "relu",
                "--out", str(work / "schema_min.json")], check=True)
subprocess.run([cli, "verify", "--net", str(work / "schema_min.json"), "--data", str(work / "schema_xor.csv"),
                "--samples", "50", "--cert-out", str(work / "schema_cert.json")], check=True)
jsonschema.validate(json.loads((work / "schema_cert.json").read_text()), cert_schema)
print("report and certificate validate")
