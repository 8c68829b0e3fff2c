"""Validates the sample configs against the schema and checks it rejects known-bad variants."""
import copy
import json
import pathlib
import sys

import jsonschema

schema = json.loads(pathlib.Path(sys.argv[1]).read_text())
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)

configs = sorted(pathlib.Path(sys.argv[2]).glob("*.json"))
assert configs, "no sample configs"
failures = 0
for path in configs:
    errors = list(validator.iter_errors(json.loads(path.read_text())))
    for e in errors:
        print(f"{path.name}: {e.message}")
    failures += bool(errors)

base = json.loads(configs[0].read_text())
bad = {
    "unknown top-level key": lambda c: c.update(extra=1),
    "unknown algorithm": lambda c: c["algorithm"].update(name="abc-magic"),
    "two stop kinds": lambda c: c["schedule"].update(stop={"ess": 10, "proposals": 5}),
    "thresholds and adaptive": lambda c: c["schedule"].update(adaptive={"initial_epsilon": 1, "generations": 2}),
    "eta out of range": lambda c: c["algorithm"].update(policy={"eta1": 0, "eta2": 0.5}),
    "bad timing": lambda c: c["run"].update(timing="cpu"),
}
for name, mutate in bad.items():
    c = copy.deepcopy(base)
    mutate(c)
    if validator.is_valid(c):
        print(f"schema accepted: {name}")
        failures += 1

print(f"{len(configs)} configs, {len(bad)} rejections checked, {failures} failures")
sys.exit(1 if failures else 0)
