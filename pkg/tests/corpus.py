"""Every CLI invocation over the fixture corpus.

Run as a script, ``python corpus.py OUTDIR`` writes one file per invocation
holding the exit code, stdout and stderr, so two runs can be diffed bytewise.
"""
import contextlib
import io
import itertools
import json
import sys
from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"


def invocations():
    out = []
    for path in sorted(FIXTURES.glob("*.json")):
        doc = json.loads(path.read_text())
        inst = ["--instance", str(path)]
        vectors = sorted(doc.get("vectors", {}))
        directions = sorted(doc.get("directions", {}))
        market = doc["acceptance"]["label"] == "market"
        systemic = doc["acceptance"]["label"] == "systemic"
        out.append(["diag"] + inst)
        for v in vectors:
            out.append(["region", v] + inst)
            for w in directions:
                out.append(["scalar", v, w, "--dual"] + inst)
        for x, y in itertools.combinations(vectors, 2):
            out.append(["compare", x, y] + inst)
        if market:
            for w in directions:
                out.append(["cps", w] + inst)
                for v in vectors:
                    out.append(["cps", w, "--vector", v] + inst)
        if systemic:
            out.append(["conjugate"] + inst)
            for v in vectors:
                out.append(["conjugate", "--vector", v] + inst)
    return out


def run(argv):
    from setrisk.cli import main

    stdout, stderr = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
        code = main(argv)
    return code, stdout.getvalue(), stderr.getvalue()


def key(argv):
    name = Path(argv[argv.index("--instance") + 1]).stem
    rest = [a for a in argv if a != "--instance" and not a.endswith(".json")]
    return name + "__" + "_".join(a.lstrip("-") for a in rest)


if __name__ == "__main__":
    target = Path(sys.argv[1])
    target.mkdir(parents=True, exist_ok=True)
    for argv in invocations():
        code, out, err = run(argv)
        (target / key(argv)).write_text(f"exit {code}\n{out}{err}", encoding="utf-8")
